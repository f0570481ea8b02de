//! The Fourier walk's Polya surface over the psi_F(a, phi) family.
//!
//! For states in the family, p0(a, phi, t) = (K1(t) - K2(t) g(a, phi)) / t^2
//! with g = a sqrt(1/2 - a^2) (cos phi - sin phi). Two calibration walks pin
//! K1 and K2 at every even t; the surface is then exact for the whole family.

use crate::coin::{fourier_coin, psi_f};
use crate::error::{Error, Result};
use crate::evolve::evolve_collect;

pub fn surface_g(a: f64, phi: f64) -> f64 {
    a * (0.5 - a * a).max(0.0).sqrt() * (phi.cos() - phi.sin())
}

/// |g| never exceeds sqrt(2)/4 on the domain a in [0, 1/sqrt2].
const G_MAX: f64 = std::f64::consts::SQRT_2 / 4.0;

#[derive(Debug, Clone)]
pub struct FourierSurfaceModel {
    /// Even times 2, 4, ..., t_max.
    pub times: Vec<u64>,
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
}

impl FourierSurfaceModel {
    /// p0 at the i-th stored time.
    pub fn p0_at(&self, a: f64, phi: f64, i: usize) -> f64 {
        let t = self.times[i] as f64;
        ((self.k1[i] - self.k2[i] * surface_g(a, phi)) / (t * t)).clamp(0.0, 1.0)
    }

    /// The model must reconstruct a probability over the whole (a, phi) domain;
    /// since p0 is linear in g it suffices to check the two extremes of g.
    fn validate(&self) -> Result<()> {
        for i in 0..self.times.len() {
            let t2 = (self.times[i] as f64).powi(2);
            for g in [G_MAX, -G_MAX] {
                let p = (self.k1[i] - self.k2[i] * g) / t2;
                if !(-1e-12..=1.0 + 1e-12).contains(&p) {
                    return Err(Error::BadSeries(format!(
                        "surface model leaves [0,1]: p = {p} at t = {}, g = {g}",
                        self.times[i]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Calibrate K1, K2 from direct simulations at psi_F(1/2, 0) and
/// psi_F(1/2, pi/2), where g = +1/4 and -1/4.
pub fn fit_fourier_surface(t_max: u64, mem_cap: Option<u64>) -> Result<FourierSurfaceModel> {
    let coin = fourier_coin();
    let plus = psi_f(0.5, 0.0)?;
    let minus = psi_f(0.5, std::f64::consts::FRAC_PI_2)?;
    let (sp, _) = evolve_collect(&coin, &plus, t_max, &[], mem_cap)?;
    let (sm, _) = evolve_collect(&coin, &minus, t_max, &[], mem_cap)?;
    let mut times = Vec::new();
    let mut k1 = Vec::new();
    let mut k2 = Vec::new();
    for (&(t, pp), &(tm, pm)) in sp.positive_entries().iter().zip(sm.positive_entries()) {
        debug_assert_eq!(t, tm);
        let t2 = (t as f64).powi(2);
        // pp = (K1 - K2/4)/t^2, pm = (K1 + K2/4)/t^2
        times.push(t);
        k1.push(t2 * 0.5 * (pp + pm));
        k2.push(t2 * 2.0 * (pm - pp));
    }
    let model = FourierSurfaceModel { times, k1, k2 };
    model.validate()?;
    Ok(model)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SurfaceExtremum {
    pub a: f64,
    pub phi: f64,
    pub value: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct PolyaSurface {
    /// (a, phi, P_n) in row-major (a outer, phi inner) grid order.
    #[serde(skip)]
    pub rows: Vec<(f64, f64, f64)>,
    pub min: SurfaceExtremum,
    pub max: SurfaceExtremum,
    pub n_terms: usize,
}

/// P_n(a, phi) over a grid from the first n_terms exact terms of the model.
pub fn fourier_polya_surface(
    model: &FourierSurfaceModel,
    a_grid: &[f64],
    phi_grid: &[f64],
    n_terms: usize,
) -> Result<PolyaSurface> {
    if n_terms > model.times.len() {
        return Err(Error::BadSeries(format!(
            "surface model stores {} terms, {n_terms} requested",
            model.times.len()
        )));
    }
    let mut rows = Vec::with_capacity(a_grid.len() * phi_grid.len());
    let mut min: Option<SurfaceExtremum> = None;
    let mut max: Option<SurfaceExtremum> = None;
    for &a in a_grid {
        for &phi in phi_grid {
            let mut prod = 1.0;
            for i in 0..n_terms {
                prod *= 1.0 - model.p0_at(a, phi, i);
            }
            let p = 1.0 - prod;
            rows.push((a, phi, p));
            if min.as_ref().is_none_or(|m| p < m.value) {
                min = Some(SurfaceExtremum { a, phi, value: p });
            }
            if max.as_ref().is_none_or(|m| p > m.value) {
                max = Some(SurfaceExtremum { a, phi, value: p });
            }
        }
    }
    Ok(PolyaSurface {
        rows,
        min: min.expect("non-empty grid"),
        max: max.expect("non-empty grid"),
        n_terms,
    })
}

/// The grids used for the published surface: a in steps of 0.02 up to 0.70
/// plus the endpoint 1/sqrt2, phi at 64 equal steps around the circle
/// (both extremal angles 3pi/4 and 7pi/4 are grid-exact).
pub fn default_surface_grids() -> (Vec<f64>, Vec<f64>) {
    let mut a_grid: Vec<f64> = (0..=35).map(|i| i as f64 * 0.02).collect();
    a_grid.push(std::f64::consts::FRAC_1_SQRT_2);
    let phi_grid = (0..64)
        .map(|j| 2.0 * std::f64::consts::PI * j as f64 / 64.0)
        .collect();
    (a_grid, phi_grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_of_the_state_family() {
        let q = std::f64::consts::SQRT_2 / 4.0;
        assert!((surface_g(0.5, 0.0) - 0.25).abs() < 1e-15);
        assert!((surface_g(0.5, std::f64::consts::FRAC_PI_2) + 0.25).abs() < 1e-15);
        // extremes of g over the family sit at phi = 7pi/4 and 3pi/4
        assert!((surface_g(0.5, 7.0 * std::f64::consts::FRAC_PI_4) - q).abs() < 1e-12);
        assert!((surface_g(0.5, 3.0 * std::f64::consts::FRAC_PI_4) + q).abs() < 1e-12);
        assert_eq!(surface_g(0.0, 1.0), 0.0);
        assert!(surface_g(std::f64::consts::FRAC_1_SQRT_2, 1.0).abs() < 1e-7);
    }

    #[test]
    fn default_grids_hit_the_extremal_angles() {
        let (a_grid, phi_grid) = default_surface_grids();
        assert_eq!(a_grid.len(), 37);
        assert_eq!(phi_grid.len(), 64);
        assert!(a_grid.iter().any(|&a| (a - 0.5).abs() < 1e-12));
        assert_eq!(*a_grid.last().unwrap(), std::f64::consts::FRAC_1_SQRT_2);
        assert!(phi_grid.iter().any(|&p| (p - 3.0 * std::f64::consts::FRAC_PI_4).abs() < 1e-12));
        assert!(phi_grid.iter().any(|&p| (p - 7.0 * std::f64::consts::FRAC_PI_4).abs() < 1e-12));
    }

    #[test]
    fn model_clamps_to_probabilities() {
        let m = FourierSurfaceModel { times: vec![2], k1: vec![8.0], k2: vec![40.0] };
        assert_eq!(m.p0_at(0.5, 0.0, 0), 0.0); // (8 - 10)/4 clamped up
        assert_eq!(m.p0_at(0.5, std::f64::consts::FRAC_PI_2, 0), 1.0); // (8 + 10)/4 clamped down
    }

    #[test]
    fn calibrated_model_reconstructs_the_family() {
        let t_max = 200;
        let model = fit_fourier_surface(t_max, None).unwrap();
        assert_eq!(model.times.len(), 100);
        // K1(2) = 1, K2(2) = 0: both calibration walks return with p0(2) = 1/4
        assert!((model.k1[0] - 1.0).abs() < 1e-12);
        assert!(model.k2[0].abs() < 1e-12);
        assert!((model.k1[49] - 1.871517409068).abs() < 1e-9);
        assert!((model.k2[49] - 3.972513827408).abs() < 1e-9);

        // the model must reproduce its own calibration states exactly
        let coin = fourier_coin();
        for (a, phi) in [(0.5, 0.0), (0.5, std::f64::consts::FRAC_PI_2)] {
            let (sim, _) = evolve_collect(&coin, &psi_f(a, phi).unwrap(), t_max, &[], None).unwrap();
            for (i, &(t, p)) in sim.positive_entries().iter().enumerate() {
                assert_eq!(t, model.times[i]);
                assert!((model.p0_at(a, phi, i) - p).abs() < 1e-14);
            }
        }

        // held-out family member: prediction against an independent simulation
        let (a, phi) = (0.3, 1.0);
        let (sim, _) = evolve_collect(&coin, &psi_f(a, phi).unwrap(), t_max, &[], None).unwrap();
        let mut worst = 0.0f64;
        for (i, &(_, p)) in sim.positive_entries().iter().enumerate() {
            worst = worst.max((model.p0_at(a, phi, i) - p).abs());
        }
        assert!(worst < 1e-10, "holdout error {worst:.3e}");

        // surface extremes over the published grid, first 100 terms exact
        let (a_grid, phi_grid) = default_surface_grids();
        let surface = fourier_polya_surface(&model, &a_grid, &phi_grid, 100).unwrap();
        assert!((surface.min.value - 0.310770).abs() < 5e-6, "min {}", surface.min.value);
        assert!((surface.max.value - 0.661958).abs() < 5e-6, "max {}", surface.max.value);
        assert!((surface.min.a - 0.5).abs() < 1e-12);
        assert!((surface.min.phi - 7.0 * std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert!((surface.max.a - 0.5).abs() < 1e-12);
        assert!((surface.max.phi - 3.0 * std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert_eq!(surface.rows.len(), 37 * 64);
        assert!(fourier_polya_surface(&model, &a_grid, &phi_grid, 101).is_err());
    }
}
