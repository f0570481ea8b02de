//! Stationary-point taxonomy of the eigenphase surfaces: grid scan for
//! gradient minima, Newton refinement off-grid, clustering of refined points
//! into isolated saddles and stationary continua.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::eig::{circ_dist, symmetric_eigenvalues, wrap_angle};
use super::{band_value_at, SpectralGrid, DEGENERATE_GAP};
use crate::error::{Error, Result};

/// Hessian eigenvalue magnitude under which a direction counts as flat.
const KERNEL_TOL: f64 = 1e-6;
/// Newton convergence target on |grad omega|.
const GRAD_TOL: f64 = 1e-8;
const GRAD_H: f64 = 1e-5;
const HESS_H: f64 = 1e-4;
const MAX_NEWTON_ITERS: usize = 50;

#[derive(Debug, Clone, serde::Serialize)]
pub struct FlatBand {
    pub band: usize,
    pub phase: f64,
    pub spread: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SaddlePoint {
    pub band: usize,
    pub k: Vec<f64>,
    pub omega: f64,
    pub hessian_eigenvalues: Vec<f64>,
    pub kernel_dim: usize,
    /// Stationary-phase amplitude decays like t^-order; p0 like t^-2*order.
    pub amplitude_order: f64,
    #[serde(skip)]
    pub vector: Vec<Complex64>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SaddleContinuum {
    pub band: usize,
    /// Axis held (approximately) constant along the continuum.
    pub fixed_axis: usize,
    pub fixed_value: f64,
    pub phase: f64,
    pub hessian_eigenvalues: Vec<f64>,
    pub kernel_dim: usize,
    pub n_members: usize,
    /// Extent along the widest axis.
    pub span: f64,
    pub amplitude_order: f64,
    /// Refined stationary points, sorted along the varying axis.
    #[serde(skip)]
    pub members: Vec<Vec<f64>>,
    #[serde(skip)]
    pub member_vectors: Vec<Vec<Complex64>>,
}

#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct SaddleReport {
    pub flat_bands: Vec<FlatBand>,
    pub points: Vec<SaddlePoint>,
    pub continua: Vec<SaddleContinuum>,
    /// Candidates whose Newton refinement failed to converge.
    pub dropped: usize,
}

/// Snap values within 1e-8 of -pi onto +pi, so coordinates on a zone-edge
/// line all land on the same side and axis spans stay tight.
fn pin_pi(x: f64) -> f64 {
    if (x + std::f64::consts::PI).abs() < 1e-8 {
        std::f64::consts::PI
    } else {
        x
    }
}

/// Signed angular difference wrapped to (-pi, pi].
fn circ_signed(x: f64) -> f64 {
    let mut r = x % std::f64::consts::TAU;
    if r > std::f64::consts::PI {
        r -= std::f64::consts::TAU;
    }
    if r <= -std::f64::consts::PI {
        r += std::f64::consts::TAU;
    }
    r
}

fn grad(coin: &crate::coin::CoinOperator, k: &[f64], vref: &[Complex64]) -> Vec<f64> {
    let d = k.len();
    (0..d)
        .map(|a| {
            let mut kp = k.to_vec();
            let mut km = k.to_vec();
            kp[a] += GRAD_H;
            km[a] -= GRAD_H;
            let (wp, _) = band_value_at(coin, &kp, vref);
            let (wm, _) = band_value_at(coin, &km, vref);
            circ_signed(wp - wm) / (2.0 * GRAD_H)
        })
        .collect()
}

fn hessian(coin: &crate::coin::CoinOperator, k: &[f64], vref: &[Complex64]) -> DMatrix<f64> {
    let d = k.len();
    let h = HESS_H;
    let (w0, _) = band_value_at(coin, k, vref);
    let mut m = DMatrix::zeros(d, d);
    for a in 0..d {
        let mut kp = k.to_vec();
        let mut km = k.to_vec();
        kp[a] += h;
        km[a] -= h;
        let (wp, _) = band_value_at(coin, &kp, vref);
        let (wm, _) = band_value_at(coin, &km, vref);
        m[(a, a)] = (circ_signed(wp - w0) + circ_signed(wm - w0)) / (h * h);
    }
    for a in 0..d {
        for b in a + 1..d {
            let eval = |sa: f64, sb: f64| {
                let mut kk = k.to_vec();
                kk[a] += sa * h;
                kk[b] += sb * h;
                band_value_at(coin, &kk, vref).0
            };
            let (wpp, wpm, wmp, wmm) = (eval(1.0, 1.0), eval(1.0, -1.0), eval(-1.0, 1.0), eval(-1.0, -1.0));
            let v = circ_signed(wpp - wpm - wmp + wmm) / (4.0 * h * h);
            m[(a, b)] = v;
            m[(b, a)] = v;
        }
    }
    m
}

fn grad_norm(g: &[f64]) -> f64 {
    g.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Damped Newton descent on |grad omega| with pseudo-inverse steps, so flat
/// (continuum) directions are left untouched rather than chased to infinity.
fn newton_refine(
    coin: &crate::coin::CoinOperator,
    k0: &[f64],
    v0: &[Complex64],
) -> (Vec<f64>, Vec<Complex64>, bool) {
    let d = k0.len();
    let mut k = k0.to_vec();
    let mut v = v0.to_vec();
    let mut g = grad(coin, &k, &v);
    for _ in 0..MAX_NEWTON_ITERS {
        if grad_norm(&g) <= GRAD_TOL {
            return (k, v, true);
        }
        let h = hessian(coin, &k, &v);
        let hinv = h
            .clone()
            .pseudo_inverse(KERNEL_TOL)
            .unwrap_or_else(|_| DMatrix::zeros(d, d));
        let mut step: Vec<f64> = (0..d).map(|a| -(0..d).map(|b| hinv[(a, b)] * g[b]).sum::<f64>()).collect();
        let sn = grad_norm(&step);
        if sn > 0.5 {
            for s in &mut step {
                *s *= 0.5 / sn;
            }
        }
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..7 {
            let kn: Vec<f64> = (0..d).map(|a| k[a] + lambda * step[a]).collect();
            let (_, vn) = band_value_at(coin, &kn, &v);
            let gn = grad(coin, &kn, &vn);
            if grad_norm(&gn) < grad_norm(&g) {
                k = kn;
                v = vn;
                g = gn;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    let converged = grad_norm(&g) <= GRAD_TOL;
    (k, v, converged)
}

struct Refined {
    band: usize,
    k: Vec<f64>,
    omega: f64,
    vector: Vec<Complex64>,
}

/// Locate and classify every stationary structure of the non-flat bands.
///
/// Grid nodes are kept as candidates when the central-difference gradient is
/// a (non-strict) local minimum below max(1e-3, 2h), or simply below 1e-6:
/// the second clause keeps dense coverage along stationary continua, where
/// the local-minimum test thins nodes out and chains would otherwise break.
/// Exactly degenerate nodes are skipped; band identity is meaningless there.
/// Refined points closer than 1e-5 in (k, omega) are merged; survivors are
/// chained into connected components, and components that are long (span at
/// least pi/2 along some axis) and populous (at least max(4, N/8) members)
/// become continua. Everything else is an isolated saddle point.
pub fn find_saddles(grid: &SpectralGrid) -> Result<SaddleReport> {
    if grid.d <= 2 && grid.n < 64 {
        return Err(Error::SaddleResolution(grid.n));
    }
    let (n, d, c) = (grid.n, grid.d, grid.c);
    let nodes = grid.nodes();
    let h = std::f64::consts::TAU / n as f64;
    let tau = (2.0 * h).max(1e-3);

    let mut report = SaddleReport::default();
    let flats = grid.flat_bands();
    for &(band, phase, spread) in &flats {
        report.flat_bands.push(FlatBand { band, phase, spread });
    }
    let flat_set: Vec<usize> = flats.iter().map(|f| f.0).collect();

    let mut refined: Vec<Refined> = Vec::new();
    for band in 0..c {
        if flat_set.contains(&band) {
            continue;
        }
        // gradient magnitude of this band over the periodic grid
        let mut gm = vec![0.0f64; nodes];
        for node in 0..nodes {
            let multi = grid.multi_index(node);
            let mut sq = 0.0;
            for a in 0..d {
                let mut mp = multi.clone();
                let mut mm = multi.clone();
                mp[a] = (multi[a] + 1) % n;
                mm[a] = (multi[a] + n - 1) % n;
                let wp = grid.omega(grid.node_index(&mp), band);
                let wm = grid.omega(grid.node_index(&mm), band);
                let ga = circ_signed(wp - wm) / (2.0 * h);
                sq += ga * ga;
            }
            gm[node] = sq.sqrt();
        }
        for node in 0..nodes {
            if grid.mingap[node] <= DEGENERATE_GAP {
                continue;
            }
            let multi = grid.multi_index(node);
            let mut is_candidate = gm[node] <= 1e-6;
            if !is_candidate && gm[node] <= tau {
                let mut local_min = true;
                'axes: for a in 0..d {
                    for step in [1usize, n - 1] {
                        let mut nb = multi.clone();
                        nb[a] = (multi[a] + step) % n;
                        if gm[grid.node_index(&nb)] < gm[node] {
                            local_min = false;
                            break 'axes;
                        }
                    }
                }
                is_candidate = local_min;
            }
            if !is_candidate {
                continue;
            }
            let k0 = grid.k_of(&multi);
            let v0 = grid.vector(node, band).to_vec();
            let (k, v, ok) = newton_refine(&grid.coin, &k0, &v0);
            if !ok {
                report.dropped += 1;
                continue;
            }
            let k: Vec<f64> = k.iter().map(|&x| pin_pi(wrap_angle(x))).collect();
            let (omega, vector) = band_value_at(&grid.coin, &k, &v);
            let omega = pin_pi(wrap_angle(omega));
            // the same physical saddle is reachable from several tracked
            // bands; merge across bands so continua chain up correctly
            let dup = refined.iter().any(|r| {
                circ_dist(r.omega, omega) < 1e-5
                    && r.k.iter().zip(&k).all(|(&a, &b)| circ_dist(a, b) < 1e-5)
            });
            if !dup {
                refined.push(Refined { band, k, omega, vector });
            }
        }
    }

    // chain refined points into connected components
    let link = (5.0 * h).min(std::f64::consts::FRAC_PI_4);
    let m = refined.len();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for i in 0..m {
        for j in i + 1..m {
            if circ_dist(refined[i].omega, refined[j].omega) > 1e-4 {
                continue;
            }
            let dk: f64 = refined[i]
                .k
                .iter()
                .zip(&refined[j].k)
                .map(|(&a, &b)| circ_dist(a, b).powi(2))
                .sum::<f64>()
                .sqrt();
            if dk <= link {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut components: Vec<Vec<usize>> = Vec::new();
    {
        let mut comp_of: Vec<Option<usize>> = vec![None; m];
        for i in 0..m {
            let root = find(&mut parent, i);
            match comp_of[root] {
                Some(ci) => components[ci].push(i),
                None => {
                    comp_of[root] = Some(components.len());
                    components.push(vec![i]);
                }
            }
        }
    }

    let min_members = 4.max(n / 8);
    for comp in components {
        let spans: Vec<f64> = (0..d)
            .map(|a| {
                let lo = comp.iter().map(|&i| refined[i].k[a]).fold(f64::INFINITY, f64::min);
                let hi = comp.iter().map(|&i| refined[i].k[a]).fold(f64::NEG_INFINITY, f64::max);
                hi - lo
            })
            .collect();
        let max_span = spans.iter().cloned().fold(0.0f64, f64::max);
        let is_continuum =
            d > 1 && comp.len() >= min_members && max_span >= std::f64::consts::FRAC_PI_2;
        if is_continuum {
            let varying = (0..d).max_by(|&a, &b| spans[a].total_cmp(&spans[b])).unwrap();
            let fixed_axis = (0..d).min_by(|&a, &b| spans[a].total_cmp(&spans[b])).unwrap();
            let mut order: Vec<usize> = comp.clone();
            order.sort_by(|&i, &j| refined[i].k[varying].total_cmp(&refined[j].k[varying]));
            // classify the continuum at its best-conditioned member: FD
            // Hessians go bad where other bands come close
            let mid = *order
                .iter()
                .max_by(|&&i, &&j| {
                    grid.nearest_node_mingap(&refined[i].k)
                        .total_cmp(&grid.nearest_node_mingap(&refined[j].k))
                })
                .unwrap();
            let mean: Complex64 = order
                .iter()
                .map(|&i| Complex64::from_polar(1.0, refined[i].k[fixed_axis]))
                .sum();
            let hess = hessian(&grid.coin, &refined[mid].k, &refined[mid].vector);
            let eigs = symmetric_eigenvalues(&hess);
            let kernel_dim = eigs.iter().filter(|e| e.abs() < KERNEL_TOL).count();
            report.continua.push(SaddleContinuum {
                band: refined[mid].band,
                fixed_axis,
                fixed_value: wrap_angle(mean.arg()),
                phase: refined[mid].omega,
                hessian_eigenvalues: eigs,
                kernel_dim,
                n_members: order.len(),
                span: max_span,
                amplitude_order: (d - kernel_dim) as f64 / 2.0,
                members: order.iter().map(|&i| refined[i].k.clone()).collect(),
                member_vectors: order.iter().map(|&i| refined[i].vector.clone()).collect(),
            });
        } else {
            for &i in &comp {
                let hess = hessian(&grid.coin, &refined[i].k, &refined[i].vector);
                let eigs = symmetric_eigenvalues(&hess);
                let kernel_dim = eigs.iter().filter(|e| e.abs() < KERNEL_TOL).count();
                report.points.push(SaddlePoint {
                    band: refined[i].band,
                    k: refined[i].k.clone(),
                    omega: refined[i].omega,
                    hessian_eigenvalues: eigs,
                    kernel_dim,
                    amplitude_order: (d - kernel_dim) as f64 / 2.0,
                    vector: refined[i].vector.clone(),
                });
            }
        }
    }

    report.points.sort_by(|a, b| {
        a.band
            .cmp(&b.band)
            .then_with(|| {
                a.k.iter()
                    .zip(&b.k)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .then_with(|| a.omega.total_cmp(&b.omega))
    });
    report.continua.sort_by(|a, b| {
        a.band
            .cmp(&b.band)
            .then_with(|| a.fixed_axis.cmp(&b.fixed_axis))
            .then_with(|| a.fixed_value.total_cmp(&b.fixed_value))
            .then_with(|| a.phase.total_cmp(&b.phase))
    });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{band_structure, grover_coin, unbiased_coin_1d};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn requires_resolution_for_low_dimension() {
        let grid = band_structure(&unbiased_coin_1d(0.0, 0.0), 32).unwrap();
        assert!(matches!(find_saddles(&grid), Err(Error::SaddleResolution(32))));
    }

    #[test]
    fn one_dimensional_unbiased_coin_saddles() {
        // group velocity vanishes at k = alpha -+ pi/2, omega = -+pi/4 -+ pi/2
        let grid = band_structure(&unbiased_coin_1d(0.7, 0.3), 256).unwrap();
        let rep = find_saddles(&grid).unwrap();
        assert!(rep.flat_bands.is_empty());
        assert!(rep.continua.is_empty());
        assert_eq!(rep.dropped, 0);
        assert_eq!(rep.points.len(), 4);
        let expected = [
            (0.7 - FRAC_PI_2, FRAC_PI_4),
            (0.7 - FRAC_PI_2, 3.0 * FRAC_PI_4),
            (0.7 + FRAC_PI_2, -3.0 * FRAC_PI_4),
            (0.7 + FRAC_PI_2, -FRAC_PI_4),
        ];
        for (k, w) in expected {
            let hit = rep.points.iter().any(|p| {
                circ_dist(p.k[0], k) < 1e-8 && circ_dist(p.omega, w) < 1e-8
            });
            assert!(hit, "missing saddle at k = {k:.9}, omega = {w:.9}");
        }
        for p in &rep.points {
            assert_eq!(p.kernel_dim, 0);
            assert_eq!(p.hessian_eigenvalues.len(), 1);
            assert!((p.amplitude_order - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn grover_saddle_points() {
        let grid = band_structure(&grover_coin(), 64).unwrap();
        let rep = find_saddles(&grid).unwrap();
        assert_eq!(rep.flat_bands.len(), 2);
        assert!(rep.continua.is_empty());
        assert_eq!(rep.dropped, 0);
        assert_eq!(rep.points.len(), 8);
        for p in &rep.points {
            assert!(circ_dist(p.k[0].abs(), FRAC_PI_2) < 1e-8);
            assert!(circ_dist(p.k[1].abs(), FRAC_PI_2) < 1e-8);
            let w = if p.band == 1 { -FRAC_PI_2 } else { FRAC_PI_2 };
            assert!(circ_dist(p.omega, w) < 1e-8);
            assert_eq!(p.kernel_dim, 0);
            assert!((p.amplitude_order - 1.0).abs() < 1e-15);
        }
        let corners: std::collections::BTreeSet<(i8, i8, usize)> = rep
            .points
            .iter()
            .map(|p| (p.k[0].signum() as i8, p.k[1].signum() as i8, p.band))
            .collect();
        assert_eq!(corners.len(), 8, "all four corners on both dispersive bands");
        assert!((rep.flat_bands[0].phase - PI).abs() < 1e-12);
        assert!(rep.flat_bands[1].phase.abs() < 1e-12);
    }
}
