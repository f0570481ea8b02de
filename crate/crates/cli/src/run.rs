//! Command bodies: orchestrate the core modules and write artifacts.

use anyhow::{bail, Result};
use serde::Serialize;

use qwrecur_core::io;
use qwrecur_core::polya::Evidence;
use qwrecur_core::spectral::OverlapReport;
use qwrecur_core::{
    band_structure, classical_polya, classify_recurrence, default_surface_grids, evolve_collect,
    evolve_product, find_saddles, fit_fourier_surface, flat_band_overlap, fourier_polya_surface,
    polya_partial, predicted_p0_exponent, psi_f, stationary_state_subspace, tensor_polya_estimate,
    unbiased_coin_1d, Classification, CoinOperator, PolyaEstimate, ReturnSeries, Snapshot,
};

use crate::resolve::{Engine, Settings};
use crate::Outputs;

struct Sim {
    series: ReturnSeries,
    snapshots: Vec<Snapshot>,
    coin: CoinOperator,
}

fn simulate(s: &Settings, snapshot_times: &[u64]) -> Result<Sim> {
    let (coin, embedded) = s.coin()?;
    match s.pick_engine(&coin)? {
        Engine::Direct | Engine::Auto => {
            let state = s.state(&coin, embedded)?;
            let (series, snapshots) =
                evolve_collect(&coin, &state, s.t_max, snapshot_times, s.mem_cap)?;
            Ok(Sim { series, snapshots, coin })
        }
        Engine::Product => {
            if !snapshot_times.is_empty() {
                bail!("position snapshots need the direct engine");
            }
            let walk = s.product_walk(&coin)?;
            let series = evolve_product(&walk, s.t_max, s.mem_cap)?;
            Ok(Sim { series, snapshots: Vec::new(), coin })
        }
    }
}

fn classification_line(series: &ReturnSeries) -> (Option<Classification>, Option<Evidence>, String) {
    match classify_recurrence(series) {
        Ok((class, ev)) => {
            let alpha = ev
                .alpha
                .map_or("n/a".into(), |a| format!("{a:.4} +/- {:.4}", ev.stderr.unwrap_or(f64::NAN)));
            let floor = ev.floor_ratio.map_or("n/a".into(), |r| format!("{r:.2}"));
            let line = format!("classification: {class} (alpha = {alpha}, floor ratio = {floor})");
            (Some(class), Some(ev), line)
        }
        Err(e) => (None, None, format!("classification: inconclusive ({e})")),
    }
}

#[derive(Serialize)]
struct WalkReport<'a> {
    coin: &'a str,
    state: &'a str,
    engine: &'a str,
    t_max: u64,
    final_norm: Option<f64>,
    classification: Option<Classification>,
    evidence: Option<Evidence>,
    polya: PolyaEstimate,
}

pub fn walk(s: &Settings, snapshot_times: &[u64], out: &mut Outputs) -> Result<()> {
    let sim = simulate(s, snapshot_times)?;
    io::write_series_csv(&out.path("series.csv"), &sim.series)?;
    for snap in &sim.snapshots {
        io::write_snapshot_csv(&out.path(&format!("snapshot_t{}.csv", snap.t)), snap, sim.coin.d())?;
    }
    let (classification, evidence, line) = classification_line(&sim.series);
    let polya = polya_partial(&sim.series, sim.series.positive_entries().len())?;
    let meta = &sim.series.meta;
    io::write_json(
        &out.path("walk.json"),
        &WalkReport {
            coin: &meta.coin,
            state: &meta.state,
            engine: &meta.engine,
            t_max: s.t_max,
            final_norm: meta.final_norm,
            classification,
            evidence,
            polya,
        },
    )?;
    println!("{} / {} ({}): {} even terms to t = {}", meta.coin, meta.state, meta.engine, sim.series.positive_entries().len(), sim.series.t_max());
    println!("{line}");
    Ok(())
}

#[derive(Serialize)]
struct PolyaReport<'a> {
    coin: &'a str,
    state: &'a str,
    engine: &'a str,
    t_max: u64,
    estimate: PolyaEstimate,
    evidence: Option<Evidence>,
}

pub fn polya_walk(s: &Settings, out: &mut Outputs) -> Result<()> {
    let sim = simulate(s, &[])?;
    let n = s.terms.unwrap_or_else(|| sim.series.positive_entries().len());
    let estimate = polya_partial(&sim.series, n)?;
    let (_, evidence, line) = classification_line(&sim.series);
    let meta = &sim.series.meta;
    println!("P_{n} = {:.6} ({} / {})", estimate.partial_product, meta.coin, meta.state);
    println!("{line}");
    io::write_json(
        &out.path("polya.json"),
        &PolyaReport {
            coin: &meta.coin,
            state: &meta.state,
            engine: &meta.engine,
            t_max: s.t_max,
            estimate,
            evidence,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct TensorReport {
    d: usize,
    t_max: u64,
    simulation: PolyaEstimate,
    estimation: f64,
}

pub fn polya_tensor(s: &Settings, out: &mut Outputs) -> Result<()> {
    let d = match s.dimension {
        Some(d) => d,
        None => bail!("--tensor-hadamard needs -d <dimension>"),
    };
    let coin = qwrecur_core::tensor_hadamard_coin(d);
    let walk = s.product_walk(&coin)?;
    let series = evolve_product(&walk, s.t_max, s.mem_cap)?;
    let n = s.terms.unwrap_or_else(|| series.positive_entries().len());
    let simulation = polya_partial(&series, n)?;
    let estimation = tensor_polya_estimate(d)?;
    println!(
        "tensor Hadamard d={d}: simulation P_{n} = {:.6}, estimation = {:.6}",
        simulation.partial_product, estimation
    );
    io::write_json(&out.path("polya.json"), &TensorReport { d, t_max: s.t_max, simulation, estimation })?;
    Ok(())
}

pub fn polya_classical(s: &Settings, out: &mut Outputs) -> Result<()> {
    let d = match s.dimension {
        Some(d) => d,
        None => bail!("--classical needs -d <dimension>"),
    };
    let report = classical_polya(d, s.t_max);
    if report.divergent {
        println!("classical d={d}: recurrent, P = 1 (divergent sum)");
    } else {
        println!(
            "classical d={d}: P = {:.6} in [{:.6}, {:.6}]",
            report.value, report.bound_lo, report.bound_hi
        );
    }
    io::write_json(&out.path("polya.json"), &report)?;
    Ok(())
}

pub fn polya_surface(s: &Settings, out: &mut Outputs) -> Result<()> {
    let terms = s.terms.unwrap_or(100);
    let model = fit_fourier_surface(2 * terms as u64, s.mem_cap)?;
    let (a_grid, phi_grid) = default_surface_grids();
    let surface = fourier_polya_surface(&model, &a_grid, &phi_grid, terms)?;
    println!(
        "Fourier Polya surface (n = {terms}): min {:.6} at (a = {:.4}, phi = {:.4}), max {:.6} at (a = {:.4}, phi = {:.4})",
        surface.min.value, surface.min.a, surface.min.phi,
        surface.max.value, surface.max.a, surface.max.phi,
    );
    io::write_surface_csv(&out.path("surface.csv"), &surface)?;
    io::write_json(&out.path("surface_extremes.json"), &surface)?;
    Ok(())
}

#[derive(Serialize)]
struct SpectralReport<'a> {
    coin: &'a str,
    resolution: usize,
    d: usize,
    ambiguous_assignments: usize,
    state: Option<&'a str>,
    overlap: Option<OverlapReport>,
    predicted_p0_exponent: Option<f64>,
    stationary_subspace_dimension: usize,
    /// Basis vectors as [re, im] component pairs.
    stationary_subspace: Vec<Vec<[f64; 2]>>,
}

pub fn spectral(s: &Settings, out: &mut Outputs) -> Result<()> {
    let (coin, embedded) = s.coin()?;
    let state = match (&s.state_name, embedded) {
        (None, None) => None,
        (_, embedded) => Some(s.state(&coin, embedded)?),
    };
    let grid = band_structure(&coin, s.resolution)?;
    io::write_bands_csv(&out.path("bands.csv"), &grid)?;
    let report = find_saddles(&grid)?;
    io::write_json(&out.path("saddles.json"), &report)?;
    let overlap = state.as_ref().map(|st| flat_band_overlap(st, &grid));
    let predicted = predicted_p0_exponent(&grid, &report, state.as_ref());
    let basis = stationary_state_subspace(&grid, &report);
    println!(
        "{}: {} flat band(s), {} saddle point(s), {} continuum(-a); stationary subspace dim {}",
        coin.label,
        report.flat_bands.len(),
        report.points.len(),
        report.continua.len(),
        basis.len(),
    );
    if let Some(rep) = &overlap {
        println!("flat-band verdict for {}: {}", state.as_ref().unwrap().label, rep.verdict);
    }
    match predicted {
        Some(p) => println!("predicted p0 decay: t^-{p}"),
        None => println!("predicted p0 decay: faster than any saddle-driven power law"),
    }
    io::write_json(
        &out.path("spectral.json"),
        &SpectralReport {
            coin: &coin.label,
            resolution: s.resolution,
            d: coin.d(),
            ambiguous_assignments: grid.ambiguous_assignments,
            state: state.as_ref().map(|st| st.label.as_str()),
            overlap,
            predicted_p0_exponent: predicted,
            stationary_subspace_dimension: basis.len(),
            stationary_subspace: basis
                .iter()
                .map(|v| v.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        },
    )?;
    Ok(())
}

pub struct SweepGrids {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub a: Vec<f64>,
    pub phi: Vec<f64>,
}

#[derive(Serialize)]
struct SweepPoint {
    file: String,
    params: Vec<(String, f64)>,
    alpha: Option<f64>,
    stderr: Option<f64>,
    classification: Option<Classification>,
}

pub fn sweep(s: &Settings, grids: &SweepGrids, out: &mut Outputs) -> Result<()> {
    let fourier_sweep = !grids.a.is_empty() || !grids.phi.is_empty();
    let mut points: Vec<SweepPoint> = Vec::new();
    if fourier_sweep {
        if !grids.alpha.is_empty() || !grids.beta.is_empty() {
            bail!("mixing --a-grid/--phi-grid with --alpha-grid/--beta-grid is ambiguous");
        }
        let coin = qwrecur_core::fourier_coin();
        let a_grid = if grids.a.is_empty() { vec![s.a] } else { grids.a.clone() };
        let phi_grid = if grids.phi.is_empty() { vec![s.phi] } else { grids.phi.clone() };
        for &a in &a_grid {
            for &phi in &phi_grid {
                let state = psi_f(a, phi)?;
                let (series, _) = evolve_collect(&coin, &state, s.t_max, &[], s.mem_cap)?;
                let file = format!("series_a{a:.6}_phi{phi:.6}.csv");
                io::write_series_csv(&out.path(&file), &series)?;
                points.push(sweep_point(file, vec![("a".into(), a), ("phi".into(), phi)], &series));
            }
        }
    } else {
        let alpha_grid = if grids.alpha.is_empty() { vec![s.alpha] } else { grids.alpha.clone() };
        let beta_grid = if grids.beta.is_empty() { vec![s.beta] } else { grids.beta.clone() };
        for &alpha in &alpha_grid {
            for &beta in &beta_grid {
                let coin = unbiased_coin_1d(alpha, beta);
                let state = s.state(&coin, None)?;
                let (series, _) = evolve_collect(&coin, &state, s.t_max, &[], s.mem_cap)?;
                let file = format!("series_alpha{alpha:.6}_beta{beta:.6}.csv");
                io::write_series_csv(&out.path(&file), &series)?;
                points.push(sweep_point(
                    file,
                    vec![("alpha".into(), alpha), ("beta".into(), beta)],
                    &series,
                ));
            }
        }
    }
    for p in &points {
        let alpha = p.alpha.map_or("n/a".into(), |a| format!("{a:.4}"));
        println!("{}: fitted alpha = {alpha}", p.file);
    }
    io::write_json(&out.path("index.json"), &points)?;
    Ok(())
}

fn sweep_point(file: String, params: Vec<(String, f64)>, series: &ReturnSeries) -> SweepPoint {
    match classify_recurrence(series) {
        Ok((class, ev)) => SweepPoint {
            file,
            params,
            alpha: ev.alpha,
            stderr: ev.stderr,
            classification: Some(class),
        },
        Err(_) => SweepPoint { file, params, alpha: None, stderr: None, classification: None },
    }
}
