//! Fourier-picture analysis: U~(k) = D(k) C, eigenphase band structure with
//! consistent labels, stationary-point taxonomy, flat-band overlap
//! predictions, and the k-space quadrature oracle for p0(t).

mod eig;
mod saddle;

pub use eig::{circ_dist, eig_unitary, hermitian_eigen, min_eigenvalue_gap, wrap_angle};
pub use saddle::{find_saddles, FlatBand, SaddleContinuum, SaddlePoint, SaddleReport};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::coin::{CoinOperator, CoinState};
use crate::error::{Error, Result};
use crate::series::{ReturnSeries, SeriesMeta};

/// Node at which two eigenvalues coincide to working precision; such nodes
/// carry an arbitrary basis inside the degenerate subspace and are excluded
/// from overlap maxima and saddle candidacy.
pub const DEGENERATE_GAP: f64 = 1e-9;

/// Flat-band criterion: max spread of e^{i omega} across the grid.
pub const FLAT_SPREAD: f64 = 1e-10;

/// Overlap below which a state counts as orthogonal to a band or structure.
pub const OVERLAP_TOL: f64 = 1e-8;

/// U~(k) = D(k) C with D(k) = diag(e^{-i e_i . k}).
pub fn evolution_operator_k(coin: &CoinOperator, k: &[f64]) -> DMatrix<Complex64> {
    let c = coin.c();
    let dots = coin.displacements.dots(k);
    DMatrix::from_fn(c, c, |i, j| Complex64::from_polar(1.0, -dots[i]) * coin.matrix[(i, j)])
}

/// Tracked eigenphase bands omega_j(k) and eigenvectors on the N^d grid
/// k_i = -pi + 2 pi i / N, i = 1..N.
pub struct SpectralGrid {
    pub coin: CoinOperator,
    pub n: usize,
    pub d: usize,
    pub c: usize,
    pub ks: Vec<f64>,
    /// Band phases, node-major: omegas[node * c + band].
    omegas: Vec<f64>,
    /// Unit eigenvectors, node-major: vectors[node*c*c + band*c + component].
    vectors: Vec<Complex64>,
    /// Minimum eigenvalue gap per node.
    pub mingap: Vec<f64>,
    /// Band assignments whose best eigenvector overlap fell below 0.6.
    pub ambiguous_assignments: usize,
}

impl SpectralGrid {
    pub fn nodes(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn omega(&self, node: usize, band: usize) -> f64 {
        self.omegas[node * self.c + band]
    }

    pub fn vector(&self, node: usize, band: usize) -> &[Complex64] {
        let base = node * self.c * self.c + band * self.c;
        &self.vectors[base..base + self.c]
    }

    pub fn node_index(&self, multi: &[usize]) -> usize {
        multi.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn multi_index(&self, node: usize) -> Vec<usize> {
        let mut m = vec![0usize; self.d];
        let mut rest = node;
        for a in (0..self.d).rev() {
            m[a] = rest % self.n;
            rest /= self.n;
        }
        m
    }

    pub fn k_of(&self, multi: &[usize]) -> Vec<f64> {
        multi.iter().map(|&i| self.ks[i]).collect()
    }

    /// Eigenvalue mingap at the grid node circularly nearest to k. Used to
    /// judge how well-conditioned the eigenvectors around k are.
    pub fn nearest_node_mingap(&self, k: &[f64]) -> f64 {
        let multi: Vec<usize> = k
            .iter()
            .map(|&x| {
                let i = ((x + std::f64::consts::PI) * self.n as f64 / std::f64::consts::TAU)
                    .round() as i64
                    - 1;
                i.rem_euclid(self.n as i64) as usize
            })
            .collect();
        self.mingap[self.node_index(&multi)]
    }

    /// Bands with grid-wide phase spread at most FLAT_SPREAD, with their
    /// constant phase and the measured spread.
    pub fn flat_bands(&self) -> Vec<(usize, f64, f64)> {
        let nodes = self.nodes();
        (0..self.c)
            .filter_map(|band| {
                let z0 = Complex64::from_polar(1.0, self.omega(0, band));
                let mut spread = 0.0f64;
                let mut mean = Complex64::ZERO;
                for node in 0..nodes {
                    let z = Complex64::from_polar(1.0, self.omega(node, band));
                    spread = spread.max((z - z0).norm());
                    if spread > FLAT_SPREAD {
                        return None;
                    }
                    mean += z;
                }
                Some((band, wrap_angle(mean.arg()), spread))
            })
            .collect()
    }
}

/// Diagonalize U~(k) over the grid and assign consistent band labels along a
/// boustrophedon sweep. Each node is matched against its already-visited
/// lattice neighbor with the largest eigenvalue gap (matching across a
/// degeneracy would scramble labels); near-degenerate band pairs are aligned
/// with a Procrustes rotation so eigenvectors stay continuous.
pub fn band_structure(coin: &CoinOperator, resolution: usize) -> Result<SpectralGrid> {
    let n = resolution;
    if n < 16 || !n.is_multiple_of(2) {
        return Err(Error::BadResolution(n));
    }
    let d = coin.d();
    let c = coin.c();
    let nodes = n.pow(d as u32);
    let ks: Vec<f64> = (1..=n)
        .map(|i| -std::f64::consts::PI + 2.0 * std::f64::consts::PI * i as f64 / n as f64)
        .collect();
    let mut omegas = vec![0.0f64; nodes * c];
    let mut vectors = vec![Complex64::ZERO; nodes * c * c];
    let mut mingap = vec![0.0f64; nodes];

    let mut multi = vec![0usize; d];
    for node in 0..nodes {
        let k: Vec<f64> = multi.iter().map(|&i| ks[i]).collect();
        let u = evolution_operator_k(coin, &k);
        let (om, q) = eig_unitary(&u);
        mingap[node] = min_eigenvalue_gap(&om);
        for band in 0..c {
            omegas[node * c + band] = om[band];
            for comp in 0..c {
                vectors[node * c * c + band * c + comp] = q[(comp, band)];
            }
        }
        // advance row-major multi-index
        for a in (0..d).rev() {
            multi[a] += 1;
            if multi[a] < n {
                break;
            }
            multi[a] = 0;
        }
    }

    let mut grid = SpectralGrid {
        coin: coin.clone(),
        n,
        d,
        c,
        ks,
        omegas,
        vectors,
        mingap,
        ambiguous_assignments: 0,
    };
    track_bands(&mut grid);
    Ok(grid)
}

/// Eigenvalue distance below which two bands at one node count as a
/// degenerate pair for Procrustes alignment.
const PROCRUSTES_GAP: f64 = 1e-11;
/// Best-overlap threshold under which an assignment is recorded as ambiguous.
const AMBIGUITY: f64 = 0.6;

fn track_bands(grid: &mut SpectralGrid) {
    let (n, d) = (grid.n, grid.d);
    let mut visited = vec![false; grid.nodes()];
    let mut idx = vec![0usize; d];
    let mut dir = vec![1i64; d];
    visited[0] = true;
    loop {
        // boustrophedon advance: deepest axis that can move in its direction
        let mut moved = false;
        for a in (0..d).rev() {
            let next = idx[a] as i64 + dir[a];
            if next >= 0 && next < n as i64 {
                idx[a] = next as usize;
                moved = true;
                break;
            }
            dir[a] = -dir[a];
        }
        if !moved {
            break;
        }
        let node = grid.node_index(&idx);
        // anchor on the visited lattice neighbor farthest from degeneracy
        let mut anchor: Option<usize> = None;
        for a in 0..d {
            for step in [-1i64, 1] {
                let ni = idx[a] as i64 + step;
                if ni < 0 || ni >= n as i64 {
                    continue;
                }
                let mut nm = idx.clone();
                nm[a] = ni as usize;
                let nn = grid.node_index(&nm);
                if visited[nn] && anchor.is_none_or(|b| grid.mingap[nn] > grid.mingap[b]) {
                    anchor = Some(nn);
                }
            }
        }
        let anchor = anchor.expect("snake traversal always has a visited neighbor");
        assign_bands(grid, node, anchor);
        visited[node] = true;
    }
}

/// Permute the bands of `node` to maximize eigenvector overlap with `anchor`,
/// then rotate degenerate pairs onto the anchor's basis.
fn assign_bands(grid: &mut SpectralGrid, node: usize, anchor: usize) {
    let c = grid.c;
    let mut overlap = vec![0.0f64; c * c]; // [slot * c + new]
    for slot in 0..c {
        let va = grid.vector(anchor, slot).to_vec();
        for new in 0..c {
            let vn = grid.vector(node, new);
            let dot: Complex64 = va.iter().zip(vn).map(|(a, b)| a.conj() * b).sum();
            overlap[slot * c + new] = dot.norm();
        }
    }
    let mut perm = vec![usize::MAX; c]; // slot -> new index
    let mut used_slot = vec![false; c];
    let mut used_new = vec![false; c];
    for _ in 0..c {
        let mut best = (0usize, 0usize, -1.0f64);
        for slot in 0..c {
            if used_slot[slot] {
                continue;
            }
            for new in 0..c {
                if used_new[new] {
                    continue;
                }
                if overlap[slot * c + new] > best.2 {
                    best = (slot, new, overlap[slot * c + new]);
                }
            }
        }
        perm[best.0] = best.1;
        used_slot[best.0] = true;
        used_new[best.1] = true;
        if best.2 < AMBIGUITY {
            grid.ambiguous_assignments += 1;
        }
    }
    // apply permutation to this node's omegas and vectors
    let ob = node * c;
    let vb = node * c * c;
    let old_om: Vec<f64> = grid.omegas[ob..ob + c].to_vec();
    let old_vecs: Vec<Complex64> = grid.vectors[vb..vb + c * c].to_vec();
    for slot in 0..c {
        grid.omegas[ob + slot] = old_om[perm[slot]];
        grid.vectors[vb + slot * c..vb + slot * c + c]
            .copy_from_slice(&old_vecs[perm[slot] * c..perm[slot] * c + c]);
    }
    // Procrustes-align near-degenerate groups with the anchor basis
    let lam: Vec<Complex64> = (0..c)
        .map(|b| Complex64::from_polar(1.0, grid.omega(node, b)))
        .collect();
    let mut group_of = vec![usize::MAX; c];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..c {
        if group_of[i] != usize::MAX {
            continue;
        }
        let gi = groups.len();
        let mut members = vec![i];
        group_of[i] = gi;
        for j in i + 1..c {
            if group_of[j] == usize::MAX && members.iter().any(|&m| (lam[m] - lam[j]).norm() < PROCRUSTES_GAP) {
                group_of[j] = gi;
                members.push(j);
            }
        }
        groups.push(members);
    }
    for members in groups.iter().filter(|g| g.len() > 1) {
        let g = members.len();
        let vn = DMatrix::from_fn(c, g, |comp, j| grid.vectors[vb + members[j] * c + comp]);
        let va = DMatrix::from_fn(c, g, |comp, j| {
            grid.vector(anchor, members[j])[comp]
        });
        let w = eig::polar_unitary(&(vn.adjoint() * va));
        let rotated = vn * w;
        for (j, &b) in members.iter().enumerate() {
            for comp in 0..c {
                grid.vectors[vb + b * c + comp] = rotated[(comp, j)];
            }
        }
    }
}

/// (omega, eigenvector) of the band at arbitrary k that best continues vref.
pub fn band_value_at(coin: &CoinOperator, k: &[f64], vref: &[Complex64]) -> (f64, Vec<Complex64>) {
    let u = evolution_operator_k(coin, k);
    let (om, q) = eig_unitary(&u);
    let c = coin.c();
    let mut best = (0usize, -1.0f64);
    for band in 0..c {
        let dot: Complex64 = (0..c).map(|i| q[(i, band)].conj() * vref[i]).sum();
        if dot.norm() > best.1 {
            best = (band, dot.norm());
        }
    }
    (om[best.0], (0..c).map(|i| q[(i, best.0)]).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapVerdict {
    NoFlatBands,
    Localized,
    NotLocalized,
}

impl std::fmt::Display for OverlapVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OverlapVerdict::NoFlatBands => "no flat bands",
            OverlapVerdict::Localized => "localized",
            OverlapVerdict::NotLocalized => "not localized by flat bands",
        })
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct OverlapReport {
    /// (band, max |<psi0, v_j(k)>| over non-degenerate nodes).
    pub per_band: Vec<(usize, f64)>,
    pub verdict: OverlapVerdict,
}

/// Max overlap of psi0 with each flat band; a localized walk needs a nonzero
/// projection somewhere. Exactly degenerate nodes are skipped: their basis
/// inside the flat+crossing subspace is arbitrary, so the overlap there is
/// not attributable to the flat band.
pub fn flat_band_overlap(psi0: &CoinState, grid: &SpectralGrid) -> OverlapReport {
    let flats = grid.flat_bands();
    if flats.is_empty() {
        return OverlapReport { per_band: vec![], verdict: OverlapVerdict::NoFlatBands };
    }
    let nodes = grid.nodes();
    let per_band: Vec<(usize, f64)> = flats
        .iter()
        .map(|&(band, _, _)| {
            let mut best = 0.0f64;
            for node in 0..nodes {
                if grid.mingap[node] <= DEGENERATE_GAP {
                    continue;
                }
                let v = grid.vector(node, band);
                let dot: Complex64 = psi0
                    .amplitudes
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                best = best.max(dot.norm());
            }
            (band, best)
        })
        .collect();
    let verdict = if per_band.iter().any(|&(_, o)| o > OVERLAP_TOL) {
        OverlapVerdict::Localized
    } else {
        OverlapVerdict::NotLocalized
    };
    OverlapReport { per_band, verdict }
}

/// Orthonormal basis of the coin states orthogonal to every sampled
/// slow-band eigenvector along the report's continua. Dimension 0 (empty
/// basis) is a valid outcome.
pub fn stationary_state_subspace(grid: &SpectralGrid, report: &SaddleReport) -> Vec<Vec<Complex64>> {
    let c = grid.c;
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for cont in &report.continua {
        // sample only the better-conditioned half of the members; vectors
        // picked up near band crossings leak other-band components
        let gaps: Vec<f64> =
            cont.members.iter().map(|k| grid.nearest_node_mingap(k)).collect();
        let mut sorted = gaps.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        for v in cont
            .member_vectors
            .iter()
            .zip(&gaps)
            .filter(|(_, &g)| g >= median)
            .map(|(v, _)| v)
            .step_by(4)
        {
            rows.push(v.iter().map(|z| z.conj()).collect());
        }
    }
    if rows.is_empty() {
        return vec![];
    }
    // pad to at least c rows so the thin SVD spans the full right side
    while rows.len() < c {
        rows.push(vec![Complex64::ZERO; c]);
    }
    let m = rows.len();
    let a = DMatrix::from_fn(m, c, |i, j| rows[i][j]);
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("svd with v_t");
    let sv = &svd.singular_values;
    let smax = sv.iter().fold(0.0f64, |acc, &s| acc.max(s));
    (0..sv.len())
        .filter(|&i| sv[i] <= 1e-8 * smax)
        .map(|i| (0..c).map(|j| vt[(i, j)].conj()).collect())
        .collect()
}

/// p0(t) by exact periodic quadrature of the inverse Fourier integral:
/// psi(0, t) = N^-d sum_k U~(k)^t psi0, evaluated through per-node
/// eigendecomposition. Exact (no aliasing) while N > 2t.
pub fn kspace_return_series(
    coin: &CoinOperator,
    psi0: &CoinState,
    t_max: u64,
    n: usize,
) -> Result<ReturnSeries> {
    if (n as u64) <= 2 * t_max {
        return Err(Error::QuadratureAliasing { n, two_t: 2 * t_max });
    }
    let d = coin.d();
    let c = coin.c();
    let ks: Vec<f64> = (1..=n)
        .map(|i| -std::f64::consts::PI + 2.0 * std::f64::consts::PI * i as f64 / n as f64)
        .collect();
    let times: Vec<u64> = (1..=t_max / 2).map(|i| 2 * i).collect();
    let mut acc = vec![Complex64::ZERO; times.len() * c];
    let nodes = n.pow(d as u32);
    let mut multi = vec![0usize; d];
    for _ in 0..nodes {
        let k: Vec<f64> = multi.iter().map(|&i| ks[i]).collect();
        let u = evolution_operator_k(coin, &k);
        let (om, q) = eig_unitary(&u);
        for band in 0..c {
            let cj: Complex64 = (0..c)
                .map(|i| q[(i, band)].conj() * psi0.amplitudes[i])
                .sum();
            if cj.norm() < 1e-300 {
                continue;
            }
            for (ti, &t) in times.iter().enumerate() {
                let w = Complex64::from_polar(1.0, om[band] * t as f64) * cj;
                for i in 0..c {
                    acc[ti * c + i] += w * q[(i, band)];
                }
            }
        }
        for a in (0..d).rev() {
            multi[a] += 1;
            if multi[a] < n {
                break;
            }
            multi[a] = 0;
        }
    }
    let scale = 1.0 / nodes as f64;
    let mut series = ReturnSeries::new(SeriesMeta {
        coin: coin.label.clone(),
        state: psi0.label.clone(),
        engine: format!("kspace-N{n}"),
        final_norm: None,
    });
    for (ti, &t) in times.iter().enumerate() {
        let p: f64 = (0..c).map(|i| (acc[ti * c + i] * scale).norm_sqr()).sum();
        series.push(t, p)?;
    }
    Ok(series)
}

/// Single-time k-space return probability.
pub fn kspace_return_amplitude(coin: &CoinOperator, psi0: &CoinState, t: u64, n: usize) -> Result<f64> {
    if t == 0 {
        return Ok(1.0);
    }
    let series = kspace_return_series(coin, psi0, t, n)?;
    series
        .get(t)
        .ok_or_else(|| Error::BadSeries(format!("time {t} is odd; p0 vanishes identically")))
}

/// Leading p0 decay exponent predicted by the stationary structures a state
/// actually overlaps: flat bands give order 0 (localization), a point gives
/// amplitude order (d - kernel)/2, a continuum (d - n)/2; p0 doubles the
/// amplitude order. None means no overlapped structure (super-polynomial
/// decay, not realized by any coin in this artifact's scope).
pub fn predicted_p0_exponent(
    grid: &SpectralGrid,
    report: &SaddleReport,
    psi0: Option<&CoinState>,
) -> Option<f64> {
    let overlaps_flat: Box<dyn Fn(usize) -> bool> = match psi0 {
        None => Box::new(|_| true),
        Some(state) => {
            let rep = flat_band_overlap(state, grid);
            let bands: Vec<usize> = rep
                .per_band
                .iter()
                .filter(|&&(_, o)| o > OVERLAP_TOL)
                .map(|&(b, _)| b)
                .collect();
            Box::new(move |band| bands.contains(&band))
        }
    };
    let dot = |v: &[Complex64], state: &CoinState| -> f64 {
        state
            .amplitudes
            .iter()
            .zip(v)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm()
    };
    let mut best: Option<f64> = None;
    let mut consider = |order: f64| {
        best = Some(best.map_or(order, |b: f64| b.min(order)));
    };
    for fb in &report.flat_bands {
        if overlaps_flat(fb.band) {
            consider(0.0);
        }
    }
    for cont in &report.continua {
        let included = match psi0 {
            None => true,
            Some(state) => cont.member_vectors.iter().any(|v| dot(v, state) > OVERLAP_TOL),
        };
        if included {
            consider(cont.amplitude_order);
        }
    }
    for pt in &report.points {
        let included = match psi0 {
            None => true,
            Some(state) => dot(&pt.vector, state) > OVERLAP_TOL,
        };
        if included {
            consider(pt.amplitude_order);
        }
    }
    best.map(|b| 2.0 * b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{evolve_collect, grover_coin, hadamard_coin, psi_g, psi_s, unbiased_coin_1d, CoinState};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn evolution_operator_is_phase_scaled_coin() {
        let coin = unbiased_coin_1d(0.7, 0.3);
        let k = [0.37];
        let u = evolution_operator_k(&coin, &k);
        for i in 0..2 {
            let phase = Complex64::from_polar(1.0, -(coin.displacements.vectors[i][0] as f64) * k[0]);
            for j in 0..2 {
                assert!((u[(i, j)] - phase * coin.matrix[(i, j)]).norm() < 1e-15);
            }
        }
        let g = grover_coin();
        let u = evolution_operator_k(&g, &[0.8, -1.9]);
        let defect = (u.adjoint() * &u - DMatrix::identity(4, 4)).norm();
        assert!(defect < 1e-14);
    }

    #[test]
    fn band_structure_rejects_bad_resolutions() {
        let coin = hadamard_coin();
        assert!(matches!(band_structure(&coin, 8), Err(Error::BadResolution(8))));
        assert!(matches!(band_structure(&coin, 15), Err(Error::BadResolution(15))));
    }

    #[test]
    fn grid_covers_the_zone() {
        let grid = band_structure(&hadamard_coin(), 64).unwrap();
        assert_eq!(grid.nodes(), 64);
        assert!((grid.ks[0] + PI - PI / 32.0).abs() < 1e-15);
        assert!((grid.ks[63] - PI).abs() < 1e-15);
        for node in 0..grid.nodes() {
            for band in 0..2 {
                let w = grid.omega(node, band);
                assert!(w > -PI && w <= PI);
            }
        }
        let worst = grid.mingap.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(worst > 0.5, "1-d Hadamard bands never touch");
    }

    #[test]
    fn hadamard_dispersion_law() {
        // |sin(omega)| = |sin(k)| / sqrt(2) on both bands
        let grid = band_structure(&hadamard_coin(), 64).unwrap();
        for node in 0..grid.nodes() {
            let k = grid.ks[node];
            for band in 0..2 {
                let w = grid.omega(node, band);
                assert!((w.sin().abs() - k.sin().abs() * FRAC_1_SQRT_2).abs() < 1e-12);
            }
        }
        assert!(grid.flat_bands().is_empty());
    }

    #[test]
    fn grover_flat_and_dispersive_bands() {
        let grid = band_structure(&grover_coin(), 32).unwrap();
        let flats = grid.flat_bands();
        assert_eq!(flats.len(), 2);
        assert_eq!((flats[0].0, flats[1].0), (0, 3));
        assert!(circ_dist(flats[0].1, PI) < 1e-12);
        assert!(circ_dist(flats[1].1, 0.0) < 1e-12);
        assert!(flats[0].2 < 1e-12 && flats[1].2 < 1e-12);
        let mut degenerate = 0usize;
        for node in 0..grid.nodes() {
            let multi = grid.multi_index(node);
            let k = grid.k_of(&multi);
            if grid.nearest_node_mingap(&k) <= DEGENERATE_GAP {
                degenerate += 1;
                continue;
            }
            for band in [1, 2] {
                let w = grid.omega(node, band);
                assert!((w.cos() + k[0].cos() * k[1].cos()).abs() < 1e-10);
            }
        }
        assert_eq!(degenerate, 4, "band crossings at (0,0), (0,pi), (pi,0), (pi,pi)");
    }

    #[test]
    fn flat_band_overlap_verdicts() {
        let grid = band_structure(&grover_coin(), 32).unwrap();
        let rep = flat_band_overlap(&psi_s(), &grid);
        assert!(matches!(rep.verdict, OverlapVerdict::Localized));
        let best = rep.per_band.iter().map(|&(_, o)| o).fold(0.0f64, f64::max);
        assert!((best - 0.866).abs() < 1e-2, "overlap {best}");
        assert_eq!(format!("{}", rep.verdict), "localized");

        let rep = flat_band_overlap(&psi_g(), &grid);
        assert!(matches!(rep.verdict, OverlapVerdict::NotLocalized));
        assert!(rep.per_band.iter().all(|&(_, o)| o < 1e-10));
        assert_eq!(format!("{}", rep.verdict), "not localized by flat bands");

        let grid = band_structure(&hadamard_coin(), 64).unwrap();
        let rep = flat_band_overlap(&CoinState::basis(2, 1), &grid);
        assert!(matches!(rep.verdict, OverlapVerdict::NoFlatBands));
        assert_eq!(format!("{}", rep.verdict), "no flat bands");
    }

    #[test]
    fn kspace_series_matches_direct_evolution() {
        let coin = hadamard_coin();
        let psi0 = CoinState::new(
            vec![
                Complex64::new(FRAC_1_SQRT_2, 0.0),
                Complex64::new(0.0, FRAC_1_SQRT_2),
            ],
            "sym",
        )
        .unwrap();
        let (direct, _) = evolve_collect(&coin, &psi0, 64, &[], None).unwrap();
        let kspace = kspace_return_series(&coin, &psi0, 64, 256).unwrap();
        for (a, b) in direct.positive_entries().iter().zip(kspace.positive_entries()) {
            assert_eq!(a.0, b.0);
            assert!((a.1 - b.1).abs() < 1e-12, "t = {}", a.0);
        }
        assert_eq!(kspace_return_amplitude(&coin, &psi0, 0, 256).unwrap(), 1.0);
    }

    #[test]
    fn kspace_requires_fine_quadrature() {
        let coin = hadamard_coin();
        let psi0 = CoinState::basis(2, 1);
        let got = kspace_return_series(&coin, &psi0, 64, 128);
        assert!(matches!(got, Err(Error::QuadratureAliasing { n: 128, two_t: 128 })));
    }

    #[test]
    fn band_value_tracks_grid_vectors() {
        let grid = band_structure(&hadamard_coin(), 64).unwrap();
        let coin = hadamard_coin();
        for node in [3, 17, 40] {
            let k = grid.k_of(&grid.multi_index(node));
            for band in 0..2 {
                let (w, _) = band_value_at(&coin, &k, grid.vector(node, band));
                assert!((w - grid.omega(node, band)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn hadamard_predicted_exponent_and_empty_subspace() {
        let grid = band_structure(&hadamard_coin(), 256).unwrap();
        let report = saddle::find_saddles(&grid).unwrap();
        assert!(report.continua.is_empty());
        assert!(stationary_state_subspace(&grid, &report).is_empty());
        assert_eq!(predicted_p0_exponent(&grid, &report, None), Some(1.0));
        let e1 = CoinState::basis(2, 1);
        assert_eq!(predicted_p0_exponent(&grid, &report, Some(&e1)), Some(1.0));
    }
}
