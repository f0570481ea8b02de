//! Position-space evolution engines.
//!
//! The direct engine stores the amplitude field as c component planes over the
//! box [-t_max, t_max]^d (row-major, single buffer). A step applies the coin
//! in place site by site, then translates each plane by its displacement
//! vector with overlap-safe row moves, zeroing the d trailing faces that a
//! translation vacates. Support lives on the sublattice where every m_i + t
//! is even; the coin pass walks only those sites.
//!
//! The product engine evolves tensor-factor blocks independently and
//! multiplies their origin probabilities, which is exact for product coins
//! and product initial states.

use num_complex::Complex64;

use crate::coin::{CoinOperator, CoinState};
use crate::error::{Error, Result};
use crate::series::{ReturnSeries, SeriesMeta};

/// Default direct-engine memory cap: 8 GiB of amplitude data.
pub const DEFAULT_MEM_CAP: u64 = 8 << 30;

/// Bytes of amplitude data the direct engine needs: c planes of (2t+1)^d
/// Complex64 sites. Saturates rather than overflowing on absurd requests.
pub fn direct_memory_needed(c: usize, d: usize, t_max: u64) -> u128 {
    let side = 2 * t_max as u128 + 1;
    side.saturating_pow(d as u32)
        .saturating_mul(c as u128)
        .saturating_mul(16)
}

#[derive(Debug, Clone)]
pub struct WalkState {
    pub t: u64,
    d: usize,
    c: usize,
    radius: i64,
    side: usize,
    plane: usize,
    data: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: u64,
    /// (site, probability) over the occupied sublattice of the light cone,
    /// in lexicographic site order.
    pub sites: Vec<(Vec<i64>, f64)>,
}

impl WalkState {
    /// All amplitude at the origin in state psi0; box sized for t_max steps.
    pub fn new(coin: &CoinOperator, psi0: &CoinState, t_max: u64, mem_cap: Option<u64>) -> Result<Self> {
        let d = coin.d();
        let c = coin.c();
        if d == 0 || d > 3 {
            return Err(Error::DirectEngineDimension(d));
        }
        if psi0.c() != c {
            return Err(Error::DimensionMismatch(format!(
                "state has {} components, coin needs {c}",
                psi0.c()
            )));
        }
        let side = 2 * t_max + 1;
        let sites = (side as u128).pow(d as u32);
        let needed = direct_memory_needed(c, d, t_max);
        let cap = mem_cap.unwrap_or(DEFAULT_MEM_CAP);
        if needed > cap as u128 {
            return Err(Error::MemoryCap {
                needed: needed.min(u64::MAX as u128) as u64,
                sites: sites.min(u64::MAX as u128) as u64,
                c,
                cap,
            });
        }
        let side = side as usize;
        let plane = side.pow(d as u32);
        let mut data = vec![Complex64::ZERO; c * plane];
        let origin = Self::origin_index(d, side, t_max as i64);
        for (l, &a) in psi0.amplitudes.iter().enumerate() {
            data[l * plane + origin] = a;
        }
        Ok(WalkState { t: 0, d, c, radius: t_max as i64, side, plane, data })
    }

    fn origin_index(d: usize, side: usize, r: i64) -> usize {
        let mut idx = 0usize;
        for _ in 0..d {
            idx = idx * side + r as usize;
        }
        idx
    }

    /// Flat index within a plane for site m (requires |m_i| <= radius).
    fn index(&self, m: &[i64]) -> usize {
        let mut idx = 0usize;
        for &mi in m {
            debug_assert!(mi.abs() <= self.radius);
            idx = idx * self.side + (mi + self.radius) as usize;
        }
        idx
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn components(&self) -> usize {
        self.c
    }

    pub fn amplitude(&self, m: &[i64]) -> Vec<Complex64> {
        let idx = self.index(m);
        (0..self.c).map(|l| self.data[l * self.plane + idx]).collect()
    }

    /// One walk step: coin, then coin-conditioned shift.
    pub fn step(&mut self, coin: &CoinOperator) {
        let t = self.t as i64;
        assert!(t < self.radius, "box sized for t_max = {} steps", self.radius);
        assert_eq!(coin.c(), self.c);
        self.apply_coin(coin, t);
        for l in 0..self.c {
            let delta: Vec<i64> = coin.displacements.vectors[l].clone();
            self.shift_plane(l, &delta, t);
        }
        self.t += 1;
    }

    /// In-place C psi on every occupied site of the radius-t cone.
    fn apply_coin(&mut self, coin: &CoinOperator, t: i64) {
        let c = self.c;
        let mat: Vec<Complex64> = (0..c)
            .flat_map(|i| (0..c).map(move |j| coin.matrix[(i, j)]))
            .collect();
        let plane = self.plane;
        let mut vin = vec![Complex64::ZERO; c];
        // occupied sites have every m_i + t even
        let lo = -t;
        let mut coords = vec![lo; self.d];
        loop {
            // row base for the outer coordinates, inner axis varies below
            let mut base = 0usize;
            for &ci in &coords[..self.d - 1] {
                base = base * self.side + (ci + self.radius) as usize;
            }
            base = base * self.side + (lo + self.radius) as usize;
            let mut idx = base;
            let mut m = lo;
            while m <= t {
                for l in 0..c {
                    vin[l] = self.data[l * plane + idx];
                }
                for (i, row) in mat.chunks_exact(c).enumerate() {
                    let mut acc = Complex64::ZERO;
                    for (j, &cij) in row.iter().enumerate() {
                        acc += cij * vin[j];
                    }
                    self.data[i * plane + idx] = acc;
                }
                idx += 2;
                m += 2;
            }
            // advance outer coordinates (odometer, step 2)
            let mut a = self.d.wrapping_sub(2);
            loop {
                if a == usize::MAX {
                    return;
                }
                coords[a] += 2;
                if coords[a] <= t {
                    break;
                }
                coords[a] = lo;
                a = a.wrapping_sub(1);
            }
        }
    }

    /// Translate plane l by delta, moving the radius-t box; zero vacated faces.
    fn shift_plane(&mut self, l: usize, delta: &[i64], t: i64) {
        let off = l * self.plane;
        let len = (2 * t + 1) as usize;
        let d = self.d;
        // iterate source rows over outer axes, descending along axes moving +1
        let mut step_idx = vec![0i64; d.saturating_sub(1)];
        let outer = d - 1;
        loop {
            let mut src = 0usize;
            let mut dst = 0usize;
            for a in 0..outer {
                let s = if delta[a] > 0 { t - step_idx[a] } else { -t + step_idx[a] };
                src = src * self.side + (s + self.radius) as usize;
                dst = dst * self.side + (s + delta[a] + self.radius) as usize;
            }
            src = src * self.side + (-t + self.radius) as usize;
            dst = dst * self.side + (-t + delta[outer] + self.radius) as usize;
            self.data.copy_within(off + src..off + src + len, off + dst);
            let mut a = outer.wrapping_sub(1);
            loop {
                if a == usize::MAX {
                    // zero the d trailing faces of the source box
                    for face in 0..d {
                        self.zero_face(l, face, -delta[face] * t, t);
                    }
                    return;
                }
                step_idx[a] += 1;
                if step_idx[a] <= 2 * t {
                    break;
                }
                step_idx[a] = 0;
                a = a.wrapping_sub(1);
            }
        }
    }

    /// Zero the hyperplane {m_axis = coord} within the radius-t box of plane l.
    fn zero_face(&mut self, l: usize, axis: usize, coord: i64, t: i64) {
        let off = l * self.plane;
        let d = self.d;
        let mut others: Vec<usize> = (0..d).filter(|&a| a != axis).collect();
        // make the last free axis innermost for contiguous zeroing when possible
        others.sort_unstable();
        let mut coords = vec![-t; d];
        coords[axis] = coord;
        if axis == d - 1 {
            // strided single elements
            loop {
                let idx = self.index_of(&coords);
                self.data[off + idx] = Complex64::ZERO;
                if !Self::advance(&mut coords, &others, t) {
                    return;
                }
            }
        } else {
            // contiguous rows along the last axis
            let row = &others[..];
            let inner = *row.last().unwrap();
            debug_assert_eq!(inner, d - 1);
            let outer = &row[..row.len() - 1];
            loop {
                coords[inner] = -t;
                let idx = self.index_of(&coords);
                let len = (2 * t + 1) as usize;
                self.data[off + idx..off + idx + len].fill(Complex64::ZERO);
                if !Self::advance(&mut coords, outer, t) {
                    return;
                }
            }
        }
    }

    fn index_of(&self, m: &[i64]) -> usize {
        let mut idx = 0usize;
        for &mi in m {
            idx = idx * self.side + (mi + self.radius) as usize;
        }
        idx
    }

    fn advance(coords: &mut [i64], axes: &[usize], t: i64) -> bool {
        for &a in axes.iter().rev() {
            coords[a] += 1;
            if coords[a] <= t {
                return true;
            }
            coords[a] = -t;
        }
        false
    }

    /// p0 = squared norm of the origin amplitude.
    pub fn return_probability(&self) -> f64 {
        let idx = Self::origin_index(self.d, self.side, self.radius);
        (0..self.c).map(|l| self.data[l * self.plane + idx].norm_sqr()).sum()
    }

    /// p(m, t) over the occupied sublattice of the cone, lexicographic order.
    pub fn position_distribution(&self) -> Vec<(Vec<i64>, f64)> {
        let t = self.t as i64;
        let mut out = Vec::new();
        let mut coords = vec![-t; self.d];
        loop {
            let idx = self.index_of(&coords);
            let p: f64 = (0..self.c).map(|l| self.data[l * self.plane + idx].norm_sqr()).sum();
            out.push((coords.clone(), p));
            let mut a = self.d.wrapping_sub(1);
            loop {
                if a == usize::MAX {
                    return out;
                }
                coords[a] += 2;
                if coords[a] <= t {
                    break;
                }
                coords[a] = -t;
                a = a.wrapping_sub(1);
            }
        }
    }

    /// Total probability over the box (norm-conservation check).
    pub fn total_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Initial walk state (box sized for t_max = 0 means a 1-site box, so most
/// callers go through evolve_collect instead).
pub fn init_state(coin: &CoinOperator, psi0: &CoinState, t_max: u64) -> Result<WalkState> {
    WalkState::new(coin, psi0, t_max, None)
}

/// Direct-engine evolution collecting p0 at even times plus requested snapshots.
pub fn evolve_collect(
    coin: &CoinOperator,
    psi0: &CoinState,
    t_max: u64,
    snapshot_times: &[u64],
    mem_cap: Option<u64>,
) -> Result<(ReturnSeries, Vec<Snapshot>)> {
    let mut state = WalkState::new(coin, psi0, t_max, mem_cap)?;
    let mut series = ReturnSeries::new(SeriesMeta {
        coin: coin.label.clone(),
        state: psi0.label.clone(),
        engine: "direct".into(),
        final_norm: None,
    });
    let mut wanted: Vec<u64> = snapshot_times.iter().copied().filter(|&s| s <= t_max).collect();
    wanted.sort_unstable();
    wanted.dedup();
    let mut snapshots = Vec::with_capacity(wanted.len());
    if wanted.first() == Some(&0) {
        snapshots.push(Snapshot { t: 0, sites: state.position_distribution() });
    }
    for t in 1..=t_max {
        state.step(coin);
        if t % 2 == 0 {
            series.push(t, state.return_probability())?;
        }
        if wanted.binary_search(&t).is_ok() {
            snapshots.push(Snapshot { t, sites: state.position_distribution() });
        }
    }
    series.meta.final_norm = Some(state.total_norm());
    Ok((series, snapshots))
}

/// A walk whose coin and initial state factor into independent blocks.
#[derive(Debug, Clone)]
pub struct ProductWalk {
    pub blocks: Vec<(CoinOperator, CoinState)>,
}

impl ProductWalk {
    pub fn new(blocks: Vec<(CoinOperator, CoinState)>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::NonProductState);
        }
        for (coin, state) in &blocks {
            if coin.c() != state.c() {
                return Err(Error::DimensionMismatch(format!(
                    "block coin {} has c = {} but state has {}",
                    coin.label,
                    coin.c(),
                    state.c()
                )));
            }
        }
        Ok(ProductWalk { blocks })
    }

    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(|(c, _)| c.d()).sum()
    }
}

/// Product engine: p0(t) = prod over blocks of the block origin probability.
pub fn evolve_product(walk: &ProductWalk, t_max: u64, mem_cap: Option<u64>) -> Result<ReturnSeries> {
    let mut block_series = Vec::with_capacity(walk.blocks.len());
    for (coin, state) in &walk.blocks {
        let (s, _) = evolve_collect(coin, state, t_max, &[], mem_cap)?;
        block_series.push(s);
    }
    let coin_label = walk.blocks.iter().map(|(c, _)| c.label.as_str()).collect::<Vec<_>>().join("\u{2297}");
    let state_label = walk.blocks.iter().map(|(_, s)| s.label.as_str()).collect::<Vec<_>>().join("\u{2297}");
    let mut series = ReturnSeries::new(SeriesMeta {
        coin: coin_label,
        state: state_label,
        engine: "product".into(),
        final_norm: block_series
            .iter()
            .map(|s| s.meta.final_norm)
            .try_fold(1.0, |acc, n| n.map(|n| acc * n)),
    });
    let mut t = 2;
    while t <= t_max {
        let p: f64 = block_series
            .iter()
            .map(|s| s.get(t).expect("block series cover every even t"))
            .product();
        series.push(t, p)?;
        t += 2;
    }
    Ok(series)
}
