//! The return-probability series p0(t), the artifact's central observable.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SeriesMeta {
    pub coin: String,
    pub state: String,
    pub engine: String,
    /// Total norm of the final walk state, when an engine produced one.
    pub final_norm: Option<f64>,
}

/// p0 at even times 0, 2, 4, ...; strictly increasing t, p0(0) = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    entries: Vec<(u64, f64)>,
    pub meta: SeriesMeta,
}

impl ReturnSeries {
    pub fn new(meta: SeriesMeta) -> Self {
        ReturnSeries { entries: vec![(0, 1.0)], meta }
    }

    pub fn from_entries(entries: Vec<(u64, f64)>, meta: SeriesMeta) -> Result<Self> {
        let mut s = ReturnSeries { entries: vec![], meta };
        for (t, p) in entries {
            s.push(t, p)?;
        }
        if s.entries.first() != Some(&(0, 1.0)) {
            return Err(Error::BadSeries("series must start with p0(0) = 1".into()));
        }
        Ok(s)
    }

    /// Synthetic series from a closure over even t >= 2 (t = 0 entry added).
    pub fn synthetic(t_max: u64, f: impl Fn(u64) -> f64, label: &str) -> Self {
        let mut s = ReturnSeries::new(SeriesMeta {
            coin: label.to_string(),
            state: "synthetic".into(),
            engine: "synthetic".into(),
            final_norm: None,
        });
        let mut t = 2;
        while t <= t_max {
            s.push(t, f(t)).expect("synthetic series must stay in [0,1]");
            t += 2;
        }
        s
    }

    pub fn push(&mut self, t: u64, p0: f64) -> Result<()> {
        if !t.is_multiple_of(2) {
            return Err(Error::BadSeries(format!("odd time {t}")));
        }
        if let Some(&(last, _)) = self.entries.last() {
            if t <= last && !(t == 0 && self.entries.len() == 1) {
                return Err(Error::BadSeries(format!("non-increasing time {t} after {last}")));
            }
        }
        if t == 0 {
            if (p0 - 1.0).abs() > 1e-12 {
                return Err(Error::BadSeries(format!("p0(0) = {p0}, must be 1")));
            }
            self.entries[0] = (0, 1.0);
            return Ok(());
        }
        if !(-1e-12..=1.0 + 1e-12).contains(&p0) {
            return Err(Error::BadSeries(format!("p0({t}) = {p0} outside [0, 1]")));
        }
        self.entries.push((t, p0.clamp(0.0, 1.0)));
        Ok(())
    }

    pub fn entries(&self) -> &[(u64, f64)] {
        &self.entries
    }

    /// Entries at positive even t (the Polya product terms).
    pub fn positive_entries(&self) -> &[(u64, f64)] {
        &self.entries[1..]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false // always holds the t = 0 entry
    }

    pub fn t_max(&self) -> u64 {
        self.entries.last().map(|&(t, _)| t).unwrap_or(0)
    }

    pub fn get(&self, t: u64) -> Option<f64> {
        self.entries
            .binary_search_by_key(&t, |&(tt, _)| tt)
            .ok()
            .map(|i| self.entries[i].1)
    }

    /// Entries with t in [lo, hi] and p0 > 0.
    pub fn window_nonzero(&self, lo: u64, hi: u64) -> Vec<(u64, f64)> {
        self.entries
            .iter()
            .filter(|&&(t, p)| t >= lo && t <= hi && p > 0.0)
            .copied()
            .collect()
    }
}
