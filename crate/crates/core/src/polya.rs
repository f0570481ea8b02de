//! Polya numbers under the sequential measurement scheme, decay-exponent
//! fitting, recurrence classification, and classical baselines.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::{ReturnSeries, SeriesMeta};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Recurrent,
    Transient,
    Localized,
    Inconclusive,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::Recurrent => "recurrent",
            Classification::Transient => "transient",
            Classification::Localized => "localized",
            Classification::Inconclusive => "inconclusive",
        })
    }
}

/// Diagnostics behind a classification verdict.
#[derive(Debug, Clone, Serialize)]
pub struct Evidence {
    pub alpha: Option<f64>,
    pub stderr: Option<f64>,
    /// Tail mean relative to a t^-2 reference anchored at the first nonzero term.
    pub floor_ratio: Option<f64>,
    pub tail_mean: f64,
    pub fit_window: (u64, u64),
}

#[derive(Debug, Clone, Serialize)]
pub struct PolyaEstimate {
    pub n_terms: usize,
    /// P_n = 1 - prod over the first n positive even times of (1 - p0(t)).
    pub partial_product: f64,
    /// Sum of the same n terms.
    pub partial_sum: f64,
    pub fitted_exponent: Option<(f64, f64)>,
    pub classification: Classification,
}

/// P_n and the matching partial sum over the first n positive even times;
/// the t = 0 term is excluded from the product. Classification is attached
/// when the full series is long enough to support it.
pub fn polya_partial(series: &ReturnSeries, n: usize) -> Result<PolyaEstimate> {
    let terms = series.positive_entries();
    if n > terms.len() {
        return Err(Error::BadSeries(format!(
            "requested {n} Polya terms but series has {}",
            terms.len()
        )));
    }
    let mut product = 1.0;
    let mut sum = 0.0;
    for &(_, p) in &terms[..n] {
        product *= 1.0 - p;
        sum += p;
    }
    let (classification, fitted) = match classify_recurrence(series) {
        Ok((cls, ev)) => (cls, ev.alpha.zip(ev.stderr)),
        Err(_) => (Classification::Inconclusive, None),
    };
    Ok(PolyaEstimate {
        n_terms: n,
        partial_product: 1.0 - product,
        partial_sum: sum,
        fitted_exponent: fitted,
        classification,
    })
}

/// Three-term closed-form estimate P^(d) = 1 - (1 - 1/2^d)(1 - 1/8^d)^2
/// for the d-dimensional tensor-Hadamard walk.
pub fn tensor_polya_estimate(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::TensorEstimateDimension(d));
    }
    let a = 1.0 - 0.5f64.powi(d as i32);
    let b = 1.0 - 0.125f64.powi(d as i32);
    Ok(1.0 - a * b * b)
}

/// Log-log slope over dyadic blocks of even times.
///
/// p0(t) oscillates, so raw points bias a least-squares slope; block entries in
/// [2^j t_lo, 2^{j+1} t_lo) are first reduced to their geometric mean (one
/// (log t, log p0) point per block), then an OLS line is fit. Returns
/// (alpha = -slope, standard error of the slope).
pub fn fit_decay_exponent(series: &ReturnSeries, window: (u64, u64)) -> Result<(f64, f64)> {
    let (t_lo, t_hi) = window;
    let pts = series.window_nonzero(t_lo.max(1), t_hi);
    if pts.len() < 8 {
        return Err(Error::FitWindowTooSmall { lo: t_lo, hi: t_hi, found: pts.len(), need: 8 });
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut lo = t_lo.max(1);
    while lo <= t_hi {
        let hi = (2 * lo).min(t_hi + 1);
        let block: Vec<&(u64, f64)> = pts.iter().filter(|&&(t, _)| t >= lo && t < hi).collect();
        if block.len() >= 2 {
            let n = block.len() as f64;
            xs.push(block.iter().map(|&&(t, _)| (t as f64).ln()).sum::<f64>() / n);
            ys.push(block.iter().map(|&&(_, p)| p.ln()).sum::<f64>() / n);
        }
        lo = hi;
    }
    if xs.len() < 2 {
        return Err(Error::FitWindowTooSmall { lo: t_lo, hi: t_hi, found: xs.len(), need: 2 });
    }
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (ybar + slope * (x - xbar))).powi(2))
        .sum();
    let stderr = if xs.len() > 2 {
        (ss_res / (n - 2.0) / sxx).sqrt()
    } else {
        f64::INFINITY
    };
    Ok((-slope, stderr))
}

/// Thresholds separating the realized exponent classes {0, 1, 2, 3+} at t <= 1000.
const RECURRENCE_MARGIN: f64 = 0.15;
const LOCALIZATION_FLOOR: f64 = 10.0;
const LOCALIZATION_ALPHA: f64 = 0.4;

/// Classify a walk's recurrence from its return series.
///
/// Localization needs both signals: the tail holds above a t^-2 reference
/// floor *and* the fitted exponent is near zero. The floor test alone cannot
/// distinguish a localized walk from a t^-1 recurrent one (both sit far above
/// the reference), which is why the exponent conjunct is required.
pub fn classify_recurrence(series: &ReturnSeries) -> Result<(Classification, Evidence)> {
    let terms = series.positive_entries();
    if terms.len() < 64 {
        return Err(Error::SeriesTooShort(terms.len()));
    }
    let t_hi = series.t_max();
    let first_nonzero = terms.iter().find(|&&(_, p)| p > 0.0).copied();
    let quarter = &terms[terms.len() - terms.len() / 4..];
    let tail_mean = quarter.iter().map(|&(_, p)| p).sum::<f64>() / quarter.len() as f64;
    let floor_ratio = first_nonzero.map(|(t1, p1)| {
        let ref_mean = quarter
            .iter()
            .map(|&(t, _)| p1 * (t1 as f64 / t as f64).powi(2))
            .sum::<f64>()
            / quarter.len() as f64;
        tail_mean / ref_mean
    });
    let window = (t_hi / 10, t_hi);
    let fit = fit_decay_exponent(series, window).ok();
    let evidence = Evidence {
        alpha: fit.map(|(a, _)| a),
        stderr: fit.map(|(_, s)| s),
        floor_ratio,
        tail_mean,
        fit_window: window,
    };
    let cls = match (fit, floor_ratio) {
        (Some((alpha, _)), Some(ratio)) => {
            if ratio > LOCALIZATION_FLOOR && alpha < LOCALIZATION_ALPHA {
                Classification::Localized
            } else if alpha <= 1.0 + RECURRENCE_MARGIN {
                Classification::Recurrent
            } else {
                Classification::Transient
            }
        }
        _ => Classification::Inconclusive,
    };
    Ok((cls, evidence))
}

/// Classical balanced walk on Z^d with the same +-1-per-coordinate topology:
/// p0(2m) = (binom(2m, m)/4^m)^d, in log-domain arithmetic.
pub fn classical_return_series(d: usize, t_max: u64) -> ReturnSeries {
    let mut s = ReturnSeries::new(SeriesMeta {
        coin: format!("classical-{d}d"),
        state: "-".into(),
        engine: "closed-form".into(),
        final_norm: None,
    });
    let mut log_u = 0.0f64; // ln of binom(2m,m)/4^m
    let mut m = 1u64;
    while 2 * m <= t_max {
        log_u += ((2 * m - 1) as f64).ln() - ((2 * m) as f64).ln();
        s.push(2 * m, (d as f64 * log_u).exp()).expect("classical p0 in (0,1)");
        m += 1;
    }
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassicalPolya {
    pub d: usize,
    pub t_max: u64,
    pub value: f64,
    pub bound_lo: f64,
    pub bound_hi: f64,
    pub divergent: bool,
    /// Truncated sum S (t = 0 term included) and the integral tail estimate.
    pub partial_sum: f64,
    pub tail: f64,
}

/// P = 1 - 1/S for the classical walk, with an integral tail bracket.
/// d <= 2 is recurrent: the sum diverges and P = 1.
pub fn classical_polya(d: usize, t_max: u64) -> ClassicalPolya {
    let series = classical_return_series(d, t_max);
    let sum: f64 = 1.0 + series.positive_entries().iter().map(|&(_, p)| p).sum::<f64>();
    if d <= 2 {
        return ClassicalPolya {
            d,
            t_max,
            value: 1.0,
            bound_lo: 1.0,
            bound_hi: 1.0,
            divergent: true,
            partial_sum: sum,
            tail: f64::INFINITY,
        };
    }
    // p0(2m) <= (pi m)^(-d/2), so the tail beyond m = t_max/2 is below
    // the integral of that envelope
    let half = d as f64 / 2.0;
    let m_max = (t_max / 2) as f64;
    let tail = std::f64::consts::PI.powf(-half) * m_max.powf(1.0 - half) / (half - 1.0);
    let lo = 1.0 - 1.0 / sum;
    let hi = 1.0 - 1.0 / (sum + tail);
    ClassicalPolya {
        d,
        t_max,
        value: 0.5 * (lo + hi),
        bound_lo: lo,
        bound_hi: hi,
        divergent: false,
        partial_sum: sum,
        tail,
    }
}

/// Paired partial products and sums demonstrating the product-vanishes <=>
/// series-diverges criterion; rows are (n, P_n, sum_n).
pub fn criterion_demo(series: &ReturnSeries) -> Vec<(usize, f64, f64)> {
    let mut product = 1.0;
    let mut sum = 0.0;
    series
        .positive_entries()
        .iter()
        .enumerate()
        .map(|(i, &(_, p))| {
            product *= 1.0 - p;
            sum += p;
            (i + 1, 1.0 - product, sum)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_estimate_closed_form() {
        // exact dyadic rationals: 1 - (1 - 2^-d)(1 - 8^-d)^2
        assert!((tensor_polya_estimate(2).unwrap() - 4477.0 / 16384.0).abs() < 1e-15);
        assert!((tensor_polya_estimate(3).unwrap() - 269305.0 / 2097152.0).abs() < 1e-15);
        assert!((tensor_polya_estimate(4).unwrap() - 16900081.0 / 268435456.0).abs() < 1e-15);
        assert!(
            (tensor_polya_estimate(5).unwrap() - 1075773409.0 / 34359738368.0).abs() < 1e-15
        );
        assert!(matches!(tensor_polya_estimate(1), Err(Error::TensorEstimateDimension(1))));
    }

    #[test]
    fn partial_product_and_sum() {
        let s = ReturnSeries::synthetic(1000, |t| 1.0 / (t * t) as f64, "1/t^2");
        let est = polya_partial(&s, 3).unwrap();
        assert_eq!(est.n_terms, 3);
        // 1 - (3/4)(15/16)(35/36) and 1/4 + 1/16 + 1/36
        assert!((est.partial_product - (1.0 - 1575.0 / 2304.0)).abs() < 1e-15);
        assert!((est.partial_sum - (0.25 + 0.0625 + 1.0 / 36.0)).abs() < 1e-15);
        assert_eq!(est.classification, Classification::Transient);
        assert!(polya_partial(&s, 501).is_err());
    }

    #[test]
    fn exact_power_laws_fit_exactly() {
        // geometric block means of a pure power law sit on the log-log line
        let s = ReturnSeries::synthetic(1000, |t| (t as f64).powf(-1.5), "t^-1.5");
        let (alpha, stderr) = fit_decay_exponent(&s, (100, 1000)).unwrap();
        assert!((alpha - 1.5).abs() < 1e-9, "alpha = {alpha}");
        assert!(stderr < 1e-9);
        let s = ReturnSeries::synthetic(1000, |t| 0.7 / (t * t) as f64, "0.7/t^2");
        let (alpha, _) = fit_decay_exponent(&s, (100, 1000)).unwrap();
        assert!((alpha - 2.0).abs() < 1e-9);
    }

    #[test]
    fn fit_needs_enough_points() {
        let s = ReturnSeries::synthetic(20, |t| 1.0 / t as f64, "1/t");
        assert!(matches!(
            fit_decay_exponent(&s, (14, 20)),
            Err(Error::FitWindowTooSmall { .. })
        ));
    }

    #[test]
    fn classification_covers_the_exponent_classes() {
        let recurrent = ReturnSeries::synthetic(1000, |t| 1.0 / t as f64, "1/t");
        let (cls, ev) = classify_recurrence(&recurrent).unwrap();
        assert_eq!(cls, Classification::Recurrent);
        assert!((ev.alpha.unwrap() - 1.0).abs() < 0.01);
        assert_eq!(ev.fit_window, (100, 1000));

        let transient = ReturnSeries::synthetic(1000, |t| 1.0 / (t * t) as f64, "1/t^2");
        let (cls, ev) = classify_recurrence(&transient).unwrap();
        assert_eq!(cls, Classification::Transient);
        // tail matches the t^-2 reference anchored at the first term
        assert!((ev.floor_ratio.unwrap() - 1.0).abs() < 1e-9);

        let localized = ReturnSeries::synthetic(1000, |_| 0.3, "const");
        let (cls, ev) = classify_recurrence(&localized).unwrap();
        assert_eq!(cls, Classification::Localized);
        assert!(ev.floor_ratio.unwrap() > LOCALIZATION_FLOOR);
        assert!(ev.alpha.unwrap().abs() < 1e-9);

        let burst = ReturnSeries::synthetic(1000, |t| if t == 2 { 0.5 } else { 0.0 }, "burst");
        let (cls, _) = classify_recurrence(&burst).unwrap();
        assert_eq!(cls, Classification::Inconclusive);

        let short = ReturnSeries::synthetic(100, |t| 1.0 / t as f64, "short");
        assert!(matches!(classify_recurrence(&short), Err(Error::SeriesTooShort(50))));
    }

    #[test]
    fn classical_series_closed_form_values() {
        let s1 = classical_return_series(1, 8);
        assert!((s1.get(2).unwrap() - 0.5).abs() < 1e-14);
        assert!((s1.get(4).unwrap() - 0.375).abs() < 1e-14);
        assert!((s1.get(6).unwrap() - 0.3125).abs() < 1e-14);
        let s3 = classical_return_series(3, 4);
        assert!((s3.get(2).unwrap() - 0.125).abs() < 1e-14);
        assert!((s3.get(4).unwrap() - 27.0 / 512.0).abs() < 1e-14);
    }

    #[test]
    fn classical_walks_fit_their_dimension() {
        for d in 1..=3 {
            let s = classical_return_series(d, 4000);
            let (alpha, _) = fit_decay_exponent(&s, (400, 4000)).unwrap();
            assert!((alpha - d as f64 / 2.0).abs() < 0.05, "d = {d}: alpha = {alpha}");
        }
    }

    #[test]
    fn classical_polya_brackets() {
        for d in [1, 2] {
            let p = classical_polya(d, 1000);
            assert!(p.divergent);
            assert_eq!(p.value, 1.0);
        }
        // d = 3 converges; the truncated sum and tail bound bracket the limit
        let limit = 0.2822299890; // sum of (binom(2m,m)/4^m)^3 gives 1/(1-P) = 1.39320393
        let p = classical_polya(3, 1000);
        assert!(!p.divergent);
        assert!((p.bound_lo - 0.27386438).abs() < 5e-8);
        assert!((p.bound_hi - 0.28223619).abs() < 5e-8);
        assert!(p.bound_lo <= limit && limit <= p.bound_hi);
        let tight = classical_polya(3, 200_000);
        assert!(tight.bound_lo <= limit && limit <= tight.bound_hi);
        assert!(tight.bound_hi - tight.bound_lo < 1e-3);
        assert!((tight.value - limit).abs() < 5e-4);
    }

    #[test]
    fn product_criterion_bounds() {
        // ln(1-p) is between -2p and -p for p <= 1/2, so the log partial
        // product is squeezed between -2 sum and -sum
        for f in [|t: u64| 1.0 / t as f64, |t: u64| 1.0 / (t * t) as f64] {
            let s = ReturnSeries::synthetic(2000, f, "demo");
            let rows = criterion_demo(&s);
            assert_eq!(rows.len(), 1000);
            let mut last = 0.0;
            for &(n, p_n, sum_n) in &rows {
                assert!(p_n >= last, "P_n must be nondecreasing");
                last = p_n;
                let log_q = (1.0 - p_n).ln();
                assert!(log_q <= -sum_n + 1e-12, "n = {n}");
                assert!(log_q >= -2.0 * sum_n - 1e-12, "n = {n}");
            }
        }
    }
}
