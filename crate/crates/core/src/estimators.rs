//! Survival curves, tail exponents, exponential rates and means for censored
//! hitting-time samples.
//!
//! All censoring happens at one horizon, so the empirical survival function is
//! exact up to it. Censored and numerically extinct samples both count as
//! "not yet hit" and sit above every observed hit time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hitting::HittingOutcome;

/// Minimum number of uncensored order statistics in a Hill fit.
pub const MIN_TAIL_EVENTS: usize = 100;

/// The regression cross-check stops where fewer than this many samples survive.
pub const MIN_SURVIVORS: f64 = 10.0;

/// Empirical `P(T > n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalCurve {
    /// `(n, S(n))` at 0, at every observed hit time and at the horizon.
    pub points: Vec<(u64, f64)>,
    pub n_total: u64,
    /// Censored plus numerically extinct samples.
    pub n_censored: u64,
    pub n_extinct: u64,
    pub horizon: u64,
}

impl SurvivalCurve {
    /// `S(n)` as a right-continuous step function.
    pub fn at(&self, n: u64) -> f64 {
        match self.points.binary_search_by(|p| p.0.cmp(&n)) {
            Ok(i) => self.points[i].1,
            Err(0) => 1.0,
            Err(i) => self.points[i - 1].1,
        }
    }

    /// Largest `n` with `n_total * S(n) >= min_count`.
    pub fn last_n_with_count(&self, min_count: f64) -> u64 {
        let threshold = min_count / self.n_total as f64;
        let kept = self.points.iter().take_while(|p| p.1 >= threshold).count();
        match kept {
            0 => 0,
            // S holds its value until the next recorded point
            k if k < self.points.len() => self.points[k].0 - 1,
            _ => self.horizon,
        }
    }

    pub fn censored_fraction(&self) -> f64 {
        self.n_censored as f64 / self.n_total as f64
    }
}

/// Build the survival curve of a sample with a common horizon.
pub fn survival_curve(samples: &[HittingOutcome], horizon: u64) -> Result<SurvivalCurve> {
    if samples.is_empty() {
        return Err(Error::Precondition("survival curve needs at least one sample".into()));
    }
    let mut hits = Vec::with_capacity(samples.len());
    let mut n_censored = 0u64;
    let mut n_extinct = 0u64;
    for s in samples {
        match *s {
            HittingOutcome::Hit { n } => {
                if n > horizon {
                    return Err(Error::Precondition(format!("hit at {n} beyond horizon {horizon}")));
                }
                hits.push(n);
            }
            HittingOutcome::Censored { horizon: h } => {
                if h != horizon {
                    return Err(Error::Precondition(format!(
                        "mixed horizons: sample censored at {h}, expected {horizon}"
                    )));
                }
                n_censored += 1;
            }
            HittingOutcome::Extinct { n } => {
                if n > horizon {
                    return Err(Error::Precondition(format!(
                        "extinction at {n} beyond horizon {horizon}"
                    )));
                }
                n_censored += 1;
                n_extinct += 1;
            }
        }
    }
    hits.sort_unstable();
    let n_total = samples.len() as u64;
    let mut points = vec![(0u64, 1.0)];
    let mut remaining = n_total;
    let mut i = 0;
    while i < hits.len() {
        let t = hits[i];
        while i < hits.len() && hits[i] == t {
            remaining -= 1;
            i += 1;
        }
        points.push((t, remaining as f64 / n_total as f64));
    }
    if points.last().map(|p| p.0) != Some(horizon) {
        points.push((horizon, remaining as f64 / n_total as f64));
    }
    Ok(SurvivalCurve {
        points,
        n_total,
        n_censored,
        n_extinct,
        horizon,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMethod {
    Hill,
    LoglogRegression,
    ExpRate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitWindow {
    /// Range of `n` used by a regression.
    Range { n_lo: u64, n_hi: u64 },
    /// Top-`k` order statistics of a Hill fit, with the threshold value.
    OrderStats { k: usize, threshold: f64 },
}

/// A fitted survival exponent or exponential rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub method: TailMethod,
    /// Survival exponent (power fits) or decay rate (exponential fit).
    pub value: f64,
    pub stderr: f64,
    pub window: FitWindow,
    pub n_used: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_squared: Option<f64>,
}

/// Ordinary least squares `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
    pub n: usize,
}

pub fn linear_regression(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    let n = xs.len();
    if n != ys.len() || n < 2 {
        return Err(Error::Inestimable(format!(
            "regression needs at least 2 paired points, got {n}"
        )));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Inestimable("regression abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let slope_stderr = if n > 2 { (sse / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(LinearFit {
        slope,
        intercept,
        slope_stderr,
        r_squared,
        n,
    })
}

/// Hill estimator of the survival exponent with censoring at the top.
///
/// `values` are the uncensored observations; `n_censored` further samples are
/// known only to exceed `censor_value` (itself at least every observation)
/// and enter the top of the order statistics at that value. The estimate is
/// `(#uncensored in top k) / sum_{i<=k} ln(v_(i) / v_(k+1))`.
pub fn hill_estimator(values: &[f64], n_censored: usize, censor_value: f64, k: usize) -> Result<TailFit> {
    let mut unc: Vec<f64> = values.to_vec();
    unc.sort_unstable_by(|a, b| b.total_cmp(a));
    let n = unc.len() + n_censored;
    if k + 1 > n {
        return Err(Error::Inestimable(format!("k={k} needs more than {n} samples")));
    }
    if k < n_censored + MIN_TAIL_EVENTS {
        return Err(Error::Inestimable(format!(
            "top k={k} holds {} uncensored samples, need at least {MIN_TAIL_EVENTS}",
            k.saturating_sub(n_censored)
        )));
    }
    let events = k - n_censored;
    let threshold = unc[events];
    if !(threshold > 0.0) {
        return Err(Error::Inestimable("Hill threshold must be positive".into()));
    }
    let ln_t = threshold.ln();
    let mut sum = if n_censored > 0 {
        n_censored as f64 * (censor_value.ln() - ln_t)
    } else {
        0.0
    };
    sum += unc[..events].iter().map(|v| v.ln() - ln_t).sum::<f64>();
    if !(sum > 0.0) {
        return Err(Error::Inestimable("top order statistics are all tied".into()));
    }
    let value = events as f64 / sum;
    Ok(TailFit {
        method: TailMethod::Hill,
        value,
        stderr: value / (events as f64).sqrt(),
        window: FitWindow::OrderStats { k, threshold },
        n_used: k,
        r_squared: None,
    })
}

/// Hill fit plus its sensitivity, a regression cross-check and the
/// power-versus-exponential diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerTailReport {
    pub hill: TailFit,
    /// Hill at `k/2` and `2k`, where estimable.
    pub sensitivity: Vec<TailFit>,
    pub regression: Option<TailFit>,
    /// Semi-log fit over the same window.
    pub exponential: Option<TailFit>,
    /// Relative change of the log-log slope between the two halves of `[median, n_hi]`.
    pub power_slope_drift: Option<f64>,
    /// Same for the semi-log slope.
    pub exp_rate_drift: Option<f64>,
    /// The semi-log slope is more stable across the window than the log-log slope.
    pub exponential_preferred: bool,
    /// Some samples were censored or extinct, so the tail is partly a lower bound.
    pub censored_caveat: bool,
}

fn split_samples(samples: &[HittingOutcome]) -> (Vec<f64>, usize, f64) {
    let mut unc = Vec::with_capacity(samples.len());
    let mut n_c = 0usize;
    let mut top = 0u64;
    for s in samples {
        match *s {
            HittingOutcome::Hit { n } => {
                unc.push(n as f64);
                top = top.max(n);
            }
            HittingOutcome::Censored { horizon } => {
                n_c += 1;
                top = top.max(horizon);
            }
            HittingOutcome::Extinct { n } => {
                n_c += 1;
                top = top.max(n);
            }
        }
    }
    (unc, n_c, top as f64)
}

/// Default Hill `k`: `floor(sqrt(#uncensored))` uncensored order statistics above
/// the threshold, plus every censored sample (they always sit at the top).
pub fn default_hill_k(samples: &[HittingOutcome]) -> usize {
    let (unc, n_c, _) = split_samples(samples);
    (unc.len() as f64).sqrt().floor() as usize + n_c
}

/// Survival-exponent fit of a hitting-time sample.
pub fn fit_power_tail(samples: &[HittingOutcome], k: Option<usize>) -> Result<PowerTailReport> {
    let (unc, n_c, top) = split_samples(samples);
    let k = k.unwrap_or_else(|| default_hill_k(samples));
    let hill = hill_estimator(&unc, n_c, top, k)?;
    let sensitivity = [k / 2, 2 * k]
        .into_iter()
        .filter_map(|kk| hill_estimator(&unc, n_c, top, kk).ok())
        .collect();

    let threshold = match hill.window {
        FitWindow::OrderStats { threshold, .. } => threshold as u64,
        FitWindow::Range { .. } => unreachable!(),
    };
    let horizon = top as u64;
    let curve = survival_curve(samples, horizon).ok();
    let regs = curve.as_ref().map(|c| tail_regressions(c, threshold.max(1)));
    let (power_drift, exp_drift) = curve.as_ref().map_or((None, None), slope_drifts);
    let exponential_preferred = match (power_drift, exp_drift) {
        (Some(p), Some(e)) => e < p,
        _ => false,
    };
    let (regression, exponential) = regs.map_or((None, None), |r| (r.power, r.exp));
    Ok(PowerTailReport {
        hill,
        sensitivity,
        regression,
        exponential,
        power_slope_drift: power_drift,
        exp_rate_drift: exp_drift,
        exponential_preferred,
        censored_caveat: n_c > 0,
    })
}

/// Log-log and semi-log fits of `S` over `[n_lo, n_hi]`, with `n_hi` the last
/// point holding at least `MIN_SURVIVORS` samples, on log-spaced `n`.
struct TailRegressions {
    power: Option<TailFit>,
    exp: Option<TailFit>,
}

fn tail_regressions(curve: &SurvivalCurve, n_lo: u64) -> TailRegressions {
    let mut out = TailRegressions { power: None, exp: None };
    let n_hi = curve
        .last_n_with_count(MIN_SURVIVORS)
        .min(curve.horizon.saturating_sub(1).max(1));
    if n_hi <= n_lo {
        return out;
    }
    let grid = log_spaced_integers(n_lo, n_hi, 40);
    if grid.len() < 3 {
        return out;
    }
    let ln_s: Vec<f64> = grid.iter().map(|&n| curve.at(n).ln()).collect();
    let ln_n: Vec<f64> = grid.iter().map(|&n| (n as f64).ln()).collect();
    let n_f: Vec<f64> = grid.iter().map(|&n| n as f64).collect();
    let window = FitWindow::Range { n_lo, n_hi };
    let to_fit = |method, f: LinearFit| TailFit {
        method,
        value: -f.slope,
        stderr: f.slope_stderr,
        window,
        n_used: f.n,
        r_squared: Some(f.r_squared),
    };
    out.power = linear_regression(&ln_n, &ln_s)
        .ok()
        .map(|f| to_fit(TailMethod::LoglogRegression, f));
    out.exp = linear_regression(&n_f, &ln_s)
        .ok()
        .map(|f| to_fit(TailMethod::ExpRate, f));

    out
}

/// Relative change of the log-log and semi-log slopes of `S` between the two
/// halves of `[median, n_hi]`. A power law keeps a constant log-log slope and
/// an exponential a constant semi-log slope, so the steadier one is preferred.
fn slope_drifts(curve: &SurvivalCurve) -> (Option<f64>, Option<f64>) {
    let n_lo = curve.points.iter().find(|p| p.1 <= 0.5).map_or(1, |p| p.0.max(1));
    let n_hi = curve
        .last_n_with_count(MIN_SURVIVORS)
        .min(curve.horizon.saturating_sub(1).max(1));
    if n_hi <= n_lo {
        return (None, None);
    }
    let grid = log_spaced_integers(n_lo, n_hi, 40);
    let mid = grid.len() / 2;
    if mid < 2 || grid.len() - mid < 2 {
        return (None, None);
    }
    let ln_s: Vec<f64> = grid.iter().map(|&n| curve.at(n).ln()).collect();
    let drift = |xs: &[f64]| {
        let a = linear_regression(&xs[..=mid], &ln_s[..=mid]).ok()?.slope;
        let b = linear_regression(&xs[mid..], &ln_s[mid..]).ok()?.slope;
        let scale = a.abs().max(b.abs());
        (scale > 0.0).then(|| (b - a).abs() / scale)
    };
    let ln_n: Vec<f64> = grid.iter().map(|&n| (n as f64).ln()).collect();
    let n_f: Vec<f64> = grid.iter().map(|&n| n as f64).collect();
    (drift(&ln_n), drift(&n_f))
}

/// Up to `count` distinct integers log-spaced on `[lo, hi]`.
pub fn log_spaced_integers(lo: u64, hi: u64, count: usize) -> Vec<u64> {
    let lo = lo.max(1);
    if hi <= lo || count < 2 {
        return vec![lo];
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut out: Vec<u64> = (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp().round() as u64)
        .map(|n| n.clamp(lo, hi))
        .collect();
    out.dedup();
    out
}

/// Least-squares decay rate of `ln S(n)` over every integer `n` in `[n_lo, n_hi]`.
pub fn fit_exponential_rate(curve: &SurvivalCurve, window: (u64, u64)) -> Result<TailFit> {
    let (n_lo, n_hi) = window;
    if n_hi <= n_lo {
        return Err(Error::Inestimable(format!("empty rate window [{n_lo}, {n_hi}]")));
    }
    let mut xs = Vec::with_capacity((n_hi - n_lo + 1) as usize);
    let mut ys = Vec::with_capacity(xs.capacity());
    for n in n_lo..=n_hi {
        let s = curve.at(n);
        if !(s > 0.0) {
            return Err(Error::Inestimable(format!("S({n}) = 0 inside the rate window")));
        }
        xs.push(n as f64);
        ys.push(s.ln());
    }
    let f = linear_regression(&xs, &ys)?;
    Ok(TailFit {
        method: TailMethod::ExpRate,
        value: -f.slope,
        stderr: f.slope_stderr,
        window: FitWindow::Range { n_lo, n_hi },
        n_used: f.n,
        r_squared: Some(f.r_squared),
    })
}

/// Rate lower bound when the survival curve drops to zero at `n0`: the
/// one-sided 95% upper bound on `S(n0)` is `3/N`, so any `C kappa^n` with
/// `C >= 1` forces `rate >= ln(N/3)/n0`.
pub fn exponential_rate_lower_bound(curve: &SurvivalCurve) -> Option<(u64, f64)> {
    let n0 = curve.points.iter().find(|p| p.1 == 0.0)?.0;
    Some((n0, (curve.n_total as f64 / 3.0).ln() / n0 as f64))
}

/// Window for a rate fit: from `n_lo` to the last `n` with at least
/// `MIN_SURVIVORS` survivors.
pub fn default_rate_window(curve: &SurvivalCurve, n_lo: u64) -> (u64, u64) {
    (n_lo, curve.last_n_with_count(MIN_SURVIVORS).min(curve.horizon))
}

/// Truncated mean of a sample with a normal 95% interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub ci95: (f64, f64),
    pub censored_fraction: f64,
    /// Heuristic infinite-mean indicator from nested truncations.
    pub divergence_flag: bool,
    /// `(truncation level, truncated mean)` used by the flag.
    pub nested_means: Vec<(u64, f64)>,
}

/// Growth ratio of nested truncated means above which the flag is raised.
pub const DIVERGENCE_RATIO: f64 = 1.1;

/// Mean of `min(T, h)` for each truncation level `h`.
pub fn truncated_means(samples: &[HittingOutcome], levels: &[u64]) -> Vec<(u64, f64)> {
    let n = samples.len() as f64;
    levels
        .iter()
        .map(|&h| {
            let sum: f64 = samples.iter().map(|s| s.time().min(h) as f64).sum();
            (h, sum / n)
        })
        .collect()
}

/// True when every consecutive relative increase of the truncated means is at most `tol`.
pub fn is_saturating(nested: &[(u64, f64)], tol: f64) -> bool {
    nested.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + tol))
}

pub fn mean_with_ci(samples: &[HittingOutcome]) -> Result<MeanEstimate> {
    if samples.is_empty() {
        return Err(Error::Precondition("mean needs at least one sample".into()));
    }
    let n = samples.len() as f64;
    let times: Vec<f64> = samples.iter().map(|s| s.time() as f64).collect();
    let mean = times.iter().sum::<f64>() / n;
    let var = if samples.len() > 1 {
        times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let half = 1.96 * (var / n).sqrt();
    let not_hit = samples.iter().filter(|s| !s.is_hit()).count() as f64;
    let horizon = samples.iter().map(|s| s.time()).max().unwrap_or(0);
    let levels: Vec<u64> = [horizon / 4, horizon / 2, horizon]
        .into_iter()
        .filter(|&h| h > 0)
        .collect();
    let nested = truncated_means(samples, &levels);
    // with no truncated sample the mean is exact and the heuristic does not apply
    let divergence_flag =
        not_hit > 0.0 && nested.len() == 3 && nested.windows(2).all(|w| w[1].1 > DIVERGENCE_RATIO * w[0].1);
    Ok(MeanEstimate {
        mean,
        ci95: (mean - half, mean + half),
        censored_fraction: not_hit / n,
        divergence_flag,
        nested_means: nested,
    })
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;

    use crate::rng::stream_rng;

    fn hits(ns: &[u64]) -> Vec<HittingOutcome> {
        ns.iter().map(|&n| HittingOutcome::Hit { n }).collect()
    }

    #[test]
    fn survival_counting_example() {
        let c = survival_curve(&hits(&[1, 1, 2, 3]), 10).unwrap();
        assert_eq!(c.points, vec![(0, 1.0), (1, 0.5), (2, 0.25), (3, 0.0), (10, 0.0)]);
        assert_eq!(c.at(5), 0.0);
        assert_eq!(c.at(0), 1.0);
    }

    #[test]
    fn all_censored_survival_is_one() {
        let s = vec![HittingOutcome::Censored { horizon: 50 }; 5];
        let c = survival_curve(&s, 50).unwrap();
        for n in 0..50 {
            assert_eq!(c.at(n), 1.0);
        }
        assert_eq!(c.at(50), 1.0);
        assert_eq!(c.censored_fraction(), 1.0);
    }

    #[test]
    fn singleton_step() {
        let c = survival_curve(&hits(&[5]), 10).unwrap();
        assert_eq!(c.at(4), 1.0);
        assert_eq!(c.at(5), 0.0);
    }

    #[test]
    fn mixed_horizons_rejected() {
        let s = vec![
            HittingOutcome::Censored { horizon: 5 },
            HittingOutcome::Censored { horizon: 6 },
        ];
        assert!(survival_curve(&s, 6).is_err());
    }

    #[test]
    fn extinct_counts_as_surviving() {
        let s = vec![HittingOutcome::Extinct { n: 3 }, HittingOutcome::Hit { n: 2 }];
        let c = survival_curve(&s, 10).unwrap();
        assert_eq!(c.at(9), 0.5);
        assert_eq!(c.n_extinct, 1);
        assert_eq!(c.n_censored, 1);
    }

    #[test]
    fn exact_geometric_rates() {
        for kappa in [0.5f64, (-2.0f64).exp()] {
            let points = (0..=30).map(|n| (n, kappa.powi(n as i32))).collect();
            let c = SurvivalCurve {
                points,
                n_total: 1,
                n_censored: 0,
                n_extinct: 0,
                horizon: 30,
            };
            let f = fit_exponential_rate(&c, (0, 30)).unwrap();
            assert_relative_eq!(f.value, -kappa.ln(), max_relative = 1e-12);
            assert!(f.stderr < 1e-12);
        }
    }

    #[test]
    fn zero_in_rate_window_rejected() {
        let c = survival_curve(&hits(&[1, 2]), 5).unwrap();
        assert!(matches!(fit_exponential_rate(&c, (0, 3)), Err(Error::Inestimable(_))));
    }

    #[test]
    fn rule_of_three_bound() {
        let c = survival_curve(&vec![HittingOutcome::Hit { n: 1 }; 300], 10).unwrap();
        let (n0, rate) = exponential_rate_lower_bound(&c).unwrap();
        assert_eq!(n0, 1);
        assert_relative_eq!(rate, 100f64.ln());
    }

    #[test]
    fn mean_examples() {
        let m = mean_with_ci(&vec![HittingOutcome::Hit { n: 1 }; 1000]).unwrap();
        assert_eq!(m.mean, 1.0);
        assert_eq!(m.ci95, (1.0, 1.0));
        assert!(!m.divergence_flag);
        assert_eq!(mean_with_ci(&hits(&[1, 3])).unwrap().mean, 2.0);
    }

    #[test]
    fn divergence_flag_on_sqrt_growth() {
        // survival n^(-1/2): T = ceil(1/U^2) truncated at 10^5
        let mut rng = stream_rng(1, 0);
        let h = 100_000u64;
        let s: Vec<HittingOutcome> = (0..50_000)
            .map(|_| {
                let u: f64 = rng.random::<f64>();
                let t = (1.0 / (u * u)).ceil();
                if t > h as f64 {
                    HittingOutcome::Censored { horizon: h }
                } else {
                    HittingOutcome::Hit { n: t as u64 }
                }
            })
            .collect();
        assert!(mean_with_ci(&s).unwrap().divergence_flag);
        let light: Vec<HittingOutcome> = (0..50_000).map(|i| HittingOutcome::Hit { n: 1 + i % 7 }).collect();
        assert!(!mean_with_ci(&light).unwrap().divergence_flag);
    }

    #[test]
    fn truncated_means_saturate_for_light_tails() {
        let s: Vec<HittingOutcome> = (0..1000).map(|i| HittingOutcome::Hit { n: 1 + i % 20 }).collect();
        let nested = truncated_means(&s, &[1000, 10_000]);
        assert!(is_saturating(&nested, 0.01));
    }

    fn pareto(alpha: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = stream_rng(seed, 0);
        (0..n).map(|_| (1.0 - rng.random::<f64>()).powf(-1.0 / alpha)).collect()
    }

    #[test]
    fn hill_on_exact_pareto() {
        for alpha in [0.5, 1.5, 2.0] {
            let v = pareto(alpha, 100_000, 9);
            let f = hill_estimator(&v, 0, 0.0, 10_000).unwrap();
            assert!((f.value / alpha - 1.0).abs() < 0.05, "alpha {alpha}: {}", f.value);
        }
    }

    #[test]
    fn hill_censored_top_matches_uncensored() {
        // censoring the largest values at a level above the threshold keeps the estimate close
        let alpha = 1.0;
        let v = pareto(alpha, 200_000, 4);
        let cap = 1000.0;
        let kept: Vec<f64> = v.iter().cloned().filter(|&x| x <= cap).collect();
        let n_c = v.len() - kept.len();
        let f = hill_estimator(&kept, n_c, cap, 20_000).unwrap();
        assert!((f.value - alpha).abs() < 0.05, "{}", f.value);
    }

    #[test]
    fn hill_needs_tail_events() {
        let v = pareto(1.0, 1000, 1);
        assert!(matches!(hill_estimator(&v, 0, 0.0, 50), Err(Error::Inestimable(_))));
        assert!(matches!(hill_estimator(&v, 500, 1e9, 550), Err(Error::Inestimable(_))));
    }

    #[test]
    fn exponential_samples_prefer_exponential_fit() {
        let mut rng = stream_rng(2, 0);
        let s: Vec<HittingOutcome> = (0..100_000)
            .map(|_| {
                let e: f64 = -(1.0 - rng.random::<f64>()).ln();
                HittingOutcome::Hit {
                    n: 1 + (e * 5.0).floor() as u64,
                }
            })
            .collect();
        let r = fit_power_tail(&s, None).unwrap();
        assert!(r.exponential_preferred);

        let p: Vec<HittingOutcome> = pareto(0.8, 100_000, 3)
            .into_iter()
            .map(|x| HittingOutcome::Hit {
                n: x.ceil().min(1e9) as u64,
            })
            .collect();
        let r = fit_power_tail(&p, None).unwrap();
        assert!(!r.exponential_preferred);
        assert!((r.hill.value - 0.8).abs() < 0.1);
    }

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(0, 100, 1.96);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.03 && hi < 0.04);
        let (lo, hi) = wilson_interval(50, 100, 1.96);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
    }

    #[test]
    fn regression_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 5.0, 7.0, 9.0];
        let f = linear_regression(&xs, &ys).unwrap();
        assert_relative_eq!(f.slope, 2.0);
        assert_relative_eq!(f.intercept, 1.0);
        assert_relative_eq!(f.r_squared, 1.0);
    }

    fn outcome_strategy() -> impl Strategy<Value = HittingOutcome> {
        prop_oneof![
            (1u64..=100).prop_map(|n| HittingOutcome::Hit { n }),
            Just(HittingOutcome::Censored { horizon: 100 }),
            (1u64..=100).prop_map(|n| HittingOutcome::Extinct { n }),
        ]
    }

    proptest! {
        #[test]
        fn survival_is_monotone_and_recovers_counts(samples in prop::collection::vec(outcome_strategy(), 1..300)) {
            let c = survival_curve(&samples, 100).unwrap();
            prop_assert_eq!(c.points[0], (0, 1.0));
            for w in c.points.windows(2) {
                prop_assert!(w[1].1 <= w[0].1);
                prop_assert!(w[1].0 > w[0].0);
            }
            let total = c.n_total as f64;
            let mut recovered = 0u64;
            for w in c.points.windows(2) {
                recovered += ((w[0].1 - w[1].1) * total).round() as u64;
            }
            let n_hits = samples.iter().filter(|s| s.is_hit()).count() as u64;
            prop_assert_eq!(recovered, n_hits);
            prop_assert_eq!(n_hits + c.n_censored, c.n_total);
            prop_assert!(c.at(100) >= c.censored_fraction() - 1e-12);
        }

        #[test]
        fn truncated_mean_non_decreasing(samples in prop::collection::vec(outcome_strategy(), 1..200), a in 1u64..50, b in 0u64..60) {
            let nested = truncated_means(&samples, &[a, a + b]);
            prop_assert!(nested[1].1 >= nested[0].1);
        }
    }
}
