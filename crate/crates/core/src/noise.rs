//! Zero-mean environmental noise laws and their analytic metadata.
//!
//! Each variant is shifted so that `E[Y] = 0` holds exactly. Besides sampling,
//! a [`NoiseSpec`] knows its moment generating function (with divergence
//! reported as `+inf`), the domain of that function on both half-lines, which
//! absolute moments exist, and its CDF. Those are what the analytic bounds in
//! [`crate::theory`] consume.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSpec {
    Gaussian {
        sigma: f64,
    },
    /// `Y = E - 1/rate` with `E ~ Exp(rate)`.
    ShiftedExponential {
        rate: f64,
    },
    /// `Y = exp(mu + sigma Z) - exp(mu + sigma^2 / 2)`.
    CenteredLogNormal {
        mu: f64,
        sigma: f64,
    },
    /// Symmetric Lomax law: `P(|Y| > y) = (1 + y/scale)^(-tail_index)`.
    SymmetricPareto {
        tail_index: f64,
        scale: f64,
    },
    UniformCentered {
        half_width: f64,
    },
    /// `Y = 0`. Deterministic oracle mode.
    #[serde(rename = "dirac0")]
    Dirac0,
}

/// Standard normal CDF.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

impl NoiseSpec {
    /// All parameter problems, empty when the noise law is usable.
    pub fn validation_errors(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let mut positive = |name: &str, v: f64| {
            if !(v.is_finite() && v > 0.0) {
                errs.push(format!("noise {name} must be a finite positive number, got {v}"));
            }
        };
        match *self {
            NoiseSpec::Gaussian { sigma } => positive("sigma", sigma),
            NoiseSpec::ShiftedExponential { rate } => positive("rate", rate),
            NoiseSpec::CenteredLogNormal { mu, sigma } => {
                positive("sigma", sigma);
                if !mu.is_finite() {
                    errs.push(format!("noise mu must be finite, got {mu}"));
                }
            }
            NoiseSpec::SymmetricPareto { tail_index, scale } => {
                positive("scale", scale);
                if !(tail_index.is_finite() && tail_index > 1.0) {
                    errs.push(format!(
                        "noise tail_index must exceed 1 so the mean exists, got {tail_index}"
                    ));
                }
            }
            NoiseSpec::UniformCentered { half_width } => positive("half_width", half_width),
            NoiseSpec::Dirac0 => {}
        }
        errs
    }

    pub fn validate(&self) -> Result<()> {
        let errs = self.validation_errors();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(errs.join("; ")))
        }
    }

    pub fn label(&self) -> String {
        match *self {
            NoiseSpec::Gaussian { sigma } => format!("Gaussian(sigma={sigma})"),
            NoiseSpec::ShiftedExponential { rate } => format!("ShiftedExponential(rate={rate})"),
            NoiseSpec::CenteredLogNormal { mu, sigma } => {
                format!("CenteredLogNormal(mu={mu}, sigma={sigma})")
            }
            NoiseSpec::SymmetricPareto { tail_index, scale } => {
                format!("SymmetricPareto(tail_index={tail_index}, scale={scale})")
            }
            NoiseSpec::UniformCentered { half_width } => {
                format!("UniformCentered(half_width={half_width})")
            }
            NoiseSpec::Dirac0 => "Dirac0".to_string(),
        }
    }

    /// One draw of `Y`.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            NoiseSpec::Gaussian { sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                sigma * z
            }
            NoiseSpec::ShiftedExponential { rate } => {
                let e: f64 = Exp1.sample(rng);
                (e - 1.0) / rate
            }
            NoiseSpec::CenteredLogNormal { mu, sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                (mu + sigma * z).exp() - lognormal_mean(mu, sigma)
            }
            NoiseSpec::SymmetricPareto { tail_index, scale } => {
                // inverse CDF of |Y|, u in [0, 1) so 1 - u is in (0, 1]
                let u: f64 = rng.random();
                let magnitude = scale * ((1.0 - u).powf(-1.0 / tail_index) - 1.0);
                if rng.random::<bool>() {
                    magnitude
                } else {
                    -magnitude
                }
            }
            NoiseSpec::UniformCentered { half_width } => {
                let u: f64 = rng.random();
                half_width * (2.0 * u - 1.0)
            }
            NoiseSpec::Dirac0 => 0.0,
        }
    }

    /// `ln E[exp(alpha Y)]`, `+inf` when the expectation diverges.
    pub fn log_mgf(&self, alpha: f64) -> f64 {
        if alpha == 0.0 {
            return 0.0;
        }
        match *self {
            NoiseSpec::Gaussian { sigma } => 0.5 * alpha * alpha * sigma * sigma,
            NoiseSpec::ShiftedExponential { rate } => {
                if alpha >= rate {
                    f64::INFINITY
                } else {
                    -alpha / rate + (rate / (rate - alpha)).ln()
                }
            }
            NoiseSpec::CenteredLogNormal { mu, sigma } => {
                if alpha > 0.0 {
                    f64::INFINITY
                } else {
                    -alpha * lognormal_mean(mu, sigma) + log_lognormal_laplace(mu, sigma, -alpha)
                }
            }
            NoiseSpec::SymmetricPareto { .. } => f64::INFINITY,
            NoiseSpec::UniformCentered { half_width } => {
                let t = (alpha * half_width).abs();
                if t < 1e-8 {
                    t * t / 6.0
                } else {
                    // ln(sinh t / t) without overflow
                    t + (-(-2.0 * t).exp()).ln_1p() - (2.0 * t).ln()
                }
            }
            NoiseSpec::Dirac0 => 0.0,
        }
    }

    /// `E[exp(alpha Y)]`, `+inf` when it diverges.
    pub fn mgf(&self, alpha: f64) -> f64 {
        self.log_mgf(alpha).exp()
    }

    /// `sup { alpha >= 0 : E[exp(alpha Y)] < inf }`.
    pub fn alpha0_pos(&self) -> f64 {
        match *self {
            NoiseSpec::ShiftedExponential { rate } => rate,
            NoiseSpec::CenteredLogNormal { .. } | NoiseSpec::SymmetricPareto { .. } => 0.0,
            _ => f64::INFINITY,
        }
    }

    /// `sup { alpha >= 0 : E[exp(-alpha Y)] < inf }`.
    pub fn alpha0_neg(&self) -> f64 {
        match *self {
            NoiseSpec::SymmetricPareto { .. } => 0.0,
            _ => f64::INFINITY,
        }
    }

    /// `E|Y|^p < inf` exactly for `p < max_finite_moment()`.
    pub fn max_finite_moment(&self) -> f64 {
        match *self {
            NoiseSpec::SymmetricPareto { tail_index, .. } => tail_index,
            _ => f64::INFINITY,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            NoiseSpec::Gaussian { sigma } => sigma * sigma,
            NoiseSpec::ShiftedExponential { rate } => 1.0 / (rate * rate),
            NoiseSpec::CenteredLogNormal { mu, sigma } => (sigma * sigma).exp_m1() * (2.0 * mu + sigma * sigma).exp(),
            NoiseSpec::SymmetricPareto { tail_index, scale } => {
                if tail_index > 2.0 {
                    2.0 * scale * scale / ((tail_index - 1.0) * (tail_index - 2.0))
                } else {
                    f64::INFINITY
                }
            }
            NoiseSpec::UniformCentered { half_width } => half_width * half_width / 3.0,
            NoiseSpec::Dirac0 => 0.0,
        }
    }

    /// `P(Y <= y)`.
    pub fn cdf(&self, y: f64) -> f64 {
        match *self {
            NoiseSpec::Gaussian { sigma } => std_normal_cdf(y / sigma),
            NoiseSpec::ShiftedExponential { rate } => {
                let shifted = y + 1.0 / rate;
                if shifted <= 0.0 {
                    0.0
                } else {
                    -(-rate * shifted).exp_m1()
                }
            }
            NoiseSpec::CenteredLogNormal { mu, sigma } => {
                let v = y + lognormal_mean(mu, sigma);
                if v <= 0.0 {
                    0.0
                } else {
                    std_normal_cdf((v.ln() - mu) / sigma)
                }
            }
            NoiseSpec::SymmetricPareto { tail_index, scale } => {
                let tail = 0.5 * (1.0 + y.abs() / scale).powf(-tail_index);
                if y >= 0.0 {
                    1.0 - tail
                } else {
                    tail
                }
            }
            NoiseSpec::UniformCentered { half_width } => ((y + half_width) / (2.0 * half_width)).clamp(0.0, 1.0),
            NoiseSpec::Dirac0 => {
                if y >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `P(lo <= Y <= hi)`; zero for an empty interval.
    pub fn prob_between(&self, lo: f64, hi: f64) -> f64 {
        if !(lo <= hi) {
            return 0.0;
        }
        match self {
            NoiseSpec::Dirac0 => {
                if lo <= 0.0 && 0.0 <= hi {
                    1.0
                } else {
                    0.0
                }
            }
            // every other variant is continuous, so endpoints carry no mass
            _ => (self.cdf(hi) - self.cdf(lo)).max(0.0),
        }
    }

    /// True when `P(-m' <= Y <= m) = 1` for some finite `m', m`.
    pub fn is_uniformly_bounded(&self) -> bool {
        matches!(self, NoiseSpec::UniformCentered { .. } | NoiseSpec::Dirac0)
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, NoiseSpec::Dirac0)
    }

    /// Noise hypotheses of one theorem, each marked pass/fail.
    ///
    /// A failing report never blocks a run; it only labels its verdicts.
    pub fn check_assumptions(&self, theorem: TheoremId) -> AssumptionReport {
        let mut checks = vec![HypothesisCheck::new(
            "E[Y] = 0",
            true,
            "exact by construction of the variant".to_string(),
        )];
        checks.push(HypothesisCheck::new(
            "noise is non-degenerate",
            !self.is_degenerate(),
            if self.is_degenerate() {
                "Y = 0 almost surely: the chain is deterministic".to_string()
            } else {
                "Y is a genuine random variable".to_string()
            },
        ));

        let p_max = self.max_finite_moment();
        let moment_check = |order: f64, name: &str| {
            let passed = p_max > order;
            let detail = if p_max.is_infinite() {
                "all absolute moments finite".to_string()
            } else if passed {
                format!("holds for any delta < {:.4}", p_max - order)
            } else {
                format!("E|Y|^p is infinite for p >= {p_max}")
            };
            HypothesisCheck::new(name, passed, detail)
        };

        use TheoremId::*;
        match theorem {
            T3_1 => checks.push(moment_check(1.0, "E|Y| < inf")),
            T5_1 => checks.push(moment_check(2.0, "E|Y|^(2+delta1) < inf for some delta1 > 0")),
            T6_1 => checks.push(moment_check(2.0, "E[Y^2] < inf")),
            _ => checks.push(moment_check(1.0, "E|Y|^(1+delta) < inf for some delta > 0")),
        }

        match theorem {
            T2_1b => {
                let a0 = self.alpha0_pos();
                checks.push(HypothesisCheck::new(
                    "E[exp(alpha Y)] < inf for some alpha > 0",
                    a0 > 0.0,
                    format!("alpha0 = {a0}"),
                ));
            }
            T2_2 => {
                let bounded = self.is_uniformly_bounded();
                checks.push(HypothesisCheck::new(
                    "Y is not uniformly bounded",
                    !bounded,
                    if bounded {
                        "noise uniformly bounded".to_string()
                    } else {
                        "unbounded support".to_string()
                    },
                ));
            }
            T4_1Exp => {
                let a0 = self.alpha0_neg();
                checks.push(HypothesisCheck::new(
                    "E[exp(-alpha Y)] < inf for some alpha > 0",
                    a0 > 0.0,
                    format!("left domain sup = {a0}"),
                ));
            }
            _ => {}
        }

        AssumptionReport { theorem, checks }
    }
}

fn lognormal_mean(mu: f64, sigma: f64) -> f64 {
    (mu + 0.5 * sigma * sigma).exp()
}

/// `ln E[exp(-s exp(mu + sigma Z))]` for `s > 0`, by composite Simpson in log space.
///
/// The lognormal Laplace transform has no closed form.
fn log_lognormal_laplace(mu: f64, sigma: f64, s: f64) -> f64 {
    const HALF_RANGE: f64 = 40.0;
    const INTERVALS: usize = 8000;
    let h = 2.0 * HALF_RANGE / INTERVALS as f64;
    let log_norm = -0.5 * (2.0 * std::f64::consts::PI).ln();
    let terms: Vec<f64> = (0..=INTERVALS)
        .map(|i| {
            let z = -HALF_RANGE + h * i as f64;
            let weight: f64 = if i == 0 || i == INTERVALS {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            weight.ln() + log_norm - 0.5 * z * z - s * (mu + sigma * z).exp()
        })
        .collect();
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    max + sum.ln() + (h / 3.0).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TheoremId {
    #[serde(rename = "T2.1a")]
    T2_1a,
    #[serde(rename = "T2.1b")]
    T2_1b,
    #[serde(rename = "T2.2")]
    T2_2,
    #[serde(rename = "T3.1")]
    T3_1,
    #[serde(rename = "T4.1")]
    T4_1,
    #[serde(rename = "T4.1-exp")]
    T4_1Exp,
    #[serde(rename = "T4.2")]
    T4_2,
    #[serde(rename = "T5.1")]
    T5_1,
    #[serde(rename = "T6.1")]
    T6_1,
}

impl TheoremId {
    pub const ALL: [TheoremId; 9] = [
        TheoremId::T2_1a,
        TheoremId::T2_1b,
        TheoremId::T2_2,
        TheoremId::T3_1,
        TheoremId::T4_1,
        TheoremId::T4_1Exp,
        TheoremId::T4_2,
        TheoremId::T5_1,
        TheoremId::T6_1,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TheoremId::T2_1a => "T2.1a",
            TheoremId::T2_1b => "T2.1b",
            TheoremId::T2_2 => "T2.2",
            TheoremId::T3_1 => "T3.1",
            TheoremId::T4_1 => "T4.1",
            TheoremId::T4_1Exp => "T4.1-exp",
            TheoremId::T4_2 => "T4.2",
            TheoremId::T5_1 => "T5.1",
            TheoremId::T6_1 => "T6.1",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown theorem id {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub hypothesis: String,
    pub passed: bool,
    pub detail: String,
}

impl HypothesisCheck {
    fn new(hypothesis: &str, passed: bool, detail: String) -> Self {
        Self {
            hypothesis: hypothesis.to_string(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub theorem: TheoremId,
    pub checks: Vec<HypothesisCheck>,
}

impl AssumptionReport {
    pub fn holds(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn violations(&self) -> impl Iterator<Item = &HypothesisCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use approx::assert_relative_eq;

    const ALL_VARIANTS: [NoiseSpec; 7] = [
        NoiseSpec::Gaussian { sigma: 1.0 },
        NoiseSpec::ShiftedExponential { rate: 2.0 },
        NoiseSpec::CenteredLogNormal { mu: 0.0, sigma: 0.5 },
        NoiseSpec::SymmetricPareto {
            tail_index: 2.5,
            scale: 1.0,
        },
        NoiseSpec::SymmetricPareto {
            tail_index: 1.5,
            scale: 1.0,
        },
        NoiseSpec::UniformCentered { half_width: 1.0 },
        NoiseSpec::Dirac0,
    ];

    fn draws(spec: NoiseSpec, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = stream_rng(seed, 0);
        (0..n).map(|_| spec.sample(&mut rng)).collect()
    }

    #[test]
    fn dirac_samples_zero() {
        assert!(draws(NoiseSpec::Dirac0, 100, 1).iter().all(|&y| y == 0.0));
    }

    #[test]
    fn sample_means_are_zero_within_clt_bound() {
        let n = 1_000_000;
        for spec in ALL_VARIANTS {
            if spec.is_degenerate() {
                continue;
            }
            let ys = draws(spec, n, 11);
            let var = spec.variance();
            if var.is_finite() {
                let mean = ys.iter().sum::<f64>() / n as f64;
                let tol = 4.0 * var.sqrt() / (n as f64).sqrt();
                assert!(mean.abs() < tol, "{}: mean {mean} tol {tol}", spec.label());
            } else {
                let mut sorted = ys.clone();
                sorted.sort_by(f64::total_cmp);
                let q = |p: f64| sorted[(p * n as f64) as usize];
                let median = q(0.5);
                let iqr = q(0.75) - q(0.25);
                assert!(
                    median.abs() < iqr / (n as f64).sqrt(),
                    "{}: median {median} iqr {iqr}",
                    spec.label()
                );
            }
        }
    }

    #[test]
    fn mgf_examples() {
        assert_relative_eq!(
            NoiseSpec::Gaussian { sigma: 1.0 }.mgf(2.0),
            7.389_056_098_930_65,
            max_relative = 1e-12
        );
        assert_eq!(NoiseSpec::ShiftedExponential { rate: 2.0 }.mgf(2.0), f64::INFINITY);
        assert_eq!(NoiseSpec::Dirac0.mgf(-3.7), 1.0);
        assert_eq!(NoiseSpec::Dirac0.mgf(5.0), 1.0);
        assert_eq!(
            NoiseSpec::CenteredLogNormal { mu: 0.0, sigma: 1.0 }.mgf(0.1),
            f64::INFINITY
        );
        assert_eq!(
            NoiseSpec::SymmetricPareto {
                tail_index: 3.0,
                scale: 1.0
            }
            .mgf(-0.1),
            f64::INFINITY
        );
    }

    #[test]
    fn mgf_at_zero_is_one() {
        for spec in ALL_VARIANTS {
            assert_eq!(spec.mgf(0.0), 1.0, "{}", spec.label());
        }
    }

    #[test]
    fn mgf_matches_monte_carlo() {
        let n = 1_000_000;
        let cases: &[(NoiseSpec, &[f64])] = &[
            (NoiseSpec::Gaussian { sigma: 1.0 }, &[-1.0, 0.5, 1.0]),
            (NoiseSpec::ShiftedExponential { rate: 2.0 }, &[-1.0, 0.5, 0.9]),
            (NoiseSpec::CenteredLogNormal { mu: 0.0, sigma: 0.5 }, &[-0.5, -2.0]),
            (NoiseSpec::UniformCentered { half_width: 1.0 }, &[-2.0, 1.5]),
        ];
        for (k, (spec, alphas)) in cases.iter().enumerate() {
            let ys = draws(*spec, n, 100 + k as u64);
            for &alpha in *alphas {
                let vals: Vec<f64> = ys.iter().map(|y| (alpha * y).exp()).collect();
                let mean = vals.iter().sum::<f64>() / n as f64;
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                let se = (var / n as f64).sqrt();
                let exact = spec.mgf(alpha);
                assert!(
                    (mean - exact).abs() < 3.0 * se,
                    "{} alpha={alpha}: mc {mean} exact {exact} se {se}",
                    spec.label()
                );
            }
        }
    }

    #[test]
    fn lognormal_laplace_matches_series_for_small_argument() {
        // E[exp(-s LN)] = 1 - s m1 + s^2 m2 / 2 - ... with m_k = exp(k mu + k^2 sigma^2 / 2)
        let (mu, sigma, s) = (0.0_f64, 0.3_f64, 1e-3_f64);
        let m = |k: f64| (k * mu + 0.5 * k * k * sigma * sigma).exp();
        let series = 1.0 - s * m(1.0) + s * s * m(2.0) / 2.0 - s.powi(3) * m(3.0) / 6.0;
        assert_relative_eq!(log_lognormal_laplace(mu, sigma, s), series.ln(), max_relative = 1e-10);
    }

    #[test]
    fn domains_and_moments_match_variants() {
        let g = NoiseSpec::Gaussian { sigma: 1.0 };
        assert_eq!(g.alpha0_pos(), f64::INFINITY);
        assert_eq!(NoiseSpec::ShiftedExponential { rate: 2.0 }.alpha0_pos(), 2.0);
        assert_eq!(NoiseSpec::CenteredLogNormal { mu: 0.0, sigma: 1.0 }.alpha0_pos(), 0.0);
        let p = NoiseSpec::SymmetricPareto {
            tail_index: 2.5,
            scale: 1.0,
        };
        assert_eq!(p.alpha0_pos(), 0.0);
        assert_eq!(p.max_finite_moment(), 2.5);
        assert_eq!(g.max_finite_moment(), f64::INFINITY);
        assert_eq!(
            NoiseSpec::UniformCentered { half_width: 1.0 }.alpha0_pos(),
            f64::INFINITY
        );
        assert_eq!(NoiseSpec::Dirac0.alpha0_pos(), f64::INFINITY);
    }

    #[test]
    fn cdf_is_consistent_with_samples() {
        let n = 200_000;
        for spec in ALL_VARIANTS {
            if spec.is_degenerate() {
                continue;
            }
            let ys = draws(spec, n, 5);
            for y in [-1.0, -0.2, 0.0, 0.3, 1.5] {
                let emp = ys.iter().filter(|&&v| v <= y).count() as f64 / n as f64;
                let p = spec.cdf(y);
                let se = (p * (1.0 - p) / n as f64).sqrt().max(1e-6);
                assert!((emp - p).abs() < 5.0 * se, "{} y={y}: {emp} vs {p}", spec.label());
            }
        }
    }

    #[test]
    fn assumption_examples() {
        let bounded = NoiseSpec::UniformCentered { half_width: 1.0 }.check_assumptions(TheoremId::T2_2);
        assert!(!bounded.holds());
        assert!(bounded
            .violations()
            .any(|c| c.hypothesis == "Y is not uniformly bounded"));

        assert!(NoiseSpec::Gaussian { sigma: 1.0 }
            .check_assumptions(TheoremId::T5_1)
            .holds());

        let pareto = NoiseSpec::SymmetricPareto {
            tail_index: 2.5,
            scale: 1.0,
        };
        let rep = pareto.check_assumptions(TheoremId::T5_1);
        assert!(rep.holds());
        assert!(rep.checks.iter().any(|c| c.detail.contains("delta < 0.5")));

        let heavy = NoiseSpec::SymmetricPareto {
            tail_index: 1.8,
            scale: 1.0,
        };
        assert!(!heavy.check_assumptions(TheoremId::T6_1).holds());
        assert!(heavy.check_assumptions(TheoremId::T3_1).holds());
        assert!(!NoiseSpec::CenteredLogNormal { mu: 0.0, sigma: 1.0 }
            .check_assumptions(TheoremId::T2_1b)
            .holds());
    }

    #[test]
    fn dirac_fails_every_theorem() {
        for t in TheoremId::ALL {
            assert!(!NoiseSpec::Dirac0.check_assumptions(t).holds(), "{t}");
        }
    }

    #[test]
    fn theorem_ids_round_trip() {
        for t in TheoremId::ALL {
            assert_eq!(t.as_str().parse::<TheoremId>().unwrap(), t);
        }
        assert!("T9.9".parse::<TheoremId>().is_err());
    }

    #[test]
    fn validation_catches_bad_parameters() {
        assert!(NoiseSpec::Gaussian { sigma: 0.0 }.validate().is_err());
        assert!(NoiseSpec::SymmetricPareto {
            tail_index: 1.0,
            scale: 1.0
        }
        .validate()
        .is_err());
        assert!(NoiseSpec::Dirac0.validate().is_ok());
    }

    #[test]
    fn parses_tagged_records() {
        let spec: NoiseSpec = toml::from_str("type = \"gaussian\"\nsigma = 1.0").unwrap();
        assert_eq!(spec, NoiseSpec::Gaussian { sigma: 1.0 });
        let spec: NoiseSpec = toml::from_str("type = \"dirac0\"").unwrap();
        assert_eq!(spec, NoiseSpec::Dirac0);
        assert!(toml::from_str::<NoiseSpec>("type = \"gaussian\"\nsigma = 1.0\nfoo = 2").is_err());
    }
}
