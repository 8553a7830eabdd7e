//! Analytic constants and bounds used as oracles for the Monte Carlo output.

use serde::{Deserialize, Serialize};

use crate::dynamics::{GrowthModel, GrowthRegime, TwoSpeciesModel};
use crate::error::{Error, Result};
use crate::hitting::Barrier;
use crate::noise::{NoiseSpec, TheoremId};
use crate::optimize::{log_grid, scan_then_refine};

/// Smallest `alpha` on the scan grid.
const ALPHA_MIN: f64 = 1e-6;
/// Largest `alpha` scanned when the moment-generating function never diverges.
const ALPHA_CAP: f64 = 1e4;
const ALPHA_GRID: usize = 400;
const REL_TOL: f64 = 1e-8;

/// Minimizer of a bound of the form `exp(alpha s) E[exp(+-alpha Y)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundOptimum {
    pub alpha_star: f64,
    /// Minimum value (`kappa*` or `rho*`).
    pub value: f64,
    /// False when the scan minimum sits at the upper edge of the scanned range,
    /// so the infimum is not attained inside it.
    pub attained: bool,
}

impl BoundOptimum {
    pub fn rate(&self) -> f64 {
        -self.value.ln()
    }
}

/// `sup_{x >= M} f(x)^alpha E[exp(alpha Y)]`.
pub fn kappa_of_alpha(model: &GrowthModel, noise: &NoiseSpec, m: f64, alpha: f64) -> f64 {
    let s = model.sup_log_growth(m, f64::INFINITY);
    (alpha * s + noise.log_mgf(alpha)).exp()
}

/// Minimize `ln kappa(alpha) = alpha s + ln E[exp(alpha Y)]` over `alpha` in
/// `(0, alpha_max)` with `s = sup_{x >= M} ln f`.
fn minimize_exponent(s: f64, log_mgf: impl Fn(f64) -> f64, alpha_max: f64) -> Option<BoundOptimum> {
    let hi = if alpha_max.is_finite() {
        alpha_max * (1.0 - 1e-9)
    } else {
        ALPHA_CAP
    }
    .min(ALPHA_CAP);
    if hi <= ALPHA_MIN {
        return None;
    }
    let g = |a: f64| a * s + log_mgf(a);
    let grid = log_grid(ALPHA_MIN, hi, ALPHA_GRID);
    let best = scan_then_refine(g, &grid, REL_TOL);
    let at_top = best.x >= grid[grid.len() - 1];
    Some(BoundOptimum {
        alpha_star: best.x,
        value: best.value.exp(),
        attained: best.interior || !at_top,
    })
}

/// `(alpha*, kappa*)` for the commonness time, with vacuity reported as an error.
pub fn optimize_kappa(model: &GrowthModel, noise: &NoiseSpec, m: f64) -> Result<BoundOptimum> {
    let a0 = noise.alpha0_pos();
    if a0 <= 0.0 {
        return Err(Error::Hypothesis(format!(
            "E[exp(alpha Y)] is infinite for every alpha > 0 under {}",
            noise.label()
        )));
    }
    let s = model.sup_log_growth(m, f64::INFINITY);
    let opt =
        minimize_exponent(s, |a| noise.log_mgf(a), a0).ok_or_else(|| Error::Hypothesis("empty alpha range".into()))?;
    if opt.value >= 1.0 || opt.alpha_star <= ALPHA_MIN * (1.0 + 1e-9) {
        return Err(Error::Vacuous(format!(
            "kappa(alpha) >= 1 for all alpha > 0 at M={m}; the bound needs larger M"
        )));
    }
    Ok(opt)
}

/// `C(X0) = (X0/M)^alpha*` for the commonness bound.
pub fn kappa_prefactor(x0: f64, m: f64, alpha_star: f64) -> f64 {
    (x0 / m).powf(alpha_star)
}

/// `exp(-alpha inf_{[0,eps]} ln f) E[exp(-alpha Y)]`.
pub fn rho_of_alpha(model: &GrowthModel, noise: &NoiseSpec, eps: f64, alpha: f64) -> f64 {
    let i = model.inf_log_growth(0.0, eps);
    (-alpha * i + noise.log_mgf(-alpha)).exp()
}

/// `(alpha*, rho*)` for the rarity time.
pub fn optimize_rho(model: &GrowthModel, noise: &NoiseSpec, eps: f64) -> Result<BoundOptimum> {
    let i = model.inf_log_growth(0.0, eps);
    if !(i > 0.0) {
        return Err(Error::Hypothesis(format!(
            "inf of ln f on [0, {eps}] is {i}, must be > 0"
        )));
    }
    let a0 = noise.alpha0_neg();
    if a0 <= 0.0 {
        return Err(Error::Hypothesis(format!(
            "E[exp(-alpha Y)] is infinite for every alpha > 0 under {}",
            noise.label()
        )));
    }
    let opt = minimize_exponent(-i, |a| noise.log_mgf(-a), a0)
        .ok_or_else(|| Error::Hypothesis("empty alpha range".into()))?;
    if opt.value >= 1.0 {
        return Err(Error::Vacuous(format!(
            "rho(alpha) >= 1 for all alpha > 0 at eps={eps}"
        )));
    }
    Ok(opt)
}

/// `C(X0) = (eps/X0)^alpha*` for the rarity bound.
pub fn rho_prefactor(x0: f64, eps: f64, alpha_star: f64) -> f64 {
    (eps / x0).powf(alpha_star)
}

/// Per-step escape probability bound for the band `[eps, M]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandKappa {
    pub kappa: f64,
    /// `-max_{[eps,M]} ln(x f(x))`
    pub k_min: f64,
    /// `-min_{[eps,M]} ln(x f(x))`
    pub k_max: f64,
    /// Noise interval `[ln eps + K_min, ln M + K_max]` that keeps the chain in the band.
    pub interval: (f64, f64),
    /// False when the noise is uniformly bounded (kappa may then be 1).
    pub hypothesis_ok: bool,
}

/// `kappa(eps, M) = P(ln eps + K_min <= Y <= ln M + K_max)`.
///
/// From `x` in the band, `ln X' = ln(x f(x)) + Y` stays in `[ln eps, ln M]`
/// only if `Y` lies in that interval, whatever `x` is.
pub fn medium_band_kappa(model: &GrowthModel, noise: &NoiseSpec, eps: f64, m: f64) -> Result<BandKappa> {
    if !(eps > 0.0 && eps < m) {
        return Err(Error::InvalidParameter(format!(
            "band needs 0 < eps < M, got [{eps}, {m}]"
        )));
    }
    let (lo, hi) = model.log_xf_extrema(eps, m);
    let (k_min, k_max) = (-hi, -lo);
    let interval = (eps.ln() + k_min, m.ln() + k_max);
    Ok(BandKappa {
        kappa: noise.prob_between(interval.0, interval.1),
        k_min,
        k_max,
        interval,
        hypothesis_ok: noise.check_assumptions(TheoremId::T2_2).holds(),
    })
}

/// Logarithmic mean bounds; a bound is `None` when its inputs are out of regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanBounds {
    /// `E T_M <= 2 (ln X0 - ln M + 1)`
    pub mean_tm_upper: Option<f64>,
    /// `E T_eps >= (ln eps - ln X0) / d`, `d = sup_{[0,eps]} ln f`
    pub mean_teps_lower: Option<f64>,
    /// `E T_eps <= 2 (ln eps0 - ln X0) / ln lambda`
    pub mean_teps_upper: Option<f64>,
    pub eps0: f64,
    /// Why each missing bound was not computed.
    pub notes: Vec<String>,
}

pub fn mean_bounds(model: &GrowthModel, x0: f64, eps: Option<f64>, m: Option<f64>, eps0: Option<f64>) -> MeanBounds {
    let mut notes = Vec::new();
    let mean_tm_upper = match m {
        Some(m) if x0 > m => Some(2.0 * (x0.ln() - m.ln() + 1.0)),
        Some(m) => {
            notes.push(format!("T_M bound needs X0 > M, got X0={x0}, M={m}"));
            None
        }
        None => None,
    };
    let eps0 = eps0.or(eps.map(|e| 2.0 * e)).unwrap_or(f64::NAN);
    let (mut lower, mut upper) = (None, None);
    if let Some(eps) = eps {
        let ln_lambda = model.ln_lambda();
        if !(x0 < eps) {
            notes.push(format!("T_eps bounds need X0 < eps, got X0={x0}, eps={eps}"));
        } else if !(ln_lambda > 0.0) {
            notes.push(format!("T_eps bounds need lambda > 1, got ln lambda = {ln_lambda}"));
        } else {
            let d = model.sup_log_growth(0.0, eps);
            lower = Some((eps.ln() - x0.ln()) / d);
            if eps0 > eps {
                upper = Some(2.0 * (eps0.ln() - x0.ln()) / ln_lambda);
            } else {
                notes.push(format!("T_eps upper bound needs eps0 > eps, got eps0={eps0}"));
            }
        }
    }
    MeanBounds {
        mean_tm_upper,
        mean_teps_lower: lower,
        mean_teps_upper: upper,
        eps0,
        notes,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Transient,
    PositiveRecurrent,
    NullRecurrent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub lambda: f64,
    pub regime: Regime,
    pub label: String,
    pub caveats: Vec<String>,
}

pub fn classify_regime(model: &GrowthModel, noise: &NoiseSpec) -> RegimeReport {
    let lambda = model.lambda();
    let mut caveats = Vec::new();
    if noise.is_degenerate() {
        caveats.push("degenerate noise: the chain is deterministic".to_string());
    }
    let (regime, label) = match model.regime() {
        GrowthRegime::Declining => (Regime::Transient, "transient (escape to 0)".to_string()),
        GrowthRegime::Growing => {
            if noise.mgf(1.0).is_finite() {
                (
                    Regime::PositiveRecurrent,
                    "recurrent, positive (E[exp(Y)] < inf)".to_string(),
                )
            } else {
                (Regime::NullRecurrent, "recurrent, null (E[exp(Y)] = inf)".to_string())
            }
        }
        GrowthRegime::Neutral => {
            // ln f(x) = O(x) near 0 for both growth families, which is o(|ln x|^(-1-delta2))
            let report = noise.check_assumptions(TheoremId::T5_1);
            for v in report.violations() {
                caveats.push(format!("{}: {}", v.hypothesis, v.detail));
            }
            (Regime::NullRecurrent, "null recurrent (lambda = 1)".to_string())
        }
    };
    RegimeReport {
        lambda,
        regime,
        label,
        caveats,
    }
}

pub fn alpha0_of(noise: &NoiseSpec) -> f64 {
    noise.alpha0_pos()
}

/// Predicted power tail of the escape-from-extremes time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremesTail {
    pub alpha0: f64,
    pub survival_exponent: f64,
    pub mass_exponent: f64,
}

pub fn predicted_extremes_tail(noise: &NoiseSpec) -> ExtremesTail {
    let alpha0 = alpha0_of(noise);
    ExtremesTail {
        alpha0,
        survival_exponent: alpha0,
        mass_exponent: alpha0 + 1.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseLabel {
    Case1,
    Case2,
    Case3,
    ConjecturedRecurrent,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSpeciesCase {
    pub case_label: CaseLabel,
    /// `(r1 a21 - r2 a11, r1 a22 - r2 a12)`
    pub margins: (f64, f64),
    /// Barrier form describing the escape, for the transient cases.
    pub barrier: Option<Barrier>,
    /// Largest escape margin `eps` keeping the barrier's defining inequality strict.
    pub eps_max: Option<f64>,
}

impl TwoSpeciesCase {
    pub fn is_transient(&self) -> bool {
        matches!(self.case_label, CaseLabel::Case1 | CaseLabel::Case2 | CaseLabel::Case3)
    }
}

pub fn classify_two_species(model: &TwoSpeciesModel) -> Result<TwoSpeciesCase> {
    if !(model.r1 > 0.0 && model.r2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "two-species classification needs r1, r2 > 0, got r1={}, r2={}",
            model.r1, model.r2
        )));
    }
    let m1 = model.r1 * model.a21 - model.r2 * model.a11;
    let m2 = model.r1 * model.a22 - model.r2 * model.a12;
    let degenerate = m1 == 0.0 || m2 == 0.0 || model.r1 == model.r2;
    let case_label = if degenerate {
        CaseLabel::Degenerate
    } else {
        match (m1 > 0.0, m2 > 0.0) {
            (true, true) => CaseLabel::Case1,
            (true, false) => CaseLabel::Case2,
            (false, false) => CaseLabel::Case3,
            (false, true) => CaseLabel::ConjecturedRecurrent,
        }
    };
    let barrier = match case_label {
        CaseLabel::Case1 => Some(Barrier::Lower),
        CaseLabel::Case3 => Some(Barrier::Upper),
        CaseLabel::Case2 if model.r2 < model.r1 => Some(Barrier::Lower),
        CaseLabel::Case2 => Some(Barrier::Upper),
        _ => None,
    };
    let eps_max = barrier.map(|b| match b {
        Barrier::Lower => m1 / model.a21,
        Barrier::Upper => -m2 / model.a22,
    });
    Ok(TwoSpeciesCase {
        case_label,
        margins: (m1, m2),
        barrier,
        eps_max,
    })
}

/// Every analytic quantity applicable to one single-species configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryBounds {
    pub kappa_star: Option<f64>,
    pub alpha_star: Option<f64>,
    pub kappa_attained: Option<bool>,
    pub rho_star: Option<f64>,
    pub alpha_star_rho: Option<f64>,
    pub rho_attained: Option<bool>,
    /// Prefactor of the exponential bound that applies to the region.
    pub c_of_x0: Option<f64>,
    pub band: Option<BandKappa>,
    pub means: MeanBounds,
    pub alpha0: f64,
    pub extremes_tail: ExtremesTail,
    pub regime: RegimeReport,
    /// Reasons some bounds are absent (hypothesis failure, vacuity).
    pub notes: Vec<String>,
}

impl TheoryBounds {
    /// Bounds for `x0` with optional thresholds `eps` and `M`.
    pub fn compute(
        model: &GrowthModel,
        noise: &NoiseSpec,
        x0: f64,
        eps: Option<f64>,
        m: Option<f64>,
        eps0: Option<f64>,
    ) -> Self {
        let mut notes = Vec::new();
        let mut c_of_x0 = None;
        let (mut kappa_star, mut alpha_star, mut kappa_attained) = (None, None, None);
        if let Some(m) = m {
            match optimize_kappa(model, noise, m) {
                Ok(o) => {
                    kappa_star = Some(o.value);
                    alpha_star = Some(o.alpha_star);
                    kappa_attained = Some(o.attained);
                    if x0 > m {
                        c_of_x0 = Some(kappa_prefactor(x0, m, o.alpha_star));
                    }
                }
                Err(e) => notes.push(format!("kappa*: {e}")),
            }
        }
        let (mut rho_star, mut alpha_star_rho, mut rho_attained) = (None, None, None);
        if let Some(eps) = eps {
            if model.ln_lambda() > 0.0 {
                match optimize_rho(model, noise, eps) {
                    Ok(o) => {
                        rho_star = Some(o.value);
                        alpha_star_rho = Some(o.alpha_star);
                        rho_attained = Some(o.attained);
                        if x0 < eps {
                            c_of_x0 = Some(rho_prefactor(x0, eps, o.alpha_star));
                        }
                    }
                    Err(e) => notes.push(format!("rho*: {e}")),
                }
            }
        }
        let band = match (eps, m) {
            (Some(e), Some(m)) => medium_band_kappa(model, noise, e, m).ok(),
            _ => None,
        };
        TheoryBounds {
            kappa_star,
            alpha_star,
            kappa_attained,
            rho_star,
            alpha_star_rho,
            rho_attained,
            c_of_x0,
            band,
            means: mean_bounds(model, x0, eps, m, eps0),
            alpha0: alpha0_of(noise),
            extremes_tail: predicted_extremes_tail(noise),
            regime: classify_regime(model, noise),
            notes,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::std_normal_cdf;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const RICKER: GrowthModel = GrowthModel::Ricker { r: 1.0, a: 1.0 };
    const GAUSS: NoiseSpec = NoiseSpec::Gaussian { sigma: 1.0 };

    #[test]
    fn kappa_examples() {
        assert_relative_eq!(
            kappa_of_alpha(&RICKER, &GAUSS, 3.0, 2.0),
            (-2.0f64).exp(),
            max_relative = 1e-14
        );
        assert_relative_eq!(kappa_of_alpha(&RICKER, &GAUSS, 3.0, 1e-12), 1.0, max_relative = 1e-10);
        let se = NoiseSpec::ShiftedExponential { rate: 2.0 };
        assert_eq!(kappa_of_alpha(&RICKER, &se, 3.0, 2.0), f64::INFINITY);
    }

    #[test]
    fn kappa_sup_matches_grid() {
        // sup over x >= M of alpha ln f(x), checked on a grid
        let p = GrowthModel::PerturbedRicker {
            r: 1.0,
            a: 1.0,
            c: -4.0,
        };
        for m in [0.2, 0.5, 3.0] {
            let grid_sup = (0..200_000)
                .map(|i| m + i as f64 * 1e-4)
                .map(|x| p.log_growth(x))
                .fold(f64::MIN, f64::max);
            assert!((p.sup_log_growth(m, f64::INFINITY) - grid_sup).abs() < 1e-8);
        }
    }

    #[test]
    fn optimize_kappa_gaussian() {
        let o = optimize_kappa(&RICKER, &GAUSS, 3.0).unwrap();
        assert!((o.alpha_star - 2.0).abs() < 1e-6);
        assert_relative_eq!(o.value, (-2.0f64).exp(), max_relative = 1e-10);
        assert!(o.attained);
        assert_relative_eq!(
            kappa_prefactor(10.0, 3.0, o.alpha_star),
            (10.0f64 / 3.0).powi(2),
            max_relative = 1e-5
        );
    }

    #[test]
    fn optimize_kappa_vacuous() {
        assert!(matches!(optimize_kappa(&RICKER, &GAUSS, 1.0), Err(Error::Vacuous(_))));
        assert!(matches!(optimize_kappa(&RICKER, &GAUSS, 0.5), Err(Error::Vacuous(_))));
    }

    #[test]
    fn optimize_kappa_dirac_not_attained() {
        let o = optimize_kappa(&RICKER, &NoiseSpec::Dirac0, 3.0).unwrap();
        assert!(!o.attained);
        assert!(o.value < 1e-100);
    }

    #[test]
    fn optimize_kappa_heavy_noise_fails_hypothesis() {
        let p = NoiseSpec::SymmetricPareto {
            tail_index: 2.5,
            scale: 1.0,
        };
        assert!(matches!(optimize_kappa(&RICKER, &p, 3.0), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn optimize_kappa_shifted_exponential_interior() {
        // g(a) = -2a - a/2 - ln(1 - a/2): g'(a) = 0 at a = 2 - 1/2.5 = 1.6
        let se = NoiseSpec::ShiftedExponential { rate: 2.0 };
        let o = optimize_kappa(&RICKER, &se, 3.0).unwrap();
        assert!((o.alpha_star - 1.6).abs() < 1e-6);
        assert_relative_eq!(o.value, (-4.0f64 + 5.0f64.ln()).exp(), max_relative = 1e-9);
    }

    #[test]
    fn closed_form_grid() {
        for (r, a, m, sigma) in [
            (1.0, 1.0, 3.0, 1.0),
            (0.5, 1.0, 2.0, 0.5),
            (2.0, 0.5, 10.0, 2.0),
            (1.0, 2.0, 4.0, 1.5),
            (0.1, 1.0, 1.0, 0.3),
            (1.5, 1.0, 2.0, 0.8),
            (3.0, 1.0, 5.0, 1.0),
            (0.0, 1.0, 2.0, 1.0),
            (-1.0, 1.0, 0.5, 1.0),
            (1.0, 0.1, 30.0, 3.0),
        ] {
            let model = GrowthModel::Ricker { r, a };
            let noise = NoiseSpec::Gaussian { sigma };
            let o = optimize_kappa(&model, &noise, m).unwrap();
            let expected = (a * m - r) / (sigma * sigma);
            assert!((o.alpha_star - expected).abs() < 1e-6, "{r} {a} {m} {sigma}");
            for f in [0.9, 1.1] {
                assert!(o.value <= kappa_of_alpha(&model, &noise, m, o.alpha_star * f));
            }

            // rarity threshold with r - a eps > 0
            if r > 0.0 {
                let eps = r / (2.0 * a);
                let o = optimize_rho(&model, &noise, eps).unwrap();
                let expected = (r - a * eps) / (sigma * sigma);
                assert!((o.alpha_star - expected).abs() < 1e-6);
                for f in [0.9, 1.1] {
                    assert!(o.value <= rho_of_alpha(&model, &noise, eps, o.alpha_star * f));
                }
            }
        }
    }

    #[test]
    fn rho_examples() {
        let o = optimize_rho(&RICKER, &GAUSS, 0.1).unwrap();
        assert!((o.alpha_star - 0.9).abs() < 1e-6);
        assert_relative_eq!(o.value, (-0.405f64).exp(), max_relative = 1e-10);
        assert_relative_eq!(o.value, 0.666_977, max_relative = 1e-6);

        let d = optimize_rho(&RICKER, &NoiseSpec::Dirac0, 0.1).unwrap();
        assert!(!d.attained);

        let tiny = optimize_rho(&RICKER, &GAUSS, 1e-9).unwrap();
        assert_relative_eq!(tiny.value, (-0.5f64).exp(), max_relative = 1e-7);

        assert!(matches!(optimize_rho(&RICKER, &GAUSS, 1.0), Err(Error::Hypothesis(_))));
        assert!(matches!(optimize_rho(&RICKER, &GAUSS, 2.0), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn band_kappa_ricker() {
        let b = medium_band_kappa(&RICKER, &GAUSS, 0.5, 2.0).unwrap();
        assert_relative_eq!(b.k_min, 0.0, epsilon = 1e-15);
        assert_relative_eq!(b.k_max, 1.0 - 2f64.ln(), max_relative = 1e-12);
        assert_relative_eq!(b.k_max, 0.306_853, max_relative = 1e-5);
        let expected = std_normal_cdf(2f64.ln() + 1.0 - 2f64.ln()) - std_normal_cdf(-(2f64.ln()));
        assert_relative_eq!(b.kappa, expected, max_relative = 1e-12);
        assert!(b.hypothesis_ok);
    }

    #[test]
    fn band_kappa_bounded_and_dirac() {
        let u = medium_band_kappa(&RICKER, &NoiseSpec::UniformCentered { half_width: 10.0 }, 0.5, 2.0).unwrap();
        assert!(!u.hypothesis_ok);
        let d = medium_band_kappa(&RICKER, &NoiseSpec::Dirac0, 0.5, 2.0).unwrap();
        assert_eq!(d.kappa, 1.0);
        let narrow = medium_band_kappa(&RICKER, &NoiseSpec::Dirac0, 1.5, 2.0).unwrap();
        // x e^(1-x) decreases on [1.5, 2], so the interval starts at ln 1.5 + 0.5 - ln 1.5 = 0.5
        assert_eq!(narrow.kappa, 0.0);
    }

    #[test]
    fn mean_bound_examples() {
        let b = mean_bounds(&RICKER, 5f64.exp(), None, Some(1f64.exp()), None);
        assert_relative_eq!(b.mean_tm_upper.unwrap(), 10.0, max_relative = 1e-14);
        let b = mean_bounds(&RICKER, 1e-6, Some(0.1), None, Some(0.2));
        assert_relative_eq!(b.mean_teps_lower.unwrap(), 11.512_925, max_relative = 1e-7);
        assert_relative_eq!(b.mean_teps_upper.unwrap(), 24.412_145, max_relative = 1e-6);
        let declining = mean_bounds(&GrowthModel::Ricker { r: -0.5, a: 1.0 }, 1e-6, Some(0.1), None, None);
        assert!(declining.mean_teps_lower.is_none() && !declining.notes.is_empty());
    }

    #[test]
    fn regime_examples() {
        let t = classify_regime(&GrowthModel::Ricker { r: -0.5, a: 1.0 }, &GAUSS);
        assert_eq!(t.regime, Regime::Transient);
        assert_eq!(classify_regime(&RICKER, &GAUSS).regime, Regime::PositiveRecurrent);
        let p = NoiseSpec::SymmetricPareto {
            tail_index: 2.5,
            scale: 1.0,
        };
        assert_eq!(classify_regime(&RICKER, &p).regime, Regime::NullRecurrent);
        let neutral = classify_regime(&GrowthModel::Ricker { r: 0.0, a: 1.0 }, &GAUSS);
        assert_eq!(neutral.regime, Regime::NullRecurrent);
        assert!(neutral.caveats.is_empty());
        let heavy = NoiseSpec::SymmetricPareto {
            tail_index: 1.8,
            scale: 1.0,
        };
        assert!(!classify_regime(&GrowthModel::Ricker { r: 0.0, a: 1.0 }, &heavy)
            .caveats
            .is_empty());
    }

    #[test]
    fn alpha0_examples() {
        let t = predicted_extremes_tail(&NoiseSpec::ShiftedExponential { rate: 2.0 });
        assert_eq!((t.alpha0, t.survival_exponent, t.mass_exponent), (2.0, 2.0, 3.0));
        assert_eq!(alpha0_of(&GAUSS), f64::INFINITY);
        assert_eq!(alpha0_of(&NoiseSpec::CenteredLogNormal { mu: 0.0, sigma: 1.0 }), 0.0);
    }

    fn species(r1: f64, r2: f64, a: [f64; 4]) -> TwoSpeciesModel {
        TwoSpeciesModel {
            r1,
            r2,
            a11: a[0],
            a12: a[1],
            a21: a[2],
            a22: a[3],
            noise1: GAUSS,
            noise2: GAUSS,
        }
    }

    #[test]
    fn two_species_examples() {
        let c = classify_two_species(&species(2.0, 1.0, [1.0; 4])).unwrap();
        assert_eq!((c.case_label, c.margins), (CaseLabel::Case1, (1.0, 1.0)));
        assert_eq!((c.barrier, c.eps_max), (Some(Barrier::Lower), Some(1.0)));

        let c = classify_two_species(&species(1.0, 2.0, [1.0; 4])).unwrap();
        assert_eq!((c.case_label, c.margins), (CaseLabel::Case3, (-1.0, -1.0)));
        assert_eq!((c.barrier, c.eps_max), (Some(Barrier::Upper), Some(1.0)));

        let c = classify_two_species(&species(1.0, 2.0, [3.0, 1.0, 1.0, 3.0])).unwrap();
        assert_eq!(
            (c.case_label, c.margins),
            (CaseLabel::ConjecturedRecurrent, (-5.0, 1.0))
        );
        assert!(!c.is_transient() && c.eps_max.is_none());

        let c = classify_two_species(&species(2.0, 1.0, [1.0, 3.0, 1.0, 1.0])).unwrap();
        assert_eq!((c.case_label, c.barrier), (CaseLabel::Case2, Some(Barrier::Lower)));

        assert_eq!(
            classify_two_species(&species(1.0, 1.0, [1.0, 1.0, 2.0, 2.0]))
                .unwrap()
                .case_label,
            CaseLabel::Degenerate
        );
        assert!(classify_two_species(&species(0.0, 1.0, [1.0; 4])).is_err());
    }

    proptest! {
        #[test]
        fn two_species_case_invariant_under_rescaling(
            r1 in 0.1f64..3.0, r2 in 0.1f64..3.0,
            a in prop::array::uniform4(0.1f64..3.0),
            c in 0.1f64..10.0,
        ) {
            let base = classify_two_species(&species(r1, r2, a)).unwrap();
            let scaled = classify_two_species(&species(c * r1, c * r2, a.map(|v| c * v))).unwrap();
            prop_assert_eq!(base.case_label, scaled.case_label);
            prop_assert_eq!(base.barrier, scaled.barrier);
        }

        #[test]
        fn mean_bounds_ordered(r in 0.2f64..3.0, eps in 0.001f64..0.1, log_x0 in -20.0f64..-8.0) {
            let model = GrowthModel::Ricker { r, a: 1.0 };
            let x0 = log_x0.exp();
            let b = mean_bounds(&model, x0, Some(eps), None, None);
            prop_assert!(b.mean_teps_lower.unwrap() <= b.mean_teps_upper.unwrap());
        }
    }
}
