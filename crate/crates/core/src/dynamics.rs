//! The noisy Ricker chain `X' = X f(X) exp(Y)` and its two-species extension,
//! both advanced in log space.
//!
//! State is `L = ln X`. One step is `L' = L + ln f(e^L) + y`, which cannot
//! overflow: for huge `L` the density-dependence term drives `L'` towards
//! `-inf`, which the hitting code reports as numerical extinction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::NoiseSpec;
use crate::optimize::minimize_on_interval;
use crate::rng::stream_rng;

/// Log-density below which a trajectory is tagged numerically extinct.
pub const DEFAULT_LOG_FLOOR: f64 = -1.0e6;

/// Grid size for extrema of `ln(x f(x))` when no closed form is used.
const EXTREMA_GRID: usize = 10_000;

/// Natural log of a population density.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LogState(pub f64);

impl LogState {
    pub fn from_density(x: f64) -> Self {
        LogState(x.ln())
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn density(self) -> f64 {
        self.0.exp()
    }

    pub fn is_extinct(self, log_floor: f64) -> bool {
        self.0 < log_floor
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthRegime {
    /// `lambda < 1`
    Declining,
    /// `lambda = 1`
    Neutral,
    /// `lambda > 1`
    Growing,
}

/// Density dependence `f`, handled through `ln f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GrowthModel {
    /// `ln f(x) = r - a x`
    Ricker { r: f64, a: f64 },
    /// `ln f(x) = r - a x + c / (1 + x)`: same large-density tail as Ricker.
    PerturbedRicker { r: f64, a: f64, c: f64 },
}

impl GrowthModel {
    pub fn validation_errors(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let (r, a, c) = self.params();
        if !r.is_finite() {
            errs.push(format!("model r must be finite, got {r}"));
        }
        if !(a.is_finite() && a > 0.0) {
            errs.push(format!("model a must be a finite positive number, got {a}"));
        }
        if !c.is_finite() {
            errs.push(format!("model c must be finite, got {c}"));
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

    fn params(&self) -> (f64, f64, f64) {
        match *self {
            GrowthModel::Ricker { r, a } => (r, a, 0.0),
            GrowthModel::PerturbedRicker { r, a, c } => (r, a, c),
        }
    }

    pub fn r(&self) -> f64 {
        self.params().0
    }

    pub fn a(&self) -> f64 {
        self.params().1
    }

    pub fn label(&self) -> String {
        match *self {
            GrowthModel::Ricker { r, a } => format!("Ricker(r={r}, a={a})"),
            GrowthModel::PerturbedRicker { r, a, c } => format!("PerturbedRicker(r={r}, a={a}, c={c})"),
        }
    }

    /// `ln f(x)` for `x >= 0`.
    #[inline]
    pub fn log_growth(&self, x: f64) -> f64 {
        match *self {
            GrowthModel::Ricker { r, a } => r - a * x,
            GrowthModel::PerturbedRicker { r, a, c } => r - a * x + c / (1.0 + x),
        }
    }

    /// `ln lambda = ln f(0)`.
    pub fn ln_lambda(&self) -> f64 {
        self.log_growth(0.0)
    }

    pub fn lambda(&self) -> f64 {
        self.ln_lambda().exp()
    }

    pub fn regime(&self) -> GrowthRegime {
        let l = self.ln_lambda();
        if l < 0.0 {
            GrowthRegime::Declining
        } else if l > 0.0 {
            GrowthRegime::Growing
        } else {
            GrowthRegime::Neutral
        }
    }

    /// `L' = L + ln f(e^L) + y`.
    #[inline]
    pub fn step_log(&self, state: LogState, y: f64) -> LogState {
        let l = state.0;
        LogState(l + self.log_growth(l.exp()) + y)
    }

    /// `sup_{x in [lo, hi]} ln f(x)`; `hi` may be `+inf`.
    pub fn sup_log_growth(&self, lo: f64, hi: f64) -> f64 {
        match *self {
            GrowthModel::Ricker { .. } => self.log_growth(lo),
            GrowthModel::PerturbedRicker { a, c, .. } => {
                if c >= 0.0 {
                    self.log_growth(lo)
                } else {
                    // unimodal: derivative -a - c/(1+x)^2 vanishes at sqrt(-c/a) - 1
                    let peak = ((-c / a).sqrt() - 1.0).clamp(lo, hi);
                    self.log_growth(peak)
                }
            }
        }
    }

    /// `inf_{x in [lo, hi]} ln f(x)` for finite `hi`.
    pub fn inf_log_growth(&self, lo: f64, hi: f64) -> f64 {
        match *self {
            GrowthModel::Ricker { .. } => self.log_growth(hi),
            // decreasing (c >= 0) or increasing-then-decreasing (c < 0): minimum at an end
            GrowthModel::PerturbedRicker { .. } => self.log_growth(lo).min(self.log_growth(hi)),
        }
    }

    /// `(min, max)` of `ln(x f(x))` over `[lo, hi]`, `0 < lo <= hi`.
    pub fn log_xf_extrema(&self, lo: f64, hi: f64) -> (f64, f64) {
        let g = |x: f64| x.ln() + self.log_growth(x);
        match *self {
            GrowthModel::Ricker { a, .. } => {
                // concave: max at the vertex 1/a, min at an endpoint
                let peak = (1.0 / a).clamp(lo, hi);
                (g(lo).min(g(hi)), g(peak))
            }
            GrowthModel::PerturbedRicker { .. } => {
                let (_, min) = minimize_on_interval(g, lo, hi, EXTREMA_GRID);
                let (_, neg_max) = minimize_on_interval(|x| -g(x), lo, hi, EXTREMA_GRID);
                (min, -neg_max)
            }
        }
    }
}

/// Iterate the chain from `start` for `n_steps` steps on stream `(seed, stream)`.
///
/// Returns `n_steps + 1` states, the first being `start`.
pub fn simulate_trajectory(
    model: &GrowthModel,
    noise: &NoiseSpec,
    start: LogState,
    n_steps: u64,
    seed: u64,
    stream: u64,
) -> Vec<LogState> {
    let mut rng = stream_rng(seed, stream);
    let mut path = Vec::with_capacity(n_steps as usize + 1);
    let mut state = start;
    path.push(state);
    for _ in 0..n_steps {
        state = model.step_log(state, noise.sample(&mut rng));
        path.push(state);
    }
    path
}

/// Two competing species, each with its own Ricker growth and noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoSpeciesModel {
    pub r1: f64,
    pub r2: f64,
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
    pub noise1: NoiseSpec,
    pub noise2: NoiseSpec,
}

impl TwoSpeciesModel {
    pub fn validation_errors(&self) -> Vec<String> {
        let mut errs = Vec::new();
        for (name, v) in [("r1", self.r1), ("r2", self.r2)] {
            if !v.is_finite() {
                errs.push(format!("{name} must be finite, got {v}"));
            }
        }
        for (name, v) in [
            ("a11", self.a11),
            ("a12", self.a12),
            ("a21", self.a21),
            ("a22", self.a22),
        ] {
            if !(v.is_finite() && v > 0.0) {
                errs.push(format!("interaction coefficient {name} must be positive, got {v}"));
            }
        }
        errs.extend(
            self.noise1
                .validation_errors()
                .into_iter()
                .map(|e| format!("noise1: {e}")),
        );
        errs.extend(
            self.noise2
                .validation_errors()
                .into_iter()
                .map(|e| format!("noise2: {e}")),
        );
        errs
    }

    /// One joint step in log space.
    #[inline]
    pub fn step2_log(&self, l1: LogState, l2: LogState, y1: f64, y2: f64) -> (LogState, LogState) {
        let (x1, x2) = (l1.0.exp(), l2.0.exp());
        let n1 = l1.0 - self.a11 * x1 - self.a12 * x2 + self.r1 + y1;
        let n2 = l2.0 - self.a21 * x1 - self.a22 * x2 + self.r2 + y2;
        (LogState(n1), LogState(n2))
    }
}

/// Joint trajectory of both species; `y1` is drawn before `y2` at every step.
pub fn simulate_two_species(
    model: &TwoSpeciesModel,
    start: (LogState, LogState),
    n_steps: u64,
    seed: u64,
    stream: u64,
) -> Vec<(LogState, LogState)> {
    let mut rng = stream_rng(seed, stream);
    let mut path = Vec::with_capacity(n_steps as usize + 1);
    let mut state = start;
    path.push(state);
    for _ in 0..n_steps {
        let y1 = model.noise1.sample(&mut rng);
        let y2 = model.noise2.sample(&mut rng);
        state = model.step2_log(state.0, state.1, y1, y2);
        path.push(state);
    }
    path
}
