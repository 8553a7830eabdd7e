//! Hitting and exit times of the one-species chain, and the two-species
//! escape time `tau^M`, all censored at a finite horizon.
//!
//! Every time is the first `n >= 1` at which the state leaves the region; the
//! starting point must lie strictly inside it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{GrowthModel, LogState, TwoSpeciesModel, DEFAULT_LOG_FLOOR};
use crate::error::{Error, Result};
use crate::noise::NoiseSpec;
use crate::rng::stream_rng;

/// A region of the state space, given by density thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Region {
    /// `]0, eps[`
    Rarity { eps: f64 },
    /// `]M, inf[`
    Commonness {
        #[serde(rename = "M", alias = "m")]
        m: f64,
    },
    /// `[eps, M]`
    MediumBand {
        eps: f64,
        #[serde(rename = "M", alias = "m")]
        m: f64,
    },
    /// `]0, eps[ u ]M, inf[`
    Extremes {
        eps: f64,
        #[serde(rename = "M", alias = "m")]
        m: f64,
    },
}

impl Region {
    pub fn validation_errors(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let positive = |name: &str, v: f64, errs: &mut Vec<String>| {
            if !(v.is_finite() && v > 0.0) {
                errs.push(format!("region {name} must be a finite positive density, got {v}"));
            }
        };
        match *self {
            Region::Rarity { eps } => positive("eps", eps, &mut errs),
            Region::Commonness { m } => positive("M", m, &mut errs),
            Region::MediumBand { eps, m } | Region::Extremes { eps, m } => {
                positive("eps", eps, &mut errs);
                positive("M", m, &mut errs);
                if eps >= m {
                    errs.push(format!("region needs eps < M, got eps={eps}, M={m}"));
                }
            }
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

    pub fn eps(&self) -> Option<f64> {
        match *self {
            Region::Rarity { eps } | Region::MediumBand { eps, .. } | Region::Extremes { eps, .. } => Some(eps),
            Region::Commonness { .. } => None,
        }
    }

    pub fn m(&self) -> Option<f64> {
        match *self {
            Region::Commonness { m } | Region::MediumBand { m, .. } | Region::Extremes { m, .. } => Some(m),
            Region::Rarity { .. } => None,
        }
    }

    /// Name of the associated time, e.g. `T_eps`.
    pub fn time_name(&self) -> &'static str {
        match self {
            Region::Rarity { .. } => "T_eps",
            Region::Commonness { .. } => "T_M",
            Region::MediumBand { .. } => "T_[eps,M]",
            Region::Extremes { .. } => "T_[eps,M]^c",
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Region::Rarity { eps } => format!("Rarity(eps={eps})"),
            Region::Commonness { m } => format!("Commonness(M={m})"),
            Region::MediumBand { eps, m } => format!("MediumBand(eps={eps}, M={m})"),
            Region::Extremes { eps, m } => format!("Extremes(eps={eps}, M={m})"),
        }
    }

    pub fn log_thresholds(&self) -> LogRegion {
        let ln = |v: Option<f64>, default: f64| v.map_or(default, f64::ln);
        LogRegion {
            kind: *self,
            ln_eps: ln(self.eps(), f64::NAN),
            ln_m: ln(self.m(), f64::NAN),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.log_thresholds().contains(x.ln())
    }
}

/// A region with its thresholds already in log space.
#[derive(Debug, Clone, Copy)]
pub struct LogRegion {
    kind: Region,
    ln_eps: f64,
    ln_m: f64,
}

impl LogRegion {
    /// Membership on log density. Exit from rarity is `X >= eps`, exit from
    /// commonness is `X <= M`.
    #[inline]
    pub fn contains(&self, l: f64) -> bool {
        match self.kind {
            Region::Rarity { .. } => l < self.ln_eps,
            Region::Commonness { .. } => l > self.ln_m,
            Region::MediumBand { .. } => l >= self.ln_eps && l <= self.ln_m,
            Region::Extremes { .. } => l < self.ln_eps || l > self.ln_m,
        }
    }
}

/// One hitting-time sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum HittingOutcome {
    /// Left the region at step `n >= 1`.
    Hit { n: u64 },
    /// Still inside after `horizon` steps.
    Censored { horizon: u64 },
    /// Log density fell below the floor at step `n` without leaving the region.
    Extinct { n: u64 },
}

impl HittingOutcome {
    /// Observed time: the hit step, the horizon, or the extinction step.
    pub fn time(&self) -> u64 {
        match *self {
            HittingOutcome::Hit { n } | HittingOutcome::Extinct { n } => n,
            HittingOutcome::Censored { horizon } => horizon,
        }
    }

    pub fn hit_time(&self) -> Option<u64> {
        match *self {
            HittingOutcome::Hit { n } => Some(n),
            _ => None,
        }
    }

    pub fn is_hit(&self) -> bool {
        matches!(self, HittingOutcome::Hit { .. })
    }

    pub fn is_censored(&self) -> bool {
        matches!(self, HittingOutcome::Censored { .. })
    }

    pub fn is_extinct(&self) -> bool {
        matches!(self, HittingOutcome::Extinct { .. })
    }

    /// CSV label: `hit`, `censored` or `extinct`.
    pub fn kind(&self) -> &'static str {
        match self {
            HittingOutcome::Hit { .. } => "hit",
            HittingOutcome::Censored { .. } => "censored",
            HittingOutcome::Extinct { .. } => "extinct",
        }
    }

    pub fn from_parts(kind: &str, n: u64) -> Result<Self> {
        match kind {
            "hit" if n >= 1 => Ok(HittingOutcome::Hit { n }),
            "hit" => Err(Error::InvalidParameter("hit outcome needs n >= 1".into())),
            "censored" => Ok(HittingOutcome::Censored { horizon: n }),
            "extinct" => Ok(HittingOutcome::Extinct { n }),
            other => Err(Error::InvalidParameter(format!(
                "unknown outcome '{other}' (expected hit, censored or extinct)"
            ))),
        }
    }
}

/// An outcome together with the last simulated log density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HittingRecord {
    pub outcome: HittingOutcome,
    pub final_log: f64,
}

/// A fully specified one-species hitting-time experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HittingProblem {
    pub model: GrowthModel,
    pub noise: NoiseSpec,
    pub x0: f64,
    pub region: Region,
    pub horizon: u64,
    pub log_floor: f64,
}

impl HittingProblem {
    pub fn new(model: GrowthModel, noise: NoiseSpec, x0: f64, region: Region, horizon: u64) -> Self {
        HittingProblem {
            model,
            noise,
            x0,
            region,
            horizon,
            log_floor: DEFAULT_LOG_FLOOR,
        }
    }

    pub fn validation_errors(&self) -> Vec<String> {
        let mut errs = self.model.validation_errors();
        errs.extend(self.noise.validation_errors());
        let region_errs = self.region.validation_errors();
        let region_ok = region_errs.is_empty();
        errs.extend(region_errs);
        if !(self.x0.is_finite() && self.x0 > 0.0) {
            errs.push(format!("X0 must be a finite positive density, got {}", self.x0));
        } else if region_ok && !self.region.contains(self.x0) {
            errs.push(format!(
                "X0 must be inside the region: X0={} is not in {}",
                self.x0,
                self.region.label()
            ));
        }
        if self.horizon < 1 {
            errs.push("horizon must be at least 1".into());
        }
        if self.log_floor.is_nan() {
            errs.push("log_floor must be a number".into());
        }
        errs
    }

    pub fn validate(&self) -> Result<()> {
        let errs = self.validation_errors();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Precondition(errs.join("; ")))
        }
    }

    /// Sample one trajectory on stream `(seed, stream)`. Assumes `validate` passed.
    pub fn sample(&self, seed: u64, stream: u64) -> HittingRecord {
        let mut rng = stream_rng(seed, stream);
        let region = self.region.log_thresholds();
        let mut state = LogState::from_density(self.x0);
        for n in 1..=self.horizon {
            state = self.model.step_log(state, self.noise.sample(&mut rng));
            if !region.contains(state.0) {
                return HittingRecord {
                    outcome: HittingOutcome::Hit { n },
                    final_log: state.0,
                };
            }
            if state.is_extinct(self.log_floor) {
                return HittingRecord {
                    outcome: HittingOutcome::Extinct { n },
                    final_log: state.0,
                };
            }
        }
        HittingRecord {
            outcome: HittingOutcome::Censored { horizon: self.horizon },
            final_log: state.0,
        }
    }

    /// `n_traj` samples on streams `0..n_traj`, in stream order.
    pub fn batch(&self, n_traj: u64, master_seed: u64, workers: usize) -> Result<Vec<HittingRecord>> {
        self.validate()?;
        run_indexed(n_traj, workers, |i| self.sample(master_seed, i))
    }
}

/// Sample a single hitting time, rejecting a starting point outside the region.
pub fn sample_hitting_time(
    model: &GrowthModel,
    noise: &NoiseSpec,
    x0: f64,
    region: Region,
    horizon: u64,
    seed: u64,
    stream: u64,
) -> Result<HittingOutcome> {
    let problem = HittingProblem::new(*model, *noise, x0, region, horizon);
    problem.validate()?;
    Ok(problem.sample(seed, stream).outcome)
}

/// Map `f` over `0..n` with `workers` threads; results keep index order.
pub(crate) fn run_indexed<T: Send>(n: u64, workers: usize, f: impl Fn(u64) -> T + Sync + Send) -> Result<Vec<T>> {
    if workers <= 1 {
        return Ok((0..n).map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(|| (0..n).into_par_iter().map(f).collect()))
}

/// Direction of the `tau^M` barrier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Barrier {
    /// `phi = r2 ln X1 - (r1 - eps) ln X2`, start above `M`, stop below it.
    /// Escape of species 1 with species 2 dying out.
    Lower,
    /// `phi = r2 ln X1 - (r1 + eps) ln X2`, start below `M`, stop above it.
    /// Escape of species 2 with species 1 dying out.
    Upper,
}

impl Barrier {
    /// Which species' own hitting times the theorem describes (1 or 2).
    pub fn tracked_species(self) -> usize {
        match self {
            Barrier::Lower => 1,
            Barrier::Upper => 2,
        }
    }
}

/// The two-species escape time `tau^M`, optionally paired with a hitting
/// time of the tracked species along the same trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauProblem {
    pub model: TwoSpeciesModel,
    pub x0: (f64, f64),
    pub eps_margin: f64,
    pub threshold_m: f64,
    pub barrier: Barrier,
    pub horizon: u64,
    pub log_floor: f64,
    /// Region for the tracked species' own hitting time.
    pub species_region: Option<Region>,
}

/// Joint outcome of one two-species trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauRecord {
    pub tau: HittingOutcome,
    /// Hitting time of the tracked species, if a region was configured.
    pub species: Option<HittingOutcome>,
    pub final_log: (f64, f64),
}

impl TauProblem {
    pub fn new(
        model: TwoSpeciesModel,
        x0: (f64, f64),
        eps_margin: f64,
        threshold_m: f64,
        barrier: Barrier,
        horizon: u64,
    ) -> Self {
        TauProblem {
            model,
            x0,
            eps_margin,
            threshold_m,
            barrier,
            horizon,
            log_floor: DEFAULT_LOG_FLOOR,
            species_region: None,
        }
    }

    pub fn with_species_region(mut self, region: Region) -> Self {
        self.species_region = Some(region);
        self
    }

    /// The functional whose crossing of `M` defines `tau^M`.
    #[inline]
    pub fn functional(&self, l1: f64, l2: f64) -> f64 {
        let m = &self.model;
        match self.barrier {
            Barrier::Lower => m.r2 * l1 - (m.r1 - self.eps_margin) * l2,
            Barrier::Upper => m.r2 * l1 - (m.r1 + self.eps_margin) * l2,
        }
    }

    /// The margin that must be positive (lower barrier) or negative (upper barrier).
    pub fn margin(&self) -> f64 {
        let m = &self.model;
        match self.barrier {
            Barrier::Lower => (m.r1 - self.eps_margin) * m.a21 - m.r2 * m.a11,
            Barrier::Upper => (m.r1 + self.eps_margin) * m.a22 - m.r2 * m.a12,
        }
    }

    #[inline]
    fn crossed(&self, phi: f64) -> bool {
        match self.barrier {
            Barrier::Lower => phi < self.threshold_m,
            Barrier::Upper => phi > self.threshold_m,
        }
    }

    pub fn validation_errors(&self) -> Vec<String> {
        let m = &self.model;
        let mut errs = m.validation_errors();
        if !(m.r1 > 0.0 && m.r2 > 0.0) {
            errs.push(format!(
                "two-species escape needs r1, r2 > 0, got r1={}, r2={}",
                m.r1, m.r2
            ));
        }
        if !(self.eps_margin.is_finite() && self.eps_margin > 0.0) {
            errs.push(format!("tau^M margin eps must be positive, got {}", self.eps_margin));
        }
        if !(self.threshold_m.is_finite() && self.threshold_m > 0.0) {
            errs.push(format!("tau^M threshold M must be positive, got {}", self.threshold_m));
        }
        let margin = self.margin();
        match self.barrier {
            Barrier::Lower => {
                if !(margin > 0.0) {
                    errs.push(format!(
                        "escape margin (r1 - eps) a21 - r2 a11 must be > 0, got {margin}"
                    ));
                }
                if !(m.r2 < m.r1 || m.r1 * m.a22 - m.r2 * m.a12 > 0.0) {
                    errs.push("lower barrier needs r2 < r1 or r1 a22 - r2 a12 > 0".into());
                }
            }
            Barrier::Upper => {
                if !(margin < 0.0) {
                    errs.push(format!(
                        "escape margin (r1 + eps) a22 - r2 a12 must be < 0, got {margin}"
                    ));
                }
                if !(m.r2 >= m.r1 || m.r1 * m.a21 - m.r2 * m.a11 < 0.0) {
                    errs.push("upper barrier needs r2 >= r1 or r1 a21 - r2 a11 < 0".into());
                }
            }
        }
        let (x1, x2) = self.x0;
        if !(x1.is_finite() && x1 > 0.0 && x2.is_finite() && x2 > 0.0) {
            errs.push(format!("X0 must be a pair of positive densities, got ({x1}, {x2})"));
        } else {
            let phi = self.functional(x1.ln(), x2.ln());
            if self.crossed(phi) || phi == self.threshold_m {
                let side = match self.barrier {
                    Barrier::Lower => "above",
                    Barrier::Upper => "below",
                };
                errs.push(format!(
                    "tau^M functional must start strictly {side} M={}, got {phi}",
                    self.threshold_m
                ));
            }
            if let Some(region) = self.species_region {
                let region_errs = region.validation_errors();
                if region_errs.is_empty() {
                    let tracked = if self.barrier.tracked_species() == 1 { x1 } else { x2 };
                    if !region.contains(tracked) {
                        errs.push(format!(
                            "tracked species start {tracked} is not inside {}",
                            region.label()
                        ));
                    }
                }
                errs.extend(region_errs);
            }
        }
        if self.horizon < 1 {
            errs.push("horizon must be at least 1".into());
        }
        errs
    }

    pub fn validate(&self) -> Result<()> {
        let errs = self.validation_errors();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Precondition(errs.join("; ")))
        }
    }

    /// Simulate until both `tau^M` and the species time are resolved or the horizon.
    pub fn sample(&self, seed: u64, stream: u64) -> TauRecord {
        let mut rng = stream_rng(seed, stream);
        let species_region = self.species_region.map(|r| r.log_thresholds());
        let tracked_is_first = self.barrier.tracked_species() == 1;
        let mut l1 = LogState::from_density(self.x0.0);
        let mut l2 = LogState::from_density(self.x0.1);
        let mut tau = None;
        let mut species = if species_region.is_some() { None } else { Some(None) };
        for n in 1..=self.horizon {
            let y1 = self.model.noise1.sample(&mut rng);
            let y2 = self.model.noise2.sample(&mut rng);
            (l1, l2) = self.model.step2_log(l1, l2, y1, y2);
            if tau.is_none() {
                let phi = self.functional(l1.0, l2.0);
                if self.crossed(phi) {
                    tau = Some(HittingOutcome::Hit { n });
                } else if phi.is_nan() || (l1.is_extinct(self.log_floor) && l2.is_extinct(self.log_floor)) {
                    tau = Some(HittingOutcome::Extinct { n });
                }
            }
            if species.is_none() {
                let region = species_region.expect("species region present");
                let l = if tracked_is_first { l1 } else { l2 };
                if !region.contains(l.0) {
                    species = Some(Some(HittingOutcome::Hit { n }));
                } else if l.is_extinct(self.log_floor) {
                    species = Some(Some(HittingOutcome::Extinct { n }));
                }
            }
            if tau.is_some() && species.is_some() {
                break;
            }
        }
        let censored = HittingOutcome::Censored { horizon: self.horizon };
        TauRecord {
            tau: tau.unwrap_or(censored),
            species: species.unwrap_or(Some(censored)),
            final_log: (l1.0, l2.0),
        }
    }

    pub fn batch(&self, n_traj: u64, master_seed: u64, workers: usize) -> Result<Vec<TauRecord>> {
        self.validate()?;
        run_indexed(n_traj, workers, |i| self.sample(master_seed, i))
    }
}

/// Sample `tau^M` alone.
#[allow(clippy::too_many_arguments)]
pub fn sample_tau_m(
    model: &TwoSpeciesModel,
    x0: (f64, f64),
    eps_margin: f64,
    threshold_m: f64,
    barrier: Barrier,
    horizon: u64,
    seed: u64,
    stream: u64,
) -> Result<HittingOutcome> {
    let problem = TauProblem::new(*model, x0, eps_margin, threshold_m, barrier, horizon);
    problem.validate()?;
    Ok(problem.sample(seed, stream).tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::simulate_trajectory;
    use crate::estimators::wilson_interval;
    use proptest::prelude::*;

    const RICKER: GrowthModel = GrowthModel::Ricker { r: 1.0, a: 1.0 };

    /// First exit index found by replaying the path, written independently of the sampler.
    fn naive_scan(path: &[LogState], x_region: impl Fn(f64) -> bool) -> Option<u64> {
        path.iter()
            .enumerate()
            .skip(1)
            .find(|(_, s)| !x_region(s.density()))
            .map(|(i, _)| i as u64)
    }

    #[test]
    fn commonness_one_step() {
        let out = sample_hitting_time(
            &RICKER,
            &NoiseSpec::Dirac0,
            10.0,
            Region::Commonness { m: 5.0 },
            7,
            0,
            0,
        )
        .unwrap();
        assert_eq!(out, HittingOutcome::Hit { n: 1 });
    }

    #[test]
    fn rarity_deterministic_three_steps() {
        let out = sample_hitting_time(
            &RICKER,
            &NoiseSpec::Dirac0,
            0.01,
            Region::Rarity { eps: 0.1 },
            100,
            0,
            0,
        )
        .unwrap();
        assert_eq!(out, HittingOutcome::Hit { n: 3 });
    }

    #[test]
    fn declining_population_is_censored() {
        let m = GrowthModel::Ricker { r: -0.5, a: 1.0 };
        let out = sample_hitting_time(&m, &NoiseSpec::Dirac0, 0.01, Region::Rarity { eps: 0.1 }, 10_000, 0, 0).unwrap();
        assert_eq!(out, HittingOutcome::Censored { horizon: 10_000 });
    }

    #[test]
    fn extinction_below_floor() {
        let m = GrowthModel::Ricker { r: -0.5, a: 1.0 };
        let mut p = HittingProblem::new(m, NoiseSpec::Dirac0, 0.01, Region::Rarity { eps: 0.1 }, 1000);
        p.log_floor = -100.0;
        // ln 0.01 - 0.5 n < -100 first at n = 191; the density terms are negligible
        assert_eq!(p.sample(0, 0).outcome, HittingOutcome::Extinct { n: 191 });
    }

    #[test]
    fn start_outside_region_rejected() {
        for (x0, region) in [
            (0.5, Region::Rarity { eps: 0.1 }),
            (0.1, Region::Rarity { eps: 0.1 }),
            (3.0, Region::Commonness { m: 3.0 }),
            (5.0, Region::MediumBand { eps: 0.5, m: 2.0 }),
            (1.0, Region::Extremes { eps: 0.5, m: 2.0 }),
        ] {
            let err = sample_hitting_time(&RICKER, &NoiseSpec::Dirac0, x0, region, 10, 0, 0).unwrap_err();
            assert!(err.to_string().contains("X0 must be inside the region"), "{err}");
        }
    }

    #[test]
    fn band_edges_follow_closed_interval() {
        let band = Region::MediumBand { eps: 0.5, m: 2.0 };
        assert!(band.contains(0.5) && band.contains(2.0) && !band.contains(2.0001));
        let ext = Region::Extremes { eps: 0.5, m: 2.0 };
        assert!(!ext.contains(0.5) && !ext.contains(2.0) && ext.contains(0.4999));
    }

    #[test]
    fn singleton_batch_is_stream_zero() {
        let p = HittingProblem::new(
            RICKER,
            NoiseSpec::Gaussian { sigma: 1.0 },
            0.01,
            Region::Rarity { eps: 0.1 },
            1000,
        );
        let batch = p.batch(1, 42, 1).unwrap();
        assert_eq!(batch[0], p.sample(42, 0));
    }

    #[test]
    fn batches_are_deterministic_and_worker_independent() {
        let p = HittingProblem::new(
            RICKER,
            NoiseSpec::Gaussian { sigma: 1.0 },
            0.01,
            Region::Rarity { eps: 0.1 },
            1000,
        );
        let a = p.batch(500, 7, 1).unwrap();
        let b = p.batch(500, 7, 1).unwrap();
        let c = p.batch(500, 7, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_ne!(a, p.batch(500, 8, 1).unwrap());
    }

    #[test]
    fn huge_start_hits_commonness_in_one_step() {
        let p = HittingProblem::new(
            RICKER,
            NoiseSpec::Gaussian { sigma: 1.0 },
            6f64.exp(),
            Region::Commonness { m: 10.0 },
            1000,
        );
        let batch = p.batch(100_000, 1, 1).unwrap();
        let ones = batch
            .iter()
            .filter(|r| r.outcome == HittingOutcome::Hit { n: 1 })
            .count();
        assert!(ones as f64 / 1e5 >= 0.999);
    }

    #[test]
    fn hit_one_fraction_increases_with_start() {
        let noise = NoiseSpec::SymmetricPareto {
            tail_index: 1.5,
            scale: 1.0,
        };
        let n = 100_000u64;
        let mut prev: Option<(f64, (f64, f64))> = None;
        for x0 in [10.0, 1e2, 1e4, 1e6] {
            let p = HittingProblem::new(RICKER, noise, x0, Region::Commonness { m: 5.0 }, 100);
            let ones = p
                .batch(n, 3, 1)
                .unwrap()
                .iter()
                .filter(|r| r.outcome.hit_time() == Some(1))
                .count() as u64;
            let frac = ones as f64 / n as f64;
            let ci = wilson_interval(ones, n, 1.96);
            if let Some((pf, pci)) = prev {
                assert!(frac >= pf, "fraction fell from {pf} to {frac} at X0={x0}");
                if x0 == 1e2 {
                    assert!(ci.0 > pci.1, "trend not resolved: {pci:?} vs {ci:?}");
                }
            }
            prev = Some((frac, ci));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn sampler_matches_naive_scan(seed in 0u64..1000, stream in 0u64..1000, which in 0usize..4, sigma in 0.2f64..3.0) {
            let noise = NoiseSpec::Gaussian { sigma };
            let (x0, region) = [
                (0.01, Region::Rarity { eps: 0.1 }),
                (10.0, Region::Commonness { m: 3.0 }),
                (1.0, Region::MediumBand { eps: 0.5, m: 2.0 }),
                (20.0, Region::Extremes { eps: 0.1, m: 10.0 }),
            ][which];
            let horizon = 300;
            let p = HittingProblem::new(RICKER, noise, x0, region, horizon);
            let rec = p.sample(seed, stream);
            let path = simulate_trajectory(&RICKER, &noise, LogState::from_density(x0), horizon, seed, stream);
            let inside = |x: f64| match region {
                Region::Rarity { eps } => x < eps,
                Region::Commonness { m } => x > m,
                Region::MediumBand { eps, m } => eps <= x && x <= m,
                Region::Extremes { eps, m } => x < eps || x > m,
            };
            match naive_scan(&path, inside) {
                Some(n) => {
                    prop_assert_eq!(rec.outcome, HittingOutcome::Hit { n });
                    prop_assert_eq!(rec.final_log, path[n as usize].0);
                }
                None => prop_assert_eq!(rec.outcome, HittingOutcome::Censored { horizon }),
            }
        }
    }

    fn two_species(r1: f64, r2: f64, sigma: f64) -> TwoSpeciesModel {
        let noise = if sigma > 0.0 {
            NoiseSpec::Gaussian { sigma }
        } else {
            NoiseSpec::Dirac0
        };
        TwoSpeciesModel {
            r1,
            r2,
            a11: 1.0,
            a12: 1.0,
            a21: 1.0,
            a22: 1.0,
            noise1: noise,
            noise2: noise,
        }
    }

    #[test]
    fn lower_barrier_margin_and_one_step() {
        let m = two_species(2.0, 1.0, 0.0);
        let p = TauProblem::new(m, (1.0, 1.0), 0.5, 1.0, Barrier::Lower, 10);
        assert_eq!(p.margin(), 0.5);
        // X=(1,1) gives phi = 0; one step to L=(0,-1) gives phi = 1.5
        assert_eq!(p.functional(0.0, 0.0), 0.0);
        let (l1, l2) = m.step2_log(LogState(0.0), LogState(0.0), 0.0, 0.0);
        assert_eq!(p.functional(l1.0, l2.0), 1.5);
        // starting below the barrier is a precondition failure
        let err = p.validate().unwrap_err().to_string();
        assert!(err.contains("strictly above"), "{err}");
    }

    #[test]
    fn threshold_equal_to_start_rejected() {
        let m = two_species(2.0, 1.0, 0.0);
        let x0 = (1.0f64.exp(), 1.0);
        let p = TauProblem::new(m, x0, 0.5, 1.0, Barrier::Lower, 10);
        assert_eq!(p.functional(1.0, 0.0), 1.0);
        assert!(p.validate().is_err());
    }

    #[test]
    fn margin_violation_names_inequality() {
        let m = two_species(2.0, 1.0, 0.5);
        let p = TauProblem::new(m, (0.1, 0.01), 1.5, 1.0, Barrier::Lower, 10);
        let err = p.validate().unwrap_err().to_string();
        assert!(err.contains("(r1 - eps) a21 - r2 a11 must be > 0"), "{err}");
    }

    #[test]
    fn tau_matches_replayed_path() {
        let m = two_species(2.0, 1.0, 0.5);
        let p = TauProblem::new(m, (3.0, 0.5), 0.5, 1.0, Barrier::Lower, 200)
            .with_species_region(Region::Commonness { m: 1.0 });
        for stream in 0..200 {
            let rec = p.sample(11, stream);
            let path = crate::dynamics::simulate_two_species(
                &m,
                (LogState::from_density(3.0), LogState::from_density(0.5)),
                200,
                11,
                stream,
            );
            let tau = path
                .iter()
                .enumerate()
                .skip(1)
                .find(|(_, (a, b))| 1.0 * a.0 - 1.5 * b.0 < 1.0)
                .map(|(i, _)| i as u64);
            let t_l = path
                .iter()
                .enumerate()
                .skip(1)
                .find(|(_, (a, _))| a.density() <= 1.0)
                .map(|(i, _)| i as u64);
            assert_eq!(rec.tau.hit_time(), tau);
            assert_eq!(rec.species.unwrap().hit_time(), t_l);
        }
    }

    #[test]
    fn upper_barrier_tracks_second_species() {
        let m = two_species(1.0, 2.0, 0.5);
        let p = TauProblem::new(m, (0.01, 0.1), 0.5, 1.0, Barrier::Upper, 100)
            .with_species_region(Region::Rarity { eps: 0.5 });
        assert_eq!(p.margin(), -0.5);
        p.validate().unwrap();
        let recs = p.batch(200, 5, 2).unwrap();
        assert_eq!(recs, p.batch(200, 5, 1).unwrap());
    }
}
