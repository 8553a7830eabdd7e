//! Experiment runner: sampling, fits, theory verdicts and persisted artifacts.
//!
//! Every batch of a run uses the same master seed, so stream `i` of each batch
//! is driven by the same noise draws (common random numbers across an X0 sweep).

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::config::{EstimatorOptions, ExperimentConfig, Scenario, SingleScenario, TwoSpeciesScenario};
use crate::dynamics::GrowthRegime;
use crate::error::{Error, Result};
use crate::estimators::{
    default_rate_window, exponential_rate_lower_bound, fit_exponential_rate, fit_power_tail, is_saturating,
    linear_regression, mean_with_ci, survival_curve, truncated_means, wilson_interval, LinearFit, MeanEstimate,
    PowerTailReport, SurvivalCurve, TailFit, DIVERGENCE_RATIO, MIN_SURVIVORS,
};
use crate::hitting::{HittingOutcome, HittingRecord, Region, TauRecord};
use crate::noise::{AssumptionReport, TheoremId};
use crate::theory::{classify_regime, classify_two_species, RegimeReport, TheoryBounds, TwoSpeciesCase};

/// Lowest survival level used for the linearity check of `ln S`.
pub const LINEARITY_FLOOR: f64 = 1e-4;
pub const LINEARITY_R2: f64 = 0.99;
/// Accepted distance of the null-recurrent survival exponent from 1/2.
pub const NEUTRAL_EXPONENT_TOL: f64 = 0.1;
/// Accepted relative distance of the extremes tail exponent from `alpha0`.
pub const EXTREMES_EXPONENT_RTOL: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Pass,
    Fail,
    Inestimable,
    OutOfHypothesis,
}

impl VerdictStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            VerdictStatus::Pass => "PASS",
            VerdictStatus::Fail => "FAIL",
            VerdictStatus::Inestimable => "INESTIMABLE",
            VerdictStatus::OutOfHypothesis => "OUT-OF-HYPOTHESIS",
        }
    }
}

/// One theorem-versus-measurement comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub theorem: String,
    pub batch: String,
    pub prediction: String,
    /// `"inestimable"` when nothing could be measured.
    pub measured: String,
    pub status: VerdictStatus,
    /// Result of the check itself, kept when the hypotheses fail.
    pub check_passed: Option<bool>,
}

impl Verdict {
    fn new(
        theorem: &str,
        batch: &str,
        prediction: String,
        measured: Option<String>,
        passed: Option<bool>,
        in_hypothesis: bool,
    ) -> Self {
        let status = match (in_hypothesis, passed) {
            (false, _) => VerdictStatus::OutOfHypothesis,
            (true, None) => VerdictStatus::Inestimable,
            (true, Some(true)) => VerdictStatus::Pass,
            (true, Some(false)) => VerdictStatus::Fail,
        };
        Verdict {
            theorem: theorem.to_string(),
            batch: batch.to_string(),
            prediction,
            measured: measured.unwrap_or_else(|| "inestimable".to_string()),
            status,
            check_passed: passed,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} [{}]: predicted {}; measured {}; {}",
            self.theorem,
            self.batch,
            self.prediction,
            self.measured,
            self.status.as_str()
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub total: u64,
    pub hit: u64,
    pub censored: u64,
    pub extinct: u64,
    /// Wilson 95% interval of the censored-or-extinct fraction.
    pub not_hit_ci95: (f64, f64),
}

impl OutcomeCounts {
    pub fn from_outcomes<'a>(outcomes: impl IntoIterator<Item = &'a HittingOutcome>) -> Self {
        let (mut total, mut hit, mut censored, mut extinct) = (0, 0, 0, 0);
        for o in outcomes {
            total += 1;
            match o {
                HittingOutcome::Hit { .. } => hit += 1,
                HittingOutcome::Censored { .. } => censored += 1,
                HittingOutcome::Extinct { .. } => extinct += 1,
            }
        }
        OutcomeCounts {
            total,
            hit,
            censored,
            extinct,
            not_hit_ci95: wilson_interval(censored + extinct, total, 1.96),
        }
    }

    pub fn not_hit_fraction(&self) -> f64 {
        (self.censored + self.extinct) as f64 / self.total.max(1) as f64
    }
}

/// `S(n) <= prefactor * base^(n - offset)` checked at every `n >= 1` with at
/// least `MIN_SURVIVORS` survivors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub prefactor: f64,
    pub base: f64,
    pub offset: u64,
    pub n_checked: u64,
    pub violations: u64,
    /// Largest `ln S(n) - ln bound(n)` over the checked range.
    pub worst_log_excess: f64,
    pub respected: bool,
}

pub fn check_survival_bound(curve: &SurvivalCurve, prefactor: f64, base: f64, offset: u64) -> BoundCheck {
    let n_max = curve.last_n_with_count(MIN_SURVIVORS);
    let ln_bound = |n: u64| prefactor.ln() + (n as f64 - offset as f64) * base.ln();
    let mut violations = 0u64;
    let mut worst = f64::NEG_INFINITY;
    // S is constant on [t_i, t_{i+1} - 1] and the bound decreases, so each
    // segment is worst at its right end and violated on a suffix.
    for (i, &(t, s)) in curve.points.iter().enumerate() {
        let lo = t.max(1);
        let hi = curve
            .points
            .get(i + 1)
            .map_or(curve.horizon, |p| p.0.saturating_sub(1))
            .min(n_max);
        if lo > hi || s <= 0.0 {
            continue;
        }
        let ls = s.ln();
        worst = worst.max(ls - ln_bound(hi));
        if ls > ln_bound(hi) {
            let first_bad = if base < 1.0 {
                // smallest n with ln_bound(n) < ln s
                let x = offset as f64 + (ls - prefactor.ln()) / base.ln();
                let mut n = (x.floor() as i64 + 1).clamp(lo as i64, hi as i64) as u64;
                while n > lo && ls > ln_bound(n - 1) {
                    n -= 1;
                }
                while n < hi && ls <= ln_bound(n) {
                    n += 1;
                }
                n
            } else {
                lo
            };
            violations += hi - first_bad.min(hi) + 1;
        }
    }
    BoundCheck {
        prefactor,
        base,
        offset,
        n_checked: n_max,
        violations,
        worst_log_excess: worst,
        respected: violations == 0,
    }
}

/// Regression of `ln S(n)` on `n` over `n >= 1` while `S(n) >= max(floor, 10/N)`.
pub fn ln_survival_fit(curve: &SurvivalCurve, floor: f64) -> Option<LinearFit> {
    let level = floor.max(MIN_SURVIVORS / curve.n_total as f64);
    let n_hi = curve.points.iter().take_while(|p| p.1 >= level).last()?.0;
    let n_hi = curve
        .points
        .iter()
        .find(|p| p.0 > n_hi)
        .map_or(curve.horizon, |p| p.0 - 1)
        .min(curve.horizon);
    if n_hi < 3 {
        return None;
    }
    let xs: Vec<f64> = (1..=n_hi).map(|n| n as f64).collect();
    let ys: Vec<f64> = (1..=n_hi).map(|n| curve.at(n).ln()).collect();
    linear_regression(&xs, &ys).ok()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Saturation {
    pub nested_means: Vec<(u64, f64)>,
    pub saturating: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateLowerBound {
    pub n0: u64,
    pub rate: f64,
}

/// Every estimate computed from one sample file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchFits {
    pub batch: String,
    pub sample_file: String,
    /// Second sample file the batch was conditioned on, if any.
    pub condition_file: Option<String>,
    pub n_samples: u64,
    pub mean: Option<MeanEstimate>,
    pub power_tail: Option<PowerTailReport>,
    pub exp_rate: Option<TailFit>,
    pub rate_lower_bound: Option<RateLowerBound>,
    pub ln_survival_fit: Option<LinearFit>,
    pub survival_bound: Option<BoundCheck>,
    pub hit_at_one_fraction: f64,
    pub median_final_ln_x_censored: Option<f64>,
    pub saturation: Option<Saturation>,
    /// Why an estimate is missing.
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub batch: String,
    pub time_name: String,
    pub x0: Vec<f64>,
    pub sample_file: String,
    pub survival_file: String,
    pub final_state_file: Option<String>,
    pub counts: OutcomeCounts,
    pub steps: u64,
    pub fits: BatchFits,
    pub theory: Option<TheoryBounds>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub x0: f64,
    pub abs_ln_x0: f64,
    pub mean: f64,
    pub ci95: (f64, f64),
    pub hit_at_one_fraction: f64,
    pub theory_lower: Option<f64>,
    pub theory_upper: Option<f64>,
    pub sample_file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub rows: Vec<SweepRow>,
    /// Mean hitting time against `|ln X0|`.
    pub regression: Option<LinearFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionEntry {
    pub subject: String,
    pub report: AssumptionReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub started_unix_s: f64,
    pub finished_unix_s: f64,
    pub wall_clock_s: f64,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub scenario_id: String,
    pub config_hash: String,
    /// The configuration as hashed (worker count and output directory cleared).
    pub config: ExperimentConfig,
    pub regime: Option<RegimeReport>,
    pub two_species_case: Option<TwoSpeciesCase>,
    pub assumptions: Vec<AssumptionEntry>,
    pub batches: Vec<BatchSummary>,
    pub sweep: Option<SweepSummary>,
    pub verdicts: Vec<Verdict>,
    pub total_steps: u64,
    /// The only nondeterministic part of the summary.
    pub metadata: RunMetadata,
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

/// Removes everything written so far unless the run completes.
struct OutputGuard {
    dir: PathBuf,
    created_dir: bool,
    files: Vec<PathBuf>,
    done: bool,
}

impl OutputGuard {
    fn new(dir: &Path) -> Result<Self> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir)?;
        Ok(OutputGuard {
            dir: dir.to_path_buf(),
            created_dir,
            files: Vec::new(),
            done: false,
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.files.push(p.clone());
        p
    }
}

impl Drop for OutputGuard {
    fn drop(&mut self) {
        if self.done {
            return;
        }
        if self.created_dir {
            let _ = fs::remove_dir_all(&self.dir);
        } else {
            for f in &self.files {
                let _ = fs::remove_file(f);
            }
        }
    }
}

pub fn write_samples_csv(path: &Path, outcomes: &[HittingOutcome]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["trajectory_index", "outcome", "n"])?;
    for (i, o) in outcomes.iter().enumerate() {
        w.write_record([i.to_string(), o.kind().to_string(), o.time().to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Read a samples file back as outcomes in trajectory order.
pub fn read_samples_csv(path: &Path) -> Result<Vec<HittingOutcome>> {
    #[derive(Deserialize)]
    struct Row {
        trajectory_index: u64,
        outcome: String,
        n: u64,
    }
    let mut r = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for row in r.deserialize() {
        let row: Row = row?;
        rows.push((row.trajectory_index, HittingOutcome::from_parts(&row.outcome, row.n)?));
    }
    rows.sort_by_key(|r| r.0);
    Ok(rows.into_iter().map(|r| r.1).collect())
}

pub fn write_survival_csv(path: &Path, curve: &SurvivalCurve) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["n", "survival"])?;
    for &(n, s) in &curve.points {
        w.write_record([n.to_string(), format!("{s:?}")])?;
    }
    w.flush()?;
    Ok(())
}

/// `(n, S(n))` rows of a survival file.
pub fn read_survival_csv(path: &Path) -> Result<Vec<(u64, f64)>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in r.deserialize() {
        let (n, s): (u64, f64) = row?;
        out.push((n, s));
    }
    Ok(out)
}

fn write_final_state_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut head = vec!["trajectory_index"];
    head.extend_from_slice(header);
    w.write_record(&head)?;
    for (i, row) in rows.enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(row.iter().map(|v| format!("{v:?}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}

/// Fits shared by every batch kind.
fn basic_fits(
    opts: &EstimatorOptions,
    batch: &str,
    sample_file: &str,
    outcomes: &[HittingOutcome],
    curve: &SurvivalCurve,
) -> BatchFits {
    let mut notes = Vec::new();
    let mean = mean_with_ci(outcomes)
        .map_err(|e| notes.push(format!("mean: {e}")))
        .ok();
    let power_tail = fit_power_tail(outcomes, opts.hill_k)
        .map_err(|e| notes.push(format!("power tail: {e}")))
        .ok();
    let window = opts.rate_window.unwrap_or_else(|| default_rate_window(curve, 1));
    let exp_rate = fit_exponential_rate(curve, window)
        .map_err(|e| notes.push(format!("exponential rate: {e}")))
        .ok();
    let rate_lower_bound = exponential_rate_lower_bound(curve).map(|(n0, rate)| RateLowerBound { n0, rate });
    let hit1 = outcomes.iter().filter(|o| o.hit_time() == Some(1)).count();
    BatchFits {
        batch: batch.to_string(),
        sample_file: sample_file.to_string(),
        condition_file: None,
        n_samples: outcomes.len() as u64,
        mean,
        power_tail,
        exp_rate,
        rate_lower_bound,
        ln_survival_fit: ln_survival_fit(curve, LINEARITY_FLOOR),
        survival_bound: None,
        hit_at_one_fraction: hit1 as f64 / outcomes.len().max(1) as f64,
        median_final_ln_x_censored: None,
        saturation: None,
        notes,
    }
}

/// Re-estimate everything from a samples CSV.
///
/// The horizon is the censoring time found in the file unless given; a file
/// without censored rows falls back to its largest time.
pub fn fit_sample_file(path: &Path, horizon: Option<u64>, opts: &EstimatorOptions) -> Result<BatchFits> {
    let outcomes = read_samples_csv(path)?;
    let horizon = horizon
        .or_else(|| {
            outcomes.iter().find_map(|o| match o {
                HittingOutcome::Censored { horizon } => Some(*horizon),
                _ => None,
            })
        })
        .unwrap_or_else(|| outcomes.iter().map(|o| o.time()).max().unwrap_or(1));
    let curve = survival_curve(&outcomes, horizon)?;
    let name = path
        .file_name()
        .map_or_else(|| path.display().to_string(), |f| f.to_string_lossy().into_owned());
    let mut fits = basic_fits(opts, "file", &name, &outcomes, &curve);
    fits.saturation = saturation(&outcomes, horizon);
    Ok(fits)
}

fn saturation(outcomes: &[HittingOutcome], horizon: u64) -> Option<Saturation> {
    if outcomes.is_empty() {
        return None;
    }
    let levels: Vec<u64> = [horizon / 10, horizon].into_iter().filter(|&h| h > 0).collect();
    let nested_means = truncated_means(outcomes, &levels);
    let saturating = is_saturating(&nested_means, DIVERGENCE_RATIO - 1.0);
    Some(Saturation {
        nested_means,
        saturating,
    })
}

/// Run a validated configuration and write its artifacts into `out_dir`.
///
/// Writes sample, survival and final-state CSVs, `fits.json` and `summary.json`.
/// On failure everything written by this call is removed again.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary> {
    let errs = config.validation_errors();
    if !errs.is_empty() {
        return Err(Error::Config(errs));
    }
    let started = unix_now();
    let clock = Instant::now();
    let mut guard = OutputGuard::new(out_dir)?;
    let mut summary = match &config.scenario {
        Scenario::Single(s) => run_single(config, s, &mut guard)?,
        Scenario::TwoSpecies(t) => run_two_species(config, t, &mut guard)?,
    };
    summary.metadata = RunMetadata {
        started_unix_s: started,
        finished_unix_s: unix_now(),
        wall_clock_s: clock.elapsed().as_secs_f64(),
        workers: config.workers,
    };
    let fits: Vec<&BatchFits> = summary.batches.iter().map(|b| &b.fits).collect();
    fs::write(guard.path("fits.json"), serde_json::to_string_pretty(&fits)?)?;
    fs::write(guard.path("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    guard.done = true;
    Ok(summary)
}

fn canonical(config: &ExperimentConfig) -> ExperimentConfig {
    let mut c = config.clone();
    c.workers = 1;
    c.output_dir = None;
    c
}

fn empty_summary(config: &ExperimentConfig) -> RunSummary {
    RunSummary {
        scenario_id: config.scenario_id.clone(),
        config_hash: config.hash(),
        config: canonical(config),
        regime: None,
        two_species_case: None,
        assumptions: Vec::new(),
        batches: Vec::new(),
        sweep: None,
        verdicts: Vec::new(),
        total_steps: 0,
        metadata: RunMetadata {
            started_unix_s: 0.0,
            finished_unix_s: 0.0,
            wall_clock_s: 0.0,
            workers: config.workers,
        },
    }
}

/// Theorems whose statements cover a single-species region.
pub fn applicable_theorems(region: &Region, regime: GrowthRegime) -> Vec<TheoremId> {
    match (region, regime) {
        (Region::Commonness { .. }, _) => vec![TheoremId::T2_1a, TheoremId::T2_1b],
        (Region::MediumBand { .. }, _) => vec![TheoremId::T2_2],
        (Region::Rarity { .. }, GrowthRegime::Declining) => vec![TheoremId::T3_1],
        (Region::Rarity { .. }, GrowthRegime::Growing) => vec![TheoremId::T4_1, TheoremId::T4_1Exp],
        (Region::Rarity { .. }, GrowthRegime::Neutral) => vec![TheoremId::T5_1],
        (Region::Extremes { .. }, GrowthRegime::Growing) => vec![TheoremId::T4_2],
        (Region::Extremes { .. }, _) => Vec::new(),
    }
}

fn batch_names(n: usize, i: usize) -> (String, String, String, String) {
    if n == 1 {
        (
            "x0".to_string(),
            "samples.csv".to_string(),
            "survival.csv".to_string(),
            "final_state.csv".to_string(),
        )
    } else {
        (
            format!("x0_{i}"),
            format!("samples_x0_{i}.csv"),
            format!("survival_x0_{i}.csv"),
            format!("final_state_x0_{i}.csv"),
        )
    }
}

fn run_single(config: &ExperimentConfig, s: &SingleScenario, guard: &mut OutputGuard) -> Result<RunSummary> {
    let mut summary = empty_summary(config);
    let regime = classify_regime(&s.model, &s.noise);
    let theorems = applicable_theorems(&s.region, s.model.regime());
    let reports: Vec<AssumptionReport> = theorems.iter().map(|&t| s.noise.check_assumptions(t)).collect();
    summary.assumptions = reports
        .iter()
        .map(|r| AssumptionEntry {
            subject: "noise".to_string(),
            report: r.clone(),
        })
        .collect();
    let holds = |t: TheoremId| reports.iter().find(|r| r.theorem == t).is_some_and(|r| r.holds());

    let problems = config.hitting_problems();
    for (i, problem) in problems.iter().enumerate() {
        let (batch, sample_file, survival_file, final_file) = batch_names(problems.len(), i);
        let records: Vec<HittingRecord> = problem.batch(config.n_traj, config.master_seed, config.workers)?;
        let outcomes: Vec<HittingOutcome> = records.iter().map(|r| r.outcome).collect();
        write_samples_csv(&guard.path(&sample_file), &outcomes)?;
        write_final_state_csv(
            &guard.path(&final_file),
            &["final_ln_x"],
            records.iter().map(|r| vec![r.final_log]),
        )?;
        let curve = survival_curve(&outcomes, config.horizon)?;
        write_survival_csv(&guard.path(&survival_file), &curve)?;

        let theory = TheoryBounds::compute(
            &s.model,
            &s.noise,
            problem.x0,
            s.region.eps(),
            s.region.m(),
            config.estimators.eps0,
        );
        let mut fits = basic_fits(&config.estimators, &batch, &sample_file, &outcomes, &curve);
        fits.median_final_ln_x_censored = median(
            records
                .iter()
                .filter(|r| !r.outcome.is_hit())
                .map(|r| r.final_log)
                .collect(),
        );
        fits.survival_bound = match &s.region {
            Region::Commonness { .. } => theory
                .kappa_star
                .zip(theory.c_of_x0)
                .map(|(k, c)| check_survival_bound(&curve, c, k, 0)),
            Region::Rarity { .. } => theory
                .rho_star
                .zip(theory.c_of_x0)
                .map(|(r, c)| check_survival_bound(&curve, c, r, 0)),
            Region::MediumBand { .. } => theory
                .band
                .filter(|b| b.kappa < 1.0)
                .map(|b| check_survival_bound(&curve, 1.0, b.kappa, 2)),
            Region::Extremes { .. } => None,
        };
        let counts = OutcomeCounts::from_outcomes(&outcomes);
        let steps = outcomes.iter().map(|o| o.time()).sum();
        summary.total_steps += steps;

        for &t in &theorems {
            if let Some(v) = single_verdict(t, &batch, s, &counts, &fits, &theory, holds(t)) {
                summary.verdicts.push(v);
            }
        }
        summary.batches.push(BatchSummary {
            batch,
            time_name: s.region.time_name().to_string(),
            x0: vec![problem.x0],
            sample_file,
            survival_file,
            final_state_file: Some(final_file),
            counts,
            steps,
            fits,
            theory: Some(theory),
        });
    }

    if summary.batches.len() >= 2 {
        let sweep = sweep_summary(&summary.batches);
        summary.verdicts.extend(sweep_verdict(s, &sweep, &theorems, &holds));
        summary.sweep = Some(sweep);
    }
    summary.regime = Some(regime);
    Ok(summary)
}

fn sweep_summary(batches: &[BatchSummary]) -> SweepSummary {
    let rows: Vec<SweepRow> = batches
        .iter()
        .filter_map(|b| {
            let mean = b.fits.mean.as_ref()?;
            let theory = b.theory.as_ref()?;
            let x0 = b.x0[0];
            let (lo, hi) = match (theory.means.mean_teps_lower, theory.means.mean_teps_upper) {
                (None, None) => (None, theory.means.mean_tm_upper),
                (lo, hi) => (lo, hi),
            };
            Some(SweepRow {
                x0,
                abs_ln_x0: x0.ln().abs(),
                mean: mean.mean,
                ci95: mean.ci95,
                hit_at_one_fraction: b.fits.hit_at_one_fraction,
                theory_lower: lo,
                theory_upper: hi,
                sample_file: b.sample_file.clone(),
            })
        })
        .collect();
    let xs: Vec<f64> = rows.iter().map(|r| r.abs_ln_x0).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.mean).collect();
    let regression = if rows.len() >= 3 {
        linear_regression(&xs, &ys).ok()
    } else {
        None
    };
    SweepSummary { rows, regression }
}

fn fmt_ci(ci: (f64, f64)) -> String {
    format!("[{:.4}, {:.4}]", ci.0, ci.1)
}

fn bound_text(b: &BoundCheck) -> String {
    if b.respected {
        format!("bound respected at all {} checked n", b.n_checked)
    } else {
        format!(
            "bound violated at {} of {} checked n (worst ln excess {:.3})",
            b.violations, b.n_checked, b.worst_log_excess
        )
    }
}

#[allow(clippy::too_many_arguments)]
fn single_verdict(
    theorem: TheoremId,
    batch: &str,
    s: &SingleScenario,
    counts: &OutcomeCounts,
    fits: &BatchFits,
    theory: &TheoryBounds,
    hyp: bool,
) -> Option<Verdict> {
    let id = theorem.as_str();
    let v = match theorem {
        TheoremId::T2_1a => {
            let bound = theory.means.mean_tm_upper?;
            let measured = fits.mean.as_ref().map(|m| {
                format!(
                    "mean T_M {:.4} {}, P(T_M = 1) = {:.4}",
                    m.mean,
                    fmt_ci(m.ci95),
                    fits.hit_at_one_fraction
                )
            });
            let passed = fits.mean.as_ref().map(|m| m.mean <= bound);
            Verdict::new(
                id,
                batch,
                format!("E T_M <= {bound:.4}, E T_M -> 1 as X0 -> inf"),
                measured,
                passed,
                hyp,
            )
        }
        TheoremId::T2_1b => {
            let Some(kappa) = theory.kappa_star else {
                let why = theory.notes.join("; ");
                return Some(Verdict::new(
                    id,
                    batch,
                    format!("no finite kappa* ({why})"),
                    None,
                    None,
                    hyp,
                ));
            };
            let floor = -kappa.ln();
            // a survival curve that empties at n0 only shows rate >= ln(N/3)/n0,
            // which says nothing when that is below the theory floor
            let rate = match (&fits.exp_rate, &fits.rate_lower_bound) {
                (Some(f), _) => Some((
                    format!("fitted rate {:.4} +- {:.4}", f.value, f.stderr),
                    Some(f.value >= floor - 3.0 * f.stderr),
                )),
                (None, Some(lb)) => Some((
                    format!("S reaches 0 at n = {}, rate lower bound {:.4}", lb.n0, lb.rate),
                    (lb.rate >= floor).then_some(true),
                )),
                (None, None) => None,
            };
            let bound = fits.survival_bound.as_ref().filter(|b| b.n_checked > 0);
            let mut parts = Vec::new();
            parts.extend(rate.as_ref().map(|r| r.0.clone()));
            parts.extend(bound.map(bound_text));
            let measured = (!parts.is_empty()).then(|| parts.join("; "));
            let checks: Vec<bool> = rate
                .and_then(|r| r.1)
                .into_iter()
                .chain(bound.map(|b| b.respected))
                .collect();
            let passed = (!checks.is_empty()).then(|| checks.iter().all(|&c| c));
            let prediction = format!(
                "S(n) <= (X0/M)^{:.4} kappa*^n, rate >= -ln kappa* = {floor:.4}",
                theory.alpha_star.unwrap_or(f64::NAN)
            );
            Verdict::new(id, batch, prediction, measured, passed, hyp)
        }
        TheoremId::T2_2 => {
            let band = theory.band;
            let Some(band) = band.filter(|b| b.kappa < 1.0) else {
                return Some(Verdict::new(
                    id,
                    batch,
                    "kappa(eps, M) < 1".to_string(),
                    None,
                    None,
                    hyp && band.is_some_and(|b| b.hypothesis_ok),
                ));
            };
            let lin = fits.ln_survival_fit.as_ref();
            let bound = fits.survival_bound.as_ref();
            let measured = match (lin, bound) {
                (Some(l), Some(b)) => Some(format!(
                    "ln S slope {:.4}, R^2 {:.5}; {}",
                    l.slope,
                    l.r_squared,
                    bound_text(b)
                )),
                _ => None,
            };
            let passed = lin.zip(bound).map(|(l, b)| l.r_squared >= LINEARITY_R2 && b.respected);
            Verdict::new(
                id,
                batch,
                format!("S(n) <= kappa^(n-2) with kappa = {:.4}, ln S linear", band.kappa),
                measured,
                passed,
                hyp && band.hypothesis_ok,
            )
        }
        TheoremId::T3_1 => {
            let (lo, hi) = counts.not_hit_ci95;
            let median = fits
                .median_final_ln_x_censored
                .map_or(String::new(), |m| format!(", median final ln X {m:.2}"));
            Verdict::new(
                id,
                batch,
                "P(T_eps = inf) > 0, X_n -> 0".to_string(),
                Some(format!(
                    "censored fraction {:.4}, CI {}{median}",
                    counts.not_hit_fraction(),
                    fmt_ci((lo, hi))
                )),
                Some(lo > 0.0),
                hyp && s.model.ln_lambda() < 0.0,
            )
        }
        TheoremId::T4_1 => {
            let (lo, hi) = (theory.means.mean_teps_lower?, theory.means.mean_teps_upper?);
            let measured = fits
                .mean
                .as_ref()
                .map(|m| format!("mean T_eps {:.4} {}", m.mean, fmt_ci(m.ci95)));
            let passed = fits.mean.as_ref().map(|m| lo <= m.mean && m.mean <= hi);
            Verdict::new(
                id,
                batch,
                format!("E T_eps in [{lo:.4}, {hi:.4}]"),
                measured,
                passed,
                hyp,
            )
        }
        TheoremId::T4_1Exp => {
            let Some(rho) = theory.rho_star else {
                let why = theory.notes.join("; ");
                return Some(Verdict::new(
                    id,
                    batch,
                    format!("no finite rho* ({why})"),
                    None,
                    None,
                    hyp,
                ));
            };
            let bound = fits.survival_bound.as_ref();
            Verdict::new(
                id,
                batch,
                format!(
                    "S(n) <= (eps/X0)^{:.4} rho*^n, rho* = {rho:.4}",
                    theory.alpha_star_rho.unwrap_or(f64::NAN)
                ),
                bound.map(bound_text),
                bound.map(|b| b.respected),
                hyp,
            )
        }
        TheoremId::T5_1 => {
            let tail = fits.power_tail.as_ref();
            let flag = fits.mean.as_ref().map(|m| m.divergence_flag);
            let measured = tail.map(|t| {
                format!(
                    "survival exponent {:.4} +- {:.4}, divergence flag {}",
                    t.hill.value,
                    t.hill.stderr,
                    flag.unwrap_or(false)
                )
            });
            let passed = tail.map(|t| (t.hill.value - 0.5).abs() <= NEUTRAL_EXPONENT_TOL && flag == Some(true));
            Verdict::new(
                id,
                batch,
                "survival exponent 0.5, E T_eps = inf".to_string(),
                measured,
                passed,
                hyp,
            )
        }
        TheoremId::T4_2 => {
            let (eps, m) = (s.region.eps()?, s.region.m()?);
            let (r, a) = (s.model.r(), s.model.a());
            let side = a * m > r && r > eps && eps > 0.0;
            let in_hyp = hyp && side && s.model.ln_lambda() > 0.0;
            let alpha0 = theory.alpha0;
            let tail = fits.power_tail.as_ref();
            if alpha0.is_finite() {
                let measured = tail.map(|t| {
                    format!(
                        "Hill exponent {:.4} +- {:.4} (k = {})",
                        t.hill.value, t.hill.stderr, t.hill.n_used
                    )
                });
                let passed = tail.map(|t| (t.hill.value - alpha0).abs() <= EXTREMES_EXPONENT_RTOL * alpha0);
                Verdict::new(
                    id,
                    batch,
                    format!("survival exponent alpha0 = {alpha0:.4}"),
                    measured,
                    passed,
                    in_hyp,
                )
            } else {
                let measured = tail.map(|t| {
                    format!(
                        "exponential preferred: {} (slope drift power {:.3}, exponential {:.3})",
                        t.exponential_preferred,
                        t.power_slope_drift.unwrap_or(f64::NAN),
                        t.exp_rate_drift.unwrap_or(f64::NAN)
                    )
                });
                Verdict::new(
                    id,
                    batch,
                    "no power tail (alpha0 = inf)".to_string(),
                    measured,
                    tail.map(|t| t.exponential_preferred),
                    in_hyp,
                )
            }
        }
        TheoremId::T6_1 => return None,
    };
    Some(v)
}

fn sweep_verdict(
    s: &SingleScenario,
    sweep: &SweepSummary,
    theorems: &[TheoremId],
    holds: &dyn Fn(TheoremId) -> bool,
) -> Option<Verdict> {
    if theorems.contains(&TheoremId::T4_1) {
        let eps = s.region.eps()?;
        let d = s.model.sup_log_growth(0.0, eps);
        let (lo, hi) = (1.0 / d, 2.0 / s.model.ln_lambda());
        let reg = sweep.regression.as_ref();
        let measured = reg.map(|r| format!("slope {:.4} +- {:.4}, R^2 {:.5}", r.slope, r.slope_stderr, r.r_squared));
        let passed = reg.map(|r| {
            let tol = 3.0 * r.slope_stderr;
            r.r_squared >= LINEARITY_R2 && r.slope >= lo - tol && r.slope <= hi + tol
        });
        return Some(Verdict::new(
            "T4.1",
            "sweep",
            format!("E T_eps linear in |ln X0|, slope in [{lo:.4}, {hi:.4}]"),
            measured,
            passed,
            holds(TheoremId::T4_1),
        ));
    }
    if theorems.contains(&TheoremId::T2_1a) {
        let mut rows: Vec<&SweepRow> = sweep.rows.iter().collect();
        rows.sort_by(|a, b| a.x0.total_cmp(&b.x0));
        let fractions: Vec<String> = rows.iter().map(|r| format!("{:.4}", r.hit_at_one_fraction)).collect();
        let monotone = rows
            .windows(2)
            .all(|w| w[1].hit_at_one_fraction >= w[0].hit_at_one_fraction);
        return Some(Verdict::new(
            "T2.1a",
            "sweep",
            "P(T_M = 1) non-decreasing in X0".to_string(),
            Some(format!("P(T_M = 1) by increasing X0: {}", fractions.join(", "))),
            Some(monotone),
            holds(TheoremId::T2_1a),
        ));
    }
    None
}

fn run_two_species(config: &ExperimentConfig, t: &TwoSpeciesScenario, guard: &mut OutputGuard) -> Result<RunSummary> {
    let mut summary = empty_summary(config);
    let case = classify_two_species(&t.model)?;
    let reports = [
        ("noise1", t.model.noise1.check_assumptions(TheoremId::T6_1)),
        ("noise2", t.model.noise2.check_assumptions(TheoremId::T6_1)),
    ];
    let m = &t.model;
    let in_hyp =
        reports.iter().all(|(_, r)| r.holds()) && case.is_transient() && m.r1 > 0.0 && m.r2 > 0.0 && m.r1 != m.r2;
    summary.assumptions = reports
        .into_iter()
        .map(|(subject, report)| AssumptionEntry {
            subject: subject.to_string(),
            report,
        })
        .collect();
    summary.two_species_case = Some(case);

    let (main, tl) = config.tau_problems().expect("two-species scenario");
    let records: Vec<TauRecord> = main.batch(config.n_traj, config.master_seed, config.workers)?;
    let tau: Vec<HittingOutcome> = records.iter().map(|r| r.tau).collect();
    write_samples_csv(&guard.path("samples_tau.csv"), &tau)?;
    write_final_state_csv(
        &guard.path("final_state_tau.csv"),
        &["final_ln_x1", "final_ln_x2"],
        records.iter().map(|r| vec![r.final_log.0, r.final_log.1]),
    )?;
    let curve = survival_curve(&tau, config.horizon)?;
    write_survival_csv(&guard.path("survival_tau.csv"), &curve)?;
    let counts = OutcomeCounts::from_outcomes(&tau);
    let steps: u64 = records
        .iter()
        .map(|r| r.tau.time().max(r.species.map_or(0, |s| s.time())))
        .sum();
    summary.total_steps += steps;
    let fits = basic_fits(&config.estimators, "tau", "samples_tau.csv", &tau, &curve);
    let (lo, _) = counts.not_hit_ci95;
    summary.verdicts.push(Verdict::new(
        "T6.1",
        "tau",
        format!(
            "P(tau^M = inf) > 0 ({}, {} barrier)",
            format!("{:?}", case.case_label).to_lowercase(),
            format!("{:?}", t.barrier).to_lowercase()
        ),
        Some(format!(
            "censored fraction {:.4}, CI {}",
            counts.not_hit_fraction(),
            fmt_ci(counts.not_hit_ci95)
        )),
        Some(lo > 0.0),
        in_hyp,
    ));
    summary.batches.push(BatchSummary {
        batch: "tau".to_string(),
        time_name: "tau^M".to_string(),
        x0: vec![t.x0.0, t.x0.1],
        sample_file: "samples_tau.csv".to_string(),
        survival_file: "survival_tau.csv".to_string(),
        final_state_file: Some("final_state_tau.csv".to_string()),
        counts,
        steps,
        fits,
        theory: None,
    });

    let tracked = t.barrier.tracked_species();
    if let Some(region) = t.species_region {
        let species: Vec<HittingOutcome> = records.iter().filter_map(|r| r.species).collect();
        write_samples_csv(&guard.path("samples_species.csv"), &species)?;
        // conditional on the escape: trajectories whose tau^M was never reached
        let conditional: Vec<HittingOutcome> = records
            .iter()
            .filter(|r| !r.tau.is_hit())
            .filter_map(|r| r.species)
            .collect();
        let batch = "species".to_string();
        let curve = survival_curve(&species, config.horizon)?;
        write_survival_csv(&guard.path("survival_species.csv"), &curve)?;
        let mut fits = basic_fits(&config.estimators, &batch, "samples_species.csv", &species, &curve);
        fits.condition_file = Some("samples_tau.csv".to_string());
        fits.saturation = saturation(&conditional, config.horizon);
        if conditional.is_empty() {
            fits.notes
                .push("no trajectory escaped: conditional statistics undefined".into());
        }
        let time = format!("{}(X{tracked})", region.time_name());
        summary.verdicts.push(saturation_verdict(
            "T6.1-species",
            &batch,
            &format!("{time} given tau^M = inf"),
            fits.saturation.as_ref(),
            in_hyp,
        ));
        summary.batches.push(BatchSummary {
            batch,
            time_name: time,
            x0: vec![t.x0.0, t.x0.1],
            sample_file: "samples_species.csv".to_string(),
            survival_file: "survival_species.csv".to_string(),
            final_state_file: None,
            counts: OutcomeCounts::from_outcomes(&species),
            steps: 0,
            fits,
            theory: None,
        });
    }

    if let Some(tl) = tl {
        let records: Vec<TauRecord> = tl.batch(config.n_traj, config.master_seed, config.workers)?;
        let species: Vec<HittingOutcome> = records.iter().filter_map(|r| r.species).collect();
        write_samples_csv(&guard.path("samples_tl.csv"), &species)?;
        let curve = survival_curve(&species, config.horizon)?;
        write_survival_csv(&guard.path("survival_tl.csv"), &curve)?;
        let steps: u64 = records
            .iter()
            .map(|r| r.tau.time().max(r.species.map_or(0, |s| s.time())))
            .sum();
        summary.total_steps += steps;
        let batch = "t_l".to_string();
        let mut fits = basic_fits(&config.estimators, &batch, "samples_tl.csv", &species, &curve);
        fits.saturation = saturation(&species, config.horizon);
        let time = format!("T_L(X{tracked})");
        summary.verdicts.push(saturation_verdict(
            "T6.1-T_L",
            &batch,
            &time,
            fits.saturation.as_ref(),
            in_hyp,
        ));
        summary.batches.push(BatchSummary {
            batch,
            time_name: time,
            x0: vec![tl.x0.0, tl.x0.1],
            sample_file: "samples_tl.csv".to_string(),
            survival_file: "survival_tl.csv".to_string(),
            final_state_file: None,
            counts: OutcomeCounts::from_outcomes(&species),
            steps,
            fits,
            theory: None,
        });
    }
    Ok(summary)
}

fn saturation_verdict(theorem: &str, batch: &str, what: &str, sat: Option<&Saturation>, in_hyp: bool) -> Verdict {
    let measured = sat.map(|s| {
        let means: Vec<String> = s
            .nested_means
            .iter()
            .map(|(h, m)| format!("{m:.3} (h = {h})"))
            .collect();
        format!("truncated means {}", means.join(", "))
    });
    Verdict::new(
        theorem,
        batch,
        format!("E {what} < inf (truncated means saturate)"),
        measured,
        sat.map(|s| s.saturating),
        in_hyp,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::preset;

    fn curve_of(times: &[u64], censored: u64, horizon: u64) -> SurvivalCurve {
        let mut v: Vec<HittingOutcome> = times.iter().map(|&n| HittingOutcome::Hit { n }).collect();
        v.extend((0..censored).map(|_| HittingOutcome::Censored { horizon }));
        survival_curve(&v, horizon).unwrap()
    }

    #[test]
    fn bound_check_counts_violating_steps() {
        // S = 1 up to n = 9, then 0.5 up to the horizon
        let mut times = vec![10u64; 50];
        times.extend(vec![100u64; 50]);
        let curve = curve_of(&times, 0, 100);
        // 0.5^n >= 1 fails for every n in 1..=9, and 0.5^n >= 0.5 fails for n in 10..=99
        let b = check_survival_bound(&curve, 1.0, 0.5, 0);
        assert_eq!(b.n_checked, 99);
        assert_eq!(b.violations, 99);
        let loose = check_survival_bound(&curve, 1e40, 0.5, 0);
        assert!(loose.respected);
        // 2^40 * 0.5^n >= 0.5 up to n = 41
        let edge = check_survival_bound(&curve, 2f64.powi(40), 0.5, 0);
        assert_eq!(edge.violations, 99 - 41);
    }

    #[test]
    fn ln_survival_fit_is_exact_on_geometric_curve() {
        // S(n) = 2^-n for n <= 12 with N = 2^12
        let mut times = Vec::new();
        let mut remaining = 4096u64;
        for n in 1..=12u64 {
            let drop = remaining / 2;
            times.extend(std::iter::repeat_n(n, drop as usize));
            remaining -= drop;
        }
        let curve = curve_of(&times, remaining, 1000);
        let fit = ln_survival_fit(&curve, 1e-6).unwrap();
        assert!((fit.slope + std::f64::consts::LN_2).abs() < 0.05);
    }

    #[test]
    fn samples_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let v = vec![
            HittingOutcome::Hit { n: 3 },
            HittingOutcome::Censored { horizon: 10 },
            HittingOutcome::Extinct { n: 7 },
        ];
        write_samples_csv(&path, &v).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("trajectory_index,outcome,n\n0,hit,3\n1,censored,10\n2,extinct,7"));
        assert_eq!(read_samples_csv(&path).unwrap(), v);
    }

    #[test]
    fn invalid_config_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("run");
        let mut cfg = preset("T3.1").unwrap();
        cfg.n_traj = 0;
        assert!(run_experiment(&cfg, &out).is_err());
        assert!(!out.exists());
    }

    #[test]
    fn io_failure_mid_run_removes_partial_output() {
        let dir = tempfile::tempdir().unwrap();
        // a directory where the survival file should go makes the write fail
        // after the samples file exists
        fs::create_dir(dir.path().join("survival.csv")).unwrap();
        let mut cfg = preset("T3.1").unwrap();
        cfg.n_traj = 20;
        cfg.horizon = 50;
        assert!(matches!(
            run_experiment(&cfg, dir.path()),
            Err(Error::Csv(_) | Error::Io(_))
        ));
        assert!(!dir.path().join("samples.csv").exists());
        assert!(!dir.path().join("final_state.csv").exists());
        // the directory was there before the run, so it stays
        assert!(dir.path().join("survival.csv").is_dir());
    }

    #[test]
    fn dirac_noise_is_out_of_hypothesis() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = preset("T4.1").unwrap();
        cfg.n_traj = 50;
        cfg.horizon = 200;
        if let Scenario::Single(s) = &mut cfg.scenario {
            s.noise = crate::noise::NoiseSpec::Dirac0;
        }
        let summary = run_experiment(&cfg, dir.path()).unwrap();
        assert!(!summary.verdicts.is_empty());
        assert!(summary
            .verdicts
            .iter()
            .all(|v| v.status == VerdictStatus::OutOfHypothesis));
    }

    #[test]
    fn small_sweep_writes_per_x0_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = preset("T4.1").unwrap();
        cfg.n_traj = 200;
        let summary = run_experiment(&cfg, dir.path()).unwrap();
        for i in 0..3 {
            assert!(dir.path().join(format!("samples_x0_{i}.csv")).exists());
        }
        assert_eq!(summary.sweep.as_ref().unwrap().rows.len(), 3);
        assert!(summary.verdicts.iter().any(|v| v.batch == "sweep"));
        for b in &summary.batches {
            assert_eq!(b.fits.sample_file, b.sample_file);
        }
    }
}
