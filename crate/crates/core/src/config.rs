//! Experiment configuration: TOML surface syntax, defaults and validation.
//!
//! ```toml
//! scenario_id = "rarity-demo"
//! master_seed = 7
//! n_traj = 10000
//! horizon = 100000          # default 1e5
//!
//! [single]
//! model = { type = "ricker", r = 1.0, a = 1.0 }
//! noise = { type = "gaussian", sigma = 1.0 }
//! region = { type = "rarity", eps = 0.1 }
//! x0 = [1e-3, 1e-6]         # a number or a list (sweep)
//!
//! [estimators]
//! hill_k = 1000             # default: automatic
//! eps0 = 0.2                # default: 2 eps
//! ```
//!
//! A two-species run replaces `[single]` with `[two_species]`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{GrowthModel, TwoSpeciesModel, DEFAULT_LOG_FLOOR};
use crate::error::{Error, Result};
use crate::hitting::{Barrier, HittingProblem, Region, TauProblem};
use crate::noise::NoiseSpec;
use crate::theory::classify_two_species;

pub const DEFAULT_HORIZON: u64 = 100_000;
pub const DEFAULT_N_TRAJ: u64 = 10_000;

type Unknown = BTreeMap<String, toml::Value>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

#[derive(Debug, Deserialize)]
struct RawConfig {
    scenario_id: Option<String>,
    master_seed: Option<u64>,
    horizon: Option<u64>,
    n_traj: Option<u64>,
    workers: Option<usize>,
    log_floor: Option<f64>,
    output_dir: Option<PathBuf>,
    single: Option<RawSingle>,
    two_species: Option<RawTwoSpecies>,
    estimators: Option<RawEstimators>,
    #[serde(flatten)]
    unknown: Unknown,
}

#[derive(Debug, Deserialize)]
struct RawSingle {
    model: Option<GrowthModel>,
    noise: Option<NoiseSpec>,
    region: Option<Region>,
    x0: Option<OneOrMany>,
    #[serde(flatten)]
    unknown: Unknown,
}

#[derive(Debug, Deserialize)]
struct RawTwoSpecies {
    r1: Option<f64>,
    r2: Option<f64>,
    a11: Option<f64>,
    a12: Option<f64>,
    a21: Option<f64>,
    a22: Option<f64>,
    noise1: Option<NoiseSpec>,
    noise2: Option<NoiseSpec>,
    x0: Option<Vec<f64>>,
    eps_margin: Option<f64>,
    #[serde(rename = "threshold_M", alias = "threshold_m")]
    threshold_m: Option<f64>,
    barrier: Option<Barrier>,
    species_region: Option<Region>,
    t_l: Option<RawTl>,
    #[serde(flatten)]
    unknown: Unknown,
}

#[derive(Debug, Deserialize)]
struct RawTl {
    x0: Option<Vec<f64>>,
    #[serde(rename = "L", alias = "l")]
    l: Option<f64>,
    #[serde(flatten)]
    unknown: Unknown,
}

#[derive(Debug, Deserialize)]
struct RawEstimators {
    hill_k: Option<usize>,
    rate_window: Option<(u64, u64)>,
    eps0: Option<f64>,
    #[serde(flatten)]
    unknown: Unknown,
}

/// Single-species scenario: one region, one or more starting densities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleScenario {
    pub model: GrowthModel,
    pub noise: NoiseSpec,
    pub region: Region,
    pub x0: Vec<f64>,
}

/// Extra batch measuring the tracked species' commonness time `T_L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TlBatch {
    pub x0: (f64, f64),
    #[serde(rename = "L")]
    pub l: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoSpeciesScenario {
    pub model: TwoSpeciesModel,
    pub x0: (f64, f64),
    pub eps_margin: f64,
    #[serde(rename = "threshold_M")]
    pub threshold_m: f64,
    pub barrier: Barrier,
    pub species_region: Option<Region>,
    pub t_l: Option<TlBatch>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Single(SingleScenario),
    TwoSpecies(TwoSpeciesScenario),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimatorOptions {
    /// Hill order statistics; `None` means automatic.
    pub hill_k: Option<usize>,
    /// Window for the exponential-rate fit; `None` means automatic.
    pub rate_window: Option<(u64, u64)>,
    /// Constant of the upper mean bound for `T_eps`; `None` means `2 eps`.
    pub eps0: Option<f64>,
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario_id: String,
    pub master_seed: u64,
    pub horizon: u64,
    pub n_traj: u64,
    pub workers: usize,
    pub log_floor: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub scenario: Scenario,
    pub estimators: EstimatorOptions,
}

fn unknown_keys(section: &str, unknown: &Unknown, errs: &mut Vec<String>) {
    for key in unknown.keys() {
        if section.is_empty() {
            errs.push(format!("unknown key '{key}'"));
        } else {
            errs.push(format!("unknown key '{section}.{key}'"));
        }
    }
}

fn required<T>(value: Option<T>, name: &str, errs: &mut Vec<String>) -> Option<T> {
    if value.is_none() {
        errs.push(format!("missing required key '{name}'"));
    }
    value
}

fn pair(v: Option<Vec<f64>>, name: &str, errs: &mut Vec<String>) -> Option<(f64, f64)> {
    match v {
        Some(v) if v.len() == 2 => Some((v[0], v[1])),
        Some(v) => {
            errs.push(format!("'{name}' must have exactly 2 entries, got {}", v.len()));
            None
        }
        None => {
            errs.push(format!("missing required key '{name}'"));
            None
        }
    }
}

/// Parse and validate a TOML experiment, reporting every problem found.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let raw: RawConfig = toml::from_str(text)?;
    let mut errs = Vec::new();
    unknown_keys("", &raw.unknown, &mut errs);

    let scenario = match (raw.single, raw.two_species) {
        (Some(s), None) => {
            unknown_keys("single", &s.unknown, &mut errs);
            let model = required(s.model, "single.model", &mut errs);
            let noise = required(s.noise, "single.noise", &mut errs);
            let region = required(s.region, "single.region", &mut errs);
            let x0 = match required(s.x0, "single.x0", &mut errs) {
                Some(OneOrMany::One(v)) => Some(vec![v]),
                Some(OneOrMany::Many(v)) if v.is_empty() => {
                    errs.push("'single.x0' list must not be empty".into());
                    None
                }
                Some(OneOrMany::Many(v)) => Some(v),
                None => None,
            };
            match (model, noise, region, x0) {
                (Some(model), Some(noise), Some(region), Some(x0)) => Some(Scenario::Single(SingleScenario {
                    model,
                    noise,
                    region,
                    x0,
                })),
                _ => None,
            }
        }
        (None, Some(t)) => {
            unknown_keys("two_species", &t.unknown, &mut errs);
            let mut get = |v: Option<f64>, name: &str| required(v, &format!("two_species.{name}"), &mut errs);
            let coeffs = (
                get(t.r1, "r1"),
                get(t.r2, "r2"),
                get(t.a11, "a11"),
                get(t.a12, "a12"),
                get(t.a21, "a21"),
                get(t.a22, "a22"),
                get(t.eps_margin, "eps_margin"),
                get(t.threshold_m, "threshold_M"),
            );
            let noise1 = required(t.noise1, "two_species.noise1", &mut errs);
            let noise2 = required(t.noise2, "two_species.noise2", &mut errs);
            let x0 = pair(t.x0, "two_species.x0", &mut errs);
            let t_l = t.t_l.and_then(|tl| {
                unknown_keys("two_species.t_l", &tl.unknown, &mut errs);
                let x0 = pair(tl.x0, "two_species.t_l.x0", &mut errs);
                let l = required(tl.l, "two_species.t_l.L", &mut errs);
                Some(TlBatch { x0: x0?, l: l? })
            });
            match (coeffs, noise1, noise2, x0) {
                (
                    (
                        Some(r1),
                        Some(r2),
                        Some(a11),
                        Some(a12),
                        Some(a21),
                        Some(a22),
                        Some(eps_margin),
                        Some(threshold_m),
                    ),
                    Some(noise1),
                    Some(noise2),
                    Some(x0),
                ) => {
                    let model = TwoSpeciesModel {
                        r1,
                        r2,
                        a11,
                        a12,
                        a21,
                        a22,
                        noise1,
                        noise2,
                    };
                    let barrier = match t.barrier {
                        Some(b) => Some(b),
                        None => match classify_two_species(&model) {
                            Ok(c) => {
                                if c.barrier.is_none() {
                                    errs.push(format!(
                                        "two_species parameters give case {:?}, which has no escape time; set 'barrier' explicitly",
                                        c.case_label
                                    ));
                                }
                                c.barrier
                            }
                            Err(e) => {
                                errs.push(e.to_string());
                                None
                            }
                        },
                    };
                    barrier.map(|barrier| {
                        Scenario::TwoSpecies(TwoSpeciesScenario {
                            model,
                            x0,
                            eps_margin,
                            threshold_m,
                            barrier,
                            species_region: t.species_region,
                            t_l,
                        })
                    })
                }
                _ => None,
            }
        }
        (Some(_), Some(_)) => {
            errs.push("exactly one of [single] and [two_species] may be present, found both".into());
            None
        }
        (None, None) => {
            errs.push("missing scenario: add a [single] or a [two_species] table".into());
            None
        }
    };

    let estimators = match raw.estimators {
        Some(e) => {
            unknown_keys("estimators", &e.unknown, &mut errs);
            EstimatorOptions {
                hill_k: e.hill_k,
                rate_window: e.rate_window,
                eps0: e.eps0,
            }
        }
        None => EstimatorOptions::default(),
    };

    let master_seed = required(raw.master_seed, "master_seed", &mut errs);
    let config = ExperimentConfig {
        scenario_id: raw.scenario_id.unwrap_or_else(|| "unnamed".into()),
        master_seed: master_seed.unwrap_or(0),
        horizon: raw.horizon.unwrap_or(DEFAULT_HORIZON),
        n_traj: raw.n_traj.unwrap_or(DEFAULT_N_TRAJ),
        workers: raw.workers.unwrap_or(1),
        log_floor: raw.log_floor.unwrap_or(DEFAULT_LOG_FLOOR),
        output_dir: raw.output_dir,
        scenario: match scenario {
            Some(s) => s,
            None => return Err(Error::Config(errs)),
        },
        estimators,
    };
    errs.extend(config.validation_errors());
    if errs.is_empty() {
        Ok(config)
    } else {
        Err(Error::Config(errs))
    }
}

impl ExperimentConfig {
    /// One hitting problem per starting density (single-species scenarios).
    pub fn hitting_problems(&self) -> Vec<HittingProblem> {
        match &self.scenario {
            Scenario::Single(s) => {
                s.x0.iter()
                    .map(|&x0| HittingProblem {
                        model: s.model,
                        noise: s.noise,
                        x0,
                        region: s.region,
                        horizon: self.horizon,
                        log_floor: self.log_floor,
                    })
                    .collect()
            }
            Scenario::TwoSpecies(_) => Vec::new(),
        }
    }

    /// The main `tau^M` problem and the optional `T_L` problem.
    pub fn tau_problems(&self) -> Option<(TauProblem, Option<TauProblem>)> {
        match &self.scenario {
            Scenario::TwoSpecies(t) => {
                let mut main = TauProblem::new(t.model, t.x0, t.eps_margin, t.threshold_m, t.barrier, self.horizon);
                main.log_floor = self.log_floor;
                main.species_region = t.species_region;
                let tl = t.t_l.map(|tl| {
                    let mut p = main;
                    p.x0 = tl.x0;
                    p.species_region = Some(Region::Commonness { m: tl.l });
                    p
                });
                Some((main, tl))
            }
            Scenario::Single(_) => None,
        }
    }

    pub fn validation_errors(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.horizon < 1 {
            errs.push("horizon must be at least 1".into());
        }
        if self.n_traj < 1 {
            errs.push("n_traj must be at least 1".into());
        }
        if self.workers < 1 {
            errs.push("workers must be at least 1".into());
        }
        match &self.scenario {
            Scenario::Single(s) => {
                // model/noise/region errors once, then per-X0 start checks
                errs.extend(s.model.validation_errors());
                errs.extend(s.noise.validation_errors());
                let region_errs = s.region.validation_errors();
                let region_ok = region_errs.is_empty();
                errs.extend(region_errs);
                for &x0 in &s.x0 {
                    if !(x0.is_finite() && x0 > 0.0) {
                        errs.push(format!("X0 must be a finite positive density, got {x0}"));
                    } else if region_ok && !s.region.contains(x0) {
                        errs.push(format!(
                            "X0 must be inside the region: X0={x0} is not in {}",
                            s.region.label()
                        ));
                    }
                }
            }
            Scenario::TwoSpecies(_) => {
                let (main, tl) = self.tau_problems().expect("two-species scenario");
                errs.extend(main.validation_errors());
                if let Some(tl) = tl {
                    errs.extend(tl.validation_errors().into_iter().map(|e| format!("t_l batch: {e}")));
                }
            }
        }
        if let Some((lo, hi)) = self.estimators.rate_window {
            if lo >= hi || hi > self.horizon {
                errs.push(format!("rate_window must satisfy lo < hi <= horizon, got ({lo}, {hi})"));
            }
        }
        if let Some(k) = self.estimators.hill_k {
            if k < 1 || k as u64 >= self.n_traj {
                errs.push(format!("hill_k must be in [1, n_traj), got {k}"));
            }
        }
        if let Some(e0) = self.estimators.eps0 {
            let eps = match &self.scenario {
                Scenario::Single(s) => s.region.eps(),
                Scenario::TwoSpecies(_) => None,
            };
            if !(e0.is_finite() && eps.is_none_or(|eps| e0 > eps)) {
                errs.push(format!("eps0 must exceed eps, got {e0}"));
            }
        }
        errs
    }

    /// SHA-256 of the canonical JSON form of the configuration.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        // where results go does not change them
        canonical.output_dir = None;
        canonical.workers = 1;
        let json = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn to_toml(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("scenario_id = {:?}\n", self.scenario_id));
        out.push_str(&format!("master_seed = {}\n", self.master_seed));
        out.push_str(&format!("horizon = {}\n", self.horizon));
        out.push_str(&format!("n_traj = {}\n", self.n_traj));
        out.push_str(&format!("workers = {}\n", self.workers));
        out.push_str(&format!("log_floor = {:?}\n", self.log_floor));
        match &self.scenario {
            Scenario::Single(s) => {
                out.push_str("\n[single]\n");
                out.push_str(&format!("model = {}\n", inline(&s.model)));
                out.push_str(&format!("noise = {}\n", inline(&s.noise)));
                out.push_str(&format!("region = {}\n", inline(&s.region)));
                let xs: Vec<String> = s.x0.iter().map(|x| format!("{x:?}")).collect();
                out.push_str(&format!("x0 = [{}]\n", xs.join(", ")));
            }
            Scenario::TwoSpecies(t) => {
                let m = &t.model;
                out.push_str("\n[two_species]\n");
                for (k, v) in [
                    ("r1", m.r1),
                    ("r2", m.r2),
                    ("a11", m.a11),
                    ("a12", m.a12),
                    ("a21", m.a21),
                    ("a22", m.a22),
                    ("eps_margin", t.eps_margin),
                    ("threshold_M", t.threshold_m),
                ] {
                    out.push_str(&format!("{k} = {v:?}\n"));
                }
                out.push_str(&format!("noise1 = {}\n", inline(&m.noise1)));
                out.push_str(&format!("noise2 = {}\n", inline(&m.noise2)));
                out.push_str(&format!("x0 = [{:?}, {:?}]\n", t.x0.0, t.x0.1));
                let barrier = match t.barrier {
                    Barrier::Lower => "lower",
                    Barrier::Upper => "upper",
                };
                out.push_str(&format!("barrier = \"{barrier}\"\n"));
                if let Some(r) = &t.species_region {
                    out.push_str(&format!("species_region = {}\n", inline(r)));
                }
                if let Some(tl) = &t.t_l {
                    out.push_str(&format!(
                        "t_l = {{ x0 = [{:?}, {:?}], L = {:?} }}\n",
                        tl.x0.0, tl.x0.1, tl.l
                    ));
                }
            }
        }
        let e = &self.estimators;
        if e.hill_k.is_some() || e.rate_window.is_some() || e.eps0.is_some() {
            out.push_str("\n[estimators]\n");
            if let Some(k) = e.hill_k {
                out.push_str(&format!("hill_k = {k}\n"));
            }
            if let Some((lo, hi)) = e.rate_window {
                out.push_str(&format!("rate_window = [{lo}, {hi}]\n"));
            }
            if let Some(e0) = e.eps0 {
                out.push_str(&format!("eps0 = {e0:?}\n"));
            }
        }
        out
    }
}

/// Render a serializable record as a TOML inline table.
fn inline<T: Serialize>(value: &T) -> String {
    let value = toml::Value::try_from(value).expect("serializes to a TOML table");
    let table = value.as_table().expect("record");
    let parts: Vec<String> = table.iter().map(|(k, v)| format!("{k} = {v}")).collect();
    format!("{{ {} }}", parts.join(", "))
}
