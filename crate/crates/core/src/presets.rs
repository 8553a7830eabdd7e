//! Ready-made scenarios, one per theorem under test.
//!
//! Each preset is stored as the same TOML a user would write, so `experiment
//! --preset NAME` and `experiment --config FILE` go through one parser.

use crate::config::{parse_config, ExperimentConfig};
use crate::error::{Error, Result};

const T2_1A: &str = r#"
scenario_id = "T2.1a"
master_seed = 2101
n_traj = 100000

[single]
model = { type = "ricker", r = 1.0, a = 1.0 }
noise = { type = "gaussian", sigma = 1.0 }
region = { type = "commonness", M = 10.0 }
x0 = [1e3, 1e6]
"#;

const T2_1B: &str = r#"
scenario_id = "T2.1b"
master_seed = 2102
n_traj = 1000000
horizon = 200

[single]
model = { type = "ricker", r = 1.0, a = 1.0 }
noise = { type = "gaussian", sigma = 1.0 }
region = { type = "commonness", M = 3.0 }
x0 = 10.0
"#;

const T2_2: &str = r#"
scenario_id = "T2.2"
master_seed = 2200
n_traj = 1000000

[single]
model = { type = "ricker", r = 1.0, a = 1.0 }
noise = { type = "gaussian", sigma = 1.0 }
region = { type = "medium_band", eps = 0.5, M = 2.0 }
x0 = 1.0
"#;

const T3_1: &str = r#"
scenario_id = "T3.1"
master_seed = 3100
n_traj = 10000
horizon = 10000

[single]
model = { type = "ricker", r = -0.5, a = 1.0 }
noise = { type = "gaussian", sigma = 1.0 }
region = { type = "rarity", eps = 0.1 }
x0 = 0.05
"#;

const T4_1: &str = r#"
scenario_id = "T4.1"
master_seed = 4100
n_traj = 100000

[single]
model = { type = "ricker", r = 1.0, a = 1.0 }
noise = { type = "gaussian", sigma = 1.0 }
region = { type = "rarity", eps = 0.1 }
x0 = [1e-3, 1e-6, 1e-9]

[estimators]
eps0 = 0.2
"#;

const T4_2: &str = r#"
scenario_id = "T4.2"
master_seed = 4200
n_traj = 1000000
horizon = 1000000

[single]
model = { type = "ricker", r = 1.0, a = 1.0 }
noise = { type = "shifted_exponential", rate = 2.0 }
region = { type = "extremes", eps = 0.1, M = 10.0 }
x0 = 20.0
"#;

const T4_2_GAUSSIAN: &str = r#"
scenario_id = "T4.2-gaussian"
master_seed = 4201
n_traj = 1000000
horizon = 1000000

[single]
model = { type = "ricker", r = 1.0, a = 1.0 }
noise = { type = "gaussian", sigma = 1.0 }
region = { type = "extremes", eps = 0.1, M = 10.0 }
x0 = 20.0
"#;

const T5_1: &str = r#"
scenario_id = "T5.1"
master_seed = 5100
n_traj = 100000
horizon = 100000

[single]
model = { type = "ricker", r = 0.0, a = 1.0 }
noise = { type = "gaussian", sigma = 1.0 }
region = { type = "rarity", eps = 0.01 }
x0 = 0.005
"#;

const T5_1_PARETO: &str = r#"
scenario_id = "T5.1-pareto"
master_seed = 5101
n_traj = 100000
horizon = 100000

[single]
model = { type = "ricker", r = 0.0, a = 1.0 }
noise = { type = "symmetric_pareto", tail_index = 2.5, scale = 1.0 }
region = { type = "rarity", eps = 0.01 }
x0 = 0.005
"#;

const T6_1_CASE1: &str = r#"
scenario_id = "T6.1-case1"
master_seed = 6101
n_traj = 10000
horizon = 10000

[two_species]
r1 = 2.0
r2 = 1.0
a11 = 1.0
a12 = 1.0
a21 = 1.0
a22 = 1.0
noise1 = { type = "gaussian", sigma = 0.5 }
noise2 = { type = "gaussian", sigma = 0.5 }
eps_margin = 0.5
threshold_M = 1.0
x0 = [0.1, 0.01]
species_region = { type = "rarity", eps = 0.5 }
t_l = { x0 = [6.0, 0.01], L = 3.0 }
"#;

const T6_1_CASE2: &str = r#"
scenario_id = "T6.1-case2"
master_seed = 6102
n_traj = 10000
horizon = 10000

[two_species]
r1 = 2.0
r2 = 1.0
a11 = 1.0
a12 = 3.0
a21 = 1.0
a22 = 1.0
noise1 = { type = "gaussian", sigma = 0.5 }
noise2 = { type = "gaussian", sigma = 0.5 }
eps_margin = 0.5
threshold_M = 1.0
x0 = [0.1, 0.01]
species_region = { type = "rarity", eps = 0.5 }
t_l = { x0 = [6.0, 0.01], L = 3.0 }
"#;

const T6_1_CASE3: &str = r#"
scenario_id = "T6.1-case3"
master_seed = 6103
n_traj = 10000
horizon = 10000

[two_species]
r1 = 1.0
r2 = 2.0
a11 = 1.0
a12 = 1.0
a21 = 1.0
a22 = 1.0
noise1 = { type = "gaussian", sigma = 0.5 }
noise2 = { type = "gaussian", sigma = 0.5 }
eps_margin = 0.5
threshold_M = 1.0
barrier = "upper"
x0 = [0.01, 0.1]
species_region = { type = "rarity", eps = 0.5 }
t_l = { x0 = [0.01, 6.0], L = 3.0 }
"#;

const PRESETS: &[(&str, &str)] = &[
    ("T2.1a", T2_1A),
    ("T2.1b", T2_1B),
    ("T2.2", T2_2),
    ("T3.1", T3_1),
    ("T4.1", T4_1),
    ("T4.2", T4_2),
    ("T4.2-gaussian", T4_2_GAUSSIAN),
    ("T5.1", T5_1),
    ("T5.1-pareto", T5_1_PARETO),
    ("T6.1-case1", T6_1_CASE1),
    ("T6.1-case2", T6_1_CASE2),
    ("T6.1-case3", T6_1_CASE3),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(name, _)| *name)
}

/// TOML source of a preset, handy as a starting point for custom configs.
pub fn preset_source(name: &str) -> Option<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case(name))
        .map(|(_, src)| src.trim_start())
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let src = preset_source(name).ok_or_else(|| {
        let known: Vec<_> = preset_names().collect();
        Error::InvalidParameter(format!("unknown preset '{name}', known: {}", known.join(", ")))
    })?;
    parse_config(src)
}
