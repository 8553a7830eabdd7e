use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ricker_core::config::{parse_config, EstimatorOptions, ExperimentConfig, Scenario};
use ricker_core::dynamics::{simulate_trajectory, simulate_two_species, LogState};
use ricker_core::hitting::HittingOutcome;
use ricker_core::presets::{preset, preset_names, preset_source};
use ricker_core::report::emit_report;
use ricker_core::runner::{fit_sample_file, run_experiment, write_samples_csv, OutcomeCounts};
use ricker_core::theory::{classify_two_species, TheoryBounds};

/// Hitting times of the noisy Ricker model: simulation, fits and analytic bounds.
#[derive(Parser)]
#[command(name = "ricker", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// TOML experiment file
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario, see `ricker presets`
    #[arg(long)]
    preset: Option<String>,
    /// Override the master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (results do not depend on it)
    #[arg(long)]
    workers: Option<usize>,
}

impl Source {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                parse_config(&text)?
            }
            (None, Some(name)) => preset(name)?,
            (None, None) => bail!("give --config PATH or --preset NAME"),
        };
        if let Some(seed) = self.seed {
            cfg.master_seed = seed;
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        let errs = cfg.validation_errors();
        if !errs.is_empty() {
            return Err(ricker_core::Error::Config(errs).into());
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Dump one trajectory as CSV
    Simulate {
        #[command(flatten)]
        source: Source,
        /// Number of steps
        #[arg(long, default_value_t = 100)]
        steps: u64,
        /// Trajectory (stream) index
        #[arg(long, default_value_t = 0)]
        stream: u64,
        /// Which X0 of a sweep to start from
        #[arg(long, default_value_t = 0)]
        x0_index: usize,
        /// Output file, stdout if absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample one batch of hitting times
    Hitting {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 0)]
        x0_index: usize,
        /// Samples CSV, stdout if absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a preset or config file and write every artifact
    Experiment {
        #[command(flatten)]
        source: Source,
        /// Output directory (default: the config's output_dir, else runs/<scenario_id>)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analytic bounds only, no sampling
    TheoryBounds {
        #[command(flatten)]
        source: Source,
    },
    /// Re-estimate fits from a samples CSV
    Fit {
        /// Samples CSV with columns trajectory_index,outcome,n
        samples: PathBuf,
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long)]
        hill_k: Option<usize>,
    },
    /// List presets, or print one as TOML
    Presets {
        #[arg(long)]
        show: Option<String>,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate {
            source,
            steps,
            stream,
            x0_index,
            out,
        } => simulate(&source.load()?, steps, stream, x0_index, out.as_deref()),
        Command::Hitting { source, x0_index, out } => hitting(&source.load()?, x0_index, out.as_deref()),
        Command::Experiment { source, out } => {
            let cfg = source.load()?;
            let dir = out
                .or_else(|| cfg.output_dir.clone())
                .unwrap_or_else(|| Path::new("runs").join(&cfg.scenario_id));
            let summary = run_experiment(&cfg, &dir)?;
            let text = emit_report(&summary, &dir)?;
            let mut w = output(None)?;
            write!(w, "{text}")?;
            w.flush()?;
            eprintln!("artifacts in {}", dir.display());
            Ok(())
        }
        Command::TheoryBounds { source } => theory_bounds(&source.load()?),
        Command::Fit {
            samples,
            horizon,
            hill_k,
        } => {
            let opts = EstimatorOptions {
                hill_k,
                ..Default::default()
            };
            let fits = fit_sample_file(&samples, horizon, &opts)?;
            let mut w = output(None)?;
            writeln!(w, "{}", serde_json::to_string_pretty(&fits)?)?;
            w.flush()?;
            Ok(())
        }
        Command::Presets { show } => {
            let mut w = output(None)?;
            match show {
                Some(name) => match preset_source(&name) {
                    Some(src) => write!(w, "{src}")?,
                    None => bail!("unknown preset '{name}'"),
                },
                None => {
                    for n in preset_names() {
                        writeln!(w, "{n}")?;
                    }
                }
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn output(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(io::BufWriter::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn simulate(cfg: &ExperimentConfig, steps: u64, stream: u64, x0_index: usize, out: Option<&Path>) -> Result<()> {
    let mut w = output(out)?;
    match &cfg.scenario {
        Scenario::Single(s) => {
            let x0 = *s.x0.get(x0_index).context("x0 index out of range")?;
            writeln!(w, "n,ln_x,x")?;
            let path = simulate_trajectory(
                &s.model,
                &s.noise,
                LogState::from_density(x0),
                steps,
                cfg.master_seed,
                stream,
            );
            for (n, l) in path.iter().enumerate() {
                writeln!(w, "{n},{:?},{:?}", l.0, l.density())?;
            }
        }
        Scenario::TwoSpecies(t) => {
            writeln!(w, "n,ln_x1,ln_x2")?;
            let start = (LogState::from_density(t.x0.0), LogState::from_density(t.x0.1));
            for (n, (a, b)) in simulate_two_species(&t.model, start, steps, cfg.master_seed, stream)
                .iter()
                .enumerate()
            {
                writeln!(w, "{n},{:?},{:?}", a.0, b.0)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn hitting(cfg: &ExperimentConfig, x0_index: usize, out: Option<&Path>) -> Result<()> {
    let outcomes: Vec<HittingOutcome> = match &cfg.scenario {
        Scenario::Single(_) => {
            let problems = cfg.hitting_problems();
            let p = problems.get(x0_index).context("x0 index out of range")?;
            p.batch(cfg.n_traj, cfg.master_seed, cfg.workers)?
                .iter()
                .map(|r| r.outcome)
                .collect()
        }
        Scenario::TwoSpecies(_) => {
            let (main, _) = cfg.tau_problems().context("two-species scenario")?;
            main.batch(cfg.n_traj, cfg.master_seed, cfg.workers)?
                .iter()
                .map(|r| r.tau)
                .collect()
        }
    };
    match out {
        Some(p) => write_samples_csv(p, &outcomes)?,
        None => {
            let mut w = output(None)?;
            writeln!(w, "trajectory_index,outcome,n")?;
            for (i, o) in outcomes.iter().enumerate() {
                writeln!(w, "{i},{},{}", o.kind(), o.time())?;
            }
            w.flush()?;
        }
    }
    let c = OutcomeCounts::from_outcomes(&outcomes);
    eprintln!("{} hit, {} censored, {} extinct", c.hit, c.censored, c.extinct);
    Ok(())
}

fn theory_bounds(cfg: &ExperimentConfig) -> Result<()> {
    let json = match &cfg.scenario {
        Scenario::Single(s) => {
            let bounds: Vec<serde_json::Value> =
                s.x0.iter()
                    .map(|&x0| {
                        let b = TheoryBounds::compute(
                            &s.model,
                            &s.noise,
                            x0,
                            s.region.eps(),
                            s.region.m(),
                            cfg.estimators.eps0,
                        );
                        serde_json::json!({ "x0": x0, "bounds": b })
                    })
                    .collect();
            serde_json::to_value(bounds)?
        }
        Scenario::TwoSpecies(t) => serde_json::to_value(classify_two_species(&t.model)?)?,
    };
    let mut w = output(None)?;
    writeln!(w, "{}", serde_json::to_string_pretty(&json)?)?;
    w.flush()?;
    Ok(())
}
