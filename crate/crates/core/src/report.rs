//! Human-readable report and plot-data CSVs for a finished run.
//!
//! Survival data are read back from the run's own survival files, so every
//! plotted number comes from a persisted artifact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::Result;
use crate::runner::{read_survival_csv, RunSummary, VerdictStatus};

/// Write `report.txt`, `loglog_survival.csv`, `ln_survival.csv` and
/// `mean_vs_lnx0.csv` into `dir` and return the report text.
pub fn emit_report(summary: &RunSummary, dir: &Path) -> Result<String> {
    let text = render(summary);
    fs::write(dir.join("report.txt"), &text)?;

    let mut loglog = csv::Writer::from_path(dir.join("loglog_survival.csv"))?;
    loglog.write_record(["batch", "n", "ln_n", "ln_survival"])?;
    let mut semilog = csv::Writer::from_path(dir.join("ln_survival.csv"))?;
    semilog.write_record(["batch", "n", "ln_survival"])?;
    for b in &summary.batches {
        for (n, s) in read_survival_csv(&dir.join(&b.survival_file))? {
            if n == 0 || s <= 0.0 {
                continue;
            }
            let ln_s = format!("{:?}", s.ln());
            loglog.write_record([
                b.batch.clone(),
                n.to_string(),
                format!("{:?}", (n as f64).ln()),
                ln_s.clone(),
            ])?;
            semilog.write_record([b.batch.clone(), n.to_string(), ln_s])?;
        }
    }
    loglog.flush()?;
    semilog.flush()?;

    let mut means = csv::Writer::from_path(dir.join("mean_vs_lnx0.csv"))?;
    means.write_record([
        "x0",
        "abs_ln_x0",
        "mean",
        "ci_lo",
        "ci_hi",
        "theory_lower",
        "theory_upper",
        "sample_file",
    ])?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:?}"));
    if let Some(sweep) = &summary.sweep {
        for r in &sweep.rows {
            means.write_record([
                format!("{:?}", r.x0),
                format!("{:?}", r.abs_ln_x0),
                format!("{:?}", r.mean),
                format!("{:?}", r.ci95.0),
                format!("{:?}", r.ci95.1),
                opt(r.theory_lower),
                opt(r.theory_upper),
                r.sample_file.clone(),
            ])?;
        }
    }
    means.flush()?;
    Ok(text)
}

pub fn render(summary: &RunSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario {}", summary.scenario_id);
    let _ = writeln!(out, "config sha256 {}", summary.config_hash);
    if let Some(r) = &summary.regime {
        let _ = writeln!(out, "regime: {} (lambda = {:.4})", r.label, r.lambda);
        for c in &r.caveats {
            let _ = writeln!(out, "  caveat: {c}");
        }
    }
    if let Some(c) = &summary.two_species_case {
        let _ = writeln!(
            out,
            "two-species case: {:?}, margins ({:.4}, {:.4})",
            c.case_label, c.margins.0, c.margins.1
        );
    }
    for a in &summary.assumptions {
        let failed: Vec<String> = a
            .report
            .violations()
            .map(|v| format!("{} ({})", v.hypothesis, v.detail))
            .collect();
        if failed.is_empty() {
            let _ = writeln!(out, "assumptions {} [{}]: all hold", a.report.theorem, a.subject);
        } else {
            let _ = writeln!(
                out,
                "assumptions {} [{}]: violated: {}",
                a.report.theorem,
                a.subject,
                failed.join("; ")
            );
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "batches");
    for b in &summary.batches {
        let c = &b.counts;
        let _ = writeln!(
            out,
            "  {:<8} {:<14} x0 {:?}: {} hit, {} censored, {} extinct ({})",
            b.batch, b.time_name, b.x0, c.hit, c.censored, c.extinct, b.sample_file
        );
        for note in &b.fits.notes {
            let _ = writeln!(out, "           {note}");
        }
    }
    let _ = writeln!(out);
    if summary.verdicts.is_empty() {
        let _ = writeln!(out, "no theorem applies to this scenario");
    } else {
        let _ = writeln!(out, "theorem | batch | prediction | measured | verdict");
        for v in &summary.verdicts {
            let status = match v.check_passed {
                Some(p) if v.status == VerdictStatus::OutOfHypothesis => {
                    format!("{} (check {})", v.status.as_str(), if p { "holds" } else { "fails" })
                }
                _ => v.status.as_str().to_string(),
            };
            let _ = writeln!(
                out,
                "{} | {} | {} | {} | {}",
                v.theorem, v.batch, v.prediction, v.measured, status
            );
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "total steps {}", summary.total_steps);
    out
}
