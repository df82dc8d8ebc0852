//! Batch execution of configured checks.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use concmeter_core::verify::{CheckConfig, CheckReport, Verdict};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Where reports and the summary go; `--out` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub jobs: Vec<CheckConfig>,
}

/// Parses JSON, naming the offending field and position on failure.
pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str, origin: &str) -> Result<T, Failure> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        let path = e.path().to_string();
        Failure::Error(format!(
            "{origin}:{}:{}: at `{path}`: {inner}",
            inner.line(),
            inner.column()
        ))
    })
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Error(format!("{}: {e}", path.display())))?;
    parse_json(&text, &path.display().to_string())
}

/// One summary row.
#[derive(Serialize)]
struct SummaryRow<'a> {
    job: usize,
    check_id: &'a str,
    verdict: String,
    violations: Option<usize>,
    checked: Option<usize>,
    worst_margin: Option<f64>,
    seed: Option<u64>,
    report: String,
}

pub fn report_name(index: usize, id: &str) -> String {
    format!("{index:03}_{id}.json")
}

/// Runs every job, writes the reports and `summary.csv`, and returns the
/// worst outcome.
pub fn execute(cfg: &ExperimentConfig, out: &Path, seed_override: Option<u64>) -> Result<Verdict, Failure> {
    let mut jobs = cfg.jobs.clone();
    if let Some(seed) = seed_override {
        jobs.iter_mut().for_each(|j| j.set_seed(seed));
    }
    fs::create_dir_all(out).map_err(|e| Failure::Error(format!("{}: {e}", out.display())))?;
    let results: Vec<concmeter_core::Result<CheckReport>> = jobs.par_iter().map(|j| j.run()).collect();

    let resolved = ExperimentConfig {
        output_dir: Some(out.to_path_buf()),
        jobs: jobs.clone(),
    };
    let summary_path = out.join("summary.csv");
    let mut file = fs::File::create(&summary_path).map_err(io_failure(&summary_path))?;
    write_config_line(&mut file, &resolved).map_err(io_failure(&summary_path))?;
    let mut w = csv::Writer::from_writer(file);
    // An empty job list still yields a header.
    if jobs.is_empty() {
        w.write_record(["job", "check_id", "verdict", "violations", "checked", "worst_margin", "seed", "report"])
            .map_err(csv_failure)?;
    }
    let mut errors = Vec::new();
    let mut worst = Verdict::Pass;
    for (i, (job, result)) in jobs.iter().zip(results).enumerate() {
        let name = report_name(i, job.id());
        let row = match result {
            Ok(report) => {
                let path = out.join(&name);
                fs::write(&path, report.to_json()).map_err(io_failure(&path))?;
                if report.verdict == Verdict::Fail {
                    worst = Verdict::Fail;
                }
                SummaryRow {
                    job: i,
                    check_id: job.id(),
                    verdict: report.verdict.to_string(),
                    violations: Some(report.violations.count),
                    checked: Some(report.violations.checked),
                    worst_margin: report.violations.worst_margin,
                    seed: report.inputs.get("seed").and_then(|s| s.as_u64()),
                    report: name,
                }
            }
            Err(e) => {
                errors.push(format!("job {i} ({}): {e}", job.id()));
                SummaryRow {
                    job: i,
                    check_id: job.id(),
                    verdict: "error".into(),
                    violations: None,
                    checked: None,
                    worst_margin: None,
                    seed: None,
                    report: String::new(),
                }
            }
        };
        w.serialize(row).map_err(csv_failure)?;
    }
    w.flush().map_err(io_failure(&summary_path))?;
    if !errors.is_empty() {
        return Err(Failure::Error(errors.join("\n")));
    }
    Ok(worst)
}

/// First line of every CSV output: the resolved configuration as compact JSON.
pub fn write_config_line(w: &mut impl Write, cfg: &impl Serialize) -> std::io::Result<()> {
    let json = serde_json::to_string(cfg).map_err(std::io::Error::other)?;
    writeln!(w, "# resolved config: {json}")
}

pub fn io_failure(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Error(format!("{}: {e}", path.display()))
}

pub fn csv_failure(e: csv::Error) -> Failure {
    Failure::Error(e.to_string())
}
