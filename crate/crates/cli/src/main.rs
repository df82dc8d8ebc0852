//! `concmeter`: run concentration experiments and theorem checks from the shell.

mod run;
mod shorthand;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use concmeter_core::concentration::{concentration_lower_curve, empirical_median, DirectionFamily, DirectionKind};
use concmeter_core::measures::radial_cdf;
use concmeter_core::parameters::{beta_with, BetaVariant, TransformFamily};
use concmeter_core::transport::{lipschitz_constant, pushforward_batch, radial_transport_with, PushMap};
use concmeter_core::verify::{CheckConfig, Verdict, CHECK_IDS};
use concmeter_core::{sample, MeasureSpec, NormSpec};
use serde::Serialize;

use run::{csv_failure, io_failure, write_config_line};
use shorthand::{parse_dims, parse_eps, parse_measure, parse_norm};

const SEED_ENV: &str = "CONCMETER_SEED";

/// Error that maps to exit code 1.
#[derive(Debug)]
pub enum Failure {
    Error(String),
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Error(s) => f.write_str(s),
        }
    }
}

impl From<concmeter_core::Error> for Failure {
    fn from(e: concmeter_core::Error) -> Self {
        Failure::Error(e.to_string())
    }
}

impl From<String> for Failure {
    fn from(e: String) -> Self {
        Failure::Error(e)
    }
}

#[derive(Parser)]
#[command(name = "concmeter", version, about = "Monte Carlo checks of concentration transfer between norms")]
struct Cli {
    /// Worker threads (default: logical CPUs).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every job of a JSON experiment config.
    Run {
        config: PathBuf,
        /// Output directory; overrides `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lower-bound concentration curve of a sampled measure.
    Alpha(AlphaArgs),
    /// β or β̃ against n.
    Beta(BetaArgs),
    /// Empirical medians of a norm against n.
    Median(MedianArgs),
    /// Sample a measure and write its image under a map.
    Pushforward(PushArgs),
    /// Monotone radial transport between two measures.
    Transport(TransportArgs),
    /// Run one check from a JSON config (the `check` field may be omitted).
    Verify {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(CHECK_IDS))]
        check_id: String,
        #[arg(long, conflicts_with = "json")]
        config: Option<PathBuf>,
        /// Inline JSON config.
        #[arg(long)]
        json: Option<String>,
        /// Report path; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Serialize)]
struct Common {
    /// Sample size.
    #[arg(long = "N", short = 'N', default_value_t = 100_000)]
    samples: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout if absent.
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Kind {
    Gaussian,
    Rademacher,
}

#[derive(Args, Serialize)]
struct AlphaArgs {
    /// haar_sphere, gaussian, ggp:P, uniform_ball:NORM or cone_surface:NORM.
    #[arg(long)]
    measure: String,
    /// l1, l1.5, linf, or a scaled form such as 0.5*l1.
    #[arg(long)]
    metric: String,
    #[arg(long)]
    n: usize,
    /// Comma list or from:to:count[:log].
    #[arg(long, allow_hyphen_values = true)]
    eps: String,
    #[arg(long, default_value_t = concmeter_core::concentration::DEFAULT_RANDOM_DIRECTIONS)]
    random_directions: usize,
    #[arg(long, value_enum, default_value_t = Kind::Gaussian)]
    directions: Kind,
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Variant {
    Beta,
    BetaTilde,
}

#[derive(Args, Serialize)]
struct BetaArgs {
    #[arg(long = "K")]
    k: String,
    #[arg(long = "L")]
    l: String,
    #[arg(long, default_value = "cone_surface")]
    measure: String,
    #[arg(long, value_enum, default_value_t = Variant::BetaTilde)]
    variant: Variant,
    /// Comma-separated dimensions.
    #[arg(long)]
    n: String,
    /// Random diagonal candidates on top of the scalar grid; 0 keeps scalars only.
    #[arg(long, default_value_t = 0)]
    diagonal_candidates: usize,
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
}

#[derive(Args, Serialize)]
struct MedianArgs {
    #[arg(long)]
    measure: String,
    #[arg(long)]
    norm: String,
    #[arg(long)]
    n: String,
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
}

#[derive(Args, Serialize)]
struct PushArgs {
    #[arg(long)]
    measure: String,
    /// identity, scale:F, pi (needs --K and --L) or radial (onto the uniform --L ball).
    #[arg(long)]
    map: String,
    #[arg(long = "K")]
    k: Option<String>,
    #[arg(long = "L")]
    l: Option<String>,
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
}

#[derive(Args, Serialize)]
struct TransportArgs {
    #[arg(long)]
    source: String,
    #[arg(long)]
    target: String,
    /// Norm whose radial laws are matched.
    #[arg(long)]
    norm: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = concmeter_core::transport::DEFAULT_KNOTS)]
    knots: usize,
    /// Output file; stdout if absent.
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be positive");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match dispatch(cli.command) {
        Ok(Verdict::Fail) => ExitCode::from(2),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn seed_override() -> Result<Option<u64>, Failure> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::Error(format!("{SEED_ENV} must be an unsigned integer, got \"{s}\""))),
        Err(_) => Ok(None),
    }
}

fn dispatch(cmd: Command) -> Result<Verdict, Failure> {
    match cmd {
        Command::Run { config, out } => {
            let cfg = run::load_config(&config)?;
            let dir = out
                .or_else(|| cfg.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("concmeter-out"));
            run::execute(&cfg, &dir, seed_override()?)
        }
        Command::Alpha(a) => cmd_alpha(&a),
        Command::Beta(a) => cmd_beta(&a),
        Command::Median(a) => cmd_median(&a),
        Command::Pushforward(a) => cmd_pushforward(&a),
        Command::Transport(a) => cmd_transport(&a),
        Command::Verify { check_id, config, json, out } => {
            let text = match (config, json) {
                (Some(p), None) => fs::read_to_string(&p).map_err(io_failure(&p))?,
                (None, Some(j)) => j,
                _ => return Err(Failure::Error("give --config or --json".into())),
            };
            let mut value: serde_json::Value = run::parse_json(&text, "config")?;
            match value.as_object_mut() {
                Some(obj) => match obj.get("check").and_then(|c| c.as_str()) {
                    Some(c) if c != check_id => {
                        return Err(Failure::Error(format!("config is for `{c}`, not `{check_id}`")))
                    }
                    _ => {
                        obj.insert("check".into(), serde_json::Value::String(check_id.clone()));
                    }
                },
                None => return Err(Failure::Error("config must be a JSON object".into())),
            }
            let mut check: CheckConfig = run::parse_json(&value.to_string(), "config")?;
            if let Some(seed) = seed_override()? {
                check.set_seed(seed);
            }
            let report = check.run()?;
            write_output(out.as_deref(), report.to_json().as_bytes())?;
            Ok(report.verdict)
        }
    }
}

/// Writes to `path`, or stdout when absent.
fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(io_failure(p)),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| Failure::Error(e.to_string())),
    }
}

/// A CSV buffer opened with the resolved-config line.
fn csv_buffer(cfg: &impl Serialize) -> Vec<u8> {
    let mut buf = Vec::new();
    write_config_line(&mut buf, cfg).expect("in-memory write");
    buf
}

fn cmd_alpha(a: &AlphaArgs) -> Result<Verdict, Failure> {
    let eps = parse_eps(&a.eps)?;
    let measure = parse_measure(&a.measure, a.n)?;
    let metric = parse_norm(&a.metric, a.n)?;
    let kind = match a.directions {
        Kind::Gaussian => DirectionKind::Gaussian,
        Kind::Rademacher => DirectionKind::Rademacher,
    };
    let family = DirectionFamily {
        random: a.random_directions,
        ..DirectionFamily::default()
    }
    .with_kind(kind)
    .with_seed(a.common.seed);
    let batch = sample(&measure, a.common.samples, a.common.seed)?;
    let curve = concentration_lower_curve(batch.points(), &metric, &eps, &family)?;
    let mut buf = csv_buffer(a);
    curve.write_csv(&mut buf)?;
    write_output(a.common.out.as_deref(), &buf)?;
    Ok(Verdict::Pass)
}

#[derive(Serialize)]
struct BetaRow {
    n: usize,
    variant: &'static str,
    value: f64,
    lambda: f64,
    numerator: f64,
    denominator: f64,
    mean_to_median_k: f64,
    exact: bool,
    samples: usize,
}

fn cmd_beta(a: &BetaArgs) -> Result<Verdict, Failure> {
    let (variant, name) = match a.variant {
        Variant::Beta => (BetaVariant::Beta, "beta"),
        Variant::BetaTilde => (BetaVariant::BetaTilde, "beta_tilde"),
    };
    let family = if a.diagonal_candidates == 0 {
        TransformFamily::Scalars
    } else {
        TransformFamily::Diagonal {
            candidates: a.diagonal_candidates,
            spread: 0.5,
            seed: a.common.seed,
        }
    };
    let mut buf = csv_buffer(a);
    let mut w = csv::Writer::from_writer(&mut buf);
    for n in parse_dims(&a.n)? {
        let k = parse_norm(&a.k, n)?;
        let l = parse_norm(&a.l, n)?;
        let batch = sample(&parse_measure(&a.measure, n)?, a.common.samples, a.common.seed)?;
        let est = beta_with(&batch, &k, &l, variant, family)?;
        w.serialize(BetaRow {
            n,
            variant: name,
            value: est.value,
            lambda: est.lambda.lambda,
            numerator: est.numerator,
            denominator: est.denominator,
            mean_to_median_k: est.k_stats.mean_to_median(),
            exact: est.exact,
            samples: est.sample_count,
        })
        .map_err(csv_failure)?;
    }
    w.flush().map_err(|e| Failure::Error(e.to_string()))?;
    drop(w);
    write_output(a.common.out.as_deref(), &buf)?;
    Ok(Verdict::Pass)
}

#[derive(Serialize)]
struct MedianRow {
    n: usize,
    median: f64,
    ci_low: f64,
    ci_high: f64,
    count: usize,
}

fn cmd_median(a: &MedianArgs) -> Result<Verdict, Failure> {
    let mut buf = csv_buffer(a);
    let mut w = csv::Writer::from_writer(&mut buf);
    for n in parse_dims(&a.n)? {
        let norm = parse_norm(&a.norm, n)?;
        let batch = sample(&parse_measure(&a.measure, n)?, a.common.samples, a.common.seed)?;
        let m = empirical_median(&batch.points().map_rows(|x| norm.norm(x)))?;
        w.serialize(MedianRow {
            n,
            median: m.value,
            ci_low: m.ci_low,
            ci_high: m.ci_high,
            count: m.count,
        })
        .map_err(csv_failure)?;
    }
    w.flush().map_err(|e| Failure::Error(e.to_string()))?;
    drop(w);
    write_output(a.common.out.as_deref(), &buf)?;
    Ok(Verdict::Pass)
}

fn required_norm(flag: &str, value: &Option<String>, n: usize) -> Result<NormSpec, Failure> {
    let s = value
        .as_deref()
        .ok_or_else(|| Failure::Error(format!("this map needs --{flag}")))?;
    Ok(parse_norm(s, n)?)
}

fn cmd_pushforward(a: &PushArgs) -> Result<Verdict, Failure> {
    let measure = parse_measure(&a.measure, a.n)?;
    let map = match a.map.split_once(':') {
        None if a.map == "identity" => PushMap::Identity,
        None if a.map == "pi" => PushMap::Pi {
            k: required_norm("K", &a.k, a.n)?,
            l: required_norm("L", &a.l, a.n)?,
        },
        None if a.map == "radial" => {
            let l = required_norm("L", &a.l, a.n)?;
            let target = MeasureSpec::uniform_ball(l.clone())?;
            let u = radial_transport_with(
                &radial_cdf(&measure, &l)?,
                &radial_cdf(&target, &l)?,
                concmeter_core::transport::DEFAULT_KNOTS,
            )?;
            PushMap::Radial { u, norm: l }
        }
        Some(("scale", f)) => PushMap::Scale {
            factor: f
                .parse()
                .map_err(|_| Failure::Error(format!("bad scale factor \"{f}\"")))?,
        },
        _ => {
            return Err(Failure::Error(format!(
                "unknown map \"{}\" (expected identity, scale:F, pi or radial)",
                a.map
            )))
        }
    };
    let batch = sample(&measure, a.common.samples, a.common.seed)?;
    let image = pushforward_batch(&map, &batch)?;
    let mut buf = csv_buffer(a);
    image.image().write_csv(&mut buf)?;
    write_output(a.common.out.as_deref(), &buf)?;
    Ok(Verdict::Pass)
}

#[derive(Serialize)]
struct TransportSummary<'a> {
    #[serde(flatten)]
    args: &'a TransportArgs,
    lipschitz_u: f64,
    knots_used: usize,
}

fn cmd_transport(a: &TransportArgs) -> Result<Verdict, Failure> {
    let norm = parse_norm(&a.norm, a.n)?;
    let source = parse_measure(&a.source, a.n)?;
    let target = parse_measure(&a.target, a.n)?;
    let u = radial_transport_with(&radial_cdf(&source, &norm)?, &radial_cdf(&target, &norm)?, a.knots)?;
    let summary = TransportSummary {
        args: a,
        lipschitz_u: lipschitz_constant(&u),
        knots_used: u.knots().len(),
    };
    let mut buf = csv_buffer(&summary);
    u.write_csv(&mut buf)?;
    write_output(a.out.as_deref(), &buf)?;
    Ok(Verdict::Pass)
}
