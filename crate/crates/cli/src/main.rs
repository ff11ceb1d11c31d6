//! `minutia`: every pipeline stage as a subcommand.
//!
//! Exit codes: 0 success (or match), 1 clean non-match, 2 any error.
//! Tuning flags layer over an optional TOML config file, which layers
//! over built-in defaults.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use minutia_core::{
    binarize, evaluate, extract_from_path, extract_minutiae, match_sets, render_overlay,
    skeletonize, sweep, BinarizeConfig, DatasetManifest, Decision, EvalReport, GrayImage,
    MatchConfig, MatchResult, MinutiaeSet, PipelineConfig, SweepPoint, ThresholdMode,
};

#[derive(Parser)]
#[command(
    name = "minutia",
    version,
    about = "Fingerprint minutiae pipeline: binarize, thin, extract, match, render, evaluate"
)]
struct Cli {
    /// TOML config file; command-line flags win over its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Binarization cutoff 0-255, or 'auto' for the image mean.
    #[arg(long, global = true)]
    threshold: Option<ThresholdArg>,
    /// Boundary whitening band in pixels; doubled, it is the frame band
    /// whose terminations are discarded at extraction.
    #[arg(long, global = true)]
    margin: Option<usize>,
    /// Radial distance tolerance, pixels.
    #[arg(long, global = true)]
    r_tol: Option<f64>,
    /// Radial angle tolerance, degrees.
    #[arg(long, global = true)]
    phi_tol: Option<f64>,
    /// Orientation tolerance, degrees.
    #[arg(long, global = true)]
    theta_tol: Option<f64>,
    /// Score above which two prints count as the same finger.
    #[arg(long, global = true)]
    decision_threshold: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Threshold a grayscale PGM into a binary (ridge/background) PGM.
    Binarize { image: PathBuf, out: PathBuf },
    /// Binarize, whiten the boundary, and thin to a one-pixel skeleton.
    Thin { image: PathBuf, out: PathBuf },
    /// Extract minutiae into a CSV data matrix; prints the count.
    Extract { image: PathBuf, out: PathBuf },
    /// Score two prints; each side is a PGM image or a CSV data matrix.
    Match { template: PathBuf, input: PathBuf },
    /// Draw minutiae markers from a CSV over a grayscale image.
    Render {
        image: PathBuf,
        csv: PathBuf,
        out: PathBuf,
    },
    /// Run enrollee and imposter protocols over a dataset manifest.
    Evaluate {
        #[arg(long)]
        manifest: PathBuf,
        /// start:stop:step threshold sweep; emits CSV instead of a report.
        #[arg(long)]
        sweep: Option<String>,
        /// Write the report (or sweep CSV) here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy)]
struct ThresholdArg(ThresholdMode);

impl FromStr for ThresholdArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(ThresholdArg(ThresholdMode::Auto));
        }
        s.parse::<u8>()
            .map(|v| ThresholdArg(ThresholdMode::Fixed(v)))
            .map_err(|_| format!("must be 0-255 or 'auto', got {s:?}"))
    }
}

/// Optional keys of the TOML config file; unknown keys are rejected.
#[derive(Debug, Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    threshold: Option<TomlThreshold>,
    margin: Option<usize>,
    r_tol: Option<f64>,
    phi_tol: Option<f64>,
    theta_tol: Option<f64>,
    require_same_type: Option<bool>,
    decision_threshold: Option<f64>,
}

#[derive(Debug, serde::Deserialize)]
#[serde(untagged)]
enum TomlThreshold {
    Fixed(i64),
    Named(String),
}

impl TomlThreshold {
    fn to_mode(&self) -> anyhow::Result<ThresholdMode> {
        match self {
            TomlThreshold::Fixed(v) if (0..=255).contains(v) => Ok(ThresholdMode::Fixed(*v as u8)),
            TomlThreshold::Fixed(v) => anyhow::bail!("threshold {v} out of range 0-255"),
            TomlThreshold::Named(s) if s.eq_ignore_ascii_case("auto") => Ok(ThresholdMode::Auto),
            TomlThreshold::Named(s) => {
                anyhow::bail!("threshold must be 0-255 or \"auto\", got {s:?}")
            }
        }
    }
}

struct Settings {
    pipeline: PipelineConfig,
    matching: MatchConfig,
}

fn settings(cli: &Cli) -> anyhow::Result<Settings> {
    let file: FileConfig = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?
        }
        None => FileConfig::default(),
    };
    let mut pipeline = PipelineConfig::default();
    let mut matching = MatchConfig::default();
    if let Some(t) = &file.threshold {
        pipeline.threshold = t.to_mode()?;
    }
    if let Some(m) = file.margin {
        pipeline.margin = m;
    }
    if let Some(v) = file.r_tol {
        matching.r_tol = v;
    }
    if let Some(v) = file.phi_tol {
        matching.phi_tol = v;
    }
    if let Some(v) = file.theta_tol {
        matching.theta_tol = v;
    }
    if let Some(v) = file.require_same_type {
        matching.require_same_type = v;
    }
    if let Some(v) = file.decision_threshold {
        matching.decision_threshold = v;
    }
    let o = &cli.overrides;
    if let Some(t) = o.threshold {
        pipeline.threshold = t.0;
    }
    if let Some(m) = o.margin {
        pipeline.margin = m;
    }
    if let Some(v) = o.r_tol {
        matching.r_tol = v;
    }
    if let Some(v) = o.phi_tol {
        matching.phi_tol = v;
    }
    if let Some(v) = o.theta_tol {
        matching.theta_tol = v;
    }
    if let Some(v) = o.decision_threshold {
        matching.decision_threshold = v;
    }
    for (name, v) in [
        ("r-tol", matching.r_tol),
        ("phi-tol", matching.phi_tol),
        ("theta-tol", matching.theta_tol),
    ] {
        if v.is_nan() || v < 0.0 {
            anyhow::bail!("{name} must be nonnegative, got {v}");
        }
    }
    if !matching.decision_threshold.is_finite() {
        anyhow::bail!("decision-threshold must be finite");
    }
    Ok(Settings { pipeline, matching })
}

/// Single-line, key-sorted JSON so outputs diff cleanly.
fn match_json(res: &MatchResult) -> String {
    serde_json::json!({
        "decision": if res.decision == Decision::Match { "match" } else { "non_match" },
        "matched": res.matched_count,
        "ni": res.ni,
        "nt": res.nt,
        "ref_pair": [res.best_ref_pair.0, res.best_ref_pair.1],
        "score": res.score,
    })
    .to_string()
}

fn report_json(report: &EvalReport) -> anyhow::Result<String> {
    Ok(serde_json::to_value(report)
        .context("serializing report")?
        .to_string())
}

fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("threshold,fmr,fnmr\n");
    for p in points {
        let _ = writeln!(out, "{},{},{}", p.threshold, p.fmr, p.fnmr);
    }
    out
}

fn parse_sweep(spec: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, step] = parts[..] else {
        anyhow::bail!("sweep must be start:stop:step, got {spec:?}");
    };
    let (start, stop, step): (f64, f64, f64) = (
        start.parse().context("sweep start")?,
        stop.parse().context("sweep stop")?,
        step.parse().context("sweep step")?,
    );
    if !start.is_finite() || !stop.is_finite() || step.is_nan() || step <= 0.0 || stop < start {
        anyhow::bail!("invalid sweep range {spec:?}");
    }
    let mut out = Vec::new();
    for k in 0.. {
        let t = start + k as f64 * step;
        if t > stop + step * 1e-9 {
            break;
        }
        out.push(t);
        if out.len() > 100_000 {
            anyhow::bail!("sweep {spec:?} has over 100000 points");
        }
    }
    Ok(out)
}

fn run(cli: &Cli) -> anyhow::Result<ExitCode> {
    let settings = settings(cli)?;
    match &cli.command {
        Command::Binarize { image, out } => {
            let img = GrayImage::load(image)?;
            let cfg = match settings.pipeline.threshold {
                ThresholdMode::Fixed(t) => BinarizeConfig { threshold: t },
                ThresholdMode::Auto => BinarizeConfig::auto(&img),
            };
            binarize(&img, &cfg).save(out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Thin { image, out } => {
            let img = GrayImage::load(image)?;
            skeletonize(&img, &settings.pipeline)?.save(out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Extract { image, out } => {
            let img = GrayImage::load(image)?;
            let set = extract_minutiae(&img, &settings.pipeline)?;
            set.write_data_matrix(out)?;
            println!("{}", set.len());
            Ok(ExitCode::SUCCESS)
        }
        Command::Match { template, input } => {
            let tpl = extract_from_path(template, &settings.pipeline)
                .with_context(|| format!("template {}", template.display()))?;
            let inp = extract_from_path(input, &settings.pipeline)
                .with_context(|| format!("input {}", input.display()))?;
            let res = match_sets(&tpl, &inp, &settings.matching)?;
            println!("{}", match_json(&res));
            Ok(if res.decision == Decision::Match {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Render { image, csv, out } => {
            let img = GrayImage::load(image)?;
            let set = MinutiaeSet::load_data_matrix(csv)?;
            render_overlay(&img, &set, out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Evaluate {
            manifest,
            sweep: sweep_spec,
            out,
        } => {
            let manifest = DatasetManifest::load(manifest)?;
            let text = match sweep_spec {
                Some(spec) => {
                    let thresholds = parse_sweep(spec)?;
                    let points = sweep(
                        &manifest,
                        &settings.matching,
                        &settings.pipeline,
                        &thresholds,
                    )?;
                    sweep_csv(&points)
                }
                None => {
                    report_json(&evaluate(
                        &manifest,
                        &settings.matching,
                        &settings.pipeline,
                    )?)? + "\n"
                }
            };
            match out {
                Some(path) => std::fs::write(path, &text)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
