//! Command-line front end: dataset generation, clustering with kernel
//! parameter selection, metric evaluation, and curve emission.
//!
//! All randomness flows from the `--seed` flag; CSV outputs are
//! byte-identical across reruns with identical flags. The JSON run report
//! additionally records wall-clock timings, so it is not byte-stable.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::data::{standardize, Dataset};
use crate::error::{Error, Result};
use crate::generate;
use crate::io;
use crate::kmeans::kmeans;
use crate::lsmi::CvGrid;
use crate::metrics::{adjusted_rand_index, rand_index, Labeling};
use crate::select::{smic_with_model_selection, FailedCandidate};

#[derive(Debug, Parser)]
#[command(
    name = "smic",
    about = "Information-maximization clustering with analytic solutions and unsupervised kernel parameter selection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a standardized synthetic dataset as CSV.
    Generate(GenerateArgs),
    /// Cluster a CSV dataset, selecting the kernel parameter by LSMI.
    Cluster(ClusterArgs),
    /// Compare two label files with Rand index and adjusted Rand index.
    Eval(EvalArgs),
    /// Emit the per-candidate LSMI curve as CSV.
    SweepCurve(SweepArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Dataset family: blobs, circle, spirals, or highlow.
    pub name: String,
    /// Sample count.
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Comma-separated class priors, or "uniform".
    #[arg(long, default_value = "uniform")]
    pub priors: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Write a header row (x1,...,xd,label).
    #[arg(long)]
    pub header: bool,
}

/// Options shared by `cluster` and `sweep-curve`.
#[derive(Debug, Args)]
pub struct SelectionArgs {
    /// Input CSV path.
    pub input: PathBuf,
    /// Number of clusters.
    #[arg(long)]
    pub c: usize,
    /// The first input row is a header.
    #[arg(long)]
    pub header: bool,
    /// The final input column holds 1-based ground-truth labels (implied
    /// by a `label` header column).
    #[arg(long)]
    pub labeled: bool,
    /// Standardize the input before clustering.
    #[arg(long)]
    pub standardize: bool,
    /// Kernel parameter candidates: "lo..hi" or a comma list. Default 1..10.
    #[arg(long = "t-candidates")]
    pub t_candidates: Option<String>,
    /// Single kernel parameter candidate (overrides --t-candidates).
    #[arg(long)]
    pub t: Option<usize>,
    /// Comma-separated cluster priors, or "uniform".
    #[arg(long, default_value = "uniform")]
    pub priors: String,
    /// Comma-separated Gaussian width candidates for LSMI.
    #[arg(long = "gamma-grid")]
    pub gamma_grid: Option<String>,
    /// Comma-separated regularization candidates for LSMI.
    #[arg(long = "delta-grid")]
    pub delta_grid: Option<String>,
    /// Cross-validation folds.
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Per-class cap on LSMI kernel bases.
    #[arg(long = "basis-cap", default_value_t = 200)]
    pub basis_cap: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub selection: SelectionArgs,
    /// Also run a baseline ("kmeans") and report its metrics.
    #[arg(long)]
    pub baseline: Option<String>,
    /// Output CSV of cluster assignments, one label per row.
    #[arg(long)]
    pub out: PathBuf,
    /// Report JSON path (default: <out>.report.json).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Predicted labels (single column, or a CSV whose last column is the label).
    pub pred: PathBuf,
    /// Ground-truth labels, same formats.
    pub truth: PathBuf,
    /// Optional JSON output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub selection: SelectionArgs,
    /// Output CSV path for `t,lsmi,selected` rows.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
pub struct CurvePoint {
    pub t: usize,
    pub lsmi: f64,
    pub selected: bool,
}

#[derive(Debug, Serialize)]
pub struct BaselineReport {
    pub method: String,
    pub distortion: f64,
    pub restarts: usize,
    pub ari: Option<f64>,
    pub ri: Option<f64>,
    pub wall_ms: u128,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub input: String,
    pub n: usize,
    pub d: usize,
    pub c: usize,
    pub seed: u64,
    pub selected_t: usize,
    pub selected_gamma: f64,
    pub selected_delta: f64,
    pub lsmi_curve: Vec<CurvePoint>,
    pub failed_candidates: Vec<FailedCandidate>,
    pub standardized_input: bool,
    pub ari: Option<f64>,
    pub ri: Option<f64>,
    pub wall_ms: u128,
    pub baseline: Option<BaselineReport>,
}

/// Caps the rayon pool when SMIC_THREADS is set. Safe to call repeatedly;
/// only the first global pool wins.
pub fn init_threads_from_env() {
    if let Ok(raw) = std::env::var("SMIC_THREADS") {
        if let Ok(k) = raw.trim().parse::<usize>() {
            if k >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build_global();
            }
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(args) => run_generate(&args),
        Command::Cluster(args) => run_cluster(&args).map(|_| ()),
        Command::Eval(args) => run_eval(&args).map(|_| ()),
        Command::SweepCurve(args) => run_sweep(&args),
    }
}

fn parse_priors(raw: &str, c: usize) -> Result<Option<Vec<f64>>> {
    if raw.trim() == "uniform" {
        return Ok(None);
    }
    let values: Vec<f64> = raw
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidPrior(format!("bad prior {tok:?}")))
        })
        .collect::<Result<_>>()?;
    if values.len() != c {
        return Err(Error::InvalidPrior(format!(
            "expected {c} priors, got {}",
            values.len()
        )));
    }
    Ok(Some(values))
}

fn parse_t_candidates(args: &SelectionArgs) -> Result<Vec<usize>> {
    if let Some(t) = args.t {
        return Ok(vec![t]);
    }
    let raw = args.t_candidates.as_deref().unwrap_or("1..10");
    let raw = raw.trim();
    if let Some((lo, hi)) = raw.split_once("..") {
        let lo: usize = lo
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad range start {lo:?}")))?;
        let hi: usize = hi
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad range end {hi:?}")))?;
        if lo > hi {
            return Err(Error::InvalidArgument(format!("empty range {raw:?}")));
        }
        return Ok((lo..=hi).collect());
    }
    raw.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidArgument(format!("bad candidate {tok:?}")))
        })
        .collect()
}

fn parse_grid_values(raw: &str, name: &str) -> Result<Vec<f64>> {
    let mut values: Vec<f64> = raw
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad {name} value {tok:?}")))
        })
        .collect::<Result<_>>()?;
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite grid values"));
    Ok(values)
}

fn build_grid(args: &SelectionArgs) -> Result<CvGrid> {
    let mut grid = CvGrid {
        folds: args.folds,
        basis_cap: args.basis_cap,
        ..CvGrid::default()
    };
    if let Some(raw) = &args.gamma_grid {
        grid.gamma_candidates = parse_grid_values(raw, "gamma")?;
    }
    if let Some(raw) = &args.delta_grid {
        grid.delta_candidates = parse_grid_values(raw, "delta")?;
    }
    grid.validate()?;
    Ok(grid)
}

fn load_input(args: &SelectionArgs) -> Result<Dataset> {
    let data = io::read_dataset_csv(&args.input, args.header, args.labeled)?;
    if args.standardize {
        standardize(&data)
    } else {
        Ok(data)
    }
}

pub fn run_generate(args: &GenerateArgs) -> Result<()> {
    let c = match args.name.as_str() {
        "blobs" => 4,
        "circle" | "spirals" | "highlow" => 2,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown dataset {other:?} (expected blobs, circle, spirals, or highlow)"
            )))
        }
    };
    let priors = parse_priors(&args.priors, c)?;
    let priors = priors.unwrap_or_else(|| generate::uniform_priors(c));
    let data = match args.name.as_str() {
        "blobs" => generate::gen_four_blobs(args.n, &priors, args.seed)?,
        "circle" => generate::gen_circle_gaussian(args.n, &priors, args.seed)?,
        "spirals" => generate::gen_double_spirals(args.n, &priors, args.seed)?,
        _ => generate::gen_high_low(args.n, &priors, args.seed)?,
    };
    let data = standardize(&data)?;
    io::write_dataset_csv(&args.out, &data, args.header)?;
    println!(
        "wrote {} ({} samples, {} features, {} classes) to {}",
        data.name(),
        data.n(),
        data.d(),
        data.n_classes().unwrap_or(0),
        args.out.display()
    );
    Ok(())
}

fn metrics_against(truth: &Labeling, predicted: &Labeling) -> Result<(f64, f64)> {
    Ok((
        rand_index(predicted, truth)?,
        adjusted_rand_index(predicted, truth)?,
    ))
}

pub fn run_cluster(args: &ClusterArgs) -> Result<RunReport> {
    let sel = &args.selection;
    let data = load_input(sel)?;
    if data.n() < sel.c {
        return Err(Error::InvalidArgument(format!(
            "{} samples cannot form {} clusters",
            data.n(),
            sel.c
        )));
    }
    let ts = parse_t_candidates(sel)?;
    let priors = parse_priors(&sel.priors, sel.c)?;
    let grid = build_grid(sel)?;

    let started = Instant::now();
    let outcome =
        smic_with_model_selection(&data, sel.c, &ts, priors.as_deref(), &grid, sel.seed)?;
    let wall_ms = started.elapsed().as_millis();
    let report = &outcome.report;
    if !report.standardized_input {
        eprintln!("warning: input does not look standardized; consider --standardize");
    }

    let truth = data
        .labels()
        .map(|ls| Labeling::from_assignments(ls.to_vec()))
        .transpose()?;
    let (mut ri, mut ari) = (None, None);
    if let Some(truth) = &truth {
        let (r, a) = metrics_against(truth, &report.labeling)?;
        ri = Some(r);
        ari = Some(a);
    }

    let baseline = match args.baseline.as_deref() {
        None => None,
        Some("kmeans") => {
            let kstart = Instant::now();
            let result = kmeans(&data, sel.c, 100, 300, sel.seed)?;
            let (mut kri, mut kari) = (None, None);
            if let Some(truth) = &truth {
                let (r, a) = metrics_against(truth, &result.labeling)?;
                kri = Some(r);
                kari = Some(a);
            }
            Some(BaselineReport {
                method: "kmeans".into(),
                distortion: result.distortion,
                restarts: result.restarts_used,
                ari: kari,
                ri: kri,
                wall_ms: kstart.elapsed().as_millis(),
            })
        }
        Some(other) => {
            return Err(Error::InvalidArgument(format!(
                "unknown baseline {other:?} (expected kmeans)"
            )))
        }
    };

    io::write_labels_csv(&args.out, report.labeling.assignments())?;
    let selected = report
        .candidates
        .iter()
        .find(|cand| cand.t == report.selected_t)
        .expect("selected candidate exists");
    let run_report = RunReport {
        input: sel.input.display().to_string(),
        n: data.n(),
        d: data.d(),
        c: sel.c,
        seed: sel.seed,
        selected_t: report.selected_t,
        selected_gamma: selected.gamma,
        selected_delta: selected.delta,
        lsmi_curve: report
            .curve()
            .into_iter()
            .map(|(t, lsmi, selected)| CurvePoint { t, lsmi, selected })
            .collect(),
        failed_candidates: report.failures.clone(),
        standardized_input: report.standardized_input,
        ari,
        ri,
        wall_ms,
        baseline,
    };
    let report_path = args
        .report
        .clone()
        .unwrap_or_else(|| report_path_for(&args.out));
    std::fs::write(&report_path, serde_json::to_string_pretty(&run_report)?)?;

    print!(
        "clustered {} samples into {} clusters: t={} lsmi={:.6}",
        run_report.n, run_report.c, run_report.selected_t, selected.lsmi
    );
    match run_report.ari {
        Some(a) => println!(" ari={a:.4}"),
        None => println!(),
    }
    println!(
        "labels -> {}, report -> {}",
        args.out.display(),
        report_path.display()
    );
    Ok(run_report)
}

fn report_path_for(labels_out: &Path) -> PathBuf {
    let mut name = labels_out.file_name().unwrap_or_default().to_os_string();
    name.push(".report.json");
    labels_out.with_file_name(name)
}

pub fn run_eval(args: &EvalArgs) -> Result<(f64, f64)> {
    let pred = io::read_labels_csv(&args.pred)?;
    let truth = io::read_labels_csv(&args.truth)?;
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch(pred.len(), truth.len()));
    }
    let pred = Labeling::from_assignments(pred)?;
    let truth = Labeling::from_assignments(truth)?;
    let ri = rand_index(&pred, &truth)?;
    let ari = adjusted_rand_index(&pred, &truth)?;
    println!("RI  {ri:.4}");
    println!("ARI {ari:.4}");
    if let Some(out) = &args.out {
        let doc = serde_json::json!({ "ri": ri, "ari": ari });
        std::fs::write(out, serde_json::to_string_pretty(&doc)?)?;
    }
    Ok((ri, ari))
}

pub fn run_sweep(args: &SweepArgs) -> Result<()> {
    let sel = &args.selection;
    let data = load_input(sel)?;
    let ts = parse_t_candidates(sel)?;
    let priors = parse_priors(&sel.priors, sel.c)?;
    let grid = build_grid(sel)?;
    let outcome =
        smic_with_model_selection(&data, sel.c, &ts, priors.as_deref(), &grid, sel.seed)?;
    io::write_curve_csv(&args.out, &outcome.report.curve())?;
    println!(
        "selected t={} over {} candidates; curve -> {}",
        outcome.report.selected_t,
        outcome.report.candidates.len(),
        args.out.display()
    );
    Ok(())
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::InvalidArgument(format!("serialization failed: {err}"))
    }
}
