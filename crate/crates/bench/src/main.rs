use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ordershap_bench::config::load_configs;
use ordershap_bench::experiments::{run_accuracy_experiment, run_convergence_experiment, run_timing_experiment, write_csv};
use ordershap_bench::io::{read_baseline_file, read_dataset_file, write_shap, ShapRow};
use ordershap_bench::plot::{line_svg, scatter_svg, Series};
use ordershap_bench::{build_simulation_model, generate_dataset, make_baseline, BaselineKind, ModelId};
use ordershap_core::{decompose_polynomial, explain_batch, parse_model_spec, serialize_model_spec, CostVariant, Method};

#[derive(Parser)]
#[command(name = "ordershap", version, about = "Exact SHAP from model structure, plus benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Explain every row of a data CSV and write a SHAP CSV.
    Explain(ExplainArgs),
    /// Run experiments from a JSON config.
    Bench {
        #[arg(value_enum)]
        kind: BenchKind,
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `out_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Keep all work on one thread.
        #[arg(long)]
        serial: bool,
    },
    /// Render an accuracy or convergence CSV as SVG.
    Plot {
        #[arg(value_enum)]
        kind: PlotKind,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write one of the simulation models as a model-spec JSON.
    GenModel {
        #[arg(long)]
        model: ModelId,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 10)]
        p: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write an N(0, 1) dataset as CSV.
    GenData {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchKind {
    Accuracy,
    Convergence,
    Timing,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotKind {
    Scatter,
    Convergence,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum BaselineArg {
    Mean,
    P975,
    File,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Fdcmp,
    Orderk,
    Iterative,
    Sampling,
    Exact,
}

#[derive(Args)]
struct ExplainArgs {
    /// Model-spec JSON.
    #[arg(long)]
    model: PathBuf,
    /// Instances to explain, one per row.
    #[arg(long)]
    data: PathBuf,
    /// Baseline point; `mean` and `p975` are computed from `--data`.
    #[arg(long, value_enum, default_value = "mean")]
    baseline: BaselineArg,
    /// One-row CSV, used with `--baseline file`.
    #[arg(long)]
    baseline_file: Option<PathBuf>,
    /// Background CSV; switches to the empirical kernel cost.
    #[arg(long, conflicts_with_all = ["baseline", "baseline_file"])]
    background: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-4)]
    threshold: f64,
    #[arg(long, default_value_t = 10)]
    max_order: usize,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Keep all model calls on one thread.
    #[arg(long)]
    serial: bool,
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Explain(args) => explain(args),
        Command::Bench { kind, config, out, serial } => bench(kind, &config, out, !serial),
        Command::Plot { kind, input, out } => plot(kind, &input, &out),
        Command::GenModel { model, alpha, p, out } => {
            let m = build_simulation_model(model, alpha, p)?;
            emit(out.as_deref(), serialize_model_spec(&m).as_bytes())
        }
        Command::GenData { p, n, seed, out } => {
            let d = generate_dataset(p, n, seed)?;
            let mut buf = Vec::new();
            {
                let mut w = csv::Writer::from_writer(&mut buf);
                w.write_record((0..p).map(|j| format!("x{j}")))?;
                for row in d.rows() {
                    w.write_record(row.iter().map(|v| v.to_string()))?;
                }
                w.flush()?;
            }
            emit(out.as_deref(), &buf)
        }
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => Ok(std::io::stdout().write_all(bytes)?),
    }
}

fn explain(args: ExplainArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.model).with_context(|| format!("reading {}", args.model.display()))?;
    let model = parse_model_spec(&text).context("parsing model spec")?;
    let data = read_dataset_file(&args.data)?;
    if data.p() != model.p() {
        bail!("model has {} features but data has {} columns", model.p(), data.p());
    }
    let variant = match (&args.background, args.baseline) {
        (Some(path), _) => CostVariant::KernelEmpirical(read_dataset_file(path)?),
        (None, BaselineArg::Mean) => CostVariant::Baseline(make_baseline(&data, BaselineKind::Mean)?),
        (None, BaselineArg::P975) => CostVariant::Baseline(make_baseline(&data, BaselineKind::Percentile975)?),
        (None, BaselineArg::File) => {
            let path = args.baseline_file.as_ref().context("--baseline file needs --baseline-file")?;
            CostVariant::Baseline(read_baseline_file(path)?)
        }
    };
    if args.baseline_file.is_some() && args.baseline != BaselineArg::File {
        bail!("--baseline-file needs --baseline file");
    }
    let method = match args.method {
        MethodArg::Fdcmp => Method::Decomposition,
        MethodArg::Orderk => Method::OrderK { order: args.order.unwrap_or_else(|| model.order().max(1)) },
        MethodArg::Iterative => Method::Iterative { max_order: args.max_order, threshold: args.threshold },
        MethodArg::Sampling => Method::Sampling { samples: args.samples, seed: args.seed },
        MethodArg::Exact => Method::Exact,
    };
    let structure = matches!(method, Method::Decomposition).then(|| decompose_polynomial(&model));
    let out = explain_batch(&model, structure.as_ref(), &variant, &data, &method, !args.serial)?;
    let rows: Vec<ShapRow> = out
        .attributions
        .into_iter()
        .map(|a| ShapRow { phi: a.phi, order_used: a.order_used, converged: a.converged })
        .collect();
    match &args.out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_shap(BufWriter::new(file), model.p(), &rows)?;
        }
        None => write_shap(std::io::stdout().lock(), model.p(), &rows)?,
    }
    Ok(())
}

fn bench(kind: BenchKind, config: &Path, out: Option<PathBuf>, parallel: bool) -> Result<()> {
    for c in load_configs(config)? {
        let dir = out.clone().or_else(|| c.out_dir.clone()).unwrap_or_else(|| PathBuf::from("results"));
        let stem = format!("{}_p{}_{}", c.label(), c.p, c.baseline.label());
        match kind {
            BenchKind::Accuracy => {
                let report = run_accuracy_experiment(&c, parallel)?;
                write_csv(&dir.join(format!("accuracy_{stem}.csv")), &report.rows)?;
                write_csv(&dir.join(format!("accuracy_summary_{stem}.csv")), &report.summary)?;
                for s in &report.summary {
                    println!(
                        "{} {} {:<28} rmse={:.3e} rmse_interaction={:.3e} evals={}",
                        s.model, s.baseline, s.method, s.rmse, s.rmse_interaction, s.eval_count
                    );
                }
            }
            BenchKind::Convergence => {
                let rows = run_convergence_experiment(&c, parallel)?;
                write_csv(&dir.join(format!("convergence_{stem}.csv")), &rows)?;
                for r in &rows {
                    println!("{} {} order={} metric={:.3e}", r.model, r.baseline, r.order, r.relative_difference);
                }
            }
            BenchKind::Timing => {
                let rows = run_timing_experiment(&c)?;
                write_csv(&dir.join(format!("timing_{stem}.csv")), &rows)?;
                for r in &rows {
                    println!(
                        "{} p={} {:<28} {:.4}s evals/instance={} term_evals={}",
                        r.model, r.p, r.method, r.seconds, r.evals_per_instance, r.term_evals
                    );
                }
            }
        }
    }
    Ok(())
}

fn plot(kind: PlotKind, input: &Path, out: &Path) -> Result<()> {
    let mut rdr = csv::Reader::from_path(input).with_context(|| format!("reading {}", input.display()))?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name).with_context(|| format!("missing column {name}"));
    let mut groups: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    let title;
    let svg = match kind {
        PlotKind::Scatter => {
            let (m, t, e) = (col("method")?, col("true_phi")?, col("estimated_phi")?);
            for rec in rdr.records() {
                let rec = rec?;
                groups.entry(rec[m].to_string()).or_default().push((rec[t].parse()?, rec[e].parse()?));
            }
            title = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            scatter_svg(&title, &to_series(groups))
        }
        PlotKind::Convergence => {
            let (m, b, k, d) = (col("model")?, col("baseline")?, col("order")?, col("relative_difference")?);
            for rec in rdr.records() {
                let rec = rec?;
                let key = format!("{} {}", &rec[m], &rec[b]);
                groups.entry(key).or_default().push((rec[k].parse()?, rec[d].parse()?));
            }
            line_svg("convergence to exact SHAP", "order", "relative difference", &to_series(groups), true)
        }
    };
    std::fs::write(out, svg).with_context(|| format!("writing {}", out.display()))
}

fn to_series(groups: BTreeMap<String, Vec<(f64, f64)>>) -> Vec<Series> {
    groups.into_iter().map(|(name, points)| Series { name, points }).collect()
}
