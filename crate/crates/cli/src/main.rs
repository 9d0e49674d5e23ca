use std::path::PathBuf;
use std::time::{Duration, Instant};

use attest::{Strategy, TamperSpec};
use clap::{Parser, Subcommand};
use cli::bundle::Bundle;
use cli::driver::{
    self, bench_protocols, load_images, load_labels, quantize_inputs, run_3pc_batch,
    run_malicious_batch, run_plaintext_batch, TransportKind,
};
use cli::report::Report;
use cli::{exit_code, CliError, Result};
use model_compiler::{
    count_scaledown, liveness, load_model, lower, predict_fixed, relu_maxpool_switch, scale_sweep,
    FixedConfig, FloatModel, RhoMode,
};
use threepc::{ProtoError, Role};

#[derive(Parser)]
#[command(name = "harness", about = "Compile, run, and benchmark secure three-party inference")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compile a float model to a fixed-point bundle.
    Compile {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Fixed scale exponent; omit with --sweep to pick one by validation.
        #[arg(long)]
        scale: Option<u32>,
        /// Sweep all scales on a validation slice and keep the most accurate.
        #[arg(long)]
        sweep: bool,
        #[arg(long)]
        images: Option<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Validation images used by --sweep.
        #[arg(long, default_value_t = 20)]
        sweep_count: usize,
    },
    /// Run inference from a compiled bundle.
    Run {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        images: PathBuf,
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Number of images to run (default: all in the file).
        #[arg(long)]
        count: Option<usize>,
        /// plaintext | 3pc | malicious
        #[arg(long, default_value = "plaintext")]
        mode: String,
        /// inproc | tcp (3pc mode)
        #[arg(long, default_value = "inproc")]
        transport: String,
        #[arg(long, default_value = "session-seed")]
        seed: String,
        /// Images per parallel session in 3pc mode.
        #[arg(long, default_value_t = 25)]
        chunk: usize,
        /// Write the metrics report here instead of stdout.
        #[arg(long)]
        metrics: Option<PathBuf>,
        /// Adversary strategy for malicious mode (e.g. bit-flip, drop).
        #[arg(long)]
        tamper: Option<String>,
        /// Directed channel to corrupt, e.g. p0->p2.
        #[arg(long, default_value = "p0->p2")]
        tamper_channel: String,
        /// Frame index to corrupt on that channel.
        #[arg(long, default_value_t = 0)]
        tamper_frame: usize,
        #[arg(long, default_value_t = 10_000)]
        timeout_ms: u64,
    },
    /// Meter every protocol against its closed-form communication formula.
    Bench {
        #[arg(long, default_value = "bench-seed")]
        seed: String,
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
}

fn parse_role(s: &str) -> Result<Role> {
    match s {
        "p0" => Ok(Role::P0),
        "p1" => Ok(Role::P1),
        "p2" => Ok(Role::P2),
        _ => Err(CliError::Invalid(format!("unknown role {s:?}"))),
    }
}

fn parse_tamper(strategy: &str, channel: &str, frame: usize) -> Result<TamperSpec> {
    let strategy = Strategy::ALL
        .into_iter()
        .find(|s| s.name() == strategy)
        .ok_or_else(|| CliError::Invalid(format!("unknown tamper strategy {strategy:?}")))?;
    let (from, to) = channel
        .split_once("->")
        .ok_or_else(|| CliError::Invalid(format!("channel {channel:?}; want e.g. p0->p2")))?;
    Ok(TamperSpec {
        from: parse_role(from)?,
        to: parse_role(to)?,
        frame_index: frame,
        strategy,
    })
}

fn emit(report: &Report, path: &Option<PathBuf>) -> Result<()> {
    let json = serde_json::to_string_pretty(report)?;
    match path {
        Some(p) => std::fs::write(p, json)?,
        None => println!("{json}"),
    }
    Ok(())
}

fn compile(
    graph: PathBuf,
    weights: PathBuf,
    out: PathBuf,
    scale: Option<u32>,
    sweep: bool,
    images: Option<PathBuf>,
    labels: Option<PathBuf>,
    sweep_count: usize,
) -> Result<()> {
    let loaded = load_model(&graph, &weights)?;
    let model = FloatModel {
        graph: relu_maxpool_switch(&loaded.graph),
        weights: loaded.weights,
    };
    let (s, table) = match (scale, sweep) {
        (Some(s), false) => (s, None),
        (None, true) => {
            let (ipath, lpath) = images.zip(labels).ok_or_else(|| {
                CliError::Invalid("--sweep needs --images and --labels".into())
            })?;
            let dims = model.graph.dims(&model.graph.input)?.to_vec();
            let imgs = load_images(&ipath, &dims, Some(sweep_count))?;
            let labs = load_labels(&lpath, Some(sweep_count))?;
            let validation: Vec<_> = imgs.into_iter().zip(labs).collect();
            let result = scale_sweep(&model, &validation)?;
            (result.best_s, Some(result.table))
        }
        _ => {
            return Err(CliError::Invalid(
                "pass exactly one of --scale or --sweep".into(),
            ))
        }
    };
    let fixed = lower(&model, FixedConfig::new(s)?, RhoMode::Checked)?;
    let scaledown = count_scaledown(&fixed.graph)?;
    let weight_names = fixed.weights.keys().cloned().collect();
    let live = liveness(&fixed.graph, &weight_names)?;
    Bundle::from_model(&fixed, table).save(&out)?;
    println!(
        "compiled {} statements at scale {s}; {scaledown} rescaled elements; \
         peak live {} of {} bytes; bundle {}",
        fixed.graph.stmts.len(),
        live.peak_bytes,
        live.total_bytes,
        out.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run(
    bundle: PathBuf,
    images: PathBuf,
    labels: Option<PathBuf>,
    count: Option<usize>,
    mode: String,
    transport: String,
    seed: String,
    chunk: usize,
    metrics: Option<PathBuf>,
    tamper: Option<String>,
    tamper_channel: String,
    tamper_frame: usize,
    timeout_ms: u64,
) -> Result<()> {
    let start = Instant::now();
    let model = Bundle::load(&bundle)?.to_model()?;
    let dims = model.graph.dims(&model.graph.input)?.to_vec();
    let imgs = load_images(&images, &dims, count)?;
    let inputs = quantize_inputs(&imgs, model.config.s)?;
    let kind = TransportKind::parse(&transport)
        .ok_or_else(|| CliError::Invalid(format!("unknown transport {transport:?}")))?;
    let seed16 = driver::derive_seed(&seed);
    let mut report = Report::default();
    report.phase("load", start.elapsed());

    let run_start = Instant::now();
    let outputs = match mode.as_str() {
        "plaintext" => run_plaintext_batch(&model, &inputs)?,
        "3pc" => {
            let (outs, m) = run_3pc_batch(&model, &inputs, &seed16, kind, chunk)?;
            report.add_metrics(&m);
            outs
        }
        "malicious" => {
            let spec = tamper
                .map(|s| parse_tamper(&s, &tamper_channel, tamper_frame))
                .transpose()?;
            let outcome = run_malicious_batch(
                &model,
                &inputs,
                &seed16,
                spec,
                Duration::from_millis(timeout_ms),
            )?;
            if !outcome.completed() {
                let timeouts_only = outcome.aborts.iter().all(|a| a.check == "timeout");
                let detail = serde_json::to_string(&outcome.aborts)?;
                return Err(CliError::Proto(if timeouts_only && !outcome.aborts.is_empty() {
                    ProtoError::Timeout(detail)
                } else {
                    ProtoError::Abort(detail)
                }));
            }
            let (outs, ms) = driver::malicious_outputs(&model, outcome)?;
            report.add_metrics(&driver::merge_metrics(&ms));
            outs
        }
        other => return Err(CliError::Invalid(format!("unknown mode {other:?}"))),
    };
    report.phase("run", run_start.elapsed());
    report.phase("total", start.elapsed());

    report.predictions = outputs
        .iter()
        .map(|o| predict_fixed(&model, o) as i64)
        .collect();
    if let Some(lpath) = labels {
        let labs = load_labels(&lpath, Some(outputs.len()))?;
        let hits = report
            .predictions
            .iter()
            .zip(&labs)
            .filter(|(&p, &l)| p as usize == l)
            .count();
        report.accuracy = Some(hits as f64 / labs.len() as f64);
    }
    emit(&report, &metrics)
}

fn bench(seed: String, metrics: Option<PathBuf>) -> Result<()> {
    let start = Instant::now();
    let entries = bench_protocols(&driver::derive_seed(&seed))?;
    let mut report = Report::default();
    for (name, e) in &entries {
        report.residuals.insert(name.clone(), e.residual());
        report.per_op_bytes.insert(name.clone(), e.measured);
        println!(
            "{name:24} measured {:>8} B  formula {:>8} B  residual {}",
            e.measured,
            e.formula,
            e.residual()
        );
    }
    report.phase("total", start.elapsed());
    emit(&report, &metrics)
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Compile {
            graph,
            weights,
            out,
            scale,
            sweep,
            images,
            labels,
            sweep_count,
        } => compile(graph, weights, out, scale, sweep, images, labels, sweep_count),
        Cmd::Run {
            bundle,
            images,
            labels,
            count,
            mode,
            transport,
            seed,
            chunk,
            metrics,
            tamper,
            tamper_channel,
            tamper_frame,
            timeout_ms,
        } => run(
            bundle,
            images,
            labels,
            count,
            mode,
            transport,
            seed,
            chunk,
            metrics,
            tamper,
            tamper_channel,
            tamper_frame,
            timeout_ms,
        ),
        Cmd::Bench { seed, metrics } => bench(seed, metrics),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}
