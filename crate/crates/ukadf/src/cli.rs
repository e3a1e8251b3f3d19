//! The `ukadf` subcommands.
//!
//! Every failure prints one line `error: <class>: <message>` on stderr and
//! exits with 2 (usage), 3 (data), 4 (artifact) or 5 (numerical).

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use ukadf_core::artifact::ArtifactMetadata;
use ukadf_core::data::{pearson_matrix, synth_generate, SplitFractions, SynthConfig};
use ukadf_core::metrics::{MaskPolicy, MetricReport};
use ukadf_core::models::{reference_loss_weights, Mode, VariantKind};
use ukadf_core::train::{grid_range, RunConfig, RunResult};
use ukadf_core::verify::{gradient_suite, GRAD_TOLERANCE};

use crate::artifact_io::{load_artifact, save_artifact};
use crate::csv_io::{load_csv, read_table_file, save_csv, write_table};
use crate::report::{sweep_csv, sweep_summary, write_run, write_sweep, write_trace};
use crate::{runner, Error, Result};

#[derive(Debug, Parser)]
#[command(name = "ukadf", version, about = "Demand forecasting with unsupervised knowledge adaptation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write synthetic multimodal demand, one CSV per mode.
    Synth(SynthArgs),
    /// Train the source network and export its recurrent cell.
    Pretrain(PretrainArgs),
    /// Adapt a pretrained artifact to target data.
    Adapt(AdaptArgs),
    /// Train or fit one comparison model.
    Baseline(BaselineArgs),
    /// Grid of adaptation runs over loss weights.
    Sweep(SweepArgs),
    /// Score a prediction CSV against an actual CSV.
    Eval(EvalArgs),
    /// Pearson correlation between the stations of two CSVs.
    Correlate(CorrelateArgs),
    /// Finite-difference check of every backward pass.
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of modes.
    #[arg(long, default_value_t = 2)]
    pub modes: usize,
    /// Stations per mode, comma separated.
    #[arg(long, default_value = "8,6", value_delimiter = ',')]
    pub stations: Vec<usize>,
    #[arg(long, default_value_t = 2184)]
    pub steps: usize,
    /// Weight of the shared daily/weekly factor, in [0, 1].
    #[arg(long, default_value_t = 0.9)]
    pub share: f64,
    /// AR(1) coefficient of the station-specific component.
    #[arg(long, default_value_t = 0.5)]
    pub ar: f64,
    #[arg(long, default_value_t = 2.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 50.0)]
    pub scale: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Clone)]
pub struct TrainArgs {
    #[arg(long, default_value_t = 12)]
    pub tau: usize,
    #[arg(long, default_value_t = 64)]
    pub batch: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub lr: f64,
    /// Maximum number of epochs.
    #[arg(long, default_value_t = 1000)]
    pub epochs: usize,
    /// Embedding width.
    #[arg(long, default_value_t = 64)]
    pub k: usize,
    /// Hidden width.
    #[arg(long, default_value_t = 64)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Train:validation:test fractions.
    #[arg(long, default_value = "0.6:0.2:0.2")]
    pub split: String,
    /// Drop stations whose fraction of zero readings exceeds this.
    #[arg(long, default_value_t = 0.6)]
    pub zero_filter: f64,
    /// Epochs without validation improvement before stopping; 0 disables.
    #[arg(long, default_value_t = 20)]
    pub patience: usize,
    /// Mask zero actuals for MAE, RMSE and PNBI too.
    #[arg(long)]
    pub mask_zeros_all: bool,
}

#[derive(Debug, Args, Clone, Default)]
pub struct OutputArgs {
    /// Directory for report.txt, trace.csv and the test forecasts.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Write the per-epoch loss trace to this CSV file.
    #[arg(long)]
    pub dump_trace_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PretrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Label recorded in the artifact.
    #[arg(long, default_value = "source")]
    pub source_mode: String,
    /// Creation label recorded in the artifact.
    #[arg(long, default_value = "unspecified")]
    pub created: String,
    #[command(flatten)]
    pub train: TrainArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Clone)]
pub struct WeightArgs {
    /// Reconstruction weight.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Alignment weight.
    #[arg(long)]
    pub beta: Option<f64>,
    /// `target:source` transport modes; selects tuned weights unless given explicitly.
    #[arg(long)]
    pub mode_pair: Option<String>,
}

#[derive(Debug, Args)]
pub struct AdaptArgs {
    /// Target-mode demand.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub pretrained: PathBuf,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[command(flatten)]
    pub train: TrainArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    /// lstm, encoder-lstm, encoder-decoder, encoder-adaptation, unkadf, finetune, ha or lr.
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub data: PathBuf,
    /// Required by encoder-adaptation, unkadf and finetune.
    #[arg(long)]
    pub pretrained: Option<PathBuf>,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[command(flatten)]
    pub train: TrainArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub pretrained: PathBuf,
    /// `start:end:step` or a single value.
    #[arg(long, default_value = "0.1:1.0:0.1")]
    pub gamma: String,
    /// `start:end:step` or a single value.
    #[arg(long, default_value = "0.1:1.0:0.1")]
    pub beta: String,
    #[command(flatten)]
    pub train: TrainArgs,
    /// Directory for sweep.csv and report.txt.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub actual: PathBuf,
    /// Mask zero actuals for MAE, RMSE and PNBI too.
    #[arg(long)]
    pub mask_zeros_all: bool,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    /// Correlation matrix CSV (rows: stations of `a`, columns: stations of `b`).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub bin_width: f64,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    /// Number of random seeds per check.
    #[arg(long, default_value_t = 20)]
    pub seeds: u64,
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            let _ = writeln!(err, "error: usage: {first}");
            return 2;
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            let _ = writeln!(err, "error: {}: {msg}", e.class());
            e.exit_code()
        }
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn parse_split(s: &str) -> Result<SplitFractions> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| usage(format!("--split expects train:val:test fractions, got '{s}'")))?;
    let [train, val, test] = parts[..] else {
        return Err(usage(format!("--split expects three fractions, got '{s}'")));
    };
    let f = SplitFractions { train, val, test };
    f.validate().map_err(|e| usage(e.to_string()))?;
    Ok(f)
}

/// `start:end:step` or a single value.
pub fn parse_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| usage(format!("bad range '{s}'")))?;
    match parts[..] {
        [v] if v.is_finite() => Ok(vec![v]),
        [a, b, step] => grid_range(a, b, step).map_err(|e| usage(e.to_string())),
        _ => Err(usage(format!("range must be a value or start:end:step, got '{s}'"))),
    }
}

fn run_config(t: &TrainArgs, variant: VariantKind, gamma: f64, beta: f64) -> Result<RunConfig> {
    let cfg = RunConfig {
        tau: t.tau,
        batch_size: t.batch,
        lr: t.lr,
        epochs: t.epochs,
        embed_dim: t.k,
        hidden_dim: t.m,
        gamma,
        beta,
        seed: t.seed,
        split: parse_split(&t.split)?,
        zero_filter: t.zero_filter,
        patience: (t.patience > 0).then_some(t.patience),
        variant,
        mask: if t.mask_zeros_all {
            MaskPolicy::speed()
        } else {
            MaskPolicy::demand()
        },
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

fn resolve_weights(w: &WeightArgs) -> Result<(f64, f64)> {
    let defaults = RunConfig::default();
    let (mut gamma, mut beta) = (defaults.gamma, defaults.beta);
    if let Some(pair) = &w.mode_pair {
        let (target, source) = pair
            .split_once(':')
            .ok_or_else(|| usage(format!("--mode-pair expects target:source, got '{pair}'")))?;
        let target: Mode = target.parse().map_err(|e: ukadf_core::Error| usage(e.to_string()))?;
        let source: Mode = source.parse().map_err(|e: ukadf_core::Error| usage(e.to_string()))?;
        (gamma, beta) = reference_loss_weights(target, source)
            .ok_or_else(|| usage(format!("no tuned weights for '{pair}'")))?;
    }
    Ok((w.gamma.unwrap_or(gamma), w.beta.unwrap_or(beta)))
}

fn emit_run(result: &RunResult, output: &OutputArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    if let Some(dir) = &output.report {
        write_run(dir, result)?;
    }
    if let Some(path) = &output.dump_trace_csv {
        write_trace(path, result)?;
    }
    write_out(out, &result.to_kv())?;
    if let Some(d) = result.elapsed {
        let _ = writeln!(err, "elapsed {:.2}s", d.as_secs_f64());
    }
    Ok(())
}

fn write_out(out: &mut dyn Write, s: &str) -> Result<()> {
    out.write_all(s.as_bytes()).map_err(|e| Error::io("<stdout>", e))
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match command {
        Command::Synth(a) => synth(a, out),
        Command::Pretrain(a) => {
            let cfg = run_config(&a.train, VariantKind::UnKadf, 0.0, 0.0)?;
            let data = load_csv(&a.data)?;
            let meta = ArtifactMetadata::new(a.source_mode, a.created);
            let (artifact, result) = runner::run_pretrain(&data, &cfg, meta)?;
            let checksum = save_artifact(&artifact, &a.out)?;
            emit_run(&result, &a.output, out, err)?;
            write_out(out, &format!("artifact={}\nchecksum={checksum}\n", a.out.display()))
        }
        Command::Adapt(a) => {
            let (gamma, beta) = resolve_weights(&a.weights)?;
            let cfg = run_config(&a.train, VariantKind::UnKadf, gamma, beta)?;
            let data = load_csv(&a.data)?;
            let artifact = load_artifact(&a.pretrained)?;
            let result = runner::run_adapt(&data, &artifact, &cfg)?;
            emit_run(&result, &a.output, out, err)
        }
        Command::Baseline(a) => {
            let kind: VariantKind = a.model.parse().map_err(|e: ukadf_core::Error| usage(e.to_string()))?;
            let (gamma, beta) = resolve_weights(&a.weights)?;
            let cfg = run_config(&a.train, kind, gamma, beta)?;
            if kind.needs_artifact() && a.pretrained.is_none() {
                return Err(usage(format!("--model {kind} needs --pretrained")));
            }
            let data = load_csv(&a.data)?;
            let artifact = a.pretrained.as_deref().map(load_artifact).transpose()?;
            let result = runner::run_variant(&data, &cfg, artifact.as_ref())?;
            emit_run(&result, &a.output, out, err)
        }
        Command::Sweep(a) => {
            let gammas = parse_range(&a.gamma)?;
            let betas = parse_range(&a.beta)?;
            let cfg = run_config(&a.train, VariantKind::UnKadf, gammas[0], betas[0])?;
            let data = load_csv(&a.data)?;
            let artifact = load_artifact(&a.pretrained)?;
            let result = runner::sweep_parallel(&data, &artifact, &cfg, &gammas, &betas)?;
            if let Some(dir) = &a.report {
                write_sweep(dir, &result)?;
            }
            write_out(out, &sweep_csv(&result))?;
            write_out(out, &sweep_summary(&result))
        }
        Command::Eval(a) => {
            let pred = read_table_file(&a.pred)?;
            let actual = read_table_file(&a.actual)?;
            let policy = if a.mask_zeros_all {
                MaskPolicy::speed()
            } else {
                MaskPolicy::demand()
            };
            let report = MetricReport::evaluate(&pred.values, &actual.values, &policy)?;
            write_out(out, &report.to_kv())
        }
        Command::Correlate(a) => correlate(a, out),
        Command::Gradcheck(a) => gradcheck(a, out),
    }
}

fn synth(a: SynthArgs, out: &mut dyn Write) -> Result<()> {
    if a.stations.len() != a.modes {
        return Err(usage(format!(
            "--stations lists {} modes but --modes is {}",
            a.stations.len(),
            a.modes
        )));
    }
    let cfg = SynthConfig {
        mode_station_counts: a.stations,
        total_steps: a.steps,
        share: a.share,
        ar_coefficient: a.ar,
        noise_std: a.noise,
        scale: a.scale,
        seed: a.seed,
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let modes = synth_generate(&cfg)?;
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    for (i, d) in modes.iter().enumerate() {
        let path = a.out.join(format!("mode{i}.csv"));
        save_csv(&path, d)?;
        write_out(out, &format!("{}\n", path.display()))?;
    }
    Ok(())
}

fn correlate(a: CorrelateArgs, out: &mut dyn Write) -> Result<()> {
    if !(a.bin_width > 0.0 && a.bin_width <= 2.0) {
        return Err(usage("--bin-width must lie in (0, 2]"));
    }
    let da = load_csv(&a.a)?;
    let db = load_csv(&a.b)?;
    let corr = pearson_matrix(&da, &db)?;
    let mut values = ukadf_core::nn::Matrix::zeros(corr.rows(), corr.cols());
    for i in 0..corr.rows() {
        for j in 0..corr.cols() {
            values.set(i, j, corr.get(i, j).unwrap_or(f64::NAN));
        }
    }
    let mut buf = Vec::new();
    let ids: Vec<String> = da.station_ids().to_vec();
    write_table(&mut buf, db.station_ids(), Some(&ids), &values)?;
    crate::artifact_io::write_atomic(&a.out, &buf)?;
    let hist = corr.histogram(a.bin_width);
    let mut s = format!("pairs={}\nundefined={}\n", corr.rows() * corr.cols(), corr.undefined_count());
    for (lo, hi, count) in hist.bins() {
        s.push_str(&format!("bin[{lo:.2},{hi:.2})={count}\n"));
    }
    s.push_str(&format!("fraction_above_0.6={}\n", corr.fraction_above(0.6)));
    write_out(out, &s)
}

fn gradcheck(a: GradcheckArgs, out: &mut dyn Write) -> Result<()> {
    if a.seeds == 0 {
        return Err(usage("--seeds must be at least 1"));
    }
    let cases = gradient_suite(a.seeds)?;
    let mut worst: Vec<(&str, f64)> = Vec::new();
    for c in &cases {
        let e = c.report.max_rel_error();
        match worst.iter_mut().find(|(n, _)| *n == c.name) {
            Some(w) => w.1 = w.1.max(e),
            None => worst.push((c.name, e)),
        }
    }
    let mut s = String::new();
    for (name, e) in &worst {
        let verdict = if *e < GRAD_TOLERANCE { "ok" } else { "FAIL" };
        s.push_str(&format!("{name} seeds={} max_rel_error={e:.3e} {verdict}\n", a.seeds));
    }
    write_out(out, &s)?;
    let failed: Vec<String> = cases
        .iter()
        .filter(|c| !c.passes())
        .map(|c| format!("{} seed {}", c.name, c.seed))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::GradCheck(format!(
            "{} above {GRAD_TOLERANCE:e}: {}",
            failed.len(),
            failed.join(", ")
        )))
    }
}

/// Entry point of the binary.
pub fn main_exit() -> ! {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock());
    std::process::exit(code)
}

