use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use srp_tools::{commands, Command, Result, RunConfig};

/// QCFS training, ANN-to-SNN conversion, SRP inference and unevenness-error analysis.
#[derive(Parser)]
#[command(name = "srp", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train a QCFS network; writes model.srpq and train_history.csv.
    Train(Flags),
    /// Convert a trained model to an SNN checkpoint; writes snn.srpq and conversion.json.
    Convert(Flags),
    /// ANN / SNN / SRP accuracy per time-step; writes metrics.csv.
    Eval(Flags),
    /// Unevenness-error reports per layer (CSV, plot data, JSON summary).
    Analyze(Flags),
    /// Enumerate spike timings and check the residual-potential theorem.
    VerifyTheorem(Flags),
    /// Write a synthetic MNIST-format digit dataset (IDX files).
    SynthDigits(Flags),
}

#[derive(Args, Default)]
struct Flags {
    /// key = value file applied before the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` setting (repeatable), applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    model: Option<String>,
    /// IDX directory or .csv file.
    #[arg(long)]
    data: Option<String>,
    /// IDX split (`train` or `t10k`).
    #[arg(long)]
    split: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Comma-separated simulation lengths.
    #[arg(long, short = 'T')]
    timesteps: Option<String>,
    /// Stage-1 length of SRP inference.
    #[arg(long)]
    tau: Option<String>,
    /// Enable SRP inference (`on`/`off`).
    #[arg(long, num_args = 0..=1, default_missing_value = "on")]
    srp: Option<String>,
    /// Use the layerwise constant-current closed form instead of time stepping.
    #[arg(long, num_args = 0..=1, default_missing_value = "on")]
    even_timing: Option<String>,
    /// Quantization steps L of new networks.
    #[arg(long, short = 'L')]
    quant_steps: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// mlp, cnn or mlp:W1-W2-...
    #[arg(long)]
    arch: Option<String>,
    #[arg(long)]
    lr: Option<String>,
    #[arg(long)]
    momentum: Option<String>,
    #[arg(long)]
    wd: Option<String>,
    #[arg(long)]
    epochs: Option<String>,
    #[arg(long)]
    batch_size: Option<String>,
    #[arg(long)]
    classes: Option<String>,
    /// Use only the first N samples.
    #[arg(long)]
    limit: Option<String>,
    /// Samples to analyze, or random draws per T for verify-theorem.
    #[arg(long)]
    samples: Option<String>,
    /// Presynaptic neurons per theorem instance.
    #[arg(long)]
    presynaptic: Option<String>,
    /// Dump a per-step CSV trace of the first analyzed sample.
    #[arg(long, num_args = 0..=1, default_missing_value = "on")]
    trace: Option<String>,
    /// Training samples for synth-digits.
    #[arg(long)]
    synth_train: Option<String>,
    /// Test samples for synth-digits.
    #[arg(long)]
    synth_test: Option<String>,
}

impl Flags {
    fn pairs(&self) -> Vec<(&'static str, &str)> {
        let fields = [
            ("model", &self.model),
            ("data", &self.data),
            ("split", &self.split),
            ("out", &self.out),
            ("timesteps", &self.timesteps),
            ("tau", &self.tau),
            ("srp", &self.srp),
            ("even_timing", &self.even_timing),
            ("quant_steps", &self.quant_steps),
            ("seed", &self.seed),
            ("arch", &self.arch),
            ("lr", &self.lr),
            ("momentum", &self.momentum),
            ("wd", &self.wd),
            ("epochs", &self.epochs),
            ("batch_size", &self.batch_size),
            ("classes", &self.classes),
            ("limit", &self.limit),
            ("samples", &self.samples),
            ("presynaptic", &self.presynaptic),
            ("trace", &self.trace),
            ("synth_train", &self.synth_train),
            ("synth_test", &self.synth_test),
        ];
        fields
            .into_iter()
            .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
            .collect()
    }
}

fn build(command: Command, flags: &Flags) -> Result<RunConfig> {
    let mut config = RunConfig::new(command);
    if let Some(path) = &flags.config {
        config.apply_file(path)?;
    }
    for s in &flags.set {
        let (k, v) = s.split_once('=').ok_or_else(|| {
            srp_tools::ToolError::Config(format!("--set expects KEY=VALUE, got `{s}`"))
        })?;
        config.set(k, v)?;
    }
    for (k, v) in flags.pairs() {
        config.set(k, v)?;
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match &cli.command {
        Cmd::Train(f) => (Command::Train, f),
        Cmd::Convert(f) => (Command::Convert, f),
        Cmd::Eval(f) => (Command::Eval, f),
        Cmd::Analyze(f) => (Command::Analyze, f),
        Cmd::VerifyTheorem(f) => (Command::VerifyTheorem, f),
        Cmd::SynthDigits(f) => (Command::SynthDigits, f),
    };
    match build(command, flags).and_then(|c| commands::run(&c)) {
        Ok(text) => {
            println!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("srp {}: {e}", command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
