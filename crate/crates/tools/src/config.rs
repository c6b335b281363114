//! Run configuration: defaults, then a flat `key = value` file, then
//! command-line flags, each layer overriding the previous one.

use std::fs;
use std::path::{Path, PathBuf};

use srp_core::analysis::MAX_THEOREM_TIMESTEPS;
use srp_core::train::TrainConfig;

use crate::error::{Result, ToolError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Train,
    Convert,
    Eval,
    Analyze,
    VerifyTheorem,
    SynthDigits,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Train => "train",
            Command::Convert => "convert",
            Command::Eval => "eval",
            Command::Analyze => "analyze",
            Command::VerifyTheorem => "verify-theorem",
            Command::SynthDigits => "synth-digits",
        }
    }
}

/// Network family built by `train`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Arch {
    /// 784-256-128-10.
    Mlp,
    /// Two conv blocks and two dense layers.
    Cnn,
    /// Custom hidden widths, e.g. `mlp:256-128-64`.
    MlpHidden(Vec<usize>),
}

impl Arch {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mlp" => Some(Arch::Mlp),
            "cnn" => Some(Arch::Cnn),
            _ => {
                let widths = s.strip_prefix("mlp:")?;
                let hidden: Option<Vec<usize>> = widths
                    .split('-')
                    .map(|w| w.parse().ok().filter(|&w: &usize| w > 0))
                    .collect();
                hidden.filter(|h| !h.is_empty()).map(Arch::MlpHidden)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub model: Option<PathBuf>,
    pub data: Option<PathBuf>,
    /// IDX split name (`train` or `t10k`); defaults per command.
    pub split: Option<String>,
    pub out: PathBuf,
    pub timesteps: Vec<usize>,
    pub tau: usize,
    pub srp: bool,
    pub even_timing: bool,
    pub quant_steps: u32,
    pub seed: u64,
    pub classes: usize,
    pub limit: Option<usize>,
    pub arch: Arch,
    pub train: TrainConfig,
    /// Samples for `analyze`; random draws for `verify-theorem`.
    pub samples: usize,
    /// Presynaptic neurons per theorem instance.
    pub presynaptic: usize,
    pub trace: bool,
    pub synth_train: usize,
    pub synth_test: usize,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        let (timesteps, samples) = match command {
            Command::VerifyTheorem => (vec![2, 4, 6], 100),
            _ => (vec![1, 2, 4, 8], 100),
        };
        Self {
            command,
            model: None,
            data: None,
            split: None,
            out: PathBuf::from("out"),
            timesteps,
            tau: 4,
            srp: false,
            even_timing: false,
            quant_steps: 4,
            seed: 0,
            classes: 10,
            limit: None,
            arch: Arch::Mlp,
            train: TrainConfig::default(),
            samples,
            presynaptic: 2,
            trace: false,
            synth_train: 2000,
            synth_test: 1000,
        }
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let bad = |what: &str| ToolError::Config(format!("{key} = {value}: expected {what}"));
        fn num<T: std::str::FromStr>(v: &str) -> Option<T> {
            v.parse().ok()
        }
        match key.trim() {
            "model" => self.model = Some(PathBuf::from(value)),
            "data" => self.data = Some(PathBuf::from(value)),
            "split" => self.split = Some(value.to_string()),
            "out" => self.out = PathBuf::from(value),
            "timesteps" | "T" => {
                let list: Option<Vec<usize>> = value.split(',').map(|t| num(t.trim())).collect();
                self.timesteps = list
                    .filter(|l| !l.is_empty() && l.iter().all(|&t| t > 0))
                    .ok_or_else(|| bad("comma-separated positive integers"))?;
            }
            "tau" => {
                self.tau = num(value)
                    .filter(|&t| t > 0)
                    .ok_or_else(|| bad("a positive integer"))?
            }
            "srp" => self.srp = parse_bool(value).ok_or_else(|| bad("on/off"))?,
            "even_timing" => self.even_timing = parse_bool(value).ok_or_else(|| bad("on/off"))?,
            "trace" => self.trace = parse_bool(value).ok_or_else(|| bad("on/off"))?,
            "quant_steps" | "L" => {
                self.quant_steps = num(value)
                    .filter(|&l| l > 0)
                    .ok_or_else(|| bad("a positive integer"))?
            }
            "seed" => {
                let seed = num(value).ok_or_else(|| bad("an unsigned integer"))?;
                self.seed = seed;
                self.train.seed = seed;
            }
            "classes" => {
                self.classes = num(value)
                    .filter(|&c| c > 1)
                    .ok_or_else(|| bad("an integer > 1"))?
            }
            "limit" => self.limit = Some(num(value).ok_or_else(|| bad("an unsigned integer"))?),
            "arch" => {
                self.arch = Arch::parse(value).ok_or_else(|| bad("mlp, cnn or mlp:W1-W2-…"))?
            }
            "lr" => self.train.learning_rate = num(value).ok_or_else(|| bad("a number"))?,
            "momentum" => self.train.momentum = num(value).ok_or_else(|| bad("a number"))?,
            "wd" => self.train.weight_decay = num(value).ok_or_else(|| bad("a number"))?,
            "epochs" => self.train.epochs = num(value).ok_or_else(|| bad("an unsigned integer"))?,
            "batch_size" => {
                self.train.batch_size = num(value).ok_or_else(|| bad("an unsigned integer"))?
            }
            "samples" => self.samples = num(value).ok_or_else(|| bad("an unsigned integer"))?,
            "presynaptic" => {
                self.presynaptic = num(value).ok_or_else(|| bad("an unsigned integer"))?
            }
            "synth_train" => {
                self.synth_train = num(value).ok_or_else(|| bad("an unsigned integer"))?
            }
            "synth_test" => {
                self.synth_test = num(value).ok_or_else(|| bad("an unsigned integer"))?
            }
            other => return Err(ToolError::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies every setting of a `key = value` file. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| ToolError::io(path, e))?;
        for (line, key, value) in parse_pairs(&text)
            .map_err(|(line, msg)| ToolError::Config(format!("{}:{line}: {msg}", path.display())))?
        {
            self.set(&key, &value)
                .map_err(|e| ToolError::Config(format!("{}:{line}: {e}", path.display())))?;
        }
        Ok(())
    }

    /// Checks cross-field invariants and that input paths exist.
    pub fn validate(&self) -> Result<()> {
        self.train
            .validate()
            .map_err(|e| ToolError::Config(e.to_string()))?;
        let need = |p: &Option<PathBuf>, flag: &str| -> Result<()> {
            match p {
                None => Err(ToolError::Config(format!(
                    "{} needs --{flag}",
                    self.command.name()
                ))),
                Some(p) if !p.exists() => {
                    Err(ToolError::Config(format!("{} does not exist", p.display())))
                }
                Some(_) => Ok(()),
            }
        };
        match self.command {
            Command::Train => need(&self.data, "data")?,
            Command::Convert => need(&self.model, "model")?,
            Command::Eval | Command::Analyze => {
                need(&self.model, "model")?;
                need(&self.data, "data")?;
            }
            Command::VerifyTheorem => {
                if let Some(&t) = self.timesteps.iter().find(|&&t| t > MAX_THEOREM_TIMESTEPS) {
                    return Err(ToolError::Config(format!(
                        "exhaustive enumeration is capped at T = {MAX_THEOREM_TIMESTEPS}, got {t}"
                    )));
                }
                if self.presynaptic == 0 || self.presynaptic > srp_core::analysis::MAX_PRESYNAPTIC {
                    return Err(ToolError::Config(format!(
                        "presynaptic must be in 1..={}",
                        srp_core::analysis::MAX_PRESYNAPTIC
                    )));
                }
            }
            Command::SynthDigits => {}
        }
        if self.command == Command::Analyze && self.timesteps.len() != 1 && self.even_timing {
            return Err(ToolError::Config(
                "even_timing analysis takes a single T".into(),
            ));
        }
        Ok(())
    }
}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "on" | "true" | "1" | "yes" => Some(true),
        "off" | "false" | "0" | "no" => Some(false),
        _ => None,
    }
}

/// `(1-based line, key, value)`.
pub type Setting = (usize, String, String);

/// Parses `key = value` lines into `(1-based line, key, value)`.
pub fn parse_pairs(text: &str) -> std::result::Result<Vec<Setting>, (usize, String)> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| (i + 1, format!("expected key = value, got `{line}`")))?;
        let k = k.trim();
        if k.is_empty() {
            return Err((i + 1, "empty key".into()));
        }
        out.push((i + 1, k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flag_precedence() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        std::io::Write::write_all(&mut f, b"# comment\ntau = 2\nseed=5\n\ntimesteps = 1, 2\n")
            .unwrap();
        let mut c = RunConfig::new(Command::Eval);
        c.apply_file(f.path()).unwrap();
        assert_eq!((c.tau, c.seed, c.timesteps.clone()), (2, 5, vec![1, 2]));
        c.set("tau", "8").unwrap();
        assert_eq!(c.tau, 8);
        assert_eq!(c.train.seed, 5);
    }

    #[test]
    fn unknown_key_and_bad_values() {
        let mut c = RunConfig::new(Command::Eval);
        assert!(matches!(c.set("nope", "1"), Err(ToolError::Config(_))));
        assert!(c.set("timesteps", "1,0").is_err());
        assert!(c.set("srp", "maybe").is_err());
        assert!(c.set("arch", "mlp:").is_err());
        assert_eq!(
            Arch::parse("mlp:32-16"),
            Some(Arch::MlpHidden(vec![32, 16]))
        );
    }

    #[test]
    fn malformed_line_reports_line_number() {
        assert_eq!(parse_pairs("a=1\nbroken\n").unwrap_err().0, 2);
    }

    #[test]
    fn theorem_cap() {
        let mut c = RunConfig::new(Command::VerifyTheorem);
        c.set("T", "10").unwrap();
        assert!(matches!(c.validate(), Err(ToolError::Config(_))));
        c.set("T", "8").unwrap();
        c.validate().unwrap();
    }

    #[test]
    fn missing_input_path() {
        let mut c = RunConfig::new(Command::Eval);
        c.set("model", "/definitely/missing").unwrap();
        c.set("data", "/definitely/missing").unwrap();
        assert_eq!(c.validate().unwrap_err().exit_code(), 2);
    }
}
