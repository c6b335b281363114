//! One function per subcommand. Each reads its inputs from a validated
//! [`RunConfig`], writes its artifacts under `config.out` and returns a short
//! human-readable summary.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use srp_core::analysis::{type_i_report, type_ii_report, TheoremInstance};
use srp_core::snn::SimOptions;
use srp_core::train::{cnn_preset, mlp, mlp_preset};
use srp_core::{verify_theorem1, ErrorReport, ErrorType, NetworkSpec};

use crate::checkpoint::Checkpoint;
use crate::config::{Arch, Command, RunConfig};
use crate::csv_data::load_csv_dataset;
use crate::dataset::DatasetHandle;
use crate::error::{Result, ToolError};
use crate::eval::{run_eval, write_metrics, EvalConfig};
use crate::report::{
    plot_rows, summarize, theorem_row, write_case_csv, write_json, write_plot_csv,
    write_theorem_csv, AnalysisSummary,
};
use crate::{idx, synth, trace};

pub const MODEL_FILE: &str = "model.srpq";
pub const SNN_FILE: &str = "snn.srpq";

pub fn run(config: &RunConfig) -> Result<String> {
    config.validate()?;
    fs::create_dir_all(&config.out).map_err(|e| ToolError::io(&config.out, e))?;
    match config.command {
        Command::Train => train(config),
        Command::Convert => convert(config),
        Command::Eval => eval(config),
        Command::Analyze => analyze(config),
        Command::VerifyTheorem => verify_theorem(config),
        Command::SynthDigits => synth_digits(config),
    }
}

fn out_path(config: &RunConfig, name: &str) -> PathBuf {
    config.out.join(name)
}

/// A `.csv` file, or a directory holding `{split}-images-idx3-ubyte` and
/// `{split}-labels-idx1-ubyte`.
pub fn load_dataset(
    path: &Path,
    split: &str,
    classes: usize,
    limit: Option<usize>,
) -> Result<DatasetHandle> {
    let data = if path.is_dir() {
        let (images, labels) = idx::split_paths(path, split);
        idx::load_idx_dataset(&images, &labels, classes)?
    } else if path.extension().is_some_and(|e| e == "csv") {
        load_csv_dataset(path, classes)?
    } else {
        return Err(ToolError::Config(format!(
            "{} is neither an IDX directory nor a .csv file",
            path.display()
        )));
    };
    Ok(match limit {
        Some(n) => data.head(n),
        None => data,
    })
}

fn dataset_for(config: &RunConfig, default_split: &str) -> Result<DatasetHandle> {
    let path = config.data.as_deref().expect("validated");
    let split = config.split.as_deref().unwrap_or(default_split);
    load_dataset(path, split, config.classes, config.limit)
}

pub fn build_network(
    arch: &Arch,
    input_shape: &[usize],
    classes: usize,
    steps: u32,
    seed: u64,
) -> Result<NetworkSpec> {
    let image = [1, 28, 28];
    Ok(match arch {
        Arch::Mlp if input_shape == image && classes == 10 => mlp_preset(steps, seed)?,
        Arch::Mlp => mlp(input_shape.to_vec(), &[256, 128], classes, steps, seed)?,
        Arch::MlpHidden(hidden) => mlp(input_shape.to_vec(), hidden, classes, steps, seed)?,
        Arch::Cnn if input_shape == image && classes == 10 => cnn_preset(steps, seed)?,
        Arch::Cnn => {
            return Err(ToolError::Config(format!(
                "the cnn preset takes 1x28x28 inputs and 10 classes, data has {input_shape:?} and {classes}"
            )))
        }
    })
}

#[derive(Serialize)]
struct HistoryRow {
    epoch: usize,
    learning_rate: f64,
    loss: f64,
    accuracy: f64,
}

fn train(config: &RunConfig) -> Result<String> {
    let data = dataset_for(config, "train")?;
    let standardization = data.fit_standardization();
    let net = build_network(
        &config.arch,
        &data.sample_shape,
        config.classes,
        config.quant_steps,
        config.seed,
    )?;
    let inputs = data.tensors(&standardization);
    let outcome = srp_core::train(&net, &inputs, &data.labels, &config.train)?;
    let ckpt = Checkpoint::new(outcome.network, standardization).narrowed()?;
    let model = out_path(config, MODEL_FILE);
    ckpt.save(&model)?;

    let history = out_path(config, "train_history.csv");
    let mut w = csv::Writer::from_path(&history).map_err(|e| ToolError::csv(&history, e))?;
    for m in &outcome.history {
        w.serialize(HistoryRow {
            epoch: m.epoch,
            learning_rate: m.learning_rate,
            loss: m.loss,
            accuracy: m.accuracy,
        })
        .map_err(|e| ToolError::csv(&history, e))?;
    }
    w.flush().map_err(|e| ToolError::io(&history, e))?;

    let acc = srp_core::train::accuracy(&ckpt.network, &inputs, &data.labels)?;
    Ok(format!(
        "trained on {} samples for {} epochs; train accuracy {:.4}; wrote {}",
        data.len(),
        config.train.epochs,
        acc,
        model.display()
    ))
}

#[derive(Serialize)]
struct ConversionLayer {
    layer: usize,
    quant_steps: u32,
    lambda: f64,
    threshold: f64,
    initial_potential: f64,
}

fn convert(config: &RunConfig) -> Result<String> {
    let ckpt = Checkpoint::load(config.model.as_deref().expect("validated"))?;
    let snn = srp_core::convert(&ckpt.network)?;
    let report = snn.report(Some(config.timesteps[0]), config.srp.then_some(config.tau));
    let layers: Vec<ConversionLayer> = report
        .layers
        .iter()
        .enumerate()
        .map(|(layer, c)| ConversionLayer {
            layer,
            quant_steps: c.quant_steps,
            lambda: c.source_lambda,
            threshold: c.threshold,
            initial_potential: c.initial_potential,
        })
        .collect();
    write_json(&out_path(config, "conversion.json"), &layers)?;
    let path = out_path(config, SNN_FILE);
    Checkpoint::with_snn(&snn, ckpt.standardization).save(&path)?;
    Ok(format!(
        "converted {} activation layers; wrote {}",
        layers.len(),
        path.display()
    ))
}

fn eval(config: &RunConfig) -> Result<String> {
    let ckpt = Checkpoint::load(config.model.as_deref().expect("validated"))?;
    let data = dataset_for(config, "t10k")?;
    let rows = run_eval(
        &ckpt,
        &data,
        &EvalConfig {
            timesteps: config.timesteps.clone(),
            tau: config.tau,
            srp: config.srp,
            even_timing: config.even_timing,
        },
    )?;
    let path = out_path(config, "metrics.csv");
    write_metrics(&path, &rows)?;
    let mut text = format!("{} samples; wrote {}", data.len(), path.display());
    for r in &rows {
        text += &format!(
            "\nT={:<3} ann {:.4}  snn {:.4}{}",
            r.timesteps,
            r.acc_ann,
            r.acc_snn,
            r.acc_srp.map_or(String::new(), |a| format!(
                "  srp(tau={}) {a:.4}",
                config.tau
            ))
        );
    }
    Ok(text)
}

fn merge_all(kind: ErrorType, layers: usize, parts: &[ErrorReport]) -> Result<ErrorReport> {
    let mut total = ErrorReport::empty(kind, layers);
    for p in parts {
        total.merge(p)?;
    }
    Ok(total)
}

fn analyze(config: &RunConfig) -> Result<String> {
    let ckpt = Checkpoint::load(config.model.as_deref().expect("validated"))?;
    let data = dataset_for(config, "t10k")?.head(config.samples);
    if data.is_empty() {
        return Err(ToolError::Data("no samples to analyze".into()));
    }
    let ann = &ckpt.network;
    let snn = ckpt.snn_model()?;
    let inputs = data.tensors(&ckpt.standardization);
    let n = ann.activation_layers();
    let mut summaries = Vec::new();
    let mut plot = Vec::new();
    let mut text = format!("{} samples", data.len());

    for &t in &config.timesteps {
        let per_sample: Vec<[ErrorReport; 3]> = inputs
            .par_iter()
            .map(|x| {
                let plain = if config.even_timing {
                    snn.simulate_even_timing(x, t)?
                } else {
                    snn.simulate(x, t)?
                };
                let masked = snn.srp_inference(x, config.tau, t)?;
                Ok([
                    type_i_report(ann, x, &plain)?,
                    type_ii_report(ann, x, &plain)?,
                    type_ii_report(ann, x, &masked)?,
                ])
            })
            .collect::<srp_core::Result<_>>()?;
        let pick = |i: usize, kind| {
            let parts: Vec<ErrorReport> = per_sample.iter().map(|r| r[i].clone()).collect();
            merge_all(kind, n, &parts)
        };
        let type_i = pick(0, ErrorType::TypeI)?;
        let type_ii = pick(1, ErrorType::TypeII)?;
        let srp_ii = pick(2, ErrorType::TypeII)?;

        write_case_csv(&out_path(config, &format!("type_i_T{t}.csv")), &type_i)?;
        write_case_csv(&out_path(config, &format!("type_ii_T{t}.csv")), &type_ii)?;
        write_case_csv(&out_path(config, &format!("type_ii_srp_T{t}.csv")), &srp_ii)?;
        for (name, r) in [
            ("type_i", &type_i),
            ("type_ii", &type_ii),
            ("type_ii_srp", &srp_ii),
        ] {
            plot.extend(plot_rows(&format!("{name}_T{t}"), r));
        }
        let reports = vec![
            summarize("type_i", &type_i),
            summarize("type_ii", &type_ii),
            summarize("type_ii_srp", &srp_ii),
        ];
        for (l, (b, a)) in reports[1].layers.iter().zip(&reports[2].layers).enumerate() {
            text += &format!(
                "\nT={t} layer {l}: case1 {:.4} -> {:.4} with SRP (tau={}); dominant error {}",
                b.fractions["case1"],
                a.fractions["case1"],
                config.tau,
                b.dominant_case.as_deref().unwrap_or("none")
            );
        }
        summaries.push(AnalysisSummary {
            timesteps: t,
            tau: config.tau,
            samples: data.len(),
            reports,
        });
    }
    write_plot_csv(&out_path(config, "plot_data.csv"), &plot)?;
    write_json(&out_path(config, "summary.json"), &summaries)?;

    if config.trace {
        let sim = snn.simulate_with(
            &inputs[0],
            config.timesteps[0],
            SimOptions {
                record_trace: true,
                ..SimOptions::default()
            },
        )?;
        trace::write_trace(&out_path(config, "trace.csv"), &sim.trace)?;
    }
    Ok(text)
}

/// Random instances for the theorem oracle: weights in `[-2, 2)`, spike counts
/// in `0..=T`, thresholds in `[0.5, 2)`.
pub fn random_instances(
    timesteps: &[usize],
    draws: usize,
    presynaptic: usize,
    seed: u64,
) -> Vec<TheoremInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &t in timesteps {
        for _ in 0..draws {
            let weights = (0..presynaptic)
                .map(|_| rng.random_range(-2.0..2.0))
                .collect();
            let counts = (0..presynaptic).map(|_| rng.random_range(0..=t)).collect();
            let mut inst = TheoremInstance::new(weights, counts, t);
            inst.threshold = rng.random_range(0.5..2.0);
            inst.presynaptic_threshold = rng.random_range(0.5..2.0);
            out.push(inst);
        }
    }
    out
}

fn verify_theorem(config: &RunConfig) -> Result<String> {
    let mut instances = vec![TheoremInstance::new(vec![2.0, -1.0], vec![3, 3], 6)];
    instances.extend(random_instances(
        &config.timesteps,
        config.samples,
        config.presynaptic,
        config.seed,
    ));
    let runs = instances
        .par_iter()
        .map(verify_theorem1)
        .collect::<srp_core::Result<Vec<_>>>()?;
    let rows: Vec<_> = runs
        .iter()
        .enumerate()
        .map(|(i, r)| theorem_row(i, r))
        .collect();
    write_theorem_csv(&out_path(config, "theorem.csv"), &rows)?;
    let placements: usize = rows.iter().map(|r| r.placements).sum();
    let violations: usize = rows.iter().map(|r| r.violations).sum();
    let text = format!(
        "{} instances, {} placements, {} violations",
        rows.len(),
        placements,
        violations
    );
    if violations > 0 {
        return Err(ToolError::Invariant(text));
    }
    Ok(text)
}

fn synth_digits(config: &RunConfig) -> Result<String> {
    synth::write_dataset(
        &config.out,
        config.synth_train,
        config.synth_test,
        config.seed,
    )?;
    Ok(format!(
        "wrote {} train and {} test digits to {}",
        config.synth_train,
        config.synth_test,
        config.out.display()
    ))
}
