use occo_core::ckpt::{save_encoder, save_train, TrainCkpt};
use occo_core::train::{evaluate, pretrain, TrainConfig};

use crate::config::{DimsSpec, PretrainSection};
use crate::{CliError, CliResult, PretrainArgs};

pub fn run(args: PretrainArgs, section: &PretrainSection) -> CliResult {
    let samples = super::load_samples(&args.data)?;
    let dims = match &args.dims {
        Some(name) => DimsSpec::Preset(name.clone()).resolve().map_err(CliError::input)?,
        None => match &section.dims {
            Some(spec) => spec.resolve().map_err(CliError::input)?,
            None => occo_core::net::ModelDims::desk(),
        },
    };
    let config = TrainConfig {
        epochs: args.epochs.or(section.epochs).unwrap_or(50),
        batch_size: args.batch.or(section.batch).unwrap_or(32),
        lr0: section.lr0.unwrap_or(1e-4),
        lr_decay: section.lr_decay.unwrap_or(0.7),
        lr_every: section.lr_every.unwrap_or(10),
        seed: args.seed.or(section.seed).unwrap_or(0),
        max_steps: section.max_steps,
        ..TrainConfig::default()
    };
    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::input(format!("cannot create {}: {e}", args.out.display())))?;
    let outcome = pretrain(&samples, &dims, &config).map_err(CliError::from_core)?;
    let encoder_path = args.out.join("encoder.ocwt");
    let model_path = args.out.join("model.ocwt");
    let log_path = args.out.join("log.csv");
    save_encoder(&outcome.params, &encoder_path).map_err(CliError::from_core)?;
    save_train(
        &TrainCkpt {
            params: outcome.params.clone(),
            adam_m: outcome.adam.m,
            adam_v: outcome.adam.v,
            step: outcome.adam.step,
            config_hash: outcome.config_hash,
        },
        &model_path,
    )
    .map_err(CliError::from_core)?;
    std::fs::write(&log_path, outcome.log.to_csv())
        .map_err(|e| CliError::input(format!("cannot write log: {e}")))?;
    let (coarse_cd, fine_cd) = evaluate(&samples, &outcome.params).map_err(CliError::from_core)?;
    println!(
        "trained {} steps; final dataset CD coarse {coarse_cd:.6} fine {fine_cd:.6}; wrote {}, {}, {}",
        outcome.log.records.len(),
        encoder_path.display(),
        model_path.display(),
        log_path.display()
    );
    Ok(())
}
