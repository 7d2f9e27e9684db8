use occo_core::ckpt::load_train;
use occo_core::probe::landscape_slice;
use occo_core::train::dataset_loss;

use crate::config::LandscapeSection;
use crate::{CliError, CliResult, LandscapeArgs};

pub fn run(args: LandscapeArgs, section: &LandscapeSection) -> CliResult {
    let ckpt = load_train(&args.ckpt).map_err(CliError::from_ckpt)?;
    let samples = super::load_samples(&args.data)?;
    let grid = args.grid.or(section.grid).unwrap_or(11);
    let seed = args.seed.or(section.seed).unwrap_or(0);
    // The fine-term weight is pinned to the checkpoint's training step.
    let slice = landscape_slice(&ckpt.params, &samples, grid, seed, ckpt.step)
        .map_err(CliError::from_core)?;
    println!("alpha,beta,loss");
    for (bi, beta) in slice.alphas.iter().enumerate() {
        for (ai, alpha) in slice.alphas.iter().enumerate() {
            println!("{alpha},{beta},{}", slice.values[bi][ai]);
        }
    }
    let direct = dataset_loss(&samples, &ckpt.params, ckpt.step).map_err(CliError::from_core)?;
    eprintln!(
        "center f(0,0) = {} (checkpoint dataset loss {direct}); grid {grid}x{grid}, seed {seed}",
        slice.center()
    );
    Ok(())
}
