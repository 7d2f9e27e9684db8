use occo_core::ckpt::load_train;
use occo_core::cloud::normalize_unit_sphere;
use occo_core::io::{parse_ply, write_ply};
use occo_core::losses::chamfer;
use occo_core::net::{decode, encoder_forward};

use crate::{CliError, CliResult, CompleteArgs};

pub fn run(args: CompleteArgs) -> CliResult {
    let ckpt = load_train(&args.ckpt).map_err(CliError::from_ckpt)?;
    let bytes = std::fs::read(&args.input)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", args.input.display())))?;
    let cloud = parse_ply(&bytes).map_err(CliError::from_core)?;
    // The model operates in normalized coordinates.
    let cloud = normalize_unit_sphere(&cloud).map_err(CliError::from_core)?;
    let (embedding, _) = encoder_forward(&cloud, &ckpt.params).map_err(CliError::from_core)?;
    let (coarse, fine) = decode(&embedding, &ckpt.params);

    let coarse_path = args.out.with_extension("coarse.ply");
    let fine_path = args.out.with_extension("fine.ply");
    std::fs::write(&coarse_path, write_ply(&coarse))
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", coarse_path.display())))?;
    std::fs::write(&fine_path, write_ply(&fine))
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", fine_path.display())))?;
    println!(
        "completed {} input points -> {} coarse, {} fine; wrote {} and {}",
        cloud.len(),
        coarse.len(),
        fine.len(),
        coarse_path.display(),
        fine_path.display()
    );
    if let Some(truth_path) = &args.truth {
        let truth_bytes = std::fs::read(truth_path)
            .map_err(|e| CliError::input(format!("cannot read {}: {e}", truth_path.display())))?;
        let truth = normalize_unit_sphere(&parse_ply(&truth_bytes).map_err(CliError::from_core)?)
            .map_err(CliError::from_core)?;
        let cd_coarse = chamfer(&coarse, &truth).map_err(CliError::from_core)?.value;
        let cd_fine = chamfer(&fine, &truth).map_err(CliError::from_core)?.value;
        println!("cd_coarse {cd_coarse} cd_fine {cd_fine}");
    }
    Ok(())
}
