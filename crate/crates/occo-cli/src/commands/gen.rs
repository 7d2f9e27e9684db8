use std::path::Path;

use occo_core::camera::{CameraIntrinsics, ViewSpec};
use occo_core::dataset::{generate_dataset, write_dataset, GenParams, SourceObject};
use occo_core::io::{parse_off, parse_ply};
use occo_core::occlusion::DEFAULT_EPS_DEPTH;

use crate::config::GenSection;
use crate::{CliError, CliResult, GenArgs};

fn load_objects(dir: &Path) -> Result<Vec<SourceObject>, CliError> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| CliError::input(format!("cannot read input dir {}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()),
                Some("off") | Some("OFF") | Some("ply") | Some("PLY")
            )
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::input(format!(
            "no OFF or PLY files in {}",
            dir.display()
        )));
    }
    // Optional labels.txt: one integer per object in sorted file order.
    let labels = {
        let label_path = dir.join("labels.txt");
        if label_path.exists() {
            Some(super::read_label_file(&label_path)?)
        } else {
            None
        }
    };
    paths
        .iter()
        .enumerate()
        .map(|(i, path)| {
            let bytes = std::fs::read(path)
                .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
            let name = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("object")
                .to_string();
            let label = labels.as_ref().and_then(|ls| ls.get(i).copied());
            let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
            if ext.eq_ignore_ascii_case("off") {
                let mesh = parse_off(&bytes).map_err(CliError::from_core)?;
                Ok(SourceObject::Mesh { name, mesh, label })
            } else {
                let mut cloud = parse_ply(&bytes).map_err(CliError::from_core)?;
                cloud.label = label;
                Ok(SourceObject::Cloud { name, cloud })
            }
        })
        .collect()
}

pub fn run(args: GenArgs, section: &GenSection) -> CliResult {
    let objects = load_objects(&args.input)?;
    let intrinsics = CameraIntrinsics {
        f: args.f.or(section.f).unwrap_or(1000.0),
        gamma: section.gamma.unwrap_or(0.0),
        w: args.w.or(section.w).unwrap_or(1600.0),
        h: args.h.or(section.h).unwrap_or(1200.0),
    };
    let params = GenParams {
        views_per_object: args.views.or(section.views).unwrap_or(10),
        n_input: args.points.or(section.points).unwrap_or(256),
        n_coarse: args.coarse.or(section.coarse).unwrap_or(64),
        n_fine: args.fine.or(section.fine).unwrap_or(1024),
        intrinsics,
        standoff: args.standoff.or(section.standoff).unwrap_or(ViewSpec::DEFAULT_STANDOFF),
        eps_depth: section.eps_depth.unwrap_or(DEFAULT_EPS_DEPTH),
        master_seed: args.seed.or(section.seed).unwrap_or(0),
    };
    let (samples, manifest) = generate_dataset(&objects, &params).map_err(CliError::from_core)?;
    for skip in &manifest.skipped {
        eprintln!("skipped object {} ({}): {}", skip.object_id, skip.name, skip.reason);
    }
    write_dataset(&samples, &args.out).map_err(CliError::from_core)?;
    let manifest_path = args.out.with_extension("manifest.json");
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CliError::input(format!("manifest serialization failed: {e}")))?;
    std::fs::write(&manifest_path, json)
        .map_err(|e| CliError::input(format!("cannot write manifest: {e}")))?;
    let mean_visible = manifest
        .samples
        .iter()
        .map(|s| s.visible_fraction)
        .sum::<f64>()
        / manifest.samples.len() as f64;
    println!(
        "{} samples from {} objects x {} views ({} skipped); mean visible fraction {:.3}; wrote {} and {}",
        samples.len(),
        manifest.objects.len() - manifest.skipped.len(),
        params.views_per_object,
        manifest.skipped.len(),
        mean_visible,
        args.out.display(),
        manifest_path.display()
    );
    Ok(())
}
