use std::path::PathBuf;

use occo_core::io::parse_ply;
use occo_core::net::encoder_features;
use occo_core::probe::{activation_mask, count_detected_concepts, dissection_miou, parse_part_labels};

use crate::config::DissectSection;
use crate::{CliError, CliResult, DissectArgs};

pub fn run(args: DissectArgs, section: &DissectSection) -> CliResult {
    let encoder = super::load_any_encoder(&args.ckpt)?;
    let fraction = args.fraction.or(section.fraction).unwrap_or(0.2);
    let threshold = args.threshold.or(section.threshold).unwrap_or(0.5);

    let mut cloud_paths: Vec<PathBuf> = std::fs::read_dir(&args.data)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", args.data.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("ply")))
        .collect();
    cloud_paths.sort();
    if cloud_paths.is_empty() {
        return Err(CliError::input(format!("no PLY clouds in {}", args.data.display())));
    }

    // Per object: per-point activations for every encoder channel, and the
    // per-point part labels aligned with the PLY point order.
    let mut channel_names: Vec<String> = Vec::new();
    let mut activation_masks: Vec<Vec<Vec<bool>>> = Vec::new();
    let mut labels_per_object: Vec<Vec<u32>> = Vec::new();
    let mut all_concepts: Vec<u32> = Vec::new();
    for path in &cloud_paths {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
        let cloud = parse_ply(&bytes).map_err(CliError::from_core)?;
        let seg_path = args
            .parts
            .join(path.file_stem().and_then(|s| s.to_str()).unwrap_or("object"))
            .with_extension("seg");
        let seg_bytes = std::fs::read(&seg_path)
            .map_err(|e| CliError::input(format!("cannot read {}: {e}", seg_path.display())))?;
        let labels = parse_part_labels(&seg_bytes, cloud.len()).map_err(CliError::from_core)?;
        let (_, acts, _) = encoder_features(&cloud, &encoder.layers).map_err(CliError::from_core)?;
        // ReLU layers only, grouped as feat1..featK.
        let feature_layers = &acts[..acts.len() - 1];
        if channel_names.is_empty() {
            for (l, layer) in feature_layers.iter().enumerate() {
                for c in 0..layer.cols {
                    channel_names.push(format!("feat{}_c{}", l + 1, c));
                }
            }
            activation_masks = vec![Vec::new(); channel_names.len()];
        }
        let mut channel = 0usize;
        for layer in feature_layers {
            for c in 0..layer.cols {
                let acts_c: Vec<f64> = (0..layer.rows).map(|i| layer.get(i, c)).collect();
                activation_masks[channel].push(activation_mask(&acts_c, fraction));
                channel += 1;
            }
        }
        for &l in &labels {
            if !all_concepts.contains(&l) {
                all_concepts.push(l);
            }
        }
        labels_per_object.push(labels);
    }
    all_concepts.sort_unstable();

    let concept_masks: Vec<Vec<Vec<bool>>> = all_concepts
        .iter()
        .map(|&concept| {
            labels_per_object
                .iter()
                .map(|labels| labels.iter().map(|&l| l == concept).collect())
                .collect()
        })
        .collect();

    let miou = dissection_miou(&activation_masks, &concept_masks).map_err(CliError::from_core)?;
    let header: Vec<String> = all_concepts.iter().map(|c| format!("concept_{c}")).collect();
    println!("channel,{}", header.join(","));
    for (name, row) in channel_names.iter().zip(&miou) {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        println!("{name},{}", cells.join(","));
    }
    let (total, unique) = count_detected_concepts(&miou, threshold);
    eprintln!(
        "channels {} x concepts {}: {total} detections above {threshold} covering {unique} concepts",
        channel_names.len(),
        all_concepts.len()
    );
    Ok(())
}
