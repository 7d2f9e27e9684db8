pub mod complete;
pub mod dissect;
pub mod gen;
pub mod landscape;
pub mod pretrain;
pub mod probe;
pub mod synth;

use std::path::Path;

use occo_core::ckpt::{load_encoder, load_train, EncoderCkpt};
use occo_core::dataset::{read_dataset, CompletionSample};
use occo_core::PointCloud;

use crate::CliError;

/// Load an encoder stack from either checkpoint kind.
pub fn load_any_encoder(path: &Path) -> Result<EncoderCkpt, CliError> {
    match load_encoder(path) {
        Ok(enc) => Ok(enc),
        Err(occo_core::Error::DimsMismatch(_)) => {
            let full = load_train(path).map_err(CliError::from_ckpt)?;
            Ok(EncoderCkpt::from_params(&full.params))
        }
        Err(e) => Err(CliError::from_ckpt(e)),
    }
}

pub fn load_samples(path: &Path) -> Result<Vec<CompletionSample>, CliError> {
    let samples = read_dataset(path).map_err(CliError::from_core)?;
    if samples.is_empty() {
        return Err(CliError::input(format!("dataset {} is empty", path.display())));
    }
    Ok(samples)
}

/// One representative cloud per distinct object id: the fine ground truth of
/// its first record.
pub fn object_clouds(samples: &[CompletionSample]) -> Vec<(u32, PointCloud)> {
    let mut seen = std::collections::BTreeMap::new();
    for s in samples {
        seen.entry(s.object_id).or_insert_with(|| s.fine_gt.clone());
    }
    seen.into_iter().collect()
}

pub fn read_label_file(path: &Path) -> Result<Vec<u32>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read labels {}: {e}", path.display())))?;
    text.split_whitespace()
        .map(|t| {
            t.parse::<u32>()
                .map_err(|_| CliError::input(format!("bad label '{t}' in {}", path.display())))
        })
        .collect()
}
