//! JSON run configuration. Any value can also be set by a flag; flags win.
//! Unknown keys are rejected.

use serde::Deserialize;
use std::path::Path;

use occo_core::net::ModelDims;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum DimsSpec {
    Preset(String),
    Custom {
        point_mlp_widths: Vec<usize>,
        embed_dim: usize,
        coarse_mlp_widths: Vec<usize>,
        n_coarse: usize,
        grid_side: usize,
        #[serde(default = "default_grid_span")]
        grid_span: f64,
        fold_mlp_widths: Vec<usize>,
    },
}

fn default_grid_span() -> f64 {
    0.05
}

impl DimsSpec {
    pub fn resolve(&self) -> Result<ModelDims, String> {
        match self {
            DimsSpec::Preset(name) => match name.as_str() {
                "desk" => Ok(ModelDims::desk()),
                "paper" => Ok(ModelDims::paper()),
                "tiny" => Ok(ModelDims::tiny()),
                other => Err(format!("unknown dims preset '{other}' (desk|paper|tiny)")),
            },
            DimsSpec::Custom {
                point_mlp_widths,
                embed_dim,
                coarse_mlp_widths,
                n_coarse,
                grid_side,
                grid_span,
                fold_mlp_widths,
            } => Ok(ModelDims {
                point_mlp_widths: point_mlp_widths.clone(),
                embed_dim: *embed_dim,
                coarse_mlp_widths: coarse_mlp_widths.clone(),
                n_coarse: *n_coarse,
                grid_side: *grid_side,
                grid_span: *grid_span,
                fold_mlp_widths: fold_mlp_widths.clone(),
            }),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSection {
    pub views: Option<usize>,
    pub points: Option<usize>,
    pub coarse: Option<usize>,
    pub fine: Option<usize>,
    pub f: Option<f64>,
    pub gamma: Option<f64>,
    pub w: Option<f64>,
    pub h: Option<f64>,
    pub standoff: Option<f64>,
    pub eps_depth: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PretrainSection {
    pub epochs: Option<usize>,
    pub batch: Option<usize>,
    pub dims: Option<DimsSpec>,
    pub seed: Option<u64>,
    pub lr0: Option<f64>,
    pub lr_decay: Option<f64>,
    pub lr_every: Option<usize>,
    pub max_steps: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub probe_iterations: Option<usize>,
    pub probe_lr: Option<f64>,
    pub probe_l2: Option<f64>,
    pub ami_seeds: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissectSection {
    pub fraction: Option<f64>,
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandscapeSection {
    pub grid: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSection {
    pub count: Option<usize>,
    pub seed: Option<u64>,
    pub parts_points: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub threads: Option<usize>,
    #[serde(default)]
    pub gen: GenSection,
    #[serde(default)]
    pub pretrain: PretrainSection,
    #[serde(default)]
    pub probe: ProbeSection,
    #[serde(default)]
    pub dissect: DissectSection,
    #[serde(default)]
    pub landscape: LandscapeSection,
    #[serde(default)]
    pub synth: SynthSection,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }
}
