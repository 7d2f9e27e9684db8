//! Encoder-decoder completion model: a shared per-point MLP with max-pool
//! (permutation-invariant encoder), a fully connected coarse decoder, and a
//! folding decoder that warps a small 2D grid around each coarse point.
//! Forward and backward passes are written out exactly; no autodiff.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::cloud::{Point3, PointCloud};
use crate::error::{Error, Result};
use crate::losses::{completion_loss, CompletionLoss};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelDims {
    /// Shared per-point MLP widths (ReLU); a final linear layer maps to
    /// `embed_dim`.
    pub point_mlp_widths: Vec<usize>,
    pub embed_dim: usize,
    /// Coarse decoder hidden widths (ReLU); a final linear layer emits
    /// 3·n_coarse coordinates.
    pub coarse_mlp_widths: Vec<usize>,
    pub n_coarse: usize,
    pub grid_side: usize,
    /// Half-extent of the folding grid offsets.
    pub grid_span: f64,
    /// Folding MLP hidden widths (ReLU); a final linear layer emits the
    /// 3-vector displacement.
    pub fold_mlp_widths: Vec<usize>,
}

impl ModelDims {
    /// Desk-scale defaults: tractable for finite-difference sweeps.
    pub fn desk() -> Self {
        ModelDims {
            point_mlp_widths: vec![64, 128, 256],
            embed_dim: 128,
            coarse_mlp_widths: vec![128, 128],
            n_coarse: 64,
            grid_side: 4,
            grid_span: 0.05,
            fold_mlp_widths: vec![64, 64],
        }
    }

    /// Paper-scale dims: 1024-d embedding, 1024 coarse, 16384 fine points.
    pub fn paper() -> Self {
        ModelDims {
            point_mlp_widths: vec![128, 256, 512],
            embed_dim: 1024,
            coarse_mlp_widths: vec![1024, 1024],
            n_coarse: 1024,
            grid_side: 4,
            grid_span: 0.05,
            fold_mlp_widths: vec![512, 512],
        }
    }

    /// Tiny dims for gradient-check sweeps.
    pub fn tiny() -> Self {
        ModelDims {
            point_mlp_widths: vec![8, 16],
            embed_dim: 16,
            coarse_mlp_widths: vec![16],
            n_coarse: 4,
            grid_side: 2,
            grid_span: 0.05,
            fold_mlp_widths: vec![8, 8],
        }
    }

    pub fn fine_size(&self) -> usize {
        self.n_coarse * self.grid_side * self.grid_side
    }

    pub fn validate(&self) -> Result<()> {
        let all = self
            .point_mlp_widths
            .iter()
            .chain(self.coarse_mlp_widths.iter())
            .chain(self.fold_mlp_widths.iter())
            .chain([&self.embed_dim, &self.n_coarse, &self.grid_side]);
        for &w in all {
            if w < 1 {
                return Err(Error::InvalidInput("model dims must all be >= 1".into()));
            }
        }
        Ok(())
    }

    /// (fan_in, fan_out) per layer, in checkpoint order: encoder stack,
    /// coarse stack, folding stack.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut shapes = Vec::new();
        let mut push_stack = |input: usize, widths: &[usize], output: usize| {
            let mut prev = input;
            for &w in widths {
                shapes.push((prev, w));
                prev = w;
            }
            shapes.push((prev, output));
        };
        push_stack(3, &self.point_mlp_widths, self.embed_dim);
        push_stack(self.embed_dim, &self.coarse_mlp_widths, 3 * self.n_coarse);
        push_stack(self.embed_dim + 5, &self.fold_mlp_widths, 3);
        shapes
    }

    /// Folding grid offsets in row-major order.
    pub fn grid_offsets(&self) -> Vec<(f64, f64)> {
        let side = self.grid_side;
        let line: Vec<f64> = if side == 1 {
            vec![0.0]
        } else {
            (0..side)
                .map(|i| -self.grid_span + 2.0 * self.grid_span * i as f64 / (side - 1) as f64)
                .collect()
        };
        let mut offsets = Vec::with_capacity(side * side);
        for &gy in &line {
            for &gx in &line {
                offsets.push((gx, gy));
            }
        }
        offsets
    }
}

/// One affine layer: weights stored input×output.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub w: Matrix,
    pub b: Vec<f64>,
}

impl Dense {
    fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Dense { w: Matrix::zeros(fan_in, fan_out), b: vec![0.0; fan_out] }
    }
}

/// All encoder/decoder weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub dims: ModelDims,
    pub encoder: Vec<Dense>,
    pub coarse: Vec<Dense>,
    pub fold: Vec<Dense>,
}

impl ModelParams {
    pub fn stacks(&self) -> [&[Dense]; 3] {
        [&self.encoder, &self.coarse, &self.fold]
    }

    pub fn stacks_mut(&mut self) -> [&mut Vec<Dense>; 3] {
        [&mut self.encoder, &mut self.coarse, &mut self.fold]
    }

    pub fn zeros_like(&self) -> ModelParams {
        let make = |stack: &[Dense]| {
            stack
                .iter()
                .map(|d| Dense::zeros(d.w.rows, d.w.cols))
                .collect::<Vec<_>>()
        };
        ModelParams {
            dims: self.dims.clone(),
            encoder: make(&self.encoder),
            coarse: make(&self.coarse),
            fold: make(&self.fold),
        }
    }

    /// Accumulate `other * scale` into self (shape-checked).
    pub fn axpy(&mut self, scale: f64, other: &ModelParams) -> Result<()> {
        for (mine, theirs) in self.stacks_mut().into_iter().zip(other.stacks()) {
            if mine.len() != theirs.len() {
                return Err(Error::ShapeMismatch("layer count".into()));
            }
            for (a, b) in mine.iter_mut().zip(theirs) {
                if a.w.rows != b.w.rows || a.w.cols != b.w.cols {
                    return Err(Error::ShapeMismatch(format!(
                        "weight {}x{} vs {}x{}",
                        a.w.rows, a.w.cols, b.w.rows, b.w.cols
                    )));
                }
                for (x, y) in a.w.data.iter_mut().zip(&b.w.data) {
                    *x += scale * y;
                }
                for (x, y) in a.b.iter_mut().zip(&b.b) {
                    *x += scale * y;
                }
            }
        }
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.stacks().into_iter().flatten().all(|d| {
            d.w.data.iter().all(|v| v.is_finite()) && d.b.iter().all(|v| v.is_finite())
        })
    }
}

/// Glorot-uniform weights, zero biases; deterministic given the seed.
pub fn init_params(dims: &ModelDims, seed: u64) -> Result<ModelParams> {
    dims.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut init_stack = |input: usize, widths: &[usize], output: usize| -> Vec<Dense> {
        let mut layers = Vec::with_capacity(widths.len() + 1);
        let mut prev = input;
        for &w in widths.iter().chain(std::iter::once(&output)) {
            let bound = (6.0 / (prev + w) as f64).sqrt();
            let mut d = Dense::zeros(prev, w);
            for v in &mut d.w.data {
                *v = rng.gen_range(-bound..bound);
            }
            layers.push(d);
            prev = w;
        }
        layers
    };
    Ok(ModelParams {
        encoder: init_stack(3, &dims.point_mlp_widths, dims.embed_dim),
        coarse: init_stack(dims.embed_dim, &dims.coarse_mlp_widths, 3 * dims.n_coarse),
        fold: init_stack(dims.embed_dim + 5, &dims.fold_mlp_widths, 3),
        dims: dims.clone(),
    })
}

/// Encoder output vector plus the source label it came from.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub vector: Vec<f64>,
    pub source: Option<u32>,
}

/// Everything the exact backward pass (and the dissection probe) needs from
/// a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input points, one row per point.
    pub input: Matrix,
    /// Post-activation maps per encoder layer (ReLU layers then the linear
    /// embed layer); `enc_acts[l]` is points × width.
    pub enc_acts: Vec<Matrix>,
    /// Max-pool winner (point index) per embedding coordinate.
    pub argmax: Vec<usize>,
    pub embedding: Vec<f64>,
    /// Coarse decoder activations (single-row matrices per layer).
    pub coarse_acts: Vec<Matrix>,
    pub coarse_points: Vec<[f64; 3]>,
    /// Folding inputs (fine × (embed + 5)) and per-layer activation maps.
    pub fold_input: Matrix,
    pub fold_acts: Vec<Matrix>,
    pub fine_points: Vec<[f64; 3]>,
}

impl ForwardCache {
    fn empty() -> Self {
        ForwardCache {
            input: Matrix::zeros(0, 0),
            enc_acts: Vec::new(),
            argmax: Vec::new(),
            embedding: Vec::new(),
            coarse_acts: Vec::new(),
            coarse_points: Vec::new(),
            fold_input: Matrix::zeros(0, 0),
            fold_acts: Vec::new(),
            fine_points: Vec::new(),
        }
    }

    /// Per-point channel maps used by the dissection probe: the ReLU layers
    /// of the shared MLP, grouped per layer.
    pub fn encoder_feature_layers(&self) -> &[Matrix] {
        &self.enc_acts[..self.enc_acts.len().saturating_sub(1)]
    }
}

fn run_stack(x: Matrix, layers: &[Dense], acts: &mut Vec<Matrix>) -> Matrix {
    let mut cur = x;
    let last = layers.len() - 1;
    for (l, layer) in layers.iter().enumerate() {
        let mut y = Matrix::affine(&cur, &layer.w, &layer.b);
        if l != last {
            y = y.relu_inplace();
        }
        acts.push(y.clone());
        cur = y;
    }
    cur
}

/// Run the shared MLP over a cloud with an arbitrary encoder stack: returns
/// the max-pooled embedding, the per-layer activation maps, and the per-
/// coordinate max-pool winners. Ties go to the lowest point index.
pub fn encoder_features(cloud: &PointCloud, layers: &[Dense]) -> Result<(Vec<f64>, Vec<Matrix>, Vec<usize>)> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud("encoder_features"));
    }
    let n = cloud.len();
    let mut input = Matrix::zeros(n, 3);
    for (i, p) in cloud.points.iter().enumerate() {
        input.row_mut(i).copy_from_slice(&[p.x, p.y, p.z]);
    }
    let mut acts = Vec::new();
    let features = run_stack(input, layers, &mut acts);
    let e = features.cols;
    let mut embedding = vec![f64::NEG_INFINITY; e];
    let mut argmax = vec![0usize; e];
    for i in 0..n {
        for (j, &v) in features.row(i).iter().enumerate() {
            if v > embedding[j] {
                embedding[j] = v;
                argmax[j] = i;
            }
        }
    }
    Ok((embedding, acts, argmax))
}

/// Shared MLP over points, coordinatewise max over the point axis.
pub fn encoder_forward(cloud: &PointCloud, params: &ModelParams) -> Result<(Embedding, ForwardCache)> {
    let (embedding, enc_acts, argmax) = encoder_features(cloud, &params.encoder)?;
    let n = cloud.len();
    let mut input = Matrix::zeros(n, 3);
    for (i, p) in cloud.points.iter().enumerate() {
        input.row_mut(i).copy_from_slice(&[p.x, p.y, p.z]);
    }
    let mut cache = ForwardCache::empty();
    cache.input = input;
    cache.enc_acts = enc_acts;
    cache.argmax = argmax;
    cache.embedding = embedding.clone();
    Ok((Embedding { vector: embedding, source: cloud.label }, cache))
}

fn decode_into_cache(embedding: &[f64], params: &ModelParams, cache: &mut ForwardCache) {
    let dims = &params.dims;
    let embed_row = Matrix::from_rows(&[embedding.to_vec()]);
    let coarse_flat = run_stack(embed_row, &params.coarse, &mut cache.coarse_acts);
    let coarse: Vec<[f64; 3]> = (0..dims.n_coarse)
        .map(|i| {
            [
                coarse_flat.get(0, 3 * i),
                coarse_flat.get(0, 3 * i + 1),
                coarse_flat.get(0, 3 * i + 2),
            ]
        })
        .collect();

    let offsets = dims.grid_offsets();
    let fine_n = dims.fine_size();
    let mut fold_input = Matrix::zeros(fine_n, dims.embed_dim + 5);
    for (ci, c) in coarse.iter().enumerate() {
        for (gi, &(gx, gy)) in offsets.iter().enumerate() {
            let row = fold_input.row_mut(ci * offsets.len() + gi);
            row[..dims.embed_dim].copy_from_slice(embedding);
            row[dims.embed_dim..dims.embed_dim + 3].copy_from_slice(c);
            row[dims.embed_dim + 3] = gx;
            row[dims.embed_dim + 4] = gy;
        }
    }
    cache.fold_input = fold_input.clone();
    let disp = run_stack(fold_input, &params.fold, &mut cache.fold_acts);
    let fine: Vec<[f64; 3]> = (0..fine_n)
        .map(|k| {
            let c = coarse[k / offsets.len()];
            [
                c[0] + disp.get(k, 0),
                c[1] + disp.get(k, 1),
                c[2] + disp.get(k, 2),
            ]
        })
        .collect();
    cache.coarse_points = coarse;
    cache.fine_points = fine;
}

fn to_cloud(points: &[[f64; 3]]) -> PointCloud {
    PointCloud::new(points.iter().map(|p| Point3::new(p[0], p[1], p[2])).collect())
}

/// Decode an embedding to the coarse and fine clouds.
pub fn decode(embedding: &Embedding, params: &ModelParams) -> (PointCloud, PointCloud) {
    let mut cache = ForwardCache::empty();
    decode_into_cache(&embedding.vector, params, &mut cache);
    (to_cloud(&cache.coarse_points), to_cloud(&cache.fine_points))
}

/// Full forward pass retaining the cache for `backward`.
pub fn forward(cloud: &PointCloud, params: &ModelParams) -> Result<(PointCloud, PointCloud, ForwardCache)> {
    let (embedding, mut cache) = encoder_forward(cloud, params)?;
    decode_into_cache(&embedding.vector, params, &mut cache);
    Ok((to_cloud(&cache.coarse_points), to_cloud(&cache.fine_points), cache))
}

/// Backprop through one affine+ReLU stack. `d_out` is the gradient at the
/// stack output; returns the gradient at the stack input and pushes per-layer
/// weight gradients (in layer order) into `grads`.
fn backprop_stack(
    layers: &[Dense],
    input: &Matrix,
    acts: &[Matrix],
    mut d_out: Matrix,
    grads: &mut [Dense],
) -> Matrix {
    for l in (0..layers.len()).rev() {
        // d_out currently holds dL/d(post-activation of layer l); for
        // non-final layers the ReLU mask applies first.
        if l != layers.len() - 1 {
            Matrix::relu_backward_inplace(&mut d_out, &acts[l]);
        }
        let layer_input = if l == 0 { input } else { &acts[l - 1] };
        let dw = Matrix::grad_weights(layer_input, &d_out);
        for (g, v) in grads[l].w.data.iter_mut().zip(&dw.data) {
            *g += v;
        }
        for (g, v) in grads[l].b.iter_mut().zip(Matrix::grad_bias(&d_out)) {
            *g += v;
        }
        d_out = Matrix::grad_input(&d_out, &layers[l].w);
    }
    d_out
}

/// Exact gradient of the completion loss w.r.t. every parameter.
pub fn backward(
    coarse_gt: &PointCloud,
    fine_gt: &PointCloud,
    params: &ModelParams,
    cache: &ForwardCache,
    step: u64,
) -> Result<(CompletionLoss, ModelParams)> {
    let dims = &params.dims;
    if cache.embedding.len() != dims.embed_dim
        || cache.coarse_points.len() != dims.n_coarse
        || cache.fine_points.len() != dims.fine_size()
        || cache.enc_acts.len() != params.encoder.len()
        || cache.fold_acts.len() != params.fold.len()
    {
        return Err(Error::StaleCache(format!(
            "cache carries embed={} coarse={} fine={}, model expects embed={} coarse={} fine={}",
            cache.embedding.len(),
            cache.coarse_points.len(),
            cache.fine_points.len(),
            dims.embed_dim,
            dims.n_coarse,
            dims.fine_size()
        )));
    }

    let coarse_pred = to_cloud(&cache.coarse_points);
    let fine_pred = to_cloud(&cache.fine_points);
    let loss = completion_loss(&coarse_pred, &fine_pred, coarse_gt, fine_gt, step)?;
    let mut grads = params.zeros_like();

    // Fine branch: through the folding stack.
    let fine_n = dims.fine_size();
    let grid_sq = dims.grid_side * dims.grid_side;
    let mut d_disp = Matrix::zeros(fine_n, 3);
    for (k, g) in loss.grad_fine.iter().enumerate() {
        d_disp.row_mut(k).copy_from_slice(g);
    }
    let d_fold_input = backprop_stack(
        &params.fold,
        &cache.fold_input,
        &cache.fold_acts,
        d_disp,
        &mut grads.fold,
    );

    // Coarse totals: loss gradient + identity path + folding input path.
    let mut d_coarse = vec![[0.0_f64; 3]; dims.n_coarse];
    for (ci, g) in loss.grad_coarse.iter().enumerate() {
        d_coarse[ci] = *g;
    }
    for k in 0..fine_n {
        let ci = k / grid_sq;
        let gf = &loss.grad_fine[k];
        let fold_row = d_fold_input.row(k);
        for d in 0..3 {
            d_coarse[ci][d] += gf[d] + fold_row[dims.embed_dim + d];
        }
    }

    // Embedding contributions from the folding inputs.
    let mut d_embed = vec![0.0_f64; dims.embed_dim];
    for k in 0..fine_n {
        let fold_row = d_fold_input.row(k);
        for (e, de) in d_embed.iter_mut().enumerate() {
            *de += fold_row[e];
        }
    }

    // Coarse branch: through the coarse stack.
    let mut d_coarse_flat = Matrix::zeros(1, 3 * dims.n_coarse);
    for (ci, g) in d_coarse.iter().enumerate() {
        d_coarse_flat.row_mut(0)[3 * ci..3 * ci + 3].copy_from_slice(g);
    }
    let embed_row = Matrix::from_rows(&[cache.embedding.clone()]);
    let d_embed_from_coarse = backprop_stack(
        &params.coarse,
        &embed_row,
        &cache.coarse_acts,
        d_coarse_flat,
        &mut grads.coarse,
    );
    for (de, v) in d_embed.iter_mut().zip(d_embed_from_coarse.row(0)) {
        *de += v;
    }

    // Max-pool: gradient flows only to the argmax winners.
    let n_points = cache.input.rows;
    let mut d_features = Matrix::zeros(n_points, dims.embed_dim);
    for (e, &winner) in cache.argmax.iter().enumerate() {
        d_features.row_mut(winner)[e] += d_embed[e];
    }
    backprop_stack(
        &params.encoder,
        &cache.input,
        &cache.enc_acts,
        d_features,
        &mut grads.encoder,
    );

    Ok((loss, grads))
}
