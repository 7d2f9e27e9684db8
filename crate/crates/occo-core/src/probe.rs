//! Encoder evaluation probes: K-means clustering scored by adjusted mutual
//! information under cumulative transformations, a linear probe on frozen
//! embeddings, network-dissection concept detection, and filter-normalized
//! loss-landscape slices.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::cloud::{apply_transform, PointCloud, TransformSpec};
use crate::dataset::CompletionSample;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::net::{encoder_features, Dense, ModelParams};
use crate::seed::rng_for;
use crate::train::dataset_loss;

// ---------------------------------------------------------------------------
// K-means
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub labels: Vec<usize>,
    pub k: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn assign(data: &[Vec<f64>], centroids: &[Vec<f64>]) -> Vec<usize> {
    data.iter()
        .map(|x| {
            let mut best = (f64::INFINITY, 0usize);
            for (c, centroid) in centroids.iter().enumerate() {
                let d = sq_dist(x, centroid);
                if d < best.0 {
                    best = (d, c);
                }
            }
            best.1
        })
        .collect()
}

/// Lloyd iterations from explicit initial centroids; returns labels,
/// centroids, and inertia. Empty clusters are reseeded to the point farthest
/// from its centroid.
pub fn lloyd(data: &[Vec<f64>], init: &[Vec<f64>], max_iter: usize) -> (Vec<usize>, Vec<Vec<f64>>, f64) {
    let k = init.len();
    let dim = init[0].len();
    let mut centroids: Vec<Vec<f64>> = init.to_vec();
    let mut labels = assign(data, &centroids);
    for _ in 0..max_iter {
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (x, &l) in data.iter().zip(&labels) {
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(x) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for s in &mut sums[c] {
                    *s /= counts[c] as f64;
                }
                centroids[c] = sums[c].clone();
            } else {
                // Reseed an empty cluster at the worst-fit point.
                let far = data
                    .iter()
                    .enumerate()
                    .max_by(|(i, x), (j, y)| {
                        let dx = sq_dist(x, &centroids[labels[*i]]);
                        let dy = sq_dist(y, &centroids[labels[*j]]);
                        dx.partial_cmp(&dy).unwrap().then(j.cmp(i))
                    })
                    .map(|(i, _)| i)
                    .unwrap();
                centroids[c] = data[far].clone();
            }
        }
        let next = assign(data, &centroids);
        if next == labels {
            labels = next;
            break;
        }
        labels = next;
    }
    let inertia: f64 = data
        .iter()
        .zip(&labels)
        .map(|(x, &l)| sq_dist(x, &centroids[l]))
        .sum();
    (labels, centroids, inertia)
}

fn kmeans_pp_init(data: &[Vec<f64>], k: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut centroids: Vec<Vec<f64>> = vec![data[rng.gen_range(0..data.len())].clone()];
    let mut d2: Vec<f64> = data.iter().map(|x| sq_dist(x, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut t = rng.gen::<f64>() * total;
            let mut chosen = data.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                if t < w {
                    chosen = i;
                    break;
                }
                t -= w;
            }
            chosen
        } else {
            // All mass covered (duplicate-heavy data): take the lowest index
            // not yet a centroid.
            (0..data.len())
                .find(|&i| !centroids.iter().any(|c| c == &data[i]))
                .unwrap_or(0)
        };
        centroids.push(data[next].clone());
        for (i, x) in data.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(x, centroids.last().unwrap()));
        }
    }
    centroids
}

pub const KMEANS_RESTARTS: usize = 10;
pub const KMEANS_MAX_ITER: usize = 300;

/// K-means++ with 10 restarts; the lowest-inertia run wins, ties resolved by
/// the lowest restart index. Deterministic given the seed.
pub fn kmeans(data: &[Vec<f64>], k: usize, seed: u64) -> Result<Clustering> {
    if k < 1 {
        return Err(Error::InvalidInput("k must be >= 1".into()));
    }
    if data.len() < k {
        return Err(Error::TooFewItems { k, got: data.len() });
    }
    let runs: Vec<(f64, Vec<usize>)> = (0..KMEANS_RESTARTS)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_for(seed, "kmeans-restart", &[r as u64]);
            let init = kmeans_pp_init(data, k, &mut rng);
            let (labels, _, inertia) = lloyd(data, &init, KMEANS_MAX_ITER);
            (inertia, labels)
        })
        .collect();
    let best = runs
        .iter()
        .enumerate()
        .min_by(|(i, (a, _)), (j, (b, _))| a.partial_cmp(b).unwrap().then(i.cmp(j)))
        .map(|(_, (_, labels))| labels.clone())
        .expect("at least one restart");
    Ok(Clustering { labels: best, k })
}

// ---------------------------------------------------------------------------
// Adjusted mutual information
// ---------------------------------------------------------------------------

fn contingency(a: &Clustering, b: &Clustering) -> (Vec<Vec<usize>>, Vec<usize>, Vec<usize>) {
    let mut table = vec![vec![0usize; b.k]; a.k];
    for (&la, &lb) in a.labels.iter().zip(&b.labels) {
        table[la][lb] += 1;
    }
    let rows: Vec<usize> = table.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<usize> = (0..b.k).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    (table, rows, cols)
}

fn entropy(counts: &[usize], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// AMI with the hypergeometric expected-MI correction and arithmetic-mean
/// entropy normalization; 0/0 is defined as 0.
pub fn ami(a: &Clustering, b: &Clustering) -> Result<f64> {
    if a.labels.len() != b.labels.len() {
        return Err(Error::LengthMismatch(a.labels.len(), b.labels.len()));
    }
    let n = a.labels.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty clusterings".into()));
    }
    let (table, rows, cols) = contingency(a, b);

    // Identical up to relabeling: a permutation contingency. AMI is exactly 1
    // whenever the clusterings carry any information at all.
    let permutation_like = rows.iter().all(|&r| r == 0 || table.iter().any(|_| true))
        && table.iter().enumerate().all(|(i, row)| {
            let nz = row.iter().filter(|&&v| v > 0).count();
            (rows[i] == 0 && nz == 0) || nz == 1
        })
        && (0..cols.len()).all(|j| {
            let nz = table.iter().filter(|row| row[j] > 0).count();
            (cols[j] == 0 && nz == 0) || nz == 1
        });
    let nf = n as f64;
    let h_a = entropy(&rows, nf);
    let h_b = entropy(&cols, nf);
    if permutation_like {
        return Ok(if h_a > 0.0 && h_b > 0.0 { 1.0 } else { 0.0 });
    }

    let mut mi = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &nij) in row.iter().enumerate() {
            if nij > 0 {
                let nij_f = nij as f64;
                mi += (nij_f / nf) * ((nf * nij_f) / (rows[i] as f64 * cols[j] as f64)).ln();
            }
        }
    }

    // Expected MI under the hypergeometric model of random labelings with
    // fixed marginals.
    let mut ln_fact = vec![0.0_f64; n + 1];
    for i in 1..=n {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    let mut emi = 0.0;
    for &ai in rows.iter().filter(|&&r| r > 0) {
        for &bj in cols.iter().filter(|&&c| c > 0) {
            let start = 1.max((ai + bj).saturating_sub(n));
            let end = ai.min(bj);
            for nij in start..=end {
                let nij_f = nij as f64;
                let term = (nij_f / nf) * ((nf * nij_f) / (ai as f64 * bj as f64)).ln();
                let ln_p = ln_fact[ai] + ln_fact[bj] + ln_fact[n - ai] + ln_fact[n - bj]
                    - ln_fact[n]
                    - ln_fact[nij]
                    - ln_fact[ai - nij]
                    - ln_fact[bj - nij]
                    - ln_fact[n + nij - ai - bj];
                emi += term * ln_p.exp();
            }
        }
    }

    let denom = 0.5 * (h_a + h_b) - emi;
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((mi - emi) / denom)
}

// ---------------------------------------------------------------------------
// Robustness probe
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct RobustnessRow {
    /// Cumulative transform row: "", "J", "J+T", "J+T+R".
    pub transforms: String,
    pub ami_mean: f64,
    pub ami_stderr: f64,
}

pub fn embed_cloud(encoder: &[Dense], cloud: &PointCloud) -> Result<Vec<f64>> {
    Ok(encoder_features(cloud, encoder)?.0)
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Cluster embeddings of transformed clouds against ground-truth labels,
/// one row per cumulative transform (none; jitter; +translate; +rotate),
/// mean ± standard error over `n_seeds` seeds.
pub fn robustness_probe(
    encoder: &[Dense],
    clouds: &[PointCloud],
    labels: &[u32],
    n_seeds: usize,
    master_seed: u64,
) -> Result<Vec<RobustnessRow>> {
    if clouds.len() != labels.len() {
        return Err(Error::LengthMismatch(clouds.len(), labels.len()));
    }
    let mut classes: Vec<u32> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let k = classes.len();
    let truth = Clustering {
        labels: labels
            .iter()
            .map(|l| classes.iter().position(|c| c == l).unwrap())
            .collect(),
        k,
    };
    let stages: [(&str, &[TransformSpec]); 4] = [
        ("", &[]),
        ("J", &[TransformSpec::Jitter { sigma: 0.01, clip: 0.05 }]),
        (
            "J+T",
            &[
                TransformSpec::Jitter { sigma: 0.01, clip: 0.05 },
                TransformSpec::Translate { range: 0.2 },
            ],
        ),
        (
            "J+T+R",
            &[
                TransformSpec::Jitter { sigma: 0.01, clip: 0.05 },
                TransformSpec::Translate { range: 0.2 },
                TransformSpec::Rotate { angles: None },
            ],
        ),
    ];
    let mut rows = Vec::with_capacity(stages.len());
    for (si, (name, specs)) in stages.iter().enumerate() {
        let amis: Vec<f64> = (0..n_seeds)
            .map(|seed_i| -> Result<f64> {
                let embeddings: Vec<Vec<f64>> = clouds
                    .par_iter()
                    .enumerate()
                    .map(|(ci, cloud)| {
                        let mut transformed = cloud.clone();
                        let mut rng = rng_for(
                            master_seed,
                            "probe-transform",
                            &[si as u64, seed_i as u64, ci as u64],
                        );
                        for spec in specs.iter() {
                            transformed = apply_transform(&transformed, spec, &mut rng);
                        }
                        embed_cloud(encoder, &transformed)
                    })
                    .collect::<Result<_>>()?;
                let clustering = kmeans(
                    &embeddings,
                    k,
                    crate::seed::derive_seed(master_seed, "probe-kmeans", &[si as u64, seed_i as u64]),
                )?;
                ami(&clustering, &truth)
            })
            .collect::<Result<_>>()?;
        let (mean, stderr) = mean_stderr(&amis);
        rows.push(RobustnessRow { transforms: name.to_string(), ami_mean: mean, ami_stderr: stderr });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Linear probe
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ProbeConfig {
    pub iterations: usize,
    pub lr: f64,
    pub l2: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { iterations: 500, lr: 0.1, l2: 1e-4 }
    }
}

/// Per-class hinge-loss linear classifiers over embedding space.
#[derive(Debug, Clone)]
pub struct ProbeModel {
    pub classes: Vec<u32>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl ProbeModel {
    pub fn predict(&self, x: &[f64]) -> u32 {
        let z: Vec<f64> = x
            .iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) * s)
            .collect();
        let mut best = (f64::NEG_INFINITY, 0usize);
        for (c, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let score = w.iter().zip(&z).map(|(wi, zi)| wi * zi).sum::<f64>() + b;
            if score > best.0 {
                best = (score, c);
            }
        }
        self.classes[best.1]
    }
}

/// Fit one-vs-rest hinge-loss classifiers by deterministic full-batch
/// gradient descent on standardized embeddings.
pub fn fit_linear_probe(
    embeddings: &[Vec<f64>],
    labels: &[u32],
    config: &ProbeConfig,
) -> Result<ProbeModel> {
    if embeddings.len() != labels.len() {
        return Err(Error::LengthMismatch(embeddings.len(), labels.len()));
    }
    let mut classes: Vec<u32> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::SingleClass);
    }
    let n = embeddings.len();
    let dim = embeddings[0].len();
    let mut mean = vec![0.0; dim];
    for x in embeddings {
        for (m, v) in mean.iter_mut().zip(x) {
            *m += v / n as f64;
        }
    }
    let mut scale = vec![0.0; dim];
    for x in embeddings {
        for (s, (v, m)) in scale.iter_mut().zip(x.iter().zip(&mean)) {
            *s += (v - m) * (v - m) / n as f64;
        }
    }
    for s in &mut scale {
        let sd = s.sqrt();
        *s = if sd > 1e-12 { 1.0 / sd } else { 1.0 };
    }
    let standardized: Vec<Vec<f64>> = embeddings
        .iter()
        .map(|x| {
            x.iter()
                .zip(&mean)
                .zip(&scale)
                .map(|((v, m), s)| (v - m) * s)
                .collect()
        })
        .collect();

    let mut weights = vec![vec![0.0; dim]; classes.len()];
    let mut biases = vec![0.0; classes.len()];
    for (c, &class) in classes.iter().enumerate() {
        let ys: Vec<f64> = labels
            .iter()
            .map(|&l| if l == class { 1.0 } else { -1.0 })
            .collect();
        let w = &mut weights[c];
        let b = &mut biases[c];
        for _ in 0..config.iterations {
            let mut gw = vec![0.0; dim];
            let mut gb = 0.0;
            for (x, &y) in standardized.iter().zip(&ys) {
                let margin = y * (w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>() + *b);
                if margin < 1.0 {
                    for (g, xi) in gw.iter_mut().zip(x) {
                        *g -= y * xi;
                    }
                    gb -= y;
                }
            }
            let inv_n = 1.0 / n as f64;
            for (wi, g) in w.iter_mut().zip(&gw) {
                *wi -= config.lr * (g * inv_n + 2.0 * config.l2 * *wi);
            }
            *b -= config.lr * gb * inv_n;
        }
    }
    Ok(ProbeModel { classes, weights, biases, mean, scale })
}

/// Train on one split, report accuracy on the other.
pub fn linear_probe(
    train: (&[Vec<f64>], &[u32]),
    test: (&[Vec<f64>], &[u32]),
    config: &ProbeConfig,
) -> Result<f64> {
    let model = fit_linear_probe(train.0, train.1, config)?;
    if test.0.len() != test.1.len() {
        return Err(Error::LengthMismatch(test.0.len(), test.1.len()));
    }
    let correct = test
        .0
        .iter()
        .zip(test.1)
        .filter(|(x, &y)| model.predict(x) == y)
        .count();
    Ok(correct as f64 / test.0.len() as f64)
}

// ---------------------------------------------------------------------------
// Network dissection
// ---------------------------------------------------------------------------

/// Mark the ceil(fraction·n) largest activations; ties go to the lowest
/// point index.
pub fn activation_mask(activations: &[f64], fraction: f64) -> Vec<bool> {
    let n = activations.len();
    let take = ((fraction * n as f64).ceil() as usize).min(n);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        activations[b]
            .partial_cmp(&activations[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut mask = vec![false; n];
    for &i in &idx[..take] {
        mask[i] = true;
    }
    mask
}

/// mIoU(k, n) = mean over objects of |M_k ∩ C_n| / |M_k ∪ C_n|; objects with
/// an empty union contribute 0. Outer index: channel / concept; inner:
/// object.
pub fn dissection_miou(
    activation_masks: &[Vec<Vec<bool>>],
    concept_masks: &[Vec<Vec<bool>>],
) -> Result<Vec<Vec<f64>>> {
    let n_objects = activation_masks
        .first()
        .map(|c| c.len())
        .or_else(|| concept_masks.first().map(|c| c.len()))
        .unwrap_or(0);
    for masks in activation_masks.iter().chain(concept_masks) {
        if masks.len() != n_objects {
            return Err(Error::LengthMismatch(masks.len(), n_objects));
        }
    }
    for obj in 0..n_objects {
        let expected = activation_masks
            .first()
            .map(|c| c[obj].len())
            .or_else(|| concept_masks.first().map(|c| c[obj].len()))
            .unwrap_or(0);
        for masks in activation_masks.iter().chain(concept_masks) {
            if masks[obj].len() != expected {
                return Err(Error::MaskLengthMismatch { got: masks[obj].len(), expected });
            }
        }
    }
    let mut result = vec![vec![0.0; concept_masks.len()]; activation_masks.len()];
    for (k, act) in activation_masks.iter().enumerate() {
        for (n, con) in concept_masks.iter().enumerate() {
            let mut sum = 0.0;
            for obj in 0..n_objects {
                let (mut inter, mut union) = (0usize, 0usize);
                for (&m, &c) in act[obj].iter().zip(&con[obj]) {
                    inter += usize::from(m && c);
                    union += usize::from(m || c);
                }
                if union > 0 {
                    sum += inter as f64 / union as f64;
                }
            }
            result[k][n] = sum / n_objects.max(1) as f64;
        }
    }
    Ok(result)
}

/// Count (channel, concept) pairs with mIoU strictly above the threshold,
/// and the number of distinct concepts detected by at least one channel.
pub fn count_detected_concepts(miou: &[Vec<f64>], threshold: f64) -> (usize, usize) {
    let mut total = 0usize;
    let n_concepts = miou.first().map(|r| r.len()).unwrap_or(0);
    let mut detected = vec![false; n_concepts];
    for row in miou {
        for (n, &v) in row.iter().enumerate() {
            if v > threshold {
                total += 1;
                detected[n] = true;
            }
        }
    }
    (total, detected.iter().filter(|&&d| d).count())
}

/// Parse a part-label file: whitespace-separated integers, one per point,
/// aligned with the cloud's point order.
pub fn parse_part_labels(bytes: &[u8], expected: usize) -> Result<Vec<u32>> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| Error::MalformedHeader("part labels not UTF-8".into()))?;
    let labels: Vec<u32> = text
        .split_whitespace()
        .map(|t| {
            t.parse::<u32>()
                .map_err(|_| Error::MalformedHeader(format!("bad part label '{t}'")))
        })
        .collect::<Result<_>>()?;
    if labels.len() != expected {
        return Err(Error::MaskLengthMismatch { got: labels.len(), expected });
    }
    Ok(labels)
}

// ---------------------------------------------------------------------------
// Loss landscape
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct LandscapeSlice {
    pub grid_side: usize,
    pub alphas: Vec<f64>,
    /// values[bi][ai] = mean loss at (alphas[ai], alphas[bi]).
    pub values: Vec<Vec<f64>>,
    pub seed: u64,
}

impl LandscapeSlice {
    pub fn center(&self) -> f64 {
        let c = self.grid_side / 2;
        self.values[c][c]
    }
}

/// Gaussian parameter-shaped direction, then each filter (an output unit's
/// incoming weight column; each bias vector as a whole) rescaled to the norm
/// of its counterpart in the reference parameters.
pub fn filter_normalized_direction(reference: &ModelParams, seed: u64) -> ModelParams {
    let mut rng = rng_for(seed, "landscape-direction", &[]);
    let mut dir = reference.zeros_like();
    for stack in dir.stacks_mut() {
        for d in stack.iter_mut() {
            for v in &mut d.w.data {
                *v = StandardNormal.sample(&mut rng);
            }
            for v in &mut d.b {
                *v = StandardNormal.sample(&mut rng);
            }
        }
    }
    for (d_stack, r_stack) in dir.stacks_mut().into_iter().zip(reference.stacks()) {
        for (d, r) in d_stack.iter_mut().zip(r_stack) {
            for j in 0..d.w.cols {
                let ref_norm = column_norm(&r.w, j);
                let dir_norm = column_norm(&d.w, j);
                let scale = if dir_norm > 0.0 { ref_norm / dir_norm } else { 0.0 };
                for i in 0..d.w.rows {
                    let v = d.w.get(i, j) * scale;
                    d.w.set(i, j, v);
                }
            }
            let ref_b = norm(&r.b);
            let dir_b = norm(&d.b);
            let scale = if dir_b > 0.0 { ref_b / dir_b } else { 0.0 };
            for v in &mut d.b {
                *v *= scale;
            }
        }
    }
    dir
}

fn column_norm(m: &Matrix, j: usize) -> f64 {
    (0..m.rows).map(|i| m.get(i, j) * m.get(i, j)).sum::<f64>().sqrt()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Mean dataset loss on the grid θ* + αδ + βη for α, β on a uniform odd-side
/// grid over [-1, 1]²; the center node evaluates θ* exactly.
pub fn landscape_slice(
    params: &ModelParams,
    dataset: &[CompletionSample],
    grid_side: usize,
    seed: u64,
    step: u64,
) -> Result<LandscapeSlice> {
    if grid_side < 3 || grid_side % 2 == 0 {
        return Err(Error::InvalidInput("grid side must be odd and >= 3".into()));
    }
    let delta = filter_normalized_direction(params, crate::seed::derive_seed(seed, "delta", &[]));
    let eta = filter_normalized_direction(params, crate::seed::derive_seed(seed, "eta", &[]));
    let alphas: Vec<f64> = (0..grid_side)
        .map(|i| -1.0 + 2.0 * i as f64 / (grid_side - 1) as f64)
        .collect();
    let values: Vec<Vec<f64>> = alphas
        .par_iter()
        .map(|&beta| {
            alphas
                .iter()
                .map(|&alpha| {
                    let mut theta = params.clone();
                    theta.axpy(alpha, &delta)?;
                    theta.axpy(beta, &eta)?;
                    dataset_loss(dataset, &theta, step)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(LandscapeSlice { grid_side, alphas, values, seed })
}
