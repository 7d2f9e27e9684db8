//! Distances between point sets: normalized symmetric Chamfer distance with
//! analytic gradients, exact and auction-approximate Earth Mover distance,
//! and the combined two-stage completion loss with its alpha schedule.
//!
//! The accelerated Chamfer path and the brute-force oracle share the same
//! squared-distance expression, lowest-index tie rule, and summation order,
//! so they agree bitwise.

use crate::cloud::{Point3, PointCloud};
use crate::error::{Error, Result};

pub const EMD_EXACT_MAX: usize = 16;

/// A loss value with optional per-point gradient w.r.t. the predicted cloud.
#[derive(Debug, Clone)]
pub struct LossValue {
    pub value: f64,
    pub gradient: Option<Vec<[f64; 3]>>,
}

/// A bijection between equal-size point sets and its mean matched distance.
#[derive(Debug, Clone)]
pub struct Assignment {
    pub mapping: Vec<usize>,
    pub cost: f64,
}

#[inline]
fn sq_dist(a: &Point3, b: &Point3) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let dz = a.z - b.z;
    dx * dx + dy * dy + dz * dz
}

// ---------------------------------------------------------------------------
// kd-tree nearest neighbor with lowest-index tie breaking
// ---------------------------------------------------------------------------

struct KdTree<'a> {
    points: &'a [Point3],
    /// Flattened recursive layout: node = (point index, split axis).
    order: Vec<usize>,
    axis: Vec<u8>,
}

impl<'a> KdTree<'a> {
    fn build(points: &'a [Point3]) -> Self {
        let mut idx: Vec<usize> = (0..points.len()).collect();
        let mut order = vec![0usize; points.len()];
        let mut axis = vec![0u8; points.len()];
        Self::build_rec(points, &mut idx[..], 0, &mut order, &mut axis);
        KdTree { points, order, axis }
    }

    /// Writes the subtree of `idx` into positions [start, start+len) with the
    /// root at start + len/2, mirroring the traversal in `search`.
    fn build_rec(
        points: &[Point3],
        idx: &mut [usize],
        start: usize,
        order: &mut [usize],
        axis: &mut [u8],
    ) {
        if idx.is_empty() {
            return;
        }
        let (mut lo, mut hi) = ([f64::MAX; 3], [f64::MIN; 3]);
        for &i in idx.iter() {
            let p = &points[i];
            for (d, v) in [p.x, p.y, p.z].into_iter().enumerate() {
                lo[d] = lo[d].min(v);
                hi[d] = hi[d].max(v);
            }
        }
        let mut ax = 0u8;
        for d in 1..3 {
            if hi[d] - lo[d] > hi[ax as usize] - lo[ax as usize] {
                ax = d as u8;
            }
        }
        let coord = |i: usize| match ax {
            0 => points[i].x,
            1 => points[i].y,
            _ => points[i].z,
        };
        let mid = idx.len() / 2;
        idx.select_nth_unstable_by(mid, |&a, &b| {
            coord(a).partial_cmp(&coord(b)).unwrap().then(a.cmp(&b))
        });
        order[start + mid] = idx[mid];
        axis[start + mid] = ax;
        let (left, rest) = idx.split_at_mut(mid);
        Self::build_rec(points, left, start, order, axis);
        Self::build_rec(points, &mut rest[1..], start + mid + 1, order, axis);
    }

    /// Nearest point to q as (squared distance, index); ties go to the
    /// lowest index exactly as the brute-force scan does.
    fn nearest(&self, q: &Point3) -> (f64, usize) {
        let mut best = (f64::INFINITY, usize::MAX);
        self.search(q, 0, self.order.len(), &mut best);
        best
    }

    fn search(&self, q: &Point3, start: usize, len: usize, best: &mut (f64, usize)) {
        if len == 0 {
            return;
        }
        let mid = len / 2;
        let node = self.order[start + mid];
        let p = &self.points[node];
        let d2 = sq_dist(q, p);
        if d2 < best.0 || (d2 == best.0 && node < best.1) {
            *best = (d2, node);
        }
        let ax = self.axis[start + mid];
        let delta = match ax {
            0 => q.x - p.x,
            1 => q.y - p.y,
            _ => q.z - p.z,
        };
        let (near_start, near_len, far_start, far_len) = if delta < 0.0 {
            (start, mid, start + mid + 1, len - mid - 1)
        } else {
            (start + mid + 1, len - mid - 1, start, mid)
        };
        self.search(q, near_start, near_len, best);
        if delta * delta <= best.0 {
            self.search(q, far_start, far_len, best);
        }
    }
}

fn nearest_bruteforce(q: &Point3, points: &[Point3]) -> (f64, usize) {
    let mut best = (f64::INFINITY, usize::MAX);
    for (j, p) in points.iter().enumerate() {
        let d2 = sq_dist(q, p);
        if d2 < best.0 {
            best = (d2, j);
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Chamfer distance
// ---------------------------------------------------------------------------

fn chamfer_impl(
    pred: &PointCloud,
    target: &PointCloud,
    nn_into_target: &dyn Fn(&Point3) -> (f64, usize),
    nn_into_pred: &dyn Fn(&Point3) -> (f64, usize),
) -> LossValue {
    let n = pred.len() as f64;
    let m = target.len() as f64;
    let mut grad = vec![[0.0; 3]; pred.len()];

    let mut sum_pred = 0.0;
    for (i, p) in pred.points.iter().enumerate() {
        let (d2, j) = nn_into_target(p);
        let d = d2.sqrt();
        sum_pred += d;
        if d > 0.0 {
            let t = &target.points[j];
            let scale = 1.0 / (n * d);
            grad[i][0] += (p.x - t.x) * scale;
            grad[i][1] += (p.y - t.y) * scale;
            grad[i][2] += (p.z - t.z) * scale;
        }
    }

    let mut sum_target = 0.0;
    for x in &target.points {
        let (d2, k) = nn_into_pred(x);
        let d = d2.sqrt();
        sum_target += d;
        if d > 0.0 {
            let p = &pred.points[k];
            let scale = 1.0 / (m * d);
            grad[k][0] += (p.x - x.x) * scale;
            grad[k][1] += (p.y - x.y) * scale;
            grad[k][2] += (p.z - x.z) * scale;
        }
    }

    LossValue { value: sum_pred / n + sum_target / m, gradient: Some(grad) }
}

/// Normalized symmetric Chamfer distance with analytic gradient w.r.t. the
/// predicted cloud. Nearest-neighbor lookups go through a kd-tree.
pub fn chamfer(pred: &PointCloud, target: &PointCloud) -> Result<LossValue> {
    if pred.is_empty() || target.is_empty() {
        return Err(Error::EmptyCloud("chamfer"));
    }
    let target_tree = KdTree::build(&target.points);
    let pred_tree = KdTree::build(&pred.points);
    Ok(chamfer_impl(
        pred,
        target,
        &|q| target_tree.nearest(q),
        &|q| pred_tree.nearest(q),
    ))
}

/// O(n·m) oracle with the identical contract to `chamfer`.
pub fn chamfer_bruteforce(pred: &PointCloud, target: &PointCloud) -> Result<LossValue> {
    if pred.is_empty() || target.is_empty() {
        return Err(Error::EmptyCloud("chamfer_bruteforce"));
    }
    Ok(chamfer_impl(
        pred,
        target,
        &|q| nearest_bruteforce(q, &target.points),
        &|q| nearest_bruteforce(q, &pred.points),
    ))
}

// ---------------------------------------------------------------------------
// Earth Mover distance
// ---------------------------------------------------------------------------

fn cost_matrix(pred: &PointCloud, target: &PointCloud) -> Vec<Vec<f64>> {
    pred.points
        .iter()
        .map(|p| target.points.iter().map(|t| sq_dist(p, t).sqrt()).collect())
        .collect()
}

fn mean_cost(cost: &[Vec<f64>], mapping: &[usize]) -> f64 {
    let total: f64 = mapping.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
    total / mapping.len() as f64
}

/// Exact minimal mean matched distance via the Hungarian algorithm
/// (shortest augmenting paths with potentials). Capped at 16 points.
pub fn emd_exact(pred: &PointCloud, target: &PointCloud) -> Result<Assignment> {
    if pred.len() != target.len() {
        return Err(Error::SizeMismatch(pred.len(), target.len()));
    }
    if pred.len() > EMD_EXACT_MAX {
        return Err(Error::TooLarge { got: pred.len(), max: EMD_EXACT_MAX });
    }
    if pred.is_empty() {
        return Err(Error::EmptyCloud("emd_exact"));
    }
    let cost = cost_matrix(pred, target);
    let n = cost.len();
    let mut u = vec![0.0_f64; n + 1];
    let mut v = vec![0.0_f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut mapping = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            mapping[p[j] - 1] = j - 1;
        }
    }
    Ok(Assignment { cost: mean_cost(&cost, &mapping), mapping })
}

/// ε-scaling auction assignment: ε starts at max-cost/2 and is divided by 4
/// between rounds until it reaches eps_final/n, which bounds the final total
/// cost within eps_final of the optimum.
pub fn emd_auction(pred: &PointCloud, target: &PointCloud, eps_final: f64) -> Result<Assignment> {
    if pred.len() != target.len() {
        return Err(Error::SizeMismatch(pred.len(), target.len()));
    }
    if pred.is_empty() {
        return Err(Error::EmptyCloud("emd_auction"));
    }
    let n = pred.len();
    let cost = cost_matrix(pred, target);
    if n == 1 {
        return Ok(Assignment { cost: cost[0][0], mapping: vec![0] });
    }
    let max_cost = cost
        .iter()
        .flat_map(|row| row.iter().copied())
        .fold(0.0_f64, f64::max);
    let eps_floor = eps_final / n as f64;
    let mut eps = (max_cost / 2.0).max(eps_floor);
    let mut prices = vec![0.0_f64; n];
    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut assigned: Vec<Option<usize>> = vec![None; n];
    loop {
        owner.iter_mut().for_each(|o| *o = None);
        assigned.iter_mut().for_each(|a| *a = None);
        let mut queue: Vec<usize> = (0..n).rev().collect();
        while let Some(bidder) = queue.pop() {
            // Best and second-best net value over objects.
            let (mut best_j, mut best_v, mut second_v) = (0usize, f64::NEG_INFINITY, f64::NEG_INFINITY);
            for j in 0..n {
                let val = -cost[bidder][j] - prices[j];
                if val > best_v {
                    second_v = best_v;
                    best_v = val;
                    best_j = j;
                } else if val > second_v {
                    second_v = val;
                }
            }
            prices[best_j] += best_v - second_v + eps;
            if let Some(prev) = owner[best_j] {
                assigned[prev] = None;
                queue.push(prev);
            }
            owner[best_j] = Some(bidder);
            assigned[bidder] = Some(best_j);
        }
        if eps <= eps_floor {
            break;
        }
        eps = (eps / 4.0).max(eps_floor);
    }
    let mapping: Vec<usize> = assigned.into_iter().map(|a| a.expect("complete assignment")).collect();
    Ok(Assignment { cost: mean_cost(&cost, &mapping), mapping })
}

// ---------------------------------------------------------------------------
// Completion loss
// ---------------------------------------------------------------------------

/// Fine-term weight: 0.01 for the first 10000 steps, then 0.1, 0.5 and 1.0
/// after 10000, 20000 and 50000 steps.
pub fn alpha_schedule(step: u64) -> f64 {
    if step < 10_000 {
        0.01
    } else if step < 20_000 {
        0.1
    } else if step < 50_000 {
        0.5
    } else {
        1.0
    }
}

/// The two-stage completion loss and its gradients for both predictions.
#[derive(Debug, Clone)]
pub struct CompletionLoss {
    pub value: f64,
    pub coarse_cd: f64,
    pub fine_cd: f64,
    pub alpha: f64,
    pub grad_coarse: Vec<[f64; 3]>,
    pub grad_fine: Vec<[f64; 3]>,
}

/// CD(coarse) + alpha(step)·CD(fine).
pub fn completion_loss(
    coarse_pred: &PointCloud,
    fine_pred: &PointCloud,
    coarse_gt: &PointCloud,
    fine_gt: &PointCloud,
    step: u64,
) -> Result<CompletionLoss> {
    let alpha = alpha_schedule(step);
    let coarse = chamfer(coarse_pred, coarse_gt)?;
    let fine = chamfer(fine_pred, fine_gt)?;
    let mut grad_fine = fine.gradient.expect("chamfer gradient");
    for g in &mut grad_fine {
        g[0] *= alpha;
        g[1] *= alpha;
        g[2] *= alpha;
    }
    Ok(CompletionLoss {
        value: coarse.value + alpha * fine.value,
        coarse_cd: coarse.value,
        fine_cd: fine.value,
        alpha,
        grad_coarse: coarse.gradient.expect("chamfer gradient"),
        grad_fine,
    })
}
