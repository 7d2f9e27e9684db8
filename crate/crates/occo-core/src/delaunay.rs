//! Bowyer–Watson Delaunay triangulation of 2D pixel sets.
//!
//! Points are deduplicated (tolerance 1e-9) and inserted in lexicographic
//! order so the result is deterministic. The in-circumcircle predicate runs
//! a floating-point filter first and falls back to double-double arithmetic
//! when the filtered value cannot be trusted. Collinear inputs yield an
//! empty triangulation.

use crate::cloud::{Point3, TriMesh};

pub const DEDUP_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Double-double arithmetic (error-free transforms), used as the extended
// precision fallback for the geometric predicates.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    Dd { hi: s, lo: err }
}

#[inline]
fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd { hi: p, lo: a.mul_add(b, -p) }
}

impl Dd {
    #[inline]
    fn add(self, o: Dd) -> Dd {
        let s = two_sum(self.hi, o.hi);
        let lo = s.lo + self.lo + o.lo;
        let r = two_sum(s.hi, lo);
        Dd { hi: r.hi, lo: r.lo }
    }

    #[inline]
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    #[inline]
    fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    #[inline]
    fn mul(self, o: Dd) -> Dd {
        let p = two_prod(self.hi, o.hi);
        let lo = p.lo + self.hi * o.lo + self.lo * o.hi;
        let r = two_sum(p.hi, lo);
        Dd { hi: r.hi, lo: r.lo }
    }

    #[inline]
    fn signum(self) -> i32 {
        if self.hi > 0.0 || (self.hi == 0.0 && self.lo > 0.0) {
            1
        } else if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -1
        } else {
            0
        }
    }
}

const EPS: f64 = f64::EPSILON / 2.0;

/// Sign of the orientation determinant: +1 if (a, b, c) turn counterclockwise.
pub fn orient2d(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> i32 {
    let detleft = (a.0 - c.0) * (b.1 - c.1);
    let detright = (a.1 - c.1) * (b.0 - c.0);
    let det = detleft - detright;
    let detsum = detleft.abs() + detright.abs();
    let errbound = (3.0 + 16.0 * EPS) * EPS * detsum;
    if det > errbound || -det > errbound {
        return if det > 0.0 { 1 } else { -1 };
    }
    // Double-double fallback; the subtractions are exact in dd form.
    let acx = two_sum(a.0, -c.0);
    let acy = two_sum(a.1, -c.1);
    let bcx = two_sum(b.0, -c.0);
    let bcy = two_sum(b.1, -c.1);
    acx.mul(bcy).sub(acy.mul(bcx)).signum()
}

/// Sign of the in-circumcircle determinant for CCW triangle (a, b, c):
/// +1 if d lies strictly inside the circumcircle.
pub fn incircle(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> i32 {
    let adx = a.0 - d.0;
    let ady = a.1 - d.1;
    let bdx = b.0 - d.0;
    let bdy = b.1 - d.1;
    let cdx = c.0 - d.0;
    let cdy = c.1 - d.1;

    let bdxcdy = bdx * cdy;
    let cdxbdy = cdx * bdy;
    let alift = adx * adx + ady * ady;
    let cdxady = cdx * ady;
    let adxcdy = adx * cdy;
    let blift = bdx * bdx + bdy * bdy;
    let adxbdy = adx * bdy;
    let bdxady = bdx * ady;
    let clift = cdx * cdx + cdy * cdy;

    let det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
    let permanent = (bdxcdy.abs() + cdxbdy.abs()) * alift
        + (cdxady.abs() + adxcdy.abs()) * blift
        + (adxbdy.abs() + bdxady.abs()) * clift;
    let errbound = (10.0 + 96.0 * EPS) * EPS * permanent;
    if det > errbound || -det > errbound {
        return if det > 0.0 { 1 } else { -1 };
    }

    let adx = two_sum(a.0, -d.0);
    let ady = two_sum(a.1, -d.1);
    let bdx = two_sum(b.0, -d.0);
    let bdy = two_sum(b.1, -d.1);
    let cdx = two_sum(c.0, -d.0);
    let cdy = two_sum(c.1, -d.1);
    let alift = adx.mul(adx).add(ady.mul(ady));
    let blift = bdx.mul(bdx).add(bdy.mul(bdy));
    let clift = cdx.mul(cdx).add(cdy.mul(cdy));
    let t1 = bdx.mul(cdy).sub(cdx.mul(bdy));
    let t2 = cdx.mul(ady).sub(adx.mul(cdy));
    let t3 = adx.mul(bdy).sub(bdx.mul(ady));
    alift.mul(t1).add(blift.mul(t2)).add(clift.mul(t3)).signum()
}

// ---------------------------------------------------------------------------
// Bowyer–Watson
// ---------------------------------------------------------------------------

/// Deduplicate within `tol`; returns retained input indices in lexicographic
/// order of their coordinates.
fn dedup_lexicographic(pixels: &[(f64, f64)], tol: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pixels.len()).collect();
    order.sort_by(|&i, &j| {
        pixels[i]
            .partial_cmp(&pixels[j])
            .expect("pixel coordinates must be finite")
    });
    let mut retained: Vec<usize> = Vec::with_capacity(order.len());
    for &i in &order {
        let p = pixels[i];
        let dup = retained
            .iter()
            .rev()
            .take_while(|&&r| p.0 - pixels[r].0 <= tol)
            .any(|&r| {
                let q = pixels[r];
                (p.0 - q.0).abs() <= tol && (p.1 - q.1).abs() <= tol
            });
        if !dup {
            retained.push(i);
        }
    }
    retained
}

fn all_collinear(pixels: &[(f64, f64)], idx: &[usize]) -> bool {
    if idx.len() < 3 {
        return true;
    }
    let a = pixels[idx[0]];
    let b = *idx[1..]
        .iter()
        .map(|&i| &pixels[i])
        .find(|p| (p.0 - a.0).abs() > 0.0 || (p.1 - a.1).abs() > 0.0)
        .unwrap_or(&a);
    if a == b {
        return true;
    }
    idx.iter().all(|&i| orient2d(a, b, pixels[i]) == 0)
}

#[derive(Debug, Clone, Copy)]
struct Tri {
    v: [usize; 3], // indices into the working vertex list
    alive: bool,
}

/// Delaunay triangulation of 2D points. The result reuses the input pixel
/// list as vertices (z = 0) with faces referencing input indices; merged
/// duplicates and collinear fallbacks simply leave some vertices unused.
pub fn delaunay_2d(pixels: &[(f64, f64)]) -> TriMesh {
    let vertices: Vec<Point3> = pixels.iter().map(|&(x, y)| Point3::new(x, y, 0.0)).collect();
    let retained = dedup_lexicographic(pixels, DEDUP_TOL);
    if retained.len() < 3 || all_collinear(pixels, &retained) {
        return TriMesh { vertices, faces: Vec::new() };
    }

    // Working vertex list: retained points first, then the super-triangle.
    let mut pts: Vec<(f64, f64)> = retained.iter().map(|&i| pixels[i]).collect();
    let (mut min_x, mut min_y, mut max_x, mut max_y) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for &(x, y) in &pts {
        min_x = min_x.min(x);
        min_y = min_y.min(y);
        max_x = max_x.max(x);
        max_y = max_y.max(y);
    }
    let span = (max_x - min_x).max(max_y - min_y).max(1.0);
    let cx = 0.5 * (min_x + max_x);
    let cy = 0.5 * (min_y + max_y);
    let m = 64.0 * span;
    let s0 = pts.len();
    pts.push((cx - m, cy - m));
    pts.push((cx + m, cy - m));
    pts.push((cx, cy + m));

    let mut tris: Vec<Tri> = vec![Tri { v: [s0, s0 + 1, s0 + 2], alive: true }];

    let contains = |t: &Tri, p: (f64, f64), pts: &[(f64, f64)]| -> bool {
        let (a, b, c) = (pts[t.v[0]], pts[t.v[1]], pts[t.v[2]]);
        orient2d(a, b, p) >= 0 && orient2d(b, c, p) >= 0 && orient2d(c, a, p) >= 0
    };

    for pi in 0..s0 {
        let p = pts[pi];
        // Bad triangles: circumcircle strictly contains p, or p lies on the
        // closed triangle (required when p falls exactly on an edge).
        let mut bad: Vec<usize> = Vec::new();
        for (ti, t) in tris.iter().enumerate() {
            if !t.alive {
                continue;
            }
            let (a, b, c) = (pts[t.v[0]], pts[t.v[1]], pts[t.v[2]]);
            if incircle(a, b, c, p) > 0 || contains(t, p, &pts) {
                bad.push(ti);
            }
        }
        debug_assert!(!bad.is_empty(), "no cavity for inserted point");
        // Cavity boundary: edges appearing in exactly one bad triangle.
        let mut edges: Vec<(usize, usize)> = Vec::with_capacity(bad.len() * 3);
        for &ti in &bad {
            let v = tris[ti].v;
            edges.push((v[0], v[1]));
            edges.push((v[1], v[2]));
            edges.push((v[2], v[0]));
            tris[ti].alive = false;
        }
        let mut boundary: Vec<(usize, usize)> = Vec::new();
        'outer: for (i, &(a, b)) in edges.iter().enumerate() {
            for (j, &(c, d)) in edges.iter().enumerate() {
                if i != j && ((a, b) == (d, c) || (a, b) == (c, d)) {
                    continue 'outer;
                }
            }
            boundary.push((a, b));
        }
        for (a, b) in boundary {
            // Keep CCW orientation.
            let v = if orient2d(pts[a], pts[b], p) >= 0 { [a, b, pi] } else { [b, a, pi] };
            tris.push(Tri { v, alive: true });
        }
    }

    let mut faces: Vec<[usize; 3]> = Vec::new();
    for t in &tris {
        if t.alive && t.v.iter().all(|&v| v < s0) {
            faces.push([retained[t.v[0]], retained[t.v[1]], retained[t.v[2]]]);
        }
    }
    faces.sort();
    TriMesh { vertices, faces }
}

/// Convex hull vertex count via the monotone chain, on the deduplicated set.
/// Collinear hull edge points are not counted as hull vertices.
pub fn convex_hull_size(pixels: &[(f64, f64)]) -> usize {
    let retained = dedup_lexicographic(pixels, DEDUP_TOL);
    let mut pts: Vec<(f64, f64)> = retained.iter().map(|&i| pixels[i]).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if pts.len() < 3 {
        return pts.len();
    }
    let build = |iter: &mut dyn Iterator<Item = (f64, f64)>| -> Vec<(f64, f64)> {
        let mut chain: Vec<(f64, f64)> = Vec::new();
        for p in iter {
            while chain.len() >= 2
                && orient2d(chain[chain.len() - 2], chain[chain.len() - 1], p) <= 0
            {
                chain.pop();
            }
            chain.push(p);
        }
        chain
    };
    let lower = build(&mut pts.iter().copied());
    let upper = build(&mut pts.iter().rev().copied());
    lower.len() + upper.len() - 2
}
