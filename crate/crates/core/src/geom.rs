//! Polyline geometry: intersections, winding numbers, nearest-point queries,
//! Hausdorff distance, and a uniform-grid index for fast segment crossing
//! tests against families of curves.

use std::collections::HashMap;

use num_complex::Complex64;

/// 2D cross product (z-component) of the vectors a and b.
pub fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Intersection of segments [p0,p1] and [q0,q1].
///
/// Returns (t, u) with the crossing at p0 + t(p1−p0) = q0 + u(q1−q0),
/// t ∈ [0,1), u ∈ [0,1). Near-parallel segments report no crossing: callers
/// jitter their probe segments instead of relying on degenerate contact.
pub fn seg_intersection(
    p0: Complex64,
    p1: Complex64,
    q0: Complex64,
    q1: Complex64,
) -> Option<(f64, f64)> {
    let r = p1 - p0;
    let s = q1 - q0;
    let den = cross(r, s);
    let scale = r.norm() * s.norm();
    if den.abs() <= 1e-14 * scale.max(1e-300) {
        return None;
    }
    let qp = q0 - p0;
    let t = cross(qp, s) / den;
    let u = cross(qp, r) / den;
    if (0.0..1.0).contains(&t) && (0.0..1.0).contains(&u) {
        Some((t, u))
    } else {
        None
    }
}

/// One crossing of a probe segment with a polyline.
#[derive(Debug, Clone, Copy)]
pub struct Crossing {
    /// parameter along the probe segment [a,b]
    pub t: f64,
    /// parameter along the crossed polyline segment
    pub u: f64,
    /// index of the crossed polyline segment
    pub seg: usize,
    /// +1 if the probe crosses from the curve's right to its left
    /// (sign of cross(curve_dir, probe_dir))
    pub sign: i8,
}

/// Vertex-safe crossing of the probe [a,b] with the segment [p,q].
///
/// Orientation-straddle test: a vertex landing exactly on the probe line is
/// classified to the non-positive side, so a polyline passing through such a
/// vertex registers on exactly one of its two adjacent segments instead of
/// being double-counted or (worse) missed on both when rounding pushes the
/// intersection parameter just outside each segment. A grazing touch from the
/// positive side registers twice with opposite signs: net zero for signed
/// counts, and a conservative "true" for boolean rejection.
pub fn seg_cross_robust(
    a: Complex64,
    b: Complex64,
    p: Complex64,
    q: Complex64,
) -> Option<(f64, f64, i8)> {
    let e = b - a;
    let sp = cross(e, p - a);
    let sq = cross(e, q - a);
    let straddle = (sp <= 0.0 && sq > 0.0) || (sq <= 0.0 && sp > 0.0);
    if !straddle {
        return None;
    }
    let u = sp / (sp - sq);
    let x = p + u * (q - p);
    let t = ((x - a).re * e.re + (x - a).im * e.im) / e.norm_sqr();
    if !(0.0..=1.0).contains(&t) {
        return None;
    }
    Some((t, u, if sp > sq { 1 } else { -1 }))
}

/// All crossings of the probe [a,b] with `curve`, ordered along the probe.
pub fn crossings(a: Complex64, b: Complex64, curve: &[Complex64]) -> Vec<Crossing> {
    let mut out = Vec::new();
    for (i, w) in curve.windows(2).enumerate() {
        if let Some((t, u, sign)) = seg_cross_robust(a, b, w[0], w[1]) {
            out.push(Crossing { t, u, seg: i, sign });
        }
    }
    out.sort_by(|x, y| x.t.total_cmp(&y.t));
    out
}

/// Winding number of the closed polyline around z (the polyline is closed
/// implicitly between its last and first vertices).
pub fn winding_number(pts: &[Complex64], z: Complex64) -> i32 {
    let mut total = 0.0f64;
    let n = pts.len();
    for i in 0..n {
        let a = pts[i] - z;
        let b = pts[(i + 1) % n] - z;
        total += cross(a, b).atan2(a.re * b.re + a.im * b.im);
    }
    (total / std::f64::consts::TAU).round() as i32
}

/// Result of a nearest-point query against a polyline.
#[derive(Debug, Clone, Copy)]
pub struct Nearest {
    pub dist: f64,
    pub point: Complex64,
    /// unit tangent of the polyline at the nearest point
    pub tangent: Complex64,
    pub seg: usize,
    /// arclength from the polyline start to the nearest point
    pub arclength: f64,
}

/// Nearest point on the polyline to z.
pub fn nearest_on_polyline(curve: &[Complex64], z: Complex64) -> Nearest {
    assert!(curve.len() >= 2, "polyline needs at least one segment");
    let mut best = Nearest {
        dist: f64::INFINITY,
        point: curve[0],
        tangent: Complex64::new(1.0, 0.0),
        seg: 0,
        arclength: 0.0,
    };
    let mut s_acc = 0.0f64;
    for (i, w) in curve.windows(2).enumerate() {
        let d = w[1] - w[0];
        let len = d.norm();
        if len == 0.0 {
            continue;
        }
        let t = (((z - w[0]).re * d.re + (z - w[0]).im * d.im) / (len * len)).clamp(0.0, 1.0);
        let pt = w[0] + t * d;
        let dist = (z - pt).norm();
        if dist < best.dist {
            best = Nearest {
                dist,
                point: pt,
                tangent: d / len,
                seg: i,
                arclength: s_acc + t * len,
            };
        }
        s_acc += len;
    }
    best
}

/// Total arclength of a polyline.
pub fn polyline_length(curve: &[Complex64]) -> f64 {
    curve.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

/// Point at arclength s from the start (clamped to the ends).
pub fn point_at_arclength(curve: &[Complex64], s: f64) -> Complex64 {
    let mut acc = 0.0;
    for w in curve.windows(2) {
        let len = (w[1] - w[0]).norm();
        if acc + len >= s {
            let t = ((s - acc) / len).clamp(0.0, 1.0);
            return w[0] + t * (w[1] - w[0]);
        }
        acc += len;
    }
    *curve.last().unwrap()
}

/// Symmetric Hausdorff distance between two polylines (vertices of each tested
/// against the segments of the other).
pub fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let directed = |x: &[Complex64], y: &[Complex64]| {
        x.iter()
            .map(|&p| nearest_on_polyline(y, p).dist)
            .fold(0.0f64, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

/// Minimum distance from z to a set of points.
pub fn min_dist_to_points(z: Complex64, pts: &[Complex64]) -> f64 {
    pts.iter().map(|&p| (z - p).norm()).fold(f64::INFINITY, f64::min)
}

/// Uniform-grid index over the segments of several named curves, answering
/// "which segments might the probe [a,b] cross?" in roughly O(cells touched).
pub struct SegGrid {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<(u32, u32)>>,
    curves: Vec<Vec<Complex64>>,
}

impl SegGrid {
    pub fn new(curves: Vec<Vec<Complex64>>, cell: f64) -> Self {
        assert!(cell > 0.0);
        let mut buckets: HashMap<(i64, i64), Vec<(u32, u32)>> = HashMap::new();
        for (ci, curve) in curves.iter().enumerate() {
            for (si, w) in curve.windows(2).enumerate() {
                let (lo_x, hi_x) = minmax(w[0].re, w[1].re);
                let (lo_y, hi_y) = minmax(w[0].im, w[1].im);
                let ix0 = (lo_x / cell).floor() as i64;
                let ix1 = (hi_x / cell).floor() as i64;
                let iy0 = (lo_y / cell).floor() as i64;
                let iy1 = (hi_y / cell).floor() as i64;
                for ix in ix0..=ix1 {
                    for iy in iy0..=iy1 {
                        buckets.entry((ix, iy)).or_default().push((ci as u32, si as u32));
                    }
                }
            }
        }
        Self { cell, buckets, curves }
    }

    pub fn curve(&self, i: usize) -> &[Complex64] {
        &self.curves[i]
    }

    /// All crossings of [a,b] with the indexed curves, ordered along the probe.
    /// Each entry is (curve index, crossing).
    pub fn crossings(&self, a: Complex64, b: Complex64) -> Vec<(usize, Crossing)> {
        let mut cand: Vec<(u32, u32)> = Vec::new();
        let (lo_x, hi_x) = minmax(a.re, b.re);
        let (lo_y, hi_y) = minmax(a.im, b.im);
        let ix0 = (lo_x / self.cell).floor() as i64;
        let ix1 = (hi_x / self.cell).floor() as i64;
        let iy0 = (lo_y / self.cell).floor() as i64;
        let iy1 = (hi_y / self.cell).floor() as i64;
        // guard against probes spanning absurd cell ranges: fall back to all
        let span = (ix1 - ix0 + 1).saturating_mul(iy1 - iy0 + 1);
        if span > 40_000 {
            for (ci, curve) in self.curves.iter().enumerate() {
                for (si, _) in curve.windows(2).enumerate() {
                    cand.push((ci as u32, si as u32));
                }
            }
        } else {
            for ix in ix0..=ix1 {
                for iy in iy0..=iy1 {
                    if let Some(v) = self.buckets.get(&(ix, iy)) {
                        cand.extend_from_slice(v);
                    }
                }
            }
            cand.sort_unstable();
            cand.dedup();
        }
        let mut out = Vec::new();
        for (ci, si) in cand {
            let curve = &self.curves[ci as usize];
            let (p, q) = (curve[si as usize], curve[si as usize + 1]);
            if let Some((t, u, sign)) = seg_cross_robust(a, b, p, q) {
                out.push((ci as usize, Crossing { t, u, seg: si as usize, sign }));
            }
        }
        out.sort_by(|x, y| x.1.t.total_cmp(&y.1.t));
        out
    }

    /// Does [a,b] cross any indexed curve?
    pub fn crosses_any(&self, a: Complex64, b: Complex64) -> bool {
        !self.crossings(a, b).is_empty()
    }
}

fn minmax(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}
