//! The φ-family of antiderivative branches: single-valued determinations of
//! ½∫ R(t)/t dt on the plane cut along prescribed arcs of the critical graph,
//! the contour Σ used for orthogonality and energy checks, and the re-cut
//! determination that enters the g-function identity.
//!
//! All variants share one square-root branch (R ~ z at ∞, sign cut along γ
//! alone — crossing σ₀ or σ± does not flip R) and differ only in which curves
//! their continuation refuses to cross and in additive constants per region.
//! Values are produced by continuing the closed-form antiderivative along
//! cut-avoiding polyline paths through a precomputed node graph (a
//! shortest-path tree rooted at a seed next to the base zero).

use std::collections::BinaryHeap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::branch::{antiderivative_w, r_global_unchecked, BranchState};
use crate::error::CoreError;
use crate::geom::{crossings, nearest_on_polyline, seg_cross_robust, winding_number, SegGrid};
use crate::param::Parameter;
use crate::quad::sqrt_endpoint_segment;
use crate::trajectory::{
    emanating_directions, seed_from_zero, sqrt_local_matching, CriticalGraph, Face,
    InfinityDirection, StopRules, Terminal, Trajectory, TrajectoryKind, ZeroId,
};
use crate::Result;

/// Which determination of ½∫R/t a value belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiVariant {
    /// Base ζ+, cut along σ− ∪ σ₀ ∪ γ.
    Phi,
    /// Base ζ−, cut along σ₀ ∪ γ ∪ σ↑; maps Ω₋⁽¹⁾ onto the strip 0 < Re < π·Im A.
    PhiTilde,
    /// Base ζ−, analytic across σ₀, defined on a disk around ζ− (cut locally γ).
    PhiHat,
    /// Base ζ+, analytic across σ₀ and σ−, cut along γ ∪ Σ− ∪ ℝ₊; the
    /// determination entering the g-function.
    VarPhi,
}

/// A φ-family value (in the ½∫ normalization) with its face when resolvable.
#[derive(Debug, Clone, Copy)]
pub struct PhiValue {
    pub value: Complex64,
    pub variant: PhiVariant,
    pub face: Option<Face>,
}

const FAR_RING: f64 = 70.0;
const CLIP: f64 = 175.0;

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Distance from point q to segment a→b.
fn seg_point_dist(a: Complex64, b: Complex64, q: Complex64) -> f64 {
    let e = b - a;
    let len2 = e.norm_sqr();
    if len2 == 0.0 {
        return (q - a).norm();
    }
    let t = ((q - a).re * e.re + (q - a).im * e.im) / len2;
    let t = t.clamp(0.0, 1.0);
    (q - (a + e * t)).norm()
}

/// Signed crossing of segment a→b with the ray o + s·d (s ≥ 0); sign is the
/// orientation of the segment relative to the ray direction. Implemented as a
/// long-segment test through the shared vertex-safe primitive so that a probe
/// passing exactly through the cut-polyline/ray junction counts once, not
/// zero or two times.
fn seg_ray_cross(a: Complex64, b: Complex64, o: Complex64, d: Complex64) -> Option<i8> {
    let reach = 4.0 * (a.norm().max(b.norm()) + o.norm()) + 1.0;
    let far = o + d / d.norm() * reach;
    // sign convention: orientation of probe relative to the ray direction,
    // i.e. the ray plays the curve role in seg_cross_robust
    seg_cross_robust(a, b, o, far).map(|(_, _, sign)| sign)
}

/// Asymptotic antiderivative z − (A+2)·log z + 2(A+1)/z with arg ∈ (0, 2π),
/// good to O(1/z²) absolute at large |z|; used only to extend trajectory tails.
fn w_inf(p: &Parameter, z: Complex64) -> Complex64 {
    let arg = z.arg().rem_euclid(2.0 * PI);
    let log = Complex64::new(z.norm().ln(), arg);
    z - (p.a + 2.0) * log + 2.0 * (p.a + 1.0) / z
}

/// Extends a trajectory that stopped at the tracing radius out to |z| ≈ `to_r`
/// by Newton steps on its exact level of the asymptotic antiderivative.
fn extend_tail(p: &Parameter, traj: &Trajectory, to_r: f64) -> Vec<Complex64> {
    let mut pts = traj.points.clone();
    if !matches!(traj.terminal, Terminal::AtInfinity(_)) {
        return pts;
    }
    let n = pts.len();
    let end = pts[n - 1];
    let tangent = (end - pts[n - 2]) / (end - pts[n - 2]).norm();
    let horizontal = matches!(traj.kind, TrajectoryKind::Horizontal);
    let level = if horizontal { w_inf(p, end).re } else { w_inf(p, end).im };
    let mut z = end;
    while z.norm() < to_r {
        let step = 0.22 * z.norm();
        let mut next = z + tangent * step;
        for _ in 0..3 {
            let w = w_inf(p, next);
            let defect = if horizontal { w.re - level } else { w.im - level };
            // ∇(Re w) = conj(w′), ∇(Im w) = conj(i·w′); w′ = R/z ≈ r_seg/z far out
            let wp = crate::branch::r_seg(p, next) / next;
            let grad = if horizontal { wp.conj() } else { (Complex64::new(0.0, 1.0) * wp).conj() };
            next -= defect * grad / grad.norm_sqr();
        }
        pts.push(next);
        z = next;
    }
    pts
}

struct TailRay {
    origin: Complex64,
    dir: Complex64,
}

fn end_ray(pts: &[Complex64]) -> TailRay {
    let n = pts.len();
    let d = pts[n - 1] - pts[n - 2];
    TailRay { origin: pts[n - 1], dir: d / d.norm() }
}

/// One cut-respecting continuation of ∫R/t (unhalved) from a seed value at a
/// node next to the base zero, over a validated node graph.
struct Evaluator {
    p: Parameter,
    gamma: Vec<Complex64>,
    nodes: Vec<Complex64>,
    /// continued ∫R/t per node; NaN marks unreachable
    w: Vec<Complex64>,
    cut_curves: Vec<Vec<Complex64>>,
    grid: SegGrid,
    rays: Vec<TailRay>,
}

fn min_heap_push(heap: &mut BinaryHeap<(std::cmp::Reverse<u64>, u32)>, d: f64, v: u32) {
    heap.push((std::cmp::Reverse(d.to_bits()), v));
}

impl Evaluator {
    fn new(
        p: &Parameter,
        gamma: &[Complex64],
        nodes: Vec<Complex64>,
        cand_edges: &[(u32, u32)],
        cut_curves: Vec<Vec<Complex64>>,
        rays: Vec<TailRay>,
        seed_idx: usize,
        seed_w: Complex64,
    ) -> Result<Evaluator> {
        let scale = p.scale();
        let grid = SegGrid::new(cut_curves.clone(), 0.7 * scale);
        let specials = [czero(), p.zeta_minus, p.zeta_plus];

        let n = nodes.len();
        let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for &(i, j) in cand_edges {
            let (a, b) = (nodes[i as usize], nodes[j as usize]);
            if edge_ok(&grid, &rays, &specials, scale, a, b) {
                let len = (b - a).norm();
                adj[i as usize].push((j, len));
                adj[j as usize].push((i, len));
            }
        }

        // Dijkstra from the seed, recording the settle order and parents.
        let mut dist = vec![f64::INFINITY; n];
        let mut parent = vec![u32::MAX; n];
        let mut settled = vec![false; n];
        let mut order: Vec<u32> = Vec::with_capacity(n);
        let mut heap = BinaryHeap::new();
        dist[seed_idx] = 0.0;
        min_heap_push(&mut heap, 0.0, seed_idx as u32);
        while let Some((std::cmp::Reverse(db), v)) = heap.pop() {
            let v = v as usize;
            if settled[v] || f64::from_bits(db) > dist[v] {
                continue;
            }
            settled[v] = true;
            order.push(v as u32);
            for &(u, len) in &adj[v] {
                let u = u as usize;
                let nd = dist[v] + len;
                if nd < dist[u] {
                    dist[u] = nd;
                    parent[u] = v as u32;
                    min_heap_push(&mut heap, nd, u as u32);
                }
            }
        }
        if order.len() < n / 2 {
            return Err(CoreError::ConstructionFailed(format!(
                "antiderivative node graph poorly connected: {} of {} reachable",
                order.len(),
                n
            )));
        }

        // Values along the settle order: each node integrates from its parent.
        let nan = Complex64::new(f64::NAN, f64::NAN);
        let mut w = vec![nan; n];
        w[seed_idx] = seed_w;
        for &v in order.iter().skip(1) {
            let v = v as usize;
            let u = parent[v] as usize;
            if w[u].re.is_nan() {
                continue;
            }
            let branch = BranchState {
                base_point: nodes[u],
                sqrt_value: r_global_unchecked(p, nodes[u], gamma),
            };
            if let Ok(dw) = antiderivative_w(p, nodes[u], nodes[v], &[nodes[u], nodes[v]], branch) {
                w[v] = w[u] + dw;
            }
        }

        Ok(Evaluator { p: *p, gamma: gamma.to_vec(), nodes, w, cut_curves, grid, rays })
    }

    /// ∫R/t (unhalved) continued to z. OutOfDomain on or too near a cut, or
    /// when no validated final edge reaches z.
    fn query(&self, z: Complex64) -> Result<Complex64> {
        let scale = self.p.scale();
        for c in &self.cut_curves {
            if nearest_on_polyline(c, z).dist < 1e-9 * scale {
                return Err(CoreError::OutOfDomain(z));
            }
        }
        let specials = [czero(), self.p.zeta_minus, self.p.zeta_plus];
        let mut cand: Vec<(f64, u32)> = self
            .w
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.re.is_nan())
            .map(|(i, _)| ((self.nodes[i] - z).norm(), i as u32))
            .collect();
        cand.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(_, i) in cand.iter().take(64) {
            let a = self.nodes[i as usize];
            if !edge_ok(&self.grid, &self.rays, &specials, scale, a, z) {
                continue;
            }
            let branch =
                BranchState { base_point: a, sqrt_value: r_global_unchecked(&self.p, a, &self.gamma) };
            if let Ok(dw) = antiderivative_w(&self.p, a, z, &[a, z], branch) {
                return Ok(self.w[i as usize] + dw);
            }
        }
        Err(CoreError::OutOfDomain(z))
    }
}

fn edge_ok(
    grid: &SegGrid,
    rays: &[TailRay],
    specials: &[Complex64; 3],
    scale: f64,
    a: Complex64,
    b: Complex64,
) -> bool {
    if grid.crosses_any(a, b) {
        return false;
    }
    for r in rays {
        if seg_ray_cross(a, b, r.origin, r.dir).is_some() {
            return false;
        }
    }
    for &q in specials {
        let d_end = (a - q).norm().min((b - q).norm());
        let tol = (1e-4 * scale).min(0.45 * d_end);
        if seg_point_dist(a, b, q) < tol {
            return false;
        }
    }
    true
}

/// Shared node cloud for the evaluators: two-sided offsets hugging every graph
/// arc, rings around the origin and both zeros, a dense lattice near the
/// finite geometry, a coarse shell, and a far ring for outward queries.
fn node_cloud(p: &Parameter, graph: &CriticalGraph) -> (Vec<Complex64>, Vec<(u32, u32)>) {
    let s = p.scale();
    let mut nodes: Vec<Complex64> = Vec::new();
    let mut chain_edges: Vec<(u32, u32)> = Vec::new();

    let arcs = [
        &graph.gamma.points,
        &graph.sigma0.points,
        &graph.sigma_minus.points,
        &graph.sigma_up.points,
        &graph.sigma_down.points,
    ];
    // offsets anchor at segment midpoints, not vertices: a node pair straddling
    // the arc then connects through a segment interior, which the crossing test
    // detects robustly (vertex-exact passes are the fragile case)
    let off = 0.015 * s;
    for pts in arcs {
        for side in [1.0, -1.0] {
            let stride = (pts.len().saturating_sub(1) / 140).max(1);
            let mut prev: Option<u32> = None;
            let mut k = 0;
            while k + 1 < pts.len() {
                let t = pts[k + 1] - pts[k];
                if t.norm() > 0.0 {
                    let n_hat = Complex64::new(0.0, 1.0) * t / t.norm();
                    let q = 0.5 * (pts[k] + pts[k + 1]) + side * off * n_hat;
                    let id = nodes.len() as u32;
                    nodes.push(q);
                    if let Some(pr) = prev {
                        chain_edges.push((pr, id));
                    }
                    prev = Some(id);
                }
                k += stride;
            }
        }
    }

    // rings: inner spiral coverage around 0, collars around ζ±
    for &r in &[0.0035, 0.012, 0.04, 0.12] {
        let m = 22;
        let first = nodes.len() as u32;
        for k in 0..m {
            let th = 2.0 * PI * k as f64 / m as f64;
            nodes.push(Complex64::from_polar(r * s, th));
            if k > 0 {
                chain_edges.push((first + k - 1, first + k));
            }
        }
        chain_edges.push((first + m - 1, first));
    }
    for &zc in &[p.zeta_minus, p.zeta_plus] {
        for &r in &[0.03, 0.1] {
            let m = 14;
            let first = nodes.len() as u32;
            for k in 0..m {
                let th = 2.0 * PI * k as f64 / m as f64;
                nodes.push(zc + Complex64::from_polar(r * s, th));
                if k > 0 {
                    chain_edges.push((first + k - 1, first + k));
                }
            }
            chain_edges.push((first + m - 1, first));
        }
    }

    // dense lattice over the finite geometry, coarse shell, far ring
    let mut lo = Complex64::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &zc in &[czero(), p.zeta_minus, p.zeta_plus] {
        lo = Complex64::new(lo.re.min(zc.re), lo.im.min(zc.im));
        hi = Complex64::new(hi.re.max(zc.re), hi.im.max(zc.im));
    }
    let pad = 3.0 * s;
    let (m1, m2) = (17, 17);
    for i in 0..m1 {
        for j in 0..m2 {
            let x = lo.re - pad + (hi.re - lo.re + 2.0 * pad) * i as f64 / (m1 - 1) as f64;
            let y = lo.im - pad + (hi.im - lo.im + 2.0 * pad) * j as f64 / (m2 - 1) as f64;
            nodes.push(Complex64::new(x, y));
        }
    }
    let c = 0.5 * (lo + hi);
    for i in 0..9 {
        for j in 0..9 {
            let x = c.re - 12.0 * s + 24.0 * s * i as f64 / 8.0;
            let y = c.im - 12.0 * s + 24.0 * s * j as f64 / 8.0;
            nodes.push(Complex64::new(x, y));
        }
    }
    {
        let m = 48;
        let first = nodes.len() as u32;
        for k in 0..m {
            let th = 2.0 * PI * k as f64 / m as f64;
            nodes.push(Complex64::from_polar(FAR_RING * s, th));
            if k > 0 {
                chain_edges.push((first + k - 1, first + k));
            }
        }
        chain_edges.push((first + m - 1, first));
    }

    (nodes, chain_edges)
}

fn knn_edges(nodes: &[Complex64], k: usize) -> Vec<(u32, u32)> {
    let n = nodes.len();
    let mut edges = Vec::with_capacity(n * k);
    for i in 0..n {
        let mut d: Vec<(f64, u32)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| ((nodes[j] - nodes[i]).norm(), j as u32))
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(_, j) in d.iter().take(k) {
            let (a, b) = (i as u32, j);
            edges.push(if a < b { (a, b) } else { (b, a) });
        }
    }
    edges.sort();
    edges.dedup();
    edges
}

/// Direction at a zero clear of the given cut tangents: tries `prefer`, then
/// small rotations, maximizing the angular clearance.
fn wedge_dir(avoid: &[Complex64], prefer: Complex64) -> Complex64 {
    let mut best = prefer;
    let mut best_gap = -1.0;
    for k in 0..13 {
        let rot = 0.3 * ((k + 1) / 2) as f64 * if k % 2 == 0 { 1.0 } else { -1.0 };
        let d = prefer * Complex64::from_polar(1.0, rot);
        let gap = avoid
            .iter()
            .map(|&a| {
                let mut dth = (d.arg() - a.arg()).abs();
                if dth > PI {
                    dth = 2.0 * PI - dth;
                }
                dth
            })
            .fold(f64::INFINITY, f64::min);
        if gap > best_gap {
            best_gap = gap;
            best = d;
        }
        if gap > 0.5 {
            break;
        }
    }
    best
}

fn initial_dir(traj: &Trajectory) -> Complex64 {
    let d = traj.points[1] - traj.points[0];
    d / d.norm()
}

/// Seed value ∫_ζ^q R/t over the radial offset, with the local square-root
/// model matched to the global branch at q.
fn seed_integral(p: &Parameter, gamma: &[Complex64], zeta: Complex64, q: Complex64) -> Complex64 {
    let r_ref = r_global_unchecked(p, q, gamma);
    let local = sqrt_local_matching(p, zeta, q, r_ref);
    sqrt_endpoint_segment(&mut |t| local.eval(p, t) / t, zeta, q, 12)
}

/// The three cut-based determinations, built once per critical graph.
pub struct PhiMaps {
    pub graph: CriticalGraph,
    phi: Evaluator,
    tilde: Evaluator,
    hat_ref: Complex64,
    hat_radius: f64,
    hat_jump: Complex64,
}

impl PhiMaps {
    pub fn new(graph: &CriticalGraph) -> Result<PhiMaps> {
        let p = graph.p;
        let s = p.scale();
        let gamma = graph.gamma.points.clone();
        let sigma0 = graph.sigma0.points.clone();
        let sig_minus_ext = extend_tail(&p, &graph.sigma_minus, CLIP * s);
        let sig_up_ext = extend_tail(&p, &graph.sigma_up, CLIP * s);

        let (mut nodes, chain_edges) = node_cloud(&p, graph);

        // seed points inside safe wedges at the base zeros
        let d_gamma_end = {
            let n = gamma.len();
            let d = gamma[n - 2] - gamma[n - 1];
            d / d.norm()
        };
        let dir_plus = wedge_dir(&[d_gamma_end], -d_gamma_end);
        let d_gamma0 = initial_dir(&graph.gamma);
        let d_sigma0 = initial_dir(&graph.sigma0);
        let d_sigma_minus = initial_dir(&graph.sigma_minus);
        // principal wedge at ζ−: between σ₀ and σ−, not containing γ
        let b = d_sigma0 + d_sigma_minus;
        let bis = if b.norm() > 1e-9 { b / b.norm() } else { d_sigma0 * Complex64::new(0.0, 1.0) };
        let prefer_minus = if angular_gap(bis, d_gamma0) >= angular_gap(-bis, d_gamma0) { bis } else { -bis };
        let dir_minus = wedge_dir(&[d_gamma0, d_sigma0], prefer_minus);

        let rho = 0.02 * s;
        let seed_plus_pt = p.zeta_plus + rho * dir_plus;
        let seed_minus_pt = p.zeta_minus + rho * dir_minus;
        let w_seed_plus = seed_integral(&p, &gamma, p.zeta_plus, seed_plus_pt);
        let w_seed_minus = seed_integral(&p, &gamma, p.zeta_minus, seed_minus_pt);
        let seed_plus_idx = nodes.len();
        nodes.push(seed_plus_pt);
        let seed_minus_idx = nodes.len();
        nodes.push(seed_minus_pt);

        let mut cand = knn_edges(&nodes, 10);
        cand.extend_from_slice(&chain_edges);

        let phi = Evaluator::new(
            &p,
            &gamma,
            nodes.clone(),
            &cand,
            vec![sig_minus_ext.clone(), sigma0.clone(), gamma.clone()],
            vec![end_ray(&sig_minus_ext)],
            seed_plus_idx,
            w_seed_plus,
        )?;
        let tilde = Evaluator::new(
            &p,
            &gamma,
            nodes,
            &cand,
            vec![sigma0.clone(), gamma.clone(), sig_up_ext.clone()],
            vec![end_ray(&sig_up_ext)],
            seed_minus_idx,
            w_seed_minus,
        )?;

        let mut maps = PhiMaps {
            graph: graph.clone(),
            phi,
            tilde,
            hat_ref: seed_minus_pt,
            hat_radius: 0.45 * p.zeta_minus.norm().min((p.zeta_plus - p.zeta_minus).norm()),
            hat_jump: czero(),
        };
        maps.hat_jump = maps.calibrate_hat()?;
        Ok(maps)
    }

    /// Measures the constant jump of φ̃ across σ₀ near ζ− and snaps it to
    /// ±πiA; the snapped value drives the σ₀-crossing correction of φ̂.
    fn calibrate_hat(&self) -> Result<Complex64> {
        let p = self.graph.p;
        let s = p.scale();
        let sigma0 = &self.graph.sigma0.points;
        // a σ₀ vertex well inside the φ̂ disk but clear of ζ−
        let mut v_idx = None;
        for (i, q) in sigma0.iter().enumerate() {
            let d = (q - p.zeta_minus).norm();
            if d > 0.3 * self.hat_radius && d < 0.7 * self.hat_radius {
                v_idx = Some(i);
                break;
            }
        }
        let i = v_idx.ok_or_else(|| {
            CoreError::ConstructionFailed("no σ₀ vertex inside the φ̂ calibration annulus".into())
        })?;
        let v = sigma0[i];
        let t = sigma0[i + 1] - sigma0[i];
        let n_hat = Complex64::new(0.0, 1.0) * t / t.norm();
        let h = 1e-4 * s;
        let (q1, q2) = (v + h * n_hat, v - h * n_hat);
        let (f1, f2) = (self.tilde.query(q1)?, self.tilde.query(q2)?);
        let x1 = signed_crossings(self.hat_ref, q1, sigma0);
        let x2 = signed_crossings(self.hat_ref, q2, sigma0);
        if (x1 - x2).abs() != 1 {
            return Err(CoreError::ConstructionFailed(format!(
                "φ̂ straddle crossing counts {} / {}",
                x1, x2
            )));
        }
        // pull both probe values back to v (the offsets contribute ±h·n̂·W′,
        // W′ = R/t, with the h² terms cancelling); then continuity gives
        // ½f1 + J·x1 = ½f2 + J·x2
        let wp = r_global_unchecked(&p, v, &self.graph.gamma.points) / v;
        let j = 0.5 * ((f2 - f1) + 2.0 * h * n_hat * wp) / ((x1 - x2) as f64);
        let pia = Complex64::new(0.0, PI) * p.a;
        let tol = 1e-6 * (1.0 + p.a.norm());
        if (j - pia).norm() < tol {
            Ok(pia)
        } else if (j + pia).norm() < tol {
            Ok(-pia)
        } else {
            Err(CoreError::ConstructionFailed(format!(
                "σ₀ jump {:.12e}{:+.12e}i does not match ±πiA (defects {:.3e} / {:.3e})",
                j.re,
                j.im,
                (j - pia).norm(),
                (j + pia).norm()
            )))
        }
    }

    /// φ: base ζ+, cut along σ− ∪ σ₀ ∪ γ.
    pub fn phi(&self, z: Complex64) -> Result<PhiValue> {
        let w = self.phi.query(z)?;
        Ok(PhiValue { value: 0.5 * w, variant: PhiVariant::Phi, face: self.graph.face(z).ok() })
    }

    /// φ̃: base ζ−, cut along σ₀ ∪ γ ∪ σ↑.
    pub fn phitilde(&self, z: Complex64) -> Result<PhiValue> {
        let w = self.tilde.query(z)?;
        Ok(PhiValue { value: 0.5 * w, variant: PhiVariant::PhiTilde, face: self.graph.face(z).ok() })
    }

    /// φ̂ = φ̃ + (±πiA)·(signed σ₀ crossings from the reference wedge): analytic
    /// across σ₀ on a disk around ζ−. OutOfDomain outside the disk or when the
    /// reference segment meets γ or σ−.
    pub fn phihat(&self, z: Complex64) -> Result<PhiValue> {
        let p = self.graph.p;
        if (z - p.zeta_minus).norm() > self.hat_radius {
            return Err(CoreError::OutOfDomain(z));
        }
        if !crossings(self.hat_ref, z, &self.graph.gamma.points).is_empty()
            || !crossings(self.hat_ref, z, &self.graph.sigma_minus.points).is_empty()
        {
            return Err(CoreError::OutOfDomain(z));
        }
        let x = signed_crossings(self.hat_ref, z, &self.graph.sigma0.points);
        let w = self.tilde.query(z)?;
        Ok(PhiValue {
            value: 0.5 * w + self.hat_jump * x as f64,
            variant: PhiVariant::PhiHat,
            face: self.graph.face(z).ok(),
        })
    }
}

fn angular_gap(a: Complex64, b: Complex64) -> f64 {
    let mut d = (a.arg() - b.arg()).abs();
    if d > PI {
        d = 2.0 * PI - d;
    }
    d
}

fn signed_crossings(a: Complex64, b: Complex64, curve: &[Complex64]) -> i32 {
    crossings(a, b, curve).iter().map(|c| c.sign as i32).sum()
}

/// Evaluates one of the three cut-based determinations; the Σ-dependent
/// [`PhiVariant::VarPhi`] lives on [`VarPhi::eval`] because it needs the
/// contour.
pub fn phi_eval(maps: &PhiMaps, z: Complex64, variant: PhiVariant) -> Result<PhiValue> {
    match variant {
        PhiVariant::Phi => maps.phi(z),
        PhiVariant::PhiTilde => maps.phitilde(z),
        PhiVariant::PhiHat => maps.phihat(z),
        PhiVariant::VarPhi => Err(CoreError::ConstructionFailed(
            "the Σ-cut determination requires the contour; use VarPhi::eval".into(),
        )),
    }
}

/// The contour Σ = Σ− ∪ γ ∪ Σ+ (traversed +∞ → ζ− → ζ+ → +∞ clockwise, the
/// origin kept on the right), avoiding ℝ₊.
#[derive(Debug, Clone)]
pub struct ContourSigmaA {
    pub p: Parameter,
    /// ζ− → +∞, staying below ℝ₊ in the east.
    pub sigma_minus: Vec<Complex64>,
    /// ζ− → ζ+.
    pub gamma: Vec<Complex64>,
    /// ζ+ → +∞, staying above ℝ₊ in the east.
    pub sigma_plus: Vec<Complex64>,
}

impl ContourSigmaA {
    /// The clockwise chain: reversed Σ− + γ + Σ+.
    pub fn traversal(&self) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = self.sigma_minus.iter().rev().copied().collect();
        out.extend(self.gamma.iter().skip(1).copied());
        out.extend(self.sigma_plus.iter().skip(1).copied());
        out
    }

    pub fn x_end(&self) -> f64 {
        self.sigma_minus.last().unwrap().re
    }
}

/// Truncates an eastbound arc before it drifts into the forbidden band around
/// ℝ₊, appending a horizontal ray out to x_end; keeps arcs that stay clear.
fn eastern_tail(p: &Parameter, pts: &[Complex64], below: bool, x_end: f64) -> Vec<Complex64> {
    let s = p.scale();
    let band = 0.12 * s;
    let mut out: Vec<Complex64> = Vec::with_capacity(pts.len() + 50);
    let mut cut_at: Option<usize> = None;
    for (i, q) in pts.iter().enumerate() {
        let hazard = q.re > 0.5 * s && if below { q.im > -band } else { q.im < band };
        if hazard && i > 2 {
            cut_at = Some(i);
            break;
        }
        out.push(*q);
        if q.re > x_end {
            break;
        }
    }
    if let Some(_) = cut_at {
        // ray east at the last safe latitude
        let last = *out.last().unwrap();
        let y = if below { last.im.min(-band) } else { last.im.max(band) };
        if (last.im - y).abs() > 1e-12 {
            out.push(Complex64::new(last.re, y));
        }
        let x0 = out.last().unwrap().re;
        let m = 50;
        for k in 1..=m {
            let x = x0 + (x_end - x0) * k as f64 / m as f64;
            out.push(Complex64::new(x, y));
        }
    } else {
        // clip or extend to x_end at the final latitude
        let last = *out.last().unwrap();
        if last.re < x_end {
            let y = last.im;
            let m = 30;
            for k in 1..=m {
                let x = last.re + (x_end - last.re) * k as f64 / m as f64;
                out.push(Complex64::new(x, y));
            }
        }
    }
    out
}

/// Builds Σ: both arms are orthogonal critical arcs from the zeros diverging to
/// +∞, surgically flattened to horizontal rays before they can drift into ℝ₊;
/// a swing construction below the origin substitutes when no such arc exists.
/// Validated by sampled positivity of Re φ̃, avoidance of ℝ₊, and the winding
/// of the closed-up traversal about the origin.
pub fn build_sigma(graph: &CriticalGraph, maps: &PhiMaps) -> Result<ContourSigmaA> {
    let p = graph.p;
    let s = p.scale();
    let x_end = 40.0 * s;
    let stop = StopRules::defaults(&p);

    let arm = |zero: ZeroId, below: bool| -> Result<Vec<Complex64>> {
        let dirs = emanating_directions(&p, zero, TrajectoryKind::Orthogonal)?;
        for d in dirs {
            if let Ok(t) = seed_from_zero(&p, zero, d, TrajectoryKind::Orthogonal, &stop) {
                if t.terminal == Terminal::AtInfinity(InfinityDirection::PlusReal) {
                    return Ok(eastern_tail(&p, &t.points, below, x_end));
                }
            }
        }
        Err(CoreError::ConstructionFailed(format!(
            "no orthogonal arc from {:?} diverges toward +∞",
            zero
        )))
    };

    let sigma_plus = arm(ZeroId::ZetaPlus, false)?;
    let sigma_minus = match arm(ZeroId::ZetaMinus, true) {
        Ok(a) => a,
        Err(_) => swing_arm(&p, graph, x_end)?,
    };

    let contour = ContourSigmaA {
        p,
        sigma_minus,
        gamma: graph.gamma.points.clone(),
        sigma_plus,
    };
    validate_sigma(graph, maps, &contour)?;
    Ok(contour)
}

/// Fallback Σ− for parameters whose orthogonal arc from ζ− fails to reach +∞:
/// a swing around the western side of the origin, a descent below the axis,
/// and an eastbound ray.
fn swing_arm(p: &Parameter, graph: &CriticalGraph, x_end: f64) -> Result<Vec<Complex64>> {
    let s = p.scale();
    let d_gamma = nearest_on_polyline(&graph.gamma.points, czero()).dist;
    let r = 0.5 * p.zeta_minus.norm().min(d_gamma);
    if r < 1e-3 * s {
        return Err(CoreError::ConstructionFailed("origin pinched against γ or ζ−".into()));
    }
    let mut pts = vec![p.zeta_minus];
    let th0 = p.zeta_minus.arg();
    // sweep through west down to due south
    let th1 = -0.5 * PI;
    let mut sweep = th1 - th0;
    while sweep > 0.0 {
        sweep -= 2.0 * PI;
    }
    let m = 28;
    for k in 0..=m {
        pts.push(Complex64::from_polar(r, th0 + sweep * k as f64 / m as f64));
    }
    let y_ray = -(0.2 * s).max(2.0 * r);
    pts.push(Complex64::new(0.0, y_ray));
    let m2 = 60;
    for k in 1..=m2 {
        pts.push(Complex64::new(x_end * k as f64 / m2 as f64, y_ray));
    }
    Ok(pts)
}

fn validate_sigma(graph: &CriticalGraph, maps: &PhiMaps, c: &ContourSigmaA) -> Result<()> {
    let p = c.p;
    let s = p.scale();
    let rplus = [czero(), Complex64::new(2.0 * c.x_end(), 0.0)];

    for (name, arm) in [("Σ−", &c.sigma_minus), ("Σ+", &c.sigma_plus)] {
        // skip the first vertex: both arms start exactly at a zero on ℝ's scale
        if !crossings(rplus[0], rplus[1], &arm[1..]).is_empty() {
            return Err(CoreError::ConstructionFailed(format!("{name} crosses ℝ₊")));
        }
        let zero = arm[0];
        let stride = (arm.len() / 60).max(1);
        let mut min_re = f64::INFINITY;
        for q in arm.iter().step_by(stride).chain(std::iter::once(arm.last().unwrap())) {
            if (q - zero).norm() < 0.05 * s {
                continue;
            }
            let v = maps.phitilde(*q).or_else(|_| {
                // points can sit on σ↓ (crossed by Σ−); nudge east
                maps.phitilde(q + Complex64::new(1e-6 * s, 1e-6 * s))
            })?;
            min_re = min_re.min(v.value.re);
        }
        if min_re < 1e-9 {
            return Err(CoreError::ConstructionFailed(format!(
                "Re φ̃ = {min_re:.3e} not positive along {name}"
            )));
        }
    }

    // closed-up clockwise traversal must wind −1 about the origin
    let w = winding_number(&c.traversal(), czero());
    if w != -1 {
        return Err(CoreError::ConstructionFailed(format!("Σ winding about 0 is {w}, want −1")));
    }
    let _ = graph;
    Ok(())
}

/// The determination entering the g-function: analytic across σ− and σ₀, cut
/// along γ ∪ Σ− ∪ ℝ₊. Values are φ plus a locally constant shift accumulated
/// as signed jump events along cut-avoiding walks from a far-west anchor.
pub struct VarPhi<'a> {
    maps: &'a PhiMaps,
    cuts: Vec<Vec<Complex64>>,
    cut_rays: Vec<TailRay>,
    events: Vec<(Vec<Complex64>, Complex64)>,
    event_rays: Vec<(TailRay, Complex64)>,
    anchors: Vec<(Complex64, Complex64)>,
    y_north: f64,
    y_south: f64,
}

impl<'a> VarPhi<'a> {
    pub fn new(maps: &'a PhiMaps, sigma: &ContourSigmaA) -> Result<VarPhi<'a>> {
        let p = maps.graph.p;
        let s = p.scale();
        let graph = &maps.graph;

        let sig_minus_ext = extend_tail(&p, &graph.sigma_minus, CLIP * s);
        let rplus = vec![czero(), Complex64::new(CLIP * s, 0.0)];

        let mut finite_pts: Vec<Complex64> = Vec::new();
        for arc in graph.arcs() {
            finite_pts.extend_from_slice(&arc.1.points);
        }
        let x_min = finite_pts.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        let y_min = finite_pts.iter().map(|z| z.im).fold(f64::INFINITY, f64::min);
        let y_max = finite_pts.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max);
        let anchor = Complex64::new(x_min - 6.0 * s, 0.5 * (p.zeta_minus + p.zeta_plus).im);

        let mut vp = VarPhi {
            maps,
            cuts: vec![graph.gamma.points.clone(), sigma.sigma_minus.clone(), rplus],
            cut_rays: vec![
                end_ray(&sigma.sigma_minus),
                TailRay { origin: Complex64::new(CLIP * s, 0.0), dir: Complex64::new(1.0, 0.0) },
            ],
            events: Vec::new(),
            event_rays: Vec::new(),
            anchors: vec![(anchor, czero())],
            y_north: y_max + 3.0 * s,
            y_south: y_min - 3.0 * s,
        };

        // calibrate the crossing jumps of φ from two-sided probes
        let c1 = vp.calibrate_jump(&sig_minus_ext, 0.40, Complex64::new(0.0, PI) * (p.a + 2.0))?;
        let c2 = vp.calibrate_jump(&graph.sigma0.points, 0.35, Complex64::new(0.0, PI) * p.a)?;
        vp.event_rays.push((end_ray(&sig_minus_ext), c1.1));
        vp.events.push((sig_minus_ext, c1.0));
        vp.events.push((graph.sigma0.points.clone(), c2.0));
        // c1.0 applies to +1 crossings of the finite polyline; the ray reuses it
        vp.event_rays[0].1 = c1.0;

        vp.build_anchors()?;
        Ok(vp)
    }

    /// Measures the jump of φ across `curve` at the given arclength fraction
    /// and snaps it to ±expect; returns the contribution of a +1-signed
    /// crossing (paired with an unused slot for the tail ray).
    fn calibrate_jump(
        &self,
        curve: &[Complex64],
        frac: f64,
        expect: Complex64,
    ) -> Result<(Complex64, Complex64)> {
        let p = self.maps.graph.p;
        let s = p.scale();
        let total: f64 = curve.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        let target = frac * total;
        let mut acc = 0.0;
        let mut idx = 0;
        for (i, w) in curve.windows(2).enumerate() {
            acc += (w[1] - w[0]).norm();
            if acc >= target {
                idx = i;
                break;
            }
        }
        let v = curve[idx];
        let t = curve[idx + 1] - curve[idx];
        let n_hat = Complex64::new(0.0, 1.0) * t / t.norm();
        let h = 1e-4 * s;
        let (q1, q2) = (v + h * n_hat, v - h * n_hat);
        let (f1, f2) = (self.maps.phi(q1)?.value, self.maps.phi(q2)?.value);
        // q2 → q1 crosses the curve once; its sign comes from the geometry
        let sign = crossings(q2, q1, curve)
            .first()
            .map(|c| c.sign as f64)
            .ok_or_else(|| CoreError::ConstructionFailed("calibration probes do not straddle".into()))?;
        // pull both probes back to v (subtracting ±h·n̂·φ′, φ′ = R/2t); then
        // continuity of φ + s gives s(q1) − s(q2) = f2 − f1 per crossing
        let phi_p = r_global_unchecked(&p, v, &self.maps.graph.gamma.points) / (2.0 * v);
        let per_plus = ((f2 - f1) + 2.0 * h * n_hat * phi_p) / sign;
        let tol = 1e-6 * (1.0 + expect.norm());
        if (per_plus - expect).norm() < tol {
            Ok((expect, expect))
        } else if (per_plus + expect).norm() < tol {
            Ok((-expect, -expect))
        } else {
            Err(CoreError::ConstructionFailed(format!(
                "jump {:.6e}{:+.6e}i does not match ±({:.3e}{:+.3e}i)",
                per_plus.re, per_plus.im, expect.re, expect.im
            )))
        }
    }

    fn route_catalog(&self, a: Complex64, z: Complex64) -> Vec<Vec<Complex64>> {
        vec![
            vec![a, z],
            vec![a, Complex64::new(a.re, z.im), z],
            vec![a, Complex64::new(z.re, a.im), z],
            vec![a, Complex64::new(a.re, self.y_north), Complex64::new(z.re, self.y_north), z],
            vec![a, Complex64::new(a.re, self.y_south), Complex64::new(z.re, self.y_south), z],
        ]
    }

    /// Walks a route, returning the accumulated shift, or None when the route
    /// crosses a cut or passes ambiguously near a singular point.
    fn walk(&self, route: &[Complex64]) -> Option<Complex64> {
        let p = self.maps.graph.p;
        let s = p.scale();
        let specials = [czero(), p.zeta_minus, p.zeta_plus];
        let mut shift = czero();
        for seg in route.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            for c in &self.cuts {
                if !crossings(a, b, c).is_empty() {
                    return None;
                }
            }
            for r in &self.cut_rays {
                if seg_ray_cross(a, b, r.origin, r.dir).is_some() {
                    return None;
                }
            }
            for &q in &specials {
                let d_end = (a - q).norm().min((b - q).norm());
                let tol = (1e-3 * s).min(0.45 * d_end);
                if seg_point_dist(a, b, q) < tol {
                    return None;
                }
            }
            for (curve, jump) in &self.events {
                for cr in crossings(a, b, curve) {
                    shift += *jump * cr.sign as f64;
                }
            }
            for (ray, jump) in &self.event_rays {
                if let Some(sign) = seg_ray_cross(a, b, ray.origin, ray.dir) {
                    shift += *jump * sign as f64;
                }
            }
        }
        Some(shift)
    }

    fn shift_to(&self, z: Complex64) -> Option<Complex64> {
        let mut order: Vec<usize> = (0..self.anchors.len()).collect();
        order.sort_by(|&i, &j| {
            (self.anchors[i].0 - z).norm().total_cmp(&(self.anchors[j].0 - z).norm())
        });
        for i in order {
            let (a, s0) = self.anchors[i];
            for route in self.route_catalog(a, z) {
                if let Some(ds) = self.walk(&route) {
                    return Some(s0 + ds);
                }
            }
        }
        None
    }

    /// Seeds shift anchors in the regions the straight catalog reaches badly:
    /// northeast above ℝ₊, the southern expanse, and the pocket east of the
    /// σ₀ gate when σ₀ reaches ℝ₊.
    fn build_anchors(&mut self) -> Result<()> {
        let p = self.maps.graph.p;
        let s = p.scale();
        let candidates = [
            Complex64::new(p.zeta_plus.re.max(0.0) + 3.0 * s, 1.5 * s),
            Complex64::new(p.zeta_minus.re + 0.5 * s, self.y_south + 2.0 * s),
        ];
        for q in candidates {
            if let Some(sv) = self.shift_to(q) {
                self.anchors.push((q, sv));
            }
        }
        // gate into the pocket between C, Σ− and ℝ₊. The catalog cannot get
        // there: the pocket's north (ℝ₊) and south (Σ−) walls are cuts, and
        // its only crossable wall is σ₀'s hook, whose approach corridor — the
        // axis gap between γ's launch and the origin — no rectilinear route
        // threads. Stage low over ℝ₊ east of the hook, run west over the gap,
        // descend on the negative-axis side, and cross σ₀ once.
        let sigma0 = self.maps.graph.sigma0.points.clone();
        let rp_a = czero();
        let rp_b = Complex64::new(CLIP * s, 0.0);
        let mut first_cross: Option<(f64, f64)> = None;
        let mut acc = 0.0;
        for w in sigma0.windows(2) {
            if let Some(cr) = crossings(w[0], w[1], &[rp_a, rp_b]).first() {
                let hit = w[0] + cr.t * (w[1] - w[0]);
                first_cross = Some((hit.re, acc + cr.t * (w[1] - w[0]).norm()));
                break;
            }
            acc += (w[1] - w[0]).norm();
        }
        if let Some((x_star, s_c)) = first_cross {
            let stage = Complex64::new(x_star.max(p.zeta_plus.re) + 0.2 * s, 0.12 * s);
            let s_stage = match self.shift_to(stage) {
                Some(v) => v,
                None => return Ok(()),
            };
            for frac in [0.45, 0.6, 0.3, 0.75, 0.15] {
                let target = frac * s_c;
                let mut acc2 = 0.0;
                let mut station = None;
                for w in sigma0.windows(2) {
                    let l = (w[1] - w[0]).norm();
                    if acc2 + l >= target {
                        station = Some((w[0] + (target - acc2) / l * (w[1] - w[0]), (w[1] - w[0]) / l));
                        break;
                    }
                    acc2 += l;
                }
                let Some((v, t_hat)) = station else { continue };
                // offset within a fraction of the local clearance so both
                // probes stay in their intended faces
                let d_walls = nearest_on_polyline(&self.cuts[0], v)
                    .dist
                    .min(nearest_on_polyline(&self.cuts[1], v).dist)
                    .min(v.norm());
                let delta = (0.08 * s).min(0.3 * d_walls);
                if delta < 1e-6 * s {
                    continue;
                }
                let n_hat = Complex64::new(0.0, 1.0) * t_hat;
                let (q1, q2) = (v + delta * n_hat, v - delta * n_hat);
                // the pocket side is the one nearer Σ−
                let (out_side, in_side) =
                    if nearest_on_polyline(&self.cuts[1], q1).dist < nearest_on_polyline(&self.cuts[1], q2).dist {
                        (q2, q1)
                    } else {
                        (q1, q2)
                    };
                let approach = [stage, Complex64::new(out_side.re, stage.im), out_side];
                let Some(ds1) = self.walk(&approach) else { continue };
                let Some(ds2) = self.walk(&[out_side, in_side]) else { continue };
                self.anchors.push((out_side, s_stage + ds1));
                self.anchors.push((in_side, s_stage + ds1 + ds2));
                // a deeper anchor east of the hook widens the pocket catalog
                let deep = Complex64::new(x_star + 0.5 * s, in_side.im);
                if let Some(ds3) = self.walk(&[in_side, deep]) {
                    self.anchors.push((deep, s_stage + ds1 + ds2 + ds3));
                }
                break;
            }
        }
        Ok(())
    }

    /// ϕ(z) in the ½∫ normalization: φ(z) plus the locally constant shift.
    pub fn eval(&self, z: Complex64) -> Result<PhiValue> {
        let p = self.maps.graph.p;
        let s = p.scale();
        for c in &self.cuts {
            if nearest_on_polyline(c, z).dist < 1e-9 * s {
                return Err(CoreError::OutOfDomain(z));
            }
        }
        let shift = self.shift_to(z).ok_or(CoreError::OutOfDomain(z))?;
        let base = self.maps.phi(z)?;
        Ok(PhiValue { value: base.value + shift, variant: PhiVariant::VarPhi, face: base.face })
    }

    /// 2·ϕ(z): the unhalved normalization entering the g-function identity.
    pub fn eval_unhalved(&self, z: Complex64) -> Result<Complex64> {
        Ok(2.0 * self.eval(z)?.value)
    }
}

/// Conformal-image diagnostics of φ̃ (and the φ connection constants) against
/// the face decomposition.
#[derive(Debug, Clone)]
pub struct ConformalReport {
    pub samples_per_face: [usize; 3],
    pub sign_violations: usize,
    /// first few offending samples: (z, face index, Re φ̃)
    pub violation_detail: Vec<(Complex64, usize, f64)>,
    pub max_connection_defect: f64,
    /// Re φ̃ extent across the strip face measured at boundary probes.
    pub strip_width: f64,
    pub strip_width_defect: f64,
    /// the two boundary values of Re φ̃ on σ₀'s sides (should be ≈ 0 and π·Im A)
    pub sigma0_side_values: (f64, f64),
    pub max_abs_re_phi_on_gamma: f64,
}

/// Samples each face with a low-discrepancy sequence, checking the sign
/// pattern of Re φ̃, the φ = φ̃ + const connection per face, the strip width
/// from boundary probes, and Re φ on γ.
pub fn check_conformal_images(
    graph: &CriticalGraph,
    maps: &PhiMaps,
    per_face: usize,
) -> Result<ConformalReport> {
    let p = graph.p;
    let s = p.scale();
    let im_a = p.a.im;
    let strip = PI * im_a;
    let i_pi = Complex64::new(0.0, PI);

    let mut counts = [0usize; 3];
    let mut violations = 0usize;
    let mut detail: Vec<(Complex64, usize, f64)> = Vec::new();
    let mut max_defect: f64 = 0.0;

    let lo = Complex64::new(
        p.zeta_minus.re.min(p.zeta_plus.re).min(0.0) - 1.5 * s,
        p.zeta_minus.im.min(p.zeta_plus.im).min(0.0) - 1.5 * s,
    );
    let hi = Complex64::new(
        p.zeta_minus.re.max(p.zeta_plus.re).max(0.0) + 1.5 * s,
        p.zeta_minus.im.max(p.zeta_plus.im).max(0.0) + 1.5 * s,
    );
    let mut k = 0u64;
    while counts.iter().any(|&c| c < per_face) && k < 300 * per_face as u64 {
        k += 1;
        let fx = (k as f64 * 0.754_877_666_246_693).fract();
        let fy = (k as f64 * 0.569_840_290_998_053).fract();
        let z = Complex64::new(lo.re + (hi.re - lo.re) * fx, lo.im + (hi.im - lo.im) * fy);
        if z.norm() < 0.02 * s {
            continue;
        }
        if graph.arcs().iter().any(|a| nearest_on_polyline(&a.1.points, z).dist < 0.02 * s) {
            continue;
        }
        let Ok(face) = graph.face(z) else { continue };
        let fi = match face {
            Face::OmegaPlus => 0,
            Face::OmegaMinusOne => 1,
            Face::OmegaMinusTwo => 2,
        };
        if counts[fi] >= per_face {
            continue;
        }
        let (Ok(f), Ok(ft)) = (maps.phi(z), maps.phitilde(z)) else { continue };
        counts[fi] += 1;
        let re = ft.value.re;
        let ok = match face {
            Face::OmegaPlus => re < 1e-9,
            Face::OmegaMinusOne => re > -1e-9 && re < strip + 1e-9,
            Face::OmegaMinusTwo => re > strip - 1e-9,
        };
        if !ok {
            violations += 1;
            if detail.len() < 12 {
                detail.push((z, fi, re));
            }
        }
        let expect = match face {
            Face::OmegaPlus => -i_pi,
            _ => i_pi * (p.a + 1.0),
        };
        max_defect = max_defect.max((f.value - (ft.value + expect)).norm());
    }

    // boundary probes at 3e−9·scale offsets
    let probe = |curve: &[Complex64], frac: f64, want: Face| -> Result<f64> {
        let idx = ((curve.len() - 1) as f64 * frac) as usize;
        let t = curve[idx + 1] - curve[idx];
        let n_hat = Complex64::new(0.0, 1.0) * t / t.norm();
        let h = 3e-9 * s;
        for side in [1.0, -1.0] {
            let q = curve[idx] + side * h * n_hat;
            if matches!(graph.face(q), Ok(f) if f == want) {
                return Ok(maps.phitilde(q)?.value.re);
            }
        }
        Err(CoreError::ConstructionFailed("boundary probe failed to land in the face".into()))
    };
    let left = probe(&graph.sigma_minus.points, 0.3, Face::OmegaMinusOne)?;
    let right = probe(&graph.sigma_down.points, 0.3, Face::OmegaMinusOne)?;
    let strip_width = right - left;

    let s0_a = probe(&graph.sigma0.points, 0.4, Face::OmegaMinusOne)?;
    let s0_b = {
        let idx = ((graph.sigma0.points.len() - 1) as f64 * 0.4) as usize;
        let curve = &graph.sigma0.points;
        let t = curve[idx + 1] - curve[idx];
        let n_hat = Complex64::new(0.0, 1.0) * t / t.norm();
        let h = 3e-9 * s;
        // the side opposite to the probe that matched above
        let q1 = curve[idx] + h * n_hat;
        let q2 = curve[idx] - h * n_hat;
        let r1 = maps.phitilde(q1)?.value.re;
        let r2 = maps.phitilde(q2)?.value.re;
        if (r1 - s0_a).abs() < (r2 - s0_a).abs() {
            r2
        } else {
            r1
        }
    };

    let mut max_gamma: f64 = 0.0;
    for frac in [0.2, 0.35, 0.5, 0.65, 0.8] {
        let curve = &graph.gamma.points;
        let idx = ((curve.len() - 1) as f64 * frac) as usize;
        let t = curve[idx + 1] - curve[idx];
        let n_hat = Complex64::new(0.0, 1.0) * t / t.norm();
        for side in [1.0, -1.0] {
            let q = curve[idx] + side * 3e-9 * s * n_hat;
            max_gamma = max_gamma.max(maps.phi(q)?.value.re.abs());
        }
    }

    Ok(ConformalReport {
        samples_per_face: counts,
        sign_violations: violations,
        violation_detail: detail,
        max_connection_defect: max_defect,
        strip_width,
        strip_width_defect: (strip_width - strip).abs(),
        sigma0_side_values: (s0_a.min(s0_b), s0_a.max(s0_b)),
        max_abs_re_phi_on_gamma: max_gamma,
    })
}
