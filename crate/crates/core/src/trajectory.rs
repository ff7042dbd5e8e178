//! Trajectory tracing for the differential −D_A(z)/z² dz²: horizontal arcs
//! (level sets of Re ∫R/t dt) and orthogonal arcs (level sets of Im ∫R/t dt),
//! the critical graph built from the arcs emanating at ζ±, face
//! classification, and the homotopy class of arcs ζ− → ζ+.

use num_complex::Complex64;

use crate::branch::{r_seg, BranchState};
use crate::error::CoreError;
use crate::geom::{self, crossings, nearest_on_polyline, winding_number};
use crate::param::Parameter;
use crate::quad::{gl16_segment, sqrt_endpoint_segment};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryKind {
    Horizontal,
    Orthogonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroId {
    ZetaMinus,
    ZetaPlus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfinityDirection {
    PlusImag,
    MinusImag,
    PlusReal,
    MinusReal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminal {
    /// reached a zero of D (ζ− or ζ+)
    AtZero(ZeroId),
    /// reached the origin; winding counts full turns around 0 along the way
    AtOrigin { winding: i32 },
    AtInfinity(InfinityDirection),
}

/// A traced trajectory: points z_k with the accumulated w_k = ∫ R/t dt from
/// the first point along the curve (branch continued along the curve).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub kind: TrajectoryKind,
    pub points: Vec<Complex64>,
    pub w_values: Vec<Complex64>,
    pub terminal: Terminal,
}

impl Trajectory {
    pub fn start(&self) -> Complex64 {
        self.points[0]
    }
    pub fn end(&self) -> Complex64 {
        *self.points.last().unwrap()
    }
    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
    pub fn arclength(&self) -> f64 {
        geom::polyline_length(&self.points)
    }
}

/// Stopping rules for the tracer.
#[derive(Debug, Clone, Copy)]
pub struct StopRules {
    pub zero_capture_radius: f64,
    pub origin_radius: f64,
    pub infinity_radius: f64,
    pub max_arclength: f64,
    pub max_steps: usize,
    /// cap on |turns| around the origin (runaway guard for closed/circular arcs)
    pub max_winding: f64,
    /// bound on the sagitta between the emitted polyline and the true arc
    /// (controls output density, hence polyline-level comparisons)
    pub sag_tol: f64,
}

impl StopRules {
    pub fn defaults(p: &Parameter) -> Self {
        let a = p.a.norm();
        StopRules {
            zero_capture_radius: 1e-4 * (1.0 + (p.zeta_plus - p.zeta_minus).norm()),
            origin_radius: 1e-6 * (1.0 + a),
            infinity_radius: 50.0 * (1.0 + a),
            max_arclength: 600.0 * p.scale(),
            max_steps: 400_000,
            max_winding: 40.0,
            sag_tol: 5e-8 * p.scale(),
        }
    }
}

/// The three directions in which trajectories of the requested kind emanate
/// from the zero ζ (local model w − w(ζ) ≈ (2/3)·K·(z−ζ)^{3/2} with
/// K = √(D′(ζ))/ζ). Horizontal: θ = (2/3)(π/2 + mπ − arg K); orthogonal:
/// θ = (2/3)(mπ − arg K). Returned sorted by angle in [0, 2π).
pub fn emanating_directions(p: &Parameter, at: ZeroId, kind: TrajectoryKind) -> Result<[Complex64; 3]> {
    let zeta = match at {
        ZeroId::ZetaMinus => p.zeta_minus,
        ZeroId::ZetaPlus => p.zeta_plus,
    };
    let dp = p.d_prime(zeta);
    if dp.norm() < 1e-12 * p.scale() {
        return Err(CoreError::DegenerateParameter(p.a));
    }
    let k = dp.sqrt() / zeta;
    let base = match kind {
        TrajectoryKind::Horizontal => std::f64::consts::FRAC_PI_2,
        TrajectoryKind::Orthogonal => 0.0,
    };
    let mut th: Vec<f64> = (0..3)
        .map(|m| {
            let t = 2.0 / 3.0 * (base + m as f64 * std::f64::consts::PI - k.arg());
            t.rem_euclid(std::f64::consts::TAU)
        })
        .collect();
    th.sort_by(f64::total_cmp);
    Ok([
        Complex64::from_polar(1.0, th[0]),
        Complex64::from_polar(1.0, th[1]),
        Complex64::from_polar(1.0, th[2]),
    ])
}

/// Unit tangent of the level-set field at z for the given branch value r of R:
/// horizontal keeps Re w constant (dw purely imaginary), orthogonal keeps
/// Im w constant.
fn unit_field(kind: TrajectoryKind, r: Complex64, z: Complex64) -> Complex64 {
    let q = r / z;
    let c = q.conj() / q.norm();
    match kind {
        TrajectoryKind::Horizontal => Complex64::new(0.0, 1.0) * c,
        TrajectoryKind::Orthogonal => c,
    }
}

/// Nearest square root of D(z) to the reference value.
fn nearest_sqrt(p: &Parameter, z: Complex64, r_ref: Complex64) -> Complex64 {
    let s = p.d(z).sqrt();
    if (s - r_ref).norm() <= (-s - r_ref).norm() {
        s
    } else {
        -s
    }
}

/// ∫ R/t dt over the straight chord [za, zb], with R selected pointwise as the
/// square root closest to the linear interpolation of the endpoint branches.
fn chord_dw(p: &Parameter, za: Complex64, ra: Complex64, zb: Complex64, rb: Complex64) -> Complex64 {
    let dz = zb - za;
    gl16_segment(
        |t| {
            let lam = ((t - za) / dz).re;
            let r_lin = ra + (rb - ra) * lam;
            nearest_sqrt(p, t, r_lin) / t
        },
        za,
        zb,
    )
}

/// Traces the trajectory of the given kind through `start`, heading along
/// `dir` (sign only; the field direction is fixed by the level-set geometry).
///
/// The tracer is an adaptive RK4 on the unit tangent field with a Newton
/// projection back onto the exact level set after every step, so the recorded
/// w_values keep Re w (horizontal) or Im w (orthogonal) constant to roundoff.
pub fn trace(
    p: &Parameter,
    start: Complex64,
    dir: Complex64,
    kind: TrajectoryKind,
    stop: &StopRules,
) -> Result<Trajectory> {
    let scale = p.scale();
    let mut z = start;
    let mut r = r_seg(p, start);
    let v0 = unit_field(kind, r, z);
    let dot = dir.re * v0.re + dir.im * v0.im;
    let sgn = if dot >= 0.0 { 1.0 } else { -1.0 };

    let mut w = Complex64::new(0.0, 0.0);
    let mut points = vec![z];
    let mut w_values = vec![w];
    let mut winding = 0.0f64;
    let mut arclen = 0.0f64;

    // capture disarmed until the trajectory has left each zero's neighborhood
    let mut armed = [
        (z - p.zeta_minus).norm() > 2.0 * stop.zero_capture_radius,
        (z - p.zeta_plus).norm() > 2.0 * stop.zero_capture_radius,
    ];

    for _ in 0..stop.max_steps {
        let d0 = z.norm();
        let dm = (z - p.zeta_minus).norm();
        let dp = (z - p.zeta_plus).norm();
        let dist = d0.min(dm).min(dp);
        let mut h = (0.25 * dist).min((0.05 * scale).max(0.08 * z.norm()));

        // RK4 stages with the branch frozen to the step's start reference
        let f = |zz: Complex64| -> Complex64 {
            let rr = nearest_sqrt(p, zz, r);
            sgn * unit_field(kind, rr, zz)
        };
        let k1 = f(z);
        let (mut z_new, mut r_new);
        loop {
            if h < 1e-13 * scale {
                return Err(CoreError::StepCollapse(z));
            }
            let k2 = f(z + 0.5 * h * k1);
            let k3 = f(z + 0.5 * h * k2);
            let k4 = f(z + h * k3);
            z_new = z + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            r_new = nearest_sqrt(p, z_new, r);
            // sagitta estimate from the tangent turn over the step: the chord
            // deviates from the arc by ~ |Δz|·Δθ/8
            let v_end = sgn * unit_field(kind, r_new, z_new);
            let turn = (v_end * k1.conj()).arg().abs();
            if turn * (z_new - z).norm() <= 8.0 * stop.sag_tol {
                break;
            }
            h *= 0.5;
        }
        let mut dw = chord_dw(p, z, r, z_new, r_new);

        // project back to the level set (defect is the drift of the conserved
        // coordinate of w, which starts at 0)
        for _ in 0..3 {
            let q = r_new / z_new;
            let defect = match kind {
                TrajectoryKind::Horizontal => (w + dw).re,
                TrajectoryKind::Orthogonal => (w + dw).im,
            };
            if defect.abs() <= 1e-14 * (1.0 + (w + dw).norm()) {
                break;
            }
            let corr = match kind {
                TrajectoryKind::Horizontal => -defect * q.conj() / q.norm_sqr(),
                TrajectoryKind::Orthogonal => {
                    -defect * (Complex64::new(0.0, 1.0) * q.conj()) / q.norm_sqr()
                }
            };
            z_new += corr;
            r_new = nearest_sqrt(p, z_new, r_new);
            dw = chord_dw(p, z, r, z_new, r_new);
        }

        winding += (z_new / z).arg();
        arclen += (z_new - z).norm();
        w += dw;
        z = z_new;
        r = r_new;
        points.push(z);
        w_values.push(w);

        // stop rules
        let dm = (z - p.zeta_minus).norm();
        let dp = (z - p.zeta_plus).norm();
        if !armed[0] && dm > 2.0 * stop.zero_capture_radius {
            armed[0] = true;
        }
        if !armed[1] && dp > 2.0 * stop.zero_capture_radius {
            armed[1] = true;
        }
        if armed[0] && dm <= stop.zero_capture_radius {
            finish_at_zero(p, &mut points, &mut w_values, p.zeta_minus, r);
            return Ok(Trajectory { kind, points, w_values, terminal: Terminal::AtZero(ZeroId::ZetaMinus) });
        }
        if armed[1] && dp <= stop.zero_capture_radius {
            finish_at_zero(p, &mut points, &mut w_values, p.zeta_plus, r);
            return Ok(Trajectory { kind, points, w_values, terminal: Terminal::AtZero(ZeroId::ZetaPlus) });
        }
        if z.norm() <= stop.origin_radius {
            let turns = (winding / std::f64::consts::TAU).round() as i32;
            return Ok(Trajectory { kind, points, w_values, terminal: Terminal::AtOrigin { winding: turns } });
        }
        if z.norm() >= stop.infinity_radius {
            let dir = match kind {
                TrajectoryKind::Horizontal => {
                    if z.im >= 0.0 {
                        InfinityDirection::PlusImag
                    } else {
                        InfinityDirection::MinusImag
                    }
                }
                TrajectoryKind::Orthogonal => {
                    if z.re >= 0.0 {
                        InfinityDirection::PlusReal
                    } else {
                        InfinityDirection::MinusReal
                    }
                }
            };
            return Ok(Trajectory { kind, points, w_values, terminal: Terminal::AtInfinity(dir) });
        }
        if winding.abs() > stop.max_winding * std::f64::consts::TAU {
            return Err(CoreError::MaxLengthExceeded(arclen));
        }
        if arclen > stop.max_arclength {
            return Err(CoreError::MaxLengthExceeded(arclen));
        }
    }
    Err(CoreError::MaxLengthExceeded(arclen))
}

/// Snap the final point of a zero-terminated trajectory to the exact zero,
/// extending w by the local square-root model. `r_last` is the tracer's
/// continued branch value at the current final point.
fn finish_at_zero(
    p: &Parameter,
    points: &mut Vec<Complex64>,
    w_values: &mut Vec<Complex64>,
    zeta: Complex64,
    r_last: Complex64,
) {
    let last = *points.last().unwrap();
    // w(ζ) = w(last) − ∫_{ζ}^{last} R/t dt, R matched to the local model K√(t−ζ)
    let local = sqrt_local_matching(p, zeta, last, r_last);
    let seg = sqrt_endpoint_segment(&mut |t| local.eval(p, t) / t, zeta, last, 8);
    let w_last = *w_values.last().unwrap();
    points.push(zeta);
    w_values.push(w_last - seg);
}

/// Local square-root model near a zero ζ: R(t) ≈ k·√(t−ζ), with k = ±√(D′(ζ))
/// fixed by matching a reference value.
#[derive(Debug, Clone, Copy)]
pub struct SqrtLocal {
    pub zeta: Complex64,
    pub k: Complex64,
}

impl SqrtLocal {
    /// ±√D(t), the sign chosen to follow the local model.
    pub fn eval(&self, p: &Parameter, t: Complex64) -> Complex64 {
        let s = p.d(t).sqrt();
        let model = self.k * (t - self.zeta).sqrt();
        if (s - model).norm() <= (-s - model).norm() {
            s
        } else {
            -s
        }
    }
}

/// Fixes the local model's sign so that k·√(z_ref−ζ) ≈ r_ref.
pub fn sqrt_local_matching(
    p: &Parameter,
    zeta: Complex64,
    z_ref: Complex64,
    r_ref: Complex64,
) -> SqrtLocal {
    let k0 = p.d_prime(zeta).sqrt();
    let m = k0 * (z_ref - zeta).sqrt();
    let k = if (m - r_ref).norm() <= (m + r_ref).norm() { k0 } else { -k0 };
    SqrtLocal { zeta, k }
}

/// Traces the arc of the given kind emanating from ζ in direction `dir`
/// (one of [`emanating_directions`]); the result starts at the exact zero with
/// w(ζ) = 0 (the offset leg is integrated with the endpoint-adapted rule).
pub fn seed_from_zero(
    p: &Parameter,
    at: ZeroId,
    dir: Complex64,
    kind: TrajectoryKind,
    stop: &StopRules,
) -> Result<Trajectory> {
    let zeta = match at {
        ZeroId::ZetaMinus => p.zeta_minus,
        ZeroId::ZetaPlus => p.zeta_plus,
    };
    let delta0 = 3e-6 * p.scale();
    let z1 = zeta + delta0 * dir;
    let mut traj = trace(p, z1, dir, kind, stop)?;
    // w(z1) − w(ζ) via the local model, matched to the tracer's seed branch
    let r1 = r_seg(p, z1);
    let local = sqrt_local_matching(p, zeta, z1, r1);
    let offset = sqrt_endpoint_segment(&mut |t| local.eval(p, t) / t, zeta, z1, 8);
    traj.points.insert(0, zeta);
    traj.w_values.insert(0, Complex64::new(0.0, 0.0));
    for w in traj.w_values.iter_mut().skip(1) {
        *w += offset;
    }
    Ok(traj)
}

/// The short trajectory γ_A: the horizontal arc ζ− → ζ+. Candidates are the
/// three horizontal arcs emanating at ζ−; among those terminating at ζ+ the
/// one whose normalized period is closest to 2πi wins.
pub fn find_short_trajectory(p: &Parameter) -> Result<Trajectory> {
    let dirs = emanating_directions(p, ZeroId::ZetaMinus, TrajectoryKind::Horizontal)?;
    let stop = StopRules::defaults(p);
    let mut best: Option<(f64, Trajectory)> = None;
    for d in dirs {
        let Ok(t) = seed_from_zero(p, ZeroId::ZetaMinus, d, TrajectoryKind::Horizontal, &stop) else {
            continue;
        };
        if t.terminal == Terminal::AtZero(ZeroId::ZetaPlus) {
            let per = period_two_sided(p, &t.points).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
            let score = (per - Complex64::new(0.0, std::f64::consts::TAU)).norm();
            let score = if score.is_nan() { f64::INFINITY } else { score };
            if best.as_ref().map_or(true, |(s, _)| score < *s) {
                best = Some((score, t));
            }
        }
    }
    best.map(|(_, t)| t).ok_or(CoreError::NotFound)
}

/// The normalized period over the traced short trajectory: ½ ∮ R/t dt over an
/// explicit two-sided loop hugging the arc (offset on both sides, capped
/// around ζ±), the branch cut along the arc itself. Equals 2πi when γ is in
/// the class avoiding ℝ₊, and 2πi(A+1) in the complementary class.
pub fn period_two_sided(p: &Parameter, gamma: &[Complex64]) -> Result<Complex64> {
    let scale = p.scale();
    let eps = 2e-4 * scale;
    // keep only vertices well clear of the endpoints
    let zm = gamma[0];
    let zp = *gamma.last().unwrap();
    let interior: Vec<Complex64> = gamma
        .iter()
        .copied()
        .filter(|z| (z - zm).norm() > 3.0 * eps && (z - zp).norm() > 3.0 * eps)
        .collect();
    if interior.len() < 2 {
        return Err(CoreError::ConstructionFailed("short trajectory too short for period loop".into()));
    }
    let normal_at = |i: usize| -> Complex64 {
        let a = if i == 0 { interior[0] } else { interior[i - 1] };
        let b = if i + 1 >= interior.len() { interior[interior.len() - 1] } else { interior[i + 1] };
        let t = (b - a) / (b - a).norm();
        Complex64::new(0.0, 1.0) * t
    };
    let fwd: Vec<Complex64> = (0..interior.len()).map(|i| interior[i] + eps * normal_at(i)).collect();
    let bwd: Vec<Complex64> = (0..interior.len()).rev().map(|i| interior[i] - eps * normal_at(i)).collect();

    // caps around the зeros: sweep the circle |z−ζ| = r_cap the long way
    let mut lp: Vec<Complex64> = Vec::new();
    lp.extend_from_slice(&fwd);
    let cap_plus = cap_arc(zp, *fwd.last().unwrap(), bwd[0]);
    lp.extend_from_slice(&cap_plus);
    lp.extend_from_slice(&bwd);
    let cap_minus = cap_arc(zm, *bwd.last().unwrap(), fwd[0]);
    lp.extend_from_slice(&cap_minus);
    lp.push(fwd[0]);

    let branch = BranchState {
        base_point: lp[0],
        sqrt_value: crate::branch::r_global_unchecked(p, lp[0], gamma),
    };
    let loop_integral = crate::branch::antiderivative_w(p, lp[0], lp[0], &lp, branch)?;
    Ok(0.5 * loop_integral)
}

/// Circle arc around `center` from point `from` to point `to`, sweeping the
/// long way (so the arc does not cross the curve that enters at the average
/// of the two endpoint angles).
fn cap_arc(center: Complex64, from: Complex64, to: Complex64) -> Vec<Complex64> {
    let r0 = (from - center).norm();
    let r1 = (to - center).norm();
    let th0 = (from - center).arg();
    let mut th1 = (to - center).arg();
    // sweep the long way: |Δθ| ≥ π
    while th1 - th0 > -std::f64::consts::PI {
        th1 -= std::f64::consts::TAU;
    }
    // NOTE: direction chosen below must match the two-sided loop orientation:
    // forward side on the left normal, so the cap at the far end turns clockwise
    // relative to the curve; sweeping negative Δθ does that.
    let n = 32;
    (1..=n)
        .map(|k| {
            let f = k as f64 / n as f64;
            let th = th0 + f * (th1 - th0);
            let r = r0 + f * (r1 - r0);
            center + Complex64::from_polar(r, th)
        })
        .collect()
}

/// Faces of the critical graph: Ω₊ contains −∞, Ω₋⁽¹⁾ the origin, Ω₋⁽²⁾ +∞.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Face {
    OmegaPlus,
    OmegaMinusOne,
    OmegaMinusTwo,
}

/// The critical graph of Theorem-1 type: the short arc γ, the arc σ₀ into the
/// origin, σ− to −i∞ (both at ζ−), and σ↑/σ↓ to ±i∞ at ζ+.
#[derive(Debug, Clone)]
pub struct CriticalGraph {
    pub p: Parameter,
    pub gamma: Trajectory,
    pub sigma0: Trajectory,
    pub sigma_minus: Trajectory,
    pub sigma_up: Trajectory,
    pub sigma_down: Trajectory,
    /// boundary curves with vertical tail extensions, for face classification:
    /// [σ−ext, γ, σ↑ext, σ↓ext]
    walker: FaceWalker,
}

#[derive(Debug, Clone)]
struct FaceWalker {
    curves: [Vec<Complex64>; 4],
    anchor: Complex64,
    scale: f64,
}

const Y_BIG: f64 = 1e9;

impl FaceWalker {
    fn classify(&self, z: Complex64) -> Result<Face> {
        for attempt in 0..6 {
            let jitter = match attempt {
                0 => Complex64::new(0.0, 0.0),
                k => Complex64::from_polar(0.37 * self.scale * k as f64, 1.234 * k as f64),
            };
            let from = self.anchor + jitter;
            if let Some(face) = self.walk(from, z) {
                return Ok(face);
            }
        }
        Err(CoreError::OutOfDomain(z))
    }

    fn walk(&self, from: Complex64, to: Complex64) -> Option<Face> {
        let mut events: Vec<(f64, usize)> = Vec::new();
        for (ci, curve) in self.curves.iter().enumerate() {
            for cr in crossings(from, to, curve) {
                events.push((cr.t, ci));
            }
        }
        events.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut face = Face::OmegaPlus;
        for (_, ci) in events {
            face = match (ci, face) {
                (0, Face::OmegaPlus) => Face::OmegaMinusOne, // σ−
                (0, Face::OmegaMinusOne) => Face::OmegaPlus,
                (1, Face::OmegaPlus) => Face::OmegaMinusOne, // γ
                (1, Face::OmegaMinusOne) => Face::OmegaPlus,
                (2, Face::OmegaPlus) => Face::OmegaMinusTwo, // σ↑
                (2, Face::OmegaMinusTwo) => Face::OmegaPlus,
                (3, Face::OmegaMinusOne) => Face::OmegaMinusTwo, // σ↓
                (3, Face::OmegaMinusTwo) => Face::OmegaMinusOne,
                _ => return None, // touched a curve that does not border this face
            };
        }
        Some(face)
    }
}

impl CriticalGraph {
    /// Face of the point z. Errors with OnCut when z sits on a graph arc.
    pub fn face(&self, z: Complex64) -> Result<Face> {
        let tol = 1e-9 * self.p.scale();
        for arc in self.arcs() {
            if nearest_on_polyline(&arc.1.points, z).dist < tol {
                return Err(CoreError::OnCut(z));
            }
        }
        self.walker.classify(z)
    }

    /// The five arcs with their conventional names.
    pub fn arcs(&self) -> [(&'static str, &Trajectory); 5] {
        [
            ("gamma", &self.gamma),
            ("sigma0", &self.sigma0),
            ("sigma_minus", &self.sigma_minus),
            ("sigma_up", &self.sigma_up),
            ("sigma_down", &self.sigma_down),
        ]
    }

    /// Terminal multiset {ζ+, origin, −i∞, +i∞, −i∞} check data.
    pub fn terminals(&self) -> [Terminal; 5] {
        [
            self.gamma.terminal,
            self.sigma0.terminal,
            self.sigma_minus.terminal,
            self.sigma_up.terminal,
            self.sigma_down.terminal,
        ]
    }
}

/// Builds the critical graph for a non-real parameter.
pub fn build_critical_graph(p: &Parameter) -> Result<CriticalGraph> {
    if p.is_real() {
        return Err(CoreError::BoundaryCase(
            "critical graph of Theorem-1 type requires Im A > 0".into(),
        ));
    }
    let stop = StopRules::defaults(p);
    let gamma = find_short_trajectory(p)?;

    // at ζ−: the two non-γ horizontal arcs are σ₀ (to the origin) and σ− (to −i∞)
    let dirs_m = emanating_directions(p, ZeroId::ZetaMinus, TrajectoryKind::Horizontal)?;
    let gamma_dir = (gamma.points[1] - gamma.points[0])
        / (gamma.points[1] - gamma.points[0]).norm();
    let mut sigma0 = None;
    let mut sigma_minus = None;
    for d in dirs_m {
        if (d - gamma_dir).norm() < 0.5 {
            continue; // γ's own direction
        }
        let t = seed_from_zero(p, ZeroId::ZetaMinus, d, TrajectoryKind::Horizontal, &stop)?;
        match t.terminal {
            Terminal::AtOrigin { .. } => sigma0 = Some(t),
            Terminal::AtInfinity(InfinityDirection::MinusImag) => sigma_minus = Some(t),
            other => {
                return Err(CoreError::GraphInconsistent(format!(
                    "arc from ζ− toward {d} ended at {other:?}"
                )))
            }
        }
    }
    let (sigma0, sigma_minus) = match (sigma0, sigma_minus) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(CoreError::GraphInconsistent(
                "expected σ₀ (origin) and σ− (−i∞) at ζ−".into(),
            ))
        }
    };

    // at ζ+: the two non-γ horizontal arcs go to ±i∞
    let dirs_p = emanating_directions(p, ZeroId::ZetaPlus, TrajectoryKind::Horizontal)?;
    let nv = gamma.points.len();
    let arr_dir = (gamma.points[nv - 1] - gamma.points[nv - 2])
        / (gamma.points[nv - 1] - gamma.points[nv - 2]).norm();
    let back_dir = -arr_dir;
    let mut sigma_up = None;
    let mut sigma_down = None;
    for d in dirs_p {
        if (d - back_dir).norm() < 0.5 {
            continue;
        }
        let t = seed_from_zero(p, ZeroId::ZetaPlus, d, TrajectoryKind::Horizontal, &stop)?;
        match t.terminal {
            Terminal::AtInfinity(InfinityDirection::PlusImag) => sigma_up = Some(t),
            Terminal::AtInfinity(InfinityDirection::MinusImag) => sigma_down = Some(t),
            other => {
                return Err(CoreError::GraphInconsistent(format!(
                    "arc from ζ+ toward {d} ended at {other:?}"
                )))
            }
        }
    }
    let (sigma_up, sigma_down) = match (sigma_up, sigma_down) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(CoreError::GraphInconsistent(
                "expected σ↑ (+i∞) and σ↓ (−i∞) at ζ+".into(),
            ))
        }
    };

    // face-classification walker
    let extend_down = |t: &Trajectory| {
        let mut v = t.points.clone();
        let last = t.end();
        v.push(Complex64::new(last.re, -Y_BIG));
        v
    };
    let extend_up = |t: &Trajectory| {
        let mut v = t.points.clone();
        let last = t.end();
        v.push(Complex64::new(last.re, Y_BIG));
        v
    };
    let min_x = [
        &gamma, &sigma0, &sigma_minus, &sigma_up, &sigma_down,
    ]
    .iter()
    .flat_map(|t| t.points.iter())
    .map(|z| z.re)
    .fold(f64::INFINITY, f64::min);
    let anchor = Complex64::new(
        min_x - 5.0 * p.scale(),
        0.5 * (p.zeta_minus.im + p.zeta_plus.im),
    );
    let walker = FaceWalker {
        curves: [
            extend_down(&sigma_minus),
            gamma.points.clone(),
            extend_up(&sigma_up),
            extend_down(&sigma_down),
        ],
        anchor,
        scale: p.scale(),
    };

    Ok(CriticalGraph {
        p: *p,
        gamma,
        sigma0,
        sigma_minus,
        sigma_up,
        sigma_down,
        walker,
    })
}

/// The orthogonal analogue: the six orthogonal arcs emanating at ζ±, traced
/// as far as their terminals. For real A (closed circular degeneration) the
/// structure is returned with `boundary_case` set and whatever arcs resolved.
#[derive(Debug, Clone)]
pub struct OrthogonalGraph {
    pub arcs_minus: Vec<Trajectory>,
    pub arcs_plus: Vec<Trajectory>,
    pub boundary_case: bool,
}

pub fn orthogonal_critical_graph(p: &Parameter) -> Result<OrthogonalGraph> {
    let stop = StopRules::defaults(p);
    let boundary = p.is_real();
    let mut arcs_minus = Vec::new();
    let mut arcs_plus = Vec::new();
    for (at, bucket) in [(ZeroId::ZetaMinus, &mut arcs_minus), (ZeroId::ZetaPlus, &mut arcs_plus)] {
        for d in emanating_directions(p, at, TrajectoryKind::Orthogonal)? {
            match seed_from_zero(p, at, d, TrajectoryKind::Orthogonal, &stop) {
                Ok(t) => bucket.push(t),
                Err(CoreError::MaxLengthExceeded(_)) if boundary => {} // closed arcs
                Err(e) => return Err(e),
            }
        }
    }
    Ok(OrthogonalGraph { arcs_minus, arcs_plus, boundary_case: boundary })
}

/// Homotopy class of an arc ζ− → ζ+ in ℂ∖{0}: `FA` when it is deformable to
/// the reference arc avoiding ℝ₊ (winding of arc·ref⁻¹ around 0 is zero).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HomotopyClass {
    FA,
    Complement,
}

pub fn homotopy_class(arc: &[Complex64], p: &Parameter) -> Result<HomotopyClass> {
    let tol = 1e-9 * p.scale();
    for w in arc.windows(2) {
        let d = w[1] - w[0];
        let len2 = d.norm_sqr();
        let t = if len2 == 0.0 {
            0.0
        } else {
            ((-w[0].re * d.re - w[0].im * d.im) / len2).clamp(0.0, 1.0)
        };
        if (w[0] + t * d).norm() < tol {
            return Err(CoreError::ArcThroughOrigin);
        }
    }
    // reference arc: the straight segment when it stays clear of ℝ₊ ∪ {0},
    // otherwise two legs through a point on ℝ₋
    let seg = [p.zeta_minus, p.zeta_plus];
    let seg_clear = {
        let n = nearest_on_polyline(&seg, Complex64::new(0.0, 0.0));
        let hits_ray = crossings(
            p.zeta_minus,
            p.zeta_plus,
            &[Complex64::new(0.0, 0.0), Complex64::new(1e12, 0.0)],
        );
        n.dist > tol && hits_ray.is_empty()
    };
    let reference: Vec<Complex64> = if seg_clear {
        vec![p.zeta_minus, p.zeta_plus]
    } else {
        vec![p.zeta_minus, Complex64::new(-2.0 * p.scale(), 0.0), p.zeta_plus]
    };
    // closed loop: arc forward, reference backward
    let mut lp: Vec<Complex64> = arc.to_vec();
    lp.extend(reference.iter().rev());
    let w = winding_number(&lp, Complex64::new(0.0, 0.0));
    Ok(if w == 0 { HomotopyClass::FA } else { HomotopyClass::Complement })
}

/// True when the traced γ meets the open straight segment (ζ−, ζ+) away from
/// the endpoints (convexity violation).
pub fn gamma_meets_segment_interior(p: &Parameter, gamma: &[Complex64]) -> bool {
    let end_guard = 1e-3;
    crossings(p.zeta_minus, p.zeta_plus, gamma)
        .iter()
        .any(|cr| cr.t > end_guard && cr.t < 1.0 - end_guard)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn param(re: f64, im: f64) -> Parameter {
        Parameter::new(c(re, im)).unwrap()
    }

    #[test]
    fn emanating_directions_real_case() {
        // A = 3: ζ− = 1, D′(ζ−) = −8, K = √(−8): horizontal directions are
        // {0, 2π/3, 4π/3}
        let p = param(3.0, 0.0);
        assert!((p.zeta_minus - c(1.0, 0.0)).norm() < 1e-14);
        let dirs = emanating_directions(&p, ZeroId::ZetaMinus, TrajectoryKind::Horizontal).unwrap();
        let mut angles: Vec<f64> = dirs.iter().map(|d| d.arg().rem_euclid(std::f64::consts::TAU)).collect();
        angles.sort_by(f64::total_cmp);
        let expected = [0.0, 2.0 * std::f64::consts::FRAC_PI_3, 4.0 * std::f64::consts::FRAC_PI_3];
        for (a, e) in angles.iter().zip(expected) {
            assert!((a - e).abs() < 1e-9, "angles {angles:?}");
        }
    }

    #[test]
    fn real_parameter_short_trajectory_is_the_segment() {
        let p = param(3.0, 0.0);
        let g = find_short_trajectory(&p).unwrap();
        assert_eq!(g.terminal, Terminal::AtZero(ZeroId::ZetaPlus));
        let max_im = g.points.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        assert!(max_im < 1e-7, "γ for real A strays {max_im} off the axis");
        assert!((g.points[0] - c(1.0, 0.0)).norm() < 1e-12);
        assert!((g.end() - c(9.0, 0.0)).norm() < 1e-12);
        // period normalizes to 2πi
        let per = period_two_sided(&p, &g.points).unwrap();
        assert!((per - c(0.0, std::f64::consts::TAU)).norm() < 1e-8, "period {per}");
    }

    #[test]
    fn levels_stay_constant_along_traces() {
        let p = param(-3.0, 2.0);
        let stop = StopRules::defaults(&p);
        let start = c(3.0, -2.0);
        let h = trace(&p, start, c(1.0, 0.0), TrajectoryKind::Horizontal, &stop).unwrap();
        let max_re = h.w_values.iter().map(|w| w.re.abs()).fold(0.0, f64::max);
        assert!(max_re < 1e-10, "Re w drifted {max_re}");
        let o = trace(&p, start, c(1.0, 0.0), TrajectoryKind::Orthogonal, &stop).unwrap();
        let max_im = o.w_values.iter().map(|w| w.im.abs()).fold(0.0, f64::max);
        assert!(max_im < 1e-10, "Im w drifted {max_im}");
    }

    #[test]
    fn short_trajectory_reference_parameter() {
        let p = param(-3.0, 2.0);
        let g = find_short_trajectory(&p).unwrap();
        assert_eq!(g.terminal, Terminal::AtZero(ZeroId::ZetaPlus));
        // starts/ends exactly at the zeros
        assert!((g.points[0] - p.zeta_minus).norm() < 1e-12);
        assert!((g.end() - p.zeta_plus).norm() < 1e-12);
        // Im w spans the full period height 2π across the arc
        let total = g.w_values.last().unwrap().im - g.w_values[0].im;
        println!("Im w span over γ: {total} (2π = {})", std::f64::consts::TAU);
        assert!((total.abs() - std::f64::consts::TAU).abs() < 1e-6);
        // homotopy class: γ avoids ℝ₊
        assert_eq!(homotopy_class(&g.points, &p).unwrap(), HomotopyClass::FA);
        // convexity: no interior meeting with [ζ−, ζ+]
        assert!(!gamma_meets_segment_interior(&p, &g.points));
    }

    #[test]
    fn retrace_symmetry() {
        let p = param(-3.0, 2.0);
        let g = find_short_trajectory(&p).unwrap();
        // re-trace from ζ+ back along γ
        let dirs = emanating_directions(&p, ZeroId::ZetaPlus, TrajectoryKind::Horizontal).unwrap();
        let nv = g.points.len();
        let back = (g.points[nv - 2] - g.points[nv - 1]) / (g.points[nv - 2] - g.points[nv - 1]).norm();
        let d = dirs
            .iter()
            .copied()
            .min_by(|x, y| (x - back).norm().total_cmp(&(y - back).norm()))
            .unwrap();
        let stop = StopRules::defaults(&p);
        let g2 = seed_from_zero(&p, ZeroId::ZetaPlus, d, TrajectoryKind::Horizontal, &stop).unwrap();
        assert_eq!(g2.terminal, Terminal::AtZero(ZeroId::ZetaMinus));
        let hd = geom::hausdorff(&g.points, &g2.points);
        println!("retrace Hausdorff distance {hd:.3e}");
        assert!(hd < 1e-6 * p.scale());
    }

    #[test]
    fn critical_graph_topology_reference_parameter() {
        let p = param(-3.0, 2.0);
        let g = build_critical_graph(&p).unwrap();
        assert_eq!(g.gamma.terminal, Terminal::AtZero(ZeroId::ZetaPlus));
        assert!(matches!(g.sigma0.terminal, Terminal::AtOrigin { .. }));
        assert_eq!(g.sigma_minus.terminal, Terminal::AtInfinity(InfinityDirection::MinusImag));
        assert_eq!(g.sigma_up.terminal, Terminal::AtInfinity(InfinityDirection::PlusImag));
        assert_eq!(g.sigma_down.terminal, Terminal::AtInfinity(InfinityDirection::MinusImag));
        // generic A spirals into the origin: winding is nonzero
        if let Terminal::AtOrigin { winding } = g.sigma0.terminal {
            println!("σ₀ winding: {winding}");
            assert!(winding != 0);
        }
    }

    #[test]
    fn faces_of_reference_parameter() {
        let p = param(-3.0, 2.0);
        let g = build_critical_graph(&p).unwrap();
        // far west: Ω₊
        assert_eq!(g.face(c(-30.0, 1.0)).unwrap(), Face::OmegaPlus);
        // far east: Ω₋⁽²⁾
        assert_eq!(g.face(c(40.0, 0.5)).unwrap(), Face::OmegaMinusTwo);
        // near the origin (inside the strip face): Ω₋⁽¹⁾
        assert_eq!(g.face(c(0.02, -0.015)).unwrap(), Face::OmegaMinusOne);
        // straddle γ's midpoint
        let mid_idx = g.gamma.points.len() / 2;
        let zm = g.gamma.points[mid_idx];
        let tangent = {
            let a = g.gamma.points[mid_idx - 1];
            let b = g.gamma.points[mid_idx + 1];
            (b - a) / (b - a).norm()
        };
        let n = c(0.0, 1.0) * tangent;
        let off = 0.05 * p.scale();
        let left = g.face(zm + off * n).unwrap();
        let right = g.face(zm - off * n).unwrap();
        assert_ne!(left, right);
        assert!(matches!(
            (left, right),
            (Face::OmegaPlus, Face::OmegaMinusOne) | (Face::OmegaMinusOne, Face::OmegaPlus)
        ));
        // on-arc query errors
        assert!(matches!(g.face(zm), Err(CoreError::OnCut(_))));
    }

    #[test]
    fn graph_terminals_other_acceptance_parameters() {
        for (re, im) in [(1.0, 1.0), (0.0, 4.0), (-2.0, 1.0)] {
            let p = param(re, im);
            let g = build_critical_graph(&p).unwrap();
            assert_eq!(g.gamma.terminal, Terminal::AtZero(ZeroId::ZetaPlus), "A={re}+{im}i");
            assert!(matches!(g.sigma0.terminal, Terminal::AtOrigin { .. }), "A={re}+{im}i");
            assert_eq!(
                g.sigma_minus.terminal,
                Terminal::AtInfinity(InfinityDirection::MinusImag),
                "A={re}+{im}i"
            );
            assert_eq!(g.sigma_up.terminal, Terminal::AtInfinity(InfinityDirection::PlusImag));
            assert_eq!(g.sigma_down.terminal, Terminal::AtInfinity(InfinityDirection::MinusImag));
        }
    }

    #[test]
    fn purely_imaginary_parameter_has_radial_sigma0() {
        // Re A = 0: near the origin the level of Re(R(0)·log z) is radial:
        // σ₀ approaches with negligible winding
        let p = param(0.0, 4.0);
        let g = build_critical_graph(&p).unwrap();
        if let Terminal::AtOrigin { winding } = g.sigma0.terminal {
            println!("A=4i σ₀ winding {winding}");
            assert!(winding.abs() <= 1);
        } else {
            panic!("σ₀ must end at the origin");
        }
    }

    #[test]
    fn homotopy_classes_of_synthetic_arcs() {
        let p = param(-3.0, 2.0);
        // bent arc through the west: same class as the segment
        let arc1 = vec![p.zeta_minus, c(-4.0, 1.0), p.zeta_plus];
        assert_eq!(homotopy_class(&arc1, &p).unwrap(), HomotopyClass::FA);
        // arc detouring around the origin through the east: complementary
        let arc2 = vec![
            p.zeta_minus,
            c(1.5, -1.5),
            c(2.5, 1.0),
            c(0.5, 2.0),
            p.zeta_plus,
        ];
        // winding of arc2·seg⁻¹ around 0 is ±1 exactly when the closed loop
        // encloses the origin; this one does
        assert_eq!(homotopy_class(&arc2, &p).unwrap(), HomotopyClass::Complement);
        // arc through the origin is rejected
        let arc3 = vec![p.zeta_minus, c(0.0, 0.0), p.zeta_plus];
        assert!(matches!(homotopy_class(&arc3, &p), Err(CoreError::ArcThroughOrigin)));
    }

    #[test]
    fn orthogonal_graph_generic_and_boundary() {
        let p = param(-3.0, 2.0);
        let og = orthogonal_critical_graph(&p).unwrap();
        assert!(!og.boundary_case);
        assert_eq!(og.arcs_minus.len() + og.arcs_plus.len(), 6);
        let pr = param(3.0, 0.0);
        let ogr = orthogonal_critical_graph(&pr).unwrap();
        assert!(ogr.boundary_case);
    }
}
