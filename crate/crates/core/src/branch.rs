//! The square root R(z) of D_A(z) = (z−A)² − 4z as a global object: a
//! single-valued branch off a prescribed cut ζ− → ζ+, its derivative, and the
//! closed-form antiderivative of R(t)/t with branch bookkeeping along paths.

use num_complex::Complex64;

use crate::error::CoreError;
use crate::geom::{nearest_on_polyline, winding_number};
use crate::param::Parameter;
use crate::Result;

/// A branch choice of R at a point: R(base_point) = sqrt_value with
/// sqrt_value² = D(base_point).
#[derive(Debug, Clone, Copy)]
pub struct BranchState {
    pub base_point: Complex64,
    pub sqrt_value: Complex64,
}

/// Exclusion radius around 0 and ζ± for integration paths.
pub fn singularity_tol(p: &Parameter) -> f64 {
    1e-8 * (1.0 + (p.zeta_plus - p.zeta_minus).norm())
}

/// The branch of √D cut along the straight segment [ζ−, ζ+], normalized to
/// R(z) ~ z at infinity: with u = (z−m)/h mapping the segment to [−1,1],
/// R = h·√(u−1)·√(u+1) with principal roots in each factor.
pub fn r_seg(p: &Parameter, z: Complex64) -> Complex64 {
    let m = 0.5 * (p.zeta_plus + p.zeta_minus);
    let h = 0.5 * (p.zeta_plus - p.zeta_minus);
    let u = (z - m) / h;
    h * (u - 1.0).sqrt() * (u + 1.0).sqrt()
}

/// The branch of √D cut along an arbitrary polyline `cut` from ζ− to ζ+,
/// normalized to R ~ z at infinity. Implemented as R_seg with the sign flipped
/// inside the region swept between the cut and the straight segment (odd
/// winding of the closed loop cut + reversed segment).
///
/// Fails with OnCut when z is within 1e−11·scale of the cut.
pub fn r_global(p: &Parameter, z: Complex64, cut: &[Complex64]) -> Result<Complex64> {
    let near = nearest_on_polyline(cut, z);
    if near.dist < 1e-11 * p.scale() {
        return Err(CoreError::OnCut(z));
    }
    Ok(r_global_unchecked(p, z, cut))
}

/// Same as [`r_global`] without the on-cut guard (callers that already know
/// their points are off the cut, e.g. quadrature nodes of a vetted path).
pub fn r_global_unchecked(p: &Parameter, z: Complex64, cut: &[Complex64]) -> Complex64 {
    let base = r_seg(p, z);
    if flip_parity(p, z, cut) {
        -base
    } else {
        base
    }
}

/// True when r_global = −R_seg at z for this cut.
fn flip_parity(p: &Parameter, z: Complex64, cut: &[Complex64]) -> bool {
    // loop: cut followed by the straight segment back (implicit closure in
    // winding_number). Orient the cut ζ− → ζ+; both orientations give the
    // same parity.
    let _ = p;
    let w = winding_loop(cut, z);
    w.rem_euclid(2) == 1
}

fn winding_loop(cut: &[Complex64], z: Complex64) -> i32 {
    // winding of (cut + straight return edge) around z
    winding_number(cut, z)
}

/// R′(z) = (z − A − 2)/R(z) on the same branch as [`r_global`].
///
/// Fails with AtBranchPoint within 1e−8·(1+|ζ+−ζ−|) of either ζ±.
pub fn r_prime(p: &Parameter, z: Complex64, cut: &[Complex64]) -> Result<Complex64> {
    let tol = singularity_tol(p);
    if (z - p.zeta_plus).norm() < tol {
        return Err(CoreError::AtBranchPoint(p.zeta_plus));
    }
    if (z - p.zeta_minus).norm() < tol {
        return Err(CoreError::AtBranchPoint(p.zeta_minus));
    }
    let r = r_global(p, z, cut)?;
    Ok((z - p.a - 2.0) / r)
}

/// Internal continued state of the closed-form antiderivative
/// W(t) = R − (A+2)·L₁ − A·L₂ with
/// L₁ = log(2R + 2t − 2(A+2)) and L₂ = log((2A² − 2(A+2)t + 2AR)/t),
/// both logs continued along the path.
#[derive(Clone, Copy)]
struct WState {
    t: Complex64,
    r: Complex64,
    /// raw argument of L₁ and its continued log
    arg1: Complex64,
    l1: Complex64,
    arg2: Complex64,
    l2: Complex64,
}

impl WState {
    fn seed(p: &Parameter, t: Complex64, r: Complex64) -> Self {
        let (a1, a2) = w_log_args(p, t, r);
        WState { t, r, arg1: a1, l1: a1.ln(), arg2: a2, l2: a2.ln() }
    }

    fn value(&self, p: &Parameter) -> Complex64 {
        self.r - (p.a + 2.0) * self.l1 - p.a * self.l2
    }
}

fn w_log_args(p: &Parameter, t: Complex64, r: Complex64) -> (Complex64, Complex64) {
    let a = p.a;
    let a1 = 2.0 * r + 2.0 * t - 2.0 * (a + 2.0);
    let a2 = (2.0 * a * a - 2.0 * (a + 2.0) * t + 2.0 * a * r) / t;
    (a1, a2)
}

/// ∫ R(t)/t dt along `path` (a polyline from z0 to z1), with the branch of R
/// continued from `branch` at z0. Evaluated through the elementary
/// antiderivative with per-segment argument continuation of its logarithms;
/// segments are bisected until both log arguments rotate by less than π/2 and
/// the square-root continuation is unambiguous.
pub fn antiderivative_w(
    p: &Parameter,
    z0: Complex64,
    z1: Complex64,
    path: &[Complex64],
    branch: BranchState,
) -> Result<Complex64> {
    let (value, _end) = antiderivative_w_chained(p, z0, z1, path, branch)?;
    Ok(value)
}

/// As [`antiderivative_w`], returning also the continued branch at z1 so
/// successive path legs can be chained.
pub fn antiderivative_w_chained(
    p: &Parameter,
    z0: Complex64,
    z1: Complex64,
    path: &[Complex64],
    branch: BranchState,
) -> Result<(Complex64, BranchState)> {
    assert!(path.len() >= 2, "path needs at least one segment");
    debug_assert!((path[0] - z0).norm() <= 1e-9 * p.scale(), "path must start at z0");
    debug_assert!((path[path.len() - 1] - z1).norm() <= 1e-9 * p.scale(), "path must end at z1");
    debug_assert!(
        (branch.base_point - z0).norm() <= 1e-9 * p.scale(),
        "branch state must be anchored at z0"
    );
    let tol = singularity_tol(p);
    check_path_clearance(p, path, tol)?;

    // seed: validate the provided square root against D
    let d0 = p.d(z0);
    let r0 = branch.sqrt_value;
    debug_assert!(
        (r0 * r0 - d0).norm() <= 1e-6 * (1.0 + d0.norm()),
        "branch state sqrt does not square to D"
    );

    let mut state = WState::seed(p, z0, r0);
    let w_start = state.value(p);
    for seg in path.windows(2) {
        state = continue_over_segment(p, state, seg[1], 0)?;
    }
    let w_end = state.value(p);
    Ok((
        w_end - w_start,
        BranchState { base_point: z1, sqrt_value: state.r },
    ))
}

fn check_path_clearance(p: &Parameter, path: &[Complex64], tol: f64) -> Result<()> {
    let sings = [Complex64::new(0.0, 0.0), p.zeta_minus, p.zeta_plus];
    for w in path.windows(2) {
        for &s in &sings {
            // distance from s to segment [w0, w1]
            let d = w[1] - w[0];
            let len2 = d.norm_sqr();
            let t = if len2 == 0.0 {
                0.0
            } else {
                (((s - w[0]).re * d.re + (s - w[0]).im * d.im) / len2).clamp(0.0, 1.0)
            };
            let dist = (s - (w[0] + t * d)).norm();
            if dist < tol {
                return Err(CoreError::PathTooCloseToSingularity { near: s, tol });
            }
        }
    }
    Ok(())
}

fn continue_over_segment(
    p: &Parameter,
    state: WState,
    target: Complex64,
    depth: u32,
) -> Result<WState> {
    if depth > 48 {
        return Err(CoreError::PathTooCloseToSingularity {
            near: state.t,
            tol: singularity_tol(p),
        });
    }
    // candidate square root at the target, continued by proximity
    let s = p.d(target).sqrt();
    let (r_next, ambiguous) = {
        let d_plus = (s - state.r).norm();
        let d_minus = (-s - state.r).norm();
        let pick = if d_plus <= d_minus { s } else { -s };
        let gap = (d_plus - d_minus).abs();
        (pick, gap < 0.2 * (state.r.norm() + s.norm()))
    };
    if !ambiguous {
        let (a1, a2) = w_log_args(p, target, r_next);
        let d1 = (a1 / state.arg1).ln();
        let d2 = (a2 / state.arg2).ln();
        if d1.im.abs() < std::f64::consts::FRAC_PI_2 && d2.im.abs() < std::f64::consts::FRAC_PI_2 {
            return Ok(WState {
                t: target,
                r: r_next,
                arg1: a1,
                l1: state.l1 + d1,
                arg2: a2,
                l2: state.l2 + d2,
            });
        }
    }
    let mid = 0.5 * (state.t + target);
    let half = continue_over_segment(p, state, mid, depth + 1)?;
    continue_over_segment(p, half, target, depth + 1)
}

/// Continues R along a path by plain stepping (no antiderivative): used by
/// quadrature-based validation and by tracers that need R at a far point.
pub fn continue_r_along(
    p: &Parameter,
    path: &[Complex64],
    branch: BranchState,
) -> Result<BranchState> {
    let mut cur = branch;
    for seg in path.windows(2) {
        cur = continue_r_segment(p, cur, seg[1], 0)?;
    }
    Ok(cur)
}

fn continue_r_segment(
    p: &Parameter,
    cur: BranchState,
    target: Complex64,
    depth: u32,
) -> Result<BranchState> {
    if depth > 48 {
        return Err(CoreError::PathTooCloseToSingularity {
            near: cur.base_point,
            tol: singularity_tol(p),
        });
    }
    let s = p.d(target).sqrt();
    let d_plus = (s - cur.sqrt_value).norm();
    let d_minus = (-s - cur.sqrt_value).norm();
    let pick = if d_plus <= d_minus { s } else { -s };
    let gap = (d_plus - d_minus).abs();
    if gap >= 0.2 * (cur.sqrt_value.norm() + s.norm()) {
        return Ok(BranchState { base_point: target, sqrt_value: pick });
    }
    let mid = 0.5 * (cur.base_point + target);
    let half = continue_r_segment(p, cur, mid, depth + 1)?;
    continue_r_segment(p, half, target, depth + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::gl32_segment;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn param(re: f64, im: f64) -> Parameter {
        Parameter::new(c(re, im)).unwrap()
    }

    /// Independent oracle: ∫ R/t dt by plain quadrature with stepped branch
    /// continuation (no closed form involved).
    fn quad_w(p: &Parameter, path: &[Complex64], branch: BranchState) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        let mut cur = branch;
        for seg in path.windows(2) {
            // split the segment fine enough that R barely turns per piece
            let len = (seg[1] - seg[0]).norm();
            let steps = ((len / 0.01).ceil() as usize).max(4);
            for k in 0..steps {
                let a = seg[0] + (seg[1] - seg[0]) * (k as f64 / steps as f64);
                let b = seg[0] + (seg[1] - seg[0]) * ((k + 1) as f64 / steps as f64);
                let rs = cur.sqrt_value;
                total += gl32_segment(
                    |t| {
                        let s = p.d(t).sqrt();
                        let r = if (s - rs).norm() <= (-s - rs).norm() { s } else { -s };
                        r / t
                    },
                    a,
                    b,
                );
                cur = continue_r_along(p, &[a, b], cur).unwrap();
            }
        }
        total
    }

    #[test]
    fn r_seg_squares_to_d() {
        for p in [param(-3.0, 2.0), param(1.0, 1.0), param(0.0, 4.0), param(3.0, 0.0)] {
            for k in 0..60 {
                let th = 0.11 * k as f64;
                let z = c(4.0 * th.cos() + 0.3, 3.7 * th.sin() - 0.2);
                let r = r_seg(&p, z);
                let d = p.d(z);
                assert!(
                    (r * r - d).norm() <= 1e-12 * (1.0 + d.norm()),
                    "A={} z={z}: R²−D = {}",
                    p.a,
                    (r * r - d).norm()
                );
            }
        }
    }

    #[test]
    fn r_seg_normalized_at_infinity() {
        for p in [param(-3.0, 2.0), param(1.0, 1.0), param(0.0, 4.0)] {
            for &z in &[c(1e6, 0.3), c(-1e6, 1e5), c(200.0, -9e5)] {
                let ratio = r_seg(&p, z) / z;
                assert!((ratio - 1.0).norm() < 1e-4, "R/z = {ratio}");
            }
        }
    }

    #[test]
    fn r_seg_at_origin_is_minus_a_for_reference_parameter() {
        // for A = −3+2i the straight segment [ζ−,ζ+] misses ℝ₊, and the
        // segment branch takes the value −A at the origin
        let p = param(-3.0, 2.0);
        let r0 = r_seg(&p, c(0.0, 0.0));
        assert!((r0 + p.a).norm() < 1e-12, "R(0) = {r0}, −A = {}", -p.a);
    }

    #[test]
    fn r_global_flips_across_cut_only() {
        let p = param(-3.0, 2.0);
        // a bent cut ζ− → waypoint → ζ+ that detours west
        let way = c(-6.0, 2.0);
        let cut = vec![p.zeta_minus, way, p.zeta_plus];
        // continuous across the straight segment (midpoint of [ζ−,ζ+])
        let mid = 0.5 * (p.zeta_minus + p.zeta_plus);
        let n = {
            let d = (p.zeta_plus - p.zeta_minus) / (p.zeta_plus - p.zeta_minus).norm();
            Complex64::new(0.0, 1.0) * d
        };
        let eps = 1e-6;
        let above = r_global(&p, mid + eps * n, &cut).unwrap();
        let below = r_global(&p, mid - eps * n, &cut).unwrap();
        assert!((above - below).norm() < 1e-4 * above.norm(), "jump across segment: {above} vs {below}");
        // discontinuous (sign flip) across the cut's waypoint leg
        let leg_mid = 0.5 * (p.zeta_minus + way);
        let dir = (way - p.zeta_minus) / (way - p.zeta_minus).norm();
        let nn = Complex64::new(0.0, 1.0) * dir;
        let l = r_global(&p, leg_mid + eps * nn, &cut).unwrap();
        let r = r_global(&p, leg_mid - eps * nn, &cut).unwrap();
        assert!((l + r).norm() < 1e-4 * l.norm(), "no flip across cut: {l} vs {r}");
        // on-cut query errors
        assert!(matches!(r_global(&p, leg_mid, &cut), Err(CoreError::OnCut(_))));
    }

    #[test]
    fn r_prime_matches_finite_differences() {
        let p = param(-3.0, 2.0);
        let cut = vec![p.zeta_minus, p.zeta_plus];
        let h = 1e-6;
        for &z in &[c(3.0, -2.0), c(-4.0, 4.0), c(1.0, 7.0), c(8.0, 1.0)] {
            let d = (r_global(&p, z + c(h, 0.0), &cut).unwrap()
                - r_global(&p, z - c(h, 0.0), &cut).unwrap())
                / (2.0 * h);
            let rp = r_prime(&p, z, &cut).unwrap();
            assert!((d - rp).norm() < 1e-8 * (1.0 + rp.norm()), "z={z}: fd {d} vs {rp}");
        }
        assert!(matches!(
            r_prime(&p, p.zeta_plus, &cut),
            Err(CoreError::AtBranchPoint(_))
        ));
    }

    #[test]
    fn antiderivative_matches_quadrature_on_open_path() {
        let p = param(-3.0, 2.0);
        let path = vec![c(2.0, -3.0), c(4.0, 0.5), c(-1.0, 4.0), c(-5.0, -2.0)];
        let branch = BranchState { base_point: path[0], sqrt_value: r_seg(&p, path[0]) };
        let closed = antiderivative_w(&p, path[0], path[3], &path, branch).unwrap();
        let oracle = quad_w(&p, &path, branch);
        println!("closed form {closed} vs quadrature {oracle}");
        assert!((closed - oracle).norm() < 1e-9 * (1.0 + oracle.norm()));
    }

    #[test]
    fn contractible_loop_integrates_to_zero() {
        let p = param(1.0, 1.0);
        let z0 = c(8.0, -4.0);
        let lp = vec![z0, c(10.0, -1.0), c(9.0, -6.0), z0];
        let branch = BranchState { base_point: z0, sqrt_value: r_seg(&p, z0) };
        let v = antiderivative_w(&p, z0, z0, &lp, branch).unwrap();
        assert!(v.norm() < 1e-10, "∮ = {v}");
    }

    #[test]
    fn loop_around_origin_picks_up_residue() {
        let p = param(-3.0, 2.0);
        let r = 0.5;
        let z0 = c(r, 0.0);
        let mut lp: Vec<Complex64> = (0..=48)
            .map(|k| {
                let th = std::f64::consts::TAU * k as f64 / 48.0;
                c(r * th.cos(), r * th.sin())
            })
            .collect();
        lp[48] = z0;
        let branch = BranchState { base_point: z0, sqrt_value: r_seg(&p, z0) };
        let v = antiderivative_w(&p, z0, z0, &lp, branch).unwrap();
        // residue of R/t at 0 is R(0) = ±A on this branch: here R_seg(0) = −A
        let expected = Complex64::new(0.0, std::f64::consts::TAU) * (-p.a);
        println!("∮ around 0 = {v}, expected {expected}");
        assert!((v - expected).norm() < 1e-9);
        let oracle = quad_w(&p, &lp, branch);
        assert!((v - oracle).norm() < 1e-9);
    }

    #[test]
    fn big_circle_sees_coefficient_a_plus_two() {
        let p = param(-3.0, 2.0);
        let rad = 120.0;
        let z0 = c(rad, 0.0);
        let mut lp: Vec<Complex64> = (0..=96)
            .map(|k| {
                let th = std::f64::consts::TAU * k as f64 / 96.0;
                c(rad * th.cos(), rad * th.sin())
            })
            .collect();
        lp[96] = z0;
        let branch = BranchState { base_point: z0, sqrt_value: r_seg(&p, z0) };
        let v = antiderivative_w(&p, z0, z0, &lp, branch).unwrap();
        // ∮ (1 − (A+2)/t + O(t⁻²)) dt = −2πi(A+2), exactly once the Laurent
        // series converges on the circle
        let expected = -Complex64::new(0.0, std::f64::consts::TAU) * (p.a + 2.0);
        assert!((v - expected).norm() < 1e-8, "got {v}, expected {expected}");
    }

    #[test]
    fn tight_loop_around_segment_cut() {
        // two-sided loop around the straight cut [ζ−,ζ+] for A=1+i:
        // ∮ = ∮_∞ − 2πi·R(0) = −2πi(A+2) − 2πi·r(0)
        let p = param(1.0, 1.0);
        let dir = (p.zeta_plus - p.zeta_minus) / (p.zeta_plus - p.zeta_minus).norm();
        let n = Complex64::new(0.0, 1.0) * dir;
        let off = 0.15;
        let ext = 0.25;
        let a0 = p.zeta_minus - ext * dir + off * n;
        let a1 = p.zeta_plus + ext * dir + off * n;
        let b1 = p.zeta_plus + ext * dir - off * n;
        let b0 = p.zeta_minus - ext * dir - off * n;
        // counterclockwise: upper-left → lower-left → lower-right → upper-right
        let lp = vec![a0, b0, b1, a1, a0];
        let branch = BranchState { base_point: a0, sqrt_value: r_seg(&p, a0) };
        let v = antiderivative_w(&p, a0, a0, &lp, branch).unwrap();
        let r0 = r_seg(&p, c(0.0, 0.0)); // loop keeps 0 outside for this A
        let expected = -Complex64::new(0.0, std::f64::consts::TAU) * (p.a + 2.0 + r0);
        println!("two-sided loop {v}, expected {expected}");
        assert!((v - expected).norm() < 1e-8);
        let oracle = quad_w(&p, &lp, branch);
        assert!((v - oracle).norm() < 1e-8);
    }
}
