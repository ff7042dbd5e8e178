//! Gauss–Legendre quadrature: node generation, straight-segment and polyline
//! integration, adaptive bisection, and square-root endpoint panels via the
//! u² substitution.

use std::sync::OnceLock;

use num_complex::Complex64;

/// Gauss–Legendre nodes and weights on (−1, 1), by Newton iteration on the
/// Legendre polynomial from the Chebyshev initial guess.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // initial guess: Chebyshev angle
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and P_n' by the three-term recurrence
            let mut p0 = 1.0f64;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static GL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    GL.get_or_init(|| gauss_legendre(16))
}

fn gl32() -> &'static (Vec<f64>, Vec<f64>) {
    static GL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    GL.get_or_init(|| gauss_legendre(32))
}

/// ∫ f over the straight segment [a, b] with a fixed 16-point rule.
pub fn gl16_segment<F: FnMut(Complex64) -> Complex64>(mut f: F, a: Complex64, b: Complex64) -> Complex64 {
    let (x, w) = gl16();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = Complex64::new(0.0, 0.0);
    for (&xi, &wi) in x.iter().zip(w) {
        acc += wi * f(mid + xi * half);
    }
    acc * half
}

/// ∫ f over [a, b] with a fixed 32-point rule.
pub fn gl32_segment<F: FnMut(Complex64) -> Complex64>(mut f: F, a: Complex64, b: Complex64) -> Complex64 {
    let (x, w) = gl32();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = Complex64::new(0.0, 0.0);
    for (&xi, &wi) in x.iter().zip(w) {
        acc += wi * f(mid + xi * half);
    }
    acc * half
}

/// Adaptive ∫ f over [a, b]: bisect until the 16- vs 32-point estimates agree
/// to `tol` (absolute, relative to the accumulated magnitude).
pub fn adaptive_segment<F: FnMut(Complex64) -> Complex64>(
    f: &mut F,
    a: Complex64,
    b: Complex64,
    tol: f64,
    max_depth: u32,
) -> Complex64 {
    fn rec<F: FnMut(Complex64) -> Complex64>(
        f: &mut F,
        a: Complex64,
        b: Complex64,
        tol: f64,
        depth: u32,
    ) -> Complex64 {
        let coarse = gl16_segment(&mut *f, a, b);
        let fine = gl32_segment(&mut *f, a, b);
        let err = (fine - coarse).norm();
        if err <= tol * (1.0 + fine.norm()) || depth == 0 {
            return fine;
        }
        let mid = 0.5 * (a + b);
        rec(f, a, mid, tol * 0.7, depth - 1) + rec(f, mid, b, tol * 0.7, depth - 1)
    }
    rec(f, a, b, tol, max_depth)
}

/// Adaptive ∫ f along a polyline path.
pub fn adaptive_path<F: FnMut(Complex64) -> Complex64>(
    f: &mut F,
    path: &[Complex64],
    tol: f64,
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for w in path.windows(2) {
        acc += adaptive_segment(f, w[0], w[1], tol, 24);
    }
    acc
}

/// ∫_ζ^{z1} f(t) dt along the straight segment, where f has an integrable
/// square-root behavior at ζ: substitutes t = ζ + (z1−ζ)u², which turns
/// f ~ √(t−ζ)·smooth into u²·smooth. `n` points per panel, `panels` panels
/// graded geometrically toward u = 0.
pub fn sqrt_endpoint_segment<F: FnMut(Complex64) -> Complex64>(
    f: &mut F,
    zeta: Complex64,
    z1: Complex64,
    panels: usize,
) -> Complex64 {
    let e = z1 - zeta;
    let (x, w) = gl16();
    let mut acc = Complex64::new(0.0, 0.0);
    // panel boundaries in u: geometric refinement toward 0
    let mut bounds = Vec::with_capacity(panels + 1);
    bounds.push(0.0f64);
    for k in (0..panels).rev() {
        bounds.push(0.5f64.powi(k as i32));
    }
    for pb in bounds.windows(2) {
        let (u0, u1) = (pb[0], pb[1]);
        let mid = 0.5 * (u0 + u1);
        let half = 0.5 * (u1 - u0);
        for (&xi, &wi) in x.iter().zip(w) {
            let u = mid + xi * half;
            let t = zeta + e * (u * u);
            acc += wi * half * f(t) * 2.0 * u * e;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn nodes_integrate_polynomials_exactly() {
        let (x, w) = gauss_legendre(16);
        assert_eq!(x.len(), 16);
        // ∫_{-1}^{1} x^k dx for k up to 2n−1 = 31
        for k in 0..=31usize {
            let num: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.powi(k as i32)).sum();
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((num - exact).abs() < 2e-14, "k={k}: {num} vs {exact}");
        }
        let wsum: f64 = w.iter().sum();
        assert!((wsum - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_oscillation() {
        // ∫_0^{2π} e^{i·20·t} dt = 0 along the real axis
        let mut f = |t: Complex64| (Complex64::new(0.0, 20.0) * t).exp();
        let v = adaptive_segment(&mut f, c(0.0, 0.0), c(std::f64::consts::TAU, 0.0), 1e-12, 24);
        assert!(v.norm() < 1e-11, "|∫| = {}", v.norm());
    }

    #[test]
    fn path_integral_of_one_over_z() {
        // ∮ dz/z over a square around the origin = 2πi
        let sq = [c(1.0, -1.0), c(1.0, 1.0), c(-1.0, 1.0), c(-1.0, -1.0), c(1.0, -1.0)];
        let mut f = |z: Complex64| 1.0 / z;
        let v = adaptive_path(&mut f, &sq, 1e-13);
        assert!((v - c(0.0, std::f64::consts::TAU)).norm() < 1e-11, "got {v}");
    }

    #[test]
    fn sqrt_panel_integrates_root_singularity() {
        // ∫_0^1 √t dt = 2/3, with integrand √t evaluated as principal sqrt
        let mut f = |t: Complex64| t.sqrt();
        let v = sqrt_endpoint_segment(&mut f, c(0.0, 0.0), c(1.0, 0.0), 6);
        assert!((v - c(2.0 / 3.0, 0.0)).norm() < 1e-13, "got {v}");
        // rotated endpoint: ∫ √(t−ζ) dt from ζ to ζ+e = (2/3)e^{3/2}
        let zeta = c(0.3, 0.7);
        let e = c(-1.1, 0.4);
        let mut g = |t: Complex64| (t - zeta).sqrt();
        let v = sqrt_endpoint_segment(&mut g, zeta, zeta + e, 6);
        let exact = 2.0 / 3.0 * e * e.sqrt();
        assert!((v - exact).norm() < 1e-12 * exact.norm(), "got {v} vs {exact}");
    }
}
