use num_complex::Complex64;

use crate::error::CoreError;
use crate::Result;

/// Tolerance below which A is treated as one of the degenerate values {0, −1}.
const DEGENERATE_TOL: f64 = 1e-12;

/// The parameter A of the differential ϖ_A = −D_A(z)/z² dz², together with the
/// two zeros of D_A(z) = (z−A)² − 4z.
///
/// Construction normalizes to Im A ≥ 0 (the lower half-plane reduces to the
/// upper one by conjugating every geometric object); `conjugated` records that
/// the caller's A was below the axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parameter {
    pub a: Complex64,
    pub zeta_minus: Complex64,
    pub zeta_plus: Complex64,
    pub conjugated: bool,
}

/// Square root of w with the branch fixed in the closed upper half-plane:
/// principal for Im w ≠ 0 or w ≥ 0, and the upper boundary value i√|w| on the
/// negative real axis.
pub fn sqrt_upper(w: Complex64) -> Complex64 {
    if w.im == 0.0 && w.re < 0.0 {
        Complex64::new(0.0, (-w.re).sqrt())
    } else {
        let s = w.sqrt();
        if s.im < 0.0 || (s.im == 0.0 && s.re < 0.0) {
            -s
        } else {
            s
        }
    }
}

/// Builds the [`Parameter`] for a given A: the zeros ζ± = (1 ± √(A+1))² of
/// D_A, with √(A+1) in the closed upper half-plane.
///
/// Fails with [`CoreError::DegenerateParameter`] for A ∈ {0, −1}, where the
/// differential degenerates (a zero collides with the origin pole or the two
/// zeros collide).
pub fn zeros_of_d(a: Complex64) -> Result<Parameter> {
    if (a - Complex64::new(0.0, 0.0)).norm() < DEGENERATE_TOL
        || (a - Complex64::new(-1.0, 0.0)).norm() < DEGENERATE_TOL
    {
        return Err(CoreError::DegenerateParameter(a));
    }
    let conjugated = a.im < 0.0;
    let a_norm = if conjugated { a.conj() } else { a };
    let s = sqrt_upper(a_norm + 1.0);
    let two_s = 2.0 * s;
    // ζ± = A + 2 ± 2√(A+1); the expanded form avoids squaring error near s≈0.
    let zeta_plus = a_norm + 2.0 + two_s;
    let zeta_minus = a_norm + 2.0 - two_s;
    Ok(Parameter {
        a: a_norm,
        zeta_minus,
        zeta_plus,
        conjugated,
    })
}

impl Parameter {
    /// Shorthand for [`zeros_of_d`].
    pub fn new(a: Complex64) -> Result<Self> {
        zeros_of_d(a)
    }

    /// D_A(z) = (z−A)² − 4z.
    pub fn d(&self, z: Complex64) -> Complex64 {
        let t = z - self.a;
        t * t - 4.0 * z
    }

    /// D_A′(z) = 2(z − A − 2).
    pub fn d_prime(&self, z: Complex64) -> Complex64 {
        2.0 * (z - self.a - 2.0)
    }

    /// Geometric scale 1 + max(|A|, |ζ−|, |ζ+|); all radii/tolerance defaults
    /// are expressed in units of this.
    pub fn scale(&self) -> f64 {
        1.0 + self
            .a
            .norm()
            .max(self.zeta_minus.norm())
            .max(self.zeta_plus.norm())
    }

    /// True when A is real within tolerance (boundary cases for the graph).
    pub fn is_real(&self) -> bool {
        self.a.im.abs() < 1e-14 * (1.0 + self.a.re.abs())
    }

    /// Maps a caller-side point into the normalized (Im A ≥ 0) frame.
    pub fn to_normalized(&self, z: Complex64) -> Complex64 {
        if self.conjugated {
            z.conj()
        } else {
            z
        }
    }

    /// Maps a normalized-frame result back to the caller's frame.
    pub fn from_normalized(&self, z: Complex64) -> Complex64 {
        self.to_normalized(z)
    }
}

/// Half-plane locations of ζ± and the parabola predicate that decides when ζ−
/// drops below the real axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZeroLocationReport {
    pub zeta_plus_upper: bool,
    pub zeta_minus_upper: bool,
    /// (Im A)² < −4 Re A together with Im A > 0 — equivalent to ζ− lying in
    /// the open lower half-plane.
    pub parabola_predicate: bool,
}

/// Reports, for Im A ≥ 0, which half-plane each zero of D_A occupies.
pub fn classify_zero_location(p: &Parameter) -> ZeroLocationReport {
    let pred = p.a.im * p.a.im < -4.0 * p.a.re && p.a.im > 0.0;
    ZeroLocationReport {
        zeta_plus_upper: p.zeta_plus.im > 0.0,
        zeta_minus_upper: p.zeta_minus.im > 0.0,
        parabola_predicate: pred,
    }
}
