//! Thin complex-arithmetic layer over the arbitrary-precision backend.
//!
//! Everything the crate needs from multiprecision is here: complex add/mul/div,
//! square root, natural log of the modulus, and lossy conversion back to f64.
//! Precision is expressed in bits and carried inside each value; the digit
//! ladder used by the Laguerre evaluator converts via [`digits_to_bits`].

use std::cell::RefCell;

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_complex::Complex64;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

/// Decimal digits → mantissa bits, with guard bits.
pub fn digits_to_bits(digits: usize) -> usize {
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + 32
}

/// Lossy conversion to f64 via the top mantissa words.
pub fn bf_to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf() {
        return if x.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY };
    }
    let Some((m, _p, sign, e, _inexact)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    if m.is_empty() {
        return 0.0;
    }
    // mantissa is little-endian and left-aligned: value = (m/2^(64·len))·2^e
    let top = m[m.len() - 1] as f64;
    let next = if m.len() >= 2 { m[m.len() - 2] as f64 } else { 0.0 };
    let sgn = if sign == Sign::Neg { -1.0 } else { 1.0 };
    let e = e as i32;
    sgn * (top * (e - 64).exp2_f64() + next * (e - 128).exp2_f64())
}

trait Exp2F64 {
    fn exp2_f64(self) -> f64;
}
impl Exp2F64 for i32 {
    fn exp2_f64(self) -> f64 {
        // avoid powi overflow panics at extreme exponents
        if self < -1074 {
            0.0
        } else if self > 1023 {
            f64::INFINITY
        } else {
            (self as f64).exp2()
        }
    }
}

pub fn bf_ln(x: &BigFloat, p: usize) -> BigFloat {
    CONSTS.with(|c| x.ln(p, RM, &mut c.borrow_mut()))
}

pub fn bf_exp(x: &BigFloat, p: usize) -> BigFloat {
    CONSTS.with(|c| x.exp(p, RM, &mut c.borrow_mut()))
}

/// Complex number with both components at the same precision.
#[derive(Debug, Clone)]
pub struct MpC {
    pub re: BigFloat,
    pub im: BigFloat,
}

impl MpC {
    pub fn new(re: BigFloat, im: BigFloat) -> Self {
        Self { re, im }
    }

    pub fn from_c64(z: Complex64, p: usize) -> Self {
        mpc_from_f64(z.re, z.im, p)
    }

    pub fn zero(p: usize) -> Self {
        mpc_from_f64(0.0, 0.0, p)
    }

    pub fn add(&self, rhs: &Self, p: usize) -> Self {
        Self::new(self.re.add(&rhs.re, p, RM), self.im.add(&rhs.im, p, RM))
    }

    pub fn sub(&self, rhs: &Self, p: usize) -> Self {
        Self::new(self.re.sub(&rhs.re, p, RM), self.im.sub(&rhs.im, p, RM))
    }

    pub fn mul(&self, rhs: &Self, p: usize) -> Self {
        let ac = self.re.mul(&rhs.re, p, RM);
        let bd = self.im.mul(&rhs.im, p, RM);
        let ad = self.re.mul(&rhs.im, p, RM);
        let bc = self.im.mul(&rhs.re, p, RM);
        Self::new(ac.sub(&bd, p, RM), ad.add(&bc, p, RM))
    }

    pub fn div(&self, rhs: &Self, p: usize) -> Self {
        let n = rhs.norm_sqr(p);
        let ac = self.re.mul(&rhs.re, p, RM);
        let bd = self.im.mul(&rhs.im, p, RM);
        let bc = self.im.mul(&rhs.re, p, RM);
        let ad = self.re.mul(&rhs.im, p, RM);
        Self::new(
            ac.add(&bd, p, RM).div(&n, p, RM),
            bc.sub(&ad, p, RM).div(&n, p, RM),
        )
    }

    pub fn neg(&self) -> Self {
        Self::new(self.re.neg(), self.im.neg())
    }

    pub fn scale(&self, k: f64, p: usize) -> Self {
        let kb = BigFloat::from_f64(k, p);
        Self::new(self.re.mul(&kb, p, RM), self.im.mul(&kb, p, RM))
    }

    pub fn norm_sqr(&self, p: usize) -> BigFloat {
        let rr = self.re.mul(&self.re, p, RM);
        let ii = self.im.mul(&self.im, p, RM);
        rr.add(&ii, p, RM)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// ln|z|, in multiprecision (½·ln(re²+im²)).
    pub fn ln_abs(&self, p: usize) -> BigFloat {
        let half = BigFloat::from_f64(0.5, p);
        bf_ln(&self.norm_sqr(p), p).mul(&half, p, RM)
    }

    /// arg z computed in f64 after a common power-of-two rescale (the argument
    /// is scale-invariant, so the top mantissa words suffice).
    pub fn arg_f64(&self) -> f64 {
        fn parts(x: &BigFloat) -> Option<(f64, i32)> {
            if x.is_zero() {
                return Some((0.0, 0));
            }
            let (m, _p, sign, e, _) = x.as_raw_parts()?;
            if m.is_empty() {
                return Some((0.0, 0));
            }
            let top = m[m.len() - 1] as f64;
            let next = if m.len() >= 2 { m[m.len() - 2] as f64 } else { 0.0 };
            let sgn = if sign == Sign::Neg { -1.0 } else { 1.0 };
            Some((sgn * (top + next * (2f64).powi(-64)), e as i32))
        }
        let (mr, er) = parts(&self.re).unwrap_or((f64::NAN, 0));
        let (mi, ei) = parts(&self.im).unwrap_or((f64::NAN, 0));
        if mr == 0.0 && mi == 0.0 {
            return 0.0;
        }
        // align exponents relative to the larger one
        let e0 = er.max(ei);
        let sr = mr * (er - e0).max(-200).exp2_f64();
        let si = mi * (ei - e0).max(-200).exp2_f64();
        si.atan2(sr)
    }

    /// Complex logarithm of `self`, as an f64 pair (ln|z|, arg z). The modulus
    /// log is computed in multiprecision, so huge/tiny values are fine.
    pub fn log_c64(&self, p: usize) -> Complex64 {
        Complex64::new(bf_to_f64(&self.ln_abs(p)), self.arg_f64())
    }
}

pub fn mpc_from_f64(re: f64, im: f64, p: usize) -> MpC {
    MpC::new(BigFloat::from_f64(re, p), BigFloat::from_f64(im, p))
}

pub fn mpc_to_c64(z: &MpC) -> Complex64 {
    Complex64::new(bf_to_f64(&z.re), bf_to_f64(&z.im))
}

/// Principal complex square root in multiprecision.
pub fn mpc_sqrt(z: &MpC, p: usize) -> MpC {
    if z.is_zero() {
        return MpC::zero(p);
    }
    let half = BigFloat::from_f64(0.5, p);
    let r = z.norm_sqr(p).sqrt(p, RM);
    let re_abs = z.re.abs();
    let w = r.add(&re_abs, p, RM).mul(&half, p, RM).sqrt(p, RM);
    let re_nonneg = !z.re.is_negative();
    let im_neg = z.im.is_negative();
    if re_nonneg {
        // (w, im/(2w))
        let two_w = w.add(&w, p, RM);
        MpC::new(w.clone(), z.im.div(&two_w, p, RM))
    } else {
        // (|im|/(2w), ±w)
        let two_w = w.add(&w, p, RM);
        let u = z.im.abs().div(&two_w, p, RM);
        let v = if im_neg { w.neg() } else { w };
        MpC::new(u, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_round_trip() {
        let p = 192;
        for &v in &[0.0, 1.0, -1.5, 3.141592653589793, 1e-12, -2.25e10] {
            let b = BigFloat::from_f64(v, p);
            assert_eq!(bf_to_f64(&b), v, "round trip of {v}");
        }
    }

    #[test]
    fn complex_field_ops() {
        let p = 192;
        let a = mpc_from_f64(1.5, -2.0, p);
        let b = mpc_from_f64(-0.25, 3.0, p);
        let prod = a.mul(&b, p);
        let back = prod.div(&b, p);
        let z = mpc_to_c64(&back);
        assert!((z - Complex64::new(1.5, -2.0)).norm() < 1e-30);
        let expected = Complex64::new(1.5, -2.0) * Complex64::new(-0.25, 3.0);
        assert!((mpc_to_c64(&prod) - expected).norm() < 1e-14);
    }

    #[test]
    fn log_of_huge_value() {
        let p = 256;
        // (1+i)^512: |z| = 2^256, arg = π/4·512 ≡ 0 (mod 2π)
        let mut z = mpc_from_f64(1.0, 1.0, p);
        for _ in 0..9 {
            z = z.mul(&z, p);
        }
        let lg = z.log_c64(p);
        let expect_ln = 256.0 * std::f64::consts::LN_2;
        assert!((lg.re - expect_ln).abs() < 1e-9 * expect_ln);
        let wrapped = (lg.im / (2.0 * std::f64::consts::PI)).rem_euclid(1.0);
        assert!(wrapped < 1e-9 || wrapped > 1.0 - 1e-9, "arg wraps to 0, got {}", lg.im);
    }

    #[test]
    fn arg_uses_both_components() {
        let p = 128;
        let z = mpc_from_f64(-3.0, 4.0, p);
        assert!((z.arg_f64() - 4f64.atan2(-3.0)).abs() < 1e-15);
    }
}
