//! Log-scaled complex numbers: the value represented is exp(log_value).
//! Magnitudes of size e^{±n·O(1)} with n in the hundreds appear throughout the
//! strong-asymptotic formulas; carrying logarithms avoids overflow entirely.

use num_complex::Complex64;

#[derive(Debug, Clone, Copy)]
pub struct LogComplex {
    /// value = exp(log_value); only meaningful when !zero
    pub log_value: Complex64,
    pub zero: bool,
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex {
        log_value: Complex64::new(f64::NEG_INFINITY, 0.0),
        zero: true,
    };

    pub fn from_log(log_value: Complex64) -> Self {
        Self { log_value, zero: false }
    }

    pub fn from_c64(z: Complex64) -> Self {
        if z.re == 0.0 && z.im == 0.0 {
            Self::ZERO
        } else {
            Self::from_log(Complex64::new(z.norm().ln(), z.arg()))
        }
    }

    pub fn to_c64(self) -> Complex64 {
        if self.zero {
            Complex64::new(0.0, 0.0)
        } else {
            self.log_value.exp()
        }
    }

    /// ln of the modulus (−∞ for zero).
    pub fn ln_mag(self) -> f64 {
        if self.zero {
            f64::NEG_INFINITY
        } else {
            self.log_value.re
        }
    }

    pub fn arg(self) -> f64 {
        self.log_value.im
    }

    pub fn mul(self, rhs: Self) -> Self {
        if self.zero || rhs.zero {
            Self::ZERO
        } else {
            Self::from_log(self.log_value + rhs.log_value)
        }
    }

    pub fn div(self, rhs: Self) -> Self {
        assert!(!rhs.zero, "division by log-zero");
        if self.zero {
            Self::ZERO
        } else {
            Self::from_log(self.log_value - rhs.log_value)
        }
    }

    pub fn neg(self) -> Self {
        if self.zero {
            self
        } else {
            Self::from_log(self.log_value + Complex64::new(0.0, std::f64::consts::PI))
        }
    }

    /// Addition by factoring out the larger modulus:
    /// log(a+b) = log a + log(1 + e^{log b − log a}).
    pub fn add(self, rhs: Self) -> Self {
        if self.zero {
            return rhs;
        }
        if rhs.zero {
            return self;
        }
        let (big, small) = if self.log_value.re >= rhs.log_value.re {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let d = small.log_value - big.log_value; // Re d ≤ 0
        if d.re < -745.0 {
            return big;
        }
        let corr = (Complex64::new(1.0, 0.0) + d.exp()).ln();
        if corr.re == f64::NEG_INFINITY {
            // exact cancellation
            return Self::ZERO;
        }
        Self::from_log(big.log_value + corr)
    }

    pub fn sub(self, rhs: Self) -> Self {
        self.add(rhs.neg())
    }

    /// value^k for a real exponent (principal: multiplies the log).
    pub fn powf(self, k: f64) -> Self {
        if self.zero {
            return self;
        }
        Self::from_log(self.log_value * k)
    }

    /// Relative difference |self/rhs − 1|; +∞ when rhs is zero and self isn't.
    pub fn rel_diff(self, rhs: Self) -> f64 {
        if rhs.zero {
            return if self.zero { 0.0 } else { f64::INFINITY };
        }
        if self.zero {
            return 1.0;
        }
        let d = self.log_value - rhs.log_value;
        if d.re.abs() > 700.0 {
            return f64::INFINITY;
        }
        (d.exp() - Complex64::new(1.0, 0.0)).norm()
    }
}
