//! Signed log-magnitude scalars.
//!
//! Bergman densities at k ≈ 10³ involve factors like e^{-kφ} and k^j/j! that
//! individually overflow `f64`. Every density in this crate is carried as a
//! [`LogReal`]: a sign together with the natural log of the absolute value.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::ops::{Div, Mul, Neg};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogReal {
    sign: i8,
    log_mag: f64,
}

impl LogReal {
    pub const ZERO: LogReal = LogReal { sign: 0, log_mag: f64::NEG_INFINITY };
    pub const ONE: LogReal = LogReal { sign: 1, log_mag: 0.0 };

    /// Positive value `exp(log_mag)`; `-inf` maps to zero.
    pub fn from_log(log_mag: f64) -> Self {
        if log_mag == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogReal { sign: 1, log_mag }
        }
    }

    pub fn from_parts(sign: i8, log_mag: f64) -> Self {
        if sign == 0 || log_mag == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogReal { sign: sign.signum(), log_mag }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            LogReal { sign: if x > 0.0 { 1 } else { -1 }, log_mag: x.abs().ln() }
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    /// Natural log of |x|; `-inf` for zero.
    pub fn log_mag(&self) -> f64 {
        if self.sign == 0 {
            f64::NEG_INFINITY
        } else {
            self.log_mag
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn to_f64(&self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.log_mag.exp(),
        }
    }

    /// The floating value when it is finite and nonzero (or an exact zero).
    pub fn to_f64_checked(&self) -> Option<f64> {
        let v = self.to_f64();
        if v.is_finite() && (v != 0.0 || self.sign == 0) {
            Some(v)
        } else {
            None
        }
    }

    pub fn abs(&self) -> Self {
        LogReal::from_parts(self.sign.abs(), self.log_mag)
    }

    /// Multiplies by `exp(t)`.
    pub fn scale_exp(&self, t: f64) -> Self {
        if self.sign == 0 {
            *self
        } else {
            LogReal { sign: self.sign, log_mag: self.log_mag + t }
        }
    }

    pub fn powf(&self, p: f64) -> Self {
        assert!(self.sign >= 0, "powf of a negative LogReal");
        if self.sign == 0 {
            return if p == 0.0 { Self::ONE } else { Self::ZERO };
        }
        LogReal { sign: 1, log_mag: self.log_mag * p }
    }

    pub fn add(&self, other: &LogReal) -> LogReal {
        if self.sign == 0 {
            return *other;
        }
        if other.sign == 0 {
            return *self;
        }
        let (big, small) = if self.log_mag >= other.log_mag { (self, other) } else { (other, self) };
        let d = small.log_mag - big.log_mag;
        if big.sign == small.sign {
            LogReal { sign: big.sign, log_mag: big.log_mag + d.exp().ln_1p() }
        } else if d == 0.0 {
            Self::ZERO
        } else {
            LogReal { sign: big.sign, log_mag: big.log_mag + (-d.exp()).ln_1p() }
        }
    }

    pub fn sub(&self, other: &LogReal) -> LogReal {
        self.add(&-*other)
    }

    /// |log a − log b|, the log-space discrepancy used by every identity check.
    /// Returns `inf` if exactly one side is zero or the signs differ.
    pub fn log_distance(&self, other: &LogReal) -> f64 {
        match (self.sign, other.sign) {
            (0, 0) => 0.0,
            (a, b) if a == b => (self.log_mag - other.log_mag).abs(),
            _ => f64::INFINITY,
        }
    }

    /// Relative difference |a/b − 1| evaluated through logs.
    pub fn rel_diff(&self, other: &LogReal) -> f64 {
        match (self.sign, other.sign) {
            (0, 0) => 0.0,
            (a, b) if a == b => (self.log_mag - other.log_mag).exp_m1().abs(),
            _ => f64::INFINITY,
        }
    }

    pub fn ratio(&self, other: &LogReal) -> f64 {
        (*self / *other).to_f64()
    }
}

impl Neg for LogReal {
    type Output = LogReal;
    fn neg(self) -> LogReal {
        LogReal { sign: -self.sign, log_mag: self.log_mag }
    }
}

impl Mul for LogReal {
    type Output = LogReal;
    fn mul(self, rhs: LogReal) -> LogReal {
        if self.sign == 0 || rhs.sign == 0 {
            return LogReal::ZERO;
        }
        LogReal { sign: self.sign * rhs.sign, log_mag: self.log_mag + rhs.log_mag }
    }
}

impl Div for LogReal {
    type Output = LogReal;
    fn div(self, rhs: LogReal) -> LogReal {
        assert!(rhs.sign != 0, "division of LogReal by zero");
        if self.sign == 0 {
            return LogReal::ZERO;
        }
        LogReal { sign: self.sign * rhs.sign, log_mag: self.log_mag - rhs.log_mag }
    }
}

impl PartialOrd for LogReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Some(Ordering::Equal),
                1 => self.log_mag.partial_cmp(&other.log_mag),
                _ => other.log_mag.partial_cmp(&self.log_mag),
            },
            o => Some(o),
        }
    }
}

impl std::iter::Sum for LogReal {
    fn sum<I: Iterator<Item = LogReal>>(iter: I) -> LogReal {
        let terms: Vec<LogReal> = iter.collect();
        sum_logreal(&terms)
    }
}

/// Log-sum-exp over signed terms. Positive and negative parts are
/// accumulated separately against a common maximum, then combined once.
pub fn sum_logreal(terms: &[LogReal]) -> LogReal {
    let max = terms
        .iter()
        .filter(|t| t.sign != 0)
        .map(|t| t.log_mag)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return LogReal::ZERO;
    }
    if max == f64::INFINITY {
        return LogReal { sign: 1, log_mag: f64::INFINITY };
    }
    let (mut pos, mut neg) = (0.0_f64, 0.0_f64);
    for t in terms {
        match t.sign {
            1 => pos += (t.log_mag - max).exp(),
            -1 => neg += (t.log_mag - max).exp(),
            _ => {}
        }
    }
    let net = pos - neg;
    LogReal::from_f64(net).scale_exp(max)
}

/// `log Σ exp(x_i)` for plain log-magnitudes.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}
