//! Exact signal values with a power-of-two denominator.
//!
//! Every signal in an `N`-bit system is a rational with denominator `2^N`:
//! RTWs are `±1` or `±1/2`, product strings are `±2^-r`, and universes are
//! products of `N` factors from `{±3/2, ±1/2}`. Storing the numerator as an
//! arbitrary-precision integer keeps every comparison and zero test an
//! integer operation. Universe numerators reach `3^N`, which overflows a
//! 64-bit word from `N = 41` on.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive, Zero};

/// An exact sample value `numerator / 2^scale`.
///
/// All samples drawn from one reference system share the same scale, so
/// addition and subtraction reduce to integer arithmetic on numerators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicSample {
    numerator: BigInt,
    scale: u32,
}

impl DyadicSample {
    pub fn new(numerator: BigInt, scale: u32) -> Self {
        Self { numerator, scale }
    }

    /// The zero sample at the given scale.
    pub fn zero(scale: u32) -> Self {
        Self::new(BigInt::zero(), scale)
    }

    pub fn numerator(&self) -> &BigInt {
        &self.numerator
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    /// Exact zero test; never tolerance-based.
    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    /// -1, 0, or +1.
    pub fn signum(&self) -> i8 {
        if self.numerator.is_zero() {
            0
        } else if self.numerator.is_negative() {
            -1
        } else {
            1
        }
    }

    /// Base-2 logarithm of `|value|` when the magnitude is a power of two.
    ///
    /// Product-string samples always are: `|G| = 2^-r` yields `Some(-r)`.
    /// Returns `None` for zero or for magnitudes with other odd parts.
    pub fn pow2_magnitude(&self) -> Option<i64> {
        let mag: &BigUint = self.numerator.magnitude();
        if mag.is_zero() || mag.count_ones() != 1 {
            return None;
        }
        let exp = mag.trailing_zeros().expect("nonzero magnitude") as i64;
        Some(exp - i64::from(self.scale))
    }

    /// Approximate value for plotting and display. Lossy; exact state stays
    /// in `numerator`/`scale`.
    pub fn to_f64(&self) -> f64 {
        let num = self.numerator.to_f64().unwrap_or(f64::NAN);
        num * 2f64.powi(-(self.scale as i32))
    }

    /// Logarithmically distorted magnitude used for signal plots:
    /// `sign(v) * log10(2^scale * |v|)`, which is `sign * log10(|numerator|)`.
    ///
    /// Defined as 0 at zero so reduced universes, which can vanish at
    /// isolated clocks, still emit a plottable point.
    pub fn log_distorted(&self) -> f64 {
        if self.numerator.is_zero() {
            return 0.0;
        }
        let mag = self.numerator.magnitude().to_f64().unwrap_or(f64::NAN);
        f64::from(self.signum()) * mag.log10()
    }
}

impl fmt::Display for DyadicSample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.numerator, self.scale)
    }
}

fn assert_same_scale(a: &DyadicSample, b: &DyadicSample) {
    assert_eq!(
        a.scale, b.scale,
        "dyadic samples from different systems: scale {} vs {}",
        a.scale, b.scale
    );
}

impl Add for &DyadicSample {
    type Output = DyadicSample;

    fn add(self, rhs: &DyadicSample) -> DyadicSample {
        assert_same_scale(self, rhs);
        DyadicSample::new(&self.numerator + &rhs.numerator, self.scale)
    }
}

impl Sub for &DyadicSample {
    type Output = DyadicSample;

    fn sub(self, rhs: &DyadicSample) -> DyadicSample {
        assert_same_scale(self, rhs);
        DyadicSample::new(&self.numerator - &rhs.numerator, self.scale)
    }
}

impl Neg for &DyadicSample {
    type Output = DyadicSample;

    fn neg(self) -> DyadicSample {
        DyadicSample::new(-&self.numerator, self.scale)
    }
}
