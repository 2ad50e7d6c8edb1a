//! Coefficient domains for [`LaurentSeries`](crate::series::LaurentSeries).
//!
//! Two domains are supported: exact rationals (`rug::Rational`) and complex
//! floats of a chosen precision (`rug::Complex`). Both implement [`Coeff`].

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use rug::float::Constant;
use rug::{Complex, Float, Rational};
use serde::{Deserialize, Serialize};

use crate::report::Deviation;

/// Arithmetic mode of a series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoeffMode {
    ExactRational,
    ComplexFloat { bits: u32 },
}

impl CoeffMode {
    pub const DOUBLE: CoeffMode = CoeffMode::ComplexFloat { bits: 53 };

    pub fn float(bits: u32) -> crate::Result<Self> {
        if bits < 53 {
            return Err(crate::Error::InvalidInput(format!(
                "float precision must be at least 53 bits, got {bits}"
            )));
        }
        Ok(CoeffMode::ComplexFloat { bits })
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, CoeffMode::ExactRational)
    }

    /// Binary exponent below which a float coefficient counts as zero.
    ///
    /// Double precision uses `1e-300` (about `2^-996`); wider floats use
    /// `2^(8 - bits)`.
    pub fn zero_exponent(&self) -> Option<i32> {
        match *self {
            CoeffMode::ExactRational => None,
            CoeffMode::ComplexFloat { bits: 53 } => Some(-996),
            CoeffMode::ComplexFloat { bits } => Some(8 - bits as i32),
        }
    }
}

impl fmt::Display for CoeffMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffMode::ExactRational => write!(f, "exact"),
            CoeffMode::ComplexFloat { bits } => write!(f, "float{bits}"),
        }
    }
}

/// A coefficient ring for truncated series.
///
/// Binary operations take the precision of `self`; mixing precisions is
/// rejected one level up, by the series.
pub trait Coeff: Clone + fmt::Debug + Send + Sync + 'static {
    fn zero_in(mode: CoeffMode) -> Self;
    fn from_rational(q: &Rational, mode: CoeffMode) -> Self;
    /// `None` when the mode cannot represent an arbitrary float exactly.
    fn from_float(x: &Float, mode: CoeffMode) -> Option<Self>;
    /// `2πi` in the given mode, `None` in exact mode.
    fn two_pi_i(mode: CoeffMode) -> Option<Self>;

    fn is_zero(&self) -> bool;
    /// Exactly zero in exact mode; below the mode's zero threshold otherwise.
    fn is_negligible(&self, mode: CoeffMode) -> bool;

    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn recip(&self) -> Self;
    fn mul_rational(&self, q: &Rational) -> Self;
    /// `self += a * b`
    fn add_mul_assign(&mut self, a: &Self, b: &Self);

    fn to_c64(&self) -> Complex64;
    fn magnitude(&self) -> f64;
    fn abs_deviation(&self) -> Deviation;
    fn to_decimal(&self) -> String;
}

impl Coeff for Rational {
    fn zero_in(_: CoeffMode) -> Self {
        Rational::new()
    }

    fn from_rational(q: &Rational, _: CoeffMode) -> Self {
        q.clone()
    }

    fn from_float(_: &Float, _: CoeffMode) -> Option<Self> {
        None
    }

    fn two_pi_i(_: CoeffMode) -> Option<Self> {
        None
    }

    fn is_zero(&self) -> bool {
        self.cmp0() == Ordering::Equal
    }

    fn is_negligible(&self, _: CoeffMode) -> bool {
        Coeff::is_zero(self)
    }

    fn add(&self, rhs: &Self) -> Self {
        Rational::from(self + rhs)
    }

    fn sub(&self, rhs: &Self) -> Self {
        Rational::from(self - rhs)
    }

    fn mul(&self, rhs: &Self) -> Self {
        Rational::from(self * rhs)
    }

    fn neg(&self) -> Self {
        Rational::from(-self)
    }

    fn recip(&self) -> Self {
        Rational::from(self.recip_ref())
    }

    fn mul_rational(&self, q: &Rational) -> Self {
        Rational::from(self * q)
    }

    fn add_mul_assign(&mut self, a: &Self, b: &Self) {
        *self += Rational::from(a * b);
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.to_f64(), 0.0)
    }

    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }

    fn abs_deviation(&self) -> Deviation {
        Deviation::Exact(Rational::from(self.abs_ref()))
    }

    fn to_decimal(&self) -> String {
        self.to_string()
    }
}

fn complex_bits(c: &Complex) -> u32 {
    c.prec().0
}

fn float_negligible(x: &Float, min_exp: i32) -> bool {
    match x.get_exp() {
        None => x.is_zero(),
        Some(e) => e <= min_exp,
    }
}

impl Coeff for Complex {
    fn zero_in(mode: CoeffMode) -> Self {
        Complex::new(mode_bits(mode))
    }

    fn from_rational(q: &Rational, mode: CoeffMode) -> Self {
        Complex::with_val(mode_bits(mode), (q, 0))
    }

    fn from_float(x: &Float, mode: CoeffMode) -> Option<Self> {
        Some(Complex::with_val(mode_bits(mode), (x, 0)))
    }

    fn two_pi_i(mode: CoeffMode) -> Option<Self> {
        let bits = mode_bits(mode);
        let two_pi = Float::with_val(bits, Constant::Pi) * 2u32;
        Some(Complex::with_val(bits, (0, two_pi)))
    }

    fn is_zero(&self) -> bool {
        self.real().is_zero() && self.imag().is_zero()
    }

    fn is_negligible(&self, mode: CoeffMode) -> bool {
        let min_exp = mode.zero_exponent().unwrap_or(i32::MIN);
        float_negligible(self.real(), min_exp) && float_negligible(self.imag(), min_exp)
    }

    fn add(&self, rhs: &Self) -> Self {
        Complex::with_val(complex_bits(self), self + rhs)
    }

    fn sub(&self, rhs: &Self) -> Self {
        Complex::with_val(complex_bits(self), self - rhs)
    }

    fn mul(&self, rhs: &Self) -> Self {
        Complex::with_val(complex_bits(self), self * rhs)
    }

    fn neg(&self) -> Self {
        Complex::with_val(complex_bits(self), -self)
    }

    fn recip(&self) -> Self {
        Complex::with_val(complex_bits(self), self.recip_ref())
    }

    fn mul_rational(&self, q: &Rational) -> Self {
        let bits = complex_bits(self);
        let f = Float::with_val(bits, q);
        Complex::with_val(bits, self * &f)
    }

    fn add_mul_assign(&mut self, a: &Self, b: &Self) {
        let prod = Complex::with_val(complex_bits(self), a * b);
        *self += prod;
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.real().to_f64(), self.imag().to_f64())
    }

    fn magnitude(&self) -> f64 {
        let abs = Float::with_val(complex_bits(self), self.abs_ref());
        abs.to_f64()
    }

    fn abs_deviation(&self) -> Deviation {
        Deviation::Float(self.magnitude())
    }

    fn to_decimal(&self) -> String {
        let digits = decimal_digits(complex_bits(self));
        let re = self.real().to_string_radix(10, Some(digits));
        if self.imag().is_zero() {
            re
        } else {
            let im = self.imag();
            let sign = if im.is_sign_negative() { "-" } else { "+" };
            let im_abs = Float::with_val(im.prec(), im.abs_ref());
            format!("{re}{sign}{}i", im_abs.to_string_radix(10, Some(digits)))
        }
    }
}

fn mode_bits(mode: CoeffMode) -> u32 {
    match mode {
        CoeffMode::ComplexFloat { bits } => bits,
        // Only reachable through misuse; the narrowest legal float.
        CoeffMode::ExactRational => 53,
    }
}

/// Significant decimal digits carried by a binary precision.
pub fn decimal_digits(bits: u32) -> usize {
    ((bits as f64) * std::f64::consts::LOG10_2).floor().max(1.0) as usize
}
