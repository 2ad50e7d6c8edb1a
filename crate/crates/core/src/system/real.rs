//! Scalar arithmetic shared by the double and big-float solvers.

use std::cmp::Ordering;
use std::fmt::Debug;

use rug::{Float, Rational};

pub trait Real: Clone + Debug {
    /// `x` at the precision of `self`.
    fn lift(&self, x: f64) -> Self;
    fn lift_rational(&self, q: &Rational) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn abs(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn to_f64(&self) -> f64;
    fn cmp_real(&self, o: &Self) -> Ordering;

    fn lt(&self, o: &Self) -> bool {
        self.cmp_real(o) == Ordering::Less
    }

    fn zero_like(&self) -> Self {
        self.lift(0.0)
    }

    fn max_real(self, o: Self) -> Self {
        if self.lt(&o) {
            o
        } else {
            self
        }
    }
}

impl Real for f64 {
    fn lift(&self, x: f64) -> Self {
        x
    }
    fn lift_rational(&self, q: &Rational) -> Self {
        q.to_f64()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn cmp_real(&self, o: &Self) -> Ordering {
        self.partial_cmp(o).unwrap_or(Ordering::Equal)
    }
}

impl Real for Float {
    fn lift(&self, x: f64) -> Self {
        Float::with_val(self.prec(), x)
    }
    fn lift_rational(&self, q: &Rational) -> Self {
        Float::with_val(self.prec(), q)
    }
    fn add(&self, o: &Self) -> Self {
        Float::with_val(self.prec(), self + o)
    }
    fn sub(&self, o: &Self) -> Self {
        Float::with_val(self.prec(), self - o)
    }
    fn mul(&self, o: &Self) -> Self {
        Float::with_val(self.prec(), self * o)
    }
    fn div(&self, o: &Self) -> Self {
        Float::with_val(self.prec(), self / o)
    }
    fn abs(&self) -> Self {
        Float::with_val(self.prec(), self.abs_ref())
    }
    fn sqrt(&self) -> Self {
        Float::with_val(self.prec(), self.sqrt_ref())
    }
    fn to_f64(&self) -> f64 {
        Float::to_f64(self)
    }
    fn cmp_real(&self, o: &Self) -> Ordering {
        self.partial_cmp(o).unwrap_or(Ordering::Equal)
    }
}
