//! Truncated Laurent series in `t`, where `t^24 = q = exp(2πiτ)`.
//!
//! A series stores a dense run of coefficients starting at its lowest
//! exponent `lead` and stopping before `trunc`; every exponent `≥ trunc` is
//! unknown. The zero series stores no coefficients and uses `lead == trunc`.
//!
//! Truncation bounds are always the tightest ones the operands imply:
//! a product of series with leads `l₁, l₂` and bounds `T₁, T₂` is known
//! below `min(l₁ + T₂, l₂ + T₁)`, a reciprocal keeps the relative precision
//! `T − l`, and so on.

use std::cmp::min;

use num_complex::Complex64;
use rug::Rational;
use serde::Serialize;

use crate::coeff::{Coeff, CoeffMode};
use crate::error::{Error, Result};

/// Exponent of `t` carrying `q^k`.
pub const T_PER_Q: i64 = 24;

#[derive(Clone, Debug)]
pub struct LaurentSeries<C> {
    mode: CoeffMode,
    lead: i64,
    coeffs: Vec<C>,
    trunc: i64,
}

pub type ExactSeries = LaurentSeries<Rational>;
pub type FloatSeries = LaurentSeries<rug::Complex>;

impl<C: Coeff> LaurentSeries<C> {
    pub fn zero(mode: CoeffMode, trunc: i64) -> Self {
        Self { mode, lead: trunc, coeffs: Vec::new(), trunc }
    }

    /// The constant `c`, known below `trunc`.
    pub fn constant(c: C, mode: CoeffMode, trunc: i64) -> Self {
        Self::monomial(c, 0, mode, trunc)
    }

    pub fn one(mode: CoeffMode, trunc: i64) -> Self {
        Self::constant(C::from_rational(&Rational::from(1), mode), mode, trunc)
    }

    /// `c·t^exp`, known below `trunc`.
    pub fn monomial(c: C, exp: i64, mode: CoeffMode, trunc: i64) -> Self {
        if exp >= trunc {
            return Self::zero(mode, trunc);
        }
        let mut coeffs = vec![C::zero_in(mode); (trunc - exp) as usize];
        coeffs[0] = c;
        Self::from_raw(mode, exp, coeffs, trunc)
    }

    /// Builds a series from a dense run starting at `lead`; the run is
    /// zero-padded up to `trunc` and anything at or past `trunc` is dropped.
    pub fn from_coeffs(mode: CoeffMode, lead: i64, mut coeffs: Vec<C>, trunc: i64) -> Self {
        if lead >= trunc {
            return Self::zero(mode, trunc);
        }
        let len = (trunc - lead) as usize;
        coeffs.truncate(len);
        coeffs.resize(len, C::zero_in(mode));
        Self::from_raw(mode, lead, coeffs, trunc)
    }

    /// Builds a series from sparse `(exponent, coefficient)` terms.
    pub fn from_terms<I>(mode: CoeffMode, terms: I, trunc: i64) -> Self
    where
        I: IntoIterator<Item = (i64, C)>,
    {
        let terms: Vec<(i64, C)> = terms.into_iter().filter(|(e, _)| *e < trunc).collect();
        let Some(lead) = terms.iter().map(|(e, _)| *e).min() else {
            return Self::zero(mode, trunc);
        };
        let mut coeffs = vec![C::zero_in(mode); (trunc - lead) as usize];
        for (e, c) in terms {
            let slot = &mut coeffs[(e - lead) as usize];
            *slot = slot.add(&c);
        }
        Self::from_raw(mode, lead, coeffs, trunc)
    }

    fn from_raw(mode: CoeffMode, lead: i64, coeffs: Vec<C>, trunc: i64) -> Self {
        debug_assert_eq!(coeffs.len() as i64, trunc - lead);
        let mut s = Self { mode, lead, coeffs, trunc };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        let skip = self
            .coeffs
            .iter()
            .take_while(|c| c.is_negligible(self.mode))
            .count();
        if skip == self.coeffs.len() {
            self.coeffs.clear();
            self.lead = self.trunc;
        } else if skip > 0 {
            self.coeffs.drain(..skip);
            self.lead += skip as i64;
        }
    }

    pub fn mode(&self) -> CoeffMode {
        self.mode
    }

    /// Lowest exponent with a nonzero coefficient; `None` for the zero series.
    pub fn lead(&self) -> Option<i64> {
        (!self.coeffs.is_empty()).then_some(self.lead)
    }

    pub fn trunc(&self) -> i64 {
        self.trunc
    }

    /// `trunc − lead`, the number of known coefficients from the lead on.
    pub fn relative_precision(&self) -> i64 {
        self.trunc - self.lead
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading_coeff(&self) -> Option<&C> {
        self.coeffs.first()
    }

    /// Coefficient of `t^exp`: `None` when `exp ≥ trunc` (unknown).
    pub fn coeff(&self, exp: i64) -> Option<C> {
        if exp >= self.trunc {
            None
        } else if exp < self.lead {
            Some(C::zero_in(self.mode))
        } else {
            Some(self.coeffs[(exp - self.lead) as usize].clone())
        }
    }

    /// Nonzero terms in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &C)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.lead + i as i64, c))
    }

    fn check_mode(&self, other: &Self) -> Result<()> {
        if self.mode != other.mode {
            return Err(Error::ModeMismatch {
                left: self.mode.to_string(),
                right: other.mode.to_string(),
            });
        }
        Ok(())
    }

    fn combine(&self, other: &Self, subtract: bool) -> Result<Self> {
        self.check_mode(other)?;
        let trunc = min(self.trunc, other.trunc);
        let lead = min(self.lead, other.lead);
        if lead >= trunc {
            return Ok(Self::zero(self.mode, trunc));
        }
        let mut out = vec![C::zero_in(self.mode); (trunc - lead) as usize];
        for (e, c) in self.terms() {
            if e >= trunc {
                break;
            }
            out[(e - lead) as usize] = c.clone();
        }
        for (e, c) in other.terms() {
            if e >= trunc {
                break;
            }
            let slot = &mut out[(e - lead) as usize];
            *slot = if subtract { slot.sub(c) } else { slot.add(c) };
        }
        Ok(Self::from_raw(self.mode, lead, out, trunc))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, true)
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(|_, c| c.neg())
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: &C) -> Self {
        self.map_coeffs(|_, x| x.mul(c))
    }

    pub fn scale_rational(&self, q: &Rational) -> Self {
        self.map_coeffs(|_, x| x.mul_rational(q))
    }

    /// `self + c` for a constant `c`.
    pub fn add_constant(&self, c: &C) -> Result<Self> {
        let k = Self::constant(c.clone(), self.mode, self.trunc);
        self.add(&k)
    }

    fn map_coeffs(&self, f: impl Fn(i64, &C) -> C) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| if c.is_zero() { c.clone() } else { f(self.lead + i as i64, c) })
            .collect();
        Self::from_raw(self.mode, self.lead, coeffs, self.trunc)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_mode(other)?;
        let trunc = min(self.lead + other.trunc, other.lead + self.trunc);
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.mode, trunc));
        }
        let lead = self.lead + other.lead;
        if lead >= trunc {
            return Ok(Self::zero(self.mode, trunc));
        }
        let len = (trunc - lead) as usize;
        let a: Vec<(usize, &C)> = nonzero(&self.coeffs, len);
        let b: Vec<(usize, &C)> = nonzero(&other.coeffs, len);
        let mut out = vec![C::zero_in(self.mode); len];
        for &(i, ai) in &a {
            for &(j, bj) in &b {
                let k = i + j;
                if k >= len {
                    break;
                }
                out[k].add_mul_assign(ai, bj);
            }
        }
        Ok(Self::from_raw(self.mode, lead, out, trunc))
    }

    /// Multiplicative inverse; the relative precision is preserved.
    pub fn recip(&self) -> Result<Self> {
        let Some(a0) = self.coeffs.first() else {
            return Err(Error::DivisionByZero);
        };
        if a0.is_negligible(self.mode) {
            return Err(Error::NegligibleLeading { mode: self.mode.to_string() });
        }
        let len = self.coeffs.len();
        let inv0 = a0.recip();
        let a: Vec<(usize, &C)> = nonzero(&self.coeffs, len).into_iter().skip(1).collect();
        let mut out: Vec<C> = Vec::with_capacity(len);
        out.push(inv0.clone());
        for k in 1..len {
            let mut acc = C::zero_in(self.mode);
            let mut touched = false;
            for &(j, aj) in &a {
                if j > k {
                    break;
                }
                let prev = &out[k - j];
                if !prev.is_zero() {
                    acc.add_mul_assign(aj, prev);
                    touched = true;
                }
            }
            out.push(if touched { acc.mul(&inv0).neg() } else { acc });
        }
        let lead = -self.lead;
        Ok(Self::from_raw(self.mode, lead, out, lead + len as i64))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.mul(&other.recip()?)
    }

    /// Integer power; negative exponents go through [`recip`](Self::recip).
    pub fn pow_int(&self, k: i64) -> Result<Self> {
        if k < 0 {
            return self.recip()?.pow_int(-k);
        }
        if k == 0 {
            if self.is_zero() {
                return Err(Error::InvalidInput("0^0 is undefined".into()));
            }
            return Ok(Self::one(self.mode, self.relative_precision()));
        }
        let mut base = self.clone();
        let mut e = k as u64;
        let mut acc: Option<Self> = None;
        loop {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base)?,
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.mul(&base)?;
        }
        Ok(acc.expect("k > 0"))
    }

    /// `θ = q·d/dq = (1/24)·t·d/dt`, i.e. `(1/2πi)·d/dτ`.
    pub fn theta(&self) -> Self {
        self.map_coeffs(|e, c| c.mul_rational(&Rational::from((e, T_PER_Q))))
    }

    /// `d/dτ = 2πi·θ`; floating-point modes only.
    pub fn deriv_tau(&self) -> Result<Self> {
        let two_pi_i = C::two_pi_i(self.mode).ok_or(Error::ExactModeUnsupported("d/dτ"))?;
        Ok(self.theta().scale(&two_pi_i))
    }

    /// Term-wise τ-antiderivative `c·t^k ↦ c·24/(2πi·k)·t^k`.
    ///
    /// The constant term must vanish: its primitive is `c·τ`, a logarithm
    /// in `q`, which this representation cannot hold.
    pub fn integrate_tau(&self) -> Result<Self> {
        let two_pi_i = C::two_pi_i(self.mode).ok_or(Error::ExactModeUnsupported("τ-antiderivative"))?;
        if let Some(c0) = self.coeff(0) {
            if !c0.is_negligible(self.mode) {
                return Err(Error::LogarithmicPrimitive);
            }
        }
        let inv = two_pi_i.recip();
        Ok(self.map_coeffs(|e, c| {
            if e == 0 {
                C::zero_in(self.mode)
            } else {
                c.mul(&inv).mul_rational(&Rational::from((T_PER_Q, e)))
            }
        }))
    }

    /// Drops everything at or above `trunc` (never extends the bound).
    pub fn truncate(&self, trunc: i64) -> Self {
        if trunc >= self.trunc {
            return self.clone();
        }
        if trunc <= self.lead {
            return Self::zero(self.mode, trunc);
        }
        let mut coeffs = self.coeffs.clone();
        coeffs.truncate((trunc - self.lead) as usize);
        Self::from_raw(self.mode, self.lead, coeffs, trunc)
    }

    /// Substitutes `t ↦ t^k` for `k ≥ 1`.
    pub fn substitute_power(&self, k: i64) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidInput(format!("substitution power must be ≥ 1, got {k}")));
        }
        let terms: Vec<(i64, C)> = self.terms().map(|(e, c)| (e * k, c.clone())).collect();
        Ok(Self::from_terms(self.mode, terms, self.trunc * k))
    }

    /// Inverse of [`substitute_power`](Self::substitute_power): succeeds when
    /// every nonzero exponent is divisible by `k`.
    pub fn coarsen(&self, k: i64) -> Option<Self> {
        if k < 1 || self.terms().any(|(e, _)| e.rem_euclid(k) != 0) {
            return None;
        }
        let terms: Vec<(i64, C)> = self.terms().map(|(e, c)| (e / k, c.clone())).collect();
        let trunc = self.trunc.div_euclid(k) + i64::from(self.trunc.rem_euclid(k) != 0);
        Some(Self::from_terms(self.mode, terms, trunc))
    }

    /// Maximum coefficient deviation from zero over exponents `< upto`.
    pub fn max_abs_below(&self, upto: i64) -> crate::report::Deviation {
        let zero = if self.mode.is_exact() {
            crate::report::Deviation::zero_exact()
        } else {
            crate::report::Deviation::Float(0.0)
        };
        self.terms()
            .take_while(|(e, _)| *e < upto)
            .fold(zero, |acc, (_, c)| acc.max(c.abs_deviation()))
    }

    /// Numerical snapshot of the nonzero terms, for point evaluation.
    pub fn compile(&self) -> CompiledSeries {
        CompiledSeries {
            terms: self.terms().map(|(e, c)| (e, c.to_c64())).collect(),
            trunc: self.trunc,
        }
    }

    /// Evaluates at `τ`, returning the value and an estimate of the
    /// truncation tail. See [`CompiledSeries::eval`].
    pub fn eval(&self, tau: Complex64, opts: &EvalOptions) -> Result<Evaluation> {
        self.compile().eval(tau, opts)
    }

    /// Records for the series dump format.
    pub fn dump(&self, dense: bool) -> SeriesDump {
        let records = if dense {
            (self.lead..self.trunc)
                .filter(|_| !self.is_zero())
                .map(|e| DumpRecord {
                    exponent: e,
                    value: self.coeff(e).expect("below trunc").to_decimal(),
                })
                .collect()
        } else {
            self.terms()
                .map(|(e, c)| DumpRecord { exponent: e, value: c.to_decimal() })
                .collect()
        };
        SeriesDump { mode: self.mode.to_string(), lead: self.lead(), trunc: self.trunc, records }
    }
}

impl LaurentSeries<Rational> {
    /// Converts an exact series into another coefficient domain.
    pub fn to_mode<D: Coeff>(&self, mode: CoeffMode) -> LaurentSeries<D> {
        let coeffs = self.coeffs.iter().map(|q| D::from_rational(q, mode)).collect();
        LaurentSeries::from_raw(mode, self.lead, coeffs, self.trunc)
    }
}

fn nonzero<C: Coeff>(coeffs: &[C], len: usize) -> Vec<(usize, &C)> {
    coeffs
        .iter()
        .take(len)
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .collect()
}

/// Header plus one record per exponent.
#[derive(Clone, Debug, Serialize)]
pub struct SeriesDump {
    pub mode: String,
    pub lead: Option<i64>,
    pub trunc: i64,
    pub records: Vec<DumpRecord>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DumpRecord {
    pub exponent: i64,
    pub value: String,
}

#[derive(Clone, Copy, Debug)]
pub struct EvalOptions {
    /// Smallest admissible `Im τ`.
    pub im_floor: f64,
    /// Bound on the estimated tail, relative to `max(1, |value|)`.
    pub tol: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { im_floor: 0.5, tol: 1e-12 }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Evaluation {
    pub value: Complex64,
    pub tail_bound: f64,
}

/// Nonzero terms of a series as `f64` complex numbers.
#[derive(Clone, Debug)]
pub struct CompiledSeries {
    terms: Vec<(i64, Complex64)>,
    trunc: i64,
}

impl CompiledSeries {
    pub fn trunc(&self) -> i64 {
        self.trunc
    }

    /// `Σ c_k·exp(2πiτ·k/24)` over the stored terms.
    ///
    /// The tail estimate extrapolates the decay of the last few term
    /// magnitudes geometrically. When fewer than two terms are available it
    /// falls back to `max|c|·|t|^trunc`, the size of the first unknown term
    /// at unit coefficient scale.
    pub fn eval(&self, tau: Complex64, opts: &EvalOptions) -> Result<Evaluation> {
        if tau.im < opts.im_floor {
            return Err(Error::BelowEvaluationFloor { im: tau.im, floor: opts.im_floor });
        }
        let (value, tail_bound) = self.sum_with_tail(tau);
        let scale = value.norm().max(1.0);
        if !(tail_bound <= opts.tol * scale) {
            return Err(Error::TailBound { tail: tail_bound, tol: opts.tol, trunc: self.trunc });
        }
        Ok(Evaluation { value, tail_bound })
    }

    /// The raw sum and tail estimate, without region or tolerance checks.
    pub fn sum_with_tail(&self, tau: Complex64) -> (Complex64, f64) {
        let w = Complex64::new(0.0, 2.0 * std::f64::consts::PI / T_PER_Q as f64) * tau;
        let log_abs_t = w.re;
        let mut sum = Complex64::new(0.0, 0.0);
        for &(e, c) in &self.terms {
            sum += c * (w * e as f64).exp();
        }
        (sum, self.tail_estimate(log_abs_t))
    }

    fn tail_estimate(&self, log_abs_t: f64) -> f64 {
        const WINDOW: usize = 6;
        let mags: Vec<(i64, f64)> = self
            .terms
            .iter()
            .rev()
            .take(WINDOW)
            .map(|&(e, c)| (e, c.norm().ln() + log_abs_t * e as f64))
            .collect();
        if mags.len() >= 2 {
            let (e_last, m_last) = mags[0];
            let (e_first, m_first) = mags[mags.len() - 1];
            // log of the per-unit-exponent decay ratio
            let slope = (m_last - m_first) / (e_last - e_first) as f64;
            if slope >= 0.0 {
                return f64::INFINITY;
            }
            let r = slope.exp();
            return m_last.exp() * r / (1.0 - r);
        }
        let max_c = self.terms.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max).max(1.0);
        max_c * (log_abs_t * self.trunc as f64).exp()
    }
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    const EXACT: CoeffMode = CoeffMode::ExactRational;

    fn series(lead: i64, rel: i64) -> impl Strategy<Value = ExactSeries> {
        (prop::collection::vec((-20i64..20, 1i64..6), 1..12), -3i64..3).prop_map(move |(cs, shift)| {
            let terms: Vec<(i64, Rational)> = cs
                .iter()
                .enumerate()
                .map(|(k, &(n, d))| (lead + shift + k as i64, Rational::from((n, d))))
                .collect();
            LaurentSeries::from_terms(EXACT, terms, lead + shift + rel)
        })
    }

    /// Series with a nonzero leading coefficient.
    fn unit(lead: i64, rel: i64) -> impl Strategy<Value = ExactSeries> {
        (series(lead, rel), 1i64..5).prop_map(move |(s, c)| {
            let l = s.lead().unwrap_or(lead);
            s.add(&LaurentSeries::monomial(Rational::from(c * 1000 + 1), l - 1, EXACT, s.trunc())).unwrap()
        })
    }

    fn agree(a: &ExactSeries, b: &ExactSeries) -> bool {
        let t = a.trunc().min(b.trunc());
        a.truncate(t).sub(&b.truncate(t)).unwrap().is_zero()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ring_axioms(a in series(0, 20), b in series(2, 18), c in series(-1, 15)) {
            prop_assert!(agree(&a.add(&b).unwrap(), &b.add(&a).unwrap()));
            prop_assert!(agree(&a.mul(&b).unwrap(), &b.mul(&a).unwrap()));
            let l = a.mul(&b).unwrap().mul(&c).unwrap();
            let r = a.mul(&b.mul(&c).unwrap()).unwrap();
            prop_assert!(agree(&l, &r));
            let d = a.mul(&b.add(&c).unwrap()).unwrap();
            let e = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
            prop_assert!(agree(&d, &e));
            prop_assert!(a.sub(&a).unwrap().is_zero());
        }

        #[test]
        fn theta_leibniz(a in series(1, 20), b in series(-2, 20)) {
            let lhs = a.mul(&b).unwrap().theta();
            let rhs = a.theta().mul(&b).unwrap().add(&a.mul(&b.theta()).unwrap()).unwrap();
            prop_assert!(agree(&lhs, &rhs));
        }

        #[test]
        fn recip_is_inverse(a in unit(3, 16)) {
            let r = a.recip().unwrap();
            prop_assert_eq!(r.relative_precision(), a.relative_precision());
            prop_assert_eq!(r.lead(), a.lead().map(|l| -l));
            let one = a.mul(&r).unwrap();
            prop_assert!(agree(&one, &LaurentSeries::one(EXACT, one.trunc())));
        }

        #[test]
        fn truncation_is_sound(a in series(0, 24), b in series(0, 24), cut in 5i64..15) {
            // coefficients below the reported trunc do not depend on the discarded tail
            let full = a.mul(&b).unwrap();
            let short = a.truncate(cut).mul(&b).unwrap();
            prop_assert!(short.trunc() <= full.trunc());
            prop_assert!(agree(&full, &short));
        }

        #[test]
        fn substitution_round_trip(a in series(-2, 20), k in 1i64..5) {
            let up = a.substitute_power(k).unwrap();
            prop_assert_eq!(up.trunc(), a.trunc() * k);
            prop_assert!(agree(&up.coarsen(k).unwrap(), &a));
        }
    }
}
