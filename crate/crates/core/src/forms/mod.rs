//! Classical q-series and the forms `fₙ`, `yₙ`.
//!
//! Every constructor takes the exclusive `t`-exponent bound of its result
//! (`t = q^(1/24)`). Internally, ingredients are built at the relative
//! precision of the result so that no coefficient is ever extrapolated.

pub mod eta_quotient;
pub mod multiplier;

use std::cmp::Ordering;

use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::coeff::{Coeff, CoeffMode};
use crate::error::{Error, Result};
use crate::series::{ExactSeries, LaurentSeries, T_PER_Q};

pub use eta_quotient::{EtaQuotientSeries, EtaQuotientSpec};

const EXACT: CoeffMode = CoeffMode::ExactRational;

/// `η = t·∏(1 − t^(24m))` from Euler's pentagonal theorem.
pub fn eta_series(trunc: i64) -> Result<ExactSeries> {
    if trunc <= 1 {
        return Err(Error::InvalidInput(format!("η needs trunc > 1, got {trunc}")));
    }
    let mut terms = Vec::new();
    // exponents 1 + 24·k(3k−1)/2 for k = 0, ±1, ±2, …
    for k in 0i64.. {
        let mut any = false;
        for kk in if k == 0 { vec![0] } else { vec![k, -k] } {
            let e = 1 + T_PER_Q * kk * (3 * kk - 1) / 2;
            if e < trunc {
                any = true;
                let sign = if kk.rem_euclid(2) == 0 { 1 } else { -1 };
                terms.push((e, Rational::from(sign)));
            }
        }
        if !any {
            break;
        }
    }
    Ok(LaurentSeries::from_terms(EXACT, terms, trunc))
}

/// `η^k` with `k·1` as lead and relative precision `rel`.
pub fn eta_power(k: i64, rel: i64) -> Result<ExactSeries> {
    if rel < 1 {
        return Err(Error::InvalidInput(format!("relative precision must be ≥ 1, got {rel}")));
    }
    eta_series(1 + rel)?.pow_int(k)
}

/// Divisor sum `σ_k(m)`.
pub fn sigma(k: u32, m: u64) -> Integer {
    let mut acc = Integer::new();
    let mut d = 1u64;
    while d * d <= m {
        if m % d == 0 {
            acc += Integer::from(Integer::u_pow_u(d as u32, k));
            let e = m / d;
            if e != d {
                acc += Integer::from(Integer::u_pow_u(e as u32, k));
            }
        }
        d += 1;
    }
    acc
}

/// Normalized Eisenstein series `E_k`, `k ∈ {2, 4, 6}`.
pub fn eisenstein_series(k: u32, trunc: i64) -> Result<ExactSeries> {
    let c: i64 = match k {
        2 => -24,
        4 => 240,
        6 => -504,
        _ => return Err(Error::InvalidInput(format!("E_{k} is not supported"))),
    };
    if trunc <= 0 {
        return Err(Error::InvalidInput(format!("E_{k} needs trunc > 0, got {trunc}")));
    }
    let mut terms = vec![(0, Rational::from(1))];
    let mut m = 1u64;
    while (m as i64) * T_PER_Q < trunc {
        terms.push((m as i64 * T_PER_Q, Rational::from(sigma(k - 1, m) * c)));
        m += 1;
    }
    Ok(LaurentSeries::from_terms(EXACT, terms, trunc))
}

/// `Δ = η²⁴`.
pub fn delta_series(trunc: i64) -> Result<ExactSeries> {
    eta_power(24, trunc - 24)
}

/// `J = E4³/(1728·Δ)`, normalized so that `J(i) = 1` and `J(ρ) = 0`.
pub fn j_series(trunc: i64) -> Result<ExactSeries> {
    let rel = trunc + 24;
    if rel < 1 {
        return Err(Error::InvalidInput(format!("J needs trunc > −24, got {trunc}")));
    }
    let e4 = eisenstein_series(4, rel)?;
    let num = e4.pow_int(3)?;
    let den = delta_series(24 + rel)?.scale_rational(&Rational::from(1728));
    num.div(&den)
}

/// The nodes `xᵢ = J(wᵢ)` defining `fₙ`.
#[derive(Clone, Debug, PartialEq)]
pub enum Nodes {
    /// Sorted exact values in `(0, 1)`.
    Exact(Vec<Rational>),
    /// Sorted float values in `(0, 1)`, all at one precision.
    Float(Vec<Float>),
    /// Monic polynomial whose roots are the nodes, leading coefficient first.
    MonicPoly(Vec<Rational>),
}

/// Data of the form `fₙ = η⁴/∏(J − xᵢ)²`.
#[derive(Clone, Debug, PartialEq)]
pub struct FormSpec {
    n: usize,
    nodes: Nodes,
}

impl FormSpec {
    pub fn eta4() -> Self {
        Self { n: 0, nodes: Nodes::Exact(Vec::new()) }
    }

    pub fn exact(xs: Vec<Rational>) -> Result<Self> {
        for x in &xs {
            if x.cmp0() != Ordering::Greater || *x >= 1 {
                return Err(Error::OutsideDomain(format!("node {x} is not in (0, 1)")));
            }
        }
        for w in xs.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::OutsideDomain("nodes must be strictly increasing".into()));
            }
        }
        Ok(Self { n: xs.len(), nodes: Nodes::Exact(xs) })
    }

    pub fn float(xs: Vec<Float>) -> Result<Self> {
        for w in xs.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::OutsideDomain("nodes must be strictly increasing".into()));
            }
        }
        if xs.iter().any(|x| x.cmp0() != Some(Ordering::Greater) || *x >= 1) {
            return Err(Error::OutsideDomain("nodes must lie in (0, 1)".into()));
        }
        Ok(Self { n: xs.len(), nodes: Nodes::Float(xs) })
    }

    pub fn from_f64(xs: &[f64], bits: u32) -> Result<Self> {
        Self::float(xs.iter().map(|&x| Float::with_val(bits, x)).collect())
    }

    /// Nodes given implicitly by a monic rational polynomial, leading
    /// coefficient first.
    pub fn monic_poly(coeffs: Vec<Rational>) -> Result<Self> {
        if coeffs.first().map_or(true, |c| *c != 1) {
            return Err(Error::InvalidInput("polynomial must be monic".into()));
        }
        let n = coeffs.len() - 1;
        if n > 0 && coeffs[n].cmp0() == Ordering::Equal {
            return Err(Error::OutsideDomain("x = 0 is a root".into()));
        }
        let at_one = coeffs.iter().fold(Rational::new(), |acc, c| acc + c);
        if n > 0 && at_one.cmp0() == Ordering::Equal {
            return Err(Error::OutsideDomain("x = 1 is a root".into()));
        }
        Ok(Self { n, nodes: Nodes::MonicPoly(coeffs) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &Nodes {
        &self.nodes
    }

    /// `r = (12n + 1)/6`.
    pub fn r(&self) -> Rational {
        Rational::from((12 * self.n as i64 + 1, 6))
    }

    /// `s/(2π²) = r²`.
    pub fn s_over_2pi2(&self) -> Rational {
        let r = self.r();
        Rational::from(&r * &r)
    }

    /// Whether the form can be built in exact mode.
    pub fn is_exact(&self) -> bool {
        !matches!(self.nodes, Nodes::Float(_))
    }

    /// Node values as doubles; for a polynomial they are its real roots in
    /// `(0, 1)`, found numerically.
    pub fn xs_f64(&self) -> Vec<f64> {
        match &self.nodes {
            Nodes::Exact(xs) => xs.iter().map(Rational::to_f64).collect(),
            Nodes::Float(xs) => xs.iter().map(Float::to_f64).collect(),
            Nodes::MonicPoly(c) => crate::system::poly::real_roots_unit(c, 64)
                .into_iter()
                .map(|x| x.to_f64())
                .collect(),
        }
    }

    /// Leading `t`-exponent of `fₙ`.
    pub fn f_lead(&self) -> i64 {
        4 + 48 * self.n as i64
    }

    /// Leading `t`-exponent of `yₙ`.
    pub fn y_lead(&self) -> i64 {
        -2 - 24 * self.n as i64
    }

    /// `∏(J − xᵢ)` with relative precision `rel`.
    fn node_poly_of_j<C: Coeff>(&self, mode: CoeffMode, rel: i64) -> Result<LaurentSeries<C>> {
        let j_trunc = -24 + rel;
        match &self.nodes {
            Nodes::Float(xs) => {
                if mode.is_exact() {
                    return Err(Error::ExactModeUnsupported("float nodes"));
                }
                let j: LaurentSeries<C> = j_series(j_trunc)?.to_mode(mode);
                let mut acc = LaurentSeries::one(mode, rel);
                for x in xs {
                    let c = C::from_float(x, mode).ok_or(Error::ExactModeUnsupported("float nodes"))?;
                    acc = acc.mul(&j.add_constant(&c.neg())?)?;
                }
                Ok(acc)
            }
            Nodes::Exact(xs) => {
                let j = j_series(j_trunc)?;
                let mut acc = LaurentSeries::one(EXACT, rel);
                for x in xs {
                    acc = acc.mul(&j.add_constant(&Rational::from(-x))?)?;
                }
                Ok(acc.to_mode(mode))
            }
            Nodes::MonicPoly(coeffs) => {
                let j = j_series(j_trunc)?;
                let mut acc = LaurentSeries::one(EXACT, rel);
                for c in &coeffs[1..] {
                    acc = acc.mul(&j)?.add_constant(c)?;
                }
                Ok(acc.to_mode(mode))
            }
        }
    }

    /// `fₙ = η⁴/∏(J − xᵢ)²`, known below `trunc`.
    pub fn f_series<C: Coeff>(&self, mode: CoeffMode, trunc: i64) -> Result<LaurentSeries<C>> {
        let rel = trunc - self.f_lead();
        if rel < 1 {
            return Err(Error::InvalidInput(format!(
                "trunc {trunc} does not exceed the lead {} of f_{}",
                self.f_lead(),
                self.n
            )));
        }
        let eta4: LaurentSeries<C> = eta_power(4, rel)?.to_mode(mode);
        let p = self.node_poly_of_j::<C>(mode, rel)?;
        eta4.mul(&p.pow_int(-2)?)
    }

    /// `yₙ = η⁻²·∏(J − xᵢ)`, known below `trunc`.
    pub fn y_series<C: Coeff>(&self, mode: CoeffMode, trunc: i64) -> Result<LaurentSeries<C>> {
        let rel = trunc - self.y_lead();
        if rel < 1 {
            return Err(Error::InvalidInput(format!(
                "trunc {trunc} does not exceed the lead {} of y_{}",
                self.y_lead(),
                self.n
            )));
        }
        let eta_m2: LaurentSeries<C> = eta_power(-2, rel)?.to_mode(mode);
        let p = self.node_poly_of_j::<C>(mode, rel)?;
        eta_m2.mul(&p)
    }
}

/// Human-readable summary of a spec.
#[derive(Clone, Debug, Serialize)]
pub struct FormSummary {
    pub n: usize,
    pub r: String,
    pub s_over_2pi2: String,
    pub f_lead: i64,
    pub y_lead: i64,
}

impl From<&FormSpec> for FormSummary {
    fn from(s: &FormSpec) -> Self {
        Self {
            n: s.n,
            r: s.r().to_string(),
            s_over_2pi2: s.s_over_2pi2().to_string(),
            f_lead: s.f_lead(),
            y_lead: s.y_lead(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// ∏_{m≥1}(1 − q^m)^k by naive polynomial multiplication, through `q^order`.
    fn product_oracle(k: i64, order: usize) -> Vec<Integer> {
        let mut p = vec![Integer::new(); order + 1];
        p[0] = Integer::from(1);
        let step = |p: &mut Vec<Integer>, m: usize, inverse: bool| {
            if inverse {
                // multiply by 1/(1 − q^m) = Σ q^{jm}
                for i in m..=order {
                    let prev = p[i - m].clone();
                    p[i] += prev;
                }
            } else {
                for i in (m..=order).rev() {
                    let prev = p[i - m].clone();
                    p[i] -= prev;
                }
            }
        };
        for m in 1..=order {
            for _ in 0..k.unsigned_abs() {
                step(&mut p, m, k < 0);
            }
        }
        p
    }

    fn q_coeffs(s: &ExactSeries, offset: i64, count: usize) -> Vec<Rational> {
        (0..count as i64).map(|m| s.coeff(offset + 24 * m).unwrap()).collect()
    }

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| Rational::from(x)).collect()
    }

    #[test]
    fn eta_matches_product_to_q50() {
        let eta = eta_series(1 + 24 * 51).unwrap();
        assert_eq!(eta.lead(), Some(1));
        let oracle = product_oracle(1, 50);
        for (m, c) in oracle.iter().enumerate() {
            assert_eq!(eta.coeff(1 + 24 * m as i64).unwrap(), Rational::from(c), "q^{m}");
        }
        assert_eq!(q_coeffs(&eta, 1, 4), ints(&[1, -1, -1, 0]));
        for e in 0..(24 * 51) {
            if (e - 1) % 24 != 0 {
                assert_eq!(eta.coeff(e).unwrap(), 0);
            }
        }
    }

    #[test]
    fn eta24_and_delta() {
        let d = eta_series(1 + 24 * 5).unwrap().pow_int(24).unwrap();
        assert_eq!(d.lead(), Some(24));
        assert_eq!(q_coeffs(&d, 24, 4), ints(&[1, -24, 252, -1472]));
        let oracle = product_oracle(24, 4);
        for m in 0..4 {
            assert_eq!(d.coeff(24 + 24 * m as i64).unwrap(), Rational::from(&oracle[m]));
        }
    }

    #[test]
    fn eisenstein_coefficients() {
        let e4 = eisenstein_series(4, 24 * 3).unwrap();
        assert_eq!(q_coeffs(&e4, 0, 3), ints(&[1, 240, 2160]));
        let e2 = eisenstein_series(2, 24 * 3).unwrap();
        assert_eq!(q_coeffs(&e2, 0, 3), ints(&[1, -24, -72]));
        let e6 = eisenstein_series(6, 24 * 3).unwrap();
        assert_eq!(q_coeffs(&e6, 0, 3), ints(&[1, -504, -16632]));
        assert!(eisenstein_series(8, 10).is_err());
        assert_eq!(sigma(3, 2), 9);
        assert_eq!(sigma(1, 12), 28);
    }

    #[test]
    fn log_derivative_of_eta_is_e2_over_24() {
        let trunc = 24 * 21;
        let eta = eta_series(1 + trunc).unwrap();
        let ratio = eta.theta().div(&eta).unwrap();
        let e2 = eisenstein_series(2, trunc).unwrap().scale_rational(&Rational::from((1, 24)));
        let diff = ratio.sub(&e2).unwrap();
        assert!(diff.is_zero());
        assert_eq!(diff.trunc(), trunc);
    }

    #[test]
    fn delta_two_ways() {
        let trunc = 24 * 30;
        let d = delta_series(trunc).unwrap();
        let e4 = eisenstein_series(4, trunc).unwrap();
        let e6 = eisenstein_series(6, trunc).unwrap();
        let other = e4
            .pow_int(3)
            .unwrap()
            .sub(&e6.pow_int(2).unwrap())
            .unwrap()
            .scale_rational(&Rational::from((1, 1728)));
        assert!(d.sub(&other).unwrap().is_zero());
    }

    #[test]
    fn j_coefficients() {
        let j = j_series(24 * 3).unwrap();
        assert_eq!(j.lead(), Some(-24));
        assert_eq!(j.coeff(-24).unwrap(), Rational::from((1, 1728)));
        let j1728 = j.scale_rational(&Rational::from(1728));
        assert_eq!(j1728.coeff(0).unwrap(), 744);
        assert_eq!(j1728.coeff(24).unwrap(), 196884);
        assert_eq!(j1728.coeff(48).unwrap(), 21493760);
    }

    #[test]
    fn ramanujan_identity_with_twelfth() {
        let trunc = 24 * 51;
        let e2 = eisenstein_series(2, trunc).unwrap();
        let e4 = eisenstein_series(4, trunc).unwrap();
        let rhs = e2
            .mul(&e2)
            .unwrap()
            .sub(&e4)
            .unwrap()
            .scale_rational(&Rational::from((1, 12)));
        assert!(e2.theta().sub(&rhs).unwrap().is_zero());
        // without the 1/12 the q¹ coefficients already differ
        let bare = e2.mul(&e2).unwrap().sub(&e4).unwrap();
        assert_ne!(e2.theta().coeff(24), bare.coeff(24));
    }

    #[test]
    fn theta_j_from_eisenstein() {
        let trunc = 24 * 20;
        let j = j_series(trunc).unwrap();
        let e4 = eisenstein_series(4, trunc + 24).unwrap();
        let e6 = eisenstein_series(6, trunc + 24).unwrap();
        let d = delta_series(trunc + 48).unwrap().scale_rational(&Rational::from(1728));
        let rhs = e4.pow_int(2).unwrap().mul(&e6).unwrap().div(&d).unwrap().neg();
        let diff = j.theta().sub(&rhs).unwrap();
        assert!(diff.is_zero());
        assert_eq!(diff.trunc(), trunc);
    }

    #[test]
    fn e2_from_j_derivatives() {
        // E2 = 6·θ²J/θJ − 4·θJ/J − 3·θJ/(J − 1)
        let trunc = 24 * 15;
        let j = j_series(trunc).unwrap();
        let tj = j.theta();
        let t2j = tj.theta();
        let one = Rational::from(1);
        let rhs = t2j
            .div(&tj)
            .unwrap()
            .scale_rational(&Rational::from(6))
            .sub(&tj.div(&j).unwrap().scale_rational(&Rational::from(4)))
            .unwrap()
            .sub(&tj.div(&j.add_constant(&Rational::from(-&one)).unwrap()).unwrap().scale_rational(&Rational::from(3)))
            .unwrap();
        let e2 = eisenstein_series(2, rhs.trunc()).unwrap();
        let diff = rhs.sub(&e2).unwrap();
        assert!(diff.is_zero());
        assert!(diff.trunc() >= trunc);
    }

    #[test]
    fn f0_is_eta4() {
        let f0: ExactSeries = FormSpec::eta4().f_series(EXACT, 4 + 24 * 4).unwrap();
        assert_eq!(f0.lead(), Some(4));
        assert_eq!(q_coeffs(&f0, 4, 4), ints(&[1, -4, 2, 8]));
        let oracle = product_oracle(4, 3);
        assert_eq!(q_coeffs(&f0, 4, 4), oracle.iter().map(Rational::from).collect::<Vec<_>>());
        assert_eq!(f0.coeff(0).unwrap(), 0);
    }

    #[test]
    fn f1_lead_and_reciprocal_square() {
        let spec = FormSpec::exact(vec![Rational::from((4, 7))]).unwrap();
        let rel = 24 * 21;
        let f1: ExactSeries = spec.f_series(EXACT, 52 + rel).unwrap();
        assert_eq!(f1.lead(), Some(52));
        assert_eq!(f1.coeff(0).unwrap(), 0);
        let y1: ExactSeries = spec.y_series(EXACT, -26 + rel).unwrap();
        assert_eq!(y1.lead(), Some(-26));
        let prod = y1.mul(&y1).unwrap().mul(&f1).unwrap();
        let one = LaurentSeries::one(EXACT, prod.trunc());
        assert!(prod.sub(&one).unwrap().is_zero());
        assert!(prod.trunc() >= 24 * 20);
    }

    #[test]
    fn y0_is_inverse_eta_squared() {
        let y0: ExactSeries = FormSpec::eta4().y_series(EXACT, 24 * 3).unwrap();
        assert_eq!(y0.lead(), Some(-2));
        assert_eq!(q_coeffs(&y0, -2, 3), ints(&[1, 2, 5]));
        let oracle = product_oracle(-2, 2);
        assert_eq!(q_coeffs(&y0, -2, 3), oracle.iter().map(Rational::from).collect::<Vec<_>>());
        let f0: ExactSeries = FormSpec::eta4().f_series(EXACT, 24 * 3).unwrap();
        let prod = y0.mul(&y0).unwrap().mul(&f0).unwrap();
        assert!(prod.sub(&LaurentSeries::one(EXACT, prod.trunc())).unwrap().is_zero());
    }

    #[test]
    fn leads_for_several_n() {
        for n in 0..=4usize {
            let xs: Vec<Rational> = (1..=n).map(|i| Rational::from((i as i64, n as i64 + 1))).collect();
            let spec = FormSpec::exact(xs).unwrap();
            let f: ExactSeries = spec.f_series(EXACT, spec.f_lead() + 48).unwrap();
            assert_eq!(f.lead(), Some(4 + 48 * n as i64));
        }
    }

    #[test]
    fn node_validation() {
        assert!(FormSpec::exact(vec![Rational::from(0)]).is_err());
        assert!(FormSpec::exact(vec![Rational::from(1)]).is_err());
        assert!(FormSpec::exact(vec![Rational::from((1, 2)), Rational::from((1, 3))]).is_err());
        assert!(FormSpec::from_f64(&[0.2, 1.0], 53).is_err());
        let one = Rational::from(1);
        assert!(FormSpec::monic_poly(vec![one.clone(), Rational::from(0)]).is_err());
        assert!(FormSpec::monic_poly(vec![one.clone(), Rational::from(-1)]).is_err());
        assert!(FormSpec::monic_poly(vec![Rational::from(2), Rational::from(-1)]).is_err());
        let spec = FormSpec::exact(vec![Rational::from((4, 7))]).unwrap();
        assert_eq!(spec.r(), Rational::from((13, 6)));
        assert_eq!(spec.s_over_2pi2(), Rational::from((169, 36)));
    }

    #[test]
    fn monic_poly_matches_roots() {
        let spec_p = FormSpec::monic_poly(vec![Rational::from(1), Rational::from((-4, 7))]).unwrap();
        let spec_r = FormSpec::exact(vec![Rational::from((4, 7))]).unwrap();
        let a: ExactSeries = spec_p.f_series(EXACT, 300).unwrap();
        let b: ExactSeries = spec_r.f_series(EXACT, 300).unwrap();
        assert!(a.sub(&b).unwrap().is_zero());
    }

    #[test]
    fn float_nodes_need_float_mode() {
        let spec = FormSpec::from_f64(&[0.5], 53).unwrap();
        assert!(spec.f_series::<Rational>(EXACT, 100).is_err());
        let f: LaurentSeries<rug::Complex> = spec.f_series(CoeffMode::DOUBLE, 100).unwrap();
        assert_eq!(f.lead(), Some(52));
    }
}
