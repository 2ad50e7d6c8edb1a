//! Coefficient-wise verification of `{h, τ} = s·E4` and `y″ + (s/2)E4·y = 0`.
//!
//! With `θ = q·d/dq = (1/2πi)·d/dτ` and `h′ = f`, the normalized Schwarzian
//! `Ŝ = {h, τ}/(2πi)²` is `θg − g²/2` for `g = θf/f`. Then `{h, τ} = s·E4`
//! with `s = 2π²r²` reads `Ŝ = −(r²/2)·E4`, and the ODE reads
//! `θ²y = (r²/4)·E4·y`. Both are rational identities between q-series.

use std::cmp::Ordering;

use rug::{Complex, Float, Rational};
use serde::Serialize;

use crate::coeff::{Coeff, CoeffMode};
use crate::error::{Error, Result};
use crate::forms::{eisenstein_series, FormSpec, Nodes};
use crate::report::{Deviation, Precondition, VerificationReport};
use crate::series::{LaurentSeries, T_PER_Q};
use crate::system::poly::algebraic_remainder;
use crate::system::{ResidueSystem, SolveOptions};

/// Constants of the Schwarzian and ODE identities for a given `n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchwarzTarget {
    pub n: usize,
    #[serde(serialize_with = "as_string")]
    pub r: Rational,
    /// `−r²/2`
    #[serde(serialize_with = "as_string")]
    pub normalized_constant: Rational,
    /// `r²/4`
    #[serde(serialize_with = "as_string")]
    pub ode_constant: Rational,
}

fn as_string<S: serde::Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

impl SchwarzTarget {
    pub fn new(n: usize) -> Self {
        let r = Rational::from((12 * n as i64 + 1, 6));
        let r2 = Rational::from(&r * &r);
        Self {
            n,
            normalized_constant: -Rational::from(&r2 / 2u32),
            ode_constant: Rational::from(&r2 / 4u32),
            r,
        }
    }

    /// `s/(2π²) = r²`, i.e. `s = 2π²(12n + 1)²/36`.
    pub fn s_over_2pi2(&self) -> Rational {
        Rational::from(&self.r * &self.r)
    }
}

/// `Ŝ(f) = θg − g²/2` with `g = θf/f`: the Schwarzian of a primitive of `f`
/// divided by `(2πi)²`.
pub fn schwarzian_normalized<C: Coeff>(f: &LaurentSeries<C>) -> Result<LaurentSeries<C>> {
    if f.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let g = f.theta().div(f)?;
    let half = Rational::from((1, 2));
    g.theta().sub(&g.mul(&g)?.scale_rational(&half))
}

/// Precision used for float-mode checks through `q^order`: the coefficients
/// of `fₙ` grow roughly like `e^(2πk)`, so about ten bits per q-power.
pub fn default_bits(order: u32) -> u32 {
    (64 + 10 * order).max(256)
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    /// Coefficients through `q^order` beyond the leading term are compared.
    pub order: u32,
    pub mode: CoeffMode,
    /// Defaults to 0 in exact mode and `1e-8` otherwise.
    pub tol: Option<f64>,
}

impl VerifyOptions {
    pub fn exact(order: u32) -> Self {
        Self { order, mode: CoeffMode::ExactRational, tol: None }
    }

    pub fn float(order: u32) -> Self {
        Self { order, mode: CoeffMode::ComplexFloat { bits: default_bits(order) }, tol: None }
    }

    fn tolerance(&self) -> f64 {
        self.tol.unwrap_or(if self.mode.is_exact() { 0.0 } else { 1e-8 })
    }

    fn rel(&self) -> i64 {
        T_PER_Q * self.order as i64 + 1
    }
}

/// Whether the nodes of `spec` solve the `(3, 4, 12)` system.
pub fn node_precondition(spec: &FormSpec) -> Result<Precondition> {
    let sys = ResidueSystem::standard(spec.n());
    let (value, tolerance) = match spec.nodes() {
        Nodes::Exact(xs) => {
            let v = exact_residual(xs)?;
            (v.iter().map(|q| q.to_f64().abs()).fold(0.0, f64::max), 0.0)
        }
        Nodes::Float(xs) => {
            let r = sys.residual(xs)?;
            (r.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max), 1e-9)
        }
        Nodes::MonicPoly(p) => {
            let rem = algebraic_remainder(&sys, p)?;
            (rem.iter().map(|q| q.to_f64().abs()).fold(0.0, f64::max), 0.0)
        }
    };
    Ok(Precondition {
        description: "nodes solve the residue system (3, 4, 12)".into(),
        value,
        tolerance,
        ok: value <= tolerance,
    })
}

/// The `(3, 4, 12)` residual in exact arithmetic.
pub fn exact_residual(xs: &[Rational]) -> Result<Vec<Rational>> {
    let mut out = Vec::with_capacity(xs.len());
    for (i, x) in xs.iter().enumerate() {
        let one_minus = Rational::from(1 - x);
        if x.cmp0() != Ordering::Greater || one_minus.cmp0() != Ordering::Greater {
            return Err(Error::OutsideDomain(format!("x[{i}] = {x} is not in (0, 1)")));
        }
        let mut acc = Rational::from(3) / one_minus - Rational::from(4) / x.clone();
        for (j, y) in xs.iter().enumerate() {
            if j != i {
                let d = Rational::from(x - y);
                if d.cmp0() == Ordering::Equal {
                    return Err(Error::OutsideDomain("repeated node".into()));
                }
                acc -= Rational::from(12) / d;
            }
        }
        out.push(acc);
    }
    Ok(out)
}

fn check_mode(spec: &FormSpec, mode: CoeffMode) -> Result<()> {
    if mode.is_exact() && !spec.is_exact() {
        return Err(Error::ExactModeUnsupported("float nodes"));
    }
    Ok(())
}

fn schwarzian_deviation<C: Coeff>(spec: &FormSpec, mode: CoeffMode, rel: i64) -> Result<(LaurentSeries<C>, usize)> {
    let f: LaurentSeries<C> = spec.f_series(mode, spec.f_lead() + rel)?;
    let s = schwarzian_normalized(&f)?;
    let target = SchwarzTarget::new(spec.n());
    let e4: LaurentSeries<C> = eisenstein_series(4, s.trunc())?.to_mode(mode);
    let rhs = e4.scale_rational(&target.normalized_constant);
    let diff = s.sub(&rhs)?;
    let checked = diff.trunc().max(0) as usize;
    Ok((diff, checked))
}

/// `Ŝ(fₙ) + (r²/2)·E4` over `t`-exponents `0 ≤ e ≤ 24·order`.
pub fn verify_schwarzian(spec: &FormSpec, opts: &VerifyOptions) -> Result<VerificationReport> {
    check_mode(spec, opts.mode)?;
    let (dev, trunc, checked) = match opts.mode {
        CoeffMode::ExactRational => {
            let (d, c) = schwarzian_deviation::<Rational>(spec, opts.mode, opts.rel())?;
            (d.max_abs_below(d.trunc()), d.trunc(), c)
        }
        CoeffMode::ComplexFloat { .. } => {
            let (d, c) = schwarzian_deviation::<Complex>(spec, opts.mode, opts.rel())?;
            (d.max_abs_below(d.trunc()), d.trunc(), c)
        }
    };
    let target = SchwarzTarget::new(spec.n());
    let report = VerificationReport::new(
        format!("schwarzian n={}: S(f) + {}*E4 = 0", spec.n(), Rational::from(-&target.normalized_constant)),
        opts.mode.to_string(),
        dev,
        opts.tolerance(),
        checked,
    )
    .with_trunc(trunc)
    .with_precondition(node_precondition(spec)?);
    Ok(report)
}

fn ode_deviation<C: Coeff>(spec: &FormSpec, mode: CoeffMode, rel: i64, constant: &Rational) -> Result<LaurentSeries<C>> {
    let y: LaurentSeries<C> = spec.y_series(mode, spec.y_lead() + rel)?;
    let e4: LaurentSeries<C> = eisenstein_series(4, rel)?.to_mode(mode);
    let lhs = y.theta().theta();
    let rhs = e4.mul(&y)?.scale_rational(constant);
    lhs.sub(&rhs)
}

/// `θ²yₙ − (r²/4)·E4·yₙ`.
pub fn verify_ode(spec: &FormSpec, opts: &VerifyOptions) -> Result<VerificationReport> {
    let c = SchwarzTarget::new(spec.n()).ode_constant;
    verify_ode_with_constant(spec, &c, opts)
}

/// The ODE check with an arbitrary constant in place of `r²/4`.
pub fn verify_ode_with_constant(spec: &FormSpec, constant: &Rational, opts: &VerifyOptions) -> Result<VerificationReport> {
    check_mode(spec, opts.mode)?;
    let rel = opts.rel();
    let (dev, trunc) = match opts.mode {
        CoeffMode::ExactRational => {
            let d = ode_deviation::<Rational>(spec, opts.mode, rel, constant)?;
            (d.max_abs_below(d.trunc()), d.trunc())
        }
        CoeffMode::ComplexFloat { .. } => {
            let d = ode_deviation::<Complex>(spec, opts.mode, rel, constant)?;
            (d.max_abs_below(d.trunc()), d.trunc())
        }
    };
    let report = VerificationReport::new(
        format!("ode n={}: theta^2 y - {constant}*E4*y = 0", spec.n()),
        opts.mode.to_string(),
        dev,
        opts.tolerance(),
        (trunc - spec.y_lead()).max(0) as usize,
    )
    .with_trunc(trunc)
    .with_precondition(node_precondition(spec)?);
    Ok(report)
}

/// The primitive `hₙ` of `fₙ` starts at `q^r`, `r = (12n + 1)/6 ∉ ℤ`, with a
/// nonzero leading coefficient.
pub fn frobenius_leading_check(spec: &FormSpec, order: u32, bits: u32) -> Result<VerificationReport> {
    let mode = CoeffMode::float(bits)?;
    let f: LaurentSeries<Complex> = spec.f_series(mode, spec.f_lead() + T_PER_Q * order as i64 + 1)?;
    let h = f.integrate_tau()?;
    let expected = spec.f_lead();
    let lead = h.lead().ok_or(Error::DivisionByZero)?;
    let a0 = h.leading_coeff().map_or(0.0, Coeff::magnitude);
    let r = SchwarzTarget::new(spec.n()).r;
    let r_integral = r.denom() == &1;
    let mut rep = VerificationReport::new(
        format!("frobenius n={}: lead of h is q^({r})", spec.n()),
        mode.to_string(),
        Deviation::Exact(Rational::from((lead - expected).abs())),
        0.0,
        1,
    )
    .with_trunc(h.trunc())
    .with_note(format!("lead exponent {lead} (t), leading coefficient magnitude {a0:e}"));
    if a0 == 0.0 || r_integral {
        rep.pass = false;
    }
    Ok(rep)
}

/// `fₙ` data from the `(3, 4, 12)` solver, refined to `bits`.
pub fn auto_spec(n: usize, bits: u32) -> Result<FormSpec> {
    let sys = ResidueSystem::standard(n);
    let sol = sys.solve(None, &SolveOptions::default())?;
    let refined = sys.refine(&sol, bits)?;
    FormSpec::float(refined.xs)
}

/// Rounds a float node to `bits` (for building deliberately perturbed specs).
pub fn float_nodes(xs: &[f64], bits: u32) -> Vec<Float> {
    xs.iter().map(|&x| Float::with_val(bits, x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{eta_power, eta_series};
    use num_complex::Complex64;

    const EXACT: CoeffMode = CoeffMode::ExactRational;

    #[test]
    fn constant_has_zero_schwarzian() {
        let one: LaurentSeries<Rational> = LaurentSeries::one(EXACT, 100);
        assert!(schwarzian_normalized(&one).unwrap().is_zero());
        let zero: LaurentSeries<Rational> = LaurentSeries::zero(EXACT, 10);
        assert!(schwarzian_normalized(&zero).is_err());
    }

    #[test]
    fn eta4_gives_minus_e4_over_72() {
        let f = eta_power(4, 600).unwrap();
        let s = schwarzian_normalized(&f).unwrap();
        let e4 = eisenstein_series(4, s.trunc()).unwrap().scale_rational(&Rational::from((-1, 72)));
        assert!(s.sub(&e4).unwrap().is_zero());
        assert_eq!(s.trunc(), 600);
    }

    #[test]
    fn mobius_invariance() {
        let f = eta_power(4, 200).unwrap();
        let a = schwarzian_normalized(&f).unwrap();
        let b = schwarzian_normalized(&f.scale_rational(&Rational::from((-7, 3)))).unwrap();
        assert!(a.sub(&b).unwrap().is_zero());
    }

    #[test]
    fn targets() {
        let t = SchwarzTarget::new(1);
        assert_eq!(t.r, Rational::from((13, 6)));
        assert_eq!(t.normalized_constant, Rational::from((-169, 72)));
        assert_eq!(t.ode_constant, Rational::from((169, 144)));
        assert_eq!(SchwarzTarget::new(0).normalized_constant, Rational::from((-1, 72)));
        assert_eq!(t.s_over_2pi2(), Rational::from((169, 36)));
    }

    #[test]
    fn n0_exact() {
        let spec = FormSpec::eta4();
        let r = verify_schwarzian(&spec, &VerifyOptions::exact(25)).unwrap();
        assert!(r.pass && r.max_abs_deviation.is_exact_zero(), "{r:?}");
        assert_eq!(r.trunc, Some(601));
        let o = verify_ode(&spec, &VerifyOptions::exact(25)).unwrap();
        assert!(o.pass && o.max_abs_deviation.is_exact_zero());
        let bad = verify_ode_with_constant(&spec, &Rational::from((1, 100)), &VerifyOptions::exact(5)).unwrap();
        assert!(!bad.pass);
    }

    #[test]
    fn n1_exact_and_negative_control() {
        let spec = FormSpec::exact(vec![Rational::from((4, 7))]).unwrap();
        let r = verify_schwarzian(&spec, &VerifyOptions::exact(10)).unwrap();
        assert!(r.pass && r.max_abs_deviation.is_exact_zero());
        let o = verify_ode(&spec, &VerifyOptions::exact(10)).unwrap();
        assert!(o.pass && o.max_abs_deviation.is_exact_zero());
        let wrong = FormSpec::exact(vec![Rational::from((1, 2))]).unwrap();
        let r = verify_schwarzian(&wrong, &VerifyOptions::exact(10)).unwrap();
        assert!(!r.pass);
        assert!(r.max_abs_deviation.to_f64() > 1.0);
        assert!(!r.precondition.unwrap().ok);
    }

    #[test]
    fn float_nodes_in_exact_mode_rejected() {
        let spec = FormSpec::from_f64(&[0.5], 53).unwrap();
        assert!(matches!(verify_schwarzian(&spec, &VerifyOptions::exact(2)), Err(Error::ExactModeUnsupported(_))));
    }

    #[test]
    fn frobenius_leads() {
        let r0 = frobenius_leading_check(&FormSpec::eta4(), 5, 128).unwrap();
        assert!(r0.pass);
        let spec = FormSpec::exact(vec![Rational::from((4, 7))]).unwrap();
        let h: LaurentSeries<Complex> = spec
            .f_series(CoeffMode::DOUBLE, 200)
            .unwrap()
            .integrate_tau()
            .unwrap();
        assert_eq!(h.lead(), Some(52));
        let c: LaurentSeries<Complex> = LaurentSeries::one(CoeffMode::DOUBLE, 20);
        assert!(matches!(c.integrate_tau(), Err(Error::LogarithmicPrimitive)));
    }

    /// `f^{(k)}(τ)` by the Cauchy integral on a circle, trapezoid rule.
    fn cauchy_derivative(f: &dyn Fn(Complex64) -> Complex64, tau: Complex64, k: u32) -> Complex64 {
        let m = 128;
        let rho = 0.1;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..m {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
            let w = Complex64::from_polar(rho, phi);
            acc += f(tau + w) / w.powu(k);
        }
        let fact: f64 = (1..=k).map(f64::from).product();
        acc * fact / m as f64
    }

    #[test]
    fn matches_finite_difference_schwarzian() {
        // f = t⁴(1 + t⁸); {h, τ} = f″/f − (3/2)(f′/f)² with h′ = f
        let tw = |tau: Complex64| (Complex64::new(0.0, 2.0 * std::f64::consts::PI / 24.0) * tau).exp();
        let f = move |tau: Complex64| {
            let t = tw(tau);
            t.powu(4) * (t.powu(8) + 1.0)
        };
        let tau = Complex64::new(0.0, 2.0);
        let f0 = f(tau);
        let f1 = cauchy_derivative(&f, tau, 1);
        let f2 = cauchy_derivative(&f, tau, 2);
        let oracle = f2 / f0 - 1.5 * (f1 / f0).powu(2);

        let mode = CoeffMode::DOUBLE;
        let one = Rational::from(1);
        let series: LaurentSeries<Complex> = LaurentSeries::from_terms(
            EXACT,
            vec![(4, one.clone()), (12, one)],
            604,
        )
        .to_mode(mode);
        let s = schwarzian_normalized(&series).unwrap();
        let v = s.eval(tau, &Default::default()).unwrap().value;
        let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        let got = v * two_pi_i * two_pi_i;
        assert!((got - oracle).norm() < 1e-10 * oracle.norm().max(1.0), "{got} vs {oracle}");
    }

    #[test]
    fn eta_itself_is_not_a_solution_with_wrong_constant() {
        let eta = eta_series(200).unwrap();
        let s = schwarzian_normalized(&eta).unwrap();
        let e4 = eisenstein_series(4, s.trunc()).unwrap().scale_rational(&Rational::from((-1, 72)));
        assert!(!s.sub(&e4).unwrap().is_zero());
    }
}
