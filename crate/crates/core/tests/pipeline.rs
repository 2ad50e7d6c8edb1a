//! End-to-end runs across modules.

use num_complex::Complex64;
use rug::{Float, Integer, Rational};

use modschwarz::analytic::{FormEvaluator, ModularEvaluator, Primitive};
use modschwarz::forms::{eta_power, EtaQuotientSpec, FormSpec};
use modschwarz::schwarz::{verify_ode, verify_schwarzian, VerifyOptions};
use modschwarz::system::poly::{diff_against_reference, rationalize};
use modschwarz::system::{ResidueSystem, SolveOptions};
use modschwarz::{CoeffMode, UnimodularMatrix};

/// Γ(1/4) to 34 digits.
const GAMMA_QUARTER: &str = "3.625609908221908311930685155867672";

fn gamma_quarter() -> f64 {
    GAMMA_QUARTER.parse().unwrap()
}

#[test]
fn eta_and_e4_at_i() {
    let ev = ModularEvaluator::standard();
    let i = Complex64::new(0.0, 1.0);
    let g = gamma_quarter();
    let pi = std::f64::consts::PI;
    let eta = g / (2.0 * pi.powf(0.75));
    assert!((ev.eta(i).unwrap() - eta).norm() < 1e-15);
    let e4 = 3.0 * g.powi(8) / (2.0 * pi).powi(6);
    assert!((ev.e4(i).unwrap() - e4).norm() < 1e-13);
}

#[test]
fn eta_high_precision_at_i() {
    let bits = 120;
    let eta: modschwarz::LaurentSeries<rug::Complex> =
        modschwarz::forms::eta_series(24 * 30 + 1).unwrap().to_mode(CoeffMode::float(bits).unwrap());
    // q = e^{-2π} at τ = i, so t = e^{-2π/24}
    let t = Float::with_val(bits, -2 * Float::with_val(bits, rug::float::Constant::Pi) / 24).exp();
    let mut sum = Float::with_val(bits, 0);
    for (e, c) in eta.terms() {
        sum += Float::with_val(bits, c.real() * Float::with_val(bits, rug::ops::Pow::pow(&t, e as i32)));
    }
    let g = Float::with_val(bits, Float::parse(GAMMA_QUARTER).unwrap());
    let pi = Float::with_val(bits, rug::float::Constant::Pi);
    let expect = g / (2 * rug::ops::Pow::pow(pi, Float::with_val(bits, 0.75)));
    let err = Float::with_val(bits, &sum - &expect).abs().to_f64();
    assert!(err < 1e-32, "{err:e}");
}

#[test]
fn solved_polynomials_give_exact_identities() {
    for n in 2..=3 {
        let sys = ResidueSystem::standard(n);
        let sol = sys.solve(None, &SolveOptions::default()).unwrap();
        let refined = sys.refine(&sol, 256).unwrap();
        let rat = rationalize(&sys, &refined, &Integer::from(1_000_000u32), 1e-40, 1e-9).unwrap();
        let p = rat.rationals().expect("every coefficient reconstructed");
        let cert = rat.certification.unwrap();
        assert!(cert.algebraic && cert.pass);
        let spec = FormSpec::monic_poly(p.clone()).unwrap();
        let s = verify_schwarzian(&spec, &VerifyOptions::exact(6)).unwrap();
        let o = verify_ode(&spec, &VerifyOptions::exact(6)).unwrap();
        assert!(s.pass && s.max_abs_deviation.is_exact_zero(), "n={n}: {s:?}");
        assert!(o.pass && o.max_abs_deviation.is_exact_zero());
        let diff = diff_against_reference(&sys, &p).unwrap();
        assert_eq!(diff.all_match, n == 3);
    }
}

#[test]
fn expected_monic_polynomials() {
    let q = |a: i64, b: i64| Rational::from((a, b));
    let expect = [
        vec![q(1, 1), q(-20, 19), q(40, 247)],
        vec![q(1, 1), q(-48, 31), q(96, 155), q(-128, 2945)],
        vec![q(1, 1), q(-88, 43), q(2112, 1591), q(-14080, 49321), q(2816, 246605)],
        vec![q(1, 1), q(-28, 11), q(16, 7), q(-256, 301), q(1280, 11137), q(-1024, 345247)],
    ];
    for (k, e) in expect.iter().enumerate() {
        let n = k + 2;
        let sys = ResidueSystem::standard(n);
        let sol = sys.solve(None, &SolveOptions::default()).unwrap();
        let refined = sys.refine(&sol, 300).unwrap();
        let rat = rationalize(&sys, &refined, &Integer::from(10_000_000u32), 1e-50, 1e-9).unwrap();
        assert_eq!(&rat.rationals().unwrap(), e, "n={n}");
    }
}

#[test]
fn perturbed_nodes_fail_the_identity() {
    let sys = ResidueSystem::standard(2);
    let sol = sys.solve(None, &SolveOptions::default()).unwrap();
    let mut xs = sol.xs.clone();
    xs[0] += 1e-6;
    let spec = FormSpec::from_f64(&xs, 200).unwrap();
    let r = verify_schwarzian(&spec, &VerifyOptions { tol: Some(1e-8), ..VerifyOptions::float(5) }).unwrap();
    assert!(!r.pass);
    assert!(!r.precondition.unwrap().ok);
}

#[test]
fn eta_quotient_string_matches_family() {
    let parsed: EtaQuotientSpec = "eta(1/4)^8/eta(1/2)^4".parse().unwrap();
    assert_eq!(parsed, EtaQuotientSpec::family_two(4).unwrap());
    let a = parsed.series(240).unwrap();
    let b = EtaQuotientSpec::family_two(4).unwrap().series(240).unwrap();
    assert!(a.series.sub(&b.series).unwrap().is_zero());
}

#[test]
fn period_of_eta4_under_t_two_ways() {
    let ev = ModularEvaluator::standard();
    let prim = Primitive::new(ev, &FormSpec::eta4()).unwrap();
    let h = eta_power(4, 2000).unwrap().to_mode::<rug::Complex>(CoeffMode::DOUBLE).integrate_tau().unwrap();
    let opts = modschwarz::series::EvalOptions::default();
    let i = Complex64::new(0.0, 1.0);
    let oracle = h.eval(i, &opts).unwrap().value - h.eval(i - 1.0, &opts).unwrap().value;
    let omega = prim.omega(&UnimodularMatrix::T).unwrap();
    assert!((omega.value - oracle).norm() < 1e-8);
    assert!(omega.error < 1e-8);
}

#[test]
fn f1_transforms_under_general_matrices() {
    let ev = ModularEvaluator::new(0.05).unwrap();
    let spec = FormSpec::exact(vec![Rational::from((4, 7))]).unwrap();
    let f = FormEvaluator::new(&ev, &spec);
    let tau = Complex64::new(0.13, 1.1);
    for g in [UnimodularMatrix::new(2, 1, 1, 1).unwrap(), UnimodularMatrix::new(3, -1, 4, -1).unwrap()] {
        let lhs = f.direct(g.act(tau)).unwrap();
        let chi = modschwarz::character_chi(&g).to_c64();
        let j = g.cocycle(tau);
        let rhs = chi * j * j * f.direct(tau).unwrap();
        assert!((lhs - rhs).norm() < 1e-9 * rhs.norm(), "{g}");
    }
}
