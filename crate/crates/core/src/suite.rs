//! The acceptance suite: ten criteria with pinned tolerances and time
//! budgets, plus the per-`n` summary table.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rug::{Integer, Rational};
use serde::Serialize;

use crate::analytic::{
    contour_residue, equivariance_check, eta_multiplier_check, generator_checks, invert_j_on_arc, residue_report,
    rho_homomorphism_random, FormEvaluator, ModularEvaluator, Primitive, DEFAULT_DELTA, DEFAULT_SAMPLES,
};
use crate::error::Result;
use crate::forms::{eisenstein_series, eta_power, EtaQuotientSpec, FormSpec};
use crate::schwarz::{auto_spec, default_bits, frobenius_leading_check, verify_ode, verify_schwarzian, VerifyOptions};
use crate::series::T_PER_Q;
use crate::system::poly::{diff_against_reference, rationalize, ReferenceDiff};
use crate::system::{ResidueSystem, SolveOptions};
use crate::UnimodularMatrix;

pub const EXACT_ORDER: u32 = 25;
pub const FLOAT_ORDER: u32 = 100;
pub const RAMANUJAN_ORDER: i64 = 50;
pub const SOLVER_TOL: f64 = 1e-12;
pub const N1_ROOT_TOL: f64 = 1e-12;
pub const FLOAT_IDENTITY_TOL: f64 = 1e-8;
pub const CERT_TOL: f64 = 1e-9;
pub const RATIONAL_MAX_DEN: u64 = 100_000_000;
pub const RATIONAL_TOL: f64 = 1e-25;
pub const ARC_TOL: f64 = 1e-10;
pub const RESIDUE_TOL: f64 = 1e-6;
pub const NEGATIVE_RESIDUE_MIN: f64 = 1e-3;
pub const TRANSFORM_TOL: f64 = 1e-6;
pub const ETA_MULTIPLIER_TOL: f64 = 1e-9;
pub const ETA_RANDOM_MATRICES: usize = 100;
pub const ETA_ENTRY_BOUND: i64 = 12;
pub const RHO_TOL: f64 = 1e-6;
pub const RHO_PAIRS: usize = 25;
pub const RHO_WORD_LEN: usize = 4;
pub const EQUIVARIANCE_TOL: f64 = 1e-6;
pub const SCALE_N: usize = 10;
pub const SCALE_RESIDUAL: f64 = 1e-10;
pub const RESTARTS: usize = 20;
pub const RESTART_AGREEMENT: f64 = 1e-9;
pub const SEED: u64 = 20240601;

pub const CRITERIA: usize = 10;

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub title: &'static str,
    pub pass: bool,
    pub checks_pass: bool,
    pub elapsed_seconds: f64,
    pub budget_seconds: f64,
    pub detail: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {} {}: {} ({:.2}s of {}s) {}",
            self.id,
            self.title,
            if self.pass { "PASS" } else { "FAIL" },
            self.elapsed_seconds,
            self.budget_seconds,
            self.detail
        )
    }
}

type Outcome = (bool, String);

fn samples() -> [Complex64; 3] {
    [Complex64::new(0.2, 0.9), Complex64::new(-0.35, 0.8), Complex64::new(0.1, 1.3)]
}

fn spec_for(n: usize) -> Result<FormSpec> {
    if n == 0 {
        Ok(FormSpec::eta4())
    } else {
        auto_spec(n, 128)
    }
}

fn c1_base_case() -> Result<Outcome> {
    let spec = FormSpec::eta4();
    let s = verify_schwarzian(&spec, &VerifyOptions::exact(EXACT_ORDER))?;
    let o = verify_ode(&spec, &VerifyOptions::exact(EXACT_ORDER))?;
    let ok = s.pass && o.pass && s.max_abs_deviation.is_exact_zero() && o.max_abs_deviation.is_exact_zero();
    Ok((ok, format!("S(eta^4) + E4/72 max dev {}, ODE max dev {}, through q^{EXACT_ORDER}", s.max_abs_deviation, o.max_abs_deviation)))
}

fn c2_ramanujan() -> Result<Outcome> {
    let trunc = T_PER_Q * RAMANUJAN_ORDER + 1;
    let e2 = eisenstein_series(2, trunc)?;
    let e4 = eisenstein_series(4, trunc)?;
    let bare = e2.mul(&e2)?.sub(&e4)?;
    let ok = e2.theta().sub(&bare.scale_rational(&Rational::from((1, 12))))?.is_zero();
    let bare_fails = !e2.theta().sub(&bare)?.is_zero();
    Ok((ok && bare_fails, format!("theta E2 = (E2^2 - E4)/12 exact through q^{RAMANUJAN_ORDER}; form without 1/12 fails: {bare_fails}")))
}

fn c3_n1() -> Result<Outcome> {
    let sol = ResidueSystem::standard(1).solve(None, &SolveOptions::default())?;
    let err = (sol.xs[0] - 4.0 / 7.0).abs();
    let spec = FormSpec::exact(vec![Rational::from((4, 7))])?;
    let s = verify_schwarzian(&spec, &VerifyOptions::exact(EXACT_ORDER))?;
    let o = verify_ode(&spec, &VerifyOptions::exact(EXACT_ORDER))?;
    let ok = err < N1_ROOT_TOL && s.pass && o.pass && s.max_abs_deviation.is_exact_zero() && o.max_abs_deviation.is_exact_zero();
    Ok((ok, format!("x = {:.15}, |x - 4/7| = {err:.1e}; S + (169/72)E4 dev {}, ODE (169/144) dev {}", sol.xs[0], s.max_abs_deviation, o.max_abs_deviation)))
}

/// One row of the per-`n` summary.
#[derive(Clone, Debug, Serialize)]
pub struct ExampleRow {
    pub n: usize,
    pub xs: Vec<f64>,
    pub residual_norm: f64,
    pub schwarzian_deviation: f64,
    pub ode_deviation: f64,
    pub order: u32,
    pub monic_polynomial: Option<Vec<String>>,
    pub certification_residual: Option<f64>,
    pub algebraic: bool,
    pub reference: Option<ReferenceDiff>,
}

impl ExampleRow {
    pub fn pass(&self) -> bool {
        self.residual_norm < SOLVER_TOL
            && self.schwarzian_deviation < FLOAT_IDENTITY_TOL
            && self.ode_deviation < FLOAT_IDENTITY_TOL
            && self.certification_residual.is_some_and(|r| r < CERT_TOL)
            && self.algebraic
    }
}

/// Solve, verify through `q^FLOAT_ORDER` in float mode, rationalize and
/// compare with the reference polynomial.
pub fn example_row(n: usize) -> Result<ExampleRow> {
    let bits = default_bits(FLOAT_ORDER);
    let sys = ResidueSystem::standard(n);
    let sol = sys.solve(None, &SolveOptions::default())?;
    let refined = sys.refine(&sol, bits)?;
    let spec = FormSpec::float(refined.xs.clone())?;
    let opts = VerifyOptions { tol: Some(FLOAT_IDENTITY_TOL), ..VerifyOptions::float(FLOAT_ORDER) };
    let s = verify_schwarzian(&spec, &opts)?;
    let o = verify_ode(&spec, &opts)?;
    let rat = rationalize(&sys, &refined, &Integer::from(RATIONAL_MAX_DEN), RATIONAL_TOL, CERT_TOL)?;
    let rationals = rat.rationals();
    let reference = rationals.as_ref().and_then(|q| diff_against_reference(&sys, q));
    Ok(ExampleRow {
        n,
        xs: sol.xs.clone(),
        residual_norm: sol.residual_norm,
        schwarzian_deviation: s.max_abs_deviation.to_f64(),
        ode_deviation: o.max_abs_deviation.to_f64(),
        order: FLOAT_ORDER,
        monic_polynomial: rationals.map(|q| q.iter().map(Rational::to_string).collect()),
        certification_residual: rat.certification.as_ref().map(|c| c.root_residual),
        algebraic: rat.certification.as_ref().is_some_and(|c| c.algebraic),
        reference,
    })
}

fn c4_examples(n_max: usize) -> Result<Outcome> {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in 2..=n_max.max(2) {
        let row = example_row(n)?;
        let diff_note = match &row.reference {
            Some(d) if d.all_match => "matches reference".to_string(),
            Some(d) => format!(
                "differs from reference at degrees {:?}",
                d.coefficients.iter().filter(|c| !c.matches).map(|c| c.degree).collect::<Vec<_>>()
            ),
            None => "no reference polynomial".to_string(),
        };
        ok &= row.pass() && (n > 4 || row.reference.is_some());
        parts.push(format!(
            "n={n}: residual {:.1e}, S dev {:.1e}, ODE dev {:.1e}, cert {:.1e}, {diff_note}",
            row.residual_norm,
            row.schwarzian_deviation,
            row.ode_deviation,
            row.certification_residual.unwrap_or(f64::NAN)
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn c5_leads(n_max: usize) -> Result<Outcome> {
    let mut ok = true;
    let mut leads = Vec::new();
    for n in 0..=n_max {
        let spec = spec_for(n)?;
        let rep = frobenius_leading_check(&spec, 2, 128)?;
        ok &= spec.f_lead() == 4 + 48 * n as i64 && rep.pass;
        leads.push(spec.f_lead().to_string());
    }
    Ok((ok, format!("f_n and h_n leads (t-exponents) {}, r = (12n+1)/6 non-integral", leads.join(","))))
}

fn c6_residues(n_max: usize) -> Result<Outcome> {
    let mut ok = true;
    let mut worst_res = 0.0f64;
    let mut worst_j = 0.0f64;
    for n in 1..=n_max.max(1) {
        let rep = residue_report(&spec_for(n)?, DEFAULT_DELTA, DEFAULT_SAMPLES, RESIDUE_TOL)?;
        for p in &rep.poles {
            ok &= p.j_error < ARC_TOL && p.contour.pole_order == 2;
            worst_j = worst_j.max(p.j_error);
        }
        worst_res = worst_res.max(rep.max_abs_residue);
        ok &= rep.pass;
    }
    let ev = ModularEvaluator::standard();
    let bad = FormEvaluator::from_nodes(ev, vec![0.5]);
    let w = invert_j_on_arc(ev, 0.5)?.tau;
    let neg = contour_residue(&|z| bad.direct(z), w, DEFAULT_DELTA, DEFAULT_SAMPLES)?;
    ok &= neg.residue.norm() > NEGATIVE_RESIDUE_MIN;
    Ok((ok, format!("max |J(w)-x| {worst_j:.1e}, max |Res| {worst_res:.1e}, all orders 2; control x=1/2 |Res| {:.3e}", neg.residue.norm())))
}

fn c7_modularity() -> Result<Outcome> {
    let mut ok = true;
    let mut worst = 0.0f64;
    for n in 0..=2 {
        for r in generator_checks(&spec_for(n)?, &samples(), TRANSFORM_TOL)? {
            ok &= r.pass;
            worst = worst.max(r.max_abs_deviation.to_f64());
        }
    }
    let mut rng = StdRng::seed_from_u64(SEED);
    let eta = eta_multiplier_check(&mut rng, ETA_RANDOM_MATRICES, ETA_ENTRY_BOUND, ETA_MULTIPLIER_TOL)?;
    ok &= eta.pass;
    Ok((ok, format!(
        "T and S laws for n<=2 max rel dev {worst:.1e}; eta multiplier on {ETA_RANDOM_MATRICES} random matrices max rel dev {:.1e}",
        eta.max_abs_deviation.to_f64()
    )))
}

fn c8_representation() -> Result<Outcome> {
    let ev = ModularEvaluator::standard();
    let prim0 = Primitive::new(ev, &FormSpec::eta4())?;
    let mut rng = StdRng::seed_from_u64(SEED);
    let hom = rho_homomorphism_random(&prim0, &mut rng, RHO_PAIRS, RHO_WORD_LEN, RHO_TOL)?;
    let mut ok = hom.pass;
    let mut worst = 0.0f64;
    let prim1 = Primitive::new(ev, &FormSpec::exact(vec![Rational::from((4, 7))])?)?;
    let st = UnimodularMatrix::S * UnimodularMatrix::T;
    for prim in [&prim0, &prim1] {
        for g in [UnimodularMatrix::S, UnimodularMatrix::T, st] {
            let (rep, _) = equivariance_check(prim, &g, &samples(), EQUIVARIANCE_TOL)?;
            ok &= rep.pass;
            worst = worst.max(rep.max_abs_deviation.to_f64());
        }
    }
    Ok((ok, format!(
        "rho homomorphism over {RHO_PAIRS} pairs max dev {:.1e}; equivariance n in {{0,1}} max dev {worst:.1e}",
        hom.max_abs_deviation.to_f64()
    )))
}

fn c9_eta_quotients() -> Result<Outcome> {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [2i64, 3, 4, 6] {
        let fams = [
            ("1", EtaQuotientSpec::family_two(n)),
            ("2", EtaQuotientSpec::family_three(n)),
            ("3", EtaQuotientSpec::family_product(n)),
        ];
        for (name, spec) in fams {
            match spec {
                Ok(spec) => {
                    let s = spec.series(24 * 20)?;
                    ok &= !s.has_negative_exponents();
                    parts.push(format!("fam{name} n={n} lead {}", s.lead_in_t().map_or("none".into(), |q| q.to_string())));
                }
                Err(_) => parts.push(format!("fam{name} n={n} undefined")),
            }
        }
    }
    let f3 = EtaQuotientSpec::family_product(1)?.series(24 * 30)?;
    let same = f3.refinement == 1 && f3.series.sub(&eta_power(4, 24 * 30 - 4)?)?.is_zero();
    ok &= same;
    Ok((ok, format!("no negative exponents ({}); family 3 at n=1 equals eta^4: {same}", parts.join(", "))))
}

fn c10_scalability() -> Result<Outcome> {
    let sys = ResidueSystem::standard(SCALE_N);
    // the double-precision residual floor at n = 10 is a few 1e-12
    let opts = SolveOptions { tol: SCALE_RESIDUAL, ..SolveOptions::default() };
    let base = sys.solve(None, &opts)?;
    let mut rng = StdRng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    let mut failures = 0;
    for _ in 0..RESTARTS {
        let mut init: Vec<f64> = (0..SCALE_N).map(|_| rng.gen_range(0.01..0.99)).collect();
        init.sort_by(f64::total_cmp);
        match sys.solve(Some(&init), &opts) {
            Ok(s) => {
                let d = s.xs.iter().zip(&base.xs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                worst = worst.max(d);
            }
            Err(_) => failures += 1,
        }
    }
    let ok = base.residual_norm < SCALE_RESIDUAL && failures == 0 && worst < RESTART_AGREEMENT;
    Ok((ok, format!(
        "n={SCALE_N} residual {:.1e} in {} iterations; {RESTARTS} restarts, {failures} failed, max disagreement {worst:.1e}",
        base.residual_norm, base.iterations
    )))
}

pub fn title(id: usize) -> &'static str {
    match id {
        1 => "base case n=0 exact",
        2 => "Ramanujan E2 identity",
        3 => "n=1 solve and exact identities",
        4 => "n=2..4 float identities and polynomials",
        5 => "leading exponents",
        6 => "residues at the poles",
        7 => "modularity with character",
        8 => "representation and equivariance",
        9 => "eta-quotient families",
        10 => "scalability n=10",
        _ => "unknown",
    }
}

pub fn budget(id: usize) -> Duration {
    Duration::from_secs(match id {
        1 => 5,
        2 | 5 => 1,
        3 => 30,
        4 | 6 | 8 => 120,
        7 | 10 => 60,
        9 => 10,
        _ => 0,
    })
}

/// Runs criterion `id` (1 to 10); `n_max` bounds the `n` loops of 4, 5 and 6.
pub fn run_criterion(id: usize, n_max: usize) -> CriterionResult {
    let t = Instant::now();
    let outcome = match id {
        1 => c1_base_case(),
        2 => c2_ramanujan(),
        3 => c3_n1(),
        4 => c4_examples(n_max),
        5 => c5_leads(n_max),
        6 => c6_residues(n_max),
        7 => c7_modularity(),
        8 => c8_representation(),
        9 => c9_eta_quotients(),
        10 => c10_scalability(),
        _ => Err(crate::Error::InvalidInput(format!("no criterion {id}"))),
    };
    let elapsed = t.elapsed();
    let (checks_pass, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    let budget = budget(id);
    CriterionResult {
        id,
        title: title(id),
        pass: checks_pass && elapsed <= budget,
        checks_pass,
        elapsed_seconds: elapsed.as_secs_f64(),
        budget_seconds: budget.as_secs_f64(),
        detail,
    }
}

/// All criteria in order; with `parallel` they run on separate threads.
pub fn run_all(n_max: usize, parallel: bool) -> Vec<CriterionResult> {
    if !parallel {
        return (1..=CRITERIA).map(|id| run_criterion(id, n_max)).collect();
    }
    std::thread::scope(|s| {
        let handles: Vec<_> = (1..=CRITERIA).map(|id| s.spawn(move || run_criterion(id, n_max))).collect();
        handles.into_iter().map(|h| h.join().expect("criterion thread panicked")).collect()
    })
}
