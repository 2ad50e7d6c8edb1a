use std::str::FromStr;

use modschwarz::analytic::{
    equivariance_check, residue_report, FormEvaluator, ModularEvaluator, Primitive,
};
use modschwarz::forms::{delta_series, eisenstein_series, eta_power, eta_series, j_series};
use modschwarz::forms::eta_quotient::EtaQuotientSummary;
use modschwarz::rug::{Complex, Float, Integer, Rational};
use modschwarz::schwarz::{auto_spec, default_bits, verify_ode, verify_schwarzian, VerifyOptions};
use modschwarz::series::{SeriesDump, T_PER_Q};
use modschwarz::suite::{self, CriterionResult, ExampleRow};
use modschwarz::system::poly::{diff_against_reference, rationalize};
use modschwarz::system::{RefinedSolution, SolutionVector, SolveOptions};
use modschwarz::{character_chi, CoeffMode, EtaQuotientSpec, FormSpec, LaurentSeries, ResidueSystem, UnimodularMatrix};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cache::{self, Cache};
use crate::config::{Mode, RunConfig};
use crate::{plot, CliError, Outcome};

pub const SOLVE_TOL: f64 = 1e-12;
pub const REFINE_BITS: u32 = 256;
pub const MAX_DEN: u64 = 100_000_000;
pub const CERT_TOL: f64 = 1e-9;

/// `"4/7"`, `"-3"`, `"0.125"` or `"1.5e-3"` as an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational, CliError> {
    let s = s.trim();
    let bad = || CliError::config(format!("not a rational number: {s:?}"));
    if s.contains('/') {
        return Rational::from_str(s).map_err(|_| bad());
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(k) => (&s[..k], s[k + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if frac.starts_with(['+', '-']) || (int.is_empty() && frac.is_empty()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let num = Integer::from_str(if digits == "-" || digits == "+" { "0" } else { &digits }).map_err(|_| bad())?;
    let shift = exp - frac.len() as i32;
    let ten = Integer::from(Integer::u_pow_u(10, shift.unsigned_abs()));
    Ok(if shift >= 0 { Rational::from(num * ten) } else { Rational::from((num, ten)) })
}

pub fn parse_list<T>(s: &str, each: impl Fn(&str) -> Result<T, CliError>) -> Result<Vec<T>, CliError> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(each).collect()
}

fn parse_f64(s: &str) -> Result<f64, CliError> {
    s.trim().parse().map_err(|_| CliError::config(format!("not a number: {s:?}")))
}

fn parse_i64(s: &str) -> Result<i64, CliError> {
    s.trim().parse().map_err(|_| CliError::config(format!("not an integer: {s:?}")))
}

pub fn parse_gamma(s: &str) -> Result<UnimodularMatrix, CliError> {
    let v = parse_list(s, parse_i64)?;
    if v.len() != 4 {
        return Err(CliError::config(format!("gamma needs four entries a,b,c,d, got {s:?}")));
    }
    Ok(UnimodularMatrix::new(v[0], v[1], v[2], v[3])?)
}

pub fn parse_tau(s: &str) -> Result<Complex64, CliError> {
    let v = parse_list(s, parse_f64)?;
    if v.len() != 2 || v[1] <= 0.0 {
        return Err(CliError::config(format!("tau needs re,im with im > 0, got {s:?}")));
    }
    Ok(Complex64::new(v[0], v[1]))
}

fn float_bits(cfg: &RunConfig) -> u32 {
    cfg.bits.unwrap_or_else(|| default_bits(cfg.order))
}

/// Solve and refine, through the cache when one is configured.
fn solve_refined(
    sys: &ResidueSystem,
    init: Option<&[f64]>,
    tol: f64,
    bits: u32,
) -> Result<(SolutionVector, RefinedSolution, bool), CliError> {
    let cache = Cache::from_env();
    if let Some(c) = &cache {
        if let Some((sol, refined)) = c.load(sys, bits, tol) {
            return Ok((sol, refined, true));
        }
    }
    let sol = sys.solve(init, &SolveOptions { tol, ..SolveOptions::default() })?;
    let refined = sys.refine(&sol, bits)?;
    if let Some(c) = &cache {
        c.store(&cache::Entry::new(sys, &sol, &refined), sys)
            .map_err(|e| CliError::io(format!("cache {}: {e}", c.dir().display())))?;
    }
    Ok((sol, refined, false))
}

fn rational_tol(bits: u32) -> f64 {
    1e-25f64.max(2f64.powi(24 - bits as i32))
}

pub struct SolveArgs {
    pub init: Option<Vec<f64>>,
    pub max_den: Option<u64>,
}

pub fn solve(cfg: &RunConfig, args: SolveArgs) -> Result<Outcome, CliError> {
    let sys = ResidueSystem::new(cfg.n, cfg.a, cfg.b, cfg.c)?;
    let tol = cfg.tol.unwrap_or(SOLVE_TOL);
    let bits = cfg.bits.unwrap_or(REFINE_BITS);
    let (sol, refined, cached) = solve_refined(&sys, args.init.as_deref(), tol, bits)?;
    let max_den = Integer::from(args.max_den.unwrap_or(MAX_DEN));
    let poly = rationalize(&sys, &refined, &max_den, rational_tol(bits), CERT_TOL)?;
    let reference = poly.rationals().and_then(|q| diff_against_reference(&sys, &q));
    let cert_ok = poly.certification.as_ref().is_none_or(|c| c.pass);
    let mut plots = Vec::new();
    if cfg.plot {
        let p = cfg.plot_path("convergence");
        plot::convergence(&sol.history, tol, &p).map_err(|e| CliError::io(format!("{}: {e}", p.display())))?;
        plots.push(p.display().to_string());
    }
    let doc = json!({
        "system": sys,
        "xs": sol.xs,
        "residual_norm": sol.residual_norm,
        "iterations": sol.iterations,
        "history": sol.history,
        "cached": cached,
        "refined": {
            "bits": refined.bits,
            "residual_norm": refined.residual_norm,
            "iterations": refined.iterations,
            "xs": refined.xs.iter().map(|x| x.to_string_radix(10, Some(30))).collect::<Vec<_>>(),
        },
        "poly": poly,
        "reference_diff": reference,
        "plots": plots,
        "pass": sol.residual_norm < tol && cert_ok,
    });
    Ok(Outcome::new(doc))
}

/// Nodes for `fₙ`: explicit `xs`, or the solver's. Exact mode needs an
/// exact solution, taken from the certified rational polynomial.
pub fn resolve_spec(cfg: &RunConfig, xs: Option<&str>, bits: u32) -> Result<(FormSpec, Value), CliError> {
    if let Some(list) = xs {
        let spec = match cfg.mode {
            Mode::Exact => FormSpec::exact(parse_list(list, parse_rational)?)?,
            Mode::Float => {
                let v = parse_list(list, |s| {
                    Float::parse(s.trim())
                        .map(|p| Float::with_val(bits, p))
                        .map_err(|_| CliError::config(format!("not a number: {s:?}")))
                })?;
                FormSpec::float(v)?
            }
        };
        if spec.n() != cfg.n && cfg.n != 0 {
            return Err(CliError::config(format!("--xs has {} entries but n = {}", spec.n(), cfg.n)));
        }
        return Ok((spec, json!("given")));
    }
    if cfg.n == 0 {
        return Ok((FormSpec::eta4(), json!("none")));
    }
    match cfg.mode {
        Mode::Float => Ok((auto_spec(cfg.n, bits)?, json!("solver, refined"))),
        Mode::Exact => {
            let sys = ResidueSystem::standard(cfg.n);
            let (_, refined, _) = solve_refined(&sys, None, SOLVE_TOL, REFINE_BITS)?;
            let poly = rationalize(&sys, &refined, &Integer::from(MAX_DEN), rational_tol(REFINE_BITS), CERT_TOL)?;
            let exact = poly.certification.as_ref().is_some_and(|c| c.algebraic);
            match poly.rationals() {
                Some(q) if exact => {
                    let source = json!({ "monic_polynomial": poly.rational_coeffs });
                    Ok((FormSpec::monic_poly(q)?, source))
                }
                _ => Err(CliError::numerical(format!(
                    "no certified rational polynomial for n = {}; use --mode float",
                    cfg.n
                ))),
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Identity {
    Schwarzian,
    Ode,
}

pub fn verify(cfg: &RunConfig, identity: Identity, xs: Option<&str>) -> Result<Outcome, CliError> {
    let bits = float_bits(cfg);
    let (spec, source) = resolve_spec(cfg, xs, bits)?;
    let mode = match cfg.mode {
        Mode::Exact => CoeffMode::ExactRational,
        Mode::Float => CoeffMode::float(bits)?,
    };
    let opts = VerifyOptions { order: cfg.order, mode, tol: cfg.tol };
    let report = match identity {
        Identity::Schwarzian => verify_schwarzian(&spec, &opts)?,
        Identity::Ode => verify_ode(&spec, &opts)?,
    };
    let plots = modulus_plot(cfg, &spec)?;
    let pass = report.pass;
    let mut doc = serde_json::to_value(&report).map_err(CliError::json)?;
    doc["n"] = json!(spec.n());
    doc["nodes"] = source;
    if !plots.is_empty() {
        doc["plots"] = json!(plots);
    }
    Ok(Outcome { doc, pass })
}

fn modulus_plot(cfg: &RunConfig, spec: &FormSpec) -> Result<Vec<String>, CliError> {
    if !cfg.plot {
        return Ok(Vec::new());
    }
    let f = FormEvaluator::new(ModularEvaluator::standard(), spec);
    let p = cfg.plot_path("modulus");
    plot::modulus(&f, &p).map_err(|e| CliError::io(format!("{}: {e}", p.display())))?;
    Ok(vec![p.display().to_string()])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Expandable {
    Eta,
    EtaPower,
    E2,
    E4,
    E6,
    Delta,
    J,
    F,
    Y,
    Quotient,
}

pub struct ExpandArgs<'a> {
    pub what: Expandable,
    pub power: i64,
    pub quotient: Option<&'a str>,
    pub xs: Option<&'a str>,
    pub dense: bool,
}

#[derive(Serialize)]
struct ExpandDoc {
    series: String,
    #[serde(flatten)]
    dump: SeriesDump,
    #[serde(skip_serializing_if = "Option::is_none")]
    quotient: Option<EtaQuotientSummary>,
}

fn dump_in_mode(s: &LaurentSeries<Rational>, mode: CoeffMode, dense: bool) -> SeriesDump {
    match mode {
        CoeffMode::ExactRational => s.dump(dense),
        CoeffMode::ComplexFloat { .. } => s.to_mode::<Complex>(mode).dump(dense),
    }
}

pub fn expand(cfg: &RunConfig, args: ExpandArgs<'_>) -> Result<Outcome, CliError> {
    let bits = float_bits(cfg);
    let mode = match cfg.mode {
        Mode::Exact => CoeffMode::ExactRational,
        Mode::Float => CoeffMode::float(bits)?,
    };
    let rel = T_PER_Q * cfg.order as i64 + 1;
    let mut quotient = None;
    let (name, dump) = match args.what {
        Expandable::Eta => ("eta".to_string(), dump_in_mode(&eta_series(1 + rel)?, mode, args.dense)),
        Expandable::EtaPower => (format!("eta^{}", args.power), dump_in_mode(&eta_power(args.power, rel)?, mode, args.dense)),
        Expandable::E2 | Expandable::E4 | Expandable::E6 => {
            let k = match args.what {
                Expandable::E2 => 2,
                Expandable::E4 => 4,
                _ => 6,
            };
            (format!("E{k}"), dump_in_mode(&eisenstein_series(k, rel)?, mode, args.dense))
        }
        Expandable::Delta => ("Delta".into(), dump_in_mode(&delta_series(24 + rel)?, mode, args.dense)),
        Expandable::J => ("J".into(), dump_in_mode(&j_series(rel - 24)?, mode, args.dense)),
        Expandable::F | Expandable::Y => {
            let (spec, _) = resolve_spec(cfg, args.xs, bits)?;
            let is_f = args.what == Expandable::F;
            let trunc = if is_f { spec.f_lead() } else { spec.y_lead() } + rel;
            let name = format!("{}_{}", if is_f { "f" } else { "y" }, spec.n());
            let dump = match mode {
                CoeffMode::ExactRational => {
                    let s: LaurentSeries<Rational> = if is_f { spec.f_series(mode, trunc)? } else { spec.y_series(mode, trunc)? };
                    s.dump(args.dense)
                }
                CoeffMode::ComplexFloat { .. } => {
                    let s: LaurentSeries<Complex> = if is_f { spec.f_series(mode, trunc)? } else { spec.y_series(mode, trunc)? };
                    s.dump(args.dense)
                }
            };
            (name, dump)
        }
        Expandable::Quotient => {
            let text = args.quotient.ok_or_else(|| CliError::config("expand quotient needs --quotient"))?;
            let spec: EtaQuotientSpec = text.parse()?;
            let s = spec.series(rel)?;
            quotient = Some(EtaQuotientSummary::new(&spec, &s));
            (spec.to_string(), dump_in_mode(&s.series, mode, args.dense))
        }
    };
    let doc = ExpandDoc { series: name, dump, quotient };
    Ok(Outcome::new(serde_json::to_value(doc).map_err(CliError::json)?))
}

pub struct ResidueArgs<'a> {
    pub xs: Option<&'a str>,
    pub delta: f64,
    pub samples: usize,
}

pub fn residue(cfg: &RunConfig, args: ResidueArgs<'_>) -> Result<Outcome, CliError> {
    let spec = match args.xs {
        Some(list) => FormSpec::from_f64(&parse_list(list, parse_f64)?, 128)?,
        None if cfg.n == 0 => FormSpec::eta4(),
        None => auto_spec(cfg.n, 128)?,
    };
    let report = residue_report(&spec, args.delta, args.samples, cfg.tol.unwrap_or(1e-6))?;
    let plots = modulus_plot(cfg, &spec)?;
    let pass = report.pass;
    let mut doc = serde_json::to_value(&report).map_err(CliError::json)?;
    if !plots.is_empty() {
        doc["plots"] = json!(plots);
    }
    Ok(Outcome { doc, pass })
}

pub fn default_samples() -> Vec<Complex64> {
    vec![Complex64::new(0.2, 0.9), Complex64::new(-0.35, 0.8), Complex64::new(0.1, 1.3)]
}

pub fn equivariance(cfg: &RunConfig, xs: Option<&str>, g: UnimodularMatrix, taus: Vec<Complex64>) -> Result<Outcome, CliError> {
    let spec = match xs {
        Some(list) => FormSpec::from_f64(&parse_list(list, parse_f64)?, 128)?,
        None if cfg.n == 0 => FormSpec::eta4(),
        None => auto_spec(cfg.n, 128)?,
    };
    let ev = ModularEvaluator::standard();
    let prim = Primitive::new(ev, &spec)?;
    let taus = if taus.is_empty() { default_samples() } else { taus };
    let (report, samples) = equivariance_check(&prim, &g, &taus, cfg.tol.unwrap_or(1e-6))?;
    let omega = prim.omega(&g)?;
    let rho = prim.rho(&g)?;
    let chi = character_chi(&g).to_c64();
    let doc = json!({
        "n": spec.n(),
        "gamma": [g.a, g.b, g.c, g.d],
        "chi": [chi.re, chi.im],
        "omega": { "value": [omega.value.re, omega.value.im], "error": omega.error },
        "rho": rho,
        "samples": samples,
        "report": report,
    });
    Ok(Outcome { doc, pass: report.pass })
}

#[derive(Serialize)]
struct ReportAll {
    n_max: usize,
    criteria: Vec<CriterionResult>,
    examples: Vec<ExampleSummary>,
    pass: bool,
}

#[derive(Serialize)]
#[serde(untagged)]
enum ExampleSummary {
    Row(Box<ExampleRow>),
    Failed { n: usize, error: String },
}

pub fn report_all(n_max: usize, criterion: Option<usize>, parallel: bool) -> Result<Outcome, CliError> {
    let criteria = match criterion {
        Some(id) if (1..=suite::CRITERIA).contains(&id) => vec![suite::run_criterion(id, n_max)],
        Some(id) => return Err(CliError::config(format!("criterion must be in 1..={}, got {id}", suite::CRITERIA))),
        None => suite::run_all(n_max, parallel),
    };
    let examples = if criterion.is_none() || criterion == Some(4) {
        (1..=n_max)
            .map(|n| match suite::example_row(n) {
                Ok(row) => ExampleSummary::Row(Box::new(row)),
                Err(e) => ExampleSummary::Failed { n, error: e.to_string() },
            })
            .collect()
    } else {
        Vec::new()
    };
    let pass = criteria.iter().all(|c| c.pass);
    let doc = serde_json::to_value(ReportAll { n_max, criteria, examples, pass }).map_err(CliError::json)?;
    Ok(Outcome { doc, pass })
}

/// Text table of a `report-all` document, read back from its JSON.
pub fn render_table(doc: &Value) -> String {
    let mut out = String::new();
    let s = |v: &Value| v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string());
    for c in doc["criteria"].as_array().into_iter().flatten() {
        out.push_str(&format!(
            "{:>2} {:<44} {:<4} {:>8.2}s / {:>4}s\n",
            s(&c["id"]),
            s(&c["title"]),
            if c["pass"].as_bool() == Some(true) { "PASS" } else { "FAIL" },
            c["elapsed_seconds"].as_f64().unwrap_or(f64::NAN),
            s(&c["budget_seconds"]),
        ));
    }
    let examples = doc["examples"].as_array().into_iter().flatten().collect::<Vec<_>>();
    if !examples.is_empty() {
        out.push('\n');
        for e in examples {
            let n = s(&e["n"]);
            if let Some(err) = e.get("error").and_then(Value::as_str) {
                out.push_str(&format!("n={n}: {err}\n"));
                continue;
            }
            let xs: Vec<String> = e["xs"]
                .as_array()
                .into_iter()
                .flatten()
                .map(|x| format!("{:.12}", x.as_f64().unwrap_or(f64::NAN)))
                .collect();
            let poly: Vec<String> = e["monic_polynomial"].as_array().into_iter().flatten().map(s).collect();
            let diff = match e.get("reference") {
                Some(Value::Object(r)) if r.get("all_match") == Some(&Value::Bool(true)) => "matches reference".to_string(),
                Some(Value::Object(r)) => {
                    let degs: Vec<String> = r["coefficients"]
                        .as_array()
                        .into_iter()
                        .flatten()
                        .filter(|c| c["matches"] == Value::Bool(false))
                        .map(|c| s(&c["degree"]))
                        .collect();
                    format!("differs from reference at degrees {}", degs.join(","))
                }
                _ => "no reference polynomial".to_string(),
            };
            out.push_str(&format!("n={n}  x = [{}]\n     monic [{}]  {diff}\n", xs.join(", "), poly.join(", ")));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_from_text() {
        let q = |a: i64, b: i64| Rational::from((a, b));
        assert_eq!(parse_rational("4/7").unwrap(), q(4, 7));
        assert_eq!(parse_rational("0.125").unwrap(), q(1, 8));
        assert_eq!(parse_rational("-1.5e-3").unwrap(), q(-3, 2000));
        assert_eq!(parse_rational("2e2").unwrap(), q(200, 1));
        assert_eq!(parse_rational(".5").unwrap(), q(1, 2));
        for bad in ["", "abc", "1/0x", "1.-2", "."] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn gamma_and_tau() {
        assert_eq!(parse_gamma("0,-1,1,0").unwrap(), UnimodularMatrix::S);
        assert_eq!(parse_gamma("1,1,1,1").unwrap_err().code, 2);
        assert_eq!(parse_gamma("1,2,3").unwrap_err().code, 2);
        assert_eq!(parse_tau("0.1,1.2").unwrap(), Complex64::new(0.1, 1.2));
        assert!(parse_tau("0.1,-1").is_err());
    }

    #[test]
    fn table_from_json() {
        let doc = json!({
            "criteria": [{"id": 1, "title": "t", "pass": true, "elapsed_seconds": 0.5, "budget_seconds": 5.0}],
            "examples": [{"n": 1, "xs": [0.5], "monic_polynomial": ["1", "-1/2"], "reference": null}],
        });
        let t = render_table(&doc);
        assert!(t.contains("PASS") && t.contains("monic [1, -1/2]") && t.contains("no reference polynomial"));
    }
}
