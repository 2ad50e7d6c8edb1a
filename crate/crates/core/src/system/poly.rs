//! The solution polynomial `∏(x − xᵢ)`, its rational reconstruction and
//! certification. Coefficient vectors are ordered leading coefficient first.

use std::cmp::Ordering;

use num_complex::Complex64;
use rug::{Float, Integer, Rational};
use serde::Serialize;

use super::{ResidueSystem, RefinedSolution};
use crate::error::{Error, Result};

/// `∏(x − xᵢ)` by accumulating elementary symmetric polynomials at the
/// precision of the inputs.
pub fn poly_from_solution(xs: &[Float]) -> Vec<Float> {
    let bits = xs.first().map_or(64, Float::prec);
    let mut p = vec![Float::with_val(bits, 1)];
    for x in xs {
        let mut next = p.clone();
        next.push(Float::new(bits));
        for (k, c) in p.iter().enumerate() {
            let t = Float::with_val(bits, c * x);
            next[k + 1] -= t;
        }
        p = next;
    }
    p
}

pub fn poly_from_f64(xs: &[f64], bits: u32) -> Vec<Float> {
    let v: Vec<Float> = xs.iter().map(|&x| Float::with_val(bits, x)).collect();
    poly_from_solution(&v)
}

fn eval_rational_at(p: &[Rational], x: &Float) -> (Float, Float) {
    let bits = x.prec();
    let mut v = Float::new(bits);
    let mut d = Float::new(bits);
    for c in p {
        d = Float::with_val(bits, &d * x) + &v;
        v = Float::with_val(bits, &v * x) + c;
    }
    (v, d)
}

/// All complex roots of a polynomial by Durand–Kerner in double precision.
pub fn complex_roots(p: &[Rational]) -> Vec<Complex64> {
    let n = p.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = p[0].to_f64();
    let c: Vec<Complex64> = p.iter().map(|q| Complex64::new(q.to_f64() / lead, 0.0)).collect();
    let eval = |z: Complex64| c.iter().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * 0.5 + 0.5).collect();
    for _ in 0..2000 {
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    den *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / den;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    z
}

/// Real roots in `(0, 1)`, polished by Newton at `bits`, in increasing order.
pub fn real_roots_unit(p: &[Rational], bits: u32) -> Vec<Float> {
    let approx: Vec<f64> = complex_roots(p)
        .into_iter()
        .filter(|z| z.im.abs() < 1e-7 * z.norm().max(1.0) && z.re > 0.0 && z.re < 1.0)
        .map(|z| z.re)
        .collect();
    let mut roots = polish_roots(p, &approx, bits);
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    roots
}

/// Newton polishing of approximate real roots of a rational polynomial.
pub fn polish_roots(p: &[Rational], approx: &[f64], bits: u32) -> Vec<Float> {
    approx
        .iter()
        .map(|&x0| {
            let mut x = Float::with_val(bits, x0);
            for _ in 0..(bits / 4 + 64) {
                let (v, d) = eval_rational_at(p, &x);
                if d.is_zero() {
                    break;
                }
                let step = Float::with_val(bits, &v / &d);
                x -= &step;
                if step.is_zero() || step.get_exp().map_or(true, |e| e < -(bits as i32) + 4) {
                    break;
                }
            }
            x
        })
        .collect()
}

fn poly_derivative(p: &[Rational]) -> Vec<Rational> {
    let n = p.len().saturating_sub(1);
    p[..n].iter().enumerate().map(|(k, c)| Rational::from(c * (n - k) as u32)).collect()
}

fn poly_add(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let n = a.len().max(b.len());
    let pad = |v: &[Rational]| {
        let mut out = vec![Rational::new(); n - v.len()];
        out.extend_from_slice(v);
        out
    };
    pad(a).into_iter().zip(pad(b)).map(|(x, y)| x + y).collect()
}

fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rational::new(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += Rational::from(x * y);
        }
    }
    out
}

/// Remainder of `a` modulo the monic `m`.
fn poly_rem(a: &[Rational], m: &[Rational]) -> Vec<Rational> {
    let mut r: Vec<Rational> = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = r[0].clone();
        for (k, c) in m.iter().enumerate() {
            r[k] -= Rational::from(&lead * c);
        }
        r.remove(0);
    }
    r
}

/// Remainder of `c·x(1 − x)P″ + (2b − 2(a + b)x)P′` modulo `P`.
///
/// For `P` with simple roots, it vanishes exactly when the roots of `P`
/// solve the residue system with parameters `(a, b, c)`.
pub fn algebraic_remainder(sys: &ResidueSystem, p: &[Rational]) -> Result<Vec<Rational>> {
    let q = |v: f64| Rational::from_f64(v).ok_or_else(|| Error::InvalidInput(format!("{v} is not finite")));
    let (a, b, c) = (q(sys.a)?, q(sys.b)?, q(sys.c)?);
    if p.first().map_or(true, |l| *l != 1) {
        return Err(Error::InvalidInput("polynomial must be monic".into()));
    }
    if p.len() == 1 {
        return Ok(Vec::new());
    }
    let d1 = poly_derivative(p);
    let d2 = if d1.len() > 1 { poly_derivative(&d1) } else { Vec::new() };
    // c·x(1 − x) = −c·x² + c·x
    let w2 = vec![Rational::from(-&c), c.clone(), Rational::new()];
    let two = Rational::from(2);
    let w1 = vec![Rational::from(-(Rational::from(&a + &b) * &two)), Rational::from(&b * &two)];
    let expr = poly_add(&poly_mul(&w2, &d2), &poly_mul(&w1, &d1));
    Ok(poly_rem(&expr, p))
}

/// Best rational approximation of `x` by continued-fraction convergents:
/// the first convergent within `tol` whose denominator is at most `max_den`.
pub fn best_rational(x: &Float, max_den: &Integer, tol: f64) -> Option<Rational> {
    let exact = x.to_rational()?;
    let bits = x.prec().max(64);
    let (mut h0, mut h1) = (Integer::from(0), Integer::from(1));
    let (mut k0, mut k1) = (Integer::from(1), Integer::from(0));
    let mut rem = exact.clone();
    for _ in 0..512 {
        let a = Rational::from(rem.floor_ref()).into_numer_denom().0;
        let h2 = Integer::from(&a * &h1) + &h0;
        let k2 = Integer::from(&a * &k1) + &k0;
        if k2 > *max_den {
            return None;
        }
        let conv = Rational::from((h2.clone(), k2.clone()));
        let err = Float::with_val(bits, Rational::from(&conv - &exact)).abs();
        if err <= tol {
            return Some(conv);
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = Rational::from(&rem - &a);
        if frac.cmp0() == Ordering::Equal {
            return None;
        }
        rem = frac.recip();
    }
    None
}

#[derive(Clone, Debug, Serialize)]
pub struct Certification {
    /// Sup-norm of the system residual at the polished roots of the
    /// rational polynomial.
    pub root_residual: f64,
    /// Whether the exact polynomial identity holds.
    pub algebraic: bool,
    pub roots: Vec<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Rationalization {
    pub float_coeffs: Vec<f64>,
    /// `None` where no convergent met the tolerance.
    pub rational_coeffs: Vec<Option<String>>,
    pub max_denominator: String,
    pub certification: Option<Certification>,
}

impl Rationalization {
    pub fn rationals(&self) -> Option<Vec<Rational>> {
        self.rational_coeffs
            .iter()
            .map(|c| c.as_ref().and_then(|s| s.parse().ok()))
            .collect()
    }
}

/// Rational reconstruction of the solution polynomial plus certification.
pub fn rationalize(
    sys: &ResidueSystem,
    sol: &RefinedSolution,
    max_den: &Integer,
    tol: f64,
    cert_tol: f64,
) -> Result<Rationalization> {
    let p = poly_from_solution(&sol.xs);
    let approx: Vec<Option<Rational>> = p.iter().map(|c| best_rational(c, max_den, tol)).collect();
    let certification = match approx.iter().cloned().collect::<Option<Vec<_>>>() {
        Some(q) => Some(certify(sys, &q, &sol.xs.iter().map(Float::to_f64).collect::<Vec<_>>(), sol.bits, cert_tol)?),
        None => None,
    };
    Ok(Rationalization {
        float_coeffs: p.iter().map(Float::to_f64).collect(),
        rational_coeffs: approx.iter().map(|c| c.as_ref().map(Rational::to_string)).collect(),
        max_denominator: max_den.to_string(),
        certification,
    })
}

/// Polishes the roots of `p` near `approx` and re-substitutes them into the
/// residual.
pub fn certify(sys: &ResidueSystem, p: &[Rational], approx: &[f64], bits: u32, tol: f64) -> Result<Certification> {
    let roots = polish_roots(p, approx, bits);
    let root_residual = if roots.is_empty() {
        0.0
    } else {
        sys.residual(&roots)?.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max)
    };
    let algebraic = algebraic_remainder(sys, p)?.iter().all(|c| c.cmp0() == Ordering::Equal);
    Ok(Certification {
        root_residual,
        algebraic,
        roots: roots.iter().map(Float::to_f64).collect(),
        tolerance: tol,
        pass: root_residual < tol,
    })
}

/// Reference polynomials, leading coefficient first. `n = 1` is
/// listed through its reference root `7/4`.
pub fn reference_polynomial(n: usize) -> Option<Vec<Rational>> {
    let q = |a: i64, b: i64| Rational::from((a, b));
    match n {
        1 => Some(vec![q(1, 1), q(-7, 4)]),
        2 => Some(vec![q(247, 1), q(-260, 1), q(4, 1)]),
        3 => Some(vec![q(31, 1), q(-48, 1), q(96, 5), q(-128, 95)]),
        4 => Some(vec![q(1233, 1), q(-25234, 1), q(16368, 1), q(-3520, 1), q(704, 5)]),
        _ => None,
    }
}

pub fn to_monic(p: &[Rational]) -> Vec<Rational> {
    let lead = p[0].clone();
    p.iter().map(|c| Rational::from(c / &lead)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct CoefficientDiff {
    pub degree: usize,
    pub reference: String,
    pub derived: String,
    pub matches: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReferenceDiff {
    pub n: usize,
    pub reference_coeffs: Vec<String>,
    pub reference_monic: Vec<String>,
    pub derived_monic: Vec<String>,
    pub coefficients: Vec<CoefficientDiff>,
    pub all_match: bool,
    /// System residual at the reference polynomial's roots in `(0, 1)`, when
    /// it has `n` of them.
    pub reference_root_residual: Option<f64>,
    pub reference_roots_in_unit_interval: usize,
}

/// Coefficient-by-coefficient comparison of a derived monic polynomial with
/// the reference.
pub fn diff_against_reference(sys: &ResidueSystem, derived: &[Rational]) -> Option<ReferenceDiff> {
    let n = derived.len() - 1;
    let reference = reference_polynomial(n)?;
    let monic = to_monic(&reference);
    let coefficients: Vec<CoefficientDiff> = monic
        .iter()
        .zip(derived)
        .enumerate()
        .map(|(k, (r, d))| CoefficientDiff {
            degree: n - k,
            reference: r.to_string(),
            derived: d.to_string(),
            matches: r == d,
        })
        .collect();
    let roots = real_roots_unit(&monic, 128);
    let reference_root_residual = if roots.len() == n && roots.windows(2).all(|w| w[0] < w[1]) {
        sys.residual(&roots)
            .ok()
            .map(|r| r.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max))
    } else {
        None
    };
    Some(ReferenceDiff {
        n,
        reference_coeffs: reference.iter().map(Rational::to_string).collect(),
        reference_monic: monic.iter().map(Rational::to_string).collect(),
        derived_monic: derived.iter().map(Rational::to_string).collect(),
        all_match: coefficients.iter().all(|c| c.matches),
        coefficients,
        reference_root_residual,
        reference_roots_in_unit_interval: roots.len(),
    })
}
