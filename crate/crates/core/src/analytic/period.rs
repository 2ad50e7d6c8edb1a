//! Primitives `h = ∫_i^τ f`, periods `ω_γ`, the representation `ρ` and the
//! transformation checks.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::eval::{FormEvaluator, ModularEvaluator};
use super::quad::{integrate_polyline, Quadrature};
use super::residue::{ser_c64, PoleSet, DEFAULT_DELTA};
use crate::error::{Error, Result};
use crate::forms::multiplier::{character_chi, eta_multiplier, UnimodularMatrix};
use crate::forms::FormSpec;
use crate::report::{Deviation, VerificationReport};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
pub const PERIOD_TOL: f64 = 1e-10;
const MAX_DETOURS: usize = 64;
/// Angular step of detour arcs; chords stay outside `cos(ARC_STEP/2)` of the radius.
const ARC_STEP: f64 = PI / 12.0;

/// Polyline from `a` to `b` that keeps a clearance of `2δ·min(1, Im p/Im w)`
/// from every pole image `p = γw`, the image of a `2δ`-disc around `w`.
/// A segment that comes too close is replaced by a radial step out to a
/// circle around the pole, an arc along it and a radial step back.
pub fn plan_path(poles: &PoleSet, delta: f64, a: Complex64, b: Complex64) -> Result<Vec<Complex64>> {
    let y_min = (a.im.min(b.im) * 0.5).max(1e-3);
    let re_lo = a.re.min(b.re) - 1.0;
    let re_hi = a.re.max(b.re) + 1.0;
    let images: Vec<(Complex64, f64)> = poles
        .images(y_min, re_lo, re_hi)
        .into_iter()
        .map(|(p, base_im)| (p, 2.0 * delta * (p.im / base_im).min(1.0)))
        .collect();
    for &(p, r) in &images {
        if (p - a).norm() < r || (p - b).norm() < r {
            return Err(Error::PoleProximity(format!("endpoint within {r:e} of the pole {p}")));
        }
    }
    let mut path = vec![a, b];
    let mut detours = 0;
    let mut k = 0;
    while k + 1 < path.len() {
        let (s, e) = (path[k], path[k + 1]);
        let hit = images
            .iter()
            .filter_map(|&(p, r)| {
                let (t, dist) = segment_distance(s, e, p);
                (dist < r).then_some((t, p, r))
            })
            .min_by(|x, y| x.0.total_cmp(&y.0));
        match hit {
            None => k += 1,
            Some((_, p, r)) => {
                detours += 1;
                if detours > MAX_DETOURS {
                    return Err(Error::PoleProximity(format!("no pole-free path from {a} to {b}")));
                }
                let free = |z: Complex64| z.im > y_min && images.iter().all(|&(q, rq)| (q - z).norm() >= rq);
                let a0 = (s - p).arg();
                let a1 = (e - p).arg();
                let mut sweep = a1 - a0;
                if sweep > PI {
                    sweep -= 2.0 * PI;
                } else if sweep < -PI {
                    sweep += 2.0 * PI;
                }
                let arc = [1.5, 1.25, 2.5]
                    .iter()
                    .flat_map(|&m| [(m, sweep), (m, sweep - 2.0 * PI * sweep.signum())])
                    .map(|(m, sw)| {
                        let steps = (sw.abs() / ARC_STEP).ceil().max(1.0) as usize;
                        (0..=steps)
                            .map(|j| p + Complex64::from_polar(m * r, a0 + sw * j as f64 / steps as f64))
                            .collect::<Vec<_>>()
                    })
                    .find(|pts| pts.iter().all(|&z| free(z)));
                let Some(arc) = arc else {
                    return Err(Error::PoleProximity(format!("no detour around the pole {p}")));
                };
                path.splice(k + 1..k + 1, arc);
            }
        }
    }
    Ok(path)
}

/// Parameter of the closest point and the distance from `p` to `[s, e]`.
fn segment_distance(s: Complex64, e: Complex64, p: Complex64) -> (f64, f64) {
    let d = e - s;
    let len2 = d.norm_sqr();
    let t = if len2 == 0.0 { 0.0 } else { (((p - s) * d.conj()).re / len2).clamp(0.0, 1.0) };
    (t, (s + d * t - p).norm())
}

/// `fₙ` together with its pole set, for path integrals.
pub struct Primitive<'a> {
    f: FormEvaluator<'a>,
    poles: PoleSet,
    delta: f64,
    tol: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PathIntegral {
    #[serde(serialize_with = "ser_c64")]
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
    pub vertices: usize,
}

impl<'a> Primitive<'a> {
    pub fn new(ev: &'a ModularEvaluator, spec: &FormSpec) -> Result<Self> {
        Ok(Self {
            f: FormEvaluator::new(ev, spec),
            poles: PoleSet::for_spec(ev, spec)?,
            delta: DEFAULT_DELTA,
            tol: PERIOD_TOL,
        })
    }

    pub fn form(&self) -> &FormEvaluator<'a> {
        &self.f
    }

    /// `∫_a^b f dτ` along a planned path.
    pub fn integrate(&self, a: Complex64, b: Complex64) -> Result<PathIntegral> {
        if a == b {
            return Ok(PathIntegral { value: Complex64::new(0.0, 0.0), error: 0.0, evaluations: 0, vertices: 0 });
        }
        let path = plan_path(&self.poles, self.delta, a, b)?;
        let q: Quadrature = integrate_polyline(&|z| self.f.reduced(z), &path, self.tol)?;
        Ok(PathIntegral { value: q.value, error: q.error, evaluations: q.evaluations, vertices: path.len() })
    }

    /// `h(τ) = ∫_i^τ f`.
    pub fn h(&self, tau: Complex64) -> Result<PathIntegral> {
        self.integrate(I, tau)
    }

    /// `ω_γ = ∫_{γ⁻¹i}^{i} f`.
    pub fn omega(&self, g: &UnimodularMatrix) -> Result<PathIntegral> {
        self.integrate(g.inverse().act(I), I)
    }

    pub fn rho(&self, g: &UnimodularMatrix) -> Result<RhoMatrix> {
        Ok(RhoMatrix::new(g, self.omega(g)?.value))
    }
}

/// `[[1, ω_γ], [0, χ(γ⁻¹)]]`, acting on `h` by Möbius transformation.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RhoMatrix {
    #[serde(serialize_with = "ser_c64")]
    pub omega: Complex64,
    #[serde(serialize_with = "ser_c64")]
    pub corner: Complex64,
}

impl RhoMatrix {
    pub fn new(g: &UnimodularMatrix, omega: Complex64) -> Self {
        Self { omega, corner: character_chi(&g.inverse()).to_c64() }
    }

    pub fn identity() -> Self {
        Self { omega: Complex64::new(0.0, 0.0), corner: Complex64::new(1.0, 0.0) }
    }

    pub fn entries(&self) -> [[Complex64; 2]; 2] {
        [[Complex64::new(1.0, 0.0), self.omega], [Complex64::new(0.0, 0.0), self.corner]]
    }

    pub fn det(&self) -> Complex64 {
        self.corner
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self { omega: o.omega + self.omega * o.corner, corner: self.corner * o.corner }
    }

    pub fn max_diff(&self, o: &Self) -> f64 {
        (self.omega - o.omega).norm().max((self.corner - o.corner).norm())
    }

    /// `(h + ω)/χ(γ⁻¹)`.
    pub fn act(&self, h: Complex64) -> Complex64 {
        (h + self.omega) / self.corner
    }
}

/// `‖ρ(αβ) − ρ(α)ρ(β)‖_max` with each `ω` from its own quadrature.
pub fn rho_homomorphism_check(
    prim: &Primitive<'_>,
    alpha: &UnimodularMatrix,
    beta: &UnimodularMatrix,
    tol: f64,
) -> Result<VerificationReport> {
    let ra = prim.rho(alpha)?;
    let rb = prim.rho(beta)?;
    let rab = prim.rho(&(*alpha * *beta))?;
    let dev = rab.max_diff(&ra.mul(&rb));
    Ok(VerificationReport::new(format!("rho({alpha}*{beta}) = rho({alpha})*rho({beta})"), "f64", Deviation::Float(dev), tol, 4))
}

/// Over random word pairs of length at most `max_len`.
pub fn rho_homomorphism_random<R: Rng + ?Sized>(
    prim: &Primitive<'_>,
    rng: &mut R,
    pairs: usize,
    max_len: usize,
    tol: f64,
) -> Result<VerificationReport> {
    let mut worst = Deviation::Float(0.0);
    let mut notes = Vec::new();
    for _ in 0..pairs {
        let (a, wa) = UnimodularMatrix::random_word(rng, max_len);
        let (b, wb) = UnimodularMatrix::random_word(rng, max_len);
        let r = rho_homomorphism_check(prim, &a, &b, tol)?;
        notes.push(format!("{wa} * {wb}: {}", r.max_abs_deviation));
        worst = worst.max(r.max_abs_deviation);
    }
    let mut rep = VerificationReport::new(
        format!("rho homomorphism over {pairs} random pairs of words of length <= {max_len}"),
        "f64",
        worst,
        tol,
        4 * pairs,
    );
    rep.notes = notes;
    Ok(rep)
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivarianceSample {
    #[serde(serialize_with = "ser_c64")]
    pub tau: Complex64,
    #[serde(serialize_with = "ser_c64")]
    pub constant: Complex64,
}

/// `h(γτ) − χ(γ)h(τ)` at each sample: constant in `τ` and equal to `χ(γ)ω_γ`.
pub fn equivariance_check(
    prim: &Primitive<'_>,
    g: &UnimodularMatrix,
    samples: &[Complex64],
    tol: f64,
) -> Result<(VerificationReport, Vec<EquivarianceSample>)> {
    if samples.len() < 3 {
        return Err(Error::InvalidInput("at least 3 samples are needed".into()));
    }
    let chi = character_chi(g).to_c64();
    let mut out = Vec::with_capacity(samples.len());
    for &tau in samples {
        let c = prim.h(g.act(tau))?.value - chi * prim.h(tau)?.value;
        out.push(EquivarianceSample { tau, constant: c });
    }
    let mut spread = 0.0f64;
    for a in &out {
        for b in &out {
            spread = spread.max((a.constant - b.constant).norm());
        }
    }
    let predicted = chi * prim.omega(g)?.value;
    let mismatch = out.iter().map(|s| (s.constant - predicted).norm()).fold(0.0, f64::max);
    let rep = VerificationReport::new(
        format!("h({g}tau) - chi*h(tau) constant and equal to chi*omega"),
        "f64",
        Deviation::Float(spread.max(mismatch)),
        tol,
        samples.len(),
    )
    .with_note(format!("spread {spread:e}, distance to chi*omega {mismatch:e}"))
    .with_note(format!("chi*omega = {predicted}"));
    Ok((rep, out))
}

/// Relative deviation of `F(γτ) = m(γ)·(cτ + d)^w·F(τ)` over the samples,
/// where `eval` is evaluated directly at both points.
pub fn transform_check<F>(
    label: &str,
    eval: F,
    g: &UnimodularMatrix,
    multiplier: Complex64,
    weight: f64,
    samples: &[Complex64],
    tol: f64,
) -> Result<VerificationReport>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut worst = 0.0f64;
    for &tau in samples {
        let lhs = eval(g.act(tau))?;
        let rhs = multiplier * g.cocycle(tau).powf(weight) * eval(tau)?;
        worst = worst.max((lhs - rhs).norm() / rhs.norm());
    }
    Ok(VerificationReport::new(format!("{label}: F({g}tau) = m*(c tau+d)^{weight} F(tau)"), "f64", Deviation::Float(worst), tol, samples.len()))
}

/// `fₙ(τ + 1) = e^{iπ/3}fₙ(τ)` and `fₙ(−1/τ) = −τ²fₙ(τ)`.
pub fn generator_checks(spec: &FormSpec, samples: &[Complex64], tol: f64) -> Result<Vec<VerificationReport>> {
    let f = FormEvaluator::new(ModularEvaluator::standard(), spec);
    let t_rep = transform_check(
        &format!("f{} under T", spec.n()),
        |z| f.direct(z),
        &UnimodularMatrix::T,
        Complex64::from_polar(1.0, std::f64::consts::PI / 3.0),
        2.0,
        samples,
        tol,
    )?;
    let s_rep = transform_check(
        &format!("f{} under S", spec.n()),
        |z| f.direct(z),
        &UnimodularMatrix::S,
        Complex64::new(-1.0, 0.0),
        2.0,
        samples,
        tol,
    )?;
    Ok(vec![t_rep, s_rep])
}

/// `η(γτ) = v(γ)·(cτ + d)^{1/2}·η(τ)` (principal root) on random `γ` with
/// `1 ≤ |c| ≤ bound`, at `τ = −d/c + i/|c|` where `Im τ = Im γτ = 1/|c|`.
pub fn eta_multiplier_check<R: Rng + ?Sized>(rng: &mut R, count: usize, bound: i64, tol: f64) -> Result<VerificationReport> {
    let ev = ModularEvaluator::new(0.8 / bound as f64)?;
    let mut worst = 0.0f64;
    for _ in 0..count {
        let g = UnimodularMatrix::random(rng, bound);
        let tau = Complex64::new(-(g.d as f64) / g.c as f64, 1.0 / (g.c as f64).abs());
        let rep = transform_check("eta", |z| ev.eta(z), &g, eta_multiplier(&g).to_c64(), 0.5, &[tau], tol)?;
        worst = worst.max(rep.max_abs_deviation.to_f64());
    }
    Ok(VerificationReport::new(
        format!("eta multiplier on {count} random matrices with |c|,|d| <= {bound}"),
        "f64",
        Deviation::Float(worst),
        tol,
        count,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::CoeffMode;
    use crate::forms::eta_power;
    use crate::series::EvalOptions;
    use rand::rngs::StdRng;
    use rand::SeedableRng;
    use rug::Rational;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn path_avoids_poles() {
        let w = Complex64::from_polar(1.0, 1.9);
        let poles = PoleSet::new(vec![w]);
        let path = plan_path(&poles, 0.02, w - 0.5, w + 0.5).unwrap();
        assert!(path.len() > 2);
        for s in path.windows(2) {
            assert!(segment_distance(s[0], s[1], w).1 >= 0.04 - 1e-12);
        }
        assert!(plan_path(&poles, 0.02, w + 0.01, c(0.0, 3.0)).is_err());
    }

    #[test]
    fn eta4_primitive_matches_termwise_antiderivative() {
        let ev = ModularEvaluator::standard();
        let prim = Primitive::new(ev, &FormSpec::eta4()).unwrap();
        let big: crate::series::LaurentSeries<rug::Complex> = eta_power(4, 2400).unwrap().to_mode(CoeffMode::DOUBLE);
        let anti = big.integrate_tau().unwrap();
        let opts = EvalOptions { im_floor: 0.5, tol: 1e-13 };
        let h_i = anti.eval(I, &opts).unwrap().value;
        for &tau in &[c(-1.0, 1.0), c(1.0, 2.0), c(0.3, 0.6)] {
            let q = prim.h(tau).unwrap();
            let oracle = anti.eval(tau, &opts).unwrap().value - h_i;
            assert!((q.value - oracle).norm() < 1e-9, "{tau}: {} vs {oracle}", q.value);
        }
        // ω_T = ∫_{i−1}^{i} f
        let om = prim.omega(&UnimodularMatrix::T).unwrap().value;
        let oracle = h_i - anti.eval(c(-1.0, 1.0), &opts).unwrap().value;
        assert!((om - oracle).norm() < 1e-9);
    }

    #[test]
    fn rho_basics() {
        let ev = ModularEvaluator::standard();
        let prim = Primitive::new(ev, &FormSpec::eta4()).unwrap();
        let id = prim.rho(&UnimodularMatrix::IDENTITY).unwrap();
        assert!(id.max_diff(&RhoMatrix::identity()) == 0.0);
        let rt = prim.rho(&UnimodularMatrix::T).unwrap();
        assert!((rt.corner - Complex64::from_polar(1.0, -std::f64::consts::PI / 3.0)).norm() < 1e-15);
        assert!((rt.det() - rt.corner).norm() == 0.0);
        let rs = prim.rho(&UnimodularMatrix::S).unwrap();
        assert!(rs.omega.norm() < 1e-10);
    }

    #[test]
    fn rho_is_multiplicative_on_random_words() {
        let ev = ModularEvaluator::standard();
        let prim = Primitive::new(ev, &FormSpec::eta4()).unwrap();
        let mut rng = StdRng::seed_from_u64(11);
        let rep = rho_homomorphism_random(&prim, &mut rng, 6, 4, 1e-6).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn equivariance_n0_under_t() {
        let ev = ModularEvaluator::standard();
        let prim = Primitive::new(ev, &FormSpec::eta4()).unwrap();
        let (rep, samples) =
            equivariance_check(&prim, &UnimodularMatrix::T, &[I, c(1.0, 2.0), c(0.0, 3.0)], 1e-8).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert_eq!(samples.len(), 3);
        let (id, _) = equivariance_check(&prim, &UnimodularMatrix::IDENTITY, &[I, c(1.0, 2.0), c(0.0, 3.0)], 1e-12).unwrap();
        assert!(id.pass);
        assert!(equivariance_check(&prim, &UnimodularMatrix::T, &[I], 1e-8).is_err());
    }

    #[test]
    fn equivariance_n1_under_s() {
        let ev = ModularEvaluator::standard();
        let spec = FormSpec::exact(vec![Rational::from((4, 7))]).unwrap();
        let prim = Primitive::new(ev, &spec).unwrap();
        let samples = [c(0.2, 0.9), c(-0.35, 0.8), c(0.1, 1.3)];
        let (rep, _) = equivariance_check(&prim, &UnimodularMatrix::S, &samples, 1e-5).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn generators_n1() {
        let spec = FormSpec::exact(vec![Rational::from((4, 7))]).unwrap();
        let reps = generator_checks(&spec, &[c(0.2, 0.9), c(-0.35, 0.8), c(0.1, 1.3)], 1e-6).unwrap();
        assert!(reps.iter().all(|r| r.pass), "{reps:?}");
    }

    #[test]
    fn wrong_multiplier_fails() {
        let f = FormEvaluator::new(ModularEvaluator::standard(), &FormSpec::eta4());
        let rep = transform_check("f0", |z| f.direct(z), &UnimodularMatrix::T, Complex64::new(1.0, 0.0), 2.0, &[c(0.1, 1.0)], 1e-6).unwrap();
        assert!(!rep.pass);
    }

    #[test]
    fn eta_multiplier_on_random_matrices() {
        let mut rng = StdRng::seed_from_u64(5);
        let rep = eta_multiplier_check(&mut rng, 40, 9, 1e-9).unwrap();
        assert!(rep.pass, "{rep:?}");
    }
}
