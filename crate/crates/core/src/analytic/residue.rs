//! Poles of `fₙ` on the arc from `i` to `ρ`, their residues and orders.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::eval::{FormEvaluator, ModularEvaluator};
use super::quad::circle_moments;
use crate::error::{Error, Result};
use crate::forms::multiplier::{ext_gcd, gcd, UnimodularMatrix};
use crate::forms::FormSpec;
use crate::system::ResidueSystem;

pub const DEFAULT_DELTA: f64 = 0.02;
pub const DEFAULT_SAMPLES: usize = 256;

/// `τ = e^{iθ}` with `θ ∈ [π/2, 2π/3]`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ArcPoint {
    pub theta: f64,
    #[serde(serialize_with = "ser_c64")]
    pub tau: Complex64,
    #[serde(serialize_with = "ser_c64")]
    pub j_value: Complex64,
}

pub(crate) fn ser_c64<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

const ARC_GRID: usize = 50;
const ARC_IM_TOL: f64 = 1e-8;
const ARC_TOL: f64 = 1e-10;

/// The point of the arc with `J = x`, by bisection in `θ`. `J` is checked to
/// be real and strictly decreasing on a grid of the arc first.
pub fn invert_j_on_arc(ev: &ModularEvaluator, x: f64) -> Result<ArcPoint> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::OutsideDomain(format!("x = {x} is not in (0, 1)")));
    }
    let (lo, hi) = (PI / 2.0, 2.0 * PI / 3.0);
    let at = |theta: f64| -> Result<Complex64> { ev.j(Complex64::from_polar(1.0, theta)) };
    let mut prev = f64::INFINITY;
    for k in 0..=ARC_GRID {
        let theta = lo + (hi - lo) * k as f64 / ARC_GRID as f64;
        let j = at(theta)?;
        if j.im.abs() > ARC_IM_TOL {
            return Err(Error::ArcInversion(format!("Im J = {:e} at θ = {theta}", j.im)));
        }
        if j.re >= prev {
            return Err(Error::ArcInversion(format!("J not decreasing at θ = {theta}")));
        }
        prev = j.re;
    }
    let (mut a, mut b) = (lo, hi);
    let mut mid = 0.5 * (a + b);
    let mut j = at(mid)?;
    for _ in 0..200 {
        if (j.re - x).abs() < ARC_TOL * 1e-2 || b - a < 1e-15 {
            break;
        }
        if j.re > x {
            a = mid;
        } else {
            b = mid;
        }
        mid = 0.5 * (a + b);
        j = at(mid)?;
    }
    if (j - x).norm() >= ARC_TOL {
        return Err(Error::ArcInversion(format!("|J − x| = {:e} after bisection", (j - x).norm())));
    }
    Ok(ArcPoint { theta: mid, tau: Complex64::from_polar(1.0, mid), j_value: j })
}

/// Poles of `fₙ` in a region: the orbits of the arc points under the modular group.
#[derive(Clone, Debug)]
pub struct PoleSet {
    pub base: Vec<Complex64>,
}

impl PoleSet {
    pub fn new(base: Vec<Complex64>) -> Self {
        Self { base }
    }

    pub fn for_spec(ev: &ModularEvaluator, spec: &FormSpec) -> Result<Self> {
        let base = spec
            .xs_f64()
            .iter()
            .map(|&x| invert_j_on_arc(ev, x).map(|p| p.tau))
            .collect::<Result<_>>()?;
        Ok(Self { base })
    }

    /// Images `γw` with `Im γw ≥ y_min` and `re_lo ≤ Re γw ≤ re_hi`, paired
    /// with `Im w` of their base point.
    pub fn images(&self, y_min: f64, re_lo: f64, re_hi: f64) -> Vec<(Complex64, f64)> {
        let mut out = Vec::new();
        for &w in &self.base {
            let bound = (w.im / y_min).sqrt();
            let c_max = (bound / w.im).floor() as i64;
            for c in 0..=c_max {
                let cw = w * c as f64;
                let d_lo = (-bound - cw.re).ceil() as i64;
                let d_hi = (bound - cw.re).floor() as i64;
                for d in d_lo..=d_hi {
                    if (c == 0 && d != 1) || gcd(c, d) != 1 {
                        continue;
                    }
                    let (a, b) = if c == 0 {
                        (1, 0)
                    } else {
                        let (g, x, y) = ext_gcd(d, c);
                        // a·d − b·c = 1
                        (x * g, -y * g)
                    };
                    let g = UnimodularMatrix { a, b, c, d };
                    let p = g.act(w);
                    if p.im < y_min {
                        continue;
                    }
                    let k_lo = (re_lo - p.re).ceil() as i64;
                    let k_hi = (re_hi - p.re).floor() as i64;
                    for k in k_lo..=k_hi {
                        out.push((p + k as f64, w.im));
                    }
                }
            }
        }
        out
    }

    /// Distance from `w` to the nearest other pole.
    pub fn separation(&self, w: Complex64) -> f64 {
        let r = 1.0;
        self.images(w.im / 4.0, w.re - r, w.re + r)
            .into_iter()
            .map(|(p, _)| (p - w).norm())
            .filter(|&d| d > 1e-9)
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ContourResidue {
    #[serde(serialize_with = "ser_c64")]
    pub residue: Complex64,
    /// `(1/2πi)∮ (τ − w) f dτ`: the coefficient of `(τ − w)^{-2}`.
    #[serde(serialize_with = "ser_c64")]
    pub second_moment: Complex64,
    pub pole_order: u32,
    pub delta: f64,
    pub samples: usize,
    /// Change of the residue between `samples/2` and `samples` nodes.
    pub doubling_change: f64,
}

const MOMENTS: usize = 6;
const ORDER_THRESHOLD: f64 = 1e-6;

/// `(1/2πi)∮ f dτ` on `|τ − w| = δ` by the trapezoid rule with `m` nodes,
/// accepted when halving `m` changes it by at most `1e-10`. The pole order is
/// `1 + max{k : |m_k| > 1e-6·max|f|·δ^{k+1}}` over the moments
/// `m_k = (1/2πi)∮ (τ − w)^k f dτ`.
pub fn contour_residue<F>(f: &F, w: Complex64, delta: f64, m: usize) -> Result<ContourResidue>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if m < 8 || !(delta > 0.0) {
        return Err(Error::InvalidInput(format!("contour with δ = {delta}, M = {m}")));
    }
    let (coarse, _) = circle_moments(f, w, delta, m / 2, MOMENTS)?;
    let (fine, max_f) = circle_moments(f, w, delta, m, MOMENTS)?;
    let change = (fine[0] - coarse[0]).norm();
    let scale = max_f * delta;
    if change > 1e-10 * scale.max(1.0) {
        return Err(Error::Quadrature(format!("residue moved by {change:e} under node doubling")));
    }
    let mut order = 0;
    for (k, mk) in fine.iter().enumerate() {
        if mk.norm() > ORDER_THRESHOLD * max_f * delta.powi(k as i32 + 1) {
            order = k as u32 + 1;
        }
    }
    Ok(ContourResidue {
        residue: fine[0],
        second_moment: fine[1],
        pole_order: order,
        delta,
        samples: m,
        doubling_change: change,
    })
}

/// `3/(1 − xᵢ) − 4/xᵢ − Σ_{j≠i} 12/(xᵢ − xⱼ)`, computed by the residue system
/// itself.
pub fn residue_bracket(xs: &[f64], i: usize) -> f64 {
    ResidueSystem::standard(xs.len()).residual_entry(xs, i)
}

/// `Res(fₙ, wᵢ) = hᵢ(wᵢ)/(6J′(wᵢ))·bracket` with `hᵢ = η⁴/∏_{j≠i}(J − xⱼ)²`.
pub fn full_residue(f: &FormEvaluator<'_>, i: usize, w: Complex64) -> Result<Complex64> {
    let h = f.partial(i, w)?;
    let jp = f.evaluator().j_prime(w)?;
    let x = f.evaluator().j(w)?;
    let mut xs = f.nodes().to_vec();
    xs[i] = x.re;
    Ok(h / (jp * 6.0) * residue_bracket(&xs, i))
}

/// Per-pole outcome of [`residue_report`].
#[derive(Clone, Debug, Serialize)]
pub struct PoleResidue {
    pub index: usize,
    pub x: f64,
    pub arc: ArcPoint,
    pub j_error: f64,
    pub contour: ContourResidue,
    pub bracket: f64,
    #[serde(serialize_with = "ser_c64")]
    pub formula_residue: Complex64,
    pub separation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidueReport {
    pub n: usize,
    pub poles: Vec<PoleResidue>,
    pub max_abs_residue: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Contour residues at every `wᵢ`, with `δ` shrunk to a fifth of the pole
/// separation when another pole is within `4δ`.
pub fn residue_report(spec: &FormSpec, delta: f64, samples: usize, tol: f64) -> Result<ResidueReport> {
    let ev = ModularEvaluator::standard();
    let f = FormEvaluator::new(ev, spec);
    let poles = PoleSet::for_spec(ev, spec)?;
    let mut out = Vec::new();
    for (i, (&x, &w)) in f.nodes().iter().zip(&poles.base).enumerate() {
        let arc = invert_j_on_arc(ev, x)?;
        let separation = poles.separation(w);
        let d = if separation < 4.0 * delta { separation / 5.0 } else { delta };
        let contour = contour_residue(&|z| f.direct(z), w, d, samples)?;
        out.push(PoleResidue {
            index: i,
            x,
            j_error: (arc.j_value - x).norm(),
            arc,
            bracket: residue_bracket(f.nodes(), i),
            formula_residue: full_residue(&f, i, w)?,
            contour,
            separation,
        });
    }
    let max_abs_residue = out.iter().map(|p| p.contour.residue.norm()).fold(0.0, f64::max);
    let pass = out.iter().all(|p| p.contour.pole_order == 2 && p.j_error < ARC_TOL) && max_abs_residue < tol;
    Ok(ResidueReport { n: spec.n(), poles: out, max_abs_residue, tolerance: tol, pass })
}
