//! The residue system
//!
//! ```text
//! fᵢ(x) = a/(1 − xᵢ) − b/xᵢ − Σ_{j≠i} c/(xᵢ − xⱼ),   i = 1..n,
//! ```
//!
//! on the ordered simplex `U = {0 < x₁ < … < xₙ < 1}`, and a damped Newton
//! solver that never leaves `U`.

pub mod poly;
pub mod real;

use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use real::Real;

/// Coordinates closer than this are treated as a collision.
pub const COLLISION_GAP: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResidueSystem {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl ResidueSystem {
    pub fn new(n: usize, a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && c > 0.0) {
            return Err(Error::InvalidInput(format!("a, b, c must be positive, got ({a}, {b}, {c})")));
        }
        Ok(Self { n, a, b, c })
    }

    /// `(a, b, c) = (3, 4, 12)`, the values tied to `fₙ`.
    pub fn standard(n: usize) -> Self {
        Self { n, a: 3.0, b: 4.0, c: 12.0 }
    }

    fn check_domain<R: Real>(&self, xs: &[R]) -> Result<()> {
        if xs.len() != self.n {
            return Err(Error::InvalidInput(format!("expected {} coordinates, got {}", self.n, xs.len())));
        }
        for (i, x) in xs.iter().enumerate() {
            let v = x.to_f64();
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::OutsideDomain(format!("x[{i}] = {v} is not in (0, 1)")));
            }
            for y in &xs[..i] {
                if x.sub(y).to_f64() == 0.0 {
                    return Err(Error::OutsideDomain(format!("x[{i}] = {v} repeats an earlier coordinate")));
                }
            }
        }
        Ok(())
    }

    /// `fᵢ(xs)`; `xs` need not be sorted but must be distinct points of `(0, 1)`.
    pub fn residual_entry<R: Real>(&self, xs: &[R], i: usize) -> R {
        let x = &xs[i];
        let one = x.lift(1.0);
        let mut acc = x.lift(self.a).div(&one.sub(x)).sub(&x.lift(self.b).div(x));
        let c = x.lift(self.c);
        for (j, y) in xs.iter().enumerate() {
            if j != i {
                acc = acc.sub(&c.div(&x.sub(y)));
            }
        }
        acc
    }

    pub fn residual<R: Real>(&self, xs: &[R]) -> Result<Vec<R>> {
        self.check_domain(xs)?;
        Ok((0..self.n).map(|i| self.residual_entry(xs, i)).collect())
    }

    /// `∂fᵢ/∂xⱼ`: `−c/(xᵢ − xⱼ)²` off the diagonal and
    /// `a/(1 − xᵢ)² + b/xᵢ² + Σ_{j≠i} c/(xᵢ − xⱼ)²` on it.
    ///
    /// The off-diagonal sign is the one central differences confirm; the
    /// magnitudes, and hence strict diagonal dominance, do not depend on it.
    pub fn jacobian<R: Real>(&self, xs: &[R]) -> Result<Vec<Vec<R>>> {
        self.check_domain(xs)?;
        let n = self.n;
        let zero = match xs.first() {
            Some(x) => x.zero_like(),
            None => return Ok(Vec::new()),
        };
        let mut m = vec![vec![zero; n]; n];
        for i in 0..n {
            let x = &xs[i];
            let one = x.lift(1.0);
            let om = one.sub(x);
            let mut diag = x.lift(self.a).div(&om.mul(&om)).add(&x.lift(self.b).div(&x.mul(x)));
            for j in 0..n {
                if j != i {
                    let d = x.sub(&xs[j]);
                    let e = x.lift(self.c).div(&d.mul(&d));
                    diag = diag.add(&e);
                    m[i][j] = e.zero_like().sub(&e);
                }
            }
            m[i][i] = diag;
        }
        Ok(m)
    }

    /// Damped Newton from `init` (default `xᵢ = i/(n + 1)`).
    pub fn solve(&self, init: Option<&[f64]>, opts: &SolveOptions) -> Result<SolutionVector> {
        let mut x: Vec<f64> = match init {
            Some(v) => v.to_vec(),
            None => (1..=self.n).map(|i| i as f64 / (self.n + 1) as f64).collect(),
        };
        if !in_simplex(&x) || x.len() != self.n {
            return Err(Error::OutsideDomain("initial point is not in the ordered simplex".into()));
        }
        let mut f = self.residual(&x)?;
        let mut history = vec![sup_norm(&f)];
        for it in 0..opts.max_iter {
            let norm = sup_norm(&f);
            if norm < opts.tol {
                return Ok(SolutionVector {
                    xs: x,
                    residual_norm: norm,
                    iterations: it,
                    precision: "f64".into(),
                    history,
                });
            }
            let jac = self.jacobian(&x)?;
            if !is_symmetric_dominant(&jac) {
                return Err(Error::Singular);
            }
            let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
            let step = cholesky_solve(&jac, &rhs)?;
            let merit = half_sq(&f);
            let mut lambda = 1.0;
            let mut accepted = None;
            for _ in 0..60 {
                let cand: Vec<f64> = x.iter().zip(&step).map(|(xi, si)| xi + lambda * si).collect();
                if in_simplex(&cand) {
                    let fc = self.residual(&cand)?;
                    if half_sq(&fc) <= merit * (1.0 - 1e-4 * lambda) {
                        accepted = Some((cand, fc));
                        break;
                    }
                }
                lambda *= 0.5;
            }
            let Some((cand, fc)) = accepted else {
                return Err(Error::StepCollapse { iterations: it, residual: norm, last: x });
            };
            x = cand;
            f = fc;
            history.push(sup_norm(&f));
        }
        let norm = sup_norm(&f);
        if norm < opts.tol {
            return Ok(SolutionVector {
                xs: x,
                residual_norm: norm,
                iterations: opts.max_iter,
                precision: "f64".into(),
                history,
            });
        }
        Err(Error::MaxIterations { iterations: opts.max_iter, residual: norm, last: x })
    }

    /// Newton refinement of a double solution at `bits` of precision.
    pub fn refine(&self, sol: &SolutionVector, bits: u32) -> Result<RefinedSolution> {
        let mut x: Vec<Float> = sol.xs.iter().map(|&v| Float::with_val(bits, v)).collect();
        if self.n == 0 {
            return Ok(RefinedSolution { xs: x, residual_norm: 0.0, iterations: 0, bits });
        }
        // stop once the residual is within a few hundred ulps of its scale
        let target = Float::with_val(bits, Float::i_exp(1, 40 - bits as i32));
        let mut f = self.residual(&x)?;
        let mut norm = big_sup(&f);
        let mut iterations = 0;
        while !Real::lt(&norm, &target) {
            if iterations >= 200 {
                return Err(Error::MaxIterations { iterations, residual: norm.to_f64(), last: to_f64s(&x) });
            }
            let jac = self.jacobian(&x)?;
            let rhs: Vec<Float> = f.iter().map(|v| Float::with_val(bits, -v)).collect();
            let step = cholesky_solve(&jac, &rhs)?;
            let mut lambda = Float::with_val(bits, 1);
            let mut accepted = None;
            for _ in 0..60 {
                let cand: Vec<Float> = x.iter().zip(&step).map(|(xi, si)| xi.add(&si.mul(&lambda))).collect();
                if in_simplex(&to_f64s(&cand)) {
                    let fc = self.residual(&cand)?;
                    let nc = big_sup(&fc);
                    if Real::lt(&nc, &norm) {
                        accepted = Some((cand, fc, nc));
                        break;
                    }
                }
                lambda = Float::with_val(bits, &lambda / 2u32);
            }
            let Some((cand, fc, nc)) = accepted else {
                break;
            };
            x = cand;
            f = fc;
            norm = nc;
            iterations += 1;
        }
        Ok(RefinedSolution { xs: x, residual_norm: norm.to_f64(), iterations, bits })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 200 }
    }
}

/// A point of the ordered simplex with its residual diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct SolutionVector {
    pub xs: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub precision: String,
    /// Residual sup-norm before the first step and after every step.
    pub history: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct RefinedSolution {
    pub xs: Vec<Float>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub bits: u32,
}

pub fn in_simplex(xs: &[f64]) -> bool {
    let mut prev = 0.0;
    for &x in xs {
        if !(x > prev && x - prev > COLLISION_GAP && x < 1.0) {
            return false;
        }
        prev = x;
    }
    xs.last().map_or(true, |&x| 1.0 - x > COLLISION_GAP)
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn half_sq(v: &[f64]) -> f64 {
    0.5 * v.iter().map(|x| x * x).sum::<f64>()
}

fn big_sup(v: &[Float]) -> Float {
    let zero = v[0].zero_like();
    v.iter().fold(zero, |m, x| m.max_real(x.abs()))
}

fn to_f64s(v: &[Float]) -> Vec<f64> {
    v.iter().map(Float::to_f64).collect()
}

/// Exact symmetry plus strict row diagonal dominance with a positive diagonal.
pub fn is_symmetric_dominant<R: Real>(m: &[Vec<R>]) -> bool {
    let n = m.len();
    for i in 0..n {
        let mut off = m[i][i].zero_like();
        for j in 0..n {
            if j != i {
                if m[i][j].cmp_real(&m[j][i]) != std::cmp::Ordering::Equal {
                    return false;
                }
                off = off.add(&m[i][j].abs());
            }
        }
        if !off.lt(&m[i][i]) {
            return false;
        }
    }
    true
}

/// Solves `M·x = rhs` for symmetric positive definite `M`.
pub fn cholesky_solve<R: Real>(m: &[Vec<R>], rhs: &[R]) -> Result<Vec<R>> {
    let n = m.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let zero = m[0][0].zero_like();
    let mut l = vec![vec![zero.clone(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = m[i][j].clone();
            for k in 0..j {
                s = s.sub(&l[i][k].mul(&l[j][k]));
            }
            if i == j {
                if !zero.lt(&s) {
                    return Err(Error::Singular);
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s.div(&l[j][j]);
            }
        }
    }
    let mut y = vec![zero.clone(); n];
    for i in 0..n {
        let mut s = rhs[i].clone();
        for k in 0..i {
            s = s.sub(&l[i][k].mul(&y[k]));
        }
        y[i] = s.div(&l[i][i]);
    }
    let mut x = vec![zero; n];
    for i in (0..n).rev() {
        let mut s = y[i].clone();
        for k in i + 1..n {
            s = s.sub(&l[k][i].mul(&x[k]));
        }
        x[i] = s.div(&l[i][i]);
    }
    Ok(x)
}
