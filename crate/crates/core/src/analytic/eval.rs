//! Double-precision point values of η, E4, E6, J and `fₙ`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::forms::multiplier::{character_chi, UnimodularMatrix};
use crate::forms::{eisenstein_series, eta_series, FormSpec};
use crate::series::{CompiledSeries, EvalOptions, T_PER_Q};

/// Relative tail tolerance used for every series evaluation here.
const TAIL_TOL: f64 = 1e-14;

/// Compiled η, E4 and E6, truncated so that the tails stay below
/// [`TAIL_TOL`] down to `Im τ = im_floor`.
#[derive(Clone, Debug)]
pub struct ModularEvaluator {
    eta: CompiledSeries,
    e4: CompiledSeries,
    e6: CompiledSeries,
    opts: EvalOptions,
}

/// Smallest `N` with `504·N⁵·exp(−2πyN) < 1e-18`.
fn q_order_for(im_floor: f64) -> i64 {
    let rate = 2.0 * PI * im_floor;
    let mut n = 1.0f64;
    while 504f64.ln() + 5.0 * n.ln() - rate * n > -18.0 * 10f64.ln() {
        n += 1.0;
    }
    n as i64 + 4
}

impl ModularEvaluator {
    pub fn new(im_floor: f64) -> Result<Self> {
        if !(im_floor > 0.0) {
            return Err(Error::InvalidInput(format!("evaluation floor {im_floor} must be positive")));
        }
        let trunc = T_PER_Q * q_order_for(im_floor) + 1;
        Ok(Self {
            eta: eta_series(trunc)?.compile(),
            e4: eisenstein_series(4, trunc)?.compile(),
            e6: eisenstein_series(6, trunc)?.compile(),
            opts: EvalOptions { im_floor, tol: TAIL_TOL },
        })
    }

    /// Shared instance with floor `1/2`.
    pub fn standard() -> &'static Self {
        static CELL: OnceLock<ModularEvaluator> = OnceLock::new();
        CELL.get_or_init(|| Self::new(0.5).expect("floor 1/2 is valid"))
    }

    pub fn im_floor(&self) -> f64 {
        self.opts.im_floor
    }

    pub fn eta(&self, tau: Complex64) -> Result<Complex64> {
        Ok(self.eta.eval(tau, &self.opts)?.value)
    }

    pub fn e4(&self, tau: Complex64) -> Result<Complex64> {
        Ok(self.e4.eval(tau, &self.opts)?.value)
    }

    pub fn e6(&self, tau: Complex64) -> Result<Complex64> {
        Ok(self.e6.eval(tau, &self.opts)?.value)
    }

    /// `J = E4³/(1728·η²⁴)`.
    pub fn j(&self, tau: Complex64) -> Result<Complex64> {
        let e4 = self.e4(tau)?;
        let eta = self.eta(tau)?;
        Ok(e4 * e4 * e4 / (eta.powu(24) * 1728.0))
    }

    /// `dJ/dτ = −2πi·E4²·E6/(1728·η²⁴)`.
    pub fn j_prime(&self, tau: Complex64) -> Result<Complex64> {
        let e4 = self.e4(tau)?;
        let e6 = self.e6(tau)?;
        let eta = self.eta(tau)?;
        Ok(-Complex64::new(0.0, 2.0 * PI) * e4 * e4 * e6 / (eta.powu(24) * 1728.0))
    }
}

/// `γ` with `γτ` in the standard fundamental domain.
pub fn reduce_to_fundamental(tau: Complex64) -> Result<(UnimodularMatrix, Complex64)> {
    if !(tau.im > 0.0) {
        return Err(Error::OutsideDomain(format!("{tau} is not in the upper half-plane")));
    }
    let mut g = UnimodularMatrix::IDENTITY;
    let mut z = tau;
    for _ in 0..10_000 {
        let k = z.re.round();
        if k != 0.0 {
            z.re -= k;
            g = UnimodularMatrix::t_pow(-(k as i64)) * g;
        }
        if z.norm_sqr() < 1.0 - 1e-14 {
            z = -z.inv();
            g = UnimodularMatrix::S * g;
        } else {
            return Ok((g, z));
        }
    }
    Err(Error::OutsideDomain(format!("no reduction found for {tau}")))
}

/// `fₙ(τ) = η⁴/∏(J − xᵢ)²` at a point.
#[derive(Clone, Debug)]
pub struct FormEvaluator<'a> {
    ev: &'a ModularEvaluator,
    xs: Vec<f64>,
}

impl<'a> FormEvaluator<'a> {
    pub fn new(ev: &'a ModularEvaluator, spec: &FormSpec) -> Self {
        Self { ev, xs: spec.xs_f64() }
    }

    pub fn from_nodes(ev: &'a ModularEvaluator, xs: Vec<f64>) -> Self {
        Self { ev, xs }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.xs
    }

    pub fn evaluator(&self) -> &ModularEvaluator {
        self.ev
    }

    /// Straight from the q-expansions; `Im τ` must clear the floor.
    pub fn direct(&self, tau: Complex64) -> Result<Complex64> {
        let j = self.ev.j(tau)?;
        let mut den = Complex64::new(1.0, 0.0);
        for &x in &self.xs {
            den *= (j - x) * (j - x);
        }
        Ok(self.ev.eta(tau)?.powu(4) / den)
    }

    /// Any point of ℍ: below the floor, `f(τ) = f(γτ)/(χ(γ)(cτ + d)²)` with
    /// `γτ` in the fundamental domain.
    pub fn reduced(&self, tau: Complex64) -> Result<Complex64> {
        if tau.im >= self.ev.im_floor() {
            return self.direct(tau);
        }
        let (g, z) = reduce_to_fundamental(tau)?;
        let j = g.cocycle(tau);
        Ok(self.direct(z)? / (character_chi(&g).to_c64() * j * j))
    }

    /// `hᵢ = η⁴/∏_{j≠i}(J − xⱼ)²`.
    pub fn partial(&self, i: usize, tau: Complex64) -> Result<Complex64> {
        let j = self.ev.j(tau)?;
        let mut den = Complex64::new(1.0, 0.0);
        for (k, &x) in self.xs.iter().enumerate() {
            if k != i {
                den *= (j - x) * (j - x);
            }
        }
        Ok(self.ev.eta(tau)?.powu(4) / den)
    }
}
