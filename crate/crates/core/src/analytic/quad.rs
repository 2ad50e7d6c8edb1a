//! Adaptive Gauss–Kronrod quadrature along segments and trapezoid sums on
//! circles.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
/// Gauss weights at `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const MAX_DEPTH: u32 = 40;
/// Relative accuracy of double-precision integrand values near poles of
/// `fₙ`, where `J − x` cancels.
pub const NOISE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default)]
pub struct Quadrature {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

impl std::ops::AddAssign for Quadrature {
    fn add_assign(&mut self, o: Self) {
        self.value += o.value;
        self.error += o.error;
        self.evaluations += o.evaluations;
    }
}

/// GK15 on `∫_a^b f(z) dz` along the straight segment: value, error
/// estimate and `∫|f||dz|`.
fn gk15<F>(f: &F, a: Complex64, b: Complex64) -> Result<(Complex64, f64, f64)>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mid = (a + b) * 0.5;
    let half = (b - a) * 0.5;
    let fc = f(mid)?;
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs = fc.norm() * WGK[7];
    for k in 0..7 {
        let dz = half * XGK[k];
        let (lo, hi) = (f(mid - dz)?, f(mid + dz)?);
        let s = lo + hi;
        abs += (lo.norm() + hi.norm()) * WGK[k];
        kron += s * WGK[k];
        if k % 2 == 1 {
            gauss += s * WG[k / 2];
        }
    }
    Ok((kron * half, ((kron - gauss) * half).norm(), abs * half.norm()))
}

/// `∫_a^b f(z) dz` along the segment, bisecting until each piece's
/// Kronrod–Gauss difference is within its share of `tol` or at the
/// evaluation noise level `NOISE·∫|f|`.
pub fn integrate_segment<F>(f: &F, a: Complex64, b: Complex64, tol: f64) -> Result<Quadrature>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut out = Quadrature::default();
    if a == b {
        return Ok(out);
    }
    let mut stack = vec![(a, b, tol, 0u32)];
    while let Some((lo, hi, t, depth)) = stack.pop() {
        let (v, e, abs) = gk15(f, lo, hi)?;
        out.evaluations += 15;
        if !e.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand on [{lo}, {hi}]")));
        }
        if e <= t.max(NOISE * abs) {
            out.value += v;
            out.error += e;
        } else if depth >= MAX_DEPTH {
            return Err(Error::Quadrature(format!("no convergence on [{lo}, {hi}]: error {e:e}")));
        } else {
            let m = (lo + hi) * 0.5;
            stack.push((m, hi, t / 2.0, depth + 1));
            stack.push((lo, m, t / 2.0, depth + 1));
        }
    }
    Ok(out)
}

/// `∫ f dz` along a polyline.
pub fn integrate_polyline<F>(f: &F, points: &[Complex64], tol: f64) -> Result<Quadrature>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut out = Quadrature::default();
    let total: f64 = points.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    for w in points.windows(2) {
        let share = if total > 0.0 { tol * (w[1] - w[0]).norm() / total } else { tol };
        out += integrate_segment(f, w[0], w[1], share.max(f64::MIN_POSITIVE))?;
    }
    Ok(out)
}

/// `(1/2πi)∮ (τ − w)^k f(τ) dτ` for `k = 0..moments` on the circle
/// `|τ − w| = δ` with `m` equally spaced nodes, plus `max |f|` there.
pub fn circle_moments<F>(f: &F, w: Complex64, delta: f64, m: usize, moments: usize) -> Result<(Vec<Complex64>, f64)>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut acc = vec![Complex64::new(0.0, 0.0); moments];
    let mut max_f = 0.0f64;
    for j in 0..m {
        let u = Complex64::from_polar(delta, 2.0 * PI * j as f64 / m as f64);
        let v = f(w + u)?;
        max_f = max_f.max(v.norm());
        // dτ/(2πi) = u·dφ/(2π)
        let mut term = v * u;
        for a in acc.iter_mut() {
            *a += term;
            term *= u;
        }
    }
    for a in acc.iter_mut() {
        *a /= m as f64;
    }
    Ok((acc, max_f))
}
