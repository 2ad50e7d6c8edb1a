//! Shared fixtures for the benchmarks.

use modschwarz::forms::{eisenstein_series, eta_power};
use modschwarz::rug::{Complex, Rational};
use modschwarz::{CoeffMode, FormSpec, LaurentSeries, Result};

/// `E4` and `η⁻²` through `q^order`, the operands of the ODE check.
pub fn exact_operands(order: i64) -> Result<(LaurentSeries<Rational>, LaurentSeries<Rational>)> {
    let rel = 24 * order + 1;
    Ok((eisenstein_series(4, rel)?, eta_power(-2, rel)?))
}

pub fn float_operands(order: i64, bits: u32) -> Result<(LaurentSeries<Complex>, LaurentSeries<Complex>)> {
    let (a, b) = exact_operands(order)?;
    let mode = CoeffMode::float(bits)?;
    Ok((a.to_mode(mode), b.to_mode(mode)))
}

/// `f₁` with its exact node `4/7`.
pub fn f1_spec() -> FormSpec {
    FormSpec::exact(vec![Rational::from((4, 7))]).expect("4/7 is in (0, 1)")
}
