//! Eta quotients `∏ η(s·τ)^e` with positive rational scales `s`.
//!
//! `η(s·τ)` with `s = p/m` has exponents in `(p/m)·(1/24)·ℤ`, so the
//! product lives on the refined grid `u = q^(1/(24L))` with `L` the lcm of
//! the scale denominators. The result is coarsened back to `t` when every
//! exponent allows it.

use std::fmt;
use std::str::FromStr;

use rug::{Integer, Rational};
use serde::Serialize;

use crate::coeff::CoeffMode;
use crate::error::{Error, Result};
use crate::series::{ExactSeries, LaurentSeries};

use super::eta_series;

/// Largest grid refinement accepted.
pub const MAX_REFINEMENT: i64 = 1 << 12;
/// Largest number of stored coefficients on the refined grid.
pub const MAX_GRID_LEN: i64 = 1 << 22;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EtaQuotientSpec {
    factors: Vec<(Rational, i64)>,
}

impl EtaQuotientSpec {
    pub fn new(factors: Vec<(Rational, i64)>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidInput("empty eta quotient".into()));
        }
        if let Some((s, _)) = factors.iter().find(|(s, _)| *s <= 0) {
            return Err(Error::InvalidInput(format!("scale {s} is not positive")));
        }
        Ok(Self { factors })
    }

    /// `η(τ/n)⁸·η(2τ/n)⁻⁴`, for even `n`.
    pub fn family_two(n: i64) -> Result<Self> {
        if n < 1 || n % 2 != 0 {
            return Err(Error::InvalidInput(format!("family 1 needs an even n, got {n}")));
        }
        Self::new(vec![(Rational::from((1, n)), 8), (Rational::from((2, n)), -4)])
    }

    /// `η(τ/n)⁶·η(3τ/n)⁻²`, for `3 | n`.
    pub fn family_three(n: i64) -> Result<Self> {
        if n < 1 || n % 3 != 0 {
            return Err(Error::InvalidInput(format!("family 2 needs 3 | n, got {n}")));
        }
        Self::new(vec![(Rational::from((1, n)), 6), (Rational::from((3, n)), -2)])
    }

    /// `η(nτ)²·η(τ/n)²`.
    pub fn family_product(n: i64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidInput(format!("family 3 needs n ≥ 1, got {n}")));
        }
        Self::new(vec![(Rational::from(n), 2), (Rational::from((1, n)), 2)])
    }

    pub fn factors(&self) -> &[(Rational, i64)] {
        &self.factors
    }

    /// Half the total exponent.
    pub fn weight(&self) -> Rational {
        Rational::from((self.factors.iter().map(|(_, e)| e).sum::<i64>(), 2))
    }

    /// `L = lcm` of the scale denominators.
    pub fn refinement(&self) -> i64 {
        let mut l = Integer::from(1);
        for (s, _) in &self.factors {
            l.lcm_mut(s.denom());
        }
        l.to_i64().unwrap_or(i64::MAX)
    }

    /// Leading exponent on the `u`-grid: `Σ e·s·L`.
    pub fn lead_on_grid(&self) -> i64 {
        let l = self.refinement();
        self.factors
            .iter()
            .map(|(s, e)| {
                let step = Rational::from(s * l);
                e * step.numer().to_i64().expect("grid step fits")
            })
            .sum()
    }

    /// Expansion known below `trunc` in `t`, i.e. below `trunc·L` on the grid.
    pub fn series(&self, trunc: i64) -> Result<EtaQuotientSeries> {
        let l = self.refinement();
        let grid_trunc = trunc.checked_mul(l).unwrap_or(i64::MAX);
        let lead = self.lead_on_grid();
        if l > MAX_REFINEMENT || grid_trunc - lead > MAX_GRID_LEN {
            return Err(Error::GridOverflow { refinement: l, length: grid_trunc.saturating_sub(lead) });
        }
        let rel = grid_trunc - lead;
        if rel < 1 {
            return Err(Error::InvalidInput(format!("trunc {trunc} does not exceed the lead")));
        }
        let mut acc = LaurentSeries::one(CoeffMode::ExactRational, rel);
        for (s, e) in &self.factors {
            let step = Rational::from(s * l).numer().to_i64().expect("grid step fits");
            // η in t with enough relative precision, then t ↦ u^step
            let rel_t = (rel + step - 1) / step;
            let eta = eta_series(1 + rel_t)?.substitute_power(step)?;
            acc = acc.mul(&eta.pow_int(*e)?)?;
        }
        let acc = acc.truncate(grid_trunc);
        Ok(match acc.coarsen(l) {
            Some(s) if l > 1 => EtaQuotientSeries { refinement: 1, series: s },
            _ => EtaQuotientSeries { refinement: l, series: acc },
        })
    }
}

impl fmt::Display for EtaQuotientSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (s, e) in &self.factors {
            if *e >= 0 {
                if !first {
                    f.write_str("*")?;
                }
                write!(f, "eta({s})^{e}")?;
            } else {
                write!(f, "/eta({s})^{}", -e)?;
            }
            first = false;
        }
        Ok(())
    }
}

impl FromStr for EtaQuotientSpec {
    type Err = Error;

    /// Parses `eta(1/2)^8/eta(1)^4`, `eta(2)^2*eta(1/2)^2`, `eta(1)^-2`, …
    fn from_str(input: &str) -> Result<Self> {
        let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
        let mut rest = s.as_str();
        let mut factors = Vec::new();
        let mut sign = 1i64;
        loop {
            rest = rest
                .strip_prefix("eta(")
                .ok_or_else(|| Error::Parse(format!("expected `eta(` at `{rest}`")))?;
            let close = rest.find(')').ok_or_else(|| Error::Parse("unclosed `(`".into()))?;
            let scale = parse_rational(&rest[..close])?;
            rest = &rest[close + 1..];
            let mut exp = 1i64;
            if let Some(r) = rest.strip_prefix('^') {
                let (num, r) = if let Some(inner) = r.strip_prefix('(') {
                    let close = inner.find(')').ok_or_else(|| Error::Parse("unclosed `(`".into()))?;
                    (&inner[..close], &inner[close + 1..])
                } else {
                    let end = r
                        .char_indices()
                        .find(|&(i, c)| !(c.is_ascii_digit() || (i == 0 && (c == '-' || c == '+'))))
                        .map_or(r.len(), |(i, _)| i);
                    (&r[..end], &r[end..])
                };
                exp = num.parse().map_err(|_| Error::Parse(format!("bad exponent `{num}`")))?;
                rest = r;
            }
            factors.push((scale, sign * exp));
            match rest.chars().next() {
                None => break,
                Some('*') => sign = 1,
                Some('/') => sign = -1,
                Some(c) => return Err(Error::Parse(format!("unexpected `{c}`"))),
            }
            rest = &rest[1..];
        }
        Self::new(factors)
    }
}

fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("bad scale `{s}`"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.parse().map_err(|_| bad())?;
            let d: i64 = d.parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Rational::from((n, d)))
        }
        None => Ok(Rational::from(s.parse::<i64>().map_err(|_| bad())?)),
    }
}

/// Expansion on the grid `u = t^(1/refinement)`.
#[derive(Clone, Debug)]
pub struct EtaQuotientSeries {
    pub refinement: i64,
    pub series: ExactSeries,
}

impl EtaQuotientSeries {
    /// Leading exponent measured in `t`.
    pub fn lead_in_t(&self) -> Option<Rational> {
        self.series.lead().map(|e| Rational::from((e, self.refinement)))
    }

    pub fn has_negative_exponents(&self) -> bool {
        self.series.lead().is_some_and(|e| e < 0)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EtaQuotientSummary {
    pub spec: String,
    pub weight: String,
    pub refinement: i64,
    pub lead_in_t: Option<String>,
    pub holomorphic_at_infinity: bool,
}

impl EtaQuotientSummary {
    pub fn new(spec: &EtaQuotientSpec, s: &EtaQuotientSeries) -> Self {
        Self {
            spec: spec.to_string(),
            weight: spec.weight().to_string(),
            refinement: s.refinement,
            lead_in_t: s.lead_in_t().map(|r| r.to_string()),
            holomorphic_at_infinity: !s.has_negative_exponents(),
        }
    }
}
