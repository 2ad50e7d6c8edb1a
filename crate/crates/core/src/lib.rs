//! Weight-2 forms with a character and the Schwarzian equation `{h, τ} = s·E4(τ)`.
//!
//! The crate is organised bottom-up:
//!
//! - [`series`]: truncated Laurent series in `t = q^(1/24)` over exact rationals
//!   or arbitrary-precision complex floats, with the `θ = q·d/dq` operator.
//! - [`forms`]: η, Eisenstein series, Δ, J, the forms `fₙ = η⁴/∏(J − xᵢ)²`,
//!   `yₙ = η⁻²∏(J − xᵢ)`, eta quotients, the η multiplier and its character.
//! - [`system`]: the residue-vanishing system, its damped Newton solver and
//!   rational reconstruction of the solution polynomial.
//! - [`schwarz`]: coefficient-wise verification of the Schwarzian and the
//!   second-order ODE.
//! - [`analytic`]: point evaluation, arc inversion of J, contour residues,
//!   periods, the triangular representation and equivariance checks.
//! - [`suite`]: the acceptance criteria with pinned tolerances.

pub mod analytic;
pub mod coeff;
pub mod error;
pub mod forms;
pub mod report;
pub mod schwarz;
pub mod series;
pub mod suite;
pub mod system;

pub use coeff::{Coeff, CoeffMode};
pub use error::{Error, Result};
pub use forms::multiplier::{character_chi, eta_multiplier, kronecker, UnimodularMatrix, UnitRoot};
pub use forms::{EtaQuotientSpec, FormSpec};
pub use report::{Deviation, VerificationReport};
pub use series::LaurentSeries;
pub use system::{ResidueSystem, SolutionVector};

/// Re-exported so downstream crates name the same coefficient types.
pub use rug;
