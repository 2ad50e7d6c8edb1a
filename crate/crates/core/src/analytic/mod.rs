//! Point evaluation in the upper half-plane: inverting J on the arc from `i`
//! to `ρ`, contour residues, periods, the representation `ρ` and the
//! transformation laws.

pub mod eval;
pub mod period;
pub mod quad;
pub mod residue;

pub use eval::{reduce_to_fundamental, FormEvaluator, ModularEvaluator};
pub use period::{
    equivariance_check, eta_multiplier_check, generator_checks, plan_path, rho_homomorphism_check,
    rho_homomorphism_random, transform_check, Primitive, RhoMatrix,
};
pub use residue::{
    contour_residue, full_residue, invert_j_on_arc, residue_bracket, residue_report, ArcPoint, ContourResidue,
    PoleSet, ResidueReport, DEFAULT_DELTA, DEFAULT_SAMPLES,
};
