//! The heat one-form and the machinery around it: the radial field,
//! homogeneity and integrability checks, and Euler potentials.

mod form;
mod homogeneity;
mod model;
mod point;

pub use form::{ExactnessResidual, FormError, IntegrabilityResidual, PfaffianForm};
pub use homogeneity::{DegreeEntry, DegreeReport, DegreeStatus, DEFAULT_LAMBDAS};
pub use model::{ModelDefinition, ModelError, ThermoModel};
pub use point::{Interval, StatePoint};

/// Builds ω = dU + p dV − Σ ξᵢ dXⁱ for a validated model.
pub fn build_heat_form(model: &ThermoModel) -> PfaffianForm {
    model.heat_form().clone()
}
