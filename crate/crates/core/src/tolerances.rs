use serde::{Deserialize, Serialize};

use crate::quadrature::QuadratureSettings;

/// Numeric thresholds shared by the checks. Every field has a default, so a
/// partial configuration file only overrides what it names.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Normalized Frobenius residuals at or below this pass.
    pub integrability: f64,
    /// Normalized closedness residuals of ω/f and of the Gibbs-Duhem form.
    pub exactness: f64,
    /// Relative deviation allowed in homogeneity sampling.
    pub homogeneity: f64,
    /// Relative error target of each quadrature.
    pub quadrature: f64,
    pub max_subdivisions: usize,
    /// Absolute bound on pointwise Gibbs-Duhem residuals.
    pub gibbs_duhem: f64,
    /// Minors with |m| ≤ band·scaleᵏ count as zero.
    pub minor_band: f64,
    /// Relative agreement between closed-form and finite-difference Hessians.
    pub hessian_cross_check: f64,
    /// Final B of a third-law approach.
    pub boundary_epsilon: f64,
    /// |dŜ/d ln B| at or above this means divergence.
    pub divergence_slope: f64,
    /// |dŜ/d ln B| below this means convergence.
    pub convergence_slope: f64,
    /// Relative residual required of a leaf solution.
    pub leaf: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            integrability: 1e-10,
            exactness: 1e-10,
            homogeneity: 1e-10,
            quadrature: 1e-10,
            max_subdivisions: 2000,
            gibbs_duhem: 1e-6,
            minor_band: 1e-9,
            hessian_cross_check: 1e-4,
            boundary_epsilon: 1e-8,
            divergence_slope: 0.05,
            convergence_slope: 0.005,
            leaf: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn quadrature_settings(&self) -> QuadratureSettings {
        QuadratureSettings {
            rel_tol: self.quadrature,
            max_subdivisions: self.max_subdivisions,
            ..QuadratureSettings::default()
        }
    }
}
