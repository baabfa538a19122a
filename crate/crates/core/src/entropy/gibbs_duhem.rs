use serde::Serialize;

use super::{integrate_form, EntropyError, EntropyField, EntropySurface, PathSpec};
use crate::expr::Expr;
use crate::pfaffian::{ExactnessResidual, PfaffianForm, StatePoint, ThermoModel};

/// The one-form a = −(V dp − Σ Xⁱ dξᵢ)/f, equal to d log(1/T) whenever a
/// temperature exists.
pub fn gibbs_duhem_form(model: &ThermoModel) -> PfaffianForm {
    let coords = model.coordinates();
    let volume = Expr::var(&coords[1]);
    let f = model.integrating_factor_expr();
    let coefficients = coords
        .iter()
        .map(|c| {
            let mut numerator = volume.clone() * model.pressure().differentiate(c);
            for (name, xi) in coords[2..].iter().zip(model.conjugates()) {
                numerator = numerator - Expr::var(name) * xi.differentiate(c);
            }
            -(numerator / f.clone())
        })
        .collect();
    PfaffianForm::new(coords.to_vec(), coefficients, -1.0).expect("same coordinates")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogTemperatureChange {
    /// log(1/T(target)) − log(1/T(reference)).
    pub delta_log_inverse_t: f64,
    pub error_estimate: f64,
    pub reliable: bool,
}

/// Δlog(1/T) = −∫_Γ (V dp − Σ Xⁱ dξᵢ)/f.
///
/// Refused with the residual list when the integrand fails the exactness
/// test at a waypoint.
pub fn gibbs_duhem_reconstruct(
    model: &ThermoModel,
    path: &PathSpec,
    exactness_tol: f64,
) -> Result<LogTemperatureChange, EntropyError> {
    let form = gibbs_duhem_form(model);
    for x in path.waypoints() {
        let residuals = form.exactness_residuals(x)?;
        if residuals.iter().any(|r| r.normalized.abs() > exactness_tol) {
            return Err(EntropyError::NotExact {
                point: x.clone(),
                residuals,
            });
        }
    }
    let q = integrate_form(model, &form, path)?;
    Ok(LogTemperatureChange {
        delta_log_inverse_t: q.value,
        error_estimate: q.error_estimate,
        reliable: q.reliable,
    })
}

/// max over k of |Σᵢ xⁱ ∂ₖ(ωᵢ/T)|, that is of the components of
/// U d(1/T) + V d(p/T) − Σ Xⁱ d(ξᵢ/T), with T taken from `surface` and
/// differentiated by central differences.
pub fn gibbs_duhem_residual(
    surface: &impl EntropySurface,
    x: &StatePoint,
) -> Result<f64, EntropyError> {
    let model = surface.model();
    let weighted = |y: &StatePoint| -> Result<Vec<f64>, EntropyError> {
        let t = surface.temperature(y)?;
        Ok(model
            .heat_form()
            .coefficient_values(y)?
            .into_iter()
            .map(|w| w / t)
            .collect())
    };
    let mut worst: f64 = 0.0;
    for k in 0..x.dim() {
        let h = 1e-4 * x[k].abs().max(1e-8);
        let up = weighted(&x.with_coord(k, x[k] + h))?;
        let down = weighted(&x.with_coord(k, x[k] - h))?;
        let component: f64 = (0..x.dim())
            .map(|i| x[i] * (up[i] - down[i]) / (2.0 * h))
            .sum();
        worst = worst.max(component.abs());
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GibbsDuhemReport {
    pub points: Vec<StatePoint>,
    /// Pointwise residual at each point.
    pub residuals: Vec<f64>,
    /// Closedness residuals of the reconstruction form at each point.
    pub exactness: Vec<Vec<ExactnessResidual>>,
    /// Δlog(1/T) from the reference state, absent where it was refused.
    pub log_inverse_t: Vec<Option<f64>>,
}

impl GibbsDuhemReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.residuals.iter().all(|r| r.is_finite() && r.abs() <= tol)
    }
}

pub fn gibbs_duhem_check(
    field: &EntropyField,
    points: &[StatePoint],
) -> Result<GibbsDuhemReport, EntropyError> {
    let model = field.model();
    let form = gibbs_duhem_form(model);
    let mut report = GibbsDuhemReport {
        points: points.to_vec(),
        residuals: Vec::with_capacity(points.len()),
        exactness: Vec::with_capacity(points.len()),
        log_inverse_t: Vec::with_capacity(points.len()),
    };
    for x in points {
        report.residuals.push(gibbs_duhem_residual(field, x)?);
        report.exactness.push(form.exactness_residuals(x)?);
        let path = field.route(x)?;
        report.log_inverse_t.push(
            gibbs_duhem_reconstruct(model, &path, field.tolerances().exactness)
                .ok()
                .map(|c| c.delta_log_inverse_t),
        );
    }
    Ok(report)
}
