//! Entropy reconstruction: Ŝ by quadrature of ω/f along a path, the
//! extensive entropy S = S₀·exp(Ŝ − Ŝ₀), the temperature T = f/S, and the
//! Gibbs-Duhem checks.

mod gibbs_duhem;
mod path;

use serde::Serialize;
use thiserror::Error;

pub use gibbs_duhem::{
    gibbs_duhem_check, gibbs_duhem_form, gibbs_duhem_reconstruct, gibbs_duhem_residual,
    GibbsDuhemReport, LogTemperatureChange,
};
pub use path::{axis_orders, route, Obstruction, PathDefect, PathError, PathSpec, SEGMENT_SAMPLES};

use crate::expr::EvalError;
use crate::pfaffian::{ExactnessResidual, FormError, PfaffianForm, StatePoint, ThermoModel};
use crate::quadrature::{integrate, QuadratureResult};
use crate::tolerances::Tolerances;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum EntropyError {
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error("evaluation failed at {point}: {source}")]
    Eval { point: StatePoint, source: EvalError },
    #[error("path starts at {found}, not at the reference state {expected}")]
    WrongStart {
        expected: StatePoint,
        found: StatePoint,
    },
    #[error("f = {value:e} ≤ 0 at path parameter {parameter} ({point})")]
    FactorNotPositive {
        parameter: f64,
        point: StatePoint,
        value: f64,
    },
    #[error("path leaves the domain at parameter {parameter} ({point})")]
    OutsideDomain { parameter: f64, point: StatePoint },
    #[error("no admissible path to {target}: obstruction near {} ({:?})", .defect.point, .defect.kind)]
    Routing {
        target: StatePoint,
        defect: PathDefect,
    },
    #[error("heat form is not integrable at {point} (normalized residual {residual:e})")]
    NotIntegrable { point: StatePoint, residual: f64 },
    #[error("one-form is not exact at {point} (normalized residual {:e})", max_normalized(.residuals))]
    NotExact {
        point: StatePoint,
        residuals: Vec<ExactnessResidual>,
    },
}

fn max_normalized(r: &[ExactnessResidual]) -> f64 {
    r.iter().fold(0.0, |m, r| m.max(r.normalized.abs()))
}

/// Integrates `form` along every segment of `path`, aborting where the
/// path leaves the domain or f ≤ 0.
pub(crate) fn integrate_form(
    model: &ThermoModel,
    form: &PfaffianForm,
    path: &PathSpec,
) -> Result<QuadratureResult, EntropyError> {
    let mut total = QuadratureResult::zero();
    for (i, (a, b)) in path.segments().enumerate() {
        let delta: Vec<f64> = b.coords().iter().zip(a.coords()).map(|(b, a)| b - a).collect();
        let integrand = |t: f64| -> Result<f64, EntropyError> {
            let x = a.lerp(b, t);
            let parameter = i as f64 + t;
            if !model.contains(&x) {
                return Err(EntropyError::OutsideDomain { parameter, point: x });
            }
            let f = model.integrating_factor(&x)?;
            if f <= 0.0 {
                return Err(EntropyError::FactorNotPositive {
                    parameter,
                    point: x,
                    value: f,
                });
            }
            Ok(form.contract(&x, &delta)?)
        };
        total = total.combine(integrate(integrand, 0.0, 1.0, path.settings())?);
    }
    Ok(total)
}

fn check_integrable(model: &ThermoModel, path: &PathSpec, tol: f64) -> Result<(), EntropyError> {
    if model.dim() < 3 {
        return Ok(());
    }
    for x in path.waypoints() {
        let worst = model
            .heat_form()
            .integrability_residuals(x)?
            .iter()
            .fold(0.0_f64, |m, r| m.max(r.normalized.abs()));
        if worst > tol {
            return Err(EntropyError::NotIntegrable {
                point: x.clone(),
                residual: worst,
            });
        }
    }
    Ok(())
}

/// The form ω/f, whose coefficients have degree −1.
pub fn entropy_form(model: &ThermoModel) -> PfaffianForm {
    model
        .heat_form()
        .divided_by(model.integrating_factor_expr(), -1.0)
}

/// Ŝ(target) − Ŝ(reference) = ∫_Γ ω/f over `path`.
///
/// The heat form must pass the integrability test at every waypoint.
pub fn reconstruct_hat_s(
    model: &ThermoModel,
    path: &PathSpec,
    integrability_tol: f64,
) -> Result<QuadratureResult, EntropyError> {
    check_integrable(model, path, integrability_tol)?;
    integrate_form(model, &entropy_form(model), path)
}

/// S and its provenance at one state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyValue {
    pub entropy: f64,
    pub hat_s: f64,
    pub error_estimate: f64,
    pub reliable: bool,
    pub path: Vec<StatePoint>,
}

/// T with the ∂S/∂U·T = 1 finite-difference check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TemperatureReport {
    pub temperature: f64,
    pub entropy: f64,
    pub integrating_factor: f64,
    /// |(∂S/∂U)·T − 1| with ∂S/∂U from central differences of S.
    pub inverse_check: f64,
}

/// Anything that assigns S (and so T) to states of a model.
pub trait EntropySurface {
    fn model(&self) -> &ThermoModel;

    fn entropy(&self, x: &StatePoint) -> Result<f64, EntropyError>;

    /// T = f/S.
    fn temperature(&self, x: &StatePoint) -> Result<f64, EntropyError> {
        let f = self.model().integrating_factor(x)?;
        Ok(f / self.entropy(x)?)
    }
}

/// The metrical entropy of a model, reconstructed on demand by quadrature
/// from the model's reference state, where S = S₀.
#[derive(Clone, Debug)]
pub struct EntropyField {
    model: ThermoModel,
    form: PfaffianForm,
    tolerances: Tolerances,
}

impl EntropyField {
    pub fn new(model: ThermoModel, tolerances: Tolerances) -> Self {
        let form = entropy_form(&model);
        EntropyField {
            model,
            form,
            tolerances,
        }
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }

    pub fn reference(&self) -> &StatePoint {
        self.model.reference()
    }

    pub fn reference_entropy(&self) -> f64 {
        self.model.reference_entropy()
    }

    /// The automatically routed path from the reference state to `target`.
    pub fn route(&self, target: &StatePoint) -> Result<PathSpec, EntropyError> {
        if target.dim() != self.model.dim() {
            return Err(FormError::Dimension {
                expected: self.model.dim(),
                found: target.dim(),
            }
            .into());
        }
        route(
            &self.model,
            self.model.reference(),
            target,
            self.tolerances.quadrature_settings(),
        )
        .map_err(|defect| EntropyError::Routing {
            target: target.clone(),
            defect,
        })
    }

    /// Ŝ(target) − Ŝ(reference) along a caller-supplied path, which must
    /// start at the reference state.
    pub fn hat_s_along(&self, path: &PathSpec) -> Result<QuadratureResult, EntropyError> {
        if path.reference() != self.model.reference() {
            return Err(EntropyError::WrongStart {
                expected: self.model.reference().clone(),
                found: path.reference().clone(),
            });
        }
        check_integrable(&self.model, path, self.tolerances.integrability)?;
        integrate_form(&self.model, &self.form, path)
    }

    pub fn evaluate(&self, target: &StatePoint) -> Result<EntropyValue, EntropyError> {
        let path = self.route(target)?;
        let q = self.hat_s_along(&path)?;
        Ok(EntropyValue {
            entropy: self.reference_entropy() * q.value.exp(),
            hat_s: q.value,
            error_estimate: q.error_estimate,
            reliable: q.reliable,
            path: path.waypoints().to_vec(),
        })
    }

    pub fn hat_s(&self, target: &StatePoint) -> Result<f64, EntropyError> {
        Ok(self.evaluate(target)?.hat_s)
    }

    pub fn temperature_report(&self, x: &StatePoint) -> Result<TemperatureReport, EntropyError> {
        let entropy = self.entropy(x)?;
        let f = self.model.integrating_factor(x)?;
        let temperature = f / entropy;
        let h = 1e-4 * x[0].abs().max(1e-300);
        let up = self.entropy(&x.with_coord(0, x[0] + h))?;
        let down = self.entropy(&x.with_coord(0, x[0] - h))?;
        let ds_du = (up - down) / (2.0 * h);
        Ok(TemperatureReport {
            temperature,
            entropy,
            integrating_factor: f,
            inverse_check: (ds_du * temperature - 1.0).abs(),
        })
    }
}

impl EntropySurface for EntropyField {
    fn model(&self) -> &ThermoModel {
        &self.model
    }

    fn entropy(&self, x: &StatePoint) -> Result<f64, EntropyError> {
        Ok(self.evaluate(x)?.entropy)
    }
}

/// S = S₀(target) from the reference state.
pub fn reconstruct_entropy(field: &EntropyField, target: &StatePoint) -> Result<f64, EntropyError> {
    field.entropy(target)
}

/// T = f/S at the target.
pub fn temperature(field: &EntropyField, target: &StatePoint) -> Result<f64, EntropyError> {
    field.temperature(target)
}

/// The model's analytic entropy, when it has one, as an [`EntropySurface`].
#[derive(Clone, Debug)]
pub struct AnalyticEntropy {
    model: ThermoModel,
}

impl AnalyticEntropy {
    pub fn new(model: ThermoModel) -> Option<Self> {
        model.analytic_entropy()?;
        Some(AnalyticEntropy { model })
    }
}

impl EntropySurface for AnalyticEntropy {
    fn model(&self) -> &ThermoModel {
        &self.model
    }

    fn entropy(&self, x: &StatePoint) -> Result<f64, EntropyError> {
        self.model
            .analytic_entropy_at(x)
            .expect("checked at construction")
            .map_err(|source| EntropyError::Eval {
                point: x.clone(),
                source,
            })
    }
}
