use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

use super::StatePoint;
use crate::expr::{CompiledExpr, EvalError, Expr};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum FormError {
    #[error("{coefficients} coefficients for {coordinates} coordinates")]
    CoefficientCount {
        coordinates: usize,
        coefficients: usize,
    },
    #[error("coefficient {index} uses `{variable}`, which is not a coordinate")]
    UnknownVariable { index: usize, variable: String },
    #[error("point has {found} coordinates, form has {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("evaluation failed at {point}: {source}")]
    Eval { point: StatePoint, source: EvalError },
    #[error("coefficients of degree -1 admit no Euler potential; integrate by quadrature")]
    DegreeMinusOne,
    #[error("form is not closed at {point} (max normalized residual {residual:e})")]
    NotClosed { point: StatePoint, residual: f64 },
}

/// One Frobenius residual l_ijk at a point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegrabilityResidual {
    pub indices: [usize; 3],
    pub coordinates: [String; 3],
    pub raw: f64,
    pub normalized: f64,
}

/// One closedness residual ∂ⱼωᵢ − ∂ᵢωⱼ (i < j) at a point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactnessResidual {
    pub indices: [usize; 2],
    pub coordinates: [String; 2],
    pub raw: f64,
    pub normalized: f64,
}

/// A differential one-form Σ ωᵢ dxⁱ with expression coefficients.
///
/// `degree` is the nominal homogeneity degree of the coefficients; it is
/// metadata that [`PfaffianForm::check_homogeneity`] verifies, never inferred.
#[derive(Clone, Debug)]
pub struct PfaffianForm {
    coordinates: Vec<String>,
    coefficients: Vec<Expr>,
    degree: f64,
    compiled: Vec<CompiledExpr>,
    // partials[i][j] = ∂ωᵢ/∂xʲ
    partials: OnceLock<Vec<Vec<CompiledExpr>>>,
}

impl PfaffianForm {
    pub fn new(
        coordinates: Vec<String>,
        coefficients: Vec<Expr>,
        degree: f64,
    ) -> Result<Self, FormError> {
        if coordinates.len() != coefficients.len() {
            return Err(FormError::CoefficientCount {
                coordinates: coordinates.len(),
                coefficients: coefficients.len(),
            });
        }
        let names: Vec<&str> = coordinates.iter().map(String::as_str).collect();
        let mut compiled = Vec::with_capacity(coefficients.len());
        for (index, c) in coefficients.iter().enumerate() {
            compiled.push(c.compile(&names).map_err(|e| match e {
                EvalError::MissingVariable(variable) => {
                    FormError::UnknownVariable { index, variable }
                }
                other => unreachable!("compilation only fails on names: {other}"),
            })?);
        }
        Ok(PfaffianForm {
            coordinates,
            coefficients,
            degree,
            compiled,
            partials: OnceLock::new(),
        })
    }

    pub fn coordinates(&self) -> &[String] {
        &self.coordinates
    }

    pub fn coefficients(&self) -> &[Expr] {
        &self.coefficients
    }

    pub fn degree(&self) -> f64 {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.coordinates.len()
    }

    fn names(&self) -> Vec<&str> {
        self.coordinates.iter().map(String::as_str).collect()
    }

    fn check_dim(&self, x: &StatePoint) -> Result<(), FormError> {
        if x.dim() != self.dim() {
            return Err(FormError::Dimension {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        Ok(())
    }

    fn eval_err(x: &StatePoint) -> impl Fn(EvalError) -> FormError + '_ {
        move |source| FormError::Eval {
            point: x.clone(),
            source,
        }
    }

    pub fn coefficient_values(&self, x: &StatePoint) -> Result<Vec<f64>, FormError> {
        self.check_dim(x)?;
        self.compiled
            .iter()
            .map(|c| c.eval(x.coords()))
            .collect::<Result<_, _>>()
            .map_err(Self::eval_err(x))
    }

    /// ω(v) at the point x.
    pub fn contract(&self, x: &StatePoint, v: &[f64]) -> Result<f64, FormError> {
        let w = self.coefficient_values(x)?;
        Ok(w.iter().zip(v).map(|(a, b)| a * b).sum())
    }

    /// i_Y(ω) = Σ xⁱ ωᵢ, the contraction with the radial field.
    pub fn radial_apply(&self, x: &StatePoint) -> Result<f64, FormError> {
        self.contract(x, x.coords())
    }

    /// Σ xⁱ ωᵢ as an expression.
    pub fn radial_expr(&self) -> Expr {
        self.coordinates
            .iter()
            .zip(&self.coefficients)
            .fold(Expr::zero(), |acc, (name, c)| {
                acc + Expr::var(name) * c.clone()
            })
    }

    /// The form ω / g, with coefficient degree `degree`.
    pub fn divided_by(&self, denominator: &Expr, degree: f64) -> PfaffianForm {
        let coefficients = self
            .coefficients
            .iter()
            .map(|c| c.clone() / denominator.clone())
            .collect();
        PfaffianForm::new(self.coordinates.clone(), coefficients, degree)
            .expect("denominator over the same coordinates")
    }

    fn partials(&self) -> &[Vec<CompiledExpr>] {
        self.partials.get_or_init(|| {
            let names = self.names();
            self.coefficients
                .iter()
                .map(|c| {
                    self.coordinates
                        .iter()
                        .map(|v| {
                            c.differentiate(v)
                                .compile(&names)
                                .expect("derivative uses the same variables")
                        })
                        .collect()
                })
                .collect()
        })
    }

    /// Symbolic partials evaluated at x: row i holds ∂ωᵢ/∂xʲ.
    pub fn partial_values(&self, x: &StatePoint) -> Result<Vec<Vec<f64>>, FormError> {
        self.check_dim(x)?;
        self.partials()
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| c.eval(x.coords()))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()
            .map_err(Self::eval_err(x))
    }

    fn normalizer(values: &[f64]) -> f64 {
        values.iter().fold(1.0_f64, |m, v| m.max(v.abs()))
    }

    /// All C(m,3) Frobenius residuals
    /// l_ijk = ωᵢ(∂ₖωⱼ − ∂ⱼωₖ) + ωⱼ(∂ᵢωₖ − ∂ₖωᵢ) + ωₖ(∂ⱼωᵢ − ∂ᵢωⱼ).
    ///
    /// Forms in fewer than three coordinates are always integrable, so the
    /// list is empty for them.
    pub fn integrability_residuals(
        &self,
        x: &StatePoint,
    ) -> Result<Vec<IntegrabilityResidual>, FormError> {
        self.check_dim(x)?;
        let m = self.dim();
        if m < 3 {
            return Ok(Vec::new());
        }
        let w = self.coefficient_values(x)?;
        let d = self.partial_values(x)?;
        let scale = Self::normalizer(&w);
        let mut out = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                for k in j + 1..m {
                    let raw = w[i] * (d[j][k] - d[k][j])
                        + w[j] * (d[k][i] - d[i][k])
                        + w[k] * (d[i][j] - d[j][i]);
                    out.push(IntegrabilityResidual {
                        indices: [i, j, k],
                        coordinates: [
                            self.coordinates[i].clone(),
                            self.coordinates[j].clone(),
                            self.coordinates[k].clone(),
                        ],
                        raw,
                        normalized: raw / scale,
                    });
                }
            }
        }
        Ok(out)
    }

    /// Closedness residuals ∂ⱼωᵢ − ∂ᵢωⱼ for every i < j; all zero iff the
    /// form is closed at x.
    pub fn exactness_residuals(&self, x: &StatePoint) -> Result<Vec<ExactnessResidual>, FormError> {
        let w = self.coefficient_values(x)?;
        let d = self.partial_values(x)?;
        let scale = Self::normalizer(&w);
        let m = self.dim();
        let mut out = Vec::with_capacity(m * (m - 1) / 2);
        for i in 0..m {
            for j in i + 1..m {
                let raw = d[i][j] - d[j][i];
                out.push(ExactnessResidual {
                    indices: [i, j],
                    coordinates: [self.coordinates[i].clone(), self.coordinates[j].clone()],
                    raw,
                    normalized: raw / scale,
                });
            }
        }
        Ok(out)
    }

    pub fn max_exactness_residual(&self, x: &StatePoint) -> Result<f64, FormError> {
        Ok(self
            .exactness_residuals(x)?
            .iter()
            .fold(0.0, |m, r| m.max(r.normalized.abs())))
    }

    /// Potential g = i_Y(ω)/(α+1) of a closed form whose coefficients are
    /// homogeneous of degree α. Degree −1 forms have no such potential.
    pub fn euler_potential(&self, alpha: f64, x: &StatePoint, tol: f64) -> Result<f64, FormError> {
        if (alpha + 1.0).abs() < 1e-12 {
            return Err(FormError::DegreeMinusOne);
        }
        let residual = self.max_exactness_residual(x)?;
        if residual > tol {
            return Err(FormError::NotClosed {
                point: x.clone(),
                residual,
            });
        }
        Ok(self.radial_apply(x)? / (alpha + 1.0))
    }
}
