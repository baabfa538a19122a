use std::collections::BTreeSet;

use thiserror::Error;

use super::{FormError, Interval, PfaffianForm, StatePoint};
use crate::expr::{CompiledExpr, EvalError, Expr};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("a model needs at least the energy and volume coordinates, got {0}")]
    TooFewCoordinates(usize),
    #[error("invalid coordinate name `{0}`")]
    InvalidCoordinate(String),
    #[error("coordinate `{0}` is declared twice")]
    DuplicateCoordinate(String),
    #[error("{found} conjugate intensities for {expected} extra coordinates")]
    ConjugateCount { expected: usize, found: usize },
    #[error("{found} bounds for {expected} coordinates")]
    BoundsCount { expected: usize, found: usize },
    #[error("bounds of `{coordinate}` are not an open interval: ({lower}, {upper})")]
    InvalidBounds {
        coordinate: String,
        lower: f64,
        upper: f64,
    },
    #[error("{field} uses `{variable}`, which is not a coordinate")]
    UnknownVariable { field: String, variable: String },
    #[error("boundary function depends on the energy coordinate `{0}`")]
    BoundaryDependsOnEnergy(String),
    #[error("reference state has {found} coordinates, model has {expected}")]
    ReferenceDimension { expected: usize, found: usize },
    #[error("reference coordinate `{coordinate}` = {value} lies outside its bounds")]
    ReferenceOutOfBounds { coordinate: String, value: f64 },
    #[error("reference state is not above the ground surface (B = {0})")]
    ReferenceOnBoundary(f64),
    #[error("integrating factor is {0} at the reference state; it must be positive")]
    ReferenceFactorNotPositive(f64),
    #[error("reference entropy must be finite and positive, got {0}")]
    InvalidReferenceEntropy(f64),
    #[error("evaluating {field} at the reference state: {source}")]
    ReferenceEval { field: String, source: EvalError },
}

/// Everything needed to build a [`ThermoModel`].
///
/// Coordinate 0 is the internal energy and coordinate 1 the volume; the rest
/// are the additional extensive variables, one per conjugate intensity.
#[derive(Clone, Debug)]
pub struct ModelDefinition {
    pub name: String,
    pub coordinates: Vec<String>,
    pub pressure: Expr,
    pub conjugates: Vec<Expr>,
    pub boundary: Option<Expr>,
    pub bounds: Vec<Interval>,
    pub reference: StatePoint,
    pub reference_entropy: f64,
    pub analytic_entropy: Option<Expr>,
}

impl ModelDefinition {
    /// A definition with every bound set to (0, ∞), no boundary function,
    /// no analytic entropy, and S₀ = 1.
    pub fn new(
        name: impl Into<String>,
        coordinates: &[&str],
        pressure: Expr,
        conjugates: Vec<Expr>,
        reference: impl Into<StatePoint>,
    ) -> Self {
        ModelDefinition {
            name: name.into(),
            coordinates: coordinates.iter().map(|s| s.to_string()).collect(),
            pressure,
            conjugates,
            boundary: None,
            bounds: vec![Interval::positive(); coordinates.len()],
            reference: reference.into(),
            reference_entropy: 1.0,
            analytic_entropy: None,
        }
    }

    pub fn with_boundary(mut self, b: Expr) -> Self {
        self.boundary = Some(b);
        self
    }

    pub fn with_analytic_entropy(mut self, s: Expr) -> Self {
        self.analytic_entropy = Some(s);
        self
    }

    pub fn with_reference_entropy(mut self, s0: f64) -> Self {
        self.reference_entropy = s0;
        self
    }

    pub fn with_bounds(mut self, bounds: Vec<Interval>) -> Self {
        self.bounds = bounds;
        self
    }
}

fn valid_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && s != "ln"
        && s != "exp"
}

/// A validated homogeneous system: its state equations, domain, reference
/// state and heat form ω = dU + p dV − Σ ξᵢ dXⁱ.
#[derive(Clone, Debug)]
pub struct ThermoModel {
    def: ModelDefinition,
    heat_form: PfaffianForm,
    factor: Expr,
    boundary: Option<CompiledExpr>,
    analytic: Option<CompiledExpr>,
}

impl ThermoModel {
    pub fn new(def: ModelDefinition) -> Result<Self, ModelError> {
        let m = def.coordinates.len();
        if m < 2 {
            return Err(ModelError::TooFewCoordinates(m));
        }
        let mut seen = BTreeSet::new();
        for c in &def.coordinates {
            if !valid_identifier(c) {
                return Err(ModelError::InvalidCoordinate(c.clone()));
            }
            if !seen.insert(c.as_str()) {
                return Err(ModelError::DuplicateCoordinate(c.clone()));
            }
        }
        if def.conjugates.len() != m - 2 {
            return Err(ModelError::ConjugateCount {
                expected: m - 2,
                found: def.conjugates.len(),
            });
        }
        if def.bounds.len() != m {
            return Err(ModelError::BoundsCount {
                expected: m,
                found: def.bounds.len(),
            });
        }
        for (c, b) in def.coordinates.iter().zip(&def.bounds) {
            if !b.is_valid() {
                return Err(ModelError::InvalidBounds {
                    coordinate: c.clone(),
                    lower: b.lower,
                    upper: b.upper,
                });
            }
        }

        let names: Vec<&str> = def.coordinates.iter().map(String::as_str).collect();
        let compile = |field: &str, e: &Expr| {
            e.compile(&names).map_err(|err| match err {
                EvalError::MissingVariable(variable) => ModelError::UnknownVariable {
                    field: field.to_string(),
                    variable,
                },
                other => unreachable!("compilation only fails on names: {other}"),
            })
        };
        compile("pressure", &def.pressure)?;
        for (i, xi) in def.conjugates.iter().enumerate() {
            compile(&format!("conjugate of `{}`", def.coordinates[i + 2]), xi)?;
        }
        let boundary = match &def.boundary {
            Some(b) => {
                if b.depends_on(&def.coordinates[0]) {
                    return Err(ModelError::BoundaryDependsOnEnergy(def.coordinates[0].clone()));
                }
                Some(compile("boundary", b)?)
            }
            None => None,
        };
        let analytic = match &def.analytic_entropy {
            Some(s) => Some(compile("analytic entropy", s)?),
            None => None,
        };

        let mut coefficients = vec![Expr::one(), def.pressure.clone()];
        coefficients.extend(def.conjugates.iter().map(|xi| -xi.clone()));
        let heat_form = PfaffianForm::new(def.coordinates.clone(), coefficients, 0.0)
            .expect("coefficients were compiled against the coordinates");
        let factor = heat_form.radial_expr();

        let model = ThermoModel {
            def,
            heat_form,
            factor,
            boundary,
            analytic,
        };
        model.validate_reference()?;
        Ok(model)
    }

    fn validate_reference(&self) -> Result<(), ModelError> {
        let x = &self.def.reference;
        if x.dim() != self.dim() {
            return Err(ModelError::ReferenceDimension {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        for ((c, b), &v) in self.def.coordinates.iter().zip(&self.def.bounds).zip(x.coords()) {
            if !v.is_finite() || !b.contains(v) {
                return Err(ModelError::ReferenceOutOfBounds {
                    coordinate: c.clone(),
                    value: v,
                });
            }
        }
        let s0 = self.def.reference_entropy;
        if !(s0.is_finite() && s0 > 0.0) {
            return Err(ModelError::InvalidReferenceEntropy(s0));
        }
        let b = self
            .energy_above_ground(x)
            .map_err(|source| ModelError::ReferenceEval {
                field: "boundary".into(),
                source,
            })?;
        if b <= 0.0 {
            return Err(ModelError::ReferenceOnBoundary(b));
        }
        let f = self.integrating_factor(x).map_err(|e| match e {
            FormError::Eval { source, .. } => ModelError::ReferenceEval {
                field: "integrating factor".into(),
                source,
            },
            other => unreachable!("reference dimension already checked: {other}"),
        })?;
        if f <= 0.0 {
            return Err(ModelError::ReferenceFactorNotPositive(f));
        }
        Ok(())
    }

    pub fn definition(&self) -> &ModelDefinition {
        &self.def
    }

    pub fn name(&self) -> &str {
        &self.def.name
    }

    pub fn coordinates(&self) -> &[String] {
        &self.def.coordinates
    }

    pub fn dim(&self) -> usize {
        self.def.coordinates.len()
    }

    pub fn pressure(&self) -> &Expr {
        &self.def.pressure
    }

    pub fn conjugates(&self) -> &[Expr] {
        &self.def.conjugates
    }

    pub fn boundary(&self) -> Option<&Expr> {
        self.def.boundary.as_ref()
    }

    pub fn bounds(&self) -> &[Interval] {
        &self.def.bounds
    }

    pub fn reference(&self) -> &StatePoint {
        &self.def.reference
    }

    pub fn reference_entropy(&self) -> f64 {
        self.def.reference_entropy
    }

    pub fn analytic_entropy(&self) -> Option<&Expr> {
        self.def.analytic_entropy.as_ref()
    }

    pub fn heat_form(&self) -> &PfaffianForm {
        &self.heat_form
    }

    /// f = U + pV − Σ ξᵢXⁱ as an expression.
    pub fn integrating_factor_expr(&self) -> &Expr {
        &self.factor
    }

    /// The same model with a different S₀ at the reference state.
    pub fn with_reference_entropy(&self, s0: f64) -> Result<ThermoModel, ModelError> {
        ThermoModel::new(self.def.clone().with_reference_entropy(s0))
    }

    /// f = i_Y(ω) at x.
    pub fn integrating_factor(&self, x: &StatePoint) -> Result<f64, FormError> {
        self.heat_form.radial_apply(x)
    }

    /// b(V, X¹…Xⁿ), or 0 without a boundary function.
    pub fn ground_energy(&self, x: &StatePoint) -> Result<f64, EvalError> {
        match &self.boundary {
            Some(b) => b.eval(x.coords()),
            None => Ok(0.0),
        }
    }

    /// B = U − b.
    pub fn energy_above_ground(&self, x: &StatePoint) -> Result<f64, EvalError> {
        Ok(x[0] - self.ground_energy(x)?)
    }

    /// The state with the same non-energy coordinates as `x` and B = `b`.
    pub fn at_energy_above_ground(&self, x: &StatePoint, b: f64) -> Result<StatePoint, EvalError> {
        Ok(x.with_coord(0, self.ground_energy(x)? + b))
    }

    pub fn in_bounds(&self, x: &StatePoint) -> bool {
        x.dim() == self.dim()
            && x.is_finite()
            && self.def.bounds.iter().zip(x.coords()).all(|(b, &v)| b.contains(v))
    }

    /// Inside the coordinate bounds and strictly above the ground surface.
    pub fn contains(&self, x: &StatePoint) -> bool {
        self.in_bounds(x) && matches!(self.energy_above_ground(x), Ok(b) if b > 0.0)
    }

    /// Inside the domain with a positive, finite integrating factor.
    pub fn admissible(&self, x: &StatePoint) -> bool {
        self.contains(x) && matches!(self.integrating_factor(x), Ok(f) if f > 0.0)
    }

    pub fn analytic_entropy_at(&self, x: &StatePoint) -> Option<Result<f64, EvalError>> {
        self.analytic.as_ref().map(|s| s.eval(x.coords()))
    }

    /// p and ξ₁…ξₙ at x, in coordinate order after the energy.
    pub fn intensities(&self, x: &StatePoint) -> Result<Vec<f64>, FormError> {
        let mut w = self.heat_form.coefficient_values(x)?;
        w.remove(0);
        for v in w.iter_mut().skip(1) {
            *v = -*v;
        }
        Ok(w)
    }
}
