//! Diagnostics on a reconstructed entropy: concavity, density reduction,
//! heat capacities and zero sets, third-law triage and level-set solving.

mod boundary;
mod density;
mod hessian;
mod leaf;

use thiserror::Error;

pub use boundary::{
    approach_along_energy, heat_capacity_along_path, mayer_lie_residuals, third_law_classify,
    zero_set_scan, ApproachSample, CornerSide, MayerLieResidual, Ray, ThirdLawClass,
    ThirdLawReport, ZeroLocation, ZeroSetReport,
};
pub use density::{closed_system_entropy, reduce_to_densities, DensityModel};
pub use hessian::{
    concavity_conditions, entropy_hessian, ConcavityReport, EigenSignature, HessianReport, Minor,
    MinorSign,
};
pub use leaf::{leaf_branch, leaf_solve, radial_crossings, LeafSolution};

use crate::entropy::{EntropyError, PathError};
use crate::expr::EvalError;
use crate::pfaffian::{FormError, StatePoint};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error("evaluation failed at {point}: {source}")]
    Eval { point: StatePoint, source: EvalError },
    #[error("{0} is not an interior state with f > 0")]
    NotInterior(StatePoint),
    #[error("path parameter {0} is a corner between segments; ask for a one-sided value")]
    Corner(f64),
    #[error("level must be positive, got {0}")]
    NonPositiveLevel(f64),
    #[error("no state on the fiber has S = {level}; attained range is [{min}, {max}]")]
    NoLeafSolution { level: f64, min: f64, max: f64 },
    #[error("S is not increasing in the energy at {0} (T ≤ 0)")]
    NotIncreasing(StatePoint),
    #[error("approach path must end with B ≤ {epsilon}, got B = {found}")]
    ApproachTooShort { epsilon: f64, found: f64 },
    #[error("density reduction unsupported: {0}")]
    Unsupported(String),
}

pub(crate) fn eval_at(point: &StatePoint) -> impl Fn(EvalError) -> AnalysisError + '_ {
    move |source| AnalysisError::Eval {
        point: point.clone(),
        source,
    }
}
