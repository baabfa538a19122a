use nalgebra::DMatrix;
use serde::Serialize;

use super::AnalysisError;
use crate::entropy::EntropySurface;
use crate::pfaffian::StatePoint;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MinorSign {
    Negative,
    Zero,
    Positive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Minor {
    pub order: usize,
    pub value: f64,
    pub sign: MinorSign,
}

/// Counts of negative, zero and positive eigenvalues.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EigenSignature {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HessianReport {
    pub point: StatePoint,
    pub entropy: f64,
    pub gradient: Vec<f64>,
    /// Closed-form Hessian, symmetrized.
    pub hessian: Vec<Vec<f64>>,
    /// max|Hᵢⱼ − Hⱼᵢ| / max|H| before symmetrizing.
    pub asymmetry: f64,
    pub minors: Vec<Minor>,
    pub determinant: f64,
    /// xᵀ(D²S)x.
    pub radial_form: f64,
    /// |xᵀ(D²S)x| / (max|H|·‖x‖²).
    pub radial_form_relative: f64,
    pub eigenvalues: Vec<f64>,
    pub eigen_signature: EigenSignature,
    pub finite_difference: Vec<Vec<f64>>,
    /// max|H − H_fd| / max|H|.
    pub cross_check_deviation: f64,
    pub cross_check_passed: bool,
    /// Odd leading minors negative, even ones positive, determinant zero.
    pub concave: bool,
}

impl HessianReport {
    pub fn scale(&self) -> f64 {
        max_abs(&self.hessian)
    }
}

fn max_abs(m: &[Vec<f64>]) -> f64 {
    m.iter().flatten().fold(0.0, |a, v| a.max(v.abs()))
}

/// Dᵢⱼ S = S/f²·(ωᵢωⱼ + f∂ⱼωᵢ − ωᵢ∂ⱼf), with ∂ⱼf = ωⱼ + Σₖ xᵏ∂ⱼωₖ.
fn closed_form(
    surface: &impl EntropySurface,
    x: &StatePoint,
    s: f64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>), AnalysisError> {
    let form = surface.model().heat_form();
    let w = form.coefficient_values(x)?;
    let d = form.partial_values(x)?;
    let f = form.radial_apply(x)?;
    let m = x.dim();
    let df: Vec<f64> = (0..m)
        .map(|j| w[j] + (0..m).map(|k| x[k] * d[k][j]).sum::<f64>())
        .collect();
    let gradient = w.iter().map(|wi| s * wi / f).collect();
    let pre = s / (f * f);
    let h = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| pre * (w[i] * w[j] + f * d[i][j] - w[i] * df[j]))
                .collect()
        })
        .collect();
    Ok((gradient, h))
}

fn finite_difference(
    surface: &impl EntropySurface,
    x: &StatePoint,
    s: f64,
) -> Result<Vec<Vec<f64>>, AnalysisError> {
    let m = x.dim();
    let step: Vec<f64> = (0..m).map(|i| 1e-3 * x[i].abs().max(1e-6)).collect();
    let shifted = |moves: &[(usize, f64)]| {
        let mut y = x.clone();
        for &(i, sign) in moves {
            y = y.with_coord(i, y[i] + sign * step[i]);
        }
        surface.entropy(&y)
    };
    let mut h = vec![vec![0.0; m]; m];
    for i in 0..m {
        let up = shifted(&[(i, 1.0)])?;
        let down = shifted(&[(i, -1.0)])?;
        h[i][i] = (up - 2.0 * s + down) / (step[i] * step[i]);
        for j in 0..i {
            let pp = shifted(&[(i, 1.0), (j, 1.0)])?;
            let pm = shifted(&[(i, 1.0), (j, -1.0)])?;
            let mp = shifted(&[(i, -1.0), (j, 1.0)])?;
            let mm = shifted(&[(i, -1.0), (j, -1.0)])?;
            let v = (pp - pm - mp + mm) / (4.0 * step[i] * step[j]);
            h[i][j] = v;
            h[j][i] = v;
        }
    }
    Ok(h)
}

fn classify(value: f64, zero_band: f64) -> MinorSign {
    if value.abs() <= zero_band {
        MinorSign::Zero
    } else if value < 0.0 {
        MinorSign::Negative
    } else {
        MinorSign::Positive
    }
}

/// Hessian of S at x from the closed form in the state equations, checked
/// against second differences of `surface`.
///
/// `minor_band` sets the zero band of the order-k minor to
/// band·(max|H|)ᵏ; `cross_check_tol` bounds max|H − H_fd| / max|H|.
pub fn entropy_hessian(
    surface: &impl EntropySurface,
    x: &StatePoint,
    minor_band: f64,
    cross_check_tol: f64,
) -> Result<HessianReport, AnalysisError> {
    let model = surface.model();
    if !model.admissible(x) {
        return Err(AnalysisError::NotInterior(x.clone()));
    }
    let s = surface.entropy(x)?;
    let (gradient, raw) = closed_form(surface, x, s)?;
    let m = x.dim();
    let scale = max_abs(&raw);
    let mut asymmetry: f64 = 0.0;
    let mut h = raw.clone();
    for i in 0..m {
        for j in 0..i {
            asymmetry = asymmetry.max((raw[i][j] - raw[j][i]).abs());
            let v = 0.5 * (raw[i][j] + raw[j][i]);
            h[i][j] = v;
            h[j][i] = v;
        }
    }
    if scale > 0.0 {
        asymmetry /= scale;
    }

    let mat = DMatrix::from_fn(m, m, |i, j| h[i][j]);
    let minors: Vec<Minor> = (1..=m)
        .map(|k| {
            let value = mat.view((0, 0), (k, k)).into_owned().determinant();
            Minor {
                order: k,
                value,
                sign: classify(value, minor_band * scale.powi(k as i32)),
            }
        })
        .collect();
    let determinant = minors[m - 1].value;
    let pattern = minors.iter().all(|mn| {
        if mn.order == m {
            mn.sign == MinorSign::Zero
        } else if mn.order % 2 == 1 {
            mn.sign == MinorSign::Negative
        } else {
            mn.sign == MinorSign::Positive
        }
    });

    let mut eigenvalues: Vec<f64> = mat.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    let eigen_band = minor_band * scale;
    let mut eigen_signature = EigenSignature {
        negative: 0,
        zero: 0,
        positive: 0,
    };
    for &e in &eigenvalues {
        match classify(e, eigen_band) {
            MinorSign::Negative => eigen_signature.negative += 1,
            MinorSign::Zero => eigen_signature.zero += 1,
            MinorSign::Positive => eigen_signature.positive += 1,
        }
    }

    let radial_form: f64 = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| x[i] * h[i][j] * x[j])
        .sum();
    let norm2 = x.norm().powi(2);
    let radial_form_relative = if scale > 0.0 {
        radial_form.abs() / (scale * norm2)
    } else {
        0.0
    };

    let fd = finite_difference(surface, x, s)?;
    let mut deviation: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            deviation = deviation.max((h[i][j] - fd[i][j]).abs());
        }
    }
    if scale > 0.0 {
        deviation /= scale;
    }

    Ok(HessianReport {
        point: x.clone(),
        entropy: s,
        gradient,
        hessian: h,
        asymmetry,
        minors,
        determinant,
        radial_form,
        radial_form_relative,
        eigenvalues,
        eigen_signature,
        finite_difference: fd,
        cross_check_deviation: deviation,
        cross_check_passed: deviation <= cross_check_tol,
        concave: pattern,
    })
}

/// The two explicit inequalities for (U, V, N) models, or the minor test
/// for other arities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcavityReport {
    pub point: StatePoint,
    /// True when the model has exactly three coordinates.
    pub explicit: bool,
    /// 1 − ∂f/∂U; negative means C_{V,N} > 0.
    pub heat_capacity_term: Option<f64>,
    /// (1 − ∂_U f)(p² + f∂_V p − p∂_V f) − (p − ∂_V f)².
    pub second_minor_term: Option<f64>,
    /// Verdict of the minor test, when it was used.
    pub minor_test: Option<bool>,
    pub passed: bool,
}

pub fn concavity_conditions(
    surface: &impl EntropySurface,
    x: &StatePoint,
    minor_band: f64,
    cross_check_tol: f64,
) -> Result<ConcavityReport, AnalysisError> {
    let model = surface.model();
    if model.dim() != 3 {
        let h = entropy_hessian(surface, x, minor_band, cross_check_tol)?;
        return Ok(ConcavityReport {
            point: x.clone(),
            explicit: false,
            heat_capacity_term: None,
            second_minor_term: None,
            minor_test: Some(h.concave),
            passed: h.concave,
        });
    }
    if !model.admissible(x) {
        return Err(AnalysisError::NotInterior(x.clone()));
    }
    let form = model.heat_form();
    let w = form.coefficient_values(x)?;
    let d = form.partial_values(x)?;
    let f = form.radial_apply(x)?;
    let df = |j: usize| w[j] + (0..3).map(|k| x[k] * d[k][j]).sum::<f64>();
    let p = w[1];
    let c1 = 1.0 - df(0);
    let c2 = c1 * (p * p + f * d[1][1] - p * df(1)) - (p - df(1)).powi(2);
    Ok(ConcavityReport {
        point: x.clone(),
        explicit: true,
        heat_capacity_term: Some(c1),
        second_minor_term: Some(c2),
        minor_test: None,
        passed: c1 < 0.0 && c2 > 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{AnalyticEntropy, EntropyField};
    use crate::expr::Expr;
    use crate::models;
    use crate::pfaffian::{ModelDefinition, ThermoModel};
    use crate::tolerances::Tolerances;

    #[test]
    fn photon_hessian_at_unit_state() {
        let field = EntropyField::new(models::photon_gas(), Tolerances::default());
        let r = entropy_hessian(&field, &[1.0, 1.0].into(), 1e-9, 1e-4).unwrap();
        let want = [[-3.0 / 16.0, 3.0 / 16.0], [3.0 / 16.0, -3.0 / 16.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((r.hessian[i][j] - want[i][j]).abs() < 1e-14);
            }
        }
        assert!(r.determinant.abs() < 1e-15);
        assert!(r.concave);
        assert!(r.cross_check_passed, "{}", r.cross_check_deviation);
        assert_eq!(
            r.eigen_signature,
            EigenSignature {
                negative: 1,
                zero: 1,
                positive: 0
            }
        );
    }

    #[test]
    fn ideal_gas_inequalities() {
        let surface = AnalyticEntropy::new(models::default_ideal_gas()).unwrap();
        let r = concavity_conditions(&surface, &[1.0, 1.0, 1.0].into(), 1e-9, 1e-4).unwrap();
        assert!(r.explicit);
        assert!(r.heat_capacity_term.unwrap() < 0.0);
        assert!(r.second_minor_term.unwrap() > 0.0);
        assert!(r.passed);
    }

    #[test]
    fn photon_falls_back_to_minors() {
        let surface = AnalyticEntropy::new(models::photon_gas()).unwrap();
        let r = concavity_conditions(&surface, &[2.0, 3.0].into(), 1e-9, 1e-4).unwrap();
        assert!(!r.explicit);
        assert_eq!(r.minor_test, Some(true));
    }

    #[test]
    fn flipped_pressure_is_not_concave() {
        let m = ThermoModel::new(ModelDefinition::new(
            "flipped",
            &["U", "V"],
            Expr::parse("-U/(3*V)").unwrap(),
            vec![],
            [1.0, 1.0],
        ))
        .unwrap();
        let field = EntropyField::new(m, Tolerances::default());
        let r = concavity_conditions(&field, &[2.0, 2.0].into(), 1e-9, 1e-4).unwrap();
        assert!(!r.passed);
    }
}
