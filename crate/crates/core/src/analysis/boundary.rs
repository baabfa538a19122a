use serde::Serialize;

use super::{eval_at, AnalysisError};
use crate::entropy::{entropy_form, EntropyField, EntropySurface, PathSpec};
use crate::expr::Expr;
use crate::pfaffian::{StatePoint, ThermoModel};
use crate::quadrature::integrate;

/// Which segment to use at an interior waypoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CornerSide {
    Before,
    After,
}

/// C_γ(t) = ω(γ̇(t)) at γ(t). Interior waypoints are refused unless a side
/// is given.
pub fn heat_capacity_along_path(
    model: &ThermoModel,
    path: &PathSpec,
    t: f64,
    side: Option<CornerSide>,
) -> Result<f64, AnalysisError> {
    let n = path.segment_count();
    let corner = t.fract() == 0.0 && t > 0.0 && t < n as f64;
    let velocity = match (corner, side) {
        (true, None) => return Err(AnalysisError::Corner(t)),
        (true, Some(CornerSide::Before)) => path.velocity_at(t - 0.5)?,
        _ => path.velocity_at(t)?,
    };
    let x = path.point_at(t)?;
    Ok(model.heat_form().contract(&x, &velocity)?)
}

/// A straight probe from an interior state toward the boundary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ray {
    pub start: StatePoint,
    pub end: StatePoint,
}

impl Ray {
    /// From `start` at fixed non-energy coordinates down to B = `epsilon`.
    pub fn toward_ground(model: &ThermoModel, start: &StatePoint, epsilon: f64) -> Result<Ray, AnalysisError> {
        let end = model
            .at_energy_above_ground(start, epsilon)
            .map_err(eval_at(start))?;
        Ok(Ray {
            start: start.clone(),
            end,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroLocation {
    pub ray: usize,
    pub point: StatePoint,
    pub energy_above_ground: f64,
    pub integrating_factor: f64,
    /// False for zeros strictly inside the domain.
    pub boundary_adjacent: bool,
    /// 1/(∂S/∂U) from the analytic entropy, when the model has one.
    pub analytic_temperature: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroSetReport {
    pub zeros: Vec<ZeroLocation>,
    /// Some interior zero of f has a positive analytic temperature, so
    /// Z(f) is strictly larger than Z(T).
    pub factor_zeros_exceed_temperature_zeros: bool,
}

impl ZeroSetReport {
    pub fn interior(&self) -> impl Iterator<Item = &ZeroLocation> {
        self.zeros.iter().filter(|z| !z.boundary_adjacent)
    }
}

const SCAN_SAMPLES: usize = 256;

/// Near-zeros of f along each ray: sign changes (refined by bisection) and
/// samples with |f| ≤ `tol`·max|f| on the ray.
///
/// A zero is boundary-adjacent when its B is at most 1e-6 of the ray's
/// starting B.
pub fn zero_set_scan(model: &ThermoModel, rays: &[Ray], tol: f64) -> ZeroSetReport {
    let analytic_t = model.analytic_entropy().map(|s| {
        let names: Vec<&str> = model.coordinates().iter().map(String::as_str).collect();
        s.differentiate(&model.coordinates()[0])
            .compile(&names)
            .expect("analytic entropy was validated")
    });
    let f_at = |x: &StatePoint| model.integrating_factor(x).ok().filter(|v| v.is_finite());
    let mut zeros = Vec::new();
    for (index, ray) in rays.iter().enumerate() {
        let b_start = model.energy_above_ground(&ray.start).unwrap_or(f64::NAN);
        let samples: Vec<(f64, Option<f64>)> = (0..SCAN_SAMPLES)
            .map(|k| {
                let s = k as f64 / (SCAN_SAMPLES - 1) as f64;
                (s, f_at(&ray.start.lerp(&ray.end, s)))
            })
            .collect();
        let scale = samples
            .iter()
            .filter_map(|(_, v)| *v)
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut found: Vec<f64> = Vec::new();
        for w in samples.windows(2) {
            if let ((s0, Some(v0)), (s1, Some(v1))) = (w[0], w[1]) {
                if v0 > 0.0 && v1 <= 0.0 || v0 <= 0.0 && v1 > 0.0 {
                    let (mut lo, mut hi) = (s0, s1);
                    for _ in 0..60 {
                        let mid = 0.5 * (lo + hi);
                        match f_at(&ray.start.lerp(&ray.end, mid)) {
                            Some(v) if (v > 0.0) == (v0 > 0.0) => lo = mid,
                            _ => hi = mid,
                        }
                    }
                    found.push(0.5 * (lo + hi));
                }
            }
        }
        for &(s, v) in &samples {
            if let Some(v) = v {
                if v.abs() <= tol * scale && !found.iter().any(|z| (z - s).abs() < 1.5 / SCAN_SAMPLES as f64) {
                    found.push(s);
                }
            }
        }
        found.sort_by(f64::total_cmp);
        for s in found {
            let point = ray.start.lerp(&ray.end, s);
            let b = model.energy_above_ground(&point).unwrap_or(f64::NAN);
            let analytic_temperature = analytic_t
                .as_ref()
                .and_then(|d| d.eval(point.coords()).ok())
                .map(|ds| 1.0 / ds);
            zeros.push(ZeroLocation {
                ray: index,
                integrating_factor: f_at(&point).unwrap_or(f64::NAN),
                boundary_adjacent: b <= 1e-6 * b_start,
                energy_above_ground: b,
                analytic_temperature,
                point,
            });
        }
    }
    let exceed = zeros
        .iter()
        .any(|z| !z.boundary_adjacent && z.analytic_temperature.is_some_and(|t| t > 0.0));
    ZeroSetReport {
        zeros,
        factor_zeros_exceed_temperature_zeros: exceed,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThirdLawClass {
    PlanckCompliant,
    PlanckViolating,
    PositivityViolating,
    Inconclusive,
}

impl ThirdLawClass {
    pub fn label(self) -> &'static str {
        match self {
            ThirdLawClass::PlanckCompliant => "planck-compliant",
            ThirdLawClass::PlanckViolating => "planck-violating",
            ThirdLawClass::PositivityViolating => "positivity-violating",
            ThirdLawClass::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproachSample {
    pub energy_above_ground: f64,
    pub point: StatePoint,
    pub hat_s: f64,
    pub entropy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThirdLawReport {
    pub model: String,
    pub approach: Vec<StatePoint>,
    pub samples: Vec<ApproachSample>,
    /// First state on the approach with f ≤ 0, if any.
    pub interior_zero: Option<StatePoint>,
    /// dŜ/d ln B over the last two decades sampled.
    pub slope: Option<f64>,
    pub limit_entropy: Option<f64>,
    /// S at twice the last sampled state.
    pub scaled_limit_entropy: Option<f64>,
    pub reliable: bool,
    pub classification: ThirdLawClass,
    pub reason: String,
}

/// Straight approach from `start` down the energy axis to B = `epsilon`.
pub fn approach_along_energy(
    field: &EntropyField,
    start: &StatePoint,
    epsilon: f64,
) -> Result<PathSpec, AnalysisError> {
    let model = field.model();
    let end = model.at_energy_above_ground(start, epsilon).map_err(eval_at(start))?;
    Ok(PathSpec::new(vec![start.clone(), end], field.tolerances().quadrature_settings())?)
}

const DECADES: i32 = 8;
const PROBES_PER_DECADE: usize = 16;

/// Ŝ along `approach` at B = 10⁻¹ … 10⁻⁸ on its final segment, and the
/// verdict: divergence to −∞ (compliant), a finite limit (violating), or an
/// interior f ≤ 0 reached first (positivity-violating).
pub fn third_law_classify(field: &EntropyField, approach: &PathSpec) -> Result<ThirdLawReport, AnalysisError> {
    let model = field.model();
    let tol = field.tolerances();
    let end = approach.target();
    let b_end = model.energy_above_ground(end).map_err(eval_at(end))?;
    if b_end > tol.boundary_epsilon * (1.0 + 1e-9) {
        return Err(AnalysisError::ApproachTooShort {
            epsilon: tol.boundary_epsilon,
            found: b_end,
        });
    }
    let n = approach.segment_count();
    let (seg_a, seg_b) = approach.segments().last().ok_or(AnalysisError::ApproachTooShort {
        epsilon: tol.boundary_epsilon,
        found: b_end,
    })?;
    let b_of = |t: f64| model.energy_above_ground(&seg_a.lerp(seg_b, t));
    let b_seg_start = b_of(0.0).map_err(eval_at(seg_a))?;

    // t on the final segment where B reaches each level
    let solve = |level: f64| -> Result<f64, AnalysisError> {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let b = b_of(mid).map_err(eval_at(seg_a))?;
            if b > level {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    };
    let levels: Vec<(f64, f64)> = (1..=DECADES)
        .map(|k| 10f64.powi(-k))
        .filter(|&l| l < b_seg_start)
        .map(|l| solve(l).map(|t| (l, t)))
        .collect::<Result<_, _>>()?;

    let mut report = ThirdLawReport {
        model: model.name().to_string(),
        approach: approach.waypoints().to_vec(),
        samples: Vec::new(),
        interior_zero: None,
        slope: None,
        limit_entropy: None,
        scaled_limit_entropy: None,
        reliable: true,
        classification: ThirdLawClass::Inconclusive,
        reason: String::new(),
    };

    // scan for f ≤ 0 before the last level: earlier segments evenly, the
    // final one evenly and then geometrically in B
    let mut probes: Vec<f64> = Vec::new();
    for i in 0..n {
        for k in 0..=32 {
            probes.push(i as f64 + k as f64 / 32.0);
        }
    }
    let mut prev_t = 0.0;
    for &(_, t) in &levels {
        for k in 1..=PROBES_PER_DECADE {
            let s = k as f64 / PROBES_PER_DECADE as f64;
            // geometric in B between consecutive levels
            let b0 = b_of(prev_t).map_err(eval_at(seg_a))?;
            let b1 = b_of(t).map_err(eval_at(seg_a))?;
            let target = b0 * (b1 / b0).powf(s);
            let tt = solve(target)?;
            probes.push((n - 1) as f64 + tt);
        }
        prev_t = t;
    }
    probes.sort_by(f64::total_cmp);
    probes.dedup();
    let last_level_t = levels.last().map(|&(_, t)| (n - 1) as f64 + t).unwrap_or(n as f64);
    let mut last_good = 0.0;
    for &t in probes.iter().filter(|&&t| t <= last_level_t) {
        let x = approach.point_at(t)?;
        let ok = model.contains(&x) && matches!(model.integrating_factor(&x), Ok(f) if f > 0.0);
        if !ok {
            let (mut lo, mut hi) = (last_good, t);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let y = approach.point_at(mid)?;
                if model.contains(&y) && matches!(model.integrating_factor(&y), Ok(f) if f > 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            report.interior_zero = Some(approach.point_at(hi)?);
            report.classification = ThirdLawClass::PositivityViolating;
            report.reason = format!(
                "f ≤ 0 inside the domain at B = {:e} before the boundary is reached",
                model
                    .energy_above_ground(report.interior_zero.as_ref().unwrap())
                    .unwrap_or(f64::NAN)
            );
            return Ok(report);
        }
        last_good = t;
    }

    // Ŝ at the start of the final segment, then level by level
    let start_value = field.evaluate(seg_a)?;
    let form = entropy_form(model);
    let delta: Vec<f64> = seg_b.coords().iter().zip(seg_a.coords()).map(|(b, a)| b - a).collect();
    let mut hat = start_value.hat_s;
    report.reliable = start_value.reliable;
    let mut t_prev = 0.0;
    for &(level, t) in &levels {
        let q = integrate(
            |s| {
                let x = seg_a.lerp(seg_b, s);
                let f = model.integrating_factor(&x)?;
                if f <= 0.0 {
                    return Err(AnalysisError::NotInterior(x));
                }
                Ok(form.contract(&x, &delta)?)
            },
            t_prev,
            t,
            approach.settings(),
        )?;
        hat += q.value;
        report.reliable &= q.reliable;
        let point = seg_a.lerp(seg_b, t);
        report.samples.push(ApproachSample {
            energy_above_ground: level,
            entropy: field.reference_entropy() * hat.exp(),
            hat_s: hat,
            point,
        });
        t_prev = t;
    }

    let k = report.samples.len();
    if k < 3 {
        report.reason = "fewer than three decades of B were sampled".into();
        return Ok(report);
    }
    let (a, b) = (&report.samples[k - 3], &report.samples[k - 1]);
    let slope = (b.hat_s - a.hat_s) / (b.energy_above_ground.ln() - a.energy_above_ground.ln());
    report.slope = Some(slope);
    if !report.reliable {
        report.reason = "quadrature hit its subdivision cap".into();
        return Ok(report);
    }
    if slope.abs() >= tol.divergence_slope {
        report.classification = ThirdLawClass::PlanckCompliant;
        report.reason = format!("Ŝ diverges with slope {slope:.4} in ln B");
    } else if slope.abs() < tol.convergence_slope {
        let limit = b.entropy;
        report.limit_entropy = Some(limit);
        if let Ok(scaled) = field.evaluate(&b.point.scaled(2.0)) {
            report.scaled_limit_entropy = Some(scaled.entropy);
        }
        report.classification = ThirdLawClass::PlanckViolating;
        report.reason = format!("Ŝ converges (slope {slope:.2e}); S tends to {limit:.6} > 0");
    } else {
        report.reason = format!("slope {slope:.4} lies between the convergence and divergence thresholds");
    }
    Ok(report)
}

/// ∂b/∂V + p and ∂b/∂Xⁱ − ξᵢ at the state with B = `epsilon` above `x`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MayerLieResidual {
    pub coordinate: String,
    pub value: f64,
}

pub fn mayer_lie_residuals(
    model: &ThermoModel,
    x: &StatePoint,
    epsilon: f64,
) -> Result<Vec<MayerLieResidual>, AnalysisError> {
    let y = model.at_energy_above_ground(x, epsilon).map_err(eval_at(x))?;
    let intensities = model.intensities(&y)?;
    let b = model.boundary().cloned().unwrap_or_else(Expr::zero);
    let coords = model.coordinates();
    let names: Vec<&str> = coords.iter().map(String::as_str).collect();
    coords[1..]
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let db = b
                .differentiate(c)
                .compile(&names)
                .expect("boundary was validated")
                .eval(y.coords())
                .map_err(eval_at(&y))?;
            // ω coefficient sign: +p for the volume, −ξ for the rest
            let value = if i == 0 { db + intensities[0] } else { db - intensities[i] };
            Ok(MayerLieResidual {
                coordinate: c.clone(),
                value,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use crate::tolerances::Tolerances;

    fn field(m: ThermoModel) -> EntropyField {
        EntropyField::new(m, Tolerances::default())
    }

    #[test]
    fn photon_heat_capacities() {
        let m = models::photon_gas();
        let s = Default::default();
        let p = PathSpec::straight(&[1.0, 1.0].into(), &[3.0, 1.0].into(), s);
        // unit speed in U needs the segment length to be 1
        let unit = PathSpec::straight(&[1.0, 1.0].into(), &[2.0, 1.0].into(), s);
        assert_eq!(heat_capacity_along_path(&m, &unit, 0.5, None).unwrap(), 1.0);
        assert_eq!(heat_capacity_along_path(&m, &p, 0.5, None).unwrap(), 2.0);
        let v = PathSpec::straight(&[1.0, 1.0].into(), &[1.0, 2.0].into(), s);
        let c = heat_capacity_along_path(&m, &v, 0.5, None).unwrap();
        assert!((c - 1.0 / (3.0 * 1.5)).abs() < 1e-15);
    }

    #[test]
    fn corners_need_a_side() {
        let m = models::photon_gas();
        let p = PathSpec::axis_parallel(&[1.0, 1.0].into(), &[2.0, 2.0].into(), &[0, 1], Default::default());
        assert_eq!(heat_capacity_along_path(&m, &p, 1.0, None), Err(AnalysisError::Corner(1.0)));
        assert_eq!(heat_capacity_along_path(&m, &p, 1.0, Some(CornerSide::Before)).unwrap(), 1.0);
        let after = heat_capacity_along_path(&m, &p, 1.0, Some(CornerSide::After)).unwrap();
        assert!((after - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn photon_zeros_only_at_the_boundary() {
        let m = models::photon_gas();
        let ray = Ray::toward_ground(&m, &[1.0, 1.0].into(), 1e-8).unwrap();
        let r = zero_set_scan(&m, &[ray], 1e-6);
        assert!(!r.zeros.is_empty());
        assert_eq!(r.interior().count(), 0);
    }

    #[test]
    fn ideal_gas_has_an_interior_zero() {
        let m = models::default_ideal_gas();
        let ray = Ray::toward_ground(&m, &[1.0, 1.0, 1.0].into(), 1e-8).unwrap();
        let r = zero_set_scan(&m, &[ray], 1e-6);
        let z: Vec<_> = r.interior().collect();
        assert_eq!(z.len(), 1);
        // S = 1 + 1.5 ln U = 0
        assert!((z[0].point[0] - (-2.0f64 / 3.0).exp()).abs() < 1e-10);
        assert!(r.factor_zeros_exceed_temperature_zeros);
    }

    #[test]
    fn shifted_photon_zeros_at_ground() {
        let m = models::shifted_photon_gas(1.0);
        let ray = Ray::toward_ground(&m, &[3.0, 1.0].into(), 1e-8).unwrap();
        let r = zero_set_scan(&m, &[ray], 1e-6);
        assert!(!r.zeros.is_empty());
        assert_eq!(r.interior().count(), 0);
    }

    #[test]
    fn triage_of_bundled_models() {
        for (m, want) in [
            (models::photon_gas(), ThirdLawClass::PlanckCompliant),
            (models::planck_violator(), ThirdLawClass::PlanckViolating),
            (models::default_ideal_gas(), ThirdLawClass::PositivityViolating),
        ] {
            let f = field(m);
            let a = approach_along_energy(&f, f.reference(), 1e-8).unwrap();
            let r = third_law_classify(&f, &a).unwrap();
            assert_eq!(r.classification, want, "{}: {}", r.model, r.reason);
        }
    }

    #[test]
    fn photon_slope_is_three_quarters() {
        let f = field(models::photon_gas());
        let r = third_law_classify(&f, &approach_along_energy(&f, f.reference(), 1e-8).unwrap()).unwrap();
        assert!((r.slope.unwrap() - 0.75).abs() < 1e-8);
        assert_eq!(r.samples.len(), 8);
    }

    #[test]
    fn violator_limit_depends_on_volume() {
        let f = field(models::planck_violator());
        let r = third_law_classify(&f, &approach_along_energy(&f, f.reference(), 1e-8).unwrap()).unwrap();
        assert!((r.limit_entropy.unwrap() - 1.0).abs() < 1e-4);
        assert!((r.scaled_limit_entropy.unwrap() - 2.0).abs() < 1e-4);
    }

    #[test]
    fn mayer_lie_on_shifted_photon_gas() {
        let m = models::shifted_photon_gas(1.0);
        let r = mayer_lie_residuals(&m, &[3.0, 2.0].into(), 1e-8).unwrap();
        assert_eq!(r.len(), 1);
        // ∂b/∂V + p = 1 + (ε/(3V) − 1)
        assert!((r[0].value - 1e-8 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn short_approach_is_rejected() {
        let f = field(models::photon_gas());
        let p = PathSpec::straight(&[1.0, 1.0].into(), &[0.5, 1.0].into(), Default::default());
        assert!(matches!(
            third_law_classify(&f, &p),
            Err(AnalysisError::ApproachTooShort { .. })
        ));
    }
}
