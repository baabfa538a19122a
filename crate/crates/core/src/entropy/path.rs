use serde::Serialize;
use thiserror::Error;

use crate::pfaffian::{StatePoint, ThermoModel};
use crate::quadrature::QuadratureSettings;

/// Samples per segment used to check domain membership and f > 0.
pub const SEGMENT_SAMPLES: usize = 33;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum PathError {
    #[error("a path needs at least one waypoint")]
    Empty,
    #[error("waypoint {0} repeats the one before it")]
    RepeatedWaypoint(usize),
    #[error("waypoint {index} has {found} coordinates, expected {expected}")]
    Dimension {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("path parameter {0} is outside [0, {1}]")]
    ParameterOutOfRange(f64, usize),
}

/// Why a sampled path point is not usable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Obstruction {
    OutsideDomain,
    FactorNotPositive,
    EvaluationFailed,
}

/// The first unusable sample found on a path.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathDefect {
    /// Global parameter: segment index plus position within the segment.
    pub parameter: f64,
    pub point: StatePoint,
    pub kind: Obstruction,
}

/// A polyline from a reference state to a target, with the quadrature
/// settings used on each straight segment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathSpec {
    waypoints: Vec<StatePoint>,
    settings: QuadratureSettings,
}

impl PathSpec {
    pub fn new(waypoints: Vec<StatePoint>, settings: QuadratureSettings) -> Result<Self, PathError> {
        let first = waypoints.first().ok_or(PathError::Empty)?;
        let dim = first.dim();
        for (index, w) in waypoints.iter().enumerate() {
            if w.dim() != dim {
                return Err(PathError::Dimension {
                    index,
                    expected: dim,
                    found: w.dim(),
                });
            }
        }
        for (i, pair) in waypoints.windows(2).enumerate() {
            if pair[0] == pair[1] {
                return Err(PathError::RepeatedWaypoint(i + 1));
            }
        }
        Ok(PathSpec {
            waypoints,
            settings,
        })
    }

    /// The one-segment path, or the trivial path when the ends coincide.
    pub fn straight(from: &StatePoint, to: &StatePoint, settings: QuadratureSettings) -> Self {
        let waypoints = if from == to {
            vec![from.clone()]
        } else {
            vec![from.clone(), to.clone()]
        };
        PathSpec::new(waypoints, settings).expect("distinct endpoints")
    }

    /// Axis-parallel polyline that moves coordinates to their target values
    /// one at a time in `order`. Coordinates missing from `order` are never
    /// moved, so callers normally pass a permutation.
    pub fn axis_parallel(
        from: &StatePoint,
        to: &StatePoint,
        order: &[usize],
        settings: QuadratureSettings,
    ) -> Self {
        let mut waypoints = vec![from.clone()];
        let mut current = from.clone();
        for &i in order {
            if current[i] != to[i] {
                current = current.with_coord(i, to[i]);
                waypoints.push(current.clone());
            }
        }
        PathSpec::new(waypoints, settings).expect("each step changes one coordinate")
    }

    pub fn waypoints(&self) -> &[StatePoint] {
        &self.waypoints
    }

    pub fn reference(&self) -> &StatePoint {
        &self.waypoints[0]
    }

    pub fn target(&self) -> &StatePoint {
        self.waypoints.last().expect("non-empty")
    }

    pub fn settings(&self) -> &QuadratureSettings {
        &self.settings
    }

    pub fn with_settings(mut self, settings: QuadratureSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn segment_count(&self) -> usize {
        self.waypoints.len() - 1
    }

    pub fn segments(&self) -> impl Iterator<Item = (&StatePoint, &StatePoint)> {
        self.waypoints.windows(2).map(|w| (&w[0], &w[1]))
    }

    fn locate(&self, t: f64) -> Result<(usize, f64), PathError> {
        let n = self.segment_count();
        if !(0.0..=n as f64).contains(&t) {
            return Err(PathError::ParameterOutOfRange(t, n));
        }
        if n == 0 {
            return Ok((0, 0.0));
        }
        let i = (t.floor() as usize).min(n - 1);
        Ok((i, t - i as f64))
    }

    /// γ(t) for t ∈ [0, segment_count], each segment traversed at unit
    /// parameter speed.
    pub fn point_at(&self, t: f64) -> Result<StatePoint, PathError> {
        let (i, s) = self.locate(t)?;
        if self.segment_count() == 0 {
            return Ok(self.waypoints[0].clone());
        }
        Ok(self.waypoints[i].lerp(&self.waypoints[i + 1], s))
    }

    /// γ̇(t); at an interior waypoint this is the velocity of the later
    /// segment.
    pub fn velocity_at(&self, t: f64) -> Result<Vec<f64>, PathError> {
        let (i, _) = self.locate(t)?;
        if self.segment_count() == 0 {
            return Ok(vec![0.0; self.waypoints[0].dim()]);
        }
        Ok(self.waypoints[i + 1]
            .coords()
            .iter()
            .zip(self.waypoints[i].coords())
            .map(|(b, a)| b - a)
            .collect())
    }

    /// Checks every segment at [`SEGMENT_SAMPLES`] evenly spaced points.
    pub fn find_defect(&self, model: &ThermoModel) -> Option<PathDefect> {
        if self.segment_count() == 0 {
            return sample_defect(model, self.reference()).map(|kind| PathDefect {
                parameter: 0.0,
                point: self.reference().clone(),
                kind,
            });
        }
        for (i, (a, b)) in self.segments().enumerate() {
            for k in 0..SEGMENT_SAMPLES {
                let s = k as f64 / (SEGMENT_SAMPLES - 1) as f64;
                let x = a.lerp(b, s);
                if let Some(kind) = sample_defect(model, &x) {
                    return Some(PathDefect {
                        parameter: i as f64 + s,
                        point: x,
                        kind,
                    });
                }
            }
        }
        None
    }
}

pub(crate) fn sample_defect(model: &ThermoModel, x: &StatePoint) -> Option<Obstruction> {
    if !model.contains(x) {
        return Some(Obstruction::OutsideDomain);
    }
    match model.integrating_factor(x) {
        Ok(f) if f > 0.0 => None,
        Ok(_) => Some(Obstruction::FactorNotPositive),
        Err(_) => Some(Obstruction::EvaluationFailed),
    }
}

/// Axis orders tried by [`route`]: the default puts the energy last, then
/// every other permutation in lexicographic order.
pub fn axis_orders(dim: usize) -> Vec<Vec<usize>> {
    let default: Vec<usize> = (1..dim).chain(std::iter::once(0)).collect();
    let mut all = vec![default.clone()];
    let mut p: Vec<usize> = (0..dim).collect();
    loop {
        if p != default {
            all.push(p.clone());
        }
        if !next_permutation(&mut p) {
            break;
        }
    }
    all
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Result of routing: the first clean candidate, or the defect that stopped
/// the default candidate.
pub fn route(
    model: &ThermoModel,
    from: &StatePoint,
    to: &StatePoint,
    settings: QuadratureSettings,
) -> Result<PathSpec, PathDefect> {
    if from == to {
        let path = PathSpec::straight(from, to, settings);
        return match path.find_defect(model) {
            Some(d) => Err(d),
            None => Ok(path),
        };
    }
    let mut first_defect = None;
    for order in axis_orders(model.dim()) {
        let path = PathSpec::axis_parallel(from, to, &order, settings);
        match path.find_defect(model) {
            None => return Ok(path),
            Some(d) => {
                first_defect.get_or_insert(d);
            }
        }
    }
    let straight = PathSpec::straight(from, to, settings);
    match straight.find_defect(model) {
        None => Ok(straight),
        Some(d) => Err(first_defect.unwrap_or(d)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::pfaffian::ModelDefinition;

    fn photon() -> ThermoModel {
        ThermoModel::new(ModelDefinition::new(
            "photon",
            &["U", "V"],
            Expr::parse("U/(3*V)").unwrap(),
            vec![],
            [1.0, 1.0],
        ))
        .unwrap()
    }

    #[test]
    fn axis_parallel_skips_unchanged_coordinates() {
        let p = PathSpec::axis_parallel(
            &[1.0, 1.0].into(),
            &[16.0, 1.0].into(),
            &[1, 0],
            QuadratureSettings::default(),
        );
        assert_eq!(p.segment_count(), 1);
        assert_eq!(p.target(), &StatePoint::from([16.0, 1.0]));
    }

    #[test]
    fn default_order_moves_energy_last() {
        let orders = axis_orders(3);
        assert_eq!(orders[0], vec![1, 2, 0]);
        assert_eq!(orders.len(), 6);
        let p = PathSpec::axis_parallel(
            &[1.0, 1.0, 1.0].into(),
            &[2.0, 3.0, 4.0].into(),
            &orders[0],
            QuadratureSettings::default(),
        );
        assert_eq!(p.waypoints()[1], StatePoint::from([1.0, 3.0, 1.0]));
        assert_eq!(p.waypoints()[2], StatePoint::from([1.0, 3.0, 4.0]));
    }

    #[test]
    fn parameterization() {
        let p = PathSpec::new(
            vec![[0.0, 0.0].into(), [1.0, 0.0].into(), [1.0, 2.0].into()],
            QuadratureSettings::default(),
        )
        .unwrap();
        assert_eq!(p.point_at(1.5).unwrap(), StatePoint::from([1.0, 1.0]));
        assert_eq!(p.velocity_at(1.5).unwrap(), vec![0.0, 2.0]);
        assert_eq!(p.point_at(2.0).unwrap(), StatePoint::from([1.0, 2.0]));
        assert!(p.point_at(2.5).is_err());
    }

    #[test]
    fn repeated_waypoints_are_rejected() {
        let err = PathSpec::new(
            vec![[1.0].into(), [1.0].into()],
            QuadratureSettings::default(),
        )
        .unwrap_err();
        assert_eq!(err, PathError::RepeatedWaypoint(1));
    }

    #[test]
    fn routing_reports_the_obstruction() {
        let m = photon();
        let s = QuadratureSettings::default();
        assert!(route(&m, &[1.0, 1.0].into(), &[16.0, 2.0].into(), s).is_ok());
        let err = route(&m, &[1.0, 1.0].into(), &[-1.0, 2.0].into(), s).unwrap_err();
        assert_eq!(err.kind, Obstruction::OutsideDomain);
    }

    #[test]
    fn routing_avoids_the_ground_surface() {
        // b = V: moving V first from (2,1) to V=4 would cross U = b
        let m = ThermoModel::new(
            ModelDefinition::new(
                "shifted",
                &["U", "V"],
                Expr::parse("(U - V)/(3*V) - 1").unwrap(),
                vec![],
                [2.0, 1.0],
            )
            .with_boundary(Expr::var("V")),
        )
        .unwrap();
        let p = route(
            &m,
            &[2.0, 1.0].into(),
            &[5.0, 4.0].into(),
            QuadratureSettings::default(),
        )
        .unwrap();
        assert_eq!(p.waypoints()[1], StatePoint::from([5.0, 1.0]));
    }
}
