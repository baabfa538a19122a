use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

/// Coordinates (U, V, X¹…Xⁿ) of an equilibrium state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StatePoint(Vec<f64>);

impl StatePoint {
    pub fn new(coords: Vec<f64>) -> Self {
        StatePoint(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// The dilated state λ·x (flow of the radial field at time ln λ).
    pub fn scaled(&self, lambda: f64) -> StatePoint {
        StatePoint(self.0.iter().map(|x| x * lambda).collect())
    }

    pub fn with_coord(&self, index: usize, value: f64) -> StatePoint {
        let mut c = self.0.clone();
        c[index] = value;
        StatePoint(c)
    }

    /// Point at parameter `t` on the straight segment from `self` to `other`.
    pub fn lerp(&self, other: &StatePoint, t: f64) -> StatePoint {
        StatePoint(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + t * (b - a))
                .collect(),
        )
    }

    pub fn distance(&self, other: &StatePoint) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl From<Vec<f64>> for StatePoint {
    fn from(v: Vec<f64>) -> Self {
        StatePoint(v)
    }
}

impl From<&[f64]> for StatePoint {
    fn from(v: &[f64]) -> Self {
        StatePoint(v.to_vec())
    }
}

impl<const N: usize> From<[f64; N]> for StatePoint {
    fn from(v: [f64; N]) -> Self {
        StatePoint(v.to_vec())
    }
}

impl Index<usize> for StatePoint {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Display for StatePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Open interval `(lower, upper)`; either end may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Self {
        Interval { lower, upper }
    }

    pub fn positive() -> Self {
        Interval::new(0.0, f64::INFINITY)
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lower && x < self.upper
    }

    pub fn is_valid(&self) -> bool {
        !self.lower.is_nan() && !self.upper.is_nan() && self.lower < self.upper
    }
}
