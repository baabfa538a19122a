//! Globally adaptive Gauss–Legendre quadrature on an interval.
//!
//! Each subinterval is integrated with the 15-point rule; the error estimate
//! is the difference from the 7-point rule on the same subinterval. The
//! subinterval with the largest estimate is halved until the summed estimate
//! meets the tolerance or the subdivision cap is reached.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            max_subdivisions: 2000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions: usize,
    /// False when the subdivision cap was hit before the tolerance was met.
    pub reliable: bool,
}

impl QuadratureResult {
    pub fn zero() -> Self {
        QuadratureResult {
            value: 0.0,
            error_estimate: 0.0,
            subdivisions: 0,
            reliable: true,
        }
    }

    /// Sum of two independent integrals.
    pub fn combine(self, other: QuadratureResult) -> QuadratureResult {
        QuadratureResult {
            value: self.value + other.value,
            error_estimate: self.error_estimate + other.error_estimate,
            subdivisions: self.subdivisions + other.subdivisions,
            reliable: self.reliable && other.reliable,
        }
    }
}

struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
fn gauss_legendre(n: usize) -> Rule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

fn rules() -> &'static (Rule, Rule) {
    static RULES: OnceLock<(Rule, Rule)> = OnceLock::new();
    RULES.get_or_init(|| (gauss_legendre(15), gauss_legendre(7)))
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    abs_value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn apply<E>(
    g: &mut impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
) -> Result<Piece, E> {
    let (hi, lo) = rules();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut value = 0.0;
    let mut abs_value = 0.0;
    for (x, w) in hi.nodes.iter().zip(&hi.weights) {
        let y = g(mid + half * x)?;
        value += w * y;
        abs_value += w * y.abs();
    }
    let mut coarse = 0.0;
    for (x, w) in lo.nodes.iter().zip(&lo.weights) {
        coarse += w * g(mid + half * x)?;
    }
    Ok(Piece {
        a,
        b,
        value: value * half,
        abs_value: abs_value * half.abs(),
        error: ((value - coarse) * half).abs(),
    })
}

/// ∫ₐᵇ g(t) dt. Errors returned by `g` abort the integration.
pub fn integrate<E>(
    mut g: impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    settings: &QuadratureSettings,
) -> Result<QuadratureResult, E> {
    if a == b {
        return Ok(QuadratureResult::zero());
    }
    let mut heap = BinaryHeap::new();
    let first = apply(&mut g, a, b)?;
    let mut value = first.value;
    let mut abs_value = first.abs_value;
    let mut error = first.error;
    heap.push(first);
    let mut subdivisions = 0;
    loop {
        if error <= settings.abs_tol.max(settings.rel_tol * abs_value) {
            break;
        }
        if subdivisions >= settings.max_subdivisions {
            return Ok(QuadratureResult {
                value,
                error_estimate: error,
                subdivisions,
                reliable: false,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid == worst.a || mid == worst.b {
            // interval can no longer be split in floating point
            heap.push(worst);
            return Ok(QuadratureResult {
                value,
                error_estimate: error,
                subdivisions,
                reliable: false,
            });
        }
        let left = apply(&mut g, worst.a, mid)?;
        let right = apply(&mut g, mid, worst.b)?;
        value += left.value + right.value - worst.value;
        abs_value += left.abs_value + right.abs_value - worst.abs_value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
        // running sums drift; refresh them now and then
        if subdivisions % 64 == 0 {
            value = heap.iter().map(|p| p.value).sum();
            abs_value = heap.iter().map(|p| p.abs_value).sum();
            error = heap.iter().map(|p| p.error).sum();
        }
    }
    let value = heap.iter().map(|p| p.value).sum();
    let error_estimate = heap.iter().map(|p| p.error).sum();
    Ok(QuadratureResult {
        value,
        error_estimate,
        subdivisions,
        reliable: true,
    })
}
