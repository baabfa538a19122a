#![allow(dead_code)]

use rand::Rng;
use thermoform::pfaffian::StatePoint;

pub const VARS: [&str; 3] = ["x", "y", "z"];

/// A random expression over x, y, z that is finite and smooth for
/// arguments in [0.5, 2].
pub fn random_expression(rng: &mut impl Rng, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.2) {
        return if rng.gen_bool(0.7) {
            VARS[rng.gen_range(0..3)].to_string()
        } else {
            format!("{}", (rng.gen_range(0.5..3.0_f64) * 100.0).round() / 100.0)
        };
    }
    let a = random_expression(rng, depth - 1);
    match rng.gen_range(0..9) {
        0 => format!("({a}) + ({})", random_expression(rng, depth - 1)),
        1 => format!("({a}) - ({})", random_expression(rng, depth - 1)),
        2 => format!("({a}) * ({})", random_expression(rng, depth - 1)),
        3 => format!("({a}) / (1 + ({})^2)", random_expression(rng, depth - 1)),
        4 => {
            let k = [0.5, 1.5, -0.5, 2.5, 3.0][rng.gen_range(0..5)];
            format!("(1 + ({a})^2)^{k}")
        }
        5 => format!("ln(1 + ({a})^2)"),
        6 => format!("exp(({a}) / (1 + ({a})^2))"),
        7 => format!("-({a})"),
        _ => format!("({a})^2"),
    }
}

pub fn random_binding(rng: &mut impl Rng) -> [(&'static str, f64); 3] {
    [
        ("x", rng.gen_range(0.5..2.0)),
        ("y", rng.gen_range(0.5..2.0)),
        ("z", rng.gen_range(0.5..2.0)),
    ]
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// `n` evenly spaced values in [lo, hi].
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

/// All points of the tensor grid of the given axes.
pub fn tensor_grid(axes: &[Vec<f64>]) -> Vec<StatePoint> {
    let mut out: Vec<Vec<f64>> = vec![vec![]];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out.into_iter().map(StatePoint::from).collect()
}

/// Central difference ∂e/∂var with h = 1e-6·max(1, |x|).
pub fn central_difference(
    f: impl Fn(f64) -> f64,
    x: f64,
) -> f64 {
    let h = 1e-6 * x.abs().max(1.0);
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// `n` random admissible states with coordinates in [lo, hi], energy taken
/// above the ground surface, and analytic S above 0.1 where one exists.
pub fn interior_points(
    model: &thermoform::pfaffian::ThermoModel,
    n: usize,
    lo: f64,
    hi: f64,
    rng: &mut impl Rng,
) -> Vec<StatePoint> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let raw: StatePoint = (0..model.dim())
            .map(|_| rng.gen_range(lo..hi))
            .collect::<Vec<_>>()
            .into();
        let Ok(x) = model.at_energy_above_ground(&raw, raw[0]) else {
            continue;
        };
        let entropy_ok = match model.analytic_entropy_at(&x) {
            Some(Ok(s)) => s > 0.1,
            Some(Err(_)) => false,
            None => true,
        };
        if model.admissible(&x) && entropy_ok {
            out.push(x);
        }
    }
    out
}

pub fn seeded(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
