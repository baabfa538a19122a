mod common;

use proptest::prelude::*;
use thermoform::entropy::entropy_form;
use thermoform::expr::Expr;
use thermoform::models;
use thermoform::pfaffian::{PfaffianForm, StatePoint, DEFAULT_LAMBDAS};

use common::{linspace, rel, tensor_grid};

fn integrable_models() -> Vec<thermoform::pfaffian::ThermoModel> {
    models::catalog()
        .into_iter()
        .filter(|e| e.integrable)
        .map(|e| e.model)
        .collect()
}

/// Grid of 5 values per coordinate, shifted above the ground surface.
fn grid(m: &thermoform::pfaffian::ThermoModel) -> Vec<StatePoint> {
    let axes = vec![linspace(0.6, 3.0, 5); m.dim()];
    tensor_grid(&axes)
        .into_iter()
        .map(|x| m.at_energy_above_ground(&x, x[0]).unwrap())
        .filter(|x| m.admissible(x))
        .collect()
}

#[test]
fn integrable_heat_forms_make_closed_entropy_forms() {
    for m in integrable_models() {
        let points = grid(&m);
        assert!(points.len() > 10, "{}", m.name());
        for x in &points {
            for r in m.heat_form().integrability_residuals(x).unwrap() {
                assert!(r.normalized.abs() <= 1e-10, "{} l at {x}", m.name());
            }
            let worst = entropy_form(&m).max_exactness_residual(x).unwrap();
            assert!(worst <= 1e-10, "{} at {x}: {worst:e}", m.name());
        }
    }
}

#[test]
fn counter_example_residual_is_u_over_n_squared() {
    let m = models::nonintegrable_example();
    for x in tensor_grid(&[linspace(0.5, 2.0, 4), linspace(0.5, 1.5, 3), linspace(0.7, 2.0, 3)]) {
        let r = m.heat_form().integrability_residuals(&x).unwrap();
        assert!(rel(r[0].raw, x[0] / (x[2] * x[2])) <= 1e-12);
    }
}

#[test]
fn bundled_models_are_homogeneous_at_nominal_degree() {
    for e in models::catalog() {
        let m = &e.model;
        let samples = grid(m);
        let r = m
            .heat_form()
            .check_homogeneity_within(&samples, &DEFAULT_LAMBDAS, 1e-10, |x| m.contains(x))
            .unwrap();
        assert!(r.passed(), "{}: worst {:e}", e.name, r.worst_deviation);
    }
}

#[test]
fn counter_example_homogeneity_examples() {
    let m = models::nonintegrable_example();
    let r = m
        .heat_form()
        .check_homogeneity(&[[1.0, 1.0, 1.0].into()], &[2.0], 1e-12)
        .unwrap();
    assert!(r.passed());
    assert_eq!(r.observed_degrees[2], Some(0.0));
}

fn point_in(dim: usize) -> impl Strategy<Value = StatePoint> {
    prop::collection::vec(0.5f64..4.0, dim).prop_map(StatePoint::from)
}

proptest! {
    #[test]
    fn integrating_factor_has_degree_one(x in point_in(3), which in 0usize..4) {
        let m = integrable_models().into_iter().nth(which).unwrap();
        let x: StatePoint = x.coords()[..m.dim()].to_vec().into();
        let x = m.at_energy_above_ground(&x, x[0]).unwrap();
        let f = m.integrating_factor(&x).unwrap();
        for lambda in DEFAULT_LAMBDAS {
            let fl = m.integrating_factor(&x.scaled(lambda)).unwrap();
            prop_assert!((fl - lambda * f).abs() <= 1e-10 * (lambda * f).abs());
        }
    }

    #[test]
    fn radial_apply_is_linear(
        a in (0.1f64..3.0, 0.1f64..3.0),
        b in (0.1f64..3.0, 0.1f64..3.0),
        c in -3.0f64..3.0,
        x in point_in(2),
    ) {
        let coords = vec!["x".to_string(), "y".to_string()];
        let e = |s: String| Expr::parse(&s).unwrap();
        let fa = PfaffianForm::new(coords.clone(), vec![e(format!("{}*x*y", a.0)), e(format!("ln({}+x)", a.1))], 0.0).unwrap();
        let fb = PfaffianForm::new(coords.clone(), vec![e(format!("exp(-{}*y)", b.0)), e(format!("x^{}", b.1))], 0.0).unwrap();
        let sum = PfaffianForm::new(
            coords,
            fa.coefficients().iter().zip(fb.coefficients()).map(|(p, q)| p.clone() + Expr::constant(c) * q.clone()).collect(),
            0.0,
        ).unwrap();
        let lhs = sum.radial_apply(&x).unwrap();
        let rhs = fa.radial_apply(&x).unwrap() + c * fb.radial_apply(&x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn euler_potential_differentiates_back_to_the_form(
        d in prop::sample::select(vec![0.5, 1.0, 2.0, 3.0]),
        a in 0.0f64..1.0,
        c in (0.2f64..2.0, 0.2f64..2.0),
        x in point_in(2),
    ) {
        // g = c₁x^{ad}y^{(1−a)d} + c₂(x + y)^d is homogeneous of degree d
        let g = Expr::parse(&format!(
            "{}*x^{}*y^{} + {}*(x + y)^{}",
            c.0, a * d, (1.0 - a) * d, c.1, d
        )).unwrap();
        let form = PfaffianForm::new(
            vec!["x".into(), "y".into()],
            vec![g.differentiate("x"), g.differentiate("y")],
            d - 1.0,
        ).unwrap();
        let potential = |p: &StatePoint| form.euler_potential(d - 1.0, p, 1e-10).unwrap();
        let gx = potential(&x);
        let want = g.eval(&[("x", x[0]), ("y", x[1])]).unwrap();
        prop_assert!(rel(gx, want) <= 1e-12);
        let w = form.coefficient_values(&x).unwrap();
        for i in 0..2 {
            let h = 1e-6 * x[i];
            let fd = (potential(&x.with_coord(i, x[i] + h)) - potential(&x.with_coord(i, x[i] - h))) / (2.0 * h);
            prop_assert!((fd - w[i]).abs() <= 1e-6 * w[i].abs().max(1.0));
        }
    }
}
