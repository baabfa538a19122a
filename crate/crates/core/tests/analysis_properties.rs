mod common;

use thermoform::analysis::{
    concavity_conditions, entropy_hessian, leaf_branch, leaf_solve, radial_crossings,
    reduce_to_densities, MinorSign,
};
use thermoform::entropy::{EntropyField, EntropySurface};
use thermoform::models;
use thermoform::pfaffian::{StatePoint, ThermoModel};
use thermoform::tolerances::Tolerances;

use common::{interior_points, rel, seeded};

fn field(m: ThermoModel) -> EntropyField {
    EntropyField::new(m, Tolerances::default())
}

#[test]
fn hessian_matches_symbolic_second_derivatives() {
    let mut rng = seeded(21);
    for m in [models::photon_gas(), models::default_ideal_gas(), models::planck_violator()] {
        let f = field(m.clone());
        let s = m.analytic_entropy().unwrap().clone();
        let names: Vec<&str> = m.coordinates().iter().map(String::as_str).collect();
        for x in interior_points(&m, 3, 0.8, 4.0, &mut rng) {
            let r = entropy_hessian(&f, &x, 1e-9, 1e-4).unwrap();
            assert!(r.cross_check_passed, "{} at {x}", m.name());
            let bind: Vec<(&str, f64)> = names.iter().copied().zip(x.coords().iter().copied()).collect();
            for i in 0..x.dim() {
                for j in 0..x.dim() {
                    let want = s.differentiate(names[i]).differentiate(names[j]).eval(bind.as_slice()).unwrap();
                    assert!(
                        (r.hessian[i][j] - want).abs() <= 1e-7 * r.scale(),
                        "{} H[{i}][{j}] at {x}",
                        m.name()
                    );
                }
            }
        }
    }
}

#[test]
fn position_vector_is_a_null_direction() {
    let mut rng = seeded(22);
    for m in [models::photon_gas(), models::default_ideal_gas()] {
        let f = field(m.clone());
        for x in interior_points(&m, 4, 0.8, 4.0, &mut rng) {
            let r = entropy_hessian(&f, &x, 1e-9, 1e-4).unwrap();
            for row in &r.hessian {
                let hx: f64 = row.iter().zip(x.coords()).map(|(h, v)| h * v).sum();
                assert!(hx.abs() <= 1e-8 * r.scale() * x.norm(), "{} at {x}", m.name());
            }
            assert!(r.radial_form_relative <= 1e-8);
        }
    }
}

#[test]
fn minor_pattern_agrees_with_eigen_signature() {
    let mut rng = seeded(23);
    for m in [models::photon_gas(), models::default_ideal_gas(), models::planck_violator()] {
        let f = field(m.clone());
        for x in interior_points(&m, 4, 0.8, 4.0, &mut rng) {
            let r = entropy_hessian(&f, &x, 1e-9, 1e-4).unwrap();
            let sig = r.eigen_signature;
            let eigen_concave = sig.negative == x.dim() - 1 && sig.zero == 1 && sig.positive == 0;
            assert_eq!(r.concave, eigen_concave, "{} at {x}", m.name());
            assert!(r.concave);
            assert_eq!(r.minors.last().unwrap().sign, MinorSign::Zero);
        }
    }
}

#[test]
fn ideal_gas_satisfies_explicit_concavity_inequalities() {
    let m = models::default_ideal_gas();
    let f = field(m.clone());
    for x in interior_points(&m, 5, 0.8, 4.0, &mut seeded(24)) {
        let c = concavity_conditions(&f, &x, 1e-9, 1e-4).unwrap();
        assert!(c.explicit && c.passed, "{x}");
        assert!(c.heat_capacity_term.unwrap() < 0.0);
        assert!(c.second_minor_term.unwrap() > 0.0);
    }
}

#[test]
fn leaf_crosses_each_ray_once() {
    let m = models::photon_gas();
    let f = field(m.clone());
    for x0 in [[1.0, 1.0], [2.0, 0.5], [0.3, 3.0]] {
        let x0: StatePoint = x0.into();
        for c in [0.5, 2.0, 8.0] {
            assert_eq!(radial_crossings(&f, &x0, c, -10.0, 10.0, 81), 1);
        }
    }
}

#[test]
fn leaf_level_is_attained() {
    let m = models::default_ideal_gas();
    let f = field(m.clone());
    for params in [[1.0, 1.0, 1.0], [1.0, 2.0, 0.5], [1.0, 0.7, 1.3]] {
        let params: StatePoint = params.into();
        for c in [0.5, 1.0, 3.0] {
            let sol = leaf_solve(&f, c, &params, 1e-10).unwrap();
            assert!(sol.converged);
            let s = m.analytic_entropy_at(&sol.point).unwrap().unwrap();
            assert!(rel(s, c) <= 1e-8);
        }
    }
}

#[test]
fn heat_capacity_vanishes_along_a_leaf() {
    // γ(V) = (B_c(V), V), differentiated by Richardson extrapolation
    let m = models::photon_gas();
    let f = field(m.clone());
    let c = 2.0;
    for v in [0.7, 1.0, 2.5] {
        let at = |h: f64| -> f64 {
            let fibers: Vec<StatePoint> = vec![[1.0, v + h].into(), [1.0, v - h].into()];
            let b = leaf_branch(&f, c, &fibers, 1e-12).unwrap();
            (b[0] - b[1]) / (2.0 * h)
        };
        let h = 1e-2 * v;
        let db = (4.0 * at(h / 2.0) - at(h)) / 3.0;
        let b = leaf_solve(&f, c, &[1.0, v].into(), 1e-12).unwrap();
        let w = m.heat_form().coefficient_values(&b.point).unwrap();
        let capacity = w[0] * db + w[1];
        assert!(capacity.abs() <= 1e-8 * (w[0] * db).abs().max(w[1].abs()), "V = {v}: {capacity:e}");
    }
}

#[test]
fn density_decomposition_holds() {
    let mut rng = seeded(25);
    for m in [models::photon_gas(), models::default_ideal_gas()] {
        let d = reduce_to_densities(&m, Default::default()).unwrap();
        let f = field(m.clone());
        let points = interior_points(&m, 25, 0.5, 4.0, &mut rng);
        for (k, x) in points.iter().enumerate() {
            let delta: Vec<f64> = (0..x.dim()).map(|i| ((k + 3 * i) % 5) as f64 - 2.0).collect();
            assert!(d.decomposition_residual(x, &delta).unwrap() <= 1e-10);
            if k % 5 == 0 {
                assert!(rel(d.entropy(x).unwrap(), f.entropy(x).unwrap()) <= 1e-8, "{} at {x}", m.name());
            }
        }
    }
}

#[test]
fn physical_models_have_positive_pressure() {
    let mut rng = seeded(26);
    for m in [models::photon_gas(), models::default_ideal_gas(), models::planck_violator()] {
        for x in interior_points(&m, 50, 0.1, 10.0, &mut rng) {
            assert!(m.intensities(&x).unwrap()[0] > 0.0, "{} at {x}", m.name());
        }
    }
}
