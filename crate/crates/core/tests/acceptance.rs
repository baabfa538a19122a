//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

mod common;

use std::time::{Duration, Instant};

use rand::Rng;
use thermoform::analysis::{
    approach_along_energy, concavity_conditions, entropy_hessian, leaf_solve, third_law_classify,
    ThirdLawClass,
};
use thermoform::entropy::{
    axis_orders, gibbs_duhem_reconstruct, gibbs_duhem_residual, EntropyError, EntropyField,
    EntropySurface, PathSpec,
};
use thermoform::expr::Expr;
use thermoform::models;
use thermoform::pfaffian::{StatePoint, ThermoModel};
use thermoform::tolerances::Tolerances;

use common::{central_difference, interior_points, linspace, random_binding, random_expression, rel, seeded, tensor_grid};

type Outcome = Result<String, String>;

fn field(m: ThermoModel) -> EntropyField {
    EntropyField::new(m, Tolerances::default())
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn photon_reconstruction() -> Outcome {
    let start = Instant::now();
    let m = models::photon_gas();
    let f = field(m.clone());
    let mut worst: f64 = 0.0;
    for x in tensor_grid(&[linspace(1.0, 16.0, 10), linspace(1.0, 16.0, 10)]) {
        let want = x[0].powf(0.75) * x[1].powf(0.25);
        worst = worst.max(rel(f.entropy(&x).map_err(err)?, want));
    }
    let elapsed = start.elapsed();
    check(worst <= 1e-8, || format!("max relative error {worst:.3e}"))?;
    check(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("max relative error {worst:.2e} in {elapsed:.2?}"))
}

fn counter_example() -> Outcome {
    let m = models::nonintegrable_example();
    let mut rng = seeded(2);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let x: StatePoint = vec![rng.gen_range(0.5..4.0), rng.gen_range(0.5..4.0), rng.gen_range(0.5..4.0)].into();
        let r = m.heat_form().integrability_residuals(&x).map_err(err)?;
        worst = worst.max(rel(r[0].raw, x[0] / (x[2] * x[2])));
    }
    check(worst <= 1e-12, || format!("l_UVN deviates by {worst:.3e}"))?;
    let path = PathSpec::straight(&[1.0, 1.0, 1.0].into(), &[2.0, 1.0, 1.0].into(), Default::default());
    let residual = match gibbs_duhem_reconstruct(&m, &path, Tolerances::default().exactness) {
        Err(EntropyError::NotExact { residuals, .. }) => {
            residuals.iter().fold(0.0_f64, |a, r| a.max(r.raw.abs()))
        }
        other => return Err(format!("reconstruction not refused: {other:?}")),
    };
    // N/(U(2N − V)²) at (1, 1, 1)
    check((residual - 1.0).abs() <= 1e-10, || format!("exactness residual {residual}"))?;
    Ok(format!("l_UVN error {worst:.2e}, refused with residual {residual}"))
}

fn extensivity() -> Outcome {
    let mut rng = seeded(3);
    let mut worst: f64 = 0.0;
    for m in [models::photon_gas(), models::default_ideal_gas(), models::planck_violator()] {
        let f = field(m.clone());
        for x in interior_points(&m, 10, 0.5, 5.0, &mut rng) {
            let s = f.entropy(&x).map_err(err)?;
            for lambda in [0.5, 2.0, 3.0] {
                let sl = f.entropy(&x.scaled(lambda)).map_err(err)?;
                worst = worst.max((sl - lambda * s).abs() / (lambda * s));
            }
        }
    }
    check(worst <= 1e-8, || format!("max deviation {worst:.3e}"))?;
    Ok(format!("max deviation {worst:.2e}"))
}

fn ideal_gas_integrability() -> Outcome {
    let m = models::default_ideal_gas();
    let f = field(m.clone());
    let axis = linspace(0.5, 4.0, 5);
    let (mut l_max, mut s_max, mut compared) = (0.0_f64, 0.0_f64, 0);
    for x in tensor_grid(&[axis.clone(), axis.clone(), axis]) {
        for r in m.heat_form().integrability_residuals(&x).map_err(err)? {
            l_max = l_max.max(r.normalized.abs());
        }
        let want = m.analytic_entropy_at(&x).unwrap().map_err(err)?;
        if want > 0.1 && m.admissible(&x) {
            s_max = s_max.max(rel(f.entropy(&x).map_err(err)?, want));
            compared += 1;
        }
    }
    check(l_max <= 1e-10, || format!("l_UVN = {l_max:.3e}"))?;
    check(s_max <= 1e-7, || format!("entropy error {s_max:.3e}"))?;
    Ok(format!("l_UVN {l_max:.2e}, entropy error {s_max:.2e} over {compared} states"))
}

fn concavity() -> Outcome {
    let tol = Tolerances::default();
    let m = models::photon_gas();
    let f = field(m.clone());
    for x in interior_points(&m, 10, 0.5, 8.0, &mut seeded(5)) {
        let h = entropy_hessian(&f, &x, tol.minor_band, tol.hessian_cross_check).map_err(err)?;
        let scale = h.scale();
        check(h.hessian[0][0] < 0.0, || format!("S_UU = {} at {x}", h.hessian[0][0]))?;
        check(h.determinant.abs() <= 1e-10 * scale, || format!("det = {:e} at {x}", h.determinant))?;
        check(h.radial_form.abs() <= 1e-8 * scale, || format!("radial form {:e} at {x}", h.radial_form))?;
    }
    let m = models::default_ideal_gas();
    let f = field(m.clone());
    for x in interior_points(&m, 10, 0.5, 4.0, &mut seeded(6)) {
        let c = concavity_conditions(&f, &x, tol.minor_band, tol.hessian_cross_check).map_err(err)?;
        check(c.passed, || format!("ideal gas fails at {x}: {c:?}"))?;
    }
    Ok("photon gas and ideal gas concave at 10 states each".into())
}

fn gibbs_duhem() -> Outcome {
    let m = models::photon_gas();
    let path = PathSpec::straight(&[1.0, 1.0].into(), &[16.0, 1.0].into(), Default::default());
    let d = gibbs_duhem_reconstruct(&m, &path, 1e-10).map_err(err)?.delta_log_inverse_t;
    check((d + 2f64.ln()).abs() <= 1e-8, || format!("Δlog(1/T) = {d}"))?;
    let mut rng = seeded(7);
    let mut worst: f64 = 0.0;
    for m in [models::photon_gas(), models::default_ideal_gas()] {
        let f = field(m.clone());
        for x in interior_points(&m, 20, 0.5, 5.0, &mut rng) {
            worst = worst.max(gibbs_duhem_residual(&f, &x).map_err(err)?);
        }
    }
    check(worst <= 1e-6, || format!("pointwise residual {worst:.3e}"))?;
    Ok(format!("Δlog(1/T) = {d:.10}, max residual {worst:.2e}"))
}

fn third_law() -> Outcome {
    let mut notes = Vec::new();
    for (m, want) in [
        (models::photon_gas(), ThirdLawClass::PlanckCompliant),
        (models::planck_violator(), ThirdLawClass::PlanckViolating),
        (models::default_ideal_gas(), ThirdLawClass::PositivityViolating),
    ] {
        let start = Instant::now();
        let f = field(m);
        let approach = approach_along_energy(&f, f.reference(), 1e-8).map_err(err)?;
        let r = third_law_classify(&f, &approach).map_err(err)?;
        let elapsed = start.elapsed();
        check(r.classification == want, || format!("{}: {} ({})", r.model, r.classification.label(), r.reason))?;
        check(elapsed < Duration::from_secs(2), || format!("{} took {elapsed:?}", r.model))?;
        notes.push(format!("{} {}", r.model, r.classification.label()));
    }
    Ok(notes.join(", "))
}

fn path_independence() -> Outcome {
    let m = models::photon_gas();
    let f = field(m.clone());
    let settings = f.tolerances().quadrature_settings();
    let orders = axis_orders(2);
    let mut rng = seeded(8);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let x: StatePoint = vec![rng.gen_range(0.5..16.0), rng.gen_range(0.5..16.0)].into();
        let a = f.hat_s_along(&PathSpec::axis_parallel(m.reference(), &x, &orders[0], settings)).map_err(err)?;
        let b = f.hat_s_along(&PathSpec::axis_parallel(m.reference(), &x, &orders[1], settings)).map_err(err)?;
        worst = worst.max((a.value - b.value).abs());
    }
    check(worst <= 1e-9, || format!("max difference {worst:.3e}"))?;
    Ok(format!("max difference {worst:.2e}"))
}

fn leaf() -> Outcome {
    let f = field(models::photon_gas());
    let tol = Tolerances::default().leaf;
    let params: StatePoint = [1.0, 1.0].into();
    let b = leaf_solve(&f, 2.0, &params, tol).map_err(err)?.energy_above_ground;
    check((b - 2f64.powf(4.0 / 3.0)).abs() <= 1e-9, || format!("B_2 = {b}"))?;
    for c in [0.5, 1.0, 2.0, 4.0, 8.0] {
        let s = leaf_solve(&f, c, &params, tol).map_err(err)?;
        check(s.residual <= 1e-10 * c, || format!("c = {c}: residual {:e}", s.residual))?;
    }
    Ok(format!("B_2 = {b:.12}"))
}

fn expression_layer() -> Outcome {
    let mut rng = seeded(10);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let src = random_expression(&mut rng, 4);
        let e = Expr::parse(&src).map_err(err)?;
        let point = random_binding(&mut rng);
        let var = rng.gen_range(0..3);
        let d = e.differentiate(point[var].0).eval(&point).map_err(err)?;
        let fd = central_difference(
            |t| {
                let mut p = point;
                p[var].1 = t;
                e.eval(&p).unwrap()
            },
            point[var].1,
        );
        worst = worst.max((d - fd).abs() / d.abs().max(1.0));
    }
    check(worst <= 1e-6, || format!("derivative error {worst:.3e}"))?;
    for _ in 0..100 {
        let src = random_expression(&mut rng, 4);
        let e = Expr::parse(&src).map_err(err)?;
        let again = Expr::parse(&e.to_string()).map_err(err)?;
        let point = random_binding(&mut rng);
        let (a, b) = (e.eval(&point).map_err(err)?, again.eval(&point).map_err(err)?);
        check(a == b, || format!("`{src}` evaluates to {a} but its printed form to {b}"))?;
    }
    Ok(format!("derivative error {worst:.2e}, 100 round trips exact"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("photon gas reconstruction", photon_reconstruction),
        ("counter-example detection", counter_example),
        ("extensivity", extensivity),
        ("ideal gas integrability", ideal_gas_integrability),
        ("concavity", concavity),
        ("gibbs-duhem", gibbs_duhem),
        ("third-law triage", third_law),
        ("path independence", path_independence),
        ("leaf solver", leaf),
        ("expression layer", expression_layer),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", k + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
