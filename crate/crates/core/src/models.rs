//! Bundled models with known answers.

use crate::expr::Expr;
use crate::pfaffian::{ModelDefinition, ThermoModel};

fn parse(src: &str) -> Expr {
    Expr::parse(src).expect("bundled expressions parse")
}

fn with_constants(src: &str, constants: &[(&str, f64)]) -> Expr {
    constants
        .iter()
        .fold(parse(src), |e, (name, v)| e.substitute(name, &Expr::constant(*v)))
}

fn build(def: ModelDefinition) -> ThermoModel {
    ThermoModel::new(def).expect("bundled models validate")
}

/// Radiation: p = U/(3V), S = U^{3/4}V^{1/4}, S₀ = 1 at (1, 1).
pub fn photon_gas() -> ThermoModel {
    build(
        ModelDefinition::new("photon_gas", &["U", "V"], parse("U/(3*V)"), vec![], [1.0, 1.0])
            .with_analytic_entropy(parse("U^(3/4)*V^(1/4)")),
    )
}

/// Classical ideal gas with S = N[s₀ + R ln((U/N)^c (V/N))], reference
/// (1, 1, 1) and S₀ = s₀ there.
///
/// # Panics
/// If `c` or `r` is not positive, or `s0` is not positive (the reference
/// entropy must be).
pub fn ideal_gas(c: f64, r: f64, s0: f64) -> ThermoModel {
    assert!(c > 0.0 && r > 0.0, "ideal gas needs c > 0 and R > 0");
    let k = [("c", c), ("R", r), ("s0", s0)];
    build(
        ModelDefinition::new(
            "ideal_gas",
            &["U", "V", "N"],
            with_constants("U/(c*V)", &k),
            vec![with_constants(
                "(U + U/c - U/(c*R)*(s0 + c*R*ln(U/N) + R*ln(V/N)))/N",
                &k,
            )],
            [1.0, 1.0, 1.0],
        )
        .with_analytic_entropy(with_constants("N*(s0 + R*(c*ln(U/N) + ln(V/N)))", &k))
        .with_reference_entropy(s0),
    )
}

/// [`ideal_gas`] with c = 3/2, R = 1, s₀ = 1.
pub fn default_ideal_gas() -> ThermoModel {
    ideal_gas(1.5, 1.0, 1.0)
}

/// p = U/V, μ = UV/N²: homogeneous, but with l_UVN = U/N² ≠ 0, so no
/// entropy exists.
pub fn nonintegrable_example() -> ThermoModel {
    build(ModelDefinition::new(
        "nonintegrable",
        &["U", "V", "N"],
        parse("U/V"),
        vec![parse("U*V/N^2")],
        [1.0, 1.0, 1.0],
    ))
}

/// S = V + U^{3/4}V^{1/4}, whose limit at U → 0 is V rather than 0.
pub fn planck_violator() -> ThermoModel {
    build(
        ModelDefinition::new(
            "planck_violator",
            &["U", "V"],
            parse("4/3*(U/V)^(1/4) + U/(3*V)"),
            vec![],
            [1.0, 1.0],
        )
        .with_analytic_entropy(parse("V + U^(3/4)*V^(1/4)"))
        .with_reference_entropy(2.0),
    )
}

/// Photon gas above the ground surface U = b₀V: with B = U − b₀V,
/// p = B/(3V) − b₀ and S = B^{3/4}V^{1/4}. Reference (1 + b₀, 1).
///
/// # Panics
/// If `b0` is negative.
pub fn shifted_photon_gas(b0: f64) -> ThermoModel {
    assert!(b0 >= 0.0, "shifted photon gas needs b0 >= 0");
    let k = [("b0", b0)];
    build(
        ModelDefinition::new(
            "shifted_photon_gas",
            &["U", "V"],
            with_constants("(U - b0*V)/(3*V) - b0", &k),
            vec![],
            [1.0 + b0, 1.0],
        )
        .with_boundary(with_constants("b0*V", &k))
        .with_analytic_entropy(with_constants("(U - b0*V)^(3/4)*V^(1/4)", &k)),
    )
}

/// One catalog row.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    /// False only for models built to fail the integrability test.
    pub integrable: bool,
    pub model: ThermoModel,
}

/// All bundled models with their default parameters.
pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            name: "photon_gas",
            integrable: true,
            model: photon_gas(),
        },
        CatalogEntry {
            name: "ideal_gas",
            integrable: true,
            model: default_ideal_gas(),
        },
        CatalogEntry {
            name: "nonintegrable",
            integrable: false,
            model: nonintegrable_example(),
        },
        CatalogEntry {
            name: "planck_violator",
            integrable: true,
            model: planck_violator(),
        },
        CatalogEntry {
            name: "shifted_photon_gas",
            integrable: true,
            model: shifted_photon_gas(1.0),
        },
    ]
}

pub fn by_name(name: &str) -> Option<ThermoModel> {
    catalog().into_iter().find(|e| e.name == name).map(|e| e.model)
}
