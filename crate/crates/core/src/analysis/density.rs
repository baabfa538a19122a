use std::collections::BTreeSet;

use super::AnalysisError;
use crate::entropy::{axis_orders, Obstruction, PathSpec, SEGMENT_SAMPLES};
use crate::expr::Expr;
use crate::pfaffian::{PfaffianForm, StatePoint, ThermoModel};
use crate::quadrature::{integrate, QuadratureResult, QuadratureSettings};

/// A model rewritten in the densities u = U/V, xⁱ = Xⁱ/V.
///
/// The intensities are degree 0, so substituting U → u, V → 1, Xⁱ → xⁱ gives
/// them as functions of the densities alone. ω₀ is not homogeneous; its
/// nominal degree is recorded as 0 and never checked.
#[derive(Clone, Debug)]
pub struct DensityModel {
    model: ThermoModel,
    names: Vec<String>,
    intensities: Vec<Expr>,
    reduced_form: PfaffianForm,
    reference: StatePoint,
    reference_density: f64,
    settings: QuadratureSettings,
}

fn density_name(original: &str, taken: &BTreeSet<String>) -> String {
    let lower = original.to_lowercase();
    if lower != original && !taken.contains(&lower) {
        return lower;
    }
    let mut name = format!("{original}_density");
    while taken.contains(&name) {
        name.push('_');
    }
    name
}

/// Substitutes U = uV, Xⁱ = xⁱV into the state equations and builds
/// ω₀ = (du − Σ ξᵢ dxⁱ)/(u + p − Σ ξᵢxⁱ).
pub fn reduce_to_densities(
    model: &ThermoModel,
    settings: QuadratureSettings,
) -> Result<DensityModel, AnalysisError> {
    let coords = model.coordinates();
    let volume = &coords[1];
    if !(model.bounds()[1].lower >= 0.0) {
        return Err(AnalysisError::Unsupported(format!(
            "volume coordinate `{volume}` is not restricted to positive values"
        )));
    }
    let mut taken: BTreeSet<String> = coords.iter().cloned().collect();
    let mut names = Vec::new();
    for (i, c) in coords.iter().enumerate() {
        if i == 1 {
            continue;
        }
        let n = density_name(c, &taken);
        taken.insert(n.clone());
        names.push(n);
    }
    let reduce = |e: &Expr| -> Expr {
        let mut out = e.substitute(volume, &Expr::one());
        for (original, density) in coords.iter().enumerate().filter(|(i, _)| *i != 1).map(|(_, c)| c).zip(&names) {
            out = out.substitute(original, &Expr::var(density));
        }
        out
    };
    let mut intensities = vec![reduce(model.pressure())];
    intensities.extend(model.conjugates().iter().map(reduce));

    // g = u + p − Σ ξᵢxⁱ
    let mut g = Expr::var(&names[0]) + intensities[0].clone();
    for (xi, n) in intensities[1..].iter().zip(&names[1..]) {
        g = g - xi.clone() * Expr::var(n);
    }
    let mut coefficients = vec![Expr::one() / g.clone()];
    coefficients.extend(intensities[1..].iter().map(|xi| -(xi.clone() / g.clone())));
    let reduced_form = PfaffianForm::new(names.clone(), coefficients, 0.0)
        .map_err(|e| AnalysisError::Unsupported(e.to_string()))?;

    let r = model.reference();
    let v = r[1];
    let reference: StatePoint = (0..r.dim()).filter(|&i| i != 1).map(|i| r[i] / v).collect::<Vec<_>>().into();
    Ok(DensityModel {
        model: model.clone(),
        names,
        intensities,
        reduced_form,
        reference,
        reference_density: model.reference_entropy() / v,
        settings,
    })
}

impl DensityModel {
    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// p and ξᵢ over the densities.
    pub fn intensities(&self) -> &[Expr] {
        &self.intensities
    }

    pub fn reduced_form(&self) -> &PfaffianForm {
        &self.reduced_form
    }

    pub fn reference(&self) -> &StatePoint {
        &self.reference
    }

    /// s at the reference densities, S₀/V_ref.
    pub fn reference_density(&self) -> f64 {
        self.reference_density
    }

    /// Densities of an extensive state.
    pub fn densities_of(&self, x: &StatePoint) -> StatePoint {
        let v = x[1];
        (0..x.dim())
            .filter(|&i| i != 1)
            .map(|i| x[i] / v)
            .collect::<Vec<_>>()
            .into()
    }

    /// The extensive state with volume `v` and densities `y`.
    pub fn lift(&self, y: &StatePoint, v: f64) -> StatePoint {
        let mut c = Vec::with_capacity(y.dim() + 1);
        c.push(y[0] * v);
        c.push(v);
        c.extend(y.coords()[1..].iter().map(|d| d * v));
        c.into()
    }

    fn defect(&self, y: &StatePoint) -> Option<Obstruction> {
        let x = self.lift(y, 1.0);
        if !self.model.contains(&x) {
            return Some(Obstruction::OutsideDomain);
        }
        match self.model.integrating_factor(&x) {
            Ok(f) if f > 0.0 => None,
            Ok(_) => Some(Obstruction::FactorNotPositive),
            Err(_) => Some(Obstruction::EvaluationFailed),
        }
    }

    fn path_is_clean(&self, path: &PathSpec) -> bool {
        if path.segment_count() == 0 {
            return self.defect(path.reference()).is_none();
        }
        path.segments().all(|(a, b)| {
            (0..SEGMENT_SAMPLES).all(|k| {
                let s = k as f64 / (SEGMENT_SAMPLES - 1) as f64;
                self.defect(&a.lerp(b, s)).is_none()
            })
        })
    }

    /// log s(y) − log s(reference), by quadrature of ω₀.
    pub fn log_density_change(&self, y: &StatePoint) -> Result<QuadratureResult, AnalysisError> {
        if y == &self.reference {
            return Ok(QuadratureResult::zero());
        }
        let path = axis_orders(y.dim())
            .iter()
            .map(|order| PathSpec::axis_parallel(&self.reference, y, order, self.settings))
            .chain(std::iter::once(PathSpec::straight(&self.reference, y, self.settings)))
            .find(|p| self.path_is_clean(p))
            .ok_or_else(|| AnalysisError::NotInterior(self.lift(y, 1.0)))?;
        let mut total = QuadratureResult::zero();
        for (a, b) in path.segments() {
            let delta: Vec<f64> = b.coords().iter().zip(a.coords()).map(|(b, a)| b - a).collect();
            let q = integrate(
                |t| {
                    let p = a.lerp(b, t);
                    self.reduced_form
                        .contract(&p, &delta)
                        .map_err(AnalysisError::from)
                },
                0.0,
                1.0,
                &self.settings,
            )?;
            total = total.combine(q);
        }
        Ok(total)
    }

    /// The entropy density s(y).
    pub fn density_entropy(&self, y: &StatePoint) -> Result<f64, AnalysisError> {
        Ok(self.reference_density * self.log_density_change(y)?.value.exp())
    }

    /// V·s(U/V, X/V).
    pub fn entropy(&self, x: &StatePoint) -> Result<f64, AnalysisError> {
        Ok(x[1] * self.density_entropy(&self.densities_of(x))?)
    }

    /// |(ω/f)(δ) − δV/V − ω₀(δy)| at x for a displacement δ, where
    /// δu = (δU − u δV)/V and δxⁱ = (δXⁱ − xⁱ δV)/V.
    pub fn decomposition_residual(&self, x: &StatePoint, delta: &[f64]) -> Result<f64, AnalysisError> {
        let f = self.model.integrating_factor(x)?;
        let lhs = self.model.heat_form().contract(x, delta)? / f;
        let v = x[1];
        let y = self.densities_of(x);
        let dy: Vec<f64> = (0..x.dim())
            .filter(|&i| i != 1)
            .zip(y.coords())
            .map(|(i, yi)| (delta[i] - yi * delta[1]) / v)
            .collect();
        let rhs = delta[1] / v + self.reduced_form.contract(&y, &dy)?;
        Ok((lhs - rhs).abs())
    }
}

/// S at x for a system whose temperature is known, integrating
/// ds = ω/T over the slice where coordinate `scale` equals 1 and ignoring
/// that coordinate's conjugate. Then S = x_scale·s(x / x_scale).
pub fn closed_system_entropy(
    model: &ThermoModel,
    temperature: &Expr,
    scale: usize,
    x: &StatePoint,
    settings: &QuadratureSettings,
) -> Result<f64, AnalysisError> {
    let names: Vec<&str> = model.coordinates().iter().map(String::as_str).collect();
    let t = temperature
        .compile(&names)
        .map_err(|e| AnalysisError::Unsupported(format!("temperature: {e}")))?;
    let r = model.reference();
    let from = r.scaled(1.0 / r[scale]);
    let to = x.scaled(1.0 / x[scale]);
    let s_from = model.reference_entropy() / r[scale];
    let mut order: Vec<usize> = (0..x.dim()).filter(|&i| i != scale && i != 0).collect();
    order.push(0);
    let path = PathSpec::axis_parallel(&from, &to, &order, *settings);
    let mut total = 0.0;
    for (a, b) in path.segments() {
        let delta: Vec<f64> = b.coords().iter().zip(a.coords()).map(|(b, a)| b - a).collect();
        let q = integrate(
            |s| {
                let p = a.lerp(b, s);
                let temp = t.eval(p.coords()).map_err(super::eval_at(&p))?;
                Ok::<_, AnalysisError>(model.heat_form().contract(&p, &delta)? / temp)
            },
            0.0,
            1.0,
            settings,
        )?;
        total += q.value;
    }
    Ok(x[scale] * (s_from + total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    #[test]
    fn photon_densities() {
        let d = reduce_to_densities(&models::photon_gas(), Default::default()).unwrap();
        assert_eq!(d.names(), ["u"]);
        assert_eq!(d.intensities()[0].eval(&[("u", 3.0)]).unwrap(), 1.0);
        // s(u) = u^{3/4}
        let s = d.density_entropy(&[16.0].into()).unwrap();
        assert!((s - 8.0).abs() < 1e-10);
        let x: StatePoint = [5.0, 2.0].into();
        let want = 5f64.powf(0.75) * 2f64.powf(0.25);
        assert!((d.entropy(&x).unwrap() - want).abs() < 1e-10 * want);
    }

    #[test]
    fn decomposition_identity() {
        let d = reduce_to_densities(&models::photon_gas(), Default::default()).unwrap();
        let r = d.decomposition_residual(&[2.0, 5.0].into(), &[1.0, 0.0]).unwrap();
        assert!(r <= 1e-10);
        let r = d.decomposition_residual(&[2.0, 5.0].into(), &[0.3, -1.7]).unwrap();
        assert!(r <= 1e-10);
    }

    #[test]
    fn ideal_gas_density_names_avoid_collisions() {
        let d = reduce_to_densities(&models::default_ideal_gas(), Default::default()).unwrap();
        assert_eq!(d.names(), ["u", "n"]);
        assert_eq!(d.reference(), &StatePoint::from([1.0, 1.0]));
    }

    #[test]
    fn closed_system_with_known_temperature() {
        let m = models::default_ideal_gas();
        let t = Expr::parse("U/(1.5*N)").unwrap();
        let x: StatePoint = [3.0, 2.0, 1.5].into();
        let s = closed_system_entropy(&m, &t, 2, &x, &Default::default()).unwrap();
        let want = m.analytic_entropy_at(&x).unwrap().unwrap();
        assert!((s - want).abs() <= 1e-8 * want.abs());
    }
}
