use serde::Serialize;

use super::{FormError, PfaffianForm, StatePoint};

/// Outcome of one (coefficient, λ, sample) comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeStatus {
    Pass,
    Fail,
    /// The scaled point left the domain or the coefficient could not be
    /// evaluated there.
    Untestable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeEntry {
    pub coefficient: usize,
    pub lambda: f64,
    pub point: StatePoint,
    /// log|ω(λx)/ω(x)| / log λ, when both values are nonzero with equal sign.
    pub observed_degree: Option<f64>,
    pub deviation: Option<f64>,
    pub status: DegreeStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeReport {
    pub nominal_degree: f64,
    pub lambdas: Vec<f64>,
    pub tolerance: f64,
    /// Mean observed degree per coefficient, over entries where one exists.
    pub observed_degrees: Vec<Option<f64>>,
    pub entries: Vec<DegreeEntry>,
    pub worst_deviation: f64,
}

impl DegreeReport {
    /// True when no entry failed and at least one entry was testable.
    pub fn passed(&self) -> bool {
        let mut tested = false;
        for e in &self.entries {
            match e.status {
                DegreeStatus::Fail => return false,
                DegreeStatus::Pass => tested = true,
                DegreeStatus::Untestable => {}
            }
        }
        tested
    }

    pub fn failures(&self) -> impl Iterator<Item = &DegreeEntry> {
        self.entries.iter().filter(|e| e.status == DegreeStatus::Fail)
    }

    pub fn untestable(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.status == DegreeStatus::Untestable)
            .count()
    }
}

pub const DEFAULT_LAMBDAS: [f64; 3] = [0.5, 2.0, 3.0];

impl PfaffianForm {
    /// Compares ωᵢ(λx) with λᵏωᵢ(x) for every coefficient, sample and λ.
    ///
    /// The deviation is relative to max(|ωᵢ(λx)|, |λᵏωᵢ(x)|, λᵏ·maxⱼ|ωⱼ(x)|),
    /// so a coefficient that vanishes at x is judged on the scale of the
    /// whole form rather than on its own.
    pub fn check_homogeneity(
        &self,
        samples: &[StatePoint],
        lambdas: &[f64],
        tol: f64,
    ) -> Result<DegreeReport, FormError> {
        self.check_homogeneity_within(samples, lambdas, tol, |_| true)
    }

    /// As [`check_homogeneity`](Self::check_homogeneity), marking entries
    /// whose scaled point fails `contains` as untestable.
    pub fn check_homogeneity_within(
        &self,
        samples: &[StatePoint],
        lambdas: &[f64],
        tol: f64,
        contains: impl Fn(&StatePoint) -> bool,
    ) -> Result<DegreeReport, FormError> {
        let k = self.degree();
        let m = self.dim();
        let mut entries = Vec::new();
        let mut worst: f64 = 0.0;
        let mut sums = vec![(0.0, 0usize); m];
        for x in samples {
            let base = self.coefficient_values(x)?;
            let scale = base.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            for &lambda in lambdas {
                let y = x.scaled(lambda);
                let scaled = if contains(&y) {
                    match self.coefficient_values(&y) {
                        Ok(v) => Some(v),
                        Err(FormError::Eval { .. }) => None,
                        Err(e) => return Err(e),
                    }
                } else {
                    None
                };
                let lk = lambda.powf(k);
                for i in 0..m {
                    let Some(vals) = &scaled else {
                        entries.push(DegreeEntry {
                            coefficient: i,
                            lambda,
                            point: x.clone(),
                            observed_degree: None,
                            deviation: None,
                            status: DegreeStatus::Untestable,
                        });
                        continue;
                    };
                    let a = vals[i];
                    let b = lk * base[i];
                    let denom = a.abs().max(b.abs()).max(lk * scale);
                    let deviation = if denom == 0.0 { 0.0 } else { (a - b).abs() / denom };
                    let observed = if base[i] != 0.0 && a / base[i] > 0.0 && lambda != 1.0 {
                        Some((a / base[i]).ln() / lambda.ln())
                    } else {
                        None
                    };
                    if let Some(d) = observed {
                        sums[i].0 += d;
                        sums[i].1 += 1;
                    }
                    worst = worst.max(deviation);
                    entries.push(DegreeEntry {
                        coefficient: i,
                        lambda,
                        point: x.clone(),
                        observed_degree: observed,
                        deviation: Some(deviation),
                        status: if deviation <= tol {
                            DegreeStatus::Pass
                        } else {
                            DegreeStatus::Fail
                        },
                    });
                }
            }
        }
        Ok(DegreeReport {
            nominal_degree: k,
            lambdas: lambdas.to_vec(),
            tolerance: tol,
            observed_degrees: sums
                .iter()
                .map(|&(s, n)| (n > 0).then(|| s / n as f64))
                .collect(),
            entries,
            worst_deviation: worst,
        })
    }
}
