use serde::Serialize;

use super::{eval_at, AnalysisError};
use crate::entropy::EntropySurface;
use crate::pfaffian::StatePoint;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeafSolution {
    pub level: f64,
    /// B_c with S(b + B_c, params) = c.
    pub energy_above_ground: f64,
    pub point: StatePoint,
    /// |S(point) − c|.
    pub residual: f64,
    pub converged: bool,
}

const MAX_DOUBLINGS: usize = 1100;

/// Solves S(b(params) + B, params) = c for B by bracketing from B = 1 (or
/// the first admissible B = 2ᵏ above it) and bisecting to a relative
/// bracket width of 1e-12. `params` is any state with the wanted
/// non-energy coordinates; its energy is ignored. When no bracket exists
/// the error reports the range of S explored.
pub fn leaf_solve(
    surface: &impl EntropySurface,
    c: f64,
    params: &StatePoint,
    tol: f64,
) -> Result<LeafSolution, AnalysisError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(AnalysisError::NonPositiveLevel(c));
    }
    let model = surface.model();
    let at = |b: f64| model.at_energy_above_ground(params, b).map_err(eval_at(params));
    let value = |b: f64| -> Option<f64> {
        let x = at(b).ok()?;
        if !model.admissible(&x) {
            return None;
        }
        surface.entropy(&x).ok().filter(|s| s.is_finite())
    };

    // start at B = 1, or the first admissible B above it
    let mut b1 = 1.0;
    let mut s1 = value(b1);
    for _ in 0..MAX_DOUBLINGS {
        if s1.is_some() {
            break;
        }
        b1 *= 2.0;
        s1 = value(b1);
    }
    let start = at(b1)?;
    let s1 = s1.ok_or_else(|| AnalysisError::NotInterior(at(1.0).unwrap_or(start.clone())))?;
    if !matches!(surface.temperature(&start), Ok(t) if t > 0.0) {
        return Err(AnalysisError::NotIncreasing(start));
    }
    // bracket [lo, hi] with S(lo) < c ≤ S(hi)
    let (mut lo, mut hi) = (b1, b1);
    if s1 < c {
        let mut s_hi = s1;
        let mut k = 0;
        while s_hi < c {
            match value(hi * 2.0) {
                Some(s) if k < MAX_DOUBLINGS => {
                    lo = hi;
                    hi *= 2.0;
                    s_hi = s;
                }
                _ => {
                    return Err(AnalysisError::NoLeafSolution {
                        level: c,
                        min: s1,
                        max: s_hi,
                    })
                }
            }
            k += 1;
        }
    } else {
        // halve toward B = 0; past the edge of the admissible region,
        // bisect between the last good B and the first bad one
        let mut s_lo = s1;
        let mut bad = 0.0;
        let mut k = 0;
        while s_lo >= c {
            let next = if bad > 0.0 { 0.5 * (bad + lo) } else { lo * 0.5 };
            if k >= MAX_DOUBLINGS || !(next > 0.0) || lo - next <= 1e-12 * lo {
                return Err(AnalysisError::NoLeafSolution {
                    level: c,
                    min: s_lo,
                    max: s1,
                });
            }
            match value(next) {
                Some(s) => {
                    hi = lo;
                    lo = next;
                    s_lo = s;
                }
                None => bad = next,
            }
            k += 1;
        }
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        let s = value(mid).ok_or_else(|| AnalysisError::NotInterior(at(mid).unwrap_or_else(|_| params.clone())))?;
        if s < c {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let b = 0.5 * (lo + hi);
    let point = at(b)?;
    let residual = (surface.entropy(&point)? - c).abs();
    Ok(LeafSolution {
        level: c,
        energy_above_ground: b,
        point,
        residual,
        converged: residual <= tol * c,
    })
}

/// B_c along a family of fibers.
pub fn leaf_branch(
    surface: &impl EntropySurface,
    c: f64,
    fibers: &[StatePoint],
    tol: f64,
) -> Result<Vec<f64>, AnalysisError> {
    fibers
        .iter()
        .map(|p| leaf_solve(surface, c, p, tol).map(|s| s.energy_above_ground))
        .collect()
}

/// Sign changes of S(eᵗx₀) − c over `samples` evenly spaced t in
/// [t_min, t_max]. States where S cannot be evaluated are skipped.
pub fn radial_crossings(
    surface: &impl EntropySurface,
    x0: &StatePoint,
    c: f64,
    t_min: f64,
    t_max: f64,
    samples: usize,
) -> usize {
    let mut last: Option<bool> = None;
    let mut count = 0;
    for k in 0..samples {
        let t = t_min + (t_max - t_min) * k as f64 / (samples - 1) as f64;
        if let Ok(s) = surface.entropy(&x0.scaled(t.exp())) {
            let above = s > c;
            if last.is_some_and(|l| l != above) {
                count += 1;
            }
            last = Some(above);
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::EntropyField;
    use crate::models;
    use crate::tolerances::Tolerances;

    fn photon() -> EntropyField {
        EntropyField::new(models::photon_gas(), Tolerances::default())
    }

    #[test]
    fn photon_leaf_at_two() {
        let f = photon();
        let r = leaf_solve(&f, 2.0, &[1.0, 1.0].into(), 1e-10).unwrap();
        assert!((r.energy_above_ground - 2f64.powf(4.0 / 3.0)).abs() < 1e-9);
        assert!(r.converged);
    }

    #[test]
    fn reference_level_returns_reference() {
        let f = photon();
        let r = leaf_solve(&f, 1.0, &[7.0, 1.0].into(), 1e-10).unwrap();
        assert!((r.energy_above_ground - 1.0).abs() < 1e-11);
    }

    #[test]
    fn bad_levels() {
        let f = photon();
        assert_eq!(
            leaf_solve(&f, 0.0, &[1.0, 1.0].into(), 1e-10),
            Err(AnalysisError::NonPositiveLevel(0.0))
        );
        assert!(leaf_solve(&f, -1.0, &[1.0, 1.0].into(), 1e-10).is_err());
    }

    #[test]
    fn branch_is_monotone() {
        let f = photon();
        let fibers: Vec<StatePoint> = (0..=10).map(|k| [1.0, 1.0 + 0.1 * k as f64].into()).collect();
        let b = leaf_branch(&f, 2.0, &fibers, 1e-10).unwrap();
        for (w, v) in b.windows(2).zip(&fibers[1..]) {
            assert!(w[1] < w[0]);
            let want = 2f64.powf(4.0 / 3.0) * v[1].powf(-1.0 / 3.0);
            assert!((w[1] - want).abs() < 1e-9 * want);
        }
    }

    #[test]
    fn radial_ray_crosses_each_leaf_once() {
        let f = photon();
        assert_eq!(radial_crossings(&f, &[2.0, 3.0].into(), 5.0, -10.0, 10.0, 81), 1);
    }
}
