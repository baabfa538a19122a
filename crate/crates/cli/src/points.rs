//! Command-line state and grid syntax.
//!
//! A state is either positional (`1,1`) or named (`U=1,V=1`). A grid gives
//! every coordinate either a value or `lo:hi:n`, as in `U=1:16:4,V=1`.

use thermoform::pfaffian::StatePoint;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PointError {
    #[error("`{0}` is not a number")]
    Number(String),
    #[error("expected {expected} values, got {found}")]
    Count { expected: usize, found: usize },
    #[error("`{0}` is not a coordinate")]
    Unknown(String),
    #[error("`{0}` is given twice")]
    Repeated(String),
    #[error("no value for `{0}`")]
    Missing(String),
    #[error("`{0}` is not `name=value`")]
    Pair(String),
    #[error("range `{0}` must be lo:hi:n with n ≥ 1")]
    Range(String),
}

fn number(s: &str) -> Result<f64, PointError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| PointError::Number(s.trim().to_string()))
}

/// Values keyed by name, in the order of `names`.
fn named<'a>(spec: &'a str, names: &[&str]) -> Result<Vec<&'a str>, PointError> {
    let mut values: Vec<Option<&str>> = vec![None; names.len()];
    for part in spec.split(',') {
        let (name, value) = part.split_once('=').ok_or_else(|| PointError::Pair(part.to_string()))?;
        let name = name.trim();
        let i = names
            .iter()
            .position(|n| *n == name)
            .ok_or_else(|| PointError::Unknown(name.to_string()))?;
        if values[i].replace(value).is_some() {
            return Err(PointError::Repeated(name.to_string()));
        }
    }
    values
        .into_iter()
        .zip(names)
        .map(|(v, n)| v.ok_or_else(|| PointError::Missing(n.to_string())))
        .collect()
}

/// Values for `names`, positional or named.
pub fn parse_values(spec: &str, names: &[&str]) -> Result<Vec<f64>, PointError> {
    if spec.contains('=') {
        return named(spec, names)?.into_iter().map(number).collect();
    }
    let values: Vec<f64> = spec.split(',').map(number).collect::<Result<_, _>>()?;
    if values.len() != names.len() {
        return Err(PointError::Count {
            expected: names.len(),
            found: values.len(),
        });
    }
    Ok(values)
}

pub fn parse_point(spec: &str, names: &[&str]) -> Result<StatePoint, PointError> {
    parse_values(spec, names).map(StatePoint::from)
}

fn axis(spec: &str) -> Result<Vec<f64>, PointError> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [v] => Ok(vec![number(v)?]),
        [lo, hi, n] => {
            let (lo, hi) = (number(lo)?, number(hi)?);
            let n: usize = n
                .trim()
                .parse()
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| PointError::Range(spec.to_string()))?;
            if n == 1 {
                return Ok(vec![lo]);
            }
            Ok((0..n)
                .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
                .collect())
        }
        _ => Err(PointError::Range(spec.to_string())),
    }
}

/// All grid states, the last coordinate varying fastest.
pub fn parse_grid(spec: &str, names: &[&str]) -> Result<Vec<StatePoint>, PointError> {
    let axes = named(spec, names)?
        .into_iter()
        .map(axis)
        .collect::<Result<Vec<_>, _>>()?;
    let mut points: Vec<Vec<f64>> = vec![vec![]];
    for values in &axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    Ok(points.into_iter().map(StatePoint::from).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const UV: [&str; 2] = ["U", "V"];

    #[test]
    fn grid_arithmetic() {
        let g = parse_grid("U=1:16:4,V=1", &UV).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g[1], StatePoint::from([6.0, 1.0]));
        assert_eq!(parse_grid("V=1:2:3,U=1:16:4", &UV).unwrap().len(), 12);
        assert_eq!(parse_grid("U=1:16:4", &UV), Err(PointError::Missing("V".into())));
        assert_eq!(parse_grid("U=1:16:0,V=1", &UV), Err(PointError::Range("1:16:0".into())));
        assert_eq!(parse_grid("U=1,W=1", &UV), Err(PointError::Unknown("W".into())));
    }

    #[test]
    fn points() {
        assert_eq!(parse_point("1, 2", &UV).unwrap(), StatePoint::from([1.0, 2.0]));
        assert_eq!(parse_point("V=2,U=1", &UV).unwrap(), StatePoint::from([1.0, 2.0]));
        assert_eq!(parse_point("1", &UV), Err(PointError::Count { expected: 2, found: 1 }));
        assert_eq!(parse_point("1,x", &UV), Err(PointError::Number("x".into())));
        assert_eq!(parse_point("U=1,U=2", &UV), Err(PointError::Repeated("U".into())));
    }
}
