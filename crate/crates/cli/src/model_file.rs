//! TOML model files.
//!
//! ```toml
//! name = "photon_gas"
//! coordinates = ["U", "V"]
//! pressure = "U/(3*V)"
//! analytic_entropy = "U^(3/4)*V^(1/4)"
//!
//! [reference]
//! U = 1.0
//! V = 1.0
//! ```
//!
//! Optional keys: `boundary`, `reference_entropy`, `analytic_entropy`, a
//! `[conjugates]` table with one expression per coordinate after the
//! volume, and a `[bounds]` table of `[lower, upper]` pairs.

use std::collections::BTreeMap;
use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};
use thermoform::expr::{EvalError, Expr};
use thermoform::pfaffian::{Interval, ModelDefinition, ModelError, ThermoModel};
use thiserror::Error;
use toml::Spanned;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Located {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Model { path: PathBuf, source: ModelError },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    name: Spanned<String>,
    coordinates: Spanned<Vec<String>>,
    pressure: Spanned<String>,
    conjugates: Option<Spanned<BTreeMap<String, Spanned<String>>>>,
    boundary: Option<Spanned<String>>,
    analytic_entropy: Option<Spanned<String>>,
    reference_entropy: Option<Spanned<f64>>,
    reference: Spanned<BTreeMap<String, f64>>,
    #[serde(default)]
    bounds: BTreeMap<String, Spanned<[f64; 2]>>,
}

/// A validated model and the SHA-256 of the file it came from.
#[derive(Clone, Debug)]
pub struct LoadedModel {
    pub model: ThermoModel,
    pub digest: String,
}

struct Source<'a> {
    path: &'a Path,
    text: &'a str,
}

impl Source<'_> {
    fn at(&self, offset: usize, message: impl Into<String>) -> LoadError {
        let before = &self.text[..offset.min(self.text.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.rfind('\n').map_or(before.len(), |nl| before.len() - nl - 1) + 1;
        LoadError::Located {
            path: self.path.to_path_buf(),
            line,
            column,
            message: message.into(),
        }
    }

    fn span(&self, span: Range<usize>, message: impl Into<String>) -> LoadError {
        self.at(span.start, message)
    }

    /// Offset of the first character inside a string value.
    fn string_start(&self, span: &Range<usize>) -> usize {
        let raw = &self.text[span.clone()];
        if raw.starts_with("\"\"\"") || raw.starts_with("'''") {
            span.start + 3
        } else {
            span.start + 1
        }
    }

    fn expression(&self, field: &str, s: &Spanned<String>, names: &[String]) -> Result<Expr, LoadError> {
        let start = self.string_start(&s.span());
        let e = Expr::parse(s.get_ref())
            .map_err(|err| self.at(start + err.offset(), format!("{field}: {err}")))?;
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        if let Err(EvalError::MissingVariable(v)) = e.compile(&names) {
            let offset = s.get_ref().find(v.as_str()).unwrap_or(0);
            return Err(self.at(
                start + offset,
                format!("{field} uses `{v}`, which is not a coordinate"),
            ));
        }
        Ok(e)
    }
}

fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn load(path: &Path) -> Result<LoadedModel, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let model = parse(path, &text)?;
    Ok(LoadedModel {
        model,
        digest: digest(text.as_bytes()),
    })
}

pub fn parse(path: &Path, text: &str) -> Result<ThermoModel, LoadError> {
    let src = Source { path, text };
    let raw: RawModel = toml::from_str(text).map_err(|e| {
        let offset = e.span().map_or(0, |s| s.start);
        src.at(offset, e.message().to_string())
    })?;

    let coords = raw.coordinates.get_ref();
    if coords.len() < 2 {
        return Err(src.span(
            raw.coordinates.span(),
            "at least the energy and volume coordinates are required",
        ));
    }
    let pressure = src.expression("pressure", &raw.pressure, coords)?;

    let empty = BTreeMap::new();
    let (conjugate_table, table_span) = match &raw.conjugates {
        Some(t) => (t.get_ref(), t.span()),
        None => (&empty, raw.coordinates.span()),
    };
    if let Some(extra) = conjugate_table.keys().find(|k| !coords[2..].contains(k)) {
        let span = conjugate_table[extra].span();
        return Err(src.span(span, format!("`{extra}` is not a coordinate after the volume")));
    }
    let mut conjugates = Vec::new();
    for c in &coords[2..] {
        let s = conjugate_table
            .get(c)
            .ok_or_else(|| src.span(table_span.clone(), format!("missing conjugate intensity for `{c}`")))?;
        conjugates.push(src.expression(&format!("conjugate of `{c}`"), s, coords)?);
    }

    let reference_table = raw.reference.get_ref();
    if let Some(extra) = reference_table.keys().find(|k| !coords.contains(k)) {
        return Err(src.span(raw.reference.span(), format!("`{extra}` is not a coordinate")));
    }
    let reference = coords
        .iter()
        .map(|c| {
            reference_table.get(c).copied().ok_or_else(|| {
                src.span(raw.reference.span(), format!("reference state is missing `{c}`"))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    if let Some((extra, s)) = raw.bounds.iter().find(|(k, _)| !coords.contains(k)) {
        return Err(src.span(s.span(), format!("`{extra}` is not a coordinate")));
    }
    let bounds = coords
        .iter()
        .map(|c| match raw.bounds.get(c) {
            Some(b) => {
                let [lower, upper] = *b.get_ref();
                let interval = Interval::new(lower, upper);
                if interval.is_valid() {
                    Ok(interval)
                } else {
                    Err(src.span(b.span(), format!("bounds of `{c}` are not an open interval")))
                }
            }
            None => Ok(Interval::positive()),
        })
        .collect::<Result<Vec<_>, _>>()?;

    let names: Vec<&str> = coords.iter().map(String::as_str).collect();
    let mut def = ModelDefinition::new(raw.name.get_ref().clone(), &names, pressure, conjugates, reference)
        .with_bounds(bounds);
    if let Some(b) = &raw.boundary {
        def = def.with_boundary(src.expression("boundary", b, coords)?);
    }
    if let Some(s) = &raw.analytic_entropy {
        def = def.with_analytic_entropy(src.expression("analytic_entropy", s, coords)?);
    }
    if let Some(s0) = &raw.reference_entropy {
        def = def.with_reference_entropy(*s0.get_ref());
    }
    ThermoModel::new(def).map_err(|e| match &e {
        ModelError::InvalidCoordinate(_) | ModelError::DuplicateCoordinate(_) => {
            src.span(raw.coordinates.span(), e.to_string())
        }
        ModelError::BoundaryDependsOnEnergy(_) => match &raw.boundary {
            Some(b) => src.span(b.span(), e.to_string()),
            None => LoadError::Model { path: path.to_path_buf(), source: e },
        },
        ModelError::InvalidReferenceEntropy(_) => match &raw.reference_entropy {
            Some(s) => src.span(s.span(), e.to_string()),
            None => LoadError::Model { path: path.to_path_buf(), source: e },
        },
        ModelError::ReferenceOutOfBounds { .. }
        | ModelError::ReferenceOnBoundary(_)
        | ModelError::ReferenceFactorNotPositive(_)
        | ModelError::ReferenceEval { .. } => src.span(raw.reference.span(), e.to_string()),
        _ => LoadError::Model {
            path: path.to_path_buf(),
            source: e,
        },
    })
}
