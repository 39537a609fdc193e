//! JSON model files: `{name, dim, terms: [{order, matrix}], metadata}` with
//! complex entries written as `[re, im]`.

use std::collections::BTreeMap;

use geompert::models::BuiltinModel;
use geompert::{CMatrix, PolynomialHamiltonian};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CliError;
use crate::numfmt::{pair, Num};

#[derive(Debug, Clone, PartialEq)]
pub struct ModelDocument {
    pub name: String,
    pub dim: usize,
    /// `terms[j]` is `H⁽ʲ⁾`; orders absent from the file are zero.
    pub terms: Vec<CMatrix>,
    pub metadata: BTreeMap<String, String>,
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn check_fields(obj: &Map<String, Value>, path: &str, allowed: &[&str]) -> Result<(), CliError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(schema(format!("{path}.{k}"), "unknown field")),
        None => Ok(()),
    }
}

fn required<'a>(obj: &'a Map<String, Value>, path: &str, key: &str) -> Result<&'a Value, CliError> {
    obj.get(key)
        .ok_or_else(|| schema(format!("{path}.{key}"), "missing required field"))
}

fn as_index(v: &Value, path: &str) -> Result<usize, CliError> {
    v.as_u64()
        .and_then(|x| usize::try_from(x).ok())
        .ok_or_else(|| schema(path, "expected a non-negative integer"))
}

fn parse_entry(v: &Value, path: &str) -> Result<Complex64, CliError> {
    let parts = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| schema(path, "expected a [re, im] pair"))?;
    let mut out = [0.0; 2];
    for (i, p) in parts.iter().enumerate() {
        let n = p
            .as_number()
            .ok_or_else(|| schema(format!("{path}[{i}]"), "expected a number"))?;
        let x: f64 = n
            .to_string()
            .parse()
            .map_err(|_| schema(format!("{path}[{i}]"), "unreadable number"))?;
        if !x.is_finite() {
            return Err(CliError::NonFiniteEntry {
                path: format!("{path}[{i}]"),
            });
        }
        out[i] = x;
    }
    Ok(Complex64::new(out[0], out[1]))
}

fn parse_matrix(v: &Value, path: &str, dim: usize) -> Result<CMatrix, CliError> {
    let rows = v
        .as_array()
        .ok_or_else(|| schema(path, "expected an array of rows"))?;
    let mut cols = None;
    for (r, row) in rows.iter().enumerate() {
        let len = row
            .as_array()
            .ok_or_else(|| schema(format!("{path}[{r}]"), "expected an array of entries"))?
            .len();
        match cols {
            None => cols = Some(len),
            Some(c) if c != len => {
                return Err(schema(format!("{path}[{r}]"), format!("row has {len} entries, previous rows {c}")))
            }
            _ => {}
        }
    }
    let cols = cols.unwrap_or(0);
    if rows.len() != cols || rows.len() != dim {
        if rows.len() == cols {
            return Err(schema(path, format!("matrix is {cols}x{cols} but dim is {dim}")));
        }
        return Err(CliError::NonSquare {
            path: path.to_string(),
            rows: rows.len(),
            cols,
            dim,
        });
    }
    let mut m = CMatrix::zeros(dim, dim);
    for (r, row) in rows.iter().enumerate() {
        for (c, entry) in row.as_array().expect("checked above").iter().enumerate() {
            m[(r, c)] = parse_entry(entry, &format!("{path}[{r}][{c}]"))?;
        }
    }
    Ok(m)
}

/// Parses and validates a model file, zero-filling orders missing below the
/// highest one given.
pub fn parse_model(text: &[u8]) -> Result<ModelDocument, CliError> {
    let root: Value = serde_json::from_slice(text).map_err(|e| CliError::Json(e.to_string()))?;
    let obj = root.as_object().ok_or_else(|| schema("$", "expected an object"))?;
    check_fields(obj, "$", &["name", "dim", "terms", "metadata"])?;

    let name = required(obj, "$", "name")?
        .as_str()
        .ok_or_else(|| schema("$.name", "expected a string"))?
        .to_string();
    let dim = as_index(required(obj, "$", "dim")?, "$.dim")?;
    if dim == 0 {
        return Err(schema("$.dim", "dimension must be at least 1"));
    }

    let terms_value = required(obj, "$", "terms")?
        .as_array()
        .ok_or_else(|| schema("$.terms", "expected an array"))?;
    let mut given: BTreeMap<usize, CMatrix> = BTreeMap::new();
    for (i, t) in terms_value.iter().enumerate() {
        let path = format!("$.terms[{i}]");
        let tobj = t.as_object().ok_or_else(|| schema(&path, "expected an object"))?;
        check_fields(tobj, &path, &["order", "matrix"])?;
        let order = as_index(required(tobj, &path, "order")?, &format!("{path}.order"))?;
        let matrix = parse_matrix(required(tobj, &path, "matrix")?, &format!("{path}.matrix"), dim)?;
        if given.insert(order, matrix).is_some() {
            return Err(schema(format!("{path}.order"), format!("duplicate order {order}")));
        }
    }
    if !given.contains_key(&0) {
        return Err(schema("$.terms", "an order-0 term is required"));
    }
    let max_order = *given.keys().next_back().expect("order 0 present");
    let terms = (0..=max_order)
        .map(|j| given.remove(&j).unwrap_or_else(|| CMatrix::zeros(dim, dim)))
        .collect();

    let mut metadata = BTreeMap::new();
    if let Some(m) = obj.get("metadata") {
        let mobj = m
            .as_object()
            .ok_or_else(|| schema("$.metadata", "expected an object of strings"))?;
        for (k, v) in mobj {
            let s = v
                .as_str()
                .ok_or_else(|| schema(format!("$.metadata.{k}"), "expected a string"))?;
            metadata.insert(k.clone(), s.to_string());
        }
    }

    Ok(ModelDocument {
        name,
        dim,
        terms,
        metadata,
    })
}

#[derive(Serialize)]
struct TermOut {
    order: usize,
    matrix: Vec<Vec<[Num; 2]>>,
}

#[derive(Serialize)]
struct DocumentOut<'a> {
    name: &'a str,
    dim: usize,
    terms: Vec<TermOut>,
    metadata: &'a BTreeMap<String, String>,
}

impl ModelDocument {
    pub fn from_hamiltonian(
        name: &str,
        h: &PolynomialHamiltonian,
        metadata: BTreeMap<String, String>,
    ) -> Self {
        ModelDocument {
            name: name.to_string(),
            dim: h.dim(),
            terms: h.terms().to_vec(),
            metadata,
        }
    }

    pub fn from_builtin(model: &BuiltinModel) -> Self {
        let metadata = BTreeMap::from([("description".to_string(), model.description.to_string())]);
        Self::from_hamiltonian(model.name, &model.hamiltonian, metadata)
    }

    pub fn to_json(&self) -> String {
        let terms = self
            .terms
            .iter()
            .enumerate()
            .map(|(order, m)| TermOut {
                order,
                matrix: m
                    .row_iter()
                    .map(|row| row.iter().map(|z| pair(*z)).collect())
                    .collect(),
            })
            .collect();
        let out = DocumentOut {
            name: &self.name,
            dim: self.dim,
            terms,
            metadata: &self.metadata,
        };
        serde_json::to_string_pretty(&out).expect("document serializes")
    }

    pub fn hamiltonian(&self) -> Result<PolynomialHamiltonian, CliError> {
        PolynomialHamiltonian::new(self.terms.clone()).map_err(|e| schema("$.terms", e.to_string()))
    }
}
