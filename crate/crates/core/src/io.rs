//! JSON model documents.
//!
//! ```json
//! {
//!   "time_domain": "continuous",
//!   "n": 1, "m": 1,
//!   "A": [[-1.0]], "B": [[1.0]], "C": [[1.0]], "D": [[2.0]],
//!   "weight": { "Q": [[0.0]], "C": [[1.0]], "R": [[4.0]] },
//!   "X": [[5.0]]
//! }
//! ```
//!
//! Matrices are arrays of rows. An entry is a number or a pair `[re, im]`.
//! `weight` and `X` are optional. Numbers are written with 17 significant
//! digits, so a write/read cycle reproduces every finite double exactly.

use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};
use crate::hermitian::{hermitian_part, CMatrix, HermitianMatrix};
use crate::model::{GeneralizedWeight, StateSpaceModel, TimeDomain};

/// Model plus the optional weight and matrix `X` of a model file.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelDocument {
    pub model: StateSpaceModel,
    pub weight: Option<GeneralizedWeight>,
    pub x: Option<HermitianMatrix>,
}

impl ModelDocument {
    pub fn new(model: StateSpaceModel) -> Self {
        ModelDocument {
            model,
            weight: None,
            x: None,
        }
    }
}

fn parse_err(field: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        field: field.to_string(),
        message: message.into(),
    }
}

fn as_number(v: &Value, field: &str) -> Result<f64> {
    let x = v
        .as_f64()
        .ok_or_else(|| parse_err(field, "expected a number"))?;
    if !x.is_finite() {
        return Err(parse_err(field, "entry is not finite"));
    }
    Ok(x)
}

fn parse_entry(v: &Value, field: &str) -> Result<Complex64> {
    match v {
        Value::Array(pair) => {
            if pair.len() != 2 {
                return Err(parse_err(field, "complex entry must be [re, im]"));
            }
            Ok(Complex64::new(as_number(&pair[0], field)?, as_number(&pair[1], field)?))
        }
        _ => Ok(Complex64::new(as_number(v, field)?, 0.0)),
    }
}

fn parse_matrix(v: &Value, field: &str, rows: usize, cols: usize) -> Result<CMatrix> {
    let rs = v
        .as_array()
        .ok_or_else(|| parse_err(field, "expected an array of rows"))?;
    if rs.len() != rows {
        return Err(parse_err(field, format!("expected {rows} rows, found {}", rs.len())));
    }
    let mut out = CMatrix::zeros(rows, cols);
    for (i, row) in rs.iter().enumerate() {
        let row_field = format!("{field}[{i}]");
        let es = row
            .as_array()
            .ok_or_else(|| parse_err(&row_field, "expected an array"))?;
        if es.len() != cols {
            return Err(parse_err(&row_field, format!("expected {cols} entries, found {}", es.len())));
        }
        for (j, e) in es.iter().enumerate() {
            out[(i, j)] = parse_entry(e, &format!("{field}[{i}][{j}]"))?;
        }
    }
    Ok(out)
}

fn parse_hermitian(v: &Value, field: &str, n: usize) -> Result<HermitianMatrix> {
    let m = parse_matrix(v, field, n, n)?;
    let skew = (&m - m.adjoint()).norm();
    if skew > 1e-12 * m.norm().max(1.0) {
        return Err(parse_err(field, "matrix is not Hermitian"));
    }
    Ok(hermitian_part(&m))
}

fn field<'a>(obj: &'a Map<String, Value>, name: &str) -> Result<&'a Value> {
    obj.get(name).ok_or_else(|| parse_err(name, "missing"))
}

fn parse_dim(obj: &Map<String, Value>, name: &str) -> Result<usize> {
    let v = field(obj, name)?
        .as_u64()
        .ok_or_else(|| parse_err(name, "expected a positive integer"))?;
    if v == 0 {
        return Err(parse_err(name, "must be at least 1"));
    }
    Ok(v as usize)
}

/// Parses and validates a model document.
pub fn parse_model_document(text: &str) -> Result<ModelDocument> {
    let root: Value = serde_json::from_str(text).map_err(|e| parse_err("document", e.to_string()))?;
    let obj = root
        .as_object()
        .ok_or_else(|| parse_err("document", "expected a JSON object"))?;
    let domain = match field(obj, "time_domain")?.as_str() {
        Some("continuous") => TimeDomain::Continuous,
        Some("discrete") => TimeDomain::Discrete,
        _ => return Err(parse_err("time_domain", "expected \"continuous\" or \"discrete\"")),
    };
    let n = parse_dim(obj, "n")?;
    let m = parse_dim(obj, "m")?;
    let a = parse_matrix(field(obj, "A")?, "A", n, n)?;
    let b = parse_matrix(field(obj, "B")?, "B", n, m)?;
    let c = parse_matrix(field(obj, "C")?, "C", m, n)?;
    let d = parse_matrix(field(obj, "D")?, "D", m, m)?;
    let model = StateSpaceModel::new(a, b, c, d, domain).map_err(|e| parse_err("model", e.to_string()))?;

    let weight = match obj.get("weight") {
        None | Some(Value::Null) => None,
        Some(w) => {
            let wo = w
                .as_object()
                .ok_or_else(|| parse_err("weight", "expected an object"))?;
            let q = parse_hermitian(field(wo, "Q").map_err(|_| parse_err("weight.Q", "missing"))?, "weight.Q", n)?;
            let cw = parse_matrix(field(wo, "C").map_err(|_| parse_err("weight.C", "missing"))?, "weight.C", m, n)?;
            let r = parse_hermitian(field(wo, "R").map_err(|_| parse_err("weight.R", "missing"))?, "weight.R", m)?;
            Some(GeneralizedWeight::new(q.into_matrix(), cw, r.into_matrix()).map_err(|e| parse_err("weight", e.to_string()))?)
        }
    };
    let x = match obj.get("X") {
        None | Some(Value::Null) => None,
        Some(v) => Some(parse_hermitian(v, "X", n)?),
    };
    Ok(ModelDocument { model, weight, x })
}

pub fn read_model(path: &Path) -> Result<ModelDocument> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_model_document(&text)
}

/// A JSON number with 17 significant digits; non-finite values become `null`.
pub fn number(v: f64) -> Value {
    if !v.is_finite() {
        return Value::Null;
    }
    Value::Number(Number::from_str(&format!("{v:.16e}")).expect("formatted double is a JSON number"))
}

/// Rows of bare numbers for real matrices, `[re, im]` pairs otherwise.
pub fn matrix_value(m: &CMatrix) -> Value {
    let real = m.iter().all(|z| z.im == 0.0);
    Value::Array(
        (0..m.nrows())
            .map(|i| {
                Value::Array(
                    (0..m.ncols())
                        .map(|j| {
                            let z = m[(i, j)];
                            if real {
                                number(z.re)
                            } else {
                                Value::Array(vec![number(z.re), number(z.im)])
                            }
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn complex_value(z: Complex64) -> Value {
    Value::Array(vec![number(z.re), number(z.im)])
}

pub fn document_value(doc: &ModelDocument) -> Value {
    let m = &doc.model;
    let mut obj = Map::new();
    let domain = match m.domain() {
        TimeDomain::Continuous => "continuous",
        TimeDomain::Discrete => "discrete",
    };
    obj.insert("time_domain".into(), Value::String(domain.into()));
    obj.insert("n".into(), Value::from(m.n()));
    obj.insert("m".into(), Value::from(m.m()));
    obj.insert("A".into(), matrix_value(m.a()));
    obj.insert("B".into(), matrix_value(m.b()));
    obj.insert("C".into(), matrix_value(m.c()));
    obj.insert("D".into(), matrix_value(m.d()));
    if let Some(w) = &doc.weight {
        let mut wo = Map::new();
        wo.insert("Q".into(), matrix_value(w.q.matrix()));
        wo.insert("C".into(), matrix_value(&w.cw));
        wo.insert("R".into(), matrix_value(w.r.matrix()));
        obj.insert("weight".into(), Value::Object(wo));
    }
    if let Some(x) = &doc.x {
        obj.insert("X".into(), matrix_value(x.matrix()));
    }
    Value::Object(obj)
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

pub fn write_model_string(doc: &ModelDocument) -> String {
    to_json_string(&document_value(doc))
}

pub fn write_model(path: &Path, doc: &ModelDocument) -> Result<()> {
    std::fs::write(path, write_model_string(doc)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
