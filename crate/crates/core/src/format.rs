//! Document formats: triple documents, lattice documents, and serde helpers
//! writing integers as decimal strings.
//!
//! Documents are JSON. Integers are written as decimal strings; the parser
//! also accepts JSON integers that fit in 64 bits. Every document carries
//! `"format_version": 1`.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serializer;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::algebra::{IntMatrix, RatVector};
use crate::lattice::Lattice;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("missing field \"{0}\"")]
    Missing(&'static str),
    #[error("unknown field \"{0}\"")]
    Unknown(String),
    #[error("field \"{field}\": {reason}")]
    Invalid { field: String, reason: String },
}

impl FormatError {
    /// Name of the offending field, when there is one.
    pub fn field(&self) -> Option<&str> {
        match self {
            FormatError::Json(_) => None,
            FormatError::Missing(f) => Some(f),
            FormatError::Unknown(f) => Some(f),
            FormatError::Invalid { field, .. } => Some(field),
        }
    }
}

fn invalid(field: &str, reason: impl Into<String>) -> FormatError {
    FormatError::Invalid {
        field: field.to_string(),
        reason: reason.into(),
    }
}

/// Serializes a big integer as a decimal string.
pub fn ser_bigint<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

/// Serializes a vector of big integers as decimal strings.
pub fn ser_bigint_vec<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

/// Serializes a matrix as an array of rows of decimal strings.
pub fn ser_matrix<S: Serializer>(m: &IntMatrix, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq((0..m.rows()).map(|i| m.row(i).iter().map(|x| x.to_string()).collect::<Vec<_>>()))
}

pub fn strings(v: &[BigInt]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

pub fn matrix_strings(m: &IntMatrix) -> Vec<Vec<String>> {
    (0..m.rows()).map(|i| strings(m.row(i))).collect()
}

/// Pretty-prints JSON with two-space indentation, keeping arrays of
/// scalars on one line so matrices render one row per line.
pub fn to_pretty(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0);
    out.push('\n');
    out
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) if items.iter().all(is_scalar) => {
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&x.to_string());
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(out, x, indent + 1);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                let _ = write!(out, "{}{}: ", pad(indent + 1), Value::String(k.clone()));
                write_value(out, x, indent + 1);
                if i + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        scalar => out.push_str(&scalar.to_string()),
    }
}

fn int_value(x: &BigInt) -> Value {
    Value::String(x.to_string())
}

fn row_value(r: &[BigInt]) -> Value {
    Value::Array(r.iter().map(int_value).collect())
}

fn matrix_value(m: &IntMatrix) -> Value {
    Value::Array((0..m.rows()).map(|i| row_value(m.row(i))).collect())
}

fn parse_int(v: &Value, field: &str) -> Result<BigInt, FormatError> {
    match v {
        Value::String(s) => s
            .trim()
            .parse::<BigInt>()
            .map_err(|_| invalid(field, format!("\"{s}\" is not a decimal integer"))),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigInt::from(i))
            } else if let Some(u) = n.as_u64() {
                Ok(BigInt::from(u))
            } else {
                Err(invalid(
                    field,
                    format!("{n} is not an integer (write large integers as strings)"),
                ))
            }
        }
        other => Err(invalid(field, format!("expected an integer, found {other}"))),
    }
}

fn parse_row(v: &Value, field: &str) -> Result<Vec<BigInt>, FormatError> {
    let Value::Array(items) = v else {
        return Err(invalid(field, "expected an array of integers"));
    };
    items.iter().map(|x| parse_int(x, field)).collect()
}

fn parse_matrix(v: &Value, field: &str) -> Result<IntMatrix, FormatError> {
    let Value::Array(rows) = v else {
        return Err(invalid(field, "expected an array of integer rows"));
    };
    if rows.is_empty() {
        return Err(invalid(field, "matrix is empty"));
    }
    let rows: Vec<Vec<BigInt>> = rows.iter().map(|r| parse_row(r, field)).collect::<Result<_, _>>()?;
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(invalid(field, "rows have different lengths"));
    }
    IntMatrix::from_rows(rows).map_err(|e| invalid(field, e.to_string()))
}

fn parse_small<T: TryFrom<u64>>(v: &Value, field: &str) -> Result<T, FormatError> {
    let x = parse_int(v, field)?;
    x.to_u64()
        .and_then(|u| T::try_from(u).ok())
        .ok_or_else(|| invalid(field, format!("{x} is out of range")))
}

struct Fields {
    map: Map<String, Value>,
}

impl Fields {
    fn new(text: &str, allowed: &[&str]) -> Result<Self, FormatError> {
        let value: Value = serde_json::from_str(text).map_err(|e| FormatError::Json(e.to_string()))?;
        let Value::Object(map) = value else {
            return Err(FormatError::Json("top level must be an object".into()));
        };
        if let Some(k) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(FormatError::Unknown(k.clone()));
        }
        if let Some(v) = map.get("format_version") {
            let ver: u64 = parse_small(v, "format_version")?;
            if ver != FORMAT_VERSION {
                return Err(invalid("format_version", format!("unsupported version {ver}")));
            }
        }
        Ok(Fields { map })
    }

    fn get(&self, field: &'static str) -> Result<&Value, FormatError> {
        self.map.get(field).ok_or(FormatError::Missing(field))
    }
}

/// A triple `(M, F, λ)` with Weil parameters, as stored on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleDocument {
    pub p: u64,
    pub a: u32,
    pub q: BigInt,
    pub claims_k3: bool,
    pub gram: IntMatrix,
    pub frobenius: IntMatrix,
    pub ample_point: Vec<BigInt>,
    pub ample_point_denominator: BigInt,
}

const TRIPLE_FIELDS: [&str; 9] = [
    "format_version",
    "p",
    "a",
    "q",
    "claims_k3",
    "gram",
    "frobenius",
    "ample_point",
    "ample_point_denominator",
];

impl TripleDocument {
    /// Parses and validates shapes: `q = p^a`, symmetric square Gram,
    /// matching Frobenius and ample-point dimensions, positive denominator.
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let f = Fields::new(text, &TRIPLE_FIELDS)?;
        let p: u64 = parse_small(f.get("p")?, "p")?;
        let a: u32 = parse_small(f.get("a")?, "a")?;
        let q = parse_int(f.get("q")?, "q")?;
        let claims_k3 = match f.get("claims_k3")? {
            Value::Bool(b) => *b,
            other => return Err(invalid("claims_k3", format!("expected true or false, found {other}"))),
        };
        let gram = parse_matrix(f.get("gram")?, "gram")?;
        let frobenius = parse_matrix(f.get("frobenius")?, "frobenius")?;
        let ample_point = parse_row(f.get("ample_point")?, "ample_point")?;
        let ample_point_denominator = match f.map.get("ample_point_denominator") {
            Some(v) => parse_int(v, "ample_point_denominator")?,
            None => BigInt::one(),
        };
        let doc = TripleDocument {
            p,
            a,
            q,
            claims_k3,
            gram,
            frobenius,
            ample_point,
            ample_point_denominator,
        };
        doc.validate()?;
        Ok(doc)
    }

    fn validate(&self) -> Result<(), FormatError> {
        crate::weil::WeilParams::with_q(self.p, self.a, &self.q).map_err(|e| {
            let field = match e {
                crate::weil::WeilError::NotPrime(_) => "p",
                crate::weil::WeilError::ZeroExponent => "a",
                _ => "q",
            };
            invalid(field, e.to_string())
        })?;
        let n = self.gram.rows();
        if !self.gram.is_square() {
            return Err(invalid("gram", "matrix is not square"));
        }
        if !self.gram.is_symmetric() {
            return Err(invalid("gram", "matrix is not symmetric"));
        }
        if self.frobenius.rows() != n || self.frobenius.cols() != n {
            return Err(invalid("frobenius", format!("expected {n}x{n}")));
        }
        if self.ample_point.len() != n {
            return Err(invalid("ample_point", format!("expected {n} entries")));
        }
        if !self.ample_point_denominator.is_positive() {
            return Err(invalid("ample_point_denominator", "must be positive"));
        }
        Ok(())
    }

    pub fn to_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("format_version".into(), Value::from(FORMAT_VERSION));
        m.insert("p".into(), Value::String(self.p.to_string()));
        m.insert("a".into(), Value::String(self.a.to_string()));
        m.insert("q".into(), int_value(&self.q));
        m.insert("claims_k3".into(), Value::Bool(self.claims_k3));
        m.insert("gram".into(), matrix_value(&self.gram));
        m.insert("frobenius".into(), matrix_value(&self.frobenius));
        m.insert("ample_point".into(), row_value(&self.ample_point));
        m.insert(
            "ample_point_denominator".into(),
            int_value(&self.ample_point_denominator),
        );
        Value::Object(m)
    }

    /// Canonical text; `parse(emit(d)) == d` and emission is byte-stable.
    pub fn emit(&self) -> String {
        to_pretty(&self.to_value())
    }

    /// SHA-256 of the canonical text, lowercase hex.
    pub fn digest(&self) -> String {
        hex_digest(self.emit().as_bytes())
    }

    pub fn lattice(&self) -> Lattice {
        Lattice::new(self.gram.clone()).expect("validated")
    }

    pub fn ample_point(&self) -> RatVector {
        RatVector::new(self.ample_point.clone(), self.ample_point_denominator.clone()).expect("validated")
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let d = Sha256::digest(bytes);
    d.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// A named Gram matrix document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeDocument {
    pub name: String,
    pub gram: IntMatrix,
}

impl LatticeDocument {
    pub fn new(name: impl Into<String>, lattice: &Lattice) -> Self {
        LatticeDocument {
            name: name.into(),
            gram: lattice.gram().clone(),
        }
    }

    pub fn emit(&self) -> String {
        let mut m = Map::new();
        m.insert("format_version".into(), Value::from(FORMAT_VERSION));
        m.insert("name".into(), Value::String(self.name.clone()));
        m.insert("rank".into(), Value::from(self.gram.rows()));
        m.insert("gram".into(), matrix_value(&self.gram));
        to_pretty(&Value::Object(m))
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let f = Fields::new(text, &["format_version", "name", "rank", "gram"])?;
        let name = match f.get("name")? {
            Value::String(s) => s.clone(),
            other => return Err(invalid("name", format!("expected a string, found {other}"))),
        };
        let gram = parse_matrix(f.get("gram")?, "gram")?;
        if !gram.is_square() || !gram.is_symmetric() {
            return Err(invalid("gram", "matrix is not square and symmetric"));
        }
        if let Some(r) = f.map.get("rank") {
            let r: usize = parse_small(r, "rank")?;
            if r != gram.rows() {
                return Err(invalid("rank", format!("rank {r} does not match the Gram matrix")));
            }
        }
        Ok(LatticeDocument { name, gram })
    }
}
