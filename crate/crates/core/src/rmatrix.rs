//! JSON exchange format for R-matrices.
//!
//! ```json
//! { "dim": 2, "q": "symbolic",
//!   "entries": [ { "in": [1, 1], "out": [1, 1], "value": "q" } ] }
//! ```
//!
//! Indices are 1-based; `in` is the row (lower) pair and `out` the column
//! (upper) pair. Unlisted entries are zero. When `q` is a rational number the
//! values are evaluated at that point.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::FileError;
use crate::field::{Field, RationalFunctions};
use crate::qscalar::{parse_rat, parse_scalar, QScalar, Rat};
use crate::tensor::TensorOperator;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    dim: usize,
    q: String,
    entries: Vec<RawEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    #[serde(rename = "in")]
    input: Vec<usize>,
    out: Vec<usize>,
    value: String,
}

/// How the file fixes the deformation parameter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FileQ {
    Symbolic,
    Value(Rat),
}

/// A parsed R-matrix file with 0-based indices.
#[derive(Clone, Debug, PartialEq)]
pub struct RMatrixFile {
    pub dim: usize,
    pub q: FileQ,
    /// `(row pair, column pair, value)`, all values nonzero.
    pub entries: Vec<([usize; 2], [usize; 2], QScalar)>,
}

impl RMatrixFile {
    pub fn parse(text: &str) -> Result<Self, FileError> {
        let raw: RawFile = serde_json::from_str(text)?;
        if raw.dim == 0 {
            return Err(FileError::Invalid("dim must be positive".into()));
        }
        let q = match raw.q.trim() {
            "symbolic" => FileQ::Symbolic,
            other => FileQ::Value(parse_rat(other)?),
        };
        let mut seen = BTreeSet::new();
        let mut entries = Vec::with_capacity(raw.entries.len());
        for (k, e) in raw.entries.iter().enumerate() {
            let pair = |v: &[usize], name: &str| -> Result<[usize; 2], FileError> {
                if v.len() != 2 {
                    return Err(FileError::Invalid(format!("entry {k}: \"{name}\" must list 2 indices, found {}", v.len())));
                }
                if v.iter().any(|&i| i == 0 || i > raw.dim) {
                    return Err(FileError::Invalid(format!("entry {k}: \"{name}\" index outside 1..={}", raw.dim)));
                }
                Ok([v[0] - 1, v[1] - 1])
            };
            let row = pair(&e.input, "in")?;
            let col = pair(&e.out, "out")?;
            if !seen.insert((row, col)) {
                return Err(FileError::Invalid(format!("entry {k}: duplicate position")));
            }
            let mut value = parse_scalar(&e.value)?;
            if let FileQ::Value(qv) = &q {
                value = QScalar::from_rat(value.eval(qv)?);
            }
            if !value.is_zero() {
                entries.push((row, col, value));
            }
        }
        Ok(RMatrixFile { dim: raw.dim, q, entries })
    }

    pub fn load(path: &Path) -> Result<Self, FileError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// The operator over `field`. A file with a numeric `q` should be paired
    /// with a field whose parameter has that value.
    pub fn operator<F: Field>(&self, field: &F) -> Result<TensorOperator<F>, FileError> {
        let mut out = Vec::with_capacity(self.entries.len());
        for (r, c, v) in &self.entries {
            let x = field.embed(v).map_err(|e| FileError::Invalid(e.to_string()))?;
            out.push((r.to_vec(), c.to_vec(), x));
        }
        Ok(TensorOperator::from_entries(field, self.dim, 2, out))
    }

    /// Serializes a symbolic arity-2 operator.
    pub fn from_operator(op: &TensorOperator<RationalFunctions>) -> Result<Self, FileError> {
        if op.arity() != 2 {
            return Err(FileError::Invalid(format!("expected an operator on V⊗V, found arity {}", op.arity())));
        }
        let n = op.dim();
        let entries = op.entries().map(|(r, c, v)| ([r % n, r / n], [c % n, c / n], v.clone())).collect();
        Ok(RMatrixFile { dim: n, q: FileQ::Symbolic, entries })
    }

    pub fn to_json(&self) -> String {
        let raw = RawFile {
            dim: self.dim,
            q: match &self.q {
                FileQ::Symbolic => "symbolic".into(),
                FileQ::Value(v) => v.to_string(),
            },
            entries: self
                .entries
                .iter()
                .map(|(r, c, v)| RawEntry { input: vec![r[0] + 1, r[1] + 1], out: vec![c[0] + 1, c[1] + 1], value: v.to_string() })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Rationals;
    use crate::hecke::{builtin_standard, HeckeSymmetry};

    #[test]
    fn round_trip_standard() {
        let f = RationalFunctions;
        let r = builtin_standard(&f, 2).unwrap();
        let file = RMatrixFile::from_operator(&r).unwrap();
        let back = RMatrixFile::parse(&file.to_json()).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.operator(&f).unwrap(), r);
    }

    #[test]
    fn numeric_q_is_evaluated() {
        let text = r#"{"dim": 1, "q": "2", "entries": [{"in": [1,1], "out": [1,1], "value": "q"}]}"#;
        let file = RMatrixFile::parse(text).unwrap();
        assert_eq!(file.entries[0].2, QScalar::from_int(2));
        let f = Rationals::new(parse_rat("2").unwrap()).unwrap();
        let h = HeckeSymmetry::validate(file.operator(&f).unwrap()).unwrap();
        assert_eq!(h.dim(), 1);
    }

    #[test]
    fn malformed_inputs() {
        let cases = [
            r#"{"dim": 2, "q": "symbolic", "entries": [{"in": [1], "out": [1,1], "value": "1"}]}"#,
            r#"{"dim": 2, "q": "symbolic", "entries": [{"in": [1,3], "out": [1,1], "value": "1"}]}"#,
            r#"{"dim": 2, "q": "symbolic", "entries": [{"in": [1,1], "out": [1,1], "value": "q^"}]}"#,
            r#"{"dim": 0, "q": "symbolic", "entries": []}"#,
            r#"{"dim": 2, "q": "x", "entries": []}"#,
            r#"{"dim": 2, "q": "symbolic", "entries": [{"in": [1,1], "out": [1,1], "value": "1"}, {"in": [1,1], "out": [1,1], "value": "2"}]}"#,
            r#"{"dim": 2, "q": "symbolic"}"#,
            "not json",
        ];
        for c in cases {
            assert!(RMatrixFile::parse(c).is_err(), "{c}");
        }
    }
}
