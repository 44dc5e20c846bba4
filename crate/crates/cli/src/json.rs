//! Instance and result files.
//!
//! Complex entries are `[re, im]` pairs and matrices are arrays of rows.
//! Results are written compactly with sorted keys and every float printed
//! with 17 significant digits, so equal inputs give byte-identical output.

use std::collections::BTreeMap;
use std::io::{self, Write};

use opext_core::numkit::{c, CMat};
use opext_core::{ComplexMatrix, ErrorClass, ExtError, Tolerances};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Kvn,
    SaExt,
    Parrott,
    StrongParrott,
    FunctionalExt,
    CstarCheck,
}

impl Kind {
    pub const ALL: [Kind; 6] = [
        Kind::Kvn,
        Kind::SaExt,
        Kind::Parrott,
        Kind::StrongParrott,
        Kind::FunctionalExt,
        Kind::CstarCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Kvn => "kvn",
            Kind::SaExt => "sa-ext",
            Kind::Parrott => "parrott",
            Kind::StrongParrott => "strong-parrott",
            Kind::FunctionalExt => "functional-ext",
            Kind::CstarCheck => "cstar-check",
        }
    }

    pub fn from_name(name: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.name() == name)
    }
}

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

pub fn encode(m: &CMat) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn decode(rows: &JsonMatrix, what: &str) -> Result<ComplexMatrix, ExtError> {
    let r = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != cols) {
        return Err(ExtError::DimensionMismatch(format!(
            "{what}: row {i} has {} entries, row 0 has {cols}",
            row.len()
        )));
    }
    ComplexMatrix::new(CMat::from_fn(r, cols, |i, j| {
        c(rows[i][j][0], rows[i][j][1])
    }))
}

/// Optional overrides; unset fields keep the defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psd: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub herm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eq: Option<f64>,
}

impl ToleranceOverrides {
    /// `self` on top of `base`.
    pub fn over(self, base: ToleranceOverrides) -> ToleranceOverrides {
        ToleranceOverrides {
            rank: self.rank.or(base.rank),
            psd: self.psd.or(base.psd),
            herm: self.herm.or(base.herm),
            eq: self.eq.or(base.eq),
        }
    }

    pub fn resolve(self) -> Result<Tolerances, ExtError> {
        let d = Tolerances::default();
        Tolerances::new(
            self.rank.or(d.rank),
            self.psd.unwrap_or(d.psd),
            self.herm.unwrap_or(d.herm),
            self.eq.unwrap_or(d.eq),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub kind: Kind,
    pub payload: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceOverrides>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KvnPayload {
    pub domain: JsonMatrix,
    pub values: JsonMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaExtPayload {
    pub a: JsonMatrix,
    pub domain: JsonMatrix,
    pub values: JsonMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<JsonMatrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParrottPayload {
    pub a1: JsonMatrix,
    pub a2: JsonMatrix,
    pub domain1: JsonMatrix,
    pub values1: JsonMatrix,
    pub domain2: JsonMatrix,
    pub values2: JsonMatrix,
    pub alpha1: f64,
    pub alpha2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrongParrottPayload {
    pub s1: JsonMatrix,
    pub s2: JsonMatrix,
    pub t1: JsonMatrix,
    pub t2: JsonMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalPayload {
    pub projection: JsonMatrix,
    pub gamma: JsonMatrix,
    pub f: JsonMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CstarPayload {
    pub projection: JsonMatrix,
    pub gamma: JsonMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extension: Option<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

pub fn payload<T: serde::de::DeserializeOwned>(file: &InstanceFile) -> Result<T, Failure> {
    serde_json::from_value(file.payload.clone()).map_err(|e| {
        Failure::invalid(
            "MalformedPayload",
            format!("malformed {} payload: {e}", file.kind.name()),
        )
    })
}

/// Error reported in a result file.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub status: Status,
    pub code: String,
    pub message: String,
}

impl Failure {
    pub fn invalid(code: &str, message: impl Into<String>) -> Self {
        Self {
            status: Status::InvalidInput,
            code: code.to_string(),
            message: message.into(),
        }
    }
}

impl From<ExtError> for Failure {
    fn from(e: ExtError) -> Self {
        Self {
            status: e.class().into(),
            code: e.code().to_string(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    Infeasible,
    InvalidInput,
    NumericalFailure,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Infeasible => 1,
            Status::InvalidInput => 2,
            Status::NumericalFailure => 3,
        }
    }
}

impl From<ErrorClass> for Status {
    fn from(class: ErrorClass) -> Self {
        match class {
            ErrorClass::Infeasible => Status::Infeasible,
            ErrorClass::InvalidInput => Status::InvalidInput,
            ErrorClass::NumericalFailure => Status::NumericalFailure,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorInfo {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceEcho {
    /// `null` means the shape-dependent default `1e-10·max(rows, cols)`.
    pub rank: Option<f64>,
    pub psd: f64,
    pub herm: f64,
    pub eq: f64,
}

impl From<&Tolerances> for ToleranceEcho {
    fn from(t: &Tolerances) -> Self {
        Self {
            rank: t.rank,
            psd: t.psd,
            herm: t.herm,
            eq: t.eq,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub status: Status,
    pub kind: Option<Kind>,
    pub outputs: BTreeMap<String, Value>,
    pub diagnostics: BTreeMap<String, f64>,
    pub error: Option<ErrorInfo>,
    pub seed: Option<u64>,
    pub tolerances: Option<ToleranceEcho>,
}

impl ResultFile {
    pub fn failure(kind: Option<Kind>, failure: &Failure) -> Self {
        Self {
            status: failure.status,
            kind,
            outputs: BTreeMap::new(),
            diagnostics: BTreeMap::new(),
            error: Some(ErrorInfo {
                code: failure.code.clone(),
                message: failure.message.clone(),
            }),
            seed: None,
            tolerances: None,
        }
    }
}

/// Prints every float with 17 significant digits.
struct FixedDigits;

impl serde_json::ser::Formatter for FixedDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Compact JSON with sorted object keys and fixed float formatting, plus a
/// trailing newline.
pub fn to_canonical_string<T: Serialize>(value: &T) -> String {
    // Going through `Value` sorts keys (its map is ordered).
    let value = serde_json::to_value(value).expect("serializable");
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigits);
    value.serialize(&mut ser).expect("in-memory write");
    out.push(b'\n');
    String::from_utf8(out).expect("json is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use opext_core::numkit::real_matrix;

    #[test]
    fn matrices_round_trip() {
        let m = CMat::from_fn(2, 3, |i, j| c(i as f64 + 0.1, -(j as f64) / 3.0));
        let back = decode(&encode(&m), "m").unwrap();
        assert_eq!(back.as_matrix(), &m);
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let rows = vec![vec![[1.0, 0.0]], vec![]];
        assert!(matches!(
            decode(&rows, "m"),
            Err(ExtError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn floats_keep_seventeen_digits() {
        let text = to_canonical_string(&serde_json::json!({"b": 0.1, "a": [1.0, -2.5e-7]}));
        assert_eq!(
            text,
            "{\"a\":[1.0000000000000000e0,-2.4999999999999999e-7],\"b\":1.0000000000000001e-1}\n"
        );
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["b"].as_f64(), Some(0.1));
    }

    #[test]
    fn canonical_text_round_trips_exactly() {
        let m = real_matrix(1, 3, &[1.0 / 3.0, std::f64::consts::PI, 1e-300]);
        let text = to_canonical_string(&encode(&m));
        let back: JsonMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(decode(&back, "m").unwrap().as_matrix(), &m);
    }

    #[test]
    fn kinds_use_kebab_case() {
        for kind in Kind::ALL {
            let text = serde_json::to_string(&kind).unwrap();
            assert_eq!(text, format!("\"{}\"", kind.name()));
        }
    }
}
