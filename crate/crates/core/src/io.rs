//! JSON documents for families, verification reports and complementary
//! states. Complex numbers are `[re, im]` pairs; amplitudes are listed in flat
//! row-major order (`i * d' + j`). Floats use the shortest representation that
//! reads back to the same bits, so a save/load cycle is lossless and repeated
//! runs write identical bytes.

use std::fs;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constructions::{FamilyError, FamilyParams, UebkFamily};
use crate::mixed::{DensityMatrix, RhoPerpCertificate};
use crate::tensor::BipartiteVector;
use crate::verification::VerificationReport;

pub const FAMILY_SCHEMA: &str = "uebk-family/1";
pub const REPORT_SCHEMA: &str = "uebk-report/1";
pub const STATE_SCHEMA: &str = "uebk-rho-perp/1";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: parse error: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("unsupported schema version {found:?}, expected {expected:?}")]
    Schema {
        found: String,
        expected: &'static str,
    },
    #[error("invalid family: {0}")]
    Family(#[from] FamilyError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorRecord {
    pub label: Vec<usize>,
    pub amps: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyFile {
    pub schema_version: String,
    pub params: FamilyParams,
    pub vectors: Vec<VectorRecord>,
}

impl FamilyFile {
    pub fn from_family(family: &UebkFamily) -> Self {
        Self {
            schema_version: FAMILY_SCHEMA.to_string(),
            params: family.params().clone(),
            vectors: family
                .vectors()
                .iter()
                .zip(family.labels())
                .map(|(v, label)| VectorRecord {
                    label: label.clone(),
                    amps: v.amps().iter().map(|a| [a.re, a.im]).collect(),
                })
                .collect(),
        }
    }

    pub fn into_family(self) -> Result<UebkFamily, IoError> {
        check_schema(&self.schema_version, FAMILY_SCHEMA)?;
        self.params.validate().map_err(FamilyError::from)?;
        let (d, dprime) = (self.params.d(), self.params.dprime());
        let mut vectors = Vec::with_capacity(self.vectors.len());
        let mut labels = Vec::with_capacity(self.vectors.len());
        for record in self.vectors {
            let amps = record
                .amps
                .iter()
                .map(|&[re, im]| C64::new(re, im))
                .collect();
            vectors.push(BipartiteVector::new(d, dprime, amps).map_err(FamilyError::from)?);
            labels.push(record.label);
        }
        Ok(UebkFamily::from_parts(self.params, vectors, labels)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema_version: String,
    pub report: VerificationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub schema_version: String,
    pub origin: Option<FamilyParams>,
    pub dim: usize,
    /// Row-major.
    pub entries: Vec<Vec<[f64; 2]>>,
    pub certificate: RhoPerpCertificate,
}

fn check_schema(found: &str, expected: &'static str) -> Result<(), IoError> {
    if found != expected {
        return Err(IoError::Schema {
            found: found.to_string(),
            expected,
        });
    }
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

fn write(path: &Path, contents: &str) -> Result<(), IoError> {
    fs::write(path, contents).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn save_family(family: &UebkFamily, path: &Path) -> Result<(), IoError> {
    write(path, &to_json(&FamilyFile::from_family(family)))
}

pub fn parse_family(text: &str, origin: &str) -> Result<UebkFamily, IoError> {
    let file: FamilyFile = serde_json::from_str(text).map_err(|source| IoError::Parse {
        path: origin.to_string(),
        source,
    })?;
    file.into_family()
}

pub fn load_family(path: &Path) -> Result<UebkFamily, IoError> {
    parse_family(&read(path)?, &path.display().to_string())
}

pub fn report_json(report: &VerificationReport) -> String {
    to_json(&ReportFile {
        schema_version: REPORT_SCHEMA.to_string(),
        report: report.clone(),
    })
}

pub fn save_report(report: &VerificationReport, path: &Path) -> Result<(), IoError> {
    write(path, &report_json(report))
}

pub fn load_report(path: &Path) -> Result<VerificationReport, IoError> {
    let file: ReportFile = serde_json::from_str(&read(path)?).map_err(|source| IoError::Parse {
        path: path.display().to_string(),
        source,
    })?;
    check_schema(&file.schema_version, REPORT_SCHEMA)?;
    Ok(file.report)
}

pub fn save_state(
    rho: &DensityMatrix,
    certificate: &RhoPerpCertificate,
    path: &Path,
) -> Result<(), IoError> {
    let m = rho.entries();
    let file = StateFile {
        schema_version: STATE_SCHEMA.to_string(),
        origin: rho.origin().cloned(),
        dim: rho.dim(),
        entries: (0..m.nrows())
            .map(|r| {
                (0..m.ncols())
                    .map(|c| [m[(r, c)].re, m[(r, c)].im])
                    .collect()
            })
            .collect(),
        certificate: certificate.clone(),
    };
    write(path, &to_json(&file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{construct_prop1, FamilyId, ParamError};
    use crate::tensor::{gram, identity_deviation};

    #[test]
    fn round_trip_is_exact() {
        let f = construct_prop1(3, 3, 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.json");
        save_family(&f, &path).unwrap();
        let g = load_family(&path).unwrap();
        assert_eq!(f, g);
        assert!(identity_deviation(&gram(g.vectors()).unwrap()) < 1e-12);
    }

    #[test]
    fn truncated_file_is_a_parse_error() {
        let text = to_json(&FamilyFile::from_family(&construct_prop1(3, 3, 2).unwrap()));
        let err = parse_family(&text[..text.len() / 2], "f.json").unwrap_err();
        assert!(matches!(err, IoError::Parse { .. }));
        assert!(err.to_string().contains("EOF"), "{err}");
    }

    #[test]
    fn missing_field_is_named() {
        let mut doc: serde_json::Value =
            serde_json::to_value(FamilyFile::from_family(&construct_prop1(3, 3, 2).unwrap()))
                .unwrap();
        doc.as_object_mut().unwrap().remove("vectors");
        let err = parse_family(&doc.to_string(), "f.json").unwrap_err();
        assert!(err.to_string().contains("missing field `vectors`"), "{err}");
    }

    #[test]
    fn rejects_bad_params_on_load() {
        let mut doc: serde_json::Value =
            serde_json::to_value(FamilyFile::from_family(&construct_prop1(3, 3, 2).unwrap()))
                .unwrap();
        doc["params"]["k"] = serde_json::json!(3);
        let err = parse_family(&doc.to_string(), "f.json").unwrap_err();
        assert!(matches!(
            err,
            IoError::Family(FamilyError::Params(ParamError::DimensionOrder { k: 3, .. }))
        ));
    }

    #[test]
    fn rejects_unknown_schema() {
        let mut file = FamilyFile::from_family(&construct_prop1(3, 3, 2).unwrap());
        file.schema_version = "uebk-family/0".into();
        assert!(matches!(
            parse_family(&to_json(&file), "f.json"),
            Err(IoError::Schema { .. })
        ));
    }

    #[test]
    fn rejects_wrong_amplitude_count() {
        let mut file = FamilyFile::from_family(&construct_prop1(3, 3, 2).unwrap());
        file.vectors[1].amps.pop();
        assert!(matches!(
            parse_family(&to_json(&file), "f.json"),
            Err(IoError::Family(FamilyError::Tensor(_)))
        ));
    }

    #[test]
    fn params_serialize_with_named_fields() {
        let file = FamilyFile::from_family(&construct_prop1(3, 3, 2).unwrap());
        let doc = serde_json::to_value(&file).unwrap();
        assert_eq!(doc["params"]["family"], serde_json::json!("PROP1"));
        assert_eq!(doc["params"]["dprime"], serde_json::json!(3));
        assert_eq!(doc["vectors"][0]["label"], serde_json::json!([0, 0, 1]));
        assert_eq!(file.params.family(), FamilyId::Prop1);
    }
}
