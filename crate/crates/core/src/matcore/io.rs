//! JSON matrix file format: `{"rows": n, "cols": m, "data": [[re, im], ...]}`
//! with entries in row-major order.

use serde::{Deserialize, Serialize};

use super::{c64, ComplexMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl From<&ComplexMatrix> for MatrixFile {
    fn from(m: &ComplexMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: m.as_slice().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<MatrixFile> for ComplexMatrix {
    type Error = Error;

    fn try_from(f: MatrixFile) -> Result<Self> {
        let data = f.data.iter().map(|&[re, im]| c64(re, im)).collect();
        ComplexMatrix::new(f.rows, f.cols, data)
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixFile::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let file = MatrixFile::deserialize(deserializer)?;
        ComplexMatrix::try_from(file).map_err(serde::de::Error::custom)
    }
}

impl ComplexMatrix {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: MatrixFile = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        file.try_into()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&MatrixFile::from(self)).expect("matrix serialization cannot fail")
    }
}
