//! Matrix file format: `{"k":4,"entries":[[[re,im], ...], ...]}`, row-major;
//! tuples are JSON arrays of such records.

use serde::{Deserialize, Serialize};

use super::{c64, CMat};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub k: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl MatrixRecord {
    pub fn from_matrix(m: &CMat) -> Self {
        Self {
            k: m.nrows(),
            entries: (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        if self.entries.len() != self.k || self.entries.iter().any(|row| row.len() != self.k) {
            return Err(Error::ShapeMismatch(format!(
                "matrix record declares k={} but entries are not {0}x{0}",
                self.k
            )));
        }
        Ok(CMat::from_fn(self.k, self.k, |i, j| {
            let [re, im] = self.entries[i][j];
            c64(re, im)
        }))
    }
}

pub fn matrix_to_json(m: &CMat) -> Result<String> {
    Ok(serde_json::to_string(&MatrixRecord::from_matrix(m))?)
}

pub fn matrix_from_json(text: &str) -> Result<CMat> {
    serde_json::from_str::<MatrixRecord>(text)?.to_matrix()
}

pub fn tuple_to_json(ms: &[CMat]) -> Result<String> {
    let records: Vec<MatrixRecord> = ms.iter().map(MatrixRecord::from_matrix).collect();
    Ok(serde_json::to_string(&records)?)
}

pub fn tuple_from_json(text: &str) -> Result<Vec<CMat>> {
    serde_json::from_str::<Vec<MatrixRecord>>(text)?
        .iter()
        .map(MatrixRecord::to_matrix)
        .collect()
}
