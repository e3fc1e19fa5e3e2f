//! JSON encodings for complex matrices and vectors.
//!
//! A complex `s×s` matrix is encoded as `{"dim": s, "re": [[...]], "im":
//! [[...]]}` with row-major nested arrays; a complex vector as `{"re": [...],
//! "im": [...]}`. Every module of the crate reuses these encodings.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};

/// Wire form of a square complex matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let s = m.nrows();
        let grab = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..s)
                .map(|i| (0..s).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        MatrixJson {
            dim: s,
            re: grab(|c| c.re),
            im: grab(|c| c.im),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let s = self.dim;
        if self.re.len() != s || self.im.len() != s {
            return Err(Error::InvalidInput(format!(
                "matrix encoding has {} re-rows and {} im-rows, expected dim {}",
                self.re.len(),
                self.im.len(),
                s
            )));
        }
        let mut m = CMatrix::zeros(s, s);
        for i in 0..s {
            if self.re[i].len() != s || self.im[i].len() != s {
                return Err(Error::InvalidInput(format!(
                    "matrix encoding row {} has wrong length (expected {})",
                    i, s
                )));
            }
            for j in 0..s {
                m[(i, j)] = Complex64::new(self.re[i][j], self.im[i][j]);
            }
        }
        Ok(m)
    }
}

/// Wire form of a complex vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VectorJson {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl VectorJson {
    pub fn from_vector(v: &CVector) -> Self {
        VectorJson {
            re: v.iter().map(|c| c.re).collect(),
            im: v.iter().map(|c| c.im).collect(),
        }
    }

    pub fn to_vector(&self) -> Result<CVector> {
        if self.re.len() != self.im.len() {
            return Err(Error::InvalidInput(format!(
                "vector encoding has {} re-entries but {} im-entries",
                self.re.len(),
                self.im.len()
            )));
        }
        Ok(CVector::from_iterator(
            self.re.len(),
            self.re
                .iter()
                .zip(&self.im)
                .map(|(&r, &i)| Complex64::new(r, i)),
        ))
    }
}

/// `#[serde(with = "codec::cmatrix")]` adapter for raw complex matrices.
pub mod cmatrix {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &CMatrix, ser: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_matrix(m).serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> std::result::Result<CMatrix, D::Error> {
        let j = MatrixJson::deserialize(de)?;
        j.to_matrix().map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "codec::cvector")]` adapter for complex vectors.
pub mod cvector {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &CVector, ser: S) -> std::result::Result<S::Ok, S::Error> {
        VectorJson::from_vector(v).serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> std::result::Result<CVector, D::Error> {
        let j = VectorJson::deserialize(de)?;
        j.to_vector().map_err(serde::de::Error::custom)
    }
}
