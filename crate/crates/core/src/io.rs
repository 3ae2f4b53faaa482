//! Matrix JSON: `{"n": N, "re": [[..]], "im": [[..]]}`, row-major.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::CMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { left: m.nrows(), right: m.ncols() });
        }
        let n = m.nrows();
        let re = (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect();
        let im = (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect();
        Ok(Self { n, re, im })
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let n = self.n;
        let rows_ok = |v: &Vec<Vec<f64>>| v.len() == n && v.iter().all(|r| r.len() == n);
        if !rows_ok(&self.re) || !rows_ok(&self.im) {
            return Err(Error::param("matrix", format!("re/im must be {n}x{n}")));
        }
        Ok(CMatrix::from_fn(n, n, |i, j| Complex64::new(self.re[i][j], self.im[i][j])))
    }
}

pub fn write_matrix_json<W: Write>(m: &CMatrix, mut w: W) -> Result<()> {
    serde_json::to_writer(&mut w, &MatrixJson::from_matrix(m)?)?;
    writeln!(w)?;
    Ok(())
}

pub fn read_matrix_json<R: Read>(r: R) -> Result<CMatrix> {
    let m: MatrixJson = serde_json::from_reader(r)?;
    m.to_matrix()
}
