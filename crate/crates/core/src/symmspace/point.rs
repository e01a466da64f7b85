use crate::error::{Error, Result};
use crate::linalg::{self, Mat};

use super::GroupElement;

/// A point of `X = SL(n,R)/SO(n)`, stored as a unit-determinant SPD matrix.
/// The base point `o` is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    spd: Mat,
}

impl Point {
    pub fn new(spd: Mat) -> Result<Self> {
        if !spd.is_square() {
            return Err(Error::DimensionMismatch {
                expected: spd.nrows(),
                found: spd.ncols(),
            });
        }
        let asym = (&spd - spd.transpose()).amax();
        if asym > 1e-8 * spd.amax().max(1.0) {
            return Err(Error::NotSpd(format!("asymmetry {asym:.3e}")));
        }
        let (values, _) = linalg::sym_eigen_desc(&spd);
        let bottom = *values.last().expect("non-empty");
        if !(bottom > 0.0) {
            return Err(Error::NotSpd(format!("smallest eigenvalue {bottom:.3e}")));
        }
        let log_det: f64 = values.iter().map(|v| v.ln()).sum();
        let slack = 1e-8 + f64::EPSILON * values[0] / bottom;
        if log_det.abs() > slack {
            return Err(Error::NotUnimodular(log_det.exp()));
        }
        Ok(Self {
            spd: linalg::symmetrize(&spd),
        })
    }

    pub(crate) fn from_spd_unchecked(spd: Mat) -> Self {
        Self { spd }
    }

    /// Rescales an SPD matrix to determinant one.
    pub fn normalized(spd: Mat) -> Result<Self> {
        let n = spd.nrows();
        let (values, _) = linalg::sym_eigen_desc(&spd);
        if !(values[n - 1] > 0.0) {
            return Err(Error::NotSpd(format!(
                "smallest eigenvalue {:.3e}",
                values[n - 1]
            )));
        }
        let log_det: f64 = values.iter().map(|v| v.ln()).sum();
        Ok(Self {
            spd: linalg::symmetrize(&spd) * (-log_det / n as f64).exp(),
        })
    }

    pub fn origin(n: usize) -> Self {
        Self {
            spd: Mat::identity(n, n),
        }
    }

    /// `diag(exp(2a))`, the point at vector-valued distance `a` from `o`
    /// along the standard flat (for sorted `a`).
    pub fn from_log_diagonal(a: &[f64]) -> Result<Self> {
        let doubled: Vec<f64> = a.iter().map(|x| 2.0 * x).collect();
        Self::new(linalg::diag_exp(&doubled))
    }

    pub fn spd(&self) -> &Mat {
        &self.spd
    }

    pub fn dim(&self) -> usize {
        self.spd.nrows()
    }

    pub fn sqrt(&self) -> Result<Mat> {
        linalg::spd_sqrt(&self.spd)
    }

    pub fn inv_sqrt(&self) -> Result<Mat> {
        linalg::spd_inv_sqrt(&self.spd)
    }

    /// Canonical coset representative `x^{1/2}`, with `x^{1/2}·o = x`.
    pub fn representative(&self) -> Result<GroupElement> {
        GroupElement::normalized(self.sqrt()?)
    }
}
