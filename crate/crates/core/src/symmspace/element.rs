use std::ops::Mul;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::weyl::{CartanVector, CHAMBER_TOL};

use super::Point;

/// Tolerance on `|det - 1|` for group elements.
pub const DET_TOL: f64 = 1e-8;

/// A matrix stored as `exp(log_scale) * m` with `max |m_ij| = 1`.
#[derive(Debug, Clone)]
struct Scaled {
    m: Mat,
    log_scale: f64,
}

impl Scaled {
    fn new(m: Mat) -> Self {
        let mut s = Scaled { m, log_scale: 0.0 };
        s.renormalize();
        s
    }

    fn renormalize(&mut self) {
        let peak = self.m.amax();
        if peak > 0.0 && peak.is_finite() {
            self.m /= peak;
            self.log_scale += peak.ln();
        }
    }

    fn mul(&self, other: &Scaled) -> Scaled {
        let mut out = Scaled {
            m: &self.m * &other.m,
            log_scale: self.log_scale + other.log_scale,
        };
        out.renormalize();
        out
    }

    fn log_top_singular_value(&self) -> f64 {
        linalg::op_norm(&self.m).ln() + self.log_scale
    }

    fn explicit(&self) -> Mat {
        &self.m * self.log_scale.exp()
    }
}

/// An element of `SL(n,R)`.
///
/// Besides the matrix and its inverse, the element keeps every exterior power
/// `Λ^k g`, `1 ≤ k < n`, each with its own logarithmic scale. Products update
/// all of them, so the top singular values of the exterior powers (and with
/// them the singular values and dominant subspaces of `g`) stay accurate for
/// long products where `g` itself is numerically rank deficient.
#[derive(Debug, Clone)]
pub struct GroupElement {
    n: usize,
    forward: Vec<Scaled>,
    backward: Vec<Scaled>,
}

impl GroupElement {
    /// Validates `det = 1` within [`DET_TOL`].
    pub fn new(matrix: Mat) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        let det = matrix.determinant();
        if (det - 1.0).abs() > DET_TOL {
            return Err(Error::NotUnimodular(det));
        }
        Self::from_unimodular(matrix)
    }

    /// Rescales a matrix with positive determinant to determinant one.
    pub fn normalized(matrix: Mat) -> Result<Self> {
        let n = matrix.nrows();
        let det = matrix.determinant();
        if !(det > 0.0) {
            return Err(Error::NotUnimodular(det));
        }
        Self::from_unimodular(matrix / det.powf(1.0 / n as f64))
    }

    pub fn from_row_slice(n: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: rows.len(),
            });
        }
        Self::new(Mat::from_row_slice(n, n, rows))
    }

    fn from_unimodular(matrix: Mat) -> Result<Self> {
        let inverse = matrix
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::IllConditioned("matrix is singular".into()))?;
        Ok(Self::from_pair(matrix, inverse))
    }

    fn from_pair(matrix: Mat, inverse: Mat) -> Self {
        let n = matrix.nrows();
        let top = n.max(2) - 1;
        let forward = (1..=top)
            .map(|k| Scaled::new(linalg::compound(&matrix, k)))
            .collect();
        let backward = (1..=top)
            .map(|k| Scaled::new(linalg::compound(&inverse, k)))
            .collect();
        GroupElement {
            n,
            forward,
            backward,
        }
    }

    pub fn identity(n: usize) -> Self {
        let id = Mat::identity(n, n);
        Self::from_pair(id.clone(), id)
    }

    /// `diag(exp(a_1), …, exp(a_n))` for trace-zero `a`.
    pub fn diag_exp(a: &[f64]) -> Result<Self> {
        let sum: f64 = a.iter().sum();
        if sum.abs() > DET_TOL {
            return Err(Error::NotUnimodular(sum.exp()));
        }
        let neg: Vec<f64> = a.iter().map(|x| -x).collect();
        Ok(Self::from_pair(linalg::diag_exp(a), linalg::diag_exp(&neg)))
    }

    /// Orthogonal matrix with determinant one, inverted by transposition.
    pub fn rotation(k: Mat) -> Result<Self> {
        let err = (k.transpose() * &k - Mat::identity(k.nrows(), k.nrows())).amax();
        if err > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "not orthogonal (error {err:.3e})"
            )));
        }
        let det = k.determinant();
        if (det - 1.0).abs() > DET_TOL {
            return Err(Error::NotUnimodular(det));
        }
        let kt = k.transpose();
        Ok(Self::from_pair(k, kt))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// The matrix of `g`. For long products this may be dominated by
    /// rounding in its small singular directions; prefer the structured
    /// accessors below.
    pub fn matrix(&self) -> Mat {
        self.forward[0].explicit()
    }

    pub fn inverse_matrix(&self) -> Mat {
        self.backward[0].explicit()
    }

    /// Normalized `Λ^k g` (unit max entry) and its log scale.
    pub fn exterior(&self, k: usize) -> (&Mat, f64) {
        let s = &self.forward[k - 1];
        (&s.m, s.log_scale)
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            n: self.n,
            forward: self.backward.clone(),
            backward: self.forward.clone(),
        }
    }

    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        assert_eq!(self.n, other.n, "dimension mismatch in product");
        let forward = self
            .forward
            .iter()
            .zip(&other.forward)
            .map(|(a, b)| a.mul(b))
            .collect();
        let backward = other
            .backward
            .iter()
            .zip(&self.backward)
            .map(|(b, a)| b.mul(a))
            .collect();
        GroupElement {
            n: self.n,
            forward,
            backward,
        }
    }

    pub fn pow(&self, exponent: u32) -> GroupElement {
        let mut result = GroupElement::identity(self.n);
        let mut base = self.clone();
        let mut e = exponent;
        while e > 0 {
            if e & 1 == 1 {
                result = result.compose(&base);
            }
            base = base.compose(&base);
            e >>= 1;
        }
        result
    }

    /// Conjugate `q g q⁻¹`.
    pub fn conjugate_by(&self, q: &GroupElement) -> GroupElement {
        q.compose(self).compose(&q.inverse())
    }

    /// Logarithms of the singular values, descending.
    ///
    /// `log σ_k` is recovered as the difference of the log operator norms of
    /// consecutive exterior powers; the last one closes the trace.
    pub fn log_singular_values(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = Vec::with_capacity(n);
        let mut prev = 0.0;
        for k in 1..n {
            let cur = self.forward[k - 1].log_top_singular_value();
            out.push(cur - prev);
            prev = cur;
        }
        out.push(-prev);
        // small violations of the ordering are rounding only
        out.sort_by(|a, b| b.total_cmp(a));
        let mean = out.iter().sum::<f64>() / n as f64;
        out.iter_mut().for_each(|x| *x -= mean);
        out
    }

    /// `d_Δ(o, g·o)`.
    pub fn cartan(&self) -> CartanVector {
        CartanVector::from_sorted(self.log_singular_values())
    }

    /// Dominant left and right singular subspaces of dimension `d`, i.e. the
    /// spans of the leading `d` left and right singular vectors.
    pub fn top_subspaces(&self, d: usize) -> Result<(Mat, Mat)> {
        let logs = self.log_singular_values();
        let gap = logs[d - 1] - logs[d];
        if gap < CHAMBER_TOL {
            return Err(Error::VanishingGap { index: d, gap });
        }
        let (u, _, v) = linalg::svd_desc(&self.forward[d - 1].m);
        let left = linalg::subspace_from_wedge(&u.column(0).into_owned(), self.n, d)?;
        let right = linalg::subspace_from_wedge(&v.column(0).into_owned(), self.n, d)?;
        Ok((left, right))
    }

    /// Image of a `d`-dimensional subspace (orthonormal basis), computed
    /// through `Λ^d g` so that it stays accurate for long products.
    pub fn map_subspace(&self, basis: &Mat) -> Mat {
        let d = basis.ncols();
        if d == 0 || d == self.n {
            return basis.clone();
        }
        let w = &self.forward[d - 1].m * linalg::wedge_columns(basis);
        linalg::subspace_from_wedge(&w, self.n, d)
            .unwrap_or_else(|_| linalg::orthonormalize(&(self.matrix() * basis)))
    }

    /// `g·o` as an explicit SPD matrix.
    pub fn orbit_point(&self) -> Point {
        let m = self.matrix();
        Point::from_spd_unchecked(linalg::symmetrize(&(&m * m.transpose())))
    }

    /// `g·p = g p gᵀ`.
    pub fn act(&self, p: &Point) -> Point {
        let m = self.matrix();
        Point::from_spd_unchecked(linalg::symmetrize(&(&m * p.spd() * m.transpose())))
    }
}

impl Mul for &GroupElement {
    type Output = GroupElement;

    fn mul(self, rhs: &GroupElement) -> GroupElement {
        self.compose(rhs)
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;

    fn mul(self, rhs: GroupElement) -> GroupElement {
        self.compose(&rhs)
    }
}
