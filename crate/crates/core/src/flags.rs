//! Partial flag manifolds of `R^n`: representation, metric, group action,
//! transversality, attracting flags and expansion factors.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::symmspace::{cartan_vector, GroupElement, Point};
use crate::weyl::{face_boundary_distance, FaceType, CHAMBER_TOL};

const ORTHO_TOL: f64 = 1e-9;

/// A partial flag of type `I`, stored as an orthogonal frame whose leading
/// `d` columns span the `d`-dimensional member for every `d ∈ I`.
#[derive(Debug, Clone)]
pub struct Flag {
    face: FaceType,
    frame: Mat,
}

impl Flag {
    pub fn new(face: FaceType, frame: Mat) -> Result<Self> {
        let n = face.n();
        if frame.nrows() != n || frame.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: frame.nrows(),
            });
        }
        let err = (frame.transpose() * &frame - Mat::identity(n, n)).amax();
        if err > ORTHO_TOL {
            return Err(Error::InvalidInput(format!(
                "frame is not orthogonal (error {err:.3e})"
            )));
        }
        Ok(Self { face, frame })
    }

    /// Flag spanned by the leading columns of an invertible matrix.
    pub fn from_basis(face: FaceType, basis: &Mat) -> Result<Self> {
        let n = face.n();
        if basis.nrows() != n || basis.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: basis.nrows(),
            });
        }
        let subspaces: Vec<Mat> = face
            .dims()
            .iter()
            .map(|&d| linalg::orthonormalize(&basis.columns(0, d).into_owned()))
            .collect();
        Ok(Self::from_nested(face, &subspaces))
    }

    /// Flag from orthonormal bases of its members, by increasing dimension.
    pub fn from_subspaces(face: FaceType, subspaces: &[Mat]) -> Result<Self> {
        let dims: Vec<usize> = subspaces.iter().map(|s| s.ncols()).collect();
        if dims != face.dims() {
            return Err(Error::TypeMismatch(format!(
                "subspace dimensions {dims:?} for type {face}"
            )));
        }
        Ok(Self::from_nested(face, subspaces))
    }

    fn from_nested(face: FaceType, subspaces: &[Mat]) -> Self {
        let frame = linalg::nested_frame(face.n(), subspaces);
        Self { face, frame }
    }

    /// The coordinate flag `span(e_1) ⊂ span(e_1, e_2) ⊂ …`.
    pub fn standard(face: FaceType) -> Self {
        let n = face.n();
        Self {
            face,
            frame: Mat::identity(n, n),
        }
    }

    /// The coordinate flag built from `e_n, e_{n-1}, …`, antipodal to
    /// [`Flag::standard`] of the opposite type.
    pub fn reversed_standard(face: FaceType) -> Self {
        let n = face.n();
        let frame = Mat::from_fn(n, n, |r, c| if r + c == n - 1 { 1.0 } else { 0.0 });
        Self { face, frame }
    }

    pub fn face(&self) -> &FaceType {
        &self.face
    }

    pub fn frame(&self) -> &Mat {
        &self.frame
    }

    pub fn dim(&self) -> usize {
        self.face.n()
    }

    /// Orthonormal basis of the `d`-dimensional member.
    pub fn subspace(&self, d: usize) -> Mat {
        self.frame.columns(0, d).into_owned()
    }

    pub fn projector(&self, d: usize) -> Mat {
        linalg::projector(&self.subspace(d))
    }

    /// The line of the flag, when the type has dimension one.
    pub fn line(&self) -> Option<Vec<f64>> {
        self.face
            .keeps(1)
            .then(|| self.frame.column(0).iter().copied().collect())
    }

    /// The flag of orthogonal complements, of type `ι(I)`.
    pub fn orthogonal_complement(&self) -> Flag {
        let n = self.dim();
        let frame = Mat::from_fn(n, n, |r, c| self.frame[(r, n - 1 - c)]);
        Flag {
            face: self.face.iota(),
            frame,
        }
    }

    /// The same subspaces regarded as a flag of a smaller type `J ⊆ I`.
    pub fn restrict(&self, face: &FaceType) -> Result<Flag> {
        if !face.is_contained_in(&self.face) {
            return Err(Error::TypeMismatch(format!(
                "{face} is not contained in {}",
                self.face
            )));
        }
        Ok(Flag {
            face: face.clone(),
            frame: self.frame.clone(),
        })
    }
}

fn require_same_type(a: &Flag, b: &Flag) -> Result<()> {
    if a.face != b.face {
        return Err(Error::TypeMismatch(format!("{} vs {}", a.face, b.face)));
    }
    Ok(())
}

/// `g·F`, computed on exterior powers so that long products act accurately.
pub fn act_on_flag(g: &GroupElement, flag: &Flag) -> Flag {
    let subspaces: Vec<Mat> = flag
        .face
        .dims()
        .iter()
        .map(|&d| g.map_subspace(&flag.subspace(d)))
        .collect();
    Flag::from_nested(flag.face.clone(), &subspaces)
}

/// Largest operator-norm gap between the projectors onto matching members.
pub fn flag_distance(a: &Flag, b: &Flag) -> Result<f64> {
    require_same_type(a, b)?;
    Ok(a.face
        .dims()
        .iter()
        .map(|&d| linalg::op_norm(&(a.projector(d) - b.projector(d))))
        .fold(0.0, f64::max))
}

/// Smallest singular value of `[V_d | W_{n-d}]` over the members of `f`,
/// where `g` has the opposite type. Positive iff the flags are antipodal.
pub fn transversality_margin(f: &Flag, g: &Flag) -> Result<f64> {
    if g.face != f.face.iota() {
        return Err(Error::TypeMismatch(format!(
            "{} is not opposite to {}",
            g.face, f.face
        )));
    }
    let n = f.dim();
    Ok(f.face
        .dims()
        .iter()
        .map(|&d| linalg::min_singular_value(&linalg::hstack(&f.subspace(d), &g.subspace(n - d))))
        .fold(f64::INFINITY, f64::min))
}

/// Attracting and repelling flags of a group element.
#[derive(Debug, Clone)]
pub struct AttractiveFlags {
    /// Leading left singular subspaces, type `I`.
    pub plus: Flag,
    /// Complements of the leading right singular subspaces, type `ι(I)`.
    pub minus: Flag,
    /// Log singular value gaps at the kept walls.
    pub gaps: Vec<f64>,
}

pub fn attractive_flag(g: &GroupElement, face: &FaceType) -> Result<AttractiveFlags> {
    let n = face.n();
    if g.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: g.dim(),
        });
    }
    let logs = g.log_singular_values();
    let mut gaps = Vec::with_capacity(face.dims().len());
    for &d in face.dims() {
        let gap = logs[d - 1] - logs[d];
        if gap < CHAMBER_TOL {
            return Err(Error::VanishingGap { index: d, gap });
        }
        gaps.push(gap);
    }
    let mut left = Vec::new();
    let mut right_perp = Vec::new();
    for &d in face.dims() {
        let (u, v) = g.top_subspaces(d)?;
        left.push(u);
        right_perp.push(linalg::orthonormal_complement(&v));
    }
    right_perp.reverse();
    Ok(AttractiveFlags {
        plus: Flag::from_nested(face.clone(), &left),
        minus: Flag::from_nested(face.iota(), &right_perp),
        gaps,
    })
}

/// Index pairs `(row, col)` of block strictly-lower entries: coordinates on
/// the tangent space of the flag manifold in an adapted frame.
pub fn tangent_coordinates(face: &FaceType) -> Vec<(usize, usize)> {
    let blocks = face.blocks();
    let mut block_of = vec![0; face.n()];
    for (j, b) in blocks.iter().enumerate() {
        for i in b.clone() {
            block_of[i] = j;
        }
    }
    let n = face.n();
    let mut out = Vec::new();
    for c in 0..n {
        for r in 0..n {
            if block_of[r] > block_of[c] {
                out.push((r, c));
            }
        }
    }
    out
}

/// Matrix of the differential `d(g)_F` in orthonormal adapted coordinates.
///
/// With `g Q = Q' R` (QR), a tangent vector `L` at `F` (block strictly-lower
/// in the frame `Q`) maps to the block strictly-lower part of `R L R⁻¹` at
/// `g F` (frame `Q'`). The Frobenius norm on `L` is invariant under the
/// orthogonal group, so this is an isometry-invariant Riemannian metric.
pub fn differential_matrix(g: &Mat, flag: &Flag) -> Mat {
    let r = (g * &flag.frame).qr().r();
    let n = r.nrows();
    let r_inv = r
        .solve_upper_triangular(&Mat::identity(n, n))
        .expect("invertible triangular factor");
    differential_from_factors(&r, &r_inv, &flag.face)
}

/// Differential of `g` from `from` to `to`, assuming `g·from = to`, in the
/// stored frames of both flags. `Q_toᵀ g Q_from` is block upper triangular
/// and plays the role of `R` above; its inverse is read off `g⁻¹` instead of
/// inverting it. The block-lower parts of both vanish exactly and are
/// cleared, since for badly conditioned `g` they hold only rounding noise
/// of the size of the largest entries.
pub fn differential_between(g: &GroupElement, from: &Flag, to: &Flag) -> Mat {
    let mut r = to.frame.transpose() * g.matrix() * &from.frame;
    let mut r_inv = from.frame.transpose() * g.inverse_matrix() * &to.frame;
    for &(a, b) in &tangent_coordinates(&from.face) {
        r[(a, b)] = 0.0;
        r_inv[(a, b)] = 0.0;
    }
    differential_from_factors(&r, &r_inv, &from.face)
}

fn differential_from_factors(r: &Mat, r_inv: &Mat, face: &FaceType) -> Mat {
    let coords = tangent_coordinates(face);
    let m = coords.len();
    let mut out = Mat::zeros(m, m);
    for (col, &(i, j)) in coords.iter().enumerate() {
        // R E_ij R⁻¹ = (column i of R)(row j of R⁻¹)
        for (row, &(a, b)) in coords.iter().enumerate() {
            out[(row, col)] = r[(a, i)] * r_inv[(j, b)];
        }
    }
    out
}

/// Expansion factor `ε(g, F) = ‖(dg_F)⁻¹‖⁻¹`.
pub fn expansion_factor(g: &GroupElement, flag: &Flag) -> f64 {
    if tangent_coordinates(&flag.face).is_empty() {
        return 1.0;
    }
    linalg::min_singular_value(&differential_matrix(&g.matrix(), flag))
}

/// One observation for [`expansion_cone_correlate`].
#[derive(Debug, Clone)]
pub struct ExpansionSample {
    pub g: GroupElement,
    pub flag: Flag,
    pub base: Point,
}

/// Paired observations of `log ε(g⁻¹, τ)` and the cone-boundary margin of
/// `g·x`, with a fitted affine lower envelope `slope·margin - offset`.
#[derive(Debug, Clone)]
pub struct ExpansionCorrelation {
    pub log_expansion: Vec<f64>,
    pub margins: Vec<f64>,
    pub slope: f64,
    pub offset: f64,
}

/// Correlates infinitesimal expansion at `τ` with how deep `g·x` sits inside
/// `V(x, st(τ))`. Samples whose orbit point is not in the open cone get margin
/// zero.
pub fn expansion_cone_correlate(samples: &[ExpansionSample]) -> Result<ExpansionCorrelation> {
    let mut log_expansion = Vec::with_capacity(samples.len());
    let mut margins = Vec::with_capacity(samples.len());
    for s in samples {
        let gx = s.g.act(&s.base);
        let delta = cartan_vector(&s.base, &gx)?;
        let face = s.flag.face();
        let inside = crate::symmspace::relative_flag(&s.base, &gx, face)
            .ok()
            .and_then(|(rf, _)| flag_distance(&rf, &s.flag).ok())
            .is_some_and(|d| d < 1e-6);
        margins.push(if inside {
            face_boundary_distance(&delta, face)
        } else {
            0.0
        });
        log_expansion.push(expansion_factor(&s.g.inverse(), &s.flag).ln());
    }
    let (slope, _) = least_squares(&margins, &log_expansion);
    let offset = margins
        .iter()
        .zip(&log_expansion)
        .map(|(m, e)| slope * m - e)
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0);
    Ok(ExpansionCorrelation {
        log_expansion,
        margins,
        slope,
        offset,
    })
}

/// Ordinary least-squares line `y ≈ slope·x + intercept`.
pub fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    if x.is_empty() {
        return (0.0, 0.0);
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}
