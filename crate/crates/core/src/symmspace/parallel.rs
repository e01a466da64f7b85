use crate::error::{Error, Result};
use crate::flags::{transversality_margin, Flag};
use crate::linalg::{self, Mat};
use crate::weyl::FaceType;

use super::{cartan_vector, GroupElement, Point};

/// Transversality below which parallel sets are not built.
pub const MIN_TRANSVERSALITY: f64 = 1e-6;

/// The parallel set `P(τ_-, τ_+)` of an antipodal pair: the union of flats
/// through both flags.
#[derive(Debug, Clone)]
pub struct ParallelSetRef {
    flags: (Flag, Flag),
    adapted_basis: Mat,
    margin: f64,
}

impl ParallelSetRef {
    /// `minus` has type `ι(I)`, `plus` type `I`.
    pub fn new(minus: Flag, plus: Flag) -> Result<Self> {
        let margin = transversality_margin(&plus, &minus)?;
        if margin < MIN_TRANSVERSALITY {
            return Err(Error::IllConditioned(format!(
                "transversality margin {margin:.3e}"
            )));
        }
        let face = plus.face().clone();
        let n = face.n();
        let mut basis = Mat::zeros(n, n);
        for b in face.blocks() {
            let v = if b.end == n {
                Mat::identity(n, n)
            } else {
                plus.projector(b.end)
            };
            let w = if b.start == 0 {
                Mat::identity(n, n)
            } else {
                minus.projector(n - b.start)
            };
            let (_, vectors) = linalg::sym_eigen_desc(&(v + w));
            basis
                .columns_mut(b.start, b.len())
                .copy_from(&vectors.columns(0, b.len()));
        }
        if basis.determinant() < 0.0 {
            basis.column_mut(0).neg_mut();
        }
        Ok(Self {
            flags: (minus, plus),
            adapted_basis: basis,
            margin,
        })
    }

    /// Coordinate parallel set of the standard and reversed-standard flags.
    pub fn standard(face: FaceType) -> Self {
        Self::new(Flag::reversed_standard(face.iota()), Flag::standard(face))
            .expect("coordinate flags are antipodal")
    }

    pub fn flags(&self) -> &(Flag, Flag) {
        &self.flags
    }

    pub fn face(&self) -> &FaceType {
        self.flags.1.face()
    }

    pub fn transversality(&self) -> f64 {
        self.margin
    }

    /// Unit columns, block by block: the first `d` columns span the
    /// `d`-dimensional member of `τ_+` and the last `n-d` columns the
    /// `(n-d)`-dimensional member of `τ_-`.
    pub fn adapted_basis(&self) -> &Mat {
        &self.adapted_basis
    }

    pub(crate) fn unimodular_basis(&self) -> Mat {
        let n = self.adapted_basis.nrows();
        &self.adapted_basis / self.adapted_basis.determinant().powf(1.0 / n as f64)
    }

    /// The point `h D hᵀ` of the parallel set for a block-diagonal SPD `D`
    /// (normalized to unit determinant), `h` the unimodular adapted basis.
    pub fn point_from_blocks(&self, d: &Mat) -> Result<Point> {
        let off = self.off_block(d).norm();
        if off > 1e-12 * d.norm() {
            return Err(Error::InvalidInput("matrix is not block diagonal".into()));
        }
        let h = self.unimodular_basis();
        Point::normalized(&h * d * h.transpose())
    }

    /// `h⁻¹ p h⁻ᵀ`: the point in adapted coordinates, where the parallel set
    /// is the set of block-diagonal matrices.
    pub fn adapted_coordinates(&self, p: &Point) -> Result<Mat> {
        let hi = self
            .unimodular_basis()
            .try_inverse()
            .ok_or_else(|| Error::IllConditioned("adapted basis is singular".into()))?;
        Ok(linalg::symmetrize(&(&hi * p.spd() * hi.transpose())))
    }

    pub(crate) fn block_part(&self, m: &Mat) -> Mat {
        let mut out = Mat::zeros(m.nrows(), m.ncols());
        for b in self.face().blocks() {
            out.view_mut((b.start, b.start), (b.len(), b.len()))
                .copy_from(&m.view((b.start, b.start), (b.len(), b.len())));
        }
        out
    }

    fn off_block(&self, m: &Mat) -> Mat {
        m - self.block_part(m)
    }
}

/// Controls for the local descent in [`parallel_set_distance`].
#[derive(Debug, Clone, Copy)]
pub struct DescentOptions {
    pub max_iter: usize,
    pub gradient_tol: f64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            gradient_tol: 1e-13,
        }
    }
}

/// Upper bound and locally refined value of `d(p, P)`.
///
/// The upper bound is the distance to the normalized block-diagonal part of
/// `p` in adapted coordinates; the refinement runs Riemannian gradient steps
/// over block-diagonal SPD matrices from there.
pub fn parallel_set_distance(p: &Point, set: &ParallelSetRef) -> Result<(f64, f64)> {
    parallel_set_distance_with(p, set, DescentOptions::default())
}

pub fn parallel_set_distance_with(
    p: &Point,
    set: &ParallelSetRef,
    opts: DescentOptions,
) -> Result<(f64, f64)> {
    let proj = parallel_set_projection(p, set, opts)?;
    Ok((proj.upper, proj.refined))
}

/// Result of projecting a point onto a parallel set.
#[derive(Debug, Clone)]
pub struct SetProjection {
    pub upper: f64,
    pub refined: f64,
    /// Nearest point found, as a block-diagonal matrix in adapted coordinates.
    pub adapted: Point,
}

impl SetProjection {
    /// The nearest point found, in original coordinates.
    pub fn point(&self, set: &ParallelSetRef) -> Result<Point> {
        set.point_from_blocks(self.adapted.spd())
    }

    /// A group element `h` with `h·o` equal to the nearest point found.
    pub fn representative(&self, set: &ParallelSetRef) -> Result<GroupElement> {
        GroupElement::normalized(set.unimodular_basis() * self.adapted.sqrt()?)
    }
}

/// Projection onto a parallel set by local descent; see
/// [`parallel_set_distance`].
pub fn parallel_set_projection(
    p: &Point,
    set: &ParallelSetRef,
    opts: DescentOptions,
) -> Result<SetProjection> {
    if set.transversality() < MIN_TRANSVERSALITY {
        return Err(Error::IllConditioned(format!(
            "transversality {:.3e}",
            set.transversality()
        )));
    }
    let y = Point::normalized(set.adapted_coordinates(p)?)?;
    let mut d = Point::normalized(set.block_part(y.spd()))?;
    let upper = cartan_vector(&d, &y)?.norm();
    let mut best = upper;
    let n = y.dim();
    for _ in 0..opts.max_iter {
        if best <= opts.gradient_tol {
            break;
        }
        let root = d.sqrt()?;
        let inv_root = d.inv_sqrt()?;
        let log = linalg::spd_log(&(&inv_root * y.spd() * &inv_root))?;
        let mut step = set.block_part(&log);
        let shift = step.trace() / n as f64;
        step -= Mat::identity(n, n) * shift;
        if step.norm() <= opts.gradient_tol {
            break;
        }
        let mut t = 1.0;
        let mut improved = false;
        while t > 1e-6 {
            let candidate = Point::normalized(&root * linalg::sym_exp(&(&step * t)) * &root)?;
            let dist = cartan_vector(&candidate, &y)?.norm();
            if dist < best {
                best = dist;
                d = candidate;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok(SetProjection {
        upper,
        refined: best.min(upper),
        adapted: d,
    })
}
