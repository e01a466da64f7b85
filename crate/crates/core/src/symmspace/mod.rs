//! Metric geometry of `X = SL(n,R)/SO(n)`: vector-valued distance, relative
//! flags, Weyl cones, diamonds, parallel sets and Finsler paths.

pub mod centred;
mod element;
mod finsler;
mod parallel;
mod point;

pub use element::{GroupElement, DET_TOL};
pub use finsler::{delta_projection, finsler_verify};
pub use parallel::{
    parallel_set_distance, parallel_set_distance_with, parallel_set_projection, DescentOptions,
    ParallelSetRef, SetProjection,
};
pub use point::Point;

use crate::error::{Error, Result};
use crate::flags::{act_on_flag, flag_distance, Flag};
use crate::linalg::{self, Mat};
use crate::weyl::{
    face_boundary_distance, iota, project_to_face_sector, star_violation, theta_membership,
    CartanVector, FaceType, ModelVector, ThetaSpec, CHAMBER_TOL,
};

fn check_dims(x: &Point, y: &Point) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    Ok(())
}

/// Vector-valued distance `d_Δ(x, y)`: half the logarithms of the eigenvalues
/// of `x⁻¹y`, sorted descending. Its norm is the Riemannian distance.
pub fn cartan_vector(x: &Point, y: &Point) -> Result<CartanVector> {
    check_dims(x, y)?;
    let s = x.inv_sqrt()?;
    let m = linalg::symmetrize(&(&s * y.spd() * &s));
    let (values, _) = linalg::sym_eigen_desc(&m);
    let n = values.len();
    if !(values[n - 1] > 0.0) {
        return Err(Error::NotSpd(format!(
            "eigenvalue {:.3e} of x⁻¹y",
            values[n - 1]
        )));
    }
    let mut logs: Vec<f64> = values.iter().map(|v| 0.5 * v.ln()).collect();
    let mean = logs.iter().sum::<f64>() / n as f64;
    logs.iter_mut().for_each(|v| *v -= mean);
    Ok(CartanVector::from_sorted(logs))
}

/// Riemannian distance `d(x, y) = ‖d_Δ(x, y)‖`.
pub fn distance(x: &Point, y: &Point) -> Result<f64> {
    Ok(cartan_vector(x, y)?.norm())
}

/// `d_τ(x, y) = π_τ(d_Δ(x, y))`.
pub fn taumod_distance(x: &Point, y: &Point, face: &FaceType) -> Result<ModelVector> {
    Ok(project_to_face_sector(&cartan_vector(x, y)?, face))
}

/// Relative flag `τ(xy)` of type `I` and the log singular value gaps at `I`.
///
/// With `g = x^{1/2}` and `h = g⁻¹ y^{1/2} = U S Vᵀ`, the flag is `g` applied
/// to the leading left singular subspaces of `h`.
pub fn relative_flag(x: &Point, y: &Point, face: &FaceType) -> Result<(Flag, Vec<f64>)> {
    check_dims(x, y)?;
    let g = x.sqrt()?;
    let h = x.inv_sqrt()? * y.sqrt()?;
    let (u, s, _) = linalg::svd_desc(&h);
    let gaps = kept_gaps(&s.iter().map(|v| v.ln()).collect::<Vec<_>>(), face)?;
    let basis = g * u;
    Ok((Flag::from_basis(face.clone(), &basis)?, gaps))
}

fn kept_gaps(logs: &[f64], face: &FaceType) -> Result<Vec<f64>> {
    face.dims()
        .iter()
        .map(|&d| {
            let gap = logs[d - 1] - logs[d];
            if gap < CHAMBER_TOL {
                Err(Error::VanishingGap { index: d, gap })
            } else {
                Ok(gap)
            }
        })
        .collect()
}

/// Relative flag `τ(x'y')` for `x' = back⁻¹·o` and `y' = front·o`, computed
/// without forming either point: it equals `front` applied to the leading
/// right singular subspaces of `back·front`. Also returns `d_Δ(x', y')`.
pub fn relative_flag_between(
    back: &GroupElement,
    front: &GroupElement,
    face: &FaceType,
) -> Result<(Flag, CartanVector)> {
    let product = back.compose(front);
    let delta = product.cartan();
    kept_gaps(delta.coords(), face)?;
    let subspaces: Result<Vec<Mat>> = face
        .dims()
        .iter()
        .map(|&d| {
            let (_, right) = product.top_subspaces(d)?;
            Ok(front.map_subspace(&right))
        })
        .collect();
    Ok((Flag::from_subspaces(face.clone(), &subspaces?)?, delta))
}

/// Weyl cone `V(x, st(τ))`.
#[derive(Debug, Clone)]
pub struct WeylConeRef {
    pub tip: Point,
    pub flag: Flag,
}

/// Why a point was found outside a cone.
#[derive(Debug, Clone, PartialEq)]
pub enum OutsideReason {
    /// The relative flag exists but differs from the cone flag.
    FlagMismatch { distance: f64 },
    /// The relative flag is undefined; `defect` measures how far the point is
    /// from the closed cone in the tangent model at the tip.
    VanishingGap { index: usize, gap: f64, defect: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConeVerdict {
    /// Inside the open cone; `margin` is the distance to its boundary.
    Interior {
        margin: f64,
    },
    /// On the boundary of the cone (including the tip).
    Boundary,
    Outside(OutsideReason),
}

impl ConeVerdict {
    pub fn is_member(&self) -> bool {
        !matches!(self, ConeVerdict::Outside(_))
    }

    pub fn margin(&self) -> f64 {
        match self {
            ConeVerdict::Interior { margin } => *margin,
            _ => 0.0,
        }
    }
}

/// Membership of `y` in the cone. Inside the open cone the margin
/// `face_boundary_distance(d_Δ(x, y))` is the distance from `y` to the cone
/// boundary.
pub fn cone_query(y: &Point, cone: &WeylConeRef, tol: f64) -> Result<ConeVerdict> {
    let face = cone.flag.face();
    let delta = cartan_vector(&cone.tip, y)?;
    if delta.norm() <= tol {
        return Ok(ConeVerdict::Boundary);
    }
    match relative_flag(&cone.tip, y, face) {
        Ok((rel, _)) => {
            let distance = flag_distance(&rel, &cone.flag)?;
            if distance < tol {
                Ok(ConeVerdict::Interior {
                    margin: face_boundary_distance(&delta, face),
                })
            } else {
                Ok(ConeVerdict::Outside(OutsideReason::FlagMismatch {
                    distance,
                }))
            }
        }
        Err(Error::VanishingGap { index, gap }) => {
            let defect = closed_cone_defect(y, cone)?;
            if defect <= tol {
                Ok(ConeVerdict::Boundary)
            } else {
                Ok(ConeVerdict::Outside(OutsideReason::VanishingGap {
                    index,
                    gap,
                    defect,
                }))
            }
        }
        Err(e) => Err(e),
    }
}

/// Distance, in the tangent model at the tip, from `y` to the closed cone:
/// the off-block part of `log` in the cone's frame combined with the star
/// violation of the block eigenvalues.
fn closed_cone_defect(y: &Point, cone: &WeylConeRef) -> Result<f64> {
    let face = cone.flag.face();
    let g = cone.tip.representative()?;
    let gi = g.inverse();
    let local = gi.act(y);
    let frame = act_on_flag(&gi, &cone.flag).frame().clone();
    let log = linalg::spd_log(local.spd())? * 0.5;
    let in_frame = frame.transpose() * log * &frame;
    let mut off = 0.0;
    let mut values = vec![0.0; face.n()];
    let blocks = face.blocks();
    for (a, ba) in blocks.iter().enumerate() {
        for (b, bb) in blocks.iter().enumerate() {
            if a != b {
                off += in_frame
                    .view((ba.start, bb.start), (ba.len(), bb.len()))
                    .norm_squared();
            }
        }
        let block = in_frame
            .view((ba.start, ba.start), (ba.len(), ba.len()))
            .into_owned();
        let (eig, _) = linalg::sym_eigen_desc(&block);
        values[ba.clone()].copy_from_slice(&eig);
    }
    let viol = star_violation(&values, face);
    Ok((off + viol * viol).sqrt())
}

/// Diamond `◊(x, y) = V(x, st(τ_+)) ∩ V(y, st(τ_-))`, optionally restricted to
/// `Θ`-directions.
#[derive(Debug, Clone)]
pub struct DiamondRef {
    pub tips: (Point, Point),
    /// `(τ_-, τ_+)`; `τ_-` has the opposite type.
    pub flags: (Flag, Flag),
    pub theta: Option<ThetaSpec>,
}

impl DiamondRef {
    /// The diamond spanned by a regular segment.
    pub fn spanned(x: Point, y: Point, face: &FaceType, theta: Option<ThetaSpec>) -> Result<Self> {
        let (plus, _) = relative_flag(&x, &y, face)?;
        let (minus, _) = relative_flag(&y, &x, &face.iota())?;
        Ok(Self {
            tips: (x, y),
            flags: (minus, plus),
            theta,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiamondMembership {
    pub member: bool,
    pub forward: ConeVerdict,
    pub backward: ConeVerdict,
    /// `Θ` margins of `d_Δ(x, p)` and `d_Δ(y, p)` when the diamond has `Θ`.
    pub theta_margins: Option<(f64, f64)>,
}

pub fn diamond_query(p: &Point, diamond: &DiamondRef, tol: f64) -> Result<DiamondMembership> {
    let (x, y) = &diamond.tips;
    let (minus, plus) = &diamond.flags;
    let forward = cone_query(
        p,
        &WeylConeRef {
            tip: x.clone(),
            flag: plus.clone(),
        },
        tol,
    )?;
    let backward = cone_query(
        p,
        &WeylConeRef {
            tip: y.clone(),
            flag: minus.clone(),
        },
        tol,
    )?;
    let mut member = forward.is_member() && backward.is_member();
    let theta_margins = match &diamond.theta {
        None => None,
        Some(theta) => {
            let opposite = ThetaSpec {
                face: theta.face.iota(),
                gap: theta.gap,
            };
            let mf = theta_margin_or_tip(&cartan_vector(x, p)?, theta, tol)?;
            let mb = theta_margin_or_tip(&cartan_vector(y, p)?, &opposite, tol)?;
            member &= mf >= -tol && mb >= -tol;
            Some((mf, mb))
        }
    };
    Ok(DiamondMembership {
        member,
        forward,
        backward,
        theta_margins,
    })
}

fn theta_margin_or_tip(delta: &CartanVector, theta: &ThetaSpec, tol: f64) -> Result<f64> {
    if delta.norm() <= tol {
        return Ok(0.0);
    }
    Ok(theta_membership(delta, theta)?.1)
}

/// `d_Δ(y, x) = ι d_Δ(x, y)`, exposed for checks on asymmetric data.
pub fn reversed_cartan(delta: &CartanVector) -> CartanVector {
    iota(delta)
}
