//! Cone and diamond defects evaluated at the base point with tips given as
//! group elements.
//!
//! Orbit points of long words are far too ill-conditioned to handle as SPD
//! matrices. Translating so that the point under test is `o` keeps every
//! explicit matrix near the identity; the far tips only enter through
//! [`GroupElement`] products and relative flags computed on exterior powers.

use crate::error::Result;
use crate::flags::{flag_distance, Flag};
use crate::linalg;
use crate::weyl::{face_boundary_distance, star_violation, CartanVector};

use super::parallel::{parallel_set_projection, DescentOptions, SetProjection};
use super::{relative_flag_between, GroupElement, ParallelSetRef};

/// Tips whose log singular values spread further than this are not formed
/// as SPD matrices.
pub const SPD_SAFE_SPREAD: f64 = 10.0;

/// Nearest point `q` of a parallel set to `o`.
#[derive(Debug, Clone)]
pub struct OriginProjection {
    pub distance: f64,
    pub projection: SetProjection,
    pub representative: GroupElement,
}

pub fn project_origin(set: &ParallelSetRef) -> Result<OriginProjection> {
    let o = super::Point::origin(set.face().n());
    let projection = parallel_set_projection(&o, set, DescentOptions::default())?;
    let representative = projection.representative(set)?;
    Ok(OriginProjection {
        distance: projection.refined,
        projection,
        representative,
    })
}

/// How a point `q ∈ P(τ_-, τ_+)` sits relative to one cone of that set.
#[derive(Debug, Clone)]
pub struct SideDefect {
    /// `d_Δ(tip, q)`.
    pub delta: CartanVector,
    /// Relative flag from the tip agrees with the cone flag.
    pub matched: bool,
    /// Upper estimate of the distance from `q` to the cone (0 when matched).
    pub violation: f64,
    /// Distance to the cone boundary when matched.
    pub margin: f64,
}

/// Evaluates `q = rep·o` against `V(back⁻¹·o, st(flag))`, where `flag` is the
/// `τ_+` member of `set` when `forward` and its `τ_-` member otherwise.
pub fn cone_side(
    back: &GroupElement,
    flag: &Flag,
    rep: &GroupElement,
    set: &ParallelSetRef,
    forward: bool,
    match_tol: f64,
) -> Result<SideDefect> {
    let face = flag.face();
    let delta = back.compose(rep).cartan();
    let norm = delta.norm();
    if norm <= match_tol {
        return Ok(SideDefect {
            delta,
            matched: true,
            violation: 0.0,
            margin: 0.0,
        });
    }
    if let Ok((rel, _)) = relative_flag_between(back, rep, face) {
        if flag_distance(&rel, flag)? <= match_tol {
            let margin = face_boundary_distance(&delta, face);
            return Ok(SideDefect {
                delta,
                matched: true,
                violation: 0.0,
                margin,
            });
        }
    }
    let spread = {
        let c = back.cartan();
        c.coords()[0] - c.coords()[c.dim() - 1]
    };
    let violation = if spread <= SPD_SAFE_SPREAD {
        spd_block_violation(back, rep, set, forward)
            .unwrap_or(norm)
            .min(norm)
    } else {
        norm
    };
    Ok(SideDefect {
        delta,
        matched: false,
        violation,
        margin: 0.0,
    })
}

/// Flat-model violation from block eigenvalues of the tip-relative position,
/// both points taken in adapted coordinates of the parallel set.
fn spd_block_violation(
    back: &GroupElement,
    rep: &GroupElement,
    set: &ParallelSetRef,
    forward: bool,
) -> Result<f64> {
    let tip = back.inverse().orbit_point();
    let q = rep.orbit_point();
    let x = set.block_part(&set.adapted_coordinates(&tip)?);
    let y = set.block_part(&set.adapted_coordinates(&q)?);
    let face = set.face();
    let mut values = vec![0.0; face.n()];
    for b in face.blocks() {
        let xb = x.view((b.start, b.start), (b.len(), b.len())).into_owned();
        let yb = y.view((b.start, b.start), (b.len(), b.len())).into_owned();
        let s = linalg::spd_inv_sqrt(&xb)?;
        let (eig, _) = linalg::sym_eigen_desc(&(&s * yb * &s));
        for (slot, e) in values[b.clone()].iter_mut().zip(eig) {
            *slot = 0.5 * e.ln();
        }
    }
    Ok(if forward {
        star_violation(&values, face)
    } else {
        values.reverse();
        star_violation(&values, &face.iota())
    })
}

/// Defect of `o` against the diamond with tips `back⁻¹·o` and `front·o`.
#[derive(Debug, Clone)]
pub struct DiamondDefect {
    pub parallel: f64,
    pub back: SideDefect,
    pub front: SideDefect,
}

impl DiamondDefect {
    /// Distance surrogate: distance to the parallel set plus both cone
    /// violations at the projected point.
    pub fn total(&self) -> f64 {
        self.parallel + self.back.violation + self.front.violation
    }
}

/// Builds the diamond spanned by `back⁻¹·o` and `front·o` and measures how
/// far `o` is from it.
pub fn diamond_defect(
    back: &GroupElement,
    front: &GroupElement,
    face: &crate::weyl::FaceType,
    match_tol: f64,
) -> Result<DiamondDefect> {
    let (plus, _) = relative_flag_between(back, front, face)?;
    let (minus, _) = relative_flag_between(&front.inverse(), &back.inverse(), &face.iota())?;
    let set = ParallelSetRef::new(minus.clone(), plus.clone())?;
    let proj = project_origin(&set)?;
    let back_side = cone_side(back, &plus, &proj.representative, &set, true, match_tol)?;
    let front_side = cone_side(
        &front.inverse(),
        &minus,
        &proj.representative,
        &set,
        false,
        match_tol,
    )?;
    Ok(DiamondDefect {
        parallel: proj.distance,
        back: back_side,
        front: front_side,
    })
}
