use crate::error::{Error, Result};
use crate::report::{PropertyReport, Witness};
use crate::weyl::{theta_membership, CartanVector, FaceType, ModelVector, ThetaSpec};

use super::{
    cartan_vector, cone_query, relative_flag, taumod_distance, ConeVerdict, Point, WeylConeRef,
};

/// Checks that a sampled path is a `τ`-Finsler geodesic: with `τ_±` the
/// relative flags of its endpoints, every later point lies in the `τ_+`-cone
/// of every earlier one and every earlier point in the `τ_-`-cone of every
/// later one. With `Θ`, all pairwise directions must also be `Θ`-regular.
pub fn finsler_verify(
    path: &[Point],
    face: &FaceType,
    theta: Option<&ThetaSpec>,
    tol: f64,
) -> Result<PropertyReport> {
    if path.len() < 2 {
        return Err(Error::InvalidInput(
            "a path needs at least two points".into(),
        ));
    }
    let first = &path[0];
    let last = &path[path.len() - 1];
    let (plus, _) = relative_flag(first, last, face)?;
    let (minus, _) = relative_flag(last, first, &face.iota())?;
    let mut report = PropertyReport::new("finsler_geodesic");
    report.threshold("flag_tolerance", tol);
    if let Some(t) = theta {
        report.threshold("theta_gap", t.gap);
    }

    let mut worst_margin = f64::INFINITY;
    let mut worst_theta = f64::INFINITY;
    let mut failures = 0usize;
    for i in 0..path.len() {
        for j in (i + 1)..path.len() {
            let forward = cone_query(
                &path[j],
                &WeylConeRef {
                    tip: path[i].clone(),
                    flag: plus.clone(),
                },
                tol,
            )?;
            let backward = cone_query(
                &path[i],
                &WeylConeRef {
                    tip: path[j].clone(),
                    flag: minus.clone(),
                },
                tol,
            )?;
            for verdict in [&forward, &backward] {
                match verdict {
                    ConeVerdict::Interior { margin } => worst_margin = worst_margin.min(*margin),
                    ConeVerdict::Boundary => worst_margin = worst_margin.min(0.0),
                    ConeVerdict::Outside(reason) => {
                        failures += 1;
                        if failures <= 5 {
                            report.witnesses.push(
                                Witness::new("cone_violation", i as f64)
                                    .with_detail(format!("pair ({i}, {j}): {reason:?}")),
                            );
                        }
                    }
                }
            }
            if let Some(t) = theta {
                let delta = cartan_vector(&path[i], &path[j])?;
                if delta.norm() > tol {
                    let (_, m) = theta_membership(&delta, t)?;
                    worst_theta = worst_theta.min(m);
                }
            }
        }
    }
    report.check("cone_pairs", failures == 0);
    report.constant(
        "worst_margin",
        if worst_margin.is_finite() {
            worst_margin
        } else {
            0.0
        },
    );
    report.constant("violations", failures as f64);
    if theta.is_some() {
        report.check("theta_regular", worst_theta >= -tol);
        report.constant("worst_theta_margin", worst_theta);
    }
    report.conclude();
    Ok(report)
}

/// `Δ`-valued and `τ`-valued projections of a path, based at its first point.
pub fn delta_projection(
    path: &[Point],
    face: &FaceType,
) -> Result<(Vec<CartanVector>, Vec<ModelVector>)> {
    let Some(first) = path.first() else {
        return Err(Error::InvalidInput("empty path".into()));
    };
    let mut deltas = Vec::with_capacity(path.len());
    let mut taus = Vec::with_capacity(path.len());
    for p in path {
        deltas.push(cartan_vector(first, p)?);
        taus.push(taumod_distance(first, p, face)?);
    }
    Ok((deltas, taus))
}
