//! Dense linear-algebra helpers shared by the geometric layers.
//!
//! Everything here works on `nalgebra` dynamic matrices. Spectral helpers
//! always return values in descending order.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Smallest eigenvalue, relative to the largest, that SPD functions accept.
pub const SPD_FLOOR: f64 = 1e-12;

pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

/// Eigen-decomposition of the symmetric part of `m`, eigenvalues descending.
pub fn sym_eigen_desc(m: &Mat) -> (Vec<f64>, Mat) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Mat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

fn apply_spectral(values: &[f64], vectors: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    let d = Vector::from_iterator(values.len(), values.iter().map(|&v| f(v)));
    let scaled = Mat::from_fn(vectors.nrows(), vectors.ncols(), |r, c| {
        vectors[(r, c)] * d[c]
    });
    symmetrize(&(scaled * vectors.transpose()))
}

fn checked_spd_spectrum(s: &Mat) -> Result<(Vec<f64>, Mat)> {
    let (values, vectors) = sym_eigen_desc(s);
    let top = values[0];
    let bottom = *values.last().expect("non-empty spectrum");
    if !(bottom > 0.0) || !top.is_finite() {
        return Err(Error::NotSpd(format!("smallest eigenvalue {bottom:.3e}")));
    }
    if bottom < SPD_FLOOR * top {
        return Err(Error::IllConditioned(format!(
            "eigenvalue spread {:.3e} is beyond double precision",
            top / bottom
        )));
    }
    Ok((values, vectors))
}

pub fn spd_sqrt(s: &Mat) -> Result<Mat> {
    let (v, q) = checked_spd_spectrum(s)?;
    Ok(apply_spectral(&v, &q, f64::sqrt))
}

pub fn spd_inv_sqrt(s: &Mat) -> Result<Mat> {
    let (v, q) = checked_spd_spectrum(s)?;
    Ok(apply_spectral(&v, &q, |x| 1.0 / x.sqrt()))
}

pub fn spd_log(s: &Mat) -> Result<Mat> {
    let (v, q) = checked_spd_spectrum(s)?;
    Ok(apply_spectral(&v, &q, f64::ln))
}

pub fn sym_exp(s: &Mat) -> Mat {
    let (v, q) = sym_eigen_desc(s);
    apply_spectral(&v, &q, f64::exp)
}

/// Singular value decomposition with singular values in descending order.
/// Thin SVD `m = U diag(s) Vᵀ` with singular values descending.
///
/// One-sided Jacobi: singular vectors keep high relative accuracy when the
/// singular values are widely spread, which the bidiagonal routine in
/// `nalgebra` does not guarantee for nearly rank-one inputs.
pub fn svd_desc(m: &Mat) -> (Mat, Vec<f64>, Mat) {
    if m.nrows() < m.ncols() {
        let (u, s, v) = svd_desc(&m.transpose());
        return (v, s, u);
    }
    let (rows, k) = m.shape();
    let mut a = m.clone();
    let mut v = Mat::identity(k, k);
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dot(&a.column(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for (mat, len) in [(&mut a, rows), (&mut v, k)] {
                    for r in 0..len {
                        let x = mat[(r, p)];
                        let y = mat[(r, q)];
                        mat[(r, p)] = c * x - s * y;
                        mat[(r, q)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..k).map(|j| a.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let s: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let mut u = Mat::zeros(rows, k);
    for (c, &j) in order.iter().enumerate() {
        if norms[j] > 0.0 {
            u.set_column(c, &(a.column(j) / norms[j]));
        } else {
            // complete with a unit vector orthogonal to the columns so far
            let mut best = Vector::zeros(rows);
            for e in 0..rows {
                let mut x = Vector::zeros(rows);
                x[e] = 1.0;
                for prev in 0..c {
                    let col = u.column(prev).into_owned();
                    x -= &col * col.dot(&x);
                }
                if x.norm() > best.norm() {
                    best = x;
                }
            }
            let n = best.norm();
            u.set_column(c, &(best / n));
        }
    }
    let v_sorted = Mat::from_fn(k, k, |r, c| v[(r, order[c])]);
    (u, s, v_sorted)
}

pub fn singular_values_desc(m: &Mat) -> Vec<f64> {
    svd_desc(m).1
}

pub fn op_norm(m: &Mat) -> f64 {
    singular_values_desc(m)[0]
}

pub fn min_singular_value(m: &Mat) -> f64 {
    *singular_values_desc(m).last().unwrap_or(&0.0)
}

/// Orthogonal projector onto the column span of an orthonormal basis.
pub fn projector(basis: &Mat) -> Mat {
    basis * basis.transpose()
}

/// Orthonormal basis for the column span of a full-rank `m`.
pub fn orthonormalize(m: &Mat) -> Mat {
    let (u, _, _) = svd_desc(m);
    u.columns(0, m.ncols()).into_owned()
}

/// Orthonormal basis of the orthogonal complement of an orthonormal basis.
pub fn orthonormal_complement(basis: &Mat) -> Mat {
    let n = basis.nrows();
    let k = basis.ncols();
    let residual = Mat::identity(n, n) - projector(basis);
    let (_, vectors) = sym_eigen_desc(&residual);
    vectors.columns(0, n - k).into_owned()
}

/// Assembles an orthogonal frame whose leading columns span the given nested
/// subspaces, listed by increasing dimension.
pub fn nested_frame(n: usize, subspaces: &[Mat]) -> Mat {
    let mut frame = Mat::zeros(n, 0);
    for basis in subspaces {
        let have = frame.ncols();
        let need = basis.ncols().saturating_sub(have);
        if need == 0 {
            continue;
        }
        let residual = basis - &frame * (frame.transpose() * basis);
        let (u, _, _) = svd_desc(&residual);
        frame = hstack(&frame, &u.columns(0, need).into_owned());
    }
    if frame.ncols() < n {
        let rest = orthonormal_complement(&frame);
        frame = hstack(&frame, &rest);
    }
    frame
}

pub fn hstack(a: &Mat, b: &Mat) -> Mat {
    let mut out = Mat::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut current, &mut out);
    out
}

fn minor_det(m: &Mat, rows: &[usize], cols: &[usize]) -> f64 {
    let k = rows.len();
    match k {
        0 => 1.0,
        1 => m[(rows[0], cols[0])],
        2 => {
            m[(rows[0], cols[0])] * m[(rows[1], cols[1])]
                - m[(rows[0], cols[1])] * m[(rows[1], cols[0])]
        }
        _ => Mat::from_fn(k, k, |r, c| m[(rows[r], cols[c])]).determinant(),
    }
}

/// The `k`-th compound matrix: the action of `m` on the exterior power
/// `Λ^k R^n` in the basis of ordered wedge products `e_S`, `S` lexicographic.
pub fn compound(m: &Mat, k: usize) -> Mat {
    if k == 1 {
        return m.clone();
    }
    let rows = combinations(m.nrows(), k);
    let cols = combinations(m.ncols(), k);
    Mat::from_fn(rows.len(), cols.len(), |r, c| {
        minor_det(m, &rows[r], &cols[c])
    })
}

/// Wedge product of the columns of `basis` in the lexicographic basis of
/// `Λ^k R^n`.
pub fn wedge_columns(basis: &Mat) -> Vector {
    let k = basis.ncols();
    let subsets = combinations(basis.nrows(), k);
    let all: Vec<usize> = (0..k).collect();
    Vector::from_iterator(
        subsets.len(),
        subsets.iter().map(|s| minor_det(basis, s, &all)),
    )
}

/// Recovers the `k`-dimensional subspace represented by a (nearly)
/// decomposable vector `w ∈ Λ^k R^n`, as an orthonormal `n × k` basis.
///
/// Contracting `w` against every `e_S^*` with `|S| = k - 1` yields vectors of
/// the subspace; the dominant `k` left singular vectors of that family span it.
pub fn subspace_from_wedge(w: &Vector, n: usize, k: usize) -> Result<Mat> {
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!(
            "wedge degree {k} in dimension {n}"
        )));
    }
    let norm = w.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::InvalidInput(
            "wedge vector is zero or non-finite".into(),
        ));
    }
    let w = w / norm;
    if k == 1 {
        return Ok(Mat::from_column_slice(n, 1, w.as_slice()));
    }
    let full = combinations(n, k);
    let faces = combinations(n, k - 1);
    let mut contraction = Mat::zeros(n, faces.len());
    let mut merged = Vec::with_capacity(k);
    for (col, s) in faces.iter().enumerate() {
        for j in 0..n {
            if s.contains(&j) {
                continue;
            }
            merged.clear();
            merged.extend_from_slice(s);
            let pos = merged.partition_point(|&x| x < j);
            merged.insert(pos, j);
            let idx = full.binary_search(&merged).expect("subset is enumerated");
            let above = s.len() - pos;
            let sign = if above % 2 == 0 { 1.0 } else { -1.0 };
            contraction[(j, col)] = sign * w[idx];
        }
    }
    let (u, s, _) = svd_desc(&contraction);
    if s[k - 1] < 1e-8 * s[0] {
        return Err(Error::IllConditioned(format!(
            "wedge vector is not decomposable (singular value {:.3e})",
            s[k - 1]
        )));
    }
    Ok(u.columns(0, k).into_owned())
}

/// Haar-distributed orthogonal matrix with determinant +1.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Mat {
    let g = Mat::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..n {
        if r[(c, c)] < 0.0 {
            q.column_mut(c).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

/// Random trace-zero vector with entries scaled into `[-scale, scale]` before
/// centring.
pub fn random_trace_zero<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> Vec<f64> {
    let mut a: Vec<f64> = (0..n).map(|_| rng.random_range(-scale..=scale)).collect();
    let mean = a.iter().sum::<f64>() / n as f64;
    a.iter_mut().for_each(|x| *x -= mean);
    a
}

/// Random element `k_1 exp(a) k_2` of `SL(n,R)` with log singular values `a`
/// drawn by [`random_trace_zero`].
pub fn random_sl<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> Mat {
    let a = random_trace_zero(rng, n, scale);
    let k1 = random_rotation(rng, n);
    let k2 = random_rotation(rng, n);
    let d = Mat::from_diagonal(&Vector::from_iterator(n, a.iter().map(|x| x.exp())));
    k1 * d * k2
}

pub fn diag_exp(a: &[f64]) -> Mat {
    Mat::from_diagonal(&Vector::from_iterator(a.len(), a.iter().map(|x| x.exp())))
}
