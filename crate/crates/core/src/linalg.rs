//! Dense complex helpers shared by the operator-theory modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Largest singular value. Empty matrices have norm zero.
pub fn op_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

pub fn vec_norm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `y* x`: linear in the first slot, conjugate-linear in the second.
pub fn inner(x: &CVec, y: &CVec) -> Complex64 {
    x.iter().zip(y.iter()).map(|(a, b)| a * b.conj()).sum()
}

pub fn conj_vec(v: &CVec) -> CVec {
    v.map(|z| z.conj())
}

pub fn conj_mat(m: &CMat) -> CMat {
    m.map(|z| z.conj())
}

/// `‖M M* − I‖` and `‖M* M − I‖`, whichever is larger.
pub fn unitarity_residual(m: &CMat) -> f64 {
    let n = m.nrows();
    if n != m.ncols() {
        return f64::INFINITY;
    }
    let id = identity(n);
    let left = op_norm(&(m * m.adjoint() - &id));
    let right = op_norm(&(m.adjoint() * m - &id));
    left.max(right)
}

/// Solves `M x = rhs` with partial-pivot LU, rejecting numerically singular `M`.
pub fn solve(m: &CMat, rhs: &CMat) -> Result<CMat> {
    let lu = m.clone().lu();
    let u = lu.u();
    let scale = u.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let min_pivot = (0..u.nrows()).map(|i| u[(i, i)].norm()).fold(f64::INFINITY, f64::min);
    if u.nrows() > 0 && min_pivot <= 1e-14 * scale {
        return Err(Error::SingularResolvent);
    }
    lu.solve(rhs).ok_or(Error::SingularResolvent)
}

pub fn inverse(m: &CMat) -> Result<CMat> {
    solve(m, &identity(m.nrows()))
}

/// Hermitian positive semidefinite square root, eigenvalues clamped at zero.
pub fn psd_sqrt(m: &CMat) -> CMat {
    let n = m.nrows();
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    let herm = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let roots = eig.eigenvalues.map(|l| c(l.max(0.0).sqrt(), 0.0));
    let v = &eig.eigenvectors;
    v * CMat::from_diagonal(&roots) * v.adjoint()
}

/// Orthonormal basis of the column space of `m` together with one of its
/// orthogonal complement in `ℂ^{rows}`. Rank uses `rel_tol · σ_max`.
pub fn range_and_complement(m: &CMat, rel_tol: f64) -> (CMat, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (CMat::zeros(0, 0), CMat::zeros(0, 0));
    }
    // Pad with zero columns so the SVD hands back a full n×n left factor.
    let cols = m.ncols().max(n);
    let mut padded = CMat::zeros(n, cols);
    padded.view_mut((0, 0), (n, m.ncols())).copy_from(m);
    let svd = padded.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let sv = &svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].partial_cmp(&sv[a]).unwrap_or(std::cmp::Ordering::Equal));
    let rank = if smax == 0.0 {
        0
    } else {
        order.iter().filter(|&&i| sv[i] > rel_tol * smax).count()
    };
    let pick = |idx: &[usize]| {
        let mut out = CMat::zeros(n, idx.len());
        for (k, &i) in idx.iter().enumerate() {
            out.set_column(k, &u.column(i));
        }
        out
    };
    (pick(&order[..rank]), pick(&order[rank..]))
}

/// Orthogonal projector `Q Q*` for a matrix with orthonormal columns.
pub fn projector(q: &CMat) -> CMat {
    q * q.adjoint()
}

/// Sines of the principal angles between the spans of two orthonormal
/// column sets, computed as singular values of `(I − Q₁Q₁*) Q₂`.
///
/// Working with sines avoids the loss of precision `acos` has near zero.
/// When the dimensions differ the missing directions count as right angles.
pub fn principal_angle_sines(q1: &CMat, q2: &CMat) -> Vec<f64> {
    let n = q1.nrows();
    let k = q1.ncols().max(q2.ncols());
    let mut out = Vec::with_capacity(k);
    if q2.ncols() > 0 {
        let resid = (identity(n) - projector(q1)) * q2;
        out.extend(resid.svd(false, false).singular_values.iter().cloned());
    }
    out.resize(k, 1.0);
    out
}

pub fn principal_angles(q1: &CMat, q2: &CMat) -> Vec<f64> {
    principal_angle_sines(q1, q2)
        .into_iter()
        .map(|s| s.clamp(0.0, 1.0).asin())
        .collect()
}

pub fn spectral_radius(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    match m.clone().eigenvalues() {
        Some(ev) => ev.iter().map(|z| z.norm()).fold(0.0, f64::max),
        None => f64::INFINITY,
    }
}

pub fn hermitian_part_eigenvalues(m: &CMat) -> Vec<f64> {
    let herm = (m + m.adjoint()) * c(0.5, 0.0);
    herm.symmetric_eigen().eigenvalues.iter().cloned().collect()
}
