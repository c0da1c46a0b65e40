//! The model space `K_Θ = H²(ℂ^d) ⊖ ΘH²(ℂ^d)` in state-space coordinates.
//!
//! A coordinate vector `x ∈ ℂ^n` stands for `f(z) = C(I − zA)^{-1}x`. Because
//! the realization is unitary and stable, `x ↦ f` is an isometry onto `K_Θ`,
//! so inner products are plain `ℂ^n` inner products.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::inner_function::MatrixInnerFunction;
use crate::linalg::{self, CMat, CVec};

pub const DEFECT_RANK_TOL: f64 = 1e-10;
pub const DEFAULT_PROJECT_DEGREE_CAP: usize = 64;

/// An element of `K_Θ`, tagged with the fingerprint of its owner.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelVector {
    owner: String,
    coords: CVec,
}

impl ModelVector {
    pub fn new(theta: &MatrixInnerFunction, coords: CVec) -> Result<Self> {
        if coords.len() != theta.degree() {
            return Err(Error::DimensionMismatch(format!(
                "coordinate vector has length {}, K_Θ has dimension {}",
                coords.len(),
                theta.degree()
            )));
        }
        Ok(Self { owner: theta.fingerprint().to_owned(), coords })
    }

    pub(crate) fn with_owner(owner: &str, coords: CVec) -> Self {
        Self { owner: owner.to_owned(), coords }
    }

    pub fn owner(&self) -> &str {
        &self.owner
    }

    pub fn coords(&self) -> &CVec {
        &self.coords
    }

    pub fn belongs_to(&self, theta: &MatrixInnerFunction) -> bool {
        self.owner == theta.fingerprint()
    }

    pub fn inner(&self, other: &ModelVector) -> Result<Complex64> {
        if self.owner != other.owner {
            return Err(Error::DimensionMismatch("vectors live in different model spaces".into()));
        }
        Ok(linalg::inner(&self.coords, &other.coords))
    }

    pub fn norm(&self) -> f64 {
        linalg::vec_norm(&self.coords)
    }
}

/// A `ℂ^d`-valued analytic polynomial `h(z) = Σ_k h_k z^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorPolynomial {
    pub coeffs: Vec<CVec>,
}

impl VectorPolynomial {
    pub fn new(coeffs: Vec<CVec>) -> Self {
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn evaluate(&self, z: Complex64) -> CVec {
        let d = self.coeffs.first().map_or(0, |v| v.len());
        self.coeffs
            .iter()
            .rev()
            .fold(CVec::zeros(d), |acc, h| acc * z + h)
    }
}

fn check_owner(theta: &MatrixInnerFunction, f: &ModelVector) -> Result<()> {
    if !f.belongs_to(theta) {
        return Err(Error::DimensionMismatch(format!(
            "vector belongs to {}, not to {}",
            f.owner(),
            theta.fingerprint()
        )));
    }
    Ok(())
}

fn check_disk(lambda: Complex64) -> Result<()> {
    if !(lambda.norm() < 1.0) {
        return Err(Error::OutOfDisk(lambda.to_string()));
    }
    Ok(())
}

/// Coordinates of `k_λ^Θ y` and of `k̃_λ^Θ y`.
pub fn kernel_vectors(
    theta: &MatrixInnerFunction,
    lambda: Complex64,
    y: &CVec,
) -> Result<(ModelVector, ModelVector)> {
    check_disk(lambda)?;
    if y.len() != theta.dim() {
        return Err(Error::DimensionMismatch(format!("y has length {}, expected {}", y.len(), theta.dim())));
    }
    let r = theta.realization();
    let n = theta.degree();
    let id = linalg::identity(n);
    let ycol = CMat::from_column_slice(y.len(), 1, y.as_slice());
    let k = linalg::solve(&(&id - r.a.adjoint() * lambda.conj()), &(r.c.adjoint() * &ycol))?;
    let kt = linalg::solve(&(&id - &r.a * lambda), &(&r.b * &ycol))?;
    Ok((
        ModelVector::new(theta, k.column(0).into_owned())?,
        ModelVector::new(theta, kt.column(0).into_owned())?,
    ))
}

/// `f(z) = C(I − zA)^{-1}x`; valid on the closed disk and slightly beyond.
pub fn evaluate_vector(theta: &MatrixInnerFunction, f: &ModelVector, z: Complex64) -> Result<CVec> {
    check_owner(theta, f)?;
    Ok(theta.realization().output_map(z)? * f.coords())
}

/// `(S_Θ, S_Θ*)` as matrices: `S_Θ* = A` and `S_Θ = A*`.
pub fn model_operator_matrices(theta: &MatrixInnerFunction) -> (CMat, CMat) {
    let a = &theta.realization().a;
    (a.adjoint(), a.clone())
}

/// Orthonormal coordinate bases for the defect spaces and their complements.
#[derive(Debug, Clone)]
pub struct DefectBases {
    /// `𝒟 = {(I − ΘΘ(0)*)x}`, the column space of `C*`.
    pub defect: CMat,
    /// `𝒟_* = {(Θ − Θ(0))x / z}`, the column space of `B`.
    pub defect_star: CMat,
    pub defect_perp: CMat,
    pub defect_star_perp: CMat,
}

pub fn defect_bases(theta: &MatrixInnerFunction) -> DefectBases {
    let r = theta.realization();
    let (defect, defect_perp) = linalg::range_and_complement(&r.c.adjoint(), DEFECT_RANK_TOL);
    let (defect_star, defect_star_perp) = linalg::range_and_complement(&r.b, DEFECT_RANK_TOL);
    DefectBases { defect, defect_star, defect_perp, defect_star_perp }
}

/// Largest pointwise deviation between the coordinate action of `S_Θ`,
/// `S_Θ*` and the branchwise formulas on the defect spaces and their
/// complements, over the supplied evaluation points (all non-zero).
pub fn piecewise_action_residual(theta: &MatrixInnerFunction, points: &[Complex64]) -> Result<f64> {
    let r = theta.realization();
    let bases = defect_bases(theta);
    let (s, s_adj) = model_operator_matrices(theta);
    let theta0 = &r.d;
    let dim = theta.dim();
    let mut worst: f64 = 0.0;
    for &z in points {
        let out = r.output_map(z)?;
        let tz = theta.evaluate(z)?;
        // S_Θ multiplies by z on 𝒟_*^⊥.
        for x in bases.defect_star_perp.column_iter() {
            let lhs = &out * (&s * x);
            let rhs = &out * x * z;
            worst = worst.max(linalg::vec_norm(&(lhs - rhs)));
        }
        // S_Θ* divides by z on 𝒟^⊥.
        for x in bases.defect_perp.column_iter() {
            let lhs = &out * (&s_adj * x);
            let rhs = &out * x / z;
            worst = worst.max(linalg::vec_norm(&(lhs - rhs)));
        }
        let id = linalg::identity(dim);
        for j in 0..dim {
            let mut y = CVec::zeros(dim);
            y[j] = linalg::ONE;
            // f = k̃_0 y ∈ 𝒟_*: (S_Θ f)(z) = −(I − Θ(z)Θ(0)*)Θ(0)y.
            let lhs = &out * (&s * (&r.b * &y));
            let rhs = -((&id - &tz * theta0.adjoint()) * (theta0 * &y));
            worst = worst.max(linalg::vec_norm(&(lhs - rhs)));
            // f = k_0 y ∈ 𝒟: (S_Θ* f)(z) = −(Θ(z) − Θ(0))Θ(0)*y / z.
            let lhs = &out * (&s_adj * (r.c.adjoint() * &y));
            let rhs = -((&tz - theta0) * (theta0.adjoint() * &y)) / z;
            worst = worst.max(linalg::vec_norm(&(lhs - rhs)));
        }
    }
    Ok(worst)
}

/// Orthogonal projection of a polynomial onto `K_Θ`.
///
/// Uses `⟨h, f_x⟩ = Σ_k ⟨h_k, CA^k x⟩`, so the coordinates are
/// `Σ_k (A*)^k C* h_k` with no quadrature involved.
pub fn project(theta: &MatrixInnerFunction, h: &VectorPolynomial) -> Result<ModelVector> {
    project_with_cap(theta, h, DEFAULT_PROJECT_DEGREE_CAP)
}

pub fn project_with_cap(theta: &MatrixInnerFunction, h: &VectorPolynomial, cap: usize) -> Result<ModelVector> {
    if h.degree() > cap {
        return Err(Error::DimensionMismatch(format!("polynomial degree {} exceeds cap {cap}", h.degree())));
    }
    let r = theta.realization();
    let n = theta.degree();
    let a_adj = r.a.adjoint();
    let c_adj = r.c.adjoint();
    // Horner in A*: x = C*h_0 + A*(C*h_1 + A*(C*h_2 + …)).
    let mut x = CVec::zeros(n);
    for hk in h.coeffs.iter().rev() {
        if hk.len() != theta.dim() {
            return Err(Error::DimensionMismatch("polynomial coefficient has wrong length".into()));
        }
        x = &a_adj * x + &c_adj * hk;
    }
    ModelVector::new(theta, x)
}
