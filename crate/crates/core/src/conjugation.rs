//! Conjugations `Γ = U∘conj` on `ℂ^d` and the induced `C_Γ f = Θ e^{-it} Γf`.

use num_complex::Complex64;

use crate::crofoot::{defect_operators, CrofootPair, StrictContraction};
use crate::error::{Error, Result};
use crate::inner_function::MatrixInnerFunction;
use crate::linalg::{self, c, conj_mat, conj_vec, CMat, CVec};
use crate::model_space::ModelVector;
use crate::oracle::{self, BoundaryGrid};
use crate::sampling;

pub const SYMMETRY_TOL: f64 = 1e-12;
pub const IN_SPACE_TOL: f64 = 1e-9;
pub const COMPATIBILITY_TOL: f64 = 1e-8;

/// `Γx = U·conj(x)` with `U` unitary and `U = Uᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugationSpec {
    usym: CMat,
}

pub fn make_conjugation(usym: CMat) -> Result<ConjugationSpec> {
    if usym.nrows() != usym.ncols() || usym.nrows() == 0 {
        return Err(Error::DimensionMismatch("conjugation matrix must be square".into()));
    }
    let residual = linalg::unitarity_residual(&usym);
    if !(residual < crate::inner_function::CONSTRUCTION_TOL) {
        return Err(Error::NotUnitary { residual });
    }
    let asym = linalg::op_norm(&(&usym - usym.transpose()));
    if !(asym <= SYMMETRY_TOL) {
        return Err(Error::NotInvolutive { residual: asym });
    }
    Ok(ConjugationSpec { usym })
}

impl ConjugationSpec {
    /// Entrywise complex conjugation.
    pub fn entrywise(d: usize) -> Self {
        Self { usym: linalg::identity(d) }
    }

    pub fn matrix(&self) -> &CMat {
        &self.usym
    }

    pub fn dim(&self) -> usize {
        self.usym.nrows()
    }

    pub fn apply(&self, x: &CVec) -> CVec {
        &self.usym * conj_vec(x)
    }

    /// Matrix of the linear map `ΓMΓ`, namely `U·conj(M)·conj(U)`.
    pub fn sandwich(&self, m: &CMat) -> CMat {
        &self.usym * conj_mat(m) * conj_mat(&self.usym)
    }
}

/// Residuals of the hypotheses and consequences relating `Γ` to `Θ`, `W`
/// and `Θ′`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompatibilityResiduals {
    /// `max_t ‖ΓΘ(e^{it})Γ − Θ(e^{it})*‖`.
    pub theta_symmetry: f64,
    /// `‖ΓW* − WΓ‖`.
    pub contraction: f64,
    /// `‖ΓD_{W*} − D_WΓ‖`.
    pub defects: f64,
    /// `max_t ‖ΓΘ′(e^{it})Γ − Θ′(e^{it})*‖`.
    pub theta_prime_symmetry: f64,
}

impl CompatibilityResiduals {
    pub fn hypotheses_hold(&self, tol: f64) -> bool {
        self.theta_symmetry < tol && self.contraction < tol
    }
}

pub fn compatibility_residuals(
    theta: &MatrixInnerFunction,
    w: &StrictContraction,
    gamma: &ConjugationSpec,
    grid: &BoundaryGrid,
) -> Result<CompatibilityResiduals> {
    let d = theta.dim();
    if gamma.dim() != d || w.dim() != d {
        return Err(Error::DimensionMismatch("Θ, W and Γ must share the dimension d".into()));
    }
    let u = gamma.matrix();
    let wm = w.matrix();
    let defects = defect_operators(w);
    let id = linalg::identity(d);
    let eval = oracle::theta_evaluator(theta);
    let mut theta_symmetry: f64 = 0.0;
    let mut theta_prime_symmetry: f64 = 0.0;
    for &z in grid.nodes() {
        let t = eval(z)?;
        theta_symmetry = theta_symmetry.max(linalg::op_norm(&(gamma.sandwich(&t) - t.adjoint())));
        let inv = linalg::inverse(&(&id - &t * wm.adjoint()))?;
        let tp = -wm + &defects.d_wstar * inv * &t * &defects.d_w;
        theta_prime_symmetry = theta_prime_symmetry.max(linalg::op_norm(&(gamma.sandwich(&tp) - tp.adjoint())));
    }
    let contraction = linalg::op_norm(&(u * wm.transpose() - wm * u));
    let defects = linalg::op_norm(&(u * conj_mat(&defects.d_wstar) - &defects.d_w * u));
    Ok(CompatibilityResiduals { theta_symmetry, contraction, defects, theta_prime_symmetry })
}

/// `C_Γ` on `K_Θ` as a conjugate-linear coordinate map `x ↦ K·conj(x)`.
#[derive(Debug, Clone)]
pub struct CGamma {
    owner: String,
    matrix: CMat,
    /// L² distance of the boundary samples of `C_Γ f_j` from `K_Θ`, worst basis vector.
    pub in_space_residual: f64,
}

impl CGamma {
    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn apply(&self, f: &ModelVector) -> Result<ModelVector> {
        if f.owner() != self.owner {
            return Err(Error::DimensionMismatch("vector is not in the space this C_Γ acts on".into()));
        }
        Ok(ModelVector::with_owner(&self.owner, &self.matrix * conj_vec(f.coords())))
    }

    /// `‖K*K − I‖`: zero iff `C_Γ` is isometric.
    pub fn isometry_residual(&self) -> f64 {
        let n = self.matrix.nrows();
        linalg::op_norm(&(self.matrix.adjoint() * &self.matrix - linalg::identity(n)))
    }

    /// `‖K·conj(K) − I‖`: zero iff `C_Γ² = id`.
    pub fn involution_residual(&self) -> f64 {
        let n = self.matrix.nrows();
        linalg::op_norm(&(&self.matrix * conj_mat(&self.matrix) - linalg::identity(n)))
    }
}

/// Samples of `Θ(z) z̄ Γ f(z)` at each node, for `f` given by coordinates.
fn cgamma_samples(
    theta: &MatrixInnerFunction,
    gamma: &ConjugationSpec,
    grid: &BoundaryGrid,
) -> Result<Vec<(CMat, CMat)>> {
    let r = theta.realization();
    let eval = oracle::theta_evaluator(theta);
    grid.nodes()
        .iter()
        .map(|&z| {
            let out = r.output_map(z)?;
            // Column j is C_Γ f_{e_j} at z; for general x use conj(x).
            let image = eval(z)? * gamma.matrix() * conj_mat(&out) * z.conj();
            Ok((out, image))
        })
        .collect()
}

/// Like [`cgamma_projection`], but fails with `NotInKTheta` when the images
/// leave `K_Θ`.
pub fn cgamma_matrix(theta: &MatrixInnerFunction, gamma: &ConjugationSpec, grid: &BoundaryGrid) -> Result<CGamma> {
    let k = cgamma_projection(theta, gamma, grid)?;
    if !(k.in_space_residual < IN_SPACE_TOL) {
        return Err(Error::NotInKTheta { residual: k.in_space_residual });
    }
    Ok(k)
}

/// Projects the boundary values of `C_Γ f_j` onto `K_Θ` for every basis
/// vector, and records how far they were from `K_Θ`.
pub fn cgamma_projection(theta: &MatrixInnerFunction, gamma: &ConjugationSpec, grid: &BoundaryGrid) -> Result<CGamma> {
    if gamma.dim() != theta.dim() {
        return Err(Error::DimensionMismatch("Γ and Θ differ in dimension".into()));
    }
    let n = theta.degree();
    let grid = &BoundaryGrid::resolving_for(grid, &[theta])?;
    let m = c(grid.size() as f64, 0.0);
    let samples = cgamma_samples(theta, gamma, grid)?;
    let mut k = CMat::zeros(n, n);
    for (out, image) in &samples {
        k += out.adjoint() * image;
    }
    k /= m;
    let mut err = vec![0.0; n];
    for (out, image) in &samples {
        let diff = image - out * &k;
        for (j, col) in diff.column_iter().enumerate() {
            err[j] += col.norm_squared();
        }
    }
    let in_space_residual = err.iter().map(|e| (e / grid.size() as f64).sqrt()).fold(0.0, f64::max);
    Ok(CGamma { owner: theta.fingerprint().to_owned(), matrix: k, in_space_residual })
}

/// `C_Γ f` for a single vector, by projecting its own boundary samples.
pub fn cgamma_map(
    theta: &MatrixInnerFunction,
    gamma: &ConjugationSpec,
    f: &ModelVector,
    grid: &BoundaryGrid,
) -> Result<ModelVector> {
    if !f.belongs_to(theta) {
        return Err(Error::DimensionMismatch("vector does not belong to Θ".into()));
    }
    let grid = &BoundaryGrid::resolving_for(grid, &[theta])?;
    let r = theta.realization();
    let eval = oracle::theta_evaluator(theta);
    let n = theta.degree();
    let mut x = CVec::zeros(n);
    let mut values = Vec::with_capacity(grid.size());
    for &z in grid.nodes() {
        let out = r.output_map(z)?;
        let g = eval(z)? * gamma.apply(&(&out * f.coords())) * z.conj();
        x += out.adjoint() * &g;
        values.push((out, g));
    }
    x /= c(grid.size() as f64, 0.0);
    let dist2: f64 = values.iter().map(|(out, g)| (g - out * &x).norm_squared()).sum::<f64>() / grid.size() as f64;
    let residual = dist2.sqrt() / f.norm().max(f64::MIN_POSITIVE);
    if !(residual < IN_SPACE_TOL) {
        return Err(Error::NotInKTheta { residual });
    }
    ModelVector::new(theta, x)
}

/// Worst relative `‖C(αf + g) − (ᾱC f + C g)‖` over random trials, each
/// image computed independently from boundary samples.
pub fn conjugate_linearity_residual(
    theta: &MatrixInnerFunction,
    gamma: &ConjugationSpec,
    grid: &BoundaryGrid,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let n = theta.degree();
    let mut worst: f64 = 0.0;
    for trial in 0..trials as u64 {
        let mut rng = sampling::trial_rng(seed, trial);
        let x = sampling::gaussian_vec(&mut rng, n);
        let y = sampling::gaussian_vec(&mut rng, n);
        let alpha = sampling::gaussian_vec(&mut rng, 1)[0];
        let f = ModelVector::new(theta, x.clone())?;
        let g = ModelVector::new(theta, y.clone())?;
        let combo = ModelVector::new(theta, &x * alpha + &y)?;
        let lhs = cgamma_map(theta, gamma, &combo, grid)?;
        let rhs = cgamma_map(theta, gamma, &f, grid)?.coords() * alpha.conj() + cgamma_map(theta, gamma, &g, grid)?.coords();
        worst = worst.max(linalg::vec_norm(&(lhs.coords() - rhs)) / combo.norm());
    }
    Ok(worst)
}

/// `max ‖J_W C_Γ f − C′_Γ J_W f‖ / ‖f‖` over random `f ∈ K_Θ`.
pub fn crofoot_conjugation_residual(
    pair: &CrofootPair,
    gamma: &ConjugationSpec,
    grid: &BoundaryGrid,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let compat = compatibility_residuals(pair.theta(), pair.contraction(), gamma, grid)?;
    if !compat.hypotheses_hold(COMPATIBILITY_TOL) {
        return Err(Error::IncompatibleInputs(format!(
            "‖ΓΘΓ − Θ*‖ = {:.3e}, ‖ΓW* − WΓ‖ = {:.3e}",
            compat.theta_symmetry, compat.contraction
        )));
    }
    let k = cgamma_matrix(pair.theta(), gamma, grid)?;
    let kp = cgamma_matrix(pair.theta_prime(), gamma, grid)?;
    Ok(intertwining_residual(pair, &k, &kp, trials, seed))
}

/// `max ‖T K conj(x) − K′ conj(T x)‖ / ‖x‖`, with `T` the coordinate matrix of
/// `J_W`, for precomputed `C_Γ` on both sides.
pub fn intertwining_residual(pair: &CrofootPair, k: &CGamma, kp: &CGamma, trials: usize, seed: u64) -> f64 {
    let t = pair.transfer_matrix();
    let n = pair.theta().degree();
    let mut worst: f64 = 0.0;
    for trial in 0..trials as u64 {
        let mut rng = sampling::trial_rng(seed, trial);
        let x = sampling::gaussian_vec(&mut rng, n);
        let lhs = t * (k.matrix() * conj_vec(&x));
        let rhs = kp.matrix() * conj_vec(&(t * &x));
        worst = worst.max(linalg::vec_norm(&(lhs - rhs)) / linalg::vec_norm(&x));
    }
    worst
}

/// Entrywise-conjugation compatible contraction: the symmetric part of `g`
/// rescaled to norm `cap`.
pub fn symmetric_contraction(g: &CMat, cap: f64) -> Result<StrictContraction> {
    let sym = (g + g.transpose()) * c(0.5, 0.0);
    let norm = linalg::op_norm(&sym);
    StrictContraction::new(sym * Complex64::new(cap / norm.max(f64::MIN_POSITIVE), 0.0))
}
