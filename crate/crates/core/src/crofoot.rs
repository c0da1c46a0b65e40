//! The generalized Crofoot transform.
//!
//! For a pure inner `Θ` and a strict contraction `W`,
//!
//! ```text
//! Θ′(z) = −W + D_{W*} (I − Θ(z)W*)^{-1} Θ(z) D_W
//! J_W f = D_{W*} (I − ΘW*)^{-1} f
//! ```
//!
//! `Θ′` is realized in closed form by closing the loop `v = u + W*y` around
//! the realization of `Θ`:
//!
//! ```text
//! A′ = A + BW*(I − DW*)^{-1}C      B′ = B(I − W*D)^{-1}D_W
//! C′ = D_{W*}(I − DW*)^{-1}C       D′ = −W + D_{W*}(I − DW*)^{-1}D D_W
//! ```
//!
//! With this choice the state of `Θ` and the state of `Θ′` share coordinates
//! and `J_W` is the identity matrix between them. That fact is checked
//! pointwise when a pair is built and by quadrature in the test suites.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::inner_function::{InnerOptions, MatrixInnerFunction, UnitaryRealization};
use crate::linalg::{self, CMat, CVec};
use crate::model_space::{self, ModelVector};
use crate::oracle::{self, BoundaryGrid};
use crate::sampling;

/// `‖W‖` must stay at least this far below one.
pub const STRICTNESS_MARGIN: f64 = 1e-6;
pub const PAIR_REALIZATION_TOL: f64 = 1e-8;
pub const PAIR_POINTWISE_TOL: f64 = 1e-10;
pub const VALIDATION_POINTS: usize = 32;
const VALIDATION_SEED: u64 = 0x5eed_c40f;

#[derive(Debug, Clone, PartialEq)]
pub struct StrictContraction {
    w: CMat,
    norm: f64,
}

impl StrictContraction {
    pub fn new(w: CMat) -> Result<Self> {
        if w.nrows() != w.ncols() || w.nrows() == 0 {
            return Err(Error::DimensionMismatch("W must be a non-empty square matrix".into()));
        }
        let norm = linalg::op_norm(&w);
        if !(norm <= 1.0 - STRICTNESS_MARGIN) {
            return Err(Error::NotStrict { norm });
        }
        Ok(Self { w, norm })
    }

    pub fn matrix(&self) -> &CMat {
        &self.w
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// `1 − ‖W‖`.
    pub fn strictness(&self) -> f64 {
        1.0 - self.norm
    }

    pub fn dim(&self) -> usize {
        self.w.nrows()
    }
}

/// `D_W = (I − W*W)^{1/2}` and `D_{W*} = (I − WW*)^{1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectPair {
    pub d_w: CMat,
    pub d_wstar: CMat,
}

impl DefectPair {
    /// Max of the squaring residuals and the intertwining `W D_W = D_{W*} W`.
    pub fn residual(&self, w: &StrictContraction) -> f64 {
        let w = w.matrix();
        let id = linalg::identity(w.nrows());
        let sq = linalg::op_norm(&(&self.d_w * &self.d_w - (&id - w.adjoint() * w)));
        let sq_star = linalg::op_norm(&(&self.d_wstar * &self.d_wstar - (&id - w * w.adjoint())));
        let inter = linalg::op_norm(&(w * &self.d_w - &self.d_wstar * w));
        sq.max(sq_star).max(inter)
    }
}

pub fn defect_operators(w: &StrictContraction) -> DefectPair {
    let m = w.matrix();
    let id = linalg::identity(m.nrows());
    DefectPair {
        d_w: linalg::psd_sqrt(&(&id - m.adjoint() * m)),
        d_wstar: linalg::psd_sqrt(&(&id - m * m.adjoint())),
    }
}

/// Numbers recorded while validating a freshly built pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairValidation {
    /// Max deviation between the feedback realization and the pointwise formula for `Θ′`.
    pub formula_residual: f64,
    /// Max deviation between `J_W` applied pointwise and the identity in coordinates.
    pub transfer_residual: f64,
    pub realization_unitarity: f64,
}

/// `(Θ, W)` together with `Θ′` and the coordinate matrix of `J_W`.
#[derive(Debug, Clone)]
pub struct CrofootPair {
    theta: MatrixInnerFunction,
    w: StrictContraction,
    defects: DefectPair,
    theta_prime: MatrixInnerFunction,
    transfer: CMat,
    validation: PairValidation,
}

/// Builds `Θ′` and validates it against the pointwise formula.
pub fn crofoot_theta(theta: &MatrixInnerFunction, w: &StrictContraction) -> Result<CrofootPair> {
    let d = theta.dim();
    if w.dim() != d {
        return Err(Error::DimensionMismatch(format!("W is {}×{}, Θ is {d}×{d}", w.dim(), w.dim())));
    }
    let defects = defect_operators(w);
    let r = theta.realization();
    let wm = w.matrix();
    let w_adj = wm.adjoint();
    let id = linalg::identity(d);
    // Both inverses exist because ‖D‖ ≤ 1 and ‖W‖ < 1.
    let left = linalg::inverse(&(&id - &r.d * &w_adj)).map_err(|_| Error::FeedbackSingular)?;
    let right = linalg::inverse(&(&id - &w_adj * &r.d)).map_err(|_| Error::FeedbackSingular)?;

    let a = &r.a + &r.b * &w_adj * &left * &r.c;
    let b = &r.b * &right * &defects.d_w;
    let c = &defects.d_wstar * &left * &r.c;
    let dd = -wm + &defects.d_wstar * &left * &r.d * &defects.d_w;
    let realization = UnitaryRealization::new(a, b, c, dd)?;
    let realization_unitarity = realization.unitarity_residual();

    let opts = InnerOptions { tol: PAIR_REALIZATION_TOL, ..InnerOptions::default() };
    let theta_prime = MatrixInnerFunction::from_realization(realization, &opts)
        .map_err(|e| Error::PurityViolation(format!("Θ′ failed validation: {e}")))?;

    let mut pair = CrofootPair {
        theta: theta.clone(),
        w: w.clone(),
        defects,
        theta_prime,
        transfer: linalg::identity(theta.degree()),
        validation: PairValidation {
            formula_residual: 0.0,
            transfer_residual: 0.0,
            realization_unitarity,
        },
    };
    let points = sampling::validation_points(VALIDATION_POINTS, VALIDATION_SEED);
    pair.validation.formula_residual = pair.formula_residual(&points)?;
    pair.validation.transfer_residual = pair.pointwise_transfer_residual(&points)?;
    if !(pair.validation.formula_residual <= PAIR_POINTWISE_TOL) {
        return Err(Error::PurityViolation(format!(
            "realization of Θ′ deviates from the pointwise formula by {:.3e}",
            pair.validation.formula_residual
        )));
    }
    if !(pair.validation.transfer_residual <= PAIR_POINTWISE_TOL) {
        return Err(Error::PurityViolation(format!(
            "J_W is not the coordinate identity (deviation {:.3e})",
            pair.validation.transfer_residual
        )));
    }
    Ok(pair)
}

impl CrofootPair {
    pub fn theta(&self) -> &MatrixInnerFunction {
        &self.theta
    }

    pub fn theta_prime(&self) -> &MatrixInnerFunction {
        &self.theta_prime
    }

    pub fn contraction(&self) -> &StrictContraction {
        &self.w
    }

    pub fn defects(&self) -> &DefectPair {
        &self.defects
    }

    /// Matrix of `J_W` from `K_Θ` coordinates to `K_Θ′` coordinates.
    pub fn transfer_matrix(&self) -> &CMat {
        &self.transfer
    }

    pub fn validation(&self) -> &PairValidation {
        &self.validation
    }

    /// `Θ′(z)` straight from its defining formula, evaluating `Θ` by its
    /// factor product when available.
    pub fn theta_prime_pointwise(&self, z: Complex64) -> Result<CMat> {
        let t = oracle::theta_evaluator(&self.theta)(z)?;
        let wm = self.w.matrix();
        let id = linalg::identity(self.theta.dim());
        let inv = linalg::inverse(&(&id - &t * wm.adjoint()))?;
        Ok(-wm + &self.defects.d_wstar * inv * t * &self.defects.d_w)
    }

    /// Multiplier of `J_W` at `z`: `D_{W*}(I − Θ(z)W*)^{-1}`.
    pub fn forward_multiplier(&self, z: Complex64) -> Result<CMat> {
        let t = self.theta.evaluate(z)?;
        let id = linalg::identity(self.theta.dim());
        Ok(&self.defects.d_wstar * linalg::inverse(&(&id - t * self.w.matrix().adjoint()))?)
    }

    /// Multiplier of `J′_W` at `z`: `D_{W*}(I + Θ′(z)W*)^{-1}`.
    pub fn inverse_multiplier(&self, z: Complex64) -> Result<CMat> {
        let t = self.theta_prime.evaluate(z)?;
        let id = linalg::identity(self.theta.dim());
        Ok(&self.defects.d_wstar * linalg::inverse(&(&id + t * self.w.matrix().adjoint()))?)
    }

    fn formula_residual(&self, points: &[Complex64]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &z in points {
            let direct = self.theta_prime_pointwise(z)?;
            let realized = self.theta_prime.evaluate(z)?;
            worst = worst.max(linalg::op_norm(&(direct - realized)));
        }
        Ok(worst)
    }

    fn pointwise_transfer_residual(&self, points: &[Complex64]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &z in points {
            let mapped = self.forward_multiplier(z)? * self.theta.realization().output_map(z)?;
            let target = self.theta_prime.realization().output_map(z)? * &self.transfer;
            worst = worst.max(linalg::op_norm(&(mapped - target)));
        }
        Ok(worst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// `J_W f` for `f ∈ K_Θ`, or `J_W^{-1} g` for `g ∈ K_Θ′`.
pub fn crofoot_map(pair: &CrofootPair, f: &ModelVector, direction: Direction) -> Result<ModelVector> {
    let (from, to, matrix) = match direction {
        Direction::Forward => (&pair.theta, &pair.theta_prime, pair.transfer.clone()),
        Direction::Inverse => (&pair.theta_prime, &pair.theta, pair.transfer.adjoint()),
    };
    if !f.belongs_to(from) {
        return Err(Error::DimensionMismatch(format!(
            "vector belongs to {}, expected {}",
            f.owner(),
            from.fingerprint()
        )));
    }
    Ok(ModelVector::with_owner(to.fingerprint(), matrix * f.coords()))
}

/// `Θ` rebuilt pointwise from `Θ′` and `W`.
#[derive(Debug, Clone)]
pub struct RecoveredTheta {
    theta_prime: MatrixInnerFunction,
    w: StrictContraction,
    defects: DefectPair,
}

pub fn recover_theta(theta_prime: &MatrixInnerFunction, w: &StrictContraction) -> RecoveredTheta {
    RecoveredTheta {
        theta_prime: theta_prime.clone(),
        w: w.clone(),
        defects: defect_operators(w),
    }
}

impl RecoveredTheta {
    /// `W + D_{W*}(I + Θ′(z)W*)^{-1}Θ′(z)D_W`.
    pub fn evaluate(&self, z: Complex64) -> Result<CMat> {
        let t = self.theta_prime.evaluate(z)?;
        let wm = self.w.matrix();
        let id = linalg::identity(wm.nrows());
        let inv = linalg::inverse(&(&id + &t * wm.adjoint()))?;
        Ok(wm + &self.defects.d_wstar * inv * t * &self.defects.d_w)
    }
}

/// How far `J_W` is from an isometry, measured two ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitarityReport {
    /// Max `|⟨J_W f, J_W g⟩ − ⟨f, g⟩|` over random pairs, left side by quadrature.
    pub inner_product: f64,
    /// Max `‖J′_W J_W f − f‖` pointwise plus the coordinate round trip.
    pub round_trip: f64,
    /// `‖M − T‖` where `M_ij = ⟨J_W f_j, f′_i⟩` by quadrature and `T` the transfer matrix.
    pub coordinate_matrix: f64,
}

pub fn unitarity_report(pair: &CrofootPair, pairs: usize, seed: u64, grid: &BoundaryGrid) -> Result<UnitarityReport> {
    let grid = &BoundaryGrid::resolving_for(grid, &[&pair.theta, &pair.theta_prime])?;
    let n = pair.theta.degree();
    let m = grid.size() as f64;
    let mut gram = CMat::zeros(n, n);
    let mut cross = CMat::zeros(n, n);
    for &z in grid.nodes() {
        let mapped = pair.forward_multiplier(z)? * pair.theta.realization().output_map(z)?;
        let target = pair.theta_prime.realization().output_map(z)?;
        gram += mapped.adjoint() * &mapped;
        cross += target.adjoint() * &mapped;
    }
    gram /= linalg::c(m, 0.0);
    cross /= linalg::c(m, 0.0);

    let mut inner_product: f64 = 0.0;
    let mut round_trip: f64 = 0.0;
    for trial in 0..pairs as u64 {
        let mut rng = sampling::trial_rng(seed, trial);
        let x = sampling::gaussian_vec(&mut rng, n);
        let y = sampling::gaussian_vec(&mut rng, n);
        let scale = linalg::vec_norm(&x) * linalg::vec_norm(&y);
        let quad = linalg::inner(&(&gram * &x), &y);
        let exact = linalg::inner(&x, &y);
        inner_product = inner_product.max((quad - exact).norm() / scale);

        let f = ModelVector::new(&pair.theta, x.clone())?;
        let back = crofoot_map(pair, &crofoot_map(pair, &f, Direction::Forward)?, Direction::Inverse)?;
        round_trip = round_trip.max(linalg::vec_norm(&(back.coords() - &x)) / linalg::vec_norm(&x));

        let z = sampling::disk_point(&mut rng, 1.0);
        let fz = pair.theta.realization().output_map(z)? * &x;
        let gz = pair.forward_multiplier(z)? * &fz;
        let again = pair.inverse_multiplier(z)? * gz;
        round_trip = round_trip.max(linalg::vec_norm(&(again - &fz)) / linalg::vec_norm(&x));
    }
    let coordinate_matrix = linalg::op_norm(&(cross - &pair.transfer));
    Ok(UnitarityReport { inner_product, round_trip, coordinate_matrix })
}

/// Kernel transport: `J_W(k_λ^Θ (I − WΘ(λ)*)^{-1} D_{W*} y) = k_λ^{Θ′} y`
/// and the analogue for `k̃_λ` with `(I − W*Θ(λ))^{-1} D_W y`. Returns the
/// worst relative deviation, in coordinates and pointwise.
pub fn kernel_mapping_residual(pair: &CrofootPair, trials: usize, seed: u64) -> Result<f64> {
    let d = pair.theta.dim();
    let id = linalg::identity(d);
    let wm = pair.w.matrix();
    let dw = &pair.defects.d_w;
    let dws = &pair.defects.d_wstar;
    let mut worst: f64 = 0.0;
    for trial in 0..trials as u64 {
        let mut rng = sampling::trial_rng(seed, trial);
        let lambda = sampling::disk_point(&mut rng, 0.9);
        let y = sampling::gaussian_vec(&mut rng, d);
        let ycol = y.clone();
        let t_lambda = pair.theta.evaluate(lambda)?;

        let v = linalg::solve(&(&id - wm * t_lambda.adjoint()), &to_col(&(dws * &ycol)))?.column(0).into_owned();
        let vt = linalg::solve(&(&id - wm.adjoint() * &t_lambda), &to_col(&(dw * &ycol)))?.column(0).into_owned();

        let (k_pre, _) = model_space::kernel_vectors(&pair.theta, lambda, &v)?;
        let (_, kt_pre) = model_space::kernel_vectors(&pair.theta, lambda, &vt)?;
        let (k_target, kt_target) = model_space::kernel_vectors(&pair.theta_prime, lambda, &y)?;
        let k_img = crofoot_map(pair, &k_pre, Direction::Forward)?;
        let kt_img = crofoot_map(pair, &kt_pre, Direction::Forward)?;
        let scale = linalg::vec_norm(&y);
        worst = worst.max(linalg::vec_norm(&(k_img.coords() - k_target.coords())) / scale);
        worst = worst.max(linalg::vec_norm(&(kt_img.coords() - kt_target.coords())) / scale);

        // Pointwise, from the closed-form kernels and the pointwise formula for Θ′.
        let z = sampling::circle_point(&mut rng);
        let tz = oracle::theta_evaluator(&pair.theta)(z)?;
        let tpz = pair.theta_prime_pointwise(z)?;
        let tpl = pair.theta_prime_pointwise(lambda)?;
        let mult = pair.forward_multiplier(z)?;
        let scale_k = linalg::c(1.0, 0.0) / (linalg::ONE - lambda.conj() * z);
        let lhs = &mult * ((&id - &tz * t_lambda.adjoint()) * &v) * scale_k;
        let rhs = (&id - &tpz * tpl.adjoint()) * &y * scale_k;
        worst = worst.max(linalg::vec_norm(&(lhs - rhs)) / scale);
        let scale_kt = linalg::ONE / (z - lambda);
        let lhs = &mult * ((&tz - &t_lambda) * &vt) * scale_kt;
        let rhs = (&tpz - &tpl) * &y * scale_kt;
        worst = worst.max(linalg::vec_norm(&(lhs - rhs)) / scale);
    }
    Ok(worst)
}

fn to_col(v: &CVec) -> CMat {
    CMat::from_column_slice(v.len(), 1, v.as_slice())
}

/// Residuals for the backward-shift relation, the forward-shift commutation
/// on `𝒟_*^⊥`, and the coincidence of `𝒟_*` and `𝒟′_*` under `J_W`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntertwiningResiduals {
    /// `S*_{Θ′} J_W f = J_W S*_Θ f + S*_{Θ′}(J_W f(0))`, pointwise.
    pub backward_shift: f64,
    /// `S_{Θ′} J_W f = J_W S_Θ f` on `𝒟_*^⊥`, in coordinates and pointwise.
    pub forward_shift: f64,
    /// Largest sine of a principal angle between `range B` and `range B′`.
    pub defect_star_angle: f64,
    /// Same for `range C*` and `range C′*` (the spaces `𝒟` and `𝒟′`).
    pub defect_angle: f64,
}

pub fn intertwining_residuals(pair: &CrofootPair, trials: usize, seed: u64) -> Result<IntertwiningResiduals> {
    let r = pair.theta.realization();
    let rp = pair.theta_prime.realization();
    let n = pair.theta.degree();
    let bases = model_space::defect_bases(&pair.theta);
    let bases_p = model_space::defect_bases(&pair.theta_prime);
    let mut backward: f64 = 0.0;
    let mut forward: f64 = 0.0;

    for trial in 0..trials as u64 {
        let mut rng = sampling::trial_rng(seed, trial);
        let x = sampling::gaussian_vec(&mut rng, n);
        let scale = linalg::vec_norm(&x);
        let z = sampling::annulus_point(&mut rng, 0.1, 0.95);

        // LHS through the realization of Θ′ (coordinates of J_W f are T x).
        let jx = &pair.transfer * &x;
        let lhs = rp.output_map(z)? * (&rp.a * &jx);
        // RHS through pointwise multipliers on K_Θ.
        let mult_z = pair.forward_multiplier(z)?;
        let mult_0 = pair.forward_multiplier(linalg::ZERO)?;
        let shifted = r.output_map(z)? * (&r.a * &x);
        let f0 = &r.c * &x;
        let h_z = &mult_z * &f0;
        let h_0 = &mult_0 * &f0;
        let rhs = &mult_z * shifted + (h_z - h_0) / z;
        backward = backward.max(linalg::vec_norm(&(lhs - rhs)) / scale);

        // Forward shift on 𝒟_*^⊥.
        if bases.defect_star_perp.ncols() > 0 {
            let coeffs = sampling::gaussian_vec(&mut rng, bases.defect_star_perp.ncols());
            let xp = &bases.defect_star_perp * coeffs;
            let scale = linalg::vec_norm(&xp);
            let coord_lhs = rp.a.adjoint() * (&pair.transfer * &xp);
            let coord_rhs = &pair.transfer * (r.a.adjoint() * &xp);
            forward = forward.max(linalg::vec_norm(&(&coord_lhs - &coord_rhs)) / scale);
            let point_lhs = rp.output_map(z)? * coord_lhs;
            let point_rhs = &mult_z * (r.output_map(z)? * (r.a.adjoint() * &xp));
            forward = forward.max(linalg::vec_norm(&(point_lhs - point_rhs)) / scale);
        }
    }
    // J_W carries range B onto range B′ through the transfer matrix.
    let image = &pair.transfer * &bases.defect_star;
    let image_d = &pair.transfer * &bases.defect;
    let defect_star_angle = max_sine(&bases_p.defect_star, &orthonormalize(&image));
    let defect_angle = max_sine(&bases_p.defect, &orthonormalize(&image_d));
    Ok(IntertwiningResiduals { backward_shift: backward, forward_shift: forward, defect_star_angle, defect_angle })
}

fn orthonormalize(m: &CMat) -> CMat {
    linalg::range_and_complement(m, model_space::DEFECT_RANK_TOL).0
}

fn max_sine(a: &CMat, b: &CMat) -> f64 {
    let forward = linalg::principal_angle_sines(a, b);
    let backward = linalg::principal_angle_sines(b, a);
    forward.into_iter().chain(backward).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inner_function::{assemble_inner, random_inner, ElementaryFactor, DEFAULT_RADIUS_CAP};
    use crate::linalg::{c, ONE, ZERO};

    fn shift(d: usize, axis: usize) -> ElementaryFactor {
        let mut u = CVec::zeros(d);
        u[axis] = ONE;
        ElementaryFactor::new(ZERO, u).unwrap()
    }

    fn z_identity() -> MatrixInnerFunction {
        assemble_inner(linalg::identity(2), vec![shift(2, 0), shift(2, 1)]).unwrap()
    }

    fn z_squared() -> MatrixInnerFunction {
        assemble_inner(linalg::identity(1), vec![shift(1, 0), shift(1, 0)]).unwrap()
    }

    fn nilpotent_w() -> StrictContraction {
        StrictContraction::new(CMat::from_row_slice(2, 2, &[ZERO, c(0.5, 0.0), ZERO, ZERO])).unwrap()
    }

    fn scalar_w(w: Complex64) -> StrictContraction {
        StrictContraction::new(CMat::from_element(1, 1, w)).unwrap()
    }

    #[test]
    fn defect_operator_examples() {
        let zero = StrictContraction::new(CMat::zeros(2, 2)).unwrap();
        let dp = defect_operators(&zero);
        assert!(linalg::op_norm(&(&dp.d_w - linalg::identity(2))) < 1e-15);
        assert!(linalg::op_norm(&(&dp.d_wstar - linalg::identity(2))) < 1e-15);

        let w = nilpotent_w();
        let dp = defect_operators(&w);
        let h = 3f64.sqrt() / 2.0;
        let expect_dw = CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, c(h, 0.0)]);
        let expect_dws = CMat::from_row_slice(2, 2, &[c(h, 0.0), ZERO, ZERO, ONE]);
        assert!(linalg::op_norm(&(&dp.d_w - expect_dw)) < 1e-15);
        assert!(linalg::op_norm(&(&dp.d_wstar - expect_dws)) < 1e-15);
        assert!(dp.residual(&w) < 1e-15);

        let half = StrictContraction::new(linalg::identity(2) * c(0.5, 0.0)).unwrap();
        let dp = defect_operators(&half);
        assert!(linalg::op_norm(&(&dp.d_w - linalg::identity(2) * c(h, 0.0))) < 1e-15);
        assert!(linalg::op_norm(&(&dp.d_wstar - linalg::identity(2) * c(h, 0.0))) < 1e-15);
    }

    #[test]
    fn non_strict_rejected() {
        let err = StrictContraction::new(CMat::from_element(1, 1, c(1.2, 0.0))).unwrap_err();
        assert!(matches!(err, Error::NotStrict { norm } if (norm - 1.2).abs() < 1e-15));
        assert!(StrictContraction::new(CMat::from_element(1, 1, c(1.0 - 1e-7, 0.0))).is_err());
    }

    #[test]
    fn zero_contraction_is_identity_transform() {
        let theta = random_inner(2, 3, 7, false, DEFAULT_RADIUS_CAP).unwrap();
        let pair = crofoot_theta(&theta, &StrictContraction::new(CMat::zeros(2, 2)).unwrap()).unwrap();
        assert_eq!(pair.theta_prime().realization(), theta.realization());
        let f = ModelVector::new(&theta, CVec::from_vec(vec![ONE, c(0.0, 2.0), c(-1.0, 0.5)])).unwrap();
        let g = crofoot_map(&pair, &f, Direction::Forward).unwrap();
        assert_eq!(g.coords(), f.coords());
        let rec = recover_theta(pair.theta_prime(), pair.contraction());
        let z = c(0.2, -0.6);
        assert!(linalg::op_norm(&(rec.evaluate(z).unwrap() - theta.evaluate(z).unwrap())) < 1e-15);
        assert!(kernel_mapping_residual(&pair, 4, 1).unwrap() < 1e-13);
        let ir = intertwining_residuals(&pair, 4, 1).unwrap();
        assert!(ir.backward_shift < 1e-13 && ir.forward_shift < 1e-13 && ir.defect_star_angle < 1e-13);
    }

    #[test]
    fn scalar_transform_is_mobius() {
        let theta = random_inner(1, 3, 5, false, DEFAULT_RADIUS_CAP).unwrap();
        let w = c(0.3, -0.4);
        let pair = crofoot_theta(&theta, &scalar_w(w)).unwrap();
        for z in sampling::validation_points(16, 3) {
            let t = theta.evaluate(z).unwrap()[(0, 0)];
            let expected = (t - w) / (ONE - w.conj() * t);
            assert!((pair.theta_prime().evaluate(z).unwrap()[(0, 0)] - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn shift_with_nilpotent_w() {
        let pair = crofoot_theta(&z_identity(), &nilpotent_w()).unwrap();
        let h = 3f64.sqrt() / 2.0;
        for z in [c(0.3, 0.2), c(-0.7, 0.1), Complex64::from_polar(1.0, 2.0)] {
            let expected = CMat::from_row_slice(2, 2, &[z * h, c(-0.5, 0.0), z * z * 0.5, z * h]);
            let got = pair.theta_prime().evaluate(z).unwrap();
            assert!(linalg::op_norm(&(got - expected)) < 1e-14);
        }
        // J_W of the constant e1 is (√3/2, z/2)ᵀ with unit norm.
        let theta = pair.theta();
        let e1 = model_space::project(
            theta,
            &model_space::VectorPolynomial::new(vec![CVec::from_vec(vec![ONE, ZERO])]),
        )
        .unwrap();
        let g = crofoot_map(&pair, &e1, Direction::Forward).unwrap();
        assert!((g.norm() - 1.0).abs() < 1e-15);
        let z = c(0.4, -0.3);
        let gz = model_space::evaluate_vector(pair.theta_prime(), &g, z).unwrap();
        assert!((gz[0] - c(h, 0.0)).norm() < 1e-14);
        assert!((gz[1] - z * 0.5).norm() < 1e-14);
    }

    #[test]
    fn z_squared_with_half() {
        let theta = z_squared();
        let pair = crofoot_theta(&theta, &scalar_w(c(0.5, 0.0))).unwrap();
        // f = z has coordinates e2 in the series basis {1, z}.
        let f = ModelVector::new(&theta, CVec::from_vec(vec![ZERO, ONE])).unwrap();
        let g = crofoot_map(&pair, &f, Direction::Forward).unwrap();
        let gz = model_space::evaluate_vector(pair.theta_prime(), &g, c(0.5, 0.0)).unwrap();
        let expected = 3f64.sqrt() / 2.0 * 4.0 / 7.0;
        assert!((gz[0] - c(expected, 0.0)).norm() < 1e-14);
        let rec = recover_theta(pair.theta_prime(), pair.contraction());
        let z = c(0.1, 0.8);
        assert!((rec.evaluate(z).unwrap()[(0, 0)] - z * z).norm() < 1e-14);
    }

    #[test]
    fn kernel_example_at_origin() {
        let pair = crofoot_theta(&z_identity(), &nilpotent_w()).unwrap();
        let e2 = CVec::from_vec(vec![ZERO, ONE]);
        // pre-image k_0^Θ (I − WΘ(0)*)^{-1} D_{W*} e2 = D_{W*} e2 = e2 (constant)
        let (pre, _) = model_space::kernel_vectors(pair.theta(), ZERO, &e2).unwrap();
        let img = crofoot_map(&pair, &pre, Direction::Forward).unwrap();
        let (target, _) = model_space::kernel_vectors(pair.theta_prime(), ZERO, &e2).unwrap();
        assert!(linalg::vec_norm(&(img.coords() - target.coords())) < 1e-15);
    }

    #[test]
    fn seeded_pair_residuals() {
        let theta = random_inner(2, 3, 7, false, DEFAULT_RADIUS_CAP).unwrap();
        let mut rng = sampling::trial_rng(99, 0);
        let g = sampling::gaussian_mat(&mut rng, 2, 2);
        let w = StrictContraction::new(&g * c(0.6 / linalg::op_norm(&g), 0.0)).unwrap();
        let pair = crofoot_theta(&theta, &w).unwrap();
        let rec = recover_theta(pair.theta_prime(), &w);
        for z in sampling::validation_points(32, 4) {
            assert!(linalg::op_norm(&(rec.evaluate(z).unwrap() - theta.evaluate(z).unwrap())) < 1e-10);
        }
        assert!(kernel_mapping_residual(&pair, 16, 2).unwrap() < 1e-9);
        let u = unitarity_report(&pair, 50, 3, &BoundaryGrid::new(1024).unwrap()).unwrap();
        assert!(u.inner_product < 1e-10 && u.round_trip < 1e-10 && u.coordinate_matrix < 1e-10, "{u:?}");
    }

    #[test]
    fn wrong_side_rejected() {
        let theta = random_inner(2, 3, 7, false, DEFAULT_RADIUS_CAP).unwrap();
        let pair = crofoot_theta(&theta, &nilpotent_w()).unwrap();
        let f = ModelVector::new(&theta, CVec::from_vec(vec![ONE, ZERO, ZERO])).unwrap();
        assert!(matches!(crofoot_map(&pair, &f, Direction::Inverse), Err(Error::DimensionMismatch(_))));
    }
}
