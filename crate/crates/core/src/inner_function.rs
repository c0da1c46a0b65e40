//! Pure matrix-valued inner functions built from Blaschke–Potapov factors.
//!
//! A function is stored both as its factor list `U0 · F_1(z) ⋯ F_n(z)` and as
//! a unitary state-space realization `Θ(z) = D + zC(I − zA)^{-1}B`. The
//! realization is what every other module works with; the factor list is
//! kept so the quadrature oracle has an evaluation path that never touches
//! `(A, B, C, D)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec, ONE};

pub const DEFAULT_RADIUS_CAP: f64 = 0.95;
pub const DEFAULT_PURITY_MARGIN: f64 = 1e-8;
pub const CONSTRUCTION_TOL: f64 = 1e-10;
const DIRECTION_TOL: f64 = 1e-12;
const RANDOM_RETRIES: usize = 64;
const BOUNDARY_CHECK_NODES: usize = 64;

/// Validation knobs used when assembling an inner function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerOptions {
    pub radius_cap: f64,
    pub purity_margin: f64,
    pub tol: f64,
}

impl Default for InnerOptions {
    fn default() -> Self {
        Self {
            radius_cap: DEFAULT_RADIUS_CAP,
            purity_margin: DEFAULT_PURITY_MARGIN,
            tol: CONSTRUCTION_TOL,
        }
    }
}

/// `z ↦ (I − uu*) + b_a(z) uu*` with `b_a(z) = (z − a)/(1 − āz)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementaryFactor {
    zero: Complex64,
    direction: CVec,
}

impl ElementaryFactor {
    pub fn new(zero: Complex64, direction: CVec) -> Result<Self> {
        if !(zero.norm() < 1.0) {
            return Err(Error::FactorInvalid(format!("zero {zero} is not inside the unit disk")));
        }
        if direction.is_empty() {
            return Err(Error::FactorInvalid("empty direction vector".into()));
        }
        let norm = linalg::vec_norm(&direction);
        if (norm - 1.0).abs() > DIRECTION_TOL {
            return Err(Error::FactorInvalid(format!("direction has norm {norm}, expected 1")));
        }
        Ok(Self { zero, direction })
    }

    pub fn zero(&self) -> Complex64 {
        self.zero
    }

    pub fn direction(&self) -> &CVec {
        &self.direction
    }

    pub fn dim(&self) -> usize {
        self.direction.len()
    }

    fn projector(&self) -> CMat {
        &self.direction * self.direction.adjoint()
    }

    pub fn evaluate(&self, z: Complex64) -> CMat {
        let a = self.zero;
        let b = (z - a) / (ONE - a.conj() * z);
        let p = self.projector();
        linalg::identity(self.dim()) - &p + p * b
    }

    /// `A = [ā]`, `B = s·u*`, `C = s·u`, `D = I − (1 + a)uu*`, `s = √(1 − |a|²)`.
    pub fn realization(&self) -> UnitaryRealization {
        let d = self.dim();
        let a = self.zero;
        let s = c((1.0 - a.norm_sqr()).sqrt(), 0.0);
        let u = &self.direction;
        UnitaryRealization {
            a: DMatrix::from_element(1, 1, a.conj()),
            b: CMat::from_row_slice(1, d, u.adjoint().as_slice()) * s,
            c: CMat::from_column_slice(d, 1, u.as_slice()) * s,
            d: linalg::identity(d) - self.projector() * (ONE + a),
        }
    }
}

/// `(A, B, C, D)` with `[[A, B], [C, D]]` unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryRealization {
    pub a: CMat,
    pub b: CMat,
    pub c: CMat,
    pub d: CMat,
}

impl UnitaryRealization {
    pub fn new(a: CMat, b: CMat, c: CMat, d: CMat) -> Result<Self> {
        let n = a.nrows();
        let dim = d.nrows();
        let shapes_ok = a.ncols() == n
            && b.nrows() == n
            && b.ncols() == dim
            && c.nrows() == dim
            && c.ncols() == n
            && d.ncols() == dim;
        if !shapes_ok {
            return Err(Error::DimensionMismatch("realization blocks do not fit together".into()));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn dim(&self) -> usize {
        self.d.nrows()
    }

    pub fn block(&self) -> CMat {
        let (n, d) = (self.state_dim(), self.dim());
        let mut m = CMat::zeros(n + d, n + d);
        m.view_mut((0, 0), (n, n)).copy_from(&self.a);
        m.view_mut((0, n), (n, d)).copy_from(&self.b);
        m.view_mut((n, 0), (d, n)).copy_from(&self.c);
        m.view_mut((n, n), (d, d)).copy_from(&self.d);
        m
    }

    pub fn unitarity_residual(&self) -> f64 {
        linalg::unitarity_residual(&self.block())
    }

    /// `C(I − zA)^{-1}`, the d×n map from coordinates to values at `z`.
    pub fn output_map(&self, z: Complex64) -> Result<CMat> {
        let n = self.state_dim();
        let resolvent = linalg::identity(n) - &self.a * z;
        let inv = linalg::inverse(&resolvent)?;
        Ok(&self.c * inv)
    }

    pub fn evaluate(&self, z: Complex64) -> Result<CMat> {
        Ok(&self.d + self.output_map(z)? * &self.b * z)
    }

    /// Series connection realizing the product `self · other`.
    pub fn cascade(&self, other: &UnitaryRealization) -> UnitaryRealization {
        let (n1, n2, d) = (self.state_dim(), other.state_dim(), self.dim());
        let mut a = CMat::zeros(n1 + n2, n1 + n2);
        a.view_mut((0, 0), (n1, n1)).copy_from(&self.a);
        a.view_mut((0, n1), (n1, n2)).copy_from(&(&self.b * &other.c));
        a.view_mut((n1, n1), (n2, n2)).copy_from(&other.a);
        let mut b = CMat::zeros(n1 + n2, d);
        b.view_mut((0, 0), (n1, d)).copy_from(&(&self.b * &other.d));
        b.view_mut((n1, 0), (n2, d)).copy_from(&other.b);
        let mut cc = CMat::zeros(d, n1 + n2);
        cc.view_mut((0, 0), (d, n1)).copy_from(&self.c);
        cc.view_mut((0, n1), (d, n2)).copy_from(&(&self.d * &other.c));
        UnitaryRealization { a, b, c: cc, d: &self.d * &other.d }
    }

    /// Realization of `U · Θ` for a constant matrix `U`.
    pub fn left_multiply(&self, u: &CMat) -> UnitaryRealization {
        UnitaryRealization {
            a: self.a.clone(),
            b: self.b.clone(),
            c: u * &self.c,
            d: u * &self.d,
        }
    }

    pub fn taylor_coefficients(&self, degree: usize) -> Vec<CMat> {
        let mut out = Vec::with_capacity(degree + 1);
        out.push(self.d.clone());
        let mut power_times_b = self.b.clone();
        for _ in 1..=degree {
            out.push(&self.c * &power_times_b);
            power_times_b = &self.a * power_times_b;
        }
        out
    }
}

/// The constant unitary and the ordered factor list `U0 · F_1 ⋯ F_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    pub u0: CMat,
    pub factors: Vec<ElementaryFactor>,
}

impl Factorization {
    pub fn evaluate(&self, z: Complex64) -> CMat {
        self.factors
            .iter()
            .fold(self.u0.clone(), |acc, f| acc * f.evaluate(z))
    }
}

/// A pure `d × d` inner function of finite degree.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixInnerFunction {
    factorization: Option<Factorization>,
    realization: UnitaryRealization,
    fingerprint: String,
}

impl MatrixInnerFunction {
    /// Wraps an arbitrary realization after checking unitarity, stability
    /// and purity.
    pub fn from_realization(realization: UnitaryRealization, opts: &InnerOptions) -> Result<Self> {
        validate_realization(&realization, opts)?;
        Ok(Self::unchecked(None, realization))
    }

    fn unchecked(factorization: Option<Factorization>, realization: UnitaryRealization) -> Self {
        let fingerprint = fingerprint_of(&realization);
        Self { factorization, realization, fingerprint }
    }

    pub fn dim(&self) -> usize {
        self.realization.dim()
    }

    /// State dimension, equal to `dim K_Θ`.
    pub fn degree(&self) -> usize {
        self.realization.state_dim()
    }

    pub fn realization(&self) -> &UnitaryRealization {
        &self.realization
    }

    pub fn factorization(&self) -> Option<&Factorization> {
        self.factorization.as_ref()
    }

    /// Short content hash of the realization; model vectors carry it to
    /// record which space they belong to.
    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn evaluate(&self, z: Complex64) -> Result<CMat> {
        self.realization.evaluate(z)
    }

    /// Direct factor-product evaluation, when the factor list is known.
    pub fn evaluate_factored(&self, z: Complex64) -> Option<CMat> {
        self.factorization.as_ref().map(|f| f.evaluate(z))
    }

    pub fn taylor_coefficients(&self, degree: usize) -> Vec<CMat> {
        self.realization.taylor_coefficients(degree)
    }

    pub fn value_at_zero_norm(&self) -> f64 {
        linalg::op_norm(&self.realization.d)
    }

    /// Max of `‖Θ(e^{it})Θ(e^{it})* − I‖` over `nodes` uniform boundary points.
    pub fn boundary_unitarity_residual(&self, nodes: usize) -> Result<f64> {
        boundary_residual(&self.realization, nodes)
    }
}

fn boundary_residual(r: &UnitaryRealization, nodes: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for j in 0..nodes {
        let t = std::f64::consts::TAU * j as f64 / nodes as f64;
        let v = r.evaluate(Complex64::from_polar(1.0, t))?;
        worst = worst.max(linalg::unitarity_residual(&v));
    }
    Ok(worst)
}

fn validate_realization(r: &UnitaryRealization, opts: &InnerOptions) -> Result<()> {
    if r.state_dim() == 0 {
        return Err(Error::FactorInvalid("degree-zero inner functions are constants".into()));
    }
    let residual = r.unitarity_residual();
    if !(residual < opts.tol) {
        return Err(Error::NotUnitary { residual });
    }
    let rho = linalg::spectral_radius(&r.a);
    if !(rho < 1.0) {
        return Err(Error::SingularResolvent);
    }
    let norm0 = linalg::op_norm(&r.d);
    if !(norm0 < 1.0 - opts.purity_margin) {
        return Err(Error::NotPure { norm: norm0 });
    }
    let boundary = boundary_residual(r, BOUNDARY_CHECK_NODES)?;
    if !(boundary < opts.tol) {
        return Err(Error::NotUnitary { residual: boundary });
    }
    Ok(())
}

fn fingerprint_of(r: &UnitaryRealization) -> String {
    let mut h = Sha256::new();
    for m in [&r.a, &r.b, &r.c, &r.d] {
        h.update((m.nrows() as u64).to_le_bytes());
        h.update((m.ncols() as u64).to_le_bytes());
        for z in m.iter() {
            h.update(z.re.to_bits().to_le_bytes());
            h.update(z.im.to_bits().to_le_bytes());
        }
    }
    hex::encode(&h.finalize()[..8])
}

/// Builds `Θ = U0 · F_1 ⋯ F_n` with the default options.
pub fn assemble_inner(u0: CMat, factors: Vec<ElementaryFactor>) -> Result<MatrixInnerFunction> {
    assemble_inner_with(u0, factors, &InnerOptions::default())
}

pub fn assemble_inner_with(
    u0: CMat,
    factors: Vec<ElementaryFactor>,
    opts: &InnerOptions,
) -> Result<MatrixInnerFunction> {
    let d = u0.nrows();
    if u0.ncols() != d || d == 0 {
        return Err(Error::DimensionMismatch("U0 must be a non-empty square matrix".into()));
    }
    let residual = linalg::unitarity_residual(&u0);
    if !(residual < opts.tol) {
        return Err(Error::NotUnitary { residual });
    }
    if factors.is_empty() {
        return Err(Error::FactorInvalid("factor list is empty".into()));
    }
    for f in &factors {
        if f.dim() != d {
            return Err(Error::DimensionMismatch(format!(
                "factor direction has length {}, expected {d}",
                f.dim()
            )));
        }
        if f.zero().norm() > opts.radius_cap {
            return Err(Error::FactorInvalid(format!(
                "|a| = {} exceeds the radius cap {}",
                f.zero().norm(),
                opts.radius_cap
            )));
        }
    }
    let realization = factors
        .iter()
        .map(ElementaryFactor::realization)
        .reduce(|acc, r| acc.cascade(&r))
        .expect("non-empty factor list")
        .left_multiply(&u0);
    validate_realization(&realization, opts)?;
    Ok(MatrixInnerFunction::unchecked(Some(Factorization { u0, factors }), realization))
}

/// Seeded random pure inner function of size `d` and degree `n`.
///
/// With `symmetric` set, the result satisfies `Θ(z)ᵀ = Θ(z)`: it is built as
/// `Gᵀ (U F_c) G` with `G` a product of factors along real directions, `U` a
/// real symmetric orthogonal matrix and `F_c` (odd degree only) a factor
/// along an eigenvector of `U`.
pub fn random_inner(
    d: usize,
    n: usize,
    seed: u64,
    symmetric: bool,
    radius_cap: f64,
) -> Result<MatrixInnerFunction> {
    if d == 0 || n == 0 {
        return Err(Error::GenerationFailed {
            attempts: 0,
            reason: "dimension and degree must be positive".into(),
        });
    }
    if !(radius_cap > 0.0 && radius_cap < 1.0) {
        return Err(Error::GenerationFailed {
            attempts: 0,
            reason: format!("radius cap {radius_cap} must lie in (0, 1)"),
        });
    }
    let opts = InnerOptions { radius_cap, ..InnerOptions::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last = String::new();
    for _ in 0..RANDOM_RETRIES {
        let (u0, factors) = if symmetric {
            symmetric_candidate(&mut rng, d, n, radius_cap)
        } else {
            generic_candidate(&mut rng, d, n, radius_cap)
        };
        match assemble_inner_with(u0, factors, &opts) {
            Ok(theta) => return Ok(theta),
            Err(e) => last = e.to_string(),
        }
    }
    Err(Error::GenerationFailed { attempts: RANDOM_RETRIES, reason: last })
}

fn random_zero<R: Rng>(rng: &mut R, cap: f64) -> Complex64 {
    let r = cap * rng.random::<f64>().sqrt();
    let t = std::f64::consts::TAU * rng.random::<f64>();
    Complex64::from_polar(r, t)
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn random_unit<R: Rng>(rng: &mut R, d: usize, real: bool) -> CVec {
    loop {
        let v = CVec::from_fn(d, |_, _| {
            let re = gaussian(rng);
            let im = if real { 0.0 } else { gaussian(rng) };
            c(re, im)
        });
        let norm = linalg::vec_norm(&v);
        if norm > 1e-8 {
            return v / c(norm, 0.0);
        }
    }
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase correction).
pub fn random_unitary<R: Rng>(rng: &mut R, d: usize) -> CMat {
    let g = CMat::from_fn(d, d, |_, _| c(gaussian(rng), gaussian(rng)));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = CVec::from_fn(d, |i, _| {
        let x = r[(i, i)];
        if x.norm() > 0.0 { x / x.norm() } else { ONE }
    });
    q * CMat::from_diagonal(&phases)
}

/// Real orthogonal matrix `Q`.
fn random_orthogonal<R: Rng>(rng: &mut R, d: usize) -> CMat {
    let g = CMat::from_fn(d, d, |_, _| c(gaussian(rng), 0.0));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let signs = CVec::from_fn(d, |i, _| if r[(i, i)].re < 0.0 { -ONE } else { ONE });
    (q * CMat::from_diagonal(&signs)).map(|z| c(z.re, 0.0))
}

fn generic_candidate<R: Rng>(rng: &mut R, d: usize, n: usize, cap: f64) -> (CMat, Vec<ElementaryFactor>) {
    let u0 = random_unitary(rng, d);
    let factors = (0..n)
        .map(|_| {
            let zero = random_zero(rng, cap);
            let dir = random_unit(rng, d, false);
            ElementaryFactor::new(zero, dir).expect("sampled factor is valid")
        })
        .collect();
    (u0, factors)
}

fn symmetric_candidate<R: Rng>(rng: &mut R, d: usize, n: usize, cap: f64) -> (CMat, Vec<ElementaryFactor>) {
    let q = random_orthogonal(rng, d);
    let signs = CVec::from_fn(d, |_, _| if rng.random::<bool>() { ONE } else { -ONE });
    let u = &q * CMat::from_diagonal(&signs) * q.transpose();
    let half: Vec<(Complex64, CVec)> = (0..n / 2)
        .map(|_| (random_zero(rng, cap), random_unit(rng, d, true)))
        .collect();
    let mut factors = Vec::with_capacity(n);
    for (zero, dir) in half.iter().rev() {
        let moved = &u * dir;
        let norm = linalg::vec_norm(&moved);
        factors.push(ElementaryFactor::new(*zero, moved / c(norm, 0.0)).expect("orthogonal image"));
    }
    if n % 2 == 1 {
        let col = rng.random_range(0..d);
        let dir = q.column(col).into_owned();
        factors.push(ElementaryFactor::new(random_zero(rng, cap), dir).expect("eigenvector"));
    }
    for (zero, dir) in half {
        factors.push(ElementaryFactor::new(zero, dir).expect("sampled factor is valid"));
    }
    (u, factors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;

    fn shift(d: usize, axis: usize) -> ElementaryFactor {
        let mut u = CVec::zeros(d);
        u[axis] = ONE;
        ElementaryFactor::new(ZERO, u).unwrap()
    }

    fn scalar(a: f64) -> ElementaryFactor {
        ElementaryFactor::new(c(a, 0.0), CVec::from_element(1, ONE)).unwrap()
    }

    #[test]
    fn shift_function_realization() {
        let theta = assemble_inner(linalg::identity(1), vec![shift(1, 0)]).unwrap();
        let r = theta.realization();
        assert_eq!(r.a[(0, 0)], ZERO);
        assert_eq!(r.b[(0, 0)], ONE);
        assert_eq!(r.c[(0, 0)], ONE);
        assert_eq!(r.d[(0, 0)], ZERO);
        let z = c(0.3, -0.2);
        assert!((theta.evaluate(z).unwrap()[(0, 0)] - z).norm() < 1e-15);
    }

    #[test]
    fn z_squared_taylor_coefficients() {
        let theta = assemble_inner(linalg::identity(1), vec![shift(1, 0), shift(1, 0)]).unwrap();
        let coeffs: Vec<Complex64> = theta.taylor_coefficients(3).iter().map(|m| m[(0, 0)]).collect();
        assert_eq!(coeffs, vec![ZERO, ZERO, ONE, ZERO]);
        assert!((theta.evaluate(c(0.0, 1.0)).unwrap()[(0, 0)] - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn z_identity_two_by_two() {
        let theta = assemble_inner(linalg::identity(2), vec![shift(2, 0), shift(2, 1)]).unwrap();
        let v = theta.evaluate(c(0.3, 0.0)).unwrap();
        assert!(linalg::op_norm(&(v - linalg::identity(2) * c(0.3, 0.0))) < 1e-15);
        let t = theta.taylor_coefficients(1);
        assert!(linalg::op_norm(&t[0]) < 1e-15);
        assert!(linalg::op_norm(&(&t[1] - linalg::identity(2))) < 1e-15);
    }

    #[test]
    fn untouched_direction_is_not_pure() {
        let err = assemble_inner(linalg::identity(2), vec![shift(2, 0)]).unwrap_err();
        assert!(matches!(err, Error::NotPure { norm } if (norm - 1.0).abs() < 1e-12));
    }

    #[test]
    fn scalar_half_taylor() {
        let theta = assemble_inner(linalg::identity(1), vec![scalar(0.5)]).unwrap();
        let t = theta.taylor_coefficients(2);
        assert!((t[0][(0, 0)] - c(-0.5, 0.0)).norm() < 1e-15);
        assert!((t[1][(0, 0)] - c(0.75, 0.0)).norm() < 1e-15);
        // b_{1/2}: third coefficient is (3/4)(1/2)
        assert!((t[2][(0, 0)] - c(0.375, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(matches!(
            ElementaryFactor::new(c(1.0, 0.0), CVec::from_element(1, ONE)),
            Err(Error::FactorInvalid(_))
        ));
        assert!(matches!(
            ElementaryFactor::new(ZERO, CVec::from_element(1, c(2.0, 0.0))),
            Err(Error::FactorInvalid(_))
        ));
        let bad_u0 = CMat::from_element(1, 1, c(0.5, 0.0));
        assert!(matches!(assemble_inner(bad_u0, vec![shift(1, 0)]), Err(Error::NotUnitary { .. })));
        assert!(matches!(assemble_inner(linalg::identity(1), vec![]), Err(Error::FactorInvalid(_))));
        let far = ElementaryFactor::new(c(0.97, 0.0), CVec::from_element(1, ONE)).unwrap();
        assert!(matches!(assemble_inner(linalg::identity(1), vec![far]), Err(Error::FactorInvalid(_))));
    }

    #[test]
    fn random_inner_is_deterministic_and_unitary() {
        let a = random_inner(2, 3, 7, false, DEFAULT_RADIUS_CAP).unwrap();
        let b = random_inner(2, 3, 7, false, DEFAULT_RADIUS_CAP).unwrap();
        assert_eq!(a, b);
        assert!(a.realization().unitarity_residual() < 1e-12);
        assert!(a.boundary_unitarity_residual(256).unwrap() < 1e-10);
    }

    #[test]
    fn random_symmetric_is_transpose_invariant() {
        let theta = random_inner(2, 3, 7, true, DEFAULT_RADIUS_CAP).unwrap();
        let mut worst: f64 = 0.0;
        for j in 0..64 {
            let z = Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / 64.0);
            let v = theta.evaluate(z).unwrap();
            worst = worst.max(linalg::op_norm(&(v.transpose() - &v)));
        }
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn degree_one_in_two_dimensions_cannot_be_pure() {
        let err = random_inner(2, 1, 1, false, DEFAULT_RADIUS_CAP).unwrap_err();
        assert!(matches!(err, Error::GenerationFailed { .. }));
    }

    #[test]
    fn factor_and_realization_agree() {
        let theta = random_inner(3, 5, 11, false, DEFAULT_RADIUS_CAP).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..32 {
            let z = random_zero(&mut rng, 0.99);
            let lhs = theta.evaluate(z).unwrap();
            let rhs = theta.evaluate_factored(z).unwrap();
            assert!(linalg::op_norm(&(lhs - rhs)) < 1e-12);
        }
    }

    #[test]
    fn from_realization_rejects_non_unitary() {
        let theta = random_inner(2, 3, 7, false, DEFAULT_RADIUS_CAP).unwrap();
        let mut r = theta.realization().clone();
        r.a *= c(1.01, 0.0);
        assert!(MatrixInnerFunction::from_realization(r, &InnerOptions::default()).is_err());
    }
}
