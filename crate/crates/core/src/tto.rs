//! Matrix-valued truncated Toeplitz operators `A_Φ = P_Θ M_Φ |K_Θ`.

use num_complex::Complex64;
use rand::Rng;

use crate::crofoot::CrofootPair;
use crate::error::{Error, Result};
use crate::inner_function::MatrixInnerFunction;
use crate::linalg::{self, c, CMat};
use crate::model_space;
use crate::oracle::{BoundaryGrid, DEFAULT_GRID};
use crate::sampling;

/// Largest entry change tolerated when the quadrature grid is doubled.
pub const GRID_DOUBLING_TOL: f64 = 1e-8;

/// `Φ(e^{it}) = Σ_{k=−m}^{m} Φ_k e^{ikt}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolPolynomial {
    half_width: usize,
    coeffs: Vec<CMat>,
}

impl SymbolPolynomial {
    /// `coeffs[i]` is `Φ_{i−m}`.
    pub fn new(half_width: usize, coeffs: Vec<CMat>) -> Result<Self> {
        if coeffs.len() != 2 * half_width + 1 {
            return Err(Error::DimensionMismatch(format!(
                "band half-width {half_width} needs {} coefficients, got {}",
                2 * half_width + 1,
                coeffs.len()
            )));
        }
        let d = coeffs[0].nrows();
        if coeffs.iter().any(|m| m.nrows() != d || m.ncols() != d) {
            return Err(Error::DimensionMismatch("symbol coefficients must share one square size".into()));
        }
        Ok(Self { half_width, coeffs })
    }

    pub fn constant(phi0: CMat) -> Self {
        Self { half_width: 0, coeffs: vec![phi0] }
    }

    /// `e^{ikt} Φ_k`.
    pub fn monomial(k: i64, phi: CMat) -> Self {
        let m = k.unsigned_abs() as usize;
        let d = phi.nrows();
        let mut coeffs = vec![CMat::zeros(d, d); 2 * m + 1];
        coeffs[(k + m as i64) as usize] = phi;
        Self { half_width: m, coeffs }
    }

    pub fn random<R: Rng>(rng: &mut R, d: usize, half_width: usize) -> Self {
        let coeffs = (0..2 * half_width + 1).map(|_| sampling::gaussian_mat(rng, d, d)).collect();
        Self { half_width, coeffs }
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn dim(&self) -> usize {
        self.coeffs[0].nrows()
    }

    pub fn coefficient(&self, k: i64) -> Option<&CMat> {
        let idx = k + self.half_width as i64;
        if idx < 0 {
            return None;
        }
        self.coeffs.get(idx as usize)
    }

    /// Coefficients with their indices `k = −m..=m`.
    pub fn indexed(&self) -> impl Iterator<Item = (i64, &CMat)> {
        let m = self.half_width as i64;
        self.coeffs.iter().enumerate().map(move |(i, phi)| (i as i64 - m, phi))
    }

    /// Value at a point of the unit circle.
    pub fn evaluate(&self, z: Complex64) -> CMat {
        let d = self.dim();
        self.indexed().fold(CMat::zeros(d, d), |acc, (k, phi)| acc + phi * z.powi(k as i32))
    }

    /// `Φ*(e^{it}) = Φ(e^{it})*`, whose coefficients are `(Φ_{−k})*`.
    pub fn adjoint(&self) -> Self {
        Self {
            half_width: self.half_width,
            coeffs: self.coeffs.iter().rev().map(|m| m.adjoint()).collect(),
        }
    }

    pub fn scaled(&self, alpha: Complex64) -> Self {
        Self { half_width: self.half_width, coeffs: self.coeffs.iter().map(|m| m * alpha).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch("symbols of different sizes".into()));
        }
        let m = self.half_width.max(other.half_width);
        let d = self.dim();
        let coeffs = (-(m as i64)..=m as i64)
            .map(|k| {
                let a = self.coefficient(k).cloned().unwrap_or_else(|| CMat::zeros(d, d));
                let b = other.coefficient(k).cloned().unwrap_or_else(|| CMat::zeros(d, d));
                a + b
            })
            .collect();
        Ok(Self { half_width: m, coeffs })
    }
}

/// An operator on `K_Θ` in orthonormal state coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedToeplitzOperator {
    owner: String,
    matrix: CMat,
    symbol: Option<SymbolPolynomial>,
}

impl TruncatedToeplitzOperator {
    /// Wraps a matrix with no symbol attached, e.g. a candidate to be tested.
    pub fn from_matrix(theta: &MatrixInnerFunction, matrix: CMat) -> Result<Self> {
        let n = theta.degree();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch(format!("operator must be {n}×{n}")));
        }
        Ok(Self { owner: theta.fingerprint().to_owned(), matrix, symbol: None })
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn symbol(&self) -> Option<&SymbolPolynomial> {
        self.symbol.as_ref()
    }

    pub fn owner(&self) -> &str {
        &self.owner
    }
}

fn tto_on_grid(theta: &MatrixInnerFunction, symbol: &SymbolPolynomial, grid: &BoundaryGrid) -> Result<CMat> {
    let r = theta.realization();
    let n = theta.degree();
    let mut acc = CMat::zeros(n, n);
    for &z in grid.nodes() {
        let out = r.output_map(z)?;
        acc += out.adjoint() * symbol.evaluate(z) * out;
    }
    Ok(acc / c(grid.size() as f64, 0.0))
}

pub fn build_tto(theta: &MatrixInnerFunction, symbol: &SymbolPolynomial) -> Result<TruncatedToeplitzOperator> {
    build_tto_with_grid(theta, symbol, DEFAULT_GRID)
}

/// Matrix entries `(1/2π)∫⟨Φ f_j, f_i⟩dt` by the trapezoid rule on at least
/// `max(base_grid, 4(m + n + 1))` nodes, cross-checked on the doubled grid.
pub fn build_tto_with_grid(
    theta: &MatrixInnerFunction,
    symbol: &SymbolPolynomial,
    base_grid: usize,
) -> Result<TruncatedToeplitzOperator> {
    if symbol.dim() != theta.dim() {
        return Err(Error::DimensionMismatch(format!(
            "symbol is {0}×{0}, Θ is {1}×{1}",
            symbol.dim(),
            theta.dim()
        )));
    }
    let grid = BoundaryGrid::resolving_for(&BoundaryGrid::new(base_grid)?, &[theta])?;
    let grid = BoundaryGrid::at_least(grid.size(), 4 * (symbol.half_width() + theta.degree() + 1))?;
    let coarse = tto_on_grid(theta, symbol, &grid)?;
    let fine = tto_on_grid(theta, symbol, &grid.doubled())?;
    let change = (&coarse - &fine).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !(change <= GRID_DOUBLING_TOL) {
        return Err(Error::GridTooCoarse { change });
    }
    Ok(TruncatedToeplitzOperator {
        owner: theta.fingerprint().to_owned(),
        matrix: fine,
        symbol: Some(symbol.clone()),
    })
}

/// `‖P(S_Θ* A S_Θ − A)P‖` with `P` the projection onto `𝒟_*^⊥`.
///
/// Zero exactly when `Q_A(zf) = Q_A(f)` for every `f` with `f, zf ∈ K_Θ`.
pub fn shift_invariance_residual(theta: &MatrixInnerFunction, a: &CMat) -> Result<f64> {
    let n = theta.degree();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch(format!("operator must be {n}×{n}")));
    }
    let bases = model_space::defect_bases(theta);
    let q = &bases.defect_star_perp;
    if q.ncols() == 0 {
        return Ok(0.0);
    }
    let (s, s_adj) = model_space::model_operator_matrices(theta);
    let defect = s_adj * a * s - a;
    Ok(linalg::op_norm(&(q.adjoint() * defect * q)))
}

fn check_owner(theta: &MatrixInnerFunction, a: &TruncatedToeplitzOperator) -> Result<()> {
    if a.owner != theta.fingerprint() {
        return Err(Error::DimensionMismatch(format!(
            "operator acts on {}, expected {}",
            a.owner,
            theta.fingerprint()
        )));
    }
    Ok(())
}

/// `J_W* A J_W` for `A` acting on `K_Θ′`; the result acts on `K_Θ`.
pub fn crofoot_conjugate(pair: &CrofootPair, a: &TruncatedToeplitzOperator) -> Result<TruncatedToeplitzOperator> {
    check_owner(pair.theta_prime(), a)?;
    let j = pair.transfer_matrix();
    TruncatedToeplitzOperator::from_matrix(pair.theta(), j.adjoint() * a.matrix() * j)
}

/// `J_W B J_W*` for `B` acting on `K_Θ`; the result acts on `K_Θ′`.
pub fn crofoot_conjugate_reverse(
    pair: &CrofootPair,
    b: &TruncatedToeplitzOperator,
) -> Result<TruncatedToeplitzOperator> {
    check_owner(pair.theta(), b)?;
    let j = pair.transfer_matrix();
    TruncatedToeplitzOperator::from_matrix(pair.theta_prime(), j * b.matrix() * j.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crofoot::{crofoot_theta, StrictContraction};
    use crate::inner_function::{assemble_inner, random_inner, ElementaryFactor, DEFAULT_RADIUS_CAP};
    use crate::linalg::{CVec, ONE, ZERO};

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

    #[test]
    fn constant_symbol_on_constants() {
        let theta = z_identity();
        let phi0 = CMat::from_row_slice(2, 2, &[c(1.0, 2.0), c(0.5, 0.0), c(-3.0, 0.0), c(0.0, 1.0)]);
        let a = build_tto(&theta, &SymbolPolynomial::constant(phi0.clone())).unwrap();
        // Series coordinates of K_{zI₂} are the constants e1, e2.
        assert!(linalg::op_norm(&(a.matrix() - &phi0)) < 1e-14);
        let a = build_tto(&theta, &SymbolPolynomial::monomial(1, phi0)).unwrap();
        assert!(linalg::op_norm(a.matrix()) < 1e-14);
    }

    #[test]
    fn shift_symbol_on_z_squared() {
        let a = build_tto(&z_squared(), &SymbolPolynomial::monomial(1, linalg::identity(1))).unwrap();
        let expected = CMat::from_row_slice(2, 2, &[ZERO, ZERO, ONE, ZERO]);
        assert!(linalg::op_norm(&(a.matrix() - expected)) < 1e-14);
        assert!(shift_invariance_residual(&z_squared(), a.matrix()).unwrap() < 1e-12);
    }

    #[test]
    fn unequal_diagonal_is_not_a_tto() {
        let theta = z_squared();
        let a = CMat::from_diagonal(&CVec::from_vec(vec![ONE, c(2.0, 0.0)]));
        let r = shift_invariance_residual(&theta, &a).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vacuous_on_constants() {
        let theta = z_identity();
        let a = CMat::from_row_slice(2, 2, &[ONE, c(5.0, 0.0), c(0.0, 3.0), c(-2.0, 0.0)]);
        assert_eq!(shift_invariance_residual(&theta, &a).unwrap(), 0.0);
    }

    #[test]
    fn symbol_tto_linear_and_adjoint() {
        let theta = random_inner(2, 4, 3, false, DEFAULT_RADIUS_CAP).unwrap();
        let mut rng = sampling::trial_rng(5, 0);
        let phi = SymbolPolynomial::random(&mut rng, 2, 1);
        let psi = SymbolPolynomial::random(&mut rng, 2, 2);
        let alpha = c(0.3, -1.2);
        let lhs = build_tto(&theta, &phi.scaled(alpha).add(&psi).unwrap()).unwrap();
        let rhs = build_tto(&theta, &phi).unwrap().matrix() * alpha + build_tto(&theta, &psi).unwrap().matrix();
        assert!(linalg::op_norm(&(lhs.matrix() - rhs)) < 1e-12);
        let adj = build_tto(&theta, &phi.adjoint()).unwrap();
        let direct = build_tto(&theta, &phi).unwrap();
        assert!(linalg::op_norm(&(adj.matrix() - direct.matrix().adjoint())) < 1e-10);
        assert!(shift_invariance_residual(&theta, direct.matrix()).unwrap() < 1e-10);
    }

    #[test]
    fn multiplication_by_z_is_model_operator() {
        let theta = random_inner(3, 5, 8, false, DEFAULT_RADIUS_CAP).unwrap();
        let a = build_tto(&theta, &SymbolPolynomial::monomial(1, linalg::identity(3))).unwrap();
        let (s, _) = model_space::model_operator_matrices(&theta);
        assert!(linalg::op_norm(&(a.matrix() - s)) < 1e-10);
    }

    #[test]
    fn zero_contraction_conjugation_is_trivial() {
        let theta = random_inner(2, 3, 1, false, DEFAULT_RADIUS_CAP).unwrap();
        let pair = crofoot_theta(&theta, &StrictContraction::new(CMat::zeros(2, 2)).unwrap()).unwrap();
        let mut rng = sampling::trial_rng(6, 0);
        let a = build_tto(pair.theta_prime(), &SymbolPolynomial::random(&mut rng, 2, 1)).unwrap();
        let back = crofoot_conjugate(&pair, &a).unwrap();
        assert!(linalg::op_norm(&(back.matrix() - a.matrix())) < 1e-15);
    }

    #[test]
    fn symbol_shape_validation() {
        assert!(SymbolPolynomial::new(1, vec![linalg::identity(2)]).is_err());
        let theta = z_squared();
        assert!(build_tto(&theta, &SymbolPolynomial::constant(linalg::identity(2))).is_err());
        assert!(shift_invariance_residual(&theta, &linalg::identity(3)).is_err());
    }
}
