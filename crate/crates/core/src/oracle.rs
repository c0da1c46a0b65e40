//! Boundary quadrature on uniform nodes of the unit circle.
//!
//! This is the independent witness for the realization-based code: inner
//! products are trapezoid sums of `⟨f(e^{it}), g(e^{it})⟩`, and projections
//! onto `K_Θ` are computed from a Gram system over `{z^k Θ e_j}` using only
//! pointwise values of `Θ` (the factor product when one is available).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::inner_function::MatrixInnerFunction;
use crate::linalg::{self, c, CMat, CVec, ZERO};
use crate::model_space::{ModelVector, VectorPolynomial};

pub const DEFAULT_GRID: usize = 1024;
pub const MIN_GRID: usize = 8;
pub const MAX_GRAM_CONDITION: f64 = 1e10;
pub const GRAM_RANK_TOL: f64 = 1e-10;
/// Largest grid chosen automatically from pole locations.
pub const MAX_RESOLVING_GRID: usize = 1 << 18;
/// `e^{-40}`: target size of the trapezoid aliasing term.
const ALIASING_EXPONENT: f64 = 40.0;

/// Uniform nodes `e^{2πij/M}`, `M` a power of two.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryGrid {
    nodes: Vec<Complex64>,
}

impl BoundaryGrid {
    pub fn new(m: usize) -> Result<Self> {
        if m < MIN_GRID || !m.is_power_of_two() {
            return Err(Error::InvalidGrid(m));
        }
        let nodes = (0..m)
            .map(|j| Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / m as f64))
            .collect();
        Ok(Self { nodes })
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn doubled(&self) -> Self {
        Self::new(self.size() * 2).expect("doubling a valid grid")
    }

    /// Smallest admissible grid of at least `min_nodes` nodes, never below `base`.
    pub fn at_least(base: usize, min_nodes: usize) -> Result<Self> {
        Self::new(base.max(min_nodes.max(MIN_GRID).next_power_of_two()))
    }

    /// Grid of at least `base` nodes on which the trapezoid rule resolves
    /// integrands whose Fourier coefficients decay like `rho^k`: aliasing
    /// is then of order `rho^M ≤ e^{-40}`, up to [`MAX_RESOLVING_GRID`].
    pub fn resolving(base: usize, rho: f64) -> Result<Self> {
        let needed = if rho > 0.0 && rho < 1.0 {
            (ALIASING_EXPONENT / -rho.ln()).ceil().min(MAX_RESOLVING_GRID as f64) as usize
        } else if rho >= 1.0 {
            MAX_RESOLVING_GRID
        } else {
            0
        };
        Self::at_least(base, needed)
    }

    /// [`BoundaryGrid::resolving`] for the poles of every function in `thetas`.
    pub fn resolving_for(base: &BoundaryGrid, thetas: &[&MatrixInnerFunction]) -> Result<Self> {
        let rho = thetas.iter().map(|t| linalg::spectral_radius(&t.realization().a)).fold(0.0, f64::max);
        Self::resolving(base.size(), rho)
    }
}

/// Values of a `ℂ^d`-valued function at every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    values: Vec<CVec>,
}

impl Samples {
    pub fn from_fn<F>(grid: &BoundaryGrid, mut f: F) -> Result<Self>
    where
        F: FnMut(Complex64) -> Result<CVec>,
    {
        let values = grid.nodes().iter().map(|&z| f(z)).collect::<Result<Vec<_>>>()?;
        Ok(Self { values })
    }

    pub fn values(&self) -> &[CVec] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sub(&self, other: &Samples) -> Result<Samples> {
        check_grids(self, other)?;
        Ok(Samples {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn norm(&self) -> f64 {
        boundary_inner_product(self, self).map(|v| v.re.max(0.0).sqrt()).unwrap_or(0.0)
    }

    /// Fourier coefficients `k = 0..count` by the discrete transform.
    pub fn fourier_coefficients(&self, count: usize) -> Vec<CVec> {
        let m = self.values.len();
        let d = self.values.first().map_or(0, |v| v.len());
        (0..count)
            .map(|k| {
                let mut acc = CVec::zeros(d);
                for (j, v) in self.values.iter().enumerate() {
                    let phase = Complex64::from_polar(1.0, -std::f64::consts::TAU * ((j * k) % m) as f64 / m as f64);
                    acc += v * phase;
                }
                acc / c(m as f64, 0.0)
            })
            .collect()
    }
}

fn check_grids(f: &Samples, g: &Samples) -> Result<()> {
    if f.len() != g.len() {
        return Err(Error::GridMismatch(f.len(), g.len()));
    }
    Ok(())
}

/// Trapezoid value of `(1/2π)∫⟨f, g⟩ dt`.
pub fn boundary_inner_product(f: &Samples, g: &Samples) -> Result<Complex64> {
    check_grids(f, g)?;
    let m = f.len();
    if m == 0 {
        return Ok(ZERO);
    }
    let mut acc = ZERO;
    for (a, b) in f.values.iter().zip(&g.values) {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch("sample vectors differ in length".into()));
        }
        acc += linalg::inner(a, b);
    }
    Ok(acc / c(m as f64, 0.0))
}

/// Pointwise values of `Θ`, from the factor product when it is known.
pub fn theta_evaluator(theta: &MatrixInnerFunction) -> impl Fn(Complex64) -> Result<CMat> + '_ {
    move |z| match theta.evaluate_factored(z) {
        Some(v) => Ok(v),
        None => theta.evaluate(z),
    }
}

pub fn sample_model_vector(theta: &MatrixInnerFunction, f: &ModelVector, grid: &BoundaryGrid) -> Result<Samples> {
    let r = theta.realization();
    Samples::from_fn(grid, |z| Ok(r.output_map(z)? * f.coords()))
}

pub fn sample_polynomial(h: &VectorPolynomial, grid: &BoundaryGrid) -> Samples {
    Samples::from_fn(grid, |z| Ok(h.evaluate(z))).expect("polynomial evaluation is infallible")
}

/// Result of the Gram-system projection.
#[derive(Debug, Clone)]
pub struct OracleProjection {
    pub samples: Samples,
    pub gram_condition: f64,
}

/// Projects onto `ΘH²` truncated to `span{z^k Θ e_j : k ≤ max_degree}`.
struct GramProjector {
    basis: Vec<Samples>,
    factor: nalgebra::linalg::Cholesky<Complex64, nalgebra::Dyn>,
    condition: f64,
}

impl GramProjector {
    fn new<F>(theta_at: &F, d: usize, max_degree: usize, grid: &BoundaryGrid) -> Result<Self>
    where
        F: Fn(Complex64) -> Result<CMat>,
    {
        if 2 * max_degree >= grid.size() {
            return Err(Error::InvalidGrid(grid.size()));
        }
        let theta_vals: Vec<CMat> = grid.nodes().iter().map(|&z| theta_at(z)).collect::<Result<_>>()?;
        let mut basis = Vec::with_capacity((max_degree + 1) * d);
        for k in 0..=max_degree {
            for j in 0..d {
                let values = grid
                    .nodes()
                    .iter()
                    .zip(&theta_vals)
                    .map(|(z, t)| t.column(j).into_owned() * z.powu(k as u32))
                    .collect();
                basis.push(Samples { values });
            }
        }
        let gram = gram_matrix(&basis)?;
        let eig = linalg::hermitian_part_eigenvalues(&gram);
        let lmax = eig.iter().cloned().fold(f64::MIN, f64::max);
        let lmin = eig.iter().cloned().fold(f64::MAX, f64::min);
        let condition = if lmin > 0.0 { lmax / lmin } else { f64::INFINITY };
        if !(condition <= MAX_GRAM_CONDITION) {
            return Err(Error::IllConditioned { cond: condition });
        }
        let factor = gram.cholesky().ok_or(Error::IllConditioned { cond: condition })?;
        Ok(Self { basis, factor, condition })
    }

    /// `h − P_{ΘH²} h` sampled on the grid.
    fn complement(&self, h: &Samples) -> Result<Samples> {
        let rhs = CVec::from_iterator(
            self.basis.len(),
            self.basis.iter().map(|v| boundary_inner_product(h, v)).collect::<Result<Vec<_>>>()?,
        );
        let coeffs = self.factor.solve(&rhs);
        let values = (0..h.len())
            .map(|t| {
                let mut acc = h.values[t].clone();
                for (q, v) in self.basis.iter().enumerate() {
                    acc -= &v.values[t] * coeffs[q];
                }
                acc
            })
            .collect();
        Ok(Samples { values })
    }
}

/// `G[p, q] = ⟨v_q, v_p⟩`.
pub fn gram_matrix(vectors: &[Samples]) -> Result<CMat> {
    let k = vectors.len();
    let mut g = CMat::zeros(k, k);
    for p in 0..k {
        for q in p..k {
            let v = boundary_inner_product(&vectors[q], &vectors[p])?;
            g[(p, q)] = v;
            g[(q, p)] = v.conj();
        }
    }
    Ok(g)
}

/// `P_Θ h` for an analytic polynomial `h`, via the Gram system.
pub fn oracle_project<F>(theta_at: &F, d: usize, h: &VectorPolynomial, grid: &BoundaryGrid) -> Result<OracleProjection>
where
    F: Fn(Complex64) -> Result<CMat>,
{
    let projector = GramProjector::new(theta_at, d, h.degree(), grid)?;
    let samples = projector.complement(&sample_polynomial(h, grid))?;
    Ok(OracleProjection { samples, gram_condition: projector.condition })
}

/// `dim K_Θ` as the numerical rank of the Gram matrix of
/// `{P_Θ(z^k e_j) : k ≤ max_degree}`.
pub fn model_space_dimension<F>(theta_at: &F, d: usize, max_degree: usize, grid: &BoundaryGrid) -> Result<usize>
where
    F: Fn(Complex64) -> Result<CMat>,
{
    let projector = GramProjector::new(theta_at, d, max_degree, grid)?;
    let mut projected = Vec::with_capacity((max_degree + 1) * d);
    for k in 0..=max_degree {
        for j in 0..d {
            let mut coeffs = vec![CVec::zeros(d); k + 1];
            coeffs[k][j] = linalg::ONE;
            let h = sample_polynomial(&VectorPolynomial::new(coeffs), grid);
            projected.push(projector.complement(&h)?);
        }
    }
    let gram = gram_matrix(&projected)?;
    let eig = linalg::hermitian_part_eigenvalues(&gram);
    let lmax = eig.iter().cloned().fold(0.0, f64::max);
    Ok(eig.iter().filter(|&&l| l > GRAM_RANK_TOL * lmax).count())
}

/// Largest change of `value(grid)` when the grid is doubled.
pub fn doubling_change<F>(grid: &BoundaryGrid, mut value: F) -> Result<f64>
where
    F: FnMut(&BoundaryGrid) -> Result<Vec<Complex64>>,
{
    let coarse = value(grid)?;
    let fine = value(&grid.doubled())?;
    Ok(coarse.iter().zip(&fine).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
}
