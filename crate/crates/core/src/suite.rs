//! Residual suites over an instance, collected into a JSON report.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::conjugation::{self, ConjugationSpec};
use crate::crofoot::{self, crofoot_theta, CrofootPair};
use crate::error::{Error, Result};
use crate::inner_function::{MatrixInnerFunction, CONSTRUCTION_TOL, DEFAULT_PURITY_MARGIN};
use crate::instance::Instance;
use crate::linalg;
use crate::model_space::{self, ModelVector, VectorPolynomial};
use crate::oracle::{self, BoundaryGrid};
use crate::sampling;
use crate::tto::{self, SymbolPolynomial};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const INNER_PRODUCT_PAIRS: usize = 50;
pub const KERNEL_TRIALS: usize = 16;
pub const SHIFT_TRIALS: usize = 16;
pub const CONJUGATION_TRIALS: usize = 20;
pub const LINEARITY_TRIALS: usize = 3;
pub const ORACLE_POLY_DEGREE: usize = 6;

mod anchor {
    pub const INNER: &str = "whose boundary values are almost everywhere unitary operators";
    pub const PURE: &str = "assumed to be pure, that is $ \\|\\Theta(0)\\|<1 $";
    pub const MODEL: &str = "$K_{\\Theta}=H^{2}(\\mathbb{C}^{d})\\ominus \\Theta H^{2}(\\mathbb{C}^{d})$";
    pub const PROJECTION: &str = "the orthogonal projection onto $K_\\Theta$";
    pub const SHIFT_ACTION: &str = "(S_{\\Theta}^{*}f)(z)=\\left\\{";
    pub const THETA_PRIME_PURE: &str = "is a pure inner function";
    pub const JW_UNITARY: &str = "is a unitary operator from";
    pub const KERNEL_MAPPING: &str = "$k_{\\lambda}^{\\Theta^{\\prime}}y$";
    pub const DEFECT_RANGE: &str = "if and only if $J_{W}f\\in$";
    pub const BACKWARD_SHIFT: &str = "$+S_{\\Theta^{'}}^{*}J_{W}f(0)$";
    pub const FORWARD_SHIFT: &str = "$S_{\\Theta^{\\prime}}J_{W}f=J_{W}S_{\\Theta}f$";
    pub const SHIFT_INVARIANT: &str = "is shift invariant";
    pub const TTO_TRANSPORT: &str = "$\\mathcal{T}_{\\Theta}=J_{W}^{*}\\mathcal{T}_{\\Theta^{\\prime}}J_{W}$";
    pub const GAMMA_THETA: &str = "$\\Gamma\\Theta\\Gamma=\\Theta^{*}$";
    pub const GAMMA_W: &str = "$\\Gamma W^{*}=W\\Gamma$";
    pub const GAMMA_DEFECT: &str = "$\\Gamma D_{W^{*}}=D_{W}\\Gamma$";
    pub const GAMMA_THETA_PRIME: &str = "$\\Gamma\\Theta^{'}\\Gamma=\\Theta^{*'}$";
    pub const CONJUGATION: &str = "is a conjugate-linear, isometric and involutive map";
    pub const CGAMMA_INVARIANT: &str = "$C_{\\Gamma}K_{\\Theta}=K_{\\Theta}$";
    pub const CGAMMA_INTERTWINING: &str = "$J_{W}C_{\\Gamma}=C_{\\Gamma}^{'}J_{W}$";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Crofoot,
    Tto,
    Conjugation,
    Model,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Crofoot => "crofoot",
            Suite::Tto => "tto",
            Suite::Conjugation => "conjugation",
            Suite::Model => "model",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Suite::All),
            "crofoot" => Ok(Suite::Crofoot),
            "tto" => Ok(Suite::Tto),
            "conjugation" => Ok(Suite::Conjugation),
            "model" => Ok(Suite::Model),
            other => Err(Error::Malformed(format!("unknown suite {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub paper_anchor: String,
    /// Non-finite residuals are stored as `f64::MAX`.
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub construction_tol: f64,
    pub degree: usize,
    pub dim: usize,
    pub gamma: String,
    pub grid: usize,
    pub seed: u64,
    pub tol: f64,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub checks: Vec<CheckRecord>,
    pub pass: bool,
    pub env: Environment,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub tol: f64,
    pub grid: BoundaryGrid,
    /// Base seed for the random trials of every check.
    pub seed: u64,
}

impl SuiteConfig {
    pub fn new(tol: f64, grid: usize, seed: u64) -> Result<Self> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::Malformed(format!("tolerance {tol} must be positive")));
        }
        Ok(Self { tol, grid: BoundaryGrid::new(grid)?, seed })
    }
}

struct Recorder {
    tol: f64,
    checks: Vec<CheckRecord>,
}

impl Recorder {
    fn push(&mut self, name: &str, anchor: &str, residual: Result<f64>) {
        self.push_with(name, anchor, self.tol, residual);
    }

    fn push_with(&mut self, name: &str, anchor: &str, tolerance: f64, residual: Result<f64>) {
        let (residual, detail) = match residual {
            Ok(r) if r.is_finite() => (r, None),
            Ok(_) => (f64::MAX, Some("non-finite residual".to_owned())),
            Err(e) => (residual_of_error(&e), Some(e.to_string())),
        };
        self.checks.push(CheckRecord {
            name: name.to_owned(),
            paper_anchor: anchor.to_owned(),
            residual,
            tolerance,
            pass: residual < tolerance,
            detail,
        });
    }
}

fn residual_of_error(e: &Error) -> f64 {
    match e {
        Error::NotInKTheta { residual } | Error::NotUnitary { residual } | Error::NotInvolutive { residual } => {
            *residual
        }
        Error::GridTooCoarse { change } => *change,
        _ => f64::MAX,
    }
}

/// Runs the selected suite. Failures of individual checks are recorded in
/// the report, never returned as errors.
pub fn run_suite(instance: &Instance, suite: Suite, cfg: &SuiteConfig) -> Report {
    let mut rec = Recorder { tol: cfg.tol, checks: Vec::new() };
    let gamma = instance.gamma.clone();
    if matches!(suite, Suite::All | Suite::Model) {
        model_checks(&mut rec, &instance.theta, cfg);
    }
    let needs_pair = suite != Suite::Model;
    let pair = if needs_pair {
        match crofoot_theta(&instance.theta, &instance.w) {
            Ok(p) => Some(p),
            Err(e) => {
                rec.push("crofoot_pair_construction", anchor::THETA_PRIME_PURE, Err(e));
                None
            }
        }
    } else {
        None
    };
    if let Some(pair) = &pair {
        if matches!(suite, Suite::All | Suite::Crofoot) {
            crofoot_checks(&mut rec, pair, cfg);
        }
        if matches!(suite, Suite::All | Suite::Tto) {
            let symbols = if instance.symbols.is_empty() {
                let mut rng = sampling::trial_rng(cfg.seed, 0);
                vec![SymbolPolynomial::random(&mut rng, instance.theta.dim(), 1)]
            } else {
                instance.symbols.clone()
            };
            tto_checks(&mut rec, pair, &symbols, cfg);
        }
        let run_conj = match suite {
            Suite::Conjugation => true,
            Suite::All => gamma.is_some(),
            _ => false,
        };
        if run_conj {
            let g = gamma.clone().unwrap_or_else(|| ConjugationSpec::entrywise(instance.theta.dim()));
            conjugation_checks(&mut rec, pair, &g, cfg);
        }
    }
    let gamma_desc = match &gamma {
        Some(g) if *g == ConjugationSpec::entrywise(g.dim()) => "entrywise",
        Some(_) => "matrix",
        None if suite == Suite::Conjugation => "entrywise (default)",
        None => "none",
    };
    let pass = rec.checks.iter().all(|c| c.pass);
    Report {
        suite: suite.name().to_owned(),
        checks: rec.checks,
        pass,
        env: Environment {
            construction_tol: CONSTRUCTION_TOL,
            degree: instance.theta.degree(),
            dim: instance.theta.dim(),
            gamma: gamma_desc.to_owned(),
            grid: cfg.grid.size(),
            seed: cfg.seed,
            tol: cfg.tol,
            version: env!("CARGO_PKG_VERSION").to_owned(),
        },
    }
}

fn model_checks(rec: &mut Recorder, theta: &MatrixInnerFunction, cfg: &SuiteConfig) {
    let grid = &cfg.grid;
    rec.push("theta_realization_unitarity", anchor::INNER, Ok(theta.realization().unitarity_residual()));
    rec.push("theta_boundary_unitarity", anchor::INNER, theta.boundary_unitarity_residual(grid.size()));
    rec.push_with(
        "theta_purity",
        anchor::PURE,
        1.0 - DEFAULT_PURITY_MARGIN,
        Ok(theta.value_at_zero_norm()),
    );
    rec.push("theta_factor_realization_agreement", anchor::INNER, factor_agreement(theta, cfg.seed));
    let points = sampling::validation_points(crofoot::VALIDATION_POINTS, cfg.seed);
    rec.push("shift_action_branches", anchor::SHIFT_ACTION, model_space::piecewise_action_residual(theta, &points));
    rec.push("oracle_projection", anchor::PROJECTION, oracle_projection_residual(theta, grid, cfg.seed));
    rec.push("oracle_inner_product", anchor::MODEL, oracle_inner_product_residual(theta, grid, cfg.seed));
    rec.push_with("gram_rank", anchor::MODEL, 0.5, gram_rank_gap(theta, grid));
}

fn factor_agreement(theta: &MatrixInnerFunction, seed: u64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for z in sampling::validation_points(crofoot::VALIDATION_POINTS, seed) {
        if let Some(f) = theta.evaluate_factored(z) {
            worst = worst.max(linalg::op_norm(&(theta.evaluate(z)? - f)));
        }
    }
    Ok(worst)
}

fn oracle_projection_residual(theta: &MatrixInnerFunction, grid: &BoundaryGrid, seed: u64) -> Result<f64> {
    let d = theta.dim();
    let mut rng = sampling::trial_rng(seed, 1);
    let h = VectorPolynomial::new((0..=ORACLE_POLY_DEGREE).map(|_| sampling::gaussian_vec(&mut rng, d)).collect());
    let core = oracle::sample_model_vector(theta, &model_space::project(theta, &h)?, grid)?;
    let theta_at = oracle::theta_evaluator(theta);
    let quad = oracle::oracle_project(&theta_at, d, &h, grid)?;
    Ok(quad.samples.sub(&core)?.norm() / oracle::sample_polynomial(&h, grid).norm())
}

fn oracle_inner_product_residual(theta: &MatrixInnerFunction, grid: &BoundaryGrid, seed: u64) -> Result<f64> {
    let n = theta.degree();
    let mut worst: f64 = 0.0;
    for trial in 0..8 {
        let mut rng = sampling::trial_rng(seed, 100 + trial);
        let f = ModelVector::new(theta, sampling::gaussian_vec(&mut rng, n))?;
        let g = ModelVector::new(theta, sampling::gaussian_vec(&mut rng, n))?;
        let quad = oracle::boundary_inner_product(
            &oracle::sample_model_vector(theta, &f, grid)?,
            &oracle::sample_model_vector(theta, &g, grid)?,
        )?;
        worst = worst.max((quad - f.inner(&g)?).norm() / (f.norm() * g.norm()));
    }
    Ok(worst)
}

fn gram_rank_gap(theta: &MatrixInnerFunction, grid: &BoundaryGrid) -> Result<f64> {
    let theta_at = oracle::theta_evaluator(theta);
    let rank = oracle::model_space_dimension(&theta_at, theta.dim(), theta.degree() + 1, grid)?;
    Ok((rank as f64 - theta.degree() as f64).abs())
}

fn crofoot_checks(rec: &mut Recorder, pair: &CrofootPair, cfg: &SuiteConfig) {
    let tp = pair.theta_prime();
    let v = pair.validation();
    rec.push("theta_prime_boundary_unitarity", anchor::THETA_PRIME_PURE, tp.boundary_unitarity_residual(cfg.grid.size()));
    rec.push("theta_prime_realization_unitarity", anchor::THETA_PRIME_PURE, Ok(v.realization_unitarity));
    rec.push_with("theta_prime_purity", anchor::THETA_PRIME_PURE, 1.0 - DEFAULT_PURITY_MARGIN, Ok(tp.value_at_zero_norm()));
    rec.push("theta_prime_formula", anchor::THETA_PRIME_PURE, Ok(v.formula_residual));
    rec.push("jw_coordinate_identity", anchor::JW_UNITARY, Ok(v.transfer_residual));
    match crofoot::unitarity_report(pair, INNER_PRODUCT_PAIRS, cfg.seed, &cfg.grid) {
        Ok(u) => {
            rec.push("jw_inner_product", anchor::JW_UNITARY, Ok(u.inner_product));
            rec.push("jw_round_trip", anchor::JW_UNITARY, Ok(u.round_trip));
            rec.push("jw_coordinate_matrix", anchor::JW_UNITARY, Ok(u.coordinate_matrix));
        }
        Err(e) => rec.push("jw_unitarity", anchor::JW_UNITARY, Err(e)),
    }
    rec.push("kernel_mapping", anchor::KERNEL_MAPPING, crofoot::kernel_mapping_residual(pair, KERNEL_TRIALS, cfg.seed));
    match crofoot::intertwining_residuals(pair, SHIFT_TRIALS, cfg.seed) {
        Ok(r) => {
            rec.push("defect_star_angle", anchor::DEFECT_RANGE, Ok(r.defect_star_angle));
            rec.push("defect_angle", anchor::DEFECT_RANGE, Ok(r.defect_angle));
            rec.push("backward_shift_relation", anchor::BACKWARD_SHIFT, Ok(r.backward_shift));
            rec.push("forward_shift_commutation", anchor::FORWARD_SHIFT, Ok(r.forward_shift));
        }
        Err(e) => rec.push("shift_relations", anchor::BACKWARD_SHIFT, Err(e)),
    }
}

fn tto_checks(rec: &mut Recorder, pair: &CrofootPair, symbols: &[SymbolPolynomial], cfg: &SuiteConfig) {
    let base = cfg.grid.size();
    for (i, symbol) in symbols.iter().enumerate() {
        let on_theta = tto::build_tto_with_grid(pair.theta(), symbol, base);
        let own = match &on_theta {
            Ok(a) => tto::shift_invariance_residual(pair.theta(), a.matrix()),
            Err(e) => Err(Error::GridTooCoarse { change: residual_of_error(e) }),
        };
        rec.push(&format!("tto{i}_shift_invariance"), anchor::SHIFT_INVARIANT, own);
        let forward = on_theta
            .and_then(|a| tto::crofoot_conjugate_reverse(pair, &a))
            .and_then(|b| tto::shift_invariance_residual(pair.theta_prime(), b.matrix()));
        rec.push(&format!("tto{i}_conjugated_onto_theta_prime"), anchor::TTO_TRANSPORT, forward);
        let backward = tto::build_tto_with_grid(pair.theta_prime(), symbol, base)
            .and_then(|a| tto::crofoot_conjugate(pair, &a))
            .and_then(|b| tto::shift_invariance_residual(pair.theta(), b.matrix()));
        rec.push(&format!("tto{i}_conjugated_onto_theta"), anchor::TTO_TRANSPORT, backward);
    }
}

fn conjugation_checks(rec: &mut Recorder, pair: &CrofootPair, gamma: &ConjugationSpec, cfg: &SuiteConfig) {
    let grid = &cfg.grid;
    match conjugation::compatibility_residuals(pair.theta(), pair.contraction(), gamma, grid) {
        Ok(r) => {
            rec.push("compat_a_theta_symmetry", anchor::GAMMA_THETA, Ok(r.theta_symmetry));
            rec.push("compat_b_contraction", anchor::GAMMA_W, Ok(r.contraction));
            rec.push("compat_c_defects", anchor::GAMMA_DEFECT, Ok(r.defects));
            rec.push("compat_d_theta_prime_symmetry", anchor::GAMMA_THETA_PRIME, Ok(r.theta_prime_symmetry));
        }
        Err(e) => rec.push("compatibility", anchor::GAMMA_THETA, Err(e)),
    }
    let k = conjugation::cgamma_projection(pair.theta(), gamma, grid);
    let kp = conjugation::cgamma_projection(pair.theta_prime(), gamma, grid);
    let (k, kp) = match (k, kp) {
        (Ok(k), Ok(kp)) => (k, kp),
        (Err(e), _) | (_, Err(e)) => {
            rec.push("cgamma", anchor::CGAMMA_INVARIANT, Err(e));
            return;
        }
    };
    rec.push("cgamma_in_space", anchor::CGAMMA_INVARIANT, Ok(k.in_space_residual));
    rec.push("cgamma_prime_in_space", anchor::CGAMMA_INVARIANT, Ok(kp.in_space_residual));
    rec.push("cgamma_isometry", anchor::CONJUGATION, Ok(k.isometry_residual()));
    rec.push("cgamma_involution", anchor::CONJUGATION, Ok(k.involution_residual()));
    rec.push(
        "cgamma_conjugate_linearity",
        anchor::CONJUGATION,
        conjugation::conjugate_linearity_residual(pair.theta(), gamma, grid, LINEARITY_TRIALS, cfg.seed),
    );
    rec.push(
        "crofoot_conjugation_intertwining",
        anchor::CGAMMA_INTERTWINING,
        Ok(conjugation::intertwining_residual(pair, &k, &kp, CONJUGATION_TRIALS, cfg.seed)),
    );
}
