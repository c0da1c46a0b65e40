//! The classical scalar Crofoot transform `(θ − w)/(1 − w̄θ)` side by side
//! with the matrix formula and the transformed realization.

use num_complex::Complex64;
use serde::Serialize;

use crate::crofoot::{crofoot_theta, unitarity_report, CrofootPair, StrictContraction};
use crate::error::{Error, Result};
use crate::inner_function::{assemble_inner, ElementaryFactor, MatrixInnerFunction};
use crate::linalg::{self, c, CMat, CVec, ONE};
use crate::oracle::BoundaryGrid;

pub const TABLE_POINTS: usize = 16;
const INTERIOR_RADIUS: f64 = 0.5;
const NORM_PAIRS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DemoRow {
    pub z_re: f64,
    pub z_im: f64,
    pub boundary: bool,
    pub theta_re: f64,
    pub theta_im: f64,
    pub formula_re: f64,
    pub formula_im: f64,
    pub mobius_re: f64,
    pub mobius_im: f64,
    pub realization_re: f64,
    pub realization_im: f64,
    /// `|formula − mobius|`.
    pub discrepancy: f64,
    pub modulus: f64,
}

#[derive(Debug, Clone)]
pub struct DemoTable {
    pub rows: Vec<DemoRow>,
    /// Worst `|⟨J_w f, J_w g⟩ − ⟨f, g⟩|` relative to `‖f‖‖g‖`.
    pub norm_preservation: f64,
    pub max_discrepancy: f64,
    /// Worst `||Θ′| − 1|` over the boundary rows.
    pub boundary_modulus: f64,
}

/// Blaschke product `Π b_a` as a 1×1 inner function.
pub fn scalar_blaschke(zeros: &[Complex64]) -> Result<MatrixInnerFunction> {
    if zeros.is_empty() {
        return Err(Error::FactorInvalid("at least one zero is required".into()));
    }
    let factors = zeros
        .iter()
        .map(|&a| ElementaryFactor::new(a, CVec::from_element(1, ONE)))
        .collect::<Result<Vec<_>>>()?;
    assemble_inner(linalg::identity(1), factors)
}

/// Eight boundary points `e^{2πik/8}` followed by eight interior points
/// on the circle of radius one half, offset by half a step.
pub fn table_points() -> Vec<Complex64> {
    let half = TABLE_POINTS / 2;
    let step = std::f64::consts::TAU / half as f64;
    let boundary = (0..half).map(|k| Complex64::from_polar(1.0, step * k as f64));
    let interior = (0..half).map(|k| Complex64::from_polar(INTERIOR_RADIUS, step * (k as f64 + 0.5)));
    boundary.chain(interior).collect()
}

pub fn scalar_demo(w: Complex64, zeros: &[Complex64]) -> Result<DemoTable> {
    let contraction = StrictContraction::new(CMat::from_element(1, 1, w))?;
    let theta = scalar_blaschke(zeros)?;
    let pair = crofoot_theta(&theta, &contraction)?;
    let mut rows = Vec::with_capacity(TABLE_POINTS);
    for (i, z) in table_points().into_iter().enumerate() {
        rows.push(row(&pair, w, z, i < TABLE_POINTS / 2)?);
    }
    let report = unitarity_report(&pair, NORM_PAIRS, 0, &BoundaryGrid::new(crate::oracle::DEFAULT_GRID)?)?;
    let max_discrepancy = rows.iter().map(|r| r.discrepancy).fold(0.0, f64::max);
    let boundary_modulus = rows.iter().filter(|r| r.boundary).map(|r| (r.modulus - 1.0).abs()).fold(0.0, f64::max);
    Ok(DemoTable { rows, norm_preservation: report.inner_product, max_discrepancy, boundary_modulus })
}

fn row(pair: &CrofootPair, w: Complex64, z: Complex64, boundary: bool) -> Result<DemoRow> {
    let theta = pair.theta().evaluate_factored(z).map_or_else(|| pair.theta().evaluate(z), Ok)?[(0, 0)];
    let formula = pair.theta_prime_pointwise(z)?[(0, 0)];
    let mobius = (theta - w) / (c(1.0, 0.0) - w.conj() * theta);
    let realization = pair.theta_prime().evaluate(z)?[(0, 0)];
    Ok(DemoRow {
        z_re: z.re,
        z_im: z.im,
        boundary,
        theta_re: theta.re,
        theta_im: theta.im,
        formula_re: formula.re,
        formula_im: formula.im,
        mobius_re: mobius.re,
        mobius_im: mobius.im,
        realization_re: realization.re,
        realization_im: realization.im,
        discrepancy: (formula - mobius).norm(),
        modulus: formula.norm(),
    })
}

/// Parses `a`, `bi`, `a+bi` or `a-bi` (also with `j`).
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|ch| !ch.is_whitespace()).collect();
    let bad = || Error::Malformed(format!("cannot parse complex number {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    let num = |p: &str| -> Result<f64> {
        let v = match p {
            "" | "+" => 1.0,
            "-" => -1.0,
            _ => p.parse::<f64>().map_err(|_| bad())?,
        };
        if v.is_finite() { Ok(v) } else { Err(bad()) }
    };
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return Ok(c(t.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad)?, 0.0));
    };
    // Split at the last sign that is not the leading one and not part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => Ok(c(num(&body[..k])?, num(&body[k..])?)),
        None => Ok(c(0.0, num(body)?)),
    }
}

/// Comma-separated complex list.
pub fn parse_complex_list(s: &str) -> Result<Vec<Complex64>> {
    s.split(',').map(parse_complex).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_complex_forms() {
        assert_eq!(parse_complex("0.5").unwrap(), c(0.5, 0.0));
        assert_eq!(parse_complex("0.3+0.1i").unwrap(), c(0.3, 0.1));
        assert_eq!(parse_complex("-0.3-0.1i").unwrap(), c(-0.3, -0.1));
        assert_eq!(parse_complex("i").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("-2e-1i").unwrap(), c(0.0, -0.2));
        assert_eq!(parse_complex("1e-1+2e-1j").unwrap(), c(0.1, 0.2));
        assert_eq!(parse_complex_list("0,0").unwrap(), vec![c(0.0, 0.0); 2]);
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("").is_err());
        assert!(parse_complex("nan").is_err());
    }

    #[test]
    fn z_squared_matches_mobius() {
        let t = scalar_demo(c(0.5, 0.0), &[c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(t.rows.len(), 16);
        assert!(t.max_discrepancy < 1e-14);
        assert!(t.norm_preservation < 1e-10);
    }

    #[test]
    fn zero_w_is_identity() {
        let t = scalar_demo(c(0.0, 0.0), &[c(0.3, 0.1), c(-0.2, 0.5)]).unwrap();
        for r in &t.rows {
            assert_eq!((r.formula_re, r.formula_im), (r.theta_re, r.theta_im));
        }
    }

    #[test]
    fn off_center_zero_is_unimodular_on_boundary() {
        let t = scalar_demo(c(0.5, 0.0), &[c(0.3, 0.1)]).unwrap();
        assert!(t.rows.iter().all(|r| r.formula_re.is_finite() && r.realization_im.is_finite()));
        assert!(t.boundary_modulus < 1e-12);
    }

    #[test]
    fn rejects_non_strict_w() {
        assert!(matches!(scalar_demo(c(1.0, 0.0), &[c(0.0, 0.0)]), Err(Error::NotStrict { .. })));
    }
}
