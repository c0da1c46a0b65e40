//! Instance files: a seeded Θ, a contraction W, an optional conjugation and
//! symbols, stored as canonical JSON.
//!
//! Floats are written as `{:.16e}` (17 significant digits), so parsing and
//! re-saving a file reproduces it byte for byte.

use std::io;
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};

use crate::conjugation::{make_conjugation, symmetric_contraction, ConjugationSpec};
use crate::crofoot::StrictContraction;
use crate::error::{Error, Result};
use crate::inner_function::{
    assemble_inner_with, random_inner, ElementaryFactor, InnerOptions, MatrixInnerFunction, DEFAULT_RADIUS_CAP,
};
use crate::linalg::{self, c, CMat, CVec};
use crate::sampling;
use crate::tto::SymbolPolynomial;

pub const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_W_NORM_CAP: f64 = 0.6;

/// Stream offsets for the generator's auxiliary draws; the Θ draw uses the
/// seed directly.
const W_STREAM: u64 = 1;
const SYMBOL_STREAM: u64 = 2;

pub type Complex = [f64; 2];
pub type Matrix = Vec<Vec<Complex>>;

// Field order is alphabetical so the key order of the output is canonical.

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub content_hash: String,
    pub flags: Flags,
    pub gamma: Option<Matrix>,
    pub seed: u64,
    pub symbols: Vec<SymbolSpec>,
    pub theta: ThetaSpec,
    pub version: u32,
    pub w: Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Flags {
    pub radius_cap: f64,
    pub symmetric: bool,
    pub w_norm_cap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaSpec {
    pub dim: usize,
    /// Application order: `Θ = U0 · F_1 ⋯ F_n`.
    pub factors: Vec<FactorSpec>,
    /// Row-major.
    pub u0: Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSpec {
    pub direction: Vec<Complex>,
    pub zero: Complex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolSpec {
    pub terms: Vec<SymbolTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolTerm {
    pub coefficient: Matrix,
    pub k: i64,
}

/// The validated mathematical objects described by an instance file.
#[derive(Debug, Clone)]
pub struct Instance {
    pub theta: MatrixInnerFunction,
    pub w: StrictContraction,
    pub gamma: Option<ConjugationSpec>,
    pub symbols: Vec<SymbolPolynomial>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenOptions {
    pub dim: usize,
    pub degree: usize,
    pub seed: u64,
    pub symmetric: bool,
    pub w_norm_cap: f64,
    pub radius_cap: f64,
}

impl GenOptions {
    pub fn new(dim: usize, degree: usize, seed: u64) -> Self {
        Self { dim, degree, seed, symmetric: false, w_norm_cap: DEFAULT_W_NORM_CAP, radius_cap: DEFAULT_RADIUS_CAP }
    }
}

fn to_complex(z: Complex64) -> Complex {
    [z.re, z.im]
}

fn from_complex(z: &Complex) -> Complex64 {
    c(z[0], z[1])
}

pub fn matrix_to_rows(m: &CMat) -> Matrix {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| to_complex(m[(i, j)])).collect()).collect()
}

pub fn rows_to_matrix(rows: &Matrix, what: &str) -> Result<CMat> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if n == 0 || cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Malformed(format!("{what}: expected a non-empty rectangular matrix")));
    }
    check_finite(rows.iter().flatten(), what)?;
    Ok(CMat::from_fn(n, cols, |i, j| from_complex(&rows[i][j])))
}

fn check_finite<'a>(values: impl IntoIterator<Item = &'a Complex>, what: &str) -> Result<()> {
    if values.into_iter().flatten().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Malformed(format!("{what}: non-finite entry")))
    }
}

fn vector_to_list(v: &CVec) -> Vec<Complex> {
    v.iter().map(|&z| to_complex(z)).collect()
}

fn square(m: CMat, d: usize, what: &str) -> Result<CMat> {
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::DimensionMismatch(format!("{what} must be {d}×{d}, got {}×{}", m.nrows(), m.ncols())));
    }
    Ok(m)
}

/// Pretty JSON with floats printed as `{:.16e}`.
struct CanonicalFormatter(PrettyFormatter<'static>);

impl Formatter for CanonicalFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Canonical JSON text (with trailing newline) for any serializable value.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, CanonicalFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| Error::Malformed(e.to_string()))
}

impl InstanceFile {
    /// sha256 of the canonical text with an empty hash field.
    pub fn compute_hash(&self) -> Result<String> {
        let mut blank = self.clone();
        blank.content_hash.clear();
        let text = to_canonical_json(&blank)?;
        Ok(hex::encode(Sha256::digest(text.as_bytes())))
    }

    /// Recomputes the hash and renders the canonical text.
    pub fn to_canonical_string(&mut self) -> Result<String> {
        self.content_hash = self.compute_hash()?;
        to_canonical_json(self)
    }

    pub fn save(&mut self, path: &Path) -> Result<()> {
        let text = self.to_canonical_string()?;
        std::fs::write(path, text)?;
        Ok(())
    }

    /// Parses without validating the contents.
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Reads, builds and checks the recorded hash.
    pub fn load(path: &Path) -> Result<(Self, Instance)> {
        let text = std::fs::read_to_string(path)?;
        let file = Self::parse(&text)?;
        let instance = file.build()?;
        file.verify_hash()?;
        Ok((file, instance))
    }

    pub fn verify_hash(&self) -> Result<()> {
        let expected = self.compute_hash()?;
        if expected != self.content_hash {
            return Err(Error::Malformed(format!(
                "content hash mismatch: recorded {}, computed {expected}",
                self.content_hash
            )));
        }
        Ok(())
    }

    pub fn from_parts(
        theta: &MatrixInnerFunction,
        w: &StrictContraction,
        gamma: Option<&ConjugationSpec>,
        symbols: &[SymbolPolynomial],
        seed: u64,
        flags: Flags,
    ) -> Result<Self> {
        let fact = theta
            .factorization()
            .ok_or_else(|| Error::Malformed("instance files store Θ as a factor list".into()))?;
        let theta = ThetaSpec {
            dim: theta.dim(),
            u0: matrix_to_rows(&fact.u0),
            factors: fact
                .factors
                .iter()
                .map(|f| FactorSpec { zero: to_complex(f.zero()), direction: vector_to_list(f.direction()) })
                .collect(),
        };
        let symbols = symbols
            .iter()
            .map(|s| SymbolSpec {
                terms: s.indexed().map(|(k, m)| SymbolTerm { k, coefficient: matrix_to_rows(m) }).collect(),
            })
            .collect();
        let mut file = Self {
            content_hash: String::new(),
            flags,
            gamma: gamma.map(|g| matrix_to_rows(g.matrix())),
            seed,
            symbols,
            theta,
            version: FORMAT_VERSION,
            w: matrix_to_rows(w.matrix()),
        };
        file.content_hash = file.compute_hash()?;
        Ok(file)
    }

    /// Validates every component and builds the mathematical objects.
    pub fn build(&self) -> Result<Instance> {
        if self.version != FORMAT_VERSION {
            return Err(Error::Malformed(format!("unsupported version {}", self.version)));
        }
        let radius_cap = self.flags.radius_cap;
        if !(radius_cap > 0.0 && radius_cap < 1.0) {
            return Err(Error::Malformed(format!("radius_cap {radius_cap} must lie in (0, 1)")));
        }
        let d = self.theta.dim;
        if d == 0 {
            return Err(Error::Malformed("dimension must be positive".into()));
        }
        let u0 = square(rows_to_matrix(&self.theta.u0, "theta.u0")?, d, "theta.u0")?;
        let factors = self
            .theta
            .factors
            .iter()
            .map(|f| {
                check_finite(f.direction.iter().chain(std::iter::once(&f.zero)), "factor")?;
                if f.direction.len() != d {
                    return Err(Error::DimensionMismatch(format!("factor direction must have length {d}")));
                }
                ElementaryFactor::new(
                    from_complex(&f.zero),
                    CVec::from_iterator(d, f.direction.iter().map(from_complex)),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let opts = InnerOptions { radius_cap, ..InnerOptions::default() };
        let theta = assemble_inner_with(u0, factors, &opts)?;
        let w = StrictContraction::new(square(rows_to_matrix(&self.w, "w")?, d, "w")?)?;
        let gamma = match &self.gamma {
            Some(rows) => Some(make_conjugation(square(rows_to_matrix(rows, "gamma")?, d, "gamma")?)?),
            None => None,
        };
        let symbols = self.symbols.iter().map(|s| build_symbol(s, d)).collect::<Result<Vec<_>>>()?;
        Ok(Instance { theta, w, gamma, symbols })
    }
}

fn build_symbol(spec: &SymbolSpec, d: usize) -> Result<SymbolPolynomial> {
    if spec.terms.is_empty() {
        return Err(Error::Malformed("symbol without terms".into()));
    }
    let m = spec.terms.iter().map(|t| t.k.unsigned_abs() as usize).max().unwrap_or(0);
    if m > 64 {
        return Err(Error::Malformed(format!("symbol band {m} exceeds 64")));
    }
    let mut coeffs = vec![CMat::zeros(d, d); 2 * m + 1];
    let mut seen = vec![false; 2 * m + 1];
    for t in &spec.terms {
        let idx = (t.k + m as i64) as usize;
        if seen[idx] {
            return Err(Error::Malformed(format!("symbol index k = {} repeated", t.k)));
        }
        seen[idx] = true;
        coeffs[idx] = square(rows_to_matrix(&t.coefficient, "symbol coefficient")?, d, "symbol coefficient")?;
    }
    SymbolPolynomial::new(m, coeffs)
}

/// Seeded random instance: pure Θ, strict W with `‖W‖ = w_norm_cap`, and one
/// band-1 symbol. Symmetric instances get `Wᵀ = W` and entrywise conjugation.
pub fn generate(opts: &GenOptions) -> Result<(InstanceFile, Instance)> {
    if opts.dim == 0 || opts.degree == 0 {
        return Err(Error::Malformed("dimension and degree must be positive".into()));
    }
    if !(opts.w_norm_cap > 0.0 && opts.w_norm_cap < 1.0) {
        return Err(Error::Malformed(format!("w-norm-cap {} must lie in (0, 1)", opts.w_norm_cap)));
    }
    if !(opts.radius_cap > 0.0 && opts.radius_cap < 1.0) {
        return Err(Error::Malformed(format!("radius-cap {} must lie in (0, 1)", opts.radius_cap)));
    }
    let d = opts.dim;
    let theta = random_inner(d, opts.degree, opts.seed, opts.symmetric, opts.radius_cap)?;
    let mut rng = sampling::trial_rng(opts.seed, W_STREAM);
    let g = sampling::gaussian_mat(&mut rng, d, d);
    let w = if opts.symmetric {
        symmetric_contraction(&g, opts.w_norm_cap)?
    } else {
        let norm = linalg::op_norm(&g);
        StrictContraction::new(g * c(opts.w_norm_cap / norm, 0.0))?
    };
    let gamma = opts.symmetric.then(|| ConjugationSpec::entrywise(d));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(SYMBOL_STREAM);
    let symbols = vec![SymbolPolynomial::random(&mut rng, d, 1)];
    let flags = Flags { radius_cap: opts.radius_cap, symmetric: opts.symmetric, w_norm_cap: opts.w_norm_cap };
    let file = InstanceFile::from_parts(&theta, &w, gamma.as_ref(), &symbols, opts.seed, flags)?;
    Ok((file, Instance { theta, w, gamma, symbols }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let opts = GenOptions::new(2, 3, 7);
        let (mut a, _) = generate(&opts).unwrap();
        let (mut b, _) = generate(&opts).unwrap();
        assert_eq!(a.to_canonical_string().unwrap(), b.to_canonical_string().unwrap());
    }

    #[test]
    fn load_then_save_is_byte_identical() {
        let mut opts = GenOptions::new(2, 3, 7);
        opts.symmetric = true;
        let (mut file, _) = generate(&opts).unwrap();
        let text = file.to_canonical_string().unwrap();
        let mut parsed = InstanceFile::parse(&text).unwrap();
        parsed.verify_hash().unwrap();
        assert_eq!(parsed.to_canonical_string().unwrap(), text);
        let built = parsed.build().unwrap();
        assert_eq!(built.gamma, Some(ConjugationSpec::entrywise(2)));
        assert!(linalg::op_norm(&(built.w.matrix() - built.w.matrix().transpose())) < 1e-15);
    }

    #[test]
    fn floats_use_seventeen_digits() {
        let text = to_canonical_json(&vec![0.1f64, -2.0, 1e-300]).unwrap();
        assert!(text.contains("1.0000000000000001e-1"));
        assert!(text.contains("-2.0000000000000000e0"));
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, vec![0.1, -2.0, 1e-300]);
    }

    #[test]
    fn rebuilt_theta_matches_generated() {
        let (file, inst) = generate(&GenOptions::new(2, 4, 11)).unwrap();
        let rebuilt = file.build().unwrap();
        assert_eq!(rebuilt.theta.fingerprint(), inst.theta.fingerprint());
        assert!((inst.w.norm() - DEFAULT_W_NORM_CAP).abs() < 1e-12);
        assert_eq!(rebuilt.symbols, inst.symbols);
    }

    #[test]
    fn validation_errors() {
        let (file, _) = generate(&GenOptions::new(2, 3, 7)).unwrap();
        let mut bad = file.clone();
        bad.w = matrix_to_rows(&(linalg::identity(2) * c(1.2, 0.0)));
        assert!(matches!(bad.build(), Err(Error::NotStrict { .. })));
        let mut bad = file.clone();
        bad.w[0].pop();
        assert!(matches!(bad.build(), Err(Error::Malformed(_))));
        let mut bad = file.clone();
        bad.seed += 1;
        assert!(matches!(bad.verify_hash(), Err(Error::Malformed(_))));
        assert!(InstanceFile::parse("{\"version\": 1}").is_err());
        assert!(InstanceFile::parse("not json").is_err());
    }

    #[test]
    fn infeasible_generation_fails() {
        assert!(matches!(generate(&GenOptions::new(2, 1, 1)), Err(Error::GenerationFailed { .. })));
    }
}
