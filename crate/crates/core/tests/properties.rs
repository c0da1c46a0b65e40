//! Randomized invariants over seeded instances.

use proptest::prelude::*;

use mvcrofoot::conjugation::{self, ConjugationSpec};
use mvcrofoot::crofoot::{crofoot_map, crofoot_theta, Direction, StrictContraction};
use mvcrofoot::inner_function::{random_inner, DEFAULT_RADIUS_CAP};
use mvcrofoot::instance::{generate, GenOptions, InstanceFile};
use mvcrofoot::linalg::{self, c, CMat, CVec};
use mvcrofoot::model_space::{self, kernel_vectors, ModelVector};
use mvcrofoot::oracle::{self, BoundaryGrid};
use num_complex::Complex64;

fn cvec(parts: &[(f64, f64)]) -> CVec {
    CVec::from_iterator(parts.len(), parts.iter().map(|&(re, im)| c(re, im)))
}

fn shape() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=3).prop_flat_map(|d| (Just(d), d..=6))
}

fn coords(n: usize) -> impl Strategy<Value = CVec> {
    prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), n).prop_map(|v| cvec(&v))
}

fn disk_point() -> impl Strategy<Value = Complex64> {
    (0.0..0.9f64, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn theta_is_inner_and_pure((d, n) in shape(), seed in 0u64..1000) {
        let theta = random_inner(d, n, seed, false, DEFAULT_RADIUS_CAP).unwrap();
        prop_assert!(theta.realization().unitarity_residual() < 1e-10);
        prop_assert!(theta.boundary_unitarity_residual(64).unwrap() < 1e-10);
        prop_assert!(theta.value_at_zero_norm() < 1.0);
        prop_assert_eq!(theta.degree(), n);
    }

    #[test]
    fn reproducing_property((d, n) in shape(), seed in 0u64..1000, lambda in disk_point(), x in coords(6), y in coords(3)) {
        let theta = random_inner(d, n, seed, false, DEFAULT_RADIUS_CAP).unwrap();
        let f = ModelVector::new(&theta, x.rows(0, n).into_owned()).unwrap();
        let y = y.rows(0, d).into_owned();
        let (k, _) = kernel_vectors(&theta, lambda, &y).unwrap();
        let lhs = f.inner(&k).unwrap();
        let rhs = linalg::inner(&model_space::evaluate_vector(&theta, &f, lambda).unwrap(), &y);
        prop_assert!((lhs - rhs).norm() < 1e-10 * (1.0 + f.norm() * k.norm()));
    }

    #[test]
    fn coordinates_are_isometric((d, n) in shape(), seed in 0u64..1000, x in coords(6)) {
        let theta = random_inner(d, n, seed, false, DEFAULT_RADIUS_CAP).unwrap();
        let f = ModelVector::new(&theta, x.rows(0, n).into_owned()).unwrap();
        let grid = BoundaryGrid::new(1024).unwrap();
        let s = oracle::sample_model_vector(&theta, &f, &grid).unwrap();
        prop_assert!((s.norm() - f.norm()).abs() < 1e-10 * (1.0 + f.norm()));
    }

    #[test]
    fn crofoot_map_is_unitary((d, n) in shape(), seed in 0u64..1000, w in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 9), cap in 0.05..0.9f64, x in coords(6), y in coords(6)) {
        let theta = random_inner(d, n, seed, false, DEFAULT_RADIUS_CAP).unwrap();
        let g = CMat::from_fn(d, d, |i, j| c(w[3 * i + j].0, w[3 * i + j].1));
        let norm = linalg::op_norm(&g);
        prop_assume!(norm > 1e-3);
        let w = StrictContraction::new(g * c(cap / norm, 0.0)).unwrap();
        let pair = crofoot_theta(&theta, &w).unwrap();
        let f = ModelVector::new(&theta, x.rows(0, n).into_owned()).unwrap();
        let h = ModelVector::new(&theta, y.rows(0, n).into_owned()).unwrap();
        let jf = crofoot_map(&pair, &f, Direction::Forward).unwrap();
        let jh = crofoot_map(&pair, &h, Direction::Forward).unwrap();
        let scale = 1.0 + f.norm() * h.norm();
        prop_assert!((jf.inner(&jh).unwrap() - f.inner(&h).unwrap()).norm() < 1e-10 * scale);
        let back = crofoot_map(&pair, &jf, Direction::Inverse).unwrap();
        prop_assert!(linalg::vec_norm(&(back.coords() - f.coords())) < 1e-10 * (1.0 + f.norm()));
        // Pointwise: (J_W f)(z) = D_{W*}(I − Θ(z)W*)^{-1} f(z).
        let z = c(0.3, -0.4);
        let lhs = model_space::evaluate_vector(pair.theta_prime(), &jf, z).unwrap();
        let rhs = pair.forward_multiplier(z).unwrap() * model_space::evaluate_vector(&theta, &f, z).unwrap();
        prop_assert!(linalg::vec_norm(&(lhs - rhs)) < 1e-10 * (1.0 + f.norm()));
    }

    #[test]
    fn cgamma_is_a_conjugation(d in 1usize..=3, extra in 0usize..3, seed in 0u64..500, x in coords(6), y in coords(6), alpha in (-1.0..1.0f64, -1.0..1.0f64)) {
        let n = d + extra;
        let theta = random_inner(d, n, seed, true, DEFAULT_RADIUS_CAP).unwrap();
        let gamma = ConjugationSpec::entrywise(d);
        let grid = BoundaryGrid::new(1024).unwrap();
        let k = conjugation::cgamma_matrix(&theta, &gamma, &grid).unwrap();
        prop_assert!(k.isometry_residual() < 1e-10);
        prop_assert!(k.involution_residual() < 1e-10);
        let f = ModelVector::new(&theta, x.rows(0, n).into_owned()).unwrap();
        let g = ModelVector::new(&theta, y.rows(0, n).into_owned()).unwrap();
        let a = c(alpha.0, alpha.1);
        let combo = ModelVector::new(&theta, f.coords() * a + g.coords()).unwrap();
        let lhs = k.apply(&combo).unwrap();
        let rhs = k.apply(&f).unwrap().coords() * a.conj() + k.apply(&g).unwrap().coords();
        prop_assert!(linalg::vec_norm(&(lhs.coords() - rhs)) < 1e-10 * (1.0 + combo.norm()));
        // ⟨Cf, Cg⟩ = ⟨g, f⟩.
        let cf = k.apply(&f).unwrap();
        let cg = k.apply(&g).unwrap();
        prop_assert!((cf.inner(&cg).unwrap() - g.inner(&f).unwrap()).norm() < 1e-10 * (1.0 + f.norm() * g.norm()));
    }

    #[test]
    fn instance_text_round_trips((d, n) in shape(), seed in 0u64..1000, symmetric in any::<bool>()) {
        let mut opts = GenOptions::new(d, n, seed);
        opts.symmetric = symmetric;
        let (mut file, inst) = match generate(&opts) {
            Ok(v) => v,
            Err(_) => return Ok(()),
        };
        let text = file.to_canonical_string().unwrap();
        let mut parsed = InstanceFile::parse(&text).unwrap();
        prop_assert_eq!(parsed.to_canonical_string().unwrap(), text);
        let rebuilt = parsed.build().unwrap();
        prop_assert_eq!(rebuilt.theta.fingerprint(), inst.theta.fingerprint());
    }

    #[test]
    fn malformed_text_never_panics(text in ".{0,200}") {
        if let Ok(file) = InstanceFile::parse(&text) {
            let _ = file.build();
        }
    }
}
