//! Property tests for the invariants of each module.

use genkf::analysis::symbols;
use genkf::field::connection::{eh_residual, lambda_from_chern, mean_curvature_k};
use genkf::field::{EndField, GenConnection, SpinorField, TorusGrid};
use genkf::fixtures;
use genkf::input::{connection_dump, CoeffExpr, InputSpec, Overrides};
use genkf::multivector::{self, GenVector, GradedForm};
use genkf::structures::{gcs_from_spinor, standard_gk_pair, standard_omega, symplectic_spinor};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn form(n: usize) -> impl Strategy<Value = GradedForm> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << (2 * n))
        .prop_map(move |c| GradedForm::from_coeffs(n, c.into_iter().map(|(a, b)| C64::new(a, b)).collect()).unwrap())
}

fn real_vec(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, len)
}

fn antisym(h: usize, upper: &[f64]) -> Vec<f64> {
    let mut b = vec![0.0; h * h];
    let mut k = 0;
    for i in 0..h {
        for j in i + 1..h {
            b[i * h + j] = upper[k];
            b[j * h + i] = -upper[k];
            k += 1;
        }
    }
    b
}

fn with_dim() -> impl Strategy<Value = usize> {
    1usize..=3
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn clifford_relation((n, e, f, a) in with_dim().prop_flat_map(|n| (Just(n), real_vec(4 * n), real_vec(4 * n), form(n)))) {
        let e = GenVector::from_real(n, &e).unwrap();
        let f = GenVector::from_real(n, &f).unwrap();
        let ef = multivector::clifford_act(&e, &multivector::clifford_act(&f, &a).unwrap()).unwrap();
        let fe = multivector::clifford_act(&f, &multivector::clifford_act(&e, &a).unwrap()).unwrap();
        let two = multivector::pairing(&e, &f).unwrap() * 2.0;
        prop_assert!(ef.add(&fe).unwrap().dist(&a.scale(two)).unwrap() < 1e-12);
    }

    #[test]
    fn mukai_symmetry_and_b_invariance(a in form(2), b in form(2), upper in real_vec(6)) {
        let ab = multivector::mukai_pair(&a, &b).unwrap();
        prop_assert!((ab - multivector::mukai_pair(&b, &a).unwrap()).norm() < 1e-12);
        let bf = GradedForm::real_two_form(2, &antisym(4, &upper)).unwrap();
        let t = multivector::mukai_pair(&multivector::b_transform(&bf, &a).unwrap(), &multivector::b_transform(&bf, &b).unwrap()).unwrap();
        prop_assert!((t - ab).norm() < 1e-12);
    }

    #[test]
    fn b_transformed_structures_are_complex_structures(n in 1usize..=2, upper in real_vec(6)) {
        let h = 2 * n;
        let b = antisym(h, &upper[..h * (h - 1) / 2]);
        let j = gcs_from_spinor(&symplectic_spinor(n, &b, &standard_omega(n)).unwrap()).unwrap();
        let (sq, orth) = j.defects();
        prop_assert!(sq < 1e-10 && orth < 1e-10);
        let ps = j.u_projectors().unwrap();
        let len = 1 << h;
        let sum = ps.iter().fold(DMatrix::<C64>::zeros(len, len), |acc, p| acc + p);
        prop_assert!((sum - DMatrix::<C64>::identity(len, len)).map(|z| z.norm()).max() < 1e-10);
    }

    #[test]
    fn symbol_sequence_is_exact(n in 1usize..=2, r in 1usize..=2, theta in real_vec(4)) {
        prop_assume!(theta[..2 * n].iter().map(|x| x * x).sum::<f64>() > 1e-6);
        let mut comps = vec![0.0; 4 * n];
        comps[2 * n..].copy_from_slice(&theta[..2 * n]);
        let gk = standard_gk_pair(n).unwrap();
        let psi = symplectic_spinor(n, &vec![0.0; 4 * n * n], &standard_omega(n)).unwrap();
        let rep = symbols::symbol_exactness(&gk, &psi, r, &GenVector::from_real(n, &comps).unwrap()).unwrap();
        prop_assert!(rep.all_exact());
        prop_assert_eq!(rep.alternating_sum, 0);
        prop_assert_eq!(rep.kernel_dim, r * r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn d_squared_vanishes(seed in any::<u64>()) {
        let g = TorusGrid::uniform(1, 8, 1.0).unwrap();
        let mut rng = fixtures::rng(seed);
        let prof = fixtures::TrigProfile::random(&mut rng, 2, 3, 2, 1.0);
        let vals = prof.sample(&g);
        let f = genkf::field::FormField::from_fn(&g, |p| {
            GradedForm::from_coeffs(1, vec![C64::new(vals[p], 0.0), C64::new(0.0, vals[p]), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap()
        });
        prop_assert!(f.d().d().max_abs() < 1e-10);
    }

    #[test]
    fn mean_curvature_is_gauge_covariant(seed in any::<u64>()) {
        let g = TorusGrid::uniform(1, 8, 1.0).unwrap();
        let mut rng = fixtures::rng(seed);
        let conn = fixtures::connection(&mut rng, &g, 2, 0.4, 0.4).unwrap();
        let u = fixtures::unitary(&mut rng, 2);
        let psi = SpinorField::constant(&g, &[0.0; 4], &standard_omega(1)).unwrap();
        let lam = lambda_from_chern(&conn, &psi).unwrap();
        let gauged = conn.gauge_constant(&u).unwrap();
        let (_, a) = eh_residual(&conn, &psi, lam).unwrap();
        let (_, b) = eh_residual(&gauged, &psi, lambda_from_chern(&gauged, &psi).unwrap()).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
        let trace = |k: &EndField| -> C64 { (0..g.npts()).map(|p| k.at(p)[0] + k.at(p)[3]).sum() };
        prop_assert!((trace(&mean_curvature_k(&conn, &psi).unwrap()) - trace(&mean_curvature_k(&gauged, &psi).unwrap())).norm() < 1e-9);
    }

    #[test]
    fn connection_dump_round_trips(seed in any::<u64>()) {
        let g = TorusGrid::uniform(1, 8, 1.0).unwrap();
        let conn = fixtures::connection(&mut fixtures::rng(seed), &g, 2, 0.4, 0.4).unwrap();
        let doc = serde_json::json!({
            "n": 1,
            "grid": { "sizes": [8, 8] },
            "bundle": { "rank": 2 },
            "connection": connection_dump(&conn),
        });
        let setup = InputSpec::from_json(&doc.to_string()).unwrap().build(&Overrides::default()).unwrap();
        let back: GenConnection = setup.connection.unwrap();
        for (x, y) in back.a().iter().chain(back.v()).zip(conn.a().iter().chain(conn.v())) {
            prop_assert_eq!(x.values(), y.values());
        }
    }

    #[test]
    fn trig_expressions_evaluate(k1 in -3i32..=3, k2 in -3i32..=3, c in -2.0f64..2.0, phase in -1.0f64..1.0) {
        let g = TorusGrid::new(1, vec![8, 8], vec![1.0, 2.0]).unwrap();
        let src = format!("{c} * sin({k1}*x1 + {k2}*x2 + {phase}) + cos(x2)");
        let e = CoeffExpr::parse(&src, 2).unwrap();
        for p in 0..g.npts() {
            let (x, y) = (std::f64::consts::TAU * g.coord(p, 0), std::f64::consts::TAU * g.coord(p, 1) / 2.0);
            let want = c * (f64::from(k1) * x + f64::from(k2) * y + phase).sin() + y.cos();
            prop_assert!((e.eval(&g, p) - want).abs() < 1e-12);
        }
    }
}
