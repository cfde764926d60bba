//! The identity suite behind `genkf verify`: pointwise algebra, structures,
//! field calculus, moment map and the analyses, at the configured n, rank
//! and grid. Every check is seeded and independent of thread count.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::{cohiggs, soliton, solver, symbols};
use crate::calibration::{self, lambda_field};
use crate::error::Result;
use crate::field::canonical::canonical_connection_line;
use crate::field::connection::{
    bfield_covariance_sides, chern_pair, closure_check, commutator_b_term, eh_residual, mean_curvature_k,
    trace_curvature,
};
use crate::field::dbar::dbar_residual;
use crate::field::fields::mat;
use crate::field::moment::{
    covariant_derivative, frame_identity_defects, g_gm, integration_by_parts, moment_derivative,
    moment_from_mean_curvature, moment_value, omega_gm, spinor_form,
};
use crate::field::{EndField, FormField, GenConnection, SpinorField, TorusGrid};
use crate::fixtures::{self, TrigProfile};
use crate::input::Setup;
use crate::multivector::{self, GenVector, GradedForm};
use crate::numerics::{max_abs_real, pairwise_sum_c, CMat};
use crate::report::{check_above, check_error, Check};
use crate::structures::{
    complex_volume_form, gcs_complex, gcs_from_spinor, gcs_symplectic, gk_validate, kahler_complex, standard_complex,
    standard_gk_pair, standard_omega, symplectic_spinor, u_project,
};

/// Tolerances shared with the acceptance criteria.
pub const ALGEBRA_TOL: f64 = 1e-12;
pub const STRUCTURE_TOL: f64 = 1e-10;
pub const IDENTITY_TOL: f64 = 1e-10;
pub const SPECIALIZATION_TOL: f64 = 1e-8;
pub const DERIVATIVE_TOL: f64 = 1e-6;
pub const DERIVATIVE_STEP: f64 = 1e-4;

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random trials for the pointwise algebra and the symbol sequence.
    pub trials: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 1, trials: 100, tol: 1e-8, max_iter: 10_000 }
    }
}

fn random_form(rng: &mut ChaCha8Rng, n: usize) -> GradedForm {
    let len = 1 << (2 * n);
    let c = (0..len).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    GradedForm::from_coeffs(n, c).expect("length 4^n")
}

fn random_genvector(rng: &mut ChaCha8Rng, n: usize) -> GenVector {
    let c: Vec<C64> = (0..4 * n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    GenVector::from_slice(n, &c).expect("length 4n")
}

fn random_b(rng: &mut ChaCha8Rng, n: usize, amp: f64) -> Vec<f64> {
    fixtures::antisymmetric(rng, 2 * n, amp)
}

fn max_over<T>(items: impl IntoIterator<Item = T>, f: impl Fn(T) -> Result<f64>) -> Result<f64> {
    let mut m = 0.0f64;
    for x in items {
        m = m.max(f(x)?);
    }
    Ok(m)
}

/// Clifford relation, Mukai symmetry, adjunction, b-invariance of the pairing.
pub fn algebra_checks(n: usize, trials: usize, rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut cases = Vec::with_capacity(trials);
    for _ in 0..trials {
        let e = random_genvector(rng, n);
        let f = random_genvector(rng, n);
        let a = random_form(rng, n);
        let b = random_form(rng, n);
        let bf = GradedForm::real_two_form(n, &random_b(rng, n, 1.0)).expect("shape");
        cases.push((e, f, a, b, bf));
    }
    let sign_n = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    vec![
        check_error("clifford relation", "e.f + f.e = 2<e,f>", ALGEBRA_TOL, || {
            max_over(&cases, |(e, f, a, _, _)| {
                let ef = multivector::clifford_act(e, &multivector::clifford_act(f, a)?)?;
                let fe = multivector::clifford_act(f, &multivector::clifford_act(e, a)?)?;
                let two = a.scale(multivector::pairing(e, f)? * 2.0);
                ef.add(&fe)?.dist(&two)
            })
        }),
        check_error("mukai symmetry", "<a,b>_s = (-1)^n <b,a>_s", ALGEBRA_TOL, || {
            max_over(&cases, |(_, _, a, b, _)| {
                Ok((multivector::mukai_pair(a, b)? - multivector::mukai_pair(b, a)? * sign_n).norm())
            })
        }),
        check_error("adjunction sign", "<e.a,b>_s = -<a,e.b>_s", ALGEBRA_TOL, || {
            max_over(&cases, |(e, _, a, b, _)| {
                let l = multivector::mukai_pair(&multivector::clifford_act(e, a)?, b)?;
                let r = multivector::mukai_pair(a, &multivector::clifford_act(e, b)?)?;
                Ok((l + r).norm())
            })
        }),
        check_error("b-field pairing invariance", "<e^b a, e^b b>_s = <a,b>_s", ALGEBRA_TOL, || {
            max_over(&cases, |(_, _, a, b, bf)| {
                let l = multivector::mukai_pair(&multivector::b_transform(bf, a)?, &multivector::b_transform(bf, b)?)?;
                Ok((l - multivector::mukai_pair(a, b)?).norm())
            })
        }),
        check_error("exponential of 2-forms", "e^b ^ e^{-b} = 1", ALGEBRA_TOL, || {
            max_over(&cases, |(_, _, _, _, bf)| {
                let p = multivector::exp_two_form(bf)?;
                let m = multivector::exp_two_form(&bf.scale(C64::new(-1.0, 0.0)))?;
                multivector::wedge(&p, &m)?.dist(&GradedForm::one(n)?)
            })
        }),
    ]
}

/// Generalized complex and generalized Kahler structure checks at a point.
pub fn structure_checks(n: usize, omega: &[f64], rng: &mut ChaCha8Rng) -> Vec<Check> {
    let b = random_b(rng, n, 0.5);
    vec![
        check_error("J squared", "J^2 = -I", STRUCTURE_TOL, || {
            let a = gcs_symplectic(n, omega)?.defects().0;
            let c = gcs_complex(n, &standard_complex(n))?.defects().0;
            Ok(a.max(c))
        }),
        check_error("pairing orthogonality", "J^T Q J = Q", STRUCTURE_TOL, || {
            let a = gcs_symplectic(n, omega)?.defects().1;
            let c = gcs_complex(n, &standard_complex(n))?.defects().1;
            Ok(a.max(c))
        }),
        check_error("symplectic spinor round trip", "J(e^{i omega}) = J_omega", STRUCTURE_TOL, || {
            let js = gcs_from_spinor(&symplectic_spinor(n, &vec![0.0; 4 * n * n], omega)?)?;
            Ok(max_abs_real(&(js.mat() - gcs_symplectic(n, omega)?.mat())))
        }),
        check_error("complex spinor round trip", "J(dz_1 ^ ... ^ dz_n) = J_I", STRUCTURE_TOL, || {
            let jc = gcs_from_spinor(&complex_volume_form(n, false)?)?;
            Ok(max_abs_real(&(jc.mat() - gcs_complex(n, &standard_complex(n))?.mat())))
        }),
        check_error("b-transform of structures", "J(e^b phi) = e^b J(phi) e^{-b}", STRUCTURE_TOL, || {
            let psi = symplectic_spinor(n, &vec![0.0; 4 * n * n], omega)?;
            let bpsi = multivector::b_transform(&GradedForm::real_two_form(n, &b)?, &psi)?;
            let direct = gcs_from_spinor(&bpsi)?;
            Ok(max_abs_real(&(direct.mat() - gcs_symplectic(n, omega)?.b_conjugate(&b)?.mat())))
        }),
        check_error("U^k resolution of identity", "sum_k P_k = I", STRUCTURE_TOL, || {
            let ps = gcs_symplectic(n, omega)?.u_projectors()?;
            let len = 1 << (2 * n);
            let sum = ps.iter().fold(CMat::zeros(len, len), |acc, p| acc + p);
            Ok((sum - CMat::identity(len, len)).iter().map(|z| z.norm()).fold(0.0, f64::max))
        }),
        check_error("pure spinor spans U^{-n}", "psi in U^{-n}", STRUCTURE_TOL, || {
            let psi = symplectic_spinor(n, &vec![0.0; 4 * n * n], omega)?;
            u_project(&gcs_symplectic(n, omega)?, -(n as i64), &psi)?.dist(&psi)
        }),
        check_above("generalized Kahler positivity", "-J1 J2 positive definite", 0.0, || {
            Ok(standard_gk_pair(n)?.min_eigenvalue)
        }),
        check_error("identical pair rejected", "(J, J) has indefinite metric", 0.0, || {
            let j = gcs_complex(n, &standard_complex(n))?;
            Ok(if gk_validate(&j, &j).is_err() { 0.0 } else { 1.0 })
        }),
    ]
}

fn random_form_field(rng: &mut ChaCha8Rng, g: &TorusGrid) -> FormField {
    let len = 1 << g.dim();
    let profiles: Vec<(Vec<f64>, Vec<f64>)> = (0..len)
        .map(|_| {
            (
                TrigProfile::random(rng, g.dim(), 3, 2, 1.0).sample(g),
                TrigProfile::random(rng, g.dim(), 3, 2, 1.0).sample(g),
            )
        })
        .collect();
    FormField::from_fn(g, |p| {
        let c = profiles.iter().map(|(re, im)| C64::new(re[p], im[p])).collect();
        GradedForm::from_coeffs(g.dim_n(), c).expect("length")
    })
}

fn end_max_diff(a: &EndField, b: &EndField) -> Result<f64> {
    Ok(a.sub(b)?.max_abs())
}

/// Discrete calculus, curvature, specializations and Chern data.
pub fn field_checks(setup: &Setup, rng: &mut ChaCha8Rng) -> Vec<Check> {
    let g = &setup.grid;
    let n = g.dim_n();
    let dim = g.dim();
    let r = setup.rank;
    let psi = &setup.psi;
    let omega = setup.omega_const.clone().unwrap_or_else(|| standard_omega(n));
    let form = random_form_field(rng, g);
    let conn = fixtures::connection(rng, g, r, 0.4, 0.4).expect("valid fixture");
    let conn_a = fixtures::connection(rng, g, r, 0.4, 0.0).expect("valid fixture");
    let b = random_b(rng, n, 0.6);
    let u = fixtures::unitary(rng, r);
    let w_psi = SpinorField::constant(g, &vec![0.0; dim * dim], &omega);
    let mut out = vec![
        check_error("d squared", "d o d = 0", IDENTITY_TOL, || Ok(form.d().d().max_abs())),
        check_error("discrete Stokes", "sum over the torus of d(form) = 0", IDENTITY_TOL, || {
            let df = form.d();
            let len = df.len_per_point();
            Ok((0..len)
                .map(|m| pairwise_sum_c(&(0..g.npts()).map(|p| df.at(p)[m]).collect::<Vec<_>>()).norm())
                .fold(0.0, f64::max)
                * g.cell_volume())
        }),
    ];
    let (res, tol) = closure_check(psi.psi());
    out.push(Check::max_error("psi closed", "d psi = 0", tol, res));
    out.push(check_error("flat connection curvature", "F = 0 for the trivial connection", 0.0, || {
        Ok(eh_residual(&GenConnection::flat(g, r), psi, 0.0)?.1)
    }));

    let cov = bfield_covariance_sides(&conn, psi, &b, calibration::BFIELD_SIGN);
    out.push(check_error(
        "curvature covariance",
        "F_{e^b A}(e^b psi) = e^b F_A(psi)",
        IDENTITY_TOL,
        || {
            let (l, rr) = cov.clone()?;
            l.dist(&rr)
        },
    ));
    out.push(check_error(
        "covariance defect is the commutator term",
        "F_{e^b A}(e^b psi) - e^b F_A(psi) = sum [V^mu, V^nu] b_{nu mu} e^b psi",
        IDENTITY_TOL,
        || {
            let (l, rr) = cov.clone()?;
            let psi_b = psi.b_transform(&b)?;
            let term = commutator_b_term(&conn, &b, psi_b.psi())?;
            l.sub(&rr)?.dist(&term)
        },
    ));
    out.push(check_error("EH b-invariance", "K_{e^b A}(e^b psi) = K_A(psi)", IDENTITY_TOL, || {
        let psi_b = psi.b_transform(&b)?;
        let conn_b = crate::field::connection::bfield_act_connection(
            &crate::field::connection::constant_two_form(g, &b)?,
            &conn,
        )?;
        end_max_diff(&mean_curvature_k(&conn_b, &psi_b)?, &mean_curvature_k(&conn, psi)?)
    }));
    out.push(check_error("HYM specialization", "K = -i Lambda_omega F_A when V = 0", SPECIALIZATION_TOL, || {
        let w_psi = w_psi.clone()?;
        let k = mean_curvature_k(&conn_a, &w_psi)?;
        let model = lambda_field(&conn_a, &omega, None)?.scale(C64::new(0.0, -calibration::HYM_SCALE));
        end_max_diff(&k, &model)
    }));
    out.push(check_error(
        "line-bundle specialization",
        "K = -i Lambda_omega (F_A + c i L_v omega) for V = i v",
        SPECIALIZATION_TOL,
        || {
            let c = 0.3;
            let bw: Vec<f64> = omega.iter().map(|x| c * x).collect();
            let lpsi = SpinorField::constant(g, &bw, &omega)?;
            let line = fixtures::connection(&mut fixtures::rng(rng_seed(rng)), g, 1, 0.4, 0.4)?;
            let v: Vec<Vec<f64>> = line.v().iter().map(|f| f.values().iter().map(|z| z.im).collect()).collect();
            let k = mean_curvature_k(&line, &lpsi)?;
            let model = lambda_field(&line, &omega, Some(&calibration::lie_term(g, &v, &omega, c)?))?
                .scale(C64::new(0.0, -calibration::LINE_SCALE));
            end_max_diff(&k, &model)
        },
    ));
    out.push(check_error(
        "co-Higgs specialization",
        "i Lambda_omega F_A + kappa sum [N, N^dagger] = lambda",
        SPECIALIZATION_TOL,
        || {
            let rr = r.max(2);
            // A_0 depending on x^1 alone keeps F of type (1,1) for every n.
            let (amp, phase) = (rng.gen_range(0.1..0.5), rng.gen_range(0.0..std::f64::consts::TAU));
            let wave = std::f64::consts::TAU / g.periods()[1];
            let a0 = EndField::scalar(g, rr, |p| C64::new(0.0, amp * (wave * g.coord(p, 1) + phase).sin()));
            let mut nmat = fixtures::skew_matrix(&mut fixtures::rng(rng_seed(rng)), rr, 1.0);
            for i in 0..rr {
                for j in 0..i {
                    nmat[i * rr + j] = C64::new(0.0, 0.0);
                }
            }
            let adj = mat::adjoint(rr, &nmat);
            let v0: Vec<C64> = nmat.iter().zip(&adj).map(|(a, b)| (a - b) * 0.5).collect();
            let v1: Vec<C64> = nmat.iter().zip(&adj).map(|(a, b)| (a + b) * C64::new(0.0, 0.5)).collect();
            let mut v = vec![EndField::zeros(g, rr); dim];
            v[0] = EndField::constant(g, rr, &v0)?;
            v[1] = EndField::constant(g, rr, &v1)?;
            let mut a = vec![EndField::zeros(g, rr); dim];
            a[0] = a0;
            let ch = GenConnection::new(a, v)?;
            cohiggs::cohiggs_vs_pipeline(&ch, &omega, 0.25)
        },
    ));
    out.push(check_error("trace curvature closed", "d tr F(psi) = 0", IDENTITY_TOL, || {
        Ok(trace_curvature(&conn, psi)?.d().max_abs())
    }));
    out.push(check_error("Chern pairing V-independence", "<tr F(psi), conj psi> independent of V", IDENTITY_TOL, || {
        let without = conn.with_v(vec![EndField::zeros(g, r); dim])?;
        Ok((chern_pair(&conn, psi)? - chern_pair(&without, psi)?).norm())
    }));
    out.push(check_error("Chern pairing gauge independence", "<tr F(psi), conj psi> gauge invariant", IDENTITY_TOL, || {
        Ok((chern_pair(&conn.gauge_constant(&u)?, psi)? - chern_pair(&conn, psi)?).norm())
    }));
    out.push(check_error("lambda for constant curvature", "K = lambda id for constant F", IDENTITY_TOL, || {
        let w_psi = w_psi.clone()?;
        let mut flux = vec![0.0; dim * dim];
        let q = std::f64::consts::TAU / (g.periods()[0] * g.periods()[1]);
        flux[1] = q;
        flux[dim] = -q;
        let c = GenConnection::flat(g, r).with_background(flux)?;
        let lam = crate::field::connection::lambda_from_chern(&c, &w_psi)?;
        Ok(eh_residual(&c, &w_psi, lam)?.1)
    }));
    out.push(check_error("holomorphic flat connection", "dbar o dbar = 0 for the trivial connection", 0.0, || {
        dbar_residual(&GenConnection::flat(g, r), &gcs_complex(n, &kahler_complex(n))?)
    }));
    out.push(check_error("canonical connection of a constant frame", "d phi = 0 gives zero connection", IDENTITY_TOL, || {
        let w_psi = w_psi.clone()?;
        let phi = FormField::constant(g, &complex_volume_form(n, true)?)?;
        let line = canonical_connection_line(&phi, &w_psi)?;
        Ok(line.connection.a().iter().chain(line.connection.v()).map(EndField::max_abs).fold(0.0, f64::max))
    }));
    out
}

fn rng_seed(rng: &mut ChaCha8Rng) -> u64 {
    rng.gen()
}

/// Pointwise spinor identities and the moment-map lemmas.
pub fn moment_checks(setup: &Setup, rng: &mut ChaCha8Rng) -> Vec<Check> {
    let g = &setup.grid;
    let n = g.dim_n();
    let r = setup.rank;
    let psi = &setup.psi;
    let conn = fixtures::connection(rng, g, r, 0.4, 0.4).expect("valid fixture");
    let xi = fixtures::skew_field(rng, g, r, 0.4);
    let a1 = fixtures::deformation(rng, g, r, 0.4).expect("valid fixture");
    let a2 = fixtures::deformation(rng, g, r, 0.4).expect("valid fixture");
    let (e1, e2) = frame_identity_defects(psi, calibration::PAIRING_SIGN, calibration::STRUCTURE_SIGN);
    vec![
        Check::max_error("metric from spinors", "<e_i,e_j> vol = s Re i^{-n}<e_i psi, e_j conj psi>", IDENTITY_TOL, e1),
        Check::max_error("structure from spinors", "<J e_i,e_j> vol = s Im i^{-n}<e_i psi, e_j conj psi>", IDENTITY_TOL, e2),
        check_error("symplectic form from spinors", "omega_GM = s int Im i^{-n} tr<a psi, b conj psi>", IDENTITY_TOL, || {
            Ok((omega_gm(&a1, &a2, psi)? - calibration::SYMPLECTIC_SIGN * spinor_form(&a1, &a2, psi)?).abs())
        }),
        check_above("metric g_GM positive", "g_GM(a, a) > 0", 0.0, || {
            let ghat = standard_gk_pair(n)?.ghat;
            Ok(g_gm(&a1, &a1, &ghat, psi)?.min(g_gm(&a2, &a2, &ghat, psi)?))
        }),
        check_error("integration by parts", "sum <D xi psi, a conj psi> = sum <xi psi, d^D(a conj psi)>", IDENTITY_TOL, || {
            let (l, rr) = integration_by_parts(&conn, &xi, &a1, psi)?;
            Ok((l - rr).norm())
        }),
        check_error("moment derivative", "d/dt <mu(A + t a), xi> = s omega_GM(D xi, a)", DERIVATIVE_TOL, || {
            let lhs = moment_derivative(&conn, &a1, &xi, psi, DERIVATIVE_STEP)?;
            let rhs = omega_gm(&covariant_derivative(&conn, &xi)?, &a1, psi)?;
            Ok((lhs - calibration::MOMENT_DERIVATIVE_SIGN * rhs).abs())
        }),
        check_error("moment map equals mean curvature", "<mu(A), xi> = int i tr(xi K) vol", IDENTITY_TOL, || {
            Ok((moment_value(&conn, &xi, psi)? - calibration::MOMENT_SCALE * moment_from_mean_curvature(&conn, &xi, psi)?).abs())
        }),
    ]
}

/// Name, frozen value, recomputation and tolerance of a calibration constant.
type Frozen = (&'static str, f64, fn() -> Result<f64>, f64);

/// Symbol exactness, solitons, the line-bundle solve and the calibration.
pub fn analysis_checks(setup: &Setup, opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> Vec<Check> {
    let g = &setup.grid;
    let n = g.dim_n();
    let r = setup.rank;
    let omega = setup.omega_const.clone().unwrap_or_else(|| standard_omega(n));
    let mut out = Vec::new();
    let sym = (|| {
        let gk = standard_gk_pair(n)?;
        let psi = symplectic_spinor(n, &vec![0.0; 4 * n * n], &standard_omega(n))?;
        let thetas = symbols::random_covectors(rng, n, opts.trials.max(1));
        symbols::symbol_trials(&gk, &psi, r, &thetas)
    })();
    match sym {
        Ok((s, _)) => {
            out.push(Check::max_error("symbol exactness", "inexact junctions over random theta", 0.0, s.inexact_trials as f64));
            out.push(Check::max_error("symbol composition", "sigma_{i+1} o sigma_i = 0", IDENTITY_TOL, s.max_composition));
            out.push(Check::max_error(
                "symbol kernel at B1",
                "ker sigma_1 = { f theta : f in u(r) }",
                SPECIALIZATION_TOL,
                if s.kernel_dims_ok { s.max_kernel_residual } else { f64::INFINITY },
            ));
            out.push(Check::max_error("alternating dimension sum", "sum (-1)^i dim B^i = 0", 0.0, s.alternating_sum.abs() as f64));
            out.push(Check::lower_bound("GK compatibility of theta", "<theta^{1,0}_+, theta^{0,1}_+> != 0", 0.0, s.min_gk_pairing));
        }
        Err(e) => out.push(Check::errored("symbol exactness", "inexact junctions over random theta", 0.0, &e)),
    }
    let zero_theta = symbols::symbol_exactness(
        &standard_gk_pair(n).expect("standard pair"),
        &symplectic_spinor(n, &vec![0.0; 4 * n * n], &standard_omega(n)).expect("spinor"),
        r,
        &GenVector::zero(n).expect("valid n"),
    );
    out.push(Check::max_error(
        "zero covector rejected",
        "the symbol is undefined at theta = 0",
        0.0,
        if zero_theta.is_err() { 0.0 } else { 1.0 },
    ));

    out.push(check_error("soliton floor on the torus", "|F_A + c i L_v omega - i omega| = |i omega| for flat data", IDENTITY_TOL, || {
        let zero = vec![vec![0.0; g.npts()]; g.dim()];
        let chk = soliton::kr_soliton_check(&GenConnection::flat(g, 1), &zero, &omega, 0.5)?;
        let area: f64 = g.periods().iter().product();
        let dim = g.dim();
        let mut sq = 0.0;
        for mu in 0..dim {
            for nu in mu + 1..dim {
                sq += omega[mu * dim + nu].powi(2);
            }
        }
        Ok((chk.soliton_norm - (sq * area).sqrt()).abs())
    }));
    if omega == standard_omega(n) {
        out.push(check_error("torus soliton is Einstein-Hermitian", "F_A + c i L_v omega = 0 gives K = 0", SPECIALIZATION_TOL, || {
            let (conn, v) = soliton::torus_soliton(rng, g, 0.7, 0.4)?;
            Ok(soliton::soliton_check(&conn, &v, &omega, 0.7, 0.0)?.eh_residual)
        }));
    }

    out.push(check_error("line-bundle solve", "K = lambda reached from a perturbed flat connection", opts.tol, || {
        let init = fixtures::connection(rng, g, 1, 0.3, 0.0)?;
        let line_psi = if setup.b_const.is_some() && setup.omega_const.is_some() {
            setup.psi.clone()
        } else {
            SpinorField::constant(g, &vec![0.0; 4 * n * n], &omega)?
        };
        let so = solver::SolveOptions { max_iter: opts.max_iter, tol: opts.tol, ..solver::SolveOptions::default() };
        Ok(solver::solve_eh_line(&init, &line_psi, &so)?.1.final_residual)
    }));

    let frozen: [Frozen; 9] = [
        ("HYM scale", calibration::HYM_SCALE, calibration::recompute_hym_scale, IDENTITY_TOL),
        ("pairing sign", calibration::PAIRING_SIGN, calibration::recompute_pairing_sign, 0.0),
        ("structure sign", calibration::STRUCTURE_SIGN, calibration::recompute_structure_sign, 0.0),
        ("symplectic sign", calibration::SYMPLECTIC_SIGN, calibration::recompute_symplectic_sign, IDENTITY_TOL),
        ("b-field sign", calibration::BFIELD_SIGN, calibration::recompute_bfield_sign, 0.0),
        ("moment derivative sign", calibration::MOMENT_DERIVATIVE_SIGN, calibration::recompute_moment_derivative_sign, DERIVATIVE_TOL),
        ("moment scale", calibration::MOMENT_SCALE, calibration::recompute_moment_scale, IDENTITY_TOL),
        ("line scale", calibration::LINE_SCALE, calibration::recompute_line_scale, IDENTITY_TOL),
        ("co-Higgs F coefficient", calibration::COHIGGS_F, || Ok(calibration::recompute_cohiggs()?.0), IDENTITY_TOL),
    ];
    let mut worst = Ok(0.0f64);
    for (_, value, f, tol) in frozen {
        worst = worst.and_then(|w| Ok(w.max(((f()? - value).abs() - tol).max(0.0))));
    }
    worst = worst.and_then(|w| Ok(w.max(((calibration::recompute_cohiggs()?.1 - calibration::COHIGGS_V).abs() - IDENTITY_TOL).max(0.0))));
    out.push(match worst {
        Ok(w) => Check::max_error("calibration constants reproduce", "frozen constants equal their recomputation", 0.0, w),
        Err(e) => Check::errored("calibration constants reproduce", "frozen constants equal their recomputation", 0.0, &e),
    });
    out
}

/// The full suite. Each section draws from its own seeded stream so adding
/// checks to one section leaves the others unchanged.
pub fn run_verify(setup: &Setup, opts: &VerifyOptions) -> Vec<Check> {
    let n = setup.grid.dim_n();
    let omega = setup.omega_const.clone().unwrap_or_else(|| standard_omega(n));
    let stream = |k: u64| fixtures::rng(opts.seed.wrapping_mul(0x9E37_79B9).wrapping_add(k));
    let mut out = algebra_checks(n, opts.trials.max(1), &mut stream(1));
    out.extend(structure_checks(n, &omega, &mut stream(2)));
    out.extend(field_checks(setup, &mut stream(3)));
    out.extend(moment_checks(setup, &mut stream(4)));
    out.extend(analysis_checks(setup, opts, &mut stream(5)));
    out
}

/// Covector with the given real components, used by callers that build
/// theta by hand.
pub fn covector(n: usize, comps: &[f64]) -> Result<GenVector> {
    let mut full = vec![0.0; 4 * n];
    if comps.len() != 2 * n {
        return Err(crate::Error::BadLength { got: comps.len(), expected: 2 * n });
    }
    full[2 * n..].copy_from_slice(comps);
    GenVector::from_real(n, &full)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::input::{InputSpec, Overrides};

    #[test]
    fn default_suite_passes_on_small_grid() {
        let setup = InputSpec::default_config().build(&Overrides { grid: Some(16), rank: None }).unwrap();
        let checks = run_verify(&setup, &VerifyOptions { trials: 20, ..VerifyOptions::default() });
        let failed: Vec<_> = checks.iter().filter(|c| !c.pass).collect();
        assert!(failed.is_empty(), "{failed:#?}");
        assert!(checks.len() >= 40, "{}", checks.len());
    }
}
