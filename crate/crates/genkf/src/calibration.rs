//! Frozen sign and normalization constants relating the general pipeline to
//! the specialized formulas. Each constant has a recompute function that
//! derives it from a fixed n = 1 configuration; tests assert the two agree.

use num_complex::Complex64 as C64;

use crate::field::connection::{bfield_covariance_sides, contract_omega, mean_curvature_k};
use crate::field::dbar::holomorphic_parts;
use crate::field::fields::{lie_derivative, mat, EndField};
use crate::field::moment::{
    covariant_derivative, frame_identity_defects, moment_derivative, moment_from_mean_curvature,
    moment_value, omega_gm, spinor_form,
};
use crate::field::{GenConnection, SpinorField, TorusGrid};
use crate::fixtures;
use crate::structures::standard_omega;
use crate::Result;

/// K = scale * (-i) Lambda_omega F_A for psi = e^{i omega}, V = 0.
pub const HYM_SCALE: f64 = 0.5;

/// <e_i, e_j> vol = sign * Re i^{-n} <e_i.psi, e_j.conj psi>_s.
pub const PAIRING_SIGN: f64 = -1.0;

/// <J e_i, e_j> vol = sign * Im i^{-n} <e_i.psi, e_j.conj psi>_s.
pub const STRUCTURE_SIGN: f64 = 1.0;

/// omega_GM(a1, a2) = sign * int Im i^{-n} tr <a1.psi, a2.conj psi>_s.
pub const SYMPLECTIC_SIGN: f64 = -1.0;

/// A'_mu = A_mu + sign * sum_nu V^nu b_{nu mu}.
pub const BFIELD_SIGN: f64 = -1.0;

/// d/dt <mu(A + t a), xi> = sign * omega_GM(D xi, a).
pub const MOMENT_DERIVATIVE_SIGN: f64 = -1.0;

/// <mu(A), xi> = scale * int i tr(xi K) vol.
pub const MOMENT_SCALE: f64 = 1.0;

/// Line bundle, V = i v, psi = e^{c omega + i omega}:
/// K = scale * (-i) Lambda_omega (F_A + c i L_v omega).
pub const LINE_SCALE: f64 = 0.5;

/// Co-Higgs: K = f * (i Lambda_omega F_A) + v * sum_i [N_i, N_i^dagger],
/// with N_i the (1,0) parts of V.
pub const COHIGGS_F: f64 = -0.5;
pub const COHIGGS_V: f64 = 0.25;

const SEED: u64 = 20_240_601;

/// Least-squares s with measured ~ s * model over all entries.
fn fit(measured: &[C64], model: &[C64]) -> f64 {
    let num: f64 = measured.iter().zip(model).map(|(a, b)| (a * b.conj()).re).sum();
    let den: f64 = model.iter().map(C64::norm_sqr).sum();
    num / den
}

/// The sign in {+1, -1} whose defect is smaller.
fn pick_sign(defect: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    Ok(if defect(1.0)? <= defect(-1.0)? { 1.0 } else { -1.0 })
}

fn grid() -> TorusGrid {
    TorusGrid::uniform(1, 16, 1.0).expect("valid grid")
}

/// K against -i Lambda_omega F for psi = e^{i omega}, r = 1, V = 0.
pub fn recompute_hym_scale() -> Result<f64> {
    let g = grid();
    let w = standard_omega(1);
    let psi = SpinorField::constant(&g, &[0.0; 4], &w)?;
    let conn = fixtures::connection(&mut fixtures::rng(SEED), &g, 1, 0.5, 0.0)?;
    let k = mean_curvature_k(&conn, &psi)?;
    let model = lambda_field(&conn, &w, None)?.scale(C64::new(0.0, -1.0));
    Ok(fit(k.values(), model.values()))
}

/// Lambda_omega of F_A (plus an optional extra 2-form per point, given by
/// its components in pair order), entrywise.
pub(crate) fn lambda_field(conn: &GenConnection, w: &[f64], extra: Option<&[Vec<C64>]>) -> Result<EndField> {
    let g = conn.grid();
    let r = conn.rank();
    let fs = conn.field_strength();
    let mut out = EndField::zeros(g, r);
    for p in 0..g.npts() {
        let mut comps: Vec<Vec<C64>> = fs.iter().map(|f| f.at(p).to_vec()).collect();
        if let Some(e) = extra {
            for (c, x) in comps.iter_mut().zip(e) {
                for i in 0..r {
                    c[i * r + i] += x[p];
                }
            }
        }
        let v = contract_omega(g.dim_n(), w, &comps, r)?;
        out.values_mut()[p * r * r..(p + 1) * r * r].copy_from_slice(&v);
    }
    Ok(out)
}

/// Sign relating the neutral pairing to Re i^{-n} <e_i psi, e_j conj psi>_s.
pub fn recompute_pairing_sign() -> Result<f64> {
    let psi = SpinorField::constant(&grid(), &[0.0, 0.4, -0.4, 0.0], &standard_omega(1))?;
    pick_sign(|s| Ok(frame_identity_defects(&psi, s, 1.0).0))
}

/// Sign relating <J e_i, e_j> to Im i^{-n} <e_i psi, e_j conj psi>_s.
pub fn recompute_structure_sign() -> Result<f64> {
    let psi = SpinorField::constant(&grid(), &[0.0, 0.4, -0.4, 0.0], &standard_omega(1))?;
    pick_sign(|s| Ok(frame_identity_defects(&psi, 1.0, s).1))
}

/// omega_GM against the spinor form on random deformations.
pub fn recompute_symplectic_sign() -> Result<f64> {
    let g = grid();
    let psi = SpinorField::constant(&g, &[0.0, 0.4, -0.4, 0.0], &standard_omega(1))?;
    let mut rng = fixtures::rng(SEED + 1);
    let a1 = fixtures::deformation(&mut rng, &g, 2, 0.5)?;
    let a2 = fixtures::deformation(&mut rng, &g, 2, 0.5)?;
    Ok(omega_gm(&a1, &a2, &psi)? / spinor_form(&a1, &a2, &psi)?)
}

/// The b-field sign making curvature covariance exact for r = 1.
pub fn recompute_bfield_sign() -> Result<f64> {
    let g = grid();
    let psi = SpinorField::constant(&g, &[0.0; 4], &standard_omega(1))?;
    let conn = fixtures::connection(&mut fixtures::rng(SEED + 2), &g, 1, 0.5, 0.5)?;
    let b = [0.0, 0.7, -0.7, 0.0];
    pick_sign(|s| {
        let (lhs, rhs) = bfield_covariance_sides(&conn, &psi, &b, s)?;
        lhs.dist(&rhs)
    })
}

/// Ratio of the centered moment derivative to omega_GM(D xi, a).
pub fn recompute_moment_derivative_sign() -> Result<f64> {
    let g = grid();
    let psi = SpinorField::constant(&g, &[0.0; 4], &standard_omega(1))?;
    let mut rng = fixtures::rng(SEED + 3);
    let conn = fixtures::connection(&mut rng, &g, 2, 0.5, 0.5)?;
    let xi = fixtures::skew_field(&mut rng, &g, 2, 0.5);
    let a = fixtures::deformation(&mut rng, &g, 2, 0.5)?;
    let lhs = moment_derivative(&conn, &a, &xi, &psi, 1e-4)?;
    let rhs = omega_gm(&covariant_derivative(&conn, &xi)?, &a, &psi)?;
    Ok(lhs / rhs)
}

/// Ratio of the moment map to int i tr(xi K) vol.
pub fn recompute_moment_scale() -> Result<f64> {
    let g = grid();
    let psi = SpinorField::constant(&g, &[0.0, 0.3, -0.3, 0.0], &standard_omega(1))?;
    let mut rng = fixtures::rng(SEED + 4);
    let conn = fixtures::connection(&mut rng, &g, 2, 0.5, 0.5)?;
    let xi = fixtures::skew_field(&mut rng, &g, 2, 0.5);
    Ok(moment_value(&conn, &xi, &psi)? / moment_from_mean_curvature(&conn, &xi, &psi)?)
}

/// K against -i Lambda_omega (F + c i L_v omega) for V = i v, psi = e^{(c+i) omega}.
pub fn recompute_line_scale() -> Result<f64> {
    let g = grid();
    let w = standard_omega(1);
    let c = 0.3;
    let b: Vec<f64> = w.iter().map(|x| c * x).collect();
    let psi = SpinorField::constant(&g, &b, &w)?;
    let mut rng = fixtures::rng(SEED + 5);
    let conn = fixtures::connection(&mut rng, &g, 1, 0.5, 0.5)?;
    let v: Vec<Vec<f64>> = conn.v().iter().map(|f| f.values().iter().map(|z| z.im).collect()).collect();
    let k = mean_curvature_k(&conn, &psi)?;
    let model = lambda_field(&conn, &w, Some(&lie_term(&g, &v, &w, c)?))?.scale(C64::new(0.0, -1.0));
    Ok(fit(k.values(), model.values()))
}

/// c i L_v omega as per-pair component lists.
pub(crate) fn lie_term(g: &TorusGrid, v: &[Vec<f64>], w: &[f64], c: f64) -> Result<Vec<Vec<C64>>> {
    let omega = crate::field::connection::constant_two_form(g, w)?;
    let l = lie_derivative(v, &omega)?;
    let dim = g.dim();
    let mut out = Vec::new();
    for mu in 0..dim {
        for nu in mu + 1..dim {
            let mask = (1 << mu) | (1 << nu);
            out.push((0..g.npts()).map(|p| C64::new(0.0, c) * l.at(p)[mask]).collect());
        }
    }
    Ok(out)
}

/// Co-Higgs constants: the F coefficient from V = 0 with random A, the
/// bracket coefficient from A = 0 with constant non-commuting V.
pub fn recompute_cohiggs() -> Result<(f64, f64)> {
    let g = grid();
    let w = standard_omega(1);
    let psi = SpinorField::constant(&g, &[0.0; 4], &w)?;
    let mut rng = fixtures::rng(SEED + 6);
    let conn = fixtures::connection(&mut rng, &g, 2, 0.5, 0.0)?;
    let k = mean_curvature_k(&conn, &psi)?;
    let model = lambda_field(&conn, &w, None)?.scale(C64::new(0.0, 1.0));
    let f_coeff = fit(k.values(), model.values());

    let v: Vec<EndField> = (0..2)
        .map(|_| EndField::constant(&g, 2, &fixtures::skew_matrix(&mut rng, 2, 1.0)))
        .collect::<Result<_>>()?;
    let conn = GenConnection::flat(&g, 2).with_v(v)?;
    let k = mean_curvature_k(&conn, &psi)?;
    let brackets = bracket_sum(&conn);
    Ok((f_coeff, fit(k.values(), brackets.values())))
}

/// sum_i [N_i, N_i^dagger] with N_i the (1,0) parts of V.
#[must_use]
pub fn bracket_sum(conn: &GenConnection) -> EndField {
    let r = conn.rank();
    let parts = holomorphic_parts(conn);
    EndField::from_fn(conn.grid(), r, |p, out| {
        for nk in &parts {
            let x = nk.at(p);
            let c = mat::commutator(r, x, &mat::adjoint(r, x));
            for (o, y) in out.iter_mut().zip(c) {
                *o += y;
            }
        }
    })
}
