//! Canonical generalized connection on the line generated by a pure spinor
//! field phi with d phi = eta . phi.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::connection::{GenConnection, SpinorField};
use super::fields::{same_grid, EndFormField, EndField, FormField, ZERO};
use crate::error::{Error, Result};
use crate::multivector;
use crate::numerics::{max_of, RMat};
use crate::structures::{action_matrix, classify_spinor, gcs_from_spinor};

const LSQ_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct CanonicalLine {
    pub connection: GenConnection,
    /// Real solutions of eta . phi = d phi, 4n components per point.
    pub eta: Vec<Vec<f64>>,
    /// <phi, conj phi>_s / <psi, conj psi>_s
    pub rho: Vec<f64>,
    /// Largest least-squares residual |eta . phi - d phi|.
    pub lsq_residual: f64,
}

/// Solve eta . phi = d phi for real eta, build rho and
/// A = i(-J_phi eta + 1/2 J_phi d log rho) (vector part -> V, covector part -> A).
pub fn canonical_connection_line(phi: &FormField, psi: &SpinorField) -> Result<CanonicalLine> {
    let g = phi.grid();
    same_grid(g, psi.grid())?;
    let n = g.dim_n();
    let d = 4 * n;
    let dphi = phi.d();
    let solved: Vec<(Vec<f64>, f64, RMat, C64)> = (0..g.npts())
        .into_par_iter()
        .map(|p| {
            let form = phi.form_at(p);
            let chk = classify_spinor(&form)?;
            if !chk.pure || !chk.nondegenerate {
                return Err(Error::NotPureSpinor(format!("at grid point {:?}", g.multi_index(p))));
            }
            let m = action_matrix(&form);
            let rows = m.nrows();
            let mut real = DMatrix::<f64>::zeros(2 * rows, d);
            let mut rhs = DVector::<f64>::zeros(2 * rows);
            let target = dphi.at(p);
            for i in 0..rows {
                for k in 0..d {
                    real[(i, k)] = m[(i, k)].re;
                    real[(rows + i, k)] = m[(i, k)].im;
                }
                rhs[i] = target[i].re;
                rhs[rows + i] = target[i].im;
            }
            let svd = real.clone().svd(true, true);
            let eta = svd.solve(&rhs, 1e-12).map_err(|e| Error::BadMatrix(e.to_string()))?;
            let res = (&real * &eta - &rhs).amax();
            let j = gcs_from_spinor(&form)?.mat().clone();
            let ratio = multivector::mukai_raw(form.coeffs(), phi.conj().at(p)) / psi.pair(p);
            Ok((eta.iter().copied().collect(), res, j, ratio))
        })
        .collect::<Result<_>>()?;
    let lsq_residual = max_of(solved.iter().map(|s| s.1));
    let scale = 1.0 + dphi.max_abs();
    if lsq_residual > LSQ_TOL * scale {
        return Err(Error::NotIntegrable(lsq_residual));
    }
    let mut rho = Vec::with_capacity(g.npts());
    for (p, s) in solved.iter().enumerate() {
        if s.3.re <= 0.0 || s.3.im.abs() > 1e-8 * s.3.norm() {
            return Err(Error::NonPositiveDensity(g.multi_index(p)));
        }
        rho.push(s.3.re);
    }
    let log_rho: Vec<f64> = rho.iter().map(|r| r.ln()).collect();
    let dlog: Vec<Vec<f64>> = (0..g.dim()).map(|mu| g.partial_real(&log_rho, mu)).collect();
    let dim = g.dim();
    // w = -J eta + 1/2 J (0, d log rho), per point
    let w: Vec<Vec<f64>> = solved
        .iter()
        .enumerate()
        .map(|(p, (eta, _, j, _))| {
            let mut x = vec![0.0; d];
            for k in 0..d {
                let mut s = 0.0;
                for m in 0..d {
                    s -= j[(k, m)] * eta[m];
                }
                for mu in 0..dim {
                    s += 0.5 * j[(k, dim + mu)] * dlog[mu][p];
                }
                x[k] = s;
            }
            x
        })
        .collect();
    let comp = |k: usize| EndField::scalar(g, 1, |p| C64::new(0.0, w[p][k]));
    let v: Vec<EndField> = (0..dim).map(comp).collect();
    let a: Vec<EndField> = (dim..2 * dim).map(comp).collect();
    let connection = GenConnection::new(a, v)?;
    Ok(CanonicalLine { connection, eta: solved.into_iter().map(|s| s.0).collect(), rho, lsq_residual })
}

/// d(A . psi) for a line-bundle connection, A . psi = A ^ psi + i_V psi.
pub fn line_curvature(conn: &GenConnection, psi: &SpinorField) -> Result<EndFormField> {
    if conn.rank() != 1 {
        return Err(Error::NonAbelian(conn.rank()));
    }
    let g = conn.grid();
    same_grid(g, psi.grid())?;
    let n = g.dim_n();
    let dim = g.dim();
    let acted = FormField::from_fn(g, |p| {
        let f = psi.psi().at(p);
        let mut out = vec![ZERO; f.len()];
        for mu in 0..dim {
            multivector::add_wedge_axis(&mut out, mu, conn.a()[mu].at(p)[0], f);
            multivector::add_interior_axis(&mut out, mu, conn.v()[mu].at(p)[0], f);
        }
        multivector::GradedForm::from_coeffs(n, out).expect("length")
    });
    let one = EndField::scalar(g, 1, |_| C64::new(1.0, 0.0));
    EndFormField::tensor(&one, &acted.d())
}
