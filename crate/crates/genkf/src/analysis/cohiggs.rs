//! Co-Higgs specialization: with b = 0 and a holomorphic V^{1,0}, the
//! Einstein-Hermitian condition becomes a Hitchin-type equation
//! i Lambda_omega F_A + kappa sum_k [N_k, N_k^dagger] = lambda id.
//!
//! N_k are the (1,0) parts of V in the frame of [`holomorphic_parts`]. The
//! bracket weight kappa is fixed by the calibrated pipeline
//! (K = f i Lambda F + v sum [N, N^dagger], kappa = v / f), so the residual
//! equals (K - f lambda) / f pointwise.

use num_complex::Complex64 as C64;

use crate::calibration::{bracket_sum, lambda_field, COHIGGS_F, COHIGGS_V};
use crate::error::{Error, Result};
use crate::field::connection::mean_curvature_k;
use crate::field::dbar::{dbar_residual, holomorphic_parts};
use crate::field::fields::mat;
use crate::field::{EndField, GenConnection, SpinorField};
use crate::numerics::pairwise_sum;
use crate::structures::{gcs_complex, kahler_complex};

/// Largest dbar defect accepted as holomorphic.
pub const HOLOMORPHIC_TOL: f64 = 1e-8;

/// Weight of the bracket term relative to i Lambda_omega F_A.
#[must_use]
pub fn bracket_weight() -> f64 {
    COHIGGS_V / COHIGGS_F
}

/// Pointwise residual of the co-Higgs equation and its grid L^2 norm.
pub fn cohiggs_residual(conn: &GenConnection, omega: &[f64], lambda: f64) -> Result<(EndField, f64)> {
    let g = conn.grid();
    let n = g.dim_n();
    if omega.len() != 4 * n * n {
        return Err(Error::BadLength { got: omega.len(), expected: 4 * n * n });
    }
    let j = gcs_complex(n, &kahler_complex(n))?;
    let defect = dbar_residual(conn, &j)?;
    if defect > HOLOMORPHIC_TOL {
        return Err(Error::Input(format!("V is not co-Higgs: dbar residual {defect:.3e}")));
    }
    let r = conn.rank();
    let kappa = bracket_weight();
    let lam = lambda_field(conn, omega, None)?;
    let br = bracket_sum(conn);
    let res = EndField::from_fn(g, r, |p, out| {
        for ((o, &l), &b) in out.iter_mut().zip(lam.at(p)).zip(br.at(p)) {
            *o = C64::new(0.0, 1.0) * l + kappa * b;
        }
        for i in 0..r {
            out[i * r + i] -= lambda;
        }
    });
    let sq: Vec<f64> = (0..g.npts()).map(|p| mat::frob_sq(res.at(p))).collect();
    let norm = (pairwise_sum(&sq) * g.cell_volume()).sqrt();
    Ok((res, norm))
}

/// Largest pointwise gap between the co-Higgs residual and the rescaled
/// mean-curvature residual (K - f lambda id) / f, for psi = e^{i omega}.
pub fn cohiggs_vs_pipeline(conn: &GenConnection, omega: &[f64], lambda: f64) -> Result<f64> {
    let g = conn.grid();
    let n = g.dim_n();
    let psi = SpinorField::constant(g, &vec![0.0; 4 * n * n], omega)?;
    let (res, _) = cohiggs_residual(conn, omega, lambda)?;
    let k = mean_curvature_k(conn, &psi)?;
    let r = conn.rank();
    let mut worst = 0.0f64;
    for p in 0..g.npts() {
        for i in 0..r {
            for jj in 0..r {
                let mut pipe = k.at(p)[i * r + jj] / COHIGGS_F;
                if i == jj {
                    pipe -= lambda;
                }
                worst = worst.max((pipe - res.at(p)[i * r + jj]).norm());
            }
        }
    }
    Ok(worst)
}

/// sum_k [N_k, N_k^dagger] at one point, for callers comparing against a
/// hand computation.
#[must_use]
pub fn bracket_at(conn: &GenConnection, p: usize) -> Vec<C64> {
    let r = conn.rank();
    let mut out = vec![C64::new(0.0, 0.0); r * r];
    for nk in holomorphic_parts(conn) {
        let x = nk.at(p);
        for (o, y) in out.iter_mut().zip(mat::commutator(r, x, &mat::adjoint(r, x))) {
            *o += y;
        }
    }
    out
}
