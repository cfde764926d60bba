//! The (0,1) part of a generalized connection relative to a constant
//! generalized complex structure, and the obstruction to its squaring to zero.
//!
//! The operator components in the real frame are O_mu = V^mu (vector slots)
//! and O_{2n+mu} = D_mu (covector slots). With constant J the square of the
//! projected operator is the tensor
//! R_{kl} = sum_{d,b} Pbar_{kd} Pbar_{lb} [O_d, O_b],
//! where [D_mu, D_nu] = F_{mu nu}, [D_mu, V^nu] = D_mu V^nu and
//! [V^mu, V^nu] is the matrix commutator.

use num_complex::Complex64 as C64;

use super::connection::{pair_index, GenConnection};
use super::fields::{mat, EndField, ZERO};
use crate::error::{Error, Result};
use crate::numerics::{max_of, CMat};
use crate::structures::GCStructure;

/// Per-point brackets [O_d, O_b] for all frame pairs, as r x r matrices.
fn brackets(conn: &GenConnection) -> Vec<Vec<EndField>> {
    let g = conn.grid();
    let dim = g.dim();
    let d = 2 * dim;
    let r = conn.rank();
    let fs = conn.field_strength();
    let dv: Vec<Vec<EndField>> =
        (0..dim).map(|mu| conn.v().iter().map(|v| conn.covariant_partial(v, mu)).collect()).collect();
    let mut out = vec![vec![EndField::zeros(g, r); d]; d];
    for a in 0..d {
        for b in 0..d {
            if a == b {
                continue;
            }
            out[a][b] = match (a < dim, b < dim) {
                (true, true) => EndField::from_fn(g, r, |p, o| {
                    o.copy_from_slice(&mat::commutator(r, conn.v()[a].at(p), conn.v()[b].at(p)));
                }),
                (false, false) => {
                    let (mu, nu) = (a - dim, b - dim);
                    let f = &fs[pair_index(dim, mu.min(nu), mu.max(nu))];
                    if mu < nu {
                        f.clone()
                    } else {
                        f.scale(C64::new(-1.0, 0.0))
                    }
                }
                (false, true) => dv[a - dim][b].clone(),
                (true, false) => dv[b - dim][a].scale(C64::new(-1.0, 0.0)),
            };
        }
    }
    out
}

/// Max Frobenius norm of the (0,1)-(0,1) block of the curvature tensor.
pub fn dbar_residual(conn: &GenConnection, j: &GCStructure) -> Result<f64> {
    let g = conn.grid();
    if j.dim_n() != g.dim_n() {
        return Err(Error::DimensionMismatch { left: j.dim_n(), right: g.dim_n() });
    }
    let pbar: CMat = j.conj_projector();
    let br = brackets(conn);
    let d = 2 * g.dim();
    let r = conn.rank();
    let per_point: Vec<f64> = (0..g.npts())
        .map(|p| {
            let mut worst = 0.0f64;
            for k in 0..d {
                for l in k + 1..d {
                    let mut acc = vec![ZERO; r * r];
                    for a in 0..d {
                        let wa = pbar[(k, a)];
                        if wa == ZERO {
                            continue;
                        }
                        for b in 0..d {
                            let w = wa * pbar[(l, b)];
                            if w == ZERO || a == b {
                                continue;
                            }
                            for (o, &x) in acc.iter_mut().zip(br[a][b].at(p)) {
                                *o += w * x;
                            }
                        }
                    }
                    worst = worst.max(mat::frob_sq(&acc).sqrt());
                }
            }
            worst
        })
        .collect();
    Ok(max_of(per_point))
}

/// (1,0) components of V for the complex structure whose holomorphic
/// coordinates are z_k = x^{2k} - i x^{2k+1}: N_k = V^{2k} - i V^{2k+1}.
#[must_use]
pub fn holomorphic_parts(conn: &GenConnection) -> Vec<EndField> {
    let g = conn.grid();
    let r = conn.rank();
    (0..g.dim_n())
        .map(|k| {
            let a = &conn.v()[2 * k];
            let b = &conn.v()[2 * k + 1];
            EndField::from_fn(g, r, |p, out| {
                for ((o, &x), &y) in out.iter_mut().zip(a.at(p)).zip(b.at(p)) {
                    *o = x - C64::new(0.0, 1.0) * y;
                }
            })
        })
        .collect()
}
