//! The symplectic form, metric and moment map on the space of generalized
//! connections, and the pointwise spinor identities behind them.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::connection::{add_matrix_times_form, curvature_fa_conj, mean_curvature_k, GenConnection, SpinorField};
use super::fields::{mat, same_grid, EndField, EndFormField, FormField, ZERO};
use super::grid::map_points;
use crate::error::{Error, Result};
use crate::multivector;
use crate::numerics::{max_of, pairwise_sum, RMat};
use crate::structures::pairing_matrix;

/// A u(E)-valued section of T+T*: 4n components in frame order
/// (d/dx^0..d/dx^{2n-1}, dx^0..dx^{2n-1}).
#[derive(Clone, Debug, PartialEq)]
pub struct Deformation {
    comps: Vec<EndField>,
}

impl Deformation {
    pub fn new(comps: Vec<EndField>) -> Result<Self> {
        let first = comps.first().ok_or_else(|| Error::Input("empty deformation".into()))?;
        let g = first.grid().clone();
        if comps.len() != 2 * g.dim() {
            return Err(Error::BadLength { got: comps.len(), expected: 2 * g.dim() });
        }
        for c in &comps {
            same_grid(c.grid(), &g)?;
            if c.rank() != first.rank() {
                return Err(Error::RankMismatch { left: first.rank(), right: c.rank() });
            }
        }
        Ok(Self { comps })
    }

    /// Vector part `v` and covector part `a` (as for a connection A + V).
    pub fn from_parts(a: &[EndField], v: &[EndField]) -> Result<Self> {
        Self::new(v.iter().chain(a).cloned().collect())
    }

    #[must_use]
    pub fn comps(&self) -> &[EndField] {
        &self.comps
    }

    #[must_use]
    pub fn vector_part(&self) -> &[EndField] {
        &self.comps[..self.comps.len() / 2]
    }

    #[must_use]
    pub fn covector_part(&self) -> &[EndField] {
        &self.comps[self.comps.len() / 2..]
    }

    #[must_use]
    pub fn rank(&self) -> usize {
        self.comps[0].rank()
    }

    #[must_use]
    pub fn skew_defect(&self) -> f64 {
        max_of(self.comps.iter().map(EndField::skew_defect))
    }

    /// Pointwise real-linear map of the frame index: out_k = sum_m t[k][m] in_m.
    #[must_use]
    fn transform(&self, t: &RMat) -> Vec<EndField> {
        let d = self.comps.len();
        let g = self.comps[0].grid();
        let r = self.rank();
        (0..d)
            .map(|k| {
                EndField::from_fn(g, r, |p, out| {
                    for m in 0..d {
                        let c = t[(k, m)];
                        if c != 0.0 {
                            for (o, &x) in out.iter_mut().zip(self.comps[m].at(p)) {
                                *o += x * c;
                            }
                        }
                    }
                })
            })
            .collect()
    }

    /// a . form = sum_k a_k (x) e_k . form
    #[must_use]
    pub fn act(&self, form: &FormField) -> EndFormField {
        let g = form.grid();
        let n = g.dim_n();
        let r = self.rank();
        let len = form.len_per_point();
        EndFormField::from_fn(g, r, |p, out| {
            let f = form.at(p);
            let mut tmp = vec![ZERO; len];
            for (k, c) in self.comps.iter().enumerate() {
                tmp.iter_mut().for_each(|x| *x = ZERO);
                multivector::frame_act_into(&mut tmp, n, k, C64::new(1.0, 0.0), f);
                add_matrix_times_form(out, r, len, c.at(p), &tmp);
            }
        })
    }
}

/// tr <X, Y>_s = sum_ij <X_ij, Y_ji>_s at point p.
#[must_use]
pub fn trace_pair_at(x: &EndFormField, y: &EndFormField, p: usize) -> C64 {
    let r = x.rank();
    let mut s = ZERO;
    for i in 0..r {
        for j in 0..r {
            s += multivector::mukai_raw(x.entry(p, i, j), y.entry(p, j, i));
        }
    }
    s
}

fn i_pow_minus_n(n: usize) -> C64 {
    C64::new(0.0, -1.0).powu(n as u32)
}

/// - int tr <T a1, a2> vol for a pointwise frame map T.
fn bilinear(a1: &Deformation, a2: &Deformation, psi: &SpinorField, t: impl Fn(usize) -> RMat + Sync) -> Result<f64> {
    let g = psi.grid();
    same_grid(a1.comps[0].grid(), g)?;
    same_grid(a2.comps[0].grid(), g)?;
    if a1.rank() != a2.rank() {
        return Err(Error::RankMismatch { left: a1.rank(), right: a2.rank() });
    }
    let n = g.dim_n();
    let d = 4 * n;
    let r = a1.rank();
    let q = pairing_matrix(n);
    let vals: Vec<f64> = (0..g.npts())
        .into_par_iter()
        .map(|p| {
            let tm = t(p);
            let mut s = ZERO;
            for k in 0..d {
                // (T a1)_k at p
                let mut ta = vec![ZERO; r * r];
                for m in 0..d {
                    let c = tm[(k, m)];
                    if c != 0.0 {
                        for (o, &x) in ta.iter_mut().zip(a1.comps[m].at(p)) {
                            *o += x * c;
                        }
                    }
                }
                for l in 0..d {
                    let w = q[(k, l)];
                    if w != 0.0 {
                        s += mat::trace(r, &mat::mul(r, &ta, a2.comps[l].at(p))) * w;
                    }
                }
            }
            -s.re * psi.vol(p)
        })
        .collect();
    Ok(pairwise_sum(&vals) * g.cell_volume())
}

/// omega_GM(a1, a2) = - int tr <J_psi a1, a2> vol.
pub fn omega_gm(a1: &Deformation, a2: &Deformation, psi: &SpinorField) -> Result<f64> {
    bilinear(a1, a2, psi, |p| psi.structure(p).clone())
}

/// g_GM(a1, a2) = - int tr <Ghat a1, a2> vol for a constant generalized metric.
pub fn g_gm(a1: &Deformation, a2: &Deformation, ghat: &RMat, psi: &SpinorField) -> Result<f64> {
    let d = 4 * psi.grid().dim_n();
    if ghat.nrows() != d || ghat.ncols() != d {
        return Err(Error::BadLength { got: ghat.nrows(), expected: d });
    }
    bilinear(a1, a2, psi, |_| ghat.clone())
}

/// int Im i^{-n} tr <a1.psi, a2.conj psi>_s
pub fn spinor_form(a1: &Deformation, a2: &Deformation, psi: &SpinorField) -> Result<f64> {
    let g = psi.grid();
    let x = a1.act(psi.psi());
    let y = a2.act(psi.conj());
    let c = i_pow_minus_n(g.dim_n());
    let vals: Vec<f64> = (0..g.npts()).into_par_iter().map(|p| (c * trace_pair_at(&x, &y, p)).im).collect();
    Ok(pairwise_sum(&vals) * g.cell_volume())
}

/// Pointwise defects of the two spinor identities for frame elements:
/// max |<e_i,e_j> vol - s Re i^{-n}<e_i psi, e_j conj psi>| and
/// max |<J e_i, e_j> vol - s' Im i^{-n}<e_i psi, e_j conj psi>|.
#[must_use]
pub fn frame_identity_defects(psi: &SpinorField, pairing_sign: f64, structure_sign: f64) -> (f64, f64) {
    let g = psi.grid();
    let n = g.dim_n();
    let d = 4 * n;
    let q = pairing_matrix(n);
    let c = i_pow_minus_n(n);
    let per_point: Vec<(f64, f64)> = (0..g.npts())
        .into_par_iter()
        .map(|p| {
            let len = psi.psi().len_per_point();
            let j = psi.structure(p);
            let vol = psi.vol(p);
            let mut e1 = 0.0f64;
            let mut e2 = 0.0f64;
            let acted: Vec<(Vec<C64>, Vec<C64>)> = (0..d)
                .map(|k| {
                    let mut a = vec![ZERO; len];
                    let mut b = vec![ZERO; len];
                    multivector::frame_act_into(&mut a, n, k, C64::new(1.0, 0.0), psi.psi().at(p));
                    multivector::frame_act_into(&mut b, n, k, C64::new(1.0, 0.0), psi.conj().at(p));
                    (a, b)
                })
                .collect();
            for i in 0..d {
                for jj in 0..d {
                    let z = c * multivector::mukai_raw(&acted[i].0, &acted[jj].1);
                    e1 = e1.max((q[(i, jj)] * vol - pairing_sign * z.re).abs());
                    // <J e_i, e_j> = sum_k J_{k i} Q_{k j}
                    let je: f64 = (0..d).map(|k| j[(k, i)] * q[(k, jj)]).sum();
                    e2 = e2.max((je * vol - structure_sign * z.im).abs());
                }
            }
            (e1, e2)
        })
        .collect();
    (max_of(per_point.iter().map(|x| x.0)), max_of(per_point.iter().map(|x| x.1)))
}

fn check_skew(xi: &EndField) -> Result<()> {
    let d = xi.skew_defect();
    if d > 1e-12 * (1.0 + xi.max_abs()) {
        return Err(Error::NotSkewHermitian(d));
    }
    Ok(())
}

/// <mu(A), xi> = int Im i^{-n} tr <xi psi, F_A(conj psi)>_s.
pub fn moment_value(conn: &GenConnection, xi: &EndField, psi: &SpinorField) -> Result<f64> {
    check_skew(xi)?;
    let g = psi.grid();
    same_grid(xi.grid(), g)?;
    let fc = curvature_fa_conj(conn, psi)?;
    let r = conn.rank();
    let c = i_pow_minus_n(g.dim_n());
    let vals: Vec<f64> = (0..g.npts())
        .into_par_iter()
        .map(|p| {
            let x = xi.at(p);
            let mut s = ZERO;
            for i in 0..r {
                for j in 0..r {
                    s += x[i * r + j] * multivector::mukai_raw(psi.psi().at(p), fc.entry(p, j, i));
                }
            }
            (c * s).im
        })
        .collect();
    Ok(pairwise_sum(&vals) * g.cell_volume())
}

/// int i tr(xi K) vol, the moment map read through the mean curvature.
pub fn moment_from_mean_curvature(conn: &GenConnection, xi: &EndField, psi: &SpinorField) -> Result<f64> {
    check_skew(xi)?;
    let k = mean_curvature_k(conn, psi)?;
    let r = conn.rank();
    let g = psi.grid();
    let vals: Vec<f64> = (0..g.npts())
        .into_par_iter()
        .map(|p| (C64::new(0.0, 1.0) * mat::trace(r, &mat::mul(r, xi.at(p), k.at(p)))).re * psi.vol(p))
        .collect();
    Ok(pairwise_sum(&vals) * g.cell_volume())
}

/// D xi: vector components [V^mu, xi], covector components d_mu xi + [A_mu, xi].
pub fn covariant_derivative(conn: &GenConnection, xi: &EndField) -> Result<Deformation> {
    same_grid(conn.grid(), xi.grid())?;
    let r = conn.rank();
    let vec_part: Vec<EndField> = conn
        .v()
        .iter()
        .map(|v| EndField::from_fn(xi.grid(), r, |p, out| out.copy_from_slice(&mat::commutator(r, v.at(p), xi.at(p)))))
        .collect();
    let cov: Vec<EndField> = (0..conn.grid().dim()).map(|mu| conn.covariant_partial(xi, mu)).collect();
    Deformation::new(vec_part.into_iter().chain(cov).collect())
}

/// d^D(a . form) = d(a . form) + sum_{i,j} [A_i, a_j] e_i . e_j . form, with
/// A_i the frame components of the connection.
pub fn deformation_d(conn: &GenConnection, a: &Deformation, form: &FormField) -> Result<EndFormField> {
    let g = form.grid();
    let n = g.dim_n();
    let r = conn.rank();
    let len = form.len_per_point();
    let base = a.act(form).d();
    let frame: Vec<&EndField> = conn.v().iter().chain(conn.a()).collect();
    let block = r * r * len;
    let values = map_points(g.npts(), block, |p, out| {
        out.copy_from_slice(base.at(p));
        let f = form.at(p);
        let mut t1 = vec![ZERO; len];
        let mut t2 = vec![ZERO; len];
        for (i, ci) in frame.iter().enumerate() {
            for (j, aj) in a.comps().iter().enumerate() {
                let c = mat::commutator(r, ci.at(p), aj.at(p));
                if c.iter().all(|x| *x == ZERO) {
                    continue;
                }
                t1.iter_mut().for_each(|x| *x = ZERO);
                multivector::frame_act_into(&mut t1, n, j, C64::new(1.0, 0.0), f);
                t2.iter_mut().for_each(|x| *x = ZERO);
                multivector::frame_act_into(&mut t2, n, i, C64::new(1.0, 0.0), &t1);
                add_matrix_times_form(out, r, len, &c, &t2);
            }
        }
    });
    EndFormField::new(g.clone(), r, values)
}

/// Both sides of the integration-by-parts identity
/// sum tr <D xi . psi, a . conj psi>_s = sum tr <xi psi, d^D(a . conj psi)>_s.
pub fn integration_by_parts(conn: &GenConnection, xi: &EndField, a: &Deformation, psi: &SpinorField) -> Result<(C64, C64)> {
    let g = psi.grid();
    let dxi = covariant_derivative(conn, xi)?;
    let left_x = dxi.act(psi.psi());
    let left_y = a.act(psi.conj());
    let xi_psi = EndFormField::tensor(xi, psi.psi())?;
    let right_y = deformation_d(conn, a, psi.conj())?;
    let lhs: Vec<C64> = (0..g.npts()).into_par_iter().map(|p| trace_pair_at(&left_x, &left_y, p)).collect();
    let rhs: Vec<C64> = (0..g.npts()).into_par_iter().map(|p| trace_pair_at(&xi_psi, &right_y, p)).collect();
    let cell = g.cell_volume();
    Ok((
        crate::numerics::pairwise_sum_c(&lhs) * cell,
        crate::numerics::pairwise_sum_c(&rhs) * cell,
    ))
}

/// Centered difference (m(t) - m(-t)) / 2t of the moment along a deformation.
pub fn moment_derivative(conn: &GenConnection, a: &Deformation, xi: &EndField, psi: &SpinorField, step: f64) -> Result<f64> {
    let plus = conn.shifted(a.covector_part(), a.vector_part(), step)?;
    let minus = conn.shifted(a.covector_part(), a.vector_part(), -step)?;
    Ok((moment_value(&plus, xi, psi)? - moment_value(&minus, xi, psi)?) / (2.0 * step))
}

/// Transform of a deformation by a constant real frame matrix.
#[must_use]
pub fn transform(a: &Deformation, t: &RMat) -> Deformation {
    Deformation { comps: a.transform(t) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::grid::TorusGrid;
    use crate::structures::standard_omega;

    #[test]
    fn frame_identities_hold_with_calibrated_signs() {
        let g = TorusGrid::uniform(1, 8, 1.0).unwrap();
        let psi = SpinorField::constant(&g, &[0.0, 0.4, -0.4, 0.0], &standard_omega(1)).unwrap();
        let (e1, e2) = frame_identity_defects(&psi, crate::calibration::PAIRING_SIGN, crate::calibration::STRUCTURE_SIGN);
        assert!(e1 < 1e-12, "{e1}");
        assert!(e2 < 1e-12, "{e2}");
    }

    #[test]
    fn zero_xi_gives_zero_moment() {
        let g = TorusGrid::uniform(1, 8, 1.0).unwrap();
        let psi = SpinorField::constant(&g, &[0.0; 4], &standard_omega(1)).unwrap();
        let conn = GenConnection::flat(&g, 2).with_background(vec![0.0, 1.0, -1.0, 0.0]).unwrap();
        assert_eq!(moment_value(&conn, &EndField::zeros(&g, 2), &psi).unwrap(), 0.0);
        let herm = EndField::scalar(&g, 2, |_| C64::new(1.0, 0.0));
        assert!(moment_value(&conn, &herm, &psi).is_err());
    }
}
