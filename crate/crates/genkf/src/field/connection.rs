//! Validated spinor backgrounds, generalized connections A + V, the curvature
//! F_A.psi + d^A(V.psi) + 1/2 [V.V].psi, its mean curvature, b-field actions
//! and Chern pairings.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::fields::{
    add_commutator, covariant_d, mat, same_grid, EndField, EndFormField, FormField, ZERO,
};
use super::grid::{map_points, map_points_real, TorusGrid};
use crate::calibration;
use crate::error::{Error, Result};
use crate::multivector::{self, GradedForm};
use crate::numerics::{max_of, pairwise_sum, pairwise_sum_c, RMat};
use crate::structures::{self, GCStructure};

const CONST_TOL: f64 = 1e-10;

/// Residual of d and the tolerance it is held to.
///
/// A smooth closed field has discrete dF equal to the truncation term
/// sum_mu dx^mu ^ (h_mu^2/6) d^3_mu F at leading order, so the tolerance is
/// twice that term (estimated with thrice-applied central differences) plus
/// an absolute floor. Constant fields get the floor alone.
#[must_use]
pub fn closure_check(f: &FormField) -> (f64, f64) {
    let g = f.grid();
    let residual = f.d().max_abs();
    let len = f.len_per_point();
    let mut trunc = vec![0.0; g.npts()];
    for mu in 0..g.dim() {
        let d1 = g.partial(f.values(), len, mu);
        let d2 = g.partial(&d1, len, mu);
        let d3 = g.partial(&d2, len, mu);
        let h2 = g.spacings()[mu].powi(2) / 6.0;
        for (p, t) in trunc.iter_mut().enumerate() {
            *t += h2 * max_of(d3[p * len..(p + 1) * len].iter().map(|c| c.norm()));
        }
    }
    (residual, CONST_TOL + 2.0 * max_of(trunc))
}

/// A d-closed, pointwise pure and nondegenerate spinor field with cached
/// conjugate, self-pairing and volume density.
#[derive(Clone, Debug)]
pub struct SpinorField {
    psi: FormField,
    conj: FormField,
    pair: Vec<C64>,
    vol: Vec<f64>,
    structures: Vec<RMat>,
}

impl SpinorField {
    pub fn new(psi: FormField) -> Result<Self> {
        let g = psi.grid().clone();
        let n = g.dim_n();
        let (res, tol) = closure_check(&psi);
        if res > tol {
            return Err(Error::NotClosed(res));
        }
        let conj = psi.conj();
        let in_n = C64::new(0.0, -1.0).powu(n as u32);
        let pair: Vec<C64> = (0..g.npts()).map(|p| multivector::mukai_raw(psi.at(p), conj.at(p))).collect();
        let mut vol = Vec::with_capacity(g.npts());
        for (p, &pp) in pair.iter().enumerate() {
            let v = in_n * pp;
            if pp.norm() < 1e-12 {
                return Err(Error::DegeneratePoint(g.multi_index(p)));
            }
            if v.re <= 0.0 || v.im.abs() > 1e-10 * v.norm() {
                return Err(Error::NonPositiveDensity(g.multi_index(p)));
            }
            vol.push(v.re);
        }
        let structures = (0..g.npts())
            .into_par_iter()
            .map(|p| structures::gcs_from_spinor(&psi.form_at(p)).map(|j| j.mat().clone()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { psi, conj, pair, vol, structures })
    }

    /// e^{b + i omega} with constant coefficient matrices.
    pub fn constant(grid: &TorusGrid, b: &[f64], omega: &[f64]) -> Result<Self> {
        let form = structures::symplectic_spinor(grid.dim_n(), b, omega)?;
        Self::new(FormField::constant(grid, &form)?)
    }

    /// e^{b + i omega} from pointwise coefficient matrices (row-major, side 2n).
    pub fn from_matrices<F>(grid: &TorusGrid, f: F) -> Result<Self>
    where
        F: Fn(usize) -> (Vec<f64>, Vec<f64>) + Sync,
    {
        let n = grid.dim_n();
        let forms: Vec<GradedForm> = (0..grid.npts())
            .into_par_iter()
            .map(|p| {
                let (b, w) = f(p);
                structures::symplectic_spinor(n, &b, &w)
            })
            .collect::<Result<_>>()?;
        Self::new(FormField::from_fn(grid, |p| forms[p].clone()))
    }

    /// e^b ^ psi for a constant real 2-form b (coefficient matrix).
    pub fn b_transform(&self, b: &[f64]) -> Result<Self> {
        let n = self.grid().dim_n();
        let bf = GradedForm::real_two_form(n, b)?;
        let eb = multivector::exp_two_form(&bf)?;
        let psi = self.psi.map(|_, f| multivector::wedge(&eb, f).expect("same dimension"));
        Self::new(psi)
    }

    #[must_use]
    pub fn grid(&self) -> &TorusGrid {
        self.psi.grid()
    }

    #[must_use]
    pub fn psi(&self) -> &FormField {
        &self.psi
    }

    #[must_use]
    pub fn conj(&self) -> &FormField {
        &self.conj
    }

    /// <psi, conj psi>_s at point p.
    #[must_use]
    pub fn pair(&self, p: usize) -> C64 {
        self.pair[p]
    }

    /// i^{-n} <psi, conj psi>_s at p (real, positive).
    #[must_use]
    pub fn vol(&self, p: usize) -> f64 {
        self.vol[p]
    }

    #[must_use]
    pub fn vols(&self) -> &[f64] {
        &self.vol
    }

    /// Riemann sum of the volume form.
    #[must_use]
    pub fn total_volume(&self) -> f64 {
        pairwise_sum(&self.vol) * self.grid().cell_volume()
    }

    /// Matrix of the generalized complex structure of psi at p.
    #[must_use]
    pub fn structure(&self, p: usize) -> &RMat {
        &self.structures[p]
    }

    pub fn structure_gcs(&self, p: usize) -> Result<GCStructure> {
        GCStructure::new(self.grid().dim_n(), self.structures[p].clone())
    }
}

/// Index of the pair (mu, nu), mu < nu, in the list of 2-form components.
#[must_use]
pub fn pair_index(dim: usize, mu: usize, nu: usize) -> usize {
    debug_assert!(mu < nu && nu < dim);
    mu * dim - mu * (mu + 1) / 2 + (nu - mu - 1)
}

/// Generalized connection A + V on the trivial rank-r bundle, with an
/// optional central background curvature i * flux (constant antisymmetric
/// real 2n x 2n matrix) that is not representable by a periodic potential.
#[derive(Clone, Debug, PartialEq)]
pub struct GenConnection {
    grid: TorusGrid,
    rank: usize,
    a: Vec<EndField>,
    v: Vec<EndField>,
    flux: Vec<f64>,
}

const SKEW_TOL: f64 = 1e-12;

impl GenConnection {
    pub fn new(a: Vec<EndField>, v: Vec<EndField>) -> Result<Self> {
        let grid = a
            .first()
            .map(|f| f.grid().clone())
            .ok_or_else(|| Error::Input("connection needs components".into()))?;
        let dim = grid.dim();
        let flux = vec![0.0; dim * dim];
        Self::with_flux(a, v, flux)
    }

    pub fn with_flux(a: Vec<EndField>, v: Vec<EndField>, flux: Vec<f64>) -> Result<Self> {
        let grid = a
            .first()
            .map(|f| f.grid().clone())
            .ok_or_else(|| Error::Input("connection needs components".into()))?;
        let dim = grid.dim();
        if a.len() != dim || v.len() != dim {
            return Err(Error::BadLength { got: a.len().min(v.len()), expected: dim });
        }
        if flux.len() != dim * dim {
            return Err(Error::BadLength { got: flux.len(), expected: dim * dim });
        }
        let rank = a[0].rank();
        for f in a.iter().chain(&v) {
            same_grid(f.grid(), &grid)?;
            if f.rank() != rank {
                return Err(Error::RankMismatch { left: rank, right: f.rank() });
            }
            let d = f.skew_defect();
            if d > SKEW_TOL * (1.0 + f.max_abs()) {
                return Err(Error::NotSkewHermitian(d));
            }
        }
        let asym = max_of((0..dim * dim).map(|k| (flux[k] + flux[(k % dim) * dim + k / dim]).abs()));
        if asym > SKEW_TOL {
            return Err(Error::BadMatrix(format!("flux is not antisymmetric ({asym:.3e})")));
        }
        Ok(Self { grid, rank, a, v, flux })
    }

    #[must_use]
    pub fn flat(grid: &TorusGrid, rank: usize) -> Self {
        let dim = grid.dim();
        Self {
            grid: grid.clone(),
            rank,
            a: vec![EndField::zeros(grid, rank); dim],
            v: vec![EndField::zeros(grid, rank); dim],
            flux: vec![0.0; dim * dim],
        }
    }

    #[must_use]
    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    #[must_use]
    pub fn rank(&self) -> usize {
        self.rank
    }

    #[must_use]
    pub fn a(&self) -> &[EndField] {
        &self.a
    }

    #[must_use]
    pub fn v(&self) -> &[EndField] {
        &self.v
    }

    #[must_use]
    pub fn flux(&self) -> &[f64] {
        &self.flux
    }

    /// Replace the vector part.
    pub fn with_v(&self, v: Vec<EndField>) -> Result<Self> {
        Self::with_flux(self.a.clone(), v, self.flux.clone())
    }

    /// Replace the background flux.
    pub fn with_background(&self, flux: Vec<f64>) -> Result<Self> {
        Self::with_flux(self.a.clone(), self.v.clone(), flux)
    }

    /// self + t * (da, dv)
    pub fn shifted(&self, da: &[EndField], dv: &[EndField], t: f64) -> Result<Self> {
        let s = C64::new(t, 0.0);
        let a = self.a.iter().zip(da).map(|(x, y)| x.zip_with(y, |p, q| p + s * q)).collect::<Result<_>>()?;
        let v = self.v.iter().zip(dv).map(|(x, y)| x.zip_with(y, |p, q| p + s * q)).collect::<Result<_>>()?;
        Self::with_flux(a, v, self.flux.clone())
    }

    /// F_{mu nu} for mu < nu, in [`pair_index`] order.
    #[must_use]
    pub fn field_strength(&self) -> Vec<EndField> {
        let dim = self.grid.dim();
        let r = self.rank;
        let partials: Vec<Vec<EndField>> =
            self.a.iter().map(|am| (0..dim).map(|mu| am.partial(mu)).collect()).collect();
        let mut out = Vec::with_capacity(dim * (dim - 1) / 2);
        for mu in 0..dim {
            for nu in mu + 1..dim {
                let bg = C64::new(0.0, self.flux[mu * dim + nu]);
                out.push(EndField::from_fn(&self.grid, r, |p, o| {
                    let dmu_anu = partials[nu][mu].at(p);
                    let dnu_amu = partials[mu][nu].at(p);
                    let c = mat::commutator(r, self.a[mu].at(p), self.a[nu].at(p));
                    for k in 0..r * r {
                        o[k] = dmu_anu[k] - dnu_amu[k] + c[k];
                    }
                    for i in 0..r {
                        o[i * r + i] += bg;
                    }
                }));
            }
        }
        out
    }

    /// D_mu X = d_mu X + [A_mu, X] for an endomorphism field X.
    #[must_use]
    pub fn covariant_partial(&self, x: &EndField, mu: usize) -> EndField {
        let r = self.rank;
        let dx = x.partial(mu);
        EndField::from_fn(&self.grid, r, |p, o| {
            let c = mat::commutator(r, self.a[mu].at(p), x.at(p));
            for k in 0..r * r {
                o[k] = dx.at(p)[k] + c[k];
            }
        })
    }

    /// Constant unitary gauge transform: A -> U A U^dagger, V -> U V U^dagger.
    pub fn gauge_constant(&self, u: &[C64]) -> Result<Self> {
        let r = self.rank;
        let ud = mat::adjoint(r, u);
        let defect = max_of(
            mat::mul(r, u, &ud).iter().zip(mat::identity(r)).map(|(x, y)| (x - y).norm()),
        );
        if defect > 1e-12 {
            return Err(Error::BadMatrix(format!("gauge matrix is not unitary ({defect:.3e})")));
        }
        let a = self.a.iter().map(|f| f.conjugate_by(u, &ud)).collect();
        let v = self.v.iter().map(|f| f.conjugate_by(u, &ud)).collect();
        Self::with_flux(a, v, self.flux.clone())
    }

    /// Phase gauge transform by e^{i theta}: A_mu -> A_mu - i d_mu theta.
    pub fn gauge_phase(&self, theta: &[f64]) -> Result<Self> {
        if theta.len() != self.grid.npts() {
            return Err(Error::BadLength { got: theta.len(), expected: self.grid.npts() });
        }
        let a = self
            .a
            .iter()
            .enumerate()
            .map(|(mu, am)| {
                let d = self.grid.partial_real(theta, mu);
                let shift = EndField::scalar(&self.grid, self.rank, |p| C64::new(0.0, -d[p]));
                am.add(&shift)
            })
            .collect::<Result<_>>()?;
        Self::with_flux(a, self.v.clone(), self.flux.clone())
    }
}

fn check_background(conn: &GenConnection, psi: &SpinorField) -> Result<()> {
    same_grid(conn.grid(), psi.grid())
}

/// V . form = sum_mu V^mu (x) i_{d/dx^mu} form.
#[must_use]
pub fn v_action(v: &[EndField], form: &FormField) -> EndFormField {
    let g = form.grid();
    let r = v[0].rank();
    let len = form.len_per_point();
    EndFormField::from_fn(g, r, |p, out| {
        let f = form.at(p);
        for (mu, vm) in v.iter().enumerate() {
            let m = vm.at(p);
            for ij in 0..r * r {
                if m[ij] != ZERO {
                    multivector::add_interior_axis(&mut out[ij * len..(ij + 1) * len], mu, m[ij], f);
                }
            }
        }
    })
}

/// The curvature applied to an arbitrary form field (psi or its conjugate).
pub fn curvature_on(conn: &GenConnection, form: &FormField) -> Result<EndFormField> {
    let g = conn.grid();
    same_grid(g, form.grid())?;
    let dim = g.dim();
    let r = conn.rank();
    let len = form.len_per_point();
    let fs = conn.field_strength();
    let vpsi = v_action(conn.v(), form);
    let dvpsi = covariant_d(conn.a(), &vpsi)?;
    let block = r * r * len;
    let values = map_points(g.npts(), block, |p, out| {
        out.copy_from_slice(dvpsi.at(p));
        let f = form.at(p);
        let mut tmp = vec![ZERO; len];
        let mut tmp2 = vec![ZERO; len];
        for mu in 0..dim {
            for nu in mu + 1..dim {
                let m = fs[pair_index(dim, mu, nu)].at(p);
                tmp.iter_mut().for_each(|c| *c = ZERO);
                multivector::add_wedge_axis(&mut tmp, nu, C64::new(1.0, 0.0), f);
                tmp2.iter_mut().for_each(|c| *c = ZERO);
                multivector::add_wedge_axis(&mut tmp2, mu, C64::new(1.0, 0.0), &tmp);
                add_matrix_times_form(out, r, len, m, &tmp2);
            }
        }
        // 1/2 sum_{mu,nu} [V^mu, V^nu] i_mu i_nu = sum_{mu<nu} [V^mu, V^nu] i_mu i_nu
        for mu in 0..dim {
            for nu in mu + 1..dim {
                let c = mat::commutator(r, conn.v()[mu].at(p), conn.v()[nu].at(p));
                if c.iter().all(|x| *x == ZERO) {
                    continue;
                }
                tmp.iter_mut().for_each(|x| *x = ZERO);
                multivector::add_interior_axis(&mut tmp, nu, C64::new(1.0, 0.0), f);
                tmp2.iter_mut().for_each(|x| *x = ZERO);
                multivector::add_interior_axis(&mut tmp2, mu, C64::new(1.0, 0.0), &tmp);
                add_matrix_times_form(out, r, len, &c, &tmp2);
            }
        }
    });
    EndFormField::new(g.clone(), r, values)
}

/// out[ij] += m[ij] * form
pub(crate) fn add_matrix_times_form(out: &mut [C64], r: usize, len: usize, m: &[C64], form: &[C64]) {
    for ij in 0..r * r {
        if m[ij] == ZERO {
            continue;
        }
        for (o, &c) in out[ij * len..(ij + 1) * len].iter_mut().zip(form) {
            *o += m[ij] * c;
        }
    }
}

/// Curvature of the generalized connection with respect to psi.
pub fn curvature_fa(conn: &GenConnection, psi: &SpinorField) -> Result<EndFormField> {
    check_background(conn, psi)?;
    curvature_on(conn, psi.psi())
}

/// Curvature evaluated on the conjugate spinor.
pub fn curvature_fa_conj(conn: &GenConnection, psi: &SpinorField) -> Result<EndFormField> {
    check_background(conn, psi)?;
    curvature_on(conn, psi.conj())
}

/// Coefficient matrix of the U^{-n} component: <X_ij, conj psi>_s / <psi, conj psi>_s.
pub fn line_component(x: &EndFormField, psi: &SpinorField) -> Result<EndField> {
    same_grid(x.grid(), psi.grid())?;
    let r = x.rank();
    Ok(EndField::from_fn(x.grid(), r, |p, out| {
        let c = psi.conj().at(p);
        let den = psi.pair(p);
        for i in 0..r {
            for j in 0..r {
                out[i * r + j] = multivector::mukai_raw(x.entry(p, i, j), c) / den;
            }
        }
    }))
}

/// Hermitian part of the U^{-n} component of the curvature.
pub fn mean_curvature_k(conn: &GenConnection, psi: &SpinorField) -> Result<EndField> {
    let f = curvature_fa(conn, psi)?;
    Ok(line_component(&f, psi)?.map(|_, x, out| out.copy_from_slice(&mat::herm_part(x.len().isqrt(), x))))
}

/// Grid L^2 norm of an endomorphism field weighted by the volume density.
#[must_use]
pub fn l2_norm(x: &EndField, psi: &SpinorField) -> f64 {
    let vals = map_points_real(x.grid().npts(), |p| mat::frob_sq(x.at(p)) * psi.vol(p));
    (pairwise_sum(&vals) * x.grid().cell_volume()).sqrt()
}

/// K - lambda id and its weighted L^2 norm.
pub fn eh_residual(conn: &GenConnection, psi: &SpinorField, lambda: f64) -> Result<(EndField, f64)> {
    let k = mean_curvature_k(conn, psi)?;
    let r = conn.rank();
    let res = k.map(|_, x, out| {
        out.copy_from_slice(x);
        for i in 0..r {
            out[i * r + i] -= lambda;
        }
    });
    let norm = l2_norm(&res, psi);
    Ok((res, norm))
}

/// Action of a closed real 2-form b (given as a form field) on connections:
/// A'_mu = A_mu + s sum_nu V^nu b_{nu mu} with the calibrated sign s.
pub fn bfield_act_connection(b: &FormField, conn: &GenConnection) -> Result<GenConnection> {
    bfield_act_connection_signed(b, conn, calibration::BFIELD_SIGN)
}

/// [`bfield_act_connection`] with an explicit sign, used to calibrate it.
pub fn bfield_act_connection_signed(b: &FormField, conn: &GenConnection, s: f64) -> Result<GenConnection> {
    let g = conn.grid();
    same_grid(g, b.grid())?;
    let off = max_of((0..g.npts()).map(|p| b.form_at(p).off_degree_norm(2)));
    if off > 1e-14 {
        return Err(Error::NotDegreeTwo(off));
    }
    let imag = max_of(b.values().iter().map(|c| c.im.abs()));
    if imag > 0.0 {
        return Err(Error::NotReal(imag));
    }
    let (res, tol) = closure_check(b);
    if res > tol {
        return Err(Error::NotClosed(res));
    }
    let dim = g.dim();
    let r = conn.rank();
    let a = (0..dim)
        .map(|mu| {
            EndField::from_fn(g, r, |p, out| {
                out.copy_from_slice(conn.a()[mu].at(p));
                let bp = b.at(p);
                for nu in 0..dim {
                    if nu == mu {
                        continue;
                    }
                    // b_{nu mu} as the coefficient of dx^nu ^ dx^mu
                    let coeff = bp[(1 << nu) | (1 << mu)].re * if nu < mu { 1.0 } else { -1.0 };
                    if coeff == 0.0 {
                        continue;
                    }
                    for (o, &x) in out.iter_mut().zip(conn.v()[nu].at(p)) {
                        *o += x * (s * coeff);
                    }
                }
            })
        })
        .collect();
    GenConnection::with_flux(a, conn.v().to_vec(), conn.flux().to_vec())
}

/// Both sides of b-field covariance for a constant b (coefficient matrix):
/// the curvature of the transformed connection (sign s) on e^b psi, and
/// e^b ^ curvature on psi.
pub fn bfield_covariance_sides(
    conn: &GenConnection,
    psi: &SpinorField,
    b: &[f64],
    s: f64,
) -> Result<(EndFormField, EndFormField)> {
    let g = conn.grid();
    let n = g.dim_n();
    let psi_b = psi.b_transform(b)?;
    let conn_b = bfield_act_connection_signed(&constant_two_form(g, b)?, conn, s)?;
    let lhs = curvature_fa(&conn_b, &psi_b)?;
    let eb = multivector::exp_two_form(&GradedForm::real_two_form(n, b)?)?;
    let rhs = curvature_fa(conn, psi)?.map_forms(|_, src, out| {
        let f = GradedForm::from_coeffs(n, src.to_vec()).expect("length");
        out.copy_from_slice(multivector::wedge(&eb, &f).expect("same dimension").coeffs());
    });
    Ok((lhs, rhs))
}

/// sum_{mu<nu} [V^mu, V^nu] b_{nu mu} (x) form: the part of the transformed
/// curvature that a non-commuting V leaves over after the b-field action.
pub fn commutator_b_term(conn: &GenConnection, b: &[f64], form: &FormField) -> Result<EndFormField> {
    let g = conn.grid();
    same_grid(g, form.grid())?;
    let dim = g.dim();
    if b.len() != dim * dim {
        return Err(Error::BadLength { got: b.len(), expected: dim * dim });
    }
    let r = conn.rank();
    let m = EndField::from_fn(g, r, |p, out| {
        for mu in 0..dim {
            for nu in mu + 1..dim {
                let c = mat::commutator(r, conn.v()[mu].at(p), conn.v()[nu].at(p));
                for (o, x) in out.iter_mut().zip(c) {
                    *o += x * b[nu * dim + mu];
                }
            }
        }
    });
    EndFormField::tensor(&m, form)
}

/// Constant real 2-form field from its coefficient matrix.
pub fn constant_two_form(grid: &TorusGrid, b: &[f64]) -> Result<FormField> {
    FormField::constant(grid, &GradedForm::real_two_form(grid.dim_n(), b)?)
}

/// Trace of the curvature, a form field.
pub fn trace_curvature(conn: &GenConnection, psi: &SpinorField) -> Result<FormField> {
    Ok(curvature_fa(conn, psi)?.trace())
}

/// Riemann sum of <f, conj psi>_s.
#[must_use]
pub fn pair_with_conj(f: &FormField, psi: &SpinorField) -> C64 {
    let g = f.grid();
    let vals: Vec<C64> =
        (0..g.npts()).into_par_iter().map(|p| multivector::mukai_raw(f.at(p), psi.conj().at(p))).collect();
    pairwise_sum_c(&vals) * g.cell_volume()
}

/// Riemann sum of <tr curvature, conj psi>_s.
pub fn chern_pair(conn: &GenConnection, psi: &SpinorField) -> Result<C64> {
    Ok(pair_with_conj(&trace_curvature(conn, psi)?, psi))
}

/// tr F_A ^ psi as a form field.
pub fn trace_field_strength_wedge(conn: &GenConnection, psi: &SpinorField) -> Result<FormField> {
    check_background(conn, psi)?;
    let g = conn.grid();
    let dim = g.dim();
    let r = conn.rank();
    let fs = conn.field_strength();
    Ok(FormField::from_fn(g, |p| {
        let mut two = vec![ZERO; dim * dim];
        for mu in 0..dim {
            for nu in mu + 1..dim {
                let t = mat::trace(r, fs[pair_index(dim, mu, nu)].at(p));
                two[mu * dim + nu] = t;
                two[nu * dim + mu] = -t;
            }
        }
        let f = GradedForm::two_form(g.dim_n(), &two).expect("shape");
        multivector::wedge(&f, &psi.psi().form_at(p)).expect("same dimension")
    }))
}

/// lambda with lambda r int <psi, conj psi>_s = int <tr F_A ^ psi, conj psi>_s.
pub fn lambda_from_chern(conn: &GenConnection, psi: &SpinorField) -> Result<f64> {
    let num = pair_with_conj(&trace_field_strength_wedge(conn, psi)?, psi);
    let den = pairwise_sum_c(&(0..psi.grid().npts()).map(|p| psi.pair(p)).collect::<Vec<_>>())
        * psi.grid().cell_volume();
    Ok((num / (den * conn.rank() as f64)).re)
}

/// Max distance between two endomorphism fields.
pub fn end_dist(a: &EndField, b: &EndField) -> Result<f64> {
    Ok(a.sub(b)?.max_abs())
}

/// The matrix of [m, .] acting on a form-valued matrix, exposed for callers
/// that assemble brackets themselves.
pub fn commutator_forms(r: usize, len: usize, m: &[C64], x: &[C64]) -> Vec<C64> {
    let mut out = vec![ZERO; r * r * len];
    add_commutator(&mut out, r, len, m, x, C64::new(1.0, 0.0));
    out
}

/// Lambda_omega F = 1/2 tr(W^{-1} F) for antisymmetric coefficient matrices,
/// applied entrywise to a matrix-valued 2-form given by its components.
pub fn contract_omega(n: usize, omega: &[f64], comps: &[Vec<C64>], r: usize) -> Result<Vec<C64>> {
    let dim = 2 * n;
    let w = DMatrix::from_row_slice(dim, dim, omega);
    let winv = w.try_inverse().ok_or_else(|| Error::BadMatrix("omega is degenerate".into()))?;
    let mut out = vec![ZERO; r * r];
    for mu in 0..dim {
        for nu in mu + 1..dim {
            // 1/2 tr(W^{-1} F) = 1/2 sum W^{-1}_{nu mu} F_{mu nu} = sum_{mu<nu} W^{-1}_{nu mu} F_{mu nu}
            let c = winv[(nu, mu)];
            for (o, &f) in out.iter_mut().zip(&comps[pair_index(dim, mu, nu)]) {
                *o += f * c;
            }
        }
    }
    Ok(out)
}
