//! Grid-sampled forms and endomorphism fields, the discrete exterior
//! derivative and the Lie derivative.

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::grid::{map_points, TorusGrid};
use crate::error::{Error, Result};
use crate::multivector::{self, GradedForm};
use crate::numerics::max_of;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Small dense r x r matrix helpers on row-major slices.
pub mod mat {
    use super::{C64, ZERO};

    pub fn mul_into(r: usize, a: &[C64], b: &[C64], out: &mut [C64]) {
        for i in 0..r {
            for j in 0..r {
                let mut s = ZERO;
                for k in 0..r {
                    s += a[i * r + k] * b[k * r + j];
                }
                out[i * r + j] = s;
            }
        }
    }

    #[must_use]
    pub fn mul(r: usize, a: &[C64], b: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; r * r];
        mul_into(r, a, b, &mut out);
        out
    }

    #[must_use]
    pub fn commutator(r: usize, a: &[C64], b: &[C64]) -> Vec<C64> {
        let ab = mul(r, a, b);
        let ba = mul(r, b, a);
        ab.iter().zip(&ba).map(|(x, y)| x - y).collect()
    }

    #[must_use]
    pub fn adjoint(r: usize, a: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; r * r];
        for i in 0..r {
            for j in 0..r {
                out[j * r + i] = a[i * r + j].conj();
            }
        }
        out
    }

    /// (X + X^dagger) / 2
    #[must_use]
    pub fn herm_part(r: usize, a: &[C64]) -> Vec<C64> {
        let ad = adjoint(r, a);
        a.iter().zip(&ad).map(|(x, y)| (x + y) * 0.5).collect()
    }

    #[must_use]
    pub fn trace(r: usize, a: &[C64]) -> C64 {
        (0..r).map(|i| a[i * r + i]).sum()
    }

    /// max |X + X^dagger|
    #[must_use]
    pub fn skew_defect(r: usize, a: &[C64]) -> f64 {
        let ad = adjoint(r, a);
        a.iter().zip(&ad).map(|(x, y)| (x + y).norm()).fold(0.0, f64::max)
    }

    #[must_use]
    pub fn identity(r: usize) -> Vec<C64> {
        let mut out = vec![ZERO; r * r];
        for i in 0..r {
            out[i * r + i] = C64::new(1.0, 0.0);
        }
        out
    }

    /// Squared Frobenius norm.
    #[must_use]
    pub fn frob_sq(a: &[C64]) -> f64 {
        a.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// A form-valued field: one `GradedForm` coefficient block per grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct FormField {
    grid: TorusGrid,
    values: Vec<C64>,
}

impl FormField {
    #[must_use]
    pub fn form_len(grid: &TorusGrid) -> usize {
        1 << (2 * grid.dim_n())
    }

    pub fn new(grid: TorusGrid, values: Vec<C64>) -> Result<Self> {
        let expected = grid.npts() * Self::form_len(&grid);
        if values.len() != expected {
            return Err(Error::BadLength { got: values.len(), expected });
        }
        Ok(Self { grid, values })
    }

    #[must_use]
    pub fn zeros(grid: &TorusGrid) -> Self {
        Self { values: vec![ZERO; grid.npts() * Self::form_len(grid)], grid: grid.clone() }
    }

    /// The same form at every point.
    pub fn constant(grid: &TorusGrid, form: &GradedForm) -> Result<Self> {
        if form.dim_n() != grid.dim_n() {
            return Err(Error::DimensionMismatch { left: grid.dim_n(), right: form.dim_n() });
        }
        Ok(Self::from_fn(grid, |_| form.clone()))
    }

    pub fn from_fn<F>(grid: &TorusGrid, f: F) -> Self
    where
        F: Fn(usize) -> GradedForm + Sync,
    {
        let len = Self::form_len(grid);
        let values = map_points(grid.npts(), len, |p, out| out.copy_from_slice(f(p).coeffs()));
        Self { grid: grid.clone(), values }
    }

    #[must_use]
    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    #[must_use]
    pub fn values(&self) -> &[C64] {
        &self.values
    }

    #[must_use]
    pub fn len_per_point(&self) -> usize {
        Self::form_len(&self.grid)
    }

    #[must_use]
    pub fn at(&self, p: usize) -> &[C64] {
        let l = self.len_per_point();
        &self.values[p * l..(p + 1) * l]
    }

    #[must_use]
    pub fn form_at(&self, p: usize) -> GradedForm {
        GradedForm::from_coeffs(self.grid.dim_n(), self.at(p).to_vec()).expect("consistent length")
    }

    #[must_use]
    pub fn conj(&self) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|c| c.conj()).collect() }
    }

    #[must_use]
    pub fn max_abs(&self) -> f64 {
        max_of(self.values.iter().map(|c| c.norm()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    #[must_use]
    pub fn scale(&self, s: C64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|c| c * s).collect() }
    }

    /// Discrete exterior derivative.
    #[must_use]
    pub fn d(&self) -> Self {
        Self { grid: self.grid.clone(), values: d_blocks(&self.grid, &self.values, 1) }
    }

    /// Pointwise map.
    pub fn map<F>(&self, f: F) -> Self
    where
        F: Fn(usize, &GradedForm) -> GradedForm + Sync,
    {
        Self::from_fn(&self.grid, |p| f(p, &self.form_at(p)))
    }
}

pub(crate) fn same_grid(a: &TorusGrid, b: &TorusGrid) -> Result<()> {
    if a != b {
        Err(Error::Grid("fields live on different grids".into()))
    } else {
        Ok(())
    }
}

/// d applied to `nblk` forms per point (layout [point][block][mask]).
#[must_use]
pub fn d_blocks(grid: &TorusGrid, data: &[C64], nblk: usize) -> Vec<C64> {
    let len = FormField::form_len(grid);
    let block = nblk * len;
    let partials: Vec<Vec<C64>> = (0..grid.dim()).map(|mu| grid.partial(data, block, mu)).collect();
    map_points(grid.npts(), block, |p, out| {
        for (mu, dmu) in partials.iter().enumerate() {
            let src = &dmu[p * block..(p + 1) * block];
            for b in 0..nblk {
                multivector::add_wedge_axis(
                    &mut out[b * len..(b + 1) * len],
                    mu,
                    C64::new(1.0, 0.0),
                    &src[b * len..(b + 1) * len],
                );
            }
        }
    })
}

/// L_v F = i_v dF + d(i_v F) for a real vector field with components v[mu].
pub fn lie_derivative(v: &[Vec<f64>], f: &FormField) -> Result<FormField> {
    let g = f.grid();
    if v.len() != g.dim() || v.iter().any(|c| c.len() != g.npts()) {
        return Err(Error::Grid("vector field shape does not match the grid".into()));
    }
    let contract = |field: &FormField| -> FormField {
        let len = field.len_per_point();
        let values = map_points(g.npts(), len, |p, out| {
            for (mu, comp) in v.iter().enumerate() {
                multivector::add_interior_axis(out, mu, C64::new(comp[p], 0.0), field.at(p));
            }
        });
        FormField { grid: g.clone(), values }
    };
    contract(&f.d()).add(&contract(f).d())
}

/// Field of r x r complex matrices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EndField {
    #[serde(skip)]
    grid: TorusGrid,
    rank: usize,
    #[serde(serialize_with = "serialize_complex")]
    values: Vec<C64>,
}

fn serialize_complex<S: serde::Serializer>(v: &[C64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for c in v {
        seq.serialize_element(&[c.re, c.im])?;
    }
    seq.end()
}

impl EndField {
    pub fn new(grid: TorusGrid, rank: usize, values: Vec<C64>) -> Result<Self> {
        let expected = grid.npts() * rank * rank;
        if rank == 0 || values.len() != expected {
            return Err(Error::BadLength { got: values.len(), expected });
        }
        Ok(Self { grid, rank, values })
    }

    #[must_use]
    pub fn zeros(grid: &TorusGrid, rank: usize) -> Self {
        Self { grid: grid.clone(), rank, values: vec![ZERO; grid.npts() * rank * rank] }
    }

    pub fn from_fn<F>(grid: &TorusGrid, rank: usize, f: F) -> Self
    where
        F: Fn(usize, &mut [C64]) + Sync,
    {
        Self { grid: grid.clone(), rank, values: map_points(grid.npts(), rank * rank, f) }
    }

    /// Constant matrix field.
    pub fn constant(grid: &TorusGrid, rank: usize, m: &[C64]) -> Result<Self> {
        if m.len() != rank * rank {
            return Err(Error::BadLength { got: m.len(), expected: rank * rank });
        }
        Ok(Self::from_fn(grid, rank, |_, out| out.copy_from_slice(m)))
    }

    /// Scalar field f(p) times the identity.
    pub fn scalar<F>(grid: &TorusGrid, rank: usize, f: F) -> Self
    where
        F: Fn(usize) -> C64 + Sync,
    {
        Self::from_fn(grid, rank, |p, out| {
            let v = f(p);
            for i in 0..rank {
                out[i * rank + i] = v;
            }
        })
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
    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    #[must_use]
    pub fn at(&self, p: usize) -> &[C64] {
        let b = self.rank * self.rank;
        &self.values[p * b..(p + 1) * b]
    }

    /// Largest |X + X^dagger| over the grid.
    #[must_use]
    pub fn skew_defect(&self) -> f64 {
        let r = self.rank;
        max_of((0..self.grid.npts()).map(|p| mat::skew_defect(r, self.at(p))))
    }

    #[must_use]
    pub fn max_abs(&self) -> f64 {
        max_of(self.values.iter().map(|c| c.norm()))
    }

    pub fn zip_with<F>(&self, other: &Self, f: F) -> Result<Self>
    where
        F: Fn(C64, C64) -> C64,
    {
        same_grid(&self.grid, &other.grid)?;
        if self.rank != other.rank {
            return Err(Error::RankMismatch { left: self.rank, right: other.rank });
        }
        Ok(Self {
            grid: self.grid.clone(),
            rank: self.rank,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    #[must_use]
    pub fn scale(&self, s: C64) -> Self {
        Self { grid: self.grid.clone(), rank: self.rank, values: self.values.iter().map(|c| c * s).collect() }
    }

    /// Central difference along an axis.
    #[must_use]
    pub fn partial(&self, axis: usize) -> Self {
        Self {
            grid: self.grid.clone(),
            rank: self.rank,
            values: self.grid.partial(&self.values, self.rank * self.rank, axis),
        }
    }

    /// Pointwise g X g^{-1} for a constant invertible g (given with its inverse).
    #[must_use]
    pub fn conjugate_by(&self, g: &[C64], ginv: &[C64]) -> Self {
        let r = self.rank;
        Self::from_fn(&self.grid, r, |p, out| {
            let t = mat::mul(r, g, self.at(p));
            mat::mul_into(r, &t, ginv, out);
        })
    }

    /// Pointwise map over matrices.
    pub fn map<F>(&self, f: F) -> Self
    where
        F: Fn(usize, &[C64], &mut [C64]) + Sync,
    {
        Self::from_fn(&self.grid, self.rank, |p, out| f(p, self.at(p), out))
    }
}

/// Field of r x r matrices of forms, layout [point][i*r+j][mask].
#[derive(Clone, Debug, PartialEq)]
pub struct EndFormField {
    grid: TorusGrid,
    rank: usize,
    values: Vec<C64>,
}

impl EndFormField {
    #[must_use]
    pub fn zeros(grid: &TorusGrid, rank: usize) -> Self {
        Self { grid: grid.clone(), rank, values: vec![ZERO; grid.npts() * rank * rank * FormField::form_len(grid)] }
    }

    pub fn new(grid: TorusGrid, rank: usize, values: Vec<C64>) -> Result<Self> {
        let expected = grid.npts() * rank * rank * FormField::form_len(&grid);
        if rank == 0 || values.len() != expected {
            return Err(Error::BadLength { got: values.len(), expected });
        }
        Ok(Self { grid, rank, values })
    }

    pub fn from_fn<F>(grid: &TorusGrid, rank: usize, f: F) -> Self
    where
        F: Fn(usize, &mut [C64]) + Sync,
    {
        let block = rank * rank * FormField::form_len(grid);
        Self { grid: grid.clone(), rank, values: map_points(grid.npts(), block, f) }
    }

    /// M (x) psi: matrix field times a form field.
    pub fn tensor(m: &EndField, f: &FormField) -> Result<Self> {
        same_grid(m.grid(), f.grid())?;
        let r = m.rank();
        let len = f.len_per_point();
        Ok(Self::from_fn(m.grid(), r, |p, out| {
            let mp = m.at(p);
            let fp = f.at(p);
            for ij in 0..r * r {
                for (o, &c) in out[ij * len..(ij + 1) * len].iter_mut().zip(fp) {
                    *o = mp[ij] * c;
                }
            }
        }))
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
    pub fn form_len(&self) -> usize {
        FormField::form_len(&self.grid)
    }

    #[must_use]
    pub fn values(&self) -> &[C64] {
        &self.values
    }

    #[must_use]
    pub fn block(&self) -> usize {
        self.rank * self.rank * self.form_len()
    }

    #[must_use]
    pub fn at(&self, p: usize) -> &[C64] {
        let b = self.block();
        &self.values[p * b..(p + 1) * b]
    }

    /// The (i, j) entry at point p, a form.
    #[must_use]
    pub fn entry(&self, p: usize, i: usize, j: usize) -> &[C64] {
        let len = self.form_len();
        let ij = i * self.rank + j;
        &self.at(p)[ij * len..(ij + 1) * len]
    }

    #[must_use]
    pub fn trace(&self) -> FormField {
        let len = self.form_len();
        let r = self.rank;
        FormField {
            grid: self.grid.clone(),
            values: map_points(self.grid.npts(), len, |p, out| {
                for i in 0..r {
                    for (o, c) in out.iter_mut().zip(self.entry(p, i, i)) {
                        *o += c;
                    }
                }
            }),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            rank: self.rank,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            rank: self.rank,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    fn check(&self, other: &Self) -> Result<()> {
        same_grid(&self.grid, &other.grid)?;
        if self.rank != other.rank {
            return Err(Error::RankMismatch { left: self.rank, right: other.rank });
        }
        Ok(())
    }

    #[must_use]
    pub fn max_abs(&self) -> f64 {
        max_of(self.values.iter().map(|c| c.norm()))
    }

    pub fn dist(&self, other: &Self) -> Result<f64> {
        self.check(other)?;
        Ok(max_of(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm())))
    }

    /// Discrete exterior derivative entrywise.
    #[must_use]
    pub fn d(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            rank: self.rank,
            values: d_blocks(&self.grid, &self.values, self.rank * self.rank),
        }
    }

    /// Apply a linear map of forms to every entry at every point.
    pub fn map_forms<F>(&self, f: F) -> Self
    where
        F: Fn(usize, &[C64], &mut [C64]) + Sync,
    {
        let len = self.form_len();
        let r = self.rank;
        Self::from_fn(&self.grid, r, |p, out| {
            let src = self.at(p);
            for ij in 0..r * r {
                f(p, &src[ij * len..(ij + 1) * len], &mut out[ij * len..(ij + 1) * len]);
            }
        })
    }

    /// Pointwise g X g^{-1} for constant g.
    #[must_use]
    pub fn conjugate_by(&self, g: &[C64], ginv: &[C64]) -> Self {
        let r = self.rank;
        let len = self.form_len();
        Self::from_fn(&self.grid, r, |p, out| {
            let src = self.at(p);
            for i in 0..r {
                for j in 0..r {
                    let o = &mut out[(i * r + j) * len..(i * r + j + 1) * len];
                    for k in 0..r {
                        for l in 0..r {
                            let w = g[i * r + k] * ginv[l * r + j];
                            if w == ZERO {
                                continue;
                            }
                            let s = &src[(k * r + l) * len..(k * r + l + 1) * len];
                            for (oo, &ss) in o.iter_mut().zip(s) {
                                *oo += w * ss;
                            }
                        }
                    }
                }
            }
        })
    }
}

/// out += c * [m, x] for a matrix m and a matrix of forms x (block layout).
pub fn add_commutator(out: &mut [C64], r: usize, len: usize, m: &[C64], x: &[C64], c: C64) {
    for i in 0..r {
        for j in 0..r {
            let o = &mut out[(i * r + j) * len..(i * r + j + 1) * len];
            for k in 0..r {
                let left = m[i * r + k];
                if left != ZERO {
                    let s = &x[(k * r + j) * len..(k * r + j + 1) * len];
                    for (oo, &ss) in o.iter_mut().zip(s) {
                        *oo += c * left * ss;
                    }
                }
                let right = m[k * r + j];
                if right != ZERO {
                    let s = &x[(i * r + k) * len..(i * r + k + 1) * len];
                    for (oo, &ss) in o.iter_mut().zip(s) {
                        *oo -= c * right * ss;
                    }
                }
            }
        }
    }
}

/// d^A a = d a + sum_mu dx^mu ^ [A_mu, a].
pub fn covariant_d(a_conn: &[EndField], a: &EndFormField) -> Result<EndFormField> {
    let g = a.grid();
    if a_conn.len() != g.dim() {
        return Err(Error::BadLength { got: a_conn.len(), expected: g.dim() });
    }
    for am in a_conn {
        same_grid(am.grid(), g)?;
        if am.rank() != a.rank() {
            return Err(Error::RankMismatch { left: am.rank(), right: a.rank() });
        }
    }
    let da = a.d();
    let r = a.rank();
    let len = a.form_len();
    let block = a.block();
    let values = map_points(g.npts(), block, |p, out| {
        out.copy_from_slice(da.at(p));
        let x = a.at(p);
        let mut tmp = vec![ZERO; block];
        for (mu, am) in a_conn.iter().enumerate() {
            tmp.iter_mut().for_each(|c| *c = ZERO);
            add_commutator(&mut tmp, r, len, am.at(p), x, C64::new(1.0, 0.0));
            for ij in 0..r * r {
                multivector::add_wedge_axis(
                    &mut out[ij * len..(ij + 1) * len],
                    mu,
                    C64::new(1.0, 0.0),
                    &tmp[ij * len..(ij + 1) * len],
                );
            }
        }
    });
    EndFormField::new(g.clone(), r, values)
}
