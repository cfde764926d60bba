use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;

/// Periodic grid on the flat torus prod_mu [0, P_mu), row-major (last axis fastest).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TorusGrid {
    n: usize,
    sizes: Vec<usize>,
    periods: Vec<f64>,
    spacings: Vec<f64>,
    #[serde(skip)]
    strides: Vec<usize>,
    #[serde(skip)]
    npts: usize,
}

pub const MAX_GRID_N: usize = 2;

impl TorusGrid {
    pub fn new(n: usize, sizes: Vec<usize>, periods: Vec<f64>) -> Result<Self> {
        if n == 0 || n > MAX_GRID_N {
            return Err(Error::Grid(format!("half-dimension {n} outside 1..={MAX_GRID_N}")));
        }
        if sizes.len() != 2 * n || periods.len() != 2 * n {
            return Err(Error::Grid(format!("need {} sizes and periods", 2 * n)));
        }
        if let Some(s) = sizes.iter().find(|&&s| s < 8 || s % 2 != 0) {
            return Err(Error::Grid(format!("axis size {s} must be even and at least 8")));
        }
        if let Some(p) = periods.iter().find(|&&p| !(p.is_finite() && p > 0.0)) {
            return Err(Error::Grid(format!("period {p} must be positive")));
        }
        let spacings = sizes.iter().zip(&periods).map(|(&s, &p)| p / s as f64).collect();
        let mut strides = vec![1; 2 * n];
        for mu in (0..2 * n - 1).rev() {
            strides[mu] = strides[mu + 1] * sizes[mu + 1];
        }
        let npts = sizes.iter().product();
        Ok(Self { n, sizes, periods, spacings, strides, npts })
    }

    pub fn uniform(n: usize, size: usize, period: f64) -> Result<Self> {
        Self::new(n, vec![size; 2 * n], vec![period; 2 * n])
    }

    #[inline]
    #[must_use]
    pub fn dim_n(&self) -> usize {
        self.n
    }

    #[inline]
    #[must_use]
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    #[inline]
    #[must_use]
    pub fn npts(&self) -> usize {
        self.npts
    }

    #[must_use]
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    #[must_use]
    pub fn periods(&self) -> &[f64] {
        &self.periods
    }

    #[must_use]
    pub fn spacings(&self) -> &[f64] {
        &self.spacings
    }

    #[must_use]
    pub fn cell_volume(&self) -> f64 {
        self.spacings.iter().product()
    }

    #[inline]
    #[must_use]
    pub fn axis_index(&self, p: usize, axis: usize) -> usize {
        (p / self.strides[axis]) % self.sizes[axis]
    }

    #[must_use]
    pub fn multi_index(&self, p: usize) -> Vec<usize> {
        (0..self.dim()).map(|mu| self.axis_index(p, mu)).collect()
    }

    #[inline]
    #[must_use]
    pub fn coord(&self, p: usize, axis: usize) -> f64 {
        self.axis_index(p, axis) as f64 * self.spacings[axis]
    }

    #[must_use]
    pub fn coords(&self, p: usize) -> Vec<f64> {
        (0..self.dim()).map(|mu| self.coord(p, mu)).collect()
    }

    /// Neighbouring point index one step forward (`+1`) or backward (`-1`).
    #[inline]
    #[must_use]
    pub fn neighbor(&self, p: usize, axis: usize, forward: bool) -> usize {
        let i = self.axis_index(p, axis);
        let s = self.sizes[axis];
        let st = self.strides[axis];
        if forward {
            if i + 1 == s {
                p - i * st
            } else {
                p + st
            }
        } else if i == 0 {
            p + (s - 1) * st
        } else {
            p - st
        }
    }

    /// Central difference along `axis` of a field with `block` values per point.
    #[must_use]
    pub fn partial(&self, data: &[C64], block: usize, axis: usize) -> Vec<C64> {
        let inv = 1.0 / (2.0 * self.spacings[axis]);
        map_points(self.npts, block, |p, out| {
            let f = self.neighbor(p, axis, true) * block;
            let b = self.neighbor(p, axis, false) * block;
            for (k, o) in out.iter_mut().enumerate() {
                *o = (data[f + k] - data[b + k]) * inv;
            }
        })
    }

    /// Real version of [`TorusGrid::partial`].
    #[must_use]
    pub fn partial_real(&self, data: &[f64], axis: usize) -> Vec<f64> {
        let inv = 1.0 / (2.0 * self.spacings[axis]);
        (0..self.npts)
            .into_par_iter()
            .map(|p| (data[self.neighbor(p, axis, true)] - data[self.neighbor(p, axis, false)]) * inv)
            .collect()
    }

    /// Checkerboard sign (+1 or -1) of point p along `axis`.
    #[must_use]
    pub fn parity(&self, p: usize, axis: usize) -> f64 {
        if self.axis_index(p, axis).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }
}

/// Fill `npts * block` values in parallel, one block per grid point.
pub fn map_points<F>(npts: usize, block: usize, f: F) -> Vec<C64>
where
    F: Fn(usize, &mut [C64]) + Sync,
{
    let mut out = vec![C64::new(0.0, 0.0); npts * block];
    if block == 0 {
        return out;
    }
    out.par_chunks_mut(block).enumerate().for_each(|(p, chunk)| f(p, chunk));
    out
}

/// Per-point real values computed in parallel, in point order.
pub fn map_points_real<F>(npts: usize, f: F) -> Vec<f64>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    (0..npts).into_par_iter().map(f).collect()
}
