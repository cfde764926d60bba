//! Deterministic reductions and small dense linear-algebra helpers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

pub type CMat = DMatrix<C64>;
pub type RMat = DMatrix<f64>;

const BLOCK: usize = 32;

/// Pairwise summation; the association order depends only on the length.
#[must_use]
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[must_use]
pub fn pairwise_sum_c(xs: &[C64]) -> C64 {
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum_c(&xs[..mid]) + pairwise_sum_c(&xs[mid..])
}

/// Largest entry of a slice of magnitudes (0 for empty input).
#[must_use]
pub fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

/// Singular values and right singular vectors of `m`, padded with zero rows
/// so that every right singular vector is returned.
fn full_right_svd(m: &CMat) -> (Vec<f64>, CMat) {
    let cols = m.ncols();
    let padded;
    let m = if m.nrows() < cols {
        padded = {
            let mut p = CMat::zeros(cols, cols);
            p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
            p
        };
        &padded
    } else {
        m
    };
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    (svd.singular_values.iter().copied().collect(), vt)
}

/// Orthonormal basis of the numerical null space, threshold `rel * sigma_max`
/// (absolute `rel` when the matrix vanishes).
#[must_use]
pub fn null_space(m: &CMat, rel: f64) -> Vec<DVector<C64>> {
    if m.ncols() == 0 {
        return Vec::new();
    }
    let (sv, vt) = full_right_svd(m);
    let smax = max_of(sv.iter().copied());
    let thresh = if smax > 0.0 { rel * smax } else { rel };
    sv.iter()
        .enumerate()
        .filter(|(_, &s)| s <= thresh)
        .map(|(i, _)| vt.row(i).adjoint())
        .collect()
}

/// Numerical rank with threshold `rel * sigma_max`.
#[must_use]
pub fn numeric_rank(m: &CMat, rel: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let smax = max_of(sv.iter().copied());
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel * smax).count()
}

#[must_use]
pub fn numeric_rank_real(m: &RMat, rel: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let smax = max_of(sv.iter().copied());
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel * smax).count()
}

/// Real null space basis (threshold `rel * sigma_max`).
#[must_use]
pub fn null_space_real(m: &RMat, rel: f64) -> Vec<DVector<f64>> {
    let cols = m.ncols();
    if cols == 0 {
        return Vec::new();
    }
    let padded;
    let m = if m.nrows() < cols {
        padded = {
            let mut p = RMat::zeros(cols, cols);
            p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
            p
        };
        &padded
    } else {
        m
    };
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let smax = max_of(svd.singular_values.iter().copied());
    let thresh = if smax > 0.0 { rel * smax } else { rel };
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= thresh)
        .map(|(i, _)| vt.row(i).transpose())
        .collect()
}

#[must_use]
pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

/// Max-norm of a complex matrix.
#[must_use]
pub fn max_abs(m: &CMat) -> f64 {
    max_of(m.iter().map(|c| c.norm()))
}

#[must_use]
pub fn max_abs_real(m: &RMat) -> f64 {
    max_of(m.iter().map(|c| c.abs()))
}
