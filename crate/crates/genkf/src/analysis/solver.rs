//! Einstein-Hermitian solve for line bundles.
//!
//! For r = 1 the residual K(A, V) - lambda is affine in the unknowns
//! A_mu = i alpha_mu, V^mu = i v^mu, and with a constant spinor it commutes
//! with grid translations. The linear part is assembled as a periodic
//! stencil from one delta probe per unknown type; its transpose gives the
//! adjoint gradient, and conjugate directions (CGLS) minimize the residual.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::connection::{eh_residual, lambda_from_chern, mean_curvature_k};
use crate::field::{EndField, GenConnection, SpinorField, TorusGrid};
use crate::numerics::pairwise_sum;

/// Smallest accepted step multiplier.
pub const MIN_STEP: f64 = 1e-12;
/// Iterations before the monotonicity guard is enforced.
const GUARD_AFTER: usize = 10;
const SLACK: f64 = 1e-14;

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub max_iter: usize,
    pub tol: f64,
    /// Initial multiplier applied to the line-search step.
    pub step: f64,
    /// Einstein constant; `None` takes it from the Chern pairing.
    pub lambda: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { max_iter: 10_000, tol: 1e-8, step: 1.0, lambda: None }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowTrace {
    pub iterations: usize,
    /// Weighted L^2 residual before each iteration and after the last.
    pub residual_history: Vec<f64>,
    /// Step multiplier in force at the end (1 unless halving occurred).
    pub step_size: f64,
    pub converged: bool,
    pub lambda: f64,
    /// Residual of the returned connection, recomputed from scratch.
    pub final_residual: f64,
}

/// The linear part of the residual as a periodic stencil per unknown type.
struct Stencil {
    grid: TorusGrid,
    /// taps[u] = [(shift table p -> p - offset, weight)]
    taps: Vec<Vec<(Vec<usize>, f64)>>,
}

impl Stencil {
    fn types(&self) -> usize {
        self.taps.len()
    }

    fn apply(&self, x: &[Vec<f64>]) -> Vec<f64> {
        (0..self.grid.npts())
            .into_par_iter()
            .map(|p| {
                let mut acc = 0.0;
                for (xu, taps) in x.iter().zip(&self.taps) {
                    for (shift, w) in taps {
                        acc += w * xu[shift[p]];
                    }
                }
                acc
            })
            .collect()
    }

    fn adjoint(&self, y: &[f64]) -> Vec<Vec<f64>> {
        let npts = self.grid.npts();
        self.taps
            .iter()
            .map(|taps| {
                let mut out = vec![0.0; npts];
                for (shift, w) in taps {
                    for (p, &s) in shift.iter().enumerate() {
                        out[s] += w * y[p];
                    }
                }
                out
            })
            .collect()
    }
}

/// Index of p - offset with periodic wrap, for every p.
fn shift_table(grid: &TorusGrid, offset: &[usize]) -> Vec<usize> {
    (0..grid.npts())
        .map(|p| {
            let idx = grid.multi_index(p);
            let mut q = 0;
            for (axis, (&i, &o)) in idx.iter().zip(offset).enumerate() {
                let s = grid.sizes()[axis];
                q = q * s + (i + s - o) % s;
            }
            q
        })
        .collect()
}

fn shifted(base: &GenConnection, x: &[Vec<f64>]) -> Result<GenConnection> {
    let g = base.grid();
    let dim = g.dim();
    let field = |u: usize| EndField::scalar(g, 1, |p| C64::new(0.0, x[u][p]));
    let da: Vec<EndField> = (0..dim).map(field).collect();
    let dv: Vec<EndField> = (dim..2 * dim).map(field).collect();
    base.shifted(&da, &dv, 1.0)
}

fn residual(conn: &GenConnection, psi: &SpinorField, lambda: f64) -> Result<Vec<f64>> {
    let k = mean_curvature_k(conn, psi)?;
    Ok(k.values().iter().map(|z| z.re - lambda).collect())
}

fn assemble(base: &GenConnection, psi: &SpinorField, r0: &[f64], lambda: f64) -> Result<Stencil> {
    let g = base.grid();
    let npts = g.npts();
    let types = 2 * g.dim();
    let mut taps = Vec::with_capacity(types);
    for u in 0..types {
        let mut x = vec![vec![0.0; npts]; types];
        x[u][0] = 1.0;
        let r = residual(&shifted(base, &x)?, psi, lambda)?;
        let mut tu = Vec::new();
        for (p, (a, b)) in r.iter().zip(r0).enumerate() {
            let w = a - b;
            if w.abs() > 1e-13 * (1.0 + a.abs()) {
                tu.push((shift_table(g, &g.multi_index(p)), w));
            }
        }
        taps.push(tu);
    }
    Ok(Stencil { grid: g.clone(), taps })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    pairwise_sum(&a.iter().zip(b).map(|(x, y)| x * y).collect::<Vec<_>>())
}

fn dot_blocks(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| dot(x, y)).sum()
}

/// Drive K(A, V) to lambda for a line bundle. Returns the final connection
/// and its trace whether or not the tolerance was reached.
pub fn solve_eh_line(init: &GenConnection, psi: &SpinorField, opts: &SolveOptions) -> Result<(GenConnection, FlowTrace)> {
    if init.rank() != 1 {
        return Err(Error::NonAbelian(init.rank()));
    }
    let positive = |x: f64| x > 0.0 && !x.is_nan();
    if opts.max_iter == 0 || !positive(opts.tol) || !positive(opts.step) {
        return Err(Error::Input("max_iter, tol and step must be positive".into()));
    }
    let g = init.grid();
    let npts = g.npts();
    let vol = psi.vol(0);
    if psi.vols().iter().any(|&v| (v - vol).abs() > 1e-12 * vol.abs()) {
        return Err(Error::Input("the line-bundle solver needs a constant spinor".into()));
    }
    let weight = (vol * g.cell_volume()).sqrt();
    let lambda = match opts.lambda {
        Some(l) => l,
        None => lambda_from_chern(init, psi)?,
    };
    let r0 = residual(init, psi, lambda)?;
    let m = assemble(init, psi, &r0, lambda)?;

    // The stencil must reproduce the pipeline on a generic increment.
    let probe: Vec<Vec<f64>> = (0..m.types())
        .map(|u| (0..npts).map(|p| ((p * 7 + u * 13) % 17) as f64 / 17.0 - 0.5).collect())
        .collect();
    let direct = residual(&shifted(init, &probe)?, psi, lambda)?;
    let predicted = m.apply(&probe);
    let gap = direct.iter().zip(&r0).zip(&predicted).map(|((d, a), p)| (d - a - p).abs()).fold(0.0, f64::max);
    if gap > 1e-9 {
        return Err(Error::Input(format!("residual is not affine and translation invariant (gap {gap:.3e})")));
    }

    let norm = |r: &[f64]| dot(r, r).sqrt() * weight;
    let mut x = vec![vec![0.0; npts]; m.types()];
    let mut r: Vec<f64> = r0.iter().map(|v| -v).collect();
    let mut history = vec![norm(&r)];
    let mut s = m.adjoint(&r);
    let mut dir = s.clone();
    let mut gamma = dot_blocks(&s, &s);
    let mut step = opts.step;
    let mut iterations = 0;
    while *history.last().expect("nonempty") >= opts.tol && iterations < opts.max_iter {
        if gamma == 0.0 {
            break;
        }
        let q = m.apply(&dir);
        let qq = dot(&q, &q);
        if qq == 0.0 {
            break;
        }
        let alpha = gamma / qq;
        let before = *history.last().expect("nonempty");
        let mut halved = false;
        let (new_r, new_norm) = loop {
            let t = alpha * step;
            let cand: Vec<f64> = r.iter().zip(&q).map(|(a, b)| a - t * b).collect();
            let nn = norm(&cand);
            if iterations < GUARD_AFTER || nn <= before * (1.0 + SLACK) + SLACK {
                break (cand, nn);
            }
            step *= 0.5;
            halved = true;
            if step < MIN_STEP {
                return Err(Error::StepCollapse(MIN_STEP));
            }
        };
        let t = alpha * step;
        for (xu, du) in x.iter_mut().zip(&dir) {
            for (a, b) in xu.iter_mut().zip(du) {
                *a += t * b;
            }
        }
        r = new_r;
        history.push(new_norm);
        iterations += 1;
        s = m.adjoint(&r);
        let gamma_new = dot_blocks(&s, &s);
        if halved {
            // Conjugacy is lost after a shortened step: restart from the gradient.
            dir = s.clone();
        } else {
            let beta = gamma_new / gamma;
            for (du, su) in dir.iter_mut().zip(&s) {
                for (d, v) in du.iter_mut().zip(su) {
                    *d = v + beta * *d;
                }
            }
        }
        gamma = gamma_new;
    }
    let out = shifted(init, &x)?;
    let (_, final_residual) = eh_residual(&out, psi, lambda)?;
    let converged = final_residual < opts.tol;
    Ok((
        out,
        FlowTrace { iterations, residual_history: history, step_size: step, converged, lambda, final_residual },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::structures::standard_omega;

    fn perturbed(g: &TorusGrid, seed: u64, amp_v: f64) -> GenConnection {
        fixtures::connection(&mut fixtures::rng(seed), g, 1, 0.3, amp_v).unwrap()
    }

    #[test]
    fn already_einstein_hermitian_takes_no_steps() {
        let g = TorusGrid::uniform(1, 16, 1.0).unwrap();
        let psi = SpinorField::constant(&g, &[0.0; 4], &standard_omega(1)).unwrap();
        let (_, trace) = solve_eh_line(&GenConnection::flat(&g, 1), &psi, &SolveOptions::default()).unwrap();
        assert_eq!(trace.iterations, 0);
        assert!(trace.converged);
    }

    #[test]
    fn perturbed_flat_converges_and_is_fixed_point() {
        let g = TorusGrid::uniform(1, 16, 1.0).unwrap();
        let psi = SpinorField::constant(&g, &[0.0; 4], &standard_omega(1)).unwrap();
        let (out, trace) = solve_eh_line(&perturbed(&g, 5, 0.0), &psi, &SolveOptions::default()).unwrap();
        assert!(trace.converged, "{trace:?}");
        assert!(trace.final_residual < 1e-8);
        for w in trace.residual_history.windows(2).skip(GUARD_AFTER) {
            assert!(w[1] <= w[0] * (1.0 + SLACK) + SLACK);
        }
        let (_, again) = solve_eh_line(&out, &psi, &SolveOptions::default()).unwrap();
        assert_eq!(again.iterations, 0);
    }

    #[test]
    fn b_field_with_vector_part_converges() {
        let g = TorusGrid::uniform(1, 16, 1.0).unwrap();
        let w = standard_omega(1);
        let b: Vec<f64> = w.iter().map(|x| 0.4 * x).collect();
        let psi = SpinorField::constant(&g, &b, &w).unwrap();
        let (_, trace) = solve_eh_line(&perturbed(&g, 6, 0.3), &psi, &SolveOptions::default()).unwrap();
        assert!(trace.converged, "{trace:?}");
    }

    #[test]
    fn flux_background_uses_chern_lambda() {
        let g = TorusGrid::uniform(1, 16, 1.0).unwrap();
        let psi = SpinorField::constant(&g, &[0.0; 4], &standard_omega(1)).unwrap();
        let tau = std::f64::consts::TAU;
        let init = perturbed(&g, 7, 0.0).with_background(vec![0.0, tau, -tau, 0.0]).unwrap();
        let (_, trace) = solve_eh_line(&init, &psi, &SolveOptions::default()).unwrap();
        assert!(trace.converged, "{trace:?}");
        assert!(trace.lambda.abs() > 1.0);
    }

    #[test]
    fn budget_and_rank_guards() {
        let g = TorusGrid::uniform(1, 16, 1.0).unwrap();
        let psi = SpinorField::constant(&g, &[0.0; 4], &standard_omega(1)).unwrap();
        let opts = SolveOptions { max_iter: 1, ..SolveOptions::default() };
        let (_, trace) = solve_eh_line(&perturbed(&g, 5, 0.0), &psi, &opts).unwrap();
        assert!(!trace.converged);
        assert_eq!(trace.iterations, 1);
        let err = solve_eh_line(&GenConnection::flat(&g, 2), &psi, &opts).unwrap_err();
        assert_eq!(err, Error::NonAbelian(2));
    }
}
