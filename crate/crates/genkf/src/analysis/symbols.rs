//! Symbol sequence of the deformation complex at one cotangent vector.
//!
//! Stages, with E = C^r and Lbar the +i eigenspace of J1:
//! B0 = u(r), B1 = u(r) (x) R^{4n}, B2 = Herm(r) + End (x) wedge^2 Lbar,
//! Bi = End (x) wedge^i Lbar for 3 <= i <= 2n.
//! Every stage is embedded in a real ambient space; maps are evaluated on a
//! basis of the stage and their ranks read off by SVD.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::fields::mat;
use crate::multivector::{self, GenVector, GradedForm};
use crate::numerics::{max_abs_real, numeric_rank_real, null_space_real, CMat, RMat};
use crate::structures::{gcs_from_spinor, pairing_matrix, GKPair};

const RANK_REL: f64 = 1e-8;
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Clone, Debug, Serialize)]
pub struct SymbolReport {
    pub theta: Vec<f64>,
    /// Real dimensions of B0..B^{2n}.
    pub dims: Vec<usize>,
    /// Numeric ranks of the maps B^i -> B^{i+1}.
    pub ranks: Vec<usize>,
    /// Exactness at each stage.
    pub exact: Vec<bool>,
    pub alternating_sum: i64,
    /// Largest entry of any composite of consecutive maps.
    pub composition: f64,
    /// Dimension of the kernel at B1 and its distance from {f theta}.
    pub kernel_dim: usize,
    pub kernel_residual: f64,
    /// <theta^{1,0}_+, theta^{0,1}_+> as (re, im); must be nonzero.
    pub gk_pairing: [f64; 2],
}

impl SymbolReport {
    #[must_use]
    pub fn all_exact(&self) -> bool {
        self.exact.iter().all(|&e| e)
    }
}

/// Element of any stage. B1 uses `frame` (one matrix per frame vector);
/// the others use `herm` (only B2) and `forms` (one form per matrix entry).
#[derive(Clone)]
enum Elem {
    U(Vec<C64>),
    Frame(Vec<Vec<C64>>),
    Upper { herm: Option<Vec<C64>>, forms: Vec<GradedForm> },
}

fn u_basis(r: usize) -> Vec<Vec<C64>> {
    let mut out = Vec::with_capacity(r * r);
    for i in 0..r {
        let mut m = vec![ZERO; r * r];
        m[i * r + i] = C64::new(0.0, 1.0);
        out.push(m);
        for j in i + 1..r {
            let mut a = vec![ZERO; r * r];
            a[i * r + j] = C64::new(1.0, 0.0);
            a[j * r + i] = C64::new(-1.0, 0.0);
            out.push(a);
            let mut b = vec![ZERO; r * r];
            b[i * r + j] = C64::new(0.0, 1.0);
            b[j * r + i] = C64::new(0.0, 1.0);
            out.push(b);
        }
    }
    out
}

fn end_basis(r: usize) -> Vec<Vec<C64>> {
    let mut out = Vec::with_capacity(2 * r * r);
    for k in 0..r * r {
        for c in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
            let mut m = vec![ZERO; r * r];
            m[k] = c;
            out.push(m);
        }
    }
    out
}

fn binom(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn masks_of_degree(h: usize, k: usize) -> Vec<usize> {
    (0..1usize << h).filter(|m| m.count_ones() as usize == k).collect()
}

struct Symbols {
    n: usize,
    r: usize,
    theta: Vec<f64>,
    theta01: GradedForm,
    /// Lbar coordinates of the (0,1) part of each frame vector.
    frame01: Vec<GradedForm>,
    /// <theta . e_k . psi, conj psi>_s / <psi, conj psi>_s
    line: Vec<C64>,
}

impl Symbols {
    fn stage_count(&self) -> usize {
        2 * self.n + 1
    }

    fn dims(&self) -> Vec<usize> {
        let (n, r) = (self.n, self.r);
        (0..self.stage_count())
            .map(|i| match i {
                0 => r * r,
                1 => 4 * n * r * r,
                2 => r * r + 2 * r * r * binom(2 * n, 2),
                _ => 2 * r * r * binom(2 * n, i),
            })
            .collect()
    }

    fn basis(&self, stage: usize) -> Vec<Elem> {
        let (n, r) = (self.n, self.r);
        let h = 2 * n;
        match stage {
            0 => u_basis(r).into_iter().map(Elem::U).collect(),
            1 => {
                let mut out = Vec::new();
                for k in 0..4 * n {
                    for x in u_basis(r) {
                        let mut frame = vec![vec![ZERO; r * r]; 4 * n];
                        frame[k] = x;
                        out.push(Elem::Frame(frame));
                    }
                }
                out
            }
            _ => {
                let mut out = Vec::new();
                if stage == 2 {
                    for x in u_basis(r) {
                        let herm = x.iter().map(|c| c * C64::new(0.0, 1.0)).collect();
                        out.push(Elem::Upper { herm: Some(herm), forms: self.zero_forms() });
                    }
                }
                for mask in masks_of_degree(h, stage) {
                    for e in end_basis(r) {
                        let forms = e
                            .iter()
                            .map(|&c| GradedForm::basis(n, mask, c).expect("mask in range"))
                            .collect();
                        let herm = (stage == 2).then(|| vec![ZERO; r * r]);
                        out.push(Elem::Upper { herm, forms });
                    }
                }
                out
            }
        }
    }

    fn zero_forms(&self) -> Vec<GradedForm> {
        vec![GradedForm::zero(self.n).expect("valid n"); self.r * self.r]
    }

    /// The symbol map out of `stage` applied to one element.
    fn apply(&self, stage: usize, x: &Elem) -> Elem {
        let r = self.r;
        match (stage, x) {
            (0, Elem::U(xi)) => Elem::Frame(self.theta.iter().map(|&t| xi.iter().map(|c| c * t).collect()).collect()),
            (1, Elem::Frame(a)) => {
                let mut sum = vec![ZERO; r * r];
                for (ak, &c) in a.iter().zip(&self.line) {
                    for (s, &x) in sum.iter_mut().zip(ak) {
                        *s += c * x;
                    }
                }
                let herm = mat::herm_part(r, &sum);
                let forms = (0..r * r)
                    .map(|ij| {
                        let mut e01 = GradedForm::zero(self.n).expect("valid n");
                        for (ak, f) in a.iter().zip(&self.frame01) {
                            e01.axpy(ak[ij], f).expect("same dimension");
                        }
                        multivector::wedge(&self.theta01, &e01).expect("same dimension")
                    })
                    .collect();
                Elem::Upper { herm: Some(herm), forms }
            }
            (_, Elem::Upper { forms, .. }) => Elem::Upper {
                herm: None,
                forms: forms.iter().map(|f| multivector::wedge(&self.theta01, f).expect("same dimension")).collect(),
            },
            _ => unreachable!("stage and element kind always agree"),
        }
    }

    /// Real ambient coordinates of an element of `stage`.
    fn coords(&self, stage: usize, x: &Elem) -> Vec<f64> {
        let push = |out: &mut Vec<f64>, m: &[C64]| {
            for c in m {
                out.push(c.re);
                out.push(c.im);
            }
        };
        let mut out = Vec::new();
        match x {
            Elem::U(m) => push(&mut out, m),
            Elem::Frame(a) => a.iter().for_each(|m| push(&mut out, m)),
            Elem::Upper { herm, forms } => {
                if stage == 2 {
                    push(&mut out, herm.as_deref().unwrap_or(&vec![ZERO; self.r * self.r]));
                }
                for mask in masks_of_degree(2 * self.n, stage) {
                    for f in forms {
                        let c = f.coeff(mask);
                        out.push(c.re);
                        out.push(c.im);
                    }
                }
            }
        }
        out
    }

    fn matrix(&self, stage: usize, cols: &[Elem]) -> RMat {
        let vecs: Vec<Vec<f64>> = cols.iter().map(|x| self.coords(stage, x)).collect();
        let rows = vecs.first().map_or(0, Vec::len);
        RMat::from_fn(rows, vecs.len(), |i, j| vecs[j][i])
    }
}

/// Lbar coordinates of a complex 4n-vector after projecting onto Lbar.
fn lbar_coords(pinv: &CMat, pbar: &CMat, v: &DVector<C64>) -> DVector<C64> {
    pinv * (pbar * v)
}

/// Check the symbol sequence at the covector `theta` for the pair (J1, J2)
/// with `psi` a pure spinor of J2.
pub fn symbol_exactness(gk: &GKPair, psi: &GradedForm, r: usize, theta: &GenVector) -> Result<SymbolReport> {
    let n = gk.j1.dim_n();
    if psi.dim_n() != n || theta.dim_n() != n {
        return Err(Error::DimensionMismatch { left: n, right: psi.dim_n().max(theta.dim_n()) });
    }
    if r == 0 {
        return Err(Error::Input("rank must be positive".into()));
    }
    if !theta.is_real() || theta.vec().iter().any(|c| c.norm() != 0.0) {
        return Err(Error::Input("symbol direction must be a real cotangent vector".into()));
    }
    if theta.norm() == 0.0 {
        return Err(Error::ZeroCovector);
    }
    let j2 = gcs_from_spinor(psi)?;
    let mismatch = max_abs_real(&(j2.mat() - gk.j2.mat()));
    if mismatch > 1e-8 {
        return Err(Error::BadMatrix(format!("psi does not generate J2 ({mismatch:.3e})")));
    }
    let d = 4 * n;
    let h = 2 * n;
    let pbar = gk.j1.conj_projector();
    let lbar_cols: Vec<DVector<C64>> = gk.j1.minus_i_space().iter().map(|v| v.conjugate()).collect();
    if lbar_cols.len() != h {
        return Err(Error::BadMatrix(format!("+i eigenspace has dimension {}", lbar_cols.len())));
    }
    let lbar = CMat::from_columns(&lbar_cols);
    let pinv = lbar
        .clone()
        .pseudo_inverse(1e-12)
        .map_err(|e| Error::BadMatrix(e.to_string()))?;
    let theta_vec: Vec<f64> = theta.to_vec().iter().map(|c| c.re).collect();
    let theta_c = DVector::from_iterator(d, theta_vec.iter().map(|&x| C64::new(x, 0.0)));
    let as_form = |v: DVector<C64>| {
        let mut f = GradedForm::zero(n).expect("valid n");
        for (j, c) in v.iter().enumerate() {
            f.axpy(*c, &GradedForm::basis(n, 1 << j, C64::new(1.0, 0.0)).expect("axis")).expect("same");
        }
        f
    };
    let theta01 = as_form(lbar_coords(&pinv, &pbar, &theta_c));
    let frame01 = (0..d)
        .map(|k| {
            let mut e = DVector::<C64>::zeros(d);
            e[k] = C64::new(1.0, 0.0);
            as_form(lbar_coords(&pinv, &pbar, &e))
        })
        .collect();
    let den = multivector::mukai_pair(psi, &psi.conj())?;
    let line = (0..d)
        .map(|k| {
            let e = GenVector::frame(n, k)?;
            let t = multivector::clifford_act(theta, &multivector::clifford_act(&e, psi)?)?;
            Ok(multivector::mukai_pair(&t, &psi.conj())? / den)
        })
        .collect::<Result<Vec<_>>>()?;
    let sym = Symbols { n, r, theta: theta_vec.clone(), theta01, frame01, line };

    let dims = sym.dims();
    let stages = sym.stage_count();
    let bases: Vec<Vec<Elem>> = (0..stages).map(|s| sym.basis(s)).collect();
    for (s, b) in bases.iter().enumerate() {
        debug_assert_eq!(b.len(), dims[s]);
    }
    let images: Vec<Vec<Elem>> =
        (0..stages - 1).map(|s| bases[s].iter().map(|x| sym.apply(s, x)).collect()).collect();
    let maps: Vec<RMat> = (0..stages - 1).map(|s| sym.matrix(s + 1, &images[s])).collect();
    let ranks: Vec<usize> = maps.iter().map(|m| numeric_rank_real(m, RANK_REL)).collect();
    let exact: Vec<bool> = (0..stages)
        .map(|s| {
            let incoming = if s == 0 { 0 } else { ranks[s - 1] };
            let outgoing = if s + 1 == stages { 0 } else { ranks[s] };
            incoming + outgoing == dims[s]
        })
        .collect();
    let mut composition = 0.0f64;
    for s in 0..stages.saturating_sub(2) {
        let twice: Vec<Elem> = images[s].iter().map(|x| sym.apply(s + 1, x)).collect();
        composition = composition.max(max_abs_real(&sym.matrix(s + 2, &twice)));
    }
    let alternating_sum = dims
        .iter()
        .enumerate()
        .map(|(i, &dm)| if i % 2 == 0 { dm as i64 } else { -(dm as i64) })
        .sum();

    // Kernel at B1 in basis coordinates, compared with {f theta}: the image
    // of u(r) has basis coordinates theta_k on block k.
    let kernel = null_space_real(&maps[1], RANK_REL);
    let rr = r * r;
    let span = RMat::from_fn(d * rr, rr, |row, col| if row % rr == col { theta_vec[row / rr] } else { 0.0 });
    let q = span.qr().q();
    let kernel_residual = kernel
        .iter()
        .map(|v| {
            let proj = &q * (q.transpose() * v);
            (v - proj).amax()
        })
        .fold(0.0, f64::max);

    let gk_pairing = gk_compatibility(gk, &theta_c);
    Ok(SymbolReport {
        theta: theta_vec,
        dims,
        ranks,
        exact,
        alternating_sum,
        composition,
        kernel_dim: kernel.len(),
        kernel_residual,
        gk_pairing: [gk_pairing.re, gk_pairing.im],
    })
}

/// <theta^{1,0}_+, theta^{0,1}_+> for the splitting by L, conj L and C+-.
#[must_use]
pub fn gk_compatibility(gk: &GKPair, theta: &DVector<C64>) -> C64 {
    let d = theta.len();
    let id = CMat::identity(d, d);
    let ghat = gk.ghat.map(|x| C64::new(x, 0.0));
    let plus = (&id + &ghat) * C64::new(0.5, 0.0);
    let pbar = gk.j1.conj_projector();
    let p = &id - &pbar;
    let t10 = &p * (&plus * theta);
    let t01 = &pbar * (&plus * theta);
    let q = pairing_matrix(gk.j1.dim_n()).map(|x| C64::new(x, 0.0));
    (t10.transpose() * q * t01)[(0, 0)]
}

/// Aggregate over random covectors.
#[derive(Clone, Debug, Serialize)]
pub struct SymbolSummary {
    pub n: usize,
    pub rank: usize,
    pub trials: usize,
    pub dims: Vec<usize>,
    pub alternating_sum: i64,
    pub inexact_trials: usize,
    pub max_composition: f64,
    pub max_kernel_residual: f64,
    pub kernel_dims_ok: bool,
    pub min_gk_pairing: f64,
}

impl SymbolSummary {
    #[must_use]
    pub fn passed(&self) -> bool {
        self.inexact_trials == 0 && self.alternating_sum == 0 && self.kernel_dims_ok && self.min_gk_pairing > 0.0
    }
}

/// Random real covectors with entries uniform in [-1, 1].
pub fn random_covectors(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<GenVector> {
    (0..count)
        .map(|_| {
            let mut comps = vec![0.0; 4 * n];
            for c in comps.iter_mut().skip(2 * n) {
                *c = rng.gen_range(-1.0..1.0);
            }
            GenVector::from_real(n, &comps).expect("length 4n")
        })
        .collect()
}

/// Run [`symbol_exactness`] for each covector in parallel; results are
/// reduced in input order.
pub fn symbol_trials(gk: &GKPair, psi: &GradedForm, r: usize, thetas: &[GenVector]) -> Result<(SymbolSummary, Vec<SymbolReport>)> {
    let reports = thetas.par_iter().map(|t| symbol_exactness(gk, psi, r, t)).collect::<Result<Vec<_>>>()?;
    let n = gk.j1.dim_n();
    let first = reports.first().ok_or_else(|| Error::Input("need at least one trial".into()))?;
    let summary = SymbolSummary {
        n,
        rank: r,
        trials: reports.len(),
        dims: first.dims.clone(),
        alternating_sum: first.alternating_sum,
        inexact_trials: reports.iter().filter(|x| !x.all_exact()).count(),
        max_composition: reports.iter().map(|x| x.composition).fold(0.0, f64::max),
        max_kernel_residual: reports.iter().map(|x| x.kernel_residual).fold(0.0, f64::max),
        kernel_dims_ok: reports.iter().all(|x| x.kernel_dim == r * r),
        min_gk_pairing: reports.iter().map(|x| x.gk_pairing[0].hypot(x.gk_pairing[1])).fold(f64::INFINITY, f64::min),
    };
    Ok((summary, reports))
}
