//! Pointwise generalized complex and generalized Kahler structures.
//!
//! Matrices act on real coordinates ordered (vector part, covector part).
//! The annihilator L of a pure spinor is the -i eigenspace of its structure.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::multivector::{self, GenVector, GradedForm};
use crate::numerics::{self, max_abs_real, null_space, numeric_rank, to_complex, CMat, RMat};

const KERNEL_REL: f64 = 1e-10;
const MATRIX_TOL: f64 = 1e-10;
const TYPE_TOL: f64 = 1e-12;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Matrix of e -> e.alpha from C^{4n} to forms (columns = frame elements).
#[must_use]
pub fn action_matrix(alpha: &GradedForm) -> CMat {
    let n = alpha.dim_n();
    let len = alpha.len();
    let mut m = CMat::zeros(len, 4 * n);
    let mut col = vec![C64::new(0.0, 0.0); len];
    for k in 0..4 * n {
        col.iter_mut().for_each(|c| *c = C64::new(0.0, 0.0));
        multivector::frame_act_into(&mut col, n, k, C64::new(1.0, 0.0), alpha.coeffs());
        for (r, &c) in col.iter().enumerate() {
            m[(r, k)] = c;
        }
    }
    m
}

fn to_genvector(n: usize, v: &DVector<C64>) -> GenVector {
    GenVector::from_slice(n, v.as_slice()).expect("length 4n by construction")
}

/// Euclidean-orthonormal basis of ker(e -> e.phi).
pub fn spinor_kernel(phi: &GradedForm) -> Result<Vec<GenVector>> {
    if phi.max_abs() == 0.0 {
        return Err(Error::ZeroForm);
    }
    let n = phi.dim_n();
    Ok(null_space(&action_matrix(phi), KERNEL_REL).iter().map(|v| to_genvector(n, v)).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct PureSpinorCheck {
    pub kernel_dim: usize,
    pub pure: bool,
    pub nondegenerate: bool,
    pub type_number: u32,
}

pub fn classify_spinor(phi: &GradedForm) -> Result<PureSpinorCheck> {
    let n = phi.dim_n();
    let kernel = spinor_kernel(phi)?;
    let dim = kernel.len();
    let mut iso = 0.0f64;
    for a in &kernel {
        for b in &kernel {
            iso = iso.max(multivector::pairing(a, b)?.norm());
        }
    }
    let pure = dim == 2 * n && iso < MATRIX_TOL;
    let mut both = CMat::zeros(4 * n, 2 * dim);
    for (j, k) in kernel.iter().enumerate() {
        let v = k.to_vec();
        for i in 0..4 * n {
            both[(i, j)] = v[i];
            both[(i, dim + j)] = v[i].conj();
        }
    }
    let nondegenerate = numeric_rank(&both, KERNEL_REL) == 4 * n;
    let type_number = phi.lowest_degree(TYPE_TOL).unwrap_or(0);
    Ok(PureSpinorCheck { kernel_dim: dim, pure, nondegenerate, type_number })
}

/// Pairing matrix Q with <e, f> = e^T Q f.
#[must_use]
pub fn pairing_matrix(n: usize) -> RMat {
    let d = 4 * n;
    RMat::from_row_slice(d, d, &multivector::pairing_matrix(n))
}

/// A real 4n x 4n generalized (almost) complex structure.
#[derive(Clone, Debug, PartialEq)]
pub struct GCStructure {
    n: usize,
    mat: RMat,
}

impl GCStructure {
    /// Validates J^2 = -I and orthogonality for the neutral pairing.
    pub fn new(n: usize, mat: RMat) -> Result<Self> {
        if mat.nrows() != 4 * n || mat.ncols() != 4 * n {
            return Err(Error::BadLength { got: mat.nrows() * mat.ncols(), expected: 16 * n * n });
        }
        let sq = &mat * &mat + RMat::identity(4 * n, 4 * n);
        let e_sq = max_abs_real(&sq);
        if e_sq > MATRIX_TOL {
            return Err(Error::BadMatrix(format!("J^2 + I has size {e_sq:.3e}")));
        }
        let q = pairing_matrix(n);
        let e_orth = max_abs_real(&(mat.transpose() * &q * &mat - &q));
        if e_orth > MATRIX_TOL {
            return Err(Error::BadMatrix(format!("J does not preserve the pairing ({e_orth:.3e})")));
        }
        Ok(Self { n, mat })
    }

    #[must_use]
    pub fn dim_n(&self) -> usize {
        self.n
    }

    #[must_use]
    pub fn mat(&self) -> &RMat {
        &self.mat
    }

    /// Defects (|J^2 + I|, |J^T Q J - Q|).
    #[must_use]
    pub fn defects(&self) -> (f64, f64) {
        let d = 4 * self.n;
        let q = pairing_matrix(self.n);
        (
            max_abs_real(&(&self.mat * &self.mat + RMat::identity(d, d))),
            max_abs_real(&(self.mat.transpose() * &q * &self.mat - &q)),
        )
    }

    /// Basis of L, the -i eigenspace, as complex 4n-vectors.
    #[must_use]
    pub fn minus_i_space(&self) -> Vec<DVector<C64>> {
        let d = 4 * self.n;
        let m = to_complex(&self.mat) + CMat::identity(d, d) * I;
        null_space(&m, KERNEL_REL)
    }

    /// Projector onto the +i eigenspace (the conjugate of L).
    #[must_use]
    pub fn conj_projector(&self) -> CMat {
        let d = 4 * self.n;
        (CMat::identity(d, d) - to_complex(&self.mat) * I) * C64::new(0.5, 0.0)
    }

    /// Conjugation by the b-transform: B J B^{-1} with B = [[I,0],[b,I]].
    pub fn b_conjugate(&self, b: &[f64]) -> Result<Self> {
        let h = 2 * self.n;
        if b.len() != h * h {
            return Err(Error::BadLength { got: b.len(), expected: h * h });
        }
        let bm = RMat::from_row_slice(h, h, b);
        let mut fwd = RMat::identity(2 * h, 2 * h);
        let mut inv = RMat::identity(2 * h, 2 * h);
        fwd.view_mut((h, 0), (h, h)).copy_from(&bm);
        inv.view_mut((h, 0), (h, h)).copy_from(&(-bm));
        Self::new(self.n, fwd * &self.mat * inv)
    }

    /// Matrix of the spin-representation operator of J on forms.
    pub fn spin_operator(&self) -> Result<CMat> {
        let n = self.n;
        let l = self.minus_i_space();
        if l.len() != 2 * n {
            return Err(Error::BadMatrix(format!("-i eigenspace has dimension {}", l.len())));
        }
        let q = to_complex(&pairing_matrix(n));
        let m = 2 * n;
        let mut g = CMat::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                g[(i, j)] = (l[i].transpose() * &q * l[j].conjugate())[(0, 0)];
            }
        }
        let ginv = g
            .try_inverse()
            .ok_or_else(|| Error::BadMatrix("L and its conjugate are not dual".into()))?;
        let len = 1usize << (2 * n);
        let mut s = CMat::zeros(len, len);
        let zero = C64::new(0.0, 0.0);
        let mut tmp = vec![zero; len];
        let mut out = vec![zero; len];
        for col in 0..len {
            let mut unit = vec![zero; len];
            unit[col] = C64::new(1.0, 0.0);
            let mut acc = vec![zero; len];
            for i in 0..m {
                let mut f = DVector::<C64>::zeros(4 * n);
                for k in 0..m {
                    f += l[k].conjugate() * ginv[(k, i)];
                }
                // -(i/4) (e_i f_i - f_i e_i)
                for (first, second, w) in [(f.as_slice(), l[i].as_slice(), -0.25), (l[i].as_slice(), f.as_slice(), 0.25)] {
                    tmp.iter_mut().for_each(|c| *c = zero);
                    act_raw(&mut tmp, n, first, &unit);
                    out.iter_mut().for_each(|c| *c = zero);
                    act_raw(&mut out, n, second, &tmp);
                    for (a, o) in acc.iter_mut().zip(&out) {
                        *a += o * C64::new(0.0, w);
                    }
                }
            }
            for (r, a) in acc.iter().enumerate() {
                s[(r, col)] = *a;
            }
        }
        Ok(s)
    }

    /// Projectors onto the ik eigenspaces, k = -n..=n (index k + n).
    pub fn u_projectors(&self) -> Result<Vec<CMat>> {
        let n = self.n as i64;
        let s = self.spin_operator()?;
        let len = s.nrows();
        let id = CMat::identity(len, len);
        let mut check = id.clone();
        for j in -n..=n {
            check *= &s - &id * (I * j as f64);
        }
        let defect = numerics::max_abs(&check);
        if defect > 1e-8 {
            return Err(Error::BadMatrix(format!("spin operator is not diagonalizable ({defect:.3e})")));
        }
        Ok((-n..=n)
            .map(|k| {
                let mut p = id.clone();
                for j in (-n..=n).filter(|&j| j != k) {
                    p = p * (&s - &id * (I * j as f64)) / (I * (k - j) as f64);
                }
                p
            })
            .collect())
    }
}

/// out += e.alpha for a complex 4n-vector e.
fn act_raw(out: &mut [C64], n: usize, e: &[C64], alpha: &[C64]) {
    multivector::clifford_act_into(out, &e[..2 * n], &e[2 * n..], alpha);
}

/// The structure whose -i eigenspace is ker(phi).
pub fn gcs_from_spinor(phi: &GradedForm) -> Result<GCStructure> {
    let n = phi.dim_n();
    let check = classify_spinor(phi)?;
    if !check.pure || !check.nondegenerate {
        return Err(Error::NotPureSpinor(format!(
            "kernel dim {}, pure {}, nondegenerate {}",
            check.kernel_dim, check.pure, check.nondegenerate
        )));
    }
    let kernel = null_space(&action_matrix(phi), KERNEL_REL);
    let d = 4 * n;
    let m = 2 * n;
    let mut p = CMat::zeros(d, d);
    let mut diag = CMat::zeros(d, d);
    for (j, k) in kernel.iter().enumerate() {
        p.set_column(j, k);
        p.set_column(m + j, &k.conjugate());
        diag[(j, j)] = -I;
        diag[(m + j, m + j)] = I;
    }
    let pinv = p.clone().try_inverse().ok_or_else(|| Error::NotPureSpinor("kernel basis singular".into()))?;
    let jc = &p * diag * pinv;
    let imag = numerics::max_of(jc.iter().map(|c| c.im.abs()));
    if imag > 1e-8 {
        return Err(Error::NotPureSpinor(format!("structure has imaginary part {imag:.3e}")));
    }
    GCStructure::new(n, jc.map(|c| c.re))
}

fn square(n: usize, m: &[f64]) -> Result<RMat> {
    let h = 2 * n;
    if m.len() != h * h {
        return Err(Error::BadLength { got: m.len(), expected: h * h });
    }
    Ok(RMat::from_row_slice(h, h, m))
}

/// [[J, 0], [0, -J^T]] for a complex structure J (row-major, side 2n).
pub fn gcs_complex(n: usize, j: &[f64]) -> Result<GCStructure> {
    let jm = square(n, j)?;
    let h = 2 * n;
    let e = max_abs_real(&(&jm * &jm + RMat::identity(h, h)));
    if e > MATRIX_TOL {
        return Err(Error::BadMatrix(format!("J^2 + I has size {e:.3e}")));
    }
    let mut m = RMat::zeros(2 * h, 2 * h);
    m.view_mut((0, 0), (h, h)).copy_from(&jm);
    m.view_mut((h, h), (h, h)).copy_from(&(-jm.transpose()));
    GCStructure::new(n, m)
}

/// [[0, -W^{-1}], [W, 0]] where W is the coefficient matrix of omega, i.e. the
/// map v -> omega(., v).
pub fn gcs_symplectic(n: usize, w: &[f64]) -> Result<GCStructure> {
    let wm = square(n, w)?;
    let skew = max_abs_real(&(&wm + wm.transpose()));
    if skew > MATRIX_TOL {
        return Err(Error::BadMatrix(format!("omega is not skew ({skew:.3e})")));
    }
    let winv = wm
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::BadMatrix("omega is degenerate".into()))?;
    let h = 2 * n;
    let mut m = RMat::zeros(2 * h, 2 * h);
    m.view_mut((0, h), (h, h)).copy_from(&(-winv));
    m.view_mut((h, 0), (h, h)).copy_from(&wm);
    GCStructure::new(n, m)
}

/// Component of alpha in the ik eigenspace of the spin action of J.
pub fn u_project(j: &GCStructure, k: i64, alpha: &GradedForm) -> Result<GradedForm> {
    let n = j.dim_n();
    if k.unsigned_abs() as usize > n {
        return Err(Error::BadEigenIndex { k, n });
    }
    if alpha.dim_n() != n {
        return Err(Error::DimensionMismatch { left: n, right: alpha.dim_n() });
    }
    let ps = j.u_projectors()?;
    apply(&ps[(k + n as i64) as usize], alpha)
}

pub fn apply(m: &CMat, alpha: &GradedForm) -> Result<GradedForm> {
    let v = DVector::from_column_slice(alpha.coeffs());
    let out = m * v;
    GradedForm::from_coeffs(alpha.dim_n(), out.as_slice().to_vec())
}

/// A validated commuting pair with positive generalized metric.
#[derive(Clone, Debug)]
pub struct GKPair {
    pub j1: GCStructure,
    pub j2: GCStructure,
    pub ghat: RMat,
    /// Smallest eigenvalue of the symmetric form <Ghat ., .>.
    pub min_eigenvalue: f64,
    pub c_plus: Vec<DVector<f64>>,
    pub c_minus: Vec<DVector<f64>>,
    /// Intersections L1 cap L2, L1 cap conj(L2), conj(L1) cap L2, conj(L1) cap conj(L2).
    pub l_pp: Vec<DVector<C64>>,
    pub l_pm: Vec<DVector<C64>>,
    pub l_mp: Vec<DVector<C64>>,
    pub l_mm: Vec<DVector<C64>>,
}

fn intersection(j1: &RMat, s1: C64, j2: &RMat, s2: C64) -> Vec<DVector<C64>> {
    let d = j1.nrows();
    let a = to_complex(j1) + CMat::identity(d, d) * s1;
    let b = to_complex(j2) + CMat::identity(d, d) * s2;
    let mut stacked = CMat::zeros(2 * d, d);
    stacked.view_mut((0, 0), (d, d)).copy_from(&a);
    stacked.view_mut((d, 0), (d, d)).copy_from(&b);
    null_space(&stacked, KERNEL_REL)
}

pub fn gk_validate(j1: &GCStructure, j2: &GCStructure) -> Result<GKPair> {
    if j1.n != j2.n {
        return Err(Error::DimensionMismatch { left: j1.n, right: j2.n });
    }
    let n = j1.n;
    let comm = max_abs_real(&(&j1.mat * &j2.mat - &j2.mat * &j1.mat));
    if comm > MATRIX_TOL {
        return Err(Error::NotCommuting(comm));
    }
    let ghat = -(&j1.mat * &j2.mat);
    let form = pairing_matrix(n) * &ghat;
    let asym = max_abs_real(&(&form - form.transpose()));
    if asym > MATRIX_TOL {
        return Err(Error::BadMatrix(format!("<Ghat., .> is not symmetric ({asym:.3e})")));
    }
    let sym = (&form + form.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let min_eigenvalue = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eigenvalue <= MATRIX_TOL {
        return Err(Error::NotPositive(min_eigenvalue));
    }
    let d = 4 * n;
    let c_plus = numerics::null_space_real(&(&ghat - RMat::identity(d, d)), KERNEL_REL);
    let c_minus = numerics::null_space_real(&(&ghat + RMat::identity(d, d)), KERNEL_REL);
    Ok(GKPair {
        l_pp: intersection(&j1.mat, I, &j2.mat, I),
        l_pm: intersection(&j1.mat, I, &j2.mat, -I),
        l_mp: intersection(&j1.mat, -I, &j2.mat, I),
        l_mm: intersection(&j1.mat, -I, &j2.mat, -I),
        j1: j1.clone(),
        j2: j2.clone(),
        ghat,
        min_eigenvalue,
        c_plus,
        c_minus,
    })
}

/// Standard symplectic coefficient matrix: sum_k dx^{2k} ^ dx^{2k+1}.
#[must_use]
pub fn standard_omega(n: usize) -> Vec<f64> {
    let h = 2 * n;
    let mut w = vec![0.0; h * h];
    for k in 0..n {
        w[(2 * k) * h + 2 * k + 1] = 1.0;
        w[(2 * k + 1) * h + 2 * k] = -1.0;
    }
    w
}

/// Standard complex structure: d/dx^{2k} -> d/dx^{2k+1}.
#[must_use]
pub fn standard_complex(n: usize) -> Vec<f64> {
    let h = 2 * n;
    let mut j = vec![0.0; h * h];
    for k in 0..n {
        j[(2 * k + 1) * h + 2 * k] = 1.0;
        j[(2 * k) * h + 2 * k + 1] = -1.0;
    }
    j
}

/// The complex structure compatible with [`standard_omega`] in the sense that
/// -J1 J2 is positive: d/dx^{2k} -> -d/dx^{2k+1}.
#[must_use]
pub fn kahler_complex(n: usize) -> Vec<f64> {
    standard_complex(n).iter().map(|x| -x).collect()
}

/// Standard generalized Kahler pair (complex, symplectic) on R^{2n}.
pub fn standard_gk_pair(n: usize) -> Result<GKPair> {
    let j1 = gcs_complex(n, &kahler_complex(n))?;
    let j2 = gcs_symplectic(n, &standard_omega(n))?;
    gk_validate(&j1, &j2)
}

/// e^{b + i omega} from coefficient matrices.
pub fn symplectic_spinor(n: usize, b: &[f64], w: &[f64]) -> Result<GradedForm> {
    let h = 2 * n;
    if b.len() != h * h || w.len() != h * h {
        return Err(Error::BadLength { got: b.len().min(w.len()), expected: h * h });
    }
    let c: Vec<C64> = b.iter().zip(w).map(|(&x, &y)| C64::new(x, y)).collect();
    multivector::exp_two_form(&GradedForm::two_form(n, &c)?)
}

/// dz^1 ^ ... ^ dz^n with dz^k = dx^{2k} + i dx^{2k+1}, or the conjugate
/// orientation dx^{2k} - i dx^{2k+1} when `kahler` is set.
pub fn complex_volume_form(n: usize, kahler: bool) -> Result<GradedForm> {
    let sign = if kahler { -1.0 } else { 1.0 };
    let mut out = GradedForm::one(n)?;
    for k in 0..n {
        let dz = GradedForm::one_form(n, 2 * k, C64::new(1.0, 0.0))?
            .add(&GradedForm::one_form(n, 2 * k + 1, C64::new(0.0, sign))?)?;
        out = multivector::wedge(&out, &dz)?;
    }
    Ok(out)
}

/// Random real 4n-vector frame element combination is a convenience for tests.
#[must_use]
pub fn genvector_from_real(n: usize, v: &DVector<f64>) -> GenVector {
    GenVector::from_real(n, v.as_slice()).expect("length 4n")
}

/// Convert a dense matrix column to a `GenVector`.
#[must_use]
pub fn column_genvector(n: usize, v: &DVector<C64>) -> GenVector {
    to_genvector(n, v)
}

#[must_use]
pub fn mat_from_rows(rows: usize, cols: usize, data: &[f64]) -> RMat {
    DMatrix::from_row_slice(rows, cols, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn in_span(v: &[C64], basis: &[GenVector]) -> bool {
        let d = v.len();
        let mut m = CMat::zeros(d, basis.len() + 1);
        for (j, b) in basis.iter().enumerate() {
            m.set_column(j, &DVector::from_vec(b.to_vec()));
        }
        m.set_column(basis.len(), &DVector::from_column_slice(v));
        numeric_rank(&m, 1e-9) == basis.len()
    }

    #[test]
    fn kernel_of_type_one_form() {
        let phi = complex_volume_form(1, false).unwrap();
        let k = spinor_kernel(&phi).unwrap();
        assert_eq!(k.len(), 2);
        assert!(in_span(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)], &k));
        assert!(in_span(&[c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)], &k));
        let chk = classify_spinor(&phi).unwrap();
        assert!(chk.pure && chk.nondegenerate);
        assert_eq!(chk.type_number, 1);
    }

    #[test]
    fn kernel_of_symplectic_exponential() {
        let psi = symplectic_spinor(1, &[0.0; 4], &standard_omega(1)).unwrap();
        let k = spinor_kernel(&psi).unwrap();
        assert_eq!(k.len(), 2);
        assert!(in_span(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0)], &k));
        assert!(in_span(&[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)], &k));
        assert_eq!(classify_spinor(&psi).unwrap().type_number, 0);
    }

    #[test]
    fn unit_spinor_is_degenerate() {
        let chk = classify_spinor(&GradedForm::one(1).unwrap()).unwrap();
        assert!(chk.pure);
        assert!(!chk.nondegenerate);
        assert!(gcs_from_spinor(&GradedForm::one(1).unwrap()).is_err());
        assert!(matches!(spinor_kernel(&GradedForm::zero(1).unwrap()), Err(Error::ZeroForm)));
    }

    #[test]
    fn round_trips() {
        for n in 1..=2 {
            let js = gcs_from_spinor(&symplectic_spinor(n, &vec![0.0; 4 * n * n], &standard_omega(n)).unwrap()).unwrap();
            let jw = gcs_symplectic(n, &standard_omega(n)).unwrap();
            assert!(max_abs_real(&(js.mat() - jw.mat())) < 1e-10);
            let jc = gcs_from_spinor(&complex_volume_form(n, false).unwrap()).unwrap();
            let jj = gcs_complex(n, &standard_complex(n)).unwrap();
            assert!(max_abs_real(&(jc.mat() - jj.mat())) < 1e-10);
        }
    }

    #[test]
    fn scaling_invariance() {
        let psi = symplectic_spinor(1, &[0.0; 4], &standard_omega(1)).unwrap();
        let a = gcs_from_spinor(&psi).unwrap();
        let b = gcs_from_spinor(&psi.scale(c(-2.0, 0.7))).unwrap();
        assert!(max_abs_real(&(a.mat() - b.mat())) < 1e-10);
    }

    #[test]
    fn b_transform_compatibility() {
        let n = 2;
        let bm = vec![0.0, 0.3, -0.2, 0.5, -0.3, 0.0, 0.7, 0.1, 0.2, -0.7, 0.0, -0.4, -0.5, -0.1, 0.4, 0.0];
        let psi = symplectic_spinor(n, &[0.0; 16], &standard_omega(n)).unwrap();
        let bpsi = multivector::b_transform(&GradedForm::real_two_form(n, &bm).unwrap(), &psi).unwrap();
        let direct = gcs_from_spinor(&bpsi).unwrap();
        let conj = gcs_symplectic(n, &standard_omega(n)).unwrap().b_conjugate(&bm).unwrap();
        assert!(max_abs_real(&(direct.mat() - conj.mat())) < 1e-10);
    }

    #[test]
    fn bad_matrices_rejected() {
        assert!(gcs_complex(1, &[1.0, 0.0, 0.0, 1.0]).is_err());
        assert!(gcs_symplectic(1, &[0.0, 1.0, 1.0, 0.0]).is_err());
        assert!(gcs_symplectic(1, &[0.0; 4]).is_err());
    }

    #[test]
    fn u_projection_of_psi() {
        let n = 2;
        let psi = symplectic_spinor(n, &[0.0; 16], &standard_omega(n)).unwrap();
        let j = gcs_symplectic(n, &standard_omega(n)).unwrap();
        let p = u_project(&j, -(n as i64), &psi).unwrap();
        assert!(p.dist(&psi).unwrap() < 1e-10);
        assert!(u_project(&j, 3, &psi).is_err());
        let ps = j.u_projectors().unwrap();
        let rank = numeric_rank(&ps[0], 1e-8);
        assert_eq!(rank, 1);
    }

    #[test]
    fn standard_pair_is_generalized_kahler() {
        for n in 1..=2 {
            let gk = standard_gk_pair(n).unwrap();
            assert!(gk.min_eigenvalue > 0.1);
            assert_eq!(gk.c_plus.len(), 2 * n);
            assert_eq!(gk.c_minus.len(), 2 * n);
            let total = gk.l_pp.len() + gk.l_pm.len() + gk.l_mp.len() + gk.l_mm.len();
            assert_eq!(total, 4 * n);
        }
    }

    #[test]
    fn opposite_orientation_is_indefinite() {
        let j1 = gcs_complex(1, &standard_complex(1)).unwrap();
        let j2 = gcs_symplectic(1, &standard_omega(1)).unwrap();
        assert!(matches!(gk_validate(&j1, &j2), Err(Error::NotPositive(_))));
    }

    #[test]
    fn identical_pair_has_indefinite_metric() {
        // Ghat = I, so <Ghat e, e> is the neutral pairing itself.
        let j = gcs_complex(1, &standard_complex(1)).unwrap();
        assert!(matches!(gk_validate(&j, &j), Err(Error::NotPositive(_))));
    }

    #[test]
    fn non_commuting_rejected() {
        let j1 = gcs_complex(1, &standard_complex(1)).unwrap();
        let j2 = j1.b_conjugate(&[0.0, 1.0, -1.0, 0.0]).unwrap();
        let j3 = gcs_symplectic(1, &standard_omega(1)).unwrap();
        assert!(gk_validate(&j2, &j3).is_err() || gk_validate(&j1, &j2).is_err());
    }
}
