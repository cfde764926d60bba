//! Exterior algebra on a 2n-dimensional real space with complex coefficients,
//! the form model of the spin representation of T+T*, the Clifford
//! involution, the Mukai pairing and exponentials of 2-forms.
//!
//! A monomial dx^{s1}^...^dx^{sk} (s1 < ... < sk, zero-based axes) is stored at
//! the bitmask index `sum 1 << s`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const MAX_N: usize = 4;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Sign of dx^S ^ dx^T relative to the sorted monomial dx^{S|T}.
#[inline]
#[must_use]
pub fn wedge_sign(s: usize, t: usize) -> f64 {
    let mut swaps = 0u32;
    let mut rest = t;
    while rest != 0 {
        let j = rest.trailing_zeros();
        swaps += (s >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    if swaps.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Sign picked up when contracting axis `j` out of monomial `s`.
#[inline]
#[must_use]
pub fn interior_sign(s: usize, j: usize) -> f64 {
    if (s & ((1 << j) - 1)).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Clifford involution sign for degree k: + for k = 0,1 mod 4, - for 2,3.
#[inline]
#[must_use]
pub const fn involution_sign(k: u32) -> f64 {
    if k % 4 < 2 {
        1.0
    } else {
        -1.0
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_N {
        Err(Error::UnsupportedDim(n, MAX_N))
    } else {
        Ok(())
    }
}

/// A complex differential form at a point of a 2n-dimensional space.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedForm {
    n: usize,
    coeffs: Vec<C64>,
}

impl GradedForm {
    pub fn zero(n: usize) -> Result<Self> {
        check_n(n)?;
        Ok(Self { n, coeffs: vec![ZERO; 1 << (2 * n)] })
    }

    pub fn one(n: usize) -> Result<Self> {
        let mut f = Self::zero(n)?;
        f.coeffs[0] = ONE;
        Ok(f)
    }

    pub fn from_coeffs(n: usize, coeffs: Vec<C64>) -> Result<Self> {
        check_n(n)?;
        let expected = 1 << (2 * n);
        if coeffs.len() != expected {
            return Err(Error::BadLength { got: coeffs.len(), expected });
        }
        Ok(Self { n, coeffs })
    }

    /// `c` times the basis monomial at `mask`.
    pub fn basis(n: usize, mask: usize, c: C64) -> Result<Self> {
        let mut f = Self::zero(n)?;
        if mask >= f.coeffs.len() {
            return Err(Error::BadLength { got: mask, expected: f.coeffs.len() });
        }
        f.coeffs[mask] = c;
        Ok(f)
    }

    /// dx^axis with coefficient `c`.
    pub fn one_form(n: usize, axis: usize, c: C64) -> Result<Self> {
        Self::basis(n, 1 << axis, c)
    }

    /// The 2-form sum_{mu<nu} m[mu][nu] dx^mu ^ dx^nu of an antisymmetric matrix
    /// given row-major with side 2n.
    pub fn two_form(n: usize, m: &[C64]) -> Result<Self> {
        let d = 2 * n;
        if m.len() != d * d {
            return Err(Error::BadLength { got: m.len(), expected: d * d });
        }
        let mut f = Self::zero(n)?;
        for mu in 0..d {
            for nu in mu + 1..d {
                f.coeffs[(1 << mu) | (1 << nu)] = m[mu * d + nu];
            }
        }
        Ok(f)
    }

    /// Real version of [`GradedForm::two_form`].
    pub fn real_two_form(n: usize, m: &[f64]) -> Result<Self> {
        let c: Vec<C64> = m.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::two_form(n, &c)
    }

    /// Antisymmetric coefficient matrix (row-major, side 2n) of the degree-2 part.
    #[must_use]
    pub fn two_form_matrix(&self) -> Vec<C64> {
        let d = 2 * self.n;
        let mut m = vec![ZERO; d * d];
        for mu in 0..d {
            for nu in mu + 1..d {
                let c = self.coeffs[(1 << mu) | (1 << nu)];
                m[mu * d + nu] = c;
                m[nu * d + mu] = -c;
            }
        }
        m
    }

    #[inline]
    #[must_use]
    pub fn dim_n(&self) -> usize {
        self.n
    }

    #[inline]
    #[must_use]
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    #[inline]
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    #[inline]
    #[must_use]
    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    #[inline]
    #[must_use]
    pub fn coeff(&self, mask: usize) -> C64 {
        self.coeffs[mask]
    }

    /// Coefficient of dx^1 ^ ... ^ dx^{2n}.
    #[inline]
    #[must_use]
    pub fn top(&self) -> C64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    #[must_use]
    pub fn degree_part(&self, k: u32) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(m, &c)| if m.count_ones() == k { c } else { ZERO })
            .collect();
        Self { n: self.n, coeffs }
    }

    /// Largest |coefficient| outside degree k.
    #[must_use]
    pub fn off_degree_norm(&self, k: u32) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(m, _)| m.count_ones() != k)
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }

    #[must_use]
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    #[must_use]
    pub fn max_imag(&self) -> f64 {
        self.coeffs.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    #[must_use]
    pub fn scale(&self, s: C64) -> Self {
        Self { n: self.n, coeffs: self.coeffs.iter().map(|&c| c * s).collect() }
    }

    #[must_use]
    pub fn conj(&self) -> Self {
        Self { n: self.n, coeffs: self.coeffs.iter().map(|c| c.conj()).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_dim(self, other)?;
        Ok(Self {
            n: self.n,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        same_dim(self, other)?;
        Ok(Self {
            n: self.n,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        })
    }

    /// self += s * other
    pub fn axpy(&mut self, s: C64, other: &Self) -> Result<()> {
        same_dim(self, other)?;
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
        Ok(())
    }

    /// Max-norm distance.
    pub fn dist(&self, other: &Self) -> Result<f64> {
        same_dim(self, other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Lowest degree carrying a coefficient above `tol`, if any.
    #[must_use]
    pub fn lowest_degree(&self, tol: f64) -> Option<u32> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > tol)
            .map(|(m, _)| m.count_ones())
            .min()
    }
}

fn same_dim(a: &GradedForm, b: &GradedForm) -> Result<()> {
    if a.n != b.n {
        Err(Error::DimensionMismatch { left: a.n, right: b.n })
    } else {
        Ok(())
    }
}

/// An element v + xi of the complexified T+T*.
#[derive(Clone, Debug, PartialEq)]
pub struct GenVector {
    n: usize,
    vec: Vec<C64>,
    covec: Vec<C64>,
}

impl GenVector {
    pub fn new(n: usize, vec: Vec<C64>, covec: Vec<C64>) -> Result<Self> {
        check_n(n)?;
        if vec.len() != 2 * n {
            return Err(Error::BadLength { got: vec.len(), expected: 2 * n });
        }
        if covec.len() != 2 * n {
            return Err(Error::BadLength { got: covec.len(), expected: 2 * n });
        }
        Ok(Self { n, vec, covec })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::new(n, vec![ZERO; 2 * n], vec![ZERO; 2 * n])
    }

    /// Build from 4n components ordered (vector part, covector part).
    pub fn from_slice(n: usize, comps: &[C64]) -> Result<Self> {
        if comps.len() != 4 * n {
            return Err(Error::BadLength { got: comps.len(), expected: 4 * n });
        }
        Self::new(n, comps[..2 * n].to_vec(), comps[2 * n..].to_vec())
    }

    pub fn from_real(n: usize, comps: &[f64]) -> Result<Self> {
        let c: Vec<C64> = comps.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_slice(n, &c)
    }

    /// The k-th element of the real frame (d/dx^0..d/dx^{2n-1}, dx^0..dx^{2n-1}).
    pub fn frame(n: usize, k: usize) -> Result<Self> {
        let mut c = vec![ZERO; 4 * n];
        if k >= 4 * n {
            return Err(Error::BadLength { got: k, expected: 4 * n });
        }
        c[k] = ONE;
        Self::from_slice(n, &c)
    }

    #[inline]
    #[must_use]
    pub fn dim_n(&self) -> usize {
        self.n
    }

    #[inline]
    #[must_use]
    pub fn vec(&self) -> &[C64] {
        &self.vec
    }

    #[inline]
    #[must_use]
    pub fn covec(&self) -> &[C64] {
        &self.covec
    }

    #[must_use]
    pub fn to_vec(&self) -> Vec<C64> {
        let mut out = self.vec.clone();
        out.extend_from_slice(&self.covec);
        out
    }

    #[must_use]
    pub fn is_real(&self) -> bool {
        self.vec.iter().chain(&self.covec).all(|c| c.im == 0.0)
    }

    #[must_use]
    pub fn conj(&self) -> Self {
        Self {
            n: self.n,
            vec: self.vec.iter().map(|c| c.conj()).collect(),
            covec: self.covec.iter().map(|c| c.conj()).collect(),
        }
    }

    #[must_use]
    pub fn norm(&self) -> f64 {
        self.vec.iter().chain(&self.covec).map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Neutral pairing <v+xi, u+eta> = (xi(u) + eta(v)) / 2, complex-bilinear.
pub fn pairing(e: &GenVector, f: &GenVector) -> Result<C64> {
    if e.n != f.n {
        return Err(Error::DimensionMismatch { left: e.n, right: f.n });
    }
    let mut s = ZERO;
    for i in 0..2 * e.n {
        s += e.covec[i] * f.vec[i] + f.covec[i] * e.vec[i];
    }
    Ok(s * 0.5)
}

/// Gram matrix of the neutral pairing in the frame (vectors, covectors).
#[must_use]
pub fn pairing_matrix(n: usize) -> Vec<f64> {
    let d = 4 * n;
    let h = 2 * n;
    let mut q = vec![0.0; d * d];
    for i in 0..h {
        q[i * d + h + i] = 0.5;
        q[(h + i) * d + i] = 0.5;
    }
    q
}

pub fn wedge(a: &GradedForm, b: &GradedForm) -> Result<GradedForm> {
    same_dim(a, b)?;
    let mut out = GradedForm::zero(a.n)?;
    for (s, &ca) in a.coeffs.iter().enumerate() {
        if ca == ZERO {
            continue;
        }
        for (t, &cb) in b.coeffs.iter().enumerate() {
            if cb == ZERO || s & t != 0 {
                continue;
            }
            out.coeffs[s | t] += ca * cb * wedge_sign(s, t);
        }
    }
    Ok(out)
}

/// dx^axis ^ alpha, scaled by c.
#[must_use]
pub fn wedge_axis(axis: usize, c: C64, alpha: &GradedForm) -> GradedForm {
    let mut out = GradedForm { n: alpha.n, coeffs: vec![ZERO; alpha.coeffs.len()] };
    add_wedge_axis(&mut out.coeffs, axis, c, &alpha.coeffs);
    out
}

/// out += c * dx^axis ^ alpha on raw coefficient slices.
#[inline]
pub fn add_wedge_axis(out: &mut [C64], axis: usize, c: C64, alpha: &[C64]) {
    let bit = 1 << axis;
    for (s, &a) in alpha.iter().enumerate() {
        if s & bit == 0 && a != ZERO {
            out[s | bit] += c * a * interior_sign(s, axis);
        }
    }
}

/// out += c * i_{d/dx^axis} alpha on raw coefficient slices.
#[inline]
pub fn add_interior_axis(out: &mut [C64], axis: usize, c: C64, alpha: &[C64]) {
    let bit = 1 << axis;
    for (s, &a) in alpha.iter().enumerate() {
        if s & bit != 0 && a != ZERO {
            out[s ^ bit] += c * a * interior_sign(s, axis);
        }
    }
}

/// Interior product by the vector part of `v`; the covector part must vanish.
pub fn interior(v: &GenVector, alpha: &GradedForm) -> Result<GradedForm> {
    if v.n != alpha.n {
        return Err(Error::DimensionMismatch { left: v.n, right: alpha.n });
    }
    let stray = v.covec.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if stray != 0.0 {
        return Err(Error::Input(format!("interior needs a pure vector (covector part {stray:.3e})")));
    }
    let mut out = GradedForm::zero(alpha.n)?;
    for (j, &c) in v.vec.iter().enumerate() {
        if c != ZERO {
            add_interior_axis(&mut out.coeffs, j, c, &alpha.coeffs);
        }
    }
    Ok(out)
}

/// Spin action (v + xi) . alpha = i_v alpha + xi ^ alpha.
pub fn clifford_act(e: &GenVector, alpha: &GradedForm) -> Result<GradedForm> {
    if e.n != alpha.n {
        return Err(Error::DimensionMismatch { left: e.n, right: alpha.n });
    }
    let mut out = GradedForm::zero(alpha.n)?;
    clifford_act_into(&mut out.coeffs, &e.vec, &e.covec, &alpha.coeffs);
    Ok(out)
}

/// out += (v + xi) . alpha on raw slices.
pub fn clifford_act_into(out: &mut [C64], vec: &[C64], covec: &[C64], alpha: &[C64]) {
    for (j, &c) in vec.iter().enumerate() {
        if c != ZERO {
            add_interior_axis(out, j, c, alpha);
        }
    }
    for (j, &c) in covec.iter().enumerate() {
        if c != ZERO {
            add_wedge_axis(out, j, c, alpha);
        }
    }
}

/// Action of the k-th real frame element (k < 2n: d/dx^k, else dx^{k-2n}).
pub fn frame_act_into(out: &mut [C64], n: usize, k: usize, c: C64, alpha: &[C64]) {
    if k < 2 * n {
        add_interior_axis(out, k, c, alpha);
    } else {
        add_wedge_axis(out, k - 2 * n, c, alpha);
    }
}

#[must_use]
pub fn involution(alpha: &GradedForm) -> GradedForm {
    let coeffs = alpha
        .coeffs
        .iter()
        .enumerate()
        .map(|(m, &c)| c * involution_sign(m.count_ones()))
        .collect();
    GradedForm { n: alpha.n, coeffs }
}

/// Top-degree part of alpha ^ sigma(beta).
pub fn mukai_pair(alpha: &GradedForm, beta: &GradedForm) -> Result<C64> {
    same_dim(alpha, beta)?;
    Ok(mukai_raw(&alpha.coeffs, &beta.coeffs))
}

/// Mukai pairing on raw coefficient slices of equal length 4^n.
#[must_use]
pub fn mukai_raw(alpha: &[C64], beta: &[C64]) -> C64 {
    let top = alpha.len() - 1;
    let mut s = ZERO;
    for (m, &a) in alpha.iter().enumerate() {
        if a == ZERO {
            continue;
        }
        let c = top ^ m;
        let b = beta[c];
        if b != ZERO {
            s += a * b * wedge_sign(m, c) * involution_sign(c.count_ones());
        }
    }
    s
}

/// sum_{k} B^k / k! for a homogeneous 2-form B.
pub fn exp_two_form(b: &GradedForm) -> Result<GradedForm> {
    let off = b.off_degree_norm(2);
    if off > 1e-14 * (1.0 + b.max_abs()) {
        return Err(Error::NotDegreeTwo(off));
    }
    let mut out = GradedForm::one(b.n)?;
    let mut term = GradedForm::one(b.n)?;
    for k in 1..=b.n {
        term = wedge(&term, b)?.scale(C64::new(1.0 / k as f64, 0.0));
        out = out.add(&term)?;
    }
    Ok(out)
}

/// e^b ^ alpha for a real 2-form b.
pub fn b_transform(b: &GradedForm, alpha: &GradedForm) -> Result<GradedForm> {
    same_dim(b, alpha)?;
    let imag = b.max_imag();
    if imag > 0.0 {
        return Err(Error::NotReal(imag));
    }
    let eb = exp_two_form(b)?;
    wedge(&eb, alpha)
}

/// Signs s(p) with <e.alpha, beta>_s = s(p) <alpha, e.beta>_s for alpha of parity p,
/// found by exhaustive search over frame elements and basis monomials.
/// Returns `None` if no consistent sign exists.
pub fn adjunction_signs(n: usize) -> Result<Option<[f64; 2]>> {
    check_n(n)?;
    let len = 1usize << (2 * n);
    let mut found: [Option<f64>; 2] = [None, None];
    for k in 0..4 * n {
        for a in 0..len {
            let mut ea = vec![ZERO; len];
            frame_act_into(&mut ea, n, k, ONE, &unit(len, a));
            for b in 0..len {
                let mut eb = vec![ZERO; len];
                frame_act_into(&mut eb, n, k, ONE, &unit(len, b));
                let lhs = mukai_raw(&ea, &unit(len, b));
                let rhs = mukai_raw(&unit(len, a), &eb);
                if rhs.norm() < 0.5 && lhs.norm() < 0.5 {
                    continue;
                }
                if rhs.norm() < 0.5 || lhs.norm() < 0.5 {
                    return Ok(None);
                }
                let s = (lhs / rhs).re.signum();
                let p = (a.count_ones() % 2) as usize;
                match found[p] {
                    None => found[p] = Some(s),
                    Some(prev) if prev != s => return Ok(None),
                    _ => {}
                }
            }
        }
    }
    Ok(Some([found[0].unwrap_or(1.0), found[1].unwrap_or(1.0)]))
}

fn unit(len: usize, m: usize) -> Vec<C64> {
    let mut v = vec![ZERO; len];
    v[m] = ONE;
    v
}
