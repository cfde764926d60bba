//! Seeded random inputs: band-limited periodic fields, skew-Hermitian
//! connections and deformations, unitary gauge matrices.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::field::fields::{mat, EndField};
use crate::field::grid::TorusGrid;
use crate::field::moment::Deformation;
use crate::field::GenConnection;
use crate::Result;

/// Seeded generator used everywhere randomness is needed.
#[must_use]
pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// One term c cos(2 pi k.x/P + phase).
#[derive(Clone, Debug)]
pub struct Mode {
    pub k: Vec<i32>,
    pub amp: f64,
    pub phase: f64,
}

/// Sum of a few low-frequency cosines on the torus.
#[derive(Clone, Debug)]
pub struct TrigProfile {
    pub modes: Vec<Mode>,
}

impl TrigProfile {
    pub fn random(rng: &mut ChaCha8Rng, dim: usize, terms: usize, kmax: i32, amp: f64) -> Self {
        let modes = (0..terms)
            .map(|_| Mode {
                k: (0..dim).map(|_| rng.gen_range(-kmax..=kmax)).collect(),
                amp: amp * rng.gen_range(-1.0..1.0),
                phase: rng.gen_range(0.0..TAU),
            })
            .collect();
        Self { modes }
    }

    #[must_use]
    pub fn eval(&self, grid: &TorusGrid, p: usize) -> f64 {
        self.modes
            .iter()
            .map(|m| {
                let arg: f64 = m
                    .k
                    .iter()
                    .enumerate()
                    .map(|(mu, &k)| TAU * f64::from(k) * grid.coord(p, mu) / grid.periods()[mu])
                    .sum();
                m.amp * (arg + m.phase).cos()
            })
            .sum()
    }

    #[must_use]
    pub fn sample(&self, grid: &TorusGrid) -> Vec<f64> {
        (0..grid.npts()).map(|p| self.eval(grid, p)).collect()
    }
}

/// Random constant anti-Hermitian r x r matrix with entries of size ~amp.
pub fn skew_matrix(rng: &mut ChaCha8Rng, r: usize, amp: f64) -> Vec<C64> {
    let mut m = vec![C64::new(0.0, 0.0); r * r];
    for i in 0..r {
        m[i * r + i] = C64::new(0.0, amp * rng.gen_range(-1.0..1.0));
        for j in i + 1..r {
            let z = C64::new(amp * rng.gen_range(-1.0..1.0), amp * rng.gen_range(-1.0..1.0));
            m[i * r + j] = z;
            m[j * r + i] = -z.conj();
        }
    }
    m
}

/// Random unitary from the QR factor of a complex Gaussian-like matrix.
pub fn unitary(rng: &mut ChaCha8Rng, r: usize) -> Vec<C64> {
    let m = DMatrix::<C64>::from_fn(r, r, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let q = m.qr().q();
    let mut out = vec![C64::new(0.0, 0.0); r * r];
    for i in 0..r {
        for j in 0..r {
            out[i * r + j] = q[(i, j)];
        }
    }
    out
}

/// Smooth skew-Hermitian field i H(x), H Hermitian with trig-profile entries.
pub fn skew_field(rng: &mut ChaCha8Rng, grid: &TorusGrid, r: usize, amp: f64) -> EndField {
    let dim = grid.dim();
    let mut profiles = Vec::with_capacity(r * r);
    for _ in 0..r * r {
        profiles.push(TrigProfile::random(rng, dim, 3, 2, amp).sample(grid));
    }
    // Entry (i,j), i<j, uses profiles i*r+j (real) and j*r+i (imaginary).
    EndField::from_fn(grid, r, |p, out| {
        for i in 0..r {
            out[i * r + i] = C64::new(0.0, profiles[i * r + i][p]);
            for j in i + 1..r {
                let h = C64::new(profiles[i * r + j][p], profiles[j * r + i][p]);
                out[i * r + j] = C64::new(0.0, 1.0) * h;
                out[j * r + i] = C64::new(0.0, 1.0) * h.conj();
            }
        }
    })
}

/// Random smooth generalized connection with independent A and V amplitudes.
pub fn connection(rng: &mut ChaCha8Rng, grid: &TorusGrid, r: usize, amp_a: f64, amp_v: f64) -> Result<GenConnection> {
    let dim = grid.dim();
    let a = (0..dim).map(|_| skew_field(rng, grid, r, amp_a)).collect();
    let v = (0..dim)
        .map(|_| if amp_v == 0.0 { EndField::zeros(grid, r) } else { skew_field(rng, grid, r, amp_v) })
        .collect();
    GenConnection::new(a, v)
}

/// Random smooth u(E)-valued section of T+T*.
pub fn deformation(rng: &mut ChaCha8Rng, grid: &TorusGrid, r: usize, amp: f64) -> Result<Deformation> {
    Deformation::new((0..2 * grid.dim()).map(|_| skew_field(rng, grid, r, amp)).collect())
}

/// Random antisymmetric real matrix of side d.
pub fn antisymmetric(rng: &mut ChaCha8Rng, d: usize, amp: f64) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        for j in i + 1..d {
            let x = amp * rng.gen_range(-1.0..1.0);
            m[i * d + j] = x;
            m[j * d + i] = -x;
        }
    }
    m
}

/// Largest |U U^dagger - I|.
#[must_use]
pub fn unitarity_defect(r: usize, u: &[C64]) -> f64 {
    let p = mat::mul(r, u, &mat::adjoint(r, u));
    p.iter().zip(mat::identity(r)).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
