//! Reference computations for integration tests. These deliberately avoid
//! the library's structured code paths: everything is built from Kronecker
//! products and plain matrix multiplication, with norms from nalgebra.

#![allow(dead_code)]

use bechain::linalg::{c, cr, kron, CMatrix, C64};
use bechain::mcm::{MCMCircuit, MCMRaw};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn to_na(m: &CMatrix) -> DMatrix<C64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

/// Largest singular value via nalgebra's SVD.
pub fn norm2(m: &CMatrix) -> f64 {
    to_na(m).singular_values().iter().cloned().fold(0.0, f64::max)
}

pub fn dist(a: &CMatrix, b: &CMatrix) -> f64 {
    norm2(&(a - b))
}

pub fn id(d: usize) -> CMatrix {
    CMatrix::identity(d)
}

/// `|0^a⟩⟨0^a|` and its complement on `a` qubits.
pub fn projectors(a: usize) -> (CMatrix, CMatrix) {
    let d = 1usize << a;
    let mut p0 = CMatrix::zeros(d, d);
    p0[(0, 0)] = cr(1.0);
    let p1 = &id(d) - &p0;
    (p0, p1)
}

/// `G ⊗ Π_0 ⊗ I + B ⊗ Π_⊥ ⊗ I`.
pub fn controlled_pair(g: &CMatrix, b: &CMatrix, a: usize, n: usize) -> CMatrix {
    let (p0, p1) = projectors(a);
    let idn = id(1 << n);
    &kron(&kron(g, &p0), &idn) + &kron(&kron(b, &p1), &idn)
}

/// `(Q ⊗ U_K) · Π_i (ctrl V_{i}) (I ⊗ U_i)` assembled from Kronecker
/// products.
pub fn hand_mcm_unitary(circ: &MCMCircuit) -> CMatrix {
    let (a, n, m) = (circ.ancillas(), circ.system(), circ.m);
    let dm = 1usize << m;
    let mut acc = kron(&id(dm), &circ.encodings[0].unitary);
    for i in 1..circ.k() {
        acc = controlled_pair(&id(dm), &circ.v[i - 1], a, n).matmul(&acc);
        acc = kron(&id(dm), &circ.encodings[i].unitary).matmul(&acc);
    }
    kron(&circ.q, &id(1 << (a + n))).matmul(&acc)
}

/// `(W_K ⊗ U_K) C_{K-1} (W_{K-1} ⊗ U_{K-1}) ⋯ C_1 (W_1 ⊗ U_1)` with
/// `C_j = G_j ⊗ Π_0 ⊗ I + B_j ⊗ Π_⊥ ⊗ I`.
pub fn raw_form_unitary(raw: &MCMRaw) -> CMatrix {
    let be = &raw.encodings[0];
    let (a, n) = (be.ancillas, be.system);
    let mut acc = kron(&raw.w[0], &be.unitary);
    for j in 1..raw.encodings.len() {
        acc = controlled_pair(&raw.g[j - 1], &raw.b[j - 1], a, n).matmul(&acc);
        acc = kron(&raw.w[j], &raw.encodings[j].unitary).matmul(&acc);
    }
    acc
}

/// Top-left `2^n` block of a `2^{q}` matrix.
pub fn corner(u: &CMatrix, n: usize) -> CMatrix {
    let dn = 1usize << n;
    CMatrix::from_fn(dn, dn, |i, j| u[(i, j)])
}

/// Random unitary from the QR factor of a complex Gaussian matrix (nalgebra
/// QR, independent of the library's sampler).
pub fn qr_unitary(d: usize, r: &mut ChaCha20Rng) -> CMatrix {
    let g = DMatrix::from_fn(d, d, |_, _| c(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5));
    let q = g.qr().q();
    CMatrix::from_fn(d, d, |i, j| q[(i, j)])
}

/// Random Hermitian matrix with operator norm exactly `norm`.
pub fn hermitian_with_norm(d: usize, norm: f64, r: &mut ChaCha20Rng) -> CMatrix {
    let g = DMatrix::from_fn(d, d, |_, _| c(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5));
    let h = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    let h = CMatrix::from_fn(d, d, |i, j| h[(i, j)]);
    let s = norm2(&h);
    h.scale_real(norm / s)
}

/// `f(H)` through nalgebra's Hermitian eigendecomposition.
pub fn spectral(h: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let eig = to_na(h).symmetric_eigen();
    let d = h.rows();
    let v = &eig.eigenvectors;
    let fv = DMatrix::from_fn(d, d, |i, j| v[(i, j)] * C64::new(f(eig.eigenvalues[j]), 0.0));
    let out = fv * v.adjoint();
    CMatrix::from_fn(d, d, |i, j| out[(i, j)])
}

/// Chebyshev series by the three-term recurrence.
pub fn cheb_eval(coeffs: &[f64], x: f64) -> f64 {
    let (mut t0, mut t1) = (1.0, x);
    let mut sum = 0.0;
    for (k, &ck) in coeffs.iter().enumerate() {
        let tk = match k {
            0 => 1.0,
            1 => x,
            _ => {
                let t2 = 2.0 * x * t1 - t0;
                t0 = t1;
                t1 = t2;
                t2
            }
        };
        sum += ck * tk;
    }
    sum
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}
