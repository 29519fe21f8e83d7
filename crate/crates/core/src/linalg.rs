//! Dense complex matrices and the handful of factorizations the rest of the
//! crate needs.
//!
//! Storage is row-major. Products go through `matrixmultiply::zgemm`; SVD,
//! Hermitian eigendecomposition, QR and the general exponential are delegated
//! to `nalgebra`.
//!
//! Qubit order is global: the leftmost tensor factor holds the most
//! significant bits, and ancilla registers sit to the left of system
//! registers.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest register handled by the dense simulator.
pub const MAX_QUBITS: usize = 12;

/// Eigenvalues of `I - X` below this are a genuine domain violation rather
/// than roundoff (inputs are accepted up to norm `1 + 1e-10`).
pub const SQRT_CLAMP: f64 = -1e-9;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `sqrt(max(v, 0))` for `v >= SQRT_CLAMP`, NaN below it.
pub fn sqrt_clamped(v: f64) -> f64 {
    if v < SQRT_CLAMP || v.is_nan() {
        f64::NAN
    } else {
        v.max(0.0).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub atol: f64,
    pub rtol: f64,
}

impl Tolerance {
    pub fn new(atol: f64, rtol: f64) -> Result<Self> {
        if !(atol >= 0.0) || !(rtol >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerances must be non-negative (atol={atol}, rtol={rtol})"
            )));
        }
        Ok(Self { atol, rtol })
    }

    pub const fn abs(atol: f64) -> Self {
        Self { atol, rtol: 0.0 }
    }

    /// Threshold for a quantity whose reference magnitude is `scale`.
    pub fn bound(&self, scale: f64) -> f64 {
        self.atol + self.rtol * scale
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::abs(1e-10)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = cr(1.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite entry".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| cr(x)).collect())
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::from_vec(r, c, rows.concat())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in entries.iter().enumerate() {
            m.data[i * n + i] = z;
        }
        m
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        Self::diag(&entries.iter().map(|&x| cr(x)).collect::<Vec<_>>())
    }

    pub fn scalar(z: C64) -> Self {
        Self { rows: 1, cols: 1, data: vec![z] }
    }

    /// Column vector.
    pub fn column(v: &[C64]) -> Self {
        Self { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    /// Number of qubits if the matrix is square with power-of-two size.
    pub fn qubits(&self) -> Option<usize> {
        (self.is_square() && self.rows.is_power_of_two()).then(|| self.rows.trailing_zeros() as usize)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.data[j * self.cols + i].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.data[j * self.cols + i])
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, z: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&w| w * z).collect() }
    }

    pub fn scale_real(&self, x: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&w| w * x).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.data[i * self.cols + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise distance; `inf` on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn submatrix(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        assert!(r0 + nr <= self.rows && c0 + nc <= self.cols, "submatrix out of range");
        Self::from_fn(nr, nc, |i, j| self.data[(r0 + i) * self.cols + c0 + j])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Self) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols, "block out of range");
        for i in 0..block.rows {
            let dst = (r0 + i) * self.cols + c0;
            self.data[dst..dst + block.cols].copy_from_slice(block.row(i));
        }
    }

    /// `self * rhs`. Panics on inner-dimension mismatch.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul inner dimension mismatch");
        let (m, k, n) = (self.rows, self.cols, rhs.cols);
        let mut out = Self::zeros(m, n);
        if m == 0 || n == 0 || k == 0 {
            return out;
        }
        if m * n * k <= 4096 {
            for i in 0..m {
                let a = &self.data[i * k..(i + 1) * k];
                let o = &mut out.data[i * n..(i + 1) * n];
                for (l, &ail) in a.iter().enumerate() {
                    if ail == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let b = &rhs.data[l * n..(l + 1) * n];
                    for (oj, bj) in o.iter_mut().zip(b) {
                        *oj += ail * bj;
                    }
                }
            }
            return out;
        }
        // SAFETY: Complex64 is #[repr(C)] { re, im }, layout-identical to
        // [f64; 2]. Strides describe dense row-major buffers of exactly the
        // asserted shapes, and `out` does not alias the inputs.
        unsafe {
            matrixmultiply::zgemm(
                matrixmultiply::CGemmOption::Standard,
                matrixmultiply::CGemmOption::Standard,
                m,
                k,
                n,
                [1.0, 0.0],
                self.data.as_ptr() as *const [f64; 2],
                k as isize,
                1,
                rhs.data.as_ptr() as *const [f64; 2],
                n as isize,
                1,
                [0.0, 0.0],
                out.data.as_mut_ptr() as *mut [f64; 2],
                n as isize,
                1,
            );
        }
        out
    }

    pub fn try_matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(self.matmul(rhs))
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.data[i * self.cols + j])
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    fn check_same_shape(&self, other: &Self) {
        assert!(
            self.rows == other.rows && self.cols == other.cols,
            "shape mismatch: {}x{} vs {}x{}",
            self.rows,
            self.cols,
            other.rows,
            other.cols
        );
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        assert!(i < self.rows && j < self.cols, "index out of range");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        assert!(i < self.rows && j < self.cols, "index out of range");
        &mut self.data[i * self.cols + j]
    }
}

impl Add<&CMatrix> for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        self.check_same_shape(rhs);
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        self.check_same_shape(rhs);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl Sub<&CMatrix> for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        self.check_same_shape(rhs);
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale_real(-1.0)
    }
}

impl Mul<&CMatrix> for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

impl fmt::Display for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self
                .row(i)
                .iter()
                .map(|z| format!("{:+.6}{:+.6}i", z.re, z.im))
                .collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// A register basis label, most significant qubit first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bits(Vec<bool>);

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Self(vec![false; len])
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    /// `value` written with `len` bits, MSB first.
    pub fn from_index(value: usize, len: usize) -> Self {
        Self((0..len).map(|i| (value >> (len - 1 - i)) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    /// Basis index with the first bit most significant.
    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn concat(&self, other: &Self) -> Self {
        Self([self.0.as_slice(), other.0.as_slice()].concat())
    }
}

impl FromStr for Bits {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("invalid bit '{other}' in \"{s}\""))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_vec(2, 2, vec![cr(0.0), c(0.0, -1.0), c(0.0, 1.0), cr(0.0)]).unwrap()
}

pub fn pauli_z() -> CMatrix {
    CMatrix::diag_real(&[1.0, -1.0])
}

pub fn hadamard() -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_real(2, 2, &[h, h, h, -h]).unwrap()
}

pub fn phase_s() -> CMatrix {
    CMatrix::diag(&[cr(1.0), c(0.0, 1.0)])
}

/// Real rotation with first column `(cos t, sin t)`.
pub fn rotation(t: f64) -> CMatrix {
    let (s, co) = t.sin_cos();
    CMatrix::from_real(2, 2, &[co, -s, s, co]).unwrap()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac, br, bc) = (a.rows, a.cols, b.rows, b.cols);
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    let oc = ac * bc;
    for i in 0..ar {
        for j in 0..ac {
            let z = a.data[i * ac + j];
            if z == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                let dst = (i * br + k) * oc + j * bc;
                for l in 0..bc {
                    out.data[dst + l] = z * b.data[k * bc + l];
                }
            }
        }
    }
    out
}

/// Block-diagonal sum; `block_diag(&[A, B])` is `|0><0|⊗A + |1><1|⊗B`.
pub fn block_diag(blocks: &[&CMatrix]) -> CMatrix {
    let rows = blocks.iter().map(|b| b.rows).sum();
    let cols = blocks.iter().map(|b| b.cols).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let (mut r, mut c0) = (0, 0);
    for b in blocks {
        out.set_block(r, c0, b);
        r += b.rows;
        c0 += b.cols;
    }
    out
}

/// Operator on registers `[a, 1, n]` built from `v` on `[a, n]` and a
/// one-qubit `mid` acting on the middle wire.
pub fn with_middle_qubit(v: &CMatrix, mid: &CMatrix, a: usize, n: usize) -> CMatrix {
    let (da, dn) = (1usize << a, 1usize << n);
    assert_eq!(v.rows, da * dn, "operator does not span [a, n]");
    assert!(mid.rows == 2 && mid.cols == 2, "middle operator must be 2x2");
    let d = 2 * da * dn;
    let mut out = CMatrix::zeros(d, d);
    for al in 0..da {
        for nu in 0..dn {
            for be in 0..da {
                for mu in 0..dn {
                    let z = v.data[(al * dn + nu) * v.cols + be * dn + mu];
                    if z == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for o in 0..2 {
                        for p in 0..2 {
                            let w = mid.data[o * 2 + p];
                            if w == C64::new(0.0, 0.0) {
                                continue;
                            }
                            let r = (al * 2 + o) * dn + nu;
                            let col = (be * 2 + p) * dn + mu;
                            out.data[r * d + col] = z * w;
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn opnorm(m: &CMatrix) -> Result<f64> {
    if m.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    if m.rows == 1 || m.cols == 1 {
        return Ok(m.frobenius_norm());
    }
    let sv = m.to_nalgebra().singular_values();
    Ok(sv.iter().cloned().fold(0.0, f64::max))
}

pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    if m.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let mut sv: Vec<f64> = m.to_nalgebra().singular_values().iter().cloned().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// `‖A - B‖` in operator norm; errors on shape mismatch.
pub fn opnorm_diff(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(Error::Dimension(format!(
            "{}x{} vs {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    opnorm(&(a - b))
}

/// Operator norm of `m - I`, with a Frobenius shortcut when that already
/// certifies `<= limit`.
fn norm_from_identity_within(m: &CMatrix, limit: f64) -> Result<bool> {
    let e = m - &CMatrix::identity(m.rows);
    if e.frobenius_norm() <= limit {
        return Ok(true);
    }
    Ok(opnorm(&e)? <= limit)
}

pub fn is_unitary(m: &CMatrix, tol: Tolerance) -> Result<bool> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows, cols: m.cols });
    }
    if m.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let limit = tol.bound(1.0);
    let mh = m.adjoint();
    Ok(norm_from_identity_within(&mh.matmul(m), limit)? && norm_from_identity_within(&m.matmul(&mh), limit)?)
}

/// `max(‖M†M - I‖, ‖MM† - I‖)`.
pub fn unitarity_defect(m: &CMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows, cols: m.cols });
    }
    let mh = m.adjoint();
    let id = CMatrix::identity(m.rows);
    Ok(opnorm(&(&mh.matmul(m) - &id))?.max(opnorm(&(&m.matmul(&mh) - &id))?))
}

pub fn hermitian_defect(m: &CMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows, cols: m.cols });
    }
    let d = m - &m.adjoint();
    if d.frobenius_norm() == 0.0 {
        return Ok(0.0);
    }
    opnorm(&d)
}

pub fn is_hermitian(m: &CMatrix, atol: f64) -> Result<bool> {
    Ok(hermitian_defect(m)? <= atol)
}

/// Eigenvalues (ascending) and eigenvectors (columns) of `(H + H†)/2`,
/// after checking `H` is Hermitian within `atol`.
pub fn herm_eigen(h: &CMatrix, atol: f64) -> Result<(Vec<f64>, CMatrix)> {
    let defect = hermitian_defect(h)?;
    if defect > atol {
        return Err(Error::NotHermitian(defect));
    }
    if h.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let sym = (h + &h.adjoint()).scale_real(0.5);
    let eig = sym.to_nalgebra().symmetric_eigen();
    let mut order: Vec<usize> = (0..h.rows).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = CMatrix::from_fn(h.rows, h.rows, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((vals, vecs))
}

/// `f(H) = V f(Λ) V†`. A non-finite `f(λ)` is reported as a domain error
/// naming `λ`.
pub fn herm_funcmat(h: &CMatrix, f: impl Fn(f64) -> f64, tol: Tolerance) -> Result<CMatrix> {
    let (vals, vecs) = herm_eigen(h, tol.bound(1.0))?;
    let mut fv = Vec::with_capacity(vals.len());
    for &lam in &vals {
        let y = f(lam);
        if !y.is_finite() {
            return Err(Error::Domain(lam));
        }
        fv.push(y);
    }
    let n = h.rows;
    let scaled = CMatrix::from_fn(n, n, |i, j| vecs[(i, j)] * fv[j]);
    Ok(scaled.matmul(&vecs.adjoint()))
}

/// `√(I - M)` for Hermitian `M` with spectrum at most 1 (up to roundoff).
pub fn sqrt_complement(m: &CMatrix) -> Result<CMatrix> {
    herm_funcmat(m, |x| sqrt_clamped(1.0 - x), Tolerance::abs(1e-9))
}

/// `e^{iθG}` for Hermitian `G`.
pub fn expi_hermitian(g: &CMatrix, theta: f64) -> Result<CMatrix> {
    let (vals, vecs) = herm_eigen(g, 1e-9)?;
    let n = g.rows;
    let phases: Vec<C64> = vals.iter().map(|&l| C64::from_polar(1.0, theta * l)).collect();
    let scaled = CMatrix::from_fn(n, n, |i, j| vecs[(i, j)] * phases[j]);
    Ok(scaled.matmul(&vecs.adjoint()))
}

/// General matrix exponential.
pub fn expm(m: &CMatrix) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows, cols: m.cols });
    }
    Ok(CMatrix::from_nalgebra(&m.to_nalgebra().exp()))
}

/// `⟨bra| U |ket⟩` on the first `a` qubits, leaving the `n` system qubits.
pub fn mat_embed_block(u: &CMatrix, bra: &Bits, ket: &Bits, a: usize, n: usize) -> Result<CMatrix> {
    let dim = 1usize << (a + n);
    if u.rows != dim || u.cols != dim {
        return Err(Error::Dimension(format!(
            "unitary is {}x{}, registers need {dim}x{dim}",
            u.rows, u.cols
        )));
    }
    if bra.len() != a || ket.len() != a {
        return Err(Error::Dimension(format!(
            "selectors have lengths {}/{} but a = {a}",
            bra.len(),
            ket.len()
        )));
    }
    let dn = 1usize << n;
    Ok(u.submatrix(bra.index() * dn, ket.index() * dn, dn, dn))
}

pub fn check_qubits(q: usize) -> Result<()> {
    if q > MAX_QUBITS {
        return Err(Error::DimensionCap { qubits: q, max: MAX_QUBITS });
    }
    Ok(())
}

fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian_c64(rng))
}

/// Haar-distributed unitary: Gaussian matrix, QR, and the R-diagonal phase
/// fix.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let z = random_gaussian(dim, dim, rng).to_nalgebra();
    let qr = z.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases: Vec<C64> = (0..dim)
        .map(|i| {
            let d = r[(i, i)];
            if d.norm() > 0.0 { d / d.norm() } else { cr(1.0) }
        })
        .collect();
    CMatrix::from_fn(dim, dim, |i, j| q[(i, j)] * phases[j])
}

/// Random Hermitian matrix `(Z + Z†)/2` with Gaussian `Z`.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let z = random_gaussian(dim, dim, rng);
    (&z + &z.adjoint()).scale_real(0.5)
}

/// Random Hermitian matrix rescaled to operator norm `norm`.
pub fn random_hermitian_with_norm<R: Rng + ?Sized>(dim: usize, norm: f64, rng: &mut R) -> CMatrix {
    let h = random_hermitian(dim, rng);
    let s = opnorm(&h).expect("non-empty");
    h.scale_real(norm / s)
}

/// Unitary whose first column is the unit vector `v`, completed by a
/// Householder reflection.
pub fn unitary_with_first_column(v: &[C64]) -> Result<CMatrix> {
    let n = v.len();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n == 0 || (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument(format!("column must be a unit vector (norm {norm})")));
    }
    // Choose the phase so that e0 maps to v exactly: H = I - 2ww†/(w†w),
    // w = e0·e^{iγ} - v with γ = arg(v0); then H(e0·e^{iγ}) = v, so
    // H·diag(e^{iγ}, 1, ...) has first column v.
    let gamma = if v[0].norm() > 0.0 { v[0] / v[0].norm() } else { cr(1.0) };
    let mut w: Vec<C64> = v.iter().map(|z| -z).collect();
    w[0] += gamma;
    let ww: f64 = w.iter().map(|z| z.norm_sqr()).sum();
    let mut h = CMatrix::identity(n);
    if ww > 1e-300 {
        for i in 0..n {
            for j in 0..n {
                h.data[i * n + j] -= 2.0 * w[i] * w[j].conj() / ww;
            }
        }
    }
    for i in 0..n {
        h.data[i * n] *= gamma;
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn opnorm_examples() {
        assert!((opnorm(&CMatrix::diag_real(&[0.3, -0.9])).unwrap() - 0.9).abs() < 1e-14);
        assert!((opnorm(&pauli_x()).unwrap() - 1.0).abs() < 1e-14);
        let m = CMatrix::from_real(2, 2, &[0.6, 0.8, 0.0, 0.0]).unwrap();
        assert!((opnorm(&m).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(opnorm(&CMatrix::zeros(0, 0)), Err(Error::EmptyMatrix));
    }

    #[test]
    fn opnorm_small_path_matches_svd() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..20 {
            let m = random_gaussian(2, 2, &mut rng);
            let sv = m.to_nalgebra().singular_values().max();
            assert!((opnorm(&m).unwrap() - sv).abs() < 1e-12);
        }
    }

    #[test]
    fn unitary_examples() {
        let t = Tolerance::abs(1e-12);
        assert!(is_unitary(&CMatrix::identity(4), t).unwrap());
        assert!(is_unitary(&CMatrix::from_real(2, 2, &[0.6, 0.8, 0.8, -0.6]).unwrap(), t).unwrap());
        assert!(!is_unitary(&CMatrix::diag_real(&[1.0, 0.5]), t).unwrap());
        assert!(is_unitary(&CMatrix::zeros(2, 3), t).is_err());
    }

    #[test]
    fn kron_examples() {
        let i2 = CMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), CMatrix::identity(4));
        let zk = kron(&pauli_z(), &CMatrix::scalar(cr(0.5)));
        assert_eq!(zk, CMatrix::diag_real(&[0.5, -0.5]));
        let xk = kron(&pauli_x(), &CMatrix::diag_real(&[1.0, 2.0]));
        assert_eq!(xk.submatrix(0, 2, 2, 2), CMatrix::diag_real(&[1.0, 2.0]));
        assert_eq!(xk.submatrix(2, 0, 2, 2), CMatrix::diag_real(&[1.0, 2.0]));
        assert_eq!(xk.submatrix(0, 0, 2, 2), CMatrix::zeros(2, 2));
    }

    #[test]
    fn funcmat_examples() {
        let t = Tolerance::default();
        let f = |x: f64| sqrt_clamped(1.0 - x * x);
        let out = herm_funcmat(&CMatrix::diag_real(&[0.6, 0.0]), f, t).unwrap();
        assert!(out.max_abs_diff(&CMatrix::diag_real(&[0.8, 1.0])) < 1e-14);
        let out = herm_funcmat(&CMatrix::zeros(3, 3), f, t).unwrap();
        assert!(out.max_abs_diff(&CMatrix::identity(3)) < 1e-14);
        let out = herm_funcmat(&pauli_x().scale_real(0.5), |x| x * x, t).unwrap();
        assert!(out.max_abs_diff(&CMatrix::identity(2).scale_real(0.25)) < 1e-14);
    }

    #[test]
    fn funcmat_errors() {
        let t = Tolerance::default();
        let nonherm = CMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(herm_funcmat(&nonherm, |x| x, t), Err(Error::NotHermitian(_))));
        let r = herm_funcmat(&CMatrix::diag_real(&[2.0, 0.0]), |x| sqrt_clamped(1.0 - x * x), t);
        assert_eq!(r, Err(Error::Domain(2.0)));
    }

    #[test]
    fn embed_block_examples() {
        let z: Bits = "0".parse().unwrap();
        let o: Bits = "1".parse().unwrap();
        let b = mat_embed_block(&CMatrix::identity(4), &z, &z, 1, 1).unwrap();
        assert_eq!(b, CMatrix::identity(2));
        let xi = kron(&pauli_x(), &CMatrix::identity(2));
        assert_eq!(mat_embed_block(&xi, &z, &o, 1, 1).unwrap(), CMatrix::identity(2));
        let cnot = block_diag(&[&CMatrix::identity(2), &pauli_x()]);
        assert_eq!(mat_embed_block(&cnot, &o, &o, 1, 1).unwrap(), pauli_x());
        assert!(mat_embed_block(&cnot, &z, &z, 2, 1).is_err());
    }

    #[test]
    fn bits_roundtrip() {
        let b: Bits = "0110".parse().unwrap();
        assert_eq!(b.index(), 6);
        assert_eq!(Bits::from_index(6, 4), b);
        assert_eq!(b.to_string(), "0110");
        assert!("01x".parse::<Bits>().is_err());
    }

    #[test]
    fn zgemm_path_matches_naive() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let a = random_gaussian(33, 20, &mut rng);
        let b = random_gaussian(20, 17, &mut rng);
        let fast = a.matmul(&b);
        let slow = CMatrix::from_fn(33, 17, |i, j| (0..20).map(|k| a[(i, k)] * b[(k, j)]).sum());
        assert!(fast.max_abs_diff(&slow) < 1e-12);
    }

    #[test]
    fn householder_completion() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let g = random_gaussian(5, 1, &mut rng);
        let nrm = g.frobenius_norm();
        let v: Vec<C64> = g.data().iter().map(|z| z / nrm).collect();
        let u = unitary_with_first_column(&v).unwrap();
        assert!(is_unitary(&u, Tolerance::abs(1e-12)).unwrap());
        for (i, z) in v.iter().enumerate() {
            assert!((u[(i, 0)] - z).norm() < 1e-13);
        }
    }

    #[test]
    fn middle_qubit_matches_permuted_kron() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let v = haar_unitary(4, &mut rng);
        let x = pauli_x();
        let out = with_middle_qubit(&v, &x, 1, 1);
        for al in 0..2 {
            for o in 0..2 {
                for nu in 0..2 {
                    for be in 0..2 {
                        for p in 0..2 {
                            for mu in 0..2 {
                                let want = v[(al * 2 + nu, be * 2 + mu)] * x[(o, p)];
                                let got = out[((al * 2 + o) * 2 + nu, (be * 2 + p) * 2 + mu)];
                                assert!((want - got).norm() < 1e-15);
                            }
                        }
                    }
                }
            }
        }
    }
}
