//! Block encodings: a unitary on `[a ancillas, n system]` qubits whose
//! `⟨bra|·|ket⟩` corner, scaled by `alpha`, approximates a target matrix.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    block_diag, check_qubits, expi_hermitian, haar_unitary, hermitian_defect, is_unitary, kron,
    mat_embed_block, opnorm, pauli_x, pauli_z, random_hermitian_with_norm, sqrt_complement,
    unitarity_defect, Bits, CMatrix, Tolerance,
};

/// Tolerance for the unitarity invariant.
pub const UNITARY_ATOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockEncoding {
    pub unitary: CMatrix,
    pub ancillas: usize,
    pub system: usize,
    pub alpha: f64,
    pub eps: f64,
    pub bra: Bits,
    pub ket: Bits,
}

impl BlockEncoding {
    /// A `(1, a, 0)` encoding with `0^a` selectors. Checks shape and
    /// unitarity.
    pub fn new(unitary: CMatrix, ancillas: usize, system: usize) -> Result<Self> {
        let be = Self::assemble(unitary, ancillas, system)?;
        if !is_unitary(&be.unitary, Tolerance::abs(UNITARY_ATOL))? {
            return Err(Error::NotUnitary(unitarity_defect(&be.unitary)?));
        }
        Ok(be)
    }

    /// Shape-checked constructor for unitaries that are unitary by
    /// construction (products and sums of checked pieces).
    pub(crate) fn assemble(unitary: CMatrix, ancillas: usize, system: usize) -> Result<Self> {
        check_qubits(ancillas + system)?;
        let dim = 1usize << (ancillas + system);
        if unitary.rows() != dim || unitary.cols() != dim {
            return Err(Error::Dimension(format!(
                "unitary is {}x{}, but a={ancillas}, n={system} needs {dim}x{dim}",
                unitary.rows(),
                unitary.cols()
            )));
        }
        Ok(Self {
            unitary,
            ancillas,
            system,
            alpha: 1.0,
            eps: 0.0,
            bra: Bits::zeros(ancillas),
            ket: Bits::zeros(ancillas),
        })
    }

    pub fn with_selectors(mut self, bra: Bits, ket: Bits) -> Result<Self> {
        if bra.len() != self.ancillas || ket.len() != self.ancillas {
            return Err(Error::Dimension(format!(
                "selectors of length {}/{} for {} ancillas",
                bra.len(),
                ket.len(),
                self.ancillas
            )));
        }
        self.bra = bra;
        self.ket = ket;
        Ok(self)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
        }
        self.alpha = alpha;
        Ok(self)
    }

    pub fn with_eps(mut self, eps: f64) -> Result<Self> {
        if !(eps >= 0.0) {
            return Err(Error::InvalidArgument(format!("eps must be non-negative, got {eps}")));
        }
        self.eps = eps;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.unitary.rows()
    }

    pub fn system_dim(&self) -> usize {
        1 << self.system
    }

    /// The unscaled corner `⟨bra| U |ket⟩`.
    pub fn block(&self) -> CMatrix {
        mat_embed_block(&self.unitary, &self.bra, &self.ket, self.ancillas, self.system)
            .expect("shape validated at construction")
    }

    pub fn is_normalized(&self) -> bool {
        self.bra.weight() == 0 && self.ket.weight() == 0
    }

    /// Equivalent encoding with `0^a` selectors: `(X^{bra} ⊗ I) U (X^{ket} ⊗ I)`.
    pub fn normalize_selectors(&self) -> Self {
        if self.is_normalized() {
            return self.clone();
        }
        let (b1, b2) = (self.bra.index(), self.ket.index());
        let dn = self.system_dim();
        let d = self.dim();
        let u = &self.unitary;
        let unitary = CMatrix::from_fn(d, d, |i, j| {
            let (al, nu) = (i / dn, i % dn);
            let (be, mu) = (j / dn, j % dn);
            u[(((al ^ b1) * dn) + nu, ((be ^ b2) * dn) + mu)]
        });
        Self {
            unitary,
            bra: Bits::zeros(self.ancillas),
            ket: Bits::zeros(self.ancillas),
            ..self.clone()
        }
    }

    /// Same operator with `extra` identity ancillas prepended.
    pub fn pad_ancillas(&self, extra: usize) -> Result<Self> {
        if extra == 0 {
            return Ok(self.clone());
        }
        check_qubits(self.ancillas + extra + self.system)?;
        let unitary = kron(&CMatrix::identity(1 << extra), &self.unitary);
        Ok(Self {
            unitary,
            ancillas: self.ancillas + extra,
            bra: Bits::zeros(extra).concat(&self.bra),
            ket: Bits::zeros(extra).concat(&self.ket),
            ..self.clone()
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationProfile {
    pub etas: Vec<f64>,
    pub eta_max: f64,
}

impl DeviationProfile {
    pub fn from_etas(etas: Vec<f64>) -> Result<Self> {
        if etas.iter().any(|&e| !(e >= 0.0)) {
            return Err(Error::InvalidArgument("deviation coefficients must be non-negative".into()));
        }
        let eta_max = etas.iter().cloned().fold(0.0, f64::max);
        Ok(Self { etas, eta_max })
    }

    pub fn measure(encodings: &[BlockEncoding]) -> Self {
        let etas = encodings.iter().map(deviation).collect();
        Self::from_etas(etas).expect("norms are non-negative")
    }
}

/// `‖target - alpha·⟨bra|U|ket⟩‖`.
pub fn verify_encoding(be: &BlockEncoding, target: &CMatrix) -> Result<f64> {
    let dn = be.system_dim();
    if target.rows() != dn || target.cols() != dn {
        return Err(Error::Dimension(format!(
            "target is {}x{}, encoding acts on {dn}x{dn}",
            target.rows(),
            target.cols()
        )));
    }
    opnorm(&(target - &be.block().scale_real(be.alpha)))
}

fn system_qubits(m: &CMatrix, what: &str) -> Result<usize> {
    m.qubits()
        .ok_or_else(|| Error::Dimension(format!("{what} must be square with power-of-two size")))
}

/// `U = Z⊗H + X⊗√(I-H²)`: Hermitian, unitary, with `⟨0|U|0⟩ = H`.
pub fn dilate_hermitian(h: &CMatrix) -> Result<BlockEncoding> {
    let n = system_qubits(h, "H")?;
    let defect = hermitian_defect(h)?;
    if defect > 1e-10 {
        return Err(Error::NotHermitian(defect));
    }
    let norm = opnorm(h)?;
    if norm > 1.0 + 1e-10 {
        return Err(Error::NotSubnormalized(norm));
    }
    let hs = (h + &h.adjoint()).scale_real(0.5);
    let s = sqrt_complement(&hs.matmul(&hs))?;
    let u = &kron(&pauli_z(), &hs) + &kron(&pauli_x(), &s);
    BlockEncoding::assemble(u, 1, n)
}

/// `U_A = [[√(I-A†A), A†], [A, -√(I-AA†)]]` with `⟨1|U_A|0⟩ = A`.
pub fn dilate_general(a: &CMatrix) -> Result<BlockEncoding> {
    let n = system_qubits(a, "A")?;
    let norm = opnorm(a)?;
    if norm > 1.0 + 1e-10 {
        return Err(Error::NotSubnormalized(norm));
    }
    let ah = a.adjoint();
    let s1 = sqrt_complement(&ah.matmul(a))?;
    let s2 = sqrt_complement(&a.matmul(&ah))?;
    let dn = 1 << n;
    let mut u = CMatrix::zeros(2 * dn, 2 * dn);
    u.set_block(0, 0, &s1);
    u.set_block(0, dn, &ah);
    u.set_block(dn, 0, a);
    u.set_block(dn, dn, &s2.scale_real(-1.0));
    BlockEncoding::assemble(u, 1, n)?.with_selectors(Bits::from_index(1, 1), Bits::zeros(1))
}

fn check_random_dims(n: usize, a: usize) -> Result<()> {
    if n < 1 || a < 1 {
        return Err(Error::InvalidArgument(format!("need n, a >= 1 (got n={n}, a={a})")));
    }
    if n + a > 10 {
        return Err(Error::DimensionCap { qubits: n + a, max: 10 });
    }
    Ok(())
}

/// Haar-random unitary on `a + n` qubits, declared as an encoding of its
/// own corner.
pub fn random_block_encoding(n: usize, a: usize, seed: u64) -> Result<BlockEncoding> {
    check_random_dims(n, a)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    BlockEncoding::assemble(haar_unitary(1 << (n + a), &mut rng), a, n)
}

/// `U = exp(iθG)` with random Hermitian `‖G‖ = 1` and `‖U - I‖` drawn
/// uniformly from `[0.8·eta, eta]`.
pub fn random_near_identity(n: usize, a: usize, eta: f64, seed: u64) -> Result<BlockEncoding> {
    check_random_dims(n, a)?;
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::InvalidArgument(format!("eta must lie in [0, 1), got {eta}")));
    }
    if eta == 0.0 {
        return BlockEncoding::assemble(CMatrix::identity(1 << (n + a)), a, n);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let g = random_hermitian_with_norm(1 << (n + a), 1.0, &mut rng);
    let target = eta * (0.8 + 0.2 * rng.random::<f64>());
    // ‖e^{iθG} - I‖ = 2 sin(θ/2) when ‖G‖ = 1 and θ ≤ π.
    let theta = 2.0 * (target / 2.0).asin();
    BlockEncoding::assemble(expi_hermitian(&g, theta)?, a, n)
}

/// Per-member seeds drawn from one stream, so a set is reproducible from a
/// single seed.
fn member_seeds(k: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..k).map(|_| rng.random()).collect()
}

/// `k` Haar-random encodings sharing `(n, a)`.
pub fn random_block_encoding_set(n: usize, a: usize, k: usize, seed: u64) -> Result<Vec<BlockEncoding>> {
    member_seeds(k, seed).into_iter().map(|s| random_block_encoding(n, a, s)).collect()
}

/// `k` near-identity encodings, each with deviation in `[0.8η, η]`.
pub fn random_near_identity_set(n: usize, a: usize, k: usize, eta: f64, seed: u64) -> Result<Vec<BlockEncoding>> {
    member_seeds(k, seed).into_iter().map(|s| random_near_identity(n, a, eta, s)).collect()
}

/// `‖U - I‖`.
pub fn deviation(be: &BlockEncoding) -> f64 {
    opnorm(&(&be.unitary - &CMatrix::identity(be.dim()))).expect("non-empty unitary")
}

/// Re-embed `base` into `ancillas` ancilla qubits with random unitaries on
/// the complement of the `|0^a⟩` subspace, so the corner is unchanged while
/// the rest of the unitary is generic.
pub fn wrap_with_ancillas(base: &BlockEncoding, ancillas: usize, seed: u64) -> Result<BlockEncoding> {
    let base = base.normalize_selectors();
    if ancillas < base.ancillas {
        return Err(Error::InvalidArgument(format!(
            "cannot wrap {} ancillas into {ancillas}",
            base.ancillas
        )));
    }
    let padded = base.pad_ancillas(ancillas - base.ancillas)?;
    let d = padded.dim();
    let dn = padded.system_dim();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let id = CMatrix::identity(dn);
    let left = block_diag(&[&id, &haar_unitary(d - dn, &mut rng)]);
    let right = block_diag(&[&id, &haar_unitary(d - dn, &mut rng)]);
    let u = left.matmul(&padded.unitary).matmul(&right);
    Ok(BlockEncoding { unitary: u, ..padded })
}
