//! Amplitude amplification on dense statevectors, and its use to boost the
//! post-selection probability of multiplication gadgets.

use serde::{Deserialize, Serialize};

use crate::block_encoding::UNITARY_ATOL;
use crate::error::{Error, Result};
use crate::linalg::{cr, is_unitary, kron, unitarity_defect, unitary_with_first_column, CMatrix, Tolerance, C64};
use crate::mcm::{embe_block, gadget_error_exact, mcm_unitary, MCMCircuit};

/// Amplitudes below this count as no overlap with the good subspace.
pub const MIN_GOOD_AMPLITUDE: f64 = 1e-12;

/// `(I - 2|0^sig⟩⟨0^sig|) ⊗ I` on `total` qubits.
pub fn reflect_signal(sig: usize, total: usize) -> Result<CMatrix> {
    if sig == 0 || sig > total {
        return Err(Error::InvalidArgument(format!("need 1 <= sig <= total, got sig={sig}, total={total}")));
    }
    let rest = 1usize << (total - sig);
    let d = 1usize << total;
    Ok(CMatrix::diag_real(&(0..d).map(|i| if i < rest { -1.0 } else { 1.0 }).collect::<Vec<_>>()))
}

/// `U0 (2|0⟩⟨0| - I) U0†`.
pub fn reflect_initial(u0: &CMatrix) -> Result<CMatrix> {
    if !is_unitary(u0, Tolerance::abs(UNITARY_ATOL))? {
        return Err(Error::NotUnitary(unitarity_defect(u0)?));
    }
    let d = u0.rows();
    let mut mid = CMatrix::identity(d).scale_real(-1.0);
    mid[(0, 0)] = cr(1.0);
    Ok(u0.matmul(&mid).matmul(&u0.adjoint()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct AAProblem {
    pub u0: CMatrix,
    pub sig: usize,
    /// Grover iterations; `None` picks `round(π/(4θ) - ½)`.
    pub k: Option<usize>,
}

impl AAProblem {
    pub fn new(u0: CMatrix, sig: usize, k: Option<usize>) -> Result<Self> {
        let total = u0
            .qubits()
            .filter(|_| u0.is_square())
            .ok_or_else(|| Error::Dimension(format!("U0 is {}x{}", u0.rows(), u0.cols())))?;
        if sig == 0 || sig >= total {
            return Err(Error::InvalidArgument(format!("need 1 <= sig < {total}, got {sig}")));
        }
        if !is_unitary(&u0, Tolerance::abs(UNITARY_ATOL))? {
            return Err(Error::NotUnitary(unitarity_defect(&u0)?));
        }
        Ok(Self { u0, sig, k })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Boost {
    /// `G^k |ψ₀⟩`.
    pub state: Vec<C64>,
    pub k: usize,
    pub alpha_before: f64,
    pub alpha_after: f64,
    /// `‖(Π_{0^sig} ⊗ I) G^k |ψ₀⟩‖²`.
    pub probability: f64,
}

fn good_norm(v: &[C64], good: usize) -> f64 {
    v[..good].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `k = round(π/(4 asin α) - ½)`, at least 0.
pub fn auto_iterations(alpha: f64) -> usize {
    let theta = alpha.clamp(0.0, 1.0).asin();
    (std::f64::consts::PI / (4.0 * theta) - 0.5).round().max(0.0) as usize
}

/// Applies `G = R_{ψ₀} R_good` `k` times to `|ψ₀⟩ = U0 |0⟩`.
pub fn grover_boost(prob: &AAProblem) -> Result<Boost> {
    let psi0 = prob.u0.col(0);
    let total = prob.u0.qubits().expect("validated");
    let good = 1usize << (total - prob.sig);
    let alpha_before = good_norm(&psi0, good);
    if alpha_before < MIN_GOOD_AMPLITUDE {
        return Err(Error::NoGoodComponent(alpha_before));
    }
    let k = prob.k.unwrap_or_else(|| auto_iterations(alpha_before));
    let mut v = psi0.clone();
    for _ in 0..k {
        for z in &mut v[..good] {
            *z = -*z;
        }
        let overlap: C64 = psi0.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
        for (z, p) in v.iter_mut().zip(&psi0) {
            *z = p * (overlap * 2.0) - *z;
        }
    }
    let alpha_after = good_norm(&v, good);
    Ok(Boost { state: v, k, alpha_before, alpha_after, probability: alpha_after * alpha_after })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OaaOutcome {
    pub boost: Boost,
    /// Post-selected, normalized system state.
    pub output: Vec<C64>,
    /// `|⟨ψ_good|ψ_out⟩|²` with `ψ_good ∝ target |ψ⟩`.
    pub fidelity: f64,
    /// `‖target - ⟨0^{m+a}|U|0^{m+a}⟩‖`.
    pub eps: f64,
    /// `‖target |ψ⟩‖` for the normalized input.
    pub target_norm: f64,
}

fn normalized(v: &[C64]) -> Option<Vec<C64>> {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    (n >= MIN_GOOD_AMPLITUDE).then(|| v.iter().map(|z| z / n).collect())
}

/// Amplifies the gadget's post-selected branch on input `|0^{m+a}⟩|ψ⟩` and
/// compares the result with `target |ψ⟩`.
pub fn oaa_ambe(circ: &MCMCircuit, target: &CMatrix, input: &[C64]) -> Result<OaaOutcome> {
    let eps = gadget_error_exact(circ, target)?;
    if !(eps < 1.0) {
        return Err(Error::InvalidArgument(format!("gadget error {eps:.3e} must be below 1")));
    }
    let dn = 1usize << circ.system();
    if input.len() != dn {
        return Err(Error::Dimension(format!("input has length {}, system needs {dn}", input.len())));
    }
    let psi = normalized(input).ok_or(Error::NoGoodComponent(0.0))?;
    let ideal = target.apply(&psi);
    let target_norm = ideal.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let ideal = normalized(&ideal).ok_or(Error::NoGoodComponent(target_norm))?;

    let sig = circ.m + circ.ancillas();
    let prep = kron(&CMatrix::identity(1 << sig), &unitary_with_first_column(&psi)?);
    let u0 = mcm_unitary(circ).matmul(&prep);
    let boost = grover_boost(&AAProblem::new(u0, sig, None)?)?;
    let output = normalized(&boost.state[..dn]).ok_or(Error::NoGoodComponent(boost.alpha_after))?;
    let overlap: C64 = ideal.iter().zip(&output).map(|(a, b)| a.conj() * b).sum();
    Ok(OaaOutcome { boost, output, fidelity: overlap.norm_sqr(), eps, target_norm })
}

/// `‖⟨0^{m+a}|U|0^{m+a}⟩ |ψ⟩‖` for a normalized `ψ`: the good amplitude
/// before amplification.
pub fn gadget_good_amplitude(circ: &MCMCircuit, input: &[C64]) -> Result<f64> {
    let psi = normalized(input).ok_or(Error::NoGoodComponent(0.0))?;
    let out = embe_block(circ).apply(&psi);
    Ok(out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
}
