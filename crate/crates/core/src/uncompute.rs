//! Single-ancilla block encodings from multi-ancilla ones.
//!
//! Pipeline for Hermitian `H` with `‖H‖ ≤ 1 - δ`:
//! 1. encode `(I - H²)/2` (one extra ancilla, two queries);
//! 2. QSVT with a polynomial close to `½√x`, giving `√(I - H²)/√8`;
//! 3. LCU of `X⊗V_√` and `Z⊗V_H` into `sin(π/14)·U_H`, `U_H = Z⊗H + X⊗√(I-H²)`;
//! 4. degree-7 Chebyshev amplification, since `T₇(sin(π/14)) = -1`;
//! 5. the corner on all ancillas but one is within `ε` of `U_H`.

use serde::{Deserialize, Serialize};

use crate::block_encoding::{dilate_general, dilate_hermitian, verify_encoding, BlockEncoding};
use crate::error::{Error, Result};
use crate::lcu::{i_minus_gram, lcu_scale, lcu_w_ua, lcu_w_uh, Gram};
use crate::linalg::{hermitian_defect, mat_embed_block, opnorm, phase_s, Bits, CMatrix};
use crate::qsp::{approx_half_sqrt, chebyshev_circuit, qsvt_apply_counted, solve_phases, PhaseFactors};

/// Amplification degree; `T₇(sin(π/14)) = -1`.
pub const AMPLIFY_DEGREE: usize = 7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UncomputeReport {
    pub delta: f64,
    pub eps_requested: f64,
    pub eps_measured: f64,
    /// Uses of `V` and `V†` in the final circuit.
    pub queries: u64,
    pub ancillae_peak: usize,
    pub ancillae_final: usize,
    /// Degree of the square-root polynomial.
    pub degree: usize,
    /// Distance of the LCU corner from `sin(π/14)·U`.
    pub lcu_error: f64,
    /// Distance of the contracted single-ancilla unitary from the exact dilation.
    pub dilation_error: f64,
}

/// Lower end of the spectrum of `(I - H²)/2` when `‖H‖ ≤ 1 - δ`.
pub fn half_gap(delta: f64) -> f64 {
    delta * (2.0 - delta) / 2.0
}

fn check_args(delta: f64, eps: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1], got {delta}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

fn check_gap(m: &CMatrix, delta: f64) -> Result<()> {
    let norm = opnorm(m)?;
    let limit = 1.0 - delta;
    if norm > limit + 1e-12 {
        return Err(Error::GapViolated { norm, limit });
    }
    Ok(())
}

/// Phases for `½√x` on the spectrum of the `(I - H²)/2` encoding, to accuracy `ε/9`.
fn sqrt_phases(delta: f64, eps: f64) -> Result<PhaseFactors> {
    let p = approx_half_sqrt(half_gap(delta).min(0.5), (eps / 9.0).min(0.5))?;
    solve_phases(&p)
}

/// Amplify, undo the `-1`, and declare every qubit except the
/// system as an ancilla.
fn amplify(w: &BlockEncoding, eps: f64) -> Result<(BlockEncoding, u64)> {
    let (amp, uses) = chebyshev_circuit(w, AMPLIFY_DEGREE)?;
    let unitary = amp.unitary.scale_real(-1.0);
    let ancillas = w.ancillas + 1;
    let system = w.system - 1;
    let be = BlockEncoding::assemble(unitary, ancillas, system)?.with_eps(eps)?;
    Ok((be, uses))
}

/// The `(n+1)`-qubit operator left after projecting every ancilla but the
/// last onto `|0⟩`.
pub fn single_ancilla_unitary(be: &BlockEncoding) -> Result<CMatrix> {
    if be.ancillas == 0 {
        return Err(Error::InvalidArgument("encoding has no ancilla".into()));
    }
    let k = be.ancillas - 1;
    let z = Bits::zeros(k);
    mat_embed_block(&be.unitary, &z, &z, k, be.system + 1)
}

/// `(1, 1, ε)`-encoding of Hermitian `H` from a `(1, a, 0)`-encoding `V_H`.
///
/// The returned encoding keeps the enlarged register with `0` selectors;
/// [`single_ancilla_unitary`] contracts it.
pub fn uncompute_hermitian(vh: &BlockEncoding, delta: f64, eps: f64) -> Result<(BlockEncoding, UncomputeReport)> {
    check_args(delta, eps)?;
    let vh = vh.normalize_selectors();
    let h = vh.block();
    let defect = hermitian_defect(&h)?;
    if defect > 1e-10 {
        return Err(Error::NotHermitian(defect));
    }
    check_gap(&h, delta)?;

    let (step1, q1) = i_minus_gram(&vh, Gram::Outer)?;
    let phases = sqrt_phases(delta, eps)?;
    let (step2, uses2) = qsvt_apply_counted(&phases, &step1)?;
    let w = lcu_w_uh(&vh, &step2)?;
    let q_w = uses2 * q1 + 1;

    let uh = dilate_hermitian(&h)?.unitary;
    let lcu_error = opnorm(&(&w.block() - &uh.scale_real(lcu_scale())))?;

    let (out, uses4) = amplify(&w, eps)?;
    let queries = uses4 * q_w;
    let eps_measured = verify_encoding(&out, &h)?;
    let dilation_error = opnorm(&(&single_ancilla_unitary(&out)? - &uh))?;
    let report = UncomputeReport {
        delta,
        eps_requested: eps,
        eps_measured,
        queries,
        ancillae_peak: out.ancillas,
        ancillae_final: 1,
        degree: phases.degree,
        lcu_error,
        dilation_error,
    };
    if eps_measured > eps {
        return Err(Error::EpsExceeded { eps_measured, eps_requested: eps });
    }
    Ok((out, report))
}

/// `(1, 1, ε)`-encoding of a general square `A` with `‖A‖ ≤ 1 - δ`, read at
/// `⟨1|·|0⟩` on the remaining ancilla.
pub fn uncompute_general(va: &BlockEncoding, delta: f64, eps: f64) -> Result<(BlockEncoding, UncomputeReport)> {
    check_args(delta, eps)?;
    let va = va.normalize_selectors();
    let a = va.block();
    check_gap(&a, delta)?;

    let (inner, q_in) = i_minus_gram(&va, Gram::Inner)?;
    let (outer, q_out) = i_minus_gram(&va, Gram::Outer)?;
    let phases = sqrt_phases(delta, eps)?;
    let (s_inner, u_in) = qsvt_apply_counted(&phases, &inner)?;
    let (s_outer, u_out) = qsvt_apply_counted(&phases, &outer)?;
    let w = lcu_w_ua(&va, &s_inner, &s_outer)?;
    // Diagonal term: one use of each square-root circuit; off-diagonal term:
    // one use each of V_A and V_A†.
    let q_w = u_in * q_in + u_out * q_out + 2;

    let ua = dilate_general(&a)?.unitary;
    let lcu_error = opnorm(&(&w.block() - &ua.scale_real(lcu_scale())))?;

    let (out, uses4) = amplify(&w, eps)?;
    let k = out.ancillas;
    let bra = Bits::zeros(k - 1).concat(&Bits::from_index(1, 1));
    let out = out.with_selectors(bra, Bits::zeros(k))?;
    let queries = uses4 * q_w;
    let eps_measured = verify_encoding(&out, &a)?;
    let dilation_error = opnorm(&(&single_ancilla_unitary(&out)? - &ua))?;
    let report = UncomputeReport {
        delta,
        eps_requested: eps,
        eps_measured,
        queries,
        ancillae_peak: out.ancillas,
        ancillae_final: 1,
        degree: phases.degree,
        lcu_error,
        dilation_error,
    };
    if eps_measured > eps {
        return Err(Error::EpsExceeded { eps_measured, eps_requested: eps });
    }
    Ok((out, report))
}

/// Recover `e^{iθX}` from `e^{iφZ/2} e^{iθX} e^{-iφZ/2}` without knowing `θ`
/// or `φ`: encode `cos θ`, uncompute to `U_{cos θ} = cos θ·Z + |sin θ|·X`, and
/// conjugate by `S`. The result uses the representative with `sin θ ≥ 0`.
pub fn phase_correct_twisted(u: &CMatrix, delta: f64, eps: f64) -> Result<CMatrix> {
    if u.rows() != 2 || u.cols() != 2 {
        return Err(Error::NotTwisted(format!("expected 2x2, got {}x{}", u.rows(), u.cols())));
    }
    let (d0, d1) = (u[(0, 0)], u[(1, 1)]);
    if (d0 - d1).norm() > 1e-8 || d0.im.abs() > 1e-8 {
        return Err(Error::NotTwisted("diagonal entries must be equal and real".into()));
    }
    if (u[(0, 1)].norm() - u[(1, 0)].norm()).abs() > 1e-8 {
        return Err(Error::NotTwisted("off-diagonal magnitudes differ".into()));
    }
    let be = BlockEncoding::new(u.clone(), 1, 0)?;
    let (out, _) = uncompute_hermitian(&be, delta, eps)?;
    let v = single_ancilla_unitary(&out)?;
    let s = phase_s();
    Ok(s.matmul(&v).matmul(&s))
}
