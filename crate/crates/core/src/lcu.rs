//! Linear combinations of unitaries and the three fixed LCU circuits used by
//! the uncomputation pipeline.

use serde::{Deserialize, Serialize};

use crate::block_encoding::{BlockEncoding, UNITARY_ATOL};
use crate::error::{Error, Result};
use crate::linalg::{
    block_diag, hermitian_defect, is_unitary, kron, pauli_x, pauli_z, rotation, unitary_with_first_column,
    with_middle_qubit, CMatrix, Tolerance, C64,
};

/// `sin(π/14)`, the LCU scale that a degree-7 Chebyshev step maps to `-1`.
pub fn lcu_scale() -> f64 {
    (std::f64::consts::PI / 14.0).sin()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LcuSpec {
    pub coeffs: Vec<C64>,
    pub terms: Vec<CMatrix>,
    pub prep_qubits: usize,
}

impl LcuSpec {
    /// Uses the smallest PREP register that indexes every term.
    pub fn new(coeffs: Vec<C64>, terms: Vec<CMatrix>) -> Self {
        let prep_qubits = terms.len().max(1).next_power_of_two().trailing_zeros() as usize;
        Self { coeffs, terms, prep_qubits }
    }
}

/// `Σ_j P_j ⊗ T_j` with `P_j = V_L† |j⟩⟨j| V_R`: the PREP/SELECT/PREP sandwich
/// without forming SELECT.
fn sandwich(left: &CMatrix, right: &CMatrix, terms: &[CMatrix]) -> CMatrix {
    let lh = left.adjoint();
    let d = left.rows();
    let td = terms[0].rows();
    let mut out = CMatrix::zeros(d * td, d * td);
    for j in 0..d {
        let p = CMatrix::from_fn(d, d, |r, c| lh[(r, j)] * right[(j, c)]);
        let id;
        let term = if j < terms.len() {
            &terms[j]
        } else {
            id = CMatrix::identity(td);
            &id
        };
        out += &kron(&p, term);
    }
    out
}

fn check_terms(terms: &[CMatrix]) -> Result<usize> {
    let first = terms.first().ok_or_else(|| Error::InvalidArgument("empty term list".into()))?;
    let n = first
        .qubits()
        .ok_or_else(|| Error::Dimension("terms must be square with power-of-two size".into()))?;
    for t in terms {
        if t.rows() != first.rows() || t.cols() != first.cols() {
            return Err(Error::Dimension("terms have different dimensions".into()));
        }
        if !is_unitary(t, Tolerance::abs(UNITARY_ATOL))? {
            return Err(Error::NotUnitary(crate::linalg::unitarity_defect(t)?));
        }
    }
    Ok(n)
}

/// `(‖c‖₁, prep_qubits, 0)`-encoding of `Σ c_j T_j`. Coefficient phases are
/// folded into the terms so PREP has a non-negative first column.
pub fn lcu_build(spec: &LcuSpec) -> Result<BlockEncoding> {
    let n = check_terms(&spec.terms)?;
    let l = spec.terms.len();
    if spec.coeffs.len() != l {
        return Err(Error::Dimension(format!("{} coefficients for {l} terms", spec.coeffs.len())));
    }
    if (1usize << spec.prep_qubits) < l {
        return Err(Error::InvalidArgument(format!(
            "{} PREP qubits cannot index {l} terms",
            spec.prep_qubits
        )));
    }
    let norm1: f64 = spec.coeffs.iter().map(|z| z.norm()).sum();
    if !(norm1 > 0.0) {
        return Err(Error::InvalidArgument("coefficients sum to zero weight".into()));
    }
    let d = 1usize << spec.prep_qubits;
    let mut amps = vec![C64::new(0.0, 0.0); d];
    for (j, z) in spec.coeffs.iter().enumerate() {
        amps[j] = C64::new((z.norm() / norm1).sqrt(), 0.0);
    }
    let terms: Vec<CMatrix> = spec
        .coeffs
        .iter()
        .zip(&spec.terms)
        .map(|(z, t)| {
            let phase = if z.norm() > 0.0 { z / z.norm() } else { C64::new(1.0, 0.0) };
            t.scale(phase)
        })
        .collect();
    let prep = unitary_with_first_column(&amps)?;
    let w = sandwich(&prep, &prep, &terms);
    BlockEncoding::assemble(w, spec.prep_qubits, n)?.with_alpha(norm1)
}

/// Angles `(a, b)` of a one-qubit state-preparation pair with
/// `cos a·cos b = w0` and `sin a·sin b = w1`.
pub fn pair_angles(w0: f64, w1: f64) -> Result<(f64, f64)> {
    if w0 < 0.0 || w1 < 0.0 || w0 + w1 > 1.0 + 1e-15 {
        return Err(Error::InvalidArgument(format!(
            "weights ({w0}, {w1}) need w0, w1 >= 0 and w0 + w1 <= 1"
        )));
    }
    let sum = (w0 - w1).clamp(-1.0, 1.0).acos();
    let diff = (w0 + w1).min(1.0).acos();
    Ok(((sum + diff) / 2.0, (sum - diff) / 2.0))
}

/// One-qubit LCU `w0·T0 + w1·T1` realised with a state-preparation pair:
/// `(R(b)† ⊗ I)(|0⟩⟨0|⊗T0 + |1⟩⟨1|⊗T1)(R(a) ⊗ I)`.
fn two_term_pair(w0: f64, w1: f64, t0: &CMatrix, t1: &CMatrix) -> Result<CMatrix> {
    let (a, b) = pair_angles(w0, w1)?;
    Ok(sandwich(&rotation(b), &rotation(a), &[t0.clone(), t1.clone()]))
}

/// Diagonal of `2Π - I` for `Π = |0^a⟩⟨0^a| ⊗ I_n`.
pub(crate) fn projector_signs(a: usize, n: usize) -> Vec<f64> {
    let dn = 1usize << n;
    (0..(1usize << (a + n))).map(|i| if i < dn { 1.0 } else { -1.0 }).collect()
}

/// `X · diag(s)`, scaling columns.
fn scale_cols(x: &CMatrix, s: &[f64]) -> CMatrix {
    CMatrix::from_fn(x.rows(), x.cols(), |i, j| x[(i, j)] * s[j])
}

/// Which Gram matrix the second-order reflection step encodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gram {
    /// `V (2Π - I) V†`, block `2AA† - I`.
    Outer,
    /// `V† (2Π - I) V`, block `2A†A - I`.
    Inner,
}

/// Encoding of `(I - G)/2` where `G` is `AA†` or `A†A`, with one extra
/// ancilla and two queries. Returns the encoding and the query count.
pub(crate) fn i_minus_gram(v: &BlockEncoding, gram: Gram) -> Result<(BlockEncoding, u64)> {
    let v = v.normalize_selectors();
    let signs = projector_signs(v.ancillas, v.system);
    let u = &v.unitary;
    let uh = u.adjoint();
    let mut queries = 0u64;
    let t2 = match gram {
        Gram::Outer => {
            queries += 2;
            scale_cols(u, &signs).matmul(&uh)
        }
        Gram::Inner => {
            queries += 2;
            scale_cols(&uh, &signs).matmul(u)
        }
    };
    // ¼·I + ¼·(-T₂) encodes (I - (2G - I))/4 = (I - G)/2.
    let id = CMatrix::identity(v.dim());
    let w = two_term_pair(0.25, 0.25, &id, &t2.scale_real(-1.0))?;
    Ok((BlockEncoding::assemble(w, v.ancillas + 1, v.system)?, queries))
}

/// `(1, a+1, 0)`-encoding of `(I - H²)/2`.
///
/// The controlled operator is `V_H (2Π - I) V_H†`, whose corner is `2H² - I`;
/// a one-qubit state-preparation pair combines it with the identity.
pub fn lcu_i_minus_h2(vh: &BlockEncoding) -> Result<BlockEncoding> {
    let defect = hermitian_defect(&vh.block())?;
    if defect > 1e-10 {
        return Err(Error::NotHermitian(defect));
    }
    Ok(i_minus_gram(vh, Gram::Outer)?.0)
}

fn align_ancillas(small: &BlockEncoding, target: usize) -> Result<BlockEncoding> {
    if small.ancillas > target {
        return Err(Error::Dimension(format!(
            "encoding has {} ancillas, more than the {target} available",
            small.ancillas
        )));
    }
    small.normalize_selectors().pad_ancillas(target - small.ancillas)
}

/// Encoding of `sin(π/14)·U_H` with `U_H = Z⊗H + X⊗√(I-H²)`, given `V_H` and
/// an encoding of `√(I-H²)/√8`.
///
/// Registers: `[lcu, anc(a'), out, sys(n)]`; the encoding's system is
/// `(out, sys)`. `V_H` is identity-padded to the square-root encoding's
/// ancilla count.
pub fn lcu_w_uh(vh: &BlockEncoding, vsqrt: &BlockEncoding) -> Result<BlockEncoding> {
    if vh.system != vsqrt.system {
        return Err(Error::Dimension("system sizes differ".into()));
    }
    let vs = vsqrt.normalize_selectors();
    let vh = align_ancillas(vh, vs.ancillas)?;
    let (a, n) = (vs.ancillas, vs.system);
    let t0 = with_middle_qubit(&vs.unitary, &pauli_x(), a, n);
    let t1 = with_middle_qubit(&vh.unitary, &pauli_z(), a, n);
    let s = lcu_scale();
    let w = two_term_pair(8f64.sqrt() * s, s, &t0, &t1)?;
    BlockEncoding::assemble(w, a + 1, n + 1)
}

/// Encoding of `sin(π/14)·U_A` with
/// `U_A = [[√(I-A†A), A†], [A, -√(I-AA†)]]`, given `V_A` and encodings of
/// `√(I-A†A)/√8` and `√(I-AA†)/√8` with equal ancilla counts.
pub fn lcu_w_ua(va: &BlockEncoding, vs_inner: &BlockEncoding, vs_outer: &BlockEncoding) -> Result<BlockEncoding> {
    if vs_inner.ancillas != vs_outer.ancillas || vs_inner.system != vs_outer.system {
        return Err(Error::Dimension("square-root encodings differ in shape".into()));
    }
    if va.system != vs_inner.system {
        return Err(Error::Dimension("system sizes differ".into()));
    }
    let s1 = vs_inner.normalize_selectors();
    let s2 = vs_outer.normalize_selectors();
    let va = align_ancillas(va, s1.ancillas)?;
    let (a, n) = (s1.ancillas, s1.system);
    let p0 = CMatrix::diag_real(&[1.0, 0.0]);
    let p1 = CMatrix::diag_real(&[0.0, 1.0]);
    let up = CMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
    let down = up.transpose();
    let diag_term = &with_middle_qubit(&s1.unitary, &p0, a, n)
        + &with_middle_qubit(&s2.unitary.scale_real(-1.0), &p1, a, n);
    let off_term = &with_middle_qubit(&va.unitary.adjoint(), &up, a, n) + &with_middle_qubit(&va.unitary, &down, a, n);
    let s = lcu_scale();
    let w = two_term_pair(8f64.sqrt() * s, s, &diag_term, &off_term)?;
    BlockEncoding::assemble(w, a + 1, n + 1)
}

/// Controlled unitary `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ U`.
pub fn controlled(u: &CMatrix) -> CMatrix {
    block_diag(&[&CMatrix::identity(u.rows()), u])
}
