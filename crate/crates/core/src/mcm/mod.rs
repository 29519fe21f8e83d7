//! Circuits that interleave `K` block encodings with measurement-ancilla
//! unitaries controlled on the block-encoding ancillas leaving `0^a`.
//!
//! Register order is `[m measurement, a ancilla, n system]`, most
//! significant qubit first.

mod bounds;
mod gadgets;
mod oracle;
mod probe;

pub use bounds::{macg_bound, macg_regime_r, min_k_for_eps, runs, seqnorm_bound_check, seqnorm_runs_bound};
pub use gadgets::{add_unitary, ceil_log2, gadget_lw19, gadget_naive, gadget_pmacg, ADD_MAX_QUBITS};
pub use oracle::{
    bad_sequence_oracle, block_product, gadget_error_exact, sx_sum, sx_sum_by_weight, sx_sum_enumerate,
    ENUMERATION_MAX_K,
};
pub use probe::{lower_bound_probe, lower_bound_probe_stats, ProbeStats};

use serde::{Deserialize, Serialize};

use crate::block_encoding::{BlockEncoding, UNITARY_ATOL};
use crate::error::{Error, Result};
use crate::linalg::{check_qubits, is_unitary, unitarity_defect, CMatrix, Tolerance};

#[derive(Clone, Debug, PartialEq)]
pub struct MCMCircuit {
    pub encodings: Vec<BlockEncoding>,
    pub m: usize,
    pub v: Vec<CMatrix>,
    pub q: CMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MCMRaw {
    pub encodings: Vec<BlockEncoding>,
    pub m: usize,
    pub w: Vec<CMatrix>,
    pub g: Vec<CMatrix>,
    pub b: Vec<CMatrix>,
}

/// One row of a gadget-error sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    #[serde(rename = "K")]
    pub k: usize,
    pub m: usize,
    pub p: Option<usize>,
    pub c: Option<f64>,
    pub eta_max: f64,
    pub e_measured: f64,
    pub e_bound: Option<f64>,
    pub seed: u64,
}

impl ErrorReport {
    pub fn pass(&self) -> Option<bool> {
        self.e_bound.map(|b| self.e_measured <= b)
    }
}

/// Selector-normalized copies sharing `(n, a)`.
pub(crate) fn common_encodings(encodings: &[BlockEncoding]) -> Result<(Vec<BlockEncoding>, usize, usize)> {
    let first = encodings
        .first()
        .ok_or_else(|| Error::InvalidArgument("at least one block encoding is required".into()))?;
    let (a, n) = (first.ancillas, first.system);
    for (i, be) in encodings.iter().enumerate() {
        if be.ancillas != a || be.system != n {
            return Err(Error::Dimension(format!(
                "encoding {i} has (n, a) = ({}, {}), expected ({n}, {a})",
                be.system, be.ancillas
            )));
        }
    }
    Ok((encodings.iter().map(BlockEncoding::normalize_selectors).collect(), a, n))
}

fn check_register_unitary(u: &CMatrix, m: usize, what: &str) -> Result<()> {
    let d = 1usize << m;
    if u.rows() != d || u.cols() != d {
        return Err(Error::Dimension(format!(
            "{what} is {}x{}, expected {d}x{d} for m = {m}",
            u.rows(),
            u.cols()
        )));
    }
    if !is_unitary(u, Tolerance::abs(UNITARY_ATOL))? {
        return Err(Error::NotUnitary(unitarity_defect(u)?));
    }
    Ok(())
}

impl MCMCircuit {
    pub fn new(encodings: Vec<BlockEncoding>, m: usize, v: Vec<CMatrix>, q: CMatrix) -> Result<Self> {
        let (encodings, a, n) = common_encodings(&encodings)?;
        check_qubits(m + a + n)?;
        let k = encodings.len();
        if m == 0 && k > 1 {
            return Err(Error::InvalidArgument("m = 0 is only allowed for K = 1".into()));
        }
        if v.len() != k - 1 {
            return Err(Error::Dimension(format!("{} interleaved unitaries for K = {k}", v.len())));
        }
        for (i, vi) in v.iter().enumerate() {
            check_register_unitary(vi, m, &format!("V_{}", i + 1))?;
        }
        check_register_unitary(&q, m, "Q")?;
        Ok(Self { encodings, m, v, q })
    }

    pub fn k(&self) -> usize {
        self.encodings.len()
    }

    pub fn ancillas(&self) -> usize {
        self.encodings[0].ancillas
    }

    pub fn system(&self) -> usize {
        self.encodings[0].system
    }

    pub fn dim(&self) -> usize {
        1 << (self.m + self.ancillas() + self.system())
    }

    /// Applies the circuit to the columns of `state` (a `dim × c` matrix).
    fn propagate(&self, state: &mut CMatrix) {
        let (a, n) = (self.ancillas(), self.system());
        let k = self.k();
        for i in 0..k {
            apply_encoding(state, &self.encodings[i].unitary, self.m, a, n);
            if i + 1 < k {
                apply_measurement(state, &self.v[i], self.m, a, n, true);
            }
        }
        apply_measurement(state, &self.q, self.m, a, n, false);
    }
}

impl MCMRaw {
    pub fn new(
        encodings: Vec<BlockEncoding>,
        m: usize,
        w: Vec<CMatrix>,
        g: Vec<CMatrix>,
        b: Vec<CMatrix>,
    ) -> Result<Self> {
        let (encodings, a, n) = common_encodings(&encodings)?;
        check_qubits(m + a + n)?;
        let k = encodings.len();
        if w.len() != k || g.len() != k - 1 || b.len() != k - 1 {
            return Err(Error::Dimension(format!(
                "raw form needs K = {k} W's and {} G's and B's, got {}/{}/{}",
                k - 1,
                w.len(),
                g.len(),
                b.len()
            )));
        }
        for (name, list) in [("W", &w), ("G", &g), ("B", &b)] {
            for (i, u) in list.iter().enumerate() {
                check_register_unitary(u, m, &format!("{name}_{}", i + 1))?;
            }
        }
        Ok(Self { encodings, m, w, g, b })
    }
}

/// `I_m ⊗ U` on the `[a, n]` registers.
fn apply_encoding(state: &mut CMatrix, u: &CMatrix, m: usize, a: usize, n: usize) {
    let s = 1usize << (a + n);
    let cols = state.cols();
    for mu in 0..(1usize << m) {
        let block = state.submatrix(mu * s, 0, s, cols);
        state.set_block(mu * s, 0, &u.matmul(&block));
    }
}

/// `V ⊗ Π_⊥ ⊗ I + I ⊗ Π_0 ⊗ I` when `controlled`, otherwise `V ⊗ I`.
fn apply_measurement(state: &mut CMatrix, v: &CMatrix, m: usize, a: usize, n: usize, controlled: bool) {
    let s = 1usize << (a + n);
    let dm = 1usize << m;
    let first = if controlled { 1usize << n } else { 0 };
    let cols = state.cols();
    let mut buf = vec![Default::default(); dm];
    for r in first..s {
        for col in 0..cols {
            for (mu, slot) in buf.iter_mut().enumerate() {
                *slot = state[(mu * s + r, col)];
            }
            for mu in 0..dm {
                let mut acc = Default::default();
                for (nu, x) in buf.iter().enumerate() {
                    acc += v[(mu, nu)] * x;
                }
                state[(mu * s + r, col)] = acc;
            }
        }
    }
}

/// The full `2^{m+a+n}` unitary of the circuit.
pub fn mcm_unitary(circ: &MCMCircuit) -> CMatrix {
    let mut state = CMatrix::identity(circ.dim());
    circ.propagate(&mut state);
    state
}

/// `⟨0^{m+a}| U |0^{m+a}⟩`.
pub fn embe_block(circ: &MCMCircuit) -> CMatrix {
    let dn = 1usize << circ.system();
    let mut state = CMatrix::zeros(circ.dim(), dn);
    for j in 0..dn {
        state[(j, j)] = crate::linalg::cr(1.0);
    }
    circ.propagate(&mut state);
    state.submatrix(0, 0, dn, dn)
}

/// Pushes the `W` layers of the raw form to the end, leaving controlled
/// `V_j = P_{j-1}† G_j† B_j P_{j-1}` and `Q = P_{K-1}`.
pub fn mcm_from_raw(raw: &MCMRaw) -> MCMCircuit {
    let mut p = raw.w[0].clone();
    let mut v = Vec::with_capacity(raw.g.len());
    for j in 0..raw.g.len() {
        let gp = raw.g[j].matmul(&p);
        v.push(gp.adjoint().matmul(&raw.b[j]).matmul(&p));
        p = raw.w[j + 1].matmul(&gp);
    }
    MCMCircuit { encodings: raw.encodings.clone(), m: raw.m, v, q: p }
}
