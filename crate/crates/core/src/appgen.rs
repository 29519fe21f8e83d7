//! Near-identity block-encoding sequences from product-formula Hamiltonian
//! simulation and time-marching of `dx/dt = A(t) x`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::block_encoding::{dilate_general, BlockEncoding, DeviationProfile, UNITARY_ATOL};
use crate::error::{Error, Result};
use crate::lcu::controlled;
use crate::linalg::{
    c, expi_hermitian, expm, hermitian_defect, is_unitary, opnorm, pauli_x, pauli_y, pauli_z, CMatrix, Tolerance,
};

/// Encodings together with their measured deviations and the constant `c`
/// for which every deviation should be at most `c / len`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sequence {
    pub encodings: Vec<BlockEncoding>,
    pub profile: DeviationProfile,
    pub c: f64,
}

impl Sequence {
    fn new(encodings: Vec<BlockEncoding>, c: f64) -> Self {
        let profile = DeviationProfile::measure(&encodings);
        Self { encodings, profile, c }
    }

    /// `c / len`.
    pub fn eta_limit(&self) -> f64 {
        self.c / self.encodings.len() as f64
    }

    /// `len · η_max`, the smallest `c` consistent with the measured profile.
    pub fn measured_c(&self) -> f64 {
        self.encodings.len() as f64 * self.profile.eta_max
    }
}

/// `|0⟩⟨0| ⊗ U + |1⟩⟨1| ⊗ I` as a one-ancilla encoding of `U`.
fn controlled_encoding(u: &CMatrix) -> Result<BlockEncoding> {
    let n = u.qubits().ok_or_else(|| Error::Dimension("step unitary must have power-of-two size".into()))?;
    // `controlled` puts `U` on the |1⟩ branch; swap so the corner is `U`.
    let cu = controlled(u);
    let d = u.rows();
    let swapped = CMatrix::from_fn(2 * d, 2 * d, |i, j| cu[((i + d) % (2 * d), (j + d) % (2 * d))]);
    BlockEncoding::new(swapped, 1, n)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrotterSpec {
    pub terms: Vec<CMatrix>,
    pub t: f64,
    pub k: usize,
}

impl TrotterSpec {
    pub fn new(terms: Vec<CMatrix>, t: f64, k: usize) -> Result<Self> {
        if terms.is_empty() || k == 0 {
            return Err(Error::InvalidArgument("need at least one term and K >= 1".into()));
        }
        if !t.is_finite() {
            return Err(Error::InvalidArgument(format!("t must be finite, got {t}")));
        }
        let dim = terms[0].rows();
        for (i, h) in terms.iter().enumerate() {
            if !h.is_square() || h.rows() != dim || h.qubits().is_none() {
                return Err(Error::Dimension(format!("term {i} is {}x{}", h.rows(), h.cols())));
            }
            let defect = hermitian_defect(h)?;
            if defect > 1e-10 {
                return Err(Error::NotHermitian(defect));
            }
            let norm = opnorm(h)?;
            if norm > 1.0 + 1e-10 {
                return Err(Error::NotSubnormalized(norm));
            }
        }
        Ok(Self { terms, t, k })
    }
}

/// First-order product formula: `K` rounds of `e^{-iH_i t/K}` in term
/// order, each as a controlled one-ancilla encoding.
///
/// `c = L · |t| · max‖H_i‖` for `L` terms, since `‖I - e^{-iHs}‖ ≤ ‖H‖|s|`.
pub fn trotter_sequence(spec: &TrotterSpec) -> Result<Sequence> {
    let dt = spec.t / spec.k as f64;
    let steps = spec
        .terms
        .iter()
        .map(|h| controlled_encoding(&expi_hermitian(h, -dt)?))
        .collect::<Result<Vec<_>>>()?;
    let mut encodings = Vec::with_capacity(spec.k * steps.len());
    for _ in 0..spec.k {
        encodings.extend(steps.iter().cloned());
    }
    let hmax = spec.terms.iter().map(|h| opnorm(h)).collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max);
    Ok(Sequence::new(encodings, spec.terms.len() as f64 * spec.t.abs() * hmax))
}

/// Default number of midpoint sub-steps per interval.
pub const DEFAULT_MICRO_STEPS: usize = 256;
pub const MIN_MICRO_STEPS: usize = 32;

pub type Generator = Arc<dyn Fn(f64) -> CMatrix + Send + Sync>;

#[derive(Clone)]
pub struct DysonSpec {
    pub a_of_t: Generator,
    pub lambda: f64,
    pub t_total: f64,
    pub k: usize,
    pub micro_steps: usize,
}

impl DysonSpec {
    pub fn new(a_of_t: Generator, lambda: f64, t_total: f64, k: usize, micro_steps: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("K must be at least 1".into()));
        }
        if micro_steps < MIN_MICRO_STEPS {
            return Err(Error::InvalidArgument(format!(
                "micro_steps must be at least {MIN_MICRO_STEPS}, got {micro_steps}"
            )));
        }
        if !(lambda >= 0.0) || !(t_total >= 0.0) || !lambda.is_finite() || !t_total.is_finite() {
            return Err(Error::InvalidArgument("lambda and T must be finite and non-negative".into()));
        }
        Ok(Self { a_of_t, lambda, t_total, k, micro_steps })
    }

    pub fn dt(&self) -> f64 {
        self.t_total / self.k as f64
    }
}

impl std::fmt::Debug for DysonSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DysonSpec")
            .field("lambda", &self.lambda)
            .field("t_total", &self.t_total)
            .field("k", &self.k)
            .field("micro_steps", &self.micro_steps)
            .finish()
    }
}

/// `Ξ = ∏ exp(A(t_mid) h)` over `[t0, t0 + Δt]`, later factors on the left.
fn propagate_interval(spec: &DysonSpec, t0: f64, micro_steps: usize) -> Result<CMatrix> {
    let h = spec.dt() / micro_steps as f64;
    let mut xi: Option<CMatrix> = None;
    for s in 0..micro_steps {
        let a = (spec.a_of_t)(t0 + (s as f64 + 0.5) * h);
        let norm = opnorm(&a)?;
        if norm > spec.lambda + 1e-8 {
            return Err(Error::InvalidArgument(format!(
                "‖A(t)‖ = {norm:.6e} exceeds lambda = {:.6e}",
                spec.lambda
            )));
        }
        let step = expm(&a.scale_real(h))?;
        xi = Some(match xi {
            None => step,
            Some(acc) => step.matmul(&acc),
        });
    }
    Ok(xi.expect("micro_steps >= 1"))
}

/// Interval propagators `Ξ_j` on the uniform grid.
pub fn dyson_propagators(spec: &DysonSpec, micro_steps: usize) -> Result<Vec<CMatrix>> {
    (0..spec.k)
        .into_par_iter()
        .map(|j| propagate_interval(spec, j as f64 * spec.dt(), micro_steps))
        .collect()
}

/// Time-marching encodings: controlled form when `Ξ_j` is unitary, else the
/// selector-normalized general dilation.
///
/// `c = K (e^{λΔt} - 1)`.
pub fn dyson_sequence(spec: &DysonSpec) -> Result<Sequence> {
    let encodings = dyson_propagators(spec, spec.micro_steps)?
        .iter()
        .map(|xi| {
            if is_unitary(xi, Tolerance::abs(UNITARY_ATOL))? {
                controlled_encoding(xi)
            } else {
                Ok(dilate_general(xi)?.normalize_selectors())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let c = spec.k as f64 * (spec.lambda * spec.dt()).exp_m1();
    Ok(Sequence::new(encodings, c))
}

/// Complex matrix in JSON as rows of `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JsonMatrix(pub Vec<Vec<[f64; 2]>>);

impl JsonMatrix {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let rows: Vec<Vec<_>> = self.0.iter().map(|r| r.iter().map(|&[re, im]| c(re, im)).collect()).collect();
        CMatrix::from_rows(&rows)
    }

    pub fn from_matrix(m: &CMatrix) -> Self {
        Self((0..m.rows()).map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect()).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> CMatrix {
        match self {
            Pauli::I => CMatrix::identity(2),
            Pauli::X => pauli_x(),
            Pauli::Y => pauli_y(),
            Pauli::Z => pauli_z(),
        }
    }
}

/// Named generator families for configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Family {
    /// `A(t) = M`.
    Constant { matrix: JsonMatrix },
    /// `A(t) = -i · scale · cos(ω t) · H`.
    Cosine { h: JsonMatrix, scale: f64, omega: f64 },
    /// `A(t) = -i (c1 cos(ω t) P1 + c2 sin(ω t) P2)`.
    PauliPair { first: Pauli, second: Pauli, c1: f64, c2: f64, omega: f64 },
}

impl Family {
    pub fn generator(&self) -> Result<Generator> {
        let minus_i = c(0.0, -1.0);
        Ok(match self.clone() {
            Family::Constant { matrix } => {
                let m = matrix.to_matrix()?;
                Arc::new(move |_| m.clone())
            }
            Family::Cosine { h, scale, omega } => {
                let h = h.to_matrix()?.scale(minus_i * scale);
                Arc::new(move |t| h.scale_real((omega * t).cos()))
            }
            Family::PauliPair { first, second, c1, c2, omega } => {
                let p1 = first.matrix().scale(minus_i * c1);
                let p2 = second.matrix().scale(minus_i * c2);
                Arc::new(move |t| &p1.scale_real((omega * t).cos()) + &p2.scale_real((omega * t).sin()))
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrotterConfig {
    pub terms: Vec<JsonMatrix>,
    pub t: f64,
    #[serde(rename = "K")]
    pub k: usize,
}

impl TrotterConfig {
    pub fn to_spec(&self) -> Result<TrotterSpec> {
        let terms = self.terms.iter().map(JsonMatrix::to_matrix).collect::<Result<Vec<_>>>()?;
        TrotterSpec::new(terms, self.t, self.k)
    }
}

fn default_micro_steps() -> usize {
    DEFAULT_MICRO_STEPS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DysonConfig {
    pub family: Family,
    pub lambda: f64,
    #[serde(rename = "T")]
    pub t_total: f64,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(default = "default_micro_steps")]
    pub micro_steps: usize,
}

impl DysonConfig {
    pub fn to_spec(&self) -> Result<DysonSpec> {
        DysonSpec::new(self.family.generator()?, self.lambda, self.t_total, self.k, self.micro_steps)
    }
}
