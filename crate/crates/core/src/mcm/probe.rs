//! Numerical search for an exact compression gadget with too few
//! measurement qubits. A positive best residual is evidence, not proof.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gadgets::ceil_log2;
use super::oracle::block_product;
use super::{common_encodings, embe_block, MCMCircuit};
use crate::block_encoding::BlockEncoding;
use crate::error::{Error, Result};
use crate::linalg::{c, expi_hermitian, opnorm_diff, CMatrix};
use crate::optim::{levenberg_marquardt, nelder_mead, LmOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeStats {
    pub best: f64,
    pub worst: f64,
    pub mean: f64,
    /// Final residual of each restart, in restart order.
    pub residuals: Vec<f64>,
}

/// `e^{iG}` with `G` Hermitian, built from `d²` real coordinates: the
/// diagonal, then real and imaginary parts of the upper triangle.
fn unitary_from_params(theta: &[f64], d: usize) -> CMatrix {
    let mut g = CMatrix::zeros(d, d);
    let mut k = 0;
    for i in 0..d {
        g[(i, i)] = c(theta[k], 0.0);
        k += 1;
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let z = c(theta[k], theta[k + 1]);
            g[(i, j)] = z;
            g[(j, i)] = z.conj();
            k += 2;
        }
    }
    expi_hermitian(&g, 1.0).expect("generator is Hermitian by construction")
}

struct Problem {
    encodings: Vec<BlockEncoding>,
    m: usize,
    target: CMatrix,
}

impl Problem {
    fn circuit(&self, theta: &[f64]) -> MCMCircuit {
        let d = 1usize << self.m;
        let per = d * d;
        let mut us: Vec<CMatrix> = theta.chunks(per).map(|t| unitary_from_params(t, d)).collect();
        let q = us.pop().expect("at least one unitary");
        MCMCircuit { encodings: self.encodings.clone(), m: self.m, v: us, q }
    }

    fn residuals(&self, theta: &[f64]) -> Vec<f64> {
        let diff = &embe_block(&self.circuit(theta)) - &self.target;
        diff.data().iter().flat_map(|z| [z.re, z.im]).collect()
    }

    fn opnorm_residual(&self, theta: &[f64]) -> f64 {
        opnorm_diff(&embe_block(&self.circuit(theta)), &self.target).expect("non-empty")
    }

    fn run(&self, seed: u64, restart: usize) -> f64 {
        let d = 1usize << self.m;
        let params = self.encodings.len() * d * d;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(restart as u64);
        let x0: Vec<f64> = (0..params).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect();
        let (x, _) = levenberg_marquardt(|t| self.residuals(t), x0, LmOptions::default());
        let before = self.opnorm_residual(&x);
        let (_, after) = nelder_mead(|t| self.opnorm_residual(t), x, 1e-3, 200 * params);
        before.min(after)
    }
}

/// Runs `restarts` independent local searches and reports their residuals.
pub fn lower_bound_probe_stats(
    encodings: &[BlockEncoding],
    m: usize,
    restarts: usize,
    seed: u64,
) -> Result<ProbeStats> {
    let (encodings, _, _) = common_encodings(encodings)?;
    let k = encodings.len();
    if !(2..=4).contains(&k) {
        return Err(Error::InvalidArgument(format!("probe supports 2 <= K <= 4, got {k}")));
    }
    if m == 0 || m > 2 || m > ceil_log2(k) {
        return Err(Error::InvalidArgument(format!(
            "probe needs 1 <= m <= min(2, ceil(log2 K) = {}), got {m}",
            ceil_log2(k)
        )));
    }
    if restarts == 0 {
        return Err(Error::InvalidArgument("at least one restart is required".into()));
    }
    let target = block_product(&encodings)?;
    let problem = Problem { encodings, m, target };
    let residuals: Vec<f64> = (0..restarts).into_par_iter().map(|r| problem.run(seed, r)).collect();
    let best = residuals.iter().cloned().fold(f64::INFINITY, f64::min);
    let worst = residuals.iter().cloned().fold(0.0, f64::max);
    let mean = residuals.iter().sum::<f64>() / restarts as f64;
    Ok(ProbeStats { best, worst, mean, residuals })
}

/// Best residual `min ‖A_K⋯A_1 - ⟨0^{m+a}|U(V, Q)|0^{m+a}⟩‖` found.
pub fn lower_bound_probe(encodings: &[BlockEncoding], m: usize, restarts: usize, seed: u64) -> Result<f64> {
    Ok(lower_bound_probe_stats(encodings, m, restarts, seed)?.best)
}
