//! Chebyshev approximation, QSP phase factors, and QSVT at matrix level.
//!
//! Phases use the W_x convention
//! `U_Φ(x) = e^{iφ₀Z} Π_j W(x) e^{iφ_jZ}` with
//! `W(x) = [[x, i√(1-x²)], [i√(1-x²), x]]`, and the solver targets
//! `Re⟨0|U_Φ(x)|0⟩`. The matrix-level circuit interleaves `U`, `U†` with
//! `e^{iφ(2Π-I)}`; phases are converted between the two pictures.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::block_encoding::BlockEncoding;
use crate::error::{Error, Result};
use crate::linalg::{c, cr, CMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    None,
}

impl Parity {
    pub fn of_degree(d: usize) -> Self {
        if d % 2 == 0 { Parity::Even } else { Parity::Odd }
    }
}

/// `Σ c_k T_k(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChebPoly {
    pub coeffs: Vec<f64>,
    pub parity: Parity,
    pub degree: usize,
}

impl ChebPoly {
    /// Trailing zeros are trimmed; parity is detected from the coefficients.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        let even = coeffs.iter().skip(1).step_by(2).all(|&x| x == 0.0);
        let odd = coeffs.iter().step_by(2).all(|&x| x == 0.0);
        let parity = match (even, odd) {
            (true, _) => Parity::Even,
            (false, true) => Parity::Odd,
            _ => Parity::None,
        };
        let degree = coeffs.len() - 1;
        Self { coeffs, parity, degree }
    }

    /// `T_d`.
    pub fn chebyshev(d: usize) -> Self {
        let mut coeffs = vec![0.0; d + 1];
        coeffs[d] = 1.0;
        Self::new(coeffs)
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        let (mut b1, mut b2) = (0.0, 0.0);
        for &ck in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * x * b1 - b2 + ck;
            b2 = b1;
            b1 = b0;
        }
        x * b1 - b2 + self.coeffs[0]
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|&x| x * s).collect())
    }

    /// Max of `|p|` over `points` equispaced samples of `[-1, 1]` plus the
    /// Chebyshev extrema of degree `4·deg`.
    pub fn sup_norm(&self, points: usize) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..=points {
            let x = -1.0 + 2.0 * i as f64 / points as f64;
            m = m.max(self.eval(x).abs());
        }
        let k = 4 * self.degree.max(1);
        for j in 0..=k {
            m = m.max(self.eval((PI * j as f64 / k as f64).cos()).abs());
        }
        m
    }
}

/// `T_0(x), …, T_d(x)`.
fn chebyshev_values(x: f64, d: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(d + 1);
    t.push(1.0);
    if d >= 1 {
        t.push(x);
    }
    for k in 2..=d {
        let v = 2.0 * x * t[k - 1] - t[k - 2];
        t.push(v);
    }
    t
}

/// Largest degree searched by [`approx_half_sqrt`].
pub const DEGREE_CAP: usize = 512;

/// Grid size for the sup-norm acceptance check.
const CHECK_POINTS: usize = 10_000;

/// Weighted least-squares fit of `½√x` on `[delta, 1]` in the even
/// Chebyshev basis. Points in the gap `[0, delta)` carry a low-weight
/// C¹ continuation so the polynomial stays tame there.
fn fit_half_sqrt(delta: f64, d: usize) -> ChebPoly {
    let m = (8 * d).max(400);
    let g = (2 * d).max(50);
    let gap_weight = 1e-3;
    let mut xs = Vec::with_capacity(m + g);
    let mut ys = Vec::with_capacity(m + g);
    let mut ws = Vec::with_capacity(m + g);
    for i in 0..m {
        let t = (PI * (i as f64 + 0.5) / m as f64).cos();
        let x = (delta + 1.0) / 2.0 + (1.0 - delta) / 2.0 * t;
        xs.push(x);
        ys.push(0.5 * x.sqrt());
        ws.push(1.0);
    }
    let sd = delta.sqrt();
    for i in 0..g {
        let x = delta * (PI * (i as f64 + 0.5) / (2 * g) as f64).cos().abs();
        xs.push(x);
        ys.push(0.5 * sd * (0.75 + x * x / (4.0 * delta * delta)));
        ws.push(gap_weight);
    }
    let nb = d / 2 + 1;
    let a = DMatrix::from_fn(xs.len(), nb, |i, j| ws[i] * chebyshev_values(xs[i], 2 * j)[2 * j]);
    let b = DVector::from_fn(xs.len(), |i, _| ws[i] * ys[i]);
    let sol = a.svd(true, true).solve(&b, 1e-14).expect("SVD computed with U and V");
    let mut coeffs = vec![0.0; d + 1];
    for j in 0..nb {
        coeffs[2 * j] = sol[j];
    }
    ChebPoly::new(coeffs)
}

/// Max `|P(x) - ½√x|` on a uniform grid of `[delta, 1]`.
pub fn half_sqrt_error(p: &ChebPoly, delta: f64) -> f64 {
    (0..=CHECK_POINTS)
        .map(|i| {
            let x = delta + (1.0 - delta) * i as f64 / CHECK_POINTS as f64;
            (p.eval(x) - 0.5 * x.sqrt()).abs()
        })
        .fold(0.0, f64::max)
}

/// Even polynomial with `‖P - ½√x‖_[δ,1] ≤ η` and `‖P‖_[-1,1] ≤ 1`, of the
/// smallest degree the fit finds.
pub fn approx_half_sqrt(delta: f64, eta: f64) -> Result<ChebPoly> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1/2], got {delta}")));
    }
    if !(eta > 0.0 && eta <= 0.5) {
        return Err(Error::InvalidArgument(format!("eta must lie in (0, 1/2], got {eta}")));
    }
    let mut best = f64::INFINITY;
    let mut d = 0;
    while d <= DEGREE_CAP {
        let p = fit_half_sqrt(delta, d);
        let err = half_sqrt_error(&p, delta);
        best = best.min(err);
        if err <= eta && p.sup_norm(2 * CHECK_POINTS) <= 1.0 {
            return Ok(p);
        }
        d += if d < 64 { 2 } else { 16 };
    }
    Err(Error::DegreeCap { eta, cap: DEGREE_CAP, achieved: best })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseFactors {
    pub degree: usize,
    pub parity: Parity,
    pub convention: String,
    pub phases: Vec<f64>,
    pub residual: f64,
}

pub const CONVENTION: &str = "Wx";

impl PhaseFactors {
    pub fn new(phases: Vec<f64>, residual: f64) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::InvalidArgument("phase list is empty".into()));
        }
        let degree = phases.len() - 1;
        Ok(Self { degree, parity: Parity::of_degree(degree), convention: CONVENTION.into(), phases, residual })
    }

    /// All-zero phases: `⟨0|U|0⟩ = T_d(x)`.
    pub fn zeros(d: usize) -> Self {
        Self::new(vec![0.0; d + 1], 0.0).unwrap()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(s)?;
        if p.phases.len() != p.degree + 1 {
            return Err(Error::Parse(format!("{} phases for degree {}", p.phases.len(), p.degree)));
        }
        Ok(p)
    }
}

/// 2×2 complex matrix in row-major order.
#[derive(Clone, Copy)]
struct M2([C64; 4]);

impl M2 {
    fn mul(&self, o: &M2) -> M2 {
        let (a, b) = (&self.0, &o.0);
        M2([
            a[0] * b[0] + a[1] * b[2],
            a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3],
        ])
    }

    fn rz(phi: f64) -> M2 {
        let z = C64::from_polar(1.0, phi);
        M2([z, cr(0.0), cr(0.0), z.conj()])
    }

    fn w(x: f64) -> M2 {
        let s = (1.0 - x * x).max(0.0).sqrt();
        M2([cr(x), c(0.0, s), c(0.0, s), cr(x)])
    }

    fn identity() -> M2 {
        M2([cr(1.0), cr(0.0), cr(0.0), cr(1.0)])
    }
}

fn qsp_product(phases: &[f64], x: f64) -> M2 {
    let w = M2::w(x);
    let mut u = M2::rz(phases[0]);
    for &p in &phases[1..] {
        u = u.mul(&w).mul(&M2::rz(p));
    }
    u
}

/// `U_Φ(x)`.
pub fn qsp_eval(phi: &PhaseFactors, x: f64) -> CMatrix {
    let u = qsp_product(&phi.phases, x.clamp(-1.0, 1.0));
    CMatrix::from_vec(2, 2, u.0.to_vec()).expect("2x2")
}

/// `Re⟨0|U_Φ(x)|0⟩`.
pub fn qsp_response(phases: &[f64], x: f64) -> f64 {
    qsp_product(phases, x).0[0].re
}

/// Response and its gradient in each full phase, via prefix/suffix products.
fn response_and_grad(phases: &[f64], x: f64) -> (f64, Vec<f64>) {
    let d = phases.len() - 1;
    let w = M2::w(x);
    // prefix[j] = M0 W M1 … W Mj ; suffix[j] = W M_{j+1} … W M_d.
    let mut prefix = Vec::with_capacity(d + 1);
    prefix.push(M2::rz(phases[0]));
    for j in 1..=d {
        let p = prefix[j - 1].mul(&w).mul(&M2::rz(phases[j]));
        prefix.push(p);
    }
    let mut suffix = vec![M2::identity(); d + 1];
    for j in (0..d).rev() {
        suffix[j] = w.mul(&M2::rz(phases[j + 1])).mul(&suffix[j + 1]);
    }
    let iz = M2([c(0.0, 1.0), cr(0.0), cr(0.0), c(0.0, -1.0)]);
    let grad = (0..=d).map(|j| prefix[j].mul(&iz).mul(&suffix[j]).0[0].re).collect();
    (prefix[d].0[0].re, grad)
}

/// Number of independent phases in a symmetric sequence of degree `d`.
fn reduced_len(d: usize) -> usize {
    (d + 2) / 2
}

fn full_phases(reduced: &[f64], d: usize) -> Vec<f64> {
    let mut phi = vec![0.0; d + 1];
    for (j, &r) in reduced.iter().enumerate() {
        phi[j] = r;
        phi[d - j] = r;
    }
    phi[0] += FRAC_PI_4;
    phi[d] += FRAC_PI_4;
    phi
}

/// Positive Chebyshev nodes of degree `2·k`.
fn solver_nodes(k: usize) -> Vec<f64> {
    (1..=k).map(|j| (PI * (2 * j - 1) as f64 / (4 * k) as f64).cos()).collect()
}

/// Max reconstruction error at `count` Chebyshev nodes of `[-1, 1]`.
fn reconstruction_error(phases: &[f64], p: &ChebPoly, count: usize) -> f64 {
    (0..count)
        .map(|j| {
            let x = (PI * (j as f64 + 0.5) / count as f64).cos();
            (qsp_response(phases, x) - p.eval(x)).abs()
        })
        .fold(0.0, f64::max)
}

const SOLVER_TOL: f64 = 1e-8;
const SOLVER_RESTARTS: usize = 10;

/// Damped Newton on the reduced symmetric phases, matching the target at
/// `d̃` positive Chebyshev nodes (which fixes a parity polynomial).
fn newton(p: &ChebPoly, start: Vec<f64>) -> (Vec<f64>, f64) {
    let d = p.degree;
    let nodes = solver_nodes(start.len());
    let target: Vec<f64> = nodes.iter().map(|&x| p.eval(x)).collect();
    let k = start.len();
    let residual = |red: &[f64]| -> Vec<f64> {
        let phi = full_phases(red, d);
        nodes.iter().zip(&target).map(|(&x, &t)| qsp_response(&phi, x) - t).collect()
    };
    let norm = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut red = start;
    let mut r = residual(&red);
    let mut rn = norm(&r);
    for _ in 0..100 {
        if rn < 1e-14 {
            break;
        }
        let phi = full_phases(&red, d);
        let mut jac = DMatrix::<f64>::zeros(k, k);
        for (i, &x) in nodes.iter().enumerate() {
            let (_, g) = response_and_grad(&phi, x);
            for j in 0..k {
                jac[(i, j)] += g[j];
                if d - j != j {
                    jac[(i, j)] += g[d - j];
                }
            }
        }
        let rhs = DVector::from_column_slice(&r);
        let Some(step) = jac.clone().lu().solve(&rhs) else { break };
        let mut t = 1.0;
        let mut improved = false;
        while t > 1e-6 {
            let cand: Vec<f64> = red.iter().zip(step.iter()).map(|(a, s)| a - t * s).collect();
            let rc = residual(&cand);
            let cn = norm(&rc);
            if cn < rn {
                red = cand;
                r = rc;
                rn = cn;
                improved = true;
                break;
            }
            t /= 2.0;
        }
        if !improved {
            break;
        }
    }
    (red, rn)
}

/// Symmetric W_x phases whose response `Re⟨0|U_Φ(x)|0⟩` equals `p`.
pub fn solve_phases(p: &ChebPoly) -> Result<PhaseFactors> {
    let d = p.degree;
    let check = (2 * d + 2).max(100);
    if p.parity == Parity::None {
        return Err(Error::Parity("polynomial has no definite parity".into()));
    }
    // ±T_d: exact phases.
    let lead = p.coeffs[d];
    let pure = p.coeffs[..d].iter().all(|&x| x.abs() < 1e-15) && (lead.abs() - 1.0).abs() < 1e-12;
    if pure {
        let mut phases = vec![0.0; d + 1];
        if lead < 0.0 {
            if d == 0 {
                phases[0] = PI;
            } else {
                phases[0] = FRAC_PI_2;
                phases[d] = FRAC_PI_2;
            }
        }
        let residual = reconstruction_error(&phases, p, check);
        return PhaseFactors::new(phases, residual);
    }
    let sup = p.sup_norm(4000);
    if sup > 1.0 - 1e-6 {
        return Err(Error::InvalidArgument(format!(
            "sup-norm {sup:.9} exceeds 1 - 1e-6; rescale the polynomial first"
        )));
    }
    if d == 0 {
        let phases = vec![p.coeffs[0].acos()];
        let residual = reconstruction_error(&phases, p, check);
        return PhaseFactors::new(phases, residual);
    }
    let k = reduced_len(d);
    let mut rng = ChaCha20Rng::seed_from_u64(0x5eed ^ d as u64);
    let mut best = (Vec::new(), f64::INFINITY);
    for attempt in 0..=SOLVER_RESTARTS {
        let start: Vec<f64> = if attempt == 0 {
            vec![0.0; k]
        } else {
            (0..k).map(|_| 0.1 * (rng.random::<f64>() - 0.5)).collect()
        };
        let (red, _) = newton(p, start);
        let phases = full_phases(&red, d);
        let err = reconstruction_error(&phases, p, check);
        if err < best.1 {
            best = (phases, err);
        }
        if best.1 <= SOLVER_TOL {
            break;
        }
    }
    if best.1 > SOLVER_TOL {
        return Err(Error::NoConvergence(best.1));
    }
    PhaseFactors::new(best.0, best.1)
}

/// Projector-controlled phase layers of the matrix-level circuit, from W_x
/// phases.
fn reflection_phases(wx: &[f64]) -> Vec<f64> {
    let d = wx.len() - 1;
    if d == 0 {
        return wx.to_vec();
    }
    wx.iter()
        .enumerate()
        .map(|(j, &p)| if j == 0 || j == d { p - FRAC_PI_4 } else { p - FRAC_PI_2 })
        .collect()
}

/// `diag(e^{iφ s_k}) · M`, scaling rows.
fn phase_rows(m: &mut CMatrix, phi: f64, signs: &[f64]) {
    let cols = m.cols();
    let (ep, em) = (C64::from_polar(1.0, phi), C64::from_polar(1.0, -phi));
    let data = m.data_mut();
    for (i, &s) in signs.iter().enumerate() {
        let z = if s > 0.0 { ep } else { em };
        for v in &mut data[i * cols..(i + 1) * cols] {
            *v *= z;
        }
    }
}

/// The QSVT sequence for several phase lists that share the same `U`, `U†`
/// calls. Returns one unitary per list and the number of oracle uses.
fn qsvt_products(phase_sets: &[Vec<f64>], be: &BlockEncoding) -> (Vec<CMatrix>, u64) {
    let d = phase_sets[0].len() - 1;
    let signs = crate::lcu::projector_signs(be.ancillas, be.system);
    let u = &be.unitary;
    let uh = u.adjoint();
    let refl: Vec<Vec<f64>> = phase_sets.iter().map(|p| reflection_phases(p)).collect();
    let global = c(0.0, 1.0).powi(d as i32);
    let mut acc: Vec<CMatrix> = refl
        .iter()
        .map(|r| {
            let mut m = CMatrix::identity(be.dim());
            phase_rows(&mut m, r[d], &signs);
            m
        })
        .collect();
    let mut uses = 0u64;
    for j in (1..=d).rev() {
        let x = if (d - j) % 2 == 0 { u } else { &uh };
        uses += 1;
        for (m, r) in acc.iter_mut().zip(&refl) {
            *m = x.matmul(m);
            phase_rows(m, r[j - 1], &signs);
        }
    }
    (acc.into_iter().map(|m| m.scale(global)).collect(), uses)
}

/// QSVT with the real-part construction: one control qubit selects `Φ` or
/// `-Φ` between Hadamards, so the corner is `(Re P)` of the singular values.
pub(crate) fn qsvt_apply_counted(phi: &PhaseFactors, be: &BlockEncoding) -> Result<(BlockEncoding, u64)> {
    if phi.phases.len() != phi.degree + 1 {
        return Err(Error::InvalidArgument("phase count does not match degree".into()));
    }
    if phi.parity != Parity::of_degree(phi.degree) {
        return Err(Error::Parity(format!("degree {} tagged {:?}", phi.degree, phi.parity)));
    }
    let be = be.normalize_selectors();
    let neg: Vec<f64> = phi.phases.iter().map(|p| -p).collect();
    let (mats, uses) = qsvt_products(&[phi.phases.clone(), neg], &be);
    let sum = (&mats[0] + &mats[1]).scale_real(0.5);
    let diff = (&mats[0] - &mats[1]).scale_real(0.5);
    let dim = be.dim();
    let mut w = CMatrix::zeros(2 * dim, 2 * dim);
    w.set_block(0, 0, &sum);
    w.set_block(0, dim, &diff);
    w.set_block(dim, 0, &diff);
    w.set_block(dim, dim, &sum);
    Ok((BlockEncoding::assemble(w, be.ancillas + 1, be.system)?, uses))
}

/// Encoding (one extra ancilla) whose corner is `P` applied to the singular
/// values of `be`'s corner.
pub fn qsvt_apply(phi: &PhaseFactors, be: &BlockEncoding) -> Result<BlockEncoding> {
    Ok(qsvt_apply_counted(phi, be)?.0)
}

/// Degree-`d` Chebyshev circuit (zero W_x phases, no extra ancilla): the
/// corner becomes `T_d` of the singular values. Returns the oracle-use count.
pub fn chebyshev_circuit(be: &BlockEncoding, d: usize) -> Result<(BlockEncoding, u64)> {
    if d == 0 {
        return Err(Error::InvalidArgument("degree must be positive".into()));
    }
    let be = be.normalize_selectors();
    let (mut mats, uses) = qsvt_products(&[vec![0.0; d + 1]], &be);
    Ok((BlockEncoding::assemble(mats.remove(0), be.ancillas, be.system)?, uses))
}
