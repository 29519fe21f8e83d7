use super::{common_encodings, embe_block, MCMCircuit};
use crate::block_encoding::BlockEncoding;
use crate::error::{Error, Result};
use crate::linalg::{cr, opnorm_diff, Bits, CMatrix, C64};

/// Largest `K` summed by explicit bitstring enumeration in [`sx_sum`].
pub const ENUMERATION_MAX_K: usize = 16;

/// `A_K ⋯ A_1` from the unscaled corners of selector-normalized encodings.
pub fn block_product(encodings: &[BlockEncoding]) -> Result<CMatrix> {
    let (encs, _, _) = common_encodings(encodings)?;
    let mut acc = encs[0].block();
    for be in &encs[1..] {
        acc = be.block().matmul(&acc);
    }
    Ok(acc)
}

/// Columns `|0^a⟩ ⊗ I_n`.
fn zero_columns(a: usize, n: usize) -> CMatrix {
    let dn = 1usize << n;
    let mut s = CMatrix::zeros(1 << (a + n), dn);
    for j in 0..dn {
        s[(j, j)] = cr(1.0);
    }
    s
}

/// Keeps rows in the `0^a` block (`bad = false`) or outside it.
fn project(state: &mut CMatrix, dn: usize, bad: bool) {
    let cols = state.cols();
    let range = if bad { 0..dn } else { dn..state.rows() };
    for r in range {
        for c in 0..cols {
            state[(r, c)] = C64::default();
        }
    }
}

/// `S_x = ⟨0^a| U_K Π_{x_{K-1}} U_{K-1} ⋯ Π_{x_1} U_1 |0^a⟩`, where `Π_0`
/// keeps `0^a` and `Π_1` keeps its complement.
///
/// The string is in operator order: its first character is `x_{K-1}`.
pub fn bad_sequence_oracle(encodings: &[BlockEncoding], x: &Bits) -> Result<CMatrix> {
    let (encs, a, n) = common_encodings(encodings)?;
    let k = encs.len();
    if x.len() + 1 != k {
        return Err(Error::Dimension(format!("bitstring of length {} for K = {k}", x.len())));
    }
    let dn = 1usize << n;
    let mut state = encs[0].unitary.matmul(&zero_columns(a, n));
    for i in 1..k {
        project(&mut state, dn, x.get(k - 1 - i));
        state = encs[i].unitary.matmul(&state);
    }
    Ok(state.submatrix(0, 0, dn, dn))
}

/// Next bitmask with the same popcount.
fn next_same_weight(v: u64) -> u64 {
    let t = v | (v - 1);
    (t + 1) | (((!t & (t + 1)) - 1) >> (v.trailing_zeros() + 1))
}

fn check_period(p: usize) -> Result<usize> {
    if p == 0 || p > 16 {
        return Err(Error::InvalidArgument(format!("p must be in 1..=16, got {p}")));
    }
    Ok(1usize << p)
}

/// `Σ S_x` over nonzero `x` with `|x| ≡ 0 mod 2^p`, by enumerating each
/// qualifying Hamming weight.
pub fn sx_sum_enumerate(encodings: &[BlockEncoding], p: usize) -> Result<CMatrix> {
    let period = check_period(p)?;
    let (encs, _, n) = common_encodings(encodings)?;
    let k = encs.len();
    if k > ENUMERATION_MAX_K {
        return Err(Error::InvalidArgument(format!(
            "enumeration is capped at K = {ENUMERATION_MAX_K}, got {k}"
        )));
    }
    let len = k - 1;
    let dn = 1usize << n;
    let mut total = CMatrix::zeros(dn, dn);
    let mut w = period;
    while w <= len {
        let mut mask: u64 = (1u64 << w) - 1;
        let end = 1u64 << len;
        while mask < end {
            let x = Bits::from_index(mask as usize, len);
            total += &bad_sequence_oracle(&encs, &x)?;
            mask = next_same_weight(mask);
        }
        w += period;
    }
    Ok(total)
}

/// The same sum, grouping partial products by exact Hamming weight so the
/// cost is polynomial in `K`.
pub fn sx_sum_by_weight(encodings: &[BlockEncoding], p: usize) -> Result<CMatrix> {
    let period = check_period(p)?;
    let (encs, a, n) = common_encodings(encodings)?;
    let k = encs.len();
    let dn = 1usize << n;
    let mut by_weight = vec![encs[0].unitary.matmul(&zero_columns(a, n))];
    for be in &encs[1..] {
        let mut next = Vec::with_capacity(by_weight.len() + 1);
        for w in 0..=by_weight.len() {
            let mut s = CMatrix::zeros(1 << (a + n), dn);
            if w < by_weight.len() {
                let mut good = by_weight[w].clone();
                project(&mut good, dn, false);
                s += &good;
            }
            if w > 0 {
                let mut bad = by_weight[w - 1].clone();
                project(&mut bad, dn, true);
                s += &bad;
            }
            next.push(be.unitary.matmul(&s));
        }
        by_weight = next;
    }
    let mut total = CMatrix::zeros(dn, dn);
    let mut w = period;
    while w < k {
        total += &by_weight[w].submatrix(0, 0, dn, dn);
        w += period;
    }
    Ok(total)
}

/// Enumeration up to [`ENUMERATION_MAX_K`], weight grouping above it.
pub fn sx_sum(encodings: &[BlockEncoding], p: usize) -> Result<CMatrix> {
    if encodings.len() <= ENUMERATION_MAX_K {
        sx_sum_enumerate(encodings, p)
    } else {
        sx_sum_by_weight(encodings, p)
    }
}

/// `‖target - ⟨0^{m+a}| U |0^{m+a}⟩‖`.
pub fn gadget_error_exact(circ: &MCMCircuit, target: &CMatrix) -> Result<f64> {
    let dn = 1usize << circ.system();
    if target.rows() != dn || target.cols() != dn {
        return Err(Error::Dimension(format!(
            "target is {}x{}, system needs {dn}x{dn}",
            target.rows(),
            target.cols()
        )));
    }
    opnorm_diff(target, &embe_block(circ))
}
