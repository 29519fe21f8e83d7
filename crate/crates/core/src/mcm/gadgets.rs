use super::MCMCircuit;
use crate::block_encoding::BlockEncoding;
use crate::error::{Error, Result};
use crate::linalg::{cr, kron, pauli_x, CMatrix};

/// Largest register for [`add_unitary`].
pub const ADD_MAX_QUBITS: usize = 6;

/// Cyclic increment `|x⟩ ↦ |x + 1 mod 2^p⟩`.
pub fn add_unitary(p: usize) -> Result<CMatrix> {
    if p == 0 || p > ADD_MAX_QUBITS {
        return Err(Error::InvalidArgument(format!("ADD needs 1 <= p <= {ADD_MAX_QUBITS}, got {p}")));
    }
    let d = 1usize << p;
    let mut m = CMatrix::zeros(d, d);
    for x in 0..d {
        m[((x + 1) % d, x)] = cr(1.0);
    }
    Ok(m)
}

fn require_pair(encodings: &[BlockEncoding]) -> Result<usize> {
    if encodings.len() < 2 {
        return Err(Error::InvalidArgument(format!("gadgets need K >= 2, got {}", encodings.len())));
    }
    Ok(encodings.len())
}

/// `ceil(log2 K)` for `K >= 1`.
pub fn ceil_log2(k: usize) -> usize {
    (usize::BITS - (k.max(1) - 1).leading_zeros()) as usize
}

/// One measurement qubit per interleaving; `V_i` flips wire `i`.
pub fn gadget_naive(encodings: &[BlockEncoding]) -> Result<MCMCircuit> {
    let k = require_pair(encodings)?;
    let m = k - 1;
    let v = (0..m)
        .map(|i| {
            let left = CMatrix::identity(1 << i);
            let right = CMatrix::identity(1 << (m - 1 - i));
            kron(&kron(&left, &pauli_x()), &right)
        })
        .collect();
    MCMCircuit::new(encodings.to_vec(), m, v, CMatrix::identity(1 << m))
}

/// A `2^m`-periodic counter of bad outcomes with `m = p`.
pub fn gadget_pmacg(encodings: &[BlockEncoding], p: usize) -> Result<MCMCircuit> {
    let k = require_pair(encodings)?;
    let add = add_unitary(p)?;
    MCMCircuit::new(encodings.to_vec(), p, vec![add; k - 1], CMatrix::identity(1 << p))
}

/// Exact counter with `m = ceil(log2 K)`, enough that it never wraps.
pub fn gadget_lw19(encodings: &[BlockEncoding]) -> Result<MCMCircuit> {
    let k = require_pair(encodings)?;
    gadget_pmacg(encodings, ceil_log2(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block_encoding::random_block_encoding;

    #[test]
    fn ceil_log2_values() {
        let got: Vec<_> = (1..=9).map(ceil_log2).collect();
        assert_eq!(got, vec![0, 1, 2, 2, 3, 3, 3, 3, 4]);
    }

    #[test]
    fn add_examples() {
        let a1 = add_unitary(1).unwrap();
        assert_eq!(a1.col(1), vec![cr(1.0), cr(0.0)]);
        let a2 = add_unitary(2).unwrap();
        assert_eq!(a2.col(3), vec![cr(1.0), cr(0.0), cr(0.0), cr(0.0)]);
        assert!(add_unitary(0).is_err() && add_unitary(7).is_err());
    }

    #[test]
    fn add_has_exact_order() {
        for p in 1..=4 {
            let a = add_unitary(p).unwrap();
            let d = 1usize << p;
            let mut pow = CMatrix::identity(d);
            for j in 1..=d {
                pow = a.matmul(&pow);
                let is_id = pow.max_abs_diff(&CMatrix::identity(d)) < 1e-15;
                assert_eq!(is_id, j == d, "p={p} j={j}");
            }
        }
    }

    #[test]
    fn gadget_shapes() {
        let encs: Vec<_> = (0..5).map(|s| random_block_encoding(1, 1, s).unwrap()).collect();
        assert_eq!(gadget_naive(&encs[..4]).unwrap().m, 3);
        assert_eq!(gadget_lw19(&encs[..4]).unwrap().m, 2);
        assert_eq!(gadget_lw19(&encs).unwrap().m, 3);
        let lw = gadget_lw19(&encs[..2]).unwrap();
        assert_eq!(lw, gadget_naive(&encs[..2]).unwrap());
        assert_eq!(lw, gadget_pmacg(&encs[..2], 1).unwrap());
        assert_eq!(gadget_lw19(&encs[..4]).unwrap(), gadget_pmacg(&encs[..4], 2).unwrap());
        assert!(gadget_naive(&encs[..1]).is_err());
        assert!(gadget_pmacg(&encs, 0).is_err());
    }
}
