//! Dense-unitary simulation of block-encoding constructions: single-ancilla
//! uncomputation via QSVT and LCU, multiple-coherent-measurement circuits
//! with exact and approximate compression gadgets, amplitude amplification,
//! and near-identity sequence generators.

pub mod appgen;
pub mod block_encoding;
pub mod cli;
pub mod error;
pub mod lcu;
pub mod linalg;
pub mod mcm;
pub mod oaa;
pub mod optim;
pub mod qsp;
pub mod report;
pub mod uncompute;

pub use block_encoding::{BlockEncoding, DeviationProfile};
pub use error::{Error, Result};
pub use linalg::{Bits, CMatrix, Tolerance, C64};
