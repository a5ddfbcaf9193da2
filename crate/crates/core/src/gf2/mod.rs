//! Linear algebra over GF(2) on bit-packed storage.

mod bitvec;
mod matrix;
mod reduce;

pub use bitvec::BitVector;
pub use matrix::BinaryMatrix;
pub use reduce::{kernel_basis, row_reduce, sample_preimage, RowReduction};

/// Number of `n`-bit vectors, as a checked power of two.
pub fn space_size(n: usize) -> Option<usize> {
    1usize
        .checked_shl(n as u32)
        .filter(|_| n < usize::BITS as usize)
}
