use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::bitvec::{parity_and, words_for, BitVector, WORD_BITS};
use crate::error::{check_len, Error, Result};
use crate::par;

/// Rows times words below which row loops stay sequential even with the
/// `parallel` feature; spawning tasks costs more than the XORs.
pub(crate) const PAR_MIN_WORDS: usize = 1 << 14;

/// A dense matrix over GF(2), stored row-major with each row packed into
/// 64-bit words (bit `j` of a row in word `j / 64`, position `j % 64`).
#[derive(Clone)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
    toeplitz_seed: Option<BitVector>,
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
            toeplitz_seed: None,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: &[BitVector]) -> Result<Self> {
        let cols = rows.first().map_or(0, BitVector::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            check_len("matrix row", cols, row.len())?;
            m.row_words_mut(i).copy_from_slice(row.words());
        }
        Ok(m)
    }

    /// Rows given as `0`/`1` strings, e.g. `["101", "011"]`.
    pub fn from_bit_rows(rows: &[&str]) -> Result<Self> {
        let parsed = rows
            .iter()
            .map(|r| r.parse::<BitVector>())
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(&parsed)
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let rows_v: Vec<BitVector> = (0..rows).map(|_| BitVector::random(cols, rng)).collect();
        let mut m = Self::zeros(rows, cols);
        for (i, r) in rows_v.iter().enumerate() {
            m.row_words_mut(i).copy_from_slice(r.words());
        }
        m
    }

    /// Toeplitz matrix with `A[i][j] = seed[i - j + n - 1]`.
    ///
    /// Row 0 reads `seed[n-1], seed[n-2], ..., seed[0]`; column 0 reads
    /// `seed[n-1], ..., seed[n+n_pa-2]`. Every diagonal is constant.
    pub fn toeplitz(seed: &BitVector, n_pa: usize, n: usize) -> Result<Self> {
        let expected = (n + n_pa).saturating_sub(1);
        if n == 0 || n_pa == 0 || seed.len() != expected {
            return Err(Error::InvalidSeedLength {
                expected,
                found: seed.len(),
            });
        }
        let mut m = Self::zeros(n_pa, n);
        let stride = m.stride;
        let build = |i: usize, row: &mut [u64]| {
            for j in 0..n {
                if seed.get(i + n - 1 - j) {
                    row[j / WORD_BITS] |= 1 << (j % WORD_BITS);
                }
            }
        };
        if n_pa * stride >= PAR_MIN_WORDS {
            par::for_each_chunk_mut(&mut m.data, stride, build);
        } else {
            m.data
                .chunks_mut(stride)
                .enumerate()
                .for_each(|(i, r)| build(i, r));
        }
        m.toeplitz_seed = Some(seed.clone());
        Ok(m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub(crate) fn stride(&self) -> usize {
        self.stride
    }

    pub fn toeplitz_seed(&self) -> Option<&BitVector> {
        self.toeplitz_seed.as_ref()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i},{j}) out of range"
        );
        (self.data[i * self.stride + j / WORD_BITS] >> (j % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, bit: bool) {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i},{j}) out of range"
        );
        let w = &mut self.data[i * self.stride + j / WORD_BITS];
        let mask = 1u64 << (j % WORD_BITS);
        if bit {
            *w |= mask;
        } else {
            *w &= !mask;
        }
        self.toeplitz_seed = None;
    }

    #[inline]
    pub(crate) fn row_words(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    #[inline]
    pub(crate) fn row_words_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub(crate) fn data_mut(&mut self) -> &mut [u64] {
        self.toeplitz_seed = None;
        &mut self.data
    }

    pub fn row(&self, i: usize) -> BitVector {
        BitVector::from_words(self.row_words(i).to_vec(), self.cols).expect("row width")
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let (head, tail) = self.data.split_at_mut(hi * self.stride);
        head[lo * self.stride..(lo + 1) * self.stride].swap_with_slice(&mut tail[..self.stride]);
        self.toeplitz_seed = None;
    }

    /// `row[dst] ^= row[src]`.
    pub fn xor_row_into(&mut self, src: usize, dst: usize) {
        assert_ne!(src, dst);
        let s = self.stride;
        let (lo, hi) = (src.min(dst), src.max(dst));
        let (head, tail) = self.data.split_at_mut(hi * s);
        let (lo_row, hi_row) = (&mut head[lo * s..(lo + 1) * s], &mut tail[..s]);
        if src < dst {
            hi_row
                .iter_mut()
                .zip(lo_row.iter())
                .for_each(|(d, x)| *d ^= x);
        } else {
            lo_row
                .iter_mut()
                .zip(hi_row.iter())
                .for_each(|(d, x)| *d ^= x);
        }
        self.toeplitz_seed = None;
    }

    /// `A v`: bit `i` of the result is the parity of `row_i AND v`.
    pub fn matvec(&self, v: &BitVector) -> Result<BitVector> {
        check_len("matvec", self.cols, v.len())?;
        let words = v.words();
        let bits = if self.rows * self.stride >= PAR_MIN_WORDS {
            par::map_range(self.rows, |i| parity_and(self.row_words(i), words))
        } else {
            (0..self.rows)
                .map(|i| parity_and(self.row_words(i), words))
                .collect()
        };
        Ok(BitVector::from_bits(bits))
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &BinaryMatrix) -> Result<BinaryMatrix> {
        check_len("matrix product", self.cols, other.rows)?;
        let mut out = BinaryMatrix::zeros(self.rows, other.cols);
        let stride = out.stride;
        let fill = |i: usize, row: &mut [u64]| {
            for k in 0..self.cols {
                if self.get(i, k) {
                    row.iter_mut()
                        .zip(other.row_words(k))
                        .for_each(|(d, x)| *d ^= x);
                }
            }
        };
        if self.rows * self.cols >= PAR_MIN_WORDS {
            par::for_each_chunk_mut(&mut out.data, stride, fill);
        } else {
            out.data
                .chunks_mut(stride)
                .enumerate()
                .for_each(|(i, r)| fill(i, r));
        }
        Ok(out)
    }

    pub fn transpose(&self) -> BinaryMatrix {
        let mut t = BinaryMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    t.set(j, i, true);
                }
            }
        }
        t
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == BinaryMatrix::identity(self.rows)
    }

    /// `rows=R cols=C` header followed by one line of `0`/`1` per row.
    pub fn to_text(&self) -> String {
        let mut s = format!("rows={} cols={}\n", self.rows, self.cols);
        for i in 0..self.rows {
            s.push_str(&self.row(i).to_string());
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty matrix text".into()))?;
        let (rows, cols) = parse_header(header)?;
        let body: Vec<BitVector> = lines
            .map(|l| l.parse::<BitVector>())
            .collect::<Result<_>>()?;
        check_len("matrix text rows", rows, body.len())?;
        let mut m = BinaryMatrix::zeros(rows, cols);
        for (i, r) in body.iter().enumerate() {
            check_len("matrix text cols", cols, r.len())?;
            m.row_words_mut(i).copy_from_slice(r.words());
        }
        Ok(m)
    }
}

/// Equality is over dimensions and entries; the remembered Toeplitz seed is
/// provenance only.
impl PartialEq for BinaryMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.data == other.data
    }
}

impl Eq for BinaryMatrix {}

fn parse_header(header: &str) -> Result<(usize, usize)> {
    let mut rows = None;
    let mut cols = None;
    for field in header.split_whitespace() {
        match field.split_once('=') {
            Some(("rows", v)) => rows = v.parse().ok(),
            Some(("cols", v)) => cols = v.parse().ok(),
            _ => return Err(Error::Parse(format!("bad matrix header `{header}`"))),
        }
    }
    rows.zip(cols)
        .ok_or_else(|| Error::Parse(format!("bad matrix header `{header}`")))
}

impl FromStr for BinaryMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_text(s)
    }
}

impl fmt::Debug for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rows * self.cols <= 4096 {
            let rows: Vec<String> = (0..self.rows).map(|i| self.row(i).to_string()).collect();
            write!(f, "BinaryMatrix{rows:?}")
        } else {
            write!(f, "BinaryMatrix({}x{})", self.rows, self.cols)
        }
    }
}
