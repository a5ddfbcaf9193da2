use rand::Rng;

use super::bitvec::{parity_and, BitVector, WORD_BITS};
use super::matrix::{BinaryMatrix, PAR_MIN_WORDS};
use crate::error::{check_len, Error, Result};
use crate::par;

/// Row-echelon form of a matrix together with the row operations that
/// produced it: `row_ops * original = upper`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowReduction {
    upper: BinaryMatrix,
    row_ops: BinaryMatrix,
    pivot_cols: Vec<usize>,
    free_cols: Vec<usize>,
}

impl RowReduction {
    pub fn new(a: &BinaryMatrix) -> Self {
        let mut upper = a.clone();
        let mut row_ops = BinaryMatrix::identity(a.rows());
        let pivot_cols = eliminate(&mut upper, Some(&mut row_ops));
        let mut is_pivot = vec![false; a.cols()];
        for &p in &pivot_cols {
            is_pivot[p] = true;
        }
        let free_cols = (0..a.cols()).filter(|&j| !is_pivot[j]).collect();
        Self {
            upper,
            row_ops,
            pivot_cols,
            free_cols,
        }
    }

    pub fn upper(&self) -> &BinaryMatrix {
        &self.upper
    }

    pub fn row_ops(&self) -> &BinaryMatrix {
        &self.row_ops
    }

    pub fn pivot_cols(&self) -> &[usize] {
        &self.pivot_cols
    }

    pub fn free_cols(&self) -> &[usize] {
        &self.free_cols
    }

    pub fn rank(&self) -> usize {
        self.pivot_cols.len()
    }

    pub fn rows(&self) -> usize {
        self.upper.rows()
    }

    pub fn cols(&self) -> usize {
        self.upper.cols()
    }

    pub fn has_independent_rows(&self) -> bool {
        self.rank() == self.rows()
    }

    /// Solve `A x = y` with the free columns of `x` set from `free_bits`
    /// (one bit per entry of [`free_cols`](Self::free_cols), in order).
    /// Returns `None` when `y` is outside the column space.
    pub fn solve_with_free(
        &self,
        y: &BitVector,
        free_bits: &BitVector,
    ) -> Result<Option<BitVector>> {
        check_len("right-hand side", self.rows(), y.len())?;
        check_len("free bits", self.free_cols.len(), free_bits.len())?;
        let reduced = self.row_ops.matvec(y)?;
        if (self.rank()..self.rows()).any(|i| reduced.get(i)) {
            return Ok(None);
        }
        let mut x = BitVector::zeros(self.cols());
        for (k, &col) in self.free_cols.iter().enumerate() {
            x.set(col, free_bits.get(k));
        }
        self.back_substitute(&reduced, &mut x);
        Ok(Some(x))
    }

    /// Uniform draw from `{x : A x = y}`: the free columns are filled with
    /// fresh random bits and the pivot columns follow by back-substitution.
    pub fn sample_preimage<R: Rng + ?Sized>(
        &self,
        y: &BitVector,
        rng: &mut R,
    ) -> Result<BitVector> {
        if !self.has_independent_rows() {
            return Err(Error::RowsNotIndependent {
                rank: self.rank(),
                rows: self.rows(),
            });
        }
        let free_bits = BitVector::random(self.free_cols.len(), rng);
        self.solve_with_free(y, &free_bits)
            .map(|x| x.expect("full row rank systems are always consistent"))
    }

    /// One basis vector per free column: that column set, the other free
    /// columns clear, pivots solved for `A x = 0`.
    pub fn kernel_basis(&self) -> Vec<BitVector> {
        let zero = BitVector::zeros(self.rows());
        self.free_cols
            .iter()
            .map(|&f| {
                let mut x = BitVector::zeros(self.cols());
                x.set(f, true);
                self.back_substitute(&zero, &mut x);
                x
            })
            .collect()
    }

    fn back_substitute(&self, reduced: &BitVector, x: &mut BitVector) {
        for (i, &p) in self.pivot_cols.iter().enumerate().rev() {
            // x[p] is still zero here, so the row parity only sees later columns.
            let acc = parity_and(self.upper.row_words(i), x.words());
            x.set(p, reduced.get(i) ^ acc);
        }
    }
}

/// Pivots gathered per strip before the rows below are cleared in one pass.
const STRIP: usize = 8;

#[inline]
fn bit(data: &[u64], stride: usize, r: usize, c: usize) -> bool {
    data[r * stride + c / WORD_BITS] >> (c % WORD_BITS) & 1 == 1
}

/// `row[dst][from..] ^= row[src][from..]`.
fn xor_rows(data: &mut [u64], stride: usize, src: usize, dst: usize, from: usize) {
    let (s, d) = (src * stride, dst * stride);
    for w in from..stride {
        data[d + w] ^= data[s + w];
    }
}

fn swap(data: &mut [u64], stride: usize, a: usize, b: usize) {
    if a != b {
        for w in 0..stride {
            data.swap(a * stride + w, b * stride + w);
        }
    }
}

/// XOR-combinations of `rows` (a contiguous block of `stride`-word rows,
/// words `from..` only): entry `i` is the sum of the rows whose bit is set
/// in `i`.
fn combination_table(
    data: &[u64],
    stride: usize,
    first_row: usize,
    count: usize,
    from: usize,
) -> Vec<u64> {
    let width = stride - from;
    let mut table = vec![0u64; width << count];
    for i in 1..1usize << count {
        let (prev, k) = (i & (i - 1), i.trailing_zeros() as usize);
        let src = &data[(first_row + k) * stride + from..(first_row + k + 1) * stride];
        for w in 0..width {
            table[i * width + w] = table[prev * width + w] ^ src[w];
        }
    }
    table
}

fn apply_table(
    data: &mut [u64],
    stride: usize,
    top: usize,
    from: usize,
    table: &[u64],
    index: &[u16],
) {
    let width = stride - from;
    let tail = &mut data[top * stride..];
    let apply = |i: usize, row: &mut [u64]| {
        let ix = index[i] as usize;
        if ix != 0 {
            row[from..]
                .iter_mut()
                .zip(&table[ix * width..(ix + 1) * width])
                .for_each(|(d, t)| *d ^= t);
        }
    };
    if tail.len() >= PAR_MIN_WORDS {
        par::for_each_chunk_mut(tail, stride, apply);
    } else {
        tail.chunks_mut(stride)
            .enumerate()
            .for_each(|(i, r)| apply(i, r));
    }
}

/// Forward Gaussian elimination to row-echelon form, recording every row
/// operation in `ops` when given. Returns the pivot columns in row order.
///
/// Columns are processed in strips: up to [`STRIP`] pivots are found by
/// eliminating lazily on the rows that get scanned, the pivot rows are reduced
/// against each other, and every remaining row is then cleared with a single
/// lookup into the table of pivot-row combinations. The clearing pass runs in
/// parallel when the `parallel` feature is on and the block is large.
pub(crate) fn eliminate(work: &mut BinaryMatrix, mut ops: Option<&mut BinaryMatrix>) -> Vec<usize> {
    let (rows, cols, stride) = (work.rows(), work.cols(), work.stride());
    let ostride = ops.as_ref().map_or(0, |o| o.stride());
    let mut pivots = Vec::with_capacity(rows.min(cols));
    let data = work.data_mut();
    let mut odata = ops.as_deref_mut().map(|o| o.data_mut());
    let mut col = 0;

    while col < cols && pivots.len() < rows {
        let rank = pivots.len();
        let from = col / WORD_BITS;
        let mut strip: Vec<usize> = Vec::with_capacity(STRIP);

        while strip.len() < STRIP && col < cols && rank + strip.len() < rows {
            let top = rank + strip.len();
            let mut hit = None;
            for r in top..rows {
                for (k, &pc) in strip.iter().enumerate() {
                    if bit(data, stride, r, pc) {
                        xor_rows(data, stride, rank + k, r, from);
                        if let Some(o) = odata.as_deref_mut() {
                            xor_rows(o, ostride, rank + k, r, 0);
                        }
                    }
                }
                if bit(data, stride, r, col) {
                    hit = Some(r);
                    break;
                }
            }
            if let Some(r) = hit {
                swap(data, stride, r, top);
                if let Some(o) = odata.as_deref_mut() {
                    swap(o, ostride, r, top);
                }
                // keep the strip's pivot rows reduced against each other
                for k in 0..strip.len() {
                    if bit(data, stride, rank + k, col) {
                        xor_rows(data, stride, top, rank + k, from);
                        if let Some(o) = odata.as_deref_mut() {
                            xor_rows(o, ostride, top, rank + k, 0);
                        }
                    }
                }
                strip.push(col);
            }
            col += 1;
        }

        let top = rank + strip.len();
        if !strip.is_empty() && top < rows {
            let index: Vec<u16> = (top..rows)
                .map(|r| {
                    strip.iter().enumerate().fold(0u16, |acc, (k, &pc)| {
                        acc | (bit(data, stride, r, pc) as u16) << k
                    })
                })
                .collect();
            if index.iter().any(|&i| i != 0) {
                let table = combination_table(data, stride, rank, strip.len(), from);
                apply_table(data, stride, top, from, &table, &index);
                if let Some(o) = odata.as_deref_mut() {
                    let table = combination_table(o, ostride, rank, strip.len(), 0);
                    apply_table(o, ostride, top, 0, &table, &index);
                }
            }
        }
        pivots.extend(strip);
    }
    pivots
}

/// Textbook elimination, one pivot at a time; the reference for the strip
/// version.
#[cfg(test)]
pub(crate) fn eliminate_naive(
    work: &mut BinaryMatrix,
    mut ops: Option<&mut BinaryMatrix>,
) -> Vec<usize> {
    let (rows, cols) = (work.rows(), work.cols());
    let mut pivots = Vec::new();
    for c in 0..cols {
        let rank = pivots.len();
        if rank == rows {
            break;
        }
        let Some(r) = (rank..rows).find(|&r| work.get(r, c)) else {
            continue;
        };
        work.swap_rows(r, rank);
        if let Some(o) = ops.as_deref_mut() {
            o.swap_rows(r, rank);
        }
        for i in rank + 1..rows {
            if work.get(i, c) {
                work.xor_row_into(rank, i);
                if let Some(o) = ops.as_deref_mut() {
                    o.xor_row_into(rank, i);
                }
            }
        }
        pivots.push(c);
    }
    pivots
}

impl BinaryMatrix {
    /// Rank over GF(2), eliminating a scratch copy without recording row
    /// operations.
    pub fn rank(&self) -> usize {
        if self.rows() == 0 || self.cols() == 0 {
            return 0;
        }
        let mut work = self.clone();
        eliminate(&mut work, None).len()
    }

    pub fn has_independent_rows(&self) -> bool {
        self.rank() == self.rows()
    }
}

/// Row-reduce `a`, recording the row operations.
pub fn row_reduce(a: &BinaryMatrix) -> RowReduction {
    RowReduction::new(a)
}

/// Basis of `{x : A x = 0}`; it has `cols - rank` vectors.
pub fn kernel_basis(a: &BinaryMatrix) -> Vec<BitVector> {
    RowReduction::new(a).kernel_basis()
}

/// Uniform element of `{x : A x = y}`. `A` must have independent rows.
pub fn sample_preimage<R: Rng + ?Sized>(
    a: &BinaryMatrix,
    y: &BitVector,
    rng: &mut R,
) -> Result<BitVector> {
    check_len("preimage target", a.rows(), y.len())?;
    RowReduction::new(a).sample_preimage(y, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::{BTreeMap, BTreeSet};

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    fn m(rows: &[&str]) -> BinaryMatrix {
        BinaryMatrix::from_bit_rows(rows).unwrap()
    }

    /// All x in GF(2)^cols, enumerated.
    fn all_vectors(cols: usize) -> impl Iterator<Item = BitVector> {
        (0..1u64 << cols).map(move |x| BitVector::from_u64(x, cols))
    }

    fn enumerate_preimage(a: &BinaryMatrix, y: &BitVector) -> BTreeSet<String> {
        all_vectors(a.cols())
            .filter(|x| a.matvec(x).unwrap() == *y)
            .map(|x| x.to_string())
            .collect()
    }

    fn is_echelon(u: &BinaryMatrix, pivots: &[usize]) -> bool {
        for (i, &p) in pivots.iter().enumerate() {
            if !u.get(i, p) || (0..p).any(|j| u.get(i, j)) {
                return false;
            }
            if i > 0 && pivots[i - 1] >= p {
                return false;
            }
        }
        (pivots.len()..u.rows()).all(|i| u.row(i).is_zero())
    }

    #[test]
    fn already_echelon_is_untouched() {
        let a = m(&["101", "011"]);
        let r = row_reduce(&a);
        assert_eq!(r.upper(), &a);
        assert!(r.row_ops().is_identity());
        assert_eq!(r.pivot_cols(), &[0, 1]);
        assert_eq!(r.free_cols(), &[2]);
    }

    #[test]
    fn swap_is_recorded() {
        let a = m(&["01", "10"]);
        let r = row_reduce(&a);
        assert_eq!(r.upper(), &BinaryMatrix::identity(2));
        assert_eq!(r.row_ops(), &m(&["01", "10"]));
        assert_eq!(r.row_ops().mul(&a).unwrap(), *r.upper());
    }

    #[test]
    fn rank_deficient_square() {
        let a = m(&["11", "11"]);
        let r = row_reduce(&a);
        assert_eq!(r.rank(), 1);
        assert_eq!(r.free_cols(), &[1]);
        assert!(r.upper().row(1).is_zero());
        assert_eq!(r.row_ops().mul(&a).unwrap(), *r.upper());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            r.sample_preimage(&bv("00"), &mut rng),
            Err(Error::RowsNotIndependent { rank: 1, rows: 2 })
        ));
    }

    #[test]
    fn forward_product_holds_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for (rows, cols) in [(1, 1), (3, 8), (8, 3), (16, 16), (64, 128), (40, 200)] {
            let a = BinaryMatrix::random(rows, cols, &mut rng);
            let r = row_reduce(&a);
            assert_eq!(r.row_ops().mul(&a).unwrap(), *r.upper());
            assert!(is_echelon(r.upper(), r.pivot_cols()));
            assert_eq!(r.rank(), a.rank());
            assert_eq!(r.row_ops().rank(), rows, "row_ops must be invertible");
        }
    }

    #[test]
    fn strip_elimination_agrees_with_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut cases: Vec<BinaryMatrix> =
            [(5, 5), (9, 20), (20, 9), (70, 70), (130, 300), (33, 65)]
                .iter()
                .map(|&(r, c)| BinaryMatrix::random(r, c, &mut rng))
                .collect();
        // rank deficient: duplicated and zero rows, sparse columns
        let base = BinaryMatrix::random(12, 40, &mut rng);
        let mut dup = BinaryMatrix::zeros(30, 40);
        for i in 0..30 {
            for j in 0..40 {
                dup.set(i, j, i % 3 != 2 && base.get(i % 12, j) && j % 5 != 0);
            }
        }
        cases.push(dup);
        let seed = BitVector::random(199, &mut rng);
        cases.push(BinaryMatrix::toeplitz(&seed, 100, 100).unwrap());
        for a in cases {
            let (mut u1, mut o1) = (a.clone(), BinaryMatrix::identity(a.rows()));
            let (mut u2, mut o2) = (a.clone(), BinaryMatrix::identity(a.rows()));
            let p1 = eliminate(&mut u1, Some(&mut o1));
            let p2 = eliminate_naive(&mut u2, Some(&mut o2));
            assert_eq!(p1, p2);
            assert!(is_echelon(&u1, &p1));
            assert_eq!(o1.mul(&a).unwrap(), u1);
            let mut u3 = a.clone();
            assert_eq!(eliminate(&mut u3, None), p1);
        }
    }

    #[test]
    fn kernel_examples() {
        let k = kernel_basis(&m(&["11"]));
        assert_eq!(k, vec![bv("11")]);
        assert!(kernel_basis(&BinaryMatrix::identity(3)).is_empty());
        assert_eq!(kernel_basis(&m(&["101", "011"])), vec![bv("111")]);
    }

    #[test]
    fn kernel_size_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for cols in 1..=10 {
            for rows in 1..=4 {
                let a = BinaryMatrix::random(rows, cols, &mut rng);
                let basis = kernel_basis(&a);
                let zero = BitVector::zeros(rows);
                let by_enum = enumerate_preimage(&a, &zero);
                assert_eq!(by_enum.len(), 1 << (cols - a.rank()));
                assert_eq!(basis.len(), cols - a.rank());
                // span of the basis is exactly the enumerated kernel
                let span: BTreeSet<String> = (0..1u64 << basis.len())
                    .map(|mask| {
                        let mut x = BitVector::zeros(cols);
                        for (k, b) in basis.iter().enumerate() {
                            if mask >> k & 1 == 1 {
                                x.xor_assign(b).unwrap();
                            }
                        }
                        x.to_string()
                    })
                    .collect();
                assert_eq!(span, by_enum);
            }
        }
    }

    #[test]
    fn preimage_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = m(&["101", "011"]);
        let y = bv("10");
        assert_eq!(
            enumerate_preimage(&a, &y),
            BTreeSet::from(["100".to_string(), "011".to_string()])
        );
        let mut seen = BTreeMap::new();
        for _ in 0..2000 {
            let x = sample_preimage(&a, &y, &mut rng).unwrap();
            *seen.entry(x.to_string()).or_insert(0usize) += 1;
        }
        assert_eq!(seen.len(), 2);
        assert!(
            seen.values().all(|&c| (850..=1150).contains(&c)),
            "{seen:?}"
        );

        let id = BinaryMatrix::identity(2);
        for _ in 0..10 {
            assert_eq!(sample_preimage(&id, &bv("01"), &mut rng).unwrap(), bv("01"));
        }

        let mut seen = BTreeSet::new();
        for _ in 0..64 {
            seen.insert(
                sample_preimage(&m(&["11"]), &bv("0"), &mut rng)
                    .unwrap()
                    .to_string(),
            );
        }
        assert_eq!(seen, BTreeSet::from(["00".to_string(), "11".to_string()]));
    }

    #[test]
    fn inconsistent_system_reports_none() {
        let r = row_reduce(&m(&["11", "11"]));
        assert_eq!(r.solve_with_free(&bv("10"), &bv("0")).unwrap(), None);
    }

    #[test]
    fn large_elimination_uses_the_same_pivots_as_small_path() {
        // big enough to cross PAR_MIN_WORDS
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let a = BinaryMatrix::random(400, 3000, &mut rng);
        let r = row_reduce(&a);
        assert_eq!(r.rank(), 400);
        assert_eq!(r.row_ops().mul(&a).unwrap(), *r.upper());
        let y = BitVector::random(400, &mut rng);
        let x = r.sample_preimage(&y, &mut rng).unwrap();
        assert_eq!(a.matvec(&x).unwrap(), y);
    }
}
