//! Additive privacy amplification and its delayed use after a one-time pad.
//!
//! An additive PA function over GF(2) is a matrix `A` with independent rows,
//! `f(a) = A a`. Delaying PA means encrypting an expanded message `m` with the
//! raw key `a` instead of encrypting `m' = f(m)` with the final key `f(a)`;
//! anyone holding `a ⊕ m` can fold it back through `f` because
//! `f(a ⊕ m) = f(a) ⊕ m'`.

use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::gf2::{BinaryMatrix, BitVector, RowReduction};

/// `f(a) = A a` for an `n_pa x n` matrix with linearly independent rows.
#[derive(Debug, Clone)]
pub struct AdditivePaFunction {
    matrix: BinaryMatrix,
    reduction: OnceLock<RowReduction>,
}

impl AdditivePaFunction {
    pub fn new(matrix: BinaryMatrix) -> Result<Self> {
        let (n_pa, n) = (matrix.rows(), matrix.cols());
        if n_pa == 0 || n_pa > n {
            return Err(Error::InvalidPaShape { n_pa, n });
        }
        let rank = matrix.rank();
        if rank != n_pa {
            return Err(Error::RowsNotIndependent { rank, rows: n_pa });
        }
        Ok(Self {
            matrix,
            reduction: OnceLock::new(),
        })
    }

    /// Like [`new`](Self::new), but keeps the row reduction used for the rank
    /// check so that preimage sampling does not repeat it.
    pub fn with_reduction(matrix: BinaryMatrix) -> Result<Self> {
        let (n_pa, n) = (matrix.rows(), matrix.cols());
        if n_pa == 0 || n_pa > n {
            return Err(Error::InvalidPaShape { n_pa, n });
        }
        let reduction = RowReduction::new(&matrix);
        if !reduction.has_independent_rows() {
            return Err(Error::RowsNotIndependent {
                rank: reduction.rank(),
                rows: n_pa,
            });
        }
        Ok(Self {
            matrix,
            reduction: OnceLock::from(reduction),
        })
    }

    pub fn from_toeplitz_seed(seed: &BitVector, n_pa: usize, n: usize) -> Result<Self> {
        Self::new(BinaryMatrix::toeplitz(seed, n_pa, n)?)
    }

    /// Draws Toeplitz seeds until the matrix has full row rank.
    pub fn random_toeplitz<R: Rng + ?Sized>(n_pa: usize, n: usize, rng: &mut R) -> Result<Self> {
        Self::random_toeplitz_with(n_pa, n, rng, false)
    }

    /// As [`random_toeplitz`](Self::random_toeplitz); with `reduce` the
    /// accepted matrix comes with its row reduction already computed.
    pub fn random_toeplitz_with<R: Rng + ?Sized>(
        n_pa: usize,
        n: usize,
        rng: &mut R,
        reduce: bool,
    ) -> Result<Self> {
        if n_pa == 0 || n_pa > n {
            return Err(Error::InvalidPaShape { n_pa, n });
        }
        loop {
            let seed = BitVector::random(n + n_pa - 1, rng);
            let matrix = BinaryMatrix::toeplitz(&seed, n_pa, n)?;
            let built = if reduce {
                Self::with_reduction(matrix)
            } else {
                Self::new(matrix)
            };
            match built {
                Ok(f) => return Ok(f),
                Err(Error::RowsNotIndependent { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
    }

    pub fn n(&self) -> usize {
        self.matrix.cols()
    }

    pub fn n_pa(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &BinaryMatrix {
        &self.matrix
    }

    pub fn toeplitz_seed(&self) -> Option<&BitVector> {
        self.matrix.toeplitz_seed()
    }

    /// Row reduction of `A`, computed on first use.
    pub fn reduction(&self) -> &RowReduction {
        self.reduction
            .get_or_init(|| RowReduction::new(&self.matrix))
    }

    pub fn apply(&self, a: &BitVector) -> Result<BitVector> {
        check_len("PA input", self.n(), a.len())?;
        self.matrix.matvec(a)
    }

    /// Uniform element of `f⁻¹[y]`.
    pub fn sample_preimage<R: Rng + ?Sized>(
        &self,
        y: &BitVector,
        rng: &mut R,
    ) -> Result<BitVector> {
        check_len("PA output", self.n_pa(), y.len())?;
        self.reduction().sample_preimage(y, rng)
    }
}

/// `k = f(a)`.
pub fn pa_apply(f: &AdditivePaFunction, a: &BitVector) -> Result<BitVector> {
    f.apply(a)
}

/// The PA-inverse of `m_prime`: `m` drawn uniformly from `{x : f(x) = m_prime}`.
pub fn expand_message<R: Rng + ?Sized>(
    f: &AdditivePaFunction,
    m_prime: &BitVector,
    rng: &mut R,
) -> Result<BitVector> {
    f.sample_preimage(m_prime, rng)
}

/// Expansion of an imperfect key used as the message: `m` uniform with
/// `f(m) = g(a_prime)`, so the PA of `a_prime` is delayed together with that
/// of the raw key.
pub fn expand_imperfect_key<R: Rng + ?Sized>(
    f: &AdditivePaFunction,
    g: &AdditivePaFunction,
    a_prime: &BitVector,
    rng: &mut R,
) -> Result<BitVector> {
    check_len("PA output length of g vs f", f.n_pa(), g.n_pa())?;
    let target = g.apply(a_prime)?;
    f.sample_preimage(&target, rng)
}

/// Ciphertext `a ⊕ m` sent in the delayed scheme.
pub fn dpa_encrypt(a: &BitVector, m: &BitVector) -> Result<BitVector> {
    a.xor(m)
}

/// `f(c) ⊕ k`, the receiver path that only needs the final key.
pub fn dpa_recover_via_key(
    f: &AdditivePaFunction,
    c: &BitVector,
    k: &BitVector,
) -> Result<BitVector> {
    check_len("final key", f.n_pa(), k.len())?;
    f.apply(c)?.xor(k)
}

/// `f(c ⊕ a)`, the receiver path that uses the pre-PA key.
pub fn dpa_recover_via_rawkey(
    f: &AdditivePaFunction,
    c: &BitVector,
    a: &BitVector,
) -> Result<BitVector> {
    check_len("raw key", f.n(), a.len())?;
    f.apply(&c.xor(a)?)
}

/// Plain one-time pad.
pub fn otp(x: &BitVector, pad: &BitVector) -> Result<BitVector> {
    x.xor(pad)
}

/// Counts key material spent through [`otp`] and [`dpa_encrypt`]. Pad bits
/// and raw-key bits are single use, so every call adds to the totals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyConsumption {
    pub pad_bits: usize,
    pub raw_key_bits: usize,
}

impl KeyConsumption {
    pub fn otp(&mut self, x: &BitVector, pad: &BitVector) -> Result<BitVector> {
        let c = otp(x, pad)?;
        self.pad_bits += pad.len();
        Ok(c)
    }

    pub fn dpa_encrypt(&mut self, a: &BitVector, m: &BitVector) -> Result<BitVector> {
        let c = dpa_encrypt(a, m)?;
        self.raw_key_bits += a.len();
        Ok(c)
    }
}

/// First half of a delayed-PA session: the message is fixed and expanded
/// before any raw key exists, so `m'` cannot depend on `a`.
#[derive(Debug, Clone)]
pub struct PreparedMessage {
    f: Arc<AdditivePaFunction>,
    m_prime: BitVector,
    m: BitVector,
    selector_seed: u64,
}

impl PreparedMessage {
    pub fn new(f: Arc<AdditivePaFunction>, m_prime: BitVector, selector_seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(selector_seed);
        let m = expand_message(&f, &m_prime, &mut rng)?;
        Ok(Self {
            f,
            m_prime,
            m,
            selector_seed,
        })
    }

    pub fn expanded(&self) -> &BitVector {
        &self.m
    }

    pub fn encrypt(self, raw_key: BitVector) -> Result<DelayedPaSession> {
        let ciphertext = dpa_encrypt(&raw_key, &self.m)?;
        Ok(DelayedPaSession {
            f: self.f,
            raw_key,
            m_prime: self.m_prime,
            m: self.m,
            selector_seed: self.selector_seed,
            ciphertext,
        })
    }
}

/// A complete delayed-PA exchange. Invariants: `f(m) = m'` and `c = a ⊕ m`.
#[derive(Debug, Clone)]
pub struct DelayedPaSession {
    f: Arc<AdditivePaFunction>,
    raw_key: BitVector,
    m_prime: BitVector,
    m: BitVector,
    selector_seed: u64,
    ciphertext: BitVector,
}

impl DelayedPaSession {
    pub fn prepare(
        f: Arc<AdditivePaFunction>,
        m_prime: BitVector,
        selector_seed: u64,
    ) -> Result<PreparedMessage> {
        PreparedMessage::new(f, m_prime, selector_seed)
    }

    pub fn function(&self) -> &AdditivePaFunction {
        &self.f
    }

    pub fn raw_key(&self) -> &BitVector {
        &self.raw_key
    }

    pub fn message(&self) -> &BitVector {
        &self.m_prime
    }

    pub fn expanded(&self) -> &BitVector {
        &self.m
    }

    pub fn selector_seed(&self) -> u64 {
        self.selector_seed
    }

    pub fn ciphertext(&self) -> &BitVector {
        &self.ciphertext
    }

    /// Final key of the normal scheme, `f(a)`.
    pub fn final_key(&self) -> Result<BitVector> {
        self.f.apply(&self.raw_key)
    }

    pub fn recover_via_key(&self, k: &BitVector) -> Result<BitVector> {
        dpa_recover_via_key(&self.f, &self.ciphertext, k)
    }

    pub fn recover_via_rawkey(&self, a: &BitVector) -> Result<BitVector> {
        dpa_recover_via_rawkey(&self.f, &self.ciphertext, a)
    }

    pub fn dump(&self) -> SessionDump {
        let pa = match self.f.toeplitz_seed() {
            Some(seed) => PaSpec::Toeplitz {
                toeplitz_seed: seed.clone(),
            },
            None => PaSpec::Matrix {
                matrix: self.f.matrix().to_text(),
            },
        };
        SessionDump {
            n: self.f.n(),
            n_pa: self.f.n_pa(),
            pa,
            raw_key: self.raw_key.clone(),
            m_prime: self.m_prime.clone(),
            m: self.m.clone(),
            selector_seed: self.selector_seed,
            ciphertext: self.ciphertext.clone(),
        }
    }
}

/// How a PA function is written in a session dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PaSpec {
    Toeplitz { toeplitz_seed: BitVector },
    Matrix { matrix: String },
}

impl PaSpec {
    pub fn build(&self, n_pa: usize, n: usize) -> Result<AdditivePaFunction> {
        let f = match self {
            PaSpec::Toeplitz { toeplitz_seed } => {
                AdditivePaFunction::from_toeplitz_seed(toeplitz_seed, n_pa, n)?
            }
            PaSpec::Matrix { matrix } => AdditivePaFunction::new(BinaryMatrix::from_text(matrix)?)?,
        };
        check_len("dumped n_pa", n_pa, f.n_pa())?;
        check_len("dumped n", n, f.n())?;
        Ok(f)
    }
}

/// JSON record of a session, enough to replay both recovery paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionDump {
    pub n: usize,
    pub n_pa: usize,
    pub pa: PaSpec,
    pub raw_key: BitVector,
    pub m_prime: BitVector,
    pub m: BitVector,
    pub selector_seed: u64,
    pub ciphertext: BitVector,
}

impl SessionDump {
    /// Rebuilds the session, re-deriving `m` from the selector seed and
    /// checking every stored field against it.
    pub fn restore(&self) -> Result<DelayedPaSession> {
        let f = Arc::new(self.pa.build(self.n_pa, self.n)?);
        let session = PreparedMessage::new(f, self.m_prime.clone(), self.selector_seed)?
            .encrypt(self.raw_key.clone())?;
        if session.m != self.m || session.ciphertext != self.ciphertext {
            return Err(Error::Parse(
                "session dump does not replay to the stored fields".into(),
            ));
        }
        Ok(session)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{BTreeMap, BTreeSet};

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    fn pa(rows: &[&str]) -> AdditivePaFunction {
        AdditivePaFunction::new(BinaryMatrix::from_bit_rows(rows).unwrap()).unwrap()
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn preimage_by_enumeration(f: &AdditivePaFunction, y: &BitVector) -> BTreeSet<String> {
        (0..1u64 << f.n())
            .map(|x| BitVector::from_u64(x, f.n()))
            .filter(|x| f.apply(x).unwrap() == *y)
            .map(|x| x.to_string())
            .collect()
    }

    #[test]
    fn construction_checks() {
        assert!(matches!(
            AdditivePaFunction::new(BinaryMatrix::from_bit_rows(&["11", "11"]).unwrap()),
            Err(Error::RowsNotIndependent { rank: 1, rows: 2 })
        ));
        assert!(matches!(
            AdditivePaFunction::new(BinaryMatrix::from_bit_rows(&["1", "1"]).unwrap()),
            Err(Error::InvalidPaShape { n_pa: 2, n: 1 })
        ));
        let f = AdditivePaFunction::random_toeplitz(16, 16, &mut rng(4)).unwrap();
        assert_eq!(f.matrix().rank(), 16);
        assert!(f.toeplitz_seed().is_some());
    }

    #[test]
    fn pa_apply_examples() {
        assert_eq!(
            pa_apply(&pa(&["100", "010"]), &bv("101")).unwrap(),
            bv("10")
        );
        let f = pa(&["101", "011"]);
        assert_eq!(pa_apply(&f, &bv("000")).unwrap(), bv("00"));
        assert_eq!(pa_apply(&f, &bv("111")).unwrap(), bv("00"));
        assert!(pa_apply(&f, &bv("11")).is_err());
    }

    #[test]
    fn expand_message_is_uniform_over_preimage() {
        let f = pa(&["101", "011"]);
        let target = bv("10");
        assert_eq!(
            preimage_by_enumeration(&f, &target),
            BTreeSet::from(["100".into(), "011".into()])
        );
        let mut r = rng(8);
        let mut counts = BTreeMap::new();
        for _ in 0..4000 {
            let m = expand_message(&f, &target, &mut r).unwrap();
            assert_eq!(f.apply(&m).unwrap(), target);
            *counts.entry(m.to_string()).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 2);
        assert!(counts.values().all(|&c| (1800..=2200).contains(&c)));
    }

    #[test]
    fn expand_message_for_known_image() {
        let mut r = rng(2);
        let f = AdditivePaFunction::random_toeplitz(5, 12, &mut r).unwrap();
        let w = BitVector::random(12, &mut r);
        let m = expand_message(&f, &f.apply(&w).unwrap(), &mut r).unwrap();
        assert_eq!(f.apply(&m).unwrap(), f.apply(&w).unwrap());
    }

    #[test]
    fn imperfect_key_examples() {
        let f = pa(&["11"]);
        let g = pa(&["10"]);
        let mut r = rng(5);
        let mut seen = BTreeMap::new();
        for _ in 0..2000 {
            let m = expand_imperfect_key(&f, &g, &bv("10"), &mut r).unwrap();
            *seen.entry(m.to_string()).or_insert(0u32) += 1;
        }
        assert_eq!(seen.keys().cloned().collect::<Vec<_>>(), vec!["01", "10"]);
        assert!(seen.values().all(|&c| (850..=1150).contains(&c)));

        let f2 = pa(&["101", "011"]);
        let a = bv("110");
        let m = expand_imperfect_key(&f2, &f2, &a, &mut r).unwrap();
        assert_eq!(f2.apply(&m).unwrap(), f2.apply(&a).unwrap());

        let kernel = preimage_by_enumeration(&f2, &bv("00"));
        let m = expand_imperfect_key(&f2, &pa(&["100", "010"]), &bv("001"), &mut r).unwrap();
        assert!(kernel.contains(&m.to_string()));

        assert!(expand_imperfect_key(&f2, &f, &bv("10"), &mut r).is_err());
    }

    #[test]
    fn encrypt_and_recover_examples() {
        assert_eq!(dpa_encrypt(&bv("1010"), &bv("0110")).unwrap(), bv("1100"));
        assert!(dpa_encrypt(&bv("1010"), &bv("1010")).unwrap().is_zero());
        assert_eq!(dpa_encrypt(&bv("0000"), &bv("0110")).unwrap(), bv("0110"));

        let f = pa(&["101", "011"]);
        let (a, m) = (bv("110"), bv("100"));
        assert_eq!(f.apply(&m).unwrap(), bv("10"));
        let c = dpa_encrypt(&a, &m).unwrap();
        assert_eq!(c, bv("010"));
        let k = f.apply(&a).unwrap();
        assert_eq!(k, bv("11"));
        assert_eq!(dpa_recover_via_key(&f, &c, &k).unwrap(), bv("10"));
        assert_eq!(dpa_recover_via_rawkey(&f, &c, &a).unwrap(), bv("10"));

        // zero message, zero key, c = a
        assert!(dpa_recover_via_key(&f, &a, &k).unwrap().is_zero());
        assert_eq!(
            dpa_recover_via_key(&f, &c, &bv("00")).unwrap(),
            f.apply(&c).unwrap()
        );
        assert!(dpa_recover_via_rawkey(&f, &a, &a).unwrap().is_zero());
        assert_eq!(
            dpa_recover_via_rawkey(&f, &c, &bv("000")).unwrap(),
            f.apply(&c).unwrap()
        );
        assert!(dpa_recover_via_key(&f, &c, &bv("1")).is_err());
    }

    #[test]
    fn otp_examples_and_ledger() {
        assert_eq!(otp(&bv("10"), &bv("11")).unwrap(), bv("01"));
        let x = bv("1101");
        let p = bv("0111");
        assert_eq!(otp(&otp(&x, &p).unwrap(), &p).unwrap(), x);
        assert_eq!(otp(&x, &bv("0000")).unwrap(), x);

        let mut spent = KeyConsumption::default();
        spent.otp(&x, &p).unwrap();
        spent.dpa_encrypt(&bv("101"), &bv("011")).unwrap();
        assert_eq!(
            spent,
            KeyConsumption {
                pad_bits: 4,
                raw_key_bits: 3
            }
        );
    }

    #[test]
    fn session_recovers_and_replays() {
        let mut r = rng(31);
        let f = Arc::new(AdditivePaFunction::random_toeplitz(24, 64, &mut r).unwrap());
        let m_prime = BitVector::random(24, &mut r);
        let prepared = DelayedPaSession::prepare(f.clone(), m_prime.clone(), 77).unwrap();
        let a = BitVector::random(64, &mut r);
        let session = prepared.encrypt(a.clone()).unwrap();
        assert_eq!(f.apply(session.expanded()).unwrap(), m_prime);
        let k = session.final_key().unwrap();
        assert_eq!(session.recover_via_key(&k).unwrap(), m_prime);
        assert_eq!(session.recover_via_rawkey(&a).unwrap(), m_prime);

        let json = serde_json::to_string_pretty(&session.dump()).unwrap();
        let dump: SessionDump = serde_json::from_str(&json).unwrap();
        let replayed = dump.restore().unwrap();
        assert_eq!(replayed.expanded(), session.expanded());
        assert_eq!(replayed.recover_via_rawkey(&a).unwrap(), m_prime);

        let mut tampered = dump.clone();
        tampered.selector_seed += 1;
        assert!(tampered.restore().is_err());
    }

    #[test]
    fn session_dump_with_plain_matrix() {
        let f = Arc::new(pa(&["101", "011"]));
        let s = DelayedPaSession::prepare(f, bv("10"), 1)
            .unwrap()
            .encrypt(bv("110"))
            .unwrap();
        let dump = s.dump();
        assert!(matches!(dump.pa, PaSpec::Matrix { .. }));
        let back: SessionDump =
            serde_json::from_str(&serde_json::to_string(&dump).unwrap()).unwrap();
        assert_eq!(back, dump);
        assert_eq!(
            back.restore()
                .unwrap()
                .recover_via_rawkey(&bv("110"))
                .unwrap(),
            bv("10")
        );
    }
}
