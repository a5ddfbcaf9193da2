use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_len, Error, Result};

pub(crate) const WORD_BITS: usize = 64;

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

/// A string of bits over GF(2).
///
/// Bit `i` lives in word `i / 64` at position `i % 64`. Bits past `len` in the
/// last word are kept zero so that equality and hashing can compare words.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self {
            len,
            words: vec![u64::MAX; words_for(len)],
        };
        v.clear_padding();
        v
    }

    /// Bit `i` of the result is bit `i` of `value`.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= WORD_BITS, "from_u64 supports at most 64 bits");
        let mut v = Self::zeros(len);
        if len > 0 {
            v.words[0] = value;
            v.clear_padding();
        }
        v
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for bit in bits {
            if len % WORD_BITS == 0 {
                words.push(0);
            }
            if bit {
                words[len / WORD_BITS] |= 1 << (len % WORD_BITS);
            }
            len += 1;
        }
        Self { len, words }
    }

    pub fn from_words(words: Vec<u64>, len: usize) -> Result<Self> {
        check_len("word count", words_for(len), words.len())?;
        let mut v = Self { len, words };
        v.clear_padding();
        Ok(v)
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let words = (0..words_for(len)).map(|_| rng.random::<u64>()).collect();
        let mut v = Self { len, words };
        v.clear_padding();
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if bit {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / WORD_BITS] ^= 1 << (i % WORD_BITS);
    }

    pub fn push(&mut self, bit: bool) {
        if self.len % WORD_BITS == 0 {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, bit);
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Elementwise addition in GF(2).
    pub fn xor(&self, other: &Self) -> Result<Self> {
        check_len("xor", self.len, other.len)?;
        Ok(Self {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a ^ b)
                .collect(),
        })
    }

    pub fn xor_assign(&mut self, other: &Self) -> Result<()> {
        check_len("xor", self.len, other.len)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &Self) -> Result<bool> {
        check_len("dot", self.len, other.len)?;
        Ok(parity_and(&self.words, &other.words))
    }

    /// Number of positions where the two vectors differ.
    pub fn hamming_distance(&self, other: &Self) -> Result<usize> {
        check_len("hamming distance", self.len, other.len)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    /// Bits `range` as a new vector.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        assert!(start <= end && end <= self.len);
        Self::from_bits((start..end).map(|i| self.get(i)))
    }

    /// Bits at the given positions, in order.
    pub fn select(&self, positions: &[usize]) -> Self {
        Self::from_bits(positions.iter().map(|&i| self.get(i)))
    }

    /// Little-endian byte packing, bit `i` at byte `i / 8`, position `i % 8`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out: Vec<u8> = self.words.iter().flat_map(|w| w.to_le_bytes()).collect();
        out.truncate(self.len.div_ceil(8));
        out
    }

    /// Hex digits with bit `i` in nibble `i / 4`, least significant bit first
    /// within each nibble.
    pub fn to_hex(&self) -> String {
        const DIGITS: &[u8; 16] = b"0123456789abcdef";
        (0..self.len.div_ceil(4))
            .map(|k| {
                let word = self.words[k / 16];
                let nibble = (word >> ((k % 16) * 4)) & 0xf;
                DIGITS[nibble as usize] as char
            })
            .collect()
    }

    pub fn from_hex(hex: &str, len: usize) -> Result<Self> {
        let hex = hex.trim();
        if hex.len() != len.div_ceil(4) {
            return Err(Error::Parse(format!(
                "expected {} hex digits for {len} bits, got {}",
                len.div_ceil(4),
                hex.len()
            )));
        }
        let mut v = Self::zeros(len);
        for (k, c) in hex.chars().enumerate() {
            let nibble = c
                .to_digit(16)
                .ok_or_else(|| Error::Parse(format!("invalid hex digit `{c}`")))?
                as u64;
            v.words[k / 16] |= nibble << ((k % 16) * 4);
        }
        let before = v.words.clone();
        v.clear_padding();
        if v.words != before {
            return Err(Error::Parse("nonzero padding bits in hex".into()));
        }
        Ok(v)
    }

    /// Text form: a `bits=N` header line followed by the hex digits.
    pub fn to_text(&self) -> String {
        format!("bits={}\n{}\n", self.len, self.to_hex())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty bit vector text".into()))?;
        let len = header
            .strip_prefix("bits=")
            .and_then(|n| n.trim().parse::<usize>().ok())
            .ok_or_else(|| Error::Parse(format!("bad header `{header}`")))?;
        let hex = lines.next().unwrap_or("");
        Self::from_hex(hex, len)
    }

    fn clear_padding(&mut self) {
        let rem = self.len % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

#[inline]
pub(crate) fn parity_and(a: &[u64], b: &[u64]) -> bool {
    let acc = a.iter().zip(b).fold(0u64, |acc, (x, y)| acc ^ (x & y));
    acc.count_ones() & 1 == 1
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in self.iter() {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 128 {
            write!(f, "BitVector({self})")
        } else {
            write!(f, "BitVector(len={}, hex={})", self.len, self.to_hex())
        }
    }
}

/// Parses a string of `0`/`1` characters, bit 0 first.
impl FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace() && *c != '_')
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("invalid bit character `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::from_bits)
    }
}

#[derive(Serialize, Deserialize)]
struct HexBits {
    bits: usize,
    hex: String,
}

impl Serialize for BitVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        HexBits {
            bits: self.len,
            hex: self.to_hex(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BitVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = HexBits::deserialize(deserializer)?;
        Self::from_hex(&raw.hex, raw.bits).map_err(serde::de::Error::custom)
    }
}
