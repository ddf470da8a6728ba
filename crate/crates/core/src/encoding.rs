//! Canonical byte encodings of oracle domain elements and the seeded hash
//! family used by local hashing.
//!
//! Every element that is ever hashed by a user or the aggregator goes through
//! [`EncodedValue`], so the two sides always agree bit for bit:
//!
//! * an item (or a length report) is its identifier as 4 little-endian bytes;
//! * a sequence (FP-tree prefix, SVSM itemset) is a 4-byte little-endian
//!   length followed by the items, 4 little-endian bytes each;
//! * the dummy value is the single byte `0xFF`.
//!
//! The three shapes have disjoint lengths (4, 4 + 4m with m >= 1, and 1), so no
//! two distinct elements share an encoding.
//!
//! The hash family is indexed by a 64-bit seed. `H_seed(bytes)` starts from a
//! splitmix64-scrambled seed, absorbs the input in 8-byte little-endian words
//! (the final partial word zero-padded, the byte length folded into the
//! initial state) with a splitmix64 finalizer after every word, and finishes
//! with one more finalizer. Reduction to `[g]` takes the high 64 bits of the
//! 128-bit product `h * g`.

use std::fmt;

const DUMMY_BYTE: u8 = 0xFF;
const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// A domain element in its canonical byte form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EncodedValue(Vec<u8>);

impl EncodedValue {
    pub fn item(item: u32) -> Self {
        EncodedValue(item.to_le_bytes().to_vec())
    }

    /// Length reports share the item encoding.
    pub fn length(len: usize) -> Self {
        Self::item(len as u32)
    }

    pub fn sequence(items: &[u32]) -> Self {
        let mut bytes = Vec::with_capacity(4 + 4 * items.len());
        bytes.extend_from_slice(&(items.len() as u32).to_le_bytes());
        for item in items {
            bytes.extend_from_slice(&item.to_le_bytes());
        }
        EncodedValue(bytes)
    }

    pub fn dummy() -> Self {
        EncodedValue(vec![DUMMY_BYTE])
    }

    pub fn is_dummy(&self) -> bool {
        self.0.len() == 1 && self.0[0] == DUMMY_BYTE
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    /// Bucket of this value under the hash function with the given seed.
    #[inline]
    pub fn bucket(&self, seed: u64, g: u64) -> u64 {
        reduce(hash_bytes(seed, &self.0), g)
    }
}

impl fmt::Debug for EncodedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_dummy() {
            return f.write_str("EncodedValue(dummy)");
        }
        write!(f, "EncodedValue(")?;
        for b in &self.0 {
            write!(f, "{b:02x}")?;
        }
        write!(f, ")")
    }
}

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seeded 64-bit hash of a byte string.
#[inline]
pub fn hash_bytes(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = mix64(seed.wrapping_add(GOLDEN)) ^ (bytes.len() as u64).wrapping_mul(GOLDEN);
    let mut chunks = bytes.chunks_exact(8);
    for chunk in &mut chunks {
        let word = u64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
        h = mix64(h ^ word).wrapping_add(GOLDEN);
    }
    let rest = chunks.remainder();
    if !rest.is_empty() {
        let mut buf = [0u8; 8];
        buf[..rest.len()].copy_from_slice(rest);
        h = mix64(h ^ u64::from_le_bytes(buf)).wrapping_add(GOLDEN);
    }
    mix64(h)
}

#[inline]
pub fn reduce(hash: u64, g: u64) -> u64 {
    ((hash as u128 * g as u128) >> 64) as u64
}

/// Derives a child seed from a parent seed and a list of labelled parts.
///
/// Used for per-stage and per-trial seeds; stable across platforms and
/// releases because it only depends on [`hash_bytes`].
pub fn derive_seed(parent: u64, parts: &[&[u8]]) -> u64 {
    let mut h = parent;
    for part in parts {
        h = hash_bytes(h, part);
    }
    h
}
