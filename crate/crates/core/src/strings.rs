//! Bitstring arithmetic: shortlex ranking, the Cantor pairing over ranks,
//! and the doubled-character multiset codec.
//!
//! Shortlex orders by length first, then left-to-right with 0 < 1. The rank
//! of a string `s` is the integer value of the binary numeral `1·s` minus 1,
//! which makes ranking a bijection onto the naturals with ε at rank 0.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::One;
use thiserror::Error;

/// A finite word over {0,1}, including the empty word ε.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    bits: Vec<u8>,
}

impl BitString {
    pub fn empty() -> Self {
        BitString { bits: Vec::new() }
    }

    /// Builds from a slice of 0/1 values. Panics on anything else.
    pub fn from_bits(bits: &[u8]) -> Self {
        assert!(bits.iter().all(|&b| b <= 1), "bits must be 0 or 1");
        BitString { bits: bits.to_vec() }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// The i-th character, 0-based.
    pub fn bit(&self, i: usize) -> Option<u8> {
        self.bits.get(i).copied()
    }

    /// Suffix starting at the 0-based index `i`; ε when `i` is past the end.
    pub fn suffix_from(&self, i: usize) -> BitString {
        if i >= self.bits.len() {
            BitString::empty()
        } else {
            BitString { bits: self.bits[i..].to_vec() }
        }
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        BitString { bits }
    }

    pub fn prepend_bit(&self, b: u8) -> BitString {
        assert!(b <= 1);
        let mut bits = Vec::with_capacity(self.bits.len() + 1);
        bits.push(b);
        bits.extend_from_slice(&self.bits);
        BitString { bits }
    }

    pub fn push_bit(&mut self, b: u8) {
        assert!(b <= 1);
        self.bits.push(b);
    }

    /// Shortlex rank: the integer value of the numeral `1·s` minus 1.
    pub fn rank(&self) -> BigUint {
        let mut n = BigUint::one();
        for &b in &self.bits {
            n = (n << 1) + BigUint::from(b);
        }
        n - BigUint::one()
    }

    /// Shortlex rank when it fits a machine word (length 63 tops out at
    /// 2^64 - 2, so the computation below cannot overflow).
    pub fn rank_u64(&self) -> Option<u64> {
        if self.bits.len() > 63 {
            return None;
        }
        let mut n: u64 = 1;
        for &b in &self.bits {
            n = (n << 1) | u64::from(b);
        }
        Some(n - 1)
    }

    /// Inverse of `rank`: write n+1 in binary and drop the leading 1.
    pub fn from_rank(n: &BigUint) -> BitString {
        let m = n + BigUint::one();
        let digits = m.to_radix_be(2);
        BitString { bits: digits[1..].to_vec() }
    }

    pub fn from_rank_u64(n: u64) -> BitString {
        let m = n + 1;
        let top = 63 - m.leading_zeros() as usize;
        let mut bits = Vec::with_capacity(top);
        for i in (0..top).rev() {
            bits.push(((m >> i) & 1) as u8);
        }
        BitString { bits }
    }

    /// CLI/CSV literal: `@e` for ε, otherwise the raw 0/1 characters.
    pub fn literal(&self) -> String {
        if self.bits.is_empty() {
            "@e".to_string()
        } else {
            self.bits.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
        }
    }
}

impl Ord for BitString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bits
            .len()
            .cmp(&other.bits.len())
            .then_with(|| self.bits.cmp(&other.bits))
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.literal())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b\"{}\"", self.literal())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseBitStringError {
    #[error("invalid character {0:?} in bitstring literal")]
    BadChar(char),
}

impl FromStr for BitString {
    type Err = ParseBitStringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "@e" || s.is_empty() {
            return Ok(BitString::empty());
        }
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(0),
                '1' => bits.push(1),
                other => return Err(ParseBitStringError::BadChar(other)),
            }
        }
        Ok(BitString { bits })
    }
}

/// All strings with rank in `0..=max_rank`, in shortlex order.
pub fn strings_up_to_rank(max_rank: u64) -> impl Iterator<Item = BitString> {
    (0..=max_rank).map(BitString::from_rank_u64)
}

/// All strings of length `0..=max_len`, in shortlex order.
pub fn strings_up_to_len(max_len: usize) -> impl Iterator<Item = BitString> {
    let max_rank = (1u64 << (max_len + 1)) - 2;
    strings_up_to_rank(max_rank)
}

/// Cantor pairing over shortlex ranks: π(m,n) = (m+n)(m+n+1)/2 + n.
///
/// Total, bijective, and strictly increasing in each argument with the other
/// fixed.
pub fn pair_encode(a: &BitString, b: &BitString) -> BitString {
    let m = a.rank();
    let n = b.rank();
    let s = &m + &n;
    let code = (&s * (&s + BigUint::one())) / BigUint::from(2u32) + n;
    BitString::from_rank(&code)
}

/// Exact inverse of `pair_encode`, via the integer square root of the
/// Cantor diagonal.
pub fn pair_decode(s: &BitString) -> (BitString, BitString) {
    let z = s.rank();
    let disc: BigUint = (&z << 3) + BigUint::one();
    let w = (disc.sqrt() - BigUint::one()) >> 1;
    let t = (&w * (&w + BigUint::one())) >> 1;
    let n = &z - &t;
    let m = &w - &n;
    (BitString::from_rank(&m), BitString::from_rank(&n))
}

/// Cantor pairing on machine-word ranks; `None` on overflow.
pub fn pair_rank_u64(m: u64, n: u64) -> Option<u64> {
    let s = m.checked_add(n)?;
    let tri = s.checked_mul(s.checked_add(1)?)? / 2;
    tri.checked_add(n)
}

/// A finite multiset of bitstrings in canonical form: elements kept sorted
/// by shortlex, duplicates adjacent. Cardinality counts multiplicity.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct MultisetOfStrings {
    elems: Vec<BitString>,
}

impl MultisetOfStrings {
    pub fn new() -> Self {
        MultisetOfStrings { elems: Vec::new() }
    }

    pub fn singleton(s: BitString) -> Self {
        MultisetOfStrings { elems: vec![s] }
    }

    pub fn from_elements(mut elems: Vec<BitString>) -> Self {
        elems.sort();
        MultisetOfStrings { elems }
    }

    pub fn insert(&mut self, s: BitString) {
        let pos = self.elems.partition_point(|e| *e <= s);
        self.elems.insert(pos, s);
    }

    /// Multiset union: all instances of both operands.
    pub fn union(&self, other: &MultisetOfStrings) -> MultisetOfStrings {
        let mut elems = Vec::with_capacity(self.elems.len() + other.elems.len());
        let (mut i, mut j) = (0, 0);
        while i < self.elems.len() && j < other.elems.len() {
            if self.elems[i] <= other.elems[j] {
                elems.push(self.elems[i].clone());
                i += 1;
            } else {
                elems.push(other.elems[j].clone());
                j += 1;
            }
        }
        elems.extend_from_slice(&self.elems[i..]);
        elems.extend_from_slice(&other.elems[j..]);
        MultisetOfStrings { elems }
    }

    /// Cardinality counting multiplicity.
    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elements(&self) -> &[BitString] {
        &self.elems
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("cannot encode the empty multiset")]
    EmptyMultiset,
    #[error("decode error at position {pos}: {reason}")]
    Decode { pos: usize, reason: &'static str },
}

/// Encodes a nonempty canonical multiset as a single string: each element's
/// characters doubled (0→00, 1→11), ε rendered as `10`, elements joined by
/// the separator `01`.
pub fn multiset_encode(m: &MultisetOfStrings) -> Result<BitString, CodecError> {
    if m.is_empty() {
        return Err(CodecError::EmptyMultiset);
    }
    let mut out = BitString::empty();
    for (idx, e) in m.elements().iter().enumerate() {
        if idx > 0 {
            out.push_bit(0);
            out.push_bit(1);
        }
        if e.is_empty() {
            out.push_bit(1);
            out.push_bit(0);
        } else {
            for &b in e.bits() {
                out.push_bit(b);
                out.push_bit(b);
            }
        }
    }
    Ok(out)
}

/// Exact inverse of `multiset_encode`. Inputs outside the image (including
/// elements out of canonical order) are rejected with the first bad position.
pub fn multiset_decode(s: &BitString) -> Result<MultisetOfStrings, CodecError> {
    let bits = s.bits();
    if bits.is_empty() {
        return Err(CodecError::Decode { pos: 0, reason: "empty input is not an encoding" });
    }
    if bits.len() % 2 != 0 {
        return Err(CodecError::Decode {
            pos: bits.len() - 1,
            reason: "odd-length block cannot be a doubled character",
        });
    }
    let mut elems: Vec<BitString> = Vec::new();
    let mut pos = 0;
    loop {
        let elem_start = pos;
        let elem = if bits[pos] == 1 && bits[pos + 1] == 0 {
            pos += 2;
            BitString::empty()
        } else {
            let mut e = BitString::empty();
            while pos + 2 <= bits.len() && bits[pos] == bits[pos + 1] {
                e.push_bit(bits[pos]);
                pos += 2;
            }
            if e.is_empty() {
                return Err(CodecError::Decode { pos, reason: "expected a doubled character or the ε token" });
            }
            e
        };
        if let Some(last) = elems.last() {
            if *last > elem {
                return Err(CodecError::Decode {
                    pos: elem_start,
                    reason: "elements out of canonical shortlex order",
                });
            }
        }
        elems.push(elem);
        if pos == bits.len() {
            break;
        }
        if bits[pos] == 0 && bits[pos + 1] == 1 {
            pos += 2;
            if pos == bits.len() {
                return Err(CodecError::Decode { pos, reason: "dangling separator" });
            }
        } else {
            return Err(CodecError::Decode { pos, reason: "expected separator 01" });
        }
    }
    Ok(MultisetOfStrings { elems })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use num_traits::Zero;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(BitString::empty().rank(), BigUint::zero());
        assert_eq!(bs("0").rank(), BigUint::from(1u32));
        assert_eq!(bs("11").rank(), BigUint::from(6u32));
    }

    #[test]
    fn unrank_examples() {
        assert_eq!(BitString::from_rank_u64(0), BitString::empty());
        assert_eq!(BitString::from_rank_u64(2), bs("1"));
        assert_eq!(BitString::from_rank_u64(7), bs("000"));
    }

    #[test]
    fn rank_roundtrip_dense() {
        for n in 0..100_000u64 {
            let s = BitString::from_rank_u64(n);
            assert_eq!(s.rank_u64(), Some(n));
            assert_eq!(BitString::from_rank(&s.rank()), s);
        }
    }

    #[test]
    fn pair_examples() {
        let e = BitString::empty();
        assert_eq!(pair_encode(&e, &e), e);
        assert_eq!(pair_encode(&bs("0"), &e), bs("0"));
        assert_eq!(pair_encode(&e, &bs("0")), bs("1"));
        assert_eq!(pair_decode(&e), (e.clone(), e.clone()));
        assert_eq!(pair_decode(&bs("1")), (e.clone(), bs("0")));
        assert_eq!(pair_decode(&bs("01011")), (bs("1"), bs("11")));
    }

    #[test]
    fn pair_roundtrip_exhaustive_small() {
        for m in 0..512u64 {
            for n in 0..512u64 {
                let a = BitString::from_rank_u64(m);
                let b = BitString::from_rank_u64(n);
                let enc = pair_encode(&a, &b);
                assert_eq!(pair_decode(&enc), (a.clone(), b.clone()));
                assert_eq!(enc.rank_u64(), pair_rank_u64(m, n));
            }
        }
    }

    #[test]
    fn pair_monotone_in_each_argument() {
        for m in 0..64u64 {
            for n in 0..64u64 {
                let a = BitString::from_rank_u64(m);
                let a2 = BitString::from_rank_u64(m + 1);
                let b = BitString::from_rank_u64(n);
                assert!(pair_encode(&a, &b).rank() < pair_encode(&a2, &b).rank());
                assert!(pair_encode(&b, &a).rank() < pair_encode(&b, &a2).rank());
            }
        }
    }

    #[test]
    fn multiset_encode_examples() {
        let eps = MultisetOfStrings::singleton(BitString::empty());
        assert_eq!(multiset_encode(&eps).unwrap(), bs("10"));
        let one = MultisetOfStrings::singleton(bs("1"));
        assert_eq!(multiset_encode(&one).unwrap(), bs("11"));
        let m = MultisetOfStrings::from_elements(vec![BitString::empty(), bs("0")]);
        assert_eq!(multiset_encode(&m).unwrap(), bs("100100"));
    }

    #[test]
    fn multiset_decode_examples() {
        assert_eq!(
            multiset_decode(&bs("10")).unwrap(),
            MultisetOfStrings::singleton(BitString::empty())
        );
        assert_eq!(
            multiset_decode(&bs("100100")).unwrap(),
            MultisetOfStrings::from_elements(vec![BitString::empty(), bs("0")])
        );
        assert_eq!(
            multiset_decode(&bs("0")),
            Err(CodecError::Decode { pos: 0, reason: "odd-length block cannot be a doubled character" })
        );
        assert!(multiset_decode(&BitString::empty()).is_err());
        // out-of-order elements are not in the image
        assert!(multiset_decode(&bs("000110")).is_err());
    }

    #[test]
    fn empty_multiset_rejected() {
        assert_eq!(multiset_encode(&MultisetOfStrings::new()), Err(CodecError::EmptyMultiset));
    }

    #[test]
    fn union_is_canonical_and_order_independent() {
        let a = MultisetOfStrings::from_elements(vec![bs("1"), BitString::empty()]);
        let b = MultisetOfStrings::from_elements(vec![bs("0"), bs("1")]);
        let u1 = a.union(&b);
        let u2 = b.union(&a);
        assert_eq!(u1, u2);
        assert_eq!(multiset_encode(&u1), multiset_encode(&u2));
        let mut sorted = u1.elements().to_vec();
        sorted.sort();
        assert_eq!(sorted, u1.elements());
    }

    proptest! {
        #[test]
        fn prop_rank_roundtrip(bits in proptest::collection::vec(0u8..=1, 0..40)) {
            let s = BitString::from_bits(&bits);
            prop_assert_eq!(BitString::from_rank(&s.rank()), s);
        }

        #[test]
        fn prop_pair_roundtrip(a in proptest::collection::vec(0u8..=1, 0..24),
                               b in proptest::collection::vec(0u8..=1, 0..24)) {
            let a = BitString::from_bits(&a);
            let b = BitString::from_bits(&b);
            prop_assert_eq!(pair_decode(&pair_encode(&a, &b)), (a, b));
        }

        #[test]
        fn prop_multiset_roundtrip(elems in proptest::collection::vec(
            proptest::collection::vec(0u8..=1, 0..5), 1..7)) {
            let m = MultisetOfStrings::from_elements(
                elems.iter().map(|e| BitString::from_bits(e)).collect());
            let enc = multiset_encode(&m).unwrap();
            prop_assert_eq!(multiset_decode(&enc).unwrap(), m);
        }
    }
}
