//! Bit-exact encoding of hash inputs.
//!
//! A pseudo share is derived from the string x_L || i_u || q_v: the share
//! as an L-bit big-endian string, the secret index in u bits and the set
//! index in v bits, each left-zero-padded to its fixed width. The widths
//! are frozen at setup from declared capacities so that later renewals
//! never shift the encoding of existing entries. Before hashing, the
//! concatenated string is left-padded with zero bits to a whole number of
//! bytes; that padding rule is part of the wire format.

use num_bigint::BigUint;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::{FieldElement, Prime};

/// Fixed bit widths of the three hash-input components.
///
/// `field_bits` is the bit length L of the prime; `secret_index_bits` and
/// `set_index_bits` are sized for the declared capacities, not the current
/// counts, so adding secrets or sets never re-encodes existing entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodingParams {
    pub field_bits: u32,
    pub secret_index_bits: u32,
    pub set_index_bits: u32,
}

/// Exact bit length of a (positive) capacity: floor(log2 n) + 1.
pub fn index_width(capacity: u32) -> u32 {
    debug_assert!(capacity >= 1);
    u32::BITS - capacity.leading_zeros()
}

impl EncodingParams {
    pub fn new(field_bits: u32, secret_index_bits: u32, set_index_bits: u32) -> Self {
        EncodingParams {
            field_bits,
            secret_index_bits,
            set_index_bits,
        }
    }

    /// Derives widths from the prime and the capacity ceilings.
    pub fn for_prime(p: &Prime, max_secrets: u32, max_sets: u32) -> Self {
        EncodingParams {
            field_bits: p.bits() as u32,
            secret_index_bits: index_width(max_secrets),
            set_index_bits: index_width(max_sets),
        }
    }

    pub fn total_bits(&self) -> u32 {
        self.field_bits + self.secret_index_bits + self.set_index_bits
    }
}

/// An MSB-first bit string.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new() -> Self {
        BitString::default()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Appends `value` as a fixed-width big-endian field. The caller must
    /// have checked that the value fits.
    pub fn push_uint(&mut self, value: &BigUint, width: u32) {
        debug_assert!(value.bits() <= width as u64, "value wider than field");
        for bit in (0..width as u64).rev() {
            self.bits.push(value.bit(bit));
        }
    }

    /// Left-pads with zero bits to a whole number of bytes and packs
    /// MSB-first. This is the exact byte string handed to the hash.
    pub fn to_padded_bytes(&self) -> Vec<u8> {
        let n_bytes = self.bits.len().div_ceil(8);
        let pad = n_bytes * 8 - self.bits.len();
        let mut out = vec![0u8; n_bytes];
        for (idx, bit) in self.bits.iter().enumerate() {
            if *bit {
                let pos = pad + idx;
                out[pos / 8] |= 0x80 >> (pos % 8);
            }
        }
        out
    }

    /// Parses a string of `0`/`1` characters.
    pub fn from_binary_str(s: &str) -> Option<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return None,
            }
        }
        Some(BitString { bits })
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in &self.bits {
            f.write_str(if *bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}

fn check_index(index: u32, width: u32) -> Result<()> {
    if index == 0 || (width < 32 && u64::from(index) >= 1u64 << width) {
        return Err(Error::IndexOverflow { index, width });
    }
    Ok(())
}

/// Builds the (L+u+v)-bit string x_L || i_u || q_v.
pub fn encode_hash_input(
    x: &FieldElement,
    i: u32,
    q: u32,
    params: &EncodingParams,
) -> Result<BitString> {
    check_index(i, params.secret_index_bits)?;
    check_index(q, params.set_index_bits)?;
    debug_assert!(x.value().bits() <= params.field_bits as u64);
    let mut bits = BitString::new();
    bits.push_uint(x.value(), params.field_bits);
    bits.push_uint(&BigUint::from(i), params.secret_index_bits);
    bits.push_uint(&BigUint::from(q), params.set_index_bits);
    Ok(bits)
}

/// Encodes a single field element at the fixed L-bit width; the hash
/// commitment preimage.
pub fn encode_field_element(x: &FieldElement, params: &EncodingParams) -> BitString {
    debug_assert!(x.value().bits() <= params.field_bits as u64);
    let mut bits = BitString::new();
    bits.push_uint(x.value(), params.field_bits);
    bits
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::validate_prime;
    use std::collections::HashSet;

    fn p13() -> crate::field::Prime {
        validate_prime(&BigUint::from(13u32)).unwrap()
    }

    #[test]
    fn encode_forced_by_definition() {
        let p = p13();
        let params = EncodingParams::new(4, 2, 3);
        let out = encode_hash_input(&p.element_from_u64(5), 2, 3, &params).unwrap();
        assert_eq!(out.to_string(), "010110011");
    }

    #[test]
    fn encode_zero_padding() {
        let p = p13();
        let params = EncodingParams::new(4, 1, 1);
        let out = encode_hash_input(&p.element_from_u64(0), 1, 1, &params).unwrap();
        assert_eq!(out.to_string(), "000011");
    }

    #[test]
    fn encode_index_overflow() {
        let p = p13();
        let params = EncodingParams::new(4, 2, 3);
        assert_eq!(
            encode_hash_input(&p.element_from_u64(5), 4, 1, &params),
            Err(Error::IndexOverflow { index: 4, width: 2 })
        );
        assert_eq!(
            encode_hash_input(&p.element_from_u64(5), 1, 8, &params),
            Err(Error::IndexOverflow { index: 8, width: 3 })
        );
        // zero indices are outside the 1-based domain
        assert!(encode_hash_input(&p.element_from_u64(5), 0, 1, &params).is_err());
    }

    #[test]
    fn padded_bytes_left_aligned() {
        let bits = BitString::from_binary_str("010110011").unwrap();
        assert_eq!(bits.to_padded_bytes(), vec![0x00, 0xb3]);
        let byte = BitString::from_binary_str("11111111").unwrap();
        assert_eq!(byte.to_padded_bytes(), vec![0xff]);
        let short = BitString::from_binary_str("1").unwrap();
        assert_eq!(short.to_padded_bytes(), vec![0x01]);
    }

    #[test]
    fn encoding_injective_over_declared_domain() {
        // exhaustive at L=4, u=2, v=2
        let p = p13();
        let params = EncodingParams::new(4, 2, 2);
        let mut seen = HashSet::new();
        for x in 0..13u64 {
            for i in 1..4u32 {
                for q in 1..4u32 {
                    let s = encode_hash_input(&p.element_from_u64(x), i, q, &params)
                        .unwrap()
                        .to_string();
                    assert!(seen.insert(s), "collision at x={x} i={i} q={q}");
                }
            }
        }
        assert_eq!(seen.len(), 13 * 3 * 3);
    }

    #[test]
    fn index_width_is_exact_bit_length() {
        assert_eq!(index_width(1), 1);
        assert_eq!(index_width(2), 2);
        assert_eq!(index_width(3), 2);
        assert_eq!(index_width(4), 3);
        assert_eq!(index_width(255), 8);
        assert_eq!(index_width(256), 9);
    }
}
