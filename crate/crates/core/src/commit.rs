//! Hash-to-field derivation of pseudo shares and the two commitment
//! backends: hash commitments (the default) and discrete-log commitments
//! (g^value mod p, for schemes configured with a generator).
//!
//! Every protocol-level hash invocation goes through [`HashAlgorithm::digest`],
//! which bumps a thread-local counter. Tests use the counter to check the
//! scheme's hash budget: 2m+1 dealer invocations per qualified set of size
//! m, m combiner invocations, two per participant.

use num_bigint::BigUint;
use sha2::{Digest, Sha256, Sha512};
use std::cell::Cell;

use crate::encoding::{encode_field_element, BitString, EncodingParams};
use crate::error::{Error, Result};
use crate::field::{FieldElement, Prime};

thread_local! {
    static HASH_CALLS: Cell<u64> = const { Cell::new(0) };
}

/// Number of protocol hash invocations on this thread since the last reset.
pub fn hash_invocations() -> u64 {
    HASH_CALLS.with(|c| c.get())
}

/// Resets this thread's hash invocation counter.
pub fn reset_hash_invocations() {
    HASH_CALLS.with(|c| c.set(0));
}

/// Collision-resistant hash selected in the public parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HashAlgorithm {
    Sha256,
    Sha512,
}

impl HashAlgorithm {
    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "sha256" => Ok(HashAlgorithm::Sha256),
            "sha512" => Ok(HashAlgorithm::Sha512),
            other => Err(Error::UnknownHashAlgorithm(other.to_string())),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            HashAlgorithm::Sha256 => "sha256",
            HashAlgorithm::Sha512 => "sha512",
        }
    }

    pub fn digest_bits(&self) -> u32 {
        match self {
            HashAlgorithm::Sha256 => 256,
            HashAlgorithm::Sha512 => 512,
        }
    }

    /// One protocol hash invocation.
    pub fn digest(&self, data: &[u8]) -> Vec<u8> {
        HASH_CALLS.with(|c| c.set(c.get() + 1));
        match self {
            HashAlgorithm::Sha256 => Sha256::digest(data).to_vec(),
            HashAlgorithm::Sha512 => Sha512::digest(data).to_vec(),
        }
    }
}

/// Maps a bit string into Z_p: hash the left-zero-padded bytes, keep the
/// leading L = bit-length-of-p bits of the digest, read them big-endian and
/// reduce mod p. The reduction keeps every published equation field-typed;
/// its bias is at most 2^(1-L).
pub fn hash_to_field(input: &BitString, p: &Prime, hash: HashAlgorithm) -> FieldElement {
    debug_assert!(!input.is_empty());
    let digest = hash.digest(&input.to_padded_bytes());
    let digest_bits = 8 * digest.len() as u64;
    let mut value = BigUint::from_bytes_be(&digest);
    let keep = p.bits().min(digest_bits);
    value >>= digest_bits - keep;
    p.element(value)
}

/// Which commitment backend a scheme uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommitmentMode {
    Hash,
    Dlog,
}

impl CommitmentMode {
    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "hash" => Ok(CommitmentMode::Hash),
            "dlog" => Ok(CommitmentMode::Dlog),
            other => Err(Error::MalformedDocument(format!(
                "unknown commitment mode `{other}`"
            ))),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            CommitmentMode::Hash => "hash",
            CommitmentMode::Dlog => "dlog",
        }
    }
}

/// A published binding to a field element: either the digest of its L-bit
/// encoding or g^value mod p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Commitment {
    Hash(Vec<u8>),
    Dlog(FieldElement),
}

impl Commitment {
    pub fn mode(&self) -> CommitmentMode {
        match self {
            Commitment::Hash(_) => CommitmentMode::Hash,
            Commitment::Dlog(_) => CommitmentMode::Dlog,
        }
    }

    pub fn payload_hex(&self) -> String {
        match self {
            Commitment::Hash(digest) => hex::encode(digest),
            Commitment::Dlog(e) => e.to_hex(),
        }
    }
}

/// Everything needed to compute or check a commitment.
#[derive(Debug, Clone, Copy)]
pub struct CommitContext<'a> {
    pub prime: &'a Prime,
    pub hash: HashAlgorithm,
    pub mode: CommitmentMode,
    pub generator: Option<&'a FieldElement>,
    pub widths: &'a EncodingParams,
}

/// Commits to a field element under the context's mode.
pub fn commit(value: &FieldElement, ctx: &CommitContext<'_>) -> Result<Commitment> {
    match ctx.mode {
        CommitmentMode::Hash => {
            let bits = encode_field_element(value, ctx.widths);
            Ok(Commitment::Hash(ctx.hash.digest(&bits.to_padded_bytes())))
        }
        CommitmentMode::Dlog => {
            let g = ctx.generator.ok_or(Error::MissingGenerator)?;
            Ok(Commitment::Dlog(ctx.prime.pow(g, value.value())))
        }
    }
}

fn ct_eq(a: &[u8], b: &[u8]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut diff = 0u8;
    for (x, y) in a.iter().zip(b) {
        diff |= x ^ y;
    }
    diff == 0
}

/// True iff recommitting to `value` reproduces `c`. Follows the mode the
/// commitment was made under; hash digests compare in constant time.
pub fn verify_commitment(value: &FieldElement, c: &Commitment, ctx: &CommitContext<'_>) -> bool {
    let recomputed = commit(
        value,
        &CommitContext {
            mode: c.mode(),
            ..*ctx
        },
    );
    match (recomputed, c) {
        (Ok(Commitment::Hash(d)), Commitment::Hash(expected)) => ct_eq(&d, expected),
        (Ok(Commitment::Dlog(e)), Commitment::Dlog(expected)) => &e == expected,
        _ => false,
    }
}
