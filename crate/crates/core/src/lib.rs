//! Verifiable, multi-use, multi-secret sharing for general access
//! structures.
//!
//! A trusted dealer shares k secrets among n participants, each holding a
//! single field element. Every secret carries its own collection of
//! qualified sets; the full membership of a set reconstructs the secret
//! via Lagrange interpolation at zero over points recovered from
//! hash-derived one-time pseudo shares and published masks. Hash (or
//! discrete-log) commitments let the combiner verify participants and the
//! participants verify the combiner. The access structure is renewable:
//! secrets, participants and qualified sets can be added or deactivated
//! without touching any existing share.

pub mod cli;
pub mod commit;
pub mod encoding;
pub mod error;
pub mod field;
pub mod format;
pub mod renew;
pub mod scheme;

pub use error::{Error, Result};
