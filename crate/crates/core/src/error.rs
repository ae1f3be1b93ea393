use thiserror::Error;

/// Errors surfaced by the scheme library.
///
/// Variants map one-to-one onto the failure cases of the protocol
/// operations; the CLI layer translates them into stable exit codes.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("prime candidate must be at least 3")]
    TooSmall,
    #[error("candidate failed probabilistic primality testing")]
    NotPrime,
    #[error("polynomial degree must be at least 1 (qualified sets have at least 2 members)")]
    DegreeTooSmall,
    #[error("interpolation points contain a duplicate abscissa")]
    DuplicateAbscissa,
    #[error("interpolation requires at least 2 points")]
    InsufficientPoints,
    #[error("index {index} does not fit in {width} bits")]
    IndexOverflow { index: u32, width: u32 },
    #[error("unknown hash algorithm `{0}`")]
    UnknownHashAlgorithm(String),
    #[error("dlog mode requires a configured generator")]
    MissingGenerator,
    #[error("secret {index} is not smaller than the prime")]
    SecretOutOfRange { index: u32 },
    #[error("invalid access structure: {0}")]
    StructureInvalid(String),
    #[error("capacity exceeded: {0}")]
    CapacityExceeded(String),
    #[error("participant {participant} is not a member of qualified set ({secret_index},{set_index})")]
    NotAMember {
        participant: u32,
        secret_index: u32,
        set_index: u32,
    },
    #[error("no bulletin entry for (secret {0}, set {1}, participant {2})")]
    UnknownTriple(u32, u32, u32),
    #[error("pseudo shares missing for participants {0:?}")]
    IncompleteSet(Vec<u32>),
    #[error("verification failed for participants {0:?}")]
    VerificationFailed(Vec<u32>),
    #[error("no active qualified set (secret {0}, set {1})")]
    UnknownSet(u32, u32),
    #[error("no active secret with index {0}")]
    UnknownSecretIndex(u32),
    #[error("no participant with index {0}")]
    UnknownParticipant(u32),
    #[error("supplied share collides with an existing share")]
    DuplicateShare,
    #[error("supplied identifier collides with an existing identifier")]
    DuplicateId,
    #[error("field is too small to assign further distinct values")]
    FieldExhausted,
    #[error("secret {0} would be left without any qualified set")]
    OrphanedSecret(u32),
    #[error("missing replacement for affected secret {0}")]
    MissingReplacement(u32),
    #[error("qualified set is already active for this secret")]
    DuplicateSet,
    #[error("replacement must differ from the active secret")]
    ReplacementUnchanged,
    #[error("malformed document: {0}")]
    MalformedDocument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
