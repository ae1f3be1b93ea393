//! Role-oriented command-line frontend. A directory of canonical JSON
//! files stands in for the public bulletin board; share files are the
//! secure-channel artifact.
//!
//! Exit codes are a stable contract:
//!   0 success, 1 verification returned false, 2 validation error,
//!   3 not a member, 4 dishonest participant(s), 5 incomplete set,
//!   6 capacity exceeded, 7 orphaned secret.

use clap::{Parser, Subcommand};
use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Error;
use crate::format::{
    self, canonical_json, canonical_json_line, CapacitiesDoc, PseudoShareDoc, ShareDoc,
};
use crate::renew::{self, BulletinDelta};
use crate::scheme::{
    self, AccessStructure, Bulletin, Capacities, DealerConfig, PseudoShare, SavedRng, SchemeState,
};
use crate::commit::{CommitmentMode, HashAlgorithm};
use crate::field::validate_prime;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FALSE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_MEMBERSHIP: i32 = 3;
pub const EXIT_DISHONEST: i32 = 4;
pub const EXIT_INCOMPLETE: i32 = 5;
pub const EXIT_CAPACITY: i32 = 6;
pub const EXIT_ORPHAN: i32 = 7;

/// Environment variable naming the default bulletin-board directory.
pub const BULLETIN_DIR_ENV: &str = "MSSGAS_BULLETIN_DIR";

const BULLETIN_FILE: &str = "bulletin.json";
const STATE_FILE: &str = "dealer.state";
const JOURNAL_FILE: &str = "journal.jsonl";
const SHARES_DIR: &str = "shares";

#[derive(Parser)]
#[command(name = "mssgas", version, about = "Multi-use multi-secret sharing for general access structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the dealer phase from a config file and publish the bulletin
    Setup {
        /// JSON config: prime, secrets, participants, access structure
        #[arg(long)]
        config: PathBuf,
        /// Output directory (default: $MSSGAS_BULLETIN_DIR, then `.`)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Deterministic seed for tests. INSECURE: makes every drawn value
        /// reproducible
        #[arg(long)]
        seed: Option<u64>,
        /// Override the commitment mode from the config (`hash` or `dlog`)
        #[arg(long)]
        mode: Option<String>,
    },
    /// Compute this participant's pseudo share for one (secret, set) pair
    PseudoShare {
        #[arg(long)]
        bulletin: Option<PathBuf>,
        /// The participant's share file
        #[arg(long)]
        share: PathBuf,
        #[arg(long)]
        secret_index: u32,
        #[arg(long)]
        set_index: u32,
    },
    /// Verify submitted pseudo shares and reconstruct the secret
    Reconstruct {
        #[arg(long)]
        bulletin: Option<PathBuf>,
        #[arg(long)]
        secret_index: u32,
        #[arg(long)]
        set_index: u32,
        /// Pseudo-share documents, one per member of the qualified set
        #[arg(required = true)]
        documents: Vec<PathBuf>,
    },
    /// Check a revealed secret against its published commitment
    VerifySecret {
        #[arg(long)]
        bulletin: Option<PathBuf>,
        #[arg(long)]
        secret_index: u32,
        /// The revealed secret, in decimal
        #[arg(long)]
        secret: String,
    },
    /// Dealer-side renewal of the live scheme
    Renew {
        /// Dealer state file (default: $MSSGAS_BULLETIN_DIR/dealer.state)
        #[arg(long)]
        state: Option<PathBuf>,
        /// Reseed the dealer's generator before the operation. INSECURE
        #[arg(long)]
        seed: Option<u64>,
        #[command(subcommand)]
        op: RenewCommand,
    },
}

#[derive(Subcommand)]
enum RenewCommand {
    /// Add a new secret with its qualified sets
    AddSecret {
        /// The new secret, in decimal
        #[arg(long)]
        secret: String,
        /// A qualified set as comma-separated participant indices; repeatable
        #[arg(long = "set", required = true)]
        sets: Vec<String>,
    },
    /// Replace a secret; its sets are republished under fresh indices
    DeactivateSecret {
        #[arg(long)]
        secret_index: u32,
        /// Replacement secret, in decimal
        #[arg(long)]
        replacement: String,
    },
    /// Register a new participant (share drawn unless supplied)
    AddParticipant {
        /// Participant-chosen share, in decimal
        #[arg(long)]
        share: Option<String>,
    },
    /// Retire a participant; affected secrets need replacements
    DeactivateParticipant {
        #[arg(long)]
        participant: u32,
        /// Replacement per affected secret as `<index>=<decimal>`; repeatable
        #[arg(long = "replacement")]
        replacements: Vec<String>,
    },
    /// Add a qualified set to an existing secret
    AddSet {
        #[arg(long)]
        secret_index: u32,
        /// Comma-separated participant indices
        #[arg(long)]
        members: String,
    },
    /// Retire a qualified set; the secret is replaced
    DeactivateSet {
        #[arg(long)]
        secret_index: u32,
        #[arg(long)]
        set_index: u32,
        /// Replacement secret, in decimal
        #[arg(long)]
        replacement: String,
    },
}

/// Setup configuration document. Integers are decimal strings so that
/// arbitrary-precision values survive JSON.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    prime: String,
    #[serde(default)]
    hash: Option<String>,
    #[serde(default)]
    mode: Option<String>,
    #[serde(default)]
    generator: Option<String>,
    participants: u32,
    secrets: Vec<String>,
    access_structure: Vec<Vec<Vec<u32>>>,
    #[serde(default)]
    capacities: Option<CapacitiesDoc>,
    #[serde(default)]
    shares: Option<Vec<String>>,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::NotAMember { .. } => EXIT_MEMBERSHIP,
            Error::VerificationFailed(_) => EXIT_DISHONEST,
            Error::IncompleteSet(_) => EXIT_INCOMPLETE,
            Error::CapacityExceeded(_) => EXIT_CAPACITY,
            Error::OrphanedSecret(_) => EXIT_ORPHAN,
            _ => EXIT_VALIDATION,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult = Result<i32, Failure>;

/// Parses the arguments and runs one command; returns the process exit
/// code. Clap itself exits with code 2 on usage errors, matching the
/// validation class.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}

fn dispatch(cli: Cli) -> CliResult {
    match cli.command {
        Command::Setup {
            config,
            out,
            seed,
            mode,
        } => cmd_setup(&config, out, seed, mode),
        Command::PseudoShare {
            bulletin,
            share,
            secret_index,
            set_index,
        } => cmd_pseudo_share(bulletin, &share, secret_index, set_index),
        Command::Reconstruct {
            bulletin,
            secret_index,
            set_index,
            documents,
        } => cmd_reconstruct(bulletin, secret_index, set_index, &documents),
        Command::VerifySecret {
            bulletin,
            secret_index,
            secret,
        } => cmd_verify_secret(bulletin, secret_index, &secret),
        Command::Renew { state, seed, op } => cmd_renew(state, seed, op),
    }
}

// ---------------------------------------------------------------------------
// path and io helpers

fn default_dir() -> PathBuf {
    std::env::var_os(BULLETIN_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn bulletin_path(explicit: Option<PathBuf>) -> PathBuf {
    explicit.unwrap_or_else(|| default_dir().join(BULLETIN_FILE))
}

fn state_path(explicit: Option<PathBuf>) -> PathBuf {
    explicit.unwrap_or_else(|| default_dir().join(STATE_FILE))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::validation(format!("cannot read {}: {e}", path.display())))
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)
        .map_err(|e| Failure::validation(format!("cannot write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path)
        .map_err(|e| Failure::validation(format!("cannot replace {}: {e}", path.display())))
}

fn append_line(path: &Path, line: &str) -> Result<(), Failure> {
    use std::io::Write;
    let mut file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Failure::validation(format!("cannot open {}: {e}", path.display())))?;
    file.write_all(line.as_bytes())
        .map_err(|e| Failure::validation(format!("cannot append to {}: {e}", path.display())))
}

/// Exclusive advisory lock on a stable sidecar file; released when the
/// returned handle drops. The state file itself is replaced by rename, so
/// it cannot carry the lock.
fn lock_state(state_file: &Path) -> Result<fs::File, Failure> {
    let lock_path = state_file.with_extension("state.lock");
    let file = fs::File::create(&lock_path)
        .map_err(|e| Failure::validation(format!("cannot create {}: {e}", lock_path.display())))?;
    file.lock()
        .map_err(|e| Failure::validation(format!("cannot lock {}: {e}", lock_path.display())))?;
    Ok(file)
}

fn parse_decimal(s: &str, what: &str) -> Result<BigUint, Failure> {
    BigUint::parse_bytes(s.trim().as_bytes(), 10)
        .ok_or_else(|| Failure::validation(format!("{what} `{s}` is not a decimal integer")))
}

fn parse_member_list(s: &str) -> Result<Vec<u32>, Failure> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<u32>()
                .map_err(|_| Failure::validation(format!("invalid participant index `{part}`")))
        })
        .collect()
}

fn load_bulletin(explicit: Option<PathBuf>) -> Result<Bulletin, Failure> {
    let path = bulletin_path(explicit);
    Ok(format::parse_bulletin(&read_text(&path)?)?)
}

// ---------------------------------------------------------------------------
// setup

fn cmd_setup(
    config_path: &Path,
    out: Option<PathBuf>,
    seed: Option<u64>,
    mode_override: Option<String>,
) -> CliResult {
    let config: ConfigDoc = serde_json::from_str(&read_text(config_path)?)
        .map_err(|e| Failure::validation(format!("invalid config: {e}")))?;
    let out_dir = out.unwrap_or_else(default_dir);

    let prime = validate_prime(&parse_decimal(&config.prime, "prime")?)?;
    let secrets = config
        .secrets
        .iter()
        .map(|s| parse_decimal(s, "secret"))
        .collect::<Result<Vec<_>, _>>()?;
    let structure = AccessStructure {
        per_secret: config.access_structure.clone(),
    };
    let mode_id = mode_override
        .or(config.mode)
        .unwrap_or_else(|| "hash".to_string());
    let dealer_config = DealerConfig {
        hash: HashAlgorithm::from_id(config.hash.as_deref().unwrap_or("sha256"))?,
        mode: CommitmentMode::from_id(&mode_id)?,
        generator: config
            .generator
            .as_deref()
            .map(|g| parse_decimal(g, "generator"))
            .transpose()?,
        capacities: config.capacities.as_ref().map(|c| Capacities {
            max_secrets: c.max_secrets,
            max_sets: c.max_sets,
        }),
        supplied_shares: config
            .shares
            .as_ref()
            .map(|shares| {
                shares
                    .iter()
                    .map(|s| parse_decimal(s, "share"))
                    .collect::<Result<Vec<_>, _>>()
            })
            .transpose()?,
    };

    let (mut state, shares) = match seed {
        Some(s) => {
            let mut rng = ChaCha20Rng::seed_from_u64(s);
            let result = scheme::dealer_setup(
                &secrets,
                &structure,
                config.participants,
                prime,
                &dealer_config,
                &mut rng,
            )?;
            (result.0, result.1, Some(SavedRng::capture(&rng)))
        }
        None => {
            let mut rng = ChaCha20Rng::from_entropy();
            let result = scheme::dealer_setup(
                &secrets,
                &structure,
                config.participants,
                prime,
                &dealer_config,
                &mut rng,
            )?;
            (result.0, result.1, None)
        }
    }
    .pipe_rng();
    fn tuple_rng(
        t: (SchemeState, BTreeMap<u32, crate::field::FieldElement>, Option<SavedRng>),
    ) -> (SchemeState, BTreeMap<u32, crate::field::FieldElement>) {
        let (mut state, shares, rng) = t;
        state.rng = rng;
        (state, shares)
    }

    let scheme_id = state.bulletin.params.scheme_id();
    fs::create_dir_all(out_dir.join(SHARES_DIR))
        .map_err(|e| Failure::validation(format!("cannot create output directory: {e}")))?;
    write_atomic(
        &out_dir.join(BULLETIN_FILE),
        &canonical_json(&format::bulletin_to_doc(&state.bulletin)),
    )?;
    for (j, share) in &shares {
        write_atomic(
            &out_dir.join(SHARES_DIR).join(format!("P{j}.share")),
            &canonical_json(&format::share_to_doc(*j, share, &scheme_id)),
        )?;
    }
    write_atomic(
        &out_dir.join(STATE_FILE),
        &canonical_json(&format::state_to_doc(&state)),
    )?;
    write_atomic(
        &out_dir.join(JOURNAL_FILE),
        &canonical_json_line(&format::journal_record_for_setup(&state.bulletin)),
    )?;
    println!(
        "setup: version 1, secrets {}, participants {}",
        state.secrets().len(),
        shares.len()
    );
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// participant and combiner commands

fn cmd_pseudo_share(
    bulletin: Option<PathBuf>,
    share_path: &Path,
    secret_index: u32,
    set_index: u32,
) -> CliResult {
    let bulletin = load_bulletin(bulletin)?;
    let doc: ShareDoc = serde_json::from_str(&read_text(share_path)?)
        .map_err(|e| Failure::validation(format!("invalid share file: {e}")))?;
    let (participant, share) = format::share_from_doc(&doc, &bulletin)?;
    let claim = scheme::participant_pseudo_share(
        participant,
        &share,
        secret_index,
        set_index,
        &bulletin.params,
    )?;
    print!(
        "{}",
        canonical_json(&format::pseudo_share_to_doc(
            &claim,
            &bulletin.params.scheme_id()
        ))
    );
    Ok(EXIT_OK)
}

fn cmd_reconstruct(
    bulletin: Option<PathBuf>,
    secret_index: u32,
    set_index: u32,
    documents: &[PathBuf],
) -> CliResult {
    let bulletin = load_bulletin(bulletin)?;
    let mut claims: BTreeMap<u32, PseudoShare> = BTreeMap::new();
    for path in documents {
        let doc: PseudoShareDoc = serde_json::from_str(&read_text(path)?)
            .map_err(|e| Failure::validation(format!("invalid pseudo-share document: {e}")))?;
        let claim = format::pseudo_share_from_doc(&doc, &bulletin)?;
        if claims.insert(claim.participant, claim).is_some() {
            return Err(Failure::validation(format!(
                "two documents for participant {}",
                doc.participant
            )));
        }
    }

    let set = bulletin.params.active_set(secret_index, set_index)?.clone();
    let missing: Vec<u32> = set
        .members
        .iter()
        .copied()
        .filter(|j| !claims.contains_key(j))
        .collect();
    if !missing.is_empty() {
        return Err(Error::IncompleteSet(missing).into());
    }

    // per-participant verdicts against the target (i, q, j) commitments;
    // a pseudo share replayed from another pair fails here
    let mut dishonest = Vec::new();
    for &j in &set.members {
        let targeted = PseudoShare {
            value: claims[&j].value.clone(),
            secret_index,
            set_index,
            participant: j,
        };
        let ok = scheme::combiner_verify_participant(&targeted, &bulletin)?;
        println!("participant {j}: {}", if ok { "ok" } else { "FAIL" });
        if !ok {
            dishonest.push(j);
        }
    }
    if !dishonest.is_empty() {
        return Err(Error::VerificationFailed(dishonest).into());
    }

    let secret = scheme::combiner_reconstruct(secret_index, set_index, &claims, &bulletin)?;
    let secret_ok = scheme::participant_verify_secret(&secret, secret_index, &bulletin)?;
    println!(
        "secret commitment: {}",
        if secret_ok { "ok" } else { "FAIL" }
    );
    println!("{}", secret.value().to_str_radix(10));
    Ok(if secret_ok { EXIT_OK } else { EXIT_VERIFY_FALSE })
}

fn cmd_verify_secret(
    bulletin: Option<PathBuf>,
    secret_index: u32,
    secret: &str,
) -> CliResult {
    let bulletin = load_bulletin(bulletin)?;
    let raw = parse_decimal(secret, "secret")?;
    // a claim outside the field cannot be the secret
    let verdict = match bulletin.params.prime.checked_element(raw) {
        Some(element) => scheme::participant_verify_secret(&element, secret_index, &bulletin)?,
        None => {
            // still surface UnknownSecretIndex for a bad index
            scheme::participant_verify_secret(
                &bulletin.params.prime.zero(),
                secret_index,
                &bulletin,
            )?;
            false
        }
    };
    println!("{}", if verdict { "ok" } else { "mismatch" });
    Ok(if verdict { EXIT_OK } else { EXIT_VERIFY_FALSE })
}

// ---------------------------------------------------------------------------
// renewal

fn cmd_renew(state: Option<PathBuf>, seed: Option<u64>, op: RenewCommand) -> CliResult {
    let state_file = state_path(state);
    let dir = state_file
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let _lock = lock_state(&state_file)?;
    let state = format::parse_state(&read_text(&state_file)?)?;

    let (mut rng, deterministic) = match (seed, &state.rng) {
        (Some(s), _) => (ChaCha20Rng::seed_from_u64(s), true),
        (None, Some(saved)) => (saved.restore(), true),
        (None, None) => (ChaCha20Rng::from_entropy(), false),
    };

    let (mut next, delta, extra) = apply_renew(&state, &op, &mut rng)?;
    if deterministic {
        next.rng = Some(SavedRng::capture(&rng));
    }

    write_atomic(&state_file, &canonical_json(&format::state_to_doc(&next)))?;
    write_atomic(
        &dir.join(BULLETIN_FILE),
        &canonical_json(&format::bulletin_to_doc(&next.bulletin)),
    )?;
    append_line(
        &dir.join(JOURNAL_FILE),
        &canonical_json_line(&format::journal_record_for_delta(&delta)),
    )?;
    if let Some((j, share)) = extra {
        let scheme_id = next.bulletin.params.scheme_id();
        fs::create_dir_all(dir.join(SHARES_DIR))
            .map_err(|e| Failure::validation(format!("cannot create shares directory: {e}")))?;
        write_atomic(
            &dir.join(SHARES_DIR).join(format!("P{j}.share")),
            &canonical_json(&format::share_to_doc(j, &share, &scheme_id)),
        )?;
        println!("registered participant {j}");
    }
    println!(
        "renew {}: version {}, affected {}",
        delta.op.id(),
        delta.version,
        delta.affected.join(" ")
    );
    Ok(EXIT_OK)
}

type RenewOutcome = (
    SchemeState,
    BulletinDelta,
    Option<(u32, crate::field::FieldElement)>,
);

fn apply_renew(
    state: &SchemeState,
    op: &RenewCommand,
    rng: &mut ChaCha20Rng,
) -> Result<RenewOutcome, Failure> {
    match op {
        RenewCommand::AddSecret { secret, sets } => {
            let value = parse_decimal(secret, "secret")?;
            let parsed_sets = sets
                .iter()
                .map(|s| parse_member_list(s))
                .collect::<Result<Vec<_>, _>>()?;
            let (next, delta) = renew::add_secret(state, &value, &parsed_sets, rng)?;
            Ok((next, delta, None))
        }
        RenewCommand::DeactivateSecret {
            secret_index,
            replacement,
        } => {
            let value = parse_decimal(replacement, "replacement")?;
            let (next, delta) = renew::deactivate_secret(state, *secret_index, &value, rng)?;
            Ok((next, delta, None))
        }
        RenewCommand::AddParticipant { share } => {
            let supplied = share
                .as_deref()
                .map(|s| parse_decimal(s, "share"))
                .transpose()?;
            let (next, j, new_share, delta) =
                renew::add_participant(state, supplied.as_ref(), None, rng)?;
            Ok((next, delta, Some((j, new_share))))
        }
        RenewCommand::DeactivateParticipant {
            participant,
            replacements,
        } => {
            let mut map = BTreeMap::new();
            for entry in replacements {
                let (index, value) = entry.split_once('=').ok_or_else(|| {
                    Failure::validation(format!(
                        "replacement `{entry}` must look like <secret-index>=<decimal>"
                    ))
                })?;
                let i: u32 = index.trim().parse().map_err(|_| {
                    Failure::validation(format!("invalid secret index `{index}`"))
                })?;
                if map
                    .insert(i, parse_decimal(value, "replacement")?)
                    .is_some()
                {
                    return Err(Failure::validation(format!(
                        "two replacements for secret {i}"
                    )));
                }
            }
            let (next, delta) = renew::deactivate_participant(state, *participant, &map, rng)?;
            Ok((next, delta, None))
        }
        RenewCommand::AddSet {
            secret_index,
            members,
        } => {
            let parsed = parse_member_list(members)?;
            let (next, delta) = renew::add_qualified_set(state, *secret_index, &parsed, rng)?;
            Ok((next, delta, None))
        }
        RenewCommand::DeactivateSet {
            secret_index,
            set_index,
            replacement,
        } => {
            let value = parse_decimal(replacement, "replacement")?;
            let (next, delta) =
                renew::deactivate_qualified_set(state, *secret_index, *set_index, &value, rng)?;
            Ok((next, delta, None))
        }
    }
}
