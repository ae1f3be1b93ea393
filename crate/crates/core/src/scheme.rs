//! The protocol: dealer setup, participant-side pseudo-share computation,
//! combiner verification and reconstruction, and participant verification
//! of the combiner, all over an explicit public bulletin.
//!
//! A participant holds one long-term share x in Z_p. For every (secret i,
//! qualified set q) pair the participant belongs to, the one-time pseudo
//! share is U = h(x || i || q) with fixed-width encodings of the indices.
//! The dealer publishes, per member, the mask M = f(ID) - U mod p for the
//! set's polynomial f (constant term: the secret), plus hash or dlog
//! commitments N to every U and S to every secret. The combiner checks
//! claimed pseudo shares against N, recovers the polynomial points as
//! U + M, and interpolates at zero.

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

use crate::commit::{
    commit, verify_commitment, CommitContext, Commitment, CommitmentMode, HashAlgorithm,
};
use crate::encoding::{encode_hash_input, EncodingParams};
use crate::error::{Error, Result};
use crate::field::{lagrange_at_zero, poly_eval, sample_polynomial, FieldElement, Polynomial, Prime};

/// Capacity ceilings declared at setup. The hash-input index widths are
/// frozen from these, so the bulletin can grow up to the ceilings without
/// ever changing an existing pseudo share.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Capacities {
    pub max_secrets: u32,
    pub max_sets: u32,
}

/// Public registry entry for one participant. The share itself stays with
/// the dealer and the participant; only the identifier is published.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParticipantEntry {
    pub id: FieldElement,
    pub active: bool,
}

/// One qualified set: the exact group of participants that may jointly
/// reconstruct the secret. Members are stored sorted by index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetEntry {
    pub members: Vec<u32>,
    pub active: bool,
}

/// Per-secret slice of the access structure. Set indices are stable for
/// the lifetime of the scheme: deactivated indices are retired, never
/// reassigned, because pseudo shares are derived from them.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SecretEntry {
    pub sets: BTreeMap<u32, SetEntry>,
    pub active: bool,
}

impl SecretEntry {
    pub fn active_sets(&self) -> impl Iterator<Item = (u32, &SetEntry)> {
        self.sets
            .iter()
            .filter(|(_, s)| s.active)
            .map(|(q, s)| (*q, s))
    }

    /// Next never-used set index.
    pub fn next_set_index(&self) -> u32 {
        self.sets.keys().next_back().map_or(1, |q| q + 1)
    }
}

/// Everything public about a scheme: field, hash, commitment mode,
/// encoding widths, capacities, participant identifiers and the access
/// structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicParameters {
    pub prime: Prime,
    pub hash: HashAlgorithm,
    pub mode: CommitmentMode,
    pub widths: EncodingParams,
    pub capacities: Capacities,
    pub generator: Option<FieldElement>,
    pub participants: BTreeMap<u32, ParticipantEntry>,
    pub structure: BTreeMap<u32, SecretEntry>,
}

impl PublicParameters {
    pub fn commit_context(&self) -> CommitContext<'_> {
        CommitContext {
            prime: &self.prime,
            hash: self.hash,
            mode: self.mode,
            generator: self.generator.as_ref(),
            widths: &self.widths,
        }
    }

    /// Looks up an active qualified set.
    pub fn active_set(&self, i: u32, q: u32) -> Result<&SetEntry> {
        let secret = self.structure.get(&i).filter(|s| s.active);
        let set = secret
            .and_then(|s| s.sets.get(&q))
            .filter(|s| s.active)
            .ok_or(Error::UnknownSet(i, q))?;
        Ok(set)
    }

    pub fn active_participant_count(&self) -> u32 {
        self.participants.values().filter(|p| p.active).count() as u32
    }

    /// Digest binding the setup-frozen parameters (prime, hash, mode,
    /// widths, capacities, generator). Share files and pseudo-share
    /// documents carry it so they cannot be replayed against a different
    /// scheme. The registry and structure evolve under renewal and are
    /// deliberately excluded.
    pub fn scheme_id(&self) -> String {
        let mut preimage = format!(
            "mssgas;p={};h={};m={};L={};u={};v={};k={};l={}",
            self.prime.value().to_str_radix(16),
            self.hash.id(),
            self.mode.id(),
            self.widths.field_bits,
            self.widths.secret_index_bits,
            self.widths.set_index_bits,
            self.capacities.max_secrets,
            self.capacities.max_sets,
        );
        if let Some(g) = &self.generator {
            preimage.push_str(";g=");
            preimage.push_str(&g.to_hex());
        }
        hex::encode(Sha256::digest(preimage.as_bytes()))
    }
}

/// Canonical bulletin key: (secret index, set index, participant index),
/// all 1-based.
pub type TripleKey = (u32, u32, u32);

/// The public board: parameters plus every published mask and commitment.
/// Immutable snapshot; renewals produce a fresh bulletin with a bumped
/// version.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bulletin {
    pub params: PublicParameters,
    pub masks: BTreeMap<TripleKey, FieldElement>,
    pub participant_commitments: BTreeMap<TripleKey, Commitment>,
    pub secret_commitments: BTreeMap<u32, Commitment>,
    pub version: u64,
}

/// A one-time pseudo share bound to a (secret, set) pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoShare {
    pub value: FieldElement,
    pub secret_index: u32,
    pub set_index: u32,
    pub participant: u32,
}

/// Access structure as supplied to setup: for each secret, the list of
/// qualified sets, each a list of 1-based participant indices.
pub type QualifiedSet = Vec<u32>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccessStructure {
    pub per_secret: Vec<Vec<QualifiedSet>>,
}

/// Saved position of a seeded generator, carried in the dealer state so
/// seeded runs stay reproducible across renewals and process boundaries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SavedRng {
    pub seed: [u8; 32],
    pub word_pos: u128,
}

impl SavedRng {
    pub fn from_seed_u64(seed: u64) -> Self {
        let rng = ChaCha20Rng::seed_from_u64(seed);
        SavedRng {
            seed: rng.get_seed(),
            word_pos: rng.get_word_pos(),
        }
    }

    pub fn restore(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::from_seed(self.seed);
        rng.set_word_pos(self.word_pos);
        rng
    }

    pub fn capture(rng: &ChaCha20Rng) -> Self {
        SavedRng {
            seed: rng.get_seed(),
            word_pos: rng.get_word_pos(),
        }
    }
}

/// Dealer-private state: the secrets, per-(i,q) polynomials and all
/// participant shares, plus the bulletin they publish to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeState {
    pub(crate) secrets: BTreeMap<u32, FieldElement>,
    pub(crate) polynomials: BTreeMap<(u32, u32), Polynomial>,
    pub(crate) shares: BTreeMap<u32, FieldElement>,
    pub bulletin: Bulletin,
    pub rng: Option<SavedRng>,
}

impl SchemeState {
    pub fn secrets(&self) -> &BTreeMap<u32, FieldElement> {
        &self.secrets
    }

    pub fn secret(&self, i: u32) -> Option<&FieldElement> {
        self.secrets.get(&i)
    }

    pub fn polynomials(&self) -> &BTreeMap<(u32, u32), Polynomial> {
        &self.polynomials
    }

    pub fn shares(&self) -> &BTreeMap<u32, FieldElement> {
        &self.shares
    }

    pub fn share(&self, j: u32) -> Option<&FieldElement> {
        self.shares.get(&j)
    }

    /// Rebuilds dealer state from stored parts, checking structural
    /// consistency (every active set has a polynomial of the right shape,
    /// every registered participant has a share).
    pub fn from_parts(
        bulletin: Bulletin,
        secrets: BTreeMap<u32, FieldElement>,
        polynomials: BTreeMap<(u32, u32), Polynomial>,
        shares: BTreeMap<u32, FieldElement>,
        rng: Option<SavedRng>,
    ) -> Result<Self> {
        for j in bulletin.params.participants.keys() {
            if !shares.contains_key(j) {
                return Err(Error::MalformedDocument(format!(
                    "state is missing the share of participant {j}"
                )));
            }
        }
        for (i, entry) in &bulletin.params.structure {
            if !entry.active {
                continue;
            }
            let secret = secrets.get(i).ok_or_else(|| {
                Error::MalformedDocument(format!("state is missing secret {i}"))
            })?;
            for (q, set) in entry.active_sets() {
                let f = polynomials.get(&(*i, q)).ok_or_else(|| {
                    Error::MalformedDocument(format!("state is missing polynomial ({i},{q})"))
                })?;
                if f.constant_term() != secret || f.degree() != set.members.len() - 1 {
                    return Err(Error::MalformedDocument(format!(
                        "polynomial ({i},{q}) does not match its secret or set size"
                    )));
                }
            }
        }
        Ok(SchemeState {
            secrets,
            polynomials,
            shares,
            bulletin,
            rng,
        })
    }
}

/// Setup-time choices beyond the secrets and structure.
#[derive(Debug, Clone)]
pub struct DealerConfig {
    pub hash: HashAlgorithm,
    pub mode: CommitmentMode,
    /// Generator of Z_p^*, required in dlog mode.
    pub generator: Option<BigUint>,
    /// Defaults to twice the initial counts when omitted.
    pub capacities: Option<Capacities>,
    /// Participant-chosen shares (one per participant, distinct); when
    /// omitted the dealer draws them.
    pub supplied_shares: Option<Vec<BigUint>>,
}

impl Default for DealerConfig {
    fn default() -> Self {
        DealerConfig {
            hash: HashAlgorithm::Sha256,
            mode: CommitmentMode::Hash,
            generator: None,
            capacities: None,
            supplied_shares: None,
        }
    }
}

/// Number of distinct subsets of size >= 2 of an n-element universe;
/// the ceiling on qualified sets per secret. `None` means unbounded at
/// any practical scale.
pub(crate) fn qualified_set_bound(n: u32) -> Option<u128> {
    if n >= 64 {
        return None;
    }
    Some((1u128 << n) - u128::from(n) - 1)
}

/// Checks one qualified set against the registry predicate; returns the
/// members sorted.
pub(crate) fn normalize_set(
    members: &[u32],
    label: &str,
    mut is_valid_participant: impl FnMut(u32) -> bool,
) -> Result<Vec<u32>> {
    if members.len() < 2 {
        return Err(Error::StructureInvalid(format!(
            "qualified set {label} has {} member(s); at least 2 required",
            members.len()
        )));
    }
    let mut sorted = members.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::StructureInvalid(format!(
            "qualified set {label} repeats a participant"
        )));
    }
    for &j in &sorted {
        if !is_valid_participant(j) {
            return Err(Error::StructureInvalid(format!(
                "qualified set {label} names unknown or inactive participant {j}"
            )));
        }
    }
    Ok(sorted)
}

/// Computes one member's published values for a set polynomial: the
/// pseudo share U, the mask M = f(ID) - U, and the commitment N.
pub(crate) fn publish_member(
    params: &PublicParameters,
    share: &FieldElement,
    id: &FieldElement,
    f: &Polynomial,
    i: u32,
    q: u32,
) -> Result<(FieldElement, Commitment)> {
    let u = derive_pseudo_share(share, i, q, params)?;
    let b = poly_eval(f, id, &params.prime);
    let mask = params.prime.sub(&b, &u);
    let n = commit(&u, &params.commit_context())?;
    Ok((mask, n))
}

/// The deterministic pseudo-share pipeline shared by dealer and
/// participants: hash the (L+u+v)-bit encoding of (x, i, q) into Z_p.
pub fn derive_pseudo_share(
    share: &FieldElement,
    i: u32,
    q: u32,
    params: &PublicParameters,
) -> Result<FieldElement> {
    let bits = encode_hash_input(share, i, q, &params.widths)?;
    Ok(crate::commit::hash_to_field(&bits, &params.prime, params.hash))
}

fn draw_distinct<R: Rng + ?Sized>(
    prime: &Prime,
    count: u32,
    nonzero: bool,
    rng: &mut R,
) -> Vec<FieldElement> {
    let mut out: Vec<FieldElement> = Vec::with_capacity(count as usize);
    while out.len() < count as usize {
        let candidate = if nonzero {
            prime.random_nonzero(rng)
        } else {
            prime.random_element(rng)
        };
        if !out.contains(&candidate) {
            out.push(candidate);
        }
    }
    out
}

/// Runs the full dealer phase: assigns identifiers and shares, samples one
/// polynomial per (secret, qualified set), and publishes masks and
/// commitments. Returns the dealer state (which owns the bulletin) and the
/// share map handed to participants over the secure channel.
pub fn dealer_setup<R: Rng + ?Sized>(
    secrets: &[BigUint],
    structure: &AccessStructure,
    n: u32,
    p: Prime,
    config: &DealerConfig,
    rng: &mut R,
) -> Result<(SchemeState, BTreeMap<u32, FieldElement>)> {
    if secrets.is_empty() {
        return Err(Error::StructureInvalid("at least one secret required".into()));
    }
    if structure.per_secret.len() != secrets.len() {
        return Err(Error::StructureInvalid(format!(
            "{} secrets but {} access-structure entries",
            secrets.len(),
            structure.per_secret.len()
        )));
    }
    if n < 2 {
        return Err(Error::StructureInvalid(
            "at least 2 participants required".into(),
        ));
    }
    if BigUint::from(n) >= *p.value() {
        return Err(Error::StructureInvalid(
            "participant count must be smaller than the prime".into(),
        ));
    }
    let mut reduced_secrets = Vec::with_capacity(secrets.len());
    for (idx, s) in secrets.iter().enumerate() {
        let i = idx as u32 + 1;
        let element = p
            .checked_element(s.clone())
            .ok_or(Error::SecretOutOfRange { index: i })?;
        reduced_secrets.push(element);
    }

    let k = secrets.len() as u32;
    let l = structure
        .per_secret
        .iter()
        .map(|sets| sets.len() as u32)
        .max()
        .unwrap_or(0);
    let bound = qualified_set_bound(n);
    let mut normalized: Vec<Vec<Vec<u32>>> = Vec::with_capacity(structure.per_secret.len());
    for (idx, sets) in structure.per_secret.iter().enumerate() {
        let i = idx as u32 + 1;
        if sets.is_empty() {
            return Err(Error::StructureInvalid(format!(
                "secret {i} has no qualified set"
            )));
        }
        if let Some(bound) = bound {
            if sets.len() as u128 > bound {
                return Err(Error::StructureInvalid(format!(
                    "secret {i} declares {} qualified sets; at most {bound} distinct sets exist",
                    sets.len()
                )));
            }
        }
        let mut seen: Vec<Vec<u32>> = Vec::with_capacity(sets.len());
        for (sidx, members) in sets.iter().enumerate() {
            let q = sidx as u32 + 1;
            let sorted = normalize_set(members, &format!("{q} of secret {i}"), |j| {
                (1..=n).contains(&j)
            })?;
            if seen.contains(&sorted) {
                return Err(Error::StructureInvalid(format!(
                    "secret {i} lists the same qualified set twice"
                )));
            }
            seen.push(sorted);
        }
        normalized.push(seen);
    }

    let capacities = config.capacities.unwrap_or(Capacities {
        max_secrets: 2 * k,
        max_sets: 2 * l,
    });
    if capacities.max_secrets < k {
        return Err(Error::CapacityExceeded(format!(
            "{k} secrets exceed the declared ceiling of {}",
            capacities.max_secrets
        )));
    }
    if let Some(over) = normalized.iter().position(|s| s.len() as u32 > capacities.max_sets) {
        return Err(Error::CapacityExceeded(format!(
            "secret {} declares {} qualified sets, ceiling is {}",
            over + 1,
            normalized[over].len(),
            capacities.max_sets
        )));
    }

    let generator = match (config.mode, &config.generator) {
        (CommitmentMode::Dlog, None) => return Err(Error::MissingGenerator),
        (_, Some(g)) => {
            let g = p.checked_element(g.clone()).filter(|g| {
                g.value() > &BigUint::from(1u32)
            });
            match g {
                Some(g) => Some(g),
                None => {
                    return Err(Error::StructureInvalid(
                        "generator must lie in 2..p-1".into(),
                    ))
                }
            }
        }
        (CommitmentMode::Hash, None) => None,
    };

    // Identifiers first, then shares; the draw order is part of the
    // seeded-determinism contract.
    let ids = draw_distinct(&p, n, true, rng);
    let share_values = match &config.supplied_shares {
        Some(candidates) => {
            if candidates.len() != n as usize {
                return Err(Error::StructureInvalid(format!(
                    "{} supplied shares for {n} participants",
                    candidates.len()
                )));
            }
            let mut elements = Vec::with_capacity(candidates.len());
            for c in candidates {
                let e = p.checked_element(c.clone()).ok_or_else(|| {
                    Error::StructureInvalid("supplied share not below the prime".into())
                })?;
                if elements.contains(&e) {
                    return Err(Error::DuplicateShare);
                }
                elements.push(e);
            }
            elements
        }
        None => draw_distinct(&p, n, false, rng),
    };

    let widths = EncodingParams::for_prime(&p, capacities.max_secrets, capacities.max_sets);
    let mut params = PublicParameters {
        prime: p,
        hash: config.hash,
        mode: config.mode,
        widths,
        capacities,
        generator,
        participants: (1..=n)
            .zip(ids)
            .map(|(j, id)| (j, ParticipantEntry { id, active: true }))
            .collect(),
        structure: BTreeMap::new(),
    };
    for (idx, sets) in normalized.iter().enumerate() {
        let i = idx as u32 + 1;
        let entry = SecretEntry {
            sets: sets
                .iter()
                .enumerate()
                .map(|(sidx, members)| {
                    (
                        sidx as u32 + 1,
                        SetEntry {
                            members: members.clone(),
                            active: true,
                        },
                    )
                })
                .collect(),
            active: true,
        };
        params.structure.insert(i, entry);
    }

    let shares: BTreeMap<u32, FieldElement> = (1..=n).zip(share_values).collect();

    let mut polynomials = BTreeMap::new();
    let mut masks = BTreeMap::new();
    let mut participant_commitments = BTreeMap::new();
    let mut secret_commitments = BTreeMap::new();
    for (idx, secret) in reduced_secrets.iter().enumerate() {
        let i = idx as u32 + 1;
        let sets: Vec<(u32, Vec<u32>)> = params.structure[&i]
            .sets
            .iter()
            .map(|(q, s)| (*q, s.members.clone()))
            .collect();
        for (q, members) in sets {
            let f = sample_polynomial(secret.clone(), members.len() - 1, &params.prime, rng)?;
            for &j in &members {
                let share = &shares[&j];
                let id = params.participants[&j].id.clone();
                let (mask, n_commit) = publish_member(&params, share, &id, &f, i, q)?;
                masks.insert((i, q, j), mask);
                participant_commitments.insert((i, q, j), n_commit);
            }
            polynomials.insert((i, q), f);
        }
        secret_commitments.insert(i, commit(secret, &params.commit_context())?);
    }

    let bulletin = Bulletin {
        params,
        masks,
        participant_commitments,
        secret_commitments,
        version: 1,
    };
    let state = SchemeState {
        secrets: (1..).zip(reduced_secrets).collect(),
        polynomials,
        shares: shares.clone(),
        bulletin,
        rng: None,
    };
    Ok((state, shares))
}

/// Participant Phase I: recomputes the pseudo share for an active
/// qualified set the participant belongs to.
pub fn participant_pseudo_share(
    participant: u32,
    share: &FieldElement,
    i: u32,
    q: u32,
    params: &PublicParameters,
) -> Result<PseudoShare> {
    let set = params.active_set(i, q)?;
    if !set.members.contains(&participant) {
        return Err(Error::NotAMember {
            participant,
            secret_index: i,
            set_index: q,
        });
    }
    Ok(PseudoShare {
        value: derive_pseudo_share(share, i, q, params)?,
        secret_index: i,
        set_index: q,
        participant,
    })
}

/// Combiner Phase I: checks one claimed pseudo share against its published
/// commitment.
pub fn combiner_verify_participant(claimed: &PseudoShare, bulletin: &Bulletin) -> Result<bool> {
    let key = (claimed.secret_index, claimed.set_index, claimed.participant);
    let n = bulletin
        .participant_commitments
        .get(&key)
        .ok_or(Error::UnknownTriple(key.0, key.1, key.2))?;
    Ok(verify_commitment(
        &claimed.value,
        n,
        &bulletin.params.commit_context(),
    ))
}

/// Combiner Phase II with verification enforced: every member's claim is
/// checked against the target set's commitment before interpolation, and
/// dishonest participants are named in the error.
pub fn combiner_reconstruct(
    i: u32,
    q: u32,
    claims: &BTreeMap<u32, PseudoShare>,
    bulletin: &Bulletin,
) -> Result<FieldElement> {
    reconstruct_inner(i, q, claims, bulletin, true)
}

/// Reconstruction without the verification stage. Exists for adversarial
/// experiments that measure what a forged pseudo share yields; production
/// callers want [`combiner_reconstruct`].
pub fn combiner_reconstruct_unverified(
    i: u32,
    q: u32,
    claims: &BTreeMap<u32, PseudoShare>,
    bulletin: &Bulletin,
) -> Result<FieldElement> {
    reconstruct_inner(i, q, claims, bulletin, false)
}

fn reconstruct_inner(
    i: u32,
    q: u32,
    claims: &BTreeMap<u32, PseudoShare>,
    bulletin: &Bulletin,
    verify: bool,
) -> Result<FieldElement> {
    let set = bulletin.params.active_set(i, q)?;
    let missing: Vec<u32> = set
        .members
        .iter()
        .copied()
        .filter(|j| !claims.contains_key(j))
        .collect();
    if !missing.is_empty() {
        return Err(Error::IncompleteSet(missing));
    }
    if verify {
        let ctx = bulletin.params.commit_context();
        let mut failed = Vec::new();
        for &j in &set.members {
            let n = bulletin
                .participant_commitments
                .get(&(i, q, j))
                .ok_or(Error::UnknownTriple(i, q, j))?;
            if !verify_commitment(&claims[&j].value, n, &ctx) {
                failed.push(j);
            }
        }
        if !failed.is_empty() {
            return Err(Error::VerificationFailed(failed));
        }
    }
    let p = &bulletin.params.prime;
    let mut points = Vec::with_capacity(set.members.len());
    for &j in &set.members {
        let entry = bulletin
            .params
            .participants
            .get(&j)
            .ok_or(Error::UnknownParticipant(j))?;
        let mask = bulletin
            .masks
            .get(&(i, q, j))
            .ok_or(Error::UnknownTriple(i, q, j))?;
        points.push((entry.id.clone(), p.add(&claims[&j].value, mask)));
    }
    lagrange_at_zero(&points, p)
}

/// Participant Phase II: checks a revealed secret against the published
/// commitment S_i.
pub fn participant_verify_secret(
    s_claimed: &FieldElement,
    i: u32,
    bulletin: &Bulletin,
) -> Result<bool> {
    let active = bulletin
        .params
        .structure
        .get(&i)
        .map(|e| e.active)
        .unwrap_or(false);
    let s_commit = bulletin.secret_commitments.get(&i);
    match (active, s_commit) {
        (true, Some(c)) => Ok(verify_commitment(
            s_claimed,
            c,
            &bulletin.params.commit_context(),
        )),
        _ => Err(Error::UnknownSecretIndex(i)),
    }
}

/// Recomputes every published value from the dealer's private state and
/// compares bit-exactly against the bulletin. True iff the bulletin is
/// exactly the publication of the state.
pub fn audit_bulletin(state: &SchemeState) -> bool {
    let bulletin = &state.bulletin;
    let params = &bulletin.params;
    let ctx = params.commit_context();
    let mut masks = BTreeMap::new();
    let mut participant_commitments = BTreeMap::new();
    let mut secret_commitments = BTreeMap::new();
    for (i, entry) in &params.structure {
        if !entry.active {
            continue;
        }
        let Some(secret) = state.secrets.get(i) else {
            return false;
        };
        let Ok(s_commit) = commit(secret, &ctx) else {
            return false;
        };
        secret_commitments.insert(*i, s_commit);
        for (q, set) in entry.active_sets() {
            let Some(f) = state.polynomials.get(&(*i, q)) else {
                return false;
            };
            if f.constant_term() != secret || f.degree() != set.members.len() - 1 {
                return false;
            }
            for &j in &set.members {
                let (Some(share), Some(participant)) =
                    (state.shares.get(&j), params.participants.get(&j))
                else {
                    return false;
                };
                let Ok(u) = derive_pseudo_share(share, *i, q, params) else {
                    return false;
                };
                let b = poly_eval(f, &participant.id, &params.prime);
                masks.insert((*i, q, j), params.prime.sub(&b, &u));
                let Ok(n) = commit(&u, &ctx) else {
                    return false;
                };
                participant_commitments.insert((*i, q, j), n);
            }
        }
    }
    masks == bulletin.masks
        && participant_commitments == bulletin.participant_commitments
        && secret_commitments == bulletin.secret_commitments
}
