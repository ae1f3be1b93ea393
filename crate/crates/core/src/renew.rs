//! Dynamic renewal of a live scheme: adding or deactivating secrets,
//! participants and qualified sets without ever touching an existing
//! participant's share.
//!
//! Renewal never reuses an index. Pseudo shares are derived from (share,
//! secret index, set index), so a set whose polynomial must change is
//! retired and republished under a fresh set index; otherwise pseudo
//! shares already revealed to a combiner would let it recover the
//! replacement secret from the new masks on its own. Untouched secrets
//! keep their entries bit-identically.
//!
//! Every operation takes the current state by reference and returns the
//! successor state plus a [`BulletinDelta`] describing exactly which
//! published values changed; the delta stream re-derives the full
//! bulletin.

use num_bigint::BigUint;
use rand::Rng;
use std::collections::BTreeMap;

use crate::commit::{commit, Commitment};
use crate::error::{Error, Result};
use crate::field::{sample_polynomial, FieldElement};
use crate::scheme::{
    normalize_set, publish_member, qualified_set_bound, ParticipantEntry, QualifiedSet,
    SchemeState, SecretEntry, SetEntry, TripleKey,
};

/// The kind of renewal an entry in the journal records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenewOp {
    AddSecret,
    DeactivateSecret,
    HardDeleteSecret,
    AddParticipant,
    DeactivateParticipant,
    AddQualifiedSet,
    DeactivateQualifiedSet,
}

impl RenewOp {
    pub fn id(&self) -> &'static str {
        match self {
            RenewOp::AddSecret => "add-secret",
            RenewOp::DeactivateSecret => "deactivate-secret",
            RenewOp::HardDeleteSecret => "hard-delete-secret",
            RenewOp::AddParticipant => "add-participant",
            RenewOp::DeactivateParticipant => "deactivate-participant",
            RenewOp::AddQualifiedSet => "add-set",
            RenewOp::DeactivateQualifiedSet => "deactivate-set",
        }
    }
}

/// Exact difference between two consecutive bulletin versions. Applying
/// the upserts and removals of every delta after the setup snapshot
/// reproduces the current bulletin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BulletinDelta {
    pub version: u64,
    pub op: RenewOp,
    pub affected: Vec<String>,
    pub masks_upserted: BTreeMap<TripleKey, FieldElement>,
    pub masks_removed: Vec<TripleKey>,
    pub participant_commitments_upserted: BTreeMap<TripleKey, Commitment>,
    pub participant_commitments_removed: Vec<TripleKey>,
    pub secret_commitments_upserted: BTreeMap<u32, Commitment>,
    pub secret_commitments_removed: Vec<u32>,
    pub participants_upserted: BTreeMap<u32, ParticipantEntry>,
    pub structure_upserted: BTreeMap<u32, SecretEntry>,
}

impl BulletinDelta {
    fn new(version: u64, op: RenewOp) -> Self {
        BulletinDelta {
            version,
            op,
            affected: Vec::new(),
            masks_upserted: BTreeMap::new(),
            masks_removed: Vec::new(),
            participant_commitments_upserted: BTreeMap::new(),
            participant_commitments_removed: Vec::new(),
            secret_commitments_upserted: BTreeMap::new(),
            secret_commitments_removed: Vec::new(),
            participants_upserted: BTreeMap::new(),
            structure_upserted: BTreeMap::new(),
        }
    }
}

fn begin(state: &SchemeState, op: RenewOp) -> (SchemeState, BulletinDelta) {
    let mut work = state.clone();
    work.bulletin.version += 1;
    work.rng = None;
    let delta = BulletinDelta::new(work.bulletin.version, op);
    (work, delta)
}

/// Samples a polynomial for a set and publishes its masks and commitments.
fn publish_set<R: Rng + ?Sized>(
    work: &mut SchemeState,
    delta: &mut BulletinDelta,
    i: u32,
    q: u32,
    members: Vec<u32>,
    secret: &FieldElement,
    rng: &mut R,
) -> Result<()> {
    let f = sample_polynomial(
        secret.clone(),
        members.len() - 1,
        &work.bulletin.params.prime,
        rng,
    )?;
    for &j in &members {
        let share = work.shares[&j].clone();
        let id = work.bulletin.params.participants[&j].id.clone();
        let (mask, n_commit) = publish_member(&work.bulletin.params, &share, &id, &f, i, q)?;
        work.bulletin.masks.insert((i, q, j), mask.clone());
        work.bulletin
            .participant_commitments
            .insert((i, q, j), n_commit.clone());
        delta.masks_upserted.insert((i, q, j), mask);
        delta
            .participant_commitments_upserted
            .insert((i, q, j), n_commit);
    }
    work.polynomials.insert((i, q), f);
    work.bulletin
        .params
        .structure
        .get_mut(&i)
        .expect("secret entry exists")
        .sets
        .insert(q, SetEntry { members, active: true });
    delta.affected.push(format!("set:{i}.{q}"));
    Ok(())
}

/// Retires one active set: drops its published entries and polynomial.
fn retire_set(work: &mut SchemeState, delta: &mut BulletinDelta, i: u32, q: u32) {
    let entry = work
        .bulletin
        .params
        .structure
        .get_mut(&i)
        .expect("secret entry exists")
        .sets
        .get_mut(&q)
        .expect("set entry exists");
    let members = entry.members.clone();
    entry.active = false;
    for &j in &members {
        work.bulletin.masks.remove(&(i, q, j));
        work.bulletin.participant_commitments.remove(&(i, q, j));
        delta.masks_removed.push((i, q, j));
        delta.participant_commitments_removed.push((i, q, j));
    }
    work.polynomials.remove(&(i, q));
    delta.affected.push(format!("set:{i}.{q}"));
}

/// Replaces secret `i` and republishes its surviving sets under fresh
/// indices. `transform` maps each currently active set to its new member
/// list, or `None` to drop it.
fn resample_secret<R: Rng + ?Sized>(
    work: &mut SchemeState,
    delta: &mut BulletinDelta,
    i: u32,
    replacement: &BigUint,
    transform: impl Fn(u32, &SetEntry) -> Option<Vec<u32>>,
    rng: &mut R,
) -> Result<()> {
    let entry = work
        .bulletin
        .params
        .structure
        .get(&i)
        .filter(|e| e.active)
        .ok_or(Error::UnknownSecretIndex(i))?;
    let new_secret = work
        .bulletin
        .params
        .prime
        .checked_element(replacement.clone())
        .ok_or(Error::SecretOutOfRange { index: i })?;
    if Some(&new_secret) == work.secrets.get(&i) {
        return Err(Error::ReplacementUnchanged);
    }
    let old_sets: Vec<u32> = entry.active_sets().map(|(q, _)| q).collect();
    let survivors: Vec<Vec<u32>> = entry
        .active_sets()
        .filter_map(|(q, set)| transform(q, set))
        .collect();
    if survivors.is_empty() {
        return Err(Error::OrphanedSecret(i));
    }
    let next_q = entry.next_set_index();
    let max_sets = work.bulletin.params.capacities.max_sets;
    let highest = u64::from(next_q) + survivors.len() as u64 - 1;
    if highest > u64::from(max_sets) {
        return Err(Error::CapacityExceeded(format!(
            "republishing secret {i} needs set indices up to {highest}, ceiling is {max_sets}"
        )));
    }

    for q in old_sets {
        retire_set(work, delta, i, q);
    }
    let mut q_new = next_q;
    for members in survivors {
        publish_set(work, delta, i, q_new, members, &new_secret, rng)?;
        q_new += 1;
    }
    work.secrets.insert(i, new_secret.clone());
    let s_commit = commit(&new_secret, &work.bulletin.params.commit_context())?;
    work.bulletin.secret_commitments.insert(i, s_commit.clone());
    delta.secret_commitments_upserted.insert(i, s_commit);
    delta.affected.push(format!("secret:{i}"));
    Ok(())
}

fn finish(work: SchemeState, mut delta: BulletinDelta) -> (SchemeState, BulletinDelta) {
    let touched: Vec<u32> = delta.structure_upserted.keys().copied().collect();
    for key in touched {
        delta
            .structure_upserted
            .insert(key, work.bulletin.params.structure[&key].clone());
    }
    delta.affected.sort();
    delta.affected.dedup();
    (work, delta)
}

/// Marks a secret whose structure snapshot belongs in the delta.
fn touch_structure(delta: &mut BulletinDelta, i: u32) {
    delta.structure_upserted.entry(i).or_default();
}

/// Adds a new secret with its own qualified sets. Existing bulletin
/// entries and all shares stay bit-identical.
pub fn add_secret<R: Rng + ?Sized>(
    state: &SchemeState,
    s_new: &BigUint,
    sets: &[QualifiedSet],
    rng: &mut R,
) -> Result<(SchemeState, BulletinDelta)> {
    let (mut work, mut delta) = begin(state, RenewOp::AddSecret);
    let params = &work.bulletin.params;
    let i_new = params.structure.keys().next_back().map_or(1, |i| i + 1);
    if i_new > params.capacities.max_secrets {
        return Err(Error::CapacityExceeded(format!(
            "secret index {i_new} exceeds the declared ceiling of {}",
            params.capacities.max_secrets
        )));
    }
    let secret = params
        .prime
        .checked_element(s_new.clone())
        .ok_or(Error::SecretOutOfRange { index: i_new })?;
    if sets.is_empty() {
        return Err(Error::StructureInvalid(format!(
            "secret {i_new} has no qualified set"
        )));
    }
    if sets.len() as u32 > params.capacities.max_sets {
        return Err(Error::CapacityExceeded(format!(
            "secret {i_new} declares {} qualified sets, ceiling is {}",
            sets.len(),
            params.capacities.max_sets
        )));
    }
    let n_active = params.active_participant_count();
    if let Some(bound) = qualified_set_bound(n_active) {
        if sets.len() as u128 > bound {
            return Err(Error::StructureInvalid(format!(
                "secret {i_new} declares {} qualified sets; at most {bound} distinct sets exist",
                sets.len()
            )));
        }
    }
    let mut normalized = Vec::with_capacity(sets.len());
    for (sidx, members) in sets.iter().enumerate() {
        let q = sidx as u32 + 1;
        let sorted = normalize_set(members, &format!("{q} of secret {i_new}"), |j| {
            params.participants.get(&j).is_some_and(|p| p.active)
        })?;
        if normalized.contains(&sorted) {
            return Err(Error::StructureInvalid(format!(
                "secret {i_new} lists the same qualified set twice"
            )));
        }
        normalized.push(sorted);
    }

    work.bulletin.params.structure.insert(
        i_new,
        SecretEntry {
            sets: BTreeMap::new(),
            active: true,
        },
    );
    work.secrets.insert(i_new, secret.clone());
    for (sidx, members) in normalized.into_iter().enumerate() {
        publish_set(&mut work, &mut delta, i_new, sidx as u32 + 1, members, &secret, rng)?;
    }
    let s_commit = commit(&secret, &work.bulletin.params.commit_context())?;
    work.bulletin
        .secret_commitments
        .insert(i_new, s_commit.clone());
    delta.secret_commitments_upserted.insert(i_new, s_commit);
    delta.affected.push(format!("secret:{i_new}"));
    touch_structure(&mut delta, i_new);
    Ok(finish(work, delta))
}

/// Deactivates secret `i` by replacing its value. Every set of the secret
/// is republished under a fresh index, so pseudo shares already revealed
/// for the old value are useless against the new bulletin.
pub fn deactivate_secret<R: Rng + ?Sized>(
    state: &SchemeState,
    i: u32,
    s_replacement: &BigUint,
    rng: &mut R,
) -> Result<(SchemeState, BulletinDelta)> {
    let (mut work, mut delta) = begin(state, RenewOp::DeactivateSecret);
    resample_secret(
        &mut work,
        &mut delta,
        i,
        s_replacement,
        |_, set| Some(set.members.clone()),
        rng,
    )?;
    touch_structure(&mut delta, i);
    Ok(finish(work, delta))
}

/// Removes secret `i` and everything published for it. The index is
/// retired, never reassigned.
pub fn hard_delete_secret(state: &SchemeState, i: u32) -> Result<(SchemeState, BulletinDelta)> {
    let (mut work, mut delta) = begin(state, RenewOp::HardDeleteSecret);
    let entry = work
        .bulletin
        .params
        .structure
        .get(&i)
        .filter(|e| e.active)
        .ok_or(Error::UnknownSecretIndex(i))?;
    let active: Vec<u32> = entry.active_sets().map(|(q, _)| q).collect();
    for q in active {
        retire_set(&mut work, &mut delta, i, q);
    }
    work.bulletin
        .params
        .structure
        .get_mut(&i)
        .expect("secret entry exists")
        .active = false;
    work.secrets.remove(&i);
    work.bulletin.secret_commitments.remove(&i);
    delta.secret_commitments_removed.push(i);
    delta.affected.push(format!("secret:{i}"));
    touch_structure(&mut delta, i);
    Ok(finish(work, delta))
}

/// Registers a new participant with a fresh share and identifier. No
/// published value changes until the participant joins a qualified set.
pub fn add_participant<R: Rng + ?Sized>(
    state: &SchemeState,
    supplied_share: Option<&BigUint>,
    supplied_id: Option<&BigUint>,
    rng: &mut R,
) -> Result<(SchemeState, u32, FieldElement, BulletinDelta)> {
    let (mut work, mut delta) = begin(state, RenewOp::AddParticipant);
    let params = &work.bulletin.params;
    let prime = params.prime.clone();
    let j_new = params.participants.keys().next_back().map_or(1, |j| j + 1);
    // identifiers come from Z_p^*, so at most p-1 participants ever
    let registered = params.participants.len() as u64;
    if BigUint::from(registered + 1) >= *prime.value() {
        return Err(Error::FieldExhausted);
    }

    let share = match supplied_share {
        Some(v) => {
            let e = prime.checked_element(v.clone()).ok_or_else(|| {
                Error::StructureInvalid("supplied share not below the prime".into())
            })?;
            if work.shares.values().any(|x| x == &e) {
                return Err(Error::DuplicateShare);
            }
            e
        }
        None => loop {
            let candidate = prime.random_element(rng);
            if !work.shares.values().any(|x| x == &candidate) {
                break candidate;
            }
        },
    };
    let id = match supplied_id {
        Some(v) => {
            let e = prime
                .checked_element(v.clone())
                .filter(|e| !e.is_zero())
                .ok_or_else(|| {
                    Error::StructureInvalid("supplied identifier not in 1..p-1".into())
                })?;
            if params.participants.values().any(|p| p.id == e) {
                return Err(Error::DuplicateId);
            }
            e
        }
        None => loop {
            let candidate = prime.random_nonzero(rng);
            if !params.participants.values().any(|p| p.id == candidate) {
                break candidate;
            }
        },
    };

    let entry = ParticipantEntry { id, active: true };
    work.bulletin.params.participants.insert(j_new, entry.clone());
    work.shares.insert(j_new, share.clone());
    delta.participants_upserted.insert(j_new, entry);
    delta.affected.push(format!("participant:{j_new}"));
    let (work, delta) = finish(work, delta);
    Ok((work, j_new, share, delta))
}

/// Deactivates participant `j`. Every secret whose structure contains the
/// participant is replaced (one caller-supplied replacement per affected
/// secret); its sets are republished under fresh indices with `j` removed,
/// and sets that would drop below two members are retired.
pub fn deactivate_participant<R: Rng + ?Sized>(
    state: &SchemeState,
    j: u32,
    replacements: &BTreeMap<u32, BigUint>,
    rng: &mut R,
) -> Result<(SchemeState, BulletinDelta)> {
    let (mut work, mut delta) = begin(state, RenewOp::DeactivateParticipant);
    let params = &work.bulletin.params;
    if !params.participants.get(&j).is_some_and(|p| p.active) {
        return Err(Error::UnknownParticipant(j));
    }
    let affected: Vec<u32> = params
        .structure
        .iter()
        .filter(|(_, entry)| entry.active)
        .filter(|(_, entry)| entry.active_sets().any(|(_, set)| set.members.contains(&j)))
        .map(|(i, _)| *i)
        .collect();
    for i in &affected {
        if !replacements.contains_key(i) {
            return Err(Error::MissingReplacement(*i));
        }
    }
    for i in replacements.keys() {
        if !affected.contains(i) {
            return Err(Error::StructureInvalid(format!(
                "replacement supplied for secret {i}, which does not involve participant {j}"
            )));
        }
    }
    for i in &affected {
        resample_secret(
            &mut work,
            &mut delta,
            *i,
            &replacements[i],
            |_, set| {
                let members: Vec<u32> =
                    set.members.iter().copied().filter(|&m| m != j).collect();
                (members.len() >= 2).then_some(members)
            },
            rng,
        )?;
        touch_structure(&mut delta, *i);
    }
    let entry = work
        .bulletin
        .params
        .participants
        .get_mut(&j)
        .expect("participant exists");
    entry.active = false;
    delta.participants_upserted.insert(j, entry.clone());
    delta.affected.push(format!("participant:{j}"));
    Ok(finish(work, delta))
}

/// Adds a qualified set for an existing secret under the next set index.
pub fn add_qualified_set<R: Rng + ?Sized>(
    state: &SchemeState,
    i: u32,
    members: &[u32],
    rng: &mut R,
) -> Result<(SchemeState, BulletinDelta)> {
    let (mut work, mut delta) = begin(state, RenewOp::AddQualifiedSet);
    let params = &work.bulletin.params;
    let entry = params
        .structure
        .get(&i)
        .filter(|e| e.active)
        .ok_or(Error::UnknownSecretIndex(i))?;
    let q_new = entry.next_set_index();
    let sorted = normalize_set(members, &format!("{q_new} of secret {i}"), |m| {
        params.participants.get(&m).is_some_and(|p| p.active)
    })?;
    if entry.active_sets().any(|(_, set)| set.members == sorted) {
        return Err(Error::DuplicateSet);
    }
    if q_new > params.capacities.max_sets {
        return Err(Error::CapacityExceeded(format!(
            "set index {q_new} exceeds the declared ceiling of {}",
            params.capacities.max_sets
        )));
    }
    let n_active = params.active_participant_count();
    if let Some(bound) = qualified_set_bound(n_active) {
        if entry.active_sets().count() as u128 + 1 > bound {
            return Err(Error::StructureInvalid(format!(
                "secret {i} already uses every distinct qualified set"
            )));
        }
    }
    let secret = work.secrets[&i].clone();
    publish_set(&mut work, &mut delta, i, q_new, sorted, &secret, rng)?;
    touch_structure(&mut delta, i);
    Ok(finish(work, delta))
}

/// Deactivates one qualified set. Its members could still pool the values
/// they already revealed, so the secret itself is replaced and the
/// remaining sets are republished under fresh indices.
pub fn deactivate_qualified_set<R: Rng + ?Sized>(
    state: &SchemeState,
    i: u32,
    q: u32,
    s_replacement: &BigUint,
    rng: &mut R,
) -> Result<(SchemeState, BulletinDelta)> {
    let (mut work, mut delta) = begin(state, RenewOp::DeactivateQualifiedSet);
    work.bulletin.params.active_set(i, q)?;
    resample_secret(
        &mut work,
        &mut delta,
        i,
        s_replacement,
        |q_old, set| (q_old != q).then(|| set.members.clone()),
        rng,
    )?;
    touch_structure(&mut delta, i);
    Ok(finish(work, delta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::validate_prime;
    use crate::scheme::{
        audit_bulletin, combiner_reconstruct, combiner_verify_participant, dealer_setup,
        participant_pseudo_share, AccessStructure, Capacities, DealerConfig, PseudoShare,
    };
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn setup(seed: u64) -> (SchemeState, BTreeMap<u32, FieldElement>) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let p = validate_prime(&BigUint::from(1000003u64)).unwrap();
        dealer_setup(
            &[BigUint::from(2u32), BigUint::from(900u32)],
            &AccessStructure {
                per_secret: vec![vec![vec![1, 2, 3], vec![2, 4]], vec![vec![1, 4]]],
            },
            4,
            p,
            &DealerConfig {
                capacities: Some(Capacities {
                    max_secrets: 8,
                    max_sets: 16,
                }),
                ..DealerConfig::default()
            },
            &mut rng,
        )
        .unwrap()
    }

    fn claims_for(
        state: &SchemeState,
        shares: &BTreeMap<u32, FieldElement>,
        i: u32,
        q: u32,
    ) -> BTreeMap<u32, PseudoShare> {
        let set = state.bulletin.params.active_set(i, q).unwrap().clone();
        set.members
            .iter()
            .map(|&j| {
                (
                    j,
                    participant_pseudo_share(j, &shares[&j], i, q, &state.bulletin.params)
                        .unwrap(),
                )
            })
            .collect()
    }

    #[test]
    fn add_secret_extends_without_touching_old_entries() {
        let (state, shares) = setup(21);
        let mut rng = ChaCha20Rng::seed_from_u64(22);
        let (next, delta) = add_secret(
            &state,
            &BigUint::from(77u32),
            &[vec![1, 2], vec![3, 4]],
            &mut rng,
        )
        .unwrap();
        assert_eq!(next.bulletin.version, 2);
        assert_eq!(delta.version, 2);
        // exactly sum(m_q) new masks and commitments, one new S
        assert_eq!(next.bulletin.masks.len(), state.bulletin.masks.len() + 4);
        assert_eq!(delta.masks_upserted.len(), 4);
        assert_eq!(delta.secret_commitments_upserted.len(), 1);
        for (key, value) in &state.bulletin.masks {
            assert_eq!(&next.bulletin.masks[key], value);
        }
        for (key, value) in &state.bulletin.participant_commitments {
            assert_eq!(&next.bulletin.participant_commitments[key], value);
        }
        // old secret still reconstructs to the old value
        let claims = claims_for(&next, &shares, 1, 1);
        assert_eq!(
            combiner_reconstruct(1, 1, &claims, &next.bulletin).unwrap(),
            next.bulletin.params.prime.element_from_u64(2)
        );
        // the new secret reconstructs through both of its sets
        for q in [1, 2] {
            let claims = claims_for(&next, &shares, 3, q);
            assert_eq!(
                combiner_reconstruct(3, q, &claims, &next.bulletin).unwrap(),
                next.bulletin.params.prime.element_from_u64(77)
            );
        }
        assert!(audit_bulletin(&next));
    }

    #[test]
    fn add_secret_hits_capacity() {
        let (state, _) = setup(23);
        let mut rng = ChaCha20Rng::seed_from_u64(24);
        let mut current = state;
        loop {
            match add_secret(&current, &BigUint::from(5u32), &[vec![1, 2]], &mut rng) {
                Ok((next, _)) => current = next,
                Err(Error::CapacityExceeded(_)) => break,
                Err(other) => panic!("unexpected error {other:?}"),
            }
        }
        assert_eq!(current.bulletin.params.structure.len(), 8);
    }

    #[test]
    fn deactivate_secret_replaces_under_fresh_indices() {
        let (state, shares) = setup(25);
        let old_claims_q1 = claims_for(&state, &shares, 1, 1);
        let mut rng = ChaCha20Rng::seed_from_u64(26);
        let (next, delta) =
            deactivate_secret(&state, 1, &BigUint::from(555u32), &mut rng).unwrap();
        // old set indices 1 and 2 retired, fresh ones 3 and 4 published
        assert_eq!(delta.masks_removed.len(), 5);
        let entry = &next.bulletin.params.structure[&1];
        let active: Vec<u32> = entry.active_sets().map(|(q, _)| q).collect();
        assert_eq!(active, vec![3, 4]);
        // reconstruction through a fresh set yields the replacement
        let claims = claims_for(&next, &shares, 1, 3);
        assert_eq!(
            combiner_reconstruct(1, 3, &claims, &next.bulletin).unwrap(),
            next.bulletin.params.prime.element_from_u64(555)
        );
        // new pseudo shares differ from the old ones and the old claims
        // no longer match any bulletin entry
        for (j, new_claim) in &claims {
            if let Some(old_claim) = old_claims_q1.get(j) {
                assert_ne!(old_claim.value, new_claim.value);
            }
        }
        for old in old_claims_q1.values() {
            assert_eq!(
                combiner_verify_participant(old, &next.bulletin).unwrap_err(),
                Error::UnknownTriple(1, 1, old.participant)
            );
        }
        // shares byte-identical
        assert_eq!(state.shares(), next.shares());
        // untouched secret 2 entries identical
        for (key, value) in state.bulletin.masks.iter().filter(|((i, _, _), _)| *i == 2) {
            assert_eq!(&next.bulletin.masks[key], value);
        }
        assert!(audit_bulletin(&next));
    }

    #[test]
    fn deactivate_secret_rejects_same_value_and_range() {
        let (state, _) = setup(27);
        let mut rng = ChaCha20Rng::seed_from_u64(28);
        assert_eq!(
            deactivate_secret(&state, 1, &BigUint::from(2u32), &mut rng).unwrap_err(),
            Error::ReplacementUnchanged
        );
        assert_eq!(
            deactivate_secret(&state, 1, &BigUint::from(1000003u64), &mut rng).unwrap_err(),
            Error::SecretOutOfRange { index: 1 }
        );
        assert_eq!(
            deactivate_secret(&state, 9, &BigUint::from(1u32), &mut rng).unwrap_err(),
            Error::UnknownSecretIndex(9)
        );
    }

    #[test]
    fn add_participant_changes_nothing_published_except_registry() {
        let (state, _) = setup(29);
        let mut rng = ChaCha20Rng::seed_from_u64(30);
        let (next, j, share, delta) = add_participant(&state, None, None, &mut rng).unwrap();
        assert_eq!(j, 5);
        assert_eq!(next.bulletin.params.participants.len(), 5);
        assert_eq!(next.bulletin.masks, state.bulletin.masks);
        assert_eq!(
            next.bulletin.participant_commitments,
            state.bulletin.participant_commitments
        );
        assert_eq!(
            next.bulletin.secret_commitments,
            state.bulletin.secret_commitments
        );
        assert_eq!(next.share(5), Some(&share));
        assert_eq!(delta.participants_upserted.len(), 1);
        assert!(audit_bulletin(&next));

        // duplicate supplied share is rejected
        let existing = state.share(1).unwrap().value().clone();
        assert_eq!(
            add_participant(&next, Some(&existing), None, &mut rng).unwrap_err(),
            Error::DuplicateShare
        );
        // duplicate supplied id is rejected
        let existing_id = state.bulletin.params.participants[&1].id.value().clone();
        assert_eq!(
            add_participant(&next, None, Some(&existing_id), &mut rng).unwrap_err(),
            Error::DuplicateId
        );
    }

    #[test]
    fn new_participant_reconstructs_after_joining_a_set() {
        let (state, shares) = setup(31);
        let mut rng = ChaCha20Rng::seed_from_u64(32);
        let (state, j, share, _) = add_participant(&state, None, None, &mut rng).unwrap();
        let (state, _) = add_qualified_set(&state, 2, &[1, j], &mut rng).unwrap();
        let q = state.bulletin.params.structure[&2]
            .active_sets()
            .map(|(q, _)| q)
            .last()
            .unwrap();
        let mut claims = BTreeMap::new();
        claims.insert(
            1,
            participant_pseudo_share(1, &shares[&1], 2, q, &state.bulletin.params).unwrap(),
        );
        claims.insert(
            j,
            participant_pseudo_share(j, &share, 2, q, &state.bulletin.params).unwrap(),
        );
        assert_eq!(
            combiner_reconstruct(2, q, &claims, &state.bulletin).unwrap(),
            state.bulletin.params.prime.element_from_u64(900)
        );
        assert!(audit_bulletin(&state));
    }

    #[test]
    fn deactivate_participant_shrinks_and_replaces() {
        // participant 1 sits in set (1,1) of size 3 and set (2,1) of size 2
        let (state, shares) = setup(33);
        let mut rng = ChaCha20Rng::seed_from_u64(34);
        // secret 2's only set {1,4} would shrink below 2: orphaned
        let only_sets = deactivate_participant(
            &state,
            1,
            &[(1, BigUint::from(10u32)), (2, BigUint::from(11u32))]
                .into_iter()
                .collect(),
            &mut rng,
        );
        assert_eq!(only_sets.unwrap_err(), Error::OrphanedSecret(2));

        // participant 3 sits only in set (1,1); replacing secret 1 works
        let old_claims = claims_for(&state, &shares, 1, 1);
        let (next, _) = deactivate_participant(
            &state,
            3,
            &[(1, BigUint::from(10u32))].into_iter().collect(),
            &mut rng,
        )
        .unwrap();
        assert!(!next.bulletin.params.participants[&3].active);
        // secret 2 untouched
        for (key, value) in state.bulletin.masks.iter().filter(|((i, _, _), _)| *i == 2) {
            assert_eq!(&next.bulletin.masks[key], value);
        }
        // the shrunken set {1,2} lives under a fresh index and reconstructs
        let entry = &next.bulletin.params.structure[&1];
        let (q_shrunk, set) = entry
            .active_sets()
            .find(|(_, s)| s.members == vec![1, 2])
            .expect("shrunken set republished");
        assert_eq!(set.members.len(), 2);
        let claims = claims_for(&next, &shares, 1, q_shrunk);
        assert_eq!(
            combiner_reconstruct(1, q_shrunk, &claims, &next.bulletin).unwrap(),
            next.bulletin.params.prime.element_from_u64(10)
        );
        // deactivated participant's old pseudo shares are dead
        for old in old_claims.values() {
            assert!(combiner_verify_participant(old, &next.bulletin).is_err());
        }
        // replacement maps must cover exactly the affected secrets
        assert_eq!(
            deactivate_participant(&state, 3, &BTreeMap::new(), &mut rng).unwrap_err(),
            Error::MissingReplacement(1)
        );
        assert!(matches!(
            deactivate_participant(
                &state,
                3,
                &[(1, BigUint::from(10u32)), (2, BigUint::from(11u32))]
                    .into_iter()
                    .collect(),
                &mut rng,
            )
            .unwrap_err(),
            Error::StructureInvalid(_)
        ));
        assert!(audit_bulletin(&next));
    }

    #[test]
    fn add_qualified_set_appends() {
        let (state, shares) = setup(35);
        let mut rng = ChaCha20Rng::seed_from_u64(36);
        let (next, delta) = add_qualified_set(&state, 2, &[2, 3], &mut rng).unwrap();
        // q index of the new set = old l_i + 1
        assert!(delta.affected.contains(&"set:2.2".to_string()));
        let claims = claims_for(&next, &shares, 2, 2);
        assert_eq!(
            combiner_reconstruct(2, 2, &claims, &next.bulletin).unwrap(),
            next.bulletin.params.prime.element_from_u64(900)
        );
        assert_eq!(
            add_qualified_set(&next, 2, &[3, 2], &mut rng).unwrap_err(),
            Error::DuplicateSet
        );
        assert!(audit_bulletin(&next));
    }

    #[test]
    fn add_qualified_set_capacity() {
        let mut rng = ChaCha20Rng::seed_from_u64(38);
        let p = validate_prime(&BigUint::from(101u32)).unwrap();
        let (state, _) = dealer_setup(
            &[BigUint::from(2u32)],
            &AccessStructure {
                per_secret: vec![vec![vec![1, 2]]],
            },
            3,
            p,
            &DealerConfig {
                capacities: Some(Capacities {
                    max_secrets: 2,
                    max_sets: 1,
                }),
                ..DealerConfig::default()
            },
            &mut rng,
        )
        .unwrap();
        assert!(matches!(
            add_qualified_set(&state, 1, &[2, 3], &mut rng).unwrap_err(),
            Error::CapacityExceeded(_)
        ));
        // a frozen l_max of 1 also blocks deactivation, which needs a
        // fresh index for the republished set
        assert!(matches!(
            deactivate_secret(&state, 1, &BigUint::from(3u32), &mut rng).unwrap_err(),
            Error::CapacityExceeded(_)
        ));
    }

    #[test]
    fn deactivate_qualified_set_replaces_secret() {
        let (state, shares) = setup(39);
        let mut rng = ChaCha20Rng::seed_from_u64(40);
        let old_claims = claims_for(&state, &shares, 1, 2);
        let (next, _) =
            deactivate_qualified_set(&state, 1, 2, &BigUint::from(321u32), &mut rng).unwrap();
        // the surviving set {1,2,3} was republished under a fresh index
        let entry = &next.bulletin.params.structure[&1];
        let active: Vec<u32> = entry.active_sets().map(|(q, _)| q).collect();
        assert_eq!(active, vec![3]);
        let claims = claims_for(&next, &shares, 1, 3);
        assert_eq!(
            combiner_reconstruct(1, 3, &claims, &next.bulletin).unwrap(),
            next.bulletin.params.prime.element_from_u64(321)
        );
        // removed set members pooling their old pseudo shares fail
        for old in old_claims.values() {
            assert!(combiner_verify_participant(old, &next.bulletin).is_err());
        }
        // removing the only set of secret 2 is an orphan
        assert_eq!(
            deactivate_qualified_set(&next, 2, 1, &BigUint::from(5u32), &mut rng).unwrap_err(),
            Error::OrphanedSecret(2)
        );
        assert!(audit_bulletin(&next));
    }

    #[test]
    fn hard_delete_removes_all_entries() {
        let (state, _) = setup(41);
        let (next, delta) = hard_delete_secret(&state, 1).unwrap();
        assert!(next.bulletin.masks.keys().all(|(i, _, _)| *i != 1));
        assert!(next.bulletin.secret_commitments.get(&1).is_none());
        assert!(next.secret(1).is_none());
        assert!(!next.bulletin.params.structure[&1].active);
        assert_eq!(delta.secret_commitments_removed, vec![1]);
        // the retired index is never reassigned
        let mut rng = ChaCha20Rng::seed_from_u64(42);
        let (after, _) = add_secret(&next, &BigUint::from(9u32), &[vec![1, 2]], &mut rng).unwrap();
        assert_eq!(after.bulletin.params.structure.keys().next_back(), Some(&3));
        assert!(audit_bulletin(&after));
    }

    #[test]
    fn share_multiset_stable_across_operations() {
        let (state, _) = setup(43);
        let mut rng = ChaCha20Rng::seed_from_u64(44);
        let before: Vec<String> = state.shares().values().map(|x| x.to_hex()).collect();
        let (s1, _) = deactivate_secret(&state, 1, &BigUint::from(7u32), &mut rng).unwrap();
        let (s2, _) = add_qualified_set(&s1, 2, &[2, 3], &mut rng).unwrap();
        let (s3, _, _, _) = add_participant(&s2, None, None, &mut rng).unwrap();
        let (s4, _) = deactivate_participant(
            &s3,
            4,
            &[(1, BigUint::from(8u32)), (2, BigUint::from(9u32))]
                .into_iter()
                .collect(),
            &mut rng,
        )
        .unwrap();
        let after: Vec<String> = s4.shares().values().map(|x| x.to_hex()).collect();
        assert_eq!(&after[..before.len()], &before[..]);
        assert_eq!(after.len(), before.len() + 1);
        // versions increment once per operation
        assert_eq!(s4.bulletin.version, state.bulletin.version + 4);
        assert!(audit_bulletin(&s4));
    }
}
