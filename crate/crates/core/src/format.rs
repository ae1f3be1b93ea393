//! The normative file formats: bulletin, share files, pseudo-share
//! documents, the dealer state file and the renewal journal.
//!
//! Canonical form is JSON with object keys sorted, field elements as
//! minimal lowercase hex and keyed entries ordered lexicographically by
//! (secret, set, participant). Multi-line documents use two-space pretty
//! printing with a trailing newline; journal records are one compact
//! canonical JSON object per line. Canonical documents round-trip
//! parse -> emit byte-identically.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::commit::{Commitment, CommitmentMode, HashAlgorithm};
use crate::encoding::{index_width, EncodingParams};
use crate::error::{Error, Result};
use crate::field::{parse_hex, validate_prime, FieldElement, Polynomial, Prime};
use crate::renew::{BulletinDelta, RenewOp};
use crate::scheme::{
    Bulletin, Capacities, ParticipantEntry, PublicParameters, PseudoShare, SavedRng, SchemeState,
    SecretEntry, SetEntry,
};

/// Serializes any document in canonical multi-line form: keys sorted,
/// two-space indentation, trailing newline.
pub fn canonical_json<T: Serialize>(doc: &T) -> String {
    let value = serde_json::to_value(doc).expect("document serializes");
    let mut out = serde_json::to_string_pretty(&value).expect("value prints");
    out.push('\n');
    out
}

/// Serializes a journal record in canonical single-line form.
pub fn canonical_json_line<T: Serialize>(doc: &T) -> String {
    let value = serde_json::to_value(doc).expect("document serializes");
    let mut out = serde_json::to_string(&value).expect("value prints");
    out.push('\n');
    out
}

fn bad(msg: impl Into<String>) -> Error {
    Error::MalformedDocument(msg.into())
}

// ---------------------------------------------------------------------------
// document shapes

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WidthsDoc {
    pub field_bits: u32,
    pub secret_index_bits: u32,
    pub set_index_bits: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacitiesDoc {
    pub max_secrets: u32,
    pub max_sets: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsDoc {
    pub capacities: CapacitiesDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    pub hash: String,
    pub mode: String,
    pub prime: String,
    /// Digest of the setup-frozen parameters; share files and
    /// pseudo-share documents cite it.
    pub scheme: String,
    pub widths: WidthsDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticipantDoc {
    pub active: bool,
    pub id: String,
    pub index: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetDoc {
    pub active: bool,
    pub index: u32,
    pub members: Vec<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecretStructureDoc {
    pub active: bool,
    pub index: u32,
    pub sets: Vec<SetDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskDoc {
    pub i: u32,
    pub participant: u32,
    pub q: u32,
    pub value: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommitmentDoc {
    pub mode: String,
    pub payload: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticipantCommitmentDoc {
    pub commitment: CommitmentDoc,
    pub i: u32,
    pub participant: u32,
    pub q: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecretCommitmentDoc {
    pub commitment: CommitmentDoc,
    pub i: u32,
}

/// The public bulletin document: everything a participant or combiner
/// needs, one document per version.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BulletinDoc {
    pub masks: Vec<MaskDoc>,
    pub params: ParamsDoc,
    pub participant_commitments: Vec<ParticipantCommitmentDoc>,
    pub participants: Vec<ParticipantDoc>,
    pub secret_commitments: Vec<SecretCommitmentDoc>,
    pub structure: Vec<SecretStructureDoc>,
    pub version: u64,
}

/// A participant's long-term share, delivered over the secure channel.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShareDoc {
    pub participant: u32,
    pub scheme: String,
    pub share: String,
}

/// A one-time pseudo share submitted to the combiner.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PseudoShareDoc {
    pub participant: u32,
    pub scheme: String,
    pub secret_index: u32,
    pub set_index: u32,
    pub value: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialDoc {
    pub coefficients: Vec<String>,
    pub i: u32,
    pub q: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecretValueDoc {
    pub i: u32,
    pub value: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShareValueDoc {
    pub participant: u32,
    pub share: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RngDoc {
    pub seed: String,
    pub word_pos: String,
}

/// The dealer's private state file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDoc {
    pub bulletin: BulletinDoc,
    pub polynomials: Vec<PolynomialDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rng: Option<RngDoc>,
    pub secrets: Vec<SecretValueDoc>,
    pub shares: Vec<ShareValueDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleKeyDoc {
    pub i: u32,
    pub participant: u32,
    pub q: u32,
}

/// The published changes of one renewal.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaDoc {
    pub masks_removed: Vec<TripleKeyDoc>,
    pub masks_upserted: Vec<MaskDoc>,
    pub participant_commitments_removed: Vec<TripleKeyDoc>,
    pub participant_commitments_upserted: Vec<ParticipantCommitmentDoc>,
    pub participants_upserted: Vec<ParticipantDoc>,
    pub secret_commitments_removed: Vec<u32>,
    pub secret_commitments_upserted: Vec<SecretCommitmentDoc>,
    pub structure_upserted: Vec<SecretStructureDoc>,
}

/// One line of the journal. The first record snapshots the setup
/// bulletin; every later record carries the delta of one renewal. The
/// current bulletin is always re-derivable by replaying the file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JournalRecordDoc {
    pub affected: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bulletin: Option<BulletinDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<DeltaDoc>,
    pub op: String,
    pub version: u64,
}

// ---------------------------------------------------------------------------
// domain -> document

fn commitment_to_doc(c: &Commitment) -> CommitmentDoc {
    CommitmentDoc {
        mode: c.mode().id().to_string(),
        payload: c.payload_hex(),
    }
}

fn structure_to_docs(structure: &BTreeMap<u32, SecretEntry>) -> Vec<SecretStructureDoc> {
    structure
        .iter()
        .map(|(i, entry)| SecretStructureDoc {
            active: entry.active,
            index: *i,
            sets: entry
                .sets
                .iter()
                .map(|(q, set)| SetDoc {
                    active: set.active,
                    index: *q,
                    members: set.members.clone(),
                })
                .collect(),
        })
        .collect()
}

fn participants_to_docs(participants: &BTreeMap<u32, ParticipantEntry>) -> Vec<ParticipantDoc> {
    participants
        .iter()
        .map(|(j, entry)| ParticipantDoc {
            active: entry.active,
            id: entry.id.to_hex(),
            index: *j,
        })
        .collect()
}

pub fn bulletin_to_doc(bulletin: &Bulletin) -> BulletinDoc {
    let params = &bulletin.params;
    BulletinDoc {
        masks: bulletin
            .masks
            .iter()
            .map(|(&(i, q, j), value)| MaskDoc {
                i,
                participant: j,
                q,
                value: value.to_hex(),
            })
            .collect(),
        params: ParamsDoc {
            capacities: CapacitiesDoc {
                max_secrets: params.capacities.max_secrets,
                max_sets: params.capacities.max_sets,
            },
            generator: params.generator.as_ref().map(|g| g.to_hex()),
            hash: params.hash.id().to_string(),
            mode: params.mode.id().to_string(),
            prime: params.prime.value().to_str_radix(16),
            scheme: params.scheme_id(),
            widths: WidthsDoc {
                field_bits: params.widths.field_bits,
                secret_index_bits: params.widths.secret_index_bits,
                set_index_bits: params.widths.set_index_bits,
            },
        },
        participant_commitments: bulletin
            .participant_commitments
            .iter()
            .map(|(&(i, q, j), c)| ParticipantCommitmentDoc {
                commitment: commitment_to_doc(c),
                i,
                participant: j,
                q,
            })
            .collect(),
        participants: participants_to_docs(&params.participants),
        secret_commitments: bulletin
            .secret_commitments
            .iter()
            .map(|(&i, c)| SecretCommitmentDoc {
                commitment: commitment_to_doc(c),
                i,
            })
            .collect(),
        structure: structure_to_docs(&params.structure),
        version: bulletin.version,
    }
}

pub fn state_to_doc(state: &SchemeState) -> StateDoc {
    StateDoc {
        bulletin: bulletin_to_doc(&state.bulletin),
        polynomials: state
            .polynomials()
            .iter()
            .map(|(&(i, q), f)| PolynomialDoc {
                coefficients: f.coefficients().iter().map(|c| c.to_hex()).collect(),
                i,
                q,
            })
            .collect(),
        rng: state.rng.as_ref().map(|r| RngDoc {
            seed: hex::encode(r.seed),
            word_pos: r.word_pos.to_string(),
        }),
        secrets: state
            .secrets()
            .iter()
            .map(|(&i, v)| SecretValueDoc {
                i,
                value: v.to_hex(),
            })
            .collect(),
        shares: state
            .shares()
            .iter()
            .map(|(&j, x)| ShareValueDoc {
                participant: j,
                share: x.to_hex(),
            })
            .collect(),
    }
}

pub fn share_to_doc(participant: u32, share: &FieldElement, scheme: &str) -> ShareDoc {
    ShareDoc {
        participant,
        scheme: scheme.to_string(),
        share: share.to_hex(),
    }
}

pub fn pseudo_share_to_doc(claim: &PseudoShare, scheme: &str) -> PseudoShareDoc {
    PseudoShareDoc {
        participant: claim.participant,
        scheme: scheme.to_string(),
        secret_index: claim.secret_index,
        set_index: claim.set_index,
        value: claim.value.to_hex(),
    }
}

pub fn delta_to_doc(delta: &BulletinDelta) -> DeltaDoc {
    DeltaDoc {
        masks_removed: delta
            .masks_removed
            .iter()
            .map(|&(i, q, j)| TripleKeyDoc {
                i,
                participant: j,
                q,
            })
            .collect(),
        masks_upserted: delta
            .masks_upserted
            .iter()
            .map(|(&(i, q, j), value)| MaskDoc {
                i,
                participant: j,
                q,
                value: value.to_hex(),
            })
            .collect(),
        participant_commitments_removed: delta
            .participant_commitments_removed
            .iter()
            .map(|&(i, q, j)| TripleKeyDoc {
                i,
                participant: j,
                q,
            })
            .collect(),
        participant_commitments_upserted: delta
            .participant_commitments_upserted
            .iter()
            .map(|(&(i, q, j), c)| ParticipantCommitmentDoc {
                commitment: commitment_to_doc(c),
                i,
                participant: j,
                q,
            })
            .collect(),
        participants_upserted: participants_to_docs(&delta.participants_upserted),
        secret_commitments_removed: delta.secret_commitments_removed.clone(),
        secret_commitments_upserted: delta
            .secret_commitments_upserted
            .iter()
            .map(|(&i, c)| SecretCommitmentDoc {
                commitment: commitment_to_doc(c),
                i,
            })
            .collect(),
        structure_upserted: structure_to_docs(&delta.structure_upserted),
    }
}

/// First journal line: the full setup bulletin.
pub fn journal_record_for_setup(bulletin: &Bulletin) -> JournalRecordDoc {
    let mut affected: Vec<String> = bulletin
        .params
        .structure
        .iter()
        .flat_map(|(i, entry)| {
            std::iter::once(format!("secret:{i}")).chain(
                entry
                    .sets
                    .keys()
                    .map(move |q| format!("set:{i}.{q}")),
            )
        })
        .chain(
            bulletin
                .params
                .participants
                .keys()
                .map(|j| format!("participant:{j}")),
        )
        .collect();
    affected.sort();
    JournalRecordDoc {
        affected,
        bulletin: Some(bulletin_to_doc(bulletin)),
        delta: None,
        op: "setup".to_string(),
        version: bulletin.version,
    }
}

/// Journal line for one renewal.
pub fn journal_record_for_delta(delta: &BulletinDelta) -> JournalRecordDoc {
    JournalRecordDoc {
        affected: delta.affected.clone(),
        bulletin: None,
        delta: Some(delta_to_doc(delta)),
        op: delta.op.id().to_string(),
        version: delta.version,
    }
}

// ---------------------------------------------------------------------------
// document -> domain

fn field_from_hex(s: &str, p: &Prime, what: &str) -> Result<FieldElement> {
    let raw = parse_hex(s)?;
    p.checked_element(raw)
        .ok_or_else(|| bad(format!("{what} `{s}` is not below the prime")))
}

fn commitment_from_doc(doc: &CommitmentDoc, p: &Prime, hash: HashAlgorithm) -> Result<Commitment> {
    match CommitmentMode::from_id(&doc.mode)? {
        CommitmentMode::Hash => {
            let payload = hex::decode(&doc.payload)
                .map_err(|_| bad(format!("invalid digest hex `{}`", doc.payload)))?;
            if payload.len() as u32 * 8 != hash.digest_bits() {
                return Err(bad(format!(
                    "digest length {} does not match {}",
                    payload.len(),
                    hash.id()
                )));
            }
            Ok(Commitment::Hash(payload))
        }
        CommitmentMode::Dlog => {
            let e = field_from_hex(&doc.payload, p, "dlog commitment")?;
            if e.is_zero() {
                return Err(bad("dlog commitment must be nonzero"));
            }
            Ok(Commitment::Dlog(e))
        }
    }
}

pub fn bulletin_from_doc(doc: &BulletinDoc) -> Result<Bulletin> {
    let prime = validate_prime(&parse_hex(&doc.params.prime)?)?;
    let hash = HashAlgorithm::from_id(&doc.params.hash)?;
    let mode = CommitmentMode::from_id(&doc.params.mode)?;
    let capacities = Capacities {
        max_secrets: doc.params.capacities.max_secrets,
        max_sets: doc.params.capacities.max_sets,
    };
    if capacities.max_secrets == 0 || capacities.max_sets == 0 {
        return Err(bad("capacities must be positive"));
    }
    let widths = EncodingParams::new(
        doc.params.widths.field_bits,
        doc.params.widths.secret_index_bits,
        doc.params.widths.set_index_bits,
    );
    if u64::from(widths.field_bits) != prime.bits() {
        return Err(bad("field width does not match the prime's bit length"));
    }
    if widths.secret_index_bits < index_width(capacities.max_secrets)
        || widths.set_index_bits < index_width(capacities.max_sets)
    {
        return Err(bad("index widths too narrow for the declared capacities"));
    }
    let generator = match &doc.params.generator {
        Some(g) => {
            let e = field_from_hex(g, &prime, "generator")?;
            if e.value() <= &BigUint::from(1u32) {
                return Err(bad("generator must lie in 2..p-1"));
            }
            Some(e)
        }
        None => None,
    };
    if mode == CommitmentMode::Dlog && generator.is_none() {
        return Err(Error::MissingGenerator);
    }

    let mut participants = BTreeMap::new();
    for pd in &doc.participants {
        let id = field_from_hex(&pd.id, &prime, "participant identifier")?;
        if id.is_zero() {
            return Err(bad(format!("participant {} has identifier 0", pd.index)));
        }
        if participants
            .values()
            .any(|e: &ParticipantEntry| e.id == id)
        {
            return Err(bad(format!("participant {} repeats an identifier", pd.index)));
        }
        if participants
            .insert(pd.index, ParticipantEntry { id, active: pd.active })
            .is_some()
        {
            return Err(bad(format!("participant {} listed twice", pd.index)));
        }
    }

    let mut structure: BTreeMap<u32, SecretEntry> = BTreeMap::new();
    for sd in &doc.structure {
        let mut sets = BTreeMap::new();
        for set in &sd.sets {
            if set.members.len() < 2 {
                return Err(bad(format!(
                    "qualified set ({},{}) has fewer than 2 members",
                    sd.index, set.index
                )));
            }
            if set.members.windows(2).any(|w| w[0] >= w[1]) {
                return Err(bad(format!(
                    "qualified set ({},{}) members not sorted and distinct",
                    sd.index, set.index
                )));
            }
            for j in &set.members {
                let known = participants.get(j);
                let ok = match (sd.active && set.active, known) {
                    (true, Some(entry)) => entry.active,
                    (false, Some(_)) => true,
                    (_, None) => false,
                };
                if !ok {
                    return Err(bad(format!(
                        "qualified set ({},{}) names unknown or inactive participant {j}",
                        sd.index, set.index
                    )));
                }
            }
            if sets
                .insert(
                    set.index,
                    SetEntry {
                        members: set.members.clone(),
                        active: set.active,
                    },
                )
                .is_some()
            {
                return Err(bad(format!(
                    "secret {} lists set {} twice",
                    sd.index, set.index
                )));
            }
        }
        if structure
            .insert(sd.index, SecretEntry { sets, active: sd.active })
            .is_some()
        {
            return Err(bad(format!("secret {} listed twice", sd.index)));
        }
    }

    let params = PublicParameters {
        prime: prime.clone(),
        hash,
        mode,
        widths,
        capacities,
        generator,
        participants,
        structure,
    };
    if params.scheme_id() != doc.params.scheme {
        return Err(bad("scheme identifier does not match the parameters"));
    }

    // every (active secret, active set, member) triple must be covered
    // exactly once by the masks and the participant commitments
    let mut expected_keys = Vec::new();
    for (i, entry) in params.structure.iter().filter(|(_, e)| e.active) {
        for (q, set) in entry.active_sets() {
            for &j in &set.members {
                expected_keys.push((*i, q, j));
            }
        }
    }

    let mut masks = BTreeMap::new();
    for m in &doc.masks {
        let key = (m.i, m.q, m.participant);
        let value = field_from_hex(&m.value, &prime, "mask")?;
        if masks.insert(key, value).is_some() {
            return Err(bad(format!("mask for {key:?} listed twice")));
        }
    }
    let mut participant_commitments = BTreeMap::new();
    for c in &doc.participant_commitments {
        let key = (c.i, c.q, c.participant);
        let value = commitment_from_doc(&c.commitment, &prime, hash)?;
        if participant_commitments.insert(key, value).is_some() {
            return Err(bad(format!("participant commitment for {key:?} listed twice")));
        }
    }
    for key in &expected_keys {
        if !masks.contains_key(key) {
            return Err(bad(format!("missing mask for {key:?}")));
        }
        if !participant_commitments.contains_key(key) {
            return Err(bad(format!("missing participant commitment for {key:?}")));
        }
    }
    if masks.len() != expected_keys.len() || participant_commitments.len() != expected_keys.len() {
        return Err(bad("published entries do not match the active structure"));
    }

    let mut secret_commitments = BTreeMap::new();
    for sc in &doc.secret_commitments {
        let value = commitment_from_doc(&sc.commitment, &prime, hash)?;
        if secret_commitments.insert(sc.i, value).is_some() {
            return Err(bad(format!("secret commitment {} listed twice", sc.i)));
        }
    }
    let active_secrets: Vec<u32> = params
        .structure
        .iter()
        .filter(|(_, e)| e.active)
        .map(|(i, _)| *i)
        .collect();
    if secret_commitments.keys().copied().collect::<Vec<_>>() != active_secrets {
        return Err(bad("secret commitments do not match the active secrets"));
    }

    if doc.version == 0 {
        return Err(bad("bulletin version must be at least 1"));
    }
    Ok(Bulletin {
        params,
        masks,
        participant_commitments,
        secret_commitments,
        version: doc.version,
    })
}

pub fn state_from_doc(doc: &StateDoc) -> Result<SchemeState> {
    let bulletin = bulletin_from_doc(&doc.bulletin)?;
    let p = bulletin.params.prime.clone();
    let mut secrets = BTreeMap::new();
    for s in &doc.secrets {
        if secrets
            .insert(s.i, field_from_hex(&s.value, &p, "secret")?)
            .is_some()
        {
            return Err(bad(format!("secret {} stored twice", s.i)));
        }
    }
    let mut polynomials = BTreeMap::new();
    for f in &doc.polynomials {
        if f.coefficients.is_empty() {
            return Err(bad(format!("polynomial ({},{}) has no coefficients", f.i, f.q)));
        }
        let coefficients = f
            .coefficients
            .iter()
            .map(|c| field_from_hex(c, &p, "coefficient"))
            .collect::<Result<Vec<_>>>()?;
        if polynomials
            .insert((f.i, f.q), Polynomial::from_coefficients(coefficients))
            .is_some()
        {
            return Err(bad(format!("polynomial ({},{}) stored twice", f.i, f.q)));
        }
    }
    let mut shares = BTreeMap::new();
    for s in &doc.shares {
        if shares
            .insert(s.participant, field_from_hex(&s.share, &p, "share")?)
            .is_some()
        {
            return Err(bad(format!("share {} stored twice", s.participant)));
        }
    }
    let rng = match &doc.rng {
        Some(r) => {
            let seed_bytes = hex::decode(&r.seed).map_err(|_| bad("invalid rng seed hex"))?;
            let seed: [u8; 32] = seed_bytes
                .try_into()
                .map_err(|_| bad("rng seed must be 32 bytes"))?;
            let word_pos: u128 = r
                .word_pos
                .parse()
                .map_err(|_| bad("invalid rng word position"))?;
            Some(SavedRng { seed, word_pos })
        }
        None => None,
    };
    SchemeState::from_parts(bulletin, secrets, polynomials, shares, rng)
}

pub fn pseudo_share_from_doc(doc: &PseudoShareDoc, bulletin: &Bulletin) -> Result<PseudoShare> {
    if doc.scheme != bulletin.params.scheme_id() {
        return Err(bad("pseudo-share document was issued for a different scheme"));
    }
    Ok(PseudoShare {
        value: field_from_hex(&doc.value, &bulletin.params.prime, "pseudo share")?,
        secret_index: doc.secret_index,
        set_index: doc.set_index,
        participant: doc.participant,
    })
}

pub fn share_from_doc(doc: &ShareDoc, bulletin: &Bulletin) -> Result<(u32, FieldElement)> {
    if doc.scheme != bulletin.params.scheme_id() {
        return Err(bad("share file was issued for a different scheme"));
    }
    Ok((
        doc.participant,
        field_from_hex(&doc.share, &bulletin.params.prime, "share")?,
    ))
}

// ---------------------------------------------------------------------------
// journal replay

/// Re-derives the current bulletin from the journal: parses the setup
/// snapshot, then applies every delta in order.
pub fn replay_journal(records: &[JournalRecordDoc]) -> Result<Bulletin> {
    let first = records.first().ok_or_else(|| bad("journal is empty"))?;
    if first.op != "setup" {
        return Err(bad("journal must start with the setup record"));
    }
    let doc = first
        .bulletin
        .as_ref()
        .ok_or_else(|| bad("setup record carries no bulletin"))?;
    let mut bulletin = bulletin_from_doc(doc)?;
    let p = bulletin.params.prime.clone();
    let hash = bulletin.params.hash;
    for record in &records[1..] {
        if record.version != bulletin.version + 1 {
            return Err(bad(format!(
                "journal version jumps from {} to {}",
                bulletin.version, record.version
            )));
        }
        let delta = record
            .delta
            .as_ref()
            .ok_or_else(|| bad("renewal record carries no delta"))?;
        for k in &delta.masks_removed {
            bulletin.masks.remove(&(k.i, k.q, k.participant));
        }
        for k in &delta.participant_commitments_removed {
            bulletin
                .participant_commitments
                .remove(&(k.i, k.q, k.participant));
        }
        for i in &delta.secret_commitments_removed {
            bulletin.secret_commitments.remove(i);
        }
        for m in &delta.masks_upserted {
            bulletin.masks.insert(
                (m.i, m.q, m.participant),
                field_from_hex(&m.value, &p, "mask")?,
            );
        }
        for c in &delta.participant_commitments_upserted {
            bulletin.participant_commitments.insert(
                (c.i, c.q, c.participant),
                commitment_from_doc(&c.commitment, &p, hash)?,
            );
        }
        for sc in &delta.secret_commitments_upserted {
            bulletin
                .secret_commitments
                .insert(sc.i, commitment_from_doc(&sc.commitment, &p, hash)?);
        }
        for pd in &delta.participants_upserted {
            let id = field_from_hex(&pd.id, &p, "participant identifier")?;
            bulletin
                .params
                .participants
                .insert(pd.index, ParticipantEntry { id, active: pd.active });
        }
        for sd in &delta.structure_upserted {
            let mut sets = BTreeMap::new();
            for set in &sd.sets {
                sets.insert(
                    set.index,
                    SetEntry {
                        members: set.members.clone(),
                        active: set.active,
                    },
                );
            }
            bulletin
                .params
                .structure
                .insert(sd.index, SecretEntry { sets, active: sd.active });
        }
        bulletin.version = record.version;
    }
    Ok(bulletin)
}

/// Parses a journal file (one canonical JSON record per line).
pub fn parse_journal(text: &str) -> Result<Vec<JournalRecordDoc>> {
    text.lines()
        .filter(|line| !line.trim().is_empty())
        .map(|line| {
            serde_json::from_str(line).map_err(|e| bad(format!("invalid journal record: {e}")))
        })
        .collect()
}

pub fn parse_bulletin(text: &str) -> Result<Bulletin> {
    let doc: BulletinDoc =
        serde_json::from_str(text).map_err(|e| bad(format!("invalid bulletin: {e}")))?;
    bulletin_from_doc(&doc)
}

pub fn parse_state(text: &str) -> Result<SchemeState> {
    let doc: StateDoc =
        serde_json::from_str(text).map_err(|e| bad(format!("invalid state file: {e}")))?;
    state_from_doc(&doc)
}
