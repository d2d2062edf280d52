//! Signatures compiled from the VIS protocol.
//!
//! The signer's private key is one witness list per message; every
//! participant stores a copy of the matching public states. To check a
//! signature on `m` a participant challenges its own copy of `pk(m)`, the
//! signer answers with the prover step, and the response is the signature.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;

use crate::adversaries::{type2_acceptance, Povm};
use crate::concat::ConcatProtocol;
use crate::field::FieldElement;
use crate::linalg::CMatrix;
use crate::random::{derive_seed, seeded, uniform_field};
use crate::vis::{PublicState, Response, VisProtocol, Witness};
use crate::{Error, Result};

static TICKETS: AtomicU64 = AtomicU64::new(0);

fn next_ticket() -> u64 {
    TICKETS.fetch_add(1, Ordering::SeqCst)
}

/// Private witness lists and the public state templates built from them.
#[derive(Clone, Debug)]
pub struct KeyPair {
    p: u32,
    sk: Vec<Vec<Witness>>,
    pk: Vec<Vec<PublicState>>,
    ticket: u64,
}

impl KeyPair {
    pub fn from_witnesses(proto: &ConcatProtocol, sk: Vec<Vec<Witness>>) -> Result<Self> {
        if sk.len() < 2 {
            return Err(Error::Invalid("message space needs at least two messages"));
        }
        let p = proto.components()[0].p();
        let mut pk = Vec::with_capacity(sk.len());
        for ws in &sk {
            if ws.len() != proto.l() {
                return Err(Error::LengthMismatch(proto.l(), ws.len()));
            }
            pk.push(
                proto
                    .components()
                    .iter()
                    .zip(ws)
                    .map(|(c, w)| c.public_state(w))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Ok(Self {
            p,
            sk,
            pk,
            ticket: next_ticket(),
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn messages(&self) -> usize {
        self.sk.len()
    }

    /// Components per message.
    pub fn l(&self) -> usize {
        self.sk[0].len()
    }

    pub fn sk(&self, m: usize) -> Result<&[Witness]> {
        self.sk.get(m).map(|v| v.as_slice()).ok_or(Error::UnknownMessage(m))
    }

    pub fn pk(&self, m: usize) -> Result<&[PublicState]> {
        self.pk.get(m).map(|v| v.as_slice()).ok_or(Error::UnknownMessage(m))
    }

    /// Creation order among keys and forging scenarios.
    pub fn ticket(&self) -> u64 {
        self.ticket
    }
}

/// A holder of public key copies.
#[derive(Clone, Debug)]
pub struct Participant {
    pub id: usize,
    memory: BTreeMap<usize, Vec<PublicState>>,
}

impl Participant {
    pub fn new(id: usize) -> Self {
        Self {
            id,
            memory: BTreeMap::new(),
        }
    }

    pub fn store(&mut self, m: usize, copy: Vec<PublicState>) {
        self.memory.insert(m, copy);
    }

    pub fn copy(&self, m: usize) -> Result<&[PublicState]> {
        self.memory
            .get(&m)
            .map(|v| v.as_slice())
            .ok_or(Error::MissingPublicKey {
                participant: self.id,
                message: m,
            })
    }

    /// Number of stored public key systems.
    pub fn stored(&self) -> usize {
        self.memory.len()
    }
}

/// Uniform independent witnesses for `messages` messages, one copy of each
/// public key for every one of `participants` participants (ids from 1).
pub fn keygen<R: Rng + ?Sized>(
    proto: &ConcatProtocol,
    messages: usize,
    participants: usize,
    rng: &mut R,
) -> Result<(KeyPair, Vec<Participant>)> {
    if participants == 0 {
        return Err(Error::Invalid("need at least one participant"));
    }
    let sk = (0..messages)
        .map(|_| {
            proto
                .components()
                .iter()
                .map(|c| Witness::random(rng, c.p()))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let keys = KeyPair::from_witnesses(proto, sk)?;
    let parts = (1..=participants)
        .map(|id| {
            let mut part = Participant::new(id);
            for m in 0..messages {
                part.store(m, keys.pk[m].clone());
            }
            part
        })
        .collect();
    Ok((keys, parts))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignatureRecord {
    pub message: usize,
    /// The verifier's challenge per component.
    pub challenges: Vec<FieldElement>,
    pub signature: Vec<Response>,
    pub accept: bool,
    pub seed: u64,
}

/// One signing session where the signer answers with `signer_sk` on the
/// verifier's challenged copy of `pk(m)`.
pub fn sign_with(
    proto: &ConcatProtocol,
    signer_sk: &[Witness],
    verifier: &Participant,
    m: usize,
    seed: u64,
) -> Result<SignatureRecord> {
    let copy = verifier.copy(m)?;
    if signer_sk.len() != proto.l() {
        return Err(Error::LengthMismatch(proto.l(), signer_sk.len()));
    }
    if copy.len() != proto.l() {
        return Err(Error::LengthMismatch(proto.l(), copy.len()));
    }
    let mut rng = seeded(seed);
    let mut challenges = Vec::with_capacity(proto.l());
    let mut signature = Vec::with_capacity(proto.l());
    let mut accept = true;
    for ((c, state), w) in proto.components().iter().zip(copy).zip(signer_sk) {
        let t = c.run_on_state(m, state, w, seed, &mut rng)?;
        challenges.push(t.j);
        signature.push(t.response);
        accept &= t.accept;
    }
    Ok(SignatureRecord {
        message: m,
        challenges,
        signature,
        accept,
        seed,
    })
}

pub fn sign_session(
    proto: &ConcatProtocol,
    keys: &KeyPair,
    verifier: &Participant,
    m: usize,
    seed: u64,
) -> Result<SignatureRecord> {
    sign_with(proto, keys.sk(m)?, verifier, m, seed)
}

/// How the adversary produces the response it passes off as the signature
/// on the requested message.
#[derive(Clone, Debug)]
pub enum ForgeStrategy {
    /// Answers this constant in every component.
    RespondConstant(u32),
    /// Measures the intercepted challenge state with a fixed POVM.
    Povm(Povm),
    /// Has the signer sign the substituted message on a challenge prepared
    /// from the adversary's own copy, then relays that signature.
    RelayFromOwnCopy,
    /// Forwards the intercepted challenge to the signer under the
    /// substituted message and relays the answer.
    ForwardChallenge,
}

impl ForgeStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            ForgeStrategy::RespondConstant(_) => "respond_constant",
            ForgeStrategy::Povm(_) => "povm",
            ForgeStrategy::RelayFromOwnCopy => "relay_own_copy",
            ForgeStrategy::ForwardChallenge => "forward_challenge",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ForgeryScenario {
    requested: usize,
    substituted: usize,
    strategy: ForgeStrategy,
    ticket: u64,
}

impl ForgeryScenario {
    pub fn new(requested: usize, substituted: usize, strategy: ForgeStrategy) -> Result<Self> {
        if requested == substituted {
            return Err(Error::Invalid("substituted message must differ from the requested one"));
        }
        Ok(Self {
            requested,
            substituted,
            strategy,
            ticket: next_ticket(),
        })
    }

    pub fn requested(&self) -> usize {
        self.requested
    }

    pub fn substituted(&self) -> usize {
        self.substituted
    }

    pub fn strategy(&self) -> &ForgeStrategy {
        &self.strategy
    }

    pub fn ticket(&self) -> u64 {
        self.ticket
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForgeryReport {
    pub trials: usize,
    pub successes: usize,
    pub rate: f64,
    /// Success averaged over the unknown key of the requested message.
    pub exact: f64,
    /// Success for the key actually drawn.
    pub exact_given_key: f64,
    /// `p^{-l}`.
    pub bound: f64,
    /// Per-trial success, in trial order.
    pub outcomes: Vec<bool>,
}

/// The strategy in one component as a witness-independent POVM on the
/// challenged state. Only keys of the substituted message are consulted.
fn component_povm(
    proto: &VisProtocol,
    strategy: &ForgeStrategy,
    substituted: &Witness,
) -> Result<Povm> {
    let p = proto.p();
    match strategy {
        ForgeStrategy::RespondConstant(c) => Povm::constant(p, FieldElement::new(*c as u64, p)?),
        ForgeStrategy::Povm(m) => {
            if m.p() != p {
                return Err(Error::ModulusMismatch(p, m.p()));
            }
            Ok(m.clone())
        }
        ForgeStrategy::ForwardChallenge => Povm::induced_by(proto, substituted),
        ForgeStrategy::RelayFromOwnCopy => {
            // The relayed answer ignores the intercepted state entirely.
            let d = (p * p) as usize;
            let dist = relayed_distribution(proto, substituted)?;
            let elements = dist[..p as usize]
                .iter()
                .map(|&q| CMatrix::identity(d).scale_real(q))
                .collect();
            Povm::new(p, elements, CMatrix::identity(d).scale_real(dist[p as usize]))
        }
    }
}

/// Response distribution of the signer on a fresh uniform challenge of its
/// own public state, abort last.
fn relayed_distribution(proto: &VisProtocol, w: &Witness) -> Result<Vec<f64>> {
    let p = proto.p();
    let n = p as usize;
    let public = proto.public_state(w)?;
    let mut dist = alloc::vec![0.0; n + 1];
    for j in FieldElement::all(p)? {
        let psi = proto.challenge(&public, j)?;
        let probs = proto.outcome_distribution(w, psi.state())?;
        for (idx, q) in probs.iter().enumerate() {
            let k1 = FieldElement::reduce((idx / n) as u64, p);
            let k2 = FieldElement::reduce((idx % n) as u64, p);
            dist[crate::vis::respond(w, k1, k2).index(p)] += q / n as f64;
        }
    }
    Ok(dist)
}

fn sample_index<R: Rng + ?Sized>(rng: &mut R, dist: &[f64]) -> usize {
    let total: f64 = dist.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, &q) in dist.iter().enumerate() {
        acc += q;
        if u < acc {
            return i;
        }
    }
    dist.iter().rposition(|&q| q > 0.0).unwrap_or(0)
}

/// Simulates `trials` interceptions of a request to sign the scenario's
/// requested message, with the verifier challenging its own copy.
pub fn forge_attack(
    proto: &ConcatProtocol,
    scenario: &ForgeryScenario,
    keys: &KeyPair,
    verifier: &Participant,
    trials: usize,
    seed: u64,
) -> Result<ForgeryReport> {
    if scenario.ticket >= keys.ticket {
        return Err(Error::StrategyDependsOnKey);
    }
    let m = scenario.requested;
    let m2 = scenario.substituted;
    let sk_sub = keys.sk(m2)?;
    let copy = verifier.copy(m)?;
    let povms = proto
        .components()
        .iter()
        .zip(sk_sub)
        .map(|(c, w)| component_povm(c, &scenario.strategy, w))
        .collect::<Result<Vec<_>>>()?;

    let mut exact = 1.0;
    let mut exact_given_key = 1.0;
    let mut bound = 1.0;
    for ((c, povm), state) in proto.components().iter().zip(&povms).zip(copy) {
        exact *= type2_acceptance(povm);
        let mut given = 0.0;
        for j in FieldElement::all(c.p())? {
            let psi = c.challenge(state, j)?;
            given += povm.element(j).expectation(psi.state()).re;
        }
        exact_given_key *= given / c.p() as f64;
        bound /= c.p() as f64;
    }

    let mut outcomes = Vec::with_capacity(trials);
    for trial in 0..trials {
        let mut rng = seeded(derive_seed(seed, trial as u64));
        let mut ok = true;
        for (i, (c, state)) in proto.components().iter().zip(copy).enumerate() {
            let p = c.p();
            let j = uniform_field(&mut rng, p);
            let challenged = c.challenge(state, j)?;
            let response = match &scenario.strategy {
                ForgeStrategy::ForwardChallenge => c.prover_step(&sk_sub[i], &challenged, &mut rng)?.response,
                ForgeStrategy::RelayFromOwnCopy => {
                    let own = keys.pk(m2)?[i].clone();
                    c.run_on_state(m2, &own, &sk_sub[i], seed, &mut rng)?.response
                }
                _ => {
                    let rho = CMatrix::projector(challenged.state());
                    let idx = sample_index(&mut rng, &povms[i].distribution(&rho));
                    if idx == p as usize {
                        Response::Abort
                    } else {
                        Response::Value(FieldElement::reduce(idx as u64, p))
                    }
                }
            };
            ok &= response.accepts(j);
        }
        outcomes.push(ok);
    }
    let successes = outcomes.iter().filter(|&&ok| ok).count();
    Ok(ForgeryReport {
        trials,
        successes,
        rate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
        exact,
        exact_given_key,
        bound,
        outcomes,
    })
}

/// Independent two-message keys per bit position.
#[derive(Clone, Debug)]
pub struct BitwiseKeys {
    pub positions: Vec<KeyPair>,
}

/// One participant's copies for every bit position.
#[derive(Clone, Debug)]
pub struct BitwiseParticipant {
    pub id: usize,
    pub positions: Vec<Participant>,
}

impl BitwiseParticipant {
    pub fn key_systems(&self) -> usize {
        self.positions.iter().map(|p| p.stored()).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Resources {
    /// Public key systems held by each participant.
    pub key_systems: usize,
    /// Challenges exchanged per signature.
    pub challenges: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BitwiseSignature {
    pub records: Vec<SignatureRecord>,
    pub accept: bool,
    pub resources: Resources,
}

pub fn keygen_bitwise<R: Rng + ?Sized>(
    proto: &ConcatProtocol,
    bits: usize,
    participants: usize,
    rng: &mut R,
) -> Result<(BitwiseKeys, Vec<BitwiseParticipant>)> {
    if bits == 0 {
        return Err(Error::Invalid("need at least one bit"));
    }
    let mut positions = Vec::with_capacity(bits);
    let mut parts: Vec<BitwiseParticipant> = (1..=participants)
        .map(|id| BitwiseParticipant {
            id,
            positions: Vec::with_capacity(bits),
        })
        .collect();
    for _ in 0..bits {
        let (keys, ps) = keygen(proto, 2, participants, rng)?;
        positions.push(keys);
        for (bp, p) in parts.iter_mut().zip(ps) {
            bp.positions.push(p);
        }
    }
    Ok((BitwiseKeys { positions }, parts))
}

/// Signs each bit in its own session; the message is accepted only if
/// every bit is.
pub fn bitwise_sign(
    proto: &ConcatProtocol,
    bits: &[bool],
    keys: &BitwiseKeys,
    verifier: &BitwiseParticipant,
    seed: u64,
) -> Result<BitwiseSignature> {
    if bits.len() != keys.positions.len() {
        return Err(Error::LengthMismatch(keys.positions.len(), bits.len()));
    }
    if verifier.positions.len() != bits.len() {
        return Err(Error::LengthMismatch(bits.len(), verifier.positions.len()));
    }
    let records = bits
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            sign_session(
                proto,
                &keys.positions[i],
                &verifier.positions[i],
                usize::from(b),
                derive_seed(seed, i as u64),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let accept = records.iter().all(|r| r.accept);
    Ok(BitwiseSignature {
        records,
        accept,
        resources: Resources {
            key_systems: verifier.key_systems(),
            challenges: bits.len(),
        },
    })
}

/// Optional spot check: each participant is independently asked, with
/// probability `rate`, to verify a signature on `m`.
pub fn deterrent_round(
    proto: &ConcatProtocol,
    keys: &KeyPair,
    participants: &[Participant],
    m: usize,
    rate: f64,
    seed: u64,
) -> Result<Vec<(usize, SignatureRecord)>> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::Invalid("deterrent rate must lie in [0, 1]"));
    }
    let mut rng = seeded(seed);
    let mut out = Vec::new();
    for (i, part) in participants.iter().enumerate() {
        if rng.random::<f64>() < rate {
            let rec = sign_session(proto, keys, part, m, derive_seed(seed, i as u64))?;
            out.push((part.id, rec));
        }
    }
    Ok(out)
}
