//! The three-round protocol `V[p]`.
//!
//! The verifier holds `|φ(w1,w2)⟩ ⊗ |φ(w3,w4)⟩`, draws `J` uniformly and
//! applies `Z(J) ⊗ Z(J)`. The prover measures in `{|φ(w1,k1)⟩ ⊗ |φ(w3,k2)⟩}`
//! and answers `J' = w2 − k1` when `w2 − k1 = w4 − k2`, aborting otherwise.
//! The verifier accepts iff `J' = J`.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::{check_prime, FieldElement};
use crate::heisenberg::HeisenbergSystem;
use crate::linalg::{StateVector, C64};
use crate::math;
use crate::random::uniform_field;
use crate::{Error, Result};

/// Tolerance on the total Born weight of a prover measurement.
pub const BORN_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Witness {
    pub w1: FieldElement,
    pub w2: FieldElement,
    pub w3: FieldElement,
    pub w4: FieldElement,
}

impl Witness {
    pub fn new(p: u32, values: [u64; 4]) -> Result<Self> {
        Ok(Self {
            w1: FieldElement::new(values[0], p)?,
            w2: FieldElement::new(values[1], p)?,
            w3: FieldElement::new(values[2], p)?,
            w4: FieldElement::new(values[3], p)?,
        })
    }

    pub fn from_elements(w1: FieldElement, w2: FieldElement, w3: FieldElement, w4: FieldElement) -> Result<Self> {
        let p = w1.modulus();
        for m in [w2.modulus(), w3.modulus(), w4.modulus()] {
            if m != p {
                return Err(Error::ModulusMismatch(p, m));
            }
        }
        Ok(Self { w1, w2, w3, w4 })
    }

    pub fn modulus(&self) -> u32 {
        self.w1.modulus()
    }

    pub fn values(&self) -> [u32; 4] {
        [self.w1.value(), self.w2.value(), self.w3.value(), self.w4.value()]
    }

    /// Position in the lexicographic enumeration of [`Witness::all`].
    pub fn index(&self) -> usize {
        let p = self.modulus() as usize;
        self.values()
            .iter()
            .fold(0usize, |acc, &v| acc * p + v as usize)
    }

    /// All `p^4` witnesses in lexicographic order.
    pub fn all(p: u32) -> Result<impl Iterator<Item = Witness> + Clone> {
        check_prime(p)?;
        let n = (p as u64).pow(4);
        Ok((0..n).map(move |mut i| {
            let mut v = [0u64; 4];
            for slot in v.iter_mut().rev() {
                *slot = i % p as u64;
                i /= p as u64;
            }
            let f = |x| FieldElement::reduce(x, p);
            Witness {
                w1: f(v[0]),
                w2: f(v[1]),
                w3: f(v[2]),
                w4: f(v[3]),
            }
        }))
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, p: u32) -> Result<Self> {
        check_prime(p)?;
        Ok(Self {
            w1: uniform_field(rng, p),
            w2: uniform_field(rng, p),
            w3: uniform_field(rng, p),
            w4: uniform_field(rng, p),
        })
    }

    /// `(w1, w2 + c, w3, w4 + c)`.
    pub fn shifted(&self, c: FieldElement) -> Self {
        Self {
            w2: self.w2 + c,
            w4: self.w4 + c,
            ..*self
        }
    }
}

/// The prover's answer: a field element or the abort symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Response {
    Value(FieldElement),
    Abort,
}

impl Response {
    /// Index in `0..=p`, with abort last.
    pub fn index(&self, p: u32) -> usize {
        match self {
            Response::Value(v) => v.value() as usize,
            Response::Abort => p as usize,
        }
    }

    pub fn accepts(&self, j: FieldElement) -> bool {
        matches!(self, Response::Value(v) if *v == j)
    }
}

/// The honest response rule for outcomes `(k1, k2)` under witness `w`.
pub fn respond(w: &Witness, k1: FieldElement, k2: FieldElement) -> Response {
    let a = w.w2 - k1;
    let b = w.w4 - k2;
    if a == b {
        Response::Value(a)
    } else {
        Response::Abort
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PublicState {
    p: u32,
    state: StateVector,
}

impl PublicState {
    pub fn new(p: u32, state: StateVector) -> Result<Self> {
        check_prime(p)?;
        if state.dim() != (p * p) as usize {
            return Err(Error::Dimension("public state must live on two qudits"));
        }
        Ok(Self { p, state })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProtocolParams {
    p: u32,
    n: usize,
}

impl ProtocolParams {
    pub fn new(p: u32, n: usize) -> Result<Self> {
        check_prime(p)?;
        if n == 0 {
            return Err(Error::Invalid("statement count must be positive"));
        }
        Ok(Self { p, n })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn statements(&self) -> usize {
        self.n
    }

    /// Quantum systems in the public information: two per statement.
    pub fn public_systems(&self) -> usize {
        2 * self.n
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProverOutput {
    pub k1: FieldElement,
    pub k2: FieldElement,
    pub response: Response,
}

/// One sampled run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Transcript {
    pub p: u32,
    pub statement: usize,
    pub j: FieldElement,
    pub k1: FieldElement,
    pub k2: FieldElement,
    pub response: Response,
    pub accept: bool,
    pub seed: u64,
}

/// `V[p]` with its eigenbases precomputed.
#[derive(Clone, Debug)]
pub struct VisProtocol {
    system: HeisenbergSystem,
}

impl VisProtocol {
    pub fn new(p: u32) -> Result<Self> {
        Ok(Self {
            system: HeisenbergSystem::new(p)?,
        })
    }

    pub fn p(&self) -> u32 {
        self.system.p()
    }

    pub fn system(&self) -> &HeisenbergSystem {
        &self.system
    }

    fn check(&self, w: &Witness) -> Result<()> {
        if w.modulus() != self.p() {
            return Err(Error::ModulusMismatch(self.p(), w.modulus()));
        }
        Ok(())
    }

    /// `|φ(w1,w2)⟩ ⊗ |φ(w3,w4)⟩`.
    pub fn public_state(&self, w: &Witness) -> Result<PublicState> {
        self.check(w)?;
        let a = self.system.phi(w.w1, w.w2);
        let b = self.system.phi(w.w3, w.w4);
        PublicState::new(self.p(), a.kron(b))
    }

    /// `(Z(j) ⊗ Z(j))` applied to the state.
    pub fn challenge(&self, state: &PublicState, j: FieldElement) -> Result<PublicState> {
        let p = self.p();
        if state.p() != p || j.modulus() != p {
            return Err(Error::ModulusMismatch(p, j.modulus()));
        }
        let n = p as usize;
        let amps = state
            .state()
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(idx, &a)| {
                let x1 = (idx / n) as u64;
                let x2 = (idx % n) as u64;
                a * crate::heisenberg::omega_pow(p, (x1 + x2) * j.value() as u64)
            })
            .collect();
        PublicState::new(p, StateVector::from_amplitudes(amps))
    }

    /// Born probabilities of `(k1, k2)`, indexed `k1·p + k2`.
    pub fn outcome_distribution(&self, w: &Witness, state: &StateVector) -> Result<Vec<f64>> {
        self.check(w)?;
        let p = self.p();
        let n = p as usize;
        if state.dim() != n * n {
            return Err(Error::Dimension("prover expects a two-qudit state"));
        }
        let b1 = self.system.basis(w.w1);
        let b3 = self.system.basis(w.w3);
        let mut probs = Vec::with_capacity(n * n);
        for k1 in 0..p {
            let u = b1.vector(k1);
            // ⟨u| ⊗ I applied to the state.
            let partial: Vec<C64> = (0..n)
                .map(|x2| (0..n).map(|x1| u[x1].conj() * state[x1 * n + x2]).sum())
                .collect();
            for k2 in 0..p {
                let v = b3.vector(k2);
                let amp: C64 = (0..n).map(|x2| v[x2].conj() * partial[x2]).sum();
                probs.push(amp.norm_sqr());
            }
        }
        let total: f64 = probs.iter().sum();
        if math::abs(total - state.norm_sqr()) > BORN_TOL {
            return Err(Error::BornWeights(total));
        }
        Ok(probs)
    }

    /// Measures in the prover's basis and applies the response rule.
    pub fn prover_step<R: Rng + ?Sized>(
        &self,
        w: &Witness,
        state: &PublicState,
        rng: &mut R,
    ) -> Result<ProverOutput> {
        let probs = self.outcome_distribution(w, state.state())?;
        let total: f64 = probs.iter().sum();
        if math::abs(total - 1.0) > BORN_TOL {
            return Err(Error::BornWeights(total));
        }
        let p = self.p();
        let u: f64 = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = probs.len() - 1;
        for (i, &q) in probs.iter().enumerate() {
            acc += q;
            if u < acc {
                pick = i;
                break;
            }
        }
        // Never land on a zero-probability outcome through rounding.
        while probs[pick] == 0.0 && pick > 0 {
            pick -= 1;
        }
        let k1 = FieldElement::reduce((pick / p as usize) as u64, p);
        let k2 = FieldElement::reduce((pick % p as usize) as u64, p);
        Ok(ProverOutput {
            k1,
            k2,
            response: respond(w, k1, k2),
        })
    }

    /// One sampled run; everything random derives from `seed`.
    pub fn run_protocol(&self, w_true: &Witness, w_prover: &Witness, seed: u64) -> Result<Transcript> {
        self.run_statement(0, w_true, w_prover, seed)
    }

    pub fn run_statement(
        &self,
        statement: usize,
        w_true: &Witness,
        w_prover: &Witness,
        seed: u64,
    ) -> Result<Transcript> {
        self.check(w_true)?;
        self.check(w_prover)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let public = self.public_state(w_true)?;
        self.run_on_state(statement, &public, w_prover, seed, &mut rng)
    }

    pub(crate) fn run_on_state<R: Rng + ?Sized>(
        &self,
        statement: usize,
        public: &PublicState,
        w_prover: &Witness,
        seed: u64,
        rng: &mut R,
    ) -> Result<Transcript> {
        let p = self.p();
        let j = uniform_field(rng, p);
        let challenged = self.challenge(public, j)?;
        let out = self.prover_step(w_prover, &challenged, rng)?;
        Ok(Transcript {
            p,
            statement,
            j,
            k1: out.k1,
            k2: out.k2,
            response: out.response,
            accept: out.response.accepts(j),
            seed,
        })
    }

    /// Exact acceptance probability, averaged over the uniform challenge.
    pub fn exact_acceptance(&self, w_true: &Witness, w_prover: &Witness) -> Result<f64> {
        self.check(w_true)?;
        self.check(w_prover)?;
        let p = self.p();
        let sys = &self.system;
        let mut total = 0.0;
        for j in FieldElement::all(p)? {
            let s1 = sys.apply_phase(j, sys.phi(w_true.w1, w_true.w2));
            let s2 = sys.apply_phase(j, sys.phi(w_true.w3, w_true.w4));
            let b1 = sys.basis(w_prover.w1);
            let b3 = sys.basis(w_prover.w3);
            let q1: Vec<f64> = (0..p).map(|k| b1.vector(k).inner(&s1).norm_sqr()).collect();
            let q2: Vec<f64> = (0..p).map(|k| b3.vector(k).inner(&s2).norm_sqr()).collect();
            for k1 in FieldElement::all(p)? {
                // The response is J iff k1 = w2' − J and k2 = w4' − J.
                if w_prover.w2 - k1 != j {
                    continue;
                }
                let k2 = w_prover.w4 - j;
                total += q1[k1.value() as usize] * q2[k2.value() as usize];
            }
        }
        Ok(total / p as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::seeded;
    use alloc::vec;

    fn w(p: u32, v: [u64; 4]) -> Witness {
        Witness::new(p, v).unwrap()
    }

    fn fe(v: u64, p: u32) -> FieldElement {
        FieldElement::new(v, p).unwrap()
    }

    #[test]
    fn public_state_examples() {
        let proto = VisProtocol::new(2).unwrap();
        let s = proto.public_state(&w(2, [0, 0, 0, 0])).unwrap();
        for a in s.state().amplitudes() {
            assert!((a - C64::new(0.5, 0.0)).norm() < 1e-12);
        }
        for wit in Witness::all(2).unwrap() {
            assert!(proto.public_state(&wit).unwrap().state().is_normalized(1e-12));
        }
        let proto3 = VisProtocol::new(3).unwrap();
        let s = proto3.public_state(&w(3, [1, 2, 0, 1])).unwrap();
        for a in s.state().amplitudes() {
            assert!((a.norm() - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn challenge_examples() {
        let proto = VisProtocol::new(2).unwrap();
        let s = proto.public_state(&w(2, [0, 0, 0, 0])).unwrap();
        assert_eq!(proto.challenge(&s, fe(0, 2)).unwrap(), s);
        let c = proto.challenge(&s, fe(1, 2)).unwrap();
        let minus = proto.public_state(&w(2, [0, 1, 0, 1])).unwrap();
        assert!((minus.state().inner(c.state()).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn challenged_state_matches_shifted_witness() {
        let mut rng = seeded(17);
        for _ in 0..50 {
            let p = [2u32, 3, 5, 7][rand::Rng::random_range(&mut rng, 0..4)];
            let proto = VisProtocol::new(p).unwrap();
            let wit = Witness::random(&mut rng, p).unwrap();
            let j = uniform_field(&mut rng, p);
            let c = proto.challenge(&proto.public_state(&wit).unwrap(), j).unwrap();
            let target = proto.public_state(&wit.shifted(-j)).unwrap();
            assert!((target.state().inner(c.state()).norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn prover_step_examples() {
        let proto = VisProtocol::new(2).unwrap();
        let wit = w(2, [0, 1, 1, 0]);
        let challenged = proto
            .challenge(&proto.public_state(&wit).unwrap(), fe(1, 2))
            .unwrap();
        let mut rng = seeded(0);
        for _ in 0..20 {
            let out = proto.prover_step(&wit, &challenged, &mut rng).unwrap();
            assert_eq!((out.k1, out.k2), (fe(0, 2), fe(1, 2)));
            assert_eq!(out.response, Response::Value(fe(1, 2)));
        }

        let proto = VisProtocol::new(3).unwrap();
        let wit = w(3, [2, 1, 0, 2]);
        let own = proto.public_state(&wit).unwrap();
        let out = proto.prover_step(&wit, &own, &mut rng).unwrap();
        assert_eq!((out.k1, out.k2), (wit.w2, wit.w4));
        assert_eq!(out.response, Response::Value(fe(0, 3)));
    }

    #[test]
    fn prover_rejects_bad_weights() {
        let proto = VisProtocol::new(2).unwrap();
        let bad = PublicState::new(2, StateVector::basis(4, 0).scale(C64::new(2.0, 0.0))).unwrap();
        let mut rng = seeded(0);
        assert!(matches!(
            proto.prover_step(&w(2, [0, 0, 0, 0]), &bad, &mut rng),
            Err(Error::BornWeights(_))
        ));
    }

    #[test]
    fn honest_runs_accept() {
        let proto = VisProtocol::new(3).unwrap();
        let mut rng = seeded(4);
        for seed in 0..200 {
            let wit = Witness::random(&mut rng, 3).unwrap();
            let t = proto.run_protocol(&wit, &wit, seed).unwrap();
            assert!(t.accept);
            assert_eq!(t.response, Response::Value(t.j));
            assert_eq!(t.seed, seed);
        }
    }

    #[test]
    fn runs_replay_from_seed() {
        let proto = VisProtocol::new(2).unwrap();
        let a = w(2, [0, 0, 0, 0]);
        let b = w(2, [1, 0, 0, 0]);
        for seed in 0..20 {
            assert_eq!(
                proto.run_protocol(&a, &b, seed).unwrap(),
                proto.run_protocol(&a, &b, seed).unwrap()
            );
        }
    }

    #[test]
    fn exact_examples() {
        let proto = VisProtocol::new(2).unwrap();
        let a = w(2, [0, 0, 0, 0]);
        assert!((proto.exact_acceptance(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        assert!(proto.exact_acceptance(&a, &w(2, [0, 1, 0, 0])).unwrap().abs() < 1e-12);
        let proto3 = VisProtocol::new(3).unwrap();
        for wit in Witness::all(3).unwrap().step_by(7) {
            for d in 1..3 {
                let delta = fe(d, 3);
                let moved = Witness { w2: wit.w2 + delta, w4: wit.w4 + delta, ..wit };
                assert!(proto3.exact_acceptance(&wit, &moved).unwrap().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn enumeration_and_index_agree() {
        let all: Vec<Witness> = Witness::all(3).unwrap().collect();
        assert_eq!(all.len(), 81);
        for (i, wit) in all.iter().enumerate() {
            assert_eq!(wit.index(), i);
        }
        assert_eq!(all[5].values(), [0, 0, 1, 2]);
    }

    #[test]
    fn response_rule() {
        let wit = w(5, [0, 3, 0, 1]);
        assert_eq!(respond(&wit, fe(1, 5), fe(4, 5)), Response::Value(fe(2, 5)));
        assert_eq!(respond(&wit, fe(1, 5), fe(3, 5)), Response::Abort);
        assert_eq!(Response::Abort.index(5), 5);
        assert!(!Response::Abort.accepts(fe(0, 5)));
        assert_eq!(vec![ProtocolParams::new(3, 4).unwrap().public_systems()], vec![8]);
        assert!(ProtocolParams::new(3, 0).is_err());
        assert!(ProtocolParams::new(9, 1).is_err());
    }
}
