//! Parallel composition of `V[p]` instances with AND acceptance.

use alloc::vec::Vec;

use crate::adversaries::{zk_report, Instrument, ZkReport};
use crate::random::derive_seed;
use crate::soundness::{build_game_from_vis, solve, CqGame, SolveReport};
use crate::vis::{ProtocolParams, Transcript, VisProtocol, Witness};
use crate::{Error, Result};

/// Default cap on the prover input dimension of a tensored game.
pub const DEFAULT_DIM_CAP: usize = 128;

#[derive(Clone, Debug)]
pub struct ConcatProtocol {
    components: Vec<VisProtocol>,
}

/// Component transcripts of one concatenated run.
#[derive(Clone, Debug, PartialEq)]
pub struct ConcatTranscript {
    pub transcripts: Vec<Transcript>,
    pub accept_all: bool,
}

impl ConcatProtocol {
    /// `l` copies of `V[p]`.
    pub fn homogeneous(p: u32, l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::Invalid("concatenation needs at least one component"));
        }
        let proto = VisProtocol::new(p)?;
        Ok(Self {
            components: (0..l).map(|_| proto.clone()).collect(),
        })
    }

    pub fn new(components: Vec<VisProtocol>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Invalid("concatenation needs at least one component"));
        }
        Ok(Self { components })
    }

    pub fn l(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[VisProtocol] {
        &self.components
    }

    pub fn params(&self) -> Vec<ProtocolParams> {
        self.components
            .iter()
            .map(|c| ProtocolParams::new(c.p(), 1).expect("component modulus is prime"))
            .collect()
    }

    /// Total dimension of one public key, `Π p_i²`.
    pub fn dimension(&self) -> usize {
        self.components.iter().map(|c| (c.p() as usize).pow(2)).product()
    }

    fn check_lengths(&self, w_true: &[Witness], w_prover: &[Witness]) -> Result<()> {
        if w_true.len() != self.l() {
            return Err(Error::LengthMismatch(self.l(), w_true.len()));
        }
        if w_prover.len() != self.l() {
            return Err(Error::LengthMismatch(self.l(), w_prover.len()));
        }
        Ok(())
    }

    /// Runs every component on its own derived seed.
    pub fn run(&self, w_true: &[Witness], w_prover: &[Witness], seed: u64) -> Result<ConcatTranscript> {
        self.check_lengths(w_true, w_prover)?;
        let transcripts = self
            .components
            .iter()
            .enumerate()
            .map(|(i, proto)| proto.run_protocol(&w_true[i], &w_prover[i], derive_seed(seed, i as u64)))
            .collect::<Result<Vec<_>>>()?;
        let accept_all = transcripts.iter().all(|t| t.accept);
        Ok(ConcatTranscript {
            transcripts,
            accept_all,
        })
    }

    pub fn component_acceptances(&self, w_true: &[Witness], w_prover: &[Witness]) -> Result<Vec<f64>> {
        self.check_lengths(w_true, w_prover)?;
        self.components
            .iter()
            .zip(w_true.iter().zip(w_prover))
            .map(|(proto, (t, w))| proto.exact_acceptance(t, w))
            .collect()
    }

    /// Product of the component acceptance probabilities.
    pub fn exact(&self, w_true: &[Witness], w_prover: &[Witness]) -> Result<f64> {
        Ok(self.component_acceptances(w_true, w_prover)?.iter().product())
    }

    /// Optimal stateless prover of the tensored game.
    pub fn type2_game(&self, cap: usize) -> Result<CqGame> {
        let dim = self.dimension();
        if dim > cap {
            return Err(Error::DimensionCap { dim, cap });
        }
        let mut game: Option<CqGame> = None;
        for proto in &self.components {
            let single = build_game_from_vis(proto)?.compressed();
            game = Some(match game {
                None => single,
                Some(g) => g.tensor(&single).compressed(),
            });
        }
        Ok(game.expect("at least one component"))
    }

    pub fn type2_bound(&self, cap: usize) -> Result<SolveReport> {
        let g = self.type2_game(cap)?.operator()?;
        Ok(solve(&g)?.0)
    }

    /// Transcript witness-independence of the component-wise instrument.
    pub fn zk(&self, instruments: &[Instrument], lists: &[Vec<Witness>]) -> Result<ZkReport> {
        if instruments.len() != self.l() {
            return Err(Error::LengthMismatch(self.l(), instruments.len()));
        }
        let p = self.components[0].p();
        if self.components.iter().any(|c| c.p() != p) {
            return Err(Error::Invalid("transcript analysis needs equal moduli"));
        }
        let mut joint = instruments[0].clone();
        for inst in &instruments[1..] {
            joint = joint.tensor(inst)?;
        }
        zk_report(&self.components[0], &joint, lists)
    }
}

/// `concat_run` for the homogeneous protocol.
pub fn concat_run(p: u32, w_true: &[Witness], w_prover: &[Witness], seed: u64) -> Result<ConcatTranscript> {
    ConcatProtocol::homogeneous(p, w_true.len().max(1))?.run(w_true, w_prover, seed)
}

pub fn concat_exact(p: u32, w_true: &[Witness], w_prover: &[Witness]) -> Result<f64> {
    ConcatProtocol::homogeneous(p, w_true.len().max(1))?.exact(w_true, w_prover)
}

pub fn concat_type2_bound(l: usize, p: u32) -> Result<SolveReport> {
    ConcatProtocol::homogeneous(p, l)?.type2_bound(DEFAULT_DIM_CAP)
}

/// Table of `exact_acceptance(w, w')` indexed `[w.index()][w'.index()]`.
pub fn acceptance_table(proto: &VisProtocol) -> Result<Vec<Vec<f64>>> {
    let all: Vec<Witness> = Witness::all(proto.p())?.collect();
    all.iter()
        .map(|t| all.iter().map(|w| proto.exact_acceptance(t, w)).collect())
        .collect()
}

/// Largest acceptance of the concatenated protocol when every component
/// prover holds a wrong witness, over the given true lists.
pub fn worst_wrong_witness(table: &[Vec<f64>], true_lists: &[Vec<usize>]) -> f64 {
    let n = table.len();
    let mut best: f64 = 0.0;
    for truth in true_lists {
        // Components are independent, so the maximum factorizes.
        let value: f64 = truth
            .iter()
            .map(|&t| (0..n).filter(|&w| w != t).map(|w| table[t][w]).fold(0.0, f64::max))
            .product();
        best = best.max(value);
    }
    best
}

/// As [`worst_wrong_witness`], visiting every wrong list explicitly.
pub fn worst_wrong_witness_exhaustive(table: &[Vec<f64>], true_lists: &[Vec<usize>]) -> f64 {
    let n = table.len();
    let mut best: f64 = 0.0;
    for truth in true_lists {
        let l = truth.len();
        let mut wrong: Vec<usize> = truth.iter().map(|&t| usize::from(t == 0)).collect();
        'lists: loop {
            let value: f64 = truth.iter().zip(&wrong).map(|(&t, &w)| table[t][w]).product();
            best = best.max(value);
            // Odometer over wrong witnesses, skipping the true one.
            let mut c = l;
            loop {
                if c == 0 {
                    break 'lists;
                }
                c -= 1;
                let mut next = wrong[c] + 1;
                if next == truth[c] {
                    next += 1;
                }
                if next < n {
                    wrong[c] = next;
                    break;
                }
                wrong[c] = usize::from(truth[c] == 0);
            }
        }
    }
    best
}

/// All `n^l` index lists, first component most significant.
pub fn index_lists(n: usize, l: usize) -> Vec<Vec<usize>> {
    (0..n.pow(l as u32))
        .map(|idx| (0..l).map(|c| (idx / n.pow((l - 1 - c) as u32)) % n).collect())
        .collect()
}
