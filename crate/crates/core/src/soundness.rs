//! The stateless prover game.
//!
//! A verifier strategy is a preparation `ρ_RA` and an acceptance operator
//! `Π_acc` on `R ⊗ B`. A prover channel `E: A → B` with Choi matrix `C` is
//! accepted with probability `Tr(G C)`, where
//! `G = Tr_R (ρ^{T_A} ⊗ I_B)(Π_acc ⊗ I_A)`. The best prover solves
//! `max Tr(G C)` subject to `C ≥ 0`, `Tr_B C = I_A`; any Hermitian `W` with
//! `W ⊗ I_B ≥ G` bounds it from above by `Tr W`.

use alloc::vec::Vec;

use rand::Rng;

use crate::adversaries::{check_psd, choi_of_channel, Channel, OPERATOR_TOL};
use crate::field::FieldElement;
use crate::linalg::{hermitian_eigen, inverse_sqrt_psd, min_eigenvalue, CMatrix, C64};
use crate::math;
use crate::random::{random_density, random_effect};
use crate::vis::{VisProtocol, Witness};
use crate::{Error, Result};

/// Stop when successive values differ by less than this.
pub const VALUE_TOL: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 10_000;
/// A certificate holds when `W ⊗ I − G` has no eigenvalue below this.
pub const SLACK_TOL: f64 = 1e-8;
/// Certificates wider than this flag a non-optimal primal.
pub const MAX_CERTIFICATE_GAP: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GameDims {
    pub r: usize,
    pub a: usize,
    pub b: usize,
}

fn check_state(rho: &CMatrix) -> Result<()> {
    if !rho.is_hermitian(OPERATOR_TOL) {
        return Err(Error::NotHermitian(rho.hermiticity_defect()));
    }
    let tr = rho.trace().re;
    if math::abs(tr - 1.0) > OPERATOR_TOL {
        return Err(Error::Trace(tr));
    }
    check_psd(rho, OPERATOR_TOL)
}

fn check_effect(pi: &CMatrix) -> Result<()> {
    if !pi.is_hermitian(OPERATOR_TOL) {
        return Err(Error::NotHermitian(pi.hermiticity_defect()));
    }
    let eig = hermitian_eigen(pi)?;
    if eig.min() < -OPERATOR_TOL || eig.max() > 1.0 + OPERATOR_TOL {
        return Err(Error::AcceptanceRange);
    }
    Ok(())
}

/// A general game with dense `ρ_RA` and `Π_acc`.
#[derive(Clone, Debug)]
pub struct GameSpec {
    dims: GameDims,
    rho: CMatrix,
    pi_acc: CMatrix,
}

impl GameSpec {
    pub fn new(dims: GameDims, rho: CMatrix, pi_acc: CMatrix) -> Result<Self> {
        if rho.rows() != dims.r * dims.a || !rho.is_square() {
            return Err(Error::Dimension("rho must act on R ⊗ A"));
        }
        if pi_acc.rows() != dims.r * dims.b || !pi_acc.is_square() {
            return Err(Error::Dimension("pi_acc must act on R ⊗ B"));
        }
        check_state(&rho)?;
        check_effect(&pi_acc)?;
        Ok(Self { dims, rho, pi_acc })
    }

    /// Random `ρ = G/Tr G` and `0 ≤ Π ≤ I` with a random eigenbasis.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dims: GameDims) -> Self {
        Self {
            dims,
            rho: random_density(rng, dims.r * dims.a),
            pi_acc: random_effect(rng, dims.r * dims.b),
        }
    }

    pub fn dims(&self) -> GameDims {
        self.dims
    }

    pub fn rho(&self) -> &CMatrix {
        &self.rho
    }

    pub fn pi_acc(&self) -> &CMatrix {
        &self.pi_acc
    }

    /// `G[(a,b),(a',b')] = Σ_{r,r'} ρ[(r,a'),(r',a)] Π[(r',b),(r,b')]`.
    pub fn operator(&self) -> Result<GameOperator> {
        let GameDims { r: dr, a: da, b: db } = self.dims;
        let mut g = CMatrix::zeros(da * db, da * db);
        for r in 0..dr {
            for r2 in 0..dr {
                for b in 0..db {
                    for b2 in 0..db {
                        let pi = self.pi_acc[(r2 * db + b, r * db + b2)];
                        if pi == C64::new(0.0, 0.0) {
                            continue;
                        }
                        for a in 0..da {
                            for a2 in 0..da {
                                g[(a * db + b, a2 * db + b2)] +=
                                    self.rho[(r * da + a2, r2 * da + a)] * pi;
                            }
                        }
                    }
                }
            }
        }
        GameOperator::new(g, da, db)
    }

    /// `Tr[(I_R ⊗ E)(ρ) Π_acc]`, evaluated blockwise on `R`.
    pub fn acceptance(&self, channel: &Channel) -> Result<f64> {
        let GameDims { r: dr, a: da, b: db } = self.dims;
        if channel.dim_in() != da || channel.dim_out() != db {
            return Err(Error::Dimension("channel must map A to B"));
        }
        let mut total = C64::new(0.0, 0.0);
        for r in 0..dr {
            for r2 in 0..dr {
                let block = CMatrix::from_fn(da, da, |i, j| self.rho[(r * da + i, r2 * da + j)]);
                let out = channel.apply(&block)?;
                let pi_block = CMatrix::from_fn(db, db, |i, j| self.pi_acc[(r2 * db + i, r * db + j)]);
                total += out.trace_product(&pi_block);
            }
        }
        Ok(total.re)
    }

    /// Both games played in parallel, with factors regrouped as
    /// `(R1 R2, A1 A2, B1 B2)`.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let (d1, d2) = (self.dims, other.dims);
        let rho = self
            .rho
            .kron(&other.rho)
            .permute_factors(&[d1.r, d1.a, d2.r, d2.a], &[0, 2, 1, 3])?;
        let pi_acc = self
            .pi_acc
            .kron(&other.pi_acc)
            .permute_factors(&[d1.r, d1.b, d2.r, d2.b], &[0, 2, 1, 3])?;
        Ok(Self {
            dims: GameDims {
                r: d1.r * d2.r,
                a: d1.a * d2.a,
                b: d1.b * d2.b,
            },
            rho,
            pi_acc,
        })
    }
}

/// One classical record of a game whose `R` register is classical.
#[derive(Clone, Debug)]
pub struct CqRecord {
    pub weight: f64,
    pub rho_a: CMatrix,
    pub pi_b: CMatrix,
}

/// A game with classical `R`: `ρ_RA = Σ q_r |r⟩⟨r| ⊗ ρ_r` and
/// `Π_acc = Σ |r⟩⟨r| ⊗ Π_r`, so that `G = Σ q_r ρ_r^T ⊗ Π_r`.
#[derive(Clone, Debug)]
pub struct CqGame {
    dim_a: usize,
    dim_b: usize,
    records: Vec<CqRecord>,
}

impl CqGame {
    pub fn new(dim_a: usize, dim_b: usize, records: Vec<CqRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Invalid("game needs at least one record"));
        }
        let mut total = 0.0;
        for rec in &records {
            if rec.weight < 0.0 {
                return Err(Error::Invalid("negative record weight"));
            }
            if rec.rho_a.rows() != dim_a || !rec.rho_a.is_square() {
                return Err(Error::Dimension("record state must act on A"));
            }
            if rec.pi_b.rows() != dim_b || !rec.pi_b.is_square() {
                return Err(Error::Dimension("record effect must act on B"));
            }
            check_state(&rec.rho_a)?;
            check_effect(&rec.pi_b)?;
            total += rec.weight;
        }
        if math::abs(total - 1.0) > OPERATOR_TOL {
            return Err(Error::Trace(total));
        }
        Ok(Self {
            dim_a,
            dim_b,
            records,
        })
    }

    /// Random classical-`R` game with diagonal (classical-`B`) effects.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, records: usize, dim_a: usize, dim_b: usize) -> Self {
        let raw: Vec<f64> = (0..records).map(|_| rng.random::<f64>() + 1e-3).collect();
        let total: f64 = raw.iter().sum();
        let records = raw
            .iter()
            .map(|w| CqRecord {
                weight: w / total,
                rho_a: random_density(rng, dim_a),
                pi_b: CMatrix::from_real_diag(&(0..dim_b).map(|_| rng.random::<f64>()).collect::<Vec<_>>()),
            })
            .collect();
        Self {
            dim_a,
            dim_b,
            records,
        }
    }

    pub fn dims(&self) -> GameDims {
        GameDims {
            r: self.records.len(),
            a: self.dim_a,
            b: self.dim_b,
        }
    }

    pub fn records(&self) -> &[CqRecord] {
        &self.records
    }

    pub fn operator(&self) -> Result<GameOperator> {
        let (da, db) = (self.dim_a, self.dim_b);
        let mut g = CMatrix::zeros(da * db, da * db);
        for rec in &self.records {
            for b in 0..db {
                for b2 in 0..db {
                    let pi = rec.pi_b[(b, b2)];
                    if pi == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let s = pi * rec.weight;
                    for a in 0..da {
                        for a2 in 0..da {
                            g[(a * db + b, a2 * db + b2)] += rec.rho_a[(a2, a)] * s;
                        }
                    }
                }
            }
        }
        GameOperator::new(g, da, db)
    }

    /// `Σ_r q_r Tr[E(ρ_r) Π_r]`.
    pub fn acceptance(&self, channel: &Channel) -> Result<f64> {
        self.acceptance_per_record(|_| channel)
    }

    /// As [`CqGame::acceptance`] with a channel that may depend on the record.
    pub fn acceptance_per_record<'a>(&self, channel: impl Fn(usize) -> &'a Channel) -> Result<f64> {
        let mut total = 0.0;
        for (i, rec) in self.records.iter().enumerate() {
            let out = channel(i).apply(&rec.rho_a)?;
            total += rec.weight * out.trace_product(&rec.pi_b).re;
        }
        Ok(total)
    }

    /// Merges records with identical effects and drops records that can
    /// never contribute. The game operator is unchanged.
    pub fn compressed(&self) -> Self {
        let mut merged: Vec<CqRecord> = Vec::new();
        for rec in &self.records {
            if rec.weight == 0.0 || rec.pi_b.max_abs() == 0.0 {
                continue;
            }
            match merged.iter_mut().find(|m| m.pi_b == rec.pi_b) {
                Some(m) => {
                    let w = m.weight + rec.weight;
                    m.rho_a = (&m.rho_a.scale_real(m.weight) + &rec.rho_a.scale_real(rec.weight))
                        .scale_real(1.0 / w);
                    m.weight = w;
                }
                None => merged.push(rec.clone()),
            }
        }
        if merged.is_empty() {
            // Nothing is ever accepted; keep one inert record.
            merged.push(CqRecord {
                weight: 1.0,
                rho_a: CMatrix::identity(self.dim_a).scale_real(1.0 / self.dim_a as f64),
                pi_b: CMatrix::zeros(self.dim_b, self.dim_b),
            });
        }
        let total: f64 = merged.iter().map(|m| m.weight).sum();
        for m in merged.iter_mut() {
            m.weight /= total;
        }
        // Dropped records carried weight but no acceptance; rescale effects
        // so every value stays the same.
        let scale = self.records.iter().map(|r| r.weight).sum::<f64>();
        if total != scale {
            for m in merged.iter_mut() {
                m.pi_b = m.pi_b.scale_real(total / scale);
            }
        }
        Self {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            records: merged,
        }
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut records = Vec::with_capacity(self.records.len() * other.records.len());
        for x in &self.records {
            for y in &other.records {
                records.push(CqRecord {
                    weight: x.weight * y.weight,
                    rho_a: x.rho_a.kron(&y.rho_a),
                    pi_b: x.pi_b.kron(&y.pi_b),
                });
            }
        }
        Self {
            dim_a: self.dim_a * other.dim_a,
            dim_b: self.dim_b * other.dim_b,
            records,
        }
    }

    pub fn to_dense(&self) -> GameSpec {
        let dr = self.records.len();
        let (da, db) = (self.dim_a, self.dim_b);
        let mut rho = CMatrix::zeros(dr * da, dr * da);
        let mut pi_acc = CMatrix::zeros(dr * db, dr * db);
        for (r, rec) in self.records.iter().enumerate() {
            for i in 0..da {
                for j in 0..da {
                    rho[(r * da + i, r * da + j)] = rec.rho_a[(i, j)] * rec.weight;
                }
            }
            for i in 0..db {
                for j in 0..db {
                    pi_acc[(r * db + i, r * db + j)] = rec.pi_b[(i, j)];
                }
            }
        }
        GameSpec {
            dims: self.dims(),
            rho,
            pi_acc,
        }
    }
}

/// The game as seen by a stateless prover of `V[p]`: `R` holds the witness
/// and challenge, `A` the challenged qudits, and `B` the response with abort
/// as the last level. Records are ordered witness-major, then by challenge.
pub fn build_game_from_vis(proto: &VisProtocol) -> Result<CqGame> {
    let p = proto.p();
    let n = p as usize;
    let weight = 1.0 / (n.pow(5) as f64);
    let mut records = Vec::with_capacity(n.pow(5));
    for w in Witness::all(p)? {
        let public = proto.public_state(&w)?;
        for j in FieldElement::all(p)? {
            let psi = proto.challenge(&public, j)?;
            let mut pi_b = CMatrix::zeros(n + 1, n + 1);
            pi_b[(j.value() as usize, j.value() as usize)] = C64::new(1.0, 0.0);
            records.push(CqRecord {
                weight,
                rho_a: CMatrix::projector(psi.state()),
                pi_b,
            });
        }
    }
    Ok(CqGame {
        dim_a: n * n,
        dim_b: n + 1,
        records,
    })
}

/// The operator `G` on `A ⊗ B`.
#[derive(Clone, Debug)]
pub struct GameOperator {
    g: CMatrix,
    dim_a: usize,
    dim_b: usize,
    blocks: Option<Vec<CMatrix>>,
}

impl GameOperator {
    /// Validates that `G` is Hermitian and PSD.
    pub fn new(g: CMatrix, dim_a: usize, dim_b: usize) -> Result<Self> {
        if g.rows() != dim_a * dim_b || !g.is_square() {
            return Err(Error::Dimension("G must act on A ⊗ B"));
        }
        let scale = g.max_abs().max(1.0);
        if g.hermiticity_defect() > 1e-12 * scale {
            return Err(Error::NotHermitian(g.hermiticity_defect()));
        }
        let g = g.hermitian_part();
        let blocks = classical_blocks(&g, dim_a, dim_b);
        let min = match &blocks {
            Some(bs) => bs
                .iter()
                .map(min_eigenvalue)
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(f64::INFINITY, f64::min),
            None => min_eigenvalue(&g)?,
        };
        if min < -OPERATOR_TOL * scale {
            return Err(Error::NotPsd(min));
        }
        Ok(Self {
            g,
            dim_a,
            dim_b,
            blocks,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.g
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    /// Blocks `⟨b|G|b⟩` when `G` is block diagonal in `B`.
    pub fn blocks(&self) -> Option<&[CMatrix]> {
        self.blocks.as_deref()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        match &self.blocks {
            Some(bs) => Ok(bs
                .iter()
                .map(min_eigenvalue)
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(f64::INFINITY, f64::min)),
            None => min_eigenvalue(&self.g),
        }
    }

    /// `Tr(G C)`.
    pub fn value(&self, choi: &CMatrix) -> f64 {
        self.g.trace_product(choi).re
    }

    pub fn acceptance(&self, channel: &Channel) -> Result<f64> {
        Ok(self.value(&choi_of_channel(channel)?))
    }
}

fn classical_blocks(g: &CMatrix, da: usize, db: usize) -> Option<Vec<CMatrix>> {
    for i in 0..da * db {
        for j in 0..da * db {
            if i % db != j % db && g[(i, j)] != C64::new(0.0, 0.0) {
                return None;
            }
        }
    }
    Some((0..db).map(|b| g.block_of_second(da, db, b, b)).collect())
}

/// The prover variable at the optimum.
#[derive(Clone, Debug)]
pub enum Optimizer {
    /// `N_b = M_b^T` for a measurement with classical output `b`.
    Measurement(Vec<CMatrix>),
    /// A Choi matrix on `A ⊗ B`.
    Choi(CMatrix),
}

impl Optimizer {
    pub fn choi(&self, dim_a: usize, dim_b: usize) -> CMatrix {
        match self {
            Optimizer::Measurement(ns) => {
                let mut c = CMatrix::zeros(dim_a * dim_b, dim_a * dim_b);
                for (b, n) in ns.iter().enumerate() {
                    let mut e = CMatrix::zeros(dim_b, dim_b);
                    e[(b, b)] = C64::new(1.0, 0.0);
                    c += &n.kron(&e);
                }
                c
            }
            Optimizer::Choi(c) => c.clone(),
        }
    }

    /// The optimal prover as a channel, when it is a measurement.
    pub fn channel(&self) -> Option<Channel> {
        match self {
            Optimizer::Measurement(ns) => {
                Some(Channel::MeasurePrepare(ns.iter().map(|n| n.transpose()).collect()))
            }
            Optimizer::Choi(_) => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PrimalSolution {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub optimizer: Optimizer,
}

fn psd_cutoff(m: &CMatrix) -> f64 {
    1e-14 * m.max_abs().max(1e-300)
}

/// Maximizes `Tr(G C)` over prover channels.
///
/// For block-diagonal `G` the variable is a measurement `{N_b}` and the
/// update is `N_b ← Λ^{-1/2} G_b N_b G_b Λ^{-1/2}` with `Λ = Σ G_b N_b G_b`;
/// otherwise the same update runs on the Choi matrix with
/// `Λ = Tr_B(G C G)`. Both start from the maximally mixed point, and any
/// kernel of `Λ` is spread evenly over the outcomes.
pub fn p_max_primal(g: &GameOperator) -> Result<PrimalSolution> {
    match g.blocks() {
        Some(blocks) => Ok(measurement_iteration(blocks, g.dim_a)),
        None => choi_iteration(g),
    }
}

fn measurement_iteration(blocks: &[CMatrix], da: usize) -> PrimalSolution {
    let nb = blocks.len();
    let mut ns: Vec<CMatrix> = (0..nb)
        .map(|_| CMatrix::identity(da).scale_real(1.0 / nb as f64))
        .collect();
    let objective = |ns: &[CMatrix]| -> f64 {
        blocks.iter().zip(ns).map(|(g, n)| g.trace_product(n).re).sum()
    };
    let mut value = objective(&ns);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let gng: Vec<CMatrix> = blocks
            .iter()
            .zip(&ns)
            .map(|(g, n)| (&(g * n) * g).hermitian_part())
            .collect();
        let mut lambda = CMatrix::zeros(da, da);
        for m in &gng {
            lambda += m;
        }
        let Ok((inv, kernel)) = inverse_sqrt_psd(&lambda, psd_cutoff(&lambda)) else {
            break;
        };
        let spread = kernel.scale_real(1.0 / nb as f64);
        ns = gng
            .iter()
            .map(|m| &(&(&inv * m) * &inv).hermitian_part() + &spread)
            .collect();
        let next = objective(&ns);
        let change = math::abs(next - value);
        value = next;
        if change < VALUE_TOL {
            converged = true;
            break;
        }
    }
    PrimalSolution {
        value,
        iterations,
        converged,
        optimizer: Optimizer::Measurement(ns),
    }
}

fn choi_iteration(g: &GameOperator) -> Result<PrimalSolution> {
    let (da, db) = (g.dim_a, g.dim_b);
    let gm = &g.g;
    let mut c = CMatrix::identity(da * db).scale_real(1.0 / db as f64);
    let mut value = gm.trace_product(&c).re;
    let mut iterations = 0;
    let mut converged = false;
    let id_b = CMatrix::identity(db);
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let gcg = (&(gm * &c) * gm).hermitian_part();
        let lambda = gcg.partial_trace(&[da, db], &[0])?;
        let (inv, kernel) = inverse_sqrt_psd(&lambda, psd_cutoff(&lambda))?;
        let left = inv.kron(&id_b);
        c = &(&(&left * &gcg) * &left).hermitian_part() + &kernel.kron(&id_b).scale_real(1.0 / db as f64);
        let next = gm.trace_product(&c).re;
        let change = math::abs(next - value);
        value = next;
        if change < VALUE_TOL {
            converged = true;
            break;
        }
    }
    Ok(PrimalSolution {
        value,
        iterations,
        converged,
        optimizer: Optimizer::Choi(c),
    })
}

/// Largest `dim_A` for which [`solve`] refines a loose fixed-point result
/// with the barrier method.
pub const BARRIER_MAX_DIM: usize = 8;
/// Fixed-point certificates wider than this are refined.
pub const REFINE_GAP: f64 = 1e-7;
/// The barrier method stops once the central-path gap `μ m` is below this.
const BARRIER_GAP: f64 = 1e-10;
const MAX_NEWTON_STEPS: usize = 60;

/// Hermitian `d × d` matrices, orthonormal in the trace inner product.
fn hermitian_basis(d: usize) -> Vec<CMatrix> {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::with_capacity(d * d);
    for i in 0..d {
        let mut e = CMatrix::zeros(d, d);
        e[(i, i)] = C64::new(1.0, 0.0);
        basis.push(e);
        for j in i + 1..d {
            let mut re = CMatrix::zeros(d, d);
            re[(i, j)] = C64::new(s, 0.0);
            re[(j, i)] = C64::new(s, 0.0);
            let mut im = CMatrix::zeros(d, d);
            im[(i, j)] = C64::new(0.0, -s);
            im[(j, i)] = C64::new(0.0, s);
            basis.push(re);
            basis.push(im);
        }
    }
    basis
}

/// Solves `H x = r` for a symmetric positive definite row-major `H`.
fn cholesky_solve(mut h: Vec<f64>, n: usize, mut r: Vec<f64>) -> Option<Vec<f64>> {
    for j in 0..n {
        let mut d = h[j * n + j];
        for k in 0..j {
            d -= h[j * n + k] * h[j * n + k];
        }
        if !(d > 0.0) {
            return None;
        }
        let d = math::sqrt(d);
        h[j * n + j] = d;
        for i in j + 1..n {
            let mut v = h[i * n + j];
            for k in 0..j {
                v -= h[i * n + k] * h[j * n + k];
            }
            h[i * n + j] = v / d;
        }
    }
    for i in 0..n {
        let mut v = r[i];
        for k in 0..i {
            v -= h[i * n + k] * r[k];
        }
        r[i] = v / h[i * n + i];
    }
    for i in (0..n).rev() {
        let mut v = r[i];
        for k in i + 1..n {
            v -= h[k * n + i] * r[k];
        }
        r[i] = v / h[i * n + i];
    }
    Some(r)
}

/// The dual `min Tr W` subject to `W ≥ G_b` for every block, or
/// `W ⊗ I_B ≥ G` for a dense operator.
struct DualBarrier<'a> {
    constraints: Vec<&'a CMatrix>,
    dim_a: usize,
    /// `Some(dim_B)` when `W` enters as `W ⊗ I_B`.
    lift: Option<usize>,
}

impl DualBarrier<'_> {
    fn lift(&self, w: &CMatrix) -> CMatrix {
        match self.lift {
            Some(db) => w.kron(&CMatrix::identity(db)),
            None => w.clone(),
        }
    }

    fn project(&self, n: &CMatrix) -> Result<CMatrix> {
        match self.lift {
            Some(db) => n.partial_trace(&[self.dim_a, db], &[0]),
            None => Ok(n.clone()),
        }
    }

    /// Eigendecompositions of every slack, or `None` if one is not
    /// positive definite.
    fn slacks(&self, w: &CMatrix) -> Result<Option<Vec<crate::linalg::HermitianEigen>>> {
        let lw = self.lift(w);
        let mut out = Vec::with_capacity(self.constraints.len());
        for c in &self.constraints {
            let e = hermitian_eigen(&(&lw - *c))?;
            if e.min() <= 0.0 {
                return Ok(None);
            }
            out.push(e);
        }
        Ok(Some(out))
    }

    fn potential(w: &CMatrix, mu: f64, eigs: &[crate::linalg::HermitianEigen]) -> f64 {
        let logdet: f64 = eigs.iter().flat_map(|e| e.values.iter()).map(|&x| math::ln(x)).sum();
        w.trace().re - mu * logdet
    }
}

/// Log-barrier Newton method on the dual. The primal is read off the
/// central path as `N_c = μ S_c^{-1}` and renormalized to be exactly
/// feasible, so both returned values are rigorous.
fn barrier_solve(g: &GameOperator) -> Result<(PrimalSolution, DualCertificate)> {
    let da = g.dim_a;
    let bar = match g.blocks() {
        Some(blocks) => DualBarrier {
            constraints: blocks.iter().collect(),
            dim_a: da,
            lift: None,
        },
        None => DualBarrier {
            constraints: alloc::vec![&g.g],
            dim_a: da,
            lift: Some(g.dim_b),
        },
    };
    let m: usize = bar.constraints.iter().map(|c| c.rows()).sum();
    let basis = hermitian_basis(da);
    let lifted: Vec<CMatrix> = basis.iter().map(|e| bar.lift(e)).collect();
    let n = basis.len();

    let mut top: f64 = 0.0;
    for c in &bar.constraints {
        top = top.max(hermitian_eigen(c)?.max());
    }
    let mut w = CMatrix::identity(da).scale_real(top + 1.0);
    let mut eigs = bar.slacks(&w)?.ok_or(Error::Invalid("barrier start is infeasible"))?;
    let mut mu = 1.0 / m as f64;
    let mut steps = 0;
    let mut stalled = false;
    'outer: loop {
        for _ in 0..MAX_NEWTON_STEPS {
            let ms: Vec<Vec<CMatrix>> = eigs
                .iter()
                .map(|e| {
                    let inv = e.map_values(|x| 1.0 / x);
                    lifted.iter().map(|l| &inv * l).collect()
                })
                .collect();
            let mut grad = alloc::vec![0.0; n];
            let mut h = alloc::vec![0.0; n * n];
            for k in 0..n {
                let pull: f64 = ms.iter().map(|mc| mc[k].trace().re).sum();
                grad[k] = basis[k].trace().re - mu * pull;
            }
            for mc in &ms {
                for k in 0..n {
                    for l in k..n {
                        let v = mu * mc[k].trace_product(&mc[l]).re;
                        h[k * n + l] += v;
                        if l != k {
                            h[l * n + k] += v;
                        }
                    }
                }
            }
            steps += 1;
            let Some(dir) = cholesky_solve(h, n, grad.iter().map(|x| -x).collect()) else {
                stalled = true;
                break 'outer;
            };
            let decrement: f64 = -grad.iter().zip(&dir).map(|(a, b)| a * b).sum::<f64>();
            if decrement / 2.0 < 1e-12 {
                break;
            }
            let mut delta = CMatrix::zeros(da, da);
            for (e, &d) in basis.iter().zip(&dir) {
                delta += &e.scale_real(d);
            }
            let f0 = DualBarrier::potential(&w, mu, &eigs);
            let mut t = 1.0;
            loop {
                let trial = &w + &delta.scale_real(t);
                if let Some(e) = bar.slacks(&trial)? {
                    if DualBarrier::potential(&trial, mu, &e) <= f0 - 0.25 * t * decrement {
                        w = trial;
                        eigs = e;
                        break;
                    }
                }
                t *= 0.5;
                if t < 1e-12 {
                    stalled = true;
                    break 'outer;
                }
            }
        }
        if mu * m as f64 <= BARRIER_GAP {
            break;
        }
        mu *= 0.1;
    }

    let ns: Vec<CMatrix> = eigs.iter().map(|e| e.map_values(|x| mu / x)).collect();
    let mut lambda = CMatrix::zeros(da, da);
    for nc in &ns {
        lambda += &bar.project(nc)?;
    }
    let (inv, _) = inverse_sqrt_psd(&lambda, psd_cutoff(&lambda))?;
    let left = bar.lift(&inv);
    let ns: Vec<CMatrix> = ns.iter().map(|nc| (&(&left * nc) * &left).hermitian_part()).collect();
    let value: f64 = bar.constraints.iter().zip(&ns).map(|(c, nc)| c.trace_product(nc).re).sum();
    let optimizer = match bar.lift {
        None => Optimizer::Measurement(ns),
        Some(_) => Optimizer::Choi(ns.into_iter().next().unwrap_or_else(|| CMatrix::zeros(0, 0))),
    };
    let slack = eigs.iter().map(|e| e.min()).fold(f64::INFINITY, f64::min);
    Ok((
        PrimalSolution {
            value,
            iterations: steps,
            converged: !stalled,
            optimizer,
        },
        DualCertificate {
            value: w.trace().re,
            w,
            slack,
        },
    ))
}

/// A feasible point of the dual: `W ⊗ I_B − G ≥ −slack_tol`.
#[derive(Clone, Debug)]
pub struct DualCertificate {
    pub w: CMatrix,
    /// Smallest eigenvalue of `W ⊗ I_B − G`.
    pub slack: f64,
    /// `Tr W`.
    pub value: f64,
}

impl DualCertificate {
    pub fn certified(&self) -> bool {
        self.slack >= -SLACK_TOL
    }
}

fn dual_slack(g: &GameOperator, w: &CMatrix) -> Result<f64> {
    match g.blocks() {
        Some(blocks) => {
            let mut min = f64::INFINITY;
            for gb in blocks {
                min = min.min(min_eigenvalue(&(w - gb))?);
            }
            Ok(min)
        }
        None => min_eigenvalue(&(&w.kron(&CMatrix::identity(g.dim_b)) - &g.g)),
    }
}

/// Builds `W` from the primal optimizer (`Σ G_b N_b`, or `Tr_B(G C)`), and
/// inflates it by `(|slack| + 1e-9) I` when it is infeasible.
pub fn p_max_dual(g: &GameOperator, hint: &PrimalSolution) -> Result<DualCertificate> {
    let da = g.dim_a;
    let mut w = match (&hint.optimizer, g.blocks()) {
        (Optimizer::Measurement(ns), Some(blocks)) => {
            let mut acc = CMatrix::zeros(da, da);
            for (gb, n) in blocks.iter().zip(ns) {
                acc += &(gb * n);
            }
            acc.hermitian_part()
        }
        (opt, _) => {
            let c = opt.choi(da, g.dim_b);
            (&g.g * &c).partial_trace(&[da, g.dim_b], &[0])?.hermitian_part()
        }
    };
    let mut slack = dual_slack(g, &w)?;
    if slack < 0.0 {
        w = &w + &CMatrix::identity(da).scale_real(math::abs(slack) + 1e-9);
        slack = dual_slack(g, &w)?;
    }
    let value = w.trace().re;
    if g.blocks().is_some() && value - hint.value > MAX_CERTIFICATE_GAP {
        return Err(Error::CertificateGap(value - hint.value));
    }
    Ok(DualCertificate { w, slack, value })
}

/// Primal value, dual bound, and solver statistics for one game.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    pub slack: f64,
    pub iterations: usize,
    pub converged: bool,
    pub certified: bool,
}

/// Runs the fixed-point iteration and, for small games where it leaves a gap
/// above [`REFINE_GAP`], the barrier method; reports the best primal value
/// and the tightest certificate found.
pub fn solve(g: &GameOperator) -> Result<(SolveReport, PrimalSolution)> {
    let mut primal = p_max_primal(g)?;
    let fixed = p_max_dual(g, &primal);
    let loose = match &fixed {
        Ok(d) => !primal.converged || d.value - primal.value > REFINE_GAP,
        Err(_) => true,
    };
    let dual = if loose && g.dim_a <= BARRIER_MAX_DIM {
        let (bp, bd) = barrier_solve(g)?;
        if bp.value > primal.value || !primal.converged {
            primal = PrimalSolution {
                iterations: primal.iterations + bp.iterations,
                ..bp
            };
        }
        match fixed {
            Ok(d) if d.certified() && d.value <= bd.value => d,
            _ => bd,
        }
    } else {
        fixed?
    };
    let gap = dual.value - primal.value;
    if !primal.converged && gap > 1e-6 {
        return Err(Error::NotConverged {
            value: primal.value,
            gap,
        });
    }
    Ok((
        SolveReport {
            primal: primal.value,
            dual: dual.value,
            gap,
            slack: dual.slack,
            iterations: primal.iterations,
            converged: primal.converged,
            certified: dual.certified(),
        },
        primal,
    ))
}

/// Dense game with `Π_acc = I`: every prover is accepted.
pub fn accept_all(dims: GameDims, rho: CMatrix) -> Result<GameSpec> {
    GameSpec::new(dims, rho, CMatrix::identity(dims.r * dims.b))
}

/// Dense game with `Π_acc = 0`.
pub fn reject_all(dims: GameDims, rho: CMatrix) -> Result<GameSpec> {
    GameSpec::new(dims, rho, CMatrix::zeros(dims.r * dims.b, dims.r * dims.b))
}

/// `l`-fold parallel repetition of the `V[p]` game, compressed after each
/// step. Fails when `dim_A = p^{2l}` exceeds `cap`.
pub fn repeated_vis_game(proto: &VisProtocol, l: usize, cap: usize) -> Result<CqGame> {
    if l == 0 {
        return Err(Error::Invalid("repetition count must be positive"));
    }
    let dim_a = (proto.p() as usize).pow(2 * l as u32);
    if dim_a > cap {
        return Err(Error::DimensionCap { dim: dim_a, cap });
    }
    let single = build_game_from_vis(proto)?.compressed();
    let mut game = single.clone();
    for _ in 1..l {
        game = game.tensor(&single).compressed();
    }
    Ok(game)
}
