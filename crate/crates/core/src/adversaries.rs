//! Channels and their Choi matrices, witness-independent provers (POVMs on the
//! challenged state), verifier instruments, and the zero-knowledge checks.
//!
//! Instrument Choi matrices use the global factor order
//! `(in_1, …, in_n, out_1, …, out_n)` over the qudits the verifier touches.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::field::{check_prime, FieldElement};
use crate::heisenberg::{omega_pow, phase_diag};
use crate::linalg::{hermitian_eigen, inverse_sqrt_psd, CMatrix, StateVector, C64};
use crate::math;
use crate::random::random_matrix;
use crate::vis::{respond, Response, VisProtocol, Witness};
use crate::{Error, Result};

/// Tolerance for PSD and completeness checks on user-supplied operators.
pub const OPERATOR_TOL: f64 = 1e-10;

pub(crate) fn check_psd(m: &CMatrix, tol: f64) -> Result<()> {
    let min = hermitian_eigen(m)?.min();
    if min < -tol {
        return Err(Error::NotPsd(min));
    }
    Ok(())
}

fn check_sums_to_identity<'a>(parts: impl Iterator<Item = &'a CMatrix>, dim: usize) -> Result<()> {
    let mut sum = CMatrix::zeros(dim, dim);
    for m in parts {
        if m.rows() != dim || m.cols() != dim {
            return Err(Error::Dimension("operator has the wrong size"));
        }
        sum += m;
    }
    let dev = sum.max_abs_diff(&CMatrix::identity(dim));
    if dev > OPERATOR_TOL {
        return Err(Error::Incomplete(dev));
    }
    Ok(())
}

/// A quantum channel.
#[derive(Clone, Debug)]
pub enum Channel {
    /// `ρ ↦ Σ K ρ K†`.
    Kraus {
        dim_in: usize,
        dim_out: usize,
        ops: Vec<CMatrix>,
    },
    /// `ρ ↦ Σ q U ρ U†`.
    MixedUnitary(Vec<(f64, CMatrix)>),
    /// Measure with the POVM and prepare `|b⟩⟨b|` for outcome `b`.
    MeasurePrepare(Vec<CMatrix>),
}

impl Channel {
    pub fn kraus(ops: Vec<CMatrix>) -> Result<Self> {
        let first = ops.first().ok_or(Error::Invalid("empty Kraus list"))?;
        let (dim_out, dim_in) = (first.rows(), first.cols());
        if ops.iter().any(|k| k.rows() != dim_out || k.cols() != dim_in) {
            return Err(Error::Dimension("Kraus operators differ in shape"));
        }
        let ch = Channel::Kraus { dim_in, dim_out, ops };
        ch.check_trace_preserving()?;
        Ok(ch)
    }

    pub fn mixed_unitary(terms: Vec<(f64, CMatrix)>) -> Result<Self> {
        let first = terms.first().ok_or(Error::Invalid("empty unitary mixture"))?;
        let d = first.1.rows();
        for (q, u) in &terms {
            if *q < 0.0 {
                return Err(Error::Invalid("negative mixture weight"));
            }
            if u.rows() != d || !u.is_unitary(1e-12) {
                return Err(Error::NotUnitary(u.unitarity_defect()));
            }
        }
        let ch = Channel::MixedUnitary(terms);
        ch.check_trace_preserving()?;
        Ok(ch)
    }

    pub fn measure_prepare(elements: Vec<CMatrix>) -> Result<Self> {
        let d = elements.first().ok_or(Error::Invalid("empty POVM"))?.rows();
        for m in &elements {
            check_psd(m, OPERATOR_TOL)?;
        }
        check_sums_to_identity(elements.iter(), d)?;
        Ok(Channel::MeasurePrepare(elements))
    }

    pub fn identity(dim: usize) -> Self {
        Channel::MixedUnitary(vec![(1.0, CMatrix::identity(dim))])
    }

    /// `ρ ↦ Tr(ρ) I/dim`.
    pub fn depolarizing(dim: usize) -> Self {
        let s = C64::new(1.0 / math::sqrt(dim as f64), 0.0);
        let ops = (0..dim * dim)
            .map(|k| {
                let mut m = CMatrix::zeros(dim, dim);
                m[(k / dim, k % dim)] = s;
                m
            })
            .collect();
        Channel::Kraus {
            dim_in: dim,
            dim_out: dim,
            ops,
        }
    }

    /// Random channel from `count` Gaussian Kraus operators, normalized by
    /// `S^{-1/2}` on the right with `S = Σ K†K`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dim_in: usize, dim_out: usize, count: usize) -> Self {
        let raw: Vec<CMatrix> = (0..count.max(1))
            .map(|_| random_matrix(rng, dim_out, dim_in))
            .collect();
        let mut s = CMatrix::zeros(dim_in, dim_in);
        for k in &raw {
            s += &(&k.adjoint() * k);
        }
        let (inv, _) = inverse_sqrt_psd(&s, 1e-14).expect("Gram matrix is hermitian");
        Channel::Kraus {
            dim_in,
            dim_out,
            ops: raw.iter().map(|k| k * &inv).collect(),
        }
    }

    pub fn dim_in(&self) -> usize {
        match self {
            Channel::Kraus { dim_in, .. } => *dim_in,
            Channel::MixedUnitary(t) => t[0].1.cols(),
            Channel::MeasurePrepare(e) => e[0].rows(),
        }
    }

    pub fn dim_out(&self) -> usize {
        match self {
            Channel::Kraus { dim_out, .. } => *dim_out,
            Channel::MixedUnitary(t) => t[0].1.rows(),
            Channel::MeasurePrepare(e) => e.len(),
        }
    }

    fn check_trace_preserving(&self) -> Result<()> {
        let d = self.dim_in();
        let mut sum = CMatrix::zeros(d, d);
        match self {
            Channel::Kraus { ops, .. } => {
                for k in ops {
                    sum += &(&k.adjoint() * k);
                }
            }
            Channel::MixedUnitary(terms) => {
                for (q, _) in terms {
                    sum += &CMatrix::identity(d).scale_real(*q);
                }
            }
            Channel::MeasurePrepare(e) => {
                for m in e {
                    sum += m;
                }
            }
        }
        let dev = sum.max_abs_diff(&CMatrix::identity(d));
        if dev > OPERATOR_TOL {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(())
    }

    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.rows() != self.dim_in() || rho.cols() != self.dim_in() {
            return Err(Error::Dimension("state does not match the channel input"));
        }
        let conj = |k: &CMatrix| &(k * rho) * &k.adjoint();
        Ok(match self {
            Channel::Kraus { dim_out, ops, .. } => {
                let mut out = CMatrix::zeros(*dim_out, *dim_out);
                for k in ops {
                    out += &conj(k);
                }
                out
            }
            Channel::MixedUnitary(terms) => {
                let d = terms[0].1.rows();
                let mut out = CMatrix::zeros(d, d);
                for (q, u) in terms {
                    out += &conj(u).scale_real(*q);
                }
                out
            }
            Channel::MeasurePrepare(e) => {
                let probs: Vec<C64> = e.iter().map(|m| m.trace_product(rho)).collect();
                CMatrix::from_diag(&probs)
            }
        })
    }
}

/// Choi matrix of the completely positive map with these Kraus operators.
pub fn choi_of_kraus(ops: &[CMatrix]) -> CMatrix {
    let (dim_out, dim_in) = (ops[0].rows(), ops[0].cols());
    let n = dim_in * dim_out;
    let mut c = CMatrix::zeros(n, n);
    for k in ops {
        // Σ_i |i⟩ ⊗ K|i⟩ has entry K[a][i] at (i, a).
        let v = StateVector::from_amplitudes(k.transpose().into_vec());
        c += &CMatrix::projector(&v);
    }
    c
}

/// Input-major Choi matrix of a channel.
pub fn choi_of_channel(ch: &Channel) -> Result<CMatrix> {
    ch.check_trace_preserving()?;
    Ok(match ch {
        Channel::Kraus { ops, .. } => choi_of_kraus(ops),
        Channel::MixedUnitary(terms) => {
            let d = terms[0].1.rows();
            let mut c = CMatrix::zeros(d * d, d * d);
            for (q, u) in terms {
                c += &choi_of_kraus(core::slice::from_ref(u)).scale_real(*q);
            }
            c
        }
        Channel::MeasurePrepare(e) => {
            let nb = e.len();
            let mut c = CMatrix::zeros(e[0].rows() * nb, e[0].rows() * nb);
            for (b, m) in e.iter().enumerate() {
                let mut proj = CMatrix::zeros(nb, nb);
                proj[(b, b)] = C64::new(1.0, 0.0);
                c += &m.transpose().kron(&proj);
            }
            c
        }
    })
}

/// `E(ρ)` from the Choi matrix: `E(ρ)[a][b] = Σ_ij ρ[i][j] C[(i,a),(j,b)]`.
pub fn apply_choi(choi: &CMatrix, dim_in: usize, dim_out: usize, rho: &CMatrix) -> Result<CMatrix> {
    if choi.rows() != dim_in * dim_out || rho.rows() != dim_in || rho.cols() != dim_in {
        return Err(Error::Dimension("Choi matrix does not match the state"));
    }
    let mut out = CMatrix::zeros(dim_out, dim_out);
    for i in 0..dim_in {
        for j in 0..dim_in {
            let r = rho[(i, j)];
            if r == C64::new(0.0, 0.0) {
                continue;
            }
            for a in 0..dim_out {
                for b in 0..dim_out {
                    out[(a, b)] += r * choi[(i * dim_out + a, j * dim_out + b)];
                }
            }
        }
    }
    Ok(out)
}

/// A prover that ignores any witness: a POVM on the challenged two-qudit state
/// with one element per response and one for abort.
#[derive(Clone, Debug)]
pub struct Povm {
    p: u32,
    elements: Vec<CMatrix>,
    abort: CMatrix,
}

impl Povm {
    pub fn new(p: u32, elements: Vec<CMatrix>, abort: CMatrix) -> Result<Self> {
        check_prime(p)?;
        if elements.len() != p as usize {
            return Err(Error::LengthMismatch(elements.len(), p as usize));
        }
        let d = (p * p) as usize;
        for m in elements.iter().chain(core::iter::once(&abort)) {
            if m.rows() != d || m.cols() != d {
                return Err(Error::Dimension("POVM elements act on two qudits"));
            }
            check_psd(m, OPERATOR_TOL)?;
        }
        check_sums_to_identity(elements.iter().chain(core::iter::once(&abort)), d)?;
        Ok(Self { p, elements, abort })
    }

    /// Always answers `c`.
    pub fn constant(p: u32, c: FieldElement) -> Result<Self> {
        check_prime(p)?;
        let d = (p * p) as usize;
        let elements = (0..p)
            .map(|j| {
                if j == c.value() {
                    CMatrix::identity(d)
                } else {
                    CMatrix::zeros(d, d)
                }
            })
            .collect();
        Ok(Self {
            p,
            elements,
            abort: CMatrix::zeros(d, d),
        })
    }

    pub fn always_abort(p: u32) -> Result<Self> {
        check_prime(p)?;
        let d = (p * p) as usize;
        Ok(Self {
            p,
            elements: (0..p).map(|_| CMatrix::zeros(d, d)).collect(),
            abort: CMatrix::identity(d),
        })
    }

    /// `p + 1` Gaussian PSD matrices normalized by `S^{-1/2} (·) S^{-1/2}`.
    /// Without abort the last one is dropped before normalizing.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, p: u32, with_abort: bool) -> Result<Self> {
        check_prime(p)?;
        let d = (p * p) as usize;
        let count = if with_abort { p + 1 } else { p } as usize;
        let raw: Vec<CMatrix> = (0..count)
            .map(|_| {
                let a = random_matrix(rng, d, d);
                &a * &a.adjoint()
            })
            .collect();
        let mut s = CMatrix::zeros(d, d);
        for g in &raw {
            s += g;
        }
        let (inv, _) = inverse_sqrt_psd(&s, 1e-14)?;
        let mut normalized: Vec<CMatrix> = raw
            .iter()
            .map(|g| (&(&inv * g) * &inv).hermitian_part())
            .collect();
        let abort = if with_abort {
            normalized.pop().expect("p + 1 elements")
        } else {
            CMatrix::zeros(d, d)
        };
        Ok(Self {
            p,
            elements: normalized,
            abort,
        })
    }

    /// The measurement an honest prover holding `w` performs, with outcomes
    /// grouped by the response they produce.
    pub fn induced_by(proto: &VisProtocol, w: &Witness) -> Result<Self> {
        let p = proto.p();
        if w.modulus() != p {
            return Err(Error::ModulusMismatch(p, w.modulus()));
        }
        let d = (p * p) as usize;
        let mut elements: Vec<CMatrix> = (0..p).map(|_| CMatrix::zeros(d, d)).collect();
        let mut abort = CMatrix::zeros(d, d);
        for k1 in FieldElement::all(p)? {
            for k2 in FieldElement::all(p)? {
                let v = proto.system().phi(w.w1, k1).kron(proto.system().phi(w.w3, k2));
                let proj = CMatrix::projector(&v);
                match respond(w, k1, k2) {
                    Response::Value(j) => elements[j.value() as usize] += &proj,
                    Response::Abort => abort += &proj,
                }
            }
        }
        Ok(Self { p, elements, abort })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn element(&self, j: FieldElement) -> &CMatrix {
        &self.elements[j.value() as usize]
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn abort(&self) -> &CMatrix {
        &self.abort
    }

    /// Measure-and-report channel onto a `(p+1)`-level register, abort last.
    pub fn as_channel(&self) -> Channel {
        let mut e = self.elements.clone();
        e.push(self.abort.clone());
        Channel::MeasurePrepare(e)
    }

    /// Response distribution on a (possibly unnormalized) state, abort last.
    pub fn distribution(&self, rho: &CMatrix) -> Vec<f64> {
        self.elements
            .iter()
            .chain(core::iter::once(&self.abort))
            .map(|m| m.trace_product(rho).re)
            .collect()
    }
}

/// Acceptance of a witness-independent prover averaged over uniform witness
/// and challenge: `1/p − Tr(M_*)/p³`.
pub fn type2_acceptance(povm: &Povm) -> f64 {
    let p = povm.p as f64;
    1.0 / p - povm.abort.trace().re / (p * p * p)
}

/// The same quantity by enumerating every witness and challenge.
pub fn type2_acceptance_enumerated(proto: &VisProtocol, povm: &Povm) -> Result<f64> {
    let p = proto.p();
    if povm.p != p {
        return Err(Error::ModulusMismatch(p, povm.p));
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for w in Witness::all(p)? {
        let public = proto.public_state(&w)?;
        for j in FieldElement::all(p)? {
            let psi = proto.challenge(&public, j)?;
            total += povm.element(j).expectation(psi.state()).re;
            count += 1;
        }
    }
    Ok(total / count as f64)
}

/// A verifier's single-round instrument on `2·components` qudits, one Choi
/// matrix per outcome label.
#[derive(Clone, Debug)]
pub struct Instrument {
    p: u32,
    components: usize,
    elements: Vec<CMatrix>,
}

impl Instrument {
    pub fn new(p: u32, components: usize, elements: Vec<CMatrix>) -> Result<Self> {
        check_prime(p)?;
        if components == 0 || elements.is_empty() {
            return Err(Error::Invalid("instrument needs qudits and outcomes"));
        }
        let d = (p as usize).pow(2 * components as u32);
        for e in &elements {
            if e.rows() != d * d || e.cols() != d * d {
                return Err(Error::Dimension("Choi matrix has the wrong size"));
            }
            if !e.is_hermitian(1e-10) {
                return Err(Error::NotHermitian(e.hermiticity_defect()));
            }
            check_psd(e, OPERATOR_TOL)?;
        }
        let inst = Self {
            p,
            components,
            elements,
        };
        inst.check_trace_preserving()?;
        Ok(inst)
    }

    /// From Kraus operators grouped by outcome label.
    pub fn from_kraus_groups(p: u32, components: usize, groups: Vec<Vec<CMatrix>>) -> Result<Self> {
        check_prime(p)?;
        let d = (p as usize).pow(2 * components as u32);
        let elements = groups
            .iter()
            .map(|g| {
                if g.is_empty() {
                    CMatrix::zeros(d * d, d * d)
                } else {
                    choi_of_kraus(g)
                }
            })
            .collect();
        let inst = Self {
            p,
            components,
            elements,
        };
        inst.check_trace_preserving()?;
        Ok(inst)
    }

    /// `C_j(ρ) = p^{-1} (Z(j)⊗Z(j)) ρ (Z(j)⊗Z(j))†`, outcome `j`.
    pub fn honest(p: u32) -> Result<Self> {
        check_prime(p)?;
        let s = C64::new(1.0 / math::sqrt(p as f64), 0.0);
        let groups = (0..p)
            .map(|j| vec![zz(p, j).scale(s)])
            .collect();
        Self::from_kraus_groups(p, 1, groups)
    }

    /// Leaves the state alone and always reports outcome 0.
    pub fn identity(p: u32) -> Result<Self> {
        check_prime(p)?;
        Self::from_kraus_groups(p, 1, vec![vec![CMatrix::identity((p * p) as usize)]])
    }

    /// Measures both qudits in the computational basis, forwards the
    /// post-measurement state and reports outcome 0.
    pub fn computational_measure(p: u32) -> Result<Self> {
        check_prime(p)?;
        let d = (p * p) as usize;
        let ops = (0..d)
            .map(|x| CMatrix::projector(&StateVector::basis(d, x)))
            .collect();
        Self::from_kraus_groups(p, 1, vec![ops])
    }

    /// Measures the first qudit in the basis `φ(t, ·)` and reports the
    /// outcome label; leaks `w2` whenever `w1 = t`.
    pub fn eigenbasis_measure(proto: &VisProtocol, t: FieldElement) -> Result<Self> {
        let p = proto.p();
        let id = CMatrix::identity(p as usize);
        let groups = (0..p)
            .map(|k| {
                let proj = CMatrix::projector(proto.system().basis(t).vector(k));
                vec![proj.kron(&id)]
            })
            .collect();
        Self::from_kraus_groups(p, 1, groups)
    }

    /// A random classical-specious instrument: Kraus operators diagonal in
    /// the computational basis with entries `f_k((x1 + x2) mod p)`,
    /// normalized so that `Σ_k |f_k(s)|² = 1`, then dealt to `labels`
    /// outcome labels at random.
    pub fn random_specious<R: Rng + ?Sized>(
        rng: &mut R,
        p: u32,
        kraus: usize,
        labels: usize,
    ) -> Result<Self> {
        check_prime(p)?;
        if kraus == 0 || labels == 0 {
            return Err(Error::Invalid("need at least one Kraus operator and label"));
        }
        let n = p as usize;
        let mut f: Vec<Vec<C64>> = (0..kraus)
            .map(|_| (0..n).map(|_| crate::random::complex_gaussian(rng)).collect())
            .collect();
        for s in 0..n {
            let norm = math::sqrt(f.iter().map(|fk| fk[s].norm_sqr()).sum::<f64>());
            for fk in f.iter_mut() {
                fk[s] /= norm;
            }
        }
        let mut groups: Vec<Vec<CMatrix>> = (0..labels).map(|_| Vec::new()).collect();
        for fk in &f {
            let diag: Vec<C64> = (0..n * n).map(|idx| fk[(idx / n + idx % n) % n]).collect();
            groups[rng.random_range(0..labels)].push(CMatrix::from_diag(&diag));
        }
        Self::from_kraus_groups(p, 1, groups)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn labels(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, label: usize) -> &CMatrix {
        &self.elements[label]
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    /// Dimension of the input (and output) space.
    pub fn dim(&self) -> usize {
        (self.p as usize).pow(2 * self.components as u32)
    }

    pub fn total_choi(&self) -> CMatrix {
        let n = self.dim() * self.dim();
        let mut sum = CMatrix::zeros(n, n);
        for e in &self.elements {
            sum += e;
        }
        sum
    }

    fn check_trace_preserving(&self) -> Result<()> {
        let d = self.dim();
        let reduced = self.total_choi().partial_trace(&[d, d], &[0])?;
        let dev = reduced.max_abs_diff(&CMatrix::identity(d));
        if dev > OPERATOR_TOL {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(())
    }

    /// Runs two instruments side by side; label `(a, b)` becomes
    /// `a · other.labels() + b`.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.p != other.p {
            return Err(Error::ModulusMismatch(self.p, other.p));
        }
        let (da, db) = (self.dim(), other.dim());
        let mut elements = Vec::with_capacity(self.labels() * other.labels());
        for a in &self.elements {
            for b in &other.elements {
                // (in_a, out_a, in_b, out_b) → (in_a, in_b, out_a, out_b)
                elements.push(a.kron(b).permute_factors(&[da, da, db, db], &[0, 2, 1, 3])?);
            }
        }
        Ok(Self {
            p: self.p,
            components: self.components + other.components,
            elements,
        })
    }

    /// Unnormalized post-instrument state for outcome `label`.
    pub fn apply(&self, label: usize, rho: &CMatrix) -> Result<CMatrix> {
        let d = self.dim();
        apply_choi(&self.elements[label], d, d, rho)
    }
}

// Z(j) ⊗ Z(j) on two qudits.
fn zz(p: u32, j: u32) -> CMatrix {
    let z = phase_diag(p, j);
    let n = p as usize;
    CMatrix::from_diag(&(0..n * n).map(|i| z[i / n] * z[i % n]).collect::<Vec<_>>())
}

fn speciousness_vector(p: u32, j: u32) -> StateVector {
    // |Z(j)⟩⟩ on one (input, output) pair.
    let n = p as usize;
    StateVector::from_amplitudes(
        (0..n * n)
            .map(|idx| {
                if idx / n == idx % n {
                    omega_pow(p, (idx / n) as u64 * j as u64)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect(),
    )
}

/// Order taking paired factors `(in_1, out_1, …, in_n, out_n)` to the global
/// `(in_1, …, in_n, out_1, …, out_n)`.
fn paired_to_global(qudits: usize) -> Vec<usize> {
    (0..qudits).map(|q| 2 * q).chain((0..qudits).map(|q| 2 * q + 1)).collect()
}

/// `Π_{j'} = p^{-2}|Z(j')⟩⟩⟨⟨Z(j')| ⊗ |Z(j')⟩⟩⟨⟨Z(j')|`, built on paired factors
/// and returned in the global order.
pub fn speciousness_projector(p: u32, j_prime: FieldElement) -> Result<CMatrix> {
    check_prime(p)?;
    if j_prime.modulus() != p {
        return Err(Error::ModulusMismatch(p, j_prime.modulus()));
    }
    let v = speciousness_vector(p, j_prime.value());
    let u = v.kron(&v);
    let n = p as usize;
    CMatrix::projector(&u)
        .scale_real(1.0 / (p * p) as f64)
        .permute_factors(&[n; 4], &paired_to_global(2))
}

// Product of per-component projectors for a response tuple (no aborts).
fn joint_projector(p: u32, responses: &[u32]) -> Result<CMatrix> {
    let mut u = StateVector::from_amplitudes(vec![C64::new(1.0, 0.0)]);
    for &j in responses {
        let v = speciousness_vector(p, j);
        u = u.kron(&v).kron(&v);
    }
    let qudits = 2 * responses.len();
    let scale = 1.0 / ((p as usize).pow(qudits as u32) as f64);
    CMatrix::projector(&u)
        .scale_real(scale)
        .permute_factors(&vec![p as usize; 2 * qudits], &paired_to_global(qudits))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpeciousReport {
    pub residual: f64,
    pub is_specious: bool,
}

/// Tolerance on the speciousness residual.
pub const SPECIOUS_TOL: f64 = 1e-9;

/// `Tr(p^{-2} Σ_j D_j)(Σ_{j'} Π_{j'})`, which equals 1 exactly for
/// classical-specious verifiers.
pub fn is_classical_specious(inst: &Instrument) -> Result<SpeciousReport> {
    if inst.components != 1 {
        return Err(Error::Dimension("speciousness is tested per component"));
    }
    let p = inst.p;
    let mut proj_sum = CMatrix::zeros(inst.total_choi().rows(), inst.total_choi().rows());
    for j in FieldElement::all(p)? {
        proj_sum += &speciousness_projector(p, j)?;
    }
    let residual = inst.total_choi().trace_product(&proj_sum).re / (p * p) as f64;
    Ok(SpeciousReport {
        residual,
        is_specious: math::abs(residual - 1.0) < SPECIOUS_TOL,
    })
}

/// Joint distribution of the verifier's outcome label and the prover's
/// responses. Responses are encoded per component with abort as `p`, first
/// component most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct TranscriptTable {
    pub labels: usize,
    pub responses: usize,
    pub probs: Vec<f64>,
}

impl TranscriptTable {
    pub fn get(&self, label: usize, response: usize) -> f64 {
        self.probs[label * self.responses + response]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn total_variation(&self, other: &Self) -> f64 {
        assert_eq!(self.probs.len(), other.probs.len(), "table shapes differ");
        0.5 * self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| math::abs(a - b))
            .sum::<f64>()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| math::abs(a - b))
            .fold(0.0, f64::max)
    }
}

fn check_components(proto: &VisProtocol, inst: &Instrument, witnesses: &[Witness]) -> Result<()> {
    if inst.p != proto.p() {
        return Err(Error::ModulusMismatch(proto.p(), inst.p));
    }
    if witnesses.len() != inst.components {
        return Err(Error::LengthMismatch(witnesses.len(), inst.components));
    }
    Ok(())
}

/// Simulates the instrument on the public state of `witnesses` (one per
/// component) followed by the honest prover.
pub fn transcript_distribution(
    proto: &VisProtocol,
    inst: &Instrument,
    witnesses: &[Witness],
) -> Result<TranscriptTable> {
    check_components(proto, inst, witnesses)?;
    let p = proto.p();
    let n = p as usize;
    let comps = witnesses.len();

    let mut psi = StateVector::from_amplitudes(vec![C64::new(1.0, 0.0)]);
    for w in witnesses {
        psi = psi.kron(proto.public_state(w)?.state());
    }
    let rho = CMatrix::projector(&psi);

    // Prover basis vectors and responses for every outcome tuple.
    let outcomes = n.pow(2 * comps as u32);
    let responses = (n + 1).pow(comps as u32);
    let mut prover: Vec<(StateVector, usize)> = Vec::with_capacity(outcomes);
    for idx in 0..outcomes {
        let mut v = StateVector::from_amplitudes(vec![C64::new(1.0, 0.0)]);
        let mut code = 0usize;
        for (c, w) in witnesses.iter().enumerate() {
            let shift = 2 * (comps - 1 - c);
            let k1 = (idx / n.pow(shift as u32 + 1)) % n;
            let k2 = (idx / n.pow(shift as u32)) % n;
            let k1 = FieldElement::reduce(k1 as u64, p);
            let k2 = FieldElement::reduce(k2 as u64, p);
            v = v
                .kron(proto.system().phi(w.w1, k1))
                .kron(proto.system().phi(w.w3, k2));
            code = code * (n + 1) + respond(w, k1, k2).index(p);
        }
        prover.push((v, code));
    }

    let mut probs = vec![0.0; inst.labels() * responses];
    for label in 0..inst.labels() {
        let sigma = inst.apply(label, &rho)?;
        for (v, code) in &prover {
            probs[label * responses + code] += sigma.expectation(v).re;
        }
    }
    let table = TranscriptTable {
        labels: inst.labels(),
        responses,
        probs,
    };
    let total = table.total();
    if math::abs(total - 1.0) > 1e-9 {
        return Err(Error::BornWeights(total));
    }
    Ok(table)
}

/// `P(j, j') = Tr p^{-2} D_j Π_{j'}` (per component), with the abort column
/// holding each label's remaining mass under the maximally mixed input.
pub fn closed_form_transcript(inst: &Instrument) -> Result<TranscriptTable> {
    let p = inst.p;
    let n = p as usize;
    let comps = inst.components;
    let responses = (n + 1).pow(comps as u32);
    let norm = 1.0 / (inst.dim() as f64);
    let projectors: Vec<(usize, CMatrix)> = (0..n.pow(comps as u32))
        .map(|idx| {
            let tuple: Vec<u32> = (0..comps)
                .map(|c| ((idx / n.pow((comps - 1 - c) as u32)) % n) as u32)
                .collect();
            let code = tuple.iter().fold(0usize, |acc, &j| acc * (n + 1) + j as usize);
            joint_projector(p, &tuple).map(|m| (code, m))
        })
        .collect::<Result<_>>()?;
    let all_abort = (0..comps).fold(0usize, |acc, _| acc * (n + 1) + n);

    let mut probs = vec![0.0; inst.labels() * responses];
    for (label, d) in inst.elements.iter().enumerate() {
        let marginal = d.trace().re * norm;
        let mut covered = 0.0;
        for (code, proj) in &projectors {
            let v = d.trace_product(proj).re * norm;
            probs[label * responses + code] = v;
            covered += v;
        }
        probs[label * responses + all_abort] += marginal - covered;
    }
    Ok(TranscriptTable {
        labels: inst.labels(),
        responses,
        probs,
    })
}

/// Witness-independence summary over a set of witness lists.
#[derive(Clone, Debug)]
pub struct ZkReport {
    /// Largest pairwise total-variation distance between transcript tables.
    pub max_tv: f64,
    /// Largest entrywise gap between simulation and the closed form.
    pub closed_form_gap: f64,
    pub specious: Option<SpeciousReport>,
}

impl ZkReport {
    pub fn witness_independent(&self) -> bool {
        self.max_tv < 1e-9
    }
}

/// Every list of `l` witnesses, first component most significant.
pub fn witness_lists(p: u32, l: usize) -> Result<Vec<Vec<Witness>>> {
    let singles: Vec<Witness> = Witness::all(p)?.collect();
    let mut lists: Vec<Vec<Witness>> = vec![Vec::new()];
    for _ in 0..l {
        let mut next = Vec::with_capacity(lists.len() * singles.len());
        for prefix in &lists {
            for w in &singles {
                let mut v = prefix.clone();
                v.push(*w);
                next.push(v);
            }
        }
        lists = next;
    }
    Ok(lists)
}

pub fn zk_report(proto: &VisProtocol, inst: &Instrument, lists: &[Vec<Witness>]) -> Result<ZkReport> {
    let tables = lists
        .iter()
        .map(|ws| transcript_distribution(proto, inst, ws))
        .collect::<Result<Vec<_>>>()?;
    let closed = closed_form_transcript(inst)?;
    let mut max_tv: f64 = 0.0;
    let mut gap: f64 = 0.0;
    for (i, a) in tables.iter().enumerate() {
        gap = gap.max(a.max_abs_diff(&closed));
        for b in &tables[i + 1..] {
            max_tv = max_tv.max(a.total_variation(b));
        }
    }
    let specious = if inst.components == 1 {
        Some(is_classical_specious(inst)?)
    } else {
        None
    };
    Ok(ZkReport {
        max_tv,
        closed_form_gap: gap,
        specious,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::min_eigenvalue;
    use crate::random::{random_density, random_matrix, seeded};

    fn fe(v: u64, p: u32) -> FieldElement {
        FieldElement::new(v, p).unwrap()
    }

    #[test]
    fn choi_identity_and_defining_identity() {
        let c = choi_of_channel(&Channel::identity(2)).unwrap();
        let omega = crate::linalg::vectorize(&CMatrix::identity(2)).unwrap();
        assert!(c.max_abs_diff(&CMatrix::projector(&omega)) < 1e-15);

        let mut rng = seeded(8);
        let channels = [
            Channel::depolarizing(3),
            Channel::random(&mut rng, 3, 2, 3),
            Channel::mixed_unitary(vec![
                (0.3, crate::random::random_unitary(&mut rng, 3)),
                (0.7, crate::random::random_unitary(&mut rng, 3)),
            ])
            .unwrap(),
        ];
        for ch in &channels {
            let c = choi_of_channel(ch).unwrap();
            for _ in 0..5 {
                let a = random_matrix(&mut rng, 3, 3);
                let b = random_matrix(&mut rng, ch.dim_out(), ch.dim_out());
                let lhs = c.trace_product(&a.transpose().kron(&b));
                let rhs = ch.apply(&a).unwrap().trace_product(&b);
                assert!((lhs - rhs).norm() < 1e-10);
                let via = apply_choi(&c, 3, ch.dim_out(), &a).unwrap();
                assert!(via.max_abs_diff(&ch.apply(&a).unwrap()) < 1e-10);
            }
        }
        let dep = choi_of_channel(&Channel::depolarizing(3)).unwrap();
        assert!(dep.max_abs_diff(&CMatrix::identity(9).scale_real(1.0 / 3.0)) < 1e-12);
    }

    #[test]
    fn choi_of_phase_is_rank_one() {
        let z = crate::heisenberg::phase(2, 1).unwrap();
        let c = choi_of_channel(&Channel::mixed_unitary(vec![(1.0, z)]).unwrap()).unwrap();
        assert!((c.trace().re - 2.0).abs() < 1e-12);
        let eig = hermitian_eigen(&c).unwrap();
        assert!((eig.max() - 2.0).abs() < 1e-12);
        assert!(eig.values[..3].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn channel_errors() {
        let bad = vec![CMatrix::identity(2).scale_real(2.0)];
        assert!(matches!(Channel::kraus(bad), Err(Error::NotTracePreserving(_))));
        let not_unitary = vec![(1.0, CMatrix::from_real_diag(&[1.0, 0.5]))];
        assert!(Channel::mixed_unitary(not_unitary).is_err());
        let ch = Channel::Kraus {
            dim_in: 2,
            dim_out: 2,
            ops: vec![CMatrix::zeros(2, 2)],
        };
        assert!(choi_of_channel(&ch).is_err());
    }

    #[test]
    fn honest_instrument_shape() {
        for p in [2u32, 3] {
            let inst = Instrument::honest(p).unwrap();
            let d = (p * p) as usize;
            let reduced = inst.total_choi().partial_trace(&[d, d], &[0]).unwrap();
            assert!(reduced.max_abs_diff(&CMatrix::identity(d)) < 1e-12);
            for e in inst.elements() {
                assert!((e.trace().re - p as f64).abs() < 1e-12);
                let eig = hermitian_eigen(e).unwrap();
                assert!(eig.values[..eig.values.len() - 1].iter().all(|v| v.abs() < 1e-10));
            }
        }
    }

    #[test]
    fn speciousness_projectors() {
        for p in [2u32, 3] {
            let mut sum = CMatrix::zeros((p as usize).pow(4), (p as usize).pow(4));
            let projs: Vec<CMatrix> = FieldElement::all(p)
                .unwrap()
                .map(|j| speciousness_projector(p, j).unwrap())
                .collect();
            for (a, pa) in projs.iter().enumerate() {
                assert!((pa * pa).max_abs_diff(pa) < 1e-12);
                assert!(pa.is_hermitian(1e-12));
                assert!((pa.trace().re - 1.0).abs() < 1e-12);
                for pb in &projs[a + 1..] {
                    assert!((pa * pb).max_abs() < 1e-12);
                }
                sum += pa;
            }
            let eig = hermitian_eigen(&sum).unwrap();
            let rank = eig.values.iter().filter(|v| **v > 0.5).count();
            assert_eq!(rank, p as usize);
        }
    }

    #[test]
    fn speciousness_examples() {
        for p in [2u32, 3] {
            let proto = VisProtocol::new(p).unwrap();
            let r = is_classical_specious(&Instrument::honest(p).unwrap()).unwrap();
            assert!((r.residual - 1.0).abs() < 1e-12 && r.is_specious);
            let r = is_classical_specious(&Instrument::identity(p).unwrap()).unwrap();
            assert!((r.residual - 1.0).abs() < 1e-12 && r.is_specious);
            let r = is_classical_specious(&Instrument::computational_measure(p).unwrap()).unwrap();
            assert!((r.residual - 1.0 / p as f64).abs() < 1e-12 && !r.is_specious);
            let r = is_classical_specious(&Instrument::eigenbasis_measure(&proto, fe(0, p)).unwrap()).unwrap();
            assert!(!r.is_specious);
        }
        let mut rng = seeded(3);
        for _ in 0..5 {
            let inst = Instrument::random_specious(&mut rng, 3, 4, 3).unwrap();
            assert!(is_classical_specious(&inst).unwrap().is_specious);
        }
    }

    #[test]
    fn transcript_examples() {
        let proto = VisProtocol::new(2).unwrap();
        let honest = Instrument::honest(2).unwrap();
        let ident = Instrument::identity(2).unwrap();
        for w in Witness::all(2).unwrap() {
            let t = transcript_distribution(&proto, &honest, &[w]).unwrap();
            for j in 0..2 {
                for r in 0..3 {
                    let expected = if j == r { 0.5 } else { 0.0 };
                    assert!((t.get(j, r) - expected).abs() < 1e-12);
                }
            }
            let t = transcript_distribution(&proto, &ident, &[w]).unwrap();
            assert!((t.get(0, 0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn transcript_closed_form_for_specious() {
        let proto = VisProtocol::new(2).unwrap();
        let mut rng = seeded(12);
        let lists = witness_lists(2, 1).unwrap();
        for _ in 0..4 {
            let inst = Instrument::random_specious(&mut rng, 2, 3, 2).unwrap();
            let r = zk_report(&proto, &inst, &lists).unwrap();
            assert!(r.max_tv < 1e-9);
            assert!(r.closed_form_gap < 1e-9);
        }
    }

    #[test]
    fn eigenbasis_measurement_leaks() {
        let proto = VisProtocol::new(2).unwrap();
        let inst = Instrument::eigenbasis_measure(&proto, fe(0, 2)).unwrap();
        let r = zk_report(&proto, &inst, &witness_lists(2, 1).unwrap()).unwrap();
        assert!(r.max_tv > 0.99);
        let dephase = Instrument::computational_measure(2).unwrap();
        let r = zk_report(&proto, &dephase, &witness_lists(2, 1).unwrap()).unwrap();
        assert!(r.max_tv < 1e-9);
    }

    #[test]
    fn instrument_validation() {
        let bad = vec![CMatrix::identity(16)];
        assert!(Instrument::new(2, 1, bad).is_err());
        let inst = Instrument::honest(2).unwrap();
        assert!(Instrument::new(2, 1, inst.elements().to_vec()).is_ok());
        assert!(Instrument::new(4, 1, inst.elements().to_vec()).is_err());
    }

    #[test]
    fn povm_type2() {
        for p in [2u32, 3] {
            let proto = VisProtocol::new(p).unwrap();
            let c = Povm::constant(p, fe(0, p)).unwrap();
            assert!((type2_acceptance(&c) - 1.0 / p as f64).abs() < 1e-15);
            assert!((type2_acceptance_enumerated(&proto, &c).unwrap() - 1.0 / p as f64).abs() < 1e-12);
            let a = Povm::always_abort(p).unwrap();
            assert_eq!(type2_acceptance(&a), 0.0);
            assert!(type2_acceptance_enumerated(&proto, &a).unwrap().abs() < 1e-15);

            let mut rng = seeded(p as u64);
            for with_abort in [false, true] {
                let m = Povm::random(&mut rng, p, with_abort).unwrap();
                let checked = Povm::new(p, m.elements().to_vec(), m.abort().clone()).unwrap();
                let closed = type2_acceptance(&checked);
                let enumerated = type2_acceptance_enumerated(&proto, &checked).unwrap();
                assert!((closed - enumerated).abs() < 1e-10);
            }
            for w in Witness::all(p).unwrap().step_by(5) {
                let m = Povm::induced_by(&proto, &w).unwrap();
                assert!(Povm::new(p, m.elements().to_vec(), m.abort().clone()).is_ok());
            }
        }
    }

    #[test]
    fn povm_validation() {
        let d = 4;
        let half = CMatrix::identity(d).scale_real(0.5);
        let ok = Povm::new(2, vec![half.clone(), half.clone()], CMatrix::zeros(d, d));
        assert!(ok.is_ok());
        let short = Povm::new(2, vec![half.clone()], CMatrix::zeros(d, d));
        assert!(matches!(short, Err(Error::LengthMismatch(1, 2))));
        let incomplete = Povm::new(2, vec![half.clone(), CMatrix::zeros(d, d)], CMatrix::zeros(d, d));
        assert!(matches!(incomplete, Err(Error::Incomplete(_))));
        let neg = CMatrix::from_real_diag(&[1.5, 1.0, 1.0, 1.0]);
        let neg2 = CMatrix::from_real_diag(&[-0.5, 0.0, 0.0, 0.0]);
        assert!(matches!(
            Povm::new(2, vec![neg, neg2], CMatrix::zeros(d, d)),
            Err(Error::NotPsd(_))
        ));
    }

    #[test]
    fn tensor_instrument_is_valid() {
        let h = Instrument::honest(2).unwrap();
        let t = h.tensor(&h).unwrap();
        assert_eq!(t.labels(), 4);
        assert_eq!(t.components(), 2);
        let reduced = t.total_choi().partial_trace(&[16, 16], &[0]).unwrap();
        assert!(reduced.max_abs_diff(&CMatrix::identity(16)) < 1e-12);
        for e in t.elements() {
            assert!(min_eigenvalue(e).unwrap() > -1e-10);
        }
        let mut rng = seeded(1);
        let rho = random_density(&mut rng, 16);
        // Labels (1, 0): Z⊗Z on the first pair only.
        let out = t.apply(2, &rho).unwrap();
        let z = zz(2, 1).kron(&CMatrix::identity(4));
        let expected = (&(&z * &rho) * &z.adjoint()).scale_real(0.25);
        assert!(out.max_abs_diff(&expected) < 1e-12);
    }
}
