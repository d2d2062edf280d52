//! Weyl operators `W(s,t) = X(s) Z(t)` over `F_p` and the eigenbases of the
//! commuting families `{W(s, s·t)}_s`.
//!
//! `X(s)|x⟩ = |x+s⟩`, `Z(t)|x⟩ = ω^{xt}|x⟩` with `ω = e^{2πi/p}`. The basis
//! `φ(t, ·)` diagonalizes every `W(s, s·t)`, and `Z(j)` shifts its labels:
//! `Z(j)|φ(t,t')⟩ ∝ |φ(t, t'-j)⟩`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::field::{check_prime, FieldElement};
use crate::linalg::{eig_unitary, CMatrix, StateVector, C64, EIG_TOL};
use crate::math;
use crate::{Error, Result};

/// `ω^k` for `ω = e^{2πi/p}`.
pub fn omega_pow(p: u32, k: u64) -> C64 {
    let r = (k % p as u64) as f64;
    math::cis(2.0 * PI * r / p as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WeylLabel {
    pub s: FieldElement,
    pub t: FieldElement,
}

impl WeylLabel {
    pub fn new(s: FieldElement, t: FieldElement) -> Result<Self> {
        if s.modulus() != t.modulus() {
            return Err(Error::ModulusMismatch(s.modulus(), t.modulus()));
        }
        Ok(Self { s, t })
    }

    pub fn from_values(p: u32, s: u64, t: u64) -> Result<Self> {
        Ok(Self {
            s: FieldElement::new(s, p)?,
            t: FieldElement::new(t, p)?,
        })
    }

    pub fn modulus(&self) -> u32 {
        self.s.modulus()
    }
}

// Caller has validated `p`; `s`, `t` are reduced.
pub(crate) fn weyl_raw(p: u32, s: u32, t: u32) -> CMatrix {
    let n = p as usize;
    let mut m = CMatrix::zeros(n, n);
    for x in 0..p {
        let row = ((x + s) % p) as usize;
        m[(row, x as usize)] = omega_pow(p, x as u64 * t as u64);
    }
    m
}

// Diagonal of `Z(t)`.
pub(crate) fn phase_diag(p: u32, t: u32) -> Vec<C64> {
    (0..p).map(|x| omega_pow(p, x as u64 * t as u64)).collect()
}

/// The shift `X(s)`.
pub fn shift(p: u32, s: u64) -> Result<CMatrix> {
    check_prime(p)?;
    Ok(weyl_raw(p, (s % p as u64) as u32, 0))
}

/// The phase operator `Z(t)`.
pub fn phase(p: u32, t: u64) -> Result<CMatrix> {
    check_prime(p)?;
    Ok(weyl_raw(p, 0, (t % p as u64) as u32))
}

pub fn weyl(p: u32, label: WeylLabel) -> Result<CMatrix> {
    check_prime(p)?;
    if label.modulus() != p {
        return Err(Error::ModulusMismatch(p, label.modulus()));
    }
    Ok(weyl_raw(p, label.s.value(), label.t.value()))
}

/// `W(a) W(b) = ω^{exponent} W(b) W(a)`, with the measured residual.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Commutation {
    pub exponent: FieldElement,
    pub residual: f64,
}

/// For `a = (s,t)`, `b = (s',t')` the exponent is `s't − t's`.
pub fn check_commutation(p: u32, a: WeylLabel, b: WeylLabel) -> Result<Commutation> {
    let wa = weyl(p, a)?;
    let wb = weyl(p, b)?;
    let exponent = b.s * a.t - b.t * a.s;
    let lhs = &wa * &wb;
    let rhs = (&wb * &wa).scale(omega_pow(p, exponent.value() as u64));
    Ok(Commutation {
        exponent,
        residual: lhs.max_abs_diff(&rhs),
    })
}

/// The ordered basis `{|φ(t,t')⟩}_{t' ∈ F_p}`.
#[derive(Clone, Debug)]
pub struct EigenBasis {
    p: u32,
    t: FieldElement,
    calibration: C64,
    vectors: Vec<StateVector>,
}

impl EigenBasis {
    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn t(&self) -> FieldElement {
        self.t
    }

    /// Global phase `c` with `W(1,t)|φ(t,t')⟩ = c·ω^{t'}|φ(t,t')⟩`.
    pub fn calibration(&self) -> C64 {
        self.calibration
    }

    pub fn vector(&self, t_prime: u32) -> &StateVector {
        &self.vectors[t_prime as usize]
    }

    pub fn vectors(&self) -> &[StateVector] {
        &self.vectors
    }
}

/// Diagonalizes `W(1,t)` and labels its eigenvectors by `t'`.
///
/// The spectrum of `W(1,t)` is `c·{ω^{t'}}` for a unit `c`; among the `p`
/// admissible choices of `c` the one with the smallest phase angle in
/// `[0, 2π)` is used.
pub fn eigenbasis(p: u32, t: FieldElement) -> Result<EigenBasis> {
    check_prime(p)?;
    if t.modulus() != p {
        return Err(Error::ModulusMismatch(p, t.modulus()));
    }
    let pairs = eig_unitary(&weyl_raw(p, 1, t.value()))?;
    if pairs.len() != p as usize {
        return Err(Error::Labeling);
    }
    let lambda0 = pairs[0].value;
    let calibration = (0..p as u64)
        .map(|m| lambda0 * omega_pow(p, p as u64 - m))
        .min_by(|a, b| math::angle_0_2pi(*a).total_cmp(&math::angle_0_2pi(*b)))
        .ok_or(Error::Labeling)?;

    let mut slots: Vec<Option<StateVector>> = (0..p).map(|_| None).collect();
    for pair in &pairs {
        let ratio = pair.value / calibration;
        let label = (0..p)
            .find(|&k| (ratio - omega_pow(p, k as u64)).norm() < EIG_TOL * 10.0)
            .ok_or(Error::Labeling)?;
        let slot = &mut slots[label as usize];
        if slot.is_some() {
            return Err(Error::Labeling);
        }
        *slot = Some(pair.vector.clone());
    }
    let vectors = slots
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or(Error::Labeling)?;
    Ok(EigenBasis {
        p,
        t,
        calibration,
        vectors,
    })
}

/// All `p` eigenbases for one modulus, computed once.
#[derive(Clone, Debug)]
pub struct HeisenbergSystem {
    p: u32,
    bases: Vec<EigenBasis>,
}

impl HeisenbergSystem {
    pub fn new(p: u32) -> Result<Self> {
        let bases = FieldElement::all(p)?
            .map(|t| eigenbasis(p, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { p, bases })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn basis(&self, t: FieldElement) -> &EigenBasis {
        debug_assert_eq!(t.modulus(), self.p);
        &self.bases[t.value() as usize]
    }

    /// `|φ(t,t')⟩`.
    pub fn phi(&self, t: FieldElement, t_prime: FieldElement) -> &StateVector {
        self.basis(t).vector(t_prime.value())
    }

    /// `Z(j)|v⟩` for a single qudit.
    pub fn apply_phase(&self, j: FieldElement, v: &StateVector) -> StateVector {
        let diag = phase_diag(self.p, j.value());
        StateVector::from_amplitudes(
            v.amplitudes()
                .iter()
                .zip(&diag)
                .map(|(a, d)| a * d)
                .collect(),
        )
    }
}

/// How `W(s, s·t − j')` acts on the basis `φ(t, ·)`: label `t'` is sent to
/// `image[t']` with phase `phases[t']`.
#[derive(Clone, Debug)]
pub struct ShiftReport {
    pub p: u32,
    pub t: FieldElement,
    pub image: Vec<u32>,
    pub phases: Vec<C64>,
    /// Largest `| |overlap| − 1 |` observed.
    pub max_deviation: f64,
}

impl ShiftReport {
    pub fn is_permutation(&self) -> bool {
        let mut seen = alloc::vec![false; self.p as usize];
        for &k in &self.image {
            if seen[k as usize] {
                return false;
            }
            seen[k as usize] = true;
        }
        true
    }
}

/// `Z(j)|φ(t,t')⟩ = e^{iθ}|φ(t, t'−j)⟩` for every `t'`.
pub fn shift_action(p: u32, t: FieldElement, j: FieldElement) -> Result<ShiftReport> {
    let zero = FieldElement::zero(p)?;
    weyl_action(p, t, zero, -j)
}

/// General form: `W(s, s·t − j')|φ(t,t')⟩ = c|φ(t, t'+j')⟩` with `|c| = 1`.
pub fn weyl_action(
    p: u32,
    t: FieldElement,
    s: FieldElement,
    j_prime: FieldElement,
) -> Result<ShiftReport> {
    check_prime(p)?;
    for m in [t.modulus(), s.modulus(), j_prime.modulus()] {
        if m != p {
            return Err(Error::ModulusMismatch(p, m));
        }
    }
    let basis = eigenbasis(p, t)?;
    let op = weyl_raw(p, s.value(), (s * t - j_prime).value());
    let mut image = Vec::with_capacity(p as usize);
    let mut phases = Vec::with_capacity(p as usize);
    let mut max_deviation: f64 = 0.0;
    for tp in FieldElement::all(p)? {
        let target = tp + j_prime;
        let moved = op.apply(basis.vector(tp.value()));
        let overlap = basis.vector(target.value()).inner(&moved);
        let dev = math::abs(math::modulus(overlap) - 1.0);
        if dev > EIG_TOL {
            return Err(Error::ShiftOverlap(math::modulus(overlap)));
        }
        max_deviation = max_deviation.max(dev);
        image.push(target.value());
        phases.push(overlap);
    }
    Ok(ShiftReport {
        p,
        t,
        image,
        phases,
        max_deviation,
    })
}
