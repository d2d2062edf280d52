//! Arithmetic in the prime field `F_p`.

use core::fmt;

use crate::{Error, Result};

/// Deterministic trial-division primality test; moduli here are tiny.
pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn check_prime(p: u32) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// An element of `F_p`. The modulus travels with the value so mixing fields is
/// caught at the operation instead of silently wrapping.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    value: u32,
    modulus: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Inv,
    Neg,
}

impl FieldElement {
    /// Reduces `value` modulo the prime `modulus`.
    pub fn new(value: u64, modulus: u32) -> Result<Self> {
        check_prime(modulus)?;
        Ok(Self::reduce(value, modulus))
    }

    /// Reduces a signed integer, so `from_i64(-1, 5)` is `4`.
    pub fn from_i64(value: i64, modulus: u32) -> Result<Self> {
        check_prime(modulus)?;
        let m = modulus as i64;
        Ok(Self {
            value: value.rem_euclid(m) as u32,
            modulus,
        })
    }

    // Caller guarantees `modulus` is prime.
    pub(crate) fn reduce(value: u64, modulus: u32) -> Self {
        Self {
            value: (value % modulus as u64) as u32,
            modulus,
        }
    }

    pub fn zero(modulus: u32) -> Result<Self> {
        Self::new(0, modulus)
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn modulus(self) -> u32 {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    /// All elements `0, 1, …, p-1` in order.
    pub fn all(modulus: u32) -> Result<impl Iterator<Item = FieldElement> + Clone> {
        check_prime(modulus)?;
        Ok((0..modulus).map(move |v| FieldElement { value: v, modulus }))
    }

    fn same_field(self, other: Self) -> Result<u32> {
        if self.modulus == other.modulus {
            Ok(self.modulus)
        } else {
            Err(Error::ModulusMismatch(self.modulus, other.modulus))
        }
    }

    pub fn try_add(self, other: Self) -> Result<Self> {
        let m = self.same_field(other)?;
        Ok(Self::reduce(self.value as u64 + other.value as u64, m))
    }

    pub fn try_sub(self, other: Self) -> Result<Self> {
        let m = self.same_field(other)?;
        Ok(Self::reduce(
            self.value as u64 + m as u64 - other.value as u64,
            m,
        ))
    }

    pub fn try_mul(self, other: Self) -> Result<Self> {
        let m = self.same_field(other)?;
        Ok(Self::reduce(self.value as u64 * other.value as u64, m))
    }

    pub fn neg(self) -> Self {
        Self::reduce((self.modulus - self.value) as u64, self.modulus)
    }

    /// Multiplicative inverse via Fermat: `a^(p-2)`.
    pub fn inv(self) -> Result<Self> {
        if self.value == 0 {
            return Err(Error::ZeroInverse);
        }
        Ok(self.pow(self.modulus as u64 - 2))
    }

    pub fn pow(self, mut e: u64) -> Self {
        let m = self.modulus as u64;
        let mut base = self.value as u64 % m;
        let mut acc = 1 % m;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % m;
            }
            base = base * base % m;
            e >>= 1;
        }
        Self::reduce(acc, self.modulus)
    }

    /// Applies `op`. Unary operations ignore `b` except for the modulus check.
    pub fn apply(op: FieldOp, a: Self, b: Self) -> Result<Self> {
        match op {
            FieldOp::Add => a.try_add(b),
            FieldOp::Sub => a.try_sub(b),
            FieldOp::Mul => a.try_mul(b),
            FieldOp::Inv => {
                a.same_field(b)?;
                a.inv()
            }
            FieldOp::Neg => {
                a.same_field(b)?;
                Ok(a.neg())
            }
        }
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(mod {})", self.value, self.modulus)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

// Operator forms panic on modulus mismatch; use the `try_*` methods when the
// operands come from different sources.
impl core::ops::Add for FieldElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.try_add(rhs).expect("field modulus mismatch")
    }
}

impl core::ops::Sub for FieldElement {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.try_sub(rhs).expect("field modulus mismatch")
    }
}

impl core::ops::Mul for FieldElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.try_mul(rhs).expect("field modulus mismatch")
    }
}

impl core::ops::Neg for FieldElement {
    type Output = Self;
    fn neg(self) -> Self {
        FieldElement::neg(self)
    }
}
