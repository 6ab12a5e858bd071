//! Exact arithmetic over GF(2^r) and the integer ring Z_M.
//!
//! Every alphabet is small (at most 256 elements), so all operations are
//! served from precomputed tables. Field multiplication tables are built from
//! log/antilog tables of a primitive polynomial.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported alphabet.
pub const MAX_ALPHABET: usize = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("alphabet mismatch: {0} vs {1}")]
    Mismatch(AlphabetSpec, AlphabetSpec),
    #[error("{value} is not a unit of {alphabet}")]
    NotUnit { value: u8, alphabet: AlphabetSpec },
    #[error("value {value} out of range for {alphabet}")]
    OutOfRange { value: usize, alphabet: AlphabetSpec },
    #[error("invalid alphabet: {0}")]
    Invalid(String),
}

/// The algebraic home of code and network-coding symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AlphabetSpec {
    /// GF(2^bits) defined by a primitive polynomial given as a bitmask
    /// (bit i is the coefficient of x^i).
    Field { bits: u8, poly: u16 },
    /// Z_modulus.
    Ring { modulus: u16 },
}

/// Default primitive polynomials indexed by degree.
const DEFAULT_POLYS: [u16; 9] = [0, 0b11, 0b111, 0b1011, 0b1_0011, 0b10_0101, 0b100_0011, 0b1000_1001, 0x11d];

impl AlphabetSpec {
    /// GF(2^bits) with the default primitive polynomial (x^2+x+1 for GF(4),
    /// x^3+x+1 for GF(8), ...).
    pub fn gf(bits: u8) -> Result<Self, AlgebraError> {
        if !(1..=8).contains(&bits) {
            return Err(AlgebraError::Invalid(format!("GF(2^{bits}) unsupported, need 1 <= r <= 8")));
        }
        Self::field(bits, DEFAULT_POLYS[bits as usize])
    }

    /// GF(2^bits) with an explicit polynomial. The polynomial must have
    /// degree `bits` and be primitive.
    pub fn field(bits: u8, poly: u16) -> Result<Self, AlgebraError> {
        if !(1..=8).contains(&bits) {
            return Err(AlgebraError::Invalid(format!("GF(2^{bits}) unsupported, need 1 <= r <= 8")));
        }
        if poly_degree(poly as u32) != Some(bits as u32) {
            return Err(AlgebraError::Invalid(format!("polynomial {poly:#b} does not have degree {bits}")));
        }
        if !is_irreducible(poly as u32) {
            return Err(AlgebraError::Invalid(format!("polynomial {poly:#b} is reducible over GF(2)")));
        }
        if multiplicative_order_of_x(poly as u32, bits) != (1usize << bits) - 1 {
            return Err(AlgebraError::Invalid(format!("polynomial {poly:#b} is not primitive")));
        }
        Ok(AlphabetSpec::Field { bits, poly })
    }

    pub fn ring(modulus: usize) -> Result<Self, AlgebraError> {
        if !(2..=MAX_ALPHABET).contains(&modulus) {
            return Err(AlgebraError::Invalid(format!("Z_{modulus} unsupported, need 2 <= M <= 256")));
        }
        Ok(AlphabetSpec::Ring { modulus: modulus as u16 })
    }

    pub fn binary() -> Self {
        AlphabetSpec::Field { bits: 1, poly: 0b11 }
    }

    pub fn size(&self) -> usize {
        match *self {
            AlphabetSpec::Field { bits, .. } => 1 << bits,
            AlphabetSpec::Ring { modulus } => modulus as usize,
        }
    }

    pub fn is_field(&self) -> bool {
        matches!(self, AlphabetSpec::Field { .. })
    }

    pub fn is_binary(&self) -> bool {
        self.size() == 2
    }

    /// Parses `gf2`, `gf8`, `z4`, ... as used on the command line.
    pub fn parse(text: &str) -> Result<Self, AlgebraError> {
        let lower = text.trim().to_ascii_lowercase();
        let bad = || AlgebraError::Invalid(format!("cannot parse alphabet '{text}'"));
        if let Some(rest) = lower.strip_prefix("gf") {
            let q: usize = rest.parse().map_err(|_| bad())?;
            if !q.is_power_of_two() || q < 2 {
                return Err(bad());
            }
            Self::gf(q.trailing_zeros() as u8)
        } else if let Some(rest) = lower.strip_prefix('z') {
            let m: usize = rest.parse().map_err(|_| bad())?;
            Self::ring(m)
        } else {
            Err(bad())
        }
    }
}

impl fmt::Display for AlphabetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphabetSpec::Field { .. } => write!(f, "GF({})", self.size()),
            AlphabetSpec::Ring { modulus } => write!(f, "Z_{modulus}"),
        }
    }
}

fn poly_degree(p: u32) -> Option<u32> {
    (p != 0).then(|| 31 - p.leading_zeros())
}

/// Remainder of `a` modulo `b` over GF(2)[x].
fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = poly_degree(b).expect("nonzero divisor");
    while let Some(da) = poly_degree(a) {
        if da < db {
            break;
        }
        a ^= b << (da - db);
    }
    a
}

fn is_irreducible(p: u32) -> bool {
    let deg = match poly_degree(p) {
        Some(d) if d >= 1 => d,
        _ => return false,
    };
    // Any factorization has a factor of degree <= deg/2.
    for d in 1..=deg / 2 {
        for cand in (1u32 << d)..(1u32 << (d + 1)) {
            if poly_rem(p, cand) == 0 {
                return false;
            }
        }
    }
    true
}

fn mul_by_x(a: u32, poly: u32, bits: u8) -> u32 {
    let s = a << 1;
    if s & (1 << bits) != 0 {
        s ^ poly
    } else {
        s
    }
}

fn multiplicative_order_of_x(poly: u32, bits: u8) -> usize {
    let mut v = mul_by_x(1, poly, bits);
    let mut order = 1;
    while v != 1 {
        v = mul_by_x(v, poly, bits);
        order += 1;
        if order > MAX_ALPHABET {
            return 0;
        }
    }
    order
}

/// A symbol tagged with the alphabet it lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Element {
    value: u8,
    spec: AlphabetSpec,
}

impl Element {
    pub fn value(&self) -> u8 {
        self.value
    }

    pub fn spec(&self) -> AlphabetSpec {
        self.spec
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// An alphabet with its arithmetic tables.
///
/// Immutable after construction; share it behind an [`Arc`].
#[derive(Clone)]
pub struct Alphabet {
    spec: AlphabetSpec,
    size: usize,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    // 0 marks a non-unit (0 is never a unit).
    inv: Vec<u8>,
    units: Vec<u8>,
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Alphabet").field("spec", &self.spec).finish()
    }
}

impl Alphabet {
    pub fn new(spec: AlphabetSpec) -> Self {
        let size = spec.size();
        let mut add = vec![0u8; size * size];
        let mut mul = vec![0u8; size * size];
        match spec {
            AlphabetSpec::Field { bits, poly } => {
                let order = size - 1;
                let mut exp = vec![0u8; 2 * order];
                let mut log = vec![0usize; size];
                let mut v = 1u32;
                for (i, slot) in exp.iter_mut().take(order).enumerate() {
                    *slot = v as u8;
                    log[v as usize] = i;
                    v = mul_by_x(v, poly as u32, bits);
                }
                for i in order..2 * order {
                    exp[i] = exp[i - order];
                }
                for a in 0..size {
                    for b in 0..size {
                        add[a * size + b] = (a ^ b) as u8;
                        if a != 0 && b != 0 {
                            mul[a * size + b] = exp[log[a] + log[b]];
                        }
                    }
                }
            }
            AlphabetSpec::Ring { .. } => {
                for a in 0..size {
                    for b in 0..size {
                        add[a * size + b] = ((a + b) % size) as u8;
                        mul[a * size + b] = ((a * b) % size) as u8;
                    }
                }
            }
        }
        let neg = (0..size)
            .map(|a| (0..size).find(|&b| add[a * size + b] == 0).expect("additive inverse") as u8)
            .collect();
        let inv: Vec<u8> = (0..size)
            .map(|a| (1..size).find(|&b| mul[a * size + b] == 1).unwrap_or(0) as u8)
            .collect();
        let units = (1..size).filter(|&a| inv[a] != 0).map(|a| a as u8).collect();
        Alphabet { spec, size, add, mul, neg, inv, units }
    }

    pub fn shared(spec: AlphabetSpec) -> Arc<Self> {
        Arc::new(Self::new(spec))
    }

    pub fn spec(&self) -> AlphabetSpec {
        self.spec
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Bits needed to write one symbol (`ceil(log2(size))`).
    pub fn bits_per_symbol(&self) -> usize {
        (usize::BITS - (self.size - 1).leading_zeros()) as usize
    }

    #[inline]
    pub fn add_raw(&self, a: u8, b: u8) -> u8 {
        self.add[a as usize * self.size + b as usize]
    }

    #[inline]
    pub fn mul_raw(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize * self.size + b as usize]
    }

    #[inline]
    pub fn neg_raw(&self, a: u8) -> u8 {
        self.neg[a as usize]
    }

    #[inline]
    pub fn sub_raw(&self, a: u8, b: u8) -> u8 {
        self.add_raw(a, self.neg_raw(b))
    }

    /// Multiplicative inverse, `None` for non-units.
    #[inline]
    pub fn inv_raw(&self, a: u8) -> Option<u8> {
        match self.inv[a as usize] {
            0 => None,
            v => Some(v),
        }
    }

    pub fn is_unit_raw(&self, a: u8) -> bool {
        self.inv[a as usize] != 0
    }

    /// Raw unit values in ascending order.
    pub fn unit_values(&self) -> &[u8] {
        &self.units
    }

    pub fn element(&self, value: usize) -> Result<Element, AlgebraError> {
        if value >= self.size {
            return Err(AlgebraError::OutOfRange { value, alphabet: self.spec });
        }
        Ok(Element { value: value as u8, spec: self.spec })
    }

    pub fn zero(&self) -> Element {
        Element { value: 0, spec: self.spec }
    }

    pub fn one(&self) -> Element {
        Element { value: 1, spec: self.spec }
    }

    fn check(&self, e: Element) -> Result<(), AlgebraError> {
        if e.spec != self.spec {
            return Err(AlgebraError::Mismatch(e.spec, self.spec));
        }
        Ok(())
    }

    pub fn add(&self, a: Element, b: Element) -> Result<Element, AlgebraError> {
        self.check(a)?;
        self.check(b)?;
        Ok(Element { value: self.add_raw(a.value, b.value), spec: self.spec })
    }

    pub fn mul(&self, a: Element, b: Element) -> Result<Element, AlgebraError> {
        self.check(a)?;
        self.check(b)?;
        Ok(Element { value: self.mul_raw(a.value, b.value), spec: self.spec })
    }

    pub fn neg(&self, a: Element) -> Result<Element, AlgebraError> {
        self.check(a)?;
        Ok(Element { value: self.neg_raw(a.value), spec: self.spec })
    }

    /// All multiplicative units in ascending order: every nonzero element of
    /// a field, every k with gcd(k, M) = 1 in Z_M.
    pub fn units(&self) -> Vec<Element> {
        self.units.iter().map(|&value| Element { value, spec: self.spec }).collect()
    }

    pub fn invert(&self, u: Element) -> Result<Element, AlgebraError> {
        self.check(u)?;
        self.inv_raw(u.value)
            .map(|value| Element { value, spec: self.spec })
            .ok_or(AlgebraError::NotUnit { value: u.value, alphabet: self.spec })
    }
}
