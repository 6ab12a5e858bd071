//! Network-coding side of the relay: NC maps, superimposed constellations,
//! soft demappers, the relay receivers and broadcast-phase recovery.

mod demap;
mod receivers;
mod superimposed;

use std::sync::Arc;

use thiserror::Error;

use crate::algebra::{AlgebraError, Alphabet, Element};
use crate::ldpc::LdpcError;

pub use demap::{
    demap_nc_symbol_prob, demap_pair_prob, demap_user_bit_llr, demap_user_symbol_prob, demap_xor_bit_llr,
    pair_log_likelihoods,
};
pub use receivers::{
    receive_cd_nc, receive_iterative_xor_cd, receive_mud_nc, receive_mud_xor, receive_nc_cd, receive_xor_cd,
    CoefficientStrategy, RelayFrame, RelayOutput,
};
pub use superimposed::{
    build_superimposed_set, detect_ambiguity, effective_min_distance, select_coefficients, select_coefficients_for_set,
    AmbiguityReport, NcRule, SetEntry, SuperimposedSet, MERGE_TOLERANCE,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PncError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Ldpc(#[from] LdpcError),
    #[error("superimposed constellation is ambiguous under {0}")]
    Ambiguous(String),
    #[error("transmission pairs are not uniquely decodable from the superimposed points")]
    NotUniquePair,
    #[error("{0}")]
    Input(String),
}

/// `(a, b) -> a*s1 + b*s2` over the code alphabet.
#[derive(Clone, Debug)]
pub struct NcMap {
    alphabet: Arc<Alphabet>,
    a: u8,
    b: u8,
}

impl PartialEq for NcMap {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet.spec() == other.alphabet.spec() && self.a == other.a && self.b == other.b
    }
}

impl NcMap {
    /// Both coefficients must be units.
    pub fn new(alphabet: Arc<Alphabet>, a: u8, b: u8) -> Result<Self, AlgebraError> {
        for v in [a, b] {
            if (v as usize) >= alphabet.size() {
                return Err(AlgebraError::OutOfRange { value: v as usize, alphabet: alphabet.spec() });
            }
            if !alphabet.is_unit_raw(v) {
                return Err(AlgebraError::NotUnit { value: v, alphabet: alphabet.spec() });
            }
        }
        Ok(NcMap { alphabet, a, b })
    }

    /// `a = b = 1`: bitwise XOR over a field, plain sum over a ring.
    pub fn sum(alphabet: Arc<Alphabet>) -> Self {
        NcMap { alphabet, a: 1, b: 1 }
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn coefficients(&self) -> (u8, u8) {
        (self.a, self.b)
    }

    #[inline]
    pub fn apply(&self, s1: u8, s2: u8) -> u8 {
        let al = &self.alphabet;
        al.add_raw(al.mul_raw(self.a, s1), al.mul_raw(self.b, s2))
    }

    pub fn apply_vec(&self, s1: &[u8], s2: &[u8]) -> Vec<u8> {
        s1.iter().zip(s2).map(|(&x, &y)| self.apply(x, y)).collect()
    }
}

impl std::fmt::Display for NcMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}*s1 + {}*s2 over {}", self.a, self.b, self.alphabet.spec())
    }
}

/// Typed form of [`NcMap::apply`].
pub fn nc_map(map: &NcMap, s1: &Element, s2: &Element) -> Result<Element, AlgebraError> {
    let spec = map.alphabet.spec();
    for e in [s1, s2] {
        if e.spec() != spec {
            return Err(AlgebraError::Mismatch(e.spec(), spec));
        }
    }
    map.alphabet.element(map.apply(s1.value(), s2.value()) as usize)
}

/// Whether `(s1, s2) -> a*s1 + b*s2` is injective in each argument with the
/// other fixed. Coefficients need not be units here.
pub fn exclusive_law(alphabet: &Alphabet, a: u8, b: u8) -> bool {
    let q = alphabet.size();
    let f = |s1: usize, s2: usize| alphabet.add_raw(alphabet.mul_raw(a, s1 as u8), alphabet.mul_raw(b, s2 as u8));
    let injective = |g: &dyn Fn(usize) -> u8| {
        let mut seen = vec![false; q];
        (0..q).all(|x| !std::mem::replace(&mut seen[g(x) as usize], true))
    };
    (0..q).all(|fixed| injective(&|x| f(x, fixed)) && injective(&|x| f(fixed, x)))
}

pub fn check_exclusive_law(map: &NcMap) -> bool {
    exclusive_law(&map.alphabet, map.a, map.b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum User {
    One,
    Two,
}

/// Solves `a*s1 + b*s2 = nc` for the partner's message, `which` being the
/// user that knows `own`.
pub fn broadcast_recover(own: &[u8], nc: &[u8], map: &NcMap, which: User) -> Result<Vec<u8>, PncError> {
    if own.len() != nc.len() {
        return Err(PncError::Input(format!("message lengths differ: {} vs {}", own.len(), nc.len())));
    }
    let al = &map.alphabet;
    let (own_coeff, other_coeff) = match which {
        User::One => (map.a, map.b),
        User::Two => (map.b, map.a),
    };
    let inv = al
        .inv_raw(other_coeff)
        .ok_or(AlgebraError::NotUnit { value: other_coeff, alphabet: al.spec() })?;
    own.iter()
        .zip(nc)
        .map(|(&s, &v)| {
            if s as usize >= al.size() || v as usize >= al.size() {
                return Err(PncError::Input(format!("symbol outside {}", al.spec())));
            }
            Ok(al.mul_raw(inv, al.sub_raw(v, al.mul_raw(own_coeff, s))))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlphabetSpec;
    use crate::oracle;
    use rand::{Rng, SeedableRng};

    fn z4() -> Arc<Alphabet> {
        Alphabet::shared(AlphabetSpec::ring(4).unwrap())
    }

    #[test]
    fn map_examples() {
        assert_eq!(NcMap::sum(z4()).apply(3, 2), 1);
        let gf8 = Alphabet::shared(AlphabetSpec::gf(3).unwrap());
        assert_eq!(NcMap::sum(gf8.clone()).apply(0b011, 0b101), 0b110);
        assert_eq!(NcMap::new(z4(), 3, 1).unwrap().apply(1, 2), 1);
        assert!(NcMap::new(z4(), 1, 2).is_err());
        let e = nc_map(&NcMap::sum(z4()), &z4().element(3).unwrap(), &z4().element(2).unwrap()).unwrap();
        assert_eq!(e.value(), 1);
        assert!(nc_map(&NcMap::sum(z4()), &gf8.element(3).unwrap(), &z4().element(2).unwrap()).is_err());
    }

    #[test]
    fn exclusive_law_examples() {
        assert!(check_exclusive_law(&NcMap::sum(z4())));
        assert!(!exclusive_law(&z4(), 1, 2));
        let gf8 = Alphabet::new(AlphabetSpec::gf(3).unwrap());
        assert!((1..8).all(|a| (1..8).all(|b| exclusive_law(&gf8, a, b))));
    }

    #[test]
    fn exclusive_law_matches_enumeration() {
        let mut specs = vec![AlphabetSpec::binary(), AlphabetSpec::gf(2).unwrap(), AlphabetSpec::gf(3).unwrap()];
        specs.extend((2..=8).map(|m| AlphabetSpec::ring(m).unwrap()));
        for spec in specs {
            let al = Alphabet::new(spec);
            for a in 0..al.size() as u8 {
                for b in 0..al.size() as u8 {
                    assert_eq!(exclusive_law(&al, a, b), oracle::exclusive_law(spec, a as usize, b as usize), "{spec} {a} {b}");
                }
            }
        }
    }

    #[test]
    fn unit_maps_are_exclusive_up_to_16() {
        let mut specs: Vec<AlphabetSpec> = (1..=4).map(|r| AlphabetSpec::gf(r).unwrap()).collect();
        specs.extend((2..=16).map(|m| AlphabetSpec::ring(m).unwrap()));
        for spec in specs {
            let al = Alphabet::new(spec);
            for &a in al.unit_values() {
                for &b in al.unit_values() {
                    assert!(exclusive_law(&al, a, b));
                }
            }
        }
    }

    #[test]
    fn recovery_examples() {
        let map = NcMap::sum(z4());
        assert_eq!(broadcast_recover(&[2], &[1], &map, User::One).unwrap(), vec![3]);
        let gf8 = Alphabet::shared(AlphabetSpec::gf(3).unwrap());
        let xor = NcMap::sum(gf8);
        let nc = xor.apply_vec(&[5, 1], &[3, 7]);
        assert_eq!(broadcast_recover(&[5, 1], &nc, &xor, User::One).unwrap(), vec![3, 7]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let map = NcMap::new(z4(), 3, 3).unwrap();
        for _ in 0..100 {
            let s1: Vec<u8> = (0..20).map(|_| rng.random_range(0..4)).collect();
            let s2: Vec<u8> = (0..20).map(|_| rng.random_range(0..4)).collect();
            let nc = map.apply_vec(&s1, &s2);
            assert_eq!(broadcast_recover(&s1, &nc, &map, User::One).unwrap(), s2);
            assert_eq!(broadcast_recover(&s2, &nc, &map, User::Two).unwrap(), s1);
        }
    }
}
