//! Fixtures for the decoder benchmarks.

use pnc_core::algebra::{Alphabet, AlphabetSpec};
use pnc_core::ldpc::{construct_regular, LdpcCode, PairBelief, SymbolBelief};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `count` random normalized messages over `q` symbols.
pub fn random_messages(q: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut m: Vec<f64> = (0..q).map(|_| rng.random::<f64>() + 1e-9).collect();
            let t: f64 = m.iter().sum();
            m.iter_mut().for_each(|v| *v /= t);
            m
        })
        .collect()
}

/// Rate-1/2 code over `spec` with column weight 2.
pub fn half_rate_code(spec: AlphabetSpec, n: usize) -> LdpcCode {
    construct_regular(n, n / 2, 2, 4, Alphabet::shared(spec), 1).expect("code")
}

/// Beliefs that favour the all-zero codeword with probability `p0`.
pub fn zero_word_beliefs(q: usize, n: usize, p0: f64) -> Vec<SymbolBelief> {
    let rest = (1.0 - p0) / (q - 1) as f64;
    (0..n)
        .map(|_| SymbolBelief::new((0..q).map(|x| if x == 0 { p0 } else { rest }).collect()).expect("belief"))
        .collect()
}

pub fn zero_pair_beliefs(q: usize, n: usize, p0: f64) -> Vec<PairBelief> {
    zero_word_beliefs(q, n, p0).iter().map(|b| PairBelief::product(b, b)).collect()
}
