//! Soft demappers from a received sample to NC, pair and per-user beliefs.
//!
//! Everything is computed from the pair log-likelihoods
//! `-|y - (h1 x1 + h2 x2)|^2 / N0` with the maximum subtracted before
//! exponentiation.

use num_complex::Complex64;

use super::{NcRule, SuperimposedSet};
use crate::ldpc::{PairBelief, SymbolBelief};

/// Log-likelihood of every transmission pair, `s1 * M + s2`, shifted so the
/// maximum is 0. A non-finite sample or likelihood yields all zeros
/// (uniform).
pub fn pair_log_likelihoods(y: Complex64, set: &SuperimposedSet, noise_var: f64, out: &mut Vec<f64>) {
    out.clear();
    out.extend(set.pair_points().iter().map(|p| -(y - p).norm_sqr() / noise_var));
    let max = out.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    if !max.is_finite() || out.iter().any(|v| v.is_nan()) {
        out.iter_mut().for_each(|v| *v = 0.0);
    } else {
        out.iter_mut().for_each(|v| *v -= max);
    }
}

fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let max = v.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `ln P(bits)` up to a constant, for bit LLRs `llrs` (positive favours 0,
/// MSB first).
#[inline]
fn log_prior(bits: u16, llrs: &[f64]) -> f64 {
    let b = llrs.len();
    llrs.iter()
        .enumerate()
        .map(|(j, &l)| if (bits >> (b - 1 - j)) & 1 == 0 { 0.5 * l } else { -0.5 * l })
        .sum()
}

fn bit_llrs(b: usize, weights: impl Fn(&mut dyn FnMut(u16, f64))) -> Vec<f64> {
    // acc[j][bit] collects log-weights
    let mut zero = vec![Vec::new(); b];
    let mut one = vec![Vec::new(); b];
    weights(&mut |label, w| {
        for j in 0..b {
            if (label >> (b - 1 - j)) & 1 == 0 {
                zero[j].push(w);
            } else {
                one[j].push(w);
            }
        }
    });
    (0..b)
        .map(|j| {
            let l = log_sum_exp(zero[j].iter().copied()) - log_sum_exp(one[j].iter().copied());
            if l.is_nan() {
                0.0
            } else {
                l
            }
        })
        .collect()
}

/// LLRs of the XOR of the two users' bit labels. With `prior` (XOR-bit LLRs)
/// the pairs are weighted accordingly and the prior is subtracted from the
/// output, which is then extrinsic.
pub fn demap_xor_bit_llr(y: Complex64, set: &SuperimposedSet, noise_var: f64, prior: Option<&[f64]>) -> Vec<f64> {
    let m = set.size();
    let b = set.bits_per_symbol();
    let mut ll = Vec::with_capacity(m * m);
    pair_log_likelihoods(y, set, noise_var, &mut ll);
    let mut out = bit_llrs(b, |emit| {
        for p in 0..m * m {
            let label = set.nc_value(&NcRule::BitXor, (p / m) as u8, (p % m) as u8);
            let w = ll[p] + prior.map_or(0.0, |pr| log_prior(label, pr));
            emit(label, w);
        }
    });
    if let Some(pr) = prior {
        for (o, p) in out.iter_mut().zip(pr) {
            *o -= p;
        }
    }
    out
}

/// Posterior of the NC symbol: pair likelihoods summed per NC value.
pub fn demap_nc_symbol_prob(y: Complex64, set: &SuperimposedSet, rule: &NcRule, noise_var: f64) -> SymbolBelief {
    let m = set.size();
    let mut ll = Vec::with_capacity(m * m);
    pair_log_likelihoods(y, set, noise_var, &mut ll);
    let mut w = vec![0.0; m];
    for (p, l) in ll.iter().enumerate() {
        w[set.nc_value(rule, (p / m) as u8, (p % m) as u8) as usize] += l.exp();
    }
    SymbolBelief::from_weights(w)
}

/// Posterior of the transmission pair.
pub fn demap_pair_prob(y: Complex64, set: &SuperimposedSet, noise_var: f64) -> PairBelief {
    let m = set.size();
    let mut ll = Vec::with_capacity(m * m);
    pair_log_likelihoods(y, set, noise_var, &mut ll);
    PairBelief::from_weights(m, ll.iter().map(|l| l.exp()).collect())
}

/// Per-user symbol posteriors (each marginalising the other user
/// uniformly).
pub fn demap_user_symbol_prob(y: Complex64, set: &SuperimposedSet, noise_var: f64) -> (SymbolBelief, SymbolBelief) {
    let pair = demap_pair_prob(y, set, noise_var);
    (pair.marginal(0), pair.marginal(1))
}

/// Bit LLRs for each user's label. Each user's priors weight the pairs; the
/// outputs are extrinsic (own prior removed).
pub fn demap_user_bit_llr(
    y: Complex64,
    set: &SuperimposedSet,
    noise_var: f64,
    prior1: Option<&[f64]>,
    prior2: Option<&[f64]>,
) -> (Vec<f64>, Vec<f64>) {
    let m = set.size();
    let b = set.bits_per_symbol();
    let mut ll = Vec::with_capacity(m * m);
    pair_log_likelihoods(y, set, noise_var, &mut ll);
    let weight = |p: usize| {
        let (b1, b2) = set.user_bits((p / m) as u8, (p % m) as u8);
        ll[p] + prior1.map_or(0.0, |pr| log_prior(b1, pr)) + prior2.map_or(0.0, |pr| log_prior(b2, pr))
    };
    let mut u1 = bit_llrs(b, |emit| {
        for p in 0..m * m {
            emit(set.user_bits((p / m) as u8, (p % m) as u8).0, weight(p));
        }
    });
    let mut u2 = bit_llrs(b, |emit| {
        for p in 0..m * m {
            emit(set.user_bits((p / m) as u8, (p % m) as u8).1, weight(p));
        }
    });
    for (out, prior) in [(&mut u1, prior1), (&mut u2, prior2)] {
        if let Some(pr) = prior {
            for (o, p) in out.iter_mut().zip(pr) {
                *o -= p;
            }
        }
    }
    (u1, u2)
}
