//! Exhaustive reference computations used to check the fast algorithms.
//!
//! Everything here is deliberately naive: arithmetic is recomputed from the
//! alphabet definition (carry-less multiplication for fields, integer
//! arithmetic mod M for rings) rather than read from the lookup tables, and
//! decoders enumerate every codeword. Only suitable for tiny instances.

use crate::algebra::AlphabetSpec;
use crate::ldpc::LdpcCode;

/// Sum in the alphabet, computed from first principles.
pub fn add(spec: AlphabetSpec, x: usize, y: usize) -> usize {
    match spec {
        AlphabetSpec::Field { .. } => x ^ y,
        AlphabetSpec::Ring { modulus } => (x + y) % modulus as usize,
    }
}

/// Product in the alphabet, computed from first principles.
pub fn mul(spec: AlphabetSpec, x: usize, y: usize) -> usize {
    match spec {
        AlphabetSpec::Field { bits, poly } => {
            let mut acc = 0usize;
            for i in 0..bits as usize {
                if (y >> i) & 1 == 1 {
                    acc ^= x << i;
                }
            }
            for i in (bits as usize..2 * bits as usize).rev() {
                if (acc >> i) & 1 == 1 {
                    acc ^= (poly as usize) << (i - bits as usize);
                }
            }
            acc
        }
        AlphabetSpec::Ring { modulus } => (x * y) % modulus as usize,
    }
}

pub fn neg(spec: AlphabetSpec, x: usize) -> usize {
    match spec {
        AlphabetSpec::Field { .. } => x,
        AlphabetSpec::Ring { modulus } => (modulus as usize - x) % modulus as usize,
    }
}

fn size(spec: AlphabetSpec) -> usize {
    match spec {
        AlphabetSpec::Field { bits, .. } => 1 << bits,
        AlphabetSpec::Ring { modulus } => modulus as usize,
    }
}

/// Units found by searching for a multiplicative inverse.
pub fn units(spec: AlphabetSpec) -> Vec<usize> {
    let q = size(spec);
    (1..q).filter(|&x| (1..q).any(|y| mul(spec, x, y) == 1)).collect()
}

/// All words of length n over the alphabet with zero syndrome, by scanning
/// every one of the q^n candidates.
pub fn codewords(code: &LdpcCode) -> Vec<Vec<u8>> {
    let spec = code.alphabet().spec();
    let q = size(spec);
    let n = code.n();
    let h = code.dense();
    let total = q.checked_pow(n as u32).expect("code too large for enumeration");
    assert!(total <= 1 << 24, "code too large for enumeration");
    let mut out = Vec::new();
    let mut word = vec![0usize; n];
    for index in 0..total {
        let mut r = index;
        for w in word.iter_mut() {
            *w = r % q;
            r /= q;
        }
        let ok = h.iter().all(|row| {
            row.iter().zip(&word).fold(0, |acc, (&hij, &x)| add(spec, acc, mul(spec, hij as usize, x))) == 0
        });
        if ok {
            out.push(word.iter().map(|&x| x as u8).collect());
        }
    }
    out
}

fn argmax_lowest(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

/// Symbol-wise MAP decision from per-position probabilities
/// (`probs[i][x]`).
pub fn symbol_map(codewords: &[Vec<u8>], probs: &[Vec<f64>]) -> Vec<u8> {
    let n = probs.len();
    let q = probs[0].len();
    let mut marg = vec![vec![0.0; q]; n];
    for c in codewords {
        let w: f64 = c.iter().zip(probs).map(|(&x, p)| p[x as usize]).product();
        for (i, &x) in c.iter().enumerate() {
            marg[i][x as usize] += w;
        }
    }
    marg.iter().map(|m| argmax_lowest(m) as u8).collect()
}

/// Block MAP: the most likely codeword.
pub fn block_map(codewords: &[Vec<u8>], probs: &[Vec<f64>]) -> Vec<u8> {
    let score = |c: &Vec<u8>| c.iter().zip(probs).map(|(&x, p)| p[x as usize].ln()).sum::<f64>();
    let mut best = &codewords[0];
    let mut best_score = score(best);
    for c in codewords {
        let s = score(c);
        if s > best_score {
            best = c;
            best_score = s;
        }
    }
    best.clone()
}

/// Pair-wise MAP over all pairs of codewords, from per-position pair
/// probabilities indexed `s1 * M + s2`.
pub fn pair_map(codewords: &[Vec<u8>], m: usize, probs: &[Vec<f64>]) -> Vec<(u8, u8)> {
    let n = probs.len();
    let mut marg = vec![vec![0.0; m * m]; n];
    for c1 in codewords {
        for c2 in codewords {
            let w: f64 = (0..n).map(|i| probs[i][c1[i] as usize * m + c2[i] as usize]).product();
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                marg[i][c1[i] as usize * m + c2[i] as usize] += w;
            }
        }
    }
    marg.iter()
        .map(|p| {
            let x = argmax_lowest(p);
            ((x / m) as u8, (x % m) as u8)
        })
        .collect()
}

/// Bitwise MAP for a binary code; LLR positive means 0 is more likely.
pub fn bitwise_map(codewords: &[Vec<u8>], llrs: &[f64]) -> Vec<u8> {
    let probs: Vec<Vec<f64>> = llrs
        .iter()
        .map(|&l| {
            let p1 = 1.0 / (1.0 + l.exp());
            vec![1.0 - p1, p1]
        })
        .collect();
    symbol_map(codewords, &probs)
}

/// Leave-one-out check update by enumerating every combination of the other
/// inputs: output t at `s` is the total weight of tuples summing to `s` in
/// the group given by `add`.
pub fn leave_one_out(order: usize, add: impl Fn(usize, usize) -> usize, messages: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = messages.len();
    (0..d)
        .map(|t| {
            let mut acc = vec![0.0; order];
            acc[0] = 1.0;
            for (j, m) in messages.iter().enumerate() {
                if j == t {
                    continue;
                }
                let mut next = vec![0.0; order];
                for (x, &a) in acc.iter().enumerate() {
                    for (y, &b) in m.iter().enumerate() {
                        next[add(x, y)] += a * b;
                    }
                }
                acc = next;
            }
            let s: f64 = acc.iter().sum();
            acc.iter().map(|v| v / s).collect()
        })
        .collect()
}

/// Max-sum counterpart of [`leave_one_out`] on log-domain messages,
/// normalised so each output's maximum is 0.
pub fn leave_one_out_max_sum(order: usize, add: impl Fn(usize, usize) -> usize, messages: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = messages.len();
    (0..d)
        .map(|t| {
            let mut acc = vec![f64::NEG_INFINITY; order];
            acc[0] = 0.0;
            for (j, m) in messages.iter().enumerate() {
                if j == t {
                    continue;
                }
                let mut next = vec![f64::NEG_INFINITY; order];
                for (x, &a) in acc.iter().enumerate() {
                    for (y, &b) in m.iter().enumerate() {
                        let s = add(x, y);
                        next[s] = next[s].max(a + b);
                    }
                }
                acc = next;
            }
            let max = acc.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
            acc.iter().map(|v| v - max).collect()
        })
        .collect()
}

/// Addition in the pair group of an alphabet, pair `(a, b)` at `a * M + b`.
pub fn pair_add(spec: AlphabetSpec) -> impl Fn(usize, usize) -> usize {
    let m = size(spec);
    move |x, y| add(spec, x / m, y / m) * m + add(spec, x % m, y % m)
}

/// Exclusive law by enumerating all quadruples: for every pair of distinct
/// transmission pairs sharing one user's symbol, the combination must
/// differ.
pub fn exclusive_law(spec: AlphabetSpec, a: usize, b: usize) -> bool {
    let q = size(spec);
    let f = |s1: usize, s2: usize| add(spec, mul(spec, a, s1), mul(spec, b, s2));
    for s1 in 0..q {
        for s2 in 0..q {
            for t1 in 0..q {
                for t2 in 0..q {
                    let shares = (s1 == t1) != (s2 == t2);
                    if shares && f(s1, s2) == f(t1, t2) {
                        return false;
                    }
                }
            }
        }
    }
    true
}
