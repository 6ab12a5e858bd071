//! Flooding belief propagation over a symbol group.
//!
//! The same engine decodes the code over its own alphabet (C-SPA) and over
//! the alphabet of symbol pairs (G-SPA): a pair vector is valid exactly when
//! both coordinate streams satisfy H, which is the parity check of the
//! product group under the coordinatewise coefficient action.
//!
//! The Direct and Fft check updates run in the probability domain with
//! per-message renormalisation; the variable update works on logarithms so
//! long products never underflow. EMS runs entirely in the log domain.

use num_complex::Complex64;

use super::ems::{self, EmsWorkspace, Entry, LOG_FLOOR};
use super::group::{OpCounter, SymbolGroup};
use super::{CheckUpdate, DecodeOutcome, DecoderConfig, LdpcCode, LdpcError};

/// Smallest probability a check message may carry.
pub const MESSAGE_FLOOR: f64 = 1.0e-300;
const NORMALIZATION_TOL: f64 = 1.0e-9;

fn validate_probs(probs: &[f64]) -> Result<(), LdpcError> {
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(LdpcError::Config("belief has negative or non-finite entries".into()));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(LdpcError::Config(format!("belief sums to {sum}, not 1")));
    }
    Ok(())
}

/// Normalises non-negative weights; degenerate input becomes uniform.
pub(crate) fn normalize_or_uniform(w: &mut [f64]) {
    let sum: f64 = w.iter().sum();
    if sum.is_finite() && sum > 0.0 {
        w.iter_mut().for_each(|x| *x /= sum);
    } else {
        let u = 1.0 / w.len() as f64;
        w.iter_mut().for_each(|x| *x = u);
    }
}

/// Probability vector over the code alphabet for one position.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolBelief(Vec<f64>);

impl SymbolBelief {
    pub fn new(probs: Vec<f64>) -> Result<Self, LdpcError> {
        validate_probs(&probs)?;
        Ok(SymbolBelief(probs))
    }

    /// Normalises arbitrary non-negative weights (uniform if they vanish).
    pub fn from_weights(mut weights: Vec<f64>) -> Self {
        normalize_or_uniform(&mut weights);
        SymbolBelief(weights)
    }

    pub fn uniform(q: usize) -> Self {
        SymbolBelief(vec![1.0 / q as f64; q])
    }

    pub fn delta(q: usize, symbol: usize) -> Self {
        let mut p = vec![0.0; q];
        p[symbol] = 1.0;
        SymbolBelief(p)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Probability vector over the pair alphabet, `(s1, s2)` at `s1 * M + s2`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairBelief {
    symbols: usize,
    probs: Vec<f64>,
}

impl PairBelief {
    pub fn new(symbols: usize, probs: Vec<f64>) -> Result<Self, LdpcError> {
        if probs.len() != symbols * symbols {
            return Err(LdpcError::Config(format!("pair belief needs {} entries", symbols * symbols)));
        }
        validate_probs(&probs)?;
        Ok(PairBelief { symbols, probs })
    }

    pub fn from_weights(symbols: usize, mut weights: Vec<f64>) -> Self {
        assert_eq!(weights.len(), symbols * symbols);
        normalize_or_uniform(&mut weights);
        PairBelief { symbols, probs: weights }
    }

    /// Independent users: `P(s1, s2) = p1(s1) p2(s2)`.
    pub fn product(p1: &SymbolBelief, p2: &SymbolBelief) -> Self {
        let m = p1.len();
        let probs = p1.probs().iter().flat_map(|&a| p2.probs().iter().map(move |&b| a * b)).collect();
        PairBelief { symbols: m, probs }
    }

    pub fn symbols(&self) -> usize {
        self.symbols
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, s1: usize, s2: usize) -> f64 {
        self.probs[s1 * self.symbols + s2]
    }

    /// Marginal of user 1 (`user == 0`) or user 2.
    pub fn marginal(&self, user: usize) -> SymbolBelief {
        let m = self.symbols;
        let mut out = vec![0.0; m];
        for a in 0..m {
            for b in 0..m {
                out[if user == 0 { a } else { b }] += self.get(a, b);
            }
        }
        SymbolBelief::from_weights(out)
    }
}

/// Work buffers for one check node.
struct CheckScratch {
    inputs: Vec<f64>,
    outputs: Vec<f64>,
    prefix: Vec<f64>,
    suffix: Vec<f64>,
    spectra: Vec<Complex64>,
    pspec: Vec<Complex64>,
    sspec: Vec<Complex64>,
    tmp: Vec<Complex64>,
    lists: Vec<Vec<Entry>>,
    fwd: Vec<Vec<Entry>>,
    bwd: Vec<Vec<Entry>>,
    merged: Vec<Entry>,
    ems: EmsWorkspace,
}

impl CheckScratch {
    fn new(order: usize, degree: usize) -> Self {
        let real = vec![0.0; order * degree];
        let cplx = vec![Complex64::default(); order * degree];
        CheckScratch {
            inputs: real.clone(),
            outputs: real.clone(),
            prefix: real.clone(),
            suffix: real,
            spectra: cplx.clone(),
            pspec: cplx.clone(),
            sspec: cplx,
            tmp: vec![Complex64::default(); order],
            lists: vec![Vec::new(); degree],
            fwd: vec![Vec::new(); degree],
            bwd: vec![Vec::new(); degree],
            merged: Vec::new(),
            ems: EmsWorkspace::new(order),
        }
    }
}

fn normalize(p: &mut [f64]) {
    normalize_or_uniform(p);
}

/// Leave-one-out group convolution by forward/backward partial products:
/// output `t` is the convolution of every input except input `t`.
fn loo_direct(g: &SymbolGroup, d: usize, s: &mut CheckScratch, ops: &OpCounter) {
    let q = g.order();
    let at = |j: usize| j * q..(j + 1) * q;
    if d == 1 {
        s.outputs[..q].fill(0.0);
        s.outputs[0] = 1.0;
        return;
    }
    s.prefix[at(0)].copy_from_slice(&s.inputs[at(0)]);
    for j in 1..d - 1 {
        let (done, rest) = s.prefix.split_at_mut(j * q);
        g.convolve(&done[(j - 1) * q..], &s.inputs[at(j)], &mut rest[..q], ops);
    }
    s.suffix[at(d - 1)].copy_from_slice(&s.inputs[at(d - 1)]);
    for j in (1..d - 1).rev() {
        let (head, tail) = s.suffix.split_at_mut((j + 1) * q);
        g.convolve(&s.inputs[at(j)], &tail[..q], &mut head[j * q..], ops);
    }
    for t in 0..d {
        let out = &mut s.outputs[at(t)];
        if t == 0 {
            out.copy_from_slice(&s.suffix[at(1)]);
        } else if t == d - 1 {
            out.copy_from_slice(&s.prefix[at(d - 2)]);
        } else {
            g.convolve(&s.prefix[at(t - 1)], &s.suffix[at(t + 1)], out, ops);
        }
        normalize(out);
    }
}

/// Same as [`loo_direct`] through the group transform.
fn loo_fft(g: &SymbolGroup, d: usize, s: &mut CheckScratch, ops: &OpCounter) {
    let q = g.order();
    let at = |j: usize| j * q..(j + 1) * q;
    if d == 1 {
        s.outputs[..q].fill(0.0);
        s.outputs[0] = 1.0;
        return;
    }
    for j in 0..d {
        g.forward(&s.inputs[at(j)], &mut s.spectra[at(j)], ops);
    }
    s.pspec[at(0)].copy_from_slice(&s.spectra[at(0)]);
    for j in 1..d - 1 {
        for x in 0..q {
            s.pspec[j * q + x] = s.pspec[(j - 1) * q + x] * s.spectra[j * q + x];
        }
        ops.add(q);
    }
    s.sspec[at(d - 1)].copy_from_slice(&s.spectra[at(d - 1)]);
    for j in (1..d - 1).rev() {
        for x in 0..q {
            s.sspec[j * q + x] = s.spectra[j * q + x] * s.sspec[(j + 1) * q + x];
        }
        ops.add(q);
    }
    for t in 0..d {
        if t == 0 {
            s.tmp.copy_from_slice(&s.sspec[at(1)]);
        } else if t == d - 1 {
            s.tmp.copy_from_slice(&s.pspec[at(d - 2)]);
        } else {
            for x in 0..q {
                s.tmp[x] = s.pspec[(t - 1) * q + x] * s.sspec[(t + 1) * q + x];
            }
            ops.add(q);
        }
        let out = &mut s.outputs[at(t)];
        g.inverse(&mut s.tmp, out, ops);
        normalize(out);
    }
}

/// Log-domain leave-one-out max-sum over truncated lists.
fn loo_ems(g: &SymbolGroup, d: usize, list_size: usize, offset: f64, s: &mut CheckScratch, ops: &OpCounter) {
    let q = g.order();
    let at = |j: usize| j * q..(j + 1) * q;
    if d == 1 {
        s.outputs[..q].fill(LOG_FLOOR);
        s.outputs[0] = 0.0;
        return;
    }
    for j in 0..d {
        ems::truncate(&s.inputs[at(j)], list_size, &mut s.lists[j]);
    }
    s.fwd[0].clone_from(&s.lists[0]);
    for j in 1..d - 1 {
        let (done, rest) = s.fwd.split_at_mut(j);
        ems::combine(g, &done[j - 1], &s.lists[j], list_size, &mut rest[0], &mut s.ems, ops);
    }
    s.bwd[d - 1].clone_from(&s.lists[d - 1]);
    for j in (1..d - 1).rev() {
        let (head, tail) = s.bwd.split_at_mut(j + 1);
        ems::combine(g, &s.lists[j], &tail[0], list_size, &mut head[j], &mut s.ems, ops);
    }
    for t in 0..d {
        let list: &[Entry] = if t == 0 {
            &s.bwd[1]
        } else if t == d - 1 {
            &s.fwd[d - 2]
        } else {
            ems::combine(g, &s.fwd[t - 1], &s.bwd[t + 1], list_size, &mut s.merged, &mut s.ems, ops);
            &s.merged
        };
        ems::expand(list, q, offset, &mut s.outputs[at(t)]);
    }
}

fn run_standalone(
    g: &SymbolGroup,
    messages: &[Vec<f64>],
    ops: &OpCounter,
    kernel: impl FnOnce(&SymbolGroup, usize, &mut CheckScratch, &OpCounter),
) -> Vec<Vec<f64>> {
    let q = g.order();
    let d = messages.len();
    let mut s = CheckScratch::new(q, d.max(1));
    for (j, m) in messages.iter().enumerate() {
        assert_eq!(m.len(), q, "message length must equal the group order");
        s.inputs[j * q..(j + 1) * q].copy_from_slice(m);
    }
    kernel(g, d, &mut s, ops);
    s.outputs.chunks(q).take(d).map(<[f64]>::to_vec).collect()
}

/// Check-node update by direct convolution over the group. Output `t` is the
/// normalised convolution of all messages except message `t`; coefficient
/// permutations are applied by the caller.
pub fn gspa_check_update_direct(g: &SymbolGroup, messages: &[Vec<f64>], ops: &OpCounter) -> Vec<Vec<f64>> {
    run_standalone(g, messages, ops, loo_direct)
}

/// Check-node update in the transform domain of the group: Walsh-Hadamard
/// along each coordinate for fields, DFT for rings.
pub fn gspa_check_update_2dfft(g: &SymbolGroup, messages: &[Vec<f64>], ops: &OpCounter) -> Vec<Vec<f64>> {
    run_standalone(g, messages, ops, loo_fft)
}

/// Extended min-sum check-node update on log-domain messages.
pub fn gspa_check_update_ems(
    g: &SymbolGroup,
    messages: &[Vec<f64>],
    list_size: usize,
    offset: f64,
    ops: &OpCounter,
) -> Vec<Vec<f64>> {
    assert!(list_size >= 1 && list_size <= g.order());
    run_standalone(g, messages, ops, |g, d, s, ops| loo_ems(g, d, list_size, offset, s, ops))
}

/// Message-passing state for one code over one symbol group.
pub struct GroupDecoder<'a> {
    code: &'a LdpcCode,
    group: SymbolGroup,
    cfg: DecoderConfig,
    ln_channel: Vec<f64>,
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    ln_c2v: Vec<f64>,
    scratch: CheckScratch,
    ops: OpCounter,
}

impl<'a> GroupDecoder<'a> {
    pub fn new(code: &'a LdpcCode, group: SymbolGroup, cfg: &DecoderConfig) -> Result<Self, LdpcError> {
        if group.symbol_count() != code.alphabet().size() {
            return Err(LdpcError::Config("symbol group does not match the code alphabet".into()));
        }
        let q = group.order();
        cfg.validate(q)?;
        let e = code.edges().len();
        let scratch = CheckScratch::new(q, code.dc());
        Ok(GroupDecoder {
            code,
            group,
            cfg: cfg.clone(),
            ln_channel: vec![0.0; code.n() * q],
            v2c: vec![0.0; e * q],
            c2v: vec![0.0; e * q],
            ln_c2v: vec![0.0; e * q],
            scratch,
            ops: OpCounter::new(),
        })
    }

    fn log_domain(&self) -> bool {
        matches!(self.cfg.check_update, CheckUpdate::Ems { .. })
    }

    pub fn group(&self) -> &SymbolGroup {
        &self.group
    }

    pub fn ops(&self) -> &OpCounter {
        &self.ops
    }

    /// Loads channel probabilities (`n * order` values, position-major) and
    /// resets all messages.
    pub fn load(&mut self, probs: &[f64]) -> Result<(), LdpcError> {
        let q = self.group.order();
        if probs.len() != self.code.n() * q {
            return Err(LdpcError::Length { expected: self.code.n() * q, got: probs.len() });
        }
        let floor = if self.log_domain() { LOG_FLOOR } else { f64::NEG_INFINITY };
        for (dst, src) in self.ln_channel.chunks_mut(q).zip(probs.chunks(q)) {
            let mut p = src.to_vec();
            normalize_or_uniform(&mut p);
            for (d, &x) in dst.iter_mut().zip(&p) {
                *d = x.ln().max(floor);
            }
        }
        if self.log_domain() {
            self.c2v.fill(0.0);
        } else {
            self.c2v.fill(1.0 / q as f64);
        }
        self.ln_c2v.fill(-(q as f64).ln());
        Ok(())
    }

    /// Current check-to-variable messages, edge-major.
    pub fn check_messages(&self) -> &[f64] {
        &self.c2v
    }

    /// One flooding iteration: variable update then check update.
    pub fn step(&mut self) {
        self.variable_update();
        self.check_update();
    }

    fn variable_update(&mut self) {
        let q = self.group.order();
        let log_domain = self.log_domain();
        let mut total = vec![0.0; q];
        for v in 0..self.code.n() {
            total.copy_from_slice(&self.ln_channel[v * q..(v + 1) * q]);
            let edges = self.code.var_edges(v);
            for &e in edges {
                let src = if log_domain { &self.c2v } else { &self.ln_c2v };
                for (t, &m) in total.iter_mut().zip(&src[e * q..(e + 1) * q]) {
                    *t += m;
                }
            }
            for &e in edges {
                let src = if log_domain { &self.c2v } else { &self.ln_c2v };
                let out = &mut self.v2c[e * q..(e + 1) * q];
                let mut max = f64::NEG_INFINITY;
                for ((o, &t), &m) in out.iter_mut().zip(&total).zip(&src[e * q..(e + 1) * q]) {
                    *o = t - m;
                    max = max.max(*o);
                }
                if log_domain {
                    out.iter_mut().for_each(|o| *o = (*o - max).max(LOG_FLOOR));
                } else {
                    out.iter_mut().for_each(|o| *o = (*o - max).exp());
                    normalize(out);
                }
            }
        }
    }

    fn check_update(&mut self) {
        let q = self.group.order();
        let code = self.code;
        let g = &self.group;
        let s = &mut self.scratch;
        for c in 0..code.m() {
            let range = code.check_edges(c);
            let d = range.len();
            // input j carries the distribution of h_j * x_j
            for (j, e) in range.clone().enumerate() {
                let h = code.edges()[e].coeff;
                let src = &self.v2c[e * q..(e + 1) * q];
                let dst = &mut s.inputs[j * q..(j + 1) * q];
                for (x, &p) in src.iter().enumerate() {
                    dst[g.act(h, x)] = p;
                }
            }
            match self.cfg.check_update {
                CheckUpdate::Direct => loo_direct(g, d, s, &self.ops),
                CheckUpdate::Fft => loo_fft(g, d, s, &self.ops),
                CheckUpdate::Ems { list_size } => loo_ems(g, d, list_size, self.cfg.ems_offset, s, &self.ops),
            }
            // h_t * x_t = -(sum of the others)
            for (t, e) in range.enumerate() {
                let h = code.edges()[e].coeff;
                let out = &s.outputs[t * q..(t + 1) * q];
                let msg = &mut self.c2v[e * q..(e + 1) * q];
                let damping = self.cfg.damping;
                for (x, m) in msg.iter_mut().enumerate() {
                    let new = out[g.neg(g.act(h, x))];
                    *m = if damping < 1.0 { damping * new + (1.0 - damping) * *m } else { new };
                }
                if matches!(self.cfg.check_update, CheckUpdate::Ems { .. }) {
                    let max = msg.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
                    msg.iter_mut().for_each(|m| *m -= max);
                    debug_assert!(msg.iter().all(|m| m.is_finite() && *m <= 0.0));
                } else {
                    normalize(msg);
                    for m in msg.iter_mut() {
                        *m = m.max(MESSAGE_FLOOR);
                    }
                    debug_assert!((msg.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                    let ln = &mut self.ln_c2v[e * q..(e + 1) * q];
                    for (l, &m) in ln.iter_mut().zip(msg.iter()) {
                        *l = m.ln();
                    }
                }
            }
        }
    }

    /// Unnormalised log posterior, position-major.
    pub fn log_posterior(&self) -> Vec<f64> {
        let q = self.group.order();
        let src = if self.log_domain() { &self.c2v } else { &self.ln_c2v };
        let mut post = self.ln_channel.clone();
        for v in 0..self.code.n() {
            for &e in self.code.var_edges(v) {
                for (p, &m) in post[v * q..(v + 1) * q].iter_mut().zip(&src[e * q..(e + 1) * q]) {
                    *p += m;
                }
            }
        }
        post
    }

    /// Argmax decision (lowest element wins ties) and whether any position
    /// was tied.
    pub fn decision(&self) -> (Vec<usize>, bool) {
        let q = self.group.order();
        let post = self.log_posterior();
        let mut tie = false;
        let decision = post
            .chunks(q)
            .map(|p| {
                let (best, &bv) = p.iter().enumerate().fold((0, &p[0]), |acc, (i, v)| if *v > *acc.1 { (i, v) } else { acc });
                tie |= p.iter().filter(|&&v| v == bv).count() > 1;
                best
            })
            .collect();
        (decision, tie)
    }

    /// Every check sums to the group identity.
    pub fn satisfies_checks(&self, x: &[usize]) -> bool {
        let g = &self.group;
        (0..self.code.m()).all(|c| {
            self.code.edges()[self.code.check_edges(c)].iter().fold(0, |acc, e| g.add(acc, g.act(e.coeff, x[e.var]))) == 0
        })
    }

    /// Iterates until the decision is valid or `max_iter` is reached.
    pub fn run(&mut self) -> DecodeOutcome<Vec<usize>> {
        let mut iterations = 0;
        let mut converged = false;
        for it in 1..=self.cfg.max_iter {
            self.step();
            iterations = it;
            if self.cfg.early_stop {
                let (x, tie) = self.decision();
                if !tie && self.satisfies_checks(&x) {
                    converged = true;
                    break;
                }
            }
        }
        let (decision, tie) = self.decision();
        if !self.cfg.early_stop {
            converged = !tie && self.satisfies_checks(&decision);
        }
        DecodeOutcome { decision, converged, iterations }
    }
}

/// Decodes a nonbinary codeword from per-symbol beliefs.
pub fn decode_cspa(beliefs: &[SymbolBelief], code: &LdpcCode, cfg: &DecoderConfig) -> Result<DecodeOutcome<Vec<u8>>, LdpcError> {
    if beliefs.len() != code.n() {
        return Err(LdpcError::Length { expected: code.n(), got: beliefs.len() });
    }
    let group = SymbolGroup::symbols(code.alphabet());
    let mut dec = GroupDecoder::new(code, group, cfg)?;
    let flat: Vec<f64> = beliefs.iter().flat_map(|b| b.probs().iter().copied()).collect();
    dec.load(&flat)?;
    let out = dec.run();
    Ok(DecodeOutcome { decision: out.decision.into_iter().map(|x| x as u8).collect(), converged: out.converged, iterations: out.iterations })
}

/// Decodes the vector of transmission pairs when both users share `code`.
pub fn decode_gspa(beliefs: &[PairBelief], code: &LdpcCode, cfg: &DecoderConfig) -> Result<DecodeOutcome<Vec<(u8, u8)>>, LdpcError> {
    if beliefs.len() != code.n() {
        return Err(LdpcError::Length { expected: code.n(), got: beliefs.len() });
    }
    let m = code.alphabet().size();
    let group = SymbolGroup::pairs(code.alphabet());
    let mut dec = GroupDecoder::new(code, group, cfg)?;
    let flat: Vec<f64> = beliefs.iter().flat_map(|b| b.probs().iter().copied()).collect();
    dec.load(&flat)?;
    let out = dec.run();
    Ok(DecodeOutcome {
        decision: out.decision.into_iter().map(|x| ((x / m) as u8, (x % m) as u8)).collect(),
        converged: out.converged,
        iterations: out.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Alphabet, AlphabetSpec};
    use crate::ldpc::construct_regular;
    use crate::oracle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_message(rng: &mut ChaCha8Rng, q: usize) -> Vec<f64> {
        let mut p: Vec<f64> = (0..q).map(|_| rng.random::<f64>() + 1e-3).collect();
        normalize_or_uniform(&mut p);
        p
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * x.abs().max(y.abs()).max(1e-12))
    }

    fn specs() -> Vec<AlphabetSpec> {
        vec![
            AlphabetSpec::binary(),
            AlphabetSpec::gf(2).unwrap(),
            AlphabetSpec::gf(3).unwrap(),
            AlphabetSpec::ring(4).unwrap(),
            AlphabetSpec::ring(5).unwrap(),
        ]
    }

    #[test]
    fn check_updates_match_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for spec in specs() {
            let a = Alphabet::new(spec);
            for g in [SymbolGroup::symbols(&a), SymbolGroup::pairs(&a)] {
                let q = g.order();
                let msgs: Vec<Vec<f64>> = (0..4).map(|_| random_message(&mut rng, q)).collect();
                let expect = if g.is_pair_group() {
                    oracle::leave_one_out(q, oracle::pair_add(spec), &msgs)
                } else {
                    oracle::leave_one_out(q, |x, y| oracle::add(spec, x, y), &msgs)
                };
                let ops = OpCounter::new();
                let direct = gspa_check_update_direct(&g, &msgs, &ops);
                let fft = gspa_check_update_2dfft(&g, &msgs, &ops);
                for t in 0..4 {
                    assert!(close(&direct[t], &expect[t], 1e-9), "{spec} direct");
                    assert!(close(&fft[t], &expect[t], 1e-9), "{spec} fft");
                }
            }
        }
    }

    #[test]
    fn full_list_ems_is_max_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let spec = AlphabetSpec::ring(4).unwrap();
        let g = SymbolGroup::pairs(&Alphabet::new(spec));
        let msgs: Vec<Vec<f64>> = (0..4).map(|_| random_message(&mut rng, 16).iter().map(|p| p.ln()).collect()).collect();
        let out = gspa_check_update_ems(&g, &msgs, 16, 0.0, &OpCounter::new());
        let expect = oracle::leave_one_out_max_sum(16, oracle::pair_add(spec), &msgs);
        for t in 0..4 {
            assert!(out[t].iter().zip(&expect[t]).all(|(a, b)| (a - b).abs() < 1e-9));
        }
    }

    #[test]
    fn single_entry_ems_forwards_hard_decision() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let g = SymbolGroup::pairs(&Alphabet::new(AlphabetSpec::gf(2).unwrap()));
        let msgs: Vec<Vec<f64>> = (0..3).map(|_| random_message(&mut rng, 16).iter().map(|p| p.ln()).collect()).collect();
        let out = gspa_check_update_ems(&g, &msgs, 1, 1.0, &OpCounter::new());
        let best: Vec<usize> = msgs.iter().map(|m| (0..16).fold(0, |b, i| if m[i] > m[b] { i } else { b })).collect();
        let expected = g.add(best[1], best[2]);
        assert_eq!(out[0][expected], 0.0);
        assert!(out[0].iter().enumerate().all(|(x, &v)| x == expected || v == -1.0));
    }

    #[test]
    fn delta_message_round_trip_and_uniform_inputs() {
        let g = SymbolGroup::pairs(&Alphabet::new(AlphabetSpec::ring(4).unwrap()));
        let mut delta = vec![0.0; 16];
        delta[5] = 1.0;
        let uniform = vec![1.0 / 16.0; 16];
        let out = gspa_check_update_2dfft(&g, &[delta.clone(), uniform.clone()], &OpCounter::new());
        assert!(close(&out[0], &uniform, 1e-12));
        assert!(close(&out[1], &delta, 1e-12));
        let out = gspa_check_update_2dfft(&g, &[uniform.clone(), uniform.clone(), uniform.clone()], &OpCounter::new());
        assert!(out.iter().all(|m| close(m, &uniform, 1e-12)));
    }

    fn toy(spec: AlphabetSpec) -> LdpcCode {
        construct_regular(8, 4, 2, 4, Alphabet::shared(spec), 1).unwrap()
    }

    fn all_modes(q: usize) -> Vec<DecoderConfig> {
        [CheckUpdate::Direct, CheckUpdate::Fft, CheckUpdate::Ems { list_size: q }]
            .into_iter()
            .map(|c| DecoderConfig::default().with_check_update(c))
            .collect()
    }

    #[test]
    fn delta_beliefs_decode_in_one_iteration() {
        for spec in [AlphabetSpec::ring(4).unwrap(), AlphabetSpec::gf(2).unwrap()] {
            let code = toy(spec);
            let c1 = code.encode(&[1, 2, 3, 0]).unwrap();
            let c2 = code.encode(&[3, 3, 1, 2]).unwrap();
            let beliefs: Vec<SymbolBelief> = c1.iter().map(|&x| SymbolBelief::delta(4, x as usize)).collect();
            for cfg in all_modes(4) {
                let out = decode_cspa(&beliefs, &code, &cfg).unwrap();
                assert!(out.converged);
                assert_eq!(out.iterations, 1);
                assert_eq!(out.decision, c1);
            }
            let pairs: Vec<PairBelief> = c1
                .iter()
                .zip(&c2)
                .map(|(&a, &b)| PairBelief::product(&SymbolBelief::delta(4, a as usize), &SymbolBelief::delta(4, b as usize)))
                .collect();
            for cfg in all_modes(16) {
                let out = decode_gspa(&pairs, &code, &cfg).unwrap();
                assert!(out.converged);
                assert_eq!(out.iterations, 1);
                let expect: Vec<(u8, u8)> = c1.iter().copied().zip(c2.iter().copied()).collect();
                assert_eq!(out.decision, expect);
            }
        }
    }

    fn noisy_beliefs(word: &[u8], q: usize, strength: f64, rng: &mut ChaCha8Rng) -> Vec<SymbolBelief> {
        word.iter()
            .map(|&x| {
                let w = (0..q).map(|s| (strength * rng.random::<f64>() + if s == x as usize { 1.0 } else { 0.0 }).exp()).collect();
                SymbolBelief::from_weights(w)
            })
            .collect()
    }

    #[test]
    fn fft_and_direct_messages_agree_each_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let code = construct_regular(48, 24, 2, 4, Alphabet::shared(AlphabetSpec::gf(3).unwrap()), 2).unwrap();
        let word = code.encode(&(0..24).map(|i| (i % 8) as u8).collect::<Vec<_>>()).unwrap();
        let beliefs = noisy_beliefs(&word, 8, 2.5, &mut rng);
        let flat: Vec<f64> = beliefs.iter().flat_map(|b| b.probs().to_vec()).collect();
        for group in [SymbolGroup::symbols(code.alphabet()), SymbolGroup::pairs(code.alphabet())] {
            let flat = if group.is_pair_group() {
                beliefs.iter().flat_map(|b| PairBelief::product(b, b).probs().to_vec()).collect()
            } else {
                flat.clone()
            };
            let mut direct = GroupDecoder::new(&code, group.clone(), &DecoderConfig::default()).unwrap();
            let mut fft = GroupDecoder::new(&code, group, &DecoderConfig::default().with_check_update(CheckUpdate::Fft)).unwrap();
            direct.load(&flat).unwrap();
            fft.load(&flat).unwrap();
            for _ in 0..10 {
                direct.step();
                fft.step();
                assert!(close(direct.check_messages(), fft.check_messages(), 1e-9));
            }
        }
    }

    #[test]
    fn product_beliefs_with_known_partner_reduce_to_cspa() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let code = toy(AlphabetSpec::ring(4).unwrap());
        for _ in 0..30 {
            let info: Vec<u8> = (0..4).map(|_| rng.random_range(0..4)).collect();
            let word = code.encode(&info).unwrap();
            let beliefs = noisy_beliefs(&word, 4, 1.5, &mut rng);
            let pairs: Vec<PairBelief> = beliefs.iter().map(|b| PairBelief::product(b, &SymbolBelief::delta(4, 0))).collect();
            let cfg = DecoderConfig::default().with_max_iter(20);
            let c = decode_cspa(&beliefs, &code, &cfg).unwrap();
            let g = decode_gspa(&pairs, &code, &cfg).unwrap();
            let user1: Vec<u8> = g.decision.iter().map(|p| p.0).collect();
            assert_eq!(user1, c.decision);
            assert!(g.decision.iter().all(|p| p.1 == 0));
            assert_eq!(c.converged, g.converged);
        }
    }

    #[test]
    fn positive_inputs_keep_true_word_possible() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let code = toy(AlphabetSpec::gf(2).unwrap());
        let word = code.encode(&[2, 0, 1, 3]).unwrap();
        let beliefs = noisy_beliefs(&word, 4, 6.0, &mut rng);
        let pairs: Vec<f64> = beliefs.iter().flat_map(|b| PairBelief::product(b, b).probs().to_vec()).collect();
        let mut dec = GroupDecoder::new(&code, SymbolGroup::pairs(code.alphabet()), &DecoderConfig::default()).unwrap();
        dec.load(&pairs).unwrap();
        for _ in 0..20 {
            dec.step();
            let post = dec.log_posterior();
            for (i, &x) in word.iter().enumerate() {
                assert!(post[i * 16 + x as usize * 5].is_finite());
            }
        }
    }

    fn qpsk_beliefs(word: &[u8], n0: f64, rng: &mut ChaCha8Rng) -> Vec<SymbolBelief> {
        use rand_distr::{Distribution, StandardNormal};
        let point = |s: usize| Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_2 * s as f64);
        word.iter()
            .map(|&s| {
                let (re, im): (f64, f64) = (StandardNormal.sample(rng), StandardNormal.sample(rng));
                let y = point(s as usize) + Complex64::new(re, im) * (n0 / 2.0).sqrt();
                SymbolBelief::from_weights((0..4).map(|x| (-(y - point(x)).norm_sqr() / n0).exp()).collect())
            })
            .collect()
    }

    #[test]
    fn noisy_toy_frames_mostly_match_symbol_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let code = toy(AlphabetSpec::ring(4).unwrap());
        let words = oracle::codewords(&code);
        let mut agree = 0;
        for _ in 0..300 {
            let w = &words[rng.random_range(0..words.len())];
            let beliefs = qpsk_beliefs(w, 10f64.powf(-0.6), &mut rng);
            let probs: Vec<Vec<f64>> = beliefs.iter().map(|b| b.probs().to_vec()).collect();
            let map = oracle::symbol_map(&words, &probs);
            let bp = decode_cspa(&beliefs, &code, &DecoderConfig::default()).unwrap();
            agree += usize::from(map == bp.decision);
        }
        assert!(agree >= 295, "agreement {agree}/300");
    }

    #[test]
    fn rejects_bad_inputs() {
        let code = toy(AlphabetSpec::ring(4).unwrap());
        assert!(SymbolBelief::new(vec![0.5, 0.6, 0.0, 0.0]).is_err());
        assert!(SymbolBelief::new(vec![f64::NAN, 1.0, 0.0, 0.0]).is_err());
        assert!(decode_cspa(&[SymbolBelief::uniform(4)], &code, &DecoderConfig::default()).is_err());
        let cfg = DecoderConfig::default().with_check_update(CheckUpdate::Ems { list_size: 17 });
        let beliefs = vec![PairBelief::product(&SymbolBelief::uniform(4), &SymbolBelief::uniform(4)); 8];
        assert!(decode_gspa(&beliefs, &code, &cfg).is_err());
    }

    #[test]
    fn operation_counts_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for spec in [AlphabetSpec::gf(1).unwrap(), AlphabetSpec::ring(4).unwrap(), AlphabetSpec::gf(3).unwrap()] {
            let g = SymbolGroup::pairs(&Alphabet::new(spec));
            let q = g.order();
            let msgs: Vec<Vec<f64>> = (0..6).map(|_| random_message(&mut rng, q)).collect();
            let (od, of) = (OpCounter::new(), OpCounter::new());
            gspa_check_update_direct(&g, &msgs, &od);
            gspa_check_update_2dfft(&g, &msgs, &of);
            let measured = od.get() as f64 / of.get() as f64;
            let predicted = q as f64 / (q as f64).log2();
            let r = measured / predicted;
            assert!((0.5..=2.0).contains(&r), "{spec}: measured {measured}, predicted {predicted}");
        }
    }
}
