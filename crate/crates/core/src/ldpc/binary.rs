//! Flooding sum-product decoding of binary codes in the LLR domain.
//!
//! LLR convention: positive favours bit 0.

use super::{DecodeOutcome, DecoderConfig, LdpcCode};

/// Channel LLRs are saturated to this magnitude.
pub const LLR_LIMIT: f64 = 1.0e3;
// Keeps atanh finite: check messages stay below ~36 in magnitude.
const TANH_LIMIT: f64 = 1.0 - 1.0e-15;

/// Stateful binary decoder whose check messages survive between calls to
/// [`BinarySpa::iterate`], so outer loops can refresh the channel input
/// without restarting the graph.
pub struct BinarySpa<'a> {
    code: &'a LdpcCode,
    channel: Vec<f64>,
    c2v: Vec<f64>,
    v2c: Vec<f64>,
    damping: f64,
    scratch: Vec<f64>,
    out: Vec<f64>,
}

impl<'a> BinarySpa<'a> {
    pub fn new(code: &'a LdpcCode, damping: f64) -> Self {
        assert_eq!(code.alphabet().size(), 2, "binary SPA needs a GF(2) code");
        let e = code.edges().len();
        BinarySpa {
            code,
            channel: vec![0.0; code.n()],
            c2v: vec![0.0; e],
            v2c: vec![0.0; e],
            damping,
            scratch: Vec::with_capacity(code.dc()),
            out: Vec::with_capacity(code.dc()),
        }
    }

    pub fn set_channel(&mut self, llrs: &[f64]) {
        assert_eq!(llrs.len(), self.code.n());
        for (dst, &l) in self.channel.iter_mut().zip(llrs) {
            *dst = if l.is_nan() { 0.0 } else { l.clamp(-LLR_LIMIT, LLR_LIMIT) };
        }
    }

    /// Clears all check messages.
    pub fn reset(&mut self) {
        self.c2v.fill(0.0);
    }

    /// Runs up to `max_iter` flooding iterations, returning whether the hard
    /// decision became a codeword and how many iterations ran.
    pub fn iterate(&mut self, max_iter: usize, early_stop: bool) -> (bool, usize) {
        for it in 1..=max_iter {
            self.variable_update();
            self.check_update();
            if early_stop && self.converged() {
                return (true, it);
            }
        }
        (self.converged(), max_iter)
    }

    fn variable_update(&mut self) {
        let code = self.code;
        for v in 0..code.n() {
            let edges = code.var_edges(v);
            let total = self.channel[v] + edges.iter().map(|&e| self.c2v[e]).sum::<f64>();
            for &e in edges {
                self.v2c[e] = total - self.c2v[e];
            }
        }
    }

    fn check_update(&mut self) {
        let code = self.code;
        for c in 0..code.m() {
            let range = code.check_edges(c);
            let t = &mut self.scratch;
            t.clear();
            t.extend(self.v2c[range.clone()].iter().map(|&l| (0.5 * l).tanh()));
            // leave-one-out products without division
            let d = t.len();
            let mut prefix = 1.0;
            let out = &mut self.out;
            out.clear();
            out.resize(d, 1.0);
            for i in 0..d {
                out[i] = prefix;
                prefix *= t[i];
            }
            let mut suffix = 1.0;
            for i in (0..d).rev() {
                out[i] *= suffix;
                suffix *= t[i];
            }
            for (i, e) in range.enumerate() {
                let msg = 2.0 * out[i].clamp(-TANH_LIMIT, TANH_LIMIT).atanh();
                self.c2v[e] = if self.damping < 1.0 {
                    self.damping * msg + (1.0 - self.damping) * self.c2v[e]
                } else {
                    msg
                };
            }
        }
    }

    /// A posteriori LLRs.
    pub fn posterior(&self) -> Vec<f64> {
        (0..self.code.n())
            .map(|v| self.channel[v] + self.code.var_edges(v).iter().map(|&e| self.c2v[e]).sum::<f64>())
            .collect()
    }

    /// Extrinsic LLRs: the a posteriori value minus the channel input.
    pub fn extrinsic(&self) -> Vec<f64> {
        (0..self.code.n())
            .map(|v| self.code.var_edges(v).iter().map(|&e| self.c2v[e]).sum::<f64>())
            .collect()
    }

    /// Hard decision; the flag reports an exact tie at some position.
    pub fn decision(&self) -> (Vec<u8>, bool) {
        let post = self.posterior();
        let tie = post.contains(&0.0);
        (post.iter().map(|&l| (l < 0.0) as u8).collect(), tie)
    }

    pub fn converged(&self) -> bool {
        let (bits, tie) = self.decision();
        !tie && self.code.is_codeword(&bits)
    }
}

/// Decodes one frame of bit LLRs.
pub fn decode_binary_spa(llrs: &[f64], code: &LdpcCode, cfg: &DecoderConfig) -> DecodeOutcome<Vec<u8>> {
    let mut dec = BinarySpa::new(code, cfg.damping);
    dec.set_channel(llrs);
    let (converged, iterations) = dec.iterate(cfg.max_iter, cfg.early_stop);
    DecodeOutcome { decision: dec.decision().0, converged, iterations }
}
