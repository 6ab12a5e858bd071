//! Relay receivers: each turns one received frame into an estimate of the
//! network-coded codeword.

use num_complex::Complex64;

use super::demap::{demap_nc_symbol_prob, demap_pair_prob, demap_user_bit_llr, demap_xor_bit_llr};
use super::superimposed::require_unambiguous;
use super::{NcMap, NcRule, PncError, SuperimposedSet};
use crate::channel::ChannelRealization;
use crate::ldpc::{decode_binary_spa, decode_cspa, decode_gspa, BinarySpa, DecoderConfig, LdpcCode, SymbolBelief};

/// One received frame together with the relay's channel knowledge.
#[derive(Clone, Copy, Debug)]
pub struct RelayFrame<'a> {
    pub y: &'a [Complex64],
    /// Superimposed set of each fading block.
    pub sets: &'a [SuperimposedSet],
    pub realization: &'a ChannelRealization,
    pub noise_var: f64,
}

impl RelayFrame<'_> {
    fn check(&self) -> Result<(), PncError> {
        if self.sets.len() != self.realization.blocks() {
            return Err(PncError::Input(format!("{} sets for {} fading blocks", self.sets.len(), self.realization.blocks())));
        }
        if self.y.len() != self.realization.len() {
            return Err(PncError::Input(format!("{} samples for a {}-symbol realization", self.y.len(), self.realization.len())));
        }
        Ok(())
    }

    /// `(sample, set)` for every symbol in order.
    fn samples(&self) -> impl Iterator<Item = (Complex64, &SuperimposedSet)> + '_ {
        (0..self.sets.len()).flat_map(move |b| self.realization.block_range(b).map(move |i| (self.y[i], &self.sets[b])))
    }

    fn bits_per_symbol(&self) -> usize {
        self.sets[0].bits_per_symbol()
    }
}

/// Relay estimate of the NC codeword.
#[derive(Clone, Debug, PartialEq)]
pub struct RelayOutput {
    /// XOR bits for the bit-interleaved receivers, NC symbols otherwise.
    pub nc: Vec<u8>,
    /// Map that produced `nc`; `None` for the bitwise XOR of binary codewords.
    pub map: Option<NcMap>,
    pub converged: bool,
    /// Decoder iterations spent on the frame.
    pub iterations: usize,
    /// Channel decodes attempted (NC-CD may try several maps).
    pub attempts: usize,
}

fn require_binary(code: &LdpcCode, frame: &RelayFrame) -> Result<(), PncError> {
    frame.check()?;
    if code.alphabet().size() != 2 {
        return Err(PncError::Input("bit-interleaved receivers need a binary code".into()));
    }
    if frame.y.len() * frame.bits_per_symbol() != code.n() {
        return Err(PncError::Input(format!(
            "{} symbols of {} bits do not fill a length-{} codeword",
            frame.y.len(),
            frame.bits_per_symbol(),
            code.n()
        )));
    }
    Ok(())
}

fn require_symbols(code: &LdpcCode, frame: &RelayFrame) -> Result<(), PncError> {
    frame.check()?;
    if code.alphabet().size() != frame.sets[0].size() {
        return Err(PncError::Input(format!("code over {} with {}-point constellations", code.alphabet().spec(), frame.sets[0].size())));
    }
    if frame.y.len() != code.n() {
        return Err(PncError::Input(format!("{} symbols for a length-{} code", frame.y.len(), code.n())));
    }
    Ok(())
}

fn require_unique_pairs(frame: &RelayFrame) -> Result<(), PncError> {
    if frame.sets.iter().all(SuperimposedSet::unique_pair) {
        Ok(())
    } else {
        Err(PncError::NotUniquePair)
    }
}

fn xor_llrs(frame: &RelayFrame, prior: Option<&[f64]>) -> Vec<f64> {
    let b = frame.bits_per_symbol();
    let mut llrs = Vec::with_capacity(frame.y.len() * b);
    for (i, (y, set)) in frame.samples().enumerate() {
        llrs.extend(demap_xor_bit_llr(y, set, frame.noise_var, prior.map(|p| &p[i * b..(i + 1) * b])));
    }
    llrs
}

/// XOR-CD: XOR-bit LLRs from each sample, then one binary decode.
pub fn receive_xor_cd(frame: &RelayFrame, code: &LdpcCode, cfg: &DecoderConfig) -> Result<RelayOutput, PncError> {
    require_binary(code, frame)?;
    for set in frame.sets {
        require_unambiguous(set, &NcRule::BitXor)?;
    }
    let out = decode_binary_spa(&xor_llrs(frame, None), code, cfg);
    Ok(RelayOutput { nc: out.decision, map: None, converged: out.converged, iterations: out.iterations, attempts: 1 })
}

/// XOR-CD with `outer` rounds of `inner` decoder iterations, the decoder's
/// extrinsic LLRs feeding back into the demapper as XOR-bit priors.
pub fn receive_iterative_xor_cd(
    frame: &RelayFrame,
    code: &LdpcCode,
    cfg: &DecoderConfig,
    outer: usize,
    inner: usize,
) -> Result<RelayOutput, PncError> {
    require_binary(code, frame)?;
    for set in frame.sets {
        require_unambiguous(set, &NcRule::BitXor)?;
    }
    let mut dec = BinarySpa::new(code, cfg.damping);
    let mut prior: Option<Vec<f64>> = None;
    let (mut converged, mut iterations) = (false, 0);
    for _ in 0..outer.max(1) {
        dec.set_channel(&xor_llrs(frame, prior.as_deref()));
        let (c, it) = dec.iterate(inner, cfg.early_stop);
        converged = c;
        iterations += it;
        if converged {
            break;
        }
        prior = Some(dec.extrinsic());
    }
    Ok(RelayOutput { nc: dec.decision().0, map: None, converged, iterations, attempts: 1 })
}

fn user_llrs(frame: &RelayFrame, p1: Option<&[f64]>, p2: Option<&[f64]>) -> (Vec<f64>, Vec<f64>) {
    let b = frame.bits_per_symbol();
    let (mut l1, mut l2) = (Vec::with_capacity(frame.y.len() * b), Vec::with_capacity(frame.y.len() * b));
    for (i, (y, set)) in frame.samples().enumerate() {
        let r = i * b..(i + 1) * b;
        let (a, c) = demap_user_bit_llr(y, set, frame.noise_var, p1.map(|p| &p[r.clone()]), p2.map(|p| &p[r]));
        l1.extend(a);
        l2.extend(c);
    }
    (l1, l2)
}

/// MUD-XOR: decode both users' codewords and XOR them. With `schedule =
/// Some((rounds, inner))` the two decoders exchange extrinsic information
/// through the demapper between rounds.
pub fn receive_mud_xor(
    frame: &RelayFrame,
    code: &LdpcCode,
    cfg: &DecoderConfig,
    schedule: Option<(usize, usize)>,
) -> Result<RelayOutput, PncError> {
    require_binary(code, frame)?;
    require_unique_pairs(frame)?;
    let xor = |a: &[u8], b: &[u8]| a.iter().zip(b).map(|(x, y)| x ^ y).collect::<Vec<u8>>();
    let Some((rounds, inner)) = schedule else {
        let (l1, l2) = user_llrs(frame, None, None);
        let d1 = decode_binary_spa(&l1, code, cfg);
        let d2 = decode_binary_spa(&l2, code, cfg);
        return Ok(RelayOutput {
            nc: xor(&d1.decision, &d2.decision),
            map: None,
            converged: d1.converged && d2.converged,
            iterations: d1.iterations.max(d2.iterations),
            attempts: 1,
        });
    };
    let mut dec1 = BinarySpa::new(code, cfg.damping);
    let mut dec2 = BinarySpa::new(code, cfg.damping);
    let (mut p1, mut p2): (Option<Vec<f64>>, Option<Vec<f64>>) = (None, None);
    let (mut c1, mut c2, mut it1, mut it2) = (false, false, 0, 0);
    for _ in 0..rounds.max(1) {
        let (l1, l2) = user_llrs(frame, p1.as_deref(), p2.as_deref());
        if !c1 {
            dec1.set_channel(&l1);
            let (c, it) = dec1.iterate(inner, cfg.early_stop);
            c1 = c;
            it1 += it;
        }
        if !c2 {
            dec2.set_channel(&l2);
            let (c, it) = dec2.iterate(inner, cfg.early_stop);
            c2 = c;
            it2 += it;
        }
        if c1 && c2 {
            break;
        }
        p1 = Some(dec1.extrinsic());
        p2 = Some(dec2.extrinsic());
    }
    Ok(RelayOutput {
        nc: xor(&dec1.decision().0, &dec2.decision().0),
        map: None,
        converged: c1 && c2,
        iterations: it1.max(it2),
        attempts: 1,
    })
}

/// Order in which NC-CD tries coefficient pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientStrategy {
    /// Every unit pair in lexicographic order.
    AllPairs,
    /// The selected pair first, then the others in lexicographic order.
    Selected,
}

/// NC-CD: decode the NC codeword directly from NC-symbol beliefs, trying
/// coefficient pairs until one decode satisfies every check. On total
/// failure the attempt with `selected` is returned unconverged.
pub fn receive_nc_cd(
    frame: &RelayFrame,
    code: &LdpcCode,
    cfg: &DecoderConfig,
    strategy: CoefficientStrategy,
    selected: &NcMap,
) -> Result<RelayOutput, PncError> {
    require_symbols(code, frame)?;
    let alphabet = code.alphabet();
    let mut candidates = Vec::new();
    if strategy == CoefficientStrategy::Selected {
        candidates.push(selected.clone());
    }
    for &a in alphabet.unit_values() {
        for &b in alphabet.unit_values() {
            let map = NcMap::new(alphabet.clone(), a, b)?;
            if strategy == CoefficientStrategy::AllPairs || map != *selected {
                candidates.push(map);
            }
        }
    }
    let mut fallback = None;
    let mut iterations = 0;
    for (attempt, map) in candidates.into_iter().enumerate() {
        let rule = NcRule::Linear(map.clone());
        let beliefs: Vec<SymbolBelief> = frame.samples().map(|(y, set)| demap_nc_symbol_prob(y, set, &rule, frame.noise_var)).collect();
        let out = decode_cspa(&beliefs, code, cfg)?;
        iterations += out.iterations;
        if out.converged {
            return Ok(RelayOutput { nc: out.decision, map: Some(map), converged: true, iterations, attempts: attempt + 1 });
        }
        if map == *selected {
            fallback = Some(out.decision);
        }
    }
    let attempts = alphabet.unit_values().len().pow(2);
    Ok(RelayOutput {
        nc: fallback.expect("selected map is a candidate"),
        map: Some(selected.clone()),
        converged: false,
        iterations,
        attempts,
    })
}

/// CD-NC: decode the pair codeword over the product alphabet, then map each
/// decided pair with `map`.
pub fn receive_cd_nc(frame: &RelayFrame, code: &LdpcCode, cfg: &DecoderConfig, map: &NcMap) -> Result<RelayOutput, PncError> {
    require_symbols(code, frame)?;
    let beliefs: Vec<_> = frame.samples().map(|(y, set)| demap_pair_prob(y, set, frame.noise_var)).collect();
    let out = decode_gspa(&beliefs, code, cfg)?;
    Ok(RelayOutput {
        nc: out.decision.iter().map(|&(s1, s2)| map.apply(s1, s2)).collect(),
        map: Some(map.clone()),
        converged: out.converged,
        iterations: out.iterations,
        attempts: 1,
    })
}

/// MUD-NC: decode each user's codeword from its marginal beliefs, then map.
pub fn receive_mud_nc(frame: &RelayFrame, code: &LdpcCode, cfg: &DecoderConfig, map: &NcMap) -> Result<RelayOutput, PncError> {
    require_symbols(code, frame)?;
    require_unique_pairs(frame)?;
    let (mut b1, mut b2) = (Vec::with_capacity(code.n()), Vec::with_capacity(code.n()));
    for (y, set) in frame.samples() {
        let pair = demap_pair_prob(y, set, frame.noise_var);
        b1.push(pair.marginal(0));
        b2.push(pair.marginal(1));
    }
    let d1 = decode_cspa(&b1, code, cfg)?;
    let d2 = decode_cspa(&b2, code, cfg)?;
    Ok(RelayOutput {
        nc: map.apply_vec(&d1.decision, &d2.decision),
        map: Some(map.clone()),
        converged: d1.converged && d2.converged,
        iterations: d1.iterations.max(d2.iterations),
        attempts: 1,
    })
}
