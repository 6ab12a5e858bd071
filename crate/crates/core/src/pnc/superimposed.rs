//! The constellation seen by the relay: every transmission pair mapped to
//! `h1 x1 + h2 x2`.

use std::fmt::Write as _;

use num_complex::Complex64;

use super::{exclusive_law, NcMap, PncError};
use crate::algebra::Alphabet;
use crate::modem::Constellation;
use std::sync::Arc;

/// Absolute distance below which superimposed points are merged.
pub const MERGE_TOLERANCE: f64 = 1.0e-9;
const TIE_TOLERANCE: f64 = 1.0e-12;

/// What the relay wants from a transmission pair.
#[derive(Clone, Debug, PartialEq)]
pub enum NcRule {
    /// XOR of the two bit labels (bit-interleaved receivers).
    BitXor,
    /// Linear map of the two symbols.
    Linear(NcMap),
}

impl NcRule {
    fn describe(&self) -> String {
        match self {
            NcRule::BitXor => "bitwise XOR".into(),
            NcRule::Linear(m) => m.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SetEntry {
    pub point: Complex64,
    pub pairs: Vec<(u8, u8)>,
}

/// All `M^2` superimposed points, flat at `s1 * M + s2`, plus their
/// clustering into distinct points.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperimposedSet {
    m: usize,
    h1: Complex64,
    h2: Complex64,
    tolerance: f64,
    pair_points: Vec<Complex64>,
    bits1: Vec<u16>,
    bits2: Vec<u16>,
    entries: Vec<SetEntry>,
    entry_of_pair: Vec<usize>,
}

/// Superimposes `h1 * cA` and `h2 * cB` and merges points closer than
/// `tolerance`.
pub fn build_superimposed_set(
    ca: &Constellation,
    cb: &Constellation,
    h1: Complex64,
    h2: Complex64,
    tolerance: f64,
) -> Result<SuperimposedSet, PncError> {
    let m = ca.size();
    if cb.size() != m {
        return Err(PncError::Input(format!("constellation sizes differ: {m} vs {}", cb.size())));
    }
    let mut pair_points = Vec::with_capacity(m * m);
    for s1 in 0..m as u8 {
        for s2 in 0..m as u8 {
            pair_points.push(h1 * ca.point(s1) + h2 * cb.point(s2));
        }
    }
    let mut entries: Vec<SetEntry> = Vec::new();
    let mut entry_of_pair = Vec::with_capacity(m * m);
    for (p, &pt) in pair_points.iter().enumerate() {
        let pair = ((p / m) as u8, (p % m) as u8);
        match entries.iter().position(|e| (e.point - pt).norm() <= tolerance) {
            Some(i) => {
                entries[i].pairs.push(pair);
                entry_of_pair.push(i);
            }
            None => {
                entry_of_pair.push(entries.len());
                entries.push(SetEntry { point: pt, pairs: vec![pair] });
            }
        }
    }
    Ok(SuperimposedSet {
        m,
        h1,
        h2,
        tolerance,
        pair_points,
        bits1: (0..m as u8).map(|s| ca.bits_of(s)).collect(),
        bits2: (0..m as u8).map(|s| cb.bits_of(s)).collect(),
        entries,
        entry_of_pair,
    })
}

impl SuperimposedSet {
    pub fn size(&self) -> usize {
        self.m
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.m.trailing_zeros() as usize
    }

    pub fn gains(&self) -> (Complex64, Complex64) {
        (self.h1, self.h2)
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn entries(&self) -> &[SetEntry] {
        &self.entries
    }

    /// Superimposed point of every pair, `s1 * M + s2`.
    pub fn pair_points(&self) -> &[Complex64] {
        &self.pair_points
    }

    pub fn user_bits(&self, s1: u8, s2: u8) -> (u16, u16) {
        (self.bits1[s1 as usize], self.bits2[s2 as usize])
    }

    /// NC value of a pair under `rule`.
    #[inline]
    pub fn nc_value(&self, rule: &NcRule, s1: u8, s2: u8) -> u16 {
        match rule {
            NcRule::BitXor => self.bits1[s1 as usize] ^ self.bits2[s2 as usize],
            NcRule::Linear(map) => map.apply(s1, s2) as u16,
        }
    }

    pub fn unique_pair(&self) -> bool {
        self.entries.len() == self.m * self.m
    }

    fn entry_is_ambiguous(&self, entry: &SetEntry, rule: &NcRule) -> bool {
        let (s1, s2) = entry.pairs[0];
        let v = self.nc_value(rule, s1, s2);
        entry.pairs.iter().any(|&(x, y)| self.nc_value(rule, x, y) != v)
    }

    /// `entry,re,im,s1,s2,nc,ambiguous`, one row per transmission pair.
    pub fn to_csv(&self, rule: &NcRule) -> String {
        let mut out = String::from("entry,re,im,s1,s2,nc,ambiguous\n");
        for (i, e) in self.entries.iter().enumerate() {
            let amb = u8::from(self.entry_is_ambiguous(e, rule));
            for &(s1, s2) in &e.pairs {
                let _ = writeln!(
                    out,
                    "{i},{:.12},{:.12},{s1},{s2},{},{amb}",
                    e.point.re,
                    e.point.im,
                    self.nc_value(rule, s1, s2)
                );
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmbiguityReport {
    pub is_exclusive: bool,
    /// Indices of entries whose pairs carry more than one NC value.
    pub ambiguous_entries: Vec<usize>,
    pub unique_pair: bool,
}

impl AmbiguityReport {
    pub fn is_ambiguous(&self) -> bool {
        !self.ambiguous_entries.is_empty()
    }
}

pub fn detect_ambiguity(set: &SuperimposedSet, rule: &NcRule) -> AmbiguityReport {
    let ambiguous_entries = (0..set.entries.len()).filter(|&i| set.entry_is_ambiguous(&set.entries[i], rule)).collect();
    let is_exclusive = match rule {
        NcRule::BitXor => true,
        NcRule::Linear(map) => {
            let (a, b) = map.coefficients();
            exclusive_law(map.alphabet(), a, b)
        }
    };
    AmbiguityReport { is_exclusive, ambiguous_entries, unique_pair: set.unique_pair() }
}

pub(crate) fn require_unambiguous(set: &SuperimposedSet, rule: &NcRule) -> Result<(), PncError> {
    if set.entries.iter().any(|e| set.entry_is_ambiguous(e, rule)) {
        Err(PncError::Ambiguous(rule.describe()))
    } else {
        Ok(())
    }
}

/// Smallest distance between superimposed points carrying different NC
/// values; zero when some point is ambiguous.
pub fn effective_min_distance(set: &SuperimposedSet, rule: &NcRule) -> f64 {
    let mut values = Vec::with_capacity(set.entries.len());
    for e in &set.entries {
        if set.entry_is_ambiguous(e, rule) {
            return 0.0;
        }
        values.push(set.nc_value(rule, e.pairs[0].0, e.pairs[0].1));
    }
    let mut best = f64::INFINITY;
    for i in 0..set.entries.len() {
        for j in i + 1..set.entries.len() {
            if values[i] != values[j] {
                best = best.min((set.entries[i].point - set.entries[j].point).norm());
            }
        }
    }
    best
}

/// Unit pair maximising the effective minimum distance on `set`; ties go to
/// the lexicographically smallest `(a, b)`.
pub fn select_coefficients_for_set(set: &SuperimposedSet, alphabet: &Arc<Alphabet>) -> NcMap {
    let mut best: Option<(f64, NcMap)> = None;
    for &a in alphabet.unit_values() {
        for &b in alphabet.unit_values() {
            let map = NcMap::new(alphabet.clone(), a, b).expect("units");
            let d = effective_min_distance(set, &NcRule::Linear(map.clone()));
            let better = match &best {
                None => true,
                Some((bd, _)) => d > bd * (1.0 + TIE_TOLERANCE) && d - bd > TIE_TOLERANCE,
            };
            if better {
                best = Some((d, map));
            }
        }
    }
    best.expect("alphabet has units").1
}

pub fn select_coefficients(
    ca: &Constellation,
    cb: &Constellation,
    h1: Complex64,
    h2: Complex64,
    alphabet: &Arc<Alphabet>,
) -> Result<NcMap, PncError> {
    if ca.size() != alphabet.size() {
        return Err(PncError::Input(format!("constellation size {} does not match {}", ca.size(), alphabet.spec())));
    }
    let set = build_superimposed_set(ca, cb, h1, h2, MERGE_TOLERANCE)?;
    Ok(select_coefficients_for_set(&set, alphabet))
}
