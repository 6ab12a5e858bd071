//! Regular LDPC codes over GF(2^r) and Z_M, and the belief-propagation
//! decoder family used by the relay receivers.

mod alist;
mod binary;
mod config;
mod construct;
mod encode;
mod engine;
pub mod ems;
pub mod group;

use std::sync::Arc;

use thiserror::Error;

use crate::algebra::{Alphabet, AlphabetSpec};

pub use binary::{decode_binary_spa, BinarySpa};
pub use config::{CheckUpdate, DecodeOutcome, DecoderConfig};
pub use construct::construct_regular;
pub use encode::EncoderPlan;
pub use engine::{
    decode_cspa, decode_gspa, gspa_check_update_2dfft, gspa_check_update_direct, gspa_check_update_ems,
    GroupDecoder, PairBelief, SymbolBelief,
};
pub use group::{OpCounter, SymbolGroup};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LdpcError {
    #[error("infeasible degrees: n*dv = {lhs} but (n-k)*dc = {rhs}")]
    DegreeEquation { lhs: usize, rhs: usize },
    #[error("invalid code parameters: {0}")]
    Parameters(String),
    #[error("no girth-6 regular code found after {0} attempts")]
    Construction(usize),
    #[error("word length {got} does not match code length {expected}")]
    Length { expected: usize, got: usize },
    #[error("symbol {value} outside alphabet {alphabet}")]
    Symbol { value: u8, alphabet: AlphabetSpec },
    #[error("alist parse error: {0}")]
    Alist(String),
    #[error("invalid decoder configuration: {0}")]
    Config(String),
}

/// One nonzero entry of the parity-check matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub check: usize,
    pub var: usize,
    pub coeff: u8,
}

/// A sparse parity-check matrix with alphabet-valued entries plus its
/// systematic encoder.
///
/// Edges are stored grouped by check row; `var_edges[v]` lists the edge ids
/// incident to variable `v` in increasing check order.
#[derive(Clone, Debug)]
pub struct LdpcCode {
    n: usize,
    k: usize,
    dv: usize,
    dc: usize,
    alphabet: Arc<Alphabet>,
    edges: Vec<Edge>,
    row_start: Vec<usize>,
    var_edges: Vec<Vec<usize>>,
    plan: EncoderPlan,
}

impl LdpcCode {
    /// Assembles a code from explicit rows `(column, coefficient)`.
    ///
    /// Fails when the matrix is not encodable with `k` information symbols
    /// (for rings: when unit-pivot elimination leaves a non-zero residue).
    pub fn from_rows(n: usize, k: usize, alphabet: Arc<Alphabet>, rows: Vec<Vec<(usize, u8)>>) -> Result<Self, LdpcError> {
        let m = rows.len();
        if k == 0 || k >= n || m == 0 {
            return Err(LdpcError::Parameters(format!("n={n}, k={k}, m={m}")));
        }
        let mut edges = Vec::new();
        let mut row_start = Vec::with_capacity(m + 1);
        let mut var_edges = vec![Vec::new(); n];
        for (check, row) in rows.iter().enumerate() {
            row_start.push(edges.len());
            let mut row = row.clone();
            row.sort_unstable_by_key(|&(c, _)| c);
            for w in row.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(LdpcError::Parameters(format!("duplicate entry in row {check}")));
                }
            }
            for (var, coeff) in row {
                if var >= n || coeff == 0 || coeff as usize >= alphabet.size() {
                    return Err(LdpcError::Parameters(format!("bad entry ({check}, {var}) = {coeff}")));
                }
                var_edges[var].push(edges.len());
                edges.push(Edge { check, var, coeff });
            }
        }
        row_start.push(edges.len());
        let dv = var_edges.iter().map(Vec::len).max().unwrap_or(0);
        let dc = (0..m).map(|c| row_start[c + 1] - row_start[c]).max().unwrap_or(0);
        let plan = EncoderPlan::build(n, k, &alphabet, &rows)
            .ok_or_else(|| LdpcError::Parameters("parity-check matrix not encodable".into()))?;
        Ok(LdpcCode { n, k, dv, dc, alphabet, edges, row_start, var_edges, plan })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of parity checks (rows of H).
    pub fn m(&self) -> usize {
        self.row_start.len() - 1
    }

    pub fn dv(&self) -> usize {
        self.dv
    }

    pub fn dc(&self) -> usize {
        self.dc
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn check_edges(&self, check: usize) -> std::ops::Range<usize> {
        self.row_start[check]..self.row_start[check + 1]
    }

    pub fn var_edges(&self, var: usize) -> &[usize] {
        &self.var_edges[var]
    }

    pub fn encoder_plan(&self) -> &EncoderPlan {
        &self.plan
    }

    /// Positions of the information symbols inside a codeword.
    pub fn info_positions(&self) -> &[usize] {
        self.plan.info_positions()
    }

    /// Dense copy of H, `m` rows by `n` columns.
    pub fn dense(&self) -> Vec<Vec<u8>> {
        let mut h = vec![vec![0u8; self.n]; self.m()];
        for e in &self.edges {
            h[e.check][e.var] = e.coeff;
        }
        h
    }

    /// Row i of the result is `sum_j H[i][j] * word[j]`.
    pub fn syndrome(&self, word: &[u8]) -> Result<Vec<u8>, LdpcError> {
        if word.len() != self.n {
            return Err(LdpcError::Length { expected: self.n, got: word.len() });
        }
        Ok((0..self.m()).map(|c| self.check_sum(c, word)).collect())
    }

    pub fn is_codeword(&self, word: &[u8]) -> bool {
        word.len() == self.n && (0..self.m()).all(|c| self.check_sum(c, word) == 0)
    }

    fn check_sum(&self, check: usize, word: &[u8]) -> u8 {
        let a = &self.alphabet;
        self.edges[self.check_edges(check)]
            .iter()
            .fold(0u8, |acc, e| a.add_raw(acc, a.mul_raw(e.coeff, word[e.var])))
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>, LdpcError> {
        if info.len() != self.k {
            return Err(LdpcError::Length { expected: self.k, got: info.len() });
        }
        if let Some(&value) = info.iter().find(|&&s| s as usize >= self.alphabet.size()) {
            return Err(LdpcError::Symbol { value, alphabet: self.alphabet.spec() });
        }
        let word = self.plan.encode(&self.alphabet, info);
        debug_assert!(self.is_codeword(&word));
        Ok(word)
    }

    /// Reads the information symbols out of a codeword.
    pub fn extract_info(&self, word: &[u8]) -> Vec<u8> {
        self.plan.info_positions().iter().map(|&p| word[p]).collect()
    }

    /// Length of the shortest cycle in the Tanner graph, `None` if acyclic.
    pub fn girth(&self) -> Option<usize> {
        construct::tanner_girth(self.n, self.m(), &self.edges)
    }

    pub fn to_alist(&self) -> String {
        alist::write(self)
    }

    pub fn from_alist(text: &str, k: usize, alphabet: Arc<Alphabet>) -> Result<Self, LdpcError> {
        alist::read(text, k, alphabet)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_z4() -> LdpcCode {
        construct_regular(8, 4, 2, 4, Alphabet::shared(AlphabetSpec::ring(4).unwrap()), 1).unwrap()
    }

    #[test]
    fn zero_info_gives_zero_codeword() {
        let code = toy_z4();
        assert_eq!(code.encode(&[0; 4]).unwrap(), vec![0; 8]);
    }

    #[test]
    fn syndrome_of_zero_word_is_zero() {
        let code = toy_z4();
        assert!(code.syndrome(&[0; 8]).unwrap().iter().all(|&s| s == 0));
        assert!(code.syndrome(&[0; 7]).is_err());
    }

    #[test]
    fn unit_corruption_breaks_syndrome() {
        let code = toy_z4();
        let word = code.encode(&[1, 2, 3, 0]).unwrap();
        for pos in 0..8 {
            for unit in [1u8, 3] {
                let mut bad = word.clone();
                bad[pos] = code.alphabet().add_raw(bad[pos], unit);
                assert!(code.syndrome(&bad).unwrap().iter().any(|&s| s != 0));
            }
        }
    }

    #[test]
    fn encode_rejects_bad_input() {
        let code = toy_z4();
        assert!(matches!(code.encode(&[0; 3]), Err(LdpcError::Length { .. })));
        assert!(matches!(code.encode(&[4, 0, 0, 0]), Err(LdpcError::Symbol { .. })));
    }

    #[test]
    fn systematic_positions_carry_info() {
        let code = toy_z4();
        let info = [3, 1, 0, 2];
        let word = code.encode(&info).unwrap();
        assert_eq!(code.extract_info(&word), info);
    }
}
