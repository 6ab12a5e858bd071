//! Progressive-edge-growth construction of regular codes.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Edge, LdpcCode, LdpcError};
use crate::algebra::Alphabet;
use crate::rng::mix_seed;

const MAX_ATTEMPTS: u64 = 64;

/// Builds a (dv, dc)-regular code with `n` symbols and `k` information
/// symbols.
///
/// Edges are placed greedily, each new edge going to a check as far as
/// possible from the variable in the current Tanner graph, with ties broken
/// by check degree and then by the seeded RNG. No 4-cycles are allowed
/// unless the counting bound proves girth 6 impossible for these parameters
/// (for instance the (8, 4, 2, 4) toy code), in which case the search only
/// maximizes local girth. Entries are drawn uniformly from the units of the
/// alphabet. Attempts that fail to close the degree profile or to yield an
/// encodable matrix are retried with a derived seed.
pub fn construct_regular(
    n: usize,
    k: usize,
    dv: usize,
    dc: usize,
    alphabet: Arc<Alphabet>,
    seed: u64,
) -> Result<LdpcCode, LdpcError> {
    if k == 0 || k >= n || dv == 0 || dc < 2 {
        return Err(LdpcError::Parameters(format!("n={n}, k={k}, dv={dv}, dc={dc}")));
    }
    let m = n - k;
    if n * dv != m * dc {
        return Err(LdpcError::DegreeEquation { lhs: n * dv, rhs: m * dc });
    }
    if dc > n || dv > m {
        return Err(LdpcError::Parameters(format!("degrees ({dv}, {dc}) exceed matrix size {m}x{n}")));
    }
    let strict = girth6_admissible(n, m, dv, dc);
    let units = alphabet.unit_values().to_vec();
    // Over an even ring every unit is odd, so with even dv the rows of H sum
    // to zero mod 2 and elimination leaves non-unit residues. Tie the
    // coefficients so a unit-weighted row sum vanishes exactly instead.
    let balanced = !alphabet.spec().is_field() && alphabet.size().is_multiple_of(2) && dv.is_multiple_of(2);
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, attempt]));
        let Some(check_vars) = peg(n, m, dv, dc, strict, &mut rng) else {
            continue;
        };
        let rows = if balanced {
            balanced_rows(&check_vars, n, &alphabet, &units, &mut rng)
        } else {
            check_vars
                .into_iter()
                .map(|vars| vars.into_iter().map(|v| (v, *units.choose(&mut rng).expect("units"))).collect())
                .collect()
        };
        if let Ok(code) = LdpcCode::from_rows(n, k, alphabet.clone(), rows) {
            return Ok(code);
        }
    }
    Err(LdpcError::Construction(MAX_ATTEMPTS as usize))
}

/// Unit coefficients such that `sum_c w_c H[c][v] = 0` for every column,
/// with random unit weights `w`.
fn balanced_rows(
    check_vars: &[Vec<usize>],
    n: usize,
    a: &Alphabet,
    units: &[u8],
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<(usize, u8)>> {
    let weights: Vec<u8> = check_vars.iter().map(|_| *units.choose(rng).expect("units")).collect();
    let mut slots: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (c, vars) in check_vars.iter().enumerate() {
        for (i, &v) in vars.iter().enumerate() {
            slots[v].push((c, i));
        }
    }
    let mut rows: Vec<Vec<(usize, u8)>> = check_vars.iter().map(|vars| vars.iter().map(|&v| (v, 0)).collect()).collect();
    for col in &slots {
        let (&(last_c, last_i), rest) = col.split_last().expect("dv >= 1");
        loop {
            let mut acc = 0u8;
            let coeffs: Vec<u8> = rest
                .iter()
                .map(|&(c, _)| {
                    let h = *units.choose(rng).expect("units");
                    acc = a.add_raw(acc, a.mul_raw(weights[c], h));
                    h
                })
                .collect();
            let w_inv = a.inv_raw(weights[last_c]).expect("unit weight");
            let h_last = a.mul_raw(a.neg_raw(acc), w_inv);
            if a.is_unit_raw(h_last) {
                for (&(c, i), h) in rest.iter().zip(coeffs) {
                    rows[c][i].1 = h;
                }
                rows[last_c][last_i].1 = h_last;
                break;
            }
        }
    }
    rows
}

/// Necessary counting conditions for a 4-cycle-free (dv, dc)-regular graph:
/// two checks share at most one variable and two variables share at most one
/// check.
fn girth6_admissible(n: usize, m: usize, dv: usize, dc: usize) -> bool {
    let pairs = |x: usize| x * x.saturating_sub(1) / 2;
    n * pairs(dv) <= pairs(m) && m * pairs(dc) <= pairs(n)
}

fn peg(n: usize, m: usize, dv: usize, dc: usize, strict: bool, rng: &mut ChaCha8Rng) -> Option<Vec<Vec<usize>>> {
    let mut var_checks: Vec<Vec<usize>> = vec![Vec::with_capacity(dv); n];
    let mut check_vars: Vec<Vec<usize>> = vec![Vec::with_capacity(dc); m];
    let mut depth = vec![usize::MAX; m];
    let mut seen_var = vec![false; n];
    let mut candidates = Vec::new();
    for v in 0..n {
        for _ in 0..dv {
            depth.fill(usize::MAX);
            seen_var.fill(false);
            expand(v, &var_checks, &check_vars, &mut depth, &mut seen_var);
            // Prefer unreached checks, then the most distant ones.
            let far = (0..m)
                .filter(|&c| check_vars[c].len() < dc && depth[c] != 0)
                .map(|c| depth[c])
                .max()?;
            if strict && far <= 1 {
                return None;
            }
            let min_deg = (0..m)
                .filter(|&c| check_vars[c].len() < dc && depth[c] == far)
                .map(|c| check_vars[c].len())
                .min()?;
            candidates.clear();
            candidates.extend((0..m).filter(|&c| depth[c] == far && check_vars[c].len() == min_deg));
            let c = candidates[rng.random_range(0..candidates.len())];
            var_checks[v].push(c);
            check_vars[c].push(v);
        }
    }
    Some(check_vars)
}

/// Breadth-first expansion from `root`; `depth[c]` becomes the number of
/// check-to-check hops needed to reach `c` (0 for direct neighbours).
fn expand(root: usize, var_checks: &[Vec<usize>], check_vars: &[Vec<usize>], depth: &mut [usize], seen_var: &mut [bool]) {
    seen_var[root] = true;
    let mut frontier: Vec<usize> = var_checks[root].clone();
    for &c in &frontier {
        depth[c] = 0;
    }
    let mut level = 0;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &c in &frontier {
            for &u in &check_vars[c] {
                if seen_var[u] {
                    continue;
                }
                seen_var[u] = true;
                for &c2 in &var_checks[u] {
                    if depth[c2] == usize::MAX {
                        depth[c2] = level + 1;
                        next.push(c2);
                    }
                }
            }
        }
        frontier = next;
        level += 1;
    }
}

/// Exact girth of the bipartite Tanner graph by BFS from every node.
pub(crate) fn tanner_girth(n: usize, m: usize, edges: &[Edge]) -> Option<usize> {
    // nodes 0..n are variables, n..n+m checks
    let mut adj = vec![Vec::new(); n + m];
    for e in edges {
        adj[e.var].push(n + e.check);
        adj[n + e.check].push(e.var);
    }
    let mut best = usize::MAX;
    let mut dist = vec![usize::MAX; n + m];
    let mut parent = vec![usize::MAX; n + m];
    let mut queue = VecDeque::new();
    for root in 0..n + m {
        dist.fill(usize::MAX);
        parent.fill(usize::MAX);
        dist[root] = 0;
        queue.clear();
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            if 2 * dist[u] + 1 >= best {
                break;
            }
            for &w in &adj[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    queue.push_back(w);
                } else if parent[u] != w {
                    best = best.min(dist[u] + dist[w] + 1);
                }
            }
        }
    }
    (best != usize::MAX).then_some(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlphabetSpec;

    fn alphabet(spec: AlphabetSpec) -> Arc<Alphabet> {
        Alphabet::shared(spec)
    }

    fn assert_regular(code: &LdpcCode) {
        for v in 0..code.n() {
            assert_eq!(code.var_edges(v).len(), code.dv());
        }
        for c in 0..code.m() {
            assert_eq!(code.check_edges(c).len(), code.dc());
        }
        assert_eq!(code.n() * code.dv(), code.m() * code.dc());
    }

    #[test]
    fn rejects_infeasible_degrees() {
        let a = alphabet(AlphabetSpec::binary());
        assert!(matches!(construct_regular(10, 5, 3, 5, a.clone(), 0), Err(LdpcError::DegreeEquation { .. })));
        assert!(construct_regular(10, 10, 3, 6, a, 0).is_err());
    }

    #[test]
    fn deterministic_for_seed() {
        let a = alphabet(AlphabetSpec::gf(3).unwrap());
        let c1 = construct_regular(96, 48, 2, 4, a.clone(), 7).unwrap();
        let c2 = construct_regular(96, 48, 2, 4, a.clone(), 7).unwrap();
        let c3 = construct_regular(96, 48, 2, 4, a, 8).unwrap();
        assert_eq!(c1.dense(), c2.dense());
        assert_ne!(c1.dense(), c3.dense());
    }

    #[test]
    fn binary_code_is_regular_with_girth_six() {
        let code = construct_regular(204, 102, 3, 6, alphabet(AlphabetSpec::binary()), 3).unwrap();
        assert_regular(&code);
        assert!(code.girth().unwrap() >= 6);
        assert_eq!(code.rate(), 0.5);
    }

    #[test]
    fn ring_entries_are_units() {
        let a = alphabet(AlphabetSpec::ring(4).unwrap());
        let code = construct_regular(120, 60, 2, 4, a.clone(), 5).unwrap();
        assert_regular(&code);
        assert!(code.edges().iter().all(|e| a.is_unit_raw(e.coeff)));
        assert!(code.girth().unwrap() >= 6);
    }

    #[test]
    fn toy_code_relaxes_girth() {
        assert!(!girth6_admissible(8, 4, 2, 4));
        let code = construct_regular(8, 4, 2, 4, alphabet(AlphabetSpec::ring(4).unwrap()), 1).unwrap();
        assert_regular(&code);
        assert_eq!(code.girth(), Some(4));
    }

    #[test]
    fn rank_deficient_binary_code_freezes_extra_columns() {
        // dv even: the rows of H sum to zero, so one free column is frozen.
        let code = construct_regular(120, 40, 4, 6, alphabet(AlphabetSpec::binary()), 2).unwrap();
        assert_regular(&code);
        assert!(!code.encoder_plan().frozen_positions().is_empty());
        let info: Vec<u8> = (0..40).map(|i| (i % 3 == 0) as u8).collect();
        let word = code.encode(&info).unwrap();
        assert!(code.is_codeword(&word));
        assert_eq!(code.extract_info(&word), info);
    }

    #[test]
    fn girth_of_small_graphs() {
        // 4-cycle: two variables sharing two checks
        let edges = [
            Edge { check: 0, var: 0, coeff: 1 },
            Edge { check: 0, var: 1, coeff: 1 },
            Edge { check: 1, var: 0, coeff: 1 },
            Edge { check: 1, var: 1, coeff: 1 },
        ];
        assert_eq!(tanner_girth(2, 2, &edges), Some(4));
        assert_eq!(tanner_girth(2, 2, &edges[..3]), None);
    }
}
