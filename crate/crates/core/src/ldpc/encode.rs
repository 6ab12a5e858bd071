use crate::algebra::Alphabet;

/// Systematic encoder derived from H by Gauss-Jordan elimination with unit
/// pivots.
///
/// After reduction each pivot row reads `x[pivot] + sum_f R[f] * x[f] = 0`
/// over the free columns `f`. The first `k` free columns carry information;
/// any further free columns (rank-deficient H) are frozen to zero.
#[derive(Clone, Debug)]
pub struct EncoderPlan {
    info: Vec<usize>,
    frozen: Vec<usize>,
    pivots: Vec<usize>,
    // parity[i][j]: coefficient of info symbol j in the symbol at pivots[i]
    parity: Vec<Vec<u8>>,
}

impl EncoderPlan {
    pub(crate) fn build(n: usize, k: usize, alphabet: &Alphabet, rows: &[Vec<(usize, u8)>]) -> Option<Self> {
        let (pivots, reduced) = if alphabet.size() == 2 {
            eliminate_gf2(n, rows)?
        } else {
            eliminate(n, alphabet, rows)?
        };
        let mut is_pivot = vec![false; n];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let free: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
        if free.len() < k {
            return None;
        }
        let info = free[..k].to_vec();
        let frozen = free[k..].to_vec();
        let parity = reduced
            .iter()
            .map(|row| info.iter().map(|&c| alphabet.neg_raw(row.get(c))).collect())
            .collect();
        Some(EncoderPlan { info, frozen, pivots, parity })
    }

    pub fn info_positions(&self) -> &[usize] {
        &self.info
    }

    /// Free columns pinned to zero because H is rank deficient.
    pub fn frozen_positions(&self) -> &[usize] {
        &self.frozen
    }

    pub fn pivot_positions(&self) -> &[usize] {
        &self.pivots
    }

    pub(crate) fn encode(&self, alphabet: &Alphabet, info: &[u8]) -> Vec<u8> {
        let n = self.info.len() + self.frozen.len() + self.pivots.len();
        let mut word = vec![0u8; n];
        for (&pos, &s) in self.info.iter().zip(info) {
            word[pos] = s;
        }
        if alphabet.size() == 2 {
            for (&pos, coeffs) in self.pivots.iter().zip(&self.parity) {
                word[pos] = coeffs.iter().zip(info).fold(0, |acc, (&c, &s)| acc ^ (c & s));
            }
        } else {
            for (&pos, coeffs) in self.pivots.iter().zip(&self.parity) {
                word[pos] = coeffs
                    .iter()
                    .zip(info)
                    .fold(0, |acc, (&c, &s)| alphabet.add_raw(acc, alphabet.mul_raw(c, s)));
            }
        }
        word
    }
}

enum ReducedRow {
    Dense(Vec<u8>),
    Bits(Vec<u64>),
}

impl ReducedRow {
    fn get(&self, c: usize) -> u8 {
        match self {
            ReducedRow::Dense(row) => row[c],
            ReducedRow::Bits(row) => ((row[c / 64] >> (c % 64)) & 1) as u8,
        }
    }
}

type Reduced = Vec<ReducedRow>;

fn eliminate(n: usize, a: &Alphabet, rows: &[Vec<(usize, u8)>]) -> Option<(Vec<usize>, Reduced)> {
    let m = rows.len();
    let mut mat: Vec<Vec<u8>> = rows
        .iter()
        .map(|r| {
            let mut dense = vec![0u8; n];
            for &(c, v) in r {
                dense[c] = v;
            }
            dense
        })
        .collect();
    let mut pivots = Vec::new();
    let mut rank = 0;
    let mut support = Vec::with_capacity(n);
    for col in 0..n {
        if rank == m {
            break;
        }
        let Some(r) = (rank..m).find(|&r| a.is_unit_raw(mat[r][col])) else {
            continue;
        };
        mat.swap(rank, r);
        let inv = a.inv_raw(mat[rank][col]).expect("unit pivot");
        support.clear();
        for (c, v) in mat[rank].iter_mut().enumerate() {
            if *v != 0 {
                *v = a.mul_raw(inv, *v);
                support.push(c);
            }
        }
        let pivot_row = std::mem::take(&mut mat[rank]);
        for (i, row) in mat.iter_mut().enumerate() {
            if i == rank {
                continue;
            }
            let f = row[col];
            if f == 0 {
                continue;
            }
            let nf = a.neg_raw(f);
            for &c in &support {
                row[c] = a.add_raw(row[c], a.mul_raw(nf, pivot_row[c]));
            }
        }
        mat[rank] = pivot_row;
        pivots.push(col);
        rank += 1;
    }
    if mat[rank..].iter().any(|row| row.iter().any(|&v| v != 0)) {
        return None;
    }
    mat.truncate(rank);
    Some((pivots, mat.into_iter().map(ReducedRow::Dense).collect()))
}

fn eliminate_gf2(n: usize, rows: &[Vec<(usize, u8)>]) -> Option<(Vec<usize>, Reduced)> {
    let words = n.div_ceil(64);
    let m = rows.len();
    let mut mat: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| {
            let mut w = vec![0u64; words];
            for &(c, _) in r {
                w[c / 64] |= 1 << (c % 64);
            }
            w
        })
        .collect();
    let bit = |row: &[u64], c: usize| (row[c / 64] >> (c % 64)) & 1;
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..n {
        if rank == m {
            break;
        }
        let Some(r) = (rank..m).find(|&r| bit(&mat[r], col) == 1) else {
            continue;
        };
        mat.swap(rank, r);
        let pivot_row = std::mem::take(&mut mat[rank]);
        for row in mat.iter_mut() {
            if !row.is_empty() && bit(row, col) == 1 {
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x ^= p;
                }
            }
        }
        mat[rank] = pivot_row;
        pivots.push(col);
        rank += 1;
    }
    // Linearly dependent rows reduce to zero; nothing else can remain over GF(2).
    debug_assert!(mat[rank..].iter().all(|r| r.iter().all(|&w| w == 0)));
    mat.truncate(rank);
    Some((pivots, mat.into_iter().map(ReducedRow::Bits).collect()))
}
