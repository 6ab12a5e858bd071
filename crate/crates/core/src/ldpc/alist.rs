//! Nonbinary alist text format.
//!
//! ```text
//! n m q
//! max_col_degree max_row_degree
//! <n column degrees>
//! <m row degrees>
//! <n lines: row value row value ...>   (1-based rows)
//! <m lines: col value col value ...>   (1-based columns)
//! ```

use std::fmt::Write;
use std::sync::Arc;

use super::{LdpcCode, LdpcError};
use crate::algebra::Alphabet;

pub(super) fn write(code: &LdpcCode) -> String {
    let m = code.m();
    let mut out = String::new();
    let col_deg: Vec<usize> = (0..code.n()).map(|v| code.var_edges(v).len()).collect();
    let row_deg: Vec<usize> = (0..m).map(|c| code.check_edges(c).len()).collect();
    let join = |xs: &[usize]| xs.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
    writeln!(out, "{} {} {}", code.n(), m, code.alphabet().size()).unwrap();
    writeln!(out, "{} {}", col_deg.iter().max().unwrap_or(&0), row_deg.iter().max().unwrap_or(&0)).unwrap();
    writeln!(out, "{}", join(&col_deg)).unwrap();
    writeln!(out, "{}", join(&row_deg)).unwrap();
    for v in 0..code.n() {
        let line: Vec<String> = code
            .var_edges(v)
            .iter()
            .map(|&e| {
                let e = code.edges()[e];
                format!("{} {}", e.check + 1, e.coeff)
            })
            .collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
    for c in 0..m {
        let line: Vec<String> = code.edges()[code.check_edges(c)]
            .iter()
            .map(|e| format!("{} {}", e.var + 1, e.coeff))
            .collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
    out
}

pub(super) fn read(text: &str, k: usize, alphabet: Arc<Alphabet>) -> Result<LdpcCode, LdpcError> {
    let err = |msg: &str| LdpcError::Alist(msg.to_string());
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let mut numbers = |what: &str| -> Result<Vec<usize>, LdpcError> {
        let line = lines.next().ok_or_else(|| err(&format!("missing {what}")))?;
        line.split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| err(&format!("bad number '{t}' in {what}"))))
            .collect()
    };
    let header = numbers("header")?;
    let [n, m, q] = header[..] else {
        return Err(err("header must be 'n m q'"));
    };
    if q != alphabet.size() {
        return Err(err(&format!("alist is over q={q}, alphabet has {}", alphabet.size())));
    }
    numbers("max degrees")?;
    let col_deg = numbers("column degrees")?;
    let row_deg = numbers("row degrees")?;
    if col_deg.len() != n || row_deg.len() != m {
        return Err(err("degree list lengths do not match header"));
    }
    let mut from_cols = vec![Vec::new(); m];
    for (v, &d) in col_deg.iter().enumerate() {
        let entries = numbers("column entries")?;
        if entries.len() != 2 * d {
            return Err(err(&format!("column {} lists {} values, expected {}", v + 1, entries.len(), 2 * d)));
        }
        for pair in entries.chunks(2) {
            let (row, value) = (pair[0], pair[1]);
            if row == 0 || row > m || value == 0 || value >= q {
                return Err(err(&format!("bad entry in column {}", v + 1)));
            }
            from_cols[row - 1].push((v, value as u8));
        }
    }
    let mut rows = Vec::with_capacity(m);
    for (c, &d) in row_deg.iter().enumerate() {
        let entries = numbers("row entries")?;
        if entries.len() != 2 * d {
            return Err(err(&format!("row {} lists {} values, expected {}", c + 1, entries.len(), 2 * d)));
        }
        let mut row: Vec<(usize, u8)> = entries
            .chunks(2)
            .map(|p| (p[0].wrapping_sub(1), p[1] as u8))
            .collect();
        row.sort_unstable();
        from_cols[c].sort_unstable();
        if row != from_cols[c] {
            return Err(err(&format!("row {} disagrees with column lists", c + 1)));
        }
        rows.push(row);
    }
    LdpcCode::from_rows(n, k, alphabet, rows)
}
