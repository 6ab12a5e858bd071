//! Extended min-sum check-node processing.
//!
//! Messages are log-domain vectors normalised so that their maximum is 0.
//! Only the `list_size` largest entries of each input take part in a check
//! update; the output keeps the `list_size` best combinations and assigns
//! every other group element the weakest kept value minus a fixed offset.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::group::{OpCounter, SymbolGroup};

/// Lowest log value carried by any EMS message.
pub const LOG_FLOOR: f64 = -1.0e3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Entry {
    pub value: f64,
    pub symbol: usize,
}

/// The `list_size` largest entries of `message`, best first; ties go to the
/// lower symbol.
pub fn truncate(message: &[f64], list_size: usize, out: &mut Vec<Entry>) {
    out.clear();
    out.extend(message.iter().enumerate().map(|(symbol, &value)| Entry { value, symbol }));
    let cmp = |a: &Entry, b: &Entry| b.value.total_cmp(&a.value).then(a.symbol.cmp(&b.symbol));
    if list_size < out.len() {
        out.select_nth_unstable_by(list_size - 1, cmp);
        out.truncate(list_size);
    }
    out.sort_unstable_by(cmp);
}

#[derive(PartialEq)]
struct Candidate {
    value: f64,
    i: usize,
    j: usize,
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then_with(|| other.i.cmp(&self.i))
            .then_with(|| other.j.cmp(&self.j))
    }
}

/// Reusable buffers for [`combine`].
#[derive(Default)]
pub struct EmsWorkspace {
    heap: BinaryHeap<Candidate>,
    stamp: Vec<u32>,
    generation: u32,
}

impl EmsWorkspace {
    pub fn new(order: usize) -> Self {
        EmsWorkspace { heap: BinaryHeap::new(), stamp: vec![0; order], generation: 0 }
    }
}

/// Elementary check step: the `list_size` best distinct group sums of two
/// sorted lists, found by a best-first walk over the sum grid.
pub fn combine(
    group: &SymbolGroup,
    a: &[Entry],
    b: &[Entry],
    list_size: usize,
    out: &mut Vec<Entry>,
    ws: &mut EmsWorkspace,
    ops: &OpCounter,
) {
    out.clear();
    if a.is_empty() || b.is_empty() {
        return;
    }
    ws.generation = ws.generation.wrapping_add(1);
    if ws.generation == 0 {
        ws.stamp.fill(0);
        ws.generation = 1;
    }
    ws.heap.clear();
    ws.heap.push(Candidate { value: a[0].value + b[0].value, i: 0, j: 0 });
    let mut pops = 0;
    // (i, j) is reached from (i, j - 1), or from (i - 1, 0) when j == 0, so
    // every cell is pushed at most once.
    while let Some(Candidate { value, i, j }) = ws.heap.pop() {
        pops += 1;
        let s = group.add(a[i].symbol, b[j].symbol);
        if ws.stamp[s] != ws.generation {
            ws.stamp[s] = ws.generation;
            out.push(Entry { value, symbol: s });
            if out.len() == list_size {
                break;
            }
        }
        if j + 1 < b.len() {
            ws.heap.push(Candidate { value: a[i].value + b[j + 1].value, i, j: j + 1 });
        }
        if j == 0 && i + 1 < a.len() {
            ws.heap.push(Candidate { value: a[i + 1].value + b[0].value, i: i + 1, j: 0 });
        }
    }
    ops.add(pops);
}

/// Expands a list into a full message: listed symbols keep their value, the
/// rest get `weakest - offset`; then shifts so the maximum is 0.
pub fn expand(list: &[Entry], order: usize, offset: f64, out: &mut [f64]) {
    let weakest = list.last().map_or(0.0, |e| e.value);
    let best = list.first().map_or(0.0, |e| e.value);
    let floor = ((weakest - offset) - best).max(LOG_FLOOR);
    out[..order].fill(floor);
    for e in list {
        out[e.symbol] = (e.value - best).max(LOG_FLOOR);
    }
}
