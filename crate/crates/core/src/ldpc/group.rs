//! Additive groups of code symbols and of symbol pairs.
//!
//! Check nodes of a nonbinary code convolve messages over the additive group
//! of the alphabet: `(Z_2)^r` for GF(2^r), `Z_M` for the ring. Decoding the
//! pair alphabet works over the product group, where a parity coefficient
//! acts on both coordinates at once. Convolutions are diagonalised by the
//! Walsh-Hadamard transform for `(Z_2)^s` and by the DFT (one per
//! coordinate) for `Z_M` and `Z_M x Z_M`.

use std::cell::Cell;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::algebra::Alphabet;

/// Counts arithmetic operations: one per multiply-accumulate in a direct
/// convolution, one per butterfly in a transform, one per entry of a
/// pointwise product.
#[derive(Debug, Default)]
pub struct OpCounter(Cell<u64>);

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&self, n: usize) {
        self.0.set(self.0.get() + n as u64);
    }

    pub fn get(&self) -> u64 {
        self.0.get()
    }

    pub fn reset(&self) {
        self.0.set(0);
    }
}

#[derive(Clone, Debug)]
enum Transform {
    Walsh,
    Dft(Dft),
}

#[derive(Clone, Debug)]
pub struct SymbolGroup {
    symbols: usize,
    dims: usize,
    order: usize,
    add: Vec<u16>,
    neg: Vec<u16>,
    // actions[h][x] = h * x coordinatewise; empty for coefficients that are not units
    actions: Vec<Vec<u16>>,
    inverse_coeff: Vec<u8>,
    transform: Transform,
}

impl SymbolGroup {
    /// The additive group of the alphabet itself.
    pub fn symbols(alphabet: &Alphabet) -> Self {
        Self::build(alphabet, 1)
    }

    /// The product group of symbol pairs, pair `(a, b)` stored at `a * M + b`.
    pub fn pairs(alphabet: &Alphabet) -> Self {
        assert!(alphabet.size() <= 16, "pair alphabets are limited to M <= 16");
        Self::build(alphabet, 2)
    }

    fn build(alphabet: &Alphabet, dims: usize) -> Self {
        let m = alphabet.size();
        let order = m.pow(dims as u32);
        let split = |x: usize| -> (usize, usize) { if dims == 1 { (0, x) } else { (x / m, x % m) } };
        let join = |a: usize, b: usize| if dims == 1 { b } else { a * m + b };
        let mut add = vec![0u16; order * order];
        for x in 0..order {
            let (xa, xb) = split(x);
            for y in 0..order {
                let (ya, yb) = split(y);
                let s = join(
                    alphabet.add_raw(xa as u8, ya as u8) as usize,
                    alphabet.add_raw(xb as u8, yb as u8) as usize,
                );
                add[x * order + y] = s as u16;
            }
        }
        let neg = (0..order)
            .map(|x| {
                let (a, b) = split(x);
                join(alphabet.neg_raw(a as u8) as usize, alphabet.neg_raw(b as u8) as usize) as u16
            })
            .collect();
        let actions = (0..m)
            .map(|h| {
                if !alphabet.is_unit_raw(h as u8) {
                    return Vec::new();
                }
                (0..order)
                    .map(|x| {
                        let (a, b) = split(x);
                        join(alphabet.mul_raw(h as u8, a as u8) as usize, alphabet.mul_raw(h as u8, b as u8) as usize)
                            as u16
                    })
                    .collect()
            })
            .collect();
        let inverse_coeff = (0..m).map(|h| alphabet.inv_raw(h as u8).unwrap_or(0)).collect();
        let transform = if alphabet.spec().is_field() { Transform::Walsh } else { Transform::Dft(Dft::new(m)) };
        SymbolGroup { symbols: m, dims, order, add, neg, actions, inverse_coeff, transform }
    }

    /// Number of group elements (`M` or `M^2`).
    pub fn order(&self) -> usize {
        self.order
    }

    /// Size of the underlying symbol alphabet.
    pub fn symbol_count(&self) -> usize {
        self.symbols
    }

    pub fn is_pair_group(&self) -> bool {
        self.dims == 2
    }

    #[inline]
    pub fn add(&self, x: usize, y: usize) -> usize {
        self.add[x * self.order + y] as usize
    }

    #[inline]
    pub fn neg(&self, x: usize) -> usize {
        self.neg[x] as usize
    }

    /// `coeff * x`; panics for non-unit coefficients.
    #[inline]
    pub fn act(&self, coeff: u8, x: usize) -> usize {
        self.actions[coeff as usize][x] as usize
    }

    pub fn inverse_coeff(&self, coeff: u8) -> u8 {
        self.inverse_coeff[coeff as usize]
    }

    /// `out[x + y] += p[x] q[y]` over the group.
    pub fn convolve(&self, p: &[f64], q: &[f64], out: &mut [f64], ops: &OpCounter) {
        let n = self.order;
        out[..n].fill(0.0);
        for (x, &px) in p.iter().enumerate().take(n) {
            let row = &self.add[x * n..(x + 1) * n];
            for (y, &qy) in q.iter().enumerate().take(n) {
                out[row[y] as usize] += px * qy;
            }
        }
        ops.add(n * n);
    }

    /// Forward transform; `spectrum` has `order()` entries.
    pub fn forward(&self, p: &[f64], spectrum: &mut [Complex64], ops: &OpCounter) {
        for (s, &v) in spectrum.iter_mut().zip(p) {
            *s = Complex64::new(v, 0.0);
        }
        self.transform_in_place(spectrum, false, ops);
    }

    /// Inverse transform, keeping the real part and clamping round-off
    /// negatives to zero.
    pub fn inverse(&self, spectrum: &mut [Complex64], out: &mut [f64], ops: &OpCounter) {
        self.transform_in_place(spectrum, true, ops);
        let scale = 1.0 / self.order as f64;
        for (o, s) in out.iter_mut().zip(spectrum.iter()) {
            *o = (s.re * scale).max(0.0);
        }
    }

    fn transform_in_place(&self, data: &mut [Complex64], inverse: bool, ops: &OpCounter) {
        match &self.transform {
            Transform::Walsh => walsh_hadamard(&mut data[..self.order], ops),
            Transform::Dft(dft) => {
                let m = self.symbols;
                if self.dims == 1 {
                    dft.run(data, 0, 1, inverse, ops);
                } else {
                    for row in 0..m {
                        dft.run(data, row * m, 1, inverse, ops);
                    }
                    for col in 0..m {
                        dft.run(data, col, m, inverse, ops);
                    }
                }
            }
        }
    }
}

fn walsh_hadamard(data: &mut [Complex64], ops: &OpCounter) {
    let n = data.len();
    let mut h = 1;
    while h < n {
        for start in (0..n).step_by(2 * h) {
            for i in start..start + h {
                let (a, b) = (data[i], data[i + h]);
                data[i] = a + b;
                data[i + h] = a - b;
            }
        }
        ops.add(n / 2);
        h *= 2;
    }
}

/// Unnormalised DFT of one length; radix-2 when the length is a power of
/// two, the direct sum otherwise.
#[derive(Clone, Debug)]
struct Dft {
    len: usize,
    twiddles: Vec<Complex64>,
    bitrev: Vec<usize>,
}

impl Dft {
    fn new(len: usize) -> Self {
        let twiddles = (0..len).map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / len as f64)).collect();
        let bitrev = if len.is_power_of_two() {
            let bits = len.trailing_zeros();
            (0..len).map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) }).collect()
        } else {
            Vec::new()
        };
        Dft { len, twiddles, bitrev }
    }

    fn twiddle(&self, k: usize, inverse: bool) -> Complex64 {
        let w = self.twiddles[k % self.len];
        if inverse {
            w.conj()
        } else {
            w
        }
    }

    fn run(&self, data: &mut [Complex64], offset: usize, stride: usize, inverse: bool, ops: &OpCounter) {
        let n = self.len;
        let idx = |i: usize| offset + i * stride;
        if !self.bitrev.is_empty() {
            for i in 0..n {
                let j = self.bitrev[i];
                if i < j {
                    data.swap(idx(i), idx(j));
                }
            }
            let mut half = 1;
            while half < n {
                let step = n / (2 * half);
                for start in (0..n).step_by(2 * half) {
                    for j in 0..half {
                        let w = self.twiddle(j * step, inverse);
                        let a = data[idx(start + j)];
                        let b = data[idx(start + j + half)] * w;
                        data[idx(start + j)] = a + b;
                        data[idx(start + j + half)] = a - b;
                    }
                }
                ops.add(n / 2);
                half *= 2;
            }
        } else {
            let input: Vec<Complex64> = (0..n).map(|i| data[idx(i)]).collect();
            for k in 0..n {
                data[idx(k)] = input.iter().enumerate().map(|(x, &v)| v * self.twiddle(k * x, inverse)).sum();
            }
            ops.add(n * n);
        }
    }
}
