//! PSK and PAM constellations with their symbol and bit labels.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModemError {
    #[error("constellation size {0} must be a power of two between 2 and 16")]
    Order(usize),
    #[error("invalid PAM spacings: {0}")]
    Spacings(String),
    #[error("labels must be a permutation of 0..{0}")]
    Permutation(usize),
    #[error("symbol {value} outside constellation of size {size}")]
    Symbol { value: u8, size: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstellationKind {
    Psk,
    Pam,
}

/// Binary-reflected Gray code.
pub fn gray(k: usize) -> usize {
    k ^ (k >> 1)
}

/// An M-point signal set. Points are stored in geometric order (angle for
/// PSK, amplitude for PAM); each carries one alphabet symbol and one bit
/// label.
#[derive(Clone, Debug, PartialEq)]
pub struct Constellation {
    points: Vec<Complex64>,
    symbol_labels: Vec<u8>,
    bit_labels: Vec<u16>,
    by_symbol: Vec<usize>,
    by_bits: Vec<usize>,
    kind: ConstellationKind,
    rotation: f64,
    spacings: Vec<f64>,
}

fn check_order(m: usize) -> Result<(), ModemError> {
    if m.is_power_of_two() && (2..=16).contains(&m) {
        Ok(())
    } else {
        Err(ModemError::Order(m))
    }
}

fn inverse_permutation(labels: &[u16]) -> Vec<usize> {
    let mut inv = vec![0; labels.len()];
    for (k, &l) in labels.iter().enumerate() {
        inv[l as usize] = k;
    }
    inv
}

impl Constellation {
    fn build(points: Vec<Complex64>, symbol_labels: Vec<u8>, bit_labels: Vec<u16>, kind: ConstellationKind, rotation: f64, spacings: Vec<f64>) -> Self {
        let by_symbol = inverse_permutation(&symbol_labels.iter().map(|&s| s as u16).collect::<Vec<_>>());
        let by_bits = inverse_permutation(&bit_labels);
        Constellation { points, symbol_labels, bit_labels, by_symbol, by_bits, kind, rotation, spacings }
    }

    /// M-PSK with points `exp(i(2 pi k / M + rotation))`; the point at angular
    /// index k carries symbol `gray(k)`, whose binary expansion is also its
    /// bit label.
    pub fn psk_gray(m: usize, rotation: f64) -> Result<Self, ModemError> {
        check_order(m)?;
        let points = (0..m).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64 + rotation)).collect();
        let labels: Vec<u16> = (0..m).map(|k| gray(k) as u16).collect();
        let symbols = labels.iter().map(|&l| l as u8).collect();
        Ok(Self::build(points, symbols, labels, ConstellationKind::Psk, rotation, Vec::new()))
    }

    /// M-PAM with the given gaps between consecutive amplitudes, centred and
    /// scaled to unit average energy. Point k carries ring element k and
    /// Gray bit label `gray(k)`.
    pub fn pam(m: usize, spacings: &[f64]) -> Result<Self, ModemError> {
        check_order(m)?;
        if spacings.len() != m - 1 {
            return Err(ModemError::Spacings(format!("need {} gaps, got {}", m - 1, spacings.len())));
        }
        if spacings.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return Err(ModemError::Spacings("gaps must be positive and finite".into()));
        }
        let mut x = vec![0.0; m];
        for k in 1..m {
            x[k] = x[k - 1] + spacings[k - 1];
        }
        let mean = x.iter().sum::<f64>() / m as f64;
        let energy = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m as f64;
        let points = x.iter().map(|v| Complex64::new((v - mean) / energy.sqrt(), 0.0)).collect();
        let symbols = (0..m as u8).collect();
        let labels = (0..m).map(|k| gray(k) as u16).collect();
        Ok(Self::build(points, symbols, labels, ConstellationKind::Pam, 0.0, spacings.to_vec()))
    }

    pub fn pam_uniform(m: usize) -> Result<Self, ModemError> {
        Self::pam(m, &vec![1.0; m.max(2) - 1])
    }

    /// Moves labels between points: point i takes the labels previously on
    /// point `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self, ModemError> {
        let m = self.size();
        let mut seen = vec![false; m];
        if perm.len() != m || perm.iter().any(|&p| p >= m || std::mem::replace(&mut seen[p], true)) {
            return Err(ModemError::Permutation(m));
        }
        let symbols = perm.iter().map(|&p| self.symbol_labels[p]).collect();
        let labels = perm.iter().map(|&p| self.bit_labels[p]).collect();
        Ok(Self::build(self.points.clone(), symbols, labels, self.kind, self.rotation, self.spacings.clone()))
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.size().trailing_zeros() as usize
    }

    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    pub fn rotation(&self) -> f64 {
        self.rotation
    }

    pub fn spacings(&self) -> &[f64] {
        &self.spacings
    }

    /// Points in geometric order.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn symbol_labels(&self) -> &[u8] {
        &self.symbol_labels
    }

    pub fn bit_labels(&self) -> &[u16] {
        &self.bit_labels
    }

    /// The point carrying `symbol`.
    pub fn point(&self, symbol: u8) -> Complex64 {
        self.points[self.by_symbol[symbol as usize]]
    }

    /// Bit label (MSB first) of the point carrying `symbol`.
    pub fn bits_of(&self, symbol: u8) -> u16 {
        self.bit_labels[self.by_symbol[symbol as usize]]
    }

    /// Symbol of the point whose bit label is `bits`.
    pub fn symbol_for_bits(&self, bits: u16) -> u8 {
        self.symbol_labels[self.by_bits[bits as usize]]
    }

    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.size() as f64
    }

    pub fn modulate(&self, symbols: &[u8]) -> Result<Vec<Complex64>, ModemError> {
        symbols
            .iter()
            .map(|&s| {
                if (s as usize) < self.size() {
                    Ok(self.point(s))
                } else {
                    Err(ModemError::Symbol { value: s, size: self.size() })
                }
            })
            .collect()
    }

    /// Maps groups of `bits_per_symbol` bits (MSB first) to points through
    /// the bit labels. The bit count must be a multiple of the group size.
    pub fn modulate_bits(&self, bits: &[u8]) -> Vec<Complex64> {
        let b = self.bits_per_symbol();
        assert_eq!(bits.len() % b, 0, "bit count not a multiple of {b}");
        bits.chunks(b)
            .map(|chunk| {
                let label = chunk.iter().fold(0u16, |acc, &x| (acc << 1) | x as u16);
                self.points[self.by_bits[label as usize]]
            })
            .collect()
    }

    /// Nearest-point hard decision per sample.
    pub fn demap_nearest(&self, samples: &[Complex64]) -> Vec<u8> {
        samples
            .iter()
            .map(|y| {
                let mut best = 0;
                for k in 1..self.size() {
                    if (y - self.points[k]).norm_sqr() < (y - self.points[best]).norm_sqr() {
                        best = k;
                    }
                }
                self.symbol_labels[best]
            })
            .collect()
    }

    /// `index,re,im,symbol,bits` per point.
    pub fn to_csv(&self) -> String {
        let b = self.bits_per_symbol();
        let mut out = String::from("index,re,im,symbol,bits\n");
        for k in 0..self.size() {
            let p = self.points[k];
            let _ = writeln!(out, "{k},{:.12},{:.12},{},{:0b$b}", p.re, p.im, self.symbol_labels[k], self.bit_labels[k]);
        }
        out
    }
}
