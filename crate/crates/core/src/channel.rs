//! Multiple-access phase: both users' signals superimposed at the relay.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("signal lengths differ: {0} vs {1}")]
    Length(usize, usize),
    #[error("realization covers {expected} symbols, signal has {got}")]
    Realization { expected: usize, got: usize },
    #[error("block count must be at least 1")]
    Blocks,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelModel {
    Awgn,
    /// Independent Rayleigh coefficients per user, constant over each of
    /// `blocks` contiguous blocks of the codeword.
    BlockRayleigh { blocks: usize },
}

impl ChannelModel {
    pub fn validate(&self) -> Result<(), ChannelError> {
        match self {
            ChannelModel::BlockRayleigh { blocks: 0 } => Err(ChannelError::Blocks),
            _ => Ok(()),
        }
    }
}

/// Channel coefficients for one codeword.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    /// `starts[b]..starts[b + 1]` is block b.
    starts: Vec<usize>,
    h1: Vec<Complex64>,
    h2: Vec<Complex64>,
}

/// Block boundaries: `blocks` contiguous runs whose sizes differ by at most
/// one, the longer ones first.
pub fn block_starts(n: usize, blocks: usize) -> Vec<usize> {
    let (base, extra) = (n / blocks, n % blocks);
    let mut starts = Vec::with_capacity(blocks + 1);
    let mut at = 0;
    starts.push(0);
    for b in 0..blocks {
        at += base + usize::from(b < extra);
        starts.push(at);
    }
    starts
}

impl ChannelRealization {
    /// Unit gains for both users over `n` symbols.
    pub fn unit(n: usize) -> Self {
        let one = Complex64::new(1.0, 0.0);
        ChannelRealization { starts: vec![0, n], h1: vec![one], h2: vec![one] }
    }

    pub fn from_blocks(n: usize, h1: Vec<Complex64>, h2: Vec<Complex64>) -> Self {
        assert!(!h1.is_empty() && h1.len() == h2.len());
        ChannelRealization { starts: block_starts(n, h1.len()), h1, h2 }
    }

    pub fn len(&self) -> usize {
        *self.starts.last().expect("non-empty")
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn blocks(&self) -> usize {
        self.h1.len()
    }

    pub fn block_range(&self, b: usize) -> std::ops::Range<usize> {
        self.starts[b]..self.starts[b + 1]
    }

    /// Per-block coefficients `(h1, h2)`.
    pub fn block_gains(&self, b: usize) -> (Complex64, Complex64) {
        (self.h1[b], self.h2[b])
    }

    pub fn block_of(&self, i: usize) -> usize {
        self.starts.partition_point(|&s| s <= i) - 1
    }

    /// Coefficients at symbol position `i`.
    pub fn h_at(&self, i: usize) -> (Complex64, Complex64) {
        self.block_gains(self.block_of(i))
    }
}

/// N0 for a per-user Es/N0 of `snr_db` with Es = 1.
pub fn snr_to_noise_var(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// Circularly symmetric complex Gaussian sample with total variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * s, im * s)
}

pub fn draw_realization_with<R: Rng + ?Sized>(model: ChannelModel, n: usize, rng: &mut R) -> ChannelRealization {
    match model {
        ChannelModel::Awgn => ChannelRealization::unit(n),
        ChannelModel::BlockRayleigh { blocks } => {
            let h1 = (0..blocks).map(|_| complex_gaussian(rng, 1.0)).collect();
            let h2 = (0..blocks).map(|_| complex_gaussian(rng, 1.0)).collect();
            ChannelRealization::from_blocks(n, h1, h2)
        }
    }
}

pub fn draw_realization(model: ChannelModel, n: usize, seed: u64) -> ChannelRealization {
    draw_realization_with(model, n, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn transmit_mac_with<R: Rng + ?Sized>(
    x1: &[Complex64],
    x2: &[Complex64],
    realization: &ChannelRealization,
    noise_var: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>, ChannelError> {
    if x1.len() != x2.len() {
        return Err(ChannelError::Length(x1.len(), x2.len()));
    }
    if realization.len() != x1.len() {
        return Err(ChannelError::Realization { expected: realization.len(), got: x1.len() });
    }
    let mut y = Vec::with_capacity(x1.len());
    for b in 0..realization.blocks() {
        let (h1, h2) = realization.block_gains(b);
        for i in realization.block_range(b) {
            let noise = if noise_var > 0.0 { complex_gaussian(rng, noise_var) } else { Complex64::default() };
            y.push(h1 * x1[i] + h2 * x2[i] + noise);
        }
    }
    Ok(y)
}

/// `y = h1 x1 + h2 x2 + n`, n circular Gaussian with total variance
/// `noise_var`.
pub fn transmit_mac(
    x1: &[Complex64],
    x2: &[Complex64],
    realization: &ChannelRealization,
    noise_var: f64,
    seed: u64,
) -> Result<Vec<Complex64>, ChannelError> {
    transmit_mac_with(x1, x2, realization, noise_var, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snr_conversion() {
        assert_eq!(snr_to_noise_var(0.0), 1.0);
        assert!((snr_to_noise_var(10.0) - 0.1).abs() < 1e-15);
        assert!((snr_to_noise_var(3.0103) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn awgn_has_unit_gains() {
        let r = draw_realization(ChannelModel::Awgn, 17, 3);
        assert!((0..17).all(|i| r.h_at(i) == (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))));
    }

    #[test]
    fn blocks_partition_evenly() {
        let r = draw_realization(ChannelModel::BlockRayleigh { blocks: 4 }, 100, 1);
        let sizes: Vec<usize> = (0..4).map(|b| r.block_range(b).len()).collect();
        assert_eq!(sizes, vec![25; 4]);
        assert_eq!(block_starts(10, 4), vec![0, 3, 6, 8, 10]);
        assert_eq!(r.block_of(0), 0);
        assert_eq!(r.block_of(25), 1);
        assert_eq!(r.block_of(99), 3);
        assert_eq!(r, draw_realization(ChannelModel::BlockRayleigh { blocks: 4 }, 100, 1));
    }

    #[test]
    fn rayleigh_power_is_unit() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let draws = 1_000_000;
        let mean = (0..draws / 2)
            .map(|_| {
                let r = draw_realization_with(ChannelModel::BlockRayleigh { blocks: 1 }, 1, &mut rng);
                let (a, b) = r.block_gains(0);
                a.norm_sqr() + b.norm_sqr()
            })
            .sum::<f64>()
            / draws as f64;
        assert!((mean - 1.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn noiseless_superposition() {
        let one = Complex64::new(1.0, 0.0);
        let r = ChannelRealization::unit(2);
        let y = transmit_mac(&[one, one], &[one, -one], &r, 0.0, 0).unwrap();
        assert_eq!(y, vec![Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0)]);
        assert!(transmit_mac(&[one], &[one, one], &r, 0.0, 0).is_err());
        assert!(transmit_mac(&[one], &[one], &r, 0.0, 0).is_err());
    }

    #[test]
    fn noise_statistics() {
        let n = 1_000_000;
        let x = vec![Complex64::new(0.0, 0.0); n];
        let r = ChannelRealization::unit(n);
        let y = transmit_mac(&x, &x, &r, 0.3, 9).unwrap();
        assert_eq!(y, transmit_mac(&x, &x, &r, 0.3, 9).unwrap());
        let var = y.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
        assert!((var / 0.3 - 1.0).abs() < 0.01, "{var}");
        let lag1 = y.windows(2).map(|w| (w[0] * w[1].conj()).re).sum::<f64>() / n as f64 / var;
        assert!(lag1.abs() < 0.01);
    }
}
