use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Scheme, SimulationConfig};
use super::HarnessError;
use crate::algebra::Alphabet;
use crate::channel::{draw_realization_with, snr_to_noise_var, transmit_mac_with};
use crate::ldpc::{construct_regular, LdpcCode};
use crate::modem::Constellation;
use crate::pnc::{
    build_superimposed_set, receive_cd_nc, receive_iterative_xor_cd, receive_mud_nc, receive_mud_xor, receive_nc_cd,
    receive_xor_cd, select_coefficients_for_set, NcMap, RelayFrame, RelayOutput, SuperimposedSet, MERGE_TOLERANCE,
};
use crate::rng::frame_rng;

/// Result of one simulated frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrameOutcome {
    pub bit_errors: u64,
    pub frame_error: bool,
    pub iterations: usize,
    pub converged: bool,
}

/// Messages and relay estimate of one frame.
#[derive(Clone, Debug)]
pub struct RelayTrial {
    /// Information symbols (bits for binary schemes) of the two users.
    pub info: (Vec<u8>, Vec<u8>),
    /// NC message computed from `info` with the map the relay used.
    pub truth: Vec<u8>,
    /// NC message read off the relay's codeword estimate.
    pub estimate: Vec<u8>,
    pub output: RelayOutput,
}

/// One row of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub snr_db: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    pub mean_iters: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config_hash: String,
    pub master_seed: u64,
    pub points: Vec<PointResult>,
}

/// A configured simulation: code and constellations are built once and
/// shared by all frames.
pub struct Simulation {
    config: SimulationConfig,
    code: LdpcCode,
    ca: Constellation,
    cb: Constellation,
    // superimposed set and selected map when the gains never change
    fixed: Option<(Vec<SuperimposedSet>, Option<NcMap>)>,
    pool: rayon::ThreadPool,
    threads: usize,
}

impl Simulation {
    pub fn new(config: SimulationConfig) -> Result<Self, HarnessError> {
        Self::with_threads(config, 0)
    }

    /// `threads = 0` uses one worker per core. Results do not depend on the
    /// worker count.
    pub fn with_threads(config: SimulationConfig, threads: usize) -> Result<Self, HarnessError> {
        config.validate()?;
        let c = &config.code;
        let code = construct_regular(c.n, c.k, c.dv, c.dc, Alphabet::shared(c.alphabet), c.seed).map_err(HarnessError::config)?;
        let (ca, cb) = config.modulation.constellations()?;
        let fixed = if config.channel == crate::channel::ChannelModel::Awgn {
            let one = Complex64::new(1.0, 0.0);
            let set = build_superimposed_set(&ca, &cb, one, one, MERGE_TOLERANCE).map_err(HarnessError::config)?;
            let map = (!config.scheme.is_binary()).then(|| select_coefficients_for_set(&set, code.alphabet()));
            Some((vec![set], map))
        } else {
            None
        };
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(HarnessError::runtime)?;
        let threads = pool.current_num_threads();
        Ok(Simulation { config, code, ca, cb, fixed, pool, threads })
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn code(&self) -> &LdpcCode {
        &self.code
    }

    pub fn constellations(&self) -> (&Constellation, &Constellation) {
        (&self.ca, &self.cb)
    }

    /// Information bits per frame; nonbinary symbols count their binary
    /// expansion.
    pub fn bits_per_frame(&self) -> u64 {
        let q = self.code.alphabet().size();
        (self.code.k() * q.trailing_zeros() as usize) as u64
    }

    fn receive(&self, frame: &RelayFrame, map: Option<&NcMap>) -> Result<RelayOutput, HarnessError> {
        let cfg = &self.config;
        let dec = &cfg.decoder;
        let out = match cfg.scheme {
            Scheme::XorCd => receive_xor_cd(frame, &self.code, dec),
            Scheme::IterXorCd => receive_iterative_xor_cd(frame, &self.code, dec, cfg.outer_iters, cfg.inner_iters),
            Scheme::MudXor => {
                let schedule = (cfg.mud_rounds > 0).then(|| (cfg.mud_rounds, (dec.max_iter / cfg.mud_rounds).max(1)));
                receive_mud_xor(frame, &self.code, dec, schedule)
            }
            _ if map.is_none() => unreachable!("nonbinary schemes always carry a map"),
            Scheme::NcCd => receive_nc_cd(frame, &self.code, dec, cfg.nc_strategy, map.unwrap()),
            Scheme::CdNc => receive_cd_nc(frame, &self.code, dec, map.unwrap()),
            Scheme::MudNc => receive_mud_nc(frame, &self.code, dec, map.unwrap()),
        };
        out.map_err(HarnessError::runtime)
    }

    /// Runs frame `frame` at `snr_db` through the relay; the result depends
    /// only on the master seed, the SNR and the frame index.
    pub fn trial(&self, snr_db: f64, frame: u64) -> Result<RelayTrial, HarnessError> {
        let cfg = &self.config;
        let mut rng = frame_rng(cfg.master_seed, snr_db, frame);
        let q = self.code.alphabet().size() as u8;
        let k = self.code.k();
        let info1: Vec<u8> = (0..k).map(|_| rng.random_range(0..q)).collect();
        let info2: Vec<u8> = (0..k).map(|_| rng.random_range(0..q)).collect();
        let enc = |info: &[u8]| self.code.encode(info).map_err(HarnessError::runtime);
        let (c1, c2) = (enc(&info1)?, enc(&info2)?);
        let (x1, x2) = if cfg.scheme.is_binary() {
            (self.ca.modulate_bits(&c1), self.cb.modulate_bits(&c2))
        } else {
            let m = |c: &Constellation, w: &[u8]| c.modulate(w).map_err(HarnessError::runtime);
            (m(&self.ca, &c1)?, m(&self.cb, &c2)?)
        };
        let realization = draw_realization_with(cfg.channel, x1.len(), &mut rng);
        let noise_var = if cfg.noiseless { 0.0 } else { snr_to_noise_var(snr_db) };
        let y = transmit_mac_with(&x1, &x2, &realization, noise_var, &mut rng).map_err(HarnessError::runtime)?;
        let owned;
        let (sets, map) = match &self.fixed {
            Some((sets, map)) => (sets.as_slice(), map.clone()),
            None => {
                let sets = (0..realization.blocks())
                    .map(|b| {
                        let (h1, h2) = realization.block_gains(b);
                        build_superimposed_set(&self.ca, &self.cb, h1, h2, MERGE_TOLERANCE)
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(HarnessError::runtime)?;
                let map = (!cfg.scheme.is_binary()).then(|| select_coefficients_for_set(&sets[0], self.code.alphabet()));
                owned = sets;
                (owned.as_slice(), map)
            }
        };
        // the demappers see a tiny positive variance even when noise is off
        let relay = RelayFrame { y: &y, sets, realization: &realization, noise_var: noise_var.max(1e-6) };
        let out = self.receive(&relay, map.as_ref())?;
        let estimate = self.code.extract_info(&out.nc);
        let truth: Vec<u8> = match &out.map {
            None => info1.iter().zip(&info2).map(|(a, b)| a ^ b).collect(),
            Some(map) => map.apply_vec(&info1, &info2),
        };
        Ok(RelayTrial { info: (info1, info2), truth, estimate, output: out })
    }

    pub fn simulate_frame(&self, snr_db: f64, frame: u64) -> Result<FrameOutcome, HarnessError> {
        let t = self.trial(snr_db, frame)?;
        let bit_errors: u64 = t.estimate.iter().zip(&t.truth).map(|(a, b)| (a ^ b).count_ones() as u64).sum();
        Ok(FrameOutcome {
            bit_errors,
            frame_error: bit_errors > 0,
            iterations: t.output.iterations,
            converged: t.output.converged,
        })
    }

    /// Runs frames until `min_frame_errors` errors or `max_frames` frames.
    /// Frames are simulated in parallel batches and folded in index order,
    /// so the result is independent of the worker count.
    pub fn run_point(&self, snr_db: f64) -> Result<PointResult, HarnessError> {
        let start = Instant::now();
        let stop = self.config.stopping;
        let batch = (self.threads as u64 * 8).max(8);
        let (mut frames, mut bit_errors, mut frame_errors, mut iterations) = (0u64, 0u64, 0u64, 0u64);
        let mut next = 0u64;
        'outer: while next < stop.max_frames {
            let hi = (next + batch).min(stop.max_frames);
            let outcomes: Vec<_> =
                self.pool.install(|| (next..hi).into_par_iter().map(|f| self.simulate_frame(snr_db, f)).collect());
            for outcome in outcomes {
                let o = outcome?;
                frames += 1;
                bit_errors += o.bit_errors;
                frame_errors += u64::from(o.frame_error);
                iterations += o.iterations as u64;
                if frame_errors >= stop.min_frame_errors || frames >= stop.max_frames {
                    break 'outer;
                }
            }
            next = hi;
        }
        let bits = (frames * self.bits_per_frame()) as f64;
        Ok(PointResult {
            snr_db,
            frames,
            bit_errors,
            frame_errors,
            ber: bit_errors as f64 / bits,
            fer: frame_errors as f64 / frames as f64,
            mean_iters: iterations as f64 / frames as f64,
            seconds: if self.config.record_timing { start.elapsed().as_secs_f64() } else { 0.0 },
        })
    }

    pub fn run_sweep(&self) -> Result<SweepResult, HarnessError> {
        let points = self.config.snr_grid.iter().map(|&s| self.run_point(s)).collect::<Result<_, _>>()?;
        Ok(SweepResult { config_hash: super::config_hash(&self.config), master_seed: self.config.master_seed, points })
    }
}

pub fn run_point(config: &SimulationConfig, snr_db: f64) -> Result<PointResult, HarnessError> {
    Simulation::new(config.clone())?.run_point(snr_db)
}

pub fn run_sweep(config: &SimulationConfig) -> Result<SweepResult, HarnessError> {
    Simulation::new(config.clone())?.run_sweep()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlphabetSpec;
    use crate::channel::ChannelModel;
    use crate::harness::{CodeSpec, Modulation};

    fn config(scheme: Scheme, channel: ChannelModel) -> SimulationConfig {
        let code = if scheme.is_binary() {
            CodeSpec { n: 24, k: 12, dv: 3, dc: 6, alphabet: AlphabetSpec::binary(), seed: 3 }
        } else {
            CodeSpec { n: 24, k: 12, dv: 2, dc: 4, alphabet: AlphabetSpec::gf(3).unwrap(), seed: 3 }
        };
        let mut c = SimulationConfig::new(scheme, Modulation::psk_rotated(8), code, channel);
        c.decoder.max_iter = 20;
        c.outer_iters = 2;
        c.inner_iters = 10;
        c.stopping.max_frames = 40;
        c.stopping.min_frame_errors = 40;
        c
    }

    #[test]
    fn noiseless_frames_are_error_free() {
        for channel in [ChannelModel::Awgn, ChannelModel::BlockRayleigh { blocks: 2 }] {
            for scheme in Scheme::ALL {
                let mut c = config(scheme, channel);
                c.noiseless = true;
                c.stopping.max_frames = 10;
                let r = run_point(&c, 0.0).unwrap();
                assert_eq!(r.frame_errors, 0, "{scheme} {channel:?}");
                assert_eq!(r.frames, 10);
            }
        }
    }

    #[test]
    fn results_do_not_depend_on_threads() {
        for scheme in [Scheme::XorCd, Scheme::NcCd] {
            let c = config(scheme, ChannelModel::BlockRayleigh { blocks: 1 });
            let a = Simulation::with_threads(c.clone(), 1).unwrap().run_point(6.0).unwrap();
            let b = Simulation::with_threads(c, 4).unwrap().run_point(6.0).unwrap();
            assert_eq!((a.frames, a.bit_errors, a.frame_errors, a.mean_iters), (b.frames, b.bit_errors, b.frame_errors, b.mean_iters));
        }
    }

    #[test]
    fn stops_at_error_target() {
        let mut c = config(Scheme::CdNc, ChannelModel::Awgn);
        c.stopping = super::super::Stopping { min_frame_errors: 5, max_frames: 1000 };
        let r = run_point(&c, -10.0).unwrap();
        assert_eq!(r.frame_errors, 5);
        assert!(r.frames < 1000);
        assert!(r.fer > 0.95 * 5.0 / r.frames as f64);
    }

    #[test]
    fn very_low_snr_fails_almost_always() {
        for scheme in [Scheme::XorCd, Scheme::MudNc] {
            let r = run_point(&config(scheme, ChannelModel::Awgn), -10.0).unwrap();
            assert!(r.fer > 0.95, "{scheme}: {}", r.fer);
            assert!(r.ber > 0.1 && r.ber < 0.9);
        }
    }

    #[test]
    fn sweep_matches_points() {
        let mut c = config(Scheme::MudXor, ChannelModel::Awgn);
        c.snr_grid = vec![2.0, 8.0];
        c.record_timing = false;
        let sweep = run_sweep(&c).unwrap();
        assert_eq!(sweep.points.len(), 2);
        assert_eq!(sweep.points[1], run_point(&c, 8.0).unwrap());
        assert_eq!(sweep.config_hash, super::super::config_hash(&c));
    }

    #[test]
    fn bad_configs_are_config_errors() {
        let mut c = config(Scheme::NcCd, ChannelModel::Awgn);
        c.code.alphabet = AlphabetSpec::gf(2).unwrap();
        assert_eq!(Simulation::new(c).err().unwrap().exit_code(), 2);
        let mut c = config(Scheme::XorCd, ChannelModel::Awgn);
        c.code.dc = 5;
        assert_eq!(Simulation::new(c).err().unwrap().exit_code(), 2);
    }
}

/// Error rate used to locate an operating point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Ber,
    Fer,
}

impl Metric {
    /// The rate of `p`, floored at half an error so that an error-free point
    /// still has a finite logarithm.
    fn value(self, p: &PointResult, bits_per_frame: u64) -> f64 {
        match self {
            Metric::Ber => p.ber.max(0.5 / (p.frames * bits_per_frame) as f64),
            Metric::Fer => p.fer.max(0.5 / p.frames as f64),
        }
    }
}

/// SNR where `metric` first falls to `target`, by linear interpolation of
/// its logarithm between neighbouring points of an ascending sweep. `None`
/// when no point reaches the target; the first point when it already does.
pub fn interpolate_crossing(points: &[PointResult], bits_per_frame: u64, metric: Metric, target: f64) -> Option<f64> {
    let i = points.iter().position(|p| metric.value(p, bits_per_frame) <= target)?;
    if i == 0 {
        return Some(points[0].snr_db);
    }
    let (a, b) = (&points[i - 1], &points[i]);
    let (la, lb, lt) = (metric.value(a, bits_per_frame).log10(), metric.value(b, bits_per_frame).log10(), target.log10());
    Some(a.snr_db + (b.snr_db - a.snr_db) * (la - lt) / (la - lb))
}

impl Simulation {
    /// Runs the configured grid in order, stopping after the first point at
    /// or below `target`; returns the interpolated crossing and the points.
    pub fn snr_at(&self, metric: Metric, target: f64) -> Result<(Option<f64>, Vec<PointResult>), HarnessError> {
        let mut points = Vec::new();
        for &snr in &self.config.snr_grid {
            let p = self.run_point(snr)?;
            let done = metric.value(&p, self.bits_per_frame()) <= target;
            points.push(p);
            if done {
                break;
            }
        }
        Ok((interpolate_crossing(&points, self.bits_per_frame(), metric, target), points))
    }
}

#[cfg(test)]
mod crossing_tests {
    use super::*;

    fn point(snr_db: f64, fer: f64) -> PointResult {
        PointResult { snr_db, frames: 1000, bit_errors: 0, frame_errors: 0, ber: fer / 10.0, fer, mean_iters: 0.0, seconds: 0.0 }
    }

    #[test]
    fn log_interpolation() {
        let pts = [point(0.0, 0.5), point(1.0, 1e-1), point(2.0, 1e-3)];
        let x = interpolate_crossing(&pts, 100, Metric::Fer, 1e-2).unwrap();
        assert!((x - 1.5).abs() < 1e-12);
        assert_eq!(interpolate_crossing(&pts, 100, Metric::Fer, 0.9), Some(0.0));
        assert_eq!(interpolate_crossing(&pts, 100, Metric::Fer, 1e-4), None);
        // error-free point counts as half an error
        let pts = [point(0.0, 1e-1), point(1.0, 0.0)];
        let x = interpolate_crossing(&pts, 100, Metric::Fer, 1e-2).unwrap();
        assert!((x - 1.0 / (1.0 + (1e-2f64 / 5e-4).log10())).abs() < 1e-12);
    }
}
