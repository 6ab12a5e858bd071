use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::algebra::{Alphabet, AlphabetSpec};
use crate::channel::ChannelModel;
use crate::ldpc::{CheckUpdate, DecoderConfig};
use crate::modem::Constellation;
use crate::pnc::{build_superimposed_set, detect_ambiguity, CoefficientStrategy, NcRule, MERGE_TOLERANCE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    XorCd,
    IterXorCd,
    MudXor,
    NcCd,
    CdNc,
    MudNc,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [Scheme::XorCd, Scheme::IterXorCd, Scheme::MudXor, Scheme::NcCd, Scheme::CdNc, Scheme::MudNc];

    /// Bit-interleaved schemes decode a binary code.
    pub fn is_binary(self) -> bool {
        matches!(self, Scheme::XorCd | Scheme::IterXorCd | Scheme::MudXor)
    }

    pub fn needs_unique_pairs(self) -> bool {
        matches!(self, Scheme::MudXor | Scheme::MudNc)
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::XorCd => "xor-cd",
            Scheme::IterXorCd => "iter-xor-cd",
            Scheme::MudXor => "mud-xor",
            Scheme::NcCd => "nc-cd",
            Scheme::CdNc => "cd-nc",
            Scheme::MudNc => "mud-nc",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Scheme::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| format!("unknown scheme '{s}'"))
    }
}

/// User constellations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Modulation {
    Psk { m: usize, rotation_a: f64, rotation_b: f64 },
    Pam { m: usize, spacings_a: Vec<f64>, spacings_b: Vec<f64> },
}

impl Modulation {
    /// 8-PSK for user 1 and its pi/8 rotation for user 2.
    pub fn psk_rotated(m: usize) -> Self {
        Modulation::Psk { m, rotation_a: 0.0, rotation_b: PI / m as f64 }
    }

    pub fn pam_uniform(m: usize) -> Self {
        let s = vec![1.0; m.saturating_sub(1)];
        Modulation::Pam { m, spacings_a: s.clone(), spacings_b: s }
    }

    pub fn order(&self) -> usize {
        match self {
            Modulation::Psk { m, .. } | Modulation::Pam { m, .. } => *m,
        }
    }

    pub fn constellations(&self) -> Result<(Constellation, Constellation), HarnessError> {
        let r = match self {
            Modulation::Psk { m, rotation_a, rotation_b } => {
                (Constellation::psk_gray(*m, *rotation_a), Constellation::psk_gray(*m, *rotation_b))
            }
            Modulation::Pam { m, spacings_a, spacings_b } => (Constellation::pam(*m, spacings_a), Constellation::pam(*m, spacings_b)),
        };
        Ok((r.0.map_err(HarnessError::config)?, r.1.map_err(HarnessError::config)?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeSpec {
    pub n: usize,
    pub k: usize,
    pub dv: usize,
    pub dc: usize,
    pub alphabet: AlphabetSpec,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stopping {
    pub min_frame_errors: u64,
    pub max_frames: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub scheme: Scheme,
    pub modulation: Modulation,
    pub code: CodeSpec,
    pub channel: ChannelModel,
    pub snr_grid: Vec<f64>,
    pub stopping: Stopping,
    pub decoder: DecoderConfig,
    /// Demapper-decoder rounds of the iterative schemes.
    pub outer_iters: usize,
    /// Decoder iterations per round.
    pub inner_iters: usize,
    /// Extrinsic-exchange rounds between the two MUD-XOR decoders, which
    /// split `decoder.max_iter` evenly; 0 decodes each user once.
    pub mud_rounds: usize,
    pub nc_strategy: CoefficientStrategy,
    pub master_seed: u64,
    /// Drops channel noise (debugging aid).
    pub noiseless: bool,
    /// Fills the `seconds` column; off gives byte-reproducible output.
    pub record_timing: bool,
}

impl SimulationConfig {
    /// Defaults for `scheme` with the given modulation and code.
    pub fn new(scheme: Scheme, modulation: Modulation, code: CodeSpec, channel: ChannelModel) -> Self {
        SimulationConfig {
            scheme,
            modulation,
            code,
            channel,
            snr_grid: vec![0.0],
            stopping: Stopping { min_frame_errors: 30, max_frames: 10_000 },
            decoder: DecoderConfig::default(),
            outer_iters: 6,
            inner_iters: 25,
            mud_rounds: 3,
            nc_strategy: CoefficientStrategy::Selected,
            master_seed: 1,
            noiseless: false,
            record_timing: true,
        }
    }

    /// Symbols per codeword on the channel.
    pub fn channel_symbols(&self) -> usize {
        let m = self.modulation.order();
        if self.scheme.is_binary() {
            self.code.n / m.trailing_zeros().max(1) as usize
        } else {
            self.code.n
        }
    }

    /// Checks everything that does not need a constructed code.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let m = self.modulation.order();
        let (ca, cb) = self.modulation.constellations()?;
        self.channel.validate().map_err(HarnessError::config)?;
        if self.snr_grid.is_empty() || self.snr_grid.iter().any(|s| !s.is_finite()) {
            return Err(HarnessError::Config("SNR grid must be non-empty and finite".into()));
        }
        if self.stopping.min_frame_errors == 0 || self.stopping.max_frames == 0 {
            return Err(HarnessError::Config("min_frame_errors and max_frames must be at least 1".into()));
        }
        let q = Alphabet::new(self.code.alphabet).size();
        if self.scheme.is_binary() {
            if !self.code.alphabet.is_binary() {
                return Err(HarnessError::Config(format!("{} needs a binary code, got {}", self.scheme, self.code.alphabet)));
            }
            let b = m.trailing_zeros() as usize;
            if !self.code.n.is_multiple_of(b) {
                return Err(HarnessError::Config(format!("code length {} not a multiple of {b} bits per symbol", self.code.n)));
            }
            if self.scheme == Scheme::IterXorCd && (self.outer_iters == 0 || self.inner_iters == 0) {
                return Err(HarnessError::Config("outer and inner iteration counts must be at least 1".into()));
            }
        } else if q != m {
            return Err(HarnessError::Config(format!("{} needs a code over {m} symbols, got {}", self.scheme, self.code.alphabet)));
        }
        let message_q = if self.scheme == Scheme::CdNc { q * q } else { q };
        if self.scheme.is_binary() && self.decoder.check_update != CheckUpdate::Direct {
            return Err(HarnessError::Config("binary decoding has no check-update variants".into()));
        }
        self.decoder.validate(message_q).map_err(HarnessError::config)?;
        if self.channel == ChannelModel::Awgn {
            let one = num_complex::Complex64::new(1.0, 0.0);
            let set = build_superimposed_set(&ca, &cb, one, one, MERGE_TOLERANCE).map_err(HarnessError::config)?;
            let report = detect_ambiguity(&set, &NcRule::BitXor);
            if self.scheme.needs_unique_pairs() && !report.unique_pair {
                return Err(HarnessError::Config(format!("{} needs constellations with unique transmission pairs", self.scheme)));
            }
            if matches!(self.scheme, Scheme::XorCd | Scheme::IterXorCd) && report.is_ambiguous() {
                return Err(HarnessError::Config("constellations are ambiguous under bitwise XOR".into()));
            }
        }
        Ok(())
    }
}
