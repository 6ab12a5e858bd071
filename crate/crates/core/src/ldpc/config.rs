use serde::{Deserialize, Serialize};

use super::LdpcError;

/// How check-node messages are combined.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckUpdate {
    /// Group convolution computed term by term.
    Direct,
    /// Convolution through the Walsh-Hadamard (GF(2^r)) or DFT (Z_M)
    /// transform of the symbol group.
    Fft,
    /// Log-domain extended min-sum keeping `list_size` entries per message.
    Ems { list_size: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoderConfig {
    pub max_iter: usize,
    pub check_update: CheckUpdate,
    /// Weight of the new check message, `1.0` disables damping.
    pub damping: f64,
    pub early_stop: bool,
    /// Log-domain gap below the weakest kept EMS entry assigned to the
    /// truncated entries.
    pub ems_offset: f64,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig { max_iter: 150, check_update: CheckUpdate::Direct, damping: 1.0, early_stop: true, ems_offset: 0.0 }
    }
}

impl DecoderConfig {
    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_check_update(mut self, check_update: CheckUpdate) -> Self {
        self.check_update = check_update;
        self
    }

    /// Checks the invariants against a message alphabet of size `q`.
    pub fn validate(&self, q: usize) -> Result<(), LdpcError> {
        if self.max_iter == 0 {
            return Err(LdpcError::Config("max_iter must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(LdpcError::Config(format!("damping {} outside (0, 1]", self.damping)));
        }
        if let CheckUpdate::Ems { list_size } = self.check_update {
            if list_size == 0 || list_size > q {
                return Err(LdpcError::Config(format!("EMS list size {list_size} outside [1, {q}]")));
            }
        }
        if !(self.ems_offset >= 0.0) {
            return Err(LdpcError::Config("EMS offset must be non-negative".into()));
        }
        Ok(())
    }
}

/// Hard decision and convergence status of one decode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeOutcome<T> {
    pub decision: T,
    /// True when the hard decision satisfies every parity check and no
    /// position was an exact tie.
    pub converged: bool,
    pub iterations: usize,
}
