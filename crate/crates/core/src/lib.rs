//! Channel-coded physical-layer network coding for the two-way relay
//! channel.
//!
//! Two users encode with the same LDPC code, modulate, and transmit
//! simultaneously; the relay decodes a network-coded combination of their
//! messages from the superimposed signal. The crate covers the finite
//! alphabets ([`algebra`]), code construction and belief propagation
//! ([`ldpc`]), constellations ([`modem`]), the multiple-access channel
//! ([`channel`]), the relay receivers ([`pnc`]) and the Monte Carlo driver
//! ([`harness`]).

pub mod algebra;
pub mod channel;
pub mod harness;
pub mod ldpc;
pub mod modem;
pub mod oracle;
pub mod pnc;
pub mod rng;

pub use algebra::{Alphabet, AlphabetSpec, Element};
pub use channel::{ChannelModel, ChannelRealization};
pub use harness::{Scheme, SimulationConfig, SweepResult};
pub use ldpc::{CheckUpdate, DecoderConfig, LdpcCode};
pub use modem::Constellation;
pub use pnc::{NcMap, SuperimposedSet};
