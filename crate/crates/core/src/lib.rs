//! Physical-layer network coding over the two-user multiple access relay
//! channel: signal sets, Latin-square maps, relay and destination decoders,
//! a complex-field network coding baseline and Monte Carlo SEP sweeps.

pub mod cfnc;
pub mod channel;
pub mod destination;
pub mod experiments;
pub mod netcode;
pub mod numerics;
pub mod relay;
pub mod scheme;
pub mod signal;

pub use numerics::Complex;
