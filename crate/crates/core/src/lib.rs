//! Trellis coded modulation for the half-duplex decode-and-forward relay
//! channel with Rayleigh fading.
//!
//! The numeric core is generic over the real scalar type; [`f64`] and
//! [`f32`] aliases for the most used types live at the crate root.

pub mod capacity;
pub mod channel;
pub mod codemetrics;
pub mod constellation;
pub mod decoder;
pub mod error;
pub mod pepbounds;
pub mod rng;
pub mod scalar;
pub mod trellis;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Constellation64 = constellation::Constellation<f64>;
pub type Constellation32 = constellation::Constellation<f32>;
pub type LabelledTrellis64 = trellis::LabelledTrellis<f64>;
pub type LabelledTrellis32 = trellis::LabelledTrellis<f32>;
pub type ChannelParams64 = channel::ChannelParams<f64>;
pub type ChannelParams32 = channel::ChannelParams<f32>;
pub type ChannelRealization64 = channel::ChannelRealization<f64>;
pub type ChannelRealization32 = channel::ChannelRealization<f32>;
