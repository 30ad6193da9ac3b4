//! Command-line campaigns for the relay TCM library: BER sweeps, code
//! analysis, PEP bounds and capacity curves, with CSV output and a JSON
//! manifest per run.

pub mod config;
pub mod error;
pub mod output;
pub mod reports;
pub mod sweep;

pub use config::{BoundsConfig, CapacityConfig, ChannelConfig, DecoderKind, SweepConfig};
pub use error::{HarnessError, Result};
pub use sweep::{
    compare_ideal_vs_nonideal, es_at_ber, estimate_diversity, run_ber_sweep, run_uncoded_sweep, PairedRecord,
    SweepRecord,
};
