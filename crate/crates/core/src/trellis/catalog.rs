use crate::constellation::{make_psk, LabellingScheme};
use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{one_state_trellis, uncoded_labels, LabelledTrellis};

const CATALOG: &[(&str, &str)] = &[
    ("two_state_8psk", include_str!("../../data/two_state_8psk.trellis")),
    ("four_state_8psk", include_str!("../../data/four_state_8psk.trellis")),
    ("eight_state_8psk", include_str!("../../data/eight_state_8psk.trellis")),
    ("sixteen_state_8psk", include_str!("../../data/sixteen_state_8psk.trellis")),
    ("eight_state_16psk", include_str!("../../data/eight_state_16psk.trellis")),
    ("example1_4psk", include_str!("../../data/example1_4psk.trellis")),
];

pub fn catalog_names() -> impl Iterator<Item = &'static str> {
    CATALOG.iter().map(|(n, _)| *n)
}

/// Text of the shipped data file for `name`.
pub fn catalog_source(name: &str) -> Result<&'static str> {
    CATALOG
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::UnknownCode(name.to_string()))
}

/// Loads a built-in code by name.
pub fn catalog<T: Real>(name: &str) -> Result<LabelledTrellis<T>> {
    LabelledTrellis::from_text(name, catalog_source(name)?)
}

/// Uncoded M-PSK as a one-state trellis with `M` parallel edges.
pub fn uncoded<T: Real>(m: usize, scheme: LabellingScheme) -> Result<LabelledTrellis<T>> {
    let c = make_psk(m)?;
    let name = match scheme {
        LabellingScheme::Constant => format!("uncoded_{m}psk"),
        LabellingScheme::Bar => format!("uncoded_{m}psk_bar"),
    };
    LabelledTrellis::new(name, one_state_trellis(m), uncoded_labels(m, scheme), c)
}
