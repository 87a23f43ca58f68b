//! Fixtures shared by the criterion benches.

use hypdiam_core::graph::{is_connected, sample_configuration_model};
use hypdiam_core::seeds::derive_seed;
use hypdiam_core::surface::{assemble_surface, auto_ell, Surface};

/// First connected surface of the given genus from a fixed seed sequence,
/// with the automatic cuff length.
pub fn connected_surface(genus: u64) -> Surface {
    (0..)
        .map(|t| sample_configuration_model(genus, derive_seed(0, genus, t)).expect("valid genus"))
        .find(is_connected)
        .map(|g| assemble_surface(g, auto_ell(genus)).expect("surface assembles"))
        .expect("some sample is connected")
}
