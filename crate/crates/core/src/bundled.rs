//! The two reference scenarios shipped with the crate.

use crate::dsl;
use crate::graph::InstanceGraph;

/// Ride-hailing trip with a dashcam.
pub const UBER: &str = include_str!("../scenarios/uber.vdse");

/// Speeding incident involving a speed camera, police, DVLA and an insurer.
pub const SPEEDING: &str = include_str!("../scenarios/speeding.vdse");

pub fn uber() -> InstanceGraph {
    dsl::parse(UBER).expect("bundled uber scenario parses")
}

pub fn speeding() -> InstanceGraph {
    dsl::parse(SPEEDING).expect("bundled speeding scenario parses")
}

/// Looks up a bundled scenario by name.
pub fn source(name: &str) -> Option<&'static str> {
    match name {
        "uber" => Some(UBER),
        "speeding" => Some(SPEEDING),
        _ => None,
    }
}
