//! The catalog of group actions on p-adic phase spaces, with phase-space
//! types, orbit machinery, and the digit counterexample.

pub mod catalog;
pub mod digit;
pub mod orbit;
pub mod space;
pub mod toric;

pub use catalog::{
    ActionDescriptor, ActionFlags, ActionKind, AdditiveDomain, GroupElement, GroupSpec,
};
pub use digit::{
    digit_act, digit_act_window, digit_orbit_equiv, digit_phi, OrbitOutcome, OrbitPoint,
};
pub use orbit::{rotation_orbit_witness, RotationWitness};
pub use space::{
    FormFactor, PhasePoint, SpaceFactor, SpaceSpec, SymplecticFormSpec, TangentVector,
};
pub use toric::{BallNode, BallTree};

use num_bigint::BigInt;

use crate::padic::{Padic, Prime};

/// An integer constant carried at absolute precision min_abs (at least one
/// digit past the radix point so zero centers stay usable).
pub(crate) fn int_at(p: Prime, k: &BigInt, min_abs: i64) -> Padic {
    let rel = min_abs.max(1) as u32 + 4;
    Padic::from_bigint(p, k, rel)
}
