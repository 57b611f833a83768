//! Checks that an action behaves as its descriptor claims: Hamilton's
//! relation, isotropy, momentum equivariance, symplectic pullback, the
//! cocycle, gauge freedom, momentum-generator duality, and the symbolic
//! calculus for polynomial observables and 1-forms.
//!
//! Every numeric check samples deterministically from a seed, evaluates the
//! samples (in parallel when the `parallel` feature is on), and folds the
//! observations into a three-valued [`report::Verdict`]: discrepancies can
//! be certainly present, certifiably absent, or unresolved at the working
//! precision.

pub mod checks;
pub mod poly;
pub mod report;
pub mod sample;

pub use checks::{
    assess, certification_threshold, check_closed, check_duality, check_duality_at,
    check_gauge, check_generator, check_hamilton, check_isotropy, check_orbit_invariance,
    check_pullback_symplectic, cocycle_tau, directional_derivative, gradient_pairing,
    integrate_closed_form, nudge, numeric_generator, quotient_threshold, Assessment,
    CheckParams, Classification,
};
pub use poly::{poisson_bracket, PolyObservable, PolyOneForm, ZeroStatus};
pub use report::{CheckReport, Judge, Obs, ObserveStyle, Tally, Verdict};
pub use sample::{rng_for, sample_groups, sample_points, sample_points_integral};
