//! Symbolic-numeric toolkit for high-order derivatives of inverse, composed
//! and product maps, and for the rearrangement-invariant norms used to
//! measure them.
//!
//! * [`symbolic`]: exact term expansions and their 1-D oracle.
//! * [`multilinear`]: dense multilinear maps and numeric evaluation of terms.
//! * [`spaces`]: step profiles, rearrangements, Lebesgue/Lorentz/Orlicz norms,
//!   Boyd indices and the Hölder / Hardy–Littlewood–Pólya / Young checks.
//! * [`maps`]: closed-form bilipschitz test maps and finite differences.
//! * [`harness`]: end-to-end checks, suites and reports.

pub mod harness;
pub mod maps;
pub mod multilinear;
pub mod spaces;
pub mod symbolic;
