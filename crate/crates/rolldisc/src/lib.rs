//! Sub-Riemannian geometry of the vertical rolling disc.
//!
//! A disc of radius 1 rolls upright on the plane without slipping. Its
//! configuration is `(x, y, θ)` (contact point and heading; a fourth
//! coordinate `φ` tracks the rolling angle in the extended model). The
//! admissible velocities span a rank-2 distribution, and lengths measured
//! against an orthonormal frame of that distribution make the configuration
//! space a sub-Riemannian manifold.
//!
//! The crate computes, exactly where possible and numerically elsewhere:
//!
//! * [`lie`] — Lie algebras from exact rational structure constants:
//!   brackets, adjoint matrices, solvability/nilpotency, Killing forms,
//!   multiplication tables, JSON import/export.
//! * [`vecfield`] — chart-based vector-field calculus: finite-difference
//!   Lie brackets, Jacobi (control) matrices, bracket-generation rank
//!   tests, generic flows.
//! * [`models`] — the hard-coded control systems (disc in 3 and 4
//!   coordinates, kinematic car, Heisenberg model), the Heisenberg group
//!   operations and invariant frames, and coordinate changes.
//! * [`solver`] — the normal-extremal Hamiltonian systems and an embedded
//!   Runge-Kutta-Fehlberg 4(5) integrator with dense output and
//!   conserved-quantity diagnostics.
//! * [`nilgeo`] — closed-form geodesics of the Heisenberg approximation,
//!   group translations of geodesics, and the cut time/cut point.
//! * [`symmetry`] — the symmetry fields of the metric structure and of the
//!   Lagrangian contact structure, their closed-form flows, numerical
//!   symmetry verification, pushforwards, and orbit families of geodesics.
//! * [`tanaka`] — algebraic Tanaka prolongation of a graded nilpotent
//!   algebra with prescribed degree-0 part, in exact arithmetic, plus the
//!   geometric realization fields of the prolonged algebra.
//! * [`plot`] — deterministic CSV and SVG export of curve families.
//!
//! Coordinate convention: configuration points are ordered `(x, y, θ)`
//! (and `(x, y, θ, φ)` in the 4-dimensional model) everywhere, including
//! files. The heading `θ` lives in `ℝ`, never wrapped to `(−π, π]`;
//! [`vecfield::wrap_angle`] reduces mod 2π for display only.

pub mod exact;
pub mod lie;
pub mod models;
pub mod nilgeo;
pub mod numeric;
pub mod plot;
pub mod solver;
pub mod symmetry;
pub mod tanaka;
pub mod vecfield;

pub use exact::Rat;
