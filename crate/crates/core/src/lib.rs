//! Numerical analysis of the mass-constrained Schrodinger-Poisson energy
//!
//!   E(u) = 1/2 int |grad u|^2 + q/4 int phi_u u^2 - lambda/p int |u|^p
//!
//! on spheres S_r = { u : int u^2 = r } of radial functions on R^3, where
//! phi_u solves -delta phi_u = u^2. The crate provides:
//!
//! - a radial grid with corrected quadrature, dilation, and projection
//!   ([`grid`]);
//! - the Poisson potential phi_u and the energy integrals ([`hartree`]);
//! - the fiber maps t -> E(r^{1/2} u^t), their exact five-case critical
//!   point taxonomy, Nehari membership, and the Pohozaev identity
//!   ([`fiber`]);
//! - closed-form per-profile extremal radii and couplings ([`extremal`]);
//! - the nonlinear Rayleigh quotient, threshold estimation over trial
//!   families, and the multi-bump comparison sequence ([`rayleigh`],
//!   [`family`], [`catto`]);
//! - constrained minimization on spheres and Nehari components, mass
//!   sweeps, and regime detection ([`minimize`], [`sweep`]);
//! - sampled verification of the regime-dependent integral inequalities
//!   ([`inequalities`]).
//!
//! Everything is deterministic for a fixed seed; all randomness flows
//! through explicitly seeded generators.

pub mod catto;
pub mod error;
pub mod extremal;
pub mod family;
pub mod fiber;
pub mod grid;
pub mod hartree;
pub mod inequalities;
pub mod minimize;
pub mod neldermead;
pub mod rayleigh;
pub mod sweep;

pub use catto::{catto_sequence, log_log_slope, CattoRow, DEFAULT_SEPARATION};
pub use error::{CoreError, Result};
pub use extremal::{
    extremal_pair, extremal_report, prefactor, row_bar, row_dphi, row_phi, row_star, row_tilde,
    solve_closed_system, ExtremalPair, ExtremalReport, ExtremalVariant, P_THREE_TOL,
};
pub use family::{FamilyKind, TrialFamily};
pub use fiber::{
    classify_fiber, fiber_eval, nehari_membership, nehari_membership_with, pohozaev_residual,
    CriticalKind, CriticalPoint, FiberCase, FiberClassification, FiberMap, NehariMembership,
    NehariVerdict, PohozaevResidual,
};
pub use grid::{RadialFunction, RadialGrid, DEFAULT_LEAK_TOL, DEFAULT_N, DEFAULT_R_MAX};
pub use hartree::{
    hartree_energy, hartree_energy_direct, hartree_potential, HartreePotential, Integrals,
};
pub use inequalities::{
    check_inequalities, coercivity_constants, CoercivityConstants, InequalityCheck,
};
pub use minimize::{
    detect_unbounded, energy, energy_gradient, minimize_nehari, minimize_on_sphere,
    minimize_on_sphere_from, GroundStateOptions, NehariMinimization, NehariSide, SolveReport,
};
pub use neldermead::{nelder_mead, NelderMeadOptions, NelderMeadResult};
pub use rayleigh::{
    estimate_kgn, gn_quotient, minimize_rayleigh, p_zero, rayleigh, rayleigh_at_83,
    rayleigh_exponents, thresholds, QuotientMinimization, ThresholdEstimate,
};
pub use sweep::{
    appendix_estimates, sweep_i, MassComparisonReport, SweepFlags, SweepResult, SweepRow,
};
