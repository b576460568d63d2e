//! Two-dimensional gravity water waves in a tank closed by a pneumatic
//! absorbing beach, together with audits of the integral identities and
//! decay estimates that govern the damping.

pub mod circle;
pub mod cutoff;
pub mod damping;
pub mod diagnostics;
pub mod dynamics;
pub mod elliptic;
pub mod error;
pub mod grid;
pub mod multipliers;
pub mod quadrature;
pub mod spectral;

pub use cutoff::{smooth_cutoff, SmoothStep};
pub use damping::{DampingLaw, PressureField};
pub use diagnostics::{
    audit_run, decay_report, AuditSamples, AuditSuite, DecayReport, DiagnosticsRecord, IdentityReport,
};
pub use dynamics::{simulate, simulate_observed, Dynamics, ExpFilter, InitialCondition, Model, RunHistory, SimConfig};
pub use elliptic::{
    compute_traces, flat_dtn, solve_potential, EllipticSolution, EllipticSolver, PotentialField,
    SurfaceState, TraceSet,
};
pub use error::{Error, Result};
pub use grid::{GridFunction1D, GridFunction2D, SimGrid, TankGeometry};
pub use multipliers::{derived_multipliers, BeachProfile, DecayConstants, DerivedMultipliers};
pub use quadrature::{cumulative_trapezoid, trapezoid_1d, trapezoid_nonuniform, volume_integral};
pub use spectral::{dct_antiderivative_meanzero, dct_derivative, CosineSpectrum, Parity};
