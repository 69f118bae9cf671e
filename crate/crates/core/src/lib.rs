//! Numerical realization of post-singularly finite maps in three families
//! (`e^{λz}`, `α z^p e^{λz}` and `M_α(e^{βz})`) by iterating the Thurston
//! pullback on marked configurations of the sphere.

pub mod error;
pub mod export;
pub mod family;
pub mod lambert;
pub mod newton;
pub mod portrait;
pub mod pullback;
pub mod qd;
pub mod quadrature;
pub mod sphere;
pub mod verify;

pub use error::{Error, Result};
pub use export::{trace_csv_string, write_trace_csv, ResultSummary};
pub use family::{solve_parameter, FamilyParams, FamilySpec, SingularPoints};
pub use newton::NewtonSettings;
pub use num_complex::Complex64;
pub use portrait::{winding_number, CriticalCase, Layout, OrbitPortrait, SecondOrbit};
pub use pullback::{
    compactness_bound_check, initial_configuration, iterate, min_spherical_gap, pullback_step,
    CompactnessReport, Diagnostics, IterationResult, IterationSettings, IterationTrace,
    MarkedConfiguration, Status, StepRecord,
};
pub use qd::{
    canonical_basis, contraction_ratio, push_forward_at, qd_norm, ContractionReport,
    ContractionSettings, PushForward, QuadraticDifferential,
};
pub use quadrature::{Estimate, QuadSettings};
pub use sphere::{
    branch_log, mobius_apply, mobius_invert, spherical_distance, ExtendedComplex, Finite, Infinity,
};
pub use verify::{oracle_solve, orbit_verify, OracleSettings, OracleSolution, VerifyReport};
