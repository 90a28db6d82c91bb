//! Contraction operators on half-strips and their fixed points.

pub mod abel;
pub mod ansatz;
pub mod operator;
pub mod probe;
pub mod strip;
pub mod telescope;

pub use abel::{
    abel_solve, left_log, AbelBoundChecks, AbelNormalForm, AbelOperator, AbelOptions, AbelSolution,
};
pub use ansatz::{verify_parabolic_ansatz, AnsatzReport};
pub use operator::{
    ball_check, decay_profile, iterate, picard_solve, scaled_residual, DecayProfile, Iterated,
    PicardOperator, SolveOptions, StripOperator,
};
pub use probe::{contraction_probe, escalate, uniqueness_probe, Escalated};
pub use strip::{Lattice, StripDomain, StripFunction, Truncation};
pub use telescope::forward_telescope;
