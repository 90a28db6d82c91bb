//! The model equation `y(z+1) = λy + y²`: its series solution in `w = λ^z`,
//! the branch ladder, and the sheet graph obtained by continuation.

pub mod graph;
pub mod identities;
pub mod series;

pub use graph::{
    build_surface, pairing_at, sheet_germs, sheet_value, Edge, Sheet, SurfaceGraph, SurfaceJson,
    SurfaceOptions, DEPTH_CAP,
};
pub use identities::{
    claim4_sequences, origin_loops, sheet_identity_check, Claim4Report, IdentityReport,
    IdentityResidual, IDENTITIES,
};
pub use series::{
    estimate_radius, find_rhat, majorant_bound, model_series, symmetry_lift, ModelSolution,
};
