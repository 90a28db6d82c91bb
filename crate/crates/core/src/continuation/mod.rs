//! Analytic continuation by chains of backward or forward steps.

pub mod chain;
pub mod general;
pub mod model;
pub mod path;

pub use chain::{Advance, Chain, ChainDynamics, ChainState, Forced, Rejection};
pub use general::{preimage_polynomial, preimages, step_backward, step_forward, EquationDynamics};
pub use model::{
    evaluate_sheet, model_preimages, monodromy, origin_loop, sheet_chain, sheet_element,
    sheet_origin, step_backward_model, ModelDynamics, Sign,
};
pub use path::{
    continue_along, loop_around, FunctionElement, MonodromyResult, PathJson, PathKind, PathPoint,
    PathSpec,
};
