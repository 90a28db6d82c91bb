use thiserror::Error;

/// A point reported in an error message, as `(re, im)`.
pub type Point = (f64, f64);

/// Every failure raised by the library.
///
/// [`Error::is_numerical`] separates numerical breakdowns (non-contraction,
/// step collapse, ...) from invalid input, which the CLI maps to distinct
/// exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("singular expression ({what}) at {at:?}")]
    Singular { what: String, at: Point },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("series centers or scales differ")]
    CenterMismatch,
    #[error("leading coefficient is zero")]
    ZeroLeading,
    #[error("inner series has a nonzero constant term")]
    NonzeroConstant,
    #[error("root finder did not converge after {iterations} iterations")]
    RootNonConvergence { iterations: usize },
    #[error("fixed point has multiplier {multiplier:?}, expected 1")]
    NotParabolic { multiplier: Point },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("resonance at order {order}: |λ^n − λ| below tolerance")]
    Resonance { order: usize },
    #[error("operator is not contracting (empirical Lipschitz {lipschitz:.3e})")]
    NonContraction { lipschitz: f64 },
    #[error("iterate left the ball: |w − α| = {distance:.3e} at {at:?}")]
    BallExit { at: Point, distance: f64 },
    #[error("bound violated at {at:?}: {value:.3e} > {bound:.3e}")]
    BoundViolation { at: Point, value: f64, bound: f64 },
    #[error("no convergence after {iterations} iterations (last step {last_step:.3e})")]
    NoConvergence { iterations: usize, last_step: f64 },
    #[error("orbit blew up after {step} steps")]
    Blowup { step: usize },
    #[error("pole of the equation at {at:?}")]
    Pole { at: Point },
    #[error("branch point hit at {at:?} (level {level})")]
    BranchPoint { at: Point, level: usize },
    #[error("ambiguous continuation at {at:?} (level {level}): preimages equidistant")]
    Tie { at: Point, level: usize },
    #[error("step collapse near {at:?}: suspected branch point on the path")]
    StepCollapse { at: Point },
    #[error("need at least {needed} nonzero coefficients, found {found}")]
    InsufficientCoefficients { needed: usize, found: usize },
    #[error("no sign change found on the bracket [{lo:.6e}, {hi:.6e}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("orbit escaped the petal after {step} steps")]
    PetalEscape { step: usize },
    #[error("evaluation outside the validated disk (|w − c| = {distance:.3e} ≥ {radius:.3e})")]
    OutsideDisk { distance: f64, radius: f64 },
    #[error("monodromy around ladder index {index} from sheet {sheet} failed: {source}")]
    Monodromy {
        index: usize,
        sheet: String,
        #[source]
        source: Box<Error>,
    },
    #[error("i/o failure: {0}")]
    Io(String),
}

impl Error {
    /// `true` for numerical breakdowns, `false` for invalid input or I/O.
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::Syntax { .. }
                | Error::Invalid(_)
                | Error::CenterMismatch
                | Error::NonzeroConstant
                | Error::NotParabolic { .. }
                | Error::Degenerate(_)
                | Error::InsufficientCoefficients { .. }
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
