use thiserror::Error;

/// Unified error type for the whole crate.
#[derive(Debug, Error)]
pub enum QcombError {
    /// A label appears in both operands/tuples with different dimensions.
    #[error("dimension mismatch on label `{label}`: {left} vs {right}")]
    DimMismatch {
        label: String,
        left: usize,
        right: usize,
    },

    /// A label occurs twice within one space tuple.
    #[error("duplicate label `{0}` in space tuple")]
    DuplicateLabel(String),

    /// A label was referenced that the operator does not carry.
    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    /// The requested label list is not a permutation of the operator's labels.
    #[error("`{0:?}` is not a permutation of the operator's labels")]
    NotAPermutation(Vec<String>),

    /// Matrix shape does not match the declared spaces.
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    /// Tensor product operands share labels.
    #[error("overlapping labels in tensor product: {0:?}")]
    OverlappingLabels(Vec<String>),

    /// A label occurs in three or more operands of a link chain.
    #[error("label `{0}` occurs in three or more operands of the chain")]
    LabelUsedThrice(String),

    /// Operator fails the Hermiticity check.
    #[error("operator is not Hermitian: max |M - M^dag| entry = {0:.3e}")]
    NotHermitian(f64),

    /// Operator fails the PSD check.
    #[error("operator is not positive semidefinite: min eigenvalue = {0:.3e}")]
    NotPsd(f64),

    /// A Choi operator fails complete positivity.
    #[error("map is not completely positive: min Choi eigenvalue = {0:.3e}")]
    NotCp(f64),

    /// Deterministic-comb hierarchy violated at a level.
    #[error("normalization hierarchy violated at level j={level}: residual = {residual:.3e}")]
    LevelViolation { level: usize, residual: f64 },

    /// A comb-valued argument was expected to be deterministic and is not.
    #[error("not a deterministic comb: {0}")]
    NotDeterministicComb(String),

    /// The feasibility solver failed to produce a witness within max_iter.
    #[error("feasibility solver did not converge: residual = {residual:.3e} after {iters} iterations")]
    FeasibilitySolverFailure { residual: f64, iters: usize },

    /// Instrument elements do not sum to a deterministic comb.
    #[error("instrument elements do not sum to a deterministic comb: {0}")]
    SumNotDeterministic(String),

    /// Kraus-relation solve residual exceeded tolerance during realization.
    #[error("numerical rank failure in realization: residual = {0:.3e}")]
    NumericalRankFailure(f64),

    /// Tooth-merge schedule is not a valid interleaving.
    #[error("invalid interleaving: {0}")]
    InvalidInterleaving(String),

    /// Requested merge of non-adjacent cross-comb teeth.
    #[error("merge pair ({0}, {1}) is not adjacent in the schedule")]
    NonAdjacentMerge(usize, usize),

    /// The network graph contains a directed cycle.
    #[error("cycle found through nodes: {0:?}")]
    CycleFound(Vec<String>),

    /// A wire is malformed (bad endpoint, duplicate use, dim mismatch).
    #[error("wire error: {0}")]
    WireError(String),

    /// Tester validation failure.
    #[error("tester violation: {0}")]
    TesterViolation(String),

    /// The base POVM of an informationally complete tester does not span.
    #[error("base POVM is not informationally complete: span rank {rank} < {need}")]
    BaseNotComplete { rank: usize, need: usize },

    /// Theta factor singular although the tester claims informational completeness.
    #[error("theta factor is singular (min eigenvalue {0:.3e}); inconsistent with informational completeness")]
    ThetaSingular(f64),

    /// Seesaw failed to reach tolerance-level improvement within max_iter.
    #[error("seesaw did not converge within {0} iterations")]
    ConvergenceFailure(usize),

    /// Multi-time post-selection probability numerically zero.
    #[error("post-selection impossible: normalizer = {0:.3e}")]
    PostSelectionImpossible(f64),

    /// Malformed serialized artifact.
    #[error("parse error: {0}")]
    Parse(String),
}
