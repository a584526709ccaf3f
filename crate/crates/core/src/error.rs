use thiserror::Error;

/// Everything that can go wrong while building, generating or checking a sequence.
#[derive(Debug, Error)]
pub enum Error {
    #[error("sublinearity violated at n = {n}: r(n) = {r} > n")]
    SublinearityViolation { n: usize, r: usize },

    #[error("order must be positive, but r({n}) = {r}")]
    ZeroOrder { n: usize, r: i128 },

    #[error("r(0) must equal 1, got {r0}")]
    Origin { r0: usize },

    #[error("invalid order function: {0}")]
    InvalidSpec(String),

    #[error("order table has no value at n = {n} (tail rule is \"error\")")]
    TableExhausted { n: usize },

    #[error("index {index} out of range {lo}..={hi}")]
    IndexOutOfRange { index: i64, lo: i64, hi: i64 },

    #[error("digit budget exceeded at n = {n}: {bits} bits stored, budget {budget}")]
    DigitBudgetExceeded { n: usize, bits: u64, budget: u64 },

    #[error("invalid recursion order {0}, expected at least 1")]
    InvalidOrder(usize),

    #[error("horizon {horizon} too short, need at least {needed}")]
    InsufficientHorizon { horizon: usize, needed: usize },

    #[error("hypothesis violated at n = {n}: r(n) = {r} lies outside [{lo}, {hi}]")]
    HypothesisViolation { n: usize, r: usize, lo: usize, hi: usize },

    #[error("sup of r(n) - n is unbounded")]
    UnboundedSup,

    #[error("sup of r(n) - n cannot be derived for an opaque order function")]
    UnderivableSup,

    #[error("expected {expected} initial values, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("recursion for {sequence} reaches index {index} < 1 at n = {n}")]
    IndexUnderflow {
        sequence: &'static str,
        n: usize,
        index: i64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot parse {0:?} as a rational number")]
    ParseRatio(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
