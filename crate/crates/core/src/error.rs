use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cycle detected through node `{0}`")]
    CycleDetected(String),

    #[error("node `{0}` is not connected to the root")]
    DisconnectedInput(String),

    #[error("degree violation at node `{node}`: {reason}")]
    DegreeViolation { node: String, reason: String },

    #[error("node `{0}` has more than one parent")]
    MultipleParents(String),

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("value {value} at index {index} is outside the domain {domain}")]
    OutOfDomain {
        index: usize,
        value: f64,
        domain: &'static str,
    },

    #[error("{what}: expected length {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("starting vector is not a feasible solution for the observation")]
    InfeasibleStart,

    #[error("link {0} is not an internal link")]
    NotInternal(usize),

    #[error("x = {x} lies outside [{lo}, {hi}]")]
    XOutOfRange { x: f64, lo: f64, hi: f64 },

    #[error("invalid interval on path {path}: [{lo}, {hi}]")]
    InvalidInterval { path: usize, lo: f64, hi: f64 },

    #[error("instance with {n} links exceeds the enumeration limit of {limit}")]
    InstanceTooLarge { n: usize, limit: usize },

    #[error("K = {k} is below the minimum {min} for this branch node")]
    KTooSmall { k: usize, min: usize },

    #[error("K = {k} exceeds the node degree {max}")]
    KTooLarge { k: usize, max: usize },

    #[error("node {0} is not a branch node")]
    NotBranchNode(usize),

    #[error("inconsistent binary observation: {0}")]
    InconsistentObservation(String),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            got,
        })
    }
}
