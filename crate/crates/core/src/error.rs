use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A condition was used at a root object it does not belong to.
    #[error("root object mismatch")]
    RootMismatch,
    /// Two cospans were composed whose inner interfaces differ.
    #[error("cospan interface mismatch")]
    InterfaceMismatch,
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("invalid counterexample: {0}")]
    InvalidCounterexample(String),
    #[error("exploration limit exceeded: {0}")]
    LimitExceeded(String),
}
