/// Errors returned by bound construction and the mechanisms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    /// A tuning parameter (scale, epsilon, beta, cap, ...) is out of range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Dataset contents violate a precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Output bound sequences violate their ordering invariants.
    #[error("invalid output bounds: {0}")]
    InvalidBounds(String),

    /// The inverse sensitivity mechanism needs finite outermost bounds.
    #[error("unbounded output domain: {0}; restrict the data range or use the asymmetric sensitivity mechanism")]
    UnboundedDomain(String),

    /// The bounds carry no probability mass on either side of the center.
    #[error("degenerate bounds: {0}")]
    DegenerateBounds(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
