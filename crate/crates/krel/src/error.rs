use thiserror::Error;

/// Library-wide error type. Verdicts ("inconsistent", "infeasible",
/// "budget exceeded", "undecidable-here") are *not* errors; they are
/// ordinary outcomes of the deciders. Errors are violated preconditions,
/// malformed inputs, and missing capabilities.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown monoid `{0}`")]
    UnknownMonoid(String),

    #[error("invalid monoid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid element for monoid {monoid}: {detail}")]
    InvalidElement { monoid: String, detail: String },

    #[error("monoid {monoid} lacks the `{capability}` capability")]
    CapabilityMissing { monoid: String, capability: String },

    #[error("operands belong to different monoids")]
    MonoidMismatch,

    #[error("monoid {0} is infinite; this operation needs a finite monoid")]
    InfiniteMonoid(String),

    #[error("unbalanced transportation instance")]
    Unbalanced,

    #[error("attribute mismatch: {0}")]
    AttributeMismatch(String),

    #[error("invalid relation: {0}")]
    InvalidRelation(String),

    #[error("invalid hypergraph: {0}")]
    InvalidHypergraph(String),

    #[error("invalid cover: {0}")]
    InvalidCover(String),

    #[error("component instance infeasible: {0}")]
    ComponentInfeasible(String),

    #[error("relations are not inner consistent on {0}")]
    InnerInconsistent(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
