use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The overlapping domain touches or leaves the background domain.
    #[error("geometry violation in slab {slab}: {reason}")]
    GeometryViolation { slab: usize, reason: String },

    #[error("singular system in slab {slab}: pivot {pivot:.3e} at column {column} (condition estimate {condition:.3e})")]
    Singular {
        slab: usize,
        column: usize,
        pivot: f64,
        condition: f64,
    },

    /// The factorization succeeded but the solution fails the residual check.
    #[error("inaccurate solve in slab {slab}: relative residual {residual:.3e}")]
    Inaccurate { slab: usize, residual: f64 },

    #[error("assembly failed in slab {slab}: {reason}")]
    Assembly { slab: usize, reason: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Re-tag a slab-local error with the slab index it occurred in.
    pub(crate) fn in_slab(self, slab: usize) -> Self {
        match self {
            Error::GeometryViolation { reason, .. } => Error::GeometryViolation { slab, reason },
            Error::Singular {
                column,
                pivot,
                condition,
                ..
            } => Error::Singular {
                slab,
                column,
                pivot,
                condition,
            },
            Error::Inaccurate { residual, .. } => Error::Inaccurate { slab, residual },
            Error::Assembly { reason, .. } => Error::Assembly { slab, reason },
            other => other,
        }
    }
}
