use std::fmt;

#[derive(Debug, thiserror::Error)]
pub enum FilterError {
    #[error("plane dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("invalid filter parameters: {0}")]
    InvalidParams(String),
    #[error(
        "degenerate window at ({x}, {y}): zero variance with nonzero covariance and lambda = 0"
    )]
    DegenerateWindow { x: usize, y: usize },
    #[error("{0}")]
    OracleTooLarge(OracleTooLarge),
}

/// The reference implementation refuses inputs past its size guard.
#[derive(Debug)]
pub struct OracleTooLarge {
    pub width: usize,
    pub height: usize,
    pub limit: usize,
}

impl fmt::Display for OracleTooLarge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "reference filter limited to {limit}x{limit}, got {w}x{h}",
            limit = self.limit,
            w = self.width,
            h = self.height
        )
    }
}
