use thiserror::Error;

/// Pipeline stage a numerical failure is attributed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Kernel,
    Branch,
    Genus,
    Curve,
    BoundaryCondition,
    Conformal,
    Solve,
    Oracle,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Stage::Kernel => "kernel",
            Stage::Branch => "branch",
            Stage::Genus => "genus",
            Stage::Curve => "curve",
            Stage::BoundaryCondition => "boundary-condition",
            Stage::Conformal => "conformal",
            Stage::Solve => "solve",
            Stage::Oracle => "oracle",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("cannot parse model file: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported model: {0}")]
    Unsupported(String),

    #[error("unknown tolerance key `{0}`")]
    UnknownTolerance(String),

    #[error("[{stage}] {message}")]
    Numerical { stage: Stage, message: String },
}

impl Error {
    pub fn numerical(stage: Stage, message: impl Into<String>) -> Self {
        Error::Numerical {
            stage,
            message: message.into(),
        }
    }

    /// True for errors caused by the input model rather than by the numerics.
    pub fn is_model_error(&self) -> bool {
        !matches!(self, Error::Numerical { .. })
    }

    pub fn stage(&self) -> Option<Stage> {
        match self {
            Error::Numerical { stage, .. } => Some(*stage),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
