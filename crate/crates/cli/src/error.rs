use std::path::PathBuf;

use thiserror::Error;

/// Pipeline stage at which a library error surfaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Eigenframe,
    Generators,
    Corrections,
    Oracle,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Eigenframe => "eigenframe",
            Stage::Generators => "generators",
            Stage::Corrections => "corrections",
            Stage::Oracle => "oracle",
        }
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("invalid JSON: {0}")]
    Json(String),

    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("matrix at {path} is {rows}x{cols}, expected square {dim}x{dim}")]
    NonSquare {
        path: String,
        rows: usize,
        cols: usize,
        dim: usize,
    },

    #[error("non-finite entry at {path}")]
    NonFiniteEntry { path: String },

    #[error("invalid GEOMPERT_GAP_TOL {value:?}: expected a positive decimal number")]
    GapTolerance { value: String },

    #[error("stage {stage}: {source}")]
    Stage {
        stage: Stage,
        source: geompert::Error,
    },
}

impl CliError {
    pub fn at(stage: Stage) -> impl FnOnce(geompert::Error) -> CliError {
        move |source| CliError::Stage { stage, source }
    }

    /// Process exit code for this error class.
    ///
    /// | code | meaning |
    /// |------|---------|
    /// | 0 | verdict pass |
    /// | 1 | verdict fail |
    /// | 2 | usage error |
    /// | 3 | unreadable, malformed, or invalid input |
    /// | 4 | degenerate spectrum |
    /// | 5 | other numerical failure or output error |
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Read { .. }
            | CliError::Json(_)
            | CliError::Schema { .. }
            | CliError::NonSquare { .. }
            | CliError::NonFiniteEntry { .. }
            | CliError::GapTolerance { .. } => 3,
            CliError::Stage {
                source: geompert::Error::DegenerateSpectrum { .. },
                ..
            } => 4,
            CliError::Stage { .. } | CliError::Write { .. } => 5,
        }
    }
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
