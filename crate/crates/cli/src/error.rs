use std::fmt;

/// Pipeline stage a failure is attributed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Parse,
    Affinity,
    Solver,
    Labeling,
    Io,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Parse => "parse",
            Stage::Affinity => "affinity",
            Stage::Solver => "solver",
            Stage::Labeling => "labeling",
            Stage::Io => "io",
        })
    }
}

#[derive(Debug)]
pub struct CliError {
    pub stage: Stage,
    pub message: String,
    /// Broken internal invariant rather than bad input.
    pub internal: bool,
}

impl CliError {
    pub fn user(stage: Stage, message: impl fmt::Display) -> Self {
        Self {
            stage,
            message: message.to_string(),
            internal: false,
        }
    }

    pub fn internal(stage: Stage, message: impl fmt::Display) -> Self {
        Self {
            stage,
            message: message.to_string(),
            internal: true,
        }
    }

    pub fn exit_code(&self) -> u8 {
        if self.internal {
            2
        } else {
            1
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.internal {
            write!(
                f,
                "internal error in {} stage: {}",
                self.stage, self.message
            )
        } else {
            write!(f, "{} error: {}", self.stage, self.message)
        }
    }
}
