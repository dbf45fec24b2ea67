use std::fmt;

/// Failure classes and their process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureClass {
    Parse,
    Split,
    Adapter,
    Io,
    Usage,
}

impl FailureClass {
    pub fn exit_code(self) -> i32 {
        match self {
            FailureClass::Parse => 2,
            FailureClass::Split => 3,
            FailureClass::Adapter => 4,
            FailureClass::Io => 5,
            FailureClass::Usage => 64,
        }
    }
}

/// An error attributed to a pipeline stage.
#[derive(Debug)]
pub struct Failure {
    pub class: FailureClass,
    pub stage: &'static str,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn new(class: FailureClass, stage: &'static str, error: impl Into<anyhow::Error>) -> Self {
        Failure {
            class,
            stage,
            error: error.into(),
        }
    }

    pub fn usage(stage: &'static str, message: impl fmt::Display) -> Self {
        Failure::new(FailureClass::Usage, stage, anyhow::anyhow!("{message}"))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {:#}", self.stage, self.error)
    }
}

impl std::error::Error for Failure {}

pub type CliResult<T> = Result<T, Failure>;

pub trait Classify<T> {
    fn class(self, class: FailureClass, stage: &'static str) -> CliResult<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn class(self, class: FailureClass, stage: &'static str) -> CliResult<T> {
        self.map_err(|e| Failure::new(class, stage, e))
    }
}
