use std::fmt;

use depasync::{CompileError, ModelError, SimError};

/// Process exit codes. Every failure prints exactly one line to stderr:
/// `error: kind=<kind> code=<code> msg=<text>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Usage = 2,
    Io = 3,
    Workload = 4,
    Compile = 5,
    Config = 6,
    Simulation = 7,
    Mismatch = 8,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Usage => "usage",
            Kind::Io => "io",
            Kind::Workload => "workload",
            Kind::Compile => "compile",
            Kind::Config => "config",
            Kind::Simulation => "simulation",
            Kind::Mismatch => "mismatch",
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub kind: Kind,
    pub msg: String,
}

impl Failure {
    pub fn new(kind: Kind, msg: impl Into<String>) -> Self {
        Failure { kind, msg: msg.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = self.msg.split_whitespace().collect::<Vec<_>>().join(" ");
        write!(f, "error: kind={} code={} msg={msg}", self.kind.name(), self.kind as i32)
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        let kind = if matches!(e, ModelError::Io(_)) { Kind::Io } else { Kind::Workload };
        Failure::new(kind, e.to_string())
    }
}

impl From<CompileError> for Failure {
    fn from(e: CompileError) -> Self {
        match e {
            CompileError::Model(m) => m.into(),
            CompileError::Io(_) => Failure::new(Kind::Io, e.to_string()),
            _ => Failure::new(Kind::Compile, e.to_string()),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Model(m) => m.into(),
            SimError::Compile(c) => c.into(),
            SimError::Config(_) => Failure::new(Kind::Config, e.to_string()),
            SimError::Io(_) => Failure::new(Kind::Io, e.to_string()),
            SimError::Noc(_) | SimError::Deadlock { .. } | SimError::ProtocolFault { .. } | SimError::CycleLimit(_) => {
                Failure::new(Kind::Simulation, e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(Kind::Io, e.to_string())
    }
}
