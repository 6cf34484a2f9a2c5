use thiserror::Error;

use crate::noc::Coord;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid network: {0}")]
    Invalid(String),
    #[error("cannot parse workload: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("core {core} over capacity: {neurons} neurons / {synapses} synapses (limit {max_neurons} / {max_synapses})")]
    CapacityExceeded {
        core: u32,
        neurons: u64,
        synapses: u64,
        max_neurons: u64,
        max_synapses: u64,
    },
    #[error("core {core} has {count} dependencies, table holds {limit}")]
    TooManyDependencies { core: u32, count: usize, limit: usize },
    #[error("{cores} logic cores do not fit a grid of {cells} cells")]
    TooManyCores { cores: usize, cells: usize },
    #[error("invalid program: {0}")]
    Invalid(String),
    #[error("cannot parse program: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NocError {
    #[error("coordinate {0} lies outside the {1}x{2} mesh")]
    OutOfGrid(Coord, u32, u32),
    #[error("packet from {src} injected at {at}")]
    WrongInjectionPoint { at: Coord, src: Coord },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Noc(#[from] NocError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("protocol deadlock at cycle {cycle}: {detail}")]
    Deadlock { cycle: u64, detail: String },
    #[error("protocol fault on core {core}: {detail}")]
    ProtocolFault { core: u32, detail: String },
    #[error("cycle limit {0} reached before completion")]
    CycleLimit(u64),
    #[error("i/o error: {0}")]
    Io(String),
}
