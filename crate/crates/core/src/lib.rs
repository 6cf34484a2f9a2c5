//! Cycle-level simulator of a many-core neuromorphic accelerator comparing
//! three ways of coordinating timesteps across cores: a global barrier,
//! speculative execution with rollback, and dependency-driven asynchronous
//! forwarding.

pub mod compiler;
pub mod error;
pub mod fixed;
pub mod io;
pub mod model;
pub mod noc;
pub mod engine;
pub mod experiment;
pub mod metrics;
pub mod neurocore;

pub use compiler::{compile, CompileOptions, Program};
pub use engine::{compile_and_run, run, SimConfig, SimReport};
pub use error::{CompileError, ModelError, NocError, SimError};
pub use model::{reference_run, Network, SpikeRaster};
pub use neurocore::Mode;
