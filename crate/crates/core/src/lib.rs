//! Agent-based simulation of doctor and patient populations under a
//! classical (perfect-information) model and a cognitive social system
//! model, with traits co-evolved by a microbial genetic algorithm.
//!
//! ```
//! use caresim::{run_simulation, ModelVariant, Preset, SimulationConfig};
//!
//! let config = SimulationConfig::preset(Preset::PaperSingle, ModelVariant::Css);
//! let run = run_simulation(&config, 42, 0).unwrap();
//! assert_eq!(run.metrics.len(), 20);
//! ```

use std::path::PathBuf;

pub mod agents;
pub mod classical;
pub mod cognitive;
pub mod config;
pub mod engine;
pub mod evolution;
pub mod export;
pub mod infection;
pub mod ledger;
pub mod rng;

pub use agents::{Credential, DoctorId, DoctorState, JudgmentWeights, PatientId, PatientState};
pub use config::{CareRules, ConfigError, ModelVariant, Preset, SimulationConfig};
pub use engine::{
    run_batch, run_simulation, BatchOutput, NetworkSnapshot, RoundMetrics, RunOutput, Simulation,
};
pub use ledger::RatingLedger;
pub use rng::{derive_run_seed, RngStream};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Init(#[from] agents::InitError),
    #[error("network snapshots require the css model")]
    SnapshotNeedsCss,
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}
