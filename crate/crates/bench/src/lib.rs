//! Benchmark harness for the `ordershap-core` engine: simulation models,
//! synthetic data, accuracy/convergence/timing experiments, CSV and SVG
//! output.

pub mod config;
pub mod error;
pub mod experiments;
pub mod io;
pub mod simulation;
pub mod plot;
pub mod synth;

pub use config::{load_configs, ExperimentConfig};
pub use error::{BenchError, Result};
pub use simulation::{build_simulation_model, ModelId};
pub use synth::{generate_dataset, make_baseline, BaselineKind};
