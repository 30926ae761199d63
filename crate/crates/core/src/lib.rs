//! Non-stationary 3D geometry-based stochastic MIMO channel simulator.
//!
//! The engine models effective scatterer clusters with resolvable rays that
//! appear and disappear along both the array axis and the time axis, moves
//! the arrays and scatterers, evolves delays and powers, and assembles the
//! time-variant impulse response between every receive/transmit antenna
//! pair. The [`stats`] module computes the usual channel statistics on the
//! generated snapshots and [`estimation`] fits model parameters to target
//! curves by exhaustive grid search.
//!
//! ```no_run
//! use gbsm::scenarios::{preset, PresetName};
//! use gbsm::channel::run_realization;
//!
//! let cfg = preset(PresetName::Hst3d);
//! let snaps = run_realization(&cfg, 0.1, 1e-3, 7).unwrap();
//! println!("{} snapshots", snaps.len());
//! ```

pub mod channel;
pub mod clusters;
pub mod error;
pub mod estimation;
pub mod experiments;
pub mod export;
pub mod geometry;
pub mod rng;
pub mod scenarios;
pub mod stats;

pub use channel::{CirSnapshot, ChannelState, PathRecord, Tap};
pub use clusters::{Cluster, ClusterId, EvolutionParams, Lifecycle, Ray, VisibilitySet};
pub use error::{GbsmError, Result};
pub use geometry::{AntennaArray, PatternKind, PolarizedField, Rotation, Vector3};
pub use num_complex::Complex64;
pub use scenarios::{PresetName, ScenarioConfig, Simplification};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
