pub mod config;
pub mod error;
pub mod measure;
pub mod metrics;
pub mod observables;
pub mod state;
pub mod transport;
pub mod verify;

pub use config::GlobalConfig;
pub use error::{Error, Result};
pub use measure::{GridMeasure, Interval, PointMap};
pub use observables::{Axis, ObservableModel};
pub use state::{Grid, MixedState, PhasePoint, WaveFunction};
