//! Region-of-attraction certificates for lossless power grids modeled as
//! second-order Kuramoto oscillators with inhomogeneous inertia and damping.
//!
//! The crate is organized bottom-up:
//!
//! * [`graph`] coupling graph, connectivity and the constant `L*`;
//! * [`model`] swing systems, the zero-sum micro reduction, parameter summaries;
//! * [`energy`] potential, energy functionals and dissipation;
//! * [`certificate`] the H1–H3 certificate and its constants;
//! * [`dynamics`] RK4 integration, trajectory monitors, sync detection;
//! * [`roa`] grid scans over initial phases for two oscillators;
//! * [`io`] system files and CSV output.

pub mod certificate;
pub mod dynamics;
pub mod energy;
pub mod error;
pub mod graph;
pub mod io;
pub mod model;
pub mod roa;

pub use certificate::{certify, CertificateReport, Certifier, EpsChoice};
pub use dynamics::{detect_sync, integrate, IntegrationConfig, SyncReport, Trajectory};
pub use error::{Error, Result};
pub use graph::{GraphConstants, WeightedGraph};
pub use model::{ParamSummary, State, SwingSystem};
pub use roa::{RandomSpec, RoaMap, ScanMode, ScanSpec};
