//! Production planning and shop-floor simulation under forecast error.

pub mod app;
pub mod demand;
pub mod error;
pub mod ledger;
pub mod mrp;
pub mod plant;
pub mod rng;
pub mod scenario;
pub mod sim;

pub use error::{ConfigError, PlanError, SimError};
