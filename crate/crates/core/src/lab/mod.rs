//! Experiment configuration, reports, instance serialization and the verification drivers.

mod config;
mod drivers;
mod report;
mod serial;
pub mod stats;

pub use config::ExperimentConfig;
pub use drivers::{
    check_opt, compare_variants, gen_instances, run_protocol, verify_concentration, verify_info, verify_nu_equivalence,
    verify_theta_recovery, NU_STATISTICS, SIGNIFICANCE,
};
pub use report::{Check, Report, Status};
pub use serial::{instance_to_json, parse_instance, serialize_instance};

use thiserror::Error;

use crate::construction::ConstructionError;
use crate::protocol::ProtocolError;
use crate::valuation::ValuationError;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Valuation(#[from] ValuationError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("malformed instance: {0}")]
    Malformed(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
