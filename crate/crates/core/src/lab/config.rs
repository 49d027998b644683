use serde::Serialize;

use super::LabError;
use crate::construction::{Variant, REFERENCE_M};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    pub eps: f64,
    pub trials: usize,
    pub seed: u64,
    pub variant: Variant,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub protocol: Option<String>,
    #[serde(skip)]
    pub out: Option<std::path::PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            m: 160,
            n: 4,
            eps: 0.002,
            trials: 100,
            seed: 0,
            variant: Variant::Nu,
            protocol: None,
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), LabError> {
        if self.m == 0 || self.m % REFERENCE_M != 0 {
            return Err(LabError::Config(format!("m = {} is not a positive multiple of 16", self.m)));
        }
        if self.n == 0 {
            return Err(LabError::Config("n must be at least 1".into()));
        }
        if !(self.eps > 0.0 && self.eps < 0.25) {
            return Err(LabError::Config(format!("eps = {} is outside (0, 1/4)", self.eps)));
        }
        if self.trials == 0 {
            return Err(LabError::Config("trials must be at least 1".into()));
        }
        Ok(())
    }
}
