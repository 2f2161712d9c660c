use std::fmt;

use cme_core::master_equation::MasterError;
use cme_core::moments::MomentError;
use cme_core::reaction_model::ModelError;
use cme_core::semilinear::SemilinearError;
use cme_core::sobolev_jacobi::SobolevError;
use cme_core::ssa::SsaError;

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

pub const PARSE: i32 = 1;
pub const UNSOLVABLE: i32 = 2;
pub const NUMERIC: i32 = 3;

impl Failure {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Failure::new(PARSE, message)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::parse(e.to_string())
    }
}

impl From<MasterError> for Failure {
    fn from(e: MasterError) -> Self {
        let code = match e {
            MasterError::InvalidTimes | MasterError::InvalidStep => PARSE,
            _ => NUMERIC,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<SemilinearError> for Failure {
    fn from(e: SemilinearError) -> Self {
        let code = match e {
            SemilinearError::Binary | SemilinearError::Unsupported(_) => UNSOLVABLE,
            SemilinearError::InvalidTime(_) | SemilinearError::InvalidRate => PARSE,
            SemilinearError::Series(_) => NUMERIC,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<SobolevError> for Failure {
    fn from(e: SobolevError) -> Self {
        let code = match e {
            SobolevError::NotBinaryFamily | SobolevError::NoBinaryReaction => UNSOLVABLE,
            SobolevError::InvalidTime | SobolevError::NegativeRate => PARSE,
            _ => NUMERIC,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<MomentError> for Failure {
    fn from(e: MomentError) -> Self {
        let code = match e {
            MomentError::NotNormalized(_) => NUMERIC,
            _ => UNSOLVABLE,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<SsaError> for Failure {
    fn from(e: SsaError) -> Self {
        Failure::parse(e.to_string())
    }
}
