//! Maximum-entropy model selection.
//!
//! Two closed-form maximisers (fixed mean transit time, fixed steady state)
//! and a numeric identification of a two-pool system from transfer-function
//! coefficients, where the measurement equations leave a one-parameter
//! family of admissible matrices.

mod closed_form;
mod identify;

pub use closed_form::{
    implied_input, maxent_fixed_steady_state, maxent_fixed_transit, SteadyStateConstraintProblem,
    TransitConstraintProblem,
};
pub use identify::{
    dense_scan, feasible_interval, identify, FeasibleInterval, GammaConstraints, IdentificationResult, IdentifyOptions,
    LocalMaximum, Parameters, ScanResult,
};

use std::fmt;
use std::str::FromStr;

use crate::entropy::EntropyReport;
use crate::error::{Error, Result};
use crate::system::CompartmentalSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objective {
    PathEntropy,
    #[default]
    RatePerTime,
    RatePerJump,
}

impl Objective {
    pub fn of(self, report: &EntropyReport) -> f64 {
        match self {
            Objective::PathEntropy => report.path_entropy,
            Objective::RatePerTime => report.rate_per_time,
            Objective::RatePerJump => report.rate_per_jump,
        }
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "path-entropy" | "path_entropy" | "H" => Ok(Objective::PathEntropy),
            "rate-per-time" | "rate_per_time" | "theta" => Ok(Objective::RatePerTime),
            "rate-per-jump" | "rate_per_jump" | "thetaJ" => Ok(Objective::RatePerJump),
            other => Err(Error::InvalidParameter(format!("unknown objective {other:?}"))),
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Objective::PathEntropy => "path-entropy",
            Objective::RatePerTime => "rate-per-time",
            Objective::RatePerJump => "rate-per-jump",
        })
    }
}

pub fn objective(sys: &CompartmentalSystem, which: Objective) -> Result<f64> {
    Ok(which.of(&EntropyReport::new(sys)?))
}
