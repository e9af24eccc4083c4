//! Maximal, fractional and singular integral operators, weight classes, BMO
//! and the Rubio de Francia iteration.

mod family;
mod integral;
mod maximal;
mod rubio;
mod weights;

pub use family::{minimal_radius, BallFamily, FamilyKind, FamilySummary};
pub use integral::{
    commutator_apply, cz_apply, fractional_integral, KernelForm, KernelValidation, Operator,
    StandardKernel,
};
pub use maximal::{fractional_maximal, hl_maximal};
pub use rubio::{
    estimate_maximal_bound, maximal_iterates, rubio_de_francia, rubio_from_iterates, B_HEADROOM,
};
pub use weights::{ap_constant, apq_constant, bmo_norm, WeightReport};

use serde::{Deserialize, Serialize};

/// Norm ratio of one operator application.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorReport {
    pub operator: String,
    pub params: serde_json::Value,
    pub input_norm: f64,
    pub output_norm: f64,
    pub ratio: f64,
    pub family: Option<FamilySummary>,
}

impl OperatorReport {
    pub fn new(
        operator: impl Into<String>,
        params: serde_json::Value,
        input_norm: f64,
        output_norm: f64,
        family: Option<FamilySummary>,
    ) -> Self {
        let ratio = if input_norm > 0.0 { output_norm / input_norm } else { 0.0 };
        Self {
            operator: operator.into(),
            params,
            input_norm,
            output_norm,
            ratio,
            family,
        }
    }
}
