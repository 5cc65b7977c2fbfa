//! Optimization on the bounded-rank matrix variety `R^{m×n}_{≤r}`.
//!
//! The crate covers the tangent-cone geometry of the variety, the P²GD
//! solver, smooth lifts with rebalancing maps, a hooked Riemannian
//! trust-region method on those lifts, Tucker and tensor-train
//! parameterizations, and an experiment harness producing JSONL traces.

// Validation writes `!(x >= 0.0)` on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conecalc;
pub mod costs;
pub mod error;
pub mod harness;
pub mod hrtr;
pub mod lifts;
pub mod linalg;
pub mod lowrank;
pub mod p2gd;
pub mod tensorlifts;

pub use conecalc::{ConeProjection, RayCone};
pub use costs::{ApocalypseCost, CostModel, LinearCost, QuadraticDistanceCost};
pub use error::{Error, Result};
pub use harness::{ExperimentConfig, ExperimentSummary, ProblemKind, SolverKind, TraceRecord};
pub use hrtr::{StepType, TrConfig, TrRun, TrStatus};
pub use lifts::{Certificate, LiftKind, LiftPoint, PullbackModel, Tangent};
pub use linalg::{Mat, SvdFactors, Vector};
pub use lowrank::{LimitBehavior, StationarityReport, TangentConeData};
pub use p2gd::{P2gdConfig, P2gdStatus, P2gdTrace};
pub use tensorlifts::{DenseTensor, TTParams, TuckerParams};
