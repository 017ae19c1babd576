//! Fair lottery policies for kidney exchange programs.
//!
//! A lottery over exchange plans is computed by column generation: a conic
//! master program picks probabilities for a growing set of plans, and a
//! pricing problem over cycles and chains finds the next plan to add.

pub mod colgen;
pub mod conic;
pub mod enumeration;
pub mod error;
pub mod instance;
pub mod metrics;
pub mod pricing;
pub mod schemes;

pub use colgen::{
    column_generation, compute_reference_point, full_master, prepare, run_colgen, run_scheme, sample_plan,
    sample_plans, solve_scheme, ColGenOutcome, ColGenParams, IterationLog, Lottery, Prepared, SchemeRun,
};
pub use conic::{AutoBackend, ClarabelBackend, Cone, ConeKind, ConicBackend, ConicProblem, ConicSolution, HighsLpBackend, SolveStatus};
pub use enumeration::{enumerate_plans, is_maximal, Chain, Cycle, ExchangePlan};
pub use error::{Error, Result};
pub use instance::{
    example_pool, generate_instance, parse_instance, parse_preflib, Caps, Instance, InstanceBuilder, VertexId,
};
pub use metrics::{fairness_value, min_support_fraction, pof, relative_distances, SchemeReport};
pub use pricing::{solve_pricing, PricingBackend, PricingSolver, PricingWeights};
pub use schemes::{FairnessConcept, MasterGoal, MasterSpec, RefPoint, SchemeKind};
