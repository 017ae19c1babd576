use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid instance: {0}")]
    Validation(String),

    #[error("invalid caps: cycle cap {cycle} (needs >= 2), chain cap {chain} (needs >= 1)")]
    InvalidCaps { cycle: usize, chain: usize },

    #[error("plan enumeration exceeded the limit of {limit} plans")]
    Blowup { limit: usize },

    #[error("pair {0} is not covered by any column; the exponential-cone rows would be infeasible")]
    Coverage(String),

    #[error("price of fairness undefined: maximum utility is zero")]
    UndefinedPof,

    #[error("degenerate front: ideal and reference points coincide")]
    DegenerateFront,

    #[error("missing dual for constraint block `{0}`")]
    Wiring(String),

    #[error(
        "column generation stalled: pricing returned an existing column with zeta = {zeta:e} \
         (dual signs or solver accuracy are off)"
    )]
    Stall { zeta: f64 },

    #[error("pricing solver hit its time limit (incumbent value {incumbent}, proven: {proven})")]
    PricingTimeout { incumbent: f64, proven: bool },

    #[error("master problem infeasible: {0}")]
    MasterInfeasible(String),

    #[error("conic solver failed: {0}")]
    Solver(String),

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
