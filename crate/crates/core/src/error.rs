use thiserror::Error;

use crate::model::MachineId;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("an instance needs at least one machine")]
    NoMachines,
    #[error("job {job} has no feasible option")]
    EmptyJob { job: usize },
    #[error("hyperedge targets must be nonempty")]
    EmptyHyperedge,
    #[error("hyperedge lists {machines} machines but {weights} weights")]
    WeightCountMismatch { machines: usize, weights: usize },
    #[error("option needs `weight` (single machine) or `weights` (hyperedge)")]
    MissingWeights,
    #[error("job {job} has invalid weight {weight}")]
    InvalidWeight { job: usize, weight: f64 },
    #[error("job {job} references machine {machine} which does not exist")]
    MachineOutOfRange { job: usize, machine: MachineId },
    #[error("job {job} lists the same target twice")]
    DuplicateTarget { job: usize },
    #[error("job {job} has a hyperedge option in a standard-model instance")]
    HyperedgeInStandardModel { job: usize },
    #[error("{0} requires standard model")]
    RequiresStandard(&'static str),
    #[error("unassigned job {job}")]
    UnassignedJob { job: usize },
    #[error("assignment row for job {job} does not match its options")]
    ShapeMismatch { job: usize },
    #[error("job {job} has a negative or non-finite fraction")]
    InvalidFraction { job: usize },
    #[error("fractions of job {job} sum to {sum}, not 1")]
    RowSum { job: usize, sum: f64 },
    #[error("job {job} uses infeasible machine {machine}")]
    InfeasibleMachine { job: usize, machine: MachineId },
    #[error("instance too large for brute force ({assignments} assignments, cap {cap})")]
    TooLargeForBruteForce { assignments: u64, cap: u64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, PartialEq)]
pub enum WaterfillError {
    #[error("no feasible machine")]
    Empty,
    #[error("invalid potential for machine {index}: {reason}")]
    InvalidPotential { index: usize, reason: &'static str },
}

#[derive(Debug, Error, PartialEq)]
pub enum RoundingError {
    #[error("modified Poisson parameter {0} outside (0, 1]")]
    BadParameter(f64),
    #[error("group mass exceeds 1 (group {group}, mass {mass})")]
    GroupOverflow { group: usize, mass: f64 },
    #[error("rounding did not terminate within {0} rounds")]
    NoTermination(usize),
    #[error("job {job} has no positive fraction")]
    EmptyRow { job: usize },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Waterfill(#[from] WaterfillError),
    #[error(transparent)]
    Rounding(#[from] RoundingError),
    #[error("constants rejected: {0}")]
    Constants(String),
    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
