//! Online load balancing on unrelated machines under the sum of squared
//! loads, with dual-fitting certificates for every algorithm.
//!
//! ```
//! use l2b::{algorithms, certificate, model::Instance};
//!
//! let inst = Instance::standard(2, vec![vec![(0, 1.0), (1, 1.0)]; 2]).unwrap();
//! let (assignment, trace) = algorithms::run_greedy(&inst).unwrap();
//! assert_eq!(l2b::model::cost_quadratic(&assignment, &inst).unwrap(), 2.0);
//! let dual = certificate::fit_greedy(&inst, &trace);
//! assert!(dual.objective() <= 2.0);
//! ```

pub mod adversary;
pub mod algorithms;
pub mod certificate;
pub mod error;
pub mod model;
pub mod rng;
pub mod rounding;
pub mod stats;
pub mod waterfill;

pub use error::{Error, Result};
