//! Finite-sample lower bounds on `P(A_1 ∪ ... ∪ A_N)` for m-dependent events,
//! with exact oracles and Monte Carlo estimates to check them against.
//!
//! ```
//! use mdep_core::{BoundReport, EventFamily, WindowModel};
//!
//! // Runs of three heads in 24 + 2 fair coin flips.
//! let model = WindowModel::run(2, vec![0.5, 0.5], 2, 1, 24).unwrap();
//! let report = BoundReport::new(&model).unwrap().with_exact(&model).unwrap();
//! assert_eq!(report.s_n, 3.0);
//! assert!(report.exact_union.unwrap() >= report.thm1_bound);
//! ```

pub mod bounds;
pub mod dependence;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod oracle;
pub mod partition;
pub mod schema;
pub mod verify;

pub use bounds::{
    build_phi, corollary_window, thm1_bound, thm1_exponent, thm2_bound, thm2_sharper,
    BoundReport, CorollaryWindow, ThresholdFunction, BOUND_TOL,
};
pub use dependence::check_m_dependence;
pub use error::{Error, Result};
pub use model::{EventFamily, ExplicitEventFamily, Interval, Model, Probability, WindowModel};
pub use montecarlo::{estimate_union, wilson_interval, McEstimate};
pub use oracle::{block_event_prob, complement_intersection_prob, expand_window_model, union_prob};
pub use partition::{pair_shift_count, residue_classes, shifted_blocks};
pub use schema::ModelSpec;
pub use verify::{verify_proof_steps, CheckRecord, CheckStatus, ProofCheckConfig, VerificationReport};
