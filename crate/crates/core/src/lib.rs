//! Information erasure against a spin angular-momentum reservoir.
//!
//! A memory qubit is erased by repeated CNOT coupling to reservoir spins, paid
//! for in spin angular momentum ("spinlabor") rather than energy. This crate
//! provides the exact spinlabor distribution, a Monte Carlo simulator of the
//! protocol, fluctuation-theorem quantities and the associated bounds.

// Negated comparisons deliberately reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod dist;
pub mod error;
pub mod fluctuation;
pub mod montecarlo;
pub mod params;
pub mod qseries;
pub mod scalar;

pub use dist::{
    closed_form_distribution, closed_form_pr, finite_step_closed_form, gaussian_distance,
    initial_distribution, lattice_gaussian_tv, limit_distribution, mean_spinlabor,
    post_equilibration_distribution, pre_equilibration_distribution, step_distribution,
    variance_spinlabor, SpinlaborDistribution, Stage,
};
pub use bounds::{
    bounds_report, delta_b, r_diagnostic, spinlabor_bound_integral, spinlabor_bound_jensen,
    spinlabor_bound_jensen_asymmetric, spinlabor_bound_universal, spintherm_bound,
    spintherm_bound_universal, spintherm_total, write_bounds_csv, BoundsReport, BOUNDS_CSV_HEADER,
};
pub use error::{Error, Result};
pub use fluctuation::{
    delta_free_spin, entropy_production, exponential_average, ift_expectation, jarzynski_a,
    jarzynski_a_prime, jarzynski_lhs, jarzynski_lhs_asymmetric, joint_distribution,
    mean_entropy_production, post_equilibration_factor, pre_equilibration_factor,
    trajectory_entropy_production, violation_curve, violation_probability, write_violation_csv,
    FreeSpinChange, JointOutcome, MeanEntropyProduction, Violation, ViolationBaseline,
};
pub use montecarlo::{
    simulate_batch, simulate_batch_sharded, simulate_shot, BatchSummary, EmpiricalDistribution,
    Step, StepKind, TrajectoryRecord,
};
pub use params::{
    alpha_from_gamma, critical_alpha, default_max_cycles, equilibrium_up_prob, gamma_from_alpha,
    reservoir_weight_ratio, ProtocolConfig, ReservoirParams, DEFAULT_TAIL_TOL,
};
pub use scalar::Real;

pub type Reservoir = ReservoirParams<f64>;
pub type Config = ProtocolConfig<f64>;
pub type Distribution = SpinlaborDistribution<f64>;
pub type Report = BoundsReport<f64>;
