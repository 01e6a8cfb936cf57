//! Power allocation between the source and the relays.

mod alloc;
mod cubic;

pub use alloc::{
    adaptive_split, approx_outage_rayleigh, equal_split, exact_outage, log_outage, numeric_split,
    rayleigh_cubic_solution, rayleigh_optimal_split, surrogate_constants, surrogate_log_objective,
    AllocationMethod, ApproxOutage, PowerSplit, SurrogateConstants, BOUNDARY_MARGIN,
};
pub use cubic::{cubic_coefficients, solve_cubic, CubicCoefficients, CubicSolution};
