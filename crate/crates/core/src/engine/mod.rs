//! Master-equation integration and two-time correlators.

mod correlator;
pub mod dump;
mod evolve;
mod liouvillian;
pub mod ode;
mod sparse;

pub use correlator::{
    correlate_with_states, sample_states, two_time_correlator, AffineOp, CorrelatorRequest, Product,
    TimeDependentOperator,
};
pub use evolve::{
    evolve, evolve_model, symmetrize, trace_product, uniform_grid, DensityOperator, EvolutionSpec, Propagator,
};
pub use liouvillian::{liouvillian_apply, Liouvillian};
pub use ode::{Stats, Tolerances};
pub use sparse::{Csr, Gather};
