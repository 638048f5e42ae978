mod decompose;
pub(crate) mod fejer;
mod polytope;
mod region;
mod set;
mod trig;

pub use decompose::{rational_period_weights, remove_rational_dependencies, theoretical_density, BohrDecomposition};
pub use region::{Bound, ConvexRegion, HalfSpace, Interval, Shape};
pub use set::{empirical_density, integer_relation_lattice, BohrSet, Density, DensityMethod};
pub use trig::{trig_approximation, TrigApproximation, TrigTerm, MAX_ORDER, MAX_TERMS};
