//! Slotboom weights, test sets, positive decompositions, the scaling
//! limiter, the mesh-ratio bound and the explicit transport update.

pub mod cfl;
pub mod limiter;
pub mod testset;
pub mod transport;
pub mod weight;

pub use cfl::{cfl_mu0, mesh_ratio, CflReport};
pub use limiter::{scaling_limiter, LimiterReport};
pub use testset::{build_test_set, LineTest, TestSet};
pub use transport::{np_residual, np_rhs, Source};
pub use weight::{weighted_projection, WeightField};
