//! Lattice models whose scaling limits are described by multiple SLEs:
//! critical site percolation on the triangular lattice (κ = 6) and uniform
//! spanning trees on the square lattice (κ = 2, 8).

pub mod conformal;
pub mod domain;
pub mod error;
pub mod fomin_mc;
pub mod harmonic;
pub mod percolation;
pub mod rng;
pub mod wilson;

pub use domain::{build_polygon_domain, build_square_domain, DomainSpec, LatticeDomain, LatticeKind};
pub use error::{LatticeError, Result};
pub use fomin_mc::{fomin_discrete, fomin_event_estimate, fomin_sites, DiscreteFomin, FominEstimate};
pub use harmonic::{discrete_harmonic_measure, harmonic_matrix, harmonic_measure_from};
pub use percolation::{estimate_event_probabilities, percolation_event_sample, EventEstimates, EventOutcome};
pub use wilson::{wilson_tree, wilson_ust, SpanningTree};
