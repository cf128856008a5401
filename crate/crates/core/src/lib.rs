//! Pure-state tomography from nonadaptive Pauli basis measurements.
//!
//! The pipeline plans a fixed multiset of Pauli product-basis measurements,
//! runs them on a simulated device, bins outcomes by the computational-basis
//! prefix of each copy, and rebuilds the state bottom-up over the prefix tree
//! by gluing child estimates with coefficients chosen through a Frobenius
//! distance estimator.

pub mod frobenius;
pub mod gluing;
pub mod harness;
pub mod pauli;
pub mod rademacher;
pub mod seed;
pub mod state;
pub mod tomography;
