//! Polynomial-time engines for free-fermion circuits and planar Ising models.

pub mod matchgate;
pub mod pfaffian;
pub mod planar;

pub use matchgate::{amplitude_matchgate, check_matchgate, is_matchgate};
pub use pfaffian::pfaffian;
pub use planar::{partition_planar_ising, partition_planar_ising_with, simulate_xz_circuit, PlanarOptions};
