pub mod cli;
pub mod contact;
pub mod expr;
pub mod exterior;
pub mod field;
pub mod hamiltonian;
pub mod integrate;
pub mod lagrangian;
pub mod sampling;
pub mod symmetry;
pub mod system;
