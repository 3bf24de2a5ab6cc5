pub mod cli;
pub mod fock;
pub mod formal;
pub mod hamiltonian;
pub mod mode_space;
pub mod models;
pub mod numerics;
pub mod oracle;
