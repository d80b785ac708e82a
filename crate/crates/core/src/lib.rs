pub mod asymptotics;
pub mod cli;
pub mod config;
pub mod functionals;
pub mod genfun;
pub mod jet;
pub mod mollifier;
pub mod netspec;
pub mod quadrature;
pub mod scalars;
pub mod verify;
