pub mod error;
pub mod quadrature;
pub mod qfunc;
pub mod qparam;
pub mod fock;
pub mod linalg;
pub mod ensemble;
pub mod observables;
pub mod config;
pub mod output;
pub mod cli;
