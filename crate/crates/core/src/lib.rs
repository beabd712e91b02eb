pub mod classical;
pub mod cli;
pub mod error;
pub mod floquet;
pub mod hubbard;
pub mod ode;
pub mod pseudopotential;
pub mod qme;
pub mod scales;
pub mod units;
