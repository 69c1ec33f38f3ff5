//! Gaussian patterned random matrices (circulant, symmetric circulant,
//! reverse circulant, Hankel): sampling, spectra, exact limiting variances of
//! traces of powers, and Monte Carlo checks of their fluctuations.

pub mod ensembles;
pub mod error;
pub mod cli;
pub mod limits;
pub mod montecarlo;
pub mod spectra;

pub use ensembles::{EnsembleKind, InputSequence, MatrixRealization};
pub use error::{Error, Result};
