use thiserror::Error;

use crate::lattice::LatticeError;
use crate::predicate::ParseError;
use crate::substrate::SubstrateError;
use crate::weights::WeightError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Substrate(#[from] SubstrateError),
    #[error("predicate error at {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error("invalid configuration: {0}")]
    Config(String),
}
