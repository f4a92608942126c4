//! Concrete dually flat families.

pub mod bradley_terry;
mod categorical;
mod gaussian;
pub mod mixture;

pub use bradley_terry::{BradleyTerryModel, BtNll, BtObservation, three_player_example};
pub use categorical::CategoricalModel;
pub use gaussian::{DiagGaussianModel, MuSigma};
pub use mixture::{MixtureModel, MixtureNll, NewtonConfig};
