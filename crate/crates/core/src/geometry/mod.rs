//! Dual affine coordinates, potentials, divergences and dual-geodesic steps.

mod coords;
mod model;
mod objective;
pub mod oracle;
mod point;
mod steps;

pub use coords::{Chart, EtaCoords, ThetaCoords};
pub use model::{DOMAIN_MARGIN, DuallyFlatModel};
pub use objective::{BackwardKl, DualGradientObjective, ExpFamilyNll, ForwardKl, Gradient};
pub use point::Point;
pub use steps::{bregman_divergence, dual_potential, e_geodesic_step, m_geodesic_step, mirror_descent_step_numeric};
