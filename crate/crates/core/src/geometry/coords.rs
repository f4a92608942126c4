use alloc::vec::Vec;

use crate::error::{Result, check_finite};

macro_rules! coords {
    ($(#[$doc:meta])* $name:ident, $what:literal) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name(Vec<f64>);

        impl $name {
            /// Wraps `values`, rejecting non-finite entries.
            pub fn new(values: Vec<f64>) -> Result<Self> {
                check_finite(&values, $what)?;
                Ok(Self(values))
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }

            pub fn into_vec(self) -> Vec<f64> {
                self.0
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }
        }

        impl AsRef<[f64]> for $name {
            fn as_ref(&self) -> &[f64] {
                &self.0
            }
        }
    };
}

coords!(
    /// Natural (e-affine) coordinates of a point.
    ThetaCoords,
    "theta coordinates"
);

coords!(
    /// Expectation (m-affine) coordinates of a point.
    EtaCoords,
    "eta coordinates"
);

/// Which affine chart a quantity is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Chart {
    Theta,
    Eta,
}
