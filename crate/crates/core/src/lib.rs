//! Geodesic descent on dually flat spaces.
//!
//! A dually flat space carries two affine coordinate systems, the natural
//! (e-affine) coordinates `θ` and the expectation (m-affine) coordinates `η`,
//! linked by a convex potential `ψ` with `η = ∇ψ(θ)`. Straight lines in either
//! chart are geodesics of the matching connection, so a steepest-descent step
//! along an e-geodesic is
//!
//! ```text
//! θ ← θ − t · D_η f
//! ```
//!
//! and along an m-geodesic
//!
//! ```text
//! η ← η − t · D_θ f
//! ```
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the numerical
//! core: coordinate maps and potentials ([`geometry`]), concrete families
//! ([`models`]), the descent loops and classical baselines ([`optimizers`]),
//! Monte-Carlo variational inference for multinomial logistic regression
//! ([`varinf`]) and a seeded synthetic classification generator
//! ([`datagen`]). File formats, the experiment harness and the CLI live in the
//! `geodesic-bench` crate.
//!
//! ```
//! use geodesic_core::geometry::{m_geodesic_step, DuallyFlatModel, ForwardKl, Point};
//! use geodesic_core::geometry::DualGradientObjective;
//! use geodesic_core::models::CategoricalModel;
//!
//! let model = CategoricalModel::new(2).unwrap();
//! let p = Point::from_eta(model.eta(&[1.0 / 3.0, 1.0 / 3.0]).unwrap());
//! let q = Point::from_eta(model.eta(&[0.5, 0.3]).unwrap());
//! let f = ForwardKl::new(&model, &q).unwrap();
//! let grad = f.grad_theta(&model, &p).unwrap();
//! let next = m_geodesic_step(&model, p.eta(&model).unwrap(), &grad, 1.0).unwrap();
//! assert!((next.as_slice()[0] - 0.5).abs() < 1e-12);
//! assert!((next.as_slice()[1] - 0.3).abs() < 1e-12);
//! ```

#![no_std]
// `!(x > 0.0)` deliberately rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod datagen;
mod error;
pub mod geometry;
pub mod linalg;
pub mod models;
pub mod optimizers;
pub mod rng;
pub mod varinf;

pub use error::{Error, Result};
