//! Emission spectra and photon statistics of N two-level emitters coupled to
//! a single cavity mode, from a thermal master equation formulated in the
//! eigenbasis of the full light-matter Hamiltonian.
//!
//! The usual entry point is [`system::DressedModel`]:
//!
//! ```
//! use dicke_core::{model::ModelParams, system::DressedModel};
//!
//! let params = ModelParams::dicke(1, 0.3, 0.1).with_n_max(30);
//! let model = DressedModel::new(&params)?;
//! let point = model.thermal(0.1)?;
//! let g2 = model.g2_zero(&point)?;
//! assert!(g2.value > 0.0);
//! # Ok::<(), dicke_core::Error>(())
//! ```

pub mod analytic;
pub mod dissipation;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod qoptical;
pub mod spectral;
pub mod system;

pub use error::{Error, Result};
pub use model::ModelParams;
pub use system::{DressedModel, DressedOptions, ThermalPoint};
