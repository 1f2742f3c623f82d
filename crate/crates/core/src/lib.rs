//! Electric-field noise above metal surfaces, as seen by a trapped ion.
//!
//! The crate is organised around the quantities that flow between the
//! stages of an analysis:
//!
//! * [`physics`] turns sideband thermometry into heating rates and heating
//!   rates into field spectral density `S_E(f)`.
//! * [`ensemble`] samples populations of thermally activated two-state
//!   fluctuators and evaluates their spectra and telegraph time series.
//! * [`dutta_horn`] evaluates the same model analytically (quadrature over
//!   the activation-energy density) together with the closed-form frequency
//!   exponent and crossover temperature.
//! * [`spectral`] estimates PSDs from time series and fits `f^-alpha`.
//! * [`fitting`] fits the empirical `S0 (1 + (T/T0)^beta)` and Arrhenius
//!   temperature laws.
//! * [`extrapolation`] compares the measured noise with other systems.
//!
//! All internal quantities are SI; energies are expressed in kelvin (`E/k_B`).

pub mod constants;
pub mod dataset;
pub mod dutta_horn;
pub mod ensemble;
mod error;
pub mod extrapolation;
pub mod fitting;
pub mod physics;
pub mod quad;
pub mod reference;
pub mod regression;
pub mod rng;
pub mod spectral;
pub mod synthetic;

pub use constants::PhysicalContext;
pub use dataset::{NoiseDataset, NoiseSample};
pub use error::{Error, Result};
