//! Electroluminescence of an intersubband transition in a planar
//! microcavity under incoherent electrical injection.
//!
//! The crate solves the steady state of the coupled carrier and photon
//! populations, integrates the underlying time-domain equations as an
//! independent check, and computes transport, emission and spectral
//! observables.

// NaN-rejecting `!(a > b)` tests and index loops over coupled grids are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod config;
pub mod contacts;
pub mod device;
pub mod dynamics;
pub mod error;
pub mod fermi;
pub mod grids;
pub mod io;
pub mod model;
pub mod observables;
pub mod params;
pub mod spectra;
pub mod steady;
pub mod study;
pub mod units;

pub use contacts::{BiasPoint, Contact, ContactModel, MinibandAlignment, RateTable, ReservoirParams, Side};
pub use device::Device;
pub use error::{Error, Result};
pub use grids::{build_grids, GridSpec, Grids};
pub use model::{Cavity, Occupations, Subband};
pub use params::PhysicalParams;
pub use steady::{newton_solve, solve_at, voltage_sweep, SolverConfig, SteadyState};
pub use config::RunConfig;
pub use dynamics::{relax_to_steady, IntegratorConfig, Mode};
pub use observables::ObservableSet;
pub use spectra::{polariton_roots, spectrum_s, SpectralMode};
