//! Simulation and tomography of controllable polarization-decoherence channels.
//!
//! A single-photon polarization qubit is sent through a channel built from two
//! birefringent crystals and wave plates. Each crystal delays one linear
//! polarization into a later temporal mode; once the walk-off exceeds the
//! photon coherence time, tracing out the temporal modes depolarizes the
//! qubit. Two channel layouts are modelled:
//!
//! * **Scheme I** — half-wave plates before and after the first crystal,
//!   rotated in opposite directions by θ/2 (equivalent to rotating the first
//!   crystal by θ).
//! * **Scheme II** — a quarter-wave plate at angle φ between the two crystals.
//!
//! The crate covers the full chain from optics to data analysis:
//!
//! * [`qstate`] — Stokes vectors, density matrices, the canonical
//!   h/v/p/m/r/l states and state fidelity.
//! * [`optics`] — Jones matrices, the polarization ⊗ temporal-mode crystal
//!   model, and Kraus sets for both schemes at any wave-plate angle.
//! * [`process`] — χ matrix, Pauli transfer matrix, Choi matrix and Bloch
//!   ellipsoid machinery, with process fidelity and physicality checks.
//! * [`measurement`] — projector sets and seeded Poisson count simulation.
//! * [`tomography`] — linear and maximum-likelihood state reconstruction,
//!   3- and 4-input process tomography, and the Choi-state ML search that
//!   projects a linearly reconstructed process onto the physical set.

pub mod error;
pub(crate) mod linalg;
pub mod measurement;
pub mod optics;
mod optim;
pub mod process;
pub mod qstate;
pub mod rng;
pub mod tomography;

pub use error::{Error, Result};
