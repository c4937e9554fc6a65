//! Preparation and four-wave-mixing readout of ground-state coherence in a
//! three-level Λ atom.
//!
//! The crate evolves the 3×3 density matrix of a Λ system (ground states
//! |1⟩, |3⟩ coupled through the excited state |2⟩ by a pump and a Stokes
//! field) under a Lindblad master equation, tracks the ground-state
//! coherence ρ₁₃, and maps it onto the four-wave-mixing field generated by a
//! weak probe.
//!
//! Two ready-made experiments are provided in [`scenarios`]: fractional
//! STIRAP (counter-intuitive pulse pair switched off at a frozen amplitude
//! ratio) and coherent population return (continuous pump, Gaussian Stokes).

// `!(x > 0.0)` style checks are deliberate: they reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod evolution;
pub mod fwm;
pub mod model;
pub mod output;
pub mod pulses;
pub mod scenarios;

pub use error::{Error, Result};
pub use evolution::{evolve, step, TimeGrid, Trajectory};
pub use fwm::{apply_detector_resolution, fwm_field, signal_from_trajectory, FwmMedium, SignalTrace};
pub use model::{
    adiabaticity_parameter, analytic_coherence, apply_dissipator, build_hamiltonian, dark_state,
    mixing_angle, DensityMatrix, LambdaSystem, MixingAngle,
};
pub use pulses::{fractional_stirap_pair, intensity_fwhm_to_rabi_fwhm, PulseEnvelope};
pub use scenarios::{
    build_cpr, build_fractional_stirap, fit_exponential_decay, run_probe_delay_scan,
    run_stokes_sweep, ExponentialFit, Scenario, SweepResult,
};
