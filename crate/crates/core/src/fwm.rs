//! Four-wave-mixing readout of the ground-state coherence.
//!
//! In a thin, phase-matched medium without depletion the generated field is
//! linear in both |ρ₁₃| and the probe field:
//!
//! ```text
//! |E_FWM| = π N ω_FWM μ₁₃ μ₂₃ / (ħ c ε₀ Δ_pr) · |ρ₁₃| · |E_pr| · L
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::Trajectory;
use crate::pulses::PulseEnvelope;

pub const HBAR: f64 = 1.054_571_817e-34;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

/// Tolerance on |ρ₁₃| ≤ 1/2 for values read off an integrated trajectory.
const RHO13_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FwmMedium {
    /// Atomic number density N (cm⁻³).
    pub number_density: f64,
    /// FWM carrier angular frequency (rad/s).
    pub omega_fwm: f64,
    /// Dipole moment of |1⟩↔|3⟩ (C·m).
    pub mu_13: f64,
    /// Dipole moment of |2⟩↔|3⟩ (C·m).
    pub mu_23: f64,
    /// Probe detuning Δ_pr from |2⟩→|3⟩ (rad/s). Must be nonzero.
    pub delta_probe: f64,
    /// Cell length L (m).
    pub length: f64,
    /// Probe field per unit probe Rabi frequency (V/m per rad/ns).
    pub field_per_rabi: f64,
}

impl Default for FwmMedium {
    /// Warm Rb vapour near 795 nm. Dipole moments, probe detuning and cell
    /// length are representative placeholders; signals are only meaningful
    /// up to a global scale.
    fn default() -> Self {
        Self {
            number_density: 1e11,
            omega_fwm: 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / 794.978_851e-9,
            mu_13: 2.537e-29,
            mu_23: 2.537e-29,
            delta_probe: 2.0 * std::f64::consts::PI * 1e9,
            length: 0.075,
            field_per_rabi: 1.0,
        }
    }
}

impl FwmMedium {
    pub fn validate(&self) -> Result<()> {
        if !(self.number_density > 0.0 && self.number_density.is_finite()) {
            return Err(Error::invalid("number_density", format!("must be > 0, got {}", self.number_density)));
        }
        if !(self.delta_probe != 0.0 && self.delta_probe.is_finite()) {
            return Err(Error::invalid("delta_probe", "must be finite and nonzero"));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::invalid("length", format!("must be > 0, got {}", self.length)));
        }
        for (name, v) in [("omega_fwm", self.omega_fwm), ("mu_13", self.mu_13), ("mu_23", self.mu_23)] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        if !(self.field_per_rabi >= 0.0 && self.field_per_rabi.is_finite()) {
            return Err(Error::invalid("field_per_rabi", "must be finite and >= 0"));
        }
        Ok(())
    }

    /// Gain per unit |ρ₁₃| per unit probe field, integrated over the cell.
    pub fn gain(&self) -> f64 {
        let n_per_m3 = self.number_density * 1e6;
        (std::f64::consts::PI * n_per_m3 * self.omega_fwm * self.mu_13 * self.mu_23
            / (HBAR * SPEED_OF_LIGHT * EPSILON_0 * self.delta_probe))
            .abs()
            * self.length
    }
}

/// |E_FWM| in V/m for the given |ρ₁₃| and probe field amplitude.
pub fn fwm_field(rho13_abs: f64, e_probe: f64, medium: &FwmMedium) -> Result<f64> {
    if !(0.0..=0.5 + RHO13_SLACK).contains(&rho13_abs) {
        return Err(Error::invalid("rho13_abs", format!("must lie in [0, 0.5], got {rho13_abs}")));
    }
    if !(e_probe >= 0.0 && e_probe.is_finite()) {
        return Err(Error::invalid("e_probe", format!("must be finite and >= 0, got {e_probe}")));
    }
    Ok(medium.gain() * rho13_abs * e_probe)
}

/// Heterodyne amplitude |E_FWM| versus time.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SignalTrace {
    pub times: Vec<f64>,
    pub field_amplitude: Vec<f64>,
    /// Detector-resolved copy, once [`apply_detector_resolution`] has run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smoothed: Option<Vec<f64>>,
}

impl SignalTrace {
    pub fn new(times: Vec<f64>, field_amplitude: Vec<f64>) -> Result<Self> {
        if times.len() != field_amplitude.len() {
            return Err(Error::invalid("field_amplitude", "length differs from times"));
        }
        if field_amplitude.iter().any(|a| !(*a >= 0.0)) {
            return Err(Error::invalid("field_amplitude", "amplitudes must be >= 0"));
        }
        Ok(Self { times, field_amplitude, smoothed: None })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Smoothed amplitude if present, raw amplitude otherwise.
    pub fn detected(&self) -> &[f64] {
        self.smoothed.as_deref().unwrap_or(&self.field_amplitude)
    }

    /// Largest detected amplitude and the time it occurs (first on ties).
    pub fn peak(&self) -> Option<(f64, f64)> {
        let values = self.detected();
        let mut best: Option<(f64, f64)> = None;
        for (&t, &v) in self.times.iter().zip(values) {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((t, v));
            }
        }
        best
    }
}

/// FWM amplitude at every trajectory sample, with the probe envelope shifted
/// later by `probe_delay`.
pub fn signal_from_trajectory(
    traj: &Trajectory,
    probe: &PulseEnvelope,
    medium: &FwmMedium,
    probe_delay: f64,
) -> Result<SignalTrace> {
    if traj.is_empty() {
        return Err(Error::invalid("trajectory", "must contain at least one sample"));
    }
    let amplitude = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, rho)| {
            let e_probe = medium.field_per_rabi * probe.eval(t - probe_delay);
            fwm_field(rho.rho13().norm(), e_probe, medium)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SignalTrace { times: traj.times.clone(), field_amplitude: amplitude, smoothed: None })
}

/// Centred moving average over `window` ns. Near the ends the window shrinks
/// symmetrically so every average stays centred on its sample.
pub fn apply_detector_resolution(trace: &SignalTrace, window: f64) -> Result<SignalTrace> {
    if !(window > 0.0 && window.is_finite()) {
        return Err(Error::invalid("window", format!("must be > 0, got {window}")));
    }
    let times = &trace.times;
    let (first, last) = match (times.first(), times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::invalid("trace", "must contain at least one sample")),
    };
    if window > last - first {
        return Err(Error::invalid(
            "window",
            format!("{window} ns exceeds the trace span of {} ns", last - first),
        ));
    }
    let values = &trace.field_amplitude;
    let slack = 1e-9 * window;
    let smoothed = times
        .iter()
        .map(|&t| {
            let half = (0.5 * window).min(t - first).min(last - t) + slack;
            let lo = times.partition_point(|&s| s < t - half);
            let hi = times.partition_point(|&s| s <= t + half);
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect();
    Ok(SignalTrace { times: times.clone(), field_amplitude: values.clone(), smoothed: Some(smoothed) })
}
