//! Λ-system physics in the rotating frame.
//!
//! States are ordered |1⟩ (lower ground), |2⟩ (excited), |3⟩ (upper ground).
//! The pump couples |1⟩↔|2⟩ and the Stokes field couples |2⟩↔|3⟩. All
//! frequencies are angular, in rad/ns; rates are in ns⁻¹.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulses::PulseEnvelope;

pub type Operator = Matrix3<Complex64>;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Detunings and dissipation of the three-level system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaSystem {
    /// One-photon detuning Δ of the pump from |1⟩→|2⟩ (rad/ns).
    pub delta_one_photon: f64,
    /// Two-photon (Raman) detuning δ (rad/ns).
    pub delta_two_photon: f64,
    /// Total population decay rate Γ of |2⟩ (ns⁻¹).
    pub gamma_excited: f64,
    /// Fraction of Γ that lands in |1⟩; the remainder goes to |3⟩.
    pub branch_to_1: f64,
    /// Ground-state decoherence rate of ρ₁₃ (ns⁻¹).
    pub gamma_ground: f64,
}

impl LambdaSystem {
    /// Rb D1 order-of-magnitude excited decay with an even branching ratio and
    /// a 20 µs ground-state coherence time.
    pub const DEFAULT_GAMMA_EXCITED: f64 = 0.036;
    pub const DEFAULT_BRANCH_TO_1: f64 = 0.5;
    pub const DEFAULT_GAMMA_GROUND: f64 = 1.0 / 20_000.0;

    pub fn new(
        delta_one_photon: f64,
        delta_two_photon: f64,
        gamma_excited: f64,
        branch_to_1: f64,
        gamma_ground: f64,
    ) -> Result<Self> {
        let system = Self {
            delta_one_photon,
            delta_two_photon,
            gamma_excited,
            branch_to_1,
            gamma_ground,
        };
        system.validate()?;
        Ok(system)
    }

    /// Resonant, dissipation-free system.
    pub fn lossless() -> Self {
        Self {
            delta_one_photon: 0.0,
            delta_two_photon: 0.0,
            gamma_excited: 0.0,
            branch_to_1: Self::DEFAULT_BRANCH_TO_1,
            gamma_ground: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.delta_one_photon.is_finite() {
            return Err(Error::invalid("delta_one_photon", "must be finite"));
        }
        if !self.delta_two_photon.is_finite() {
            return Err(Error::invalid("delta_two_photon", "must be finite"));
        }
        if !(self.gamma_excited >= 0.0 && self.gamma_excited.is_finite()) {
            return Err(Error::invalid(
                "gamma_excited",
                format!("must be a finite rate >= 0, got {}", self.gamma_excited),
            ));
        }
        if !(0.0..=1.0).contains(&self.branch_to_1) {
            return Err(Error::invalid(
                "branch_to_1",
                format!("must lie in [0, 1], got {}", self.branch_to_1),
            ));
        }
        if !(self.gamma_ground >= 0.0 && self.gamma_ground.is_finite()) {
            return Err(Error::invalid(
                "gamma_ground",
                format!("must be a finite rate >= 0, got {}", self.gamma_ground),
            ));
        }
        Ok(())
    }

    /// Sum of all dissipative rates, used by the integrator's step guard.
    pub fn total_rate(&self) -> f64 {
        self.gamma_excited + self.gamma_ground
    }
}

impl Default for LambdaSystem {
    fn default() -> Self {
        Self {
            delta_one_photon: 0.0,
            delta_two_photon: 0.0,
            gamma_excited: Self::DEFAULT_GAMMA_EXCITED,
            branch_to_1: Self::DEFAULT_BRANCH_TO_1,
            gamma_ground: Self::DEFAULT_GAMMA_GROUND,
        }
    }
}

/// Hermitian, unit-trace 3×3 density matrix.
///
/// Hermiticity is exact: every constructor stores `(ρ + ρ†)/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix(Operator);

impl DensityMatrix {
    /// Diagonal state with the given populations of |1⟩, |2⟩, |3⟩.
    pub fn from_populations(populations: [f64; 3]) -> Result<Self> {
        if populations.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::invalid(
                "initial_populations",
                format!("populations must be finite and >= 0, got {populations:?}"),
            ));
        }
        let sum: f64 = populations.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(
                "initial_populations",
                format!("populations must sum to 1, got {sum}"),
            ));
        }
        let [p1, p2, p3] = populations;
        Ok(Self(Operator::from_diagonal(&Vector3::new(
            Complex64::from(p1),
            Complex64::from(p2),
            Complex64::from(p3),
        ))))
    }

    /// Pure state |ψ⟩⟨ψ|, with ψ normalised first.
    pub fn from_pure(psi: Vector3<Complex64>) -> Result<Self> {
        let norm = psi.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::invalid("psi", "state vector must be nonzero and finite"));
        }
        let psi = psi / Complex64::from(norm);
        Ok(Self::hermitized(psi * psi.adjoint()))
    }

    /// Hermitize and renormalise an arbitrary matrix. No positivity check.
    pub fn from_matrix(m: Operator) -> Result<Self> {
        let rho = Self::hermitized(m);
        let tr = rho.trace();
        if !(tr > 0.0 && tr.is_finite()) {
            return Err(Error::invalid("rho", format!("trace must be positive, got {tr}")));
        }
        Ok(rho.renormalized())
    }

    pub(crate) fn hermitized(m: Operator) -> Self {
        let mut out = Operator::zeros();
        for i in 0..3 {
            out[(i, i)] = Complex64::from(m[(i, i)].re);
            for j in (i + 1)..3 {
                let upper = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                out[(i, j)] = upper;
                out[(j, i)] = upper.conj();
            }
        }
        Self(out)
    }

    pub(crate) fn renormalized(self) -> Self {
        let tr = self.trace();
        Self(self.0.map(|z| z / tr))
    }

    pub fn matrix(&self) -> &Operator {
        &self.0
    }

    pub fn element(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    /// Ground-state coherence ρ₁₃.
    pub fn rho13(&self) -> Complex64 {
        self.0[(0, 2)]
    }

    pub fn populations(&self) -> [f64; 3] {
        [self.0[(0, 0)].re, self.0[(1, 1)].re, self.0[(2, 2)].re]
    }

    pub fn trace(&self) -> f64 {
        self.0[(0, 0)].re + self.0[(1, 1)].re + self.0[(2, 2)].re
    }

    pub fn is_hermitian(&self) -> bool {
        (0..3).all(|i| (0..3).all(|j| self.0[(i, j)] == self.0[(j, i)].conj()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.0.symmetric_eigenvalues().min()
    }

    /// Checks the trace, Hermiticity and positivity tolerances.
    pub fn check(&self, t: f64) -> Result<()> {
        let tr = self.trace();
        if (tr - 1.0).abs() > 1e-9 {
            return Err(Error::InvariantBreach { t, what: format!("trace = {tr}") });
        }
        if !self.is_hermitian() {
            return Err(Error::InvariantBreach { t, what: "not Hermitian".into() });
        }
        let min_eig = self.min_eigenvalue();
        if !(min_eig >= -1e-8) {
            return Err(Error::InvariantBreach {
                t,
                what: format!("minimum eigenvalue = {min_eig}"),
            });
        }
        Ok(())
    }
}

/// Mixing angle θ ∈ [0, π/2] with tan θ = Ω_P/Ω_S.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct MixingAngle(f64);

impl MixingAngle {
    pub fn new(theta: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(Error::invalid(
                "theta",
                format!("mixing angle must lie in [0, pi/2], got {theta}"),
            ));
        }
        Ok(Self(theta))
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

fn check_rabi(name: &'static str, value: f64) -> Result<()> {
    if !(value >= 0.0 && value.is_finite()) {
        return Err(Error::invalid(
            name,
            format!("Rabi magnitude must be finite and >= 0, got {value}"),
        ));
    }
    Ok(())
}

/// Rotating-frame Hamiltonian H/ħ in rad/ns.
///
/// ```text
///     ⎡   0      −Ω_P/2     0    ⎤
/// H = ⎢ −Ω_P/2    −Δ      −Ω_S/2 ⎥
///     ⎣   0      −Ω_S/2    −δ    ⎦
/// ```
pub fn build_hamiltonian(system: &LambdaSystem, omega_p: f64, omega_s: f64) -> Result<Operator> {
    check_rabi("omega_p", omega_p)?;
    check_rabi("omega_s", omega_s)?;
    Ok(hamiltonian_unchecked(system, omega_p, omega_s))
}

pub(crate) fn hamiltonian_unchecked(system: &LambdaSystem, omega_p: f64, omega_s: f64) -> Operator {
    let p = Complex64::from(-0.5 * omega_p);
    let s = Complex64::from(-0.5 * omega_s);
    Operator::new(
        ZERO,
        p,
        ZERO,
        p,
        Complex64::from(-system.delta_one_photon),
        s,
        ZERO,
        s,
        Complex64::from(-system.delta_two_photon),
    )
}

/// Lindblad dissipator D(ρ).
///
/// Channels: |2⟩→|1⟩ at `branch_to_1·Γ`, |2⟩→|3⟩ at `(1 − branch_to_1)·Γ`,
/// and dephasing through the projectors |1⟩⟨1| and |3⟩⟨3|, each at
/// `gamma_ground`. Together they damp ρ₁₃ at `gamma_ground`, ρ₁₂ and ρ₂₃ at
/// `(Γ + gamma_ground)/2`, and leave the ground populations untouched.
pub fn apply_dissipator(system: &LambdaSystem, rho: &DensityMatrix) -> Operator {
    dissipator(system, rho.matrix())
}

pub(crate) fn dissipator(system: &LambdaSystem, rho: &Operator) -> Operator {
    let gamma = system.gamma_excited;
    let to_1 = system.branch_to_1 * gamma;
    let to_3 = gamma - to_1;
    let dephase = system.gamma_ground;
    let optical = 0.5 * (gamma + dephase);

    let p2 = rho[(1, 1)];
    let mut d = Operator::zeros();
    d[(0, 0)] = p2 * to_1;
    d[(1, 1)] = -p2 * gamma;
    d[(2, 2)] = p2 * to_3;
    for (i, j) in [(0, 1), (1, 0), (1, 2), (2, 1)] {
        d[(i, j)] = -rho[(i, j)] * optical;
    }
    d[(0, 2)] = -rho[(0, 2)] * dephase;
    d[(2, 0)] = -rho[(2, 0)] * dephase;
    d
}

/// θ = atan2(Ω_P, Ω_S).
pub fn mixing_angle(omega_p: f64, omega_s: f64) -> Result<MixingAngle> {
    check_rabi("omega_p", omega_p)?;
    check_rabi("omega_s", omega_s)?;
    if omega_p == 0.0 && omega_s == 0.0 {
        return Err(Error::UndefinedAngle);
    }
    Ok(MixingAngle(omega_p.atan2(omega_s)))
}

/// Dark state cos θ|1⟩ − sin θ|3⟩.
pub fn dark_state(theta: MixingAngle) -> Vector3<Complex64> {
    let (sin, cos) = theta.0.sin_cos();
    Vector3::new(Complex64::from(cos), ZERO, Complex64::from(-sin))
}

/// Adiabatic-limit coherence |ρ₁₃| = cos θ sin θ.
pub fn analytic_coherence(theta: MixingAngle) -> f64 {
    let (sin, cos) = theta.0.sin_cos();
    cos * sin
}

/// Local adiabaticity |dθ/dt| / √(Ω_P² + Ω_S²); ≪ 1 means the dark state is
/// followed adiabatically. dθ/dt is a central difference with a 1 ns step.
pub fn adiabaticity_parameter(pump: &PulseEnvelope, stokes: &PulseEnvelope, t: f64) -> Result<f64> {
    const H: f64 = 1.0;
    let (p, s) = (pump.eval(t), stokes.eval(t));
    let rms = p.hypot(s);
    if rms == 0.0 {
        return Err(Error::UndefinedAngle);
    }
    let ahead = mixing_angle(pump.eval(t + H), stokes.eval(t + H))?;
    let behind = mixing_angle(pump.eval(t - H), stokes.eval(t - H))?;
    let rate = (ahead.0 - behind.0) / (2.0 * H);
    Ok(rate.abs() / rms)
}
