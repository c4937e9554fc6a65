//! Fixed-step RK4 integration of dρ/dt = −i[H(t), ρ] + D(ρ).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{dissipator, hamiltonian_unchecked, DensityMatrix, LambdaSystem, Operator};
use crate::pulses::PulseEnvelope;
use crate::scenarios::Scenario;

/// RK4 is stable on the imaginary axis up to |λ·dt| ≈ 2.83; the guard keeps a
/// margin below that.
const STABILITY_LIMIT: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    /// Integrator step (ns).
    pub dt: f64,
    /// Keep every n-th step in the trajectory.
    pub sample_every: usize,
}

impl TimeGrid {
    pub const DEFAULT_DT: f64 = 0.5;
    /// 200 ns output spacing at the default step.
    pub const DEFAULT_SAMPLE_EVERY: usize = 400;

    pub fn new(t_start: f64, t_end: f64, dt: f64, sample_every: usize) -> Result<Self> {
        let grid = Self { t_start, t_end, dt, sample_every };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_start.is_finite() && self.t_end.is_finite()) {
            return Err(Error::invalid("t_end", "grid bounds must be finite"));
        }
        if self.t_end <= self.t_start {
            return Err(Error::invalid(
                "t_end",
                format!("must exceed t_start ({}), got {}", self.t_start, self.t_end),
            ));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt", format!("must be > 0, got {}", self.dt)));
        }
        if self.sample_every == 0 {
            return Err(Error::invalid("sample_every", "must be at least 1"));
        }
        Ok(())
    }

    /// Number of integrator steps; the span is rounded to a whole number of steps.
    pub fn steps(&self) -> usize {
        ((self.t_end - self.t_start) / self.dt).round().max(1.0) as usize
    }

    pub fn time_at(&self, step: usize) -> f64 {
        self.t_start + step as f64 * self.dt
    }

    /// Output spacing in ns.
    pub fn sample_spacing(&self) -> f64 {
        self.dt * self.sample_every as f64
    }
}

/// Sampled ρ(t).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn populations(&self) -> Vec<[f64; 3]> {
        self.states.iter().map(DensityMatrix::populations).collect()
    }

    pub fn abs_rho13(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.rho13().norm()).collect()
    }

    pub fn last(&self) -> Option<(f64, &DensityMatrix)> {
        self.times.last().copied().zip(self.states.last())
    }

    /// Re-checks the trace, Hermiticity and positivity at every sample.
    pub fn check_invariants(&self) -> Result<()> {
        self.times
            .iter()
            .zip(&self.states)
            .try_for_each(|(&t, rho)| rho.check(t))
    }
}

fn infinity_norm(m: &Operator) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn generator(system: &LambdaSystem, h: &Operator, rho: &Operator) -> Operator {
    let minus_i = Complex64::new(0.0, -1.0);
    (h * rho - rho * h) * minus_i + dissipator(system, rho)
}

/// One RK4 step from `t` to `t + dt`, followed by re-Hermitization and exact
/// renormalisation to unit trace.
pub fn step(
    rho: &DensityMatrix,
    system: &LambdaSystem,
    pump: &PulseEnvelope,
    stokes: &PulseEnvelope,
    t: f64,
    dt: f64,
) -> Result<DensityMatrix> {
    let h_at = |t: f64| hamiltonian_unchecked(system, pump.eval(t), stokes.eval(t));
    let h0 = h_at(t);
    let h_mid = h_at(t + 0.5 * dt);
    let h1 = h_at(t + dt);

    let scale = [&h0, &h_mid, &h1].into_iter().map(infinity_norm).fold(0.0, f64::max)
        + system.total_rate();
    if dt * scale > STABILITY_LIMIT {
        return Err(Error::StepTooLarge { dt, limit: STABILITY_LIMIT / scale, t });
    }

    let r = rho.matrix();
    let half = Complex64::from(0.5 * dt);
    let full = Complex64::from(dt);
    let k1 = generator(system, &h0, r);
    let k2 = generator(system, &h_mid, &(r + k1 * half));
    let k3 = generator(system, &h_mid, &(r + k2 * half));
    let k4 = generator(system, &h1, &(r + k3 * full));
    let next = r + (k1 + (k2 + k3) * Complex64::from(2.0) + k4) * Complex64::from(dt / 6.0);

    let out = DensityMatrix::hermitized(next);
    let tr = out.trace();
    if !(tr.is_finite() && tr > 0.0) {
        return Err(Error::InvariantBreach { t: t + dt, what: format!("trace = {tr}") });
    }
    Ok(out.renormalized())
}

/// Integrates a scenario over its grid.
///
/// Every kept sample is checked for unit trace, Hermiticity and positivity;
/// the first breach aborts with the time at which it occurred.
pub fn evolve(scenario: &Scenario) -> Result<Trajectory> {
    scenario.validate()?;
    let initial = DensityMatrix::from_populations(scenario.initial_populations)?;
    integrate(&scenario.system, &scenario.pump, &scenario.stokes, &scenario.grid, initial)
}

/// [`evolve`] without a [`Scenario`] wrapper; the initial state may be any
/// density matrix. Samples every `sample_every` steps, plus the final step.
pub fn integrate(
    system: &LambdaSystem,
    pump: &PulseEnvelope,
    stokes: &PulseEnvelope,
    grid: &TimeGrid,
    initial: DensityMatrix,
) -> Result<Trajectory> {
    system.validate()?;
    grid.validate()?;
    let steps = grid.steps();
    let capacity = steps / grid.sample_every + 2;
    let mut traj = Trajectory {
        times: Vec::with_capacity(capacity),
        states: Vec::with_capacity(capacity),
    };

    initial.check(grid.t_start)?;
    traj.times.push(grid.t_start);
    traj.states.push(initial);

    let mut rho = initial;
    for n in 0..steps {
        let t = grid.time_at(n);
        rho = step(&rho, system, pump, stokes, t, grid.dt)?;
        if (n + 1) % grid.sample_every == 0 || n + 1 == steps {
            let t_next = grid.time_at(n + 1);
            rho.check(t_next)?;
            traj.times.push(t_next);
            traj.states.push(rho);
        }
    }
    Ok(traj)
}
