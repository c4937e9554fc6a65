//! Ready-made experiments: fractional STIRAP with a probe-delay scan, and
//! coherent population return (CPR) swept over Stokes intensities. Also the
//! log-linear decay fit and the peak analysis used to summarise them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{evolve, TimeGrid, Trajectory};
use crate::fwm::{apply_detector_resolution, signal_from_trajectory, FwmMedium, SignalTrace};
use crate::model::{adiabaticity_parameter, analytic_coherence, mixing_angle, LambdaSystem, MixingAngle};
use crate::pulses::{intensity_fwhm_to_rabi_fwhm, FractionalStirapPulses, PulseEnvelope};

/// Detector time resolution of the heterodyne chain (ns).
pub const DEFAULT_DETECTOR_WINDOW: f64 = 200.0;

/// Peak Stokes Rabi frequencies of the CPR intensity series (rad/ns).
pub const CPR_STOKES_PEAKS: [f64; 4] = [0.023, 0.033, 0.05, 0.075];

/// A full experiment: Λ system, three fields, time grid, initial state and
/// detection chain. The probe never enters the Hamiltonian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub label: String,
    pub system: LambdaSystem,
    pub pump: PulseEnvelope,
    pub stokes: PulseEnvelope,
    pub probe: PulseEnvelope,
    pub grid: TimeGrid,
    /// Diagonal initial state (p₁, p₂, p₃).
    pub initial_populations: [f64; 3],
    pub medium: FwmMedium,
    pub detector_window: f64,
    /// Set when pump and Stokes share a truncation: from this time on their
    /// ratio, and so the mixing angle, is frozen.
    pub frozen_after: Option<f64>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.grid.validate()?;
        self.medium.validate()?;
        for env in [&self.pump, &self.stokes, &self.probe] {
            env.validate()?;
        }
        let p = self.initial_populations;
        if p.iter().any(|x| !(*x >= 0.0)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(
                "initial_populations",
                format!("must be non-negative and sum to 1, got {p:?}"),
            ));
        }
        if !(self.detector_window > 0.0 && self.detector_window.is_finite()) {
            return Err(Error::invalid("detector_window", "must be > 0"));
        }
        Ok(())
    }

    /// Mixing angle at `t`, held at its cutoff value once the fields are
    /// switched off together.
    pub fn mixing_angle_at(&self, t: f64) -> Result<MixingAngle> {
        let t = match self.frozen_after {
            Some(cutoff) if t > cutoff => cutoff,
            _ => t,
        };
        mixing_angle(self.pump.eval(t), self.stokes.eval(t))
    }

    /// cos θ(t) sin θ(t) on the given times.
    pub fn adiabatic_coherence(&self, times: &[f64]) -> Result<Vec<f64>> {
        times.iter().map(|&t| self.mixing_angle_at(t).map(analytic_coherence)).collect()
    }

    /// Largest local adiabaticity parameter over the given times.
    pub fn max_adiabaticity(&self, times: &[f64]) -> Result<f64> {
        times.iter().try_fold(0.0f64, |acc, &t| {
            Ok(acc.max(adiabaticity_parameter(&self.pump, &self.stokes, t)?))
        })
    }
}

/// Fractional-STIRAP settings. Widths are intensity FWHMs as quoted for the
/// experiment; they are converted to Rabi FWHMs when the pulses are built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractionalStirapParams {
    pub system: LambdaSystem,
    pub peak_pump: f64,
    pub peak_stokes: f64,
    pub fwhm_pump_intensity: f64,
    pub fwhm_stokes_intensity: f64,
    pub pump_center: f64,
    pub stokes_advance: f64,
    /// Switch-off time; defaults to the pump centre.
    pub cutoff: Option<f64>,
    pub ramp: f64,
    pub peak_probe: f64,
    pub fwhm_probe_intensity: f64,
    /// Free-evolution time kept after the switch-off ramp.
    pub tail: f64,
    pub t_start: f64,
    pub dt: f64,
    pub sample_every: usize,
    pub medium: FwmMedium,
    pub detector_window: f64,
}

impl Default for FractionalStirapParams {
    fn default() -> Self {
        Self {
            system: LambdaSystem::default(),
            peak_pump: 0.09,
            peak_stokes: 0.12,
            fwhm_pump_intensity: 2_000.0,
            fwhm_stokes_intensity: 24_000.0,
            pump_center: 30_000.0,
            stokes_advance: 11_000.0,
            cutoff: None,
            ramp: 500.0,
            peak_probe: 0.08,
            fwhm_probe_intensity: 500.0,
            tail: 60_000.0,
            t_start: 0.0,
            dt: TimeGrid::DEFAULT_DT,
            sample_every: TimeGrid::DEFAULT_SAMPLE_EVERY,
            medium: FwmMedium::default(),
            detector_window: DEFAULT_DETECTOR_WINDOW,
        }
    }
}

impl FractionalStirapParams {
    pub fn cutoff(&self) -> f64 {
        self.cutoff.unwrap_or(self.pump_center)
    }

    /// Probe delays from 20 µs before the switch-off to 2 µs before the end of
    /// the grid, in 200 ns steps.
    pub fn default_delays(&self) -> Vec<f64> {
        delay_range(-20_000.0, self.ramp + self.tail - 2_000.0, 200.0)
    }

    /// Delay window for the tail fit: clear of the ramp, clear of the grid end.
    pub fn default_fit_window(&self) -> (f64, f64) {
        (self.ramp + 10_000.0, self.ramp + self.tail - 5_000.0)
    }
}

/// Evenly spaced delays from `start` to at most `end`.
pub fn delay_range(start: f64, end: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || end < start {
        return Vec::new();
    }
    let n = ((end - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| start + k as f64 * step).collect()
}

/// Fractional STIRAP: initial state |1⟩, Stokes ahead of the pump, both
/// switched off together at the cutoff. The probe pulse is centred on the
/// cutoff, so a probe delay is measured from the switch-off.
pub fn build_fractional_stirap(params: &FractionalStirapParams) -> Result<Scenario> {
    let cutoff = params.cutoff();
    let pulses = FractionalStirapPulses {
        peak_pump: params.peak_pump,
        peak_stokes: params.peak_stokes,
        fwhm_pump: intensity_fwhm_to_rabi_fwhm(params.fwhm_pump_intensity)?,
        fwhm_stokes: intensity_fwhm_to_rabi_fwhm(params.fwhm_stokes_intensity)?,
        pump_center: params.pump_center,
        stokes_advance: params.stokes_advance,
        cutoff,
        ramp: params.ramp,
    };
    let (pump, stokes) = pulses.build()?;
    let probe = PulseEnvelope::gaussian(
        params.peak_probe,
        cutoff,
        intensity_fwhm_to_rabi_fwhm(params.fwhm_probe_intensity)?,
    )?;
    if !(params.tail > 0.0) {
        return Err(Error::invalid("tail", format!("must be > 0, got {}", params.tail)));
    }
    let grid = TimeGrid::new(params.t_start, cutoff + params.ramp + params.tail, params.dt, params.sample_every)?;
    let scenario = Scenario {
        label: "fractional-stirap".into(),
        system: params.system,
        pump,
        stokes,
        probe,
        grid,
        initial_populations: [1.0, 0.0, 0.0],
        medium: params.medium,
        detector_window: params.detector_window,
        frozen_after: Some(cutoff),
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Coherent-population-return settings (everything except the Stokes peak).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CprParams {
    pub system: LambdaSystem,
    pub pump_level: f64,
    pub stokes_center: f64,
    /// Rabi-frequency FWHM of the Stokes pulse.
    pub stokes_fwhm: f64,
    pub probe_level: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
    pub sample_every: usize,
    pub medium: FwmMedium,
    pub detector_window: f64,
}

impl Default for CprParams {
    fn default() -> Self {
        Self {
            system: LambdaSystem::default(),
            pump_level: 0.028,
            stokes_center: 54_900.0,
            stokes_fwhm: 15_300.0,
            probe_level: 0.006,
            t_start: 0.0,
            t_end: 110_000.0,
            dt: TimeGrid::DEFAULT_DT,
            sample_every: TimeGrid::DEFAULT_SAMPLE_EVERY,
            medium: FwmMedium::default(),
            detector_window: DEFAULT_DETECTOR_WINDOW,
        }
    }
}

/// CPR: initial state |3⟩, continuous pump and probe, Gaussian Stokes pulse.
pub fn build_cpr(peak_stokes: f64, params: &CprParams) -> Result<Scenario> {
    if !(peak_stokes > 0.0 && peak_stokes.is_finite()) {
        return Err(Error::invalid("peak_stokes", format!("must be > 0, got {peak_stokes}")));
    }
    let scenario = Scenario {
        label: format!("cpr-{peak_stokes}"),
        system: params.system,
        pump: PulseEnvelope::constant(params.pump_level)?,
        stokes: PulseEnvelope::gaussian(peak_stokes, params.stokes_center, params.stokes_fwhm)?,
        probe: PulseEnvelope::constant(params.probe_level)?,
        grid: TimeGrid::new(params.t_start, params.t_end, params.dt, params.sample_every)?,
        initial_populations: [0.0, 0.0, 1.0],
        medium: params.medium,
        detector_window: params.detector_window,
        frozen_after: None,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Trajectory and detected signal of one sweep point.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepTrace {
    pub trajectory: Trajectory,
    pub signal: SignalTrace,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    /// Peak detector-resolved signal.
    pub peak_signal: f64,
    pub trace: Option<SweepTrace>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub parameter: String,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn summaries(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.peak_signal).collect()
    }

    /// The per-point summaries as a trace over the swept parameter.
    pub fn summary_trace(&self) -> Result<SignalTrace> {
        SignalTrace::new(self.values(), self.summaries())
    }
}

fn check_strictly_monotone(name: &'static str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::invalid(name, "must not be empty"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(name, "values must be finite"));
    }
    let increasing = values.windows(2).all(|w| w[1] > w[0]);
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(Error::invalid(name, "values must be strictly monotone"));
    }
    Ok(())
}

/// Evolves once and overlays the probe at every delay. The summary per delay
/// is the peak of the detector-resolved signal.
pub fn run_probe_delay_scan(scenario: &Scenario, delays: &[f64]) -> Result<SweepResult> {
    check_strictly_monotone("delays", delays)?;
    let trajectory = evolve(scenario)?;
    probe_delay_scan(scenario, &trajectory, delays)
}

/// [`run_probe_delay_scan`] over an existing trajectory of `scenario`.
pub fn probe_delay_scan(scenario: &Scenario, trajectory: &Trajectory, delays: &[f64]) -> Result<SweepResult> {
    check_strictly_monotone("delays", delays)?;
    let points = delays
        .par_iter()
        .map(|&delay| {
            let raw = signal_from_trajectory(trajectory, &scenario.probe, &scenario.medium, delay)?;
            let detected = apply_detector_resolution(&raw, scenario.detector_window)?;
            let peak_signal = detected.peak().map_or(0.0, |(_, v)| v);
            Ok(SweepPoint { value: delay, peak_signal, trace: None })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { parameter: "probe_delay_ns".into(), points })
}

/// Evolves one CPR scenario per Stokes peak, in parallel; results come back
/// in the order of `peaks`.
pub fn run_stokes_sweep(peaks: &[f64], params: &CprParams) -> Result<SweepResult> {
    check_strictly_monotone("stokes_peaks", peaks)?;
    if peaks.iter().any(|p| *p <= 0.0) {
        return Err(Error::invalid("stokes_peaks", "peaks must be > 0"));
    }
    let points = peaks
        .par_iter()
        .map(|&peak| {
            let scenario = build_cpr(peak, params)?;
            let trajectory = evolve(&scenario)?;
            let raw = signal_from_trajectory(&trajectory, &scenario.probe, &scenario.medium, 0.0)?;
            let signal = apply_detector_resolution(&raw, scenario.detector_window)?;
            let peak_signal = signal.peak().map_or(0.0, |(_, v)| v);
            Ok(SweepPoint { value: peak, peak_signal, trace: Some(SweepTrace { trajectory, signal }) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { parameter: "stokes_peak_rad_per_ns".into(), points })
}

/// Result of fitting `A·exp(−t/τ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentialFit {
    /// Amplitude extrapolated to t = 0.
    pub amplitude: f64,
    /// Decay time constant τ (ns).
    pub time_constant: f64,
    /// RMS residual of the natural-log amplitudes.
    pub rms_residual: f64,
    pub samples: usize,
}

/// Least-squares line through ln(amplitude) versus t over
/// `[window_start, window_end]` (inclusive), using the detected amplitude.
pub fn fit_exponential_decay(trace: &SignalTrace, window_start: f64, window_end: f64) -> Result<ExponentialFit> {
    let (times, values): (Vec<f64>, Vec<f64>) = trace
        .times
        .iter()
        .zip(trace.detected())
        .filter(|(t, _)| (window_start..=window_end).contains(*t))
        .map(|(t, v)| (*t, *v))
        .unzip();
    fit_log_linear(&times, &values)
}

pub(crate) fn fit_log_linear(times: &[f64], values: &[f64]) -> Result<ExponentialFit> {
    const MIN_SAMPLES: usize = 10;
    if times.len() < MIN_SAMPLES {
        return Err(Error::Fit(format!(
            "window holds {} samples, need at least {MIN_SAMPLES}",
            times.len()
        )));
    }
    if let Some((t, v)) = times.iter().zip(values).find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::Fit(format!("non-positive amplitude {v} at t = {t} ns")));
    }
    let n = times.len() as f64;
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let t_mean = times.iter().sum::<f64>() / n;
    let y_mean = logs.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (t, y) in times.iter().zip(&logs) {
        sxx += (t - t_mean).powi(2);
        sxy += (t - t_mean) * (y - y_mean);
    }
    if sxx == 0.0 {
        return Err(Error::Fit("all samples share one time".into()));
    }
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return Err(Error::Fit(format!("data do not decay (log slope {slope})")));
    }
    let intercept = y_mean - slope * t_mean;
    let rss: f64 = times
        .iter()
        .zip(&logs)
        .map(|(t, y)| (y - (intercept + slope * t)).powi(2))
        .sum();
    Ok(ExponentialFit {
        amplitude: intercept.exp(),
        time_constant: -1.0 / slope,
        rms_residual: (rss / n).sqrt(),
        samples: times.len(),
    })
}

/// Indices of interior local maxima whose topographic prominence is at least
/// `min_prominence`. Plateaus count once, at their first index.
pub fn prominent_maxima(values: &[f64], min_prominence: f64) -> Vec<usize> {
    let n = values.len();
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if values[i] > values[i - 1] {
            let mut j = i;
            while j + 1 < n && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < n && values[j + 1] < values[i] {
                peaks.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
        .into_iter()
        .filter(|&p| {
            let height = values[p];
            // ties resolve in favour of the earlier peak
            let left = values[..p].iter().rev().take_while(|&&v| v < height).fold(height, |m, &v| m.min(v));
            let right = values[p + 1..].iter().take_while(|&&v| v <= height).fold(height, |m, &v| m.min(v));
            height - left.max(right) >= min_prominence
        })
        .collect()
}

/// Peak structure of a coherence or signal trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakShape {
    pub maxima: usize,
    pub max_value: f64,
    pub t_max: f64,
    /// For two or more maxima: the lower of the outer maxima minus the lowest
    /// value between them.
    pub central_dip: Option<f64>,
}

/// Counts maxima with a prominence of at least `relative_prominence` times
/// the trace maximum.
pub fn peak_shape(times: &[f64], values: &[f64], relative_prominence: f64) -> PeakShape {
    let (mut t_max, mut max_value) = (f64::NAN, f64::NEG_INFINITY);
    for (&t, &v) in times.iter().zip(values) {
        if v > max_value {
            max_value = v;
            t_max = t;
        }
    }
    let peaks = prominent_maxima(values, relative_prominence * max_value.abs());
    let central_dip = match (peaks.first(), peaks.last()) {
        (Some(&a), Some(&b)) if b > a => {
            let floor = values[a..=b].iter().copied().fold(f64::INFINITY, f64::min);
            Some(values[a].min(values[b]) - floor)
        }
        _ => None,
    };
    PeakShape { maxima: peaks.len(), max_value, t_max, central_dip }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn synthetic(tau: f64, noise: Option<(u64, f64)>) -> SignalTrace {
        let times: Vec<f64> = (0..=300).map(|k| k as f64 * 200.0).collect();
        let mut values: Vec<f64> = times.iter().map(|t| (-t / tau).exp()).collect();
        if let Some((seed, sigma)) = noise {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let normal = Normal::new(0.0, sigma).unwrap();
            for v in &mut values {
                *v *= 1.0 + normal.sample(&mut rng);
            }
        }
        SignalTrace::new(times, values).unwrap()
    }

    #[test]
    fn fit_recovers_exact_decay() {
        let fit = fit_exponential_decay(&synthetic(20_000.0, None), 0.0, 60_000.0).unwrap();
        assert_abs_diff_eq!(fit.time_constant, 20_000.0, epsilon = 1.0);
        assert_abs_diff_eq!(fit.amplitude, 1.0, epsilon = 1e-9);
        assert!(fit.rms_residual < 1e-12);
        assert_eq!(fit.samples, 301);
    }

    #[test]
    fn fit_tolerates_one_percent_noise() {
        for seed in 0..5 {
            let fit = fit_exponential_decay(&synthetic(20_000.0, Some((seed, 0.01))), 0.0, 60_000.0).unwrap();
            assert_abs_diff_eq!(fit.time_constant, 20_000.0, epsilon = 500.0);
        }
    }

    #[test]
    fn fit_errors() {
        let short = synthetic(20_000.0, None);
        assert!(matches!(fit_exponential_decay(&short, 0.0, 1_000.0), Err(Error::Fit(_))));
        let flat = SignalTrace::new((0..20).map(|k| k as f64).collect(), vec![1.0; 20]).unwrap();
        assert!(matches!(fit_exponential_decay(&flat, 0.0, 100.0), Err(Error::Fit(_))));
        let mut with_zero = synthetic(20_000.0, None);
        with_zero.field_amplitude[5] = 0.0;
        assert!(matches!(fit_exponential_decay(&with_zero, 0.0, 60_000.0), Err(Error::Fit(_))));
    }

    #[test]
    fn default_fractional_stirap_is_valid() {
        let s = build_fractional_stirap(&FractionalStirapParams::default()).unwrap();
        assert_eq!(s.initial_populations, [1.0, 0.0, 0.0]);
        assert_eq!(s.grid.t_end, 90_500.0);
        assert_eq!(s.frozen_after, Some(30_000.0));
        assert_eq!(s.system.gamma_ground, 1.0 / 20_000.0);
        assert_eq!(s.pump.eval(30_000.0), 0.09);
    }

    #[test]
    fn mixing_angle_frozen_after_cutoff() {
        let s = build_fractional_stirap(&FractionalStirapParams::default()).unwrap();
        let at_cutoff = s.mixing_angle_at(30_000.0).unwrap();
        assert_eq!(s.mixing_angle_at(40_000.0).unwrap(), at_cutoff);
        assert_eq!(s.mixing_angle_at(30_250.0).unwrap(), at_cutoff);
        // within the ramp the envelopes themselves hold the same ratio
        let live = mixing_angle(s.pump.eval(30_250.0), s.stokes.eval(30_250.0)).unwrap();
        assert_abs_diff_eq!(live.radians(), at_cutoff.radians(), epsilon = 1e-12);
    }

    #[test]
    fn invalid_overrides_rejected() {
        let bad = FractionalStirapParams { peak_pump: -0.1, ..Default::default() };
        assert!(build_fractional_stirap(&bad).is_err());
        let bad = FractionalStirapParams { cutoff: Some(10_000.0), ..Default::default() };
        assert!(build_fractional_stirap(&bad).is_err());
        let bad = FractionalStirapParams { tail: 0.0, ..Default::default() };
        assert!(build_fractional_stirap(&bad).is_err());
        assert!(build_cpr(0.0, &CprParams::default()).is_err());
    }

    #[test]
    fn cpr_defaults() {
        let s = build_cpr(0.075, &CprParams::default()).unwrap();
        assert_eq!(s.initial_populations, [0.0, 0.0, 1.0]);
        assert_eq!(s.pump.eval(0.0), 0.028);
        assert_eq!(s.stokes.eval(54_900.0), 0.075);
        assert_eq!(s.probe.eval(123.0), 0.006);
        assert_eq!((s.grid.t_start, s.grid.t_end), (0.0, 110_000.0));
    }

    #[test]
    fn cpr_crossings() {
        let count_crossings = |peak: f64| {
            let s = build_cpr(peak, &CprParams::default()).unwrap();
            let diff: Vec<f64> = (0..=1100).map(|k| s.stokes.eval(k as f64 * 100.0) - 0.028).collect();
            diff.windows(2).filter(|w| w[0].signum() != w[1].signum()).count()
        };
        assert_eq!(count_crossings(0.023), 0);
        assert_eq!(count_crossings(0.075), 2);
    }

    #[test]
    fn delay_range_steps() {
        let d = delay_range(-1000.0, 1000.0, 200.0);
        assert_eq!(d.len(), 11);
        assert_eq!(d[0], -1000.0);
        assert_eq!(d[10], 1000.0);
        assert!(delay_range(0.0, -1.0, 1.0).is_empty());
    }

    #[test]
    fn scans_reject_bad_parameter_lists() {
        let s = build_cpr(0.05, &CprParams::default()).unwrap();
        let traj = Trajectory { times: vec![0.0], states: vec![] };
        assert!(probe_delay_scan(&s, &traj, &[]).is_err());
        assert!(probe_delay_scan(&s, &traj, &[0.0, 0.0]).is_err());
        assert!(run_stokes_sweep(&[0.05, 0.03, 0.04], &CprParams::default()).is_err());
        assert!(run_stokes_sweep(&[-0.05, 0.03], &CprParams::default()).is_err());
    }

    #[test]
    fn prominent_maxima_cases() {
        assert_eq!(prominent_maxima(&[0.0, 1.0, 0.0], 0.5), vec![1]);
        assert_eq!(prominent_maxima(&[0.0, 1.0, 0.8, 1.0, 0.0], 0.1), vec![1, 3]);
        assert_eq!(prominent_maxima(&[0.0, 1.0, 0.95, 1.0, 0.0], 0.1), vec![1]);
        assert_eq!(prominent_maxima(&[0.0, 2.0, 2.0, 0.0], 0.1), vec![1]);
        assert!(prominent_maxima(&[1.0, 0.5, 0.0], 0.1).is_empty());
        assert!(prominent_maxima(&[], 0.1).is_empty());
    }

    #[test]
    fn peak_shape_reports_dip() {
        let times: Vec<f64> = (0..7).map(f64::from).collect();
        let shape = peak_shape(&times, &[0.0, 0.4, 0.5, 0.3, 0.45, 0.2, 0.0], 0.01);
        assert_eq!(shape.maxima, 2);
        assert_eq!(shape.t_max, 2.0);
        assert_abs_diff_eq!(shape.central_dip.unwrap(), 0.15, epsilon = 1e-15);
    }
}
