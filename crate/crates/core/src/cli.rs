//! Run configuration and the file-emitting runner behind the `simulate`
//! binary.
//!
//! A config is one flat JSON object. Every key is optional; omitted keys take
//! the scenario defaults, and keys that do not apply to the chosen scenario
//! are rejected.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::evolution::{evolve, TimeGrid, Trajectory};
use crate::fwm::{apply_detector_resolution, signal_from_trajectory, FwmMedium, SignalTrace};
use crate::model::LambdaSystem;
use crate::output::{read_csv, write_file, Format, Table};
use crate::pulses::PulseEnvelope;
use crate::scenarios::{
    build_fractional_stirap, delay_range, fit_exponential_decay, peak_shape, probe_delay_scan,
    run_stokes_sweep, CprParams, ExponentialFit, FractionalStirapParams, Scenario, CPR_STOKES_PEAKS,
    DEFAULT_DETECTOR_WINDOW,
};

/// Relative prominence for counting maxima in CPR coherence traces.
pub const MAXIMA_PROMINENCE: f64 = 1e-3;

/// Environment variable capping sweep parallelism.
pub const THREADS_ENV: &str = "SIMULATE_THREADS";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    #[default]
    Fstirap,
    Cpr,
    Custom,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Fstirap => "fstirap",
            ScenarioKind::Cpr => "cpr",
            ScenarioKind::Custom => "custom",
        }
    }

    fn specific_keys(self) -> &'static [&'static str] {
        match self {
            ScenarioKind::Fstirap => &[
                "peak_pump",
                "peak_stokes",
                "fwhm_pump_intensity_ns",
                "fwhm_stokes_intensity_ns",
                "pump_center_ns",
                "stokes_advance_ns",
                "cutoff_ns",
                "ramp_ns",
                "peak_probe",
                "fwhm_probe_intensity_ns",
                "tail_ns",
                "delay_start_ns",
                "delay_end_ns",
                "delay_step_ns",
                "fit_from_ns",
                "fit_to_ns",
            ],
            ScenarioKind::Cpr => &[
                "pump_level",
                "stokes_peaks",
                "stokes_center_ns",
                "stokes_fwhm_ns",
                "probe_level",
                "t_end_ns",
            ],
            ScenarioKind::Custom => &["pump", "stokes", "probe", "initial_populations", "t_end_ns", "probe_delay_ns"],
        }
    }
}

/// Output switches; always serialized, so never reported as defaulted.
const FLAG_KEYS: &[&str] = &["format", "emit_raw_rho", "emit_detector_trace", "seed", "detector_noise"];

const COMMON_KEYS: &[&str] = &[
    "scenario",
    "out_dir",
    "format",
    "emit_raw_rho",
    "emit_detector_trace",
    "seed",
    "detector_noise",
    "delta_one_photon",
    "delta_two_photon",
    "gamma_excited",
    "branch_to_1",
    "gamma_ground",
    "dt_ns",
    "sample_every",
    "t_start_ns",
    "detector_window_ns",
    "field_per_rabi",
    "number_density_cm3",
    "omega_fwm_rad_s",
    "mu_13_cm",
    "mu_23_cm",
    "probe_detuning_rad_s",
    "cell_length_m",
];

/// Parsed run configuration. `None` means "use the scenario default".
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub scenario: ScenarioKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    /// Also write every sampled density matrix.
    #[serde(default)]
    pub emit_raw_rho: bool,
    /// Add the detector-resolved signal column to signal traces.
    #[serde(default = "default_true")]
    pub emit_detector_trace: bool,
    #[serde(default)]
    pub seed: u64,
    /// Relative standard deviation of multiplicative Gaussian noise added to
    /// detected signals; 0 disables it.
    #[serde(default)]
    pub detector_noise: f64,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_one_photon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_two_photon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_excited: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch_to_1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_ground: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_every: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_start_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector_window_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_per_rabi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub number_density_cm3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_fwm_rad_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_13_cm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_23_cm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_detuning_rad_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_length_m: Option<f64>,

    // fractional STIRAP
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_pump: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_stokes: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fwhm_pump_intensity_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fwhm_stokes_intensity_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pump_center_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stokes_advance_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_probe: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fwhm_probe_intensity_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_start_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_end_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_step_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_from_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_to_ns: Option<f64>,

    // CPR
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pump_level: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stokes_peaks: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stokes_center_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stokes_fwhm_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_level: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end_ns: Option<f64>,

    // custom
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pump: Option<PulseEnvelope>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stokes: Option<PulseEnvelope>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<PulseEnvelope>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_populations: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_delay_ns: Option<f64>,
}

fn default_true() -> bool {
    true
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config deserializes")
    }
}

/// Parses and validates a config document. An empty document yields the
/// default fractional-STIRAP run.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    if text.trim().is_empty() {
        return Ok(RunConfig::default());
    }
    let config: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

pub fn serialize_config(config: &RunConfig) -> String {
    serde_json::to_string_pretty(config).expect("config serializes")
}

fn range_error(key: &str, reason: impl std::fmt::Display) -> Error {
    Error::Config(format!("out-of-range value for key \"{key}\": {reason}"))
}

fn check(key: &str, value: Option<f64>, ok: impl Fn(f64) -> bool, rule: &str) -> Result<()> {
    match value {
        Some(v) if !(v.is_finite() && ok(v)) => Err(range_error(key, format!("{v} (must be {rule})"))),
        _ => Ok(()),
    }
}

impl RunConfig {
    /// Names of the keys explicitly set in this config.
    pub fn keys_set(&self) -> BTreeSet<String> {
        match serde_json::to_value(self) {
            Ok(Value::Object(map)) => map.keys().cloned().collect(),
            _ => BTreeSet::new(),
        }
        .into_iter()
        .filter(|k| k != "scenario" && !FLAG_KEYS.contains(&k.as_str()))
        .collect()
    }

    pub fn validate(&self) -> Result<()> {
        for key in self.keys_set() {
            if !COMMON_KEYS.contains(&key.as_str()) && !self.scenario.specific_keys().contains(&key.as_str()) {
                return Err(Error::Config(format!(
                    "key \"{key}\" does not apply to scenario \"{}\"",
                    self.scenario.name()
                )));
            }
        }

        let positive = |v: f64| v > 0.0;
        let non_negative = |v: f64| v >= 0.0;
        let any = |_: f64| true;
        check("detector_noise", Some(self.detector_noise), non_negative, ">= 0")?;
        check("delta_one_photon", self.delta_one_photon, any, "finite")?;
        check("delta_two_photon", self.delta_two_photon, any, "finite")?;
        check("gamma_excited", self.gamma_excited, non_negative, ">= 0")?;
        check("branch_to_1", self.branch_to_1, |v| (0.0..=1.0).contains(&v), "in [0, 1]")?;
        check("gamma_ground", self.gamma_ground, non_negative, ">= 0")?;
        check("dt_ns", self.dt_ns, positive, "> 0")?;
        if self.sample_every == Some(0) {
            return Err(range_error("sample_every", "0 (must be >= 1)"));
        }
        check("t_start_ns", self.t_start_ns, any, "finite")?;
        check("detector_window_ns", self.detector_window_ns, positive, "> 0")?;
        check("field_per_rabi", self.field_per_rabi, non_negative, ">= 0")?;
        check("number_density_cm3", self.number_density_cm3, positive, "> 0")?;
        check("omega_fwm_rad_s", self.omega_fwm_rad_s, positive, "> 0")?;
        check("mu_13_cm", self.mu_13_cm, non_negative, ">= 0")?;
        check("mu_23_cm", self.mu_23_cm, non_negative, ">= 0")?;
        check("probe_detuning_rad_s", self.probe_detuning_rad_s, |v| v != 0.0, "nonzero")?;
        check("cell_length_m", self.cell_length_m, positive, "> 0")?;

        check("peak_pump", self.peak_pump, non_negative, ">= 0")?;
        check("peak_stokes", self.peak_stokes, non_negative, ">= 0")?;
        check("fwhm_pump_intensity_ns", self.fwhm_pump_intensity_ns, positive, "> 0")?;
        check("fwhm_stokes_intensity_ns", self.fwhm_stokes_intensity_ns, positive, "> 0")?;
        check("pump_center_ns", self.pump_center_ns, any, "finite")?;
        check("stokes_advance_ns", self.stokes_advance_ns, positive, "> 0")?;
        check("cutoff_ns", self.cutoff_ns, any, "finite")?;
        check("ramp_ns", self.ramp_ns, positive, "> 0")?;
        check("peak_probe", self.peak_probe, non_negative, ">= 0")?;
        check("fwhm_probe_intensity_ns", self.fwhm_probe_intensity_ns, positive, "> 0")?;
        check("tail_ns", self.tail_ns, positive, "> 0")?;
        check("delay_start_ns", self.delay_start_ns, any, "finite")?;
        check("delay_end_ns", self.delay_end_ns, any, "finite")?;
        check("delay_step_ns", self.delay_step_ns, positive, "> 0")?;
        check("fit_from_ns", self.fit_from_ns, any, "finite")?;
        check("fit_to_ns", self.fit_to_ns, any, "finite")?;

        check("pump_level", self.pump_level, non_negative, ">= 0")?;
        if let Some(peaks) = &self.stokes_peaks {
            if peaks.is_empty() {
                return Err(range_error("stokes_peaks", "empty list"));
            }
            if let Some(bad) = peaks.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
                return Err(range_error("stokes_peaks", format!("{bad} (peaks must be > 0)")));
            }
            if !peaks.windows(2).all(|w| w[1] > w[0]) {
                return Err(range_error("stokes_peaks", "peaks must be strictly increasing"));
            }
        }
        check("stokes_center_ns", self.stokes_center_ns, any, "finite")?;
        check("stokes_fwhm_ns", self.stokes_fwhm_ns, positive, "> 0")?;
        check("probe_level", self.probe_level, non_negative, ">= 0")?;
        check("t_end_ns", self.t_end_ns, any, "finite")?;
        check("probe_delay_ns", self.probe_delay_ns, any, "finite")?;

        for (key, env) in [("pump", &self.pump), ("stokes", &self.stokes), ("probe", &self.probe)] {
            if let Some(env) = env {
                env.validate().map_err(|e| range_error(key, e))?;
            }
        }
        if let Some(p) = self.initial_populations {
            if p.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                return Err(range_error("initial_populations", format!("{p:?} (must be >= 0 and sum to 1)")));
            }
        }
        if self.scenario == ScenarioKind::Custom {
            for (key, missing) in [
                ("pump", self.pump.is_none()),
                ("stokes", self.stokes.is_none()),
                ("t_end_ns", self.t_end_ns.is_none()),
            ] {
                if missing {
                    return Err(Error::Config(format!("scenario \"custom\" requires key \"{key}\"")));
                }
            }
        }
        Ok(())
    }

    fn system(&self) -> LambdaSystem {
        let d = LambdaSystem::default();
        LambdaSystem {
            delta_one_photon: self.delta_one_photon.unwrap_or(d.delta_one_photon),
            delta_two_photon: self.delta_two_photon.unwrap_or(d.delta_two_photon),
            gamma_excited: self.gamma_excited.unwrap_or(d.gamma_excited),
            branch_to_1: self.branch_to_1.unwrap_or(d.branch_to_1),
            gamma_ground: self.gamma_ground.unwrap_or(d.gamma_ground),
        }
    }

    fn medium(&self) -> FwmMedium {
        let d = FwmMedium::default();
        FwmMedium {
            number_density: self.number_density_cm3.unwrap_or(d.number_density),
            omega_fwm: self.omega_fwm_rad_s.unwrap_or(d.omega_fwm),
            mu_13: self.mu_13_cm.unwrap_or(d.mu_13),
            mu_23: self.mu_23_cm.unwrap_or(d.mu_23),
            delta_probe: self.probe_detuning_rad_s.unwrap_or(d.delta_probe),
            length: self.cell_length_m.unwrap_or(d.length),
            field_per_rabi: self.field_per_rabi.unwrap_or(d.field_per_rabi),
        }
    }

    pub fn fstirap_params(&self) -> FractionalStirapParams {
        let d = FractionalStirapParams::default();
        FractionalStirapParams {
            system: self.system(),
            peak_pump: self.peak_pump.unwrap_or(d.peak_pump),
            peak_stokes: self.peak_stokes.unwrap_or(d.peak_stokes),
            fwhm_pump_intensity: self.fwhm_pump_intensity_ns.unwrap_or(d.fwhm_pump_intensity),
            fwhm_stokes_intensity: self.fwhm_stokes_intensity_ns.unwrap_or(d.fwhm_stokes_intensity),
            pump_center: self.pump_center_ns.unwrap_or(d.pump_center),
            stokes_advance: self.stokes_advance_ns.unwrap_or(d.stokes_advance),
            cutoff: self.cutoff_ns.or(d.cutoff),
            ramp: self.ramp_ns.unwrap_or(d.ramp),
            peak_probe: self.peak_probe.unwrap_or(d.peak_probe),
            fwhm_probe_intensity: self.fwhm_probe_intensity_ns.unwrap_or(d.fwhm_probe_intensity),
            tail: self.tail_ns.unwrap_or(d.tail),
            t_start: self.t_start_ns.unwrap_or(d.t_start),
            dt: self.dt_ns.unwrap_or(d.dt),
            sample_every: self.sample_every.unwrap_or(d.sample_every),
            medium: self.medium(),
            detector_window: self.detector_window_ns.unwrap_or(d.detector_window),
        }
    }

    pub fn cpr_params(&self) -> CprParams {
        let d = CprParams::default();
        CprParams {
            system: self.system(),
            pump_level: self.pump_level.unwrap_or(d.pump_level),
            stokes_center: self.stokes_center_ns.unwrap_or(d.stokes_center),
            stokes_fwhm: self.stokes_fwhm_ns.unwrap_or(d.stokes_fwhm),
            probe_level: self.probe_level.unwrap_or(d.probe_level),
            t_start: self.t_start_ns.unwrap_or(d.t_start),
            t_end: self.t_end_ns.unwrap_or(d.t_end),
            dt: self.dt_ns.unwrap_or(d.dt),
            sample_every: self.sample_every.unwrap_or(d.sample_every),
            medium: self.medium(),
            detector_window: self.detector_window_ns.unwrap_or(d.detector_window),
        }
    }

    pub fn stokes_peaks(&self) -> Vec<f64> {
        self.stokes_peaks.clone().unwrap_or_else(|| CPR_STOKES_PEAKS.to_vec())
    }

    /// Probe delays and fit window (delay coordinates) for fractional STIRAP.
    pub fn delay_plan(&self, params: &FractionalStirapParams) -> (Vec<f64>, (f64, f64)) {
        let defaults = params.default_delays();
        let start = self.delay_start_ns.unwrap_or(defaults[0]);
        let end = self.delay_end_ns.unwrap_or(*defaults.last().expect("default delays are nonempty"));
        let step = self.delay_step_ns.unwrap_or(200.0);
        let (fit_from, fit_to) = params.default_fit_window();
        (
            delay_range(start, end, step),
            (self.fit_from_ns.unwrap_or(fit_from), self.fit_to_ns.unwrap_or(fit_to)),
        )
    }

    pub fn custom_scenario(&self) -> Result<Scenario> {
        let missing = |k: &str| Error::Config(format!("scenario \"custom\" requires key \"{k}\""));
        let scenario = Scenario {
            label: "custom".into(),
            system: self.system(),
            pump: self.pump.clone().ok_or_else(|| missing("pump"))?,
            stokes: self.stokes.clone().ok_or_else(|| missing("stokes"))?,
            probe: self.probe.clone().unwrap_or(PulseEnvelope::Constant { level: 0.0 }),
            grid: TimeGrid::new(
                self.t_start_ns.unwrap_or(0.0),
                self.t_end_ns.ok_or_else(|| missing("t_end_ns"))?,
                self.dt_ns.unwrap_or(TimeGrid::DEFAULT_DT),
                self.sample_every.unwrap_or(TimeGrid::DEFAULT_SAMPLE_EVERY),
            )?,
            initial_populations: self.initial_populations.unwrap_or([1.0, 0.0, 0.0]),
            medium: self.medium(),
            detector_window: self.detector_window_ns.unwrap_or(DEFAULT_DETECTOR_WINDOW),
            frozen_after: None,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    /// Keys of the chosen scenario that were left at their defaults.
    pub fn defaults_applied(&self) -> Vec<String> {
        let set = self.keys_set();
        COMMON_KEYS
            .iter()
            .chain(self.scenario.specific_keys())
            .filter(|k| !FLAG_KEYS.contains(k) && **k != "scenario" && **k != "out_dir")
            .filter(|k| !set.contains(**k))
            .map(|k| k.to_string())
            .collect()
    }
}

/// Files and headline numbers of a completed run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub files: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<ExponentialFit>,
}

/// Builds the sweep thread pool, honouring `SIMULATE_THREADS`.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::Config(format!("cannot start thread pool: {e}")))
}

/// Executes a config, writing every output under `out_dir`.
pub fn run(config: &RunConfig, out_dir: &Path) -> Result<RunReport> {
    config.validate()?;
    let started = Instant::now();
    std::fs::create_dir_all(out_dir)
        .map_err(|source| Error::Io { path: out_dir.display().to_string(), source })?;
    let pool = thread_pool()?;
    let mut noise = DetectorNoise::new(config.seed, config.detector_noise)?;

    let (mut report, resolved) = pool.install(|| match config.scenario {
        ScenarioKind::Fstirap => run_fstirap(config, out_dir, &mut noise),
        ScenarioKind::Cpr => run_cpr(config, out_dir, &mut noise),
        ScenarioKind::Custom => run_custom(config, out_dir, &mut noise),
    })?;

    let manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "scenario": config.scenario.name(),
        "config": config,
        "defaults_applied": config.defaults_applied(),
        "resolved": resolved,
        "threads": pool.current_num_threads(),
        "files": report.files,
        "wall_time_s": started.elapsed().as_secs_f64(),
    });
    write_file(
        &out_dir.join("manifest.json"),
        &serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;
    report.files.push("manifest.json".into());
    Ok(report)
}

struct DetectorNoise {
    rng: ChaCha8Rng,
    normal: Option<Normal<f64>>,
}

impl DetectorNoise {
    fn new(seed: u64, sigma: f64) -> Result<Self> {
        let normal = if sigma > 0.0 {
            Some(Normal::new(0.0, sigma).map_err(|e| range_error("detector_noise", e))?)
        } else {
            None
        };
        Ok(Self { rng: ChaCha8Rng::seed_from_u64(seed), normal })
    }

    fn apply(&mut self, values: &mut [f64]) {
        if let Some(normal) = self.normal {
            for v in values {
                *v = (*v * (1.0 + normal.sample(&mut self.rng))).max(0.0);
            }
        }
    }
}

fn trajectory_table(traj: &Trajectory) -> Table {
    let mut table = Table::new(["t_ns", "p1", "p2", "p3", "abs_rho13"]);
    for (t, rho) in traj.times.iter().zip(&traj.states) {
        let [p1, p2, p3] = rho.populations();
        table.push(vec![*t, p1, p2, p3, rho.rho13().norm()]);
    }
    table
}

fn raw_rho_table(traj: &Trajectory) -> Table {
    let mut table = Table::new([
        "t_ns", "rho11", "rho22", "rho33", "re_rho12", "im_rho12", "re_rho13", "im_rho13", "re_rho23", "im_rho23",
    ]);
    for (t, rho) in traj.times.iter().zip(&traj.states) {
        let [p1, p2, p3] = rho.populations();
        let (r12, r13, r23) = (rho.element(0, 1), rho.element(0, 2), rho.element(1, 2));
        table.push(vec![*t, p1, p2, p3, r12.re, r12.im, r13.re, r13.im, r23.re, r23.im]);
    }
    table
}

fn signal_table(traj: &Trajectory, signal: &SignalTrace, with_detected: bool) -> Table {
    let mut columns = vec!["t_ns", "p1", "p2", "p3", "abs_rho13", "signal"];
    if with_detected {
        columns.push("signal_detected");
    }
    let mut table = Table::new(columns);
    let detected = signal.detected();
    for (k, (t, rho)) in traj.times.iter().zip(&traj.states).enumerate() {
        let [p1, p2, p3] = rho.populations();
        let mut row = vec![*t, p1, p2, p3, rho.rho13().norm(), signal.field_amplitude[k]];
        if with_detected {
            row.push(detected[k]);
        }
        table.push(row);
    }
    table
}

fn write_json(dir: &Path, name: &str, value: &Value) -> Result<String> {
    write_file(&dir.join(name), &serde_json::to_string_pretty(value).expect("json serializes"))?;
    Ok(name.to_string())
}

fn fit_json(fit: &ExponentialFit, window: (f64, f64), source: &str) -> Value {
    json!({
        "source": source,
        "from_ns": window.0,
        "to_ns": window.1,
        "tau_ns": fit.time_constant,
        "amplitude": fit.amplitude,
        "rms_residual": fit.rms_residual,
        "samples": fit.samples,
    })
}

fn run_fstirap(config: &RunConfig, out: &Path, noise: &mut DetectorNoise) -> Result<(RunReport, Value)> {
    let params = config.fstirap_params();
    let scenario = build_fractional_stirap(&params)?;
    let traj = evolve(&scenario)?;
    let (delays, fit_window) = config.delay_plan(&params);
    let scan = probe_delay_scan(&scenario, &traj, &delays)?;

    let mut files = vec![trajectory_table(&traj).write(out, "trajectory", config.format)?];
    if config.emit_raw_rho {
        files.push(raw_rho_table(&traj).write(out, "rho", config.format)?);
    }

    let mut peaks = scan.summaries();
    noise.apply(&mut peaks);
    let mut scan_table = Table::new(["delay_ns", "peak_signal"]);
    for (d, p) in delays.iter().zip(&peaks) {
        scan_table.push(vec![*d, *p]);
    }
    files.push(scan_table.write(out, "delay_scan", config.format)?);

    let scan_trace = SignalTrace::new(delays.clone(), peaks)?;
    let fit = fit_exponential_decay(&scan_trace, fit_window.0, fit_window.1)?;
    let cutoff = params.cutoff();
    let coherence = SignalTrace::new(traj.times.clone(), traj.abs_rho13())?;
    let coherence_window = (cutoff + fit_window.0, cutoff + fit_window.1);
    let coherence_fit = fit_exponential_decay(&coherence, coherence_window.0, coherence_window.1)?;
    let mut fit_value = fit_json(&fit, fit_window, "delay_scan");
    fit_value["coherence"] = fit_json(&coherence_fit, coherence_window, "abs_rho13");
    files.push(write_json(out, "fit.json", &fit_value)?);

    let resolved = json!({ "params": params, "delays": delays.len(), "fit_window_ns": fit_window });
    Ok((RunReport { files, fit: Some(fit) }, resolved))
}

fn run_cpr(config: &RunConfig, out: &Path, noise: &mut DetectorNoise) -> Result<(RunReport, Value)> {
    let params = config.cpr_params();
    let peaks = config.stokes_peaks();
    let sweep = run_stokes_sweep(&peaks, &params)?;

    let mut files = Vec::new();
    let mut summary = Table::new([
        "stokes_peak",
        "max_abs_rho13",
        "t_max_ns",
        "maxima",
        "central_dip",
        "peak_signal",
    ]);
    for point in &sweep.points {
        let trace = point.trace.as_ref().expect("stokes sweep keeps traces");
        let mut signal = trace.signal.clone();
        if let Some(smoothed) = signal.smoothed.as_mut() {
            noise.apply(smoothed);
        }
        let stem = format!("trace_peak_{}", point.value);
        files.push(signal_table(&trace.trajectory, &signal, config.emit_detector_trace).write(out, &stem, config.format)?);
        if config.emit_raw_rho {
            files.push(raw_rho_table(&trace.trajectory).write(out, &format!("rho_peak_{}", point.value), config.format)?);
        }
        let coherence = trace.trajectory.abs_rho13();
        let shape = peak_shape(&trace.trajectory.times, &coherence, MAXIMA_PROMINENCE);
        let peak_signal = signal.peak().map_or(0.0, |(_, v)| v);
        summary.push(vec![
            point.value,
            shape.max_value,
            shape.t_max,
            shape.maxima as f64,
            shape.central_dip.unwrap_or(0.0),
            peak_signal,
        ]);
    }
    files.push(summary.write(out, "sweep_summary", config.format)?);
    let resolved = json!({ "params": params, "stokes_peaks": peaks });
    Ok((RunReport { files, fit: None }, resolved))
}

fn run_custom(config: &RunConfig, out: &Path, noise: &mut DetectorNoise) -> Result<(RunReport, Value)> {
    let scenario = config.custom_scenario()?;
    let traj = evolve(&scenario)?;
    let raw = signal_from_trajectory(&traj, &scenario.probe, &scenario.medium, config.probe_delay_ns.unwrap_or(0.0))?;
    let mut signal = apply_detector_resolution(&raw, scenario.detector_window)?;
    if let Some(smoothed) = signal.smoothed.as_mut() {
        noise.apply(smoothed);
    }
    let mut files = vec![signal_table(&traj, &signal, config.emit_detector_trace).write(out, "trajectory", config.format)?];
    if config.emit_raw_rho {
        files.push(raw_rho_table(&traj).write(out, "rho", config.format)?);
    }
    Ok((RunReport { files, fit: None }, json!({ "scenario": scenario })))
}

/// Fits an exponential to one column of a CSV, using the first column as
/// time. `column` defaults to the last column.
pub fn fit_csv(path: &Path, column: Option<&str>, from_ns: f64, to_ns: f64) -> Result<Value> {
    let table = read_csv(path)?;
    if table.columns.len() < 2 {
        return Err(Error::Config(format!("{}: need a time column and a value column", path.display())));
    }
    let index = match column {
        Some(name) => table
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Config(format!("{}: no column named \"{name}\"", path.display())))?,
        None => table.columns.len() - 1,
    };
    let times = table.rows.iter().map(|r| r[0]).collect();
    let values = table.rows.iter().map(|r| r[index]).collect();
    let trace = SignalTrace::new(times, values)?;
    let fit = fit_exponential_decay(&trace, from_ns, to_ns)?;
    let mut value = fit_json(&fit, (from_ns, to_ns), &table.columns[index]);
    value["input"] = json!(path.display().to_string());
    Ok(value)
}

/// Merges `key=value` pairs into a config document. Values are parsed as
/// JSON, falling back to a plain string.
pub fn apply_overrides(base: &str, pairs: &[(String, String)]) -> Result<String> {
    let mut map: Map<String, Value> = if base.trim().is_empty() {
        Map::new()
    } else {
        serde_json::from_str(base).map_err(|e| Error::Config(e.to_string()))?
    };
    for (key, raw) in pairs {
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.clone()));
        map.insert(key.clone(), value);
    }
    Ok(serde_json::to_string(&Value::Object(map)).expect("json serializes"))
}
