//! C ABI for `lambda-coherence`.
//!
//! Every fallible function returns an [`LcStatus`]; on failure the message is
//! available from [`lc_last_error`] on the same thread. Objects cross the
//! boundary as opaque pointers and must be released with the matching
//! `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use lambda_coherence::cli::{self, parse_config, ScenarioKind};
use lambda_coherence::scenarios::{self, CprParams, FractionalStirapParams};
use lambda_coherence::{Error, MixingAngle, Scenario, SignalTrace, Trajectory};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    UndefinedAngle = 3,
    StepTooLarge = 4,
    InvariantBreach = 5,
    Fit = 6,
    Config = 7,
    Io = 8,
    IndexOutOfRange = 9,
    InvalidUtf8 = 10,
    Panic = 11,
}

/// A fully specified experiment: system, pulses, grid, initial state, medium.
pub struct LcScenario(Scenario);

/// Sampled density-matrix trajectory produced by [`lc_evolve`].
pub struct LcTrajectory(Trajectory);

/// One trajectory sample.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LcSample {
    pub t_ns: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub rho13_re: f64,
    pub rho13_im: f64,
}

/// Result of an exponential tail fit.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LcFit {
    pub amplitude: f64,
    pub time_constant_ns: f64,
    pub rms_residual: f64,
    pub samples: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs replaced");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

struct Failure(LcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidParameter { .. } => LcStatus::InvalidParameter,
            Error::UndefinedAngle => LcStatus::UndefinedAngle,
            Error::StepTooLarge { .. } => LcStatus::StepTooLarge,
            Error::InvariantBreach { .. } => LcStatus::InvariantBreach,
            Error::Fit(_) => LcStatus::Fit,
            Error::Config(_) => LcStatus::Config,
            Error::Io { .. } | Error::Csv { .. } => LcStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(LcStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> LcStatus {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => LcStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {message}"));
            LcStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(LcStatus::InvalidUtf8, format!("`{what}`: {e}")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn publish<T>(value: T, out: &mut *mut T) {
    *out = Box::into_raw(Box::new(value));
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next `lc_*` call on the same thread.
#[no_mangle]
pub extern "C" fn lc_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Fractional-STIRAP scenario with default parameters.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn lc_scenario_fstirap_default(out: *mut *mut LcScenario) -> LcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let scenario = scenarios::build_fractional_stirap(&FractionalStirapParams::default())?;
        publish(LcScenario(scenario), out);
        Ok(())
    })
}

/// Coherent-population-return scenario for one Stokes peak (rad/ns), other
/// parameters at their defaults.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn lc_scenario_cpr(peak_stokes: f64, out: *mut *mut LcScenario) -> LcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let scenario = scenarios::build_cpr(peak_stokes, &CprParams::default())?;
        publish(LcScenario(scenario), out);
        Ok(())
    })
}

/// Scenario from a run configuration (the `simulate` config format). A `cpr`
/// config must name exactly one Stokes peak.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_scenario_from_config(config_json: *const c_char, out: *mut *mut LcScenario) -> LcStatus {
    guard(|| {
        let text = str_arg(config_json, "config_json")?;
        let out = out_arg(out, "out")?;
        let config = parse_config(text)?;
        let scenario = match config.scenario {
            ScenarioKind::Fstirap => scenarios::build_fractional_stirap(&config.fstirap_params())?,
            ScenarioKind::Custom => config.custom_scenario()?,
            ScenarioKind::Cpr => match config.stokes_peaks().as_slice() {
                [peak] => scenarios::build_cpr(*peak, &config.cpr_params())?,
                peaks => {
                    return Err(Failure(
                        LcStatus::Config,
                        format!("`stokes_peaks` must hold exactly one value here, got {}", peaks.len()),
                    ))
                }
            },
        };
        publish(LcScenario(scenario), out);
        Ok(())
    })
}

/// Scenario from its JSON serialization (see [`lc_scenario_to_json`]).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_scenario_from_json(json: *const c_char, out: *mut *mut LcScenario) -> LcStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let out = out_arg(out, "out")?;
        let scenario: Scenario =
            serde_json::from_str(text).map_err(|e| Failure(LcStatus::Config, e.to_string()))?;
        scenario.validate()?;
        publish(LcScenario(scenario), out);
        Ok(())
    })
}

/// JSON serialization of a scenario. Release the string with [`lc_string_free`].
///
/// # Safety
/// `scenario` must come from an `lc_scenario_*` constructor; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_scenario_to_json(scenario: *const LcScenario, out: *mut *mut c_char) -> LcStatus {
    guard(|| {
        let scenario = ref_arg(scenario, "scenario")?;
        let out = out_arg(out, "out")?;
        let text = serde_json::to_string(&scenario.0).expect("scenarios serialize");
        *out = CString::new(text).expect("JSON has no NULs").into_raw();
        Ok(())
    })
}

/// Mixing angle θ (rad) of the scenario at time `t_ns`; frozen after switch-off.
///
/// # Safety
/// `scenario` must be live; `theta` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_scenario_mixing_angle(scenario: *const LcScenario, t_ns: f64, theta: *mut f64) -> LcStatus {
    guard(|| {
        let scenario = ref_arg(scenario, "scenario")?;
        *out_arg(theta, "theta")? = scenario.0.mixing_angle_at(t_ns)?.radians();
        Ok(())
    })
}

/// # Safety
/// `scenario` must be NULL or come from an `lc_scenario_*` constructor and
/// not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn lc_scenario_free(scenario: *mut LcScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// # Safety
/// `s` must be NULL or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn lc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Integrates the scenario over its grid.
///
/// # Safety
/// `scenario` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_evolve(scenario: *const LcScenario, out: *mut *mut LcTrajectory) -> LcStatus {
    guard(|| {
        let scenario = ref_arg(scenario, "scenario")?;
        let out = out_arg(out, "out")?;
        let traj = lambda_coherence::evolve(&scenario.0)?;
        publish(LcTrajectory(traj), out);
        Ok(())
    })
}

/// Number of samples; 0 for NULL.
///
/// # Safety
/// `traj` must be NULL or live.
#[no_mangle]
pub unsafe extern "C" fn lc_trajectory_len(traj: *const LcTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.len())
}

/// # Safety
/// `traj` must be live; `sample` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_trajectory_sample(traj: *const LcTrajectory, index: usize, sample: *mut LcSample) -> LcStatus {
    guard(|| {
        let traj = &ref_arg(traj, "traj")?.0;
        let sample = out_arg(sample, "sample")?;
        let rho = traj.states.get(index).ok_or_else(|| {
            Failure(LcStatus::IndexOutOfRange, format!("index {index} out of range for {} samples", traj.len()))
        })?;
        let [p1, p2, p3] = rho.populations();
        let c = rho.rho13();
        *sample = LcSample { t_ns: traj.times[index], p1, p2, p3, rho13_re: c.re, rho13_im: c.im };
        Ok(())
    })
}

/// Copies the full density matrix of one sample, row-major, into `re[9]` and `im[9]`.
///
/// # Safety
/// `traj` must be live; `re` and `im` must each point to 9 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn lc_trajectory_density_matrix(
    traj: *const LcTrajectory,
    index: usize,
    re: *mut f64,
    im: *mut f64,
) -> LcStatus {
    guard(|| {
        let traj = &ref_arg(traj, "traj")?.0;
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        let rho = traj.states.get(index).ok_or_else(|| {
            Failure(LcStatus::IndexOutOfRange, format!("index {index} out of range for {} samples", traj.len()))
        })?;
        let (re, im) = (std::slice::from_raw_parts_mut(re, 9), std::slice::from_raw_parts_mut(im, 9));
        for r in 0..3 {
            for c in 0..3 {
                let z = rho.element(r, c);
                re[3 * r + c] = z.re;
                im[3 * r + c] = z.im;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `traj` must be NULL or come from [`lc_evolve`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn lc_trajectory_free(traj: *mut LcTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Peak detector-resolved four-wave-mixing signal for each probe delay.
/// `peaks` receives `n_delays` values.
///
/// # Safety
/// `scenario` and `traj` must be live, `traj` produced from `scenario`;
/// `delays` and `peaks` must each hold `n_delays` doubles.
#[no_mangle]
pub unsafe extern "C" fn lc_probe_delay_scan(
    scenario: *const LcScenario,
    traj: *const LcTrajectory,
    delays: *const f64,
    n_delays: usize,
    peaks: *mut f64,
) -> LcStatus {
    guard(|| {
        let scenario = ref_arg(scenario, "scenario")?;
        let traj = ref_arg(traj, "traj")?;
        let delays = slice_arg(delays, n_delays, "delays")?;
        if peaks.is_null() && n_delays > 0 {
            return Err(null("peaks"));
        }
        let scan = scenarios::probe_delay_scan(&scenario.0, &traj.0, delays)?;
        if n_delays > 0 {
            std::slice::from_raw_parts_mut(peaks, n_delays).copy_from_slice(&scan.summaries());
        }
        Ok(())
    })
}

/// Log-linear fit of `A·exp(−t/τ)` to the samples with `from_ns ≤ t ≤ to_ns`.
///
/// # Safety
/// `times` and `values` must each hold `n` doubles; `fit` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_fit_exponential_decay(
    times: *const f64,
    values: *const f64,
    n: usize,
    from_ns: f64,
    to_ns: f64,
    fit: *mut LcFit,
) -> LcStatus {
    guard(|| {
        let times = slice_arg(times, n, "times")?.to_vec();
        let values = slice_arg(values, n, "values")?.to_vec();
        let fit = out_arg(fit, "fit")?;
        let trace = SignalTrace::new(times, values)?;
        let result = scenarios::fit_exponential_decay(&trace, from_ns, to_ns)?;
        *fit = LcFit {
            amplitude: result.amplitude,
            time_constant_ns: result.time_constant,
            rms_residual: result.rms_residual,
            samples: result.samples,
        };
        Ok(())
    })
}

/// θ = atan2(Ω_P, Ω_S) in radians.
///
/// # Safety
/// `theta` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_mixing_angle(omega_p: f64, omega_s: f64, theta: *mut f64) -> LcStatus {
    guard(|| {
        *out_arg(theta, "theta")? = lambda_coherence::mixing_angle(omega_p, omega_s)?.radians();
        Ok(())
    })
}

/// Dark-state coherence |ρ₁₃| = cos θ sin θ for θ in [0, π/2].
///
/// # Safety
/// `coherence` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_analytic_coherence(theta: f64, coherence: *mut f64) -> LcStatus {
    guard(|| {
        let angle = MixingAngle::new(theta)?;
        *out_arg(coherence, "coherence")? = lambda_coherence::analytic_coherence(angle);
        Ok(())
    })
}

/// Executes a `simulate` run configuration, writing all outputs under `out_dir`.
///
/// # Safety
/// Both arguments must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn lc_run_config(config_json: *const c_char, out_dir: *const c_char) -> LcStatus {
    guard(|| {
        let config = parse_config(str_arg(config_json, "config_json")?)?;
        let out_dir = str_arg(out_dir, "out_dir")?;
        cli::run(&config, Path::new(out_dir))?;
        Ok(())
    })
}
