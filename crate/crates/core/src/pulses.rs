//! Time-dependent Rabi-frequency envelopes.
//!
//! Amplitudes are in rad/ns and times are absolute on the scenario clock, in
//! ns. Widths are always given as the FWHM of the Rabi frequency; use
//! [`intensity_fwhm_to_rabi_fwhm`] for widths quoted on the intensity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ramp profile width as a fraction of the ramp duration.
const RAMP_SIGMAS: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PulseEnvelope {
    Constant {
        level: f64,
    },
    Gaussian {
        peak: f64,
        center: f64,
        fwhm: f64,
    },
    /// The inner envelope up to `cutoff`, then its value at `cutoff` scaled by a
    /// half-Gaussian ramp reaching exactly zero at `cutoff + ramp`.
    ///
    /// Holding the inner value during the ramp means two envelopes truncated
    /// with the same `cutoff` and `ramp` keep a constant ratio while they
    /// switch off.
    Truncated {
        inner: Box<PulseEnvelope>,
        cutoff: f64,
        ramp: f64,
    },
    Scaled {
        inner: Box<PulseEnvelope>,
        factor: f64,
    },
    Sum {
        parts: Vec<PulseEnvelope>,
    },
}

fn non_negative(name: &'static str, value: f64) -> Result<()> {
    if !(value >= 0.0 && value.is_finite()) {
        return Err(Error::invalid(name, format!("must be finite and >= 0, got {value}")));
    }
    Ok(())
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0 && value.is_finite()) {
        return Err(Error::invalid(name, format!("must be finite and > 0, got {value}")));
    }
    Ok(())
}

fn finite(name: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::invalid(name, format!("must be finite, got {value}")));
    }
    Ok(())
}

impl PulseEnvelope {
    pub fn constant(level: f64) -> Result<Self> {
        let env = Self::Constant { level };
        env.validate()?;
        Ok(env)
    }

    pub fn gaussian(peak: f64, center: f64, fwhm: f64) -> Result<Self> {
        let env = Self::Gaussian { peak, center, fwhm };
        env.validate()?;
        Ok(env)
    }

    pub fn truncated(inner: PulseEnvelope, cutoff: f64, ramp: f64) -> Result<Self> {
        let env = Self::Truncated { inner: Box::new(inner), cutoff, ramp };
        env.validate()?;
        Ok(env)
    }

    pub fn scaled(inner: PulseEnvelope, factor: f64) -> Result<Self> {
        let env = Self::Scaled { inner: Box::new(inner), factor };
        env.validate()?;
        Ok(env)
    }

    pub fn sum(parts: Vec<PulseEnvelope>) -> Result<Self> {
        let env = Self::Sum { parts };
        env.validate()?;
        Ok(env)
    }

    /// Checks every parameter of the envelope tree. Envelopes built through
    /// the constructors are always valid; deserialized ones must be checked.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Constant { level } => non_negative("level", *level),
            Self::Gaussian { peak, center, fwhm } => {
                non_negative("peak", *peak)?;
                finite("center", *center)?;
                positive("fwhm", *fwhm)
            }
            Self::Truncated { inner, cutoff, ramp } => {
                finite("cutoff", *cutoff)?;
                positive("ramp", *ramp)?;
                inner.validate()
            }
            Self::Scaled { inner, factor } => {
                non_negative("factor", *factor)?;
                inner.validate()
            }
            Self::Sum { parts } => parts.iter().try_for_each(|p| p.validate()),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Constant { level } => *level,
            Self::Gaussian { peak, center, fwhm } => {
                let x = (t - center) / fwhm;
                peak * (-4.0 * std::f64::consts::LN_2 * x * x).exp()
            }
            Self::Truncated { inner, cutoff, ramp } => {
                if t < *cutoff {
                    inner.eval(t)
                } else if t < cutoff + ramp {
                    inner.eval(*cutoff) * ramp_factor(t - cutoff, *ramp)
                } else {
                    0.0
                }
            }
            Self::Scaled { inner, factor } => factor * inner.eval(t),
            Self::Sum { parts } => parts.iter().map(|p| p.eval(t)).sum(),
        }
    }

    /// Multiplies every amplitude in the tree by `factor`.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        Self::scaled(self.clone(), factor)
    }
}

/// Half-Gaussian from 1 at `s = 0` to exactly 0 at `s = ramp`, offset so the
/// switch-off has no step at the end.
fn ramp_factor(s: f64, ramp: f64) -> f64 {
    let sigma = ramp / RAMP_SIGMAS;
    let g = |x: f64| (-0.5 * (x / sigma).powi(2)).exp();
    let floor = g(ramp);
    ((g(s) - floor) / (1.0 - floor)).max(0.0)
}

/// Rabi-frequency FWHM of a Gaussian pulse whose intensity FWHM is given.
/// The Rabi frequency scales as √intensity, widening the profile by √2.
pub fn intensity_fwhm_to_rabi_fwhm(fwhm_intensity: f64) -> Result<f64> {
    positive("fwhm_intensity", fwhm_intensity)?;
    Ok(fwhm_intensity * std::f64::consts::SQRT_2)
}

/// Parameters of a counter-intuitive pump/Stokes pair that is switched off
/// together at a frozen amplitude ratio.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FractionalStirapPulses {
    pub peak_pump: f64,
    pub peak_stokes: f64,
    pub fwhm_pump: f64,
    pub fwhm_stokes: f64,
    pub pump_center: f64,
    /// How far the Stokes peak precedes the pump peak (ns).
    pub stokes_advance: f64,
    pub cutoff: f64,
    pub ramp: f64,
}

impl FractionalStirapPulses {
    pub fn build(&self) -> Result<(PulseEnvelope, PulseEnvelope)> {
        fractional_stirap_pair(
            self.peak_pump,
            self.peak_stokes,
            self.fwhm_pump,
            self.fwhm_stokes,
            self.pump_center,
            self.stokes_advance,
            self.cutoff,
            self.ramp,
        )
    }
}

/// Builds `(pump, stokes)`: Gaussians with the Stokes centred
/// `stokes_advance` before the pump, both truncated at the same `cutoff` with
/// the same `ramp`.
#[allow(clippy::too_many_arguments)]
pub fn fractional_stirap_pair(
    peak_p: f64,
    peak_s: f64,
    fwhm_p: f64,
    fwhm_s: f64,
    pump_center: f64,
    stokes_advance: f64,
    cutoff_time: f64,
    ramp: f64,
) -> Result<(PulseEnvelope, PulseEnvelope)> {
    positive("stokes_advance", stokes_advance)?;
    positive("ramp", ramp)?;
    finite("pump_center", pump_center)?;
    finite("cutoff_time", cutoff_time)?;
    if cutoff_time < pump_center {
        return Err(Error::invalid(
            "cutoff_time",
            format!("must not precede the pump centre ({pump_center} ns), got {cutoff_time}"),
        ));
    }
    let pump = PulseEnvelope::gaussian(peak_p, pump_center, fwhm_p)?;
    let stokes = PulseEnvelope::gaussian(peak_s, pump_center - stokes_advance, fwhm_s)?;
    Ok((
        PulseEnvelope::truncated(pump, cutoff_time, ramp)?,
        PulseEnvelope::truncated(stokes, cutoff_time, ramp)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::mixing_angle;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn default_pair() -> (PulseEnvelope, PulseEnvelope) {
        fractional_stirap_pair(
            0.09,
            0.12,
            intensity_fwhm_to_rabi_fwhm(2000.0).unwrap(),
            intensity_fwhm_to_rabi_fwhm(24000.0).unwrap(),
            30_000.0,
            11_000.0,
            30_000.0,
            500.0,
        )
        .unwrap()
    }

    #[test]
    fn gaussian_peak_and_half_maximum() {
        let g = PulseEnvelope::gaussian(0.075, 54_900.0, 15_300.0).unwrap();
        assert_eq!(g.eval(54_900.0), 0.075);
        assert_abs_diff_eq!(g.eval(54_900.0 - 7_650.0), 0.0375, epsilon = 1e-12);
        assert_abs_diff_eq!(g.eval(54_900.0 + 7_650.0), 0.0375, epsilon = 1e-12);
    }

    #[test]
    fn constant_is_flat() {
        let c = PulseEnvelope::constant(0.028).unwrap();
        for t in [-1e9, 0.0, 3.5, 1e7] {
            assert_eq!(c.eval(t), 0.028);
        }
    }

    #[test]
    fn intensity_to_rabi_width() {
        assert_abs_diff_eq!(intensity_fwhm_to_rabi_fwhm(24_000.0).unwrap(), 33_941.0, epsilon = 1.0);
        assert_abs_diff_eq!(intensity_fwhm_to_rabi_fwhm(2_000.0).unwrap(), 2_828.0, epsilon = 1.0);
        assert_abs_diff_eq!(intensity_fwhm_to_rabi_fwhm(500.0).unwrap(), 707.0, epsilon = 1.0);
        assert!(intensity_fwhm_to_rabi_fwhm(0.0).is_err());
        assert!(intensity_fwhm_to_rabi_fwhm(-3.0).is_err());
    }

    #[test]
    fn rabi_width_reproduces_intensity_width() {
        // squared Rabi profile must have the intensity FWHM
        let rabi = PulseEnvelope::gaussian(1.0, 0.0, intensity_fwhm_to_rabi_fwhm(500.0).unwrap()).unwrap();
        assert_abs_diff_eq!(rabi.eval(250.0).powi(2), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn truncated_vanishes_after_ramp() {
        let t = PulseEnvelope::truncated(PulseEnvelope::constant(1.0).unwrap(), 100.0, 50.0).unwrap();
        assert_eq!(t.eval(99.0), 1.0);
        assert_eq!(t.eval(100.0), 1.0);
        assert!(t.eval(125.0) > 0.0 && t.eval(125.0) < 1.0);
        assert_eq!(t.eval(150.0), 0.0);
        assert_eq!(t.eval(1e6), 0.0);
        // continuous at the end of the ramp
        assert!(t.eval(150.0 - 1e-6) < 1e-6);
    }

    #[test]
    fn pair_shapes() {
        let (pump, stokes) = default_pair();
        // Stokes long and early, pump short and late
        assert!(stokes.eval(19_000.0) > 0.119);
        assert!(pump.eval(19_000.0) < 1e-12);
        assert!(stokes.eval(10_000.0) > pump.eval(10_000.0));
        assert_eq!(pump.eval(30_000.0), 0.09);
        assert_eq!(pump.eval(30_500.0), 0.0);
        assert_eq!(stokes.eval(30_500.0), 0.0);
    }

    #[test]
    fn pair_ratio_frozen_during_ramp() {
        let (pump, stokes) = default_pair();
        let at_cutoff = pump.eval(30_000.0) / stokes.eval(30_000.0);
        let mid_ramp = pump.eval(30_250.0) / stokes.eval(30_250.0);
        assert_abs_diff_eq!(at_cutoff, mid_ramp, epsilon = 1e-9);
    }

    #[test]
    fn pair_rejects_bad_ordering() {
        assert!(fractional_stirap_pair(0.09, 0.12, 1.0, 1.0, 100.0, 0.0, 100.0, 10.0).is_err());
        assert!(fractional_stirap_pair(0.09, 0.12, 1.0, 1.0, 100.0, 5.0, 99.0, 10.0).is_err());
        assert!(fractional_stirap_pair(0.09, 0.12, 1.0, 1.0, 100.0, 5.0, 100.0, 0.0).is_err());
        assert!(fractional_stirap_pair(-0.09, 0.12, 1.0, 1.0, 100.0, 5.0, 100.0, 1.0).is_err());
    }

    #[test]
    fn identical_pulses_give_constant_angle() {
        let (pump, stokes) =
            fractional_stirap_pair(0.1, 0.1, 2_000.0, 2_000.0, 10_000.0, 1e-9, 12_000.0, 500.0).unwrap();
        let mut t = 4_000.0;
        while t < 12_500.0 {
            let theta = mixing_angle(pump.eval(t), stokes.eval(t)).unwrap().radians();
            assert_abs_diff_eq!(theta, std::f64::consts::FRAC_PI_4, epsilon = 1e-9);
            t += 7.0;
        }
    }

    #[test]
    fn pair_angle_monotone_until_switch_off() {
        let (pump, stokes) = default_pair();
        let mut last = 0.0;
        let mut t = 0.0;
        while t < 30_500.0 {
            let theta = mixing_angle(pump.eval(t), stokes.eval(t)).unwrap().radians();
            assert!(theta >= last - 1e-12, "theta decreased at t = {t}");
            last = last.max(theta);
            t += 5.0;
        }
        assert!(last > 0.7);
    }

    #[test]
    fn validate_catches_deserialized_garbage() {
        let env: PulseEnvelope =
            serde_json::from_str(r#"{"kind":"gaussian","peak":-1.0,"center":0.0,"fwhm":10.0}"#).unwrap();
        assert!(env.validate().is_err());
        let env: PulseEnvelope = serde_json::from_str(
            r#"{"kind":"sum","parts":[{"kind":"constant","level":0.1},{"kind":"truncated","inner":{"kind":"constant","level":1.0},"cutoff":5.0,"ramp":0.0}]}"#,
        )
        .unwrap();
        assert!(env.validate().is_err());
    }

    fn envelope_strategy() -> impl Strategy<Value = PulseEnvelope> {
        let leaf = prop_oneof![
            (0.0..1.0f64).prop_map(|level| PulseEnvelope::Constant { level }),
            (0.0..1.0f64, -1e4..1e4f64, 1.0..1e4f64)
                .prop_map(|(peak, center, fwhm)| PulseEnvelope::Gaussian { peak, center, fwhm }),
        ];
        leaf.prop_recursive(3, 12, 3, |inner| {
            prop_oneof![
                (inner.clone(), -1e4..1e4f64, 1.0..1e3f64).prop_map(|(i, cutoff, ramp)| {
                    PulseEnvelope::Truncated { inner: Box::new(i), cutoff, ramp }
                }),
                (inner.clone(), 0.0..3.0f64)
                    .prop_map(|(i, factor)| PulseEnvelope::Scaled { inner: Box::new(i), factor }),
                proptest::collection::vec(inner, 0..3).prop_map(|parts| PulseEnvelope::Sum { parts }),
            ]
        })
    }

    proptest! {
        #[test]
        fn envelopes_are_non_negative(env in envelope_strategy(), t in -2e4..2e4f64) {
            prop_assert!(env.validate().is_ok());
            prop_assert!(env.eval(t) >= 0.0);
        }

        #[test]
        fn truncation_vanishes(env in envelope_strategy(), cutoff in -1e4..1e4f64, ramp in 1.0..1e3f64, after in 0.0..1e5f64) {
            let t = PulseEnvelope::truncated(env, cutoff, ramp).unwrap();
            prop_assert_eq!(t.eval(cutoff + ramp + after), 0.0);
        }

        #[test]
        fn serde_round_trip(env in envelope_strategy()) {
            let text = serde_json::to_string(&env).unwrap();
            let back: PulseEnvelope = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back, env);
        }
    }
}
