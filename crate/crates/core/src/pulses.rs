//! Gaussian pump/Stokes envelopes and the adiabatic mixing angles.
//!
//! The Stokes pulse is centered at −τ/2 and the pump at +τ/2, so for τ > 0
//! the pulses arrive in counterintuitive order. θ and φ are computed with
//! `atan2`, and their derivatives use the logarithmic derivatives of the
//! envelopes, which stay finite where the envelopes underflow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{phase, Real, C};

/// Meaning of the half-width `T` of a Gaussian envelope `exp(−κ (t/T)²)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidthConvention {
    /// `T` is the standard deviation of the amplitude (equivalently the 1/e
    /// half-width of the intensity): κ = 1/2.
    #[default]
    Sigma,
    /// `T` is the 1/e half-width of the amplitude: κ = 1.
    #[serde(rename = "amplitude_1e")]
    AmplitudeOneOverE,
    /// `T` is the half-width at half maximum of the amplitude: κ = ln 2.
    Hwhm,
}

impl WidthConvention {
    pub fn kappa<T: Real>(self) -> T {
        match self {
            WidthConvention::Sigma => T::lit(0.5),
            WidthConvention::AmplitudeOneOverE => T::one(),
            WidthConvention::Hwhm => T::LN_2(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WidthConvention::Sigma => "sigma",
            WidthConvention::AmplitudeOneOverE => "amplitude_1e",
            WidthConvention::Hwhm => "hwhm",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sigma" => Some(WidthConvention::Sigma),
            "amplitude_1e" => Some(WidthConvention::AmplitudeOneOverE),
            "hwhm" => Some(WidthConvention::Hwhm),
            _ => None,
        }
    }
}

/// Pump/Stokes pulse pair and the pump mixing angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseConfig<T> {
    /// Peak Rabi frequency of both pulses.
    pub omega_max: T,
    /// Gaussian half-width `T`, interpreted through `width`.
    pub half_width: T,
    /// Center-to-center delay τ; Stokes leads for τ > 0.
    pub delay: T,
    /// Pump amplitude split between |m⟩ and |n⟩, in [0, π/2].
    pub alpha: T,
    /// Relative pump phase.
    pub beta: T,
    /// Common one-photon detuning Δ.
    pub delta: T,
    #[serde(default)]
    pub width: WidthConvention,
    /// Separate Stokes peak; `None` shares `omega_max`.
    #[serde(default)]
    pub stokes_peak: Option<T>,
}

impl<T: Real> PulseConfig<T> {
    pub fn new(omega_max: T, half_width: T, delay: T, alpha: T, beta: T, delta: T) -> Result<Self> {
        let cfg = Self {
            omega_max,
            half_width,
            delay,
            alpha,
            beta,
            delta,
            width: WidthConvention::default(),
            stokes_peak: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// (Ω_max, T, τ) = (6, 2, 3.2), Δ = 0.3, α = π/4, β = 0.
    pub fn paper() -> Self {
        Self {
            omega_max: T::lit(6.0),
            half_width: T::lit(2.0),
            delay: T::lit(3.2),
            alpha: T::FRAC_PI_4(),
            beta: T::zero(),
            delta: T::lit(0.3),
            width: WidthConvention::default(),
            stokes_peak: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.omega_max, self.half_width, self.delay, self.alpha, self.beta, self.delta]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("pulse parameters must be finite".into()));
        }
        if self.omega_max < T::zero() {
            return Err(Error::InvalidParameter(format!("omega_max = {} < 0", self.omega_max)));
        }
        if self.half_width <= T::zero() {
            return Err(Error::InvalidParameter(format!("half_width = {} <= 0", self.half_width)));
        }
        let slack = T::lit(1e-12);
        if self.alpha < -slack || self.alpha > T::FRAC_PI_2() + slack {
            return Err(Error::InvalidParameter(format!("alpha = {} outside [0, π/2]", self.alpha)));
        }
        if let Some(p) = self.stokes_peak {
            if !(p >= T::zero() && p.is_finite()) {
                return Err(Error::InvalidParameter(format!("stokes_peak = {p} must be ≥ 0")));
            }
        }
        Ok(())
    }

    pub fn with_angles(mut self, alpha: T, beta: T) -> Self {
        self.alpha = alpha;
        self.beta = beta;
        self
    }

    pub fn with_width(mut self, width: WidthConvention) -> Self {
        self.width = width;
        self
    }

    pub fn stokes_amplitude(&self) -> T {
        self.stokes_peak.unwrap_or(self.omega_max)
    }

    /// Integration window [−(τ/2 + 5T), τ/2 + 5T].
    pub fn window(&self) -> (T, T) {
        let half = self.delay.abs() * T::lit(0.5) + T::lit(5.0) * self.half_width;
        (-half, half)
    }

    fn pump_center(&self) -> T {
        self.delay * T::lit(0.5)
    }

    fn stokes_center(&self) -> T {
        -self.delay * T::lit(0.5)
    }

    fn gaussian(&self, t: T, center: T) -> T {
        let x = (t - center) / self.half_width;
        (-self.width.kappa::<T>() * x * x).exp()
    }

    /// d ln Ω / dt of a pulse centered at `center`.
    fn log_rate(&self, t: T, center: T) -> T {
        -T::lit(2.0) * self.width.kappa::<T>() * (t - center) / (self.half_width * self.half_width)
    }
}

/// Pump envelope Ω_p(t).
pub fn envelope_pump<T: Real>(cfg: &PulseConfig<T>, t: T) -> T {
    if t.is_infinite() {
        return T::zero();
    }
    cfg.omega_max * cfg.gaussian(t, cfg.pump_center())
}

/// Stokes envelope Ω_a(t).
pub fn envelope_stokes<T: Real>(cfg: &PulseConfig<T>, t: T) -> T {
    if t.is_infinite() {
        return T::zero();
    }
    cfg.stokes_amplitude() * cfg.gaussian(t, cfg.stokes_center())
}

/// dΩ_p/dt.
pub fn envelope_pump_rate<T: Real>(cfg: &PulseConfig<T>, t: T) -> T {
    if t.is_infinite() {
        return T::zero();
    }
    envelope_pump(cfg, t) * cfg.log_rate(t, cfg.pump_center())
}

/// dΩ_a/dt.
pub fn envelope_stokes_rate<T: Real>(cfg: &PulseConfig<T>, t: T) -> T {
    if t.is_infinite() {
        return T::zero();
    }
    envelope_stokes(cfg, t) * cfg.log_rate(t, cfg.stokes_center())
}

/// (Ω_m, Ω_n) = (Ω_p cos α, Ω_p sin α e^{iβ}).
pub fn pump_components<T: Real>(cfg: &PulseConfig<T>, t: T) -> (C<T>, C<T>) {
    let p = envelope_pump(cfg, t);
    let m = C::new(p * cfg.alpha.cos(), T::zero());
    let n = phase(cfg.beta) * (p * cfg.alpha.sin());
    (m, n)
}

/// Mixing angles and their rates at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleSample<T> {
    pub t: T,
    pub theta: T,
    pub phi: T,
    /// Ω(t) = sqrt(Ω_p² + Ω_a²).
    pub omega_rms: T,
    pub theta_dot: T,
    pub phi_dot: T,
    pub omega_pump: T,
    pub omega_stokes: T,
}

/// tan θ = Ω_p/Ω_a, tan 2φ = Ω/Δ, with closed-form rates.
///
/// Where both envelopes vanish θ is held at its limit: 0 before the pulse
/// pair (Stokes tail dominates) and π/2 after it. φ is held at its Ω → 0⁺
/// limit, which is π/4 on resonance.
pub fn mixing_angles<T: Real>(cfg: &PulseConfig<T>, t: T) -> AngleSample<T> {
    let p = envelope_pump(cfg, t);
    let s = envelope_stokes(cfg, t);
    let half = T::lit(0.5);
    if p == T::zero() && s == T::zero() {
        let theta = if t < T::zero() { T::zero() } else { T::FRAC_PI_2() };
        return AngleSample {
            t,
            theta,
            phi: if cfg.delta == T::zero() { T::FRAC_PI_4() } else { half * T::zero().atan2(cfg.delta) },
            omega_rms: T::zero(),
            theta_dot: T::zero(),
            phi_dot: T::zero(),
            omega_pump: T::zero(),
            omega_stokes: T::zero(),
        };
    }
    let theta = p.atan2(s);
    let omega = p.hypot(s);
    let phi = half * omega.atan2(cfg.delta);
    let (sin_t, cos_t) = theta.sin_cos();
    let lp = cfg.log_rate(t, cfg.pump_center());
    let ls = cfg.log_rate(t, cfg.stokes_center());
    let theta_dot = (lp - ls) * sin_t * cos_t;
    let omega_dot = omega * (sin_t * sin_t * lp + cos_t * cos_t * ls);
    let denom = cfg.delta * cfg.delta + omega * omega;
    let phi_dot = if denom > T::zero() { half * cfg.delta * omega_dot / denom } else { T::zero() };
    AngleSample { t, theta, phi, omega_rms: omega, theta_dot, phi_dot, omega_pump: p, omega_stokes: s }
}
