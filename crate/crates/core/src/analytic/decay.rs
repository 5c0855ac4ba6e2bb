//! Loss from |a⟩ in the adiabatic frame, `H − iγ|a⟩⟨a|`.
//!
//! `gamma` here is the amplitude damping rate γ of that non-Hermitian
//! Hamiltonian. The master equation's Γ_a corresponds to γ = Γ_a/2; see
//! [`DecayConfig::amplitude_rate_a`](crate::dynamics::DecayConfig::amplitude_rate_a).

use num_traits::Zero;

use super::frame::{energies, rotation_matrix};
use crate::dynamics::integrator::{integrate, StepControl};
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::pulses::{mixing_angles, PulseConfig};
use crate::quad;
use crate::scalar::{c, Real, C};
use crate::state::StateVector;

fn check_gamma<T: Real>(gamma: T) -> Result<()> {
    if gamma >= T::zero() && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("gamma = {gamma} must be ≥ 0")))
    }
}

/// H′ = Oᵀ(H − iγ|a⟩⟨a|)O − iOᵀȮ in the ordered basis (ψ+, ψ0, ψ−).
pub fn effective_hamiltonian_adiabatic<T: Real>(cfg: &PulseConfig<T>, gamma: T, t: T) -> ComplexMatrix<T> {
    let s = mixing_angles(cfg, t);
    let (eps_plus, eps_minus) = energies(s.omega_rms, cfg.delta);
    let (sp, cp) = s.phi.sin_cos();
    let (st, ct) = s.theta.sin_cos();
    // ⟨ψ_j|a⟩
    let v = [sp * ct, -st, cp * ct];
    // ⟨ψ_j|dψ_k/dt⟩
    let (td, pd) = (s.theta_dot, s.phi_dot);
    let k = [[T::zero(), -td * sp, -pd], [td * sp, T::zero(), td * cp], [pd, -td * cp, T::zero()]];
    let diag = [eps_plus, T::zero(), eps_minus];
    ComplexMatrix::from_fn(3, |i, j| {
        let real = if i == j { diag[i] } else { T::zero() };
        c(real, -gamma * v[i] * v[j] - k[i][j])
    })
}

/// Integrates i dA/dt = H′A across the window from the bare (C, e, a)
/// amplitudes `b0` at its start, and returns the adiabatic amplitudes
/// (A+, A0, A−) at its end.
pub fn propagate_statevector_adiabatic<T: Real>(
    b0: &StateVector<T>,
    cfg: &PulseConfig<T>,
    gamma: T,
    tol: T,
) -> Result<StateVector<T>> {
    if b0.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: b0.dim() });
    }
    cfg.validate()?;
    check_gamma(gamma)?;
    let (t0, t1) = cfg.window();
    if mixing_angles(cfg, t0).omega_rms == T::zero() && cfg.delta == T::zero() {
        return Err(Error::DegenerateFrame { t: t0.as_f64() });
    }
    let a0 = rotation_matrix(cfg, t0).transpose().mul_vec(b0.amplitudes());
    let minus_i = c(T::zero(), -T::one());
    let rhs = |t: T, a: &[C<T>], da: &mut [C<T>]| {
        let h = effective_hamiltonian_adiabatic(cfg, gamma, t);
        for (i, out) in da.iter_mut().enumerate() {
            let mut acc = C::zero();
            for (j, x) in a.iter().enumerate() {
                acc += h[(i, j)] * x;
            }
            *out = minus_i * acc;
        }
    };
    let ctl = StepControl {
        tol,
        max_step: cfg.half_width / T::lit(20.0),
        initial_step: cfg.half_width / T::lit(1000.0),
        min_step: (t1 - t0) * T::lit(1e-13),
    };
    let (a1, _) = integrate(rhs, a0, t0, t1, &ctl, |_, _| Ok(()))?;
    Ok(StateVector::from_raw(a1))
}

/// Integrand of the dark-state attenuation exponent,
///
/// ```text
/// (Δ²θ̇² cos²θ + q² sin²θ) / (Δ²γ² cos⁴θ + q²),   q = Ω²/4 + φ̇²,
/// ```
///
/// taken as sin²θ where numerator and denominator both vanish.
pub fn attenuation_integrand<T: Real>(cfg: &PulseConfig<T>, gamma: T, t: T) -> T {
    let s = mixing_angles(cfg, t);
    let (st, ct) = s.theta.sin_cos();
    let d2 = cfg.delta * cfg.delta;
    let q = s.omega_rms * s.omega_rms * T::lit(0.25) + s.phi_dot * s.phi_dot;
    let num = d2 * s.theta_dot * s.theta_dot * ct * ct + q * q * st * st;
    let den = d2 * gamma * gamma * ct.powi(4) + q * q;
    if den == T::zero() {
        st * st
    } else {
        num / den
    }
}

/// exp(−2γ ∫ integrand dt) over the integration window.
pub fn attenuation_factor<T: Real>(cfg: &PulseConfig<T>, gamma: T) -> Result<T> {
    cfg.validate()?;
    check_gamma(gamma)?;
    if gamma == T::zero() {
        return Ok(T::one());
    }
    let (t0, t1) = cfg.window();
    let half = cfg.delay * T::lit(0.5);
    let q = quad::integrate(
        |t| attenuation_integrand(cfg, gamma, t),
        t0,
        t1,
        &[-half, T::zero(), half],
        T::lit(1e-10),
        T::lit(1e-14),
    )?;
    Ok((-T::lit(2.0) * gamma * q.value).exp())
}

/// Transferred population P_a reduced by loss from |a⟩ at amplitude rate γ.
pub fn pa_with_decay<T: Real>(p_a: T, cfg: &PulseConfig<T>, gamma: T) -> Result<T> {
    check_gamma(gamma)?;
    if p_a == T::zero() {
        return Ok(T::zero());
    }
    if gamma == T::zero() {
        return Ok(p_a);
    }
    Ok(p_a * attenuation_factor(cfg, gamma)?)
}
