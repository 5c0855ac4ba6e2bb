use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::pulses::{mixing_angles, AngleSample, PulseConfig};
use crate::scalar::{re, Real};
use crate::state::StateVector;

/// Instantaneous eigenbasis of the C–e–a ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct AdiabaticFrame<T> {
    pub angles: AngleSample<T>,
    /// Dark state (cos θ, 0, −sin θ), energy 0.
    pub psi0: StateVector<T>,
    pub psi_plus: StateVector<T>,
    pub psi_minus: StateVector<T>,
    pub eps_plus: T,
    pub eps_minus: T,
}

/// ε± = ½(Δ ± sqrt(Δ² + Ω²)), the small root taken from ε+ε− = −Ω²/4.
pub(crate) fn energies<T: Real>(omega: T, delta: T) -> (T, T) {
    let half = T::lit(0.5);
    let r = delta.hypot(omega);
    let quarter_omega2 = omega * omega * T::lit(0.25);
    if delta >= T::zero() {
        let plus = half * (delta + r);
        let minus = if plus > T::zero() { -quarter_omega2 / plus } else { T::zero() };
        (plus, minus)
    } else {
        let minus = half * (delta - r);
        (-quarter_omega2 / minus, minus)
    }
}

/// (ψ+, ψ0, ψ−) in (C, e, a) coordinates.
pub(crate) fn frame_vectors<T: Real>(theta: T, phi: T) -> [[T; 3]; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [[sp * st, cp, sp * ct], [ct, T::zero(), -st], [cp * st, -sp, cp * ct]]
}

fn to_state<T: Real>(v: [T; 3]) -> StateVector<T> {
    StateVector::from_raw(v.iter().map(|&x| re(x)).collect())
}

pub(crate) fn frame_from_angles<T: Real>(angles: AngleSample<T>, delta: T) -> AdiabaticFrame<T> {
    let [plus, zero, minus] = frame_vectors(angles.theta, angles.phi);
    let (eps_plus, eps_minus) = energies(angles.omega_rms, delta);
    AdiabaticFrame {
        angles,
        psi0: to_state(zero),
        psi_plus: to_state(plus),
        psi_minus: to_state(minus),
        eps_plus,
        eps_minus,
    }
}

/// Adiabatic states and energies at time `t`.
///
/// With no field and Δ = 0 all three energies coincide and the bright
/// states are undefined.
pub fn adiabatic_frame<T: Real>(cfg: &PulseConfig<T>, t: T) -> Result<AdiabaticFrame<T>> {
    let angles = mixing_angles(cfg, t);
    if angles.omega_rms == T::zero() && cfg.delta == T::zero() {
        return Err(Error::DegenerateFrame { t: t.as_f64() });
    }
    Ok(frame_from_angles(angles, cfg.delta))
}

/// Real orthogonal O(t) with columns (ψ+, ψ0, ψ−), so that adiabatic
/// amplitudes are A = Oᵀ B for B in (C, e, a) coordinates.
pub fn rotation_matrix<T: Real>(cfg: &PulseConfig<T>, t: T) -> ComplexMatrix<T> {
    let s = mixing_angles(cfg, t);
    let cols = frame_vectors(s.theta, s.phi);
    ComplexMatrix::from_fn(3, |i, j| re(cols[j][i]))
}

/// C–e–a Hamiltonian: Δ|e⟩⟨e| + ½Ω_p(|C⟩⟨e| + h.c.) + ½Ω_a(|a⟩⟨e| + h.c.).
pub fn hamiltonian_cea<T: Real>(cfg: &PulseConfig<T>, t: T) -> ComplexMatrix<T> {
    let s = mixing_angles(cfg, t);
    let half = T::lit(0.5);
    let mut h = ComplexMatrix::zeros(3);
    h[(0, 1)] = re(half * s.omega_pump);
    h[(1, 0)] = re(half * s.omega_pump);
    h[(1, 1)] = re(cfg.delta);
    h[(1, 2)] = re(half * s.omega_stokes);
    h[(2, 1)] = re(half * s.omega_stokes);
    h
}
