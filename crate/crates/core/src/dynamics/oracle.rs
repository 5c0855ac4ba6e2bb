//! Piecewise-constant propagation by matrix exponentials.
//!
//! Each sub-interval uses the generator K = −iH(t_mid) − ½Γ_e|e⟩⟨e| −
//! ½Γ_a|a⟩⟨a| frozen at its midpoint, so ρ ↦ WρW† with W = exp(K dt). The
//! loss terms carry no jump part, so this congruence is exact for a constant
//! generator and shares nothing with the Runge–Kutta path.

use crate::error::{Error, Result};
use crate::pulses::PulseConfig;
use crate::scalar::{c, Real};
use crate::state::{DensityMatrix, Level};

use super::{hamiltonian_bare, DecayConfig};

pub fn propagate_oracle<T: Real>(
    rho0: &DensityMatrix<T>,
    cfg: &PulseConfig<T>,
    decay: &DecayConfig<T>,
    t0: T,
    t1: T,
    n_steps: usize,
) -> Result<DensityMatrix<T>> {
    if n_steps == 0 {
        return Err(Error::InvalidParameter("n_steps must be at least 1".into()));
    }
    let dt = (t1 - t0) / T::from_usize(n_steps).expect("step count fits the scalar type");
    let half = T::lit(0.5);
    let e = Level::E.index();
    let a = Level::A.index();
    let minus_i = c(T::zero(), -T::one());
    let mut rho = rho0.rho().clone();
    for k in 0..n_steps {
        let t_mid = t0 + dt * (T::from_usize(k).expect("step index fits") + half);
        let mut gen = hamiltonian_bare(cfg, t_mid).scale(minus_i);
        gen[(e, e)] -= c(decay.gamma_e * half, T::zero());
        gen[(a, a)] -= c(decay.gamma_a * half, T::zero());
        let w = gen.scale_real(dt).expm();
        rho = w.congruence(&rho);
    }
    Ok(DensityMatrix::from_raw(rho, rho0.spectator_weight()))
}
