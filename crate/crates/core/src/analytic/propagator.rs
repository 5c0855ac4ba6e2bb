use num_traits::Zero;

use super::basis::{cd_basis, CDBasis};
use super::frame::{energies, frame_from_angles, AdiabaticFrame};
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::pulses::{mixing_angles, PulseConfig};
use crate::quad;
use crate::scalar::{phase, re, Real, C};
use crate::state::{DensityMatrix, Level, DIM};

/// Largest weight outside the ground block accepted by [`final_state_map`].
pub const LEAK_TOL: f64 = 1e-10;

/// ∫ ε± dt from the window start to `t`, clamped to the window.
fn dynamic_phases<T: Real>(cfg: &PulseConfig<T>, t: T) -> Result<(T, T)> {
    let (t0, t1) = cfg.window();
    let end = t.min(t1);
    if !(end > t0) {
        return Ok((T::zero(), T::zero()));
    }
    let half = cfg.delay * T::lit(0.5);
    let breaks = [-half, T::zero(), half];
    let rel = T::lit(1e-10);
    let abs = T::lit(1e-13);
    let eps = |s: T| energies(mixing_angles(cfg, s).omega_rms, cfg.delta);
    let plus = quad::integrate(|s| eps(s).0, t0, end, &breaks, rel, abs)?.value;
    let minus = quad::integrate(|s| eps(s).1, t0, end, &breaks, rel, abs)?.value;
    Ok((plus, minus))
}

fn embedded<T: Real>(basis: &CDBasis<T>, v: &crate::state::StateVector<T>) -> Vec<C<T>> {
    basis.embed(v.amplitudes())
}

/// Adiabatic-following propagator on the four-level space,
///
/// ```text
/// U(t) = |D⟩⟨D| + |ψ0(t)⟩⟨C| + Σ± e^{−iΦ±(t)} |ψ±(t)⟩⟨ψ±(−∞)|
/// ```
///
/// with three-level vectors embedded via (C, e, a) → four-level space and
/// Φ± the integrated adiabatic energies from the start of the window.
pub fn adiabatic_propagator<T: Real>(cfg: &PulseConfig<T>, t: T) -> Result<ComplexMatrix<T>> {
    cfg.validate()?;
    let basis = cd_basis(cfg.alpha, cfg.beta);
    let now: AdiabaticFrame<T> = frame_from_angles(mixing_angles(cfg, t), cfg.delta);
    let start = frame_from_angles(mixing_angles(cfg, T::neg_infinity()), cfg.delta);
    let (phi_plus, phi_minus) = dynamic_phases(cfg, t)?;

    let d = basis.d_state.amplitudes();
    let mut u = ComplexMatrix::outer(d, d)?;
    let terms = [
        (embedded(&basis, &now.psi0), basis.c_state.amplitudes().to_vec(), re(T::one())),
        (embedded(&basis, &now.psi_plus), embedded(&basis, &start.psi_plus), phase(-phi_plus)),
        (embedded(&basis, &now.psi_minus), embedded(&basis, &start.psi_minus), phase(-phi_minus)),
    ];
    for (ket, bra, w) in terms {
        u = &u + &ComplexMatrix::outer(&ket, &bra)?.scale(w);
    }
    Ok(u)
}

/// Ground-block image under complete adiabatic transfer: |D⟩ is left alone
/// and |C⟩ → −|a⟩, so
///
/// ```text
/// ρ_f = ⟨D|ρ|D⟩ |D⟩⟨D| + ⟨C|ρ|C⟩ |a⟩⟨a| − ⟨D|ρ|C⟩ |D⟩⟨a| − h.c.
/// ```
pub fn final_state_map<T: Real>(rho: &DensityMatrix<T>, basis: &CDBasis<T>) -> Result<DensityMatrix<T>> {
    let leak = rho.weight_outside_block();
    if leak > T::lit(LEAK_TOL) {
        return Err(Error::OutsideBlock { leak: leak.as_f64() });
    }
    let c = basis.c_state.amplitudes();
    let d = basis.d_state.amplitudes();
    let m = rho.rho();
    let cc = m.sandwich(c, c);
    let dd = m.sandwich(d, d);
    let dc = m.sandwich(d, c);
    let mut a = vec![C::zero(); DIM];
    a[Level::A.index()] = re(T::one());

    let out = &(&ComplexMatrix::outer(d, d)?.scale(dd) + &ComplexMatrix::outer(&a, &a)?.scale(cc))
        - &(&ComplexMatrix::outer(d, &a)?.scale(dc) + &ComplexMatrix::outer(&a, d)?.scale(dc.conj()));
    Ok(DensityMatrix::from_raw(out, rho.spectator_weight()))
}

/// P_a = ⟨C|ρ|C⟩ = cos²α ρ_mm + sin²α ρ_nn + sin 2α Re(e^{iβ} ρ_mn).
pub fn predicted_pa<T: Real>(rho: &DensityMatrix<T>, alpha: T, beta: T) -> T {
    let c = cd_basis(alpha, beta).c_state;
    rho.rho().sandwich(c.amplitudes(), c.amplitudes()).re
}
