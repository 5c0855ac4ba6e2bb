//! Master-equation dynamics of the four-level system.
//!
//! ```text
//! dρ/dt = −i[H(t), ρ] − (Γ_e/2){|e⟩⟨e|, ρ} − (Γ_a/2){|a⟩⟨a|, ρ}
//! ```
//!
//! The loss terms have no refilling part: decayed population leaves the
//! simulated block. Trace lost through |a⟩ is accumulated as the
//! fluorescence signal ∫Γ_a ρ_aa dt, trace lost through |e⟩ separately.

mod export;
pub mod integrator;
mod oracle;

pub use oracle::propagate_oracle;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::pulses::{envelope_stokes, pump_components, PulseConfig};
use crate::scalar::{c, re, Real, C};
use crate::state::{tol, DensityMatrix, Level, DIM};
use integrator::{integrate, StepControl, StepStats};

/// Decay rates out of the excited and auxiliary levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayConfig<T> {
    pub gamma_e: T,
    pub gamma_a: T,
}

impl<T: Real> DecayConfig<T> {
    pub fn new(gamma_e: T, gamma_a: T) -> Result<Self> {
        let d = Self { gamma_e, gamma_a };
        d.validate()?;
        Ok(d)
    }

    pub fn none() -> Self {
        Self { gamma_e: T::zero(), gamma_a: T::zero() }
    }

    /// Γ_e = 0.1 with the given Γ_a.
    pub fn paper(gamma_a: T) -> Self {
        Self { gamma_e: T::lit(0.1), gamma_a }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_e >= T::zero() && self.gamma_e.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma_e = {} must be ≥ 0", self.gamma_e)));
        }
        if !(self.gamma_a >= T::zero() && self.gamma_a.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma_a = {} must be ≥ 0", self.gamma_a)));
        }
        Ok(())
    }

    /// Amplitude damping rate of |a⟩ in the non-Hermitian picture
    /// `H − iγ|a⟩⟨a|`. The master equation empties ρ_aa at Γ_a, which is
    /// an amplitude rate of Γ_a/2.
    pub fn amplitude_rate_a(&self) -> T {
        self.gamma_a * T::lit(0.5)
    }

    pub fn is_lossless(&self) -> bool {
        self.gamma_e == T::zero() && self.gamma_a == T::zero()
    }
}

/// RWA Hamiltonian in the interaction picture:
/// Δ|e⟩⟨e| + ½ Σ_{i=m,n,a} (Ω_i |i⟩⟨e| + h.c.).
pub fn hamiltonian_bare<T: Real>(cfg: &PulseConfig<T>, t: T) -> ComplexMatrix<T> {
    let (om, on) = pump_components(cfg, t);
    let oa = re(envelope_stokes(cfg, t));
    let half = T::lit(0.5);
    let e = Level::E.index();
    let mut h = ComplexMatrix::zeros(DIM);
    h[(e, e)] = re(cfg.delta);
    for (level, omega) in [(Level::M, om), (Level::N, on), (Level::A, oa)] {
        let i = level.index();
        h[(i, e)] = omega * half;
        h[(e, i)] = omega.conj() * half;
    }
    h
}

/// Right-hand side of the master equation.
pub fn lindblad_rhs<T: Real>(rho: &DensityMatrix<T>, h: &ComplexMatrix<T>, decay: &DecayConfig<T>) -> ComplexMatrix<T> {
    let mut out = ComplexMatrix::zeros(DIM);
    rhs_into(rho.rho().entries(), h.entries(), decay, out.entries_mut());
    out
}

/// −i[H, ρ] − ½Γ_e{P_e, ρ} − ½Γ_a{P_a, ρ} on row-major 4×4 slices.
fn rhs_into<T: Real>(rho: &[C<T>], h: &[C<T>], decay: &DecayConfig<T>, out: &mut [C<T>]) {
    let e = Level::E.index();
    let a = Level::A.index();
    let half = T::lit(0.5);
    let loss = |k: usize| {
        if k == e {
            decay.gamma_e * half
        } else if k == a {
            decay.gamma_a * half
        } else {
            T::zero()
        }
    };
    let minus_i = c(T::zero(), -T::one());
    for i in 0..DIM {
        for j in 0..DIM {
            let mut comm = C::zero();
            for k in 0..DIM {
                comm += h[i * DIM + k] * rho[k * DIM + j] - rho[i * DIM + k] * h[k * DIM + j];
            }
            out[i * DIM + j] = minus_i * comm - rho[i * DIM + j] * (loss(i) + loss(j));
        }
    }
}

/// Integrator settings for [`propagate_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagateOptions<T> {
    pub tol: T,
    /// Defaults to T/20.
    pub max_step: Option<T>,
    /// Defaults to T/1000.
    pub initial_step: Option<T>,
    /// Evaluate the physicality invariants at every accepted step.
    pub check_invariants: bool,
}

impl<T: Real> Default for PropagateOptions<T> {
    fn default() -> Self {
        Self { tol: T::lit(1e-9), max_step: None, initial_step: None, check_invariants: true }
    }
}

impl<T: Real> PropagateOptions<T> {
    pub fn with_tol(tol: T) -> Self {
        Self { tol, ..Self::default() }
    }
}

/// Worst physicality numbers seen over the accepted steps of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryDiagnostics<T> {
    pub max_hermitian_defect: T,
    pub min_eigenvalue: T,
    /// Largest step-to-step trace increase (≤ 0 when the trace never grows).
    pub max_trace_increase: T,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

/// Abort threshold for invariant violations during propagation.
pub const ABORT_TOL: f64 = 1e-6;

/// Sampled solution of the master equation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<DensityMatrix<T>>,
    /// ∫Γ_a ρ_aa dt up to each sample.
    pub signal: Vec<T>,
    /// ∫Γ_e ρ_ee dt up to each sample.
    pub excited_loss: Vec<T>,
    /// Present when invariants were checked.
    pub diagnostics: Option<TrajectoryDiagnostics<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &DensityMatrix<T> {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    /// Total fluorescence ∫Γ_a ρ_aa dt.
    pub fn signal_integral(&self) -> T {
        *self.signal.last().expect("non-empty trajectory")
    }

    pub fn excited_loss_integral(&self) -> T {
        *self.excited_loss.last().expect("non-empty trajectory")
    }

    pub fn max_population(&self, level: Level) -> T {
        self.states.iter().map(|s| s.population(level)).fold(T::zero(), T::max)
    }
}

/// Propagates ρ0 over [t0, t1] with default options and tolerance `tol`.
pub fn propagate<T: Real>(
    rho0: &DensityMatrix<T>,
    cfg: &PulseConfig<T>,
    decay: &DecayConfig<T>,
    t0: T,
    t1: T,
    tol: T,
) -> Result<Trajectory<T>> {
    propagate_with(rho0, cfg, decay, t0, t1, &PropagateOptions::with_tol(tol))
}

pub fn propagate_with<T: Real>(
    rho0: &DensityMatrix<T>,
    cfg: &PulseConfig<T>,
    decay: &DecayConfig<T>,
    t0: T,
    t1: T,
    opts: &PropagateOptions<T>,
) -> Result<Trajectory<T>> {
    cfg.validate()?;
    decay.validate()?;
    if !(t1 > t0) {
        return Err(Error::InvalidParameter(format!("t1 = {t1} must exceed t0 = {t0}")));
    }
    let ctl = StepControl {
        tol: opts.tol,
        max_step: opts.max_step.unwrap_or(cfg.half_width / T::lit(20.0)),
        initial_step: opts.initial_step.unwrap_or(cfg.half_width / T::lit(1000.0)),
        min_step: (t1 - t0) * T::lit(1e-13),
    };

    // State layout: 16 density-matrix entries, then ∫Γ_a ρ_aa, ∫Γ_e ρ_ee.
    let n_rho = DIM * DIM;
    let mut y0: Vec<C<T>> = rho0.rho().entries().to_vec();
    y0.push(C::zero());
    y0.push(C::zero());

    let spectator = rho0.spectator_weight();
    let ee = Level::E.index() * (DIM + 1);
    let aa = Level::A.index() * (DIM + 1);
    let rhs = |t: T, y: &[C<T>], dy: &mut [C<T>]| {
        let h = hamiltonian_bare(cfg, t);
        rhs_into(&y[..n_rho], h.entries(), decay, &mut dy[..n_rho]);
        dy[n_rho] = re(decay.gamma_a * y[aa].re);
        dy[n_rho + 1] = re(decay.gamma_e * y[ee].re);
    };

    let mut traj = Trajectory {
        times: vec![t0],
        states: vec![rho0.clone()],
        signal: vec![T::zero()],
        excited_loss: vec![T::zero()],
        diagnostics: None,
    };
    let mut diag = TrajectoryDiagnostics {
        max_hermitian_defect: T::zero(),
        min_eigenvalue: T::infinity(),
        max_trace_increase: T::neg_infinity(),
        accepted_steps: 0,
        rejected_steps: 0,
    };
    if opts.check_invariants {
        let p = rho0.physicality()?;
        diag.max_hermitian_defect = p.hermitian_defect;
        diag.min_eigenvalue = p.min_eigenvalue;
    }
    let abort: T = tol(ABORT_TOL);

    let on_step = |t: T, y: &[C<T>]| -> Result<()> {
        let rho = ComplexMatrix::new(DIM, y[..n_rho].to_vec())?;
        let state = DensityMatrix::from_raw(rho, spectator);
        if opts.check_invariants {
            let p = state.physicality()?;
            let prev_trace = traj.states.last().map(|s| s.trace()).unwrap_or(p.trace);
            let rise = p.trace - prev_trace;
            diag.max_hermitian_defect = diag.max_hermitian_defect.max(p.hermitian_defect);
            diag.min_eigenvalue = diag.min_eigenvalue.min(p.min_eigenvalue);
            diag.max_trace_increase = diag.max_trace_increase.max(rise);
            if p.hermitian_defect > abort {
                return Err(violation(t, "hermitian defect", p.hermitian_defect));
            }
            if p.min_eigenvalue < -abort {
                return Err(violation(t, "minimum eigenvalue", p.min_eigenvalue));
            }
            if rise > abort {
                return Err(violation(t, "trace increase", rise));
            }
        }
        traj.times.push(t);
        traj.states.push(state);
        traj.signal.push(y[n_rho].re);
        traj.excited_loss.push(y[n_rho + 1].re);
        Ok(())
    };

    let (_, stats): (_, StepStats) = integrate(rhs, y0, t0, t1, &ctl, on_step)?;
    if opts.check_invariants {
        diag.accepted_steps = stats.accepted;
        diag.rejected_steps = stats.rejected;
        traj.diagnostics = Some(diag);
    }
    Ok(traj)
}

fn violation<T: Real>(t: T, what: &'static str, value: T) -> Error {
    Error::InvariantViolation { t: t.as_f64(), what, value: value.as_f64() }
}
