//! Density operators and state vectors over the fixed basis
//! (|m⟩, |n⟩, |e⟩, |a⟩).

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::scalar::{Real, C};

/// Number of simulated levels.
pub const DIM: usize = 4;

/// Construction-time Hermiticity tolerance.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Construction-time positivity tolerance.
pub const EIGEN_TOL: f64 = 1e-10;
/// Positivity tolerance after long dissipative integrations.
pub const EIGEN_TOL_RELAXED: f64 = 1e-8;
/// Slack on trace + spectator weight ≤ 1.
pub const TRACE_TOL: f64 = 1e-10;
/// Slack on state-vector norms.
pub const NORM_TOL: f64 = 1e-12;

/// Absolute tolerance `x`, floored at a few ulps of the scalar type.
pub(crate) fn tol<T: Real>(x: f64) -> T {
    T::lit(x).max(T::epsilon() * T::lit(64.0))
}

/// Basis levels in their fixed global order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    M,
    N,
    E,
    A,
}

impl Level {
    pub const ALL: [Level; DIM] = [Level::M, Level::N, Level::E, Level::A];

    #[inline]
    pub const fn index(self) -> usize {
        match self {
            Level::M => 0,
            Level::N => 1,
            Level::E => 2,
            Level::A => 3,
        }
    }

    pub const fn label(self) -> &'static str {
        match self {
            Level::M => "m",
            Level::N => "n",
            Level::E => "e",
            Level::A => "a",
        }
    }
}

/// Possibly sub-normalized pure state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct StateVector<T> {
    amplitudes: Vec<C<T>>,
}

impl<T: Real> StateVector<T> {
    pub fn new(amplitudes: Vec<C<T>>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidParameter("state vector must have at least one amplitude".into()));
        }
        let v = Self { amplitudes };
        let norm = v.norm();
        if norm > T::one() + tol(NORM_TOL) {
            return Err(Error::Unphysical(format!("state norm {norm} exceeds 1")));
        }
        Ok(v)
    }

    /// Skips the norm check; used for integrator output and frame vectors.
    pub(crate) fn from_raw(amplitudes: Vec<C<T>>) -> Self {
        Self { amplitudes }
    }

    /// Unit vector along basis index `i`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut amplitudes = vec![C::zero(); dim];
        amplitudes[i] = C::new(T::one(), T::zero());
        Self { amplitudes }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { amplitudes: vec![C::zero(); dim] }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> C<T> {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn projector(&self) -> ComplexMatrix<T> {
        ComplexMatrix::projector(&self.amplitudes)
    }
}

/// Four-level density operator plus the population parked in spectator
/// levels that the fields never touch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct DensityMatrix<T> {
    rho: ComplexMatrix<T>,
    spectator_weight: T,
}

/// Diagnostic numbers for the physicality invariants of a density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physicality<T> {
    pub hermitian_defect: T,
    pub min_eigenvalue: T,
    pub trace: T,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates Hermiticity, positivity and the trace bound.
    pub fn new(rho: ComplexMatrix<T>, spectator_weight: T) -> Result<Self> {
        if rho.dim() != DIM {
            return Err(Error::DimensionMismatch { expected: DIM, found: rho.dim() });
        }
        if !(spectator_weight >= T::zero() && spectator_weight <= T::one()) {
            return Err(Error::Unphysical(format!("spectator weight {spectator_weight} outside [0, 1]")));
        }
        let defect = rho.hermitian_defect();
        if defect > tol(HERMITIAN_TOL) {
            return Err(Error::NotHermitian { defect: defect.as_f64() });
        }
        let min_ev = rho.min_eigenvalue()?;
        if min_ev < -tol::<T>(EIGEN_TOL) {
            return Err(Error::Unphysical(format!("negative eigenvalue {min_ev:e}")));
        }
        let trace = rho.trace().re;
        if trace + spectator_weight > T::one() + tol(TRACE_TOL) {
            return Err(Error::Unphysical(format!("trace {trace} plus spectator weight {spectator_weight} exceeds 1")));
        }
        Ok(Self { rho, spectator_weight })
    }

    /// Wraps integrator output; invariants are checked by the caller.
    pub(crate) fn from_raw(rho: ComplexMatrix<T>, spectator_weight: T) -> Self {
        debug_assert_eq!(rho.dim(), DIM);
        Self { rho, spectator_weight }
    }

    /// Embeds a 2×2 block on (|m⟩, |n⟩); the excited and auxiliary levels
    /// start empty.
    pub fn from_block(block: &ComplexMatrix<T>, spectator_weight: T) -> Result<Self> {
        if block.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: block.dim() });
        }
        let rho = ComplexMatrix::from_fn(DIM, |i, j| if i < 2 && j < 2 { block[(i, j)] } else { C::zero() });
        Self::new(rho, spectator_weight)
    }

    /// Block from its independent real parameters.
    pub fn from_elements(rho_mm: T, rho_nn: T, rho_mn: C<T>, spectator_weight: T) -> Result<Self> {
        let block =
            ComplexMatrix::new(2, vec![C::new(rho_mm, T::zero()), rho_mn, rho_mn.conj(), C::new(rho_nn, T::zero())])?;
        Self::from_block(&block, spectator_weight)
    }

    /// |ψ⟩⟨ψ| for a four-level state vector of norm ≤ 1; the missing norm
    /// goes to the spectator weight.
    pub fn from_pure(psi: &StateVector<T>) -> Result<Self> {
        if psi.dim() != DIM {
            return Err(Error::DimensionMismatch { expected: DIM, found: psi.dim() });
        }
        let spectator = (T::one() - psi.norm_sqr()).max(T::zero());
        Self::new(psi.projector(), spectator)
    }

    /// All population in one level.
    pub fn basis_state(level: Level) -> Self {
        Self { rho: StateVector::basis(DIM, level.index()).projector(), spectator_weight: T::zero() }
    }

    #[inline]
    pub fn rho(&self) -> &ComplexMatrix<T> {
        &self.rho
    }

    #[inline]
    pub fn spectator_weight(&self) -> T {
        self.spectator_weight
    }

    #[inline]
    pub fn element(&self, row: Level, col: Level) -> C<T> {
        self.rho[(row.index(), col.index())]
    }

    pub fn population(&self, level: Level) -> T {
        self.element(level, level).re
    }

    pub fn trace(&self) -> T {
        self.rho.trace().re
    }

    pub fn purity(&self) -> T {
        (&self.rho * &self.rho).trace().re
    }

    /// ⟨ψ|ρ|ψ⟩.
    pub fn overlap(&self, psi: &StateVector<T>) -> T {
        self.rho.sandwich(psi.amplitudes(), psi.amplitudes()).re
    }

    /// Tr(ρ · op).
    pub fn expectation(&self, op: &ComplexMatrix<T>) -> Result<C<T>> {
        if op.dim() != DIM {
            return Err(Error::DimensionMismatch { expected: DIM, found: op.dim() });
        }
        Ok((&self.rho * op).trace())
    }

    /// The addressed block (ρ_mm, ρ_nn, ρ_mn).
    pub fn block_elements(&self) -> (T, T, C<T>) {
        (self.population(Level::M), self.population(Level::N), self.element(Level::M, Level::N))
    }

    /// Largest entry outside the {m, n} block.
    pub fn weight_outside_block(&self) -> T {
        let mut worst = T::zero();
        for i in 0..DIM {
            for j in 0..DIM {
                if i >= 2 || j >= 2 {
                    worst = worst.max(self.rho[(i, j)].norm());
                }
            }
        }
        worst
    }

    pub fn physicality(&self) -> Result<Physicality<T>> {
        Ok(Physicality {
            hermitian_defect: self.rho.hermitian_defect(),
            min_eigenvalue: self.rho.min_eigenvalue()?,
            trace: self.trace(),
        })
    }
}

/// Tr(ρ · op).
pub fn expectation<T: Real>(rho: &DensityMatrix<T>, op: &ComplexMatrix<T>) -> Result<C<T>> {
    rho.expectation(op)
}
