use num_traits::Zero;

use crate::matrix::ComplexMatrix;
use crate::scalar::{phase, re, Real, C};
use crate::state::{Level, StateVector, DIM};

/// Coupled and decoupled ground superpositions as four-level vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct CDBasis<T> {
    pub c_state: StateVector<T>,
    pub d_state: StateVector<T>,
}

pub fn cd_basis<T: Real>(alpha: T, beta: T) -> CDBasis<T> {
    let (s, c) = alpha.sin_cos();
    let b = phase(beta);
    let z = C::zero();
    CDBasis {
        c_state: StateVector::from_raw(vec![re(c), b * s, z, z]),
        d_state: StateVector::from_raw(vec![re(-s), b * c, z, z]),
    }
}

impl<T: Real> CDBasis<T> {
    /// Unitary with columns |C⟩, |D⟩, |e⟩, |a⟩.
    pub fn unitary(&self) -> ComplexMatrix<T> {
        let c = self.c_state.amplitudes();
        let d = self.d_state.amplitudes();
        ComplexMatrix::from_fn(DIM, |i, j| match j {
            0 => c[i],
            1 => d[i],
            _ if i == j => re(T::one()),
            _ => C::zero(),
        })
    }

    /// Four-level vector v_C|C⟩ + v_e|e⟩ + v_a|a⟩ from (C, e, a) coordinates.
    pub fn embed(&self, v: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(v.len(), 3, "expected (C, e, a) coordinates");
        let mut out: Vec<C<T>> = self.c_state.amplitudes().iter().map(|&x| x * v[0]).collect();
        out[Level::E.index()] = v[1];
        out[Level::A.index()] = v[2];
        out
    }
}
