//! Random ground-block states for tests and examples.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::matrix::ComplexMatrix;
use crate::scalar::{c, Real, C};
use crate::state::DensityMatrix;

fn gaussian_complex<T: Real, R: Rng + ?Sized>(rng: &mut R) -> C<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(T::lit(re), T::lit(im))
}

/// Haar-random pure state on {|m⟩, |n⟩}.
pub fn random_pure_block<T: Real, R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix<T> {
    let (a, b) = loop {
        let a: C<T> = gaussian_complex(rng);
        let b: C<T> = gaussian_complex(rng);
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if n > T::lit(1e-6) {
            break (a / n, b / n);
        }
    };
    let mm = a.norm_sqr();
    DensityMatrix::from_elements(mm, T::one() - mm, a * b.conj(), T::zero()).expect("pure block is physical")
}

/// Mixed block G G† / tr(G G†) from a 2×2 complex Ginibre matrix.
pub fn random_mixed_block<T: Real, R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix<T> {
    let g = ComplexMatrix::from_fn(2, |_, _| gaussian_complex::<T, R>(rng));
    let w = &g * &g.adjoint();
    let tr = w.trace().re;
    let mm = w[(0, 0)].re / tr;
    DensityMatrix::from_elements(mm, T::one() - mm, w[(0, 1)] / tr, T::zero()).expect("Ginibre block is physical")
}

/// Pure or mixed with equal probability.
pub fn random_block<T: Real, R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix<T> {
    if rng.random_bool(0.5) {
        random_pure_block(rng)
    } else {
        random_mixed_block(rng)
    }
}

/// (α, β) uniform on [0, π/2] × [−π, π).
pub fn random_angles<T: Real, R: Rng + ?Sized>(rng: &mut R) -> (T, T) {
    let alpha: f64 = rng.random_range(0.0..std::f64::consts::FRAC_PI_2);
    let beta: f64 = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    (T::lit(alpha), T::lit(beta))
}
