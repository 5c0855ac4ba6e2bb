//! Adaptive Dormand–Prince 5(4) stepping for complex-valued ODE systems.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// Step-size control for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl<T> {
    /// Bound on the scaled local error estimate of each accepted step
    /// (used as both the absolute and relative tolerance).
    pub tol: T,
    pub max_step: T,
    pub initial_step: T,
    /// Smallest step tried before giving up.
    pub min_step: T,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evaluations: usize,
}

// Butcher tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth- minus fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `dy/dt = rhs(t, y)` from `t0` to `t1`.
///
/// `on_step` sees every accepted step (time and state after the step) and
/// can abort the integration by returning an error. Returns the final state.
pub fn integrate<T, F, O>(
    mut rhs: F,
    y0: Vec<C<T>>,
    t0: T,
    t1: T,
    ctl: &StepControl<T>,
    mut on_step: O,
) -> Result<(Vec<C<T>>, StepStats)>
where
    T: Real,
    F: FnMut(T, &[C<T>], &mut [C<T>]),
    O: FnMut(T, &[C<T>]) -> Result<()>,
{
    if !(t1 > t0) {
        return Err(Error::InvalidParameter(format!("empty time interval [{t0}, {t1}]")));
    }
    if !(ctl.tol > T::zero()) {
        return Err(Error::InvalidParameter(format!("tolerance {} must be positive", ctl.tol)));
    }
    let n = y0.len();
    let lit = T::lit;
    let mut stats = StepStats::default();
    let mut y = y0;
    let mut t = t0;
    let mut h = ctl.initial_step.min(ctl.max_step).min(t1 - t0);

    let mut k1 = vec![C::zero(); n];
    let mut k2 = vec![C::zero(); n];
    let mut k3 = vec![C::zero(); n];
    let mut k4 = vec![C::zero(); n];
    let mut k5 = vec![C::zero(); n];
    let mut k6 = vec![C::zero(); n];
    let mut k7 = vec![C::zero(); n];
    let mut tmp = vec![C::zero(); n];
    let mut y_new = vec![C::zero(); n];

    rhs(t, &y, &mut k1);
    stats.rhs_evaluations += 1;

    while t < t1 {
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }

        for i in 0..n {
            tmp[i] = y[i] + k1[i] * (h * lit(A21));
        }
        rhs(t + h * lit(C2), &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + (k1[i] * lit(A31) + k2[i] * lit(A32)) * h;
        }
        rhs(t + h * lit(C3), &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + (k1[i] * lit(A41) + k2[i] * lit(A42) + k3[i] * lit(A43)) * h;
        }
        rhs(t + h * lit(C4), &tmp, &mut k4);
        for i in 0..n {
            tmp[i] = y[i] + (k1[i] * lit(A51) + k2[i] * lit(A52) + k3[i] * lit(A53) + k4[i] * lit(A54)) * h;
        }
        rhs(t + h * lit(C5), &tmp, &mut k5);
        for i in 0..n {
            tmp[i] = y[i]
                + (k1[i] * lit(A61) + k2[i] * lit(A62) + k3[i] * lit(A63) + k4[i] * lit(A64) + k5[i] * lit(A65)) * h;
        }
        rhs(t + h, &tmp, &mut k6);
        for i in 0..n {
            y_new[i] =
                y[i] + (k1[i] * lit(B1) + k3[i] * lit(B3) + k4[i] * lit(B4) + k5[i] * lit(B5) + k6[i] * lit(B6)) * h;
        }
        rhs(t + h, &y_new, &mut k7);
        stats.rhs_evaluations += 6;

        let mut err = T::zero();
        for i in 0..n {
            let e = (k1[i] * lit(E1)
                + k3[i] * lit(E3)
                + k4[i] * lit(E4)
                + k5[i] * lit(E5)
                + k6[i] * lit(E6)
                + k7[i] * lit(E7))
                * h;
            let scale = ctl.tol * (T::one() + y[i].norm().max(y_new[i].norm()));
            err = err.max(e.norm() / scale);
        }

        if err <= T::one() {
            t = if last { t1 } else { t + h };
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
            stats.accepted += 1;
            on_step(t, &y)?;
        } else {
            stats.rejected += 1;
        }

        let factor =
            if err == T::zero() { lit(5.0) } else { (lit(0.9) * err.powf(lit(-0.2))).max(lit(0.2)).min(lit(5.0)) };
        h = (h * factor).min(ctl.max_step);
        if t < t1 && h < ctl.min_step {
            return Err(Error::StepSizeUnderflow { t: t.as_f64(), h: h.as_f64() });
        }
    }
    Ok((y, stats))
}
