//! Four-step measurement of a ground-block density matrix.
//!
//! Each setting (α, β) transfers the population of |C(α, β)⟩ into |a⟩, so
//! the measured population is P = ⟨C|ρ|C⟩, which is linear in the block
//! elements:
//!
//! ```text
//! P = cos²α ρ_mm + sin²α ρ_nn + sin 2α cos β Re ρ_mn − sin 2α sin β Im ρ_mn
//! ```

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{attenuation_factor, cd_basis, LEAK_TOL};
use crate::dynamics::{propagate_with, DecayConfig, PropagateOptions};
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::pulses::PulseConfig;
use crate::scalar::{c, Real, C};
use crate::state::{DensityMatrix, Level};

/// Version of the JSON layout written by [`MeasurementReport::to_json`].
pub const SCHEMA_VERSION: u32 = 1;

/// Smallest calibration factor a signal is divided by.
pub const MIN_CALIBRATION: f64 = 1e-6;

/// Slack on |ρ_mn|² ≤ ρ_mm ρ_nn before an estimate is flagged.
pub const CAUCHY_SCHWARZ_TOL: f64 = 1e-6;

const NAMES: [&str; 4] = ["rho_mm", "rho_nn", "re_rho_mn", "im_rho_mn"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalMode {
    /// Population left in |a⟩ at the end of the window.
    #[default]
    FinalPopulation,
    /// Fluorescence ∫Γ_a ρ_aa dt collected over the window.
    IntegratedFluorescence,
}

impl SignalMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "final" | "final_population" => Some(SignalMode::FinalPopulation),
            "fluorescence" | "integrated_fluorescence" => Some(SignalMode::IntegratedFluorescence),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSetting<T> {
    pub alpha: T,
    pub beta: T,
    pub signal_mode: SignalMode,
}

impl<T: Real> ProtocolSetting<T> {
    pub fn new(alpha: T, beta: T, signal_mode: SignalMode) -> Result<Self> {
        let slack = T::lit(1e-12);
        if !(alpha >= -slack && alpha <= T::FRAC_PI_2() + slack) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("setting (α, β) = ({alpha}, {beta}) out of range")));
        }
        Ok(Self { alpha, beta, signal_mode })
    }

    /// Row of the linear model for this setting.
    pub fn design_row(&self) -> [T; 4] {
        let (sa, ca) = self.alpha.sin_cos();
        let s2 = (self.alpha + self.alpha).sin();
        let (sb, cb) = self.beta.sin_cos();
        [ca * ca, sa * sa, s2 * cb, -s2 * sb]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord<T> {
    pub setting: ProtocolSetting<T>,
    pub raw_signal: T,
    /// Signal divided by the calibration factor and clamped to [0, 1].
    pub calibrated_pa: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockEstimate<T> {
    pub rho_mm: T,
    pub rho_nn: T,
    pub rho_mn: C<T>,
    /// Root-mean-square misfit of the records.
    pub residual: T,
    pub settings_used: usize,
    /// max(0, |ρ_mn|² − ρ_mm ρ_nn).
    pub cauchy_schwarz_violation: T,
}

/// V = |C⟩⟨C| on the four-level space.
pub fn observable_v<T: Real>(alpha: T, beta: T) -> ComplexMatrix<T> {
    ComplexMatrix::projector(cd_basis(alpha, beta).c_state.amplitudes())
}

/// (0, 0), (π/2, 0), (π/4, 0), (π/4, −π/2).
pub fn four_step_settings<T: Real>(signal_mode: SignalMode) -> Vec<ProtocolSetting<T>> {
    let q = T::FRAC_PI_4();
    [(T::zero(), T::zero()), (T::FRAC_PI_2(), T::zero()), (q, T::zero()), (q, -T::FRAC_PI_2())]
        .into_iter()
        .map(|(alpha, beta)| ProtocolSetting { alpha, beta, signal_mode })
        .collect()
}

/// Factor relating the raw signal to P_a.
///
/// Loss from |a⟩ during the window leaves attenuation(Γ_a/2)·P_a in the
/// level and sends the rest out as fluorescence.
pub fn calibration_factor<T: Real>(mode: SignalMode, cfg: &PulseConfig<T>, decay: &DecayConfig<T>) -> Result<T> {
    let factor = match mode {
        SignalMode::FinalPopulation if decay.gamma_a == T::zero() => T::one(),
        SignalMode::FinalPopulation => attenuation_factor(cfg, decay.amplitude_rate_a())?,
        SignalMode::IntegratedFluorescence => T::one() - attenuation_factor(cfg, decay.amplitude_rate_a())?,
    };
    if factor < T::lit(MIN_CALIBRATION) {
        return Err(Error::UnrecoverableAttenuation { factor: factor.as_f64() });
    }
    Ok(factor)
}

/// Simulates one setting on `rho` and reads out the calibrated population.
pub fn run_measurement<T: Real>(
    rho: &DensityMatrix<T>,
    setting: &ProtocolSetting<T>,
    cfg: &PulseConfig<T>,
    decay: &DecayConfig<T>,
    opts: &PropagateOptions<T>,
) -> Result<MeasurementRecord<T>> {
    let setting = ProtocolSetting::new(setting.alpha, setting.beta, setting.signal_mode)?;
    let leak = rho.weight_outside_block();
    if leak > T::lit(LEAK_TOL) {
        return Err(Error::OutsideBlock { leak: leak.as_f64() });
    }
    let cfg = cfg.with_angles(setting.alpha, setting.beta);
    let factor = calibration_factor(setting.signal_mode, &cfg, decay)?;
    let (t0, t1) = cfg.window();
    let traj = propagate_with(rho, &cfg, decay, t0, t1, opts)?;
    let raw = match setting.signal_mode {
        SignalMode::FinalPopulation => traj.final_state().population(Level::A),
        SignalMode::IntegratedFluorescence => traj.signal_integral(),
    }
    .max(T::zero());
    let calibrated_pa = (raw / factor).min(T::one());
    Ok(MeasurementRecord { setting, raw_signal: raw, calibrated_pa })
}

/// Runs every setting in parallel; records come back in setting order.
pub fn run_protocol<T: Real>(
    rho: &DensityMatrix<T>,
    settings: &[ProtocolSetting<T>],
    cfg: &PulseConfig<T>,
    decay: &DecayConfig<T>,
    opts: &PropagateOptions<T>,
) -> Result<Vec<MeasurementRecord<T>>> {
    settings.par_iter().map(|s| run_measurement(rho, s, cfg, decay, opts)).collect()
}

/// Least-squares solution of the linear model over all records.
pub fn reconstruct<T: Real>(records: &[MeasurementRecord<T>]) -> Result<BlockEstimate<T>> {
    if records.len() < 4 {
        return Err(Error::TooFewRecords { needed: 4, found: records.len() });
    }
    let mut g = [[T::zero(); 4]; 4];
    let mut b = [T::zero(); 4];
    for r in records {
        let row = r.setting.design_row();
        for i in 0..4 {
            b[i] += row[i] * r.calibrated_pa;
            for j in 0..4 {
                g[i][j] += row[i] * row[j];
            }
        }
    }
    let x = solve_spd(g, b)?;
    let misfit: T = records
        .iter()
        .map(|r| {
            let row = r.setting.design_row();
            let p: T = (0..4).map(|i| row[i] * x[i]).sum();
            (p - r.calibrated_pa).powi(2)
        })
        .sum();
    let residual = (misfit / T::lit(records.len() as f64)).sqrt();
    Ok(BlockEstimate::from_parts(x[0], x[1], c(x[2], x[3]), residual, records.len()))
}

/// Gaussian elimination with full pivoting. A vanishing pivot means the
/// settings leave a direction of the block unconstrained.
fn solve_spd<T: Real>(mut g: [[T; 4]; 4], mut b: [T; 4]) -> Result<[T; 4]> {
    let scale = (0..4).map(|i| g[i][i]).fold(T::zero(), T::max);
    let eps = T::lit(1e-10) * scale.max(T::min_positive_value());
    let mut perm = [0, 1, 2, 3];
    for k in 0..4 {
        let (mut pi, mut pj) = (k, k);
        for i in k..4 {
            for j in k..4 {
                if g[i][j].abs() > g[pi][pj].abs() {
                    (pi, pj) = (i, j);
                }
            }
        }
        if g[pi][pj].abs() <= eps {
            return Err(Error::Unidentifiable { direction: null_direction(&g, &perm, k) });
        }
        g.swap(k, pi);
        b.swap(k, pi);
        for row in g.iter_mut() {
            row.swap(k, pj);
        }
        perm.swap(k, pj);
        for i in k + 1..4 {
            let f = g[i][k] / g[k][k];
            for j in k..4 {
                g[i][j] -= f * g[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut y = [T::zero(); 4];
    for k in (0..4).rev() {
        let s: T = (k + 1..4).map(|j| g[k][j] * y[j]).sum();
        y[k] = (b[k] - s) / g[k][k];
    }
    let mut x = [T::zero(); 4];
    for k in 0..4 {
        x[perm[k]] = y[k];
    }
    Ok(x)
}

/// Null vector of the partially reduced system, printed as a combination
/// of the unknowns.
fn null_direction<T: Real>(g: &[[T; 4]; 4], perm: &[usize; 4], rank: usize) -> String {
    let mut y = [T::zero(); 4];
    y[rank] = T::one();
    for k in (0..rank).rev() {
        let s: T = (k + 1..4).map(|j| g[k][j] * y[j]).sum();
        y[k] = -s / g[k][k];
    }
    let mut v = [T::zero(); 4];
    for k in 0..4 {
        v[perm[k]] = y[k];
    }
    let norm = v.iter().map(|&z| z * z).sum::<T>().sqrt();
    let terms: Vec<String> = v
        .iter()
        .zip(NAMES)
        .filter(|(z, _)| (**z / norm).abs() > T::lit(1e-6))
        .map(|(&z, name)| format!("{:+.3} {name}", (z / norm).as_f64()))
        .collect();
    terms.join(" ")
}

impl<T: Real> BlockEstimate<T> {
    fn from_parts(rho_mm: T, rho_nn: T, rho_mn: C<T>, residual: T, settings_used: usize) -> Self {
        let excess = rho_mn.norm_sqr() - rho_mm * rho_nn;
        Self { rho_mm, rho_nn, rho_mn, residual, settings_used, cauchy_schwarz_violation: excess.max(T::zero()) }
    }

    pub fn is_physical(&self) -> bool {
        let slack = T::lit(CAUCHY_SCHWARZ_TOL);
        self.cauchy_schwarz_violation <= slack && self.rho_mm >= -slack && self.rho_nn >= -slack
    }

    /// Nearest positive semidefinite block with trace at most one, found by
    /// clipping negative eigenvalues.
    pub fn project_physical(&self) -> Self {
        let half = T::lit(0.5);
        let mid = half * (self.rho_mm + self.rho_nn);
        let d = half * (self.rho_mm - self.rho_nn);
        let r = d.hypot(self.rho_mn.norm());
        let (lo, hi) = (mid - r, mid + r);
        if lo >= T::zero() && hi + lo <= T::one() {
            return Self { cauchy_schwarz_violation: T::zero(), ..*self };
        }
        let mut l = [lo.max(T::zero()), hi.max(T::zero())];
        let trace = l[0] + l[1];
        if trace > T::one() {
            l = [l[0] / trace, l[1] / trace];
        }
        // Eigenvector of the upper eigenvalue: (d + r, ρ_nm) up to norm.
        let (mm, nn, mn) = if r == T::zero() {
            (l[1], l[1], C::zero())
        } else {
            let u = [c(d + r, T::zero()), self.rho_mn.conj()];
            let n2 = u[0].norm_sqr() + u[1].norm_sqr();
            let p = |i: usize, j: usize| u[i] * u[j].conj() / n2;
            let q = |i: usize, j: usize| (if i == j { c(T::one(), T::zero()) } else { C::zero() }) - p(i, j);
            let at = |i: usize, j: usize| p(i, j) * l[1] + q(i, j) * l[0];
            (at(0, 0).re, at(1, 1).re, at(0, 1))
        };
        Self::from_parts(mm, nn, mn, self.residual, self.settings_used)
    }

    pub fn to_density_matrix(&self, spectator_weight: T) -> Result<DensityMatrix<T>> {
        DensityMatrix::from_elements(self.rho_mm, self.rho_nn, self.rho_mn, spectator_weight)
    }

    /// Largest absolute error over the four real unknowns.
    pub fn max_error(&self, truth: &DensityMatrix<T>) -> T {
        let (mm, nn, mn) = truth.block_elements();
        [
            (self.rho_mm - mm).abs(),
            (self.rho_nn - nn).abs(),
            (self.rho_mn.re - mn.re).abs(),
            (self.rho_mn.im - mn.im).abs(),
        ]
        .into_iter()
        .fold(T::zero(), T::max)
    }
}

/// Estimate minus truth, element by element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthComparison<T> {
    pub rho_mm: T,
    pub rho_nn: T,
    pub rho_mn: C<T>,
    pub delta_mm: T,
    pub delta_nn: T,
    pub delta_mn: C<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct MeasurementReport<T> {
    pub schema_version: u32,
    pub estimate: BlockEstimate<T>,
    pub records: Vec<MeasurementRecord<T>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub truth: Option<TruthComparison<T>>,
}

impl<T: Real + Serialize> MeasurementReport<T> {
    pub fn new(
        estimate: BlockEstimate<T>,
        records: Vec<MeasurementRecord<T>>,
        truth: Option<&DensityMatrix<T>>,
    ) -> Self {
        let truth = truth.map(|rho| {
            let (mm, nn, mn) = rho.block_elements();
            TruthComparison {
                rho_mm: mm,
                rho_nn: nn,
                rho_mn: mn,
                delta_mm: estimate.rho_mm - mm,
                delta_nn: estimate.rho_nn - nn,
                delta_mn: estimate.rho_mn - mn,
            }
        });
        Self { schema_version: SCHEMA_VERSION, estimate, records, truth }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields serialize")
    }
}
