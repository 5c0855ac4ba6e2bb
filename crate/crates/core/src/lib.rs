//! Local density-matrix measurement of a two-state ground manifold by
//! stimulated Raman adiabatic passage into an auxiliary level.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar for the common cases.

pub mod analytic;
pub mod dynamics;
pub mod error;
pub mod matrix;
pub mod pulses;
pub mod quad;
pub mod random;
pub mod scalar;
pub mod state;
pub mod tomography;

pub use analytic::{
    adiabatic_frame, adiabatic_propagator, attenuation_factor, cd_basis, effective_hamiltonian_adiabatic,
    final_state_map, pa_with_decay, predicted_pa, propagate_statevector_adiabatic, AdiabaticFrame, CDBasis,
};
pub use dynamics::{
    hamiltonian_bare, lindblad_rhs, propagate, propagate_oracle, propagate_with, DecayConfig, PropagateOptions,
    Trajectory,
};
pub use error::{Error, Result};
pub use matrix::{hermitian_defect, min_eigenvalue, ComplexMatrix};
pub use pulses::{
    envelope_pump, envelope_stokes, mixing_angles, pump_components, AngleSample, PulseConfig, WidthConvention,
};
pub use scalar::{Real, C};
pub use state::{expectation, DensityMatrix, Level, StateVector};
pub use tomography::{
    four_step_settings, observable_v, reconstruct, run_measurement, run_protocol, BlockEstimate, MeasurementRecord,
    MeasurementReport, ProtocolSetting, SignalMode,
};

pub type ComplexMatrixF64 = ComplexMatrix<f64>;
pub type ComplexMatrixF32 = ComplexMatrix<f32>;
pub type DensityMatrixF64 = DensityMatrix<f64>;
pub type DensityMatrixF32 = DensityMatrix<f32>;
pub type StateVectorF64 = StateVector<f64>;
pub type StateVectorF32 = StateVector<f32>;
pub type PulseConfigF64 = PulseConfig<f64>;
pub type PulseConfigF32 = PulseConfig<f32>;
pub type DecayConfigF64 = DecayConfig<f64>;
pub type DecayConfigF32 = DecayConfig<f32>;
pub type TrajectoryF64 = Trajectory<f64>;
pub type TrajectoryF32 = Trajectory<f32>;
pub type BlockEstimateF64 = BlockEstimate<f64>;
pub type MeasurementRecordF64 = MeasurementRecord<f64>;
pub type ProtocolSettingF64 = ProtocolSetting<f64>;
