//! Adiabatic-frame description of the pump/Stokes process.
//!
//! Rotating the ground pair into the coupled and decoupled states
//! |C⟩ = cos α|m⟩ + sin α e^{iβ}|n⟩ and |D⟩ = −sin α|m⟩ + cos α e^{iβ}|n⟩
//! leaves |D⟩ untouched and a three-level ladder C–e–a. Three-level vectors
//! in this module use the coordinates (C, e, a).

mod basis;
mod decay;
mod frame;
mod propagator;

pub use basis::{cd_basis, CDBasis};
pub use decay::{
    attenuation_factor, attenuation_integrand, effective_hamiltonian_adiabatic, pa_with_decay,
    propagate_statevector_adiabatic,
};
pub use frame::{adiabatic_frame, hamiltonian_cea, rotation_matrix, AdiabaticFrame};
pub use propagator::{adiabatic_propagator, final_state_map, predicted_pa, LEAK_TOL};
