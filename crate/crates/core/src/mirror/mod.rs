//! Two-sided semi-transparent mirror.
//!
//! The coupling `H_int = ħ Σ_λ ∫∫ dx dx' Ω_{xx'} [A_{+1,λ}(x) A†_{-1,λ}(x') + h.c.]`
//! converts right movers into left movers (and back) only where `Ω` is
//! nonzero. Two engines are provided:
//!
//! - [`apply_scattering`]: the closed-form scattering operator, a 2×2 unitary
//!   per wavenumber and circular polarisation built from [`xi_spectrum`].
//! - [`evolve_mirror`]: RK4 integration of the interaction-picture amplitude
//!   equations, plus the exact rotation [`evolve_mirror_separable`] for
//!   kernels of the form `Ω(x) δ(x + x')`.

mod dynamics;
mod kernel;
mod scattering;

pub use dynamics::{
    evolve_mirror, evolve_mirror_separable, required_steps, scattering_equivalence_check,
    xi_profile, EquivalenceReport,
};
pub use kernel::{DenseKernel, MirrorKernel, SeparableKernel};
pub use scattering::{
    apply_positive_only_effective, apply_scattering, circular_basis, energy_weighted_norm_sqr,
    scattering_unitary, xi_spectrum, ScatteringSpectrum,
};
