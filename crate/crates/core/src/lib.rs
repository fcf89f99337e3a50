//! Quantised 1D electromagnetic field in position space, keeping both signs
//! of frequency, plus two-sided partially reflecting mirrors that act only
//! where they sit.
//!
//! The crate is organised bottom-up:
//!
//! - [`grid`]: centred position/wavenumber lattices and units.
//! - [`transforms`]: the kernel `f(k)` and the generalised Fourier transform.
//! - [`field`]: amplitude fields, wave-packet constructors, polarisation bases.
//! - [`propagation`]: exact free evolution.
//! - [`observables`]: E/B profiles, normal-ordered energy, Maxwell residuals.
//! - [`mirror`]: mirror kernels, the scattering spectrum `Ξ_k`, the closed-form
//!   scattering operator and time-resolved interaction-picture dynamics.
//! - [`io`]: NDJSON/binary/CSV formats.
//! - [`scenario`]: TOML scenario files and the schedule runner used by the
//!   `locmirror` binary.
//!
//! Runnable walkthroughs live in `crates/core/examples/`.

pub mod field;
pub mod grid;
pub mod io;
pub mod mirror;
pub mod observables;
pub mod propagation;
pub mod scenario;
pub mod transforms;

pub use field::{
    band_flat_packet, gaussian_packet, kernel_compensated_packet, to_circular, to_linear,
    AmplitudeField, Channel, Direction, Interpretation, Placement, Polarization, PolarizationBasis,
    Representation,
};
pub use grid::{make_grid, natural_units, Grid, UnitSystem};
pub use mirror::{
    apply_positive_only_effective, apply_scattering, evolve_mirror, evolve_mirror_separable,
    scattering_equivalence_check, xi_spectrum, EquivalenceReport, MirrorKernel, ScatteringSpectrum,
};
pub use observables::{
    energy_by_direction, energy_density, energy_total, field_profiles, maxwell_residual,
    FieldProfiles, MaxwellReport,
};
pub use propagation::{evolve_free, shift_position};
pub use transforms::{overlap_kernel, to_momentum, to_position, KernelKind, KernelSpec};

pub use num_complex::Complex64;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid units: {0}")]
    InvalidUnits(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("expected {expected} representation, found {found}")]
    RepresentationMismatch { expected: String, found: String },
    #[error("the positive-only kernel has no inverse transform (f(k) = 0 for k <= 0)")]
    NonInvertibleKernel,
    #[error(
        "{0}; convert the field to the position representation with the sqrt(|k|) kernel first"
    )]
    WrongKernel(String),
    #[error("field expectation values are undefined for {0}")]
    ExpectationUndefined(String),
    #[error("packet violates band/resolution limits: {0}")]
    PacketOutOfBand(String),
    #[error("fields or kernels live on different grids")]
    GridMismatch,
    #[error("shift of {0} cells is not a whole number")]
    NonIntegerShift(f64),
    #[error("non-finite values in {0}")]
    NonFinite(String),
    #[error("invalid mirror kernel: {0}")]
    InvalidKernel(String),
    #[error("too few steps: {given} given, at least {required} required")]
    StepCountTooSmall { required: usize, given: usize },
    #[error("packet touches the mirror support at {0}")]
    PacketTouchesMirror(String),
    #[error("scenario error{}: {message}", .line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Scenario {
        line: Option<usize>,
        message: String,
    },
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
