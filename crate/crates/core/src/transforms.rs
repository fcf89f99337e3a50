//! Generalised Fourier transform between momentum amplitudes `α_s(k)` and
//! position amplitudes `a_s(x)`:
//!
//! ```text
//! a_s(x_j) = Σ_m f(k_m) e^{i s k_m x_j} α_s(k_m) dk
//! α_s(k_m) = (1 / 2π f(k_m)) Σ_j e^{-i s k_m x_j} a_s(x_j) dx
//! ```
//!
//! Both directions run through an FFT. The direction index `s` enters the
//! exponent, so left movers use the opposite FFT direction from right movers.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::field::{AmplitudeField, Direction, Representation};
use crate::grid::Grid;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    /// `f(k) = e^{i sgn(k) φ} / sqrt(2π)`: truly-local bosonic operators.
    Flat,
    /// `f(k) = sqrt(|k| / 2π) e^{i sgn(k) φ}`: highly-localised excitations.
    SqrtAbsK,
    /// Textbook positive-frequency description: `φ = π/2`, `f(k ≤ 0) = 0`.
    StandardPositiveOnly,
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelKind::Flat => "flat",
            KernelKind::SqrtAbsK => "sqrt_abs_k",
            KernelKind::StandardPositiveOnly => "positive_only",
        })
    }
}

/// Choice of `f(k)` defining a position representation.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KernelSpec {
    kind: KernelKind,
    phase: f64,
}

impl KernelSpec {
    /// `phase` is reduced into `[0, 2π)`. It is ignored (forced to `π/2`)
    /// for [`KernelKind::StandardPositiveOnly`].
    pub fn new(kind: KernelKind, phase: f64) -> Result<Self> {
        if !phase.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "kernel phase must be finite, got {phase}"
            )));
        }
        let phase = match kind {
            KernelKind::StandardPositiveOnly => PI / 2.0,
            _ => phase.rem_euclid(2.0 * PI),
        };
        Ok(Self { kind, phase })
    }

    pub fn flat() -> Self {
        Self {
            kind: KernelKind::Flat,
            phase: 0.0,
        }
    }

    pub fn sqrt_abs_k() -> Self {
        Self {
            kind: KernelKind::SqrtAbsK,
            phase: 0.0,
        }
    }

    pub fn positive_only() -> Self {
        Self {
            kind: KernelKind::StandardPositiveOnly,
            phase: PI / 2.0,
        }
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn is_invertible(&self) -> bool {
        self.kind != KernelKind::StandardPositiveOnly
    }

    /// Kernel value at wavenumber `k`.
    pub fn eval(&self, k: f64) -> Complex64 {
        let sgn = signum0(k);
        match self.kind {
            KernelKind::Flat => Complex64::from_polar(1.0 / (2.0 * PI).sqrt(), sgn * self.phase),
            KernelKind::SqrtAbsK => {
                Complex64::from_polar((k.abs() / (2.0 * PI)).sqrt(), sgn * self.phase)
            }
            KernelKind::StandardPositiveOnly => {
                if k > 0.0 {
                    Complex64::from_polar((k / (2.0 * PI)).sqrt(), self.phase)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
        }
    }

    /// Kernel sampled on every lattice wavenumber.
    pub fn sample(&self, grid: &Grid) -> Vec<Complex64> {
        grid.k_values().iter().map(|&k| self.eval(k)).collect()
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} phase={}", self.kind, self.phase)
    }
}

/// Sign function with `sgn(0) = 0`.
pub fn signum0(k: f64) -> f64 {
    if k > 0.0 {
        1.0
    } else if k < 0.0 {
        -1.0
    } else {
        0.0
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Computes `Σ_m v_m e^{i s k_m x_j}` for all `j`, in place.
///
/// With the centred lattice `k_m x_j = 2π mj/n - π(m + j) + πn/2`, so the sum
/// reduces to a plain DFT wrapped in `(-1)^m` / `(-1)^{j + n/2}` modulations.
pub(crate) fn lattice_exp_sum(values: &mut [Complex64], sign: f64) {
    let n = values.len();
    let direction = if sign > 0.0 {
        FftDirection::Inverse
    } else {
        FftDirection::Forward
    };
    for (m, v) in values.iter_mut().enumerate() {
        if m % 2 == 1 {
            *v = -*v;
        }
    }
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft(n, direction));
    fft.process(values);
    let half_parity = (n / 2) % 2;
    for (j, v) in values.iter_mut().enumerate() {
        if (j + half_parity) % 2 == 1 {
            *v = -*v;
        }
    }
}

/// Position amplitudes of a single channel.
pub fn channel_to_position(
    grid: &Grid,
    kernel: &KernelSpec,
    direction: Direction,
    alpha: &[Complex64],
) -> Vec<Complex64> {
    let dk = grid.dk();
    let mut work: Vec<Complex64> = alpha
        .iter()
        .zip(grid.k_values())
        .map(|(a, &k)| kernel.eval(k) * a * dk)
        .collect();
    lattice_exp_sum(&mut work, direction.sign());
    work
}

/// Momentum amplitudes of a single channel. Modes where `f(k) = 0` are set to 0.
pub fn channel_to_momentum(
    grid: &Grid,
    kernel: &KernelSpec,
    direction: Direction,
    a: &[Complex64],
) -> Result<Vec<Complex64>> {
    if !kernel.is_invertible() {
        return Err(Error::NonInvertibleKernel);
    }
    let mut work = a.to_vec();
    lattice_exp_sum(&mut work, -direction.sign());
    let scale = grid.dx() / (2.0 * PI);
    for (v, &k) in work.iter_mut().zip(grid.k_values()) {
        let f = kernel.eval(k);
        *v = if f.norm() == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            *v * scale / f
        };
    }
    Ok(work)
}

/// Momentum → position representation with the given kernel.
pub fn to_position(field: &AmplitudeField, kernel: &KernelSpec) -> Result<AmplitudeField> {
    if field.representation() != Representation::Momentum {
        return Err(Error::RepresentationMismatch {
            expected: "momentum".into(),
            found: field.representation().to_string(),
        });
    }
    let grid = field.grid();
    let mut out = field.with_representation(Representation::Position(*kernel));
    for (slot, dir) in AmplitudeField::slot_directions() {
        let data = channel_to_position(grid, kernel, dir, field.slot(slot));
        out.slot_mut(slot).copy_from_slice(&data);
    }
    Ok(out)
}

/// Position → momentum representation, inverting the recorded kernel.
pub fn to_momentum(field: &AmplitudeField) -> Result<AmplitudeField> {
    let kernel = match field.representation() {
        Representation::Position(k) => k,
        Representation::Momentum => {
            return Err(Error::RepresentationMismatch {
                expected: "position".into(),
                found: "momentum".into(),
            })
        }
    };
    let grid = field.grid();
    let mut out = field.with_representation(Representation::Momentum);
    for (slot, dir) in AmplitudeField::slot_directions() {
        let data = channel_to_momentum(grid, &kernel, dir, field.slot(slot))?;
        out.slot_mut(slot).copy_from_slice(&data);
    }
    Ok(out)
}

/// Re-expresses a position field in another kernel's representation.
pub fn change_kernel(field: &AmplitudeField, kernel: &KernelSpec) -> Result<AmplitudeField> {
    match field.representation() {
        Representation::Position(current) if current == *kernel => Ok(field.clone()),
        Representation::Position(_) => to_position(&to_momentum(field)?, kernel),
        Representation::Momentum => to_position(field, kernel),
    }
}

fn overlap_sum(grid: &Grid, kernel: &KernelSpec, sign: f64, delta: f64) -> Complex64 {
    grid.k_values()
        .iter()
        .map(|&k| Complex64::from_polar(kernel.eval(k).norm_sqr(), sign * k * delta))
        .sum::<Complex64>()
        * grid.dk()
}

/// `Σ_m |f(k_m)|² e^{i s k_m Δ} dk`: the overlap of two single-excitation
/// states whose positions differ by `separation = x - x'`.
///
/// For the flat kernel this is the lattice delta (`1/dx` at zero separation,
/// zero at every other lattice separation).
pub fn overlap_kernel(
    grid: &Grid,
    kernel: &KernelSpec,
    direction: Direction,
    separation: f64,
) -> Complex64 {
    overlap_sum(grid, kernel, direction.sign(), separation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Interpretation, PolarizationBasis};
    use crate::grid::make_grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn direct_sum(grid: &Grid, values: &[Complex64], sign: f64) -> Vec<Complex64> {
        (0..grid.n_points())
            .map(|j| {
                values
                    .iter()
                    .zip(grid.k_values())
                    .map(|(v, &k)| v * Complex64::from_polar(1.0, sign * k * grid.x(j)))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn lattice_sum_matches_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [4usize, 6, 8, 12, 64] {
            let grid = make_grid(n, 0.37).unwrap();
            let values: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            for sign in [1.0, -1.0] {
                let expected = direct_sum(&grid, &values, sign);
                let mut got = values.clone();
                lattice_exp_sum(&mut got, sign);
                for (a, b) in got.iter().zip(&expected) {
                    assert!((a - b).norm() < 1e-12, "n={n} sign={sign}");
                }
            }
        }
    }

    #[test]
    fn kernel_values() {
        let flat = KernelSpec::new(KernelKind::Flat, 0.3).unwrap();
        assert!((flat.eval(0.0) - Complex64::new(1.0 / (2.0 * PI).sqrt(), 0.0)).norm() < 1e-15);
        assert!((flat.eval(2.0).arg() - 0.3).abs() < 1e-15);
        assert!((flat.eval(-2.0).arg() + 0.3).abs() < 1e-15);
        assert_eq!(KernelSpec::sqrt_abs_k().eval(0.0).norm(), 0.0);
        let pos = KernelSpec::new(KernelKind::StandardPositiveOnly, 0.0).unwrap();
        assert_eq!(pos.phase(), PI / 2.0);
        assert_eq!(pos.eval(-1.0).norm(), 0.0);
        assert_eq!(pos.eval(0.0).norm(), 0.0);
        assert!((pos.eval(1.0) - Complex64::new(0.0, (1.0 / (2.0 * PI)).sqrt())).norm() < 1e-15);
        let wrapped = KernelSpec::new(KernelKind::Flat, 2.0 * PI + 0.5).unwrap();
        assert!((wrapped.phase() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_mode_is_plane_wave() {
        let grid = make_grid(32, 0.5).unwrap();
        let m0 = 20;
        for dir in [Direction::Right, Direction::Left] {
            let mut alpha = vec![Complex64::new(0.0, 0.0); 32];
            alpha[m0] = Complex64::new(1.0, 0.0);
            let kernel = KernelSpec::sqrt_abs_k();
            let a = channel_to_position(&grid, &kernel, dir, &alpha);
            let k0 = grid.k(m0);
            for (j, v) in a.iter().enumerate() {
                let expected = Complex64::from_polar(1.0, dir.sign() * k0 * grid.x(j))
                    * kernel.eval(k0)
                    * grid.dk();
                assert!((v - expected).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn flat_unit_spectrum_is_lattice_delta() {
        let grid = make_grid(64, 1.0).unwrap();
        let alpha = vec![Complex64::new(1.0, 0.0); 64];
        let a = channel_to_position(&grid, &KernelSpec::flat(), Direction::Right, &alpha);
        let peak = grid.dk() * 64.0 / (2.0 * PI).sqrt();
        for (j, v) in a.iter().enumerate() {
            let expected = if j == grid.origin_index() { peak } else { 0.0 };
            assert!((v - Complex64::new(expected, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn positive_only_cannot_be_inverted() {
        let grid = make_grid(16, 1.0).unwrap();
        let field = AmplitudeField::zeros(
            &grid,
            Representation::Position(KernelSpec::positive_only()),
            PolarizationBasis::Linear,
            Interpretation::CoherentAmplitude,
        );
        assert!(matches!(
            to_momentum(&field),
            Err(Error::NonInvertibleKernel)
        ));
    }

    #[test]
    fn representation_mismatch_is_reported() {
        let grid = make_grid(16, 1.0).unwrap();
        let field = AmplitudeField::zeros(
            &grid,
            Representation::Momentum,
            PolarizationBasis::Linear,
            Interpretation::CoherentAmplitude,
        );
        assert!(matches!(
            to_momentum(&field),
            Err(Error::RepresentationMismatch { .. })
        ));
        let pos = to_position(&field, &KernelSpec::flat()).unwrap();
        assert!(to_position(&pos, &KernelSpec::flat()).is_err());
    }

    #[test]
    fn flat_overlap_is_lattice_delta() {
        let grid = make_grid(128, 0.25).unwrap();
        let k = KernelSpec::new(KernelKind::Flat, 1.1).unwrap();
        let at_zero = overlap_kernel(&grid, &k, Direction::Right, 0.0);
        assert!((at_zero.re - 1.0 / grid.dx()).abs() < 1e-10);
        assert!(at_zero.im.abs() < 1e-12);
        for m in [1i32, 2, 5, -3, 63] {
            let v = overlap_kernel(&grid, &k, Direction::Left, m as f64 * grid.dx());
            assert!(v.norm() < 1e-12, "m={m}: {v}");
        }
    }
}
