//! Exact free-space evolution.
//!
//! Free propagation is `a_s(x, t) = a_s(x - s c t, 0)`. In momentum space the
//! direction index cancels and every channel picks up `e^{-i k c t}`, with
//! negative `k` rotating at negative frequency. The lattice is periodic.

use num_complex::Complex64;

use crate::field::{AmplitudeField, Direction, Representation};
use crate::grid::{Grid, UnitSystem};
use crate::transforms::KernelKind;
use crate::{Error, Result};

/// `α(k) → e^{-i k c t} α(k)` on every channel.
pub fn evolve_free(field: &AmplitudeField, t: f64, units: &UnitSystem) -> Result<AmplitudeField> {
    if field.representation() != Representation::Momentum {
        return Err(Error::RepresentationMismatch {
            expected: "momentum".into(),
            found: field.representation().to_string(),
        });
    }
    let phases: Vec<Complex64> = field
        .grid()
        .k_values()
        .iter()
        .map(|&k| Complex64::from_polar(1.0, -k * units.c * t))
        .collect();
    let mut out = field.clone();
    for slot in 0..4 {
        for (v, p) in out.slot_mut(slot).iter_mut().zip(&phases) {
            *v *= p;
        }
    }
    Ok(out)
}

/// Signed eigenvalues `ħ c k_m` of the dynamical Hamiltonian, one per lattice
/// wavenumber. Half are negative.
pub fn dynamical_spectrum(grid: &Grid, units: &UnitSystem) -> Vec<f64> {
    grid.k_values()
        .iter()
        .map(|&k| units.hbar * units.c * k)
        .collect()
}

/// Exact whole-cell translation of one direction's channels in the flat
/// position representation: `a_s(x_j) → a_s(x_{j - s·cells})` (periodic).
pub fn shift_position(
    field: &AmplitudeField,
    cells: i64,
    direction: Direction,
) -> Result<AmplitudeField> {
    match field.representation() {
        Representation::Position(k) if k.kind() == KernelKind::Flat => {}
        other => {
            return Err(Error::RepresentationMismatch {
                expected: "position(flat)".into(),
                found: other.to_string(),
            })
        }
    }
    let n = field.grid().n_points() as i64;
    let shift = (direction.sign() as i64 * cells).rem_euclid(n) as usize;
    let mut out = field.clone();
    for (slot, dir) in AmplitudeField::slot_directions() {
        if dir == direction {
            out.slot_mut(slot).rotate_right(shift);
        }
    }
    Ok(out)
}

/// Shifts both directions by the free-flight distance `c t`, which must be a
/// whole number of cells (to 1e-9).
pub fn shift_position_by_time(
    field: &AmplitudeField,
    t: f64,
    units: &UnitSystem,
) -> Result<AmplitudeField> {
    let cells_f = units.c * t / field.grid().dx();
    let cells = cells_f.round();
    if (cells_f - cells).abs() > 1e-9 {
        return Err(Error::NonIntegerShift(cells_f));
    }
    let once = shift_position(field, cells as i64, Direction::Right)?;
    shift_position(&once, cells as i64, Direction::Left)
}
