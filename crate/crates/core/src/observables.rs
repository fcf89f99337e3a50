//! Field expectation values, normal-ordered energy and Maxwell residuals.
//!
//! With `ξ = (a + a†)/√2` the coherent expectation is `⟨ξ⟩ = √2 Re a`, and
//!
//! ```text
//! E = Σ_s P [ξ_sH ŷ + ξ_sV ẑ]
//! B = Σ_s (s/c) P [-ξ_sV ŷ + ξ_sH ẑ],      P = sqrt(ħc/εA)
//! ```
//!
//! These expressions hold in the `sqrt(|k|)` position representation only;
//! other representations must be converted first.

use num_complex::Complex64;

use crate::field::{
    to_linear, AmplitudeField, Direction, Interpretation, Polarization, Representation,
};
use crate::grid::UnitSystem;
use crate::propagation::evolve_free;
use crate::transforms::{to_momentum, to_position, KernelKind, KernelSpec};
use crate::{Error, Result};

/// Real field profiles over the lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldProfiles {
    pub x: Vec<f64>,
    pub e_y: Vec<f64>,
    pub e_z: Vec<f64>,
    pub b_y: Vec<f64>,
    pub b_z: Vec<f64>,
    /// Normal-ordered energy density, units of `ħc` per length.
    pub energy_density: Vec<f64>,
}

impl FieldProfiles {
    pub fn peak_e(&self) -> f64 {
        self.e_y
            .iter()
            .zip(&self.e_z)
            .map(|(y, z)| y.hypot(*z))
            .fold(0.0, f64::max)
    }
}

fn require_sqrt_position(field: &AmplitudeField) -> Result<()> {
    match field.representation() {
        Representation::Position(k) if k.kind() == KernelKind::SqrtAbsK => {}
        other => {
            return Err(Error::WrongKernel(format!(
                "E/B expectation values need the sqrt_abs_k position representation, got {other}"
            )))
        }
    }
    if field.interpretation() != Interpretation::CoherentAmplitude {
        return Err(Error::ExpectationUndefined(
            "single-excitation states (<E> = <B> = 0); use the coherent-amplitude reading".into(),
        ));
    }
    Ok(())
}

/// `⟨ξ⟩ = √2 Re a` for every slot, in the linear basis.
fn xi_expectations(field: &AmplitudeField) -> [Vec<f64>; 4] {
    let lin = to_linear(field);
    std::array::from_fn(|slot| {
        lin.slot(slot)
            .iter()
            .map(|a| std::f64::consts::SQRT_2 * a.re)
            .collect()
    })
}

/// E and B expectation profiles plus the energy density.
pub fn field_profiles(field: &AmplitudeField, units: &UnitSystem) -> Result<FieldProfiles> {
    require_sqrt_position(field)?;
    let n = field.grid().n_points();
    let p = units.field_prefactor();
    let xi = xi_expectations(field);
    let mut out = FieldProfiles {
        x: field.grid().x_values().to_vec(),
        e_y: vec![0.0; n],
        e_z: vec![0.0; n],
        b_y: vec![0.0; n],
        b_z: vec![0.0; n],
        energy_density: vec![0.0; n],
    };
    for (slot, dir) in AmplitudeField::slot_directions() {
        if slot % 2 == 1 {
            continue;
        }
        let (h, v) = (&xi[slot], &xi[slot + 1]);
        let b = dir.sign() / units.c * p;
        for j in 0..n {
            out.e_y[j] += p * h[j];
            out.e_z[j] += p * v[j];
            out.b_y[j] -= b * v[j];
            out.b_z[j] += b * h[j];
        }
    }
    out.energy_density = density_from_xi(&xi, units);
    Ok(out)
}

fn density_from_xi(xi: &[Vec<f64>; 4], units: &UnitSystem) -> Vec<f64> {
    let n = xi[0].len();
    (0..n)
        .map(|j| units.hbar * units.c * xi.iter().map(|c| c[j] * c[j]).sum::<f64>())
        .collect()
}

/// Normal-ordered energy density `ħc Σ_{s,λ} ⟨ξ_sλ⟩²`.
pub fn energy_density(field: &AmplitudeField, units: &UnitSystem) -> Result<Vec<f64>> {
    require_sqrt_position(field)?;
    Ok(density_from_xi(&xi_expectations(field), units))
}

fn channel_energy(
    alpha: &[Complex64],
    f: &[Complex64],
    grid: &crate::grid::Grid,
    anomalous: bool,
) -> f64 {
    let mut total = 0.0;
    for m in 0..alpha.len() {
        let mut term = f[m].norm_sqr() * alpha[m].norm_sqr();
        if anomalous {
            if let Some(p) = grid.negated_k_index(m) {
                term += (f[m] * f[p] * alpha[m] * alpha[p]).re;
            }
        }
        total += term;
    }
    total
}

/// Energy expectation `Σ_{s,λ} Σ_k dk 2πħc [|f|²|α|² + Re(f(k)f(-k)α(k)α(-k))]`.
///
/// The anomalous `α(k)α(-k)` term is evaluated in the linear basis and only
/// for coherent amplitudes; single-excitation states carry `Σ 2πħc|f|²|α|² dk`.
/// The unpaired Nyquist wavenumber contributes no anomalous term.
/// Position-space inputs are converted with their recorded kernel.
pub fn energy_total(
    field: &AmplitudeField,
    kernel: &KernelSpec,
    units: &UnitSystem,
) -> Result<f64> {
    Ok(energy_by_direction(field, kernel, units)?.iter().sum())
}

/// Energy carried by right movers and left movers, `[E(s=+1), E(s=-1)]`.
/// The anomalous term never couples directions, so the parts add up exactly.
pub fn energy_by_direction(
    field: &AmplitudeField,
    kernel: &KernelSpec,
    units: &UnitSystem,
) -> Result<[f64; 2]> {
    let momentum = match field.representation() {
        Representation::Momentum => to_linear(field),
        Representation::Position(_) => to_linear(&to_momentum(field)?),
    };
    let grid = momentum.grid();
    let f = kernel.sample(grid);
    let anomalous = momentum.interpretation() == Interpretation::CoherentAmplitude;
    let scale = grid.dk() * 2.0 * std::f64::consts::PI * units.hbar * units.c;
    let mut out = [0.0; 2];
    for (slot, dir) in AmplitudeField::slot_directions() {
        let idx = if dir == Direction::Right { 0 } else { 1 };
        out[idx] += scale * channel_energy(momentum.slot(slot), &f, grid, anomalous);
    }
    Ok(out)
}

/// Outcome of [`maxwell_residual`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaxwellReport {
    /// Max-norm residual over both curl equations (all four components).
    pub residual: f64,
    /// `residual / (peak |E| / dx)`.
    pub normalized: f64,
    pub peak_e: f64,
    /// Fraction of `Σ|α|²dk` sitting at `|k| > 0.8 k_max`.
    pub band_edge_weight: f64,
    /// Set when `band_edge_weight` exceeds 1e-6; the residual is then not meaningful.
    pub band_edge: bool,
}

/// Multiplies every channel by `i s k` (spectral `∂x` of the position image).
fn spectral_derivative(field: &AmplitudeField) -> AmplitudeField {
    let mut out = field.clone();
    let ks = field.grid().k_values().to_vec();
    for (slot, dir) in AmplitudeField::slot_directions() {
        for (v, &k) in out.slot_mut(slot).iter_mut().zip(&ks) {
            *v *= Complex64::new(0.0, dir.sign() * k);
        }
    }
    out
}

fn band_edge_weight(field: &AmplitudeField) -> f64 {
    let grid = field.grid();
    let cut = 0.8 * grid.k_max();
    let total = field.norm_sqr();
    if total == 0.0 {
        return 0.0;
    }
    let mut edge = 0.0;
    for slot in field.slots() {
        for (v, &k) in slot.iter().zip(grid.k_values()) {
            if k.abs() > cut {
                edge += v.norm_sqr();
            }
        }
    }
    edge * grid.dk() / total
}

/// Residual of the 1D curl equations
///
/// ```text
/// ∂t B_y =  ∂x E_z          ∂t E_y = -(1/εμ) ∂x B_z
/// ∂t B_z = -∂x E_y          ∂t E_z =  (1/εμ) ∂x B_y
/// ```
///
/// for a momentum-space coherent field, with central differences in time
/// (`evolve_free(±dt_probe)`) and spectral space derivatives.
pub fn maxwell_residual(
    field: &AmplitudeField,
    units: &UnitSystem,
    dt_probe: f64,
) -> Result<MaxwellReport> {
    let kernel = KernelSpec::sqrt_abs_k();
    let profiles = |f: &AmplitudeField| -> Result<FieldProfiles> {
        field_profiles(&to_position(f, &kernel)?, units)
    };
    let now = profiles(field)?;
    let ahead = profiles(&evolve_free(field, dt_probe, units)?)?;
    let behind = profiles(&evolve_free(field, -dt_probe, units)?)?;
    let dx_fields = profiles(&spectral_derivative(field))?;
    let inv_em = 1.0 / (units.epsilon * units.mu);
    let dt = |a: &[f64], b: &[f64], j: usize| (a[j] - b[j]) / (2.0 * dt_probe);
    let mut residual: f64 = 0.0;
    for j in 0..now.x.len() {
        let r = [
            dt(&ahead.b_y, &behind.b_y, j) - dx_fields.e_z[j],
            dt(&ahead.b_z, &behind.b_z, j) + dx_fields.e_y[j],
            dt(&ahead.e_y, &behind.e_y, j) + inv_em * dx_fields.b_z[j],
            dt(&ahead.e_z, &behind.e_z, j) - inv_em * dx_fields.b_y[j],
        ];
        residual = r.iter().fold(residual, |acc, v| acc.max(v.abs()));
    }
    let peak_e = now.peak_e();
    let dx = field.grid().dx();
    let band_edge_weight = band_edge_weight(field);
    Ok(MaxwellReport {
        residual,
        normalized: if peak_e > 0.0 {
            residual * dx / peak_e
        } else {
            0.0
        },
        peak_e,
        band_edge_weight,
        band_edge: band_edge_weight > 1e-6,
    })
}

/// Convenience for single-channel tests: the `(s, λ)` amplitudes of a
/// linear-basis field.
pub fn linear_channel(
    field: &AmplitudeField,
    direction: Direction,
    pol: Polarization,
) -> Vec<Complex64> {
    to_linear(field).channel(direction, pol).to_vec()
}
