use num_complex::Complex64;

use super::kernel::MirrorKernel;
use crate::field::{to_basis, to_circular, AmplitudeField, PolarizationBasis, Representation};
use crate::grid::{Grid, UnitSystem};
use crate::transforms::lattice_exp_sum;
use crate::{Error, Result};

/// Complex scattering angle `Ξ_k` on every lattice wavenumber.
#[derive(Clone, Debug, PartialEq)]
pub struct ScatteringSpectrum {
    pub k: Vec<f64>,
    pub xi: Vec<Complex64>,
}

impl ScatteringSpectrum {
    /// Reflectance `sin²|Ξ_k|`.
    pub fn reflectance(&self) -> Vec<f64> {
        self.xi.iter().map(|x| x.norm().sin().powi(2)).collect()
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }
}

/// `Ξ_k = (i/c) Σ_{j,j'} Ω_{jj'} e^{ik(x_j + x_j')} dx²`.
///
/// The double sum is folded onto `p = j + j' (mod n)` and finished with one
/// FFT; `e^{ikL} = 1` on the lattice makes the fold exact. Separable kernels
/// give the constant `(i/c) Σ Ω_j dx`.
pub fn xi_spectrum(
    kernel: &MirrorKernel,
    grid: &Grid,
    units: &UnitSystem,
) -> Result<ScatteringSpectrum> {
    kernel.check_grid(grid)?;
    let n = grid.n_points();
    let i_over_c = Complex64::new(0.0, 1.0 / units.c);
    let xi = match kernel {
        MirrorKernel::Separable(k) => vec![i_over_c * k.integral(); n],
        MirrorKernel::Dense(k) => {
            let dx = grid.dx();
            // x_j + x_j' = (j + j' - n) dx ≡ x_{(j + j' + n/2) mod n} modulo L.
            let mut folded = vec![Complex64::new(0.0, 0.0); n];
            for &(r, c, v) in k.entries() {
                folded[(r + c + n / 2) % n] += v;
            }
            // k_m x_j is symmetric in (m, j), so the position-indexed sum
            // reuses the same lattice exponential sum.
            lattice_exp_sum(&mut folded, 1.0);
            folded.into_iter().map(|v| i_over_c * v * dx * dx).collect()
        }
    };
    Ok(ScatteringSpectrum {
        k: grid.k_values().to_vec(),
        xi,
    })
}

/// `U(Ξ) = exp(-i [[0, Ξ*], [Ξ, 0]])`
/// `     = [[cos|Ξ|, -i (Ξ*/|Ξ|) sin|Ξ|], [-i (Ξ/|Ξ|) sin|Ξ|, cos|Ξ|]]`,
/// acting on `(α_{+1}(k), α_{-1}(k))`.
pub fn scattering_unitary(xi: Complex64) -> [[Complex64; 2]; 2] {
    let r = xi.norm();
    let cos = Complex64::new(r.cos(), 0.0);
    if r == 0.0 {
        let zero = Complex64::new(0.0, 0.0);
        return [[cos, zero], [zero, cos]];
    }
    let minus_i_sin = Complex64::new(0.0, -r.sin());
    let unit = xi / r;
    [[cos, minus_i_sin * unit.conj()], [minus_i_sin * unit, cos]]
}

fn require_momentum(field: &AmplitudeField) -> Result<()> {
    if field.representation() != Representation::Momentum {
        return Err(Error::RepresentationMismatch {
            expected: "momentum".into(),
            found: field.representation().to_string(),
        });
    }
    Ok(())
}

fn scatter_where(
    field: &AmplitudeField,
    spectrum: &ScatteringSpectrum,
    include: impl Fn(f64) -> bool,
) -> Result<AmplitudeField> {
    require_momentum(field)?;
    let n = field.grid().n_points();
    if spectrum.len() != n {
        return Err(Error::GridMismatch);
    }
    let basis = field.basis();
    let mut circ = to_circular(field);
    let ks = field.grid().k_values();
    // Slots (0, 2) and (1, 3) hold (s = +1, s = -1) for λ = + and λ = -.
    for (right, left) in [(0usize, 2usize), (1, 3)] {
        for m in 0..n {
            if !include(ks[m]) {
                continue;
            }
            let u = scattering_unitary(spectrum.xi[m]);
            let (a, b) = (circ.slot(right)[m], circ.slot(left)[m]);
            circ.slot_mut(right)[m] = u[0][0] * a + u[0][1] * b;
            circ.slot_mut(left)[m] = u[1][0] * a + u[1][1] * b;
        }
    }
    Ok(to_basis(&circ, basis))
}

/// Closed-form scattering operator: every `(k, λ = ±)` pair
/// `(α_{+1}(k), α_{-1}(k))` is mapped by [`scattering_unitary`]. Different `k`
/// and different circular polarisations never mix. Linear-basis inputs are
/// converted internally and returned in the linear basis.
pub fn apply_scattering(
    field: &AmplitudeField,
    spectrum: &ScatteringSpectrum,
) -> Result<AmplitudeField> {
    scatter_where(field, spectrum, |_| true)
}

/// Evolution under a time-local interaction built from `k > 0` modes alone,
/// `H = ħ Σ_λ Σ_{k>0} dk [Ω_k a_{+1}(k) a†_{-1}(k) + h.c.]` with `Ω_k T = Ξ_k`.
///
/// Because the generator carries no position dependence it rotates every
/// `k > 0` pair whether the packet is approaching the mirror or leaving it.
pub fn apply_positive_only_effective(
    field: &AmplitudeField,
    spectrum: &ScatteringSpectrum,
) -> Result<AmplitudeField> {
    scatter_where(field, spectrum, |k| k > 0.0)
}

/// Energy-weighted norm `Σ ħc|k| |α|² dk` over all channels, used to measure
/// how much a map changes a field.
pub fn energy_weighted_norm_sqr(field: &AmplitudeField, units: &UnitSystem) -> Result<f64> {
    require_momentum(field)?;
    let grid = field.grid();
    let mut total = 0.0;
    for slot in field.slots() {
        for (v, &k) in slot.iter().zip(grid.k_values()) {
            total += k.abs() * v.norm_sqr();
        }
    }
    Ok(total * grid.dk() * units.hbar * units.c)
}

/// Circular-basis view used by the structural tests and the CLI probes.
pub fn circular_basis(field: &AmplitudeField) -> AmplitudeField {
    to_basis(field, PolarizationBasis::Circular)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{gaussian_packet, Direction, Interpretation, Polarization};
    use crate::grid::{make_grid, natural_units};
    use crate::observables::energy_total;
    use crate::transforms::KernelSpec;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_and_separable_spectra() {
        let g = make_grid(64, 0.5).unwrap();
        let u = natural_units();
        let zero = xi_spectrum(&MirrorKernel::zero(&g), &g, &u).unwrap();
        assert!(zero.xi.iter().all(|x| x.norm() == 0.0));
        let k = MirrorKernel::smooth_bump(&g, 3, FRAC_PI_2, &u).unwrap();
        let s = xi_spectrum(&k, &g, &u).unwrap();
        for x in &s.xi {
            assert!((x - c(0.0, FRAC_PI_2)).norm() < 1e-14);
        }
        let d = xi_spectrum(&k.to_dense(), &g, &u).unwrap();
        for (a, b) in s.xi.iter().zip(&d.xi) {
            assert!((a - b).norm() < 1e-13);
        }
        let other = make_grid(32, 0.5).unwrap();
        assert!(xi_spectrum(&k, &other, &u).is_err());
    }

    #[test]
    fn unitary_limits() {
        let id = scattering_unitary(c(0.0, 0.0));
        assert_eq!(id, [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]);
        let u = scattering_unitary(c(FRAC_PI_2, 0.0));
        assert!((u[0][1] - c(0.0, -1.0)).norm() < 1e-15);
        assert!((u[1][0] - c(0.0, -1.0)).norm() < 1e-15);
        assert!(u[0][0].norm() < 1e-15);
        // Purely imaginary Ξ = iθ gives the real rotation.
        let u = scattering_unitary(c(0.0, 0.3));
        assert!((u[0][1] - c(-(0.3f64).sin(), 0.0)).norm() < 1e-15);
        assert!((u[1][0] - c((0.3f64).sin(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn complete_transfer() {
        let g = make_grid(128, 0.5).unwrap();
        let u = natural_units();
        let spectrum = ScatteringSpectrum {
            k: g.k_values().to_vec(),
            xi: vec![c(0.0, FRAC_PI_2); 128],
        };
        let f = gaussian_packet(
            &g,
            Direction::Right,
            Polarization::Plus,
            -10.0,
            2.0,
            0.5,
            c(1.0, 0.0),
        )
        .unwrap();
        let out = apply_scattering(&f, &spectrum).unwrap();
        assert!(out.channel_norm_sqr(0) < 1e-30);
        assert!((out.channel_norm_sqr(2) - 1.0).abs() < 1e-12);
        let k = KernelSpec::sqrt_abs_k();
        assert!(
            (energy_total(&out, &k, &u).unwrap() - energy_total(&f, &k, &u).unwrap()).abs() < 1e-12
        );
    }

    #[test]
    fn positive_only_matches_on_positive_support() {
        let g = make_grid(64, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let spectrum = ScatteringSpectrum {
            k: g.k_values().to_vec(),
            xi: (0..64)
                .map(|_| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
                .collect(),
        };
        let data: [Vec<Complex64>; 4] = std::array::from_fn(|_| {
            (0..64)
                .map(|m| {
                    if g.k(m) > 0.0 {
                        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                    } else {
                        c(0.0, 0.0)
                    }
                })
                .collect()
        });
        let f = AmplitudeField::from_slots(
            &g,
            Representation::Momentum,
            PolarizationBasis::Circular,
            Interpretation::CoherentAmplitude,
            data,
        )
        .unwrap();
        let a = apply_scattering(&f, &spectrum).unwrap();
        let b = apply_positive_only_effective(&f, &spectrum).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]
        #[test]
        fn per_k_norm_and_energy_preserved(seed in any::<u64>()) {
            let g = make_grid(32, 0.5).unwrap();
            let u = natural_units();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let theta: f64 = rng.gen_range(0.0..3.0);
            // Real Ω gives Ξ_{-k} = -Ξ_k*; any such spectrum keeps the energy.
            let mut xi = vec![c(0.0, 0.0); 32];
            for m in 1..32 {
                let p = 32 - m;
                if m < p {
                    xi[m] = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                    xi[p] = -xi[m].conj();
                } else if m == p {
                    xi[m] = c(0.0, theta);
                }
            }
            let spectrum = ScatteringSpectrum { k: g.k_values().to_vec(), xi };
            let data: [Vec<Complex64>; 4] = std::array::from_fn(|_| (0..32).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect());
            let f = AmplitudeField::from_slots(&g, Representation::Momentum, PolarizationBasis::Linear, Interpretation::CoherentAmplitude, data).unwrap();
            let out = apply_scattering(&f, &spectrum).unwrap();
            prop_assert_eq!(out.basis(), PolarizationBasis::Linear);
            let (ci, co) = (to_circular(&f), to_circular(&out));
            for m in 0..32 {
                for (r, l) in [(0, 2), (1, 3)] {
                    let before = ci.slot(r)[m].norm_sqr() + ci.slot(l)[m].norm_sqr();
                    let after = co.slot(r)[m].norm_sqr() + co.slot(l)[m].norm_sqr();
                    prop_assert!((before - after).abs() < 1e-12);
                }
            }
            for k in [KernelSpec::sqrt_abs_k(), KernelSpec::flat()] {
                let (e0, e1) = (energy_total(&f, &k, &u).unwrap(), energy_total(&out, &k, &u).unwrap());
                prop_assert!((e0 - e1).abs() <= 1e-10 * e0.abs().max(1e-12), "{} vs {}", e0, e1);
            }
        }
    }
}
