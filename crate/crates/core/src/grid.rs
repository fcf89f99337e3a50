//! Paired position / wavenumber lattices and the unit system.
//!
//! The lattice is centred so that both `x = 0` and `k = 0` are grid points:
//!
//! ```text
//! x_j = (j - n/2) dx,   k_m = (m - n/2) dk,   dk = 2π / (n dx)
//! ```
//!
//! Continuum integrals are Riemann sums (`∫dx → Σ dx`, `∫dk → Σ dk`) and the
//! band limit `|k| ≤ π/dx` truncates every wavenumber integral. With these
//! conventions the flat-kernel transform pair is exactly unitary.

use std::f64::consts::PI;

use crate::{Error, Result};

/// Physical constants carried through every prefactor.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct UnitSystem {
    pub hbar: f64,
    pub c: f64,
    pub epsilon: f64,
    pub mu: f64,
    /// Transverse area the field occupies.
    pub area: f64,
}

impl UnitSystem {
    /// Checked constructor. Requires strictly positive entries and
    /// `c = 1/sqrt(epsilon mu)` to 1e-12 relative.
    pub fn new(hbar: f64, c: f64, epsilon: f64, mu: f64, area: f64) -> Result<Self> {
        let units = Self {
            hbar,
            c,
            epsilon,
            mu,
            area,
        };
        units.validate()?;
        Ok(units)
    }

    /// Builds a unit system from the medium, deriving `c`.
    pub fn from_medium(hbar: f64, epsilon: f64, mu: f64, area: f64) -> Result<Self> {
        Self::new(hbar, 1.0 / (epsilon * mu).sqrt(), epsilon, mu, area)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("hbar", self.hbar),
            ("c", self.c),
            ("epsilon", self.epsilon),
            ("mu", self.mu),
            ("area", self.area),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidUnits(format!(
                    "{name} must be finite and strictly positive, got {value}"
                )));
            }
        }
        let expected = 1.0 / (self.epsilon * self.mu).sqrt();
        if ((self.c - expected) / expected).abs() > 1e-12 {
            return Err(Error::InvalidUnits(format!(
                "c = {} violates c = 1/sqrt(epsilon mu) = {expected}",
                self.c
            )));
        }
        Ok(())
    }

    /// `sqrt(hbar c / (epsilon A))`, the electric field prefactor.
    pub fn field_prefactor(&self) -> f64 {
        (self.hbar * self.c / (self.epsilon * self.area)).sqrt()
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        natural_units()
    }
}

/// `hbar = c = epsilon = mu = A = 1`.
pub fn natural_units() -> UnitSystem {
    UnitSystem {
        hbar: 1.0,
        c: 1.0,
        epsilon: 1.0,
        mu: 1.0,
        area: 1.0,
    }
}

/// Centred uniform lattice in position and wavenumber.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    n_points: usize,
    dx: f64,
    dk: f64,
    x_values: Vec<f64>,
    k_values: Vec<f64>,
}

impl Grid {
    pub fn new(n_points: usize, dx: f64) -> Result<Self> {
        if n_points < 4 || !n_points.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "n_points must be even and >= 4, got {n_points}"
            )));
        }
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "dx must be finite and positive, got {dx}"
            )));
        }
        let half = (n_points / 2) as f64;
        let dk = 2.0 * PI / (n_points as f64 * dx);
        let x_values = (0..n_points).map(|j| (j as f64 - half) * dx).collect();
        let k_values = (0..n_points).map(|m| (m as f64 - half) * dk).collect();
        Ok(Self {
            n_points,
            dx,
            dk,
            x_values,
            k_values,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dk(&self) -> f64 {
        self.dk
    }

    /// Periodic length `L = n dx`.
    pub fn length(&self) -> f64 {
        self.n_points as f64 * self.dx
    }

    /// Band limit `π/dx`. The lattice covers `[-k_max, k_max)`.
    pub fn k_max(&self) -> f64 {
        PI / self.dx
    }

    pub fn x_values(&self) -> &[f64] {
        &self.x_values
    }

    pub fn k_values(&self) -> &[f64] {
        &self.k_values
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_values[j]
    }

    pub fn k(&self, m: usize) -> f64 {
        self.k_values[m]
    }

    /// Index of `x = 0` (and of `k = 0`).
    pub fn origin_index(&self) -> usize {
        self.n_points / 2
    }

    /// Nearest lattice index to `x`, wrapping periodically onto the torus.
    pub fn nearest_x_index(&self, x: f64) -> usize {
        let offset = (x / self.dx).round() as i64 + (self.n_points / 2) as i64;
        offset.rem_euclid(self.n_points as i64) as usize
    }

    /// Nearest lattice index to `k`, or `None` outside the band.
    pub fn nearest_k_index(&self, k: f64) -> Option<usize> {
        let m = (k / self.dk).round() as i64 + (self.n_points / 2) as i64;
        (0..self.n_points as i64).contains(&m).then_some(m as usize)
    }

    /// Index of `-x_j` on the torus (`x_0 = -L/2` maps onto itself).
    pub fn mirror_index(&self, j: usize) -> usize {
        (self.n_points - j) % self.n_points
    }

    /// Index of `-k_m`, or `None` for the unpaired Nyquist point `k = -π/dx`.
    pub fn negated_k_index(&self, m: usize) -> Option<usize> {
        (m != 0).then(|| self.n_points - m)
    }

    /// Circular index arithmetic.
    pub fn wrap(&self, j: i64) -> usize {
        j.rem_euclid(self.n_points as i64) as usize
    }

    /// True when both grids have the same layout.
    pub fn same_layout(&self, other: &Grid) -> bool {
        self.n_points == other.n_points && self.dx == other.dx
    }
}

/// Alias for [`Grid::new`].
pub fn make_grid(n_points: usize, dx: f64) -> Result<Grid> {
    Grid::new(n_points, dx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn eight_point_grid() {
        let g = make_grid(8, 1.0).unwrap();
        assert_eq!(g.length(), 8.0);
        assert!((g.dk() - PI / 4.0).abs() < 1e-15);
        let expected: Vec<f64> = (-4..4).map(|m| m as f64 * PI / 4.0).collect();
        for (k, e) in g.k_values().iter().zip(&expected) {
            assert!((k - e).abs() < 1e-15);
        }
        assert_eq!(g.k(0), -PI);
        assert_eq!(g.x(g.origin_index()), 0.0);
        assert_eq!(g.k(g.origin_index()), 0.0);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(make_grid(7, 1.0), Err(Error::InvalidGrid(_))));
        assert!(make_grid(2, 1.0).is_err());
        assert!(make_grid(0, 1.0).is_err());
        assert!(make_grid(8, 0.0).is_err());
        assert!(make_grid(8, -1.0).is_err());
        assert!(make_grid(8, f64::NAN).is_err());
    }

    #[test]
    fn large_grid_spacing() {
        let g = make_grid(4096, 0.05).unwrap();
        assert!((g.length() - 204.8).abs() < 1e-12);
        // 2π / 204.8 evaluated independently.
        assert!((g.dk() - 0.030_679_615_757_712_823).abs() < 1e-15);
        let product = g.dx() * g.dk() * g.n_points() as f64;
        assert!((product / (2.0 * PI) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn natural_units_valid() {
        let u = natural_units();
        assert_eq!(u, UnitSystem::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap());
        u.validate().unwrap();
    }

    #[test]
    fn custom_units() {
        assert!(UnitSystem::new(1.0, 0.5, 4.0, 1.0, 1.0).is_ok());
        assert!(UnitSystem::new(1.0, 1.0, 4.0, 1.0, 1.0).is_err());
        assert!(UnitSystem::new(1.0, 1.0, 2.0, 2.0, 1.0).is_err());
        assert!(UnitSystem::new(1.0, 1.0, 1.0, 1.0, 0.0).is_err());
        let m = UnitSystem::from_medium(1.0, 4.0, 1.0, 2.0).unwrap();
        assert_eq!(m.c, 0.5);
    }

    #[test]
    fn nyquist_has_no_partner() {
        let g = make_grid(8, 1.0).unwrap();
        assert_eq!(g.negated_k_index(0), None);
        assert_eq!(g.negated_k_index(4), Some(4));
        for m in 1..8 {
            let p = g.negated_k_index(m).unwrap();
            assert_eq!(g.k(p), -g.k(m));
        }
    }

    proptest! {
        #[test]
        fn index_roundtrip(half in 2usize..512, dx in 1e-3f64..10.0, frac in 0.0f64..1.0) {
            let g = make_grid(2 * half, dx).unwrap();
            let j = ((g.n_points() as f64 - 1.0) * frac) as usize;
            prop_assert_eq!(g.nearest_x_index(g.x(j)), j);
            prop_assert_eq!(g.nearest_k_index(g.k(j)), Some(j));
            prop_assert_eq!(g.x_values()[g.mirror_index(j)], if j == 0 { g.x(0) } else { -g.x(j) });
            let product = g.dx() * g.dk() * g.n_points() as f64;
            prop_assert!((product / (2.0 * PI) - 1.0).abs() < 1e-12);
        }
    }
}
