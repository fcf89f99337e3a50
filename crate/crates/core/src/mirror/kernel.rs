use std::ops::RangeInclusive;

use crate::grid::{Grid, UnitSystem};
use crate::{Error, Result};

/// Real coupling kernel `Ω_{xx'}` sampled on the lattice.
///
/// The separable form `Ω(x) δ(x + x')` uses the discrete delta
/// `δ(x_j + x_j') = [j' = mirror(j)] / dx`, so converting to the dense form
/// with [`MirrorKernel::to_dense`] is exact.
#[derive(Clone, Debug, PartialEq)]
pub enum MirrorKernel {
    Separable(SeparableKernel),
    Dense(DenseKernel),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparableKernel {
    dx: f64,
    omega: Vec<f64>,
    support: Option<RangeInclusive<usize>>,
}

/// `n × n` row-major samples `Ω[j][j']` (rows couple into right movers at
/// `x_j`, columns into left movers at `x_j'`). Nonzero entries are cached.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseKernel {
    n: usize,
    dx: f64,
    omega: Vec<f64>,
    entries: Vec<(usize, usize, f64)>,
}

fn check_finite(values: &[f64]) -> Result<()> {
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidKernel(format!("non-finite sample {v}")));
    }
    Ok(())
}

impl SeparableKernel {
    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Smallest index range holding every nonzero sample.
    pub fn support(&self) -> Option<RangeInclusive<usize>> {
        self.support.clone()
    }

    /// `Σ_j Ω_j dx`.
    pub fn integral(&self) -> f64 {
        self.omega.iter().sum::<f64>() * self.dx
    }
}

impl DenseKernel {
    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.omega[row * self.n + col]
    }

    /// Nonzero samples as `(row, col, value)`.
    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }
}

impl MirrorKernel {
    /// Separable kernel from samples `Ω(x_j)`.
    pub fn separable(grid: &Grid, omega: Vec<f64>) -> Result<Self> {
        if omega.len() != grid.n_points() {
            return Err(Error::InvalidKernel(format!(
                "expected {} samples, got {}",
                grid.n_points(),
                omega.len()
            )));
        }
        check_finite(&omega)?;
        let first = omega.iter().position(|&v| v != 0.0);
        let last = omega.iter().rposition(|&v| v != 0.0);
        let support = first.zip(last).map(|(a, b)| a..=b);
        Ok(Self::Separable(SeparableKernel {
            dx: grid.dx(),
            omega,
            support,
        }))
    }

    /// Separable kernel from a profile function, evaluated on the lattice.
    pub fn separable_fn(grid: &Grid, profile: impl Fn(f64) -> f64) -> Result<Self> {
        Self::separable(grid, grid.x_values().iter().map(|&x| profile(x)).collect())
    }

    /// Separable `cos²` bump centred on `x = 0` spanning `2 half_cells - 1`
    /// lattice sites, scaled so that `(1/c) Σ Ω dx = theta`.
    pub fn smooth_bump(
        grid: &Grid,
        half_cells: usize,
        theta: f64,
        units: &UnitSystem,
    ) -> Result<Self> {
        if half_cells == 0 || 2 * half_cells >= grid.n_points() {
            return Err(Error::InvalidKernel(format!(
                "half width of {half_cells} cells does not fit the grid"
            )));
        }
        let w = half_cells as f64 * grid.dx();
        let raw: Vec<f64> = grid
            .x_values()
            .iter()
            .map(|&x| {
                if x.abs() < w {
                    (std::f64::consts::FRAC_PI_2 * x / w).cos().powi(2)
                } else {
                    0.0
                }
            })
            .collect();
        let sum: f64 = raw.iter().sum::<f64>() * grid.dx();
        let scale = theta * units.c / sum;
        Self::separable(grid, raw.into_iter().map(|v| v * scale).collect())
    }

    /// Dense kernel from `n × n` row-major samples.
    pub fn dense(grid: &Grid, omega: Vec<f64>) -> Result<Self> {
        let n = grid.n_points();
        if omega.len() != n * n {
            return Err(Error::InvalidKernel(format!(
                "expected {} dense samples, got {}",
                n * n,
                omega.len()
            )));
        }
        check_finite(&omega)?;
        let entries = omega
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, &v)| (i / n, i % n, v))
            .collect();
        Ok(Self::Dense(DenseKernel {
            n,
            dx: grid.dx(),
            omega,
            entries,
        }))
    }

    /// Dense kernel from a function `Ω(x, x')`, zeroed where `|Ω| < cutoff`.
    pub fn dense_fn(grid: &Grid, cutoff: f64, omega: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let xs = grid.x_values();
        let mut data = Vec::with_capacity(xs.len() * xs.len());
        for &x in xs {
            for &xp in xs {
                let v = omega(x, xp);
                data.push(if v.abs() < cutoff { 0.0 } else { v });
            }
        }
        Self::dense(grid, data)
    }

    pub fn zero(grid: &Grid) -> Self {
        Self::Separable(SeparableKernel {
            dx: grid.dx(),
            omega: vec![0.0; grid.n_points()],
            support: None,
        })
    }

    pub fn n_points(&self) -> usize {
        match self {
            Self::Separable(k) => k.omega.len(),
            Self::Dense(k) => k.n,
        }
    }

    pub fn dx(&self) -> f64 {
        match self {
            Self::Separable(k) => k.dx,
            Self::Dense(k) => k.dx,
        }
    }

    pub fn is_separable(&self) -> bool {
        matches!(self, Self::Separable(_))
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        if self.n_points() != grid.n_points() || self.dx() != grid.dx() {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Exact dense equivalent, `Ω[j][mirror(j)] = Ω_j / dx`.
    pub fn to_dense(&self) -> MirrorKernel {
        match self {
            Self::Dense(_) => self.clone(),
            Self::Separable(k) => {
                let n = k.omega.len();
                let mut omega = vec![0.0; n * n];
                let mut entries = Vec::new();
                for (j, &v) in k.omega.iter().enumerate() {
                    if v != 0.0 {
                        let col = (n - j) % n;
                        omega[j * n + col] = v / k.dx;
                        entries.push((j, col, v / k.dx));
                    }
                }
                Self::Dense(DenseKernel {
                    n,
                    dx: k.dx,
                    omega,
                    entries,
                })
            }
        }
    }

    /// Nonzero couplings as `(row, col, rate)`, where `rate = Ω[row][col] dx` is
    /// the coefficient in the amplitude ODE. Separable kernels give
    /// `(j, mirror(j), Ω_j)`.
    pub fn couplings(&self) -> Vec<(usize, usize, f64)> {
        match self {
            Self::Separable(k) => {
                let n = k.omega.len();
                k.omega
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(j, &v)| (j, (n - j) % n, v))
                    .collect()
            }
            Self::Dense(k) => k
                .entries
                .iter()
                .map(|&(r, c, v)| (r, c, v * k.dx))
                .collect(),
        }
    }

    /// Largest total coupling rate `max_row Σ_col |Ω| dx` (or `max |Ω_j|`).
    pub fn max_rate(&self) -> f64 {
        let n = self.n_points();
        let mut rows = vec![0.0f64; n];
        let mut cols = vec![0.0f64; n];
        for (r, c, v) in self.couplings() {
            rows[r] += v.abs();
            cols[c] += v.abs();
        }
        rows.iter().chain(&cols).cloned().fold(0.0, f64::max)
    }

    /// Sites that carry a coupling, as (rows, cols) index ranges over the
    /// static kernel. `None` for the zero kernel.
    pub fn support(&self) -> Option<(RangeInclusive<usize>, RangeInclusive<usize>)> {
        let couplings = self.couplings();
        if couplings.is_empty() {
            return None;
        }
        let (mut r0, mut r1, mut c0, mut c1) = (usize::MAX, 0, usize::MAX, 0);
        for (r, c, _) in couplings {
            r0 = r0.min(r);
            r1 = r1.max(r);
            c0 = c0.min(c);
            c1 = c1.max(c);
        }
        Some((r0..=r1, c0..=c1))
    }

    /// Physical extent `[x_lo, x_hi]` of the coupling region. Rows map to
    /// positions directly; columns are reflected (`x' → -x'`), so both describe
    /// where a right mover meets the mirror.
    pub fn extent(&self, grid: &Grid) -> Option<(f64, f64)> {
        let (rows, cols) = self.support()?;
        let mut lo = grid.x(*rows.start());
        let mut hi = grid.x(*rows.end());
        for c in [*cols.start(), *cols.end()] {
            let x = -grid.x(c);
            lo = lo.min(x);
            hi = hi.max(x);
        }
        Some((lo, hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, natural_units};

    #[test]
    fn support_and_integral() {
        let g = make_grid(32, 0.5).unwrap();
        let k = MirrorKernel::smooth_bump(&g, 3, 1.2, &natural_units()).unwrap();
        let MirrorKernel::Separable(s) = &k else {
            panic!()
        };
        assert_eq!(s.support(), Some(14..=18));
        assert!((s.integral() - 1.2).abs() < 1e-14);
        for (j, v) in s.omega().iter().enumerate() {
            assert!(*v >= 0.0);
            if !(14..=18).contains(&j) {
                assert_eq!(*v, 0.0);
            }
        }
        assert_eq!(k.extent(&g), Some((-1.0, 1.0)));
    }

    #[test]
    fn rejects_bad_samples() {
        let g = make_grid(8, 1.0).unwrap();
        assert!(MirrorKernel::separable(&g, vec![0.0; 7]).is_err());
        let mut v = vec![0.0; 8];
        v[2] = f64::NAN;
        assert!(matches!(
            MirrorKernel::separable(&g, v),
            Err(Error::InvalidKernel(_))
        ));
        assert!(MirrorKernel::dense(&g, vec![0.0; 63]).is_err());
        assert!(MirrorKernel::smooth_bump(&g, 4, 1.0, &natural_units()).is_err());
    }

    #[test]
    fn dense_conversion() {
        let g = make_grid(16, 0.25).unwrap();
        let k = MirrorKernel::smooth_bump(&g, 2, 0.7, &natural_units()).unwrap();
        let MirrorKernel::Dense(d) = k.to_dense() else {
            panic!()
        };
        assert_eq!(d.entries().len(), 3);
        for &(r, c, v) in d.entries() {
            assert_eq!(c, g.mirror_index(r));
            assert!((g.x(r) + g.x(c)).abs() < 1e-15);
            assert!(v > 0.0);
        }
        let mut a = k.couplings();
        let mut b = k.to_dense().couplings();
        a.sort_by_key(|x| x.0);
        b.sort_by_key(|x| x.0);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!((x.0, x.1), (y.0, y.1));
            assert!((x.2 - y.2).abs() < 1e-15);
        }
        assert!((k.max_rate() - k.to_dense().max_rate()).abs() < 1e-14);
        assert!(MirrorKernel::zero(&g).support().is_none());
    }
}
