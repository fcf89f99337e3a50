//! Brute-force and closed-form references.
//!
//! Nothing here depends on the simulator crate; every routine is written
//! from the defining formulas so that it can be used to check the fast paths.

use std::f64::consts::PI;

use num_complex::Complex64;

pub type Matrix = Vec<Vec<Complex64>>;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Complex64::new(1.0, 0.0)
                    } else {
                        zero()
                    }
                })
                .collect()
        })
        .collect()
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b[0].len();
    let inner = b.len();
    let mut out = vec![vec![zero(); m]; n];
    for i in 0..n {
        for k in 0..inner {
            let aik = a[i][k];
            if aik == zero() {
                continue;
            }
            for j in 0..m {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn adjoint(a: &Matrix) -> Matrix {
    let n = a.len();
    let m = a[0].len();
    (0..m)
        .map(|j| (0..n).map(|i| a[i][j].conj()).collect())
        .collect()
}

fn one_norm(a: &Matrix) -> f64 {
    let m = a[0].len();
    (0..m)
        .map(|j| a.iter().map(|row| row[j].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(A)` by scaling and squaring with a truncated Taylor series.
/// Intended for validation sizes (n ≤ 64).
pub fn expm(a: &Matrix) -> Matrix {
    let n = a.len();
    let norm = one_norm(a);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scale = 0.5f64.powi(squarings as i32);
    let scaled: Matrix = a
        .iter()
        .map(|r| r.iter().map(|v| v * scale).collect())
        .collect();
    let mut result = identity(n);
    let mut term = identity(n);
    for k in 1..=30 {
        term = matmul(&term, &scaled);
        let inv = 1.0 / k as f64;
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v *= inv;
            }
        }
        let mut largest: f64 = 0.0;
        for (r, t) in result.iter_mut().zip(&term) {
            for (x, y) in r.iter_mut().zip(t) {
                *x += y;
                largest = largest.max(y.norm());
            }
        }
        if largest < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    result
}

/// `exp(-iG)` for `G = [[0, Ξ*], [Ξ, 0]]` from the eigen-decomposition of `G`:
/// eigenvalues `±|Ξ|` with eigenvectors `(Ξ*/|Ξ|, ±1)/√2`.
pub fn dense_unitary_oracle(xi: Complex64) -> [[Complex64; 2]; 2] {
    let r = xi.norm();
    if r == 0.0 {
        let one = Complex64::new(1.0, 0.0);
        return [[one, zero()], [zero(), one]];
    }
    let phase = xi.conj() / r;
    let vecs = [
        [phase, Complex64::new(1.0, 0.0)],
        [phase, Complex64::new(-1.0, 0.0)],
    ];
    let vals = [r, -r];
    let mut out = [[zero(); 2]; 2];
    for (v, &lambda) in vecs.iter().zip(&vals) {
        let w = Complex64::from_polar(0.5, -lambda);
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] += w * v[i] * v[j].conj();
            }
        }
    }
    out
}

/// Same matrix from the general-purpose exponential.
pub fn dense_unitary_oracle_expm(xi: Complex64) -> [[Complex64; 2]; 2] {
    let mi = Complex64::new(0.0, -1.0);
    let g = vec![vec![zero(), mi * xi.conj()], vec![mi * xi, zero()]];
    let e = expm(&g);
    [[e[0][0], e[0][1]], [e[1][0], e[1][1]]]
}

/// `max |U U† - 1|`.
pub fn unitarity_defect(u: &[[Complex64; 2]; 2]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let mut s = zero();
            for k in 0..2 {
                s += u[i][k] * u[j][k].conj();
            }
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((s - target).norm());
        }
    }
    worst
}

/// The real rotation `[[cos θ, -sin θ], [sin θ, cos θ]]` applied to
/// `(A₊(x), A₋(-x))`.
pub fn rotation_solution_oracle(
    a_plus: Complex64,
    a_minus: Complex64,
    theta: f64,
) -> (Complex64, Complex64) {
    let (s, c) = theta.sin_cos();
    (a_plus * c - a_minus * s, a_plus * s + a_minus * c)
}

/// Parameters of an analytic flat-kernel Gaussian packet.
#[derive(Clone, Copy, Debug)]
pub struct GaussianParams {
    /// Direction `±1`.
    pub s: f64,
    pub x0: f64,
    pub sigma: f64,
    pub k0: f64,
    pub amplitude: Complex64,
    pub c: f64,
}

/// Flat-kernel (`φ = 0`) position amplitude of the Gaussian packet with
/// spectrum `∝ exp(-σ²(k - k0)²/2) e^{-iskx0}` and `∫|α|² dk = |amplitude|²`,
/// translated by `s c t`, periodised with period `period`:
///
/// `a(x) = amplitude (σ²/π)^{1/4} / σ · e^{i s k0 ξ} e^{-ξ²/(2σ²)}`, `ξ = x - x0 - s c t`.
pub fn gaussian_translation_oracle(
    x: &[f64],
    period: f64,
    p: &GaussianParams,
    t: f64,
) -> Vec<Complex64> {
    let norm = (p.sigma * p.sigma / PI).powf(0.25) / p.sigma;
    let images = (8.0 * p.sigma / period).ceil() as i64 + 1;
    x.iter()
        .map(|&xj| {
            let mut base = xj - p.x0 - p.s * p.c * t;
            base -= period * (base / period).round();
            let mut total = zero();
            for img in -images..=images {
                let xi = base + img as f64 * period;
                total += Complex64::from_polar(
                    norm * (-xi * xi / (2.0 * p.sigma * p.sigma)).exp(),
                    p.s * p.k0 * xi,
                );
            }
            total * p.amplitude
        })
        .collect()
}

/// Direct double sum `Ξ_k = (i/c) Σ_{j,j'} Ω[j][j'] e^{ik(x_j + x_j')} dx²`.
pub fn brute_force_xi(omega: &[f64], x: &[f64], k: &[f64], c: f64) -> Vec<Complex64> {
    let n = x.len();
    let dx = x[1] - x[0];
    k.iter()
        .map(|&km| {
            let mut total = zero();
            for j in 0..n {
                for jp in 0..n {
                    let w = omega[j * n + jp];
                    if w != 0.0 {
                        total += Complex64::from_polar(w, km * (x[j] + x[jp]));
                    }
                }
            }
            Complex64::new(0.0, 1.0 / c) * total * dx * dx
        })
        .collect()
}

/// Composite Simpson rule with `intervals` (rounded up to even) subintervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals.max(2) + intervals % 2;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// `(1/2π) ∫_{-K}^{K} |k| e^{ikΔ} dk = (1/π) (KΔ sin KΔ + cos KΔ - 1) / Δ²`.
pub fn sqrt_abs_k_overlap_closed_form(k_max: f64, delta: f64) -> f64 {
    if delta == 0.0 {
        return k_max * k_max / (2.0 * PI);
    }
    let kd = k_max * delta;
    (kd * kd.sin() + kd.cos() - 1.0) / (PI * delta * delta)
}

/// Piecewise-linear interpolant of samples `omega` at `x_j = x_first + j dx`,
/// zero outside the sampled range.
pub fn linear_interpolant(omega: &[f64], x_first: f64, dx: f64, u: f64) -> f64 {
    let s = (u - x_first) / dx;
    if s < 0.0 || s > (omega.len() - 1) as f64 {
        return 0.0;
    }
    let i = (s.floor() as usize).min(omega.len() - 2);
    let tau = s - i as f64;
    omega[i] * (1.0 - tau) + omega[i + 1] * tau
}

/// `(1/c) ∫_x^{x + ct} Ω_lin(u) du` by Simpson on every lattice cell (exact
/// for a piecewise-linear integrand).
pub fn xi_along_characteristic(
    omega: &[f64],
    x_first: f64,
    dx: f64,
    x: f64,
    t: f64,
    c: f64,
) -> f64 {
    let (a, b) = (x, x + c * t);
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let mut breaks = vec![lo];
    let first = ((lo - x_first) / dx).ceil() as i64;
    let last = ((hi - x_first) / dx).floor() as i64;
    for j in first..=last {
        let xb = x_first + j as f64 * dx;
        if xb > lo && xb < hi {
            breaks.push(xb);
        }
    }
    breaks.push(hi);
    let total: f64 = breaks
        .windows(2)
        .map(|w| simpson(|u| linear_interpolant(omega, x_first, dx, u), w[0], w[1], 2))
        .sum();
    let signed = if a <= b { total } else { -total };
    signed / c
}

/// Solves `A z = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Matrix, mut b: Vec<Complex64>) -> Vec<Complex64> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col];
        for row in col + 1..n {
            let factor = a[row][col] / p;
            if factor == zero() {
                continue;
            }
            for k in col..n {
                let v = a[col][k];
                a[row][k] -= factor * v;
            }
            let v = b[col];
            b[row] -= factor * v;
        }
    }
    let mut z = vec![zero(); n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row][k] * z[k];
        }
        z[row] = s / a[row][row];
    }
    z
}

/// Least-squares inverse of the `sqrt(|k|)` (`φ = 0`) transform
/// `a(x_j) = Σ_m sqrt(|k_m|/2π) e^{i s k_m x_j} α(k_m) dk` by the normal
/// equations on the modes with `k ≠ 0`; the `k = 0` amplitude is returned as 0.
pub fn sqrt_abs_k_inverse_dense(x: &[f64], k: &[f64], s: f64, a: &[Complex64]) -> Vec<Complex64> {
    let dk = k[1] - k[0];
    let cols: Vec<usize> = (0..k.len()).filter(|&m| k[m] != 0.0).collect();
    let m_mat: Matrix = x
        .iter()
        .map(|&xj| {
            cols.iter()
                .map(|&m| {
                    Complex64::from_polar((k[m].abs() / (2.0 * PI)).sqrt() * dk, s * k[m] * xj)
                })
                .collect()
        })
        .collect();
    let mh = adjoint(&m_mat);
    let normal = matmul(&mh, &m_mat);
    let rhs: Vec<Complex64> = mh
        .iter()
        .map(|row| row.iter().zip(a).map(|(p, q)| p * q).sum())
        .collect();
    let z = solve(normal, rhs);
    let mut out = vec![zero(); k.len()];
    for (idx, &m) in cols.iter().enumerate() {
        out[m] = z[idx];
    }
    out
}
