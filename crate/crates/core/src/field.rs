//! Field state: complex amplitudes per channel `(s, λ)` per lattice point.
//!
//! The same container holds coherent amplitudes `⟨a⟩` and single-excitation
//! wavefunctions; every evolution in this crate is linear in the mode
//! operators, so only observable reporting looks at [`Interpretation`].

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use num_complex::Complex64;

use crate::grid::Grid;
use crate::transforms::KernelSpec;
use crate::{Error, Result};

/// Direction of motion `s = ±1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Direction {
    /// `s = +1`
    Right,
    /// `s = -1`
    Left,
}

impl Direction {
    pub const ALL: [Direction; 2] = [Direction::Right, Direction::Left];

    pub fn sign(self) -> f64 {
        match self {
            Direction::Right => 1.0,
            Direction::Left => -1.0,
        }
    }

    pub fn from_sign(s: i64) -> Result<Self> {
        match s {
            1 => Ok(Direction::Right),
            -1 => Ok(Direction::Left),
            other => Err(Error::InvalidParameter(format!(
                "direction must be +1 or -1, got {other}"
            ))),
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Direction::Right => Direction::Left,
            Direction::Left => Direction::Right,
        }
    }

    fn index(self) -> usize {
        match self {
            Direction::Right => 0,
            Direction::Left => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum PolarizationBasis {
    Linear,
    Circular,
}

/// Polarisation label. `H`/`V` live in the linear basis, `Plus`/`Minus` in
/// the circular basis `A_± = (A_H ± i A_V)/√2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Polarization {
    H,
    V,
    Plus,
    Minus,
}

impl Polarization {
    pub fn basis(self) -> PolarizationBasis {
        match self {
            Polarization::H | Polarization::V => PolarizationBasis::Linear,
            Polarization::Plus | Polarization::Minus => PolarizationBasis::Circular,
        }
    }

    fn index(self) -> usize {
        match self {
            Polarization::H | Polarization::Plus => 0,
            Polarization::V | Polarization::Minus => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Polarization::H => "H",
            Polarization::V => "V",
            Polarization::Plus => "+",
            Polarization::Minus => "-",
        }
    }

    pub fn parse(label: &str) -> Result<Self> {
        match label {
            "H" | "h" => Ok(Polarization::H),
            "V" | "v" => Ok(Polarization::V),
            "+" | "plus" => Ok(Polarization::Plus),
            "-" | "minus" => Ok(Polarization::Minus),
            other => Err(Error::InvalidParameter(format!(
                "unknown polarization {other:?}"
            ))),
        }
    }

    fn of(basis: PolarizationBasis, index: usize) -> Self {
        match (basis, index) {
            (PolarizationBasis::Linear, 0) => Polarization::H,
            (PolarizationBasis::Linear, _) => Polarization::V,
            (PolarizationBasis::Circular, 0) => Polarization::Plus,
            (PolarizationBasis::Circular, _) => Polarization::Minus,
        }
    }
}

/// Momentum amplitudes are kernel-agnostic; position amplitudes record the
/// kernel that produced them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Representation {
    Momentum,
    Position(KernelSpec),
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Representation::Momentum => f.write_str("momentum"),
            Representation::Position(k) => write!(f, "position({k})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Interpretation {
    CoherentAmplitude,
    SingleExcitation,
}

/// Identifies one of the four amplitude arrays.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Channel {
    pub direction: Direction,
    pub polarization: Polarization,
}

impl Channel {
    pub fn new(direction: Direction, polarization: Polarization) -> Self {
        Self {
            direction,
            polarization,
        }
    }

    /// `"+1/H"`, `"-1/-"`, ...
    pub fn label(&self) -> String {
        let s = match self.direction {
            Direction::Right => "+1",
            Direction::Left => "-1",
        };
        format!("{s}/{}", self.polarization.label())
    }

    pub fn parse(label: &str) -> Result<Self> {
        let (s, pol) = label
            .split_once('/')
            .ok_or_else(|| Error::InvalidParameter(format!("bad channel label {label:?}")))?;
        let direction = match s {
            "+1" | "1" => Direction::Right,
            "-1" => Direction::Left,
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "bad channel label {label:?}"
                )))
            }
        };
        Ok(Self::new(direction, Polarization::parse(pol)?))
    }
}

/// Complex amplitudes for the four channels on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeField {
    grid: Grid,
    representation: Representation,
    basis: PolarizationBasis,
    interpretation: Interpretation,
    data: [Vec<Complex64>; 4],
}

impl AmplitudeField {
    pub fn zeros(
        grid: &Grid,
        representation: Representation,
        basis: PolarizationBasis,
        interpretation: Interpretation,
    ) -> Self {
        let n = grid.n_points();
        Self {
            grid: grid.clone(),
            representation,
            basis,
            interpretation,
            data: std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); n]),
        }
    }

    /// Builds a field from four arrays ordered `(+1, λ0), (+1, λ1), (-1, λ0), (-1, λ1)`.
    pub fn from_slots(
        grid: &Grid,
        representation: Representation,
        basis: PolarizationBasis,
        interpretation: Interpretation,
        data: [Vec<Complex64>; 4],
    ) -> Result<Self> {
        for slot in &data {
            if slot.len() != grid.n_points() {
                return Err(Error::InvalidParameter(format!(
                    "channel length {} does not match grid size {}",
                    slot.len(),
                    grid.n_points()
                )));
            }
            if slot.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
                return Err(Error::NonFinite("amplitude field".into()));
            }
        }
        Ok(Self {
            grid: grid.clone(),
            representation,
            basis,
            interpretation,
            data,
        })
    }

    /// Same metadata with zeroed data and a new representation tag.
    pub(crate) fn with_representation(&self, representation: Representation) -> Self {
        let mut out = Self::zeros(&self.grid, representation, self.basis, self.interpretation);
        out.representation = representation;
        out
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn basis(&self) -> PolarizationBasis {
        self.basis
    }

    pub fn interpretation(&self) -> Interpretation {
        self.interpretation
    }

    pub fn set_interpretation(&mut self, interpretation: Interpretation) {
        self.interpretation = interpretation;
    }

    /// Slot index and direction for each of the four arrays.
    pub fn slot_directions() -> [(usize, Direction); 4] {
        [
            (0, Direction::Right),
            (1, Direction::Right),
            (2, Direction::Left),
            (3, Direction::Left),
        ]
    }

    pub fn slot_channel(&self, slot: usize) -> Channel {
        let direction = if slot < 2 {
            Direction::Right
        } else {
            Direction::Left
        };
        Channel::new(direction, Polarization::of(self.basis, slot % 2))
    }

    pub fn slot(&self, slot: usize) -> &[Complex64] {
        &self.data[slot]
    }

    pub fn slot_mut(&mut self, slot: usize) -> &mut [Complex64] {
        &mut self.data[slot]
    }

    fn slot_of(&self, direction: Direction, polarization: Polarization) -> usize {
        assert_eq!(
            polarization.basis(),
            self.basis,
            "polarization {polarization:?} requested from a {:?}-basis field",
            self.basis
        );
        direction.index() * 2 + polarization.index()
    }

    /// Amplitudes of one channel. Panics if `polarization` is not in the
    /// field's basis.
    pub fn channel(&self, direction: Direction, polarization: Polarization) -> &[Complex64] {
        &self.data[self.slot_of(direction, polarization)]
    }

    pub fn channel_mut(
        &mut self,
        direction: Direction,
        polarization: Polarization,
    ) -> &mut [Complex64] {
        let slot = self.slot_of(direction, polarization);
        &mut self.data[slot]
    }

    pub fn slots(&self) -> &[Vec<Complex64>; 4] {
        &self.data
    }

    /// Quadrature weight of the current representation (`dk` or `dx`).
    pub fn weight(&self) -> f64 {
        match self.representation {
            Representation::Momentum => self.grid.dk(),
            Representation::Position(_) => self.grid.dx(),
        }
    }

    /// `Σ |·|² × weight` over one channel.
    pub fn channel_norm_sqr(&self, slot: usize) -> f64 {
        self.data[slot].iter().map(|v| v.norm_sqr()).sum::<f64>() * self.weight()
    }

    /// `Σ |·|² × weight` over all channels.
    pub fn norm_sqr(&self) -> f64 {
        (0..4).map(|s| self.channel_norm_sqr(s)).sum()
    }

    /// Largest entrywise difference. Errors when the fields are not comparable.
    pub fn max_abs_diff(&self, other: &AmplitudeField) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .flat_map(|a| a.iter().map(|v| v.norm()))
            .fold(0.0, f64::max)
    }

    pub fn check_compatible(&self, other: &AmplitudeField) -> Result<()> {
        if !self.grid.same_layout(&other.grid) {
            return Err(Error::GridMismatch);
        }
        if self.representation != other.representation {
            return Err(Error::RepresentationMismatch {
                expected: self.representation.to_string(),
                found: other.representation.to_string(),
            });
        }
        if self.basis != other.basis {
            return Err(Error::InvalidParameter(
                "fields are in different polarization bases".into(),
            ));
        }
        Ok(())
    }

    /// Superposition `self + other`.
    pub fn add(&self, other: &AmplitudeField) -> Result<AmplitudeField> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        Ok(out)
    }

    pub fn scale(&mut self, factor: Complex64) {
        for v in self.data.iter_mut().flatten() {
            *v *= factor;
        }
    }

    /// Zeroes every channel except the given direction.
    pub fn keep_direction(&self, direction: Direction) -> AmplitudeField {
        let mut out = self.clone();
        for (slot, dir) in Self::slot_directions() {
            if dir != direction {
                out.data[slot]
                    .iter_mut()
                    .for_each(|v| *v = Complex64::new(0.0, 0.0));
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .flatten()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// Linear → circular basis: `A_± = (A_H ± i A_V)/√2`. Identity if already circular.
pub fn to_circular(field: &AmplitudeField) -> AmplitudeField {
    if field.basis == PolarizationBasis::Circular {
        return field.clone();
    }
    let mut out = field.clone();
    out.basis = PolarizationBasis::Circular;
    let i = Complex64::new(0.0, 1.0);
    for base in [0, 2] {
        let (h, v) = (&field.data[base], &field.data[base + 1]);
        for j in 0..h.len() {
            out.data[base][j] = (h[j] + i * v[j]) * FRAC_1_SQRT_2;
            out.data[base + 1][j] = (h[j] - i * v[j]) * FRAC_1_SQRT_2;
        }
    }
    out
}

/// Circular → linear basis: `A_H = (A_+ + A_-)/√2`, `A_V = -i (A_+ - A_-)/√2`.
pub fn to_linear(field: &AmplitudeField) -> AmplitudeField {
    if field.basis == PolarizationBasis::Linear {
        return field.clone();
    }
    let mut out = field.clone();
    out.basis = PolarizationBasis::Linear;
    let minus_i = Complex64::new(0.0, -1.0);
    for base in [0, 2] {
        let (p, m) = (&field.data[base], &field.data[base + 1]);
        for j in 0..p.len() {
            out.data[base][j] = (p[j] + m[j]) * FRAC_1_SQRT_2;
            out.data[base + 1][j] = minus_i * (p[j] - m[j]) * FRAC_1_SQRT_2;
        }
    }
    out
}

/// Converts to the requested basis.
pub fn to_basis(field: &AmplitudeField, basis: PolarizationBasis) -> AmplitudeField {
    match basis {
        PolarizationBasis::Linear => to_linear(field),
        PolarizationBasis::Circular => to_circular(field),
    }
}

/// Where a packet constructor actually put the packet.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Placement {
    pub requested: f64,
    pub placed: f64,
    /// The requested centre was off-lattice and snapped to the nearest point.
    pub snapped: bool,
}

fn empty_momentum(grid: &Grid, polarization: Polarization) -> AmplitudeField {
    AmplitudeField::zeros(
        grid,
        Representation::Momentum,
        polarization.basis(),
        Interpretation::CoherentAmplitude,
    )
}

/// Gaussian wave packet in momentum space on channel `(direction, polarization)`:
/// `α(k) ∝ amplitude · exp(-σ²(k - k0)²/2) · e^{-i s k x0}`,
/// normalised on the lattice so that `Σ |α|² dk = |amplitude|²`.
///
/// Requires `width ≥ 3 dx` and `|carrier| + 4/width ≤ k_max`.
pub fn gaussian_packet(
    grid: &Grid,
    direction: Direction,
    polarization: Polarization,
    center: f64,
    width: f64,
    carrier: f64,
    amplitude: Complex64,
) -> Result<AmplitudeField> {
    if !(width.is_finite() && width >= 3.0 * grid.dx()) {
        return Err(Error::PacketOutOfBand(format!(
            "width {width} is below 3 dx = {}",
            3.0 * grid.dx()
        )));
    }
    if !(carrier.is_finite() && carrier.abs() + 4.0 / width <= grid.k_max()) {
        return Err(Error::PacketOutOfBand(format!(
            "|carrier| + 4/width = {} exceeds k_max = {}",
            carrier.abs() + 4.0 / width,
            grid.k_max()
        )));
    }
    let s = direction.sign();
    let mut field = empty_momentum(grid, polarization);
    let channel = field.channel_mut(direction, polarization);
    for (v, &k) in channel.iter_mut().zip(grid.k_values()) {
        let envelope = (-0.5 * width * width * (k - carrier).powi(2)).exp();
        *v = Complex64::from_polar(envelope, -s * k * center);
    }
    let norm = (channel.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.dk()).sqrt();
    for v in channel.iter_mut() {
        *v *= amplitude / norm;
    }
    Ok(field)
}

fn snap(grid: &Grid, center: f64) -> Placement {
    let j = grid.nearest_x_index(center);
    let placed = grid.x(j);
    Placement {
        requested: center,
        placed,
        snapped: (placed - center).abs() > 1e-9 * grid.dx(),
    }
}

/// Flat spectrum `α(k) = amplitude · e^{-i s k x0} / sqrt(n dk)`.
///
/// In the flat (`φ = 0`) position representation this is a lattice delta at
/// `x0` of height `amplitude / sqrt(dx)`, with `Σ |α|² dk = |amplitude|²`.
/// Off-lattice centres snap to the nearest lattice point.
pub fn band_flat_packet(
    grid: &Grid,
    direction: Direction,
    polarization: Polarization,
    center: f64,
    amplitude: Complex64,
) -> (AmplitudeField, Placement) {
    let placement = snap(grid, center);
    let s = direction.sign();
    let scale = 1.0 / (grid.n_points() as f64 * grid.dk()).sqrt();
    let mut field = empty_momentum(grid, polarization);
    for (v, &k) in field
        .channel_mut(direction, polarization)
        .iter_mut()
        .zip(grid.k_values())
    {
        *v = amplitude * Complex64::from_polar(scale, -s * k * placement.placed);
    }
    (field, placement)
}

/// Spectrum whose position image under `kernel` is a flat-band lattice delta:
/// `α(k) = amplitude · e^{-i s k x0} / (sqrt(2π) f(k))` wherever `f(k) ≠ 0`,
/// zero elsewhere. For the positive-only kernel this reproduces the classic
/// positive-frequency "localised" packet built from `k > 0` waves alone.
pub fn kernel_compensated_packet(
    grid: &Grid,
    kernel: &KernelSpec,
    direction: Direction,
    polarization: Polarization,
    center: f64,
    amplitude: Complex64,
) -> (AmplitudeField, Placement) {
    let placement = snap(grid, center);
    let s = direction.sign();
    let mut field = empty_momentum(grid, polarization);
    for (v, &k) in field
        .channel_mut(direction, polarization)
        .iter_mut()
        .zip(grid.k_values())
    {
        let f = kernel.eval(k);
        *v = if f.norm() == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            amplitude * Complex64::from_polar(1.0, -s * k * placement.placed)
                / ((2.0 * PI).sqrt() * f)
        };
    }
    (field, placement)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::transforms::{to_position, KernelKind};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn single(grid: &Grid, pol: Polarization, value: Complex64) -> AmplitudeField {
        let mut f = empty_momentum(grid, pol);
        f.channel_mut(Direction::Right, pol)[3] = value;
        f
    }

    #[test]
    fn circular_of_h_and_v() {
        let g = make_grid(8, 1.0).unwrap();
        let h = to_circular(&single(&g, Polarization::H, c(1.0, 0.0)));
        assert!(
            (h.channel(Direction::Right, Polarization::Plus)[3] - c(FRAC_1_SQRT_2, 0.0)).norm()
                < 1e-16
        );
        assert!(
            (h.channel(Direction::Right, Polarization::Minus)[3] - c(FRAC_1_SQRT_2, 0.0)).norm()
                < 1e-16
        );
        let v = to_circular(&single(&g, Polarization::V, c(1.0, 0.0)));
        assert!(
            (v.channel(Direction::Right, Polarization::Plus)[3] - c(0.0, FRAC_1_SQRT_2)).norm()
                < 1e-16
        );
        assert!(
            (v.channel(Direction::Right, Polarization::Minus)[3] - c(0.0, -FRAC_1_SQRT_2)).norm()
                < 1e-16
        );
    }

    #[test]
    #[should_panic(expected = "polarization")]
    fn wrong_basis_access_panics() {
        let g = make_grid(8, 1.0).unwrap();
        let f = single(&g, Polarization::H, c(1.0, 0.0));
        let _ = f.channel(Direction::Right, Polarization::Plus);
    }

    #[test]
    fn gaussian_is_normalised_and_shifts() {
        let g = make_grid(512, 0.1).unwrap();
        let amp = c(0.6, -0.8);
        let f = gaussian_packet(&g, Direction::Right, Polarization::H, 0.0, 1.0, 0.0, amp).unwrap();
        assert!((f.norm_sqr() - 1.0).abs() < 1e-12);
        // Real spectrum (times the amplitude phase) centred at k = 0.
        let ch = f.channel(Direction::Right, Polarization::H);
        let peak = ch
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .unwrap()
            .0;
        assert_eq!(peak, g.origin_index());
        for v in ch {
            assert!((v / amp).im.abs() < 1e-15);
        }
        let d = 2.3;
        let shifted =
            gaussian_packet(&g, Direction::Left, Polarization::H, d, 1.0, 0.0, amp).unwrap();
        let left = shifted.channel(Direction::Left, Polarization::H);
        for (m, (a, b)) in ch.iter().zip(left).enumerate() {
            let expected = a * Complex64::from_polar(1.0, g.k(m) * d);
            assert!((b - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn gaussian_preconditions() {
        let g = make_grid(256, 0.1).unwrap();
        let one = c(1.0, 0.0);
        assert!(
            gaussian_packet(&g, Direction::Right, Polarization::H, 0.0, 0.2, 0.0, one).is_err()
        );
        assert!(
            gaussian_packet(&g, Direction::Right, Polarization::H, 0.0, 1.0, 30.0, one).is_err()
        );
        assert!(
            gaussian_packet(&g, Direction::Right, Polarization::H, 0.0, 1.0, 20.0, one).is_ok()
        );
    }

    #[test]
    fn gaussian_position_peak_at_center() {
        let g = make_grid(1024, 0.1).unwrap();
        for center in [0.0, 3.1, -12.07, 20.0] {
            let f = gaussian_packet(
                &g,
                Direction::Right,
                Polarization::V,
                center,
                2.0,
                1.5,
                c(1.0, 0.0),
            )
            .unwrap();
            let pos = to_position(&f, &KernelSpec::flat()).unwrap();
            let ch = pos.channel(Direction::Right, Polarization::V);
            let peak = ch
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                .unwrap()
                .0;
            assert!(
                (g.x(peak) - center).abs() <= g.dx() / 2.0 + 1e-12,
                "center {center}"
            );
        }
    }

    #[test]
    fn band_flat_delta() {
        let g = make_grid(64, 0.5).unwrap();
        for (center, expect_j) in [(0.0, 32usize), (1.5, 35)] {
            let (f, placement) =
                band_flat_packet(&g, Direction::Right, Polarization::H, center, c(1.0, 0.0));
            assert!(!placement.snapped);
            let pos = to_position(&f, &KernelSpec::flat()).unwrap();
            for (j, v) in pos
                .channel(Direction::Right, Polarization::H)
                .iter()
                .enumerate()
            {
                let expected = if j == expect_j {
                    1.0 / g.dx().sqrt()
                } else {
                    0.0
                };
                assert!((v.norm() - expected).abs() < 1e-12);
            }
            assert!((f.norm_sqr() - 1.0).abs() < 1e-12);
        }
        let (_, placement) =
            band_flat_packet(&g, Direction::Left, Polarization::H, 0.3, c(1.0, 0.0));
        assert!(placement.snapped);
        assert_eq!(placement.placed, 0.5);
    }

    #[test]
    fn compensated_packet_matches_flat_for_flat_kernel() {
        let g = make_grid(32, 1.0).unwrap();
        let k = KernelSpec::new(KernelKind::Flat, 0.0).unwrap();
        let (a, _) =
            kernel_compensated_packet(&g, &k, Direction::Right, Polarization::H, 2.0, c(1.0, 0.0));
        let pa = to_position(&a, &k).unwrap();
        let ch = pa.channel(Direction::Right, Polarization::H);
        let idx = g.nearest_x_index(2.0);
        assert!((ch[idx].re - g.dk() * 32.0 / (2.0 * PI).sqrt()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn basis_round_trip(values in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 32)) {
            let g = make_grid(8, 1.0).unwrap();
            let data: [Vec<Complex64>; 4] = std::array::from_fn(|s| values[s * 8..(s + 1) * 8].iter().map(|&(a, b)| c(a, b)).collect());
            let f = AmplitudeField::from_slots(&g, Representation::Momentum, PolarizationBasis::Linear, Interpretation::CoherentAmplitude, data).unwrap();
            let circ = to_circular(&f);
            prop_assert!((circ.norm_sqr() - f.norm_sqr()).abs() <= 1e-14 * (1.0 + f.norm_sqr()));
            let back = to_linear(&circ);
            prop_assert!(back.max_abs_diff(&f).unwrap() < 1e-15);
            prop_assert_eq!(back.basis(), PolarizationBasis::Linear);
            // Basis changes commute with representation changes.
            let k = KernelSpec::sqrt_abs_k();
            let a = to_position(&to_circular(&f), &k).unwrap();
            let b = to_circular(&to_position(&f, &k).unwrap());
            prop_assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
        }
    }
}
