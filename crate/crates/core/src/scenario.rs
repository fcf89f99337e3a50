//! Scenario files and the schedule runner.
//!
//! A scenario is a TOML document. Every table except `[grid]` is optional.
//!
//! ```toml
//! [grid]
//! n = 1024
//! dx = 0.5
//!
//! [units]                   # natural units when absent; c = 1/sqrt(epsilon mu)
//! hbar = 1.0
//! epsilon = 1.0
//! mu = 1.0
//! area = 1.0
//!
//! [representation]
//! kernel = "sqrt-abs-k"     # flat | sqrt-abs-k | positive-only
//! phase = 0.0
//! interpretation = "coherent"   # or "single-excitation"
//!
//! [[packets]]
//! name = "left"
//! type = "gaussian"         # gaussian | delta | compensated
//! channel = "+1/H"
//! center = -60.0
//! width = 3.0
//! carrier = 3.0
//! amplitude = [1.0, 0.0]
//!
//! [mirror]
//! type = "bump"             # bump | file
//! half_cells = 4
//! theta = 1.5707963267948966
//!
//! [[schedule]]
//! action = "scatter"        # free | scatter | mirror-evolve | snapshot
//! duration = 120.0
//!
//! [outputs]
//! ledger = "energy_ledger.csv"
//! profiles = true
//! states = "binary"         # binary | ndjson | none
//! spectrum = "spectrum.csv"
//! discrepancy = "discrepancy.csv"
//!
//! [check]
//! horizon = 60.0
//! tolerance = 1e-6
//! ```
//!
//! The runner keeps the state in the Schrödinger picture (momentum
//! representation) and does the picture bookkeeping itself: `scatter` and
//! `mirror-evolve` steps over `[t, t + D]` map the state to the interaction
//! picture with `U₀(-t)`, apply the interaction-picture operator and return
//! with `U₀(t + D)`. The kernel in `[representation]` is the one used for the
//! energy ledger and for written states.
//!
//! An implicit `initial` snapshot is taken before the schedule and an implicit
//! `final` snapshot after it unless the last step already is a snapshot.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::field::{
    band_flat_packet, gaussian_packet, kernel_compensated_packet, to_basis, AmplitudeField,
    Channel, Interpretation, PolarizationBasis, Representation,
};
use crate::grid::{Grid, UnitSystem};
use crate::io::{
    load_kernel, write_profiles_csv, write_spectrum_csv, write_state_binary, write_state_ndjson,
};
use crate::mirror::{
    apply_scattering, evolve_mirror, required_steps, xi_spectrum, MirrorKernel, ScatteringSpectrum,
};
use crate::observables::{energy_by_direction, field_profiles};
use crate::propagation::evolve_free;
use crate::transforms::{to_momentum, to_position, KernelKind, KernelSpec};
use crate::{Error, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    grid: Spanned<RawGrid>,
    units: Option<Spanned<RawUnits>>,
    representation: Option<Spanned<RawRepresentation>>,
    #[serde(default)]
    packets: Vec<Spanned<RawPacket>>,
    mirror: Option<Spanned<RawMirror>>,
    #[serde(default)]
    schedule: Vec<Spanned<RawStep>>,
    outputs: Option<Spanned<RawOutputs>>,
    check: Option<Spanned<RawCheck>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n: usize,
    dx: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUnits {
    #[serde(default = "one")]
    hbar: f64,
    #[serde(default = "one")]
    epsilon: f64,
    #[serde(default = "one")]
    mu: f64,
    #[serde(default = "one")]
    area: f64,
    c: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRepresentation {
    #[serde(default = "default_kernel")]
    kernel: String,
    #[serde(default)]
    phase: f64,
    #[serde(default = "default_interpretation")]
    interpretation: String,
}

fn default_kernel() -> String {
    "sqrt-abs-k".into()
}

fn default_interpretation() -> String {
    "coherent".into()
}

fn default_amplitude() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
enum RawPacket {
    Gaussian {
        name: Option<String>,
        channel: String,
        center: f64,
        width: f64,
        #[serde(default)]
        carrier: f64,
        #[serde(default = "default_amplitude")]
        amplitude: [f64; 2],
    },
    Delta {
        name: Option<String>,
        channel: String,
        center: f64,
        #[serde(default = "default_amplitude")]
        amplitude: [f64; 2],
    },
    Compensated {
        name: Option<String>,
        channel: String,
        center: f64,
        kernel: String,
        #[serde(default)]
        phase: f64,
        #[serde(default = "default_amplitude")]
        amplitude: [f64; 2],
    },
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
enum RawMirror {
    Bump { half_cells: usize, theta: f64 },
    File { path: String },
}

#[derive(Deserialize)]
#[serde(tag = "action", rename_all = "kebab-case", deny_unknown_fields)]
enum RawStep {
    Free { duration: f64 },
    Scatter { duration: f64 },
    MirrorEvolve { duration: f64, steps: Option<usize> },
    Snapshot { label: Option<String> },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutputs {
    ledger: Option<String>,
    profiles: Option<bool>,
    states: Option<String>,
    spectrum: Option<String>,
    discrepancy: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCheck {
    horizon: Option<f64>,
    steps: Option<usize>,
    tolerance: Option<f64>,
}

/// One initial wave packet, already built on the scenario grid (Schrödinger
/// picture, momentum representation, linear basis).
#[derive(Clone, Debug)]
pub struct Packet {
    pub name: String,
    pub shape: PacketShape,
    pub field: AmplitudeField,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PacketShape {
    Gaussian {
        channel: Channel,
        center: f64,
        width: f64,
        carrier: f64,
        amplitude: Complex64,
    },
    Delta {
        channel: Channel,
        center: f64,
        amplitude: Complex64,
    },
    Compensated {
        channel: Channel,
        center: f64,
        kernel: KernelSpec,
        amplitude: Complex64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    Free { duration: f64 },
    Scatter { duration: f64 },
    MirrorEvolve { duration: f64, steps: Option<usize> },
    Snapshot { label: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateFormat {
    Binary,
    Ndjson,
    None,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outputs {
    pub ledger: String,
    pub profiles: bool,
    pub states: StateFormat,
    pub spectrum: Option<String>,
    pub discrepancy: Option<String>,
}

/// Settings for the `check` subcommand.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckSpec {
    pub horizon: Option<f64>,
    pub steps: Option<usize>,
    pub tolerance: f64,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub grid: Grid,
    pub units: UnitSystem,
    pub kernel: KernelSpec,
    pub interpretation: Interpretation,
    pub packets: Vec<Packet>,
    pub mirror: Option<MirrorKernel>,
    pub schedule: Vec<Step>,
    pub outputs: Outputs,
    pub check: CheckSpec,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

struct Ctx<'a> {
    text: &'a str,
}

impl Ctx<'_> {
    fn err<T>(&self, span: std::ops::Range<usize>, message: impl Into<String>) -> Result<T> {
        Err(Error::Scenario {
            line: Some(line_of(self.text, span.start)),
            message: message.into(),
        })
    }

    fn wrap<T>(&self, span: std::ops::Range<usize>, r: Result<T>) -> Result<T> {
        r.or_else(|e| self.err(span, e.to_string()))
    }
}

pub fn parse_kernel(name: &str, phase: f64) -> Result<KernelSpec> {
    let kind = match name {
        "flat" => KernelKind::Flat,
        "sqrt-abs-k" => KernelKind::SqrtAbsK,
        "positive-only" => KernelKind::StandardPositiveOnly,
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown kernel {other:?} (expected flat, sqrt-abs-k or positive-only)"
            )))
        }
    };
    KernelSpec::new(kind, phase)
}

fn check_duration(ctx: &Ctx, span: std::ops::Range<usize>, d: f64) -> Result<f64> {
    if d.is_finite() && d > 0.0 {
        Ok(d)
    } else {
        ctx.err(
            span,
            format!("duration must be finite and positive, got {d}"),
        )
    }
}

fn valid_label(label: &str) -> bool {
    !label.is_empty()
        && label
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl Scenario {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Parses and validates a scenario. Relative file references resolve
    /// against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| Error::Scenario {
            line: e.span().map(|s| line_of(text, s.start)),
            message: e.message().to_string(),
        })?;
        let ctx = Ctx { text };

        let grid_span = raw.grid.span();
        let g = raw.grid.into_inner();
        let grid = ctx.wrap(grid_span, Grid::new(g.n, g.dx))?;

        let units = match raw.units {
            None => UnitSystem::default(),
            Some(u) => {
                let span = u.span();
                let u = u.into_inner();
                let built = match u.c {
                    Some(c) => UnitSystem::new(u.hbar, c, u.epsilon, u.mu, u.area),
                    None => UnitSystem::from_medium(u.hbar, u.epsilon, u.mu, u.area),
                };
                ctx.wrap(span, built)?
            }
        };

        let (kernel, interpretation) = match raw.representation {
            None => (KernelSpec::sqrt_abs_k(), Interpretation::CoherentAmplitude),
            Some(r) => {
                let span = r.span();
                let r = r.into_inner();
                let kernel = ctx.wrap(span.clone(), parse_kernel(&r.kernel, r.phase))?;
                let interpretation = match r.interpretation.as_str() {
                    "coherent" => Interpretation::CoherentAmplitude,
                    "single-excitation" => Interpretation::SingleExcitation,
                    other => return ctx.err(span, format!("unknown interpretation {other:?}")),
                };
                (kernel, interpretation)
            }
        };

        let mut packets = Vec::new();
        let mut names = BTreeSet::new();
        for (i, p) in raw.packets.into_iter().enumerate() {
            let span = p.span();
            let (name, shape) = ctx.wrap(span.clone(), build_packet(&grid, p.into_inner(), i))?;
            if !names.insert(name.clone()) {
                return ctx.err(span, format!("duplicate packet name {name:?}"));
            }
            let mut field = shape.build(&grid)?;
            field.set_interpretation(interpretation);
            packets.push(Packet {
                name,
                shape,
                field: to_basis(&field, PolarizationBasis::Linear),
            });
        }

        let mirror = match raw.mirror {
            None => None,
            Some(m) => {
                let span = m.span();
                let built = match m.into_inner() {
                    RawMirror::Bump { half_cells, theta } => {
                        MirrorKernel::smooth_bump(&grid, half_cells, theta, &units)
                    }
                    RawMirror::File { path } => load_kernel(&base_dir.join(path), &grid),
                };
                Some(ctx.wrap(span, built)?)
            }
        };

        let mut schedule = Vec::new();
        let mut labels: BTreeSet<String> = ["initial".to_string()].into();
        for (i, s) in raw.schedule.into_iter().enumerate() {
            let span = s.span();
            let step = match s.into_inner() {
                RawStep::Free { duration } => Step::Free {
                    duration: check_duration(&ctx, span.clone(), duration)?,
                },
                RawStep::Scatter { duration } => Step::Scatter {
                    duration: check_duration(&ctx, span.clone(), duration)?,
                },
                RawStep::MirrorEvolve { duration, steps } => {
                    if steps == Some(0) {
                        return ctx.err(span, "steps must be positive");
                    }
                    Step::MirrorEvolve {
                        duration: check_duration(&ctx, span.clone(), duration)?,
                        steps,
                    }
                }
                RawStep::Snapshot { label } => {
                    let label = label.unwrap_or_else(|| format!("step{i}"));
                    if !valid_label(&label) {
                        return ctx.err(
                            span,
                            format!("snapshot label {label:?} must be [A-Za-z0-9_-]+"),
                        );
                    }
                    if label == "final" || !labels.insert(label.clone()) {
                        return ctx.err(
                            span,
                            format!("snapshot label {label:?} is reserved or already used"),
                        );
                    }
                    Step::Snapshot { label }
                }
            };
            if matches!(step, Step::Scatter { .. } | Step::MirrorEvolve { .. }) && mirror.is_none()
            {
                return ctx.err(span, "this step needs a [mirror] table");
            }
            schedule.push(step);
        }

        let coherent = interpretation == Interpretation::CoherentAmplitude;
        let outputs = match raw.outputs {
            None => Outputs {
                ledger: "energy_ledger.csv".into(),
                profiles: coherent,
                states: StateFormat::Binary,
                spectrum: None,
                discrepancy: None,
            },
            Some(o) => {
                let span = o.span();
                let o = o.into_inner();
                if o.profiles == Some(true) && !coherent {
                    return ctx.err(
                        span,
                        "field profiles are undefined for single-excitation states",
                    );
                }
                if (o.spectrum.is_some() || o.discrepancy.is_some()) && mirror.is_none() {
                    return ctx.err(
                        span,
                        "spectrum and discrepancy outputs need a [mirror] table",
                    );
                }
                let states = match o.states.as_deref() {
                    None | Some("binary") => StateFormat::Binary,
                    Some("ndjson") => StateFormat::Ndjson,
                    Some("none") => StateFormat::None,
                    Some(other) => return ctx.err(span, format!("unknown state format {other:?}")),
                };
                Outputs {
                    ledger: o.ledger.unwrap_or_else(|| "energy_ledger.csv".into()),
                    profiles: o.profiles.unwrap_or(coherent),
                    states,
                    spectrum: o.spectrum,
                    discrepancy: o.discrepancy,
                }
            }
        };

        let check = match raw.check {
            None => CheckSpec {
                horizon: None,
                steps: None,
                tolerance: 1e-6,
            },
            Some(c) => {
                let span = c.span();
                let c = c.into_inner();
                if c.horizon.is_some_and(|h| !(h.is_finite() && h > 0.0)) {
                    return ctx.err(span, "check horizon must be positive");
                }
                CheckSpec {
                    horizon: c.horizon,
                    steps: c.steps,
                    tolerance: c.tolerance.unwrap_or(1e-6),
                }
            }
        };

        Ok(Self {
            grid,
            units,
            kernel,
            interpretation,
            packets,
            mirror,
            schedule,
            outputs,
            check,
        })
    }

    /// Sum of all packets at `t = 0`.
    pub fn initial_state(&self) -> Result<AmplitudeField> {
        let mut state = AmplitudeField::zeros(
            &self.grid,
            Representation::Momentum,
            PolarizationBasis::Linear,
            self.interpretation,
        );
        for p in &self.packets {
            state = state.add(&p.field)?;
        }
        Ok(state)
    }

    /// Sum of the schedule's durations.
    pub fn total_duration(&self) -> f64 {
        self.schedule
            .iter()
            .map(|s| match s {
                Step::Free { duration }
                | Step::Scatter { duration }
                | Step::MirrorEvolve { duration, .. } => *duration,
                Step::Snapshot { .. } => 0.0,
            })
            .sum()
    }

    /// A copy keeping only the named packets.
    pub fn with_packets(&self, names: &[&str]) -> Self {
        let mut out = self.clone();
        out.packets.retain(|p| names.contains(&p.name.as_str()));
        out
    }
}

fn build_packet(grid: &Grid, raw: RawPacket, index: usize) -> Result<(String, PacketShape)> {
    let amp = |a: [f64; 2]| Complex64::new(a[0], a[1]);
    let default_name = || format!("packet{index}");
    let (name, shape) = match raw {
        RawPacket::Gaussian {
            name,
            channel,
            center,
            width,
            carrier,
            amplitude,
        } => (
            name,
            PacketShape::Gaussian {
                channel: Channel::parse(&channel)?,
                center,
                width,
                carrier,
                amplitude: amp(amplitude),
            },
        ),
        RawPacket::Delta {
            name,
            channel,
            center,
            amplitude,
        } => (
            name,
            PacketShape::Delta {
                channel: Channel::parse(&channel)?,
                center,
                amplitude: amp(amplitude),
            },
        ),
        RawPacket::Compensated {
            name,
            channel,
            center,
            kernel,
            phase,
            amplitude,
        } => (
            name,
            PacketShape::Compensated {
                channel: Channel::parse(&channel)?,
                center,
                kernel: parse_kernel(&kernel, phase)?,
                amplitude: amp(amplitude),
            },
        ),
    };
    shape.build(grid)?;
    Ok((name.unwrap_or_else(default_name), shape))
}

impl PacketShape {
    pub fn channel(&self) -> Channel {
        match self {
            PacketShape::Gaussian { channel, .. }
            | PacketShape::Delta { channel, .. }
            | PacketShape::Compensated { channel, .. } => *channel,
        }
    }

    /// Momentum-space field at `t = 0`.
    pub fn build(&self, grid: &Grid) -> Result<AmplitudeField> {
        match *self {
            PacketShape::Gaussian {
                channel,
                center,
                width,
                carrier,
                amplitude,
            } => gaussian_packet(
                grid,
                channel.direction,
                channel.polarization,
                center,
                width,
                carrier,
                amplitude,
            ),
            PacketShape::Delta {
                channel,
                center,
                amplitude,
            } => Ok(band_flat_packet(
                grid,
                channel.direction,
                channel.polarization,
                center,
                amplitude,
            )
            .0),
            PacketShape::Compensated {
                channel,
                center,
                kernel,
                amplitude,
            } => Ok(kernel_compensated_packet(
                grid,
                &kernel,
                channel.direction,
                channel.polarization,
                center,
                amplitude,
            )
            .0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WarningKind {
    WrapAround,
    BandEdge,
    ScatterWindow,
}

/// Numerical warning, printed by the binary as one JSON object per line.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Warning {
    pub kind: WarningKind,
    pub step: Option<usize>,
    pub time: f64,
    pub message: String,
}

impl Warning {
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "level": "warning",
            "kind": self.kind,
            "step": self.step,
            "time": self.time,
            "message": self.message,
        })
        .to_string()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LedgerRow {
    pub time: f64,
    pub label: String,
    pub energy_total: f64,
    /// `[E(s=+1), E(s=-1)]`.
    pub energy: [f64; 2],
    pub fractions: [f64; 2],
}

/// Both engines on one scatter or mirror-evolve step, compared in the
/// interaction picture (flat position representation).
#[derive(Clone, Debug, PartialEq)]
pub struct DiscrepancyRow {
    pub step: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub steps: usize,
    pub channel_discrepancy: [f64; 4],
    pub fractions_scattering: [f64; 2],
    pub fractions_dynamics: [f64; 2],
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub ledger: Vec<LedgerRow>,
    pub warnings: Vec<Warning>,
    pub discrepancies: Vec<DiscrepancyRow>,
    /// Schrödinger-picture state after the schedule (momentum, linear basis).
    pub final_state: AmplitudeField,
    pub final_time: f64,
    /// Files written, in order.
    pub files: Vec<PathBuf>,
}

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    /// Worker threads for snapshot processing. Output is identical for any value.
    pub threads: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { threads: 1 }
    }
}

/// RK4 step count for a mirror window: at least [`required_steps`], doubled,
/// and rounded up to a multiple of the number of lattice cells swept so the
/// interpolation kinks fall on step boundaries.
pub fn suggested_steps(
    kernel: &MirrorKernel,
    t_start: f64,
    t_end: f64,
    units: &UnitSystem,
) -> usize {
    let base = 2 * required_steps(kernel, t_start, t_end, units);
    let cells = (units.c * (t_end - t_start).abs() / kernel.dx()).round() as usize;
    if cells == 0 {
        base.max(1)
    } else {
        base.div_ceil(cells).max(1) * cells
    }
}

const SIGNIFICANT: f64 = 1e-9;
const BAND_EDGE_FRACTION: f64 = 0.8;
const BAND_EDGE_WEIGHT: f64 = 1e-6;

fn band_edge_weight(state: &AmplitudeField) -> f64 {
    let grid = state.grid();
    let cut = BAND_EDGE_FRACTION * grid.k_max();
    let mut high = 0.0;
    let mut total = 0.0;
    for slot in state.slots() {
        for (v, &k) in slot.iter().zip(grid.k_values()) {
            total += v.norm_sqr();
            if k.abs() > cut {
                high += v.norm_sqr();
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        high / total
    }
}

/// Flags packets that would wrap around the torus during `[t, t + duration]`
/// and, for `scatter`, parts that are not cleanly incoming at `t` and
/// outgoing at `t + duration`.
fn window_warnings(
    state: &AmplitudeField,
    t: f64,
    duration: f64,
    mirror: Option<&MirrorKernel>,
    step: usize,
    units: &UnitSystem,
) -> Result<Vec<Warning>> {
    let grid = state.grid();
    let flat = to_position(state, &KernelSpec::flat())?;
    let peak = flat.max_abs();
    let mut out = Vec::new();
    if peak == 0.0 {
        return Ok(out);
    }
    let half = grid.length() / 2.0;
    let reach = mirror
        .and_then(|m| m.extent(grid))
        .map(|(lo, hi)| lo.abs().max(hi.abs()) + grid.dx());
    let d = units.c * duration;
    let mut wrap = None;
    let mut window = None;
    for (slot, dir) in AmplitudeField::slot_directions() {
        let s = dir.sign();
        for (j, v) in flat.slot(slot).iter().enumerate() {
            if v.norm() <= SIGNIFICANT * peak {
                continue;
            }
            let x = grid.x(j);
            let end = x + s * d;
            if wrap.is_none() && (end < -half || end >= half) {
                wrap = Some(format!(
                    "{} content at x = {x} reaches {end}, beyond the box edge",
                    flat.slot_channel(slot).label()
                ));
            }
            if let (Some(r), None) = (reach, &window) {
                let problem = if x.abs() <= r || end.abs() <= r {
                    Some("overlaps the mirror at the window edges")
                } else if s * x > 0.0 {
                    Some("is already outgoing")
                } else if s * end < 0.0 {
                    Some("does not reach the mirror")
                } else {
                    None
                };
                if let Some(p) = problem {
                    window = Some(format!(
                        "{} content at x = {x} {p}",
                        flat.slot_channel(slot).label()
                    ));
                }
            }
        }
    }
    if let Some(message) = wrap {
        out.push(Warning {
            kind: WarningKind::WrapAround,
            step: Some(step),
            time: t,
            message,
        });
    }
    if let Some(message) = window {
        out.push(Warning {
            kind: WarningKind::ScatterWindow,
            step: Some(step),
            time: t,
            message,
        });
    }
    Ok(out)
}

fn fractions(e: [f64; 2]) -> [f64; 2] {
    let total = e[0] + e[1];
    if total == 0.0 {
        [0.0, 0.0]
    } else {
        [e[0] / total, e[1] / total]
    }
}

fn scatter_step(
    state: &AmplitudeField,
    spectrum: &ScatteringSpectrum,
    t: f64,
    duration: f64,
    units: &UnitSystem,
) -> Result<(AmplitudeField, AmplitudeField)> {
    let interaction = evolve_free(state, -t, units)?;
    let out = apply_scattering(&interaction, spectrum)?;
    Ok((evolve_free(&out, t + duration, units)?, out))
}

fn mirror_step(
    state: &AmplitudeField,
    kernel: &MirrorKernel,
    t: f64,
    duration: f64,
    steps: usize,
    units: &UnitSystem,
) -> Result<(AmplitudeField, AmplitudeField)> {
    let interaction = to_position(&evolve_free(state, -t, units)?, &KernelSpec::flat())?;
    let out = to_momentum(&evolve_mirror(
        &interaction,
        kernel,
        t,
        t + duration,
        steps,
        units,
    )?)?;
    Ok((evolve_free(&out, t + duration, units)?, out))
}

struct Snapshot {
    label: String,
    time: f64,
    state: AmplitudeField,
}

/// Runs the schedule and writes the requested outputs into `out_dir`.
pub fn run(scenario: &Scenario, out_dir: &Path, options: &RunOptions) -> Result<RunReport> {
    std::fs::create_dir_all(out_dir)?;
    let units = &scenario.units;
    let mut state = scenario.initial_state()?;
    let mut t = 0.0;
    let mut warnings = Vec::new();
    let mut discrepancies = Vec::new();
    let mut files = Vec::new();

    let edge = band_edge_weight(&state);
    if edge > BAND_EDGE_WEIGHT {
        warnings.push(Warning {
            kind: WarningKind::BandEdge,
            step: None,
            time: 0.0,
            message: format!("{edge:.3e} of the weight sits above 0.8 k_max"),
        });
    }

    let spectrum = match &scenario.mirror {
        Some(m) => Some(xi_spectrum(m, &scenario.grid, units)?),
        None => None,
    };
    if let (Some(sp), Some(name)) = (&spectrum, &scenario.outputs.spectrum) {
        let path = out_dir.join(name);
        let mut w = BufWriter::new(File::create(&path)?);
        write_spectrum_csv(sp, &mut w)?;
        w.flush()?;
        files.push(path);
    }

    let mut snapshots = vec![Snapshot {
        label: "initial".into(),
        time: 0.0,
        state: state.clone(),
    }];
    for (i, step) in scenario.schedule.iter().enumerate() {
        match step {
            Step::Free { duration } => {
                warnings.extend(window_warnings(&state, t, *duration, None, i, units)?);
                state = evolve_free(&state, *duration, units)?;
                t += duration;
            }
            Step::Scatter { duration } | Step::MirrorEvolve { duration, .. } => {
                let kernel = scenario.mirror.as_ref().expect("validated at parse time");
                let spectrum = spectrum.as_ref().expect("validated at parse time");
                let is_scatter = matches!(step, Step::Scatter { .. });
                let mirror_for_window = is_scatter.then_some(kernel);
                warnings.extend(window_warnings(
                    &state,
                    t,
                    *duration,
                    mirror_for_window,
                    i,
                    units,
                )?);
                let steps = match step {
                    Step::MirrorEvolve { steps: Some(s), .. } => *s,
                    _ => suggested_steps(kernel, t, t + duration, units),
                };
                let compare = scenario.outputs.discrepancy.is_some();
                let (next, closed, dynamic) = if is_scatter {
                    let (next, closed) = scatter_step(&state, spectrum, t, *duration, units)?;
                    let dynamic = if compare {
                        Some(mirror_step(&state, kernel, t, *duration, steps, units)?.1)
                    } else {
                        None
                    };
                    (next, Some(closed), dynamic)
                } else {
                    let (next, dynamic) = mirror_step(&state, kernel, t, *duration, steps, units)?;
                    let closed = if compare {
                        Some(scatter_step(&state, spectrum, t, *duration, units)?.1)
                    } else {
                        None
                    };
                    (next, closed, Some(dynamic))
                };
                if let (Some(a), Some(b)) = (closed, dynamic) {
                    discrepancies.push(compare_engines(
                        &a,
                        &b,
                        i,
                        t,
                        t + duration,
                        steps,
                        &scenario.kernel,
                        units,
                    )?);
                }
                state = next;
                t += duration;
            }
            Step::Snapshot { label } => snapshots.push(Snapshot {
                label: label.clone(),
                time: t,
                state: state.clone(),
            }),
        }
    }
    if !scenario.schedule.is_empty()
        && !matches!(scenario.schedule.last(), Some(Step::Snapshot { .. }))
    {
        snapshots.push(Snapshot {
            label: "final".into(),
            time: t,
            state: state.clone(),
        });
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.threads.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let processed: Vec<Result<(LedgerRow, Vec<PathBuf>)>> = pool.install(|| {
        snapshots
            .par_iter()
            .map(|s| process_snapshot(scenario, s, out_dir))
            .collect()
    });

    let mut ledger = Vec::with_capacity(processed.len());
    for p in processed {
        let (row, written) = p?;
        ledger.push(row);
        files.extend(written);
    }

    let ledger_path = out_dir.join(&scenario.outputs.ledger);
    write_ledger(&ledger, &ledger_path)?;
    files.push(ledger_path);
    if let Some(name) = &scenario.outputs.discrepancy {
        let path = out_dir.join(name);
        write_discrepancies(&discrepancies, &path)?;
        files.push(path);
    }

    Ok(RunReport {
        ledger,
        warnings,
        discrepancies,
        final_state: state,
        final_time: t,
        files,
    })
}

#[allow(clippy::too_many_arguments)]
fn compare_engines(
    closed: &AmplitudeField,
    dynamic: &AmplitudeField,
    step: usize,
    t_start: f64,
    t_end: f64,
    steps: usize,
    kernel: &KernelSpec,
    units: &UnitSystem,
) -> Result<DiscrepancyRow> {
    let flat = KernelSpec::flat();
    let a = to_position(closed, &flat)?;
    let b = to_position(dynamic, &flat)?;
    let mut channel_discrepancy = [0.0; 4];
    for (slot, d) in channel_discrepancy.iter_mut().enumerate() {
        *d = a
            .slot(slot)
            .iter()
            .zip(b.slot(slot))
            .map(|(p, q)| (p - q).norm())
            .fold(0.0, f64::max);
    }
    Ok(DiscrepancyRow {
        step,
        t_start,
        t_end,
        steps,
        channel_discrepancy,
        fractions_scattering: fractions(energy_by_direction(closed, kernel, units)?),
        fractions_dynamics: fractions(energy_by_direction(dynamic, kernel, units)?),
    })
}

fn process_snapshot(
    scenario: &Scenario,
    snap: &Snapshot,
    out_dir: &Path,
) -> Result<(LedgerRow, Vec<PathBuf>)> {
    let units = &scenario.units;
    let energy = energy_by_direction(&snap.state, &scenario.kernel, units)?;
    let row = LedgerRow {
        time: snap.time,
        label: snap.label.clone(),
        energy_total: energy[0] + energy[1],
        energy,
        fractions: fractions(energy),
    };
    let mut written = Vec::new();
    if scenario.outputs.profiles {
        let sq = match scenario.kernel.kind() {
            KernelKind::SqrtAbsK => scenario.kernel,
            _ => KernelSpec::sqrt_abs_k(),
        };
        let profiles = field_profiles(&to_position(&snap.state, &sq)?, units)?;
        let path = out_dir.join(format!("profiles_{}.csv", snap.label));
        let mut w = BufWriter::new(File::create(&path)?);
        write_profiles_csv(&profiles, units, &sq, &mut w)?;
        w.flush()?;
        written.push(path);
    }
    let state_file = match scenario.outputs.states {
        StateFormat::None => None,
        StateFormat::Binary => Some("bin"),
        StateFormat::Ndjson => Some("ndjson"),
    };
    if let Some(ext) = state_file {
        let positioned = to_position(&snap.state, &scenario.kernel)?;
        let path = out_dir.join(format!("state_{}.{ext}", snap.label));
        let mut w = BufWriter::new(File::create(&path)?);
        if ext == "bin" {
            write_state_binary(&positioned, &mut w)?;
        } else {
            write_state_ndjson(&positioned, &mut w)?;
        }
        w.flush()?;
        written.push(path);
    }
    Ok((row, written))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

pub fn write_ledger(rows: &[LedgerRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record([
        "time",
        "label",
        "energy_total",
        "energy_right",
        "energy_left",
        "frac_s_plus",
        "frac_s_minus",
    ])
    .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.time.to_string(),
            r.label.clone(),
            r.energy_total.to_string(),
            r.energy[0].to_string(),
            r.energy[1].to_string(),
            r.fractions[0].to_string(),
            r.fractions[1].to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn write_discrepancies(rows: &[DiscrepancyRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record([
        "step",
        "t_start",
        "t_end",
        "rk4_steps",
        "max_discrepancy",
        "d_plus_0",
        "d_plus_1",
        "d_minus_0",
        "d_minus_1",
        "frac_plus_scattering",
        "frac_minus_scattering",
        "frac_plus_dynamics",
        "frac_minus_dynamics",
    ])
    .map_err(csv_err)?;
    for r in rows {
        let max = r.channel_discrepancy.iter().cloned().fold(0.0, f64::max);
        let mut rec = vec![
            r.step.to_string(),
            r.t_start.to_string(),
            r.t_end.to_string(),
            r.steps.to_string(),
            max.to_string(),
        ];
        rec.extend(r.channel_discrepancy.iter().map(|d| d.to_string()));
        rec.extend(
            r.fractions_scattering
                .iter()
                .chain(&r.fractions_dynamics)
                .map(|f| f.to_string()),
        );
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
