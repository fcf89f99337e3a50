//! File formats.
//!
//! Binary state (`.bin`, little-endian):
//!
//! ```text
//! magic      b"LMF1"
//! n_points   u64
//! dx         f64
//! repr       u8     0 = momentum, 1 = position
//! kernel     u8     0 = flat, 1 = sqrt_abs_k, 2 = positive_only (ignored for momentum)
//! phase      f64    kernel phase
//! basis      u8     0 = linear, 1 = circular
//! interp     u8     0 = coherent amplitude, 1 = single excitation
//! data       4·n × (re f64, im f64), slots (+1,λ0), (+1,λ1), (-1,λ0), (-1,λ1)
//! ```
//!
//! NDJSON state: one `{"channel": "+1/H", "index": j, "re": .., "im": ..}`
//! record per amplitude. Dense kernels: `b"LMK1"`, `n u64`, `dx f64`, then
//! `n²` row-major `f64`. Separable kernels and spectra are CSV.

use std::io::{BufRead, Read, Write};

use num_complex::Complex64;

use crate::field::{AmplitudeField, Channel, Interpretation, PolarizationBasis, Representation};
use crate::grid::{Grid, UnitSystem};
use crate::mirror::{MirrorKernel, ScatteringSpectrum};
use crate::observables::FieldProfiles;
use crate::transforms::{KernelKind, KernelSpec};
use crate::{Error, Result};

const STATE_MAGIC: &[u8; 4] = b"LMF1";
const KERNEL_MAGIC: &[u8; 4] = b"LMK1";

fn fmt_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

fn read_array<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_u8(r: &mut impl Read) -> Result<u8> {
    Ok(read_array::<1>(r)?[0])
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    Ok(u64::from_le_bytes(read_array(r)?))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    Ok(f64::from_le_bytes(read_array(r)?))
}

fn kernel_tag(kind: KernelKind) -> u8 {
    match kind {
        KernelKind::Flat => 0,
        KernelKind::SqrtAbsK => 1,
        KernelKind::StandardPositiveOnly => 2,
    }
}

fn kernel_from_tag(tag: u8) -> Result<KernelKind> {
    Ok(match tag {
        0 => KernelKind::Flat,
        1 => KernelKind::SqrtAbsK,
        2 => KernelKind::StandardPositiveOnly,
        other => return Err(fmt_err(format!("unknown kernel tag {other}"))),
    })
}

pub fn write_state_binary(field: &AmplitudeField, w: &mut impl Write) -> Result<()> {
    w.write_all(STATE_MAGIC)?;
    w.write_all(&(field.grid().n_points() as u64).to_le_bytes())?;
    w.write_all(&field.grid().dx().to_le_bytes())?;
    let (repr, kernel) = match field.representation() {
        Representation::Momentum => (0u8, KernelSpec::flat()),
        Representation::Position(k) => (1u8, k),
    };
    w.write_all(&[repr, kernel_tag(kernel.kind())])?;
    w.write_all(&kernel.phase().to_le_bytes())?;
    let basis = match field.basis() {
        PolarizationBasis::Linear => 0u8,
        PolarizationBasis::Circular => 1,
    };
    let interp = match field.interpretation() {
        Interpretation::CoherentAmplitude => 0u8,
        Interpretation::SingleExcitation => 1,
    };
    w.write_all(&[basis, interp])?;
    for slot in field.slots() {
        for v in slot {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_state_binary(r: &mut impl Read) -> Result<AmplitudeField> {
    if &read_array::<4>(r)? != STATE_MAGIC {
        return Err(fmt_err("not a state file (bad magic)"));
    }
    let n = read_u64(r)? as usize;
    let dx = read_f64(r)?;
    let grid = Grid::new(n, dx)?;
    let repr = read_u8(r)?;
    let kind = kernel_from_tag(read_u8(r)?)?;
    let phase = read_f64(r)?;
    let representation = match repr {
        0 => Representation::Momentum,
        1 => Representation::Position(KernelSpec::new(kind, phase)?),
        other => return Err(fmt_err(format!("unknown representation tag {other}"))),
    };
    let basis = match read_u8(r)? {
        0 => PolarizationBasis::Linear,
        1 => PolarizationBasis::Circular,
        other => return Err(fmt_err(format!("unknown basis tag {other}"))),
    };
    let interpretation = match read_u8(r)? {
        0 => Interpretation::CoherentAmplitude,
        1 => Interpretation::SingleExcitation,
        other => return Err(fmt_err(format!("unknown interpretation tag {other}"))),
    };
    let mut data: [Vec<Complex64>; 4] = Default::default();
    for slot in data.iter_mut() {
        slot.reserve(n);
        for _ in 0..n {
            let re = read_f64(r)?;
            let im = read_f64(r)?;
            slot.push(Complex64::new(re, im));
        }
    }
    if r.read(&mut [0u8; 1])? != 0 {
        return Err(fmt_err("trailing bytes after state data"));
    }
    AmplitudeField::from_slots(&grid, representation, basis, interpretation, data)
}

#[derive(serde::Serialize, serde::Deserialize)]
struct Record {
    channel: String,
    index: usize,
    re: f64,
    im: f64,
}

/// One record per amplitude, slot by slot.
pub fn write_state_ndjson(field: &AmplitudeField, w: &mut impl Write) -> Result<()> {
    for slot in 0..4 {
        let channel = field.slot_channel(slot).label();
        for (index, v) in field.slot(slot).iter().enumerate() {
            let rec = Record {
                channel: channel.clone(),
                index,
                re: v.re,
                im: v.im,
            };
            serde_json::to_writer(&mut *w, &rec).map_err(|e| fmt_err(e.to_string()))?;
            w.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Reads NDJSON records onto the grid and metadata of `template`. Missing
/// records stay zero; channels must belong to the template's basis.
pub fn read_state_ndjson(r: impl BufRead, template: &AmplitudeField) -> Result<AmplitudeField> {
    let mut out = template.clone();
    for slot in 0..4 {
        out.slot_mut(slot)
            .iter_mut()
            .for_each(|v| *v = Complex64::new(0.0, 0.0));
    }
    let n = template.grid().n_points();
    for (line_no, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(&line)
            .map_err(|e| fmt_err(format!("line {}: {e}", line_no + 1)))?;
        let channel = Channel::parse(&rec.channel)?;
        if channel.polarization.basis() != template.basis() {
            return Err(fmt_err(format!(
                "line {}: channel {} is not in the {:?} basis",
                line_no + 1,
                rec.channel,
                template.basis()
            )));
        }
        if rec.index >= n {
            return Err(fmt_err(format!(
                "line {}: index {} out of range",
                line_no + 1,
                rec.index
            )));
        }
        if !(rec.re.is_finite() && rec.im.is_finite()) {
            return Err(Error::NonFinite(format!("line {}", line_no + 1)));
        }
        out.channel_mut(channel.direction, channel.polarization)[rec.index] =
            Complex64::new(rec.re, rec.im);
    }
    Ok(out)
}

/// Grid recorded in a `# grid n=.. dx=..` comment line, if present.
pub fn separable_kernel_csv_grid(r: impl BufRead) -> Result<Option<Grid>> {
    for line in r.lines() {
        let line = line?;
        let Some(rest) = line.trim().strip_prefix("# grid") else {
            continue;
        };
        let mut n = None;
        let mut dx = None;
        for part in rest.split_whitespace() {
            match part.split_once('=') {
                Some(("n", v)) => n = v.parse::<usize>().ok(),
                Some(("dx", v)) => dx = v.parse::<f64>().ok(),
                _ => {}
            }
        }
        return match (n, dx) {
            (Some(n), Some(dx)) => Ok(Some(Grid::new(n, dx)?)),
            _ => Err(fmt_err(format!("malformed grid comment {line:?}"))),
        };
    }
    Ok(None)
}

/// Separable kernel CSV with header `x,omega`. Rows are matched to lattice
/// points (to 1e-6 dx); unlisted points are zero.
pub fn read_separable_kernel_csv(r: impl Read, grid: &Grid) -> Result<MirrorKernel> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut omega = vec![0.0; grid.n_points()];
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| fmt_err(e.to_string()))?;
        let parse = |k: usize| -> Result<f64> {
            rec.get(k)
                .ok_or_else(|| fmt_err(format!("row {}: missing column", i + 1)))?
                .parse::<f64>()
                .map_err(|e| fmt_err(format!("row {}: {e}", i + 1)))
        };
        let (x, w) = (parse(0)?, parse(1)?);
        let j = grid.nearest_x_index(x);
        if (grid.x(j) - x).abs() > 1e-6 * grid.dx() {
            return Err(fmt_err(format!(
                "row {}: x = {x} is not a lattice point",
                i + 1
            )));
        }
        omega[j] = w;
    }
    MirrorKernel::separable(grid, omega)
}

/// Writes `x,omega` rows for the nonzero samples, preceded by a
/// `# grid n=.. dx=..` comment that [`separable_kernel_csv_grid`] reads back.
pub fn write_separable_kernel_csv(
    kernel: &MirrorKernel,
    grid: &Grid,
    mut w: impl Write,
) -> Result<()> {
    let MirrorKernel::Separable(k) = kernel else {
        return Err(Error::InvalidKernel("not a separable kernel".into()));
    };
    writeln!(w, "# grid n={} dx={}", grid.n_points(), grid.dx())?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x", "omega"])
        .map_err(|e| fmt_err(e.to_string()))?;
    for (j, &v) in k.omega().iter().enumerate() {
        if v != 0.0 {
            out.write_record([grid.x(j).to_string(), v.to_string()])
                .map_err(|e| fmt_err(e.to_string()))?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_dense_kernel(kernel: &MirrorKernel, w: &mut impl Write) -> Result<()> {
    let MirrorKernel::Dense(k) = kernel.to_dense() else {
        unreachable!()
    };
    w.write_all(KERNEL_MAGIC)?;
    w.write_all(&(k.n_points() as u64).to_le_bytes())?;
    w.write_all(&k.dx().to_le_bytes())?;
    for v in k.omega() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Dense kernel binary. The header must match `grid`.
pub fn read_dense_kernel(r: &mut impl Read, grid: &Grid) -> Result<MirrorKernel> {
    if &read_array::<4>(r)? != KERNEL_MAGIC {
        return Err(fmt_err("not a dense kernel file (bad magic)"));
    }
    let n = read_u64(r)? as usize;
    let dx = read_f64(r)?;
    if n != grid.n_points() || dx != grid.dx() {
        return Err(fmt_err(format!(
            "kernel grid (n = {n}, dx = {dx}) does not match ({}, {})",
            grid.n_points(),
            grid.dx()
        )));
    }
    let mut omega = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        omega.push(read_f64(r)?);
    }
    MirrorKernel::dense(grid, omega)
}

/// Loads a kernel by extension: `.csv` → separable, anything else → dense binary.
pub fn load_kernel(path: &std::path::Path, grid: &Grid) -> Result<MirrorKernel> {
    let file = std::fs::File::open(path)?;
    if path.extension().is_some_and(|e| e == "csv") {
        read_separable_kernel_csv(file, grid)
    } else {
        read_dense_kernel(&mut std::io::BufReader::new(file), grid)
    }
}

/// Grid a kernel file was written for: the `# grid` comment of a CSV file or
/// the header of a dense binary file.
pub fn kernel_file_grid(path: &std::path::Path) -> Result<Option<Grid>> {
    let file = std::fs::File::open(path)?;
    if path.extension().is_some_and(|e| e == "csv") {
        return separable_kernel_csv_grid(std::io::BufReader::new(file));
    }
    let mut r = std::io::BufReader::new(file);
    if &read_array::<4>(&mut r)? != KERNEL_MAGIC {
        return Err(fmt_err("not a dense kernel file (bad magic)"));
    }
    let n = read_u64(&mut r)? as usize;
    let dx = read_f64(&mut r)?;
    Ok(Some(Grid::new(n, dx)?))
}

/// `k, re_xi, im_xi, abs_xi, sin2, cos2`.
pub fn write_spectrum_csv(spectrum: &ScatteringSpectrum, w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["k", "re_xi", "im_xi", "abs_xi", "sin2", "cos2"])
        .map_err(|e| fmt_err(e.to_string()))?;
    for (k, xi) in spectrum.k.iter().zip(&spectrum.xi) {
        let a = xi.norm();
        out.write_record([
            k.to_string(),
            xi.re.to_string(),
            xi.im.to_string(),
            a.to_string(),
            a.sin().powi(2).to_string(),
            a.cos().powi(2).to_string(),
        ])
        .map_err(|e| fmt_err(e.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

/// Profiles CSV: `#` header lines with units and kernel, then
/// `x,E_y,E_z,B_y,B_z,u`.
pub fn write_profiles_csv(
    profiles: &FieldProfiles,
    units: &UnitSystem,
    kernel: &KernelSpec,
    mut w: impl Write,
) -> Result<()> {
    writeln!(
        w,
        "# units: hbar={} c={} epsilon={} mu={} area={}",
        units.hbar, units.c, units.epsilon, units.mu, units.area
    )?;
    writeln!(w, "# kernel: {} phase={}", kernel.kind(), kernel.phase())?;
    writeln!(w, "# u: normal-ordered energy density in hbar*c per length")?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x", "E_y", "E_z", "B_y", "B_z", "u"])
        .map_err(|e| fmt_err(e.to_string()))?;
    for j in 0..profiles.x.len() {
        out.write_record([
            profiles.x[j].to_string(),
            profiles.e_y[j].to_string(),
            profiles.e_z[j].to_string(),
            profiles.b_y[j].to_string(),
            profiles.b_z[j].to_string(),
            profiles.energy_density[j].to_string(),
        ])
        .map_err(|e| fmt_err(e.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{gaussian_packet, Direction, Polarization};
    use crate::grid::make_grid;
    use crate::transforms::to_position;

    fn sample() -> AmplitudeField {
        let g = make_grid(32, 0.5).unwrap();
        let f = gaussian_packet(
            &g,
            Direction::Left,
            Polarization::V,
            1.0,
            1.5,
            0.2,
            Complex64::new(0.3, 0.4),
        )
        .unwrap();
        to_position(&f, &KernelSpec::new(KernelKind::SqrtAbsK, 0.7).unwrap()).unwrap()
    }

    #[test]
    fn binary_round_trip() {
        let f = sample();
        let mut buf = Vec::new();
        write_state_binary(&f, &mut buf).unwrap();
        assert_eq!(buf.len(), 4 + 8 + 8 + 2 + 8 + 2 + 4 * 32 * 16);
        let back = read_state_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(back, f);
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_state_binary(&mut bad.as_slice()).is_err());
        assert!(read_state_binary(&mut &buf[..buf.len() - 3]).is_err());
        let mut longer = buf.clone();
        longer.push(0);
        assert!(read_state_binary(&mut longer.as_slice()).is_err());
    }

    #[test]
    fn ndjson_round_trip() {
        let f = sample();
        let mut buf = Vec::new();
        write_state_ndjson(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 128);
        assert!(text
            .lines()
            .next()
            .unwrap()
            .contains("\"channel\":\"+1/H\""));
        let back = read_state_ndjson(buf.as_slice(), &f).unwrap();
        assert_eq!(back, f);
        let bad = b"{\"channel\":\"+1/+\",\"index\":0,\"re\":1,\"im\":0}\n";
        assert!(read_state_ndjson(&bad[..], &f).is_err());
        let bad = b"{\"channel\":\"+1/H\",\"index\":99,\"re\":1,\"im\":0}\n";
        assert!(read_state_ndjson(&bad[..], &f).is_err());
    }

    #[test]
    fn kernel_files() {
        let g = make_grid(32, 0.5).unwrap();
        let k = MirrorKernel::smooth_bump(&g, 3, 1.0, &UnitSystem::default()).unwrap();
        let mut csv_buf = Vec::new();
        write_separable_kernel_csv(&k, &g, &mut csv_buf).unwrap();
        let back = read_separable_kernel_csv(csv_buf.as_slice(), &g).unwrap();
        let (MirrorKernel::Separable(a), MirrorKernel::Separable(b)) = (&k, &back) else {
            panic!()
        };
        for (x, y) in a.omega().iter().zip(b.omega()) {
            assert_eq!(x, y);
        }
        assert!(read_separable_kernel_csv(&b"x,omega\n0.25,1.0\n"[..], &g).is_err());
        let recorded = separable_kernel_csv_grid(csv_buf.as_slice())
            .unwrap()
            .unwrap();
        assert!(recorded.same_layout(&g));
        assert!(separable_kernel_csv_grid(&b"x,omega\n"[..])
            .unwrap()
            .is_none());
        assert!(separable_kernel_csv_grid(&b"# grid n=abc\n"[..]).is_err());
        let dir = tempfile::tempdir().unwrap();
        let csv_path = dir.path().join("k.csv");
        std::fs::write(&csv_path, &csv_buf).unwrap();
        assert!(kernel_file_grid(&csv_path)
            .unwrap()
            .unwrap()
            .same_layout(&g));

        let mut bin = Vec::new();
        write_dense_kernel(&k, &mut bin).unwrap();
        let dense = read_dense_kernel(&mut bin.as_slice(), &g).unwrap();
        let bin_path = dir.path().join("k.lmk");
        std::fs::write(&bin_path, &bin).unwrap();
        assert!(kernel_file_grid(&bin_path)
            .unwrap()
            .unwrap()
            .same_layout(&g));
        assert_eq!(load_kernel(&bin_path, &g).unwrap(), k.to_dense());
        assert_eq!(dense, k.to_dense());
        let other = make_grid(32, 0.25).unwrap();
        assert!(read_dense_kernel(&mut bin.as_slice(), &other).is_err());
    }

    #[test]
    fn spectrum_and_profiles_csv() {
        let g = make_grid(8, 1.0).unwrap();
        let spectrum = ScatteringSpectrum {
            k: g.k_values().to_vec(),
            xi: vec![Complex64::new(0.0, 0.5); 8],
        };
        let mut buf = Vec::new();
        write_spectrum_csv(&spectrum, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("k,re_xi,im_xi,abs_xi,sin2,cos2\n"));
        assert_eq!(text.lines().count(), 9);

        let p = crate::observables::field_profiles(&sample(), &UnitSystem::default()).unwrap();
        let mut buf = Vec::new();
        write_profiles_csv(
            &p,
            &UnitSystem::default(),
            &KernelSpec::sqrt_abs_k(),
            &mut buf,
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().any(|l| l == "x,E_y,E_z,B_y,B_z,u"));
        assert!(text.starts_with("# units:"));
    }
}
