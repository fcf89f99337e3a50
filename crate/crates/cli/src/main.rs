use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use locmirror::field::to_basis;
use locmirror::io::{
    kernel_file_grid, load_kernel, read_state_binary, write_profiles_csv, write_spectrum_csv,
    write_state_binary, write_state_ndjson,
};
use locmirror::mirror::{circular_basis, scattering_unitary};
use locmirror::scenario::{self, PacketShape, RunOptions, Scenario};
use locmirror::{
    apply_scattering, energy_total, evolve_free, evolve_mirror, field_profiles,
    scattering_equivalence_check, to_momentum, to_position, xi_spectrum, AmplitudeField, Grid,
    KernelSpec, MirrorKernel, PolarizationBasis, Representation, UnitSystem,
};
use locmirror_oracle as oracle;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(
    name = "locmirror",
    version,
    about = "Two-sided mirror scattering of the 1D quantised field"
)]
struct Cli {
    /// Directory for output files.
    #[arg(long, global = true, env = "LOCMIRROR_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads for snapshot processing.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Treat numerical warnings as errors.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Free evolution of a state file.
    Propagate {
        #[command(flatten)]
        io: StateIo,
        #[arg(long)]
        time: f64,
    },
    /// Closed-form scattering operator on an interaction-picture state.
    Scatter {
        #[command(flatten)]
        io: StateIo,
        #[arg(long)]
        kernel: PathBuf,
    },
    /// Scattering spectrum Ξ_k of a kernel file as CSV.
    Spectrum {
        #[arg(long)]
        kernel: PathBuf,
        /// Lattice size when the kernel file does not record it.
        #[arg(long, requires = "dx")]
        n: Option<usize>,
        #[arg(long)]
        dx: Option<f64>,
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// RK4 mirror dynamics on an interaction-picture state.
    MirrorEvolve {
        #[command(flatten)]
        io: StateIo,
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        t_start: f64,
        #[arg(long)]
        t_end: f64,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// E/B/energy-density profiles of a state file as CSV.
    Observables {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Engine-equivalence and oracle gates for a scenario.
    Check {
        #[arg(long)]
        scenario: PathBuf,
    },
}

#[derive(Args)]
struct StateIo {
    /// Binary state file.
    #[arg(long)]
    state: PathBuf,
    /// Output state file (`.ndjson` for NDJSON, binary otherwise).
    #[arg(long)]
    output: PathBuf,
    /// Scenario whose unit system to use (natural units otherwise).
    #[arg(long)]
    scenario: Option<PathBuf>,
}

fn load_scenario(path: &Path) -> Result<Scenario> {
    Ok(Scenario::from_path(path)?)
}

fn units_from(scenario: &Option<PathBuf>) -> Result<UnitSystem> {
    match scenario {
        Some(p) => Ok(load_scenario(p)?.units),
        None => Ok(UnitSystem::default()),
    }
}

fn read_state(path: &Path) -> Result<AmplitudeField> {
    let mut r =
        BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
    read_state_binary(&mut r).with_context(|| format!("reading {}", path.display()))
}

fn write_state(field: &AmplitudeField, path: &Path) -> Result<()> {
    let mut w =
        BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    if path.extension().is_some_and(|e| e == "ndjson") {
        write_state_ndjson(field, &mut w)?;
    } else {
        write_state_binary(field, &mut w)?;
    }
    w.flush()?;
    Ok(())
}

/// Puts `field` (momentum) back into the representation of `like`.
fn restore_representation(field: &AmplitudeField, like: &AmplitudeField) -> Result<AmplitudeField> {
    let out = match like.representation() {
        Representation::Momentum => field.clone(),
        Representation::Position(k) => to_position(field, &k)?,
    };
    Ok(to_basis(&out, like.basis()))
}

fn csv_sink(out_dir: &Path, output: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match output {
        Some(p) => {
            std::fs::create_dir_all(out_dir)?;
            Box::new(BufWriter::new(File::create(out_dir.join(p))?))
        }
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn kernel_grid(
    kernel: &Path,
    n: Option<usize>,
    dx: Option<f64>,
    scenario: &Option<PathBuf>,
) -> Result<Grid> {
    if let (Some(n), Some(dx)) = (n, dx) {
        return Ok(Grid::new(n, dx)?);
    }
    if let Some(g) = kernel_file_grid(kernel)? {
        return Ok(g);
    }
    if let Some(p) = scenario {
        return Ok(load_scenario(p)?.grid);
    }
    bail!(
        "{} does not record its grid; pass --n and --dx or --scenario",
        kernel.display()
    )
}

fn run_scenario(cli: &Cli, path: &Path) -> Result<bool> {
    let scenario = load_scenario(path)?;
    let report = scenario::run(
        &scenario,
        &cli.out_dir,
        &RunOptions {
            threads: cli.threads,
        },
    )?;
    for w in &report.warnings {
        eprintln!("{}", w.to_json());
    }
    for row in &report.ledger {
        println!(
            "t = {:<10} {:<12} E = {:.12e}  s=+1 {:.10}  s=-1 {:.10}",
            row.time, row.label, row.energy_total, row.fractions[0], row.fractions[1]
        );
    }
    println!(
        "wrote {} files to {}",
        report.files.len(),
        cli.out_dir.display()
    );
    Ok(report.warnings.is_empty())
}

struct Gate {
    name: String,
    value: Option<f64>,
    tolerance: f64,
    note: String,
    /// Reported but never fails the check.
    diagnostic: bool,
}

impl Gate {
    fn new(name: impl Into<String>, value: Option<f64>, tolerance: f64, note: String) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            note,
            diagnostic: false,
        }
    }

    fn passed(&self) -> bool {
        self.diagnostic || self.value.is_none_or(|v| v <= self.tolerance)
    }
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q).norm())
        .fold(0.0, f64::max)
}

fn check(path: &Path) -> Result<bool> {
    let sc = load_scenario(path)?;
    let units = &sc.units;
    let grid = &sc.grid;
    let kernel = sc
        .mirror
        .as_ref()
        .ok_or_else(|| anyhow!("check needs a [mirror] table"))?;
    let horizon = sc.check.horizon.unwrap_or(sc.total_duration() / 2.0);
    if horizon <= 0.0 {
        bail!("set [check] horizon or give the schedule a positive duration");
    }
    let steps = sc
        .check
        .steps
        .unwrap_or_else(|| scenario::suggested_steps(kernel, -horizon, horizon, units));
    let tol = sc.check.tolerance;
    let mut gates = Vec::new();

    // The scenario's t = 0 is t = -horizon of the check window.
    let incoming = evolve_free(&sc.initial_state()?, horizon, units)?;
    let report = scattering_equivalence_check(&incoming, kernel, horizon, steps, units)?;
    // Dense kernels have no closed-form guarantee at finite resolution, so
    // engine agreement is only reported for them.
    let diagnostic = !kernel.is_separable();
    let suffix = if diagnostic {
        " (dense kernel: diagnostic)"
    } else {
        ""
    };
    let mut equivalence = Gate::new(
        "scattering-vs-dynamics",
        Some(report.max_discrepancy),
        tol,
        format!("{steps} RK4 steps over [-{horizon}, {horizon}]{suffix}"),
    );
    equivalence.diagnostic = diagnostic;
    gates.push(equivalence);
    let split = (0..2)
        .map(|i| (report.fractions_scattering[i] - report.fractions_dynamics[i]).abs())
        .fold(0.0, f64::max);
    let mut split = Gate::new(
        "energy-split",
        Some(split),
        tol,
        format!(
            "reflected {:.10} / {:.10}{suffix}",
            report.fractions_scattering[1], report.fractions_dynamics[1]
        ),
    );
    split.diagnostic = diagnostic;
    gates.push(split);

    let spectrum = xi_spectrum(kernel, grid, units)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let random: Vec<Complex64> = (0..1000)
        .map(|_| Complex64::from_polar(rng.gen_range(0.0..10.0), rng.gen_range(-3.2..3.2)))
        .collect();
    let unitary = spectrum
        .xi
        .iter()
        .chain(&random)
        .map(|&xi| {
            let a = scattering_unitary(xi);
            let b = oracle::dense_unitary_oracle(xi);
            (0..4)
                .map(|i| (a[i / 2][i % 2] - b[i / 2][i % 2]).norm())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    gates.push(Gate::new(
        "unitary-oracle",
        Some(unitary),
        1e-14,
        format!("{} spectrum + 1000 random values", spectrum.len()),
    ));

    let e_in = energy_total(&incoming, &sc.kernel, units)?;
    let e_out = energy_total(&apply_scattering(&incoming, &spectrum)?, &sc.kernel, units)?;
    gates.push(Gate::new(
        "energy-conservation",
        Some(if e_in > 0.0 {
            (e_out - e_in).abs() / e_in
        } else {
            0.0
        }),
        1e-10,
        "relative change under scattering".into(),
    ));

    let flat = KernelSpec::flat();
    for p in &sc.packets {
        let PacketShape::Gaussian {
            channel,
            center,
            width,
            carrier,
            amplitude,
        } = p.shape
        else {
            continue;
        };
        let gate_name = format!("free-translation[{}]", p.name);
        let edge = (-0.5 * (width * (grid.k_max() - carrier.abs())).powi(2)).exp();
        if edge > 1e-13 {
            gates.push(Gate::new(
                gate_name,
                None,
                1e-10,
                format!("skipped: spectrum at band edge {edge:.1e}"),
            ));
            continue;
        }
        let moved = to_position(&evolve_free(&p.field, horizon, units)?, &flat)?;
        let moved = to_basis(&moved, channel.polarization.basis());
        let params = oracle::GaussianParams {
            s: channel.direction.sign(),
            x0: center,
            sigma: width,
            k0: carrier,
            amplitude,
            c: units.c,
        };
        let expected =
            oracle::gaussian_translation_oracle(grid.x_values(), grid.length(), &params, horizon);
        gates.push(Gate::new(
            gate_name,
            Some(max_diff(
                moved.channel(channel.direction, channel.polarization),
                &expected,
            )),
            1e-10,
            format!("t = {horizon}"),
        ));
    }

    if let MirrorKernel::Separable(sep) = kernel {
        let start = circular_basis(&to_position(&incoming, &flat)?);
        let rk4 = circular_basis(&evolve_mirror(
            &start, kernel, -horizon, horizon, steps, units,
        )?);
        let x = grid.x_values();
        let mut worst: f64 = 0.0;
        for (right, left) in [(0usize, 2usize), (1, 3)] {
            for j in 0..grid.n_points() {
                let mj = grid.mirror_index(j);
                let theta = oracle::xi_along_characteristic(
                    sep.omega(),
                    x[0],
                    grid.dx(),
                    x[j] - units.c * horizon,
                    2.0 * horizon,
                    units.c,
                );
                let (a, b) = oracle::rotation_solution_oracle(
                    start.slot(right)[j],
                    start.slot(left)[mj],
                    theta,
                );
                worst = worst
                    .max((rk4.slot(right)[j] - a).norm())
                    .max((rk4.slot(left)[mj] - b).norm());
            }
        }
        gates.push(Gate::new(
            "rotation-oracle",
            Some(worst),
            tol,
            "RK4 against pairwise rotation".into(),
        ));
    }

    println!(
        "{:<32} {:>12} {:>10}  result  note",
        "gate", "value", "tolerance"
    );
    let mut all = true;
    for g in &gates {
        let value = g.value.map_or("-".to_string(), |v| format!("{v:.3e}"));
        let result = match (g.value, g.passed()) {
            (None, _) => "SKIP",
            (_, _) if g.diagnostic => "INFO",
            (_, true) => "PASS",
            (_, false) => "FAIL",
        };
        all &= g.passed();
        println!(
            "{:<32} {:>12} {:>10.0e}  {:<6}  {}",
            g.name, value, g.tolerance, result, g.note
        );
    }
    Ok(all)
}

fn execute(cli: &Cli) -> Result<bool> {
    let out_dir = &cli.out_dir;
    match &cli.command {
        Command::Run { scenario } => run_scenario(cli, scenario),
        Command::Propagate { io, time } => {
            let units = units_from(&io.scenario)?;
            let state = read_state(&io.state)?;
            let moved = evolve_free(&to_momentum(&state)?, *time, &units)?;
            std::fs::create_dir_all(out_dir)?;
            write_state(
                &restore_representation(&moved, &state)?,
                &out_dir.join(&io.output),
            )?;
            Ok(true)
        }
        Command::Scatter { io, kernel } => {
            let units = units_from(&io.scenario)?;
            let state = read_state(&io.state)?;
            let k = load_kernel(kernel, state.grid())?;
            let spectrum = xi_spectrum(&k, state.grid(), &units)?;
            let out = apply_scattering(&to_momentum(&state)?, &spectrum)?;
            std::fs::create_dir_all(out_dir)?;
            write_state(
                &restore_representation(&out, &state)?,
                &out_dir.join(&io.output),
            )?;
            Ok(true)
        }
        Command::Spectrum {
            kernel,
            n,
            dx,
            scenario,
            output,
        } => {
            let grid = kernel_grid(kernel, *n, *dx, scenario)?;
            let units = units_from(scenario)?;
            let k = load_kernel(kernel, &grid)?;
            let spectrum = xi_spectrum(&k, &grid, &units)?;
            let mut w = csv_sink(out_dir, output)?;
            write_spectrum_csv(&spectrum, &mut w)?;
            w.flush()?;
            Ok(true)
        }
        Command::MirrorEvolve {
            io,
            kernel,
            t_start,
            t_end,
            steps,
        } => {
            let units = units_from(&io.scenario)?;
            let state = read_state(&io.state)?;
            let k = load_kernel(kernel, state.grid())?;
            let steps =
                steps.unwrap_or_else(|| scenario::suggested_steps(&k, *t_start, *t_end, &units));
            let flat = to_position(&to_momentum(&state)?, &KernelSpec::flat())?;
            let out = to_momentum(&evolve_mirror(&flat, &k, *t_start, *t_end, steps, &units)?)?;
            std::fs::create_dir_all(out_dir)?;
            write_state(
                &restore_representation(&out, &state)?,
                &out_dir.join(&io.output),
            )?;
            Ok(true)
        }
        Command::Observables {
            state,
            scenario,
            output,
        } => {
            let units = units_from(scenario)?;
            let field = read_state(state)?;
            let kernel = match field.representation() {
                Representation::Position(k) if k.kind() == locmirror::KernelKind::SqrtAbsK => k,
                _ => KernelSpec::sqrt_abs_k(),
            };
            let positioned = to_basis(
                &to_position(&to_momentum(&field)?, &kernel)?,
                PolarizationBasis::Linear,
            );
            let profiles = field_profiles(&positioned, &units)?;
            let mut w = csv_sink(out_dir, output)?;
            write_profiles_csv(&profiles, &units, &kernel, &mut w)?;
            w.flush()?;
            Ok(true)
        }
        Command::Check { scenario } => check(scenario),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            if cli.strict || matches!(cli.command, Command::Check { .. }) {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            let schema = e.chain().any(|c| {
                matches!(
                    c.downcast_ref::<locmirror::Error>(),
                    Some(locmirror::Error::Scenario { .. })
                )
            });
            ExitCode::from(if schema { 2 } else { 1 })
        }
    }
}
