//! Full reflection at theta = pi/2. The closed-form operator and the RK4
//! dynamics agree and the reflected packet is the mirror image of the input.

use std::f64::consts::FRAC_PI_2;

use locmirror::scenario::suggested_steps;
use locmirror::{
    apply_scattering, energy_by_direction, evolve_mirror, gaussian_packet, make_grid,
    natural_units, to_momentum, to_position, xi_spectrum, Complex64, Direction, KernelSpec,
    MirrorKernel, Polarization,
};

fn main() -> locmirror::Result<()> {
    let grid = make_grid(1024, 0.5)?;
    let units = natural_units();
    let mirror = MirrorKernel::smooth_bump(&grid, 4, FRAC_PI_2, &units)?;
    let incident = gaussian_packet(
        &grid,
        Direction::Right,
        Polarization::H,
        -40.0,
        3.0,
        2.0,
        Complex64::new(1.0, 0.0),
    )?;
    let sq = KernelSpec::sqrt_abs_k();

    let scattered = apply_scattering(&incident, &xi_spectrum(&mirror, &grid, &units)?)?;
    let steps = suggested_steps(&mirror, 0.0, 80.0, &units);
    let flat = to_position(&incident, &KernelSpec::flat())?;
    let evolved = to_momentum(&evolve_mirror(&flat, &mirror, 0.0, 80.0, steps, &units)?)?;

    for (name, out) in [("closed form", &scattered), ("RK4", &evolved)] {
        let e = energy_by_direction(out, &sq, &units)?;
        println!(
            "{name:>12}: transmitted {:.10}, reflected {:.10}",
            e[0] / (e[0] + e[1]),
            e[1] / (e[0] + e[1])
        );
    }

    let a_in = to_position(&incident, &KernelSpec::flat())?;
    let a_out = to_position(&evolved, &KernelSpec::flat())?;
    let inc = a_in.channel(Direction::Right, Polarization::H);
    let refl = a_out.channel(Direction::Left, Polarization::H);
    let worst = (0..grid.n_points())
        .map(|j| (refl[grid.mirror_index(j)] - inc[j]).norm())
        .fold(0.0, f64::max);
    println!("max |A-(-x) - A+(x)| = {worst:.2e} after {steps} RK4 steps");
    Ok(())
}
