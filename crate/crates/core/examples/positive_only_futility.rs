//! An outgoing packet should pass a mirror untouched. The local dynamics
//! leave it alone; a mirror built from positive-frequency modes only rotates
//! it anyway.

use std::f64::consts::FRAC_PI_2;

use locmirror::mirror::energy_weighted_norm_sqr;
use locmirror::scenario::suggested_steps;
use locmirror::{
    apply_positive_only_effective, evolve_mirror, gaussian_packet, make_grid, natural_units,
    to_momentum, to_position, xi_spectrum, AmplitudeField, Complex64, Direction, KernelSpec,
    MirrorKernel, Polarization,
};

fn main() -> locmirror::Result<()> {
    let grid = make_grid(1024, 0.5)?;
    let units = natural_units();
    let mirror = MirrorKernel::smooth_bump(&grid, 4, FRAC_PI_2, &units)?;
    // Already past the mirror and moving away from it.
    let outgoing = gaussian_packet(
        &grid,
        Direction::Right,
        Polarization::H,
        40.0,
        3.0,
        2.0,
        Complex64::new(1.0, 0.0),
    )?;
    let norm = energy_weighted_norm_sqr(&outgoing, &units)?;
    let change = |f: &AmplitudeField| -> locmirror::Result<f64> {
        let mut d = f.clone();
        d.scale(Complex64::new(-1.0, 0.0));
        Ok((energy_weighted_norm_sqr(&d.add(&outgoing)?, &units)? / norm).sqrt())
    };

    let effective =
        apply_positive_only_effective(&outgoing, &xi_spectrum(&mirror, &grid, &units)?)?;
    let steps = suggested_steps(&mirror, 0.0, 80.0, &units);
    let local = to_momentum(&evolve_mirror(
        &to_position(&outgoing, &KernelSpec::flat())?,
        &mirror,
        0.0,
        80.0,
        steps,
        &units,
    )?)?;
    println!(
        "relative change, positive-frequency mirror: {:.4}",
        change(&effective)?
    );
    println!(
        "relative change, local mirror dynamics:     {:.2e}",
        change(&local)?
    );
    Ok(())
}
