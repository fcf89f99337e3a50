//! Sweeping the mirror angle: the reflected share follows sin^2 theta for
//! both engines.

use std::f64::consts::PI;

use locmirror::scenario::suggested_steps;
use locmirror::{
    gaussian_packet, make_grid, natural_units, scattering_equivalence_check, Complex64, Direction,
    MirrorKernel, Polarization,
};

fn main() -> locmirror::Result<()> {
    let grid = make_grid(1024, 0.5)?;
    let units = natural_units();
    let packet = gaussian_packet(
        &grid,
        Direction::Right,
        Polarization::Plus,
        0.0,
        3.0,
        2.0,
        Complex64::new(1.0, 0.0),
    )?;
    let horizon = 50.0;
    println!(
        "{:>8} {:>12} {:>12} {:>12} {:>10}",
        "theta", "sin^2", "closed", "RK4", "max diff"
    );
    for i in 0..=8 {
        let theta = i as f64 * PI / 16.0;
        let mirror = MirrorKernel::smooth_bump(&grid, 4, theta, &units)?;
        let steps = suggested_steps(&mirror, -horizon, horizon, &units);
        let r = scattering_equivalence_check(&packet, &mirror, horizon, steps, &units)?;
        println!(
            "{theta:8.4} {:12.9} {:12.9} {:12.9} {:10.2e}",
            theta.sin().powi(2),
            r.fractions_scattering[1],
            r.fractions_dynamics[1],
            r.max_discrepancy
        );
    }
    Ok(())
}
