//! The E and B profiles satisfy the 1D Maxwell equations; the residual of
//! the central-difference time probe shrinks like dt^2.

use locmirror::{
    gaussian_packet, make_grid, maxwell_residual, Complex64, Direction, Polarization, UnitSystem,
};

fn main() -> locmirror::Result<()> {
    let grid = make_grid(1024, 0.5)?;
    let units = UnitSystem::from_medium(1.0, 2.0, 0.5, 1.0)?;
    let field = gaussian_packet(
        &grid,
        Direction::Right,
        Polarization::H,
        -10.0,
        3.0,
        1.0,
        Complex64::new(1.0, 0.0),
    )?
    .add(&gaussian_packet(
        &grid,
        Direction::Left,
        Polarization::V,
        15.0,
        4.0,
        -0.7,
        Complex64::new(0.3, 0.5),
    )?)?;
    let mut last: Option<f64> = None;
    for dt in [0.4, 0.2, 0.1, 0.05] {
        let r = maxwell_residual(&field, &units, dt)?.residual;
        match last {
            Some(p) => println!(
                "dt = {dt:5.3}: residual {r:.3e}, order {:.3}",
                (p / r).log2()
            ),
            None => println!("dt = {dt:5.3}: residual {r:.3e}"),
        }
        last = Some(r);
    }
    Ok(())
}
