//! A non-separable kernel couples x and x' unevenly, so its reflectance
//! depends on wavenumber. A separable one reflects every k alike.

use locmirror::{make_grid, natural_units, xi_spectrum, MirrorKernel};

fn main() -> locmirror::Result<()> {
    let grid = make_grid(256, 0.25)?;
    let units = natural_units();
    let dense = MirrorKernel::dense_fn(&grid, 1e-12, |x, xp| {
        1.5 * (-(x * x + xp * xp)).exp() * (1.0 + 0.8 * (x - xp))
    })?;
    let separable = MirrorKernel::smooth_bump(&grid, 4, 1.0, &units)?;
    let rd = xi_spectrum(&dense, &grid, &units)?.reflectance();
    let rs = xi_spectrum(&separable, &grid, &units)?.reflectance();
    println!("{:>8} {:>10} {:>10}", "k", "dense", "separable");
    for m in (0..grid.n_points()).step_by(16) {
        println!("{:8.3} {:10.6} {:10.6}", grid.k(m), rd[m], rs[m]);
    }
    Ok(())
}
