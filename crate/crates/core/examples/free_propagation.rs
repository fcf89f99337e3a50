//! Free propagation is an exact spectral phase: a lattice delta moves by
//! whole cells, a Gaussian keeps its shape and the energy never drifts.

use locmirror::{
    band_flat_packet, energy_total, evolve_free, gaussian_packet, make_grid, to_position,
    Complex64, Direction, KernelSpec, Polarization, UnitSystem,
};

fn main() -> locmirror::Result<()> {
    let grid = make_grid(512, 0.5)?;
    // Slower medium: c = 1/sqrt(eps mu) = 0.5.
    let units = UnitSystem::from_medium(1.0, 2.0, 2.0, 1.0)?;
    let flat = KernelSpec::flat();

    let (delta, placed) = band_flat_packet(
        &grid,
        Direction::Left,
        Polarization::H,
        10.0,
        Complex64::new(1.0, 0.0),
    );
    for cells in [0, 5, 40] {
        let t = cells as f64 * grid.dx() / units.c;
        let a = to_position(&evolve_free(&delta, t, &units)?, &flat)?;
        let (j, peak) = a
            .channel(Direction::Left, Polarization::H)
            .iter()
            .enumerate()
            .max_by(|p, q| p.1.norm().total_cmp(&q.1.norm()))
            .unwrap();
        println!(
            "t = {t:6.2}: delta at x = {:6.2} (from {:.2}), |a| = {:.6}",
            grid.x(j),
            placed.placed,
            peak.norm()
        );
    }

    let packet = gaussian_packet(
        &grid,
        Direction::Right,
        Polarization::V,
        -40.0,
        3.0,
        1.5,
        Complex64::new(1.0, 0.0),
    )?;
    let sq = KernelSpec::sqrt_abs_k();
    let e0 = energy_total(&packet, &sq, &units)?;
    for t in [0.0, 50.0, 100.0] {
        let moved = evolve_free(&packet, t, &units)?;
        let e = energy_total(&moved, &sq, &units)?;
        println!("t = {t:6.1}: energy {e:.15} (drift {:.1e})", (e - e0) / e0);
    }
    Ok(())
}
