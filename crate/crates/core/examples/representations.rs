//! The same momentum amplitudes seen through the three position kernels.
//! Only the positive-frequency kernel refuses to go back to momentum space.

use locmirror::{
    band_flat_packet, kernel_compensated_packet, make_grid, to_momentum, to_position, Complex64,
    Direction, KernelSpec, Polarization,
};

fn spread(values: &[f64]) -> f64 {
    let peak = values.iter().cloned().fold(0.0, f64::max);
    let second = values
        .iter()
        .cloned()
        .filter(|v| *v < peak)
        .fold(0.0, f64::max);
    second / peak
}

fn main() -> locmirror::Result<()> {
    let grid = make_grid(256, 0.5)?;
    let (delta, _) = band_flat_packet(
        &grid,
        Direction::Right,
        Polarization::H,
        0.0,
        Complex64::new(1.0, 0.0),
    );

    for (name, kernel) in [
        ("flat", KernelSpec::flat()),
        ("sqrt(|k|)", KernelSpec::sqrt_abs_k()),
        ("positive-only", KernelSpec::positive_only()),
    ] {
        let a = to_position(&delta, &kernel)?;
        let mag: Vec<f64> = a
            .channel(Direction::Right, Polarization::H)
            .iter()
            .map(|v| v.norm())
            .collect();
        // k = 0 carries no energy and the sqrt(|k|) kernel drops it.
        let mut expected = delta.clone();
        if kernel.eval(0.0).norm() == 0.0 {
            for slot in 0..4 {
                expected.slot_mut(slot)[grid.origin_index()] = Complex64::new(0.0, 0.0);
            }
        }
        let back = match to_momentum(&a) {
            Ok(m) => format!("round trip error {:.1e}", m.max_abs_diff(&expected)?),
            Err(e) => format!("no inverse ({e})"),
        };
        println!(
            "{name:>14}: largest side lobe / peak = {:.3}; {back}",
            spread(&mag)
        );
    }

    // A global phase leaves |a| alone on the flat kernel but moves the real
    // field of the positive-frequency construction around.
    let kernel = KernelSpec::positive_only();
    let (compensated, _) = kernel_compensated_packet(
        &grid,
        &kernel,
        Direction::Right,
        Polarization::H,
        0.0,
        Complex64::new(1.0, 0.0),
    );
    let po = to_position(&compensated, &kernel)?;
    for (label, phase) in [
        ("1", Complex64::new(1.0, 0.0)),
        ("i", Complex64::new(0.0, 1.0)),
    ] {
        let field: Vec<f64> = po
            .channel(Direction::Right, Polarization::H)
            .iter()
            .map(|v| 2.0 * (phase * v).re.abs())
            .collect();
        println!(
            "positive-only real field, phase {label}: side lobe / peak = {:.3}",
            spread(&field)
        );
    }
    Ok(())
}
