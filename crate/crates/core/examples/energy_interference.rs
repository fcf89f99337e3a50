//! A packet plus its conjugate partner carries four times the energy of the
//! packet alone; with the opposite sign the energies cancel.

use locmirror::{
    energy_total, gaussian_packet, make_grid, natural_units, AmplitudeField, Complex64, Direction,
    KernelSpec, Polarization,
};

fn with_partner(field: &AmplitudeField, sign: f64) -> AmplitudeField {
    let grid = field.grid().clone();
    let mut out = field.clone();
    for slot in 0..4 {
        for m in 0..grid.n_points() {
            if let Some(p) = grid.negated_k_index(m) {
                out.slot_mut(slot)[m] += sign * field.slot(slot)[p].conj();
            }
        }
    }
    out
}

fn main() -> locmirror::Result<()> {
    let grid = make_grid(1024, 0.5)?;
    let units = natural_units();
    let kernel = KernelSpec::sqrt_abs_k();
    let single = gaussian_packet(
        &grid,
        Direction::Right,
        Polarization::H,
        0.0,
        4.0,
        2.0,
        Complex64::new(0.8, 0.3),
    )?;
    let e1 = energy_total(&single, &kernel, &units)?;
    let plus = energy_total(&with_partner(&single, 1.0), &kernel, &units)?;
    let minus = energy_total(&with_partner(&single, -1.0), &kernel, &units)?;
    println!("single packet      E = {e1:.12}");
    println!("a + a*             E = {plus:.12}  ({:.9} x)", plus / e1);
    println!("a - a*             E = {minus:.3e}");
    Ok(())
}
