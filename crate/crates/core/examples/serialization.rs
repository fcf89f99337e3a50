//! State and kernel files: binary and NDJSON states round-trip exactly,
//! kernel CSVs remember their grid.

use std::io::Cursor;

use locmirror::io::{
    read_separable_kernel_csv, read_state_binary, read_state_ndjson, separable_kernel_csv_grid,
    write_separable_kernel_csv, write_state_binary, write_state_ndjson,
};
use locmirror::{
    gaussian_packet, make_grid, natural_units, to_position, Complex64, Direction, KernelSpec,
    MirrorKernel, Polarization,
};

fn main() -> locmirror::Result<()> {
    let grid = make_grid(128, 0.25)?;
    let field = gaussian_packet(
        &grid,
        Direction::Left,
        Polarization::V,
        3.0,
        1.0,
        -2.0,
        Complex64::new(0.5, 0.5),
    )?;
    let field = to_position(&field, &KernelSpec::sqrt_abs_k())?;

    let mut bin = Vec::new();
    write_state_binary(&field, &mut bin)?;
    let back = read_state_binary(&mut Cursor::new(&bin))?;
    println!("binary: {} bytes, identical: {}", bin.len(), back == field);

    let mut text = Vec::new();
    write_state_ndjson(&field, &mut text)?;
    let back = read_state_ndjson(Cursor::new(&text), &field)?;
    println!(
        "ndjson: {} lines, identical: {}",
        text.iter().filter(|b| **b == b'\n').count(),
        back == field
    );

    let mirror = MirrorKernel::smooth_bump(&grid, 3, 1.0, &natural_units())?;
    let mut csv = Vec::new();
    write_separable_kernel_csv(&mirror, &grid, &mut csv)?;
    let recorded = separable_kernel_csv_grid(Cursor::new(&csv))?.expect("grid comment");
    let kernel = read_separable_kernel_csv(Cursor::new(&csv), &recorded)?;
    println!(
        "kernel csv: grid n = {}, dx = {}, identical: {}",
        recorded.n_points(),
        recorded.dx(),
        kernel == mirror
    );
    Ok(())
}
