use std::f64::consts::PI;

use locmirror::mirror::scattering_unitary;
use locmirror::{
    apply_scattering, energy_total, evolve_mirror, gaussian_packet, make_grid, natural_units,
    to_position, xi_spectrum, Complex64, Direction, KernelSpec, MirrorKernel, Polarization,
    UnitSystem,
};
use locmirror_oracle as oracle;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn xi_spectrum_matches_double_sum() {
    let g = make_grid(48, 0.5).unwrap();
    let u = UnitSystem::from_medium(1.0, 2.0, 2.0, 1.0).unwrap();
    let kernels = [
        MirrorKernel::dense_fn(&g, 1e-14, |x, xp| {
            (-(x - 0.3).powi(2) - 2.0 * (xp + 0.2).powi(2)).exp() * (1.0 + x * xp)
        })
        .unwrap(),
        MirrorKernel::smooth_bump(&g, 5, 1.3, &u).unwrap(),
    ];
    for kernel in kernels {
        let MirrorKernel::Dense(dense) = kernel.to_dense() else {
            unreachable!()
        };
        let expected = oracle::brute_force_xi(dense.omega(), g.x_values(), g.k_values(), u.c);
        let got = xi_spectrum(&kernel, &g, &u).unwrap();
        let scale = expected.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (m, (p, q)) in got.xi.iter().zip(&expected).enumerate() {
            assert!((p - q).norm() <= 1e-12 * scale, "k index {m}: {p} vs {q}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn oracle_unitary_matches_engine(r in 0.0f64..10.0, arg in -PI..PI) {
        let xi = Complex64::from_polar(r, arg);
        let expected = oracle::dense_unitary_oracle(xi);
        prop_assert!(oracle::unitarity_defect(&expected) <= 1e-14);
        let got = scattering_unitary(xi);
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((got[i][j] - expected[i][j]).norm() <= 1e-14);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn separable_mirror_preserves_shape(theta in 0.1f64..3.0, center in -80.0f64..-20.0, width in 2.0f64..5.0) {
        let g = make_grid(512, 0.5).unwrap();
        let u = natural_units();
        let kernel = MirrorKernel::smooth_bump(&g, 4, theta, &u).unwrap();
        let spectrum = xi_spectrum(&kernel, &g, &u).unwrap();
        let input = gaussian_packet(&g, Direction::Right, Polarization::H, center, width, 1.2, c(0.7, -0.4)).unwrap();
        let out = apply_scattering(&input, &spectrum).unwrap();
        let flat = KernelSpec::flat();
        let a_in = to_position(&input, &flat).unwrap();
        let a_out = to_position(&out, &flat).unwrap();
        let inc = a_in.channel(Direction::Right, Polarization::H);
        let trans = a_out.channel(Direction::Right, Polarization::H);
        let refl = a_out.channel(Direction::Left, Polarization::H);
        for j in 0..g.n_points() {
            prop_assert!((trans[j].norm() - theta.cos().abs() * inc[j].norm()).abs() <= 1e-8);
            prop_assert!((refl[g.mirror_index(j)].norm() - theta.sin().abs() * inc[j].norm()).abs() <= 1e-8);
        }
        let e0 = energy_total(&input, &KernelSpec::sqrt_abs_k(), &u).unwrap();
        let e1 = energy_total(&out, &KernelSpec::sqrt_abs_k(), &u).unwrap();
        prop_assert!((e1 - e0).abs() <= 1e-10 * e0);
    }

    #[test]
    fn outgoing_light_is_untouched(theta in 0.1f64..3.0, d in 20.0f64..60.0, t in 5.0f64..40.0) {
        let g = make_grid(512, 0.5).unwrap();
        let u = natural_units();
        let kernel = MirrorKernel::smooth_bump(&g, 4, theta, &u).unwrap();
        let right = gaussian_packet(&g, Direction::Right, Polarization::V, d, 2.0, 0.8, c(1.0, 0.0)).unwrap();
        let left = gaussian_packet(&g, Direction::Left, Polarization::H, -d, 2.5, -0.3, c(0.0, 0.5)).unwrap();
        let start = to_position(&right.add(&left).unwrap(), &KernelSpec::flat()).unwrap();
        let cells = (t / g.dx()).ceil() as usize;
        let out = evolve_mirror(&start, &kernel, 0.0, t, 8 * cells, &u).unwrap();
        prop_assert!(out.max_abs_diff(&start).unwrap() <= 1e-12);
    }
}
