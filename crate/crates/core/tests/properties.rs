use proptest::prelude::*;

use muband_core::bubble::planar::{enumerate_minimizers, solve_min_cut};
use muband_core::bubble::{brute_force_minimize, minimize_1d, minimize_2d, DiscreteSet, PlanarGrid, Topology, WarpedBand};
use muband_core::comparison::{ell_negative, ell_nonneg, negative_threshold};
use muband_core::model_spaces::Interval;
use muband_core::ModelSpace;

fn small_grid() -> impl Strategy<Value = PlanarGrid> {
    (any::<bool>(), 3usize..=6, 1usize..=5)
        .prop_filter("at most 16 interior cells", |(cyl, nx, ny)| (nx - 2) * ny <= 16 && (!cyl || *ny >= 3))
        .prop_flat_map(|(cyl, nx, ny)| {
            let topology = if cyl { Topology::Cylinder } else { Topology::Rectangle };
            (Just(topology), Just(nx), Just(ny), prop::collection::vec(-4.0f64..4.0, nx * ny))
        })
        .prop_map(|(topology, nx, ny, h)| {
            PlanarGrid::new(nx, ny, 0.5, topology, h).unwrap().with_boundary_curvature(10.0, 10.0)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spherical_identity(n in 2usize..=7, kappa in 0.1f64..5.0, frac in 0.05f64..0.95) {
        let half = frac * std::f64::consts::PI / (kappa.sqrt() * n as f64);
        let ms = ModelSpace::spherical(n, kappa, -half, half).unwrap();
        let nf = n as f64;
        for t in ms.domain().grid(257) {
            let h = ms.potential_of(t).unwrap();
            let dh = ms.potential_slope_of(t).unwrap();
            let q = -nf / (nf - 1.0) * h * h - 2.0 * dh;
            prop_assert!((q - nf * (nf - 1.0) * kappa).abs() <= 1e-9 * (1.0 + q.abs()));
        }
    }

    #[test]
    fn reflection_swaps_boundary_curvatures(n in 2usize..=7, a in 0.1f64..1.0, w in 0.1f64..2.0) {
        let ms = ModelSpace::cone(n, a, a + w).unwrap();
        let r = ms.reflect();
        let (hm, hp) = ms.boundary_mean_curvatures();
        let (rm, rp) = r.boundary_mean_curvatures();
        prop_assert!((hm - rp).abs() <= 1e-12 * (1.0 + hm.abs()));
        prop_assert!((hp - rm).abs() <= 1e-12 * (1.0 + hp.abs()));
        prop_assert!((ms.width_of() - r.width_of()).abs() <= 1e-15 * (1.0 + w));
    }

    #[test]
    fn ell_decreasing_in_d(n in 2usize..=7, kappa in 0.1f64..4.0, f1 in 0.01f64..0.98, f2 in 0.01f64..0.98) {
        prop_assume!((f1 - f2).abs() > 1e-6);
        let top = 2.0 * std::f64::consts::PI / (kappa.sqrt() * n as f64);
        let (lo, hi) = if f1 < f2 { (f1, f2) } else { (f2, f1) };
        prop_assert!(ell_nonneg(n, kappa, lo * top).unwrap().value > ell_nonneg(n, kappa, hi * top).unwrap().value);
    }

    #[test]
    fn negative_ambient_widens(n in 3usize..=7, kappa in 0.2f64..3.0, f in 0.05f64..0.8, s in 0.01f64..0.95) {
        let d = f * 2.0 * std::f64::consts::PI / (kappa.sqrt() * n as f64);
        let sigma = s * negative_threshold(n, kappa, d);
        let b = ell_negative(n, kappa, sigma, d).unwrap();
        prop_assert!(b.value > ell_nonneg(n, kappa, d).unwrap().value);
        prop_assert!(b.residual < 1e-9);
    }

    #[test]
    fn min_cut_matches_oracle(grid in small_grid()) {
        let fast = minimize_2d(&grid).unwrap();
        let oracle = brute_force_minimize(&grid).unwrap();
        prop_assert_eq!(fast.quantized_energy, oracle.quantized_energy);
        prop_assert_eq!(&fast.set, &oracle.set);
        prop_assert!((fast.energy - oracle.energy).abs() <= fast.quantization_bound);
    }

    #[test]
    fn energy_is_reproduced(grid in small_grid()) {
        let r = minimize_2d(&grid).unwrap();
        prop_assert_eq!(grid.energy(&r.set).unwrap(), r.energy);
        prop_assert_eq!(grid.quantized_energy(&r.set).unwrap(), r.quantized_energy);
        prop_assert!(grid.separates(&r.set));
    }

    #[test]
    fn minimizers_form_a_lattice(grid in small_grid()) {
        let (best, all) = enumerate_minimizers(&grid).unwrap();
        let canonical = solve_min_cut(&grid).0;
        prop_assert_eq!(grid.quantized_energy(&canonical).unwrap(), best);
        for a in &all {
            prop_assert!(canonical.is_subset(a));
            for b in &all {
                let u: DiscreteSet = a.union(b);
                let i: DiscreteSet = a.intersection(b);
                prop_assert!(grid.quantized_energy(&u).unwrap() + grid.quantized_energy(&i).unwrap() <= 2 * best);
            }
        }
    }

    #[test]
    fn energy_antitone_in_h(grid in small_grid(), bump in prop::collection::vec(0.0f64..2.0, 36)) {
        let h: Vec<f64> = grid.h().iter().zip(bump.iter().cycle()).map(|(h, b)| h + b).collect();
        let higher = grid.clone().with_h(h).unwrap();
        let low = grid.quantized_energy(&solve_min_cut(&grid).0).unwrap();
        let high = higher.quantized_energy(&solve_min_cut(&higher).0).unwrap();
        prop_assert!(high <= low);
    }

    #[test]
    fn flat_slice_at_zero_of_h(c in 0.5f64..5.0, x0 in -0.5f64..0.5) {
        let band = WarpedBand::flat(3, Interval::new(-1.0, 1.0), 2001, move |t| (c * (x0 - t), -c)).unwrap();
        let r = minimize_1d(&band).unwrap();
        prop_assert!((r.s_star - x0).abs() <= band.spacing());
    }
}
