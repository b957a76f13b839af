use breit_rabi::berry::wilson_loop_phase;
use breit_rabi::crossings::{find_all_crossings, CrossingKind};
use breit_rabi::entanglement::{reduced_density, schmidt, von_neumann_entropy, Subsystem};
use breit_rabi::grid::{Grid, SweepAxis};
use breit_rabi::hamiltonian::{build_hamiltonian, build_rotated_hamiltonian};
use breit_rabi::linalg::{jacobi_eigh_hermitian, norm};
use breit_rabi::num::angle_distance;
use breit_rabi::{Atom, HalfInteger, Point};
use num_complex::Complex;
use proptest::prelude::*;

fn atom_strategy() -> impl Strategy<Value = Atom> {
    (1i32..=7, -40.0f64..40.0, -1.0f64..1.0)
        .prop_filter("distinct couplings", |(_, a, b)| (a - b).abs() > 1e-3)
        .prop_map(|(twice, a, b)| Atom::new("random", HalfInteger::from_twice(twice), a, b).unwrap())
}

fn state_strategy(dim: usize) -> impl Strategy<Value = Vec<Complex<f64>>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim)
        .prop_filter("nonzero", |v| v.iter().any(|(x, y)| x.abs() + y.abs() > 1e-3))
        .prop_map(|v| {
            let z: Vec<Complex<f64>> = v.into_iter().map(|(x, y)| Complex::new(x, y)).collect();
            let n = norm::<f64, Complex<f64>>(&z);
            z.into_iter().map(|c| c / n).collect()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hamiltonian_is_symmetric_traceless_and_block_diagonal(
        atom in atom_strategy(), b in -1.0f64..1.0, f in -1.0f64..1.0,
    ) {
        let h = build_hamiltonian(&atom, Point::new(b, f));
        let dense = h.to_dense();
        let basis = atom.basis();
        for r in 0..dense.rows() {
            for c in 0..dense.cols() {
                prop_assert_eq!(dense[(r, c)], dense[(c, r)]);
                if basis.m_of(r) != basis.m_of(c) {
                    prop_assert_eq!(dense[(r, c)], 0.0);
                }
            }
        }
        // Every spin projection sum vanishes, so tr H = 0.
        prop_assert!(h.trace().abs() < 1e-12 * (1.0 + dense.max_abs::<f64>()));
        prop_assert!(h.block_dims().iter().all(|&d| d <= 2));
    }

    #[test]
    fn rotated_hamiltonian_is_hermitian_with_fixed_spectrum(
        atom in atom_strategy(), b in -1.0f64..1.0, theta in 0.0f64..3.14, phi in 0.0f64..6.28,
    ) {
        let point = Point::new(b, 1.0);
        let h = build_rotated_hamiltonian(&atom, point, theta, phi);
        prop_assert!(h.hermiticity_error::<f64>() < 1e-13);
        let z = jacobi_eigh_hermitian(&build_rotated_hamiltonian(&atom, point, 0.0, 0.0)).unwrap();
        let r = jacobi_eigh_hermitian(&h).unwrap();
        for (x, y) in z.values.iter().zip(&r.values) {
            prop_assert!((x - y).abs() < 1e-11 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn partial_traces_share_spectrum(
        (twice, state) in (1i32..=5).prop_flat_map(|t| (Just(t), state_strategy(2 * (t as usize + 1)))),
    ) {
        let basis = breit_rabi::ProductBasis::new(HalfInteger::from_twice(twice));
        let rho_e = reduced_density(&state, &basis, Subsystem::Electron).unwrap();
        let rho_n = reduced_density(&state, &basis, Subsystem::Nuclear).unwrap();
        for rho in [&rho_e, &rho_n] {
            let tr = rho.matrix.trace::<f64>();
            prop_assert!((tr - Complex::new(1.0, 0.0)).norm() < 1e-13);
            prop_assert!(rho.matrix.hermiticity_error::<f64>() < 1e-15);
            prop_assert!(rho.eigenvalues().unwrap().iter().all(|&w| w > -1e-14));
        }
        let se = von_neumann_entropy(&rho_e).unwrap();
        let sn = von_neumann_entropy(&rho_n).unwrap();
        prop_assert!((se - sn).abs() < 1e-10);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&se));
        let s = schmidt(&state, &basis).unwrap();
        prop_assert!((s.entropy() - se).abs() < 1e-10);
        let back = s.reconstruct(&basis);
        for (x, y) in back.iter().zip(&state) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn wilson_loop_ignores_pointwise_phases(
        theta in 0.1f64..3.0,
        b in 0.05f64..0.5,
        level in 0usize..8,
        phases in prop::collection::vec(0.0f64..6.283, 64),
    ) {
        let na = Atom::sodium();
        let states: Vec<Vec<Complex<f64>>> = (0..64)
            .map(|k| {
                let phi = std::f64::consts::TAU * k as f64 / 64.0;
                jacobi_eigh_hermitian(&build_rotated_hamiltonian(&na, Point::new(b, 1.0), theta, phi))
                    .unwrap()
                    .vector(level)
            })
            .collect();
        let shifted: Vec<Vec<Complex<f64>>> = states
            .iter()
            .zip(&phases)
            .map(|(v, &p)| v.iter().map(|z| z * Complex::from_polar(1.0, p)).collect())
            .collect();
        prop_assert!(angle_distance(wilson_loop_phase(&states), wilson_loop_phase(&shifted)) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn crossing_detector_is_stable_under_refinement(
        f in prop_oneof![-1.0f64..-0.05, 0.05f64..1.0],
        n in 41usize..160,
        sodium in any::<bool>(),
    ) {
        let atom = if sodium { Atom::sodium() } else { Atom::hydrogen() };
        let grid = Grid::new(-0.4, 0.4, n).unwrap();
        let axis = SweepAxis::Field { f };
        let coarse = find_all_crossings(&atom, axis, &grid).unwrap();
        let fine = find_all_crossings(&atom, axis, &grid.refined()).unwrap();
        // Refinement may only reveal events hidden between coarse points.
        for e in &coarse {
            let m = fine.iter().find(|g| {
                g.kind == e.kind && g.level_a == e.level_a && g.level_b == e.level_b
                    && (g.location - e.location).abs() < 1e-8
            });
            prop_assert!(m.is_some(), "lost {:?}", e);
            if e.kind == CrossingKind::Avoided {
                prop_assert!((m.unwrap().gap - e.gap).abs() < 1e-12);
            }
        }
        let avoided = |v: &[breit_rabi::crossings::CrossingEvent<f64>]| {
            v.iter().filter(|e| e.kind == CrossingKind::Avoided).count()
        };
        prop_assert_eq!(avoided(&coarse), avoided(&fine));
    }
}
