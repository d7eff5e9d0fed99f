use adiagrover::lindblad_sim::{DensityMatrix, C64};
use adiagrover::GroverInstance;
use approx::assert_relative_eq;
use nalgebra::{DVector, SymmetricEigen};
use proptest::prelude::*;

fn instance() -> impl Strategy<Value = GroverInstance> {
    (1u32..=30).prop_map(|n| GroverInstance::new(n).unwrap())
}

proptest! {
    #[test]
    fn gap_is_bounded_below_by_gmin(inst in instance(), q in 0.0f64..=1.0) {
        let g = inst.gap(q).unwrap();
        prop_assert!(g >= inst.g_min() * (1.0 - 1e-12));
        prop_assert!((inst.gap(0.5).unwrap() - inst.g_min()).abs() < 1e-12);
    }

    #[test]
    fn bloch_norm_is_gap(inst in instance(), q in 0.0f64..=1.0) {
        let r = inst.bloch_vector(q).unwrap();
        prop_assert_eq!(r[1], 0.0);
        let norm = (r[0] * r[0] + r[2] * r[2]).sqrt();
        prop_assert!((norm - inst.gap(q).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn eigenvalue_splitting_matches_dense_solver(inst in instance(), q in 0.0f64..=1.0) {
        let h = inst.hamiltonian_reduced(q).unwrap();
        prop_assert_eq!(h[(0, 1)], h[(1, 0)]);
        let ev = SymmetricEigen::new(h).eigenvalues;
        let split = (ev[0] - ev[1]).abs();
        prop_assert!((split - inst.gap(q).unwrap()).abs() < 1e-12);
        prop_assert!((ev[0] + ev[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvectors_are_orthonormal_eigenpairs(inst in instance(), q in 0.0f64..=1.0) {
        let h = inst.hamiltonian_reduced(q).unwrap();
        let g = inst.ground_state(q).unwrap();
        let e = inst.excited_state(q).unwrap();
        let gap = inst.gap(q).unwrap();
        prop_assert!((g.norm() - 1.0).abs() < 1e-14);
        prop_assert!((e.norm() - 1.0).abs() < 1e-14);
        prop_assert!(g.dot(&e).abs() < 1e-14);
        prop_assert!((h * g - g * (0.5 * (1.0 - gap))).norm() < 1e-12);
        prop_assert!((h * e - e * (0.5 * (1.0 + gap))).norm() < 1e-12);
        prop_assert!(g[0] >= 0.0);
        let p = inst.ground_projector(q).unwrap();
        prop_assert!((p * p - p).norm() < 1e-14);
        prop_assert!((p.trace() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn angular_velocity_matches_finite_differences(inst in instance(), q in 0.01f64..0.99) {
        let unit = |q: f64| {
            let r = inst.bloch_vector(q).unwrap();
            let n = (r[0] * r[0] + r[2] * r[2]).sqrt();
            [r[0] / n, r[2] / n]
        };
        // Step scaled to the crossing width so the stencil resolves the turn.
        let h = 1e-4 * inst.g_min();
        let (a, b) = (unit(q + h), unit(q - h));
        let fd = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt() / (2.0 * h);
        let v = inst.angular_velocity(q).unwrap();
        prop_assert!((fd - v).abs() <= 1e-6 * v, "fd {} v {}", fd, v);
        let g2 = inst.gap(q).unwrap().powi(2);
        let g2_half = inst.g_min().powi(2);
        prop_assert!((v * g2 - inst.angular_velocity(0.5).unwrap() * g2_half).abs() < 1e-12);
    }

    #[test]
    fn pure_state_energy_variance(inst in instance(), q in 0.0f64..=1.0, theta in 0.0f64..std::f64::consts::PI, phi in 0.0f64..std::f64::consts::TAU) {
        let g = inst.ground_state(q).unwrap();
        let e = inst.excited_state(q).unwrap();
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let phase = C64::from_polar(1.0, phi);
        let v = DVector::from_vec(vec![
            C64::new(c * g[0], 0.0) + phase * s * e[0],
            C64::new(c * g[1], 0.0) + phase * s * e[1],
        ]);
        let rho = DensityMatrix::pure(&v).unwrap();
        let p = rho.population(&[g[0], g[1]]);
        let gap = inst.gap(q).unwrap();
        let var = inst.energy_variance(&rho, q).unwrap();
        prop_assert!((var - gap * gap * p * (1.0 - p)).abs() < 1e-12);
        prop_assert!(var <= gap * gap / 4.0 + 1e-12);
    }
}

#[test]
fn reduced_hamiltonian_examples() {
    let four = GroverInstance::new(2).unwrap();
    let h = four.hamiltonian_reduced(0.0).unwrap();
    assert_relative_eq!(h[(0, 0)], 0.75, epsilon = 1e-15);
    assert_relative_eq!(h[(1, 1)], 0.25, epsilon = 1e-15);
    assert_relative_eq!(h[(0, 1)], -(3f64.sqrt()) / 4.0, epsilon = 1e-15);
    for n in [1, 5, 20] {
        let h = GroverInstance::new(n)
            .unwrap()
            .hamiltonian_reduced(1.0)
            .unwrap();
        assert_eq!((h[(0, 0)], h[(0, 1)], h[(1, 1)]), (0.0, 0.0, 1.0));
    }
}

#[test]
fn gap_examples() {
    let two = GroverInstance::new(1).unwrap();
    assert_relative_eq!(two.gap(0.25).unwrap(), 0.625f64.sqrt(), epsilon = 1e-15);
    assert_relative_eq!(
        GroverInstance::new(2).unwrap().gap(0.5).unwrap(),
        0.5,
        epsilon = 1e-15
    );
    assert_eq!(GroverInstance::new(9).unwrap().gap(0.0).unwrap(), 1.0);
    let r = two.bloch_vector(0.0).unwrap();
    assert_relative_eq!(r[0], 1.0, epsilon = 1e-15);
    assert_relative_eq!(r[2], 0.0, epsilon = 1e-15);
    assert_relative_eq!(
        GroverInstance::new(2)
            .unwrap()
            .angular_velocity(0.5)
            .unwrap(),
        3.464_102,
        epsilon = 1e-6
    );
}

#[test]
fn ground_state_endpoints() {
    for n in [1, 3, 10] {
        let inst = GroverInstance::new(n).unwrap();
        let g1 = inst.ground_state(1.0).unwrap();
        assert_relative_eq!(g1[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(g1[1], 0.0, epsilon = 1e-15);
        let g0 = inst.ground_state(0.0).unwrap();
        let nn = inst.dim();
        assert_relative_eq!(g0[0], 1.0 / nn.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(g0[1], ((nn - 1.0) / nn).sqrt(), epsilon = 1e-14);
    }
}

#[test]
fn ground_state_is_continuous() {
    for n in [1, 4, 12, 30] {
        let inst = GroverInstance::new(n).unwrap();
        let delta = 1e-6;
        // Lipschitz constant is the angular velocity at the crossing.
        let lip = inst.angular_velocity(0.5).unwrap();
        for i in 0..1000 {
            let q = i as f64 / 1000.0 * (1.0 - delta);
            let d = (inst.ground_state(q + delta).unwrap() - inst.ground_state(q).unwrap()).norm();
            assert!(d <= 1.01 * lip * delta, "n {n} q {q}: jump {d}");
        }
    }
}

#[test]
fn full_hamiltonian_spectrum() {
    for n in 1..=6 {
        let inst = GroverInstance::with_marked(n, (1 << n) - 1).unwrap();
        for q in [0.0, 0.3, 0.5, 0.9, 1.0] {
            let h = inst.hamiltonian_full(q).unwrap();
            let nn = h.nrows();
            assert_relative_eq!(h.trace(), nn as f64 - 1.0, epsilon = 1e-12);
            let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
            ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let g = inst.gap(q).unwrap();
            if nn == 2 {
                assert_relative_eq!(ev[0], 0.5 * (1.0 - g), epsilon = 1e-10);
                assert_relative_eq!(ev[1], 0.5 * (1.0 + g), epsilon = 1e-10);
                continue;
            }
            let mut expected = vec![0.5 * (1.0 - g), 0.5 * (1.0 + g)];
            expected.extend(std::iter::repeat(1.0).take(nn - 2));
            expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (a, b) in ev.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-10, "n {n} q {q}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn full_hamiltonian_restriction_is_reduced() {
    let inst = GroverInstance::with_marked(3, 5).unwrap();
    let v = inst.reduced_basis_full().unwrap();
    for q in [0.0, 0.4, 1.0] {
        let restricted = v.transpose() * inst.hamiltonian_full(q).unwrap() * &v;
        let h = inst.hamiltonian_reduced(q).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((restricted[(i, j)] - h[(i, j)]).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn domain_and_cap_errors() {
    let inst = GroverInstance::new(3).unwrap();
    assert!(inst.gap(1.5).is_err());
    assert!(inst.bloch_vector(-0.1).is_err());
    assert!(GroverInstance::new(0).is_err());
    assert!(GroverInstance::with_marked(2, 4).is_err());
    assert!(GroverInstance::new(9)
        .unwrap()
        .hamiltonian_full(0.5)
        .is_err());
    assert!(inst.hamiltonian_full_capped(0.5, 4).is_err());
}
