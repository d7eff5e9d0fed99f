use adiagrover::lindblad_sim::{
    build_general_dephasing, fidelity, integrate, integrate_from, integrate_full,
    liouvillian_apply, tunneling_final, DensityMatrix, C64,
};
use adiagrover::schedules::mass;
use adiagrover::{DephasingModel, Error, GroverInstance, Schedule, SchedulePath, SimConfig};
use approx::assert_relative_eq;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Random 2 x 2 density matrix from a Bloch vector inside the unit ball.
fn random_state(rng: &mut impl Rng) -> DensityMatrix {
    let r: f64 = rng.gen_range(0.0f64..1.0).cbrt();
    let z: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - z * z).sqrt();
    bloch_state([r * s * phi.cos(), r * s * phi.sin(), r * z])
}

/// State with Bloch vector `b` in the convention `b = (-2 Re rho01, 2 Im rho01, rho00 - rho11)`.
fn bloch_state(b: [f64; 3]) -> DensityMatrix {
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[
            c(0.5 * (1.0 + b[2])),
            C64::new(-0.5 * b[0], 0.5 * b[1]),
            C64::new(-0.5 * b[0], -0.5 * b[1]),
            c(0.5 * (1.0 - b[2])),
        ],
    );
    DensityMatrix::new(m).unwrap()
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A schedule held at a fixed `q`.
struct Frozen(f64);

impl SchedulePath for Frozen {
    fn q(&self, _s: f64) -> f64 {
        self.0
    }

    fn dq_ds(&self, _s: f64) -> f64 {
        0.0
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generator_is_traceless_and_hermitian(n in 1u32..=20, q in 0.0f64..=1.0, rate in 0.0f64..5.0, seed in any::<u64>()) {
        let inst = GroverInstance::new(n).unwrap();
        let rho = random_state(&mut ChaCha8Rng::seed_from_u64(seed));
        let out = liouvillian_apply(&inst, &rho, q, rate).unwrap();
        prop_assert!((out[(0, 0)] + out[(1, 1)]).norm() < 1e-14);
        prop_assert!(max_abs(&(&out - out.adjoint())) < 1e-14);
    }

    #[test]
    fn general_form_matches_reduced_generator(n in 1u32..=20, q in 0.0f64..=1.0, rate in 0.0f64..5.0, seed in any::<u64>()) {
        let inst = GroverInstance::new(n).unwrap();
        let rho = random_state(&mut ChaCha8Rng::seed_from_u64(seed));
        let h = inst.hamiltonian_reduced(q).unwrap();
        let p0 = inst.ground_projector(q).unwrap();
        let h = DMatrix::from_fn(2, 2, |i, j| h[(i, j)]);
        let p0 = DMatrix::from_fn(2, 2, |i, j| p0[(i, j)]);
        let p1 = DMatrix::identity(2, 2) - &p0;
        // Uniform diagonal rates gamma/2 give coherence damping at rate gamma.
        let rates = DMatrix::from_diagonal(&DVector::from_element(2, c(rate / 2.0)));
        let gen = build_general_dephasing(&h, &[p0, p1], &rates).unwrap();
        let a = gen.apply(rho.matrix());
        let b = liouvillian_apply(&inst, &rho, q, rate).unwrap();
        prop_assert!(max_abs(&(a - b)) < 1e-13);
    }
}

#[test]
fn stationary_states_and_unitary_limit() {
    let inst = GroverInstance::new(5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..=10 {
        let q = i as f64 / 10.0;
        let g = inst.ground_state(q).unwrap();
        let ground = DensityMatrix::pure_real(&[g[0], g[1]]).unwrap();
        assert!(max_abs(&liouvillian_apply(&inst, &ground, q, 0.7).unwrap()) < 1e-15);
        // Any mixture of eigenprojectors is stationary.
        let e = inst.excited_state(q).unwrap();
        let p: f64 = rng.gen();
        let mix = DMatrix::from_fn(2, 2, |a, b| c(p * g[a] * g[b] + (1.0 - p) * e[a] * e[b]));
        let mix = DensityMatrix::new(mix).unwrap();
        assert!(max_abs(&liouvillian_apply(&inst, &mix, q, 2.0).unwrap()) < 1e-15);
        // rate zero is the von Neumann equation
        let rho = random_state(&mut rng);
        let h = inst.hamiltonian_reduced(q).unwrap();
        let hc = DMatrix::from_fn(2, 2, |a, b| c(h[(a, b)]));
        let vn = (&hc * rho.matrix() - rho.matrix() * &hc) * C64::new(0.0, -1.0);
        assert!(max_abs(&(liouvillian_apply(&inst, &rho, q, 0.0).unwrap() - vn)) < 1e-15);
    }
    assert!(liouvillian_apply(&inst, &DensityMatrix::maximally_mixed(2), 0.5, -1.0).is_err());
    assert!(liouvillian_apply(&inst, &DensityMatrix::maximally_mixed(3), 0.5, 1.0).is_err());
}

#[test]
fn general_dephasing_conserves_energy_and_validates() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let inst = GroverInstance::new(2).unwrap();
    let h = inst.hamiltonian_full(0.3).unwrap();
    let eig = nalgebra::SymmetricEigen::new(h.clone());
    // Group the spectrum into the two simple levels and the degenerate block.
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let proj = |idx: &[usize]| {
        let mut p = DMatrix::<f64>::zeros(4, 4);
        for &k in idx {
            let v = eig.eigenvectors.column(k);
            p += v * v.transpose();
        }
        p
    };
    let projectors = vec![proj(&order[0..1]), proj(&order[1..2]), proj(&order[2..4])];
    let hc = h.map(c);
    for _ in 0..20 {
        let a = DMatrix::from_fn(3, 3, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let rates = &a * a.adjoint();
        let gen = build_general_dephasing(&h, &projectors, &rates).unwrap();
        let b = DMatrix::from_fn(4, 4, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let mut rho = &b * b.adjoint();
        let tr = rho.trace();
        rho /= tr;
        let out = gen.apply(&rho);
        assert!((&hc * &out).trace().norm() < 1e-12);
        assert!(out.trace().norm() < 1e-12);
    }
    let neg = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(-1.0), c(0.5)]));
    assert!(matches!(
        build_general_dephasing(&h, &projectors, &neg),
        Err(Error::Config(_))
    ));
    let mut bad = projectors.clone();
    bad[2] = DMatrix::identity(4, 4);
    assert!(build_general_dephasing(&h, &bad, &DMatrix::identity(3, 3)).is_err());
    assert!(build_general_dephasing(&h, &projectors[..2], &DMatrix::identity(2, 2)).is_err());
}

#[test]
fn frozen_schedule_dephasing_closed_form() {
    let inst = GroverInstance::new(1).unwrap();
    let gamma = 0.4;
    let t = 3.0;
    // y is orthogonal to the Hamiltonian axis for every q.
    let rho0 = bloch_state([0.0, 1.0, 0.0]);
    let cfg = SimConfig::new(t).with_tolerances(1e-12, 1e-14);
    let traj = integrate_from(
        &inst,
        &Frozen(0.5),
        &DephasingModel::Constant { gamma },
        &cfg,
        &rho0,
    )
    .unwrap();
    let r = inst.bloch_vector(0.5).unwrap();
    let norm = r[0].hypot(r[2]);
    let axis = [r[0] / norm, r[2] / norm];
    for x in &traj.samples {
        let time = x.s * t;
        let along = x.bloch[0] * axis[0] + x.bloch[2] * axis[1];
        let perp = (x.bloch[0] * axis[1] - x.bloch[2] * axis[0]).hypot(x.bloch[1]);
        assert!(along.abs() < 1e-10);
        assert_relative_eq!(perp, (-gamma * time).exp(), epsilon = 1e-10);
    }
}

#[test]
fn frozen_schedule_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in 0..20 {
        let inst = GroverInstance::new(1 + k % 6).unwrap();
        let q: f64 = rng.gen();
        let rho0 = random_state(&mut rng);
        let cfg = SimConfig::new(5.0)
            .with_tolerances(1e-11, 1e-14)
            .with_samples(101);
        let traj = integrate_from(
            &inst,
            &Frozen(q),
            &DephasingModel::Constant { gamma: 0.3 },
            &cfg,
            &rho0,
        )
        .unwrap();
        let g = inst.ground_state(q).unwrap();
        let p0 = rho0.population(&[g[0], g[1]]);
        let mut purity = rho0.purity();
        for x in &traj.samples {
            assert!((x.rho.population(&[g[0], g[1]]) - p0).abs() < 1e-9);
            let p = x.rho.purity();
            assert!(p <= purity + 1e-12);
            purity = p;
        }
    }
}

#[test]
fn unitary_evolution_preserves_purity() {
    let inst = GroverInstance::new(1).unwrap();
    for t in [0.5, 10.0, 200.0] {
        let traj = integrate(
            &inst,
            &Schedule::linear(),
            &DephasingModel::Constant { gamma: 0.0 },
            &SimConfig::new(t),
        )
        .unwrap();
        for x in &traj.samples {
            assert!((x.rho.purity() - 1.0).abs() < 1e-8, "T {t} s {}", x.s);
        }
        assert!((traj.samples[0].fidelity - 1.0).abs() < 1e-9);
    }
}

#[test]
fn tolerance_refinement_converges() {
    let inst = GroverInstance::new(6).unwrap();
    let g = inst.g_min();
    let sched = Schedule::optimal_closed(&inst, g).unwrap();
    let model = DephasingModel::Constant { gamma: g };
    let t = 60.0;
    let final_state = |tol: f64| {
        integrate(
            &inst,
            &sched,
            &model,
            &SimConfig::new(t)
                .with_tolerances(tol, tol * 1e-3)
                .with_samples(2),
        )
        .unwrap()
        .last()
        .rho
        .clone()
    };
    let reference = final_state(1e-13);
    let mut prev = None;
    for tol in [1e-7, 5e-8, 2.5e-8, 1.25e-8, 6.25e-9, 3.125e-9] {
        let err = final_state(tol).trace_distance(&reference).unwrap();
        if let Some(p) = prev {
            let ratio: f64 = p / err;
            assert!((1.5..=40.0).contains(&ratio), "tol {tol}: ratio {ratio}");
        }
        prev = Some(err);
    }
}

#[test]
fn trajectory_shape_and_csv() {
    let inst = GroverInstance::new(3).unwrap();
    let sched = Schedule::roland_cerf(&inst);
    let traj = integrate(
        &inst,
        &sched,
        &DephasingModel::GapTracking { kappa: 0.3 },
        &SimConfig::new(20.0).with_samples(65),
    )
    .unwrap();
    assert_eq!(traj.samples.len(), 65);
    assert!(traj.samples.windows(2).all(|w| w[1].s > w[0].s));
    assert_eq!((traj.samples[0].s, traj.last().s), (0.0, 1.0));
    assert!((traj.samples[0].fidelity - 1.0).abs() < 1e-9);
    for x in &traj.samples {
        assert_relative_eq!(
            x.fidelity,
            fidelity(&x.rho, &inst, x.q).unwrap(),
            epsilon = 1e-15
        );
    }
    assert_relative_eq!(
        tunneling_final(&traj).unwrap(),
        1.0 - traj.final_fidelity(),
        epsilon = 0.0
    );

    let mut buf = Vec::new();
    traj.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "s,q,fidelity,rho_00_re,rho_01_re,rho_01_im,rho_11_re,bloch_x,bloch_y,bloch_z"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 65);
    for (row, x) in rows.iter().zip(&traj.samples) {
        assert_eq!(row.len(), 10);
        assert_eq!(row[2], x.fidelity);
        assert_eq!(row[7], x.bloch[0]);
    }
    let mut buf = Vec::new();
    traj.write_bloch_csv(&mut buf).unwrap();
    assert!(String::from_utf8(buf)
        .unwrap()
        .starts_with("s,bloch_x,bloch_y,bloch_z\n"));
}

#[test]
fn fidelity_examples() {
    let inst = GroverInstance::new(4).unwrap();
    for q in [0.0, 0.3, 0.5, 1.0] {
        let g = inst.ground_state(q).unwrap();
        let e = inst.excited_state(q).unwrap();
        assert_relative_eq!(
            fidelity(&DensityMatrix::pure_real(&[g[0], g[1]]).unwrap(), &inst, q).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert!(
            fidelity(&DensityMatrix::pure_real(&[e[0], e[1]]).unwrap(), &inst, q)
                .unwrap()
                .abs()
                < 1e-15
        );
        assert_relative_eq!(
            fidelity(&DensityMatrix::maximally_mixed(2), &inst, q).unwrap(),
            0.5,
            epsilon = 1e-15
        );
    }
}

#[test]
fn full_space_matches_reduced() {
    let inst = GroverInstance::new(3).unwrap();
    let g = inst.g_min();
    let sched = Schedule::roland_cerf(&inst);
    let model = DephasingModel::Constant { gamma: g };
    let cfg = SimConfig::new(50.0).with_tolerances(1e-12, 1e-15);
    let reduced = integrate(&inst, &sched, &model, &cfg).unwrap();
    let full = integrate_full(&inst, &sched, &model, &cfg).unwrap();
    let basis = inst.reduced_basis_full().unwrap();
    for (r, f) in reduced.samples.iter().zip(&full.samples) {
        let restricted = f.rho.restrict(&basis).unwrap();
        assert!(r.rho.trace_distance(&restricted).unwrap() < 1e-8);
        assert!((1.0 - restricted.trace()).abs() < 1e-10);
        assert!((r.fidelity - f.fidelity).abs() < 1e-8);
    }

    let two = GroverInstance::new(1).unwrap();
    let a = integrate(&two, &Schedule::linear(), &model, &cfg).unwrap();
    let b = integrate_full(&two, &Schedule::linear(), &model, &cfg).unwrap();
    for (x, y) in a.samples.iter().zip(&b.samples) {
        assert!(
            x.rho
                .trace_distance(&y.rho.restrict(&two.reduced_basis_full().unwrap()).unwrap())
                .unwrap()
                < 1e-10
        );
    }
    assert!(matches!(
        integrate_full(&GroverInstance::new(9).unwrap(), &sched, &model, &cfg),
        Err(Error::DimensionCap { .. })
    ));
}

#[test]
fn linear_schedule_first_order_leakage() {
    let inst = GroverInstance::new(3).unwrap();
    let g = inst.g_min();
    let m_int: f64 = {
        let k = 200_000;
        (0..k)
            .map(|i| (i as f64 + 0.5) / k as f64)
            .map(|q| mass(&inst, g, q).unwrap())
            .sum::<f64>()
            / k as f64
    };
    let t = 2e4;
    let traj = integrate(
        &inst,
        &Schedule::linear(),
        &DephasingModel::Constant { gamma: g },
        &SimConfig::new(t).with_tolerances(1e-11, 1e-14),
    )
    .unwrap();
    let scaled = t * tunneling_final(&traj).unwrap();
    assert_relative_eq!(scaled, 2.0 * m_int, max_relative = 0.02);
    let opt = Schedule::optimal_closed(&inst, g).unwrap();
    let t2 = integrate(
        &inst,
        &opt,
        &DephasingModel::Constant { gamma: g },
        &SimConfig::new(t).with_tolerances(1e-11, 1e-14),
    )
    .unwrap();
    assert!(t * tunneling_final(&t2).unwrap() < scaled);
}

struct Broken;

impl SchedulePath for Broken {
    fn q(&self, s: f64) -> f64 {
        if s > 0.5 {
            f64::NAN
        } else {
            s
        }
    }

    fn dq_ds(&self, _s: f64) -> f64 {
        1.0
    }
}

#[test]
fn integration_failure_reports_position() {
    let inst = GroverInstance::new(2).unwrap();
    let err = integrate(
        &inst,
        &Broken,
        &DephasingModel::Constant { gamma: 0.1 },
        &SimConfig::new(5.0),
    )
    .unwrap_err();
    match err {
        Error::Integration { s, .. } => assert!(s <= 0.5 + 1e-12 && s > 0.3, "{s}"),
        other => panic!("unexpected {other:?}"),
    }
}
