mod common;

use std::sync::Arc;

use common::*;
use meanfield::distinguishable::full_evolve_with;
use meanfield::linalg::{self, CMat, LinearOperator};
use meanfield::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[test]
fn fock_hamiltonian_is_the_symmetrized_first_quantized_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for d in 2..=4 {
        for n in 1..=3 {
            let model = random_model(d, &mut rng);
            let basis = Arc::new(OccupationBasis::new(d, n).unwrap());
            let h = hamiltonian(&model, basis.clone()).unwrap().to_dense();
            let dense = dense_hamiltonian(&model, n);
            let embedded: Vec<Vec<C64>> = (0..basis.dim())
                .map(|i| {
                    let occ = basis.unrank(i).to_vec();
                    SymmetricState::fock(basis.clone(), &occ).unwrap().to_full().unwrap()
                })
                .collect();
            for a in 0..basis.dim() {
                for b in 0..basis.dim() {
                    let want = form(&embedded[a], &dense, &embedded[b]);
                    assert!((h[(a, b)] - want).norm() < 1e-12, "d={d} N={n} ({a},{b})");
                }
            }
            // H maps the symmetric subspace into itself
            for e in &embedded {
                let he = apply(&dense, e);
                let back: Vec<C64> = embedded
                    .iter()
                    .map(|f| linalg::dot(f, &he))
                    .collect();
                let captured: f64 = back.iter().map(|z| z.norm_sqr()).sum();
                assert!((captured - linalg::norm(&he).powi(2)).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn energy_matches_dense_quadratic_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for n in 1..=3 {
        let model = random_model(3, &mut rng);
        let basis = Arc::new(OccupationBasis::new(3, n).unwrap());
        let h = hamiltonian(&model, basis.clone()).unwrap();
        let psi = SymmetricState::random(basis, &mut rng);
        let full = psi.to_full().unwrap();
        let want = form(&full, &dense_hamiltonian(&model, n), &full);
        assert!((energy(&h, psi.amplitudes()) - want.re).abs() < 1e-12);
        assert!(want.im.abs() < 1e-12);
    }
}

#[test]
fn one_particle_free_evolution_matches_dense_exponential() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let model = build_lattice(7, 5.0, &Shape::Cosine { amplitude: 0.4, harmonic: 2, offset: 0.1 }, &Shape::Zero).unwrap();
    let basis = Arc::new(OccupationBasis::new(7, 1).unwrap());
    let h = hamiltonian(&model, basis.clone()).unwrap();
    let phi = random_vector(7, &mut rng);
    let state = SymmetricState::new(basis, phi.clone()).unwrap();
    for cfg in [PropagatorConfig::full_eigen(), PropagatorConfig::krylov()] {
        let out = evolve(&h, &state, 1.3, &cfg).unwrap();
        let want = apply(&dense_propagator(model.kinetic(), 1.3), &phi);
        assert!(linalg::distance(out.amplitudes(), &want) < 1e-10);
    }
}

#[test]
fn group_law_and_reversibility() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let model = build_lattice(5, 5.0, &Shape::Zero, &cosine(1.0)).unwrap();
    let basis = Arc::new(OccupationBasis::new(5, 4).unwrap());
    let h = hamiltonian(&model, basis.clone()).unwrap();
    let psi = SymmetricState::random(basis, &mut rng);
    for cfg in [PropagatorConfig::full_eigen(), PropagatorConfig::krylov()] {
        let prop = Propagator::new(&h, cfg).unwrap();
        let s = prop.evolve(&psi, 0.7).unwrap();
        let st = prop.evolve(&s, 1.1).unwrap();
        let direct = prop.evolve(&psi, 1.8).unwrap();
        assert!(linalg::distance(st.amplitudes(), direct.amplitudes()) < 1e-8);
        let back = prop.evolve(&direct, -1.8).unwrap();
        assert!(linalg::distance(back.amplitudes(), psi.amplitudes()) < 1e-9);
    }
}

#[test]
fn krylov_agrees_with_eigendecomposition() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let model = random_model(4, &mut rng);
    let basis = Arc::new(OccupationBasis::new(4, 6).unwrap());
    let h = hamiltonian(&model, basis.clone()).unwrap();
    let psi = SymmetricState::random(basis, &mut rng);
    for t in [0.1, 1.0, 4.5, -2.0] {
        let a = evolve(&h, &psi, t, &PropagatorConfig::full_eigen()).unwrap();
        let b = evolve(&h, &psi, t, &PropagatorConfig::krylov()).unwrap();
        assert!(linalg::distance(a.amplitudes(), b.amplitudes()) < 1e-8, "t={t}");
    }
}

#[test]
fn marginals_match_dense_partial_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for (d, n, k) in [(3, 2, 1), (2, 3, 2), (4, 3, 1), (4, 3, 3), (3, 4, 2)] {
        let basis = Arc::new(OccupationBasis::new(d, n).unwrap());
        let psi = SymmetricState::random(basis, &mut rng);
        let fast = k_rdm(&psi, k).unwrap();
        let oracle = dense_oracle_rdm(&psi, k).unwrap();
        assert!(linalg::max_abs_diff(fast.matrix(), oracle.matrix()) < 1e-12, "d={d} N={n} k={k}");
        assert!(fast.invariant_violations().is_empty());
    }
}

#[test]
fn marginals_of_evolved_product_state_match_oracle() {
    let model = build_lattice(4, 4.0, &Shape::Zero, &cosine(1.0)).unwrap();
    let basis = Arc::new(OccupationBasis::new(4, 3).unwrap());
    let h = hamiltonian(&model, basis.clone()).unwrap();
    let psi = product_state(&packet(4), basis).unwrap();
    let st = evolve(&h, &psi, 0.8, &PropagatorConfig::default()).unwrap();
    for k in 1..=3 {
        let fast = k_rdm(&st, k).unwrap();
        let oracle = dense_oracle_rdm(&st, k).unwrap();
        assert!(linalg::max_abs_diff(fast.matrix(), oracle.matrix()) < 1e-12);
    }
}

#[test]
fn pure_state_trace_distance_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let u = random_vector(5, &mut rng);
        let v = random_vector(5, &mut rng);
        let s = linalg::dot(&u, &v).norm_sqr();
        let a = ReducedDensity::new(1, 5, linalg::outer(&u, &u)).unwrap();
        let b = ReducedDensity::new(1, 5, linalg::outer(&v, &v)).unwrap();
        let dist = trace_distance(&a, &b).unwrap();
        assert!((dist - 2.0 * (1.0 - s).sqrt()).abs() < 1e-12);
    }
}

#[test]
fn full_space_propagation_embeds_symmetric_propagation() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for (d, n) in [(2, 4), (3, 3), (4, 2)] {
        let model = random_model(d, &mut rng);
        let basis = Arc::new(OccupationBasis::new(d, n).unwrap());
        let h = hamiltonian(&model, basis.clone()).unwrap();
        let psi = SymmetricState::random(basis, &mut rng);
        let full = FullState::from_symmetric(&psi).unwrap();
        let fh = FullHamiltonian::new(&model, n).unwrap();
        for cfg in [PropagatorConfig::full_eigen(), PropagatorConfig::krylov()] {
            let prop = Propagator::new(&fh, cfg).unwrap();
            for t in [0.0, 0.6, 2.5] {
                let sym = evolve(&h, &psi, t, &cfg).unwrap().to_full().unwrap();
                let out = full_evolve_with(&prop, &full, t).unwrap();
                assert!(linalg::distance(&sym, out.amplitudes()) < 1e-8);
            }
        }
    }
}

#[test]
fn full_hamiltonian_matches_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let model = random_model(3, &mut rng);
    let fh = FullHamiltonian::new(&model, 3).unwrap();
    assert!(linalg::max_abs_diff(&fh.to_dense(), &dense_hamiltonian(&model, 3)) < 1e-13);
}

#[test]
fn free_full_evolution_factorizes() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let model = build_lattice(3, 2.0, &Shape::Constant { value: 0.3 }, &Shape::Zero).unwrap();
    let factors: Vec<Vec<C64>> = (0..3).map(|_| random_vector(3, &mut rng)).collect();
    let state = FullState::product(&factors).unwrap();
    let out = full_evolve(&model, &state, 1.7, &PropagatorConfig::default()).unwrap();
    let u = dense_propagator(model.kinetic(), 1.7);
    let evolved: Vec<Vec<C64>> = factors.iter().map(|f| apply(&u, f)).collect();
    let want = FullState::product(&evolved).unwrap();
    assert!(linalg::distance(out.amplitudes(), want.amplitudes()) < 1e-10);
}

fn pauli_x() -> CMat {
    CMat::from_fn(2, 2, |i, j| if i != j { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

fn pauli_z() -> CMat {
    CMat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => c(1.0, 0.0),
        (1, 1) => c(-1.0, 0.0),
        _ => c(0.0, 0.0),
    })
}

fn pauli_y() -> CMat {
    CMat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 1) => c(0.0, -1.0),
        (1, 0) => c(0.0, 1.0),
        _ => c(0.0, 0.0),
    })
}

fn tight() -> PowerIterationConfig {
    PowerIterationConfig {
        max_iter: 5000,
        tol: 1e-13,
        ..PowerIterationConfig::default()
    }
}

#[test]
fn commutator_norm_matches_dense_oracle() {
    let model = build_lattice(2, 2.0, &Shape::Constant { value: 0.2 }, &cosine(1.0)).unwrap();
    let n = 4;
    let fh = FullHamiltonian::new(&model, n).unwrap();
    let prop = Propagator::new(&fh, PropagatorConfig::default()).unwrap();
    let dense = dense_hamiltonian(&model, n);
    for (ma, mb, t) in [(pauli_x(), pauli_z(), 0.1), (pauli_z(), pauli_x(), 0.3), (pauli_y(), pauli_x(), 0.2)] {
        let a = SlotObservable::new(2, ma.clone(), vec![0]).unwrap();
        let b = SlotObservable::new(2, mb.clone(), vec![1]).unwrap();
        let est = commutator_norm(&prop, 2, n, &a, &b, t, &tight()).unwrap();

        let u = dense_propagator(&dense, t);
        let a_full = embed(&ma, 2, 0, n - 1);
        let b_full = embed(&mb, 2, 1, n - 2);
        let bt = &(&linalg::adjoint(&u) * &b_full) * &u;
        let comm = &(&a_full * &bt) - &(&bt * &a_full);
        let exact = linalg::spectral_norm(&comm).unwrap();
        assert!(exact > 1e-3);
        assert!(est.value <= exact + 1e-12);
        assert!((est.value - exact).abs() < 1e-6, "estimate {} vs exact {exact}", est.value);
    }
}

#[test]
fn commutator_vanishes_without_interaction_or_time() {
    let obs = sample_observables(2, 1, 2, 3).unwrap();
    let a = obs[0].clone();
    let b = obs[1].with_slots(vec![2]).unwrap();

    let model = build_lattice(2, 2.0, &Shape::Zero, &cosine(1.0)).unwrap();
    let fh = FullHamiltonian::new(&model, 3).unwrap();
    let prop = Propagator::new(&fh, PropagatorConfig::default()).unwrap();
    let at_zero = commutator_norm(&prop, 2, 3, &a, &b, 0.0, &PowerIterationConfig::default()).unwrap();
    assert!(at_zero.value < 1e-10);

    let free = build_lattice(2, 2.0, &Shape::Constant { value: 0.5 }, &Shape::Zero).unwrap();
    let fh = FullHamiltonian::new(&free, 3).unwrap();
    let prop = Propagator::new(&fh, PropagatorConfig::default()).unwrap();
    let est = commutator_norm(&prop, 2, 3, &a, &b, 0.9, &PowerIterationConfig::default()).unwrap();
    assert!(est.value < 1e-8);

    let overlap = obs[1].clone();
    assert!(matches!(
        commutator_norm(&prop, 2, 3, &a, &overlap, 0.5, &PowerIterationConfig::default()),
        Err(Error::SlotOverlap(0))
    ));
}

#[test]
fn commutator_symmetries() {
    let model = build_lattice(2, 2.0, &Shape::Zero, &cosine(0.8)).unwrap();
    let n = 4;
    let fh = FullHamiltonian::new(&model, n).unwrap();
    let prop = Propagator::new(&fh, PropagatorConfig::default()).unwrap();
    let obs = sample_observables(2, 1, 2, 7).unwrap();
    let a = obs[0].clone();
    let b = obs[1].with_slots(vec![1]).unwrap();
    let t = 0.6;
    let ab = commutator_norm(&prop, 2, n, &a, &b, t, &tight()).unwrap().value;
    // ‖[A, B(t)]‖ = ‖[B, A(-t)]‖
    let ba = commutator_norm(&prop, 2, n, &b.with_slots(vec![0]).unwrap(), &a.with_slots(vec![1]).unwrap(), -t, &tight())
        .unwrap()
        .value;
    assert!((ab - ba).abs() < 1e-8);
    let moved = commutator_norm(&prop, 2, n, &a.with_slots(vec![2]).unwrap(), &b.with_slots(vec![3]).unwrap(), t, &tight())
        .unwrap()
        .value;
    assert!((ab - moved).abs() < 1e-8);
}

#[test]
fn covariance_matches_full_space_expectations() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let model = random_model(2, &mut rng);
    let n = 3;
    let basis = Arc::new(OccupationBasis::new(2, n).unwrap());
    let h = hamiltonian(&model, basis.clone()).unwrap();
    let psi = evolve(&h, &SymmetricState::random(basis, &mut rng), 0.9, &PropagatorConfig::default()).unwrap();
    let full = psi.to_full().unwrap();
    let a = random_hermitian(2, &mut rng);
    let b = random_hermitian(2, &mut rng);
    let ab = form(&full, &embed(&linalg::kron(&a, &b), 2, 0, n - 2), &full);
    let ea = form(&full, &embed(&a, 2, 0, n - 1), &full);
    let eb = form(&full, &embed(&b, 2, 0, n - 1), &full);
    let want = (ab - ea * eb).norm();
    let gap = covariance_gap(&psi, &a, &b).unwrap();
    assert!((gap - want).abs() < 1e-10);

    assert!(covariance_gap(&psi, &linalg::identity(2), &b).unwrap() < 1e-14);
    let ab2 = random_hermitian(4, &mut rng);
    assert!(covariance_gap(&psi, &ab2, &a).is_ok());
    assert!(covariance_gap(&psi, &ab2, &ab2).is_err());
}

#[test]
fn covariance_vanishes_on_product_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let basis = Arc::new(OccupationBasis::new(3, 4).unwrap());
    let psi = product_state(&random_vector(3, &mut rng), basis).unwrap();
    let a = random_hermitian(3, &mut rng);
    let b = random_hermitian(9, &mut rng);
    assert!(covariance_gap(&psi, &a, &b).unwrap() < 1e-10);
}

#[test]
fn hartree_without_interaction_is_linear_flow() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let model = build_lattice(6, 4.0, &Shape::Gaussian { amplitude: 0.7, width: 1.5 }, &Shape::Zero).unwrap();
    let phi = random_vector(6, &mut rng);
    let out = hartree_solve(&model, &HartreeOrbital::new(phi.clone()).unwrap(), 2.0, 1e-2).unwrap();
    let want = apply(&dense_propagator(model.kinetic(), 2.0), &phi);
    assert!(linalg::distance(&out.phi, &want) < 1e-9);
}

#[test]
fn hartree_limit_of_one_body_marginal_at_large_n() {
    // the marginal distance shrinks as N grows
    let model = build_lattice(4, 4.0, &Shape::Zero, &cosine(1.0)).unwrap();
    let phi = packet(4);
    let reference = hartree_solve(&model, &HartreeOrbital::new(phi.clone()).unwrap(), 0.5, 1e-4).unwrap();
    let pure = ReducedDensity::pure_product(&reference.phi, 1).unwrap();
    let mut last = f64::INFINITY;
    for n in [2, 4, 8, 16] {
        let basis = Arc::new(OccupationBasis::new(4, n).unwrap());
        let h = hamiltonian(&model, basis.clone()).unwrap();
        let st = evolve(&h, &product_state(&phi, basis).unwrap(), 0.5, &PropagatorConfig::default()).unwrap();
        let dist = trace_distance(&one_rdm(&st).unwrap(), &pure).unwrap();
        assert!(dist < last, "N={n}: {dist} !< {last}");
        last = dist;
    }
}
