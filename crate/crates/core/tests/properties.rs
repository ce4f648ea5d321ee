mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symrestore::circuit::{general_two_qubit_template, symmetry_block_matrix, symmetry_block_unitary, BlockVariant};
use symrestore::math::{max_abs_diff, popcount, unitarity_defect, CMatrix, C64};
use symrestore::pauli::{build_symmetry_operator, number_operator_sum, s_squared_sum, s_squared_transposition_sum, sz_sum, PauliString};
use symrestore::projector::{apply_projector, classical_filter, product_vs_sum_deviation, Oracle, ProjectorForm, ProjectorSpec};
use symrestore::resources::{n_lcu, n_qpe, simulated_gate_counts};
use symrestore::restore::{
    grover_project, hadamard_oracle_project, iqpe_ladder, iqpe_project, lcu_project, qpe_project, restore, GroverMode,
    Method,
};
use symrestore::statevec::{MeasureMode, PostState};
use symrestore::symmetry::{sector_dimension, spin_eigenbasis_bruteforce, young_degeneracy};
use symrestore::{HalfInt, Statevector, SymmetryKind};

fn random_unitary(dim: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let m = DMatrix::from_fn(dim, dim, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    m.qr().q()
}

fn state(n: usize, seed: u64) -> Statevector {
    Statevector::random(n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn diagonal_target(n: usize, seed: u64) -> (SymmetryKind, HalfInt) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
    let kind = SymmetryKind::DIAGONAL[rng.random_range(0..3)];
    let spectrum = kind.spectrum(n).unwrap();
    (kind, spectrum[rng.random_range(0..spectrum.len())])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn unitaries_preserve_norm_and_linearity(n in 1usize..7, k in 1usize..3, seed in any::<u64>()) {
        let k = k.min(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_unitary(1 << k, &mut rng);
        let mut wires: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = rng.random_range(i..n);
            wires.swap(i, j);
        }
        let targets = &wires[..k];
        let psi = Statevector::random(n, &mut rng).unwrap();
        let phi = Statevector::random(n, &mut rng).unwrap();
        let out = psi.clone().apply_unitary(&u, targets, &[]).unwrap();
        prop_assert!((out.norm() - psi.norm()).abs() < 1e-12);
        let (a, b) = (C64::new(0.3, -1.1), C64::new(-0.7, 0.4));
        let mixed = psi.linear_combination(a, &phi, b).unwrap().apply_unitary(&u, targets, &[]).unwrap();
        let separate = out.linear_combination(a, &phi.clone().apply_unitary(&u, targets, &[]).unwrap(), b).unwrap();
        prop_assert!(mixed.max_deviation(&separate).unwrap() < 1e-12);
    }

    #[test]
    fn branches_are_complete_and_orthogonal(n in 2usize..7, seed in any::<u64>(), mask in 1usize..64) {
        let psi = state(n, seed);
        let qubits: Vec<usize> = (0..n).filter(|q| mask >> q & 1 == 1).collect();
        prop_assume!(!qubits.is_empty());
        let out = psi.measure_qubits(&qubits, MeasureMode::Branch, PostState::Retain).unwrap();
        let total: f64 = out.iter().map(|o| o.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for (i, a) in out.iter().enumerate() {
            for b in &out[i + 1..] {
                prop_assert!(a.post_state.inner(&b.post_state).unwrap().norm() < 1e-10);
            }
        }
    }

    #[test]
    fn s_squared_commutes_with_sz(n in 1usize..7, seed in any::<u64>()) {
        let psi = state(n, seed);
        let s2 = s_squared_sum(n);
        let sz = sz_sum(n);
        let a = s2.apply(&sz.apply(&psi).unwrap()).unwrap();
        let b = sz.apply(&s2.apply(&psi).unwrap()).unwrap();
        prop_assert!(a.max_deviation(&b).unwrap() < 1e-10);
        let t = s_squared_transposition_sum(n).apply(&psi).unwrap();
        prop_assert!(t.max_deviation(&s2.apply(&psi).unwrap()).unwrap() < 1e-10);
    }

    #[test]
    fn symmetry_blocks_commute_with_their_symmetry(t1 in -7.0f64..7.0, t2 in -7.0f64..7.0, seed in any::<u64>()) {
        let psi = state(2, seed);
        for (variant, kind) in [(BlockVariant::SzPreserving, SymmetryKind::Sz), (BlockVariant::ParityBlock, SymmetryKind::Parity)] {
            let c = symmetry_block_unitary(variant, t1, t2).unwrap();
            prop_assert!(unitarity_defect(&c.unitary().unwrap()) < 1e-12);
            prop_assert!(max_abs_diff(&c.unitary().unwrap(), &symmetry_block_matrix(variant, t1, t2)) < 1e-12);
            let op = build_symmetry_operator(kind, 2).unwrap();
            let a = c.apply(op.apply(&psi).unwrap()).unwrap();
            let b = op.apply(&c.apply(psi.clone()).unwrap()).unwrap();
            prop_assert!(a.max_deviation(&b).unwrap() < 1e-10);
        }
    }

    #[test]
    fn two_qubit_template_is_unitary(params in proptest::collection::vec(-7.0f64..7.0, 15)) {
        let c = general_two_qubit_template(&params).unwrap();
        prop_assert!(unitarity_defect(&c.unitary().unwrap()) < 1e-12);
        prop_assert_eq!(c.count("CNOT"), 3);
        prop_assert_eq!(c.n_parameters(), 15);
    }

    #[test]
    fn exact_forms_are_hermitian_idempotent_projectors(n in 2usize..8, seed in any::<u64>()) {
        let (kind, target) = diagonal_target(n, seed);
        let psi = state(n, seed);
        let phi = state(n, seed.wrapping_add(1));
        let mut forms = vec![ProjectorForm::DeltaFilter, ProjectorForm::Lowdin, ProjectorForm::Oracle];
        if kind == SymmetryKind::Parity {
            forms.extend([ProjectorForm::ParityClosed, ProjectorForm::DiscreteSum { m: Some(1) }, ProjectorForm::Product { n_factors: Some(1) }]);
        } else {
            forms.extend([ProjectorForm::DiscreteSum { m: None }, ProjectorForm::Product { n_factors: None }, ProjectorForm::GaugeIntegral { n_points: None }]);
        }
        let exact = classical_filter(&psi, kind, target).unwrap().state;
        for form in forms {
            let spec = ProjectorSpec::new(kind, target, form);
            prop_assert!(spec.is_exact(n).unwrap());
            let p_psi = apply_projector(&psi, &spec).unwrap().state;
            let p_phi = apply_projector(&phi, &spec).unwrap().state;
            prop_assert!(p_psi.max_deviation(&exact).unwrap() < 1e-10, "{}", form.name());
            let twice = apply_projector(&p_psi, &spec).unwrap().state;
            prop_assert!(twice.max_deviation(&p_psi).unwrap() < 1e-10);
            // ⟨φ|Pψ⟩ = ⟨Pφ|ψ⟩
            let gap = (phi.inner(&p_psi).unwrap() - p_phi.inner(&psi).unwrap()).norm();
            prop_assert!(gap < 1e-10);
        }
    }

    #[test]
    fn sector_projectors_resolve_identity(n in 1usize..8, seed in any::<u64>()) {
        let psi = state(n, seed);
        for kind in [SymmetryKind::ParticleNumber, SymmetryKind::Parity] {
            let mut acc = Statevector::from_amplitudes(vec![C64::new(0.0, 0.0); 1 << n]).unwrap();
            for value in kind.spectrum(n).unwrap() {
                let part = apply_projector(&psi, &ProjectorSpec::new(kind, value, ProjectorForm::Lowdin)).unwrap().state;
                acc = acc.linear_combination(C64::new(1.0, 0.0), &part, C64::new(1.0, 0.0)).unwrap();
            }
            prop_assert!(acc.max_deviation(&psi).unwrap() < 1e-10);
        }
    }

    #[test]
    fn every_state_method_lands_in_the_sector(n in 3usize..8, seed in any::<u64>()) {
        let (kind, target) = diagonal_target(n, seed);
        let psi = state(n, seed);
        let exact = classical_filter(&psi, kind, target).unwrap().normalize().unwrap();
        for method in [Method::Lcu, Method::Hoyer, Method::Qpe, Method::Iqpe, Method::HadamardOracle] {
            let r = restore(&psi, method, kind, target).unwrap();
            let f = r.final_state.fidelity(&exact).unwrap();
            prop_assert!(f >= 1.0 - 1e-10, "{method}: fidelity {f}");
            prop_assert!((0.0..=1.0 + 1e-12).contains(&r.success_probability));
        }
    }

    #[test]
    fn grover_follows_closed_form(n in 2usize..8, seed in any::<u64>(), steps in 0usize..25) {
        let (kind, target) = diagonal_target(n, seed);
        let psi = state(n, seed);
        let oracle = Oracle::from_spec(&ProjectorSpec::filter(kind, target), n).unwrap();
        let theta = oracle.good_weight(&psi).unwrap().sqrt().asin();
        let r = grover_project(&psi, &oracle, GroverMode::FixedN(steps)).unwrap();
        for t in &r.trace {
            prop_assert!((t.value - ((2 * t.step + 1) as f64 * theta).sin().powi(2)).abs() < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn large_register_methods_match_filter(n in 8usize..=10, seed in any::<u64>()) {
        let (kind, target) = diagonal_target(n, seed);
        let psi = state(n, seed);
        let exact = classical_filter(&psi, kind, target).unwrap();
        let p_g = exact.weight;
        let exact = exact.normalize().unwrap();
        for method in [Method::Lcu, Method::Hoyer, Method::Qpe, Method::Iqpe, Method::HadamardOracle] {
            let r = restore(&psi, method, kind, target).unwrap();
            prop_assert!(r.final_state.fidelity(&exact).unwrap() >= 1.0 - 1e-10, "{method}");
            if method != Method::Hoyer {
                prop_assert!((r.success_probability - p_g).abs() < 1e-10, "{method}");
            }
        }
    }
}

#[test]
fn sampling_matches_branch_probabilities() {
    let psi = state(3, 11);
    let qubits = [0, 2];
    let shots = 200_000;
    let counts = psi.sample_counts(&qubits, shots, 5).unwrap();
    let branches = psi.measure_qubits(&qubits, MeasureMode::Branch, PostState::Discard).unwrap();
    for b in branches {
        let p = b.probability;
        let got = *counts.get(&b.observed_bits).unwrap_or(&0) as f64;
        let sigma = (shots as f64 * p * (1.0 - p)).sqrt();
        assert!((got - shots as f64 * p).abs() <= 5.0 * sigma, "pattern {}: {got} vs {}", b.observed_bits, shots as f64 * p);
    }
}

#[test]
fn number_operator_is_bit_count() {
    for n in 1..=6 {
        let m = number_operator_sum(n).to_matrix();
        for r in 0..1usize << n {
            for c in 0..1usize << n {
                let expect = if r == c { popcount(r) as f64 } else { 0.0 };
                assert_eq!(m[(r, c)], C64::new(expect, 0.0));
            }
        }
        let parity = PauliString::parity(n);
        assert!(parity.mul(&parity).unwrap().is_identity_letters());
        assert_eq!(parity.mul(&parity).unwrap().phase(), C64::new(1.0, 0.0));
    }
}

#[test]
fn dimensions_partition_the_register() {
    for n in 1..=10 {
        for kind in SymmetryKind::DIAGONAL {
            let total: u64 = kind.spectrum(n).unwrap().into_iter().map(|v| sector_dimension(n, kind, v).unwrap()).sum();
            assert_eq!(total, 1 << n, "{kind} n={n}");
        }
        let mut total = 0;
        for s in SymmetryKind::TotalSpin.spectrum(n).unwrap() {
            total += young_degeneracy(n, s).unwrap() * (s.twice() as u64 + 1);
        }
        assert_eq!(total, 1 << n);
    }
}

#[test]
fn spin_basis_satisfies_eigen_equations() {
    for n in 1..=6 {
        let s2 = s_squared_sum(n);
        let sz = sz_sum(n);
        for e in spin_eigenbasis_bruteforce(n).unwrap() {
            let v = e.to_statevector();
            let s = e.s.to_f64();
            let a = s2.apply(&v).unwrap();
            let scaled = v.linear_combination(C64::new(s * (s + 1.0), 0.0), &v, C64::new(0.0, 0.0)).unwrap();
            assert!(a.max_deviation(&scaled).unwrap() < 1e-10);
            let b = sz.apply(&v).unwrap();
            let scaled = v.linear_combination(C64::new(e.m.to_f64(), 0.0), &v, C64::new(0.0, 0.0)).unwrap();
            assert!(b.max_deviation(&scaled).unwrap() < 1e-10);
        }
    }
}

#[test]
fn product_and_sum_agree_for_small_registers() {
    for n in 1..=5 {
        assert!(product_vs_sum_deviation(n) < 1e-12);
    }
}

#[test]
fn instrumented_counts_match_predictions() {
    for n in 1..=10usize {
        let psi = state(n, n as u64);
        for kind in SymmetryKind::DIAGONAL {
            for target in kind.spectrum(n).unwrap() {
                for method in [Method::Lcu, Method::Qpe, Method::Iqpe] {
                    let predicted = simulated_gate_counts(method, kind, n, target).unwrap();
                    let r = match restore(&psi, method, kind, target) {
                        Ok(r) => r,
                        Err(e) => panic!("{method} {kind} {target} n={n}: {e}"),
                    };
                    assert_eq!(r.gate_counts, predicted, "{method} {kind} {target} n={n}");
                    let evolutions = match method {
                        Method::Lcu => {
                            let m = if kind == SymmetryKind::Parity { 1 } else { n };
                            m + 1
                        }
                        Method::Qpe => r.n_ancilla,
                        _ => r.trace.len(),
                    };
                    assert_eq!(r.gate_counts["CPHASE"], evolutions * n);
                }
            }
        }
    }
}

#[test]
fn ancilla_formulas_are_monotone() {
    for k in 1..1000 {
        assert!(n_lcu(k + 1) >= n_lcu(k));
        assert!(n_qpe(k + 1) >= n_qpe(k));
    }
}

#[test]
fn iqpe_survivors_follow_factor_eigenvalues() {
    use symrestore::projector::binary_factor_eigenvalue;
    let n = 7;
    let psi = state(n, 21);
    for target in 0..=n as i64 {
        let steps = iqpe_ladder(&psi, SymmetryKind::ParticleNumber, HalfInt::from_int(target), 3).unwrap();
        for (l, step) in steps.iter().enumerate() {
            let probs = step.state.sector_probabilities(popcount);
            for m in 0..=n as i64 {
                let j = m - target;
                let alive = (0..=l as u32).all(|f| binary_factor_eigenvalue(j, f).norm() > 1e-12);
                assert_eq!(alive, j.rem_euclid(1 << (l + 1)) == 0);
                let p = probs.get(&(m as u32)).copied().unwrap_or(0.0);
                if alive {
                    assert!(p > 0.0, "target {target} l={l} m={m}");
                } else {
                    assert!(p < 1e-24, "target {target} l={l} m={m}: {p:e}");
                }
            }
        }
    }
}

#[test]
fn empty_sector_is_reported() {
    let psi = Statevector::new_basis_state(4, 0b0011).unwrap();
    let target = HalfInt::from_int(3);
    let oracle = Oracle::from_spec(&ProjectorSpec::filter(SymmetryKind::ParticleNumber, target), 4).unwrap();
    let empty = |r: symrestore::Result<_>| matches!(r, Err(symrestore::Error::EmptySector(_)));
    assert!(empty(hadamard_oracle_project(&psi, &oracle).map(|_| ())));
    assert!(empty(grover_project(&psi, &oracle, GroverMode::Hoyer).map(|_| ())));
    assert!(empty(qpe_project(&psi, SymmetryKind::ParticleNumber, target).map(|_| ())));
    assert!(empty(iqpe_project(&psi, SymmetryKind::ParticleNumber, target, None).map(|_| ())));
    let lcu = symrestore::projector::lcu_decomposition(SymmetryKind::ParticleNumber, 4, target, 4).unwrap();
    assert!(empty(lcu_project(&psi, &lcu).map(|_| ())));
}
