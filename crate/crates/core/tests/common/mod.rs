//! Independent reference computations shared by the integration tests and the
//! acceptance harness. Nothing here goes through the restoration code paths.
#![allow(dead_code)]

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symrestore::math::{binomial, popcount, C64};
use symrestore::pauli::{Pauli, PauliString, PauliSum};
use symrestore::{Statevector, SymmetryKind};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random normalized state supported only on basis states where `keep` holds.
pub fn random_supported(n: usize, keep: impl Fn(usize) -> bool, rng: &mut ChaCha8Rng) -> Statevector {
    let full = Statevector::random(n, rng).unwrap();
    let amps = full
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(k, a)| if keep(k) { *a } else { C64::new(0.0, 0.0) })
        .collect();
    Statevector::from_amplitudes(amps).unwrap().normalized()
}

/// `sin θ |G⟩ + cos θ |B⟩` with `|G⟩` random inside the `n₁ = a` sector and
/// `|B⟩` random outside it.
pub fn two_component_state(n: usize, a: u32, theta: f64, seed: u64) -> Statevector {
    let mut r = rng(seed);
    let good = random_supported(n, |k| popcount(k) == a, &mut r);
    let bad = random_supported(n, |k| popcount(k) != a, &mut r);
    good.linear_combination(C64::new(theta.sin(), 0.0), &bad, C64::new(theta.cos(), 0.0)).unwrap()
}

/// Integer weights of the sectors `n₁ = k` of the uniform `n`-qubit state
/// after IQPE circuits `0..=l` targeting `target`: sector `k` keeps its
/// `C(n, k)` weight iff `k − target ≡ 0 (mod 2^{l+1})`, otherwise it is 0.
pub fn iqpe_uniform_weights(n: u64, target: i64, l: u32) -> Vec<u64> {
    let modulus = 1i64 << (l + 1);
    (0..=n)
        .map(|k| if (k as i64 - target).rem_euclid(modulus) == 0 { binomial(n, k) } else { 0 })
        .collect()
}

/// Hermitian observable commuting with `n̂`, `Ŝ_z` and parity: random real
/// weights on `Z_j`, `Z_i Z_j` and `X_i X_j + Y_i Y_j`.
pub fn random_conserving_observable(n: usize, rng: &mut ChaCha8Rng) -> PauliSum {
    let mut sum = PauliSum::zero(n);
    let w = |rng: &mut ChaCha8Rng| C64::new(rng.random_range(-1.0..1.0), 0.0);
    for j in 0..n {
        sum.push(w(rng), PauliString::single(n, j, Pauli::Z).unwrap()).unwrap();
    }
    for i in 0..n {
        for j in i + 1..n {
            sum.push(w(rng), PauliString::from_sparse(n, &[(i, Pauli::Z), (j, Pauli::Z)]).unwrap()).unwrap();
            let hop = w(rng);
            sum.push(hop, PauliString::from_sparse(n, &[(i, Pauli::X), (j, Pauli::X)]).unwrap()).unwrap();
            sum.push(hop, PauliString::from_sparse(n, &[(i, Pauli::Y), (j, Pauli::Y)]).unwrap()).unwrap();
        }
    }
    sum
}

/// `⟨Ψ|Ô P|Ψ⟩ / ⟨Ψ|P|Ψ⟩` with dense matrices, `P` the diagonal sector mask.
pub fn dense_sandwich(state: &Statevector, observable: &PauliSum, in_sector: impl Fn(usize) -> bool) -> f64 {
    let psi = DVector::from_column_slice(state.amplitudes());
    let projected = DVector::from_iterator(
        psi.len(),
        psi.iter().enumerate().map(|(k, a)| if in_sector(k) { *a } else { C64::new(0.0, 0.0) }),
    );
    let o = observable.to_matrix();
    let num = psi.dotc(&(&o * &projected));
    let den = psi.dotc(&projected);
    (num / den).re
}

/// Pair-count law of `Π_n (cos(θ_n/2) + sin(θ_n/2) P†_n)|0⟩`: each pair is
/// occupied independently with probability `sin²(θ_n/2)`.
pub fn bernoulli_pair_law(thetas: &[f64]) -> Vec<f64> {
    let mut law = vec![1.0];
    for &t in thetas {
        let q = (t / 2.0).sin().powi(2);
        let mut next = vec![0.0; law.len() + 1];
        for (k, p) in law.iter().enumerate() {
            next[k] += p * (1.0 - q);
            next[k + 1] += p * q;
        }
        law = next;
    }
    law
}

/// Sector mask for a diagonal kind through the raw bit pattern.
pub fn in_sector(kind: SymmetryKind, n: usize, code: i64) -> impl Fn(usize) -> bool {
    let _ = n;
    move |k| {
        let ones = popcount(k) as i64;
        match kind {
            SymmetryKind::Parity => ones % 2 == code,
            _ => ones == code,
        }
    }
}
