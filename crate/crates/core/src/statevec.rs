//! Dense complex statevector engine.
//!
//! Basis index `k` encodes qubit occupations little-endian: qubit `j` holds
//! bit `j` of `k`. Every other module relies on this convention.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::math::{accurate_sum, unitarity_defect, CMatrix, CompensatedSum, C64, ONE, ZERO};

/// Largest register the dense engine accepts (2^26 amplitudes = 1 GiB).
pub const MAX_QUBITS: usize = 26;

/// Tolerance on `U†U = I` accepted by [`Statevector::apply_unitary`].
pub const UNITARY_TOL: f64 = 1e-10;

/// Branch probabilities at or below this are treated as impossible outcomes.
pub const NULL_PROBABILITY: f64 = 1e-24;

/// A control wire: the operation fires only when `qubit` reads `on`.
/// `on == false` is the open-circle control of circuit diagrams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Control {
    pub qubit: usize,
    pub on: bool,
}

impl Control {
    pub fn on(qubit: usize) -> Self {
        Control { qubit, on: true }
    }

    pub fn off(qubit: usize) -> Self {
        Control { qubit, on: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureMode {
    /// Every outcome with its exact probability and collapsed state.
    Branch,
    /// One outcome drawn from the Born distribution with a seeded RNG.
    Sample { seed: u64 },
}

/// What happens to the measured qubits in the collapsed state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PostState {
    Retain,
    Discard,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    /// Bit `i` is the value read on `qubits[i]`.
    pub observed_bits: usize,
    pub probability: f64,
    pub post_state: Statevector,
}

fn check_register(n_qubits: usize) -> Result<()> {
    if n_qubits > MAX_QUBITS {
        return Err(Error::Resource(format!(
            "{n_qubits} qubits exceeds the dense limit of {MAX_QUBITS}"
        )));
    }
    Ok(())
}

impl Statevector {
    /// `|index⟩` on `n_qubits` qubits.
    pub fn new_basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::domain(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(Statevector { n_qubits, amplitudes })
    }

    /// Wraps raw amplitudes; the length must be a power of two. No
    /// normalization is applied.
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let len = amplitudes.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::domain(format!("amplitude count {len} is not a power of two")));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_register(n_qubits)?;
        Ok(Statevector { n_qubits, amplitudes })
    }

    /// Equal-weight superposition of every basis state.
    pub fn uniform(n_qubits: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let dim = 1usize << n_qubits;
        let a = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(Statevector { n_qubits, amplitudes: vec![a; dim] })
    }

    /// Haar-like random normalized state (independent complex Gaussians).
    pub fn random<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<Self> {
        check_register(n_qubits)?;
        let dim = 1usize << n_qubits;
        let amplitudes = (0..dim)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Ok(Statevector { n_qubits, amplitudes }.normalized())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        accurate_sum(self.amplitudes.iter().map(|a| a.norm_sqr()))
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Rescales to unit norm. A zero vector is returned unchanged.
    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    pub fn normalize(&mut self) {
        let norm = self.norm();
        if norm > 0.0 {
            let inv = 1.0 / norm;
            self.amplitudes.iter_mut().for_each(|a| *a *= inv);
        }
    }

    pub fn scale(&mut self, factor: C64) {
        self.amplitudes.iter_mut().for_each(|a| *a *= factor);
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Statevector) -> Result<C64> {
        self.same_size(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨a|b⟩|² / (‖a‖²‖b‖²)`; insensitive to normalization and global phase.
    pub fn fidelity(&self, other: &Statevector) -> Result<f64> {
        let overlap = self.inner(other)?.norm_sqr();
        let denom = self.norm_sqr() * other.norm_sqr();
        if denom == 0.0 {
            return Err(Error::domain("fidelity with a zero vector"));
        }
        Ok(overlap / denom)
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_deviation(&self, other: &Statevector) -> Result<f64> {
        self.same_size(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `a·self + b·other`.
    pub fn linear_combination(&self, a: C64, other: &Statevector, b: C64) -> Result<Statevector> {
        self.same_size(other)?;
        let amplitudes = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(Statevector { n_qubits: self.n_qubits, amplitudes })
    }

    fn same_size(&self, other: &Statevector) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::domain(format!(
                "register size mismatch: {} vs {}",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(())
    }

    /// `self ⊗ |0…0⟩` with `extra` fresh qubits placed above the existing ones
    /// (they become qubits `n..n+extra`).
    pub fn with_ancillas(&self, extra: usize) -> Result<Statevector> {
        check_register(self.n_qubits + extra)?;
        let mut amplitudes = vec![ZERO; self.dim() << extra];
        amplitudes[..self.dim()].copy_from_slice(&self.amplitudes);
        Ok(Statevector { n_qubits: self.n_qubits + extra, amplitudes })
    }

    /// Applies `matrix` to `targets` (matrix index bit `i` ↔ `targets[i]`),
    /// conditioned on every control reading its `on` value.
    pub fn apply_unitary(mut self, matrix: &CMatrix, targets: &[usize], controls: &[Control]) -> Result<Self> {
        self.apply_unitary_in_place(matrix, targets, controls)?;
        Ok(self)
    }

    pub fn apply_unitary_in_place(
        &mut self,
        matrix: &CMatrix,
        targets: &[usize],
        controls: &[Control],
    ) -> Result<()> {
        self.check_wires(targets, controls)?;
        let sub = 1usize << targets.len();
        if matrix.nrows() != sub || matrix.ncols() != sub {
            return Err(Error::domain(format!(
                "matrix is {}x{} but {} target(s) need {sub}x{sub}",
                matrix.nrows(),
                matrix.ncols(),
                targets.len()
            )));
        }
        let defect = unitarity_defect(matrix);
        if defect > UNITARY_TOL {
            return Err(Error::domain(format!("matrix is not unitary (defect {defect:.3e})")));
        }
        self.apply_matrix_unchecked(matrix, targets, controls);
        Ok(())
    }

    /// Gate kernel without validation; callers guarantee wires and shape.
    pub(crate) fn apply_matrix_unchecked(&mut self, matrix: &CMatrix, targets: &[usize], controls: &[Control]) {
        let sub = 1usize << targets.len();
        let offsets: Vec<usize> = (0..sub)
            .map(|s| {
                targets
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| s >> i & 1 == 1)
                    .map(|(_, &t)| 1usize << t)
                    .sum()
            })
            .collect();
        let target_mask: usize = targets.iter().map(|&t| 1usize << t).sum();
        let (ctrl_mask, ctrl_value) = control_masks(controls);
        let mut gathered = vec![ZERO; sub];
        for base in 0..self.dim() {
            if base & target_mask != 0 || base & ctrl_mask != ctrl_value {
                continue;
            }
            for (g, off) in gathered.iter_mut().zip(&offsets) {
                *g = self.amplitudes[base | off];
            }
            for (row, off) in offsets.iter().enumerate() {
                let mut acc = ZERO;
                for (col, g) in gathered.iter().enumerate() {
                    acc += matrix[(row, col)] * g;
                }
                self.amplitudes[base | off] = acc;
            }
        }
    }

    /// Multiplies amplitude `k` by `phase(k)` wherever the controls are satisfied.
    /// This is the fast path for every basis-diagonal operator.
    pub fn apply_diagonal_in_place<F>(&mut self, controls: &[Control], phase: F)
    where
        F: Fn(usize) -> C64,
    {
        let (ctrl_mask, ctrl_value) = control_masks(controls);
        for (k, a) in self.amplitudes.iter_mut().enumerate() {
            if k & ctrl_mask == ctrl_value {
                *a *= phase(k);
            }
        }
    }

    pub(crate) fn check_wires(&self, targets: &[usize], controls: &[Control]) -> Result<()> {
        let mut seen = 0usize;
        for q in targets.iter().copied().chain(controls.iter().map(|c| c.qubit)) {
            if q >= self.n_qubits {
                return Err(Error::domain(format!(
                    "qubit {q} out of range for {} qubits",
                    self.n_qubits
                )));
            }
            if seen >> q & 1 == 1 {
                return Err(Error::domain(format!("qubit {q} used more than once")));
            }
            seen |= 1 << q;
        }
        Ok(())
    }

    /// Probability of every pattern on `qubits` (bit `i` of the pattern is `qubits[i]`).
    fn pattern_weights(&self, qubits: &[usize]) -> Vec<f64> {
        let mut weights = vec![CompensatedSum::default(); 1 << qubits.len()];
        for (k, a) in self.amplitudes.iter().enumerate() {
            weights[extract_bits(k, qubits)].add(a.norm_sqr());
        }
        weights.iter().map(CompensatedSum::value).collect()
    }

    /// Collapses onto `pattern` on `qubits` and renormalizes. Returns `None`
    /// when the pattern has (numerically) zero probability.
    pub fn postselect(&self, qubits: &[usize], pattern: usize, post: PostState) -> Result<Option<MeasurementOutcome>> {
        self.check_measured(qubits)?;
        let total = self.norm_sqr();
        let weight = self.pattern_weights(qubits)[pattern] / total;
        if weight <= NULL_PROBABILITY {
            return Ok(None);
        }
        Ok(Some(self.collapse(qubits, pattern, weight, post)))
    }

    /// Measures `qubits` in the computational basis.
    pub fn measure_qubits(&self, qubits: &[usize], mode: MeasureMode, post: PostState) -> Result<Vec<MeasurementOutcome>> {
        self.check_measured(qubits)?;
        let total = self.norm_sqr();
        if total == 0.0 {
            return Err(Error::domain("cannot measure a zero vector"));
        }
        let weights: Vec<f64> = self.pattern_weights(qubits).into_iter().map(|w| w / total).collect();
        match mode {
            MeasureMode::Branch => Ok(weights
                .iter()
                .enumerate()
                .filter(|(_, &w)| w > NULL_PROBABILITY)
                .map(|(pattern, &w)| self.collapse(qubits, pattern, w, post))
                .collect()),
            MeasureMode::Sample { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let pattern = draw(&weights, &mut rng);
                Ok(vec![self.collapse(qubits, pattern, weights[pattern], post)])
            }
        }
    }

    /// Histogram of `shots` seeded measurements of `qubits`, keyed by pattern.
    pub fn sample_counts(&self, qubits: &[usize], shots: usize, seed: u64) -> Result<BTreeMap<usize, usize>> {
        self.check_measured(qubits)?;
        let total = self.norm_sqr();
        let weights: Vec<f64> = self.pattern_weights(qubits).into_iter().map(|w| w / total).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            *counts.entry(draw(&weights, &mut rng)).or_insert(0) += 1;
        }
        Ok(counts)
    }

    fn check_measured(&self, qubits: &[usize]) -> Result<()> {
        if qubits.is_empty() {
            return Err(Error::domain("no qubits to measure"));
        }
        self.check_wires(qubits, &[])
    }

    fn collapse(&self, qubits: &[usize], pattern: usize, probability: f64, post: PostState) -> MeasurementOutcome {
        let scale = 1.0 / (probability * self.norm_sqr()).sqrt();
        let post_state = match post {
            PostState::Retain => {
                let amplitudes = self
                    .amplitudes
                    .iter()
                    .enumerate()
                    .map(|(k, a)| if extract_bits(k, qubits) == pattern { a * scale } else { ZERO })
                    .collect();
                Statevector { n_qubits: self.n_qubits, amplitudes }
            }
            PostState::Discard => {
                let kept: Vec<usize> = (0..self.n_qubits).filter(|q| !qubits.contains(q)).collect();
                let mut amplitudes = vec![ZERO; 1 << kept.len()];
                for (k, a) in self.amplitudes.iter().enumerate() {
                    if extract_bits(k, qubits) == pattern {
                        amplitudes[extract_bits(k, &kept)] = a * scale;
                    }
                }
                Statevector { n_qubits: kept.len(), amplitudes }
            }
        };
        MeasurementOutcome { observed_bits: pattern, probability, post_state }
    }

    /// `Σ_{k: label(k)=α} |c_k|²` for every label `α` that occurs.
    /// Labels with zero weight are still listed when some basis state carries them.
    pub fn sector_probabilities<L, F>(&self, labeler: F) -> BTreeMap<L, f64>
    where
        L: Ord,
        F: Fn(usize) -> L,
    {
        let mut sums = BTreeMap::new();
        for (k, a) in self.amplitudes.iter().enumerate() {
            sums.entry(labeler(k)).or_insert_with(CompensatedSum::default).add(a.norm_sqr());
        }
        sums.into_iter().map(|(l, s)| (l, s.value())).collect()
    }
}

fn control_masks(controls: &[Control]) -> (usize, usize) {
    controls.iter().fold((0, 0), |(mask, value), c| {
        (mask | 1 << c.qubit, value | (c.on as usize) << c.qubit)
    })
}

/// Gathers bits `qubits[i]` of `k` into bit `i` of the result.
#[inline]
pub fn extract_bits(k: usize, qubits: &[usize]) -> usize {
    qubits
        .iter()
        .enumerate()
        .fold(0, |acc, (i, &q)| acc | (k >> q & 1) << i)
}

fn draw<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{binomial, popcount};
    use nalgebra::dmatrix;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn x() -> CMatrix {
        dmatrix![ZERO, ONE; ONE, ZERO]
    }

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn basis_states() {
        let vac = Statevector::new_basis_state(3, 0).unwrap();
        assert_eq!(vac.amplitudes()[0], ONE);
        assert_eq!(vac.norm_sqr(), 1.0);
        let s = Statevector::new_basis_state(2, 3).unwrap();
        assert_eq!(s.amplitudes()[3], ONE);
        assert!(matches!(Statevector::new_basis_state(1, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn bit_flip_and_bell() {
        let s = Statevector::new_basis_state(2, 0).unwrap().apply_unitary(&x(), &[0], &[]).unwrap();
        assert_eq!(s.amplitudes()[1], ONE);

        let plus = Statevector::from_amplitudes(vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2), ZERO, ZERO]).unwrap();
        let bell = plus.apply_unitary(&x(), &[1], &[Control::on(0)]).unwrap();
        let expected = [c(FRAC_1_SQRT_2), ZERO, ZERO, c(FRAC_1_SQRT_2)];
        for (a, b) in bell.amplitudes().iter().zip(expected) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn open_control_fires_on_zero() {
        // |10⟩: qubit 1 set, so an X on qubit 0 controlled on qubit 1 being 0 does nothing.
        let s = Statevector::new_basis_state(2, 2).unwrap();
        let out = s.clone().apply_unitary(&x(), &[0], &[Control::off(1)]).unwrap();
        assert_eq!(out, s);
        let fired = Statevector::new_basis_state(2, 0)
            .unwrap()
            .apply_unitary(&x(), &[0], &[Control::off(1)])
            .unwrap();
        assert_eq!(fired.amplitudes()[1], ONE);
    }

    #[test]
    fn rejects_bad_wires_and_matrices() {
        let s = Statevector::new_basis_state(2, 0).unwrap();
        assert!(s.clone().apply_unitary(&x(), &[0], &[Control::on(0)]).is_err());
        assert!(s.clone().apply_unitary(&x(), &[2], &[]).is_err());
        let bad = dmatrix![ONE, ONE; ZERO, ONE];
        assert!(matches!(s.apply_unitary(&bad, &[0], &[]), Err(Error::Domain(_))));
    }

    #[test]
    fn bell_measurement_branches() {
        let bell = Statevector::from_amplitudes(vec![c(FRAC_1_SQRT_2), ZERO, ZERO, c(FRAC_1_SQRT_2)]).unwrap();
        let outs = bell.measure_qubits(&[0], MeasureMode::Branch, PostState::Retain).unwrap();
        assert_eq!(outs.len(), 2);
        for o in &outs {
            assert!((o.probability - 0.5).abs() < 1e-12);
        }
        assert!((outs[0].post_state.amplitudes()[0] - ONE).norm() < 1e-12);
        assert!((outs[1].post_state.amplitudes()[3] - ONE).norm() < 1e-12);

        let det = Statevector::new_basis_state(2, 2).unwrap();
        let outs = det.measure_qubits(&[0], MeasureMode::Branch, PostState::Discard).unwrap();
        assert_eq!(outs.len(), 1);
        assert_eq!(outs[0].observed_bits, 0);
        assert_eq!(outs[0].probability, 1.0);
        assert_eq!(outs[0].post_state.n_qubits(), 1);
        assert_eq!(outs[0].post_state.amplitudes()[1], ONE);

        assert!(det.measure_qubits(&[], MeasureMode::Branch, PostState::Retain).is_err());
    }

    #[test]
    fn sample_mode_is_seeded() {
        let bell = Statevector::from_amplitudes(vec![c(FRAC_1_SQRT_2), ZERO, ZERO, c(FRAC_1_SQRT_2)]).unwrap();
        let a = bell.measure_qubits(&[0, 1], MeasureMode::Sample { seed: 11 }, PostState::Retain).unwrap();
        let b = bell.measure_qubits(&[0, 1], MeasureMode::Sample { seed: 11 }, PostState::Retain).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 1);
        assert!(a[0].observed_bits == 0 || a[0].observed_bits == 3);
    }

    #[test]
    fn sector_probabilities_binomial() {
        let u = Statevector::uniform(2).unwrap();
        let p = u.sector_probabilities(popcount);
        assert_eq!(p.len(), 3);
        assert!((p[&0] - 0.25).abs() < 1e-15);
        assert!((p[&1] - 0.5).abs() < 1e-15);
        assert!((p[&2] - 0.25).abs() < 1e-15);

        let u = Statevector::uniform(16).unwrap();
        let p = u.sector_probabilities(popcount);
        let exact = binomial(16, 8) as f64 / 65536.0;
        assert!((p[&8] - exact).abs() < 1e-12);
        assert!((p.values().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ancilla_extension_and_discard_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = Statevector::random(3, &mut rng).unwrap();
        let ext = s.with_ancillas(2).unwrap();
        let back = ext.postselect(&[3, 4], 0, PostState::Discard).unwrap().unwrap();
        assert!(back.post_state.max_deviation(&s).unwrap() < 1e-15);
        assert!((back.probability - 1.0).abs() < 1e-14);
    }
}
