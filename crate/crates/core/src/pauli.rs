//! Pauli strings, Pauli sums, Jordan–Wigner operators and symmetry operators.
//!
//! A [`PauliString`] stores one letter per qubit (`factors[j]` acts on qubit
//! `j`) and an exact phase `i^k`. Its textual form lists the highest qubit
//! first, e.g. `-iXZI` is `−i · X₂ Z₁ I₀`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::math::{popcount, CMatrix, C64, I, ONE, ZERO};
use crate::statevec::Statevector;
use crate::symmetry::SymmetryKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn has_x(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    fn has_z(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    /// `a·b = i^k · c`.
    fn product(a: Pauli, b: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (a, b) {
            (I, p) | (p, I) => (0, p),
            (X, X) | (Y, Y) | (Z, Z) => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
        }
    }

    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Quarter-turn power `i^k`.
fn quarter(k: u8) -> C64 {
    match k % 4 {
        0 => ONE,
        1 => I,
        2 => -ONE,
        _ => -I,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    /// Phase is `i^phase`, always reduced mod 4.
    phase: u8,
    factors: Vec<Pauli>,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString { phase: 0, factors: vec![Pauli::I; n] }
    }

    pub fn new(factors: Vec<Pauli>) -> Self {
        PauliString { phase: 0, factors }
    }

    /// A single letter on `qubit` of an `n`-qubit register.
    pub fn single(n: usize, qubit: usize, p: Pauli) -> Result<Self> {
        if qubit >= n {
            return Err(Error::domain(format!("qubit {qubit} out of range for {n} qubits")));
        }
        let mut s = PauliString::identity(n);
        s.factors[qubit] = p;
        Ok(s)
    }

    /// Letters placed on the given qubits, identity elsewhere.
    pub fn from_sparse(n: usize, letters: &[(usize, Pauli)]) -> Result<Self> {
        let mut s = PauliString::identity(n);
        for &(q, p) in letters {
            if q >= n {
                return Err(Error::domain(format!("qubit {q} out of range for {n} qubits")));
            }
            if s.factors[q] != Pauli::I {
                return Err(Error::domain(format!("qubit {q} given twice")));
            }
            s.factors[q] = p;
        }
        Ok(s)
    }

    /// `⊗_j Z_j`, the parity operator.
    pub fn parity(n: usize) -> Self {
        PauliString::new(vec![Pauli::Z; n])
    }

    pub fn with_phase(mut self, quarter_turns: u8) -> Self {
        self.phase = (self.phase + quarter_turns) % 4;
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Pauli] {
        &self.factors
    }

    pub fn phase(&self) -> C64 {
        quarter(self.phase)
    }

    pub fn phase_quarters(&self) -> u8 {
        self.phase
    }

    pub fn is_identity_letters(&self) -> bool {
        self.factors.iter().all(|&p| p == Pauli::I)
    }

    /// Same letters with unit phase.
    pub fn letters_only(&self) -> PauliString {
        PauliString { phase: 0, factors: self.factors.clone() }
    }

    fn masks(&self) -> (usize, usize, u8) {
        let mut x = 0;
        let mut z = 0;
        let mut ny = 0u8;
        for (j, &p) in self.factors.iter().enumerate() {
            if p.has_x() {
                x |= 1 << j;
            }
            if p.has_z() {
                z |= 1 << j;
            }
            if p == Pauli::Y {
                ny = (ny + 1) % 4;
            }
        }
        (x, z, ny)
    }

    pub fn adjoint(&self) -> PauliString {
        PauliString { phase: (4 - self.phase) % 4, factors: self.factors.clone() }
    }

    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        if self.n_qubits() != other.n_qubits() {
            return Err(Error::domain("Pauli strings act on different register sizes"));
        }
        let mut phase = self.phase + other.phase;
        let factors = self
            .factors
            .iter()
            .zip(&other.factors)
            .map(|(&a, &b)| {
                let (k, p) = Pauli::product(a, b);
                phase += k;
                p
            })
            .collect();
        Ok(PauliString { phase: phase % 4, factors })
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let (xa, za, _) = self.masks();
        let (xb, zb, _) = other.masks();
        popcount(xa & zb ^ za & xb) % 2 == 0
    }

    /// Exact action: `|k⟩ ↦ phase · i^{#Y} · (−1)^{popcount(k & z)} |k ⊕ x⟩`.
    pub fn apply(&self, state: &Statevector) -> Result<Statevector> {
        check_size(self.n_qubits(), state)?;
        let (x, z, ny) = self.masks();
        let c = quarter(self.phase + ny);
        let amps = state.amplitudes();
        let mut out = vec![ZERO; amps.len()];
        for (k, a) in amps.iter().enumerate() {
            let v = a * c;
            out[k ^ x] = if popcount(k & z) % 2 == 1 { -v } else { v };
        }
        Statevector::from_amplitudes(out)
    }

    pub fn to_matrix(&self) -> CMatrix {
        let (x, z, ny) = self.masks();
        let c = quarter(self.phase + ny);
        let dim = 1usize << self.n_qubits();
        let mut m = CMatrix::zeros(dim, dim);
        for k in 0..dim {
            m[(k ^ x, k)] = if popcount(k & z) % 2 == 1 { -c } else { c };
        }
        m
    }
}

/// `p|ψ⟩`.
pub fn apply_pauli_string(state: &Statevector, p: &PauliString) -> Result<Statevector> {
    p.apply(state)
}

fn check_size(n: usize, state: &Statevector) -> Result<()> {
    if state.n_qubits() != n {
        return Err(Error::domain(format!(
            "operator acts on {n} qubits but the state has {}",
            state.n_qubits()
        )));
    }
    Ok(())
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(prefix)?;
        for p in self.factors.iter().rev() {
            write!(f, "{}", p.letter())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut rest = s.trim();
        let mut phase = 0u8;
        if let Some(r) = rest.strip_prefix('-') {
            phase = 2;
            rest = r;
        } else if let Some(r) = rest.strip_prefix('+') {
            rest = r;
        }
        if let Some(r) = rest.strip_prefix('i') {
            phase += 1;
            rest = r;
        }
        let factors = rest
            .trim()
            .chars()
            .rev()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::domain(format!("invalid Pauli letter '{other}' in '{s}'"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if factors.is_empty() {
            return Err(Error::domain(format!("empty Pauli string '{s}'")));
        }
        Ok(PauliString { phase, factors })
    }
}

/// `Σ_t c_t P_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<(C64, PauliString)>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        PauliSum { n_qubits, terms: Vec::new() }
    }

    pub fn identity(n_qubits: usize) -> Self {
        PauliSum::from_terms(n_qubits, vec![(ONE, PauliString::identity(n_qubits))]).expect("sizes match")
    }

    pub fn from_terms(n_qubits: usize, terms: Vec<(C64, PauliString)>) -> Result<Self> {
        if let Some((_, p)) = terms.iter().find(|(_, p)| p.n_qubits() != n_qubits) {
            return Err(Error::domain(format!("term {p} does not act on {n_qubits} qubits")));
        }
        Ok(PauliSum { n_qubits, terms })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(C64, PauliString)] {
        &self.terms
    }

    pub fn push(&mut self, coefficient: C64, p: PauliString) -> Result<()> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::domain(format!("term {p} does not act on {} qubits", self.n_qubits)));
        }
        self.terms.push((coefficient, p));
        Ok(())
    }

    pub fn scaled(&self, factor: C64) -> PauliSum {
        PauliSum {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(c, p)| (c * factor, p.clone())).collect(),
        }
    }

    pub fn add(&self, other: &PauliSum) -> Result<PauliSum> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::domain("Pauli sums act on different register sizes"));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(PauliSum { n_qubits: self.n_qubits, terms })
    }

    /// Operator product `self · other`, simplified.
    pub fn mul(&self, other: &PauliSum) -> Result<PauliSum> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::domain("Pauli sums act on different register sizes"));
        }
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (a, p) in &self.terms {
            for (b, q) in &other.terms {
                terms.push((a * b, p.mul(q)?));
            }
        }
        Ok(PauliSum { n_qubits: self.n_qubits, terms }.simplified(0.0))
    }

    pub fn adjoint(&self) -> PauliSum {
        PauliSum {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(c, p)| (c.conj(), p.adjoint())).collect(),
        }
    }

    /// Merges equal letter patterns (phases folded into coefficients) and drops
    /// terms with `|c| ≤ tol`. Terms come out in a canonical order.
    pub fn simplified(&self, tol: f64) -> PauliSum {
        let mut merged: BTreeMap<Vec<Pauli>, C64> = BTreeMap::new();
        for (c, p) in &self.terms {
            *merged.entry(p.factors.clone()).or_insert(ZERO) += c * p.phase();
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| c.norm() > tol)
            .map(|(factors, c)| (c, PauliString::new(factors)))
            .collect();
        PauliSum { n_qubits: self.n_qubits, terms }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let diff = self.add(&self.adjoint().scaled(-ONE)).expect("same size");
        diff.simplified(tol).terms.is_empty()
    }

    pub fn apply(&self, state: &Statevector) -> Result<Statevector> {
        check_size(self.n_qubits, state)?;
        let mut out = vec![ZERO; state.dim()];
        for (c, p) in &self.terms {
            let (x, z, ny) = p.masks();
            let coeff = c * quarter(p.phase + ny);
            for (k, a) in state.amplitudes().iter().enumerate() {
                let v = a * coeff;
                out[k ^ x] += if popcount(k & z) % 2 == 1 { -v } else { v };
            }
        }
        Statevector::from_amplitudes(out)
    }

    /// `⟨ψ|H|ψ⟩`.
    pub fn expectation(&self, state: &Statevector) -> Result<C64> {
        state.inner(&self.apply(state)?)
    }

    pub fn to_matrix(&self) -> CMatrix {
        let dim = 1usize << self.n_qubits;
        self.terms
            .iter()
            .fold(CMatrix::zeros(dim, dim), |acc, (c, p)| acc + p.to_matrix() * *c)
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (c, p)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({}{:+}i) {p}", c.re, c.im)?;
        }
        Ok(())
    }
}

/// Operator diagonal in the natural basis, stored as one eigenvalue per index.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalOperator {
    n_qubits: usize,
    eigenvalues: Vec<C64>,
}

impl DiagonalOperator {
    pub fn from_fn<F: Fn(usize) -> C64>(n_qubits: usize, f: F) -> Self {
        DiagonalOperator { n_qubits, eigenvalues: (0..1usize << n_qubits).map(f).collect() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    pub fn apply(&self, state: &Statevector) -> Result<Statevector> {
        check_size(self.n_qubits, state)?;
        let out = state
            .amplitudes()
            .iter()
            .zip(&self.eigenvalues)
            .map(|(a, e)| a * e)
            .collect();
        Statevector::from_amplitudes(out)
    }

    pub fn to_matrix(&self) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.eigenvalues))
    }
}

/// A symmetry operator in whichever representation suits it.
#[derive(Debug, Clone, PartialEq)]
pub enum SymmetryOperator {
    Diagonal(DiagonalOperator),
    Sum(PauliSum),
}

impl SymmetryOperator {
    pub fn apply(&self, state: &Statevector) -> Result<Statevector> {
        match self {
            SymmetryOperator::Diagonal(d) => d.apply(state),
            SymmetryOperator::Sum(s) => s.apply(state),
        }
    }

    pub fn to_matrix(&self) -> CMatrix {
        match self {
            SymmetryOperator::Diagonal(d) => d.to_matrix(),
            SymmetryOperator::Sum(s) => s.to_matrix(),
        }
    }
}

/// `N̂`, `S_z` and parity as diagonal operators; `S²` as the Pauli sum
/// `¼ Σ_{j,l} (X_jX_l + Y_jY_l + Z_jZ_l)`.
pub fn build_symmetry_operator(kind: SymmetryKind, n: usize) -> Result<SymmetryOperator> {
    if n == 0 {
        return Err(Error::domain("symmetry operators need at least one qubit"));
    }
    Ok(match kind {
        SymmetryKind::ParticleNumber => {
            SymmetryOperator::Diagonal(DiagonalOperator::from_fn(n, |k| C64::new(popcount(k) as f64, 0.0)))
        }
        SymmetryKind::Sz => SymmetryOperator::Diagonal(DiagonalOperator::from_fn(n, |k| {
            C64::new(n as f64 / 2.0 - popcount(k) as f64, 0.0)
        })),
        SymmetryKind::Parity => SymmetryOperator::Diagonal(DiagonalOperator::from_fn(n, |k| {
            if popcount(k) % 2 == 0 { ONE } else { -ONE }
        })),
        SymmetryKind::TotalSpin => SymmetryOperator::Sum(s_squared_sum(n)),
    })
}

/// `S² = ¼ Σ_{j,l} (X_jX_l + Y_jY_l + Z_jZ_l)` over all ordered pairs, including `j = l`.
pub fn s_squared_sum(n: usize) -> PauliSum {
    let mut sum = PauliSum::zero(n);
    let quarter_coeff = C64::new(0.25, 0.0);
    for j in 0..n {
        for l in 0..n {
            for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                let s = if j == l {
                    PauliString::identity(n)
                } else {
                    PauliString::from_sparse(n, &[(j, p), (l, p)]).expect("distinct in-range qubits")
                };
                sum.push(quarter_coeff, s).expect("sizes match");
            }
        }
    }
    sum
}

/// `S² = n(4−n)/4 · I + Σ_{j<l} P_jl` with the transposition written as
/// `P_jl = (I + X_jX_l + Y_jY_l + Z_jZ_l)/2`. The constant is kept as its own term.
pub fn s_squared_transposition_sum(n: usize) -> PauliSum {
    let mut sum = PauliSum::zero(n);
    sum.push(C64::new(n as f64 * (4.0 - n as f64) / 4.0, 0.0), PauliString::identity(n))
        .expect("sizes match");
    let half = C64::new(0.5, 0.0);
    for j in 0..n {
        for l in j + 1..n {
            sum.push(half, PauliString::identity(n)).expect("sizes match");
            for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                let s = PauliString::from_sparse(n, &[(j, p), (l, p)]).expect("distinct in-range qubits");
                sum.push(half, s).expect("sizes match");
            }
        }
    }
    sum
}

/// `N̂ = Σ_j (I − Z_j)/2`.
pub fn number_operator_sum(n: usize) -> PauliSum {
    let mut sum = PauliSum::zero(n);
    for j in 0..n {
        sum.push(C64::new(0.5, 0.0), PauliString::identity(n)).expect("sizes match");
        sum.push(C64::new(-0.5, 0.0), PauliString::single(n, j, Pauli::Z).expect("in range"))
            .expect("sizes match");
    }
    sum
}

/// `S_z = Σ_j Z_j / 2`.
pub fn sz_sum(n: usize) -> PauliSum {
    let mut sum = PauliSum::zero(n);
    for j in 0..n {
        sum.push(C64::new(0.5, 0.0), PauliString::single(n, j, Pauli::Z).expect("in range"))
            .expect("sizes match");
    }
    sum
}

/// Qubit image of `a†_j`: `(X_j − iY_j)/2 ⊗ Π_{k<j} (−Z_k)`.
pub fn jwt_creation(j: usize, n: usize) -> Result<PauliSum> {
    if j >= n {
        return Err(Error::domain(format!("orbital {j} out of range for {n} qubits")));
    }
    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
    let tail: Vec<(usize, Pauli)> = (0..j).map(|k| (k, Pauli::Z)).collect();
    let with = |p: Pauli| {
        let mut letters = tail.clone();
        letters.push((j, p));
        PauliString::from_sparse(n, &letters).expect("distinct in-range qubits")
    };
    PauliSum::from_terms(
        n,
        vec![(C64::new(0.5 * sign, 0.0), with(Pauli::X)), (C64::new(0.0, -0.5 * sign), with(Pauli::Y))],
    )
}

/// Qubit image of `a_j`, the adjoint of [`jwt_creation`].
pub fn jwt_annihilation(j: usize, n: usize) -> Result<PauliSum> {
    Ok(jwt_creation(j, n)?.adjoint())
}
