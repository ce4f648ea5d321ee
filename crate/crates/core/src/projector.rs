//! Symmetry projectors in all their representations, and the oracle built
//! from a projector.
//!
//! Every diagonal form works with `ĵ = m̂ − m_α`, the integer code of the
//! symmetry (see [`crate::symmetry`]) shifted by the target's code. Each form
//! is computed by its own route so the forms can be checked against each
//! other:
//!
//! - delta filter: zero every amplitude whose label differs from the target;
//! - Löwdin: `Π_{β≠α} (Ŝ − λ_β)/(λ_α − λ_β)` on physical eigenvalues;
//! - closed parity form: `(1 ± π)/2` with `π = ⊗Z`;
//! - gauge integral: `(1/P) Σ_k e^{iφ_k ĵ}` evaluated per basis state;
//! - discrete sum: `Σ_l β_l V_l` with `V_l` built from per-qubit phase gates;
//! - product: `Π_l (1 + e^{iπĵ/2^l})/2`, each factor applied as `(1 + V)/2`;
//! - oracle: `(I − U_f)/2` with `U_f = I − 2P` built from sector membership.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GateName};
use crate::error::{Error, Result};
use crate::math::{bits_to_exceed, cis, C64, ONE, ZERO};
use crate::pauli::{build_symmetry_operator, PauliString, SymmetryOperator};
use crate::statevec::{Statevector, NULL_PROBABILITY};
use crate::symmetry::{spin_eigenbasis_bruteforce, HalfInt, SymmetryKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "form")]
pub enum ProjectorForm {
    DeltaFilter,
    Lowdin,
    ParityClosed,
    /// `n_points` gauge angles; `None` uses one point per possible code value.
    GaugeIntegral { n_points: Option<usize> },
    /// `M + 1` terms; `None` uses the largest achievable code `m_M`.
    DiscreteSum { m: Option<usize> },
    /// `n_factors` binary factors; `None` uses the fewest that are exact.
    Product { n_factors: Option<usize> },
    Oracle,
}

impl ProjectorForm {
    pub fn name(&self) -> &'static str {
        match self {
            ProjectorForm::DeltaFilter => "delta_filter",
            ProjectorForm::Lowdin => "lowdin",
            ProjectorForm::ParityClosed => "parity_closed",
            ProjectorForm::GaugeIntegral { .. } => "gauge_integral",
            ProjectorForm::DiscreteSum { .. } => "discrete_sum",
            ProjectorForm::Product { .. } => "product",
            ProjectorForm::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProjectorSpec {
    pub kind: SymmetryKind,
    pub target: HalfInt,
    pub form: ProjectorForm,
}

impl ProjectorSpec {
    pub fn new(kind: SymmetryKind, target: HalfInt, form: ProjectorForm) -> Self {
        ProjectorSpec { kind, target, form }
    }

    pub fn filter(kind: SymmetryKind, target: HalfInt) -> Self {
        ProjectorSpec::new(kind, target, ProjectorForm::DeltaFilter)
    }

    /// Whether this form, on `n` qubits, is the exact sector projector.
    pub fn is_exact(&self, n: usize) -> Result<bool> {
        let target = SectorTarget::new(self.kind, self.target, n)?;
        Ok(match self.form {
            ProjectorForm::GaugeIntegral { n_points } => {
                let points = n_points.unwrap_or(target.code_span() as usize + 1);
                points as i64 > target.max_shift()
            }
            _ => true,
        })
    }
}

/// Integer view of a diagonal sector target on a fixed register.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectorTarget {
    pub kind: SymmetryKind,
    pub n_qubits: usize,
    /// `m_α`.
    pub code: i64,
    /// `(m₀, m_M)`.
    pub range: (i64, i64),
}

impl SectorTarget {
    pub fn new(kind: SymmetryKind, value: HalfInt, n_qubits: usize) -> Result<Self> {
        if kind == SymmetryKind::TotalSpin {
            check_spin_target(value, n_qubits)?;
            return Ok(SectorTarget { kind, n_qubits, code: value.twice(), range: (0, n_qubits as i64) });
        }
        Ok(SectorTarget {
            kind,
            n_qubits,
            code: kind.integer_of(value, n_qubits)?,
            range: kind.integer_range(n_qubits)?,
        })
    }

    /// `max |m − m_α|` over the code range.
    pub fn max_shift(&self) -> i64 {
        (self.code - self.range.0).max(self.range.1 - self.code)
    }

    /// `m_M − m₀`.
    pub fn code_span(&self) -> i64 {
        self.range.1 - self.range.0
    }

    /// `ĵ(k) = m(k) − m_α`.
    #[inline]
    pub fn shift(&self, k: usize) -> i64 {
        self.kind.integer_label(k) - self.code
    }

    #[inline]
    pub fn contains(&self, k: usize) -> bool {
        self.shift(k) == 0
    }

    /// Fewest binary factors `Π_l (1 + e^{iπĵ/2^l})/2` that make the product
    /// exact: `2^n > max |ĵ|`.
    pub fn default_factor_count(&self) -> usize {
        bits_to_exceed(self.max_shift() as u64) as usize
    }
}

fn check_spin_target(value: HalfInt, n: usize) -> Result<()> {
    let t = value.twice();
    if t < 0 || t > n as i64 || (n as i64 - t) % 2 != 0 {
        return Err(Error::domain(format!("S = {value} is not reachable with {n} spins")));
    }
    Ok(())
}

/// `P|ψ⟩` together with `p = ⟨ψ|P|ψ⟩ / ⟨ψ|ψ⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projected {
    pub state: Statevector,
    pub weight: f64,
    /// False when the form only approximates the sector projector.
    pub exact: bool,
}

impl Projected {
    fn from_raw(input: &Statevector, state: Statevector, exact: bool) -> Result<Self> {
        let weight = input.inner(&state)?.re / input.norm_sqr();
        Ok(Projected { state, weight: weight.clamp(0.0, 1.0), exact })
    }

    pub fn is_null(&self) -> bool {
        self.weight <= NULL_PROBABILITY
    }

    /// The renormalized projected state; errors when the sector is empty.
    pub fn normalize(self) -> Result<Statevector> {
        if self.is_null() {
            return Err(Error::empty(format!("projected weight {:.3e}", self.weight)));
        }
        Ok(self.state.normalized())
    }
}

/// Exact sector filter: every amplitude outside the sector is set to zero.
/// Total spin uses the brute-force `|S, M⟩` basis.
pub fn classical_filter(state: &Statevector, kind: SymmetryKind, value: HalfInt) -> Result<Projected> {
    let n = state.n_qubits();
    let target = SectorTarget::new(kind, value, n)?;
    let out = if kind == SymmetryKind::TotalSpin {
        let mut acc = vec![ZERO; state.dim()];
        for e in spin_eigenbasis_bruteforce(n)?.into_iter().filter(|e| e.s == value) {
            let overlap: C64 = e.amplitudes.iter().zip(state.amplitudes()).map(|(a, b)| a.conj() * b).sum();
            acc.iter_mut().zip(&e.amplitudes).for_each(|(o, a)| *o += overlap * a);
        }
        Statevector::from_amplitudes(acc)?
    } else {
        let amps = state
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(k, a)| if target.contains(k) { *a } else { ZERO })
            .collect();
        Statevector::from_amplitudes(amps)?
    };
    Projected::from_raw(state, out, true)
}

pub fn apply_projector(state: &Statevector, spec: &ProjectorSpec) -> Result<Projected> {
    let n = state.n_qubits();
    let target = SectorTarget::new(spec.kind, spec.target, n)?;
    let diagonal_only = |form: &str| {
        if spec.kind.is_diagonal() {
            Ok(())
        } else {
            Err(Error::unsupported(format!("{form} form for {}", spec.kind)))
        }
    };
    match spec.form {
        ProjectorForm::DeltaFilter => classical_filter(state, spec.kind, spec.target),
        ProjectorForm::Lowdin => Projected::from_raw(state, lowdin(state, spec.kind, spec.target)?, true),
        ProjectorForm::ParityClosed => {
            if spec.kind != SymmetryKind::Parity {
                return Err(Error::unsupported(format!("closed parity form for {}", spec.kind)));
            }
            let pi_psi = PauliString::parity(n).apply(state)?;
            let sign = C64::new(spec.target.to_f64(), 0.0);
            let half = C64::new(0.5, 0.0);
            Projected::from_raw(state, state.linear_combination(half, &pi_psi, half * sign)?, true)
        }
        ProjectorForm::GaugeIntegral { n_points } => {
            diagonal_only("gauge integral")?;
            let points = n_points.unwrap_or(target.code_span() as usize + 1);
            let op = gauge_integral_projector(n, spec.kind, spec.target, points)?;
            let out = state.amplitudes().iter().zip(&op).map(|(a, e)| a * e).collect();
            Projected::from_raw(state, Statevector::from_amplitudes(out)?, points as i64 > target.max_shift())
        }
        ProjectorForm::DiscreteSum { m } => {
            diagonal_only("discrete sum")?;
            let m = m.unwrap_or(target.range.1 as usize);
            let lcu = lcu_decomposition(spec.kind, n, spec.target, m)?;
            Projected::from_raw(state, lcu.apply(state)?, true)
        }
        ProjectorForm::Product { n_factors } => {
            diagonal_only("product")?;
            let factors = n_factors.unwrap_or(target.default_factor_count());
            let mut psi = state.clone();
            for l in 0..factors {
                let v = binary_factor_unitary(&target, l)?;
                let rotated = v.apply(psi.clone())?;
                psi = psi.linear_combination(C64::new(0.5, 0.0), &rotated, C64::new(0.5, 0.0))?;
            }
            let exact = (1i64 << factors.min(62)) > target.max_shift();
            Projected::from_raw(state, psi, exact)
        }
        ProjectorForm::Oracle => {
            let oracle = Oracle::from_spec(&ProjectorSpec::filter(spec.kind, spec.target), n)?;
            let flipped = oracle.apply_uf(state)?;
            let half = C64::new(0.5, 0.0);
            Projected::from_raw(state, state.linear_combination(half, &flipped, -half)?, true)
        }
    }
}

/// Löwdin product over the other eigenvalues of the spectrum.
fn lowdin(state: &Statevector, kind: SymmetryKind, value: HalfInt) -> Result<Statevector> {
    let n = state.n_qubits();
    let eigen = |v: HalfInt| match kind {
        SymmetryKind::TotalSpin => v.to_f64() * (v.to_f64() + 1.0),
        _ => v.to_f64(),
    };
    let lambda_a = eigen(value);
    let others: Vec<f64> = kind.spectrum(n)?.into_iter().filter(|&v| v != value).map(eigen).collect();
    match build_symmetry_operator(kind, n)? {
        SymmetryOperator::Diagonal(op) => {
            let amps = state
                .amplitudes()
                .iter()
                .zip(op.eigenvalues())
                .map(|(a, s)| {
                    let f: f64 = others.iter().map(|lb| (s.re - lb) / (lambda_a - lb)).product();
                    a * f
                })
                .collect();
            Statevector::from_amplitudes(amps)
        }
        SymmetryOperator::Sum(s2) => {
            let mut psi = state.clone();
            for lb in others {
                let applied = s2.apply(&psi)?;
                let d = 1.0 / (lambda_a - lb);
                psi = applied.linear_combination(C64::new(d, 0.0), &psi, C64::new(-lb * d, 0.0))?;
            }
            Ok(psi)
        }
    }
}

/// `e^{iπĵ/2^l}` as a circuit: one PHASE(π/2^l) per qubit and the global
/// phase `e^{−iπ m_α/2^l}` folded into a PHASE/X/PHASE/X pair on qubit 0.
fn binary_factor_unitary(target: &SectorTarget, l: usize) -> Result<Circuit> {
    if target.kind == SymmetryKind::Parity && l > 0 {
        return Err(Error::unsupported("parity admits a single binary factor"));
    }
    let angle = PI / (1u64 << l.min(62)) as f64;
    phase_ladder(target.n_qubits, angle, -angle * target.code as f64)
}

/// `e^{iγ} ⊗_j PHASE(φ)`; the global phase `γ` is realized as
/// `PHASE(γ) X PHASE(γ) X` on qubit 0.
fn phase_ladder(n: usize, per_qubit: f64, global: f64) -> Result<Circuit> {
    let mut c = Circuit::new(n);
    for q in 0..n {
        c.add(GateName::Phase, &[per_qubit], &[q])?;
    }
    if n > 0 && cis(global) != ONE {
        c.add(GateName::Phase, &[global], &[0])?;
        c.add(GateName::X, &[], &[0])?;
        c.add(GateName::Phase, &[global], &[0])?;
        c.add(GateName::X, &[], &[0])?;
    }
    Ok(c)
}

/// `(1 + e^{iπj/2^l})/2`, the eigenvalue of binary factor `l` on shift `j`.
pub fn binary_factor_eigenvalue(j: i64, l: u32) -> C64 {
    (ONE + cis(PI * j as f64 / (1u64 << l) as f64)) * 0.5
}

/// Eigenvalues of `Π_{l<n_factors} (1 + e^{iπĵ/2^l})/2`, one per basis index.
pub fn product_projector(n: usize, kind: SymmetryKind, value: HalfInt, n_factors: usize) -> Result<Vec<C64>> {
    let target = SectorTarget::new(kind, value, n)?;
    if !kind.is_diagonal() {
        return Err(Error::unsupported("product form for total spin"));
    }
    Ok((0..1usize << n)
        .map(|k| {
            let j = target.shift(k);
            (0..n_factors as u32).map(|l| binary_factor_eigenvalue(j, l)).product()
        })
        .collect())
}

/// Eigenvalues of `(1/P) Σ_{k<P} e^{2πik ĵ/P}`, one per basis index.
/// Exact when `P > max |ĵ|`; otherwise codes congruent to `m_α` mod `P` alias in.
pub fn gauge_integral_projector(n: usize, kind: SymmetryKind, value: HalfInt, n_points: usize) -> Result<Vec<C64>> {
    let target = SectorTarget::new(kind, value, n)?;
    if !kind.is_diagonal() {
        return Err(Error::unsupported("gauge integral for total spin"));
    }
    if n_points == 0 {
        return Err(Error::domain("gauge integral needs at least one point"));
    }
    let p = n_points as f64;
    let table: Vec<C64> = (target.range.0 - target.code..=target.range.1 - target.code)
        .map(|j| (0..n_points).map(|k| cis(2.0 * PI * k as f64 * j as f64 / p)).sum::<C64>() / p)
        .collect();
    let offset = target.code - target.range.0;
    Ok((0..1usize << n).map(|k| table[(target.shift(k) + offset) as usize]).collect())
}

/// Largest entrywise gap between `Π_{l<n} (1 + e^{iπj/2^l})/2` and
/// `(1/M) Σ_{k<M} e^{2πikj/M}` with `M = 2^n`, over `j ∈ [−2M, 2M]`.
pub fn product_vs_sum_deviation(n_bits: u32) -> f64 {
    let m = 1i64 << n_bits;
    (-2 * m..=2 * m)
        .map(|j| {
            let product: C64 = (0..n_bits).map(|l| binary_factor_eigenvalue(j, l)).product();
            let sum: C64 = (0..m).map(|k| cis(2.0 * PI * (k * j) as f64 / m as f64)).sum::<C64>() / m as f64;
            (product - sum).norm()
        })
        .fold(0.0, f64::max)
}

/// One unitary of an LCU expansion: `V = e^{iγ} ⊗_j PHASE(φ)`, so
/// `V|k⟩ = e^{i(γ + φ n₁(k))}|k⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LcuTerm {
    pub beta: f64,
    pub global_phase: f64,
    pub qubit_phase: f64,
}

impl LcuTerm {
    pub fn eigenvalue(&self, k: usize) -> C64 {
        cis(self.global_phase + self.qubit_phase * k.count_ones() as f64)
    }
}

/// `P = Σ_l β_l V_l` with `β_l ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcuDecomposition {
    pub n_qubits: usize,
    pub kind: SymmetryKind,
    pub target: HalfInt,
    pub terms: Vec<LcuTerm>,
}

impl LcuDecomposition {
    /// Number of unitaries in the expansion.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Upper summation index `Λ` of `Σ_{l=0}^{Λ}`, one less than [`Self::len`].
    pub fn upper_index(&self) -> usize {
        self.terms.len().saturating_sub(1)
    }

    pub fn beta_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.beta).sum()
    }

    /// `γ_l = √β_l / √Σβ`.
    pub fn gammas(&self) -> Vec<f64> {
        let total = self.beta_sum();
        self.terms.iter().map(|t| (t.beta / total).sqrt()).collect()
    }

    /// `V_l` as a circuit of per-qubit phase gates plus a global phase.
    pub fn term_circuit(&self, l: usize) -> Result<Circuit> {
        let t = self.terms.get(l).ok_or_else(|| Error::domain(format!("no LCU term {l}")))?;
        phase_ladder(self.n_qubits, t.qubit_phase, t.global_phase)
    }

    /// `Σ_l β_l V_l |ψ⟩`, each `V_l` run as its circuit.
    pub fn apply(&self, state: &Statevector) -> Result<Statevector> {
        let mut acc = Statevector::from_amplitudes(vec![ZERO; state.dim()])?;
        for (l, t) in self.terms.iter().enumerate() {
            let v = self.term_circuit(l)?.apply(state.clone())?;
            acc = acc.linear_combination(ONE, &v, C64::new(t.beta, 0.0))?;
        }
        Ok(acc)
    }
}

/// `P = 1/(M+1) Σ_{l=0}^{M} e^{2πil(m̂ − m_α)/(M+1)}` for the symmetry
/// `kind` on `n` qubits. Parity only admits `M = 1`.
pub fn lcu_decomposition(kind: SymmetryKind, n: usize, target: HalfInt, m: usize) -> Result<LcuDecomposition> {
    let t = SectorTarget::new(kind, target, n)?;
    match kind {
        SymmetryKind::TotalSpin => return Err(Error::unsupported("LCU expansion of total spin")),
        SymmetryKind::Parity if m != 1 => {
            return Err(Error::unsupported("parity phases are per-qubit only for two terms (M = 1)"))
        }
        _ if (m as i64) < t.range.1 => {
            return Err(Error::domain(format!("M = {m} is below the largest code {}", t.range.1)))
        }
        _ => {}
    }
    let count = m + 1;
    let terms = (0..count)
        .map(|l| {
            let angle = 2.0 * PI * l as f64 / count as f64;
            LcuTerm { beta: 1.0 / count as f64, global_phase: -angle * t.code as f64, qubit_phase: angle }
        })
        .collect();
    Ok(LcuDecomposition { n_qubits: n, kind, target, terms })
}

/// Phase oracle of a diagonal sector projector.
#[derive(Debug, Clone, PartialEq)]
pub struct Oracle {
    n_qubits: usize,
    good: Vec<bool>,
}

impl Oracle {
    /// Marks basis states where the chosen projector has eigenvalue 1.
    /// Forms that alias (gauge integral with too few points) mark every aliased sector.
    pub fn from_spec(spec: &ProjectorSpec, n: usize) -> Result<Oracle> {
        if !spec.kind.is_diagonal() {
            return Err(Error::unsupported("oracle for a non-diagonal symmetry"));
        }
        let target = SectorTarget::new(spec.kind, spec.target, n)?;
        let good = match spec.form {
            ProjectorForm::GaugeIntegral { n_points: Some(p) } if p > 0 => {
                (0..1usize << n).map(|k| target.shift(k).rem_euclid(p as i64) == 0).collect()
            }
            _ => (0..1usize << n).map(|k| target.contains(k)).collect(),
        };
        Ok(Oracle { n_qubits: n, good })
    }

    pub fn from_mask(good: Vec<bool>) -> Result<Oracle> {
        let len = good.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::domain(format!("mask length {len} is not a power of two")));
        }
        Ok(Oracle { n_qubits: len.trailing_zeros() as usize, good })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn is_good(&self, k: usize) -> bool {
        self.good[k]
    }

    pub fn good_mask(&self) -> &[bool] {
        &self.good
    }

    /// Diagonal of `U_f = I − 2P`: −1 on the sector, +1 elsewhere.
    pub fn eigenvalues(&self) -> Vec<i8> {
        self.good.iter().map(|&g| if g { -1 } else { 1 }).collect()
    }

    fn check(&self, state: &Statevector) -> Result<()> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::domain(format!(
                "oracle acts on {} qubits but the state has {}",
                self.n_qubits,
                state.n_qubits()
            )));
        }
        Ok(())
    }

    pub fn apply_uf(&self, state: &Statevector) -> Result<Statevector> {
        self.apply_generalized(state, PI)
    }

    /// `U(δ) = I + (e^{iδ} − 1) P`.
    pub fn apply_generalized(&self, state: &Statevector, delta: f64) -> Result<Statevector> {
        self.check(state)?;
        let mut out = state.clone();
        let phase = cis(delta);
        out.apply_diagonal_in_place(&[], |k| if self.good[k] { phase } else { ONE });
        Ok(out)
    }

    /// Good component `P|ψ⟩` and its weight.
    pub fn project(&self, state: &Statevector) -> Result<Projected> {
        self.check(state)?;
        let amps = state
            .amplitudes()
            .iter()
            .zip(&self.good)
            .map(|(a, &g)| if g { *a } else { ZERO })
            .collect();
        Projected::from_raw(state, Statevector::from_amplitudes(amps)?, true)
    }

    /// `p_G = ⟨ψ|P|ψ⟩ / ⟨ψ|ψ⟩`.
    pub fn good_weight(&self, state: &Statevector) -> Result<f64> {
        Ok(self.project(state)?.weight)
    }
}

/// `U_f` for the exact sector projector of `spec`.
pub fn oracle_from_projector(spec: &ProjectorSpec, n: usize) -> Result<Oracle> {
    Oracle::from_spec(spec, n)
}
