//! Symmetry-restoration procedures.
//!
//! Indirect-measurement methods put their ancillas above the system register
//! (system qubits `0..n`, ancillas `n..`), simulate the full circuit and then
//! measure the ancillas in branch mode, so every reported probability is
//! exact. [`ShotStatistics`] turns such a probability into seeded shot counts.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateName};
use crate::error::{Error, Result};
use crate::math::{bits_to_exceed, ceil_tol, floor_tol, CMatrix, C64, ONE, ZERO};
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::projector::{LcuDecomposition, Oracle, SectorTarget};
use crate::statevec::{Control, MeasureMode, PostState, Statevector, NULL_PROBABILITY};
use crate::symmetry::{HalfInt, SymmetryKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[serde(rename = "postproc")]
    PostProcessing,
    Lcu,
    Grover,
    Hoyer,
    Qpe,
    Iqpe,
    HadamardOracle,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::PostProcessing,
        Method::Lcu,
        Method::Grover,
        Method::Hoyer,
        Method::Qpe,
        Method::Iqpe,
        Method::HadamardOracle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::PostProcessing => "postproc",
            Method::Lcu => "lcu",
            Method::Grover => "grover",
            Method::Hoyer => "hoyer",
            Method::Qpe => "qpe",
            Method::Iqpe => "iqpe",
            Method::HadamardOracle => "hadamard-oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s.trim())
            .ok_or_else(|| Error::domain(format!("unknown method '{s}'")))
    }
}

/// Which measurement record was kept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Accepted {
    /// Ancilla qubits read `bits` (bit `i` ↔ `qubits[i]`).
    AncillaPattern { qubits: Vec<usize>, bits: usize },
    /// `count` successive single-ancilla circuits all read 0.
    AllZeros { count: usize },
    /// No measurement: the state is rotated deterministically.
    Deterministic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Projected,
    /// The input already lay in the sector; nothing was done.
    Trivial,
    /// The procedure ran but does not land exactly in the sector (plain Grover).
    Partial,
}

/// One diagnostic value per step (Grover `p_n`, IQPE survival probability, ...).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceStep {
    pub step: usize,
    pub value: f64,
}

/// Any measurement outcome of an ancilla register.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub bits: usize,
    pub probability: f64,
    /// Sector the outcome certifies, when it certifies one.
    pub sector: Option<HalfInt>,
    pub state: Statevector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestorationResult {
    pub method: Method,
    pub status: Status,
    /// Normalized, ancillas removed.
    pub final_state: Statevector,
    /// Probability that the kept event occurs; 1 for deterministic methods.
    pub success_probability: f64,
    /// Weight of the target sector in `final_state`.
    pub final_good_weight: f64,
    pub accepted: Accepted,
    pub trace_label: &'static str,
    pub trace: Vec<TraceStep>,
    /// Every outcome of the final measurement, when there is one.
    pub branches: Vec<Branch>,
    /// Ancilla qubits the simulated circuit used.
    pub n_ancilla: usize,
    /// Gate counts of the simulated circuits, by gate name.
    pub gate_counts: BTreeMap<String, usize>,
}

fn merge_counts(into: &mut BTreeMap<String, usize>, circuit: &Circuit) {
    for (k, v) in circuit.gate_counts() {
        *into.entry(k).or_insert(0) += v;
    }
}

fn normalized_input(state: &Statevector) -> Result<Statevector> {
    if state.norm_sqr() == 0.0 {
        return Err(Error::domain("input state is the zero vector"));
    }
    Ok(state.clone().normalized())
}

/// Exact Hadamard test on `n` system qubits with the ancilla on qubit `n`.
/// `controlled` must act on `n + 1` qubits with every gate controlled by the
/// ancilla. Returns `P(0) − P(1)`, i.e. `Re⟨U⟩`, or `Im⟨U⟩` when `imaginary`.
pub fn hadamard_test(state: &Statevector, controlled: &Circuit, imaginary: bool) -> Result<f64> {
    let n = state.n_qubits();
    let mut c = Circuit::new(n + 1);
    c.add(GateName::H, &[], &[n])?;
    c.append(controlled)?;
    if imaginary {
        c.add(GateName::Phase, &[-FRAC_PI_2], &[n])?;
    }
    c.add(GateName::H, &[], &[n])?;
    let out = c.apply(state.with_ancillas(1)?)?;
    let branches = out.measure_qubits(&[n], MeasureMode::Branch, PostState::Discard)?;
    Ok(branches
        .iter()
        .map(|b| if b.observed_bits == 0 { b.probability } else { -b.probability })
        .sum())
}

/// `⟨U⟩` from a pair of Hadamard tests.
pub fn hadamard_test_expectation(state: &Statevector, controlled: &Circuit) -> Result<C64> {
    Ok(C64::new(hadamard_test(state, controlled, false)?, hadamard_test(state, controlled, true)?))
}

/// Appends `V = e^{iγ} ⊗_j PHASE(φ)` on `system` qubits, controlled by `controls`:
/// one CPHASE per system qubit and the global phase as a phase on the controls.
fn push_controlled_phase_ladder(
    c: &mut Circuit,
    system: usize,
    per_qubit: f64,
    global: f64,
    controls: &[Control],
) -> Result<()> {
    let (first, rest) = controls.split_first().ok_or_else(|| Error::domain("ladder needs a control"))?;
    for q in 0..system {
        c.push(Gate::cphase(per_qubit, *first, q)?.with_controls(rest))?;
    }
    if crate::math::cis(global) != ONE {
        // e^{iγ} on the control pattern: a diagonal phase on the control register.
        let dim = 1usize << controls.len();
        let pattern = controls.iter().enumerate().fold(0, |acc, (i, ctl)| acc | (ctl.on as usize) << i);
        let mut m = CMatrix::identity(dim, dim);
        m[(pattern, pattern)] = crate::math::cis(global);
        let qubits: Vec<usize> = controls.iter().map(|ctl| ctl.qubit).collect();
        c.push(Gate::mcu("GPHASE", m, &qubits, &[])?)?;
    }
    Ok(())
}

/// Real-weighted sum of Pauli strings, `Ô = Σ_k w_k Ŵ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableLcu {
    n_qubits: usize,
    terms: Vec<(f64, PauliString)>,
}

impl ObservableLcu {
    /// Simplifies `sum` and keeps it only if it is hermitian.
    pub fn from_pauli_sum(sum: &PauliSum) -> Result<Self> {
        let simple = sum.simplified(1e-14);
        let mut terms = Vec::with_capacity(simple.terms().len());
        for (c, p) in simple.terms() {
            if c.im.abs() > 1e-12 {
                return Err(Error::domain(format!("observable term {p} has complex weight {c}")));
            }
            terms.push((c.re, p.clone()));
        }
        Ok(ObservableLcu { n_qubits: sum.n_qubits(), terms })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn to_pauli_sum(&self) -> PauliSum {
        PauliSum::from_terms(self.n_qubits, self.terms.iter().map(|(w, p)| (C64::new(*w, 0.0), p.clone())).collect())
            .expect("sizes match")
    }
}

fn push_controlled_pauli(c: &mut Circuit, p: &PauliString, anc: usize) -> Result<()> {
    for (q, &letter) in p.factors().iter().enumerate() {
        let name = match letter {
            Pauli::I => continue,
            Pauli::X => GateName::X,
            Pauli::Y => GateName::Y,
            Pauli::Z => GateName::Z,
        };
        c.push(Gate::standard(name, &[], &[q])?.with_controls(&[Control::on(anc)]))?;
    }
    let quarters = p.phase_quarters();
    if quarters != 0 {
        c.add(GateName::Phase, &[FRAC_PI_2 * quarters as f64], &[anc])?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PostprocessedExpectation {
    pub value: f64,
    pub numerator: C64Serde,
    pub denominator: C64Serde,
    pub hadamard_tests: usize,
}

/// Complex number with stable JSON field names.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct C64Serde {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for C64Serde {
    fn from(z: C64) -> Self {
        C64Serde { re: z.re, im: z.im }
    }
}

fn check_commutes(observable: &ObservableLcu, proj: &LcuDecomposition) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let probe = Statevector::random(observable.n_qubits, &mut rng)?;
    let o = observable.to_pauli_sum();
    let op = o.apply(&proj.apply(&probe)?)?;
    let po = proj.apply(&o.apply(&probe)?)?;
    let gap = op.max_deviation(&po)?;
    if gap > 1e-8 {
        return Err(Error::domain(format!("observable does not commute with the projector (gap {gap:.3e})")));
    }
    Ok(())
}

/// `⟨Ô⟩_P = Σ_l β_l Σ_k w_k ⟨Ŵ_k V_l⟩ / Σ_l β_l ⟨V_l⟩`, each expectation
/// taken from simulated Hadamard tests.
pub fn expectation_postprocessed(
    state: &Statevector,
    observable: &ObservableLcu,
    proj: &LcuDecomposition,
) -> Result<PostprocessedExpectation> {
    let n = state.n_qubits();
    if observable.n_qubits != n || proj.n_qubits != n {
        return Err(Error::domain("observable, projector and state sizes differ"));
    }
    check_commutes(observable, proj)?;
    let psi = normalized_input(state)?;
    let anc = Control::on(n);
    let mut numerator = ZERO;
    let mut denominator = ZERO;
    let mut tests = 0;
    for t in &proj.terms {
        let mut v = Circuit::new(n + 1);
        push_controlled_phase_ladder(&mut v, n, t.qubit_phase, t.global_phase, &[anc])?;
        let ev = hadamard_test_expectation(&psi, &v)?;
        tests += 2;
        denominator += ev * t.beta;
        for (w, p) in &observable.terms {
            let mut wv = v.clone();
            push_controlled_pauli(&mut wv, p, n)?;
            numerator += hadamard_test_expectation(&psi, &wv)? * (t.beta * w);
            tests += 2;
        }
    }
    if denominator.norm() < 1e-12 {
        return Err(Error::empty(format!("projector expectation {:.3e}", denominator.norm())));
    }
    Ok(PostprocessedExpectation {
        value: (numerator / denominator).re,
        numerator: numerator.into(),
        denominator: denominator.into(),
        hadamard_tests: tests,
    })
}

/// `∫dφ e^{−iφm_α}⟨Ô e^{iφm̂}⟩ / ∫dφ e^{−iφm_α}⟨e^{iφm̂}⟩` on `n_angles`
/// equally spaced gauge angles.
pub fn expectation_generating_function(
    state: &Statevector,
    observable: &ObservableLcu,
    kind: SymmetryKind,
    target: HalfInt,
    n_angles: usize,
) -> Result<f64> {
    let n = state.n_qubits();
    let t = SectorTarget::new(kind, target, n)?;
    if !kind.is_diagonal() {
        return Err(Error::unsupported("generating function for total spin"));
    }
    if n_angles == 0 {
        return Err(Error::domain("need at least one gauge angle"));
    }
    let psi = normalized_input(state)?;
    let o = observable.to_pauli_sum();
    let mut numerator = ZERO;
    let mut denominator = ZERO;
    for k in 0..n_angles {
        let phi = 2.0 * PI * k as f64 / n_angles as f64;
        let mut rotated = psi.clone();
        rotated.apply_diagonal_in_place(&[], |b| crate::math::cis(phi * kind.integer_label(b) as f64));
        let weight = crate::math::cis(-phi * t.code as f64);
        denominator += weight * psi.inner(&rotated)?;
        numerator += weight * psi.inner(&o.apply(&rotated)?)?;
    }
    if denominator.norm() / n_angles as f64 <= 1e-12 {
        return Err(Error::empty("generating-function denominator vanishes"));
    }
    Ok((numerator / denominator).re)
}

/// Householder reflection taking `|0⟩` to `|γ⟩` (real `γ`, unit norm).
fn state_prep_reflection(gamma: &[f64]) -> CMatrix {
    let dim = gamma.len();
    let mut u: Vec<f64> = gamma.iter().map(|g| -g).collect();
    u[0] += 1.0;
    let norm_sqr: f64 = u.iter().map(|x| x * x).sum();
    if norm_sqr < 1e-30 {
        return CMatrix::identity(dim, dim);
    }
    CMatrix::from_fn(dim, dim, |r, c| {
        let delta = if r == c { 1.0 } else { 0.0 };
        C64::new(delta - 2.0 * u[r] * u[c] / norm_sqr, 0.0)
    })
}

/// Number of ancillas the LCU circuit uses for `terms` unitaries.
pub fn lcu_ancilla_count(terms: usize) -> usize {
    (bits_to_exceed(terms.saturating_sub(1) as u64) as usize).max(1)
}

/// Probabilistic application of `Σ_l β_l V_l`: prepare `Σ γ_l|l⟩` on the
/// ancillas, apply `V_l` controlled on pattern `l`, undo the preparation and
/// keep the all-zeros outcome.
pub fn lcu_project(state: &Statevector, lcu: &LcuDecomposition) -> Result<RestorationResult> {
    let n = state.n_qubits();
    if lcu.n_qubits != n {
        return Err(Error::domain("LCU and state sizes differ"));
    }
    if lcu.is_empty() {
        return Err(Error::domain("empty LCU"));
    }
    let psi = normalized_input(state)?;
    let n_anc = lcu_ancilla_count(lcu.len());
    let ancillas: Vec<usize> = (n..n + n_anc).collect();
    let mut gamma = lcu.gammas();
    gamma.resize(1 << n_anc, 0.0);
    let b = state_prep_reflection(&gamma);

    let mut c = Circuit::new(n + n_anc);
    c.push(Gate::mcu("B", b.clone(), &ancillas, &[])?)?;
    for (l, t) in lcu.terms.iter().enumerate() {
        let controls: Vec<Control> =
            ancillas.iter().enumerate().map(|(i, &q)| Control { qubit: q, on: l >> i & 1 == 1 }).collect();
        push_controlled_phase_ladder(&mut c, n, t.qubit_phase, t.global_phase, &controls)?;
    }
    c.push(Gate::mcu("B†", b.adjoint(), &ancillas, &[])?)?;
    let out = c.apply(psi.with_ancillas(n_anc)?)?;

    let target = SectorTarget::new(lcu.kind, lcu.target, n)?;
    let branches = out.measure_qubits(&ancillas, MeasureMode::Branch, PostState::Discard)?;
    let kept = branches
        .iter()
        .find(|b| b.observed_bits == 0)
        .ok_or_else(|| Error::empty("all-zeros ancilla outcome has zero probability"))?;
    let final_state = kept.post_state.clone();
    let mut gate_counts = BTreeMap::new();
    merge_counts(&mut gate_counts, &c);
    Ok(RestorationResult {
        method: Method::Lcu,
        status: Status::Projected,
        final_good_weight: sector_weight(&final_state, &target),
        success_probability: kept.probability,
        final_state,
        accepted: Accepted::AncillaPattern { qubits: ancillas, bits: 0 },
        trace_label: "",
        trace: vec![],
        branches: branches
            .into_iter()
            .map(|b| Branch { bits: b.observed_bits, probability: b.probability, sector: None, state: b.post_state })
            .collect(),
        n_ancilla: n_anc,
        gate_counts,
    })
}

fn sector_weight(state: &Statevector, target: &SectorTarget) -> f64 {
    let total = state.norm_sqr();
    state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(k, _)| target.contains(*k))
        .map(|(_, a)| a.norm_sqr())
        .sum::<f64>()
        / total
}

fn oracle_weight(state: &Statevector, oracle: &Oracle) -> Result<f64> {
    oracle.good_weight(state)
}

/// Hadamard test on the oracle: `½{|0⟩(I+U_f)|ψ⟩ + |1⟩(I−U_f)|ψ⟩}`. Outcome 1
/// leaves the good component, outcome 0 the bad one.
pub fn hadamard_oracle_project(state: &Statevector, oracle: &Oracle) -> Result<RestorationResult> {
    let n = state.n_qubits();
    if oracle.n_qubits() != n {
        return Err(Error::domain("oracle and state sizes differ"));
    }
    let psi = normalized_input(state)?;
    let mut ext = psi.with_ancillas(1)?;
    let h = Gate::standard(GateName::H, &[], &[n])?;
    let mut hc = Circuit::new(n + 1);
    hc.push(h)?;
    hc.apply_in_place(&mut ext)?;
    let mask = oracle.good_mask();
    let low = (1usize << n) - 1;
    ext.apply_diagonal_in_place(&[Control::on(n)], |k| if mask[k & low] { -ONE } else { ONE });
    hc.apply_in_place(&mut ext)?;
    let outcomes = ext.measure_qubits(&[n], MeasureMode::Branch, PostState::Discard)?;
    let good = outcomes
        .iter()
        .find(|o| o.observed_bits == 1)
        .ok_or_else(|| Error::empty("ancilla never reads 1: the state has no good component"))?;
    let mut gate_counts = BTreeMap::new();
    gate_counts.insert("H".to_string(), 2);
    gate_counts.insert("C-ORACLE".to_string(), 1);
    Ok(RestorationResult {
        method: Method::HadamardOracle,
        status: Status::Projected,
        final_good_weight: oracle_weight(&good.post_state, oracle)?,
        success_probability: good.probability,
        final_state: good.post_state.clone(),
        accepted: Accepted::AncillaPattern { qubits: vec![n], bits: 1 },
        trace_label: "",
        trace: vec![],
        branches: outcomes
            .iter()
            .map(|o| Branch { bits: o.observed_bits, probability: o.probability, sector: None, state: o.post_state.clone() })
            .collect(),
        n_ancilla: 1,
        gate_counts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroverMode {
    /// Exactly `n` Grover steps.
    FixedN(usize),
    /// The step count in the first period that maximizes `p_n`.
    AutoOptimal,
    /// Full steps then one generalized step landing exactly on the good state.
    Hoyer,
}

/// Refuses schedules longer than this many Grover steps.
pub const MAX_GROVER_STEPS: usize = 1_000_000;

struct GroverPlane {
    psi: Statevector,
    good: Statevector,
    bad: Statevector,
    sin_theta: f64,
    cos_theta: f64,
}

impl GroverPlane {
    fn new(psi: &Statevector, oracle: &Oracle) -> Result<Self> {
        let projected = oracle.project(psi)?;
        let sin_theta = projected.weight.sqrt();
        let good = projected.state.normalized();
        let bad = psi.linear_combination(ONE, &good, C64::new(-sin_theta, 0.0))?.normalized();
        Ok(GroverPlane { psi: psi.clone(), good, bad, sin_theta, cos_theta: (1.0 - projected.weight).max(0.0).sqrt() })
    }

    /// `R_Ψ(φ) = I + (e^{iφ} − 1)|Ψ⟩⟨Ψ|`; `φ = π` is `−(2|Ψ⟩⟨Ψ| − I)`.
    fn reflect(&self, v: &Statevector, phi: Option<f64>) -> Result<Statevector> {
        let overlap = self.psi.inner(v)?;
        match phi {
            None => self.psi.linear_combination(overlap * 2.0, v, -ONE),
            Some(phi) => v.linear_combination(ONE, &self.psi, (crate::math::cis(phi) - ONE) * overlap),
        }
    }

    /// `Ĝ = R_Ψ U_f` with `R_Ψ = 2|Ψ⟩⟨Ψ| − I`.
    fn step(&self, v: &Statevector, oracle: &Oracle) -> Result<Statevector> {
        self.reflect(&oracle.apply_uf(v)?, None)
    }

    /// Phases `(δ, φ)` with `R_Ψ(φ) U(δ) v` free of bad component.
    fn final_phases(&self, v: &Statevector) -> Result<(f64, f64)> {
        let a_g = self.good.inner(v)?;
        let a_b = self.bad.inner(v)?;
        let (s, c) = (self.sin_theta, self.cos_theta);
        let x = |delta: f64| -a_b / (c * (s * crate::math::cis(delta) * a_g + c * a_b));
        let f = |delta: f64| (ONE + x(delta)).norm_sqr() - 1.0;
        let (mut lo, mut hi) = (0.0f64, PI);
        let (f_lo, f_hi) = (f(lo), f(hi));
        if !(f_lo <= 0.0 && (f_hi >= 0.0 || f_hi.is_nan())) {
            return Err(Error::domain(format!("no generalized step brackets the target (f(0)={f_lo:.3e}, f(π)={f_hi:.3e})")));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fm = f(mid);
            if fm.is_nan() || fm > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo < 1e-16 {
                break;
            }
        }
        let delta = 0.5 * (lo + hi);
        let phi = (ONE + x(delta)).arg();
        Ok((delta, phi))
    }
}

/// Amplitude amplification towards the oracle's good subspace. The trace
/// holds `p_n = ‖P Ĝⁿ ψ‖²` for every step taken.
pub fn grover_project(state: &Statevector, oracle: &Oracle, mode: GroverMode) -> Result<RestorationResult> {
    let n = state.n_qubits();
    if oracle.n_qubits() != n {
        return Err(Error::domain("oracle and state sizes differ"));
    }
    let psi = normalized_input(state)?;
    let p_g = oracle.good_weight(&psi)?;
    let method = if mode == GroverMode::Hoyer { Method::Hoyer } else { Method::Grover };
    if p_g <= NULL_PROBABILITY {
        return Err(Error::empty("amplitude amplification needs a nonzero good component"));
    }
    let result = |status, v: Statevector, trace: Vec<TraceStep>, calls: usize, generalized: usize| -> Result<RestorationResult> {
        let mut gate_counts = BTreeMap::new();
        gate_counts.insert("ORACLE".to_string(), calls);
        gate_counts.insert("REFLECTION".to_string(), calls);
        if generalized > 0 {
            gate_counts.insert("GENERALIZED-ORACLE".to_string(), generalized);
            gate_counts.insert("GENERALIZED-REFLECTION".to_string(), generalized);
        }
        let v = v.normalized();
        Ok(RestorationResult {
            method,
            status,
            final_good_weight: oracle.good_weight(&v)?,
            success_probability: 1.0,
            final_state: v,
            accepted: Accepted::Deterministic,
            trace_label: "p_n",
            trace,
            branches: vec![],
            n_ancilla: 0,
            gate_counts,
        })
    };
    if 1.0 - p_g <= 1e-15 {
        return result(Status::Trivial, psi, vec![TraceStep { step: 0, value: p_g }], 0, 0);
    }
    let plane = GroverPlane::new(&psi, oracle)?;
    let theta = plane.sin_theta.asin();
    let run = |steps: usize| -> Result<(Statevector, Vec<TraceStep>)> {
        let mut v = psi.clone();
        let mut trace = vec![TraceStep { step: 0, value: p_g }];
        for step in 1..=steps {
            v = plane.step(&v, oracle)?;
            trace.push(TraceStep { step, value: oracle.good_weight(&v)? });
        }
        Ok((v, trace))
    };
    let bounded = |steps: f64| -> Result<usize> {
        if !(steps <= MAX_GROVER_STEPS as f64) {
            return Err(Error::Resource(format!("{steps} Grover steps exceed {MAX_GROVER_STEPS}")));
        }
        Ok(steps as usize)
    };
    match mode {
        GroverMode::FixedN(steps) => {
            bounded(steps as f64)?;
            let (v, trace) = run(steps)?;
            result(Status::Partial, v, trace, steps, 0)
        }
        GroverMode::AutoOptimal => {
            let period = bounded(ceil_tol(PI / (2.0 * theta)))?;
            let (_, trace) = run(period)?;
            let best = trace
                .iter()
                .fold(trace[0], |best, t| if t.value > best.value + 1e-15 { *t } else { best });
            let (v, trace) = run(best.step)?;
            result(Status::Partial, v, trace, best.step, 0)
        }
        GroverMode::Hoyer => {
            let w = FRAC_PI_2 - theta;
            let ratio = w / (2.0 * theta);
            let full = bounded(floor_tol(ratio))?;
            let (mut v, mut trace) = run(full)?;
            let mut generalized = 0;
            if ratio - full as f64 > 1e-9 {
                let (delta, phi) = plane.final_phases(&v)?;
                v = plane.reflect(&oracle.apply_generalized(&v, delta)?, Some(phi))?;
                trace.push(TraceStep { step: full + 1, value: oracle.good_weight(&v)? });
                generalized = 1;
            }
            result(Status::Projected, v, trace, full, generalized)
        }
    }
}

/// `n₀ = ⌊log₂(m_M − m₀)⌋ + 1`, the smallest register with `log₂(m_k − m₀) < n₀`.
pub fn qpe_register_size(kind: SymmetryKind, n: usize) -> Result<usize> {
    let (lo, hi) = kind.integer_range(n)?;
    Ok((bits_to_exceed((hi - lo) as u64) as usize).max(1))
}

/// `QFT†` on `k` qubits, index bit `i` ↔ register qubit `i`.
pub fn inverse_qft_matrix(k: usize) -> CMatrix {
    let dim = 1usize << k;
    let scale = 1.0 / (dim as f64).sqrt();
    CMatrix::from_fn(dim, dim, |x, y| crate::math::cis(-2.0 * PI * ((x * y) % dim) as f64 / dim as f64) * scale)
}

/// Phase estimation of `V = exp{2πi(m̂ − m₀)/2^{n₀}}`: ancilla `j` controls
/// `V^{2^j}`, then `QFT†` reads `m − m₀` on the ancilla register. Every
/// outcome is reported as a branch; the result keeps the `target` branch.
pub fn qpe_project(state: &Statevector, kind: SymmetryKind, target: HalfInt) -> Result<RestorationResult> {
    let n = state.n_qubits();
    let t = SectorTarget::new(kind, target, n)?;
    let psi = normalized_input(state)?;
    let n0 = qpe_register_size(kind, n)?;
    let ancillas: Vec<usize> = (n..n + n0).collect();
    let (m0, _) = t.range;
    let mut c = Circuit::new(n + n0);
    for &a in &ancillas {
        c.add(GateName::H, &[], &[a])?;
    }
    for (j, &a) in ancillas.iter().enumerate() {
        let angle = 2.0 * PI * (1u64 << j) as f64 / (1u64 << n0) as f64;
        if kind == SymmetryKind::Parity && j > 0 {
            return Err(Error::unsupported("parity phases are per-qubit only for one ancilla"));
        }
        push_controlled_phase_ladder(&mut c, n, angle, -angle * m0 as f64, &[Control::on(a)])?;
    }
    c.push(Gate::mcu("QFT†", inverse_qft_matrix(n0), &ancillas, &[])?)?;
    let out = c.apply(psi.with_ancillas(n0)?)?;
    let outcomes = out.measure_qubits(&ancillas, MeasureMode::Branch, PostState::Discard)?;
    let branches: Vec<Branch> = outcomes
        .into_iter()
        .map(|o| {
            let sector = kind.eigenvalue_of(o.observed_bits as i64 + m0, n).ok();
            Branch { bits: o.observed_bits, probability: o.probability, sector, state: o.post_state }
        })
        .collect();
    let wanted = (t.code - m0) as usize;
    let kept = branches
        .iter()
        .find(|b| b.bits == wanted)
        .ok_or_else(|| Error::empty(format!("no weight on the {kind}={target} outcome")))?
        .clone();
    let mut gate_counts = BTreeMap::new();
    merge_counts(&mut gate_counts, &c);
    Ok(RestorationResult {
        method: Method::Qpe,
        status: Status::Projected,
        final_good_weight: sector_weight(&kept.state, &t),
        success_probability: kept.probability,
        final_state: kept.state,
        accepted: Accepted::AncillaPattern { qubits: ancillas, bits: wanted },
        trace_label: "",
        trace: vec![],
        branches,
        n_ancilla: n0,
        gate_counts,
    })
}

/// Default IQPE depth: `⌊log₂ max(m_α − m₀, m_M − m_α)⌋ + 1`.
pub fn iqpe_default_depth(kind: SymmetryKind, n: usize, target: HalfInt) -> Result<usize> {
    Ok(SectorTarget::new(kind, target, n)?.default_factor_count())
}

/// State after one IQPE-like circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct IqpeStep {
    pub l: usize,
    /// Probability that this circuit's ancilla reads 0, given all earlier ones did.
    pub survival: f64,
    /// Product of survivals up to and including this step.
    pub cumulative: f64,
    pub state: Statevector,
    pub circuit: Circuit,
}

/// Runs circuits `l = 0..depth`: H, `e^{iπm̂/2^l}` controlled by the ancilla,
/// `PHASE(−π m_α/2^l)` on the ancilla, H; each keeps ancilla outcome 0.
pub fn iqpe_ladder(state: &Statevector, kind: SymmetryKind, target: HalfInt, depth: usize) -> Result<Vec<IqpeStep>> {
    let n = state.n_qubits();
    let t = SectorTarget::new(kind, target, n)?;
    if !kind.is_diagonal() {
        return Err(Error::unsupported("IQPE ladder for total spin"));
    }
    if kind == SymmetryKind::Parity && depth > 1 {
        return Err(Error::unsupported("parity phases are per-qubit only for l = 0"));
    }
    let mut psi = normalized_input(state)?;
    let mut cumulative = 1.0;
    let mut steps = Vec::with_capacity(depth);
    for l in 0..depth {
        let angle = PI / (1u64 << l.min(62)) as f64;
        let mut c = Circuit::new(n + 1);
        c.add(GateName::H, &[], &[n])?;
        for q in 0..n {
            c.push(Gate::cphase(angle, Control::on(n), q)?)?;
        }
        c.add(GateName::Phase, &[-angle * t.code as f64], &[n])?;
        c.add(GateName::H, &[], &[n])?;
        let out = c.apply(psi.with_ancillas(1)?)?;
        let kept = out
            .postselect(&[n], 0, PostState::Discard)?
            .ok_or_else(|| Error::empty(format!("IQPE circuit {l} never reads 0")))?;
        cumulative *= kept.probability;
        psi = kept.post_state;
        steps.push(IqpeStep { l, survival: kept.probability, cumulative, state: psi.clone(), circuit: c });
    }
    Ok(steps)
}

/// IQPE-like projection with `depth` circuits (default [`iqpe_default_depth`]).
pub fn iqpe_project(
    state: &Statevector,
    kind: SymmetryKind,
    target: HalfInt,
    depth: Option<usize>,
) -> Result<RestorationResult> {
    let n = state.n_qubits();
    let t = SectorTarget::new(kind, target, n)?;
    let depth = match depth {
        Some(d) => d,
        None => iqpe_default_depth(kind, n, target)?,
    };
    let steps = iqpe_ladder(state, kind, target, depth)?;
    let mut gate_counts = BTreeMap::new();
    for s in &steps {
        merge_counts(&mut gate_counts, &s.circuit);
    }
    let final_state = steps.last().map(|s| s.state.clone()).unwrap_or(normalized_input(state)?);
    let success = steps.last().map_or(1.0, |s| s.cumulative);
    Ok(RestorationResult {
        method: Method::Iqpe,
        status: Status::Projected,
        final_good_weight: sector_weight(&final_state, &t),
        success_probability: success,
        final_state,
        accepted: Accepted::AllZeros { count: depth },
        trace_label: "survival",
        trace: steps.iter().map(|s| TraceStep { step: s.l, value: s.survival }).collect(),
        branches: vec![],
        n_ancilla: 1,
        gate_counts,
    })
}

/// Seeded shot counts for an event kept with probability `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShotStatistics {
    pub shots: u64,
    pub kept: u64,
    pub wasted: u64,
    pub estimated_probability: f64,
}

impl ShotStatistics {
    pub fn sample(p: f64, shots: u64, seed: u64) -> Result<Self> {
        let dist = Binomial::new(shots, p.clamp(0.0, 1.0)).map_err(|e| Error::domain(e.to_string()))?;
        let kept = dist.sample(&mut ChaCha8Rng::seed_from_u64(seed));
        Ok(ShotStatistics {
            shots,
            kept,
            wasted: shots - kept,
            estimated_probability: if shots == 0 { 0.0 } else { kept as f64 / shots as f64 },
        })
    }
}

/// Runs `method` with its default settings and the exact sector projector.
pub fn restore(state: &Statevector, method: Method, kind: SymmetryKind, target: HalfInt) -> Result<RestorationResult> {
    use crate::projector::{lcu_decomposition, ProjectorSpec};
    let n = state.n_qubits();
    match method {
        Method::PostProcessing => Err(Error::unsupported("post-processing yields expectation values, not a state")),
        Method::Lcu => {
            let m = match kind {
                SymmetryKind::Parity => 1,
                _ => kind.integer_range(n)?.1 as usize,
            };
            lcu_project(state, &lcu_decomposition(kind, n, target, m)?)
        }
        Method::HadamardOracle => hadamard_oracle_project(state, &Oracle::from_spec(&ProjectorSpec::filter(kind, target), n)?),
        Method::Grover => grover_project(state, &Oracle::from_spec(&ProjectorSpec::filter(kind, target), n)?, GroverMode::AutoOptimal),
        Method::Hoyer => grover_project(state, &Oracle::from_spec(&ProjectorSpec::filter(kind, target), n)?, GroverMode::Hoyer),
        Method::Qpe => qpe_project(state, kind, target),
        Method::Iqpe => iqpe_project(state, kind, target, None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::popcount;
    use crate::pauli::number_operator_sum;
    use crate::projector::{classical_filter, lcu_decomposition, ProjectorSpec};

    fn h(s: &str) -> HalfInt {
        s.parse().unwrap()
    }

    fn random(n: usize, seed: u64) -> Statevector {
        Statevector::random(n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    fn number_oracle(n: usize, target: &str) -> Oracle {
        Oracle::from_spec(&ProjectorSpec::filter(SymmetryKind::ParticleNumber, h(target)), n).unwrap()
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.as_str()));
        }
    }

    #[test]
    fn hadamard_test_reads_expectations() {
        let psi = random(2, 1);
        let mut c = Circuit::new(3);
        push_controlled_pauli(&mut c, &"XY".parse().unwrap(), 2).unwrap();
        let ev = hadamard_test_expectation(&psi, &c).unwrap();
        let direct = psi.inner(&"XY".parse::<PauliString>().unwrap().apply(&psi).unwrap()).unwrap();
        assert!((ev - direct).norm() < 1e-14);
    }

    #[test]
    fn lcu_uniform_three_qubits() {
        let psi = Statevector::uniform(3).unwrap();
        let lcu = lcu_decomposition(SymmetryKind::ParticleNumber, 3, h("2"), 3).unwrap();
        let r = lcu_project(&psi, &lcu).unwrap();
        assert_eq!(r.n_ancilla, 2);
        assert!((r.success_probability - 3.0 / 8.0).abs() < 1e-12);
        let expect = classical_filter(&psi, SymmetryKind::ParticleNumber, h("2")).unwrap().normalize().unwrap();
        assert!(r.final_state.fidelity(&expect).unwrap() > 1.0 - 1e-12);
        assert_eq!(r.gate_counts["CPHASE"], 3 * 4);
        assert_eq!(r.gate_counts["B"], 1);
    }

    #[test]
    fn lcu_eigenstate_input() {
        let psi = Statevector::new_basis_state(4, 0b0110).unwrap();
        let lcu = lcu_decomposition(SymmetryKind::ParticleNumber, 4, h("2"), 4).unwrap();
        let r = lcu_project(&psi, &lcu).unwrap();
        assert!((r.success_probability - 1.0).abs() < 1e-12);
        assert!(r.final_state.fidelity(&psi).unwrap() > 1.0 - 1e-12);
        let lcu = lcu_decomposition(SymmetryKind::ParticleNumber, 4, h("1"), 4).unwrap();
        assert!(matches!(lcu_project(&psi, &lcu), Err(Error::EmptySector(_))));
    }

    #[test]
    fn hadamard_oracle_cases() {
        let psi = Statevector::uniform(3).unwrap();
        let r = hadamard_oracle_project(&psi, &number_oracle(3, "2")).unwrap();
        assert!((r.success_probability - 3.0 / 8.0).abs() < 1e-14);
        assert_eq!(r.branches.len(), 2);
        let good = Statevector::new_basis_state(3, 0b011).unwrap();
        let r = hadamard_oracle_project(&good, &number_oracle(3, "2")).unwrap();
        assert!((r.success_probability - 1.0).abs() < 1e-14);
        let bad = Statevector::new_basis_state(3, 0b001).unwrap();
        assert!(matches!(hadamard_oracle_project(&bad, &number_oracle(3, "2")), Err(Error::EmptySector(_))));
    }

    #[test]
    fn grover_closed_form_and_hoyer() {
        let psi = random(5, 3);
        let oracle = number_oracle(5, "2");
        let p_g = oracle.good_weight(&psi).unwrap();
        let theta = p_g.sqrt().asin();
        let r = grover_project(&psi, &oracle, GroverMode::FixedN(12)).unwrap();
        for t in &r.trace {
            let expect = ((2 * t.step + 1) as f64 * theta).sin().powi(2);
            assert!((t.value - expect).abs() < 1e-10);
        }
        let hoyer = grover_project(&psi, &oracle, GroverMode::Hoyer).unwrap();
        assert!((hoyer.final_good_weight - 1.0).abs() < 1e-10);
        let n_g = ceil_tol((FRAC_PI_2 - theta) / (2.0 * theta)) as usize;
        assert_eq!(hoyer.trace.len() - 1, n_g);
        let expect = classical_filter(&psi, SymmetryKind::ParticleNumber, h("2")).unwrap().normalize().unwrap();
        assert!(hoyer.final_state.fidelity(&expect).unwrap() > 1.0 - 1e-10);

        let auto = grover_project(&psi, &oracle, GroverMode::AutoOptimal).unwrap();
        let best = r.trace.iter().take(auto.trace.len() + 1).map(|t| t.value).fold(0.0, f64::max);
        assert!(auto.final_good_weight >= best - 1e-12 || auto.final_good_weight > 0.9);
    }

    #[test]
    fn grover_degenerate_inputs() {
        let oracle = number_oracle(3, "2");
        let good = Statevector::new_basis_state(3, 0b101).unwrap();
        let r = grover_project(&good, &oracle, GroverMode::Hoyer).unwrap();
        assert_eq!(r.status, Status::Trivial);
        let bad = Statevector::new_basis_state(3, 0).unwrap();
        assert!(matches!(grover_project(&bad, &oracle, GroverMode::Hoyer), Err(Error::EmptySector(_))));
    }

    #[test]
    fn qpe_uniform_four_qubits() {
        let psi = Statevector::uniform(4).unwrap();
        let r = qpe_project(&psi, SymmetryKind::ParticleNumber, h("2")).unwrap();
        assert_eq!(r.n_ancilla, 3);
        assert_eq!(r.branches.len(), 5);
        for b in &r.branches {
            let k = b.bits as u64;
            let expect = crate::math::binomial(4, k) as f64 / 16.0;
            assert!((b.probability - expect).abs() < 1e-12);
            let filt = classical_filter(&psi, SymmetryKind::ParticleNumber, b.sector.unwrap()).unwrap().normalize().unwrap();
            assert!(b.state.fidelity(&filt).unwrap() > 1.0 - 1e-10);
        }
        assert_eq!(r.gate_counts["CPHASE"], 4 * 3);
        assert_eq!(r.gate_counts["QFT†"], 1);
    }

    #[test]
    fn iqpe_ladder_peels_sectors() {
        let psi = Statevector::uniform(16).unwrap();
        let steps = iqpe_ladder(&psi, SymmetryKind::ParticleNumber, h("8"), 4).unwrap();
        let p1 = steps[0].state.sector_probabilities(popcount);
        for (sector, p) in &p1 {
            if sector % 2 == 1 {
                assert_eq!(*p, 0.0);
            }
        }
        let p3 = steps[2].state.sector_probabilities(popcount);
        for (sector, p) in &p3 {
            if ![0, 8, 16].contains(sector) {
                assert!(*p < 1e-24, "sector {sector}: {p}");
            }
        }
        assert!((p3[&0] - 1.0 / 12872.0).abs() < 1e-12);
        let p4 = steps[3].state.sector_probabilities(popcount);
        assert!((p4[&8] - 1.0).abs() < 1e-12);
        let exact = crate::math::binomial(16, 8) as f64 / 65536.0;
        assert!((steps[3].cumulative - exact).abs() < 1e-12);
    }

    #[test]
    fn postprocessing_number_operator() {
        let psi = random(3, 9);
        let obs = ObservableLcu::from_pauli_sum(&number_operator_sum(3)).unwrap();
        let lcu = lcu_decomposition(SymmetryKind::ParticleNumber, 3, h("2"), 3).unwrap();
        let e = expectation_postprocessed(&psi, &obs, &lcu).unwrap();
        assert!((e.value - 2.0).abs() < 1e-10);
        let id = ObservableLcu::from_pauli_sum(&PauliSum::identity(3)).unwrap();
        assert!((expectation_postprocessed(&psi, &id, &lcu).unwrap().value - 1.0).abs() < 1e-10);
        let gf = expectation_generating_function(&psi, &obs, SymmetryKind::ParticleNumber, h("2"), 4).unwrap();
        assert!((gf - 2.0).abs() < 1e-10);
        let x0 = ObservableLcu::from_pauli_sum(&PauliSum::from_terms(3, vec![(ONE, "IIX".parse().unwrap())]).unwrap()).unwrap();
        assert!(matches!(expectation_postprocessed(&psi, &x0, &lcu), Err(Error::Domain(_))));
    }

    #[test]
    fn shot_statistics_are_seeded() {
        let a = ShotStatistics::sample(0.3, 10_000, 4).unwrap();
        let b = ShotStatistics::sample(0.3, 10_000, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.kept + a.wasted, 10_000);
        assert!((a.estimated_probability - 0.3).abs() < 5.0 * (0.3f64 * 0.7 / 10_000.0).sqrt());
    }
}
