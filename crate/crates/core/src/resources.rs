//! Ancilla counts, gate inventories and retained-event probabilities for each
//! restoration method.
//!
//! [`resource_report`] gives the textbook cost of a method as a function of the
//! register size, the LCU term count `Λ` and the good-component weight `p_G`.
//! [`simulated_gate_counts`] predicts the gate counts of the circuits that
//! [`crate::restore`] actually simulates; the two differ where the simulator
//! needs more than the textbook count (see `n_ancilla_simulated`).

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::math::{bits_to_exceed, ceil_tol, cis, ONE};
use crate::projector::{lcu_decomposition, SectorTarget};
use crate::restore::{lcu_ancilla_count, qpe_register_size, Method};
use crate::symmetry::{HalfInt, SymmetryKind};

/// Probability of keeping a run, or no postselection at all.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RetainedProbability {
    Numeric(f64),
    Deterministic,
}

impl Serialize for RetainedProbability {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RetainedProbability::Numeric(p) => s.serialize_f64(*p),
            RetainedProbability::Deterministic => s.serialize_str("deterministic"),
        }
    }
}

/// Gate count that is a bound rather than something the simulator executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Estimate {
    pub count: u64,
    pub label: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResourceReport {
    pub method: Method,
    pub n_qubits: usize,
    pub lcu_terms: usize,
    /// Ancilla count from the closed-form cost table.
    pub n_ancilla: usize,
    /// Ancillas the simulated circuit uses; differs from `n_ancilla` for QPE.
    pub n_ancilla_simulated: usize,
    pub n_measurement_rounds: usize,
    pub gate_inventory: BTreeMap<String, u64>,
    /// State-preparation parameter counts, never synthesized.
    pub estimates: BTreeMap<String, Estimate>,
    pub retained_probability: RetainedProbability,
    pub gives_projected_state: bool,
    /// `n_G = ⌈w/2θ⌉` for Grover/Hoyer.
    pub grover_steps: Option<usize>,
}

/// `⌊log₂ n_q⌋`.
pub fn n_qpe(n_q: usize) -> usize {
    bits_to_exceed(n_q as u64) as usize - 1
}

/// `⌈log₂(Λ + 1)⌉`.
pub fn n_lcu(lambda: usize) -> usize {
    bits_to_exceed(lambda as u64) as usize
}

/// `⌊log₂ n_q⌋ + 1`.
pub fn n_iqpe(n_q: usize) -> usize {
    n_qpe(n_q) + 1
}

/// `n_G = ⌈w/2θ⌉` with `w = π/2 − θ`, `sin²θ = p_G`.
pub fn grover_steps(p_g: f64) -> Result<usize> {
    if !(p_g > 0.0 && p_g <= 1.0) {
        return Err(Error::domain(format!("n_G is undefined for p_G = {p_g}")));
    }
    let theta = p_g.sqrt().asin();
    Ok(ceil_tol((FRAC_PI_2 - theta) / (2.0 * theta)).max(0.0) as usize)
}

fn inventory(entries: &[(&str, u64)]) -> BTreeMap<String, u64> {
    entries.iter().filter(|(_, c)| *c > 0).map(|(k, c)| (k.to_string(), *c)).collect()
}

/// Cost of `method` on `n_q` system qubits. Controlled evolutions are counted
/// both as such and as `n_q` controlled-phase gates each.
pub fn resource_report(method: Method, n_q: usize, lambda: usize, p_g: f64) -> Result<ResourceReport> {
    if n_q == 0 {
        return Err(Error::domain("need at least one system qubit"));
    }
    if lambda == 0 {
        return Err(Error::domain("need at least one LCU term"));
    }
    if !(0.0..=1.0).contains(&p_g) {
        return Err(Error::domain(format!("p_G = {p_g} outside [0, 1]")));
    }
    let nq = n_q as u64;
    let lam = lambda as u64;
    let mut estimates = BTreeMap::new();
    let mut steps = None;
    let numeric = RetainedProbability::Numeric(p_g);
    let (n_ancilla, n_sim, rounds, gates, retained, projected) = match method {
        Method::PostProcessing => (
            1,
            1,
            lambda,
            inventory(&[
                ("HADAMARD_TEST", lam),
                ("H", 2 * lam),
                ("CONTROLLED_OPERATOR", lam),
                ("CONTROLLED_EVOLUTION", lam),
                ("CPHASE", lam * nq),
            ]),
            RetainedProbability::Deterministic,
            false,
        ),
        Method::Qpe => {
            let a = n_qpe(n_q);
            (
                a,
                qpe_register_size(SymmetryKind::ParticleNumber, n_q)?,
                1,
                inventory(&[
                    ("CONTROLLED_EVOLUTION", lam),
                    ("CPHASE", lam * nq),
                    ("H", a as u64),
                    ("INVERSE_QFT", 1),
                    ("INVERSE_QFT_QUBITS", a as u64),
                ]),
                numeric,
                true,
            )
        }
        Method::Lcu => {
            let a = n_lcu(lambda);
            estimates.insert("QSP_PARAMETERS".to_string(), Estimate { count: 2 * (1u64 << a.min(62)), label: "estimate" });
            (
                a,
                lcu_ancilla_count(lambda),
                1,
                inventory(&[("CONTROLLED_EVOLUTION", lam), ("CPHASE", lam * nq), ("QSP", 2)]),
                numeric,
                true,
            )
        }
        Method::Grover | Method::Hoyer => {
            let n_g = grover_steps(p_g)? as u64;
            steps = Some(n_g as usize);
            estimates.insert(
                "QSP_PARAMETERS".to_string(),
                Estimate { count: 2 * n_g * (1u64 << n_q.min(62)), label: "estimate" },
            );
            (
                0,
                0,
                0,
                inventory(&[
                    ("GENERALIZED_ORACLE", 2),
                    ("GROVER_OPERATOR", n_g),
                    ("ORACLE", n_g),
                    ("QSP", 2 * n_g),
                    ("MULTI_CONTROLLED_PHASE", n_g),
                ]),
                RetainedProbability::Deterministic,
                true,
            )
        }
        Method::Iqpe => {
            let circuits = n_iqpe(n_q) as u64;
            (
                1,
                1,
                circuits as usize,
                inventory(&[
                    ("IQPE_CIRCUIT", circuits),
                    ("H", 2 * circuits),
                    ("CONTROLLED_EVOLUTION", circuits),
                    ("CPHASE", circuits * nq),
                    ("PHASE", circuits),
                ]),
                numeric,
                true,
            )
        }
        Method::HadamardOracle => {
            (1, 1, 1, inventory(&[("CONTROLLED_ORACLE", 1), ("H", 2)]), numeric, true)
        }
    };
    Ok(ResourceReport {
        method,
        n_qubits: n_q,
        lcu_terms: lambda,
        n_ancilla,
        n_ancilla_simulated: n_sim,
        n_measurement_rounds: rounds,
        gate_inventory: gates,
        estimates,
        retained_probability: retained,
        gives_projected_state: projected,
        grover_steps: steps,
    })
}

/// Gate counts, keyed like [`crate::circuit::Circuit::gate_counts`], of the
/// circuits [`crate::restore`] builds for `method` with default settings.
pub fn simulated_gate_counts(
    method: Method,
    kind: SymmetryKind,
    n: usize,
    target: HalfInt,
) -> Result<BTreeMap<String, usize>> {
    let t = SectorTarget::new(kind, target, n)?;
    let mut out = BTreeMap::new();
    let mut add = |k: &str, c: usize| {
        if c > 0 {
            *out.entry(k.to_string()).or_insert(0) += c;
        }
    };
    match method {
        Method::Lcu => {
            let m = match kind {
                SymmetryKind::Parity => 1,
                _ => kind.integer_range(n)?.1 as usize,
            };
            let lcu = lcu_decomposition(kind, n, target, m)?;
            add("B", 1);
            add("B†", 1);
            add("CPHASE", lcu.len() * n);
            add("GPHASE", lcu.terms.iter().filter(|term| cis(term.global_phase) != ONE).count());
        }
        Method::Qpe => {
            let n0 = qpe_register_size(kind, n)?;
            let m0 = t.range.0 as f64;
            add("H", n0);
            add("CPHASE", n0 * n);
            add("QFT†", 1);
            let nontrivial = (0..n0)
                .filter(|j| cis(-2.0 * std::f64::consts::PI * (1u64 << j) as f64 / (1u64 << n0) as f64 * m0) != ONE)
                .count();
            add("GPHASE", nontrivial);
        }
        Method::Iqpe => {
            let depth = t.default_factor_count();
            add("H", 2 * depth);
            add("CPHASE", depth * n);
            add("PHASE", depth);
        }
        other => return Err(Error::unsupported(format!("no simulated circuit inventory for {other}"))),
    }
    Ok(out)
}
