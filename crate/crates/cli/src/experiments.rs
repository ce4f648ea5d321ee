use std::f64::consts::PI;

use log::{debug, info};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use symrestore::circuit::{bcs_prepare, PairEncoding};
use symrestore::math::{popcount, C64};
use symrestore::pauli::number_operator_sum;
use symrestore::projector::{
    apply_projector, classical_filter, lcu_decomposition, Oracle, ProjectorForm, ProjectorSpec,
};
use symrestore::resources::{resource_report, ResourceReport};
use symrestore::restore::{
    expectation_postprocessed, grover_project, iqpe_ladder, restore, GroverMode, Method, ObservableLcu,
};
use symrestore::symmetry::sector_dimension;
use symrestore::{Error, HalfInt, Statevector, SymmetryKind};

use crate::config::{parse_mode, ConfigError, ExperimentConfig, GroverSchedule, Quantity};

/// One output row: `(step, sector, value)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub step: usize,
    pub sector: String,
    pub value: f64,
}

impl Record {
    fn new(step: usize, sector: impl ToString, value: f64) -> Self {
        Record { step, sector: sector.to_string(), value }
    }
}

pub enum Output {
    Records(Vec<Record>),
    Reports(Vec<ResourceReport>),
}

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Library(Error),
    Io(String),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Library(e)
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e.0)
    }
}

fn kind_of(cfg: &ExperimentConfig) -> Result<SymmetryKind, RunError> {
    let kind = cfg.kind.unwrap_or(SymmetryKind::ParticleNumber);
    if !kind.is_diagonal() {
        return Err(RunError::Config(format!("experiments need a diagonal symmetry, got {kind}")));
    }
    Ok(kind)
}

fn positive(name: &str, v: usize) -> Result<usize, RunError> {
    if v == 0 {
        return Err(RunError::Config(format!("{name} must be positive")));
    }
    Ok(v)
}

/// Random normalized state supported only where `keep` holds.
fn random_supported(n: usize, keep: impl Fn(usize) -> bool, rng: &mut ChaCha8Rng) -> Result<Statevector, Error> {
    let full = Statevector::random(n, rng)?;
    let amps = full
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(k, a)| if keep(k) { *a } else { C64::new(0.0, 0.0) })
        .collect();
    Ok(Statevector::from_amplitudes(amps)?.normalized())
}

/// Grover oscillation for `sin θ|G⟩ + cos θ|B⟩`, `θ = π/26`, with `|G⟩`
/// random inside the target particle-number sector and `|B⟩` random outside.
pub fn fig5(cfg: &ExperimentConfig) -> Result<Output, RunError> {
    let n = positive("qubits", cfg.n_qubits.unwrap_or(8))?;
    let target = cfg.target.unwrap_or(HalfInt::from_int(4));
    let steps = cfg.steps.unwrap_or(30);
    let a = SymmetryKind::ParticleNumber.integer_of(target, n)?;
    let theta = PI / 26.0;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(7));
    let good = random_supported(n, |k| popcount(k) as i64 == a, &mut rng)?;
    let bad = random_supported(n, |k| popcount(k) as i64 != a, &mut rng)?;
    let psi = good.linear_combination(C64::new(theta.sin(), 0.0), &bad, C64::new(theta.cos(), 0.0))?;
    let oracle = Oracle::from_spec(&ProjectorSpec::filter(SymmetryKind::ParticleNumber, target), n)?;
    let r = grover_project(&psi, &oracle, GroverMode::FixedN(steps))?;
    info!("fig5: {n} qubits, sector {target}, {steps} Grover steps");
    Ok(Output::Records(r.trace.iter().map(|t| Record::new(t.step, target, t.value)).collect()))
}

/// Sector weights of the uniform state after 0, 1, ... IQPE-like circuits.
pub fn fig6(cfg: &ExperimentConfig) -> Result<Output, RunError> {
    let n = positive("qubits", cfg.n_qubits.unwrap_or(16))?;
    let kind = kind_of(cfg)?;
    let target = cfg.target.unwrap_or(HalfInt::from_int(n as i64 / 2));
    let circuits = cfg.steps.unwrap_or(4);
    let quantity = cfg.quantity.unwrap_or(Quantity::Probability);
    let psi = Statevector::uniform(n)?;
    let mut states = vec![psi.clone()];
    states.extend(iqpe_ladder(&psi, kind, target, circuits)?.into_iter().map(|s| s.state));
    let mut records = Vec::new();
    for (step, state) in states.iter().enumerate() {
        let probs = state.sector_probabilities(|k| kind.integer_label(k));
        for value in kind.spectrum(n)? {
            let p = probs.get(&kind.integer_of(value, n)?).copied().unwrap_or(0.0);
            let v = match quantity {
                Quantity::Probability => p,
                Quantity::Amplitude => p.sqrt(),
            };
            records.push(Record::new(step, value, v));
        }
    }
    records.sort_by(|a, b| a.step.cmp(&b.step).then(sector_order(&a.sector, &b.sector)));
    Ok(Output::Records(records))
}

fn sector_order(a: &str, b: &str) -> std::cmp::Ordering {
    match (a.parse::<HalfInt>(), b.parse::<HalfInt>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        _ => a.cmp(b),
    }
}

/// Exact projector forms of `kind`, checked against the amplitude filter.
fn exact_forms(kind: SymmetryKind) -> Vec<ProjectorForm> {
    let mut forms = vec![ProjectorForm::Lowdin, ProjectorForm::Oracle];
    if kind == SymmetryKind::Parity {
        forms.extend([
            ProjectorForm::ParityClosed,
            ProjectorForm::DiscreteSum { m: Some(1) },
            ProjectorForm::Product { n_factors: Some(1) },
            ProjectorForm::GaugeIntegral { n_points: Some(2) },
        ]);
    } else {
        forms.extend([
            ProjectorForm::DiscreteSum { m: None },
            ProjectorForm::Product { n_factors: None },
            ProjectorForm::GaugeIntegral { n_points: None },
        ]);
    }
    forms
}

/// Per trial and form: max amplitude deviation from the exact filter.
pub fn equivalence(cfg: &ExperimentConfig) -> Result<Output, RunError> {
    let n = positive("qubits", cfg.n_qubits.unwrap_or(5))?;
    let kind = kind_of(cfg)?;
    let trials = cfg.trials.unwrap_or(20);
    let mut master = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0));
    let seeds: Vec<u64> = (0..trials).map(|_| master.random()).collect();
    let spectrum = kind.spectrum(n)?;
    let mut records = Vec::new();
    let mut worst = 0.0f64;
    for (trial, seed) in seeds.into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = Statevector::random(n, &mut rng)?;
        let target = match cfg.target {
            Some(t) => t,
            None => spectrum[rng.random_range(0..spectrum.len())],
        };
        let exact = classical_filter(&psi, kind, target)?.state;
        for form in exact_forms(kind) {
            let got = apply_projector(&psi, &ProjectorSpec::new(kind, target, form))?.state;
            let d = got.max_deviation(&exact)?;
            worst = worst.max(d);
            debug!("trial {trial} target {target} {}: {d:.3e}", form.name());
            records.push(Record::new(trial, form.name(), d));
        }
    }
    info!("equivalence: {trials} trials on {n} qubits, worst deviation {worst:.3e}");
    Ok(Output::Records(records))
}

/// Resource reports for every method, with `p_G` the target-sector weight of
/// the uniform state.
pub fn compare(cfg: &ExperimentConfig) -> Result<Output, RunError> {
    let n = positive("qubits", cfg.n_qubits.unwrap_or(16))?;
    let kind = kind_of(cfg)?;
    let target = cfg.target.unwrap_or_else(|| kind.spectrum(n).map(|s| s[s.len() / 2]).unwrap_or(HalfInt::ZERO));
    let p_g = sector_dimension(n, kind, target)? as f64 / (1u64 << n) as f64;
    let m = if kind == SymmetryKind::Parity { 1 } else { kind.integer_range(n)?.1 as usize };
    let lambda = lcu_decomposition(kind, n, target, m)?.len();
    let reports = Method::ALL
        .into_iter()
        .map(|method| resource_report(method, n, lambda, p_g))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Output::Reports(reports))
}

/// Flattens reports into `(method index, field, value)` rows.
pub fn report_records(reports: &[ResourceReport]) -> Vec<Record> {
    let mut out = Vec::new();
    for (i, r) in reports.iter().enumerate() {
        let m = r.method;
        out.push(Record::new(i, format!("{m}.n_ancilla"), r.n_ancilla as f64));
        out.push(Record::new(i, format!("{m}.n_ancilla_simulated"), r.n_ancilla_simulated as f64));
        out.push(Record::new(i, format!("{m}.n_measurement_rounds"), r.n_measurement_rounds as f64));
        if let symrestore::resources::RetainedProbability::Numeric(p) = r.retained_probability {
            out.push(Record::new(i, format!("{m}.retained_probability"), p));
        }
        out.push(Record::new(i, format!("{m}.gives_projected_state"), r.gives_projected_state as u8 as f64));
        if let Some(s) = r.grover_steps {
            out.push(Record::new(i, format!("{m}.grover_steps"), s as f64));
        }
        for (g, c) in &r.gate_inventory {
            out.push(Record::new(i, format!("{m}.gate.{g}"), *c as f64));
        }
        for (g, e) in &r.estimates {
            out.push(Record::new(i, format!("{m}.{}.{g}", e.label), e.count as f64));
        }
    }
    out
}

/// Seeded BCS state on pairs of qubits, restored to a particle number.
/// Step 0 rows are the input sector weights, step 1 rows the output ones.
pub fn bcs(cfg: &ExperimentConfig) -> Result<Output, RunError> {
    let n = positive("qubits", cfg.n_qubits.unwrap_or(8))?;
    if n % 2 != 0 {
        return Err(RunError::Config(format!("BCS pairs need an even qubit count, got {n}")));
    }
    let target = cfg.target.unwrap_or(HalfInt::from_int(n as i64 / 2));
    let method = cfg.method.unwrap_or(Method::Iqpe);
    let kind = SymmetryKind::ParticleNumber;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0));
    let thetas: Vec<f64> = (0..n / 2).map(|_| rng.random_range(0.3..PI - 0.3)).collect();
    let psi = bcs_prepare(&thetas, PairEncoding::TwoQubitsPerPair, n)?.apply(Statevector::new_basis_state(n, 0)?)?;
    let mut records = Vec::new();
    let push_dist = |records: &mut Vec<Record>, step: usize, state: &Statevector| {
        let probs = state.sector_probabilities(popcount);
        for k in 0..=n as u32 {
            records.push(Record::new(step, k, probs.get(&k).copied().unwrap_or(0.0)));
        }
    };
    push_dist(&mut records, 0, &psi);
    match method {
        Method::PostProcessing => {
            let lcu = lcu_decomposition(kind, n, target, n)?;
            let obs = ObservableLcu::from_pauli_sum(&number_operator_sum(n))?;
            let e = expectation_postprocessed(&psi, &obs, &lcu)?;
            records.push(Record::new(1, "expectation_n", e.value));
            records.push(Record::new(1, "hadamard_tests", e.hadamard_tests as f64));
        }
        Method::Grover => {
            let mode = match parse_mode(cfg.mode.as_deref())? {
                GroverSchedule::Auto => GroverMode::AutoOptimal,
                GroverSchedule::Fixed(s) => GroverMode::FixedN(s),
            };
            let oracle = Oracle::from_spec(&ProjectorSpec::filter(kind, target), n)?;
            let r = grover_project(&psi, &oracle, mode)?;
            push_dist(&mut records, 1, &r.final_state);
            records.push(Record::new(1, "steps", (r.trace.len() - 1) as f64));
        }
        _ => {
            let r = restore(&psi, method, kind, target)?;
            push_dist(&mut records, 1, &r.final_state);
            records.push(Record::new(1, "success_probability", r.success_probability));
        }
    }
    info!("bcs: {n} qubits, method {method}, target {target}");
    Ok(Output::Records(records))
}
