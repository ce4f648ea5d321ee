//! Gates, circuits and ansatz builders.
//!
//! Rotations follow `R_O(α) = e^{−iαO/2}`. A gate's matrix acts on its
//! targets with matrix index bit `i` ↔ `targets[i]`; controls only gate it.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::dmatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{cis, unitarity_defect, CMatrix, C64, I, ONE, ZERO};
use crate::statevec::{extract_bits, Control, Statevector, UNITARY_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GateName {
    X,
    Y,
    Z,
    H,
    RX,
    RY,
    RZ,
    Phase,
    Cnot,
    CPhase,
    /// Arbitrary unitary on its targets, optionally multi-controlled.
    Mcu,
}

impl GateName {
    pub fn as_str(self) -> &'static str {
        match self {
            GateName::X => "X",
            GateName::Y => "Y",
            GateName::Z => "Z",
            GateName::H => "H",
            GateName::RX => "RX",
            GateName::RY => "RY",
            GateName::RZ => "RZ",
            GateName::Phase => "PHASE",
            GateName::Cnot => "CNOT",
            GateName::CPhase => "CPHASE",
            GateName::Mcu => "MCU",
        }
    }

    fn arity(self) -> (usize, usize) {
        match self {
            GateName::X | GateName::Y | GateName::Z | GateName::H => (0, 1),
            GateName::RX | GateName::RY | GateName::RZ | GateName::Phase => (1, 1),
            GateName::Cnot => (0, 2),
            GateName::CPhase => (1, 2),
            GateName::Mcu => (0, 0),
        }
    }
}

impl fmt::Display for GateName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GateName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "X" => GateName::X,
            "Y" => GateName::Y,
            "Z" => GateName::Z,
            "H" => GateName::H,
            "RX" => GateName::RX,
            "RY" => GateName::RY,
            "RZ" => GateName::RZ,
            "PHASE" => GateName::Phase,
            "CNOT" => GateName::Cnot,
            "CPHASE" => GateName::CPhase,
            "MCU" => GateName::Mcu,
            other => return Err(Error::domain(format!("unknown gate '{other}'"))),
        })
    }
}

pub fn rx(theta: f64) -> CMatrix {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    dmatrix![C64::new(c, 0.0), C64::new(0.0, -s); C64::new(0.0, -s), C64::new(c, 0.0)]
}

pub fn ry(theta: f64) -> CMatrix {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    dmatrix![C64::new(c, 0.0), C64::new(-s, 0.0); C64::new(s, 0.0), C64::new(c, 0.0)]
}

pub fn rz(theta: f64) -> CMatrix {
    dmatrix![cis(-theta / 2.0), ZERO; ZERO, cis(theta / 2.0)]
}

pub fn phase(phi: f64) -> CMatrix {
    dmatrix![ONE, ZERO; ZERO, cis(phi)]
}

pub fn pauli_x() -> CMatrix {
    dmatrix![ZERO, ONE; ONE, ZERO]
}

fn base_matrix(name: GateName, params: &[f64]) -> CMatrix {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    match name {
        GateName::X | GateName::Cnot => pauli_x(),
        GateName::Y => dmatrix![ZERO, -I; I, ZERO],
        GateName::Z => dmatrix![ONE, ZERO; ZERO, -ONE],
        GateName::H => dmatrix![h, h; h, -h],
        GateName::RX => rx(params[0]),
        GateName::RY => ry(params[0]),
        GateName::RZ => rz(params[0]),
        GateName::Phase | GateName::CPhase => phase(params[0]),
        GateName::Mcu => unreachable!("MCU carries its own matrix"),
    }
}

fn is_diagonal(m: &CMatrix) -> bool {
    m.iter().enumerate().all(|(idx, z)| {
        let (r, c) = (idx % m.nrows(), idx / m.nrows());
        r == c || *z == ZERO
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    name: GateName,
    label: Option<String>,
    params: Vec<f64>,
    targets: Vec<usize>,
    controls: Vec<Control>,
    matrix: CMatrix,
    diagonal: bool,
}

impl Gate {
    /// A textbook gate. `wires` is `[target]` for one-qubit gates and
    /// `[control, target]` for CNOT and CPHASE.
    pub fn standard(name: GateName, params: &[f64], wires: &[usize]) -> Result<Gate> {
        if name == GateName::Mcu {
            return Err(Error::domain("MCU needs an explicit matrix; use Gate::mcu"));
        }
        let (n_params, n_wires) = name.arity();
        if params.len() != n_params {
            return Err(Error::domain(format!(
                "{name} takes {n_params} parameter(s), got {}",
                params.len()
            )));
        }
        if wires.len() != n_wires {
            return Err(Error::domain(format!("{name} takes {n_wires} wire(s), got {}", wires.len())));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::domain(format!("{name} parameter is not finite")));
        }
        let (targets, controls) = if n_wires == 2 {
            if wires[0] == wires[1] {
                return Err(Error::domain(format!("{name} control and target coincide")));
            }
            (vec![wires[1]], vec![Control::on(wires[0])])
        } else {
            (vec![wires[0]], vec![])
        };
        let matrix = base_matrix(name, params);
        let diagonal = is_diagonal(&matrix);
        Ok(Gate { name, label: None, params: params.to_vec(), targets, controls, matrix, diagonal })
    }

    pub fn cnot(control: Control, target: usize) -> Result<Gate> {
        let mut g = Gate::standard(GateName::Cnot, &[], &[control.qubit, target])?;
        g.controls[0] = control;
        Ok(g)
    }

    pub fn cphase(phi: f64, control: Control, target: usize) -> Result<Gate> {
        let mut g = Gate::standard(GateName::CPhase, &[phi], &[control.qubit, target])?;
        g.controls[0] = control;
        Ok(g)
    }

    /// Arbitrary unitary `matrix` on `targets`, conditioned on `controls`.
    pub fn mcu(label: impl Into<String>, matrix: CMatrix, targets: &[usize], controls: &[Control]) -> Result<Gate> {
        let label = label.into();
        if label.is_empty() || label.chars().any(|c| c.is_whitespace() || "[]@|~".contains(c)) {
            return Err(Error::domain(format!("invalid gate label '{label}'")));
        }
        if targets.is_empty() {
            return Err(Error::domain("MCU needs at least one target"));
        }
        let dim = 1usize << targets.len();
        if matrix.shape() != (dim, dim) {
            return Err(Error::domain(format!(
                "MCU matrix is {}x{} but {} target(s) need {dim}x{dim}",
                matrix.nrows(),
                matrix.ncols(),
                targets.len()
            )));
        }
        let defect = unitarity_defect(&matrix);
        if defect > UNITARY_TOL {
            return Err(Error::domain(format!("MCU matrix is not unitary (defect {defect:.3e})")));
        }
        let diagonal = is_diagonal(&matrix);
        Ok(Gate {
            name: GateName::Mcu,
            label: Some(label),
            params: vec![],
            targets: targets.to_vec(),
            controls: controls.to_vec(),
            matrix,
            diagonal,
        })
    }

    /// Adds further controls.
    pub fn with_controls(mut self, controls: &[Control]) -> Gate {
        self.controls.extend_from_slice(controls);
        self
    }

    pub fn name(&self) -> GateName {
        self.name
    }

    /// Name used for counting: the label for MCU gates, the gate name otherwise.
    pub fn display_name(&self) -> &str {
        self.label.as_deref().unwrap_or(self.name.as_str())
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn controls(&self) -> &[Control] {
        &self.controls
    }

    /// Matrix on the targets alone.
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Matrix on all wires, index bit `i` ↔ `targets ++ controls` entry `i`.
    pub fn full_matrix(&self) -> CMatrix {
        let nt = self.targets.len();
        let dim = 1usize << (nt + self.controls.len());
        let mut m = CMatrix::identity(dim, dim);
        let ctrl_value = self
            .controls
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, c)| acc | (c.on as usize) << i);
        let sub = 1usize << nt;
        for high in 0..dim >> nt {
            if high != ctrl_value {
                continue;
            }
            let base = high << nt;
            for r in 0..sub {
                for c in 0..sub {
                    m[(base + r, base + c)] = self.matrix[(r, c)];
                }
            }
        }
        m
    }

    pub fn adjoint(&self) -> Gate {
        let mut g = self.clone();
        match self.name {
            GateName::RX | GateName::RY | GateName::RZ | GateName::Phase | GateName::CPhase => {
                g.params = vec![-self.params[0]];
                g.matrix = base_matrix(self.name, &g.params);
            }
            GateName::Mcu => {
                g.matrix = self.matrix.adjoint();
                let label = self.label.as_deref().unwrap_or("U");
                g.label = Some(match label.strip_suffix('†') {
                    Some(base) => base.to_string(),
                    None => format!("{label}†"),
                });
            }
            _ => {}
        }
        g
    }

    fn wires(&self) -> impl Iterator<Item = usize> + '_ {
        self.targets.iter().copied().chain(self.controls.iter().map(|c| c.qubit))
    }

    pub(crate) fn apply_in_place(&self, state: &mut Statevector) {
        if self.diagonal {
            let diag: Vec<C64> = (0..self.matrix.nrows()).map(|s| self.matrix[(s, s)]).collect();
            let targets = &self.targets;
            state.apply_diagonal_in_place(&self.controls, |k| diag[extract_bits(k, targets)]);
        } else {
            state.apply_matrix_unchecked(&self.matrix, &self.targets, &self.controls);
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.label {
            Some(label) => write!(f, "MCU[{label}]")?,
            None => f.write_str(self.name.as_str())?,
        }
        for p in &self.params {
            write!(f, " {p:?}")?;
        }
        f.write_str(" @")?;
        for t in &self.targets {
            write!(f, " {t}")?;
        }
        if !self.controls.is_empty() {
            f.write_str(" |")?;
            for c in &self.controls {
                let mark = if c.on { "" } else { "~" };
                write!(f, " {mark}{}", c.qubit)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit { n_qubits, gates: Vec::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        let mut seen = 0u128;
        for q in gate.wires() {
            if q >= self.n_qubits {
                return Err(Error::domain(format!(
                    "{} touches qubit {q} outside a {}-qubit circuit",
                    gate.display_name(),
                    self.n_qubits
                )));
            }
            if seen >> q & 1 == 1 {
                return Err(Error::domain(format!("{} uses qubit {q} twice", gate.display_name())));
            }
            seen |= 1 << q;
        }
        self.gates.push(gate);
        Ok(self)
    }

    /// Shorthand for `push(Gate::standard(..))`.
    pub fn add(&mut self, name: GateName, params: &[f64], wires: &[usize]) -> Result<&mut Self> {
        self.push(Gate::standard(name, params, wires)?)
    }

    /// Appends every gate of `other`.
    pub fn append(&mut self, other: &Circuit) -> Result<&mut Self> {
        for g in &other.gates {
            self.push(g.clone())?;
        }
        Ok(self)
    }

    pub fn inverse(&self) -> Circuit {
        Circuit { n_qubits: self.n_qubits, gates: self.gates.iter().rev().map(Gate::adjoint).collect() }
    }

    pub fn apply(&self, mut state: Statevector) -> Result<Statevector> {
        self.apply_in_place(&mut state)?;
        Ok(state)
    }

    pub fn apply_in_place(&self, state: &mut Statevector) -> Result<()> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::domain(format!(
                "circuit has {} qubits but the state has {}",
                self.n_qubits,
                state.n_qubits()
            )));
        }
        for g in &self.gates {
            g.apply_in_place(state);
        }
        Ok(())
    }

    /// Dense matrix of the whole circuit, built column by column.
    pub fn unitary(&self) -> Result<CMatrix> {
        if self.n_qubits > 12 {
            return Err(Error::Resource(format!("dense unitary of {} qubits", self.n_qubits)));
        }
        let dim = 1usize << self.n_qubits;
        let mut m = CMatrix::zeros(dim, dim);
        for col in 0..dim {
            let out = self.apply(Statevector::new_basis_state(self.n_qubits, col)?)?;
            for (row, a) in out.amplitudes().iter().enumerate() {
                m[(row, col)] = *a;
            }
        }
        Ok(m)
    }

    pub fn gate_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for g in &self.gates {
            *counts.entry(g.display_name().to_string()).or_insert(0) += 1;
        }
        counts
    }

    pub fn count(&self, name: &str) -> usize {
        self.gates.iter().filter(|g| g.display_name() == name).count()
    }

    /// Total number of real gate parameters.
    pub fn n_parameters(&self) -> usize {
        self.gates.iter().map(|g| g.params.len()).sum()
    }

    /// One gate per line: `NAME params @ targets | controls`, open controls
    /// prefixed with `~`. The first line is `qubits <n>`.
    pub fn to_text(&self) -> String {
        let mut out = format!("qubits {}\n", self.n_qubits);
        for g in &self.gates {
            out.push_str(&g.to_string());
            out.push('\n');
        }
        out
    }

    /// Parses [`Circuit::to_text`] output. MCU lines cannot be parsed back
    /// because their matrices are not serialized.
    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::domain("empty circuit text"))?;
        let n_qubits = header
            .strip_prefix("qubits")
            .and_then(|n| n.trim().parse().ok())
            .ok_or_else(|| Error::domain(format!("bad circuit header '{header}'")))?;
        let mut circuit = Circuit::new(n_qubits);
        for line in lines {
            circuit.push(parse_gate_line(line)?)?;
        }
        Ok(circuit)
    }
}

fn parse_gate_line(line: &str) -> Result<Gate> {
    let bad = |what: &str| Error::domain(format!("{what} in gate line '{line}'"));
    let (head, wires) = line.split_once('@').ok_or_else(|| bad("missing '@'"))?;
    let mut head = head.split_whitespace();
    let name: GateName = head.next().ok_or_else(|| bad("missing gate name"))?.parse()?;
    if name == GateName::Mcu || line.starts_with("MCU[") {
        return Err(Error::unsupported("MCU matrices are not serialized"));
    }
    let params = head
        .map(|p| p.parse::<f64>().map_err(|_| bad("bad parameter")))
        .collect::<Result<Vec<_>>>()?;
    let (targets, controls) = wires.split_once('|').unwrap_or((wires, ""));
    let targets = targets
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| bad("bad target")))
        .collect::<Result<Vec<_>>>()?;
    let controls = controls
        .split_whitespace()
        .map(|c| match c.strip_prefix('~') {
            Some(q) => q.parse().map(Control::off).map_err(|_| bad("bad control")),
            None => c.parse().map(Control::on).map_err(|_| bad("bad control")),
        })
        .collect::<Result<Vec<_>>>()?;
    let (_, n_wires) = name.arity();
    if n_wires == 2 {
        if targets.len() != 1 || controls.is_empty() {
            return Err(bad("two-qubit gate needs one target and a control"));
        }
        let mut g = Gate::standard(name, &params, &[controls[0].qubit, targets[0]])?;
        g.controls = controls;
        Ok(g)
    } else {
        if targets.len() != 1 {
            return Err(bad("one-qubit gate needs exactly one target"));
        }
        Ok(Gate::standard(name, &params, &targets)?.with_controls(&controls))
    }
}

/// `A(α, γ, δ) = R_Z(α) R_Y(γ) R_Z(δ)` on `qubit`, appended in time order.
pub fn push_zyz(circuit: &mut Circuit, qubit: usize, alpha: f64, gamma: f64, delta: f64) -> Result<()> {
    circuit.add(GateName::RZ, &[delta], &[qubit])?;
    circuit.add(GateName::RY, &[gamma], &[qubit])?;
    circuit.add(GateName::RZ, &[alpha], &[qubit])?;
    Ok(())
}

/// Three-CNOT template for an arbitrary two-qubit unitary, 15 parameters:
/// `A₁ ⊗ A₂`, CNOT(1→0), `R_Z(θ₁)` on 0 and `R_Z(θ₂)` on 1, CNOT(0→1),
/// `R_Z(θ₃)` on 1, CNOT(1→0), `A₃ ⊗ A₄`. Each `A` takes `(α, γ, δ)`.
pub fn general_two_qubit_template(params: &[f64]) -> Result<Circuit> {
    if params.len() != 15 {
        return Err(Error::domain(format!("the template takes 15 parameters, got {}", params.len())));
    }
    let p = params;
    let mut c = Circuit::new(2);
    push_zyz(&mut c, 0, p[0], p[1], p[2])?;
    push_zyz(&mut c, 1, p[3], p[4], p[5])?;
    c.add(GateName::Cnot, &[], &[1, 0])?;
    c.add(GateName::RZ, &[p[6]], &[0])?;
    c.add(GateName::RZ, &[p[7]], &[1])?;
    c.add(GateName::Cnot, &[], &[0, 1])?;
    c.add(GateName::RZ, &[p[8]], &[1])?;
    c.add(GateName::Cnot, &[], &[1, 0])?;
    push_zyz(&mut c, 0, p[9], p[10], p[11])?;
    push_zyz(&mut c, 1, p[12], p[13], p[14])?;
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockVariant {
    /// Mixes `|01⟩` and `|10⟩`; conserves `S_z` and particle number.
    SzPreserving,
    /// Mixes `|00⟩` and `|11⟩`; conserves parity.
    ParityBlock,
    /// The 2×2 block alone on one qubit.
    Reduced,
}

/// `R(θ₁, θ₂) = R_Z(θ₂ + π) R_Y(θ₁ + π/2)` on `qubit`.
fn push_r(c: &mut Circuit, qubit: usize, t1: f64, t2: f64) -> Result<()> {
    c.add(GateName::RY, &[t1 + FRAC_PI_2], &[qubit])?;
    c.add(GateName::RZ, &[t2 + PI], &[qubit])?;
    Ok(())
}

fn push_r_dagger(c: &mut Circuit, qubit: usize, t1: f64, t2: f64) -> Result<()> {
    c.add(GateName::RZ, &[-(t2 + PI)], &[qubit])?;
    c.add(GateName::RY, &[-(t1 + FRAC_PI_2)], &[qubit])?;
    Ok(())
}

/// Two-parameter symmetry-restricted block. On its two-state subspace it
/// realizes `[[cos θ₁, e^{iθ₂} sin θ₁], [e^{−iθ₂} sin θ₁, −cos θ₁]]` and acts
/// as the identity elsewhere.
pub fn symmetry_block_unitary(variant: BlockVariant, theta1: f64, theta2: f64) -> Result<Circuit> {
    let (t1, t2) = (theta1, theta2);
    match variant {
        BlockVariant::SzPreserving => {
            let mut c = Circuit::new(2);
            c.add(GateName::Cnot, &[], &[0, 1])?;
            push_r_dagger(&mut c, 0, t1, t2)?;
            c.add(GateName::Cnot, &[], &[1, 0])?;
            push_r(&mut c, 0, t1, t2)?;
            c.add(GateName::Cnot, &[], &[0, 1])?;
            Ok(c)
        }
        BlockVariant::ParityBlock => {
            let mut c = Circuit::new(2);
            c.add(GateName::Cnot, &[], &[0, 1])?;
            c.add(GateName::X, &[], &[0])?;
            push_r_dagger(&mut c, 0, t1, t2)?;
            c.push(Gate::cnot(Control::off(1), 0)?)?;
            push_r(&mut c, 0, t1, t2)?;
            c.add(GateName::X, &[], &[0])?;
            c.add(GateName::Cnot, &[], &[0, 1])?;
            Ok(c)
        }
        BlockVariant::Reduced => {
            let mut c = Circuit::new(1);
            c.add(GateName::X, &[], &[0])?;
            push_r_dagger(&mut c, 0, t1, t2)?;
            c.add(GateName::X, &[], &[0])?;
            push_r(&mut c, 0, t1, t2)?;
            c.add(GateName::X, &[], &[0])?;
            Ok(c)
        }
    }
}

/// The matrix [`symmetry_block_unitary`] is meant to realize, written out directly.
pub fn symmetry_block_matrix(variant: BlockVariant, theta1: f64, theta2: f64) -> CMatrix {
    let (c, s) = (C64::new(theta1.cos(), 0.0), theta1.sin());
    let up = cis(theta2) * s;
    let down = cis(-theta2) * s;
    let (dim, lo, hi) = match variant {
        BlockVariant::SzPreserving => (4, 1, 2),
        BlockVariant::ParityBlock => (4, 0, 3),
        BlockVariant::Reduced => (2, 0, 1),
    };
    let mut m = CMatrix::identity(dim, dim);
    m[(lo, lo)] = c;
    m[(lo, hi)] = up;
    m[(hi, lo)] = down;
    m[(hi, hi)] = -c;
    m
}

/// Particle-number-conserving layered ansatz.
///
/// X gates load `seed_occupations`, then `S_z`-preserving blocks are laid on
/// adjacent pairs in a brick pattern: pairs `(0,1), (2,3), …`, then
/// `(1,2), (3,4), …`, repeating until `layer_params` is used up. Block `i`
/// takes `layer_params[i] = (θ, φ)`.
pub fn pn_ansatz_layered(
    n_qubits: usize,
    n_particles: usize,
    layer_params: &[(f64, f64)],
    seed_occupations: usize,
) -> Result<Circuit> {
    if n_qubits == 0 || n_qubits >= usize::BITS as usize || seed_occupations >> n_qubits != 0 {
        return Err(Error::domain(format!(
            "seed pattern {seed_occupations:#b} does not fit {n_qubits} qubits"
        )));
    }
    if seed_occupations.count_ones() as usize != n_particles {
        return Err(Error::domain(format!(
            "seed pattern {seed_occupations:#b} holds {} particles, expected {n_particles}",
            seed_occupations.count_ones()
        )));
    }
    if n_qubits < 2 && !layer_params.is_empty() {
        return Err(Error::domain("blocks need at least two qubits"));
    }
    let mut c = Circuit::new(n_qubits);
    for q in (0..n_qubits).filter(|q| seed_occupations >> q & 1 == 1) {
        c.add(GateName::X, &[], &[q])?;
    }
    let mut params = layer_params.iter();
    let mut offset = 0;
    'layers: while params.len() > 0 {
        for low in (offset..n_qubits - 1).step_by(2) {
            let Some(&(theta, phi)) = params.next() else { break 'layers };
            let block = symmetry_block_unitary(BlockVariant::SzPreserving, theta, phi)?;
            for g in block.gates() {
                c.push(remap(g, &[low, low + 1]))?;
            }
        }
        offset = 1 - offset;
        if n_qubits == 2 {
            offset = 0;
        }
    }
    Ok(c)
}

/// `gate` with qubit `q` renamed to `wires[q]`.
pub fn remap(gate: &Gate, wires: &[usize]) -> Gate {
    let mut g = gate.clone();
    g.targets = gate.targets.iter().map(|&t| wires[t]).collect();
    g.controls = gate.controls.iter().map(|c| Control { qubit: wires[c.qubit], on: c.on }).collect();
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairEncoding {
    /// Pair `n` lives on qubits `2n` (up) and `2n+1` (down).
    TwoQubitsPerPair,
    /// Pair `n` is a single qubit `n`.
    OneQubitPerPair,
}

impl PairEncoding {
    pub fn qubits_per_pair(self) -> usize {
        match self {
            PairEncoding::TwoQubitsPerPair => 2,
            PairEncoding::OneQubitPerPair => 1,
        }
    }
}

/// Product-of-pairs state `Π_n (cos(θ_n/2) + sin(θ_n/2) a†_{n↑} a†_{n↓}) |0⟩`.
/// In the two-qubit encoding each pair is `R_Y(θ_n)` followed by a CNOT onto
/// its partner qubit; in the one-qubit encoding it is `R_Y(θ_n)` alone.
pub fn bcs_prepare(thetas: &[f64], encoding: PairEncoding, n_qubits: usize) -> Result<Circuit> {
    let expected = thetas.len() * encoding.qubits_per_pair();
    if thetas.is_empty() || n_qubits != expected {
        return Err(Error::domain(format!(
            "{} pair angle(s) need {expected} qubits, register has {n_qubits}",
            thetas.len()
        )));
    }
    let mut c = Circuit::new(n_qubits);
    for (n, &theta) in thetas.iter().enumerate() {
        match encoding {
            PairEncoding::TwoQubitsPerPair => {
                c.add(GateName::RY, &[theta], &[2 * n])?;
                c.add(GateName::Cnot, &[], &[2 * n, 2 * n + 1])?;
            }
            PairEncoding::OneQubitPerPair => {
                c.add(GateName::RY, &[theta], &[n])?;
            }
        }
    }
    Ok(c)
}
