//! Symmetry sectors of the natural basis and total-spin bookkeeping.
//!
//! The three basis-diagonal symmetries are all functions of `n₁(k)`, the
//! popcount of the basis index. Internally every one of them is encoded as an
//! integer `m(k)` with the physical eigenvalue `λ = a·m + b`:
//!
//! | kind            | `m(k)`        | `λ`              |
//! |-----------------|---------------|------------------|
//! | particle number | `n₁`          | `m`              |
//! | `S_z`           | `n₁`          | `n/2 − m`        |
//! | parity          | `n₁ mod 2`    | `1 − 2m`         |
//!
//! Projectors, LCU ladders and phase-estimation circuits only ever see `m`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{binomial, popcount, C64};
use crate::statevec::Statevector;

/// Largest register for [`spin_eigenbasis_bruteforce`].
pub const MAX_BRUTEFORCE_SPIN_QUBITS: usize = 8;

/// Eigenvalues closer than this are treated as one degenerate `S(S+1)` level.
pub const EIGEN_CLUSTER_TOL: f64 = 1e-8;

/// Exact half-integer, stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "f64", try_from = "f64")]
pub struct HalfInt(i64);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);

    pub const fn from_twice(twice: i64) -> Self {
        HalfInt(twice)
    }

    pub const fn from_int(v: i64) -> Self {
        HalfInt(2 * v)
    }

    pub const fn twice(self) -> i64 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// The integer value, if there is one.
    pub fn as_int(self) -> Option<i64> {
        self.is_integer().then_some(self.0 / 2)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// Nearest half-integer to `x`, if `x` is one within `1e-9`.
    pub fn try_from_f64(x: f64) -> Option<Self> {
        let twice = (2.0 * x).round();
        ((2.0 * x - twice).abs() <= 1e-9 && twice.abs() < 1e15).then_some(HalfInt(twice as i64))
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_int() {
            Some(v) => write!(f, "{v}"),
            None => write!(f, "{}/2", self.0),
        }
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::domain(format!("'{s}' is not an integer or half-integer"));
        if let Some(num) = s.strip_suffix("/2") {
            let twice: i64 = num.trim().parse().map_err(|_| bad())?;
            return Ok(HalfInt(twice));
        }
        if let Ok(v) = s.parse::<i64>() {
            return Ok(HalfInt::from_int(v));
        }
        s.parse::<f64>().ok().and_then(HalfInt::try_from_f64).ok_or_else(bad)
    }
}

impl From<HalfInt> for f64 {
    fn from(h: HalfInt) -> f64 {
        h.to_f64()
    }
}

impl TryFrom<f64> for HalfInt {
    type Error = String;

    fn try_from(x: f64) -> std::result::Result<Self, String> {
        HalfInt::try_from_f64(x).ok_or_else(|| format!("{x} is not a half-integer"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryKind {
    ParticleNumber,
    Sz,
    Parity,
    TotalSpin,
}

impl SymmetryKind {
    pub const DIAGONAL: [SymmetryKind; 3] = [SymmetryKind::ParticleNumber, SymmetryKind::Sz, SymmetryKind::Parity];

    pub fn is_diagonal(self) -> bool {
        self != SymmetryKind::TotalSpin
    }

    pub fn name(self) -> &'static str {
        match self {
            SymmetryKind::ParticleNumber => "particle_number",
            SymmetryKind::Sz => "sz",
            SymmetryKind::Parity => "parity",
            SymmetryKind::TotalSpin => "total_spin",
        }
    }

    fn require_diagonal(self) -> Result<()> {
        if self.is_diagonal() {
            Ok(())
        } else {
            Err(Error::unsupported("total spin is not diagonal in the natural basis"))
        }
    }

    /// Integer code `m(k)` of basis state `k`.
    #[inline]
    pub fn integer_label(self, k: usize) -> i64 {
        match self {
            SymmetryKind::Parity => (popcount(k) % 2) as i64,
            _ => popcount(k) as i64,
        }
    }

    /// `(m₀, m_M)`: smallest and largest integer code on `n` qubits.
    pub fn integer_range(self, n: usize) -> Result<(i64, i64)> {
        self.require_diagonal()?;
        Ok(match self {
            SymmetryKind::Parity => (0, if n == 0 { 0 } else { 1 }),
            _ => (0, n as i64),
        })
    }

    /// Physical eigenvalue for integer code `m`.
    pub fn eigenvalue_of(self, m: i64, n: usize) -> Result<HalfInt> {
        self.require_diagonal()?;
        Ok(match self {
            SymmetryKind::ParticleNumber => HalfInt::from_int(m),
            SymmetryKind::Sz => HalfInt::from_twice(n as i64 - 2 * m),
            _ => HalfInt::from_int(1 - 2 * m),
        })
    }

    /// Integer code of the physical eigenvalue `value`; inverse of [`Self::eigenvalue_of`].
    pub fn integer_of(self, value: HalfInt, n: usize) -> Result<i64> {
        self.require_diagonal()?;
        let out_of_spectrum = || {
            Error::domain(format!("{value} is not in the {} spectrum on {n} qubits", self.name()))
        };
        let m = match self {
            SymmetryKind::ParticleNumber => value.as_int().ok_or_else(out_of_spectrum)?,
            SymmetryKind::Sz => {
                let twice_m = n as i64 - value.twice();
                if twice_m % 2 != 0 {
                    return Err(out_of_spectrum());
                }
                twice_m / 2
            }
            _ => match value.as_int() {
                Some(1) => 0,
                Some(-1) => 1,
                _ => return Err(out_of_spectrum()),
            },
        };
        let (lo, hi) = self.integer_range(n)?;
        if m < lo || m > hi {
            return Err(out_of_spectrum());
        }
        Ok(m)
    }

    /// Every eigenvalue on `n` qubits, ordered by integer code.
    pub fn spectrum(self, n: usize) -> Result<Vec<HalfInt>> {
        if self == SymmetryKind::TotalSpin {
            return Ok((0..=n as i64 / 2).map(|d| HalfInt::from_twice(n as i64 - 2 * d)).collect());
        }
        let (lo, hi) = self.integer_range(n)?;
        (lo..=hi).map(|m| self.eigenvalue_of(m, n)).collect()
    }
}

impl fmt::Display for SymmetryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SymmetryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "particle_number" | "number" | "n" => Ok(SymmetryKind::ParticleNumber),
            "sz" | "s_z" => Ok(SymmetryKind::Sz),
            "parity" => Ok(SymmetryKind::Parity),
            "total_spin" | "s_squared" | "s2" => Ok(SymmetryKind::TotalSpin),
            other => Err(Error::domain(format!("unknown symmetry kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SectorLabel {
    pub kind: SymmetryKind,
    pub value: HalfInt,
}

impl fmt::Display for SectorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.kind, self.value)
    }
}

pub fn sector_label(k: usize, kind: SymmetryKind, n: usize) -> Result<SectorLabel> {
    kind.require_diagonal()?;
    if n >= usize::BITS as usize || k >> n != 0 {
        return Err(Error::domain(format!("basis index {k} out of range for {n} qubits")));
    }
    Ok(SectorLabel { kind, value: kind.eigenvalue_of(kind.integer_label(k), n)? })
}

/// Number of natural-basis states carrying eigenvalue `value`.
pub fn sector_dimension(n: usize, kind: SymmetryKind, value: HalfInt) -> Result<u64> {
    let m = kind.integer_of(value, n)?;
    Ok(match kind {
        SymmetryKind::Parity => 1u64 << (n - 1),
        _ => binomial(n as u64, m as u64),
    })
}

fn check_spin(n: usize, s: HalfInt) -> Result<()> {
    let t = s.twice();
    if t < 0 || t > n as i64 || (n as i64 - t) % 2 != 0 {
        return Err(Error::domain(format!("S = {s} is not reachable with {n} spins")));
    }
    Ok(())
}

/// Number of independent spin-`S` multiplets among `n` spin-½, counted as
/// lattice paths that add one spin at a time with `S → S ± ½` and `S ≥ 0`.
pub fn young_degeneracy(n: usize, s: HalfInt) -> Result<u64> {
    check_spin(n, s)?;
    // paths[t] = number of paths ending at 2S = t
    let mut paths = vec![0u64; n + 2];
    paths[0] = 1;
    for _ in 0..n {
        let mut next = vec![0u64; n + 2];
        for (t, &count) in paths.iter().enumerate() {
            if count == 0 {
                continue;
            }
            next[t + 1] += count;
            if t > 0 {
                next[t - 1] += count;
            }
        }
        paths = next;
    }
    Ok(paths[s.twice() as usize])
}

/// `S²` on the amplitude vector via `S² = n(4−n)/4 + Σ_{j<l} P_jl`, where
/// `P_jl` swaps qubits `j` and `l`.
pub fn apply_s_squared_transposition(state: &Statevector) -> Statevector {
    let n = state.n_qubits();
    let amps = state.amplitudes();
    let constant = (n as f64) * (4.0 - n as f64) / 4.0;
    let mut out: Vec<C64> = amps.iter().map(|a| a * constant).collect();
    for j in 0..n {
        for l in j + 1..n {
            for (k, o) in out.iter_mut().enumerate() {
                *o += amps[swap_bits(k, j, l)];
            }
        }
    }
    Statevector::from_amplitudes(out).expect("same dimension as the input")
}

#[inline]
pub(crate) fn swap_bits(k: usize, j: usize, l: usize) -> usize {
    let diff = (k >> j ^ k >> l) & 1;
    k ^ (diff << j | diff << l)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinBasisEntry {
    pub s: HalfInt,
    pub m: HalfInt,
    /// Which of the `young_degeneracy(n, S)` multiplets this state belongs to.
    pub degeneracy_index: usize,
    pub amplitudes: Vec<C64>,
}

impl SpinBasisEntry {
    pub fn to_statevector(&self) -> Statevector {
        Statevector::from_amplitudes(self.amplitudes.clone()).expect("power-of-two length")
    }
}

/// Complete orthonormal `|S, M⟩` basis of `n ≤ 8` spins by dense diagonalization.
///
/// `S²` is diagonalized separately in each `M` block. Within a degenerate
/// level the basis is made canonical by Gram–Schmidt on the columns of the
/// level's projector, so the result does not depend on the eigensolver. Each
/// vector is real with its highest-index nonzero amplitude positive. Entries
/// are ordered by descending `S`, then descending `M`.
pub fn spin_eigenbasis_bruteforce(n: usize) -> Result<Vec<SpinBasisEntry>> {
    if n > MAX_BRUTEFORCE_SPIN_QUBITS {
        return Err(Error::Resource(format!(
            "brute-force spin basis is limited to {MAX_BRUTEFORCE_SPIN_QUBITS} qubits, got {n}"
        )));
    }
    let dim = 1usize << n;
    let constant = (n as f64) * (4.0 - n as f64) / 4.0;
    let mut entries = Vec::with_capacity(dim);
    for n1 in 0..=n {
        let block: Vec<usize> = (0..dim).filter(|&k| popcount(k) as usize == n1).collect();
        let position = |k: usize| block.binary_search(&k).expect("swaps preserve popcount");
        let size = block.len();
        let mut s2 = DMatrix::<f64>::from_diagonal_element(size, size, constant);
        for (col, &k) in block.iter().enumerate() {
            for j in 0..n {
                for l in j + 1..n {
                    s2[(position(swap_bits(k, j, l)), col)] += 1.0;
                }
            }
        }
        let eig = SymmetricEigen::new(s2);
        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let m = HalfInt::from_twice(n as i64 - 2 * n1 as i64);
        let mut start = 0;
        while start < size {
            let level = eig.eigenvalues[order[start]];
            let mut end = start + 1;
            while end < size && (eig.eigenvalues[order[end]] - level).abs() <= EIGEN_CLUSTER_TOL {
                end += 1;
            }
            let s = spin_from_eigenvalue(level)?;
            let columns: Vec<usize> = order[start..end].to_vec();
            let vecs = canonical_level_basis(&eig.eigenvectors, &columns);
            for (degeneracy_index, v) in vecs.into_iter().enumerate() {
                let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
                for (i, &k) in block.iter().enumerate() {
                    amplitudes[k] = C64::new(v[i], 0.0);
                }
                entries.push(SpinBasisEntry { s, m, degeneracy_index, amplitudes });
            }
            start = end;
        }
    }
    entries.sort_by(|a, b| b.s.cmp(&a.s).then(b.m.cmp(&a.m)).then(a.degeneracy_index.cmp(&b.degeneracy_index)));
    Ok(entries)
}

fn spin_from_eigenvalue(level: f64) -> Result<HalfInt> {
    let s = (-1.0 + (1.0 + 4.0 * level).max(0.0).sqrt()) / 2.0;
    let twice = (2.0 * s).round();
    if (2.0 * s - twice).abs() > 1e-6 {
        return Err(Error::domain(format!("S² eigenvalue {level} is not of the form S(S+1)")));
    }
    Ok(HalfInt::from_twice(twice as i64))
}

fn canonical_level_basis(vectors: &DMatrix<f64>, columns: &[usize]) -> Vec<Vec<f64>> {
    let sub = vectors.select_columns(columns);
    let projector = &sub * sub.transpose();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(columns.len());
    for c in 0..projector.ncols() {
        if basis.len() == columns.len() {
            break;
        }
        let mut v: Vec<f64> = projector.column(c).iter().copied().collect();
        for b in &basis {
            let overlap: f64 = b.iter().zip(&v).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(y, x)| *y -= overlap * x);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-6 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        if let Some(last) = v.iter().rev().find(|x| x.abs() > 1e-12) {
            if *last < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
        v.iter_mut().filter(|x| x.abs() < 1e-15).for_each(|x| *x = 0.0);
        basis.push(v);
    }
    basis
}
