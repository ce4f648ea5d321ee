//! Small numeric helpers shared by the simulator modules.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// `e^{iθ}`, returning exact values when `θ` is a whole number of quarter
/// turns. Dyadic phases such as `e^{iπ}` then cancel exactly in interference,
/// so filtered sectors come out as true zeros instead of `1e-32` residue.
pub fn cis(theta: f64) -> C64 {
    let quarters = theta / FRAC_PI_2;
    let nearest = quarters.round();
    if (quarters - nearest).abs() <= 1e-13 * nearest.abs().max(1.0) {
        match (nearest as i64).rem_euclid(4) {
            0 => ONE,
            1 => I,
            2 => -ONE,
            _ => -I,
        }
    } else {
        C64::from_polar(1.0, theta)
    }
}

/// Binomial coefficient `C(n, k)`; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of `1` bits in a basis index, `n₁(k)`.
#[inline]
pub fn popcount(k: usize) -> u32 {
    k.count_ones()
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Max entrywise deviation of `a` from `b` after removing the best global
/// phase (aligned on the largest entry of `b`).
pub fn max_abs_diff_up_to_phase(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    let (idx, _) = b
        .iter()
        .enumerate()
        .fold((0, -1.0), |best, (i, z)| if z.norm() > best.1 { (i, z.norm()) } else { best });
    let (ai, bi) = (a.as_slice()[idx], b.as_slice()[idx]);
    let phase = if ai.norm() > 0.0 { bi / ai * (ai.norm() / bi.norm()) } else { ONE };
    let phase = phase / phase.norm();
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x * phase - y).norm())
        .fold(0.0, f64::max)
}

/// `‖U†U − I‖_max`.
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(&(m.adjoint() * m), &identity(m.nrows()))
}

/// `⌈x⌉` that ignores floating-point spill just above an integer.
pub(crate) fn ceil_tol(x: f64) -> f64 {
    (x - 1e-9).ceil()
}

/// `⌊x⌋` that ignores floating-point spill just below an integer.
pub(crate) fn floor_tol(x: f64) -> f64 {
    (x + 1e-9).floor()
}

/// Smallest `b` with `2^b > x`, i.e. `⌊log₂ x⌋ + 1` for `x ≥ 1`, and 0 for `x = 0`.
pub fn bits_to_exceed(x: u64) -> u32 {
    64 - x.leading_zeros()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn compensated_sum_of_equal_weights() {
        let n = 12870;
        let w = 1.0 / n as f64;
        assert!((accurate_sum(std::iter::repeat_n(w, n)) - 1.0).abs() <= 4.0 * f64::EPSILON);
        assert_eq!(accurate_sum([1e16, 1.0, -1e16]), 1.0);
    }

    #[test]
    fn cis_snaps_quarter_turns() {
        assert_eq!(cis(PI), -ONE);
        assert_eq!(cis(-PI / 2.0), -I);
        assert_eq!(cis(2.0 * PI * 8.0 / 16.0), -ONE);
        assert_eq!(cis(-4.0 * PI), ONE);
        let z = cis(0.3);
        assert!((z - C64::from_polar(1.0, 0.3)).norm() < 1e-16);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(16, 8), 12870);
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(60, 30), 118264581564861424);
    }

    #[test]
    fn bit_lengths() {
        assert_eq!(bits_to_exceed(0), 0);
        assert_eq!(bits_to_exceed(1), 1);
        assert_eq!(bits_to_exceed(4), 3);
        assert_eq!(bits_to_exceed(8), 4);
        assert_eq!(bits_to_exceed(16), 5);
    }

    #[test]
    fn tolerant_rounding() {
        assert_eq!(ceil_tol(6.000000000001), 6.0);
        assert_eq!(ceil_tol(6.1), 7.0);
        assert_eq!(floor_tol(5.9999999999999), 6.0);
    }
}

/// Neumaier-compensated running sum. Plain accumulation of 10⁴ equal weights
/// already drifts by ~1e-12; this keeps the error at a few ulps.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<T: IntoIterator<Item = f64>>(iter: T) -> Self {
        let mut s = CompensatedSum::default();
        iter.into_iter().for_each(|x| s.add(x));
        s
    }
}

/// `Σ xs` with compensation.
pub fn accurate_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().collect::<CompensatedSum>().value()
}
