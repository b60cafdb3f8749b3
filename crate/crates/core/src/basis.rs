//! Bounded orthonormal function systems: the Fourier basis on [0, 2π) with
//! the uniform measure and the rescaled Chebyshev polynomials on [−1, 1] with
//! the arcsine measure, together with measurement-matrix construction and the
//! Chebyshev expansion of complex phases.

use crate::error::{Error, Result};
use crate::linalg::CMat;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisKind {
    Fourier,
    Chebyshev,
}

/// A bounded orthonormal system: basis kind, ordered integer label set Λ and
/// the uniform bound K on ‖φ_k‖_∞.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisSystem {
    kind: BasisKind,
    labels: Vec<i64>,
    bound: f64,
}

impl BasisSystem {
    /// Fourier system φ_k(t) = exp(i k t) with k = −e_max, …, e_max in
    /// ascending order, orthonormal under μ(t) = 1/(2π) on [0, 2π), K = 1.
    pub fn fourier(e_max: u32) -> Self {
        let e = e_max as i64;
        BasisSystem { kind: BasisKind::Fourier, labels: (-e..=e).collect(), bound: 1.0 }
    }

    /// Rescaled Chebyshev system φ_k(t) = ξ_k cos(k arccos t) with
    /// k = 0, …, dimension−1, orthonormal under the arcsine measure
    /// μ(t) = 1/(π √(1−t²)) on [−1, 1], K = √2.
    pub fn chebyshev(dimension: usize) -> Self {
        assert!(dimension >= 1, "chebyshev basis needs at least one function");
        BasisSystem {
            kind: BasisKind::Chebyshev,
            labels: (0..dimension as i64).collect(),
            bound: SQRT_2,
        }
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn dimension(&self) -> usize {
        self.labels.len()
    }

    /// The sup-norm bound K.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn domain(&self) -> (f64, f64) {
        match self.kind {
            BasisKind::Fourier => (0.0, 2.0 * PI),
            BasisKind::Chebyshev => (-1.0, 1.0),
        }
    }

    pub fn contains_label(&self, k: i64) -> bool {
        self.label_position(k).is_some()
    }

    /// Column index of a label in the declared order of Λ.
    pub fn label_position(&self, k: i64) -> Option<usize> {
        self.labels.binary_search(&k).ok()
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        let inside = match self.kind {
            BasisKind::Fourier => x >= lo && x < hi,
            BasisKind::Chebyshev => x >= lo && x <= hi,
        };
        if inside {
            Ok(())
        } else {
            Err(Error::OutOfDomain { value: x, lo, hi })
        }
    }

    /// Evaluate φ_k(x). The label must lie in Λ and x in the basis domain.
    pub fn evaluate(&self, k: i64, x: f64) -> Result<Complex64> {
        if !self.contains_label(k) {
            return Err(Error::UnknownLabel(k));
        }
        self.check_domain(x)?;
        Ok(self.evaluate_unchecked(k, x))
    }

    fn evaluate_unchecked(&self, k: i64, x: f64) -> Complex64 {
        match self.kind {
            BasisKind::Fourier => Complex64::from_polar(1.0, k as f64 * x),
            BasisKind::Chebyshev => {
                let xi = if k == 0 { 1.0 } else { SQRT_2 };
                // cos(k arccos x) is uniformly stable on [−1, 1], including
                // at the endpoints where the recurrence form degrades
                Complex64::new(xi * (k as f64 * x.clamp(-1.0, 1.0).acos()).cos(), 0.0)
            }
        }
    }

    /// Draw `count` i.i.d. samples from the orthogonality measure.
    /// Fourier: uniform on [0, 2π). Chebyshev: arcsine law via t = cos(πU).
    pub fn sample_measure(&self, count: usize, rng: &mut impl Rng) -> Result<Vec<f64>> {
        if count == 0 {
            return Err(Error::InvalidArgument("sample count must be at least 1".into()));
        }
        let samples = (0..count)
            .map(|_| match self.kind {
                BasisKind::Fourier => rng.gen_range(0.0..1.0) * 2.0 * PI,
                BasisKind::Chebyshev => (PI * rng.gen_range(0.0..1.0)).cos(),
            })
            .collect();
        Ok(samples)
    }

    /// Measurement matrix A with A[i][k] = φ_k(x_i); rows follow the point
    /// order, columns the declared order of Λ.
    pub fn measurement_matrix(&self, points: &[f64]) -> Result<MeasurementMatrix> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("measurement matrix needs at least one point".into()));
        }
        for &x in points {
            self.check_domain(x)?;
        }
        let entries = CMat::from_fn(points.len(), self.dimension(), |i, j| {
            self.evaluate_unchecked(self.labels[j], points[i])
        });
        Ok(MeasurementMatrix { entries, points: points.to_vec(), basis: self.clone() })
    }

    /// Quadrature nodes and weights integrating against the orthogonality
    /// measure: trapezoid on the periodic domain for Fourier, Gauss-Chebyshev
    /// for the arcsine measure.
    pub fn quadrature(&self, nodes: usize) -> Vec<(f64, f64)> {
        let n = nodes.max(2);
        match self.kind {
            BasisKind::Fourier => {
                let h = 2.0 * PI / n as f64;
                (0..n).map(|j| (j as f64 * h, 1.0 / n as f64)).collect()
            }
            BasisKind::Chebyshev => (0..n)
                .map(|j| (((j as f64 + 0.5) * PI / n as f64).cos(), 1.0 / n as f64))
                .collect(),
        }
    }
}

/// Complex M×D matrix of basis-function values at sampled parameter points.
#[derive(Clone, Debug)]
pub struct MeasurementMatrix {
    entries: CMat,
    points: Vec<f64>,
    basis: BasisSystem,
}

impl MeasurementMatrix {
    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn sample_points(&self) -> &[f64] {
        &self.points
    }

    pub fn basis(&self) -> &BasisSystem {
        &self.basis
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    /// Entries divided by √M, the normalization under which the restricted
    /// isometry property is stated.
    pub fn normalized_entries(&self) -> CMat {
        self.entries.scale_re(1.0 / (self.n_points() as f64).sqrt())
    }

    /// Columns restricted to a label subset, in the order given.
    pub fn restrict(&self, labels: &[i64]) -> Result<CMat> {
        let idx: Result<Vec<usize>> = labels
            .iter()
            .map(|&k| self.basis.label_position(k).ok_or(Error::UnknownLabel(k)))
            .collect();
        Ok(self.entries.select_columns(&idx?))
    }
}

/// Bessel functions of the first kind J_0(ω), …, J_kmax(ω), computed with
/// Miller's downward recurrence normalized by J_0 + 2 Σ J_{2m} = 1. Accurate
/// to ~1e-14 in absolute terms over the argument range used here.
pub fn bessel_j_sequence(omega: f64, k_max: usize) -> Vec<f64> {
    let absw = omega.abs();
    if absw < 1e-300 {
        let mut out = vec![0.0; k_max + 1];
        out[0] = 1.0;
        return out;
    }
    let m0 = k_max.max(absw.ceil() as usize);
    let mut start = m0 + 20 + (2.0 * (m0 as f64).sqrt()) as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let mut out = vec![0.0f64; k_max + 1];
    let mut jp = 0.0f64; // J̃_{m+1}
    let mut jc = 1e-30f64; // J̃_m, starting at m = start (even)
    let mut even_sum = jc;
    let mut m = start;
    while m >= 1 {
        let jm1 = (2.0 * m as f64 / absw) * jc - jp;
        jp = jc;
        jc = jm1;
        m -= 1; // jc now holds J̃_m
        if m <= k_max {
            out[m] = jc;
        }
        if m % 2 == 0 {
            even_sum += jc;
        }
        if jc.abs() > 1e250 {
            // rescale to avoid overflow on long recurrences
            let f = 1e-250;
            jp *= f;
            jc *= f;
            even_sum *= f;
            for v in out.iter_mut() {
                *v *= f;
            }
        }
    }
    // J_0 + 2 Σ_{m even ≥ 2} J_m = 1; even_sum counted J̃_0 once
    let norm = 2.0 * even_sum - jc;
    let sign = if omega < 0.0 { -1.0 } else { 1.0 };
    for (k, v) in out.iter_mut().enumerate() {
        *v /= norm;
        if k % 2 == 1 {
            *v *= sign; // J_k(−ω) = (−1)^k J_k(ω)
        }
    }
    out
}

/// Single Bessel function J_k(ω). Small arguments relative to the order go
/// through the power series; otherwise the normalized downward recurrence.
pub fn bessel_j(k: usize, omega: f64) -> f64 {
    let absw = omega.abs();
    if k > 0 && absw <= 0.1 * k as f64 {
        let sign = if omega < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
        return sign * bessel_j_series(k, absw);
    }
    bessel_j_sequence(omega, k)[k]
}

fn bessel_j_series(k: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    // leading term (x/2)^k / k! in log space
    let mut log_lead = k as f64 * (x / 2.0).ln();
    for j in 1..=k {
        log_lead -= (j as f64).ln();
    }
    if log_lead < -745.0 {
        return 0.0;
    }
    let lead = log_lead.exp();
    let q = -x * x / 4.0;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for m in 1..200 {
        term *= q / (m as f64 * (k + m) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    lead * sum
}

/// Coefficients c̃_k = i^k ξ_k J_k(−ω) = (−i)^k ξ_k J_k(ω) of the expansion
/// of exp(−iωt) in the rescaled Chebyshev basis on [−1, 1], for
/// k = 0, …, cutoff. This is the Jacobi-Anger expansion grouped by T̃_k.
pub fn chebyshev_coeffs_of_phase(omega: f64, cutoff: usize) -> Vec<Complex64> {
    let bessel = bessel_j_sequence(omega, cutoff);
    (0..=cutoff)
        .map(|k| {
            let xi = if k == 0 { 1.0 } else { SQRT_2 };
            let minus_ik = match k % 4 {
                0 => Complex64::new(1.0, 0.0),
                1 => Complex64::new(0.0, -1.0),
                2 => Complex64::new(-1.0, 0.0),
                _ => Complex64::new(0.0, 1.0),
            };
            minus_ik * xi * bessel[k]
        })
        .collect()
}

/// The envelope (e|ω| / 2k)^k that dominates |J_k(ω)|. Undefined at k = 0.
pub fn bessel_tail_bound(omega: f64, k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("bessel tail bound needs k >= 1".into()));
    }
    Ok((std::f64::consts::E * omega.abs() / (2.0 * k as f64)).powi(k as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng_from_seed;

    #[test]
    fn fourier_constant_function() {
        let b = BasisSystem::fourier(3);
        let v = b.evaluate(0, 1.3).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn chebyshev_low_orders() {
        let b = BasisSystem::chebyshev(5);
        for x in [-1.0, -0.3, 0.0, 0.7, 1.0] {
            assert!((b.evaluate(0, x).unwrap().re - 1.0).abs() < 1e-15);
        }
        // T3(0.5) = 4·0.125 − 1.5 = −1, scaled by √2
        let v = b.evaluate(3, 0.5).unwrap().re;
        assert!((v + SQRT_2).abs() < 1e-13, "got {v}");
    }

    #[test]
    fn label_and_domain_errors() {
        let b = BasisSystem::fourier(2);
        assert!(matches!(b.evaluate(5, 0.1), Err(Error::UnknownLabel(5))));
        assert!(matches!(b.evaluate(0, -0.1), Err(Error::OutOfDomain { .. })));
        let c = BasisSystem::chebyshev(4);
        assert!(matches!(c.evaluate(1, 1.5), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn fourier_sample_mean() {
        let b = BasisSystem::fourier(1);
        let mut rng = rng_from_seed(77);
        let xs = b.sample_measure(100_000, &mut rng).unwrap();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        // uniform mean π, stderr = 2π/√12/√N
        let stderr = 2.0 * PI / 12f64.sqrt() / (xs.len() as f64).sqrt();
        assert!((mean - PI).abs() < 3.0 * stderr, "mean {mean}");
    }

    #[test]
    fn chebyshev_arcsine_law() {
        let b = BasisSystem::chebyshev(4);
        let mut rng = rng_from_seed(78);
        let mut xs = b.sample_measure(100_000, &mut rng).unwrap();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // Kolmogorov-Smirnov distance to the arcsine CDF 1 − arccos(t)/π
        let n = xs.len() as f64;
        let mut ks: f64 = 0.0;
        for (i, &t) in xs.iter().enumerate() {
            let cdf = 1.0 - t.acos() / PI;
            let emp_hi = (i + 1) as f64 / n;
            let emp_lo = i as f64 / n;
            ks = ks.max((cdf - emp_hi).abs()).max((cdf - emp_lo).abs());
        }
        assert!(ks < 0.01, "KS distance {ks}");
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let b = BasisSystem::chebyshev(4);
        let a = b.sample_measure(1, &mut rng_from_seed(5)).unwrap();
        let c = b.sample_measure(1, &mut rng_from_seed(5)).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn measurement_matrix_rows() {
        let b = BasisSystem::fourier(1);
        let m = b.measurement_matrix(&[0.0]).unwrap();
        for j in 0..3 {
            assert!((m.entries()[(0, j)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }

        let c = BasisSystem::chebyshev(2);
        let mc = c.measurement_matrix(&[-1.0, 1.0]).unwrap();
        assert!((mc.entries()[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!((mc.entries()[(0, 1)].re + SQRT_2).abs() < 1e-13);
        assert!((mc.entries()[(1, 1)].re - SQRT_2).abs() < 1e-13);

        assert!(b.measurement_matrix(&[]).is_err());
    }

    #[test]
    fn measurement_matrix_rebuild_is_bit_exact() {
        let b = BasisSystem::fourier(4);
        let mut rng = rng_from_seed(9);
        let pts = b.sample_measure(17, &mut rng).unwrap();
        let m1 = b.measurement_matrix(&pts).unwrap();
        let m2 = b.measurement_matrix(m1.sample_points()).unwrap();
        assert_eq!(m1.entries(), m2.entries());
    }

    #[test]
    fn orthonormality_via_quadrature() {
        for basis in [BasisSystem::fourier(4), BasisSystem::chebyshev(7)] {
            let quad = basis.quadrature(20_000);
            for &k in basis.labels() {
                for &j in basis.labels() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for &(x, w) in &quad {
                        let fk = basis.evaluate(k, x).unwrap();
                        let fj = basis.evaluate(j, x).unwrap();
                        acc += fk.conj() * fj * w;
                    }
                    let expect = if k == j { 1.0 } else { 0.0 };
                    assert!(
                        (acc - Complex64::new(expect, 0.0)).norm() < 1e-8,
                        "⟨{k},{j}⟩ = {acc} for {:?}",
                        basis.kind()
                    );
                }
            }
        }
    }

    #[test]
    fn boundedness_on_grid() {
        for basis in [BasisSystem::fourier(5), BasisSystem::chebyshev(9)] {
            let (lo, hi) = basis.domain();
            let k_bound = basis.bound();
            for &k in basis.labels() {
                let mut max = 0.0f64;
                for g in 0..10_000 {
                    let x = lo + (hi - lo) * g as f64 / 10_000f64;
                    max = max.max(basis.evaluate(k, x).unwrap().norm());
                }
                assert!(max <= k_bound + 1e-12, "bound violated for k={k}: {max}");
            }
        }
    }

    #[test]
    fn chebyshev_cosine_identity() {
        let b = BasisSystem::chebyshev(12);
        for k in 0..12i64 {
            let xi = if k == 0 { 1.0 } else { SQRT_2 };
            for g in 0..200 {
                let t = PI * g as f64 / 199.0;
                let lhs = b.evaluate(k, t.cos()).unwrap().re;
                let rhs = xi * (k as f64 * t).cos();
                assert!((lhs - rhs).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bessel_at_zero() {
        let c = chebyshev_coeffs_of_phase(0.0, 4);
        assert!((c[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        for k in 1..=4 {
            assert!(c[k].norm() < 1e-15);
        }
        assert!(bessel_tail_bound(0.0, 3).unwrap() == 0.0);
        assert!(bessel_tail_bound(2.0, 0).is_err());
    }

    #[test]
    fn bessel_values_match_reference() {
        // Reference values from the standard series definition, evaluated in
        // the test itself as an independent route.
        for (k, w) in [(0usize, 1.0f64), (1, 1.0), (2, 3.0), (5, 3.0), (10, 2.0), (8, 7.5)] {
            let series = bessel_j_series(k, w);
            let miller = bessel_j_sequence(w, k)[k];
            assert!(
                (series - miller).abs() < 1e-12,
                "J_{k}({w}): series {series} vs miller {miller}"
            );
        }
        // classic values
        assert!((bessel_j(0, 2.404_825_557_695_773) - 0.0).abs() < 1e-10); // first zero of J0
        assert!((bessel_j(1, 1.0) - 0.440_050_585_744_933_5).abs() < 1e-12);
    }

    #[test]
    fn bessel_tail_bound_dominates() {
        for k in 8u32..=20 {
            let j = bessel_j(k as usize, 3.0).abs();
            let bound = bessel_tail_bound(3.0, k).unwrap();
            assert!(j <= bound, "k={k}: |J|={j} > bound={bound}");
        }
    }

    #[test]
    fn phase_expansion_tail_bound_example() {
        // |c̃_20| ≤ √2 (e·5/40)^20 at ω = 5
        let c = chebyshev_coeffs_of_phase(5.0, 25);
        let bound = SQRT_2 * bessel_tail_bound(5.0, 20).unwrap();
        assert!(c[20].norm() <= bound);
    }

    #[test]
    fn phase_expansion_matches_direct_evaluation() {
        let b = BasisSystem::chebyshev(64);
        for &omega in &[0.5f64, 2.0] {
            let cutoff = (std::f64::consts::E * omega).ceil() as usize + 40;
            let coeffs = chebyshev_coeffs_of_phase(omega, cutoff);
            let mut worst = 0.0f64;
            for g in 0..101 {
                let t = -1.0 + 2.0 * g as f64 / 100.0;
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, c) in coeffs.iter().enumerate() {
                    acc += c * b.evaluate(k as i64, t).unwrap();
                }
                let direct = Complex64::from_polar(1.0, -omega * t);
                worst = worst.max((acc - direct).norm());
            }
            assert!(worst < 1e-10, "ω={omega}: sup error {worst}");
        }
    }
}
