//! Parameter-dependent expectation values from recovered coefficients: the
//! coefficient route Σ_k Tr[O α̂_k] φ_k(x), the equivalent prediction-weight
//! route Σ_i m_i(x) Tr[O ρ̂(x_i)], and importance-sampled snapshot evaluation
//! whose cost is set by the budget, not by the number of parameter points.

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::pauli::PauliWord;
use crate::recovery::{CoefficientEstimates, RecoveryReport};
use num_complex::Complex64;
use rand::Rng;

/// m_i(x) = Σ_{k∈S} (A_S⁺)_{k,i} φ_k(x).
#[derive(Clone, Debug)]
pub struct PredictionWeights {
    pub x: f64,
    pub weights: Vec<Complex64>,
}

pub fn prediction_weights(report: &RecoveryReport, x: f64) -> Result<PredictionWeights> {
    let basis = &report.plan.basis;
    let support = &report.plan.support;
    let m = report.sample_points.len();
    let mut weights = vec![Complex64::new(0.0, 0.0); m];
    for (k, &label) in support.iter().enumerate() {
        let phi = basis.evaluate(label, x)?;
        for (i, w) in weights.iter_mut().enumerate() {
            *w += report.pseudo_inverse[(k, i)] * phi;
        }
    }
    Ok(PredictionWeights { x, weights })
}

/// Observables prediction understands.
#[derive(Clone, Debug)]
pub enum Observable {
    Matrix(CMat),
    Pauli(PauliWord),
    /// Σ_j h_j P_j
    PauliSum(Vec<(f64, PauliWord)>),
}

impl Observable {
    fn dense(&self, dim: usize) -> Result<CMat> {
        Ok(match self {
            Observable::Matrix(m) => {
                if m.rows() != dim {
                    return Err(Error::DimensionMismatch(
                        "observable dimension differs from the state".into(),
                    ));
                }
                m.clone()
            }
            Observable::Pauli(w) => w.dense(),
            Observable::PauliSum(terms) => {
                let mut acc = CMat::zeros(dim, dim);
                for (h, w) in terms {
                    acc.add_assign_scaled(&w.dense(), Complex64::new(*h, 0.0));
                }
                acc
            }
        })
    }

    fn pauli_terms(&self) -> Option<Vec<(f64, PauliWord)>> {
        match self {
            Observable::Pauli(w) => Some(vec![(1.0, w.clone())]),
            Observable::PauliSum(terms) => Some(terms.clone()),
            Observable::Matrix(_) => None,
        }
    }
}

/// Tr[O ρ̂(x)] through the recovered coefficients.
pub fn predict_expectation(report: &RecoveryReport, o: &Observable, x: f64) -> Result<f64> {
    let basis = &report.plan.basis;
    match &report.coefficients {
        CoefficientEstimates::Dense(expansion) => {
            let dense = o.dense(expansion.dim())?;
            let mut acc = Complex64::new(0.0, 0.0);
            for (&k, c) in expansion.support().iter().zip(expansion.coefficients()) {
                acc += dense.matmul(c).trace() * basis.evaluate(k, x)?;
            }
            Ok(acc.re)
        }
        CoefficientEstimates::Shadow(shadow) => {
            let terms = o.pauli_terms().ok_or_else(|| {
                Error::Unsupported(
                    "dense observables cannot be evaluated against shadow-backed coefficients; \
                     supply a Pauli decomposition or densify explicitly"
                        .into(),
                )
            })?;
            let mut acc = Complex64::new(0.0, 0.0);
            for (h, word) in &terms {
                let traces = shadow.coefficient_pauli_traces(word);
                for (pos, &k) in shadow.support().iter().enumerate() {
                    acc += traces[pos] * basis.evaluate(k, x)? * *h;
                }
            }
            Ok(acc.re)
        }
    }
}

/// The same prediction through the m-weights; agrees with the coefficient
/// route to numerical precision and exposes the per-point contraction.
pub fn predict_expectation_via_weights(
    report: &RecoveryReport,
    o: &Observable,
    x: f64,
) -> Result<f64> {
    let weights = prediction_weights(report, x)?;
    match &report.coefficients {
        CoefficientEstimates::Dense(_) => {
            let mats = report.dense_observations.as_ref().ok_or_else(|| {
                Error::InvalidArgument("report does not carry dense observations".into())
            })?;
            let dense = o.dense(mats[0].rows())?;
            let mut acc = Complex64::new(0.0, 0.0);
            for (w, mat) in weights.weights.iter().zip(mats.iter()) {
                acc += w * dense.matmul(mat).trace();
            }
            Ok(acc.re)
        }
        CoefficientEstimates::Shadow(shadow) => {
            let terms = o.pauli_terms().ok_or_else(|| {
                Error::Unsupported("dense observables need dense observations".into())
            })?;
            let mut acc = Complex64::new(0.0, 0.0);
            for (h, word) in &terms {
                for (w, hist) in weights.weights.iter().zip(shadow.point_histograms()) {
                    acc += w * hist.expectation(word) * *h;
                }
            }
            Ok(acc.re)
        }
    }
}

/// Outcome of an importance-sampled prediction.
#[derive(Clone, Copy, Debug)]
pub struct SampledPrediction {
    pub value: f64,
    pub std_error: f64,
    /// Number of snapshot evaluations performed; equals the requested budget.
    pub snapshots_evaluated: usize,
    /// Set when every prediction weight vanished and zero was returned.
    pub degenerate: bool,
}

/// Unbiased importance-sampled estimate of Tr[O ρ̂(x)] for shadow-backed
/// reports: parameter points are drawn with probability |m_i(x)|/Σ|m|, a
/// snapshot uniformly within the point, and the weight's phase and the total
/// mass Σ|m| are carried into the estimate. Pauli sums are handled term-wise
/// with budgets proportional to |h_j|.
pub fn predict_importance_sampled(
    report: &RecoveryReport,
    o: &Observable,
    x: f64,
    budget: usize,
    rng: &mut impl Rng,
) -> Result<SampledPrediction> {
    if budget == 0 {
        return Err(Error::InvalidArgument("budget must be at least 1".into()));
    }
    let shadow = report.coefficients.shadow().ok_or_else(|| {
        Error::Unsupported("importance sampling needs shadow-backed coefficients".into())
    })?;
    let terms = o
        .pauli_terms()
        .ok_or_else(|| Error::Unsupported("importance sampling needs Pauli observables".into()))?;

    let weights = prediction_weights(report, x)?.weights;
    let mass: f64 = weights.iter().map(|w| w.norm()).sum();
    if mass == 0.0 {
        return Ok(SampledPrediction {
            value: 0.0,
            std_error: 0.0,
            snapshots_evaluated: 0,
            degenerate: true,
        });
    }
    // cumulative distribution over points
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in &weights {
        acc += w.norm() / mass;
        cdf.push(acc);
    }

    // split the budget over terms proportionally to |h_j|, exactly
    let h_total: f64 = terms.iter().map(|(h, _)| h.abs()).sum();
    if h_total == 0.0 {
        return Ok(SampledPrediction {
            value: 0.0,
            std_error: 0.0,
            snapshots_evaluated: 0,
            degenerate: true,
        });
    }
    let mut allocations: Vec<usize> = terms
        .iter()
        .map(|(h, _)| ((budget as f64) * h.abs() / h_total).floor() as usize)
        .collect();
    let mut assigned: usize = allocations.iter().sum();
    let n_terms = allocations.len();
    let mut idx = 0usize;
    while assigned < budget {
        allocations[idx % n_terms] += 1;
        assigned += 1;
        idx += 1;
    }

    let data = shadow.point_data();
    let mut value = 0.0f64;
    let mut variance = 0.0f64;
    let mut evaluated = 0usize;
    for ((h, word), &b) in terms.iter().zip(allocations.iter()) {
        if b == 0 {
            continue;
        }
        let mut sum = 0.0f64;
        let mut sum_sq = 0.0f64;
        for _ in 0..b {
            let u: f64 = rng.gen_range(0.0..1.0);
            let i = match cdf.binary_search_by(|c| c.partial_cmp(&u).unwrap()) {
                Ok(i) => (i + 1).min(cdf.len() - 1),
                Err(i) => i,
            };
            let point = &data[i];
            let j = rng.gen_range(0..point.len());
            let snap = point.single_estimate(j, word);
            // phase of m_i and the total mass make the estimator unbiased
            let est = (weights[i] / weights[i].norm() * mass * snap).re;
            sum += est;
            sum_sq += est * est;
            evaluated += 1;
        }
        let mean = sum / b as f64;
        let var = (sum_sq / b as f64 - mean * mean).max(0.0);
        value += h * mean;
        variance += h * h * var / b as f64;
    }
    Ok(SampledPrediction {
        value,
        std_error: variance.sqrt(),
        snapshots_evaluated: evaluated,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisSystem;
    use crate::qsim::{DensityOperator, IntegerSpectrumHamiltonian};
    use crate::random::rng_from_seed;
    use crate::recovery::{recover_full, recover_sparse, RecoveryPlan};
    use crate::tomo::{Estimate, ShotPolicy, TomographicProcedure};

    fn nmr_setup() -> (IntegerSpectrumHamiltonian, DensityOperator, BasisSystem) {
        let h = IntegerSpectrumHamiltonian::new(2, vec![0, 1, 1, 2]).unwrap();
        let rho0 = DensityOperator::plus_all(2);
        let basis = BasisSystem::fourier(2);
        (h, rho0, basis)
    }

    fn dense_report(m: usize, seed: u64) -> RecoveryReport {
        let (h, rho0, basis) = nmr_setup();
        let mut rng = rng_from_seed(seed);
        let plan =
            RecoveryPlan::empirical(basis.clone(), basis.labels().to_vec(), 1.0, 1e-9, 0.1, m)
                .unwrap();
        let points = basis.sample_measure(m, &mut rng).unwrap();
        let a = basis.measurement_matrix(&points).unwrap();
        let proc = TomographicProcedure::exact_oracle();
        let obs: Vec<Estimate> = points
            .iter()
            .map(|&t| proc.acquire(&h.evolve(&rho0, t).unwrap(), 0.5, 0.5, &mut rng).unwrap())
            .collect();
        recover_full(&plan, obs, &a).unwrap()
    }

    fn shadow_report(m: usize, shots: usize, seed: u64) -> RecoveryReport {
        let (h, rho0, basis) = nmr_setup();
        let mut rng = rng_from_seed(seed);
        let plan =
            RecoveryPlan::empirical(basis.clone(), basis.labels().to_vec(), 1.0, 0.3, 0.1, m)
                .unwrap();
        let points = basis.sample_measure(m, &mut rng).unwrap();
        let a = basis.measurement_matrix(&points).unwrap();
        let proc = TomographicProcedure::local_shadows(2, ShotPolicy::Fixed(shots));
        let obs: Vec<Estimate> = points
            .iter()
            .map(|&t| proc.acquire(&h.evolve(&rho0, t).unwrap(), 0.3, 0.1, &mut rng).unwrap())
            .collect();
        recover_sparse(&plan, obs, &a).unwrap()
    }

    #[test]
    fn coefficient_and_weight_routes_agree() {
        let report = dense_report(24, 90);
        let o = Observable::Pauli(PauliWord::parse("ZI").unwrap());
        for g in 0..20 {
            let x = 2.0 * std::f64::consts::PI * g as f64 / 20.0;
            let a = predict_expectation(&report, &o, x).unwrap();
            let b = predict_expectation_via_weights(&report, &o, x).unwrap();
            assert!((a - b).abs() < 1e-9, "routes differ at x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn prediction_matches_exact_evolution() {
        let (h, rho0, _) = nmr_setup();
        let report = dense_report(24, 91);
        let word = PauliWord::parse("XI").unwrap();
        let o = Observable::Pauli(word.clone());
        for g in 0..25 {
            let t = 2.0 * std::f64::consts::PI * g as f64 / 25.0;
            let predicted = predict_expectation(&report, &o, t).unwrap();
            let exact = word.trace_with(h.evolve(&rho0, t).unwrap().matrix()).re;
            assert!((predicted - exact).abs() < 1e-8, "t={t}: {predicted} vs {exact}");
        }
    }

    #[test]
    fn identity_prediction_is_unit_trace() {
        let report = dense_report(24, 92);
        let o = Observable::Pauli(PauliWord::identity(2));
        let v = predict_expectation(&report, &o, 1.0).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn prediction_is_linear_in_observable() {
        let report = dense_report(24, 93);
        let w1 = PauliWord::parse("ZI").unwrap();
        let w2 = PauliWord::parse("XX").unwrap();
        let x = 0.73;
        let a = predict_expectation(&report, &Observable::Pauli(w1.clone()), x).unwrap();
        let b = predict_expectation(&report, &Observable::Pauli(w2.clone()), x).unwrap();
        let sum = Observable::PauliSum(vec![(2.0, w1), (-0.5, w2)]);
        let c = predict_expectation(&report, &sum, x).unwrap();
        assert!((c - (2.0 * a - 0.5 * b)).abs() < 1e-10);
    }

    #[test]
    fn weights_interpolate_on_square_systems() {
        // with S = Λ and a square invertible A, m_i(x_j) = δ_ij
        let (h, rho0, basis) = nmr_setup();
        let mut rng = rng_from_seed(94);
        let d = basis.dimension();
        let plan =
            RecoveryPlan::empirical(basis.clone(), basis.labels().to_vec(), 1.0, 1e-9, 0.1, d)
                .unwrap();
        let points = basis.sample_measure(d, &mut rng).unwrap();
        let a = basis.measurement_matrix(&points).unwrap();
        let proc = TomographicProcedure::exact_oracle();
        let obs: Vec<Estimate> = points
            .iter()
            .map(|&t| proc.acquire(&h.evolve(&rho0, t).unwrap(), 0.5, 0.5, &mut rng).unwrap())
            .collect();
        let report = recover_full(&plan, obs, &a).unwrap();
        for (j, &xj) in points.iter().enumerate() {
            let w = prediction_weights(&report, xj).unwrap().weights;
            for (i, wi) in w.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (wi - Complex64::new(expect, 0.0)).norm() < 1e-8,
                    "m_{i}({xj}) = {wi}, expected {expect}"
                );
            }
        }
    }

    #[test]
    fn importance_sampler_is_unbiased_and_counts_snapshots() {
        let report = shadow_report(20, 2000, 95);
        let o = Observable::Pauli(PauliWord::parse("ZI").unwrap());
        let x = 1.1;
        let deterministic = predict_expectation_via_weights(&report, &o, x).unwrap();
        let mut rng = rng_from_seed(96);
        let budget = 100_000;
        let sampled = predict_importance_sampled(&report, &o, x, budget, &mut rng).unwrap();
        assert_eq!(sampled.snapshots_evaluated, budget);
        assert!(!sampled.degenerate);
        assert!(
            (sampled.value - deterministic).abs() < 4.0 * sampled.std_error.max(1e-3),
            "sampled {} vs deterministic {deterministic} (se {})",
            sampled.value,
            sampled.std_error
        );
    }

    #[test]
    fn importance_sampler_budget_is_independent_of_points() {
        let report_small = shadow_report(10, 500, 97);
        let report_large = shadow_report(40, 500, 98);
        let o = Observable::Pauli(PauliWord::parse("IZ").unwrap());
        let mut rng = rng_from_seed(99);
        let s1 = predict_importance_sampled(&report_small, &o, 0.4, 5_000, &mut rng).unwrap();
        let s2 = predict_importance_sampled(&report_large, &o, 0.4, 5_000, &mut rng).unwrap();
        assert_eq!(s1.snapshots_evaluated, 5_000);
        assert_eq!(s2.snapshots_evaluated, 5_000);
    }

    #[test]
    fn importance_sampler_splits_budget_over_terms() {
        let report = shadow_report(12, 500, 100);
        let o = Observable::PauliSum(vec![
            (3.0, PauliWord::parse("ZI").unwrap()),
            (1.0, PauliWord::parse("IZ").unwrap()),
        ]);
        let mut rng = rng_from_seed(101);
        let sampled = predict_importance_sampled(&report, &o, 0.2, 10_000, &mut rng).unwrap();
        assert_eq!(sampled.snapshots_evaluated, 10_000);
    }

    #[test]
    fn zero_mass_observable_returns_flagged_zero() {
        let report = shadow_report(10, 200, 104);
        let o = Observable::PauliSum(vec![(0.0, PauliWord::parse("ZI").unwrap())]);
        let mut rng = rng_from_seed(105);
        let s = predict_importance_sampled(&report, &o, 0.3, 50, &mut rng).unwrap();
        assert!(s.degenerate);
        assert_eq!(s.value, 0.0);
        assert_eq!(s.snapshots_evaluated, 0);
    }

    #[test]
    fn single_point_mass_reduces_to_scaled_shadow_estimate() {
        // a constant expansion from a single point: one prediction weight,
        // so the sampler reduces to that point's shadow mean times m_1
        let (h, rho0, _) = nmr_setup();
        let mut rng = rng_from_seed(106);
        let basis = BasisSystem::fourier(0);
        let plan = RecoveryPlan::empirical(basis.clone(), vec![0], 1.0, 0.3, 0.1, 1).unwrap();
        let points = basis.sample_measure(1, &mut rng).unwrap();
        let a = basis.measurement_matrix(&points).unwrap();
        let proc = TomographicProcedure::local_shadows(2, ShotPolicy::Fixed(4000));
        let obs = vec![proc
            .acquire(&h.evolve(&rho0, points[0]).unwrap(), 0.3, 0.1, &mut rng)
            .unwrap()];
        let report = recover_sparse(&plan, obs, &a).unwrap();
        let o = Observable::Pauli(PauliWord::parse("ZI").unwrap());
        let x = 0.9;
        let weights = prediction_weights(&report, x).unwrap().weights;
        assert_eq!(weights.len(), 1);
        let deterministic = predict_expectation_via_weights(&report, &o, x).unwrap();
        let sampled = predict_importance_sampled(&report, &o, x, 50_000, &mut rng).unwrap();
        assert!(
            (sampled.value - deterministic).abs() < 4.0 * sampled.std_error.max(1e-3),
            "{} vs {deterministic}",
            sampled.value
        );
    }

    #[test]
    fn dense_observable_on_shadows_is_a_capability_error() {
        let report = shadow_report(10, 200, 102);
        let o = Observable::Matrix(CMat::identity(4));
        assert!(matches!(
            predict_expectation(&report, &o, 0.1),
            Err(Error::Unsupported(_))
        ));
        let mut rng = rng_from_seed(103);
        assert!(matches!(
            predict_importance_sampled(&report, &o, 0.1, 10, &mut rng),
            Err(Error::Unsupported(_))
        ));
    }
}
