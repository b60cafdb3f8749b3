//! Support identification: rank coefficient operators by Hilbert-Schmidt
//! norm, estimated from sparse solves of randomly drawn Pauli expectation
//! trajectories, with the worst-case and flatness separability diagnostics.

use crate::basis::MeasurementMatrix;
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::pauli::{PauliOp, PauliWord};
use crate::solvers::{htp, rip_constant_bruteforce, RIP_SCAN_LIMIT};
use crate::tomo::{Estimate, ShadowHistogram};
use crate::util::binomial;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Placeholder constants in the sparse-recovery error bound
/// ‖c − c#‖₂ ≤ (D₁/√s) σ_s(c)₁ + D₂ η; the analysis leaves them unspecified,
/// these defaults are conservative and configurable.
pub const DEFAULT_D1: f64 = 3.0;
pub const DEFAULT_D2: f64 = 6.0;

/// Number of Pauli probes L ≥ ln(2D/δ) (1+κ)² / (2ε⁴), before rounding.
pub fn probe_count_raw(d: usize, delta: f64, epsilon: f64, kappa: f64) -> f64 {
    (2.0 * d as f64 / delta).ln() * (1.0 + kappa).powi(2) / (2.0 * epsilon.powi(4))
}

pub fn probe_count(d: usize, delta: f64, epsilon: f64, kappa: f64) -> Result<usize> {
    if d == 0 || delta <= 0.0 || epsilon <= 0.0 || kappa < 0.0 {
        return Err(Error::InvalidArgument("probe count needs positive arguments".into()));
    }
    Ok(probe_count_raw(d, delta, epsilon, kappa).ceil() as usize)
}

/// |c| ≤ 1 + κ, the a-priori bound every solver output coefficient obeys for
/// Pauli probes.
pub fn coefficient_bound_check(value: f64, kappa: f64) -> bool {
    value.abs() <= 1.0 + kappa + 1e-9
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SupportEstimate {
    /// Identified support as basis labels, sorted ascending.
    pub labels: Vec<i64>,
    /// Empirical means X̂_k for every label of Λ, in declared label order.
    pub xhat: Vec<f64>,
    /// Number of Pauli probes used.
    pub probes: usize,
    /// min_{k∈S} X̂_k − max_{k∉S} X̂_k (infinite when S = Λ).
    pub gap: f64,
    /// Brute-forced Δ_(3s)(A/√M) when the scan fits the guard.
    pub rip_delta: Option<f64>,
    /// Solver outputs violating the |c| ≤ 1 + κ bound (anomaly counter).
    pub coefficient_bound_violations: usize,
    pub max_coefficient_magnitude: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct SupportIdOptions {
    pub sparsity: usize,
    pub probes: usize,
    /// Solver error bound parameter for the coefficient-bound diagnostic.
    pub kappa: f64,
    /// Refuse to run when Δ_(3s) ≤ 1/2 cannot be certified (strict mode);
    /// otherwise proceed and record what is known.
    pub strict: bool,
    pub max_iters: usize,
    pub tolerance: f64,
}

impl SupportIdOptions {
    pub fn new(sparsity: usize, probes: usize) -> Self {
        SupportIdOptions {
            sparsity,
            probes,
            kappa: 0.1,
            strict: false,
            max_iters: 200,
            tolerance: 1e-12,
        }
    }

    pub fn strict(mut self) -> Self {
        self.strict = true;
        self
    }
}

fn pauli_expectation_vector(
    observations: &[Estimate],
    histograms: &[Option<ShadowHistogram>],
    word: &PauliWord,
) -> Vec<f64> {
    observations
        .iter()
        .zip(histograms.iter())
        .map(|(o, h)| match (o, h) {
            (Estimate::Dense(m), _) => word.trace_with(m).re,
            (Estimate::Shadows(_), Some(hist)) => hist.expectation(word),
            (Estimate::Shadows(d), None) => d.histogram().expectation(word),
        })
        .collect()
}

fn uniform_pauli_word(n: usize, rng: &mut impl Rng) -> PauliWord {
    PauliWord((0..n).map(|_| PauliOp::from_index(rng.gen_range(0..4))).collect())
}

/// X̂ accumulation for a fixed sequence of Pauli words. Exposed so the
/// estimator can also be driven by exhaustive enumeration.
pub fn accumulate_xhat(
    observations: &[Estimate],
    a: &MeasurementMatrix,
    sparsity: usize,
    words: &[PauliWord],
    opts: &SupportIdOptions,
) -> Result<(Vec<f64>, usize, f64)> {
    let m = a.n_points();
    if observations.len() != m {
        return Err(Error::DimensionMismatch("observation count differs from matrix rows".into()));
    }
    let d = a.basis().dimension();
    let normalized = a.normalized_entries();
    let scale = 1.0 / (m as f64).sqrt();
    let histograms: Vec<Option<ShadowHistogram>> = observations
        .iter()
        .map(|o| o.shadows().map(|d| d.histogram()))
        .collect();

    let mut acc = vec![0.0f64; d];
    let mut violations = 0usize;
    let mut max_mag = 0.0f64;
    for word in words {
        let rhs = pauli_expectation_vector(observations, &histograms, word);
        let f_hat: Vec<Complex64> =
            rhs.iter().map(|&v| Complex64::new(v * scale, 0.0)).collect();
        let sol = htp(&normalized, &f_hat, sparsity, opts.max_iters, opts.tolerance)?;
        for (k, c) in sol.coefficients.iter().enumerate() {
            let mag = c.norm();
            if mag > 0.0 {
                if !coefficient_bound_check(mag, opts.kappa) {
                    violations += 1;
                }
                max_mag = max_mag.max(mag);
                acc[k] += mag * mag;
            }
        }
    }
    let l = words.len() as f64;
    let xhat: Vec<f64> = acc.into_iter().map(|v| (v / l).sqrt()).collect();
    Ok((xhat, violations, max_mag))
}

fn top_s_labels(xhat: &[f64], labels: &[i64], s: usize) -> (Vec<i64>, f64) {
    let mut order: Vec<usize> = (0..xhat.len()).collect();
    order.sort_by(|&a, &b| xhat[b].partial_cmp(&xhat[a]).unwrap().then(a.cmp(&b)));
    let chosen: Vec<usize> = order.iter().take(s).cloned().collect();
    let gap = if s >= xhat.len() {
        f64::INFINITY
    } else {
        let min_in = chosen.iter().map(|&i| xhat[i]).fold(f64::INFINITY, f64::min);
        let max_out = order[s..].iter().map(|&i| xhat[i]).fold(0.0f64, f64::max);
        min_in - max_out
    };
    let mut labels_out: Vec<i64> = chosen.into_iter().map(|i| labels[i]).collect();
    labels_out.sort_unstable();
    (labels_out, gap)
}

/// Identify the s labels whose coefficient operators are largest in
/// Hilbert-Schmidt norm, from L uniformly random Pauli probes solved by hard
/// thresholding pursuit on the shared measurement data.
pub fn identify_support(
    observations: &[Estimate],
    a: &MeasurementMatrix,
    opts: &SupportIdOptions,
    rng: &mut impl Rng,
) -> Result<SupportEstimate> {
    let d = a.basis().dimension();
    if opts.sparsity == 0 || opts.sparsity > d {
        return Err(Error::InvalidArgument(format!(
            "sparsity {} out of range for D = {d}",
            opts.sparsity
        )));
    }
    // RIP precondition Δ_(3s) ≤ 1/2: certify by brute force at desk scale
    let order = (3 * opts.sparsity).min(d);
    let rip_delta = if binomial(d, order) <= RIP_SCAN_LIMIT {
        Some(rip_constant_bruteforce(&a.normalized_entries(), order)?.delta)
    } else {
        None
    };
    match rip_delta {
        Some(delta) if delta > 0.5 => {
            if opts.strict {
                return Err(Error::GuaranteeFailed(format!(
                    "Δ_(3s) = {delta:.3} > 1/2; refusing in strict mode"
                )));
            }
        }
        None if opts.strict => {
            return Err(Error::GuaranteeFailed(
                "Δ_(3s) cannot be certified within the brute-force guard".into(),
            ));
        }
        _ => {}
    }

    let n = match &observations[0] {
        Estimate::Dense(m) => m.rows().trailing_zeros() as usize,
        Estimate::Shadows(s) => s.n_qubits(),
    };
    let words: Vec<PauliWord> = (0..opts.probes).map(|_| uniform_pauli_word(n, rng)).collect();
    let (xhat, violations, max_mag) =
        accumulate_xhat(observations, a, opts.sparsity, &words, opts)?;
    let (labels, gap) = top_s_labels(&xhat, a.basis().labels(), opts.sparsity);
    Ok(SupportEstimate {
        labels,
        xhat,
        probes: opts.probes,
        gap,
        rip_delta,
        coefficient_bound_violations: violations,
        max_coefficient_magnitude: max_mag,
    })
}

/// Hilbert-Schmidt norm of a coefficient operator in the normalized trace
/// inner product, ‖α‖₂ = ‖α‖_F / 2^{n/2}. This is the quantity the Pauli-probe
/// estimator X̂_k targets; the 2^{n/2} factor is a global constant and does
/// not affect the ranking.
pub fn normalized_hs_norm(alpha: &CMat) -> f64 {
    let n = alpha.rows().trailing_zeros() as usize;
    alpha.frobenius_norm() / 2f64.powf(n as f64 / 2.0)
}

/// Exact identity check for the Hilbert-Schmidt estimator:
/// ‖α‖_F / 2^{n/2} equals √(mean over all 4^n Pauli words of |Tr[P α]|²),
/// since Σ_P |Tr[Pα]|² = 2^n ‖α‖_F².
pub fn hs_norm_estimator_check(alpha: &CMat) -> Result<(f64, f64)> {
    let n = alpha.rows().trailing_zeros() as usize;
    if n > 5 || !alpha.is_square() || alpha.rows() != 1 << n {
        return Err(Error::InvalidArgument(
            "exhaustive Pauli enumeration is limited to 5 qubits".into(),
        ));
    }
    let exact = normalized_hs_norm(alpha);
    let words = PauliWord::enumerate(n);
    let mean: f64 =
        words.iter().map(|w| w.trace_with(alpha).norm_sqr()).sum::<f64>() / words.len() as f64;
    Ok((exact, mean.sqrt()))
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CriterionSides {
    /// min_{k∈S} − max_{k∉S} separation actually present.
    pub margin: f64,
    /// Separation the guarantee demands (including the 2ε term).
    pub requirement: f64,
    pub satisfied: bool,
}

/// Both separability criteria, evaluated exhaustively over all 4^n Pauli
/// words (diagnostic / synthetic mode with known coefficients and
/// perturbations).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SeparabilityReport {
    pub worst_case: CriterionSides,
    pub flatness: CriterionSides,
    pub beta_coefficients: f64,
    pub beta_noise: f64,
    pub expected_sigma_s_sq: f64,
    pub eta: f64,
}

/// Flatness constant (1/√d)·‖v‖₂/‖v‖_∞ of a coefficient trajectory over the
/// Pauli basis; 1 for flat vectors, 1/√d for one-hot vectors, and 1 by
/// convention for the zero vector.
pub fn flatness_constant(values: &[f64]) -> f64 {
    let sup = values.iter().cloned().fold(0.0f64, f64::max);
    if sup == 0.0 {
        return 1.0;
    }
    let l2 = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    l2 / (sup * (values.len() as f64).sqrt())
}

pub fn separability_margin(
    alphas: &[CMat],
    gammas: &[CMat],
    s_indices: &[usize],
    epsilon: f64,
    d1: f64,
    d2: f64,
) -> Result<SeparabilityReport> {
    if alphas.is_empty() || alphas.len() != gammas.len() {
        return Err(Error::DimensionMismatch(
            "coefficients and perturbations must pair up".into(),
        ));
    }
    let dim = alphas[0].rows();
    let n = dim.trailing_zeros() as usize;
    if n > 4 {
        return Err(Error::InvalidArgument(
            "exhaustive separability evaluation is limited to 4 qubits".into(),
        ));
    }
    let total = alphas.len();
    let s = s_indices.len();
    if s == 0 || s >= total || s_indices.iter().any(|&i| i >= total) {
        return Err(Error::InvalidArgument("candidate support out of range".into()));
    }
    let words = PauliWord::enumerate(n);
    let d_paulis = words.len() as f64;

    // trajectories over the Pauli basis
    let traj: Vec<Vec<f64>> = alphas
        .iter()
        .map(|a| words.iter().map(|w| w.trace_with(a).norm()).collect())
        .collect();
    let noise_traj: Vec<Vec<f64>> = gammas
        .iter()
        .map(|g| words.iter().map(|w| w.trace_with(g).norm()).collect())
        .collect();

    // E[σ_s(c(P))₁²]: for each Pauli, the ℓ¹ tail outside the s largest
    let mut sigma_sq_acc = 0.0f64;
    for (pi, _) in words.iter().enumerate() {
        let mut column: Vec<f64> = traj.iter().map(|t| t[pi]).collect();
        column.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let tail: f64 = column[s.min(column.len())..].iter().sum();
        sigma_sq_acc += tail * tail;
    }
    let expected_sigma_s_sq = sigma_sq_acc / d_paulis;

    // η: the largest ℓ² noise magnitude over Pauli probes
    let mut eta = 0.0f64;
    for (pi, _) in words.iter().enumerate() {
        let v: f64 = noise_traj.iter().map(|t| t[pi] * t[pi]).sum::<f64>().sqrt();
        eta = eta.max(v);
    }

    let alpha_norms: Vec<f64> = alphas.iter().map(normalized_hs_norm).collect();
    let gamma_norms: Vec<f64> = gammas.iter().map(normalized_hs_norm).collect();
    let in_s = |i: &usize| s_indices.contains(i);
    let min_in = (0..total).filter(|i| in_s(i)).map(|i| alpha_norms[i]).fold(f64::INFINITY, f64::min);
    let max_out = (0..total).filter(|i| !in_s(i)).map(|i| alpha_norms[i]).fold(0.0f64, f64::max);

    let worst_margin = min_in - max_out;
    let worst_req =
        2.0 * epsilon + (2.0 * d1 / (s as f64).sqrt()) * expected_sigma_s_sq.sqrt() + 2.0 * d2 * eta;

    // flatness criterion
    let beta_c = (0..total)
        .filter(|i| !in_s(i))
        .map(|i| flatness_constant(&traj[i]))
        .fold(1.0f64, f64::min);
    let beta_n = (0..total)
        .filter(|i| !in_s(i))
        .map(|i| flatness_constant(&noise_traj[i]))
        .fold(1.0f64, f64::min);
    let min_in_shifted = (0..total)
        .filter(|i| in_s(i))
        .map(|i| alpha_norms[i] - gamma_norms[i])
        .fold(f64::INFINITY, f64::min);
    let max_out_noise = (0..total).filter(|i| !in_s(i)).map(|i| gamma_norms[i]).fold(0.0f64, f64::max);
    let flat_req = 2.0 * epsilon
        + (1.0 + 1.0 / beta_c) * max_out
        + (1.0 + 1.0 / beta_n) * max_out_noise;

    Ok(SeparabilityReport {
        worst_case: CriterionSides {
            margin: worst_margin,
            requirement: worst_req,
            satisfied: worst_margin >= worst_req,
        },
        flatness: CriterionSides {
            margin: min_in_shifted,
            requirement: flat_req,
            satisfied: min_in_shifted >= flat_req,
        },
        beta_coefficients: beta_c,
        beta_noise: beta_n,
        expected_sigma_s_sq,
        eta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisSystem;
    use rand::Rng;
    use crate::norms::ParametrizedOperator;
    use crate::pauli::PauliWord;
    use crate::qsim::DensityOperator;
    use crate::random::{random_hermitian, rng_from_seed};
    use crate::tomo::TomographicProcedure;

    #[test]
    fn probe_count_values() {
        // pinned arithmetic (D=16, δ=0.05, ε=0.3, κ=0.2)
        let expect = (640f64.ln() * 1.44 / (2.0 * 0.3f64.powi(4))).ceil() as usize;
        assert_eq!(probe_count(16, 0.05, 0.3, 0.2).unwrap(), expect);
        // ε⁴ law
        let a = probe_count_raw(16, 0.05, 0.3, 0.2);
        let b = probe_count_raw(16, 0.05, 0.15, 0.2);
        assert!((b / a - 16.0).abs() < 1e-9);
        // κ = 0 floor
        let z = probe_count_raw(16, 0.05, 0.3, 0.0);
        assert!((z - 640f64.ln() / (2.0 * 0.3f64.powi(4))).abs() < 1e-9);
    }

    #[test]
    fn coefficient_bound_cases() {
        assert!(coefficient_bound_check(1.0, 0.0));
        assert!(!coefficient_bound_check(1.5, 0.1));
        assert!(coefficient_bound_check(-1.05, 0.1));
    }

    #[test]
    fn hs_estimator_identity() {
        // single Pauli component: α = Z/2 → both routes give 1/2
        let alpha = PauliWord::parse("Z").unwrap().dense().scale_re(0.5);
        let (exact, sampled) = hs_norm_estimator_check(&alpha).unwrap();
        assert!((exact - 0.5).abs() < 1e-12);
        assert!((sampled - 0.5).abs() < 1e-12);
        assert!((exact - sampled).abs() < 1e-10);
        // zero operator
        let (e0, s0) = hs_norm_estimator_check(&CMat::zeros(4, 4)).unwrap();
        assert_eq!((e0, s0), (0.0, 0.0));
        // random Hermitian at n = 2
        let mut rng = rng_from_seed(80);
        let a = random_hermitian(4, &mut rng);
        let (e, s) = hs_norm_estimator_check(&a).unwrap();
        assert!((e - s).abs() < 1e-10);
    }

    /// Exactly sparse Fourier state over eigenstate superpositions; returns
    /// observations, measurement matrix and the exact expansion.
    fn sparse_instance(
        m: usize,
        rng: &mut impl Rng,
    ) -> (Vec<Estimate>, crate::basis::MeasurementMatrix, ParametrizedOperator) {
        use num_complex::Complex64;
        let h = crate::qsim::IntegerSpectrumHamiltonian::new(2, vec![0, 2, 2, 4]).unwrap();
        let amp = Complex64::new(0.5f64.sqrt(), 0.0);
        let psi = vec![amp, amp, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
        let rho0 = DensityOperator::pure(&psi).unwrap();
        // energies 0 and 2 populated → support {−2, 0, 2} inside Λ = {−4..4}
        let truth = crate::qsim::fourier_coefficients(&h, &rho0).unwrap();
        let basis = BasisSystem::fourier(4);
        let points = basis.sample_measure(m, rng).unwrap();
        let a = basis.measurement_matrix(&points).unwrap();
        let proc = TomographicProcedure::exact_oracle();
        let obs: Vec<Estimate> = points
            .iter()
            .map(|&t| proc.acquire(&h.evolve(&rho0, t).unwrap(), 0.5, 0.5, rng).unwrap())
            .collect();
        (obs, a, truth)
    }

    #[test]
    fn identifies_exact_sparse_support() {
        let mut rng = rng_from_seed(81);
        let (obs, a, _) = sparse_instance(40, &mut rng);
        let opts = SupportIdOptions::new(3, 60);
        let est = identify_support(&obs, &a, &opts, &mut rng).unwrap();
        assert_eq!(est.labels, vec![-2, 0, 2]);
        assert!(est.gap > 0.0);
        assert_eq!(est.coefficient_bound_violations, 0);
        assert!(est.rip_delta.is_some());
    }

    #[test]
    fn full_sparsity_returns_everything() {
        let mut rng = rng_from_seed(82);
        let (obs, a, _) = sparse_instance(40, &mut rng);
        let opts = SupportIdOptions::new(9, 10);
        let est = identify_support(&obs, &a, &opts, &mut rng).unwrap();
        assert_eq!(est.labels, a.basis().labels().to_vec());
        assert!(est.gap.is_infinite());
    }

    #[test]
    fn identity_state_puts_zero_in_support() {
        let mut rng = rng_from_seed(83);
        let basis = BasisSystem::fourier(2);
        let m = 25;
        let points = basis.sample_measure(m, &mut rng).unwrap();
        let a = basis.measurement_matrix(&points).unwrap();
        let mixed = DensityOperator::maximally_mixed(2);
        let obs: Vec<Estimate> =
            (0..m).map(|_| Estimate::Dense(mixed.matrix().clone())).collect();
        let opts = SupportIdOptions::new(1, 200);
        let est = identify_support(&obs, &a, &opts, &mut rng).unwrap();
        assert_eq!(est.labels, vec![0]);
    }

    #[test]
    fn estimator_consistency_under_exhaustive_enumeration() {
        let mut rng = rng_from_seed(84);
        let (obs, a, truth) = sparse_instance(40, &mut rng);
        let opts = SupportIdOptions::new(3, 0);
        let words = PauliWord::enumerate(2);
        let (xhat, violations, _max) =
            accumulate_xhat(&obs, &a, 3, &words, &opts).unwrap();
        assert_eq!(violations, 0);
        for (pos, &k) in a.basis().labels().iter().enumerate() {
            let alpha = truth.coefficient(k).unwrap();
            let expect = normalized_hs_norm(alpha);
            if expect > 1e-9 {
                assert!(
                    (xhat[pos] - expect).abs() < 1e-6,
                    "X̂ at k={k}: {} vs ‖α‖₂ = {expect}",
                    xhat[pos]
                );
            }
        }
    }

    #[test]
    fn strict_mode_requires_certificate() {
        let mut rng = rng_from_seed(85);
        // M too small: Δ_(3s) will not certify below 1/2
        let (obs, a, _) = sparse_instance(10, &mut rng);
        let opts = SupportIdOptions::new(3, 5).strict();
        assert!(matches!(
            identify_support(&obs, &a, &opts, &mut rng),
            Err(Error::GuaranteeFailed(_))
        ));
    }

    #[test]
    fn hoeffding_envelope_over_repetitions() {
        let mut rng = rng_from_seed(86);
        let (obs, a, _) = sparse_instance(40, &mut rng);
        let opts = SupportIdOptions::new(3, 0);
        // exact X from exhaustive enumeration
        let words = PauliWord::enumerate(2);
        let (x_exact, _, _) = accumulate_xhat(&obs, &a, 3, &words, &opts).unwrap();

        let epsilon = 0.35;
        let delta = 0.2;
        let l = probe_count(9, delta, epsilon, 0.1).unwrap();
        let reps = 50;
        let mut failures = 0;
        for _ in 0..reps {
            let ws: Vec<PauliWord> =
                (0..l).map(|_| uniform_pauli_word(2, &mut rng)).collect();
            let (xh, _, _) = accumulate_xhat(&obs, &a, 3, &ws, &opts).unwrap();
            let dev = xh
                .iter()
                .zip(x_exact.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            if dev > epsilon {
                failures += 1;
            }
        }
        let slack = 0.12; // binomial noise at 50 repetitions
        assert!(
            (failures as f64) / (reps as f64) <= delta + slack,
            "{failures}/{reps} exceeded ε"
        );
    }

    #[test]
    fn permutation_equivariance_of_ranking() {
        // relabeling amounts to permuting xhat; top-s follows the permutation
        let xhat = vec![0.1, 0.9, 0.3, 0.8];
        let labels = vec![-1i64, 0, 1, 2];
        let (s1, _) = top_s_labels(&xhat, &labels, 2);
        assert_eq!(s1, vec![0, 2]);
        let perm_x = vec![0.9, 0.1, 0.8, 0.3];
        let perm_l = vec![0i64, -1, 2, 1];
        let (s2, _) = top_s_labels(&perm_x, &perm_l, 2);
        assert_eq!(s2, vec![0, 2]);
    }

    #[test]
    fn flatness_constant_extremes() {
        // one-hot at d = 4 → 1/2
        assert!((flatness_constant(&[1.0, 0.0, 0.0, 0.0]) - 0.5).abs() < 1e-12);
        // flat → 1
        assert!((flatness_constant(&[0.7; 16]) - 1.0).abs() < 1e-12);
        assert_eq!(flatness_constant(&[0.0; 4]), 1.0);
    }

    #[test]
    fn separability_flat_adversary_example() {
        // |c_k(P)| = 1 on S, = x outside: flat trajectories where the
        // worst-case route demands O((D−s)x) and the flatness route O(x)
        let n = 2usize;
        let d = 4usize.pow(n as u32) as f64;
        let words = PauliWord::enumerate(n);
        let mut flat = CMat::zeros(4, 4);
        for w in &words {
            // Tr[P·flat] = 1 for every Pauli word P
            flat.add_assign_scaled(&w.dense(), num_complex::Complex64::new(0.25, 0.0));
        }
        let _ = d;
        // 8 coefficients, 3 in the support with |c| = 1, 5 outside with |c| = x
        let x = 0.05f64;
        let total = 8usize;
        let s_indices = [0usize, 1, 2];
        let alphas: Vec<CMat> = (0..total)
            .map(|i| if s_indices.contains(&i) { flat.clone() } else { flat.scale_re(x) })
            .collect();
        let gammas = vec![CMat::zeros(4, 4); total];
        let rep = separability_margin(&alphas, &gammas, &s_indices, 0.01, 1.0, 1.0).unwrap();
        // σ_s picks up all (D−s) outside entries
        let d_minus_s = (total - s_indices.len()) as f64;
        assert!((rep.expected_sigma_s_sq.sqrt() - d_minus_s * x).abs() < 1e-9);
        assert!((rep.beta_coefficients - 1.0).abs() < 1e-12, "flat outside coefficients");
        // flatness demands only ~2x beyond 2ε while the worst case demands
        // (2/√s)(D−s)x
        let flat_extra = rep.flatness.requirement - 0.02;
        let worst_extra = rep.worst_case.requirement - 0.02;
        assert!((flat_extra - 2.0 * x).abs() < 1e-9);
        assert!(
            (worst_extra - 2.0 / (3f64).sqrt() * d_minus_s * x).abs() < 1e-9,
            "worst-case requirement {worst_extra}"
        );
        assert!(worst_extra > flat_extra * 2.0);
    }

    #[test]
    fn separability_exact_sparse_reduction() {
        let mut rng = rng_from_seed(87);
        let mut alphas: Vec<CMat> = (0..5).map(|_| CMat::zeros(4, 4)).collect();
        alphas[1] = random_hermitian(4, &mut rng);
        alphas[3] = random_hermitian(4, &mut rng);
        let gammas = vec![CMat::zeros(4, 4); 5];
        let rep = separability_margin(&alphas, &gammas, &[1, 3], 0.05, 3.0, 6.0).unwrap();
        // γ = 0 and exact sparsity: σ_s term and η vanish
        assert!(rep.expected_sigma_s_sq < 1e-18);
        assert_eq!(rep.eta, 0.0);
        assert!((rep.worst_case.requirement - 0.1).abs() < 1e-12);
    }

}
