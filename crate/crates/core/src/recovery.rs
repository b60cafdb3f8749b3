//! Recovery of a parametrized quantum state from per-point tomographic
//! estimates at randomly sampled parameter values: the sparse pipeline (solve
//! α̂_S = A_S⁺ ρ̂), the full-support variant, their sample-count formulas and
//! the error-budget bookkeeping, plus the support calculators for
//! sub-Gaussian Fourier spectra and Chebyshev frequency tails.

use crate::basis::{BasisSystem, MeasurementMatrix};
use crate::error::{Error, Result};
use crate::linalg::{pseudo_inverse, svd, CMat, C_ZERO};
use crate::norms::{ParametrizedOperator, PNorm};
use crate::qsim::{FermionicGaussianHamiltonian, DENSE_QUBIT_LIMIT};
use crate::tomo::{Estimate, ShadowData, ShadowHistogram};
use crate::pauli::PauliWord;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Constants in the sparse sample-count formula; the analysis guarantees the
/// stated failure probability whenever the constants do not exceed these
/// values.
pub const SPARSE_RECOVERY_C1: f64 = 103_140.0;
pub const SPARSE_RECOVERY_C2: f64 = 2_736.0;
/// Constant in the full-recovery sample count (⌈32/3⌉ from the proof).
pub const FULL_RECOVERY_C: f64 = 11.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormulaVariant {
    /// M = (sK²/Δ²)(C₁ ln(300 s) ln(4D) + C₂ ln(2/δ))
    Corollary,
    /// M = (sK²/Δ²)(C₁ ln²(300 s) ln(4D) + C₂ ln(2/δ))
    Algorithm1,
}

/// Sparse-recovery sample count for the chosen formula variant.
pub fn sample_count_sparse(
    s: usize,
    d: usize,
    k_bound: f64,
    attenuation: f64,
    delta: f64,
    variant: FormulaVariant,
) -> Result<usize> {
    if s == 0 || s > d {
        return Err(Error::InvalidArgument(format!("sparsity {s} out of range for D = {d}")));
    }
    if !(attenuation > 0.0 && attenuation <= 1.0) {
        return Err(Error::InvalidArgument("attenuation must lie in (0, 1]".into()));
    }
    let log_s = (300.0 * s as f64).ln();
    let log_term = match variant {
        FormulaVariant::Corollary => log_s,
        FormulaVariant::Algorithm1 => log_s * log_s,
    };
    let base = s as f64 * k_bound * k_bound / (attenuation * attenuation);
    let m = base
        * (SPARSE_RECOVERY_C1 * log_term * (4.0 * d as f64).ln()
            + SPARSE_RECOVERY_C2 * (2.0 / delta).ln());
    Ok(m.ceil() as usize)
}

/// Full-recovery sample count M = ⌈C D K² ln(2D/δ)⌉.
pub fn sample_count_full(d: usize, k_bound: f64, delta: f64) -> Result<usize> {
    if d == 0 {
        return Err(Error::InvalidArgument("D must be at least 1".into()));
    }
    let m = FULL_RECOVERY_C * d as f64 * k_bound * k_bound * (2.0 * d as f64 / delta).ln();
    Ok(m.ceil() as usize)
}

/// ℓ^p norm of the per-point tolerance vector; bounds the aggregated
/// observation deviation ⦀η⦀_{𝒪,p}.
pub fn deviation_bound(epsilons: &[f64], p: PNorm) -> Result<f64> {
    if epsilons.is_empty() {
        return Err(Error::InvalidArgument("empty tolerance vector".into()));
    }
    Ok(match p {
        PNorm::One => epsilons.iter().sum(),
        PNorm::Two => epsilons.iter().map(|e| e * e).sum::<f64>().sqrt(),
        PNorm::Infinity => epsilons.iter().cloned().fold(0.0, f64::max),
    })
}

/// Everything the recovery run is determined by (together with the RNG seed
/// used for sampling and acquisition).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecoveryPlan {
    pub basis: BasisSystem,
    /// Candidate support S (the full label set for full recovery).
    pub support: Vec<i64>,
    /// Spillover attenuation Δ ∈ (0, 1].
    pub attenuation: f64,
    pub epsilon: f64,
    pub delta: f64,
    /// Number of sampled parameter points M.
    pub sample_count: usize,
    pub variant: FormulaVariant,
    /// Assumed sparsity defects of the target on this support (zero for
    /// exactly sparse targets); they enter the reported error budget.
    pub gamma_l1: f64,
    pub gamma_l2: f64,
}

impl RecoveryPlan {
    fn validate(basis: &BasisSystem, support: &[i64]) -> Result<()> {
        if support.is_empty() {
            return Err(Error::InvalidArgument("empty support".into()));
        }
        if !support.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument("support labels must be unique and sorted".into()));
        }
        for &k in support {
            if !basis.contains_label(k) {
                return Err(Error::UnknownLabel(k));
            }
        }
        Ok(())
    }

    /// Plan with M from the sparse sample-count formula.
    pub fn theorem_sparse(
        basis: BasisSystem,
        support: Vec<i64>,
        attenuation: f64,
        epsilon: f64,
        delta: f64,
        variant: FormulaVariant,
    ) -> Result<Self> {
        Self::validate(&basis, &support)?;
        let m = sample_count_sparse(
            support.len(),
            basis.dimension(),
            basis.bound(),
            attenuation,
            delta,
            variant,
        )?;
        Ok(RecoveryPlan {
            basis,
            support,
            attenuation,
            epsilon,
            delta,
            sample_count: m,
            variant,
            gamma_l1: 0.0,
            gamma_l2: 0.0,
        })
    }

    /// Full-support plan with M from the full-recovery formula.
    pub fn theorem_full(basis: BasisSystem, epsilon: f64, delta: f64) -> Result<Self> {
        let m = sample_count_full(basis.dimension(), basis.bound(), delta)?;
        let support = basis.labels().to_vec();
        Ok(RecoveryPlan {
            basis,
            support,
            attenuation: 1.0,
            epsilon,
            delta,
            sample_count: m,
            variant: FormulaVariant::Corollary,
            gamma_l1: 0.0,
            gamma_l2: 0.0,
        })
    }

    /// Plan with a caller-chosen M (empirical mode); injectivity and RIP are
    /// then certified numerically rather than by the formula.
    pub fn empirical(
        basis: BasisSystem,
        support: Vec<i64>,
        attenuation: f64,
        epsilon: f64,
        delta: f64,
        sample_count: usize,
    ) -> Result<Self> {
        Self::validate(&basis, &support)?;
        if sample_count == 0 {
            return Err(Error::InvalidArgument("sample count must be at least 1".into()));
        }
        if !(attenuation > 0.0 && attenuation <= 1.0) {
            return Err(Error::InvalidArgument("attenuation must lie in (0, 1]".into()));
        }
        Ok(RecoveryPlan {
            basis,
            support,
            attenuation,
            epsilon,
            delta,
            sample_count,
            variant: FormulaVariant::Algorithm1,
            gamma_l1: 0.0,
            gamma_l2: 0.0,
        })
    }

    pub fn with_sparsity_defects(mut self, gamma_l1: f64, gamma_l2: f64) -> Self {
        self.gamma_l1 = gamma_l1;
        self.gamma_l2 = gamma_l2;
        self
    }

    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    pub fn is_full_support(&self) -> bool {
        self.support.len() == self.basis.dimension()
    }

    /// Per-point tomography tolerance ε' = ε/√6.
    pub fn per_point_epsilon(&self) -> f64 {
        self.epsilon / 6f64.sqrt()
    }

    /// Per-point failure probability δ' = δ/(2M).
    pub fn per_point_delta(&self) -> f64 {
        self.delta / (2.0 * self.sample_count as f64)
    }
}

/// γ_{ℓ²} + Δ·γ_{ℓ¹} + ε, componentwise.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub gamma_l2: f64,
    pub spillover: f64,
    pub epsilon: f64,
}

impl ErrorBudget {
    pub fn total(&self) -> f64 {
        self.gamma_l2 + self.spillover + self.epsilon
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Extreme singular values of A_S (unnormalized).
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// ‖I − (A_S/√M)†(A_S/√M)‖_∞: the restricted-isometry deviation on the
    /// chosen support itself.
    pub support_gram_deviation: f64,
    /// Aggregate Frobenius residual √(Σ_i ‖(A α̂)_i − ρ̂_i‖²); dense
    /// observations only.
    pub residual: Option<f64>,
}

/// Shadow-backed coefficient estimates: α̂_k = Σ_i w_{k,i} ρ̂(x_i) is kept as
/// the weight matrix w = A_S⁺ over the per-point snapshot collections;
/// densification is explicit.
#[derive(Clone, Debug)]
pub struct ShadowCoefficients {
    basis: BasisSystem,
    support: Vec<i64>,
    weights: CMat, // s × M
    data: Vec<ShadowData>,
    histograms: Vec<ShadowHistogram>,
}

impl ShadowCoefficients {
    pub fn basis(&self) -> &BasisSystem {
        &self.basis
    }

    pub fn support(&self) -> &[i64] {
        &self.support
    }

    pub fn weights(&self) -> &CMat {
        &self.weights
    }

    pub fn point_data(&self) -> &[ShadowData] {
        &self.data
    }

    pub fn point_histograms(&self) -> &[ShadowHistogram] {
        &self.histograms
    }

    pub fn n_qubits(&self) -> usize {
        self.data[0].n_qubits()
    }

    /// Tr[P α̂_k] for every k ∈ S, evaluated through the per-point shadow
    /// means.
    pub fn coefficient_pauli_traces(&self, word: &PauliWord) -> Vec<Complex64> {
        let means: Vec<f64> = self.histograms.iter().map(|h| h.expectation(word)).collect();
        (0..self.support.len())
            .map(|k| {
                let mut acc = C_ZERO;
                for (i, &m) in means.iter().enumerate() {
                    acc += self.weights[(k, i)] * m;
                }
                acc
            })
            .collect()
    }

    /// Dense matrix for a single coefficient.
    pub fn densify_coefficient(&self, index: usize) -> Result<CMat> {
        let n = self.n_qubits();
        if n > DENSE_QUBIT_LIMIT {
            return Err(Error::DenseLimit { requested: n, limit: DENSE_QUBIT_LIMIT });
        }
        let dim = 1usize << n;
        let mut acc = CMat::zeros(dim, dim);
        for (i, hist) in self.histograms.iter().enumerate() {
            acc.add_assign_scaled(&hist.mean_snapshot_matrix(), self.weights[(index, i)]);
        }
        Ok(acc)
    }

    /// Densify every coefficient into an explicit expansion.
    pub fn densify(&self) -> Result<ParametrizedOperator> {
        let mats: Result<Vec<CMat>> =
            (0..self.support.len()).map(|k| self.densify_coefficient(k)).collect();
        ParametrizedOperator::new(self.basis.clone(), self.support.clone(), mats?)
    }
}

/// Reconstructed coefficients in the representation inherited from the
/// tomographic procedure.
#[derive(Clone, Debug)]
pub enum CoefficientEstimates {
    Dense(ParametrizedOperator),
    Shadow(ShadowCoefficients),
}

impl CoefficientEstimates {
    pub fn dense(&self) -> Option<&ParametrizedOperator> {
        match self {
            CoefficientEstimates::Dense(p) => Some(p),
            CoefficientEstimates::Shadow(_) => None,
        }
    }

    pub fn shadow(&self) -> Option<&ShadowCoefficients> {
        match self {
            CoefficientEstimates::Shadow(s) => Some(s),
            CoefficientEstimates::Dense(_) => None,
        }
    }

    pub fn support(&self) -> &[i64] {
        match self {
            CoefficientEstimates::Dense(p) => p.support(),
            CoefficientEstimates::Shadow(s) => s.support(),
        }
    }

    pub fn basis(&self) -> &BasisSystem {
        match self {
            CoefficientEstimates::Dense(p) => p.basis(),
            CoefficientEstimates::Shadow(s) => s.basis(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RecoveryReport {
    pub plan: RecoveryPlan,
    pub coefficients: CoefficientEstimates,
    pub error_budget: ErrorBudget,
    pub diagnostics: Diagnostics,
    /// A_S⁺ (s × M), the prediction weights' backbone.
    pub pseudo_inverse: CMat,
    /// The sampled parameter points, echoing the measurement matrix.
    pub sample_points: Vec<f64>,
    /// Dense per-point observations (kept for prediction); None on the
    /// shadow path, where the snapshot collections live in the coefficients.
    pub dense_observations: Option<Vec<CMat>>,
}

/// Sparse recovery: α̂_S = A_S⁺ ρ̂ with the observations as an operator
/// vector. Dense observations produce dense coefficients; shadow
/// observations stay in snapshot form behind the weight matrix.
pub fn recover_sparse(
    plan: &RecoveryPlan,
    observations: Vec<Estimate>,
    a: &MeasurementMatrix,
) -> Result<RecoveryReport> {
    if observations.len() != plan.sample_count {
        return Err(Error::DimensionMismatch(format!(
            "{} observations for a plan with M = {}",
            observations.len(),
            plan.sample_count
        )));
    }
    if a.n_points() != observations.len() {
        return Err(Error::DimensionMismatch(
            "measurement matrix rows differ from observation count".into(),
        ));
    }
    if a.basis() != &plan.basis {
        return Err(Error::InvalidArgument(
            "measurement matrix was built from a different basis".into(),
        ));
    }
    let a_s = a.restrict(&plan.support)?;
    if a_s.rows() < a_s.cols() {
        // underdetermined: the support cannot be resolved from M points
        return Err(Error::SingularSupportMatrix { sigma_min: 0.0 });
    }
    let decomp = svd(&a_s);
    let sigma_max = decomp.sigma[0];
    let sigma_min = *decomp.sigma.last().unwrap();
    let pinv = pseudo_inverse(&a_s).map_err(|e| match e {
        Error::RankDeficient { sigma_min, .. } => Error::SingularSupportMatrix { sigma_min },
        other => other,
    })?;

    let m = observations.len() as f64;
    let gram_dev = {
        let normalized = a_s.scale_re(1.0 / m.sqrt());
        let gram = normalized.dagger().matmul(&normalized);
        crate::linalg::spectral_norm(&(&gram - &CMat::identity(plan.sparsity())))
    };

    let all_dense = observations.iter().all(|o| o.is_dense());
    let all_shadow = observations.iter().all(|o| !o.is_dense());
    if !all_dense && !all_shadow {
        return Err(Error::InvalidArgument(
            "observations mix dense and shadow representations".into(),
        ));
    }

    let budget = ErrorBudget {
        gamma_l2: plan.gamma_l2,
        spillover: plan.attenuation * plan.gamma_l1,
        epsilon: plan.epsilon,
    };

    if all_dense {
        let mats: Vec<&CMat> = observations.iter().map(|o| o.dense_matrix().unwrap()).collect();
        let dim = mats[0].rows();
        if mats.iter().any(|mm| mm.rows() != dim || !mm.is_square()) {
            return Err(Error::DimensionMismatch("observation dimensions differ".into()));
        }
        let coeffs: Vec<CMat> = (0..plan.sparsity())
            .map(|k| {
                let mut acc = CMat::zeros(dim, dim);
                for (i, mat) in mats.iter().enumerate() {
                    acc.add_assign_scaled(mat, pinv[(k, i)]);
                }
                acc
            })
            .collect();
        // aggregate residual of the overdetermined solve
        let mut residual_sq = 0.0f64;
        for (i, mat) in mats.iter().enumerate() {
            let mut fit = CMat::zeros(dim, dim);
            for (k, c) in coeffs.iter().enumerate() {
                fit.add_assign_scaled(c, a_s[(i, k)]);
            }
            residual_sq += (&fit - *mat).frobenius_norm().powi(2);
        }
        let expansion =
            ParametrizedOperator::new(plan.basis.clone(), plan.support.clone(), coeffs)?;
        let kept: Vec<CMat> = mats.into_iter().cloned().collect();
        Ok(RecoveryReport {
            plan: plan.clone(),
            coefficients: CoefficientEstimates::Dense(expansion),
            error_budget: budget,
            diagnostics: Diagnostics {
                sigma_min,
                sigma_max,
                support_gram_deviation: gram_dev,
                residual: Some(residual_sq.sqrt()),
            },
            pseudo_inverse: pinv,
            sample_points: a.sample_points().to_vec(),
            dense_observations: Some(kept),
        })
    } else {
        let mut data = Vec::with_capacity(observations.len());
        for o in observations {
            match o {
                Estimate::Shadows(d) => data.push(d),
                Estimate::Dense(_) => unreachable!(),
            }
        }
        let n = data[0].n_qubits();
        if data.iter().any(|d| d.n_qubits() != n) {
            return Err(Error::DimensionMismatch("snapshot widths differ".into()));
        }
        let histograms = data.iter().map(|d| d.histogram()).collect();
        let shadow = ShadowCoefficients {
            basis: plan.basis.clone(),
            support: plan.support.clone(),
            weights: pinv.clone(),
            data,
            histograms,
        };
        Ok(RecoveryReport {
            plan: plan.clone(),
            coefficients: CoefficientEstimates::Shadow(shadow),
            error_budget: budget,
            diagnostics: Diagnostics {
                sigma_min,
                sigma_max,
                support_gram_deviation: gram_dev,
                residual: None,
            },
            pseudo_inverse: pinv,
            sample_points: a.sample_points().to_vec(),
            dense_observations: None,
        })
    }
}

/// Full recovery: the sparse pipeline on the entire label set, where the
/// sparsity defects vanish by construction and the budget is ε alone.
pub fn recover_full(
    plan: &RecoveryPlan,
    observations: Vec<Estimate>,
    a: &MeasurementMatrix,
) -> Result<RecoveryReport> {
    if !plan.is_full_support() {
        return Err(Error::InvalidArgument(
            "full recovery requires the support to be the whole label set".into(),
        ));
    }
    let mut plan = plan.clone();
    plan.gamma_l1 = 0.0;
    plan.gamma_l2 = 0.0;
    recover_sparse(&plan, observations, a)
}

/// Result of the sub-Gaussian support-radius bound.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SupportRadius {
    pub radius: i64,
    /// Set when γ is too large relative to the prefactor, making the bound
    /// vacuous; the minimum radius 2 is returned.
    pub vacuous: bool,
}

/// Smallest integer R ≥ 1 + √(8σ² ln(2^{n/2+4} τ π σ² / γ)) (and at least 2),
/// so that the support S = {−R, …, R} has tail defect γ_{ℓ¹} ≤ γ for a state
/// with a (τ, σ, e₀) sub-Gaussian energy profile.
pub fn subgaussian_support_radius(
    n_qubits: usize,
    sigma: f64,
    tau: f64,
    gamma: f64,
) -> Result<SupportRadius> {
    if sigma <= 0.0 || tau <= 0.0 || gamma <= 0.0 {
        return Err(Error::InvalidArgument("sigma, tau and gamma must be positive".into()));
    }
    let prefactor = 2f64.powf(n_qubits as f64 / 2.0 + 4.0) * tau * std::f64::consts::PI * sigma * sigma;
    if gamma >= prefactor {
        return Ok(SupportRadius { radius: 2, vacuous: true });
    }
    let r = 1.0 + (8.0 * sigma * sigma * (prefactor / gamma).ln()).sqrt();
    Ok(SupportRadius { radius: (r.ceil() as i64).max(2), vacuous: false })
}

/// Chebyshev truncation order for a fermionic Gaussian evolution over
/// t ∈ [−T, T], combining the Bessel-decay onset ⌈e ω_max T⌉ with the tail
/// requirement ⌈2n + 1/2 + log₂(1/γ)⌉, plus one guard order.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ChebyshevCutoff {
    /// Largest retained polynomial order R; the basis dimension is R + 1.
    pub cutoff: usize,
    /// Exact maximal evolution frequency 2‖H‖_∞ over the unit horizon.
    pub omega_max: f64,
    /// Interaction-strength bound on omega_max: 4n²J under the {γ,γ} = 2δ
    /// Majorana normalization used here (twice the bound stated for the
    /// {γ,γ} = δ convention).
    pub omega_strength_bound: f64,
    pub frequency_term: usize,
    pub tail_term: usize,
}

pub fn chebyshev_support_cutoff(
    hf: &FermionicGaussianHamiltonian,
    gamma: f64,
    horizon: f64,
) -> Result<ChebyshevCutoff> {
    if gamma <= 0.0 || horizon <= 0.0 {
        return Err(Error::InvalidArgument("gamma and horizon must be positive".into()));
    }
    let omega_max = hf.max_frequency();
    let n = hf.n_modes() as f64;
    let j = hf.interaction_strength();
    let frequency_term = (std::f64::consts::E * omega_max * horizon).ceil() as usize;
    let tail_term = (2.0 * n + 0.5 + (1.0 / gamma).log2()).ceil() as usize;
    Ok(ChebyshevCutoff {
        cutoff: frequency_term.max(tail_term) + 1,
        omega_max,
        omega_strength_bound: 4.0 * n * n * j,
        frequency_term,
        tail_term,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::trace_norm;
    use crate::qsim::{
        chebyshev_coefficients, fourier_coefficients, jordan_wigner, prepare_subgaussian_state,
        DensityOperator, IntegerSpectrumHamiltonian,
    };
    use crate::random::{random_density_matrix, rng_from_seed};
    use crate::tomo::TomographicProcedure;

    #[test]
    fn sample_count_pinned_values() {
        // (s=3, D=64, K=1, Δ=0.5, δ=0.01, corollary)
        let expect = (12.0 * (SPARSE_RECOVERY_C1 * 900f64.ln() * 256f64.ln()
            + SPARSE_RECOVERY_C2 * 200f64.ln()))
        .ceil() as usize;
        assert_eq!(
            sample_count_sparse(3, 64, 1.0, 0.5, 0.01, FormulaVariant::Corollary).unwrap(),
            expect
        );
        // algorithm-1 variant squares the ln(300 s) factor
        let expect_sq = (12.0
            * (SPARSE_RECOVERY_C1 * 900f64.ln() * 900f64.ln() * 256f64.ln()
                + SPARSE_RECOVERY_C2 * 200f64.ln()))
        .ceil() as usize;
        assert_eq!(
            sample_count_sparse(3, 64, 1.0, 0.5, 0.01, FormulaVariant::Algorithm1).unwrap(),
            expect_sq
        );
        // (D=8, K=1, δ=0.05) → ⌈88 ln 320⌉ = 508
        assert_eq!(sample_count_full(8, 1.0, 0.05).unwrap(), 508);
    }

    #[test]
    fn sample_count_structure() {
        // s = D, Δ = 1: both variants grow ~ D log D
        let a = sample_count_sparse(16, 16, 1.0, 1.0, 0.1, FormulaVariant::Corollary).unwrap();
        let b = sample_count_sparse(32, 32, 1.0, 1.0, 0.1, FormulaVariant::Corollary).unwrap();
        assert!(b > 2 * a - a / 2);
        // halving δ adds ~ 11 D K² ln 2
        let m1 = sample_count_full(8, 1.0, 0.05).unwrap();
        let m2 = sample_count_full(8, 1.0, 0.025).unwrap();
        let add = (11.0 * 8.0 * 2f64.ln()).ceil() as i64;
        assert!(((m2 - m1) as i64 - add).abs() <= 1);
    }

    #[test]
    fn deviation_bound_examples() {
        let v = deviation_bound(&[0.1; 9], PNorm::Two).unwrap();
        assert!((v - 3.0 * 0.1).abs() < 1e-15);
        assert_eq!(deviation_bound(&[0.1, 0.5, 0.3], PNorm::Infinity).unwrap(), 0.5);
        let m = deviation_bound(&[0.1, 0.2], PNorm::Two).unwrap();
        assert!((m - 0.05f64.sqrt()).abs() < 1e-15);
        assert!(deviation_bound(&[], PNorm::Two).is_err());
    }

    #[test]
    fn per_point_parameters_are_exact() {
        let basis = BasisSystem::fourier(2);
        let plan =
            RecoveryPlan::empirical(basis.clone(), basis.labels().to_vec(), 0.5, 0.3, 0.1, 40)
                .unwrap();
        assert_eq!(plan.per_point_epsilon(), 0.3 / 6f64.sqrt());
        assert_eq!(plan.per_point_delta(), 0.1 / 80.0);
    }

    #[test]
    fn exact_recovery_matches_oracle_coefficients() {
        let mut rng = rng_from_seed(70);
        let h = IntegerSpectrumHamiltonian::new(2, vec![0, 1, 1, 2]).unwrap();
        let rho0 = DensityOperator::plus_all(2);
        let truth = fourier_coefficients(&h, &rho0).unwrap();

        let basis = BasisSystem::fourier(h.e_max() as u32);
        let plan = RecoveryPlan::empirical(
            basis.clone(),
            basis.labels().to_vec(),
            1.0,
            1e-9,
            0.1,
            24,
        )
        .unwrap();
        let points = basis.sample_measure(plan.sample_count, &mut rng).unwrap();
        let a = basis.measurement_matrix(&points).unwrap();
        let proc = TomographicProcedure::exact_oracle();
        let obs: Vec<Estimate> = points
            .iter()
            .map(|&t| proc.acquire(&h.evolve(&rho0, t).unwrap(), 0.5, 0.5, &mut rng).unwrap())
            .collect();
        let report = recover_full(&plan, obs, &a).unwrap();
        let dense = report.coefficients.dense().unwrap();
        for (&k, c) in dense.support().iter().zip(dense.coefficients()) {
            let exact = truth.coefficient(k).unwrap();
            assert!(
                (c - exact).frobenius_norm() < 1e-9,
                "coefficient {k} off by {}",
                (c - exact).frobenius_norm()
            );
        }
        assert!(report.error_budget.total() < 1e-8);
        assert!(report.diagnostics.residual.unwrap() < 1e-9);
    }

    #[test]
    fn constant_state_single_coefficient() {
        let mut rng = rng_from_seed(71);
        let sigma = random_density_matrix(4, &mut rng);
        let basis = BasisSystem::fourier(0);
        let plan =
            RecoveryPlan::empirical(basis.clone(), vec![0], 1.0, 1e-9, 0.1, 5).unwrap();
        let points = basis.sample_measure(5, &mut rng).unwrap();
        let a = basis.measurement_matrix(&points).unwrap();
        let obs: Vec<Estimate> = (0..5).map(|_| Estimate::Dense(sigma.clone())).collect();
        let report = recover_sparse(&plan, obs, &a).unwrap();
        let dense = report.coefficients.dense().unwrap();
        assert!((dense.coefficient(0).unwrap() - &sigma).frobenius_norm() < 1e-10);
    }

    #[test]
    fn recovery_is_linear_in_observations() {
        let mut rng = rng_from_seed(72);
        let basis = BasisSystem::fourier(1);
        let plan = RecoveryPlan::empirical(
            basis.clone(),
            basis.labels().to_vec(),
            1.0,
            1e-9,
            0.1,
            9,
        )
        .unwrap();
        let points = basis.sample_measure(9, &mut rng).unwrap();
        let a = basis.measurement_matrix(&points).unwrap();
        let mats: Vec<CMat> = (0..9).map(|_| random_density_matrix(2, &mut rng)).collect();
        let obs1: Vec<Estimate> = mats.iter().map(|m| Estimate::Dense(m.clone())).collect();
        let obs2: Vec<Estimate> =
            mats.iter().map(|m| Estimate::Dense(m.scale_re(2.0))).collect();
        let r1 = recover_sparse(&plan, obs1, &a).unwrap();
        let r2 = recover_sparse(&plan, obs2, &a).unwrap();
        let d1 = r1.coefficients.dense().unwrap();
        let d2 = r2.coefficients.dense().unwrap();
        for (c1, c2) in d1.coefficients().iter().zip(d2.coefficients()) {
            assert!((&c1.scale_re(2.0) - c2).frobenius_norm() < 1e-10);
        }
    }

    #[test]
    fn singular_support_matrix_is_reported() {
        let basis = BasisSystem::fourier(2);
        // one sample point cannot resolve five coefficients
        let a = basis.measurement_matrix(&[1.0]).unwrap();
        let plan =
            RecoveryPlan::empirical(basis.clone(), basis.labels().to_vec(), 1.0, 0.1, 0.1, 1)
                .unwrap();
        let obs = vec![Estimate::Dense(CMat::identity(2).scale_re(0.5))];
        match recover_sparse(&plan, obs, &a) {
            Err(Error::SingularSupportMatrix { .. }) => {}
            other => panic!("expected singular support matrix, got {other:?}"),
        }
    }

    #[test]
    fn subgaussian_radius_values() {
        // boundary: γ at the prefactor value → vacuous flag, minimum radius
        let pref = 2f64.powf(3.0 / 2.0 + 4.0) * std::f64::consts::PI;
        let r = subgaussian_support_radius(3, 1.0, 1.0, pref * 1.001).unwrap();
        assert!(r.vacuous);
        assert_eq!(r.radius, 2);
        // pinned arithmetic: (n=3, σ=1, τ=1, γ=1e−3)
        let r = subgaussian_support_radius(3, 1.0, 1.0, 1e-3).unwrap();
        let expect = (1.0
            + (8.0 * (2f64.powf(5.5) * std::f64::consts::PI * 1e3).ln()).sqrt())
        .ceil() as i64;
        assert_eq!(r.radius, expect);
        assert_eq!(r.radius, 11);
        assert!(!r.vacuous);
    }

    #[test]
    fn subgaussian_radius_controls_exact_tail() {
        let mut rng = rng_from_seed(73);
        for trial in 0..5 {
            let h = IntegerSpectrumHamiltonian::random(3, 14, &mut rng).unwrap();
            let e0 = 7.0;
            let sigma = 0.8 + 0.1 * trial as f64;
            let (rho0, tau) = prepare_subgaussian_state(&h, e0, sigma, &mut rng).unwrap();
            let gamma = 1e-2;
            let r = subgaussian_support_radius(3, sigma, tau, gamma).unwrap();
            let coeffs = fourier_coefficients(&h, &rho0).unwrap();
            let mut tail = 0.0;
            for (&k, c) in coeffs.support().iter().zip(coeffs.coefficients()) {
                if k.abs() > r.radius {
                    tail += trace_norm(c);
                }
            }
            assert!(tail <= gamma, "tail {tail} exceeds γ = {gamma} at R = {}", r.radius);
        }
    }

    #[test]
    fn chebyshev_cutoff_terms() {
        let hf = FermionicGaussianHamiltonian::normal_form(&[0.5, 0.25]);
        let c1 = chebyshev_support_cutoff(&hf, 1e-3, 1.0).unwrap();
        // doubling the horizon doubles the frequency term
        let c2 = chebyshev_support_cutoff(&hf, 1e-3, 2.0).unwrap();
        assert_eq!(
            c2.frequency_term,
            (std::f64::consts::E * c1.omega_max * 2.0).ceil() as usize
        );
        // γ at the 2^{-2n-1/2} boundary: tail term = ⌈4n + 1⌉
        let gamma_boundary = 2f64.powf(-(2.0 * 2.0 + 0.5));
        let c3 = chebyshev_support_cutoff(&hf, gamma_boundary, 1.0).unwrap();
        assert_eq!(c3.tail_term, 9);
        // ω_max here: λ = (1.0, 0.5) → ‖H‖ = 1.5, ω = 3
        assert!((c1.omega_max - 3.0).abs() < 1e-12);
    }

    #[test]
    fn chebyshev_cutoff_controls_exact_tail() {
        let mut rng = rng_from_seed(74);
        let hf = crate::qsim::FermionicGaussianHamiltonian::random(2, 1.0, &mut rng);
        let h = jordan_wigner(&hf).unwrap();
        let rho0 =
            DensityOperator::from_matrix(random_density_matrix(4, &mut rng)).unwrap();
        let gamma = 1e-3;
        let cut = chebyshev_support_cutoff(&hf, gamma, 1.0).unwrap();
        // exact coefficients well beyond the cutoff
        let extended = chebyshev_coefficients(&h, &rho0, cut.cutoff + 60).unwrap();
        let tail: f64 = extended
            .support()
            .iter()
            .zip(extended.coefficients())
            .filter(|(&k, _)| k > cut.cutoff as i64)
            .map(|(_, c)| trace_norm(c))
            .sum();
        assert!(tail <= gamma, "tail {tail} exceeds γ = {gamma} at R = {}", cut.cutoff);
    }

    #[test]
    fn shadow_observations_stay_lazy_and_densify_consistently() {
        let mut rng = rng_from_seed(75);
        let h = IntegerSpectrumHamiltonian::new(2, vec![0, 1, 1, 2]).unwrap();
        let rho0 = DensityOperator::plus_all(2);
        let basis = BasisSystem::fourier(2);
        let m = 30usize;
        let plan =
            RecoveryPlan::empirical(basis.clone(), basis.labels().to_vec(), 1.0, 0.5, 0.2, m)
                .unwrap();
        let points = basis.sample_measure(m, &mut rng).unwrap();
        let a = basis.measurement_matrix(&points).unwrap();
        let proc = TomographicProcedure::local_shadows(2, crate::tomo::ShotPolicy::Fixed(4000));
        let obs: Vec<Estimate> = points
            .iter()
            .map(|&t| proc.acquire(&h.evolve(&rho0, t).unwrap(), 0.3, 0.1, &mut rng).unwrap())
            .collect();
        let report = recover_sparse(&plan, obs, &a).unwrap();
        let shadow = report.coefficients.shadow().expect("shadow observations stay lazy");

        // route agreement: Pauli traces through snapshots match the densified
        // coefficients exactly
        let word = PauliWord::parse("ZI").unwrap();
        let lazy = shadow.coefficient_pauli_traces(&word);
        let dense = shadow.densify().unwrap();
        for (i, c) in dense.coefficients().iter().enumerate() {
            let direct = word.trace_with(c);
            assert!((lazy[i] - direct).norm() < 1e-10);
        }

        // and the densified coefficients are close to the exact ones
        let truth = fourier_coefficients(&h, &rho0).unwrap();
        for (&k, c) in dense.support().iter().zip(dense.coefficients()) {
            let err = (c - truth.coefficient(k).unwrap()).frobenius_norm();
            assert!(err < 0.5, "coefficient {k} error {err}");
        }
    }

    #[test]
    fn shadow_full_recovery_trajectory_statistics() {
        // Z⊗Z trajectory stays within ε on at least 95% of grid points,
        // aggregated over seeded repetitions
        let h = IntegerSpectrumHamiltonian::new(2, vec![0, 1, 1, 2]).unwrap();
        let rho0 = DensityOperator::plus_all(2);
        let basis = BasisSystem::fourier(2);
        let epsilon = 0.25;
        let m = 60usize;
        let word = PauliWord::parse("ZZ").unwrap();
        let mut within = 0usize;
        let mut total = 0usize;
        for rep in 0..6u64 {
            let mut rng = rng_from_seed(760 + rep);
            let plan = RecoveryPlan::empirical(
                basis.clone(),
                basis.labels().to_vec(),
                1.0,
                epsilon,
                0.1,
                m,
            )
            .unwrap();
            let points = basis.sample_measure(m, &mut rng).unwrap();
            let a = basis.measurement_matrix(&points).unwrap();
            let proc = TomographicProcedure::local_shadows(
                2,
                crate::tomo::ShotPolicy::Fixed(3000),
            );
            let (ep, dp) = (plan.per_point_epsilon(), plan.per_point_delta());
            let obs: Vec<Estimate> = points
                .iter()
                .map(|&t| {
                    proc.acquire(&h.evolve(&rho0, t).unwrap(), ep, dp, &mut rng).unwrap()
                })
                .collect();
            let report = recover_full(&plan, obs, &a).unwrap();
            let shadow = report.coefficients.shadow().unwrap();
            let traces = shadow.coefficient_pauli_traces(&word);
            for g in 0..40 {
                let t = 2.0 * std::f64::consts::PI * g as f64 / 40.0;
                let mut est = num_complex::Complex64::new(0.0, 0.0);
                for (pos, &k) in shadow.support().iter().enumerate() {
                    est += traces[pos] * basis.evaluate(k, t).unwrap();
                }
                let exact = word.trace_with(h.evolve(&rho0, t).unwrap().matrix()).re;
                total += 1;
                if (est.re - exact).abs() <= epsilon {
                    within += 1;
                }
            }
        }
        assert!(
            within as f64 >= 0.95 * total as f64,
            "only {within}/{total} grid points within ε"
        );
    }

    #[test]
    fn full_recovery_requires_full_support() {
        let basis = BasisSystem::fourier(2);
        let plan = RecoveryPlan::empirical(basis.clone(), vec![0, 1], 1.0, 0.1, 0.1, 8).unwrap();
        let points = basis.sample_measure(8, &mut rng_from_seed(1)).unwrap();
        let a = basis.measurement_matrix(&points).unwrap();
        let obs: Vec<Estimate> =
            (0..8).map(|_| Estimate::Dense(CMat::identity(2).scale_re(0.5))).collect();
        assert!(matches!(recover_full(&plan, obs, &a), Err(Error::InvalidArgument(_))));
    }
}
