//! Reproducible experiment runner: configures and executes the Fourier/NMR
//! and Chebyshev/fermionic reconstruction pipelines end to end, the support
//! identification run and the property-audit ledger, emitting deterministic
//! machine-readable reports.

use serde::{Deserialize, Serialize};
use sparsetomo::audit::{run_all, AuditOptions};
use sparsetomo::basis::BasisSystem;
use sparsetomo::error::Error as CoreError;
use sparsetomo::io::{
    coefficients_from_bytes, write_coefficients, write_trajectories_csv, TrajectoryRow,
};
use sparsetomo::linalg::CMat;
use sparsetomo::norms::{sparsity_defect, ObservableSet, PNorm};
use sparsetomo::pauli::PauliWord;
use sparsetomo::predict::{predict_expectation, Observable};
use sparsetomo::qsim::{
    evolve, fourier_coefficients, jordan_wigner, prepare_subgaussian_state,
    time_reversal_conjugation, DensityOperator, FermionicGaussianHamiltonian,
    IntegerSpectrumHamiltonian,
};
use sparsetomo::random::substream;
use sparsetomo::recovery::{
    chebyshev_support_cutoff, recover_sparse, sample_count_sparse, subgaussian_support_radius,
    FormulaVariant, RecoveryPlan, RecoveryReport,
};
use sparsetomo::support_id::{identify_support, probe_count, SupportIdOptions};
use sparsetomo::tomo::{ShotPolicy, TomographicProcedure};
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_GUARANTEE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Guarantee(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Guarantee(_) => EXIT_GUARANTEE,
            CliError::Io(_) => EXIT_IO,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Guarantee(m) | CliError::Io(m) => m,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Io(io) => CliError::Io(io.to_string()),
            CoreError::GuaranteeFailed(m) => CliError::Guarantee(m),
            CoreError::SingularSupportMatrix { .. } => CliError::Guarantee(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

// ---------------------------------------------------------------------------
// configuration schema
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Nmr,
    Fermion,
    SupportId,
    Audit,
    Predict,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum InitialStateConfig {
    SubGaussian { e0: f64, sigma: f64 },
    Computational { index: usize },
    #[default]
    PlusAll,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// Qubits for nmr/support_id, fermionic modes for fermion runs.
    pub n: usize,
    #[serde(default)]
    pub integer_diagonal: Option<Vec<i64>>,
    #[serde(default)]
    pub random_e_max: Option<i64>,
    #[serde(default)]
    pub f_matrix: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub random_interaction: Option<f64>,
    #[serde(default)]
    pub initial_state: InitialStateConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcedureConfig {
    Exact,
    Shadows,
    FullPauli,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomographyConfig {
    pub procedure: ProcedureConfig,
    #[serde(default)]
    pub locality: Option<usize>,
    /// Fixed per-point shot count (empirical); absent means theorem-driven.
    #[serde(default)]
    pub shots_per_point: Option<usize>,
    pub epsilon: f64,
    pub delta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryMode {
    Theorem,
    Empirical,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoveryConfig {
    pub mode: RecoveryMode,
    #[serde(default)]
    pub sample_points: Option<usize>,
    #[serde(default = "default_attenuation")]
    pub attenuation: f64,
    /// Target sparsity defect γ for the support calculators.
    #[serde(default)]
    pub gamma: Option<f64>,
    /// Explicit support radius override (Fourier label range or Chebyshev
    /// cutoff).
    #[serde(default)]
    pub support_radius: Option<i64>,
    #[serde(default)]
    pub variant: Option<String>,
    /// Horizon T for fermionic runs (evolution over [−T, T] rescaled).
    #[serde(default)]
    pub horizon: Option<f64>,
}

fn default_attenuation() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportIdConfig {
    pub sparsity: usize,
    #[serde(default)]
    pub probes: Option<usize>,
    #[serde(default)]
    pub probe_epsilon: Option<f64>,
    #[serde(default)]
    pub probe_delta: Option<f64>,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub strict: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub points: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub system: Option<SystemConfig>,
    #[serde(default)]
    pub tomography: Option<TomographyConfig>,
    #[serde(default)]
    pub recovery: Option<RecoveryConfig>,
    #[serde(default)]
    pub support_id: Option<SupportIdConfig>,
    #[serde(default)]
    pub observables: Vec<String>,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    pub seed: u64,
    #[serde(default)]
    pub inject_corruption: bool,
    /// Path to a coefficient sidecar (predict runs).
    #[serde(default)]
    pub coefficients: Option<String>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| {
            CliError::Validation(format!(
                "config rejected at line {}, column {}: {e}",
                e.line(),
                e.column()
            ))
        })
    }

    pub fn from_path(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn system(&self) -> CliResult<&SystemConfig> {
        self.system
            .as_ref()
            .ok_or_else(|| CliError::Validation("missing [system] section".into()))
    }

    fn tomography(&self) -> CliResult<&TomographyConfig> {
        self.tomography
            .as_ref()
            .ok_or_else(|| CliError::Validation("missing [tomography] section".into()))
    }

    fn recovery(&self) -> CliResult<&RecoveryConfig> {
        self.recovery
            .as_ref()
            .ok_or_else(|| CliError::Validation("missing [recovery] section".into()))
    }
}

// ---------------------------------------------------------------------------
// report structures (field order fixed for byte-identical output)
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlanSummary {
    pub basis: String,
    pub dimension: usize,
    pub support: Vec<i64>,
    pub sample_points: usize,
    pub attenuation: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub per_point_epsilon: f64,
    pub per_point_delta: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BudgetSummary {
    pub gamma_l2: f64,
    pub spillover: f64,
    pub epsilon: f64,
    pub total: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiagnosticsSummary {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub support_gram_deviation: f64,
    pub residual: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ObservableError {
    pub observable: String,
    pub max_abs_error: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub experiment: String,
    pub seed: u64,
    pub system: serde_json::Value,
    pub plan: PlanSummary,
    pub budget: BudgetSummary,
    pub diagnostics: DiagnosticsSummary,
    pub trajectory_errors: Vec<ObservableError>,
    pub within_epsilon: bool,
    pub files: Vec<String>,
}

fn plan_summary(report: &RecoveryReport) -> PlanSummary {
    PlanSummary {
        basis: format!("{:?}", report.plan.basis.kind()),
        dimension: report.plan.basis.dimension(),
        support: report.plan.support.clone(),
        sample_points: report.plan.sample_count,
        attenuation: report.plan.attenuation,
        epsilon: report.plan.epsilon,
        delta: report.plan.delta,
        per_point_epsilon: report.plan.per_point_epsilon(),
        per_point_delta: report.plan.per_point_delta(),
    }
}

fn budget_summary(report: &RecoveryReport) -> BudgetSummary {
    BudgetSummary {
        gamma_l2: report.error_budget.gamma_l2,
        spillover: report.error_budget.spillover,
        epsilon: report.error_budget.epsilon,
        total: report.error_budget.total(),
    }
}

fn diagnostics_summary(report: &RecoveryReport) -> DiagnosticsSummary {
    DiagnosticsSummary {
        sigma_min: report.diagnostics.sigma_min,
        sigma_max: report.diagnostics.sigma_max,
        support_gram_deviation: report.diagnostics.support_gram_deviation,
        residual: report.diagnostics.residual,
    }
}

fn parse_observables(labels: &[String], n: usize) -> CliResult<Vec<PauliWord>> {
    if labels.is_empty() {
        return Err(CliError::Validation("no observables configured".into()));
    }
    labels
        .iter()
        .map(|l| {
            let w = PauliWord::parse(l).map_err(|e| CliError::Validation(e.to_string()))?;
            if w.n_qubits() != n {
                return Err(CliError::Validation(format!(
                    "observable {l} acts on {} qubits, system has {n}",
                    w.n_qubits()
                )));
            }
            Ok(w)
        })
        .collect()
}

fn procedure_from_config(t: &TomographyConfig, n: usize) -> CliResult<TomographicProcedure> {
    Ok(match t.procedure {
        ProcedureConfig::Exact => TomographicProcedure::exact_oracle(),
        ProcedureConfig::Shadows => {
            let ell = t.locality.unwrap_or_else(|| n.min(2));
            let shots = match t.shots_per_point {
                Some(v) => ShotPolicy::Fixed(v),
                None => ShotPolicy::TheoremDriven,
            };
            TomographicProcedure::local_shadows(ell, shots)
        }
        ProcedureConfig::FullPauli => {
            let shots = match t.shots_per_point {
                Some(v) => ShotPolicy::Fixed(v),
                None => ShotPolicy::TheoremDriven,
            };
            TomographicProcedure::full_pauli(shots)
        }
    })
}

fn build_integer_hamiltonian(
    sys: &SystemConfig,
    seed: u64,
) -> CliResult<IntegerSpectrumHamiltonian> {
    if let Some(diag) = &sys.integer_diagonal {
        return Ok(IntegerSpectrumHamiltonian::new(sys.n, diag.clone())?);
    }
    if let Some(e_max) = sys.random_e_max {
        let mut rng = substream(seed, 100);
        return Ok(IntegerSpectrumHamiltonian::random(sys.n, e_max, &mut rng)?);
    }
    Err(CliError::Validation(
        "system needs either integer_diagonal or random_e_max".into(),
    ))
}

fn build_fermionic_hamiltonian(
    sys: &SystemConfig,
    seed: u64,
) -> CliResult<FermionicGaussianHamiltonian> {
    if let Some(rows) = &sys.f_matrix {
        let m = 2 * sys.n;
        if rows.len() != m || rows.iter().any(|r| r.len() != m) {
            return Err(CliError::Validation(format!("f_matrix must be {m}x{m}")));
        }
        let flat: Vec<f64> = rows.iter().flatten().cloned().collect();
        return Ok(FermionicGaussianHamiltonian::new(sys.n, flat)?);
    }
    if let Some(j) = sys.random_interaction {
        let mut rng = substream(seed, 101);
        return Ok(FermionicGaussianHamiltonian::random(sys.n, j, &mut rng));
    }
    Err(CliError::Validation("system needs either f_matrix or random_interaction".into()))
}

fn variant_from_config(rec: &RecoveryConfig) -> CliResult<FormulaVariant> {
    match rec.variant.as_deref() {
        None | Some("algorithm1") => Ok(FormulaVariant::Algorithm1),
        Some("corollary") => Ok(FormulaVariant::Corollary),
        Some(other) => Err(CliError::Validation(format!("unknown formula variant '{other}'"))),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("serialization failed: {e}")))?;
    std::fs::write(path, text.as_bytes())?;
    Ok(())
}

// ---------------------------------------------------------------------------
// runners
// ---------------------------------------------------------------------------

pub struct RunOutput {
    pub summary_path: PathBuf,
    pub guarantee_met: bool,
}

/// Fourier/NMR pipeline: integer-spectrum Hamiltonian, sub-Gaussian initial
/// state, support radius from the tail bound, shadow (or oracle) acquisition
/// at sampled times, recovery, and trajectory-error evaluation against the
/// exact simulator.
pub fn run_nmr(config: &ExperimentConfig, out_dir: &Path) -> CliResult<RunOutput> {
    std::fs::create_dir_all(out_dir)?;
    let sys = config.system()?;
    let tomo_cfg = config.tomography()?;
    let rec_cfg = config.recovery()?;
    let n = sys.n;
    let h = build_integer_hamiltonian(sys, config.seed)?;

    let mut state_rng = substream(config.seed, 1);
    let (rho0, tau) = match &sys.initial_state {
        InitialStateConfig::SubGaussian { e0, sigma } => {
            let (state, tau) = prepare_subgaussian_state(&h, *e0, *sigma, &mut state_rng)?;
            (state, Some(tau))
        }
        InitialStateConfig::Computational { index } => {
            (DensityOperator::computational(n, *index), None)
        }
        InitialStateConfig::PlusAll => (DensityOperator::plus_all(n), None),
    };

    let basis = BasisSystem::fourier(h.e_max() as u32);
    let support: Vec<i64> = match (rec_cfg.support_radius, &sys.initial_state, rec_cfg.gamma) {
        (Some(r), _, _) => (-r..=r).filter(|k| basis.contains_label(*k)).collect(),
        (None, InitialStateConfig::SubGaussian { sigma, .. }, Some(gamma)) => {
            let radius =
                subgaussian_support_radius(n, *sigma, tau.unwrap_or(1.0), gamma)?.radius;
            (-radius..=radius).filter(|k| basis.contains_label(*k)).collect()
        }
        _ => basis.labels().to_vec(),
    };

    let variant = variant_from_config(rec_cfg)?;
    let m = match rec_cfg.mode {
        RecoveryMode::Theorem => sample_count_sparse(
            support.len(),
            basis.dimension(),
            basis.bound(),
            rec_cfg.attenuation,
            tomo_cfg.delta,
            variant,
        )?,
        RecoveryMode::Empirical => rec_cfg.sample_points.ok_or_else(|| {
            CliError::Validation("empirical mode needs recovery.sample_points".into())
        })?,
    };

    // exact expansion and its true defects on the tracked observable class
    let truth = fourier_coefficients(&h, &rho0)?;
    let ell = tomo_cfg.locality.unwrap_or_else(|| n.min(2));
    let obs_set = ObservableSet::local_pauli_list(n, ell)?;
    let gamma_l2 = sparsity_defect(&truth, &support, &obs_set, PNorm::Two)?
        .exact()
        .unwrap_or(0.0);
    let gamma_l1 = sparsity_defect(&truth, &support, &obs_set, PNorm::One)?
        .exact()
        .unwrap_or(0.0);

    let plan = RecoveryPlan::empirical(
        basis.clone(),
        support,
        rec_cfg.attenuation,
        tomo_cfg.epsilon,
        tomo_cfg.delta,
        m,
    )?
    .with_sparsity_defects(gamma_l1, gamma_l2);

    let mut sample_rng = substream(config.seed, 2);
    let points = basis.sample_measure(m, &mut sample_rng)?;
    let a = basis.measurement_matrix(&points)?;
    let proc = procedure_from_config(tomo_cfg, n)?;
    let (eps_pt, delta_pt) = (plan.per_point_epsilon(), plan.per_point_delta());
    let mut observations = Vec::with_capacity(m);
    for (i, &t) in points.iter().enumerate() {
        let mut rng = substream(config.seed, 1000 + i as u64);
        let state = h.evolve(&rho0, t)?;
        observations.push(proc.acquire(&state, eps_pt, delta_pt, &mut rng)?);
    }
    let report = recover_sparse(&plan, observations, &a)?;

    // trajectory errors against the exact simulator
    let words = parse_observables(&config.observables, n)?;
    let grid_points = config.grid.as_ref().map(|g| g.points).unwrap_or(64);
    let mut rows = Vec::new();
    let mut errors: Vec<ObservableError> = Vec::new();
    for word in &words {
        let mut worst = 0.0f64;
        for g in 0..grid_points {
            let t = 2.0 * std::f64::consts::PI * g as f64 / grid_points as f64;
            let estimate = predict_expectation(&report, &Observable::Pauli(word.clone()), t)?;
            let exact = word.trace_with(h.evolve(&rho0, t)?.matrix()).re;
            worst = worst.max((estimate - exact).abs());
            rows.push(TrajectoryRow {
                x: t,
                observable: word.to_string(),
                estimate,
                std_error: None,
                exact: Some(exact),
            });
        }
        errors.push(ObservableError { observable: word.to_string(), max_abs_error: worst });
    }
    let within = errors.iter().all(|e| e.max_abs_error <= tomo_cfg.epsilon);

    // artifacts
    let csv_path = out_dir.join("trajectories.csv");
    write_trajectories_csv(&csv_path, &rows)?;
    let coeff_path = out_dir.join("coefficients.bin");
    let dense = match report.coefficients.dense() {
        Some(d) => d.clone(),
        None => report.coefficients.shadow().unwrap().densify()?,
    };
    write_coefficients(&coeff_path, &dense)?;

    let summary = RunSummary {
        experiment: "nmr".into(),
        seed: config.seed,
        system: serde_json::json!({
            "n_qubits": n,
            "e_max": h.e_max(),
            "tau": tau,
        }),
        plan: plan_summary(&report),
        budget: budget_summary(&report),
        diagnostics: diagnostics_summary(&report),
        trajectory_errors: errors,
        within_epsilon: within,
        files: vec!["trajectories.csv".into(), "coefficients.bin".into()],
    };
    let summary_path = out_dir.join("summary.json");
    write_json(&summary_path, &summary)?;
    Ok(RunOutput { summary_path, guarantee_met: within })
}

/// Chebyshev/fermionic pipeline over t ∈ [−1, 1]: Jordan-Wigner image of a
/// quadratic Majorana Hamiltonian, cutoff from the Bessel tail, arcsine time
/// sampling with negative times routed through the time-reversal conjugation.
pub fn run_fermion(config: &ExperimentConfig, out_dir: &Path) -> CliResult<RunOutput> {
    std::fs::create_dir_all(out_dir)?;
    let sys = config.system()?;
    let tomo_cfg = config.tomography()?;
    let rec_cfg = config.recovery()?;
    let n = sys.n;
    let hf = build_fermionic_hamiltonian(sys, config.seed)?;
    let h = jordan_wigner(&hf)?;

    let mut state_rng = substream(config.seed, 1);
    let rho0 = match &sys.initial_state {
        InitialStateConfig::Computational { index } => DensityOperator::computational(n, *index),
        InitialStateConfig::PlusAll => DensityOperator::plus_all(n),
        InitialStateConfig::SubGaussian { .. } => {
            return Err(CliError::Validation(
                "sub-Gaussian states apply to integer-spectrum systems".into(),
            ));
        }
    };
    let _ = &mut state_rng;

    let gamma = rec_cfg.gamma.unwrap_or(1e-3);
    let horizon = rec_cfg.horizon.unwrap_or(1.0);
    let cut = chebyshev_support_cutoff(&hf, gamma, horizon)?;
    let cutoff = match rec_cfg.support_radius {
        Some(r) => r as usize,
        None => cut.cutoff,
    };
    let basis = BasisSystem::chebyshev(cutoff + 1);

    let m = match rec_cfg.mode {
        RecoveryMode::Theorem => sparsetomo::recovery::sample_count_full(
            basis.dimension(),
            basis.bound(),
            tomo_cfg.delta,
        )?,
        RecoveryMode::Empirical => rec_cfg.sample_points.ok_or_else(|| {
            CliError::Validation("empirical mode needs recovery.sample_points".into())
        })?,
    };
    let plan = RecoveryPlan::empirical(
        basis.clone(),
        basis.labels().to_vec(),
        rec_cfg.attenuation,
        tomo_cfg.epsilon,
        tomo_cfg.delta,
        m,
    )?
    .with_sparsity_defects(gamma, gamma);

    // time-reversal conjugation for negative times
    let v = time_reversal_conjugation(&hf)?;
    let flip_dev = {
        let conj = v.matmul(&h).matmul(&v.dagger());
        (&conj + &h).frobenius_norm()
    };
    let state_at = |t: f64| -> CliResult<DensityOperator> {
        if t >= 0.0 {
            Ok(evolve(&h, &rho0, t)?)
        } else {
            let rotated = sparsetomo::qsim::conjugate_state(&v.dagger(), &rho0)?;
            let evolved = evolve(&h, &rotated, -t)?;
            Ok(sparsetomo::qsim::conjugate_state(&v, &evolved)?)
        }
    };

    let mut sample_rng = substream(config.seed, 2);
    let points = basis.sample_measure(m, &mut sample_rng)?;
    let a = basis.measurement_matrix(&points)?;
    let proc = procedure_from_config(tomo_cfg, n)?;
    let (eps_pt, delta_pt) = (plan.per_point_epsilon(), plan.per_point_delta());
    let mut observations = Vec::with_capacity(m);
    for (i, &t) in points.iter().enumerate() {
        let mut rng = substream(config.seed, 1000 + i as u64);
        observations.push(proc.acquire(&state_at(t)?, eps_pt, delta_pt, &mut rng)?);
    }
    let report = recover_sparse(&plan, observations, &a)?;

    // default observables: all single-qubit Z's
    let words = if config.observables.is_empty() {
        (0..n)
            .map(|q| {
                let mut ops = vec![sparsetomo::pauli::PauliOp::I; n];
                ops[q] = sparsetomo::pauli::PauliOp::Z;
                PauliWord(ops)
            })
            .collect()
    } else {
        parse_observables(&config.observables, n)?
    };
    let grid_points = config.grid.as_ref().map(|g| g.points).unwrap_or(64);
    let mut rows = Vec::new();
    let mut errors: Vec<ObservableError> = Vec::new();
    for word in &words {
        let mut worst = 0.0f64;
        for g in 0..grid_points {
            let t = -1.0 + 2.0 * g as f64 / (grid_points - 1).max(1) as f64;
            let estimate = predict_expectation(&report, &Observable::Pauli(word.clone()), t)?;
            let exact = word.trace_with(evolve(&h, &rho0, t)?.matrix()).re;
            worst = worst.max((estimate - exact).abs());
            rows.push(TrajectoryRow {
                x: t,
                observable: word.to_string(),
                estimate,
                std_error: None,
                exact: Some(exact),
            });
        }
        errors.push(ObservableError { observable: word.to_string(), max_abs_error: worst });
    }
    let within = errors.iter().all(|e| e.max_abs_error <= tomo_cfg.epsilon) && flip_dev < 1e-8;

    let csv_path = out_dir.join("trajectories.csv");
    write_trajectories_csv(&csv_path, &rows)?;
    let coeff_path = out_dir.join("coefficients.bin");
    let dense = match report.coefficients.dense() {
        Some(d) => d.clone(),
        None => report.coefficients.shadow().unwrap().densify()?,
    };
    write_coefficients(&coeff_path, &dense)?;

    let summary = RunSummary {
        experiment: "fermion".into(),
        seed: config.seed,
        system: serde_json::json!({
            "n_modes": n,
            "interaction_strength": hf.interaction_strength(),
            "omega_max": cut.omega_max,
            "omega_strength_bound": cut.omega_strength_bound,
            "cutoff": cutoff,
            "cutoff_frequency_term": cut.frequency_term,
            "cutoff_tail_term": cut.tail_term,
            "time_reversal_deviation": flip_dev,
        }),
        plan: plan_summary(&report),
        budget: budget_summary(&report),
        diagnostics: diagnostics_summary(&report),
        trajectory_errors: errors,
        within_epsilon: within,
        files: vec!["trajectories.csv".into(), "coefficients.bin".into()],
    };
    let summary_path = out_dir.join("summary.json");
    write_json(&summary_path, &summary)?;
    Ok(RunOutput { summary_path, guarantee_met: within })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SupportIdSummary {
    pub experiment: String,
    pub seed: u64,
    pub sparsity: usize,
    pub probes: usize,
    pub labels: Vec<i64>,
    pub gap: f64,
    pub rip_delta: Option<f64>,
    pub coefficient_bound_violations: usize,
    pub xhat: Vec<f64>,
}

/// Support identification on an NMR-style system.
pub fn run_support_id(config: &ExperimentConfig, out_dir: &Path) -> CliResult<RunOutput> {
    std::fs::create_dir_all(out_dir)?;
    let sys = config.system()?;
    let tomo_cfg = config.tomography()?;
    let rec_cfg = config.recovery()?;
    let sid = config
        .support_id
        .as_ref()
        .ok_or_else(|| CliError::Validation("missing [support_id] section".into()))?;
    let n = sys.n;
    let h = build_integer_hamiltonian(sys, config.seed)?;
    let mut state_rng = substream(config.seed, 1);
    let rho0 = match &sys.initial_state {
        InitialStateConfig::SubGaussian { e0, sigma } => {
            prepare_subgaussian_state(&h, *e0, *sigma, &mut state_rng)?.0
        }
        InitialStateConfig::Computational { index } => DensityOperator::computational(n, *index),
        InitialStateConfig::PlusAll => DensityOperator::plus_all(n),
    };
    let basis = BasisSystem::fourier(h.e_max() as u32);
    let m = rec_cfg
        .sample_points
        .ok_or_else(|| CliError::Validation("support_id needs recovery.sample_points".into()))?;

    let mut sample_rng = substream(config.seed, 2);
    let points = basis.sample_measure(m, &mut sample_rng)?;
    let a = basis.measurement_matrix(&points)?;
    let proc = procedure_from_config(tomo_cfg, n)?;
    let mut observations = Vec::with_capacity(m);
    for (i, &t) in points.iter().enumerate() {
        let mut rng = substream(config.seed, 1000 + i as u64);
        let state = h.evolve(&rho0, t)?;
        observations.push(proc.acquire(&state, tomo_cfg.epsilon, tomo_cfg.delta, &mut rng)?);
    }

    let probes = match sid.probes {
        Some(l) => l,
        None => probe_count(
            basis.dimension(),
            sid.probe_delta.unwrap_or(tomo_cfg.delta),
            sid.probe_epsilon.unwrap_or(tomo_cfg.epsilon),
            sid.kappa.unwrap_or(0.1),
        )?,
    };
    let mut opts = SupportIdOptions::new(sid.sparsity, probes);
    opts.kappa = sid.kappa.unwrap_or(0.1);
    if sid.strict {
        opts = opts.strict();
    }
    let mut probe_rng = substream(config.seed, 3);
    let estimate = identify_support(&observations, &a, &opts, &mut probe_rng)?;

    let summary = SupportIdSummary {
        experiment: "support_id".into(),
        seed: config.seed,
        sparsity: sid.sparsity,
        probes,
        labels: estimate.labels.clone(),
        gap: estimate.gap,
        rip_delta: estimate.rip_delta,
        coefficient_bound_violations: estimate.coefficient_bound_violations,
        xhat: estimate.xhat.clone(),
    };
    let summary_path = out_dir.join("support.json");
    write_json(&summary_path, &summary)?;
    write_json(&out_dir.join("support_estimate.json"), &estimate)?;
    Ok(RunOutput { summary_path, guarantee_met: true })
}

/// Run the audit ledger; the guarantee flag reflects whether every check
/// passed.
pub fn run_audit(config: &ExperimentConfig, out_dir: &Path) -> CliResult<RunOutput> {
    std::fs::create_dir_all(out_dir)?;
    let ledger = run_all(&AuditOptions {
        seed: config.seed,
        inject_corruption: config.inject_corruption,
    });
    let summary_path = out_dir.join("audit.json");
    write_json(&summary_path, &ledger)?;
    Ok(RunOutput { summary_path, guarantee_met: ledger.all_passed() })
}

/// Evaluate configured observables on a stored coefficient sidecar over the
/// basis domain grid; emits the prediction CSV.
pub fn run_predict(config: &ExperimentConfig, out_dir: &Path) -> CliResult<RunOutput> {
    std::fs::create_dir_all(out_dir)?;
    let path = config
        .coefficients
        .as_ref()
        .ok_or_else(|| CliError::Validation("predict needs a coefficients path".into()))?;
    let bytes = std::fs::read(path).map_err(|e| CliError::Io(format!("cannot read {path}: {e}")))?;
    let expansion = coefficients_from_bytes(&bytes)?;
    let n = expansion.n_qubits();
    let words = parse_observables(&config.observables, n)?;
    let grid_points = config.grid.as_ref().map(|g| g.points).unwrap_or(64);
    let (lo, hi) = expansion.basis().domain();
    let mut rows = Vec::new();
    for word in &words {
        let dense: CMat = word.dense();
        for g in 0..grid_points {
            let x = lo + (hi - lo) * g as f64 / grid_points as f64;
            let x = x.min(hi - 1e-12);
            let val = expansion.trajectory(&dense, x)?.re;
            rows.push(TrajectoryRow {
                x,
                observable: word.to_string(),
                estimate: val,
                std_error: None,
                exact: None,
            });
        }
    }
    let csv = out_dir.join("predictions.csv");
    write_trajectories_csv(&csv, &rows)?;
    Ok(RunOutput { summary_path: csv, guarantee_met: true })
}

/// Dispatch on the experiment kind.
pub fn run(config: &ExperimentConfig, out_dir: &Path) -> CliResult<RunOutput> {
    match config.experiment {
        ExperimentKind::Nmr => run_nmr(config, out_dir),
        ExperimentKind::Fermion => run_fermion(config, out_dir),
        ExperimentKind::SupportId => run_support_id(config, out_dir),
        ExperimentKind::Audit => run_audit(config, out_dir),
        ExperimentKind::Predict => run_predict(config, out_dir),
    }
}
