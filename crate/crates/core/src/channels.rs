//! Minimal parametrized-channel extension: superoperator coefficients in the
//! column-stacking convention, Pauli-transfer probing through the Choi state,
//! tester-list semi-norms and reuse of the recovery engine (the solver is
//! agnostic to whether the operator vector holds states or superoperators).

use crate::basis::MeasurementMatrix;
use crate::error::{Error, Result};
use crate::linalg::{eigh, CMat, C_ONE};
use crate::norms::ParametrizedOperator;
use crate::pauli::PauliWord;
use crate::qsim::{partial_trace, DensityOperator};
use crate::recovery::{recover_sparse, RecoveryPlan, RecoveryReport};
use crate::tomo::{Estimate, ShotPolicy, TomographicProcedure};
use rand::Rng;

/// A superoperator on n qubits as a 4^n × 4^n matrix acting on
/// column-stacked density matrices: vec(C[ρ]) = mat · vec(ρ).
#[derive(Clone, Debug, PartialEq)]
pub struct SuperOp {
    n_qubits: usize,
    mat: CMat,
}

impl SuperOp {
    pub fn new(n_qubits: usize, mat: CMat) -> Result<Self> {
        let d2 = 1usize << (2 * n_qubits);
        if mat.rows() != d2 || !mat.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "superoperator must be {d2}x{d2} for {n_qubits} qubits"
            )));
        }
        Ok(SuperOp { n_qubits, mat })
    }

    pub fn identity(n_qubits: usize) -> Self {
        SuperOp { n_qubits, mat: CMat::identity(1 << (2 * n_qubits)) }
    }

    /// ρ ↦ U ρ U†, i.e. conj(U) ⊗ U in column-stacking.
    pub fn unitary_conjugation(u: &CMat) -> Result<Self> {
        if !u.is_square() || !u.rows().is_power_of_two() {
            return Err(Error::DimensionMismatch("unitary must be square of dimension 2^n".into()));
        }
        let n_qubits = u.rows().trailing_zeros() as usize;
        Ok(SuperOp { n_qubits, mat: u.conj().kron(u) })
    }

    /// ρ ↦ (1−p) ρ + p I/d.
    pub fn depolarizing(n_qubits: usize, p: f64) -> Self {
        let d = 1usize << n_qubits;
        let ident = CMat::identity(d);
        let vec_id = ident.vec_columns();
        let mut mat = CMat::identity(d * d).scale_re(1.0 - p);
        for (a, va) in vec_id.iter().enumerate() {
            for (b, vb) in vec_id.iter().enumerate() {
                mat[(a, b)] += va * vb.conj() * (p / d as f64);
            }
        }
        SuperOp { n_qubits, mat }
    }

    /// Σ_k conj(K_k) ⊗ K_k.
    pub fn from_kraus(ops: &[CMat]) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::InvalidArgument("empty Kraus list".into()));
        }
        let d = ops[0].rows();
        if !d.is_power_of_two() || ops.iter().any(|k| k.rows() != d || !k.is_square()) {
            return Err(Error::DimensionMismatch("Kraus operators must be square 2^n".into()));
        }
        let n_qubits = d.trailing_zeros() as usize;
        let mut mat = CMat::zeros(d * d, d * d);
        for k in ops {
            mat = &mat + &k.conj().kron(k);
        }
        Ok(SuperOp { n_qubits, mat })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn apply(&self, rho: &CMat) -> Result<CMat> {
        let d = self.dim();
        if rho.rows() != d || !rho.is_square() {
            return Err(Error::DimensionMismatch("state dimension differs from channel".into()));
        }
        let out = self.mat.matvec(&rho.vec_columns());
        Ok(CMat::unvec_columns(&out, d))
    }
}

/// Direct Pauli-transfer entry 2^{−n} Tr[Q · C[P]].
pub fn pauli_transfer_probe(c: &SuperOp, p: &PauliWord, q: &PauliWord) -> Result<f64> {
    if p.n_qubits() != c.n_qubits() || q.n_qubits() != c.n_qubits() {
        return Err(Error::DimensionMismatch("Pauli words differ from channel width".into()));
    }
    let image = c.apply(&p.dense())?;
    Ok(q.trace_with(&image).re / c.dim() as f64)
}

/// Choi state (I ⊗ C)[|Ω⟩⟨Ω|] on 2n qubits, reference register first.
pub fn choi_state(c: &SuperOp) -> CMat {
    let d = c.dim();
    let mut choi = CMat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            // C[|i⟩⟨j|]
            let mut unit = CMat::zeros(d, d);
            unit[(i, j)] = C_ONE;
            let image = c.apply(&unit).unwrap();
            for a in 0..d {
                for b in 0..d {
                    choi[(i * d + a, j * d + b)] += image[(a, b)] / d as f64;
                }
            }
        }
    }
    choi
}

/// The same Pauli-transfer entry through the Choi state. The maximally
/// entangled pairing transposes the input operator on the reference register,
/// so the expectation of Pᵀ ⊗ Q reproduces 2^{−n} Tr[Q C[P]] exactly — the
/// agreement of the two routes is itself a correctness check.
pub fn pauli_transfer_probe_choi(c: &SuperOp, p: &PauliWord, q: &PauliWord) -> Result<f64> {
    if p.n_qubits() != c.n_qubits() || q.n_qubits() != c.n_qubits() {
        return Err(Error::DimensionMismatch("Pauli words differ from channel width".into()));
    }
    let choi = choi_state(c);
    let observable = p.dense().transpose().kron(&q.dense());
    Ok(observable.matmul(&choi).trace().re)
}

/// Complete positivity and trace preservation diagnostics: the smallest Choi
/// eigenvalue and the deviation of Tr_out[Choi] from I/d.
pub fn cptp_check(c: &SuperOp) -> Result<(f64, f64)> {
    let choi = choi_state(c);
    let min_eig = eigh(&choi).values[0];
    let n = c.n_qubits();
    // keep the reference register (first n qubits)
    let keep: Vec<usize> = (0..n).collect();
    let marginal = partial_trace(&choi, 2 * n, &keep)?;
    let target = CMat::identity(c.dim()).scale_re(1.0 / c.dim() as f64);
    Ok((min_eig, (&marginal - &target).frobenius_norm()))
}

/// Tester semi-norm over an explicit finite list of (input state, observable)
/// pairs on system ⊗ ancilla: sup |Tr[(I ⊗ C)[ρ] O]|.
pub fn tester_seminorm(c: &SuperOp, testers: &[(CMat, CMat)]) -> Result<f64> {
    let d = c.dim();
    let joint = d * d;
    let mut best = 0.0f64;
    for (rho, obs) in testers {
        if rho.rows() != joint || obs.rows() != joint {
            return Err(Error::DimensionMismatch(
                "testers must act on the system plus an equal-size ancilla".into(),
            ));
        }
        // (I ⊗ C)[ρ]: apply C to the second register blockwise
        let mut out = CMat::zeros(joint, joint);
        for i in 0..d {
            for j in 0..d {
                let mut block = CMat::zeros(d, d);
                for a in 0..d {
                    for b in 0..d {
                        block[(a, b)] = rho[(i * d + a, j * d + b)];
                    }
                }
                let image = c.apply(&block)?;
                for a in 0..d {
                    for b in 0..d {
                        out[(i * d + a, j * d + b)] = image[(a, b)];
                    }
                }
            }
        }
        best = best.max(obs.matmul(&out).trace().norm());
    }
    Ok(best)
}

/// Point procedures for channel observations. The two cited efficient
/// learning protocols are declared interface stubs: calling them errors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelProcedure {
    ExactOracle,
    /// Estimate every Pauli-transfer entry from simulated state preparations
    /// and Pauli measurements with the given total shot budget per input.
    FullPauliTransfer { shots_per_input: usize },
    PauliSparseLearning,
    HaarAveragedLocalLearning,
}

/// Produce a superoperator estimate of a channel at one parameter point.
pub fn acquire_channel(
    proc: &ChannelProcedure,
    channel: &SuperOp,
    rng: &mut impl Rng,
) -> Result<SuperOp> {
    match proc {
        ChannelProcedure::ExactOracle => Ok(channel.clone()),
        ChannelProcedure::FullPauliTransfer { shots_per_input } => {
            full_pauli_transfer_estimate(channel, *shots_per_input, rng)
        }
        ChannelProcedure::PauliSparseLearning => Err(Error::ProtocolStub("pauli-sparse learning")),
        ChannelProcedure::HaarAveragedLocalLearning => {
            Err(Error::ProtocolStub("haar-averaged local learning"))
        }
    }
}

/// Pauli-transfer tomography: feed the eigenprojector mixtures (I ± P)/2^n
/// through the channel, estimate all output Pauli expectations by simulated
/// measurement, and assemble C = Σ_{QP} R_QP vec(Q) vec(P)† / 2^n.
fn full_pauli_transfer_estimate(
    channel: &SuperOp,
    shots_per_input: usize,
    rng: &mut impl Rng,
) -> Result<SuperOp> {
    let n = channel.n_qubits();
    if n > 3 {
        return Err(Error::DenseLimit { requested: n, limit: 3 });
    }
    let d = channel.dim();
    let words = PauliWord::enumerate(n);
    let proc = TomographicProcedure::full_pauli(ShotPolicy::Fixed(shots_per_input));

    fn measure_all<R: Rng>(
        proc: &TomographicProcedure,
        words: &[PauliWord],
        state: CMat,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        let rho = DensityOperator::from_matrix_unchecked(state);
        let est = proc.acquire(&rho, 0.5, 0.5, rng)?;
        let mat = est.dense_matrix().unwrap();
        Ok(words.iter().map(|q| q.trace_with(mat).re).collect())
    }

    // R_QP = 2^{-n} Tr[Q C[P]]; P = 2^{n-1}(ρ_+ − ρ_−) with ρ_± = (I±P)/2^n
    let mut transfer = vec![vec![0.0f64; words.len()]; words.len()];
    for (pi, p) in words.iter().enumerate() {
        if p.is_identity() {
            let input = CMat::identity(d).scale_re(1.0 / d as f64);
            let out = measure_all(&proc, &words, channel.apply(&input)?, rng)?;
            for (qi, v) in out.iter().enumerate() {
                transfer[qi][pi] = *v;
            }
        } else {
            let p_dense = p.dense();
            let plus = {
                let mut m = CMat::identity(d);
                m = &m + &p_dense;
                m.scale_re(1.0 / d as f64)
            };
            let minus = {
                let mut m = CMat::identity(d);
                m = &m - &p_dense;
                m.scale_re(1.0 / d as f64)
            };
            let out_plus = measure_all(&proc, &words, channel.apply(&plus)?, rng)?;
            let out_minus = measure_all(&proc, &words, channel.apply(&minus)?, rng)?;
            for qi in 0..words.len() {
                transfer[qi][pi] = 0.5 * (out_plus[qi] - out_minus[qi]);
            }
        }
    }

    let mut mat = CMat::zeros(d * d, d * d);
    for (qi, q) in words.iter().enumerate() {
        let vq = q.dense().vec_columns();
        for (pi, p) in words.iter().enumerate() {
            let r = transfer[qi][pi];
            if r == 0.0 {
                continue;
            }
            let vp = p.dense().vec_columns();
            for (a, qa) in vq.iter().enumerate() {
                for (b, pb) in vp.iter().enumerate() {
                    mat[(a, b)] += qa * pb.conj() * (r / d as f64);
                }
            }
        }
    }
    SuperOp::new(n, mat)
}

/// Finite expansion 𝒩(x) = Σ_k 𝒜_k φ_k(x) with superoperator coefficients.
#[derive(Clone, Debug)]
pub struct ParametrizedChannel {
    n_qubits: usize,
    expansion: ParametrizedOperator,
}

impl ParametrizedChannel {
    pub fn new(n_qubits: usize, expansion: ParametrizedOperator) -> Result<Self> {
        if expansion.dim() != 1 << (2 * n_qubits) {
            return Err(Error::DimensionMismatch(
                "coefficient dimension must be 4^n for superoperators".into(),
            ));
        }
        Ok(ParametrizedChannel { n_qubits, expansion })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn expansion(&self) -> &ParametrizedOperator {
        &self.expansion
    }

    pub fn evaluate(&self, x: f64) -> Result<SuperOp> {
        SuperOp::new(self.n_qubits, self.expansion.evaluate(x)?)
    }

    /// CPTP diagnostics of the pointwise reconstruction (asserted for exact
    /// constructions, not for noisy reconstructions).
    pub fn cptp_at(&self, x: f64) -> Result<(f64, f64)> {
        cptp_check(&self.evaluate(x)?)
    }
}

/// Channel recovery: identical pipeline to state recovery with
/// superoperator-valued observations.
pub struct ChannelRecovery {
    pub report: RecoveryReport,
    pub n_qubits: usize,
}

impl ChannelRecovery {
    pub fn channel(&self) -> Result<ParametrizedChannel> {
        let dense = self
            .report
            .coefficients
            .dense()
            .ok_or_else(|| Error::InvalidArgument("channel coefficients are not dense".into()))?;
        ParametrizedChannel::new(self.n_qubits, dense.clone())
    }
}

pub fn recover_channel(
    plan: &RecoveryPlan,
    observations: Vec<SuperOp>,
    a: &MeasurementMatrix,
) -> Result<ChannelRecovery> {
    if observations.is_empty() {
        return Err(Error::InvalidArgument("no channel observations".into()));
    }
    let n = observations[0].n_qubits();
    if observations.iter().any(|c| c.n_qubits() != n) {
        return Err(Error::DimensionMismatch("channel observations of mixed width".into()));
    }
    let estimates: Vec<Estimate> =
        observations.into_iter().map(|c| Estimate::Dense(c.into_matrix())).collect();
    let report = recover_sparse(plan, estimates, a)?;
    Ok(ChannelRecovery { report, n_qubits: n })
}
