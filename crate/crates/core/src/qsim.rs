//! Dense small-system simulator: density operators, integer-spectrum
//! Hamiltonians, fermionic Gaussian Hamiltonians under the Jordan-Wigner
//! mapping, time evolution, spectral projectors, partial traces and
//! sub-Gaussian initial states.
//!
//! Majorana normalization: this crate realizes Majorana operators as Pauli
//! strings, so {γ_i, γ_j} = 2 δ_ij. With H = i Σ_ij F_ij γ_i γ_j this makes
//! the single-particle energies *twice* the frequencies f_j, where ±i f_j are
//! the eigenvalues of F; the many-body spectrum is { Σ_j ± 2 f_j } and
//! ‖H‖_∞ equals the nuclear norm of F.

use crate::basis::{chebyshev_coeffs_of_phase, BasisSystem};
use crate::error::{Error, Result};
use crate::linalg::{eigh, trace_norm, CMat, C_ONE, C_ZERO};
use crate::norms::ParametrizedOperator;
use crate::pauli::PauliOp;
use crate::random::haar_unit_vector;
use num_complex::Complex64;
use rand::Rng;

/// Hard cap for dense 2^n × 2^n simulation.
pub const DENSE_QUBIT_LIMIT: usize = 10;

/// Default cap on fermionic modes mapped to dense qubit operators.
pub const DENSE_MODE_LIMIT: usize = 6;

fn check_power_of_two(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("dimension {dim} is not a power of two")));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// A validated density operator on n qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    mat: CMat,
    n_qubits: usize,
}

impl DensityOperator {
    /// Validates Hermiticity (1e-12), unit trace (1e-12) and positivity
    /// (smallest eigenvalue ≥ −1e-10).
    pub fn from_matrix(mat: CMat) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch("density operator must be square".into()));
        }
        let n_qubits = check_power_of_two(mat.rows())?;
        if !mat.is_hermitian(1e-12) {
            return Err(Error::InvalidArgument("density operator is not Hermitian".into()));
        }
        let tr = mat.trace();
        if (tr - C_ONE).norm() > 1e-12 {
            return Err(Error::InvalidArgument(format!("trace is {tr}, expected 1")));
        }
        let min_eig = eigh(&mat).values[0];
        if min_eig < -1e-10 {
            return Err(Error::InvalidArgument(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(DensityOperator { mat, n_qubits })
    }

    /// For internal use on matrices that are valid states by construction
    /// (unitary images of validated states, convex mixtures, ...).
    pub(crate) fn from_matrix_unchecked(mat: CMat) -> Self {
        let n_qubits = check_power_of_two(mat.rows()).expect("dimension must be a power of two");
        DensityOperator { mat: mat.hermitian_part(), n_qubits }
    }

    pub fn pure(state: &[Complex64]) -> Result<Self> {
        let norm = crate::linalg::vec_norm(state);
        if norm < 1e-12 {
            return Err(Error::InvalidArgument("zero state vector".into()));
        }
        let dim = state.len();
        let n_qubits = check_power_of_two(dim)?;
        let mat = CMat::from_fn(dim, dim, |i, j| state[i] * state[j].conj() / (norm * norm));
        Ok(DensityOperator { mat, n_qubits })
    }

    pub fn computational(n_qubits: usize, index: usize) -> Self {
        let dim = 1usize << n_qubits;
        assert!(index < dim);
        let mut mat = CMat::zeros(dim, dim);
        mat[(index, index)] = C_ONE;
        DensityOperator { mat, n_qubits }
    }

    /// |+⟩⟨+|^⊗n
    pub fn plus_all(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self::pure(&vec![amp; dim]).unwrap()
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let mut mat = CMat::zeros(dim, dim);
        for i in 0..dim {
            mat[(i, i)] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        DensityOperator { mat, n_qubits }
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }
}

/// Hamiltonian that is diagonal in the computational basis with integer
/// energies in [0, e_max].
#[derive(Clone, Debug, PartialEq)]
pub struct IntegerSpectrumHamiltonian {
    n_qubits: usize,
    diagonal: Vec<i64>,
    e_max: i64,
}

impl IntegerSpectrumHamiltonian {
    pub fn new(n_qubits: usize, diagonal: Vec<i64>) -> Result<Self> {
        if diagonal.len() != 1 << n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "diagonal length {} does not match 2^{n_qubits}",
                diagonal.len()
            )));
        }
        if diagonal.iter().any(|&e| e < 0) {
            return Err(Error::InvalidArgument("energies must be non-negative integers".into()));
        }
        let e_max = *diagonal.iter().max().unwrap();
        Ok(IntegerSpectrumHamiltonian { n_qubits, diagonal, e_max })
    }

    /// Uniformly random integer energies in [0, e_max].
    pub fn random(n_qubits: usize, e_max: i64, rng: &mut impl Rng) -> Result<Self> {
        if e_max < 0 {
            return Err(Error::InvalidArgument("e_max must be non-negative".into()));
        }
        let dim = 1usize << n_qubits;
        let mut diagonal: Vec<i64> = (0..dim).map(|_| rng.gen_range(0..=e_max)).collect();
        // make sure the full range is realized so Λ is as declared
        if dim >= 2 {
            diagonal[0] = 0;
            diagonal[1] = e_max;
        }
        Self::new(n_qubits, diagonal)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn diagonal(&self) -> &[i64] {
        &self.diagonal
    }

    pub fn e_max(&self) -> i64 {
        self.e_max
    }

    pub fn dense(&self) -> CMat {
        let dim = self.diagonal.len();
        let mut m = CMat::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(self.diagonal[i] as f64, 0.0);
        }
        m
    }

    pub fn distinct_energies(&self) -> Vec<i64> {
        let mut e: Vec<i64> = self.diagonal.clone();
        e.sort_unstable();
        e.dedup();
        e
    }

    pub fn spectral(&self) -> SpectralDecomposition {
        let dim = self.diagonal.len();
        let energies = self.distinct_energies();
        let projectors = energies
            .iter()
            .map(|&e| {
                let mut p = CMat::zeros(dim, dim);
                for i in 0..dim {
                    if self.diagonal[i] == e {
                        p[(i, i)] = C_ONE;
                    }
                }
                p
            })
            .collect();
        SpectralDecomposition {
            energies: energies.into_iter().map(|e| e as f64).collect(),
            projectors,
        }
    }

    /// Exact evolution via phases e^{-i(e_a - e_b)t} on the matrix entries.
    pub fn evolve(&self, rho: &DensityOperator, t: f64) -> Result<DensityOperator> {
        if rho.dim() != self.diagonal.len() {
            return Err(Error::DimensionMismatch("state/Hamiltonian dimensions differ".into()));
        }
        if t == 0.0 {
            return Ok(rho.clone());
        }
        let dim = rho.dim();
        let mat = CMat::from_fn(dim, dim, |a, b| {
            let phase = -(self.diagonal[a] - self.diagonal[b]) as f64 * t;
            rho.matrix()[(a, b)] * Complex64::from_polar(1.0, phase)
        });
        Ok(DensityOperator::from_matrix_unchecked(mat))
    }
}

/// Spectral resolution H = Σ_e e Π_e with distinct energies.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub energies: Vec<f64>,
    pub projectors: Vec<CMat>,
}

impl SpectralDecomposition {
    /// Group the eigendecomposition of a Hermitian matrix by eigenvalue,
    /// merging eigenvalues closer than `tol`.
    pub fn from_hermitian(h: &CMat, tol: f64) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::DimensionMismatch("Hamiltonian must be square".into()));
        }
        let dim = h.rows();
        let decomp = eigh(h);
        let mut energies = Vec::new();
        let mut projectors: Vec<CMat> = Vec::new();
        let mut group: Vec<usize> = Vec::new();
        let flush = |group: &mut Vec<usize>, energies: &mut Vec<f64>, projectors: &mut Vec<CMat>| {
            if group.is_empty() {
                return;
            }
            let mean = group.iter().map(|&i| decomp.values[i]).sum::<f64>() / group.len() as f64;
            let mut p = CMat::zeros(dim, dim);
            for &i in group.iter() {
                let col = decomp.vectors.column(i);
                for a in 0..dim {
                    for b in 0..dim {
                        p[(a, b)] += col[a] * col[b].conj();
                    }
                }
            }
            energies.push(mean);
            projectors.push(p);
            group.clear();
        };
        for i in 0..dim {
            if let Some(&last) = group.last() {
                if (decomp.values[i] - decomp.values[last]).abs() > tol {
                    flush(&mut group, &mut energies, &mut projectors);
                }
            }
            group.push(i);
        }
        flush(&mut group, &mut energies, &mut projectors);
        Ok(SpectralDecomposition { energies, projectors })
    }

    pub fn evolve(&self, rho: &DensityOperator, t: f64) -> Result<DensityOperator> {
        let dim = rho.dim();
        if self.projectors.first().map(|p| p.rows()) != Some(dim) {
            return Err(Error::DimensionMismatch("state/decomposition dimensions differ".into()));
        }
        if t == 0.0 {
            return Ok(rho.clone());
        }
        let mut out = CMat::zeros(dim, dim);
        for (ea, pa) in self.energies.iter().zip(self.projectors.iter()) {
            let left = pa.matmul(rho.matrix());
            for (eb, pb) in self.energies.iter().zip(self.projectors.iter()) {
                let phase = Complex64::from_polar(1.0, -(ea - eb) * t);
                out.add_assign_scaled(&left.matmul(pb), phase);
            }
        }
        Ok(DensityOperator::from_matrix_unchecked(out))
    }
}

/// U ρ U† for a unitary U: the image of a valid state under conjugation.
pub fn conjugate_state(u: &CMat, rho: &DensityOperator) -> Result<DensityOperator> {
    if !u.is_square() || u.rows() != rho.dim() {
        return Err(Error::DimensionMismatch("unitary/state dimensions differ".into()));
    }
    Ok(DensityOperator::from_matrix_unchecked(
        u.matmul(rho.matrix()).matmul(&u.dagger()),
    ))
}

/// Unitary conjugation ρ(t) = e^{-iHt} ρ e^{iHt} via eigendecomposition.
pub fn evolve(h: &CMat, rho: &DensityOperator, t: f64) -> Result<DensityOperator> {
    if !h.is_square() || h.rows() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "Hamiltonian {}x{} vs state dim {}",
            h.rows(),
            h.cols(),
            rho.dim()
        )));
    }
    if t == 0.0 {
        return Ok(rho.clone());
    }
    let decomp = eigh(h);
    let dim = h.rows();
    let phases: Vec<Complex64> =
        decomp.values.iter().map(|&e| Complex64::from_polar(1.0, -e * t)).collect();
    // U = V diag(phases) V†
    let mut u = CMat::zeros(dim, dim);
    for k in 0..dim {
        let col = decomp.vectors.column(k);
        let ph = phases[k];
        for a in 0..dim {
            let va = col[a] * ph;
            for b in 0..dim {
                u[(a, b)] += va * col[b].conj();
            }
        }
    }
    let out = u.matmul(rho.matrix()).matmul(&u.dagger());
    Ok(DensityOperator::from_matrix_unchecked(out))
}

/// Exact operator-valued Fourier coefficients of t ↦ e^{-iHt} ρ0 e^{iHt} for
/// an integer-spectrum H: α_k = Σ_{e'-e=k} Π_e ρ0 Π_{e'}, so that
/// ρ(t) = Σ_k α_k e^{ikt} with k ∈ {−e_max, …, e_max}.
pub fn fourier_coefficients(
    h: &IntegerSpectrumHamiltonian,
    rho0: &DensityOperator,
) -> Result<ParametrizedOperator> {
    if rho0.dim() != h.diagonal().len() {
        return Err(Error::DimensionMismatch("state/Hamiltonian dimensions differ".into()));
    }
    let basis = BasisSystem::fourier(h.e_max() as u32);
    let dim = rho0.dim();
    let coeffs: Vec<CMat> = basis
        .labels()
        .iter()
        .map(|&k| {
            CMat::from_fn(dim, dim, |a, b| {
                if h.diagonal()[b] - h.diagonal()[a] == k {
                    rho0.matrix()[(a, b)]
                } else {
                    C_ZERO
                }
            })
        })
        .collect();
    ParametrizedOperator::new(basis.clone(), basis.labels().to_vec(), coeffs)
}

/// Exact rescaled-Chebyshev coefficients of t ↦ e^{-iHt} ρ0 e^{iHt} on
/// t ∈ [−1, 1] for a dense Hermitian H, truncated at `cutoff`.
pub fn chebyshev_coefficients(
    h: &CMat,
    rho0: &DensityOperator,
    cutoff: usize,
) -> Result<ParametrizedOperator> {
    let spec = SpectralDecomposition::from_hermitian(h, 1e-9)?;
    if spec.projectors[0].rows() != rho0.dim() {
        return Err(Error::DimensionMismatch("state/Hamiltonian dimensions differ".into()));
    }
    let dim = rho0.dim();
    let mut coeffs = vec![CMat::zeros(dim, dim); cutoff + 1];
    for (ea, pa) in spec.energies.iter().zip(spec.projectors.iter()) {
        let left = pa.matmul(rho0.matrix());
        for (eb, pb) in spec.energies.iter().zip(spec.projectors.iter()) {
            let omega = ea - eb;
            let weights = chebyshev_coeffs_of_phase(omega, cutoff);
            let block = left.matmul(pb);
            for (k, w) in weights.iter().enumerate() {
                coeffs[k].add_assign_scaled(&block, *w);
            }
        }
    }
    let basis = BasisSystem::chebyshev(cutoff + 1);
    ParametrizedOperator::new(basis.clone(), basis.labels().to_vec(), coeffs)
}

/// Pure state whose energy populations follow a Gaussian profile
/// p_e ∝ exp(−(e−e0)²/(2σ²)), with Haar-random directions inside each
/// eigenspace. Returns the state and the smallest τ with
/// Tr[ρ0 Π_e] ≤ τ exp(−(e−e0)²/(2σ²)) for every energy e.
pub fn prepare_subgaussian_state(
    h: &IntegerSpectrumHamiltonian,
    e0: f64,
    sigma: f64,
    rng: &mut impl Rng,
) -> Result<(DensityOperator, f64)> {
    if sigma <= 0.0 {
        return Err(Error::InvalidArgument("sigma must be positive".into()));
    }
    let energies = h.distinct_energies();
    if energies.is_empty() {
        return Err(Error::InvalidArgument("empty spectrum".into()));
    }
    let weights: Vec<f64> = energies
        .iter()
        .map(|&e| (-0.5 * (e as f64 - e0).powi(2) / (sigma * sigma)).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    if z <= 0.0 {
        return Err(Error::InvalidArgument("population weights underflowed to zero".into()));
    }
    let dim = h.diagonal().len();
    let mut psi = vec![C_ZERO; dim];
    for (&e, &w) in energies.iter().zip(weights.iter()) {
        let p = w / z;
        if p == 0.0 {
            continue;
        }
        let idx: Vec<usize> = (0..dim).filter(|&i| h.diagonal()[i] == e).collect();
        let dir = haar_unit_vector(idx.len(), rng);
        for (slot, amp) in idx.iter().zip(dir.iter()) {
            psi[*slot] = amp * p.sqrt();
        }
    }
    let state = DensityOperator::pure(&psi)?;
    let mut tau = 0.0f64;
    for (&e, &w) in energies.iter().zip(weights.iter()) {
        let p = w / z;
        if p > 0.0 {
            tau = tau.max(p * (0.5 * (e as f64 - e0).powi(2) / (sigma * sigma)).exp());
        }
    }
    Ok((state, tau))
}

/// Partial trace keeping the listed qubits (ascending order, qubit 0 is the
/// leftmost tensor factor).
pub fn partial_trace(x: &CMat, n_qubits: usize, keep: &[usize]) -> Result<CMat> {
    if x.rows() != 1 << n_qubits || !x.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, expected 2^{n_qubits}",
            x.rows(),
            x.cols()
        )));
    }
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != keep.len() || keep.iter().any(|&q| q >= n_qubits) {
        return Err(Error::InvalidArgument("keep set must be a subset of qubit indices".into()));
    }
    let traced: Vec<usize> = (0..n_qubits).filter(|q| !sorted.contains(q)).collect();
    let kd = 1usize << sorted.len();
    let td = 1usize << traced.len();
    let place = |kept_bits: usize, traced_bits: usize| -> usize {
        let mut idx = 0usize;
        for (pos, &q) in sorted.iter().enumerate() {
            let bit = (kept_bits >> (sorted.len() - 1 - pos)) & 1;
            idx |= bit << (n_qubits - 1 - q);
        }
        for (pos, &q) in traced.iter().enumerate() {
            let bit = (traced_bits >> (traced.len() - 1 - pos)) & 1;
            idx |= bit << (n_qubits - 1 - q);
        }
        idx
    };
    let mut out = CMat::zeros(kd, kd);
    for a in 0..kd {
        for b in 0..kd {
            let mut acc = C_ZERO;
            for t in 0..td {
                acc += x[(place(a, t), place(b, t))];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Real 2n×2n skew-symmetric coupling matrix of a quadratic Majorana
/// Hamiltonian H = i Σ_ij F_ij γ_i γ_j. Indices 0..n are "position",
/// n..2n "momentum" Majoranas.
#[derive(Clone, Debug, PartialEq)]
pub struct FermionicGaussianHamiltonian {
    n_modes: usize,
    f: Vec<f64>, // row-major 2n×2n
}

impl FermionicGaussianHamiltonian {
    pub fn new(n_modes: usize, f: Vec<f64>) -> Result<Self> {
        let m = 2 * n_modes;
        if f.len() != m * m {
            return Err(Error::DimensionMismatch(format!(
                "F has {} entries, expected {}",
                f.len(),
                m * m
            )));
        }
        for i in 0..m {
            for j in 0..m {
                if f[i * m + j] != -f[j * m + i] {
                    return Err(Error::InvalidArgument(
                        "F must satisfy F = -F^T exactly".into(),
                    ));
                }
            }
        }
        Ok(FermionicGaussianHamiltonian { n_modes, f })
    }

    /// Random skew-symmetric F with entries uniform in [−j, j].
    pub fn random(n_modes: usize, j: f64, rng: &mut impl Rng) -> Self {
        let m = 2 * n_modes;
        let mut f = vec![0.0f64; m * m];
        for a in 0..m {
            for b in (a + 1)..m {
                let v = rng.gen_range(-j..=j);
                f[a * m + b] = v;
                f[b * m + a] = -v;
            }
        }
        FermionicGaussianHamiltonian { n_modes, f }
    }

    /// Normal-form Hamiltonian: each mode's position Majorana couples only to
    /// its own momentum Majorana with frequency `freqs[j]`.
    pub fn normal_form(freqs: &[f64]) -> Self {
        let n = freqs.len();
        let m = 2 * n;
        let mut f = vec![0.0f64; m * m];
        for (j, &w) in freqs.iter().enumerate() {
            f[j * m + (n + j)] = w;
            f[(n + j) * m + j] = -w;
        }
        FermionicGaussianHamiltonian { n_modes: n, f }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.f[i * 2 * self.n_modes + j]
    }

    /// Interaction strength J = max |F_ij|.
    pub fn interaction_strength(&self) -> f64 {
        self.f.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Frequencies f_j ≥ 0 with ±i f_j the eigenvalues of F, ascending.
    pub fn mode_frequencies(&self) -> Vec<f64> {
        let m = 2 * self.n_modes;
        let if_mat = CMat::from_fn(m, m, |i, j| Complex64::new(0.0, self.entry(i, j)));
        let eigs = eigh(&if_mat).values; // ±f_j, ascending
        eigs[self.n_modes..].iter().map(|&v| v.max(0.0)).collect()
    }

    /// Single-particle energies λ_j = 2 f_j under the {γ,γ} = 2δ Majorana
    /// normalization; the dense spectrum is { Σ_j ± λ_j }.
    pub fn mode_energies(&self) -> Vec<f64> {
        self.mode_frequencies().into_iter().map(|f| 2.0 * f).collect()
    }

    /// All 2^n signed sums of the mode energies, ascending.
    pub fn many_body_spectrum(&self) -> Vec<f64> {
        let lam = self.mode_energies();
        let n = self.n_modes;
        let mut spec: Vec<f64> = (0..(1usize << n))
            .map(|mask| {
                lam.iter()
                    .enumerate()
                    .map(|(j, &l)| if (mask >> j) & 1 == 1 { l } else { -l })
                    .sum()
            })
            .collect();
        spec.sort_by(|a, b| a.partial_cmp(b).unwrap());
        spec
    }

    /// Largest evolution frequency 2‖H‖_∞ = 2‖F‖_nuclear; at most 2·(2n)²J...
    /// reported alongside the printed bound elsewhere.
    pub fn max_frequency(&self) -> f64 {
        2.0 * self.mode_energies().iter().sum::<f64>()
    }

    /// True when position and momentum sectors only couple within a mode
    /// (F_ij = 0 unless |i−j| = n), the particle-preserving normal-form shape.
    pub fn is_mode_diagonal(&self) -> bool {
        let n = self.n_modes;
        let m = 2 * n;
        for i in 0..m {
            for j in 0..m {
                let within_mode = (j >= n && j - n == i) || (i >= n && i - n == j);
                if !within_mode && self.entry(i, j) != 0.0 {
                    return false;
                }
            }
        }
        true
    }
}

/// The 2n Majorana operators γ_1..γ_2n as dense Pauli strings:
/// γ_j = Z^(j−1) X I…, γ_{n+j} = Z^(j−1) Y I…; {γ_i, γ_j} = 2δ_ij.
pub fn majorana_operators(n_modes: usize) -> Vec<CMat> {
    let n = n_modes;
    let build = |site: usize, head: PauliOp| -> CMat {
        let mut ops = vec![PauliOp::I; n];
        for q in 0..site {
            ops[q] = PauliOp::Z;
        }
        ops[site] = head;
        crate::pauli::PauliWord(ops).dense()
    };
    let mut out = Vec::with_capacity(2 * n);
    for j in 0..n {
        out.push(build(j, PauliOp::X));
    }
    for j in 0..n {
        out.push(build(j, PauliOp::Y));
    }
    out
}

/// Dense qubit Hamiltonian H = i Σ_ij F_ij γ_i γ_j.
pub fn jordan_wigner(hf: &FermionicGaussianHamiltonian) -> Result<CMat> {
    jordan_wigner_with_limit(hf, DENSE_MODE_LIMIT)
}

pub fn jordan_wigner_with_limit(
    hf: &FermionicGaussianHamiltonian,
    limit: usize,
) -> Result<CMat> {
    if hf.n_modes() > limit {
        return Err(Error::DenseLimit { requested: hf.n_modes(), limit });
    }
    let n = hf.n_modes();
    let dim = 1usize << n;
    let gammas = majorana_operators(n);
    let mut h = CMat::zeros(dim, dim);
    for i in 0..2 * n {
        for j in 0..2 * n {
            let fij = hf.entry(i, j);
            if fij == 0.0 {
                continue;
            }
            let prod = gammas[i].matmul(&gammas[j]);
            h.add_assign_scaled(&prod, Complex64::new(0.0, fij));
        }
    }
    Ok(h.hermitian_part())
}

/// X^⊗n as a dense matrix.
pub fn x_all(n_qubits: usize) -> CMat {
    let mut ops = vec![PauliOp::X; n_qubits];
    ops.truncate(n_qubits);
    crate::pauli::PauliWord(ops).dense()
}

/// Unitary V with V H V† = −H for the Jordan-Wigner image of a fermionic
/// Gaussian Hamiltonian. For mode-diagonal F (the particle-preserving
/// normal-form shape) V = X^⊗n directly; otherwise V = W† X^⊗n W where W
/// rotates H into its normal form.
pub fn time_reversal_conjugation(hf: &FermionicGaussianHamiltonian) -> Result<CMat> {
    let n = hf.n_modes();
    if hf.is_mode_diagonal() {
        return Ok(x_all(n));
    }
    let h = jordan_wigner(hf)?;
    let normal = FermionicGaussianHamiltonian::normal_form(&hf.mode_frequencies());
    let h_tilde = jordan_wigner(&normal)?;
    let u = eigh(&h).vectors;
    let v_tilde = eigh(&h_tilde).vectors;
    let w = v_tilde.matmul(&u.dagger());
    let v = w.dagger().matmul(&x_all(n)).matmul(&w);
    // the construction is exact up to eigensolver error; verify
    let conj = v.matmul(&h).matmul(&v.dagger());
    let dev = (&conj + &h).frobenius_norm();
    if dev > 1e-8 * (1.0 + h.frobenius_norm()) {
        return Err(Error::GuaranteeFailed(format!(
            "time-reversal conjugation missed -H by {dev:.3e}"
        )));
    }
    Ok(v)
}

/// Both sides of the cross-term bound ‖Π ρ Π'‖₁ ≤ √(r ‖ΠρΠ‖₁ ‖Π'ρΠ'‖₁)
/// for orthogonal projectors, r = min rank.
pub fn projector_cross_term_check(
    rho: &DensityOperator,
    p1: &CMat,
    p2: &CMat,
) -> Result<(f64, f64)> {
    if p1.rows() != rho.dim() || p2.rows() != rho.dim() || !p1.is_square() || !p2.is_square() {
        return Err(Error::DimensionMismatch("projector dimensions differ from state".into()));
    }
    let overlap = p1.matmul(p2).frobenius_norm();
    if overlap > 1e-10 * (1.0 + p1.frobenius_norm() * p2.frobenius_norm()) {
        return Err(Error::NotOrthogonal(overlap));
    }
    let r1 = p1.trace().re.round().max(0.0);
    let r2 = p2.trace().re.round().max(0.0);
    let r = r1.min(r2);
    if r == 0.0 {
        return Ok((0.0, 0.0));
    }
    let lhs = trace_norm(&p1.matmul(rho.matrix()).matmul(p2));
    let d1 = trace_norm(&p1.matmul(rho.matrix()).matmul(p1));
    let d2 = trace_norm(&p2.matmul(rho.matrix()).matmul(p2));
    Ok((lhs, (r * d1 * d2).sqrt()))
}
