//! Scalar compressed sensing: iterative hard thresholding, hard thresholding
//! pursuit, pseudo-inverse solves and brute-force certification of the
//! restricted isometry property for small matrices.
//!
//! The greedy solvers expect the measurement matrix in its RIP-normalized
//! form (A/√M for a sampling matrix with M rows): the gradient step uses a
//! unit step size, which converges when the matrix is a near-isometry on
//! sparse vectors.

use crate::error::{Error, Result};
use crate::linalg::{eigh, spectral_norm, vec_norm, CMat, C_ZERO};
use crate::util::{binomial, combinations};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use crate::linalg::{least_squares, pseudo_inverse};

/// Largest number of column supports the brute-force RIP scan will visit.
pub const RIP_SCAN_LIMIT: u128 = 1_000_000;

pub const DEFAULT_MAX_ITERS: usize = 1000;
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Keep the s entries largest in magnitude, zeroing the rest. Ties break
/// towards the lowest index so results are reproducible.
pub fn hard_threshold(v: &[Complex64], s: usize) -> Vec<Complex64> {
    let support = top_s_indices(v, s);
    let mut out = vec![C_ZERO; v.len()];
    for idx in support {
        out[idx] = v[idx];
    }
    out
}

/// Indices of the s largest-magnitude entries, sorted ascending; ties break
/// towards the lowest index.
pub fn top_s_indices(v: &[Complex64], s: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| {
        v[b].norm_sqr()
            .partial_cmp(&v[a].norm_sqr())
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut keep: Vec<usize> = order.into_iter().take(s.min(v.len())).collect();
    keep.sort_unstable();
    keep
}

/// Outcome of a greedy sparse solve.
#[derive(Clone, Debug)]
pub struct SparseSolution {
    pub coefficients: Vec<Complex64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub support: Vec<usize>,
}

fn residual(a: &CMat, x: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let ax = a.matvec(x);
    b.iter().zip(ax.iter()).map(|(bi, ai)| bi - ai).collect()
}

/// Iterative hard thresholding: c ← T_s[c + A†(f − Ac)]. Keeps the best
/// iterate seen, and stops on residual stagnation or `max_iters`.
pub fn iht(
    a: &CMat,
    f_hat: &[Complex64],
    s: usize,
    max_iters: usize,
    tol: f64,
) -> Result<SparseSolution> {
    if f_hat.len() != a.rows() {
        return Err(Error::DimensionMismatch("observation length differs from rows".into()));
    }
    if s > a.cols() {
        return Err(Error::InvalidArgument(format!("sparsity {s} exceeds {} columns", a.cols())));
    }
    let mut c = vec![C_ZERO; a.cols()];
    let mut best = c.clone();
    let mut best_res = vec_norm(f_hat);
    let mut last_res = best_res;
    let mut iterations = 0;
    for it in 0..max_iters {
        iterations = it + 1;
        let r = residual(a, &c, f_hat);
        let grad = a.dagger_matvec(&r);
        let stepped: Vec<Complex64> = c.iter().zip(grad.iter()).map(|(ci, gi)| ci + gi).collect();
        c = hard_threshold(&stepped, s);
        let res = vec_norm(&residual(a, &c, f_hat));
        if res < best_res {
            best_res = res;
            best = c.clone();
        }
        if (last_res - res).abs() <= tol * (1.0 + last_res) {
            break;
        }
        last_res = res;
    }
    let support = best.iter().enumerate().filter(|(_, v)| **v != C_ZERO).map(|(i, _)| i).collect();
    Ok(SparseSolution { coefficients: best, residual_norm: best_res, iterations, support })
}

/// Hard thresholding pursuit: the IHT support step followed by an exact
/// least-squares solve on the selected support; terminates when the support
/// repeats.
pub fn htp(
    a: &CMat,
    f_hat: &[Complex64],
    s: usize,
    max_iters: usize,
    tol: f64,
) -> Result<SparseSolution> {
    htp_with_init(a, f_hat, s, max_iters, tol, None)
}

pub fn htp_with_init(
    a: &CMat,
    f_hat: &[Complex64],
    s: usize,
    max_iters: usize,
    tol: f64,
    init: Option<&[Complex64]>,
) -> Result<SparseSolution> {
    if f_hat.len() != a.rows() {
        return Err(Error::DimensionMismatch("observation length differs from rows".into()));
    }
    if s > a.cols() {
        return Err(Error::InvalidArgument(format!("sparsity {s} exceeds {} columns", a.cols())));
    }
    let mut c = match init {
        Some(x) => {
            if x.len() != a.cols() {
                return Err(Error::DimensionMismatch("init length differs from columns".into()));
            }
            x.to_vec()
        }
        None => vec![C_ZERO; a.cols()],
    };
    let mut best = vec![C_ZERO; a.cols()];
    let mut best_res = vec_norm(f_hat);
    let mut prev_support: Vec<usize> = Vec::new();
    let mut iterations = 0;
    for it in 0..max_iters {
        iterations = it + 1;
        let r = residual(a, &c, f_hat);
        let grad = a.dagger_matvec(&r);
        let stepped: Vec<Complex64> = c.iter().zip(grad.iter()).map(|(ci, gi)| ci + gi).collect();
        let support = top_s_indices(&stepped, s);
        let a_s = a.select_columns(&support);
        let sol = least_squares(&a_s, f_hat)?;
        c = vec![C_ZERO; a.cols()];
        for (pos, &idx) in support.iter().enumerate() {
            c[idx] = sol[pos];
        }
        let res = vec_norm(&residual(a, &c, f_hat));
        if res < best_res {
            best_res = res;
            best = c.clone();
        }
        if support == prev_support || res <= tol {
            break;
        }
        prev_support = support;
    }
    let support = best.iter().enumerate().filter(|(_, v)| **v != C_ZERO).map(|(i, _)| i).collect();
    Ok(SparseSolution { coefficients: best, residual_norm: best_res, iterations, support })
}

/// How a RIP constant was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RipMethod {
    BruteForce,
    BoundOnly,
}

/// Certified restricted-isometry constant of order s.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RipCertificate {
    pub order: usize,
    pub delta: f64,
    pub method: RipMethod,
}

/// Exact Δ_s of a (normalized) matrix: the largest spectral deviation
/// ‖I_S − A_S†A_S‖_∞ over all (D choose s) column supports. Refuses scans
/// larger than [`RIP_SCAN_LIMIT`].
pub fn rip_constant_bruteforce(a: &CMat, s: usize) -> Result<RipCertificate> {
    let d = a.cols();
    if s == 0 || s > d {
        return Err(Error::InvalidArgument(format!("order {s} out of range for {d} columns")));
    }
    let count = binomial(d, s);
    if count > RIP_SCAN_LIMIT {
        return Err(Error::CombinatorialGuard { supports: count, limit: RIP_SCAN_LIMIT });
    }
    // the full Gram is computed once; every support then reads off an s×s
    // principal submatrix, so the scan cost is independent of the row count
    let gram = a.dagger().matmul(a);
    let supports = combinations(d, s);
    let delta = supports
        .par_iter()
        .map(|support| {
            let sub = CMat::from_fn(s, s, |i, j| gram[(support[i], support[j])]);
            let eigs = eigh(&sub).values;
            let lo = 1.0 - eigs.first().unwrap();
            let hi = eigs.last().unwrap() - 1.0;
            lo.max(hi)
        })
        .reduce(|| 0.0f64, f64::max);
    Ok(RipCertificate { order: s, delta, method: RipMethod::BruteForce })
}

/// Both sides of the spillover bound ‖A_S⁺ A_{S'}‖_∞ ≤ Δ_{2s}/(1 − Δ_{2s})
/// for disjoint supports of cardinality at most s, on a normalized matrix.
pub fn spillover_check(a: &CMat, s_set: &[usize], s_prime: &[usize]) -> Result<(f64, f64)> {
    if s_set.iter().any(|i| s_prime.contains(i)) {
        return Err(Error::InvalidArgument("supports must be disjoint".into()));
    }
    let s = s_set.len().max(s_prime.len());
    let cert = rip_constant_bruteforce(a, (2 * s).min(a.cols()))?;
    if cert.delta >= 1.0 {
        return Err(Error::GuaranteeFailed(format!(
            "Δ_(2s) = {:.3} ≥ 1; the spillover bound needs a near-isometry",
            cert.delta
        )));
    }
    let a_s = a.select_columns(s_set);
    let a_sp = a.select_columns(s_prime);
    let lhs = spectral_norm(&pseudo_inverse(&a_s)?.matmul(&a_sp));
    let rhs = cert.delta / (1.0 - cert.delta);
    Ok((lhs, rhs))
}

/// ‖A_S† A_{S'}‖_∞ for disjoint supports; bounded by Δ_{2s}.
pub fn gram_cross_norm(a: &CMat, s_set: &[usize], s_prime: &[usize]) -> f64 {
    let a_s = a.select_columns(s_set);
    let a_sp = a.select_columns(s_prime);
    spectral_norm(&a_s.dagger().matmul(&a_sp))
}
