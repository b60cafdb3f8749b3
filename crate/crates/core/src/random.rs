//! Seeded random constructions used by the simulator, the audit suite and
//! synthetic test instances.

use crate::linalg::{vec_norm, CMat};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The crate-wide seeded generator.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent stream for a sub-task, so parallel workers do not
/// share generator state.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn standard_normal(rng: &mut impl Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn complex_normal(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(standard_normal(rng), standard_normal(rng))
}

/// Haar-random unit vector of the given dimension.
pub fn haar_unit_vector(dim: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..dim).map(|_| complex_normal(rng)).collect();
        let n = vec_norm(&v);
        if n > 1e-12 {
            return v.into_iter().map(|z| z / n).collect();
        }
    }
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_normal(rng))
}

pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> CMat {
    random_matrix(dim, dim, rng).hermitian_part()
}

/// Haar-distributed unitary via Gram-Schmidt on a Gaussian matrix.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> CMat {
    let g = random_matrix(dim, dim, rng);
    let mut cols: Vec<Vec<Complex64>> = (0..dim).map(|j| g.column(j)).collect();
    for j in 0..dim {
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for k in 0..j {
                let proj: Complex64 =
                    cols[k].iter().zip(cols[j].iter()).map(|(a, b)| a.conj() * b).sum();
                let prev = cols[k].clone();
                for (c, p) in cols[j].iter_mut().zip(prev.iter()) {
                    *c -= proj * p;
                }
            }
        }
        let n = vec_norm(&cols[j]);
        for c in cols[j].iter_mut() {
            *c /= n;
        }
    }
    CMat::from_fn(dim, dim, |i, j| cols[j][i])
}

/// Random full-rank density matrix, GG†/Tr[GG†].
pub fn random_density_matrix(dim: usize, rng: &mut impl Rng) -> CMat {
    let g = random_matrix(dim, dim, rng);
    let p = g.matmul(&g.dagger());
    let t = p.trace().re;
    p.scale_re(1.0 / t)
}

/// Pair of orthogonal projectors with the given ranks, built from disjoint
/// column blocks of a Haar unitary.
pub fn random_orthogonal_projectors(
    dim: usize,
    rank1: usize,
    rank2: usize,
    rng: &mut impl Rng,
) -> (CMat, CMat) {
    assert!(rank1 + rank2 <= dim, "ranks exceed dimension");
    let u = random_unitary(dim, rng);
    let mut p1 = CMat::zeros(dim, dim);
    let mut p2 = CMat::zeros(dim, dim);
    for j in 0..rank1 {
        let col = u.column(j);
        for a in 0..dim {
            for b in 0..dim {
                p1[(a, b)] += col[a] * col[b].conj();
            }
        }
    }
    for j in rank1..rank1 + rank2 {
        let col = u.column(j);
        for a in 0..dim {
            for b in 0..dim {
                p2[(a, b)] += col[a] * col[b].conj();
            }
        }
    }
    (p1, p2)
}
