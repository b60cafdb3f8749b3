//! Dense complex matrices and the small-scale decompositions used everywhere
//! else: a cyclic Jacobi eigensolver for Hermitian matrices and a one-sided
//! Jacobi SVD. Both are accurate to close to machine precision at the matrix
//! sizes this crate works with (dimensions up to a few hundred).

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

pub const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const C_ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const C_I: Complex64 = Complex64::new(0.0, 1.0);

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![C_ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C_ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        CMat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Matrix with the listed columns of `self`, in the given order.
    pub fn select_columns(&self, idx: &[usize]) -> CMat {
        CMat::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])])
    }

    pub fn dagger(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> CMat {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, a: Complex64) -> CMat {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * a).collect() }
    }

    pub fn scale_re(&self, a: f64) -> CMat {
        self.scale(Complex64::new(a, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn matmul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == C_ZERO {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, o) in dst.iter_mut().zip(orow.iter()) {
                    *d += aik * o;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v.iter()).map(|(a, x)| a * x).sum())
            .collect()
    }

    /// A† v without forming the adjoint.
    pub fn dagger_matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.rows, v.len(), "shape mismatch");
        let mut out = vec![C_ZERO; self.cols];
        for i in 0..self.rows {
            let vi = v[i];
            for (o, a) in out.iter_mut().zip(self.row(i).iter()) {
                *o += a.conj() * vi;
            }
        }
        out
    }

    /// Kronecker product; `self` is the left (most significant) factor.
    pub fn kron(&self, other: &CMat) -> CMat {
        let mut out = CMat::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == C_ZERO {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn add_assign_scaled(&mut self, other: &CMat, a: Complex64) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (d, o) in self.data.iter_mut().zip(other.data.iter()) {
            *d += a * o;
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in i..self.rows {
                if (self[(i, j)] - self[(j, i)].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn hermitian_part(&self) -> CMat {
        assert!(self.is_square());
        CMat::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// Column-stacked vectorization.
    pub fn vec_columns(&self) -> Vec<Complex64> {
        let mut v = Vec::with_capacity(self.rows * self.cols);
        for j in 0..self.cols {
            for i in 0..self.rows {
                v.push(self[(i, j)]);
            }
        }
        v
    }

    /// Inverse of [`CMat::vec_columns`] for square matrices.
    pub fn unvec_columns(v: &[Complex64], n: usize) -> CMat {
        assert_eq!(v.len(), n * n);
        CMat::from_fn(n, n, |i, j| v[j * n + i])
    }

    /// Hilbert-Schmidt inner product ⟨self, other⟩ = Tr[self† · other].
    pub fn hs_inner(&self, other: &CMat) -> Complex64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(other.data.iter()).map(|(a, b)| a.conj() * b).sum()
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(rhs.data.iter()).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(rhs.data.iter()).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        self.matmul(rhs)
    }
}

pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Eigendecomposition of a Hermitian matrix: A = V diag(values) V†,
/// eigenvalues ascending, eigenvectors in the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct EigH {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

/// Cyclic Jacobi eigensolver for Hermitian matrices. The input is
/// symmetrized first, so tiny Hermiticity violations are tolerated.
pub fn eigh(a: &CMat) -> EigH {
    assert!(a.is_square(), "eigh requires a square matrix");
    let n = a.rows();
    let mut m = a.hermitian_part();
    let mut v = CMat::identity(n);
    if n <= 1 {
        let values = if n == 1 { vec![m[(0, 0)].re] } else { vec![] };
        return EigH { values, vectors: v };
    }

    let scale = m.frobenius_norm().max(1e-300);
    let tol = 1e-15 * scale;
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let z = m[(p, q)];
                let r = z.norm();
                if r <= 1e-300 {
                    continue;
                }
                let apq_phase = z / r;
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                // rotation angle for the 2x2 block [[app, r],[r, aqq]]
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta >= 0.0 {
                    -1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sigma = t * c;
                let s = Complex64::new(sigma, 0.0) * apq_phase.conj();
                let s_conj = s.conj();

                // M <- U† M U with U = [[c, -s̄],[s, c]] acting on (p, q)
                for i in 0..n {
                    let mip = m[(i, p)];
                    let miq = m[(i, q)];
                    m[(i, p)] = mip * c + miq * s;
                    m[(i, q)] = mip * (-s_conj) + miq * c;
                }
                for j in 0..n {
                    let mpj = m[(p, j)];
                    let mqj = m[(q, j)];
                    m[(p, j)] = mpj * c + mqj * s_conj;
                    m[(q, j)] = mpj * (-s) + mqj * c;
                }
                m[(p, q)] = C_ZERO;
                m[(q, p)] = C_ZERO;
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * c + viq * s;
                    v[(i, q)] = vip * (-s_conj) + viq * c;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.partial_cmp(&m[(j, j)].re).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = v.select_columns(&order);
    EigH { values, vectors }
}

/// Thin singular value decomposition A = U diag(sigma) V†, singular values
/// descending. Computed with one-sided Jacobi rotations on the columns, which
/// resolves small singular values to high relative accuracy.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: CMat,
    pub sigma: Vec<f64>,
    pub v: CMat,
}

pub fn svd(a: &CMat) -> Svd {
    let m = a.rows();
    let n = a.cols();
    let mut w = a.clone();
    let mut v = CMat::identity(n);
    let scale = a.frobenius_norm().max(1e-300);

    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                // 2x2 Gram block of columns p and q
                let mut app = 0.0f64;
                let mut aqq = 0.0f64;
                let mut apq = C_ZERO;
                for i in 0..m {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    app += wp.norm_sqr();
                    aqq += wq.norm_sqr();
                    apq += wp.conj() * wq;
                }
                let r = apq.norm();
                if r <= 1e-30 * (app * aqq).sqrt().max(1e-300) {
                    continue;
                }
                let phase = apq / r;
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta >= 0.0 {
                    -1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sigma = t * c;
                let s = Complex64::new(sigma, 0.0) * phase.conj();
                let s_conj = s.conj();
                for i in 0..m {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    w[(i, p)] = wp * c + wq * s;
                    w[(i, q)] = wp * (-s_conj) + wq * c;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = vp * c + vq * s;
                    v[(i, q)] = vp * (-s_conj) + vq * c;
                }
                rotated = true;
            }
        }
        if !rotated {
            break;
        }
    }

    let mut norms: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| w[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());
    let w = w.select_columns(&order);
    let v = v.select_columns(&order);
    norms = order.iter().map(|&j| norms[j]).collect();

    let mut u = CMat::zeros(m, n);
    for j in 0..n {
        let nj = norms[j];
        if nj > 1e-300 * scale {
            for i in 0..m {
                u[(i, j)] = w[(i, j)] / nj;
            }
        }
    }
    Svd { u, sigma: norms, v }
}

/// Largest singular value.
pub fn spectral_norm(a: &CMat) -> f64 {
    if a.rows() == 0 || a.cols() == 0 {
        return 0.0;
    }
    svd(a).sigma[0]
}

/// Sum of singular values. Uses the eigenvalues directly when the matrix is
/// Hermitian.
pub fn trace_norm(a: &CMat) -> f64 {
    if a.rows() == 0 {
        return 0.0;
    }
    if a.is_square() && a.is_hermitian(1e-10 * a.max_abs().max(1e-300)) {
        eigh(a).values.iter().map(|l| l.abs()).sum()
    } else {
        svd(a).sigma.iter().sum()
    }
}

/// Relative cutoff under which singular values are treated as zero when
/// inverting.
pub const PINV_RANK_CUTOFF: f64 = 1e-10;

/// Moore-Penrose pseudo-inverse of an injective matrix, (A†A)⁻¹A†, computed
/// from the singular value decomposition. Rank deficiency relative to
/// [`PINV_RANK_CUTOFF`] is an error carrying the offending singular value.
pub fn pseudo_inverse(a: &CMat) -> Result<CMat> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::InvalidArgument("pseudo_inverse of an empty matrix".into()));
    }
    if a.rows() < a.cols() {
        return Err(Error::InvalidArgument(format!(
            "pseudo_inverse requires at least as many rows as columns, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let Svd { u, sigma, v } = svd(a);
    let smax = sigma[0];
    let smin = *sigma.last().unwrap();
    if !(smin > PINV_RANK_CUTOFF * smax) || smax == 0.0 {
        return Err(Error::RankDeficient { sigma_min: smin, sigma_max: smax });
    }
    // A⁺ = V Σ⁻¹ U†
    let mut vs = v;
    for j in 0..vs.cols() {
        let inv = Complex64::new(1.0 / sigma[j], 0.0);
        for i in 0..vs.rows() {
            vs[(i, j)] *= inv;
        }
    }
    Ok(vs.matmul(&u.dagger()))
}

/// Least-squares solution argmin ‖Ax − b‖₂ for injective A.
pub fn least_squares(a: &CMat, b: &[Complex64]) -> Result<Vec<Complex64>> {
    let pinv = pseudo_inverse(a)?;
    Ok(pinv.matvec(b))
}
