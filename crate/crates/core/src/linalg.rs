//! Dense symmetric and generalized-symmetric eigensolvers.
//!
//! The standard problem is solved by Householder reduction to tridiagonal
//! form followed by the implicit QL iteration with Wilkinson shifts. The
//! generalized problem `H c = E S c` is reduced to standard form either
//! through the Cholesky factor of `S` or, when `S` is numerically singular,
//! by canonical orthogonalization.

use crate::error::{Error, Result};

/// Dense real symmetric matrix.
///
/// Storage is a full row-major square, but every mutation writes both
/// triangles, so `get(i, j) == get(j, i)` holds bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    /// Builds a matrix by evaluating `f(i, j)` on the lower triangle `j <= i`
    /// and mirroring.
    pub fn from_lower_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..=i {
                let v = f(i, j);
                m.data[i * dim + j] = v;
                m.data[j * dim + i] = v;
            }
        }
        m
    }

    /// Builds a matrix from dense rows, rejecting anything that is not square
    /// and exactly symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidArgument("matrix rows must form a square".into()));
        }
        for i in 0..dim {
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::InvalidArgument(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self {
            dim,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    /// Takes ownership of a row-major buffer, averaging the two triangles.
    pub(crate) fn from_row_major_symmetrized(dim: usize, mut data: Vec<f64>) -> Self {
        assert_eq!(data.len(), dim * dim);
        for i in 0..dim {
            for j in 0..i {
                let v = 0.5 * (data[i * dim + j] + data[j * dim + i]);
                data[i * dim + j] = v;
                data[j * dim + i] = v;
            }
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.dim + j] = value;
        self.data[j * self.dim + i] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        (0..self.dim).map(|i| dot(self.row(i), x)).collect()
    }

    /// `x^T A y`
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.matvec(y))
    }

    /// Returns `D A D` for the diagonal matrix `D = diag(scale)`.
    pub fn congruence_diag(&self, scale: &[f64]) -> Self {
        assert_eq!(scale.len(), self.dim);
        let n = self.dim;
        let mut data = self.data.clone();
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] *= scale[i] * scale[j];
            }
        }
        Self { dim: n, data }
    }

    fn check_finite(&self) -> Result<()> {
        if self.data.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidArgument("matrix has non-finite entries".into()))
        }
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    dim: usize,
    /// Eigenvector `k` occupies `vectors[k * dim..(k + 1) * dim]`.
    vectors: Vec<f64>,
}

impl EigenDecomposition {
    pub fn vector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.dim..(k + 1) * self.dim]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Overlap and Hamiltonian matrices of a generalized eigenproblem `H c = E S c`.
#[derive(Debug, Clone)]
pub struct MatrixPair {
    pub h: SymmetricMatrix,
    pub s: SymmetricMatrix,
}

impl MatrixPair {
    pub fn new(h: SymmetricMatrix, s: SymmetricMatrix) -> Result<Self> {
        if h.dim() != s.dim() {
            return Err(Error::InvalidArgument(format!(
                "H is {}x{} but S is {}x{}",
                h.dim(),
                h.dim(),
                s.dim(),
                s.dim()
            )));
        }
        Ok(Self { h, s })
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    /// Rescales both matrices so that `S` has unit diagonal. Returns the
    /// scaled pair and the diagonal factors `1/sqrt(S_ii)`.
    pub fn unit_diagonal(&self) -> Result<(MatrixPair, Vec<f64>)> {
        let mut scale = Vec::with_capacity(self.dim());
        for i in 0..self.dim() {
            let sii = self.s.get(i, i);
            if !(sii > 0.0) {
                return Err(Error::Conditioning { pivot: i, value: sii });
            }
            scale.push(1.0 / sii.sqrt());
        }
        let pair = MatrixPair {
            h: self.h.congruence_diag(&scale),
            s: self.s.congruence_diag(&scale),
        };
        Ok((pair, scale))
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Four accumulators let the compiler vectorize without reassociation.
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut sum = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        sum += a[i] * b[i];
    }
    sum
}

/// Total QL iteration budget per matrix dimension, as in LAPACK's `steqr`.
const QL_SWEEPS_PER_ROW: usize = 30;

/// Householder reduction of the full symmetric matrix `a` (row-major, n x n)
/// to tridiagonal form. Returns `(diagonal, subdiagonal)` with `e[i]` coupling
/// rows `i-1` and `i`. With `accumulate`, `a` is overwritten by the orthogonal
/// transformation (eigenvectors of the tridiagonal map to columns of it).
fn tridiagonalize(a: &mut [f64], n: usize, accumulate: bool) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        let (head, tail) = a.split_at_mut(i * n);
        let u = &mut tail[..i];
        if l > 0 {
            let scale: f64 = u.iter().map(|x| x.abs()).sum();
            if scale == 0.0 {
                e[i] = u[l];
            } else {
                for x in u.iter_mut() {
                    *x /= scale;
                    h += *x * *x;
                }
                let f = u[l];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                u[l] = f - g;
                let mut f = 0.0;
                for j in 0..i {
                    let row = &mut head[j * n..(j + 1) * n];
                    if accumulate {
                        row[i] = u[j] / h;
                    }
                    e[j] = dot(&row[..i], u) / h;
                    f += e[j] * u[j];
                }
                let hh = f / (h + h);
                for j in 0..i {
                    e[j] -= hh * u[j];
                }
                let q = &e[..i];
                for j in 0..i {
                    let (uj, qj) = (u[j], q[j]);
                    let row = &mut head[j * n..j * n + i];
                    for ((x, &qk), &uk) in row.iter_mut().zip(q).zip(u.iter()) {
                        *x -= uj * qk + qj * uk;
                    }
                }
            }
        } else {
            e[i] = u[l];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    if accumulate {
        for i in 0..n {
            if d[i] != 0.0 {
                for j in 0..i {
                    let g: f64 = (0..i).map(|k| a[i * n + k] * a[k * n + j]).sum();
                    for k in 0..i {
                        a[k * n + j] -= g * a[k * n + i];
                    }
                }
            }
            d[i] = a[i * n + i];
            a[i * n + i] = 1.0;
            for j in 0..i {
                a[j * n + i] = 0.0;
                a[i * n + j] = 0.0;
            }
        }
    } else {
        for i in 0..n {
            d[i] = a[i * n + i];
        }
    }
    (d, e)
}

/// Implicit QL on a tridiagonal matrix. `z`, when present, holds vectors as
/// rows and receives the same plane rotations.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let budget = QL_SWEEPS_PER_ROW * n.max(2);
    let mut iter = 0;
    for l in 0..n {
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > budget {
                return Err(Error::NumericalFailure(format!(
                    "QL iteration did not converge for eigenvalue {l}"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    let (lo, hi) = z.split_at_mut((i + 1) * n);
                    let zi = &mut lo[i * n..];
                    let zi1 = &mut hi[..n];
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let f = *b;
                        *b = s * *a + c * f;
                        *a = c * *a - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Full eigendecomposition of a symmetric matrix.
pub fn sym_eig(a: &SymmetricMatrix) -> Result<EigenDecomposition> {
    a.check_finite()?;
    let n = a.dim();
    if n == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let mut work = a.data.clone();
    let (mut d, mut e) = tridiagonalize(&mut work, n, true);
    // rows of zt are the columns of the accumulated transformation
    let mut zt = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            zt[j * n + i] = work[i * n + j];
        }
    }
    tridiagonal_ql(&mut d, &mut e, Some(&mut zt))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| d[x].total_cmp(&d[y]));
    let values = order.iter().map(|&k| d[k]).collect();
    let mut vectors = Vec::with_capacity(n * n);
    for &k in &order {
        vectors.extend_from_slice(&zt[k * n..(k + 1) * n]);
    }
    Ok(EigenDecomposition {
        values,
        dim: n,
        vectors,
    })
}

/// Eigenvalues only, ascending. Skips the O(n^3) transform accumulation.
pub fn sym_eigvals(a: &SymmetricMatrix) -> Result<Vec<f64>> {
    a.check_finite()?;
    let n = a.dim();
    if n == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let mut work = a.data.clone();
    let (mut d, mut e) = tridiagonalize(&mut work, n, false);
    tridiagonal_ql(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Lower-triangular Cholesky factor, row-major.
#[derive(Debug, Clone)]
pub struct Cholesky {
    dim: usize,
    l: Vec<f64>,
}

impl Cholesky {
    pub fn factor(s: &SymmetricMatrix) -> Result<Self> {
        let n = s.dim();
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let sum = s.get(i, j) - dot(&l[i * n..i * n + j], &l[j * n..j * n + j]);
                if i == j {
                    if !(sum > 0.0) || !sum.is_finite() {
                        return Err(Error::Conditioning { pivot: i, value: sum });
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Ok(Self { dim: n, l })
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.l[i * self.dim + i]).collect()
    }

    /// Solves `L X = B` in place for the row-major n x n block `b`.
    fn forward_rows(&self, b: &mut [f64]) {
        let n = self.dim;
        for i in 0..n {
            let (done, rest) = b.split_at_mut(i * n);
            let row = &mut rest[..n];
            for k in 0..i {
                let lik = self.l[i * n + k];
                if lik != 0.0 {
                    let xk = &done[k * n..(k + 1) * n];
                    for (r, &x) in row.iter_mut().zip(xk) {
                        *r -= lik * x;
                    }
                }
            }
            let inv = 1.0 / self.l[i * n + i];
            for r in row.iter_mut() {
                *r *= inv;
            }
        }
    }

    /// Solves `L^T x = y`.
    fn backward(&self, y: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut x = y.to_vec();
        for i in (0..n).rev() {
            let mut sum = x[i];
            for k in i + 1..n {
                sum -= self.l[k * n + i] * x[k];
            }
            x[i] = sum / self.l[i * n + i];
        }
        x
    }
}

/// Solves `H c = E S c` for symmetric `H` and positive definite `S`.
///
/// Eigenvalues ascend; each returned vector satisfies `c^T S c = 1`.
pub fn gen_sym_eig(pair: &MatrixPair) -> Result<EigenDecomposition> {
    pair.h.check_finite()?;
    pair.s.check_finite()?;
    let n = pair.dim();
    let chol = Cholesky::factor(&pair.s)?;
    // C = L^-1 H L^-T, formed as L^-1 (L^-1 H)^T
    let mut x = pair.h.data.clone();
    chol.forward_rows(&mut x);
    let mut xt = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            xt[j * n + i] = x[i * n + j];
        }
    }
    chol.forward_rows(&mut xt);
    let reduced = SymmetricMatrix::from_row_major_symmetrized(n, xt);
    let eig = sym_eig(&reduced)?;
    let mut vectors = Vec::with_capacity(n * n);
    for k in 0..n {
        vectors.extend(chol.backward(eig.vector(k)));
    }
    Ok(EigenDecomposition {
        values: eig.values,
        dim: n,
        vectors,
    })
}

/// Generalized solve by canonical orthogonalization: directions of `S` with
/// eigenvalue below `rel_cutoff * max` are projected out before the standard
/// eigenproblem is formed. Returns eigenpairs of the retained subspace.
pub fn gen_sym_eig_canonical(pair: &MatrixPair, rel_cutoff: f64) -> Result<EigenDecomposition> {
    pair.h.check_finite()?;
    let n = pair.dim();
    let seig = sym_eig(&pair.s)?;
    let smax = seig.values[n - 1];
    if !(smax > 0.0) {
        return Err(Error::Conditioning { pivot: n - 1, value: smax });
    }
    let keep: Vec<usize> = (0..n).filter(|&k| seig.values[k] > rel_cutoff * smax).collect();
    let r = keep.len();
    // X = U_k diag(s_k^-1/2), stored with column j as row j
    let mut x = vec![0.0; r * n];
    for (j, &k) in keep.iter().enumerate() {
        let f = 1.0 / seig.values[k].sqrt();
        for (dst, src) in x[j * n..(j + 1) * n].iter_mut().zip(seig.vector(k)) {
            *dst = f * src;
        }
    }
    let hx: Vec<Vec<f64>> = (0..r).map(|j| pair.h.matvec(&x[j * n..(j + 1) * n])).collect();
    let reduced = SymmetricMatrix::from_lower_fn(r, |i, j| dot(&x[i * n..(i + 1) * n], &hx[j]));
    let eig = sym_eig(&reduced)?;
    let mut vectors = Vec::with_capacity(r * n);
    for k in 0..r {
        let y = eig.vector(k);
        let mut c = vec![0.0; n];
        for (j, &yj) in y.iter().enumerate() {
            for (ci, xi) in c.iter_mut().zip(&x[j * n..(j + 1) * n]) {
                *ci += yj * xi;
            }
        }
        vectors.extend(c);
    }
    Ok(EigenDecomposition {
        values: eig.values,
        dim: n,
        vectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> SymmetricMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SymmetricMatrix::from_lower_fn(n, |_, _| rng.gen_range(-1.0..1.0))
    }

    fn random_spd(n: usize, seed: u64) -> SymmetricMatrix {
        let b = random_symmetric(n, seed);
        let mut m = SymmetricMatrix::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let v = dot(b.row(i), b.row(j)) + if i == j { n as f64 } else { 0.0 };
                m.set(i, j, v);
            }
        }
        m
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let eig = sym_eig(&SymmetricMatrix::identity(3)).unwrap();
        assert_eq!(eig.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn two_by_two_closed_form() {
        let a = SymmetricMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let eig = sym_eig(&a).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-15);
        assert!((eig.values[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn single_element() {
        let a = SymmetricMatrix::from_rows(&[vec![-4.5]]).unwrap();
        assert_eq!(sym_eigvals(&a).unwrap(), vec![-4.5]);
    }

    #[test]
    fn rejects_asymmetric_and_non_finite() {
        assert!(SymmetricMatrix::from_rows(&[vec![1.0, 2.0], vec![2.5, 1.0]]).is_err());
        let mut a = SymmetricMatrix::identity(2);
        a.set(0, 1, f64::NAN);
        assert!(matches!(sym_eig(&a), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn random_reconstruction_and_orthonormality() {
        let n = 50;
        let a = random_symmetric(n, 7);
        let eig = sym_eig(&a).unwrap();
        let norm = a.frobenius_norm();
        for i in 0..n {
            for j in 0..n {
                let rec: f64 = (0..n)
                    .map(|k| eig.values[k] * eig.vector(k)[i] * eig.vector(k)[j])
                    .sum();
                assert!((rec - a.get(i, j)).abs() < 1e-9, "({i},{j})");
                let ortho = dot(eig.vector(i), eig.vector(j));
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ortho - want).abs() < 1e-10);
            }
        }
        for k in 0..n {
            let av = a.matvec(eig.vector(k));
            let res: f64 = av
                .iter()
                .zip(eig.vector(k))
                .map(|(x, v)| (x - eig.values[k] * v).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(res <= 1e-10 * norm);
        }
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eigenvalues_only_match_full_solver() {
        let a = random_symmetric(80, 11);
        let full = sym_eig(&a).unwrap().values;
        let fast = sym_eigvals(&a).unwrap();
        for (x, y) in full.iter().zip(&fast) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn generalized_identity_overlap_reduces_to_standard() {
        let h = random_symmetric(12, 3);
        let pair = MatrixPair::new(h.clone(), SymmetricMatrix::identity(12)).unwrap();
        let g = gen_sym_eig(&pair).unwrap().values;
        let s = sym_eig(&h).unwrap().values;
        for (x, y) in g.iter().zip(&s) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn generalized_diagonal() {
        let h = SymmetricMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 4.0]]).unwrap();
        let s = SymmetricMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 2.0]]).unwrap();
        let eig = gen_sym_eig(&MatrixPair::new(h, s).unwrap()).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-15);
        assert!((eig.values[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn generalized_residual_and_normalization() {
        let n = 30;
        let pair = MatrixPair::new(random_symmetric(n, 5), random_spd(n, 6)).unwrap();
        let eig = gen_sym_eig(&pair).unwrap();
        let hn = pair.h.frobenius_norm();
        for k in 0..n {
            let c = eig.vector(k);
            assert!((pair.s.bilinear(c, c) - 1.0).abs() < 1e-10);
            let hc = pair.h.matvec(c);
            let sc = pair.s.matvec(c);
            let res: f64 = hc
                .iter()
                .zip(&sc)
                .map(|(a, b)| (a - eig.values[k] * b).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(res <= 1e-9 * hn, "k={k} res={res}");
        }
    }

    #[test]
    fn generalized_values_invariant_under_diagonal_congruence() {
        let n = 20;
        let pair = MatrixPair::new(random_symmetric(n, 8), random_spd(n, 9)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let scale: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..10.0)).collect();
        let scaled = MatrixPair::new(
            pair.h.congruence_diag(&scale),
            pair.s.congruence_diag(&scale),
        )
        .unwrap();
        let a = gen_sym_eig(&pair).unwrap().values;
        let b = gen_sym_eig(&scaled).unwrap().values;
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10 * x.abs().max(1.0));
        }
    }

    #[test]
    fn canonical_matches_cholesky_when_nothing_is_dropped() {
        let n = 25;
        let pair = MatrixPair::new(random_symmetric(n, 12), random_spd(n, 13)).unwrap();
        let a = gen_sym_eig(&pair).unwrap();
        let b = gen_sym_eig_canonical(&pair, 1e-14).unwrap();
        assert_eq!(b.values.len(), n);
        for k in 0..n {
            assert!((a.values[k] - b.values[k]).abs() < 1e-10);
            let c = b.vector(k);
            assert!((pair.s.bilinear(c, c) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn canonical_projects_out_exact_dependence() {
        // third basis vector duplicates the second
        let s = SymmetricMatrix::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 1.0],
            vec![0.0, 1.0, 1.0],
        ])
        .unwrap();
        let h = SymmetricMatrix::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 3.0, 3.0],
            vec![0.0, 3.0, 3.0],
        ])
        .unwrap();
        let eig = gen_sym_eig_canonical(&MatrixPair::new(h, s).unwrap(), 1e-12).unwrap();
        assert_eq!(eig.values.len(), 2);
        assert!((eig.values[0] - 1.0).abs() < 1e-14);
        assert!((eig.values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn cholesky_failure_reports_pivot() {
        let s = SymmetricMatrix::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 1.0],
            vec![0.0, 1.0, 1.0],
        ])
        .unwrap();
        let pair = MatrixPair::new(SymmetricMatrix::identity(3), s).unwrap();
        match gen_sym_eig(&pair) {
            Err(Error::Conditioning { pivot, .. }) => assert_eq!(pivot, 2),
            other => panic!("expected conditioning error, got {other:?}"),
        }
    }
}
