//! Small dense linear algebra: symmetric matrices, orthonormal bases, and
//! the eigen/solve contracts the geometry modules rely on.

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};
use crate::tol;

/// Symmetric real matrix. Construction symmetrizes and rejects input whose
/// asymmetry exceeds machine-level noise.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    entries: DMatrix<f64>,
}

impl SymMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<SymMatrix> {
        if m.nrows() != m.ncols() {
            return Err(GeomError::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let scale = m.amax().max(1.0);
        let asym = (&m - m.transpose()).amax();
        if asym > 1e-12 * scale {
            return Err(GeomError::InvalidChart {
                detail: format!("matrix is not symmetric (asymmetry {asym:.3e})"),
            });
        }
        let entries = (&m + m.transpose()) * 0.5;
        Ok(SymMatrix { entries })
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> SymMatrix {
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymMatrix { entries: m }
    }

    pub fn identity(dim: usize) -> SymMatrix {
        SymMatrix {
            entries: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Eigenvalues in ascending order with matching orthonormal eigenvector
    /// columns.
    pub fn eigen(&self) -> Result<(DVector<f64>, DMatrix<f64>)> {
        sym_eigen(self)
    }

    /// True when every eigenvalue exceeds `pd_tol` (relative to scale).
    pub fn is_positive_definite(&self, pd_tol: f64) -> bool {
        let scale = self.entries.amax().max(1.0);
        match self.eigen() {
            Ok((vals, _)) => vals[0] > pd_tol * scale,
            Err(_) => false,
        }
    }

    /// Solve `self * x = rhs` through Cholesky; the matrix must be SPD.
    pub fn solve_spd(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        let chol = self
            .entries
            .clone()
            .cholesky()
            .ok_or_else(|| GeomError::NotPositiveDefinite {
                detail: "Cholesky factorization failed".into(),
            })?;
        Ok(chol.solve(rhs))
    }

    /// Dense inverse through Cholesky.
    pub fn inverse_spd(&self) -> Result<DMatrix<f64>> {
        let chol = self
            .entries
            .clone()
            .cholesky()
            .ok_or_else(|| GeomError::NotPositiveDefinite {
                detail: "Cholesky factorization failed".into(),
            })?;
        Ok(chol.inverse())
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi sweeps, eigenvalues
/// ascending with matching orthonormal eigenvector columns.
///
/// Jacobi is slower than tridiagonalization but unconditionally accurate on
/// the small dense matrices this crate produces; the tridiagonal QL solver
/// shipped with the linear-algebra backend misdecomposes near-diagonal
/// matrices with denormal couplings, which the slant spectra hit routinely.
pub fn sym_eigen(s: &SymMatrix) -> Result<(DVector<f64>, DMatrix<f64>)> {
    const MAX_SWEEPS: usize = 64;
    let n = s.dim();
    if n == 0 {
        return Ok((DVector::zeros(0), DMatrix::zeros(0, 0)));
    }
    let mut a = s.entries.clone();
    let mut v = DMatrix::identity(n, n);
    let scale = a.amax().max(f64::MIN_POSITIVE);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-18 * scale {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(GeomError::ConvergenceFailure);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].total_cmp(&a[(y, y)]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| a[(i, i)]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &v.column(src));
    }
    Ok((values, vectors))
}

/// Inner product a basis is orthonormal with respect to.
#[derive(Debug, Clone, Copy)]
pub enum Inner<'a> {
    Euclidean,
    Form(&'a SymMatrix),
}

impl Inner<'_> {
    pub fn pair(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        match self {
            Inner::Euclidean => x.dot(y),
            Inner::Form(g) => (x.transpose() * g.matrix() * y)[(0, 0)],
        }
    }
}

/// A list of mutually orthonormal vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    vectors: Vec<DVector<f64>>,
}

impl Basis {
    pub fn empty() -> Basis {
        Basis { vectors: Vec::new() }
    }

    pub fn from_orthonormal(vectors: Vec<DVector<f64>>) -> Basis {
        Basis { vectors }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, i: usize) -> &DVector<f64> {
        &self.vectors[i]
    }

    pub fn vectors(&self) -> &[DVector<f64>] {
        &self.vectors
    }

    pub fn iter(&self) -> std::slice::Iter<'_, DVector<f64>> {
        self.vectors.iter()
    }

    /// Euclidean orthogonal projection onto the span.
    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(v.len());
        for q in &self.vectors {
            out += q * q.dot(v);
        }
        out
    }

    /// Max deviation of pairwise inner products from the Kronecker delta.
    pub fn orthonormality_residual(&self, inner: Inner) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((inner.pair(a, b) - target).abs());
            }
        }
        worst
    }
}

/// Modified Gram-Schmidt with one re-orthogonalization pass. Input vectors
/// must be independent under `inner`; dependent input (residual below
/// `RANK_TOL` relative to the vector's own norm) is rejected.
pub fn orthonormalize(vectors: &[DVector<f64>], inner: Inner) -> Result<Basis> {
    let mut done: Vec<DVector<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let original_norm = inner.pair(v, v).max(0.0).sqrt();
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &done {
                let c = inner.pair(&w, q);
                w -= q * c;
            }
        }
        let norm = inner.pair(&w, &w).max(0.0).sqrt();
        if norm <= tol::RANK_TOL * original_norm.max(1.0) {
            return Err(GeomError::RankDeficient {
                detail: format!(
                    "vector {} is dependent on its predecessors (residual {norm:.3e})",
                    done.len()
                ),
            });
        }
        done.push(w / norm);
    }
    Ok(Basis { vectors: done })
}

/// Extend `basis` (Euclidean-orthonormal) to a full orthonormal basis of
/// R^n by sweeping the standard basis vectors in index order and keeping
/// the first independent completions. Returns only the added vectors.
pub fn complete_basis(basis: &Basis, n: usize) -> Result<Basis> {
    let mut added: Vec<DVector<f64>> = Vec::new();
    let target = n - basis.len();
    for axis in 0..n {
        if added.len() == target {
            break;
        }
        let mut w = DVector::zeros(n);
        w[axis] = 1.0;
        for _ in 0..2 {
            for q in basis.iter().chain(added.iter()) {
                let c = q.dot(&w);
                w -= q * c;
            }
        }
        let norm = w.norm();
        if norm > tol::RANK_TOL {
            added.push(w / norm);
        }
    }
    if added.len() != target {
        return Err(GeomError::RankDeficient {
            detail: "could not complete basis from coordinate axes".into(),
        });
    }
    Ok(Basis { vectors: added })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn dv(s: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(s)
    }

    #[test]
    fn gram_schmidt_small_examples() {
        let b = orthonormalize(&[dv(&[1.0, 0.0]), dv(&[1.0, 1.0])], Inner::Euclidean).unwrap();
        assert_abs_diff_eq!(b.vector(0)[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.vector(0)[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.vector(1)[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.vector(1)[1], 1.0, epsilon = 1e-15);

        let b = orthonormalize(&[dv(&[2.0, 0.0, 0.0])], Inner::Euclidean).unwrap();
        assert_abs_diff_eq!(b.vector(0)[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn gram_schmidt_rejects_dependent_input() {
        let got = orthonormalize(&[dv(&[1.0, 0.0]), dv(&[2.0, 0.0])], Inner::Euclidean);
        assert!(matches!(got, Err(GeomError::RankDeficient { .. })));
    }

    #[test]
    fn orthonormalize_is_idempotent() {
        let raw = [
            dv(&[1.0, 2.0, -0.5, 3.0]),
            dv(&[0.9, 2.1, -0.4, 3.2]),
            dv(&[0.0, 1.0, 4.0, -1.0]),
        ];
        let once = orthonormalize(&raw, Inner::Euclidean).unwrap();
        let twice = orthonormalize(once.vectors(), Inner::Euclidean).unwrap();
        for (a, b) in once.iter().zip(twice.iter()) {
            assert!((a - b).amax() <= tol::ORTHO_TOL);
        }
        assert!(once.orthonormality_residual(Inner::Euclidean) <= tol::ORTHO_TOL);
    }

    #[test]
    fn weighted_inner_product() {
        let g = SymMatrix::from_fn(2, |i, j| if i == j { (i + 1) as f64 * 4.0 } else { 0.0 });
        let b = orthonormalize(&[dv(&[1.0, 0.0]), dv(&[1.0, 1.0])], Inner::Form(&g)).unwrap();
        assert!(b.orthonormality_residual(Inner::Form(&g)) <= tol::ORTHO_TOL);
        assert_abs_diff_eq!(b.vector(0)[0], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn eigen_of_identity_and_diagonal() {
        let (vals, _) = SymMatrix::identity(3).eigen().unwrap();
        for v in vals.iter() {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-14);
        }
        let d = SymMatrix::from_fn(3, |i, j| {
            if i == j {
                [0.0, 0.25, 1.0][i]
            } else {
                0.0
            }
        });
        let (vals, vecs) = d.eigen().unwrap();
        assert_abs_diff_eq!(vals[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(vals[1], 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(vals[2], 1.0, epsilon = 1e-14);
        for c in 0..3 {
            assert_abs_diff_eq!(vecs.column(c).norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn eigen_reconstruction() {
        let s = SymMatrix::from_fn(4, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let (vals, vecs) = s.eigen().unwrap();
        let rebuilt = &vecs * DMatrix::from_diagonal(&vals) * vecs.transpose();
        let err = (s.matrix() - rebuilt).amax();
        assert!(err <= tol::EIG_TOL * s.matrix().amax().max(1.0));
    }

    #[test]
    fn eigen_survives_denormal_couplings() {
        // near-diagonal matrix of the kind -T^2 produces: unit and repeated
        // eigenvalues with couplings spanning 1e-18 down to 1e-66
        let c = 0.19753086419753085;
        let mut m = DMatrix::from_diagonal(&dv(&[1.0, 1.0, 1e-34, c, c]));
        let couplings = [
            (0, 1, -1.7e-18),
            (0, 3, 1.7e-18),
            (0, 4, -1.5e-18),
            (1, 3, 3.5e-18),
            (1, 4, 7.7e-19),
            (2, 3, 2.4e-34),
            (2, 4, 1.4e-66),
            (3, 4, 9.2e-68),
        ];
        for (i, j, v) in couplings {
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        let s = SymMatrix::new(m.clone()).unwrap();
        let (vals, vecs) = s.eigen().unwrap();
        for col in 0..5 {
            let residual = (&m * vecs.column(col) - vecs.column(col) * vals[col]).norm();
            assert!(residual <= 1e-14, "column {col}: residual {residual:.3e}");
        }
        let rebuilt = &vecs * DMatrix::from_diagonal(&vals) * vecs.transpose();
        assert!((rebuilt - &m).amax() <= 1e-14);
    }

    #[test]
    fn spd_solve_round_trip() {
        let g = SymMatrix::from_fn(3, |i, j| if i == j { 3.0 } else { 0.5 });
        let x = dv(&[1.0, -2.0, 0.5]);
        let rhs = g.matrix() * &x;
        let got = g.solve_spd(&rhs).unwrap();
        assert!((got - x).amax() < 1e-12);
    }

    #[test]
    fn non_spd_solve_fails() {
        let g = SymMatrix::from_fn(2, |i, j| if i == j { -1.0 } else { 0.0 });
        assert!(matches!(
            g.solve_spd(&dv(&[1.0, 1.0])),
            Err(GeomError::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn complete_basis_spans_the_rest() {
        let b = orthonormalize(&[dv(&[1.0, 1.0, 0.0, 0.0])], Inner::Euclidean).unwrap();
        let extra = complete_basis(&b, 4).unwrap();
        assert_eq!(extra.len(), 3);
        for q in extra.iter() {
            assert!(b.vector(0).dot(q).abs() <= tol::ORTHO_TOL);
        }
        assert!(extra.orthonormality_residual(Inner::Euclidean) <= tol::ORTHO_TOL);
    }
}
