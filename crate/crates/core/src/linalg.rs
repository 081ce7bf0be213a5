//! Small dense linear-algebra helpers on top of nalgebra.
//!
//! nalgebra only returns the thin SVD, so the full orthogonal factors are
//! completed here with an explicit orthonormal complement.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// SVD with square orthogonal factors and singular values sorted descending.
///
/// `singular_values` has length `min(m, n)`; columns of `u` (resp. `v`) past
/// that index span the left (resp. right) null space and carry singular value 0.
#[derive(Debug, Clone)]
pub struct FullSvd {
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub v: DMatrix<f64>,
}

impl FullSvd {
    /// Singular value paired with column `j` of `v`, zero-padded past `min(m, n)`.
    pub fn right_value(&self, j: usize) -> f64 {
        self.singular_values.get(j).copied().unwrap_or(0.0)
    }

    /// Singular value paired with column `i` of `u`, zero-padded past `min(m, n)`.
    pub fn left_value(&self, i: usize) -> f64 {
        self.singular_values.get(i).copied().unwrap_or(0.0)
    }
}

pub fn full_svd(a: &DMatrix<f64>) -> FullSvd {
    let (m, n) = a.shape();
    let k = m.min(n);
    if k == 0 {
        return FullSvd {
            u: DMatrix::identity(m, m),
            singular_values: Vec::new(),
            v: DMatrix::identity(n, n),
        };
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let s = svd.singular_values;

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));

    let mut u_thin = DMatrix::zeros(m, k);
    let mut v_thin = DMatrix::zeros(n, k);
    let mut values = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        u_thin.set_column(dst, &u.column(src));
        v_thin.set_column(dst, &v_t.row(src).transpose());
        values.push(s[src]);
    }

    FullSvd {
        u: complete_basis(&u_thin),
        singular_values: values,
        v: complete_basis(&v_thin),
    }
}

/// Append an orthonormal basis of the orthogonal complement to `q`.
fn complete_basis(q: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, k) = q.shape();
    if k == m {
        return q.clone();
    }
    let rest = orthonormal_complement(q);
    let mut full = DMatrix::zeros(m, m);
    full.columns_mut(0, k).copy_from(q);
    full.columns_mut(k, m - k).copy_from(&rest);
    full
}

/// Orthonormal basis of the complement of the column span of `q`.
///
/// `q` must have orthonormal columns.
pub fn orthonormal_complement(q: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, k) = q.shape();
    if k == 0 {
        return DMatrix::identity(m, m);
    }
    if k >= m {
        return DMatrix::zeros(m, 0);
    }
    let projector = DMatrix::<f64>::identity(m, m) - q * q.transpose();
    let (values, vectors) = sym_eigen_sorted(&projector);
    // Eigenvalues are 0 (k times) and 1 (m - k times); take the top block.
    let mut out = DMatrix::zeros(m, m - k);
    for j in 0..(m - k) {
        let src = m - 1 - j;
        debug_assert!(values[src] > 0.5);
        out.set_column(j, &vectors.column(src));
    }
    out
}

/// Orthonormal basis for the column span of `a`, dropping directions with
/// singular value at most `rel_tol` times the largest.
pub fn orthonormal_basis(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return DMatrix::zeros(m, 0);
    }
    let svd = full_svd(a);
    let smax = svd.singular_values.first().copied().unwrap_or(0.0);
    let r = svd
        .singular_values
        .iter()
        .filter(|&&s| smax > 0.0 && s > rel_tol * smax)
        .count();
    svd.u.columns(0, r).into_owned()
}

pub fn rank(a: &DMatrix<f64>, rel_tol: f64) -> usize {
    orthonormal_basis(a, rel_tol).ncols()
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues ascending.
pub fn sym_eigen_sorted(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = a.nrows();
    if n == 0 {
        return (DVector::zeros(0), DMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(symmetrize(a));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut values = DVector::zeros(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = eig.eigenvalues[src];
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return f64::INFINITY;
    }
    SymmetricEigen::new(symmetrize(a))
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn max_abs_eigenvalue(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(symmetrize(a))
        .eigenvalues
        .iter()
        .fold(0.0, |m: f64, x| m.max(x.abs()))
}

pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_orthonormal(q: &DMatrix<f64>) {
        let g = q.transpose() * q;
        let err = (g - DMatrix::identity(q.ncols(), q.ncols())).abs().max();
        assert!(err < 1e-12, "not orthonormal: {err}");
    }

    #[test]
    fn full_svd_tall_and_wide() {
        let tall = DMatrix::from_row_slice(4, 2, &[1.0, 2.0, 0.0, 1.0, 3.0, -1.0, 2.0, 2.0]);
        for a in [tall.clone(), tall.transpose()] {
            let svd = full_svd(&a);
            assert_orthonormal(&svd.u);
            assert_orthonormal(&svd.v);
            let (m, n) = a.shape();
            let mut s = DMatrix::zeros(m, n);
            for (i, &x) in svd.singular_values.iter().enumerate() {
                s[(i, i)] = x;
            }
            let rebuilt = &svd.u * s * svd.v.transpose();
            assert!((rebuilt - &a).abs().max() < 1e-12);
            assert!(svd.singular_values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn complement_is_orthogonal() {
        let q = orthonormal_basis(&DMatrix::from_row_slice(3, 1, &[1.0, 1.0, 1.0]), 1e-12);
        let c = orthonormal_complement(&q);
        assert_eq!(c.ncols(), 2);
        assert_orthonormal(&c);
        assert!((q.transpose() * c).abs().max() < 1e-14);
    }

    #[test]
    fn rank_drops_dependent_columns() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 1.0, 1.0]);
        assert_eq!(rank(&a, 1e-10), 2);
    }

    #[test]
    fn eigen_sorted_ascending() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let (vals, _) = sym_eigen_sorted(&a);
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        assert!((min_eigenvalue(&a) - 1.0).abs() < 1e-14);
    }
}
