//! Small dense linear algebra on `f64` matrices.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::rng::gaussian_matrix;

/// Symmetric eigendecomposition with eigenvalues ascending.
///
/// The input is symmetrized first. Each eigenvector is normalized so that
/// its first non-negligible component is positive, which makes the output
/// reproducible for simple eigenvalues.
pub fn sym_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let sym = symmetrize(m);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        let scale = col.amax();
        if let Some(first) = col.iter().copied().find(|x| x.abs() > 1e-12 * scale) {
            if first < 0.0 {
                col.neg_mut();
            }
        }
        vectors.set_column(dst, &col);
    }
    (values, vectors)
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest absolute eigenvalue of a symmetric matrix (its operator 2-norm).
pub fn sym_op_norm(m: &DMatrix<f64>) -> f64 {
    symmetrize(m).symmetric_eigenvalues().amax()
}

pub fn commutator(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * b - b * a
}

/// Thin QR orthonormalization with the sign of R's diagonal made positive,
/// so the result depends only on the input columns.
pub fn orthonormalize(y: &DMatrix<f64>) -> DMatrix<f64> {
    let qr = y.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..q.ncols() {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Haar-distributed orthogonal matrix.
pub fn random_orthogonal(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    orthonormalize(&gaussian_matrix(rng, n, n))
}

/// Extends orthonormal columns `y` (n×q) to an orthonormal basis of R^n whose
/// first q columns are `y`, by Gram-Schmidt against the coordinate axes.
pub fn orthonormal_completion(y: &DMatrix<f64>) -> DMatrix<f64> {
    let n = y.nrows();
    let mut cols: Vec<DVector<f64>> = y.column_iter().map(|c| c.into_owned()).collect();
    // Axes least represented in span(y) first, for numerical stability.
    let mut axes: Vec<(usize, f64)> = (0..n).map(|i| (i, y.row(i).norm_squared())).collect();
    axes.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    for (axis, _) in axes {
        if cols.len() == n {
            break;
        }
        let mut v = DVector::zeros(n);
        v[axis] = 1.0;
        for _ in 0..2 {
            for c in &cols {
                let d = c.dot(&v);
                v.axpy(-d, c, 1.0);
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            cols.push(v / norm);
        }
    }
    DMatrix::from_columns(&cols)
}

/// max |QᵀQ - I|.
pub fn orthonormality_defect(q: &DMatrix<f64>) -> f64 {
    let gram = q.transpose() * q;
    (gram - DMatrix::identity(q.ncols(), q.ncols())).amax()
}

/// Orthogonal projector onto the column span of orthonormal `y`.
pub fn projector(y: &DMatrix<f64>) -> DMatrix<f64> {
    y * y.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian_symmetric, stream};

    #[test]
    fn eigen_is_sorted_and_sign_normalized() {
        let mut rng = stream(3, &[0]);
        let a = gaussian_symmetric(&mut rng, 6);
        let (vals, vecs) = sym_eigen(&a);
        for i in 1..6 {
            assert!(vals[i - 1] <= vals[i]);
        }
        let recon = &vecs * DMatrix::from_diagonal(&vals) * vecs.transpose();
        assert!((recon - &a).amax() < 1e-12);
        for col in vecs.column_iter() {
            let first = col.iter().find(|x| x.abs() > 1e-12).unwrap();
            assert!(*first > 0.0);
        }
    }

    #[test]
    fn completion_keeps_leading_columns() {
        let mut rng = stream(4, &[0]);
        let y = orthonormalize(&gaussian_matrix(&mut rng, 7, 3));
        let full = orthonormal_completion(&y);
        assert_eq!(full.ncols(), 7);
        assert!(orthonormality_defect(&full) < 1e-12);
        assert!((full.columns(0, 3) - &y).amax() < 1e-15);
    }

    #[test]
    fn random_orthogonal_is_orthogonal() {
        let mut rng = stream(5, &[0]);
        let q = random_orthogonal(&mut rng, 8);
        assert!(orthonormality_defect(&q) < 1e-13);
    }
}
