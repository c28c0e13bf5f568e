//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Eigendecomposition of a Hermitian matrix with eigenvalues ascending.
/// Column `k` of the returned matrix is the eigenvector for `values[k]`.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(m.nrows(), m.ncols());
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `exp(i * t * H)` for Hermitian `H`.
pub fn expm_i_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    let (values, vectors) = eigh(h);
    let phases = CVector::from_iterator(
        values.len(),
        values.iter().map(|&e| Complex64::from_polar(1.0, e * t)),
    );
    let scaled = CMatrix::from_fn(vectors.nrows(), vectors.ncols(), |r, c| {
        vectors[(r, c)] * phases[c]
    });
    scaled * vectors.adjoint()
}

/// Spectral (operator 2-) norm.
pub fn op_norm(m: &CMatrix) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Largest |eigenvalue| of a Hermitian matrix.
pub fn spectral_radius_hermitian(m: &CMatrix) -> f64 {
    eigvalsh(m).iter().map(|e| e.abs()).fold(0.0, f64::max)
}

/// Frobenius distance of `U^dagger U` from the identity.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    (u.adjoint() * u - CMatrix::identity(n, n)).norm()
}

/// Kronecker product `a ⊗ b` (b acts on the low-order qubits).
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_sorts_and_reconstructs() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, -2.0),
                Complex64::new(0.0, 2.0),
                Complex64::new(-1.0, 0.0),
            ],
        );
        let (vals, vecs) = eigh(&m);
        assert!(vals[0] < vals[1]);
        let d = CMatrix::from_diagonal(&CVector::from_iterator(
            2,
            vals.iter().map(|&v| Complex64::new(v, 0.0)),
        ));
        assert!((&vecs * d * vecs.adjoint() - &m).norm() < 1e-12);
    }

    #[test]
    fn exponential_of_z() {
        let z = CMatrix::from_diagonal(&CVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ]));
        let u = expm_i_hermitian(&z, std::f64::consts::PI);
        assert!((u + CMatrix::identity(2, 2)).norm() < 1e-12);
    }
}
