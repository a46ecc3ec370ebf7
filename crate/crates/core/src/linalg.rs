//! Small dense complex linear algebra on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest entry of `m - other`.
pub fn max_diff(m: &CMatrix, other: &CMatrix) -> f64 {
    assert_eq!(m.shape(), other.shape());
    m.iter()
        .zip(other.iter())
        .fold(0.0, |acc, (a, b)| acc.max((a - b).norm()))
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_diff(m, &m.adjoint())
}

pub fn anti_hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs(&(m + m.adjoint()))
}

pub fn unitarity_defect(m: &CMatrix) -> f64 {
    let n = m.ncols();
    max_diff(&(m.adjoint() * m), &CMatrix::identity(n, n))
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Eigenvalues (ascending) and matching orthonormal eigenvector columns of a
/// Hermitian matrix. Only the lower triangle is read.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    (values, vectors)
}

/// `exp(i·scale·h)` for Hermitian `h`, through its eigendecomposition so the
/// result is unitary to rounding.
pub fn expm_i_hermitian(h: &CMatrix, scale: f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(h);
    let phases = CVector::from_iterator(
        values.len(),
        values.iter().map(|&e| C64::from_polar(1.0, scale * e)),
    );
    let scaled = CMatrix::from_fn(vectors.nrows(), vectors.ncols(), |r, c| {
        vectors[(r, c)] * phases[c]
    });
    scaled * vectors.adjoint()
}

/// Unitary factor `U` of the polar decomposition `m = U P`.
pub fn polar_unitary(m: &CMatrix) -> CMatrix {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("svd computed with u");
    let v_t = svd.v_t.expect("svd computed with v_t");
    u * v_t
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Matrix whose columns are the given vectors.
pub fn columns_to_matrix(columns: &[CVector]) -> CMatrix {
    let rows = columns.first().map_or(0, |c| c.len());
    let mut m = CMatrix::zeros(rows, columns.len());
    for (k, c) in columns.iter().enumerate() {
        m.set_column(k, c);
    }
    m
}

pub fn matrix_to_columns(m: &CMatrix) -> Vec<CVector> {
    m.column_iter().map(|c| c.into_owned()).collect()
}

/// Unwrap a phase increment into (-π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut y = x.rem_euclid(two_pi);
    if y > std::f64::consts::PI {
        y -= two_pi;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn eigen_sorted_and_orthonormal() {
        let h = CMatrix::from_row_slice(
            3,
            3,
            &[
                re(2.0),
                C64::new(0.0, 1.0),
                re(0.0),
                C64::new(0.0, -1.0),
                re(-1.0),
                re(0.5),
                re(0.0),
                re(0.5),
                re(3.0),
            ],
        );
        let (vals, vecs) = hermitian_eigen(&h);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        assert!(unitarity_defect(&vecs) < 1e-12);
        for (k, e) in vals.iter().enumerate() {
            let v = vecs.column(k);
            let r = &h * v - v * re(*e);
            assert!(r.norm() < 1e-12);
        }
    }

    #[test]
    fn exp_of_pauli_z() {
        let z = CMatrix::from_diagonal(&CVector::from_vec(vec![re(1.0), re(-1.0)]));
        let u = expm_i_hermitian(&z, PI / 2.0);
        assert!((u[(0, 0)] - I).norm() < 1e-15);
        assert!((u[(1, 1)] + I).norm() < 1e-15);
    }

    #[test]
    fn polar_factor_of_unitary_is_itself() {
        let u = expm_i_hermitian(
            &CMatrix::from_row_slice(2, 2, &[re(0.3), C64::new(0.1, 0.2), C64::new(0.1, -0.2), re(-0.7)]),
            1.3,
        );
        let p = polar_unitary(&(u.clone() * re(2.5)));
        assert!(max_diff(&p, &u) < 1e-12);
    }

    #[test]
    fn wrap_phase_range() {
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_phase(-0.5) + 0.5).abs() < 1e-15);
        assert!((wrap_phase(2.0 * PI + 0.25) - 0.25).abs() < 1e-12);
    }
}
