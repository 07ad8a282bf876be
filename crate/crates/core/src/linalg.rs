//! Small dense complex linear algebra used by the coin and spectral code.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

pub type CMatrix = DMatrix<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
#[cfg(test)]
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// `v · σ` for a real 3-vector, as a 2×2 matrix.
pub fn pauli_dot(v: [f64; 3]) -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(v[2], 0.0),
            C64::new(v[0], -v[1]),
            C64::new(v[0], v[1]),
            C64::new(-v[2], 0.0),
        ],
    )
}

pub fn pauli_x() -> CMatrix {
    pauli_dot([1.0, 0.0, 0.0])
}

pub fn pauli_y() -> CMatrix {
    pauli_dot([0.0, 1.0, 0.0])
}

pub fn pauli_z() -> CMatrix {
    pauli_dot([0.0, 0.0, 1.0])
}

/// Spectral norm of a Hermitian matrix (largest eigenvalue modulus).
pub fn hermitian_spectral_norm(h: &CMatrix) -> f64 {
    if h.nrows() == 0 {
        return 0.0;
    }
    h.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0_f64, |acc, e| acc.max(e.abs()))
}

/// Spectral norm of an arbitrary square matrix.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    let gram = m.adjoint() * m;
    hermitian_spectral_norm(&gram).sqrt()
}

/// `‖M·M† − I‖₂`.
pub fn unitarity_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let r = m * m.adjoint() - CMatrix::identity(n, n);
    hermitian_spectral_norm(&r)
}

/// `‖H − H†‖₂`.
pub fn hermiticity_residual(h: &CMatrix) -> f64 {
    spectral_norm(&(h - h.adjoint()))
}

/// `exp(−i·t·H)` for Hermitian `H`, through its eigen-decomposition.
pub fn exp_minus_i_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    let eig = h.clone().symmetric_eigen();
    let q = &eig.eigenvectors;
    let phases = CMatrix::from_diagonal(&eig.eigenvalues.map(|e| C64::from_polar(1.0, -e * t)));
    q * phases * q.adjoint()
}

/// Block matrix `[[a, b], [c, d]]` from equally sized square blocks.
pub(crate) fn block2(a: &CMatrix, b: &CMatrix, c: &CMatrix, d: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let mut m = CMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((0, n), (n, n)).copy_from(b);
    m.view_mut((n, 0), (n, n)).copy_from(c);
    m.view_mut((n, n), (n, n)).copy_from(d);
    m
}

/// Matrix-vector product on plain slices (hot loops avoid nalgebra vectors).
#[inline]
#[cfg(test)]
pub(crate) fn mat_vec(m: &CMatrix, v: &[C64], out: &mut [C64]) {
    let n = m.nrows();
    for (r, o) in out.iter_mut().enumerate().take(n) {
        let mut acc = ZERO;
        for (c, x) in v.iter().enumerate().take(n) {
            acc += m[(r, c)] * x;
        }
        *o = acc;
    }
}
