//! Small dense Hermitian helpers on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Largest `|m[i][j] - conj(m[j][i])|`.
pub fn hermiticity_residual(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues of a Hermitian matrix in ascending order. Matrices with
/// negligible imaginary parts take the cheaper real symmetric path.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let scale = m.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
    let max_imag = m.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    let mut eig: Vec<f64> = if max_imag <= 1e-15 * scale {
        m.map(|c| c.re)
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect()
    } else {
        m.symmetric_eigenvalues().iter().copied().collect()
    };
    eig.sort_by(f64::total_cmp);
    eig
}

/// Operator norm of a Hermitian matrix.
pub fn hermitian_norm(m: &DMatrix<Complex64>) -> f64 {
    hermitian_eigenvalues(m)
        .iter()
        .fold(0.0, |acc, v| acc.max(v.abs()))
}
