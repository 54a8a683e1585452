//! Small dense complex linear algebra on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub use nalgebra::Complex;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `e^{i phi}`.
pub fn cis(phi: f64) -> C64 {
    C64::new(phi.cos(), phi.sin())
}

/// `y += a x`, elementwise.
pub fn axpy(y: &mut CMatrix, a: C64, x: &CMatrix) {
    for (yi, xi) in y.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *yi += a * xi;
    }
}

/// `|i><j|` in dimension `dim`.
pub fn ket_bra(dim: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    m[(i, j)] = ONE;
    m
}

pub fn basis_vector(dim: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[i] = ONE;
    v
}

/// Largest entrywise modulus of `m - m^dagger`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest entrywise modulus of `u^dagger u - 1`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.ncols();
    max_abs_diff(&(u.adjoint() * u), &CMatrix::identity(n, n))
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()).scale(0.5);
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Principal square root of a positive semidefinite Hermitian matrix.
/// Slightly negative eigenvalues from round-off are clamped to zero.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let h = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(h);
    let q = &eig.eigenvectors;
    let n = m.nrows();
    let mut scaled = q.clone();
    for k in 0..n {
        let s = eig.eigenvalues[k].max(0.0).sqrt();
        for i in 0..n {
            scaled[(i, k)] *= s;
        }
    }
    scaled * q.adjoint()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(x: f64) -> f64 {
    use std::f64::consts::PI;
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Distance between two angles on the circle.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn psd_sqrt_squares_back() {
        let mut m = CMatrix::zeros(3, 3);
        m[(0, 0)] = c(0.5, 0.0);
        m[(1, 1)] = c(0.3, 0.0);
        m[(2, 2)] = c(0.2, 0.0);
        m[(0, 1)] = c(0.1, 0.05);
        m[(1, 0)] = c(0.1, -0.05);
        let r = psd_sqrt(&m);
        assert!(max_abs_diff(&(&r * &r), &m) < 1e-12);
    }

    #[test]
    fn wrap_angle_maps_minus_pi_to_pi() {
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!(wrap_angle(0.25).eq(&0.25));
        assert!(angle_distance(PI - 1e-4, -PI + 1e-4) < 3e-4);
    }
}
