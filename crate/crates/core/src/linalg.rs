//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use alloc::vec::Vec;
use nalgebra::{Cholesky, Complex, DMatrix, DVector, SymmetricEigen};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Ridge added to every least-squares subproblem.
pub const LS_RIDGE: f64 = 1e-12;

#[inline]
pub fn cis(phase: f64) -> C64 {
    C64::new(libm::cos(phase), libm::sin(phase))
}

/// Phase of `z` with the convention `angle(0) = 0`.
#[inline]
pub fn angle(z: C64) -> f64 {
    if z.re == 0.0 && z.im == 0.0 {
        0.0
    } else {
        libm::atan2(z.im, z.re)
    }
}

#[inline]
pub fn fro2(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// `A^H B` without materializing the adjoint.
pub fn ad_mul(a: &CMat, b: &CMat) -> CMat {
    a.ad_mul(b)
}

pub fn trace(m: &CMat) -> C64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// Solves `(A + ridge I) X = B` for Hermitian positive semidefinite `A`.
///
/// Falls back to LU when the Cholesky factorization breaks down.
pub fn solve_hpd(a: &CMat, b: &CMat, ridge: f64) -> CMat {
    let n = a.nrows();
    let mut reg = a.clone();
    for i in 0..n {
        reg[(i, i)] += C64::new(ridge, 0.0);
    }
    hermitize(&mut reg);
    if let Some(ch) = Cholesky::new(reg.clone()) {
        return ch.solve(b);
    }
    reg.lu()
        .solve(b)
        .unwrap_or_else(|| CMat::zeros(b.nrows(), b.ncols()))
}

/// Ridge least squares `argmin_X ||B - A X||^2 + ridge ||X||^2`.
pub fn ridge_lstsq(a: &CMat, b: &CMat, ridge: f64) -> CMat {
    let gram = a.ad_mul(a);
    let rhs = a.ad_mul(b);
    solve_hpd(&gram, &rhs, ridge)
}

/// Inverse of a Hermitian positive definite matrix plus ridge.
pub fn inv_hpd(a: &CMat, ridge: f64) -> CMat {
    let n = a.nrows();
    solve_hpd(a, &identity(n), ridge)
}

/// Natural log-determinant of a Hermitian positive definite matrix, or
/// `None` when it is not numerically positive definite.
pub fn logdet_hpd(a: &CMat) -> Option<f64> {
    let mut m = a.clone();
    hermitize(&mut m);
    let ch = Cholesky::new(m)?;
    let l = ch.l_dirty();
    let mut acc = 0.0;
    for i in 0..l.nrows() {
        let d = l[(i, i)].re;
        if d <= 0.0 || !d.is_finite() {
            return None;
        }
        acc += 2.0 * libm::log(d);
    }
    Some(acc)
}

pub fn hermitize(m: &mut CMat) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted in
/// ascending order (columns of the returned matrix follow the same order).
pub fn eigh_sorted(a: &CMat) -> (Vec<f64>, CMat) {
    let mut m = a.clone();
    hermitize(&mut m);
    let eig = SymmetricEigen::new(m);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Orthonormal basis for the `r` dominant left singular vectors of `a`.
pub fn dominant_left_subspace(a: &CMat, r: usize) -> CMat {
    let gram = a * a.adjoint();
    let (_, vecs) = eigh_sorted(&gram);
    let n = vecs.ncols();
    let r = r.min(n);
    CMat::from_fn(a.nrows(), r, |i, j| vecs[(i, n - 1 - j)])
}

/// Singular values of `a` in descending order.
pub fn singular_values(a: &CMat) -> Vec<f64> {
    let mut vals: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    vals.sort_by(|x, y| y.total_cmp(x));
    vals
}

/// Scales `m` in place so that `||m||_F^2 = target`. Zero matrices are left
/// untouched.
pub fn normalize_power(m: &mut CMat, target: f64) {
    let p = fro2(m);
    if p > 0.0 {
        let s = libm::sqrt(target / p);
        m.iter_mut().for_each(|z| *z *= s);
    }
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logdet_of_diagonal() {
        let m = CMat::from_diagonal(&CVec::from_vec(alloc::vec![
            C64::new(2.0, 0.0),
            C64::new(3.0, 0.0)
        ]));
        let ld = logdet_hpd(&m).unwrap();
        assert!((ld - libm::log(6.0)).abs() < 1e-12);
    }

    #[test]
    fn eigh_is_sorted_and_reconstructs() {
        let a = CMat::from_fn(3, 3, |i, j| C64::new((i + j) as f64, i as f64 - j as f64));
        let h = &a * a.adjoint();
        let (vals, vecs) = eigh_sorted(&h);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let d = CMat::from_diagonal(&CVec::from_iterator(3, vals.iter().map(|&v| C64::new(v, 0.0))));
        let rec = &vecs * d * vecs.adjoint();
        assert!(fro2(&(rec - h)) < 1e-18 * 1e6);
    }

    #[test]
    fn angle_of_zero_is_zero() {
        assert_eq!(angle(C64::new(0.0, 0.0)), 0.0);
    }
}
