//! Small complex-matrix helpers: polar factors, exp/log on the unitary
//! group, Hermitian eigenstructure. Everything here operates on dense
//! `N×N` matrices with N tiny (2 or 3 in practice), so plain SVD and
//! eigendecomposition are the right tools.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense complex matrix over the generic scalar.
pub type CMatrix<T> = DMatrix<Complex<T>>;
/// Dense complex vector over the generic scalar.
pub type CVector<T> = DVector<Complex<T>>;

pub fn identity<T: Real>(n: usize) -> CMatrix<T> {
    CMatrix::<T>::identity(n, n)
}

/// e^z for a complex scalar over the generic real type.
pub fn cexp<T: Real>(z: Complex<T>) -> Complex<T> {
    let r = z.re.exp();
    Complex::new(r * z.im.cos(), r * z.im.sin())
}

/// |z| for a complex scalar over the generic real type.
pub fn cnorm<T: Real>(z: Complex<T>) -> T {
    z.norm_sqr().sqrt()
}

pub fn frob_norm<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

pub fn frob_norm_sq<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
}

/// Re tr(a·b), the real part of the trace of a product.
pub fn re_trace_product<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    let n = a.nrows();
    let mut acc = T::zero();
    for i in 0..n {
        for j in 0..n {
            let p = a[(i, j)] * b[(j, i)];
            acc += p.re;
        }
    }
    acc
}

/// ‖a·a* − I‖_F: deviation from unitarity.
pub fn unitary_defect<T: Real>(m: &CMatrix<T>) -> T {
    let n = m.nrows();
    frob_norm(&(m * m.adjoint() - identity::<T>(n)))
}

/// Deviation from SU(N): max of the unitary defect and |det − 1|.
pub fn special_unitary_defect<T: Real>(m: &CMatrix<T>) -> T {
    let det = m.determinant();
    let one = Complex::new(T::one(), T::zero());
    let du = unitary_defect(m);
    let dd = cnorm(det - one);
    if du > dd {
        du
    } else {
        dd
    }
}

/// Unitary polar factor U·V* from the SVD m = U Σ V*.
///
/// Fails when the smallest singular value drops below `sigma_min`, meaning
/// the nearest unitary is not well defined.
pub fn polar_unitary<T: Real>(m: &CMatrix<T>, sigma_min: T) -> Result<CMatrix<T>> {
    let svd = m.clone().svd(true, true);
    let smin = svd
        .singular_values
        .iter()
        .fold(T::max_value().unwrap(), |a, &s| if s < a { s } else { a });
    if smin < sigma_min {
        return Err(Error::SingularSample(smin.to_double()));
    }
    let u = svd.u.expect("svd u");
    let vt = svd.v_t.expect("svd v_t");
    Ok(u * vt)
}

/// Nearest special-unitary matrix in the polar sense: the unitary polar
/// factor divided by det^{1/N} on the principal branch.
pub fn special_unitarize<T: Real>(m: &CMatrix<T>, sigma_min: T) -> Result<CMatrix<T>> {
    let n = m.nrows();
    let mut q = polar_unitary(m, sigma_min)?;
    let det = q.determinant();
    // det has unit modulus; remove its phase spread over the N rows.
    let phase = det.im.atan2(det.re) / T::of_usize(n);
    let corr = cexp(Complex::new(T::zero(), -phase));
    q.iter_mut().for_each(|z| *z *= corr);
    Ok(q)
}

/// Eigendecomposition of a Hermitian matrix; the input is symmetrized
/// first so that accumulated round-off cannot break the solver.
pub fn hermitian_eigen<T: Real>(h: &CMatrix<T>) -> (DVector<T>, CMatrix<T>) {
    let half = Complex::new(T::of(0.5), T::zero());
    let sym = (h + h.adjoint()).map(|z| z * half);
    let eig = nalgebra::SymmetricEigen::new(sym);
    (eig.eigenvalues, eig.eigenvectors)
}

/// exp(a) for anti-Hermitian a, via the Hermitian eigendecomposition of
/// h = −i·a. Exact on su(N) up to round-off; result is unitary.
pub fn exp_anti_hermitian<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    let minus_i = Complex::new(T::zero(), -T::one());
    let h = a.map(|z| z * minus_i);
    let (vals, vecs) = hermitian_eigen(&h);
    let phases: Vec<Complex<T>> = vals
        .iter()
        .map(|&t| cexp(Complex::new(T::zero(), t)))
        .collect();
    let mut d = CMatrix::<T>::zeros(a.nrows(), a.nrows());
    for (i, p) in phases.iter().enumerate() {
        d[(i, i)] = *p;
    }
    &vecs * d * vecs.adjoint()
}

/// Principal logarithm of a unitary matrix, returned as an anti-Hermitian
/// matrix L with exp(L) = u.
///
/// Uses the square-root ladder: u is repeatedly replaced by its principal
/// square root (the unitary polar factor of I + u) until it is close to I,
/// then log is summed by the atanh series and scaled back up.
///
/// Fails with [`Error::LogBranch`] when u has an eigenvalue within
/// `branch_tol` of −1, where the principal branch is ill defined.
pub fn log_unitary<T: Real>(u: &CMatrix<T>, branch_tol: T) -> Result<CMatrix<T>> {
    let n = u.nrows();
    let eye = identity::<T>(n);

    // min |λ + 1| = σ_min(u + I) for unitary (hence normal) u.
    let svd = (u + &eye).svd(false, false);
    let smin = svd
        .singular_values
        .iter()
        .fold(T::max_value().unwrap(), |a, &s| if s < a { s } else { a });
    if smin < branch_tol {
        return Err(Error::LogBranch(branch_tol.to_double()));
    }

    let mut x = u.clone();
    let mut doublings = 0u32;
    let quarter = T::of(0.25);
    while frob_norm(&(&x - &eye)) > quarter {
        x = polar_unitary(&(&eye + &x), T::of(1e-14))?;
        doublings += 1;
        if doublings > 64 {
            return Err(Error::LogBranch(branch_tol.to_double()));
        }
    }

    // log x = 2 atanh(z) with z = (x + I)^{-1}(x − I); the series in z
    // converges fast since ‖x − I‖ ≤ 1/4.
    let lu = (&x + &eye).lu();
    let z = lu.solve(&(&x - &eye)).ok_or(Error::SingularSample(0.0))?;
    let z2 = &z * &z;
    let mut term = z.clone();
    let mut log = z.clone();
    let tol = T::of(1e-30);
    for j in 1..60 {
        term = &term * &z2;
        let coeff = Complex::new(T::one() / T::of_usize(2 * j + 1), T::zero());
        let contrib = term.map(|t| t * coeff);
        log += &contrib;
        if frob_norm(&contrib) < tol {
            break;
        }
    }
    let two = Complex::new(T::of(2.0), T::zero());
    log = log.map(|t| t * two);
    let scale = Complex::new(T::of_usize(1usize << doublings), T::zero());
    log = log.map(|t| t * scale);

    // Clean up: the log of a unitary matrix is exactly anti-Hermitian.
    let half = Complex::new(T::of(0.5), T::zero());
    Ok((&log - log.adjoint()).map(|t| t * half))
}

/// Smallest singular value of I + u: distance of the spectrum of a
/// unitary u to −1 (branch-cut safety margin for [`log_unitary`]).
pub fn branch_margin<T: Real>(u: &CMatrix<T>) -> T {
    let n = u.nrows();
    let svd = (u + identity::<T>(n)).svd(false, false);
    svd.singular_values
        .iter()
        .fold(T::max_value().unwrap(), |a, &s| if s < a { s } else { a })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn random_su2(seed: u64) -> CMatrix<f64> {
        // deterministic small su(2) element, exponentiated
        let t = seed as f64 * 0.37 + 0.2;
        let a = DMatrix::from_row_slice(
            2,
            2,
            &[
                c(0.0, 0.4 * t.sin()),
                c(0.3 * t.cos(), 0.2),
                c(-0.3 * t.cos(), 0.2),
                c(0.0, -0.4 * t.sin()),
            ],
        );
        exp_anti_hermitian(&a)
    }

    #[test]
    fn exp_gives_special_unitary() {
        for s in 0..5 {
            let u = random_su2(s);
            assert!(special_unitary_defect(&u) < 1e-12);
        }
    }

    #[test]
    fn log_inverts_exp() {
        for s in 0..5 {
            let u = random_su2(s);
            let l = log_unitary(&u, 1e-8).unwrap();
            let back = exp_anti_hermitian(&l);
            assert!(frob_norm(&(back - u)) < 1e-11);
        }
    }

    #[test]
    fn log_rejects_antipodal() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
        );
        assert!(matches!(log_unitary(&m, 1e-8), Err(Error::LogBranch(_))));
    }

    #[test]
    fn special_unitarize_fixes_det() {
        let m =
            DMatrix::from_row_slice(2, 2, &[c(1.1, 0.1), c(0.0, 0.2), c(0.1, 0.0), c(0.9, -0.1)]);
        let q = special_unitarize(&m, 1e-10).unwrap();
        assert!(special_unitary_defect(&q) < 1e-12);
    }

    #[test]
    fn polar_rejects_singular() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0); 4]);
        assert!(matches!(
            polar_unitary(&m, 1e-10),
            Err(Error::SingularSample(_))
        ));
    }
}
