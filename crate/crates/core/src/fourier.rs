//! Matrix-valued trigonometric polynomials: Σ_{|k|≤n} A_k e^{ikθ} with
//! A_k ∈ ℂ^{N×N}, plus the uniform quadrature grid that makes every
//! integral in this crate exact.
//!
//! Integrands built from order-n series (products like γ⁻¹γ′ or squared
//! norms) are trigonometric polynomials of degree ≤ 4n, and the uniform
//! trapezoid rule on M equispaced points integrates degree < M exactly.
//! The grid has M = 8n + 1 points throughout, which leaves margin.

use num_complex::Complex;

use crate::linalg::CMatrix;
use crate::scalar::Real;

/// Number of quadrature samples used for order-n data.
pub fn grid_len(order: usize) -> usize {
    8 * order + 1
}

/// s-th node of the uniform grid with m points.
pub fn theta<T: Real>(s: usize, m: usize) -> T {
    T::two_pi() * T::of_usize(s) / T::of_usize(m)
}

/// A matrix-valued finite Fourier series.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSeries<T: Real> {
    dim: usize,
    order: usize,
    /// Coefficients A_{-n}, …, A_n; index k + order.
    coeffs: Vec<CMatrix<T>>,
}

impl<T: Real> MatrixSeries<T> {
    pub fn new(dim: usize, order: usize, coeffs: Vec<CMatrix<T>>) -> Self {
        assert_eq!(coeffs.len(), 2 * order + 1, "coefficient count");
        for c in &coeffs {
            assert_eq!(c.nrows(), dim);
            assert_eq!(c.ncols(), dim);
        }
        Self { dim, order, coeffs }
    }

    pub fn zero(dim: usize, order: usize) -> Self {
        Self::new(
            dim,
            order,
            vec![CMatrix::<T>::zeros(dim, dim); 2 * order + 1],
        )
    }

    /// The constant series with value I.
    pub fn one(dim: usize, order: usize) -> Self {
        let mut s = Self::zero(dim, order);
        *s.coeff_mut(0) = CMatrix::<T>::identity(dim, dim);
        s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeff(&self, k: i64) -> &CMatrix<T> {
        &self.coeffs[(k + self.order as i64) as usize]
    }

    pub fn coeff_mut(&mut self, k: i64) -> &mut CMatrix<T> {
        &mut self.coeffs[(k + self.order as i64) as usize]
    }

    pub fn coeffs(&self) -> &[CMatrix<T>] {
        &self.coeffs
    }

    pub fn frequencies(&self) -> impl Iterator<Item = i64> {
        let n = self.order as i64;
        -n..=n
    }

    pub fn evaluate(&self, theta: T) -> CMatrix<T> {
        let mut out = CMatrix::<T>::zeros(self.dim, self.dim);
        for k in self.frequencies() {
            let phase = crate::linalg::cexp(Complex::new(T::zero(), T::of_i64(k) * theta));
            out += self.coeff(k).map(|z| z * phase);
        }
        out
    }

    /// Values on the m-point uniform grid.
    pub fn sample(&self, m: usize) -> Vec<CMatrix<T>> {
        (0..m).map(|s| self.evaluate(theta::<T>(s, m))).collect()
    }

    /// Values on the canonical 8n+1 grid of this series.
    pub fn sample_own_grid(&self) -> Vec<CMatrix<T>> {
        self.sample(grid_len(self.order))
    }

    /// Coefficientwise derivative: A_k ↦ ik·A_k.
    pub fn derivative(&self) -> Self {
        let mut out = self.clone();
        for k in self.frequencies() {
            let ik = Complex::new(T::zero(), T::of_i64(k));
            *out.coeff_mut(k) = self.coeff(k).map(|z| z * ik);
        }
        out
    }

    /// Pointwise adjoint as a series: coefficients B_k = A_{−k}*.
    pub fn adjoint_series(&self) -> Self {
        let mut out = Self::zero(self.dim, self.order);
        for k in self.frequencies() {
            *out.coeff_mut(k) = self.coeff(-k).adjoint();
        }
        out
    }

    /// Exact pointwise product: coefficient convolution, order adds.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let order = self.order + other.order;
        let mut out = Self::zero(self.dim, order);
        for k in self.frequencies() {
            for l in other.frequencies() {
                *out.coeff_mut(k + l) += self.coeff(k) * other.coeff(l);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order.max(other.order);
        let mut out = Self::zero(self.dim, order);
        for k in self.frequencies() {
            *out.coeff_mut(k) += self.coeff(k);
        }
        for k in other.frequencies() {
            *out.coeff_mut(k) += other.coeff(k);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex::new(-T::one(), T::zero())))
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        let coeffs = self.coeffs.iter().map(|c| c.map(|z| z * factor)).collect();
        Self::new(self.dim, self.order, coeffs)
    }

    /// Right-multiply every coefficient by a constant matrix.
    pub fn mul_const_right(&self, g: &CMatrix<T>) -> Self {
        let coeffs = self.coeffs.iter().map(|c| c * g).collect();
        Self::new(self.dim, self.order, coeffs)
    }

    /// Left-multiply every coefficient by a constant matrix.
    pub fn mul_const_left(&self, g: &CMatrix<T>) -> Self {
        let coeffs = self.coeffs.iter().map(|c| g * c).collect();
        Self::new(self.dim, self.order, coeffs)
    }

    /// Conjugate every coefficient by a constant matrix: A_k ↦ g A_k g⁻¹.
    pub fn conjugate_const(&self, g: &CMatrix<T>, g_inv: &CMatrix<T>) -> Self {
        let coeffs = self.coeffs.iter().map(|c| g * c * g_inv).collect();
        Self::new(self.dim, self.order, coeffs)
    }

    /// Recover coefficients −order..order from samples on an m-point grid:
    /// A_k = (1/m) Σ_s f(θ_s) e^{−ikθ_s}. Exact when the sampled function
    /// is a trigonometric polynomial of degree < (m − order) and ≥ order…
    /// in particular whenever m > 2·(true degree).
    pub fn from_samples(samples: &[CMatrix<T>], dim: usize, order: usize) -> Self {
        let m = samples.len();
        assert!(m > 2 * order, "grid too coarse for this order");
        let inv_m = T::one() / T::of_usize(m);
        let mut out = Self::zero(dim, order);
        for k in -(order as i64)..=(order as i64) {
            let mut acc = CMatrix::<T>::zeros(dim, dim);
            for (s, f) in samples.iter().enumerate() {
                let phase =
                    crate::linalg::cexp(Complex::new(T::zero(), -T::of_i64(k) * theta::<T>(s, m)));
                acc += f.map(|z| z * phase);
            }
            *out.coeff_mut(k) = acc.map(|z| z * Complex::new(inv_m, T::zero()));
        }
        out
    }

    /// Σ_k (1 + k²)·‖A_k‖_F², the H¹ norm squared of the series.
    pub fn h1_norm_sq(&self) -> T {
        let mut acc = T::zero();
        for k in self.frequencies() {
            let kk = T::of_i64(k) * T::of_i64(k);
            acc += (T::one() + kk) * crate::linalg::frob_norm_sq(self.coeff(k));
        }
        acc
    }

    /// (1/2π)∫ ‖f‖²_F dθ = Σ_k ‖A_k‖_F².
    pub fn l2_norm_sq(&self) -> T {
        self.coeffs
            .iter()
            .fold(T::zero(), |acc, c| acc + crate::linalg::frob_norm_sq(c))
    }

    /// H¹ norm squared computed by quadrature instead of the coefficient
    /// formula: (1/2π)∫(‖f‖² + ‖f′‖²). Used as the independent cross-check.
    pub fn h1_norm_sq_quadrature(&self) -> T {
        let m = grid_len(self.order).max(2 * self.order + 2);
        let d = self.derivative();
        let fs = self.sample(m);
        let ds = d.sample(m);
        let mut acc = T::zero();
        for s in 0..m {
            acc += crate::linalg::frob_norm_sq(&fs[s]) + crate::linalg::frob_norm_sq(&ds[s]);
        }
        acc / T::of_usize(m)
    }

    /// Drop (or zero-pad) to the given order.
    pub fn truncate(&self, order: usize) -> Self {
        let mut out = Self::zero(self.dim, order);
        let keep = order.min(self.order) as i64;
        for k in -keep..=keep {
            *out.coeff_mut(k) = self.coeff(k).clone();
        }
        out
    }

    /// Largest |k| with a nonzero (above tol) coefficient.
    pub fn effective_order(&self, tol: T) -> usize {
        let mut best = 0usize;
        for k in self.frequencies() {
            if crate::linalg::frob_norm(self.coeff(k)) > tol {
                best = best.max(k.unsigned_abs() as usize);
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frob_norm;
    use nalgebra::DMatrix;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn sample_series() -> MatrixSeries<f64> {
        let mut s = MatrixSeries::<f64>::zero(2, 2);
        *s.coeff_mut(0) =
            DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.2, 0.1), c(0.0, 0.3), c(-1.0, 0.0)]);
        *s.coeff_mut(1) =
            DMatrix::from_row_slice(2, 2, &[c(0.1, 0.2), c(0.0, 0.0), c(0.5, 0.0), c(0.0, -0.2)]);
        *s.coeff_mut(-2) =
            DMatrix::from_row_slice(2, 2, &[c(0.0, 0.1), c(0.3, 0.0), c(0.0, 0.0), c(0.2, 0.2)]);
        s
    }

    #[test]
    fn sampling_roundtrip_is_exact() {
        let s = sample_series();
        let samples = s.sample_own_grid();
        let back = MatrixSeries::from_samples(&samples, 2, 2);
        for k in -2i64..=2 {
            assert!(frob_norm(&(back.coeff(k) - s.coeff(k))) < 1e-13);
        }
    }

    #[test]
    fn product_matches_pointwise() {
        let a = sample_series();
        let b = a.adjoint_series();
        let p = a.mul(&b);
        let th = 0.7345_f64;
        let lhs = p.evaluate(th);
        let rhs = a.evaluate(th) * b.evaluate(th);
        assert!(frob_norm(&(lhs - rhs)) < 1e-13);
    }

    #[test]
    fn h1_fourier_equals_quadrature() {
        let s = sample_series();
        let a = s.h1_norm_sq();
        let b = s.h1_norm_sq_quadrature();
        assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let s = sample_series();
        let d = s.derivative();
        let th = 1.234_f64;
        let h = 1e-6;
        let fd = (s.evaluate(th + h) - s.evaluate(th - h)) / Complex::new(2.0 * h, 0.0);
        assert!(frob_norm(&(fd - d.evaluate(th))) < 1e-7);
    }
}
