//! Algebraic loops: finite Fourier series γ(θ) = Σ_{|k|≤n} A_k e^{ikθ}
//! that are based (γ(0) = I) and SU(N)-valued on the quadrature grid,
//! together with their tangent vectors, the torus and rotation actions,
//! H¹ norms and the retraction that sends drifted Fourier data back onto
//! the constraint set.

use nalgebra::Cholesky;
use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fourier::{grid_len, theta, MatrixSeries};
use crate::liegroup::{su_basis, GroupElement, LatticeVector};
use crate::linalg::{self, CMatrix};
use crate::randutil;
use crate::scalar::Real;

/// Based-condition tolerance: ‖Σ A_k − I‖_F.
pub const BASED_TOL: f64 = 1e-9;
/// Group-valuedness tolerance at the grid samples.
pub const SAMPLE_TOL: f64 = 1e-8;
/// Tangent pointwise-algebra tolerance at the grid samples.
pub const TANGENT_TOL: f64 = 1e-9;
/// Singular-value floor below which retraction gives up on a sample.
pub const RETRACT_SIGMA_MIN: f64 = 1e-10;
/// Defect below which retraction output is accepted.
pub const RETRACT_TARGET: f64 = 1e-12;

/// A based algebraic loop in SU(N).
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraicLoop<T: Real> {
    series: MatrixSeries<T>,
}

/// A free (not necessarily based) algebraic loop, group-valued at samples.
#[derive(Clone, Debug, PartialEq)]
pub struct FreeLoop<T: Real> {
    series: MatrixSeries<T>,
}

/// Pointwise values of an 𝔰𝔲(N)-valued function on the 8n+1 grid.
#[derive(Clone, Debug)]
pub struct SampledAlgebra<T: Real> {
    order: usize,
    values: Vec<CMatrix<T>>,
}

impl<T: Real> SampledAlgebra<T> {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn grid_len(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[CMatrix<T>] {
        &self.values
    }
}

impl<T: Real> AlgebraicLoop<T> {
    /// Checked constructor; validates the based and group-valued invariants.
    pub fn new(series: MatrixSeries<T>) -> Result<Self> {
        let lp = Self { series };
        lp.validate()?;
        Ok(lp)
    }

    pub fn from_series_unchecked(series: MatrixSeries<T>) -> Self {
        Self { series }
    }

    /// The constant loop at the identity.
    pub fn constant(n_dim: usize) -> Self {
        Self {
            series: MatrixSeries::one(n_dim, 0),
        }
    }

    pub fn dim(&self) -> usize {
        self.series.dim()
    }

    pub fn order(&self) -> usize {
        self.series.order()
    }

    pub fn series(&self) -> &MatrixSeries<T> {
        &self.series
    }

    /// γ(θ) = Σ A_k e^{ikθ}. Tolerance violations are the validator's
    /// business, not the evaluator's.
    pub fn evaluate(&self, th: T) -> GroupElement<T> {
        GroupElement::from_matrix_unchecked(self.series.evaluate(th))
    }

    /// Based defect ‖γ(0) − I‖_F plus the worst group defect over the
    /// 8n+1 samples.
    pub fn defect(&self) -> T {
        let n = self.dim();
        let at_zero = self.series.evaluate(T::zero());
        let based = linalg::frob_norm(&(at_zero - linalg::identity::<T>(n)));
        let mut worst = based;
        for s in self.series.sample_own_grid() {
            let d = linalg::special_unitary_defect(&s);
            if d > worst {
                worst = d;
            }
        }
        worst
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        let at_zero = self.series.evaluate(T::zero());
        let based = linalg::frob_norm(&(at_zero - linalg::identity::<T>(n))).to_double();
        if based > BASED_TOL {
            return Err(Error::InvalidLoop(format!(
                "based defect {based:.3e} exceeds {BASED_TOL:.1e}"
            )));
        }
        for (s, sample) in self.series.sample_own_grid().iter().enumerate() {
            let d = linalg::special_unitary_defect(sample).to_double();
            if d > SAMPLE_TOL {
                return Err(Error::InvalidLoop(format!(
                    "sample {s} has SU(N) defect {d:.3e} (tolerance {SAMPLE_TOL:.1e})"
                )));
            }
        }
        Ok(())
    }

    /// The homomorphism loop θ ↦ exp(θX) for a lattice vector X: the
    /// coefficient at frequency m_j is the elementary matrix E_jj, and the
    /// order is max |m_j|.
    pub fn lattice_loop(x: &LatticeVector) -> Self {
        let n = x.dim();
        let order = x
            .coords()
            .iter()
            .map(|c| c.unsigned_abs())
            .max()
            .unwrap_or(0) as usize;
        let mut series = MatrixSeries::<T>::zero(n, order);
        for (j, &m) in x.coords().iter().enumerate() {
            series.coeff_mut(m)[(j, j)] = Complex::new(T::one(), T::zero());
        }
        Self { series }
    }

    /// Rotation action: θ ↦ γ(s + θ)γ(s)⁻¹, exactly on coefficients.
    pub fn rotate(&self, s: T) -> Self {
        let mut shifted = self.series.clone();
        for k in self.series.frequencies() {
            let phase = linalg::cexp(Complex::new(T::zero(), T::of_i64(k) * s));
            *shifted.coeff_mut(k) = self.series.coeff(k).map(|z| z * phase);
        }
        let at_s = self.series.evaluate(s);
        let inv = at_s.clone().try_inverse().unwrap_or_else(|| at_s.adjoint());
        Self {
            series: shifted.mul_const_right(&inv),
        }
    }

    /// The same circle action written with the opposite gauge
    /// normalization: θ ↦ γ(s)⁻¹γ(s + θ). Unlike [`Self::rotate`] this
    /// version transports the left logarithmic derivative by a pure shift
    /// (no conjugation), so the moment map is strictly invariant along it.
    pub fn rotate_left(&self, s: T) -> Self {
        let mut shifted = self.series.clone();
        for k in self.series.frequencies() {
            let phase = linalg::cexp(Complex::new(T::zero(), T::of_i64(k) * s));
            *shifted.coeff_mut(k) = self.series.coeff(k).map(|z| z * phase);
        }
        let at_s = self.series.evaluate(s);
        let inv = at_s.clone().try_inverse().unwrap_or_else(|| at_s.adjoint());
        Self {
            series: shifted.mul_const_left(&inv),
        }
    }

    /// Torus conjugation: (tγ)(θ) = t γ(θ) t⁻¹, coefficientwise.
    pub fn conjugate(&self, t: &GroupElement<T>) -> Result<Self> {
        let off = t.off_diagonal_mass().to_double();
        if off > 1e-10 {
            return Err(Error::NotInTorus(off));
        }
        let tm = t.matrix();
        let tinv = t.inverse();
        Ok(Self {
            series: self.series.conjugate_const(tm, tinv.matrix()),
        })
    }

    /// Samples of γ⁻¹γ′ on the 8n+1 grid, with γ′ taken exactly on the
    /// coefficients. Each value is anti-Hermitian traceless within the
    /// sample tolerance when the loop is valid.
    pub fn log_derivative(&self) -> SampledAlgebra<T> {
        let m = grid_len(self.order());
        let d = self.series.derivative();
        let values = (0..m)
            .map(|s| {
                let th = theta::<T>(s, m);
                let g = self.series.evaluate(th);
                let gp = d.evaluate(th);
                g.adjoint() * gp
            })
            .collect();
        SampledAlgebra {
            order: self.order(),
            values,
        }
    }

    /// Retraction of raw Fourier data onto the loop manifold: evaluate on
    /// the 8n+1 grid of the raw order, replace each sample by its nearest
    /// special unitary (polar factor, det-normalized on the principal
    /// branch), transform back to coefficients of the same order and
    /// right-translate so γ(0) = I. When the polar/truncate pass alone
    /// leaves a visible defect the coefficients are refined in place (see
    /// `fit_group_valued`), so the result always satisfies the loop
    /// invariants. Moves the input by O(its defect).
    pub fn retract(raw: &MatrixSeries<T>) -> Result<Self> {
        Self::retract_polished(raw, raw.order(), T::of(RETRACT_TARGET))
    }

    /// Retraction from pointwise samples on a uniform grid (the grid
    /// length must exceed 2·order).
    pub fn retract_samples(samples: &[CMatrix<T>], dim: usize, order: usize) -> Result<Self> {
        let sigma = T::of(RETRACT_SIGMA_MIN);
        let mut projected = Vec::with_capacity(samples.len());
        for s in samples {
            let q = linalg::special_unitarize(s, sigma)
                .map_err(|e| Error::RetractionFailure(e.to_string()))?;
            projected.push(q);
        }
        let series = MatrixSeries::from_samples(&projected, dim, order);
        Self::rebase(series)
    }

    /// Right-translate a series so that its value at 0 is exactly I.
    fn rebase(series: MatrixSeries<T>) -> Result<Self> {
        let at_zero = series.evaluate(T::zero());
        let inv = at_zero
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::RetractionFailure("loop value at 0 is singular".into()))?;
        Ok(Self {
            series: series.mul_const_right(&inv),
        })
    }

    /// Retraction with an explicit output order and defect target: a
    /// single polar/truncate pass to get close, then a damped Gauss–Newton
    /// fit of the order-n coefficients to the pointwise SU(N) constraints
    /// until the loop invariants hold to `target`.
    pub fn retract_polished(raw: &MatrixSeries<T>, order: usize, target: T) -> Result<Self> {
        let first = Self::retract_samples(
            &raw.sample(grid_len(order.max(raw.order()))),
            raw.dim(),
            order,
        )?;
        if first.defect() <= target {
            return Ok(first);
        }
        let fitted = fit_group_valued(first.series(), target)?;
        Self::rebase(fitted)
    }

    /// H¹ distance squared of the coefficient series.
    pub fn h1_distance_sq(&self, other: &Self) -> T {
        self.series.sub(other.series()).h1_norm_sq()
    }
}

impl<T: Real> FreeLoop<T> {
    pub fn new(series: MatrixSeries<T>) -> Result<Self> {
        for (s, sample) in series.sample_own_grid().iter().enumerate() {
            let d = linalg::special_unitary_defect(sample).to_double();
            if d > SAMPLE_TOL {
                return Err(Error::InvalidLoop(format!(
                    "sample {s} has SU(N) defect {d:.3e}"
                )));
            }
        }
        Ok(Self { series })
    }

    pub fn series(&self) -> &MatrixSeries<T> {
        &self.series
    }

    pub fn evaluate(&self, th: T) -> CMatrix<T> {
        self.series.evaluate(th)
    }
}

/// Σ_k (1 + k²)‖ξ_k‖²_F for any matrix-valued Fourier series; agrees with
/// the quadrature definition (1/2π)∫(‖ξ‖² + ‖ξ′‖²) exactly.
pub fn h1_norm_sq<T: Real>(series: &MatrixSeries<T>) -> T {
    series.h1_norm_sq()
}

/// Gauss–Newton fit of an order-n series to the sample constraints
/// X(θ_s)*X(θ_s) = I, det X(θ_s) = 1 and X(0) = I. The alternating
/// polar/truncate iteration converges too slowly here (the constraint
/// manifold and the band-limited subspace meet at a shallow angle), so
/// the residuals are driven to zero directly.
fn fit_group_valued<T: Real>(start: &MatrixSeries<T>, target: T) -> Result<MatrixSeries<T>> {
    let dim = start.dim();
    let order = start.order();
    let m = grid_len(order);
    let n_coeff = 2 * order + 1;
    let n_param = n_coeff * dim * dim * 2;
    let n_rows = m * (2 * dim * dim + 2) + 2 * dim * dim;
    let eye = linalg::identity::<T>(dim);

    // Cache the mode phases e^{ikθ_s}.
    let mut phases = vec![Complex::new(T::zero(), T::zero()); n_coeff * m];
    for (ci, k) in (-(order as i64)..=order as i64).enumerate() {
        for s in 0..m {
            phases[ci * m + s] =
                linalg::cexp(Complex::new(T::zero(), T::of_i64(k) * theta::<T>(s, m)));
        }
    }

    let push_matrix = |rows: &mut nalgebra::DVector<T>, base: usize, mat: &CMatrix<T>| {
        let mut idx = base;
        for v in mat.iter() {
            rows[idx] = v.re;
            rows[idx + 1] = v.im;
            idx += 2;
        }
    };

    let residual = |series: &MatrixSeries<T>| -> (nalgebra::DVector<T>, Vec<CMatrix<T>>, T) {
        let samples = series.sample(m);
        let mut r = nalgebra::DVector::<T>::zeros(n_rows);
        let mut worst = T::zero();
        let block = 2 * dim * dim + 2;
        for (s, x) in samples.iter().enumerate() {
            let unit = x.adjoint() * x - &eye;
            let det = x.determinant() - Complex::new(T::one(), T::zero());
            push_matrix(&mut r, s * block, &unit);
            r[s * block + 2 * dim * dim] = det.re;
            r[s * block + 2 * dim * dim + 1] = det.im;
            let w = linalg::frob_norm(&unit).max(linalg::cnorm(det));
            if w > worst {
                worst = w;
            }
        }
        let based = series.evaluate(T::zero()) - &eye;
        push_matrix(&mut r, m * block, &based);
        worst = worst.max(linalg::frob_norm(&based));
        (r, samples, worst)
    };

    let mut series = start.clone();
    let (mut r, mut samples, mut worst) = residual(&series);
    let mut lambda = T::of(1e-6);
    let mut restarts = 0u32;
    for _ in 0..120 {
        if worst <= target {
            return Ok(series);
        }
        // Jacobian: parameters are (k, i, j, re/im) of the coefficients.
        let mut jac = nalgebra::DMatrix::<T>::zeros(n_rows, n_param);
        let block = 2 * dim * dim + 2;
        let inverses: Vec<CMatrix<T>> = samples
            .iter()
            .map(|x| x.clone().try_inverse().unwrap_or_else(|| x.adjoint()))
            .collect();
        let dets: Vec<Complex<T>> = samples.iter().map(|x| x.determinant()).collect();
        for ci in 0..n_coeff {
            for i in 0..dim {
                for j in 0..dim {
                    for part in 0..2 {
                        let col = ((ci * dim + i) * dim + j) * 2 + part;
                        let unit_entry = if part == 0 {
                            Complex::new(T::one(), T::zero())
                        } else {
                            Complex::new(T::zero(), T::one())
                        };
                        for (s, x) in samples.iter().enumerate() {
                            let ph = phases[ci * m + s] * unit_entry;
                            // d(X*X): dX*·X + X*·dX with dX = ph·E_ij
                            let mut dunit = CMatrix::<T>::zeros(dim, dim);
                            for c in 0..dim {
                                // dX*·X: (ph·E_ij)* X = conj(ph)·E_ji X
                                dunit[(j, c)] += ph.conj() * x[(i, c)];
                                // X*·dX: X*·ph·E_ij adds ph·(X*)_{r i} at column j
                                dunit[(c, j)] += ph * x[(i, c)].conj();
                            }
                            let base = s * block;
                            let mut idx = base;
                            for v in dunit.iter() {
                                jac[(idx, col)] = v.re;
                                jac[(idx + 1, col)] = v.im;
                                idx += 2;
                            }
                            // d det = det(X)·tr(X⁻¹ dX) = det(X)·ph·(X⁻¹)_{j i}
                            let dd = dets[s] * ph * inverses[s][(j, i)];
                            jac[(base + 2 * dim * dim, col)] = dd.re;
                            jac[(base + 2 * dim * dim + 1, col)] = dd.im;
                        }
                        // based rows: dX(0) = 1·E_ij·unit_entry per coefficient
                        let base = m * block;
                        let entry_row = base + (j * dim + i) * 2;
                        let v = unit_entry;
                        jac[(entry_row, col)] += v.re;
                        jac[(entry_row + 1, col)] += v.im;
                    }
                }
            }
        }
        // Levenberg–Marquardt step; the system is rank deficient along
        // the solution manifold, the damping keeps the step well posed.
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &r;
        let current_norm = r.norm();
        let mut improved = false;
        for _ in 0..14 {
            let mut lhs = jtj.clone();
            for d in 0..n_param {
                lhs[(d, d)] += lambda;
            }
            let delta = match Cholesky::new(lhs) {
                Some(ch) => ch.solve(&jtr),
                None => {
                    lambda *= T::of(10.0);
                    continue;
                }
            };
            let mut candidate = series.clone();
            for (col, k) in candidate
                .frequencies()
                .collect::<Vec<_>>()
                .into_iter()
                .enumerate()
            {
                let coeff = candidate.coeff_mut(k);
                for i in 0..dim {
                    for j in 0..dim {
                        let dre = delta[((col * dim + i) * dim + j) * 2];
                        let dim_part = delta[((col * dim + i) * dim + j) * 2 + 1];
                        coeff[(i, j)] -= Complex::new(dre, dim_part);
                    }
                }
            }
            let (nr, ns, nw) = residual(&candidate);
            if nr.norm() < current_norm {
                series = candidate;
                r = nr;
                samples = ns;
                worst = nw;
                improved = true;
                lambda = (lambda * T::of(0.25)).max(T::of(1e-14));
                break;
            }
            lambda *= T::of(10.0);
        }
        if !improved {
            // Kick out of the local valley with a polar pass and retry.
            if restarts >= 3 {
                break;
            }
            restarts += 1;
            let projected: std::result::Result<Vec<_>, Error> = samples
                .iter()
                .map(|x| linalg::special_unitarize(x, T::of(RETRACT_SIGMA_MIN)))
                .collect();
            series = MatrixSeries::from_samples(&projected?, dim, order);
            let (nr, ns, nw) = residual(&series);
            r = nr;
            samples = ns;
            worst = nw;
            lambda = T::of(1e-3);
        }
    }
    if worst <= target {
        Ok(series)
    } else {
        Err(Error::RetractionFailure(format!(
            "constraint fit stalled at defect {:.3e}",
            worst.to_double()
        )))
    }
}

/// A tangent vector to the loop space at γ, left-translated to the
/// identity: δγ = γ·ξ with ξ(θ) ∈ 𝔰𝔲(N) pointwise and ξ(0) = 0.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopTangent<T: Real> {
    series: MatrixSeries<T>,
}

impl<T: Real> LoopTangent<T> {
    pub fn new(series: MatrixSeries<T>) -> Result<Self> {
        let t = Self { series };
        t.validate()?;
        Ok(t)
    }

    pub fn from_series_unchecked(series: MatrixSeries<T>) -> Self {
        Self { series }
    }

    pub fn zero(n_dim: usize, order: usize) -> Self {
        Self {
            series: MatrixSeries::zero(n_dim, order),
        }
    }

    pub fn dim(&self) -> usize {
        self.series.dim()
    }

    pub fn order(&self) -> usize {
        self.series.order()
    }

    pub fn series(&self) -> &MatrixSeries<T> {
        &self.series
    }

    pub fn validate(&self) -> Result<()> {
        // based: Σ ξ_k = 0
        let sum = self.series.evaluate(T::zero());
        let based = linalg::frob_norm(&sum).to_double();
        if based > TANGENT_TOL {
            return Err(Error::InvalidLoop(format!(
                "tangent is not based (ξ(0) norm {based:.3e})"
            )));
        }
        for (s, v) in self.series.sample_own_grid().iter().enumerate() {
            let herm = linalg::frob_norm(&(v + v.adjoint())).to_double();
            let tr = linalg::cnorm(v.trace()).to_double();
            if herm > TANGENT_TOL || tr > TANGENT_TOL {
                return Err(Error::InvalidLoop(format!(
                    "tangent sample {s} leaves su(N) (anti-Hermitian defect {herm:.3e}, |tr| {tr:.3e})"
                )));
            }
        }
        Ok(())
    }

    pub fn h1_norm_sq(&self) -> T {
        self.series.h1_norm_sq()
    }

    /// H¹ pairing ⟨ξ, η⟩₁ = Σ_k (1+k²)·Re⟨ξ_k, η_k⟩_F.
    pub fn h1_inner(&self, other: &Self) -> T {
        let mut acc = T::zero();
        let n = self.order().min(other.order()) as i64;
        for k in -n..=n {
            let a = self.series.coeff(k);
            let b = other.series.coeff(k);
            let mut re = T::zero();
            for (x, y) in a.iter().zip(b.iter()) {
                re += x.re * y.re + x.im * y.im;
            }
            let kk = T::of_i64(k) * T::of_i64(k);
            acc += (T::one() + kk) * re;
        }
        acc
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            series: self.series.scale(Complex::new(s, T::zero())),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            series: self.series.add(other.series()),
        }
    }
}

/// Real coordinates on the based tangent space.
///
/// The chart fixes an orthonormal basis {T_a} of 𝔰𝔲(N) and writes
/// ξ(θ) = Σ_a f_a(θ)·T_a with f_a a real trigonometric polynomial of
/// order ≤ n vanishing at 0, spanned by {cos kθ − 1, sin kθ}. The based
/// coordinates are the (a, k, cos/sin) coefficients; the ambient
/// coordinates are the raw mode coefficients (mode 0 over su(N), modes
/// k ≥ 1 over complexified su(N)), in which the H¹ Gram matrix is
/// diagonal.
pub struct BasedChart<T: Real> {
    n_dim: usize,
    order: usize,
    basis: Vec<CMatrix<T>>,
}

impl<T: Real> BasedChart<T> {
    pub fn new(n_dim: usize, order: usize) -> Self {
        Self {
            n_dim,
            order,
            basis: su_basis::<T>(n_dim),
        }
    }

    pub fn n_dim(&self) -> usize {
        self.n_dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of su(N) basis directions, N² − 1.
    pub fn algebra_dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CMatrix<T>] {
        &self.basis
    }

    /// Dimension of the based tangent space: (N²−1)·2n.
    pub fn dim(&self) -> usize {
        self.algebra_dim() * 2 * self.order
    }

    /// Dimension of the ambient mode space: (N²−1)·(2n+1).
    pub fn ambient_dim(&self) -> usize {
        self.algebra_dim() * (2 * self.order + 1)
    }

    /// Flat index of the based coordinate (a, k, component) with
    /// component 0 = cos kθ − 1 and 1 = sin kθ.
    pub fn based_index(&self, a: usize, k: usize, component: usize) -> usize {
        debug_assert!(k >= 1 && k <= self.order);
        (a * self.order + (k - 1)) * 2 + component
    }

    /// Scalar profile of a based basis function and its derivative at θ.
    pub fn profile(&self, k: usize, component: usize, th: T) -> (T, T) {
        let kk = T::of_usize(k);
        let arg = kk * th;
        if component == 0 {
            (arg.cos() - T::one(), -kk * arg.sin())
        } else {
            (arg.sin(), kk * arg.cos())
        }
    }

    /// Assemble a tangent from based coordinates.
    pub fn tangent_from_coords(&self, coords: &[T]) -> LoopTangent<T> {
        assert_eq!(coords.len(), self.dim());
        let half = T::of(0.5);
        let mut series = MatrixSeries::<T>::zero(self.n_dim, self.order);
        for (a, t_a) in self.basis.iter().enumerate() {
            for k in 1..=self.order {
                let c = coords[self.based_index(a, k, 0)];
                let s = coords[self.based_index(a, k, 1)];
                // cos kθ − 1 contributes ½ at ±k and −1 at 0;
                // sin kθ contributes ∓i/2 at ±k.
                let plus = Complex::new(c * half, -s * half);
                let minus = Complex::new(c * half, s * half);
                *series.coeff_mut(k as i64) += t_a.map(|z| z * plus);
                *series.coeff_mut(-(k as i64)) += t_a.map(|z| z * minus);
                *series.coeff_mut(0) += t_a.map(|z| z * Complex::new(-c, T::zero()));
            }
        }
        LoopTangent { series }
    }

    /// Read based coordinates off a based tangent (the k ≥ 1 modes
    /// determine everything).
    pub fn coords_from_tangent(&self, tangent: &LoopTangent<T>) -> Vec<T> {
        assert_eq!(tangent.dim(), self.n_dim);
        assert!(tangent.order() <= self.order);
        let mut coords = vec![T::zero(); self.dim()];
        let two = T::of(2.0);
        for (a, t_a) in self.basis.iter().enumerate() {
            for k in 1..=self.order.min(tangent.order()) {
                // complex coefficient of T_a in ξ_k: tr(ξ_k T_a*)
                let xi = tangent.series.coeff(k as i64);
                let mut c = Complex::new(T::zero(), T::zero());
                for i in 0..self.n_dim {
                    for j in 0..self.n_dim {
                        c += xi[(i, j)] * t_a[(i, j)].conj();
                    }
                }
                coords[self.based_index(a, k, 0)] = two * c.re;
                coords[self.based_index(a, k, 1)] = -two * c.im;
            }
        }
        coords
    }

    /// Ambient coordinates: mode 0 over su(N), then per mode k ≥ 1 the
    /// real and imaginary parts over the complexified basis.
    pub fn ambient_coords(&self, tangent: &LoopTangent<T>) -> Vec<T> {
        let na = self.algebra_dim();
        let mut coords = vec![T::zero(); self.ambient_dim()];
        for (a, t_a) in self.basis.iter().enumerate() {
            for k in 0..=self.order.min(tangent.order()) {
                let xi = tangent.series.coeff(k as i64);
                let mut c = Complex::new(T::zero(), T::zero());
                for i in 0..self.n_dim {
                    for j in 0..self.n_dim {
                        c += xi[(i, j)] * t_a[(i, j)].conj();
                    }
                }
                if k == 0 {
                    coords[a] = c.re;
                } else {
                    let base = na + (k - 1) * 2 * na;
                    coords[base + 2 * a] = c.re;
                    coords[base + 2 * a + 1] = c.im;
                }
            }
        }
        coords
    }

    /// Gram matrix of the H¹ pairing in the ambient mode coordinates.
    /// Distinct Fourier modes are orthogonal, so the matrix is diagonal:
    /// 1 for mode 0 and 2(1 + k²) for mode k (the factor 2 counts the
    /// forced conjugate coefficient at −k).
    pub fn ambient_gram(&self) -> nalgebra::DMatrix<T> {
        let na = self.algebra_dim();
        let dim = self.ambient_dim();
        let mut g = nalgebra::DMatrix::<T>::zeros(dim, dim);
        for a in 0..na {
            g[(a, a)] = T::one();
        }
        for k in 1..=self.order {
            let w = T::of(2.0) * (T::one() + T::of_usize(k * k));
            let base = na + (k - 1) * 2 * na;
            for a in 0..2 * na {
                g[(base + a, base + a)] = w;
            }
        }
        g
    }

    /// Gram matrix of the H¹ pairing in the based (a, k, cos/sin)
    /// coordinates. Block diagonal over a; within a block the cos–cos
    /// entries are δ_{kl}(1+k²)/2 + 1 (the +1 comes from the shared
    /// constant term), the sin–sin entries δ_{kl}(1+k²)/2, cos–sin zero.
    pub fn based_gram(&self) -> nalgebra::DMatrix<T> {
        let dim = self.dim();
        let mut g = nalgebra::DMatrix::<T>::zeros(dim, dim);
        let half = T::of(0.5);
        for a in 0..self.algebra_dim() {
            for k in 1..=self.order {
                for l in 1..=self.order {
                    let ik = self.based_index(a, k, 0);
                    let il = self.based_index(a, l, 0);
                    let diag = if k == l {
                        (T::one() + T::of_usize(k * k)) * half
                    } else {
                        T::zero()
                    };
                    g[(ik, il)] = diag + T::one();
                    if k == l {
                        let sk = self.based_index(a, k, 1);
                        g[(sk, sk)] = (T::one() + T::of_usize(k * k)) * half;
                    }
                }
            }
        }
        g
    }
}

/// The Gram matrix of the (left-invariant) H¹ metric at γ, expressed in
/// the ambient mode coordinates of tangents of the same layout. By left
/// invariance this equals the Gram at the identity, so it depends only on
/// (N, n).
pub fn h1_gram<T: Real>(lp: &AlgebraicLoop<T>) -> nalgebra::DMatrix<T> {
    BasedChart::<T>::new(lp.dim(), lp.order()).ambient_gram()
}

/// Random based tangent: coefficients i.i.d. Gaussian over the based
/// basis with per-mode scale `scale / (1 + k²)`.
pub fn random_tangent<T: Real, R: Rng>(
    n_dim: usize,
    order: usize,
    scale: f64,
    rng: &mut R,
) -> LoopTangent<T> {
    let chart = BasedChart::<T>::new(n_dim, order);
    let mut coords = vec![T::zero(); chart.dim()];
    for a in 0..chart.algebra_dim() {
        for k in 1..=order {
            let s = scale / (1.0 + (k * k) as f64);
            coords[chart.based_index(a, k, 0)] = T::of(randutil::normal_f64(rng) * s);
            coords[chart.based_index(a, k, 1)] = T::of(randutil::normal_f64(rng) * s);
        }
    }
    chart.tangent_from_coords(&coords)
}

/// Random loop: exponentiate a random based tangent pointwise on the
/// grid and retract to order n.
pub fn random_loop<T: Real, R: Rng>(
    n_dim: usize,
    order: usize,
    scale: f64,
    rng: &mut R,
) -> Result<AlgebraicLoop<T>> {
    let tangent = random_tangent::<T, R>(n_dim, order, scale, rng);
    loop_from_tangent(&tangent, order)
}

/// Pointwise exp of a based tangent, retracted to the requested order.
pub fn loop_from_tangent<T: Real>(
    tangent: &LoopTangent<T>,
    order: usize,
) -> Result<AlgebraicLoop<T>> {
    let m = grid_len(order.max(tangent.order()));
    let samples: Vec<CMatrix<T>> = (0..m)
        .map(|s| {
            let th = theta::<T>(s, m);
            linalg::exp_anti_hermitian(&tangent.series().evaluate(th))
        })
        .collect();
    let raw = MatrixSeries::from_samples(&samples, tangent.dim(), order);
    let lp = AlgebraicLoop::retract_polished(&raw, order, T::of(RETRACT_TARGET))?;
    lp.validate()?;
    Ok(lp)
}
