//! Finite-dimensional Lie theory for SU(N): the algebra 𝔰𝔲(N), the maximal
//! torus of diagonal matrices, roots, the integer lattice, and the
//! admissibility test used by the level-projection machinery.
//!
//! The invariant inner product is fixed once and for all as
//! ⟨a, b⟩ = −tr(ab). With this normalization the energy of the lattice
//! loop θ ↦ exp(θX) is ½‖X‖², so for SU(2) the critical energies sit at
//! m² and the moment image is bounded by the parabola E = p².
//!
//! Lattice and admissibility arithmetic is exact (i64); floating point
//! enters only through the torus/algebra types.

use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::randutil;
use crate::scalar::Real;

/// Unitarity/determinant tolerance for [`GroupElement`].
pub const GROUP_TOL: f64 = 1e-10;
/// Anti-Hermitian/traceless tolerance for [`LieVector`].
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Distinctness tolerance for regularity of real torus vectors.
pub const REGULAR_TOL: f64 = 1e-12;

/// An element of SU(N).
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement<T: Real> {
    entries: CMatrix<T>,
}

impl<T: Real> GroupElement<T> {
    /// Checked constructor: unitary and det = 1 within [`GROUP_TOL`].
    pub fn new(entries: CMatrix<T>) -> Result<Self> {
        let defect = linalg::special_unitary_defect(&entries).to_double();
        if defect > GROUP_TOL {
            return Err(Error::InvalidArgument(format!(
                "matrix is not special unitary (defect {defect:.3e})"
            )));
        }
        Ok(Self { entries })
    }

    pub fn from_matrix_unchecked(entries: CMatrix<T>) -> Self {
        Self { entries }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            entries: linalg::identity(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.entries
    }

    /// Inverse, which for a unitary matrix is the adjoint.
    pub fn inverse(&self) -> Self {
        Self {
            entries: self.entries.adjoint(),
        }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            entries: &self.entries * &other.entries,
        }
    }

    /// Deviation from SU(N), for validators.
    pub fn defect(&self) -> T {
        linalg::special_unitary_defect(&self.entries)
    }

    /// Off-diagonal Frobenius mass, used to test membership in T.
    pub fn off_diagonal_mass(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                if i != j {
                    acc += self.entries[(i, j)].norm_sqr();
                }
            }
        }
        acc.sqrt()
    }
}

/// An element of 𝔰𝔲(N): anti-Hermitian and traceless.
#[derive(Clone, Debug, PartialEq)]
pub struct LieVector<T: Real> {
    entries: CMatrix<T>,
}

impl<T: Real> LieVector<T> {
    pub fn new(entries: CMatrix<T>) -> Result<Self> {
        let herm = linalg::frob_norm(&(&entries + entries.adjoint())).to_double();
        let tr = linalg::cnorm(entries.trace()).to_double();
        if herm > ALGEBRA_TOL || tr > ALGEBRA_TOL {
            return Err(Error::InvalidArgument(format!(
                "matrix is not in su(N) (anti-Hermitian defect {herm:.3e}, |tr| {tr:.3e})"
            )));
        }
        Ok(Self { entries })
    }

    pub fn from_matrix_unchecked(entries: CMatrix<T>) -> Self {
        Self { entries }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            entries: CMatrix::<T>::zeros(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.entries
    }

    pub fn norm_sq(&self) -> T {
        inner(self, self).expect("same dim")
    }

    /// Ad_g(a) = g a g⁻¹.
    pub fn adjoint_action(&self, g: &GroupElement<T>) -> Self {
        Self {
            entries: g.matrix() * &self.entries * g.inverse().matrix(),
        }
    }
}

/// ⟨a, b⟩ = −tr(ab): the Ad-invariant inner product on 𝔰𝔲(N).
pub fn inner<T: Real>(a: &LieVector<T>, b: &LieVector<T>) -> Result<T> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(-linalg::re_trace_product(a.matrix(), b.matrix()))
}

/// An element of 𝔱 = Lie(T): i·diag(m₁, …, m_N) with Σ m_j = 0.
///
/// The last coordinate is derived from the first N−1 at construction, so
/// the trace-zero constraint holds exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusVector<T: Real> {
    coords: Vec<T>,
}

impl<T: Real> TorusVector<T> {
    /// Build from the chart coordinates m₁, …, m_{N−1}.
    pub fn from_chart(n: usize, chart: &[T]) -> Result<Self> {
        if chart.len() + 1 != n {
            return Err(Error::DimensionMismatch {
                expected: n - 1,
                got: chart.len(),
            });
        }
        let mut coords = chart.to_vec();
        let sum = coords.iter().fold(T::zero(), |a, &x| a + x);
        coords.push(-sum);
        Ok(Self { coords })
    }

    /// Build from all N coordinates; the last is re-derived so that the
    /// sum is exactly zero (the input must already be balanced to 1e−9).
    pub fn from_coords(coords: &[T]) -> Result<Self> {
        let sum = coords.iter().fold(T::zero(), |a, &x| a + x).to_double();
        if sum.abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "torus coordinates sum to {sum:.3e}, not 0"
            )));
        }
        Self::from_chart(coords.len(), &coords[..coords.len() - 1])
    }

    pub fn zero(n: usize) -> Self {
        Self {
            coords: vec![T::zero(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    /// First N−1 coordinates: the serialization chart.
    pub fn chart(&self) -> &[T] {
        &self.coords[..self.coords.len() - 1]
    }

    /// The matrix i·diag(m).
    pub fn to_matrix(&self) -> CMatrix<T> {
        let n = self.dim();
        let mut m = CMatrix::<T>::zeros(n, n);
        for (j, &c) in self.coords.iter().enumerate() {
            m[(j, j)] = Complex::new(T::zero(), c);
        }
        m
    }

    pub fn to_lie_vector(&self) -> LieVector<T> {
        LieVector::from_matrix_unchecked(self.to_matrix())
    }

    /// ⟨X, Y⟩ = Σ m_j m_j′ under the −tr inner product.
    pub fn inner(&self, other: &Self) -> T {
        self.coords
            .iter()
            .zip(&other.coords)
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    pub fn norm_sq(&self) -> T {
        self.inner(self)
    }

    pub fn add(&self, other: &Self) -> Self {
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(&a, &b)| a + b)
            .collect();
        Self { coords }
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            coords: self.coords.iter().map(|&c| c * s).collect(),
        }
    }

    /// True when no two coordinates collide within [`REGULAR_TOL`], i.e.
    /// the vector avoids every root hyperplane ker α.
    pub fn is_regular(&self) -> bool {
        let tol = T::of(REGULAR_TOL);
        for i in 0..self.dim() {
            for j in (i + 1)..self.dim() {
                if (self.coords[i] - self.coords[j]).abs() <= tol {
                    return false;
                }
            }
        }
        true
    }
}

/// A point of the integer lattice Ť = ker(exp: 𝔱 → T): integer
/// coordinates summing to zero. These index the homomorphisms S¹ → T and
/// the critical points of the tilted energies.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeVector {
    coords: Vec<i64>,
}

impl LatticeVector {
    pub fn new(coords: Vec<i64>) -> Result<Self> {
        let sum: i64 = coords.iter().sum();
        if sum != 0 {
            return Err(Error::InvalidArgument(format!(
                "lattice coordinates sum to {sum}, not 0"
            )));
        }
        Ok(Self { coords })
    }

    pub fn from_chart(n: usize, chart: &[i64]) -> Result<Self> {
        if chart.len() + 1 != n {
            return Err(Error::DimensionMismatch {
                expected: n - 1,
                got: chart.len(),
            });
        }
        let mut coords = chart.to_vec();
        coords.push(-chart.iter().sum::<i64>());
        Ok(Self { coords })
    }

    pub fn zero(n: usize) -> Self {
        Self { coords: vec![0; n] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    /// Exact squared norm Σ m_j² (the −tr norm of i·diag(m)).
    pub fn norm_sq(&self) -> i64 {
        self.coords.iter().map(|&c| c * c).sum()
    }

    pub fn negate(&self) -> Self {
        Self {
            coords: self.coords.iter().map(|&c| -c).collect(),
        }
    }

    pub fn to_torus<T: Real>(&self) -> TorusVector<T> {
        TorusVector {
            coords: self.coords.iter().map(|&c| T::of_i64(c)).collect(),
        }
    }

    /// Exact regularity: all coordinates distinct.
    pub fn is_regular(&self) -> bool {
        for i in 0..self.dim() {
            for j in (i + 1)..self.dim() {
                if self.coords[i] == self.coords[j] {
                    return false;
                }
            }
        }
        true
    }

    /// Sorted-descending representative of the Weyl (permutation) orbit.
    pub fn weyl_class(&self) -> Self {
        let mut coords = self.coords.clone();
        coords.sort_unstable_by(|a, b| b.cmp(a));
        Self { coords }
    }
}

/// A root α_{ij} of SU(N), pairing a torus vector to m_i − m_j.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Root {
    pub i: usize,
    pub j: usize,
}

impl Root {
    pub fn new(i: usize, j: usize) -> Result<Self> {
        if i == j {
            return Err(Error::InvalidArgument("root indices must differ".into()));
        }
        Ok(Self { i, j })
    }

    pub fn negated(&self) -> Self {
        Self {
            i: self.j,
            j: self.i,
        }
    }

    pub fn pairing_lattice(&self, x: &LatticeVector) -> i64 {
        x.coords[self.i] - x.coords[self.j]
    }

    pub fn pairing_torus<T: Real>(&self, x: &TorusVector<T>) -> T {
        x.coords[self.i] - x.coords[self.j]
    }
}

/// All N(N−1) roots of SU(N).
pub fn all_roots(n: usize) -> Vec<Root> {
    let mut out = Vec::with_capacity(n * (n - 1));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out.push(Root { i, j });
            }
        }
    }
    out
}

/// Orthogonal projection 𝔰𝔲(N) → 𝔱: keep the imaginary diagonal.
///
/// Self-adjoint and idempotent for the −tr inner product; the diagonal of
/// a traceless matrix is traceless, so no recentering is needed beyond
/// deriving the last coordinate.
pub fn project_t<T: Real>(a: &LieVector<T>) -> TorusVector<T> {
    let n = a.dim();
    let m = a.matrix();
    let chart: Vec<T> = (0..n - 1).map(|j| m[(j, j)].im).collect();
    TorusVector::from_chart(n, &chart).expect("chart size")
}

/// Condition (ii) of the admissibility test, exactly: X is a regular
/// lattice vector and no root value α(X) is divisible by q, i.e. X/q
/// avoids every affine hyperplane α = k, k ∈ ℤ.
pub fn is_admissible(x: &LatticeVector, q: u64) -> Result<bool> {
    if q == 0 {
        return Err(Error::InvalidArgument("q must be positive".into()));
    }
    if !x.is_regular() {
        return Ok(false);
    }
    let q = q as i64;
    for i in 0..x.dim() {
        for j in (i + 1)..x.dim() {
            let alpha = x.coords[i] - x.coords[j];
            if alpha.rem_euclid(q) == 0 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// All lattice vectors with ‖X‖ ≤ radius, sorted by norm and then by
/// coordinates; exhaustive.
pub fn enumerate_lattice(n: usize, radius: f64) -> Vec<LatticeVector> {
    assert!(radius >= 0.0, "radius must be nonnegative");
    let bound = radius.floor() as i64;
    let limit = radius * radius + 1e-9;
    let mut out = Vec::new();
    let mut partial = vec![0i64; n - 1];
    enumerate_rec(n, bound, limit, 0, &mut partial, &mut out);
    out.sort_by(|a, b| {
        a.norm_sq()
            .cmp(&b.norm_sq())
            .then_with(|| a.coords.cmp(&b.coords))
    });
    out
}

fn enumerate_rec(
    n: usize,
    bound: i64,
    limit: f64,
    depth: usize,
    partial: &mut Vec<i64>,
    out: &mut Vec<LatticeVector>,
) {
    if depth == n - 1 {
        let last = -partial.iter().sum::<i64>();
        let mut coords = partial.clone();
        coords.push(last);
        let norm_sq: i64 = coords.iter().map(|&c| c * c).sum();
        if (norm_sq as f64) <= limit {
            out.push(LatticeVector { coords });
        }
        return;
    }
    for v in -bound..=bound {
        partial[depth] = v;
        enumerate_rec(n, bound, limit, depth + 1, partial, out);
    }
}

/// Orthonormal basis of 𝔰𝔲(N) under ⟨a,b⟩ = −tr(ab).
///
/// Order: for each pair i<j the real and imaginary off-diagonal
/// generators, then the N−1 diagonal generators.
pub fn su_basis<T: Real>(n: usize) -> Vec<CMatrix<T>> {
    let mut basis = Vec::with_capacity(n * n - 1);
    let inv_sqrt2 = T::one() / T::of(2.0).sqrt();
    for i in 0..n {
        for j in (i + 1)..n {
            let mut a = CMatrix::<T>::zeros(n, n);
            a[(i, j)] = Complex::new(inv_sqrt2, T::zero());
            a[(j, i)] = Complex::new(-inv_sqrt2, T::zero());
            basis.push(a);
            let mut b = CMatrix::<T>::zeros(n, n);
            b[(i, j)] = Complex::new(T::zero(), inv_sqrt2);
            b[(j, i)] = Complex::new(T::zero(), inv_sqrt2);
            basis.push(b);
        }
    }
    for l in 1..n {
        let norm = (T::of_usize(l) * T::of_usize(l + 1)).sqrt();
        let mut d = CMatrix::<T>::zeros(n, n);
        for p in 0..l {
            d[(p, p)] = Complex::new(T::zero(), T::one() / norm);
        }
        d[(l, l)] = Complex::new(T::zero(), -T::of_usize(l) / norm);
        basis.push(d);
    }
    basis
}

/// Random su(N) vector with i.i.d. normal coefficients of the given scale
/// over the orthonormal basis.
pub fn random_su_vector<T: Real, R: Rng>(n: usize, scale: f64, rng: &mut R) -> LieVector<T> {
    let basis = su_basis::<T>(n);
    let mut m = CMatrix::<T>::zeros(n, n);
    for b in &basis {
        let g = T::of(randutil::normal_f64(rng) * scale);
        m += b.map(|z| z * Complex::new(g, T::zero()));
    }
    LieVector::from_matrix_unchecked(m)
}

/// Random element of SU(N): the exponential of a random algebra vector.
pub fn random_special_unitary<T: Real, R: Rng>(n: usize, rng: &mut R) -> GroupElement<T> {
    let v = random_su_vector::<T, R>(n, 0.7, rng);
    GroupElement::from_matrix_unchecked(linalg::exp_anti_hermitian(v.matrix()))
}

/// Random torus element diag(e^{iφ_1}, …) with det 1.
pub fn random_torus_element<T: Real, R: Rng>(n: usize, rng: &mut R) -> GroupElement<T> {
    let chart: Vec<T> = (0..n - 1)
        .map(|_| T::of(randutil::normal_f64(rng) * 1.5))
        .collect();
    let x = TorusVector::from_chart(n, &chart).expect("chart");
    GroupElement::from_matrix_unchecked(linalg::exp_anti_hermitian(&x.to_matrix()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn idiag2(a: f64, b: f64) -> LieVector<f64> {
        let mut m = CMatrix::<f64>::zeros(2, 2);
        m[(0, 0)] = Complex::new(0.0, a);
        m[(1, 1)] = Complex::new(0.0, b);
        LieVector::from_matrix_unchecked(m)
    }

    #[test]
    fn inner_of_idiag_is_two() {
        let a = idiag2(1.0, -1.0);
        assert!((inner(&a, &a).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn inner_offdiag_vs_diag_vanishes() {
        let a = idiag2(1.0, -1.0);
        let mut m = CMatrix::<f64>::zeros(2, 2);
        m[(0, 1)] = Complex::new(0.3, 0.4);
        m[(1, 0)] = Complex::new(-0.3, 0.4);
        let b = LieVector::from_matrix_unchecked(m);
        assert!(inner(&a, &b).unwrap().abs() < 1e-15);
    }

    #[test]
    fn inner_is_ad_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let g = random_special_unitary::<f64, _>(3, &mut rng);
            let a = random_su_vector::<f64, _>(3, 1.0, &mut rng);
            let b = random_su_vector::<f64, _>(3, 1.0, &mut rng);
            let lhs = inner(&a.adjoint_action(&g), &b.adjoint_action(&g)).unwrap();
            let rhs = inner(&a, &b).unwrap();
            assert!(
                (lhs - rhs).abs() < 1e-12,
                "Ad-invariance violated: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn project_t_examples() {
        // diagonal input is fixed
        let a = idiag2(1.0, -1.0);
        let p = project_t(&a);
        assert_eq!(p.coords(), &[1.0, -1.0]);
        // strictly off-diagonal input maps to zero
        let mut m = CMatrix::<f64>::zeros(2, 2);
        m[(0, 1)] = Complex::new(0.0, 1.0);
        m[(1, 0)] = Complex::new(0.0, 1.0);
        let p = project_t(&LieVector::from_matrix_unchecked(m));
        assert_eq!(p.coords(), &[0.0, 0.0]);
        // i·[[1,1],[1,−1]] projects to i·diag(1,−1)
        let mut m = CMatrix::<f64>::zeros(2, 2);
        m[(0, 0)] = Complex::new(0.0, 1.0);
        m[(0, 1)] = Complex::new(0.0, 1.0);
        m[(1, 0)] = Complex::new(0.0, 1.0);
        m[(1, 1)] = Complex::new(0.0, -1.0);
        let p = project_t(&LieVector::from_matrix_unchecked(m));
        assert_eq!(p.coords(), &[1.0, -1.0]);
    }

    #[test]
    fn project_t_is_idempotent_and_self_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let a = random_su_vector::<f64, _>(3, 1.0, &mut rng);
            let h = random_su_vector::<f64, _>(3, 1.0, &mut rng);
            let pa = project_t(&a);
            // idempotent
            let ppa = project_t(&pa.to_lie_vector());
            for (x, y) in pa.coords().iter().zip(ppa.coords()) {
                assert!((x - y).abs() < 1e-14);
            }
            // ⟨a − pr a, pr h⟩ = 0
            let ph = project_t(&h);
            let residual = LieVector::from_matrix_unchecked(a.matrix() - pa.to_matrix());
            let ip = inner(&residual, &ph.to_lie_vector()).unwrap();
            assert!(ip.abs() < 1e-13);
        }
    }

    #[test]
    fn regularity() {
        assert!(LatticeVector::new(vec![1, -1]).unwrap().is_regular());
        assert!(!LatticeVector::new(vec![1, 1, -2]).unwrap().is_regular());
        assert!(LatticeVector::new(vec![2, 1, -3]).unwrap().is_regular());
    }

    #[test]
    fn admissibility() {
        let x = LatticeVector::new(vec![1, -1]).unwrap();
        assert!(is_admissible(&x, 3).unwrap());
        assert!(!is_admissible(&x, 2).unwrap());
        let zero = LatticeVector::zero(2);
        assert!(!is_admissible(&zero, 5).unwrap());
        assert!(is_admissible(&x, 0).is_err());
    }

    #[test]
    fn admissible_implies_regular() {
        for x in enumerate_lattice(3, 4.0) {
            for q in 1..10u64 {
                if is_admissible(&x, q).unwrap() {
                    assert!(x.is_regular());
                }
            }
        }
    }

    #[test]
    fn lattice_enumeration() {
        let zero_only = enumerate_lattice(2, 0.0);
        assert_eq!(zero_only, vec![LatticeVector::zero(2)]);

        let r15 = enumerate_lattice(2, 1.5);
        assert_eq!(r15.len(), 3);
        assert_eq!(r15[0], LatticeVector::zero(2));
        let coords: Vec<_> = r15.iter().map(|x| x.coords().to_vec()).collect();
        assert!(coords.contains(&vec![1, -1]));
        assert!(coords.contains(&vec![-1, 1]));

        // nesting and odd cardinality (X ↔ −X symmetry plus the origin)
        let small = enumerate_lattice(2, 2.0);
        let large = enumerate_lattice(2, 4.5);
        for x in &small {
            assert!(large.contains(x));
        }
        assert_eq!(large.len() % 2, 1);
    }

    #[test]
    fn su_basis_is_orthonormal() {
        for n in 2..=3 {
            let basis = su_basis::<f64>(n);
            assert_eq!(basis.len(), n * n - 1);
            for (p, a) in basis.iter().enumerate() {
                for (q, b) in basis.iter().enumerate() {
                    let ip = -linalg::re_trace_product(a, b);
                    let expect = if p == q { 1.0 } else { 0.0 };
                    assert!((ip - expect).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn lattice_exponentiates_to_identity() {
        for x in enumerate_lattice(3, 3.0) {
            let t: TorusVector<f64> = x.to_torus();
            let m = t.to_matrix() * Complex::new(std::f64::consts::TAU, 0.0);
            let e = linalg::exp_anti_hermitian(&m);
            assert!(linalg::frob_norm(&(e - linalg::identity::<f64>(3))) < 1e-10);
        }
    }
}
