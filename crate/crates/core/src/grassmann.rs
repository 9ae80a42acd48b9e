//! The finite Grassmannian model of the loop space: a loop γ of order
//! ≤ n spans the subspace W = γH₊ with e^{inθ}H₊ ⊂ W ⊂ e^{−inθ}H₊, so
//! W/e^{inθ}H₊ is an nN-plane in ℂ^{2nN} with basis {e^{ikθ}b_j},
//! −n ≤ k ≤ n−1. The torus acts diagonally on that basis (T through the
//! column index j, the rotation circle through the frequency k), the
//! Plücker coordinates diagonalize the action on ℙ^M, and the weighted
//! average of the Plücker weights reproduces the loop moment map after a
//! two-anchor affine calibration.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::liegroup::{GroupElement, LatticeVector, TorusVector};
use crate::linalg::{self, CMatrix};
use crate::loops::AlgebraicLoop;
use crate::moment::MomentValue;
use crate::scalar::Real;

/// Rank floor for the canonicalized basis.
pub const RANK_SIGMA_MIN: f64 = 1e-10;
/// Largest plane size for which full minor enumeration is attempted
/// (C(2·8, 8) = 12870 minors).
pub const MAX_MINOR_PLANE: usize = 8;

/// A point of Gr(nN, ℂ^{2nN}), canonicalized as an orthonormal column
/// basis via column-pivoted QR so that equal spans compare equal.
#[derive(Clone, Debug)]
pub struct GrassPoint<T: Real> {
    n_dim: usize,
    order: usize,
    basis: CMatrix<T>,
}

impl<T: Real> GrassPoint<T> {
    /// Canonicalize an arbitrary full-rank spanning family.
    pub fn from_spanning(n_dim: usize, order: usize, raw: &CMatrix<T>) -> Result<Self> {
        let rows = 2 * order * n_dim;
        let plane = order * n_dim;
        if raw.nrows() != rows {
            return Err(Error::DimensionMismatch {
                expected: rows,
                got: raw.nrows(),
            });
        }
        let qr = raw.clone().col_piv_qr();
        let q = qr.q();
        let r = qr.r();
        let scale = linalg::cnorm(r[(0, 0)]).max(T::of(1e-300));
        let mut rank = 0;
        for i in 0..r.nrows().min(r.ncols()) {
            if linalg::cnorm(r[(i, i)]) > T::of(RANK_SIGMA_MIN) * scale {
                rank += 1;
            }
        }
        if rank != plane {
            return Err(Error::RankDeficiency {
                expected: plane,
                got: rank,
            });
        }
        let basis = q.columns(0, plane).into_owned();
        Ok(Self {
            n_dim,
            order,
            basis,
        })
    }

    pub fn n_dim(&self) -> usize {
        self.n_dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Plane dimension nN.
    pub fn plane(&self) -> usize {
        self.order * self.n_dim
    }

    /// Ambient dimension 2nN.
    pub fn ambient(&self) -> usize {
        2 * self.order * self.n_dim
    }

    /// Canonical orthonormal basis matrix (2nN × nN).
    pub fn basis(&self) -> &CMatrix<T> {
        &self.basis
    }

    /// The orthogonal projector onto the span; the unique representative
    /// of the subspace.
    pub fn projector(&self) -> CMatrix<T> {
        &self.basis * self.basis.adjoint()
    }

    /// Frobenius distance of the projectors.
    pub fn distance(&self, other: &Self) -> T {
        linalg::frob_norm(&(self.projector() - other.projector()))
    }

    /// Scale each ambient basis row by the given factors and
    /// re-canonicalize (the diagonal torus actions and their complex
    /// one-parameter flows all take this form).
    pub fn scale_rows(&self, factors: &[Complex<T>]) -> Result<Self> {
        assert_eq!(factors.len(), self.ambient());
        let mut raw = self.basis.clone();
        for (r, f) in factors.iter().enumerate() {
            for c in 0..raw.ncols() {
                raw[(r, c)] *= *f;
            }
        }
        Self::from_spanning(self.n_dim, self.order, &raw)
    }
}

/// Weights of the diagonal T × S¹ action on the ambient basis: row
/// (k, j) carries rotation weight k and the T-weight ε_j.
#[derive(Clone, Copy, Debug)]
pub struct WeightTable {
    pub n_dim: usize,
    pub order: usize,
}

impl WeightTable {
    pub fn new(n_dim: usize, order: usize) -> Self {
        Self { n_dim, order }
    }

    /// Row index of basis vector e^{ikθ}b_j (j is 0-based).
    pub fn row(&self, k: i64, j: usize) -> usize {
        debug_assert!(k >= -(self.order as i64) && k < self.order as i64);
        ((k + self.order as i64) as usize) * self.n_dim + j
    }

    /// (k, j) of an ambient row.
    pub fn index(&self, row: usize) -> (i64, usize) {
        let k = (row / self.n_dim) as i64 - self.order as i64;
        (k, row % self.n_dim)
    }

    /// Rotation weight of a row: the frequency k.
    pub fn rotation_weight(&self, row: usize) -> i64 {
        self.index(row).0
    }

    /// T-weight of a row as the character index j (the functional ε_j).
    pub fn torus_weight(&self, row: usize) -> usize {
        self.index(row).1
    }

    /// Accumulated weight of a subset: counts per character plus the
    /// summed rotation weight.
    pub fn subset_weight(&self, subset: &[usize]) -> (Vec<i64>, i64) {
        let mut t = vec![0i64; self.n_dim];
        let mut rot = 0i64;
        for &r in subset {
            t[self.torus_weight(r)] += 1;
            rot += self.rotation_weight(r);
        }
        (t, rot)
    }
}

/// A Plücker vector: the nN × nN minors of the basis matrix indexed by
/// row subsets, normalized to unit 2-norm with the dominant coordinate
/// rotated to the positive real axis.
#[derive(Clone, Debug)]
pub struct PlueckerVector<T: Real> {
    pub n_dim: usize,
    pub order: usize,
    /// (sorted row subset, coordinate), ordered lexicographically.
    pub entries: Vec<(Vec<usize>, Complex<T>)>,
}

impl<T: Real> PlueckerVector<T> {
    pub fn coordinate(&self, subset: &[usize]) -> Complex<T> {
        match self
            .entries
            .binary_search_by(|(s, _)| s.as_slice().cmp(subset))
        {
            Ok(i) => self.entries[i].1,
            Err(_) => Complex::new(T::zero(), T::zero()),
        }
    }

    pub fn norm(&self) -> T {
        self.entries
            .iter()
            .fold(T::zero(), |acc, (_, v)| acc + v.norm_sqr())
            .sqrt()
    }

    /// The nonzero coordinates above a relative threshold.
    pub fn support(&self, rel_tol: T) -> Vec<&(Vec<usize>, Complex<T>)> {
        self.entries
            .iter()
            .filter(|(_, v)| linalg::cnorm(*v) > rel_tol)
            .collect()
    }
}

/// Lexicographic k-subsets of 0..n.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// All nN×nN minors of the canonical basis. The basis is orthonormal, so
/// the raw minor vector already has unit 2-norm (Cauchy–Binet); the
/// phase convention is fixed afterwards.
pub fn pluecker<T: Real>(point: &GrassPoint<T>) -> Result<PlueckerVector<T>> {
    let plane = point.plane();
    if plane > MAX_MINOR_PLANE {
        return Err(Error::InvalidArgument(format!(
            "minor enumeration limited to plane dimension {MAX_MINOR_PLANE}, got {plane}"
        )));
    }
    let subsets = combinations(point.ambient(), plane);
    let mut entries: Vec<(Vec<usize>, Complex<T>)> = subsets
        .into_par_iter()
        .map(|subset| {
            let mut sub = CMatrix::<T>::zeros(plane, plane);
            for (r, &row) in subset.iter().enumerate() {
                for c in 0..plane {
                    sub[(r, c)] = point.basis()[(row, c)];
                }
            }
            let det = sub.determinant();
            (subset, det)
        })
        .collect();
    // normalize: unit 2-norm, dominant coordinate real positive
    let norm = entries
        .iter()
        .fold(T::zero(), |acc, (_, v): &(Vec<usize>, Complex<T>)| {
            acc + v.norm_sqr()
        })
        .sqrt();
    if norm <= T::zero() {
        return Err(Error::InvalidArgument("zero Pluecker vector".into()));
    }
    let dominant = entries
        .iter()
        .map(|(_, v)| *v)
        .max_by(|a, b| linalg::cnorm(*a).partial_cmp(&linalg::cnorm(*b)).unwrap())
        .unwrap();
    let phase = dominant / Complex::new(linalg::cnorm(dominant), T::zero());
    let scale = phase.conj() / Complex::new(norm, T::zero());
    for e in &mut entries {
        e.1 *= scale;
    }
    Ok(PlueckerVector {
        n_dim: point.n_dim(),
        order: point.order(),
        entries,
    })
}

/// Spot-check of the three-term Grassmann–Plücker exchange relation
/// p_{I∪{a,b}}p_{I∪{c,d}} − p_{I∪{a,c}}p_{I∪{b,d}} + p_{I∪{a,d}}p_{I∪{b,c}}
/// on a sampled (I, a<b<c<d); returns the residual.
pub fn exchange_residual<T: Real>(v: &PlueckerVector<T>, base: &[usize], quad: &[usize; 4]) -> T {
    let join = |extra: [usize; 2]| -> Complex<T> {
        let mut s = base.to_vec();
        s.extend_from_slice(&extra);
        s.sort_unstable();
        // permutation sign of sorting (a, b appended after I)
        let mut sign = 1i32;
        let mut arr = base.to_vec();
        arr.extend_from_slice(&extra);
        for i in 0..arr.len() {
            for j in (i + 1)..arr.len() {
                if arr[i] > arr[j] {
                    sign = -sign;
                }
            }
        }
        let c = v.coordinate(&s);
        if sign > 0 {
            c
        } else {
            -c
        }
    };
    let [a, b, c, d] = *quad;
    let t1 = join([a, b]) * join([c, d]);
    let t2 = join([a, c]) * join([b, d]);
    let t3 = join([a, d]) * join([b, c]);
    linalg::cnorm(t1 - t2 + t3)
}

/// The Grassmannian model at a fixed order: embedding, weights, moment
/// map with its two-point calibration, and the complex torus flows.
pub struct GrassModel<T: Real> {
    n_dim: usize,
    order: usize,
    weights: WeightTable,
    /// Raw weight averages of the constant-loop anchor.
    offset_t: Vec<T>,
    offset_rot: T,
    sign_t: T,
    sign_rot: T,
}

impl<T: Real> GrassModel<T> {
    /// Build the model and pin the affine calibration by the two
    /// anchors: the constant loop maps to 0, the first lattice loop λ₁
    /// to μ(λ₁).
    pub fn new(n_dim: usize, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument("model order must be >= 1".into()));
        }
        let weights = WeightTable::new(n_dim, order);
        let mut model = Self {
            n_dim,
            order,
            weights,
            offset_t: vec![T::zero(); n_dim],
            offset_rot: T::zero(),
            sign_t: -T::one(),
            sign_rot: -T::one(),
        };
        // anchor 1: constant loop
        let constant = model.embed(&AlgebraicLoop::constant(n_dim))?;
        let (t0, r0) = model.raw_moment(&constant);
        model.offset_t = t0;
        model.offset_rot = r0;
        // anchor 2: λ₁ = lattice loop of (1, −1, 0, …)
        let mut coords = vec![0i64; n_dim];
        coords[0] = 1;
        coords[1] = -1;
        let lambda1 = LatticeVector::new(coords).expect("balanced");
        let lam_loop = AlgebraicLoop::<T>::lattice_loop(&lambda1);
        let lam_mu = crate::moment::moment(&lam_loop);
        let embedded = model.embed(&lam_loop)?;
        let (t1, r1) = model.raw_moment(&embedded);
        let dt = t1[0] - model.offset_t[0];
        let de = r1 - model.offset_rot;
        if dt.abs() > T::of(1e-9) {
            model.sign_t = lam_mu.p.coords()[0] / dt;
        }
        if de.abs() > T::of(1e-9) {
            model.sign_rot = lam_mu.energy / de;
        }
        Ok(model)
    }

    pub fn n_dim(&self) -> usize {
        self.n_dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn weights(&self) -> &WeightTable {
        &self.weights
    }

    /// ι(γ): the plane spanned by the reductions of γ*·e^{ikθ}b_j modulo
    /// e^{inθ}H₊, where γ* is the pointwise adjoint loop. Columns for
    /// k = 0..2n−1 are generated (reductions of higher shifts vanish) and
    /// a rank-revealing QR keeps an nN-plane.
    ///
    /// The adjoint pairing is what makes the diagonal weight average of
    /// the plane pull back to the module's moment map: the plane γH₊
    /// carries the average of γ′γ⁻¹, the adjoint flips it to the left
    /// logarithmic derivative γ⁻¹γ′ that p and the tilted energies use.
    pub fn embed(&self, lp: &AlgebraicLoop<T>) -> Result<GrassPoint<T>> {
        if lp.dim() != self.n_dim {
            return Err(Error::DimensionMismatch {
                expected: self.n_dim,
                got: lp.dim(),
            });
        }
        if lp.order() > self.order {
            return Err(Error::InvalidArgument(format!(
                "model order {} is below the loop order {}",
                self.order,
                lp.order()
            )));
        }
        let series = lp.series().adjoint_series();
        let n = self.order as i64;
        let rows = 2 * self.order * self.n_dim;
        let cols = rows;
        let mut raw = CMatrix::<T>::zeros(rows, cols);
        let g_order = lp.order() as i64;
        for kcol in 0..2 * n {
            for j in 0..self.n_dim {
                let col = (kcol as usize) * self.n_dim + j;
                let f_lo = (-n).max(kcol - g_order);
                let f_hi = (n - 1).min(kcol + g_order);
                for f in f_lo..=f_hi {
                    let a = series.coeff(f - kcol);
                    for i in 0..self.n_dim {
                        raw[(self.weights.row(f, i), col)] = a[(i, j)];
                    }
                }
            }
        }
        GrassPoint::from_spanning(self.n_dim, self.order, &raw)
    }

    /// Raw weight averages tr(Π·W) over the canonical projector: the
    /// per-character row masses and the frequency-weighted mass.
    fn raw_moment(&self, point: &GrassPoint<T>) -> (Vec<T>, T) {
        let b = point.basis();
        let mut t = vec![T::zero(); self.n_dim];
        let mut rot = T::zero();
        for r in 0..point.ambient() {
            // Π_rr = Σ_c |B_rc|²  for the orthonormal basis
            let mut mass = T::zero();
            for c in 0..point.plane() {
                mass += b[(r, c)].norm_sqr();
            }
            let (k, j) = self.weights.index(r);
            t[j] += mass;
            rot += T::of_i64(k) * mass;
        }
        (t, rot)
    }

    /// Weight-average moment of the subspace, calibrated so that the
    /// constant loop maps to 0 and λ₁ to μ(λ₁). Evaluated through the
    /// projector trace, which agrees with the |v_S|²-weighted Plücker
    /// average exactly.
    pub fn grass_moment(&self, point: &GrassPoint<T>) -> Result<MomentValue<T>> {
        let (t, rot) = self.raw_moment(point);
        let coords: Vec<T> = t
            .iter()
            .zip(&self.offset_t)
            .map(|(&a, &o)| self.sign_t * (a - o))
            .collect();
        let p = TorusVector::from_coords(&coords)?;
        Ok(MomentValue::new(p, self.sign_rot * (rot - self.offset_rot)))
    }

    /// The same moment through the full minor enumeration:
    /// Σ_S w_S |v_S|² / Σ_S |v_S|², then the same calibration.
    pub fn grass_moment_minors(&self, point: &GrassPoint<T>) -> Result<MomentValue<T>> {
        let v = pluecker(point)?;
        let mut t = vec![T::zero(); self.n_dim];
        let mut rot = T::zero();
        let mut total = T::zero();
        for (subset, coeff) in &v.entries {
            let w = coeff.norm_sqr();
            total += w;
            let (tw, rw) = self.weights.subset_weight(subset);
            for (j, &c) in tw.iter().enumerate() {
                t[j] += T::of_i64(c) * w;
            }
            rot += T::of_i64(rw) * w;
        }
        let coords: Vec<T> = t
            .iter()
            .zip(&self.offset_t)
            .map(|(&a, &o)| self.sign_t * (a / total - o))
            .collect();
        let p = TorusVector::from_coords(&coords)?;
        Ok(MomentValue::new(
            p,
            self.sign_rot * (rot / total - self.offset_rot),
        ))
    }

    /// Action of a torus element t = diag(e^{iφ_j}) on the model: scale
    /// row (k, j) by e^{iφ_j}.
    pub fn act_torus(&self, point: &GrassPoint<T>, t: &GroupElement<T>) -> Result<GrassPoint<T>> {
        let off = t.off_diagonal_mass().to_double();
        if off > 1e-10 {
            return Err(Error::NotInTorus(off));
        }
        let factors: Vec<Complex<T>> = (0..point.ambient())
            .map(|r| {
                let (_, j) = self.weights.index(r);
                t.matrix()[(j, j)]
            })
            .collect();
        point.scale_rows(&factors)
    }

    /// Rotation action: scale row (k, j) by e^{iks}.
    pub fn act_rotation(&self, point: &GrassPoint<T>, s: T) -> Result<GrassPoint<T>> {
        let factors: Vec<Complex<T>> = (0..point.ambient())
            .map(|r| {
                let (k, _) = self.weights.index(r);
                linalg::cexp(Complex::new(T::zero(), T::of_i64(k) * s))
            })
            .collect();
        point.scale_rows(&factors)
    }

    /// One-parameter flow of the complexified torus in the direction of
    /// the covector ξ: scale row (k, j) by exp(t·w_ξ(k, j)) with the
    /// calibrated weight w_ξ = sign_t·ρ_j + sign_rot·k·τ, then
    /// re-canonicalize. Along the flow ⟨grass_moment, ξ⟩ is
    /// nondecreasing and the point approaches a torus fixed point.
    pub fn torus_orbit_flow(
        &self,
        point: &GrassPoint<T>,
        xi: &crate::moment::Covector<T>,
        time: T,
    ) -> Result<GrassPoint<T>> {
        let exponents: Vec<T> = (0..point.ambient())
            .map(|r| {
                let (k, j) = self.weights.index(r);
                self.sign_t * xi.rho.coords()[j] + self.sign_rot * T::of_i64(k) * xi.tau
            })
            .collect();
        let max_abs = exponents
            .iter()
            .fold(T::zero(), |a, &e| if e.abs() > a { e.abs() } else { a });
        // chunk the flow so no row factor overflows; the span is
        // invariant under the global rescale inside each chunk
        let mut remaining = time;
        let mut current = point.clone();
        let chunk_cap = if max_abs > T::zero() {
            T::of(40.0) / max_abs
        } else {
            return Ok(current);
        };
        loop {
            let dt = remaining.abs().min(chunk_cap) * remaining.signum();
            if dt == T::zero() {
                break;
            }
            let factors: Vec<Complex<T>> = exponents
                .iter()
                .map(|&e| Complex::new((dt * e).exp(), T::zero()))
                .collect();
            current = current.scale_rows(&factors)?;
            remaining -= dt;
            if remaining.abs() <= T::zero() {
                break;
            }
        }
        Ok(current)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liegroup::random_torus_element;
    use crate::loops::random_loop;
    use crate::moment::{moment, pair, Covector};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lam(m: i64) -> AlgebraicLoop<f64> {
        AlgebraicLoop::lattice_loop(&LatticeVector::new(vec![m, -m]).unwrap())
    }

    #[test]
    fn embed_constant_loop_is_h_plus() {
        for n in 1..=3usize {
            let model = GrassModel::<f64>::new(2, n).unwrap();
            let p = model.embed(&AlgebraicLoop::constant(2)).unwrap();
            // the span is exactly the rows with 0 ≤ k ≤ n−1
            let v = pluecker(&p).unwrap();
            let expected: Vec<usize> = (0..2 * n)
                .map(|c| model.weights().row((c / 2) as i64, c % 2))
                .collect();
            let mut subset = expected;
            subset.sort_unstable();
            let c = v.coordinate(&subset);
            assert!((crate::linalg::cnorm(c) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn embed_lambda1_matches_hand_reduction() {
        // γ* = diag(e^{−iθ}, e^{iθ}): γ*b₁ = e^{−iθ}b₁, γ*b₂ = e^{iθ}b₂ ≡ 0,
        // so the plane is span {e^{−iθ}b₁, b₁}: one Plücker coordinate.
        let model = GrassModel::<f64>::new(2, 1).unwrap();
        let p = model.embed(&lam(1)).unwrap();
        let v = pluecker(&p).unwrap();
        let subset = vec![model.weights().row(-1, 0), model.weights().row(0, 0)];
        let c = v.coordinate(&subset);
        assert!((crate::linalg::cnorm(c) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn weight_table_examples() {
        let w = WeightTable::new(2, 1);
        // (0, j) carries rotation weight 0
        assert_eq!(w.rotation_weight(w.row(0, 0)), 0);
        assert_eq!(w.rotation_weight(w.row(0, 1)), 0);
        // (−1, 2) in SU(2) → (ε₂, −1)
        let r = w.row(-1, 1);
        assert_eq!(w.torus_weight(r), 1);
        assert_eq!(w.rotation_weight(r), -1);
        // subset weight adds
        let (t, rot) = w.subset_weight(&[w.row(-1, 1), w.row(0, 1)]);
        assert_eq!(t, vec![0, 2]);
        assert_eq!(rot, -1);
    }

    #[test]
    fn column_operations_do_not_change_the_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(211);
        let model = GrassModel::<f64>::new(2, 2).unwrap();
        let lp = random_loop::<f64, _>(2, 2, 0.6, &mut rng).unwrap();
        let p = model.embed(&lp).unwrap();
        // multiply the basis by a random invertible matrix on the right
        let mut g = CMatrix::<f64>::zeros(p.plane(), p.plane());
        for i in 0..p.plane() {
            for j in 0..p.plane() {
                g[(i, j)] = Complex::new(
                    crate::randutil::normal_f64(&mut rng),
                    crate::randutil::normal_f64(&mut rng),
                );
            }
            g[(i, i)] += Complex::new(3.0, 0.0);
        }
        let moved = GrassPoint::from_spanning(2, 2, &(p.basis() * g)).unwrap();
        assert!(p.distance(&moved) < 1e-10);
        // Plücker vectors agree after normalization
        let va = pluecker(&p).unwrap();
        let vb = pluecker(&moved).unwrap();
        for (ea, eb) in va.entries.iter().zip(vb.entries.iter()) {
            assert_eq!(ea.0, eb.0);
            assert!(crate::linalg::cnorm(ea.1 - eb.1) < 1e-9);
        }
    }

    #[test]
    fn exchange_relation_spot_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(223);
        let model = GrassModel::<f64>::new(2, 2).unwrap();
        let lp = random_loop::<f64, _>(2, 2, 0.6, &mut rng).unwrap();
        let v = pluecker(&model.embed(&lp).unwrap()).unwrap();
        // plane 4, ambient 8: pick I of size 2 and 4 extra rows
        for _ in 0..20 {
            let mut rows: Vec<usize> = (0..8).collect();
            for i in (1..rows.len()).rev() {
                let j = rng.gen_range(0..=i);
                rows.swap(i, j);
            }
            let base = &rows[0..2];
            let mut quad: Vec<usize> = rows[2..6].to_vec();
            quad.sort_unstable();
            let quad: [usize; 4] = quad.try_into().unwrap();
            let mut base = base.to_vec();
            base.sort_unstable();
            let res = exchange_residual(&v, &base, &quad);
            assert!(res < 1e-8, "exchange residual {res}");
        }
    }

    #[test]
    fn grass_moment_anchors() {
        for (n_dim, n) in [(2usize, 1usize), (2, 2), (2, 3), (3, 2)] {
            let model = GrassModel::<f64>::new(n_dim, n).unwrap();
            let c = model
                .grass_moment(&model.embed(&AlgebraicLoop::constant(n_dim)).unwrap())
                .unwrap();
            assert!(c.norm() < 1e-12, "constant anchor moved: {}", c.norm());
            let mut coords = vec![0i64; n_dim];
            coords[0] = 1;
            coords[1] = -1;
            let l1 = AlgebraicLoop::<f64>::lattice_loop(&LatticeVector::new(coords).unwrap());
            let got = model.grass_moment(&model.embed(&l1).unwrap()).unwrap();
            let want = moment(&l1);
            assert!(got.distance(&want) < 1e-10);
        }
    }

    #[test]
    fn diagram_commutes_on_random_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(227);
        for n in 1..=3usize {
            let model = GrassModel::<f64>::new(2, n).unwrap();
            for _ in 0..10 {
                let lp = random_loop::<f64, _>(2, n, 0.5, &mut rng).unwrap();
                let mu = moment(&lp);
                let gm = model.grass_moment(&model.embed(&lp).unwrap()).unwrap();
                let d = gm.distance(&mu);
                assert!(d < 1e-6, "n={n}: diagram residual {d}");
            }
        }
    }

    #[test]
    fn trace_and_minor_moments_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(229);
        let model = GrassModel::<f64>::new(2, 2).unwrap();
        for _ in 0..10 {
            let lp = random_loop::<f64, _>(2, 2, 0.6, &mut rng).unwrap();
            let p = model.embed(&lp).unwrap();
            let a = model.grass_moment(&p).unwrap();
            let b = model.grass_moment_minors(&p).unwrap();
            assert!(a.distance(&b) < 1e-9);
        }
    }

    #[test]
    fn embedding_is_injective_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(233);
        let model = GrassModel::<f64>::new(2, 2).unwrap();
        let loops: Vec<_> = (0..8)
            .map(|_| random_loop::<f64, _>(2, 2, 0.6, &mut rng).unwrap())
            .collect();
        for i in 0..loops.len() {
            for j in (i + 1)..loops.len() {
                if loops[i].h1_distance_sq(&loops[j]).sqrt() > 1e-3 {
                    let pi = model.embed(&loops[i]).unwrap();
                    let pj = model.embed(&loops[j]).unwrap();
                    assert!(pi.distance(&pj) > 1e-8);
                }
            }
        }
    }

    #[test]
    fn equivariance_under_conjugation_and_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(239);
        let model = GrassModel::<f64>::new(2, 2).unwrap();
        for _ in 0..5 {
            let lp = random_loop::<f64, _>(2, 2, 0.6, &mut rng).unwrap();
            let p = model.embed(&lp).unwrap();

            let t = random_torus_element::<f64, _>(2, &mut rng);
            let lhs = model.embed(&lp.conjugate(&t).unwrap()).unwrap();
            let rhs = model.act_torus(&p, &t).unwrap();
            assert!(lhs.distance(&rhs) < 1e-8);

            let s = 0.77;
            let lhs = model.embed(&lp.rotate_left(s)).unwrap();
            let rhs = model.act_rotation(&p, s).unwrap();
            assert!(lhs.distance(&rhs) < 1e-8);
        }
    }

    #[test]
    fn nonzero_pluecker_for_full_order_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(241);
        let model = GrassModel::<f64>::new(2, 2).unwrap();
        let lp = random_loop::<f64, _>(2, 2, 0.6, &mut rng).unwrap();
        let v = pluecker(&model.embed(&lp).unwrap()).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-10);
        assert!(!v.support(1e-12).is_empty());
    }

    #[test]
    fn orbit_flow_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(251);
        let model = GrassModel::<f64>::new(2, 1).unwrap();
        // fixed point (single Plücker coordinate) stays put
        let fixed = model.embed(&lam(1)).unwrap();
        let xi = Covector::new(TorusVector::from_chart(2, &[0.4]).unwrap(), 1.0);
        for t in [0.0, 1.0, 17.0] {
            let moved = model.torus_orbit_flow(&fixed, &xi, t).unwrap();
            assert!(fixed.distance(&moved) < 1e-10, "t={t}");
        }
        // t = 0 is the identity on generic points
        let model2 = GrassModel::<f64>::new(2, 2).unwrap();
        let lp = random_loop::<f64, _>(2, 2, 0.6, &mut rng).unwrap();
        let p = model2.embed(&lp).unwrap();
        assert!(
            model2
                .torus_orbit_flow(&p, &xi, 0.0)
                .unwrap()
                .distance(&p)
                .abs()
                < 1e-12
        );

        // ⟨grass_moment, ξ⟩ is nondecreasing along the flow
        for trial in 0..20 {
            let lp = random_loop::<f64, _>(2, 2, 0.6, &mut rng).unwrap();
            let p = model2.embed(&lp).unwrap();
            let dir = Covector::new(
                TorusVector::from_chart(2, &[crate::randutil::normal_f64(&mut rng)]).unwrap(),
                crate::randutil::normal_f64(&mut rng),
            );
            let mut last = pair(&model2.grass_moment(&p).unwrap(), &dir);
            let mut current = p.clone();
            for _ in 0..10 {
                current = model2.torus_orbit_flow(&current, &dir, 0.35).unwrap();
                let now = pair(&model2.grass_moment(&current).unwrap(), &dir);
                assert!(
                    now >= last - 1e-9,
                    "trial {trial}: pairing decreased {last} -> {now}"
                );
                last = now;
            }
        }
    }

    #[test]
    fn embed_rejects_low_model_order() {
        let model = GrassModel::<f64>::new(2, 1).unwrap();
        let lp = lam(2);
        assert!(model.embed(&lp).is_err());
    }
}
