//! The moment map μ = p ⊕ E of the T × S¹ action, the tilted energy, the
//! symplectic pairing at the identity, and Riemannian H¹ gradients in
//! truncated coordinates.
//!
//! Everything is computed by exact quadrature on the 8n+1 grid: all the
//! integrands that appear are trigonometric polynomials of degree ≤ 4n.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::fourier::{grid_len, theta};
use crate::liegroup::{project_t, LieVector, TorusVector};
use crate::linalg::{self, CMatrix};
use crate::loops::{AlgebraicLoop, BasedChart, LoopTangent};
use crate::scalar::Real;

/// Value of the moment map: the torus component p ∈ 𝔱 and the energy E.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentValue<T: Real> {
    pub p: TorusVector<T>,
    pub energy: T,
}

impl<T: Real> MomentValue<T> {
    pub fn new(p: TorusVector<T>, energy: T) -> Self {
        Self { p, energy }
    }

    pub fn zero(n_dim: usize) -> Self {
        Self {
            p: TorusVector::zero(n_dim),
            energy: T::zero(),
        }
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    /// Norm on 𝔱 ⊕ ℝ: the invariant norm on the first factor, the
    /// standard one on the second.
    pub fn norm(&self) -> T {
        (self.p.norm_sq() + self.energy * self.energy).sqrt()
    }

    pub fn distance(&self, other: &Self) -> T {
        let dp = self.p.add(&other.p.scale(-T::one()));
        let de = self.energy - other.energy;
        (dp.norm_sq() + de * de).sqrt()
    }
}

/// An element (ρ, τ) of 𝔱 ⊕ ℝ, paired against moment values.
#[derive(Clone, Debug, PartialEq)]
pub struct Covector<T: Real> {
    pub rho: TorusVector<T>,
    pub tau: T,
}

impl<T: Real> Covector<T> {
    pub fn new(rho: TorusVector<T>, tau: T) -> Self {
        Self { rho, tau }
    }

    /// (0, 1): the pairing that extracts the energy.
    pub fn energy(n_dim: usize) -> Self {
        Self {
            rho: TorusVector::zero(n_dim),
            tau: T::one(),
        }
    }
}

/// ⟨μ, (ρ, τ)⟩ = ⟨p, ρ⟩ + τ·E.
pub fn pair<T: Real>(mu: &MomentValue<T>, xi: &Covector<T>) -> T {
    mu.p.inner(&xi.rho) + xi.tau * mu.energy
}

/// The energy functional E(γ) = (1/4π)∫‖γ⁻¹γ′‖² dθ.
pub fn energy<T: Real>(lp: &AlgebraicLoop<T>) -> T {
    let u = lp.log_derivative();
    let m = u.grid_len();
    let mut acc = T::zero();
    for v in u.values() {
        acc += linalg::frob_norm_sq(v);
    }
    acc / (T::of(2.0) * T::of_usize(m))
}

/// The torus moment p(γ) = pr_𝔱((1/2π)∫γ⁻¹γ′ dθ).
pub fn t_moment<T: Real>(lp: &AlgebraicLoop<T>) -> TorusVector<T> {
    let u = lp.log_derivative();
    let m = u.grid_len();
    let mut avg = CMatrix::<T>::zeros(lp.dim(), lp.dim());
    for v in u.values() {
        avg += v;
    }
    let inv_m = num_complex::Complex::new(T::one() / T::of_usize(m), T::zero());
    let avg = avg.map(|z| z * inv_m);
    project_t(&LieVector::from_matrix_unchecked(avg))
}

/// μ(γ) = (p(γ), E(γ)), sharing one pass over the samples.
pub fn moment<T: Real>(lp: &AlgebraicLoop<T>) -> MomentValue<T> {
    let u = lp.log_derivative();
    let m = u.grid_len();
    let mut avg = CMatrix::<T>::zeros(lp.dim(), lp.dim());
    let mut e = T::zero();
    for v in u.values() {
        avg += v;
        e += linalg::frob_norm_sq(v);
    }
    let inv_m = num_complex::Complex::new(T::one() / T::of_usize(m), T::zero());
    let avg = avg.map(|z| z * inv_m);
    MomentValue {
        p: project_t(&LieVector::from_matrix_unchecked(avg)),
        energy: e / (T::of(2.0) * T::of_usize(m)),
    }
}

/// The tilted energy (1/4π)∫‖γ⁻¹γ′ + ρ‖² dθ. It equals
/// ⟨μ(γ), (ρ, 1)⟩ + ½‖ρ‖², which pins the additive constant.
pub fn tilted_energy<T: Real>(lp: &AlgebraicLoop<T>, rho: &TorusVector<T>) -> T {
    let u = lp.log_derivative();
    let m = u.grid_len();
    let p = rho.to_matrix();
    let mut acc = T::zero();
    for v in u.values() {
        acc += linalg::frob_norm_sq(&(v + &p));
    }
    acc / (T::of(2.0) * T::of_usize(m))
}

/// Check that a vanishing energy really corresponds to a constant loop:
/// E < 1e−12 must imply every nonzero-frequency coefficient is < 1e−6.
pub fn energy_zero_is_constant<T: Real>(lp: &AlgebraicLoop<T>, e: T) -> bool {
    if e.to_double() >= 1e-12 {
        return true;
    }
    lp.series()
        .frequencies()
        .filter(|&k| k != 0)
        .all(|k| linalg::frob_norm(lp.series().coeff(k)).to_double() < 1e-6)
}

/// The symplectic pairing at the identity on left-translated tangents:
/// ω(ξ, η) = (1/2π)∫⟨ξ(θ), η′(θ)⟩ dθ, by exact quadrature.
pub fn symplectic_form<T: Real>(xi: &LoopTangent<T>, eta: &LoopTangent<T>) -> Result<T> {
    if xi.dim() != eta.dim() {
        return Err(Error::DimensionMismatch {
            expected: xi.dim(),
            got: eta.dim(),
        });
    }
    let order = xi.order().max(eta.order());
    let m = grid_len(order);
    let dp = eta.series().derivative();
    let mut acc = T::zero();
    for s in 0..m {
        let th = theta::<T>(s, m);
        let a = xi.series().evaluate(th);
        let b = dp.evaluate(th);
        acc += -linalg::re_trace_product(&a, &b);
    }
    Ok(acc / T::of_usize(m))
}

/// Objective functions whose gradients drive the flows: the energy, the
/// tilted energy for a fixed ρ, and the pairing ⟨μ(·), ξ⟩ with a fixed
/// covector. All three have differential
/// dh(η) = (1/2π)∫⟨u, τη′ + [η, ρ]⟩dθ with u = γ⁻¹γ′.
#[derive(Clone, Debug)]
pub enum Objective<T: Real> {
    Energy,
    Tilted(TorusVector<T>),
    Pair(Covector<T>),
}

impl<T: Real> Objective<T> {
    pub fn value(&self, lp: &AlgebraicLoop<T>) -> T {
        match self {
            Objective::Energy => energy(lp),
            Objective::Tilted(rho) => tilted_energy(lp, rho),
            Objective::Pair(xi) => pair(&moment(lp), xi),
        }
    }

    /// The covector (ρ, τ) entering the differential formula.
    pub fn covector(&self, n_dim: usize) -> Covector<T> {
        match self {
            Objective::Energy => Covector::energy(n_dim),
            Objective::Tilted(rho) => Covector::new(rho.clone(), T::one()),
            Objective::Pair(xi) => xi.clone(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Objective::Energy => "energy",
            Objective::Tilted(_) => "tilted",
            Objective::Pair(_) => "pair",
        }
    }
}

/// The gradient of an objective at a loop, in based coordinates and as a
/// tangent, together with its H¹ norm.
#[derive(Clone, Debug)]
pub struct Gradient<T: Real> {
    pub tangent: LoopTangent<T>,
    pub coords: DVector<T>,
    pub norm: T,
}

/// Owner of the per-layout metric data: the based chart, the H¹ Gram
/// matrix and its Cholesky factorization. The metric is left invariant,
/// so one workspace serves every loop of the same (N, n) layout.
pub struct H1Workspace<T: Real> {
    chart: BasedChart<T>,
    gram: DMatrix<T>,
    chol: Option<Cholesky<T, Dyn>>,
}

impl<T: Real> H1Workspace<T> {
    pub fn new(n_dim: usize, order: usize) -> Result<Self> {
        let chart = BasedChart::new(n_dim, order);
        let gram = chart.based_gram();
        if chart.dim() == 0 {
            return Ok(Self {
                chart,
                gram,
                chol: None,
            });
        }
        let cond = condition_estimate(&gram);
        if !(cond.is_finite()) || cond > 1e12 {
            return Err(Error::GramSolve(cond));
        }
        let chol = Cholesky::new(gram.clone()).ok_or(Error::GramSolve(cond))?;
        Ok(Self {
            chart,
            gram,
            chol: Some(chol),
        })
    }

    /// H¹ inner product of two tangents given in based coordinates.
    pub fn inner_coords(&self, a: &DVector<T>, b: &DVector<T>) -> T {
        (a.transpose() * &self.gram * b)[(0, 0)]
    }

    pub fn chart(&self) -> &BasedChart<T> {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// Analytic differential of the objective at γ, in based coordinates:
    /// exact directional derivatives dh(η_b) via quadrature.
    pub fn differential(&self, lp: &AlgebraicLoop<T>, f: &Objective<T>) -> DVector<T> {
        let n_dim = lp.dim();
        let xi = f.covector(n_dim);
        let tau = xi.tau;
        let rho = xi.rho.to_matrix();
        let u = lp.log_derivative();
        let m = u.grid_len();
        let basis = self.chart.basis();
        let na = basis.len();

        // ⟨u_s, T_a⟩ and ⟨u_s, [T_a, ρ]⟩ per sample and basis direction.
        let mut p = vec![T::zero(); na * m];
        let mut q = vec![T::zero(); na * m];
        for (a, t_a) in basis.iter().enumerate() {
            let c_a = t_a * &rho - &rho * t_a;
            for (s, us) in u.values().iter().enumerate() {
                p[a * m + s] = -linalg::re_trace_product(us, t_a);
                q[a * m + s] = -linalg::re_trace_product(us, &c_a);
            }
        }

        let mut d = DVector::<T>::zeros(self.chart.dim());
        let inv_m = T::one() / T::of_usize(m);
        for a in 0..na {
            for k in 1..=self.chart.order() {
                let mut acc_c = T::zero();
                let mut acc_s = T::zero();
                for s in 0..m {
                    let th = theta::<T>(s, m);
                    let (fc, dfc) = self.chart.profile(k, 0, th);
                    let (fs, dfs) = self.chart.profile(k, 1, th);
                    acc_c += tau * dfc * p[a * m + s] + fc * q[a * m + s];
                    acc_s += tau * dfs * p[a * m + s] + fs * q[a * m + s];
                }
                d[self.chart.based_index(a, k, 0)] = acc_c * inv_m;
                d[self.chart.based_index(a, k, 1)] = acc_s * inv_m;
            }
        }
        d
    }

    /// Central finite-difference differential through the retraction,
    /// the independent oracle for the analytic one.
    pub fn differential_fd(
        &self,
        lp: &AlgebraicLoop<T>,
        f: &Objective<T>,
        step: T,
    ) -> Result<DVector<T>> {
        let mut d = DVector::<T>::zeros(self.chart.dim());
        let mut unit = vec![T::zero(); self.chart.dim()];
        for b in 0..self.chart.dim() {
            unit[b] = T::one();
            let eta = self.chart.tangent_from_coords(&unit);
            unit[b] = T::zero();
            d[b] = directional_fd(lp, f, &eta, step)?;
        }
        Ok(d)
    }

    /// Solve Gram·g = dh for the Riemannian gradient.
    pub fn gradient(&self, lp: &AlgebraicLoop<T>, f: &Objective<T>) -> Result<Gradient<T>> {
        if self.chart.dim() == 0 {
            return Ok(Gradient {
                tangent: LoopTangent::zero(lp.dim(), 0),
                coords: DVector::zeros(0),
                norm: T::zero(),
            });
        }
        let d = self.differential(lp, f);
        let chol = self.chol.as_ref().expect("nonzero layout");
        let g = chol.solve(&d);
        let norm_sq = g.dot(&d);
        let norm = if norm_sq > T::zero() {
            norm_sq.sqrt()
        } else {
            T::zero()
        };
        let coords: Vec<T> = g.iter().copied().collect();
        Ok(Gradient {
            tangent: self.chart.tangent_from_coords(&coords),
            coords: g,
            norm,
        })
    }
}

/// (f(retract(γ + hγη)) − f(retract(γ − hγη))) / 2h, with the product
/// γ·η expanded exactly so the perturbed series keeps its full order.
pub fn directional_fd<T: Real>(
    lp: &AlgebraicLoop<T>,
    f: &Objective<T>,
    eta: &LoopTangent<T>,
    step: T,
) -> Result<T> {
    let direction = lp.series().mul(eta.series());
    let plus = AlgebraicLoop::retract(
        &lp.series()
            .add(&direction.scale(num_complex::Complex::new(step, T::zero()))),
    )?;
    let minus = AlgebraicLoop::retract(
        &lp.series()
            .add(&direction.scale(num_complex::Complex::new(-step, T::zero()))),
    )?;
    Ok((f.value(&plus) - f.value(&minus)) / (T::of(2.0) * step))
}

fn condition_estimate<T: Real>(gram: &DMatrix<T>) -> f64 {
    let eig = nalgebra::SymmetricEigen::new(gram.clone());
    let mut lo = f64::INFINITY;
    let mut hi = 0.0_f64;
    for v in eig.eigenvalues.iter() {
        let x = v.to_double();
        lo = lo.min(x);
        hi = hi.max(x);
    }
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liegroup::{random_torus_element, LatticeVector};
    use crate::loops::{random_loop, random_tangent};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lam(m: i64) -> AlgebraicLoop<f64> {
        AlgebraicLoop::lattice_loop(&LatticeVector::new(vec![m, -m]).unwrap())
    }

    #[test]
    fn energy_of_lattice_loops() {
        assert!(energy(&AlgebraicLoop::<f64>::constant(2)).abs() < 1e-15);
        assert!((energy(&lam(1)) - 1.0).abs() < 1e-13);
        for x in crate::liegroup::enumerate_lattice(3, 4.0) {
            let lp = AlgebraicLoop::<f64>::lattice_loop(&x);
            let expect = 0.5 * x.norm_sq() as f64;
            assert!((energy(&lp) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn energy_is_rotation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..10 {
            let lp = random_loop::<f64, _>(2, 2, 0.6, &mut rng).unwrap();
            let e0 = energy(&lp);
            let e1 = energy(&lp.rotate(1.37));
            assert!((e0 - e1).abs() < 1e-10);
        }
    }

    #[test]
    fn t_moment_of_lattice_loop_is_the_vector() {
        let p = t_moment(&lam(1));
        assert!((p.coords()[0] - 1.0).abs() < 1e-13);
        assert!((p.coords()[1] + 1.0).abs() < 1e-13);
        let z = t_moment(&AlgebraicLoop::<f64>::constant(2));
        assert!(z.norm_sq() < 1e-26);
    }

    #[test]
    fn t_moment_is_conjugation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..10 {
            let lp = random_loop::<f64, _>(2, 2, 0.6, &mut rng).unwrap();
            let t = random_torus_element::<f64, _>(2, &mut rng);
            let a = t_moment(&lp);
            let b = t_moment(&lp.conjugate(&t).unwrap());
            let d = a.add(&b.scale(-1.0));
            assert!(d.norm_sq().sqrt() < 1e-10);
        }
    }

    #[test]
    fn pair_examples() {
        let mu = moment(&lam(1));
        assert!((mu.p.coords()[0] - 1.0).abs() < 1e-12);
        assert!((mu.energy - 1.0).abs() < 1e-12);
        let e = Covector::energy(2);
        assert!((pair(&mu, &e) - 1.0).abs() < 1e-12);
        let zero = moment(&AlgebraicLoop::<f64>::constant(2));
        let any = Covector::new(TorusVector::from_chart(2, &[2.3]).unwrap(), -0.7);
        assert!(pair(&zero, &any).abs() < 1e-15);
    }

    #[test]
    fn tilted_energy_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let lp = random_loop::<f64, _>(2, 2, 0.6, &mut rng).unwrap();
        let zero = TorusVector::zero(2);
        assert!((tilted_energy(&lp, &zero) - energy(&lp)).abs() < 1e-14);

        // λ₁ with ρ = i·diag(r, −r): constant integrand ½‖X + ρ‖² = (1+r)²
        let r = 0.62;
        let rho = TorusVector::from_chart(2, &[r]).unwrap();
        let got = tilted_energy(&lam(1), &rho);
        assert!((got - (1.0 + r) * (1.0 + r)).abs() < 1e-12);
    }

    #[test]
    fn tilted_identity_pins_the_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..60 {
            let lp = random_loop::<f64, _>(2, 2, 0.7, &mut rng).unwrap();
            let rho = TorusVector::from_chart(2, &[crate::randutil::normal_f64(&mut rng)]).unwrap();
            let lhs = tilted_energy(&lp, &rho);
            let rhs = pair(&moment(&lp), &Covector::new(rho.clone(), 1.0)) + 0.5 * rho.norm_sq();
            assert!((lhs - rhs).abs() < 1e-10, "residual {}", (lhs - rhs).abs());
        }
    }

    #[test]
    fn cauchy_schwarz_energy_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        for _ in 0..20 {
            let lp = random_loop::<f64, _>(2, 2, 0.8, &mut rng).unwrap();
            let mu = moment(&lp);
            assert!(mu.energy + 1e-12 >= 0.5 * mu.p.norm_sq());
        }
    }

    #[test]
    fn symplectic_single_mode_pair() {
        // ξ = a·sin(kθ), η = a·(1 − cos kθ), ‖a‖ = 1 → ω(ξ, η) = k/2
        let chart = BasedChart::<f64>::new(2, 3);
        for k in 1..=3usize {
            let mut cx = vec![0.0; chart.dim()];
            cx[chart.based_index(0, k, 1)] = 1.0;
            let xi = chart.tangent_from_coords(&cx);
            let mut ce = vec![0.0; chart.dim()];
            ce[chart.based_index(0, k, 0)] = -1.0;
            let eta = chart.tangent_from_coords(&ce);
            let w = symplectic_form(&xi, &eta).unwrap();
            assert!((w - k as f64 / 2.0).abs() < 1e-12, "k={k}: {w}");
            // antisymmetry
            let back = symplectic_form(&eta, &xi).unwrap();
            assert!((w + back).abs() < 1e-12);
            assert!(symplectic_form(&xi, &xi).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn symplectic_is_bilinear() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let a = random_tangent::<f64, _>(2, 2, 1.0, &mut rng);
        let b = random_tangent::<f64, _>(2, 2, 1.0, &mut rng);
        let w = symplectic_form(&a, &b).unwrap();
        let w2 = symplectic_form(&a.scale(2.0), &b.scale(1.5)).unwrap();
        assert!((w2 - 3.0 * w).abs() < 1e-12);
    }

    #[test]
    fn gradient_vanishes_at_critical_points() {
        let ws = H1Workspace::<f64>::new(2, 1).unwrap();
        let lp = lam(1);
        // energy gradient at a lattice loop
        let g = ws.gradient(&lp, &Objective::Energy).unwrap();
        assert!(g.norm < 1e-10, "norm {}", g.norm);
        // tilted gradient at a lattice loop, admissible-scaled tilt
        let rho = TorusVector::from_chart(2, &[1.0 / 3.0]).unwrap();
        let g = ws.gradient(&lp, &Objective::Tilted(rho)).unwrap();
        assert!(g.norm < 1e-10, "norm {}", g.norm);
        // energy gradient at the constant loop (order-2 chart)
        let ws2 = H1Workspace::<f64>::new(2, 2).unwrap();
        let c = AlgebraicLoop::from_series_unchecked(crate::fourier::MatrixSeries::one(2, 2));
        let g = ws2.gradient(&c, &Objective::Energy).unwrap();
        assert!(g.norm < 1e-14);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        let ws = H1Workspace::<f64>::new(2, 2).unwrap();
        for trial in 0..6 {
            let lp = random_loop::<f64, _>(2, 2, 0.6, &mut rng).unwrap();
            let f = if trial % 2 == 0 {
                Objective::Energy
            } else {
                Objective::Tilted(TorusVector::from_chart(2, &[1.0 / 3.0]).unwrap())
            };
            let dan = ws.differential(&lp, &f);
            let dfd = ws.differential_fd(&lp, &f, 1e-5).unwrap();
            let err = (&dan - &dfd).norm() / dan.norm().max(1e-12);
            assert!(err < 1e-5, "relative error {err}");

            // duality: ⟨∇f, η⟩ = df(η) for random η
            let g = ws.gradient(&lp, &f).unwrap();
            let eta = random_tangent::<f64, _>(2, 2, 1.0, &mut rng);
            let lhs = g.tangent.h1_inner(&eta);
            let rhs = directional_fd(&lp, &f, &eta, 1e-5).unwrap();
            assert!(
                (lhs - rhs).abs() <= 1e-5 * (1.0 + rhs.abs()),
                "duality residual {}",
                (lhs - rhs).abs()
            );
        }
    }

    #[test]
    fn moment_invariance_under_torus_and_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for _ in 0..20 {
            let lp = random_loop::<f64, _>(2, 2, 0.7, &mut rng).unwrap();
            let t = random_torus_element::<f64, _>(2, &mut rng);
            let s = crate::randutil::normal_f64(&mut rng);
            let moved = lp.conjugate(&t).unwrap().rotate_left(s);
            let d = moment(&moved).distance(&moment(&lp));
            assert!(d < 1e-8, "moment moved by {d}");
        }
    }

    #[test]
    fn energy_zero_consistency() {
        let c = AlgebraicLoop::<f64>::constant(2);
        assert!(energy_zero_is_constant(&c, energy(&c)));
        let l = lam(1);
        assert!(energy_zero_is_constant(&l, energy(&l)));
    }
}
