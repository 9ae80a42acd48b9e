//! Downward gradient flows of the moment components, unit-rate level-set
//! projections, classification of flow limits against the critical
//! lattice, admissible basis search, and the level-set connectivity
//! probe.
//!
//! All flows run on the finite-dimensional manifold of order-n loops:
//! every step moves pointwise along γ·exp(hξ) and is retracted back to
//! order n, so the Fourier order never grows.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fourier::{grid_len, theta, MatrixSeries};
use crate::liegroup::{enumerate_lattice, is_admissible, LatticeVector, TorusVector};
use crate::linalg::{self, CMatrix};
use crate::loops::{random_loop, AlgebraicLoop, LoopTangent, RETRACT_TARGET};
use crate::moment::{moment, Covector, Gradient, H1Workspace, MomentValue, Objective};
use crate::scalar::Real;

/// Gradient-collapse floor for the level projections.
pub const NEAR_CRITICAL_TOL: f64 = 1e-8;
/// Smallest-singular-value threshold standing in for "a is a regular value".
pub const REGULAR_SIGMA_MIN: f64 = 1e-6;
/// Per-step tolerance for the monotonicity of downward flows.
pub const STEP_DECREASE_TOL: f64 = 1e-6;

/// Time integrators for the flows; both retract back to the loop
/// manifold after every move.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Integrator {
    EulerRetract,
    Rk4Retract,
}

/// Parameters shared by flows and projections.
#[derive(Clone, Debug)]
pub struct FlowConfig<T: Real> {
    /// Initial (and maximal sub-) step in flow time.
    pub step: T,
    /// Flow-time budget for flow_down.
    pub max_time: T,
    /// Gradient norm below which a downward flow has converged.
    pub tol_grad: T,
    /// Level residual below which a projection has converged.
    pub tol_level: T,
    /// Iteration budget: steps for flows, cycles for joint projection.
    pub max_iters: usize,
    pub integrator: Integrator,
}

impl<T: Real> Default for FlowConfig<T> {
    fn default() -> Self {
        Self {
            step: T::of(0.25),
            max_time: T::of(2000.0),
            tol_grad: T::of(1e-7),
            tol_level: T::of(1e-8),
            max_iters: 20_000,
            integrator: Integrator::EulerRetract,
        }
    }
}

impl<T: Real> FlowConfig<T> {
    /// The projection profile: the cycle budget of the joint projection
    /// is capped at 200.
    pub fn projection_profile(self) -> Self {
        Self {
            max_iters: 200,
            ..self
        }
    }
}

impl<T: Real> FlowConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.step <= T::zero() {
            return Err(Error::InvalidArgument("step must be positive".into()));
        }
        if self.tol_grad <= T::zero() || self.tol_level <= T::zero() {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if self.max_time <= T::zero() || self.max_iters == 0 {
            return Err(Error::InvalidArgument(
                "time and iteration budgets must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Terminal state of a flow run.
#[derive(Clone, Debug, PartialEq)]
pub enum FlowStatus {
    Converged,
    MaxTime,
    MaxIters,
    /// 20 consecutive halvings failed to decrease f.
    Stalled,
    RetractionFailure(String),
}

/// One recorded flow state.
#[derive(Clone, Debug)]
pub struct FlowSample<T: Real> {
    pub time: T,
    pub lp: AlgebraicLoop<T>,
    pub value: T,
    pub grad_norm: T,
}

/// Time-stamped record of a flow run.
#[derive(Clone, Debug)]
pub struct FlowTrace<T: Real> {
    pub samples: Vec<FlowSample<T>>,
    pub status: FlowStatus,
}

impl<T: Real> FlowTrace<T> {
    pub fn final_sample(&self) -> &FlowSample<T> {
        self.samples.last().expect("trace has at least the start")
    }

    /// f-values never increase by more than `tol` per step.
    pub fn is_nonincreasing(&self, tol: T) -> bool {
        self.samples
            .windows(2)
            .all(|w| w[1].value <= w[0].value + tol)
    }

    /// CSV rows `time,f,gradnorm` with a header line.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "time,f,gradnorm")?;
        for s in &self.samples {
            writeln!(
                out,
                "{},{},{}",
                s.time.to_double(),
                s.value.to_double(),
                s.grad_norm.to_double()
            )?;
        }
        Ok(())
    }
}

/// Move a loop along a left-translated tangent for time `dt`:
/// pointwise γ(θ_s)·exp(dt·ξ(θ_s)), retracted back to the loop's order.
fn step_along<T: Real>(
    lp: &AlgebraicLoop<T>,
    tangent: &LoopTangent<T>,
    dt: T,
) -> Result<AlgebraicLoop<T>> {
    let order = lp.order();
    let m = grid_len(order);
    let samples: Vec<CMatrix<T>> = (0..m)
        .map(|s| {
            let th = theta::<T>(s, m);
            let xi = tangent.series().evaluate(th);
            let scaled = xi.map(|z| z * num_complex::Complex::new(dt, T::zero()));
            lp.series().evaluate(th) * linalg::exp_anti_hermitian(&scaled)
        })
        .collect();
    AlgebraicLoop::retract_samples(&samples, lp.dim(), order)
}

/// Integrate the downward gradient flow of an objective with retraction
/// after every step, recording (time, loop, value, gradient norm).
pub fn flow_down<T: Real>(
    start: &AlgebraicLoop<T>,
    f: &Objective<T>,
    cfg: &FlowConfig<T>,
) -> Result<FlowTrace<T>> {
    cfg.validate()?;
    let ws = H1Workspace::new(start.dim(), start.order())?;
    let mut samples = Vec::new();
    let mut current = start.clone();
    let mut grad = ws.gradient(&current, f)?;
    let mut value = f.value(&current);
    let mut time = T::zero();
    let mut step = cfg.step;
    samples.push(FlowSample {
        time,
        lp: current.clone(),
        value,
        grad_norm: grad.norm,
    });

    let slack = T::of(1e-12);
    let status = loop {
        if grad.norm < cfg.tol_grad {
            break FlowStatus::Converged;
        }
        if time >= cfg.max_time {
            break FlowStatus::MaxTime;
        }
        if samples.len() > cfg.max_iters {
            break FlowStatus::MaxIters;
        }

        // Try a step, halving up to 20 times until f decreases.
        let mut accepted = None;
        let mut retraction_error: Option<Error> = None;
        let mut halvings = 0;
        let mut h = step;
        while halvings <= 20 {
            let candidate = match take_step(&ws, &current, &grad, f, h, cfg.integrator) {
                Ok(c) => c,
                Err(e) => {
                    retraction_error = Some(e);
                    break;
                }
            };
            let new_value = f.value(&candidate);
            if new_value <= value + slack * (T::one() + value.abs()) {
                accepted = Some((candidate, new_value, h));
                break;
            }
            h *= T::of(0.5);
            halvings += 1;
        }
        match accepted {
            Some((next, new_value, used)) => {
                time += used;
                current = next;
                value = new_value;
                grad = ws.gradient(&current, f)?;
                samples.push(FlowSample {
                    time,
                    lp: current.clone(),
                    value,
                    grad_norm: grad.norm,
                });
                step = (used * T::of(1.3)).min(cfg.step);
            }
            None => {
                break match retraction_error {
                    Some(e) => FlowStatus::RetractionFailure(e.to_string()),
                    None => FlowStatus::Stalled,
                };
            }
        }
    };
    Ok(FlowTrace { samples, status })
}

fn take_step<T: Real>(
    ws: &H1Workspace<T>,
    lp: &AlgebraicLoop<T>,
    grad: &Gradient<T>,
    f: &Objective<T>,
    h: T,
    integrator: Integrator,
) -> Result<AlgebraicLoop<T>> {
    match integrator {
        Integrator::EulerRetract => step_along(lp, &grad.tangent, -h),
        Integrator::Rk4Retract => {
            let half = h * T::of(0.5);
            let k1 = grad.coords.clone();
            let y2 = step_along(lp, &grad.tangent, -half)?;
            let k2 = ws.gradient(&y2, f)?;
            let y3 = step_along(lp, &k2.tangent, -half)?;
            let k3 = ws.gradient(&y3, f)?;
            let y4 = step_along(lp, &k3.tangent, -h)?;
            let k4 = ws.gradient(&y4, f)?;
            let sixth = T::one() / T::of(6.0);
            let combined: DVector<T> =
                (&k1 + k2.coords.scale(T::of(2.0)) + k3.coords.scale(T::of(2.0)) + &k4.coords)
                    .scale(sixth);
            let coords: Vec<T> = combined.iter().copied().collect();
            let tangent = ws.chart().tangent_from_coords(&coords);
            step_along(lp, &tangent, -h)
        }
    }
}

/// A flow limit classified against the critical lattice: the Weyl-orbit
/// representative whose energy ½‖λ‖² is nearest to E(γ).
#[derive(Clone, Debug)]
pub struct CriticalClass<T: Real> {
    /// Sorted-descending representative of the orbit.
    pub lattice: LatticeVector,
    /// ½‖λ‖², the exact critical energy of the class.
    pub energy: T,
    /// |E(γ) − ½‖λ‖²|.
    pub gap: T,
    /// Set when p(γ) fails the majorization check against λ (diagnostic
    /// only; not a classification gate).
    pub hull_warning: bool,
}

/// Classify a converged flow limit. Returns `None` when no lattice class
/// lies within `tol` of the observed energy.
pub fn classify_critical<T: Real>(
    limit: &AlgebraicLoop<T>,
    tol: T,
) -> Result<Option<CriticalClass<T>>> {
    let ws = H1Workspace::new(limit.dim(), limit.order())?;
    let grad = ws.gradient(limit, &Objective::Energy)?;
    if grad.norm >= tol {
        return Err(Error::InvalidArgument(format!(
            "loop is not critical: gradient norm {:.3e} >= tol {:.3e}",
            grad.norm.to_double(),
            tol.to_double()
        )));
    }
    let mu = moment(limit);
    let e = mu.energy.to_double();
    let radius = (2.0 * (e + tol.to_double())).max(0.0).sqrt() + 0.5;
    let mut best: Option<CriticalClass<T>> = None;
    let mut seen = std::collections::BTreeSet::new();
    for x in enumerate_lattice(limit.dim(), radius) {
        let class = x.weyl_class();
        if !seen.insert(class.clone()) {
            continue;
        }
        let energy = T::of(0.5 * class.norm_sq() as f64);
        let gap = (mu.energy - energy).abs();
        if best.as_ref().is_none_or(|b| gap < b.gap) {
            best = Some(CriticalClass {
                lattice: class,
                energy,
                gap,
                hull_warning: false,
            });
        }
    }
    Ok(best.filter(|b| b.gap < tol).map(|mut b| {
        b.hull_warning = !majorized_by(&mu.p, &b.lattice);
        b
    }))
}

/// Schur–Horn check: is p in the convex hull of the Weyl orbit of λ, i.e.
/// do the sorted partial sums of p stay below those of λ?
fn majorized_by<T: Real>(p: &TorusVector<T>, lambda: &LatticeVector) -> bool {
    let mut pc: Vec<f64> = p.coords().iter().map(|c| c.to_double()).collect();
    pc.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let lc = lambda.weyl_class();
    let mut p_acc = 0.0;
    let mut l_acc = 0.0;
    for (pv, lv) in pc.iter().zip(lc.coords()) {
        p_acc += pv;
        l_acc += *lv as f64;
        if p_acc > l_acc + 1e-7 {
            return false;
        }
    }
    true
}

/// The isolated critical values ½‖X‖² of the energy over the lattice ball
/// ‖X‖ ≤ radius, deduplicated and sorted (both exact on the integers).
pub fn critical_values<T: Real>(n_dim: usize, radius: f64) -> Vec<T> {
    let mut norms: Vec<i64> = enumerate_lattice(n_dim, radius)
        .iter()
        .map(|x| x.norm_sq())
        .collect();
    norms.sort_unstable();
    norms.dedup();
    norms.into_iter().map(|n| T::of(0.5 * n as f64)).collect()
}

/// One admissible tilt direction (ρ_j, 1) with ρ_j = X_j / q_j.
#[derive(Clone, Debug)]
pub struct AdmissibleTilt<T: Real> {
    pub lattice: LatticeVector,
    pub q: u64,
    pub rho: TorusVector<T>,
}

/// Basis ξ₁ = (0,1), ξ_j = (ρ_j, 1) of 𝔱 ⊕ ℝ with admissible tilts whose
/// gradients are in general position at the base point.
#[derive(Clone, Debug)]
pub struct AdmissibleBasis<T: Real> {
    n_dim: usize,
    tilts: Vec<AdmissibleTilt<T>>,
}

impl<T: Real> AdmissibleBasis<T> {
    pub fn k(&self) -> usize {
        self.tilts.len() + 1
    }

    pub fn n_dim(&self) -> usize {
        self.n_dim
    }

    pub fn tilts(&self) -> &[AdmissibleTilt<T>] {
        &self.tilts
    }

    /// ξ_j for j = 0 (energy) through k−1.
    pub fn covector(&self, j: usize) -> Covector<T> {
        if j == 0 {
            Covector::energy(self.n_dim)
        } else {
            Covector::new(self.tilts[j - 1].rho.clone(), T::one())
        }
    }

    pub fn covectors(&self) -> Vec<Covector<T>> {
        (0..self.k()).map(|j| self.covector(j)).collect()
    }

    /// Components ⟨a, ξ_j⟩ of a target moment value.
    pub fn components(&self, a: &MomentValue<T>) -> Vec<T> {
        self.covectors()
            .iter()
            .map(|xi| crate::moment::pair(a, xi))
            .collect()
    }

    /// Linear independence of the covectors plus admissibility of every
    /// tilt, the two structural invariants.
    pub fn validate(&self) -> Result<()> {
        for t in &self.tilts {
            if !is_admissible(&t.lattice, t.q)? {
                return Err(Error::InvalidArgument(format!(
                    "tilt {:?}/{} is not admissible",
                    t.lattice.coords(),
                    t.q
                )));
            }
        }
        // rows (ρ_j, 1) in chart coordinates plus (0, 1)
        let k = self.k();
        let cols = self.n_dim;
        let mut m = nalgebra::DMatrix::<f64>::zeros(k, cols);
        m[(0, cols - 1)] = 1.0;
        for (j, t) in self.tilts.iter().enumerate() {
            for (c, v) in t.rho.chart().iter().enumerate() {
                m[(j + 1, c)] = v.to_double();
            }
            m[(j + 1, cols - 1)] = 1.0;
        }
        let svd = m.svd(false, false);
        let smin = svd
            .singular_values
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if smin < 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "basis covectors are linearly dependent (sigma_min {smin:.3e})"
            )));
        }
        Ok(())
    }
}

/// Smallest singular value of the H¹-orthonormalized frame of moment
/// gradients at γ: the numerical stand-in for "γ sits on a regular level".
pub fn regularity_margin<T: Real>(ws: &H1Workspace<T>, lp: &AlgebraicLoop<T>) -> Result<T> {
    let n = lp.dim();
    let mut covectors = vec![Covector::energy(n)];
    for a in 0..n - 1 {
        let mut chart = vec![T::zero(); n - 1];
        chart[a] = T::one();
        covectors.push(Covector::new(
            TorusVector::from_chart(n, &chart)?,
            T::zero(),
        ));
    }
    let grads: Vec<Gradient<T>> = covectors
        .iter()
        .map(|xi| ws.gradient(lp, &Objective::Pair(xi.clone())))
        .collect::<Result<_>>()?;
    let k = grads.len();
    let mut gram = nalgebra::DMatrix::<T>::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            gram[(i, j)] = ws.inner_coords(&grads[i].coords, &grads[j].coords);
        }
    }
    let eig = nalgebra::SymmetricEigen::new(gram);
    let lmin = eig
        .eigenvalues
        .iter()
        .fold(T::max_value().unwrap(), |a, &b| if b < a { b } else { a });
    Ok(if lmin > T::zero() {
        lmin.sqrt()
    } else {
        T::zero()
    })
}

/// Greedy search for an admissible basis at γ: lattice vectors by
/// increasing norm, odd q ascending. A tilt ρ = X/q qualifies when the
/// projected gradient pairing |⟨v_j, p₁∘…∘p_{j−1}(v_j)⟩| clears
/// threshold·‖v_j‖²; among the qualifying witnesses in the bounded
/// search set the one with the largest pairing ratio (the most
/// transverse) is kept, which sets the convergence rate of the cyclic
/// level projections. The gradient is affine in ρ, so the scan costs
/// one gradient solve per torus direction, not per candidate.
pub fn find_admissible_basis<T: Real>(
    lp: &AlgebraicLoop<T>,
    threshold: T,
    ws: &H1Workspace<T>,
) -> Result<AdmissibleBasis<T>> {
    let n = lp.dim();
    let margin = regularity_margin(ws, lp)?;
    if margin <= threshold {
        return Err(Error::NotRegular(margin.to_double()));
    }

    // v(ρ, 1) = v_E + Σ_a c_a w_a with c the chart coordinates of ρ
    let v_energy = ws.gradient(lp, &Objective::Energy)?.coords;
    let mut chart_grads: Vec<DVector<T>> = Vec::new();
    for a in 0..n - 1 {
        let mut chart = vec![T::zero(); n - 1];
        chart[a] = T::one();
        let xi = Covector::new(TorusVector::from_chart(n, &chart)?, T::zero());
        chart_grads.push(ws.gradient(lp, &Objective::Pair(xi))?.coords);
    }
    let tilt_gradient = |rho: &TorusVector<T>| -> DVector<T> {
        let mut v = v_energy.clone();
        for (a, w) in chart_grads.iter().enumerate() {
            v += w.scale(rho.chart()[a]);
        }
        v
    };

    // accepted gradients v_1.. with v_1 = ∇E
    let mut accepted: Vec<DVector<T>> = vec![v_energy.clone()];
    let mut tilts: Vec<AdmissibleTilt<T>> = Vec::new();

    let project_out = |v: &DVector<T>, against: &[DVector<T>], ws: &H1Workspace<T>| {
        let mut w = v.clone();
        for vi in against {
            let denom = ws.inner_coords(vi, vi);
            if denom > T::zero() {
                let coeff = ws.inner_coords(&w, vi) / denom;
                w -= vi.scale(coeff);
            }
        }
        w
    };

    let candidates = enumerate_lattice(n, 10.0);
    while tilts.len() + 1 < n {
        let mut best: Option<(T, AdmissibleTilt<T>, DVector<T>)> = None;
        for x in &candidates {
            if x.norm_sq() == 0 {
                continue;
            }
            for q in (3..=49u64).step_by(2) {
                if !is_admissible(x, q)? {
                    continue;
                }
                let rho = x.to_torus::<T>().scale(T::one() / T::of_usize(q as usize));
                let v = tilt_gradient(&rho);
                let norm_sq = ws.inner_coords(&v, &v);
                if norm_sq <= T::zero() {
                    continue;
                }
                let w = project_out(&v, &accepted, ws);
                let ratio = ws.inner_coords(&v, &w).abs() / norm_sq;
                if ratio <= threshold {
                    continue;
                }
                if best.as_ref().is_none_or(|(r, _, _)| ratio > *r) {
                    let candidate = AdmissibleTilt {
                        lattice: x.clone(),
                        q,
                        rho: rho.clone(),
                    };
                    let mut trial = tilts.clone();
                    trial.push(candidate.clone());
                    let basis = AdmissibleBasis {
                        n_dim: n,
                        tilts: trial,
                    };
                    if basis.validate().is_ok() {
                        best = Some((ratio, candidate, v.clone()));
                    }
                }
            }
        }
        match best {
            Some((_, tilt, v)) => {
                tilts.push(tilt);
                accepted.push(v);
            }
            None => {
                return Err(Error::SearchExhausted(format!(
                    "no admissible tilt for slot {} (norm <= 10, q <= 49, threshold {:.1e})",
                    tilts.len() + 2,
                    threshold.to_double()
                )));
            }
        }
    }
    Ok(AdmissibleBasis { n_dim: n, tilts })
}

/// Flow the normalized field −∇h_j/‖∇h_j‖² until h_j hits the target:
/// the field decreases h_j at unit rate, so the total flow time is
/// h_j(γ) − a_j; discretization error is absorbed by recomputing the
/// remaining time after every substep and polishing at the end.
pub fn project_to_level<T: Real>(
    lp: &AlgebraicLoop<T>,
    j: usize,
    target: T,
    basis: &AdmissibleBasis<T>,
    cfg: &FlowConfig<T>,
    ws: &H1Workspace<T>,
) -> Result<AlgebraicLoop<T>> {
    cfg.validate()?;
    let f = Objective::Pair(basis.covector(j));
    let mut current = lp.clone();
    let near_critical = T::of(NEAR_CRITICAL_TOL);
    for _round in 0..6 {
        let mut substeps = 0usize;
        loop {
            let value = f.value(&current);
            let remaining = value - target;
            if remaining.abs() < cfg.tol_level {
                break;
            }
            if substeps >= cfg.max_iters.max(400) {
                return Err(Error::NonConvergence {
                    iters: substeps,
                    last: remaining.abs().to_double(),
                    history: vec![remaining.abs().to_double()],
                });
            }
            // keep the loop clean enough that the per-substep retraction
            // cannot move h_j by more than the remaining residual
            let defect = current.defect();
            if defect > T::of(0.05) * remaining.abs() && defect > T::of(RETRACT_TARGET) {
                current = AlgebraicLoop::retract_polished(
                    current.series(),
                    current.order(),
                    T::of(RETRACT_TARGET),
                )?;
                continue;
            }
            let grad = ws.gradient(&current, &f)?;
            if grad.norm < near_critical {
                return Err(Error::NearCritical(grad.norm.to_double()));
            }
            // trust region: keep the pointwise move dt·‖Y‖ modest
            let dt_cap = cfg.step.min(T::of(0.5) * grad.norm);
            let dt = remaining.max(-dt_cap).min(dt_cap);
            let scale = -dt / (grad.norm * grad.norm);
            let tangent = grad.tangent.scale(scale);
            current = step_along(&current, &tangent, T::one())?;
            substeps += 1;
        }
        // Drive the loop invariants back to full precision; if that
        // nudges the level off target, run another (much shorter) round.
        if current.defect() > T::of(RETRACT_TARGET) {
            current = AlgebraicLoop::retract_polished(
                current.series(),
                current.order(),
                T::of(RETRACT_TARGET),
            )?;
        }
        if (f.value(&current) - target).abs() < cfg.tol_level {
            return Ok(current);
        }
    }
    Err(Error::NonConvergence {
        iters: cfg.max_iters,
        last: (f.value(&current) - target).abs().to_double(),
        history: vec![],
    })
}

/// Level-set target: a full moment value or a single component h_j = a_j.
#[derive(Clone, Debug)]
pub enum LevelSpec<T: Real> {
    Moment(MomentValue<T>),
    Component { j: usize, value: T },
}

/// Outcome of a joint projection: the projected loop and the per-cycle
/// residual history max_j |h_j − a_j|.
#[derive(Clone, Debug)]
pub struct JointProjection<T: Real> {
    pub lp: AlgebraicLoop<T>,
    pub residuals: Vec<f64>,
}

/// Cyclic projection onto h₁⁻¹(a₁) ∩ … ∩ h_k⁻¹(a_k): apply the
/// single-component projections in sequence until the joint residual
/// settles below tol_level. Each π_j perturbs the earlier levels, so the
/// cycle is iterated; local convergence rests on the basis gradients
/// staying in general position along the way.
pub fn project_to_joint_level<T: Real>(
    lp: &AlgebraicLoop<T>,
    target: &LevelSpec<T>,
    basis: &AdmissibleBasis<T>,
    cfg: &FlowConfig<T>,
    ws: &H1Workspace<T>,
) -> Result<JointProjection<T>> {
    cfg.validate()?;
    let components: Vec<(usize, T)> = match target {
        LevelSpec::Moment(a) => basis.components(a).into_iter().enumerate().collect(),
        LevelSpec::Component { j, value } => vec![(*j, *value)],
    };
    // The components determine μ through the covector frame; drive them
    // below tol_level scaled by the frame conditioning so that the
    // moment-space residual lands under k·tol_level as well.
    let mut tol = cfg.tol_level;
    if matches!(target, LevelSpec::Moment(_)) {
        let smin = basis_frame_sigma_min(basis);
        let k = basis.k() as f64;
        tol *= T::of((smin * k.sqrt()).min(1.0));
        // projections converge to tol internally; pass the tightened
        // tolerance down
    }
    let sub_cfg = FlowConfig {
        tol_level: tol,
        ..cfg.clone()
    };
    let mut current = lp.clone();
    let mut residuals = Vec::new();
    for _cycle in 0..cfg.max_iters {
        for (j, a_j) in &components {
            let f = Objective::Pair(basis.covector(*j));
            if (f.value(&current) - *a_j).abs() >= tol {
                current = project_to_level(&current, *j, *a_j, basis, &sub_cfg, ws)?;
            }
        }
        let mut worst = T::zero();
        for (j, a_j) in &components {
            let f = Objective::Pair(basis.covector(*j));
            let r = (f.value(&current) - *a_j).abs();
            if r > worst {
                worst = r;
            }
        }
        residuals.push(worst.to_double());
        if worst < tol {
            return Ok(JointProjection {
                lp: current,
                residuals,
            });
        }
    }
    Err(Error::NonConvergence {
        iters: cfg.max_iters,
        last: residuals.last().copied().unwrap_or(f64::NAN),
        history: residuals,
    })
}

/// Smallest singular value of the covector frame mapping moment-space
/// (orthonormal coordinates) to basis components.
fn basis_frame_sigma_min<T: Real>(basis: &AdmissibleBasis<T>) -> f64 {
    let n = basis.n_dim();
    let k = basis.k();
    // orthonormal basis of the traceless diagonal: (1,…,1,−l,0,…)/√(l(l+1))
    let mut frame = nalgebra::DMatrix::<f64>::zeros(k, n);
    for (j, xi) in basis.covectors().iter().enumerate() {
        for l in 1..n {
            let norm = ((l * (l + 1)) as f64).sqrt();
            let mut pairing = 0.0;
            for p in 0..l {
                pairing += xi.rho.coords()[p].to_double() / norm;
            }
            pairing -= xi.rho.coords()[l].to_double() * l as f64 / norm;
            frame[(j, l - 1)] = pairing;
        }
        frame[(j, n - 1)] = xi.tau.to_double();
    }
    let svd = frame.svd(false, false);
    svd.singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Witness graph returned by the connectivity probe.
#[derive(Clone, Debug)]
pub struct ConnectivityReport<T: Real> {
    /// Number of connected components of the witness graph (0 when the
    /// sampled level is empty).
    pub components: usize,
    /// Moment values of the surviving nodes.
    pub nodes: Vec<MomentValue<T>>,
    /// Successfully verified edges (node index pairs).
    pub edges: Vec<(usize, usize)>,
    /// Edges attempted and abandoned.
    pub failed_edges: Vec<(usize, usize)>,
    /// Samples that failed to project onto the level.
    pub sample_failures: usize,
    pub empty: bool,
}

/// Probe parameters beyond the flow config.
#[derive(Clone, Debug)]
pub struct ProbeConfig {
    pub seed: u64,
    pub sample_scale: f64,
    /// Path discretization steps per edge.
    pub path_steps: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            sample_scale: 0.6,
            path_steps: 64,
        }
    }
}

/// Sample loops near the level μ⁻¹(a), connect pairs by pointwise
/// geodesics with joint reprojection at every path step, and count the
/// connected components of the resulting witness graph.
pub fn probe_connectivity<T: Real>(
    a: &MomentValue<T>,
    n_dim: usize,
    order: usize,
    samples: usize,
    cfg: &FlowConfig<T>,
    probe: &ProbeConfig,
) -> Result<ConnectivityReport<T>> {
    cfg.validate()?;
    let ws = H1Workspace::new(n_dim, order)?;

    // Project seeded random loops onto the level, in parallel; stream
    // indices keep the result independent of thread scheduling.
    let projected: Vec<Option<AlgebraicLoop<T>>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let ws = H1Workspace::new(n_dim, order).ok()?;
            let mut rng = ChaCha8Rng::seed_from_u64(probe.seed);
            rng.set_stream(i as u64);
            let lp = random_loop::<T, _>(n_dim, order, probe.sample_scale, &mut rng).ok()?;
            let basis = find_admissible_basis(&lp, T::of(1e-3), &ws).ok()?;
            let joint =
                project_to_joint_level(&lp, &LevelSpec::Moment(a.clone()), &basis, cfg, &ws)
                    .ok()?;
            // per-sample regularity check of the probed value
            let margin = regularity_margin(&ws, &joint.lp).ok()?;
            if margin.to_double() <= REGULAR_SIGMA_MIN {
                return None;
            }
            Some(joint.lp)
        })
        .collect();

    let nodes: Vec<AlgebraicLoop<T>> = projected.iter().flatten().cloned().collect();
    let sample_failures = samples - nodes.len();
    if nodes.is_empty() {
        return Ok(ConnectivityReport {
            components: 0,
            nodes: vec![],
            edges: vec![],
            failed_edges: vec![],
            sample_failures,
            empty: true,
        });
    }

    let basis = find_admissible_basis(&nodes[0], T::of(1e-3), &ws)?;

    // Kruskal over pairwise H¹ distances: try short edges first and only
    // between distinct components.
    let mut pairs = Vec::new();
    for i in 0..nodes.len() {
        for j in (i + 1)..nodes.len() {
            pairs.push((nodes[i].h1_distance_sq(&nodes[j]).to_double(), i, j));
        }
    }
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());

    let mut uf: Vec<usize> = (0..nodes.len()).collect();
    fn find(uf: &mut [usize], mut x: usize) -> usize {
        while uf[x] != x {
            uf[x] = uf[uf[x]];
            x = uf[x];
        }
        x
    }

    let mut edges = Vec::new();
    let mut failed_edges = Vec::new();
    let mut components = nodes.len();
    let mut midpoint_rng = ChaCha8Rng::seed_from_u64(probe.seed ^ 0x9e3779b97f4a7c15);
    midpoint_rng.set_stream(u64::MAX);
    for (_, i, j) in pairs {
        if components == 1 {
            break;
        }
        let (ri, rj) = (find(&mut uf, i), find(&mut uf, j));
        if ri == rj {
            continue;
        }
        match connect_pair(
            &nodes[i],
            &nodes[j],
            a,
            &basis,
            cfg,
            &ws,
            probe.path_steps,
            &mut midpoint_rng,
            1,
            probe.sample_scale,
        ) {
            Ok(()) => {
                uf[ri] = rj;
                components -= 1;
                edges.push((i, j));
            }
            Err(_) => failed_edges.push((i, j)),
        }
    }

    Ok(ConnectivityReport {
        components,
        nodes: nodes.iter().map(moment).collect(),
        edges,
        failed_edges,
        sample_failures,
        empty: false,
    })
}

/// Walk the pointwise-geodesic path γ_s(θ) = γ₀(θ)exp(s·log(γ₀⁻¹γ₁))
/// with joint reprojection at every step; succeed when every step
/// projects and stays inside the tube ‖μ − a‖ < 10·tol_level.
#[allow(clippy::too_many_arguments)]
fn connect_pair<T: Real>(
    a_lp: &AlgebraicLoop<T>,
    b_lp: &AlgebraicLoop<T>,
    level: &MomentValue<T>,
    basis: &AdmissibleBasis<T>,
    cfg: &FlowConfig<T>,
    ws: &H1Workspace<T>,
    steps: usize,
    midpoint_rng: &mut ChaCha8Rng,
    retries: usize,
    sample_scale: f64,
) -> Result<()> {
    match walk_path(a_lp, b_lp, level, basis, cfg, ws, steps) {
        Ok(()) => Ok(()),
        Err(e) => {
            if retries == 0 {
                return Err(e);
            }
            // route around the failure through a fresh projected sample
            let mid = random_loop::<T, _>(a_lp.dim(), a_lp.order(), sample_scale, midpoint_rng)?;
            let mid =
                project_to_joint_level(&mid, &LevelSpec::Moment(level.clone()), basis, cfg, ws)?.lp;
            connect_pair(
                a_lp,
                &mid,
                level,
                basis,
                cfg,
                ws,
                steps,
                midpoint_rng,
                retries - 1,
                sample_scale,
            )?;
            connect_pair(
                &mid,
                b_lp,
                level,
                basis,
                cfg,
                ws,
                steps,
                midpoint_rng,
                retries - 1,
                sample_scale,
            )
        }
    }
}

fn walk_path<T: Real>(
    a_lp: &AlgebraicLoop<T>,
    b_lp: &AlgebraicLoop<T>,
    level: &MomentValue<T>,
    basis: &AdmissibleBasis<T>,
    cfg: &FlowConfig<T>,
    ws: &H1Workspace<T>,
    steps: usize,
) -> Result<()> {
    let order = a_lp.order();
    let m = grid_len(order);
    let branch_tol = T::of(1e-8);
    // pointwise logs of γ₀⁻¹γ₁ on the grid
    let logs: Vec<CMatrix<T>> = (0..m)
        .map(|s| {
            let th = theta::<T>(s, m);
            let g0 = a_lp.evaluate(th);
            let g1 = b_lp.evaluate(th);
            let rel = g0.inverse().matrix() * g1.matrix();
            linalg::log_unitary(&rel, branch_tol)
        })
        .collect::<Result<_>>()?;
    let tube = T::of(10.0) * cfg.tol_level;
    for t in 1..=steps {
        let s = T::of_usize(t) / T::of_usize(steps);
        let samples: Vec<CMatrix<T>> = (0..m)
            .map(|i| {
                let th = theta::<T>(i, m);
                let step = logs[i].map(|z| z * num_complex::Complex::new(s, T::zero()));
                a_lp.series().evaluate(th) * linalg::exp_anti_hermitian(&step)
            })
            .collect();
        let raw = MatrixSeries::from_samples(&samples, a_lp.dim(), order);
        let on_path = AlgebraicLoop::retract_polished(&raw, order, T::of(1e-10))?;
        let projected =
            project_to_joint_level(&on_path, &LevelSpec::Moment(level.clone()), basis, cfg, ws)?;
        let dist = moment(&projected.lp).distance(level);
        if dist >= tube {
            return Err(Error::NonConvergence {
                iters: t,
                last: dist.to_double(),
                history: vec![],
            });
        }
    }
    Ok(())
}
