//! Experiment orchestration: the moment-image sampler, the SU(2)
//! parabola-hull membership test, plot-ready data emission, reproducible
//! manifests and the verification suite. No plotting here — the outputs
//! are CSV/JSON files with fixed schemas.

pub mod suite;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{FlowConfig, Integrator};
use crate::loops::random_loop;
use crate::moment::{moment, MomentValue};
use crate::scalar::Real;

pub use suite::{run_suite, CriterionResult, SuiteReport};

/// Slack used when declaring a hull violation.
pub const HULL_SLACK: f64 = 1e-9;

/// Tolerances of the verification suite, pinned to their contract
/// values; a manifest may only tighten them.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Tolerances {
    pub critical_energy: f64,
    pub tilted_identity: f64,
    pub h1_identity: f64,
    pub moment_invariance: f64,
    pub gradient_rel: f64,
    pub grassmann_diagram: f64,
    pub grassmann_routes: f64,
    pub hull_slack: f64,
    pub flow_grad: f64,
    pub flow_energy_gap: f64,
    pub flow_step_decrease: f64,
    pub level_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            critical_energy: 1e-12,
            tilted_identity: 1e-10,
            h1_identity: 1e-10,
            moment_invariance: 1e-8,
            gradient_rel: 1e-5,
            grassmann_diagram: 1e-6,
            grassmann_routes: 1e-9,
            hull_slack: HULL_SLACK,
            flow_grad: 1e-6,
            flow_energy_gap: 1e-3,
            flow_step_decrease: 1e-6,
            level_residual: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.critical_energy,
            self.tilted_identity,
            self.h1_identity,
            self.moment_invariance,
            self.gradient_rel,
            self.grassmann_diagram,
            self.grassmann_routes,
            self.hull_slack,
            self.flow_grad,
            self.flow_energy_gap,
            self.flow_step_decrease,
            self.level_residual,
        ];
        if all.iter().any(|&t| t <= 0.0 || !t.is_finite()) {
            return Err(Error::InvalidManifest(
                "all tolerances must be strictly positive".into(),
            ));
        }
        Ok(())
    }
}

/// Connectivity-probe parameters of a manifest.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ConnectivityParams {
    pub values: usize,
    pub samples: usize,
    pub path_steps: usize,
    /// Retry factor applied to samples and path steps when a probe
    /// reports more than one component.
    pub retry_factor: usize,
}

/// A complete, reproducible description of one suite run.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ExperimentManifest {
    pub group_n: usize,
    pub orders: Vec<usize>,
    pub seed: u64,
    /// Sampler scale multiplier in front of 1/(1+k²).
    pub sample_scale: f64,
    pub image_order: usize,
    pub image_count: usize,
    pub identity_trials: usize,
    pub gradient_trials: usize,
    pub grassmann_trials: usize,
    pub flow_trials: usize,
    pub projection_trials: usize,
    pub connectivity: ConnectivityParams,
    pub tolerances: Tolerances,
    pub git_describe: String,
    pub out_dir: Option<String>,
}

impl Default for ExperimentManifest {
    fn default() -> Self {
        Self {
            group_n: 2,
            orders: vec![1, 2, 3],
            seed: 7,
            sample_scale: 0.55,
            image_order: 2,
            image_count: 10_000,
            identity_trials: 100,
            gradient_trials: 50,
            grassmann_trials: 200,
            flow_trials: 50,
            projection_trials: 100,
            connectivity: ConnectivityParams {
                values: 3,
                samples: 50,
                path_steps: 64,
                retry_factor: 4,
            },
            tolerances: Tolerances::default(),
            git_describe: git_describe(),
            out_dir: None,
        }
    }
}

impl ExperimentManifest {
    pub fn validate(&self) -> Result<()> {
        self.tolerances.validate()?;
        if self.group_n < 2 {
            return Err(Error::InvalidManifest("group_n must be at least 2".into()));
        }
        if self.image_count == 0
            || self.identity_trials == 0
            || self.gradient_trials == 0
            || self.grassmann_trials == 0
            || self.flow_trials == 0
            || self.projection_trials == 0
            || self.connectivity.values == 0
            || self.connectivity.samples == 0
            || self.connectivity.path_steps == 0
        {
            return Err(Error::InvalidManifest("counts must be positive".into()));
        }
        if self.sample_scale <= 0.0 || !self.sample_scale.is_finite() {
            return Err(Error::InvalidManifest(
                "sample_scale must be positive".into(),
            ));
        }
        if self.orders.is_empty() || self.orders.contains(&0) {
            return Err(Error::InvalidManifest(
                "orders must be nonempty, ≥ 1".into(),
            ));
        }
        Ok(())
    }

    /// Downscaled copy used for the nested determinism check.
    pub fn reduced(&self) -> Self {
        Self {
            image_count: 50,
            identity_trials: 8,
            gradient_trials: 4,
            grassmann_trials: 6,
            flow_trials: 3,
            projection_trials: 5,
            connectivity: ConnectivityParams {
                values: 1,
                samples: 4,
                path_steps: 8,
                retry_factor: 1,
            },
            out_dir: None,
            ..self.clone()
        }
    }

    /// Flow profile: generous step budget for the downward flows.
    pub fn flow_config(&self) -> FlowConfig<f64> {
        FlowConfig {
            step: 0.25,
            max_time: 2000.0,
            tol_grad: self.tolerances.flow_grad * 0.1,
            tol_level: self.tolerances.level_residual,
            max_iters: 20_000,
            integrator: Integrator::EulerRetract,
        }
    }

    /// Projection profile: the joint projection must settle within 200
    /// cycles.
    pub fn projection_config(&self) -> FlowConfig<f64> {
        self.flow_config().projection_profile()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

/// `git describe --always --dirty` of the working tree, or "unknown".
pub fn git_describe() -> String {
    std::process::Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .unwrap_or_else(|| "unknown".to_string())
}

/// Result of a moment-image sampling run.
#[derive(Clone, Debug)]
pub struct SampleImage<T: Real> {
    pub moments: Vec<MomentValue<T>>,
    /// Number of resample events (a sample whose retraction failed is
    /// redrawn inside its own stream and counted here).
    pub failures: usize,
}

/// Draw `count` random order-n loops (per-sample ChaCha streams split
/// from the seed) and return their moment values; deterministic for a
/// fixed seed regardless of thread count.
pub fn sample_image<T: Real>(
    n_dim: usize,
    order: usize,
    count: usize,
    seed: u64,
    scale: f64,
) -> SampleImage<T> {
    let results: Vec<(MomentValue<T>, usize)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut failures = 0usize;
            loop {
                match random_loop::<T, _>(n_dim, order, scale, &mut rng) {
                    Ok(lp) => return (moment(&lp), failures),
                    Err(_) => {
                        failures += 1;
                        if failures > 20 {
                            // fall back to the constant loop rather than
                            // diverge; counted as failures throughout
                            return (MomentValue::zero(n_dim), failures);
                        }
                    }
                }
            }
        })
        .collect();
    let failures = results.iter().map(|(_, f)| f).sum();
    SampleImage {
        moments: results.into_iter().map(|(m, _)| m).collect(),
        failures,
    }
}

/// Signed margin of a moment value against the SU(2) parabola hull: the
/// infimum over m ∈ ℤ of E − ((2m+1)p − m(m+1)), attained at
/// m = ⌊p⌋ or ⌈p⌉ − 1 and scanned over m ∈ [⌊p⌋−1, ⌈p⌉+1]. The value is
/// in the hull iff the margin is ≥ 0.
pub fn check_hull_su2<T: Real>(v: &MomentValue<T>) -> f64 {
    assert_eq!(v.dim(), 2, "hull check is the SU(2) chart");
    let p = v.p.chart()[0].to_double();
    let e = v.energy.to_double();
    let lo = p.floor() as i64 - 1;
    let hi = p.ceil() as i64 + 1;
    let mut margin = f64::INFINITY;
    for m in lo..=hi {
        let m = m as f64;
        let chord = (2.0 * m + 1.0) * p - m * (m + 1.0);
        margin = margin.min(e - chord);
    }
    margin
}

/// Per-sample hull diagnostics of an image run.
#[derive(Clone, Debug, Serialize)]
pub struct HullReport {
    /// (sample id, p chart, E, margin)
    pub rows: Vec<(usize, f64, f64, f64)>,
    pub violations: usize,
    pub min_margin: f64,
    pub failures: usize,
}

/// Sample the SU(2) moment image and test every point against the
/// parabola hull.
pub fn hull_report(order: usize, count: usize, seed: u64, scale: f64) -> HullReport {
    let image = sample_image::<f64>(2, order, count, seed, scale);
    let mut rows = Vec::with_capacity(count);
    let mut violations = 0;
    let mut min_margin = f64::INFINITY;
    for (i, mu) in image.moments.iter().enumerate() {
        let margin = check_hull_su2(mu);
        min_margin = min_margin.min(margin);
        if margin < -HULL_SLACK {
            violations += 1;
        }
        rows.push((i, mu.p.chart()[0], mu.energy, margin));
    }
    HullReport {
        rows,
        violations,
        min_margin,
        failures: image.failures,
    }
}

/// Write the image scatter as CSV: sample_id, p_1..p_{N−1}, E, margin
/// (margin only for N = 2).
pub fn write_image_csv<W: std::io::Write>(report: &HullReport, mut out: W) -> Result<usize> {
    writeln!(out, "sample_id,p_1,E,margin")?;
    for (id, p, e, margin) in &report.rows {
        writeln!(out, "{id},{p},{e},{margin}")?;
    }
    Ok(report.rows.len())
}

/// Files emitted by the moment-image figure: per-file row counts.
#[derive(Clone, Debug, Serialize)]
pub struct FigureFiles {
    pub vertices_rows: usize,
    pub facets_rows: usize,
    pub critical_rows: usize,
    pub scatter_rows: usize,
}

/// Emit the SU(2) moment-image figure data: the parabola vertices
/// (m, m²), the hull facet chords, the critical-level segments E = m²
/// clipped to the hull (between the vertices ±m), and a sampled image
/// scatter. All CSV with headers; `resolution` points per segment.
pub fn emit_figure<P: AsRef<std::path::Path>>(
    radius: i64,
    resolution: usize,
    count: usize,
    seed: u64,
    scale: f64,
    out_dir: P,
) -> Result<FigureFiles> {
    let dir = out_dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let resolution = resolution.max(2);

    let mut vertices = String::from("m,p,E\n");
    let mut vertices_rows = 0;
    for m in -radius..=radius {
        vertices.push_str(&format!("{m},{m},{}\n", m * m));
        vertices_rows += 1;
    }
    std::fs::write(dir.join("vertices.csv"), vertices)?;

    let mut facets = String::from("facet,p,E\n");
    let mut facets_rows = 0;
    for m in -radius..radius {
        let (p0, e0) = (m as f64, (m * m) as f64);
        let (p1, e1) = ((m + 1) as f64, ((m + 1) * (m + 1)) as f64);
        for r in 0..resolution {
            let t = r as f64 / (resolution - 1) as f64;
            facets.push_str(&format!(
                "{m},{},{}\n",
                p0 + t * (p1 - p0),
                e0 + t * (e1 - e0)
            ));
            facets_rows += 1;
        }
    }
    std::fs::write(dir.join("facets.csv"), facets)?;

    let mut critical = String::from("level,p,E\n");
    let mut critical_rows = 0;
    for m in 0..=radius {
        if m == 0 {
            critical.push_str("0,0,0\n");
            critical_rows += 1;
            continue;
        }
        for r in 0..resolution {
            let t = r as f64 / (resolution - 1) as f64;
            let p = -(m as f64) + t * (2 * m) as f64;
            critical.push_str(&format!("{},{p},{}\n", m * m, m * m));
            critical_rows += 1;
        }
    }
    std::fs::write(dir.join("critical.csv"), critical)?;

    let report = hull_report(2, count, seed, scale);
    let mut scatter = Vec::new();
    let scatter_rows = write_image_csv(&report, &mut scatter)?;
    std::fs::write(dir.join("scatter.csv"), scatter)?;

    Ok(FigureFiles {
        vertices_rows,
        facets_rows,
        critical_rows,
        scatter_rows,
    })
}

/// Parse a flow configuration from `key=value` lines (`#` comments).
/// Keys: step, max_time, tol_grad, tol_level, max_iters, integrator
/// (euler|rk4); unset keys keep their defaults.
pub fn parse_flow_config(text: &str) -> Result<FlowConfig<f64>> {
    let mut cfg = FlowConfig::<f64>::default();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::InvalidArgument(format!("line {}: expected key=value", lineno + 1))
        })?;
        let key = key.trim();
        let value = value.trim();
        let parse_f = |v: &str| -> Result<f64> {
            v.parse()
                .map_err(|_| Error::InvalidArgument(format!("bad number {v:?} for {key}")))
        };
        match key {
            "step" => cfg.step = parse_f(value)?,
            "max_time" => cfg.max_time = parse_f(value)?,
            "tol_grad" => cfg.tol_grad = parse_f(value)?,
            "tol_level" => cfg.tol_level = parse_f(value)?,
            "max_iters" => {
                cfg.max_iters = value.parse().map_err(|_| {
                    Error::InvalidArgument(format!("bad integer {value:?} for max_iters"))
                })?
            }
            "integrator" => {
                cfg.integrator = match value {
                    "euler" => Integrator::EulerRetract,
                    "rk4" => Integrator::Rk4Retract,
                    other => {
                        return Err(Error::InvalidArgument(format!(
                            "unknown integrator {other:?} (euler|rk4)"
                        )))
                    }
                }
            }
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown config key {other:?}"
                )))
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liegroup::TorusVector;

    #[test]
    fn hull_margin_examples() {
        let mk = |p: f64, e: f64| MomentValue::new(TorusVector::from_chart(2, &[p]).unwrap(), e);
        assert!(check_hull_su2(&mk(0.0, 0.0)).abs() < 1e-15);
        assert!((check_hull_su2(&mk(0.5, 0.3)) + 0.2).abs() < 1e-12);
        assert!((check_hull_su2(&mk(0.5, 0.6)) - 0.1).abs() < 1e-12);
        // margin at the lattice vertices is exactly zero
        for m in -3i64..=3 {
            assert!(check_hull_su2(&mk(m as f64, (m * m) as f64)).abs() < 1e-12);
        }
    }

    #[test]
    fn hull_margin_scan_range_is_sufficient() {
        // the finite facet scan matches a wide brute-force scan
        let mut rng = rand::SeedableRng::seed_from_u64(77u64);
        let mut rng: rand_chacha::ChaCha8Rng = rng;
        for _ in 0..200 {
            let p = crate::randutil::normal_f64(&mut rng) * 3.0;
            let e = crate::randutil::normal_f64(&mut rng).abs() * 6.0;
            let v = MomentValue::new(TorusVector::from_chart(2, &[p]).unwrap(), e);
            let fast = check_hull_su2(&v);
            let mut brute = f64::INFINITY;
            for m in -60i64..=60 {
                let m = m as f64;
                brute = brute.min(e - ((2.0 * m + 1.0) * p - m * (m + 1.0)));
            }
            assert!((fast - brute).abs() < 1e-12, "p={p} e={e}");
        }
    }

    #[test]
    fn image_is_deterministic() {
        let a = sample_image::<f64>(2, 2, 5, 99, 0.55);
        let b = sample_image::<f64>(2, 2, 5, 99, 0.55);
        for (x, y) in a.moments.iter().zip(&b.moments) {
            assert_eq!(x.p.chart(), y.p.chart());
            assert_eq!(x.energy, y.energy);
        }
        assert_eq!(a.failures, b.failures);
    }

    #[test]
    fn constant_tangent_maps_to_origin() {
        // a zero-scale sampler draws the constant loop
        let image = sample_image::<f64>(2, 2, 1, 5, 1e-12);
        assert!(image.moments[0].norm() < 1e-20);
    }

    #[test]
    fn sampled_image_obeys_the_hull() {
        let report = hull_report(2, 300, 11, 0.55);
        assert_eq!(report.violations, 0, "min margin {}", report.min_margin);
        assert!(report.failures * 100 < 300);
    }

    #[test]
    fn figure_files_row_counts() {
        let dir = std::env::temp_dir().join("loopmoment_fig_test");
        let files = emit_figure(2, 5, 20, 3, 0.55, &dir).unwrap();
        assert_eq!(files.vertices_rows, 5);
        assert_eq!(files.facets_rows, 4 * 5);
        assert_eq!(files.critical_rows, 1 + 2 * 5);
        assert_eq!(files.scatter_rows, 20);
        for f in ["vertices.csv", "facets.csv", "critical.csv", "scatter.csv"] {
            let text = std::fs::read_to_string(dir.join(f)).unwrap();
            let expect = match f {
                "vertices.csv" => files.vertices_rows,
                "facets.csv" => files.facets_rows,
                "critical.csv" => files.critical_rows,
                _ => files.scatter_rows,
            };
            assert_eq!(text.lines().count(), expect + 1, "{f} rows");
        }
        // vertices example: radius 2
        let text = std::fs::read_to_string(dir.join("vertices.csv")).unwrap();
        assert!(text.contains("-2,-2,4"));
        assert!(text.contains("0,0,0"));
        assert!(text.contains("2,2,4"));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn manifest_validation() {
        let m = ExperimentManifest::default();
        m.validate().unwrap();
        let mut bad = m.clone();
        bad.tolerances.level_residual = 0.0;
        assert!(matches!(bad.validate(), Err(Error::InvalidManifest(_))));
        let mut bad = m.clone();
        bad.image_count = 0;
        assert!(bad.validate().is_err());

        // JSON round trip
        let text = m.to_json();
        let back = ExperimentManifest::from_json(&text).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn flow_config_parser() {
        let cfg =
            parse_flow_config("step=0.5\n# comment\ntol_grad = 1e-9\nintegrator=rk4\n").unwrap();
        assert_eq!(cfg.step, 0.5);
        assert_eq!(cfg.tol_grad, 1e-9);
        assert_eq!(cfg.integrator, Integrator::Rk4Retract);
        assert!(parse_flow_config("step=0\n").is_err());
        assert!(parse_flow_config("bogus=1\n").is_err());
    }
}
