//! `loopmoment`: command-line probes for the Hamiltonian T×S¹ geometry
//! of finite Fourier loops in SU(N) — moment evaluation, gradient flows,
//! level projections, connectivity probes, the Grassmannian consistency
//! check, moment-image sampling and the verification suite.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use loopmoment_core::experiments::{
    self, emit_figure, hull_report, parse_flow_config, run_suite, write_image_csv,
    ExperimentManifest,
};
use loopmoment_core::flow::{
    find_admissible_basis, flow_down, probe_connectivity, project_to_joint_level, FlowConfig,
    LevelSpec, ProbeConfig,
};
use loopmoment_core::grassmann::GrassModel;
use loopmoment_core::jsonio::{LoopJson, MomentJson, WitnessGraphJson};
use loopmoment_core::liegroup::TorusVector;
use loopmoment_core::loops::random_loop;
use loopmoment_core::moment::{moment, H1Workspace, Objective};
use loopmoment_core::{Loop64, Moment64};

#[derive(Parser)]
#[command(
    name = "loopmoment",
    about = "Moment maps, energy flows and level-set probes for finite Fourier loops in SU(N)",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Group dimension N of SU(N).
    #[arg(long = "group", default_value_t = 2)]
    group: usize,
    /// Fourier order of the loops.
    #[arg(long, default_value_t = 2)]
    order: usize,
    /// Seed for all randomness.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Flow configuration file (key=value lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sampler scale in front of 1/(1+k²).
    #[arg(long, default_value_t = 0.55)]
    scale: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the moment map of a loop JSON file and print {"p":…,"E":…}.
    Eval { loop_file: PathBuf },
    /// Draw a random loop and print it as JSON.
    Sample {
        #[command(flatten)]
        common: CommonArgs,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the downward gradient flow and emit the trace CSV.
    Flow {
        #[command(flatten)]
        common: CommonArgs,
        /// Objective: "energy" or "tilted".
        #[arg(long, default_value = "energy")]
        objective: String,
        /// Tilt chart coordinates (comma separated) for the tilted energy.
        #[arg(long)]
        rho: Option<String>,
        /// Start loop JSON (random when omitted).
        #[arg(long = "loop")]
        loop_file: Option<PathBuf>,
        /// Trace CSV output (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Project a loop onto a moment level set.
    Project {
        #[command(flatten)]
        common: CommonArgs,
        /// Target as inline JSON {"p":[…],"E":…} or @file.
        #[arg(long)]
        target: String,
        /// Start loop JSON (random when omitted).
        #[arg(long = "loop")]
        loop_file: Option<PathBuf>,
        /// Projected loop output (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample a level set and report the witness-graph components.
    Connect {
        #[command(flatten)]
        common: CommonArgs,
        /// Target level as inline JSON {"p":[…],"E":…} or @file; the
        /// moment of a seeded random loop when omitted.
        #[arg(long)]
        target: Option<String>,
        /// Number of level samples.
        #[arg(long, default_value_t = 20)]
        samples: usize,
        /// Path discretization steps per edge.
        #[arg(long, default_value_t = 64)]
        path_steps: usize,
        /// Witness graph JSON output (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the Grassmannian diagram consistency check.
    Grassmann {
        #[command(flatten)]
        common: CommonArgs,
        /// Run the consistency suite and print the max residual.
        #[arg(long)]
        check: bool,
        /// Number of random loops per order.
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
    /// Sample the moment image and emit the scatter CSV.
    Image {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of samples.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// CSV output (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the SU(2) moment-image figure data files.
    Figure1 {
        /// Lattice radius for the parabola vertices.
        #[arg(long, default_value_t = 3)]
        radius: i64,
        /// Points per emitted segment.
        #[arg(long, default_value_t = 32)]
        resolution: usize,
        /// Scatter sample count.
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.55)]
        scale: f64,
        /// Output directory for the CSV files.
        #[arg(long, default_value = "figure1")]
        out_dir: PathBuf,
    },
    /// Run the verification suite and exit nonzero on failure.
    Suite {
        /// Manifest JSON (defaults when omitted).
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Directory for report.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Eval { loop_file } => cmd_eval(&loop_file),
        Command::Sample { common, out } => cmd_sample(&common, out.as_deref()),
        Command::Flow {
            common,
            objective,
            rho,
            loop_file,
            out,
        } => cmd_flow(
            &common,
            &objective,
            rho.as_deref(),
            loop_file.as_deref(),
            out.as_deref(),
        ),
        Command::Project {
            common,
            target,
            loop_file,
            out,
        } => cmd_project(&common, &target, loop_file.as_deref(), out.as_deref()),
        Command::Connect {
            common,
            target,
            samples,
            path_steps,
            out,
        } => cmd_connect(
            &common,
            target.as_deref(),
            samples,
            path_steps,
            out.as_deref(),
        ),
        Command::Grassmann {
            common,
            check,
            trials,
        } => cmd_grassmann(&common, check, trials),
        Command::Image {
            common,
            samples,
            out,
        } => cmd_image(&common, samples, out.as_deref()),
        Command::Figure1 {
            radius,
            resolution,
            samples,
            seed,
            scale,
            out_dir,
        } => cmd_figure(radius, resolution, samples, seed, scale, &out_dir),
        Command::Suite { manifest, out } => cmd_suite(manifest.as_deref(), out.as_deref()),
    }
}

fn load_flow_config(common: &CommonArgs) -> Result<FlowConfig<f64>> {
    match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            Ok(parse_flow_config(&text)?)
        }
        None => Ok(FlowConfig::default()),
    }
}

fn load_or_sample_loop(common: &CommonArgs, loop_file: Option<&std::path::Path>) -> Result<Loop64> {
    match loop_file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let json: LoopJson = serde_json::from_str(&text)?;
            Ok(json.to_loop::<f64>()?)
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
            Ok(random_loop::<f64, _>(
                common.group,
                common.order,
                common.scale,
                &mut rng,
            )?)
        }
    }
}

fn parse_target(spec: &str) -> Result<Moment64> {
    let text = match spec.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?,
        None => spec.to_string(),
    };
    let json: MomentJson = serde_json::from_str(&text)?;
    Ok(json.to_moment::<f64>()?)
}

fn write_or_print(out: Option<&std::path::Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, content).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn cmd_eval(path: &std::path::Path) -> Result<()> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let json: LoopJson = serde_json::from_str(&text)?;
    let lp = json.to_loop::<f64>()?;
    let mu = moment(&lp);
    println!("{}", serde_json::to_string(&MomentJson::from_moment(&mu))?);
    Ok(())
}

fn cmd_sample(common: &CommonArgs, out: Option<&std::path::Path>) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let lp = random_loop::<f64, _>(common.group, common.order, common.scale, &mut rng)?;
    let text = serde_json::to_string_pretty(&LoopJson::from_loop(&lp))?;
    write_or_print(out, &format!("{text}\n"))
}

fn cmd_flow(
    common: &CommonArgs,
    objective: &str,
    rho: Option<&str>,
    loop_file: Option<&std::path::Path>,
    out: Option<&std::path::Path>,
) -> Result<()> {
    let cfg = load_flow_config(common)?;
    let lp = load_or_sample_loop(common, loop_file)?;
    let f = match objective {
        "energy" => Objective::Energy,
        "tilted" => {
            let chart: Vec<f64> = match rho {
                Some(spec) => spec
                    .split(',')
                    .map(|s| s.trim().parse().context("parsing --rho"))
                    .collect::<Result<_>>()?,
                None => bail!("--objective tilted requires --rho"),
            };
            Objective::Tilted(TorusVector::from_chart(lp.dim(), &chart)?)
        }
        other => bail!("unknown objective {other:?} (energy|tilted)"),
    };
    let trace = flow_down(&lp, &f, &cfg)?;
    let mut csv = Vec::new();
    trace.write_csv(&mut csv)?;
    write_or_print(out, std::str::from_utf8(&csv)?)?;
    eprintln!(
        "flow: {} steps, status {:?}, final f {:.6e}, final gradient {:.3e}",
        trace.samples.len() - 1,
        trace.status,
        trace.final_sample().value,
        trace.final_sample().grad_norm
    );
    Ok(())
}

fn cmd_project(
    common: &CommonArgs,
    target: &str,
    loop_file: Option<&std::path::Path>,
    out: Option<&std::path::Path>,
) -> Result<()> {
    let cfg = load_flow_config(common)?;
    let lp = load_or_sample_loop(common, loop_file)?;
    let target = parse_target(target)?;
    let ws = H1Workspace::new(lp.dim(), lp.order())?;
    let basis = find_admissible_basis(&lp, 1e-3, &ws)?;
    let projected =
        project_to_joint_level(&lp, &LevelSpec::Moment(target.clone()), &basis, &cfg, &ws)?;
    let mu = moment(&projected.lp);
    eprintln!(
        "projected in {} cycles, residual {:.3e}",
        projected.residuals.len(),
        mu.distance(&target)
    );
    let text = serde_json::to_string_pretty(&LoopJson::from_loop(&projected.lp))?;
    write_or_print(out, &format!("{text}\n"))
}

fn cmd_connect(
    common: &CommonArgs,
    target: Option<&str>,
    samples: usize,
    path_steps: usize,
    out: Option<&std::path::Path>,
) -> Result<()> {
    let cfg = load_flow_config(common)?;
    let target = match target {
        Some(spec) => parse_target(spec)?,
        None => {
            let lp = load_or_sample_loop(common, None)?;
            moment(&lp)
        }
    };
    let probe = ProbeConfig {
        seed: common.seed,
        sample_scale: common.scale,
        path_steps,
    };
    let report = probe_connectivity(&target, common.group, common.order, samples, &cfg, &probe)?;
    eprintln!(
        "connectivity: {} nodes, {} edges, {} components{}",
        report.nodes.len(),
        report.edges.len(),
        report.components,
        if report.empty { " (empty level)" } else { "" }
    );
    let json = WitnessGraphJson::from_report(&report);
    let text = serde_json::to_string_pretty(&json)?;
    write_or_print(out, &format!("{text}\n"))
}

fn cmd_grassmann(common: &CommonArgs, check: bool, trials: usize) -> Result<()> {
    if !check {
        bail!("nothing to do: pass --check to run the diagram consistency suite");
    }
    let mut worst = 0.0f64;
    let mut route_worst = 0.0f64;
    let orders = [1usize, 2, 3];
    for &order in &orders {
        let model = GrassModel::<f64>::new(common.group, order)?;
        for i in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
            rng.set_stream((order * 10_000 + i) as u64);
            let lp = random_loop::<f64, _>(common.group, order, common.scale, &mut rng)?;
            let point = model.embed(&lp)?;
            let gm = model.grass_moment(&point)?;
            worst = worst.max(gm.distance(&moment(&lp)).abs());
            if common.group * order <= 8 {
                let via_minors = model.grass_moment_minors(&point)?;
                route_worst = route_worst.max(gm.distance(&via_minors));
            }
        }
    }
    println!(
        "diagram max residual {worst:.6e} over {} loops (orders {orders:?}); trace vs minors {route_worst:.6e}",
        trials * orders.len()
    );
    Ok(())
}

fn cmd_image(common: &CommonArgs, samples: usize, out: Option<&std::path::Path>) -> Result<()> {
    if common.group == 2 {
        let report = hull_report(common.order, samples, common.seed, common.scale);
        let mut csv = Vec::new();
        let rows = write_image_csv(&report, &mut csv)?;
        write_or_print(out, std::str::from_utf8(&csv)?)?;
        eprintln!(
            "{rows} samples, min margin {:.3e}, {} violations, {} resamples",
            report.min_margin, report.violations, report.failures
        );
    } else {
        let image = experiments::sample_image::<f64>(
            common.group,
            common.order,
            samples,
            common.seed,
            common.scale,
        );
        let mut csv = String::new();
        let chart_cols: Vec<String> = (1..common.group).map(|a| format!("p_{a}")).collect();
        csv.push_str(&format!("sample_id,{},E,margin\n", chart_cols.join(",")));
        for (i, mu) in image.moments.iter().enumerate() {
            let chart: Vec<String> = mu.p.chart().iter().map(|c| c.to_string()).collect();
            csv.push_str(&format!("{i},{},{},nan\n", chart.join(","), mu.energy));
        }
        write_or_print(out, &csv)?;
        eprintln!(
            "{} samples, {} resamples",
            image.moments.len(),
            image.failures
        );
    }
    Ok(())
}

fn cmd_figure(
    radius: i64,
    resolution: usize,
    samples: usize,
    seed: u64,
    scale: f64,
    out_dir: &std::path::Path,
) -> Result<()> {
    let files = emit_figure(radius, resolution, samples, seed, scale, out_dir)?;
    eprintln!(
        "wrote {}: vertices {}, facets {}, critical {}, scatter {}",
        out_dir.display(),
        files.vertices_rows,
        files.facets_rows,
        files.critical_rows,
        files.scatter_rows
    );
    Ok(())
}

fn cmd_suite(manifest: Option<&std::path::Path>, out: Option<&std::path::Path>) -> Result<()> {
    let mut manifest = match manifest {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            ExperimentManifest::from_json(&text)?
        }
        None => ExperimentManifest::default(),
    };
    if let Some(dir) = out {
        manifest.out_dir = Some(dir.display().to_string());
    }
    let report = run_suite(&manifest)?;
    let mut stdout = std::io::stdout().lock();
    for line in report.render_lines() {
        writeln!(stdout, "{line}")?;
    }
    if !report.all_passed {
        bail!("verification suite failed");
    }
    Ok(())
}
