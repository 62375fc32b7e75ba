//! Command-line front end for the `rolldisc` crate.
//!
//! Seven subcommands cover the computational surface of the library:
//! controllability scans, extremal integration, numeric-vs-closed-form
//! comparison, cut-point location, symmetry-orbit families, graded-algebra
//! prolongation, and multiplication tables. Artifacts are CSV, JSON
//! (always with a top-level `schema_version`), or SVG; human-readable
//! summaries go to stderr so that stdout stays machine-parseable.
//!
//! Every option can also be supplied through a TOML config file with one
//! section per subcommand (`--config path.toml`); explicit flags override
//! the file, which overrides built-in defaults. The `recipes/` directory
//! ships config files reproducing the standard figures.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rolldisc::lie::{
    contact_symmetry_algebra, disc4_algebra, disc_algebra, car_fixed_phi_algebra,
    heisenberg_algebra, StructureConstants,
};
use rolldisc::models::{car_frame, disc4_frame, disc_frame, heis_frame};
use rolldisc::nilgeo::{constants_from_initial, cut_point, cut_time, eval_state};
use rolldisc::plot::{curves_from_csv_str, curves_from_orbits, curves_to_csv_string, render_svg, Curve};
use rolldisc::solver::{
    conserved_diagnostics, integrate_rkf45, ExtremalState, SolverOptions, SystemKind, Trajectory,
    DEFAULT_REL_TOL,
};
use rolldisc::symmetry::{orbit_closed, orbit_numeric, symmetry_field, ClosedFlow, OrbitCurve};
use rolldisc::tanaka::{bundled_symbol_input, prolong, prolongation_report};
use rolldisc::vecfield::{controllability_check, sample_points, VectorField, DEFAULT_SEED};
use serde::Deserialize;
use serde_json::json;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

/// Initial covector of the reference extremal: `(1/2, √3/2, 2)`.
const DEFAULT_H: [f64; 3] = [0.5, 0.866_025_403_784_438_6, 2.0];
const DEFAULT_HORIZON: f64 = PI;
const DEFAULT_GRID: usize = 101;
const DEFAULT_ORBIT_GRID: usize = 121;
const DEFAULT_S_VALUES: &str = "0,1,3";
const DEFAULT_DEPTH: usize = 2;
const DEFAULT_POINTS: usize = 100;
const DEFAULT_PROLONG_DEPTH: i64 = 2;

/// Accepted drift of the Hamiltonian over a run; exceeding it fails the
/// command's invariant check (nonzero exit). The budget covers the cubic
/// Hermite dense-output error at the uniform grid samples, which dominates
/// the node-level integration error at default tolerances.
const HAMILTONIAN_DRIFT_TOL: f64 = 1e-6;
/// Accepted drift of `h3² − h1²` for the disc system.
const INVARIANT_DRIFT_TOL: f64 = 1e-6;
/// Accepted drift of `h3` for the approximation, which the integrator
/// conserves to roundoff.
const NILPOTENT_INVARIANT_DRIFT_TOL: f64 = 1e-10;

/// Relative tolerance of the numerically integrated symmetry flows
/// (`t5`, `t7`, `t8` have no closed form).
const ORBIT_FLOW_TOL: f64 = 1e-10;

/// Title of the comparison overlay; re-plotting the emitted CSV with this
/// title reproduces the SVG byte for byte.
const COMPARE_TITLE: &str = "original vs nilpotent";

fn main() {
    match run() {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}

fn run() -> Result<i32> {
    let cli = Cli::parse();
    let file = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Controllability(a) => {
            cmd_controllability(a.merge(file.controllability.unwrap_or_default())?)
        }
        Command::Extremal(a) => cmd_extremal(a.merge(file.extremal.unwrap_or_default())?),
        Command::Compare(a) => cmd_compare(a.merge(file.compare.unwrap_or_default())?),
        Command::Cutpoint(a) => cmd_cutpoint(a.merge(file.cutpoint.unwrap_or_default())?),
        Command::Orbit(a) => cmd_orbit(a.merge(file.orbit.unwrap_or_default())?),
        Command::Tanaka(a) => cmd_tanaka(a.merge(file.tanaka.unwrap_or_default())?),
        Command::Table(a) => cmd_table(a.merge(file.table.unwrap_or_default())?),
    }
}

#[derive(Parser)]
#[command(
    name = "rolldisc",
    version,
    about = "Extremal trajectories, symmetries, and controllability of the vertical rolling disc"
)]
struct Cli {
    /// TOML config file with one section per subcommand; flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan the bracket-generated rank of a control system at random points.
    Controllability(ControllabilityArgs),
    /// Integrate one normal extremal and write it on a uniform time grid.
    Extremal(ExtremalArgs),
    /// Integrate the disc and its nilpotent approximation side by side.
    Compare(CompareArgs),
    /// Locate the cut time and cut point of an approximation geodesic.
    Cutpoint(CutpointArgs),
    /// Sweep an approximation geodesic through a one-parameter symmetry.
    Orbit(OrbitArgs),
    /// Prolong a graded Lie algebra and report per-degree dimensions.
    Tanaka(TanakaArgs),
    /// Print the multiplication table of a named Lie algebra.
    Table(TableArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum FrameChoice {
    /// Rolling disc on the (x, y, θ) chart.
    Disc,
    /// Rolling disc with the rolling angle kept as a fourth coordinate.
    Disc4,
    /// Kinematic car (ℓ = 1) on the (x, y, θ, φ) chart.
    Car,
    /// Heisenberg frame of the nilpotent approximation.
    Heisenberg,
    /// One generator of the disc alone; never controllable.
    Single,
}

impl FrameChoice {
    fn frame(self) -> (Vec<VectorField>, &'static str) {
        match self {
            FrameChoice::Disc => (disc_frame(), "disc"),
            FrameChoice::Disc4 => (disc4_frame(), "disc4"),
            FrameChoice::Car => (car_frame(1.0), "car"),
            FrameChoice::Heisenberg => (heis_frame(), "heisenberg"),
            FrameChoice::Single => {
                let mut f = disc_frame();
                f.truncate(1);
                (f, "single")
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ExtremalSystem {
    Original,
    Nilpotent,
}

impl ExtremalSystem {
    fn kind(self) -> SystemKind {
        match self {
            ExtremalSystem::Original => SystemKind::Original,
            ExtremalSystem::Nilpotent => SystemKind::Nilpotent,
        }
    }

    fn label(self) -> &'static str {
        match self {
            ExtremalSystem::Original => "original",
            ExtremalSystem::Nilpotent => "nilpotent",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum AlgebraChoice {
    Disc,
    Disc4,
    Car,
    Heisenberg,
    Sl3,
}

impl AlgebraChoice {
    fn algebra(self) -> StructureConstants {
        match self {
            AlgebraChoice::Disc => disc_algebra(),
            AlgebraChoice::Disc4 => disc4_algebra(),
            AlgebraChoice::Car => car_fixed_phi_algebra(),
            AlgebraChoice::Heisenberg => heisenberg_algebra(),
            AlgebraChoice::Sl3 => contact_symmetry_algebra(),
        }
    }
}

// ---------------------------------------------------------------------------
// Per-command flags, config-file sections, and merged run configurations.
// Flags and section fields are all optional; `merge` resolves
// flag > config > default and validates the result.
// ---------------------------------------------------------------------------

/// Initial covector flags shared by the trajectory commands.
#[derive(Args)]
struct CovectorArgs {
    /// Initial vertical coordinate h1(0).
    #[arg(long)]
    h1: Option<f64>,
    /// Initial vertical coordinate h2(0).
    #[arg(long)]
    h2: Option<f64>,
    /// Initial vertical coordinate h3(0).
    #[arg(long)]
    h3: Option<f64>,
}

impl CovectorArgs {
    fn merge(&self, sec: (Option<f64>, Option<f64>, Option<f64>)) -> [f64; 3] {
        [
            self.h1.or(sec.0).unwrap_or(DEFAULT_H[0]),
            self.h2.or(sec.1).unwrap_or(DEFAULT_H[1]),
            self.h3.or(sec.2).unwrap_or(DEFAULT_H[2]),
        ]
    }
}

#[derive(Args)]
struct ControllabilityArgs {
    /// Control system to scan.
    #[arg(long, value_enum)]
    system: Option<FrameChoice>,
    /// Bracket depth: 0 keeps the generators alone, depth k adds brackets
    /// whose operands' depths sum to k − 1.
    #[arg(long)]
    depth: Option<usize>,
    /// Number of random sample points.
    #[arg(long)]
    points: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Artifact format; this command only produces JSON.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ControllabilitySection {
    system: Option<FrameChoice>,
    depth: Option<usize>,
    points: Option<usize>,
    out: Option<PathBuf>,
    format: Option<Format>,
}

struct ControllabilityRun {
    system: FrameChoice,
    depth: usize,
    points: usize,
    out: Option<PathBuf>,
}

impl ControllabilityArgs {
    fn merge(self, sec: ControllabilitySection) -> Result<ControllabilityRun> {
        let format = self.format.or(sec.format).unwrap_or(Format::Json);
        if format != Format::Json {
            bail!("controllability reports are JSON only");
        }
        let points = self.points.or(sec.points).unwrap_or(DEFAULT_POINTS);
        if points == 0 {
            bail!("--points must be at least 1");
        }
        Ok(ControllabilityRun {
            system: self.system.or(sec.system).unwrap_or(FrameChoice::Disc),
            depth: self.depth.or(sec.depth).unwrap_or(DEFAULT_DEPTH),
            points,
            out: self.out.or(sec.out),
        })
    }
}

#[derive(Args)]
struct ExtremalArgs {
    /// Which Hamiltonian system to integrate.
    #[arg(long, value_enum)]
    system: Option<ExtremalSystem>,
    #[command(flatten)]
    h: CovectorArgs,
    /// Integration horizon T; the trajectory covers [0, T].
    #[arg(long)]
    horizon: Option<f64>,
    /// Number of uniform output samples, endpoints included.
    #[arg(long)]
    grid: Option<usize>,
    /// Relative tolerance of the adaptive integrator.
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Write the artifact here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Artifact format.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExtremalSection {
    system: Option<ExtremalSystem>,
    h1: Option<f64>,
    h2: Option<f64>,
    h3: Option<f64>,
    horizon: Option<f64>,
    grid: Option<usize>,
    rel_tol: Option<f64>,
    out: Option<PathBuf>,
    format: Option<Format>,
}

struct ExtremalRun {
    system: ExtremalSystem,
    h: [f64; 3],
    horizon: f64,
    grid: usize,
    rel_tol: f64,
    out: Option<PathBuf>,
    format: Format,
}

impl ExtremalArgs {
    fn merge(self, sec: ExtremalSection) -> Result<ExtremalRun> {
        let horizon = self.horizon.or(sec.horizon).unwrap_or(DEFAULT_HORIZON);
        let grid = self.grid.or(sec.grid).unwrap_or(DEFAULT_GRID);
        let rel_tol = self.rel_tol.or(sec.rel_tol).unwrap_or(DEFAULT_REL_TOL);
        validate_run(horizon, grid, rel_tol)?;
        Ok(ExtremalRun {
            system: self.system.or(sec.system).unwrap_or(ExtremalSystem::Original),
            h: self.h.merge((sec.h1, sec.h2, sec.h3)),
            horizon,
            grid,
            rel_tol,
            out: self.out.or(sec.out),
            format: self.format.or(sec.format).unwrap_or(Format::Csv),
        })
    }
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    h: CovectorArgs,
    /// Integration horizon T; both curves cover [0, T].
    #[arg(long)]
    horizon: Option<f64>,
    /// Number of uniform output samples, endpoints included.
    #[arg(long)]
    grid: Option<usize>,
    /// Relative tolerance of the adaptive integrator.
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Write the artifact here; with CSV format an overlay SVG is written
    /// next to it.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Artifact format.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CompareSection {
    h1: Option<f64>,
    h2: Option<f64>,
    h3: Option<f64>,
    horizon: Option<f64>,
    grid: Option<usize>,
    rel_tol: Option<f64>,
    out: Option<PathBuf>,
    format: Option<Format>,
}

struct CompareRun {
    h: [f64; 3],
    horizon: f64,
    grid: usize,
    rel_tol: f64,
    out: Option<PathBuf>,
    format: Format,
}

impl CompareArgs {
    fn merge(self, sec: CompareSection) -> Result<CompareRun> {
        let horizon = self.horizon.or(sec.horizon).unwrap_or(DEFAULT_HORIZON);
        let grid = self.grid.or(sec.grid).unwrap_or(DEFAULT_GRID);
        let rel_tol = self.rel_tol.or(sec.rel_tol).unwrap_or(DEFAULT_REL_TOL);
        validate_run(horizon, grid, rel_tol)?;
        Ok(CompareRun {
            h: self.h.merge((sec.h1, sec.h2, sec.h3)),
            horizon,
            grid,
            rel_tol,
            out: self.out.or(sec.out),
            format: self.format.or(sec.format).unwrap_or(Format::Csv),
        })
    }
}

#[derive(Args)]
struct CutpointArgs {
    #[command(flatten)]
    h: CovectorArgs,
    /// Write the JSON report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Artifact format; this command only produces JSON.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CutpointSection {
    h1: Option<f64>,
    h2: Option<f64>,
    h3: Option<f64>,
    out: Option<PathBuf>,
    format: Option<Format>,
}

struct CutpointRun {
    h: [f64; 3],
    out: Option<PathBuf>,
}

impl CutpointArgs {
    fn merge(self, sec: CutpointSection) -> Result<CutpointRun> {
        let format = self.format.or(sec.format).unwrap_or(Format::Json);
        if format != Format::Json {
            bail!("cutpoint reports are JSON only");
        }
        Ok(CutpointRun {
            h: self.h.merge((sec.h1, sec.h2, sec.h3)),
            out: self.out.or(sec.out),
        })
    }
}

#[derive(Args)]
struct OrbitArgs {
    /// Symmetry generator, one of t0 … t8.
    #[arg(long)]
    sym: Option<String>,
    /// Comma-separated flow parameters, one curve per value.
    #[arg(long, value_name = "LIST")]
    s_values: Option<String>,
    #[command(flatten)]
    h: CovectorArgs,
    /// Horizon T of the base geodesic.
    #[arg(long)]
    horizon: Option<f64>,
    /// Number of samples of each curve, endpoints included.
    #[arg(long)]
    grid: Option<usize>,
    /// Relative tolerance of numerically integrated flows (t5, t7, t8).
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Write the artifact here; with CSV format an SVG is written next
    /// to it.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Artifact format (csv or svg).
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OrbitSection {
    sym: Option<String>,
    s_values: Option<String>,
    h1: Option<f64>,
    h2: Option<f64>,
    h3: Option<f64>,
    horizon: Option<f64>,
    grid: Option<usize>,
    rel_tol: Option<f64>,
    out: Option<PathBuf>,
    format: Option<Format>,
}

struct OrbitRun {
    sym: usize,
    s_values: Vec<f64>,
    h: [f64; 3],
    horizon: f64,
    grid: usize,
    rel_tol: f64,
    out: Option<PathBuf>,
    format: Format,
}

impl OrbitArgs {
    fn merge(self, sec: OrbitSection) -> Result<OrbitRun> {
        let horizon = self.horizon.or(sec.horizon).unwrap_or(DEFAULT_HORIZON);
        let grid = self.grid.or(sec.grid).unwrap_or(DEFAULT_ORBIT_GRID);
        let rel_tol = self.rel_tol.or(sec.rel_tol).unwrap_or(ORBIT_FLOW_TOL);
        validate_run(horizon, grid, rel_tol)?;
        let sym_label = self.sym.or(sec.sym).unwrap_or_else(|| "t0".into());
        let sym = parse_sym(&sym_label)?;
        let s_text = self
            .s_values
            .or(sec.s_values)
            .unwrap_or_else(|| DEFAULT_S_VALUES.into());
        let format = self.format.or(sec.format).unwrap_or(Format::Csv);
        if format == Format::Json {
            bail!("orbit artifacts are CSV or SVG");
        }
        Ok(OrbitRun {
            sym,
            s_values: parse_s_values(&s_text)?,
            h: self.h.merge((sec.h1, sec.h2, sec.h3)),
            horizon,
            grid,
            rel_tol,
            out: self.out.or(sec.out),
            format,
        })
    }
}

#[derive(Args)]
struct TanakaArgs {
    /// JSON structure-constant file with a grading; defaults to the
    /// bundled 5-dimensional disc symbol.
    #[arg(long, value_name = "PATH")]
    input: Option<PathBuf>,
    /// Highest positive degree attempted before truncating.
    #[arg(long)]
    depth: Option<i64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Artifact format; this command only produces JSON.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TanakaSection {
    input: Option<PathBuf>,
    depth: Option<i64>,
    out: Option<PathBuf>,
    format: Option<Format>,
}

struct TanakaRun {
    input: Option<PathBuf>,
    depth: i64,
    out: Option<PathBuf>,
}

impl TanakaArgs {
    fn merge(self, sec: TanakaSection) -> Result<TanakaRun> {
        let format = self.format.or(sec.format).unwrap_or(Format::Json);
        if format != Format::Json {
            bail!("tanaka reports are JSON only");
        }
        let depth = self.depth.or(sec.depth).unwrap_or(DEFAULT_PROLONG_DEPTH);
        if depth < 0 {
            bail!("--depth must be non-negative");
        }
        Ok(TanakaRun {
            input: self.input.or(sec.input),
            depth,
            out: self.out.or(sec.out),
        })
    }
}

#[derive(Args)]
struct TableArgs {
    /// Which algebra to print.
    #[arg(long, value_enum)]
    system: Option<AlgebraChoice>,
    /// Write the table here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableSection {
    system: Option<AlgebraChoice>,
    out: Option<PathBuf>,
}

struct TableRun {
    system: AlgebraChoice,
    out: Option<PathBuf>,
}

impl TableArgs {
    fn merge(self, sec: TableSection) -> Result<TableRun> {
        Ok(TableRun {
            system: self.system.or(sec.system).unwrap_or(AlgebraChoice::Disc),
            out: self.out.or(sec.out),
        })
    }
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    controllability: Option<ControllabilitySection>,
    extremal: Option<ExtremalSection>,
    compare: Option<CompareSection>,
    cutpoint: Option<CutpointSection>,
    orbit: Option<OrbitSection>,
    tanaka: Option<TanakaSection>,
    table: Option<TableSection>,
}

fn load_config(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
        }
        None => Ok(FileConfig::default()),
    }
}

fn validate_run(horizon: f64, grid: usize, rel_tol: f64) -> Result<()> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        bail!("--horizon must be positive and finite, got {horizon}");
    }
    if grid < 2 {
        bail!("--grid must be at least 2, got {grid}");
    }
    if !(rel_tol > 0.0) || !rel_tol.is_finite() {
        bail!("--rel-tol must be positive, got {rel_tol}");
    }
    Ok(())
}

/// RNG seed for sample points: `TOOL_SEED` (decimal or `0x`-prefixed hex)
/// when set, otherwise the library default.
fn seed() -> Result<u64> {
    match std::env::var("TOOL_SEED") {
        Ok(raw) => {
            let v = raw.trim();
            let parsed = match v.strip_prefix("0x").or_else(|| v.strip_prefix("0X")) {
                Some(hex) => u64::from_str_radix(hex, 16),
                None => v.parse(),
            };
            parsed.map_err(|_| anyhow!("TOOL_SEED must be an unsigned 64-bit integer, got `{v}`"))
        }
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn parse_sym(label: &str) -> Result<usize> {
    let k: usize = label
        .strip_prefix('t')
        .and_then(|d| d.parse().ok())
        .filter(|&k| k <= 8)
        .ok_or_else(|| anyhow!("--sym must be one of t0 … t8, got `{label}`"))?;
    Ok(k)
}

fn parse_s_values(text: &str) -> Result<Vec<f64>> {
    let values: Vec<f64> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| anyhow!("--s-values entry `{s}` is not a number"))
        })
        .collect::<Result<_>>()?;
    if values.is_empty() {
        bail!("--s-values must contain at least one number");
    }
    Ok(values)
}

/// Writes an artifact to `--out` or, absent that, to stdout.
fn emit(out: Option<&Path>, contents: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, contents)
            .with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn json_artifact(value: &serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON serializes");
    text.push('\n');
    text
}

/// The uniform output grid `t_i = T·i/(n−1)`, the same formula the solver
/// merges into its internal nodes.
fn uniform_times(horizon: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| horizon * i as f64 / (n - 1) as f64).collect()
}

/// Restricts a grid-merged trajectory to the uniform output grid, matching
/// each grid time to the nearest stored node (coincident up to the
/// solver's dedup tolerance).
fn resample(traj: &Trajectory, horizon: f64, n: usize) -> Trajectory {
    let mut times = Vec::with_capacity(n);
    let mut states = Vec::with_capacity(n);
    for t in uniform_times(horizon, n) {
        let j = match traj.times.binary_search_by(|probe| probe.total_cmp(&t)) {
            Ok(j) => j,
            Err(j) => {
                if j == 0 {
                    0
                } else if j == traj.times.len() {
                    j - 1
                } else if (traj.times[j] - t).abs() < (t - traj.times[j - 1]).abs() {
                    j
                } else {
                    j - 1
                }
            }
        };
        times.push(traj.times[j]);
        states.push(traj.states[j]);
    }
    Trajectory {
        times,
        states,
        method: traj.method,
        rel_tol: traj.rel_tol,
        abs_tol: traj.abs_tol,
        diagnostics: traj.diagnostics.clone(),
    }
}

fn solver_options(rel_tol: f64, grid: usize) -> SolverOptions {
    SolverOptions {
        rel_tol,
        abs_tol: rel_tol * 1e-2,
        max_step: None,
        grid: Some(grid),
    }
}

/// Renders curves through a CSV round-trip, so the SVG is a pure function
/// of the CSV artifact emitted alongside it.
fn svg_from_curves(curves: &[Curve], title: &str) -> Result<String> {
    let csv = curves_to_csv_string(curves);
    let parsed = curves_from_csv_str(&csv)?;
    Ok(render_svg(&parsed, (0, 1), title))
}

/// With a CSV artifact written to `path`, drops a sibling SVG next to it
/// (same stem, `.svg` extension).
fn emit_sibling_svg(path: &Path, svg: &str) -> Result<()> {
    let sibling = path.with_extension("svg");
    fs::write(&sibling, svg).with_context(|| format!("writing {}", sibling.display()))?;
    eprintln!("overlay SVG written to {}", sibling.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// Command handlers. Each returns the process exit code: 0 when every
// invariant check requested by the command passed, 1 otherwise.
// ---------------------------------------------------------------------------

fn cmd_controllability(run: ControllabilityRun) -> Result<i32> {
    let (frame, label) = run.system.frame();
    let dim = frame[0].dim();
    let seed = seed()?;
    let points = sample_points(dim, run.points, seed);
    let report = controllability_check(&frame, &points, run.depth)?;
    let controllable = report.full_rank_everywhere();

    if report.min_rank == report.max_rank {
        eprintln!(
            "{label}: rank {}/{} at {}/{} points (depth {})",
            report.min_rank, report.chart_dim, report.points_checked, report.points_checked,
            report.depth
        );
    } else {
        eprintln!(
            "{label}: rank {}..{} of {} over {} points (depth {})",
            report.min_rank, report.max_rank, report.chart_dim, report.points_checked, report.depth
        );
    }
    eprintln!("controllable: {controllable}");

    let doc = json!({
        "schema_version": 1,
        "command": "controllability",
        "system": label,
        "chart_dim": report.chart_dim,
        "depth": report.depth,
        "points_checked": report.points_checked,
        "seed": seed,
        "field_labels": report.field_labels,
        "min_rank": report.min_rank,
        "max_rank": report.max_rank,
        "controllable": controllable,
    });
    emit(run.out.as_deref(), &json_artifact(&doc))?;
    Ok(if controllable { 0 } else { 1 })
}

/// Drift thresholds for one system; both must hold for exit code 0.
fn drift_ok(kind: SystemKind, max_h: f64, max_inv: f64) -> bool {
    let inv_tol = match kind {
        SystemKind::Original => INVARIANT_DRIFT_TOL,
        SystemKind::Nilpotent => NILPOTENT_INVARIANT_DRIFT_TOL,
    };
    max_h <= HAMILTONIAN_DRIFT_TOL && max_inv <= inv_tol
}

fn cmd_extremal(run: ExtremalRun) -> Result<i32> {
    let kind = run.system.kind();
    let s0 = ExtremalState::from_covector(run.h[0], run.h[1], run.h[2]);
    let opts = solver_options(run.rel_tol, run.grid);
    let traj = integrate_rkf45(kind.rhs(), &s0, run.horizon, &opts)?;
    let diag = conserved_diagnostics(&traj, kind);
    let max_inv = diag.max_invariant_drift.unwrap_or(f64::INFINITY);
    let sampled = resample(&traj, run.horizon, run.grid);
    let end = sampled.end();

    eprintln!(
        "{} extremal from h = ({}, {}, {}) over [0, {}]",
        run.system.label(),
        run.h[0],
        run.h[1],
        run.h[2],
        run.horizon
    );
    eprintln!(
        "endpoint: ({:.6}, {:.6}, {:.6}); |dH| = {:.3e}, |d inv| = {:.3e} ({} accepted / {} rejected steps)",
        end.x, end.y, end.theta, diag.max_hamiltonian_drift, max_inv,
        diag.accepted_steps, diag.rejected_steps
    );

    let ok = drift_ok(kind, diag.max_hamiltonian_drift, max_inv);
    if !ok {
        eprintln!("conservation check FAILED");
    }

    let artifact = match run.format {
        Format::Csv => sampled.to_csv_string(),
        Format::Svg => {
            let curve = Curve::from_trajectory(&sampled, run.system.label());
            svg_from_curves(&[curve], run.system.label())?
        }
        Format::Json => json_artifact(&json!({
            "schema_version": 1,
            "command": "extremal",
            "system": run.system.label(),
            "h": run.h,
            "horizon": run.horizon,
            "grid": run.grid,
            "rel_tol": run.rel_tol,
            "endpoint": { "x": end.x, "y": end.y, "theta": end.theta,
                          "h1": end.h1, "h2": end.h2, "h3": end.h3 },
            "max_hamiltonian_drift": diag.max_hamiltonian_drift,
            "max_invariant_drift": max_inv,
            "checks_passed": ok,
        })),
    };
    emit(run.out.as_deref(), &artifact)?;
    Ok(if ok { 0 } else { 1 })
}

fn cmd_compare(run: CompareRun) -> Result<i32> {
    let s0 = ExtremalState::from_covector(run.h[0], run.h[1], run.h[2]);
    let opts = solver_options(run.rel_tol, run.grid);
    let original = integrate_rkf45(SystemKind::Original.rhs(), &s0, run.horizon, &opts)?;
    let nilpotent = integrate_rkf45(SystemKind::Nilpotent.rhs(), &s0, run.horizon, &opts)?;
    let diag_o = conserved_diagnostics(&original, SystemKind::Original);
    let diag_n = conserved_diagnostics(&nilpotent, SystemKind::Nilpotent);
    let original = resample(&original, run.horizon, run.grid);
    let nilpotent = resample(&nilpotent, run.horizon, run.grid);

    // Sup over the shared grid of the worst (x, y, θ) coordinate gap.
    let gap = original
        .states
        .iter()
        .zip(&nilpotent.states)
        .map(|(a, b)| {
            (a.x - b.x)
                .abs()
                .max((a.y - b.y).abs())
                .max((a.theta - b.theta).abs())
        })
        .fold(0.0f64, f64::max);

    eprintln!(
        "disc vs approximation from h = ({}, {}, {}) over [0, {}]",
        run.h[0], run.h[1], run.h[2], run.horizon
    );
    eprintln!("sup gap over the grid: {gap:.6e}");

    let inv_o = diag_o.max_invariant_drift.unwrap_or(f64::INFINITY);
    let inv_n = diag_n.max_invariant_drift.unwrap_or(f64::INFINITY);
    let ok = drift_ok(SystemKind::Original, diag_o.max_hamiltonian_drift, inv_o)
        && drift_ok(SystemKind::Nilpotent, diag_n.max_hamiltonian_drift, inv_n);
    if !ok {
        eprintln!("conservation check FAILED");
    }

    let curves = [
        Curve::from_trajectory(&original, "original"),
        Curve::from_trajectory(&nilpotent, "nilpotent"),
    ];
    let artifact = match run.format {
        Format::Csv => curves_to_csv_string(&curves),
        Format::Svg => svg_from_curves(&curves, COMPARE_TITLE)?,
        Format::Json => json_artifact(&json!({
            "schema_version": 1,
            "command": "compare",
            "h": run.h,
            "horizon": run.horizon,
            "grid": run.grid,
            "rel_tol": run.rel_tol,
            "sup_gap": gap,
            "original": {
                "max_hamiltonian_drift": diag_o.max_hamiltonian_drift,
                "max_invariant_drift": inv_o,
            },
            "nilpotent": {
                "max_hamiltonian_drift": diag_n.max_hamiltonian_drift,
                "max_invariant_drift": inv_n,
            },
            "checks_passed": ok,
        })),
    };
    emit(run.out.as_deref(), &artifact)?;
    if run.format == Format::Csv {
        if let Some(path) = run.out.as_deref() {
            emit_sibling_svg(path, &svg_from_curves(&curves, COMPARE_TITLE)?)?;
        }
    }
    Ok(if ok { 0 } else { 1 })
}

fn cmd_cutpoint(run: CutpointRun) -> Result<i32> {
    let c = constants_from_initial(run.h);
    match (cut_time(&c), cut_point(&c)) {
        (Some(t), Some(p)) => {
            eprintln!(
                "cut time {t:.12}; cut point ({:.12}, {:.12}, {:.12})",
                p[0], p[1], p[2]
            );
            let doc = json!({
                "schema_version": 1,
                "command": "cutpoint",
                "h": run.h,
                "cut_time": t,
                "cut_point": p,
            });
            emit(run.out.as_deref(), &json_artifact(&doc))?;
            Ok(0)
        }
        _ => {
            eprintln!("degenerate initial covector: the geodesic never cuts");
            let doc = json!({
                "schema_version": 1,
                "command": "cutpoint",
                "h": run.h,
                "error": "degenerate: h3 = 0 or h1 = h2 = 0; the geodesic is optimal forever",
            });
            emit(run.out.as_deref(), &json_artifact(&doc))?;
            Ok(1)
        }
    }
}

fn cmd_orbit(run: OrbitRun) -> Result<i32> {
    let c = constants_from_initial(run.h);
    let times = uniform_times(run.horizon, run.grid);
    let base: Vec<Vec<f64>> = times
        .iter()
        .map(|&t| {
            let s = eval_state(&c, t);
            vec![s.x, s.y, s.theta]
        })
        .collect();

    let orbits: Vec<OrbitCurve> = match run.sym {
        0 => orbit_closed(&ClosedFlow::Rotation, &run.s_values, &base)?,
        1 => orbit_closed(
            &ClosedFlow::Translation { b1: 1.0, b2: 0.0, b3: 0.0 },
            &run.s_values,
            &base,
        )?,
        2 => orbit_closed(
            &ClosedFlow::Translation { b1: 0.0, b2: 1.0, b3: 0.0 },
            &run.s_values,
            &base,
        )?,
        3 => orbit_closed(
            &ClosedFlow::Translation { b1: 0.0, b2: 0.0, b3: 1.0 },
            &run.s_values,
            &base,
        )?,
        4 => orbit_closed(&ClosedFlow::Dilation, &run.s_values, &base)?,
        6 => orbit_closed(&ClosedFlow::Projective, &run.s_values, &base)?,
        k => orbit_numeric(&symmetry_field(k), &run.s_values, &base, run.rel_tol)?,
    };
    let curves = curves_from_orbits(&orbits, &times)?;
    let title = format!("t{} orbit family", run.sym);

    eprintln!(
        "t{} orbit of the geodesic from h = ({}, {}, {}): {} curves x {} samples",
        run.sym, run.h[0], run.h[1], run.h[2], curves.len(), run.grid
    );

    let artifact = match run.format {
        Format::Csv => curves_to_csv_string(&curves),
        Format::Svg => svg_from_curves(&curves, &title)?,
        Format::Json => unreachable!("rejected in merge"),
    };
    emit(run.out.as_deref(), &artifact)?;
    if run.format == Format::Csv {
        if let Some(path) = run.out.as_deref() {
            emit_sibling_svg(path, &svg_from_curves(&curves, &title)?)?;
        }
    }
    Ok(0)
}

fn cmd_tanaka(run: TanakaRun) -> Result<i32> {
    let input = match run.input.as_deref() {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            StructureConstants::from_json(&text)?
        }
        None => bundled_symbol_input(),
    };
    let result = prolong(&input, run.depth)?;
    let report = prolongation_report(&result);

    let dims: Vec<String> = result
        .dims_by_degree
        .iter()
        .map(|(d, n)| format!("{d}:{n}"))
        .collect();
    eprintln!(
        "prolongation {} at depth {}; dims by degree {}",
        if result.complete { "complete" } else { "truncated" },
        run.depth,
        dims.join(", ")
    );

    emit(run.out.as_deref(), &json_artifact(&report))?;
    Ok(0)
}

fn cmd_table(run: TableRun) -> Result<i32> {
    let table = run.system.algebra().multiplication_table();
    emit(run.out.as_deref(), &table)?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s_values_parse_and_reject_garbage() {
        assert_eq!(parse_s_values("0,1,3").unwrap(), vec![0.0, 1.0, 3.0]);
        assert_eq!(parse_s_values(" 0.5 , -2 ").unwrap(), vec![0.5, -2.0]);
        assert!(parse_s_values("").is_err());
        assert!(parse_s_values("a,b").is_err());
    }

    #[test]
    fn sym_labels_parse() {
        assert_eq!(parse_sym("t0").unwrap(), 0);
        assert_eq!(parse_sym("t8").unwrap(), 8);
        assert!(parse_sym("t9").is_err());
        assert!(parse_sym("rot").is_err());
    }

    #[test]
    fn uniform_grid_hits_both_endpoints() {
        let ts = uniform_times(2.0, 5);
        assert_eq!(ts.first(), Some(&0.0));
        assert_eq!(ts.last(), Some(&2.0));
        assert_eq!(ts.len(), 5);
    }

    #[test]
    fn resample_picks_the_nearest_node() {
        let opts = solver_options(1e-10, 7);
        let s0 = ExtremalState::from_covector(0.5, 0.8, 2.0);
        let traj = integrate_rkf45(SystemKind::Original.rhs(), &s0, 1.4, &opts).unwrap();
        let sampled = resample(&traj, 1.4, 7);
        assert_eq!(sampled.len(), 7);
        for (want, got) in uniform_times(1.4, 7).iter().zip(&sampled.times) {
            assert!((want - got).abs() <= 1.4 * 1e-13);
        }
    }

    #[test]
    fn run_validation_rejects_bad_values() {
        assert!(validate_run(0.0, 10, 1e-10).is_err());
        assert!(validate_run(1.0, 1, 1e-10).is_err());
        assert!(validate_run(1.0, 10, 0.0).is_err());
        assert!(validate_run(1.0, 2, 1e-8).is_ok());
    }
}
