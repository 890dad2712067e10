//! Command line front end for the `uniformize` library.
//!
//! Subcommands cover the full workflow on a weighted map file: `validate`
//! checks the weight function, `init` produces a coherent angle system,
//! `solve` maximizes the volume functional, `volume` evaluates both volume
//! formulas on a solution, `render` draws the disk configuration as SVG, and
//! `pipeline` chains every stage and prints a JSON summary.
//!
//! Exit codes: 0 on success, 2 when the input is infeasible or invalid (a
//! certificate is printed when one exists), 1 on internal errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use uniformize::angles::{
    self, constrained_basis, full_mode_basis, is_member, stereographic_subspace, AngleSystem, Mode,
};
use uniformize::flow::{initial_angle_system, CutCertificate, FlowError, FlowNode};
use uniformize::geom::{self, Chart, RenderOptions};
use uniformize::io::{self, AngleUnit, PipelineSummary, Solution};
use uniformize::map::{validate_weights, Verdict, WeightedMap};
use uniformize::solver::{maximize, SolveError, SolveOptions};

/// Computes weighted circle patterns on compact surfaces.
#[derive(Parser)]
#[command(name = "uniformize", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a weighted map admits a coherent angle system.
    Validate {
        /// Weighted map file (JSON).
        map: PathBuf,
        /// Interpret angles in the file as degrees.
        #[arg(long)]
        degrees: bool,
    },
    /// Produce a coherent angle system by the flow construction.
    Init {
        /// Weighted map file (JSON).
        map: PathBuf,
        /// Stereographic face index; required when the map is a sphere.
        #[arg(long)]
        face: Option<usize>,
        /// Output angle file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Interpret angles in the file as degrees.
        #[arg(long)]
        degrees: bool,
    },
    /// Maximize the volume functional and write the critical angle system.
    Solve {
        /// Weighted map file (JSON).
        map: PathBuf,
        /// Stereographic face index; required when the map is a sphere.
        #[arg(long)]
        face: Option<usize>,
        /// Gradient norm tolerance.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Iteration budget.
        #[arg(long = "max-iter", default_value_t = 200)]
        max_iter: usize,
        /// Perturb the initial system by this amount along the tangent
        /// space, seeded by the UNIFORMIZE_SEED environment variable.
        #[arg(long, default_value_t = 0.0)]
        perturb: f64,
        /// Output solution file.
        #[arg(short, long)]
        output: PathBuf,
        /// Interpret angles in the file as degrees.
        #[arg(long)]
        degrees: bool,
    },
    /// Print both volume formulas and their difference for a solution.
    Volume {
        /// Solution file (JSON).
        solution: PathBuf,
        /// Weighted map file the solution refers to.
        #[arg(long)]
        map: PathBuf,
        /// Interpret angles in both files as degrees.
        #[arg(long)]
        degrees: bool,
    },
    /// Draw the disk configuration of a solution as SVG.
    Render {
        /// Solution file (JSON).
        solution: PathBuf,
        /// Weighted map file the solution refers to.
        #[arg(long)]
        map: PathBuf,
        /// Output SVG file.
        #[arg(short, long)]
        output: PathBuf,
        /// Expected chart; fails when the solution lives in another one.
        #[arg(long)]
        chart: Option<ChartArg>,
        /// Overlay to draw on top of the disks.
        #[arg(long, value_enum)]
        overlay: Option<OverlayArg>,
        /// Rings of lattice translates to draw around a torus pattern.
        #[arg(long, default_value_t = 0)]
        copies: u32,
        /// Interpret angles in both files as degrees.
        #[arg(long)]
        degrees: bool,
    },
    /// Validate, initialize, solve, lay out and check in one run.
    Pipeline {
        /// Weighted map file (JSON).
        map: PathBuf,
        /// Stereographic face index; face 0 is used on spheres by default.
        #[arg(long)]
        face: Option<usize>,
        /// Interpret angles in the file as degrees.
        #[arg(long)]
        degrees: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ChartArg {
    Poincare,
    Plane,
    Stereo,
}

impl ChartArg {
    fn chart(self) -> Chart {
        match self {
            ChartArg::Poincare => Chart::Poincare,
            ChartArg::Plane => Chart::Plane,
            ChartArg::Stereo => Chart::Stereographic,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OverlayArg {
    Quads,
}

/// A failed run: the exit code distinguishes bad input (2) from bugs and
/// resource exhaustion (1).
enum Failure {
    /// The input file is malformed, infeasible or inconsistent.
    Input(String),
    /// The command line is wrong in a way clap cannot see.
    Usage(String),
    /// Anything that should not happen on well-formed input.
    Internal(String),
}

impl Failure {
    fn report(self) -> ExitCode {
        match self {
            Failure::Input(message) => {
                eprintln!("error: {message}");
                ExitCode::from(2)
            }
            Failure::Usage(message) => {
                eprintln!("error: {message}");
                eprintln!();
                eprintln!("Usage: uniformize <COMMAND> [OPTIONS]");
                eprintln!("Try 'uniformize --help' for details.");
                ExitCode::from(2)
            }
            Failure::Internal(message) => {
                eprintln!("error: {message}");
                ExitCode::from(1)
            }
        }
    }
}

impl From<io::IoError> for Failure {
    fn from(error: io::IoError) -> Self {
        Failure::Input(error.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => failure.report(),
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Validate { map, degrees } => {
            let weighted = load_map(&map, degrees)?;
            cmd_validate(&weighted)
        }
        Command::Init {
            map,
            face,
            output,
            degrees,
        } => {
            let weighted = load_map(&map, degrees)?;
            cmd_init(&weighted, face, output.as_deref())
        }
        Command::Solve {
            map,
            face,
            tol,
            max_iter,
            perturb,
            output,
            degrees,
        } => {
            let weighted = load_map(&map, degrees)?;
            cmd_solve(&weighted, face, tol, max_iter, perturb, &output)
        }
        Command::Volume {
            solution,
            map,
            degrees,
        } => {
            let weighted = load_map(&map, degrees)?;
            let solution = load_solution(&solution, &weighted, degrees)?;
            cmd_volume(&weighted, &solution)
        }
        Command::Render {
            solution,
            map,
            output,
            chart,
            overlay,
            copies,
            degrees,
        } => {
            let weighted = load_map(&map, degrees)?;
            let solution = load_solution(&solution, &weighted, degrees)?;
            cmd_render(&weighted, &solution, &output, chart, overlay, copies)
        }
        Command::Pipeline { map, face, degrees } => {
            let weighted = load_map(&map, degrees)?;
            cmd_pipeline(&weighted, face)
        }
    }
}

fn angle_unit(degrees: bool) -> AngleUnit {
    if degrees {
        AngleUnit::Degrees
    } else {
        AngleUnit::Radians
    }
}

/// Reads a weighted map, converting edge weights from degrees on request.
fn load_map(path: &Path, degrees: bool) -> Result<WeightedMap, Failure> {
    io::read_map_as(path, angle_unit(degrees))
        .map_err(|error| Failure::Input(format!("{}: {error}", path.display())))
}

/// Reads a solution file against its map, converting angles from degrees on
/// request.
fn load_solution(path: &Path, weighted: &WeightedMap, degrees: bool) -> Result<Solution, Failure> {
    io::read_solution_as(path, weighted, angle_unit(degrees))
        .map_err(|error| Failure::Input(format!("{}: {error}", path.display())))
}

/// Picks the maximization mode from the surface and the `--face` flag.
fn resolve_mode(weighted: &WeightedMap, face: Option<usize>) -> Result<Mode, Failure> {
    let chi = weighted.map().euler_characteristic();
    match face {
        Some(face) if chi == 2 => {
            if face >= weighted.map().face_count() {
                return Err(Failure::Input(format!(
                    "face {face} is out of range for a map with {} faces",
                    weighted.map().face_count()
                )));
            }
            Ok(Mode::Stereographic(face))
        }
        Some(_) => Err(Failure::Usage(format!(
            "--face applies only to sphere maps; this map has Euler characteristic {chi}"
        ))),
        None if chi == 2 => Err(Failure::Usage(
            "sphere maps require --face <FACE> to fix a stereographic face".to_string(),
        )),
        None => Ok(Mode::Full),
    }
}

fn print_cut_certificate(certificate: &CutCertificate) {
    println!(
        "violated cut: demanded flow {:.9} exceeds capacity {:.9} (excess {:.3e})",
        certificate.lower_sum,
        certificate.upper_sum,
        certificate.excess()
    );
    let mut names: Vec<String> = certificate
        .node_set
        .iter()
        .map(|node| match node {
            FlowNode::Vertex(v) => format!("vertex {v}"),
            FlowNode::Edge(e) => format!("edge {e}"),
            FlowNode::Omega => "omega".to_string(),
        })
        .collect();
    names.sort();
    println!("cut side: {}", names.join(", "));
}

fn cmd_validate(weighted: &WeightedMap) -> Result<(), Failure> {
    let bound = weighted.map().vertex_count().max(8);
    let report = validate_weights(weighted, bound);
    let worst_face = report
        .face_equalities
        .iter()
        .fold(0.0f64, |acc, r| acc.max(r.abs()));
    println!("face equality residual: {worst_face:.3e}");
    for violated in &report.violated_loops {
        println!(
            "violated loop through vertices {:?}: edge weight sum {:.9} <= 2*pi",
            violated.vertices, violated.excess_sum
        );
    }
    if let Some(certificate) = &report.flow_certificate {
        print_cut_certificate(certificate);
    }
    match report.verdict {
        Verdict::Valid => {
            println!("verdict: valid");
            Ok(())
        }
        Verdict::Invalid => {
            println!("verdict: invalid");
            Err(Failure::Input(
                "the weight function admits no coherent angle system".to_string(),
            ))
        }
        Verdict::Undecided => {
            println!("verdict: undecided");
            Err(Failure::Input(
                "the decisive checks were inconclusive within the search bound".to_string(),
            ))
        }
    }
}

fn cmd_init(
    weighted: &WeightedMap,
    face: Option<usize>,
    output: Option<&Path>,
) -> Result<(), Failure> {
    let mode = resolve_mode(weighted, face)?;
    let system = build_initial(weighted, mode)?;
    match output {
        Some(path) => {
            io::write_angles(path, &system)
                .map_err(|error| Failure::Internal(format!("{}: {error}", path.display())))?;
            println!("wrote coherent angle system to {}", path.display());
        }
        None => print!("{}", io::angles_to_json(&system)),
    }
    Ok(())
}

fn build_initial(weighted: &WeightedMap, mode: Mode) -> Result<AngleSystem, Failure> {
    initial_angle_system(weighted, mode).map_err(|error| match error {
        FlowError::Infeasible(certificate) => {
            print_cut_certificate(&certificate);
            Failure::Input("no coherent angle system exists for this weight function".to_string())
        }
        FlowError::Angle(inner) => Failure::Input(inner.to_string()),
        FlowError::BadSigns { .. } => Failure::Internal(error.to_string()),
    })
}

/// Moves a member a seeded random amount along the tangent space, halving
/// the amplitude until the result is again a member.
fn perturbed_start(
    weighted: &WeightedMap,
    base: &AngleSystem,
    scale: f64,
    seed: u64,
) -> Result<AngleSystem, Failure> {
    let basis = match base.mode {
        Mode::Stereographic(face) => {
            let sub = stereographic_subspace(weighted, face)
                .map_err(|error| Failure::Input(error.to_string()))?;
            constrained_basis(weighted, Some(&sub))
        }
        Mode::Full => {
            if weighted.map().euler_characteristic() == 0 {
                constrained_basis(weighted, None)
            } else {
                full_mode_basis(weighted)
            }
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coefficients: Vec<f64> = basis
        .vectors
        .iter()
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let mut amplitude = scale;
    while amplitude > 1e-12 {
        let mut candidate = base.clone();
        for (vector, coefficient) in basis.vectors.iter().zip(&coefficients) {
            for &(dart, component) in vector {
                candidate.psi[dart] += amplitude * coefficient * component;
            }
        }
        if is_member(weighted, &candidate).is_member {
            return Ok(candidate);
        }
        amplitude *= 0.5;
    }
    Ok(base.clone())
}

fn cmd_solve(
    weighted: &WeightedMap,
    face: Option<usize>,
    tol: f64,
    max_iter: usize,
    perturb: f64,
    output: &Path,
) -> Result<(), Failure> {
    let mode = resolve_mode(weighted, face)?;
    let mut start = build_initial(weighted, mode)?;
    if perturb > 0.0 {
        let seed = std::env::var("UNIFORMIZE_SEED")
            .ok()
            .and_then(|raw| raw.parse().ok())
            .unwrap_or(0);
        start = perturbed_start(weighted, &start, perturb, seed)?;
    }
    let options = SolveOptions {
        grad_tol: tol,
        max_iter,
        ..SolveOptions::default()
    };
    let report = maximize(weighted, &start, &options).map_err(|error| match error {
        SolveError::NotInterior { .. } | SolveError::SphereFullMode => {
            Failure::Input(error.to_string())
        }
        SolveError::MaxIterExceeded { .. } => Failure::Internal(error.to_string()),
        SolveError::Angle(inner) => Failure::Internal(inner.to_string()),
    })?;
    let solution = Solution {
        system: report.system,
        grad_norm: report.grad_norm,
        iterations: report.iterations,
    };
    io::write_solution(output, &solution)
        .map_err(|error| Failure::Internal(format!("{}: {error}", output.display())))?;
    println!(
        "converged in {} iterations: value {:.12}, gradient norm {:.3e}",
        solution.iterations, report.value, solution.grad_norm
    );
    println!("wrote solution to {}", output.display());
    Ok(())
}

fn cmd_volume(weighted: &WeightedMap, solution: &Solution) -> Result<(), Failure> {
    let functional = geom::volume_functional(weighted, &solution.system)
        .map_err(|error| Failure::Input(error.to_string()))?;
    let orthoschemes = geom::volume_orthoschemes(weighted, &solution.system);
    println!("volume (functional form): {functional:.12}");
    println!("volume (orthoscheme sum): {orthoschemes:.12}");
    println!("difference: {:.3e}", (functional - orthoschemes).abs());
    Ok(())
}

fn cmd_render(
    weighted: &WeightedMap,
    solution: &Solution,
    output: &Path,
    chart: Option<ChartArg>,
    overlay: Option<OverlayArg>,
    copies: u32,
) -> Result<(), Failure> {
    let config =
        geom::layout(weighted, &solution.system).map_err(|error| Failure::Input(error.to_string()))?;
    if let Some(requested) = chart {
        if requested.chart() != config.chart {
            return Err(Failure::Input(format!(
                "the solution lives in the {:?} chart, not {:?}",
                config.chart,
                requested.chart()
            )));
        }
    }
    let options = RenderOptions {
        overlay_quads: overlay == Some(OverlayArg::Quads),
        copies,
        ..RenderOptions::default()
    };
    geom::write_svg(&config, output, &options)
        .map_err(|error| Failure::Internal(format!("{}: {error}", output.display())))?;
    println!("wrote {}", output.display());
    Ok(())
}

fn cmd_pipeline(weighted: &WeightedMap, face: Option<usize>) -> Result<(), Failure> {
    let bound = weighted.map().vertex_count().max(8);
    let report = validate_weights(weighted, bound);
    if report.verdict == Verdict::Invalid {
        for violated in &report.violated_loops {
            println!(
                "violated loop through vertices {:?}: edge weight sum {:.9} <= 2*pi",
                violated.vertices, violated.excess_sum
            );
        }
        if let Some(certificate) = &report.flow_certificate {
            print_cut_certificate(certificate);
        }
        return Err(Failure::Input(
            "the weight function admits no coherent angle system".to_string(),
        ));
    }
    let chi = weighted.map().euler_characteristic();
    let face = match face {
        None if chi == 2 => Some(0),
        other => other,
    };
    let mode = resolve_mode(weighted, face)?;
    let start = build_initial(weighted, mode)?;
    let options = SolveOptions::default();
    let report = maximize(weighted, &start, &options).map_err(|error| match error {
        SolveError::NotInterior { .. } | SolveError::SphereFullMode => {
            Failure::Input(error.to_string())
        }
        other => Failure::Internal(other.to_string()),
    })?;
    let config = geom::layout(weighted, &report.system)
        .map_err(|error| Failure::Internal(error.to_string()))?;
    let residuals = geom::check_configuration(&config, weighted);
    let functional = angles::functional_value(weighted, &report.system)
        .map_err(|error| Failure::Internal(error.to_string()))?;
    let summary = PipelineSummary {
        chi,
        functional,
        volume_ortho: geom::volume_orthoschemes(weighted, &report.system),
        grad_norm: report.grad_norm,
        max_residual: residuals
            .max_angle_residual
            .max(residuals.max_concurrency_residual),
    };
    print!("{}", io::summary_to_json(&summary));
    Ok(())
}
