use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use sodalite::deform::central::{central_degeneracy_threshold, sample_central};
use sodalite::deform::dihedral::{build_centro_d3_ring, trace_tilt_curve};
use sodalite::framework::{generate_patch, ideal_sodalite, validate_placement, PeriodicPlacement, ValidationReport};
use sodalite::geom::voronoi_cell;
use sodalite::io::{export_cell_obj, export_obj, read_placement, tilt_csv, write_placement};
use sodalite::rigidity::{finite_linkage_dof, flex_dimension, FlexReport, LinkageReport};
use sodalite::Result;

/// Sodalite periodic framework: ideal placement, deformations and rigidity.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Exit with status 0 even when a placement fails validation.
    #[arg(long, global = true)]
    allow_invalid: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the ideal placement.
    Ideal {
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate a placement document.
    Validate {
        placement: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Random members of the centrally-symmetric component.
    SampleCentral {
        #[arg(short = 'n')]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Trace the D3 tilt curve from the ideal placement.
    Tilt {
        #[arg(long, default_value_t = 0.005)]
        step: f64,
        #[arg(long, default_value_t = 400)]
        max_steps: usize,
        #[arg(long, allow_negative_numbers = true, value_parser = parse_direction)]
        direction: i8,
        #[arg(long)]
        csv: PathBuf,
        /// Also write the ring of every k-th point as OBJ next to the CSV.
        #[arg(long)]
        obj_every: Option<usize>,
    },
    /// Ring with both D3 and central symmetry at hexagon size rho.
    CentroD3 {
        #[arg(long, allow_negative_numbers = true)]
        rho: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Infinitesimal flexes of a placement and the finite count of its ring.
    Rigidity {
        placement: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        report: PathBuf,
    },
    /// Voronoi cell of the ideal period lattice.
    Kelvin {
        #[arg(long)]
        obj: PathBuf,
    },
    /// Tetrahedra of a placement and its lattice translates as OBJ.
    Export {
        placement: PathBuf,
        #[arg(long, default_value_t = 0)]
        shells: u32,
        #[arg(long)]
        obj: PathBuf,
    },
}

fn parse_direction(s: &str) -> std::result::Result<i8, String> {
    match s.parse::<i8>() {
        Ok(d @ (1 | -1)) => Ok(d),
        _ => Err(format!("direction must be +1 or -1, got {s:?}")),
    }
}

/// Prints the report and tells whether the command may succeed.
fn check(what: &str, report: &ValidationReport, allow_invalid: bool) -> bool {
    if report.passed() {
        println!("{what}: valid at tol {:e}", report.tol);
        return true;
    }
    eprintln!("{what}: validation failed at tol {:e}\n{report}", report.tol);
    allow_invalid
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

#[derive(Serialize)]
struct RigidityReport {
    flex: FlexReport,
    finite_linkage: LinkageReport,
}

fn run(cli: Cli) -> Result<bool> {
    let allow = cli.allow_invalid;
    match cli.command {
        Command::Ideal { out } => {
            let p = ideal_sodalite();
            write_placement(&out, &p)?;
            Ok(check("ideal", &validate_placement(&p, 1e-9), allow))
        }
        Command::Validate { placement, tol } => {
            let p = read_placement(&placement)?;
            let report = validate_placement(&p, tol);
            print!("{report}");
            Ok(check(&placement.display().to_string(), &report, allow))
        }
        Command::SampleCentral { n, seed, out_dir } => {
            std::fs::create_dir_all(&out_dir)?;
            let samples = sample_central(n, seed);
            let mut invalid = 0usize;
            let mut degenerate = 0usize;
            let mut min_det = f64::INFINITY;
            for (i, p) in samples.iter().enumerate() {
                write_placement(&out_dir.join(format!("sample_{i:05}.json")), p)?;
                min_det = min_det.min(p.lattice.det().abs());
                if p.degenerate {
                    degenerate += 1;
                    continue;
                }
                let report = validate_placement(p, 1e-9);
                if !report.passed() {
                    invalid += 1;
                    check(&format!("sample {i}"), &report, allow);
                }
            }
            println!(
                "samples: {n}, invalid: {invalid}, degenerate: {degenerate} (|det| < {:e}), min |det|: {min_det:e}",
                central_degeneracy_threshold()
            );
            Ok(invalid == 0 || allow)
        }
        Command::Tilt { step, max_steps, direction, csv, obj_every } => {
            if !(step > 0.0) {
                return Err(sodalite::Error::Infeasible(format!("step must be positive, got {step}")));
            }
            let trace = trace_tilt_curve(step, max_steps, direction);
            write(&csv, &tilt_csv(&trace.points)?)?;
            if let Some(k) = obj_every.filter(|&k| k > 0) {
                let stem = csv.with_extension("");
                for (i, pt) in trace.points.iter().enumerate().step_by(k) {
                    let path = PathBuf::from(format!("{}_{i:05}.obj", stem.display()));
                    write(&path, &export_obj(&pt.placement.ring.tetra, 1e-9))?;
                }
            }
            println!(
                "points: {}, stop: {:?}, max displacement per step: {:.6}",
                trace.points.len(),
                trace.stop,
                trace.max_displacement_ratio
            );
            if let Some(last) = trace.points.last() {
                println!(
                    "last: rho {:.6} volume {:.9} central residual {:.3e} tetrahedrite {}",
                    last.rho, last.lattice_volume, last.central_residual, last.tetrahedrite
                );
            }
            // every returned point was validated at 1e-8 by the tracer
            Ok(true)
        }
        Command::CentroD3 { rho, out } => {
            let c = build_centro_d3_ring(rho)?;
            write_placement(&out, &c.placement)?;
            println!("rho {rho}: phi {:.17e}", c.phi);
            Ok(check("centro-d3", &validate_placement(&c.placement, 1e-9), allow))
        }
        Command::Rigidity { placement, tol, report } => {
            let p = read_placement(&placement)?;
            let valid = check(&placement.display().to_string(), &validate_placement(&p, 1e-9), allow);
            let flex = flex_dimension(&p, tol)?;
            let finite_linkage = finite_linkage_dof(&p.ring);
            println!(
                "variables {} constraints {} kernel {} nontrivial flexes {} gap {:.3e}",
                flex.variables, flex.constraints, flex.kernel_dimension, flex.nontrivial_dimension, flex.gap_ratio
            );
            println!("finite linkage: {} degrees of freedom", finite_linkage.dof);
            let text = serde_json::to_string_pretty(&RigidityReport { flex, finite_linkage }).expect("serializable");
            write(&report, &(text + "\n"))?;
            Ok(valid)
        }
        Command::Kelvin { obj } => {
            let cell = voronoi_cell(&ideal_sodalite().lattice)?;
            let hist = cell.face_size_histogram();
            let lengths = cell.edge_lengths();
            let (lo, hi) = lengths.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &l| (a.min(l), b.max(l)));
            println!(
                "vertices {} edges {} faces {:?} edge length {lo:.12}..{hi:.12}",
                cell.vertices.len(),
                lengths.len(),
                hist
            );
            write(&obj, &export_cell_obj(&cell))?;
            Ok(true)
        }
        Command::Export { placement, shells, obj } => {
            let p: PeriodicPlacement = read_placement(&placement)?;
            let valid = check(&placement.display().to_string(), &validate_placement(&p, 1e-9), allow);
            let tetra = generate_patch(&p, shells);
            write(&obj, &export_obj(&tetra, 1e-9))?;
            println!("tetrahedra: {}", tetra.len());
            Ok(valid)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
