//! `wulffkit`: surface energies, Wulff crystals and ground-state experiments
//! for sticky-disk lattices.
//!
//! Exit codes: 0 on success, 1 on a domain error or failed validation, 2 on a
//! usage error. Results go to stdout (or `--output`), progress to stderr.

mod output;
mod validate;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use wulffkit::convex::mesh::{to_obj, to_off};
use wulffkit::convex::Polytope;
use wulffkit::crystallize::{median, scaling_runs, shape_deviation, AnnealSchedule};
use wulffkit::discrete::{bond_count, energy, excess_energy, Configuration};
use wulffkit::geometry::{icosphere, Vec3};
use wulffkit::lattice::{lattice_by_name, LatticeSpec, Region, SiteId};
use wulffkit::surface_density::mincut::window_mincut;
use wulffkit::surface_density::{
    density_from_lattice, phi_cell_formula, phi_fcc, phi_hcp, polar_fcc, polar_hcp, BondCharging,
    CellFormulaProblem, MincutOptions, PolarFunction,
};
use wulffkit::voronoi::voronoi_cell;
use wulffkit::wulff::{compare_lattices, wulff_report};

use output::{cell, csv, emit, emit_json, Result};

#[derive(Parser)]
#[command(
    name = "wulffkit",
    version,
    about = "Surface energies, Wulff crystals and discrete ground states of FCC/HCP sticky-disk lattices"
)]
#[command(after_help = "Set WULFFKIT_THREADS to cap the number of worker threads.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the surface energy density phi(nu)
    Phi(PhiArgs),
    /// Voronoi cell of a lattice site
    Voronoi(VoronoiArgs),
    /// Wulff crystal report and mesh export
    Wulff(WulffArgs),
    /// Compare the FCC and HCP isoperimetric quotients
    Compare(OutputArg),
    /// Energy of a configuration file
    Energy(EnergyArgs),
    /// Anneal N atoms from the ball-cut seed
    Anneal(AnnealArgs),
    /// Median excess energy and shape deviation over several N
    Scaling(ScalingArgs),
    /// Run the cross-validation suite
    Validate(ValidateArgs),
}

fn parse_lattice(s: &str) -> std::result::Result<String, String> {
    match s {
        "fcc" | "hcp" | "cubic" => Ok(s.to_string()),
        _ => match s.strip_prefix("file:") {
            Some(p) if !p.is_empty() => Ok(s.to_string()),
            _ => Err(format!("expected fcc, hcp, cubic or file:PATH, got '{s}'")),
        },
    }
}

fn parse_vec3(s: &str) -> std::result::Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z, got '{s}'"));
    }
    let mut v = [0.0; 3];
    for (k, p) in parts.iter().enumerate() {
        v[k] = p
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("'{p}' is not a finite number"))?;
    }
    Ok(v)
}

fn parse_grid(s: &str) -> std::result::Result<usize, String> {
    s.strip_prefix("icosphere:")
        .and_then(|k| k.parse::<usize>().ok())
        .filter(|&k| k <= 7)
        .ok_or_else(|| format!("expected icosphere:K with 0 <= K <= 7, got '{s}'"))
}

fn parse_positive(s: &str) -> std::result::Result<f64, String> {
    s.parse::<f64>()
        .ok()
        .filter(|x| *x > 0.0 && x.is_finite())
        .ok_or_else(|| format!("expected a positive number, got '{s}'"))
}

#[derive(Args)]
struct OutputArg {
    /// Write the result here instead of stdout
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Closed,
    Cell,
    Mincut,
}

#[derive(Clone, Copy, ValueEnum)]
enum Charging {
    AnyEndpoint,
    OccupiedEndpoint,
    HalfPerEndpoint,
}

impl From<Charging> for BondCharging {
    fn from(c: Charging) -> Self {
        match c {
            Charging::AnyEndpoint => BondCharging::AnyEndpoint,
            Charging::OccupiedEndpoint => BondCharging::OccupiedEndpoint,
            Charging::HalfPerEndpoint => BondCharging::HalfPerEndpoint,
        }
    }
}

#[derive(Args)]
#[command(args_conflicts_with_subcommands = true, subcommand_negates_reqs = true)]
struct PhiArgs {
    #[command(subcommand)]
    sweep: Option<PhiCommand>,
    /// fcc, hcp, cubic or file:PATH
    #[arg(long, default_value = "fcc", value_parser = parse_lattice)]
    lattice: String,
    /// Direction x,y,z (need not be normalised)
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true, required = true)]
    nu: Option<[f64; 3]>,
    #[arg(long, value_enum, default_value = "closed")]
    method: Method,
    /// Window side for the min-cut method (at least 10)
    #[arg(long = "T", default_value_t = 20.0, value_parser = parse_positive)]
    t: f64,
    /// Width of the fixed boundary layer for the min-cut method
    #[arg(long, default_value_t = 3.0, value_parser = parse_positive)]
    layer: f64,
    /// How bonds crossing the window boundary are charged
    #[arg(long, value_enum, default_value = "any-endpoint")]
    charging: Charging,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Subcommand)]
enum PhiCommand {
    /// CSV of (nu, phi, phi polar) over a direction grid
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value = "fcc", value_parser = parse_lattice)]
    lattice: String,
    /// Direction grid, icosphere:K (10 * 4^K + 2 directions)
    #[arg(long, default_value = "icosphere:2", value_parser = parse_grid)]
    grid: usize,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeshFormat {
    Off,
    Obj,
    Json,
}

#[derive(Args)]
struct VoronoiArgs {
    #[arg(long, default_value = "fcc", value_parser = parse_lattice)]
    lattice: String,
    /// Sublattice of the site at cell (0, 0, 0)
    #[arg(long, default_value_t = 0)]
    sub: usize,
    /// Write the cell as a mesh: FORMAT (off, obj or json) and PATH
    #[arg(long, num_args = 2, value_names = ["FORMAT", "PATH"])]
    export: Option<Vec<String>>,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Args)]
struct WulffArgs {
    #[arg(long, default_value = "fcc", value_parser = parse_lattice)]
    lattice: String,
    /// Write the body as a mesh: FORMAT (off, obj or json) and PATH
    #[arg(long, num_args = 2, value_names = ["FORMAT", "PATH"])]
    export: Option<Vec<String>>,
    /// Write the JSON report: [json] PATH, with `-` for stdout (default)
    #[arg(long, num_args = 1..=2, value_names = ["FORMAT", "PATH"])]
    report: Option<Vec<String>>,
}

#[derive(Args)]
struct EnergyArgs {
    /// Configuration file with lines `cx cy cz sub`
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    #[arg(long, default_value = "fcc", value_parser = parse_lattice)]
    lattice: String,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Args, Clone, Copy)]
struct ScheduleArgs {
    /// Initial temperature
    #[arg(long = "T0", default_value_t = AnnealSchedule::default().initial_temperature, value_parser = parse_positive)]
    t0: f64,
    /// Temperature factor per sweep, in (0, 1)
    #[arg(long, default_value_t = AnnealSchedule::default().cooling)]
    cooling: f64,
    #[arg(long, default_value_t = AnnealSchedule::default().sweeps)]
    sweeps: usize,
    /// Moves per sweep; 0 picks a multiple of N
    #[arg(long, default_value_t = 0)]
    moves: usize,
    /// Seed of the first run; run k uses seed + k
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ScheduleArgs {
    fn schedule(&self) -> AnnealSchedule {
        AnnealSchedule {
            initial_temperature: self.t0,
            cooling: self.cooling,
            sweeps: self.sweeps,
            moves_per_sweep: self.moves,
            seed: self.seed,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct AnnealArgs {
    #[arg(long, default_value = "fcc", value_parser = parse_lattice)]
    lattice: String,
    /// Number of atoms
    #[arg(long = "N", value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    seeds: u64,
    #[command(flatten)]
    schedule: ScheduleArgs,
    #[arg(long, value_enum, default_value = "json")]
    out: TableFormat,
    /// Write the result here instead of stdout
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Save the best configuration found
    #[arg(long, value_name = "PATH")]
    save_config: Option<PathBuf>,
}

#[derive(Args)]
struct ScalingArgs {
    #[arg(long, default_value = "fcc", value_parser = parse_lattice)]
    lattice: String,
    /// Comma-separated sizes
    #[arg(
        long = "Ns",
        value_delimiter = ',',
        default_value = "500,1000,2000,4000"
    )]
    ns: Vec<usize>,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    seeds: u64,
    #[command(flatten)]
    schedule: ScheduleArgs,
    /// Skip the shape deviation of each run
    #[arg(long)]
    no_shape: bool,
    #[arg(long, value_enum, default_value = "json")]
    out: TableFormat,
    /// Write the result here instead of stdout
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Window side of the min-cut checks
    #[arg(long = "T", default_value_t = 10.0, value_parser = parse_positive)]
    t: f64,
    /// Random directions for the exact-route checks
    #[arg(long, default_value_t = 200)]
    directions: usize,
    /// Extra lattice to validate (fcc, hcp, cubic or file:PATH)
    #[arg(long, value_parser = parse_lattice)]
    lattice: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutputArg,
}

type DirectionFn = Box<dyn Fn(&Vec3) -> f64 + Sync>;

fn load_lattice(sel: &str) -> Result<Arc<LatticeSpec>> {
    Ok(Arc::new(lattice_by_name(sel)?))
}

fn closed_phi(sel: &str, spec: &LatticeSpec) -> Result<DirectionFn> {
    Ok(match sel {
        "fcc" => Box::new(phi_fcc),
        "hcp" => Box::new(phi_hcp),
        _ => {
            let d = density_from_lattice(spec)?;
            Box::new(move |nu: &Vec3| d.eval(nu))
        }
    })
}

fn cmd_phi(args: &PhiArgs) -> Result<()> {
    if let Some(PhiCommand::Sweep(s)) = &args.sweep {
        return cmd_sweep(s);
    }
    let nu_arr = args.nu.expect("required by clap");
    let nu = Vec3::from(nu_arr);
    let spec = load_lattice(&args.lattice)?;
    let (method, value) = match args.method {
        Method::Closed => ("closed", closed_phi(&args.lattice, &spec)?(&nu)),
        Method::Cell => {
            let p = CellFormulaProblem {
                lattice: &spec,
                direction: nu,
            };
            ("cell", phi_cell_formula(&p)?)
        }
        Method::Mincut => {
            let opts = MincutOptions {
                t: args.t,
                layer: args.layer,
                charging: args.charging.into(),
            };
            eprintln!("phi: min-cut window T = {}", args.t);
            let r = window_mincut(&spec, &nu, &opts)?;
            // the window value is for the unit direction; phi is 1-homogeneous
            ("mincut", r.value * nu.norm())
        }
    };
    emit_json(
        &json!({ "nu": nu_arr, "method": method, "value": value }),
        args.out.output.as_deref(),
    )
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let spec = load_lattice(&args.lattice)?;
    let phi = closed_phi(&args.lattice, &spec)?;
    let polar: DirectionFn = match args.lattice.as_str() {
        "fcc" => Box::new(polar_fcc),
        "hcp" => Box::new(polar_hcp),
        _ => {
            let p = PolarFunction::new(&density_from_lattice(&spec)?)?;
            Box::new(move |z: &Vec3| p.eval(z))
        }
    };
    let dirs = icosphere(args.grid);
    eprintln!("sweep: {} directions", dirs.len());
    let rows: Vec<Vec<String>> = dirs
        .par_iter()
        .map(|nu| {
            vec![
                cell(nu.x),
                cell(nu.y),
                cell(nu.z),
                cell(phi(nu)),
                cell(polar(nu)),
            ]
        })
        .collect();
    emit(
        &csv(&["nu_x", "nu_y", "nu_z", "phi", "phi_polar"], &rows),
        args.out.output.as_deref(),
    )
}

fn parse_mesh_format(s: &str) -> Result<MeshFormat> {
    MeshFormat::from_str(s, true)
        .map_err(|_| format!("unknown mesh format '{s}' (off, obj, json)").into())
}

fn export_mesh(p: &Polytope, spec: &[String]) -> Result<()> {
    let format = parse_mesh_format(&spec[0])?;
    let path = Path::new(&spec[1]);
    let text = match format {
        MeshFormat::Off => to_off(p),
        MeshFormat::Obj => to_obj(p),
        MeshFormat::Json => output::to_json(&p.to_dump())?,
    };
    emit(&text, Some(path))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn cmd_voronoi(args: &VoronoiArgs) -> Result<()> {
    let spec = load_lattice(&args.lattice)?;
    let id = SiteId::new([0, 0, 0], args.sub);
    let c = voronoi_cell(&spec, &id)?;
    if let Some(e) = &args.export {
        export_mesh(&c.polytope, e)?;
    }
    let faces: Vec<_> = c
        .faces
        .iter()
        .map(|f| {
            let facet = &c.polytope.facets()[f.facet];
            let corners: Vec<[f64; 3]> = c
                .polytope
                .facet_points(facet)
                .iter()
                .map(|v| [v.x, v.y, v.z])
                .collect();
            json!({
                "neighbor": f.neighbor,
                "displacement": [f.displacement.x, f.displacement.y, f.displacement.z],
                "area": f.area,
                "corners": corners,
            })
        })
        .collect();
    emit_json(
        &json!({
            "lattice": args.lattice,
            "site": id,
            "volume": c.volume(),
            "surface_area": c.surface_area(),
            "faces": faces,
        }),
        args.out.output.as_deref(),
    )
}

fn cmd_wulff(args: &WulffArgs) -> Result<()> {
    eprintln!("wulff: building the crystal for {}", args.lattice);
    let report = wulff_report(&args.lattice)?;
    if let Some(e) = &args.export {
        export_mesh(&report.body, e)?;
    }
    let dest = match args.report.as_deref() {
        None => None,
        Some([path]) => Some(path.clone()),
        Some([fmt, path]) => {
            if !fmt.eq_ignore_ascii_case("json") {
                return Err(format!("unknown report format '{fmt}' (json)").into());
            }
            Some(path.clone())
        }
        Some(_) => unreachable!("clap limits --report to two values"),
    };
    if args.export.is_none() || dest.is_some() {
        emit_json(&report.dump(), dest.as_deref().map(Path::new))?;
    }
    Ok(())
}

fn cmd_energy(args: &EnergyArgs) -> Result<()> {
    let spec = load_lattice(&args.lattice)?;
    let x = Configuration::from_file(&args.config, spec, 1.0)?;
    emit_json(
        &json!({
            "N": x.len(),
            "energy": energy(&x, &Region::All),
            "bonds": bond_count(&x),
            "excess": excess_energy(&x)?,
        }),
        args.out.output.as_deref(),
    )
}

#[derive(Serialize)]
struct RunRecord {
    n: usize,
    seed: u64,
    energy: f64,
    excess: f64,
    initial_energy: f64,
    accepted: u64,
    proposed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    symdiff: Option<f64>,
}

fn run_csv(records: &[RunRecord]) -> String {
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.seed.to_string(),
                cell(r.energy),
                cell(r.excess),
                cell(r.initial_energy),
                r.accepted.to_string(),
                r.proposed.to_string(),
                r.symdiff.map(cell).unwrap_or_default(),
            ]
        })
        .collect();
    csv(
        &[
            "N",
            "seed",
            "energy",
            "excess",
            "initial_energy",
            "accepted",
            "proposed",
            "symdiff",
        ],
        &rows,
    )
}

fn anneal_records(
    lattice: &str,
    spec: &Arc<LatticeSpec>,
    n: usize,
    sched: &AnnealSchedule,
    seeds: usize,
    shape: bool,
) -> Result<(Vec<RunRecord>, Vec<Configuration>)> {
    let runs = scaling_runs(spec, &[n], sched, seeds)?;
    let mut records = Vec::new();
    let mut configs = Vec::new();
    for (n, seed, r) in runs {
        let symdiff = if shape {
            Some(shape_deviation(&r.config, lattice)?.symdiff)
        } else {
            None
        };
        records.push(RunRecord {
            n,
            seed,
            energy: r.energy,
            excess: excess_energy(&r.config)?,
            initial_energy: r.initial_energy,
            accepted: r.accepted,
            proposed: r.proposed,
            symdiff,
        });
        configs.push(r.config);
    }
    Ok((records, configs))
}

fn cmd_anneal(args: &AnnealArgs) -> Result<()> {
    let spec = load_lattice(&args.lattice)?;
    let sched = args.schedule.schedule();
    sched.validate()?;
    let n = args.n as usize;
    eprintln!("anneal: N = {n}, {} seed(s)", args.seeds);
    let (records, configs) =
        anneal_records(&args.lattice, &spec, n, &sched, args.seeds as usize, false)?;
    let best = (0..records.len())
        .min_by(|&a, &b| records[a].energy.total_cmp(&records[b].energy))
        .expect("at least one seed");
    if let Some(path) = &args.save_config {
        emit(&configs[best].to_file_string(), Some(path))?;
        eprintln!("wrote {}", path.display());
    }
    let text = match args.out {
        TableFormat::Json => output::to_json(&json!({
            "lattice": args.lattice,
            "N": n,
            "schedule": sched,
            "runs": records,
            "best": { "seed": records[best].seed, "energy": records[best].energy, "excess": records[best].excess },
        }))?,
        TableFormat::Csv => run_csv(&records),
    };
    emit(&text, args.output.as_deref())
}

fn cmd_scaling(args: &ScalingArgs) -> Result<()> {
    if args.ns.is_empty() || args.ns.contains(&0) {
        return Err("--Ns needs positive sizes".into());
    }
    let spec = load_lattice(&args.lattice)?;
    let sched = args.schedule.schedule();
    sched.validate()?;
    let limit = wulff_report(&args.lattice)?.limit_constant;
    let mut all = Vec::new();
    let mut rows = Vec::new();
    for &n in &args.ns {
        eprintln!("scaling: N = {n}, {} seed(s)", args.seeds);
        let (records, _) = anneal_records(
            &args.lattice,
            &spec,
            n,
            &sched,
            args.seeds as usize,
            !args.no_shape,
        )?;
        let excess: Vec<f64> = records.iter().map(|r| r.excess).collect();
        let med = median(&excess);
        let sd: Vec<f64> = records.iter().filter_map(|r| r.symdiff).collect();
        rows.push(json!({
            "N": n,
            "best": excess.iter().copied().fold(f64::INFINITY, f64::min),
            "median": med,
            "limit": limit,
            "ratio": med / limit,
            "median_symdiff": if sd.is_empty() { None } else { Some(median(&sd)) },
        }));
        all.extend(records);
    }
    let text = match args.out {
        TableFormat::Json => output::to_json(&json!({
            "lattice": args.lattice,
            "limit": limit,
            "schedule": sched,
            "rows": rows,
            "runs": all,
        }))?,
        TableFormat::Csv => run_csv(&all),
    };
    emit(&text, args.output.as_deref())
}

fn cmd_validate(args: &ValidateArgs) -> Result<bool> {
    let report = validate::run(&validate::ValidateOptions {
        t: args.t,
        directions: args.directions,
        lattice: args.lattice.clone(),
        seed: args.seed,
    })?;
    for c in &report.checks {
        eprintln!(
            "{} {} (deviation {:.3e}, tolerance {:e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.deviation,
            c.tolerance
        );
    }
    emit_json(&report, args.out.output.as_deref())?;
    Ok(report.passed)
}

fn configure_threads() -> std::result::Result<(), String> {
    let Ok(v) = std::env::var("WULFFKIT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("WULFFKIT_THREADS must be a positive integer, got '{v}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let result = match &cli.command {
        Command::Phi(a) => cmd_phi(a).map(|_| true),
        Command::Voronoi(a) => cmd_voronoi(a).map(|_| true),
        Command::Wulff(a) => cmd_wulff(a).map(|_| true),
        Command::Compare(a) => compare_lattices()
            .map_err(Into::into)
            .and_then(|c| emit_json(&c.rounded(), a.output.as_deref()))
            .map(|_| true),
        Command::Energy(a) => cmd_energy(a).map(|_| true),
        Command::Anneal(a) => cmd_anneal(a).map(|_| true),
        Command::Scaling(a) => cmd_scaling(a).map(|_| true),
        Command::Validate(a) => cmd_validate(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
