//! Cross-validation suite: closed forms against the cell formula, the Wulff
//! support function, the numeric polar and finite-window min-cuts, plus the
//! Voronoi and Wulff-identity checks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use wulffkit::convex::support;
use wulffkit::geometry::{random_unit, vec3, Vec3};
use wulffkit::lattice::{lattice_by_name, make_fcc, make_hcp, LatticeSpec, SiteId};
use wulffkit::surface_density::{
    density_from_lattice, phi_cell_formula, phi_fcc, phi_hcp, phi_window_mincut, polar_fcc,
    polar_hcp, CellFormulaProblem, PolarFunction, PolyhedralDensity,
};
use wulffkit::voronoi::{nearest_neighbors_by_face, voronoi_cell};
use wulffkit::wulff::{anisotropic_perimeter, wulff_report, wulff_shape};

use crate::output::Result;

/// Tolerance for routes that agree exactly up to rounding.
pub const EXACT: f64 = 1e-9;
/// Tolerance for the numeric polar.
pub const POLAR: f64 = 1e-8;
/// Relative tolerance for the finite-window min-cut.
pub const MINCUT: f64 = 0.25;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub passed: bool,
}

pub struct ValidateOptions {
    pub t: f64,
    pub directions: usize,
    pub lattice: Option<String>,
    pub seed: u64,
}

fn check(name: impl Into<String>, deviation: f64, tolerance: f64) -> Check {
    Check {
        name: name.into(),
        deviation,
        tolerance,
        passed: deviation <= tolerance,
    }
}

fn mincut_directions() -> Vec<Vec3> {
    vec![
        vec3(0.0, 0.0, 1.0),
        vec3(1.0, 0.0, 0.0),
        vec3(1.0, 1.0, 0.0).normalize(),
        vec3(1.0, 1.0, 1.0).normalize(),
    ]
}

fn route_checks(
    name: &str,
    spec: &LatticeSpec,
    density: &PolyhedralDensity,
    closed: &(dyn Fn(&Vec3) -> f64 + Sync),
    closed_polar: Option<fn(&Vec3) -> f64>,
    dirs: &[Vec3],
    t: f64,
) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let w = wulff_shape(density)?;
    let cell = dirs
        .par_iter()
        .map(|nu| {
            let p = CellFormulaProblem {
                lattice: spec,
                direction: *nu,
            };
            Ok((closed(nu) - phi_cell_formula(&p)?).abs())
        })
        .collect::<std::result::Result<Vec<f64>, wulffkit::surface_density::DensityError>>()?
        .into_iter()
        .fold(0.0, f64::max);
    out.push(check(
        format!("{name}: closed vs cell formula"),
        cell,
        EXACT,
    ));
    let sup = dirs
        .iter()
        .map(|nu| (closed(nu) - support(&w, nu)).abs())
        .fold(0.0, f64::max);
    out.push(check(format!("{name}: closed vs support of W"), sup, EXACT));
    if let Some(polar) = closed_polar {
        let numeric = PolarFunction::new(density)?;
        let dev = dirs
            .iter()
            .map(|z| (polar(z) - numeric.eval(z)).abs())
            .fold(0.0, f64::max);
        out.push(check(
            format!("{name}: closed polar vs numeric polar"),
            dev,
            POLAR,
        ));
    }
    let perim = anisotropic_perimeter(&w, density);
    out.push(check(
        format!("{name}: surface integral = 3 |W|"),
        (perim - 3.0 * w.volume()).abs() / w.volume(),
        EXACT,
    ));
    let mc = mincut_directions()
        .par_iter()
        .map(|nu| {
            let c = closed(nu);
            Ok((phi_window_mincut(spec, nu, t)? - c).abs() / c)
        })
        .collect::<std::result::Result<Vec<f64>, wulffkit::surface_density::DensityError>>()?
        .into_iter()
        .fold(0.0, f64::max);
    out.push(check(
        format!("{name}: min-cut at T = {t} (relative)"),
        mc,
        MINCUT,
    ));
    Ok(out)
}

fn voronoi_checks(name: &str, spec: &LatticeSpec) -> Result<Vec<Check>> {
    let mut vol = 0.0f64;
    let mut nn = 0.0f64;
    for sub in 0..spec.num_sublattices() {
        let id = SiteId::new([0, 0, 0], sub);
        let cell = voronoi_cell(spec, &id)?;
        vol = vol.max((cell.volume() * spec.density_rho() - 1.0).abs());
        let mut stencil = spec.neighbors(&id)?;
        stencil.sort();
        if nearest_neighbors_by_face(spec, &id)? != stencil {
            nn = 1.0;
        }
    }
    Ok(vec![
        check(format!("{name}: Voronoi volume * rho = 1"), vol, EXACT),
        check(format!("{name}: face neighbours = unit stencil"), nn, 0.0),
    ])
}

pub fn run(opts: &ValidateOptions) -> Result<ValidationReport> {
    // a broken lattice file should fail before the long checks start
    let extra = match &opts.lattice {
        Some(sel) => {
            let spec = lattice_by_name(sel)?;
            let density = density_from_lattice(&spec)?;
            Some((sel.as_str(), spec, density))
        }
        None => None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let dirs: Vec<Vec3> = (0..opts.directions)
        .map(|_| random_unit(&mut rng))
        .collect();
    let mut checks = Vec::new();

    let fcc = make_fcc();
    let hcp = make_hcp();
    eprintln!("validate: fcc routes");
    checks.extend(route_checks(
        "fcc",
        &fcc,
        &PolyhedralDensity::fcc(),
        &phi_fcc,
        Some(polar_fcc),
        &dirs,
        opts.t,
    )?);
    eprintln!("validate: hcp routes");
    checks.extend(route_checks(
        "hcp",
        &hcp,
        &PolyhedralDensity::hcp(),
        &phi_hcp,
        Some(polar_hcp),
        &dirs,
        opts.t,
    )?);
    eprintln!("validate: Voronoi cells and Wulff constants");
    checks.extend(voronoi_checks("fcc", &fcc)?);
    checks.extend(voronoi_checks("hcp", &hcp)?);
    let wf = wulff_report("fcc")?;
    let wh = wulff_report("hcp")?;
    checks.push(check(
        "fcc: |W| = 256",
        (wf.volume - 256.0).abs() / 256.0,
        EXACT,
    ));
    checks.push(check(
        "hcp: |W| = 260",
        (wh.volume - 260.0).abs() / 260.0,
        EXACT,
    ));

    if let Some((sel, spec, density)) = &extra {
        eprintln!("validate: {sel}");
        let eval = |nu: &Vec3| density.eval(nu);
        checks.extend(route_checks(
            sel, spec, density, &eval, None, &dirs, opts.t,
        )?);
        checks.extend(voronoi_checks(sel, spec)?);
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(ValidationReport { checks, passed })
}
