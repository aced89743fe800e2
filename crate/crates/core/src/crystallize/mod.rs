//! Discrete ground states at fixed `N` and their convergence to the Wulff
//! crystal.

pub mod anneal;
pub mod exact;

pub use anneal::{anneal_from, anneal_ground_state, ball_seed, AnnealResult, AnnealSchedule};
pub use exact::{exact_ground_state, ExactResult, EXACT_MAX_N};

use std::collections::HashMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::convex::Polytope;
use crate::discrete::{excess_energy, Configuration, DiscreteError};
use crate::geometry::Vec3;
use crate::lattice::{lattice_by_name, LatticeError, LatticeSpec, SiteId};
use crate::wulff::{wulff_report, WulffError};

/// Monte Carlo samples used by [`shape_deviation`].
pub const SHAPE_SAMPLES: usize = 100_000;
const SHAPE_SEED: u64 = 0x5e_ed0f_5a4d;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CrystalError {
    #[error("exact search supports 1 <= N <= {max}, got {0}", max = EXACT_MAX_N)]
    ExactRange(usize),
    #[error("at least one atom is required")]
    EmptyRequest,
    #[error("annealing schedule needs positive temperature, cooling in (0, 1) and sweeps > 0")]
    BadSchedule,
    #[error("configuration is empty")]
    EmptyConfiguration,
    #[error("list of sizes is empty")]
    NoSizes,
    #[error(transparent)]
    Discrete(#[from] DiscreteError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Wulff(#[from] WulffError),
}

/// Cell coordinates `c` with `|B c - center| <= radius` (translation grid).
fn grid_points_in_ball(spec: &LatticeSpec, center: &Vec3, radius: f64) -> Vec<[i64; 3]> {
    let b = spec.basis_matrix();
    let inv = b.try_inverse().expect("lattice basis is invertible");
    let a = inv * center;
    let mut ext = [0i64; 3];
    for (k, e) in ext.iter_mut().enumerate() {
        *e = (radius * inv.row(k).norm()).ceil() as i64 + 1;
    }
    let base = [a.x.round() as i64, a.y.round() as i64, a.z.round() as i64];
    let r2 = radius * radius;
    let mut out = Vec::new();
    for i in -ext[0]..=ext[0] {
        for j in -ext[1]..=ext[1] {
            for k in -ext[2]..=ext[2] {
                let c = [base[0] + i, base[1] + j, base[2] + k];
                let p = b * Vec3::new(c[0] as f64, c[1] as f64, c[2] as f64);
                if (p - center).norm_squared() <= r2 {
                    out.push(c);
                }
            }
        }
    }
    out
}

/// Point of the scaled translation grid `eps * span_Z{e_1, e_2, e_3}` whose
/// closed ball of the given (scaled) radius holds the most occupied sites.
/// Ties go to the lexicographically smallest cell.
pub fn nucleation_center(x: &Configuration, radius: f64) -> Result<(Vec3, [i64; 3]), CrystalError> {
    if x.is_empty() {
        return Err(CrystalError::EmptyConfiguration);
    }
    let spec = x.lattice();
    let eps = x.epsilon();
    let mut counts: HashMap<[i64; 3], u32> = HashMap::new();
    for s in x.sites() {
        for c in grid_points_in_ball(spec, &spec.position(s), radius / eps) {
            *counts.entry(c).or_insert(0) += 1;
        }
    }
    let best = counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(c, _)| c);
    let cell = match best {
        Some(c) => c,
        // radius below the grid spacing: fall back to the nearest grid point
        None => {
            let s = x.sites()[0];
            let p = spec.position(&s);
            let inv = spec.basis_matrix().try_inverse().expect("invertible");
            let a = inv * p;
            [a.x.round() as i64, a.y.round() as i64, a.z.round() as i64]
        }
    };
    Ok((grid_point(spec, cell) * eps, cell))
}

fn grid_point(spec: &LatticeSpec, c: [i64; 3]) -> Vec3 {
    spec.basis_matrix() * Vec3::new(c[0] as f64, c[1] as f64, c[2] as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeDeviation {
    pub n: usize,
    /// Centre of the aligned Wulff body, in scaled coordinates.
    pub translation: [f64; 3],
    /// `|V Δ W| / |W|`, in `[0, 2]`.
    pub symdiff: f64,
}

/// Uniform points of `body` (centred at the origin) by rejection from its
/// bounding box, with a fixed seed.
fn body_samples(body: &Polytope, count: usize) -> Vec<Vec3> {
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for v in body.vertices() {
        lo = lo.inf(v);
        hi = hi.sup(v);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SHAPE_SEED);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = Vec3::new(
            rng.gen_range(lo.x..hi.x),
            rng.gen_range(lo.y..hi.y),
            rng.gen_range(lo.z..hi.z),
        );
        if body.contains(&p, 0.0) {
            out.push(p);
        }
    }
    out
}

/// Symmetric difference between the Voronoi union of `X` rescaled by
/// `N^{-1/3}` and the Wulff body of the same volume `N eps^3 / rho`.
///
/// The body is first centred at [`nucleation_center`] and then moved over the
/// scaled translation grid while the overlap grows. Since both sets have the
/// same volume, `|V Δ W| / |W| = 2 - 2 |V ∩ W| / |W|`, and the overlap
/// fraction is estimated from fixed uniform samples of the body.
pub fn shape_deviation(x: &Configuration, lattice: &str) -> Result<ShapeDeviation, CrystalError> {
    let report = wulff_report(lattice)?;
    shape_deviation_with(x, &report.body)
}

/// [`shape_deviation`] against an explicit Wulff body centred at the origin.
pub fn shape_deviation_with(
    x: &Configuration,
    body: &Polytope,
) -> Result<ShapeDeviation, CrystalError> {
    if x.is_empty() {
        return Err(CrystalError::EmptyConfiguration);
    }
    let n = x.len();
    let eps = (n as f64).powf(-1.0 / 3.0);
    let x = x.with_epsilon(eps)?;
    let spec = x.lattice();
    let target = n as f64 * eps.powi(3) / spec.density_rho();
    let body = body.scaled((target / body.volume()).cbrt());
    let samples = body_samples(&body, SHAPE_SAMPLES);
    let r_ball = (3.0 * target / (4.0 * std::f64::consts::PI)).cbrt();
    let (tau0, _) = nucleation_center(&x, 0.5 * r_ball)?;
    let nearest: Vec<SiteId> = samples
        .par_iter()
        .map(|s| spec.nearest_site(&((tau0 + s) / eps)))
        .collect();
    let overlap = |t: [i64; 3]| -> usize {
        nearest
            .iter()
            .filter(|id| x.contains(&id.shifted(t)))
            .count()
    };
    let mut t = [0i64; 3];
    let mut best = overlap(t);
    loop {
        let mut step = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if dx == 0 && dy == 0 && dz == 0 {
                        continue;
                    }
                    let c = [t[0] + dx, t[1] + dy, t[2] + dz];
                    let v = overlap(c);
                    if v > best {
                        best = v;
                        step = Some(c);
                    }
                }
            }
        }
        match step {
            Some(c) => t = c,
            None => break,
        }
    }
    let f = best as f64 / samples.len() as f64;
    let tau = tau0 + grid_point(spec, t) * eps;
    Ok(ShapeDeviation {
        n,
        translation: [tau.x, tau.y, tau.z],
        symdiff: (2.0 - 2.0 * f).clamp(0.0, 2.0),
    })
}

/// One row of the scaling table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub seeds: Vec<u64>,
    /// `N^{-2/3} E_N` of the best configuration from each seed.
    pub excess: Vec<f64>,
    pub best: f64,
    pub median: f64,
    /// Predicted limit `rho^{-2/3} m_L`.
    pub limit: f64,
    /// `median / limit`.
    pub ratio: f64,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m == 0 {
        f64::NAN
    } else if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Anneals every `N` with seeds `sched.seed .. sched.seed + seeds`; runs are
/// independent and execute concurrently.
pub fn scaling_curve(
    lattice: &str,
    ns: &[usize],
    sched: &AnnealSchedule,
    seeds: usize,
) -> Result<Vec<ScalingRow>, CrystalError> {
    if ns.is_empty() {
        return Err(CrystalError::NoSizes);
    }
    let spec = Arc::new(lattice_by_name(lattice)?);
    let limit = wulff_report(lattice)?.limit_constant;
    let runs = scaling_runs(&spec, ns, sched, seeds)?;
    Ok(ns
        .iter()
        .map(|&n| {
            let mine: Vec<&(usize, u64, AnnealResult)> = runs.iter().filter(|r| r.0 == n).collect();
            let excess: Vec<f64> = mine
                .iter()
                .map(|r| excess_energy(&r.2.config).expect("nonempty"))
                .collect();
            let med = median(&excess);
            ScalingRow {
                n,
                seeds: mine.iter().map(|r| r.1).collect(),
                best: excess.iter().copied().fold(f64::INFINITY, f64::min),
                median: med,
                limit,
                ratio: med / limit,
                excess,
            }
        })
        .collect())
}

/// All `(N, seed)` annealing runs, in `(N, seed)` order.
pub fn scaling_runs(
    spec: &Arc<LatticeSpec>,
    ns: &[usize],
    sched: &AnnealSchedule,
    seeds: usize,
) -> Result<Vec<(usize, u64, AnnealResult)>, CrystalError> {
    let jobs: Vec<(usize, u64)> = ns
        .iter()
        .flat_map(|&n| (0..seeds as u64).map(move |k| (n, k)))
        .map(|(n, k)| (n, sched.seed + k))
        .collect();
    jobs.par_iter()
        .map(|&(n, seed)| {
            let r = anneal_ground_state(spec, n, &sched.with_seed(seed))?;
            Ok((n, seed, r))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_fcc;

    #[test]
    fn nucleation_single_atom() {
        let l = Arc::new(make_fcc());
        let s = SiteId::new([2, -1, 3], 0);
        let x = Configuration::new(l.clone(), 0.1, [s]).unwrap();
        let (tau, _) = nucleation_center(&x, 0.05).unwrap();
        assert!((tau - x.position(&s)).norm() < 1e-12);
    }

    #[test]
    fn nucleation_prefers_larger_cluster() {
        let l = Arc::new(make_fcc());
        let shell = |c: [i64; 3], skip: usize| -> Vec<SiteId> {
            let o = SiteId::new(c, 0);
            let mut v = vec![o];
            v.extend(l.neighbors(&o).unwrap().into_iter().skip(skip));
            v
        };
        let mut sites = shell([0, 0, 0], 1);
        sites.extend(shell([20, 0, 0], 0));
        let x = Configuration::unscaled(l.clone(), sites).unwrap();
        let (_, cell) = nucleation_center(&x, 1.01).unwrap();
        assert_eq!(cell, [20, 0, 0]);
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
