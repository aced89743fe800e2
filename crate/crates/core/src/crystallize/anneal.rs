//! Simulated annealing at fixed `N` with boundary-relocation moves.

use std::sync::Arc;

use indexmap::IndexSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::{FxBuildHasher, FxHashMap};
use serde::{Deserialize, Serialize};

use crate::discrete::{energy, Configuration};
use crate::geometry::Vec3;
use crate::lattice::{LatticeSpec, Region, SiteId};

use super::CrystalError;

type SiteSet = IndexSet<SiteId, FxBuildHasher>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub initial_temperature: f64,
    /// Temperature factor applied after every sweep, in `(0, 1)`.
    pub cooling: f64,
    pub sweeps: usize,
    /// Proposals per sweep; `0` means `moves_per_atom * N`.
    pub moves_per_sweep: usize,
    pub seed: u64,
}

/// Proposals per atom and sweep when `moves_per_sweep` is left at zero.
pub const DEFAULT_MOVES_PER_ATOM: usize = 5;

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self {
            initial_temperature: 1.5,
            cooling: 0.93,
            sweeps: 80,
            moves_per_sweep: 0,
            seed: 0,
        }
    }
}

impl AnnealSchedule {
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<(), CrystalError> {
        let ok = self.initial_temperature > 0.0
            && self.initial_temperature.is_finite()
            && self.cooling > 0.0
            && self.cooling < 1.0
            && self.sweeps > 0;
        if ok {
            Ok(())
        } else {
            Err(CrystalError::BadSchedule)
        }
    }

    fn moves_for(&self, n: usize) -> usize {
        if self.moves_per_sweep > 0 {
            self.moves_per_sweep
        } else {
            (DEFAULT_MOVES_PER_ATOM * n).max(200)
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnnealResult {
    pub config: Configuration,
    pub energy: f64,
    pub initial_energy: f64,
    /// Best energy after each sweep.
    pub record: Vec<f64>,
    pub accepted: u64,
    pub proposed: u64,
}

/// The `n` sites closest to the origin, ties broken by site order: the ball
/// cut used to seed the annealer.
pub fn ball_seed(spec: &LatticeSpec, n: usize) -> Vec<SiteId> {
    if n == 0 {
        return Vec::new();
    }
    let rho = spec.density_rho();
    let mut radius = (3.0 * n as f64 / (4.0 * std::f64::consts::PI * rho)).cbrt() + 1.0;
    loop {
        let mut sites = spec
            .enumerate_sites(&Region::Ball {
                center: Vec3::zeros(),
                radius,
            })
            .expect("ball is bounded");
        if sites.len() >= n {
            let key = |s: &SiteId| spec.position(s).norm_squared();
            sites.sort_by(|a, b| key(a).total_cmp(&key(b)).then(a.cmp(b)));
            sites.truncate(n);
            return sites;
        }
        radius *= 1.25;
    }
}

struct State<'a> {
    spec: &'a LatticeSpec,
    occ: SiteSet,
    /// Weighted occupied-neighbour sum and count for every site with at
    /// least one occupied neighbour.
    contact: FxHashMap<SiteId, (f64, u32)>,
    /// Occupied sites with a vacant neighbour.
    boundary: SiteSet,
    /// Vacant sites with an occupied neighbour.
    frontier: SiteSet,
    bonds: f64,
}

impl<'a> State<'a> {
    fn new(spec: &'a LatticeSpec, sites: &[SiteId]) -> Self {
        let mut st = State {
            spec,
            occ: SiteSet::default(),
            contact: FxHashMap::default(),
            boundary: SiteSet::default(),
            frontier: SiteSet::default(),
            bonds: 0.0,
        };
        for s in sites {
            st.insert(*s);
        }
        st
    }

    fn z(&self, s: &SiteId) -> u32 {
        self.spec.stencil(s.sub).len() as u32
    }

    fn refresh(&mut self, s: SiteId) {
        let (_, cnt) = self.contact.get(&s).copied().unwrap_or((0.0, 0));
        if self.occ.contains(&s) {
            self.frontier.swap_remove(&s);
            if cnt < self.z(&s) {
                self.boundary.insert(s);
            } else {
                self.boundary.swap_remove(&s);
            }
        } else {
            self.boundary.swap_remove(&s);
            if cnt > 0 {
                self.frontier.insert(s);
            } else {
                self.frontier.swap_remove(&s);
            }
        }
    }

    fn insert(&mut self, s: SiteId) {
        self.occ.insert(s);
        for b in self.spec.stencil(s.sub) {
            let y = self.spec.neighbor_along(&s, b);
            if self.occ.contains(&y) {
                self.bonds += b.weight;
            }
            let e = self.contact.entry(y).or_insert((0.0, 0));
            e.0 += b.weight;
            e.1 += 1;
            self.refresh(y);
        }
        self.refresh(s);
    }

    fn remove(&mut self, s: SiteId) {
        self.occ.swap_remove(&s);
        for b in self.spec.stencil(s.sub) {
            let y = self.spec.neighbor_along(&s, b);
            if self.occ.contains(&y) {
                self.bonds -= b.weight;
            }
            let e = self.contact.get_mut(&y).expect("tracked");
            e.0 -= b.weight;
            e.1 -= 1;
            if e.1 == 0 {
                self.contact.remove(&y);
            }
            self.refresh(y);
        }
        self.refresh(s);
    }

    fn contact_w(&self, s: &SiteId) -> f64 {
        self.contact.get(s).map_or(0.0, |c| c.0)
    }

    /// Weight of the bond between `a` and `t`, if adjacent.
    fn bond_between(&self, a: &SiteId, t: &SiteId) -> Option<f64> {
        self.spec
            .stencil(a.sub)
            .iter()
            .find(|b| self.spec.neighbor_along(a, b) == *t)
            .map(|b| b.weight)
    }
}

/// Occupied sites bucketed by contact count (`0..z`) and vacant sites
/// touching the cluster bucketed by contact count (`1..=z`), for unit-weight
/// lattices with a common coordination number `z`.
struct Buckets {
    z: usize,
    occ: SiteSet,
    count: FxHashMap<SiteId, u32>,
    atoms: Vec<SiteSet>,
    holes: Vec<SiteSet>,
    bonds: i64,
}

impl Buckets {
    fn new(z: usize, sites: &[SiteId], spec: &LatticeSpec) -> Self {
        let mut b = Buckets {
            z,
            occ: SiteSet::default(),
            count: FxHashMap::default(),
            atoms: vec![SiteSet::default(); z + 1],
            holes: vec![SiteSet::default(); z + 1],
            bonds: 0,
        };
        for s in sites {
            b.insert(spec, *s);
        }
        b
    }

    fn unfile(&mut self, s: &SiteId) {
        let c = self.count.get(s).copied().unwrap_or(0) as usize;
        if self.occ.contains(s) {
            self.atoms[c].swap_remove(s);
        } else {
            self.holes[c].swap_remove(s);
        }
    }

    fn file(&mut self, s: SiteId) {
        let c = self.count.get(&s).copied().unwrap_or(0) as usize;
        if self.occ.contains(&s) {
            if c < self.z {
                self.atoms[c].insert(s);
            }
        } else if c > 0 {
            self.holes[c].insert(s);
        }
    }

    fn insert(&mut self, spec: &LatticeSpec, s: SiteId) {
        self.unfile(&s);
        self.occ.insert(s);
        for b in spec.stencil(s.sub) {
            let y = spec.neighbor_along(&s, b);
            self.unfile(&y);
            if self.occ.contains(&y) {
                self.bonds += 1;
            }
            *self.count.entry(y).or_insert(0) += 1;
            self.file(y);
        }
        self.file(s);
    }

    fn remove(&mut self, spec: &LatticeSpec, s: SiteId) {
        self.unfile(&s);
        self.occ.swap_remove(&s);
        for b in spec.stencil(s.sub) {
            let y = spec.neighbor_along(&s, b);
            self.unfile(&y);
            if self.occ.contains(&y) {
                self.bonds -= 1;
            }
            let e = self.count.get_mut(&y).expect("tracked");
            *e -= 1;
            if *e == 0 {
                self.count.remove(&y);
            }
            self.file(y);
        }
        self.file(s);
    }

    fn adjacent(&self, spec: &LatticeSpec, a: &SiteId, t: &SiteId) -> bool {
        spec.stencil(a.sub)
            .iter()
            .any(|b| spec.neighbor_along(a, b) == *t)
    }
}

/// Common coordination number when every bond has unit weight.
fn unit_coordination(spec: &LatticeSpec) -> Option<usize> {
    let z = spec.stencil(0).len();
    let uniform = (0..spec.num_sublattices()).all(|s| {
        let st = spec.stencil(s);
        st.len() == z && st.iter().all(|b| b.weight == 1.0)
    });
    uniform.then_some(z)
}

/// Anneals `n` atoms from the ball-cut seed. Each proposal moves a random
/// boundary atom to a random vacant site that touches the rest of the
/// cluster; acceptance is Metropolis on `E = sum (z - deg)`. The best
/// configuration met is returned, so the result never exceeds the seed.
pub fn anneal_ground_state(
    spec: &Arc<LatticeSpec>,
    n: usize,
    sched: &AnnealSchedule,
) -> Result<AnnealResult, CrystalError> {
    if n == 0 {
        return Err(CrystalError::EmptyRequest);
    }
    sched.validate()?;
    let seed_sites = ball_seed(spec, n);
    anneal_from(spec, &seed_sites, sched)
}

/// [`anneal_ground_state`] from an explicit starting configuration.
pub fn anneal_from(
    spec: &Arc<LatticeSpec>,
    start: &[SiteId],
    sched: &AnnealSchedule,
) -> Result<AnnealResult, CrystalError> {
    if start.is_empty() {
        return Err(CrystalError::EmptyRequest);
    }
    sched.validate()?;
    if let Some(z) = unit_coordination(spec) {
        return anneal_rejection_free(spec, start, sched, z);
    }
    let n = start.len();
    let mut rng = ChaCha8Rng::seed_from_u64(sched.seed);
    let mut st = State::new(spec, start);
    // E = sum_x sum_b w - 2 * bonds; the first term is fixed by the sublattice mix
    let total_w = |occ: &SiteSet| -> f64 {
        occ.iter()
            .map(|s| spec.stencil(s.sub).iter().map(|b| b.weight).sum::<f64>())
            .sum()
    };
    let mut base = total_w(&st.occ);
    let initial_energy = base - 2.0 * st.bonds;
    let mut best_energy = initial_energy;
    let mut best: Vec<SiteId> = st.occ.iter().copied().collect();
    let mut record = Vec::with_capacity(sched.sweeps);
    let moves = sched.moves_for(n);
    let mut temp = sched.initial_temperature;
    let (mut accepted, mut proposed) = (0u64, 0u64);
    for _ in 0..sched.sweeps {
        for _ in 0..moves {
            if st.boundary.is_empty() || st.frontier.is_empty() {
                break;
            }
            proposed += 1;
            let a = st.boundary[rng.gen_range(0..st.boundary.len())];
            let t = st.frontier[rng.gen_range(0..st.frontier.len())];
            let shared = st.bond_between(&a, &t).unwrap_or(0.0);
            let gain_t = st.contact_w(&t) - shared;
            if gain_t <= 0.0 {
                // t would not touch the remaining cluster
                continue;
            }
            let loss_a = st.contact_w(&a);
            let zw_a: f64 = spec.stencil(a.sub).iter().map(|b| b.weight).sum();
            let zw_t: f64 = spec.stencil(t.sub).iter().map(|b| b.weight).sum();
            let de = (zw_t - zw_a) - 2.0 * (gain_t - loss_a);
            if de > 0.0 && rng.gen::<f64>() >= (-de / temp).exp() {
                continue;
            }
            accepted += 1;
            st.remove(a);
            st.insert(t);
            base += zw_t - zw_a;
            let e = base - 2.0 * st.bonds;
            if e < best_energy - 1e-9 {
                best_energy = e;
                best.clear();
                best.extend(st.occ.iter().copied());
            }
        }
        record.push(best_energy);
        temp *= sched.cooling;
    }
    best.sort();
    let config = Configuration::unscaled(spec.clone(), best)?;
    let e = energy(&config, &Region::All);
    Ok(AnnealResult {
        config,
        energy: e,
        initial_energy,
        record,
        accepted,
        proposed,
    })
}

/// Rejection-free form of the same Metropolis chain for unit weights.
///
/// A proposal `(a, t)` with contact counts `(c_a, c_t)` changes the energy by
/// `-2 (c_t - c_a)`, less one bond when `a` and `t` are adjacent. Count
/// classes are drawn with weight `|atoms(c_a)| |holes(c_t)| min(1, e^{-dE/T})`,
/// then a uniform pair from the class, and the adjacency correction is applied
/// by rejection. The visited states are those of the uniform-proposal chain
/// with its self-loops removed.
fn anneal_rejection_free(
    spec: &Arc<LatticeSpec>,
    start: &[SiteId],
    sched: &AnnealSchedule,
    z: usize,
) -> Result<AnnealResult, CrystalError> {
    let n = start.len();
    let mut rng = ChaCha8Rng::seed_from_u64(sched.seed);
    let mut st = Buckets::new(z, start, spec);
    let energy_of = |bonds: i64| (z * n) as f64 - 2.0 * bonds as f64;
    let initial_energy = energy_of(st.bonds);
    let mut best_energy = initial_energy;
    let mut best: Vec<SiteId> = st.occ.iter().copied().collect();
    let mut record = Vec::with_capacity(sched.sweeps);
    let moves = sched.moves_for(n);
    let mut temp = sched.initial_temperature;
    let (mut accepted, mut proposed) = (0u64, 0u64);
    let span = 2 * z + 1;
    let mut weights = vec![0.0; (z + 1) * (z + 1)];
    for _ in 0..sched.sweeps {
        // acceptance by count difference d = c_t - c_a, offset by z
        let boltz: Vec<f64> = (0..span)
            .map(|k| {
                let d = k as f64 - z as f64;
                (2.0 * d / temp).exp().min(1.0)
            })
            .collect();
        for _ in 0..moves {
            let mut total = 0.0;
            for ca in 0..z {
                let na = st.atoms[ca].len() as f64;
                for ct in 1..=z {
                    let w = if na == 0.0 {
                        0.0
                    } else {
                        na * st.holes[ct].len() as f64 * boltz[ct + z - ca]
                    };
                    weights[ca * (z + 1) + ct] = w;
                    total += w;
                }
            }
            if !(total > 0.0) {
                break;
            }
            proposed += 1;
            let mut u = rng.gen::<f64>() * total;
            let mut class = (0, 1);
            'pick: for ca in 0..z {
                for ct in 1..=z {
                    let w = weights[ca * (z + 1) + ct];
                    if w > 0.0 {
                        class = (ca, ct);
                        if u < w {
                            break 'pick;
                        }
                        u -= w;
                    }
                }
            }
            let (ca, ct) = class;
            let a = st.atoms[ca][rng.gen_range(0..st.atoms[ca].len())];
            let t = st.holes[ct][rng.gen_range(0..st.holes[ct].len())];
            if st.adjacent(spec, &a, &t) {
                if ct == 1 {
                    continue;
                }
                // one bond fewer than the class assumed
                let ratio = boltz[ct - 1 + z - ca] / boltz[ct + z - ca];
                if rng.gen::<f64>() >= ratio {
                    continue;
                }
            }
            accepted += 1;
            st.remove(spec, a);
            st.insert(spec, t);
        }
        let e = energy_of(st.bonds);
        if e < best_energy - 1e-9 {
            best_energy = e;
            best.clear();
            best.extend(st.occ.iter().copied());
        }
        record.push(best_energy);
        temp *= sched.cooling;
    }
    best.sort();
    let config = Configuration::unscaled(spec.clone(), best)?;
    let e = energy(&config, &Region::All);
    Ok(AnnealResult {
        config,
        energy: e,
        initial_energy,
        record,
        accepted,
        proposed,
    })
}
