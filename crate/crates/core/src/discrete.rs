//! Finite configurations on scaled lattices: energies, empirical measures and
//! Voronoi-union interpolants.

use std::path::Path;
use std::sync::Arc;

use indexmap::IndexSet;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::Vec3;
use crate::lattice::{add3, LatticeError, LatticeSpec, Region, SiteId};
use crate::voronoi::{reference_cells, VoronoiCell, VoronoiError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscreteError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Voronoi(#[from] VoronoiError),
    #[error("scale epsilon must be finite and positive, got {0}")]
    BadEpsilon(f64),
    #[error("site {0} listed twice")]
    DuplicateSite(SiteId),
    #[error("configuration is empty")]
    Empty,
    #[error("configuration file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("cannot read configuration file: {0}")]
    Io(String),
}

/// Occupied sites of `epsilon * L`. Site order is insertion order, which
/// keeps every floating-point sum reproducible.
#[derive(Debug, Clone)]
pub struct Configuration {
    lattice: Arc<LatticeSpec>,
    epsilon: f64,
    sites: IndexSet<SiteId>,
}

impl Configuration {
    pub fn new(
        lattice: Arc<LatticeSpec>,
        epsilon: f64,
        sites: impl IntoIterator<Item = SiteId>,
    ) -> Result<Self, DiscreteError> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(DiscreteError::BadEpsilon(epsilon));
        }
        let mut set = IndexSet::new();
        for s in sites {
            lattice.check_site(&s)?;
            if !set.insert(s) {
                return Err(DiscreteError::DuplicateSite(s));
            }
        }
        Ok(Self {
            lattice,
            epsilon,
            sites: set,
        })
    }

    /// Unscaled configuration (`epsilon = 1`).
    pub fn unscaled(
        lattice: Arc<LatticeSpec>,
        sites: impl IntoIterator<Item = SiteId>,
    ) -> Result<Self, DiscreteError> {
        Self::new(lattice, 1.0, sites)
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn lattice_arc(&self) -> &Arc<LatticeSpec> {
        &self.lattice
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn sites(&self) -> &IndexSet<SiteId> {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn contains(&self, id: &SiteId) -> bool {
        self.sites.contains(id)
    }

    /// Scaled position `epsilon * x`.
    pub fn position(&self, id: &SiteId) -> Vec3 {
        self.lattice.position(id) * self.epsilon
    }

    pub fn positions(&self) -> Vec<Vec3> {
        self.sites.iter().map(|s| self.position(s)).collect()
    }

    /// The same sites at a different scale.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self, DiscreteError> {
        Self::new(self.lattice.clone(), epsilon, self.sites.iter().copied())
    }

    /// Translation by a lattice vector given in cell coordinates.
    pub fn translated(&self, shift: [i64; 3]) -> Self {
        Self {
            lattice: self.lattice.clone(),
            epsilon: self.epsilon,
            sites: self.sites.iter().map(|s| s.shifted(shift)).collect(),
        }
    }

    /// Mean scaled position of the occupied sites.
    pub fn centroid(&self) -> Option<Vec3> {
        if self.is_empty() {
            return None;
        }
        let s: Vec3 = self.sites.iter().map(|x| self.position(x)).sum();
        Some(s / self.len() as f64)
    }

    /// Parses lines `cell_x cell_y cell_z sub`; `#` starts a comment.
    pub fn parse(
        text: &str,
        lattice: Arc<LatticeSpec>,
        epsilon: f64,
    ) -> Result<Self, DiscreteError> {
        let mut sites = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(DiscreteError::Parse {
                    line: ln + 1,
                    msg: format!("expected 4 integers, found {} fields", fields.len()),
                });
            }
            let mut v = [0i64; 4];
            for (k, f) in fields.iter().enumerate() {
                v[k] = f.parse().map_err(|_| DiscreteError::Parse {
                    line: ln + 1,
                    msg: format!("'{f}' is not an integer"),
                })?;
            }
            if v[3] < 0 {
                return Err(DiscreteError::Parse {
                    line: ln + 1,
                    msg: "negative sublattice index".into(),
                });
            }
            sites.push(SiteId::new([v[0], v[1], v[2]], v[3] as usize));
        }
        Self::new(lattice, epsilon, sites)
    }

    pub fn from_file(
        path: &Path,
        lattice: Arc<LatticeSpec>,
        epsilon: f64,
    ) -> Result<Self, DiscreteError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DiscreteError::Io(format!("{}: {}", path.display(), e)))?;
        Self::parse(&text, lattice, epsilon)
    }

    pub fn to_file_string(&self) -> String {
        let mut s = String::new();
        for id in &self.sites {
            s.push_str(&format!(
                "{} {} {} {}\n",
                id.cell[0], id.cell[1], id.cell[2], id.sub
            ));
        }
        s
    }
}

/// `E(X, A) = sum_{x in X, eps x in A} sum_{y in N(x) \ X} c(x, y)`; with unit
/// weights this is the valence sum `sum (12 - #(N(x) ∩ X))` on FCC and HCP.
pub fn energy(x: &Configuration, a: &Region) -> f64 {
    let l = x.lattice();
    let mut e = 0.0;
    for s in x.sites() {
        if !a.contains(&x.position(s)) {
            continue;
        }
        for b in l.stencil(s.sub) {
            if !x.contains(&l.neighbor_along(s, b)) {
                e += b.weight;
            }
        }
    }
    e
}

/// Number of unordered occupied-occupied bonds.
pub fn bond_count(x: &Configuration) -> usize {
    let l = x.lattice();
    let mut twice = 0usize;
    for s in x.sites() {
        for b in l.stencil(s.sub) {
            if x.contains(&SiteId::new(add3(s.cell, b.shift), b.target)) {
                twice += 1;
            }
        }
    }
    twice / 2
}

/// `N^{-2/3} E(X)`: energy above the bulk value `-12 N` in surface scaling.
pub fn excess_energy(x: &Configuration) -> Result<f64, DiscreteError> {
    if x.is_empty() {
        return Err(DiscreteError::Empty);
    }
    Ok(energy(x, &Region::All) * (x.len() as f64).powf(-2.0 / 3.0))
}

/// `F_eps(X, A)`: `eps^2 c |chi(x) - chi(y)|` over ordered bonds `(x, y)` with
/// `eps x in A`. Additive on disjoint sets.
pub fn f_eps(x: &Configuration, a: &Region) -> f64 {
    cut_sum(x, a, false)
}

/// `F^_eps(X, A)`: as [`f_eps`] but both endpoints must lie in `A`.
pub fn f_hat_eps(x: &Configuration, a: &Region) -> f64 {
    cut_sum(x, a, true)
}

fn cut_sum(x: &Configuration, a: &Region, both: bool) -> f64 {
    let l = x.lattice();
    let mut total = 0.0;
    // every cut bond has exactly one occupied endpoint; visit it from there
    for s in x.sites() {
        let ps = x.position(s);
        let s_in = a.contains(&ps);
        for b in l.stencil(s.sub) {
            let y = l.neighbor_along(s, b);
            if x.contains(&y) {
                continue;
            }
            let y_in = a.contains(&(ps + b.d * x.epsilon()));
            let (fwd, bwd) = if both {
                (s_in && y_in, s_in && y_in)
            } else {
                (s_in, y_in)
            };
            // (s, y) and (y, s) are both ordered bonds of the pair
            total += b.weight * (fwd as u8 + bwd as u8) as f64;
        }
    }
    total * x.epsilon() * x.epsilon()
}

/// Point masses `eps^3` at the occupied positions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalMeasure {
    pub atoms: Vec<([f64; 3], f64)>,
}

impl EmpiricalMeasure {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    pub fn mass_in(&self, region: &Region) -> f64 {
        self.atoms
            .iter()
            .filter(|(p, _)| region.contains(&Vec3::new(p[0], p[1], p[2])))
            .map(|a| a.1)
            .sum()
    }
}

pub fn empirical_measure(x: &Configuration) -> EmpiricalMeasure {
    let m = x.epsilon().powi(3);
    EmpiricalMeasure {
        atoms: x
            .sites()
            .iter()
            .map(|s| {
                let p = x.position(s);
                ([p.x, p.y, p.z], m)
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VoronoiUnion {
    pub volume: f64,
    pub perimeter: f64,
    /// Cell faces between an occupied and a vacant site.
    pub exposed_faces: usize,
}

/// Volume and perimeter of the union of the scaled Voronoi cells of `X`.
pub fn voronoi_union(x: &Configuration) -> Result<VoronoiUnion, DiscreteError> {
    let cells = reference_cells(x.lattice())?;
    Ok(voronoi_union_with(x, &cells))
}

/// [`voronoi_union`] with precomputed reference cells, one per sublattice.
pub fn voronoi_union_with(x: &Configuration, cells: &[VoronoiCell]) -> VoronoiUnion {
    let l = x.lattice();
    let eps = x.epsilon();
    let mut area = 0.0;
    let mut exposed = 0;
    for s in x.sites() {
        let cell = &cells[s.sub];
        for f in &cell.faces {
            let y = SiteId::new(add3(s.cell, f.neighbor.cell), f.neighbor.sub);
            if !x.contains(&y) {
                area += f.area;
                exposed += 1;
            }
        }
    }
    VoronoiUnion {
        volume: x.len() as f64 * eps.powi(3) / l.density_rho(),
        perimeter: area * eps * eps,
        exposed_faces: exposed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{make_fcc, make_hcp};

    fn fcc() -> Arc<LatticeSpec> {
        Arc::new(make_fcc())
    }

    #[test]
    fn single_and_pair() {
        let l = fcc();
        let one = Configuration::unscaled(l.clone(), [SiteId::new([0, 0, 0], 0)]).unwrap();
        assert_eq!(energy(&one, &Region::All), 12.0);
        assert_eq!(excess_energy(&one).unwrap(), 12.0);
        let two =
            Configuration::unscaled(l, [SiteId::new([0, 0, 0], 0), SiteId::new([1, 0, 0], 0)])
                .unwrap();
        assert_eq!(energy(&two, &Region::All), 22.0);
        assert!((excess_energy(&two).unwrap() - 22.0 / 2f64.powf(2.0 / 3.0)).abs() < 1e-12);
        assert_eq!(bond_count(&two), 1);
    }

    #[test]
    fn rejects_bad_input() {
        let l = fcc();
        let o = SiteId::new([0, 0, 0], 0);
        assert!(matches!(
            Configuration::unscaled(l.clone(), [o, o]),
            Err(DiscreteError::DuplicateSite(_))
        ));
        assert!(matches!(
            Configuration::new(l.clone(), 0.0, [o]),
            Err(DiscreteError::BadEpsilon(_))
        ));
        assert!(matches!(
            Configuration::unscaled(l.clone(), [SiteId::new([0, 0, 0], 1)]),
            Err(DiscreteError::Lattice(_))
        ));
        let empty = Configuration::unscaled(l, []).unwrap();
        assert!(matches!(excess_energy(&empty), Err(DiscreteError::Empty)));
        assert_eq!(empirical_measure(&empty).total_mass(), 0.0);
    }

    #[test]
    fn file_round_trip() {
        let l = Arc::new(make_hcp());
        let c = Configuration::unscaled(
            l.clone(),
            [SiteId::new([0, 0, 0], 0), SiteId::new([-1, 2, 0], 1)],
        )
        .unwrap();
        let text = c.to_file_string();
        let back = Configuration::parse(&format!("# header\n{text}\n"), l.clone(), 1.0).unwrap();
        assert_eq!(back.sites(), c.sites());
        assert!(matches!(
            Configuration::parse("1 2 x 0", l, 1.0),
            Err(DiscreteError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn single_cell_union() {
        let c = Configuration::unscaled(fcc(), [SiteId::new([0, 0, 0], 0)]).unwrap();
        let u = voronoi_union(&c).unwrap();
        assert!((u.volume - 2f64.sqrt() / 2.0).abs() < 1e-12);
        assert!((u.perimeter - 3.0 * 2f64.sqrt()).abs() < 1e-9);
        assert_eq!(u.exposed_faces, 12);
    }

    #[test]
    fn whole_space_cut_sums_agree() {
        let c = Configuration::new(
            fcc(),
            0.5,
            [SiteId::new([0, 0, 0], 0), SiteId::new([0, 1, 0], 0)],
        )
        .unwrap();
        let f = f_eps(&c, &Region::All);
        assert_eq!(f, f_hat_eps(&c, &Region::All));
        // 22 cut bonds, each counted from both ends
        assert!((f - 44.0 * 0.25).abs() < 1e-12);
    }
}
