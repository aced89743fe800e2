//! Voronoi cells of lattice sites as explicit polytopes.

use serde::Serialize;
use thiserror::Error;

use crate::convex::{intersect_halfspaces, ConvexError, Halfspace, Polytope};
use crate::geometry::Vec3;
use crate::lattice::{LatticeError, LatticeSpec, Region, SiteId, MEMBER_TOL};

/// Facets smaller than this are numerical slivers, not true faces.
pub const FACET_AREA_TOL: f64 = 1e-10;
/// Radius of the candidate set of competing sites.
const CANDIDATE_RADIUS: f64 = 3.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VoronoiError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Convex(#[from] ConvexError),
    #[error("{0:?} is not a stencil displacement of this site")]
    NotInStencil([f64; 3]),
    #[error("facet normal does not correspond to a lattice site")]
    Unmatched,
}

/// One facet of a Voronoi cell and the site across it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VoronoiFace {
    pub neighbor: SiteId,
    /// Displacement from the cell's site to `neighbor`.
    #[serde(serialize_with = "ser_vec")]
    pub displacement: Vec3,
    pub area: f64,
    /// Index into the polytope's facet list.
    pub facet: usize,
}

fn ser_vec<S: serde::Serializer>(v: &Vec3, s: S) -> Result<S::Ok, S::Error> {
    use serde::Serialize as _;
    [v.x, v.y, v.z].serialize(s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoronoiCell {
    pub site: SiteId,
    /// The cell in absolute coordinates.
    pub polytope: Polytope,
    pub faces: Vec<VoronoiFace>,
}

impl VoronoiCell {
    /// The face shared with the site at displacement `d`, if any.
    pub fn face_for(&self, d: &Vec3) -> Option<&VoronoiFace> {
        self.faces
            .iter()
            .find(|f| (f.displacement - d).norm() <= MEMBER_TOL)
    }

    pub fn volume(&self) -> f64 {
        self.polytope.volume()
    }

    pub fn surface_area(&self) -> f64 {
        self.faces.iter().map(|f| f.area).sum()
    }
}

/// Intersection of `<b, y - x> <= |b|^2 / 2` over all sites `x + b` with
/// `|b| <= 3`.
pub fn voronoi_cell(spec: &LatticeSpec, id: &SiteId) -> Result<VoronoiCell, VoronoiError> {
    spec.check_site(id)?;
    let x = spec.position(id);
    let candidates = spec.enumerate_sites(&Region::Ball {
        center: x,
        radius: CANDIDATE_RADIUS,
    })?;
    let mut hs = Vec::with_capacity(candidates.len());
    for c in &candidates {
        if c == id {
            continue;
        }
        let b = spec.position(c) - x;
        hs.push(Halfspace::new(b, b.norm_squared() / 2.0)?);
    }
    let local = intersect_halfspaces(&hs)?;
    let mut faces = Vec::new();
    for (k, f) in local.facets().iter().enumerate() {
        if f.area <= FACET_AREA_TOL {
            continue;
        }
        let b = f.normal * (2.0 * f.offset);
        let neighbor = spec.locate(&(x + b)).ok_or(VoronoiError::Unmatched)?;
        faces.push(VoronoiFace {
            neighbor,
            displacement: spec.position(&neighbor) - x,
            area: f.area,
            facet: k,
        });
    }
    Ok(VoronoiCell {
        site: *id,
        polytope: local.translated(&x),
        faces,
    })
}

/// Corners of the facet `S_{b0}` shared with the site at displacement `b0`,
/// counter-clockwise seen from outside the cell.
pub fn face_corners(spec: &LatticeSpec, id: &SiteId, b0: &Vec3) -> Result<Vec<Vec3>, VoronoiError> {
    spec.check_site(id)?;
    if !spec
        .stencil(id.sub)
        .iter()
        .any(|b| (b.d - b0).norm() <= MEMBER_TOL)
    {
        return Err(VoronoiError::NotInStencil([b0.x, b0.y, b0.z]));
    }
    let cell = voronoi_cell(spec, id)?;
    let face = cell
        .face_for(b0)
        .ok_or(VoronoiError::NotInStencil([b0.x, b0.y, b0.z]))?;
    let facet = &cell.polytope.facets()[face.facet];
    Ok(cell.polytope.facet_points(facet))
}

/// Sites whose cells share a facet of positive area with the cell of `id`,
/// sorted.
pub fn nearest_neighbors_by_face(
    spec: &LatticeSpec,
    id: &SiteId,
) -> Result<Vec<SiteId>, VoronoiError> {
    let cell = voronoi_cell(spec, id)?;
    let mut out: Vec<SiteId> = cell.faces.iter().map(|f| f.neighbor).collect();
    out.sort_unstable();
    Ok(out)
}

/// Cell of the representative site of every sublattice, indexed by sublattice.
pub fn reference_cells(spec: &LatticeSpec) -> Result<Vec<VoronoiCell>, VoronoiError> {
    (0..spec.num_sublattices())
        .map(|s| voronoi_cell(spec, &SiteId::new([0, 0, 0], s)))
        .collect()
}
