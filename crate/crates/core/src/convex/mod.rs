//! Three-dimensional convex geometry: hulls, halfspace intersections,
//! Minkowski sums, support functions and polar bodies.
//!
//! Halfspace intersection is computed through polarity: with an interior point
//! at the origin, `{y : <n_i, y> <= o_i}` is the polar of `conv{n_i / o_i}`,
//! so a single hull kernel serves both representations.

mod exact;
mod hull;
pub mod mesh;

pub use exact::{fcc_wulff_exact, ExactBodyReport};

use serde::Serialize;
use thiserror::Error;

use crate::geometry::Vec3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConvexError {
    #[error("unbounded: the constraints do not enclose a bounded region")]
    Unbounded,
    #[error("empty: the constraints have no common interior point")]
    Empty,
    #[error("degenerate input: points span only {0} dimension(s)")]
    Degenerate(usize),
    #[error("origin is not an interior point of the body")]
    OriginNotInterior,
    #[error("non-finite coordinate in input")]
    NonFinite,
    #[error("invalid halfspace normal (zero or non-finite)")]
    BadNormal,
    #[error("internal geometry error: {0}")]
    Internal(&'static str),
}

/// The closed halfspace `{y : <normal, y> <= offset}` with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Halfspace {
    normal: Vec3,
    offset: f64,
}

impl Halfspace {
    /// Normalises `normal` and rescales `offset` accordingly.
    pub fn new(normal: Vec3, offset: f64) -> Result<Self, ConvexError> {
        let n = normal.norm();
        if !(n > 0.0) || !n.is_finite() || !offset.is_finite() {
            return Err(ConvexError::BadNormal);
        }
        Ok(Self {
            normal: normal / n,
            offset: offset / n,
        })
    }

    pub fn normal(&self) -> Vec3 {
        self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn contains(&self, p: &Vec3, tol: f64) -> bool {
        self.normal.dot(p) <= self.offset + tol
    }
}

/// A polygonal facet: outward unit normal, plane offset, area and a vertex
/// loop (indices into the owning polytope) ordered counter-clockwise when
/// viewed from outside.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub normal: Vec3,
    pub offset: f64,
    pub area: f64,
    pub vertices: Vec<usize>,
}

/// A convex body in vertex/facet form.
///
/// Lower-dimensional results (points, segments, polygons) keep their extreme
/// points, carry no facets and report zero volume.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    vertices: Vec<Vec3>,
    facets: Vec<Facet>,
    volume: f64,
    dimension: usize,
}

impl Polytope {
    pub(crate) fn degenerate(vertices: Vec<Vec3>, dimension: usize) -> Self {
        Self {
            vertices,
            facets: Vec::new(),
            volume: 0.0,
            dimension,
        }
    }

    pub(crate) fn from_facets(vertices: Vec<Vec3>, facets: Vec<Facet>) -> Self {
        // divergence theorem: 3V = sum area * <n, x_f>
        let volume = facets.iter().map(|f| f.area * f.offset).sum::<f64>() / 3.0;
        Self {
            vertices,
            facets,
            volume,
            dimension: 3,
        }
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// Affine dimension of the body (3 for a proper polytope).
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn is_degenerate(&self) -> bool {
        self.dimension < 3
    }

    pub fn surface_area(&self) -> f64 {
        self.facets.iter().map(|f| f.area).sum()
    }

    pub fn edge_count(&self) -> usize {
        self.facets.iter().map(|f| f.vertices.len()).sum::<usize>() / 2
    }

    /// `V - E + F`; equals 2 for every bounded 3-polytope.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_count() as i64 + self.facets.len() as i64
    }

    pub fn facet_points(&self, facet: &Facet) -> Vec<Vec3> {
        facet.vertices.iter().map(|&i| self.vertices[i]).collect()
    }

    pub fn facet_centroid(&self, facet: &Facet) -> Vec3 {
        let pts = self.facet_points(facet);
        pts.iter().sum::<Vec3>() / pts.len() as f64
    }

    /// Largest vertex norm.
    pub fn circumradius(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Smallest facet offset; positive iff the origin is interior.
    pub fn inradius_about_origin(&self) -> f64 {
        if self.is_degenerate() {
            return 0.0;
        }
        self.facets
            .iter()
            .map(|f| f.offset)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, p: &Vec3, tol: f64) -> bool {
        !self.is_degenerate()
            && self
                .facets
                .iter()
                .all(|f| f.normal.dot(p) <= f.offset + tol)
    }

    pub fn translated(&self, t: &Vec3) -> Polytope {
        let mut out = self.clone();
        for v in &mut out.vertices {
            *v += t;
        }
        for f in &mut out.facets {
            f.offset += f.normal.dot(t);
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Polytope {
        assert!(s > 0.0, "scale factor must be positive");
        let mut out = self.clone();
        for v in &mut out.vertices {
            *v *= s;
        }
        for f in &mut out.facets {
            f.offset *= s;
            f.area *= s * s;
        }
        out.volume *= s * s * s;
        out
    }

    pub fn halfspaces(&self) -> Vec<Halfspace> {
        self.facets
            .iter()
            .map(|f| Halfspace {
                normal: f.normal,
                offset: f.offset,
            })
            .collect()
    }

    /// Vertex list sorted lexicographically after rounding, for set comparisons.
    pub fn canonical_vertices(&self) -> Vec<Vec3> {
        let mut v = self.vertices.clone();
        v.sort_by(|a, b| {
            for k in 0..3 {
                let (x, y) = ((a[k] * 1e6).round(), (b[k] * 1e6).round());
                if x != y {
                    return x.partial_cmp(&y).unwrap();
                }
            }
            std::cmp::Ordering::Equal
        });
        v
    }

    /// JSON-ready dump of vertices, facets and volume.
    pub fn to_dump(&self) -> PolytopeDump {
        PolytopeDump {
            dimension: self.dimension,
            volume: self.volume,
            vertices: self.vertices.iter().map(|v| [v.x, v.y, v.z]).collect(),
            facets: self
                .facets
                .iter()
                .map(|f| FacetDump {
                    normal: [f.normal.x, f.normal.y, f.normal.z],
                    area: f.area,
                    vertices: f.vertices.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PolytopeDump {
    pub dimension: usize,
    pub volume: f64,
    pub vertices: Vec<[f64; 3]>,
    pub facets: Vec<FacetDump>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FacetDump {
    pub normal: [f64; 3],
    pub area: f64,
    #[serde(rename = "loop")]
    pub vertices: Vec<usize>,
}

/// Convex hull of at least four affinely independent points.
pub fn convex_hull(points: &[Vec3]) -> Result<Polytope, ConvexError> {
    let p = hull::hull_any(points)?;
    if p.is_degenerate() {
        return Err(ConvexError::Degenerate(p.dimension()));
    }
    Ok(p)
}

/// Hull that reports flat or lower-dimensional inputs as degenerate bodies.
pub fn convex_hull_any(points: &[Vec3]) -> Result<Polytope, ConvexError> {
    hull::hull_any(points)
}

/// Bounded intersection of halfspaces in irredundant vertex/facet form.
///
/// The origin is used as the interior point when it is strictly feasible;
/// otherwise a Chebyshev centre is found by linear programming, which also
/// distinguishes empty intersections from unbounded ones.
pub fn intersect_halfspaces(hs: &[Halfspace]) -> Result<Polytope, ConvexError> {
    if hs.len() < 4 {
        return Err(ConvexError::Unbounded);
    }
    let scale = hs
        .iter()
        .map(|h| h.offset.abs())
        .fold(0.0, f64::max)
        .max(1.0);
    let center = if hs.iter().all(|h| h.offset > 1e-12 * scale) {
        Vec3::zeros()
    } else {
        chebyshev_center(hs)?
    };
    let dual: Vec<Vec3> = hs
        .iter()
        .map(|h| h.normal / (h.offset - h.normal.dot(&center)))
        .collect();
    let dual_body = hull::hull_any(&dual)?;
    if dual_body.is_degenerate() {
        return Err(ConvexError::Unbounded);
    }
    let dual_scale = dual_body.circumradius();
    let mut verts = Vec::with_capacity(dual_body.facets().len());
    for f in dual_body.facets() {
        if f.offset <= 1e-12 * dual_scale {
            return Err(ConvexError::Unbounded);
        }
        verts.push(f.normal / f.offset + center);
    }
    convex_hull(&verts)
}

fn chebyshev_center(hs: &[Halfspace]) -> Result<Vec3, ConvexError> {
    use minilp::{ComparisonOp, OptimizationDirection, Problem};
    let mut pb = Problem::new(OptimizationDirection::Maximize);
    let x: Vec<_> = (0..3)
        .map(|_| pb.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    let r = pb.add_var(1.0, (0.0, 1.0));
    for h in hs {
        pb.add_constraint(
            [
                (x[0], h.normal.x),
                (x[1], h.normal.y),
                (x[2], h.normal.z),
                (r, 1.0),
            ],
            ComparisonOp::Le,
            h.offset,
        );
    }
    match pb.solve() {
        Ok(sol) => {
            if sol[r] <= 1e-10 {
                Err(ConvexError::Empty)
            } else {
                Ok(Vec3::new(sol[x[0]], sol[x[1]], sol[x[2]]))
            }
        }
        Err(minilp::Error::Infeasible) => Err(ConvexError::Empty),
        Err(minilp::Error::Unbounded) => Err(ConvexError::Unbounded),
    }
}

/// Minkowski sum as the hull of pairwise vertex sums. May be degenerate.
pub fn minkowski_sum(p: &Polytope, q: &Polytope) -> Result<Polytope, ConvexError> {
    let mut pts = Vec::with_capacity(p.vertices.len() * q.vertices.len());
    for a in &p.vertices {
        for b in &q.vertices {
            pts.push(a + b);
        }
    }
    hull::hull_any(&pts)
}

/// Support function `h_P(nu) = max_{v in P} <v, nu>`.
pub fn support(p: &Polytope, nu: &Vec3) -> f64 {
    p.vertices
        .iter()
        .map(|v| v.dot(nu))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Polar body `{z : <z, v> <= 1 for all v in P}`.
pub fn polar(p: &Polytope) -> Result<Polytope, ConvexError> {
    if p.is_degenerate() {
        return Err(ConvexError::OriginNotInterior);
    }
    let r = p.circumradius();
    if p.inradius_about_origin() <= 1e-12 * r {
        return Err(ConvexError::OriginNotInterior);
    }
    let hs = p
        .vertices
        .iter()
        .map(|v| Halfspace::new(*v, 1.0))
        .collect::<Result<Vec<_>, _>>()?;
    intersect_halfspaces(&hs)
}

/// Gauge (Minkowski functional) of a body with the origin in its interior:
/// the smallest `t >= 0` with `z in t P`.
pub fn gauge(p: &Polytope, z: &Vec3) -> f64 {
    p.facets
        .iter()
        .map(|f| f.normal.dot(z) / f.offset)
        .fold(0.0, f64::max)
}

/// Segment `[-a, a]`, the body whose support function is `|<a, .>|`.
pub fn symmetric_segment(a: &Vec3) -> Polytope {
    if a.norm() == 0.0 {
        Polytope::degenerate(vec![Vec3::zeros()], 0)
    } else {
        Polytope::degenerate(vec![-a, *a], 1)
    }
}
