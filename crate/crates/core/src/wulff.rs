//! Wulff crystals of polyhedral densities, anisotropic perimeters and the
//! FCC/HCP isoperimetric comparison.

use nalgebra::Matrix3;
use serde::Serialize;
use thiserror::Error;

use crate::convex::{convex_hull_any, minkowski_sum, symmetric_segment, ConvexError, Polytope};
use crate::geometry::{round_sig15, Vec3};
use crate::lattice::{lattice_by_name, LatticeError};
use crate::surface_density::{density_from_lattice, DensityError, PolyhedralDensity};
use crate::symmetry::{fcc_point_group, hcp_point_group, orbit_key};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WulffError {
    #[error("density is degenerate: its Wulff set has dimension {0}")]
    Degenerate(usize),
    #[error(transparent)]
    Convex(#[from] ConvexError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// `W_phi = (+)_i [-a_i, a_i] (+) (+)_j conv{c_jk}`.
///
/// Each term of `phi` is the support function of one summand, so the sum has
/// support function `phi`.
pub fn wulff_shape(phi: &PolyhedralDensity) -> Result<Polytope, WulffError> {
    let mut body = convex_hull_any(&[Vec3::zeros()])?;
    for a in phi.abs_terms() {
        body = minkowski_sum(&body, &symmetric_segment(a))?;
    }
    for g in phi.max_groups() {
        let part = convex_hull_any(g)?;
        body = minkowski_sum(&body, &part)?;
    }
    if body.is_degenerate() {
        return Err(WulffError::Degenerate(body.dimension()));
    }
    Ok(body)
}

/// `sum over facets of phi(outer normal) * area`.
pub fn anisotropic_perimeter(p: &Polytope, phi: &PolyhedralDensity) -> f64 {
    p.facets()
        .iter()
        .map(|f| phi.eval(&f.normal) * f.area)
        .sum()
}

/// Anisotropic perimeter with the density given as a closure.
pub fn anisotropic_perimeter_with(p: &Polytope, phi: impl Fn(&Vec3) -> f64) -> f64 {
    p.facets().iter().map(|f| phi(&f.normal) * f.area).sum()
}

/// `perimeter * |P|^{-2/3}`, invariant under dilation.
pub fn isoperimetric_quotient(p: &Polytope, phi: &PolyhedralDensity) -> f64 {
    anisotropic_perimeter(p, phi) * p.volume().powf(-2.0 / 3.0)
}

/// Predicted limit of `N^{-2/3} min E_N` from the quotient: the limit body
/// carries mass 1 at site density `rho`, i.e. volume `1 / rho`, giving a factor
/// `rho^{-2/3}` (`2^{-1/3}` on FCC and HCP).
pub fn limit_constant(quotient: f64, rho: f64) -> f64 {
    quotient * rho.powf(-2.0 / 3.0)
}

/// One symmetry class of facets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FacetClass {
    /// Normal of the first facet met in this class.
    pub normal: [f64; 3],
    pub multiplicity: usize,
    /// Area of a single facet.
    pub area: f64,
    pub phi: f64,
    /// Number of polygon corners.
    pub corners: usize,
}

#[derive(Debug, Clone)]
pub struct WulffReport {
    pub lattice: String,
    pub density: PolyhedralDensity,
    pub body: Polytope,
    pub volume: f64,
    pub surface_integral: f64,
    pub quotient: f64,
    pub limit_constant: f64,
    /// Orbit index of each facet of `body`, into `census`.
    pub facet_orbits: Vec<usize>,
    pub census: Vec<FacetClass>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FacetRecord {
    pub normal: [f64; 3],
    pub area: f64,
    pub phi: f64,
    pub orbit: usize,
}

/// Machine form of [`WulffReport`], rounded to 15 significant digits.
#[derive(Debug, Clone, Serialize)]
pub struct WulffReportDump {
    pub lattice: String,
    pub volume: f64,
    pub surface_integral: f64,
    pub quotient: f64,
    pub limit_constant: f64,
    pub facets: Vec<FacetRecord>,
    pub census: Vec<FacetClass>,
}

impl WulffReport {
    pub fn dump(&self) -> WulffReportDump {
        let r3 = |v: &Vec3| [round_sig15(v.x), round_sig15(v.y), round_sig15(v.z)];
        let facets = self
            .body
            .facets()
            .iter()
            .zip(&self.facet_orbits)
            .map(|(f, &orbit)| FacetRecord {
                normal: r3(&f.normal),
                area: round_sig15(f.area),
                phi: round_sig15(self.density.eval(&f.normal)),
                orbit,
            })
            .collect();
        let census = self
            .census
            .iter()
            .map(|c| FacetClass {
                normal: c.normal.map(round_sig15),
                area: round_sig15(c.area),
                phi: round_sig15(c.phi),
                ..c.clone()
            })
            .collect();
        WulffReportDump {
            lattice: self.lattice.clone(),
            volume: round_sig15(self.volume),
            surface_integral: round_sig15(self.surface_integral),
            quotient: round_sig15(self.quotient),
            limit_constant: round_sig15(self.limit_constant),
            facets,
            census,
        }
    }
}

/// Report for `fcc`, `hcp` or `file:PATH` (at most two sublattices).
pub fn wulff_report(lattice: &str) -> Result<WulffReport, WulffError> {
    let spec = lattice_by_name(lattice)?;
    let (density, group) = match spec.name() {
        "fcc" => (PolyhedralDensity::fcc(), fcc_point_group()),
        "hcp" => (PolyhedralDensity::hcp(), hcp_point_group()),
        _ => {
            let d = density_from_lattice(&spec)?;
            let g = invariance_group(&d);
            (d, g)
        }
    };
    report_for(spec.name(), density, &group, spec.density_rho())
}

/// Builds the report for an explicit density and symmetry group.
pub fn report_for(
    name: &str,
    density: PolyhedralDensity,
    group: &[Matrix3<f64>],
    rho: f64,
) -> Result<WulffReport, WulffError> {
    let body = wulff_shape(&density)?;
    let volume = body.volume();
    let surface_integral = anisotropic_perimeter(&body, &density);
    let quotient = surface_integral * volume.powf(-2.0 / 3.0);
    let mut keys: Vec<[i64; 3]> = Vec::new();
    let mut census: Vec<FacetClass> = Vec::new();
    let mut facet_orbits = Vec::with_capacity(body.facets().len());
    for f in body.facets() {
        let key = orbit_key(group, &f.normal);
        let idx = match keys.iter().position(|k| *k == key) {
            Some(i) => {
                census[i].multiplicity += 1;
                i
            }
            None => {
                keys.push(key);
                census.push(FacetClass {
                    normal: [f.normal.x, f.normal.y, f.normal.z],
                    multiplicity: 1,
                    area: f.area,
                    phi: density.eval(&f.normal),
                    corners: f.vertices.len(),
                });
                keys.len() - 1
            }
        };
        facet_orbits.push(idx);
    }
    Ok(WulffReport {
        lattice: name.to_string(),
        density,
        body,
        volume,
        surface_integral,
        quotient,
        limit_constant: limit_constant(quotient, rho),
        facet_orbits,
        census,
    })
}

/// Signed permutations and `D_6h` elements that leave `phi` unchanged,
/// tested on a few generic directions.
pub fn invariance_group(phi: &PolyhedralDensity) -> Vec<Matrix3<f64>> {
    let probes: Vec<Vec3> = [
        Vec3::new(0.3, 0.5, 0.8),
        Vec3::new(-0.7, 0.2, 0.1),
        Vec3::new(0.11, -0.9, 0.35),
        Vec3::new(0.6, 0.6, -0.2),
    ]
    .to_vec();
    let mut out: Vec<Matrix3<f64>> = Vec::new();
    for g in fcc_point_group().into_iter().chain(hcp_point_group()) {
        let keeps = probes
            .iter()
            .all(|v| (phi.eval(&(g * v)) - phi.eval(v)).abs() <= 1e-9 * (1.0 + phi.eval(v)));
        if keeps && !out.iter().any(|q| (q - g).abs().max() < 1e-9) {
            out.push(g);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeComparison {
    pub m_fcc: f64,
    pub m_hcp: f64,
    /// `m_hcp - m_fcc`.
    pub difference: f64,
    pub limit_fcc: f64,
    pub limit_hcp: f64,
    /// Lattice with the smaller quotient.
    pub verdict: String,
}

impl LatticeComparison {
    pub fn rounded(&self) -> LatticeComparison {
        LatticeComparison {
            m_fcc: round_sig15(self.m_fcc),
            m_hcp: round_sig15(self.m_hcp),
            difference: round_sig15(self.difference),
            limit_fcc: round_sig15(self.limit_fcc),
            limit_hcp: round_sig15(self.limit_hcp),
            verdict: self.verdict.clone(),
        }
    }
}

/// Isoperimetric quotients of both Wulff crystals.
pub fn compare_lattices() -> Result<LatticeComparison, WulffError> {
    let (fcc, hcp) = rayon::join(|| wulff_report("fcc"), || wulff_report("hcp"));
    let (fcc, hcp) = (fcc?, hcp?);
    Ok(LatticeComparison {
        m_fcc: fcc.quotient,
        m_hcp: hcp.quotient,
        difference: hcp.quotient - fcc.quotient,
        limit_fcc: fcc.limit_constant,
        limit_hcp: hcp.limit_constant,
        verdict: if fcc.quotient < hcp.quotient {
            "fcc"
        } else {
            "hcp"
        }
        .to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::support;
    use crate::geometry::{random_unit, vec3};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn l1_gives_the_cube() {
        let w = wulff_shape(&PolyhedralDensity::l1()).unwrap();
        assert_eq!(w.vertices().len(), 8);
        assert!((w.volume() - 8.0).abs() < 1e-12);
        assert!(w
            .vertices()
            .iter()
            .all(|v| v.iter().all(|c| (c.abs() - 1.0).abs() < 1e-12)));
    }

    #[test]
    fn fcc_shape_and_support() {
        let phi = PolyhedralDensity::fcc();
        let w = wulff_shape(&phi).unwrap();
        assert_eq!(w.facets().len(), 14);
        assert_eq!(w.vertices().len(), 24);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let nu = random_unit(&mut rng);
            assert!((support(&w, &nu) - phi.eval(&nu)).abs() < 1e-9);
        }
    }

    #[test]
    fn fcc_census() {
        let r = wulff_report("fcc").unwrap();
        assert!((r.volume - 256.0).abs() < 1e-9);
        assert!((r.surface_integral - 768.0).abs() < 1e-9);
        let mut classes: Vec<(usize, usize)> = r
            .census
            .iter()
            .map(|c| (c.corners, c.multiplicity))
            .collect();
        classes.sort();
        assert_eq!(classes, vec![(4, 6), (6, 8)]);
        for c in &r.census {
            if c.corners == 4 {
                assert!((c.area - 8.0).abs() < 1e-9 && (c.phi - 4.0).abs() < 1e-9);
            } else {
                assert!((c.area - 12.0 * 3f64.sqrt()).abs() < 1e-9);
                assert!((c.phi - 2.0 * 3f64.sqrt()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn hcp_census() {
        let r = wulff_report("hcp").unwrap();
        assert!((r.volume - 260.0).abs() < 1e-9);
        assert!((r.surface_integral - 780.0).abs() < 1e-9);
        assert_eq!(r.body.facets().len(), 20);
        let mut classes: Vec<(usize, usize)> = r
            .census
            .iter()
            .map(|c| (c.corners, c.multiplicity))
            .collect();
        classes.sort();
        // the pi/3 rotation joins the 2 + 4 rectangles and the 4 + 8 trapezoids
        assert_eq!(classes, vec![(4, 6), (4, 12), (6, 2)]);
    }

    #[test]
    fn comparison_verdict() {
        let c = compare_lattices().unwrap();
        assert!((c.m_fcc - 12.0 * 2f64.powf(2.0 / 3.0)).abs() < 1e-9);
        assert!((c.m_hcp - 3.0 * 2f64.powf(2.0 / 3.0) * 65f64.powf(1.0 / 3.0)).abs() < 1e-9);
        assert!((c.limit_fcc - 12.0 * 2f64.powf(1.0 / 3.0)).abs() < 1e-9);
        assert!((c.limit_hcp - 3.0 * 130f64.powf(1.0 / 3.0)).abs() < 1e-9);
        assert_eq!(c.verdict, "fcc");
    }

    #[test]
    fn euclidean_perimeter_of_unit_cube() {
        let pts: Vec<Vec3> = (0..8)
            .map(|i| vec3((i & 1) as f64, (i >> 1 & 1) as f64, (i >> 2 & 1) as f64))
            .collect();
        let cube = convex_hull_any(&pts).unwrap();
        assert!((anisotropic_perimeter_with(&cube, |n| n.norm()) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn invariance_group_of_fcc_density() {
        assert_eq!(invariance_group(&PolyhedralDensity::fcc()).len(), 48);
        assert_eq!(invariance_group(&PolyhedralDensity::hcp()).len(), 24);
    }
}
