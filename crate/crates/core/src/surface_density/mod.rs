//! Homogenized surface energy densities and their polar functions.
//!
//! Three independent routes evaluate `phi`: closed forms for FCC and HCP,
//! the periodic cell formula ([`cell`]), and finite-window minimum cuts
//! ([`mincut`]).

pub mod cell;
pub mod maxflow;
pub mod mincut;

pub use cell::{density_from_lattice, phi_cell_formula, CellFormulaProblem};
pub use mincut::{phi_window_mincut, BondCharging, MincutOptions, MincutResult};

use thiserror::Error;

use crate::convex::{intersect_halfspaces, ConvexError, Halfspace, Polytope};
use crate::geometry::{vec3, Vec3};
use crate::lattice::{hcp_vectors, LatticeError};

/// Largest number of linear pieces enumerated when building `{phi <= 1}`.
const MAX_COMBINATIONS: usize = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("density is degenerate (vanishes on some direction)")]
    Degenerate,
    #[error("max-term group {0} is empty")]
    EmptyGroup(usize),
    #[error("non-finite coefficient in density")]
    NonFinite,
    #[error("too many linear pieces ({0}) to enumerate")]
    TooManyPieces(usize),
    #[error("window side T = {0} is below the minimum of 10")]
    WindowTooSmall(f64),
    #[error("boundary layer {layer} leaves no interior sites in a window of side {t}")]
    NoInteriorSites { t: f64, layer: f64 },
    #[error("exact polyhedral form needs at most 2 sublattices, got {0}")]
    TooManySublattices(usize),
    #[error("direction must be nonzero and finite")]
    BadDirection,
    #[error("capacity overflow in min-cut network")]
    CapacityOverflow,
    #[error(transparent)]
    Convex(#[from] ConvexError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// `phi(nu) = sum_i |<a_i, nu>| + sum_j max_k <c_jk, nu>`: a sum of support
/// functions of segments `[-a_i, a_i]` and of polytopes `conv{c_jk}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyhedralDensity {
    abs_terms: Vec<Vec3>,
    max_groups: Vec<Vec<Vec3>>,
}

impl PolyhedralDensity {
    pub fn new(abs_terms: Vec<Vec3>, max_groups: Vec<Vec<Vec3>>) -> Result<Self, DensityError> {
        for (j, g) in max_groups.iter().enumerate() {
            if g.is_empty() {
                return Err(DensityError::EmptyGroup(j));
            }
        }
        let finite = abs_terms
            .iter()
            .chain(max_groups.iter().flatten())
            .all(|v| v.iter().all(|c| c.is_finite()));
        if !finite {
            return Err(DensityError::NonFinite);
        }
        Ok(Self {
            abs_terms,
            max_groups,
        })
    }

    /// The six-term FCC density.
    pub fn fcc() -> Self {
        let a = [
            vec3(1.0, 1.0, 0.0),
            vec3(1.0, 0.0, 1.0),
            vec3(0.0, 1.0, 1.0),
            vec3(1.0, -1.0, 0.0),
            vec3(1.0, 0.0, -1.0),
            vec3(0.0, 1.0, -1.0),
        ];
        Self::new(a.to_vec(), Vec::new()).expect("valid")
    }

    /// The HCP density: four absolute-value terms plus one max group.
    pub fn hcp() -> Self {
        let ([e1, e2, e3], _) = hcp_vectors();
        let s2 = 2f64.sqrt();
        let abs = vec![e1 * s2, e2 * s2, (e1 - e2) * s2, e3 / s2];
        let mut group = Vec::new();
        for v in [e1, e2, e3, e1 - e2] {
            group.push(v * s2);
            group.push(-v * s2);
        }
        Self::new(abs, vec![group]).expect("valid")
    }

    /// `||nu||_1`, whose Wulff shape is the cube `[-1, 1]^3`.
    pub fn l1() -> Self {
        Self::new(
            vec![
                vec3(1.0, 0.0, 0.0),
                vec3(0.0, 1.0, 0.0),
                vec3(0.0, 0.0, 1.0),
            ],
            Vec::new(),
        )
        .expect("valid")
    }

    pub fn abs_terms(&self) -> &[Vec3] {
        &self.abs_terms
    }

    pub fn max_groups(&self) -> &[Vec<Vec3>] {
        &self.max_groups
    }

    pub fn eval(&self, nu: &Vec3) -> f64 {
        let a: f64 = self.abs_terms.iter().map(|v| v.dot(nu).abs()).sum();
        let m: f64 = self
            .max_groups
            .iter()
            .map(|g| {
                g.iter()
                    .map(|c| c.dot(nu))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .sum();
        a + m
    }

    /// All vectors `sum_i s_i a_i + sum_j c_{j k_j}`; `phi` is the maximum of
    /// `<g, .>` over them.
    pub fn linear_pieces(&self) -> Result<Vec<Vec3>, DensityError> {
        let mut count: usize = 1;
        for _ in &self.abs_terms {
            count = count.saturating_mul(2);
        }
        for g in &self.max_groups {
            count = count.saturating_mul(g.len());
        }
        if count > MAX_COMBINATIONS {
            return Err(DensityError::TooManyPieces(count));
        }
        let mut acc = vec![Vec3::zeros()];
        for a in &self.abs_terms {
            let mut next = Vec::with_capacity(acc.len() * 2);
            for v in &acc {
                next.push(v + a);
                next.push(v - a);
            }
            acc = dedup_vectors(next);
        }
        for g in &self.max_groups {
            let mut next = Vec::with_capacity(acc.len() * g.len());
            for v in &acc {
                for c in g {
                    next.push(v + c);
                }
            }
            acc = dedup_vectors(next);
        }
        Ok(acc)
    }

    /// The unit ball `{phi <= 1}`, built directly from the linear pieces.
    pub fn unit_ball(&self) -> Result<Polytope, DensityError> {
        let pieces = self.linear_pieces()?;
        let mut hs = Vec::with_capacity(pieces.len());
        for g in pieces {
            if g.norm() > 0.0 {
                hs.push(Halfspace::new(g, 1.0)?);
            }
        }
        match intersect_halfspaces(&hs) {
            Ok(p) => Ok(p),
            Err(ConvexError::Unbounded) => Err(DensityError::Degenerate),
            Err(e) => Err(e.into()),
        }
    }

    /// Multiplies every term by `s > 0`.
    pub fn scaled(&self, s: f64) -> PolyhedralDensity {
        PolyhedralDensity {
            abs_terms: self.abs_terms.iter().map(|a| a * s).collect(),
            max_groups: self
                .max_groups
                .iter()
                .map(|g| g.iter().map(|c| c * s).collect())
                .collect(),
        }
    }
}

fn dedup_vectors(mut v: Vec<Vec3>) -> Vec<Vec3> {
    let key = |p: &Vec3| {
        [
            (p.x * 1e9).round() as i64,
            (p.y * 1e9).round() as i64,
            (p.z * 1e9).round() as i64,
        ]
    };
    v.sort_by_key(key);
    v.dedup_by(|a, b| key(a) == key(b));
    v
}

/// Evaluates `phi°(z) = sup <nu, z> / phi(nu)` as the support function of
/// the precomputed unit ball `{phi <= 1}`.
#[derive(Debug, Clone)]
pub struct PolarFunction {
    unit_ball: Polytope,
}

impl PolarFunction {
    pub fn new(phi: &PolyhedralDensity) -> Result<Self, DensityError> {
        Ok(Self {
            unit_ball: phi.unit_ball()?,
        })
    }

    pub fn eval(&self, z: &Vec3) -> f64 {
        self.unit_ball
            .vertices()
            .iter()
            .map(|v| v.dot(z))
            .fold(0.0, f64::max)
    }

    pub fn unit_ball(&self) -> &Polytope {
        &self.unit_ball
    }
}

/// One-shot numeric polar; build a [`PolarFunction`] for repeated queries.
pub fn polar_numeric(phi: &PolyhedralDensity, z: &Vec3) -> Result<f64, DensityError> {
    Ok(PolarFunction::new(phi)?.eval(z))
}

/// Nondegeneracy constants `c <= phi <= C` on the unit sphere: the inradius
/// and circumradius about the origin of the unit ball's polar, i.e. of the
/// Wulff shape built from the linear pieces.
pub fn nondegeneracy_constants(phi: &PolyhedralDensity) -> Result<(f64, f64), DensityError> {
    let ball = phi.unit_ball()?;
    // phi(nu) = 1 / rho(nu) where rho is the radial function of the ball
    let c_low = 1.0 / ball.circumradius();
    let c_high = 1.0 / ball.inradius_about_origin();
    if !(c_low > 0.0) || !c_high.is_finite() {
        return Err(DensityError::Degenerate);
    }
    Ok((c_low, c_high))
}

/// `|nu1+nu2| + |nu1+nu3| + |nu2+nu3| + |nu1-nu2| + |nu1-nu3| + |nu2-nu3|`.
pub fn phi_fcc(nu: &Vec3) -> f64 {
    let (a, b, c) = (nu.x, nu.y, nu.z);
    (a + b).abs() + (a + c).abs() + (b + c).abs() + (a - b).abs() + (a - c).abs() + (b - c).abs()
}

pub fn phi_hcp(nu: &Vec3) -> f64 {
    let ([e1, e2, e3], _) = hcp_vectors();
    let s2 = 2f64.sqrt();
    let p1 = e1.dot(nu).abs();
    let p2 = e2.dot(nu).abs();
    let p12 = (e1 - e2).dot(nu).abs();
    let p3 = e3.dot(nu).abs();
    s2 * (p1 + p2 + p12) + p3 / s2 + s2 * p1.max(p2).max(p3).max(p12)
}

/// `max{||z||_inf / 4, ||z||_1 / 6}`.
pub fn polar_fcc(z: &Vec3) -> f64 {
    let inf = z.x.abs().max(z.y.abs()).max(z.z.abs());
    let one = z.x.abs() + z.y.abs() + z.z.abs();
    (inf / 4.0).max(one / 6.0)
}

pub fn polar_hcp(z: &Vec3) -> f64 {
    let (s2, s3, s6) = (2f64.sqrt(), 3f64.sqrt(), 6f64.sqrt());
    let (a, b, c) = (z.x.abs(), z.y.abs(), z.z.abs());
    let t1 = 2.0 / (7.0 * s2) * (a + b / s3 + 3.0 / (2.0 * s6) * c);
    let t2 = c / (2.0 * s3);
    let t3 = 2.0 / (3.0 * s6) * b;
    let t4 = 4.0 / (7.0 * s6) * b + 3.0 / (14.0 * s3) * c;
    let t5 = (a + b / s3) / (3.0 * s2);
    t1.max(t2).max(t3).max(t4).max(t5)
}

/// The breakpoints of `g_nu(t) = sum_beta |t - beta|` in increasing order.
pub fn g_nu_breakpoints(nu: &Vec3) -> [f64; 6] {
    let ([e1, e2, e3], _) = hcp_vectors();
    let mut b = [
        0.0,
        e1.dot(nu),
        e2.dot(nu),
        e3.dot(nu),
        (e3 + e1).dot(nu),
        (e3 + e2).dot(nu),
    ];
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b
}

pub fn g_nu(nu: &Vec3, t: f64) -> f64 {
    g_nu_breakpoints(nu).iter().map(|b| (t - b).abs()).sum()
}

/// Exact minimum of `g_nu` over its breakpoints, with the smallest minimizing
/// breakpoint.
pub fn g_nu_min(nu: &Vec3) -> (f64, f64) {
    let bps = g_nu_breakpoints(nu);
    let scale = bps.iter().map(|b| b.abs()).fold(0.0, f64::max);
    let tol = 1e-14 * scale.max(1e-300);
    let mut best = (f64::INFINITY, 0.0);
    for &t in &bps {
        let v = bps.iter().map(|b| (t - b).abs()).sum::<f64>();
        // breakpoints are ascending, so only a strict improvement moves the argmin
        if v < best.0 - tol {
            best = (v, t);
        }
    }
    if scale == 0.0 {
        return (0.0, 0.0);
    }
    best
}

/// Right-hand side of the closed-form identity for `min g_nu`.
pub fn g_nu_min_closed(nu: &Vec3) -> f64 {
    let ([e1, e2, e3], _) = hcp_vectors();
    let p3 = e3.dot(nu).abs();
    let m = e1
        .dot(nu)
        .abs()
        .max(e2.dot(nu).abs())
        .max((e1 - e2).dot(nu).abs())
        .max(p3);
    p3 + 2.0 * m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::random_unit;
    use crate::symmetry::{fcc_point_group, hcp_point_group};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn closed_form_values() {
        let s3 = 3f64.sqrt();
        assert_eq!(phi_fcc(&vec3(1.0, 0.0, 0.0)), 4.0);
        assert!((phi_fcc(&(vec3(1.0, 1.0, 1.0) / s3)) - 2.0 * s3).abs() < 1e-14);
        assert_eq!(phi_fcc(&Vec3::zeros()), 0.0);
        assert!((phi_hcp(&vec3(0.0, 0.0, 1.0)) - 2.0 * s3).abs() < 1e-14);
        assert!((phi_hcp(&vec3(1.0, 0.0, 0.0)) - 3.0 * 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(phi_hcp(&Vec3::zeros()), 0.0);
        assert!((polar_fcc(&vec3(4.0, 0.0, 0.0)) - 1.0).abs() < 1e-15);
        assert!((polar_fcc(&vec3(2.0, 2.0, 2.0)) - 1.0).abs() < 1e-15);
        assert!((polar_hcp(&vec3(0.0, 0.0, 2.0 * s3)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn density_struct_matches_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (f, h) = (PolyhedralDensity::fcc(), PolyhedralDensity::hcp());
        for _ in 0..1000 {
            let nu = random_unit(&mut rng);
            assert!((f.eval(&nu) - phi_fcc(&nu)).abs() < 1e-12);
            assert!((h.eval(&nu) - phi_hcp(&nu)).abs() < 1e-12);
        }
    }

    #[test]
    fn g_nu_identity_and_dense_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let nu = random_unit(&mut rng);
            let (v, t) = g_nu_min(&nu);
            assert!((v - g_nu_min_closed(&nu)).abs() < 1e-12);
            assert!((g_nu(&nu, t) - v).abs() < 1e-12);
        }
        // nu = e_z: breakpoints {0,0,0,h,h,h}; flat minimum 3h on [0, h]
        let nu = vec3(0.0, 0.0, 1.0);
        let (v, t) = g_nu_min(&nu);
        let h = 2.0 * 6f64.sqrt() / 3.0;
        let bps = g_nu_breakpoints(&nu);
        let (lo, hi) = (bps[0] - 1.0, bps[5] + 1.0);
        let scan = (0..=200_000)
            .map(|i| g_nu(&nu, lo + (hi - lo) * i as f64 / 200_000.0))
            .fold(f64::INFINITY, f64::min);
        assert!((v - scan).abs() < 1e-9);
        assert!((v - 3.0 * h).abs() < 1e-14);
        assert_eq!(t, 0.0);
        assert_eq!(g_nu_min(&Vec3::zeros()), (0.0, 0.0));
    }

    #[test]
    fn polar_numeric_matches_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pf = PolarFunction::new(&PolyhedralDensity::fcc()).unwrap();
        let ph = PolarFunction::new(&PolyhedralDensity::hcp()).unwrap();
        for _ in 0..1000 {
            let z = random_unit(&mut rng) * 3.0;
            assert!((pf.eval(&z) - polar_fcc(&z)).abs() < 1e-9);
            assert!((ph.eval(&z) - polar_hcp(&z)).abs() < 1e-9);
        }
        assert_eq!(pf.eval(&Vec3::zeros()), 0.0);
    }

    #[test]
    fn homogeneity_evenness_convexity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for phi in [PolyhedralDensity::fcc(), PolyhedralDensity::hcp()] {
            for _ in 0..200 {
                let a = random_unit(&mut rng);
                let b = random_unit(&mut rng);
                let lam = 0.37;
                assert!((phi.eval(&(a * 2.5)) - 2.5 * phi.eval(&a)).abs() < 1e-12);
                assert!((phi.eval(&-a) - phi.eval(&a)).abs() < 1e-12);
                let mid = phi.eval(&(a * lam + b * (1.0 - lam)));
                assert!(mid <= lam * phi.eval(&a) + (1.0 - lam) * phi.eval(&b) + 1e-12);
            }
        }
    }

    #[test]
    fn point_group_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (gf, gh) = (fcc_point_group(), hcp_point_group());
        for _ in 0..200 {
            let nu = random_unit(&mut rng);
            for g in &gf {
                assert!((phi_fcc(&(g * nu)) - phi_fcc(&nu)).abs() < 1e-12);
                assert!((polar_fcc(&(g * nu)) - polar_fcc(&nu)).abs() < 1e-12);
            }
            for g in &gh {
                assert!((phi_hcp(&(g * nu)) - phi_hcp(&nu)).abs() < 1e-12);
                assert!((polar_hcp(&(g * nu)) - polar_hcp(&nu)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn nondegeneracy_bounds() {
        let (c, big_c) = nondegeneracy_constants(&PolyhedralDensity::fcc()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let v = phi_fcc(&random_unit(&mut rng));
            assert!(v >= c - 1e-12 && v <= big_c + 1e-12);
        }
        // the FCC minimum 2*sqrt(3) is attained on (1,1,1)
        assert!((c - 2.0 * 3f64.sqrt()).abs() < 1e-9);
        let flat =
            PolyhedralDensity::new(vec![vec3(1.0, 0.0, 0.0), vec3(0.0, 1.0, 0.0)], vec![]).unwrap();
        assert_eq!(
            nondegeneracy_constants(&flat),
            Err(DensityError::Degenerate)
        );
    }
}
