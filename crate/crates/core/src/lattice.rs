//! Periodic point sets with explicit unit-distance neighbour stencils.
//!
//! A lattice is `span_Z{e_1, e_2, e_3} + {o_0, ..., o_{k-1}}`; sites are
//! addressed by an integer cell and a sublattice index.

use std::fmt;
use std::path::Path;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{complete_frame, vec3, Vec3};

/// Tolerance for exact algebraic identities such as unit bond lengths.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for lattice membership tests after accumulated arithmetic.
pub const MEMBER_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("degenerate basis (|det| = {0:e})")]
    DegenerateBasis(f64),
    #[error("lattice needs at least one sublattice offset")]
    NoOffsets,
    #[error("invalid sublattice index {0}")]
    InvalidSublattice(usize),
    #[error("stencil vector {vector:?} of sublattice {sub} has norm {norm}, expected 1")]
    StencilNorm {
        sub: usize,
        vector: [f64; 3],
        norm: f64,
    },
    #[error("stencil vector {vector:?} of sublattice {sub} does not land on a lattice site")]
    OffLattice { sub: usize, vector: [f64; 3] },
    #[error("stencil is not symmetric: {vector:?} from sublattice {from} has no reverse in sublattice {to}")]
    Asymmetric {
        from: usize,
        to: usize,
        vector: [f64; 3],
    },
    #[error("stencil of sublattice {sub} lists {listed} vectors but {found} lattice sites lie at distance 1")]
    StencilMismatch {
        sub: usize,
        listed: usize,
        found: usize,
    },
    #[error("bond weights must be finite and positive")]
    BadWeight,
    #[error("region is unbounded")]
    Unbounded,
    #[error("lattice file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("cannot read lattice file: {0}")]
    Io(String),
    #[error("unknown lattice '{0}' (expected fcc, hcp or file:PATH)")]
    Unknown(String),
}

/// Site address: integer cell coefficients plus sublattice index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SiteId {
    pub cell: [i64; 3],
    pub sub: usize,
}

impl SiteId {
    pub fn new(cell: [i64; 3], sub: usize) -> Self {
        Self { cell, sub }
    }

    pub fn shifted(&self, shift: [i64; 3]) -> Self {
        Self {
            cell: [
                self.cell[0] + shift[0],
                self.cell[1] + shift[1],
                self.cell[2] + shift[2],
            ],
            sub: self.sub,
        }
    }
}

impl fmt::Display for SiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}; {})",
            self.cell[0], self.cell[1], self.cell[2], self.sub
        )
    }
}

/// One stencil entry: displacement, the cell shift and sublattice it lands on,
/// and the bond weight `c_nn`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bond {
    pub d: Vec3,
    pub shift: [i64; 3],
    pub target: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissibilityConstants {
    /// Minimal pair separation.
    pub r: f64,
    /// Certified upper bound on the covering radius.
    pub big_r: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    name: String,
    basis: [Vec3; 3],
    inv: Matrix3<f64>,
    offsets: Vec<Vec3>,
    stencils: Vec<Vec<Bond>>,
    max_coordination: usize,
}

/// FCC basis vectors `b_1, b_2, b_3`.
pub fn fcc_basis() -> [Vec3; 3] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [vec3(s, s, 0.0), vec3(s, 0.0, s), vec3(0.0, s, s)]
}

/// HCP periodicity vectors `e_1, e_2, e_3` and the shift `v_1`.
pub fn hcp_vectors() -> ([Vec3; 3], Vec3) {
    let e1 = vec3(1.0, 0.0, 0.0);
    let e2 = vec3(0.5, 3f64.sqrt() / 2.0, 0.0);
    let e3 = vec3(0.0, 0.0, 2.0 * 6f64.sqrt() / 3.0);
    let v1 = (e1 + e2) / 3.0 + e3 / 2.0;
    ([e1, e2, e3], v1)
}

pub fn make_fcc() -> LatticeSpec {
    let [b1, b2, b3] = fcc_basis();
    let mut st = Vec::new();
    for d in [b1, b2, b3, b1 - b2, b1 - b3, b2 - b3] {
        st.push(d);
        st.push(-d);
    }
    LatticeSpec::new("fcc", fcc_basis(), vec![Vec3::zeros()], vec![st], 12)
        .expect("FCC definition is valid")
}

pub fn make_hcp() -> LatticeSpec {
    let ([e1, e2, e3], v1) = hcp_vectors();
    let mut s0 = Vec::new();
    let mut s1 = Vec::new();
    for d in [e1, e2, e1 - e2] {
        s0.push(d);
        s0.push(-d);
        s1.push(d);
        s1.push(-d);
    }
    for d in [v1, v1 - e1, v1 - e2, v1 - e3, v1 - e1 - e3, v1 - e2 - e3] {
        s0.push(d);
        s1.push(-d);
    }
    LatticeSpec::new(
        "hcp",
        [e1, e2, e3],
        vec![Vec3::zeros(), v1],
        vec![s0, s1],
        12,
    )
    .expect("HCP definition is valid")
}

/// Simple cubic lattice `Z^3` with its six axis neighbours.
pub fn make_cubic() -> LatticeSpec {
    let mut st = Vec::new();
    for k in 0..3 {
        let mut e = Vec3::zeros();
        e[k] = 1.0;
        st.push(e);
        st.push(-e);
    }
    LatticeSpec::new(
        "cubic",
        [
            vec3(1.0, 0.0, 0.0),
            vec3(0.0, 1.0, 0.0),
            vec3(0.0, 0.0, 1.0),
        ],
        vec![Vec3::zeros()],
        vec![st],
        6,
    )
    .expect("cubic definition is valid")
}

/// Resolves `fcc`, `hcp` or `file:PATH`.
pub fn lattice_by_name(sel: &str) -> Result<LatticeSpec, LatticeError> {
    match sel {
        "fcc" => Ok(make_fcc()),
        "hcp" => Ok(make_hcp()),
        "cubic" => Ok(make_cubic()),
        _ => match sel.strip_prefix("file:") {
            Some(path) => LatticeSpec::from_file(Path::new(path)),
            None => Err(LatticeError::Unknown(sel.to_string())),
        },
    }
}

impl LatticeSpec {
    /// Builds and validates a lattice. Every stencil vector must have unit
    /// norm, land on a lattice site, have its reverse in the target
    /// sublattice's stencil, and the stencils must list exactly the sites at
    /// distance 1 found by brute force in a 5x5x5 block of cells.
    pub fn new(
        name: &str,
        basis: [Vec3; 3],
        offsets: Vec<Vec3>,
        stencils: Vec<Vec<Vec3>>,
        max_coordination: usize,
    ) -> Result<Self, LatticeError> {
        let weighted = stencils
            .into_iter()
            .map(|s| s.into_iter().map(|d| (d, 1.0)).collect())
            .collect();
        Self::with_weighted_stencils(name, basis, offsets, weighted, max_coordination)
    }

    pub fn with_weighted_stencils(
        name: &str,
        basis: [Vec3; 3],
        offsets: Vec<Vec3>,
        stencils: Vec<Vec<(Vec3, f64)>>,
        max_coordination: usize,
    ) -> Result<Self, LatticeError> {
        if offsets.is_empty() {
            return Err(LatticeError::NoOffsets);
        }
        if stencils.len() != offsets.len() {
            return Err(LatticeError::InvalidSublattice(stencils.len()));
        }
        let m = Matrix3::from_columns(&basis);
        let det = m.determinant();
        if !(det.abs() > 1e-12) || !det.is_finite() {
            return Err(LatticeError::DegenerateBasis(det));
        }
        let inv = m.try_inverse().ok_or(LatticeError::DegenerateBasis(det))?;
        let mut spec = Self {
            name: name.to_string(),
            basis,
            inv,
            offsets,
            stencils: Vec::new(),
            max_coordination,
        };
        let mut bonds = Vec::with_capacity(stencils.len());
        for (i, st) in stencils.iter().enumerate() {
            let mut list = Vec::with_capacity(st.len());
            for &(d, w) in st {
                let arr = [d.x, d.y, d.z];
                let n = d.norm();
                if (n - 1.0).abs() > EXACT_TOL {
                    return Err(LatticeError::StencilNorm {
                        sub: i,
                        vector: arr,
                        norm: n,
                    });
                }
                if !(w > 0.0) || !w.is_finite() {
                    return Err(LatticeError::BadWeight);
                }
                let p = spec.offsets[i] + d;
                let site = spec.locate(&p).ok_or(LatticeError::OffLattice {
                    sub: i,
                    vector: arr,
                })?;
                list.push(Bond {
                    d,
                    shift: site.cell,
                    target: site.sub,
                    weight: w,
                });
            }
            bonds.push(list);
        }
        spec.stencils = bonds;
        spec.validate_symmetry()?;
        spec.validate_against_brute_force()?;
        Ok(spec)
    }

    fn validate_symmetry(&self) -> Result<(), LatticeError> {
        for (i, st) in self.stencils.iter().enumerate() {
            for b in st {
                let back = self.stencils[b.target]
                    .iter()
                    .find(|c| (c.d + b.d).norm() <= MEMBER_TOL && c.target == i);
                match back {
                    Some(c) if (c.weight - b.weight).abs() <= EXACT_TOL * b.weight.max(1.0) => {}
                    Some(_) => return Err(LatticeError::BadWeight),
                    None => {
                        return Err(LatticeError::Asymmetric {
                            from: i,
                            to: b.target,
                            vector: [b.d.x, b.d.y, b.d.z],
                        })
                    }
                }
            }
        }
        Ok(())
    }

    fn validate_against_brute_force(&self) -> Result<(), LatticeError> {
        for i in 0..self.offsets.len() {
            let found = self.unit_distance_sites(i, 2);
            let st = &self.stencils[i];
            let has_dup = (0..st.len())
                .any(|a| (a + 1..st.len()).any(|b| (st[a].d - st[b].d).norm() <= MEMBER_TOL));
            let all_listed = found
                .iter()
                .all(|f| st.iter().any(|b| (b.d - f).norm() <= MEMBER_TOL));
            if found.len() != st.len() || !all_listed || has_dup {
                return Err(LatticeError::StencilMismatch {
                    sub: i,
                    listed: st.len(),
                    found: found.len(),
                });
            }
        }
        Ok(())
    }

    /// Displacements from sublattice `i` to all sites at distance 1 within
    /// `reach` cells in every direction.
    fn unit_distance_sites(&self, i: usize, reach: i64) -> Vec<Vec3> {
        let mut out = Vec::new();
        for a in -reach..=reach {
            for b in -reach..=reach {
                for c in -reach..=reach {
                    for j in 0..self.offsets.len() {
                        let d = self.position(&SiteId::new([a, b, c], j)) - self.offsets[i];
                        if (d.norm() - 1.0).abs() <= MEMBER_TOL {
                            out.push(d);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn basis(&self) -> &[Vec3; 3] {
        &self.basis
    }

    pub fn offsets(&self) -> &[Vec3] {
        &self.offsets
    }

    pub fn num_sublattices(&self) -> usize {
        self.offsets.len()
    }

    pub fn stencil(&self, sub: usize) -> &[Bond] {
        &self.stencils[sub]
    }

    pub fn max_coordination(&self) -> usize {
        self.max_coordination
    }

    pub fn basis_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_columns(&self.basis)
    }

    /// Volume of the periodicity cell, `|det(e_1, e_2, e_3)|`.
    pub fn cell_volume(&self) -> f64 {
        self.basis_matrix().determinant().abs()
    }

    /// Sites per unit volume.
    pub fn density_rho(&self) -> f64 {
        self.offsets.len() as f64 / self.cell_volume()
    }

    /// Replaces the bond weights, keeping the bond set. The weight function
    /// receives the sublattice and displacement and must be symmetric.
    pub fn with_bond_weights(
        &self,
        w: impl Fn(usize, &Vec3) -> f64,
    ) -> Result<LatticeSpec, LatticeError> {
        let mut out = self.clone();
        for (i, st) in out.stencils.iter_mut().enumerate() {
            for b in st.iter_mut() {
                let v = w(i, &b.d);
                if !(v > 0.0) || !v.is_finite() {
                    return Err(LatticeError::BadWeight);
                }
                b.weight = v;
            }
        }
        out.validate_symmetry()?;
        Ok(out)
    }

    pub fn is_weighted(&self) -> bool {
        self.stencils
            .iter()
            .flatten()
            .any(|b| (b.weight - 1.0).abs() > EXACT_TOL)
    }

    /// Same point set under the unimodular change of basis `e'_j = sum_i m_ij e_i`.
    pub fn rebased(&self, m: [[i64; 3]; 3]) -> Result<LatticeSpec, LatticeError> {
        let mi = Matrix3::from_fn(|r, c| m[r][c] as f64);
        if (mi.determinant().abs() - 1.0).abs() > EXACT_TOL {
            return Err(LatticeError::DegenerateBasis(mi.determinant()));
        }
        let b = self.basis_matrix() * mi;
        let basis = [
            b.column(0).into_owned(),
            b.column(1).into_owned(),
            b.column(2).into_owned(),
        ];
        let stencils = self
            .stencils
            .iter()
            .map(|s| s.iter().map(|x| (x.d, x.weight)).collect())
            .collect();
        Self::with_weighted_stencils(
            &self.name,
            basis,
            self.offsets.clone(),
            stencils,
            self.max_coordination,
        )
    }

    pub fn check_site(&self, id: &SiteId) -> Result<(), LatticeError> {
        if id.sub >= self.offsets.len() {
            Err(LatticeError::InvalidSublattice(id.sub))
        } else {
            Ok(())
        }
    }

    /// Position `sum_k cell_k e_k + offset[sub]`. Panics on an invalid
    /// sublattice; see [`LatticeSpec::site_position`] for the checked form.
    pub fn position(&self, id: &SiteId) -> Vec3 {
        self.basis[0] * id.cell[0] as f64
            + self.basis[1] * id.cell[1] as f64
            + self.basis[2] * id.cell[2] as f64
            + self.offsets[id.sub]
    }

    pub fn site_position(&self, id: &SiteId) -> Result<Vec3, LatticeError> {
        self.check_site(id)?;
        Ok(self.position(id))
    }

    /// The lattice site at `p`, if any (within [`MEMBER_TOL`]).
    pub fn locate(&self, p: &Vec3) -> Option<SiteId> {
        for (j, off) in self.offsets.iter().enumerate() {
            let a = self.inv * (p - off);
            let r = a.map(|x| x.round());
            let id = SiteId::new([r.x as i64, r.y as i64, r.z as i64], j);
            if (self.position(&id) - p).norm() <= MEMBER_TOL {
                return Some(id);
            }
        }
        None
    }

    /// Nearest lattice site to `p`; ties go to the smallest `SiteId`.
    pub fn nearest_site(&self, p: &Vec3) -> SiteId {
        let mut best = SiteId::new([0, 0, 0], 0);
        let mut bd = f64::INFINITY;
        for (j, off) in self.offsets.iter().enumerate() {
            let a = self.inv * (p - off);
            let base = [a.x.floor() as i64, a.y.floor() as i64, a.z.floor() as i64];
            for dx in -1..=2 {
                for dy in -1..=2 {
                    for dz in -1..=2 {
                        let id = SiteId::new([base[0] + dx, base[1] + dy, base[2] + dz], j);
                        let d = (self.position(&id) - p).norm_squared();
                        if d < bd - 1e-15 || ((d - bd).abs() <= 1e-15 && id < best) {
                            bd = d;
                            best = id;
                        }
                    }
                }
            }
        }
        best
    }

    /// The unit-distance neighbours of `id`, in stencil order.
    pub fn neighbors(&self, id: &SiteId) -> Result<Vec<SiteId>, LatticeError> {
        self.check_site(id)?;
        Ok(self.stencils[id.sub]
            .iter()
            .map(|b| SiteId::new(add3(id.cell, b.shift), b.target))
            .collect())
    }

    /// Neighbour of `id` along bond `b` (unchecked).
    #[inline]
    pub fn neighbor_along(&self, id: &SiteId, b: &Bond) -> SiteId {
        SiteId::new(add3(id.cell, b.shift), b.target)
    }

    /// All sites whose positions lie in `region`, sorted by `(cell, sub)`.
    pub fn enumerate_sites(&self, region: &Region) -> Result<Vec<SiteId>, LatticeError> {
        let (c, rad) = region.bounding_ball().ok_or(LatticeError::Unbounded)?;
        let mut out = Vec::new();
        for (j, off) in self.offsets.iter().enumerate() {
            let a = self.inv * (c - off);
            let mut lo = [0i64; 3];
            let mut hi = [0i64; 3];
            for k in 0..3 {
                let row = self.inv.row(k).norm();
                lo[k] = (a[k] - rad * row).floor() as i64 - 1;
                hi[k] = (a[k] + rad * row).ceil() as i64 + 1;
            }
            for x in lo[0]..=hi[0] {
                for y in lo[1]..=hi[1] {
                    for z in lo[2]..=hi[2] {
                        let id = SiteId::new([x, y, z], j);
                        if region.contains(&self.position(&id)) {
                            out.push(id);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// `r`: minimal separation over one cell against its 3x3x3 neighbourhood.
    /// `R`: largest distance to the nearest site over a grid of `n^3` points
    /// in the periodicity cell, plus the grid-cell diameter, so that every
    /// ball of radius `R` contains a site.
    pub fn admissibility_constants(&self) -> AdmissibilityConstants {
        let mut r = f64::INFINITY;
        for (i, oi) in self.offsets.iter().enumerate() {
            for a in -1..=1 {
                for b in -1..=1 {
                    for c in -1..=1 {
                        for j in 0..self.offsets.len() {
                            if a == 0 && b == 0 && c == 0 && i == j {
                                continue;
                            }
                            let d = (self.position(&SiteId::new([a, b, c], j)) - oi).norm();
                            r = r.min(d);
                        }
                    }
                }
            }
        }
        let n = 24;
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let p = self.basis[0] * (a as f64 / n as f64)
                        + self.basis[1] * (b as f64 / n as f64)
                        + self.basis[2] * (c as f64 / n as f64);
                    let s = self.nearest_site(&p);
                    worst = worst.max((self.position(&s) - p).norm());
                }
            }
        }
        let mut diam: f64 = 0.0;
        for s in [
            [1.0, 1.0, 1.0],
            [1.0, 1.0, -1.0],
            [1.0, -1.0, 1.0],
            [-1.0, 1.0, 1.0],
        ] {
            let v = self.basis[0] * s[0] + self.basis[1] * s[1] + self.basis[2] * s[2];
            diam = diam.max(v.norm() / n as f64);
        }
        AdmissibilityConstants {
            r,
            big_r: worst + diam,
        }
    }

    /// Parses the line-oriented lattice file format.
    pub fn parse(text: &str) -> Result<LatticeSpec, LatticeError> {
        let mut name = String::from("custom");
        let mut basis: Vec<Vec3> = Vec::new();
        let mut in_basis = false;
        let mut offsets: Vec<Vec3> = Vec::new();
        let mut stencil_lines: Vec<(usize, usize, Vec3, f64)> = Vec::new();
        let mut maxc: Option<usize> = None;
        for (ln, raw) in text.lines().enumerate() {
            let line_no = ln + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let perr = |msg: &str| LatticeError::Parse {
                line: line_no,
                msg: msg.to_string(),
            };
            if in_basis {
                let v = parse_floats(line).map_err(|m| perr(&m))?;
                if v.len() != 3 {
                    return Err(perr("basis row needs 3 numbers"));
                }
                basis.push(vec3(v[0], v[1], v[2]));
                in_basis = basis.len() < 3;
                continue;
            }
            let (kw, rest) = line
                .split_once(char::is_whitespace)
                .map(|(a, b)| (a, b.trim()))
                .unwrap_or((line, ""));
            match kw {
                "name" => name = rest.to_string(),
                "basis" => {
                    if !basis.is_empty() {
                        return Err(perr("basis given twice"));
                    }
                    in_basis = true;
                }
                "offset" => {
                    let v = parse_floats(rest).map_err(|m| perr(&m))?;
                    if v.len() != 3 {
                        return Err(perr("offset needs 3 numbers"));
                    }
                    offsets.push(vec3(v[0], v[1], v[2]));
                }
                "stencil" => {
                    let (idx, vecs) = rest
                        .split_once(':')
                        .ok_or_else(|| perr("expected 'stencil i: dx dy dz'"))?;
                    let i: usize = idx
                        .trim()
                        .parse()
                        .map_err(|_| perr("bad sublattice index"))?;
                    let v = parse_floats(vecs).map_err(|m| perr(&m))?;
                    let w = match v.len() {
                        3 => 1.0,
                        4 => v[3],
                        _ => {
                            return Err(perr(
                                "stencil entry needs 3 numbers and an optional weight",
                            ))
                        }
                    };
                    stencil_lines.push((line_no, i, vec3(v[0], v[1], v[2]), w));
                }
                "max_coordination" => {
                    maxc = Some(rest.parse().map_err(|_| perr("bad max_coordination"))?);
                }
                _ => return Err(perr(&format!("unknown keyword '{}'", kw))),
            }
        }
        if basis.len() != 3 {
            return Err(LatticeError::Parse {
                line: text.lines().count(),
                msg: "basis needs exactly 3 rows".into(),
            });
        }
        if offsets.is_empty() {
            offsets.push(Vec3::zeros());
        }
        let mut stencils = vec![Vec::new(); offsets.len()];
        for (line, i, d, w) in stencil_lines {
            if i >= offsets.len() {
                return Err(LatticeError::Parse {
                    line,
                    msg: format!("stencil for undeclared sublattice {}", i),
                });
            }
            stencils[i].push((d, w));
        }
        let maxc = maxc.unwrap_or_else(|| stencils.iter().map(|s| s.len()).max().unwrap_or(0));
        Self::with_weighted_stencils(
            &name,
            [basis[0], basis[1], basis[2]],
            offsets,
            stencils,
            maxc,
        )
    }

    pub fn from_file(path: &Path) -> Result<LatticeSpec, LatticeError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LatticeError::Io(format!("{}: {}", path.display(), e)))?;
        Self::parse(&text)
    }

    /// Serialises to the lattice file format (round-trips through `parse`).
    pub fn to_file_string(&self) -> String {
        let mut s = format!("name {}\nbasis\n", self.name);
        for b in &self.basis {
            s.push_str(&format!("{:e} {:e} {:e}\n", b.x, b.y, b.z));
        }
        for o in &self.offsets {
            s.push_str(&format!("offset {:e} {:e} {:e}\n", o.x, o.y, o.z));
        }
        for (i, st) in self.stencils.iter().enumerate() {
            for b in st {
                s.push_str(&format!(
                    "stencil {}: {:e} {:e} {:e}",
                    i, b.d.x, b.d.y, b.d.z
                ));
                if (b.weight - 1.0).abs() > 0.0 {
                    s.push_str(&format!(" {:e}", b.weight));
                }
                s.push('\n');
            }
        }
        s.push_str(&format!("max_coordination {}\n", self.max_coordination));
        s
    }
}

fn parse_floats(s: &str) -> Result<Vec<f64>, String> {
    s.split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| format!("bad number '{}'", t)))
        .collect()
}

#[inline]
pub(crate) fn add3(a: [i64; 3], b: [i64; 3]) -> [i64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// A region of space used to select sites by their positions.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    /// Closed axis-aligned box.
    AxisBox { lo: Vec3, hi: Vec3 },
    /// Closed ball.
    Ball { center: Vec3, radius: f64 },
    /// Open cube `center + side * Q^nu` in the frame completed from `nu`.
    RotatedCube {
        center: Vec3,
        frame: [Vec3; 3],
        side: f64,
    },
    /// All of space (unbounded).
    All,
}

impl Region {
    /// The cube `Q_T^nu(center)`; `None` if `nu` is zero.
    pub fn rotated_cube(center: Vec3, nu: &Vec3, side: f64) -> Option<Region> {
        Some(Region::RotatedCube {
            center,
            frame: complete_frame(nu)?,
            side,
        })
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        match self {
            Region::AxisBox { lo, hi } => (0..3).all(|k| p[k] >= lo[k] && p[k] <= hi[k]),
            Region::Ball { center, radius } => (p - center).norm() <= *radius + EXACT_TOL,
            Region::RotatedCube {
                center,
                frame,
                side,
            } => {
                let d = p - center;
                frame.iter().all(|f| f.dot(&d).abs() < side / 2.0)
            }
            Region::All => true,
        }
    }

    /// A ball containing the region, or `None` if unbounded.
    pub fn bounding_ball(&self) -> Option<(Vec3, f64)> {
        match self {
            Region::AxisBox { lo, hi } => Some(((lo + hi) / 2.0, (hi - lo).norm() / 2.0)),
            Region::Ball { center, radius } => Some((*center, *radius)),
            Region::RotatedCube { center, side, .. } => Some((*center, side * 3f64.sqrt() / 2.0)),
            Region::All => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fcc_basics() {
        let l = make_fcc();
        let [b1, b2, _] = fcc_basis();
        assert!((b1.norm() - 1.0).abs() < 1e-15);
        assert!((b1.dot(&b2) - 0.5).abs() < 1e-15);
        assert_eq!(l.stencil(0).len(), 12);
        assert_eq!(l.position(&SiteId::new([0, 0, 0], 0)), Vec3::zeros());
        assert_eq!(l.position(&SiteId::new([1, 0, 0], 0)), b1);
        assert!((l.density_rho() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn hcp_basics() {
        let l = make_hcp();
        let (_, v1) = hcp_vectors();
        assert!((v1.norm() - 1.0).abs() < 1e-15);
        assert_eq!(l.stencil(0).len(), 12);
        assert_eq!(l.stencil(1).len(), 12);
        assert_eq!(l.position(&SiteId::new([0, 0, 0], 1)), v1);
        assert!((l.density_rho() - 2f64.sqrt()).abs() < 1e-12);
        // origin is a neighbour of v1 through the -v1 entry
        let nb = l.neighbors(&SiteId::new([0, 0, 0], 1)).unwrap();
        assert!(nb.contains(&SiteId::new([0, 0, 0], 0)));
        assert!(l.site_position(&SiteId::new([0, 0, 0], 2)).is_err());
    }

    #[test]
    fn cubic_density() {
        assert!((make_cubic().density_rho() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ball_counts() {
        let l = make_fcc();
        let one = l
            .enumerate_sites(&Region::Ball {
                center: Vec3::zeros(),
                radius: 0.5,
            })
            .unwrap();
        assert_eq!(one, vec![SiteId::new([0, 0, 0], 0)]);
        for l in [make_fcc(), make_hcp()] {
            let shell = l
                .enumerate_sites(&Region::Ball {
                    center: Vec3::zeros(),
                    radius: 1.0,
                })
                .unwrap();
            assert_eq!(shell.len(), 13);
        }
        assert_eq!(
            l.enumerate_sites(&Region::All),
            Err(LatticeError::Unbounded)
        );
    }

    #[test]
    fn box_density_approaches_rho() {
        // a generic corner keeps lattice planes off the box faces
        let l = make_fcc();
        let side = 20.0;
        let sites = l
            .enumerate_sites(&Region::AxisBox {
                lo: vec3(0.1234, 0.1234, 0.1234),
                hi: vec3(side + 0.1234, side + 0.1234, side + 0.1234),
            })
            .unwrap();
        let rho = sites.len() as f64 / side.powi(3);
        assert!((rho - 2f64.sqrt()).abs() / 2f64.sqrt() < 0.05);
        let mut sorted = sites.clone();
        sorted.sort();
        assert_eq!(sorted, sites);
    }

    #[test]
    fn neighbors_are_unit_and_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for l in [make_fcc(), make_hcp()] {
            for _ in 0..1000 {
                let id = SiteId::new(
                    [
                        rng.gen_range(-50..50),
                        rng.gen_range(-50..50),
                        rng.gen_range(-50..50),
                    ],
                    rng.gen_range(0..l.num_sublattices()),
                );
                let p = l.position(&id);
                let nb = l.neighbors(&id).unwrap();
                assert_eq!(nb.len(), 12);
                for y in &nb {
                    assert!(((l.position(y) - p).norm() - 1.0).abs() < 1e-12);
                    assert!(l.neighbors(y).unwrap().contains(&id));
                }
                // periodicity
                for k in 0..3 {
                    let mut s = [0; 3];
                    s[k] = 1;
                    let moved: Vec<SiteId> = nb.iter().map(|y| y.shifted(s)).collect();
                    assert_eq!(l.neighbors(&id.shifted(s)).unwrap(), moved);
                }
            }
        }
    }

    #[test]
    fn admissibility() {
        for l in [make_fcc(), make_hcp()] {
            let a = l.admissibility_constants();
            assert!((a.r - 1.0).abs() < 1e-12);
            assert!(a.big_r < 1.0, "{} R = {}", l.name(), a.big_r);
            // deep holes of close packings sit at distance 1/sqrt(2)
            assert!(a.big_r >= std::f64::consts::FRAC_1_SQRT_2 - 1e-12);
            assert!(a.r <= 2.0 * a.big_r);
        }
    }

    #[test]
    fn rebasing_keeps_density_and_neighbors() {
        let l = make_fcc();
        let r = l.rebased([[1, 1, 0], [0, 1, 0], [0, 0, 1]]).unwrap();
        assert!((r.density_rho() - l.density_rho()).abs() < 1e-12);
        assert_eq!(r.stencil(0).len(), 12);
        assert!(l.rebased([[2, 0, 0], [0, 1, 0], [0, 0, 1]]).is_err());
    }

    #[test]
    fn file_roundtrip_and_errors() {
        for l in [make_fcc(), make_hcp()] {
            let text = l.to_file_string();
            let back = LatticeSpec::parse(&text).unwrap();
            assert_eq!(back.num_sublattices(), l.num_sublattices());
            assert!((back.density_rho() - l.density_rho()).abs() < 1e-12);
        }
        let bad = "basis\n1 0 0\n0 1 0\n0 0 1\nstencil 0: 0.9 0 0\nstencil 0: -0.9 0 0\n";
        assert!(matches!(
            LatticeSpec::parse(bad),
            Err(LatticeError::StencilNorm { .. })
        ));
        let missing = "basis\n1 0 0\n0 1 0\n0 0 1\nstencil 0: 1 0 0\nstencil 0: -1 0 0\n";
        assert!(matches!(
            LatticeSpec::parse(missing),
            Err(LatticeError::StencilMismatch { .. })
        ));
        let asym = "basis\n1 0 0\n0 1 0\n0 0 1\nstencil 0: 1 0 0\nstencil 0: 0 1 0\nstencil 0: 0 0 1\nstencil 0: -1 0 0\nstencil 0: 0 -1 0\nstencil 0: 0 0 1\n";
        assert!(LatticeSpec::parse(asym).is_err());
        assert!(matches!(
            LatticeSpec::parse("basis\n1 0 0\n"),
            Err(LatticeError::Parse { .. })
        ));
        assert!(matches!(
            lattice_by_name("bcc"),
            Err(LatticeError::Unknown(_))
        ));
    }

    #[test]
    fn nearest_and_locate() {
        let l = make_hcp();
        let id = SiteId::new([3, -2, 1], 1);
        let p = l.position(&id);
        assert_eq!(l.locate(&p), Some(id));
        assert_eq!(l.nearest_site(&(p + vec3(0.1, -0.05, 0.2))), id);
        assert_eq!(l.locate(&(p + vec3(0.3, 0.0, 0.0))), None);
    }

    #[test]
    fn rotated_cube_is_open() {
        let r = Region::rotated_cube(Vec3::zeros(), &vec3(0.0, 0.0, 1.0), 2.0).unwrap();
        assert!(r.contains(&vec3(0.9, 0.9, 0.9)));
        assert!(!r.contains(&vec3(1.0, 0.0, 0.0)));
    }
}
