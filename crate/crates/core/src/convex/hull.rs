//! Quickhull in three dimensions with coplanar-facet merging.
//!
//! Points are first normalised to unit circumradius about their bounding-box
//! centre so every tolerance below is scale free. The triangulated hull is
//! then merged into polygonal facets, and each facet loop is recomputed as a
//! strict 2-D hull so collinear and interior points never survive as vertices.

use std::collections::HashMap;

use super::{ConvexError, Facet, Polytope};
use crate::geometry::{newell_normal, Vec3};

/// Duplicate-point tolerance in normalised units.
const DEDUP_TOL: f64 = 1e-9;
/// A point further than this from a face plane is outside it.
const OUTSIDE_TOL: f64 = 1e-10;
/// Adjacent triangles merge when normals agree within this.
const NORMAL_TOL: f64 = 1e-8;
/// Collinearity tolerance for facet loops.
const COLLINEAR_TOL: f64 = 1e-9;

struct Face {
    v: [usize; 3],
    normal: Vec3,
    offset: f64,
    outside: Vec<usize>,
    alive: bool,
}

fn plane_of(p: &[Vec3], v: [usize; 3]) -> (Vec3, f64) {
    // cross product of the two shortest edges is the best-conditioned choice
    let a = p[v[0]];
    let b = p[v[1]];
    let c = p[v[2]];
    let e = [(b - a, c - a), (c - b, a - b), (a - c, b - c)];
    let lens = [(c - b).norm(), (a - c).norm(), (b - a).norm()];
    // corner i is opposite edge i; take the corner opposite the longest edge
    let mut i = 0;
    for k in 1..3 {
        if lens[k] > lens[i] {
            i = k;
        }
    }
    let n = e[i].0.cross(&e[i].1);
    let len = n.norm();
    let n = if len > 0.0 { n / len } else { n };
    (n, n.dot(&a))
}

/// Builds the hull of `points`, returning a possibly lower-dimensional body.
pub(crate) fn hull_any(points: &[Vec3]) -> Result<Polytope, ConvexError> {
    if points.is_empty() {
        return Err(ConvexError::Empty);
    }
    if points.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
        return Err(ConvexError::NonFinite);
    }
    let mut lo = points[0];
    let mut hi = points[0];
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let center = (lo + hi) * 0.5;
    let scale = points
        .iter()
        .map(|p| (p - center).norm())
        .fold(0.0_f64, f64::max);
    if scale == 0.0 {
        return Ok(Polytope::degenerate(vec![points[0]], 0));
    }
    let norm: Vec<Vec3> = points.iter().map(|p| (p - center) / scale).collect();
    let uniq = dedup(&norm);
    let q: Vec<Vec3> = uniq.iter().map(|&i| norm[i]).collect();
    let orig: Vec<Vec3> = uniq.iter().map(|&i| points[i]).collect();

    // initial simplex
    let i0 = (0..q.len())
        .min_by(|&a, &b| q[a].x.partial_cmp(&q[b].x).unwrap())
        .unwrap();
    let i1 = farthest(&q, |p| (p - q[i0]).norm());
    let i0 = farthest(&q, |p| (p - q[i1]).norm());
    if (q[i1] - q[i0]).norm() <= DEDUP_TOL {
        return Ok(Polytope::degenerate(vec![orig[i0]], 0));
    }
    let dir = (q[i1] - q[i0]).normalize();
    let line_dist = |p: &Vec3| {
        let w = p - q[i0];
        (w - dir * w.dot(&dir)).norm()
    };
    let i2 = farthest(&q, line_dist);
    if line_dist(&q[i2]) <= COLLINEAR_TOL {
        return Ok(Polytope::degenerate(vec![orig[i0], orig[i1]], 1));
    }
    let pn = (q[i1] - q[i0]).cross(&(q[i2] - q[i0])).normalize();
    let plane_dist = |p: &Vec3| (p - q[i0]).dot(&pn).abs();
    let i3 = farthest(&q, plane_dist);
    if plane_dist(&q[i3]) <= OUTSIDE_TOL * 10.0 {
        let loop_idx = planar_loop(&q, &(0..q.len()).collect::<Vec<_>>(), &pn);
        let verts = loop_idx.into_iter().map(|i| orig[i]).collect();
        return Ok(Polytope::degenerate(verts, 2));
    }

    let faces = quickhull(&q, [i0, i1, i2, i3])?;
    build_polytope(&q, &orig, &faces)
}

fn farthest(q: &[Vec3], f: impl Fn(&Vec3) -> f64) -> usize {
    let mut best = 0;
    let mut bd = f64::NEG_INFINITY;
    for (i, p) in q.iter().enumerate() {
        let d = f(p);
        if d > bd {
            bd = d;
            best = i;
        }
    }
    best
}

fn dedup(q: &[Vec3]) -> Vec<usize> {
    let cell = 1e-6;
    let key = |p: &Vec3| {
        (
            (p.x / cell).floor() as i64,
            (p.y / cell).floor() as i64,
            (p.z / cell).floor() as i64,
        )
    };
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    let mut keep = Vec::new();
    'outer: for (i, p) in q.iter().enumerate() {
        let (kx, ky, kz) = key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(list) = grid.get(&(kx + dx, ky + dy, kz + dz)) {
                        if list.iter().any(|&j| (q[j] - p).norm() <= DEDUP_TOL) {
                            continue 'outer;
                        }
                    }
                }
            }
        }
        grid.entry((kx, ky, kz)).or_default().push(i);
        keep.push(i);
    }
    keep
}

fn quickhull(q: &[Vec3], init: [usize; 4]) -> Result<Vec<[usize; 3]>, ConvexError> {
    let mut faces: Vec<Face> = Vec::new();
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    let centroid = (q[init[0]] + q[init[1]] + q[init[2]] + q[init[3]]) / 4.0;

    let add_face = |faces: &mut Vec<Face>,
                    edges: &mut HashMap<(usize, usize), usize>,
                    v: [usize; 3]|
     -> usize {
        let (normal, offset) = plane_of(q, v);
        let id = faces.len();
        for k in 0..3 {
            edges.insert((v[k], v[(k + 1) % 3]), id);
        }
        faces.push(Face {
            v,
            normal,
            offset,
            outside: Vec::new(),
            alive: true,
        });
        id
    };

    let [a, b, c, d] = init;
    for tri in [[a, b, c], [a, b, d], [a, c, d], [b, c, d]] {
        let (n, off) = plane_of(q, tri);
        let tri = if n.dot(&centroid) - off > 0.0 {
            [tri[0], tri[2], tri[1]]
        } else {
            tri
        };
        add_face(&mut faces, &mut edges, tri);
    }
    let initial: Vec<usize> = (0..4).collect();
    let all: Vec<usize> = (0..q.len()).filter(|i| !init.contains(i)).collect();
    assign(q, &mut faces, &initial, &all);

    let max_iter = 4 * q.len() + 16;
    let mut iter = 0;
    loop {
        iter += 1;
        if iter > max_iter {
            return Err(ConvexError::Internal("quickhull did not terminate"));
        }
        let Some(fid) = faces.iter().position(|f| f.alive && !f.outside.is_empty()) else {
            break;
        };
        let f = &faces[fid];
        let apex = *f
            .outside
            .iter()
            .max_by(|&&i, &&j| {
                let di = f.normal.dot(&q[i]) - f.offset;
                let dj = f.normal.dot(&q[j]) - f.offset;
                di.partial_cmp(&dj).unwrap()
            })
            .unwrap();
        let p = q[apex];

        // visible region by flood fill from `fid`
        let mut visible = vec![fid];
        let mut is_visible: HashMap<usize, bool> = HashMap::new();
        is_visible.insert(fid, true);
        let mut k = 0;
        while k < visible.len() {
            let cur = visible[k];
            k += 1;
            let v = faces[cur].v;
            for e in 0..3 {
                let (u, w) = (v[e], v[(e + 1) % 3]);
                let Some(&nb) = edges.get(&(w, u)) else {
                    return Err(ConvexError::Internal("open hull surface"));
                };
                if is_visible.contains_key(&nb) {
                    continue;
                }
                let vis = faces[nb].normal.dot(&p) - faces[nb].offset > OUTSIDE_TOL;
                is_visible.insert(nb, vis);
                if vis {
                    visible.push(nb);
                }
            }
        }
        let mut horizon = Vec::new();
        for &fv in &visible {
            let v = faces[fv].v;
            for e in 0..3 {
                let (u, w) = (v[e], v[(e + 1) % 3]);
                let nb = edges[&(w, u)];
                if !is_visible[&nb] {
                    horizon.push((u, w));
                }
            }
        }
        let mut orphans = Vec::new();
        for &fv in &visible {
            let v = faces[fv].v;
            for e in 0..3 {
                let key = (v[e], v[(e + 1) % 3]);
                if edges.get(&key) == Some(&fv) {
                    edges.remove(&key);
                }
            }
            faces[fv].alive = false;
            orphans.append(&mut faces[fv].outside);
        }
        let mut new_faces = Vec::with_capacity(horizon.len());
        for (u, w) in horizon {
            new_faces.push(add_face(&mut faces, &mut edges, [u, w, apex]));
        }
        orphans.retain(|&i| i != apex);
        assign(q, &mut faces, &new_faces, &orphans);
    }
    Ok(faces.iter().filter(|f| f.alive).map(|f| f.v).collect())
}

fn assign(q: &[Vec3], faces: &mut [Face], targets: &[usize], pts: &[usize]) {
    for &i in pts {
        let mut best = None;
        let mut bd = OUTSIDE_TOL;
        for &f in targets {
            let d = faces[f].normal.dot(&q[i]) - faces[f].offset;
            if d > bd {
                bd = d;
                best = Some(f);
            }
        }
        if let Some(f) = best {
            faces[f].outside.push(i);
        }
    }
}

/// Merges the triangle fan into facets and maps everything back to the
/// caller's coordinates.
fn build_polytope(q: &[Vec3], orig: &[Vec3], tris: &[[usize; 3]]) -> Result<Polytope, ConvexError> {
    let planes: Vec<(Vec3, f64)> = tris.iter().map(|&t| plane_of(q, t)).collect();
    let mut edge_face: HashMap<(usize, usize), usize> = HashMap::new();
    for (i, t) in tris.iter().enumerate() {
        for k in 0..3 {
            edge_face.insert((t[k], t[(k + 1) % 3]), i);
        }
    }
    // union-find over coplanar neighbours
    let mut parent: Vec<usize> = (0..tris.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (i, t) in tris.iter().enumerate() {
        for k in 0..3 {
            let (u, w) = (t[k], t[(k + 1) % 3]);
            let Some(&j) = edge_face.get(&(w, u)) else {
                return Err(ConvexError::Internal("hull surface not closed"));
            };
            if j <= i {
                continue;
            }
            let (ni, oi) = planes[i];
            let (nj, oj) = planes[j];
            let opp_j = tris[j]
                .iter()
                .find(|&&x| x != u && x != w)
                .copied()
                .unwrap();
            let opp_i = tris[i]
                .iter()
                .find(|&&x| x != u && x != w)
                .copied()
                .unwrap();
            let coplanar = (ni - nj).norm() <= NORMAL_TOL
                || ((ni.dot(&q[opp_j]) - oi).abs() <= OUTSIDE_TOL
                    && (nj.dot(&q[opp_i]) - oj).abs() <= OUTSIDE_TOL);
            if coplanar {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..tris.len() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut roots: Vec<usize> = groups.keys().copied().collect();
    roots.sort_unstable();

    let mut loops: Vec<(Vec<usize>, Vec3)> = Vec::new();
    for r in roots {
        let members = &groups[&r];
        let mut n = Vec3::zeros();
        let mut idx: Vec<usize> = Vec::new();
        for &m in members {
            let t = tris[m];
            n += (q[t[1]] - q[t[0]]).cross(&(q[t[2]] - q[t[0]]));
            idx.extend_from_slice(&t);
        }
        idx.sort_unstable();
        idx.dedup();
        if n.norm() == 0.0 {
            continue;
        }
        let n = n.normalize();
        let lp = planar_loop(q, &idx, &n);
        if lp.len() >= 3 {
            loops.push((lp, n));
        }
    }

    // re-index vertices
    let mut remap: HashMap<usize, usize> = HashMap::new();
    let mut vertices = Vec::new();
    for (lp, _) in &loops {
        for &i in lp {
            remap.entry(i).or_insert_with(|| {
                vertices.push(orig[i]);
                vertices.len() - 1
            });
        }
    }
    let mut facets = Vec::with_capacity(loops.len());
    for (lp, _) in &loops {
        let pts: Vec<Vec3> = lp.iter().map(|&i| orig[i]).collect();
        let nn = newell_normal(&pts);
        let area = 0.5 * nn.norm();
        let normal = nn / nn.norm();
        let offset = pts.iter().map(|p| normal.dot(p)).sum::<f64>() / pts.len() as f64;
        facets.push(Facet {
            normal,
            offset,
            area,
            vertices: lp.iter().map(|i| remap[i]).collect(),
        });
    }
    Ok(Polytope::from_facets(vertices, facets))
}

/// Strict convex loop (counter-clockwise seen from `+n`) of the given points,
/// assumed to lie in a plane with normal `n`.
fn planar_loop(q: &[Vec3], idx: &[usize], n: &Vec3) -> Vec<usize> {
    let seed = if n.x.abs() < 0.9 {
        Vec3::new(1.0, 0.0, 0.0)
    } else {
        Vec3::new(0.0, 1.0, 0.0)
    };
    let u = (seed - n * seed.dot(n)).normalize();
    let w = n.cross(&u);
    let mut pts: Vec<(f64, f64, usize)> = idx
        .iter()
        .map(|&i| (q[i].dot(&u), q[i].dot(&w), i))
        .collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (a.0 - b.0).abs() <= DEDUP_TOL && (a.1 - b.1).abs() <= DEDUP_TOL);
    if pts.len() < 3 {
        return pts.into_iter().map(|p| p.2).collect();
    }
    // turn test with a length-relative tolerance
    let turns_left = |o: &(f64, f64, usize), a: &(f64, f64, usize), b: &(f64, f64, usize)| {
        let (ax, ay) = (a.0 - o.0, a.1 - o.1);
        let (bx, by) = (b.0 - o.0, b.1 - o.1);
        let cross = ax * by - ay * bx;
        let len = (bx * bx + by * by).sqrt();
        cross > COLLINEAR_TOL * len
    };
    let mut lower: Vec<(f64, f64, usize)> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && !turns_left(&lower[lower.len() - 2], &lower[lower.len() - 1], p) {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<(f64, f64, usize)> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && !turns_left(&upper[upper.len() - 2], &upper[upper.len() - 1], p) {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower.into_iter().map(|p| p.2).collect()
}
