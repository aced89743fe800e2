//! Exact rational construction of the FCC Wulff shape.
//!
//! The FCC shape is the zonotope generated by six integer segments, so its
//! vertices are integer points and every facet has an integer normal. Volume
//! and the surface integral of the density are then rational numbers that can
//! be computed without rounding.

use num_rational::Ratio;
use serde::Serialize;

type Q = Ratio<i128>;
type IVec = [i64; 3];

const FCC_GENERATORS: [IVec; 6] = [
    [1, 1, 0],
    [1, 0, 1],
    [0, 1, 1],
    [1, -1, 0],
    [1, 0, -1],
    [0, 1, -1],
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactBodyReport {
    pub vertices: usize,
    pub facets: usize,
    /// `(numerator, denominator)` of the volume.
    pub volume: (i128, i128),
    /// `(numerator, denominator)` of the boundary integral of the density.
    pub surface_integral: (i128, i128),
    /// Number of facets grouped by vertex count, sorted by vertex count.
    pub facet_sizes: Vec<(usize, usize)>,
}

fn sub(a: IVec, b: IVec) -> IVec {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: IVec, b: IVec) -> IVec {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: IVec, b: IVec) -> i64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn fcc_density(n: IVec) -> i64 {
    FCC_GENERATORS.iter().map(|g| dot(*g, n).abs()).sum()
}

/// Exact FCC Wulff shape `W = sum_a [-a, a]`: counts, volume and the
/// boundary integral of the density, all without floating point.
pub fn fcc_wulff_exact() -> ExactBodyReport {
    let mut pts: Vec<IVec> = Vec::new();
    for mask in 0..(1u32 << FCC_GENERATORS.len()) {
        let mut p = [0i64; 3];
        for (k, g) in FCC_GENERATORS.iter().enumerate() {
            let s = if mask >> k & 1 == 1 { 1 } else { -1 };
            for c in 0..3 {
                p[c] += s * g[c];
            }
        }
        pts.push(p);
    }
    pts.sort_unstable();
    pts.dedup();

    // brute-force facet planes: primitive normals with every point on one side
    let mut planes: Vec<(IVec, i64)> = Vec::new();
    let n = pts.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let mut nrm = cross(sub(pts[j], pts[i]), sub(pts[k], pts[i]));
                if nrm == [0, 0, 0] {
                    continue;
                }
                let g = gcd(gcd(nrm[0], nrm[1]), nrm[2]);
                for c in &mut nrm {
                    *c /= g;
                }
                let h = dot(nrm, pts[i]);
                let (mut above, mut below) = (false, false);
                for p in &pts {
                    let d = dot(nrm, *p) - h;
                    above |= d > 0;
                    below |= d < 0;
                }
                let plane = match (above, below) {
                    (false, true) => (nrm, h),
                    (true, false) => ([-nrm[0], -nrm[1], -nrm[2]], -h),
                    _ => continue,
                };
                if !planes.contains(&plane) {
                    planes.push(plane);
                }
            }
        }
    }

    let mut volume = Q::from_integer(0);
    let mut integral = Q::from_integer(0);
    let mut vertex_set: Vec<IVec> = Vec::new();
    let mut sizes: Vec<usize> = Vec::new();
    for &(nrm, h) in &planes {
        let on: Vec<IVec> = pts.iter().copied().filter(|p| dot(nrm, *p) == h).collect();
        let ordered = order_loop(&on, nrm);
        sizes.push(ordered.len());
        for v in &ordered {
            if !vertex_set.contains(v) {
                vertex_set.push(*v);
            }
        }
        // twice the vector area, and six times the cone volume over the facet
        let mut area2 = [0i64; 3];
        let mut vol6 = 0i64;
        for t in 0..ordered.len() {
            let a = ordered[t];
            let b = ordered[(t + 1) % ordered.len()];
            let c = cross(a, b);
            for k in 0..3 {
                area2[k] += c[k];
            }
            if t >= 1 && t + 1 < ordered.len() {
                vol6 += dot(ordered[0], cross(a, b));
            }
        }
        volume += Q::new(vol6 as i128, 6);
        // phi(N) |A| / |N| with |A| = <A, N> / |N|
        integral += Q::new(
            fcc_density(nrm) as i128 * dot(area2, nrm) as i128,
            2 * dot(nrm, nrm) as i128,
        );
    }
    let mut hist: Vec<(usize, usize)> = Vec::new();
    sizes.sort_unstable();
    for s in sizes {
        match hist.last_mut() {
            Some((k, c)) if *k == s => *c += 1,
            _ => hist.push((s, 1)),
        }
    }
    ExactBodyReport {
        vertices: vertex_set.len(),
        facets: planes.len(),
        volume: (*volume.numer(), *volume.denom()),
        surface_integral: (*integral.numer(), *integral.denom()),
        facet_sizes: hist,
    }
}

/// Extreme points of a planar integer point set, ordered counter-clockwise
/// about `nrm`. Orientation tests are exact; the angular sort only fixes order.
fn order_loop(on: &[IVec], nrm: IVec) -> Vec<IVec> {
    let extreme: Vec<IVec> = on
        .iter()
        .copied()
        .filter(|&p| {
            // p is extreme unless it lies in the closed triangle of three others
            // or strictly inside a segment of two others
            !on.iter().any(|&a| {
                on.iter().any(|&b| {
                    if a == p || b == p || a == b {
                        return false;
                    }
                    let c = cross(sub(a, p), sub(b, p));
                    c == [0, 0, 0] && dot(sub(a, p), sub(b, p)) < 0
                })
            }) && !in_some_triangle(on, p, nrm)
        })
        .collect();
    let m = extreme.len() as f64;
    let cen = [0, 1, 2].map(|k| extreme.iter().map(|p| p[k] as f64).sum::<f64>() / m);
    let nf = nrm.map(|x| x as f64);
    let seed = if nf[0].abs() < 0.9 * (dot(nrm, nrm) as f64).sqrt() {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let u = fcross(nf, seed);
    let w = fcross(nf, u);
    let mut keyed: Vec<(f64, IVec)> = extreme
        .iter()
        .map(|p| {
            let d = [0, 1, 2].map(|k| p[k] as f64 - cen[k]);
            (fdot(d, w).atan2(fdot(d, u)), *p)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut lp: Vec<IVec> = keyed.into_iter().map(|(_, p)| p).collect();
    // enforce counter-clockwise orientation about nrm exactly
    let mut a2 = [0i64; 3];
    for t in 0..lp.len() {
        let c = cross(lp[t], lp[(t + 1) % lp.len()]);
        for k in 0..3 {
            a2[k] += c[k];
        }
    }
    if dot(a2, nrm) < 0 {
        lp.reverse();
    }
    lp
}

fn in_some_triangle(on: &[IVec], p: IVec, nrm: IVec) -> bool {
    let side = |a: IVec, b: IVec, x: IVec| dot(cross(sub(b, a), sub(x, a)), nrm).signum();
    for (i, &a) in on.iter().enumerate() {
        for (j, &b) in on.iter().enumerate().skip(i + 1) {
            for &c in on.iter().skip(j + 1) {
                if a == p || b == p || c == p {
                    continue;
                }
                let s = [side(a, b, p), side(b, c, p), side(c, a, p)];
                let orient = side(a, b, c);
                if orient != 0 && s.iter().all(|&x| x == orient || x == 0) {
                    return true;
                }
            }
        }
    }
    false
}

fn fcross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn fdot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_fcc_body() {
        let r = fcc_wulff_exact();
        assert_eq!(r.volume, (256, 1));
        assert_eq!(r.surface_integral, (768, 1));
        assert_eq!(r.facets, 14);
        assert_eq!(r.vertices, 24);
        assert_eq!(r.facet_sizes, vec![(4, 6), (6, 8)]);
    }
}
