//! Small vector helpers shared across the crate.

use nalgebra::Vector3;

pub type Vec3 = Vector3<f64>;

#[inline]
pub fn vec3(x: f64, y: f64, z: f64) -> Vec3 {
    Vec3::new(x, y, z)
}

/// Completes `nu` to a right-handed orthonormal frame `[f1, f2, nu_hat]`.
///
/// The seed vector is the standard basis vector least aligned with `nu`
/// (smallest `|nu_i|`, lowest index on ties), orthogonalised by Gram-Schmidt.
pub fn complete_frame(nu: &Vec3) -> Option<[Vec3; 3]> {
    let n = nu.norm();
    if !(n > 0.0) || !n.is_finite() {
        return None;
    }
    let nu_hat = nu / n;
    let mut seed_idx = 0;
    for i in 1..3 {
        if nu_hat[i].abs() < nu_hat[seed_idx].abs() {
            seed_idx = i;
        }
    }
    let mut seed = Vec3::zeros();
    seed[seed_idx] = 1.0;
    let f1 = (seed - nu_hat * seed.dot(&nu_hat)).normalize();
    let f2 = nu_hat.cross(&f1);
    Some([f1, f2, nu_hat])
}

/// Newell normal of a closed polygon (unnormalised; its length is twice the area).
pub fn newell_normal(points: &[Vec3]) -> Vec3 {
    let mut n = Vec3::zeros();
    let k = points.len();
    for i in 0..k {
        let a = points[i];
        let b = points[(i + 1) % k];
        n += a.cross(&b);
    }
    n
}

/// Uniform random unit vector by rejection sampling from the unit ball.
pub fn random_unit<R: rand::Rng + ?Sized>(rng: &mut R) -> Vec3 {
    loop {
        let v = vec3(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n2 = v.norm_squared();
        if n2 > 1e-6 && n2 <= 1.0 {
            return v / n2.sqrt();
        }
    }
}

/// Unit vertices of an icosahedron subdivided `level` times
/// (`10 * 4^level + 2` points), in a fixed order.
pub fn icosphere(level: usize) -> Vec<Vec3> {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| vec3(x, y, z).normalize())
    .collect();
    #[rustfmt::skip]
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    for _ in 0..level {
        let mut mid = std::collections::HashMap::new();
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vec3>| -> usize {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) / 2.0).normalize());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    verts
}

/// Rounds to 15 significant digits, used for byte-stable machine output.
pub fn round_sig15(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.14e}", x).parse().unwrap_or(x)
}
