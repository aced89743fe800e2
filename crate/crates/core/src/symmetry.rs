//! Point groups of the FCC and HCP densities.

use nalgebra::Matrix3;

use crate::geometry::Vec3;

/// The 48 signed permutation matrices.
pub fn fcc_point_group() -> Vec<Matrix3<f64>> {
    let perms = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut out = Vec::with_capacity(48);
    for p in perms {
        for signs in 0..8 {
            let mut m = Matrix3::zeros();
            for (r, &c) in p.iter().enumerate() {
                m[(r, c)] = if signs >> r & 1 == 1 { -1.0 } else { 1.0 };
            }
            out.push(m);
        }
    }
    out
}

/// `D_6h`: closure of the rotation by pi/3 about the x3-axis and the
/// reflections `x1 -> -x1`, `x3 -> -x3`.
pub fn hcp_point_group() -> Vec<Matrix3<f64>> {
    let (s, c) = (std::f64::consts::FRAC_PI_3).sin_cos();
    let rot = Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0);
    let m1 = Matrix3::from_diagonal(&Vec3::new(-1.0, 1.0, 1.0));
    let m3 = Matrix3::from_diagonal(&Vec3::new(1.0, 1.0, -1.0));
    closure(&[rot, m1, m3])
}

fn closure(gens: &[Matrix3<f64>]) -> Vec<Matrix3<f64>> {
    let mut group = vec![Matrix3::identity()];
    let mut k = 0;
    while k < group.len() {
        let g = group[k];
        k += 1;
        for h in gens {
            let p = h * g;
            if !group.iter().any(|q| (q - p).abs().max() < 1e-9) {
                group.push(p);
            }
        }
    }
    group
}

/// Index of the orbit representative: the lexicographically largest image
/// (after rounding) of `n` under the group, used as an orbit key.
pub fn orbit_key(group: &[Matrix3<f64>], n: &Vec3) -> [i64; 3] {
    let mut best: Option<[i64; 3]> = None;
    for g in group {
        let v = g * n;
        let key = [
            (v.x * 1e6).round() as i64,
            (v.y * 1e6).round() as i64,
            (v.z * 1e6).round() as i64,
        ];
        if best.is_none_or(|b| key > b) {
            best = Some(key);
        }
    }
    best.unwrap_or([0, 0, 0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_orders() {
        assert_eq!(fcc_point_group().len(), 48);
        assert_eq!(hcp_point_group().len(), 24);
        for g in hcp_point_group() {
            assert!(((g.transpose() * g) - Matrix3::identity()).abs().max() < 1e-12);
        }
    }

    #[test]
    fn orbit_keys_agree_within_orbit() {
        let g = fcc_point_group();
        let a = orbit_key(&g, &Vec3::new(0.1, -0.3, 0.7));
        let b = orbit_key(&g, &Vec3::new(-0.7, 0.3, 0.1));
        assert_eq!(a, b);
    }
}
