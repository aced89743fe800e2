//! OFF and OBJ writers for polytopes.

use std::fmt::Write as _;

use super::Polytope;

/// OFF mesh: header, counts line `V F 0`, vertex lines, then face loops.
pub fn to_off(p: &Polytope) -> String {
    let mut s = String::new();
    s.push_str("OFF\n");
    let _ = writeln!(s, "{} {} 0", p.vertices().len(), p.facets().len());
    for v in p.vertices() {
        let _ = writeln!(s, "{} {} {}", fmt(v.x), fmt(v.y), fmt(v.z));
    }
    for f in p.facets() {
        let _ = write!(s, "{}", f.vertices.len());
        for i in &f.vertices {
            let _ = write!(s, " {}", i);
        }
        s.push('\n');
    }
    s
}

/// Wavefront OBJ with 1-based face indices.
pub fn to_obj(p: &Polytope) -> String {
    let mut s = String::new();
    for v in p.vertices() {
        let _ = writeln!(s, "v {} {} {}", fmt(v.x), fmt(v.y), fmt(v.z));
    }
    for f in p.facets() {
        s.push('f');
        for i in &f.vertices {
            let _ = write!(s, " {}", i + 1);
        }
        s.push('\n');
    }
    s
}

fn fmt(x: f64) -> String {
    let r = crate::geometry::round_sig15(x);
    if r == 0.0 {
        "0".to_string()
    } else {
        format!("{}", r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::convex_hull;
    use crate::geometry::vec3;

    fn tetra() -> Polytope {
        convex_hull(&[
            vec3(0.0, 0.0, 0.0),
            vec3(1.0, 0.0, 0.0),
            vec3(0.0, 1.0, 0.0),
            vec3(0.0, 0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn off_layout() {
        let s = to_off(&tetra());
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "OFF");
        assert_eq!(lines[1], "4 4 0");
        assert_eq!(lines.len(), 2 + 4 + 4);
        assert!(lines[6..].iter().all(|l| l.starts_with("3 ")));
    }

    #[test]
    fn obj_is_one_based() {
        let s = to_obj(&tetra());
        let faces: Vec<&str> = s.lines().filter(|l| l.starts_with("f ")).collect();
        assert_eq!(faces.len(), 4);
        for f in faces {
            for idx in f.split_whitespace().skip(1) {
                let i: usize = idx.parse().unwrap();
                assert!((1..=4).contains(&i));
            }
        }
    }
}
