//! Property tests for the structural invariants of densities, lattices,
//! Voronoi cells and discrete energies.

use std::sync::{Arc, OnceLock};

use proptest::prelude::*;

use wulffkit::crystallize::{shape_deviation, AnnealSchedule};
use wulffkit::discrete::{bond_count, energy, f_eps, f_hat_eps, Configuration};
use wulffkit::geometry::{vec3, Vec3};
use wulffkit::lattice::{make_fcc, make_hcp, LatticeSpec, Region, SiteId};
use wulffkit::surface_density::{
    g_nu, g_nu_min, phi_fcc, phi_hcp, polar_fcc, polar_hcp, PolyhedralDensity,
};
use wulffkit::symmetry::{fcc_point_group, hcp_point_group};
use wulffkit::voronoi::voronoi_cell;
use wulffkit::wulff::{anisotropic_perimeter, wulff_report, wulff_shape};

fn fcc() -> Arc<LatticeSpec> {
    static L: OnceLock<Arc<LatticeSpec>> = OnceLock::new();
    L.get_or_init(|| Arc::new(make_fcc())).clone()
}

fn hcp() -> Arc<LatticeSpec> {
    static L: OnceLock<Arc<LatticeSpec>> = OnceLock::new();
    L.get_or_init(|| Arc::new(make_hcp())).clone()
}

fn any_vec() -> impl Strategy<Value = Vec3> {
    [-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64].prop_map(|[x, y, z]| vec3(x, y, z))
}

fn nonzero_vec() -> impl Strategy<Value = Vec3> {
    any_vec().prop_filter("nonzero", |v| v.norm() > 1e-3)
}

fn any_site(subs: usize) -> impl Strategy<Value = SiteId> {
    ([-20i64..20, -20i64..20, -20i64..20], 0..subs).prop_map(|(c, s)| SiteId::new(c, s))
}

/// Random site sets in a small box; duplicates are dropped.
fn any_config(lattice: Arc<LatticeSpec>, max: usize) -> impl Strategy<Value = Configuration> {
    let subs = lattice.num_sublattices();
    prop::collection::btree_set(([-3i64..3, -3i64..3, -3i64..3], 0..subs), 1..max).prop_map(
        move |set| {
            let sites = set.into_iter().map(|(c, s)| SiteId::new(c, s));
            Configuration::unscaled(lattice.clone(), sites).expect("valid sites")
        },
    )
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

type Phi = fn(&Vec3) -> f64;
const DENSITIES: [(&str, Phi, Phi); 2] = [("fcc", phi_fcc, polar_fcc), ("hcp", phi_hcp, polar_hcp)];

proptest! {
    #[test]
    fn phi_is_an_even_gauge(nu in any_vec(), mu in any_vec(), t in 0.0..10.0f64) {
        for (name, phi, _) in DENSITIES {
            prop_assert!(close(phi(&-nu), phi(&nu), 1e-12), "{name} not even");
            prop_assert!(close(phi(&(nu * t)), t * phi(&nu), 1e-12), "{name} not homogeneous");
            prop_assert!(phi(&(nu + mu)) <= phi(&nu) + phi(&mu) + 1e-9, "{name} not subadditive");
        }
    }

    #[test]
    fn phi_is_invariant_under_its_point_group(nu in nonzero_vec()) {
        for (group, phi) in [(fcc_point_group(), phi_fcc as Phi), (hcp_point_group(), phi_hcp)] {
            let base = phi(&nu);
            for g in &group {
                prop_assert!(close(phi(&(g * nu)), base, 1e-12));
            }
        }
    }

    #[test]
    fn fenchel_inequality_holds(nu in nonzero_vec(), z in nonzero_vec()) {
        for (name, phi, polar) in DENSITIES {
            prop_assert!(nu.dot(&z) <= phi(&nu) * polar(&z) + 1e-9, "{name}");
        }
    }

    #[test]
    fn g_minimum_is_a_lower_bound(nu in nonzero_vec(), t in -10.0..10.0f64) {
        let (m, t_star) = g_nu_min(&nu);
        prop_assert!(close(g_nu(&nu, t_star), m, 1e-12));
        prop_assert!(g_nu(&nu, t) >= m - 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn voronoi_faces_are_shared(site in any_site(2), k in 0usize..12) {
        for spec in [fcc(), hcp()] {
            let id = SiteId::new(site.cell, site.sub % spec.num_sublattices());
            let b = spec.stencil(id.sub)[k];
            let here = voronoi_cell(&spec, &id).unwrap();
            let there = voronoi_cell(&spec, &spec.neighbor_along(&id, &b)).unwrap();
            let fa = here.face_for(&b.d).unwrap();
            let fb = there.face_for(&-b.d).unwrap();
            prop_assert!(close(fa.area, fb.area, 1e-12));
            let pa = here.polytope.facet_points(&here.polytope.facets()[fa.facet]);
            let pb = there.polytope.facet_points(&there.polytope.facets()[fb.facet]);
            prop_assert_eq!(pa.len(), pb.len());
            for p in &pa {
                prop_assert!(pb.iter().any(|q| (p - q).norm() < 1e-9));
            }
        }
    }

    #[test]
    fn handshake_and_translation(x in any_config(fcc(), 40), y in any_config(hcp(), 40), s in [-9i64..9, -9i64..9, -9i64..9]) {
        for c in [x, y] {
            let n = c.len() as f64;
            let e = energy(&c, &Region::All);
            prop_assert_eq!(e, 12.0 * n - 2.0 * bond_count(&c) as f64);
            let moved = c.translated(s);
            prop_assert_eq!(energy(&moved, &Region::All), e);
            prop_assert_eq!(bond_count(&moved), bond_count(&c));
        }
    }

    #[test]
    fn localized_energies_are_ordered(x in any_config(fcc(), 60), cut in -2.0..2.0f64) {
        let lo = Region::AxisBox { lo: Vec3::repeat(-10.0), hi: vec3(cut, 10.0, 10.0) };
        let hi = Region::AxisBox { lo: vec3(cut + 1e-9, -10.0, -10.0), hi: Vec3::repeat(10.0) };
        let (f1, f2) = (f_eps(&x, &lo), f_eps(&x, &hi));
        prop_assert!(close(f1 + f2, f_eps(&x, &Region::All), 1e-12));
        prop_assert!(f_hat_eps(&x, &lo) <= f1 + 1e-12);
        prop_assert!(f_hat_eps(&x, &lo) + f_hat_eps(&x, &hi) <= f_hat_eps(&x, &Region::All) + 1e-12);
    }

    #[test]
    fn configuration_files_round_trip(x in any_config(hcp(), 30)) {
        let text = x.to_file_string();
        let back = Configuration::parse(&text, hcp(), 1.0).unwrap();
        let mut a: Vec<_> = x.sites().iter().copied().collect();
        let mut b: Vec<_> = back.sites().iter().copied().collect();
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn random_densities_satisfy_the_wulff_identity(
        terms in prop::collection::vec(nonzero_vec(), 3..6),
        extra in prop::collection::vec(nonzero_vec(), 2..4),
    ) {
        // three independent terms guarantee a nondegenerate density
        let mut abs_terms = vec![vec3(1.0, 0.0, 0.0), vec3(0.0, 1.0, 0.0), vec3(0.0, 0.0, 1.0)];
        abs_terms.extend(terms);
        let phi = PolyhedralDensity::new(abs_terms, vec![extra]).unwrap();
        let w = wulff_shape(&phi).unwrap();
        let perim = anisotropic_perimeter(&w, &phi);
        prop_assert!(close(perim, 3.0 * w.volume(), 1e-9), "{perim} vs {}", 3.0 * w.volume());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn shape_deviation_ignores_lattice_translations(r in 2.0..3.5f64, s in [-50i64..50, -50i64..50, -50i64..50]) {
        let spec = fcc();
        let sites = spec
            .enumerate_sites(&Region::Ball { center: Vec3::zeros(), radius: r })
            .unwrap();
        let x = Configuration::unscaled(spec, sites).unwrap();
        let a = shape_deviation(&x, "fcc").unwrap();
        let b = shape_deviation(&x.translated(s), "fcc").unwrap();
        prop_assert!((a.symdiff - b.symdiff).abs() < 1e-9, "{} vs {}", a.symdiff, b.symdiff);
        prop_assert!((0.0..=2.0).contains(&a.symdiff));
    }
}

#[test]
fn schedule_and_report_serialize() {
    let s = AnnealSchedule::default();
    let text = serde_json::to_string(&s).unwrap();
    let back: AnnealSchedule = serde_json::from_str(&text).unwrap();
    assert_eq!(s, back);

    let v = serde_json::to_value(wulff_report("hcp").unwrap().dump()).unwrap();
    for key in [
        "lattice",
        "volume",
        "surface_integral",
        "quotient",
        "limit_constant",
        "facets",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    for f in v["facets"].as_array().unwrap() {
        for key in ["normal", "area", "phi", "orbit"] {
            assert!(f.get(key).is_some(), "facet missing {key}");
        }
    }
}
