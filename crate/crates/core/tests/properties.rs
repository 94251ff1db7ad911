use proptest::prelude::*;

use conestab::cones::{build, ConeKind};
use conestab::domain::ConvexDomain;
use conestab::geom::{point, Point};
use conestab::mesh_io::{obj_string, read_obj};
use conestab::report::{Op, VerificationReport};
use conestab::stability::{band_constant_check, plate_constant_check, viviani_sum, BandSpec, EquilateralTriangle, PlateSpec, Side};

fn cone() -> impl Strategy<Value = ConeKind> {
    prop_oneof![Just(ConeKind::Plane), Just(ConeKind::Y), Just(ConeKind::T)]
}

fn nonzero3() -> impl Strategy<Value = Point> {
    prop::array::uniform3(-2.0f64..2.0)
        .prop_filter("away from the origin", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-4)
        .prop_map(|v| point(&v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gauge_is_positively_homogeneous(kind in cone(), eta in 0.02f64..0.45, x in nonzero3(), lambda in 0.1f64..10.0) {
        let dom = ConvexDomain::new(build(kind, 3).unwrap(), eta).unwrap();
        let g = dom.gauge(&x);
        prop_assert!((dom.gauge(&(&x * lambda)) - lambda * g).abs() <= 1e-12 * lambda * g);
    }

    #[test]
    fn ray_exit_lands_on_the_boundary(kind in cone(), eta in 0.02f64..0.45, u in nonzero3(), off in prop::array::uniform3(-0.01f64..0.01)) {
        let dom = ConvexDomain::new(build(kind, 3).unwrap(), eta).unwrap();
        let p0 = point(&off);
        let u = u.normalize();
        let r = dom.ray_exit(&p0, &u).unwrap();
        let x = &p0 + &u * r;
        prop_assert!((dom.gauge(&x) - 1.0).abs() < 1e-9);
        let n = dom.outward_normal(&x).unwrap();
        prop_assert!((n.norm() - 1.0).abs() < 1e-12);
        // the supporting half-space at x contains the centre
        prop_assert!(n.dot(&x) > 0.0);
    }

    #[test]
    fn viviani_sum_is_the_height(cx in -3.0f64..3.0, cy in -3.0f64..3.0, side in 0.1f64..5.0, rot in 0.0f64..7.0, u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let tri = EquilateralTriangle::new([cx, cy], side, rot).unwrap();
        let (u, v) = if u + v > 1.0 { (1.0 - u, 1.0 - v) } else { (u, v) };
        let [a, b, c] = tri.vertices;
        let p = [0, 1].map(|k| a[k] + u * (b[k] - a[k]) + v * (c[k] - a[k]));
        let s = viviani_sum(&tri, p).unwrap();
        prop_assert!((s - tri.height()).abs() <= 1e-12 * side.max(1.0));
    }

    #[test]
    fn band_projection_ignores_the_split(alpha in 0.05f64..1.5707963, theta in 0.1f64..3.14159, bits in prop::collection::vec(any::<bool>(), 48)) {
        let band = BandSpec::new(theta, alpha, 0.4).unwrap();
        let part: Vec<Side> = bits.iter().map(|b| if *b { Side::Plus } else { Side::Minus }).collect();
        let r = band_constant_check(&band, &part, 12, 4).unwrap();
        prop_assert!((r.lhs - r.rhs).abs() <= 1e-9 * r.rhs);
    }

    #[test]
    fn plate_projection_ignores_the_colouring(alpha in 0.0f64..1.5, colours in prop::collection::vec(0u8..3, 36)) {
        let eta: f64 = 0.1;
        let plate = PlateSpec::new(conestab::domain::plate_radius(eta), conestab::domain::chord_distance(eta), alpha).unwrap();
        let r = plate_constant_check(&plate, &colours, 3, 2).unwrap();
        prop_assert!((r.lhs - r.rhs).abs() <= 1e-12 * r.rhs);
    }

    #[test]
    fn report_pass_survives_serialisation(values in prop::collection::vec(-1e3f64..1e3, 1..6), bound in -1e3f64..1e3) {
        let mut r = VerificationReport::new("prop", "", 0.0);
        for (k, v) in values.iter().enumerate() {
            r.quantity(&format!("q{k}"), *v).rule(&format!("q{k}"), Op::Le, bound);
        }
        let r = r.finish();
        prop_assert_eq!(r.pass, values.iter().all(|v| *v <= bound));
        let back: VerificationReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        prop_assert_eq!(back.recheck(), r.pass);
    }
}

#[test]
fn boundary_mesh_obj_roundtrip() {
    let dom = ConvexDomain::new(build(ConeKind::T, 3).unwrap(), 0.1).unwrap();
    let bm = conestab::boundary::boundary_mesh(&dom, 6).unwrap();
    let text = obj_string(&bm.mesh);
    let back = read_obj(text.as_bytes()).unwrap();
    assert_eq!(back.triangles(), bm.mesh.triangles());
    assert_eq!(back.coords(), bm.mesh.coords());
}
