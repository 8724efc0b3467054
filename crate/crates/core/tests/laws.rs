use fiberip::laws::{cylinder_per_length, CompositeLaw, Issip, PowerLaw, SectionPairGeometry};
use fiberip::vec2::Vec2;
use fiberip::Error;
use proptest::prelude::*;

fn single(m: f64, r: f64) -> Issip {
    let g = SectionPairGeometry::symmetric(r, 1.0).unwrap();
    Issip::new(&PowerLaw::new(m, -1.0).into(), &g).unwrap()
}

fn lj() -> Issip {
    let g = SectionPairGeometry::symmetric(0.02, 1.0).unwrap();
    Issip::new(&CompositeLaw::lennard_jones(-1e-7, 5e-25), &g).unwrap()
}

fn close(a: f64, b: f64, rel: f64, scale: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(scale)
}

proptest! {
    #[test]
    fn zero_offset_reduces_to_lssip(m in 3.6f64..13.0, q2 in 1e-4f64..1e-1, r in 1e-3f64..1e-1) {
        let is = single(m, r);
        let v = is.value(0.0, q2).unwrap();
        let (l, _) = is.lssip(Vec2::new(0.0, q2 + 2.0 * r)).unwrap();
        prop_assert!(((v - l) / l).abs() <= 1e-12, "{v} vs {l}");
    }

    #[test]
    fn even_in_offset(m in 3.6f64..13.0, q1 in 0.0f64..0.1, q2 in 1e-4f64..1e-2) {
        let is = single(m, 0.02);
        let p = is.derivs(q1, q2).unwrap();
        let n = is.derivs(-q1, q2).unwrap();
        prop_assert_eq!(p.phi, n.phi);
        prop_assert_eq!(p.phi_1, -n.phi_1);
        prop_assert_eq!(p.phi_2, n.phi_2);
        prop_assert_eq!(p.phi_12, -n.phi_12);
    }

    #[test]
    fn homogeneity_identity(m in 3.6f64..13.0, q1 in -0.05f64..0.05, q2 in 1e-4f64..1e-2) {
        let is = single(m, 0.02);
        let d = is.derivs(q1, q2).unwrap();
        let rhs = (7.0 - 2.0 * m) * d.phi / (2.0 * q2) - q1 / q2 * d.phi_1;
        prop_assert!(close(d.phi_2, rhs, 1e-10, 0.0), "{} vs {rhs}", d.phi_2);
    }

    #[test]
    fn derivatives_match_central_differences(q1 in -0.04f64..0.04, q2 in 6e-4f64..5e-3) {
        let is = lj();
        let d = is.derivs(q1, q2).unwrap();
        let h1 = 1e-6;
        let h2 = 1e-4 * q2;
        let at = |a: f64, b: f64| is.derivs(a, b).unwrap();
        let fd1 = (at(q1 + h1, q2).phi - at(q1 - h1, q2).phi) / (2.0 * h1);
        let fd2 = (at(q1, q2 + h2).phi - at(q1, q2 - h2).phi) / (2.0 * h2);
        let scale1 = d.phi.abs() / q2;
        prop_assert!(close(d.phi_1, fd1, 1e-5, scale1), "phi_1 {} vs {fd1}", d.phi_1);
        prop_assert!(close(d.phi_2, fd2, 1e-5, scale1), "phi_2 {} vs {fd2}", d.phi_2);
        let fd11 = (at(q1 + h1, q2).phi_1 - at(q1 - h1, q2).phi_1) / (2.0 * h1);
        let fd12 = (at(q1, q2 + h2).phi_1 - at(q1, q2 - h2).phi_1) / (2.0 * h2);
        let fd22 = (at(q1, q2 + h2).phi_2 - at(q1, q2 - h2).phi_2) / (2.0 * h2);
        let scale2 = scale1 / q2;
        prop_assert!(close(d.phi_11, fd11, 1e-4, scale2), "phi_11 {} vs {fd11}", d.phi_11);
        prop_assert!(close(d.phi_12, fd12, 1e-4, scale2), "phi_12 {} vs {fd12}", d.phi_12);
        prop_assert!(close(d.phi_22, fd22, 1e-4, scale2), "phi_22 {} vs {fd22}", d.phi_22);
    }

    #[test]
    fn decays_with_offset(m in 3.6f64..13.0, q1 in 0.0f64..0.05, q2 in 1e-4f64..1e-2) {
        let is = single(m, 0.02);
        // attractive single term: magnitude falls as the sections slide apart
        prop_assert!(is.value(q1 + 1e-3, q2).unwrap().abs() < is.value(q1, q2).unwrap().abs());
    }

    #[test]
    fn offset_integral_gives_cylinder_law(m in 6.0f64..12.0, q2 in 5e-4f64..3e-3) {
        let g = SectionPairGeometry::symmetric(0.02, 1.0).unwrap();
        let law: CompositeLaw = PowerLaw::new(m, -1.0).into();
        let is = Issip::new(&law, &g).unwrap();
        let w = 1e5 * q2;
        let e = fiberip::quad::integrate_with_breaks(
            |q1: f64| is.value(q1, q2).unwrap(),
            0.0,
            w,
            &[q2, 3.0 * q2, 10.0 * q2, 100.0 * q2, 1e3 * q2, 1e4 * q2],
            fiberip::quad::AdaptiveOptions { abs_tol: 0.0, rel_tol: 1e-12, max_intervals: 4000 },
        )
        .unwrap();
        let c = cylinder_per_length(q2, &law, &g).unwrap();
        prop_assert!(((2.0 * e.value - c) / c).abs() < 1e-5, "{} vs {c}", 2.0 * e.value);
    }
}

#[test]
fn contact_and_domain_errors() {
    let is = lj();
    assert!(matches!(is.value(0.0, 0.0), Err(Error::Contact { .. })));
    assert!(matches!(is.derivs(0.01, -1e-4), Err(Error::Contact { .. })));
    let g = SectionPairGeometry::symmetric(0.02, 1.0).unwrap();
    assert!(Issip::new(&PowerLaw::new(3.0, 1.0).into(), &g).is_err());
    assert!(SectionPairGeometry::symmetric(-0.02, 1.0).is_err());
}

#[test]
fn lssip_force_is_the_gap_gradient() {
    let is = lj();
    let d = Vec2::new(0.003, 0.0412);
    let (_, f) = is.lssip(d).unwrap();
    let h = 1e-8;
    for (k, e) in [Vec2::new(h, 0.0), Vec2::new(0.0, h)].into_iter().enumerate() {
        let fd = (is.lssip(d + e).unwrap().0 - is.lssip(d - e).unwrap().0) / (2.0 * h);
        let fk = if k == 0 { f.x } else { f.y };
        // force on x is minus the gradient w.r.t. d = x - y
        assert!(((fk + fd) / fd).abs() < 1e-6, "{fk} vs {fd}");
    }
}
