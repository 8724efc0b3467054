use fiberip::laws::SectionPairGeometry;
use fiberip::verify::{
    complex_step_tangent, finite_difference_column, golden_section_min, loglog_slope_fit, quad_oracle_cartesian,
    quad_oracle_reduced, relative_l2, QuadratureSpec,
};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn reduced(q1: f64, q2: f64, m: f64, g: &SectionPairGeometry) -> f64 {
    quad_oracle_reduced(q1, q2, m, g, &QuadratureSpec::reduced()).unwrap().value
}

#[test]
fn reduced_and_cartesian_oracles_agree() {
    let g = SectionPairGeometry::new(0.02, 0.015, 1.0, 1.0).unwrap();
    for (q1, q2, m) in [(0.0, 0.004, 6.0), (0.01, 0.002, 6.0), (0.03, 0.01, 12.0)] {
        let a = reduced(q1, q2, m, &g);
        let b = quad_oracle_cartesian(q1, q2, m, &g, &QuadratureSpec::cartesian()).unwrap().value;
        assert!(((a - b) / b).abs() <= 1e-5, "q1 {q1} q2 {q2} m {m}: {a} vs {b}");
    }
}

#[test]
fn distant_disks_act_like_points() {
    let (rx, ry) = (0.02, 0.01);
    let g = SectionPairGeometry::new(rx, ry, 1.0, 1.0).unwrap();
    let err = |q2: f64| {
        let d: f64 = q2 + rx + ry;
        let point = (PI * rx * rx) * (PI * ry * ry) * d.powf(-6.0);
        ((reduced(0.0, q2, 6.0, &g) - point) / point).abs()
    };
    let (e1, e2) = (err(1.0), err(2.0));
    assert!(e1 < 1e-2, "{e1}");
    // the leading correction is quadratic in R / d
    let ratio = e1 / e2;
    assert!(ratio > 3.5 && ratio < 4.5, "{e1} / {e2} = {ratio}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oracle_decreases_with_gap(q1 in 0.0f64..0.05, q2 in 1e-4f64..1e-2, m in 4.0f64..12.0) {
        let g = SectionPairGeometry::symmetric(0.02, 1.0).unwrap();
        let near = reduced(q1, q2, m, &g);
        let far = reduced(q1, 1.5 * q2, m, &g);
        prop_assert!(near > far && far > 0.0, "{near} vs {far}");
    }

    #[test]
    fn oracle_decreases_with_offset(q1 in 0.0f64..0.05, q2 in 1e-4f64..1e-2, m in 4.0f64..12.0) {
        let g = SectionPairGeometry::symmetric(0.02, 1.0).unwrap();
        prop_assert!(reduced(q1, q2, m, &g) > reduced(q1 + 0.005, q2, m, &g));
    }

    #[test]
    fn oracle_is_symmetric_in_the_radii(rx in 0.005f64..0.03, ry in 0.005f64..0.03, q2 in 1e-3f64..1e-2) {
        let a = reduced(0.01, q2, 6.0, &SectionPairGeometry::new(rx, ry, 1.0, 1.0).unwrap());
        let b = reduced(0.01, q2, 6.0, &SectionPairGeometry::new(ry, rx, 1.0, 1.0).unwrap());
        prop_assert!(((a - b) / a).abs() <= 1e-8, "{a} vs {b}");
    }

    #[test]
    fn slope_fit_recovers_power_laws(p in -8.0f64..3.0, c in 1e-6f64..1e6) {
        let samples: Vec<(f64, f64)> = (0..20).map(|i| {
            let q = 1e-3 * 1.3f64.powi(i);
            (q, -c * q.powf(p))
        }).collect();
        prop_assert!((loglog_slope_fit(&samples).unwrap() - p).abs() < 1e-10);
    }

    #[test]
    fn golden_section_finds_parabola_vertex(x0 in 0.1f64..10.0, s in 0.1f64..10.0) {
        let x = golden_section_min(|x| s * (x - x0).powi(2) + 1.0, 0.0, 20.0, 1e-10);
        prop_assert!((x - x0).abs() <= 1e-8 * x0, "{x} vs {x0}");
    }
}

#[test]
fn slope_fit_needs_three_distinct_samples() {
    assert!(loglog_slope_fit(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
    assert!(loglog_slope_fit(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]).is_err());
    assert!(loglog_slope_fit(&[(1.0, 1.0), (2.0, 0.0), (3.0, 3.0)]).is_err());
}

#[test]
fn complex_step_column_is_exact() {
    // r(u) = (u0^2 u1, sin u0 + u1^3)
    let u = [0.7, -1.3];
    let rc = |z: &[Complex64]| -> fiberip::Result<Vec<Complex64>> { Ok(vec![z[0] * z[0] * z[1], z[0].sin() + z[1].powi(3)]) };
    let rf = |v: &[f64]| -> fiberip::Result<Vec<f64>> { Ok(vec![v[0] * v[0] * v[1], v[0].sin() + v[1].powi(3)]) };
    let c0 = complex_step_tangent(rc, &u, 0, 1e-30).unwrap();
    let exact0 = [2.0 * u[0] * u[1], u[0].cos()];
    assert_eq!(c0, exact0);
    let c1 = complex_step_tangent(rc, &u, 1, 1e-30).unwrap();
    let exact1 = [u[0] * u[0], 3.0 * u[1] * u[1]];
    assert!(relative_l2(&c1, &exact1) < 1e-15);
    let fd = finite_difference_column(rf, &u, 0, 1e-6).unwrap();
    assert!(relative_l2(&fd, &exact0) < 1e-8);
}
