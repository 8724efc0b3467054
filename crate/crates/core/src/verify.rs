//! Independent oracles: quadrature references for the section-section
//! integral, complex-step tangent columns and log-log slope fits.

use crate::error::{Error, Result};
use crate::laws::{CompositeLaw, SectionPairGeometry};
use crate::quad::{integrate_with_breaks, AdaptiveOptions};
use num_complex::Complex64;
use std::cell::RefCell;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureMethod {
    Cartesian4d,
    Reduced2d,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub method: QuadratureMethod,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl QuadratureSpec {
    pub fn reduced() -> Self {
        QuadratureSpec {
            method: QuadratureMethod::Reduced2d,
            abs_tol: 0.0,
            rel_tol: 1e-10,
            max_subdivisions: 4000,
        }
    }

    pub fn cartesian() -> Self {
        QuadratureSpec {
            method: QuadratureMethod::Cartesian4d,
            abs_tol: 0.0,
            rel_tol: 1e-9,
            max_subdivisions: 400,
        }
    }

    fn opts(&self, tighten: f64) -> AdaptiveOptions {
        AdaptiveOptions {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol * tighten,
            max_intervals: self.max_subdivisions,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleValue {
    pub value: f64,
    /// part of the nominal domain was empty (radius ratios outside the
    /// range where the limits are consistent)
    pub partial_domain: bool,
}

const ACOS_GUARD: f64 = 1e-14;

fn acos_clamped(x: f64) -> f64 {
    x.clamp(-1.0 + ACOS_GUARD, 1.0 - ACOS_GUARD).acos()
}

/// Inner quadrature failures are collected here instead of aborting the outer integral.
fn first_error(slot: &RefCell<Option<Error>>, e: Error) -> f64 {
    slot.borrow_mut().get_or_insert(e);
    0.0
}

/// Geometric double-area integral `∫∫ r^-m dA_x dA_y` in the reduced 2D form.
pub fn quad_oracle_reduced(q1: f64, q2: f64, m: f64, geom: &SectionPairGeometry, spec: &QuadratureSpec) -> Result<OracleValue> {
    if !(q2 > 0.0 && m > 0.0) {
        return Err(Error::Domain("reduced oracle needs q2 > 0 and m > 0".into()));
    }
    let (rx, ry) = (geom.radius_x, geom.radius_y);
    let qh = q2 + rx + ry;
    let (t0, t1) = (q2 + rx, q2 + rx + 2.0 * ry);
    let err = RefCell::new(None);
    let mut partial = false;
    let inner_opts = spec.opts(0.1);
    let outer = |t: f64| -> f64 {
        let psi = acos_clamped((t * t + qh * qh - ry * ry) / (2.0 * t * qh));
        let (p0, p1) = ((t - rx).max(0.0), t + rx);
        let breaks: Vec<f64> = [1.0, 3.0, 10.0, 30.0].iter().map(|k| p0 + k * q2.min(rx)).collect();
        let f = |p: f64| {
            let phi = acos_clamped((t * t + p * p - rx * rx) / (2.0 * t * p));
            (p * p + q1 * q1).powf(-0.5 * m) * t * p * phi * psi
        };
        match integrate_with_breaks(f, p0, p1, &breaks, inner_opts) {
            Ok(e) => e.value,
            Err(e) => first_error(&err, e),
        }
    };
    if t1 <= t0 {
        partial = true;
    }
    let breaks: Vec<f64> = [1.0, 3.0, 10.0, 30.0].iter().map(|k| t0 + k * q2.min(ry)).collect();
    let e = integrate_with_breaks(outer, t0, t1, &breaks, spec.opts(1.0))?;
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok(OracleValue {
        value: 4.0 * e.value,
        partial_domain: partial,
    })
}

/// The same integral by brute 4D adaptive quadrature over both disks.
///
/// Disk x is centred at the origin, disk y at `q̂2` along the in-section
/// normal; `r² = q1² + (q̂2 + a - c)² + (b - e)²`.
pub fn quad_oracle_cartesian(q1: f64, q2: f64, m: f64, geom: &SectionPairGeometry, spec: &QuadratureSpec) -> Result<OracleValue> {
    if !(q2 > 0.0 && m > 0.0) {
        return Err(Error::Domain("cartesian oracle needs q2 > 0 and m > 0".into()));
    }
    let (rx, ry) = (geom.radius_x, geom.radius_y);
    let qh = q2 + rx + ry;
    let err = RefCell::new(None);
    let (o1, o2, o3, o4) = (spec.opts(1.0), spec.opts(0.3), spec.opts(0.1), spec.opts(0.03));
    let run = |f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, brk: &[f64], o: AdaptiveOptions| -> f64 {
        match integrate_with_breaks(f, a, b, brk, o) {
            Ok(e) => e.value,
            Err(e) => first_error(&err, e),
        }
    };
    let q1s = q1 * q1;
    let inv_half_m = -0.5 * m;
    let mut fa = |a: f64| {
        let hb = (rx * rx - a * a).max(0.0).sqrt();
        let mut fb = |b: f64| {
            let mut fc = |c: f64| {
                let he = (ry * ry - c * c).max(0.0).sqrt();
                let base = q1s + (qh + a - c).powi(2);
                let mut fe = |e: f64| (base + (b - e).powi(2)).powf(inv_half_m);
                let brk = [b.clamp(-he, he)];
                run(&mut fe, -he, he, &brk, o4)
            };
            // nearest approach at c = ry for a = -rx
            let brk = [ry - q2.min(ry), ry - 0.1 * q2.min(ry)];
            run(&mut fc, -ry, ry, &brk, o3)
        };
        run(&mut fb, -hb, hb, &[0.0], o2)
    };
    let brk = [-rx + q2.min(rx), -rx + 0.1 * q2.min(rx)];
    let v = run(&mut fa, -rx, rx, &brk, o1);
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok(OracleValue {
        value: v,
        partial_domain: false,
    })
}

/// Reference section-section potential `Σ k β_x β_y I_m` from an oracle.
pub fn oracle_potential(q1: f64, q2: f64, law: &CompositeLaw, geom: &SectionPairGeometry, spec: &QuadratureSpec) -> Result<f64> {
    let mut acc = 0.0;
    for t in law.terms() {
        let i = match spec.method {
            QuadratureMethod::Reduced2d => quad_oracle_reduced(q1, q2, t.exponent, geom, spec)?,
            QuadratureMethod::Cartesian4d => quad_oracle_cartesian(q1, q2, t.exponent, geom, spec)?,
        };
        acc += t.coefficient * geom.density_x * geom.density_y * i.value;
    }
    Ok(acc)
}

pub const COMPLEX_STEP: f64 = 1e-30;

/// `Im Ψ(u + iεe_k) / ε`.
pub fn complex_step_tangent<F>(residual: F, u: &[f64], k: usize, eps: f64) -> Result<Vec<f64>>
where
    F: Fn(&[Complex64]) -> Result<Vec<Complex64>>,
{
    let mut z: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    z[k].im = eps;
    Ok(residual(&z)?.iter().map(|r| r.im / eps).collect())
}

/// Central finite-difference column.
pub fn finite_difference_column<F>(residual: F, u: &[f64], k: usize, h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let mut up = u.to_vec();
    let mut um = u.to_vec();
    up[k] += h;
    um[k] -= h;
    let rp = residual(&up)?;
    let rm = residual(&um)?;
    Ok(rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * h)).collect())
}

/// Least-squares slope of `log|v|` against `log q`.
pub fn loglog_slope_fit(samples: &[(f64, f64)]) -> Result<f64> {
    if samples.len() < 3 {
        return Err(Error::Domain("slope fit needs at least 3 samples".into()));
    }
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .map(|&(q, v)| {
            if q > 0.0 && v != 0.0 && v.is_finite() {
                Ok((q.ln(), v.abs().ln()))
            } else {
                Err(Error::Domain(format!("degenerate sample ({q}, {v})")))
            }
        })
        .collect::<Result<_>>()?;
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Domain("all samples share one abscissa".into()));
    }
    Ok(sxy / sxx)
}

/// Golden-section search followed by symmetric parabolic refinement.
pub fn golden_section_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, rel_tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > rel_tol * (a.abs() + b.abs()) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let mut x = 0.5 * (a + b);
    for _ in 0..3 {
        let h = 1e-5 * x.abs().max(f64::MIN_POSITIVE);
        let (fm, f0, fp) = (f(x - h), f(x), f(x + h));
        let curv = fp - 2.0 * f0 + fm;
        if !(curv > 0.0) {
            break;
        }
        x -= 0.5 * h * (fp - fm) / curv;
    }
    x
}

/// `‖a - b‖₂ / ‖b‖₂`.
pub fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn slope_of_exact_power() {
        let s: Vec<(f64, f64)> = (1..10).map(|i| {
            let q = 1e-3 * i as f64;
            (q, -3.0 * q.powf(-1.5))
        }).collect();
        assert_relative_eq!(loglog_slope_fit(&s).unwrap(), -1.5, max_relative = 1e-12);
        assert!(loglog_slope_fit(&s[..2]).is_err());
        assert!(loglog_slope_fit(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]).is_err());
    }

    #[test]
    fn golden_section_finds_parabola_vertex() {
        let x = golden_section_min(|x| (x - 0.37).powi(2) + 2.0, 0.0, 1.0, 1e-10);
        assert_relative_eq!(x, 0.37, max_relative = 1e-9);
    }

    #[test]
    fn complex_step_of_linear_map_is_exact() {
        let a = [[2.0, -1.0], [0.5, 3.0]];
        let res = |u: &[Complex64]| -> Result<Vec<Complex64>> {
            Ok((0..2).map(|i| u[0] * a[i][0] + u[1] * a[i][1]).collect())
        };
        for k in 0..2 {
            let col = complex_step_tangent(res, &[0.3, -0.7], k, COMPLEX_STEP).unwrap();
            assert_eq!(col, vec![a[0][k], a[1][k]]);
        }
    }

    #[test]
    fn far_disks_approach_point_mass() {
        let g = SectionPairGeometry::symmetric(0.02, 1.0).unwrap();
        let q2 = 2.0;
        let d = q2 + 0.04;
        let i = quad_oracle_reduced(0.0, q2, 6.0, &g, &QuadratureSpec::reduced()).unwrap().value;
        let area = std::f64::consts::PI * 0.02 * 0.02;
        assert_relative_eq!(i, area * area * d.powi(-6), max_relative = 1e-2);
    }
}
