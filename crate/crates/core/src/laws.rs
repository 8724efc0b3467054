//! Section-section potential laws for inverse-power point-pair potentials.
//!
//! For a single term `k r^-m` between two circular sections with offset `q1`
//! and surface gap `q2`:
//!
//! ```text
//! phi = c_m q2^(7/2-m) 2F1((2m-7)/4, (2m-5)/4; m/2; -(q1/q2)^2)
//! c_m = k bx by 2^(5/2-m) pi^(3/2) sqrt(Rx Ry/(Rx+Ry)) Γ(m-7/2) / Γ(m/2)^2
//! ```
//!
//! Derivatives follow from `d/dz 2F1(a,b;c;z) = ab/c 2F1(a+1,b+1;c+1;z)`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::specialfn::{gamma_real, Hyp2F1};
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerLaw {
    pub exponent: f64,
    pub coefficient: f64,
}

impl PowerLaw {
    pub fn new(exponent: f64, coefficient: f64) -> Self {
        PowerLaw {
            exponent,
            coefficient,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositeLaw {
    terms: Vec<PowerLaw>,
}

impl CompositeLaw {
    pub fn new(terms: Vec<PowerLaw>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Domain("a law needs at least one term".into()));
        }
        for (i, t) in terms.iter().enumerate() {
            if !t.exponent.is_finite() || !t.coefficient.is_finite() {
                return Err(Error::Domain(format!("term {i} is not finite")));
            }
            if terms[..i].iter().any(|o| o.exponent == t.exponent) {
                return Err(Error::Domain(format!("duplicate exponent {}", t.exponent)));
            }
        }
        Ok(CompositeLaw { terms })
    }

    pub fn lennard_jones(k6: f64, k12: f64) -> Self {
        CompositeLaw {
            terms: vec![PowerLaw::new(6.0, k6), PowerLaw::new(12.0, k12)],
        }
    }

    pub fn terms(&self) -> &[PowerLaw] {
        &self.terms
    }
}

impl From<PowerLaw> for CompositeLaw {
    fn from(t: PowerLaw) -> Self {
        CompositeLaw { terms: vec![t] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionPairGeometry {
    pub radius_x: f64,
    pub radius_y: f64,
    pub density_x: f64,
    pub density_y: f64,
}

impl SectionPairGeometry {
    pub fn new(radius_x: f64, radius_y: f64, density_x: f64, density_y: f64) -> Result<Self> {
        for (name, v) in [
            ("radius_x", radius_x),
            ("radius_y", radius_y),
            ("density_x", density_x),
            ("density_y", density_y),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(SectionPairGeometry {
            radius_x,
            radius_y,
            density_x,
            density_y,
        })
    }

    pub fn symmetric(radius: f64, density: f64) -> Result<Self> {
        Self::new(radius, radius, density, density)
    }

    pub fn radius_sum(&self) -> f64 {
        self.radius_x + self.radius_y
    }

    fn reduced_radius_sqrt(&self) -> f64 {
        (self.radius_x * self.radius_y / (self.radius_x + self.radius_y)).sqrt()
    }
}

/// Offset, gap and normal side of one interacting section pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionKinematics<S = f64> {
    pub q1: S,
    pub q2: S,
    pub q2_hat: S,
    pub s_alpha: f64,
}

pub fn section_constant(law: &PowerLaw, geom: &SectionPairGeometry) -> Result<f64> {
    let m = law.exponent;
    if !(m > 3.5) {
        return Err(Error::Domain(format!("section law requires m > 7/2, got {m}")));
    }
    let gm2 = gamma_real(0.5 * m);
    Ok(law.coefficient
        * geom.density_x
        * geom.density_y
        * 2f64.powf(2.5 - m)
        * PI.powf(1.5)
        * geom.reduced_radius_sqrt()
        * gamma_real(m - 3.5)
        / (gm2 * gm2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IssipFirst<S = f64> {
    pub phi: S,
    pub phi_1: S,
    pub phi_2: S,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IssipDerivs {
    pub phi: f64,
    pub phi_1: f64,
    pub phi_2: f64,
    pub phi_11: f64,
    pub phi_12: f64,
    pub phi_22: f64,
}

#[derive(Debug, Clone, Copy)]
struct IssipTerm {
    constant: f64,
    alpha: f64,
    // 2ab/c and (a+1)(b+1)/(c+1)
    k0: f64,
    k1: f64,
    f0: Hyp2F1,
    f1: Hyp2F1,
    f2: Hyp2F1,
}

impl IssipTerm {
    fn new(law: &PowerLaw, geom: &SectionPairGeometry) -> Result<Self> {
        let m = law.exponent;
        let constant = section_constant(law, geom)?;
        let a = (2.0 * m - 7.0) / 4.0;
        let b = (2.0 * m - 5.0) / 4.0;
        let c = m / 2.0;
        Ok(IssipTerm {
            constant,
            alpha: m - 3.5,
            k0: 2.0 * a * b / c,
            k1: (a + 1.0) * (b + 1.0) / (c + 1.0),
            f0: Hyp2F1::new(a, b, c)?,
            f1: Hyp2F1::new(a + 1.0, b + 1.0, c + 1.0)?,
            f2: Hyp2F1::new(a + 2.0, b + 2.0, c + 2.0)?,
        })
    }
}

/// ISSIP evaluator for a composite law and a fixed section pair.
#[derive(Debug, Clone)]
pub struct Issip {
    terms: Vec<IssipTerm>,
    geom: SectionPairGeometry,
}

fn check_gap(q2: f64) -> Result<()> {
    if q2 > 0.0 {
        Ok(())
    } else {
        Err(Error::Contact { q2 })
    }
}

impl Issip {
    pub fn new(law: &CompositeLaw, geom: &SectionPairGeometry) -> Result<Self> {
        let terms = law
            .terms()
            .iter()
            .map(|t| IssipTerm::new(t, geom))
            .collect::<Result<Vec<_>>>()?;
        Ok(Issip { terms, geom: *geom })
    }

    pub fn geometry(&self) -> &SectionPairGeometry {
        &self.geom
    }

    pub fn value<S: Scalar>(&self, q1: S, q2: S) -> Result<S> {
        check_gap(q2.re())?;
        let u = q1 / q2;
        let z = -(u * u);
        let mut acc = S::zero();
        for t in &self.terms {
            acc += q2.powf(-t.alpha) * t.f0.eval(z)? * t.constant;
        }
        Ok(acc)
    }

    pub fn first<S: Scalar>(&self, q1: S, q2: S) -> Result<IssipFirst<S>> {
        check_gap(q2.re())?;
        let u = q1 / q2;
        let z = -(u * u);
        let inv_q2 = q2.recip();
        let mut out = IssipFirst {
            phi: S::zero(),
            phi_1: S::zero(),
            phi_2: S::zero(),
        };
        for t in &self.terms {
            let p = q2.powf(-t.alpha) * t.constant;
            let f0 = t.f0.eval(z)?;
            let f1 = t.f1.eval(z)?;
            out.phi += p * f0;
            out.phi_1 -= p * u * f1 * inv_q2 * t.k0;
            out.phi_2 += p * inv_q2 * (u * u * f1 * t.k0 - f0 * t.alpha);
        }
        Ok(out)
    }

    pub fn derivs(&self, q1: f64, q2: f64) -> Result<IssipDerivs> {
        check_gap(q2)?;
        let u = q1 / q2;
        let u2 = u * u;
        let z = -u2;
        let mut d = IssipDerivs {
            phi: 0.0,
            phi_1: 0.0,
            phi_2: 0.0,
            phi_11: 0.0,
            phi_12: 0.0,
            phi_22: 0.0,
        };
        for t in &self.terms {
            let p = t.constant * q2.powf(-t.alpha);
            let p1 = p / q2;
            let p2 = p1 / q2;
            let f0 = t.f0.eval(z)?;
            let f1 = t.f1.eval(z)?;
            let f2 = t.f2.eval(z)?;
            let (k0, k1, al) = (t.k0, t.k1, t.alpha);
            d.phi += p * f0;
            d.phi_1 -= k0 * p1 * u * f1;
            d.phi_2 += p1 * (k0 * u2 * f1 - al * f0);
            d.phi_11 -= k0 * p2 * (f1 - 2.0 * k1 * u2 * f2);
            d.phi_12 -= k0 * p2 * u * (2.0 * k1 * u2 * f2 - (al + 2.0) * f1);
            d.phi_22 += p2
                * (al * (al + 1.0) * f0 - k0 * (2.0 * al + 3.0) * u2 * f1
                    + 2.0 * k0 * k1 * u2 * u2 * f2);
        }
        Ok(d)
    }

    /// Linear (zero-offset) law `c q2^(7/2-m)` evaluated from the centroid distance.
    pub fn lssip<S: Scalar>(&self, d: Vec2<S>) -> Result<(S, Vec2<S>)> {
        let r = d.norm();
        let q2 = r - self.geom.radius_sum();
        check_gap(q2.re())?;
        let dhat = d.scale(r.recip());
        let mut phi = S::zero();
        let mut mag = S::zero();
        for t in &self.terms {
            let p = q2.powf(-t.alpha) * t.constant;
            phi += p;
            mag += p / q2 * t.alpha;
        }
        Ok((phi, dhat.scale(mag)))
    }
}

pub fn issip_value(kin: &SectionKinematics, law: &CompositeLaw, geom: &SectionPairGeometry) -> Result<f64> {
    Issip::new(law, geom)?.value(kin.q1, kin.q2)
}

pub fn issip_first_derivs(
    kin: &SectionKinematics,
    law: &CompositeLaw,
    geom: &SectionPairGeometry,
) -> Result<IssipFirst> {
    Issip::new(law, geom)?.first(kin.q1, kin.q2)
}

/// Returns `(phi_11, phi_12, phi_22)`.
pub fn issip_second_derivs(
    kin: &SectionKinematics,
    law: &CompositeLaw,
    geom: &SectionPairGeometry,
) -> Result<(f64, f64, f64)> {
    let d = Issip::new(law, geom)?.derivs(kin.q1, kin.q2)?;
    Ok((d.phi_11, d.phi_12, d.phi_22))
}

/// `(phi_bar, f)` where `f` is the force on beam x; the force on y is `-f`.
pub fn lssip_value_and_force(
    d: Vec2,
    law: &CompositeLaw,
    geom: &SectionPairGeometry,
) -> Result<(f64, Vec2)> {
    Issip::new(law, geom)?.lssip(d)
}

/// Per-length coefficient `A_m` of the section-to-infinite-cylinder law `A_m q2^(9/2-m)`.
pub fn cylinder_coefficient(law: &PowerLaw, geom: &SectionPairGeometry) -> Result<f64> {
    let m = law.exponent;
    if !(m > 4.5) {
        return Err(Error::Domain(format!("cylinder law requires m > 9/2, got {m}")));
    }
    Ok(law.coefficient
        * geom.density_x
        * geom.density_y
        * 2f64.powf(1.5)
        * PI.powf(1.5)
        * geom.reduced_radius_sqrt()
        * gamma_real(m - 4.5)
        / gamma_real(m - 1.0))
}

pub fn cylinder_per_length(q2: f64, law: &CompositeLaw, geom: &SectionPairGeometry) -> Result<f64> {
    check_gap(q2)?;
    let mut acc = 0.0;
    for t in law.terms() {
        acc += cylinder_coefficient(t, geom)? * q2.powf(4.5 - t.exponent);
    }
    Ok(acc)
}

/// `d/dq2` of [`cylinder_per_length`].
pub fn cylinder_per_length_dq2(q2: f64, law: &CompositeLaw, geom: &SectionPairGeometry) -> Result<f64> {
    check_gap(q2)?;
    let mut acc = 0.0;
    for t in law.terms() {
        let e = 4.5 - t.exponent;
        acc += cylinder_coefficient(t, geom)? * e * q2.powf(e - 1.0);
    }
    Ok(acc)
}

pub fn cylinder_per_length_d2q2(q2: f64, law: &CompositeLaw, geom: &SectionPairGeometry) -> Result<f64> {
    check_gap(q2)?;
    let mut acc = 0.0;
    for t in law.terms() {
        let e = 4.5 - t.exponent;
        acc += cylinder_coefficient(t, geom)? * e * (e - 1.0) * q2.powf(e - 2.0);
    }
    Ok(acc)
}

/// Gap at which the per-length potential of a section against a parallel cylinder is stationary.
pub fn equilibrium_gap(lj: &CompositeLaw, geom: &SectionPairGeometry) -> Result<f64> {
    let t = lj.terms();
    if t.len() != 2 {
        return Err(Error::Domain(format!(
            "equilibrium gap needs exactly two terms, got {}",
            t.len()
        )));
    }
    let (lo, hi) = if t[0].exponent < t[1].exponent {
        (t[0], t[1])
    } else {
        (t[1], t[0])
    };
    let a1 = cylinder_coefficient(&lo, geom)?;
    let a2 = cylinder_coefficient(&hi, geom)?;
    // d/dq [A1 q^(9/2-m1) + A2 q^(9/2-m2)] = 0
    let ratio = -(hi.exponent - 4.5) * a2 / ((lo.exponent - 4.5) * a1);
    if !(ratio > 0.0) || a1.signum() == a2.signum() {
        return Err(Error::Domain("no equilibrium: both terms share a sign".into()));
    }
    if !(lo.coefficient < 0.0) {
        return Err(Error::Domain(
            "no stable equilibrium: the longer-ranged term must be attractive".into(),
        ));
    }
    Ok(ratio.powf(1.0 / (hi.exponent - lo.exponent)))
}
