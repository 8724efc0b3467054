//! Rotation-free isogeometric Bernoulli-Euler beam in the plane.
//!
//! Strain energy `Φ = ½ ∫ (EA ε_a² + EI χ²) ds` over the reference arc length
//! with `ε_a = (G - g)/(2g)` and `χ = K - K_ref`, where `g`, `G` are the
//! reference and current squared axis metrics and `K = (x,1 × x,11)/G^{3/2}`.
//! Each control point carries two displacement DOFs `(2i, 2i+1)`.

use crate::bspline::{BSplineBasis, BasisValues};
use crate::error::{Error, Result};
use crate::quad::gauss_legendre;
use crate::scalar::Scalar;
use crate::vec2::{Mat2, Vec2};
use nalgebra::DMatrix;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisMetric<S = f64> {
    pub g: S,
    pub sqrt_g: S,
    pub t: Vec2<S>,
    pub n: Vec2<S>,
    pub k: S,
    pub k_tilde: S,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrainState<S = f64> {
    pub eps11: S,
    pub kappa: S,
    pub chi: S,
}

#[derive(Debug, Clone)]
struct GaussPoint {
    xi: f64,
    /// quadrature weight times reference `√g`
    w: f64,
    first: usize,
    d1: Vec<f64>,
    d2: Vec<f64>,
    g_ref: f64,
    k_ref: f64,
}

#[derive(Debug, Clone)]
pub struct BSplineBeam {
    basis: BSplineBasis,
    control_points: Vec<Vec2>,
    radius: f64,
    youngs_modulus: f64,
    gauss: Vec<GaussPoint>,
}

/// Current position and its first two parametric derivatives.
fn axis_derivatives<S: Scalar>(
    cps: &[Vec2],
    u: &[S],
    first: usize,
    ders: &[Vec<f64>],
    upto: usize,
) -> [Vec2<S>; 3] {
    let mut out = [Vec2::<S>::zero(); 3];
    for j in 0..ders[0].len() {
        let i = first + j;
        let p = Vec2::new(u[2 * i] + cps[i].x, u[2 * i + 1] + cps[i].y);
        for k in 0..=upto {
            out[k] += p * ders[k][j];
        }
    }
    out
}

fn metric_from<S: Scalar>(x1: Vec2<S>, x11: Vec2<S>) -> Result<AxisMetric<S>> {
    let g = x1.norm_sq();
    let sqrt_g = g.sqrt();
    if !(sqrt_g.re() >= 1e-12) {
        return Err(Error::Domain(format!("degenerate axis (sqrt_g = {:e})", sqrt_g.re())));
    }
    let t = x1.scale(sqrt_g.recip());
    let n = t.perp();
    let k_tilde = x11.dot(n);
    Ok(AxisMetric {
        g,
        sqrt_g,
        t,
        n,
        k: k_tilde / g,
        k_tilde,
    })
}

impl BSplineBeam {
    pub fn new(
        basis: BSplineBasis,
        control_points: Vec<Vec2>,
        radius: f64,
        youngs_modulus: f64,
    ) -> Result<Self> {
        if control_points.len() != basis.num_functions() {
            return Err(Error::Domain(format!(
                "{} control points for {} basis functions",
                control_points.len(),
                basis.num_functions()
            )));
        }
        if !(radius > 0.0) {
            return Err(Error::Domain(format!("radius must be positive, got {radius}")));
        }
        if !(youngs_modulus > 0.0) {
            return Err(Error::Domain(format!(
                "Young's modulus must be positive, got {youngs_modulus}"
            )));
        }
        let p = basis.degree();
        let (gx, gw) = gauss_legendre(p + 1);
        let mut gauss = Vec::new();
        for (a, b) in basis.elements() {
            let half = 0.5 * (b - a);
            for (x, w) in gx.iter().zip(&gw) {
                let xi = a + half * (x + 1.0);
                let v = basis.eval(xi, 2)?;
                let zero = vec![0.0; 2 * control_points.len()];
                let [_, x1, x11] = axis_derivatives::<f64>(&control_points, &zero, v.first, &v.ders, 2);
                let m = metric_from(x1, x11)?;
                gauss.push(GaussPoint {
                    xi,
                    w: w * half * m.sqrt_g,
                    first: v.first,
                    d1: v.ders[1].clone(),
                    d2: v.ders[2].clone(),
                    g_ref: m.g,
                    k_ref: m.k,
                });
            }
        }
        Ok(BSplineBeam {
            basis,
            control_points,
            radius,
            youngs_modulus,
            gauss,
        })
    }

    /// Straight beam from `a` to `b` on a uniform clamped knot vector, control
    /// points at the Greville abscissae.
    pub fn straight(
        a: Vec2,
        b: Vec2,
        degree: usize,
        n_control: usize,
        radius: f64,
        youngs_modulus: f64,
    ) -> Result<Self> {
        let basis = BSplineBasis::clamped_uniform(degree, n_control)?;
        let cps = basis.greville().iter().map(|&s| a + (b - a) * s).collect();
        Self::new(basis, cps, radius, youngs_modulus)
    }

    pub fn basis(&self) -> &BSplineBasis {
        &self.basis
    }

    pub fn control_points(&self) -> &[Vec2] {
        &self.control_points
    }

    pub fn num_control_points(&self) -> usize {
        self.control_points.len()
    }

    pub fn num_dofs(&self) -> usize {
        2 * self.control_points.len()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn youngs_modulus(&self) -> f64 {
        self.youngs_modulus
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }

    pub fn inertia(&self) -> f64 {
        PI * self.radius.powi(4) / 4.0
    }

    pub fn ea(&self) -> f64 {
        self.youngs_modulus * self.area()
    }

    pub fn ei(&self) -> f64 {
        self.youngs_modulus * self.inertia()
    }

    /// Reference arc length by Gauss quadrature.
    pub fn reference_length(&self) -> f64 {
        self.gauss.iter().map(|g| g.w).sum()
    }

    pub fn basis_eval(&self, xi: f64, order: usize) -> Result<BasisValues> {
        self.basis.eval(xi, order)
    }

    pub fn position<S: Scalar>(&self, u: &[S], xi: f64) -> Result<Vec2<S>> {
        let v = self.basis.eval(xi, 0)?;
        Ok(axis_derivatives(&self.control_points, u, v.first, &v.ders, 0)[0])
    }

    /// Position and `x,1` at `xi`.
    pub fn position_and_tangent<S: Scalar>(&self, u: &[S], xi: f64) -> Result<(Vec2<S>, Vec2<S>)> {
        let v = self.basis.eval(xi, 1)?;
        let [x, x1, _] = axis_derivatives(&self.control_points, u, v.first, &v.ders, 1);
        Ok((x, x1))
    }

    pub fn axis_metric<S: Scalar>(&self, u: &[S], xi: f64) -> Result<AxisMetric<S>> {
        let v = self.basis.eval(xi, 2)?;
        let [_, x1, x11] = axis_derivatives(&self.control_points, u, v.first, &v.ders, 2);
        metric_from(x1, x11)
    }

    pub fn reference_metric(&self, xi: f64) -> Result<AxisMetric> {
        self.axis_metric::<f64>(&vec![0.0; self.num_dofs()], xi)
    }

    pub fn strains<S: Scalar>(&self, u: &[S], xi: f64) -> Result<StrainState<S>> {
        let cur = self.axis_metric(u, xi)?;
        let rf = self.reference_metric(xi)?;
        Ok(StrainState {
            eps11: (cur.g - rf.g) * 0.5,
            kappa: cur.k_tilde - rf.k_tilde,
            chi: cur.k - rf.k,
        })
    }

    /// Axial stress resultant `N = EA ε_a` and stress couple `M = EI χ`.
    pub fn stress_outputs(&self, u: &[f64], xi: f64) -> Result<(f64, f64)> {
        let s = self.strains(u, xi)?;
        let g = self.reference_metric(xi)?.g;
        Ok((self.ea() * s.eps11 / g, self.ei() * s.chi))
    }

    pub fn energy<S: Scalar>(&self, u: &[S]) -> Result<S> {
        let (ea, ei) = (self.ea(), self.ei());
        let mut e = S::zero();
        for gp in &self.gauss {
            let (eps, chi) = self.point_strains(gp, u)?.0;
            e += (eps * eps * ea + chi * chi * ei) * (0.5 * gp.w);
        }
        Ok(e)
    }

    #[allow(clippy::type_complexity)]
    fn point_strains<S: Scalar>(&self, gp: &GaussPoint, u: &[S]) -> Result<((S, S), (Vec2<S>, Vec2<S>, S, S))> {
        let (a, b) = self.point_ab(gp, u);
        let g2 = a.norm_sq();
        if !(g2.re() > 1e-24) {
            return Err(Error::Domain("degenerate axis in strain evaluation".into()));
        }
        let c = a.cross(b);
        let inv_sqrt = g2.sqrt().recip();
        let inv_g32 = inv_sqrt / g2;
        let k = c * inv_g32;
        let eps = (g2 - gp.g_ref) / (2.0 * gp.g_ref);
        Ok(((eps, k - gp.k_ref), (a, b, c, g2)))
    }

    fn point_ab<S: Scalar>(&self, gp: &GaussPoint, u: &[S]) -> (Vec2<S>, Vec2<S>) {
        let mut a = Vec2::<S>::zero();
        let mut b = Vec2::<S>::zero();
        for j in 0..gp.d1.len() {
            let i = gp.first + j;
            let p = Vec2::new(u[2 * i] + self.control_points[i].x, u[2 * i + 1] + self.control_points[i].y);
            a += p * gp.d1[j];
            b += p * gp.d2[j];
        }
        (a, b)
    }

    /// Internal force vector `∂Φ/∂u`, added into `res` (beam-local indexing).
    pub fn add_internal_forces<S: Scalar>(&self, u: &[S], res: &mut [S]) -> Result<()> {
        let (ea, ei) = (self.ea(), self.ei());
        for gp in &self.gauss {
            let ((eps, chi), (a, b, c, g2)) = self.point_strains(gp, u)?;
            let inv_g32 = g2.sqrt().recip() / g2;
            let inv_g52 = inv_g32 / g2;
            let de_da = a.scale(S::from_f64(1.0 / gp.g_ref));
            let dk_da = b.perp_t().scale(inv_g32) - a.scale(c * inv_g52 * 3.0);
            let dk_db = a.perp().scale(inv_g32);
            let sa = eps * (ea * gp.w);
            let sb = chi * (ei * gp.w);
            let va = de_da.scale(sa) + dk_da.scale(sb);
            let vb = dk_db.scale(sb);
            for j in 0..gp.d1.len() {
                let i = gp.first + j;
                let r = va * gp.d1[j] + vb * gp.d2[j];
                res[2 * i] += r.x;
                res[2 * i + 1] += r.y;
            }
        }
        Ok(())
    }

    /// Internal forces and the symmetric stiffness `∂²Φ/∂u²`. The block is
    /// added at `offset` into the global vector and matrix.
    pub fn add_internal_forces_and_tangent(
        &self,
        u: &[f64],
        offset: usize,
        res: &mut [f64],
        kmat: &mut DMatrix<f64>,
    ) -> Result<()> {
        let (ea, ei) = (self.ea(), self.ei());
        let nb = self.gauss.first().map_or(0, |g| g.d1.len());
        let mut dk = vec![Vec2::zero(); nb];
        for gp in &self.gauss {
            let ((eps, chi), (a, b, c, g2)) = self.point_strains(gp, u)?;
            let inv_g32 = g2.powf(-1.5);
            let inv_g52 = inv_g32 / g2;
            let inv_g72 = inv_g52 / g2;
            let inv_gref = 1.0 / gp.g_ref;
            let lb = b.perp_t();
            let la = a.perp();
            let dk_da = lb.scale(inv_g32) - a.scale(3.0 * c * inv_g52);
            let dk_db = la.scale(inv_g32);
            let kaa = (Mat2::outer(lb, a) + Mat2::outer(a, lb)).scaled(-3.0 * inv_g52)
                + Mat2::IDENTITY.scaled(-3.0 * c * inv_g52)
                + Mat2::outer(a, a).scaled(15.0 * c * inv_g72);
            let kab = Mat2::PERP.transpose().scaled(inv_g32) - Mat2::outer(a, la).scaled(3.0 * inv_g52);
            let kba = kab.transpose();
            let w_ea = ea * gp.w;
            let w_ei = ei * gp.w;
            for j in 0..nb {
                dk[j] = dk_da * gp.d1[j] + dk_db * gp.d2[j];
                let i = offset + 2 * (gp.first + j);
                let r = a.scale(inv_gref * eps * w_ea * gp.d1[j]) + dk[j].scale(chi * w_ei);
                res[i] += r.x;
                res[i + 1] += r.y;
            }
            let ae = a.scale(inv_gref);
            for j in 0..nb {
                let (n1j, n2j) = (gp.d1[j], gp.d2[j]);
                let row = offset + 2 * (gp.first + j);
                for l in 0..nb {
                    let (n1l, n2l) = (gp.d1[l], gp.d2[l]);
                    let col = offset + 2 * (gp.first + l);
                    let mut blk = Mat2::outer(ae, ae).scaled(w_ea * n1j * n1l)
                        + Mat2::IDENTITY.scaled(w_ea * eps * inv_gref * n1j * n1l)
                        + Mat2::outer(dk[j], dk[l]).scaled(w_ei);
                    let second = kaa.scaled(n1j * n1l) + kab.scaled(n1j * n2l) + kba.scaled(n2j * n1l);
                    blk += second.scaled(w_ei * chi);
                    kmat[(row, col)] += blk.a;
                    kmat[(row, col + 1)] += blk.b;
                    kmat[(row + 1, col)] += blk.c;
                    kmat[(row + 1, col + 1)] += blk.d;
                }
            }
        }
        Ok(())
    }

    pub fn quadrature_parameters(&self) -> Vec<f64> {
        self.gauss.iter().map(|g| g.xi).collect()
    }
}
