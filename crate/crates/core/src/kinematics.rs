//! Local frames, gap/offset extraction and their gradients.
//!
//! Conventions: `d = x - y`, `n = Λ t` with `Λ = [[0,-1],[1,0]]`,
//! `q1 = d·t_ref`, `q2 = |d·n_ref| - Rx - Ry`, `s = sign(d·n_ref)`.
//! Tangent gradients are taken w.r.t. the unnormalized axis derivatives
//! `x,1` and `y,1`.

use crate::error::{Error, Result};
use crate::laws::{SectionKinematics, SectionPairGeometry};
use crate::scalar::Scalar;
use crate::vec2::{Mat2, Vec2};

pub const DEGENERATE_FRAME_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionFrame<S = f64> {
    pub position: Vec2<S>,
    pub tangent: Vec2<S>,
    pub normal: Vec2<S>,
    pub sqrt_g: S,
}

impl<S: Scalar> SectionFrame<S> {
    /// Frame from a point and the parametric derivative `x,1` there.
    pub fn new(position: Vec2<S>, x1: Vec2<S>) -> Result<Self> {
        let sqrt_g = x1.norm();
        if !(sqrt_g.re() > 1e-12) {
            return Err(Error::Domain(format!(
                "degenerate axis tangent (sqrt_g = {:e})",
                sqrt_g.re()
            )));
        }
        let tangent = x1.scale(sqrt_g.recip());
        Ok(SectionFrame {
            position,
            tangent,
            normal: tangent.perp(),
            sqrt_g,
        })
    }
}

impl SectionFrame<f64> {
    /// `∂t/∂x,1 = (n ⊗ n)/√g`.
    pub fn tangent_jacobian(&self) -> Mat2 {
        Mat2::outer(self.normal, self.normal).scaled(1.0 / self.sqrt_g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragedFrame<S = f64> {
    pub t_hat: Vec2<S>,
    pub n_hat: Vec2<S>,
    pub t_xy: Vec2<S>,
    pub t_xy_sq: S,
    pub flipped: bool,
}

pub fn normal_from_tangent<S: Scalar>(t: Vec2<S>) -> Vec2<S> {
    t.perp()
}

pub fn averaged_frame<S: Scalar>(t_x: Vec2<S>, t_y: Vec2<S>) -> Result<AveragedFrame<S>> {
    let flipped = t_x.dot(t_y).re() < 0.0;
    let t_y = if flipped { -t_y } else { t_y };
    let t_xy = t_x + t_y;
    let t_xy_sq = t_xy.norm_sq();
    let norm = t_xy_sq.sqrt();
    if !(norm.re() >= DEGENERATE_FRAME_TOL) {
        return Err(Error::DegenerateFrame { norm: norm.re() });
    }
    let t_hat = t_xy.scale(norm.recip());
    Ok(AveragedFrame {
        t_hat,
        n_hat: t_hat.perp(),
        t_xy,
        t_xy_sq,
        flipped,
    })
}

pub fn gap_offset<S: Scalar>(
    t_ref: Vec2<S>,
    n_ref: Vec2<S>,
    d: Vec2<S>,
    geom: &SectionPairGeometry,
) -> Result<SectionKinematics<S>> {
    let q1 = d.dot(t_ref);
    let proj = d.dot(n_ref);
    let s_alpha = if proj.re() < 0.0 { -1.0 } else { 1.0 };
    let q2_hat = proj * s_alpha;
    let q2 = q2_hat - geom.radius_sum();
    if !(q2.re() > 0.0) {
        return Err(Error::Contact { q2: q2.re() });
    }
    Ok(SectionKinematics {
        q1,
        q2,
        q2_hat,
        s_alpha,
    })
}

pub fn gap_offset_averaged<S: Scalar>(
    frame: &AveragedFrame<S>,
    d: Vec2<S>,
    geom: &SectionPairGeometry,
) -> Result<SectionKinematics<S>> {
    gap_offset(frame.t_hat, frame.n_hat, d, geom)
}

pub fn gap_offset_straightforward<S: Scalar>(
    frame_x: &SectionFrame<S>,
    d: Vec2<S>,
    geom: &SectionPairGeometry,
) -> Result<SectionKinematics<S>> {
    gap_offset(frame_x.tangent, frame_x.normal, d, geom)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapOffsetGradients {
    pub d_q1_dx: Vec2,
    pub d_q2_dx: Vec2,
    pub d_q1_dy: Vec2,
    pub d_q2_dy: Vec2,
    pub d_q1_dx1: Vec2,
    pub d_q2_dx1: Vec2,
    pub d_q1_dy1: Vec2,
    pub d_q2_dy1: Vec2,
}

/// Frozen-frame position gradients `(∇x q1, ∇x q2, ∇y q1, ∇y q2)`.
pub fn position_gradients_averaged(frame: &AveragedFrame, s_alpha: f64) -> (Vec2, Vec2, Vec2, Vec2) {
    let g1 = frame.t_hat;
    let g2 = frame.n_hat.scale(s_alpha);
    (g1, g2, -g1, -g2)
}

/// Gradients of the averaged tangent `t̂` w.r.t. `x,1` and `y,1`.
pub fn averaged_tangent_jacobians(
    fx: &SectionFrame,
    fy: &SectionFrame,
    avg: &AveragedFrame,
) -> (Mat2, Mat2) {
    let inv = 1.0 / avg.t_xy_sq.sqrt();
    let proj = (Mat2::IDENTITY - Mat2::outer(avg.t_hat, avg.t_hat)).scaled(inv);
    let sigma = if avg.flipped { -1.0 } else { 1.0 };
    (
        proj.matmul(fx.tangent_jacobian()),
        proj.matmul(fy.tangent_jacobian()).scaled(sigma),
    )
}

fn tangent_part(jac_t: Mat2, d: Vec2, s_alpha: f64) -> (Vec2, Vec2) {
    let jt = jac_t.transpose();
    (jt.apply(d), jt.apply(d.perp_t()).scale(s_alpha))
}

/// Full averaged-frame gradients. Also returns `∂t̂/∂x,1` and `∂t̂/∂y,1`.
pub fn tangent_gradients_averaged(
    fx: &SectionFrame,
    fy: &SectionFrame,
    d: Vec2,
    kin: &SectionKinematics,
) -> Result<(GapOffsetGradients, Mat2, Mat2)> {
    let avg = averaged_frame(fx.tangent, fy.tangent)?;
    let (jx, jy) = averaged_tangent_jacobians(fx, fy, &avg);
    let (g1x, g2x, g1y, g2y) = position_gradients_averaged(&avg, kin.s_alpha);
    let (q1x1, q2x1) = tangent_part(jx, d, kin.s_alpha);
    let (q1y1, q2y1) = tangent_part(jy, d, kin.s_alpha);
    Ok((
        GapOffsetGradients {
            d_q1_dx: g1x,
            d_q2_dx: g2x,
            d_q1_dy: g1y,
            d_q2_dy: g2y,
            d_q1_dx1: q1x1,
            d_q2_dx1: q2x1,
            d_q1_dy1: q1y1,
            d_q2_dy1: q2y1,
        },
        jx,
        jy,
    ))
}

/// Gradients when the frame of beam x is the reference.
pub fn gradients_straightforward(frame_x: &SectionFrame, _d: Vec2, kin: &SectionKinematics) -> GapOffsetGradients {
    let k = kin.s_alpha / frame_x.sqrt_g;
    let t = frame_x.tangent;
    let n = frame_x.normal;
    GapOffsetGradients {
        d_q1_dx: t,
        d_q2_dx: n.scale(kin.s_alpha),
        d_q1_dy: -t,
        d_q2_dy: -n.scale(kin.s_alpha),
        d_q1_dx1: n.scale(k * kin.q2_hat),
        d_q2_dx1: n.scale(-k * kin.q1),
        d_q1_dy1: Vec2::zero(),
        d_q2_dy1: Vec2::zero(),
    }
}

/// Weights splitting the interaction moment between the two beams.
pub fn moment_weights(geom: &SectionPairGeometry) -> (f64, f64) {
    let w_x = geom.radius_x / (geom.radius_x + geom.radius_y);
    (w_x, 1.0 - w_x)
}
