//! Cutoff-limited section-section interaction between two beams.
//!
//! Each beam is covered by mid-point quadrature points. For every pair of
//! points (one per beam) whose centroids are within the cutoff, the ISSIP
//! force `f = φ,1 t_ref + φ,2 s n_ref` is the gradient of the pair potential
//! w.r.t. the position of the beam-x section; beam x receives `+w f`, beam y
//! receives `-w f` in the residual (the physical force on x is `-f`).

use crate::beam::BSplineBeam;
use crate::error::{Error, Result};
use crate::kinematics::{
    averaged_frame, averaged_tangent_jacobians, gap_offset, moment_weights, SectionFrame,
};
use crate::laws::{cylinder_per_length_dq2, CompositeLaw, Issip, SectionKinematics, SectionPairGeometry};
use crate::quad::{integrate_with_breaks, AdaptiveOptions};
use crate::scalar::Scalar;
use crate::vec2::{Mat2, Vec2};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Formulation {
    #[default]
    Averaged,
    Straightforward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MomentTreatment {
    /// No interaction moments.
    #[default]
    Off,
    /// Couple split between the sections by `moment_weights`.
    Distributed,
    /// Whole couple on the reference beam x; with the straightforward
    /// formulation this is the exact gradient of the pair potential.
    ReferenceBeam,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionOptions {
    pub formulation: Formulation,
    pub moments: MomentTreatment,
    pub cutoff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub beam: usize,
    pub element: usize,
    pub xi: f64,
    /// parametric weight
    pub weight: f64,
    pub ref_sqrt_g: f64,
    /// reference arc length from the start of the beam
    pub s_ref: f64,
    first: usize,
}

/// Mid-point interaction quadrature on a pair of beams.
#[derive(Debug, Clone)]
pub struct InteractionGrid {
    pub density: f64,
    nb: usize,
    points: [Vec<GridPoint>; 2],
    n0: [Vec<f64>; 2],
    n1: [Vec<f64>; 2],
}

fn largest_remainder(total: usize, shares: &[f64]) -> Vec<usize> {
    let sum: f64 = shares.iter().sum();
    let exact: Vec<f64> = shares.iter().map(|s| s / sum * total as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut left = total - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    counts
}

impl InteractionGrid {
    pub fn new(beams: [&BSplineBeam; 2], density: f64) -> Result<Self> {
        if !(density >= 1.0) {
            return Err(Error::Domain(format!("interaction density must be >= 1, got {density}")));
        }
        let nb = beams[0].basis().degree() + 1;
        if beams[1].basis().degree() + 1 != nb {
            return Err(Error::Domain("both beams must share the spline degree".into()));
        }
        let mut points: [Vec<GridPoint>; 2] = [Vec::new(), Vec::new()];
        let mut n0: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
        let mut n1: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
        for (k, beam) in beams.iter().enumerate() {
            let total = (beam.reference_length() * density - 1e-9).ceil().max(1.0) as usize;
            let elements = beam.basis().elements();
            let spans: Vec<f64> = elements.iter().map(|(a, b)| b - a).collect();
            let counts = largest_remainder(total, &spans);
            let mut s_acc = 0.0;
            for (e, (&(a, b), &cnt)) in elements.iter().zip(&counts).enumerate() {
                if cnt == 0 {
                    continue;
                }
                let h = (b - a) / cnt as f64;
                for i in 0..cnt {
                    let xi = a + (i as f64 + 0.5) * h;
                    let v = beam.basis_eval(xi, 1)?;
                    let sg = beam.reference_metric(xi)?.sqrt_g;
                    points[k].push(GridPoint {
                        beam: k,
                        element: e,
                        xi,
                        weight: h,
                        ref_sqrt_g: sg,
                        s_ref: s_acc + 0.5 * h * sg,
                        first: v.first,
                    });
                    s_acc += h * sg;
                    n0[k].extend_from_slice(&v.ders[0]);
                    n1[k].extend_from_slice(&v.ders[1]);
                }
            }
        }
        Ok(InteractionGrid {
            density,
            nb,
            points,
            n0,
            n1,
        })
    }

    pub fn points(&self, beam: usize) -> &[GridPoint] {
        &self.points[beam]
    }

    pub fn len(&self, beam: usize) -> usize {
        self.points[beam].len()
    }

    pub fn is_empty(&self) -> bool {
        self.points[0].is_empty() && self.points[1].is_empty()
    }

    fn basis(&self, beam: usize, i: usize) -> (&[f64], &[f64]) {
        let r = i * self.nb..(i + 1) * self.nb;
        (&self.n0[beam][r.clone()], &self.n1[beam][r])
    }

    /// Frames at the current configuration. `u` holds the DOFs of one beam.
    pub fn frames<S: Scalar>(&self, beam: usize, b: &BSplineBeam, u: &[S]) -> Result<Vec<SectionFrame<S>>> {
        let cps = b.control_points();
        self.points[beam]
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let (n0, n1) = self.basis(beam, i);
                let mut x = Vec2::<S>::zero();
                let mut x1 = Vec2::<S>::zero();
                for j in 0..self.nb {
                    let c = p.first + j;
                    let q = Vec2::new(u[2 * c] + cps[c].x, u[2 * c + 1] + cps[c].y);
                    x += q * n0[j];
                    x1 += q * n1[j];
                }
                SectionFrame::new(x, x1)
            })
            .collect()
    }

    /// `Σ weight·√g_ref` per beam.
    pub fn reference_lengths(&self) -> [f64; 2] {
        [0, 1].map(|k| self.points[k].iter().map(|p| p.weight * p.ref_sqrt_g).sum())
    }
}

/// Build the grid and evaluate its frames (`u` per beam).
pub fn build_grid(beams: [&BSplineBeam; 2], u: [&[f64]; 2], density: f64) -> Result<(InteractionGrid, [Vec<SectionFrame>; 2])> {
    let grid = InteractionGrid::new(beams, density)?;
    let fx = grid.frames(0, beams[0], u[0])?;
    let fy = grid.frames(1, beams[1], u[1])?;
    Ok((grid, [fx, fy]))
}

/// Uniform hash grid over a point cloud.
#[derive(Debug, Clone)]
pub struct NeighborIndex {
    cell: f64,
    cells: HashMap<(i64, i64), Vec<u32>>,
}

impl NeighborIndex {
    pub fn new(points: &[Vec2], cell: f64) -> Self {
        let mut cells: HashMap<(i64, i64), Vec<u32>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(Self::key(cell, *p)).or_default().push(i as u32);
        }
        NeighborIndex { cell, cells }
    }

    fn key(cell: f64, p: Vec2) -> (i64, i64) {
        ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64)
    }

    /// Indices within `radius <= cell` of `p`, unsorted.
    pub fn query(&self, points: &[Vec2], p: Vec2, radius: f64, out: &mut Vec<u32>) {
        let (cx, cy) = Self::key(self.cell, p);
        let r2 = radius * radius;
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(v) = self.cells.get(&(cx + dx, cy + dy)) {
                    out.extend(v.iter().copied().filter(|&j| (points[j as usize] - p).norm_sq() <= r2));
                }
            }
        }
    }
}

/// All `(i, j)` with `|x_i - y_j| <= c`, sorted.
pub fn find_pairs(xs: &[Vec2], ys: &[Vec2], c: f64) -> Vec<(u32, u32)> {
    assert!(c > 0.0);
    let idx = NeighborIndex::new(ys, c);
    let mut pairs = Vec::new();
    let mut buf = Vec::new();
    for (i, p) in xs.iter().enumerate() {
        buf.clear();
        idx.query(ys, *p, c, &mut buf);
        buf.sort_unstable();
        pairs.extend(buf.iter().map(|&j| (i as u32, j)));
    }
    pairs
}

/// Force and optional moments of a single section pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairContribution<S = f64> {
    pub ix: u32,
    pub iy: u32,
    pub kin: SectionKinematics<S>,
    pub force: Vec2<S>,
    pub fhat_x: Option<Vec2<S>>,
    pub fhat_y: Option<Vec2<S>>,
    pub weight: f64,
    pub phi: S,
}

#[derive(Debug, Clone, Copy)]
struct PairTangent {
    ix: u32,
    iy: u32,
    w: f64,
    q2: f64,
    f: Vec2,
    fhat_x: Vec2,
    fhat_y: Vec2,
    dx: Mat2,
    dx1: Mat2,
    dy1: Mat2,
    /// `∂f̂ / ∂(x, x,1, y,1)` for each beam; `∂f̂/∂y = -∂f̂/∂x`
    hx: [Mat2; 3],
    hy: [Mat2; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InteractionReport {
    pub pairs: usize,
    pub min_gap: f64,
    /// Σ of interaction residual entries per beam (x and y components).
    pub total_x: Vec2,
    pub total_y: Vec2,
}

/// Reference axes of a pair.
fn reference_axes<S: Scalar>(
    form: Formulation,
    fx: &SectionFrame<S>,
    fy: &SectionFrame<S>,
) -> Result<(Vec2<S>, Vec2<S>, bool)> {
    match form {
        Formulation::Averaged => {
            let a = averaged_frame(fx.tangent, fy.tangent)?;
            Ok((a.t_hat, a.n_hat, a.flipped))
        }
        Formulation::Straightforward => Ok((fx.tangent, fx.normal, false)),
    }
}

fn moment_split(m: MomentTreatment, geom: &SectionPairGeometry) -> Option<(f64, f64)> {
    match m {
        MomentTreatment::Off => None,
        MomentTreatment::Distributed => Some(moment_weights(geom)),
        MomentTreatment::ReferenceBeam => Some((1.0, 0.0)),
    }
}

/// Evaluate one pair.
pub fn pair_force<S: Scalar>(
    issip: &Issip,
    fx: &SectionFrame<S>,
    fy: &SectionFrame<S>,
    options: &InteractionOptions,
) -> Result<(SectionKinematics<S>, Vec2<S>, Option<(Vec2<S>, Vec2<S>)>, S)> {
    let geom = issip.geometry();
    let (t, n, _) = reference_axes(options.formulation, fx, fy)?;
    let d = fx.position - fy.position;
    let kin = gap_offset(t, n, d, geom)?;
    let fd = issip.first(kin.q1, kin.q2)?;
    let f = t.scale(fd.phi_1) + n.scale(fd.phi_2 * kin.s_alpha);
    let moments = moment_split(options.moments, geom).map(|(wx, wy)| {
        let c = (fd.phi_1 * kin.q2_hat - fd.phi_2 * kin.q1) * kin.s_alpha;
        (
            fx.normal.scale(c / fx.sqrt_g * wx),
            fy.normal.scale(c / fy.sqrt_g * wy),
        )
    });
    Ok((kin, f, moments, fd.phi))
}

#[derive(Debug, Clone)]
pub struct Interaction {
    grid: InteractionGrid,
    issip: Issip,
    law: CompositeLaw,
    options: InteractionOptions,
    offsets: [usize; 2],
    ndofs: [usize; 2],
}

fn scatter_add(k: &mut [f64], nrows: usize, row: usize, col: usize, m: Mat2) {
    k[col * nrows + row] += m.a;
    k[col * nrows + row + 1] += m.c;
    k[(col + 1) * nrows + row] += m.b;
    k[(col + 1) * nrows + row + 1] += m.d;
}

impl Interaction {
    pub fn new(
        beams: [&BSplineBeam; 2],
        offsets: [usize; 2],
        law: &CompositeLaw,
        geom: &SectionPairGeometry,
        density: f64,
        options: InteractionOptions,
    ) -> Result<Self> {
        if !(options.cutoff > 0.0) {
            return Err(Error::Domain(format!("cutoff must be positive, got {}", options.cutoff)));
        }
        Ok(Interaction {
            grid: InteractionGrid::new(beams, density)?,
            issip: Issip::new(law, geom)?,
            law: law.clone(),
            options,
            offsets,
            ndofs: [beams[0].num_dofs(), beams[1].num_dofs()],
        })
    }

    pub fn grid(&self) -> &InteractionGrid {
        &self.grid
    }

    pub fn issip(&self) -> &Issip {
        &self.issip
    }

    pub fn law(&self) -> &CompositeLaw {
        &self.law
    }

    pub fn options(&self) -> &InteractionOptions {
        &self.options
    }

    pub fn set_options(&mut self, options: InteractionOptions) {
        self.options = options;
    }

    fn split<'a, S>(&self, u: &'a [S]) -> [&'a [S]; 2] {
        [
            &u[self.offsets[0]..self.offsets[0] + self.ndofs[0]],
            &u[self.offsets[1]..self.offsets[1] + self.ndofs[1]],
        ]
    }

    pub fn frames<S: Scalar>(&self, beams: [&BSplineBeam; 2], u: &[S]) -> Result<[Vec<SectionFrame<S>>; 2]> {
        let [ux, uy] = self.split(u);
        Ok([self.grid.frames(0, beams[0], ux)?, self.grid.frames(1, beams[1], uy)?])
    }

    pub fn pairs_for<S: Scalar>(&self, frames: &[Vec<SectionFrame<S>>; 2]) -> Vec<(u32, u32)> {
        let xs: Vec<Vec2> = frames[0].iter().map(|f| f.position.re()).collect();
        let ys: Vec<Vec2> = frames[1].iter().map(|f| f.position.re()).collect();
        find_pairs(&xs, &ys, self.options.cutoff)
    }

    pub fn find_pairs(&self, beams: [&BSplineBeam; 2], u: &[f64]) -> Result<Vec<(u32, u32)>> {
        Ok(self.pairs_for(&self.frames(beams, u)?))
    }

    fn pair_weight(&self, ix: u32, iy: u32) -> f64 {
        let px = &self.grid.points[0][ix as usize];
        let py = &self.grid.points[1][iy as usize];
        px.weight * px.ref_sqrt_g * py.weight * py.ref_sqrt_g
    }

    pub fn contributions<S: Scalar>(
        &self,
        frames: &[Vec<SectionFrame<S>>; 2],
        pairs: &[(u32, u32)],
    ) -> Result<Vec<PairContribution<S>>> {
        pairs
            .par_chunks(2048)
            .map(|chunk| {
                chunk
                    .iter()
                    .map(|&(ix, iy)| {
                        let fx = &frames[0][ix as usize];
                        let fy = &frames[1][iy as usize];
                        let (kin, force, m, phi) = pair_force(&self.issip, fx, fy, &self.options)?;
                        Ok(PairContribution {
                            ix,
                            iy,
                            kin,
                            force,
                            fhat_x: m.map(|m| m.0),
                            fhat_y: m.map(|m| m.1),
                            weight: self.pair_weight(ix, iy),
                            phi,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<Vec<_>>>>()
            .map(|v| v.into_iter().flatten().collect())
    }

    fn scatter_residual<S: Scalar>(&self, contribs: &[PairContribution<S>], res: &mut [S]) -> InteractionReport {
        let mut rep = InteractionReport {
            pairs: contribs.len(),
            min_gap: f64::INFINITY,
            ..Default::default()
        };
        let nb = self.grid.nb;
        for c in contribs {
            rep.min_gap = rep.min_gap.min(c.kin.q2.re());
            let px = &self.grid.points[0][c.ix as usize];
            let py = &self.grid.points[1][c.iy as usize];
            let (nx0, nx1) = self.grid.basis(0, c.ix as usize);
            let (ny0, ny1) = self.grid.basis(1, c.iy as usize);
            let fw = c.force * c.weight;
            for j in 0..nb {
                let ix = self.offsets[0] + 2 * (px.first + j);
                let iy = self.offsets[1] + 2 * (py.first + j);
                let mut rx = fw * nx0[j];
                let mut ry = -(fw * ny0[j]);
                if let (Some(hx), Some(hy)) = (c.fhat_x, c.fhat_y) {
                    rx += hx * (c.weight * nx1[j]);
                    ry += hy * (c.weight * ny1[j]);
                }
                res[ix] += rx.x;
                res[ix + 1] += rx.y;
                res[iy] += ry.x;
                res[iy + 1] += ry.y;
            }
        }
        rep
    }

    fn totals<S: Scalar>(&self, res: &[S], before: &[S]) -> (Vec2, Vec2) {
        let mut t = [Vec2::zero(), Vec2::zero()];
        for k in 0..2 {
            for i in (0..self.ndofs[k]).step_by(2) {
                let g = self.offsets[k] + i;
                t[k].x += res[g].re() - before[g].re();
                t[k].y += res[g + 1].re() - before[g + 1].re();
            }
        }
        (t[0], t[1])
    }

    /// Add the interaction residual. `pairs = None` re-searches pairs.
    pub fn add_residual<S: Scalar>(
        &self,
        beams: [&BSplineBeam; 2],
        u: &[S],
        pairs: Option<&[(u32, u32)]>,
        res: &mut [S],
    ) -> Result<InteractionReport> {
        let frames = self.frames(beams, u)?;
        let owned;
        let pairs = match pairs {
            Some(p) => p,
            None => {
                owned = self.pairs_for(&frames);
                &owned
            }
        };
        let contribs = self.contributions(&frames, pairs)?;
        let before: Vec<S> = res.to_vec();
        let mut rep = self.scatter_residual(&contribs, res);
        (rep.total_x, rep.total_y) = self.totals(res, &before);
        Ok(rep)
    }

    /// Interaction energy `Σ w φ`.
    pub fn energy(&self, beams: [&BSplineBeam; 2], u: &[f64], pairs: Option<&[(u32, u32)]>) -> Result<f64> {
        let frames = self.frames(beams, u)?;
        let owned;
        let pairs = match pairs {
            Some(p) => p,
            None => {
                owned = self.pairs_for(&frames);
                &owned
            }
        };
        let c = self.contributions(&frames, pairs)?;
        Ok(c.iter().map(|c| c.weight * c.phi).sum())
    }

    fn pair_tangent(
        &self,
        fx: &SectionFrame,
        fy: &SectionFrame,
        ix: u32,
        iy: u32,
    ) -> Result<PairTangent> {
        let geom = self.issip.geometry();
        let d = fx.position - fy.position;
        let (t, n, jx, jy) = match self.options.formulation {
            Formulation::Averaged => {
                let avg = averaged_frame(fx.tangent, fy.tangent)?;
                let (jx, jy) = averaged_tangent_jacobians(fx, fy, &avg);
                (avg.t_hat, avg.n_hat, jx, jy)
            }
            Formulation::Straightforward => (fx.tangent, fx.normal, fx.tangent_jacobian(), Mat2::ZERO),
        };
        let kin = gap_offset(t, n, d, geom)?;
        let s = kin.s_alpha;
        let dv = self.issip.derivs(kin.q1, kin.q2)?;
        let f = t.scale(dv.phi_1) + n.scale(dv.phi_2 * s);
        let a1 = t.scale(dv.phi_11) + n.scale(s * dv.phi_12);
        let a2 = t.scale(dv.phi_12) + n.scale(s * dv.phi_22);
        let g1 = t;
        let g2 = n.scale(s);
        let dx = Mat2::outer(a1, g1) + Mat2::outer(a2, g2);
        // ∂f/∂t_ref with n_ref = Λ t_ref
        let amat = Mat2::IDENTITY.scaled(dv.phi_1) + Mat2::PERP.scaled(dv.phi_2 * s);
        let tangent_block = |j: Mat2| {
            let jt = j.transpose();
            let q1g = jt.apply(d);
            let q2g = jt.apply(d.perp_t()).scale(s);
            Mat2::outer(a1, q1g) + Mat2::outer(a2, q2g) + amat.matmul(j)
        };
        let dx1 = tangent_block(jx);
        let dy1 = if self.options.formulation == Formulation::Straightforward {
            Mat2::ZERO
        } else {
            tangent_block(jy)
        };
        let mut hx = [Mat2::ZERO; 3];
        let mut hy = [Mat2::ZERO; 3];
        let (fhat_x, fhat_y) = match moment_split(self.options.moments, geom) {
            None => (Vec2::zero(), Vec2::zero()),
            Some((wx, wy)) => {
                let c = (dv.phi_1 * kin.q2_hat - dv.phi_2 * kin.q1) * s;
                let c1 = (dv.phi_11 * kin.q2_hat - dv.phi_12 * kin.q1 - dv.phi_2) * s;
                let c2 = (dv.phi_12 * kin.q2_hat + dv.phi_1 - dv.phi_22 * kin.q1) * s;
                let grad = |j: Mat2| {
                    let jt = j.transpose();
                    jt.apply(d).scale(c1) + jt.apply(d.perp_t()).scale(c2 * s)
                };
                let cx = g1.scale(c1) + g2.scale(c2);
                let cx1 = grad(jx);
                let cy1 = if self.options.formulation == Formulation::Straightforward {
                    Vec2::zero()
                } else {
                    grad(jy)
                };
                // v = Λ a / |a|², ∂v/∂a = (Λ - 2 n ⊗ t) / g
                let vx = fx.normal.scale(1.0 / fx.sqrt_g);
                let vy = fy.normal.scale(1.0 / fy.sqrt_g);
                let dvx = (Mat2::PERP - Mat2::outer(fx.normal, fx.tangent).scaled(2.0)).scaled(c / (fx.sqrt_g * fx.sqrt_g));
                let dvy = (Mat2::PERP - Mat2::outer(fy.normal, fy.tangent).scaled(2.0)).scaled(c / (fy.sqrt_g * fy.sqrt_g));
                hx = [
                    Mat2::outer(vx, cx).scaled(wx),
                    (Mat2::outer(vx, cx1) + dvx).scaled(wx),
                    Mat2::outer(vx, cy1).scaled(wx),
                ];
                hy = [
                    Mat2::outer(vy, cx).scaled(wy),
                    Mat2::outer(vy, cx1).scaled(wy),
                    (Mat2::outer(vy, cy1) + dvy).scaled(wy),
                ];
                (vx.scale(c * wx), vy.scale(c * wy))
            }
        };
        Ok(PairTangent {
            ix,
            iy,
            w: self.pair_weight(ix, iy),
            q2: kin.q2,
            f,
            fhat_x,
            fhat_y,
            dx,
            dx1,
            dy1,
            hx,
            hy,
        })
    }

    /// Add the interaction residual and its consistent tangent.
    pub fn add_residual_and_tangent(
        &self,
        beams: [&BSplineBeam; 2],
        u: &[f64],
        pairs: Option<&[(u32, u32)]>,
        res: &mut [f64],
        kmat: &mut DMatrix<f64>,
    ) -> Result<InteractionReport> {
        let frames = self.frames(beams, u)?;
        let owned;
        let pairs = match pairs {
            Some(p) => p,
            None => {
                owned = self.pairs_for(&frames);
                &owned
            }
        };
        let tangents = pairs
            .par_chunks(2048)
            .map(|chunk| {
                chunk
                    .iter()
                    .map(|&(ix, iy)| self.pair_tangent(&frames[0][ix as usize], &frames[1][iy as usize], ix, iy))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<Vec<_>>>>()?;

        let before = res.to_vec();
        let nb = self.grid.nb;
        let nrows = kmat.nrows();
        let kbuf = kmat.as_mut_slice();
        let mut bx = vec![Mat2::ZERO; nb];
        let mut by = vec![Mat2::ZERO; nb];
        let mut min_gap = f64::INFINITY;
        let with_moments = self.options.moments != MomentTreatment::Off;
        let mut count = 0;
        for pt in tangents.iter().flatten() {
            count += 1;
            let px = &self.grid.points[0][pt.ix as usize];
            let py = &self.grid.points[1][pt.iy as usize];
            let (nx0, nx1) = self.grid.basis(0, pt.ix as usize);
            let (ny0, ny1) = self.grid.basis(1, pt.iy as usize);
            min_gap = min_gap.min(pt.q2);
            for k in 0..nb {
                bx[k] = (pt.dx.scaled(nx0[k]) + pt.dx1.scaled(nx1[k])).scaled(pt.w);
                by[k] = (pt.dy1.scaled(ny1[k]) - pt.dx.scaled(ny0[k])).scaled(pt.w);
            }
            let fw = pt.f * pt.w;
            for i in 0..nb {
                let rx = self.offsets[0] + 2 * (px.first + i);
                let ry = self.offsets[1] + 2 * (py.first + i);
                let mut vx = fw * nx0[i];
                let mut vy = -(fw * ny0[i]);
                if with_moments {
                    vx += pt.fhat_x * (pt.w * nx1[i]);
                    vy += pt.fhat_y * (pt.w * ny1[i]);
                }
                res[rx] += vx.x;
                res[rx + 1] += vx.y;
                res[ry] += vy.x;
                res[ry + 1] += vy.y;
                for k in 0..nb {
                    let cx = self.offsets[0] + 2 * (px.first + k);
                    let cy = self.offsets[1] + 2 * (py.first + k);
                    let (mut kxx, mut kxy) = (bx[k].scaled(nx0[i]), by[k].scaled(nx0[i]));
                    let (mut kyx, mut kyy) = (bx[k].scaled(-ny0[i]), by[k].scaled(-ny0[i]));
                    if with_moments {
                        let [hxx, hxx1, hxy1] = pt.hx;
                        let [hyx, hyx1, hyy1] = pt.hy;
                        let (ax, ay) = (pt.w * nx1[i], pt.w * ny1[i]);
                        kxx += (hxx.scaled(nx0[k]) + hxx1.scaled(nx1[k])).scaled(ax);
                        kxy += (hxy1.scaled(ny1[k]) - hxx.scaled(ny0[k])).scaled(ax);
                        kyx += (hyx.scaled(nx0[k]) + hyx1.scaled(nx1[k])).scaled(ay);
                        kyy += (hyy1.scaled(ny1[k]) - hyx.scaled(ny0[k])).scaled(ay);
                    }
                    scatter_add(kbuf, nrows, rx, cx, kxx);
                    scatter_add(kbuf, nrows, rx, cy, kxy);
                    scatter_add(kbuf, nrows, ry, cx, kyx);
                    scatter_add(kbuf, nrows, ry, cy, kyy);
                }
            }
        }
        let (total_x, total_y) = self.totals(res, &before);
        Ok(InteractionReport {
            pairs: count,
            min_gap,
            total_x,
            total_y,
        })
    }

    /// Physical interaction force per unit reference length at every grid
    /// point, for each beam.
    pub fn force_densities(&self, beams: [&BSplineBeam; 2], u: &[f64]) -> Result<[Vec<Vec2>; 2]> {
        let frames = self.frames(beams, u)?;
        let xs: Vec<Vec2> = frames[0].iter().map(|f| f.position.re()).collect();
        let ys: Vec<Vec2> = frames[1].iter().map(|f| f.position.re()).collect();
        let mut out = [vec![Vec2::zero(); self.grid.len(0)], vec![Vec2::zero(); self.grid.len(1)]];
        // blocks of x points keep the pair list small on fine grids
        for start in (0..xs.len()).step_by(FORCE_BLOCK) {
            let end = (start + FORCE_BLOCK).min(xs.len());
            let pairs: Vec<(u32, u32)> = find_pairs(&xs[start..end], &ys, self.options.cutoff)
                .into_iter()
                .map(|(i, j)| (i + start as u32, j))
                .collect();
            for p in &self.contributions(&frames, &pairs)? {
                let px = &self.grid.points[0][p.ix as usize];
                let py = &self.grid.points[1][p.iy as usize];
                out[0][p.ix as usize] -= p.force * (py.weight * py.ref_sqrt_g);
                out[1][p.iy as usize] += p.force * (px.weight * px.ref_sqrt_g);
            }
        }
        Ok(out)
    }
}

const FORCE_BLOCK: usize = 512;

/// Relative error of the per-length normal force of a straight section
/// against an infinite parallel line when pairs beyond centroid distance `c`
/// are dropped.
pub fn cutoff_error_estimate(q2: f64, law: &CompositeLaw, geom: &SectionPairGeometry, c: f64) -> Result<f64> {
    if !(q2 > 0.0 && c > 0.0) {
        return Err(Error::Domain("cutoff error needs q2 > 0 and c > 0".into()));
    }
    let exact = cylinder_per_length_dq2(q2, law, geom)?;
    let q2_hat = q2 + geom.radius_sum();
    if c <= q2_hat {
        return Ok(1.0);
    }
    let half = (c * c - q2_hat * q2_hat).sqrt();
    let truncated = line_integral_phi2(q2, law, geom, half)?;
    Ok(((truncated - exact) / exact).abs())
}

/// Adaptive `∫_{-w}^{w} φ,2(q1, q2) dq1`.
pub fn line_integral_phi2(q2: f64, law: &CompositeLaw, geom: &SectionPairGeometry, half_width: f64) -> Result<f64> {
    let is = Issip::new(law, geom)?;
    let mut err = None;
    let f = |q1: f64| match is.first(q1, q2) {
        Ok(v) => v.phi_2,
        Err(e) => {
            err.get_or_insert(e);
            0.0
        }
    };
    // symmetric integrand; integrate one side with breaks at multiples of the gap
    let breaks: Vec<f64> = [1.0, 3.0, 10.0, 30.0, 100.0].iter().map(|k| k * q2).collect();
    let e = integrate_with_breaks(
        f,
        0.0,
        half_width,
        &breaks,
        AdaptiveOptions {
            abs_tol: 0.0,
            rel_tol: 1e-12,
            max_intervals: 5000,
        },
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(2.0 * e.value)
}

/// Mid-point rule for the same integral with `points_per_length` points per unit length.
pub fn midpoint_integral_phi2(
    q2: f64,
    law: &CompositeLaw,
    geom: &SectionPairGeometry,
    half_width: f64,
    points_per_length: f64,
) -> Result<f64> {
    let is = Issip::new(law, geom)?;
    let n = (2.0 * half_width * points_per_length).round().max(1.0) as usize;
    let h = 2.0 * half_width / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let q1 = -half_width + (i as f64 + 0.5) * h;
        acc += is.first(q1, q2)?.phi_2;
    }
    Ok(acc * h)
}
