//! Quasi-static continuation for beams coupled by the section-section interaction.
//!
//! The residual is `R(u) = F_int(u) + F_IP(u) - t F_ext`; at constrained DOFs
//! it equals the support reaction.

use crate::beam::BSplineBeam;
use crate::error::{Error, Result};
use crate::interaction::{Interaction, InteractionReport};
use crate::scalar::Scalar;
use crate::vec2::Vec2;
use log::{debug, info, warn};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Prescribed value `offset + rate * t` at one global DOF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prescribed {
    pub dof: usize,
    pub offset: f64,
    pub rate: f64,
}

impl Prescribed {
    pub fn fixed(dof: usize) -> Self {
        Prescribed { dof, offset: 0.0, rate: 0.0 }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.offset + self.rate * t
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundaryConditions {
    pub prescribed: Vec<Prescribed>,
}

impl BoundaryConditions {
    pub fn new(mut prescribed: Vec<Prescribed>) -> Result<Self> {
        prescribed.sort_by_key(|p| p.dof);
        if prescribed.windows(2).any(|w| w[0].dof == w[1].dof) {
            return Err(Error::Domain("a DOF is constrained twice".into()));
        }
        Ok(BoundaryConditions { prescribed })
    }

    pub fn apply(&self, u: &mut [f64], t: f64) {
        for p in &self.prescribed {
            u[p.dof] = p.value(t);
        }
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.prescribed.binary_search_by_key(&dof, |p| p.dof).is_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum UnderflowAction {
    /// Treat step underflow as loss of adhesive equilibrium: remove the
    /// interaction and record the separated state.
    #[default]
    SnapOff,
    Abort,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContinuationConfig {
    pub t_start: f64,
    pub t_end: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub growth: f64,
    pub shrink: f64,
    pub target_iterations: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    /// absolute floor of the residual reference scale
    pub force_floor: f64,
    /// reuse the pair list found at the start of a step for all its iterations
    pub freeze_pairs: bool,
    /// secant extrapolation of the last two converged states
    pub predictor: bool,
    /// reject a step that converges onto the fully separated branch while
    /// the previous state was attached
    pub reject_separation: bool,
    pub on_underflow: UnderflowAction,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        ContinuationConfig {
            t_start: 0.00016,
            t_end: 1.0,
            initial_step: 0.001,
            max_step: 0.01,
            min_step: 1e-8,
            growth: 1.25,
            shrink: 0.5,
            target_iterations: 8,
            max_iterations: 25,
            tolerance: 1e-5,
            force_floor: 1.0,
            freeze_pairs: false,
            predictor: true,
            reject_separation: true,
            on_underflow: UnderflowAction::SnapOff,
        }
    }
}

impl ContinuationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |f: &str, m: &str| Err(Error::config(format!("solver.{f}"), m));
        if !(self.tolerance > 0.0) {
            return bad("tolerance", "must be positive");
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad("shrink", "must lie in (0, 1)");
        }
        if !(self.growth > 1.0) {
            return bad("growth", "must exceed 1");
        }
        if !(self.t_end > self.t_start) {
            return bad("t_end", "must exceed t_start");
        }
        if !(self.initial_step > 0.0 && self.max_step >= self.initial_step) {
            return bad("max_step", "need 0 < initial_step <= max_step");
        }
        if !(self.min_step > 0.0 && self.min_step < self.initial_step) {
            return bad("min_step", "need 0 < min_step < initial_step");
        }
        if self.max_iterations == 0 || self.target_iterations == 0 {
            return bad("max_iterations", "iteration limits must be positive");
        }
        if !(self.force_floor > 0.0) {
            return bad("force_floor", "must be positive");
        }
        Ok(())
    }
}

/// Beams, their coupling and supports.
#[derive(Debug, Clone)]
pub struct Model {
    beams: Vec<BSplineBeam>,
    offsets: Vec<usize>,
    ndofs: usize,
    pub interaction: Option<Interaction>,
    pub bcs: BoundaryConditions,
    /// external load at `t = 1`, scaled linearly with `t`
    pub external: Option<Vec<f64>>,
}

/// Residual split into its sources, all full-length vectors.
#[derive(Debug, Clone)]
pub struct Assembly {
    pub internal: Vec<f64>,
    pub interaction: Vec<f64>,
    pub residual: Vec<f64>,
    pub tangent: DMatrix<f64>,
    pub report: Option<InteractionReport>,
}

impl Model {
    pub fn new(beams: Vec<BSplineBeam>) -> Self {
        let mut offsets = Vec::with_capacity(beams.len());
        let mut n = 0;
        for b in &beams {
            offsets.push(n);
            n += b.num_dofs();
        }
        Model {
            beams,
            offsets,
            ndofs: n,
            interaction: None,
            bcs: BoundaryConditions::default(),
            external: None,
        }
    }

    pub fn beams(&self) -> &[BSplineBeam] {
        &self.beams
    }

    pub fn offset(&self, beam: usize) -> usize {
        self.offsets[beam]
    }

    pub fn ndofs(&self) -> usize {
        self.ndofs
    }

    pub fn beam_dofs<'a, S>(&self, beam: usize, u: &'a [S]) -> &'a [S] {
        let o = self.offsets[beam];
        &u[o..o + self.beams[beam].num_dofs()]
    }

    pub fn pair(&self) -> [&BSplineBeam; 2] {
        [&self.beams[0], &self.beams[1]]
    }

    pub fn free_dofs(&self) -> Vec<usize> {
        (0..self.ndofs).filter(|&d| !self.bcs.is_constrained(d)).collect()
    }

    /// Generic residual, usable with complex-step scalars.
    pub fn residual<S: Scalar>(&self, u: &[S], t: f64, with_interaction: bool) -> Result<Vec<S>> {
        let mut r = vec![S::zero(); self.ndofs];
        for (k, b) in self.beams.iter().enumerate() {
            let o = self.offsets[k];
            let n = b.num_dofs();
            b.add_internal_forces(&u[o..o + n], &mut r[o..o + n])?;
        }
        if with_interaction {
            if let Some(ip) = &self.interaction {
                ip.add_residual(self.pair(), u, None, &mut r)?;
            }
        }
        if let Some(f) = &self.external {
            for (ri, fi) in r.iter_mut().zip(f) {
                *ri -= S::from_f64(t * fi);
            }
        }
        Ok(r)
    }

    pub fn assemble(
        &self,
        u: &[f64],
        t: f64,
        with_interaction: bool,
        pairs: Option<&[(u32, u32)]>,
    ) -> Result<Assembly> {
        let n = self.ndofs;
        let mut kmat = DMatrix::zeros(n, n);
        let mut internal = vec![0.0; n];
        for (k, b) in self.beams.iter().enumerate() {
            let o = self.offsets[k];
            b.add_internal_forces_and_tangent(&u[o..o + b.num_dofs()], o, &mut internal, &mut kmat)?;
        }
        let mut inter = vec![0.0; n];
        let mut report = None;
        if with_interaction {
            if let Some(ip) = &self.interaction {
                report = Some(ip.add_residual_and_tangent(self.pair(), u, pairs, &mut inter, &mut kmat)?);
            }
        }
        let mut residual: Vec<f64> = internal.iter().zip(&inter).map(|(a, b)| a + b).collect();
        if let Some(f) = &self.external {
            for (ri, fi) in residual.iter_mut().zip(f) {
                *ri -= t * fi;
            }
        }
        Ok(Assembly {
            internal,
            interaction: inter,
            residual,
            tangent: kmat,
            report,
        })
    }

    /// Total potential `Φ_int + Φ_IP - t F_ext·u`.
    pub fn energy(&self, u: &[f64], t: f64, with_interaction: bool) -> Result<f64> {
        let mut e = 0.0;
        for (k, b) in self.beams.iter().enumerate() {
            e += b.energy(self.beam_dofs(k, u))?;
        }
        if with_interaction {
            if let Some(ip) = &self.interaction {
                e += ip.energy(self.pair(), u, None)?;
            }
        }
        if let Some(f) = &self.external {
            e -= t * f.iter().zip(u).map(|(a, b)| a * b).sum::<f64>();
        }
        Ok(e)
    }

    /// Support reactions summed per beam.
    pub fn reaction_sums(&self, residual: &[f64]) -> Vec<Vec2> {
        let mut out = vec![Vec2::zero(); self.beams.len()];
        for p in &self.bcs.prescribed {
            let beam = self.offsets.iter().rposition(|&o| o <= p.dof).unwrap_or(0);
            let local = p.dof - self.offsets[beam];
            if local % 2 == 0 {
                out[beam].x += residual[p.dof];
            } else {
                out[beam].y += residual[p.dof];
            }
        }
        out
    }
}

/// Per-support reactions `(dof, value)`: the residual at constrained DOFs.
pub fn reaction_recovery(model: &Model, u: &[f64], t: f64, with_interaction: bool) -> Result<Vec<(usize, f64)>> {
    let r = model.residual::<f64>(u, t, with_interaction)?;
    Ok(model.bcs.prescribed.iter().map(|p| (p.dof, r[p.dof])).collect())
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub u: Vec<f64>,
    pub iterations: usize,
    /// relative residual norm before each linear solve, plus the final one
    pub history: Vec<f64>,
    pub residual: Vec<f64>,
    pub report: Option<InteractionReport>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Newton-Raphson at fixed `t`, starting from `u0` (prescribed DOFs are overwritten).
pub fn newton_solve(
    model: &Model,
    u0: &[f64],
    t: f64,
    cfg: &ContinuationConfig,
    with_interaction: bool,
) -> Result<NewtonOutcome> {
    let mut u = u0.to_vec();
    model.bcs.apply(&mut u, t);
    let free = model.free_dofs();
    let pairs = match (&model.interaction, cfg.freeze_pairs && with_interaction) {
        (Some(ip), true) => Some(ip.find_pairs(model.pair(), &u)?),
        _ => None,
    };
    let mut scale = cfg.force_floor;
    let mut history = Vec::new();
    for it in 0..=cfg.max_iterations {
        let asm = model.assemble(&u, t, with_interaction, pairs.as_deref())?;
        let ext = model.external.as_ref().map_or(0.0, |f| t * norm(f));
        scale = scale.max(norm(&asm.internal)).max(norm(&asm.interaction)).max(ext);
        let rf: Vec<f64> = free.iter().map(|&d| asm.residual[d]).collect();
        let err = norm(&rf) / scale;
        history.push(err);
        debug!("t = {t:.6e} it {it}: rel residual {err:.3e}");
        if !err.is_finite() {
            return Err(Error::Solver(format!("non-finite residual at t = {t}")));
        }
        if err <= cfg.tolerance {
            return Ok(NewtonOutcome {
                u,
                iterations: it,
                history,
                residual: asm.residual,
                report: asm.report,
            });
        }
        if it == cfg.max_iterations {
            break;
        }
        let nf = free.len();
        let kff = DMatrix::from_fn(nf, nf, |i, j| asm.tangent[(free[i], free[j])]);
        let rhs = DVector::from_iterator(nf, rf.iter().map(|v| -v));
        let du = kff
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Singular(format!("tangent singular at t = {t}")))?;
        for (k, &d) in free.iter().enumerate() {
            u[d] += du[k];
        }
    }
    Err(Error::Solver(format!(
        "no convergence in {} iterations at t = {t} (last residual {:.3e})",
        cfg.max_iterations,
        history.last().copied().unwrap_or(f64::NAN)
    )))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathPoint {
    pub t: f64,
    pub reactions: Vec<Vec2>,
    pub iterations: usize,
    pub post_snap: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EquilibriumPath {
    pub points: Vec<PathPoint>,
    /// load factor at which the step underflowed, if it did
    pub underflow_at: Option<f64>,
    pub failed_attempts: usize,
}

impl EquilibriumPath {
    pub fn converged_steps(&self) -> usize {
        self.points.iter().filter(|p| !p.post_snap).count()
    }

    pub fn mean_iterations(&self) -> f64 {
        let pts: Vec<_> = self.points.iter().filter(|p| !p.post_snap).collect();
        if pts.is_empty() {
            return 0.0;
        }
        pts.iter().map(|p| p.iterations as f64).sum::<f64>() / pts.len() as f64
    }
}

/// Result of the generic controller.
#[derive(Debug, Clone)]
pub struct MarchOutcome {
    pub accepted: Vec<(f64, usize)>,
    pub last_state: Vec<f64>,
    pub last_t: f64,
    pub underflow_at: Option<f64>,
    pub failed_attempts: usize,
}

/// Adaptive load stepping around an arbitrary step solver.
///
/// `solve(t, guess)` returns a converged state or an error; `accept` sees
/// every converged state in order.
pub fn adaptive_march_with<F, G>(cfg: &ContinuationConfig, u0: Vec<f64>, mut solve: F, mut accept: G) -> Result<MarchOutcome>
where
    F: FnMut(f64, &[f64]) -> Result<NewtonOutcome>,
    G: FnMut(f64, &NewtonOutcome) -> Result<()>,
{
    cfg.validate()?;
    let first = solve(cfg.t_start, &u0)
        .map_err(|e| Error::Solver(format!("initial state at t = {} did not converge: {e}", cfg.t_start)))?;
    accept(cfg.t_start, &first)?;
    let mut accepted = vec![(cfg.t_start, first.iterations)];
    let mut prev: Option<(f64, Vec<f64>)> = None;
    let (mut t, mut u) = (cfg.t_start, first.u);
    let mut dt = cfg.initial_step;
    let mut failed = 0;
    let span = cfg.t_end - cfg.t_start;
    while t < cfg.t_end - 1e-12 * span {
        let t_try = (t + dt).min(cfg.t_end);
        let h = t_try - t;
        let guess = match (&prev, cfg.predictor) {
            (Some((tp, up)), true) => {
                let r = h / (t - tp);
                u.iter().zip(up).map(|(a, b)| a + r * (a - b)).collect()
            }
            _ => u.clone(),
        };
        match solve(t_try, &guess) {
            Ok(out) => {
                accept(t_try, &out)?;
                accepted.push((t_try, out.iterations));
                if out.iterations <= cfg.target_iterations {
                    dt = (dt * cfg.growth).min(cfg.max_step);
                }
                prev = Some((t, std::mem::replace(&mut u, out.u)));
                t = t_try;
            }
            Err(e) => {
                failed += 1;
                dt *= cfg.shrink;
                debug!("step to t = {t_try:.6e} failed ({e}); dt -> {dt:.3e}");
                if dt < cfg.min_step {
                    return Ok(MarchOutcome {
                        accepted,
                        last_state: u,
                        last_t: t,
                        underflow_at: Some(t_try),
                        failed_attempts: failed,
                    });
                }
            }
        }
    }
    Ok(MarchOutcome {
        accepted,
        last_state: u,
        last_t: t,
        underflow_at: None,
        failed_attempts: failed,
    })
}

pub const SNAP_OFF_TOLERANCE: f64 = 1e-12;

/// Re-solve without interaction terms to get the separated configuration.
pub fn snap_off(model: &Model, u: &[f64], t: f64, cfg: &ContinuationConfig) -> Result<NewtonOutcome> {
    let mut c = *cfg;
    c.max_iterations = cfg.max_iterations.max(50);
    // without interaction the problem is benign; solve it to roundoff so the
    // separated state is stress free
    c.tolerance = cfg.tolerance.min(SNAP_OFF_TOLERANCE);
    match newton_solve(model, u, t, &c, false) {
        Ok(o) => Ok(o),
        Err(e) => {
            warn!("snap-off from the last state failed ({e}); restarting from the reference configuration");
            newton_solve(model, &vec![0.0; u.len()], t, &c, false)
        }
    }
}

/// Full march on a model, with snap-off handling.
pub fn adaptive_march<G>(model: &Model, cfg: &ContinuationConfig, mut on_state: G) -> Result<EquilibriumPath>
where
    G: FnMut(&PathPoint, &[f64]) -> Result<()>,
{
    let mut path = EquilibriumPath::default();
    let attached = std::cell::Cell::new(false);
    let out = adaptive_march_with(
        cfg,
        vec![0.0; model.ndofs()],
        |t, guess| {
            let o = newton_solve(model, guess, t, cfg, true)?;
            let pairs = o.report.as_ref().map_or(0, |r| r.pairs);
            if cfg.reject_separation && attached.get() && pairs == 0 {
                return Err(Error::Solver(format!("step to t = {t} jumped to the separated branch")));
            }
            Ok(o)
        },
        |t, o| {
            attached.set(o.report.as_ref().is_some_and(|r| r.pairs > 0));
            let p = PathPoint {
                t,
                reactions: model.reaction_sums(&o.residual),
                iterations: o.iterations,
                post_snap: false,
            };
            match &o.report {
                Some(r) => info!(
                    "t = {t:.6e} converged in {} iterations; reaction {:.6e}, {} pairs, min gap {:.4e}",
                    o.iterations,
                    p.reactions.last().map_or(0.0, |r| r.x),
                    r.pairs,
                    r.min_gap
                ),
                None => info!("t = {t:.6e} converged in {} iterations", o.iterations),
            }
            on_state(&p, &o.u)?;
            path.points.push(p);
            Ok(())
        },
    )?;
    path.failed_attempts = out.failed_attempts;
    if let Some(t_fail) = out.underflow_at {
        path.underflow_at = Some(t_fail);
        match cfg.on_underflow {
            UnderflowAction::Abort => {
                return Err(Error::Solver(format!("load step underflow at t = {t_fail}")));
            }
            UnderflowAction::SnapOff => {
                info!("step underflow at t = {t_fail:.6e}; snapping off");
                let sep = snap_off(model, &out.last_state, t_fail, cfg)?;
                let p = PathPoint {
                    t: t_fail,
                    reactions: model.reaction_sums(&sep.residual),
                    iterations: sep.iterations,
                    post_snap: true,
                };
                on_state(&p, &sep.u)?;
                path.points.push(p);
            }
        }
    }
    Ok(path)
}
