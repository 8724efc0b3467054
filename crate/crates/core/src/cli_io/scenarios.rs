//! The named scenarios. Each has a data-returning entry point used by tests
//! and a writer used by the CLI.

use super::config::{ScenarioConfig, ScenarioKind};
use super::output::{snapshot_path, write_json, Table, PATH_COLUMNS, POTENTIAL_COLUMNS, SNAPSHOT_COLUMNS};
use crate::beam::BSplineBeam;
use crate::error::{Error, Result};
use crate::interaction::{
    cutoff_error_estimate, line_integral_phi2, midpoint_integral_phi2, Interaction, InteractionOptions,
};
use crate::laws::{cylinder_per_length, equilibrium_gap, CompositeLaw, Issip, PowerLaw};
use crate::solver::{adaptive_march, BoundaryConditions, EquilibriumPath, Model, PathPoint, Prescribed};
use crate::vec2::Vec2;
use crate::verify::{
    complex_step_tangent, finite_difference_column, golden_section_min, loglog_slope_fit, oracle_potential,
    relative_l2, QuadratureSpec, COMPLEX_STEP,
};
use log::{info, warn};
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::path::Path;

pub const REFERENCE_EQUILIBRIUM_GAP: f64 = 0.00085;

fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let r = (hi / lo).ln();
    (0..n).map(|i| lo * (r * i as f64 / (n - 1) as f64).exp()).collect()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

// ---------------------------------------------------------------- tables

#[derive(Debug, Clone)]
pub struct PotentialRow {
    pub q1: f64,
    pub q2: f64,
    pub issip: f64,
    pub lssip: f64,
    pub oracle: f64,
}

#[derive(Debug, Clone)]
pub struct PotentialTable {
    pub rows: Vec<PotentialRow>,
    /// `(q1, ISSIP error, LSSIP error)`, relative L2 over the gap sweep
    pub errors: Vec<(f64, f64, f64)>,
}

pub fn potential_table(cfg: &ScenarioConfig) -> Result<PotentialTable> {
    let law = cfg.law.law()?;
    let geom = cfg.geometry.section_pair()?;
    let is = Issip::new(&law, &geom)?;
    let spec = QuadratureSpec::reduced();
    let s = &cfg.study;
    let q2s = linspace(s.q2_range[0], s.q2_range[1], s.q2_samples);
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for &q1 in &s.q1_values {
        let mut block = Vec::new();
        for &q2 in &q2s {
            let d = Vec2::new(q1, q2 + geom.radius_sum());
            block.push(PotentialRow {
                q1,
                q2,
                issip: is.value(q1, q2)?,
                lssip: is.lssip(d)?.0,
                oracle: oracle_potential(q1, q2, &law, &geom, &spec)?,
            });
        }
        let oracle: Vec<f64> = block.iter().map(|r| r.oracle).collect();
        let e_is = relative_l2(&block.iter().map(|r| r.issip).collect::<Vec<_>>(), &oracle);
        let e_ls = relative_l2(&block.iter().map(|r| r.lssip).collect::<Vec<_>>(), &oracle);
        info!("q1 = {q1}: ISSIP L2 error {e_is:.3e}, LSSIP {e_ls:.3e}");
        errors.push((q1, e_is, e_ls));
        rows.extend(block);
    }
    Ok(PotentialTable { rows, errors })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CylinderEq {
    pub gap_closed: f64,
    pub gap_minimized: f64,
    pub slope_m6: f64,
    pub slope_m12: f64,
    pub issip_slope_m6: f64,
}

impl CylinderEq {
    pub fn root_vs_minimum(&self) -> f64 {
        ((self.gap_closed - self.gap_minimized) / self.gap_closed).abs()
    }

    pub fn deviation_from_reference(&self) -> f64 {
        ((self.gap_closed - REFERENCE_EQUILIBRIUM_GAP) / REFERENCE_EQUILIBRIUM_GAP).abs()
    }
}

pub fn cylinder_eq(cfg: &ScenarioConfig) -> Result<CylinderEq> {
    let law = cfg.law.law()?;
    let geom = cfg.geometry.section_pair()?;
    let gap_closed = equilibrium_gap(&law, &geom)?;
    let per_len = |q: f64| cylinder_per_length(q, &law, &geom).unwrap_or(f64::INFINITY);
    let gap_minimized = golden_section_min(per_len, 0.2 * gap_closed, 5.0 * gap_closed, 1e-12);
    let s = &cfg.study;
    let qs = geomspace(s.slope_range[0], s.slope_range[1], s.q2_samples.max(3));
    let slope = |m: f64| -> Result<f64> {
        let single = CompositeLaw::new(vec![PowerLaw::new(m, -1.0)])?;
        let v = qs
            .iter()
            .map(|&q| Ok((q, cylinder_per_length(q, &single, &geom)?)))
            .collect::<Result<Vec<_>>>()?;
        loglog_slope_fit(&v)
    };
    let is6 = Issip::new(&CompositeLaw::new(vec![PowerLaw::new(6.0, -1.0)])?, &geom)?;
    let v = qs.iter().map(|&q| Ok((q, is6.value(0.0, q)?))).collect::<Result<Vec<_>>>()?;
    Ok(CylinderEq {
        gap_closed,
        gap_minimized,
        slope_m6: slope(6.0)?,
        slope_m12: slope(12.0)?,
        issip_slope_m6: loglog_slope_fit(&v)?,
    })
}

/// `(q2, cutoff, relative error)` for every configured pair.
pub fn cutoff_study(cfg: &ScenarioConfig) -> Result<Vec<(f64, f64, f64)>> {
    let law = cfg.law.law()?;
    let geom = cfg.geometry.section_pair()?;
    let mut out = Vec::new();
    for &q2 in &cfg.study.cutoff_gaps {
        for &c in &cfg.study.cutoffs {
            out.push((q2, c, cutoff_error_estimate(q2, &law, &geom, c)?));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationRow {
    pub density: f64,
    pub midpoint: f64,
    pub reference: f64,
    pub relative_error: f64,
}

pub fn integration_study(cfg: &ScenarioConfig) -> Result<Vec<IntegrationRow>> {
    let law = cfg.law.law()?;
    let geom = cfg.geometry.section_pair()?;
    let s = &cfg.study;
    let reference = line_integral_phi2(s.gap, &law, &geom, s.half_width)?;
    s.densities
        .iter()
        .map(|&n| {
            let midpoint = midpoint_integral_phi2(s.gap, &law, &geom, s.half_width, n)?;
            Ok(IntegrationRow {
                density: n,
                midpoint,
                reference,
                relative_error: ((midpoint - reference) / reference).abs(),
            })
        })
        .collect()
}

// ---------------------------------------------------------------- beams

/// Two straight parallel fibers along `+e2`, simply supported at both ends;
/// the right fiber's supports move horizontally so that the support gap is
/// `length * t`.
pub fn peel_model(cfg: &ScenarioConfig) -> Result<Model> {
    peel_model_with_density(cfg, cfg.discretization.density)
}

pub fn peel_model_with_density(cfg: &ScenarioConfig, density: f64) -> Result<Model> {
    let g = &cfg.geometry;
    let d = &cfg.discretization;
    let e = cfg.youngs_modulus()?;
    let sep = g.radius_x + g.radius_y + g.initial_gap;
    let bx = BSplineBeam::straight(Vec2::new(0.0, 0.0), Vec2::new(0.0, g.length), d.degree, d.control_points, g.radius_x, e)?;
    let by = BSplineBeam::straight(Vec2::new(sep, 0.0), Vec2::new(sep, g.length), d.degree, d.control_points, g.radius_y, e)?;
    let n = d.control_points;
    let opts = InteractionOptions {
        formulation: cfg.interaction.formulation,
        moments: cfg.interaction.moments,
        cutoff: cfg.cutoff(),
    };
    let law = cfg.law.law()?;
    let geom = g.section_pair()?;
    let ip = Interaction::new([&bx, &by], [0, 2 * n], &law, &geom, density, opts)?;
    let mut model = Model::new(vec![bx, by]);
    let o = model.offset(1);
    // support gap grows as L t and equals the initial gap at t_start
    let mut bc = Vec::new();
    for cp in [0, n - 1] {
        bc.push(Prescribed::fixed(2 * cp));
        bc.push(Prescribed::fixed(2 * cp + 1));
        bc.push(Prescribed {
            dof: o + 2 * cp,
            offset: -g.length * cfg.solver.t_start,
            rate: g.length,
        });
        bc.push(Prescribed::fixed(o + 2 * cp + 1));
    }
    model.bcs = BoundaryConditions::new(bc)?;
    model.interaction = Some(ip);
    Ok(model)
}

#[derive(Debug, Clone)]
pub struct SnapshotRow {
    pub beam: usize,
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub n: f64,
    pub m: f64,
    pub f1: f64,
    pub f2: f64,
}

/// Per-interaction-point state; `with_interaction = false` writes zero forces.
pub fn snapshot(model: &Model, u: &[f64], with_interaction: bool) -> Result<Vec<SnapshotRow>> {
    let ip = model
        .interaction
        .as_ref()
        .ok_or_else(|| Error::Domain("snapshot needs an interaction grid".into()))?;
    let beams = model.pair();
    let frames = ip.frames(beams, u)?;
    let forces = if with_interaction {
        Some(ip.force_densities(beams, u)?)
    } else {
        None
    };
    let mut rows = Vec::new();
    for b in 0..2 {
        let ub = model.beam_dofs(b, u);
        for (i, p) in ip.grid().points(b).iter().enumerate() {
            let fr = &frames[b][i];
            let (n, m) = beams[b].stress_outputs(ub, p.xi)?;
            let f = forces.as_ref().map_or(Vec2::zero(), |f| f[b][i]);
            rows.push(SnapshotRow {
                beam: b,
                s: p.s_ref,
                x: fr.position.x,
                y: fr.position.y,
                n,
                m,
                f1: f.dot(fr.tangent),
                f2: f.dot(fr.normal),
            });
        }
    }
    Ok(rows)
}

fn snapshot_table(rows: &[SnapshotRow]) -> Table {
    let mut t = Table::new(&SNAPSHOT_COLUMNS);
    for r in rows {
        t.row(&[r.beam.into(), r.s.into(), r.x.into(), r.y.into(), r.n.into(), r.m.into(), r.f1.into(), r.f2.into()]);
    }
    t
}

/// Maximum `|N|` and `|M|` over the Gauss points of every beam.
pub fn max_stress_resultants(model: &Model, u: &[f64]) -> Result<(f64, f64)> {
    let (mut n_max, mut m_max) = (0.0f64, 0.0f64);
    for (b, beam) in model.beams().iter().enumerate() {
        let ub = model.beam_dofs(b, u);
        for xi in beam.quadrature_parameters() {
            let (n, m) = beam.stress_outputs(ub, xi)?;
            n_max = n_max.max(n.abs());
            m_max = m_max.max(m.abs());
        }
    }
    Ok((n_max, m_max))
}

/// Grid refinement of the reference integral in the peel summary.
pub const BOOKKEEPING_REFINE: f64 = 4.0;

/// Horizontal support reaction on the left fiber against the integral of the
/// horizontal interaction force it receives, the latter on a grid `refine`
/// times denser. Returns `(reaction, integral, relative difference)`.
pub fn equilibrium_bookkeeping(cfg: &ScenarioConfig, model: &Model, u: &[f64], t: f64, refine: f64) -> Result<(f64, f64, f64)> {
    let r = model.residual::<f64>(u, t, true)?;
    let reaction = model.reaction_sums(&r)[0].x;
    let fine = peel_model_with_density(cfg, cfg.discretization.density * refine)?;
    let ip = fine.interaction.as_ref().expect("peel model has interaction");
    let f = ip.force_densities(fine.pair(), u)?;
    let integral: f64 = ip
        .grid()
        .points(0)
        .iter()
        .zip(&f[0])
        .map(|(p, f)| p.weight * p.ref_sqrt_g * f.x)
        .sum();
    // the support balances the interaction force
    let rel = ((reaction + integral) / integral).abs();
    Ok((reaction, integral, rel))
}

#[derive(Debug, Clone)]
pub struct PeelRun {
    pub path: EquilibriumPath,
    pub first_state: Vec<f64>,
    pub last_attached_state: Vec<f64>,
    pub final_state: Vec<f64>,
    pub post_snap_resultants: Option<(f64, f64)>,
    pub model: Model,
}

impl PeelRun {
    /// `(t, horizontal reaction on the pulled fiber)` along the path.
    pub fn reaction_curve(&self) -> Vec<(f64, f64)> {
        self.path.points.iter().map(|p| (p.t, p.reactions[1].x)).collect()
    }

    pub fn peak(&self) -> Option<(f64, f64)> {
        self.reaction_curve().into_iter().max_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Largest `|R_x + R_y| / max|R|` over the attached steps.
    pub fn reaction_mismatch(&self) -> f64 {
        let scale = self
            .path
            .points
            .iter()
            .map(|p| p.reactions[1].x.abs())
            .fold(0.0, f64::max);
        self.path
            .points
            .iter()
            .filter(|p| !p.post_snap)
            .map(|p| (p.reactions[0].x + p.reactions[1].x).abs() / scale)
            .fold(0.0, f64::max)
    }
}

/// Run the peel march; `on_state` sees every recorded path point and state.
pub fn run_peel<G>(cfg: &ScenarioConfig, mut on_state: G) -> Result<PeelRun>
where
    G: FnMut(&Model, &PathPoint, &[f64]) -> Result<()>,
{
    let model = peel_model(cfg)?;
    let mut first = None;
    let mut last_attached = Vec::new();
    let mut final_state = Vec::new();
    let path = adaptive_march(&model, &cfg.solver, |p, u| {
        if first.is_none() {
            first = Some(u.to_vec());
        }
        if !p.post_snap {
            last_attached = u.to_vec();
        }
        final_state = u.to_vec();
        on_state(&model, p, u)
    })?;
    let post = match path.points.last() {
        Some(p) if p.post_snap => Some(max_stress_resultants(&model, &final_state)?),
        _ => None,
    };
    Ok(PeelRun {
        path,
        first_state: first.unwrap_or_default(),
        last_attached_state: last_attached,
        final_state,
        post_snap_resultants: post,
        model,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnCheck {
    pub dof: usize,
    /// assembled column against the complex-step column
    pub assembled: f64,
    /// central difference against the complex-step column
    pub finite_difference: f64,
}

/// Compare tangent columns of `model` at `u` against complex-step columns.
pub fn tangent_check(model: &Model, u: &[f64], t: f64, dofs: &[usize]) -> Result<Vec<ColumnCheck>> {
    let asm = model.assemble(u, t, true, None)?;
    let cs_res = |z: &[Complex64]| model.residual::<Complex64>(z, t, true);
    let fd_res = |v: &[f64]| model.residual::<f64>(v, t, true);
    dofs.iter()
        .map(|&k| {
            let cs = complex_step_tangent(cs_res, u, k, COMPLEX_STEP)?;
            let fd = finite_difference_column(fd_res, u, k, 1e-6)?;
            let col: Vec<f64> = asm.tangent.column(k).iter().copied().collect();
            Ok(ColumnCheck {
                dof: k,
                assembled: relative_l2(&col, &cs),
                finite_difference: relative_l2(&fd, &cs),
            })
        })
        .collect()
}

pub fn random_deformed_state(cfg: &ScenarioConfig, model: &Model, t: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let a = cfg.study.perturbation;
    let mut u: Vec<f64> = (0..model.ndofs()).map(|_| a * rng.random_range(-1.0..1.0)).collect();
    model.bcs.apply(&mut u, t);
    u
}

#[derive(Debug, Clone)]
pub struct TangentTest {
    pub columns: Vec<ColumnCheck>,
    /// largest spread of the first column over the step sizes 1e-20, 1e-30, 1e-40
    pub step_independence: f64,
}

pub fn tangent_test(cfg: &ScenarioConfig) -> Result<TangentTest> {
    let model = peel_model(cfg)?;
    let t = cfg.solver.t_start;
    let u = random_deformed_state(cfg, &model, t);
    let free = model.free_dofs();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let n = cfg.study.columns.min(free.len());
    let mut picks: Vec<usize> = sample(&mut rng, free.len(), n).into_iter().map(|i| free[i]).collect();
    picks.sort_unstable();
    let columns = tangent_check(&model, &u, t, &picks)?;
    let cs_res = |z: &[Complex64]| model.residual::<Complex64>(z, t, true);
    let k = picks.first().copied().unwrap_or(free[0]);
    let base = complex_step_tangent(cs_res, &u, k, 1e-30)?;
    let mut spread = 0.0f64;
    for eps in [1e-20, 1e-40] {
        spread = spread.max(relative_l2(&complex_step_tangent(cs_res, &u, k, eps)?, &base));
    }
    Ok(TangentTest {
        columns,
        step_independence: spread,
    })
}

// ---------------------------------------------------------------- driver

/// Run a validated configuration and write its artifacts under `out`.
/// Returns the summary that was written to `summary.json`.
pub fn run_scenario(cfg: &ScenarioConfig, out: &Path) -> Result<Value> {
    cfg.validate()?;
    let summary = match cfg.scenario {
        ScenarioKind::PotentialTable => {
            let tab = potential_table(cfg)?;
            let mut t = Table::new(&POTENTIAL_COLUMNS);
            for r in &tab.rows {
                t.row(&[r.q1.into(), r.q2.into(), r.issip.into(), r.lssip.into(), r.oracle.into()]);
            }
            t.write(&out.join("potential_table.csv"))?;
            json!({
                "l2_errors": tab.errors.iter().map(|&(q1, a, b)| json!({
                    "q1": q1, "issip": a, "lssip": b
                })).collect::<Vec<_>>(),
            })
        }
        ScenarioKind::CylinderEq => {
            let c = cylinder_eq(cfg)?;
            json!({
                "equilibrium_gap": c.gap_closed,
                "equilibrium_gap_minimized": c.gap_minimized,
                "root_vs_minimum": c.root_vs_minimum(),
                "reference_gap": REFERENCE_EQUILIBRIUM_GAP,
                "deviation_from_reference": c.deviation_from_reference(),
                "slope_m6": c.slope_m6,
                "slope_m12": c.slope_m12,
                "issip_slope_m6": c.issip_slope_m6,
            })
        }
        ScenarioKind::CutoffStudy => {
            let rows = cutoff_study(cfg)?;
            let mut t = Table::new(&["q2", "cutoff", "relative_error"]);
            for &(q, c, e) in &rows {
                t.row(&[q.into(), c.into(), e.into()]);
            }
            t.write(&out.join("cutoff_study.csv"))?;
            let at_gap: Vec<Value> = rows
                .iter()
                .filter(|r| r.0 == cfg.study.gap)
                .map(|&(_, c, e)| json!({"cutoff": c, "relative_error": e}))
                .collect();
            json!({ "gap": cfg.study.gap, "errors_at_gap": at_gap })
        }
        ScenarioKind::IntegrationStudy => {
            let rows = integration_study(cfg)?;
            let mut t = Table::new(&["density", "midpoint", "reference", "relative_error"]);
            for r in &rows {
                t.row(&[r.density.into(), r.midpoint.into(), r.reference.into(), r.relative_error.into()]);
            }
            t.write(&out.join("integration_study.csv"))?;
            json!({
                "gap": cfg.study.gap,
                "reference": rows.first().map(|r| r.reference),
                "relative_errors": rows.iter().map(|r| json!({"density": r.density, "relative_error": r.relative_error})).collect::<Vec<_>>(),
            })
        }
        ScenarioKind::TangentTest => {
            let tt = tangent_test(cfg)?;
            let worst = tt.columns.iter().map(|c| c.assembled).fold(0.0, f64::max);
            let worst_fd = tt.columns.iter().map(|c| c.finite_difference).fold(0.0, f64::max);
            json!({
                "columns": tt.columns.len(),
                "max_relative_error": worst,
                "max_fd_vs_complex_step": worst_fd,
                "step_independence": tt.step_independence,
            })
        }
        ScenarioKind::Peel => peel_and_write(cfg, out)?,
    };
    let summary = json!({
        "scenario": cfg.scenario.name(),
        "results": summary,
    });
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

fn peel_and_write(cfg: &ScenarioConfig, out: &Path) -> Result<Value> {
    let every = cfg.output.snapshot_every;
    let mut path_table = Table::new(&PATH_COLUMNS);
    let mut step = 0usize;
    let mut pending: Option<(usize, Vec<SnapshotRow>)> = None;
    let run = run_peel(cfg, |model, p, u| {
        path_table.row(&[p.t.into(), p.reactions[1].x.into(), p.reactions[1].y.into(), p.iterations.into(), p.post_snap.into()]);
        let rows = snapshot(model, u, !p.post_snap)?;
        if p.post_snap || (every > 0 && step % every == 0) {
            snapshot_table(&rows).write(&snapshot_path(out, step))?;
            pending = None;
        } else {
            pending = Some((step, rows));
        }
        step += 1;
        Ok(())
    });
    // keep what was computed even when the march fails
    path_table.write(&out.join("path.csv"))?;
    let run = run?;
    if let Some((s, rows)) = pending {
        snapshot_table(&rows).write(&snapshot_path(out, s))?;
    }
    let (reaction0, integral0, bookkeeping) = match run.path.points.first() {
        Some(p) => equilibrium_bookkeeping(cfg, &run.model, &run.first_state, p.t, BOOKKEEPING_REFINE)?,
        None => (f64::NAN, f64::NAN, f64::NAN),
    };
    let peak = run.peak();
    let ea = run.model.beams()[0].ea();
    if run.path.underflow_at.is_none() {
        warn!("the march reached t_end without pull-off");
    }
    Ok(json!({
        "steps": run.path.converged_steps(),
        "mean_iterations": run.path.mean_iterations(),
        "failed_attempts": run.path.failed_attempts,
        "peak_reaction": peak.map(|p| p.1),
        "peak_t": peak.map(|p| p.0),
        "pull_off_t": run.path.underflow_at,
        "post_snap_max_abs_N_over_EA": run.post_snap_resultants.map(|r| r.0 / ea),
        "post_snap_max_abs_M": run.post_snap_resultants.map(|r| r.1),
        "reaction_mismatch": run.reaction_mismatch(),
        "first_step": {
            "reaction_x": reaction0,
            "interaction_integral_x": integral0,
            "relative_difference": bookkeeping,
        },
    }))
}
