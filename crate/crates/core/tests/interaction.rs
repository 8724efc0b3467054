use fiberip::cli_io::config::{ScenarioConfig, ScenarioKind};
use fiberip::cli_io::scenarios::{peel_model, random_deformed_state, tangent_check};
use fiberip::interaction::{find_pairs, Formulation, MomentTreatment};
use fiberip::solver::Model;
use fiberip::vec2::Vec2;
use proptest::prelude::*;

fn small_config(formulation: Formulation, moments: MomentTreatment, seed: u64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(ScenarioKind::TangentTest);
    cfg.material.youngs_modulus = Some(1000.0);
    cfg.geometry.length = 1.0;
    cfg.discretization.control_points = 12;
    cfg.discretization.density = 300.0;
    cfg.interaction.formulation = formulation;
    cfg.interaction.moments = moments;
    cfg.seed = seed;
    cfg
}

fn state(cfg: &ScenarioConfig) -> (Model, Vec<f64>) {
    let model = peel_model(cfg).unwrap();
    let u = random_deformed_state(cfg, &model, cfg.solver.t_start);
    (model, u)
}

fn interaction_residual(model: &Model, u: &[f64]) -> Vec<f64> {
    let ip = model.interaction.as_ref().unwrap();
    let mut r = vec![0.0; model.ndofs()];
    ip.add_residual(model.pair(), u, None, &mut r).unwrap();
    r
}

fn brute_force(xs: &[Vec2], ys: &[Vec2], c: f64) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for (i, x) in xs.iter().enumerate() {
        for (j, y) in ys.iter().enumerate() {
            if (*x - *y).norm() < c {
                out.push((i as u32, j as u32));
            }
        }
    }
    out
}

fn cloud() -> impl Strategy<Value = Vec<Vec2>> {
    prop::collection::vec((-1.0f64..1.0, -0.3f64..0.3).prop_map(|(x, y)| Vec2::new(x, y)), 0..120)
}

proptest! {
    #[test]
    fn pair_search_matches_brute_force(xs in cloud(), ys in cloud(), c in 0.01f64..0.4) {
        let mut fast = find_pairs(&xs, &ys, c);
        fast.sort_unstable();
        let mut slow = brute_force(&xs, &ys, c);
        slow.sort_unstable();
        prop_assert_eq!(fast, slow);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn interaction_forces_balance(seed in 0u64..1000, moments in prop::bool::ANY) {
        let m = if moments { MomentTreatment::Distributed } else { MomentTreatment::Off };
        for form in [Formulation::Averaged, Formulation::Straightforward] {
            let cfg = small_config(form, m, seed);
            let (model, u) = state(&cfg);
            let ip = model.interaction.as_ref().unwrap();
            let mut r = vec![0.0; model.ndofs()];
            let rep = ip.add_residual(model.pair(), &u, None, &mut r).unwrap();
            let scale = rep.total_x.norm().max(1e-300);
            let sum = rep.total_x + rep.total_y;
            prop_assert!(rep.pairs > 0);
            prop_assert!(sum.norm() <= 1e-12 * scale, "{form:?}: {:?} vs {:?}", rep.total_x, rep.total_y);
        }
    }

    #[test]
    fn straightforward_with_reference_moments_is_an_energy_gradient(seed in 0u64..1000) {
        let cfg = small_config(Formulation::Straightforward, MomentTreatment::ReferenceBeam, seed);
        let (model, u) = state(&cfg);
        let ip = model.interaction.as_ref().unwrap();
        let r = interaction_residual(&model, &u);
        let pairs = ip.find_pairs(model.pair(), &u).unwrap();
        let scale = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let h = 1e-7;
        for k in model.free_dofs().into_iter().step_by(5) {
            let mut up = u.clone();
            let mut um = u.clone();
            up[k] += h;
            um[k] -= h;
            let g = (ip.energy(model.pair(), &up, Some(&pairs)).unwrap()
                - ip.energy(model.pair(), &um, Some(&pairs)).unwrap())
                / (2.0 * h);
            prop_assert!((g - r[k]).abs() <= 1e-5 * scale, "dof {k}: {g} vs {}", r[k]);
        }
    }

    #[test]
    fn assembled_tangent_matches_complex_step(seed in 0u64..1000) {
        for form in [Formulation::Averaged, Formulation::Straightforward] {
            for m in [MomentTreatment::Off, MomentTreatment::Distributed, MomentTreatment::ReferenceBeam] {
                let cfg = small_config(form, m, seed);
                let (model, u) = state(&cfg);
                let dofs: Vec<usize> = model.free_dofs().into_iter().step_by(7).collect();
                for c in tangent_check(&model, &u, cfg.solver.t_start, &dofs).unwrap() {
                    prop_assert!(c.assembled <= 1e-6, "{form:?}/{m:?} dof {}: {:.3e}", c.dof, c.assembled);
                    prop_assert!(c.finite_difference <= 1e-3, "{form:?}/{m:?} dof {}: fd {:.3e}", c.dof, c.finite_difference);
                }
            }
        }
    }
}

/// Swap the roles of the two beams: the averaged formulation does not
/// depend on which beam is called x.
#[test]
fn averaged_energy_is_symmetric_under_beam_swap() {
    let cfg = small_config(Formulation::Averaged, MomentTreatment::Off, 7);
    let (model, u) = state(&cfg);
    let ip = model.interaction.as_ref().unwrap();
    let n = model.beams()[0].num_dofs();
    let e0 = ip.energy(model.pair(), &u, None).unwrap();

    let mut swapped_model = Model::new(vec![model.beams()[1].clone(), model.beams()[0].clone()]);
    let geom = cfg.geometry.section_pair().unwrap();
    let ip2 = fiberip::interaction::Interaction::new(
        swapped_model.pair(),
        [0, n],
        ip.law(),
        &geom,
        cfg.discretization.density,
        *ip.options(),
    )
    .unwrap();
    swapped_model.interaction = Some(ip2);
    let mut us = u[n..].to_vec();
    us.extend_from_slice(&u[..n]);
    let e1 = swapped_model
        .interaction
        .as_ref()
        .unwrap()
        .energy(swapped_model.pair(), &us, None)
        .unwrap();
    assert!((e0 - e1).abs() <= 1e-12 * e0.abs(), "{e0} vs {e1}");
}

/// Reflecting a configuration across the midline between the beams and
/// swapping them mirrors the interaction residual.
#[test]
fn mirrored_configuration_mirrors_forces() {
    let cfg = small_config(Formulation::Averaged, MomentTreatment::Distributed, 3);
    let (model, u) = state(&cfg);
    let n = model.beams()[0].num_dofs();
    let sep = cfg.geometry.radius_x + cfg.geometry.radius_y + cfg.geometry.initial_gap;
    let cps: Vec<Vec2> = model.beams().iter().flat_map(|b| b.control_points().to_vec()).collect();
    // current positions, reflected about x = sep / 2, beams exchanged
    let pos: Vec<Vec2> = cps
        .iter()
        .enumerate()
        .map(|(i, p)| Vec2::new(p.x + u[2 * i], p.y + u[2 * i + 1]))
        .collect();
    let ncp = n / 2;
    let mut um = vec![0.0; u.len()];
    for i in 0..cps.len() {
        let src = if i < ncp { i + ncp } else { i - ncp };
        let q = Vec2::new(sep - pos[src].x, pos[src].y);
        um[2 * i] = q.x - cps[i].x;
        um[2 * i + 1] = q.y - cps[i].y;
    }
    let r = interaction_residual(&model, &u);
    let rm = interaction_residual(&model, &um);
    let scale = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..cps.len() {
        let src = if i < ncp { i + ncp } else { i - ncp };
        assert!((rm[2 * i] + r[2 * src]).abs() <= 1e-10 * scale, "x at {i}");
        assert!((rm[2 * i + 1] - r[2 * src + 1]).abs() <= 1e-10 * scale, "y at {i}");
    }
}

#[test]
fn pairs_beyond_cutoff_are_ignored() {
    let mut cfg = small_config(Formulation::Averaged, MomentTreatment::Off, 0);
    cfg.geometry.initial_gap = 0.02;
    cfg.discretization.cutoff = Some(0.05);
    let model = peel_model(&cfg).unwrap();
    let u = vec![0.0; model.ndofs()];
    let ip = model.interaction.as_ref().unwrap();
    assert!(ip.find_pairs(model.pair(), &u).unwrap().is_empty());
    let r = interaction_residual(&model, &u);
    assert!(r.iter().all(|&v| v == 0.0));
}
