//! Configuration, scenarios and artifact output for the command line tool.

pub mod config;
pub mod output;
pub mod scenarios;

pub use config::{config_parse, parse_with_overrides, ScenarioConfig, ScenarioKind};
pub use scenarios::run_scenario;

use crate::error::{Error, Result};
use crate::laws::{CompositeLaw, PowerLaw, SectionPairGeometry};
use crate::verify::{quad_oracle_cartesian, quad_oracle_reduced, QuadratureSpec};
use serde::Serialize;

pub const SUITES: [&str; 4] = ["oracle", "scaling", "tangent", "all"];

/// One line of a verification suite.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            value,
            limit,
            pass: value <= limit,
        }
    }
}

fn oracle_suite() -> Result<Vec<Check>> {
    let r = 0.02;
    let g = SectionPairGeometry::symmetric(r, 1.0)?;
    let mut out = Vec::new();
    for q1 in [0.0, r] {
        let a = quad_oracle_reduced(q1, r, 6.0, &g, &QuadratureSpec::reduced())?.value;
        let b = quad_oracle_cartesian(q1, r, 6.0, &g, &QuadratureSpec::cartesian())?.value;
        out.push(Check::at_most(format!("reduced vs cartesian, q1 = {q1}, q2 = R"), ((a - b) / b).abs(), 1e-6));
    }
    let mut cfg = ScenarioConfig::new(ScenarioKind::PotentialTable);
    cfg.study.q1_values = vec![0.0];
    let tab = scenarios::potential_table(&cfg)?;
    out.push(Check::at_most("ISSIP vs reduced oracle, q1 = 0", tab.errors[0].1, 5e-2));
    Ok(out)
}

fn scaling_suite() -> Result<Vec<Check>> {
    let c = scenarios::cylinder_eq(&ScenarioConfig::new(ScenarioKind::CylinderEq))?;
    let mut out = vec![
        Check::at_most("cylinder slope m = 6", (c.slope_m6 + 1.5).abs(), 1e-6),
        Check::at_most("cylinder slope m = 12", (c.slope_m12 + 7.5).abs(), 1e-6),
        Check::at_most("ISSIP slope m = 6 at q1 = 0", (c.issip_slope_m6 + 2.5).abs(), 1e-6),
        Check::at_most("equilibrium gap root vs minimum", c.root_vs_minimum(), 1e-8),
    ];
    let law = CompositeLaw::new(vec![PowerLaw::new(6.0, -1.0)])?;
    let g = SectionPairGeometry::symmetric(0.02, 1.0)?;
    let far = crate::laws::cylinder_per_length(1.0, &law, &g)?;
    out.push(Check::at_most("cylinder value finite far out", if far.is_finite() { 0.0 } else { 1.0 }, 0.0));
    Ok(out)
}

fn tangent_suite() -> Result<Vec<Check>> {
    let mut cfg = ScenarioConfig::new(ScenarioKind::TangentTest);
    cfg.material.youngs_modulus = Some(1000.0);
    cfg.discretization.control_points = 20;
    cfg.discretization.density = 200.0;
    cfg.study.columns = 8;
    let tt = scenarios::tangent_test(&cfg)?;
    let worst = tt.columns.iter().map(|c| c.assembled).fold(0.0, f64::max);
    let worst_fd = tt.columns.iter().map(|c| c.finite_difference).fold(0.0, f64::max);
    Ok(vec![
        Check::at_most("assembled vs complex-step columns", worst, 1e-6),
        Check::at_most("finite difference vs complex-step columns", worst_fd, 1e-4),
        Check::at_most("complex step independent of step size", tt.step_independence, 1e-12),
    ])
}

/// Run a named verification suite.
pub fn verify_suite(name: &str) -> Result<Vec<Check>> {
    match name {
        "oracle" => oracle_suite(),
        "scaling" => scaling_suite(),
        "tangent" => tangent_suite(),
        "all" => {
            let mut v = scaling_suite()?;
            v.extend(oracle_suite()?);
            v.extend(tangent_suite()?);
            Ok(v)
        }
        other => Err(Error::config(
            "suite",
            format!("unknown suite `{other}`, expected one of {}", SUITES.join(", ")),
        )),
    }
}
