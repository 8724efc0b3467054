//! Strict JSON scenario configuration.

use crate::error::{Error, Result};
use crate::interaction::{Formulation, MomentTreatment};
use crate::laws::{CompositeLaw, PowerLaw, SectionPairGeometry};
use crate::solver::ContinuationConfig;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    PotentialTable,
    CylinderEq,
    CutoffStudy,
    IntegrationStudy,
    TangentTest,
    Peel,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::PotentialTable => "potential-table",
            ScenarioKind::CylinderEq => "cylinder-eq",
            ScenarioKind::CutoffStudy => "cutoff-study",
            ScenarioKind::IntegrationStudy => "integration-study",
            ScenarioKind::TangentTest => "tangent-test",
            ScenarioKind::Peel => "peel",
        }
    }

    fn needs_beams(self) -> bool {
        matches!(self, ScenarioKind::TangentTest | ScenarioKind::Peel)
    }
}

/// Either the two Lennard-Jones constants or an explicit list of terms.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k6: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k12: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<PowerLaw>>,
}

pub const DEFAULT_K6: f64 = -1e-7;
pub const DEFAULT_K12: f64 = 5e-25;

impl LawConfig {
    pub fn law(&self) -> Result<CompositeLaw> {
        match (&self.terms, self.k6, self.k12) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                Err(Error::config("law", "give either k6/k12 or terms, not both"))
            }
            (Some(t), None, None) => CompositeLaw::new(t.clone()).map_err(|e| Error::config("law.terms", e.to_string())),
            (None, k6, k12) => {
                CompositeLaw::new(vec![
                    PowerLaw::new(6.0, k6.unwrap_or(DEFAULT_K6)),
                    PowerLaw::new(12.0, k12.unwrap_or(DEFAULT_K12)),
                ])
                .map_err(|e| Error::config("law", e.to_string()))
            }
        }
    }
}

fn d_radius() -> f64 {
    0.02
}
fn d_one() -> f64 {
    1.0
}
fn d_length() -> f64 {
    5.0
}
fn d_gap() -> f64 {
    0.0008
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    #[serde(default = "d_radius")]
    pub radius_x: f64,
    #[serde(default = "d_radius")]
    pub radius_y: f64,
    /// referential particle densities
    #[serde(default = "d_one")]
    pub density_x: f64,
    #[serde(default = "d_one")]
    pub density_y: f64,
    #[serde(default = "d_length")]
    pub length: f64,
    /// surface gap between the straight beams in the reference configuration
    #[serde(default = "d_gap")]
    pub initial_gap: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            radius_x: d_radius(),
            radius_y: d_radius(),
            density_x: d_one(),
            density_y: d_one(),
            length: d_length(),
            initial_gap: d_gap(),
        }
    }
}

impl GeometryConfig {
    pub fn section_pair(&self) -> Result<SectionPairGeometry> {
        SectionPairGeometry::new(self.radius_x, self.radius_y, self.density_x, self.density_y)
            .map_err(|e| Error::config("geometry", e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub youngs_modulus: Option<f64>,
}

fn d_degree() -> usize {
    4
}
fn d_cps() -> usize {
    161
}
fn d_density() -> f64 {
    3200.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationConfig {
    #[serde(default = "d_degree")]
    pub degree: usize,
    #[serde(default = "d_cps")]
    pub control_points: usize,
    /// interaction points per unit reference length
    #[serde(default = "d_density")]
    pub density: f64,
    /// centroid-distance cutoff, 2.5 times the mean radius when absent
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        DiscretizationConfig {
            degree: d_degree(),
            control_points: d_cps(),
            density: d_density(),
            cutoff: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionConfig {
    #[serde(default)]
    pub formulation: Formulation,
    #[serde(default)]
    pub moments: MomentTreatment,
}

fn d_snap_every() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// write a snapshot every n accepted steps (0 disables all but the last)
    #[serde(default = "d_snap_every")]
    pub snapshot_every: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: None,
            snapshot_every: d_snap_every(),
        }
    }
}

fn d_q1_values() -> Vec<f64> {
    vec![0.0, 0.01, 0.02, 0.04]
}
fn d_q2_range() -> [f64; 2] {
    [0.0006, 0.005]
}
fn d_q2_samples() -> usize {
    45
}
fn d_cutoffs() -> Vec<f64> {
    vec![0.045, 0.05, 0.06, 0.07]
}
fn d_cutoff_gaps() -> Vec<f64> {
    vec![0.0004, 0.0008, 0.0009, 0.001, 0.0015, 0.002]
}
fn d_study_gap() -> f64 {
    0.0009
}
fn d_half_width() -> f64 {
    0.03
}
fn d_densities() -> Vec<f64> {
    vec![400.0, 800.0, 1600.0, 3200.0, 6400.0]
}
fn d_columns() -> usize {
    20
}
fn d_perturbation() -> f64 {
    1e-4
}
fn d_slope_range() -> [f64; 2] {
    [0.001, 0.01]
}

/// Parameters of the table and study scenarios; ignored by the others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    #[serde(default = "d_q1_values")]
    pub q1_values: Vec<f64>,
    #[serde(default = "d_q2_range")]
    pub q2_range: [f64; 2],
    #[serde(default = "d_q2_samples")]
    pub q2_samples: usize,
    #[serde(default = "d_slope_range")]
    pub slope_range: [f64; 2],
    #[serde(default = "d_cutoffs")]
    pub cutoffs: Vec<f64>,
    #[serde(default = "d_cutoff_gaps")]
    pub cutoff_gaps: Vec<f64>,
    #[serde(default = "d_study_gap")]
    pub gap: f64,
    #[serde(default = "d_half_width")]
    pub half_width: f64,
    #[serde(default = "d_densities")]
    pub densities: Vec<f64>,
    #[serde(default = "d_columns")]
    pub columns: usize,
    /// amplitude of the random control-point perturbation in the tangent test
    #[serde(default = "d_perturbation")]
    pub perturbation: f64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        serde_json::from_value(Value::Object(Default::default())).expect("all study fields default")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    #[serde(default)]
    pub law: LawConfig,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub material: MaterialConfig,
    #[serde(default)]
    pub discretization: DiscretizationConfig,
    #[serde(default)]
    pub interaction: InteractionConfig,
    #[serde(default)]
    pub solver: ContinuationConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub study: StudyConfig,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn new(scenario: ScenarioKind) -> Self {
        ScenarioConfig {
            scenario,
            law: LawConfig::default(),
            geometry: GeometryConfig::default(),
            material: MaterialConfig::default(),
            discretization: DiscretizationConfig::default(),
            interaction: InteractionConfig::default(),
            solver: ContinuationConfig::default(),
            output: OutputConfig::default(),
            study: StudyConfig::default(),
            seed: 0,
        }
    }

    pub fn cutoff(&self) -> f64 {
        self.discretization
            .cutoff
            .unwrap_or(1.25 * (self.geometry.radius_x + self.geometry.radius_y))
    }

    pub fn youngs_modulus(&self) -> Result<f64> {
        self.material
            .youngs_modulus
            .ok_or_else(|| Error::config("material.youngs_modulus", "required for beam scenarios"))
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.geometry;
        for (name, v) in [
            ("geometry.radius_x", g.radius_x),
            ("geometry.radius_y", g.radius_y),
            ("geometry.density_x", g.density_x),
            ("geometry.density_y", g.density_y),
            ("geometry.length", g.length),
            ("geometry.initial_gap", g.initial_gap),
        ] {
            positive(name, v)?;
        }
        self.law.law()?;
        let d = &self.discretization;
        if let Some(c) = d.cutoff {
            positive("discretization.cutoff", c)?;
        }
        if !(d.density >= 1.0 && d.density.is_finite()) {
            return Err(Error::config("discretization.density", "must be at least 1"));
        }
        if d.degree < 2 {
            return Err(Error::config("discretization.degree", "curvature needs degree >= 2"));
        }
        if d.control_points < d.degree + 1 {
            return Err(Error::config("discretization.control_points", "need at least degree + 1"));
        }
        self.solver.validate()?;
        if self.scenario.needs_beams() {
            positive("material.youngs_modulus", self.youngs_modulus()?)?;
        }
        let s = &self.study;
        if !(s.q2_range[0] > 0.0 && s.q2_range[1] > s.q2_range[0]) {
            return Err(Error::config("study.q2_range", "need 0 < lo < hi"));
        }
        if !(s.slope_range[0] > 0.0 && s.slope_range[1] > s.slope_range[0]) {
            return Err(Error::config("study.slope_range", "need 0 < lo < hi"));
        }
        if s.q2_samples < 3 {
            return Err(Error::config("study.q2_samples", "need at least 3"));
        }
        for &c in &s.cutoffs {
            positive("study.cutoffs", c)?;
        }
        for &q in &s.cutoff_gaps {
            positive("study.cutoff_gaps", q)?;
        }
        positive("study.gap", s.gap)?;
        positive("study.half_width", s.half_width)?;
        for &n in &s.densities {
            if !(n >= 1.0 && n.is_finite()) {
                return Err(Error::config("study.densities", "each density must be at least 1"));
            }
        }
        if s.perturbation < 0.0 || !s.perturbation.is_finite() {
            return Err(Error::config("study.perturbation", "must be finite and non-negative"));
        }
        Ok(())
    }

    /// Canonical pretty JSON; parses back to an equal value.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be positive and finite, got {v}")))
    }
}

fn from_value(v: Value) -> Result<ScenarioConfig> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = e.path().to_string();
        Error::config(if path == "." { String::new() } else { path }, e.into_inner().to_string())
    })
}

/// Parse and validate.
pub fn config_parse(text: &str) -> Result<ScenarioConfig> {
    parse_with_overrides(text, &[])
}

/// Apply `key.path=value` overrides to the raw document, then parse and validate.
/// Values are read as JSON when possible and as strings otherwise.
pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<ScenarioConfig> {
    let mut doc: Value = serde_json::from_str(text).map_err(|e| Error::config("", format!("invalid JSON: {e}")))?;
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    let cfg = from_value(doc)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn apply_override(doc: &mut Value, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::config(spec, "override must look like key=value"))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(Error::config(key, "empty path segment"));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Error::config(parts[..i].join("."), "not an object"))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("loop returns on the last segment")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_peel_defaults() {
        let c = config_parse(r#"{"scenario":"peel","material":{"youngs_modulus":1000}}"#).unwrap();
        assert_eq!(c.discretization.density, 3200.0);
        assert_eq!(c.cutoff(), 0.05);
        assert_eq!(c.solver.tolerance, 1e-5);
        assert_eq!(c.discretization.degree, 4);
        assert_eq!(c.discretization.control_points, 161);
    }

    #[test]
    fn peel_without_stiffness_is_rejected() {
        let e = config_parse(r#"{"scenario":"peel"}"#).unwrap_err();
        assert!(matches!(e, Error::Config { ref field, .. } if field == "material.youngs_modulus"), "{e}");
        assert!(config_parse(r#"{"scenario":"cylinder-eq"}"#).is_ok());
    }

    #[test]
    fn unknown_key_is_named() {
        let e = config_parse(r#"{"scenario":"peel","discretization":{"cutofff":0.05}}"#).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("cutofff"), "{msg}");
        assert!(matches!(e, Error::Config { ref field, .. } if field.starts_with("discretization")), "{e}");
    }

    #[test]
    fn overrides_create_and_replace() {
        let c = parse_with_overrides(
            r#"{"scenario":"peel"}"#,
            &["material.youngs_modulus=250".into(), "interaction.formulation=straightforward".into()],
        )
        .unwrap();
        assert_eq!(c.material.youngs_modulus, Some(250.0));
        assert_eq!(c.interaction.formulation, Formulation::Straightforward);
        assert!(parse_with_overrides(r#"{"scenario":"peel"}"#, &["nokey".into()]).is_err());
        assert!(parse_with_overrides(r#"{"scenario":"peel"}"#, &["scenario.x=1".into()]).is_err());
    }

    #[test]
    fn negative_radius_rejected() {
        let e = config_parse(r#"{"scenario":"cylinder-eq","geometry":{"radius_x":-0.02}}"#).unwrap_err();
        assert!(matches!(e, Error::Config { ref field, .. } if field == "geometry.radius_x"));
    }

    #[test]
    fn law_terms_or_constants() {
        let t = r#"{"scenario":"cylinder-eq","law":{"terms":[{"exponent":6,"coefficient":-1e-7}]}}"#;
        assert_eq!(config_parse(t).unwrap().law.law().unwrap().terms().len(), 1);
        let both = r#"{"scenario":"cylinder-eq","law":{"k6":-1e-7,"terms":[]}}"#;
        assert!(config_parse(both).is_err());
    }
}
