//! Verification suite: every commutator identity the laboratory relies on,
//! checked on interior blocks and reported as structured results.

pub mod checks;
pub mod recipe;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{invalid, Error, Result};

pub use checks::{run_identity_checks, IdentityCheck};
pub use recipe::{Recipe, RecipeContext};

/// Formula anchors; every one must be covered by at least one check.
pub mod anchors {
    pub const POWER_COMMUTATOR: &str = "[xⁿ, p] = iħ n xⁿ⁻¹";
    pub const SHIFTED_POWERS: &str = "[(x − b)ⁿ, p] = iħ n (x − b)ⁿ⁻¹, [(p − a)ⁿ, x] = −iħ n (p − a)ⁿ⁻¹";
    pub const MOMENTUM_RELATION: &str = "m dx/dt = p";
    pub const FORCE_RELATION: &str = "dp/dt = −V′(x)";
    pub const POTENTIAL_COMMUTATOR: &str = "[V(x), p] = iħ V′(x)";
    pub const NEWTON: &str = "m d²x/dt² = −V′(x)";
    pub const HARMONIC: &str = "m d²x/dt² = −mω² x";
    pub const GRAVITY: &str = "m d²r/dt² = −GmM/r² (Taylor series about r0)";
    pub const CCR: &str = "[rᵢ, pⱼ] = iħ δᵢⱼ";
    pub const EM_VELOCITY: &str = "vᵢ = (pᵢ − qAᵢ)/m";
    pub const KINETIC_COMMUTATOR: &str = "[πᵢ, πⱼ] = iħ q εᵢⱼₖ Bₖ";
    pub const LORENTZ: &str = "m dv/dt = q v × B + q E";
    pub const ROTATING_VELOCITY: &str = "dr/dt = (p − m ω × r)/m";
    pub const ROTATING: &str = "m d²r/dt² = −2m ω × v − m ω × (ω × r)";
    pub const HAMILTON: &str = "dqⱼ/dt = ∂H/∂pⱼ, dpⱼ/dt = −∂H/∂qⱼ";
    pub const EHRENFEST: &str = "d⟨p⟩/dt = −⟨V′(x)⟩";
    pub const DEVIATION: &str = "⟨V′(x)⟩ = V′(⟨x⟩) + β(Δx)²";
}

/// Check groups in run order.
pub const GROUPS: [&str; 6] = ["power_commutator", "newton", "lorentz", "rotating", "hamilton", "ehrenfest"];

/// Anchors each group is required to cover.
pub const MANIFEST: &[(&str, &str)] = &[
    ("power_commutator", anchors::POWER_COMMUTATOR),
    ("power_commutator", anchors::SHIFTED_POWERS),
    ("newton", anchors::MOMENTUM_RELATION),
    ("newton", anchors::FORCE_RELATION),
    ("newton", anchors::POTENTIAL_COMMUTATOR),
    ("newton", anchors::NEWTON),
    ("newton", anchors::HARMONIC),
    ("newton", anchors::GRAVITY),
    ("lorentz", anchors::CCR),
    ("lorentz", anchors::EM_VELOCITY),
    ("lorentz", anchors::KINETIC_COMMUTATOR),
    ("lorentz", anchors::LORENTZ),
    ("rotating", anchors::ROTATING_VELOCITY),
    ("rotating", anchors::ROTATING),
    ("hamilton", anchors::HAMILTON),
    ("ehrenfest", anchors::EHRENFEST),
    ("ehrenfest", anchors::DEVIATION),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    /// Levels for single-dof checks.
    pub levels_1d: usize,
    /// Levels per dof for the planar field and rotating-frame checks.
    pub levels_2d: usize,
    /// Levels per dof for random Hamiltonians.
    pub levels_hamilton: usize,
    pub interior_fraction: f64,
    /// Overrides every per-group tolerance when set.
    pub tolerance: Option<f64>,
    /// Random Hamiltonians use seeds `seed, seed + 1, …`.
    pub seed: u64,
    pub n_random_hamiltonians: usize,
    pub hbar_values: Vec<f64>,
    pub newton_samples: usize,
    pub newton_t_final: f64,
    pub cubic_beta: f64,
    pub rotating_omega: f64,
    pub groups: Vec<String>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            levels_1d: 64,
            levels_2d: 32,
            levels_hamilton: 24,
            interior_fraction: 0.5,
            tolerance: None,
            seed: 0,
            n_random_hamiltonians: 20,
            hbar_values: vec![0.1, 1.0, 10.0],
            newton_samples: 10,
            newton_t_final: 10.0,
            cubic_beta: 0.005,
            rotating_omega: 0.5,
            groups: GROUPS.iter().map(|g| g.to_string()).collect(),
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t.is_finite()) {
                return Err(invalid("tolerance", "must be positive and finite"));
            }
        }
        if !(self.interior_fraction > 0.0 && self.interior_fraction < 1.0) {
            return Err(invalid("interior_fraction", "must lie in (0, 1)"));
        }
        if self.hbar_values.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(invalid("hbar_values", "every ħ must be positive"));
        }
        if self.newton_samples == 0 || !(self.newton_t_final > 0.0) {
            return Err(invalid("newton_samples", "need a non-empty grid over a positive span"));
        }
        for g in &self.groups {
            if !GROUPS.contains(&g.as_str()) {
                return Err(Error::UnknownCheck(g.clone()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub group: String,
    pub anchor: String,
    pub lhs: String,
    pub rhs: String,
    pub measured_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub parameters: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl CheckResult {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: &str,
        group: &str,
        anchor: &str,
        lhs: String,
        rhs: String,
        measured_error: f64,
        tolerance: f64,
        parameters: BTreeMap<String, Value>,
        note: Option<String>,
    ) -> Self {
        Self {
            name: name.to_string(),
            group: group.to_string(),
            anchor: anchor.to_string(),
            lhs,
            rhs,
            passed: measured_error <= tolerance,
            measured_error,
            tolerance,
            parameters,
            note,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub version: String,
    pub config: VerifyConfig,
    pub summary: Summary,
    pub missing_anchors: Vec<String>,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0 && self.missing_anchors.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Identity checks for one group; the state-level `ehrenfest` group has none.
pub fn identity_checks(config: &VerifyConfig, group: &str) -> Result<Vec<IdentityCheck>> {
    match group {
        "power_commutator" => checks::power_commutator_checks(config, 6),
        "newton" => checks::newton_checks(config),
        "lorentz" => checks::lorentz_checks(config),
        "rotating" => checks::rotating_checks(config),
        "hamilton" => checks::hamilton_checks(config),
        "ehrenfest" => Ok(vec![]),
        other => Err(Error::UnknownCheck(other.to_string())),
    }
}

pub fn run_group(config: &VerifyConfig, group: &str) -> Result<Vec<CheckResult>> {
    if group == "ehrenfest" {
        return checks::ehrenfest_checks(config);
    }
    run_identity_checks(&identity_checks(config, group)?)
}

/// Anchors of the requested groups that no result covers.
pub fn missing_anchors(groups: &[String], results: &[CheckResult]) -> Vec<String> {
    MANIFEST
        .iter()
        .filter(|(g, _)| groups.iter().any(|x| x == g))
        .filter(|(_, a)| !results.iter().any(|r| r.anchor == *a))
        .map(|(_, a)| a.to_string())
        .collect()
}

/// Runs the configured groups in canonical order.
pub fn run_all(config: &VerifyConfig) -> Result<VerificationReport> {
    config.validate()?;
    let mut results = Vec::new();
    for group in GROUPS {
        if config.groups.iter().any(|g| g == group) {
            results.extend(run_group(config, group)?);
        }
    }
    let passed = results.iter().filter(|r| r.passed).count();
    Ok(VerificationReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        summary: Summary {
            total: results.len(),
            passed,
            failed: results.len() - passed,
        },
        missing_anchors: missing_anchors(&config.groups, &results),
        checks: results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_anchor_is_planned() {
        let cfg = VerifyConfig {
            n_random_hamiltonians: 1,
            ..VerifyConfig::default()
        };
        let mut planned: Vec<&str> = Vec::new();
        for g in GROUPS {
            planned.extend(identity_checks(&cfg, g).unwrap().iter().map(|c| c.anchor));
        }
        planned.extend([anchors::EHRENFEST, anchors::DEVIATION]);
        for (_, a) in MANIFEST {
            assert!(planned.contains(a), "no check for {a}");
        }
        for c in GROUPS.iter().flat_map(|g| identity_checks(&cfg, g).unwrap()) {
            assert!(MANIFEST.iter().any(|(g, a)| *g == c.group && *a == c.anchor), "{}", c.name);
        }
    }

    #[test]
    fn empty_selection_is_trivially_successful() {
        let report = run_all(&VerifyConfig {
            groups: vec![],
            ..VerifyConfig::default()
        })
        .unwrap();
        assert_eq!(report.summary.total, 0);
        assert!(report.all_passed());
    }

    #[test]
    fn config_rejects_unknown_fields_and_groups() {
        assert!(serde_json::from_str::<VerifyConfig>(r#"{"levels": 3}"#).is_err());
        let cfg: VerifyConfig = serde_json::from_str(r#"{"groups": ["nope"]}"#).unwrap();
        assert_eq!(cfg.validate(), Err(Error::UnknownCheck("nope".into())));
        assert!(VerifyConfig {
            tolerance: Some(-1.0),
            ..VerifyConfig::default()
        }
        .validate()
        .is_err());
        let partial: VerifyConfig = serde_json::from_str(r#"{"seed": 7}"#).unwrap();
        assert_eq!(partial.levels_1d, 64);
        assert_eq!(partial.seed, 7);
    }

    #[test]
    fn missing_anchor_detection() {
        let groups = vec!["rotating".to_string()];
        assert_eq!(missing_anchors(&groups, &[]).len(), 2);
    }

    #[test]
    fn small_report_is_deterministic_json() {
        let cfg = VerifyConfig {
            levels_1d: 24,
            groups: vec!["power_commutator".into(), "ehrenfest".into()],
            ..VerifyConfig::default()
        };
        let a = run_all(&cfg).unwrap();
        let b = run_all(&cfg).unwrap();
        assert!(a.all_passed(), "{:?}", a.failures().collect::<Vec<_>>());
        assert_eq!(a.to_json(), b.to_json());
        let back: VerificationReport = serde_json::from_str(&a.to_json()).unwrap();
        assert_eq!(back.summary, a.summary);
    }
}
