//! Scenario files: strict JSON, unknown keys rejected.

use std::path::Path;

use heisenlab::classical::Method;
use heisenlab::hamiltonians::{FieldConfig, MAX_DEGREE};
use heisenlab::{c64, Polynomial};
use serde::{Deserialize, Serialize};

use crate::CliError;

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Stem for every output file; letters, digits, `-` and `_`.
    pub name: String,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub mass: f64,
    pub system: System,
    #[serde(default)]
    pub basis: BasisConfig,
    pub initial: InitialState,
    pub time: TimeGrid,
    #[serde(default)]
    pub integrator: IntegratorSettings,
    /// Run the Hamilton-equation identity checks on the scenario Hamiltonian.
    #[serde(default)]
    pub checks: bool,
    #[serde(default)]
    pub check_tolerance: Option<f64>,
    #[serde(default)]
    pub expect: Expectations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum System {
    /// `V(x) = Σ cₖ (x − x₀)ᵏ`.
    Potential {
        coefficients: Vec<f64>,
        #[serde(default)]
        expansion_point: f64,
    },
    /// Newtonian attraction expanded in the displacement `r − r0`.
    GravityTaylor {
        #[serde(default = "one")]
        g: f64,
        central_mass: f64,
        r0: f64,
        order: usize,
    },
    Em {
        fields: FieldConfig,
    },
    Rotating {
        omega: f64,
        #[serde(default = "half")]
        centrifugal_factor: f64,
    },
    /// Any polynomial in the `dofs N` text format.
    GenericHamiltonian {
        polynomial: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    #[serde(default)]
    pub levels: Option<usize>,
    #[serde(default)]
    pub length_scale: Option<f64>,
    #[serde(default = "half")]
    pub interior_fraction: f64,
}

impl Default for BasisConfig {
    fn default() -> Self {
        Self {
            levels: None,
            length_scale: None,
            interior_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Amplitude {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<Amplitude> for c64 {
    fn from(a: Amplitude) -> Self {
        c64::new(a.re, a.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    /// One coherent amplitude per dof.
    Coherent(Vec<Amplitude>),
    /// One occupation number per dof.
    Fock(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_final: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSettings {
    #[serde(default)]
    pub method: Method,
    #[serde(default = "default_dt")]
    pub dt: f64,
}

fn default_dt() -> f64 {
    heisenlab::classical::DEFAULT_DT
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            method: Method::Rk4,
            dt: default_dt(),
        }
    }
}

/// Pass conditions on the largest position gap.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    #[serde(default)]
    pub max_gap_below: Option<f64>,
    #[serde(default)]
    pub max_gap_above: Option<f64>,
}

fn schema(field: &str, reason: impl Into<String>) -> CliError {
    CliError::Schema {
        field: field.to_string(),
        reason: reason.into(),
    }
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(schema(field, format!("must be positive and finite, got {v}")))
    }
}

impl Scenario {
    pub fn n_dofs(&self) -> Result<usize, CliError> {
        Ok(match &self.system {
            System::Potential { .. } | System::GravityTaylor { .. } => 1,
            System::Em { .. } | System::Rotating { .. } => 2,
            System::GenericHamiltonian { polynomial } => Polynomial::from_text(polynomial)?.n_dofs(),
        })
    }

    pub fn levels(&self) -> Result<usize, CliError> {
        Ok(match self.basis.levels {
            Some(n) => n,
            None if self.n_dofs()? == 1 => 64,
            None if self.n_dofs()? == 2 => 32,
            None => 10,
        })
    }

    /// Basis length; by default the oscillator length of the local
    /// curvature, or the magnetic length for a charge in a field.
    pub fn length_scale(&self) -> f64 {
        if let Some(l) = self.basis.length_scale {
            return l;
        }
        match &self.system {
            System::Potential { coefficients, .. } => match coefficients.get(2) {
                Some(&c2) if c2 > 0.0 => {
                    let omega = (2.0 * c2 / self.mass).sqrt();
                    (self.hbar / (self.mass * omega)).sqrt()
                }
                _ => 1.0,
            },
            System::Em { fields } => {
                let qb = (fields.charge * fields.magnetic[2]).abs();
                if qb > 0.0 {
                    (2.0 * self.hbar / qb).sqrt()
                } else {
                    1.0
                }
            }
            _ => 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
        {
            return Err(schema("name", "use letters, digits, '-' and '_' only"));
        }
        positive("hbar", self.hbar)?;
        positive("mass", self.mass)?;
        positive("time.t_final", self.time.t_final)?;
        if self.time.n_samples < 2 {
            return Err(schema("time.n_samples", "need at least 2 samples"));
        }
        positive("integrator.dt", self.integrator.dt)?;
        if let Some(l) = self.basis.length_scale {
            positive("basis.length_scale", l)?;
        }
        let f = self.basis.interior_fraction;
        if !(f > 0.0 && f < 1.0) {
            return Err(schema("basis.interior_fraction", "must lie in (0, 1)"));
        }
        if let Some(t) = self.check_tolerance {
            positive("check_tolerance", t)?;
        }
        match &self.system {
            System::Potential { coefficients, expansion_point } => {
                if coefficients.is_empty() || coefficients.len() > MAX_DEGREE + 1 {
                    return Err(schema(
                        "system.coefficients",
                        format!("need 1 to {} coefficients", MAX_DEGREE + 1),
                    ));
                }
                if !coefficients.iter().chain([expansion_point]).all(|c| c.is_finite()) {
                    return Err(schema("system.coefficients", "must be finite"));
                }
            }
            System::GravityTaylor {
                g,
                central_mass,
                r0,
                order,
            } => {
                positive("system.g", *g)?;
                positive("system.central_mass", *central_mass)?;
                positive("system.r0", *r0)?;
                if *order == 0 || *order > MAX_DEGREE {
                    return Err(schema("system.order", format!("must lie in 1..={MAX_DEGREE}")));
                }
            }
            System::Em { .. } | System::Rotating { .. } | System::GenericHamiltonian { .. } => {}
        }
        let n = self.n_dofs()?;
        let given = match &self.initial {
            InitialState::Coherent(a) => a.len(),
            InitialState::Fock(f) => f.len(),
        };
        if given != n {
            return Err(schema("initial", format!("expected {n} entries, one per dof, got {given}")));
        }
        if self.levels()? < 2 {
            return Err(schema("basis.levels", "need at least 2 levels"));
        }
        Ok(())
    }
}

pub fn parse_scenario_str(text: &str) -> Result<Scenario, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| CliError::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    scenario.validate()?;
    Ok(scenario)
}

pub fn parse_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_scenario_str(&text)
}
