//! Run configuration read from TOML.
//!
//! ```toml
//! M = 1.0
//! output_dir = "out"
//!
//! [ansatz]
//! E1 = 0.965
//! E2 = 0.97
//! l1 = 14.5
//! l2 = 16.0
//! amplitude = 1.0
//! delta = 1e-3
//!
//! [solver]
//! N = 2000
//! tol = 1e-10
//! max_iter = 100
//! margin = 0.5
//! quad_nodes = 64
//!
//! [validate]
//! fault = "zero_pt"   # optional
//! ```
//!
//! Dotted keys (`ansatz.delta = 1e-3`) are equivalent to the table form.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::ansatz::{AnsatzConfig, SupportBox};
use crate::error::{Result, ShellError};
use crate::output::{json_f64, object};
use crate::solver::{ShellProblem, SolverConfig};
use crate::validation::Fault;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnsatzParams {
    #[serde(rename = "E1")]
    pub e1: f64,
    #[serde(rename = "E2")]
    pub e2: f64,
    pub l1: f64,
    pub l2: f64,
    pub amplitude: f64,
    pub delta: f64,
    /// Overrides the quarter-gap default.
    pub eta: Option<f64>,
}

impl Default for AnsatzParams {
    fn default() -> Self {
        Self {
            e1: 0.965,
            e2: 0.97,
            l1: 14.5,
            l2: 16.0,
            amplitude: 1.0,
            delta: 1e-3,
            eta: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateParams {
    pub fault: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    #[serde(rename = "M")]
    pub mass: f64,
    pub output_dir: Option<PathBuf>,
    pub ansatz: AnsatzParams,
    pub solver: SolverConfig,
    pub validate: ValidateParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mass: 1.0,
            output_dir: None,
            ansatz: AnsatzParams::default(),
            solver: SolverConfig::default(),
            validate: ValidateParams::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ShellError::Config(e.to_string()))?;
        cfg.solver.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ShellError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            ShellError::Config(msg) => ShellError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Builds and validates the support box, ansatz and solver settings.
    /// Any rejection is reported as a configuration error.
    pub fn problem(&self) -> Result<ShellProblem> {
        let a = &self.ansatz;
        let build = || -> Result<ShellProblem> {
            let support = SupportBox::new(self.mass, a.e1, a.e2, a.l1, a.l2)?;
            let ansatz = match a.eta {
                Some(eta) => AnsatzConfig::with_eta(support, a.delta, a.amplitude, eta)?,
                None => AnsatzConfig::new(support, a.delta, a.amplitude)?,
            };
            ShellProblem::new(ansatz, self.solver)
        };
        build().map_err(|e| match e {
            ShellError::Config(_) => e,
            other => ShellError::Config(other.to_string()),
        })
    }

    pub fn fault(&self) -> Result<Option<Fault>> {
        self.validate.fault.as_deref().map(Fault::parse).transpose()
    }

    /// Resolved configuration, including the derived `eta`.
    pub fn to_json(&self, problem: &ShellProblem) -> Value {
        let a = &self.ansatz;
        let s = &self.solver;
        object([
            ("M", json_f64(self.mass)),
            (
                "ansatz",
                object([
                    ("E1", json_f64(a.e1)),
                    ("E2", json_f64(a.e2)),
                    ("l1", json_f64(a.l1)),
                    ("l2", json_f64(a.l2)),
                    ("amplitude", json_f64(a.amplitude)),
                    ("delta", json_f64(problem.ansatz.delta)),
                    ("eta", json_f64(problem.ansatz.eta)),
                ]),
            ),
            (
                "solver",
                object([
                    ("N", Value::from(s.n)),
                    ("tol", json_f64(s.tol)),
                    ("max_iter", Value::from(s.max_iter)),
                    ("margin", json_f64(s.margin)),
                    ("quad_nodes", Value::from(s.quad_nodes)),
                ]),
            ),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_dotted_keys() {
        let cfg =
            RunConfig::from_toml_str("M = 1.0\nansatz.delta = 0.0\nsolver.N = 400\n").unwrap();
        assert_eq!(cfg.ansatz.delta, 0.0);
        assert_eq!(cfg.ansatz.e1, 0.965);
        assert_eq!(cfg.solver.n, 400);
        assert_eq!(cfg.solver.tol, 1e-10);
        assert!(cfg.problem().is_ok());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            RunConfig::from_toml_str("M = "),
            Err(ShellError::Config(_))
        ));
        assert!(matches!(
            RunConfig::from_toml_str("bogus = 1"),
            Err(ShellError::Config(_))
        ));
        assert!(matches!(
            RunConfig::from_toml_str("solver.N = 2"),
            Err(ShellError::Config(_))
        ));
        let wide = RunConfig::from_toml_str("[ansatz]\nE1 = 0.95\nl1 = 15.0\nl2 = 17.0\n").unwrap();
        assert!(matches!(wide.problem(), Err(ShellError::Config(_))));
        let bad_fault = RunConfig::from_toml_str("validate.fault = \"nope\"").unwrap();
        assert!(bad_fault.fault().is_err());
    }
}
