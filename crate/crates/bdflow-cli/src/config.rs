//! TOML configuration for the `run`, `order-study`, and `multivalued-demo`
//! subcommands.

use std::path::Path;

use bdflow_core::integrator::SchemeConfig;
use bdflow_core::objective::{AllenCahn1d, Barrier, Energy, Monomial, Polynomial, Quadratic};
use bdflow_core::linalg::SymMatrix;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn default_solver_tol() -> f64 {
    1e-12
}

fn default_stop_tol() -> f64 {
    1e-10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub k: u8,
    pub dt: f64,
    pub max_steps: usize,
    #[serde(default = "default_solver_tol")]
    pub solver_tol: f64,
    #[serde(default = "default_stop_tol")]
    pub stop_tol: f64,
}

impl SchemeSection {
    pub fn build(&self) -> Result<SchemeConfig, CliError> {
        let cfg = SchemeConfig {
            k: self.k,
            dt: self.dt,
            max_steps: self.max_steps,
            solver_tol: self.solver_tol,
            stop_tol: self.stop_tol,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSection {
    pub coefficient: f64,
    pub powers: Vec<u32>,
}

/// Energy selection. `barrier` takes either an explicit `curvature`, or one
/// of `alternating_order` (curvature `lambda_k / dt`) and `threshold_order`
/// (curvature `alpha_k / dt`), resolved against the scheme step size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnergySection {
    Quadratic {
        /// Symmetric matrix, row by row.
        matrix: Vec<Vec<f64>>,
        #[serde(default)]
        linear: Option<Vec<f64>>,
    },
    AllenCahn {
        n: usize,
        h: f64,
        well_scale: f64,
    },
    DoubleWell {
        scale: f64,
    },
    Polynomial {
        dim: usize,
        terms: Vec<TermSection>,
        bounds: Vec<(f64, f64)>,
        lower_bound: f64,
    },
    Barrier {
        #[serde(default)]
        curvature: Option<f64>,
        #[serde(default)]
        alternating_order: Option<u8>,
        #[serde(default)]
        threshold_order: Option<u8>,
    },
}

impl EnergySection {
    /// The concrete quadratic when this section describes one; the exact
    /// flow solution is only available in that concrete form.
    pub fn quadratic(&self) -> Result<Option<Quadratic>, CliError> {
        let EnergySection::Quadratic { matrix, linear } = self else {
            return Ok(None);
        };
        let n = matrix.len();
        if matrix.iter().any(|row| row.len() != n) {
            return Err(CliError::Config(String::from(
                "quadratic matrix must be square",
            )));
        }
        for i in 0..n {
            for j in i + 1..n {
                if (matrix[i][j] - matrix[j][i]).abs() > 1e-12 {
                    return Err(CliError::Config(String::from(
                        "quadratic matrix must be symmetric",
                    )));
                }
            }
        }
        let a = SymMatrix::from_fn(n, |i, j| matrix[i][j]);
        let b = linear.clone().unwrap_or_else(|| vec![0.0; n]);
        Ok(Some(Quadratic::new(a, b)?))
    }

    pub fn build(&self, scheme_dt: f64) -> Result<Box<dyn Energy>, CliError> {
        match self {
            EnergySection::Quadratic { .. } => {
                let quad = self.quadratic()?.expect("matched the quadratic arm");
                Ok(Box::new(quad))
            }
            EnergySection::AllenCahn { n, h, well_scale } => {
                Ok(Box::new(AllenCahn1d::new(*n, *h, *well_scale)?))
            }
            EnergySection::DoubleWell { scale } => {
                Ok(Box::new(Polynomial::double_well(*scale)?))
            }
            EnergySection::Polynomial {
                dim,
                terms,
                bounds,
                lower_bound,
            } => {
                let terms: Vec<Monomial> = terms
                    .iter()
                    .map(|t| Monomial {
                        coefficient: t.coefficient,
                        powers: t.powers.clone(),
                    })
                    .collect();
                Ok(Box::new(Polynomial::new(*dim, terms, bounds, *lower_bound)?))
            }
            EnergySection::Barrier {
                curvature,
                alternating_order,
                threshold_order,
            } => {
                let given = curvature.is_some() as u8
                    + alternating_order.is_some() as u8
                    + threshold_order.is_some() as u8;
                if given != 1 {
                    return Err(CliError::Config(String::from(
                        "barrier needs exactly one of curvature, \
                         alternating_order, threshold_order",
                    )));
                }
                if let Some(c) = curvature {
                    Ok(Box::new(Barrier::with_curvature(*c)?))
                } else if let Some(k) = alternating_order {
                    Ok(Box::new(Barrier::new(*k, scheme_dt)?))
                } else {
                    let k = threshold_order.expect("checked above");
                    Ok(Box::new(Barrier::at_uniqueness_threshold(k, scheme_dt)?))
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    /// Use exactly `k` provided or generated states.
    ExactList,
    /// Start from one state and ramp the order up.
    RampUp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileSection {
    /// Every component equal to `value`.
    Constant { value: f64 },
    /// `amplitude * cos(pi i / (dim - 1))` across the components.
    Cosine { amplitude: f64 },
}

impl ProfileSection {
    pub fn generate(&self, dim: usize) -> Vec<f64> {
        match self {
            ProfileSection::Constant { value } => vec![*value; dim],
            ProfileSection::Cosine { amplitude } => (0..dim)
                .map(|i| {
                    let x = if dim > 1 {
                        (i as f64) / ((dim - 1) as f64)
                    } else {
                        0.0
                    };
                    amplitude * (core::f64::consts::PI * x).cos()
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSection {
    pub mode: InitMode,
    #[serde(default)]
    pub states: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub profile: Option<ProfileSection>,
}

impl InitSection {
    /// Resolves the configured initialization into explicit states: one for
    /// ramp-up, `k` (a generated profile is repeated) for exact-list.
    pub fn resolve(&self, dim: usize, k: u8) -> Result<Vec<Vec<f64>>, CliError> {
        let base: Vec<Vec<f64>> = match (&self.states, &self.profile) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(String::from(
                    "init takes either states or profile, not both",
                )))
            }
            (None, None) => {
                return Err(CliError::Config(String::from(
                    "init needs states or profile",
                )))
            }
            (Some(states), None) => states.clone(),
            (None, Some(p)) => vec![p.generate(dim)],
        };
        for s in &base {
            if s.len() != dim {
                return Err(CliError::Config(format!(
                    "init state has length {}, energy dimension is {dim}",
                    s.len()
                )));
            }
        }
        match self.mode {
            InitMode::RampUp => {
                if base.len() != 1 {
                    return Err(CliError::Config(String::from(
                        "ramp-up init needs exactly one state",
                    )));
                }
                Ok(base)
            }
            InitMode::ExactList => {
                let k = k as usize;
                if base.len() == 1 {
                    Ok(vec![base[0].clone(); k])
                } else if base.len() == k {
                    Ok(base)
                } else {
                    Err(CliError::Config(format!(
                        "exact-list init needs 1 or {k} states, got {}",
                        base.len()
                    )))
                }
            }
        }
    }
}

fn default_selection() -> String {
    String::from("lowest-lyapunov")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditSection {
    /// Correction strength; omitted means the admissible midpoint.
    #[serde(default)]
    pub beta: Option<f64>,
    /// `lowest-lyapunov` or `nearest-previous`; ignored when `branch_index`
    /// is set.
    #[serde(default = "default_selection")]
    pub selection: String,
    #[serde(default)]
    pub branch_index: Option<usize>,
}

impl Default for AuditSection {
    fn default() -> Self {
        AuditSection {
            beta: None,
            selection: default_selection(),
            branch_index: None,
        }
    }
}

impl AuditSection {
    pub fn selection(&self) -> Result<bdflow_core::integrator::BranchSelection, CliError> {
        use bdflow_core::integrator::BranchSelection;
        if let Some(i) = self.branch_index {
            return Ok(BranchSelection::Index(i));
        }
        match self.selection.as_str() {
            "lowest-lyapunov" => Ok(BranchSelection::LowestLyapunov),
            "nearest-previous" => Ok(BranchSelection::NearestPrevious),
            other => Err(CliError::Config(format!(
                "unknown branch selection '{other}' \
                 (expected lowest-lyapunov or nearest-previous)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scheme: SchemeSection,
    pub energy: EnergySection,
    pub init: InitSection,
    #[serde(default)]
    pub audit: AuditSection,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceKind {
    /// Exact flow; only available for quadratic energies.
    ClosedForm,
    /// Refined BDF3 run.
    FineBdf3,
    /// Closed form when available, refined BDF3 otherwise.
    Auto,
}

fn default_reference() -> ReferenceKind {
    ReferenceKind::Auto
}

fn default_refine() -> usize {
    16
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderStudyConfig {
    pub energy: EnergySection,
    pub k: u8,
    pub t_final: f64,
    pub dts: Vec<f64>,
    pub init: Vec<f64>,
    #[serde(default = "default_solver_tol")]
    pub solver_tol: f64,
    #[serde(default = "default_reference")]
    pub reference: ReferenceKind,
    #[serde(default = "default_refine")]
    pub refine: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultivaluedConfig {
    pub scheme: SchemeSection,
    pub energy: EnergySection,
    /// Exactly `k` states, oldest first.
    pub history: Vec<Vec<f64>>,
    /// Steps to continue each branch with nearest-previous selection.
    #[serde(default = "default_continue_steps")]
    pub continue_steps: usize,
}

fn default_continue_steps() -> usize {
    50
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_config_round_trips_through_toml() {
        let cfg = RunConfig {
            scheme: SchemeSection {
                k: 3,
                dt: 1.5,
                max_steps: 2000,
                solver_tol: 1e-12,
                stop_tol: 0.0,
            },
            energy: EnergySection::AllenCahn {
                n: 64,
                h: 1.0,
                well_scale: 1.0,
            },
            init: InitSection {
                mode: InitMode::ExactList,
                states: None,
                profile: Some(ProfileSection::Cosine { amplitude: 0.5 }),
            },
            audit: AuditSection::default(),
        };
        let text = toml::to_string(&cfg).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn energy_variants_round_trip() {
        let sections = vec![
            EnergySection::Quadratic {
                matrix: vec![vec![2.0, 0.5], vec![0.5, 1.0]],
                linear: Some(vec![1.0, -1.0]),
            },
            EnergySection::DoubleWell { scale: 2.0 },
            EnergySection::Polynomial {
                dim: 1,
                terms: vec![TermSection {
                    coefficient: 1.0,
                    powers: vec![4],
                }],
                bounds: vec![(-2.0, 2.0)],
                lower_bound: 0.0,
            },
            EnergySection::Barrier {
                curvature: None,
                alternating_order: Some(3),
                threshold_order: None,
            },
        ];
        for section in sections {
            let text = toml::to_string(&section).unwrap();
            let back: EnergySection = toml::from_str(&text).unwrap();
            assert_eq!(section, back);
        }
    }

    #[test]
    fn cosine_profile_spans_the_grid() {
        let p = ProfileSection::Cosine { amplitude: 0.5 };
        let v = p.generate(5);
        assert!((v[0] - 0.5).abs() < 1e-15);
        assert!(v[2].abs() < 1e-15);
        assert!((v[4] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn exact_list_repeats_single_state() {
        let init = InitSection {
            mode: InitMode::ExactList,
            states: Some(vec![vec![0.25, 0.5]]),
            profile: None,
        };
        let states = init.resolve(2, 3).unwrap();
        assert_eq!(states.len(), 3);
        assert!(states.iter().all(|s| s == &vec![0.25, 0.5]));
    }

    #[test]
    fn init_validation_catches_shape_errors() {
        let init = InitSection {
            mode: InitMode::RampUp,
            states: Some(vec![vec![1.0], vec![2.0]]),
            profile: None,
        };
        assert!(init.resolve(1, 3).is_err());
        let empty = InitSection {
            mode: InitMode::RampUp,
            states: None,
            profile: None,
        };
        assert!(empty.resolve(1, 3).is_err());
    }

    #[test]
    fn asymmetric_quadratic_matrix_is_rejected() {
        let section = EnergySection::Quadratic {
            matrix: vec![vec![1.0, 0.2], vec![-0.2, 1.0]],
            linear: None,
        };
        assert!(matches!(section.build(0.1), Err(CliError::Config(_))));
    }

    #[test]
    fn barrier_needs_exactly_one_mode() {
        let section = EnergySection::Barrier {
            curvature: Some(1.0),
            alternating_order: Some(3),
            threshold_order: None,
        };
        assert!(section.build(1.0).is_err());
        let none = EnergySection::Barrier {
            curvature: None,
            alternating_order: None,
            threshold_order: None,
        };
        assert!(none.build(1.0).is_err());
    }
}
