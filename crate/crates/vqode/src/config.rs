//! Run configuration: a strict TOML schema (unknown keys are hard errors)
//! and its translation into validated solver setups.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::baselines::{make_nodes, NodeKind, SolverSetupOwned};
use crate::complexity::Structure;
use crate::error::VqodeError;
use crate::problems::{CoordinateMap, DmssProblem, PoissonBc, PoissonProblem};
use crate::readout::{DistanceKind, Eta};
use crate::training::{Algorithm, ConstraintTerm, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemChoice {
    Dmss,
    Poisson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleChoice {
    TwoPart,
    Fixed,
    FixedDeep,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DmssConfig {
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default = "one")]
    pub damping: f64,
    #[serde(default = "one")]
    pub stiffness: f64,
    #[serde(default = "one")]
    pub u0: f64,
    #[serde(default)]
    pub du0: f64,
    /// Physical end of the training interval (the evaluation interval end
    /// defaults to 10 s; the Chebyshev baseline pads training to 12 s).
    #[serde(default)]
    pub t_train_hi: Option<f64>,
    #[serde(default = "ten")]
    pub t_eval_hi: f64,
}

fn one() -> f64 {
    1.0
}
fn ten() -> f64 {
    10.0
}

impl Default for DmssConfig {
    fn default() -> Self {
        DmssConfig {
            mass: 1.0,
            damping: 1.0,
            stiffness: 1.0,
            u0: 1.0,
            du0: 0.0,
            t_train_hi: None,
            t_eval_hi: 10.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoissonConfig {
    #[serde(default = "five")]
    pub n_src: u32,
    #[serde(default = "neumann")]
    pub bc: PoissonBc,
    #[serde(default)]
    pub a: f64,
    #[serde(default = "thirtyone")]
    pub b: f64,
    /// Amplitude scale mapping the bounded readout onto the solution range.
    #[serde(default = "twentyfive")]
    pub scale: f64,
}

fn five() -> u32 {
    5
}
fn neumann() -> PoissonBc {
    PoissonBc::Neumann
}
fn thirtyone() -> f64 {
    31.0
}
fn twentyfive() -> f64 {
    25.0
}

impl Default for PoissonConfig {
    fn default() -> Self {
        PoissonConfig { n_src: 5, bc: PoissonBc::Neumann, a: 0.0, b: 31.0, scale: 25.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KiConfig {
    #[serde(default = "fiveq")]
    pub n_qubits: usize,
    #[serde(default = "two")]
    pub n_layers: usize,
    #[serde(default = "lr001")]
    pub lr: f64,
}

fn fiveq() -> usize {
    5
}
fn two() -> usize {
    2
}
fn lr001() -> f64 {
    0.01
}

impl Default for KiConfig {
    fn default() -> Self {
        KiConfig { n_qubits: 5, n_layers: 2, lr: 0.01 }
    }
}

/// The full run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemChoice,
    pub algorithm: Algorithm,
    #[serde(default = "simplified")]
    pub structure: Structure,
    #[serde(default = "kind1")]
    pub node_kind: u8,
    #[serde(default = "seven")]
    pub n_nodes: usize,
    #[serde(default)]
    pub schedule: Option<ScheduleChoice>,
    pub seeds: Vec<u64>,
    #[serde(default = "twok")]
    pub max_iters: usize,
    #[serde(default = "eps4")]
    pub eps_loss: f64,
    #[serde(default = "eps4")]
    pub eps_grad: f64,
    #[serde(default)]
    pub eta: Option<[f64; 3]>,
    #[serde(default = "outdir")]
    pub out_dir: String,
    #[serde(default = "fifty")]
    pub eval_points: usize,
    #[serde(default)]
    pub distance: DistanceKind,
    #[serde(default)]
    pub dmss: Option<DmssConfig>,
    #[serde(default)]
    pub poisson: Option<PoissonConfig>,
    #[serde(default)]
    pub ki: Option<KiConfig>,
}

fn simplified() -> Structure {
    Structure::Simplified
}
fn kind1() -> u8 {
    1
}
fn seven() -> usize {
    7
}
fn twok() -> usize {
    2000
}
fn eps4() -> f64 {
    1e-4
}
fn outdir() -> String {
    "out".into()
}
fn fifty() -> usize {
    50
}

/// A fully validated run: solver setup, schedule, evaluation grid and the
/// reference solution.
#[derive(Debug)]
pub struct PreparedRun {
    pub setup: SolverSetupOwnedAny,
    pub schedule: Schedule,
    pub eval_map: CoordinateMap,
    pub eval_points: usize,
    pub seeds: Vec<u64>,
    pub out_dir: String,
    pub label: String,
}

/// Setup plus the reference oracle, for either problem.
#[derive(Debug, Clone)]
pub enum SolverSetupOwnedAny {
    Dmss(SolverSetupOwned),
    Poisson(PoissonSetupOwned),
}

#[derive(Debug, Clone)]
pub struct PoissonSetupOwned {
    pub problem: PoissonProblem,
    pub algorithm: Algorithm,
    pub structure: Structure,
    pub map: CoordinateMap,
    pub nodes: Vec<f64>,
    pub anchor: (f64, f64),
    pub bc_terms: Vec<ConstraintTerm>,
    pub eta: Eta,
    pub distance: DistanceKind,
    pub scale: f64,
    pub eps_loss: f64,
    pub eps_grad: f64,
    pub max_iters: usize,
}

impl PoissonSetupOwned {
    pub fn borrow(&self) -> crate::training::SolverSetup<'_> {
        crate::training::SolverSetup {
            algorithm: self.algorithm,
            structure: self.structure,
            de: &self.problem,
            map: self.map,
            nodes: self.nodes.clone(),
            anchor: self.anchor,
            bc_terms: self.bc_terms.clone(),
            eta: self.eta,
            distance: self.distance,
            scale: self.scale,
            eps_loss: self.eps_loss,
            eps_grad: self.eps_grad,
            max_iters: self.max_iters,
            ki_qubits: 0,
            ki_layers: 0,
        }
    }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<RunConfig, VqodeError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| VqodeError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| VqodeError::Config(format!("parse error: {e}")))
    }

    fn node_kind(&self) -> Result<NodeKind, VqodeError> {
        match self.node_kind {
            1 => Ok(NodeKind::Kind1),
            2 => Ok(NodeKind::Kind2),
            k => Err(VqodeError::Config(format!("node_kind must be 1 or 2, got {k}"))),
        }
    }

    fn eta_or(&self, default: (f64, f64, f64)) -> Result<Eta, VqodeError> {
        let (de, cs, reg) = match self.eta {
            Some([a, b, c]) => (a, b, c),
            None => default,
        };
        Eta::new(de, cs, reg).map_err(|e| VqodeError::Config(format!("eta: {e}")))
    }

    /// Validate everything and assemble the run.
    pub fn prepare(&self) -> Result<PreparedRun, VqodeError> {
        if self.seeds.is_empty() {
            return Err(VqodeError::Config("seeds: at least one seed required".into()));
        }
        if self.max_iters == 0 {
            return Err(VqodeError::Config("max_iters: must be at least 1".into()));
        }
        if self.eval_points < 2 {
            return Err(VqodeError::Config("eval_points: must be at least 2".into()));
        }
        if self.n_nodes < 2 {
            return Err(VqodeError::Config("n_nodes: must be at least 2".into()));
        }
        match self.problem {
            ProblemChoice::Dmss => self.prepare_dmss(),
            ProblemChoice::Poisson => self.prepare_poisson(),
        }
    }

    fn prepare_dmss(&self) -> Result<PreparedRun, VqodeError> {
        let d = self.dmss.clone().unwrap_or_default();
        let problem = DmssProblem {
            mass: d.mass,
            damping: d.damping,
            stiffness: d.stiffness,
            u0: d.u0,
            du0: d.du0,
        };
        if problem.discriminant() >= 0.0 {
            return Err(VqodeError::Config(format!(
                "dmss: discriminant {} not negative (underdamped case required)",
                problem.discriminant()
            )));
        }
        let is_ki = self.algorithm == Algorithm::KyriienkoInspired;
        let t_train_hi = d.t_train_hi.unwrap_or(if is_ki { 12.0 } else { d.t_eval_hi });
        let map = CoordinateMap::new(0.0, t_train_hi, 0.0, 0.9)?;
        let eval_map = CoordinateMap::new(0.0, d.t_eval_hi, 0.0, 0.9 * d.t_eval_hi / t_train_hi)?;
        let nodes = make_nodes(self.node_kind()?, 0.0, 0.9, self.n_nodes)?;
        let ki = self.ki.clone().unwrap_or_default();
        let eta = self.eta_or(if is_ki { (1.0, 1.0, 0.0) } else { (1.0, 0.6, 1.0) })?;
        let schedule = match self.schedule.unwrap_or(if is_ki {
            ScheduleChoice::Fixed
        } else {
            ScheduleChoice::TwoPart
        }) {
            ScheduleChoice::TwoPart => {
                if is_ki {
                    return Err(VqodeError::Config(
                        "schedule: two_part requires algorithm = hadamardlagrange".into(),
                    ));
                }
                Schedule::two_part_default()
            }
            ScheduleChoice::Fixed => Schedule::fixed_flat(ki.lr, self.max_iters),
            ScheduleChoice::FixedDeep => Schedule::fixed_deep_default(),
        };
        let setup = SolverSetupOwned {
            algorithm: self.algorithm,
            structure: self.structure,
            problem,
            map,
            nodes,
            anchor: (map.x_of_t(0.0), problem.u0),
            bc_terms: vec![ConstraintTerm {
                x: map.x_of_t(0.0),
                target: problem.du0,
                derivative: true,
            }],
            eta,
            distance: self.distance,
            scale: 1.0,
            eps_loss: self.eps_loss,
            eps_grad: self.eps_grad,
            max_iters: self.max_iters,
            ki_qubits: ki.n_qubits,
            ki_layers: ki.n_layers,
        };
        Ok(PreparedRun {
            setup: SolverSetupOwnedAny::Dmss(setup),
            schedule,
            eval_map,
            eval_points: self.eval_points,
            seeds: self.seeds.clone(),
            out_dir: self.out_dir.clone(),
            label: format!(
                "dmss-{}-{:?}-n{}k{}",
                match self.algorithm {
                    Algorithm::HadamardLagrange => "hl",
                    Algorithm::KyriienkoInspired => "ki",
                },
                self.structure,
                self.n_nodes,
                self.node_kind
            )
            .to_lowercase(),
        })
    }

    fn prepare_poisson(&self) -> Result<PreparedRun, VqodeError> {
        if self.algorithm == Algorithm::KyriienkoInspired {
            return Err(VqodeError::Config(
                "algorithm: the Chebyshev baseline is not configured for the Poisson problem"
                    .into(),
            ));
        }
        let p = self.poisson.clone().unwrap_or_default();
        let problem = PoissonProblem { n_src: p.n_src, bc: p.bc, a: p.a, b: p.b };
        if p.b <= p.a {
            return Err(VqodeError::Config(format!("poisson: interval [{}, {}] empty", p.a, p.b)));
        }
        if p.scale <= 0.0 {
            return Err(VqodeError::Config(format!("poisson: scale {} must be positive", p.scale)));
        }
        let mid = problem.midpoint();
        let map = CoordinateMap::new(problem.a, mid, 0.0, 0.9)?;
        let nodes = make_nodes(self.node_kind()?, 0.0, 0.9, self.n_nodes)?;
        let big_a = problem.coeff_a();
        let (b1, c1) = problem.left_branch_coeffs();
        // boundary data pinning the left branch per condition kind
        let (anchor, bc_terms) = match problem.bc {
            PoissonBc::Periodic => (
                (map.x_of_t(problem.a), big_a * (problem.a * problem.a + b1 * problem.a + c1)),
                vec![ConstraintTerm {
                    x: map.x_of_t(problem.a),
                    target: big_a * (2.0 * problem.a + b1),
                    derivative: true,
                }],
            ),
            PoissonBc::Dirichlet => (
                (map.x_of_t(problem.a - 1.0), 0.0),
                vec![ConstraintTerm { x: map.x_of_t(mid), target: 0.0, derivative: false }],
            ),
            PoissonBc::Neumann => (
                (map.x_of_t(mid), 0.0),
                vec![
                    ConstraintTerm { x: map.x_of_t(problem.a), target: 0.0, derivative: true },
                    ConstraintTerm { x: map.x_of_t(problem.a), target: 0.0, derivative: true },
                ],
            ),
        };
        let schedule = match self.schedule.unwrap_or(ScheduleChoice::FixedDeep) {
            ScheduleChoice::FixedDeep => Schedule::fixed_deep_default(),
            ScheduleChoice::Fixed => Schedule::fixed_flat(0.01, self.max_iters),
            ScheduleChoice::TwoPart => {
                return Err(VqodeError::Config(
                    "schedule: two_part applies to the mass-spring problem only".into(),
                ))
            }
        };
        let setup = PoissonSetupOwned {
            problem,
            algorithm: self.algorithm,
            structure: self.structure,
            map,
            nodes,
            anchor,
            bc_terms,
            eta: self.eta_or((1.0, 1.0, 0.0))?,
            distance: self.distance,
            scale: p.scale,
            eps_loss: self.eps_loss,
            eps_grad: self.eps_grad,
            max_iters: self.max_iters,
        };
        Ok(PreparedRun {
            setup: SolverSetupOwnedAny::Poisson(setup),
            schedule,
            eval_map: map,
            eval_points: self.eval_points,
            seeds: self.seeds.clone(),
            out_dir: self.out_dir.clone(),
            label: format!("poisson-{:?}-n{}", p.bc, self.n_nodes).to_lowercase(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let cfg: RunConfig = toml::from_str(
            r#"
            problem = "dmss"
            algorithm = "hadamardlagrange"
            seeds = [1, 2]
            "#,
        )
        .unwrap();
        assert_eq!(cfg.n_nodes, 7);
        let run = cfg.prepare().unwrap();
        assert_eq!(run.seeds, vec![1, 2]);
    }

    #[test]
    fn unknown_keys_are_hard_errors() {
        let r: Result<RunConfig, _> = toml::from_str(
            r#"
            problem = "dmss"
            algorithm = "hadamardlagrange"
            seeds = [1]
            tpyo = 3
            "#,
        );
        assert!(r.is_err());
    }

    #[test]
    fn negative_eta_is_named_in_error() {
        let cfg: RunConfig = toml::from_str(
            r#"
            problem = "dmss"
            algorithm = "hadamardlagrange"
            seeds = [1]
            eta = [-1.0, 0.0, 0.0]
            "#,
        )
        .unwrap();
        let err = cfg.prepare().unwrap_err();
        assert!(err.to_string().contains("eta"));
    }

    #[test]
    fn ki_on_poisson_is_rejected() {
        let cfg: RunConfig = toml::from_str(
            r#"
            problem = "poisson"
            algorithm = "kyriienkoinspired"
            seeds = [1]
            "#,
        )
        .unwrap();
        assert!(cfg.prepare().is_err());
    }

    #[test]
    fn poisson_defaults_prepare() {
        let cfg: RunConfig = toml::from_str(
            r#"
            problem = "poisson"
            algorithm = "hadamardlagrange"
            n_nodes = 3
            seeds = [7]
            "#,
        )
        .unwrap();
        let run = cfg.prepare().unwrap();
        match run.setup {
            SolverSetupOwnedAny::Poisson(p) => {
                assert_eq!(p.nodes.len(), 3);
                assert!((p.scale - 25.0).abs() < 1e-12);
            }
            _ => panic!("expected poisson setup"),
        }
    }
}
