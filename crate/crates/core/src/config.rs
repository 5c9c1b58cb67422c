//! JSON experiment configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algorithms::{certificate, fast_certificate_skm, CertificateInputs, Iteration};
use crate::error::{Error, Result};
use crate::harness::{certificate_audit, fast_audit, liminf_audit, run_ensemble, AuditReport, EnsembleStats};
use crate::moduli::{AlgorithmTag, RateCertificate, StepSchedule};
use crate::spaces::suite::{default_sets, run_geometry_suite, GeometryReport};
use crate::problems::{Atom, BusemannProblem, CostKind, FixedPointProblem, MeanMinProblem, Operator, Problem};
use crate::spaces::{ConvexSet, Point, SpaceKind};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceConfig {
    Euclidean { dim: usize },
    Tripod,
    HalfPlane,
}

impl SpaceConfig {
    pub fn kind(self) -> Result<SpaceKind> {
        match self {
            SpaceConfig::Euclidean { dim: 0 } => Err(Error::Invalid("euclidean dimension must be >= 1".into())),
            SpaceConfig::Euclidean { dim } => Ok(SpaceKind::Euclidean(dim)),
            SpaceConfig::Tripod => Ok(SpaceKind::Tripod),
            SpaceConfig::HalfPlane => Ok(SpaceKind::HalfPlane),
        }
    }
}

fn default_region() -> f64 {
    5.0
}

fn default_lipschitz() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    MeanMin {
        atoms: Vec<Atom>,
        cost: CostKind,
        #[serde(default = "default_region")]
        region_bound: f64,
    },
    FixedPoint {
        operators: Vec<Operator>,
        v: f64,
        #[serde(default = "default_region")]
        region_bound: f64,
    },
    Busemann {
        atoms: Vec<Atom>,
        constraint: ConvexSet,
        #[serde(default = "default_lipschitz")]
        lipschitz: f64,
        #[serde(default = "default_region")]
        region_bound: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub paths: u64,
    pub horizon: u64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FastConfig {
    pub c: f64,
    pub r: u64,
    pub paths: Option<u64>,
    pub horizon: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiminfConfig {
    pub epsilon: f64,
    #[serde(default)]
    pub start: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    #[serde(default)]
    pub epsilons: Vec<f64>,
    pub lambda: f64,
    pub fast: Option<FastConfig>,
    #[serde(default)]
    pub liminf: Vec<LiminfConfig>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    pub samples: usize,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        ValidateConfig { samples: 10_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub space: SpaceConfig,
    pub problem: ProblemConfig,
    pub algorithm: AlgorithmTag,
    pub schedule: StepSchedule,
    pub start: Point,
    #[serde(default)]
    pub certificate: CertificateInputs,
    pub ensemble: EnsembleConfig,
    pub audit: AuditConfig,
    #[serde(default)]
    pub validate: ValidateConfig,
}

/// A configuration with its problem instance built and cross-checked.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub space: SpaceKind,
    pub problem: Problem,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
    }

    pub fn build(self) -> Result<Experiment> {
        let space = self.space.kind()?;
        let problem = match &self.problem {
            ProblemConfig::MeanMin { atoms, cost, region_bound } => {
                Problem::MeanMin(MeanMinProblem::new(space, atoms.clone(), *cost, *region_bound)?)
            }
            ProblemConfig::FixedPoint { operators, v, region_bound } => {
                Problem::FixedPoint(FixedPointProblem::new(space, operators.clone(), *v, *region_bound)?)
            }
            ProblemConfig::Busemann { atoms, constraint, lipschitz, region_bound } => Problem::Busemann(
                BusemannProblem::new(space, atoms.clone(), constraint.clone(), *lipschitz, *region_bound)?,
            ),
        };
        Iteration::new(self.algorithm, &problem, &self.schedule, &self.start)?;
        if self.ensemble.paths == 0 {
            return Err(Error::Invalid("ensemble.paths must be >= 1".into()));
        }
        let a = &self.audit;
        if !(a.lambda > 0.0 && a.lambda <= 1.0) {
            return Err(Error::Invalid(format!("audit.lambda must lie in (0,1], got {}", a.lambda)));
        }
        if a.epsilons.iter().chain(a.liminf.iter().map(|l| &l.epsilon)).any(|e| !(*e > 0.0) || !e.is_finite()) {
            return Err(Error::Invalid("audit epsilons must be finite and > 0".into()));
        }
        if a.fast.is_some() && self.algorithm != AlgorithmTag::Skm {
            return Err(Error::Invalid("fast-rate audits apply to the Krasnoselskii-Mann iteration only".into()));
        }
        Ok(Experiment { config: self, space, problem })
    }

    /// Convex sets appearing in the problem, for the geometry suite.
    pub fn sets(&self) -> Vec<ConvexSet> {
        match &self.problem {
            ProblemConfig::FixedPoint { operators, .. } => operators.iter().map(|o| o.set.clone()).collect(),
            ProblemConfig::Busemann { constraint, .. } => vec![constraint.clone()],
            ProblemConfig::MeanMin { .. } => Vec::new(),
        }
    }
}

impl Experiment {
    pub fn iteration(&self) -> Result<Iteration<'_>> {
        let c = &self.config;
        Iteration::new(c.algorithm, &self.problem, &c.schedule, &c.start)
    }

    pub fn validate(&self) -> Result<GeometryReport> {
        let mut sets = default_sets(self.space);
        sets.extend(self.config.sets());
        run_geometry_suite(self.space, self.config.validate.samples, self.config.ensemble.seed, &sets)
    }

    pub fn run(&self) -> Result<EnsembleStats> {
        let c = &self.config;
        run_ensemble(&self.iteration()?, &c.start, c.ensemble.paths, c.ensemble.horizon, c.ensemble.seed, &c.audit.epsilons)
    }

    pub fn certificate(&self) -> Result<RateCertificate> {
        let c = &self.config;
        certificate(c.algorithm, &self.problem, &c.schedule, &c.start, &c.certificate)
    }

    /// Every configured audit record for `stats`, including liminf windows and
    /// the fast-rate run when one is requested.
    pub fn audit(&self, cert: &RateCertificate, stats: &EnsembleStats) -> Result<AuditReport> {
        let c = &self.config;
        let mut report = certificate_audit(stats, cert, &c.audit.epsilons, c.audit.lambda)?;
        for l in &c.audit.liminf {
            report.records.push(liminf_audit(stats, cert, l.epsilon, l.start)?);
        }
        if let (Some(f), Problem::FixedPoint(fp)) = (&c.audit.fast, &self.problem) {
            let fc = fast_certificate_skm(fp, f.c, f.r, &c.start)?;
            let it = Iteration::new(c.algorithm, &self.problem, &fc.schedule, &c.start)?;
            let fs = run_ensemble(
                &it,
                &c.start,
                f.paths.unwrap_or(c.ensemble.paths),
                f.horizon.unwrap_or(c.ensemble.horizon),
                c.ensemble.seed,
                &c.audit.epsilons,
            )?;
            report.records.extend(fast_audit(&fs, &fc, &c.audit.epsilons)?);
            report.fast_certificate = Some(fc);
        }
        Ok(report)
    }
}
