//! Strict JSON run configuration.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use mkv_core::potential::make_quartic;
use mkv_core::{EvenPolynomial, FlowParams, Grid, GridMeasure, PotentialSpec, StationaryTriple, Tilt};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// When present, must name the subcommand being run.
    #[serde(default)]
    pub experiment: Option<String>,
    pub potential: PotentialConfig,
    pub j: f64,
    pub grid: GridConfig,
    #[serde(default)]
    pub flow: FlowParams,
    /// Mandatory for `certificate` and `particles`.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub check: CheckOptions,
    #[serde(default)]
    pub hbar: HbarOptions,
    /// Initial conditions for `flow` and `classify`.
    #[serde(default = "default_initial")]
    pub initial: Vec<InitialCondition>,
    #[serde(default)]
    pub sweep: SweepOptions,
    #[serde(default)]
    pub certificate: CertificateOptions,
    #[serde(default)]
    pub particles: ParticleOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    /// `a z^4 + b z^2`.
    Quartic { a: f64, b: f64 },
    /// `sum_k coeffs[k] z^(2k)` with explicit growth constants.
    EvenPolynomial {
        coeffs: Vec<f64>,
        #[serde(default = "two")]
        eps_growth: f64,
        #[serde(default = "one")]
        c_growth: f64,
        #[serde(default)]
        growth_offset: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub half_width: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckOptions {
    pub samples: usize,
    pub tol: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            samples: 4001,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HbarOptions {
    pub points: usize,
    /// Table covers `[-range m*, range m*]`.
    pub range: f64,
}

impl Default for HbarOptions {
    fn default() -> Self {
        Self {
            points: 601,
            range: 1.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    Minus,
    Zero,
    Plus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    Gaussian {
        mean: f64,
        var: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// Constrained free-energy minimizer with the given mean.
    Tilted {
        mean: f64,
    },
    Stationary {
        which: Which,
    },
}

impl InitialCondition {
    pub fn build(&self, tilt: &Tilt, triple: Option<&StationaryTriple>) -> CliResult<GridMeasure> {
        let grid = tilt.grid();
        Ok(match *self {
            InitialCondition::Gaussian { mean, var } => GridMeasure::gaussian(grid, mean, var)?,
            InitialCondition::Uniform { lo, hi } => GridMeasure::uniform(grid, lo, hi)?,
            InitialCondition::Tilted { mean } => tilt.constrained_minimizer(mean)?,
            InitialCondition::Stationary { which } => {
                let t = triple.ok_or_else(|| CliError::config("stationary initial condition needs m*"))?;
                match which {
                    Which::Minus => t.mu_minus.clone(),
                    Which::Zero => t.mu_zero.clone(),
                    Which::Plus => t.mu_plus.clone(),
                }
            }
        })
    }
}

fn default_initial() -> Vec<InitialCondition> {
    vec![InitialCondition::Gaussian { mean: 0.5, var: 0.3 }]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepOptions {
    pub means: Vec<f64>,
    pub vars: Vec<f64>,
    /// Positive and decreasing; empty skips the boundary probe.
    pub etas: Vec<f64>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            means: vec![-1.0, -0.5, 0.0, 0.5, 1.0],
            vars: vec![0.2, 0.35, 0.5],
            etas: vec![0.4, 0.2, 0.05],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertificateOptions {
    pub anchor: InitialCondition,
    pub perturbations: usize,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        Self {
            anchor: InitialCondition::Tilted { mean: -0.3 },
            perturbations: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParticleOptions {
    pub sizes: Vec<usize>,
    pub replicas: usize,
    pub t_end: f64,
    pub dt: f64,
    pub initial: InitialCondition,
}

impl Default for ParticleOptions {
    fn default() -> Self {
        Self {
            sizes: vec![100, 1000, 10_000],
            replicas: 10,
            t_end: 2.0,
            dt: 1e-3,
            initial: InitialCondition::Gaussian { mean: 0.3, var: 0.5 },
        }
    }
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every precondition that does not need a computation.
    pub fn validate(&self) -> CliResult<()> {
        self.spec()?;
        self.grid()?;
        self.flow.validate().map_err(|e| CliError::config(e.to_string()))?;
        if self.check.samples < 3 || !(self.check.tol > 0.0) {
            return Err(CliError::config("check: samples must be >= 3 and tol > 0"));
        }
        if self.hbar.points < 3 || !(self.hbar.range > 0.0) {
            return Err(CliError::config("hbar: points must be >= 3 and range > 0"));
        }
        if self.particles.sizes.is_empty() || self.particles.replicas == 0 {
            return Err(CliError::config("particles: sizes and replicas must be nonempty"));
        }
        if !(self.particles.dt > 0.0) || !(self.particles.t_end >= 0.0) {
            return Err(CliError::config("particles: dt must be > 0 and t_end >= 0"));
        }
        Ok(())
    }

    pub fn spec(&self) -> CliResult<PotentialSpec> {
        let l = self.grid.half_width;
        let spec = match &self.potential {
            PotentialConfig::Quartic { a, b } => make_quartic(*a, *b, self.j, l),
            PotentialConfig::EvenPolynomial {
                coeffs,
                eps_growth,
                c_growth,
                growth_offset,
            } => PotentialSpec::new(
                Arc::new(EvenPolynomial::new(coeffs.clone())),
                self.j,
                *eps_growth,
                *c_growth,
                *growth_offset,
                l,
            ),
        };
        spec.map_err(|e| CliError::config(e.to_string()))
    }

    pub fn grid(&self) -> CliResult<Grid> {
        Grid::new(self.grid.half_width, self.grid.n).map_err(|e| CliError::config(e.to_string()))
    }

    pub fn require_seed(&self, command: &str) -> CliResult<u64> {
        self.seed
            .ok_or_else(|| CliError::config(format!("`{command}` is stochastic and needs a `seed`")))
    }
}
