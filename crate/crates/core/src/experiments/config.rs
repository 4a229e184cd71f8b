//! JSON run configuration.
//!
//! ```json
//! {
//!   "grid": {"n": 64, "dim": 2},
//!   "norm": {"s": 3, "p": 1, "q": 1, "homogeneous": false},
//!   "solver": {"T": 0.2, "dt": 0.001, "dealias": true},
//!   "experiment": {"kind": "bona-smith", "N_list": [3, 4, 5], "eps_list": [0.1, 0.01], "seed": 7,
//!                  "initial": {"kind": "random", "decay": 6.0}}
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DependenceConfig;
use crate::error::{arg, Error, Result};
use crate::euler::{taylor_green, SolverConfig};
use crate::field::io::read_field;
use crate::field::random::{random_vector, SpectrumSpec};
use crate::field::{Grid, VectorField};
use crate::norms::{Exponent, Flavor, NormSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    #[serde(default = "default_dim")]
    pub dim: usize,
}

fn default_dim() -> usize {
    2
}

impl GridConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.dim, self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormConfig {
    pub s: f64,
    pub p: Exponent,
    pub q: Exponent,
    #[serde(default)]
    pub homogeneous: bool,
}

impl NormConfig {
    pub fn spec(&self) -> Result<NormSpec> {
        let spec = NormSpec { s: self.s, p: self.p, q: self.q, homogeneous: self.homogeneous, flavor: Flavor::TriebelLizorkin };
        spec.validate()?;
        Ok(spec)
    }
}

/// Initial velocity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    TaylorGreen,
    /// Seeded divergence-free field with envelope `|k|^{−decay}` on
    /// `k_lo ≤ |k| ≤ k_hi` (default `k_hi` is the dealiasing cutoff), scaled
    /// to the given maximum speed.
    Random {
        #[serde(default = "default_decay")]
        decay: f64,
        #[serde(default = "default_k_lo")]
        k_lo: f64,
        #[serde(default)]
        k_hi: Option<f64>,
        #[serde(default = "default_speed")]
        max_speed: f64,
    },
    File {
        path: String,
    },
}

fn default_decay() -> f64 {
    4.0
}
fn default_k_lo() -> f64 {
    1.0
}
fn default_speed() -> f64 {
    1.0
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::Random { decay: default_decay(), k_lo: default_k_lo(), k_hi: None, max_speed: default_speed() }
    }
}

impl InitialData {
    pub fn build(&self, grid: Grid, seed: u64) -> Result<VectorField> {
        match self {
            InitialData::TaylorGreen => taylor_green(grid),
            InitialData::Random { decay, k_lo, k_hi, max_speed } => {
                let hi = k_hi.unwrap_or(grid.dealias_cutoff() as f64);
                let u = random_vector(grid, &SpectrumSpec::new(*decay, *k_lo, hi, seed))?;
                let m = u.max_magnitude();
                if m == 0.0 {
                    return arg("random initial data vanished");
                }
                Ok(u.scale(max_speed / m))
            }
            InitialData::File { path } => {
                let u = read_field(path)?.into_vector()?;
                if u.grid() != grid {
                    return arg(format!("field in {path} does not live on the configured grid"));
                }
                VectorField::new_div_free(u.into_components())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub kind: String,
    #[serde(rename = "N_list", default = "default_levels")]
    pub n_list: Vec<usize>,
    #[serde(default = "default_eps")]
    pub eps_list: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub initial: InitialData,
}

fn default_levels() -> Vec<usize> {
    vec![3, 4, 5]
}
fn default_eps() -> Vec<f64> {
    vec![1e-1, 1e-2, 1e-3, 1e-4]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub norm: NormConfig,
    pub solver: SolverConfig,
    pub experiment: ExperimentSection,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Argument(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.grid()?;
        self.dependence()?.validate()
    }

    pub fn dependence(&self) -> Result<DependenceConfig> {
        Ok(DependenceConfig {
            norm_spec: self.norm.spec()?,
            n_list: self.experiment.n_list.clone(),
            eps_list: self.experiment.eps_list.clone(),
            solver: self.solver,
            seed: self.experiment.seed,
        })
    }

    pub fn initial_data(&self) -> Result<VectorField> {
        self.experiment.initial.build(self.grid.grid()?, self.experiment.seed)
    }
}
