//! Simulation backends behind one trait, looked up by name at runtime.

use serde::Serialize;

use crate::coin::WalkParams;
use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::evolution::{evolve, pure_qw_reference, ArcAmplitudes, DEFAULT_EXACT_CAP};
use crate::linalg::{ONE, ZERO};
use crate::trajectory::{mc_distribution, McConfig};

pub const DEFAULT_N_TRAJ: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EngineOptions {
    pub n_traj: usize,
    pub seed: u64,
    /// Largest `t` the exact engine accepts.
    pub exact_cap: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            n_traj: DEFAULT_N_TRAJ,
            seed: 0,
            exact_cap: DEFAULT_EXACT_CAP,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EngineOutput {
    pub engine: &'static str,
    pub dist: Distribution,
    /// Position-wise standard errors, for stochastic engines.
    pub stderr: Option<Vec<f64>>,
}

pub trait Engine: Send + Sync {
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str;

    fn run(&self, params: &WalkParams, t: usize, opts: &EngineOptions) -> Result<EngineOutput>;
}

/// Block density operator evolution; `O(t²)` memory.
pub struct ExactEngine;

impl Engine for ExactEngine {
    fn name(&self) -> &'static str {
        "exact"
    }

    fn description(&self) -> &'static str {
        "exact density-operator evolution under L_p"
    }

    fn run(&self, params: &WalkParams, t: usize, opts: &EngineOptions) -> Result<EngineOutput> {
        if t > opts.exact_cap {
            return Err(Error::ExactCapExceeded {
                t,
                cap: opts.exact_cap,
            });
        }
        Ok(EngineOutput {
            engine: self.name(),
            dist: evolve(params, t)?,
            stderr: None,
        })
    }
}

/// Pure-state trajectory unraveling; `O(t)` memory per worker.
pub struct MonteCarloEngine;

impl Engine for MonteCarloEngine {
    fn name(&self) -> &'static str {
        "mc"
    }

    fn description(&self) -> &'static str {
        "Monte-Carlo trajectory unraveling"
    }

    fn run(&self, params: &WalkParams, t: usize, opts: &EngineOptions) -> Result<EngineOutput> {
        let est = mc_distribution(params, &McConfig::new(opts.n_traj, opts.seed, t)?)?;
        Ok(EngineOutput {
            engine: self.name(),
            dist: est.dist,
            stderr: Some(est.stderr),
        })
    }
}

/// `p = 0` only: the two chirality starts evolved unitarily and averaged.
pub struct PureQuantumEngine;

impl Engine for PureQuantumEngine {
    fn name(&self) -> &'static str {
        "qw-pure"
    }

    fn description(&self) -> &'static str {
        "unitary quantum walk (p = 0 only)"
    }

    fn run(&self, params: &WalkParams, t: usize, _opts: &EngineOptions) -> Result<EngineOutput> {
        if params.p() != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "engine qw-pure needs p = 0, got {}",
                params.p()
            )));
        }
        let left = pure_qw_reference(&params.coin, t, ArcAmplitudes::new(ONE, ZERO))?;
        let right = pure_qw_reference(&params.coin, t, ArcAmplitudes::new(ZERO, ONE))?;
        let probs = left
            .probs()
            .iter()
            .zip(right.probs())
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        Ok(EngineOutput {
            engine: self.name(),
            dist: Distribution::new(t, probs)?,
            stderr: None,
        })
    }
}

pub struct EngineRegistry {
    engines: Vec<Box<dyn Engine>>,
}

impl Default for EngineRegistry {
    fn default() -> Self {
        Self::with_defaults()
    }
}

impl EngineRegistry {
    pub fn empty() -> Self {
        EngineRegistry {
            engines: Vec::new(),
        }
    }

    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(ExactEngine));
        r.register(Box::new(MonteCarloEngine));
        r.register(Box::new(PureQuantumEngine));
        r
    }

    /// Later registrations shadow earlier ones of the same name.
    pub fn register(&mut self, engine: Box<dyn Engine>) {
        self.engines.retain(|e| e.name() != engine.name());
        self.engines.push(engine);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.engines.iter().map(|e| e.name()).collect()
    }

    pub fn get(&self, name: &str) -> Result<&dyn Engine> {
        self.engines
            .iter()
            .find(|e| e.name() == name)
            .map(|e| e.as_ref())
            .ok_or_else(|| Error::UnknownEngine {
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    /// `"auto"` picks `exact` up to the cap and `mc` beyond it.
    pub fn resolve(&self, name: &str, t: usize, opts: &EngineOptions) -> Result<&dyn Engine> {
        match name {
            "auto" if t <= opts.exact_cap => self.get("exact"),
            "auto" => self.get("mc"),
            other => self.get(other),
        }
    }

    pub fn run(
        &self,
        name: &str,
        params: &WalkParams,
        t: usize,
        opts: &EngineOptions,
    ) -> Result<EngineOutput> {
        self.resolve(name, t, opts)?.run(params, t, opts)
    }
}
