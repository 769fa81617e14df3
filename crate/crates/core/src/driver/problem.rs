//! Problem data and run configuration.

use std::fmt;

use crate::error::{Error, Result};
use crate::flux::FluxParams;
use crate::mesh::{Mesh, Point};
use crate::poisson::{PoissonBc, ScalarFn};

#[derive(Clone)]
pub struct SpeciesSpec {
    pub name: String,
    pub charge: f64,
    /// Initial density; the time argument is ignored.
    pub initial: ScalarFn,
    pub source: Option<ScalarFn>,
    pub exact: Option<ScalarFn>,
    pub steady_amplitude: Option<f64>,
}

impl SpeciesSpec {
    pub fn new(name: impl Into<String>, charge: f64, initial: ScalarFn) -> Self {
        Self { name: name.into(), charge, initial, source: None, exact: None, steady_amplitude: None }
    }

    pub fn with_source(mut self, f: ScalarFn) -> Self {
        self.source = Some(f);
        self
    }

    pub fn with_exact(mut self, f: ScalarFn) -> Self {
        self.exact = Some(f);
        self
    }
}

impl fmt::Debug for SpeciesSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpeciesSpec")
            .field("name", &self.name)
            .field("charge", &self.charge)
            .field("source", &self.source.is_some())
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub mesh: Mesh,
    pub species: Vec<SpeciesSpec>,
    pub rho0: Option<ScalarFn>,
    pub poisson_bc: PoissonBc,
    pub np_params: FluxParams,
    pub poisson_params: FluxParams,
    /// Extra Poisson source, used by manufactured solutions.
    pub poisson_source: Option<ScalarFn>,
    pub exact_potential: Option<ScalarFn>,
    /// Run NP flux parameters outside the range where positivity is proven.
    pub override_admissibility: bool,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("mesh", &self.mesh)
            .field("species", &self.species)
            .field("poisson_bc", &self.poisson_bc)
            .field("np_params", &self.np_params)
            .field("poisson_params", &self.poisson_params)
            .field("override_admissibility", &self.override_admissibility)
            .finish()
    }
}

impl ProblemSpec {
    pub fn charges(&self) -> Vec<f64> {
        self.species.iter().map(|s| s.charge).collect()
    }

    pub fn with_np_params(mut self, p: FluxParams) -> Self {
        self.np_params = p;
        self
    }

    pub fn with_poisson_params(mut self, p: FluxParams) -> Self {
        self.poisson_params = p;
        self
    }

    pub fn with_override(mut self, on: bool) -> Self {
        self.override_admissibility = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.species.is_empty() {
            return Err(Error::InvalidProblem("no species".into()));
        }
        if !self.override_admissibility {
            self.np_params.check_positivity_range()?;
        } else if !self.np_params.in_positivity_range() {
            log::warn!(
                "expert override: NP flux ({}, {}) is outside the proven range, positivity guarantees are void",
                self.np_params.beta0,
                self.np_params.beta1
            );
        }
        Ok(())
    }

    /// Species whose initial data is negative at some point of `points`.
    pub fn negative_initial_data(&self, points: &[Point]) -> Vec<usize> {
        self.species
            .iter()
            .enumerate()
            .filter(|(_, s)| points.iter().any(|&x| (s.initial)(0.0, x) < 0.0))
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStep {
    Fixed(f64),
    /// `dt = mu h^2` with `h` the smallest cell size.
    MeshRatio(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RkOrder {
    Euler,
    Ssp2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CflMode {
    /// Compute the bound and warn when it is exceeded.
    #[default]
    Monitor,
    /// Fail when the bound is exceeded.
    Strict,
    /// Halve the step until the bound holds.
    Adaptive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub step: TimeStep,
    pub t_end: f64,
    pub rk: RkOrder,
    pub limiter: bool,
    pub cfl: CflMode,
    /// Record diagnostics every this many steps (the last step is always
    /// recorded). Zero records only the endpoints.
    pub cadence: usize,
}

impl SimConfig {
    pub fn new(step: TimeStep, t_end: f64) -> Self {
        Self { step, t_end, rk: RkOrder::Ssp2, limiter: true, cfl: CflMode::Monitor, cadence: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        let dt_ok = match self.step {
            TimeStep::Fixed(v) | TimeStep::MeshRatio(v) => v > 0.0 && v.is_finite(),
        };
        if !dt_ok {
            return Err(Error::InvalidProblem("time step must be positive".into()));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidProblem("final time must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn dt(&self, mesh: &Mesh) -> f64 {
        match self.step {
            TimeStep::Fixed(dt) => dt,
            TimeStep::MeshRatio(mu) => {
                let h = (0..mesh.dim()).map(|a| mesh.h(a)).fold(f64::INFINITY, f64::min);
                mu * h * h
            }
        }
    }
}
