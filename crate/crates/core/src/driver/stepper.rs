//! Coupled time loop: per stage a Poisson solve, the Slotboom weights, the
//! weighted projection, the limiter and the NP update.

use std::sync::atomic::{AtomicBool, Ordering};

use crate::driver::diagnostics::{free_energy, min_cell_average, total_mass, DiagnosticsRecord};
use crate::driver::problem::{CflMode, ProblemSpec, RkOrder, SimConfig};
use crate::error::{Error, Result};
use crate::field::{l1_error_with_rule, project_l2, Field, FieldRole};
use crate::poisson::{LoadSpec, PoissonOperator, ScalarFn};
use crate::quadrature::QuadRule;
use crate::positivity::{
    build_test_set, cfl_mu0, mesh_ratio, np_rhs, scaling_limiter, weighted_projection, Source, WeightField,
};
use crate::positivity::limiter::global_test_set_min;
use crate::space::DgSpace;

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub step: usize,
    pub t: f64,
    pub densities: Vec<Field>,
    /// Potential solved from `densities` at time `t`.
    pub psi: Field,
}

/// What one stage saw before it advanced the densities.
#[derive(Debug, Clone, PartialEq)]
pub struct StageInfo {
    pub min_g_pre: Vec<f64>,
    pub min_g_post: Vec<f64>,
    pub limited: usize,
    pub mu0: f64,
}

impl StageInfo {
    fn merge(&mut self, o: &StageInfo) {
        let m = |a: &mut Vec<f64>, b: &[f64]| a.iter_mut().zip(b).for_each(|(x, &y)| *x = nan_min(*x, y));
        m(&mut self.min_g_pre, &o.min_g_pre);
        m(&mut self.min_g_post, &o.min_g_post);
        self.limited += o.limited;
        self.mu0 = nan_min(self.mu0, o.mu0);
    }
}

fn nan_min(a: f64, b: f64) -> f64 {
    if a.is_nan() {
        b
    } else if b.is_nan() {
        a
    } else {
        a.min(b)
    }
}

/// Per-species data of a prepared stage.
pub struct Prepared {
    pub weights: Vec<WeightField>,
    /// Limited `g` (unlimited when the limiter is off).
    pub g: Vec<Field>,
    pub info: StageInfo,
}

/// `l1` errors against the exact solutions that the problem provides.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub t: f64,
    pub density: Vec<Option<f64>>,
    pub potential: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub state: State,
    pub diagnostics: Vec<DiagnosticsRecord>,
    pub errors: ErrorReport,
    /// Whether the entropy floor was used in some recorded energy.
    pub entropy_clipped: bool,
}

pub struct Solver {
    problem: ProblemSpec,
    config: SimConfig,
    space: DgSpace,
    poisson: PoissonOperator,
    load: LoadSpec,
    cfl_warned: AtomicBool,
}

/// Points per direction of the rule used for error norms.
pub const ERROR_RULE_POINTS: usize = 8;

/// Halvings allowed per step in adaptive CFL mode.
const MAX_HALVINGS: usize = 40;

impl Solver {
    /// Validates the inputs and assembles and factorizes the Poisson
    /// operator once.
    pub fn new(problem: ProblemSpec, config: SimConfig) -> Result<Self> {
        problem.validate()?;
        config.validate()?;
        let space = DgSpace::new(problem.mesh.clone());
        let poisson = PoissonOperator::assemble(&space, problem.poisson_params, &problem.poisson_bc)?;
        let mut load = LoadSpec::new(problem.charges());
        load.rho0 = problem.rho0.clone();
        load.source = problem.poisson_source.clone();
        Ok(Self { problem, config, space, poisson, load, cfl_warned: AtomicBool::new(false) })
    }

    pub fn space(&self) -> &DgSpace {
        &self.space
    }

    pub fn problem(&self) -> &ProblemSpec {
        &self.problem
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn poisson(&self) -> &PoissonOperator {
        &self.poisson
    }

    pub fn solve_potential(&self, densities: &[Field], t: f64) -> Result<Field> {
        let refs: Vec<&Field> = densities.iter().collect();
        self.poisson.solve_for(&self.space, &refs, &self.load, t)
    }

    /// `L2` projection of the initial data and the matching potential.
    pub fn init(&self) -> Result<State> {
        let pts: Vec<_> = (0..self.space.num_cells())
            .flat_map(|k| self.space.vol_points().iter().map(move |&xi| (k, xi)))
            .map(|(k, xi)| self.space.mesh().to_physical(k, xi))
            .collect();
        for i in self.problem.negative_initial_data(&pts) {
            log::warn!("initial density of species '{}' is negative at a quadrature node", self.problem.species[i].name);
        }
        let densities: Vec<Field> = self
            .problem
            .species
            .iter()
            .map(|s| project_l2(&self.space, |x| (s.initial)(0.0, x), FieldRole::Density))
            .collect();
        self.state_from(densities, 0.0)
    }

    /// State at time `t` with the potential solved from `densities`.
    pub fn state_from(&self, densities: Vec<Field>, t: f64) -> Result<State> {
        let psi = self.solve_potential(&densities, t)?;
        Ok(State { step: 0, t, densities, psi })
    }

    /// Weights, weighted projection, test sets, limiter and CFL bound for
    /// densities `c` with potential `psi`.
    pub fn prepare(&self, c: &[Field], psi: &Field) -> Result<Prepared> {
        let n = c.len();
        let beta1 = self.problem.np_params.beta1;
        let mut info = StageInfo { min_g_pre: vec![f64::NAN; n], min_g_post: vec![f64::NAN; n], limited: 0, mu0: f64::NAN };
        let mut weights = Vec::with_capacity(n);
        let mut gs = Vec::with_capacity(n);
        for (i, (ci, spec)) in c.iter().zip(&self.problem.species).enumerate() {
            let m = WeightField::build(&self.space, psi, spec.charge)?;
            let g = weighted_projection(&self.space, ci, &m)?;
            let ts = match build_test_set(&self.space, &m, beta1) {
                Ok(ts) => Some(ts),
                Err(e) if !self.config.limiter && e.is_numerical_fatal() => {
                    log::debug!("no test set for species {i}: {e}");
                    None
                }
                Err(e) => return Err(e),
            };
            let g = match &ts {
                Some(ts) if self.config.limiter => {
                    let (out, rep) = scaling_limiter(&self.space, &g, &m, ts, i)?;
                    info.min_g_pre[i] = rep.worst_pre_min;
                    info.min_g_post[i] = rep.post_min;
                    info.limited += rep.limited;
                    out
                }
                Some(ts) => {
                    let v = global_test_set_min(&self.space, &g, ts);
                    info.min_g_pre[i] = v;
                    info.min_g_post[i] = v;
                    g
                }
                None => g,
            };
            if let (Some(ts), false) = (&ts, self.problem.override_admissibility) {
                let rep = cfl_mu0(&self.space, &m, ts, &self.problem.np_params)?;
                info.mu0 = nan_min(info.mu0, rep.mu0);
            }
            weights.push(m);
            gs.push(g);
        }
        Ok(Prepared { weights, g: gs, info })
    }

    /// `dc/dt` per species at time `t`.
    pub fn rhs(&self, prep: &Prepared, t: f64) -> Vec<Field> {
        prep.g
            .iter()
            .zip(&prep.weights)
            .zip(&self.problem.species)
            .map(|((g, m), s)| {
                let src = s.source.as_ref().map(|f| Source { f, t });
                np_rhs(&self.space, g, m, &self.problem.np_params, src)
            })
            .collect()
    }

    /// `Ok(false)` asks the caller to retry with a smaller step.
    fn cfl_ok(&self, dt: f64, mu0: f64) -> Result<bool> {
        if mu0.is_nan() {
            return Ok(true);
        }
        let mu = mesh_ratio(&self.space, dt);
        match self.config.cfl {
            CflMode::Monitor => {
                if mu > mu0 && !self.cfl_warned.swap(true, Ordering::Relaxed) {
                    log::warn!("mesh ratio {mu:e} exceeds the positivity bound {mu0:e}");
                }
                Ok(true)
            }
            CflMode::Strict if mu > mu0 => Err(Error::CflViolation { mu, mu0 }),
            CflMode::Strict => Ok(true),
            CflMode::Adaptive => Ok(mu <= 0.9 * mu0),
        }
    }

    fn euler(&self, c: &[Field], psi: &Field, t: f64, dt: f64) -> Result<Option<(Vec<Field>, StageInfo)>> {
        let prep = self.prepare(c, psi)?;
        if !self.cfl_ok(dt, prep.info.mu0)? {
            return Ok(None);
        }
        let rhs = self.rhs(&prep, t);
        let out = c
            .iter()
            .zip(&rhs)
            .map(|(ci, ri)| {
                let mut u = ci.clone();
                u.axpy(dt, ri);
                u.with_role(FieldRole::Density)
            })
            .collect();
        Ok(Some((out, prep.info)))
    }

    fn try_step(&self, s: &State, dt: f64) -> Result<Option<(State, StageInfo)>> {
        let Some((u1, mut info)) = self.euler(&s.densities, &s.psi, s.t, dt)? else {
            return Ok(None);
        };
        let t1 = s.t + dt;
        let next = match self.config.rk {
            RkOrder::Euler => u1,
            RkOrder::Ssp2 => {
                let psi1 = self.solve_potential(&u1, t1)?;
                let Some((u2, i2)) = self.euler(&u1, &psi1, t1, dt)? else {
                    return Ok(None);
                };
                info.merge(&i2);
                s.densities
                    .iter()
                    .zip(u2)
                    .map(|(c, mut u)| {
                        u.scale(0.5);
                        u.axpy(0.5, c);
                        u
                    })
                    .collect()
            }
        };
        let psi = self.solve_potential(&next, t1)?;
        Ok(Some((State { step: s.step + 1, t: t1, densities: next, psi }, info)))
    }

    /// One step of at most `dt`; returns the new state, the step actually
    /// taken and the stage information.
    pub fn step(&self, s: &State, dt: f64) -> Result<(State, f64, StageInfo)> {
        let mut dt = dt;
        for _ in 0..=MAX_HALVINGS {
            if let Some((next, info)) = self.try_step(s, dt)? {
                return Ok((next, dt, info));
            }
            dt *= 0.5;
            log::debug!("step {}: halving to dt = {dt:e}", s.step);
        }
        Err(Error::CflViolation { mu: mesh_ratio(&self.space, dt), mu0: 0.0 })
    }

    pub fn record(&self, s: &State, info: &StageInfo) -> (DiagnosticsRecord, bool) {
        let charges = self.problem.charges();
        let (energy, clipped) =
            free_energy(&self.space, &s.densities, &charges, &s.psi, self.problem.rho0.as_ref(), s.t);
        let rec = DiagnosticsRecord {
            step: s.step,
            t: s.t,
            mass: s.densities.iter().map(|c| total_mass(&self.space, c)).collect(),
            energy,
            min_avg: s.densities.iter().map(min_cell_average).collect(),
            min_g_pre: info.min_g_pre.clone(),
            min_g_post: info.min_g_post.clone(),
            limited: info.limited,
            mu0: info.mu0,
        };
        (rec, clipped)
    }

    /// Errors use an 8-point rule per direction: the volume rule sits close
    /// to the zeros of the leading error term and underestimates `|e|`.
    pub fn errors(&self, s: &State) -> ErrorReport {
        let rule = QuadRule::gauss(ERROR_RULE_POINTS).expect("supported rule");
        let l1 = |c: &Field, f: &ScalarFn| l1_error_with_rule(&self.space, &rule, c, |x| f(s.t, x));
        let density = self
            .problem
            .species
            .iter()
            .zip(&s.densities)
            .map(|(spec, c)| spec.exact.as_ref().map(|f| l1(c, f)))
            .collect();
        let potential = self.problem.exact_potential.as_ref().map(|f| l1(&s.psi, f));
        ErrorReport { t: s.t, density, potential }
    }

    /// Advance from `state` to the configured final time.
    pub fn run_from(&self, state: State) -> Result<RunOutput> {
        let t_end = self.config.t_end;
        let dt0 = self.config.dt(self.space.mesh());
        let mut state = state;
        let prep = self.prepare(&state.densities, &state.psi)?;
        let (rec, mut clipped) = self.record(&state, &prep.info);
        let mut diagnostics = vec![rec];
        let eps = 1e-12 * t_end.abs().max(1.0);
        let mut n = 0usize;
        while state.t < t_end - eps {
            let remaining = t_end - state.t;
            let last_try = remaining <= dt0 + eps;
            let (mut next, taken, info) = self.step(&state, if last_try { remaining } else { dt0 })?;
            if last_try && taken == remaining {
                next.t = t_end;
            }
            state = next;
            n += 1;
            let done = state.t >= t_end - eps;
            if done || (self.config.cadence > 0 && n % self.config.cadence == 0) {
                let (rec, c) = self.record(&state, &info);
                clipped |= c;
                diagnostics.push(rec);
            }
        }
        if clipped {
            log::info!("entropy term used the floor {:e}", crate::driver::diagnostics::ENTROPY_FLOOR);
        }
        let errors = self.errors(&state);
        Ok(RunOutput { state, diagnostics, errors, entropy_clipped: clipped })
    }

    pub fn run(&self) -> Result<RunOutput> {
        let s = self.init()?;
        self.run_from(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::benchmarks::{example1, example2, neutral};
    use crate::driver::problem::TimeStep;

    #[test]
    fn zero_final_time_gives_one_record() {
        let s = Solver::new(example2(5).unwrap(), SimConfig::new(TimeStep::MeshRatio(0.01), 0.0)).unwrap();
        let out = s.run().unwrap();
        assert_eq!(out.diagnostics.len(), 1);
        assert_eq!(out.state.t, 0.0);
    }

    #[test]
    fn example2_initial_masses() {
        let s = Solver::new(example2(10).unwrap(), SimConfig::new(TimeStep::MeshRatio(0.01), 0.0)).unwrap();
        let st = s.init().unwrap();
        for c in &st.densities {
            assert!((total_mass(s.space(), c) - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn neutral_state_is_fixed() {
        for dim in [1, 2] {
            let p = neutral(dim, 4, 2.0).unwrap();
            let s = Solver::new(p, SimConfig::new(TimeStep::MeshRatio(1.0), 1.0)).unwrap();
            let st = s.init().unwrap();
            let (next, _, _) = s.step(&st, 0.01).unwrap();
            for (a, b) in st.densities.iter().zip(&next.densities) {
                assert!(a.max_abs_diff(b) <= 1e-13);
            }
            assert!(next.psi.coeffs().iter().all(|v| v.abs() < 1e-13));
        }
    }

    #[test]
    fn last_step_is_truncated() {
        let mut cfg = SimConfig::new(TimeStep::Fixed(3e-4), 1e-3);
        cfg.cadence = 2;
        let s = Solver::new(example1(5).unwrap(), cfg).unwrap();
        let out = s.run().unwrap();
        assert_eq!(out.state.t, 1e-3);
        assert_eq!(out.state.step, 4);
        let times: Vec<f64> = out.diagnostics.iter().map(|r| r.t).collect();
        assert_eq!(times.len(), 3);
        assert!(times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn strict_mode_rejects_large_steps() {
        let mut cfg = SimConfig::new(TimeStep::MeshRatio(5.0), 0.1);
        cfg.cfl = CflMode::Strict;
        let s = Solver::new(example2(5).unwrap(), cfg).unwrap();
        assert!(matches!(s.run(), Err(Error::CflViolation { .. })));
    }

    #[test]
    fn adaptive_mode_halves_the_step() {
        let mut cfg = SimConfig::new(TimeStep::MeshRatio(5.0), 0.04);
        cfg.cfl = CflMode::Adaptive;
        let s = Solver::new(example2(5).unwrap(), cfg).unwrap();
        let st = s.init().unwrap();
        let (_, taken, info) = s.step(&st, 0.2).unwrap();
        assert!(taken < 0.2);
        assert!(mesh_ratio(s.space(), taken) <= 0.9 * info.mu0);
    }
}
