//! Run configuration: a TOML file with optional sections, resolved against
//! per-benchmark defaults.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::ValueEnum;
use pnp_ddg::driver::benchmarks::{BenchmarkId, Ex3Case, EXAMPLE3_MESH_RATIO};
use pnp_ddg::driver::{CflMode, RkOrder, SimConfig, TimeStep};
use pnp_ddg::FluxParams;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("benchmark id required (one of {})", BENCHMARK_IDS.join(", "))]
    MissingBenchmark,
    #[error("{0}")]
    Invalid(String),
}

const BENCHMARK_IDS: [&str; 9] = [
    "example1",
    "example2",
    "example3-1",
    "example3-2",
    "example3-3",
    "example3-4",
    "example3-4b",
    "example3-4c",
    "example4",
];

/// Benchmark id as it appears in the file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Benchmark(pub BenchmarkId);

impl TryFrom<String> for Benchmark {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        if s == "custom" {
            return Err("custom problems are built through the library API; the CLI runs built-in benchmarks".into());
        }
        BenchmarkId::from_str(&s)
            .map(Benchmark)
            .map_err(|_| format!("unknown benchmark '{s}', expected one of {} or neutral", BENCHMARK_IDS.join(", ")))
    }
}

impl From<Benchmark> for String {
    fn from(b: Benchmark) -> String {
        b.0.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CflChoice {
    Monitor,
    Strict,
    Adaptive,
}

impl From<CflChoice> for CflMode {
    fn from(c: CflChoice) -> CflMode {
        match c {
            CflChoice::Monitor => CflMode::Monitor,
            CflChoice::Strict => CflMode::Strict,
            CflChoice::Adaptive => CflMode::Adaptive,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub benchmark: Option<Benchmark>,
    #[serde(default)]
    pub mesh: MeshSection,
    /// Flux pair of the Nernst-Planck equations.
    #[serde(default)]
    pub np: ParamsSection,
    #[serde(default)]
    pub poisson: ParamsSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub steady: SteadySection,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    /// Cells per direction, one entry per mesh.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Mesh ratio `dt / h^2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rk: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limiter: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfl: Option<CflChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub override_admissibility: Option<bool>,
    /// Diagnostics every this many steps; 0 keeps only the endpoints.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cadence: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteadySection {
    /// Time to run before the steady state is rebuilt from the potential.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub settle_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// Relative amplitude of a mass-free cosine added to every species.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<f64>,
}

/// Command-line settings that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub override_admissibility: bool,
    pub cfl: Option<CflChoice>,
    pub rk: Option<u8>,
    pub no_limiter: bool,
}

/// A configuration with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub benchmark: BenchmarkId,
    pub sizes: Vec<usize>,
    pub np: FluxParams,
    pub poisson: FluxParams,
    pub step: TimeStep,
    pub t_end: f64,
    pub rk: RkOrder,
    pub limiter: bool,
    pub cfl: CflMode,
    pub override_admissibility: bool,
    pub cadence: usize,
    pub out_dir: PathBuf,
    pub settle_time: f64,
    pub steady_steps: usize,
    pub perturbation: f64,
}

impl Resolved {
    pub fn sim_config(&self) -> SimConfig {
        let mut c = SimConfig::new(self.step, self.t_end);
        c.rk = self.rk;
        c.limiter = self.limiter;
        c.cfl = self.cfl;
        c.cadence = self.cadence;
        c
    }
}

impl fmt::Display for Resolved {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let step = match self.step {
            TimeStep::Fixed(dt) => format!("dt = {dt:e}"),
            TimeStep::MeshRatio(mu) => format!("dt/h^2 = {mu:e}"),
        };
        write!(
            f,
            "{} meshes {:?}, NP ({}, {}), Poisson ({}, {}), {step}, T = {}, {:?}, limiter {}",
            self.benchmark,
            self.sizes,
            self.np.beta0,
            self.np.beta1,
            self.poisson.beta0,
            self.poisson.beta1,
            self.t_end,
            self.rk,
            if self.limiter { "on" } else { "off" }
        )
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    Ok(toml::from_str(text)?)
}

pub fn to_toml(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("config fields are all representable in TOML")
}

struct Defaults {
    sizes: &'static [usize],
    step: TimeStep,
    t_end: f64,
    settle_time: f64,
}

fn defaults(id: BenchmarkId) -> Defaults {
    let d = |sizes, step, t_end| Defaults { sizes, step, t_end, settle_time: 0.0 };
    match id {
        BenchmarkId::Example1 => d(&[5, 10, 20, 40], TimeStep::MeshRatio(0.01), 0.01),
        BenchmarkId::Example2 => Defaults { settle_time: 1.0, ..d(&[20], TimeStep::MeshRatio(0.01), 0.5) },
        BenchmarkId::Example3(c) => {
            let t = if matches!(c, Ex3Case::C4a | Ex3Case::C4b | Ex3Case::C4c) { 0.01 } else { 0.001 };
            d(&[10, 20], TimeStep::MeshRatio(EXAMPLE3_MESH_RATIO), t)
        }
        BenchmarkId::Example4 => d(&[20], TimeStep::Fixed(1e-5), 0.1),
        BenchmarkId::Neutral => d(&[10], TimeStep::MeshRatio(0.004), 0.1),
    }
}

impl RunConfig {
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(out) = &o.out {
            self.output.dir = Some(out.clone());
        }
        if o.override_admissibility {
            self.solver.override_admissibility = Some(true);
        }
        if let Some(c) = o.cfl {
            self.solver.cfl = Some(c);
        }
        if let Some(rk) = o.rk {
            self.time.rk = Some(rk);
        }
        if o.no_limiter {
            self.solver.limiter = Some(false);
        }
    }

    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        let id = self.benchmark.ok_or(ConfigError::MissingBenchmark)?.0;
        let d = defaults(id);
        let (np0, poisson0) = id.default_params();
        let np = FluxParams::new(self.np.beta0.unwrap_or(np0.beta0), self.np.beta1.unwrap_or(np0.beta1));
        let poisson =
            FluxParams::new(self.poisson.beta0.unwrap_or(poisson0.beta0), self.poisson.beta1.unwrap_or(poisson0.beta1));
        let override_admissibility = self.solver.override_admissibility.unwrap_or(false);
        if !override_admissibility {
            if let Err(e) = np.check_positivity_range() {
                return invalid(format!("[np] {e}; pass --override-admissibility to run it anyway"));
            }
        }
        if !(poisson.beta0 > 0.0 && poisson.beta0.is_finite() && poisson.beta1.is_finite()) {
            return invalid(format!("[poisson] beta0 must be positive, got {}", poisson.beta0));
        }
        let sizes = self.mesh.sizes.clone().unwrap_or_else(|| d.sizes.to_vec());
        if sizes.is_empty() || sizes.contains(&0) {
            return invalid(format!("[mesh] sizes must be nonempty and positive, got {sizes:?}"));
        }
        let step = match (self.time.dt, self.time.mu) {
            (Some(_), Some(_)) => return invalid("[time] give dt or mu, not both".into()),
            (Some(dt), None) => TimeStep::Fixed(dt),
            (None, Some(mu)) => TimeStep::MeshRatio(mu),
            (None, None) => d.step,
        };
        let t_end = self.time.t_end.unwrap_or(d.t_end);
        let rk = match self.time.rk.unwrap_or(2) {
            1 => RkOrder::Euler,
            2 => RkOrder::Ssp2,
            other => return invalid(format!("[time] rk must be 1 or 2, got {other}")),
        };
        let r = Resolved {
            benchmark: id,
            sizes,
            np,
            poisson,
            step,
            t_end,
            rk,
            limiter: self.solver.limiter.unwrap_or(true),
            cfl: self.solver.cfl.unwrap_or(CflChoice::Monitor).into(),
            override_admissibility,
            cadence: self.solver.cadence.unwrap_or(1),
            out_dir: self.output.dir.clone().unwrap_or_else(|| PathBuf::from("out")),
            settle_time: self.steady.settle_time.unwrap_or(d.settle_time),
            steady_steps: self.steady.steps.unwrap_or(100),
            perturbation: self.steady.perturbation.unwrap_or(0.0),
        };
        r.sim_config().validate().map_err(|e| ConfigError::Invalid(format!("[time] {e}")))?;
        if !(r.settle_time >= 0.0 && r.settle_time.is_finite()) {
            return invalid(format!("[steady] settle_time must be nonnegative, got {}", r.settle_time));
        }
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn resolve(text: &str) -> Result<Resolved, ConfigError> {
        parse_config(text)?.resolve()
    }

    #[test]
    fn minimal_example1_defaults() {
        let r = resolve("benchmark = \"example1\"\n").unwrap();
        assert_eq!(r.np, FluxParams::new(4.0, 1.0 / 6.0));
        assert_eq!(r.step, TimeStep::MeshRatio(0.01));
        assert_eq!(r.sizes, vec![5, 10, 20, 40]);
        assert_eq!(r.rk, RkOrder::Ssp2);
        assert!(r.limiter);
    }

    #[test]
    fn small_beta1_needs_override() {
        let text = "benchmark = \"example1\"\n[np]\nbeta1 = 0.04\n";
        let e = resolve(text).unwrap_err().to_string();
        assert!(e.contains("[1/8, 1/4]"), "{e}");
        let mut cfg = parse_config(text).unwrap();
        cfg.apply(&Overrides { override_admissibility: true, ..Default::default() });
        assert_eq!(cfg.resolve().unwrap().np.beta1, 0.04);
    }

    #[test]
    fn empty_file_needs_benchmark() {
        let e = resolve("").unwrap_err();
        assert!(matches!(e, ConfigError::MissingBenchmark));
        assert!(e.to_string().starts_with("benchmark id required"));
    }

    #[test]
    fn unknown_key_reports_line() {
        let e = resolve("benchmark = \"example2\"\n[time]\nt_end = 1.0\nsteps = 3\n").unwrap_err().to_string();
        assert!(e.contains("line 4"), "{e}");
        assert!(e.contains("steps"), "{e}");
    }

    #[test]
    fn type_mismatch_reports_line() {
        let e = resolve("benchmark = \"example2\"\n\n[np]\nbeta0 = \"four\"\n").unwrap_err().to_string();
        assert!(e.contains("line 4"), "{e}");
    }

    #[test]
    fn unknown_benchmark_and_custom() {
        let e = resolve("benchmark = \"example9\"").unwrap_err().to_string();
        assert!(e.contains("unknown benchmark") && e.contains("line 1"), "{e}");
        assert!(resolve("benchmark = \"custom\"").unwrap_err().to_string().contains("library API"));
    }

    #[test]
    fn rejects_dt_and_mu_together() {
        assert!(resolve("benchmark = \"example1\"\n[time]\ndt = 1e-4\nmu = 0.01\n").is_err());
        assert!(resolve("benchmark = \"example1\"\n[time]\nrk = 3\n").is_err());
        assert!(resolve("benchmark = \"example1\"\n[mesh]\nsizes = []\n").is_err());
    }

    #[test]
    fn overrides_win() {
        let mut cfg = parse_config("benchmark = \"example4\"\n[solver]\ncfl = \"monitor\"\n").unwrap();
        cfg.apply(&Overrides { cfl: Some(CflChoice::Strict), rk: Some(1), no_limiter: true, ..Default::default() });
        let r = cfg.resolve().unwrap();
        assert_eq!((r.cfl, r.rk, r.limiter), (CflMode::Strict, RkOrder::Euler, false));
        assert_eq!(r.step, TimeStep::Fixed(1e-5));
    }

    fn opt<T: std::fmt::Debug + Clone>(s: impl Strategy<Value = T>) -> impl Strategy<Value = Option<T>> {
        proptest::option::of(s)
    }

    fn arb_config() -> impl Strategy<Value = RunConfig> {
        let ids = prop::sample::select(vec![
            BenchmarkId::Example1,
            BenchmarkId::Example2,
            BenchmarkId::Example3(Ex3Case::C3),
            BenchmarkId::Example3(Ex3Case::C4c),
            BenchmarkId::Example4,
            BenchmarkId::Neutral,
        ]);
        let cfl = prop::sample::select(vec![CflChoice::Monitor, CflChoice::Strict, CflChoice::Adaptive]);
        (
            opt(ids),
            opt(prop::collection::vec(1usize..64, 0..5)),
            (opt(-1e3..1e3f64), opt(-1.0..1.0f64), opt(0.0..50.0f64), opt(0.0..1.0f64)),
            (opt(1e-9..1.0f64), opt(1e-9..1.0f64), opt(0.0..10.0f64), opt(0u8..4)),
            (opt(any::<bool>()), opt(cfl), opt(any::<bool>()), opt(0usize..1000)),
            (opt("[a-z][a-z0-9_/]{0,12}"), opt(0.0..5.0f64), opt(0usize..500), opt(-1.0..1.0f64)),
        )
            .prop_map(|(id, sizes, np, time, solver, rest)| RunConfig {
                benchmark: id.map(Benchmark),
                mesh: MeshSection { sizes },
                np: ParamsSection { beta0: np.0, beta1: np.1 },
                poisson: ParamsSection { beta0: np.2, beta1: np.3 },
                time: TimeSection { dt: time.0, mu: time.1, t_end: time.2, rk: time.3 },
                solver: SolverSection { limiter: solver.0, cfl: solver.1, override_admissibility: solver.2, cadence: solver.3 },
                output: OutputSection { dir: rest.0.map(PathBuf::from) },
                steady: SteadySection { settle_time: rest.1, steps: rest.2, perturbation: rest.3 },
            })
    }

    proptest! {
        #[test]
        fn serialize_parse_round_trip(cfg in arb_config()) {
            let text = to_toml(&cfg);
            prop_assert_eq!(parse_config(&text).unwrap(), cfg);
        }
    }
}
