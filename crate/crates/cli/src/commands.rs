use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use log::{info, warn};
use pnp_ddg::driver::steady::{refit_steady, steady_check};
use pnp_ddg::driver::{RunOutput, Solver, State, ERROR_RULE_POINTS};
use pnp_ddg::field::{l1_distance_refined, project_l2};
use pnp_ddg::{FieldRole, QuadRule};

use crate::config::{ConfigError, Resolved};
use crate::output::{self, ErrorRow};

/// Refinement factor of the self-reference used when a benchmark has no
/// exact solution.
pub const REFERENCE_REFINEMENT: usize = 4;

fn solver(r: &Resolved, n: usize, t_end: f64) -> Result<Solver> {
    let p = r
        .benchmark
        .problem(n)?
        .with_np_params(r.np)
        .with_poisson_params(r.poisson)
        .with_override(r.override_admissibility);
    let mut cfg = r.sim_config();
    cfg.t_end = t_end;
    Ok(Solver::new(p, cfg)?)
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))
}

pub fn run(r: &Resolved, config_text: &str) -> Result<()> {
    let n = r.sizes[0];
    if r.sizes.len() > 1 {
        info!("run uses the first mesh size {n}");
    }
    prepare_dir(&r.out_dir)?;
    fs::write(r.out_dir.join("config.toml"), config_text)?;
    let s = solver(r, n, r.t_end)?;
    let out = s.run()?;
    output::write_diagnostics(&r.out_dir.join("diagnostics.csv"), &out.diagnostics)?;
    for (spec, c) in s.problem().species.iter().zip(&out.state.densities) {
        output::write_snapshot(&r.out_dir.join(format!("snapshot_{}.csv", spec.name)), c)?;
    }
    output::write_snapshot(&r.out_dir.join("snapshot_psi.csv"), &out.state.psi)?;
    report_run(&s, &out);
    Ok(())
}

fn report_run(s: &Solver, out: &RunOutput) {
    let first = &out.diagnostics[0];
    let last = out.diagnostics.last().expect("initial record");
    println!("{}: {} steps to t = {}", s.problem().name, out.state.step, out.state.t);
    for (i, spec) in s.problem().species.iter().enumerate() {
        let drift = (last.mass[i] - first.mass[i]).abs() / first.mass[i].abs();
        let min_avg = out.diagnostics.iter().map(|d| d.min_avg[i]).fold(f64::INFINITY, f64::min);
        print!("  {}: relative mass drift {drift:.3e}, smallest cell average {min_avg:.6e}", spec.name);
        match out.errors.density[i] {
            Some(e) => println!(", l1 error {e:.6e}"),
            None => println!(),
        }
    }
    if let Some(e) = out.errors.potential {
        println!("  psi: l1 error {e:.6e}");
    }
    if out.entropy_clipped {
        println!("  note: the entropy term hit its floor at some recorded time");
    }
}

pub fn convergence(r: &Resolved) -> Result<()> {
    if r.sizes.len() < 2 {
        return Err(ConfigError::Invalid(format!(
            "convergence needs at least two mesh sizes for an order, got {:?}",
            r.sizes
        ))
        .into());
    }
    prepare_dir(&r.out_dir)?;
    let runs: Vec<(Solver, RunOutput)> = r
        .sizes
        .iter()
        .map(|&n| {
            let s = solver(r, n, r.t_end)?;
            let out = s.run()?;
            info!("{n}: {} steps", out.state.step);
            Ok((s, out))
        })
        .collect::<Result<_>>()?;
    let names: Vec<String> = runs[0].0.problem().species.iter().map(|s| s.name.clone()).chain(["psi".into()]).collect();
    let exact = runs[0].1.errors.density.iter().all(Option::is_some) && runs[0].1.errors.potential.is_some();
    let errors: Vec<Vec<f64>> = if exact {
        runs.iter()
            .map(|(_, o)| o.errors.density.iter().map(|e| e.unwrap()).chain(o.errors.potential).collect())
            .collect()
    } else {
        self_reference_errors(r, &runs)?
    };
    let by_cells = r.benchmark.dim() == 2;
    let rows: Vec<ErrorRow> = runs
        .iter()
        .zip(errors)
        .map(|((s, _), errors)| {
            let size = if by_cells { s.space().mesh().cells_per_axis()[0] as f64 } else { s.space().mesh().h(0) };
            ErrorRow { size, errors }
        })
        .collect();
    output::write_errors(&r.out_dir.join("errors.csv"), &names, by_cells, &rows)?;
    print_table(&names, by_cells, &rows);
    Ok(())
}

fn self_reference_errors(r: &Resolved, runs: &[(Solver, RunOutput)]) -> Result<Vec<Vec<f64>>> {
    let finest = *r.sizes.iter().max().expect("two sizes");
    let n_ref = REFERENCE_REFINEMENT * finest;
    if let Some(n) = r.sizes.iter().find(|&&n| n_ref % n != 0) {
        warn!("reference mesh {n_ref} does not refine mesh {n}; errors are integrated across cell boundaries");
    }
    println!("no exact solution: errors against a {n_ref}-cell-per-direction reference run");
    let fine = solver(r, n_ref, r.t_end)?;
    let reference = fine.run()?.state;
    let rule = QuadRule::gauss(ERROR_RULE_POINTS)?;
    Ok(runs
        .iter()
        .map(|(s, o)| {
            let d = |a, b| l1_distance_refined(s.space(), a, fine.space(), b, &rule);
            o.state
                .densities
                .iter()
                .zip(&reference.densities)
                .map(|(a, b)| d(a, b))
                .chain([d(&o.state.psi, &reference.psi)])
                .collect()
        })
        .collect())
}

fn print_table(names: &[String], by_cells: bool, rows: &[ErrorRow]) {
    print!("{:>8}", if by_cells { "N" } else { "h" });
    for n in names {
        print!(" {:>12} {:>6}", format!("{n} error"), "order");
    }
    println!();
    for (i, row) in rows.iter().enumerate() {
        print!("{:>8}", if by_cells { format!("{}", row.size) } else { format!("{:.4}", row.size) });
        for (v, &e) in row.errors.iter().enumerate() {
            let o = if i == 0 {
                "--".to_string()
            } else {
                let h = |r: &ErrorRow| if by_cells { 1.0 / r.size } else { r.size };
                format!("{:.2}", output::observed_order(rows[i - 1].errors[v], e, h(&rows[i - 1]), h(row)))
            };
            print!(" {e:>12.4e} {o:>6}");
        }
        println!();
    }
}

pub fn steady_check_cmd(r: &Resolved) -> Result<()> {
    let n = r.sizes[0];
    prepare_dir(&r.out_dir)?;
    let mut state = if r.settle_time > 0.0 {
        let settle = solver(r, n, r.settle_time)?;
        let reached = settle.run()?.state;
        info!("settled to t = {} in {} steps", reached.t, reached.step);
        refit_steady(&settle, &reached)?
    } else {
        solver(r, n, 0.0)?.init()?
    };
    let s = solver(r, n, r.settle_time)?;
    if r.perturbation != 0.0 {
        state = perturb(&s, &state, r.perturbation)?;
    }
    let dt = s.config().dt(s.space().mesh());
    let changes = steady_check(&s, &state, dt, r.steady_steps)?;
    let mut w = csv::Writer::from_path(r.out_dir.join("steady.csv"))?;
    w.write_record(["step", "max_change", "l2_change"])?;
    for (i, c) in changes.iter().enumerate() {
        w.write_record([(i + 1).to_string(), output::num(c.max_coeff), output::num(c.l2)])?;
    }
    w.flush()?;
    let max = changes.iter().map(|c| c.max_coeff).fold(0.0, f64::max);
    let monotone = changes.windows(2).all(|p| p[1].l2 <= p[0].l2);
    println!(
        "{}: {} steps of dt = {dt:e} from t = {}: largest coefficient change per step {max:.3e}, last {:.3e}; L2 change {}",
        s.problem().name,
        changes.len(),
        state.t,
        changes.last().map_or(0.0, |c| c.max_coeff),
        if monotone { "nonincreasing" } else { "not monotone" }
    );
    Ok(())
}

/// Adds `eps * mean_i * cos(pi (x - lo) / L)` to every species, which
/// leaves masses and net charge unchanged.
fn perturb(s: &Solver, state: &State, eps: f64) -> Result<State> {
    let space = s.space();
    let mesh = space.mesh();
    let (lo, hi) = (mesh.lower()[0], mesh.upper()[0]);
    let shape = project_l2(space, |x| (std::f64::consts::PI * (x[0] - lo) / (hi - lo)).cos(), FieldRole::Density);
    let mut densities = state.densities.clone();
    for c in &mut densities {
        let avg = c.cell_averages();
        let mean = avg.iter().sum::<f64>() / avg.len() as f64;
        c.axpy(eps * mean, &shape);
    }
    let mut p = s.state_from(densities, state.t)?;
    p.step = state.step;
    Ok(p)
}
