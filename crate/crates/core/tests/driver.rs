use pnp_ddg::driver::benchmarks::{self, example1_psi};
use pnp_ddg::driver::diagnostics::total_mass;
use pnp_ddg::driver::steady::{refit_steady, steady_check};
use pnp_ddg::driver::{SimConfig, Solver, TimeStep};
use pnp_ddg::field::{eval, eval_grad};
use pnp_ddg::poisson::BoundaryKind;
use pnp_ddg::Side;

fn config(mu: f64, t_end: f64) -> SimConfig {
    let mut c = SimConfig::new(TimeStep::MeshRatio(mu), t_end);
    c.cadence = 0;
    c
}

#[test]
fn example1_error_at_h_005() {
    let s = Solver::new(benchmarks::example1(20).unwrap(), config(0.01, 0.01)).unwrap();
    let out = s.run().unwrap();
    let e = out.errors.density[0].unwrap();
    assert!((e / 9.1862e-6 - 1.0).abs() < 0.5, "{e:e}");
    assert_eq!(out.state.t, 0.01);
}

#[test]
fn example1_errors_do_not_depend_on_the_step() {
    let run = |mu| Solver::new(benchmarks::example1(10).unwrap(), config(mu, 0.01)).unwrap().run().unwrap().errors;
    let (a, b) = (run(0.01), run(0.005));
    for (x, y) in a.density.iter().zip(&b.density) {
        let (x, y) = (x.unwrap(), y.unwrap());
        assert!((x - y).abs() < 0.01 * x, "{x:e} {y:e}");
    }
}

#[test]
fn example1_boundary_bookkeeping() {
    let p = benchmarks::example1(10).unwrap();
    assert!(matches!(p.poisson_bc.side(Side::XLo), Some(BoundaryKind::Dirichlet(_))));
    assert!(matches!(p.poisson_bc.side(Side::XHi), Some(BoundaryKind::Neumann(_))));

    // Without sources the transport conserves mass exactly, so no flux
    // enters through the walls.
    let mut free = p.clone();
    for sp in &mut free.species {
        sp.source = None;
    }
    let s = Solver::new(free, config(0.01, 0.0)).unwrap();
    let st = s.init().unwrap();
    let prep = s.prepare(&st.densities, &st.psi).unwrap();
    for r in s.rhs(&prep, 0.0) {
        let net: f64 = r.cell_averages().iter().sum();
        assert!(net.abs() < 1e-12, "{net:e}");
    }

    // The potential takes its Dirichlet value at x = 0 and the Neumann
    // slope at x = 1.
    let s = Solver::new(p, config(0.01, 0.0)).unwrap();
    let st = s.init().unwrap();
    let psi0 = eval(s.space(), &st.psi, 0, [-1.0, 0.0]).unwrap();
    let slope1 = eval_grad(s.space(), &st.psi, 9, [1.0, 0.0]).unwrap()[0];
    assert!(psi0.abs() < 1e-4, "{psi0:e}");
    assert!((slope1 + 1.0 / 60.0).abs() < 1e-3, "{slope1}");
    assert!(example1_psi(0.0, 1.0).abs() > 1e-3);
}

#[test]
fn example2_rk2_conserves_mass() {
    let s = Solver::new(benchmarks::example2(16).unwrap(), config(0.01, 0.05)).unwrap();
    let out = s.run().unwrap();
    for c in &out.state.densities {
        assert!((total_mass(s.space(), c) - 3.0).abs() < 1e-11);
    }
}

#[test]
fn example2_refit_is_stationary() {
    let s = Solver::new(benchmarks::example2(20).unwrap(), config(0.01, 1.0)).unwrap();
    let reached = s.run().unwrap().state;
    let steady = refit_steady(&s, &reached).unwrap();
    let dt = s.config().dt(s.space().mesh());
    let changes = steady_check(&s, &steady, dt, 100).unwrap();
    let worst = changes.iter().map(|c| c.max_coeff).fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst:e}");
}
