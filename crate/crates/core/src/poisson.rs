//! DDG discretization of `-Laplace psi = sum_i q_i c_i + rho0 (+ f3)` with
//! mixed Dirichlet/Neumann data and a factorization reused across loads.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::Col;

use crate::error::{Error, Result};
use crate::field::{Field, FieldRole};
use crate::flux::{side_trace, FluxParams, SideTrace};
use crate::mesh::{Point, Side};
use crate::space::DgSpace;

/// Function of time and position.
pub type ScalarFn = Arc<dyn Fn(f64, Point) -> f64 + Send + Sync>;

pub fn scalar_fn(f: impl Fn(f64, Point) -> f64 + Send + Sync + 'static) -> ScalarFn {
    Arc::new(f)
}

pub fn zero_fn() -> ScalarFn {
    Arc::new(|_, _| 0.0)
}

/// Coercivity threshold `Gamma_d(beta1) = k^2 (1 - beta1 (k^2 - 1) + beta1^2 (k^2 - 1)^2 / 3)`.
pub fn gamma_d(k: usize, beta1: f64) -> Result<f64> {
    if !(k == 1 || k == 2) {
        return Err(Error::UnsupportedDegree(k));
    }
    let k2 = (k * k) as f64;
    let m = k2 - 1.0;
    Ok(k2 * (1.0 - beta1 * m + beta1 * beta1 * m * m / 3.0))
}

#[derive(Clone)]
pub enum BoundaryKind {
    /// `psi = psi_D`
    Dirichlet(ScalarFn),
    /// `d psi / dn = sigma` with the exterior normal.
    Neumann(ScalarFn),
}

impl BoundaryKind {
    pub fn is_dirichlet(&self) -> bool {
        matches!(self, BoundaryKind::Dirichlet(_))
    }
}

impl fmt::Debug for BoundaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryKind::Dirichlet(_) => f.write_str("Dirichlet"),
            BoundaryKind::Neumann(_) => f.write_str("Neumann"),
        }
    }
}

/// Boundary data for the potential, one entry per domain side.
#[derive(Clone, Debug)]
pub struct PoissonBc {
    sides: [Option<BoundaryKind>; 4],
    zero_mean_gauge: bool,
}

impl PoissonBc {
    pub fn new() -> Self {
        Self { sides: [None, None, None, None], zero_mean_gauge: false }
    }

    /// Homogeneous Dirichlet data on every side.
    pub fn homogeneous_dirichlet() -> Self {
        Self::all(BoundaryKind::Dirichlet(zero_fn()))
    }

    pub fn all(kind: BoundaryKind) -> Self {
        let mut bc = Self::new();
        for s in Side::ALL {
            bc.sides[s.local_face()] = Some(kind.clone());
        }
        bc
    }

    pub fn with_side(mut self, side: Side, kind: BoundaryKind) -> Self {
        self.sides[side.local_face()] = Some(kind);
        self
    }

    /// Pin the constant mode by requiring zero mean. Only meaningful when
    /// no side carries Dirichlet data.
    pub fn with_zero_mean_gauge(mut self, on: bool) -> Self {
        self.zero_mean_gauge = on;
        self
    }

    pub fn zero_mean_gauge(&self) -> bool {
        self.zero_mean_gauge
    }

    pub fn side(&self, side: Side) -> Option<&BoundaryKind> {
        self.sides[side.local_face()].as_ref()
    }

    pub fn has_dirichlet(&self, dim: usize) -> bool {
        Side::ALL[..2 * dim].iter().any(|&s| self.side(s).is_some_and(BoundaryKind::is_dirichlet))
    }

    fn validate(&self, dim: usize) -> Result<()> {
        for &s in &Side::ALL[..2 * dim] {
            if self.side(s).is_none() {
                return Err(Error::InvalidProblem(format!("no potential boundary condition on side {s:?}")));
            }
        }
        if !self.has_dirichlet(dim) && !self.zero_mean_gauge {
            return Err(Error::NoDirichletBoundary);
        }
        Ok(())
    }
}

impl Default for PoissonBc {
    fn default() -> Self {
        Self::new()
    }
}

/// Right-hand side data: charges of the species, fixed background charge
/// and an optional extra source.
#[derive(Clone)]
pub struct LoadSpec {
    pub charges: Vec<f64>,
    pub rho0: Option<ScalarFn>,
    pub source: Option<ScalarFn>,
}

impl LoadSpec {
    pub fn new(charges: Vec<f64>) -> Self {
        Self { charges, rho0: None, source: None }
    }
}

impl fmt::Debug for LoadSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LoadSpec")
            .field("charges", &self.charges)
            .field("rho0", &self.rho0.is_some())
            .field("source", &self.source.is_some())
            .finish()
    }
}

/// Which interface terms enter the bilinear form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PoissonForm {
    /// `Fl(psi)[eta] + {d_n eta}[psi] + beta1 h_e [d_n^2 eta][psi]`: the
    /// second-derivative jump is mirrored on the test side, so the matrix is
    /// symmetric for every `beta1`.
    #[default]
    Symmetric,
    /// `Fl(psi)[eta] + {d_n eta}[psi]`: the second-derivative jump appears on
    /// the trial side only; symmetric only when `beta1 = 0`.
    TrialOnly,
}

/// Assembled and factorized DDG Poisson operator.
pub struct PoissonOperator {
    nb: usize,
    n: usize,
    params: FluxParams,
    form: PoissonForm,
    bc: PoissonBc,
    gauge: bool,
    /// `(test cell, trial cell) -> nb x nb` row-major block.
    blocks: BTreeMap<(usize, usize), Vec<f64>>,
    /// The same blocks flattened for `matvec`.
    block_keys: Vec<(usize, usize)>,
    block_data: Vec<f64>,
    lu: Lu<usize, f64>,
    /// Integral of each basis function when the gauge row is present.
    mean_row: Vec<f64>,
}

impl fmt::Debug for PoissonOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PoissonOperator")
            .field("dofs", &self.n)
            .field("params", &self.params)
            .field("form", &self.form)
            .field("gauge", &self.gauge)
            .finish()
    }
}

/// Admissibility messages for the given parameters, empty when the
/// coercivity bound holds on every face type present.
pub fn admissibility_warnings(params: &FluxParams, has_dirichlet: bool) -> Vec<String> {
    let mut out = Vec::new();
    let gi = gamma_d(2, params.beta1).expect("k = 2 is supported");
    if params.beta0 <= gi {
        out.push(format!(
            "Poisson beta0 = {} does not exceed Gamma_d({}) = {:.6} on interior faces",
            params.beta0, params.beta1, gi
        ));
    }
    let gb = 2.0 * gamma_d(2, 0.0).expect("k = 2 is supported");
    if has_dirichlet && params.beta0 <= gb {
        out.push(format!("Poisson beta0 = {} does not exceed 2 Gamma_d(0) = {gb} on Dirichlet faces", params.beta0));
    }
    out
}

impl PoissonOperator {
    pub fn assemble(space: &DgSpace, params: FluxParams, bc: &PoissonBc) -> Result<Self> {
        Self::assemble_with_form(space, params, bc, PoissonForm::default())
    }

    pub fn assemble_with_form(space: &DgSpace, params: FluxParams, bc: &PoissonBc, form: PoissonForm) -> Result<Self> {
        let dim = space.dim();
        bc.validate(dim)?;
        if !(params.beta0.is_finite() && params.beta1.is_finite()) {
            return Err(Error::InvalidParams(format!("non-finite Poisson parameters {params:?}")));
        }
        let has_dirichlet = bc.has_dirichlet(dim);
        for w in admissibility_warnings(&params, has_dirichlet) {
            log::warn!("{w}");
        }
        let gauge = !has_dirichlet;

        let nb = space.nb();
        let blocks = assemble_blocks(space, &params, bc, form);
        let n = space.num_dofs();
        let mut mean_row = Vec::new();
        let mut triplets: Vec<Triplet<usize, usize, f64>> = Vec::new();
        for (&(kt, ks), blk) in &blocks {
            for r in 0..nb {
                for s in 0..nb {
                    let v = blk[r * nb + s];
                    if v != 0.0 {
                        triplets.push(Triplet::new(kt * nb + r, ks * nb + s, v));
                    }
                }
            }
        }
        let size = if gauge {
            let m0 = space.mass(0);
            mean_row = vec![0.0; n];
            for k in 0..space.num_cells() {
                mean_row[k * nb] = m0;
                triplets.push(Triplet::new(n, k * nb, m0));
                triplets.push(Triplet::new(k * nb, n, m0));
            }
            n + 1
        } else {
            n
        };
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(size, size, &triplets)
            .map_err(|e| Error::Factorization(format!("{e:?}")))?;
        let lu = mat.sp_lu().map_err(|e| Error::Factorization(format!("{e:?}")))?;
        let block_keys: Vec<(usize, usize)> = blocks.keys().copied().collect();
        let block_data: Vec<f64> = blocks.values().flatten().copied().collect();
        Ok(Self { nb, n, params, form, bc: bc.clone(), gauge, blocks, block_keys, block_data, lu, mean_row })
    }

    pub fn params(&self) -> FluxParams {
        self.params
    }

    pub fn form(&self) -> PoissonForm {
        self.form
    }

    pub fn bc(&self) -> &PoissonBc {
        &self.bc
    }

    pub fn uses_gauge(&self) -> bool {
        self.gauge
    }

    /// Number of unknowns (cells times basis size).
    pub fn num_dofs(&self) -> usize {
        self.n
    }

    /// `A x` for the assembled bilinear form (without the gauge border).
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let nb = self.nb;
        let mut y = vec![0.0; self.n];
        for (&(kt, ks), blk) in self.block_keys.iter().zip(self.block_data.chunks_exact(nb * nb)) {
            let xs = &x[ks * nb..(ks + 1) * nb];
            let ys = &mut y[kt * nb..(kt + 1) * nb];
            for (yr, row) in ys.iter_mut().zip(blk.chunks_exact(nb)) {
                *yr += row.iter().zip(xs).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        y
    }

    /// Dense row-major copy of the matrix; intended for small meshes.
    pub fn to_dense(&self) -> Vec<f64> {
        let (n, nb) = (self.n, self.nb);
        let mut a = vec![0.0; n * n];
        for (&(kt, ks), blk) in &self.blocks {
            for r in 0..nb {
                for s in 0..nb {
                    a[(kt * nb + r) * n + ks * nb + s] += blk[r * nb + s];
                }
            }
        }
        a
    }

    /// `max |A - A^T| / max |A|`.
    pub fn symmetry_defect(&self) -> f64 {
        let nb = self.nb;
        let mut amax = 0.0f64;
        let mut dmax = 0.0f64;
        for (&(kt, ks), blk) in &self.blocks {
            let zero = vec![0.0; nb * nb];
            let tr = self.blocks.get(&(ks, kt)).unwrap_or(&zero);
            for r in 0..nb {
                for s in 0..nb {
                    amax = amax.max(blk[r * nb + s].abs());
                    dmax = dmax.max((blk[r * nb + s] - tr[s * nb + r]).abs());
                }
            }
        }
        if amax == 0.0 {
            0.0
        } else {
            dmax / amax
        }
    }

    /// Right-hand side `L(eta)` at time `t` for the given densities.
    pub fn assemble_load(&self, space: &DgSpace, densities: &[&Field], load: &LoadSpec, t: f64) -> Result<Vec<f64>> {
        if densities.len() != load.charges.len() {
            return Err(Error::InvalidProblem(format!(
                "{} densities for {} charges",
                densities.len(),
                load.charges.len()
            )));
        }
        let nb = self.nb;
        let mut b = vec![0.0; self.n];
        let jac = space.cell_jacobian();
        let w = space.vol_weights();
        for k in 0..space.num_cells() {
            let out = &mut b[k * nb..(k + 1) * nb];
            for q in 0..space.nq() {
                let phi = space.vol_phi(q);
                let mut rhs = 0.0;
                for (c, &z) in densities.iter().zip(&load.charges) {
                    if z != 0.0 {
                        let v: f64 = c.cell(k).iter().zip(phi).map(|(a, b)| a * b).sum();
                        rhs += z * v;
                    }
                }
                if load.rho0.is_some() || load.source.is_some() {
                    let x = space.mesh().to_physical(k, space.vol_points()[q]);
                    if let Some(f) = &load.rho0 {
                        rhs += f(t, x);
                    }
                    if let Some(f) = &load.source {
                        rhs += f(t, x);
                    }
                }
                if rhs != 0.0 {
                    for r in 0..nb {
                        out[r] += w[q] * jac * rhs * phi[r];
                    }
                }
            }
        }

        for (_, face) in space.mesh().boundary_faces() {
            let side = face.boundary.expect("boundary face");
            let lf = side.local_face();
            let k = face.owner();
            let ft = space.face_table(lf);
            let fj = space.face_jacobian(side.axis());
            let h = space.mesh().h(side.axis());
            let sgn = side.outward_sign();
            let ds = space.deriv_scale(side.axis());
            let out = &mut b[k * nb..(k + 1) * nb];
            for (p, &xi) in ft.points.iter().enumerate() {
                let x = space.mesh().to_physical(k, xi);
                let wq = ft.weights[p] * fj;
                match self.bc.side(side).expect("validated") {
                    BoundaryKind::Dirichlet(g) => {
                        let gd = g(t, x);
                        for r in 0..nb {
                            let phi = ft.phi[p * nb + r];
                            let dn = sgn * ds * ft.dn[p * nb + r];
                            out[r] += wq * (self.params.beta0 / h * phi - dn) * gd;
                        }
                    }
                    BoundaryKind::Neumann(sigma) => {
                        let s = sigma(t, x);
                        for r in 0..nb {
                            out[r] += wq * s * ft.phi[p * nb + r];
                        }
                    }
                }
            }
        }
        Ok(b)
    }

    /// Solve `A psi = load` with the cached factorization.
    pub fn solve(&self, space: &DgSpace, load: &[f64]) -> Result<Field> {
        if load.len() != self.n {
            return Err(Error::InvalidProblem(format!("load has length {}, expected {}", load.len(), self.n)));
        }
        let size = if self.gauge { self.n + 1 } else { self.n };
        let rhs = Col::<f64>::from_fn(size, |i| if i < self.n { load[i] } else { 0.0 });
        let x = self.lu.solve(&rhs);
        let psi: Vec<f64> = (0..self.n).map(|i| x[i]).collect();
        if psi.iter().any(|v| !v.is_finite()) {
            return Err(Error::SolverBreakdown { residual: f64::NAN });
        }

        let mut r = self.matvec(&psi);
        if self.gauge {
            let lambda = x[self.n];
            for (ri, mi) in r.iter_mut().zip(&self.mean_row) {
                *ri += mi * lambda;
            }
        }
        let bnorm = load.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rnorm = r.iter().zip(load).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let scale = if bnorm > 0.0 { bnorm } else { 1.0 };
        let residual = rnorm / scale;
        if residual > 1e-10 {
            return Err(Error::SolverBreakdown { residual });
        }
        Field::from_coeffs(space, psi, FieldRole::Potential)
    }

    /// Assemble the load and solve in one go.
    pub fn solve_for(&self, space: &DgSpace, densities: &[&Field], load: &LoadSpec, t: f64) -> Result<Field> {
        let b = self.assemble_load(space, densities, load, t)?;
        self.solve(space, &b)
    }
}

fn add_block(blocks: &mut BTreeMap<(usize, usize), Vec<f64>>, nb: usize, key: (usize, usize)) -> &mut Vec<f64> {
    blocks.entry(key).or_insert_with(|| vec![0.0; nb * nb])
}

fn assemble_blocks(
    space: &DgSpace,
    params: &FluxParams,
    bc: &PoissonBc,
    form: PoissonForm,
) -> BTreeMap<(usize, usize), Vec<f64>> {
    let nb = space.nb();
    let dim = space.dim();
    let mut blocks = BTreeMap::new();

    // volume: grad psi . grad eta
    let jac = space.cell_jacobian();
    let mut vol = vec![0.0; nb * nb];
    for q in 0..space.nq() {
        let g = space.vol_grad(q);
        let wq = space.vol_weights()[q] * jac;
        for r in 0..nb {
            for s in 0..nb {
                let mut d = 0.0;
                for a in 0..dim {
                    let sc = space.deriv_scale(a);
                    d += sc * sc * g[r][a] * g[s][a];
                }
                vol[r * nb + s] += wq * d;
            }
        }
    }
    for k in 0..space.num_cells() {
        add_block(&mut blocks, nb, (k, k)).copy_from_slice(&vol);
    }

    // basis traces along the face normal, per side and face point
    let unit = |r: usize| {
        let mut e = vec![0.0; nb];
        e[r] = 1.0;
        e
    };
    let traces: Vec<Vec<Vec<SideTrace>>> = (0..2 * dim)
        .map(|lf| (0..space.nfp()).map(|p| (0..nb).map(|r| side_trace(space, &unit(r), lf, p)).collect()).collect())
        .collect();

    let symmetric_b1 = matches!(form, PoissonForm::Symmetric);
    for (_, face) in space.mesh().interior_faces() {
        let axis = face.axis;
        let h = space.mesh().h(axis);
        let fj = space.face_jacobian(axis);
        let (km, kp) = (face.minus.unwrap(), face.plus.unwrap());
        let (lm, lp) = (2 * axis + 1, 2 * axis);
        let wts = &space.face_table(lm).weights;
        // (cell, local face, sign in the jump)
        let sides = [(km, lm, -1.0), (kp, lp, 1.0)];
        for &(kt, lt, st) in &sides {
            for &(ks, ls, ss) in &sides {
                let mut blk = vec![0.0; nb * nb];
                for p in 0..space.nfp() {
                    let wq = wts[p] * fj;
                    for r in 0..nb {
                        let te = traces[lt][p][r];
                        for s in 0..nb {
                            let tr = traces[ls][p][s];
                            // Fl(psi) [eta]
                            let fl = params.beta0 / h * ss * tr.value + 0.5 * tr.dn + params.beta1 * h * ss * tr.dnn;
                            let mut v = fl * st * te.value;
                            // {d_n eta} [psi]
                            v += 0.5 * te.dn * ss * tr.value;
                            if symmetric_b1 {
                                v += params.beta1 * h * st * te.dnn * ss * tr.value;
                            }
                            blk[r * nb + s] += wq * v;
                        }
                    }
                }
                let dst = add_block(&mut blocks, nb, (kt, ks));
                for (d, v) in dst.iter_mut().zip(blk) {
                    *d += v;
                }
            }
        }
    }

    for (_, face) in space.mesh().boundary_faces() {
        let side = face.boundary.expect("boundary face");
        if !bc.side(side).is_some_and(BoundaryKind::is_dirichlet) {
            continue;
        }
        let lf = side.local_face();
        let k = face.owner();
        let h = space.mesh().h(side.axis());
        let fj = space.face_jacobian(side.axis());
        let sgn = side.outward_sign();
        let wts = &space.face_table(lf).weights;
        let dst = add_block(&mut blocks, nb, (k, k));
        for p in 0..space.nfp() {
            let wq = wts[p] * fj;
            for r in 0..nb {
                let te = traces[lf][p][r];
                for s in 0..nb {
                    let tr = traces[lf][p][s];
                    let v = params.beta0 / h * tr.value * te.value - sgn * tr.dn * te.value - tr.value * sgn * te.dn;
                    dst[r * nb + s] += wq * v;
                }
            }
        }
    }
    blocks
}
