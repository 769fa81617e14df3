//! Piecewise-quadratic modal fields.

use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::quadrature::QuadRule;
use crate::space::DgSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldRole {
    Density,
    Auxiliary,
    Potential,
    /// Time derivative or other coefficient increment.
    Increment,
    Other,
}

/// Per-cell modal coefficients, stored cell-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    nb: usize,
    coeffs: Vec<f64>,
    role: FieldRole,
}

impl Field {
    pub fn zeros(space: &DgSpace, role: FieldRole) -> Self {
        Self { nb: space.nb(), coeffs: vec![0.0; space.num_dofs()], role }
    }

    pub fn from_coeffs(space: &DgSpace, coeffs: Vec<f64>, role: FieldRole) -> Result<Self> {
        if coeffs.len() != space.num_dofs() {
            return Err(Error::InvalidProblem(format!(
                "coefficient array has length {}, expected {}",
                coeffs.len(),
                space.num_dofs()
            )));
        }
        Ok(Self { nb: space.nb(), coeffs, role })
    }

    /// Field equal to `value` everywhere.
    pub fn constant(space: &DgSpace, value: f64, role: FieldRole) -> Self {
        let mut f = Self::zeros(space, role);
        for k in 0..space.num_cells() {
            f.cell_mut(k)[0] = value;
        }
        f
    }

    pub fn role(&self) -> FieldRole {
        self.role
    }

    pub fn with_role(mut self, role: FieldRole) -> Self {
        self.role = role;
        self
    }

    pub fn num_cells(&self) -> usize {
        self.coeffs.len() / self.nb
    }

    pub fn nb(&self) -> usize {
        self.nb
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    #[inline]
    pub fn cell(&self, k: usize) -> &[f64] {
        &self.coeffs[k * self.nb..(k + 1) * self.nb]
    }

    #[inline]
    pub fn cell_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.coeffs[k * self.nb..(k + 1) * self.nb]
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &Field) {
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += a * y;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for x in &mut self.coeffs {
            *x *= a;
        }
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Plain cell average (the `L0` coefficient).
    pub fn cell_average(&self, k: usize) -> f64 {
        self.coeffs[k * self.nb]
    }

    pub fn cell_averages(&self) -> Vec<f64> {
        (0..self.num_cells()).map(|k| self.cell_average(k)).collect()
    }
}

/// Piecewise `L^2` projection of `f` using the space's volume rule.
pub fn project_l2(space: &DgSpace, f: impl Fn(Point) -> f64, role: FieldRole) -> Field {
    let mut out = Field::zeros(space, role);
    let nb = space.nb();
    let w = space.vol_weights();
    let norms: Vec<f64> = (0..nb).map(|r| space.basis().norm_sq(r)).collect();
    let mut vals = vec![0.0; space.nq()];
    for k in 0..space.num_cells() {
        for (v, &xi) in vals.iter_mut().zip(space.vol_points()) {
            *v = f(space.mesh().to_physical(k, xi));
        }
        let c = out.cell_mut(k);
        // constants are kept exact so that constant states stay fixed points
        if vals.iter().all(|&v| v == vals[0]) {
            c[0] = vals[0];
            continue;
        }
        for (q, &fx) in vals.iter().enumerate() {
            let phi = space.vol_phi(q);
            for r in 0..nb {
                c[r] += w[q] * fx * phi[r];
            }
        }
        for r in 0..nb {
            c[r] /= norms[r];
        }
    }
    out
}

/// Projection with an explicit per-direction rule, for checking
/// sensitivity to the quadrature order.
pub fn project_l2_with_rule(space: &DgSpace, rule: &QuadRule, f: impl Fn(Point) -> f64, role: FieldRole) -> Field {
    let mut out = Field::zeros(space, role);
    let basis = space.basis();
    let nb = space.nb();
    let pts = tensor_points(space.dim(), rule);
    for k in 0..space.num_cells() {
        let c = out.cell_mut(k);
        for &(xi, w) in &pts {
            let fx = f(space.mesh().to_physical(k, xi));
            for (r, cr) in c.iter_mut().enumerate() {
                *cr += w * fx * basis.value(r, xi);
            }
        }
        for (r, cr) in c.iter_mut().enumerate().take(nb) {
            *cr /= basis.norm_sq(r);
        }
    }
    out
}

fn tensor_points(dim: usize, rule: &QuadRule) -> Vec<(Point, f64)> {
    let mut pts = Vec::new();
    if dim == 1 {
        for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
            pts.push(([x, 0.0], w));
        }
    } else {
        for (&y, &wy) in rule.nodes().iter().zip(rule.weights()) {
            for (&x, &wx) in rule.nodes().iter().zip(rule.weights()) {
                pts.push(([x, y], wx * wy));
            }
        }
    }
    pts
}

fn check_point(space: &DgSpace, xi: Point) -> Result<()> {
    let inside = |t: f64| (-1.0 - 1e-12..=1.0 + 1e-12).contains(&t);
    if inside(xi[0]) && (space.dim() == 1 || inside(xi[1])) {
        Ok(())
    } else {
        Err(Error::InvalidProblem(format!("reference point {xi:?} outside the element")))
    }
}

/// Value of `field` in cell `k` at reference point `xi`.
pub fn eval(space: &DgSpace, field: &Field, k: usize, xi: Point) -> Result<f64> {
    space.mesh().check_cell(k)?;
    check_point(space, xi)?;
    Ok(eval_unchecked(space, field.cell(k), xi))
}

#[inline]
pub(crate) fn eval_unchecked(space: &DgSpace, coeffs: &[f64], xi: Point) -> f64 {
    let b = space.basis();
    coeffs.iter().enumerate().map(|(r, c)| c * b.value(r, xi)).sum()
}

/// Physical gradient of `field` in cell `k` at reference point `xi`.
pub fn eval_grad(space: &DgSpace, field: &Field, k: usize, xi: Point) -> Result<[f64; 2]> {
    space.mesh().check_cell(k)?;
    check_point(space, xi)?;
    let b = space.basis();
    let mut g = [0.0; 2];
    for (r, c) in field.cell(k).iter().enumerate() {
        let d = b.grad(r, xi);
        g[0] += c * d[0];
        g[1] += c * d[1];
    }
    for (a, ga) in g.iter_mut().enumerate().take(space.dim()) {
        *ga *= space.deriv_scale(a);
    }
    Ok(g)
}

/// Physical Hessian of `field` in cell `k` at reference point `xi`.
pub fn eval_second(space: &DgSpace, field: &Field, k: usize, xi: Point) -> Result<[[f64; 2]; 2]> {
    space.mesh().check_cell(k)?;
    check_point(space, xi)?;
    let b = space.basis();
    let mut h = [[0.0; 2]; 2];
    for (r, c) in field.cell(k).iter().enumerate() {
        let d = b.hessian(r, xi);
        for a in 0..2 {
            for e in 0..2 {
                h[a][e] += c * d[a][e];
            }
        }
    }
    let dim = space.dim();
    for (a, row) in h.iter_mut().enumerate() {
        for (e, v) in row.iter_mut().enumerate() {
            if a < dim && e < dim {
                *v *= space.deriv_scale(a) * space.deriv_scale(e);
            } else {
                *v = 0.0;
            }
        }
    }
    Ok(h)
}

/// Values of `field` at the volume quadrature points of cell `k`.
pub fn values_at_volume(space: &DgSpace, field: &Field, k: usize, out: &mut [f64]) {
    let c = field.cell(k);
    for (q, o) in out.iter_mut().enumerate().take(space.nq()) {
        *o = c.iter().zip(space.vol_phi(q)).map(|(a, b)| a * b).sum();
    }
}

/// Plain cell average of `field` on cell `k`.
pub fn cell_average(space: &DgSpace, field: &Field, k: usize) -> Result<f64> {
    space.mesh().check_cell(k)?;
    Ok(field.cell_average(k))
}

/// `int_K M w / int_K M` with `weights` holding `M` at the volume
/// quadrature points of cell `k`.
pub fn weighted_cell_average(space: &DgSpace, field: &Field, k: usize, weights: &[f64]) -> Result<f64> {
    space.mesh().check_cell(k)?;
    let c = field.cell(k);
    let mut num = 0.0;
    let mut den = 0.0;
    for (q, (&w, &m)) in space.vol_weights().iter().zip(weights).enumerate() {
        let v: f64 = c.iter().zip(space.vol_phi(q)).map(|(a, b)| a * b).sum();
        num += w * m * v;
        den += w * m;
    }
    if !(den > 0.0) {
        return Err(Error::SingularLocalSystem { what: "weight integral", cell: k });
    }
    Ok(num / den)
}

/// `sum_K int_K |field - reference|` with the space's volume rule.
pub fn l1_error(space: &DgSpace, field: &Field, reference: impl Fn(Point) -> f64) -> f64 {
    let jac = space.cell_jacobian();
    let w = space.vol_weights();
    let mut total = 0.0;
    for k in 0..space.num_cells() {
        let c = field.cell(k);
        for (q, &xi) in space.vol_points().iter().enumerate() {
            let v: f64 = c.iter().zip(space.vol_phi(q)).map(|(a, b)| a * b).sum();
            total += w[q] * jac * (v - reference(space.mesh().to_physical(k, xi))).abs();
        }
    }
    total
}

/// `l1_error` with an explicit per-direction rule.
pub fn l1_error_with_rule(space: &DgSpace, rule: &QuadRule, field: &Field, reference: impl Fn(Point) -> f64) -> f64 {
    let jac = space.cell_jacobian();
    let basis = space.basis();
    let pts = tensor_points(space.dim(), rule);
    let mut total = 0.0;
    for k in 0..space.num_cells() {
        let c = field.cell(k);
        for &(xi, w) in &pts {
            let v: f64 = c.iter().enumerate().map(|(r, cr)| cr * basis.value(r, xi)).sum();
            total += w * jac * (v - reference(space.mesh().to_physical(k, xi))).abs();
        }
    }
    total
}

/// `sum_K int_K |a - b|` between two fields on the same space.
pub fn l1_distance(space: &DgSpace, a: &Field, b: &Field) -> f64 {
    let jac = space.cell_jacobian();
    let w = space.vol_weights();
    let mut total = 0.0;
    for k in 0..space.num_cells() {
        let (ca, cb) = (a.cell(k), b.cell(k));
        for q in 0..space.nq() {
            let phi = space.vol_phi(q);
            let v: f64 = (0..space.nb()).map(|r| (ca[r] - cb[r]) * phi[r]).sum();
            total += w[q] * jac * v.abs();
        }
    }
    total
}

/// `int |coarse - fine|` where `fine` lives on a uniform refinement of the
/// coarse mesh. Integrated on the fine cells, where both are polynomial.
pub fn l1_distance_refined(coarse_space: &DgSpace, coarse: &Field, fine_space: &DgSpace, fine: &Field, rule: &QuadRule) -> f64 {
    let ev = point_evaluator(coarse_space, coarse);
    l1_error_with_rule(fine_space, rule, fine, ev)
}

/// Pointwise evaluator of a field at physical points (cell located by
/// coordinates; points on interfaces take the cell to the right/above).
pub fn point_evaluator<'a>(space: &'a DgSpace, field: &'a Field) -> impl Fn(Point) -> f64 + 'a {
    move |x: Point| {
        let mesh = space.mesh();
        let lo = mesh.lower();
        let [p, q] = mesh.cells_per_axis();
        let locate = |t: f64, axis: usize, n: usize| -> usize {
            let idx = ((t - lo[axis]) / mesh.h(axis)).floor();
            (idx.max(0.0) as usize).min(n - 1)
        };
        let j = locate(x[0], 0, p);
        let l = if mesh.dim() == 2 { locate(x[1], 1, q) } else { 0 };
        let k = mesh.cell_index(j, l);
        eval_unchecked(space, field.cell(k), mesh.to_reference(k, x))
    }
}
