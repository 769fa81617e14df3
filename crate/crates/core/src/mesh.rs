//! Uniform tensor-product meshes on intervals and rectangles.
//!
//! Cells are numbered with the x index running fastest. Every cell has
//! `2 * dim` local faces ordered `[-x, +x, -y, +y]`.

use crate::error::{Error, Result};

/// A point in physical or reference coordinates. One-dimensional meshes
/// ignore the second component.
pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    XLo,
    XHi,
    YLo,
    YHi,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::XLo, Side::XHi, Side::YLo, Side::YHi];

    pub fn axis(self) -> usize {
        match self {
            Side::XLo | Side::XHi => 0,
            Side::YLo | Side::YHi => 1,
        }
    }

    /// Sign of the exterior normal along the face axis.
    pub fn outward_sign(self) -> f64 {
        match self {
            Side::XLo | Side::YLo => -1.0,
            Side::XHi | Side::YHi => 1.0,
        }
    }

    /// Local face index within a cell.
    pub fn local_face(self) -> usize {
        match self {
            Side::XLo => 0,
            Side::XHi => 1,
            Side::YLo => 2,
            Side::YHi => 3,
        }
    }

    pub fn from_local_face(lf: usize) -> Side {
        Side::ALL[lf]
    }
}

/// A mesh face normal to `axis`. The face normal points from `minus` to
/// `plus`; boundary faces have exactly one of them.
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub axis: usize,
    pub minus: Option<usize>,
    pub plus: Option<usize>,
    /// Coordinate of the face along `axis`.
    pub position: f64,
    /// Which domain side a boundary face lies on.
    pub boundary: Option<Side>,
}

impl Face {
    pub fn is_interior(&self) -> bool {
        self.boundary.is_none()
    }

    /// The cell owning a boundary face, or the minus cell of an interior one.
    pub fn owner(&self) -> usize {
        self.minus.or(self.plus).expect("face without cells")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    dim: usize,
    cells: [usize; 2],
    lo: Point,
    h: [f64; 2],
    faces: Vec<Face>,
    /// Per cell and local face: index into `faces`.
    cell_faces: Vec<[usize; 4]>,
}

impl Mesh {
    /// Uniform partition of `[x_lo, x_hi]` into `n >= 2` cells.
    pub fn interval(x_lo: f64, x_hi: f64, n: usize) -> Result<Self> {
        if !(x_hi > x_lo) || !x_lo.is_finite() || !x_hi.is_finite() {
            return Err(Error::InvalidMesh(format!("empty interval [{x_lo}, {x_hi}]")));
        }
        if n < 2 {
            return Err(Error::InvalidMesh(format!("need at least 2 cells, got {n}")));
        }
        Ok(Self::build(1, [n, 1], [x_lo, 0.0], [(x_hi - x_lo) / n as f64, 1.0]))
    }

    /// Uniform `p x q` partition of `[0, lx] x [0, ly]`.
    pub fn rectangle(lx: f64, ly: f64, p: usize, q: usize) -> Result<Self> {
        if !(lx > 0.0 && ly > 0.0) || !lx.is_finite() || !ly.is_finite() {
            return Err(Error::InvalidMesh(format!("nonpositive dimensions {lx} x {ly}")));
        }
        if p < 2 || q < 2 {
            return Err(Error::InvalidMesh(format!("need at least 2x2 cells, got {p}x{q}")));
        }
        Ok(Self::build(2, [p, q], [0.0, 0.0], [lx / p as f64, ly / q as f64]))
    }

    fn build(dim: usize, cells: [usize; 2], lo: Point, h: [f64; 2]) -> Self {
        let [p, q] = cells;
        let ncells = p * q;
        let mut faces = Vec::new();
        let mut cell_faces = vec![[usize::MAX; 4]; ncells];

        // x-normal faces, for every row
        for l in 0..q {
            for i in 0..=p {
                let minus = (i > 0).then(|| (i - 1) + p * l);
                let plus = (i < p).then(|| i + p * l);
                let boundary = match (minus, plus) {
                    (None, _) => Some(Side::XLo),
                    (_, None) => Some(Side::XHi),
                    _ => None,
                };
                let idx = faces.len();
                if let Some(k) = minus {
                    cell_faces[k][1] = idx;
                }
                if let Some(k) = plus {
                    cell_faces[k][0] = idx;
                }
                faces.push(Face { axis: 0, minus, plus, position: lo[0] + i as f64 * h[0], boundary });
            }
        }
        if dim == 2 {
            for l in 0..=q {
                for j in 0..p {
                    let minus = (l > 0).then(|| j + p * (l - 1));
                    let plus = (l < q).then(|| j + p * l);
                    let boundary = match (minus, plus) {
                        (None, _) => Some(Side::YLo),
                        (_, None) => Some(Side::YHi),
                        _ => None,
                    };
                    let idx = faces.len();
                    if let Some(k) = minus {
                        cell_faces[k][3] = idx;
                    }
                    if let Some(k) = plus {
                        cell_faces[k][2] = idx;
                    }
                    faces.push(Face {
                        axis: 1,
                        minus,
                        plus,
                        position: lo[1] + l as f64 * h[1],
                        boundary,
                    });
                }
            }
        }
        Self { dim, cells, lo, h, faces, cell_faces }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_cells(&self) -> usize {
        self.cells[0] * self.cells[1]
    }

    /// Cells per axis (`[N, 1]` in 1D).
    pub fn cells_per_axis(&self) -> [usize; 2] {
        self.cells
    }

    pub fn lower(&self) -> Point {
        self.lo
    }

    pub fn upper(&self) -> Point {
        [
            self.lo[0] + self.cells[0] as f64 * self.h[0],
            if self.dim == 2 { self.lo[1] + self.cells[1] as f64 * self.h[1] } else { 0.0 },
        ]
    }

    /// Cell size along `axis`.
    pub fn h(&self, axis: usize) -> f64 {
        self.h[axis]
    }

    pub fn sizes(&self) -> [f64; 2] {
        self.h
    }

    pub fn cell_measure(&self) -> f64 {
        if self.dim == 1 {
            self.h[0]
        } else {
            self.h[0] * self.h[1]
        }
    }

    pub fn domain_measure(&self) -> f64 {
        self.cell_measure() * self.num_cells() as f64
    }

    pub fn num_local_faces(&self) -> usize {
        2 * self.dim
    }

    pub fn cell_index(&self, j: usize, l: usize) -> usize {
        j + self.cells[0] * l
    }

    pub fn cell_coords(&self, k: usize) -> (usize, usize) {
        (k % self.cells[0], k / self.cells[0])
    }

    pub fn check_cell(&self, k: usize) -> Result<()> {
        if k < self.num_cells() {
            Ok(())
        } else {
            Err(Error::CellOutOfRange { index: k, cells: self.num_cells() })
        }
    }

    pub fn cell_center(&self, k: usize) -> Point {
        let (j, l) = self.cell_coords(k);
        let cx = self.lo[0] + (j as f64 + 0.5) * self.h[0];
        let cy = if self.dim == 2 { self.lo[1] + (l as f64 + 0.5) * self.h[1] } else { 0.0 };
        [cx, cy]
    }

    /// Image of a reference point `xi` in `[-1, 1]^dim` under the cell map.
    pub fn to_physical(&self, k: usize, xi: Point) -> Point {
        let c = self.cell_center(k);
        let mut x = [c[0] + 0.5 * self.h[0] * xi[0], 0.0];
        if self.dim == 2 {
            x[1] = c[1] + 0.5 * self.h[1] * xi[1];
        }
        x
    }

    pub fn to_reference(&self, k: usize, x: Point) -> Point {
        let c = self.cell_center(k);
        let mut xi = [2.0 * (x[0] - c[0]) / self.h[0], 0.0];
        if self.dim == 2 {
            xi[1] = 2.0 * (x[1] - c[1]) / self.h[1];
        }
        xi
    }

    /// Interface coordinates along `axis`, strictly increasing.
    pub fn interfaces(&self, axis: usize) -> Vec<f64> {
        (0..=self.cells[axis]).map(|i| self.lo[axis] + i as f64 * self.h[axis]).collect()
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, idx: usize) -> &Face {
        &self.faces[idx]
    }

    pub fn interior_faces(&self) -> impl Iterator<Item = (usize, &Face)> {
        self.faces.iter().enumerate().filter(|(_, f)| f.is_interior())
    }

    pub fn boundary_faces(&self) -> impl Iterator<Item = (usize, &Face)> {
        self.faces.iter().enumerate().filter(|(_, f)| !f.is_interior())
    }

    pub fn num_interior_faces(&self) -> usize {
        self.faces.iter().filter(|f| f.is_interior()).count()
    }

    /// Global face index of local face `lf` of cell `k`.
    pub fn cell_face(&self, k: usize, lf: usize) -> usize {
        self.cell_faces[k][lf]
    }

    /// Neighbor across local face `lf`, if any.
    pub fn neighbor(&self, k: usize, lf: usize) -> Option<usize> {
        let f = &self.faces[self.cell_faces[k][lf]];
        if f.minus == Some(k) {
            f.plus
        } else {
            f.minus
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_interval_ten_cells() {
        let m = Mesh::interval(0.0, 1.0, 10).unwrap();
        assert!((m.h(0) - 0.1).abs() < 1e-15);
        let xs = m.interfaces(0);
        assert_eq!(xs.len(), 11);
        for (i, x) in xs.iter().enumerate() {
            assert!((x - 0.1 * i as f64).abs() < 1e-14);
        }
        for w in xs.windows(2) {
            assert!(w[1] > w[0]);
            assert!((w[1] - w[0] - m.h(0)).abs() < 1e-14);
        }
    }

    #[test]
    fn pi_interval() {
        let m = Mesh::interval(0.0, std::f64::consts::PI, 10).unwrap();
        assert!((m.h(0) - 0.314159).abs() < 1e-6);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(Mesh::interval(0.0, 1.0, 1).is_err());
        assert!(Mesh::interval(1.0, 1.0, 4).is_err());
        assert!(Mesh::rectangle(0.0, 1.0, 4, 4).is_err());
        assert!(Mesh::rectangle(1.0, 1.0, 1, 4).is_err());
    }

    #[test]
    fn rectangle_face_counts() {
        let m = Mesh::rectangle(1.0, 1.0, 20, 20).unwrap();
        assert_eq!(m.num_cells(), 400);
        assert_eq!(m.num_interior_faces(), 760);
        let m = Mesh::rectangle(1.0, 1.0, 2, 2).unwrap();
        assert_eq!(m.num_cells(), 4);
        assert_eq!(m.num_interior_faces(), 4);
        let m = Mesh::rectangle(std::f64::consts::PI, std::f64::consts::PI, 10, 10).unwrap();
        assert!((m.h(0) - std::f64::consts::PI / 10.0).abs() < 1e-15);
        assert!((m.h(1) - std::f64::consts::PI / 10.0).abs() < 1e-15);
        let m = Mesh::rectangle(2.0, 1.0, 3, 5).unwrap();
        assert_eq!(m.num_interior_faces(), 2 * 5 + 3 * 4);
        assert_eq!(m.boundary_faces().count(), 2 * 5 + 2 * 3);
    }

    #[test]
    fn neighbor_relation_is_involutive() {
        for m in [Mesh::interval(0.0, 2.0, 7).unwrap(), Mesh::rectangle(1.0, 2.0, 4, 3).unwrap()] {
            for k in 0..m.num_cells() {
                for lf in 0..m.num_local_faces() {
                    if let Some(nb) = m.neighbor(k, lf) {
                        let back = lf ^ 1;
                        assert_eq!(m.neighbor(nb, back), Some(k));
                        assert_eq!(m.cell_face(k, lf), m.cell_face(nb, back));
                    } else {
                        let f = m.face(m.cell_face(k, lf));
                        assert_eq!(f.boundary, Some(Side::from_local_face(lf)));
                    }
                }
            }
        }
    }

    #[test]
    fn interior_faces_have_two_cells() {
        let m = Mesh::rectangle(1.0, 1.0, 3, 4).unwrap();
        for (_, f) in m.interior_faces() {
            let (a, b) = (f.minus.unwrap(), f.plus.unwrap());
            let ca = m.cell_center(a);
            let cb = m.cell_center(b);
            assert!((cb[f.axis] - ca[f.axis] - m.h(f.axis)).abs() < 1e-14);
        }
    }

    #[test]
    fn cells_tile_domain() {
        let m = Mesh::rectangle(2.0, 3.0, 4, 6).unwrap();
        let total: f64 = (0..m.num_cells()).map(|_| m.cell_measure()).sum();
        assert!((total - 6.0).abs() < 1e-13);
        assert_eq!(m.upper(), [2.0, 3.0]);
    }

    #[test]
    fn affine_map_roundtrip() {
        let m = Mesh::rectangle(1.3, 0.7, 5, 3).unwrap();
        for k in 0..m.num_cells() {
            for xi in [[-1.0, -1.0], [0.3, -0.9], [1.0, 0.25]] {
                let back = m.to_reference(k, m.to_physical(k, xi));
                assert!((back[0] - xi[0]).abs() < 1e-14 && (back[1] - xi[1]).abs() < 1e-14);
            }
        }
    }
}
