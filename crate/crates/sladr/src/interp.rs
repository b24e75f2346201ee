//! Polynomial interpolation operators.
//!
//! Three two-dimensional kinds are provided: tensor-product cubic Lagrange
//! on uniform grids (4x4 stencil), and linear / quadratic Lagrange on
//! triangulations. A one-dimensional periodic cubic interpolant backs the
//! stability analysis helpers, together with the assembly of the matrix
//! `B` with entries `b_ij = psi_j(z(x_i))` for a set of interpolation
//! points `z(x_i)`.
//!
//! Every kind reproduces polynomials up to its degree exactly; near
//! non-periodic edges the cubic stencil is shifted one-sidedly so the
//! order is retained without ghost values.

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::mesh::tri::{Location, TriMesh};
use crate::mesh::StructuredGrid;

/// Dof ids and weights resolving one evaluation point. Applying the
/// stencil to different species reuses the geometric work.
#[derive(Clone, Copy, Debug)]
pub struct Stencil {
    ids: [u32; 16],
    w: [f64; 16],
    len: u8,
}

impl Stencil {
    #[inline]
    pub fn apply(&self, values: &[f64]) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.len as usize {
            acc += self.w[k] * values[self.ids[k] as usize];
        }
        acc
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.len as usize).map(|k| (self.ids[k] as usize, self.w[k]))
    }
}

/// Interpolation operator bound to a mesh.
#[derive(Clone, Copy, Debug)]
pub enum Interpolator<'m> {
    /// Tensor-product cubic Lagrange on a uniform grid, degree 3.
    Bicubic(&'m StructuredGrid),
    /// Piecewise linear on triangles, degree 1 (monotone).
    TriP1(&'m TriMesh),
    /// Piecewise quadratic on triangles, degree 2.
    TriP2(&'m TriMesh),
}

impl<'m> Interpolator<'m> {
    pub fn degree(&self) -> usize {
        match self {
            Interpolator::Bicubic(_) => 3,
            Interpolator::TriP1(_) => 1,
            Interpolator::TriP2(_) => 2,
        }
    }

    pub fn n_dofs(&self) -> usize {
        match self {
            Interpolator::Bicubic(g) => g.n_dofs(),
            Interpolator::TriP1(m) => m.n_vertices(),
            Interpolator::TriP2(m) => m.n_p2_dofs(),
        }
    }

    pub fn dof_coords(&self) -> Vec<Point> {
        match self {
            Interpolator::Bicubic(g) => g.dof_coords(),
            Interpolator::TriP1(m) => m.vertices.clone(),
            Interpolator::TriP2(m) => m.dof_coords.clone(),
        }
    }

    /// Flags for dofs lying on a Dirichlet boundary.
    pub fn boundary_dof_flags(&self) -> Vec<bool> {
        match self {
            Interpolator::Bicubic(g) => (0..g.n_dofs()).map(|d| g.is_boundary_dof(d)).collect(),
            Interpolator::TriP1(m) => {
                let flags = m.boundary_dof_flags();
                flags[..m.n_vertices()].to_vec()
            }
            Interpolator::TriP2(m) => m.boundary_dof_flags(),
        }
    }

    pub fn trimesh(&self) -> Option<&'m TriMesh> {
        match self {
            Interpolator::Bicubic(_) => None,
            Interpolator::TriP1(m) | Interpolator::TriP2(m) => Some(m),
        }
    }

    pub fn grid(&self) -> Option<&'m StructuredGrid> {
        match self {
            Interpolator::Bicubic(g) => Some(g),
            _ => None,
        }
    }

    /// Reduce `p` into the fundamental domain on periodic grids.
    pub fn wrap(&self, p: Point) -> Point {
        match self {
            Interpolator::Bicubic(g) => g.wrap(p),
            _ => p,
        }
    }

    /// Build the stencil resolving `p`; `Err(OutsideDomain)` when `p` is
    /// not covered (the caller routes those through the boundary
    /// treatment).
    pub fn stencil(&self, p: Point) -> Result<Stencil> {
        match self {
            Interpolator::Bicubic(g) => bicubic_stencil(g, p),
            Interpolator::TriP1(m) => match m.locate(p) {
                Location::Inside { tri, bary } => {
                    let t = m.triangles[tri];
                    let mut s = Stencil {
                        ids: [0; 16],
                        w: [0.0; 16],
                        len: 3,
                    };
                    for k in 0..3 {
                        s.ids[k] = t[k] as u32;
                        s.w[k] = bary[k];
                    }
                    Ok(s)
                }
                Location::Outside => Err(Error::OutsideDomain { x: p.x, y: p.y }),
            },
            Interpolator::TriP2(m) => match m.locate(p) {
                Location::Inside { tri, bary } => {
                    let dofs = m.p2_dofs(tri);
                    let [l0, l1, l2] = bary;
                    let w = [
                        l0 * (2.0 * l0 - 1.0),
                        l1 * (2.0 * l1 - 1.0),
                        l2 * (2.0 * l2 - 1.0),
                        4.0 * l0 * l1,
                        4.0 * l1 * l2,
                        4.0 * l2 * l0,
                    ];
                    let mut s = Stencil {
                        ids: [0; 16],
                        w: [0.0; 16],
                        len: 6,
                    };
                    for k in 0..6 {
                        s.ids[k] = dofs[k] as u32;
                        s.w[k] = w[k];
                    }
                    Ok(s)
                }
                Location::Outside => Err(Error::OutsideDomain { x: p.x, y: p.y }),
            },
        }
    }

    /// Evaluate the interpolant of one species' dof values at `p`.
    pub fn eval(&self, values: &[f64], p: Point) -> Result<f64> {
        Ok(self.stencil(self.wrap(p))?.apply(values))
    }
}

/// Lagrange basis on four equidistant nodes {0,1,2,3} evaluated at `xi`.
#[inline]
fn cubic_weights(xi: f64) -> [f64; 4] {
    let a = xi - 1.0;
    let b = xi - 2.0;
    let c = xi - 3.0;
    [
        -a * b * c / 6.0,
        xi * b * c / 2.0,
        -xi * a * c / 2.0,
        xi * a * b / 6.0,
    ]
}

/// 1D stencil base index and local coordinate for one axis.
/// `m` is the dof count; periodic axes wrap, bounded axes clamp the
/// 4-point stencil one-sidedly.
#[inline]
fn axis_stencil(x: f64, xmin: f64, dx: f64, n_cells: usize, m: usize, periodic: bool) -> (isize, f64) {
    let s = (x - xmin) / dx;
    let cell = (s.floor() as isize).clamp(0, n_cells as isize - 1);
    if periodic {
        let base = cell - 1;
        (base, s - base as f64)
    } else {
        let base = (cell - 1).clamp(0, m as isize - 4);
        (base, s - base as f64)
    }
}

fn bicubic_stencil(g: &StructuredGrid, p: Point) -> Result<Stencil> {
    let p = g.wrap(p);
    if !g.contains(p) {
        return Err(Error::OutsideDomain { x: p.x, y: p.y });
    }
    let mx = g.dofs_x();
    let my = g.dofs_y();
    let (bx, xix) = axis_stencil(p.x, g.xmin, g.dx, g.nx, mx, g.periodic_x);
    let (by, xiy) = axis_stencil(p.y, g.ymin, g.dy, g.ny, my, g.periodic_y);
    let wx = cubic_weights(xix);
    let wy = cubic_weights(xiy);
    let mut s = Stencil {
        ids: [0; 16],
        w: [0.0; 16],
        len: 16,
    };
    let mut k = 0;
    for b in 0..4 {
        let j = wrap_index(by + b as isize, my, g.periodic_y);
        for a in 0..4 {
            let i = wrap_index(bx + a as isize, mx, g.periodic_x);
            s.ids[k] = (j * mx + i) as u32;
            s.w[k] = wx[a] * wy[b];
            k += 1;
        }
    }
    Ok(s)
}

#[inline]
fn wrap_index(i: isize, m: usize, periodic: bool) -> usize {
    if periodic {
        i.rem_euclid(m as isize) as usize
    } else {
        debug_assert!(i >= 0 && (i as usize) < m);
        i as usize
    }
}

// ---------------------------------------------------------------------
// One-dimensional periodic machinery used by the stability checks.
// ---------------------------------------------------------------------

/// Uniform periodic grid on `[xmin, xmin + len)` with `n` dofs.
#[derive(Clone, Copy, Debug)]
pub struct Grid1D {
    pub xmin: f64,
    pub len: f64,
    pub n: usize,
    pub dx: f64,
}

impl Grid1D {
    pub fn new(xmin: f64, len: f64, n: usize) -> Self {
        Self {
            xmin,
            len,
            n,
            dx: len / n as f64,
        }
    }

    pub fn node(&self, i: usize) -> f64 {
        self.xmin + i as f64 * self.dx
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }
}

/// Cardinal cubic stencil at `x` on a periodic grid: four node ids with
/// the Lagrange weights.
pub fn cubic1d_stencil(grid: &Grid1D, x: f64) -> ([usize; 4], [f64; 4]) {
    let s = ((x - grid.xmin).rem_euclid(grid.len)) / grid.dx;
    let cell = (s.floor() as isize).min(grid.n as isize - 1);
    let base = cell - 1;
    let w = cubic_weights(s - base as f64);
    let mut ids = [0usize; 4];
    for (a, id) in ids.iter_mut().enumerate() {
        *id = (base + a as isize).rem_euclid(grid.n as isize) as usize;
    }
    (ids, w)
}

pub fn cubic1d_eval(grid: &Grid1D, values: &[f64], x: f64) -> f64 {
    let (ids, w) = cubic1d_stencil(grid, x);
    ids.iter().zip(w).map(|(&i, w)| w * values[i]).sum()
}

/// Sparse interpolation matrix with four entries per row:
/// row `i` holds the cardinal basis values at the point `feet[i]`.
#[derive(Clone, Debug)]
pub struct InterpMatrix {
    pub n: usize,
    rows: Vec<[(usize, f64); 4]>,
}

pub fn assemble_interp_matrix_1d(grid: &Grid1D, feet: &[f64]) -> InterpMatrix {
    assert_eq!(feet.len(), grid.n);
    let rows = feet
        .iter()
        .map(|&z| {
            let (ids, w) = cubic1d_stencil(grid, z);
            [
                (ids[0], w[0]),
                (ids[1], w[1]),
                (ids[2], w[2]),
                (ids[3], w[3]),
            ]
        })
        .collect();
    InterpMatrix { n: grid.n, rows }
}

impl InterpMatrix {
    pub fn matvec(&self, v: &[f64], out: &mut [f64]) {
        for (i, row) in self.rows.iter().enumerate() {
            out[i] = row.iter().map(|&(j, w)| w * v[j]).sum();
        }
    }

    pub fn matvec_transpose(&self, v: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, w) in row {
                out[j] += w * v[i];
            }
        }
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.rows[i].iter().map(|&(_, w)| w).sum()
    }

    /// Spectral norm via power iteration on `B^T B`.
    pub fn norm2(&self) -> f64 {
        let n = self.n;
        // Deterministic non-degenerate start vector.
        let mut v: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.37 * ((i * 2654435761 % 1000) as f64 / 1000.0))
            .collect();
        let mut bv = vec![0.0; n];
        let mut btbv = vec![0.0; n];
        let mut sigma2 = 0.0;
        for _ in 0..500 {
            let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= nv);
            self.matvec(&v, &mut bv);
            self.matvec_transpose(&bv, &mut btbv);
            let new_sigma2: f64 = v.iter().zip(&btbv).map(|(a, b)| a * b).sum();
            let done = (new_sigma2 - sigma2).abs() <= 1e-13 * new_sigma2.max(1.0);
            sigma2 = new_sigma2;
            std::mem::swap(&mut v, &mut btbv);
            if done {
                break;
            }
        }
        sigma2.max(0.0).sqrt()
    }
}
