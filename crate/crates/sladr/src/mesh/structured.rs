//! Uniform Cartesian grids, periodic or bounded.

use crate::error::{Error, Result};
use crate::geom::Point;

/// Uniform Cartesian grid on `[xmin, xmax] x [ymin, ymax]` with `nx x ny`
/// cells. On periodic axes the last node row/column is identified with the
/// first, so the dof count per axis equals the cell count; otherwise it is
/// the cell count plus one.
#[derive(Clone, Debug)]
pub struct StructuredGrid {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub periodic_x: bool,
    pub periodic_y: bool,
}

impl StructuredGrid {
    pub fn new(
        (xmin, xmax): (f64, f64),
        (ymin, ymax): (f64, f64),
        nx: usize,
        ny: usize,
        periodic: bool,
    ) -> Result<Self> {
        if !(xmax > xmin && ymax > ymin) || nx == 0 || ny == 0 {
            return Err(Error::InvalidConfig(format!(
                "degenerate grid ({xmin},{xmax})x({ymin},{ymax}) with {nx}x{ny} cells"
            )));
        }
        Ok(Self {
            xmin,
            xmax,
            ymin,
            ymax,
            nx,
            ny,
            dx: (xmax - xmin) / nx as f64,
            dy: (ymax - ymin) / ny as f64,
            periodic_x: periodic,
            periodic_y: periodic,
        })
    }

    /// Number of distinct dof columns.
    pub fn dofs_x(&self) -> usize {
        if self.periodic_x {
            self.nx
        } else {
            self.nx + 1
        }
    }

    /// Number of distinct dof rows.
    pub fn dofs_y(&self) -> usize {
        if self.periodic_y {
            self.ny
        } else {
            self.ny + 1
        }
    }

    pub fn n_dofs(&self) -> usize {
        self.dofs_x() * self.dofs_y()
    }

    pub fn dof_index(&self, i: usize, j: usize) -> usize {
        j * self.dofs_x() + i
    }

    pub fn dof_coord(&self, dof: usize) -> Point {
        let i = dof % self.dofs_x();
        let j = dof / self.dofs_x();
        Point::new(
            self.xmin + i as f64 * self.dx,
            self.ymin + j as f64 * self.dy,
        )
    }

    pub fn dof_coords(&self) -> Vec<Point> {
        (0..self.n_dofs()).map(|d| self.dof_coord(d)).collect()
    }

    /// True when the dof sits on a non-periodic outer boundary.
    pub fn is_boundary_dof(&self, dof: usize) -> bool {
        let i = dof % self.dofs_x();
        let j = dof / self.dofs_x();
        (!self.periodic_x && (i == 0 || i == self.nx))
            || (!self.periodic_y && (j == 0 || j == self.ny))
    }

    /// Reduce a coordinate into the fundamental domain along periodic axes.
    pub fn wrap(&self, p: Point) -> Point {
        let mut q = p;
        if self.periodic_x {
            let lx = self.xmax - self.xmin;
            q.x = (q.x - self.xmin).rem_euclid(lx) + self.xmin;
        }
        if self.periodic_y {
            let ly = self.ymax - self.ymin;
            q.y = (q.y - self.ymin).rem_euclid(ly) + self.ymin;
        }
        q
    }

    /// Containment test with a small tolerance on non-periodic axes.
    pub fn contains(&self, p: Point) -> bool {
        let tol_x = 1e-12 * (self.xmax - self.xmin);
        let tol_y = 1e-12 * (self.ymax - self.ymin);
        (self.periodic_x || (p.x >= self.xmin - tol_x && p.x <= self.xmax + tol_x))
            && (self.periodic_y || (p.y >= self.ymin - tol_y && p.y <= self.ymax + tol_y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_coordinates_and_counts() {
        let g = StructuredGrid::new((-2.0, 2.0), (-2.0, 2.0), 50, 50, false).unwrap();
        assert_eq!(g.n_dofs(), 51 * 51);
        assert!((g.dx - 0.08).abs() < 1e-15);
        let p = g.dof_coord(g.dof_index(1, 2));
        assert!((p.x - (-2.0 + 0.08)).abs() < 1e-14);
        assert!((p.y - (-2.0 + 0.16)).abs() < 1e-14);
    }

    #[test]
    fn periodic_identifies_last_node() {
        let g = StructuredGrid::new((0.0, 1.0), (0.0, 1.0), 8, 8, true).unwrap();
        assert_eq!(g.n_dofs(), 64);
        let w = g.wrap(Point::new(1.25, -0.125));
        assert!((w.x - 0.25).abs() < 1e-14);
        assert!((w.y - 0.875).abs() < 1e-14);
    }

    #[test]
    fn degenerate_bounds_rejected() {
        assert!(StructuredGrid::new((0.0, 0.0), (0.0, 1.0), 4, 4, false).is_err());
    }
}
