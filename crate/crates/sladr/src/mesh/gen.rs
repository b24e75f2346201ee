//! Deterministic triangular mesh generators for rectangles and for a
//! rectangular channel with a circular obstacle.

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::mesh::tri::TriMesh;

/// Triangulate the rectangle `bounds` so that every edge is at most
/// `target_h` long. Each grid cell is split along its (+,+) diagonal, so
/// the result is a 2*nx*ny triangulation.
pub fn gen_square_trimesh(bounds: ((f64, f64), (f64, f64)), target_h: f64) -> Result<TriMesh> {
    let ((xmin, xmax), (ymin, ymax)) = bounds;
    let w = xmax - xmin;
    let h = ymax - ymin;
    if !(w > 0.0 && h > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "degenerate rectangle ({xmin},{xmax})x({ymin},{ymax})"
        )));
    }
    if !(target_h > 0.0) || target_h > w.hypot(h) {
        return Err(Error::InvalidConfig(format!(
            "target edge length {target_h} is invalid for a {w}x{h} rectangle"
        )));
    }
    // Cell diagonals are the longest edges: dx, dy <= target_h / sqrt(2)
    // keeps every edge within the bound.
    let nx = ((w * std::f64::consts::SQRT_2) / target_h).ceil() as usize;
    let ny = ((h * std::f64::consts::SQRT_2) / target_h).ceil() as usize;
    let (vertices, triangles) = split_grid(xmin, ymin, w / nx as f64, h / ny as f64, nx, ny);
    TriMesh::from_raw(vertices, triangles)
}

/// Triangulate `bounds` minus the disk of radius `hole_r` centered at
/// `hole_center`. The circle is polygonalized by snapping the vertices of
/// the removed region onto it.
pub fn gen_channel_trimesh(
    bounds: ((f64, f64), (f64, f64)),
    hole_center: Point,
    hole_r: f64,
    target_h: f64,
) -> Result<TriMesh> {
    let ((xmin, xmax), (ymin, ymax)) = bounds;
    let w = xmax - xmin;
    let h = ymax - ymin;
    if !(hole_r > 0.0) || !(target_h > 0.0) {
        return Err(Error::InvalidConfig(
            "hole radius and target edge length must be positive".into(),
        ));
    }
    let nx = ((w * std::f64::consts::SQRT_2) / target_h).ceil() as usize;
    let ny = ((h * std::f64::consts::SQRT_2) / target_h).ceil() as usize;
    let (mut vertices, triangles) = split_grid(xmin, ymin, w / nx as f64, h / ny as f64, nx, ny);

    // Drop every triangle that meets the open disk.
    let keep: Vec<bool> = triangles
        .iter()
        .map(|t| {
            let d = dist_point_triangle(
                hole_center,
                vertices[t[0]],
                vertices[t[1]],
                vertices[t[2]],
            );
            d >= hole_r - 1e-12
        })
        .collect();

    // Vertices on the cut frontier (used by both kept and dropped
    // triangles) get pulled onto the circle.
    let mut on_kept = vec![false; vertices.len()];
    let mut on_dropped = vec![false; vertices.len()];
    for (t, tri) in triangles.iter().enumerate() {
        for &v in tri {
            if keep[t] {
                on_kept[v] = true;
            } else {
                on_dropped[v] = true;
            }
        }
    }
    for (v, coord) in vertices.iter_mut().enumerate() {
        if on_kept[v] && on_dropped[v] {
            let r = coord.dist(hole_center);
            if r > 1e-14 {
                *coord = hole_center + (*coord - hole_center) * (hole_r / r);
            }
        }
    }

    // Compact the surviving triangulation.
    let mut vertex_map = vec![usize::MAX; vertices.len()];
    let mut new_vertices = Vec::new();
    let mut new_triangles = Vec::new();
    for (t, tri) in triangles.iter().enumerate() {
        if !keep[t] {
            continue;
        }
        let mut ids = [0usize; 3];
        for (k, &v) in tri.iter().enumerate() {
            if vertex_map[v] == usize::MAX {
                vertex_map[v] = new_vertices.len();
                new_vertices.push(vertices[v]);
            }
            ids[k] = vertex_map[v];
        }
        new_triangles.push(ids);
    }
    TriMesh::from_raw(new_vertices, new_triangles)
}

fn split_grid(
    xmin: f64,
    ymin: f64,
    dx: f64,
    dy: f64,
    nx: usize,
    ny: usize,
) -> (Vec<Point>, Vec<[usize; 3]>) {
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Point::new(xmin + i as f64 * dx, ymin + j as f64 * dy));
        }
    }
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    (vertices, triangles)
}

fn dist_point_triangle(p: Point, a: Point, b: Point, c: Point) -> f64 {
    let bary_inside = {
        let det = crate::geom::signed_area_x2(a, b, c);
        let l0 = crate::geom::signed_area_x2(p, b, c) / det;
        let l1 = crate::geom::signed_area_x2(a, p, c) / det;
        let l2 = 1.0 - l0 - l1;
        l0 >= 0.0 && l1 >= 0.0 && l2 >= 0.0
    };
    if bary_inside {
        return 0.0;
    }
    [(a, b), (b, c), (c, a)]
        .iter()
        .map(|&(u, v)| p.dist(crate::geom::closest_point_on_segment(p, u, v)))
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_with_cell_diagonal_target() {
        let n = 8usize;
        let target = std::f64::consts::SQRT_2 / n as f64;
        let m = gen_square_trimesh(((0.0, 1.0), (0.0, 1.0)), target).unwrap();
        assert_eq!(m.triangles.len(), 2 * n * n);
    }

    #[test]
    fn area_conserved_and_edges_bounded() {
        let m = gen_square_trimesh(((-2.0, 2.0), (-2.0, 2.0)), 0.04).unwrap();
        assert!((m.total_area() - 16.0).abs() < 1e-10 * 16.0);
        assert!(m.max_edge_len() <= 0.04 + 1e-12);
    }

    #[test]
    fn degenerate_bounds_error() {
        assert!(gen_square_trimesh(((0.0, 0.0), (0.0, 1.0)), 0.1).is_err());
        assert!(gen_square_trimesh(((0.0, 1.0), (0.0, 1.0)), 10.0).is_err());
    }

    #[test]
    fn channel_mesh_avoids_hole_and_keeps_area() {
        let center = Point::new(0.1, 0.2);
        let r = 0.05;
        let m = gen_channel_trimesh(((0.0, 1.0), (0.0, 0.4)), center, r, 0.025).unwrap();
        // No vertex strictly inside the hole.
        for v in &m.vertices {
            assert!(v.dist(center) >= r - 1e-9);
        }
        // Area close to the rectangle minus the disk (polygonalization
        // leaves the chord slivers inside the domain).
        let area = m.total_area();
        let exact = 0.4 - std::f64::consts::PI * r * r;
        assert!((area - exact).abs() < 4.0 * r * 0.025, "area {area} vs {exact}");
        // The hole contributes a second boundary loop.
        let on_circle = m
            .boundary_edges
            .iter()
            .filter(|&&e| {
                let (a, b) = m.edges[e];
                m.vertices[a].dist(center) < r + 1e-9 && m.vertices[b].dist(center) < r + 1e-9
            })
            .count();
        assert!(on_circle >= 6, "only {on_circle} boundary edges on the hole");
    }
}
