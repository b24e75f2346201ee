//! Unstructured triangular meshes with quadratic (vertex + edge midpoint)
//! degrees of freedom, point location and boundary projection.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geom::{closest_point_on_segment, signed_area_x2, Point};

/// Slack allowed on barycentric sign tests; absorbs floating point noise
/// for query points sitting on element edges.
pub const TOL_LOC: f64 = 1e-10;

/// Result of point location.
#[derive(Clone, Copy, Debug)]
pub enum Location {
    Inside { tri: usize, bary: [f64; 3] },
    Outside,
}

#[derive(Clone, Debug)]
struct Bins {
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
    inv_hx: f64,
    inv_hy: f64,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<u32>>,
}

impl Bins {
    fn cell_of(&self, p: Point) -> Option<usize> {
        let tol_x = 1e-12 * (self.xmax - self.xmin).abs().max(1.0);
        let tol_y = 1e-12 * (self.ymax - self.ymin).abs().max(1.0);
        if p.x < self.xmin - tol_x
            || p.x > self.xmax + tol_x
            || p.y < self.ymin - tol_y
            || p.y > self.ymax + tol_y
        {
            return None;
        }
        let i = (((p.x - self.xmin) * self.inv_hx).floor() as isize).clamp(0, self.nx as isize - 1);
        let j = (((p.y - self.ymin) * self.inv_hy).floor() as isize).clamp(0, self.ny as isize - 1);
        Some(j as usize * self.nx + i as usize)
    }
}

/// Conforming triangulation of a polygonal domain. Triangles are stored
/// counterclockwise; every interior edge is shared by exactly two
/// triangles. Quadratic dofs are the vertices followed by the edge
/// midpoints.
#[derive(Clone, Debug)]
pub struct TriMesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    /// Unique edges as sorted vertex pairs.
    pub edges: Vec<(usize, usize)>,
    /// Edge ids per triangle, matching local edges (v0,v1), (v1,v2), (v2,v0).
    pub tri_edges: Vec<[usize; 3]>,
    /// Ids of edges with exactly one incident triangle.
    pub boundary_edges: Vec<usize>,
    /// Vertex coordinates followed by edge midpoints.
    pub dof_coords: Vec<Point>,
    bins: Bins,
}

impl TriMesh {
    pub fn from_raw(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::InvalidMesh("mesh has no triangles".into()));
        }
        let nv = vertices.len();
        let mut used = vec![false; nv];
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= nv {
                    return Err(Error::InvalidMesh(format!(
                        "triangle {t} references vertex {v} out of {nv}"
                    )));
                }
                used[v] = true;
            }
            let area2 = signed_area_x2(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if area2 <= 0.0 {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} is degenerate or negatively oriented (2*area = {area2:e})"
                )));
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::InvalidMesh(format!(
                "vertex {v} is not referenced by any triangle"
            )));
        }

        // Unique edges shared between neighbours.
        let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<(usize, usize)> = Vec::new();
        let mut edge_count: Vec<u32> = Vec::new();
        let mut tri_edges = Vec::with_capacity(triangles.len());
        for tri in &triangles {
            let mut ids = [0usize; 3];
            for (e, &(a, b)) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])]
                .iter()
                .enumerate()
            {
                let key = (a.min(b), a.max(b));
                let id = *edge_ids.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_count.push(0);
                    edges.len() - 1
                });
                edge_count[id] += 1;
                ids[e] = id;
            }
            tri_edges.push(ids);
        }
        for (id, &c) in edge_count.iter().enumerate() {
            if c > 2 {
                return Err(Error::InvalidMesh(format!(
                    "edge {id} is shared by {c} triangles"
                )));
            }
        }
        let boundary_edges: Vec<usize> = edge_count
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == 1)
            .map(|(id, _)| id)
            .collect();

        let mut dof_coords = vertices.clone();
        dof_coords.extend(
            edges
                .iter()
                .map(|&(a, b)| (vertices[a] + vertices[b]) * 0.5),
        );

        let bins = build_bins(&vertices, &triangles);

        Ok(Self {
            vertices,
            triangles,
            edges,
            tri_edges,
            boundary_edges,
            dof_coords,
            bins,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Total quadratic dof count (vertices + edge midpoints).
    pub fn n_p2_dofs(&self) -> usize {
        self.dof_coords.len()
    }

    /// Global dof ids of a triangle's quadratic nodes: three vertices then
    /// the midpoints of edges (v0,v1), (v1,v2), (v2,v0).
    pub fn p2_dofs(&self, tri: usize) -> [usize; 6] {
        let t = self.triangles[tri];
        let e = self.tri_edges[tri];
        let nv = self.vertices.len();
        [t[0], t[1], t[2], nv + e[0], nv + e[1], nv + e[2]]
    }

    pub fn barycentric(&self, tri: usize, p: Point) -> [f64; 3] {
        let [a, b, c] = self.triangles[tri];
        let (va, vb, vc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        let det = signed_area_x2(va, vb, vc);
        let l0 = signed_area_x2(p, vb, vc) / det;
        let l1 = signed_area_x2(va, p, vc) / det;
        [l0, l1, 1.0 - l0 - l1]
    }

    /// Locate the triangle containing `p`, with barycentric coordinates
    /// allowed down to `-TOL_LOC`.
    pub fn locate(&self, p: Point) -> Location {
        let Some(cell) = self.bins.cell_of(p) else {
            return Location::Outside;
        };
        let mut best: Option<(f64, usize, [f64; 3])> = None;
        for &t in &self.bins.cells[cell] {
            let bary = self.barycentric(t as usize, p);
            let min_l = bary[0].min(bary[1]).min(bary[2]);
            if min_l >= -TOL_LOC {
                return Location::Inside {
                    tri: t as usize,
                    bary,
                };
            }
            // Track the least-bad candidate in case p sits in a sliver of
            // floating point noise between two bins' triangles.
            if best.map_or(true, |(m, _, _)| min_l > m) {
                best = Some((min_l, t as usize, bary));
            }
        }
        match best {
            Some((min_l, t, bary)) if min_l >= -10.0 * TOL_LOC => Location::Inside { tri: t, bary },
            _ => Location::Outside,
        }
    }

    /// Nearest point on the boundary polyline; ties resolved towards the
    /// lowest edge id by scanning in id order with strict improvement.
    pub fn project_onto_domain(&self, p: Point) -> Result<Point> {
        if self.boundary_edges.is_empty() {
            return Err(Error::EmptyBoundary);
        }
        let mut best = f64::INFINITY;
        let mut best_point = p;
        for &e in &self.boundary_edges {
            let (a, b) = self.edges[e];
            let q = closest_point_on_segment(p, self.vertices[a], self.vertices[b]);
            let d = p.dist(q);
            if d < best {
                best = d;
                best_point = q;
            }
        }
        Ok(best_point)
    }

    pub fn max_edge_len(&self) -> f64 {
        self.edges
            .iter()
            .map(|&(a, b)| self.vertices[a].dist(self.vertices[b]))
            .fold(0.0, f64::max)
    }

    pub fn total_area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| 0.5 * signed_area_x2(self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]))
            .sum()
    }

    /// One flag per quadratic dof: true when the dof lies on the boundary.
    pub fn boundary_dof_flags(&self) -> Vec<bool> {
        let nv = self.vertices.len();
        let mut flags = vec![false; self.n_p2_dofs()];
        for &e in &self.boundary_edges {
            let (a, b) = self.edges[e];
            flags[a] = true;
            flags[b] = true;
            flags[nv + e] = true;
        }
        flags
    }
}

fn build_bins(vertices: &[Point], triangles: &[[usize; 3]]) -> Bins {
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for v in vertices {
        xmin = xmin.min(v.x);
        xmax = xmax.max(v.x);
        ymin = ymin.min(v.y);
        ymax = ymax.max(v.y);
    }
    let mut max_edge: f64 = 0.0;
    for t in triangles {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            max_edge = max_edge.max(vertices[a].dist(vertices[b]));
        }
    }
    // Bin size about twice the longest edge keeps candidate lists short.
    let h = (2.0 * max_edge).max(1e-12);
    let nx = (((xmax - xmin) / h).ceil() as usize).max(1);
    let ny = (((ymax - ymin) / h).ceil() as usize).max(1);
    let inv_hx = nx as f64 / (xmax - xmin);
    let inv_hy = ny as f64 / (ymax - ymin);
    let mut cells = vec![Vec::new(); nx * ny];
    for (t, tri) in triangles.iter().enumerate() {
        let (va, vb, vc) = (vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
        let txmin = va.x.min(vb.x).min(vc.x);
        let txmax = va.x.max(vb.x).max(vc.x);
        let tymin = va.y.min(vb.y).min(vc.y);
        let tymax = va.y.max(vb.y).max(vc.y);
        let i0 = (((txmin - xmin) * inv_hx).floor() as isize).clamp(0, nx as isize - 1) as usize;
        let i1 = (((txmax - xmin) * inv_hx).floor() as isize).clamp(0, nx as isize - 1) as usize;
        let j0 = (((tymin - ymin) * inv_hy).floor() as isize).clamp(0, ny as isize - 1) as usize;
        let j1 = (((tymax - ymin) * inv_hy).floor() as isize).clamp(0, ny as isize - 1) as usize;
        for j in j0..=j1 {
            for i in i0..=i1 {
                cells[j * nx + i].push(t as u32);
            }
        }
    }
    Bins {
        xmin,
        xmax,
        ymin,
        ymax,
        inv_hx,
        inv_hy,
        nx,
        ny,
        cells,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn split_square() -> TriMesh {
        let vertices = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        TriMesh::from_raw(vertices, vec![[0, 1, 2], [0, 2, 3]]).unwrap()
    }

    #[test]
    fn split_square_has_nine_p2_dofs() {
        let m = split_square();
        assert_eq!(m.edges.len(), 5);
        assert_eq!(m.n_p2_dofs(), 9);
        assert_eq!(m.boundary_edges.len(), 4);
    }

    #[test]
    fn centroid_locates_with_equal_barycentrics() {
        let m = split_square();
        let c = (m.vertices[0] + m.vertices[1] + m.vertices[2]) * (1.0 / 3.0);
        match m.locate(c) {
            Location::Inside { tri, bary } => {
                assert_eq!(tri, 0);
                for l in bary {
                    assert!((l - 1.0 / 3.0).abs() < 1e-14);
                }
            }
            Location::Outside => panic!("centroid not located"),
        }
    }

    #[test]
    fn vertex_locates_with_unit_barycentric() {
        let m = split_square();
        match m.locate(Point::new(1.0, 0.0)) {
            Location::Inside { bary, .. } => {
                assert!(bary.iter().any(|&l| (l - 1.0).abs() < 1e-12));
            }
            Location::Outside => panic!("vertex not located"),
        }
    }

    #[test]
    fn far_point_is_outside() {
        let m = split_square();
        assert!(matches!(m.locate(Point::new(5.0, 5.0)), Location::Outside));
    }

    #[test]
    fn projection_onto_square_boundary() {
        let m = split_square();
        let q = m.project_onto_domain(Point::new(1.2, 0.3)).unwrap();
        assert!((q.x - 1.0).abs() < 1e-14 && (q.y - 0.3).abs() < 1e-14);
        let corner = m.project_onto_domain(Point::new(1.2, 1.2)).unwrap();
        assert!((corner.x - 1.0).abs() < 1e-14 && (corner.y - 1.0).abs() < 1e-14);
        let on = m.project_onto_domain(Point::new(0.5, 0.0)).unwrap();
        assert!(on.dist(Point::new(0.5, 0.0)) < 1e-14);
    }

    #[test]
    fn interior_points_locate_and_reconstruct() {
        use rand::{Rng, SeedableRng};
        let m = crate::mesh::gen::gen_square_trimesh(((-1.0, 1.0), (-1.0, 1.0)), 0.21).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let p = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            match m.locate(p) {
                Location::Inside { tri, bary } => {
                    let t = m.triangles[tri];
                    let mut q = Point::new(0.0, 0.0);
                    for k in 0..3 {
                        q = q + m.vertices[t[k]] * bary[k];
                    }
                    assert!(q.dist(p) <= 1e-12 * (1.0 + p.norm()), "reconstruction at {p:?}");
                }
                Location::Outside => panic!("interior point {p:?} not located"),
            }
        }
    }

    #[test]
    fn projection_is_no_farther_than_any_boundary_sample() {
        use rand::{Rng, SeedableRng};
        let m = crate::mesh::gen::gen_square_trimesh(((-1.0, 1.0), (-1.0, 1.0)), 0.3).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        // Exterior query points against 1000 random boundary samples.
        for _ in 0..50 {
            let p = Point::new(rng.gen_range(1.0..3.0), rng.gen_range(-3.0..3.0));
            let proj = m.project_onto_domain(p).unwrap();
            let d = p.dist(proj);
            for _ in 0..20 {
                let &e = &m.boundary_edges[rng.gen_range(0..m.boundary_edges.len())];
                let (a, b) = m.edges[e];
                let t: f64 = rng.gen_range(0.0..1.0);
                let q = m.vertices[a] + (m.vertices[b] - m.vertices[a]) * t;
                assert!(d <= p.dist(q) + 1e-12);
            }
        }
    }

    #[test]
    fn inverted_triangle_rejected() {
        let vertices = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        let err = TriMesh::from_raw(vertices, vec![[0, 2, 1]]).unwrap_err();
        assert!(err.to_string().contains("triangle 0"));
    }

    #[test]
    fn dangling_vertex_rejected() {
        let vertices = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(5.0, 5.0),
        ];
        assert!(TriMesh::from_raw(vertices, vec![[0, 1, 2]]).is_err());
    }
}
