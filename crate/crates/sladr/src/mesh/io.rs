//! Text mesh reader.
//!
//! Format: first non-comment line `NV NT`, then NV lines `x y`, then NT
//! lines `i j k` with 0-based counterclockwise vertex indices. Lines
//! starting with `#` are comments.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::mesh::tri::TriMesh;

pub fn read_trimesh(path: &Path) -> Result<TriMesh> {
    let text = std::fs::read_to_string(path)?;
    parse_trimesh(&text, &path.display().to_string())
}

pub fn parse_trimesh(text: &str, path: &str) -> Result<TriMesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let err = |line: usize, msg: String| Error::MeshParse {
        path: path.to_string(),
        line,
        msg,
    };

    let (line, header) = lines
        .next()
        .ok_or_else(|| err(0, "empty mesh file".into()))?;
    let mut it = header.split_whitespace();
    let nv: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| err(line, "expected vertex count".into()))?;
    let nt: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| err(line, "expected triangle count".into()))?;
    if nt == 0 {
        return Err(err(line, "mesh has no triangles".into()));
    }

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, l) = lines
            .next()
            .ok_or_else(|| err(0, format!("expected {nv} vertex lines")))?;
        let mut it = l.split_whitespace();
        let x: f64 = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err(line, "expected x coordinate".into()))?;
        let y: f64 = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err(line, "expected y coordinate".into()))?;
        vertices.push(Point::new(x, y));
    }

    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (line, l) = lines
            .next()
            .ok_or_else(|| err(0, format!("expected {nt} triangle lines")))?;
        let mut ids = [0usize; 3];
        let mut it = l.split_whitespace();
        for slot in &mut ids {
            *slot = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| err(line, "expected vertex index".into()))?;
        }
        triangles.push(ids);
    }

    TriMesh::from_raw(vertices, triangles)
}
