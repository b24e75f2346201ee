//! Meshes: uniform Cartesian grids and unstructured triangulations with
//! quadratic dofs, plus generators and a text reader.

pub mod gen;
pub mod io;
pub mod structured;
pub mod tri;

pub use gen::{gen_channel_trimesh, gen_square_trimesh};
pub use io::read_trimesh;
pub use structured::StructuredGrid;
pub use tri::{Location, TriMesh, TOL_LOC};

use crate::error::{Error, Result};

/// Field values attached to the dofs of a mesh, one block per species.
#[derive(Clone, Debug)]
pub struct GridFunction {
    n_dofs: usize,
    n_species: usize,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(n_dofs: usize, n_species: usize) -> Self {
        Self {
            n_dofs,
            n_species,
            values: vec![0.0; n_dofs * n_species],
        }
    }

    pub fn from_fn(
        coords: &[crate::geom::Point],
        n_species: usize,
        f: impl Fn(crate::geom::Point, usize) -> f64,
    ) -> Self {
        let n_dofs = coords.len();
        let mut values = Vec::with_capacity(n_dofs * n_species);
        for s in 0..n_species {
            values.extend(coords.iter().map(|&p| f(p, s)));
        }
        Self {
            n_dofs,
            n_species,
            values,
        }
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn n_species(&self) -> usize {
        self.n_species
    }

    pub fn species(&self, s: usize) -> &[f64] {
        &self.values[s * self.n_dofs..(s + 1) * self.n_dofs]
    }

    pub fn species_mut(&mut self, s: usize) -> &mut [f64] {
        &mut self.values[s * self.n_dofs..(s + 1) * self.n_dofs]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Error out on the first non-finite entry, reporting dof and species.
    pub fn check_finite(&self, step: usize) -> Result<()> {
        for (k, v) in self.values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    dof: k % self.n_dofs,
                    species: k / self.n_dofs,
                    step,
                });
            }
        }
        Ok(())
    }
}
