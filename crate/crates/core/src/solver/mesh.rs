use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid on `(0, L)`; node 0 carries the Dirichlet condition and node
/// `N` the traction/dissipation condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mesh1D {
    length: f64,
    cells: usize,
}

impl Mesh1D {
    pub const MIN_CELLS: usize = 4;

    pub fn new(length: f64, cells: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Validation(format!("mesh length must be positive, got {length}")));
        }
        if cells < Self::MIN_CELLS {
            return Err(Error::Validation(format!(
                "mesh needs at least {} cells, got {cells}",
                Self::MIN_CELLS
            )));
        }
        Ok(Self { length, cells })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn nodes(&self) -> usize {
        self.cells + 1
    }

    pub fn h(&self) -> f64 {
        self.length / self.cells as f64
    }

    pub fn x(&self, node: usize) -> f64 {
        if node == self.cells {
            self.length
        } else {
            node as f64 * self.h()
        }
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.nodes()).map(|i| self.x(i)).collect()
    }

    pub fn midpoint(&self, cell: usize) -> f64 {
        (cell as f64 + 0.5) * self.h()
    }
}
