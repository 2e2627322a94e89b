//! One-dimensional periodic partitions of `[a, b]`.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};

/// Fraction of the uniform spacing spanned by the random node shift
/// (`±5%`, a 10% window).
pub const PERTURBATION_WINDOW: f64 = 0.10;

/// A partition `a = x_{1/2} < x_{3/2} < ... < x_{N+1/2} = b`.
///
/// Boundary conditions are periodic: the interfaces at `a` and `b` are the
/// same point.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    interfaces: Vec<f64>,
    lengths: Vec<f64>,
    h_max: f64,
    h_min: f64,
}

impl Mesh1D {
    /// Builds a mesh from explicit interface coordinates.
    pub fn from_interfaces(interfaces: Vec<f64>) -> Result<Self> {
        if interfaces.len() < 3 {
            return invalid(format!(
                "a mesh needs at least 2 cells, got {} interfaces",
                interfaces.len()
            ));
        }
        if interfaces.iter().any(|x| !x.is_finite()) {
            return invalid("mesh interfaces must be finite");
        }
        let lengths: Vec<f64> = interfaces.windows(2).map(|w| w[1] - w[0]).collect();
        if lengths.iter().any(|&h| h <= 0.0) {
            return invalid("mesh interfaces must be strictly increasing");
        }
        let h_max = lengths.iter().cloned().fold(0.0, f64::max);
        let h_min = lengths.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(Mesh1D {
            interfaces,
            lengths,
            h_max,
            h_min,
        })
    }

    pub fn num_cells(&self) -> usize {
        self.lengths.len()
    }

    pub fn interfaces(&self) -> &[f64] {
        &self.interfaces
    }

    pub fn cell_lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn left(&self) -> f64 {
        self.interfaces[0]
    }

    pub fn right(&self) -> f64 {
        *self.interfaces.last().unwrap()
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn h_min(&self) -> f64 {
        self.h_min
    }

    /// Ratio `min_j h_j / max_j h_j`, the quasi-uniformity constant.
    pub fn quasi_uniformity(&self) -> f64 {
        self.h_min / self.h_max
    }

    /// Always true: only periodic boundaries are supported.
    pub fn is_periodic(&self) -> bool {
        true
    }

    /// `(x_{j-1/2}, x_{j+1/2})` for cell `j`.
    pub fn cell_bounds(&self, j: usize) -> (f64, f64) {
        (self.interfaces[j], self.interfaces[j + 1])
    }

    /// Maps a reference coordinate in `[-1, 1]` to cell `j`.
    pub fn to_physical(&self, j: usize, xi: f64) -> f64 {
        let (l, r) = self.cell_bounds(j);
        0.5 * (l + r) + 0.5 * (r - l) * xi
    }

    /// Index of the cell containing `x`; interior points of `I_j` map to `j`,
    /// interface points to the cell on their right (the last interface maps
    /// to the last cell).
    pub fn locate(&self, x: f64) -> Option<usize> {
        if !(self.left()..=self.right()).contains(&x) {
            return None;
        }
        let idx = self.interfaces.partition_point(|&p| p <= x);
        Some(idx.saturating_sub(1).min(self.num_cells() - 1))
    }

    /// Writes one interface coordinate per line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for x in &self.interfaces {
            writeln!(out, "{x:e}")?;
        }
        Ok(())
    }
}

/// `N` equal cells on `[a, b]`.
pub fn uniform_mesh(a: f64, b: f64, n: usize) -> Result<Mesh1D> {
    check_domain(a, b, n)?;
    Mesh1D::from_interfaces(uniform_nodes(a, b, n))
}

/// Uniform mesh with every interior node shifted by an independent draw in
/// `[-0.05 h, 0.05 h]`, `h = (b - a)/N`. Deterministic in `seed`.
pub fn perturbed_mesh(a: f64, b: f64, n: usize, seed: u64) -> Result<Mesh1D> {
    perturbed_mesh_with_window(a, b, n, seed, PERTURBATION_WINDOW)
}

/// As [`perturbed_mesh`] with the total shift window given as a fraction of
/// `h` (each node moves at most `window/2 · h`). `window` must lie in `[0, 1)`.
pub fn perturbed_mesh_with_window(a: f64, b: f64, n: usize, seed: u64, window: f64) -> Result<Mesh1D> {
    check_domain(a, b, n)?;
    if !(0.0..1.0).contains(&window) {
        return invalid(format!("perturbation window must lie in [0, 1), got {window}"));
    }
    let mut nodes = uniform_nodes(a, b, n);
    let bound = 0.5 * window * (b - a) / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for x in nodes.iter_mut().take(n).skip(1) {
        let r: f64 = rng.random();
        *x += (2.0 * r - 1.0) * bound;
    }
    Mesh1D::from_interfaces(nodes)
}

fn check_domain(a: f64, b: f64, n: usize) -> Result<()> {
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return invalid(format!("domain requires a < b, got [{a}, {b}]"));
    }
    if n < 2 {
        return invalid(format!("mesh needs N >= 2 cells, got {n}"));
    }
    Ok(())
}

fn uniform_nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
    let mut nodes: Vec<f64> = (0..=n).map(|i| a + (b - a) * (i as f64) / (n as f64)).collect();
    nodes[n] = b;
    nodes
}
