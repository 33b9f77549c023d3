use crate::error::{Error, Result};
use crate::scalar::Real;

/// Uniform grid `t_j = j T / n` on `[0, T]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid<T> {
    horizon: T,
    n_steps: usize,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(horizon: T, n_steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > T::zero()) {
            return Err(Error::InvalidGrid(format!("horizon must be positive and finite, got {horizon}")));
        }
        if n_steps < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 steps, got {n_steps}")));
        }
        let grid = TimeGrid { horizon, n_steps };
        if !(grid.step() > T::zero()) {
            return Err(Error::InvalidGrid("step underflows to zero".into()));
        }
        Ok(grid)
    }

    /// Grid with a given step; the horizon is `n_steps * step`.
    pub fn with_step(step: T, n_steps: usize) -> Result<Self> {
        Self::new(step * T::from_usize_lossy(n_steps), n_steps)
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_points(&self) -> usize {
        self.n_steps + 1
    }

    pub fn step(&self) -> T {
        self.horizon / T::from_usize_lossy(self.n_steps)
    }

    pub fn time(&self, j: usize) -> T {
        if j == self.n_steps {
            self.horizon
        } else {
            T::from_usize_lossy(j) * self.step()
        }
    }

    /// Same horizon, `factor` times more steps.
    pub fn refine(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidGrid("refinement factor must be >= 1".into()));
        }
        Self::new(self.horizon, self.n_steps * factor)
    }
}

/// Process values on a [`TimeGrid`]: `n_steps + 1` points, each a vector of
/// length `dim`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePath<T> {
    pub grid: TimeGrid<T>,
    pub dim: usize,
    pub values: Vec<T>,
    pub seed: u64,
    pub label: String,
}

impl<T: Real> SamplePath<T> {
    pub fn new(grid: TimeGrid<T>, dim: usize, values: Vec<T>, seed: u64, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if dim == 0 {
            return Err(Error::InvalidArgument("path dimension must be >= 1".into()));
        }
        if values.len() != grid.n_points() * dim {
            return Err(Error::InvalidArgument(format!(
                "path {label}: expected {} values, got {}",
                grid.n_points() * dim,
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { label, index: index / dim });
        }
        Ok(SamplePath { grid, dim, values, seed, label })
    }

    pub fn scalar(grid: TimeGrid<T>, values: Vec<T>, seed: u64, label: impl Into<String>) -> Result<Self> {
        Self::new(grid, 1, values, seed, label)
    }

    pub fn len(&self) -> usize {
        self.grid.n_points()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn at(&self, j: usize) -> &[T] {
        &self.values[j * self.dim..(j + 1) * self.dim]
    }

    /// Scalar value at point `j` (first coordinate).
    pub fn x(&self, j: usize) -> T {
        self.values[j * self.dim]
    }

    pub fn last(&self) -> &[T] {
        self.at(self.grid.n_steps())
    }

    /// Keep every `factor`-th point.
    pub fn subsample(&self, factor: usize) -> Result<Self> {
        if factor == 0 || self.grid.n_steps() % factor != 0 {
            return Err(Error::InvalidGrid(format!(
                "cannot subsample {} steps by {factor}",
                self.grid.n_steps()
            )));
        }
        let grid = TimeGrid::new(self.grid.horizon(), self.grid.n_steps() / factor)?;
        let values = (0..grid.n_points())
            .flat_map(|j| self.at(j * factor).to_vec())
            .collect();
        SamplePath::new(grid, self.dim, values, self.seed, self.label.clone())
    }

    /// Increments `x_{j+1} - x_j` of the first coordinate.
    pub fn increments(&self) -> Vec<T> {
        (0..self.grid.n_steps()).map(|j| self.x(j + 1) - self.x(j)).collect()
    }
}
