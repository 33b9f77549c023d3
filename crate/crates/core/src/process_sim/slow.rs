//! Stationary Gaussian environment with covariance `c(h) = (1 + |h|)^(-a)`,
//! sampled exactly on a uniform grid by circulant embedding.
//!
//! `c` is convex and nonincreasing on `h >= 0`, so the symmetric circulant
//! extension of the covariance row has nonnegative spectrum; clipping is
//! only ever needed for rounding noise.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::process_sim::{SamplePath, TimeGrid};
use crate::rng::rng_from_seed;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlowMixSpec<T> {
    /// Polynomial decay exponent of the covariance.
    pub a: T,
    /// Largest tolerated negative-eigenvalue mass, relative to total mass.
    #[serde(default = "default_clip_threshold")]
    pub clip_threshold: f64,
}

fn default_clip_threshold() -> f64 {
    1e-8
}

impl<T: Real> SlowMixSpec<T> {
    pub fn new(a: T) -> Result<Self> {
        let spec = SlowMixSpec { a, clip_threshold: default_clip_threshold() };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.a > T::zero()) {
            return Err(Error::InvalidModel(format!("slow-mixing exponent must be > 0, got {}", self.a)));
        }
        Ok(())
    }

    pub fn covariance(&self, lag: T) -> T {
        (T::one() + lag.abs()).powf(-self.a)
    }
}

/// Reusable sampler: the embedding spectrum and FFT plan are computed once
/// per `(spec, grid)`.
pub struct SlowMixSampler<T: Real> {
    grid: TimeGrid<T>,
    /// `sqrt(max(lambda_j, 0) / m)`.
    scale: Vec<T>,
    eigenvalues: Vec<T>,
    clipped_mass: f64,
    fft: Arc<dyn Fft<T>>,
}

impl<T: Real> std::fmt::Debug for SlowMixSampler<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SlowMixSampler")
            .field("grid", &self.grid)
            .field("embedding", &self.scale.len())
            .field("clipped_mass", &self.clipped_mass)
            .finish()
    }
}

impl<T: Real> SlowMixSampler<T> {
    pub fn new(spec: &SlowMixSpec<T>, grid: TimeGrid<T>) -> Result<Self> {
        spec.validate()?;
        let n = grid.n_steps();
        let m = (2 * n).next_power_of_two();
        let h = grid.step();
        let row: Vec<Complex<T>> = (0..m)
            .map(|k| {
                let lag = k.min(m - k);
                Complex::new(spec.covariance(T::from_usize_lossy(lag) * h), T::zero())
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        let mut spectrum = row;
        fft.process(&mut spectrum);
        let eigenvalues: Vec<T> = spectrum.iter().map(|z| z.re).collect();
        let total: f64 = eigenvalues.iter().map(|v| v.abs().to_f64_lossy()).sum();
        let negative: f64 = eigenvalues
            .iter()
            .filter(|v| **v < T::zero())
            .map(|v| v.abs().to_f64_lossy())
            .sum();
        let clipped_mass = if total > 0.0 { negative / total } else { 0.0 };
        if clipped_mass > spec.clip_threshold {
            return Err(Error::Embedding { mass: clipped_mass, threshold: spec.clip_threshold });
        }
        let mf = T::from_usize_lossy(m);
        let scale = eigenvalues.iter().map(|v| (v.max(T::zero()) / mf).sqrt()).collect();
        Ok(SlowMixSampler { grid, scale, eigenvalues, clipped_mass, fft })
    }

    pub fn grid(&self) -> TimeGrid<T> {
        self.grid
    }

    pub fn embedding_size(&self) -> usize {
        self.scale.len()
    }

    pub fn clipped_mass(&self) -> f64 {
        self.clipped_mass
    }

    /// Covariance at grid lag `k` implied by the clipped spectrum.
    pub fn implied_covariance(&self, k: usize) -> T {
        let m = self.eigenvalues.len();
        let mf = T::from_usize_lossy(m);
        let w = T::lit(2.0) * T::PI() * T::from_usize_lossy(k) / mf;
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(j, v)| v.max(T::zero()) * (w * T::from_usize_lossy(j)).cos())
            .sum::<T>()
            / mf
    }

    pub fn sample(&self, seed: u64) -> Result<SamplePath<T>> {
        let mut rng = rng_from_seed(seed);
        let mut buf: Vec<Complex<T>> = self
            .scale
            .iter()
            .map(|s| Complex::new(*s * T::std_normal(&mut rng), *s * T::std_normal(&mut rng)))
            .collect();
        self.fft.process(&mut buf);
        let values = buf[..self.grid.n_points()].iter().map(|z| z.re).collect();
        SamplePath::scalar(self.grid, values, seed, "L")
    }
}

pub fn sim_slow_gaussian<T: Real>(spec: &SlowMixSpec<T>, grid: TimeGrid<T>, seed: u64) -> Result<SamplePath<T>> {
    SlowMixSampler::new(spec, grid)?.sample(seed)
}
