use crate::error::{Error, Result};
use crate::process_sim::{SamplePath, TimeGrid};
use crate::rng::rng_from_seed;
use crate::scalar::Real;

/// Independent `N(0, h I_dim)` increments on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct WienerIncrements<T> {
    pub grid: TimeGrid<T>,
    pub dim: usize,
    /// `n_steps * dim` values, row-major by step.
    pub values: Vec<T>,
    pub seed: u64,
}

impl<T: Real> WienerIncrements<T> {
    pub fn step(&self, j: usize) -> &[T] {
        &self.values[j * self.dim..(j + 1) * self.dim]
    }

    /// Cumulative path starting at 0.
    pub fn to_path(&self, label: &str) -> Result<SamplePath<T>> {
        let mut values = vec![T::zero(); self.grid.n_points() * self.dim];
        for j in 0..self.grid.n_steps() {
            for d in 0..self.dim {
                values[(j + 1) * self.dim + d] = values[j * self.dim + d] + self.values[j * self.dim + d];
            }
        }
        SamplePath::new(self.grid, self.dim, values, self.seed, label)
    }
}

pub fn gen_wiener<T: Real>(grid: TimeGrid<T>, dim: usize, seed: u64) -> Result<WienerIncrements<T>> {
    if dim == 0 {
        return Err(Error::InvalidArgument("Wiener dimension must be >= 1".into()));
    }
    let sd = grid.step().sqrt();
    let mut rng = rng_from_seed(seed);
    let values = (0..grid.n_steps() * dim).map(|_| sd * T::std_normal(&mut rng)).collect();
    Ok(WienerIncrements { grid, dim, values, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_is_bit_identical() {
        let g = TimeGrid::new(1.0_f64, 4).unwrap();
        assert_eq!(gen_wiener(g, 2, 7).unwrap(), gen_wiener(g, 2, 7).unwrap());
        assert_ne!(gen_wiener(g, 1, 7).unwrap().values, gen_wiener(g, 1, 8).unwrap().values);
    }

    #[test]
    fn increments_have_variance_h() {
        // T=1, n=4: each increment has variance 0.25
        let g = TimeGrid::new(1.0_f64, 4).unwrap();
        let reps = 20_000;
        let mut sums = [0.0; 4];
        for s in 0..reps {
            let w = gen_wiener(g, 1, s).unwrap();
            for (acc, v) in sums.iter_mut().zip(&w.values) {
                *acc += v * v;
            }
        }
        for acc in sums {
            let var = acc / reps as f64;
            // s.e. of a sample variance of N(0, 0.25) is 0.25 * sqrt(2/reps)
            assert!((var - 0.25).abs() < 3.0 * 0.25 * (2.0 / reps as f64).sqrt() + 1e-3, "{var}");
        }
    }

    #[test]
    fn terminal_value_has_variance_horizon() {
        let g = TimeGrid::new(1.0_f64, 4).unwrap();
        let reps = 100_000u64;
        let mut s2 = 0.0;
        for s in 0..reps {
            let w = gen_wiener(g, 1, s).unwrap();
            let total: f64 = w.values.iter().sum();
            s2 += total * total;
        }
        let var = s2 / reps as f64;
        let se = (2.0 / reps as f64).sqrt();
        assert!((var - 1.0).abs() < 3.0 * se, "var={var} se={se}");
    }

    #[test]
    fn path_starts_at_zero() {
        let g = TimeGrid::new(2.0_f32, 8).unwrap();
        let w = gen_wiener(g, 1, 1).unwrap();
        let p = w.to_path("w").unwrap();
        assert_eq!(p.x(0), 0.0);
        let total: f32 = w.values.iter().sum();
        assert!((p.x(8) - total).abs() < 1e-5);
    }

    #[test]
    fn zero_dimension_is_rejected() {
        let g = TimeGrid::new(1.0_f64, 4).unwrap();
        assert!(gen_wiener(g, 0, 1).is_err());
    }
}
