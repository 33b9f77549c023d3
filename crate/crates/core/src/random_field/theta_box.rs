use crate::error::{Error, Result};
use crate::scalar::Real;

/// Axis-aligned bounded parameter box.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaBox<T> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
    /// Distance from the boundary below which a point is not "interior".
    #[serde(default = "default_margin")]
    pub margin: f64,
}

fn default_margin() -> f64 {
    1e-9
}

impl<T: Real> ThetaBox<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        let b = ThetaBox { lower, upper, margin: default_margin() };
        b.validate()?;
        Ok(b)
    }

    pub fn cube(dim: usize, lo: T, hi: T) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.is_empty() || self.lower.len() != self.upper.len() {
            return Err(Error::InvalidArgument("box bounds must be non-empty and of equal length".into()));
        }
        for (k, (lo, hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidArgument(format!("box axis {k}: need finite lower < upper, got [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, theta: &[T]) -> bool {
        theta.len() == self.dim()
            && theta
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(t, (lo, hi))| *t >= *lo && *t <= *hi)
    }

    /// Projection onto the box, and whether any coordinate was moved.
    pub fn clamp(&self, theta: &[T]) -> (Vec<T>, bool) {
        let mut moved = false;
        let out = theta
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(t, (lo, hi))| {
                let c = t.max(*lo).min(*hi);
                if c != *t {
                    moved = true;
                }
                c
            })
            .collect();
        (out, moved)
    }

    /// True when some coordinate lies within `margin` of a face.
    pub fn on_boundary(&self, theta: &[T]) -> bool {
        let m = T::lit(self.margin);
        theta
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .any(|(t, (lo, hi))| *t - *lo <= m * (T::one() + lo.abs()) || *hi - *t <= m * (T::one() + hi.abs()))
    }

    pub fn center(&self) -> Vec<T> {
        self.lower.iter().zip(&self.upper).map(|(lo, hi)| (*lo + *hi) * T::lit(0.5)).collect()
    }

    pub fn widths(&self) -> Vec<T> {
        self.lower.iter().zip(&self.upper).map(|(lo, hi)| *hi - *lo).collect()
    }

    pub fn volume(&self) -> T {
        self.widths().into_iter().fold(T::one(), |a, w| a * w)
    }

    /// `points` equispaced nodes on axis `k`, endpoints included.
    pub fn axis(&self, k: usize, points: usize) -> Vec<T> {
        linspace(self.lower[k], self.upper[k], points)
    }

    /// Tensor grid with `points` nodes per axis, in lexicographic order
    /// (first coordinate varies slowest).
    pub fn grid(&self, points: usize) -> TensorGrid<T> {
        TensorGrid::new((0..self.dim()).map(|k| self.axis(k, points)).collect())
    }
}

pub fn linspace<T: Real>(lo: T, hi: T, points: usize) -> Vec<T> {
    assert!(points >= 2, "need at least two nodes");
    let last = points - 1;
    let step = (hi - lo) / T::from_usize_lossy(last);
    (0..points)
        .map(|i| if i == last { hi } else { lo + T::from_usize_lossy(i) * step })
        .collect()
}

/// Cartesian product of per-axis node lists.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorGrid<T> {
    pub axes: Vec<Vec<T>>,
}

impl<T: Real> TensorGrid<T> {
    pub fn new(axes: Vec<Vec<T>>) -> Self {
        TensorGrid { axes }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Multi-index of flat position `i`.
    pub fn index(&self, mut i: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            let n = self.axes[k].len();
            idx[k] = i % n;
            i /= n;
        }
        idx
    }

    pub fn point(&self, i: usize) -> Vec<T> {
        self.index(i).iter().enumerate().map(|(k, j)| self.axes[k][*j]).collect()
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<T>> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }

    /// Largest spacing over all axes.
    pub fn resolution(&self) -> T {
        self.axes
            .iter()
            .flat_map(|a| a.windows(2).map(|w| (w[1] - w[0]).abs()))
            .fold(T::zero(), |m, d| m.max(d))
    }
}
