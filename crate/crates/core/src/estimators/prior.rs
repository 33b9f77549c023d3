use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;

type Density<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;

/// Prior density on the parameter box; need not be normalized.
#[derive(Clone)]
pub struct Prior<T> {
    name: String,
    density: Option<Density<T>>,
}

impl<T> fmt::Debug for Prior<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Prior").field("name", &self.name).finish()
    }
}

impl<T: Real> Default for Prior<T> {
    fn default() -> Self {
        Self::uniform()
    }
}

impl<T: Real> Prior<T> {
    pub fn uniform() -> Self {
        Prior { name: "uniform".into(), density: None }
    }

    pub fn from_fn(name: impl Into<String>, f: impl Fn(&[T]) -> T + Send + Sync + 'static) -> Self {
        Prior { name: name.into(), density: Some(Arc::new(f)) }
    }

    /// The same prior multiplied by a positive constant.
    pub fn scaled(&self, c: T) -> Self {
        let base = self.clone();
        Prior::from_fn(format!("{} x {c}", self.name), move |t: &[T]| c * base.density(t))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_uniform(&self) -> bool {
        self.density.is_none()
    }

    pub fn density(&self, theta: &[T]) -> T {
        match &self.density {
            None => T::one(),
            Some(f) => f(theta),
        }
    }

    /// `log density`, rejecting non-positive or non-finite values.
    pub fn log_density(&self, theta: &[T]) -> Result<T> {
        let d = self.density(theta);
        if !(d > T::zero() && d.is_finite()) {
            return Err(Error::InvalidArgument(format!("prior density {d} at {theta:?} is not positive and finite")));
        }
        Ok(d.ln())
    }
}
