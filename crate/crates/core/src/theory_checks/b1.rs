use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Exponents of the moment/large-deviation conditions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct B1Params<T> {
    pub alpha: T,
    pub rho: T,
    pub beta1: T,
    pub rho1: T,
    pub rho2: T,
    pub beta2: T,
}

/// The two admissible families `beta1 = alpha/2, rho1 = alpha,
/// rho2 = 3 alpha` with `beta2 = alpha` (set i) or `beta2 = 0` (set ii).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum B1Set {
    I,
    II,
}

impl std::str::FromStr for B1Set {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "i" | "I" | "1" => Ok(B1Set::I),
            "ii" | "II" | "2" => Ok(B1Set::II),
            _ => Err(Error::InvalidArgument(format!("unknown parameter set {s:?}; use i or ii"))),
        }
    }
}

impl<T: Real> B1Params<T> {
    pub fn family(set: B1Set, alpha: T, rho: T) -> Self {
        let half = T::lit(0.5);
        B1Params {
            alpha,
            rho,
            beta1: alpha * half,
            rho1: alpha,
            rho2: T::lit(3.0) * alpha,
            beta2: match set {
                B1Set::I => alpha,
                B1Set::II => T::zero(),
            },
        }
    }

    /// `beta = alpha / (1 - alpha)`.
    pub fn beta(&self) -> T {
        self.alpha / (T::one() - self.alpha)
    }
}

/// One inequality `lhs < rhs` (or `<=` when `strict` is false).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint<T> {
    pub name: String,
    pub lhs: T,
    pub rhs: T,
    pub strict: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct B1Report<T> {
    pub params: B1Params<T>,
    pub constraints: Vec<Constraint<T>>,
    pub pass: bool,
}

impl<T: Real> B1Report<T> {
    pub fn failures(&self) -> impl Iterator<Item = &Constraint<T>> {
        self.constraints.iter().filter(|c| !c.pass)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "constraint,lhs,rhs,pass")?;
        for c in &self.constraints {
            writeln!(w, "{},{},{},{}", c.name, c.lhs, c.rhs, c.pass)?;
        }
        Ok(())
    }
}

fn lt<T: Real>(name: &str, lhs: T, rhs: T) -> Constraint<T> {
    Constraint { name: name.into(), lhs, rhs, strict: true, pass: lhs < rhs }
}

fn le<T: Real>(name: &str, lhs: T, rhs: T) -> Constraint<T> {
    Constraint { name: name.into(), lhs, rhs, strict: false, pass: lhs <= rhs }
}

pub fn check_b1<T: Real>(params: &B1Params<T>) -> Result<B1Report<T>> {
    let B1Params { alpha, rho, beta1, rho1, rho2, beta2 } = *params;
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    if !(rho > T::zero()) {
        return Err(Error::InvalidArgument(format!("rho = {rho} must be positive")));
    }
    let two = T::lit(2.0);
    let cap = T::one().min(params.beta()).min(two * beta1 / (T::one() - alpha));
    let constraints = vec![
        lt("0<beta1", T::zero(), beta1),
        lt("beta1<1/2", beta1, T::lit(0.5)),
        lt("0<rho1", T::zero(), rho1),
        lt("rho1<min{1,beta,2beta1/(1-alpha)}", rho1, cap),
        lt("alpha*rho<rho2", alpha * rho, rho2),
        le("0<=beta2", T::zero(), beta2),
        lt("0<1-2beta2-rho2", T::zero(), T::one() - two * beta2 - rho2),
    ];
    let pass = constraints.iter().all(|c| c.pass);
    Ok(B1Report { params: *params, constraints, pass })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentOrders<T> {
    pub l: T,
    pub m1: T,
    pub m2: T,
    pub m3: T,
    pub m4: T,
}

impl<T: Real> MomentOrders<T> {
    pub fn max(&self) -> T {
        self.m1.max(self.m2).max(self.m3).max(self.m4)
    }
}

/// `M1 = L/(1-rho1)`, `M2 = L/(1-2beta2-rho2)`, `M3 = L/(beta-rho1)`,
/// `M4 = L/(2beta1/(1-alpha) - rho1)`.
pub fn moment_orders<T: Real>(l: T, params: &B1Params<T>) -> Result<MomentOrders<T>> {
    if !(l > T::zero()) {
        return Err(Error::InvalidArgument(format!("L = {l} must be positive")));
    }
    let report = check_b1(params)?;
    if !report.pass {
        let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        return Err(Error::InvalidArgument(format!("exponent conditions violated: {}", names.join(", "))));
    }
    let p = params;
    let two = T::lit(2.0);
    Ok(MomentOrders {
        l,
        m1: l / (T::one() - p.rho1),
        m2: l / (T::one() - two * p.beta2 - p.rho2),
        m3: l / (p.beta() - p.rho1),
        m4: l / (two * p.beta1 / (T::one() - p.alpha) - p.rho1),
    })
}
