//! Gauss–Hermite quadrature for expectations under normal laws.

use crate::scalar::Real;

/// Nodes and weights for `∫ f(x) exp(-x^2) dx` (physicists' convention).
#[derive(Clone, Debug)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Newton iteration on the orthonormal Hermite recurrence. Reliable for
    /// `n <= 180`.
    pub fn new(n: usize) -> Self {
        assert!((1..=180).contains(&n), "Gauss-Hermite order must lie in 1..=180");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let pim4 = std::f64::consts::PI.powf(-0.25);
        let m = n.div_ceil(2);
        let nf = n as f64;
        let mut z = 0.0_f64;
        for i in 0..m {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0],
                3 => 1.91 * z - 0.91 * nodes[1],
                _ => 2.0 * z - nodes[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = pim4;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = 2.0 / (pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        GaussHermite { nodes, weights }
    }

    /// `E[f(X)]` for `X ~ N(mean, sd^2)`.
    pub fn expect_normal<T: Real>(&self, mean: T, sd: T, f: impl Fn(T) -> T) -> T {
        let norm = T::lit(std::f64::consts::PI.sqrt().recip());
        let root2 = T::lit(std::f64::consts::SQRT_2);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| T::lit(*w) * f(mean + root2 * sd * T::lit(*x)))
            .sum::<T>()
            * norm
    }
}
