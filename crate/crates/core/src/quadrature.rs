//! Gauss-Legendre rules on (0, 1), barycentric interpolation on their nodes,
//! and a tanh-sinh integrator for integrands with endpoint singularities.

use crate::error::{Error, Result};

pub const MIN_ORDER: usize = 8;
pub const MAX_ORDER: usize = 1024;

/// Gauss-Legendre rule mapped to the unit interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
    /// Barycentric weights of the nodes (for Lagrange interpolation).
    bary: Vec<f64>,
}

impl Quadrature {
    /// Rule of the given order on (0, 1); `order` must lie in [8, 1024].
    pub fn new(order: usize) -> Result<Self> {
        if !(MIN_ORDER..=MAX_ORDER).contains(&order) {
            return Err(Error::Domain(format!(
                "quadrature order {order} outside [{MIN_ORDER}, {MAX_ORDER}]"
            )));
        }
        Ok(Self::gauss_unit(order))
    }

    /// Same as [`Quadrature::new`] without the order range check (any n >= 1).
    pub(crate) fn gauss_unit(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        let nodes: Vec<f64> = x.iter().map(|&t| 0.5 * (t + 1.0)).collect();
        let weights: Vec<f64> = w.iter().map(|&v| 0.5 * v).collect();
        // barycentric weights for Gauss nodes: (-1)^j sqrt((1 - t_j^2) w_j)
        let bary = x
            .iter()
            .zip(&w)
            .enumerate()
            .map(|(j, (&t, &wj))| {
                let s = ((1.0 - t * t) * wj).sqrt();
                if j % 2 == 0 {
                    s
                } else {
                    -s
                }
            })
            .collect();
        Quadrature {
            nodes,
            weights,
            order: n,
            bary,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integral of `f` over (0, 1).
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Integral of `f` over (a, b) with the rule rescaled.
    pub fn integrate_on<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let h = b - a;
        h * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(a + h * x))
            .sum::<f64>()
    }

    /// Values of all Lagrange basis polynomials of the node set at `t`,
    /// written into `out`.
    pub fn lagrange_into(&self, t: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.nodes.len());
        let mut denom = 0.0;
        for (j, (&x, &b)) in self.nodes.iter().zip(&self.bary).enumerate() {
            let d = t - x;
            if d == 0.0 {
                out.iter_mut().for_each(|v| *v = 0.0);
                out[j] = 1.0;
                return;
            }
            let c = b / d;
            out[j] = c;
            denom += c;
        }
        let inv = 1.0 / denom;
        out.iter_mut().for_each(|v| *v *= inv);
    }

    /// Interpolate nodal `values` at `t` with the barycentric formula.
    pub fn interpolate(&self, values: &[f64], t: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&x, &b), &v) in self.nodes.iter().zip(&self.bary).zip(values) {
            let d = t - x;
            if d == 0.0 {
                return v;
            }
            let c = b / d;
            num += c * v;
            den += c;
        }
        num / den
    }
}

/// Gauss-Legendre nodes (ascending) and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // root i counted from the right end
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, t);
            dp = d;
            let dt = p / d;
            t -= dt;
            if dt.abs() <= 1e-16 * t.abs().max(1.0) {
                let (_, d) = legendre_with_derivative(n, t);
                dp = d;
                break;
            }
        }
        let weight = 2.0 / ((1.0 - t * t) * dp * dp);
        x[n - 1 - i] = t;
        x[i] = -t;
        w[n - 1 - i] = weight;
        w[i] = weight;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p, d)
}

/// Tanh-sinh integral of `f` over (0, len).
///
/// `f` receives `(x, len - x)` with both distances computed without
/// cancellation, so integrands singular at either end can be written in
/// terms of the distance to that end. Levels are refined until two
/// successive estimates agree to `rel_tol`.
pub fn tanh_sinh<F: Fn(f64, f64) -> f64>(len: f64, rel_tol: f64, f: F) -> f64 {
    const T_MAX: f64 = 4.0;
    const MAX_LEVEL: u32 = 10;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let node = |tau: f64| -> f64 {
        // x = len / (1 + exp(-pi sinh tau)), 1-x likewise
        let s = std::f64::consts::PI * tau.sinh();
        let left = len / (1.0 + (-s).exp());
        let right = len / (1.0 + s.exp());
        if left <= 0.0 || right <= 0.0 {
            return 0.0;
        }
        let dxdt = 2.0 * half_pi * tau.cosh() * left * right / len;
        let v = f(left, right);
        if v.is_finite() {
            v * dxdt
        } else {
            0.0
        }
    };

    let mut h = 0.5;
    let mut sum = node(0.0);
    let mut k = 1;
    while (k as f64) * h <= T_MAX {
        let tau = k as f64 * h;
        sum += node(tau) + node(-tau);
        k += 1;
    }
    let mut estimate = sum * h;
    for _level in 1..=MAX_LEVEL {
        h *= 0.5;
        // add the odd multiples of the new step
        let mut k = 1;
        while (k as f64) * h <= T_MAX {
            let tau = k as f64 * h;
            sum += node(tau) + node(-tau);
            k += 2;
        }
        let next = sum * h;
        let converged = (next - estimate).abs() <= rel_tol * next.abs();
        estimate = next;
        if converged && h < 0.1 {
            break;
        }
    }
    estimate
}
