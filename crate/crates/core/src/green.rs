//! Green's function of (-1)^k X^(2k) = lambda x^-m X on (0, 1) with
//! X^(j)(0) = X^(j)(1) = 0 for j < k, and its symmetrized weighted kernel.
//!
//! For x <= xi
//!
//! G(x, xi) = -1/(2k-1)! (1-xi)^k x^k
//!            * sum_{i<k} sum_{j<k-i} (-1)^i C(2k-1, i) C(k-1+j, j) x^(k-i-1) xi^(j+i)
//!
//! and G(x, xi) = G(xi, x) otherwise. The symmetric kernel is
//! Gbar(x, xi) = xi^(-m/2) (-1)^k G(x, xi) x^(-m/2).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::{binomial, factorial};

/// Largest half-order for which the binomials C(2k-1, i) stay exact in u64.
pub const MAX_K: u32 = 30;

/// Half the spatial order `k` and the degeneracy exponent `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreenSpec {
    pub k: u32,
    pub m: f64,
}

impl GreenSpec {
    pub fn new(k: u32, m: f64) -> Result<Self> {
        let s = GreenSpec { k, m };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > MAX_K {
            return Err(Error::Domain(format!("k = {} not in [1, {MAX_K}]", self.k)));
        }
        if !self.m.is_finite() || self.m < 0.0 || self.m >= self.k as f64 {
            return Err(Error::Domain(format!(
                "m = {} not in [0, k = {})",
                self.m, self.k
            )));
        }
        if self.m > 0.0 && self.m.fract() == 0.0 {
            return Err(Error::Domain(format!("m = {} must not be a positive integer", self.m)));
        }
        Ok(())
    }
}

/// Coefficient table of G1: entry [i][j] = (-1)^i C(2k-1, i) C(k-1+j, j).
fn coefficients(k: u32) -> Vec<Vec<f64>> {
    (0..k)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let ci = binomial(2 * k - 1, i) as f64;
            (0..k - i)
                .map(|j| sign * ci * binomial(k - 1 + j, j) as f64)
                .collect()
        })
        .collect()
}

/// G1(x, xi) without the -1/(2k-1)! prefactor.
fn g1_scaled(k: u32, coef: &[Vec<f64>], x: f64, xi: f64) -> f64 {
    // outer Horner in i on x^(k-1-i) xi^i, inner Horner in j on xi^j
    let mut acc = 0.0;
    let mut xi_pow = 1.0;
    let mut terms = Vec::with_capacity(k as usize);
    for row in coef {
        let inner = row.iter().rev().fold(0.0, |s, &c| s * xi + c);
        terms.push(inner * xi_pow);
        xi_pow *= xi;
    }
    // sum_i terms[i] x^(k-1-i): Horner over i ascending
    for t in &terms {
        acc = acc * x + t;
    }
    (1.0 - xi).powi(k as i32) * x.powi(k as i32) * acc
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Domain(format!("{name} = {v} outside [0, 1]")));
    }
    Ok(())
}

/// Evaluator with the coefficient table built once; use for repeated calls.
#[derive(Debug, Clone)]
pub struct GreenKernel {
    pub spec: GreenSpec,
    coef: Vec<Vec<f64>>,
    prefactor: f64,
    sign: f64,
}

impl GreenKernel {
    pub fn new(spec: GreenSpec) -> Result<Self> {
        spec.validate()?;
        Ok(GreenKernel {
            spec,
            coef: coefficients(spec.k),
            prefactor: -1.0 / factorial(2 * spec.k - 1),
            sign: if spec.k.is_multiple_of(2) { 1.0 } else { -1.0 },
        })
    }

    /// Raw G(x, xi), no domain check.
    pub fn green(&self, x: f64, xi: f64) -> f64 {
        let (lo, hi) = if x <= xi { (x, xi) } else { (xi, x) };
        self.prefactor * g1_scaled(self.spec.k, &self.coef, lo, hi)
    }

    /// (-1)^k G(x, xi), which is nonnegative definite.
    pub fn positive(&self, x: f64, xi: f64) -> f64 {
        self.sign * self.green(x, xi)
    }

    /// Gbar(x, xi); zero when either argument is an endpoint.
    pub fn kernel(&self, x: f64, xi: f64) -> f64 {
        if x <= 0.0 || x >= 1.0 || xi <= 0.0 || xi >= 1.0 {
            return 0.0;
        }
        let p = self.positive(x, xi);
        if self.spec.m == 0.0 {
            p
        } else {
            p * (x * xi).powf(-0.5 * self.spec.m)
        }
    }
}

/// G(x, xi) for x, xi in [0, 1].
pub fn green_eval(spec: &GreenSpec, x: f64, xi: f64) -> Result<f64> {
    check_unit("x", x)?;
    check_unit("xi", xi)?;
    Ok(GreenKernel::new(*spec)?.green(x, xi))
}

/// (-1)^k G(x, xi) for x, xi in [0, 1].
pub fn positive_green(spec: &GreenSpec, x: f64, xi: f64) -> Result<f64> {
    check_unit("x", x)?;
    check_unit("xi", xi)?;
    Ok(GreenKernel::new(*spec)?.positive(x, xi))
}

/// Gbar(x, xi) for x, xi in [0, 1], extended by 0 at the endpoints.
pub fn kernel_eval(spec: &GreenSpec, x: f64, xi: f64) -> Result<f64> {
    check_unit("x", x)?;
    check_unit("xi", xi)?;
    Ok(GreenKernel::new(*spec)?.kernel(x, xi))
}

/// Row-major Gram matrix sqrt(w_i) Gbar(x_i, x_j) sqrt(w_j) of a rule.
pub fn gram_matrix(kernel: &GreenKernel, nodes: &[f64], weights: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let sw: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = sw[i] * kernel.kernel(nodes[i], nodes[j]) * sw[j];
            out[i * n + j] = v;
            out[j * n + i] = v;
        }
    }
    out
}
