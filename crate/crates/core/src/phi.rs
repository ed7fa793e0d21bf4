//! Data functions phi for the nonlocal condition u(x, b) - u(x, -a) = phi(x).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{eigenfunction, EigenBasis};

/// Finite sum of real powers, sum_i c_i x^(e_i), kept sorted by exponent.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PowerSum {
    pub terms: Vec<(f64, f64)>,
}

const EXPONENT_EPS: f64 = 1e-12;

impl PowerSum {
    /// Builds from (coefficient, exponent) pairs, merging equal exponents.
    pub fn new(terms: Vec<(f64, f64)>) -> Self {
        let mut terms = terms;
        terms.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(terms.len());
        for (c, e) in terms {
            match merged.last_mut() {
                Some(last) if (last.1 - e).abs() <= EXPONENT_EPS => last.0 += c,
                _ => merged.push((c, e)),
            }
        }
        let scale = merged.iter().fold(0.0f64, |m, t| m.max(t.0.abs()));
        merged.retain(|t| t.0 != 0.0 && t.0.abs() > 1e-14 * scale);
        PowerSum { terms: merged }
    }

    /// Polynomial with coefficients c_0, c_1, ... in ascending degree.
    pub fn polynomial(coefficients: &[f64]) -> Self {
        Self::new(
            coefficients
                .iter()
                .enumerate()
                .map(|(i, &c)| (c, i as f64))
                .collect(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(c, e)| if e == 0.0 { c } else { c * x.powf(e) })
            .sum()
    }

    pub fn mul(&self, other: &PowerSum) -> PowerSum {
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(c1, e1) in &self.terms {
            for &(c2, e2) in &other.terms {
                out.push((c1 * c2, e1 + e2));
            }
        }
        PowerSum::new(out)
    }

    /// Multiply by x^p.
    pub fn shift(&self, p: f64) -> PowerSum {
        PowerSum::new(self.terms.iter().map(|&(c, e)| (c, e + p)).collect())
    }

    /// j-th derivative; integer exponents below j drop out.
    pub fn derivative(&self, j: u32) -> PowerSum {
        let mut out = Vec::with_capacity(self.terms.len());
        for &(c, e) in &self.terms {
            let mut f = c;
            for i in 0..j {
                f *= e - i as f64;
            }
            if f != 0.0 {
                out.push((f, e - j as f64));
            }
        }
        PowerSum::new(out)
    }

    /// int_0^1 x^-m f(x)^2 dx, or `None` if the integral diverges.
    pub fn weighted_square_integral(&self, m: f64) -> Option<f64> {
        let mut total = 0.0;
        for &(c1, e1) in &self.terms {
            for &(c2, e2) in &self.terms {
                let p = e1 + e2 - m + 1.0;
                if p <= 0.0 {
                    return None;
                }
                total += c1 * c2 / p;
            }
        }
        Some(total)
    }

    /// True when f^(i)(0) = f^(i)(1) = 0 for i < order and f is C^smooth on [0, 1].
    pub fn vanishes_at_ends(&self, order: u32, smooth: u32) -> bool {
        let scale = self.terms.iter().fold(0.0f64, |m, t| m.max(t.0.abs())).max(1.0);
        for &(_, e) in &self.terms {
            let integer = (e - e.round()).abs() <= EXPONENT_EPS;
            if integer {
                let n = e.round();
                if n < 0.0 || n < order as f64 {
                    return false;
                }
            } else if e <= smooth as f64 {
                return false;
            }
        }
        (0..order).all(|i| self.derivative(i).eval(1.0).abs() <= 1e-10 * scale)
    }
}

/// The built-in data families.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum PhiSpec {
    /// phi(x) = x^k (1-x)^k sum_i c_i x^i.
    Poly { coefficients: Vec<f64> },
    /// phi = X_index, the computed eigenfunction.
    Eigenmode { index: usize },
}

impl PhiSpec {
    /// Reference data x(1-x) for k = 1.
    pub fn reference() -> Self {
        PhiSpec::Poly {
            coefficients: vec![1.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PhiSpec::Poly { coefficients } => {
                if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Config(
                        "phi coefficients must be a nonempty list of finite numbers".to_string(),
                    ));
                }
            }
            PhiSpec::Eigenmode { index } => {
                if *index == 0 {
                    return Err(Error::Config("eigenmode index is 1-based".to_string()));
                }
            }
        }
        Ok(())
    }

    /// Closed form as a power sum (poly family only).
    pub fn power_sum(&self, k: u32) -> Option<PowerSum> {
        match self {
            PhiSpec::Poly { coefficients } => {
                // x^k (1-x)^k = sum_j (-1)^j C(k, j) x^(k+j)
                let base: Vec<f64> = (0..=k)
                    .map(|j| {
                        let c = crate::special::binomial(k, j) as f64;
                        if j % 2 == 0 {
                            c
                        } else {
                            -c
                        }
                    })
                    .collect();
                Some(
                    PowerSum::polynomial(&base)
                        .mul(&PowerSum::polynomial(coefficients))
                        .shift(k as f64),
                )
            }
            PhiSpec::Eigenmode { .. } => None,
        }
    }

    /// Evaluator for phi on [0, 1].
    pub fn evaluator<'a>(&self, basis: &'a EigenBasis) -> Result<Box<dyn Fn(f64) -> f64 + Send + Sync + 'a>> {
        self.validate()?;
        match self {
            PhiSpec::Poly { coefficients } => {
                let k = basis.spec.k as i32;
                let coefficients = coefficients.clone();
                Ok(Box::new(move |x: f64| {
                    let p = coefficients.iter().rev().fold(0.0, |s, &c| s * x + c);
                    (x * (1.0 - x)).powi(k) * p
                }))
            }
            PhiSpec::Eigenmode { index } => {
                if *index > basis.count {
                    return Err(Error::ModeOutOfRange {
                        mode: *index,
                        count: basis.count,
                    });
                }
                let index = *index;
                Ok(Box::new(move |x: f64| eigenfunction(basis, index, x).unwrap_or(0.0)))
            }
        }
    }
}
