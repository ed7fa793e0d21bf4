//! Two-parameter Mittag-Leffler function on the real line.
//!
//! E_{mu,eta}(z) = sum_n z^n / Gamma(mu n + eta), for 0 < mu <= 2 and eta > 0.
//!
//! Negative arguments are the important case. Writing t = -z and
//! rho = t^(1/mu), the evaluator picks one of three regimes:
//!
//! * rho <= 8: the Taylor series, accepted when the ratio of the absolute
//!   term sum to the result shows less than 1e5 of cancellation;
//! * rho >= 50: the asymptotic expansion, i.e. the inverse-power series
//!   -sum_k (-t)^-k / Gamma(eta - mu k) plus, for mu > 1, the two
//!   exponentially damped oscillating terms coming from the poles
//!   s = rho exp(+-i pi/mu) of the Laplace-domain integrand;
//! * otherwise: the Hankel contour collapsed onto the branch cut, a real
//!   integral evaluated with tanh-sinh quadrature, plus the same pole terms.
//!
//! mu = 1 is handled through Kummer's transformation, which turns the
//! alternating series into a sum of Poisson weights.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::par;
use crate::quadrature::tanh_sinh;
use crate::special::{gamma, ln_gamma, recip_gamma};

/// Largest rho = |z|^(1/mu) for which the Taylor series is attempted.
pub const SERIES_RHO: f64 = 8.0;
/// Smallest rho for which the asymptotic expansion is used.
pub const ASYMPTOTIC_RHO: f64 = 50.0;
/// Cancellation ratio sum|a_n| / |sum a_n| above which the series is rejected.
const MAX_SERIES_CANCELLATION: f64 = 1e5;
/// Upper end of the truncated branch-cut integral (e^-60 is far below f64 noise).
const CUT_LENGTH: f64 = 60.0;
const QUAD_TOL: f64 = 1e-14;

/// Parameters and argument of E_{mu,eta}(z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlQuery {
    pub mu: f64,
    pub eta: f64,
    pub z: f64,
}

impl MlQuery {
    pub fn new(mu: f64, eta: f64, z: f64) -> Result<Self> {
        let q = MlQuery { mu, eta, z };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.z.is_finite() {
            return Err(Error::NonFinite(format!("Mittag-Leffler argument z = {}", self.z)));
        }
        if !(self.mu > 0.0 && self.mu <= 2.0) {
            return Err(Error::Domain(format!("mu = {} not in (0, 2]", self.mu)));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::Domain(format!("eta = {} must be positive", self.eta)));
        }
        Ok(())
    }
}

/// E_{mu,eta}(z) with full validation.
pub fn ml_eval(q: &MlQuery) -> Result<f64> {
    q.validate()?;
    let v = ml_unchecked(q.mu, q.eta, q.z);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow(format!(
            "E_{{{},{}}}({})",
            q.mu, q.eta, q.z
        )))
    }
}

/// Convenience wrapper around [`ml_eval`].
pub fn mittag_leffler(mu: f64, eta: f64, z: f64) -> Result<f64> {
    ml_eval(&MlQuery { mu, eta, z })
}

/// Evaluation without parameter checks; callers guarantee 0 < mu <= 2,
/// eta > 0 and finite z. Large positive z may return infinity.
pub(crate) fn ml_unchecked(mu: f64, eta: f64, z: f64) -> f64 {
    if z == 0.0 {
        return recip_gamma(eta);
    }
    if z > 0.0 {
        return series(mu, eta, z).sum;
    }
    let t = -z;
    if mu == 1.0 {
        return kummer_negative(eta, t);
    }
    let rho = t.powf(1.0 / mu);
    if rho <= SERIES_RHO {
        let s = series(mu, eta, z);
        if s.converged && s.abs_sum <= MAX_SERIES_CANCELLATION * s.sum.abs() {
            return s.sum;
        }
    }
    if rho >= ASYMPTOTIC_RHO {
        if let Some(v) = asymptotic_full(mu, eta, t) {
            return v;
        }
    }
    contour_negative(mu, eta, t)
}

struct SeriesSum {
    sum: f64,
    abs_sum: f64,
    converged: bool,
}

fn series(mu: f64, eta: f64, z: f64) -> SeriesSum {
    let az = z.abs();
    let ln_az = az.ln();
    let negative = z < 0.0;
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    let mut pow: f64 = 1.0; // |z|^n while representable
    for n in 0..20_000usize {
        let arg = mu * n as f64 + eta;
        let mag = if arg < 170.0 && pow.is_finite() {
            pow * recip_gamma(arg)
        } else {
            (n as f64 * ln_az - ln_gamma(arg)).exp()
        };
        let term = if negative && n % 2 == 1 { -mag } else { mag };
        sum += term;
        abs_sum += mag.abs();
        if !sum.is_finite() {
            return SeriesSum {
                sum,
                abs_sum,
                converged: false,
            };
        }
        // terms decrease monotonically once (mu n + eta)^mu exceeds |z|
        let past_peak = arg.powf(mu) > 2.0 * az;
        if n > 2 && past_peak && mag <= 1e-17 * sum.abs().max(f64::MIN_POSITIVE) {
            return SeriesSum {
                sum,
                abs_sum,
                converged: true,
            };
        }
        pow *= az;
    }
    SeriesSum {
        sum,
        abs_sum,
        converged: false,
    }
}

/// E_{1,eta}(-t) = e^-t / Gamma(eta) * sum_n p_n c_n with Poisson weights
/// p_n = e^-t t^n / n!, c_0 = 1, c_n = (eta-1)/(eta-1+n).
fn kummer_negative(eta: f64, t: f64) -> f64 {
    let coeff = |n: usize| -> f64 {
        if n == 0 {
            1.0
        } else {
            (eta - 1.0) / (eta - 1.0 + n as f64)
        }
    };
    let mode = t.floor() as usize;
    let p_mode = (-t + mode as f64 * t.ln() - ln_gamma(mode as f64 + 1.0)).exp();
    let p_mode = if t == 0.0 { 1.0 } else { p_mode };
    let mut up = 0.0;
    let mut p = p_mode;
    let mut n = mode;
    loop {
        up += p * coeff(n);
        n += 1;
        p *= t / n as f64;
        if p < 1e-20 * p_mode || p == 0.0 {
            break;
        }
    }
    let mut down = 0.0;
    let mut p = p_mode;
    let mut n = mode;
    while n > 0 {
        p *= n as f64 / t;
        n -= 1;
        down += p * coeff(n);
        if p < 1e-20 * p_mode {
            break;
        }
    }
    (down + up) * recip_gamma(eta)
}

/// Exponentially damped oscillating part, present for 1 < mu <= 2.
fn pole_terms(mu: f64, eta: f64, t: f64) -> f64 {
    if mu <= 1.0 {
        return 0.0;
    }
    let rho = t.powf(1.0 / mu);
    let theta = PI / mu;
    let phase = rho * theta.sin() + (1.0 - eta) * theta;
    2.0 / mu * (rho * theta.cos()).exp() * rho.powf(1.0 - eta) * phase.cos()
}

/// Inverse-power part sum_{k>=1} (-1)^(k+1) t^-k / Gamma(eta - mu k),
/// truncated once the terms fall below 1e-17 of `scale`. `None` when the
/// terms start growing first (argument too small for the expansion).
fn algebraic_tail(mu: f64, eta: f64, t: f64, scale: f64) -> Option<f64> {
    let ln_t = t.ln();
    let mut sum = 0.0;
    let mut prev_bound = f64::INFINITY;
    for k in 1..400usize {
        let x = eta - mu * k as f64;
        let term = recip_gamma(x) * (-(k as f64) * ln_t).exp();
        sum += if k % 2 == 1 { term } else { -term };
        // |1/Gamma(x)| <= Gamma(1-x)/pi for x < 1/2
        let bound = if x < 0.5 {
            (ln_gamma(1.0 - x) - k as f64 * ln_t).exp() / PI
        } else {
            term.abs()
        };
        let target = 1e-17 * sum.abs().max(scale);
        if k > 1 && bound <= target {
            return Some(sum);
        }
        if k > 3 && bound > prev_bound && bound > target {
            return None;
        }
        prev_bound = bound;
    }
    None
}

fn asymptotic_full(mu: f64, eta: f64, t: f64) -> Option<f64> {
    let poles = pole_terms(mu, eta, t);
    algebraic_tail(mu, eta, t, poles.abs()).map(|a| a + poles)
}

/// Truncated asymptotic expansion with a fixed number of inverse-power terms
/// (plus the pole terms when mu > 1). With `terms = 1` and mu < 1 this is the
/// leading behaviour 1/(t Gamma(eta - mu)).
pub fn asymptotic_expansion(mu: f64, eta: f64, t: f64, terms: usize) -> f64 {
    let mut sum = 0.0;
    for k in 1..=terms {
        let term = recip_gamma(eta - mu * k as f64) * t.powi(-(k as i32));
        sum += if k % 2 == 1 { term } else { -term };
    }
    sum + pole_terms(mu, eta, t)
}

/// Contour-integral evaluation for z = -t < 0, mu != 1.
fn contour_negative(mu: f64, eta: f64, t: f64) -> f64 {
    if eta >= 1.0 + mu {
        // the cut integral diverges at the origin; step eta down with
        // E_{mu,eta}(z) = (E_{mu,eta-mu}(z) - 1/Gamma(eta-mu)) / z
        let lower = eta - mu;
        return (recip_gamma(lower) - ml_unchecked(mu, lower, -t)) / t;
    }
    cut_integral(mu, eta, t) + pole_terms(mu, eta, t)
}

/// (1/pi) int_0^inf e^-r r^(mu-eta) [q sin(pi eta) - sin(pi(mu-eta))]
///        / (t (q^2 + 2 q cos(pi mu) + 1)) dr,   q = r^mu / t.
fn cut_integral(mu: f64, eta: f64, t: f64) -> f64 {
    let gamma_exp = mu - eta;
    let sin_eta = (PI * eta).sin();
    let sin_diff = (PI * gamma_exp).sin();
    let half = (0.5 * PI * mu).cos();
    let one_plus_cos = 2.0 * half * half;
    let r_peak = t.powf(1.0 / mu);

    // rational part in terms of q and q - 1 (the latter computed separately
    // so the near-pole region keeps its precision)
    let rational = |q: f64, qm1: f64| -> f64 {
        let den = qm1 * qm1 + 2.0 * q * one_plus_cos;
        (q * sin_eta - sin_diff) / (t * den)
    };

    let r1 = r_peak.min(CUT_LENGTH);
    let first = if gamma_exp < 0.0 {
        // r = r1 u^p absorbs the r^(mu-eta) singularity at the origin
        let p = 1.0 / (1.0 + gamma_exp);
        let scale = r1.powf(1.0 + gamma_exp) * p;
        let ratio_mu = (r1 / r_peak).powf(mu);
        scale
            * tanh_sinh(1.0, QUAD_TOL, |u, one_minus_u| {
                let r = r1 * u.powf(p);
                let log_u = (-one_minus_u).ln_1p();
                let q = ratio_mu * (p * mu * log_u).exp();
                let qm1 = if r1 == r_peak {
                    (p * mu * log_u).exp_m1()
                } else {
                    q - 1.0
                };
                (-r).exp() * rational(q, qm1)
            })
    } else {
        tanh_sinh(r1, QUAD_TOL, |r, dist| {
            let q = (r / r_peak).powf(mu);
            let qm1 = if r1 == r_peak {
                (mu * (-dist / r_peak).ln_1p()).exp_m1()
            } else {
                q - 1.0
            };
            (-r).exp() * r.powf(gamma_exp) * rational(q, qm1)
        })
    };
    let second = if r_peak < CUT_LENGTH {
        tanh_sinh(CUT_LENGTH - r_peak, QUAD_TOL, |d, _| {
            let r = r_peak + d;
            let qm1 = (mu * (d / r_peak).ln_1p()).exp_m1();
            let q = 1.0 + qm1;
            (-r).exp() * r.powf(gamma_exp) * rational(q, qm1)
        })
    } else {
        0.0
    };
    (first + second) / PI
}

// ---------------------------------------------------------------------------
// envelope |E_{mu,eta}(-z)| <= M / (1 + |z|)

/// Parameter box over which the envelope constant is calibrated.
pub const ENVELOPE_MU: (f64, f64) = (0.1, 1.9);
pub const ENVELOPE_ETA: (f64, f64) = (0.5, 2.5);
/// Allowance for (mu, eta, z) between calibration grid points.
pub const ENVELOPE_SLACK: f64 = 1.25;

/// Calibrated constant M: the largest (1+t)|E_{mu,eta}(-t)| over the grid
/// mu in {0.1, ..., 1.9}, eta in {0.5, 1, ..., 2.5}, t in {0} and 161
/// log-spaced points of [1e-2, 1e6]. Computed once per process.
pub fn envelope_constant() -> f64 {
    static M: OnceLock<f64> = OnceLock::new();
    *M.get_or_init(calibrate_envelope)
}

fn calibrate_envelope() -> f64 {
    let mus: Vec<f64> = (1..=19).map(|i| i as f64 * 0.1).collect();
    let etas = [0.5, 1.0, 1.5, 2.0, 2.5];
    let mut ts = vec![0.0];
    ts.extend((0..=160).map(|i| 10f64.powf(-2.0 + 8.0 * i as f64 / 160.0)));
    let pairs: Vec<(f64, f64)> = mus
        .iter()
        .flat_map(|&m| etas.iter().map(move |&e| (m, e)))
        .collect();
    par::map_slice(&pairs, |&(mu, eta)| {
        ts.iter()
            .map(|&t| (1.0 + t) * ml_unchecked(mu, eta, -t).abs())
            .fold(0.0, f64::max)
    })
    .into_iter()
    .fold(0.0, f64::max)
}

/// [`ml_eval`] for z <= 0 that additionally checks the returned value
/// against the calibrated envelope M / (1 + |z|).
pub fn ml_eval_bounded(q: &MlQuery) -> Result<f64> {
    q.validate()?;
    if q.z > 0.0 {
        return Err(Error::Domain(format!(
            "bounded evaluation needs z <= 0, got {}",
            q.z
        )));
    }
    if q.mu < ENVELOPE_MU.0 || q.mu > ENVELOPE_MU.1 || q.eta < ENVELOPE_ETA.0 || q.eta > ENVELOPE_ETA.1
    {
        return Err(Error::Domain(format!(
            "(mu, eta) = ({}, {}) outside the calibrated envelope box",
            q.mu, q.eta
        )));
    }
    let v = ml_eval(q)?;
    let scaled = (1.0 + q.z.abs()) * v.abs();
    let bound = envelope_constant() * ENVELOPE_SLACK;
    if scaled > bound {
        return Err(Error::EnvelopeViolation {
            mu: q.mu,
            eta: q.eta,
            z: q.z,
            scaled,
            bound,
        });
    }
    Ok(v)
}

// ---------------------------------------------------------------------------
// real zeros of E_{beta,eta}(-t)

/// Outcome of a sign-change scan of t -> E_{beta,eta}(-t) on (0, scan_bound].
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroCertificate {
    pub beta: f64,
    pub eta: f64,
    /// Largest zero found, refined to 1e-10; `None` when no sign change was seen.
    pub largest_zero_h: Option<f64>,
    /// Interval of width <= 1e-10 containing the largest zero.
    pub bracket: Option<(f64, f64)>,
    /// Number of sign changes met during the scan.
    pub zero_count_scanned: usize,
    pub scan_bound: f64,
}

pub const ZERO_SCAN_STEP: f64 = 0.01;
/// Beyond t = 100 the scan step grows geometrically with this ratio.
pub const ZERO_SCAN_RELATIVE_STEP: f64 = 1e-4;
const ZERO_TOL: f64 = 1e-10;

/// Default scan bound: the larger of 10 Gamma(2-beta)^(-1/beta) and 1.5x the
/// point where the oscillating pole terms drop below 1e-3 of the leading
/// inverse-power term (no sign change can occur past it).
pub fn default_scan_bound(beta: f64, eta: f64) -> f64 {
    let heuristic = 10.0 * gamma(2.0 - beta).powf(-1.0 / beta);
    let leading = |t: f64| -> f64 {
        (1..=4)
            .map(|k| recip_gamma(eta - beta * k as f64) * t.powi(-k))
            .find(|v| *v != 0.0)
            .unwrap_or(0.0)
            .abs()
    };
    let theta = PI / beta;
    let amplitude = |rho: f64| 2.0 / beta * (rho * theta.cos()).exp() * rho.powf(1.0 - eta);
    let mut rho: f64 = 1.0;
    while rho < 1e6 {
        let t = rho.powf(beta);
        if amplitude(rho) <= 1e-3 * leading(t) && amplitude(2.0 * rho) <= amplitude(rho) {
            break;
        }
        rho *= 1.25;
    }
    heuristic.max(1.5 * rho.powf(beta)).min(1e8)
}

/// Largest positive zero of E_{beta,eta}(-t) on (0, scan_bound].
///
/// `beta` must lie in (1, 2]; beta = 2 (identity checks only) requires an
/// explicit bound because the function oscillates forever there.
pub fn ml_largest_real_zero(
    beta: f64,
    eta: f64,
    scan_bound: Option<f64>,
) -> Result<ZeroCertificate> {
    if !(beta > 1.0 && beta <= 2.0) {
        return Err(Error::Domain(format!("beta = {beta} not in (1, 2]")));
    }
    MlQuery::new(beta, eta, 0.0)?;
    let bound = match scan_bound {
        Some(b) if !(b > 0.0 && b.is_finite()) => {
            return Err(Error::Domain(format!("scan bound {b} must be positive")))
        }
        Some(b) => b,
        None if beta == 2.0 => {
            return Err(Error::Domain(
                "beta = 2 needs an explicit scan bound".to_string(),
            ))
        }
        None => default_scan_bound(beta, eta),
    };

    let grid = scan_grid(bound);
    let values = par::map_slice(&grid, |&t| ml_unchecked(beta, eta, -t));
    let mut count = 0;
    let mut last: Option<(f64, f64)> = None;
    for i in 0..grid.len() {
        if values[i] == 0.0 {
            count += 1;
            last = Some((grid[i], grid[i]));
        } else if i + 1 < grid.len() && values[i] * values[i + 1] < 0.0 {
            count += 1;
            last = Some((grid[i], grid[i + 1]));
        }
    }
    let (largest, bracket) = match last {
        None => (None, None),
        Some((lo, hi)) if lo == hi => (Some(lo), Some((lo, hi))),
        Some((mut lo, mut hi)) => {
            let mut f_lo = ml_unchecked(beta, eta, -lo);
            while hi - lo > ZERO_TOL {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let f_mid = ml_unchecked(beta, eta, -mid);
                if f_mid == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (f_mid < 0.0) == (f_lo < 0.0) {
                    lo = mid;
                    f_lo = f_mid;
                } else {
                    hi = mid;
                }
            }
            (Some(0.5 * (lo + hi)), Some((lo, hi)))
        }
    };
    Ok(ZeroCertificate {
        beta,
        eta,
        largest_zero_h: largest,
        bracket,
        zero_count_scanned: count,
        scan_bound: bound,
    })
}

/// Scan points: uniform step 0.01 on (0, min(bound, 100)], then geometric.
fn scan_grid(bound: f64) -> Vec<f64> {
    let uniform_end = bound.min(100.0);
    let n = (uniform_end / ZERO_SCAN_STEP).floor() as usize;
    let mut grid: Vec<f64> = (1..=n).map(|i| i as f64 * ZERO_SCAN_STEP).collect();
    let mut t = grid.last().copied().unwrap_or(ZERO_SCAN_STEP);
    while t < bound {
        t = (t * (1.0 + ZERO_SCAN_RELATIVE_STEP)).min(bound);
        grid.push(t);
    }
    if grid.last().is_none_or(|&l| l < bound) {
        grid.push(bound);
    }
    grid
}
