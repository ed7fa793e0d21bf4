//! Mode problem in y for one eigenvalue lambda:
//!
//!   D^alpha Y = -lambda Y on (0, b),  D^beta Y = -lambda Y on (-a, 0)
//!   Y(+0) = Y(-0),  D^alpha Y(+0) = Y'(-0),  Y(b) - Y(-a) = phi_n,
//!
//! with Caputo derivatives taken from the interface outwards (on the lower
//! side in the variable s = -y). The solution is
//!
//!   Y(y) = c1 E_{alpha,1}(-lambda y^alpha)                         y > 0
//!   Y(y) = c2 E_{beta,1}(-lambda s^beta) + c3 s E_{beta,2}(-lambda s^beta)   s = -y > 0
//!
//! with c2 = c1, c3 = lambda c1 and c1 = phi_n / Delta, where
//! Delta = E_{alpha,1}(-lambda b^alpha) - E_{beta,1}(-lambda a^beta) - a lambda E_{beta,2}(-lambda a^beta).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mittag_leffler::{ml_largest_real_zero, ml_unchecked, MlQuery};
use crate::par;
use crate::special::gamma;
use crate::spectral::EigenBasis;

/// |phi_n| above this counts as a nonzero Fourier coefficient.
pub const PHI_TOL: f64 = 1e-12;
/// Fewest points accepted for a Caputo oracle mesh.
pub const MIN_CAPUTO_STEPS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TemporalConfig {
    pub alpha: f64,
    pub beta: f64,
    pub a: f64,
    pub b: f64,
}

impl TemporalConfig {
    pub fn new(alpha: f64, beta: f64, a: f64, b: f64) -> Result<Self> {
        let c = TemporalConfig { alpha, beta, a, b };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Domain(format!("alpha = {} not in (0, 1)", self.alpha)));
        }
        if !(self.beta > 1.0 && self.beta < 2.0) {
            return Err(Error::Domain(format!("beta = {} not in (1, 2)", self.beta)));
        }
        for (name, v) in [("a", self.a), ("b", self.b)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} = {v} must be positive")));
            }
        }
        Ok(())
    }

    /// lim Delta(n) = -1 / (a^(beta-1) Gamma(2-beta)).
    pub fn delta_limit(&self) -> f64 {
        -1.0 / (self.a.powf(self.beta - 1.0) * gamma(2.0 - self.beta))
    }

    /// Default resonance threshold 1e-10 (1 + |limit|).
    pub fn resonance_tolerance(&self) -> f64 {
        1e-10 * (1.0 + self.delta_limit().abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeStatus {
    Regular,
    ResonantSolvable,
    ResonantUnsolvable,
}

impl ModeStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModeStatus::Regular => "regular",
            ModeStatus::ResonantSolvable => "resonant-solvable",
            ModeStatus::ResonantUnsolvable => "resonant-unsolvable",
        }
    }
}

impl std::fmt::Display for ModeStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeSolution {
    pub lambda: f64,
    pub phi_n: f64,
    pub delta_n: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub status: ModeStatus,
}

fn ml(mu: f64, eta: f64, z: f64) -> Result<f64> {
    let q = MlQuery::new(mu, eta, z)?;
    let v = ml_unchecked(q.mu, q.eta, q.z);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(format!("E_{{{mu},{eta}}}({z})")))
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("lambda = {lambda} must be nonnegative")));
    }
    Ok(())
}

/// Delta(n) for eigenvalue `lambda`.
pub fn delta_n(lambda: f64, cfg: &TemporalConfig) -> Result<f64> {
    cfg.validate()?;
    check_lambda(lambda)?;
    let TemporalConfig { alpha, beta, a, b } = *cfg;
    let upper = ml(alpha, 1.0, -lambda * b.powf(alpha))?;
    let z = -lambda * a.powf(beta);
    let lower = ml(beta, 1.0, z)? + a * lambda * ml(beta, 2.0, z)?;
    Ok(upper - lower)
}

/// Coefficients for a mode with given Delta; `tol` is the resonance threshold.
pub fn solve_mode_with_delta(lambda: f64, phi_n: f64, delta: f64, tol: f64) -> ModeSolution {
    let zero = ModeSolution {
        lambda,
        phi_n,
        delta_n: delta,
        c1: 0.0,
        c2: 0.0,
        c3: 0.0,
        status: ModeStatus::ResonantSolvable,
    };
    if delta.abs() <= tol {
        if phi_n.abs() > PHI_TOL {
            return ModeSolution {
                status: ModeStatus::ResonantUnsolvable,
                ..zero
            };
        }
        return zero;
    }
    let c1 = phi_n / delta;
    ModeSolution {
        c1,
        c2: c1,
        c3: lambda * c1,
        status: ModeStatus::Regular,
        ..zero
    }
}

/// Solve the mode problem; `tol` bounds |Delta| for resonance.
pub fn solve_mode(lambda: f64, phi_n: f64, cfg: &TemporalConfig, tol: f64) -> Result<ModeSolution> {
    if !(tol >= 0.0) {
        return Err(Error::Domain(format!("tolerance {tol} must be nonnegative")));
    }
    let d = delta_n(lambda, cfg)?;
    Ok(solve_mode_with_delta(lambda, phi_n, d, tol))
}

/// Y(y) for y in (0, b].
pub fn y_upper(sol: &ModeSolution, cfg: &TemporalConfig, y: f64) -> f64 {
    if y == 0.0 {
        return sol.c1;
    }
    sol.c1 * ml_unchecked(cfg.alpha, 1.0, -sol.lambda * y.powf(cfg.alpha))
}

/// Y(-s) for s in [0, a]; s = 0 gives the lower one-sided limit c2.
pub fn y_lower(sol: &ModeSolution, cfg: &TemporalConfig, s: f64) -> f64 {
    if s == 0.0 {
        return sol.c2;
    }
    let z = -sol.lambda * s.powf(cfg.beta);
    sol.c2 * ml_unchecked(cfg.beta, 1.0, z) + sol.c3 * s * ml_unchecked(cfg.beta, 2.0, z)
}

/// dY/ds on the lower side, s = -y > 0.
fn lower_slope(sol: &ModeSolution, cfg: &TemporalConfig, s: f64) -> f64 {
    if s == 0.0 {
        return sol.c3;
    }
    let z = -sol.lambda * s.powf(cfg.beta);
    -sol.lambda * sol.c2 * s.powf(cfg.beta - 1.0) * ml_unchecked(cfg.beta, cfg.beta, z)
        + sol.c3 * ml_unchecked(cfg.beta, 1.0, z)
}

/// Y(y) on [-a, b]; y = 0 returns c1.
pub fn y_eval(sol: &ModeSolution, cfg: &TemporalConfig, y: f64) -> Result<f64> {
    let slack = 1e-12 * (cfg.a + cfg.b);
    if !(y >= -cfg.a - slack && y <= cfg.b + slack) {
        return Err(Error::Domain(format!(
            "y = {y} outside [-{}, {}]",
            cfg.a, cfg.b
        )));
    }
    Ok(if y >= 0.0 {
        y_upper(sol, cfg, y)
    } else {
        y_lower(sol, cfg, -y)
    })
}

/// Graded mesh t_j = end (j / steps)^grading with the points of `extra`
/// merged in; sorted, deduplicated, starting at 0.
fn graded_mesh(end: f64, steps: usize, grading: f64, extra: &[f64]) -> Vec<f64> {
    let mut mesh: Vec<f64> = (0..=steps)
        .map(|j| end * (j as f64 / steps as f64).powf(grading))
        .collect();
    mesh.extend(extra.iter().copied().filter(|&t| t > 0.0 && t <= end));
    mesh.sort_by(f64::total_cmp);
    mesh.dedup();
    mesh
}

/// L1 approximation of the Caputo derivative of order `order` in (0, 1) of
/// the samples `f` on `mesh`, at every mesh point listed in `targets`
/// (indices into the mesh).
fn l1_at(mesh: &[f64], f: &[f64], order: f64, targets: &[usize]) -> Vec<f64> {
    let scale = 1.0 / gamma(2.0 - order);
    let p = 1.0 - order;
    par::map_slice(targets, |&i| {
        let t = mesh[i];
        let mut acc = 0.0;
        for j in 0..i {
            let h = mesh[j + 1] - mesh[j];
            let w = (t - mesh[j]).powf(p) - (t - mesh[j + 1]).powf(p);
            acc += (f[j + 1] - f[j]) / h * w;
        }
        scale * acc
    })
}

/// Caputo derivatives of Y at several points, all on one side of the
/// interface: values of `ys` must be all positive or all negative.
///
/// Upper side: L1 scheme of order alpha on Y over a mesh graded with
/// exponent 2/alpha. Lower side: the order-beta derivative in s = -y equals
/// the order (beta-1) derivative of dY/ds, computed with the L1 scheme on the
/// analytic slope over a mesh graded with exponent 2/(beta-1).
pub fn caputo_profile(
    sol: &ModeSolution,
    cfg: &TemporalConfig,
    ys: &[f64],
    steps: usize,
) -> Result<Vec<f64>> {
    if steps < MIN_CAPUTO_STEPS {
        return Err(Error::Domain(format!(
            "Caputo oracle needs at least {MIN_CAPUTO_STEPS} steps, got {steps}"
        )));
    }
    if ys.is_empty() {
        return Ok(Vec::new());
    }
    let upper = ys[0] > 0.0;
    if ys.iter().any(|&y| y == 0.0 || (y > 0.0) != upper || !y.is_finite()) {
        return Err(Error::Domain(
            "Caputo points must be nonzero and on one side of the interface".to_string(),
        ));
    }
    let dist: Vec<f64> = ys.iter().map(|y| y.abs()).collect();
    let end = dist.iter().copied().fold(0.0, f64::max);
    let (order, grading) = if upper {
        (cfg.alpha, 2.0 / cfg.alpha)
    } else {
        (cfg.beta - 1.0, 2.0 / (cfg.beta - 1.0))
    };
    let mesh = graded_mesh(end, steps, grading, &dist);
    let f: Vec<f64> = if upper {
        par::map_slice(&mesh, |&t| y_upper(sol, cfg, t))
    } else {
        par::map_slice(&mesh, |&t| lower_slope(sol, cfg, t))
    };
    let targets: Vec<usize> = dist
        .iter()
        .map(|d| mesh.partition_point(|&t| t < *d))
        .collect();
    Ok(l1_at(&mesh, &f, order, &targets))
}

/// Caputo derivative of Y at one point y != 0 with a mesh of `steps` cells.
pub fn caputo_of_mode(sol: &ModeSolution, cfg: &TemporalConfig, y: f64, steps: usize) -> Result<f64> {
    Ok(caputo_profile(sol, cfg, &[y], steps)?[0])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessEntry {
    pub mode: usize,
    pub lambda: f64,
    pub delta_n: f64,
    /// |Delta(n)| at or below the tolerance.
    pub resonant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub entries: Vec<UniquenessEntry>,
    pub tolerance: f64,
    /// -1 / (a^(beta-1) Gamma(2-beta)).
    pub limit: f64,
    /// Separation margin delta = 0.9 |limit|.
    pub separation: f64,
    /// First mode from which every |Delta(n)| >= separation; `None` if the
    /// last retained mode is still below it.
    pub separated_from: Option<usize>,
    /// |Delta(n) - limit| strictly decreasing over the last five modes.
    pub tail_monotone: bool,
    /// Largest real zero of E_{beta,2}(-t).
    pub largest_zero_h: Option<f64>,
    /// `true` when no retained mode is resonant.
    pub unique: bool,
}

/// Delta(n) for every retained mode together with the asymptotic diagnostics.
pub fn uniqueness_report(basis: &EigenBasis, cfg: &TemporalConfig, tol: f64) -> Result<UniquenessReport> {
    cfg.validate()?;
    let deltas: Vec<Result<f64>> = par::map_slice(&basis.lambdas, |&l| delta_n(l, cfg));
    let mut entries = Vec::with_capacity(deltas.len());
    for (i, d) in deltas.into_iter().enumerate() {
        let d = d?;
        entries.push(UniquenessEntry {
            mode: i + 1,
            lambda: basis.lambdas[i],
            delta_n: d,
            resonant: d.abs() <= tol,
        });
    }
    let limit = cfg.delta_limit();
    let separation = 0.9 * limit.abs();
    let mut separated_from = None;
    for e in entries.iter().rev() {
        if e.delta_n.abs() >= separation {
            separated_from = Some(e.mode);
        } else {
            break;
        }
    }
    let tail: Vec<f64> = entries
        .iter()
        .rev()
        .take(5)
        .map(|e| (e.delta_n - limit).abs())
        .collect();
    let tail_monotone = tail.len() >= 2 && tail.windows(2).all(|w| w[0] < w[1]);
    let largest_zero_h = ml_largest_real_zero(cfg.beta, 2.0, None)?.largest_zero_h;
    let unique = entries.iter().all(|e| !e.resonant);
    Ok(UniquenessReport {
        entries,
        tolerance: tol,
        limit,
        separation,
        separated_from,
        tail_monotone,
        largest_zero_h,
        unique,
    })
}
