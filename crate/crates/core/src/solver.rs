//! Truncated series solution u(x, y) = sum_n X_n(x) Y_n(y) and its checks.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::green::GreenSpec;
use crate::mittag_leffler::{envelope_constant, ml_unchecked, ENVELOPE_SLACK};
use crate::par;
use crate::phi::PhiSpec;
use crate::spectral::{
    admissibility_screen, bessel_check, build_quadrature, compute_basis, fourier_coefficients,
    AdmissibilityScreen, EigenBasis,
};
use crate::temporal::{
    caputo_profile, delta_n, solve_mode_with_delta, uniqueness_report, y_lower, y_upper,
    ModeSolution, ModeStatus, TemporalConfig, UniquenessReport, MIN_CAPUTO_STEPS,
};

/// Thresholds applied by [`VerificationReport::failures`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub pde: f64,
    pub interface: f64,
    pub nonlocal: f64,
    pub closure: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            pde: 5e-3,
            interface: 1e-9,
            nonlocal: 1e-4,
            closure: 1e-9,
        }
    }
}

pub const DEFAULT_GRID_NX: usize = 41;
pub const DEFAULT_GRID_NY: usize = 21;
pub const DEFAULT_VERIFY_STEPS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemConfig {
    pub spec: GreenSpec,
    pub temporal: TemporalConfig,
    pub phi: PhiSpec,
    pub modes: usize,
    pub quad_order: usize,
    pub grid_nx: usize,
    /// Rows per half; the y grid holds 2 * grid_ny rows.
    pub grid_ny: usize,
    /// Resonance threshold on |Delta(n)|; `None` uses 1e-10 (1 + |limit|).
    pub resonance_tol: Option<f64>,
    pub verify_steps: usize,
    pub tolerances: Tolerances,
}

impl ProblemConfig {
    /// k = 1, m = 0, alpha = 0.5, beta = 1.5, a = b = 1, phi = x(1-x), 20 modes.
    pub fn reference() -> Self {
        ProblemConfig {
            spec: GreenSpec { k: 1, m: 0.0 },
            temporal: TemporalConfig {
                alpha: 0.5,
                beta: 1.5,
                a: 1.0,
                b: 1.0,
            },
            phi: PhiSpec::reference(),
            modes: 20,
            quad_order: 128,
            grid_nx: DEFAULT_GRID_NX,
            grid_ny: DEFAULT_GRID_NY,
            resonance_tol: None,
            verify_steps: DEFAULT_VERIFY_STEPS,
            tolerances: Tolerances::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        self.temporal.validate()?;
        self.phi.validate()?;
        if !(crate::quadrature::MIN_ORDER..=crate::quadrature::MAX_ORDER).contains(&self.quad_order) {
            return Err(Error::Config(format!(
                "quad_order = {} outside [{}, {}]",
                self.quad_order,
                crate::quadrature::MIN_ORDER,
                crate::quadrature::MAX_ORDER
            )));
        }
        if self.modes == 0 || self.modes > self.quad_order {
            return Err(Error::Config(format!(
                "modes = {} must lie in [1, quad_order = {}]",
                self.modes, self.quad_order
            )));
        }
        if self.grid_nx < 2 || self.grid_ny < 2 {
            return Err(Error::Config("grid dimensions must be at least 2".to_string()));
        }
        if self.verify_steps < MIN_CAPUTO_STEPS {
            return Err(Error::Config(format!(
                "verify_steps = {} below {MIN_CAPUTO_STEPS}",
                self.verify_steps
            )));
        }
        if let Some(t) = self.resonance_tol {
            if !(t >= 0.0) {
                return Err(Error::Config(format!("resonance_tol = {t} must be nonnegative")));
            }
        }
        let t = &self.tolerances;
        if [t.pde, t.interface, t.nonlocal, t.closure]
            .iter()
            .any(|v| !(*v > 0.0))
        {
            return Err(Error::Config("tolerances must be positive".to_string()));
        }
        Ok(())
    }

    pub fn resonance_tolerance(&self) -> f64 {
        self.resonance_tol
            .unwrap_or_else(|| self.temporal.resonance_tolerance())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// 0 <= y <= b, including the +0 interface row.
    Upper,
    /// -a <= y <= 0, including the -0 interface row.
    Lower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldRow {
    pub y: f64,
    pub branch: Branch,
    /// u(x_i, y) for every grid column.
    pub values: Vec<f64>,
}

/// u(x, y) on the grid: rows run from y = -a up to the -0 row, then from the
/// +0 row up to y = b.
#[derive(Debug, Clone)]
pub struct SolutionField {
    pub config: ProblemConfig,
    pub x: Vec<f64>,
    pub rows: Vec<FieldRow>,
    pub modes_used: usize,
    pub modes: Vec<ModeSolution>,
    /// `x_modes[i][n]` = X_{n+1}(x_i).
    pub x_modes: Vec<Vec<f64>>,
    pub basis: EigenBasis,
    pub admissibility: AdmissibilityScreen,
}

impl SolutionField {
    fn row_index(&self, branch: Branch, y_abs: f64) -> Option<usize> {
        self.rows
            .iter()
            .position(|r| r.branch == branch && r.y.abs() == y_abs)
    }

    /// Row at the interface on the given side.
    pub fn interface_row(&self, branch: Branch) -> &FieldRow {
        &self.rows[self.row_index(branch, 0.0).expect("interface rows present")]
    }

    pub fn top_row(&self) -> &FieldRow {
        self.rows.last().expect("nonempty grid")
    }

    pub fn bottom_row(&self) -> &FieldRow {
        &self.rows[0]
    }

    /// u at an arbitrary point, summed from the stored modes.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let xm = self.basis.eigenfunctions_at(x);
        let cfg = &self.config.temporal;
        self.modes
            .iter()
            .zip(&xm)
            .map(|(s, xv)| {
                let yv = if y >= 0.0 {
                    y_upper(s, cfg, y)
                } else {
                    y_lower(s, cfg, -y)
                };
                xv * yv
            })
            .sum()
    }
}

/// Assemble with Delta(n) from the exact formula.
pub fn assemble(config: &ProblemConfig) -> Result<SolutionField> {
    let cfg = config.temporal;
    assemble_with(config, &move |_, lambda| delta_n(lambda, &cfg))
}

/// Assemble with a caller-supplied Delta(mode, lambda).
pub fn assemble_with(
    config: &ProblemConfig,
    delta: &(dyn Fn(usize, f64) -> Result<f64> + Sync),
) -> Result<SolutionField> {
    config.validate()?;
    let quadrature = build_quadrature(config.quad_order)?;
    let basis = compute_basis(&config.spec, &quadrature, config.modes)?;
    let phi = config.phi.evaluator(&basis)?;
    let admissibility = admissibility_screen(&*phi);
    let phi_n = fourier_coefficients(&basis, &*phi)?;
    drop(phi);

    let tol = config.resonance_tolerance();
    let indices: Vec<usize> = (0..config.modes).collect();
    let solved: Vec<Result<ModeSolution>> = par::map_slice(&indices, |&i| {
        let lambda = basis.lambdas[i];
        Ok(solve_mode_with_delta(lambda, phi_n[i], delta(i + 1, lambda)?, tol))
    });
    let modes: Vec<ModeSolution> = solved.into_iter().collect::<Result<_>>()?;
    let bad: Vec<usize> = modes
        .iter()
        .enumerate()
        .filter(|(_, s)| s.status == ModeStatus::ResonantUnsolvable)
        .map(|(i, _)| i + 1)
        .collect();
    if !bad.is_empty() {
        return Err(Error::Unsolvable { modes: bad });
    }

    let nx = config.grid_nx;
    let x: Vec<f64> = (0..nx).map(|i| i as f64 / (nx - 1) as f64).collect();
    let x_modes = par::map_slice(&x, |&xv| basis.eigenfunctions_at(xv));

    let TemporalConfig { a, b, .. } = config.temporal;
    let ny = config.grid_ny;
    let mut ys: Vec<(f64, Branch)> = Vec::with_capacity(2 * ny);
    for j in 0..ny {
        // last lower row is s = 0, stored as y = -0
        let s = a * (ny - 1 - j) as f64 / (ny - 1) as f64;
        ys.push((-s, Branch::Lower));
    }
    for j in 0..ny {
        ys.push((b * j as f64 / (ny - 1) as f64, Branch::Upper));
    }
    let cfg = config.temporal;
    let rows = par::map_slice(&ys, |&(y, branch)| {
        let yv: Vec<f64> = modes
            .iter()
            .map(|s| match branch {
                Branch::Upper => y_upper(s, &cfg, y),
                Branch::Lower => y_lower(s, &cfg, -y),
            })
            .collect();
        let values = x_modes
            .iter()
            .map(|xm| xm.iter().zip(&yv).map(|(p, q)| p * q).sum())
            .collect();
        FieldRow { y, branch, values }
    });

    Ok(SolutionField {
        config: config.clone(),
        x,
        rows,
        modes_used: config.modes,
        modes,
        x_modes,
        basis,
        admissibility,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    /// |lambda_n^3 phi_n| for n = 1..N.
    pub values: Vec<f64>,
    /// Partial sums of (lambda_n^3 phi_n)^2.
    pub partial_sums: Vec<f64>,
    pub nondecreasing: bool,
    /// Whether phi, psi_1, psi_2 (psi_{j+1} = x^m psi_j^(2k)) vanish to order
    /// k-1 at both ends and are C^(2k); `None` when phi has no closed form.
    pub hypotheses_met: Option<bool>,
    /// int_0^1 x^-m psi_3^2 dx when the hypotheses hold.
    pub bound: Option<f64>,
    /// Last partial sum at or below the bound.
    pub bounded: Option<bool>,
    pub note: String,
}

/// |lambda_n^3 phi_n| and, for closed-form data, the Bessel bound on its
/// square sum.
pub fn coefficient_decay(config: &ProblemConfig, basis: &EigenBasis) -> Result<DecayReport> {
    let phi = config.phi.evaluator(basis)?;
    let phi_n = fourier_coefficients(basis, &*phi)?;
    let values: Vec<f64> = phi_n
        .iter()
        .zip(&basis.lambdas)
        .map(|(p, l)| (l.powi(3) * p).abs())
        .collect();
    let mut acc = 0.0;
    let partial_sums: Vec<f64> = values
        .iter()
        .map(|v| {
            acc += v * v;
            acc
        })
        .collect();
    let nondecreasing = partial_sums.windows(2).all(|w| w[0] <= w[1]);

    let k = config.spec.k;
    let m = config.spec.m;
    let (hypotheses_met, bound, note) = match config.phi.power_sum(k) {
        None => (None, None, "no closed form for phi; raw sequence only".to_string()),
        Some(psi0) => {
            let mut chain = vec![psi0];
            for _ in 0..3 {
                let next = chain.last().unwrap().derivative(2 * k).shift(m);
                chain.push(next);
            }
            match (0..3).find(|&j| !chain[j].vanishes_at_ends(k, 2 * k)) {
                Some(j) => (
                    Some(false),
                    None,
                    format!("psi_{j} does not vanish to order {} at the ends; bound not applicable", k - 1),
                ),
                None => match chain[3].weighted_square_integral(m) {
                    Some(v) => (Some(true), Some(v), "bound from int x^-m psi_3^2".to_string()),
                    None => (
                        Some(false),
                        None,
                        "x^-m psi_3^2 is not integrable; bound not applicable".to_string(),
                    ),
                },
            }
        }
    };
    let bounded = bound.map(|b| partial_sums.last().copied().unwrap_or(0.0) <= b * (1.0 + 1e-8) + 1e-12);
    Ok(DecayReport {
        values,
        partial_sums,
        nondecreasing,
        hypotheses_met,
        bound,
        bounded,
        note,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BesselPoint {
    pub x: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    /// sup |D u + (-1)^k x^m d^2k u / dx^2k| over both subdomains.
    pub pde_residual_sup: f64,
    pub pde_residual_upper: f64,
    pub pde_residual_lower: f64,
    /// Same residual with a central second difference in x (k = 1 only).
    pub pde_residual_fd: Option<f64>,
    pub conjugation_value_gap: f64,
    pub conjugation_flux_gap: f64,
    /// sup over grid columns of |u(x, b) - u(x, -a) - phi(x)|.
    pub nonlocal_gap_sup: f64,
    /// sup over rows of |u(0, y)| and |u(1, y)|.
    pub boundary_gap: f64,
    /// max over regular modes of |Y_n(b) - Y_n(-a) - phi_n|.
    pub closure_gap_max: f64,
    pub bessel_ok: bool,
    pub bessel_points: Vec<BesselPoint>,
    pub coefficient_decay: DecayReport,
    pub uniqueness: UniquenessReport,
    pub admissibility: AdmissibilityScreen,
    pub verify_steps: usize,
    pub tolerances: Tolerances,
}

impl VerificationReport {
    /// Threshold violations, empty when every check passes.
    pub fn failures(&self) -> Vec<String> {
        let t = &self.tolerances;
        let mut out = Vec::new();
        let mut check = |name: &str, v: f64, tol: f64| {
            if !(v <= tol) {
                out.push(format!("{name} = {v:e} exceeds {tol:e}"));
            }
        };
        check("pde_residual_sup", self.pde_residual_sup, t.pde);
        if let Some(fd) = self.pde_residual_fd {
            check("pde_residual_fd", fd, t.pde);
        }
        check("conjugation_value_gap", self.conjugation_value_gap, t.interface);
        check("conjugation_flux_gap", self.conjugation_flux_gap, t.interface);
        check("boundary_gap", self.boundary_gap, t.interface);
        check("nonlocal_gap_sup", self.nonlocal_gap_sup, t.nonlocal);
        check("closure_gap_max", self.closure_gap_max, t.closure);
        if !self.bessel_ok {
            out.push("bessel inequality violated".to_string());
        }
        out
    }
}

/// Points used for the finite-difference cross-check: x = i/10 with
/// y = b/2 for odd i and y = -a/2 for even i.
pub fn fd_points(cfg: &TemporalConfig) -> Vec<(f64, f64)> {
    (1..=9)
        .map(|i| {
            let y = if i % 2 == 1 { 0.5 * cfg.b } else { -0.5 * cfg.a };
            (i as f64 / 10.0, y)
        })
        .collect()
}

const FD_STEP: f64 = 1e-3;

/// Check the assembled field against the equation and conditions.
pub fn verify(field: &SolutionField, config: &ProblemConfig) -> Result<VerificationReport> {
    if field.config != *config {
        return Err(Error::Mismatch(
            "field was assembled from a different configuration".to_string(),
        ));
    }
    let cfg = config.temporal;
    let steps = config.verify_steps;
    let basis = &field.basis;
    let nx = field.x.len();

    // sample rows strictly inside each half
    let interior: Vec<usize> = (0..field.rows.len())
        .filter(|&r| {
            let y = field.rows[r].y;
            y != 0.0 && y != cfg.b && y != -cfg.a
        })
        .collect();
    let fd = if config.spec.k == 1 { fd_points(&cfg) } else { Vec::new() };
    let mut upper: Vec<f64> = interior
        .iter()
        .map(|&r| field.rows[r].y)
        .filter(|&y| y > 0.0)
        .collect();
    let mut lower: Vec<f64> = interior
        .iter()
        .map(|&r| field.rows[r].y)
        .filter(|&y| y < 0.0)
        .collect();
    for &(_, y) in &fd {
        let list = if y > 0.0 { &mut upper } else { &mut lower };
        if !list.contains(&y) {
            list.push(y);
        }
    }

    // per mode: D Y_n at the sample points, and D Y_n + lambda_n Y_n
    let per_mode: Vec<Result<(Vec<f64>, Vec<f64>)>> = par::map_slice(&field.modes, |s| {
        let du = caputo_profile(s, &cfg, &upper, steps)?;
        let dl = caputo_profile(s, &cfg, &lower, steps)?;
        Ok((du, dl))
    });
    let per_mode: Vec<(Vec<f64>, Vec<f64>)> = per_mode.into_iter().collect::<Result<_>>()?;
    let caputo_at = |n: usize, y: f64| -> f64 {
        if y > 0.0 {
            per_mode[n].0[upper.iter().position(|&v| v == y).unwrap()]
        } else {
            per_mode[n].1[lower.iter().position(|&v| v == y).unwrap()]
        }
    };
    let y_at = |s: &ModeSolution, y: f64| {
        if y >= 0.0 {
            y_upper(s, &cfg, y)
        } else {
            y_lower(s, &cfg, -y)
        }
    };

    let mut res_upper: f64 = 0.0;
    let mut res_lower: f64 = 0.0;
    for &r in &interior {
        let y = field.rows[r].y;
        let resid: Vec<f64> = field
            .modes
            .iter()
            .enumerate()
            .map(|(n, s)| caputo_at(n, y) + s.lambda * y_at(s, y))
            .collect();
        for xm in &field.x_modes[1..nx - 1] {
            let v: f64 = xm.iter().zip(&resid).map(|(p, q)| p * q).sum::<f64>().abs();
            if y > 0.0 {
                res_upper = res_upper.max(v);
            } else {
                res_lower = res_lower.max(v);
            }
        }
    }

    let pde_residual_fd = if fd.is_empty() {
        None
    } else {
        let sign = if config.spec.k.is_multiple_of(2) { 1.0 } else { -1.0 };
        let m = config.spec.m;
        let vals: Vec<f64> = par::map_slice(&fd, |&(x, y)| {
            let yv: Vec<f64> = field.modes.iter().map(|s| y_at(s, y)).collect();
            let u = |xx: f64| -> f64 {
                basis
                    .eigenfunctions_at(xx)
                    .iter()
                    .zip(&yv)
                    .map(|(p, q)| p * q)
                    .sum()
            };
            let uxx = (u(x + FD_STEP) - 2.0 * u(x) + u(x - FD_STEP)) / (FD_STEP * FD_STEP);
            let du: f64 = basis
                .eigenfunctions_at(x)
                .iter()
                .enumerate()
                .map(|(n, xv)| xv * caputo_at(n, y))
                .sum();
            (du + sign * x.powf(m) * uxx).abs()
        });
        Some(vals.into_iter().fold(0.0, f64::max))
    };

    let plus = field.interface_row(Branch::Upper);
    let minus = field.interface_row(Branch::Lower);
    let conjugation_value_gap = sup_diff(&plus.values, &minus.values);
    let conjugation_flux_gap = field
        .x_modes
        .iter()
        .map(|xm| {
            xm.iter()
                .zip(&field.modes)
                .map(|(xv, s)| xv * (-s.lambda * s.c1 + s.c3))
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max);

    let phi = config.phi.evaluator(basis)?;
    let top = field.top_row();
    let bottom = field.bottom_row();
    let nonlocal_gap_sup = field
        .x
        .iter()
        .enumerate()
        .map(|(i, &x)| (top.values[i] - bottom.values[i] - phi(x)).abs())
        .fold(0.0, f64::max);
    let boundary_gap = field
        .rows
        .iter()
        .map(|r| r.values[0].abs().max(r.values[nx - 1].abs()))
        .fold(0.0, f64::max);
    let closure_gap_max = field
        .modes
        .iter()
        .filter(|s| s.status == ModeStatus::Regular)
        .map(|s| (y_upper(s, &cfg, cfg.b) - y_lower(s, &cfg, cfg.a) - s.phi_n).abs())
        .fold(0.0, f64::max);

    let bessel_points: Vec<BesselPoint> = (1..=10)
        .map(|i| {
            let x = i as f64 / 11.0;
            let (lhs, rhs) = bessel_check(basis, x);
            BesselPoint { x, lhs, rhs }
        })
        .collect();
    let bessel_ok = bessel_points.iter().all(|p| p.lhs <= p.rhs + 1e-8);

    Ok(VerificationReport {
        pde_residual_sup: res_upper.max(res_lower),
        pde_residual_upper: res_upper,
        pde_residual_lower: res_lower,
        pde_residual_fd,
        conjugation_value_gap,
        conjugation_flux_gap,
        nonlocal_gap_sup,
        boundary_gap,
        closure_gap_max,
        bessel_ok,
        bessel_points,
        coefficient_decay: coefficient_decay(config, basis)?,
        uniqueness: uniqueness_report(basis, &cfg, config.resonance_tolerance())?,
        admissibility: field.admissibility,
        verify_steps: steps,
        tolerances: config.tolerances,
    })
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max)
}

/// Cauchy-Schwarz chain for the lower-side series sum_n lambda_n^2 phi_n /
/// Delta(n) X_n(x) E_{beta,2}(-lambda_n s^beta) at (x, -s): returns
/// (sum of absolute terms, M / min|Delta| sqrt(sum (X_n/lambda_n)^2)
/// sqrt(sum (lambda_n^3 phi_n)^2)) with M the calibrated envelope constant.
pub fn series_bound_chain(field: &SolutionField, x: f64, s: f64) -> (f64, f64) {
    let cfg = &field.config.temporal;
    let xm = field.basis.eigenfunctions_at(x);
    let mut lhs = 0.0;
    let mut bessel = 0.0;
    let mut decay = 0.0;
    let mut min_delta = f64::INFINITY;
    for (s_n, xv) in field.modes.iter().zip(&xm) {
        let l = s_n.lambda;
        let e = ml_unchecked(cfg.beta, 2.0, -l * s.powf(cfg.beta));
        if s_n.status == ModeStatus::Regular {
            lhs += (l * l * s_n.phi_n / s_n.delta_n * xv * e).abs();
            min_delta = min_delta.min(s_n.delta_n.abs());
        }
        bessel += (xv / l).powi(2);
        decay += (l.powi(3) * s_n.phi_n).powi(2);
    }
    let m = envelope_constant() * ENVELOPE_SLACK;
    (lhs, m / min_delta * bessel.sqrt() * decay.sqrt())
}
