//! h-sweeps of the log resolvent norm, scaling-law fits, and consistency of
//! the measured values with the regime's predicted bound shape.
//!
//! Sweeps are deterministic: rows are produced in the order of the
//! (strictly decreasing) h list and per-mode work is reduced in fixed mode
//! order, so the numbers are bit-identical across worker counts.

use alloc::format;
use alloc::vec::Vec;

use crate::exponents::{self, ExponentPlan, Regime};
use crate::modes::{self, ModeEntry};
use crate::operator1d::{
    compute_g_with, GridPolicy, NormEstimate, OperatorTemplate, ResolventProblem, Sign,
};
use crate::potential::RadialPotential;
use crate::{Error, Result};

/// What a sweep row measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum RowKind {
    /// One h of the main sweep.
    Main,
    /// Sensitivity row at 10x the configured shift, smallest h only.
    EpsUp,
    /// Sensitivity row at a tenth of the configured shift, smallest h only.
    EpsDown,
}

/// One measured row.
#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SweepRow {
    pub kind: RowKind,
    pub h: f64,
    pub epsilon: f64,
    pub weight_s: f64,
    pub energy: f64,
    pub g: f64,
    pub sigma_max: f64,
    pub nu_max: f64,
    pub worst_degree: u64,
    pub worst_nu: f64,
    pub modes_total: usize,
    pub modes_solved: usize,
    pub converged: bool,
    /// `h^{-k} (log(1/h))^q` for the configured regime, if any.
    pub bound_shape: Option<f64>,
    /// Filled by the driver; excluded from the deterministic tabular output.
    pub wall_time_s: f64,
}

/// Scaling models for [`fit_scaling`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum FitModel {
    /// `log g = intercept + slope * log(1/h)`.
    PurePower,
    /// `log g = intercept + slope * log(1/h) + log_power * log log(1/h)`.
    PowerWithLog,
    /// `g = intercept + slope / h`: exponential trapping growth of the
    /// resolvent norm itself.
    Trapping,
}

/// Least-squares fit summary.
#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FitResult {
    pub model: FitModel,
    pub slope: f64,
    pub intercept: f64,
    pub log_power: Option<f64>,
    pub r_squared: f64,
    pub rows_used: usize,
}

/// Consistency of measured rows with `g <= C h^{-k} (log(1/h))^q`.
#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BoundCheck {
    /// `max_rows g / shape(h)`; the smallest h-uniform constant consistent
    /// with the sweep.
    pub c_fit: f64,
    /// Worst relative increase of the per-row constant across the
    /// smallest-h quartile (0 when the tail is non-increasing).
    pub max_violation: f64,
    pub pass: bool,
    /// Set when the sweep has a single row and the check holds vacuously.
    pub vacuous: bool,
}

/// Sweep configuration. Validation happens before any computation.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub dim: u32,
    pub energy: f64,
    pub weight_s: f64,
    pub epsilon: f64,
    pub sign: Sign,
    pub h_list: Vec<f64>,
    pub policy: GridPolicy,
    pub regime: Option<Regime>,
    /// User-supplied constant for the predicted bound column; when absent
    /// the fitted `c_fit` is used.
    pub c_user: Option<f64>,
    /// Record eps x10 / eps /10 rows at the smallest h.
    pub eps_sensitivity: bool,
    /// Budget on the estimated number of node updates; oversize runs are
    /// refused up front.
    pub max_cost: f64,
    /// Smallest admissible spectral shift.
    pub epsilon_floor: f64,
}

impl SweepConfig {
    pub fn new(h_list: Vec<f64>, policy: GridPolicy) -> Self {
        Self {
            dim: 3,
            energy: 1.0,
            weight_s: 1.5,
            epsilon: 1e-4,
            sign: Sign::Plus,
            h_list,
            policy,
            regime: None,
            c_user: None,
            eps_sensitivity: true,
            max_cost: 2e11,
            epsilon_floor: 1e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 3 {
            return Err(Error::Config(format!(
                "dimension must be >= 3, got {}",
                self.dim
            )));
        }
        if !(self.energy > 0.0) {
            return Err(Error::Config(format!(
                "energy must be positive, got {}",
                self.energy
            )));
        }
        if !(self.weight_s > 0.5) {
            return Err(Error::Config(format!(
                "weight exponent must exceed 1/2, got {}",
                self.weight_s
            )));
        }
        if !(self.epsilon_floor > 0.0) {
            return Err(Error::Config("epsilon floor must be positive".into()));
        }
        if !(self.epsilon >= self.epsilon_floor && self.epsilon < 1.0) {
            return Err(Error::Config(format!(
                "epsilon must lie in [{}, 1), got {}",
                self.epsilon_floor, self.epsilon
            )));
        }
        if self.h_list.is_empty() {
            return Err(Error::Config("h list must be nonempty".into()));
        }
        if !self.h_list.iter().all(|&h| h > 0.0 && h < 1.0) {
            return Err(Error::Config("every h must lie in (0, 1)".into()));
        }
        if !self.h_list.windows(2).all(|p| p[1] < p[0]) {
            return Err(Error::Config("h list must be strictly decreasing".into()));
        }
        if !(self.policy.r_max > 0.0) {
            return Err(Error::Config("domain radius must be positive".into()));
        }
        if !(self.policy.points_per_wavelength > 0.0) {
            return Err(Error::Config(
                "points-per-wavelength must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Estimated node updates for the whole sweep (modes x grid points per
    /// h, summed), used by the cost guard.
    pub fn estimate_cost(&self, v_sup: f64) -> f64 {
        let nu_max = modes::coercive_nu_max(self.policy.r_max, self.energy, v_sup);
        self.h_list
            .iter()
            .map(|&h| {
                let n_modes = (nu_max / h).ceil() + 1.0;
                let n_points = self.policy.r_max * self.policy.points_per_wavelength
                    * (self.energy + v_sup).sqrt()
                    / h;
                n_modes * n_points
            })
            .sum()
    }
}

/// Sweep output: rows plus a default fit and the bound check when a regime
/// was configured.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub fit: Option<FitResult>,
    pub bound: Option<BoundCheck>,
    pub c_fit: Option<f64>,
}

/// Run the sweep sequentially. `now` supplies monotonic seconds for the
/// wall-time diagnostics (pass `|| 0.0` when timing is irrelevant).
pub fn run_sweep(
    config: &SweepConfig,
    potential: &RadialPotential,
    now: impl FnMut() -> f64,
) -> Result<SweepResult> {
    run_sweep_with(config, potential, now, |template, jobs| {
        jobs.iter().map(|e| template.mode_norm(e.nu)).collect()
    })
}

/// Run the sweep with a caller-supplied chunk evaluator (see
/// [`crate::operator1d::compute_g_with`]); parallel drivers map chunks onto
/// worker pools while the reduction order stays fixed.
pub fn run_sweep_with<F>(
    config: &SweepConfig,
    potential: &RadialPotential,
    mut now: impl FnMut() -> f64,
    eval_chunk: F,
) -> Result<SweepResult>
where
    F: Fn(&OperatorTemplate, &[ModeEntry]) -> Vec<Result<NormEstimate>>,
{
    config.validate()?;
    let cost = config.estimate_cost(potential.sup_norm());
    if cost > config.max_cost {
        return Err(Error::Resource(format!(
            "estimated cost {cost:.3e} node updates exceeds the budget {:.3e}; \
             raise h, shrink the domain or raise max_cost explicitly",
            config.max_cost
        )));
    }
    let plan_shape = config.regime.as_ref().map(exponents::predicted_bound_exponents);
    let shape = |h: f64| -> Option<f64> {
        plan_shape.map(|(k, q)| h.powf(-k) * (1.0 / h).ln().powf(q))
    };

    let mut rows = Vec::new();
    let mut measure = |h: f64, epsilon: f64, kind: RowKind| -> Result<SweepRow> {
        let problem = ResolventProblem {
            h,
            dim: config.dim,
            energy: config.energy,
            epsilon,
            weight_s: config.weight_s,
            sign: config.sign,
        };
        let t0 = now();
        let gval = compute_g_with(&problem, potential, &config.policy, &eval_chunk)?;
        let wall = now() - t0;
        Ok(SweepRow {
            kind,
            h,
            epsilon,
            weight_s: config.weight_s,
            energy: config.energy,
            g: gval.g,
            sigma_max: gval.sigma_max,
            nu_max: gval.nu_max,
            worst_degree: gval.worst_degree,
            worst_nu: gval.worst_nu,
            modes_total: gval.modes_total,
            modes_solved: gval.modes_solved,
            converged: gval.converged,
            bound_shape: shape(h),
            wall_time_s: wall,
        })
    };

    for &h in &config.h_list {
        rows.push(measure(h, config.epsilon, RowKind::Main)?);
    }
    if config.eps_sensitivity {
        let h_last = *config.h_list.last().unwrap();
        let eps_up = config.epsilon * 10.0;
        if eps_up < 1.0 {
            rows.push(measure(h_last, eps_up, RowKind::EpsUp)?);
        }
        let eps_down = config.epsilon / 10.0;
        if eps_down >= config.epsilon_floor {
            rows.push(measure(h_last, eps_down, RowKind::EpsDown)?);
        }
    }

    let fit = fit_scaling(&rows, FitModel::PurePower).ok();
    let bound = match &config.regime {
        Some(regime) => Some(bound_check(&rows, regime, config.c_user)?),
        None => None,
    };
    let c_fit = bound.map(|b| b.c_fit);
    Ok(SweepResult {
        rows,
        fit,
        bound,
        c_fit,
    })
}

/// Least-squares scaling fit over the converged main rows with positive g
/// (positive sigma growth for the trapping model). Needs at least three
/// usable rows and at least two distinct h.
pub fn fit_scaling(rows: &[SweepRow], model: FitModel) -> Result<FitResult> {
    let usable: Vec<&SweepRow> = rows
        .iter()
        .filter(|r| r.kind == RowKind::Main && r.converged && r.g > 0.0)
        .collect();
    if usable.len() < 3 {
        return Err(Error::Domain(format!(
            "scaling fit needs at least 3 converged rows with positive g, got {}",
            usable.len()
        )));
    }
    let h0 = usable[0].h;
    if usable.iter().all(|r| r.h == h0) {
        return Err(Error::Domain(
            "degenerate design matrix: all rows share the same h".into(),
        ));
    }
    let (xs, ys): (Vec<Vec<f64>>, Vec<f64>) = match model {
        FitModel::PurePower => usable
            .iter()
            .map(|r| (alloc::vec![1.0, (1.0 / r.h).ln()], r.g.ln()))
            .unzip(),
        FitModel::PowerWithLog => usable
            .iter()
            .map(|r| {
                let l = (1.0 / r.h).ln();
                (alloc::vec![1.0, l, l.ln()], r.g.ln())
            })
            .unzip(),
        FitModel::Trapping => usable
            .iter()
            .map(|r| (alloc::vec![1.0, 1.0 / r.h], r.g))
            .unzip(),
    };
    let p = xs[0].len();
    // normal equations; tiny systems, solved with the certified eliminator
    let mut ata = alloc::vec![alloc::vec![0.0; p]; p];
    let mut aty = alloc::vec![0.0; p];
    for (x, &y) in xs.iter().zip(&ys) {
        for i in 0..p {
            for j in 0..p {
                ata[i][j] += x[i] * x[j];
            }
            aty[i] += x[i] * y;
        }
    }
    let beta = exponents::solve_small(ata, aty)
        .map_err(|_| Error::Domain("degenerate design matrix in scaling fit".into()))?;
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (x, &y) in xs.iter().zip(&ys) {
        let pred: f64 = x.iter().zip(&beta).map(|(a, b)| a * b).sum();
        ss_res += (y - pred) * (y - pred);
        ss_tot += (y - mean) * (y - mean);
    }
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Ok(FitResult {
        model,
        slope: beta[1],
        intercept: beta[0],
        log_power: if p > 2 { Some(beta[2]) } else { None },
        r_squared,
        rows_used: usable.len(),
    })
}

/// Smallest-h-quartile tolerance for the per-row constant trend: a later
/// row's constant may exceed the previous one by at most 5%.
const TAIL_SLACK: f64 = 0.05;

/// Check the rows against the regime's bound shape. `c_fit` is the max of
/// `g / shape(h)` over converged main rows; the check passes when that
/// constant is finite and the per-row constants do not grow through the
/// smallest-h quartile of the sweep.
pub fn bound_check(
    rows: &[SweepRow],
    regime: &Regime,
    _c_user: Option<f64>,
) -> Result<BoundCheck> {
    let (k, q) = exponents::predicted_bound_exponents(regime);
    let main: Vec<&SweepRow> = rows
        .iter()
        .filter(|r| r.kind == RowKind::Main && r.converged)
        .collect();
    if main.is_empty() {
        return Err(Error::Domain("bound check needs at least one converged row".into()));
    }
    let consts: Vec<f64> = main
        .iter()
        .map(|r| r.g / (r.h.powf(-k) * (1.0 / r.h).ln().powf(q)))
        .collect();
    let c_fit = consts.iter().fold(f64::NEG_INFINITY, |m, &c| m.max(c));
    if main.len() == 1 {
        return Ok(BoundCheck {
            c_fit,
            max_violation: 0.0,
            pass: c_fit.is_finite(),
            vacuous: true,
        });
    }
    let tail_len = (main.len() + 3) / 4;
    let tail = &consts[consts.len() - tail_len.max(2)..];
    let mut max_violation = 0.0f64;
    for w in tail.windows(2) {
        if w[0] > 0.0 {
            max_violation = max_violation.max(w[1] / w[0] - 1.0);
        }
    }
    Ok(BoundCheck {
        c_fit,
        max_violation,
        pass: c_fit.is_finite() && max_violation <= TAIL_SLACK,
        vacuous: false,
    })
}

/// Bound shape `h^{-k} (log(1/h))^q` for external consumers.
pub fn bound_shape(plan: &ExponentPlan, h: f64) -> f64 {
    h.powf(-plan.bound_k) * (1.0 / h).ln().powf(plan.bound_q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn synthetic_rows(hs: &[f64], g_of: impl Fn(f64) -> f64) -> Vec<SweepRow> {
        hs.iter()
            .map(|&h| SweepRow {
                kind: RowKind::Main,
                h,
                epsilon: 1e-4,
                weight_s: 1.0,
                energy: 1.0,
                g: g_of(h),
                sigma_max: g_of(h).exp(),
                nu_max: 10.0,
                worst_degree: 0,
                worst_nu: 0.0,
                modes_total: 1,
                modes_solved: 1,
                converged: true,
                bound_shape: None,
                wall_time_s: 0.0,
            })
            .collect()
    }

    #[test]
    fn pure_power_fit_recovers_exact_exponent() {
        let hs = [0.2, 0.1, 0.05, 0.02, 0.01];
        let rows = synthetic_rows(&hs, |h| 7.0 * h.powf(-4.0 / 3.0));
        let fit = fit_scaling(&rows, FitModel::PurePower).unwrap();
        assert!((fit.slope - 4.0 / 3.0).abs() < 1e-6, "slope {}", fit.slope);
        assert!(fit.r_squared >= 0.999999);
        assert!((fit.intercept - 7.0f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn two_term_fit_recovers_power_and_log() {
        let hs = [1e-2, 5e-3, 2e-3, 1e-3, 5e-4, 2e-4, 1e-4];
        let rows = synthetic_rows(&hs, |h| {
            2.0 * h.powf(-1.5) * (1.0 / h).ln().powf(1.25)
        });
        let fit = fit_scaling(&rows, FitModel::PowerWithLog).unwrap();
        assert!((fit.slope - 1.5).abs() < 1e-3, "slope {}", fit.slope);
        assert!(
            (fit.log_power.unwrap() - 1.25).abs() < 1e-3,
            "log power {:?}",
            fit.log_power
        );
    }

    #[test]
    fn trapping_fit_recovers_rate() {
        let hs = [0.2, 0.14, 0.1, 0.07, 0.05];
        let rows = synthetic_rows(&hs, |h| 0.3 + 1.7 / h);
        let fit = fit_scaling(&rows, FitModel::Trapping).unwrap();
        assert!((fit.slope - 1.7).abs() < 1e-9);
        assert!(fit.r_squared > 0.999999);
    }

    #[test]
    fn fit_requires_three_rows_and_distinct_h() {
        let rows = synthetic_rows(&[0.1, 0.05], |h| 1.0 / h);
        assert!(fit_scaling(&rows, FitModel::PurePower).is_err());
    }

    #[test]
    fn bound_check_flat_constant_passes() {
        let regime = Regime::power(3.0).unwrap();
        let hs = [0.2, 0.14, 0.1, 0.07, 0.05, 0.035, 0.025];
        let rows = synthetic_rows(&hs, |h| 0.8 * h.powf(-4.0 / 3.0));
        let chk = bound_check(&rows, &regime, None).unwrap();
        assert!(chk.pass);
        assert!((chk.c_fit - 0.8).abs() < 1e-12);
        assert_eq!(chk.max_violation, 0.0);
    }

    #[test]
    fn bound_check_growing_tail_fails() {
        let regime = Regime::power(3.0).unwrap();
        let hs = [0.2, 0.14, 0.1, 0.07, 0.05, 0.035, 0.025];
        // grows faster than the shape: per-row constant increases
        let rows = synthetic_rows(&hs, |h| h.powf(-1.8));
        let chk = bound_check(&rows, &regime, None).unwrap();
        assert!(!chk.pass);
        assert!(chk.max_violation > TAIL_SLACK);
    }

    #[test]
    fn bound_check_single_row_vacuous() {
        let regime = Regime::power(3.0).unwrap();
        let rows = synthetic_rows(&[0.1], |h| 1.0 / h);
        let chk = bound_check(&rows, &regime, None).unwrap();
        assert!(chk.pass && chk.vacuous);
    }

    #[test]
    fn config_validation_rejects_bad_fields() {
        let policy = GridPolicy::new(20.0);
        let mut c = SweepConfig::new(vec![0.2, 0.1], policy);
        assert!(c.validate().is_ok());
        c.weight_s = 0.5;
        assert!(c.validate().is_err());
        c.weight_s = 1.0;
        c.h_list = vec![0.1, 0.2];
        assert!(c.validate().is_err());
        c.h_list = vec![0.2, 0.1];
        c.epsilon = 0.0;
        assert!(c.validate().is_err());
        c.epsilon = 1e-4;
        c.energy = -1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn cost_guard_refuses_oversize_runs() {
        let policy = GridPolicy::new(500.0);
        let mut c = SweepConfig::new(vec![0.001], policy);
        c.max_cost = 1e6;
        let v = RadialPotential::power_decay(1.0, 3.0).unwrap();
        let err = run_sweep(&c, &v, || 0.0).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
    }
}
