//! The regime table of scales and exponents.
//!
//! Each decay/regularity regime fixes scales `tau = h^{-k0} eps^{-q0}` and
//! `tau1 = h^{-k0} eps^{-q}` (with `eps = 1/log(1/h)`), and for the Hölder
//! regimes a smoothing length `theta^{-1} = h^{-k1} eps^{-q1}` plus auxiliary
//! splitting scales `b`, `a`. The mid and low Hölder ranges obtain their
//! exponents from small linear balancing systems, solved here by elimination
//! with a residual certificate and cross-checked against closed forms. The
//! predicted resolvent bound is `g <= C h^{-k} (log(1/h))^q` with
//! `k = k0 + 1`: the phase maximum scales like `tau1`, and the bound
//! exponentiates `tau1 / h`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Decay/regularity regime of the potential. Boundaries follow the
/// inclusive conventions of the statements: `delta > 2` vs `1 < delta <= 2`;
/// `beta = 3` separate, `2 < beta < 3`, `1 < beta <= 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Regime {
    PowerGt2 { delta: f64 },
    PowerLe2 { delta: f64 },
    LogDecay { rho: f64 },
    HolderBeta3 { alpha: f64 },
    HolderMid { alpha: f64, beta: f64 },
    HolderLow { alpha: f64, beta: f64 },
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!(
            "Hölder exponent must lie in (0,1), got {alpha}"
        )));
    }
    Ok(())
}

impl Regime {
    /// Dispatch a power-decay rate onto its regime.
    pub fn power(delta: f64) -> Result<Self> {
        if delta > 2.0 {
            Ok(Self::PowerGt2 { delta })
        } else if delta > 1.0 {
            Ok(Self::PowerLe2 { delta })
        } else {
            Err(Error::Domain(format!(
                "power decay regime needs delta > 1, got {delta}"
            )))
        }
    }

    /// Explicit fast-decay constructor; rejects mismatched parameters.
    pub fn power_gt2(delta: f64) -> Result<Self> {
        if !(delta > 2.0) {
            return Err(Error::Config(format!(
                "delta = {delta} does not satisfy delta > 2 for this regime"
            )));
        }
        Ok(Self::PowerGt2 { delta })
    }

    /// Explicit slow-decay constructor; rejects mismatched parameters.
    pub fn power_le2(delta: f64) -> Result<Self> {
        if !(delta > 1.0 && delta <= 2.0) {
            return Err(Error::Config(format!(
                "delta = {delta} does not satisfy 1 < delta <= 2 for this regime"
            )));
        }
        Ok(Self::PowerLe2 { delta })
    }

    pub fn log_decay(rho: f64) -> Result<Self> {
        if !(rho > 1.0) {
            return Err(Error::Config(format!(
                "logarithmic decay regime needs rho > 1, got {rho}"
            )));
        }
        Ok(Self::LogDecay { rho })
    }

    /// Dispatch a Hölder class onto its regime.
    pub fn holder(alpha: f64, beta: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if beta == 3.0 {
            Ok(Self::HolderBeta3 { alpha })
        } else if beta > 2.0 && beta < 3.0 {
            Ok(Self::HolderMid { alpha, beta })
        } else if beta > 1.0 && beta <= 2.0 {
            Ok(Self::HolderLow { alpha, beta })
        } else {
            Err(Error::Domain(format!(
                "Hölder regimes cover 1 < beta <= 3, got {beta}"
            )))
        }
    }

    pub fn holder_beta3(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self::HolderBeta3 { alpha })
    }

    pub fn holder_mid(alpha: f64, beta: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(beta > 2.0 && beta < 3.0) {
            return Err(Error::Config(format!(
                "beta = {beta} does not satisfy 2 < beta < 3 for this regime"
            )));
        }
        Ok(Self::HolderMid { alpha, beta })
    }

    pub fn holder_low(alpha: f64, beta: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(beta > 1.0 && beta <= 2.0) {
            return Err(Error::Config(format!(
                "beta = {beta} does not satisfy 1 < beta <= 2 for this regime"
            )));
        }
        Ok(Self::HolderLow { alpha, beta })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::PowerGt2 { .. } => "power_gt2",
            Self::PowerLe2 { .. } => "power_le2",
            Self::LogDecay { .. } => "log_decay",
            Self::HolderBeta3 { .. } => "holder_beta3",
            Self::HolderMid { .. } => "holder_mid",
            Self::HolderLow { .. } => "holder_low",
        }
    }

    /// Amplitude convention for the regime phase: fixed at 1 in the fast
    /// power regime, free (>= 1, chosen by certificates) elsewhere.
    pub fn fixed_amplitude(&self) -> Option<f64> {
        match self {
            Self::PowerGt2 { .. } => Some(1.0),
            _ => None,
        }
    }

    /// Whether the remainder bound for this regime carries the
    /// `eps_log (r+1)^{-1-eps_log}` term next to `tau^2 (r+1)^{-3}`.
    pub fn w_bound_has_log_term(&self) -> bool {
        matches!(self, Self::HolderMid { .. } | Self::HolderLow { .. })
    }
}

/// `eps = (log(1/h))^{-1}`; needs `h` in `(0, 1/e)` so that `eps < 1`.
pub fn eps_log(h: f64) -> Result<f64> {
    if !(h > 0.0 && h < (-1.0f64).exp()) {
        return Err(Error::Domain(format!(
            "h must lie in (0, 1/e) so the log scale is well defined, got {h}"
        )));
    }
    Ok(1.0 / (1.0 / h).ln())
}

/// Exponents of the scales in `h^{-k} eps^{-q}` form: `tau` uses
/// `(k0, q0)`, `tau1` uses `(k0, q)`, `theta^{-1}` uses `(k1, q1)`, and the
/// splitting scales `b`, `a` use `(k2, q2)`, `(k3, q3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ExponentSet {
    pub k0: f64,
    pub q0: f64,
    pub q: f64,
    pub k1: Option<f64>,
    pub q1: Option<f64>,
    pub k2: Option<f64>,
    pub q2: Option<f64>,
    pub k3: Option<f64>,
    pub q3: Option<f64>,
}

impl ExponentSet {
    fn simple(k0: f64, q0: f64, q: f64) -> Self {
        Self {
            k0,
            q0,
            q,
            k1: None,
            q1: None,
            k2: None,
            q2: None,
            k3: None,
            q3: None,
        }
    }
}

/// A fully resolved regime plan at a given `h`.
#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ExponentPlan {
    pub regime: Regime,
    pub h: f64,
    pub eps_log: f64,
    pub exponents: ExponentSet,
    pub tau: f64,
    pub tau1: f64,
    pub theta: Option<f64>,
    pub scale_b: Option<f64>,
    pub scale_a: Option<f64>,
    /// Predicted bound exponents: `g <= C h^{-bound_k} (log(1/h))^{bound_q}`.
    pub bound_k: f64,
    pub bound_q: f64,
}

impl ExponentPlan {
    /// Splitting scale `b0` for a given phase amplitude:
    /// `b0^{1-beta} = amplitude^{-1}`. Only the Hölder regimes carry it; it
    /// enters the scale-interpolation diagnostic, not the exponents.
    pub fn b0(&self, amplitude: f64) -> Option<f64> {
        let beta = match self.regime {
            Regime::HolderBeta3 { .. } => 3.0,
            Regime::HolderMid { beta, .. } | Regime::HolderLow { beta, .. } => beta,
            _ => return None,
        };
        Some(amplitude.powf(1.0 / (beta - 1.0)))
    }
}

/// Closed-form bound exponents `(k, q)` of the regime, independent of `h`.
pub fn predicted_bound_exponents(regime: &Regime) -> (f64, f64) {
    match *regime {
        Regime::PowerGt2 { .. } => (4.0 / 3.0, 0.0),
        Regime::PowerLe2 { delta } => (
            2.0 * delta / (2.0 * delta - 1.0),
            (delta + 1.0) / (2.0 * delta - 1.0),
        ),
        Regime::LogDecay { .. } => (2.0, 0.0),
        Regime::HolderBeta3 { alpha } => (4.0 / (alpha + 3.0), 0.0),
        Regime::HolderMid { alpha, beta } => {
            let d = 2.0 * alpha * beta - 5.0 * alpha + 3.0;
            (
                (2.0 * alpha * beta - 6.0 * alpha + 4.0) / d,
                alpha * (3.0 - beta) / d,
            )
        }
        Regime::HolderLow { alpha, beta } => {
            let d = 2.0 * beta - alpha - 1.0;
            ((2.0 * beta - 2.0 * alpha) / d, (beta + 1.0) / d)
        }
    }
}

/// Printed closed forms for the Hölder exponent sets; the independent
/// cross-check for the linear-system solutions.
pub fn closed_form_exponents(alpha: f64, beta: f64) -> Result<ExponentSet> {
    check_alpha(alpha)?;
    if beta == 3.0 {
        let k0 = (1.0 - alpha) / (alpha + 3.0);
        return Ok(ExponentSet {
            k0,
            q0: 0.0,
            q: 0.0,
            k1: Some(2.0 / (alpha + 3.0)),
            q1: Some(0.0),
            k2: None,
            q2: None,
            k3: None,
            q3: None,
        });
    }
    if beta > 2.0 && beta < 3.0 {
        let d = 2.0 * alpha * beta - 5.0 * alpha + 3.0;
        let k0 = (1.0 - alpha) / d;
        let q0 = alpha * (3.0 - beta) / d;
        return Ok(ExponentSet {
            k0,
            q0,
            q: q0,
            k1: Some((beta - 1.0) / d),
            q1: Some(-3.0 * (3.0 - beta) / (2.0 * d)),
            k2: Some(k0),
            q2: Some((alpha + 3.0) / (2.0 * d)),
            k3: None,
            q3: None,
        });
    }
    if beta > 1.0 && beta <= 2.0 {
        let d = 2.0 * beta - alpha - 1.0;
        let k0 = (1.0 - alpha) / d;
        let q0 = (alpha - beta + 2.0) / d;
        return Ok(ExponentSet {
            k0,
            q0,
            q: q0 + 1.0,
            k1: Some((beta - 1.0) / d),
            q1: Some(-(beta + 1.0) / (2.0 * d)),
            k2: Some(k0),
            q2: Some((alpha + 3.0) / (2.0 * d)),
            k3: Some(k0),
            q3: Some((alpha + 3.0) / (2.0 * d)),
        });
    }
    Err(Error::Domain(format!(
        "closed forms cover 1 < beta <= 3, got {beta}"
    )))
}

/// Solve the balancing system for the Hölder exponents by elimination with
/// a residual certificate (`<= 1e-12` in the max norm). `beta = 3` is a
/// boundary: its scales come from the direct relation
/// `tau^2 = theta^{-1+alpha} = (h tau)^{-1} theta^{2 alpha}` rather than a
/// linear system.
pub fn solve_exponent_system(alpha: f64, beta: f64) -> Result<ExponentSet> {
    check_alpha(alpha)?;
    if beta == 3.0 {
        return Err(Error::Boundary(
            "beta = 3 uses the direct two-scale relation; request the beta3 regime instead"
                .into(),
        ));
    }
    if beta > 2.0 && beta < 3.0 {
        // unknowns (k0, k1, k2):
        //   2 k0 - (1-a) k1 - (3-b) k2 = 0
        //   3 k0 + 2 a k1             = 1
        //       (1-a) k1 - (b-1) k2   = 0
        // and the same matrix for (q0, q1, q2) with rhs (0, 0, -1).
        let a = vec![
            vec![2.0, -(1.0 - alpha), -(3.0 - beta)],
            vec![3.0, 2.0 * alpha, 0.0],
            vec![0.0, 1.0 - alpha, -(beta - 1.0)],
        ];
        let k = solve_certified(a.clone(), vec![0.0, 1.0, 0.0])?;
        let q = solve_certified(a, vec![0.0, 0.0, -1.0])?;
        return Ok(ExponentSet {
            k0: k[0],
            q0: q[0],
            q: q[0],
            k1: Some(k[1]),
            q1: Some(q[1]),
            k2: Some(k[2]),
            q2: Some(q[2]),
            k3: None,
            q3: None,
        });
    }
    if beta > 1.0 && beta <= 2.0 {
        // unknowns (k0, k1, k2, k3):
        //   2 k0 - (1-a) k1 - (3-b) k2             = 0
        //   3 k0 + 2 a k1            - 2(2-b) k3   = 1
        //        (1-a) k1 - (b-1) k2               = 0
        //     k0 + 2 a k1            + 2(b-1) k3   = 1
        // q system: same matrix, rhs (0, 0, -1, 1).
        let a = vec![
            vec![2.0, -(1.0 - alpha), -(3.0 - beta), 0.0],
            vec![3.0, 2.0 * alpha, 0.0, -2.0 * (2.0 - beta)],
            vec![0.0, 1.0 - alpha, -(beta - 1.0), 0.0],
            vec![1.0, 2.0 * alpha, 0.0, 2.0 * (beta - 1.0)],
        ];
        let k = solve_certified(a.clone(), vec![0.0, 1.0, 0.0, 1.0])?;
        let q = solve_certified(a, vec![0.0, 0.0, -1.0, 1.0])?;
        return Ok(ExponentSet {
            k0: k[0],
            q0: q[0],
            q: q[0] + 1.0,
            k1: Some(k[1]),
            q1: Some(q[1]),
            k2: Some(k[2]),
            q2: Some(q[2]),
            k3: Some(k[3]),
            q3: Some(q[3]),
        });
    }
    Err(Error::Domain(format!(
        "exponent systems cover 1 < beta < 3 (beta = 3 is direct), got {beta}"
    )))
}

fn solve_certified(a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Vec<f64>> {
    let x = solve_small(a.clone(), b.clone())?;
    let mut resid = 0.0f64;
    for i in 0..b.len() {
        let mut acc = -b[i];
        for j in 0..b.len() {
            acc += a[i][j] * x[j];
        }
        resid = resid.max(acc.abs());
    }
    if resid > 1e-12 {
        return Err(Error::Boundary(format!(
            "exponent system residual {resid} exceeds 1e-12; parameters sit on a regime boundary"
        )));
    }
    Ok(x)
}

pub(crate) fn solve_small(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let mut piv = col;
        for row in col + 1..n {
            if a[row][col].abs() > a[piv][col].abs() {
                piv = row;
            }
        }
        if a[piv][col].abs() < 1e-13 {
            return Err(Error::Boundary(
                "singular exponent system: parameters sit on a regime boundary; \
                 use the adjacent regime"
                    .into(),
            ));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let m = a[row][col] / a[col][col];
            for k in col..n {
                let v = a[col][k];
                a[row][k] -= m * v;
            }
            b[row] -= m * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// Fill the full plan for a regime at a given `h`.
pub fn tau_plan(regime: &Regime, h: f64) -> Result<ExponentPlan> {
    let eps = eps_log(h)?;
    let exponents = match *regime {
        Regime::PowerGt2 { .. } => ExponentSet::simple(1.0 / 3.0, 0.0, 0.0),
        Regime::PowerLe2 { delta } => {
            let k0 = 1.0 / (2.0 * delta - 1.0);
            let q0 = (2.0 - delta) / (2.0 * delta - 1.0);
            ExponentSet::simple(k0, q0, q0 + 1.0)
        }
        Regime::LogDecay { .. } => ExponentSet::simple(1.0, 0.0, 0.0),
        Regime::HolderBeta3 { alpha } => closed_form_exponents(alpha, 3.0)?,
        Regime::HolderMid { alpha, beta } | Regime::HolderLow { alpha, beta } => {
            solve_exponent_system(alpha, beta)?
        }
    };
    let scale = |k: f64, q: f64| h.powf(-k) * eps.powf(-q);
    let tau = scale(exponents.k0, exponents.q0);
    let tau1 = scale(exponents.k0, exponents.q);
    let theta = exponents
        .k1
        .map(|k1| scale(-k1, -exponents.q1.unwrap_or(0.0)));
    let scale_b = exponents.k2.map(|k2| scale(k2, exponents.q2.unwrap_or(0.0)));
    let scale_a = exponents.k3.map(|k3| scale(k3, exponents.q3.unwrap_or(0.0)));
    let (bound_k, bound_q) = predicted_bound_exponents(regime);
    Ok(ExponentPlan {
        regime: *regime,
        h,
        eps_log: eps,
        exponents,
        tau,
        tau1,
        theta,
        scale_b,
        scale_a,
        bound_k,
        bound_q,
    })
}

/// Consistency certificate for a plan: the additive exponent identity
/// `k = k0 + 1`, the numeric identity `tau1 / h = h^{-k} eps^{-q}`, and an
/// explicit threshold `h0` below which
/// `log(M + 1) <= 2C h^{-k} (log(1/h))^q` for
/// `M = (2 + E + sup|V|) exp(C tau1 / h)`.
#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ConsistencyReport {
    pub k_identity_err: f64,
    pub tau1_identity_rel_err: f64,
    pub c_prime: f64,
    pub h0: f64,
    pub ok: bool,
}

pub fn consistency_certificate(
    plan: &ExponentPlan,
    c: f64,
    energy: f64,
    v_sup: f64,
) -> Result<ConsistencyReport> {
    if !(c > 0.0) {
        return Err(Error::Domain(format!("constant C must be positive, got {c}")));
    }
    let k_identity_err = (plan.bound_k - (plan.exponents.k0 + 1.0)).abs();
    let lhs = plan.tau1 / plan.h;
    let rhs = plan.h.powf(-plan.bound_k) * plan.eps_log.powf(-plan.exponents.q);
    let tau1_identity_rel_err = (lhs - rhs).abs() / rhs;

    let c_prime = 2.0 * c;
    let offset = (2.0 + energy + v_sup).ln();
    // log(M+1) computed in the log domain so huge phases cannot overflow
    let log_m_plus_1 = |h: f64| -> f64 {
        let eps = 1.0 / (1.0 / h).ln();
        let tau1_over_h = h.powf(-(plan.exponents.k0 + 1.0)) * eps.powf(-plan.exponents.q);
        let lm = offset + c * tau1_over_h;
        lm + (-lm).exp().ln_1p()
    };
    let bound = |h: f64| -> f64 {
        c_prime * h.powf(-plan.bound_k) * (1.0 / h).ln().powf(plan.bound_q)
    };
    // scan from just below 1/e downwards; the margin is eventually positive
    // and stays so, and h0 is the largest scanned h where it holds for every
    // smaller scanned h as well
    let h_hi = 0.9 * (-1.0f64).exp();
    let mut h0 = f64::NAN;
    let steps = 240usize;
    let ratio = (1e-6f64 / h_hi).powf(1.0 / steps as f64);
    let mut all_good_below = true;
    let mut hs: Vec<f64> = Vec::with_capacity(steps + 1);
    let mut hcur = h_hi;
    for _ in 0..=steps {
        hs.push(hcur);
        hcur *= ratio;
    }
    for &h in hs.iter().rev() {
        if bound(h) >= log_m_plus_1(h) {
            if all_good_below {
                h0 = h;
            }
        } else {
            all_good_below = false;
        }
        let _ = all_good_below;
        if !all_good_below {
            break;
        }
    }
    let ok = k_identity_err <= 1e-12 && tau1_identity_rel_err <= 1e-12 && h0.is_finite();
    Ok(ConsistencyReport {
        k_identity_err,
        tau1_identity_rel_err,
        c_prime,
        h0,
        ok,
    })
}

/// Pointwise scale-interpolation inequality used by the mid/low Hölder
/// splittings: `(r+1)^{-beta} <= (b b0)^{3-beta} (r+1)^{-3} +
/// (b b0)^{1+eps-beta} (r+1)^{-1-eps}` for `b, b0 > 1` and `eps` well below
/// `beta - 1`.
pub fn check_scale_interpolation(
    beta: f64,
    eps: f64,
    b: f64,
    b0: f64,
    grid: &[f64],
) -> Result<(f64, bool)> {
    if !(b > 1.0 && b0 > 1.0) {
        return Err(Error::Domain(format!(
            "splitting scales must exceed 1, got b={b}, b0={b0}"
        )));
    }
    if !(eps > 0.0 && eps < beta - 1.0) {
        return Err(Error::Boundary(format!(
            "the interpolation needs 0 < eps << beta - 1, got eps={eps}, beta={beta}"
        )));
    }
    let bb0 = b * b0;
    let mut max_ratio = 0.0f64;
    for &r in grid {
        let lhs = (r + 1.0).powf(-beta);
        let rhs = bb0.powf(3.0 - beta) * (r + 1.0).powi(-3)
            + bb0.powf(1.0 + eps - beta) * (r + 1.0).powf(-1.0 - eps);
        max_ratio = max_ratio.max(lhs / rhs);
    }
    Ok((max_ratio, max_ratio <= 1.0 + 1e-9))
}

/// Human-readable regime label with parameters, for reports.
pub fn regime_label(regime: &Regime) -> String {
    match *regime {
        Regime::PowerGt2 { delta } => format!("power_gt2(delta={delta})"),
        Regime::PowerLe2 { delta } => format!("power_le2(delta={delta})"),
        Regime::LogDecay { rho } => format!("log_decay(rho={rho})"),
        Regime::HolderBeta3 { alpha } => format!("holder_beta3(alpha={alpha})"),
        Regime::HolderMid { alpha, beta } => format!("holder_mid(alpha={alpha},beta={beta})"),
        Regime::HolderLow { alpha, beta } => format!("holder_low(alpha={alpha},beta={beta})"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theorem_table_is_reproduced() {
        let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
        let (k, q) = predicted_bound_exponents(&Regime::power(3.0).unwrap());
        assert!(close(k, 4.0 / 3.0) && close(q, 0.0));
        let (k, q) = predicted_bound_exponents(&Regime::power(1.5).unwrap());
        assert!(close(k, 1.5) && close(q, 1.25));
        let (k, q) = predicted_bound_exponents(&Regime::log_decay(2.0).unwrap());
        assert!(close(k, 2.0) && close(q, 0.0));
        let (k, q) = predicted_bound_exponents(&Regime::holder(0.5, 3.0).unwrap());
        assert!(close(k, 8.0 / 7.0) && close(q, 0.0));
        let (k, q) = predicted_bound_exponents(&Regime::holder(0.5, 2.5).unwrap());
        assert!(close(k, 7.0 / 6.0) && close(q, 1.0 / 12.0));
        let (k, q) = predicted_bound_exponents(&Regime::holder(0.5, 2.0).unwrap());
        assert!(close(k, 1.2) && close(q, 1.2));
    }

    #[test]
    fn plan_examples() {
        // fast power decay at h = 1e-3: tau = tau1 = 10
        let plan = tau_plan(&Regime::power(3.0).unwrap(), 1e-3).unwrap();
        assert!((plan.tau - 10.0).abs() < 1e-9);
        assert!((plan.tau1 - 10.0).abs() < 1e-9);
        assert!((plan.bound_k - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(plan.bound_q, 0.0);

        // beta = 3 Hölder at alpha = 0.5: k0 = 1/7, k = 8/7
        let plan = tau_plan(&Regime::holder(0.5, 3.0).unwrap(), 1e-3).unwrap();
        assert!((plan.exponents.k0 - 1.0 / 7.0).abs() < 1e-15);
        assert!((plan.bound_k - 8.0 / 7.0).abs() < 1e-15);
        assert!(plan.theta.is_some());
    }

    #[test]
    fn mid_regime_solution_matches_closed_form() {
        let sys = solve_exponent_system(0.5, 2.5).unwrap();
        assert!((sys.k0 - 1.0 / 6.0).abs() < 1e-14);
        assert!((sys.q0 - 1.0 / 12.0).abs() < 1e-14);
        assert!((sys.q - 1.0 / 12.0).abs() < 1e-14);
        let cf = closed_form_exponents(0.5, 2.5).unwrap();
        assert!((sys.k1.unwrap() - cf.k1.unwrap()).abs() < 1e-14);
        assert!((sys.q1.unwrap() - cf.q1.unwrap()).abs() < 1e-14);
        assert!((sys.k2.unwrap() - cf.k2.unwrap()).abs() < 1e-14);
        assert!((sys.q2.unwrap() - cf.q2.unwrap()).abs() < 1e-14);
    }

    #[test]
    fn low_regime_solution_matches_closed_form() {
        let sys = solve_exponent_system(0.5, 2.0).unwrap();
        assert!((sys.k0 - 0.2).abs() < 1e-14);
        assert!((sys.q0 - 0.2).abs() < 1e-14);
        assert!((sys.q - 1.2).abs() < 1e-14);
        let cf = closed_form_exponents(0.5, 2.0).unwrap();
        for (a, b) in [
            (sys.k1, cf.k1),
            (sys.q1, cf.q1),
            (sys.k2, cf.k2),
            (sys.q2, cf.q2),
            (sys.k3, cf.k3),
            (sys.q3, cf.q3),
        ] {
            assert!((a.unwrap() - b.unwrap()).abs() < 1e-13);
        }
    }

    #[test]
    fn beta_three_is_a_boundary_for_the_system() {
        assert!(matches!(
            solve_exponent_system(0.5, 3.0),
            Err(Error::Boundary(_))
        ));
    }

    #[test]
    fn regime_dispatch_and_mismatches() {
        assert!(matches!(
            Regime::power(1.5).unwrap(),
            Regime::PowerLe2 { .. }
        ));
        assert!(matches!(Regime::power_gt2(1.5), Err(Error::Config(_))));
        assert!(matches!(Regime::power(0.9), Err(Error::Domain(_))));
        assert!(matches!(Regime::holder(1.2, 2.5), Err(Error::Domain(_))));
        assert!(matches!(Regime::holder(0.5, 3.5), Err(Error::Domain(_))));
        assert!(matches!(Regime::holder_mid(0.5, 2.0), Err(Error::Config(_))));
    }

    #[test]
    fn eps_log_domain() {
        assert!(eps_log(0.5).is_err());
        assert!((eps_log(1e-3).unwrap() - 1.0 / (1e3f64).ln()).abs() < 1e-15);
    }

    #[test]
    fn certificate_identities_hold() {
        for regime in [
            Regime::power(3.0).unwrap(),
            Regime::power(1.5).unwrap(),
            Regime::log_decay(2.0).unwrap(),
            Regime::holder(0.5, 3.0).unwrap(),
            Regime::holder(0.5, 2.5).unwrap(),
            Regime::holder(0.5, 2.0).unwrap(),
        ] {
            let plan = tau_plan(&regime, 1e-2).unwrap();
            let rep = consistency_certificate(&plan, 1.0, 1.0, 1.0).unwrap();
            assert!(rep.ok, "{regime:?}: {rep:?}");
            assert!(rep.h0 > 0.0 && rep.h0 < 0.37);
        }
    }

    #[test]
    fn tau_ordering_for_small_h() {
        for regime in [
            Regime::power(3.0).unwrap(),
            Regime::power(1.5).unwrap(),
            Regime::log_decay(2.0).unwrap(),
            Regime::holder(0.5, 2.5).unwrap(),
            Regime::holder(0.5, 2.0).unwrap(),
        ] {
            for h in [1e-1, 1e-2, 1e-3] {
                let plan = tau_plan(&regime, h).unwrap();
                assert!(plan.tau1 >= plan.tau - 1e-12, "{regime:?} h={h}");
                assert!(plan.tau >= 1.0, "{regime:?} h={h}");
            }
        }
    }

    #[test]
    fn scale_interpolation_holds_on_grid() {
        let grid = crate::quad::default_scan_grid();
        let (ratio, pass) = check_scale_interpolation(2.5, 0.1, 2.0, 1.5, &grid).unwrap();
        assert!(pass, "max ratio {ratio}");
    }
}
