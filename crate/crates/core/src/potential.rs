//! Radial potential families with decay/regularity metadata, plus the
//! mollification machinery used by the rough-potential certificates.
//!
//! Every family evaluates to a bounded real value on `[0, inf)` and carries
//! whatever envelope metadata it can honestly claim: a power envelope
//! `|V(r)| <= C (r+1)^{-delta}`, a Hölder class `(alpha, beta)` with
//! `|V(r)-V(r')| <= C |r-r'|^alpha (r+1)^{-beta}`, or both. Checks against
//! that metadata (`envelope_check`, `holder_seminorm`) are grid scans that
//! report the measured constant instead of trusting the declaration.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use crate::quad;
use crate::{Error, Result};

/// Default number of terms in the truncated Weierstrass sum backing the
/// Hölder-oscillatory family. 12 terms put the finest oscillation at scale
/// `2^-12`, well below every smoothing length used in the checks.
pub const DEFAULT_WEIERSTRASS_TERMS: u32 = 12;

/// Smooth nonnegative bump supported exactly on `[0, 1]` with unit mass:
/// `rho(s) = c * exp(-1/(s(1-s)))`, `c` calibrated once numerically.
///
/// The same fixed 64-node Gauss–Legendre rule is used for the calibration
/// and for every mollification integral, so `mass()` is 1 by construction
/// and the discrete moments are internally consistent.
#[derive(Debug, Clone)]
pub struct MollifierBump {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    density: Vec<f64>,
    density_deriv: Vec<f64>,
    norm: f64,
}

impl MollifierBump {
    pub fn standard() -> Self {
        let (nodes, weights) = quad::gauss_legendre_unit(64);
        let raw_mass: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(&s, &w)| w * Self::raw(s))
            .sum();
        let norm = 1.0 / raw_mass;
        let density: Vec<f64> = nodes.iter().map(|&s| norm * Self::raw(s)).collect();
        let density_deriv: Vec<f64> = nodes.iter().map(|&s| norm * Self::raw_deriv(s)).collect();
        Self {
            nodes,
            weights,
            density,
            density_deriv,
            norm,
        }
    }

    fn raw(s: f64) -> f64 {
        if s <= 0.0 || s >= 1.0 {
            0.0
        } else {
            (-1.0 / (s * (1.0 - s))).exp()
        }
    }

    fn raw_deriv(s: f64) -> f64 {
        if s <= 0.0 || s >= 1.0 {
            0.0
        } else {
            let g = s * (1.0 - s);
            Self::raw(s) * (1.0 - 2.0 * s) / (g * g)
        }
    }

    /// Bump value at `s`.
    pub fn density(&self, s: f64) -> f64 {
        self.norm * Self::raw(s)
    }

    /// Bump derivative at `s`.
    pub fn density_deriv(&self, s: f64) -> f64 {
        self.norm * Self::raw_deriv(s)
    }

    /// Discrete mass `sum w_i rho(s_i)`; equals 1 by calibration.
    pub fn mass(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.density)
            .map(|(&w, &r)| w * r)
            .sum()
    }

    /// Discrete integral of `rho'`; zero up to quadrature error since the
    /// bump vanishes at both endpoints.
    pub fn deriv_integral(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.density_deriv)
            .map(|(&w, &d)| w * d)
            .sum()
    }

    /// First moment `int s rho(s) ds`; 1/2 up to quadrature error because
    /// the bump is symmetric about 1/2.
    pub fn first_moment(&self) -> f64 {
        self.nodes
            .iter()
            .zip(self.weights.iter().zip(&self.density))
            .map(|(&s, (&w, &r))| w * s * r)
            .sum()
    }
}

/// Power envelope `|V(r)| <= amplitude * (r+1)^{-delta}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerEnvelope {
    pub amplitude: f64,
    pub delta: f64,
}

/// Hölder class parameters: `|V(r)-V(r')| <= C |r-r'|^alpha (r+1)^{-beta}`
/// for gaps up to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderClass {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone)]
enum Kind {
    PowerDecay {
        amplitude: f64,
        delta: f64,
    },
    LogDecay {
        amplitude: f64,
        rho: f64,
    },
    HolderOscillatory {
        alpha: f64,
        beta: f64,
        terms: u32,
    },
    BarrierWell {
        height: f64,
        r_inner: f64,
        r_outer: f64,
    },
    ExpDecay {
        amplitude: f64,
        rate: f64,
    },
    Mollified {
        base: Box<RadialPotential>,
        theta: f64,
        bump: MollifierBump,
    },
    CustomSampled {
        radii: Vec<f64>,
        values: Vec<f64>,
    },
    Sum {
        parts: Vec<RadialPotential>,
    },
}

/// A bounded real-valued radial potential together with its declared
/// metadata. Immutable after construction; cheap to share across workers.
#[derive(Debug, Clone)]
pub struct RadialPotential {
    kind: Kind,
    sup_norm: f64,
    decay: Option<PowerEnvelope>,
    holder: Option<HolderClass>,
}

impl RadialPotential {
    /// `V(r) = amplitude * (r+1)^{-delta}`, `delta > 1`. Saturates its own
    /// envelope with ratio exactly 1.
    pub fn power_decay(amplitude: f64, delta: f64) -> Result<Self> {
        if !(delta > 1.0) || !amplitude.is_finite() {
            return Err(Error::Domain(format!(
                "power decay requires delta > 1 and finite amplitude, got delta={delta}"
            )));
        }
        Ok(Self {
            kind: Kind::PowerDecay { amplitude, delta },
            sup_norm: amplitude.abs(),
            decay: Some(PowerEnvelope {
                amplitude: amplitude.abs(),
                delta,
            }),
            holder: None,
        })
    }

    /// `V(r) = amplitude * (r+1)^{-1} (log(r+2))^{-rho}`, `rho > 1`.
    pub fn log_decay(amplitude: f64, rho: f64) -> Result<Self> {
        if !(rho > 1.0) || !amplitude.is_finite() {
            return Err(Error::Domain(format!(
                "log decay requires rho > 1 and finite amplitude, got rho={rho}"
            )));
        }
        Ok(Self {
            kind: Kind::LogDecay { amplitude, rho },
            sup_norm: amplitude.abs() * core::f64::consts::LN_2.powf(-rho),
            decay: None,
            holder: None,
        })
    }

    /// Truncated Weierstrass sum with a power-decay envelope:
    /// `V(r) = (sum_{k=0}^{terms} 2^{-alpha k} cos(2^k r)) * (1+r)^{-beta}`.
    ///
    /// Genuinely alpha-Hölder (not smoother) down to oscillation scale
    /// `2^{-terms}`; the sup norm is attained at `r = 0` where all cosines
    /// align.
    pub fn holder_oscillatory(alpha: f64, beta: f64, terms: u32) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!(
                "Hölder exponent must lie in (0,1), got {alpha}"
            )));
        }
        if !(beta > 1.0) {
            return Err(Error::Domain(format!(
                "Hölder decay must satisfy beta > 1, got {beta}"
            )));
        }
        if terms > 48 {
            return Err(Error::Domain(format!(
                "Weierstrass term count {terms} too large for reliable cos evaluation"
            )));
        }
        let sup: f64 = (0..=terms).map(|k| (-(alpha * k as f64)).exp2()).sum();
        Ok(Self {
            kind: Kind::HolderOscillatory { alpha, beta, terms },
            sup_norm: sup,
            decay: Some(PowerEnvelope {
                amplitude: sup,
                delta: beta,
            }),
            holder: Some(HolderClass { alpha, beta }),
        })
    }

    /// Indicator potential: `height` on `[r_inner, r_outer]`, zero elsewhere.
    /// Positive heights are barriers, negative heights wells.
    pub fn barrier_well(height: f64, r_inner: f64, r_outer: f64) -> Result<Self> {
        if !(r_inner >= 0.0 && r_outer > r_inner) || !height.is_finite() {
            return Err(Error::Domain(format!(
                "barrier/well needs 0 <= r_inner < r_outer, got [{r_inner}, {r_outer}]"
            )));
        }
        Ok(Self {
            kind: Kind::BarrierWell {
                height,
                r_inner,
                r_outer,
            },
            sup_norm: height.abs(),
            decay: None,
            holder: None,
        })
    }

    /// `V(r) = amplitude * exp(-rate * r)`, a Lipschitz integrable tail
    /// useful for composites and scan baselines.
    pub fn exp_decay(amplitude: f64, rate: f64) -> Result<Self> {
        if !(rate > 0.0) || !amplitude.is_finite() {
            return Err(Error::Domain(format!(
                "exponential decay requires rate > 0, got {rate}"
            )));
        }
        Ok(Self {
            kind: Kind::ExpDecay { amplitude, rate },
            sup_norm: amplitude.abs(),
            decay: None,
            holder: None,
        })
    }

    /// Piecewise-linear interpolant of `(radii, values)` samples with
    /// strictly increasing radii. Held constant before the first sample and
    /// zero beyond the last one.
    pub fn custom_sampled(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.len() != values.len() || radii.len() < 2 {
            return Err(Error::Shape(format!(
                "sampled potential needs matching radius/value lists of length >= 2, got {} and {}",
                radii.len(),
                values.len()
            )));
        }
        if radii[0] < 0.0 {
            return Err(Error::Domain("sample radii must be nonnegative".into()));
        }
        if !radii.windows(2).all(|p| p[1] > p[0]) {
            return Err(Error::Domain(
                "sample radii must be strictly increasing".into(),
            ));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::Domain("sample values must be finite".into()));
        }
        let sup = values.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        Ok(Self {
            kind: Kind::CustomSampled { radii, values },
            sup_norm: sup,
            decay: None,
            holder: None,
        })
    }

    /// Pointwise sum of families. The parts keep their own metadata; the sum
    /// claims none, so regime choices for composites must be stated
    /// explicitly by the caller (or declared via [`Self::with_power_envelope`]
    /// / [`Self::with_holder_class`]).
    pub fn sum(parts: Vec<RadialPotential>) -> Result<Self> {
        if parts.len() < 2 {
            return Err(Error::Config(
                "a composite potential needs at least two parts".into(),
            ));
        }
        let mut pot = Self {
            kind: Kind::Sum { parts },
            sup_norm: 0.0,
            decay: None,
            holder: None,
        };
        pot.sup_norm = pot.scan_sup();
        Ok(pot)
    }

    /// Declare a power envelope for a family that cannot derive one itself
    /// (composites, samples). The claim is still checked by `envelope_check`.
    pub fn with_power_envelope(mut self, amplitude: f64, delta: f64) -> Result<Self> {
        if !(delta > 1.0 && amplitude > 0.0) {
            return Err(Error::Config(format!(
                "declared envelope needs amplitude > 0 and delta > 1, got ({amplitude}, {delta})"
            )));
        }
        self.decay = Some(PowerEnvelope { amplitude, delta });
        Ok(self)
    }

    /// Declare Hölder class metadata explicitly.
    pub fn with_holder_class(mut self, alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0 && beta > 1.0) {
            return Err(Error::Config(format!(
                "declared Hölder class needs alpha in (0,1), beta > 1, got ({alpha}, {beta})"
            )));
        }
        self.holder = Some(HolderClass { alpha, beta });
        Ok(self)
    }

    /// Smooth the potential at scale `theta` with the given bump:
    /// `V_theta(r) = int rho(s) V(r + theta s) ds` over `s` in `[0, 1]`,
    /// evaluated with the fixed 64-node Gauss rule. The result carries both
    /// the smoothed value and its derivative
    /// `V_theta'(r) = theta^{-1} int rho'(s) (V(r + theta s) - V(r)) ds`.
    pub fn mollify(&self, theta: f64, bump: &MollifierBump) -> Result<RadialPotential> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::Domain(format!(
                "smoothing length must lie in (0, 1], got {theta}"
            )));
        }
        let mut pot = Self {
            kind: Kind::Mollified {
                base: Box::new(self.clone()),
                theta,
                bump: bump.clone(),
            },
            sup_norm: 0.0,
            decay: self.decay,
            holder: self.holder,
        };
        pot.sup_norm = pot.scan_sup();
        Ok(pot)
    }

    /// Evaluate at radius `r >= 0`.
    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::Domain(format!("negative radius {r}")));
        }
        Ok(self.eval_inner(r))
    }

    fn eval_inner(&self, r: f64) -> f64 {
        match &self.kind {
            Kind::PowerDecay { amplitude, delta } => amplitude * (r + 1.0).powf(-delta),
            Kind::LogDecay { amplitude, rho } => {
                amplitude / (r + 1.0) * (r + 2.0).ln().powf(-rho)
            }
            Kind::HolderOscillatory { alpha, beta, terms } => {
                let mut s = 0.0;
                for k in 0..=*terms {
                    let scale = (k as f64).exp2();
                    s += (-(alpha * k as f64)).exp2() * (scale * r).cos();
                }
                s * (1.0 + r).powf(-beta)
            }
            Kind::BarrierWell {
                height,
                r_inner,
                r_outer,
            } => {
                if r >= *r_inner && r <= *r_outer {
                    *height
                } else {
                    0.0
                }
            }
            Kind::ExpDecay { amplitude, rate } => amplitude * (-rate * r).exp(),
            Kind::Mollified { base, theta, bump } => {
                let mut acc = 0.0;
                for i in 0..bump.nodes.len() {
                    acc +=
                        bump.weights[i] * bump.density[i] * base.eval_inner(r + theta * bump.nodes[i]);
                }
                acc
            }
            Kind::CustomSampled { radii, values } => {
                if r <= radii[0] {
                    values[0]
                } else if r >= *radii.last().unwrap() {
                    0.0
                } else {
                    let idx = radii.partition_point(|&x| x <= r) - 1;
                    let (r0, r1) = (radii[idx], radii[idx + 1]);
                    let t = (r - r0) / (r1 - r0);
                    values[idx] * (1.0 - t) + values[idx + 1] * t
                }
            }
            Kind::Sum { parts } => parts.iter().map(|p| p.eval_inner(r)).sum(),
        }
    }

    /// Analytic derivative where the family has one; `None` for indicator,
    /// sampled and oscillatory kinds.
    pub fn deriv(&self, r: f64) -> Result<Option<f64>> {
        if !(r >= 0.0) {
            return Err(Error::Domain(format!("negative radius {r}")));
        }
        Ok(self.deriv_inner(r))
    }

    fn deriv_inner(&self, r: f64) -> Option<f64> {
        match &self.kind {
            Kind::PowerDecay { amplitude, delta } => {
                Some(-amplitude * delta * (r + 1.0).powf(-delta - 1.0))
            }
            Kind::LogDecay { amplitude, rho } => {
                let l = (r + 2.0).ln();
                Some(
                    -amplitude / ((r + 1.0) * (r + 1.0)) * l.powf(-rho)
                        - amplitude * rho / ((r + 1.0) * (r + 2.0)) * l.powf(-rho - 1.0),
                )
            }
            Kind::ExpDecay { amplitude, rate } => Some(-amplitude * rate * (-rate * r).exp()),
            Kind::Mollified { base, theta, bump } => {
                let v_here = base.eval_inner(r);
                let mut acc = 0.0;
                for i in 0..bump.nodes.len() {
                    acc += bump.weights[i]
                        * bump.density_deriv[i]
                        * (base.eval_inner(r + theta * bump.nodes[i]) - v_here);
                }
                Some(acc / theta)
            }
            Kind::Sum { parts } => {
                let mut acc = 0.0;
                for p in parts {
                    acc += p.deriv_inner(r)?;
                }
                Some(acc)
            }
            Kind::HolderOscillatory { .. }
            | Kind::BarrierWell { .. }
            | Kind::CustomSampled { .. } => None,
        }
    }

    /// Evaluation for internal scans where the radius is known nonnegative.
    pub(crate) fn value_at(&self, r: f64) -> f64 {
        self.eval_inner(r)
    }

    /// Derivative for internal scans where the radius is known nonnegative.
    pub(crate) fn deriv_at(&self, r: f64) -> Option<f64> {
        self.deriv_inner(r)
    }

    /// Smoothing length when this family was produced by [`Self::mollify`].
    pub fn mollified_theta(&self) -> Option<f64> {
        match &self.kind {
            Kind::Mollified { theta, .. } => Some(*theta),
            _ => None,
        }
    }

    /// Sup norm of the family (exact closed form where available, otherwise
    /// a refined scan performed once at construction).
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// Declared power envelope, if any.
    pub fn power_envelope(&self) -> Option<PowerEnvelope> {
        self.decay
    }

    /// Declared Hölder class, if any.
    pub fn holder_class(&self) -> Option<HolderClass> {
        self.holder
    }

    /// Upper bound for the full-line integral of `|V|`. Exact for the
    /// closed-form families, a certified majorant otherwise.
    pub fn l1_upper(&self) -> f64 {
        match &self.kind {
            Kind::PowerDecay { amplitude, delta } => amplitude.abs() / (delta - 1.0),
            Kind::LogDecay { amplitude, rho } => amplitude.abs() * log_weight_l1_upper(*rho),
            Kind::HolderOscillatory { beta, .. } => self.sup_norm / (beta - 1.0),
            Kind::BarrierWell {
                height,
                r_inner,
                r_outer,
            } => height.abs() * (r_outer - r_inner),
            Kind::ExpDecay { amplitude, rate } => amplitude.abs() / rate,
            Kind::Mollified { base, .. } => base.l1_upper(),
            Kind::CustomSampled { radii, values } => {
                let mut acc = values[0].abs() * radii[0];
                for i in 1..radii.len() {
                    acc +=
                        0.5 * (values[i].abs() + values[i - 1].abs()) * (radii[i] - radii[i - 1]);
                }
                acc
            }
            Kind::Sum { parts } => parts.iter().map(|p| p.l1_upper()).sum(),
        }
    }

    /// Monotone decreasing majorant of the positive part on the given grid:
    /// a right-to-left running maximum of `max(V, 0)` samples.
    pub fn monotone_majorant(&self, grid: &[f64]) -> Result<Vec<f64>> {
        validate_grid(grid)?;
        let mut out: Vec<f64> = grid.iter().map(|&r| self.eval_inner(r).max(0.0)).collect();
        for i in (0..out.len().saturating_sub(1)).rev() {
            out[i] = out[i].max(out[i + 1]);
        }
        Ok(out)
    }

    /// Scan the declared (or overridden) power envelope over a grid.
    ///
    /// Reports `sup |V(r)| (r+1)^delta / C`; the family passes when the
    /// measured ratio stays below `1 + 1e-9`. When the family has an
    /// analytic derivative, the one-sided derivative ratio against
    /// `C*delta*(r+1)^{-delta-1}` is reported alongside.
    pub fn envelope_check(
        &self,
        grid: &[f64],
        envelope: Option<PowerEnvelope>,
    ) -> Result<EnvelopeReport> {
        validate_grid(grid)?;
        let env = envelope.or(self.decay).ok_or_else(|| {
            Error::Config("family has no declared power envelope (delta unset)".into())
        })?;
        let mut max_ratio = 0.0f64;
        let mut worst_r = grid[0];
        let mut deriv_ratio: Option<f64> = None;
        let deriv_scale = env.amplitude * env.delta;
        for &r in grid {
            let ratio = self.eval_inner(r).abs() * (r + 1.0).powf(env.delta) / env.amplitude;
            if ratio > max_ratio {
                max_ratio = ratio;
                worst_r = r;
            }
            if let Some(dv) = self.deriv_inner(r) {
                let dr = dv * (r + 1.0).powf(env.delta + 1.0) / deriv_scale;
                deriv_ratio = Some(deriv_ratio.map_or(dr, |m: f64| m.max(dr)));
            }
        }
        Ok(EnvelopeReport {
            max_ratio,
            worst_r,
            deriv_ratio,
            pass: max_ratio <= 1.0 + 1e-9,
        })
    }

    /// Measured Hölder constant: the sup over grid points and offset gaps of
    /// `|V(r) - V(r')| (r+1)^beta / |r - r'|^alpha`, scanning both
    /// directions `r' = r ± gap`.
    pub fn holder_seminorm(
        &self,
        alpha: f64,
        beta: f64,
        grid: &[f64],
        offsets: &[f64],
    ) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!(
                "Hölder exponent must lie in (0,1), got {alpha}"
            )));
        }
        if !(beta >= 0.0) {
            return Err(Error::Domain(format!(
                "Hölder weight must be nonnegative, got {beta}"
            )));
        }
        if offsets.is_empty() || !offsets.iter().all(|&d| d > 0.0 && d <= 1.0) {
            return Err(Error::Domain(
                "offset gaps must be a nonempty subset of (0, 1]".into(),
            ));
        }
        validate_grid(grid)?;
        let mut sup = 0.0f64;
        for &r in grid {
            let here = self.eval_inner(r);
            let weight = (r + 1.0).powf(beta);
            for &gap in offsets {
                let fwd = (self.eval_inner(r + gap) - here).abs();
                let mut diff = fwd;
                if r - gap >= 0.0 {
                    diff = diff.max((self.eval_inner(r - gap) - here).abs());
                }
                sup = sup.max(diff * weight / gap.powf(alpha));
            }
        }
        Ok(sup)
    }

    /// Default geometric offsets `2^-j`, `j = 1..=10`, for seminorm scans.
    pub fn default_offsets() -> Vec<f64> {
        (1..=10).map(|j| (-(j as f64)).exp2()).collect()
    }

    /// Extent beyond which the family is identically zero or has clearly
    /// decayed; used to size sup-norm scans.
    fn extent_hint(&self) -> f64 {
        match &self.kind {
            Kind::BarrierWell { r_outer, .. } => *r_outer,
            Kind::CustomSampled { radii, .. } => *radii.last().unwrap(),
            Kind::Mollified { base, theta, .. } => base.extent_hint() + theta,
            Kind::Sum { parts } => parts.iter().map(|p| p.extent_hint()).fold(0.0, f64::max),
            _ => 64.0,
        }
    }

    fn critical_points(&self, out: &mut Vec<f64>) {
        match &self.kind {
            Kind::BarrierWell {
                r_inner, r_outer, ..
            } => {
                out.push(*r_inner);
                out.push(0.5 * (r_inner + r_outer));
                out.push(*r_outer);
            }
            Kind::CustomSampled { radii, .. } => out.extend_from_slice(radii),
            Kind::Mollified { base, .. } => base.critical_points(out),
            Kind::Sum { parts } => {
                for p in parts {
                    p.critical_points(out);
                }
            }
            _ => {}
        }
    }

    /// Two-stage scan for the sup norm: coarse pass over the extent plus a
    /// refinement window around the coarse argmax, with jump points sampled
    /// explicitly. The coarse pass is budgeted so families with very wide
    /// sample extents stay affordable.
    fn scan_sup(&self) -> f64 {
        let hi = self.extent_hint() + 1.0;
        let coarse = match &self.kind {
            Kind::Mollified { theta, .. } => (theta / 4.0).min(0.01).max(1e-4),
            _ => 0.01,
        };
        let coarse = coarse.max(hi / 20_000.0);
        let mut best = 0.0f64;
        let mut best_r = 0.0f64;
        let mut criticals = Vec::new();
        self.critical_points(&mut criticals);
        criticals.push(0.0);
        for &r in &criticals {
            let v = self.eval_inner(r).abs();
            if v > best {
                best = v;
                best_r = r;
            }
        }
        let n = (hi / coarse).ceil() as usize;
        for i in 0..=n {
            let r = i as f64 * coarse;
            let v = self.eval_inner(r).abs();
            if v > best {
                best = v;
                best_r = r;
            }
        }
        let lo = (best_r - coarse).max(0.0);
        let fine = coarse / 200.0;
        for i in 0..=400 {
            let r = lo + i as f64 * fine;
            let v = self.eval_inner(r).abs();
            best = best.max(v);
        }
        best
    }
}

/// Result of an envelope scan.
#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EnvelopeReport {
    pub max_ratio: f64,
    pub worst_r: f64,
    pub deriv_ratio: Option<f64>,
    pub pass: bool,
}

/// Mollification error constants against a Hölder class:
/// `c_err = sup |V - V_theta| (r+1)^beta theta^{-alpha}` and
/// `c_deriv = sup |V_theta'| (r+1)^beta theta^{1-alpha}`.
#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MollifyErrorReport {
    pub c_err: f64,
    pub c_deriv: f64,
}

/// Measure the mollification error constants of `smoothed` (produced by
/// [`RadialPotential::mollify`] with the same `theta`) against the class
/// `(alpha, beta)` on a grid. `alpha = 1` is accepted as the formal
/// Lipschitz slot.
pub fn mollify_error_report(
    base: &RadialPotential,
    smoothed: &RadialPotential,
    alpha: f64,
    beta: f64,
    theta: f64,
    grid: &[f64],
) -> Result<MollifyErrorReport> {
    if !(alpha > 0.0 && alpha <= 1.0 && beta >= 0.0) {
        return Err(Error::Domain(format!(
            "need alpha in (0,1] and beta >= 0, got ({alpha}, {beta})"
        )));
    }
    validate_grid(grid)?;
    let matches = matches!(&smoothed.kind, Kind::Mollified { theta: t, .. } if *t == theta);
    if !matches {
        return Err(Error::Config(
            "smoothed potential was not produced by mollify with the same theta".into(),
        ));
    }
    let err_scale = theta.powf(-alpha);
    let deriv_scale = theta.powf(1.0 - alpha);
    let mut c_err = 0.0f64;
    let mut c_deriv = 0.0f64;
    for &r in grid {
        let w = (r + 1.0).powf(beta);
        let diff = (base.eval_inner(r) - smoothed.eval_inner(r)).abs();
        c_err = c_err.max(diff * w * err_scale);
        if let Some(dv) = smoothed.deriv_inner(r) {
            c_deriv = c_deriv.max(dv.abs() * w * deriv_scale);
        }
    }
    Ok(MollifyErrorReport { c_err, c_deriv })
}

/// Upper bound for `int_0^inf (r+1)^{-1} (log(r+2))^{-rho} dr`, `rho > 1`:
/// quadrature over a geometric grid plus an analytic tail majorant.
pub fn log_weight_l1_upper(rho: f64) -> f64 {
    let grid = quad::geometric_scan_grid(240); // up to 2^30
    let c = quad::cumgauss4(&grid, |r: f64| {
        (r + 1.0).recip() * (r + 2.0).ln().powf(-rho)
    });
    let body = *c.last().unwrap();
    let b = *grid.last().unwrap();
    let tail = (b + 2.0) / (b + 1.0) * (b + 2.0).ln().powf(1.0 - rho) / (rho - 1.0);
    body + tail
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain("grid must be nonempty".into()));
    }
    if !grid[0].is_finite() || grid[0] < 0.0 {
        return Err(Error::Domain("grid radii must be nonnegative".into()));
    }
    if !grid.windows(2).all(|p| p[1] > p[0]) {
        return Err(Error::Domain(
            "grid radii must be strictly increasing".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn power_decay_eval_matches_closed_form() {
        let v = RadialPotential::power_decay(1.0, 2.0).unwrap();
        assert_eq!(v.eval(1.0).unwrap(), 0.25);
        assert!(v.eval(-0.5).is_err());
    }

    #[test]
    fn all_families_bounded_at_origin() {
        let bump = MollifierBump::standard();
        let base = RadialPotential::power_decay(1.0, 3.0).unwrap();
        let fams = vec![
            base.clone(),
            RadialPotential::log_decay(1.0, 2.0).unwrap(),
            RadialPotential::holder_oscillatory(0.5, 3.0, DEFAULT_WEIERSTRASS_TERMS).unwrap(),
            RadialPotential::barrier_well(2.0, 1.0, 2.0).unwrap(),
            RadialPotential::exp_decay(1.5, 1.0).unwrap(),
            base.mollify(0.1, &bump).unwrap(),
            RadialPotential::custom_sampled(vec![0.0, 1.0, 2.0], vec![0.5, 1.0, 0.0]).unwrap(),
        ];
        for v in fams {
            assert!(v.eval(0.0).unwrap().abs() <= v.sup_norm() + 1e-12);
        }
    }

    #[test]
    fn equality_families_saturate_their_envelope() {
        let grid: Vec<f64> = (0..=1000).map(|i| i as f64 * 0.1).collect();
        let v = RadialPotential::power_decay(1.0, 3.0).unwrap();
        let rep = v.envelope_check(&grid, None).unwrap();
        assert!((rep.max_ratio - 1.0).abs() < 1e-12);
        assert!(rep.pass);
        // pure decay has nonpositive derivative, so the one-sided sup is <= 0
        assert!(rep.deriv_ratio.unwrap() <= 0.0);
    }

    #[test]
    fn envelope_check_requires_metadata() {
        let grid = vec![0.0, 1.0, 2.0];
        let v = RadialPotential::barrier_well(2.0, 1.0, 2.0).unwrap();
        assert!(matches!(v.envelope_check(&grid, None), Err(Error::Config(_))));
    }

    #[test]
    fn constant_potential_has_zero_seminorm() {
        let v = RadialPotential::custom_sampled(vec![0.0, 1e6], vec![5.0, 5.0]).unwrap();
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.5).collect();
        let s = v
            .holder_seminorm(0.5, 3.0, &grid, &RadialPotential::default_offsets())
            .unwrap();
        // interpolation rounding leaves at most a few ulps per increment
        assert!(s < 1e-8, "seminorm {s}");
    }

    #[test]
    fn bump_is_calibrated() {
        let b = MollifierBump::standard();
        assert!((b.mass() - 1.0).abs() < 1e-14);
        assert!(b.deriv_integral().abs() < 1e-12);
        assert!((b.first_moment() - 0.5).abs() < 1e-12);
        assert!(b.density(0.0) == 0.0 && b.density(1.0) == 0.0);
        assert!(b.density(0.5) > 0.0);
    }

    #[test]
    fn mollify_is_exact_on_constants_and_shifts_affine() {
        let bump = MollifierBump::standard();
        let c = RadialPotential::custom_sampled(vec![0.0, 1e6], vec![5.0, 5.0]).unwrap();
        let ct = c.mollify(0.3, &bump).unwrap();
        for r in [0.0, 0.7, 13.0] {
            assert!((ct.eval(r).unwrap() - 5.0).abs() < 1e-10);
        }
        // affine: V(r) = r, so V_theta(r) = r + theta * m1 with m1 = 1/2
        let lin = RadialPotential::custom_sampled(vec![0.0, 1e6], vec![0.0, 1e6]).unwrap();
        let theta = 0.25;
        let lt = lin.mollify(theta, &bump).unwrap();
        let m1 = bump.first_moment();
        for r in [0.0, 1.0, 8.5] {
            assert!((lt.eval(r).unwrap() - (r + theta * m1)).abs() < 1e-10);
        }
    }

    #[test]
    fn mollify_rejects_bad_theta() {
        let bump = MollifierBump::standard();
        let v = RadialPotential::power_decay(1.0, 2.0).unwrap();
        assert!(v.mollify(0.0, &bump).is_err());
        assert!(v.mollify(-0.1, &bump).is_err());
        assert!(v.mollify(1.5, &bump).is_err());
    }

    #[test]
    fn mollify_error_report_zero_for_constant() {
        let bump = MollifierBump::standard();
        let c = RadialPotential::custom_sampled(vec![0.0, 1e6], vec![5.0, 5.0]).unwrap();
        let ct = c.mollify(0.1, &bump).unwrap();
        let grid: Vec<f64> = (0..=200).map(|i| i as f64 * 0.25).collect();
        let rep = mollify_error_report(&c, &ct, 0.5, 3.0, 0.1, &grid).unwrap();
        assert!(rep.c_err < 1e-9);
        assert!(rep.c_deriv < 1e-9);
    }

    #[test]
    fn monotone_majorant_dominates_and_decreases() {
        let v = RadialPotential::barrier_well(2.0, 1.0, 2.0).unwrap();
        let grid: Vec<f64> = (0..=50).map(|i| i as f64 * 0.1).collect();
        let p = v.monotone_majorant(&grid).unwrap();
        for (i, &r) in grid.iter().enumerate() {
            assert!(p[i] >= v.eval(r).unwrap());
        }
        assert!(p.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn sum_evaluates_pointwise() {
        let a = RadialPotential::power_decay(1.0, 3.0).unwrap();
        let b = RadialPotential::barrier_well(2.0, 1.0, 2.0).unwrap();
        let s = RadialPotential::sum(vec![a.clone(), b.clone()]).unwrap();
        for r in [0.0, 1.5, 3.0] {
            assert_eq!(s.eval(r).unwrap(), a.eval(r).unwrap() + b.eval(r).unwrap());
        }
        assert!((s.sup_norm() - 2.125).abs() < 1e-9);
    }

    #[test]
    fn custom_sampled_interpolates_and_truncates() {
        let v = RadialPotential::custom_sampled(vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 0.0]).unwrap();
        assert_eq!(v.eval(0.5).unwrap(), 1.0);
        assert_eq!(v.eval(1.5).unwrap(), 1.0);
        assert_eq!(v.eval(3.0).unwrap(), 0.0);
        assert_eq!(v.sup_norm(), 2.0);
    }
}
