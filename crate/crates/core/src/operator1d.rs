//! Discretisation of the half-line operators
//! `Q = D_r^2 + nu^2/r^2 + V(r) - E ± i*eps` on a truncated domain with
//! Dirichlet conditions at both ends, plus the weighted resolvent norm
//! `sigma = || (r+1)^{-s} Q^{-1} (r+1)^{-s} ||` computed by power iteration
//! on the Hermitian square.
//!
//! The discrete operator is `A ± i*eps*I` with `A` real symmetric
//! tridiagonal, so the adjoint solve is the conjugate of the forward solve
//! and `sigma * eps <= 1` holds exactly at the spectral level.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::modes::{self, ModeEntry, ModeGrid};
use crate::potential::RadialPotential;
use crate::{Error, Result};

/// Sign of the spectral shift `± i*eps`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Uniform interior grid on `(0, r_max)`: `n` interior nodes `r_j = j*dr`,
/// `j = 1..=n`, `dr = r_max/(n+1)`. No node sits at the origin, where the
/// Dirichlet condition lives and the centrifugal term is singular.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Grid1D {
    r_max: f64,
    n: usize,
    dr: f64,
}

impl Grid1D {
    pub fn new(r_max: f64, n: usize) -> Result<Self> {
        if !(r_max > 0.0) {
            return Err(Error::Domain(format!(
                "truncation radius must be positive, got {r_max}"
            )));
        }
        if n < 2 {
            return Err(Error::Domain(format!("need at least 2 interior nodes, got {n}")));
        }
        Ok(Self {
            r_max,
            n,
            dr: r_max / (n as f64 + 1.0),
        })
    }

    /// Grid sized by the resolution rule `dr <= h / (ppw * sqrt(E + sup|V|))`,
    /// i.e. at least `ppw` points per local wavelength.
    pub fn with_resolution(
        r_max: f64,
        h: f64,
        energy: f64,
        v_sup: f64,
        points_per_wavelength: f64,
        max_points: usize,
    ) -> Result<Self> {
        if !(points_per_wavelength > 0.0) {
            return Err(Error::Config(
                "points-per-wavelength must be positive".into(),
            ));
        }
        let dr_target = h / (points_per_wavelength * (energy + v_sup).sqrt());
        let n = (r_max / dr_target).ceil() as usize;
        let n = n.max(3) - 1;
        if n > max_points {
            return Err(Error::Resource(format!(
                "grid would need {n} points (cap {max_points}); raise h, lower the domain \
                 radius or relax the resolution rule"
            )));
        }
        Self::new(r_max, n)
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    /// Interior node `r_j`, `j = 0..n` mapping to `(j+1)*dr`.
    pub fn node(&self, j: usize) -> f64 {
        (j as f64 + 1.0) * self.dr
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|j| self.node(j))
    }
}

/// Complex symmetric tridiagonal operator `A ± i*eps*I` (plus an optional
/// absorbing ramp on the imaginary part over the last tenth of the domain).
#[derive(Debug, Clone)]
pub struct DiscreteRadialOperator {
    pub grid: Grid1D,
    pub h: f64,
    pub nu: f64,
    pub energy: f64,
    pub epsilon: f64,
    pub sign: Sign,
    diag: Vec<Complex64>,
    offdiag: f64,
}

impl DiscreteRadialOperator {
    /// Assemble from potential samples at the grid nodes. The diagonal is
    /// `2h^2/dr^2 + nu^2/r_j^2 + V_j - E ± i*eps`, the off-diagonal
    /// `-h^2/dr^2`. `eps = 0` is rejected: the measured quantity is uniform
    /// over `eps` in `(0,1)`, so a strictly positive shift is always used.
    pub fn assemble_from_samples(
        h: f64,
        nu: f64,
        v_samples: &[f64],
        energy: f64,
        epsilon: f64,
        sign: Sign,
        grid: Grid1D,
        cap_strength: Option<f64>,
    ) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::Domain(
                "spectral shift eps must be strictly positive (the system may be singular \
                 at eps = 0)"
                    .into(),
            ));
        }
        if !(h > 0.0) {
            return Err(Error::Domain(format!("h must be positive, got {h}")));
        }
        if v_samples.len() != grid.len() {
            return Err(Error::Shape(format!(
                "potential samples ({}) do not match grid size ({})",
                v_samples.len(),
                grid.len()
            )));
        }
        let kin = h * h / (grid.dr() * grid.dr());
        let sgn = sign.factor();
        let ramp_start = 0.9 * grid.r_max();
        let ramp_width = 0.1 * grid.r_max();
        let diag = (0..grid.len())
            .map(|j| {
                let r = grid.node(j);
                let mut im = sgn * epsilon;
                if let Some(strength) = cap_strength {
                    if r > ramp_start {
                        im += sgn * strength * (r - ramp_start) / ramp_width;
                    }
                }
                Complex64::new(2.0 * kin + nu * nu / (r * r) + v_samples[j] - energy, im)
            })
            .collect();
        Ok(Self {
            grid,
            h,
            nu,
            energy,
            epsilon,
            sign,
            diag,
            offdiag: -kin,
        })
    }

    /// Convenience assembly that samples the potential on the grid.
    pub fn assemble(
        h: f64,
        nu: f64,
        potential: &RadialPotential,
        energy: f64,
        epsilon: f64,
        sign: Sign,
        grid: Grid1D,
    ) -> Result<Self> {
        let v: Result<Vec<f64>> = grid.nodes().map(|r| potential.eval(r)).collect();
        Self::assemble_from_samples(h, nu, &v?, energy, epsilon, sign, grid, None)
    }

    pub fn diag(&self) -> &[Complex64] {
        &self.diag
    }

    pub fn offdiag(&self) -> f64 {
        self.offdiag
    }

    /// `A x` with implicit zero boundary values.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.diag.len();
        let mut out = vec![Complex64::ZERO; n];
        for j in 0..n {
            let mut acc = self.diag[j] * x[j];
            if j > 0 {
                acc += self.offdiag * x[j - 1];
            }
            if j + 1 < n {
                acc += self.offdiag * x[j + 1];
            }
            out[j] = acc;
        }
        out
    }

    /// Factor once for repeated solves.
    pub fn factor(&self) -> Result<TridiagFactor> {
        TridiagFactor::new(&self.diag, self.offdiag)
    }

    /// Solve `op * u = f` by tridiagonal elimination with one step of
    /// iterative refinement.
    pub fn solve(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        Ok(self.solve_with_residual(f)?.0)
    }

    /// Solve and report the relative residual `||op*u - f|| / ||f||`.
    pub fn solve_with_residual(&self, f: &[Complex64]) -> Result<(Vec<Complex64>, f64)> {
        if f.len() != self.diag.len() {
            return Err(Error::Shape(format!(
                "rhs length {} does not match operator size {}",
                f.len(),
                self.diag.len()
            )));
        }
        let factor = self.factor()?;
        let mut u = factor.solve(f);
        // one refinement pass knocks the elimination error down to the
        // representation floor
        let au = self.apply(&u);
        let res: Vec<Complex64> = f.iter().zip(&au).map(|(&a, &b)| a - b).collect();
        let du = factor.solve(&res);
        for (ui, di) in u.iter_mut().zip(&du) {
            *ui += di;
        }
        let au = self.apply(&u);
        let num: f64 = f
            .iter()
            .zip(&au)
            .map(|(&a, &b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let den: f64 = f.iter().map(|&a| a.norm_sqr()).sum::<f64>().sqrt();
        let rel = if den > 0.0 { num / den } else { 0.0 };
        Ok((u, rel))
    }
}

/// Thomas factorisation of a complex symmetric tridiagonal matrix. Pivots
/// keep `|Im| >= eps` for the shifted operators, so breakdown cannot occur
/// there; a zero pivot on other input is reported with its node index.
pub struct TridiagFactor {
    pivots: Vec<Complex64>,
    multipliers: Vec<Complex64>,
    offdiag: f64,
}

impl TridiagFactor {
    pub fn new(diag: &[Complex64], offdiag: f64) -> Result<Self> {
        let n = diag.len();
        let mut pivots = Vec::with_capacity(n);
        let mut multipliers = Vec::with_capacity(n.saturating_sub(1));
        let mut prev = diag[0];
        if prev == Complex64::ZERO {
            return Err(Error::Breakdown {
                node: 0,
                msg: "zero pivot in tridiagonal elimination".into(),
            });
        }
        pivots.push(prev);
        for j in 1..n {
            let m = offdiag / prev;
            let p = diag[j] - m * offdiag;
            if p == Complex64::ZERO {
                return Err(Error::Breakdown {
                    node: j,
                    msg: "zero pivot in tridiagonal elimination".into(),
                });
            }
            multipliers.push(m);
            pivots.push(p);
            prev = p;
        }
        Ok(Self {
            pivots,
            multipliers,
            offdiag,
        })
    }

    /// Forward/backward substitution into a fresh vector.
    pub fn solve(&self, f: &[Complex64]) -> Vec<Complex64> {
        let mut out = f.to_vec();
        self.solve_in_place(&mut out);
        out
    }

    pub fn solve_in_place(&self, x: &mut [Complex64]) {
        let n = self.pivots.len();
        for j in 1..n {
            let m = self.multipliers[j - 1];
            x[j] = x[j] - m * x[j - 1];
        }
        x[n - 1] /= self.pivots[n - 1];
        for j in (0..n - 1).rev() {
            x[j] = (x[j] - self.offdiag * x[j + 1]) / self.pivots[j];
        }
    }

    /// Solve the adjoint system `A^H x = f`. For complex symmetric `A` the
    /// adjoint is the entrywise conjugate, so this is conj-solve-conj and
    /// mirrors the forward solve bit for bit.
    pub fn solve_adjoint_in_place(&self, x: &mut [Complex64]) {
        for v in x.iter_mut() {
            *v = v.conj();
        }
        self.solve_in_place(x);
        for v in x.iter_mut() {
            *v = v.conj();
        }
    }
}

/// Outcome of a weighted-norm power iteration.
#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct NormEstimate {
    pub sigma: f64,
    pub converged: bool,
    pub iterations: usize,
}

const POWER_TOL: f64 = 1e-8;
const POWER_MAX_ITER: usize = 10_000;

/// Largest singular value of `W * op^{-1} * W` with `W = diag((r_j+1)^{-s})`,
/// by power iteration on the Hermitian square. One application is
/// weight-solve-weight followed by the adjoint triple; the adjoint solve uses
/// the conjugate-sign operator. Convergence is declared after the estimate
/// moves by less than 1e-8 relative on two consecutive iterations; the
/// iteration cap is 10_000, after which the best estimate is returned with
/// the converged flag cleared.
pub fn weighted_resolvent_norm(
    op: &DiscreteRadialOperator,
    weight_s: f64,
) -> Result<NormEstimate> {
    Ok(power_iteration(op, weight_s)?.0)
}

/// As [`weighted_resolvent_norm`], also returning the response
/// `u = op^{-1} (W x)` for the final iterate `x` (the near-maximising
/// weighted input), normalised to unit input.
pub fn weighted_resolvent_norm_with_wave(
    op: &DiscreteRadialOperator,
    weight_s: f64,
) -> Result<(NormEstimate, Vec<Complex64>)> {
    let (est, x) = power_iteration(op, weight_s)?;
    let factor = op.factor()?;
    let mut wave: Vec<Complex64> = op
        .grid
        .nodes()
        .zip(&x)
        .map(|(r, &xj)| xj * (r + 1.0).powf(-weight_s))
        .collect();
    factor.solve_in_place(&mut wave);
    Ok((est, wave))
}

fn power_iteration(
    op: &DiscreteRadialOperator,
    weight_s: f64,
) -> Result<(NormEstimate, Vec<Complex64>)> {
    if !(weight_s > 0.5) {
        return Err(Error::Domain(format!(
            "weight exponent must exceed 1/2, got {weight_s}"
        )));
    }
    let factor = op.factor()?;
    let n = op.grid.len();
    let weights: Vec<f64> = op
        .grid
        .nodes()
        .map(|r| (r + 1.0).powf(-weight_s))
        .collect();

    // Fixed seeded start vector; the minus-sign run starts from the
    // conjugate so both signs traverse bitwise-mirrored iterates.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_CAFE);
    let mut x: Vec<Complex64> = (0..n)
        .map(|_| {
            let re = 2.0 * rng.gen::<f64>() - 1.0;
            let im = 2.0 * rng.gen::<f64>() - 1.0;
            match op.sign {
                Sign::Plus => Complex64::new(re, im),
                Sign::Minus => Complex64::new(re, -im),
            }
        })
        .collect();
    normalize(&mut x);

    let mut work = vec![Complex64::ZERO; n];
    let mut sigma_prev = f64::NAN;
    let mut sigma = 0.0;
    let mut steady = 0usize;
    let mut iterations = 0usize;
    let mut converged = false;
    while iterations < POWER_MAX_ITER {
        iterations += 1;
        // forward: y = W A^{-1} W x
        for j in 0..n {
            work[j] = x[j] * weights[j];
        }
        factor.solve_in_place(&mut work);
        for j in 0..n {
            work[j] *= weights[j];
        }
        sigma = norm(&work);
        // adjoint: x <- W A^{-H} W y, renormalised
        for j in 0..n {
            work[j] *= weights[j];
        }
        factor.solve_adjoint_in_place(&mut work);
        for j in 0..n {
            work[j] *= weights[j];
        }
        let nz = norm(&work);
        if nz == 0.0 {
            break;
        }
        for j in 0..n {
            x[j] = work[j] / nz;
        }
        if sigma_prev.is_finite() {
            let rel = (sigma - sigma_prev).abs() / sigma.max(f64::MIN_POSITIVE);
            if rel <= POWER_TOL {
                steady += 1;
                if steady >= 2 {
                    converged = true;
                    break;
                }
            } else {
                steady = 0;
            }
        }
        sigma_prev = sigma;
    }
    Ok((
        NormEstimate {
            sigma,
            converged,
            iterations,
        },
        x,
    ))
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [Complex64]) {
    let n = norm(v);
    if n > 0.0 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
}

/// Grid construction policy for resolvent measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridPolicy {
    pub r_max: f64,
    pub points_per_wavelength: f64,
    pub max_points: usize,
    /// Strength of the optional absorbing ramp over the last tenth of the
    /// domain (sign-matched imaginary part). Off by default so the operator
    /// is exactly the truncated shifted one.
    pub cap_strength: Option<f64>,
    /// Multiplier (>= 1) on the coercive truncation bound. Widening it may
    /// only add modes that cannot attain the maximum; results are unchanged.
    pub nu_max_margin: f64,
    /// Diagnostic worst-case scan over non-spectral angular momenta: after
    /// the spectral maximum is found, the continuous `nu` interval around it
    /// is searched with staged shift-continuation so a resonance can be
    /// locked onto. Off by default: the spectral set is the operator's.
    pub nu_refine: bool,
}

impl GridPolicy {
    pub fn new(r_max: f64) -> Self {
        Self {
            r_max,
            points_per_wavelength: 10.0,
            max_points: 4_000_000,
            cap_strength: None,
            nu_max_margin: 1.0,
            nu_refine: false,
        }
    }
}

/// Problem data for one `g` measurement.
#[derive(Debug, Clone, Copy)]
pub struct ResolventProblem {
    pub h: f64,
    pub dim: u32,
    pub energy: f64,
    pub epsilon: f64,
    pub weight_s: f64,
    pub sign: Sign,
}

/// Shared per-measurement state: grid, potential samples and parameters.
/// Mode solves are pure functions of this template plus `nu`, so they can
/// run concurrently in any order.
#[derive(Debug, Clone)]
pub struct OperatorTemplate {
    pub problem: ResolventProblem,
    pub grid: Grid1D,
    v_samples: Vec<f64>,
    v_sup: f64,
    cap_strength: Option<f64>,
}

impl OperatorTemplate {
    pub fn new(
        problem: &ResolventProblem,
        potential: &RadialPotential,
        policy: &GridPolicy,
    ) -> Result<Self> {
        if !(problem.weight_s > 0.5) {
            return Err(Error::Domain(format!(
                "weight exponent must exceed 1/2, got {}",
                problem.weight_s
            )));
        }
        if !(problem.energy > 0.0) {
            return Err(Error::Domain(format!(
                "energy must be positive, got {}",
                problem.energy
            )));
        }
        let v_sup = potential.sup_norm();
        let grid = Grid1D::with_resolution(
            policy.r_max,
            problem.h,
            problem.energy,
            v_sup,
            policy.points_per_wavelength,
            policy.max_points,
        )?;
        let v_samples: Result<Vec<f64>> = grid.nodes().map(|r| potential.eval(r)).collect();
        Ok(Self {
            problem: *problem,
            grid,
            v_samples: v_samples?,
            v_sup,
            cap_strength: policy.cap_strength,
        })
    }

    pub fn v_sup(&self) -> f64 {
        self.v_sup
    }

    /// Same template with a different spectral shift (stage probes of the
    /// resonance-locking scan).
    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        let mut t = self.clone();
        t.problem.epsilon = epsilon;
        t
    }

    pub fn operator(&self, nu: f64) -> Result<DiscreteRadialOperator> {
        DiscreteRadialOperator::assemble_from_samples(
            self.problem.h,
            nu,
            &self.v_samples,
            self.problem.energy,
            self.problem.epsilon,
            self.problem.sign,
            self.grid.clone(),
            self.cap_strength,
        )
    }

    /// Weighted resolvent norm of the mode with angular momentum `nu`.
    pub fn mode_norm(&self, nu: f64) -> Result<NormEstimate> {
        let op = self.operator(nu)?;
        weighted_resolvent_norm(&op, self.problem.weight_s)
    }

    /// Radii and the near-maximising response of the mode, for wave dumps.
    pub fn mode_wave(&self, nu: f64) -> Result<(Vec<f64>, Vec<Complex64>)> {
        let op = self.operator(nu)?;
        let (_, wave) = weighted_resolvent_norm_with_wave(&op, self.problem.weight_s)?;
        Ok((self.grid.nodes().collect(), wave))
    }

    /// A-priori bound on the mode norm from coercivity: with
    /// `delta = min_j (nu^2/r_j^2 + V_j) - E`, the spectrum of the real part
    /// stays above `delta`, so `sigma <= 1/sqrt(max(delta,0)^2 + eps^2)`.
    pub fn sigma_upper_bound(&self, nu: f64) -> f64 {
        let mut low = f64::INFINITY;
        for (j, r) in self.grid.nodes().enumerate() {
            low = low.min(nu * nu / (r * r) + self.v_samples[j]);
        }
        let delta = (low - self.problem.energy).max(0.0);
        1.0 / (delta * delta + self.problem.epsilon * self.problem.epsilon).sqrt()
    }
}

/// Result of one `g` measurement: the log of the max weighted resolvent
/// norm over retained modes, plus diagnostics.
#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GValue {
    pub g: f64,
    pub sigma_max: f64,
    pub worst_degree: u64,
    pub worst_nu: f64,
    pub nu_max: f64,
    pub modes_total: usize,
    pub modes_solved: usize,
    pub converged: bool,
    /// Set when the diagnostic continuous-`nu` scan produced the maximum;
    /// `worst_nu` is then non-spectral.
    pub nu_refined: bool,
}

/// Modes are processed in fixed degree order in chunks; within a chunk a
/// mode is skipped when its a-priori bound cannot beat the running maximum,
/// which leaves the result bit-identical to the exhaustive scan while
/// pruning the deeply coercive tail.
pub const MODE_CHUNK: usize = 64;

/// Sequential `g` computation. See [`compute_g_with`] for the pluggable
/// chunk evaluator used by parallel drivers.
pub fn compute_g(
    problem: &ResolventProblem,
    potential: &RadialPotential,
    policy: &GridPolicy,
) -> Result<GValue> {
    compute_g_with(problem, potential, policy, |template, jobs| {
        jobs.iter().map(|e| template.mode_norm(e.nu)).collect()
    })
}

/// `g` computation with a caller-supplied evaluator mapping a chunk of
/// modes to their norm estimates (in order). The evaluator may compute the
/// estimates concurrently; the reduction happens here in fixed mode order.
pub fn compute_g_with<F>(
    problem: &ResolventProblem,
    potential: &RadialPotential,
    policy: &GridPolicy,
    eval_chunk: F,
) -> Result<GValue>
where
    F: Fn(&OperatorTemplate, &[ModeEntry]) -> Vec<Result<NormEstimate>>,
{
    let template = OperatorTemplate::new(problem, potential, policy)?;
    let mode_grid: ModeGrid = modes::build_modes_scaled(
        problem.h,
        problem.dim,
        policy.r_max,
        problem.energy,
        template.v_sup(),
        policy.nu_max_margin,
    )?;

    let mut sigma_max = f64::NEG_INFINITY;
    let mut worst = (0u64, 0.0f64);
    let mut all_converged = true;
    let mut solved = 0usize;
    let mut jobs: Vec<ModeEntry> = Vec::with_capacity(MODE_CHUNK);
    for chunk in mode_grid.entries.chunks(MODE_CHUNK) {
        jobs.clear();
        for entry in chunk {
            if sigma_max < 0.0 || template.sigma_upper_bound(entry.nu) > sigma_max {
                jobs.push(*entry);
            }
        }
        let results = eval_chunk(&template, &jobs);
        if results.len() != jobs.len() {
            return Err(Error::Shape(
                "chunk evaluator returned a mismatched result count".into(),
            ));
        }
        for (entry, res) in jobs.iter().zip(results) {
            let est = res?;
            solved += 1;
            all_converged &= est.converged;
            if est.sigma > sigma_max {
                sigma_max = est.sigma;
                worst = (entry.degree, entry.nu);
            }
        }
    }
    if !sigma_max.is_finite() || sigma_max <= 0.0 {
        return Err(Error::Domain(
            "no mode produced a positive resolvent norm".into(),
        ));
    }
    let mut nu_refined = false;
    if policy.nu_refine {
        // anchor on the smooth wide-shift landscape: evaluate every spectral
        // nu with a broad probe shift, keep the strongest local maxima, and
        // stage the shift down around each of them
        let probe = template.with_epsilon(template.problem.epsilon.max(1e-2));
        let mut landscape: Vec<f64> = Vec::with_capacity(mode_grid.entries.len());
        for entry in &mode_grid.entries {
            let est = probe.mode_norm(entry.nu)?;
            solved += 1;
            landscape.push(est.sigma);
        }
        let n_modes = landscape.len();
        let mut anchors: Vec<usize> = (0..n_modes)
            .filter(|&i| {
                (i == 0 || landscape[i] >= landscape[i - 1])
                    && (i + 1 == n_modes || landscape[i] > landscape[i + 1])
            })
            .collect();
        anchors.sort_by(|&a, &b| landscape[b].partial_cmp(&landscape[a]).unwrap());
        anchors.truncate(4);
        anchors.sort_unstable();
        for anchor_idx in anchors {
            // a few spacings of slack on both sides: the resonance energies
            // sweep with nu^2, and near small nu one spectral step covers
            // only a fraction of a radial level spacing
            let anchor_nu = mode_grid.entries[anchor_idx].nu;
            let lo = if anchor_idx >= 3 {
                mode_grid.entries[anchor_idx - 3].nu
            } else {
                0.0
            };
            let hi = if anchor_idx + 3 < mode_grid.entries.len() {
                mode_grid.entries[anchor_idx + 3].nu
            } else {
                anchor_nu + 3.0 * problem.h
            };
            let (nu_star, est) = refine_resonance(&template, lo, hi);
            solved += est.1;
            if est.0.sigma > sigma_max {
                sigma_max = est.0.sigma;
                worst = (mode_grid.entries[anchor_idx].degree, nu_star);
                all_converged &= est.0.converged;
                nu_refined = true;
            }
        }
    }
    Ok(GValue {
        g: sigma_max.ln(),
        sigma_max,
        worst_degree: worst.0,
        worst_nu: worst.1,
        nu_max: mode_grid.nu_max,
        modes_total: mode_grid.entries.len(),
        modes_solved: solved,
        converged: all_converged,
        nu_refined,
    })
}

/// Lock onto the worst continuous `nu` inside `[lo, hi]` by staged
/// continuation in the spectral shift: wide shifts make the resonance peak
/// broad enough for a coarse scan to see, and each stage narrows both the
/// bracket and the shift until the configured one is reached. Returns the
/// located `nu`, the estimate there, and the number of mode solves spent.
fn refine_resonance(template: &OperatorTemplate, lo: f64, hi: f64) -> (f64, (NormEstimate, usize)) {
    const SCAN: usize = 24;
    let target_eps = template.problem.epsilon;
    let mut stages = Vec::new();
    let mut eps = 1e-2;
    while eps > target_eps * 10.0 {
        stages.push(eps);
        eps /= 10.0;
    }
    // run the configured shift twice: the first pass narrows the bracket to
    // the final peak, the second resolves it
    stages.push(target_eps);
    stages.push(target_eps);
    let mut a = lo.max(0.0);
    let mut b = hi;
    let mut best_nu = 0.5 * (a + b);
    let mut best = NormEstimate {
        sigma: 0.0,
        converged: true,
        iterations: 0,
    };
    let mut spent = 0usize;
    for (si, &stage_eps) in stages.iter().enumerate() {
        let probe = template.with_epsilon(stage_eps);
        let step = (b - a) / SCAN as f64;
        let mut stage_best = (a, NormEstimate {
            sigma: -1.0,
            converged: true,
            iterations: 0,
        });
        for j in 0..=SCAN {
            let nu = a + step * j as f64;
            if let Ok(est) = probe.mode_norm(nu) {
                spent += 1;
                if est.sigma > stage_best.1.sigma {
                    stage_best = (nu, est);
                }
            }
        }
        if si + 1 == stages.len() {
            best_nu = stage_best.0;
            best = stage_best.1;
        }
        a = (stage_best.0 - 2.0 * step).max(lo.max(0.0));
        b = (stage_best.0 + 2.0 * step).min(hi);
    }
    (best_nu, (best, spent))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free_operator(n: usize, eps: f64, sign: Sign) -> DiscreteRadialOperator {
        let grid = Grid1D::new(4.0, n).unwrap();
        let v = vec![0.0; n];
        DiscreteRadialOperator::assemble_from_samples(1.0, 0.0, &v, 1.0, eps, sign, grid, None)
            .unwrap()
    }

    #[test]
    fn assembly_matches_hand_computation() {
        // R = 4, N = 3 -> dr = 1; h = 1, V = 0, nu = 0, E = 1, eps = 0.1
        let op = free_operator(3, 0.1, Sign::Plus);
        assert_eq!(op.grid.dr(), 1.0);
        for &d in op.diag() {
            assert!((d - Complex64::new(1.0, 0.1)).norm() < 1e-15);
        }
        assert_eq!(op.offdiag(), -1.0);
    }

    #[test]
    fn centrifugal_term_enters_diagonal() {
        let grid = Grid1D::new(2.0, 3).unwrap(); // dr = 0.5, r_1 = 0.5
        let v = vec![0.0; 3];
        let op = DiscreteRadialOperator::assemble_from_samples(
            1.0,
            1.0,
            &v,
            1.0,
            0.1,
            Sign::Plus,
            grid,
            None,
        )
        .unwrap();
        // nu^2 / r_1^2 = 1 / 0.25 = 4 on top of 2h^2/dr^2 - E = 8 - 1
        assert!((op.diag()[0].re - (8.0 - 1.0 + 4.0)).abs() < 1e-12);
    }

    #[test]
    fn zero_epsilon_rejected() {
        let grid = Grid1D::new(4.0, 3).unwrap();
        let v = vec![0.0; 3];
        let r = DiscreteRadialOperator::assemble_from_samples(
            1.0,
            0.0,
            &v,
            1.0,
            0.0,
            Sign::Plus,
            grid,
            None,
        );
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn solve_recovers_unit_vectors() {
        let op = free_operator(20, 0.3, Sign::Plus);
        for k in [0usize, 7, 19] {
            let mut e = vec![Complex64::ZERO; 20];
            e[k] = Complex64::new(1.0, 0.0);
            let f = op.apply(&e);
            let u = op.solve(&f).unwrap();
            for (j, &uj) in u.iter().enumerate() {
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((uj - want).norm() < 1e-10, "entry {j}: {uj}");
            }
        }
    }

    #[test]
    fn solve_residual_is_tiny() {
        let op = free_operator(200, 0.05, Sign::Minus);
        let f: Vec<Complex64> = (0..200)
            .map(|j| Complex64::new((j as f64 * 0.37).sin(), (j as f64 * 0.11).cos()))
            .collect();
        let (_, rel) = op.solve_with_residual(&f).unwrap();
        assert!(rel <= 1e-10, "relative residual {rel}");
    }

    #[test]
    fn large_shift_contracts() {
        // eps = 1, V = 0: || u || <= || f || / eps = || f ||
        let op = free_operator(50, 1.0, Sign::Plus);
        let f: Vec<Complex64> = (0..50)
            .map(|j| Complex64::new((j as f64).sin(), 0.5 * (j as f64).cos()))
            .collect();
        let u = op.solve(&f).unwrap();
        let nf: f64 = f.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let nu_: f64 = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(nu_ <= nf * (1.0 + 1e-12));
    }

    #[test]
    fn sigma_bounded_by_inverse_epsilon() {
        for eps in [1.0, 0.25, 1e-2] {
            let op = free_operator(80, eps, Sign::Plus);
            let est = weighted_resolvent_norm(&op, 1.0).unwrap();
            assert!(est.sigma * eps <= 1.0 + 1e-9, "eps={eps}: {}", est.sigma);
        }
    }

    #[test]
    fn stronger_weight_never_increases_sigma() {
        let op = free_operator(80, 1e-2, Sign::Plus);
        let hi = weighted_resolvent_norm(&op, 1.0).unwrap();
        let lo = weighted_resolvent_norm(&op, 0.6).unwrap();
        assert!(hi.sigma <= lo.sigma * (1.0 + 1e-10));
    }

    #[test]
    fn weight_exponent_must_exceed_half() {
        let op = free_operator(10, 0.1, Sign::Plus);
        assert!(weighted_resolvent_norm(&op, 0.5).is_err());
    }
}
