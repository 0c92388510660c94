//! Subcommand implementations.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use semirad::carleman::{self, PhaseProfile};
use semirad::exponents::{self, Regime};
use semirad::modes;
use semirad::potential::{MollifierBump, RadialPotential};
use semirad::quad;
use semirad::sweep::{self, FitModel, SweepRow};
use serde::Serialize;

use crate::config::{self, RegimeSection};
use crate::output;
use crate::parallel;

pub fn run_modes(
    dim: u32,
    h: f64,
    r_max: f64,
    energy: f64,
    v_sup: f64,
    json: bool,
) -> Result<()> {
    let grid = modes::build_modes(h, dim, r_max, energy, v_sup).map_err(to_anyhow)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&grid)?);
    } else {
        println!("l\tlambda\tnu\tmultiplicity");
        for e in &grid.entries {
            println!("{}\t{}\t{}\t{}", e.degree, e.eigenvalue, e.nu, e.multiplicity);
        }
        eprintln!(
            "# {} modes retained, nu_max = {}",
            grid.entries.len(),
            grid.nu_max
        );
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct CarlemanCertificate {
    regime: String,
    h: f64,
    eps_log: f64,
    tau: f64,
    tau1: f64,
    theta: Option<f64>,
    amplitude: f64,
    c0: f64,
    c0_worst_r: f64,
    phi_max_over_tau1: f64,
    c_w: Option<f64>,
    c_w_refined: Option<f64>,
    c_w_pass: Option<bool>,
    margin_min: Option<f64>,
    scale_interpolation_ratio: Option<f64>,
    psi_cap: Option<f64>,
    psi_max: Option<f64>,
    psi_cap_ok: Option<bool>,
    psi_domination_ok: Option<bool>,
    plan_k: f64,
    plan_q: f64,
    certificate_ok: bool,
}

#[allow(clippy::too_many_arguments)]
pub fn run_carleman_check(
    regime_kind: &str,
    h: f64,
    delta: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    rho: Option<f64>,
    energy: f64,
    weight_s: f64,
    terms: u32,
) -> Result<()> {
    let section = RegimeSection {
        kind: regime_kind.to_string(),
        delta,
        rho,
        alpha,
        beta,
    };
    let regime = config::build_regime(&section)?;
    let plan = exponents::tau_plan(&regime, h).map_err(to_anyhow)?;
    let omega = carleman::weight_omega(&regime, h).map_err(to_anyhow)?;
    let grid = quad::default_scan_grid();

    // Amplitude: fixed at 1 in the fast power regime; for the Hölder
    // regimes the coercivity margin picks it; elsewhere reported as 1 (the
    // free amplitude there is absorbed by proof-side constants).
    let mut margin_min = None;
    let mut c_w = None;
    let mut c_w_refined = None;
    let mut c_w_pass = None;
    let mut scale_interpolation_ratio = None;
    let (amplitude, holder_data) = match regime {
        Regime::HolderBeta3 { alpha } => (None, Some((alpha, 3.0))),
        Regime::HolderMid { alpha, beta } | Regime::HolderLow { alpha, beta } => {
            (None, Some((alpha, beta)))
        }
        _ => (regime.fixed_amplitude(), None),
    };
    let amplitude = match (amplitude, holder_data) {
        (Some(a), _) => a,
        (None, Some((alpha, beta))) => {
            let theta = plan
                .theta
                .context("Hölder regimes must carry a smoothing length")?;
            let potential =
                RadialPotential::holder_oscillatory(alpha, beta, terms).map_err(to_anyhow)?;
            let bump = MollifierBump::standard();
            let smoothed = potential.mollify(theta.min(1.0), &bump).map_err(to_anyhow)?;
            let rep = carleman::margin_amplitude(&smoothed, energy, plan.tau, &omega, &grid)
                .map_err(to_anyhow)?;
            margin_min = Some(rep.min_margin);
            let wrep = carleman::check_w_bound(
                &potential,
                &smoothed,
                theta.min(1.0),
                rep.amplitude,
                h,
                plan.tau,
                plan.eps_log,
                &omega,
                regime.w_bound_has_log_term(),
                &grid,
            )
            .map_err(to_anyhow)?;
            c_w = Some(wrep.c_w);
            c_w_refined = Some(wrep.c_w_refined);
            c_w_pass = Some(wrep.pass);
            if let (Some(b), Some(b0)) = (plan.scale_b, plan.b0(rep.amplitude)) {
                if plan.eps_log < beta - 1.0 {
                    let (ratio, _) = exponents::check_scale_interpolation(
                        beta,
                        plan.eps_log,
                        b.max(1.0 + 1e-9),
                        b0.max(1.0 + 1e-9),
                        &grid,
                    )
                    .map_err(to_anyhow)?;
                    scale_interpolation_ratio = Some(ratio);
                }
            }
            rep.amplitude
        }
        (None, None) => 1.0,
    };

    let profile = carleman::phase_phi(amplitude, plan.tau, plan.tau1, &omega, &grid)
        .map_err(to_anyhow)?;
    let c0_rep = carleman::check_c0(&profile).map_err(to_anyhow)?;

    // Integrable-potential certificates for the decay regimes.
    let (mut psi_cap, mut psi_max, mut psi_cap_ok, mut psi_dom) = (None, None, None, None);
    let psi_family = match regime {
        Regime::PowerGt2 { delta } | Regime::PowerLe2 { delta } => {
            Some(RadialPotential::power_decay(1.0, delta).map_err(to_anyhow)?)
        }
        Regime::LogDecay { rho } => {
            Some(RadialPotential::log_decay(1.0, rho).map_err(to_anyhow)?)
        }
        _ => None,
    };
    if let Some(v) = &psi_family {
        let psi: PhaseProfile =
            carleman::phase_psi(v, energy, weight_s, &grid).map_err(to_anyhow)?;
        let cert = carleman::certify_psi(&psi, v).map_err(to_anyhow)?;
        psi_cap = Some(cert.cap);
        psi_max = Some(cert.max_psi);
        psi_cap_ok = Some(cert.cap_ok);
        psi_dom = Some(cert.domination_ok);
    }

    let certificate_ok = c0_rep.c0.is_finite()
        && c_w_pass.unwrap_or(true)
        && psi_cap_ok.unwrap_or(true)
        && psi_dom.unwrap_or(true);
    let cert = CarlemanCertificate {
        regime: exponents::regime_label(&regime),
        h,
        eps_log: plan.eps_log,
        tau: plan.tau,
        tau1: plan.tau1,
        theta: plan.theta,
        amplitude,
        c0: c0_rep.c0,
        c0_worst_r: c0_rep.worst_r,
        phi_max_over_tau1: profile.phi_ratio_to_tau1(),
        c_w,
        c_w_refined,
        c_w_pass,
        margin_min,
        scale_interpolation_ratio,
        psi_cap,
        psi_max,
        psi_cap_ok,
        psi_domination_ok: psi_dom,
        plan_k: plan.bound_k,
        plan_q: plan.bound_q,
        certificate_ok,
    };
    println!("{}", serde_json::to_string_pretty(&cert)?);
    Ok(())
}

#[derive(Debug, Serialize)]
struct MollifyReport {
    alpha: f64,
    beta: f64,
    terms: u32,
    bump_mass_residual: f64,
    bump_deriv_integral: f64,
    bump_first_moment: f64,
    rows: Vec<MollifyRow>,
    err_ratios: Vec<f64>,
    deriv_ratios: Vec<f64>,
    theta_stable: bool,
    constant_exactness_residual: f64,
}

#[derive(Debug, Serialize)]
struct MollifyRow {
    theta: f64,
    c_err: f64,
    c_deriv: f64,
}

pub fn run_mollify_check(alpha: f64, beta: f64, terms: u32, thetas: &[f64]) -> Result<()> {
    if thetas.len() < 2 {
        bail!("need at least two smoothing lengths");
    }
    let bump = MollifierBump::standard();
    let potential = RadialPotential::holder_oscillatory(alpha, beta, terms).map_err(to_anyhow)?;
    let grid: Vec<f64> = (0..=6000).map(|i| i as f64 * 0.01).collect();
    let mut rows = Vec::new();
    for &theta in thetas {
        let smoothed = potential.mollify(theta, &bump).map_err(to_anyhow)?;
        let rep =
            semirad::potential::mollify_error_report(&potential, &smoothed, alpha, beta, theta, &grid)
                .map_err(to_anyhow)?;
        rows.push(MollifyRow {
            theta,
            c_err: rep.c_err,
            c_deriv: rep.c_deriv,
        });
    }
    let ratio = |a: f64, b: f64| a / b.max(f64::MIN_POSITIVE);
    let err_ratios: Vec<f64> = rows.windows(2).map(|w| ratio(w[1].c_err, w[0].c_err)).collect();
    let deriv_ratios: Vec<f64> = rows
        .windows(2)
        .map(|w| ratio(w[1].c_deriv, w[0].c_deriv))
        .collect();
    let theta_stable = err_ratios
        .iter()
        .chain(&deriv_ratios)
        .all(|&r| (0.25..=4.0).contains(&r));

    let constant = RadialPotential::custom_sampled(vec![0.0, 1e9], vec![3.0, 3.0])
        .map_err(to_anyhow)?;
    let smoothed_const = constant.mollify(thetas[0], &bump).map_err(to_anyhow)?;
    let mut exact_res = 0.0f64;
    for r in [0.0, 1.0, 10.0, 100.0] {
        exact_res = exact_res.max((smoothed_const.eval(r).map_err(to_anyhow)? - 3.0).abs());
    }

    let report = MollifyReport {
        alpha,
        beta,
        terms,
        bump_mass_residual: (bump.mass() - 1.0).abs(),
        bump_deriv_integral: bump.deriv_integral(),
        bump_first_moment: bump.first_moment(),
        rows,
        err_ratios,
        deriv_ratios,
        theta_stable,
        constant_exactness_residual: exact_res,
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

#[derive(Debug, Serialize)]
struct PredictReport {
    plan: exponents::ExponentPlan,
    consistency: exponents::ConsistencyReport,
}

#[allow(clippy::too_many_arguments)]
pub fn run_fit_predict(
    regime_kind: &str,
    h: f64,
    delta: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    rho: Option<f64>,
    c: f64,
    energy: f64,
    v_sup: f64,
) -> Result<()> {
    let section = RegimeSection {
        kind: regime_kind.to_string(),
        delta,
        rho,
        alpha,
        beta,
    };
    let regime = config::build_regime(&section)?;
    let plan = exponents::tau_plan(&regime, h).map_err(to_anyhow)?;
    let consistency =
        exponents::consistency_certificate(&plan, c, energy, v_sup).map_err(to_anyhow)?;
    let report = PredictReport { plan, consistency };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

pub fn run_fit_input(input: &Path, model_name: &str) -> Result<()> {
    let model = match model_name {
        "pure-power" => FitModel::PurePower,
        "power-log" => FitModel::PowerWithLog,
        "trapping" => FitModel::Trapping,
        other => bail!("unknown model {other:?}; use pure-power, power-log or trapping"),
    };
    let text = std::fs::read_to_string(input)
        .with_context(|| format!("reading {}", input.display()))?;
    let rows = output::parse_results_csv(&text)?;
    let sweep_rows: Vec<SweepRow> = rows
        .iter()
        .map(|&(h, g, converged)| SweepRow {
            kind: sweep::RowKind::Main,
            h,
            epsilon: f64::NAN,
            weight_s: f64::NAN,
            energy: f64::NAN,
            g,
            sigma_max: g.exp(),
            nu_max: f64::NAN,
            worst_degree: 0,
            worst_nu: f64::NAN,
            modes_total: 0,
            modes_solved: 0,
            converged,
            bound_shape: None,
            wall_time_s: 0.0,
        })
        .collect();
    let fit = sweep::fit_scaling(&sweep_rows, model).map_err(to_anyhow)?;
    println!("{}", serde_json::to_string_pretty(&fit)?);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn run_sweep_cmd(
    config_path: &Path,
    out_dir: &Path,
    threads: Option<usize>,
    emit_plot_data: bool,
    dump_wave: Option<PathBuf>,
) -> Result<()> {
    let (config, potential) = config::load(config_path)?;
    let pool = parallel::build_pool(threads)?;
    let eval = parallel::chunk_eval(&pool);
    let start = Instant::now();
    let result = sweep::run_sweep_with(
        &config,
        &potential,
        || start.elapsed().as_secs_f64(),
        eval,
    )
    .map_err(to_anyhow)?;
    let label = config.regime.as_ref().map(exponents::regime_label);
    output::write_outputs(out_dir, &result, label.as_deref(), emit_plot_data)?;

    if let Some(wave_dir) = dump_wave {
        std::fs::create_dir_all(&wave_dir)?;
        for row in result.rows.iter().filter(|r| r.kind == sweep::RowKind::Main) {
            let problem = semirad::operator1d::ResolventProblem {
                h: row.h,
                dim: config.dim,
                energy: config.energy,
                epsilon: row.epsilon,
                weight_s: config.weight_s,
                sign: config.sign,
            };
            let template =
                semirad::operator1d::OperatorTemplate::new(&problem, &potential, &config.policy)
                    .map_err(to_anyhow)?;
            let (radii, u) = template.mode_wave(row.worst_nu).map_err(to_anyhow)?;
            let mut text = String::new();
            for (r, z) in radii.iter().zip(&u) {
                use std::fmt::Write as _;
                let _ = writeln!(text, "{} {}", r, z.norm());
            }
            std::fs::write(wave_dir.join(format!("wave_h{}.dat", row.h)), text)?;
        }
    }

    for row in &result.rows {
        println!(
            "h={} eps={} g={} (worst l={}, nu={:.4}, modes {}/{}, converged={})",
            row.h,
            row.epsilon,
            row.g,
            row.worst_degree,
            row.worst_nu,
            row.modes_solved,
            row.modes_total,
            row.converged
        );
    }
    if let Some(fit) = &result.fit {
        println!(
            "fit[pure-power]: slope={:.6} intercept={:.6} R2={:.6} ({} rows)",
            fit.slope, fit.intercept, fit.r_squared, fit.rows_used
        );
    }
    if let Some(bound) = &result.bound {
        println!(
            "bound check: C_fit={:.6e} max_violation={:.3e} pass={} vacuous={}",
            bound.c_fit, bound.max_violation, bound.pass, bound.vacuous
        );
    }
    Ok(())
}

fn to_anyhow(e: semirad::Error) -> anyhow::Error {
    anyhow::anyhow!("{e}")
}
