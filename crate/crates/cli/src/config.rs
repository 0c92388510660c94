//! Sweep configuration file: TOML with sections `[problem]`, `[potential]`,
//! `[grid]`, `[sweep]` and optional `[regime]`.

use std::path::Path;

use anyhow::{bail, Context, Result};
use semirad::exponents::Regime;
use semirad::operator1d::{GridPolicy, Sign};
use semirad::potential::RadialPotential;
use semirad::sweep::SweepConfig;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub problem: ProblemSection,
    pub potential: PotentialSection,
    pub grid: GridSection,
    pub sweep: SweepSection,
    pub regime: Option<RegimeSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub d: u32,
    pub energy: f64,
    pub s: f64,
    pub epsilon: f64,
    /// "plus" (default) or "minus".
    pub sign: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    pub kind: String,
    pub amplitude: Option<f64>,
    pub delta: Option<f64>,
    pub rho: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub terms: Option<u32>,
    pub height: Option<f64>,
    pub r_inner: Option<f64>,
    pub r_outer: Option<f64>,
    pub rate: Option<f64>,
    /// Two-column text file (radius, value) for `kind = "sampled"`.
    pub file: Option<String>,
    /// Parts of a `kind = "sum"` composite.
    pub parts: Option<Vec<PotentialSection>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub r_max: f64,
    pub points_per_wavelength: Option<f64>,
    pub max_points: Option<usize>,
    pub cap_strength: Option<f64>,
    pub nu_max_margin: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub h: Vec<f64>,
    pub eps_sensitivity: Option<bool>,
    pub max_cost: Option<f64>,
    pub epsilon_floor: Option<f64>,
    pub c_user: Option<f64>,
    /// Diagnostic worst-case scan over non-spectral nu (default off).
    pub nu_scan: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeSection {
    pub kind: String,
    pub delta: Option<f64>,
    pub rho: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
}

pub fn load(path: &Path) -> Result<(SweepConfig, RadialPotential)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let file: ConfigFile = toml::from_str(&text).context("parsing config")?;
    build(&file, path.parent().unwrap_or(Path::new(".")))
}

pub fn build(file: &ConfigFile, base_dir: &Path) -> Result<(SweepConfig, RadialPotential)> {
    let potential = build_potential(&file.potential, base_dir)?;
    if file.potential.kind == "sum" && file.regime.is_none() {
        bail!(
            "composite potentials carry no regime metadata of their own; \
             state the regime explicitly in a [regime] section"
        );
    }
    let mut policy = GridPolicy::new(file.grid.r_max);
    if let Some(ppw) = file.grid.points_per_wavelength {
        policy.points_per_wavelength = ppw;
    }
    if let Some(mp) = file.grid.max_points {
        policy.max_points = mp;
    }
    policy.cap_strength = file.grid.cap_strength;
    if let Some(m) = file.grid.nu_max_margin {
        policy.nu_max_margin = m;
    }
    if let Some(v) = file.sweep.nu_scan {
        policy.nu_refine = v;
    }

    let mut config = SweepConfig::new(file.sweep.h.clone(), policy);
    config.dim = file.problem.d;
    config.energy = file.problem.energy;
    config.weight_s = file.problem.s;
    config.epsilon = file.problem.epsilon;
    config.sign = match file.problem.sign.as_deref() {
        None | Some("plus") => Sign::Plus,
        Some("minus") => Sign::Minus,
        Some(other) => bail!("unknown sign {other:?}; use \"plus\" or \"minus\""),
    };
    if let Some(v) = file.sweep.eps_sensitivity {
        config.eps_sensitivity = v;
    }
    if let Some(v) = file.sweep.max_cost {
        config.max_cost = v;
    }
    if let Some(v) = file.sweep.epsilon_floor {
        config.epsilon_floor = v;
    }
    config.c_user = file.sweep.c_user;
    config.regime = match &file.regime {
        Some(sec) => Some(build_regime(sec)?),
        None => None,
    };
    config.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok((config, potential))
}

pub fn build_regime(sec: &RegimeSection) -> Result<Regime> {
    let need = |v: Option<f64>, name: &str| {
        v.ok_or_else(|| anyhow::anyhow!("regime {:?} needs `{name}`", sec.kind))
    };
    let regime = match sec.kind.as_str() {
        "power_gt2" | "delta_gt2" => Regime::power_gt2(need(sec.delta, "delta")?),
        "power_le2" | "delta_le2" => Regime::power_le2(need(sec.delta, "delta")?),
        "power" => Regime::power(need(sec.delta, "delta")?),
        "log_decay" => Regime::log_decay(need(sec.rho, "rho")?),
        "holder_beta3" => Regime::holder_beta3(need(sec.alpha, "alpha")?),
        "holder_mid" => Regime::holder_mid(need(sec.alpha, "alpha")?, need(sec.beta, "beta")?),
        "holder_low" => Regime::holder_low(need(sec.alpha, "alpha")?, need(sec.beta, "beta")?),
        "holder" => Regime::holder(need(sec.alpha, "alpha")?, need(sec.beta, "beta")?),
        other => bail!(
            "unknown regime kind {other:?}; expected one of power_gt2, power_le2, power, \
             log_decay, holder_beta3, holder_mid, holder_low, holder"
        ),
    };
    regime.map_err(|e| anyhow::anyhow!("{e}"))
}

pub fn build_potential(sec: &PotentialSection, base_dir: &Path) -> Result<RadialPotential> {
    let need = |v: Option<f64>, name: &str| {
        v.ok_or_else(|| anyhow::anyhow!("potential {:?} needs `{name}`", sec.kind))
    };
    let pot = match sec.kind.as_str() {
        "power_decay" => RadialPotential::power_decay(
            sec.amplitude.unwrap_or(1.0),
            need(sec.delta, "delta")?,
        ),
        "log_decay" => {
            RadialPotential::log_decay(sec.amplitude.unwrap_or(1.0), need(sec.rho, "rho")?)
        }
        "holder" | "holder_oscillatory" => RadialPotential::holder_oscillatory(
            need(sec.alpha, "alpha")?,
            need(sec.beta, "beta")?,
            sec.terms
                .unwrap_or(semirad::potential::DEFAULT_WEIERSTRASS_TERMS),
        ),
        "barrier_well" => RadialPotential::barrier_well(
            need(sec.height, "height")?,
            need(sec.r_inner, "r_inner")?,
            need(sec.r_outer, "r_outer")?,
        ),
        "exp_decay" => {
            RadialPotential::exp_decay(sec.amplitude.unwrap_or(1.0), need(sec.rate, "rate")?)
        }
        "free" | "zero" => RadialPotential::custom_sampled(vec![0.0, 1.0], vec![0.0, 0.0]),
        "sampled" => {
            let rel = sec
                .file
                .as_ref()
                .ok_or_else(|| anyhow::anyhow!("sampled potential needs `file`"))?;
            let path = base_dir.join(rel);
            let (radii, values) = read_samples(&path)?;
            RadialPotential::custom_sampled(radii, values)
        }
        "sum" => {
            let parts_cfg = sec
                .parts
                .as_ref()
                .ok_or_else(|| anyhow::anyhow!("sum potential needs `parts`"))?;
            let parts: Result<Vec<RadialPotential>> = parts_cfg
                .iter()
                .map(|p| build_potential(p, base_dir))
                .collect();
            RadialPotential::sum(parts?)
        }
        other => bail!(
            "unknown potential kind {other:?}; expected one of power_decay, log_decay, \
             holder, barrier_well, exp_decay, free, sampled, sum"
        ),
    };
    pot.map_err(|e| anyhow::anyhow!("{e}"))
}

/// Two-column text samples: whitespace-separated `radius value` per line,
/// `#` comments allowed, radii strictly increasing.
pub fn read_samples(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading sample file {}", path.display()))?;
    let mut radii = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let (r, v) = match (it.next(), it.next(), it.next()) {
            (Some(r), Some(v), None) => (r, v),
            _ => bail!("line {}: expected exactly two columns", lineno + 1),
        };
        radii.push(
            r.parse::<f64>()
                .with_context(|| format!("line {}: bad radius {r:?}", lineno + 1))?,
        );
        values.push(
            v.parse::<f64>()
                .with_context(|| format!("line {}: bad value {v:?}", lineno + 1))?,
        );
    }
    Ok((radii, values))
}
