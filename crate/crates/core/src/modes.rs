//! Angular mode bookkeeping for the polar reduction.
//!
//! In dimension `d >= 3` the sphere Laplacian has eigenvalues
//! `lambda_l = l (l + d - 2)` with the multiplicity of degree-`l` spherical
//! harmonics. Each eigenvalue contributes one half-line problem with scaled
//! angular momentum `nu = h * sqrt(lambda + (d-1)(d-3)/4)`. Only modes below
//! a coercive truncation bound can contribute to the resolvent norm maximum;
//! the rest are uniformly invertible on the truncated domain.

use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

/// One angular mode: degree, sphere eigenvalue, scaled momentum and
/// harmonic multiplicity. Multiplicities are diagnostic only — the operator
/// norm of a direct sum is the max over blocks, not a weighted sum.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ModeEntry {
    pub degree: u64,
    pub eigenvalue: u64,
    pub nu: f64,
    pub multiplicity: u128,
}

/// The finite set of angular modes retained for a given `(d, h)` together
/// with the truncation bound that certifies the discard.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ModeGrid {
    pub dim: u32,
    pub h: f64,
    pub nu_max: f64,
    pub entries: Vec<ModeEntry>,
}

/// Sphere eigenvalue `l (l + d - 2)` and the dimension of the degree-`l`
/// harmonic space, computed in integer arithmetic as the difference of two
/// homogeneous-polynomial dimensions.
pub fn angular_eigenvalue(dim: u32, degree: u64) -> Result<(u64, u128)> {
    if dim < 3 {
        return Err(Error::Domain(format!(
            "dimension {dim} unsupported: the radial reduction needs d >= 3 \
             (the d = 2 effective potential is singular at the origin)"
        )));
    }
    let d = dim as u64;
    let lambda = degree
        .checked_mul(degree + d - 2)
        .ok_or_else(|| Error::Resource(format!("eigenvalue overflow at degree {degree}")))?;
    let mult = harmonic_dimension(d, degree)?;
    Ok((lambda, mult))
}

/// dim of homogeneous harmonics = binom(l+d-1, d-1) - binom(l+d-3, d-1).
fn harmonic_dimension(d: u64, l: u64) -> Result<u128> {
    if l == 0 {
        return Ok(1);
    }
    let all = binomial(l + d - 1, d - 1)?;
    let lower = if l >= 2 { binomial(l + d - 3, d - 1)? } else { 0 };
    Ok(all - lower)
}

fn binomial(n: u64, k: u64) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul((n - i) as u128)
            .ok_or_else(|| Error::Resource(format!("binomial({n}, {k}) overflows")))?;
        acc /= (i + 1) as u128;
    }
    Ok(acc)
}

/// Scaled angular momentum `nu = h * sqrt(lambda + (d-1)(d-3)/4)`. The
/// additive term vanishes for `d = 3`.
pub fn nu_of(h: f64, dim: u32, lambda: f64) -> f64 {
    let d = dim as f64;
    h * (lambda + 0.25 * (d - 1.0) * (d - 3.0)).sqrt()
}

/// Coercive truncation bound `nu_max = R * sqrt(1 + E + sup|V|)`.
///
/// A discarded mode has `nu > nu_max`, hence on the truncated domain
/// `nu^2/r^2 >= nu^2/R^2 > 1 + E + sup|V|`, so the real part of its
/// quadratic form dominates the identity and its weighted resolvent norm
/// stays below 1.
pub fn coercive_nu_max(r_max: f64, energy: f64, v_sup: f64) -> f64 {
    r_max * (1.0 + energy + v_sup).sqrt()
}

/// Radius below which the centrifugal term alone dominates the energy and
/// potential: `nu^2/r^2 - E - sup|V| >= 1` for `r <= nu / sqrt(1+E+sup|V|)`.
pub fn ellipticity_radius(nu: f64, energy: f64, v_sup: f64) -> f64 {
    nu / (1.0 + energy + v_sup).sqrt()
}

/// Enumerate every mode with `nu <= nu_max` for the given problem data.
///
/// Caps the enumeration at 10^7 modes; beyond that the run is refused with
/// guidance rather than silently exploding.
pub fn build_modes(h: f64, dim: u32, r_max: f64, energy: f64, v_sup: f64) -> Result<ModeGrid> {
    build_modes_scaled(h, dim, r_max, energy, v_sup, 1.0)
}

/// [`build_modes`] with the truncation bound scaled by `margin` (>= 1).
/// Widening the margin must not change any resolvent maximum; the sweep
/// invariants check exactly that.
pub fn build_modes_scaled(
    h: f64,
    dim: u32,
    r_max: f64,
    energy: f64,
    v_sup: f64,
    margin: f64,
) -> Result<ModeGrid> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::Domain(format!(
            "semiclassical parameter must lie in (0,1), got {h}"
        )));
    }
    if !(r_max > 0.0) {
        return Err(Error::Domain(format!("domain radius must be positive, got {r_max}")));
    }
    if !(energy > 0.0) {
        return Err(Error::Domain(format!("energy must be positive, got {energy}")));
    }
    if !(v_sup >= 0.0) {
        return Err(Error::Domain(format!("sup|V| must be nonnegative, got {v_sup}")));
    }
    if !(margin >= 1.0) {
        return Err(Error::Domain(format!(
            "truncation margin must be >= 1, got {margin}"
        )));
    }
    let nu_max = margin * coercive_nu_max(r_max, energy, v_sup);
    const MODE_CAP: u64 = 10_000_000;
    let mut entries = Vec::new();
    let mut degree: u64 = 0;
    loop {
        let (lambda, mult) = angular_eigenvalue(dim, degree)?;
        let nu = nu_of(h, dim, lambda as f64);
        if nu > nu_max {
            break;
        }
        entries.push(ModeEntry {
            degree,
            eigenvalue: lambda,
            nu,
            multiplicity: mult,
        });
        if entries.len() as u64 > MODE_CAP {
            return Err(Error::Resource(format!(
                "mode truncation at nu_max = {nu_max} would keep more than {MODE_CAP} modes; \
                 raise h or lower the domain radius"
            )));
        }
        degree += 1;
    }
    Ok(ModeGrid {
        dim,
        h,
        nu_max,
        entries,
    })
}

impl ModeGrid {
    /// Largest retained degree, if any mode survived.
    pub fn max_degree(&self) -> Option<u64> {
        self.entries.last().map(|e| e.degree)
    }

    /// First excluded mode (`nu > nu_max`), for coercivity spot checks.
    pub fn first_excluded(&self) -> Result<ModeEntry> {
        let degree = self.entries.len() as u64;
        let (lambda, mult) = angular_eigenvalue(self.dim, degree)?;
        Ok(ModeEntry {
            degree,
            eigenvalue: lambda,
            nu: nu_of(self.h, self.dim, lambda as f64),
            multiplicity: mult,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_dimensional_spectrum() {
        let (l0, m0) = angular_eigenvalue(3, 0).unwrap();
        assert_eq!((l0, m0), (0, 1));
        let (l2, m2) = angular_eigenvalue(3, 2).unwrap();
        assert_eq!((l2, m2), (6, 5));
        for l in 0..50u64 {
            let (_, m) = angular_eigenvalue(3, l).unwrap();
            assert_eq!(m, (2 * l + 1) as u128);
        }
    }

    #[test]
    fn five_dimensional_degree_one() {
        let (lambda, mult) = angular_eigenvalue(5, 1).unwrap();
        assert_eq!(lambda, 4);
        assert_eq!(mult, 5);
    }

    #[test]
    fn closed_form_multiplicity_agrees() {
        // binom(l+d-2, l) * (2l+d-2) / (l+d-2) for l >= 1
        for d in 3..=8u64 {
            for l in 1..=20u64 {
                let (_, m) = angular_eigenvalue(d as u32, l).unwrap();
                let alt = binomial(l + d - 2, l).unwrap() * (2 * l + d - 2) as u128
                    / (l + d - 2) as u128;
                assert_eq!(m, alt, "d={d} l={l}");
            }
        }
    }

    #[test]
    fn dimension_below_three_is_rejected() {
        assert!(matches!(angular_eigenvalue(2, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn nu_values() {
        assert_eq!(nu_of(0.7, 3, 0.0), 0.0);
        assert!((nu_of(0.1, 3, 2.0) - 0.1 * 2.0f64.sqrt()).abs() < 1e-15);
        // d = 5, lambda = 0: additive term (4*2)/4 = 2
        assert!((nu_of(0.1, 5, 0.0) - 0.1 * 2.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn truncation_matches_integer_scan() {
        let grid = build_modes(0.5, 3, 10.0, 1.0, 1.0).unwrap();
        assert!((grid.nu_max - 10.0 * 3.0f64.sqrt()).abs() < 1e-12);
        // independent scan for the largest l with 0.5 sqrt(l(l+1)) <= nu_max
        let mut expect = 0u64;
        for l in 0..10_000u64 {
            if 0.5 * ((l * (l + 1)) as f64).sqrt() <= grid.nu_max {
                expect = l;
            }
        }
        assert_eq!(expect, 34);
        assert_eq!(grid.max_degree(), Some(34));
        assert_eq!(grid.entries.len(), 35);
        let excl = grid.first_excluded().unwrap();
        assert!(excl.nu > grid.nu_max);
    }

    #[test]
    fn truncation_scan_at_small_h() {
        let grid = build_modes(0.05, 3, 40.0, 1.0, 0.5).unwrap();
        let mut expect = 0u64;
        for l in 0..1_000_000u64 {
            if 0.05 * ((l * (l + 1)) as f64).sqrt() <= grid.nu_max {
                expect = l;
            } else {
                break;
            }
        }
        assert_eq!(grid.max_degree(), Some(expect));
    }

    #[test]
    fn shrinking_domain_keeps_only_lowest_mode() {
        let grid = build_modes(0.5, 3, 0.1, 1.0, 0.0).unwrap();
        assert_eq!(grid.entries.len(), 1);
        assert_eq!(grid.entries[0].degree, 0);
    }

    #[test]
    fn entries_sorted_with_nondecreasing_nu() {
        let grid = build_modes(0.3, 5, 10.0, 2.0, 0.5).unwrap();
        assert!(grid.entries.windows(2).all(|w| w[0].degree + 1 == w[1].degree));
        assert!(grid.entries.windows(2).all(|w| w[0].nu <= w[1].nu));
        assert!(grid.entries.iter().all(|e| e.multiplicity >= 1));
        assert!(grid
            .entries
            .iter()
            .all(|e| e.eigenvalue == e.degree * (e.degree + 3)));
    }
}
