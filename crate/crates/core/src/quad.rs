//! Small quadrature toolbox: Gauss–Legendre rules plus cumulative
//! integrators used by the phase constructions.

use alloc::vec;
use alloc::vec::Vec;

/// Gauss–Legendre rule with `n` nodes, mapped to the interval `[0, 1]`.
///
/// Nodes and weights are computed by Newton iteration on the Legendre
/// polynomial recurrence; for the orders used here (n <= 128) the roots
/// converge to machine precision in a handful of steps.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n {
        // Chebyshev-based initial guess for the i-th root on [-1, 1].
        let mut x = (core::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n(x) and P_n'(x) by upward recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        // Map from [-1, 1] to [0, 1]; Newton traverses roots right to left.
        nodes[n - 1 - i] = 0.5 * (1.0 - x);
        weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Cumulative trapezoid integral of samples `f` over the (possibly
/// non-uniform) abscissae `x`; output starts at 0.
pub fn cumtrapz(x: &[f64], f: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), f.len());
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..x.len() {
        acc += 0.5 * (f[i] + f[i - 1]) * (x[i] - x[i - 1]);
        out.push(acc);
    }
    out
}

/// Cumulative integral of a function over the abscissae `x` using a 4-point
/// Gauss rule inside each cell. For smooth integrands the per-cell error is
/// O(dx^8), so monotone caps certified from the result are not polluted by
/// quadrature overshoot.
pub fn cumgauss4(x: &[f64], mut f: impl FnMut(f64) -> f64) -> Vec<f64> {
    // 4-point Gauss-Legendre on [0,1].
    const GN: [f64; 4] = [
        0.069431844202973712,
        0.330009478207571868,
        0.669990521792428132,
        0.930568155797026288,
    ];
    const GW: [f64; 4] = [
        0.173927422568726929,
        0.326072577431273071,
        0.326072577431273071,
        0.173927422568726929,
    ];
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..x.len() {
        let (a, b) = (x[i - 1], x[i]);
        let w = b - a;
        let mut cell = 0.0;
        for k in 0..4 {
            cell += GW[k] * f(a + GN[k] * w);
        }
        acc += w * cell;
        out.push(acc);
    }
    out
}

/// Geometric scan grid `r_i = 2^{i/8} - 1`, `i = 0..=steps`. With the default
/// 160 steps it covers `[0, 2^20 - 1]`; the geometric spacing exposes the
/// worst constant when comparing power laws.
pub fn geometric_scan_grid(steps: usize) -> Vec<f64> {
    (0..=steps).map(|i| (i as f64 / 8.0).exp2() - 1.0).collect()
}

/// Default scan grid used by the pointwise inequality checks.
pub fn default_scan_grid() -> Vec<f64> {
    geometric_scan_grid(160)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_on_polynomials() {
        let (x, w) = gauss_legendre_unit(8);
        // exact for degree <= 15 on [0,1]: integral of t^k is 1/(k+1)
        for k in 0..=15usize {
            let s: f64 = x
                .iter()
                .zip(&w)
                .map(|(&xi, &wi)| wi * xi.powi(k as i32))
                .sum();
            assert!(
                (s - 1.0 / (k as f64 + 1.0)).abs() < 1e-14,
                "degree {k}: {s}"
            );
        }
        let total: f64 = w.iter().sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gauss_legendre_matches_known_5_point_rule() {
        let (x, w) = gauss_legendre_unit(5);
        // mid node of the 5-point rule sits at 1/2 with weight 128/225 / 2
        assert!((x[2] - 0.5).abs() < 1e-15);
        assert!((w[2] - 64.0 / 225.0).abs() < 1e-15);
    }

    #[test]
    fn cumtrapz_linear_is_exact() {
        let x: alloc::vec::Vec<f64> = (0..=10).map(|i| i as f64 * 0.31).collect();
        let f: alloc::vec::Vec<f64> = x.iter().map(|&t| 2.0 * t + 1.0).collect();
        let c = cumtrapz(&x, &f);
        for (i, &xi) in x.iter().enumerate() {
            assert!((c[i] - (xi * xi + xi)).abs() < 1e-12);
        }
    }

    #[test]
    fn cumgauss4_handles_smooth_decay() {
        let x = geometric_scan_grid(160);
        let c = cumgauss4(&x, |t: f64| (t + 1.0).powi(-2));
        // exact cumulative: 1 - 1/(r+1); must not overshoot the cap 1
        for (i, &xi) in x.iter().enumerate() {
            let exact = 1.0 - 1.0 / (xi + 1.0);
            assert!((c[i] - exact).abs() < 1e-9, "node {i}: {} vs {exact}", c[i]);
            assert!(c[i] <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn scan_grid_starts_at_zero_and_grows() {
        let g = default_scan_grid();
        assert_eq!(g[0], 0.0);
        assert_eq!(g.len(), 161);
        assert!(g.windows(2).all(|p| p[1] > p[0]));
        assert!((g[160] - ((1u64 << 20) as f64 - 1.0)).abs() < 1e-6);
    }
}
