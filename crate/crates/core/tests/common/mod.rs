//! Shared oracles for the integration tests. Everything here is an
//! independent route: dense elimination instead of tridiagonal sweeps,
//! full SVD instead of power iteration, adaptive instead of fixed
//! quadrature. None of it calls back into the solver paths it checks.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(f, a, fa, m, fm, flm);
        let right = simpson(f, m, fm, b, fb, frm);
        if depth > 50 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, fa, m, fm, flm, left, 0.5 * tol, depth + 1)
                + recurse(f, m, fm, b, fb, frm, right, 0.5 * tol, depth + 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(f, a, fa, b, fb, fm);
    recurse(f, a, fa, b, fb, fm, whole, tol, 0)
}

/// Dense complex Gaussian elimination with partial pivoting. Returns the
/// solution of `a x = b` for a square row-major matrix.
pub fn dense_solve(a: &[Vec<Complex64>], b: &[Complex64]) -> Vec<Complex64> {
    let n = b.len();
    let mut m: Vec<Vec<Complex64>> = a.to_vec();
    let mut x: Vec<Complex64> = b.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| {
                m[i][col]
                    .norm_sqr()
                    .partial_cmp(&m[j][col].norm_sqr())
                    .unwrap()
            })
            .unwrap();
        m.swap(col, piv);
        x.swap(col, piv);
        assert!(m[col][col].norm_sqr() > 0.0, "singular oracle matrix");
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                let v = m[col][k];
                m[row][k] -= f * v;
            }
            let xv = x[col];
            x[row] -= f * xv;
        }
    }
    for row in (0..n).rev() {
        let mut acc = x[row];
        for k in row + 1..n {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    x
}

/// Largest singular value of a dense complex matrix via the real embedding
/// `[[Re, -Im], [Im, Re]]`, whose singular values are those of the complex
/// matrix with doubled multiplicity.
pub fn dense_sigma_max(m: &[Vec<Complex64>]) -> f64 {
    let n = m.len();
    let mut z = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            z[(i, j)] = m[i][j].re;
            z[(i, j + n)] = -m[i][j].im;
            z[(i + n, j)] = m[i][j].im;
            z[(i + n, j + n)] = m[i][j].re;
        }
    }
    let svd = z.svd(false, false);
    svd.singular_values.max()
}

/// Dense tridiagonal matrix for an assembled operator.
pub fn dense_from_tridiag(diag: &[Complex64], offdiag: f64) -> Vec<Vec<Complex64>> {
    let n = diag.len();
    let mut a = vec![vec![Complex64::ZERO; n]; n];
    for j in 0..n {
        a[j][j] = diag[j];
        if j + 1 < n {
            a[j][j + 1] = Complex64::new(offdiag, 0.0);
            a[j + 1][j] = Complex64::new(offdiag, 0.0);
        }
    }
    a
}

/// Dense weighted resolvent `W A^{-1} W` built column by column with the
/// dense eliminator.
pub fn dense_weighted_resolvent(
    diag: &[Complex64],
    offdiag: f64,
    weights: &[f64],
) -> Vec<Vec<Complex64>> {
    let n = diag.len();
    let a = dense_from_tridiag(diag, offdiag);
    let mut m = vec![vec![Complex64::ZERO; n]; n];
    for col in 0..n {
        let mut e = vec![Complex64::ZERO; n];
        e[col] = Complex64::new(weights[col], 0.0);
        let u = dense_solve(&a, &e);
        for row in 0..n {
            m[row][col] = weights[row] * u[row];
        }
    }
    m
}

/// Number of linearly independent harmonic homogeneous polynomials of
/// degree `l` in `d` variables, by a numeric rank computation on the
/// Laplacian coefficient map (monomial basis).
pub fn harmonic_dimension_by_rank(d: usize, l: usize) -> usize {
    let monos_l = monomials(d, l);
    if l < 2 {
        return monos_l.len();
    }
    let monos_l2 = monomials(d, l - 2);
    let index: std::collections::HashMap<Vec<usize>, usize> = monos_l2
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, m)| (m, i))
        .collect();
    // rows: target monomials of degree l-2; cols: source monomials of degree l
    let mut a = DMatrix::<f64>::zeros(monos_l2.len(), monos_l.len());
    for (col, mono) in monos_l.iter().enumerate() {
        for v in 0..d {
            if mono[v] >= 2 {
                let mut target = mono.clone();
                target[v] -= 2;
                let coeff = (mono[v] * (mono[v] - 1)) as f64;
                let row = index[&target];
                a[(row, col)] += coeff;
            }
        }
    }
    let rank = a.rank(1e-9);
    monos_l.len() - rank
}

fn monomials(d: usize, l: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = vec![0usize; d];
    fn rec(d: usize, pos: usize, left: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == d - 1 {
            current[pos] = left;
            out.push(current.clone());
            return;
        }
        for take in 0..=left {
            current[pos] = take;
            rec(d, pos + 1, left - take, current, out);
        }
    }
    rec(d, 0, l, &mut current, &mut out);
    out
}
