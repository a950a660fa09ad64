//! Quadrature rules, extrapolation, and decay fits shared by the engines.

/// Gauss–Legendre nodes and weights on [-1, 1].
///
/// Nodes are found by Newton iteration on P_n starting from the Chebyshev
/// asymptotic guess; accurate to machine precision for the orders used here.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "need at least two nodes");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_with_derivative(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre quadrature of `f` over [a, b] with n nodes.
pub fn integrate_gauss<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let (xs, ws) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    for (x, w) in xs.iter().zip(ws.iter()) {
        sum += w * f(mid + half * x);
    }
    sum * half
}

/// Composite Simpson rule with `n` (even) panels.
pub fn integrate_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 0 { n } else { n + 1 };
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let c = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += c * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// Neville polynomial extrapolation of samples (h_i, f_i) to h = 0.
///
/// Used for Richardson-style limits where corrections are smooth in h.
pub fn neville_at_zero(samples: &[(f64, f64)]) -> f64 {
    let n = samples.len();
    assert!(n >= 1);
    let hs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let mut t: Vec<f64> = samples.iter().map(|s| s.1).collect();
    for m in 1..n {
        for i in 0..(n - m) {
            t[i] = (hs[i + m] * t[i] - hs[i] * t[i + 1]) / (hs[i + m] - hs[i]);
        }
    }
    t[0]
}

/// Result of a power-law decay fit `f(r) = limit + coeff * r^{-exponent}`.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    pub limit: f64,
    pub coeff: f64,
    pub exponent: f64,
    /// Max absolute deviation of the fit from the data.
    pub residual: f64,
}

/// Least-squares fit of `f(r) = m + c r^{-k}` on (r_i, f_i).
///
/// The exponent is estimated from successive-difference ratios (valid for a
/// geometric radius schedule), then (m, c) come from linear least squares.
/// Falls back to the last sample when the sequence is flat to rounding.
pub fn fit_decay(radii: &[f64], values: &[f64]) -> DecayFit {
    assert_eq!(radii.len(), values.len());
    assert!(radii.len() >= 3, "need at least three samples");
    let n = radii.len();

    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut ratios = Vec::new();
    for i in 0..(n - 2) {
        let d1 = values[i] - values[i + 1];
        let d2 = values[i + 1] - values[i + 2];
        if d1.abs() > 1e-13 * scale && d2.abs() > 1e-13 * scale && d1 * d2 > 0.0 {
            let q = radii[i + 1] / radii[i];
            let q2 = radii[i + 2] / radii[i + 1];
            if (q2 / q - 1.0).abs() < 1e-9 {
                ratios.push((d1 / d2).ln() / q.ln());
            }
        }
    }
    if ratios.is_empty() {
        // Flat sequence: converged already.
        return DecayFit { limit: values[n - 1], coeff: 0.0, exponent: 0.0, residual: 0.0 };
    }
    // Later triples see less contamination from higher-order terms.
    let exponent = *ratios.last().unwrap();
    if !(exponent.is_finite() && exponent > 0.0) {
        return DecayFit {
            limit: values[n - 1],
            coeff: 0.0,
            exponent: 0.0,
            residual: (values[n - 1] - values[n - 2]).abs(),
        };
    }

    // Linear LS for (m, c) in f = m + c * r^{-k}.
    let mut s_bb = 0.0;
    let mut s_b = 0.0;
    let mut s_fb = 0.0;
    let mut s_f = 0.0;
    for i in 0..n {
        let b = radii[i].powf(-exponent);
        s_bb += b * b;
        s_b += b;
        s_fb += values[i] * b;
        s_f += values[i];
    }
    let nf = n as f64;
    let det = nf * s_bb - s_b * s_b;
    let m = (s_f * s_bb - s_b * s_fb) / det;
    let c = (nf * s_fb - s_b * s_f) / det;
    let residual = radii
        .iter()
        .zip(values.iter())
        .map(|(r, f)| (f - m - c * r.powf(-exponent)).abs())
        .fold(0.0f64, f64::max);
    DecayFit { limit: m, coeff: c, exponent, residual }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_integrates_polynomials_exactly() {
        // n-point Gauss is exact through degree 2n-1.
        let v = integrate_gauss(|x| x.powi(9) + 3.0 * x.powi(4) - x, -1.0, 1.0, 5);
        assert!((v - 6.0 / 5.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_smooth_convergence() {
        let v = integrate_gauss(|x| (2.0 * x).sin().exp(), 0.0, 2.0, 48);
        let w = integrate_gauss(|x| (2.0 * x).sin().exp(), 0.0, 2.0, 96);
        assert!((v - w).abs() < 1e-13);
    }

    #[test]
    fn simpson_log_integral() {
        let v = integrate_simpson(|x| 1.0 / x, 1.0, 2.0, 256);
        assert!((v - std::f64::consts::LN_2).abs() < 1e-10);
    }

    #[test]
    fn neville_extrapolates_quadratic() {
        let f = |h: f64| 3.7 + 2.0 * h + 0.5 * h * h;
        let samples = [(1e-2, f(1e-2)), (1e-3, f(1e-3)), (1e-4, f(1e-4))];
        assert!((neville_at_zero(&samples) - 3.7).abs() < 1e-12);
    }

    #[test]
    fn decay_fit_recovers_power_law() {
        let radii: [f64; 5] = [100.0, 316.22776601683796, 1000.0, 3162.2776601683795, 10000.0];
        let values: Vec<f64> = radii.iter().map(|r| 5.0 + 2.0 * r.powf(-1.0)).collect();
        let fit = fit_decay(&radii, &values);
        assert!((fit.limit - 5.0).abs() < 1e-9);
        assert!((fit.exponent - 1.0).abs() < 1e-6);
    }

    #[test]
    fn decay_fit_flat_sequence() {
        let radii = [100.0, 1000.0, 10000.0];
        let values = [2.0, 2.0, 2.0];
        let fit = fit_decay(&radii, &values);
        assert_eq!(fit.limit, 2.0);
    }
}
