//! Small numerical helpers shared by the spectral and time-domain routes.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Barycentric interpolation weights for distinct nodes.
pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    nodes
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            let prod: f64 = nodes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &xj)| xi - xj)
                .product();
            1.0 / prod
        })
        .collect()
}

/// Evaluate the interpolant through `(nodes, values)` at `x`.
pub fn barycentric_eval(nodes: &[f64], bary: &[f64], values: &[f64], x: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&xi, &wi), &fi) in nodes.iter().zip(bary).zip(values) {
        let d = x - xi;
        if d == 0.0 {
            return fi;
        }
        let c = wi / d;
        num += c * fi;
        den += c;
    }
    num / den
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in the fitted coordinate.
    pub rms: f64,
}

/// Ordinary least squares `y ≈ intercept + slope x`.
pub fn fit_line(x: &[f64], y: &[f64]) -> LineFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rms = (x
        .iter()
        .zip(y)
        .map(|(&a, &b)| (b - intercept - slope * a).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    LineFit { slope, intercept, rms }
}

/// `lo, lo·10^{1/n}, …` up to and including `hi` (to rounding).
pub fn log_space(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let steps = (decades * per_decade as f64).round().max(1.0) as usize;
    let (a, b) = (lo.ln(), hi.ln());
    (0..=steps).map(|i| (a + (b - a) * i as f64 / steps as f64).exp()).collect()
}

/// Composite Gauss–Legendre rule on `[a, b]` split into `panels` equal pieces.
pub fn composite_gl(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + h * p as f64;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(lo + 0.5 * h * (xi + 1.0));
            weights.push(0.5 * h * wi);
        }
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(16);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for deg in 0..32 {
            let got: f64 = x.iter().zip(&w).map(|(a, b)| b * a.powi(deg)).sum();
            let want = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((got - want).abs() < 1e-14, "deg {deg}: {got} vs {want}");
        }
        for p in x.windows(2) {
            assert!(p[0] < p[1]);
        }
    }

    #[test]
    fn barycentric_reproduces_cubic() {
        let (x, _) = gauss_legendre(8);
        let f = |t: f64| 1.0 + 2.0 * t - t * t * t;
        let vals: Vec<f64> = x.iter().map(|&t| f(t)).collect();
        let bw = barycentric_weights(&x);
        for &t in &[-0.93, -0.1, 0.0, 0.77] {
            assert!((barycentric_eval(&x, &bw, &vals, t) - f(t)).abs() < 1e-13);
        }
    }

    #[test]
    fn line_fit_exact() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.5 * v).collect();
        let f = fit_line(&x, &y);
        assert!((f.slope + 0.5).abs() < 1e-15 && (f.intercept - 3.0).abs() < 1e-15);
        assert!(f.rms < 1e-15);
    }

    #[test]
    fn log_space_endpoints() {
        let t = log_space(1e-4, 1e6, 32);
        assert_eq!(t.len(), 321);
        assert!((t[0] - 1e-4).abs() < 1e-18);
        assert!((t[320] / 1e6 - 1.0).abs() < 1e-13);
    }
}
