//! Bessel functions of the first kind for real order `0 <= ν <= 50`, their
//! positive zeros, and the `sin(tk)/k` wave multiplier.
//!
//! `J_ν(x)` is evaluated in three regimes:
//!
//! * `x < 12`: ascending power series. The largest term is bounded by
//!   `I_ν(12) ~ 2e4`, so cancellation costs at most five digits.
//! * `x >= max(12, 2ν²)`: Hankel asymptotic expansion, truncated at its
//!   smallest term (error below `e^{-2x}` relative to the envelope).
//! * `12 <= x < 2ν²` (only reachable for `ν > √6`): Miller backward recurrence
//!   normalized by the Neumann series `(x/2)^μ = Σ (μ+2m) Γ(μ+m)/m! J_{μ+2m}(x)`.

use std::f64::consts::PI;

use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};

/// Largest supported Bessel order.
pub const MAX_ORDER: f64 = 50.0;

/// Series/asymptotic crossover for small orders.
pub const SERIES_LIMIT: f64 = 12.0;

/// Below this value of `|tk|` the wave multiplier switches to its Taylor branch.
pub const SINC_SEAM: f64 = 1e-4;

/// Order `ν` of a Bessel function used as a Hankel order.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if !nu.is_finite() || nu < 0.0 || nu > MAX_ORDER {
            return Err(Error::UnsupportedOrder(nu));
        }
        Ok(BesselOrder(nu))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Abscissa where the asymptotic expansion takes over.
    pub fn asymptotic_crossover(self) -> f64 {
        SERIES_LIMIT.max(2.0 * self.0 * self.0)
    }
}

/// `J_ν(x)` for `x >= 0`.
pub fn bessel_j(nu: BesselOrder, x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::InvalidInput(format!("bessel_j requires finite x >= 0, got {x}")));
    }
    Ok(j_unchecked(nu.0, x))
}

/// `J_ν(x)` without input validation; `nu` in `[0, 50]`, `x >= 0`.
pub(crate) fn j_unchecked(nu: f64, x: f64) -> f64 {
    if x < SERIES_LIMIT {
        j_series(nu, x)
    } else if x >= SERIES_LIMIT.max(2.0 * nu * nu) {
        j_asymptotic(nu, x)
    } else {
        j_miller(nu, x)
    }
}

/// `J_ν(x) / x^ν`, finite and smooth down to `x = 0` where it equals
/// `1 / (2^ν Γ(ν+1))`.
pub(crate) fn j_scaled_unchecked(nu: f64, x: f64) -> f64 {
    if x < SERIES_LIMIT {
        series_sum(nu, x, 0.5f64.powf(nu) / gamma(nu + 1.0))
    } else {
        j_unchecked(nu, x) / x.powf(nu)
    }
}

pub(crate) fn j_series(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    let lead = (nu * (0.5 * x).ln() - ln_gamma(nu + 1.0)).exp();
    series_sum(nu, x, lead)
}

/// `lead * Σ_k (-1)^k (x/2)^{2k} Γ(ν+1) / (k! Γ(k+ν+1))`.
fn series_sum(nu: f64, x: f64, lead: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = lead;
    let mut sum = lead;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= -q / (k * (k + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && k > 0.5 * x || k > 400.0 {
            break;
        }
    }
    sum
}

pub(crate) fn j_asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term: f64 = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = term * (mu - odd * odd) / (kf * 8.0 * x);
        if next.abs() > prev && next.abs() > term.abs() {
            break;
        }
        prev = term.abs();
        term = next;
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

pub(crate) fn j_miller(nu: f64, x: f64) -> f64 {
    let n0 = nu.floor();
    let mu = nu - n0;
    let n0 = n0 as usize;
    let start = (n0.max(x as usize) + 30 + (10.0 * x.powf(1.0 / 3.0)) as usize) | 1;
    // Backward recurrence J_{μ+k-1} = 2(μ+k)/x J_{μ+k} - J_{μ+k+1}.
    let mut upper = 0.0;
    let mut cur = 1e-300;
    let mut target = 0.0;
    let mut norm = 0.0;
    // Neumann coefficient c_{2m} = (μ+2m) Γ(μ+m) / m!; for μ = 0 it is 1, 2, 2, ...
    let coef = |m: usize| -> f64 {
        if mu == 0.0 {
            if m == 0 {
                1.0
            } else {
                2.0
            }
        } else {
            let mf = m as f64;
            (mu + 2.0 * mf) * (ln_gamma(mu + mf) - ln_gamma(mf + 1.0)).exp()
        }
    };
    let mut k = start;
    loop {
        if k == n0 {
            target = cur;
        }
        if k % 2 == 0 {
            norm += coef(k / 2) * cur;
        }
        if k == 0 {
            break;
        }
        let lower = 2.0 * (mu + k as f64) / x * cur - upper;
        upper = cur;
        cur = lower;
        k -= 1;
        if cur.abs() > 1e250 {
            upper *= 1e-250;
            cur *= 1e-250;
            target *= 1e-250;
            norm *= 1e-250;
        }
    }
    target * (0.5 * x).powf(mu) / norm
}

/// First `n` positive zeros of `J_ν`, strictly increasing.
///
/// McMahon's expansion seeds a bracket when `m > ν` (where it is accurate to
/// well under a bracket half-width); otherwise a forward sign-change scan
/// starting from the previous zero is used. Each bracket is bisected to 1e-12.
pub fn bessel_zeros(nu: BesselOrder, n: usize) -> Result<Vec<f64>> {
    let nu = nu.0;
    let mut zeros: Vec<f64> = Vec::with_capacity(n);
    let f = |x: f64| j_unchecked(nu, x);
    for m in 1..=n {
        let prev = zeros.last().copied().unwrap_or(0.0);
        let mut bracket = None;
        if (m as f64) > nu + 1.0 {
            let g = mcmahon(nu, m);
            let (a, b) = ((g - 0.4).max(prev + 1e-9), g + 0.4);
            if f(a) * f(b) < 0.0 {
                bracket = Some((a, b));
            }
        }
        let (mut a, mut b) = match bracket {
            Some(br) => br,
            None => {
                let mut a = if m == 1 { nu.max(1e-3) } else { prev + 1e-6 };
                let mut fa = f(a);
                loop {
                    let b = a + 0.25;
                    let fb = f(b);
                    if fa * fb <= 0.0 && fb != 0.0 || fa == 0.0 && a > prev {
                        break (a, b);
                    }
                    a = b;
                    fa = fb;
                }
            }
        };
        let mut fa = f(a);
        while b - a > 1e-12 {
            let c = 0.5 * (a + b);
            let fc = f(c);
            if fc == 0.0 {
                a = c;
                b = c;
                break;
            }
            if fa * fc < 0.0 {
                b = c;
            } else {
                a = c;
                fa = fc;
            }
        }
        zeros.push(0.5 * (a + b));
    }
    Ok(zeros)
}

fn mcmahon(nu: f64, m: usize) -> f64 {
    let mu = 4.0 * nu * nu;
    let beta = (m as f64 + 0.5 * nu - 0.25) * PI;
    let e = 8.0 * beta;
    beta - (mu - 1.0) / e
        - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * e.powi(3))
        - 32.0 * (mu - 1.0) * (83.0 * mu * mu - 982.0 * mu + 3779.0) / (15.0 * e.powi(5))
}

/// `sin(tk)/k`, continuous at `k = 0` with value `t`.
pub fn wave_multiplier(t: f64, k: f64) -> f64 {
    let x = t * k;
    if x.abs() < SINC_SEAM {
        let x2 = x * x;
        t * (1.0 - x2 / 6.0 * (1.0 - x2 / 20.0))
    } else {
        x.sin() / k
    }
}

/// Surface measure of the unit sphere `S^{N-1}`; `ω_0 = 2` counts both
/// half-lines of the even sector.
pub fn sphere_measure(n: u32) -> f64 {
    let half = 0.5 * n as f64;
    2.0 * PI.powf(half) / gamma(half)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(nu: f64) -> BesselOrder {
        BesselOrder::new(nu).unwrap()
    }

    #[test]
    fn j0_at_origin_is_one() {
        assert_eq!(bessel_j(order(0.0), 0.0).unwrap(), 1.0);
    }

    #[test]
    fn half_order_matches_sine_closed_form() {
        let nu = order(0.5);
        assert!(bessel_j(nu, PI).unwrap().abs() < 1e-12);
        for &x in &[0.1, 1.0, 3.3, 11.9, 12.1, 40.0, 333.3, 999.0] {
            let exact = (2.0 / (PI * x)).sqrt() * x.sin();
            let got = bessel_j(nu, x).unwrap();
            assert!((got - exact).abs() <= 1e-11 * (2.0 / (PI * x)).sqrt(), "x={x}");
        }
    }

    #[test]
    fn first_root_of_j0() {
        let v = bessel_j(order(0.0), 2.404825557695773).unwrap();
        assert!(v.abs() < 1e-10, "{v}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(bessel_j(order(1.0), -1.0).is_err());
        assert!(bessel_j(order(1.0), f64::NAN).is_err());
        assert!(BesselOrder::new(-0.1).is_err());
        assert!(BesselOrder::new(50.5).is_err());
        assert!(BesselOrder::new(f64::INFINITY).is_err());
    }

    #[test]
    fn series_and_asymptotic_agree_across_seam() {
        for &nu in &[0.0, 0.5, 1.0, 1.7] {
            let mut x = 11.0;
            while x <= 14.0 {
                let s = j_series(nu, x);
                let a = j_asymptotic(nu, x);
                let env = (2.0 / (PI * x)).sqrt();
                assert!((s - a).abs() < 1e-9 * env, "nu={nu} x={x} s={s} a={a}");
                x += 0.05;
            }
        }
    }

    #[test]
    fn miller_matches_series_and_asymptotic() {
        for &nu in &[0.0, 0.3, 1.0, 2.5, 4.0, 7.25] {
            for &x in &[0.5, 3.0, 9.0, 11.5] {
                let s = j_series(nu, x);
                let m = j_miller(nu, x);
                assert!((s - m).abs() < 1e-12 * (1.0 + s.abs()), "nu={nu} x={x} {s} {m}");
            }
        }
        // Continuity at x = 2ν² for a large order.
        let nu = 5.0;
        let x = 2.0 * nu * nu;
        let m = j_miller(nu, x);
        let a = j_asymptotic(nu, x);
        assert!((m - a).abs() < 1e-11, "{m} {a}");
    }

    #[test]
    fn integer_order_reference_values() {
        // Reference values from scipy.special.jv.
        let cases = [
            (0.0, 1.0, 0.765_197_686_557_966_6),
            (1.0, 1.0, 0.440_050_585_744_933_5),
            (0.0, 10.0, -0.245_935_764_451_348_3),
            (1.0, 10.0, 0.043_472_746_168_861_6),
            (2.0, 20.0, -0.160_341_351_922_998_23),
            (5.0, 30.0, -0.143_240_295_512_077_06),
        ];
        for (nu, x, want) in cases {
            let got = bessel_j(order(nu), x).unwrap();
            assert!((got - want).abs() < 1e-13, "J_{nu}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn scaled_value_is_smooth_at_origin() {
        for &nu in &[0.0, 0.5, 1.118, 3.0] {
            let at0 = j_scaled_unchecked(nu, 0.0);
            let want = 0.5f64.powf(nu) / gamma(nu + 1.0);
            assert!((at0 - want).abs() < 1e-15);
            let x = 2.0;
            assert!((j_scaled_unchecked(nu, x) * x.powf(nu) - j_unchecked(nu, x)).abs() < 1e-15);
        }
    }

    #[test]
    fn zeros_of_half_order_are_multiples_of_pi() {
        let z = bessel_zeros(order(0.5), 3).unwrap();
        for (i, zi) in z.iter().enumerate() {
            assert!((zi - (i + 1) as f64 * PI).abs() < 1e-10);
        }
        assert!(bessel_zeros(order(0.0), 0).unwrap().is_empty());
        let z0 = bessel_zeros(order(0.0), 1).unwrap();
        assert!((z0[0] - 2.404825557695773).abs() < 1e-10);
    }

    #[test]
    fn zeros_are_roots_and_interlace() {
        for &nu in &[0.0, 0.25, 0.5, 1.0, 1.118, 1.7, 2.5, 3.0] {
            let a = bessel_zeros(order(nu), 60).unwrap();
            let b = bessel_zeros(order(nu + 1.0), 60).unwrap();
            for w in a.windows(2) {
                assert!(w[0] < w[1]);
            }
            for z in &a {
                assert!(j_unchecked(nu, *z).abs() < 1e-10, "nu={nu} z={z}");
            }
            for i in 0..59 {
                assert!(a[i] < b[i] && b[i] < a[i + 1], "nu={nu} i={i}");
            }
        }
    }

    #[test]
    fn large_order_first_zero() {
        // j_{10,1} = 14.475500686554541
        let z = bessel_zeros(order(10.0), 1).unwrap();
        assert!((z[0] - 14.475_500_686_554_54).abs() < 1e-9, "{}", z[0]);
    }

    #[test]
    fn wave_multiplier_values() {
        assert_eq!(wave_multiplier(5.0, 0.0), 5.0);
        assert!(wave_multiplier(1.0, PI).abs() < 1e-15);
        let v = wave_multiplier(2.0, 0.5);
        assert!((v - 1.0f64.sin() / 0.5).abs() < 1e-15);
        assert!((v - 1.682_941_969_615_793).abs() < 1e-12);
    }

    #[test]
    fn wave_multiplier_seam_is_continuous() {
        let t = 1.0;
        let lo = wave_multiplier(t, SINC_SEAM - 1e-8);
        let hi = wave_multiplier(t, SINC_SEAM + 1e-8);
        assert!((lo - hi).abs() < 1e-12);
        // Evenness in tk.
        assert_eq!(wave_multiplier(t, -3e-5), wave_multiplier(t, 3e-5));
        assert!((wave_multiplier(t, -0.3) - wave_multiplier(t, 0.3)).abs() < 1e-16);
    }

    #[test]
    fn sphere_measures() {
        assert!((sphere_measure(1) - 2.0).abs() < 1e-14);
        assert!((sphere_measure(2) - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_measure(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_measure(4) - 2.0 * PI * PI).abs() < 1e-12);
    }
}
