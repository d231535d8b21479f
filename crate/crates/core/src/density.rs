//! Continuum spectral density of sampled data.
//!
//! The discrete modes `k_i = j_{ν,i}/R` start at `k_1 > 0` and the truncated
//! domain reflects waves at `r = R`, so long-time quantities are computed from
//! the continuum transform of the sampled profile instead:
//!
//! ```text
//! q(k) = ĝ(k) / k^ν = Σ_j μ_j h_j r_j^ν · J_ν(k r_j)/(k r_j)^ν
//! D(k) = ω k^{2ν+κ} q(k)²,        ‖g‖² = ∫₀^∞ D(k) dk
//! ```
//!
//! with `κ = 1` for `k dk` and `κ = 0` on the line. `q` is even and entire in
//! `k`, which makes the small-`k` power law `D ≈ A k^E` easy to fit and to
//! integrate analytically below the first node.

use rayon::prelude::*;

use crate::error::Result;
use crate::quadrature::{barycentric_weights, barycentric_eval, gauss_legendre};
use crate::special::j_scaled_unchecked;
use crate::transform::{check_grid, Discretization, SampledFunction, TransformKind};

/// Lower end of the quadrature nodes; `[0, K_MIN]` is integrated analytically.
pub const K_MIN: f64 = 1e-7;
const ORDER: usize = 16;
const SUB_ORDER: usize = 8;
const GEOMETRIC_RATIO: f64 = 2.2;
/// Relative positions of the small-`k` fit points, in units of `k_1`.
const FIT_POINTS: [f64; 3] = [1e-2, 2e-2, 4e-2];
/// `|q(k_fit)| / max |q|` below this marks a vanishing moment.
pub const NON_GENERIC_RATIO: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    start: usize,
}

/// Quadrature nodes in `k` and the matrix mapping reduced samples to `q(k)`.
#[derive(Debug)]
pub struct ContinuumBasis {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    panels: Vec<Panel>,
    rows: Vec<f64>,
    fit_k: [f64; 3],
    fit_rows: Vec<f64>,
    ref_nodes: Vec<f64>,
    ref_bary: Vec<f64>,
    sub_nodes: Vec<f64>,
    sub_weights: Vec<f64>,
    m: usize,
    nu: f64,
    kappa: f64,
    omega: f64,
}

impl ContinuumBasis {
    pub(crate) fn build(disc: &Discretization) -> Self {
        let band = disc.band_limit();
        let split = (0.05f64).min(0.25 * band);
        let n_geo = ((split / K_MIN).ln() / GEOMETRIC_RATIO.ln()).ceil() as usize;
        let ratio = (split / K_MIN).powf(1.0 / n_geo as f64);
        let width = 4.0 / disc.cutoff();
        let n_lin = ((band - split) / width).ceil().max(1.0) as usize;
        let lin_w = (band - split) / n_lin as f64;

        let mut edges = Vec::with_capacity(n_geo + n_lin + 1);
        for i in 0..=n_geo {
            edges.push(if i == n_geo { split } else { K_MIN * ratio.powi(i as i32) });
        }
        for i in 1..=n_lin {
            edges.push(if i == n_lin { band } else { split + lin_w * i as f64 });
        }

        let (x, w) = gauss_legendre(ORDER);
        let mut nodes = Vec::with_capacity(ORDER * (edges.len() - 1));
        let mut weights = Vec::with_capacity(nodes.capacity());
        let mut panels = Vec::with_capacity(edges.len() - 1);
        for e in edges.windows(2) {
            let (lo, hi) = (e[0], e[1]);
            panels.push(Panel { lo, hi, start: nodes.len() });
            let h = 0.5 * (hi - lo);
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(lo + h * (xi + 1.0));
                weights.push(h * wi);
            }
        }

        let m = disc.len();
        let nu = disc.op().nu().value();
        let kind = disc.transform_kind();
        let c = disc.norm_constant();
        let radii = disc.radii();
        let coef: Vec<f64> = radii
            .iter()
            .zip(disc.phys_measure())
            .map(|(r, mu)| c * mu * if kind == TransformKind::Hankel { r.powf(nu) } else { 1.0 })
            .collect();
        let row = |k: f64, out: &mut [f64]| {
            for ((o, &r), &a) in out.iter_mut().zip(radii).zip(&coef) {
                *o = a * match kind {
                    TransformKind::Hankel => j_scaled_unchecked(nu, k * r),
                    TransformKind::Cosine => (k * r).cos(),
                };
            }
        };
        let mut rows = vec![0.0; nodes.len() * m];
        rows.par_chunks_mut(m).zip(nodes.par_iter()).for_each(|(out, &k)| row(k, out));
        let k1 = disc.freqs()[0];
        let fit_k = FIT_POINTS.map(|f| f * k1);
        let mut fit_rows = vec![0.0; 3 * m];
        for (out, &k) in fit_rows.chunks_mut(m).zip(&fit_k) {
            row(k, out);
        }

        let (sub_nodes, sub_weights) = gauss_legendre(SUB_ORDER);
        ContinuumBasis {
            nodes,
            weights,
            panels,
            rows,
            fit_k,
            fit_rows,
            ref_bary: barycentric_weights(&x),
            ref_nodes: x,
            sub_nodes,
            sub_weights,
            m,
            nu,
            kappa: disc.measure_power(),
            omega: disc.op().sphere_measure(),
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn apply(&self, rows: &[f64], h: &[f64]) -> Vec<f64> {
        rows.par_chunks(self.m)
            .map(|row| row.iter().zip(h).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }

    fn density_at(&self, k: f64, q: f64) -> f64 {
        self.omega * k.powf(2.0 * self.nu + self.kappa) * q * q
    }
}

/// Small-`k` behavior `D(k) ≈ A k^E`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallK {
    /// Exponent `p` of `|ĝ(k)|² ≈ c k^{2p}`.
    pub p: f64,
    pub exponent: f64,
    pub coeff: f64,
    /// False when `q` nearly vanishes at the fit points (vanishing moment).
    pub generic: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SmallKFit {
    /// The datum is identically zero.
    Zero,
    Fitted(SmallK),
    /// `q` vanishes at the fit points or the fit is not finite.
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct SpectralDensity<'a> {
    basis: &'a ContinuumBasis,
    q: Vec<f64>,
    density: Vec<f64>,
    fit: SmallKFit,
}

impl<'a> SpectralDensity<'a> {
    pub fn of(f: &'a SampledFunction) -> Self {
        let basis = f.discretization().continuum();
        let q = basis.apply(&basis.rows, f.reduced());
        let qf = basis.apply(&basis.fit_rows, f.reduced());
        let density = basis.nodes.iter().zip(&q).map(|(&k, &v)| basis.density_at(k, v)).collect();
        let peak = q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let fit = if peak == 0.0 {
            SmallKFit::Zero
        } else if qf.iter().any(|v| *v == 0.0) {
            SmallKFit::Inconclusive
        } else {
            let (intercept, slope) = even_power_fit(&basis.fit_k, &qf);
            let p = basis.nu + slope;
            let small = SmallK {
                p,
                exponent: 2.0 * p + basis.kappa,
                coeff: basis.omega * (2.0 * intercept).exp(),
                generic: qf[0].abs() >= NON_GENERIC_RATIO * peak,
            };
            if small.exponent.is_finite() && small.coeff.is_finite() {
                SmallKFit::Fitted(small)
            } else {
                SmallKFit::Inconclusive
            }
        };
        SpectralDensity { basis, q, density, fit }
    }

    /// Checks the operator before building the density.
    pub fn for_operator(op: &crate::operator::ModelOperator, f: &'a SampledFunction) -> Result<Self> {
        check_grid(f, op)?;
        Ok(Self::of(f))
    }

    pub fn small_k(&self) -> &SmallKFit {
        &self.fit
    }

    pub fn is_zero(&self) -> bool {
        self.fit == SmallKFit::Zero
    }

    pub fn nodes(&self) -> &[f64] {
        &self.basis.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.density
    }

    /// `ĝ(k)/k^ν` at the quadrature nodes.
    pub fn reduced_spectrum(&self) -> &[f64] {
        &self.q
    }

    /// Head `∫₀^{K_MIN} A k^{E+β} dk`; infinite when the power is not integrable.
    fn head(&self, beta: f64) -> f64 {
        match self.fit {
            SmallKFit::Fitted(s) => {
                let e = s.exponent + beta + 1.0;
                if e <= 0.0 {
                    f64::INFINITY
                } else {
                    s.coeff * K_MIN.powf(e) / e
                }
            }
            _ => 0.0,
        }
    }

    /// `Σ W f(k) D(k)` over the nodes, without the analytic head.
    pub fn sum_with<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.basis
            .nodes
            .iter()
            .zip(&self.basis.weights)
            .zip(&self.density)
            .map(|((&k, &w), &d)| w * f(k) * d)
            .sum()
    }

    /// `∫₀^∞ k^β D(k) dk` including the head; the caller decides convergence.
    pub fn power_integral(&self, beta: f64) -> f64 {
        self.sum_with(|k| k.powf(beta)) + self.head(beta)
    }

    /// `‖g‖²`.
    pub fn norm_sq(&self) -> f64 {
        self.power_integral(0.0)
    }

    /// `‖e^{-tS} g‖²`.
    pub fn heat_norm_sq(&self, t: f64) -> f64 {
        self.sum_with(|k| (-2.0 * t * k * k).exp()) + self.head(0.0)
    }

    /// `‖W(t) g‖² = ∫ sin²(tk)/k² D(k) dk`, resolving the oscillation on
    /// subpanels of width at most `1/t`.
    pub fn wave_norm_sq(&self, t: f64) -> f64 {
        if self.is_zero() || t == 0.0 {
            return 0.0;
        }
        let b = self.basis;
        let masses: Vec<f64> = b
            .panels
            .iter()
            .map(|p| {
                (p.start..p.start + ORDER)
                    .map(|i| b.weights[i] * self.density[i] * (b.nodes[i] * b.nodes[i]).recip().min(t * t))
                    .sum::<f64>()
            })
            .collect();
        let total: f64 = masses.iter().sum();
        let body: f64 = b
            .panels
            .par_iter()
            .zip(masses.par_iter())
            .map(|(p, &mass)| {
                if mass < 1e-17 * total {
                    return 0.0;
                }
                let sub = ((p.hi - p.lo) * t).ceil().max(1.0) as usize;
                let idx = p.start..p.start + ORDER;
                if sub == 1 {
                    return idx
                        .map(|i| {
                            let k = b.nodes[i];
                            let s = (t * k).sin() / k;
                            b.weights[i] * s * s * self.density[i]
                        })
                        .sum();
                }
                let qv = &self.q[p.start..p.start + ORDER];
                let half = 0.5 * (p.hi - p.lo);
                let mid = 0.5 * (p.hi + p.lo);
                let h = (p.hi - p.lo) / sub as f64;
                let mut acc = 0.0;
                for s in 0..sub {
                    let lo = p.lo + h * s as f64;
                    for (x, w) in b.sub_nodes.iter().zip(&b.sub_weights) {
                        let k = lo + 0.5 * h * (x + 1.0);
                        let q = barycentric_eval(&b.ref_nodes, &b.ref_bary, qv, (k - mid) / half);
                        let sn = (t * k).sin() / k;
                        acc += 0.5 * h * w * sn * sn * b.density_at(k, q);
                    }
                }
                acc
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum();
        let head = match self.fit {
            SmallKFit::Fitted(s) => {
                let e = s.exponent;
                s.coeff
                    * (t * t * K_MIN.powf(e + 1.0) / (e + 1.0)
                        - t.powi(4) * K_MIN.powf(e + 3.0) / (3.0 * (e + 3.0)))
            }
            _ => 0.0,
        };
        body + head
    }
}

/// Solves `ln|q| = a + s ln k + b k²` through three points and returns `(a, s)`.
/// The `k²` term absorbs the leading even correction of `q`.
fn even_power_fit(k: &[f64; 3], q: &[f64]) -> (f64, f64) {
    let mut m = [[0.0; 4]; 3];
    for i in 0..3 {
        m[i] = [1.0, k[i].ln(), k[i] * k[i], q[i].abs().ln()];
    }
    for c in 0..3 {
        let piv = (c..3).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs())).unwrap();
        m.swap(c, piv);
        for r in 0..3 {
            if r != c {
                let f = m[r][c] / m[c][c];
                for j in c..4 {
                    m[r][j] -= f * m[c][j];
                }
            }
        }
    }
    (m[0][3] / m[0][0], m[1][3] / m[1][1])
}
