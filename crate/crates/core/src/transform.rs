//! Diagonalizing transforms on matched physical/spectral grids.
//!
//! Radial kinds work with the reduced profile `h(r) = r^{(N-2)/2} g(r)`, on
//! which every model operator acts as the order-ν Bessel operator with
//! measure `r dr`. The quasi-discrete Hankel transform places nodes at Bessel
//! zeros, `r_i = j_{ν,i}/K` and `k_i = j_{ν,i}/R` with `K R = j_{ν,M+1}`:
//!
//! ```text
//! ĝ(k_i) = Σ_j w_j h(r_j) J_ν(k_i r_j) r_j,   w_j = 2 / (K² r_j J_{ν+1}(j_{ν,j})²)
//! h(r_j) = Σ_i v_i ĝ(k_i) J_ν(k_i r_j) k_i,   v_i = 2 / (R² k_i J_{ν+1}(j_{ν,i})²)
//! ```
//!
//! The even sector of the line uses midpoint grids `r_j = (j+½) R/M`,
//! `k_i = (i+½) π/R` and the unitary half-line cosine transform, which is
//! exactly orthogonal on these grids (a scaled DCT-IV).

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use crate::density::ContinuumBasis;
use crate::error::{Error, Result};
use crate::operator::{ModelKind, ModelOperator};
use crate::special::{bessel_zeros, j_unchecked};

/// Smallest supported number of grid points.
pub const MIN_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    Hankel,
    Cosine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalGrid {
    pub radii: Vec<f64>,
    /// Transform weights `w_j` (see module docs).
    pub weights: Vec<f64>,
    pub cutoff: f64,
    pub dim: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGrid {
    pub freqs: Vec<f64>,
    pub weights: Vec<f64>,
    pub band_limit: f64,
}

/// Operator, matched grids and the shared `M×M` transform kernel.
#[derive(Debug)]
pub struct Discretization {
    op: ModelOperator,
    kind: TransformKind,
    physical: PhysicalGrid,
    spectral: SpectralGrid,
    /// `μ_j`: `∫ |h|² ρ dr ≈ Σ μ_j |h_j|²` (ρ = r or 1).
    phys_measure: Vec<f64>,
    /// `μ̂_i`: `∫ |ĝ|² κ dk ≈ Σ μ̂_i |ĝ_i|²` (κ = k or 1).
    spec_measure: Vec<f64>,
    /// Row-major `kernel[i*M + j] = J_ν(k_i r_j)` or `cos(k_i r_j)`.
    kernel: Vec<f64>,
    continuum: OnceLock<ContinuumBasis>,
}

/// Normalization of the unitary half-line cosine transform.
pub(crate) const COSINE_NORM: f64 = 0.797_884_560_802_865_4; // sqrt(2/π)

pub fn build_grids(op: &ModelOperator, m: usize, r: f64) -> Result<(PhysicalGrid, SpectralGrid)> {
    if m < MIN_POINTS {
        return Err(Error::InvalidInput(format!("M = {m} below minimum {MIN_POINTS}")));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidInput(format!("domain cutoff R must be positive, got {r}")));
    }
    match op.kind() {
        ModelKind::FreeLine1D => {
            let dr = r / m as f64;
            let dk = PI / r;
            let radii = (0..m).map(|j| (j as f64 + 0.5) * dr).collect();
            let freqs = (0..m).map(|i| (i as f64 + 0.5) * dk).collect();
            Ok((
                PhysicalGrid { radii, weights: vec![dr; m], cutoff: r, dim: 1 },
                SpectralGrid { freqs, weights: vec![dk; m], band_limit: PI * m as f64 / r },
            ))
        }
        _ => {
            let nu = op.nu().value();
            let zeros = bessel_zeros(op.nu(), m + 1)?;
            let s = zeros[m];
            let band = s / r;
            let radii: Vec<f64> = zeros[..m].iter().map(|z| z / band).collect();
            let freqs: Vec<f64> = zeros[..m].iter().map(|z| z / r).collect();
            let jp: Vec<f64> = zeros[..m].iter().map(|&z| j_unchecked(nu + 1.0, z)).collect();
            let weights = radii.iter().zip(&jp).map(|(ri, j)| 2.0 / (band * band * ri * j * j)).collect();
            let sweights = freqs.iter().zip(&jp).map(|(ki, j)| 2.0 / (r * r * ki * j * j)).collect();
            Ok((
                PhysicalGrid { radii, weights, cutoff: r, dim: op.dim() },
                SpectralGrid { freqs, weights: sweights, band_limit: band },
            ))
        }
    }
}

impl Discretization {
    pub fn new(op: ModelOperator, m: usize, r: f64) -> Result<Arc<Self>> {
        let (physical, spectral) = build_grids(&op, m, r)?;
        let kind = if op.is_radial() { TransformKind::Hankel } else { TransformKind::Cosine };
        let (phys_measure, spec_measure) = match kind {
            TransformKind::Hankel => (
                physical.weights.iter().zip(&physical.radii).map(|(w, r)| w * r).collect(),
                spectral.weights.iter().zip(&spectral.freqs).map(|(v, k)| v * k).collect(),
            ),
            TransformKind::Cosine => (physical.weights.clone(), spectral.weights.clone()),
        };
        let nu = op.nu().value();
        let kernel: Vec<f64> = spectral
            .freqs
            .par_iter()
            .flat_map_iter(|&k| {
                let radii = &physical.radii;
                radii.iter().map(move |&rj| match kind {
                    TransformKind::Hankel => j_unchecked(nu, k * rj),
                    TransformKind::Cosine => (k * rj).cos(),
                })
            })
            .collect();
        Ok(Arc::new(Discretization {
            op,
            kind,
            physical,
            spectral,
            phys_measure,
            spec_measure,
            kernel,
            continuum: OnceLock::new(),
        }))
    }

    pub fn op(&self) -> &ModelOperator {
        &self.op
    }

    pub fn transform_kind(&self) -> TransformKind {
        self.kind
    }

    pub fn physical(&self) -> &PhysicalGrid {
        &self.physical
    }

    pub fn spectral(&self) -> &SpectralGrid {
        &self.spectral
    }

    pub fn len(&self) -> usize {
        self.physical.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cutoff(&self) -> f64 {
        self.physical.cutoff
    }

    pub fn band_limit(&self) -> f64 {
        self.spectral.band_limit
    }

    pub fn freqs(&self) -> &[f64] {
        &self.spectral.freqs
    }

    pub fn radii(&self) -> &[f64] {
        &self.physical.radii
    }

    pub(crate) fn phys_measure(&self) -> &[f64] {
        &self.phys_measure
    }

    pub(crate) fn spec_measure(&self) -> &[f64] {
        &self.spec_measure
    }

    /// Factor in front of the transform sums: 1 (Hankel) or `sqrt(2/π)`.
    pub(crate) fn norm_constant(&self) -> f64 {
        match self.kind {
            TransformKind::Hankel => 1.0,
            TransformKind::Cosine => COSINE_NORM,
        }
    }

    /// Power of `k` in the spectral measure: 1 for `k dk`, 0 for `dk`.
    pub(crate) fn measure_power(&self) -> f64 {
        match self.kind {
            TransformKind::Hankel => 1.0,
            TransformKind::Cosine => 0.0,
        }
    }

    /// Continuum quadrature basis, built once per discretization.
    pub fn continuum(&self) -> &ContinuumBasis {
        self.continuum.get_or_init(|| ContinuumBasis::build(self))
    }

    /// Zero function on this grid.
    pub fn zeros(self: &Arc<Self>) -> SampledFunction {
        SampledFunction { disc: Arc::clone(self), reduced: vec![0.0; self.len()], scale: None }
    }

    /// Sample a physical radial profile `g(r)`.
    pub fn sample<F: Fn(f64) -> f64>(self: &Arc<Self>, g: F) -> SampledFunction {
        let a = self.op.reduction_exponent();
        let reduced = self.physical.radii.iter().map(|&r| r.powf(a) * g(r)).collect();
        SampledFunction { disc: Arc::clone(self), reduced, scale: None }
    }

    fn same_as(&self, other: &Discretization) -> bool {
        std::ptr::eq(self, other)
            || (self.op == other.op
                && self.physical.radii == other.physical.radii
                && self.physical.cutoff == other.physical.cutoff)
    }
}

/// Radial profile sampled on a physical grid, stored in reduced form.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    disc: Arc<Discretization>,
    reduced: Vec<f64>,
    scale: Option<f64>,
}

impl SampledFunction {
    pub fn from_reduced(disc: &Arc<Discretization>, reduced: Vec<f64>) -> Result<Self> {
        if reduced.len() != disc.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} points",
                reduced.len(),
                disc.len()
            )));
        }
        Ok(SampledFunction { disc: Arc::clone(disc), reduced, scale: None })
    }

    pub fn discretization(&self) -> &Arc<Discretization> {
        &self.disc
    }

    /// Reduced samples `h(r_j)`.
    pub fn reduced(&self) -> &[f64] {
        &self.reduced
    }

    /// Physical samples `g(r_j)`.
    pub fn values(&self) -> Vec<f64> {
        let a = self.disc.op.reduction_exponent();
        self.disc.physical.radii.iter().zip(&self.reduced).map(|(r, h)| h / r.powf(a)).collect()
    }

    /// Characteristic length of the data, used by the resolution guard.
    pub fn scale(&self) -> Option<f64> {
        self.scale
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = Some(scale);
        self
    }

    /// `‖g‖²_{L²}` by physical quadrature.
    pub fn norm_sq(&self) -> f64 {
        self.disc.op.sphere_measure()
            * self.reduced.iter().zip(&self.disc.phys_measure).map(|(h, m)| m * h * h).sum::<f64>()
    }

    /// `max |g|` over the outermost tenth of the grid relative to `max |g|`.
    pub fn decay_at_cutoff(&self) -> f64 {
        let vals = self.values();
        let peak = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if peak == 0.0 {
            return 0.0;
        }
        let start = vals.len() - vals.len() / 10;
        vals[start..].iter().fold(0.0f64, |m, v| m.max(v.abs())) / peak
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.reduced.iter_mut().for_each(|h| *h *= a);
        out
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &SampledFunction, b: f64) -> Result<Self> {
        ensure_same(&self.disc, &other.disc)?;
        let reduced = self.reduced.iter().zip(&other.reduced).map(|(x, y)| a * x + b * y).collect();
        Ok(SampledFunction { disc: Arc::clone(&self.disc), reduced, scale: self.scale.or(other.scale) })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,value\n");
        for (r, v) in self.disc.physical.radii.iter().zip(self.values()) {
            let _ = writeln!(s, "{r:.16e},{v:.16e}");
        }
        s
    }

    pub fn from_csv(disc: &Arc<Discretization>, text: &str) -> Result<Self> {
        let rows = parse_csv(text, "r")?;
        if rows.len() != disc.len() {
            return Err(Error::GridMismatch(format!("{} rows for {} grid points", rows.len(), disc.len())));
        }
        let a = disc.op.reduction_exponent();
        let mut reduced = Vec::with_capacity(rows.len());
        for ((x, v), &r) in rows.iter().zip(&disc.physical.radii) {
            if (x - r).abs() > 1e-12 * r.max(1.0) {
                return Err(Error::GridMismatch(format!("radius {x} does not match grid node {r}")));
            }
            reduced.push(r.powf(a) * v);
        }
        Ok(SampledFunction { disc: Arc::clone(disc), reduced, scale: None })
    }
}

/// Spectral samples `ĝ(k_i)` on a spectral grid.
#[derive(Debug, Clone)]
pub struct SpectralFunction {
    disc: Arc<Discretization>,
    values: Vec<f64>,
}

impl SpectralFunction {
    pub fn from_values(disc: &Arc<Discretization>, values: Vec<f64>) -> Result<Self> {
        if values.len() != disc.len() {
            return Err(Error::GridMismatch(format!("{} values for {} modes", values.len(), disc.len())));
        }
        Ok(SpectralFunction { disc: Arc::clone(disc), values })
    }

    pub fn discretization(&self) -> &Arc<Discretization> {
        &self.disc
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `ω Σ μ̂_i |ĝ_i|²`.
    pub fn norm_sq(&self) -> f64 {
        self.disc.op.sphere_measure()
            * self.values.iter().zip(&self.disc.spec_measure).map(|(g, m)| m * g * g).sum::<f64>()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,value\n");
        for (k, v) in self.disc.spectral.freqs.iter().zip(&self.values) {
            let _ = writeln!(s, "{k:.16e},{v:.16e}");
        }
        s
    }

    pub fn from_csv(disc: &Arc<Discretization>, text: &str) -> Result<Self> {
        let rows = parse_csv(text, "k")?;
        if rows.len() != disc.len() {
            return Err(Error::GridMismatch(format!("{} rows for {} modes", rows.len(), disc.len())));
        }
        for ((x, _), &k) in rows.iter().zip(&disc.spectral.freqs) {
            if (x - k).abs() > 1e-12 * k.max(1.0) {
                return Err(Error::GridMismatch(format!("frequency {x} does not match grid node {k}")));
            }
        }
        Ok(SpectralFunction { disc: Arc::clone(disc), values: rows.into_iter().map(|(_, v)| v).collect() })
    }
}

fn parse_csv(text: &str, first: &str) -> Result<Vec<(f64, f64)>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
    if header.trim() != format!("{first},value") {
        return Err(Error::Parse(format!("expected header '{first},value', got '{header}'")));
    }
    lines
        .enumerate()
        .map(|(i, l)| {
            let mut it = l.split(',');
            let mut num = || -> Result<f64> {
                it.next()
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::Parse(format!("bad CSV row {}: '{l}'", i + 2)))
            };
            Ok((num()?, num()?))
        })
        .collect()
}

fn ensure_same(a: &Discretization, b: &Discretization) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!("operators {} and {} on different grids", a.op, b.op)))
    }
}

pub fn forward(f: &SampledFunction) -> SpectralFunction {
    let d = &f.disc;
    let m = d.len();
    let c = d.norm_constant();
    let weighted: Vec<f64> = f.reduced.iter().zip(&d.phys_measure).map(|(h, w)| h * w).collect();
    let values = (0..m)
        .map(|i| c * d.kernel[i * m..(i + 1) * m].iter().zip(&weighted).map(|(k, x)| k * x).sum::<f64>())
        .collect();
    SpectralFunction { disc: Arc::clone(d), values }
}

pub fn inverse(spec: &SpectralFunction) -> SampledFunction {
    let d = &spec.disc;
    let m = d.len();
    let c = d.norm_constant();
    let weighted: Vec<f64> = spec.values.iter().zip(&d.spec_measure).map(|(g, w)| g * w).collect();
    let mut reduced = vec![0.0; m];
    for (i, wi) in weighted.iter().enumerate() {
        let row = &d.kernel[i * m..(i + 1) * m];
        for (hj, kij) in reduced.iter_mut().zip(row) {
            *hj += wi * kij;
        }
    }
    reduced.iter_mut().for_each(|h| *h *= c);
    SampledFunction { disc: Arc::clone(d), reduced, scale: None }
}

/// Pointwise `m(k_i) ĝ(k_i)`.
pub fn apply_multiplier<M: Fn(f64) -> f64>(spec: &SpectralFunction, m: M) -> Result<SpectralFunction> {
    let values = spec
        .disc
        .spectral
        .freqs
        .iter()
        .zip(&spec.values)
        .map(|(&k, &g)| {
            let mk = m(k);
            if mk.is_finite() {
                Ok(mk * g)
            } else {
                Err(Error::NonFiniteMultiplier(k))
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(SpectralFunction { disc: Arc::clone(&spec.disc), values })
}

/// Checks that `f` lives on `disc`.
pub(crate) fn check_grid(f: &SampledFunction, op: &ModelOperator) -> Result<()> {
    if f.disc.op != *op {
        return Err(Error::GridMismatch(format!("function sampled for {} used with {}", f.disc.op, op)));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc(spec: &str, m: usize, r: f64) -> Arc<Discretization> {
        Discretization::new(spec.parse().unwrap(), m, r).unwrap()
    }

    #[test]
    fn grid_examples() {
        let (_, s) = build_grids(&"free:3".parse().unwrap(), 256, 40.0).unwrap();
        assert!((s.freqs[0] - PI / 40.0).abs() < 1e-12);
        let (p, s) = build_grids(&"free1d".parse().unwrap(), 128, 20.0).unwrap();
        assert!((s.band_limit - 128.0 * PI / 20.0).abs() < 1e-12);
        assert!(p.radii.iter().all(|&r| r > 0.0 && r < 20.0));
        let (p, s) = build_grids(&"hardy:3:-0.25".parse().unwrap(), 256, 40.0).unwrap();
        assert!((s.freqs[0] - 0.060_120_6).abs() < 1e-7);
        assert!(p.weights.iter().all(|&w| w > 0.0));
        assert!(p.radii.windows(2).all(|w| w[0] < w[1]) && *p.radii.last().unwrap() < 40.0);
        assert!((s.band_limit * 40.0 - bessel_zeros(crate::special::BesselOrder::new(0.0).unwrap(), 257).unwrap()[256]).abs() < 1e-9);
    }

    #[test]
    fn grid_errors() {
        let op = "free:3".parse().unwrap();
        assert!(build_grids(&op, 15, 40.0).is_err());
        assert!(build_grids(&op, 64, 0.0).is_err());
        assert!(build_grids(&op, 64, -1.0).is_err());
    }

    #[test]
    fn order_zero_gaussian_is_self_reciprocal() {
        let d = disc("free:2", 512, 40.0);
        let g = d.sample(|r| (-0.5 * r * r).exp());
        let spec = forward(&g);
        let half = 0.5 * d.band_limit();
        let mut err = 0.0f64;
        for (&k, &v) in d.freqs().iter().zip(spec.values()) {
            if k <= half {
                err = err.max((v - (-0.5 * k * k).exp()).abs());
            }
        }
        assert!(err < 1e-8, "{err}");
        // And back.
        let back = inverse(&spec);
        for (&r, &h) in d.radii().iter().zip(back.reduced()) {
            assert!((h - (-0.5 * r * r).exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_maps_to_zero() {
        let d = disc("hardy:3:1", 64, 20.0);
        let z = d.zeros();
        assert!(forward(&z).values().iter().all(|&v| v == 0.0));
        let zs = SpectralFunction::from_values(&d, vec![0.0; 64]).unwrap();
        assert!(inverse(&zs).reduced().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cosine_transform_is_exactly_self_inverse() {
        let d = disc("free1d", 128, 20.0);
        let g = d.sample(|x| (-(x - 3.0).powi(2)).exp() * (1.0 + x.sin()));
        let back = inverse(&forward(&g));
        for (a, b) in g.reduced().iter().zip(back.reduced()) {
            assert!((a - b).abs() < 1e-13);
        }
        // Unitary: physical and spectral norms agree to rounding.
        assert!((g.norm_sq() - forward(&g).norm_sq()).abs() < 1e-13 * g.norm_sq());
    }

    #[test]
    fn multiplier_composition() {
        let d = disc("free:3", 128, 30.0);
        let g = forward(&d.sample(|r| (-r * r).exp()));
        let one = apply_multiplier(&g, |_| 1.0).unwrap();
        assert_eq!(one.values(), g.values());
        let twice = apply_multiplier(&apply_multiplier(&g, |k| k * k).unwrap(), |k| k * k).unwrap();
        let once = apply_multiplier(&g, |k| k.powi(4)).unwrap();
        for (a, b) in twice.values().iter().zip(once.values()) {
            assert!((a - b).abs() <= 1e-13 * a.abs().max(1e-300));
        }
        let heat0 = apply_multiplier(&g, |k| (-0.0 * k * k).exp()).unwrap();
        assert_eq!(heat0.values(), g.values());
        assert!(matches!(apply_multiplier(&g, |_| f64::NAN), Err(Error::NonFiniteMultiplier(_))));
    }

    #[test]
    fn csv_round_trip_and_mismatch() {
        let d = disc("free:3", 32, 10.0);
        let g = d.sample(|r| (-r * r).exp());
        let back = SampledFunction::from_csv(&d, &g.to_csv()).unwrap();
        for (a, b) in g.reduced().iter().zip(back.reduced()) {
            assert!((a - b).abs() <= 1e-15 * a.abs().max(1e-300));
        }
        let s = forward(&g);
        let sb = SpectralFunction::from_csv(&d, &s.to_csv()).unwrap();
        assert_eq!(s.values().len(), sb.values().len());
        let other = disc("free:3", 32, 11.0);
        assert!(SampledFunction::from_csv(&other, &g.to_csv()).is_err());
        assert!(SampledFunction::from_csv(&d, "x,value\n1,2\n").is_err());
        let d4 = disc("free:4", 32, 10.0);
        assert!(g.combine(1.0, &d4.zeros(), 1.0).is_err());
    }
}
