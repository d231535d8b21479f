//! Model operators `S = -Δ + λ/|x|²` and their analytic classification.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::special::{sphere_measure, BesselOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// `-d²/dx²` on the line, even sector.
    FreeLine1D,
    /// `-Δ` on `R^N`, radial sector.
    FreeRadial,
    /// Friedrichs extension of `-Δ + λ/|x|²` on `R^N \ {0}`, radial sector.
    HardyRadial,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelOperator {
    kind: ModelKind,
    dim: u32,
    lambda: f64,
    nu: BesselOrder,
    lambda_star: f64,
}

impl ModelOperator {
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Hankel order `ν = sqrt(((N-2)/2)² + λ)`; zero on the line.
    pub fn nu(&self) -> BesselOrder {
        self.nu
    }

    /// Critical coupling `λ* = -((N-2)/2)²`.
    pub fn lambda_star(&self) -> f64 {
        self.lambda_star
    }

    /// Exponent of the reduction `h = r^{(N-2)/2} g`.
    pub fn reduction_exponent(&self) -> f64 {
        match self.kind {
            ModelKind::FreeLine1D => 0.0,
            _ => 0.5 * (self.dim as f64 - 2.0),
        }
    }

    /// `ω_{N-1}`, with `ω_0 = 2` for the even sector of the line.
    pub fn sphere_measure(&self) -> f64 {
        sphere_measure(self.dim)
    }

    pub fn is_radial(&self) -> bool {
        self.kind != ModelKind::FreeLine1D
    }

    /// True when `λ = λ*` up to rounding.
    pub fn is_critical_coupling(&self) -> bool {
        self.kind == ModelKind::HardyRadial && (self.lambda - self.lambda_star).abs() <= 1e-12
    }
}

impl fmt::Display for ModelOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ModelKind::FreeLine1D => write!(f, "free1d"),
            ModelKind::FreeRadial => write!(f, "free:{}", self.dim),
            ModelKind::HardyRadial => write!(f, "hardy:{}:{}", self.dim, self.lambda),
        }
    }
}

impl FromStr for ModelOperator {
    type Err = Error;

    /// Grammar: `free1d`, `free:N`, `hardy:N:lambda`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let dim = |p: &str| -> Result<u32> {
            p.parse::<u32>().map_err(|_| Error::Parse(format!("bad dimension '{p}' in '{s}'")))
        };
        match parts.as_slice() {
            ["free1d"] => make_operator(ModelKind::FreeLine1D, 1, 0.0),
            ["free", n] => make_operator(ModelKind::FreeRadial, dim(n)?, 0.0),
            ["hardy", n, lam] => {
                let lambda = lam
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad coupling '{lam}' in '{s}'")))?;
                make_operator(ModelKind::HardyRadial, dim(n)?, lambda)
            }
            _ => Err(Error::Parse(format!(
                "unknown operator '{s}' (expected free1d, free:N or hardy:N:lambda)"
            ))),
        }
    }
}

pub fn make_operator(kind: ModelKind, dim: u32, lambda: f64) -> Result<ModelOperator> {
    if !lambda.is_finite() {
        return Err(Error::InvalidInput(format!("coupling must be finite, got {lambda}")));
    }
    match kind {
        ModelKind::FreeLine1D => {
            if dim != 1 {
                return Err(Error::InvalidInput(format!("free1d requires N = 1, got N = {dim}")));
            }
            if lambda != 0.0 {
                return Err(Error::InvalidInput("free kinds carry no coupling".into()));
            }
            Ok(ModelOperator { kind, dim, lambda, nu: BesselOrder::new(0.0)?, lambda_star: 0.0 })
        }
        ModelKind::FreeRadial | ModelKind::HardyRadial => {
            if dim < 2 {
                return Err(Error::InvalidInput(format!("radial kinds require N >= 2, got N = {dim}")));
            }
            if kind == ModelKind::FreeRadial && lambda != 0.0 {
                return Err(Error::InvalidInput("free kinds carry no coupling".into()));
            }
            let half = 0.5 * (dim as f64 - 2.0);
            let lambda_star = -half * half;
            if lambda < lambda_star - 1e-12 {
                return Err(Error::Supercritical { lambda, lambda_star });
            }
            let nu = (half * half + lambda).max(0.0).sqrt();
            Ok(ModelOperator { kind, dim, lambda, nu: BesselOrder::new(nu)?, lambda_star })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criticality {
    Subcritical,
    Critical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub verdict: Criticality,
    /// `sup I_S`, stated for the implemented sector (radial or even).
    pub analytic_sup_alpha: f64,
    pub endpoint_included: bool,
}

/// Analytic endpoint of `I_S`: `1/4` on the line, `N/4` for `-Δ` on `R^N`
/// and `(ν+1)/2` for the radial Hardy family.
pub fn classify(op: &ModelOperator) -> Classification {
    let sup = match op.kind {
        ModelKind::FreeLine1D => 0.25,
        ModelKind::FreeRadial => op.dim as f64 / 4.0,
        ModelKind::HardyRadial => 0.5 * (op.nu.value() + 1.0),
    };
    // Subcritical iff 1/2 lies in the open interval (0, sup).
    let verdict = if sup > 0.5 + 1e-12 { Criticality::Subcritical } else { Criticality::Critical };
    Classification { verdict, analytic_sup_alpha: sup, endpoint_included: false }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hardy_orders() {
        let op = make_operator(ModelKind::HardyRadial, 3, 0.0).unwrap();
        assert!((op.nu().value() - 0.5).abs() < 1e-15);
        let free = make_operator(ModelKind::FreeRadial, 3, 0.0).unwrap();
        assert_eq!(op.nu(), free.nu());

        let op = make_operator(ModelKind::HardyRadial, 2, 0.0).unwrap();
        assert_eq!(op.nu().value(), 0.0);
        assert_eq!(op.lambda_star(), 0.0);

        let op = make_operator(ModelKind::HardyRadial, 3, -0.25).unwrap();
        assert_eq!(op.nu().value(), 0.0);
        assert!(op.is_critical_coupling());
    }

    #[test]
    fn rejects_invalid() {
        assert!(matches!(
            make_operator(ModelKind::HardyRadial, 3, -0.3),
            Err(Error::Supercritical { .. })
        ));
        assert!(make_operator(ModelKind::FreeLine1D, 2, 0.0).is_err());
        assert!(make_operator(ModelKind::FreeRadial, 1, 0.0).is_err());
        assert!(make_operator(ModelKind::HardyRadial, 3, f64::NAN).is_err());
    }

    #[test]
    fn classification_examples() {
        let c = classify(&"free:3".parse().unwrap());
        assert_eq!(c.verdict, Criticality::Subcritical);
        assert_eq!(c.analytic_sup_alpha, 0.75);
        let c = classify(&"free1d".parse().unwrap());
        assert_eq!(c.verdict, Criticality::Critical);
        assert_eq!(c.analytic_sup_alpha, 0.25);
        let c = classify(&"hardy:3:-0.25".parse().unwrap());
        assert_eq!(c.verdict, Criticality::Critical);
        assert_eq!(c.analytic_sup_alpha, 0.5);
        assert!(!c.endpoint_included);
    }

    #[test]
    fn free_and_hardy_zero_coupling_agree() {
        for n in 2..=5 {
            let a = classify(&make_operator(ModelKind::FreeRadial, n, 0.0).unwrap());
            let b = classify(&make_operator(ModelKind::HardyRadial, n, 0.0).unwrap());
            assert!((a.analytic_sup_alpha - b.analytic_sup_alpha).abs() < 1e-14);
        }
    }

    #[test]
    fn critical_coupling_is_critical() {
        for n in 2..=5u32 {
            let ls = -((n as f64 - 2.0) / 2.0).powi(2);
            let op = make_operator(ModelKind::HardyRadial, n, ls).unwrap();
            assert_eq!(classify(&op).verdict, Criticality::Critical);
        }
    }

    #[test]
    fn sup_increases_with_coupling() {
        let mut last = f64::NEG_INFINITY;
        for i in 0..20 {
            let lam = -0.25 + 0.2 * i as f64;
            let s = classify(&make_operator(ModelKind::HardyRadial, 3, lam).unwrap()).analytic_sup_alpha;
            assert!(s > last);
            last = s;
        }
    }

    #[test]
    fn spec_strings_round_trip() {
        for s in ["free1d", "free:4", "hardy:3:-0.25", "hardy:2:0", "hardy:5:1.5"] {
            let op: ModelOperator = s.parse().unwrap();
            let again: ModelOperator = op.to_string().parse().unwrap();
            assert_eq!(op, again);
        }
        assert!("free".parse::<ModelOperator>().is_err());
        assert!("hardy:3".parse::<ModelOperator>().is_err());
        assert!("free:x".parse::<ModelOperator>().is_err());
    }
}
