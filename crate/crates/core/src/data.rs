//! Radial data profiles and seeded random band-limited functions.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::operator::ModelKind;
use crate::transform::{Discretization, SampledFunction};
use crate::wave::moment;

/// Profiles accepted by `--data`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DataSpec {
    /// `e^{-r²/(2w²)}`.
    Gaussian { width: f64 },
    /// `exp(-1/(1-s²))`, `s = (r-c)/w`, supported on `[c-w, c+w]`.
    Bump { center: f64, width: f64 },
    /// Smooth plateau equal to 1 on the middle half of `[r0, r1]`.
    Annulus { r0: f64, r1: f64 },
    /// Gaussian shell `e^{-(r-c)²/(2w²)}`.
    Shell { center: f64, width: f64 },
    /// `b(r-r0) - c·b(r-r1)` with bumps of half-width `w` and `c` chosen to
    /// cancel the moment on the grid.
    Dipole { r0: f64, r1: f64, width: f64 },
}

pub fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

/// Smooth step: 0 for `x <= 0`, 1 for `x >= 1`.
fn smooth_step(x: f64) -> f64 {
    let f = |y: f64| if y > 0.0 { (-1.0 / y).exp() } else { 0.0 };
    let a = f(x);
    let b = f(1.0 - x);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

impl DataSpec {
    /// Length scale used by the band-limit guard.
    pub fn scale(&self) -> f64 {
        match *self {
            DataSpec::Gaussian { width } | DataSpec::Shell { width, .. } => width,
            DataSpec::Bump { width, .. } | DataSpec::Dipole { width, .. } => width,
            DataSpec::Annulus { r0, r1 } => 0.25 * (r1 - r0),
        }
    }

    /// Outer edge of the (effective) support.
    fn outer(&self) -> f64 {
        match *self {
            DataSpec::Gaussian { width } => 8.0 * width,
            DataSpec::Shell { center, width } => center + 8.0 * width,
            DataSpec::Bump { center, width } => center + width,
            DataSpec::Annulus { r1, .. } => r1,
            DataSpec::Dipole { r0, r1, width } => r0.max(r1) + width,
        }
    }

    fn inner(&self) -> f64 {
        match *self {
            DataSpec::Gaussian { .. } => 0.0,
            DataSpec::Shell { center, width } => center - 8.0 * width,
            DataSpec::Bump { center, width } => center - width,
            DataSpec::Annulus { r0, .. } => r0,
            DataSpec::Dipole { r0, r1, width } => r0.min(r1) - width,
        }
    }

    fn validate(&self, kind: ModelKind, cutoff: f64) -> Result<()> {
        let positive = match *self {
            DataSpec::Gaussian { width } => width > 0.0,
            DataSpec::Shell { center, width } => width > 0.0 && center >= 0.0,
            DataSpec::Bump { center, width } => width > 0.0 && center >= 0.0,
            DataSpec::Annulus { r0, r1 } => r0 >= 0.0 && r1 > r0,
            DataSpec::Dipole { r0, r1, width } => width > 0.0 && r0 >= 0.0 && r1 >= 0.0 && (r1 - r0).abs() >= 2.0 * width,
        };
        if !positive {
            return Err(Error::InvalidInput(format!("degenerate data profile {self}")));
        }
        if self.outer() >= cutoff {
            return Err(Error::InvalidInput(format!("{self} not supported inside (0, {cutoff})")));
        }
        if kind == ModelKind::HardyRadial
            && matches!(self, DataSpec::Bump { .. } | DataSpec::Annulus { .. } | DataSpec::Dipole { .. })
            && self.inner() <= 0.0
        {
            return Err(Error::InvalidInput(format!("{self} must be supported away from r = 0 for hardy kinds")));
        }
        Ok(())
    }

    fn profile(&self, r: f64) -> f64 {
        match *self {
            DataSpec::Gaussian { width } => (-0.5 * (r / width).powi(2)).exp(),
            DataSpec::Shell { center, width } => (-0.5 * ((r - center) / width).powi(2)).exp(),
            DataSpec::Bump { center, width } => bump((r - center) / width),
            DataSpec::Annulus { r0, r1 } => {
                let d = 0.25 * (r1 - r0);
                smooth_step((r - r0) / d) * smooth_step((r1 - r) / d)
            }
            DataSpec::Dipole { .. } => unreachable!("dipoles are sampled in two parts"),
        }
    }

    /// Sample on `disc`, checking support and recording the length scale.
    pub fn sample(&self, disc: &Arc<Discretization>) -> Result<SampledFunction> {
        self.validate(disc.op().kind(), disc.cutoff())?;
        let f = match *self {
            DataSpec::Dipole { r0, r1, width } => {
                let a = disc.sample(|r| bump((r - r0) / width));
                let b = disc.sample(|r| bump((r - r1) / width));
                let c = moment(&a) / moment(&b);
                a.combine(1.0, &b, -c)?
            }
            _ => disc.sample(|r| self.profile(r)),
        };
        Ok(f.with_scale(self.scale()))
    }
}

impl fmt::Display for DataSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DataSpec::Gaussian { width } => write!(f, "gaussian({width})"),
            DataSpec::Bump { center, width } => write!(f, "bump({center},{width})"),
            DataSpec::Annulus { r0, r1 } => write!(f, "annulus({r0},{r1})"),
            DataSpec::Shell { center, width } => write!(f, "shell({center},{width})"),
            DataSpec::Dipole { r0, r1, width } => write!(f, "dipole({r0},{r1},{width})"),
        }
    }
}

impl FromStr for DataSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("bad data spec '{s}'"));
        let open = s.find('(').ok_or_else(bad)?;
        if !s.ends_with(')') {
            return Err(bad());
        }
        let name = &s[..open];
        let args = s[open + 1..s.len() - 1]
            .split(',')
            .map(|a| a.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<f64>>>()?;
        match (name, args.as_slice()) {
            ("gaussian", [w]) => Ok(DataSpec::Gaussian { width: *w }),
            ("bump", [c, w]) => Ok(DataSpec::Bump { center: *c, width: *w }),
            ("annulus", [a, b]) => Ok(DataSpec::Annulus { r0: *a, r1: *b }),
            ("shell", [c, w]) => Ok(DataSpec::Shell { center: *c, width: *w }),
            ("dipole", [a, b, w]) => Ok(DataSpec::Dipole { r0: *a, r1: *b, width: *w }),
            _ => Err(bad()),
        }
    }
}

/// Default positive datum for a kind: centered bump on the line and for free
/// radial kinds, a bump supported away from the origin for hardy kinds.
pub fn default_bump(kind: ModelKind) -> DataSpec {
    match kind {
        ModelKind::HardyRadial => DataSpec::Bump { center: 2.0, width: 1.0 },
        _ => DataSpec::Bump { center: 0.0, width: 2.0 },
    }
}

/// `g - (moment(g)/moment(b)) b`.
pub fn project_moment(g: &SampledFunction, b: &SampledFunction) -> Result<SampledFunction> {
    let mb = moment(b);
    if mb == 0.0 {
        return Err(Error::InvalidInput("reference profile has zero moment".into()));
    }
    g.combine(1.0, b, -moment(g) / mb)
}

/// `count` seeded band-limited functions: sums of one to four Gaussian
/// shells with centers in `[6, 12]`, widths in `[0.5, 0.7]` and amplitudes in
/// `[-1, 1]`. All vanish to rounding at the origin and well before `R >= 20`.
pub fn random_band_limited(disc: &Arc<Discretization>, seed: u64, count: usize) -> Vec<SampledFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let shells: Vec<(f64, f64, f64)> = (0..rng.gen_range(1..=4))
                .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(6.0..12.0), rng.gen_range(0.5..0.7)))
                .collect();
            disc.sample(|r| shells.iter().map(|&(a, c, w)| a * (-0.5 * ((r - c) / w).powi(2)).exp()).sum())
                .with_scale(0.5)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        for s in ["gaussian(1)", "bump(2,0.5)", "annulus(1,3)", "shell(8,0.6)", "dipole(2,4,0.5)"] {
            let d: DataSpec = s.parse().unwrap();
            assert_eq!(d.to_string().parse::<DataSpec>().unwrap(), d);
        }
        assert!("bump(1)".parse::<DataSpec>().is_err());
        assert!("blob(1,2)".parse::<DataSpec>().is_err());
        assert!("bump(1,2".parse::<DataSpec>().is_err());
    }

    #[test]
    fn support_checks() {
        let hardy = Discretization::new("hardy:3:1".parse().unwrap(), 64, 20.0).unwrap();
        assert!(DataSpec::Bump { center: 0.0, width: 1.0 }.sample(&hardy).is_err());
        assert!(DataSpec::Bump { center: 2.0, width: 1.0 }.sample(&hardy).is_ok());
        assert!(DataSpec::Bump { center: 19.5, width: 1.0 }.sample(&hardy).is_err());
        let free = Discretization::new("free:3".parse().unwrap(), 64, 20.0).unwrap();
        assert!(DataSpec::Bump { center: 0.0, width: 1.0 }.sample(&free).is_ok());
    }

    #[test]
    fn dipole_moment_vanishes() {
        for op in ["hardy:3:-0.25", "free1d", "free:2"] {
            let d = Discretization::new(op.parse().unwrap(), 256, 40.0).unwrap();
            let g = DataSpec::Dipole { r0: 2.0, r1: 4.0, width: 0.75 }.sample(&d).unwrap();
            let b = DataSpec::Bump { center: 2.0, width: 0.75 }.sample(&d).unwrap();
            assert!(moment(&g).abs() < 1e-10 * moment(&b), "{op}");
        }
    }

    #[test]
    fn random_functions_are_seeded() {
        let d = Discretization::new("free:3".parse().unwrap(), 64, 30.0).unwrap();
        let a = random_band_limited(&d, 7, 3);
        let b = random_band_limited(&d, 7, 3);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.reduced(), y.reduced());
        }
        let c = random_band_limited(&d, 8, 1);
        assert_ne!(a[0].reduced(), c[0].reduced());
    }
}
