use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use critlab_core::quadrature::log_space;
use critlab_core::semigroup::{seminorm_time, Verdict};
use critlab_core::suite::{self, Status, SuiteConfig};
use critlab_core::wave::transmutation_check;
use critlab_core::{
    decay_curve, green_kernel_alpha, scan_interval, seminorm_freq, Discretization, Error, GreenValue, GrowthModel,
    SampledFunction,
};

use crate::config::ExperimentConfig;

/// Relative difference above which the two seminorm routes disagree.
pub const AGREEMENT_TOL: f64 = 1e-3;
pub const DECAY_SLACK: f64 = 1e-8;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Guard(String),
    Violation(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Guard(_) => 2,
            Failure::Violation(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Guard(m) | Failure::Violation(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ResolutionGuard { .. }
            | Error::ResolutionExhausted(_)
            | Error::Quadrature(_)
            | Error::AllInconclusive
            | Error::DegenerateFit(_)
            | Error::NonFiniteMultiplier(_) => Failure::Guard(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<String, Failure>;

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn write_out(dir: &Path, name: &str, body: &str) -> Result<(), Failure> {
    fs::write(dir.join(name), body).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", dir.join(name).display())))
}

fn prepare(cfg: &ExperimentConfig) -> Result<(), Failure> {
    fs::create_dir_all(&cfg.out)
        .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", cfg.out.display())))?;
    write_out(&cfg.out, "manifest.txt", &cfg.manifest())
}

fn sample(cfg: &ExperimentConfig) -> Result<SampledFunction, Failure> {
    let d = Discretization::new(cfg.op, cfg.grid_m, cfg.grid_r)?;
    Ok(cfg.data.sample(&d)?)
}

pub fn run(cfg: &ExperimentConfig) -> Outcome {
    match cfg.command.as_str() {
        "seminorm" => seminorm(cfg),
        "scan" => scan(cfg),
        "wave" => wave(cfg),
        "green" => green(cfg),
        "transmute" => transmute(cfg),
        "verify" => verify(cfg),
        other => Err(Failure::Usage(format!("unknown subcommand '{other}'"))),
    }
}

fn require_alpha(cfg: &ExperimentConfig) -> Result<(), Failure> {
    if cfg.alpha.is_empty() {
        return Err(Failure::Usage("alpha list is empty".into()));
    }
    Ok(())
}

fn seminorm(cfg: &ExperimentConfig) -> Outcome {
    require_alpha(cfg)?;
    let g = sample(cfg)?;
    prepare(cfg)?;
    let mut csv = String::from("alpha,time_verdict,time_value,time_slope,freq_verdict,freq_value,freq_slope,rel_diff,agree\n");
    let mut summary = String::new();
    for &a in &cfg.alpha {
        let t = seminorm_time(&cfg.op, &g, a, cfg.t_min, cfg.t_max, cfg.points_per_decade)?;
        let f = seminorm_freq(&cfg.op, &g, a)?;
        let rel = match (t.verdict, f.verdict) {
            (Verdict::Finite(x), Verdict::Finite(y)) => Some((x - y).abs() / y.abs().max(f64::MIN_POSITIVE)),
            _ => None,
        };
        let agree = match rel {
            Some(r) => r < AGREEMENT_TOL,
            None => t.verdict.label() == f.verdict.label(),
        };
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            num(a),
            t.verdict.label(),
            opt(t.verdict.value()),
            num(t.tail_slope),
            f.verdict.label(),
            opt(f.verdict.value()),
            num(f.tail_slope),
            opt(rel),
            if agree { "yes" } else { "no" }
        );
        let _ = writeln!(
            summary,
            "alpha = {a}: time {} / freq {}{}",
            t.verdict.label(),
            f.verdict.label(),
            rel.map(|r| format!(", rel diff {r:.3e}")).unwrap_or_default()
        );
    }
    write_out(&cfg.out, "seminorm.csv", &csv)?;
    Ok(summary)
}

fn scan(cfg: &ExperimentConfig) -> Outcome {
    let g = sample(cfg)?;
    prepare(cfg)?;
    let est = scan_interval(&cfg.op, &g, cfg.alpha_lo, cfg.alpha_hi, cfg.alpha_step)?;
    let mut csv = String::from("alpha,verdict,value,tail_slope\n");
    for v in &est.verdicts {
        let _ = writeln!(csv, "{},{},{},{}", num(v.alpha), v.verdict.label(), opt(v.verdict.value()), num(v.tail_slope));
    }
    write_out(&cfg.out, "scan.csv", &csv)?;
    let mut cc = String::from("alpha,freq_verdict,time_verdict,time_slope,predicted_slope,contradiction\n");
    for c in &est.cross_checks {
        let _ = writeln!(
            cc,
            "{},{},{},{},{},{}",
            num(c.alpha),
            c.freq.label(),
            c.time.label(),
            num(c.time_slope),
            num(c.predicted_slope),
            c.contradiction
        );
    }
    write_out(&cfg.out, "crosscheck.csv", &cc)?;
    let (lo, hi) = est.sup_bracket;
    let mut summary = format!("sup I_S ∈ [{lo}, {hi}]\nverdict: {:?}\n", est.criticality);
    if est.non_generic {
        summary.push_str("warning: data moment vanishes at small k; bracket may be non-generic\n");
    }
    write_out(&cfg.out, "summary.txt", &summary)?;
    if let Some(c) = est.cross_checks.iter().find(|c| c.contradiction) {
        return Err(Failure::Violation(format!(
            "{summary}time and frequency routes disagree at alpha = {}: slope {:.4} vs {:.4}",
            c.alpha, c.time_slope, c.predicted_slope
        )));
    }
    Ok(summary)
}

fn wave(cfg: &ExperimentConfig) -> Outcome {
    let g = sample(cfg)?;
    prepare(cfg)?;
    let t = log_space(cfg.t_min, cfg.t_max, cfg.points_per_decade);
    let curve = decay_curve(&cfg.op, &g, &t, cfg.alpha.first().copied())?;
    let (label, param) = match curve.model {
        GrowthModel::Power(p) | GrowthModel::SqrtLog(p) | GrowthModel::Bounded(p) => (curve.model.label(), p),
    };
    let mut csv = String::from("t,wave_norm\n");
    for (t, n) in curve.times.iter().zip(&curve.norms) {
        let _ = writeln!(csv, "{},{}", num(*t), num(*n));
    }
    write_out(&cfg.out, "wave.csv", &csv)?;
    let r = curve.residuals;
    let mut fit = String::from("model,parameter,residual,power_residual,sqrt_log_residual,bounded_residual,power_exponent,sqrt_log_coeff\n");
    let _ = writeln!(
        fit,
        "{label},{},{},{},{},{},{},{}",
        num(param),
        num(curve.residual),
        num(r.power),
        num(r.sqrt_log),
        num(r.bounded),
        num(curve.power_exponent),
        num(curve.sqrt_log_coeff)
    );
    write_out(&cfg.out, "wave_fit.csv", &fit)?;
    let mut summary = format!("model: {label}({param:.6}), residual {:.3e}\n", curve.residual);
    if let Some(b) = curve.bound_check {
        let mut bc = String::from("alpha,sup,bound\n");
        let _ = writeln!(bc, "{},{},{}", num(b.alpha), num(b.sup), opt(b.bound));
        write_out(&cfg.out, "bound.csv", &bc)?;
        match b.bound {
            Some(bound) => {
                let _ = writeln!(summary, "alpha = {}: sup {:.6e} <= bound {:.6e}", b.alpha, b.sup, bound);
                if b.sup > bound + DECAY_SLACK {
                    return Err(Failure::Violation(format!("{summary}decay bound violated")));
                }
            }
            None => {
                let _ = writeln!(summary, "alpha = {}: seminorm not finite, no bound", b.alpha);
            }
        }
    }
    Ok(summary)
}

fn green(cfg: &ExperimentConfig) -> Outcome {
    require_alpha(cfg)?;
    prepare(cfg)?;
    let d = (cfg.x - cfg.y).abs();
    let mut csv = String::from("alpha,distance,verdict,quadrature,closed_form,rel_diff\n");
    let mut summary = String::new();
    for &a in &cfg.alpha {
        match green_kernel_alpha(&cfg.op, cfg.x, cfg.y, a, cfg.t_max)? {
            GreenValue::Finite { quadrature, closed_form } => {
                let rel = (quadrature - closed_form).abs() / closed_form.abs();
                let _ = writeln!(csv, "{},{},Finite,{},{},{}", num(a), num(d), num(quadrature), num(closed_form), num(rel));
                let _ = writeln!(summary, "alpha = {a}: {quadrature:.10e} (closed form {closed_form:.10e}, rel {rel:.2e})");
            }
            GreenValue::Divergent => {
                let _ = writeln!(csv, "{},{},Divergent,,,", num(a), num(d));
                let _ = writeln!(summary, "alpha = {a}: Divergent");
            }
        }
    }
    write_out(&cfg.out, "green.csv", &csv)?;
    Ok(summary)
}

fn transmute(cfg: &ExperimentConfig) -> Outcome {
    if cfg.times.is_empty() {
        return Err(Failure::Usage("time list is empty".into()));
    }
    let g = sample(cfg)?;
    prepare(cfg)?;
    let mut csv = String::from("t,sigma_max,rel_error\n");
    let mut summary = String::new();
    let mut worst = 0.0f64;
    for &t in &cfg.times {
        let sigma_max = cfg.sigma_max.unwrap_or(12.0 * t.sqrt());
        let e = transmutation_check(&cfg.op, &g, t, sigma_max, cfg.points_per_decade)?;
        worst = worst.max(e);
        let _ = writeln!(csv, "{},{},{}", num(t), num(sigma_max), num(e));
        let _ = writeln!(summary, "t = {t}: rel error {e:.3e}");
    }
    write_out(&cfg.out, "transmute.csv", &csv)?;
    if worst >= critlab_core::wave::TRANSMUTATION_TOL {
        return Err(Failure::Violation(format!("{summary}transmutation error above tolerance")));
    }
    Ok(summary)
}

fn verify(cfg: &ExperimentConfig) -> Outcome {
    prepare(cfg)?;
    let sc = SuiteConfig { m: cfg.grid_m, r: cfg.grid_r, seed: cfg.seed, samples: cfg.samples };
    let mut report = String::new();
    let (mut fail, mut guard) = (0, 0);
    for id in 1..=suite::criteria_names().len() {
        let o = suite::run_one(sc, id);
        eprintln!("{} ({:.1} s)", o.line(), o.elapsed.as_secs_f64());
        let _ = writeln!(report, "{}", o.line());
        match o.status {
            Status::Pass => {}
            Status::Fail => fail += 1,
            Status::Guard => guard += 1,
        }
    }
    let n = suite::criteria_names().len();
    let _ = writeln!(report, "{} passed, {fail} failed, {guard} guarded", n - fail - guard);
    write_out(&cfg.out, "report.txt", &report)?;
    if fail > 0 {
        Err(Failure::Violation(report))
    } else if guard > 0 {
        Err(Failure::Guard(report))
    } else {
        Ok(report)
    }
}
