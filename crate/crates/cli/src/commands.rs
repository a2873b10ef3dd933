use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use serde::Serialize;
use serde_json::json;

use fraclap::greenop::{gamma_u_with, operator_norm_b, AssemblyConfig};
use fraclap::lemmas::{run_lemmas, LemmaConfig, LemmaTolerances};
use fraclap::solver::{
    amplitude_for_fraction, attach_strong_residual, certify, fold_sweep, krasnoselskii_probe, newton_second,
    picard_minimal, second_guess_radius, OperatorModel, Problem, ProbeResult, ScalarModel, SolverConfig,
    SweepConfig,
};
use fraclap::{
    green_ball, make_grid, poisson_ball, w_factor, ConeSpec, Execution, GreenOperator, GridFunction, KernelParams,
};

use crate::config::{ForcingSource, RunConfig};

pub const SCHEMA: u32 = 1;

/// Exit status of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    /// A negative mathematical result (certificate fails, a branch is missing, ...).
    Negative,
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<String> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(dir.join(name), &text).with_context(|| format!("writing {name}"))?;
    Ok(text)
}

fn write_csv(dir: &Path, name: &str, u: &GridFunction) -> Result<()> {
    fs::create_dir_all(dir)?;
    u.write_csv(&dir.join(name)).with_context(|| format!("writing {name}"))
}

/// Operator, cone and scaled forcing for one run.
struct Lab {
    cfg: RunConfig,
    op: GreenOperator,
    cone: ConeSpec,
    h: GridFunction,
    amplitude: f64,
    exec: Execution,
}

impl Lab {
    fn build(cfg: RunConfig) -> Result<Self> {
        let exec = if cfg.sequential { Execution::Sequential } else { Execution::default() };
        let kp = KernelParams::for_solver(cfg.alpha)?;
        let shape = match &cfg.forcing {
            ForcingSource::Profile(prof) => {
                let prof = *prof;
                GridFunction::from_fn(make_grid(cfg.grid_n)?, |x| prof.eval(x, cfg.alpha))?
            }
            ForcingSource::Csv(path) => {
                GridFunction::read_csv(path).with_context(|| format!("reading forcing {}", path.display()))?
            }
        };
        let mut cfg = cfg;
        cfg.grid_n = shape.len();
        let op = GreenOperator::assemble_with(shape.grid().clone(), kp, exec, &AssemblyConfig::default())?;
        let gamma = gamma_u_with(cfg.a_half, &kp, &Default::default(), exec)?;
        let cone = ConeSpec::new(cfg.a_half, gamma, cfg.tolerances.cone_tol)?;
        let amplitude = match (cfg.amplitude, cfg.lhs_fraction) {
            (Some(a), _) => a,
            (None, Some(frac)) => amplitude_for_fraction(&Problem::new(&op, shape.clone(), cfg.p, cone)?, frac)?,
            (None, None) => 1.0,
        };
        let h = shape.scaled(amplitude);
        Ok(Self { cfg, op, cone, h, amplitude, exec })
    }

    fn problem(&self) -> Result<Problem<'_>> {
        Ok(Problem::new(&self.op, self.h.clone(), self.cfg.p, self.cone)?)
    }

    fn solver_config(&self) -> SolverConfig {
        let t = &self.cfg.tolerances;
        SolverConfig {
            fp_tol: t.fp_tol,
            step_tol: t.step_tol,
            max_picard: t.max_picard,
            max_newton: t.max_newton,
            ..SolverConfig::default()
        }
    }

    fn header(&self, command: &str) -> serde_json::Value {
        json!({
            "schema": SCHEMA,
            "command": command,
            "config": self.cfg,
            "amplitude": self.amplitude,
            "gamma_u": self.cone.gamma,
            "quadrature_error": self.op.quadrature_error(),
        })
    }
}

fn merge(mut base: serde_json::Value, extra: serde_json::Value) -> serde_json::Value {
    if let (Some(b), serde_json::Value::Object(e)) = (base.as_object_mut(), extra) {
        b.extend(e);
    }
    base
}

pub fn certify_cmd(cfg: RunConfig) -> Result<Outcome> {
    let lab = Lab::build(cfg)?;
    let pb = lab.problem()?;
    let cert = certify(&pb)?;
    let report = merge(lab.header("certify"), json!({ "certificate": cert }));
    print!("{}", write_json(&lab.cfg.output_dir, "certificate.json", &report)?);
    Ok(if cert.pass { Outcome::Pass } else { Outcome::Negative })
}

pub fn solve_cmd(cfg: RunConfig) -> Result<Outcome> {
    let lab = Lab::build(cfg)?;
    let pb = lab.problem()?;
    let scfg = lab.solver_config();
    let cert = certify(&pb)?;
    let dir = lab.cfg.output_dir.clone();
    let radii = cert.radii;
    let bound = radii.map_or(scfg.blowup, |r| r.rho2);

    let mut minimal = picard_minimal(&pb, bound, &scfg)?;
    if minimal.converged() {
        attach_strong_residual(&pb, &mut minimal, &scfg.pv)?;
        write_csv(&dir, "minimal.csv", &minimal.u)?;
    }
    let mut extra = json!({ "certificate": cert, "minimal": minimal });

    if cert.degenerate {
        extra["degenerate"] = json!(true);
        extra["note"] = json!("zero forcing: u = 0 is the solution, second branch skipped");
        let ok = minimal.converged();
        write_json(&dir, "report.json", &merge(lab.header("solve"), extra))?;
        return Ok(if ok { Outcome::Pass } else { Outcome::Negative });
    }
    extra["degenerate"] = json!(false);

    let mut outcome = Outcome::Negative;
    if minimal.converged() {
        let guess = second_guess_radius(cert.a_coerc, cert.b, cert.u0_sup, pb.p)?;
        match newton_second(&pb, &minimal, guess, radii.as_ref(), &scfg) {
            Ok(mut second) => {
                attach_strong_residual(&pb, &mut second, &scfg.pv)?;
                write_csv(&dir, "second.csv", &second.u)?;
                let distance = second.u.distance(&minimal.u);
                extra["distance"] = json!(distance);
                extra["distinct"] = json!(true);
                if let Some(r) = radii {
                    extra["radii_gap"] = json!(r.rho2 - r.rho1);
                }
                extra["second"] = json!(second);
                outcome = Outcome::Pass;
            }
            Err(e) => extra["second_error"] = json!(e.to_string()),
        }
    } else {
        extra["divergence"] = json!({
            "status": minimal.status,
            "iterations": minimal.iterations,
            "last_sup_norm": minimal.sup_norm,
            "bound": bound,
        });
    }

    if let Some(r) = radii {
        let probes: Vec<ProbeResult> = [(r.rho1, 1), (r.rho2, 2), (r.rho3, 3)]
            .iter()
            .map(|&(rho, k)| krasnoselskii_probe(&pb, rho, 200, lab.cfg.seed.wrapping_add(k), lab.exec))
            .collect::<Result<_, _>>()?;
        extra["probes"] = json!(probes);
    }
    write_json(&dir, "report.json", &merge(lab.header("solve"), extra))?;
    Ok(outcome)
}

#[derive(Debug, Clone, Default, Args)]
pub struct LemmaArgs {
    /// Replace every battery tolerance with this value
    #[arg(long)]
    pub tol: Option<f64>,
    /// Random inputs per sampled check [default: 100]
    #[arg(long)]
    pub samples: Option<usize>,
}

pub fn lemmas_cmd(cfg: RunConfig, samples: usize, tol: Option<f64>) -> Result<Outcome> {
    let exec = if cfg.sequential { Execution::Sequential } else { Execution::default() };
    let kp = KernelParams::for_solver(cfg.alpha)?;
    let op = GreenOperator::assemble_with(make_grid(cfg.grid_n)?, kp, exec, &AssemblyConfig::default())?;
    let lcfg = LemmaConfig {
        a_half: cfg.a_half,
        p: cfg.p,
        samples,
        seed: cfg.seed,
        tol: tol.map_or_else(LemmaTolerances::default, LemmaTolerances::uniform),
        ..LemmaConfig::default()
    };
    let report = run_lemmas(&op, &lcfg, exec)?;
    for c in &report.checks {
        eprintln!(
            "{:<26} {}  {:.3e} (tol {:.1e})  {}",
            c.name,
            if c.passed { "pass" } else { "FAIL" },
            c.magnitude,
            c.tolerance,
            c.detail
        );
    }
    let doc = json!({ "schema": SCHEMA, "command": "lemmas", "config": cfg, "battery": lcfg, "report": report });
    write_json(&cfg.output_dir, "lemmas.json", &doc)?;
    Ok(if report.passed { Outcome::Pass } else { Outcome::Negative })
}

#[derive(Debug, Clone, Default, Args)]
pub struct SweepArgs {
    /// Smallest multiple of the forcing [default: 0.25]
    #[arg(long)]
    pub lambda_lo: Option<f64>,
    /// Largest multiple of the forcing [default: 4]
    #[arg(long)]
    pub lambda_hi: Option<f64>,
    /// Evenly spaced amplitudes [default: 16]
    #[arg(long)]
    pub steps: Option<usize>,
    /// Relative width of the fold bracket [default: 1e-4; 1e-9 in scalar mode]
    #[arg(long)]
    pub rel_width: Option<f64>,
    /// Replace the operator by the scalar model u = b u^p + |u0|
    #[arg(long)]
    pub scalar: bool,
}

pub struct SweepRange {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
    pub rel_width: Option<f64>,
    pub scalar: bool,
}

fn opt_num(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:.16e}"))
}

pub fn sweep_cmd(cfg: RunConfig, range: SweepRange) -> Result<Outcome> {
    if !(range.lo > 0.0) || !(range.hi > range.lo) || !range.hi.is_finite() {
        bail!("empty amplitude range [{}, {}]", range.lo, range.hi);
    }
    if range.steps < 2 {
        bail!("a sweep needs at least two steps");
    }
    let lab = Lab::build(cfg)?;
    let pb = lab.problem()?;
    if pb.u0.sup_norm() == 0.0 {
        return Err(anyhow!("sweep needs a nonzero forcing"));
    }
    let b = operator_norm_b(&lab.op);
    let rel_width = range.rel_width.unwrap_or(if range.scalar { 1e-9 } else { 1e-4 });
    let scfg = SweepConfig { lambda_lo: range.lo, lambda_hi: range.hi, steps: range.steps, rel_width, exec: lab.exec };
    let (mode, record) = if range.scalar {
        let model = ScalarModel { b, u0: pb.u0.sup_norm(), p: pb.p };
        ("scalar", fold_sweep(&model, &scfg)?)
    } else {
        let model = OperatorModel::new(pb.clone(), lab.solver_config())?;
        ("operator", fold_sweep(&model, &scfg)?)
    };
    let mut csv = String::from("lambda,lhs,certified,minimal,second,extra\n");
    for pt in &record.points {
        writeln!(
            csv,
            "{:.16e},{:.16e},{},{},{},{}",
            pt.lambda,
            pt.lhs,
            pt.certified,
            opt_num(pt.minimal),
            opt_num(pt.second),
            pt.extra.len()
        )?;
    }
    fs::create_dir_all(&lab.cfg.output_dir)?;
    fs::write(lab.cfg.output_dir.join("branches.csv"), csv)?;
    let doc = merge(
        lab.header("sweep"),
        json!({
            "mode": mode,
            "b": b,
            "u0_sup": pb.u0.sup_norm(),
            "lambda_lo": range.lo,
            "lambda_hi": range.hi,
            "steps": range.steps,
            "rel_width": rel_width,
            "lambda_cert": record.lambda_cert,
            "fold_estimate": record.fold_estimate,
            "fold_bracket": record.fold_bracket,
            "fold_over_cert": record.fold_estimate.map(|f| f / record.lambda_cert),
            "note": record.note,
            "points": record.points,
        }),
    );
    print!("{}", write_json(&lab.cfg.output_dir, "fold.json", &doc)?);
    Ok(Outcome::Pass)
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    /// Fractional order α in (0, 2)
    #[arg(long, default_value_t = 1.5)]
    pub alpha: f64,
    /// Dimension of the points
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    /// Green function of the unit ball at `x,y` (components of a point separated by `:`)
    #[arg(long, value_name = "X,Y")]
    pub green: Vec<String>,
    /// Poisson kernel of the ball of radius --radius at `x,y`
    #[arg(long, value_name = "X,Y")]
    pub poisson: Vec<String>,
    /// The factor w(x, y) at `x,y`
    #[arg(long, value_name = "X,Y")]
    pub w: Vec<String>,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Also write the table to DIR/kernel.csv
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

fn parse_pair(s: &str, d: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (a, b) = s.split_once(',').ok_or_else(|| anyhow!("point pair `{s}` must look like x,y"))?;
    let point = |t: &str| -> Result<Vec<f64>> {
        let v = t
            .split(':')
            .map(|c| c.trim().parse::<f64>().map_err(|e| anyhow!("bad coordinate `{c}` in `{s}`: {e}")))
            .collect::<Result<Vec<_>>>()?;
        if v.len() != d {
            bail!("point `{t}` has {} components, expected {d}", v.len());
        }
        if v.iter().any(|c| !c.is_finite()) {
            bail!("point `{t}` is not finite");
        }
        Ok(v)
    };
    Ok((point(a)?, point(b)?))
}

fn fmt_point(p: &[f64]) -> String {
    p.iter().map(|c| format!("{c}")).collect::<Vec<_>>().join(":")
}

pub fn kernel_cmd(args: KernelArgs) -> Result<Outcome> {
    let kp = KernelParams::new(args.d, args.alpha)?;
    if args.green.is_empty() && args.poisson.is_empty() && args.w.is_empty() {
        bail!("nothing to evaluate: pass --green, --poisson or --w");
    }
    let mut csv = String::from("kind,x,y,value\n");
    for s in &args.green {
        let (x, y) = parse_pair(s, args.d)?;
        let v = green_ball(&x, &y, &kp)?;
        writeln!(csv, "green,{},{},{v:.16e}", fmt_point(&x), fmt_point(&y))?;
    }
    for s in &args.poisson {
        let (x, y) = parse_pair(s, args.d)?;
        let v = poisson_ball(&x, &y, args.radius, &kp)?;
        writeln!(csv, "poisson,{},{},{v:.16e}", fmt_point(&x), fmt_point(&y))?;
    }
    for s in &args.w {
        let (x, y) = parse_pair(s, args.d)?;
        let v = w_factor(&x, &y);
        writeln!(csv, "w,{},{},{v:.16e}", fmt_point(&x), fmt_point(&y))?;
    }
    print!("{csv}");
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("kernel.csv"), &csv)?;
    }
    Ok(Outcome::Pass)
}
