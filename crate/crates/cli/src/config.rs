//! Run configuration: command-line flags, an optional flat `key = value`
//! file, the `FRACLAP_OUT` environment variable and built-in defaults, in
//! that order of precedence.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;

pub const OUT_ENV: &str = "FRACLAP_OUT";
pub const DEFAULT_OUT: &str = "fraclap-out";

/// Named forcing shapes; all nonnegative, symmetric and unimodal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// 1 - x^2
    Bump,
    /// (1 - x^2)^{α/2}
    Torsion,
    /// min(1, 2(1 - |x|))
    Plateau,
}

impl Profile {
    pub fn eval(self, x: f64, alpha: f64) -> f64 {
        let base = ((1.0 - x) * (1.0 + x)).max(0.0);
        match self {
            Profile::Bump => base,
            Profile::Torsion => base.powf(0.5 * alpha),
            Profile::Plateau => (2.0 * (1.0 - x.abs())).clamp(0.0, 1.0),
        }
    }
}

impl FromStr for Profile {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        <Profile as ValueEnum>::from_str(s, true).map_err(|_| anyhow!("unknown profile `{s}` (bump, torsion, plateau)"))
    }
}

/// Flags shared by the certify, solve, lemmas and sweep commands.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Fractional order α in [1.05, 1.95] [default: 1.5]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Power p in (1, 4] [default: 2]
    #[arg(long)]
    pub p: Option<f64>,
    /// Grid size, odd and at least 33 [default: 65]
    #[arg(long)]
    pub n: Option<usize>,
    /// Half-width of the window U = (-a, a) [default: 0.5]
    #[arg(long)]
    pub a_half: Option<f64>,
    /// Forcing shape [default: bump]
    #[arg(long, value_enum)]
    pub profile: Option<Profile>,
    /// Forcing amplitude; overrides --lhs-fraction
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Choose the amplitude so that b |G h|^{p-1} = fraction * c_p [default: 0.5]
    #[arg(long)]
    pub lhs_fraction: Option<f64>,
    /// Forcing read from a CSV file (header `x,value`); its nodes define the grid
    #[arg(long)]
    pub h_csv: Option<PathBuf>,
    /// Seed for cone sampling [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory [default: $FRACLAP_OUT or fraclap-out]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fixed-point tolerance (sup norm) [default: 1e-9]
    #[arg(long)]
    pub fp_tol: Option<f64>,
    /// Final Newton step tolerance [default: 1e-10]
    #[arg(long)]
    pub step_tol: Option<f64>,
    #[arg(long)]
    pub max_picard: Option<usize>,
    #[arg(long)]
    pub max_newton: Option<usize>,
    /// Relative tolerance of cone membership checks [default: 1e-8]
    #[arg(long)]
    pub cone_tol: Option<f64>,
    /// Run index-parallel loops on one thread (results are identical)
    #[arg(long)]
    pub sequential: bool,
}

/// Flat `key = value` file; `#` starts a comment, keys are flag names.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str, allowed: &[&str]) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| anyhow!("config line {}: expected key = value", i + 1))?;
            let key = k.trim().replace('_', "-");
            if !allowed.contains(&key.as_str()) {
                bail!("config line {}: unknown key `{}`", i + 1, k.trim());
            }
            entries.insert(key, v.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path, allowed: &[&str]) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text, allowed)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e| anyhow!("config key `{key}`: {e}")),
        }
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        Ok(self.get::<bool>(key)?.unwrap_or(false))
    }
}

pub const RUN_KEYS: &[&str] = &[
    "alpha", "p", "n", "a-half", "profile", "amplitude", "lhs-fraction", "h-csv", "seed", "out", "fp-tol", "step-tol",
    "max-picard", "max-newton", "cone-tol", "sequential",
];

/// Where the forcing comes from.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ForcingSource {
    Profile(Profile),
    Csv(PathBuf),
}

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    pub fp_tol: f64,
    pub step_tol: f64,
    pub max_picard: usize,
    pub max_newton: usize,
    pub cone_tol: f64,
}

/// Fully resolved configuration, embedded in every JSON report. The output
/// directory and thread mode are left out: they do not affect results.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub alpha: f64,
    pub p: f64,
    pub grid_n: usize,
    pub a_half: f64,
    pub forcing: ForcingSource,
    pub amplitude: Option<f64>,
    pub lhs_fraction: Option<f64>,
    pub seed: u64,
    pub tolerances: Tolerances,
    #[serde(skip)]
    pub output_dir: PathBuf,
    #[serde(skip)]
    pub sequential: bool,
}

fn pick<T: FromStr>(cli: Option<T>, file: &ConfigFile, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match cli {
        Some(v) => Ok(Some(v)),
        None => file.get(key),
    }
}

impl RunConfig {
    pub fn resolve(args: &RunArgs, file: &ConfigFile) -> Result<Self> {
        let alpha = pick(args.alpha, file, "alpha")?.unwrap_or(1.5);
        let p = pick(args.p, file, "p")?.unwrap_or(2.0);
        let grid_n = pick(args.n, file, "n")?.unwrap_or(65);
        let a_half = pick(args.a_half, file, "a-half")?.unwrap_or(0.5);
        let h_csv: Option<PathBuf> = pick(args.h_csv.clone(), file, "h-csv")?;
        let profile = pick(args.profile, file, "profile")?;
        let amplitude = pick(args.amplitude, file, "amplitude")?;
        let lhs_fraction = pick(args.lhs_fraction, file, "lhs-fraction")?;
        let forcing = match (h_csv, profile) {
            (Some(_), Some(_)) => bail!("--h-csv and --profile are mutually exclusive"),
            (Some(path), None) => ForcingSource::Csv(path),
            (None, prof) => ForcingSource::Profile(prof.unwrap_or(Profile::Bump)),
        };
        // a named profile is scaled to half the threshold unless told otherwise
        let lhs_fraction = match (&forcing, amplitude, lhs_fraction) {
            (_, Some(_), _) => None,
            (ForcingSource::Profile(_), None, None) => Some(0.5),
            (_, None, f) => f,
        };
        let output_dir = match pick(args.out.clone(), file, "out")? {
            Some(d) => d,
            None => std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        };
        let cfg = Self {
            alpha,
            p,
            grid_n,
            a_half,
            forcing,
            amplitude,
            lhs_fraction,
            seed: pick(args.seed, file, "seed")?.unwrap_or(0),
            tolerances: Tolerances {
                fp_tol: pick(args.fp_tol, file, "fp-tol")?.unwrap_or(1e-9),
                step_tol: pick(args.step_tol, file, "step-tol")?.unwrap_or(1e-10),
                max_picard: pick(args.max_picard, file, "max-picard")?.unwrap_or(100_000),
                max_newton: pick(args.max_newton, file, "max-newton")?.unwrap_or(60),
                cone_tol: pick(args.cone_tol, file, "cone-tol")?.unwrap_or(1e-8),
            },
            output_dir,
            sequential: args.sequential || file.flag("sequential")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !(1.05..=1.95).contains(&self.alpha) {
            bail!("alpha = {} outside [1.05, 1.95]", self.alpha);
        }
        if !(self.p > 1.0 && self.p <= 4.0) {
            bail!("p = {} outside (1, 4]", self.p);
        }
        if self.grid_n < 33 || self.grid_n % 2 == 0 {
            bail!("grid size n = {} must be odd and at least 33", self.grid_n);
        }
        if !(self.a_half > 0.0 && self.a_half < 1.0) {
            bail!("a-half = {} outside (0, 1)", self.a_half);
        }
        if let Some(a) = self.amplitude {
            if !(a >= 0.0) || !a.is_finite() {
                bail!("amplitude = {a} must be nonnegative");
            }
        }
        if let Some(f) = self.lhs_fraction {
            if !(f > 0.0) || !f.is_finite() {
                bail!("lhs-fraction = {f} must be positive");
            }
        }
        let t = &self.tolerances;
        if !(t.fp_tol > 0.0) || !(t.step_tol > 0.0) || !(t.cone_tol >= 0.0) || t.max_picard == 0 || t.max_newton == 0 {
            bail!("tolerances must be positive and iteration limits nonzero");
        }
        Ok(())
    }
}
