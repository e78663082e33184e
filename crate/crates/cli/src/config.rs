//! Problem configuration from flags, a `key = value` file and the environment.
//!
//! Precedence: command-line flag, then the config file, then `FRACMC_SEED`
//! (seed only), then the built-in default.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use fracmc_core::{default_step, Endpoint, ProblemSpec, StableSpec, StepMode, SubordinatorSpec, TimeWindow};
use serde_json::{json, Value};

use crate::error::{CliError, Result};
use crate::expr::{derive_metadata, parse_expression, Expr};

pub const SEED_ENV: &str = "FRACMC_SEED";

/// Flags shared by every command.
#[derive(Args, Clone, Debug, Default)]
pub struct ProblemArgs {
    /// `key = value` file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Index of the subordinator, 0 < alpha < 1.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Stability index of the spatial process, 0 < beta <= 2.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Scale: each coordinate has characteristic function exp(-c|z|^beta).
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// Hölder exponent of g (derived for catalog forcings).
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Hölder constant of g (derived for catalog forcings).
    #[arg(long, allow_negative_numbers = true)]
    pub lip: Option<f64>,
    /// Growth exponent p with |phi(x)| = O(|x|^p) (derived for catalog data).
    #[arg(long, allow_negative_numbers = true)]
    pub growth: Option<f64>,
    /// Spatial dimension
    #[arg(long)]
    pub dim: Option<usize>,
    /// Initial time.
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Evaluation time, t >= a.
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    /// Start point, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x: Option<Vec<f64>>,
    /// Initial datum, e.g. "pow(norm(x), 0.5)".
    #[arg(long)]
    pub phi: Option<String>,
    /// Forcing term, e.g. "0" or "pow(norm(x), 0.5)".
    #[arg(long)]
    pub g: Option<String>,
    /// Number of Monte Carlo samples.
    #[arg(long)]
    pub n: Option<u64>,
    /// Step length: a number, "auto:paper" or "auto:balanced".
    #[arg(long)]
    pub h: Option<String>,
    /// Master seed; otherwise the config file, FRACMC_SEED, then 1
    #[arg(long)]
    pub seed: Option<u64>,
    /// Confidence level.
    #[arg(long)]
    pub level: Option<f64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where the Riemann sum reads g: "left" or "right".
    #[arg(long)]
    pub endpoint: Option<String>,
}

const KEYS: [&str; 19] = [
    "alpha", "beta", "c", "gamma", "lip", "growth", "dim", "a", "t", "x", "phi", "g", "n", "h", "seed", "level",
    "workers", "out", "endpoint",
];

/// Step length setting.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepSpec {
    Fixed(f64),
    Auto(StepMode),
}

impl FromStr for StepSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "auto:paper" => Ok(StepSpec::Auto(StepMode::PaperExact)),
            "auto:balanced" => Ok(StepSpec::Auto(StepMode::Balanced)),
            v => match v.parse::<f64>() {
                Ok(h) if h >= 0.0 && h.is_finite() => Ok(StepSpec::Fixed(h)),
                _ => Err("expected a number >= 0, \"auto:paper\" or \"auto:balanced\"".to_string()),
            },
        }
    }
}

impl fmt::Display for StepSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepSpec::Fixed(h) => write!(f, "{h:?}"),
            StepSpec::Auto(StepMode::PaperExact) => f.write_str("auto:paper"),
            StepSpec::Auto(StepMode::Balanced) => f.write_str("auto:balanced"),
        }
    }
}

fn parse_endpoint(s: &str) -> std::result::Result<Endpoint, String> {
    match s.trim() {
        "left" => Ok(Endpoint::Left),
        "right" => Ok(Endpoint::Right),
        _ => Err("expected \"left\" or \"right\"".to_string()),
    }
}

/// Parsed `key = value` lines, remembering line numbers for messages.
#[derive(Clone, Debug, Default)]
pub struct ConfigFile {
    path: String,
    entries: BTreeMap<String, (usize, String)>,
}

impl ConfigFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&path.display().to_string(), &text)
    }

    pub fn parse(path: &str, text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!("{path}:{}: expected key = value", i + 1)));
            };
            let key = key.trim().to_string();
            if !KEYS.contains(&key.as_str()) {
                return Err(CliError::Config(format!("{path}:{}: unknown key {key:?}", i + 1)));
            }
            if entries.insert(key.clone(), (i + 1, value.trim().to_string())).is_some() {
                return Err(CliError::Config(format!("{path}:{}: duplicate key {key:?}", i + 1)));
            }
        }
        Ok(ConfigFile { path: path.to_string(), entries })
    }
}

/// One resolved value and where it came from.
struct Picked<T> {
    value: T,
    origin: String,
}

struct Resolver<'a> {
    file: &'a ConfigFile,
}

impl Resolver<'_> {
    fn pick<T: FromStr>(
        &self,
        key: &str,
        flag: Option<T>,
        fallback: impl FnOnce() -> Option<(T, String)>,
    ) -> Result<Option<Picked<T>>>
    where
        T::Err: fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(Some(Picked { value: v, origin: format!("--{key}") }));
        }
        if let Some((line, raw)) = self.file.entries.get(key) {
            let origin = format!("{}:{line}: {key}", self.file.path);
            return raw
                .parse::<T>()
                .map(|value| Some(Picked { value, origin: origin.clone() }))
                .map_err(|e| CliError::Config(format!("{origin}: cannot parse {raw:?}: {e}")));
        }
        Ok(fallback().map(|(value, origin)| Picked { value, origin }))
    }

    fn require<T: FromStr>(&self, key: &str, flag: Option<T>, default: T) -> Result<Picked<T>>
    where
        T::Err: fmt::Display,
    {
        Ok(self.pick(key, flag, || Some((default, format!("default {key}"))))?.expect("default supplied"))
    }
}

fn check(ok: bool, origin: &str, value: impl fmt::Display, constraint: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(format!("{origin} = {value}: must satisfy {constraint}")))
    }
}

/// A fully resolved configuration.
#[derive(Clone, Debug)]
pub struct Config {
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
    pub gamma: Option<f64>,
    pub lip: Option<f64>,
    pub growth: Option<f64>,
    pub d: usize,
    pub a: f64,
    pub t: f64,
    pub x: Vec<f64>,
    pub phi_expr: String,
    pub g_expr: String,
    pub phi: Expr,
    pub g: Expr,
    pub n: u64,
    pub h: StepSpec,
    pub seed: u64,
    pub level: f64,
    pub workers: usize,
    pub out: PathBuf,
    pub endpoint: Endpoint,
}

/// Built-in defaults: the one-dimensional setting with φ = |x|^{1/2}, g = 0.
pub struct Defaults {
    pub phi: &'static str,
    pub g: &'static str,
    pub n: u64,
    pub h: &'static str,
}

impl Default for Defaults {
    fn default() -> Self {
        Defaults { phi: "pow(norm(x), 0.5)", g: "0", n: 100_000, h: "0.01" }
    }
}

impl Config {
    pub fn resolve(args: &ProblemArgs, defaults: &Defaults) -> Result<Self> {
        let file = match &args.config {
            Some(p) => ConfigFile::read(p)?,
            None => ConfigFile::default(),
        };
        Self::resolve_with(args, &file, std::env::var(SEED_ENV).ok(), defaults)
    }

    pub fn resolve_with(
        args: &ProblemArgs,
        file: &ConfigFile,
        env_seed: Option<String>,
        defaults: &Defaults,
    ) -> Result<Self> {
        let r = Resolver { file };
        let alpha = r.require("alpha", args.alpha, 0.5)?;
        check(alpha.value > 0.0 && alpha.value < 1.0, &alpha.origin, alpha.value, "0 < alpha < 1")?;
        let beta = r.require("beta", args.beta, 1.5)?;
        check(beta.value > 0.0 && beta.value <= 2.0, &beta.origin, beta.value, "0 < beta <= 2")?;
        let c = r.require("c", args.c, 1.0)?;
        check(c.value > 0.0 && c.value.is_finite(), &c.origin, c.value, "c > 0")?;

        let x_list = r.pick::<CommaList>("x", args.x.clone().map(CommaList), || None)?;
        let d_default = x_list.as_ref().map_or(1, |x| x.value.0.len());
        let d = r.require("dim", args.dim, d_default)?;
        check(d.value >= 1, &d.origin, d.value, "dim >= 1")?;
        let x = match x_list {
            Some(x) => {
                check(
                    x.value.0.len() == d.value,
                    &x.origin,
                    x.value.0.len(),
                    &format!("{} coordinates (dim)", d.value),
                )?;
                check(x.value.0.iter().all(|v| v.is_finite()), &x.origin, "non-finite", "finite coordinates")?;
                x.value.0
            }
            None => vec![0.0; d.value],
        };

        let a = r.require("a", args.a, 0.0)?;
        let t = r.require("t", args.t, 1.0)?;
        check(a.value.is_finite(), &a.origin, a.value, "finite a")?;
        check(t.value.is_finite() && t.value >= a.value, &t.origin, t.value, &format!("t >= a = {}", a.value))?;

        let gamma = r.pick("gamma", args.gamma, || None)?;
        if let Some(g) = &gamma {
            check(
                g.value > 0.0 && g.value < beta.value / 2.0,
                &g.origin,
                g.value,
                &format!("0 < gamma < beta/2 = {}", beta.value / 2.0),
            )?;
        }
        let lip = r.pick("lip", args.lip, || None)?;
        if let Some(l) = &lip {
            check(l.value >= 0.0 && l.value.is_finite(), &l.origin, l.value, "lip >= 0")?;
        }
        let growth = r.pick("growth", args.growth, || None)?;
        if let Some(p) = &growth {
            check(p.value >= 0.0 && p.value.is_finite(), &p.origin, p.value, "growth >= 0")?;
        }

        let phi_src = r.require("phi", args.phi.clone(), defaults.phi.to_string())?;
        let phi = parse_expression(&phi_src.value, d.value)
            .map_err(|e| CliError::Config(format!("{}:\n{e}", phi_src.origin)))?;
        let g_src = r.require("g", args.g.clone(), defaults.g.to_string())?;
        let g =
            parse_expression(&g_src.value, d.value).map_err(|e| CliError::Config(format!("{}:\n{e}", g_src.origin)))?;

        let n = r.require("n", args.n, defaults.n)?;
        check(n.value >= 2, &n.origin, n.value, "n >= 2")?;
        let h = r.require::<StepSpec>(
            "h",
            args.h.as_deref().map(str::parse).transpose().map_err(|e| CliError::Config(format!("--h: {e}")))?,
            defaults.h.parse().expect("valid default"),
        )?;
        let seed = r.pick("seed", args.seed, || {
            env_seed.as_deref().and_then(|s| s.trim().parse().ok()).map(|v| (v, SEED_ENV.to_string()))
        })?;
        if seed.is_none() {
            if let Some(raw) = &env_seed {
                return Err(CliError::Config(format!("{SEED_ENV} = {raw:?}: expected an unsigned 64-bit integer")));
            }
        }
        let level = r.require("level", args.level, 0.95)?;
        check(level.value > 0.0 && level.value < 1.0, &level.origin, level.value, "0 < level < 1")?;
        let default_workers = std::thread::available_parallelism().map_or(1, |n| n.get());
        let workers = r.require("workers", args.workers, default_workers)?;
        check(workers.value >= 1, &workers.origin, workers.value, "workers >= 1")?;
        let out = r.require("out", args.out.clone(), PathBuf::from("."))?;
        let endpoint = match (&args.endpoint, file.entries.get("endpoint")) {
            (Some(s), _) => parse_endpoint(s).map_err(|e| CliError::Config(format!("--endpoint: {e}")))?,
            (None, Some((line, s))) => {
                parse_endpoint(s).map_err(|e| CliError::Config(format!("{}:{line}: endpoint: {e}", file.path)))?
            }
            (None, None) => Endpoint::Left,
        };

        let cfg = Config {
            alpha: alpha.value,
            beta: beta.value,
            c: c.value,
            gamma: gamma.map(|p| p.value),
            lip: lip.map(|p| p.value),
            growth: growth.map(|p| p.value),
            d: d.value,
            a: a.value,
            t: t.value,
            x,
            phi_expr: phi_src.value,
            g_expr: g_src.value,
            phi,
            g,
            n: n.value,
            h: h.value,
            seed: seed.map_or(1, |s| s.value),
            level: level.value,
            workers: workers.value,
            out: out.value,
            endpoint,
        };
        cfg.problem()?;
        if let StepSpec::Fixed(h) = cfg.h {
            if h == 0.0 && !cfg.g_is_zero() {
                return Err(CliError::Config("h = 0 is only meaningful when g = 0".to_string()));
            }
        }
        Ok(cfg)
    }

    pub fn g_is_zero(&self) -> bool {
        self.g.shape() == fracmc_core::Shape::Const(0.0)
    }

    /// The problem with γ, L and the growth of φ taken from the flags when given
    /// and from the catalog otherwise.
    pub fn problem(&self) -> Result<ProblemSpec> {
        let sub = SubordinatorSpec::new(self.alpha)?;
        let stable = StableSpec::new(self.beta, self.c, self.d)?;
        let win = TimeWindow::new(self.a, self.t)?;
        let mut p = ProblemSpec::new(sub, stable, win)
            .with_x(self.x.clone())
            .with_phi(self.phi.to_function())
            .with_g(self.g.to_function())
            .with_endpoint(self.endpoint);
        if let Some(growth) = self.growth {
            p = p.with_phi_growth(growth);
        }
        let derived = derive_metadata(&self.g, self.beta);
        match (self.gamma, self.lip, derived) {
            (Some(gamma), Some(lip), _) => p = p.with_holder(gamma, lip),
            (gamma, lip, Some(m)) => p = p.with_holder(gamma.unwrap_or(m.gamma), lip.unwrap_or(m.lip)),
            (_, _, None) => {
                return Err(CliError::Config(format!(
                    "g = {:?} has no derivable Hölder pair (gamma < beta/2 = {}); declare --gamma and --lip",
                    self.g_expr,
                    self.beta / 2.0
                )))
            }
        }
        p.validate()?;
        Ok(p)
    }

    /// Step used by the estimator; 0 (the plain estimator) whenever g = 0.
    pub fn step(&self) -> Result<f64> {
        self.step_for(self.n)
    }

    pub fn step_for(&self, n: u64) -> Result<f64> {
        if self.g_is_zero() {
            return Ok(0.0);
        }
        Ok(match self.h {
            StepSpec::Fixed(h) => h,
            StepSpec::Auto(mode) => default_step(n, self.beta, self.problem()?.gamma, mode),
        })
    }

    /// Everything that defines the problem, as JSON.
    pub fn problem_echo(&self) -> Value {
        json!({
            "alpha": self.alpha,
            "beta": self.beta,
            "c": self.c,
            "dim": self.d,
            "a": self.a,
            "t": self.t,
            "x": self.x,
            "phi": self.phi.to_string(),
            "g": self.g.to_string(),
            "gamma": self.gamma,
            "lip": self.lip,
            "growth": self.growth,
            "endpoint": match self.endpoint { Endpoint::Left => "left", Endpoint::Right => "right" },
        })
    }

    pub fn echo(&self) -> Value {
        let mut v = self.problem_echo();
        let obj = v.as_object_mut().expect("object");
        obj.insert("n".into(), json!(self.n));
        obj.insert("h".into(), json!(self.h.to_string()));
        obj.insert("seed".into(), json!(self.seed));
        obj.insert("level".into(), json!(self.level));
        obj.insert("workers".into(), json!(self.workers));
        obj.insert("out".into(), json!(self.out.display().to_string()));
        v
    }

    /// Short hash of the problem definition.
    pub fn fingerprint(&self) -> String {
        crate::output::sha256_hex(self.problem_echo().to_string().as_bytes())[..16].to_string()
    }
}

/// Comma-separated reals, as in `x = 0, 1.5`.
#[derive(Clone, Debug, PartialEq)]
struct CommaList(Vec<f64>);

impl FromStr for CommaList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(CommaList)
    }
}
