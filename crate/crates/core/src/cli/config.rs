//! Flags and flat `key = value` files merged into a validated [`RunConfig`].

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Parser;

use crate::domain::{ParticleConfig, SystemParams};
use crate::linalg::SymmetricMatrixState;
use crate::sde::{SimulationGrid, ZeroBoundary};

/// A configuration problem, reported on one line with exit code 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Classify,
    Simulate,
    Mc,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Particles,
    Wishart,
    Polys,
    Glued,
    NonUnique,
    Pinned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Identities,
    Coefficients,
    Roundtrip,
    Brackets,
}

/// Path functional averaged by `mc`, evaluated at the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stat {
    /// `e_n`.
    E(usize),
    /// Particle `n` (1-based).
    X(usize),
    /// Whether particle `n` ever reached `tol_zero`.
    HitZero(usize),
    /// Whether particle `n` ever went below `-tol_zero`.
    WentNegative(usize),
}

impl std::fmt::Display for Stat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Stat::E(n) => write!(f, "e{n}"),
            Stat::X(n) => write!(f, "x{n}"),
            Stat::HitZero(n) => write!(f, "hit_zero{n}"),
            Stat::WentNegative(n) => write!(f, "went_negative{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub model: Model,
    pub params: Option<SystemParams>,
    pub x0: Option<ParticleConfig>,
    pub y0: Option<SymmetricMatrixState>,
    pub grid: Option<SimulationGrid>,
    pub seed: u64,
    pub reps: usize,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
    pub zero_noise: bool,
    pub suite: Option<Suite>,
    pub p_max: usize,
    pub cases: usize,
    pub stat: Stat,
}

const KEYS: &[&str] = &[
    "command",
    "model",
    "p",
    "alpha",
    "x0",
    "y0",
    "dt",
    "horizon",
    "tol_zero",
    "tol_coll",
    "substep_cap",
    "seed",
    "reps",
    "output",
    "format",
    "threads",
    "zero_noise",
    "boundary",
    "suite",
    "p_max",
    "cases",
    "stat",
];

#[derive(Parser, Debug)]
#[command(name = "besq", version, about = "Squared Bessel particle systems: classify, simulate, estimate, verify")]
struct Args {
    /// classify | simulate | mc | verify
    command: Option<String>,
    /// Flat `key = value` file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// particles | wishart | polys | glued | non-unique | pinned
    #[arg(long)]
    model: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    p: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Comma-separated start point.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Comma-separated row-major start matrix (wishart).
    #[arg(long, allow_hyphen_values = true)]
    y0: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    horizon: Option<String>,
    #[arg(long)]
    tol_zero: Option<String>,
    #[arg(long)]
    tol_coll: Option<String>,
    #[arg(long)]
    substep_cap: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    reps: Option<String>,
    #[arg(long)]
    output: Option<String>,
    /// csv | json
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    threads: Option<String>,
    /// Replace every Gaussian draw by zero.
    #[arg(long)]
    zero_noise: bool,
    /// local-dimension | free
    #[arg(long)]
    boundary: Option<String>,
    /// identities | coefficients | roundtrip | brackets
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    p_max: Option<String>,
    #[arg(long)]
    cases: Option<String>,
    /// eN | xN | hit_zeroN | went_negativeN
    #[arg(long)]
    stat: Option<String>,
}

impl Args {
    fn into_map(self) -> (Option<PathBuf>, BTreeMap<String, String>) {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                m.insert(k.to_string(), v);
            }
        };
        put("command", self.command);
        put("model", self.model);
        put("p", self.p);
        put("alpha", self.alpha);
        put("x0", self.x0);
        put("y0", self.y0);
        put("dt", self.dt);
        put("horizon", self.horizon);
        put("tol_zero", self.tol_zero);
        put("tol_coll", self.tol_coll);
        put("substep_cap", self.substep_cap);
        put("seed", self.seed);
        put("reps", self.reps);
        put("output", self.output);
        put("format", self.format);
        put("threads", self.threads);
        put("boundary", self.boundary);
        put("suite", self.suite);
        put("p_max", self.p_max);
        put("cases", self.cases);
        put("stat", self.stat);
        if self.zero_noise {
            m.insert("zero_noise".into(), "true".into());
        }
        (self.config, m)
    }
}

/// Outcome of reading the command line: a configuration, or text clap
/// already rendered (help, version, usage errors).
#[derive(Debug)]
pub enum Parsed {
    Config(Box<RunConfig>),
    Help(String),
}

/// Parses `args` (without the program name), reading `--config` if given.
pub fn parse_config(args: &[String]) -> Result<Parsed, ConfigError> {
    let argv = std::iter::once("besq".to_string()).chain(args.iter().cloned());
    let parsed = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Ok(Parsed::Help(e.to_string())),
                _ => err(e.to_string().lines().next().unwrap_or("invalid arguments").to_string()),
            };
        }
    };
    let (file, flags) = parsed.into_map();
    let file_text = match file {
        Some(path) => Some(
            std::fs::read_to_string(&path)
                .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?,
        ),
        None => None,
    };
    let mut values = match &file_text {
        Some(text) => parse_file(text)?,
        None => BTreeMap::new(),
    };
    values.extend(flags);
    build(&values).map(|c| Parsed::Config(Box::new(c)))
}

/// Reads `key = value` lines; `#` starts a comment, hyphens in keys are
/// treated as underscores.
pub fn parse_file(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return err(format!("config line {}: expected `key = value`", no + 1));
        };
        let key = k.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return err(format!("unknown key `{key}`"));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

fn num<T: std::str::FromStr>(values: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, ConfigError> {
    match values.get(key) {
        None => Ok(None),
        Some(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| ConfigError(format!("malformed number for `{key}`: `{s}`"))),
    }
}

fn required<T>(v: Option<T>, key: &str) -> Result<T, ConfigError> {
    v.ok_or_else(|| ConfigError(format!("missing required key `{key}`")))
}

fn vector(values: &BTreeMap<String, String>, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
    match values.get(key) {
        None => Ok(None),
        Some(s) => s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| ConfigError(format!("malformed number in `{key}`: `{}`", t.trim())))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some),
    }
}

fn choice<T: Copy>(values: &BTreeMap<String, String>, key: &str, options: &[(&str, T)]) -> Result<Option<T>, ConfigError> {
    match values.get(key) {
        None => Ok(None),
        Some(s) => options
            .iter()
            .find(|(name, _)| name.eq_ignore_ascii_case(s.trim()))
            .map(|(_, v)| Some(*v))
            .ok_or_else(|| {
                let names: Vec<_> = options.iter().map(|(n, _)| *n).collect();
                ConfigError(format!("invalid {key} `{s}`, expected one of {}", names.join(", ")))
            }),
    }
}

fn parse_stat(s: &str) -> Result<Stat, ConfigError> {
    let s = s.trim().to_ascii_lowercase();
    let split = |prefix: &str| s.strip_prefix(prefix).and_then(|r| r.parse::<usize>().ok()).filter(|&n| n >= 1);
    if let Some(n) = split("hit_zero") {
        Ok(Stat::HitZero(n))
    } else if let Some(n) = split("went_negative") {
        Ok(Stat::WentNegative(n))
    } else if let Some(n) = split("e") {
        Ok(Stat::E(n))
    } else if let Some(n) = split("x") {
        Ok(Stat::X(n))
    } else {
        err(format!("invalid stat `{s}`, expected eN, xN, hit_zeroN or went_negativeN"))
    }
}

fn build(values: &BTreeMap<String, String>) -> Result<RunConfig, ConfigError> {
    let command = required(
        choice(
            values,
            "command",
            &[
                ("classify", Command::Classify),
                ("simulate", Command::Simulate),
                ("mc", Command::Mc),
                ("verify", Command::Verify),
            ],
        )?,
        "command",
    )?;
    let model = choice(
        values,
        "model",
        &[
            ("particles", Model::Particles),
            ("wishart", Model::Wishart),
            ("polys", Model::Polys),
            ("glued", Model::Glued),
            ("non-unique", Model::NonUnique),
            ("non_unique", Model::NonUnique),
            ("pinned", Model::Pinned),
        ],
    )?
    .unwrap_or(Model::Particles);
    let format = choice(values, "format", &[("csv", Format::Csv), ("json", Format::Json)])?.unwrap_or(Format::Csv);
    let suite = choice(
        values,
        "suite",
        &[
            ("identities", Suite::Identities),
            ("coefficients", Suite::Coefficients),
            ("roundtrip", Suite::Roundtrip),
            ("brackets", Suite::Brackets),
        ],
    )?;
    let boundary = choice(
        values,
        "boundary",
        &[("local-dimension", ZeroBoundary::LocalDimension), ("local_dimension", ZeroBoundary::LocalDimension), ("free", ZeroBoundary::Free)],
    )?
    .unwrap_or(ZeroBoundary::LocalDimension);
    let zero_noise = match values.get("zero_noise").map(|s| s.trim()) {
        None | Some("false") | Some("0") => false,
        Some("true") | Some("1") | Some("") => true,
        Some(other) => return err(format!("invalid zero_noise `{other}`, expected true or false")),
    };

    let p: Option<usize> = num(values, "p")?;
    let alpha: Option<f64> = num(values, "alpha")?;
    let x0 = vector(values, "x0")?;
    let y0 = vector(values, "y0")?;
    let dt: Option<f64> = num(values, "dt")?;
    let horizon: Option<f64> = num(values, "horizon")?;
    let tol_zero: Option<f64> = num(values, "tol_zero")?;
    let tol_coll: Option<f64> = num(values, "tol_coll")?;
    let substep_cap: Option<u32> = num(values, "substep_cap")?;
    let seed: u64 = num(values, "seed")?.unwrap_or(0);
    let reps: Option<usize> = num(values, "reps")?;
    let threads: Option<usize> = num(values, "threads")?;
    let p_max: usize = num(values, "p_max")?.unwrap_or(8);
    let cases: usize = num(values, "cases")?.unwrap_or(500);
    let stat = match values.get("stat") {
        Some(s) => parse_stat(s)?,
        None => Stat::E(1),
    };
    if threads == Some(0) {
        return err("threads must be at least 1");
    }

    let needs_state = matches!(command, Command::Classify | Command::Simulate | Command::Mc);
    let needs_grid = matches!(command, Command::Simulate | Command::Mc);
    let params = if needs_state {
        let p = required(p, "p")?;
        let alpha = required(alpha, "alpha")?;
        Some(SystemParams::new(p, alpha).map_err(|e| ConfigError(e.to_string()))?)
    } else {
        None
    };

    let (x0, y0) = if let Some(pa) = params {
        let y0 = match y0 {
            Some(v) => {
                if v.len() != pa.p * pa.p {
                    return err(format!("y0 has {} entries ≠ p² = {}", v.len(), pa.p * pa.p));
                }
                Some(SymmetricMatrixState::from_row_major(pa.p, v).map_err(|e| ConfigError(e.to_string()))?)
            }
            None => None,
        };
        let x0 = match x0 {
            Some(v) => {
                if v.len() != pa.p {
                    return err(format!("x0 length {} ≠ p {}", v.len(), pa.p));
                }
                Some(ParticleConfig::from_unsorted(v).map_err(|e| ConfigError(e.to_string()))?)
            }
            None if model == Model::Wishart && y0.is_some() && command != Command::Classify => None,
            None => return err("missing required key `x0`"),
        };
        (x0, y0)
    } else {
        (None, None)
    };

    let grid = if needs_grid {
        let mut g = SimulationGrid::new(required(horizon, "horizon")?, required(dt, "dt")?)
            .map_err(|e| ConfigError(e.to_string()))?
            .with_boundary(boundary);
        if let Some(t) = tol_zero {
            g = g.with_tol_zero(t).map_err(|e| ConfigError(e.to_string()))?;
        }
        if let Some(t) = tol_coll {
            g = g.with_tol_coll(t).map_err(|e| ConfigError(e.to_string()))?;
        }
        if let Some(c) = substep_cap {
            g = g.with_substep_cap(c).map_err(|e| ConfigError(e.to_string()))?;
        }
        Some(g)
    } else {
        None
    };

    let reps = if command == Command::Mc {
        let r = required(reps, "reps")?;
        if r < 2 {
            return err(format!("reps must be at least 2, got {r}"));
        }
        r
    } else {
        reps.unwrap_or(0)
    };
    let suite = if command == Command::Verify { Some(required(suite, "suite")?) } else { suite };
    if command == Command::Verify && (p_max < 2 || cases == 0) {
        return err("verify needs p_max >= 2 and cases >= 1");
    }
    if command == Command::Mc {
        if let (Some(pa), Stat::E(n) | Stat::X(n) | Stat::HitZero(n) | Stat::WentNegative(n)) = (params, stat) {
            if n > pa.p {
                return err(format!("stat `{stat}` refers to index {n} > p {}", pa.p));
            }
        }
    }

    Ok(RunConfig {
        command,
        model,
        params,
        x0,
        y0,
        grid,
        seed,
        reps,
        output: values.get("output").map(PathBuf::from),
        format,
        threads,
        zero_noise,
        suite,
        p_max,
        cases,
        stat,
    })
}
