//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment and blank lines are ignored.
//! Keys are dotted (`model.kind`, `collapse.theta`) but there is no nesting.

use std::collections::BTreeMap;
use std::path::PathBuf;

use collapse_core::{CollapseLaw, JumpDist, LevyModel};

use crate::error::{CliError, Result};

const KNOWN_KEYS: &[&str] = &[
    "model.kind",
    "model.c",
    "model.sigma2",
    "model.d",
    "model.gamma",
    "model.jumps",
    "model.mu",
    "model.shape",
    "model.rate",
    "model.delta",
    "model.xm",
    "model.size",
    "lambda",
    "collapse",
    "collapse.theta",
    "alphas",
    "moments",
    "engine",
    "n_samples",
    "burn_in",
    "step_h",
    "eps_trunc",
    "thresholds",
    "replications",
    "threads",
    "reservoir",
    "seed",
    "output",
    "suite",
    "tolerance",
];

/// Simulation route.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    /// Lindley-type recursion on the collapse epochs.
    Embedded,
    /// Independent draws from the truncated max representation.
    Loynes,
    /// Continuous-time paths observed just after each collapse.
    Path,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Embedded => "embedded",
            Engine::Loynes => "loynes",
            Engine::Path => "path",
        }
    }
}

/// Named group of checks run by `validate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    BmClosedForm,
    Mm1ClosedForm,
    FixedPoint,
    Continuity,
    Moments,
    MonteCarlo,
    Atom,
    Routes,
    Coupling,
    Euler,
    Tail,
    Explicit,
    All,
}

impl Suite {
    pub const ALL_NAMES: &'static [(&'static str, Suite)] = &[
        ("bm-closed-form", Suite::BmClosedForm),
        ("mm1-closed-form", Suite::Mm1ClosedForm),
        ("fixed-point", Suite::FixedPoint),
        ("continuity", Suite::Continuity),
        ("moments", Suite::Moments),
        ("monte-carlo", Suite::MonteCarlo),
        ("atom", Suite::Atom),
        ("routes", Suite::Routes),
        ("coupling", Suite::Coupling),
        ("euler", Suite::Euler),
        ("tail", Suite::Tail),
        ("explicit", Suite::Explicit),
        ("all", Suite::All),
    ];

    pub fn name(self) -> &'static str {
        Suite::ALL_NAMES
            .iter()
            .find(|(_, s)| *s == self)
            .map(|(n, _)| *n)
            .expect("every suite is named")
    }

    fn parse(s: &str) -> Option<Suite> {
        Suite::ALL_NAMES.iter().find(|(n, _)| *n == s).map(|(_, s)| *s)
    }
}

/// Parsed and validated configuration shared by every command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: LevyModel,
    pub collapse: CollapseLaw,
    pub lambda: f64,
    /// Transform arguments, strictly increasing and nonnegative. May be empty.
    pub alphas: Vec<f64>,
    /// Highest moment order reported by `analyze`.
    pub moments: usize,
    pub engine: Engine,
    /// Samples per replication (collapses for the path engine).
    pub n_samples: u64,
    pub burn_in: u64,
    pub step_h: Option<f64>,
    pub eps_trunc: f64,
    pub thresholds: Vec<f64>,
    pub replications: u64,
    pub threads: usize,
    /// Per-replication cap on the subsample kept for ECDFs and sample dumps.
    pub reservoir: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub suite: Option<Suite>,
    pub tolerance: Option<f64>,
}

struct Entry {
    line: usize,
    value: String,
}

struct Fields {
    map: BTreeMap<String, Entry>,
}

impl Fields {
    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|e| e.value.as_str())
    }

    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn f64_opt(&self, key: &str) -> Result<Option<f64>> {
        self.raw(key).map(|v| parse_f64(key, v)).transpose()
    }

    fn f64_req(&self, key: &str) -> Result<f64> {
        self.f64_opt(key)?.ok_or_else(|| CliError::validation(key, "missing required key"))
    }

    fn positive(&self, key: &str) -> Result<f64> {
        let x = self.f64_req(key)?;
        if x > 0.0 && x.is_finite() {
            Ok(x)
        } else {
            Err(CliError::validation(key, format!("must be positive and finite, got {x}")))
        }
    }

    fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => parse_count(key, v),
        }
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(v) = self.raw(key) else { return Ok(None) };
        let xs = v
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| parse_f64(key, s))
            .collect::<Result<Vec<_>>>()?;
        if xs.is_empty() {
            return Err(CliError::validation(key, "empty list"));
        }
        if xs.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(CliError::validation(key, "entries must be finite and nonnegative"));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::validation(key, "entries must be strictly increasing"));
        }
        Ok(Some(xs))
    }

    /// Rejects keys that only make sense for another model kind or option.
    fn forbid(&self, keys: &[&str], reason: &str) -> Result<()> {
        match keys.iter().find(|k| self.has(k)) {
            Some(k) => Err(CliError::validation(*k, format!("not used {reason}"))),
            None => Ok(()),
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| CliError::validation(key, format!("expected a number, got '{v}'")))
}

/// Nonnegative integer, also accepting exact float notation such as `1e6`.
fn parse_count(key: &str, v: &str) -> Result<u64> {
    if let Ok(n) = v.parse::<u64>() {
        return Ok(n);
    }
    match v.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 2f64.powi(63) => Ok(x as u64),
        _ => Err(CliError::validation(key, format!("expected a nonnegative integer, got '{v}'"))),
    }
}

fn tokenize(text: &str) -> Result<Fields> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(CliError::Parse {
                line,
                msg: format!("expected 'key = value', got '{content}'"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(CliError::Parse {
                line,
                msg: "empty key".into(),
            });
        }
        if !KNOWN_KEYS.contains(&key) {
            return Err(CliError::Parse {
                line,
                msg: format!("unknown key '{key}'"),
            });
        }
        let entry = Entry {
            line,
            value: value.to_string(),
        };
        if let Some(prev) = map.insert(key.to_string(), entry) {
            return Err(CliError::Parse {
                line,
                msg: format!("duplicate key '{key}' (first set on line {})", prev.line),
            });
        }
    }
    Ok(Fields { map })
}

const BM_KEYS: &[&str] = &["model.c", "model.sigma2"];
const CPP_KEYS: &[&str] = &["model.d", "model.gamma", "model.jumps"];
const JUMP_KEYS: &[&str] = &["model.mu", "model.shape", "model.rate", "model.delta", "model.xm", "model.size"];

fn jumps(f: &Fields) -> Result<JumpDist> {
    let kind = f
        .raw("model.jumps")
        .ok_or_else(|| CliError::validation("model.jumps", "missing required key"))?;
    let (dist, used): (JumpDist, &[&str]) = match kind {
        "exp" => (JumpDist::Exponential { mu: f.positive("model.mu")? }, &["model.mu"]),
        "erlang" => {
            let shape = parse_count("model.shape", f.raw("model.shape").unwrap_or(""))?;
            let shape = u32::try_from(shape)
                .ok()
                .filter(|&k| k >= 1)
                .ok_or_else(|| CliError::validation("model.shape", "must be an integer in [1, 2^32)"))?;
            (
                JumpDist::Erlang {
                    shape,
                    rate: f.positive("model.rate")?,
                },
                &["model.shape", "model.rate"],
            )
        }
        "pareto" => {
            let delta = f.positive("model.delta")?;
            if delta <= 1.0 {
                return Err(CliError::validation(
                    "model.delta",
                    format!("tail index {delta} gives infinite mean jumps"),
                ));
            }
            (
                JumpDist::Pareto {
                    delta,
                    xm: f.positive("model.xm")?,
                },
                &["model.delta", "model.xm"],
            )
        }
        "deterministic" => (JumpDist::Deterministic { size: f.positive("model.size")? }, &["model.size"]),
        other => {
            return Err(CliError::validation(
                "model.jumps",
                format!("expected exp, erlang, pareto or deterministic, got '{other}'"),
            ))
        }
    };
    let unused: Vec<&str> = JUMP_KEYS.iter().copied().filter(|k| !used.contains(k)).collect();
    f.forbid(&unused, &format!("with model.jumps = {kind}"))?;
    Ok(dist)
}

fn brownian(f: &Fields) -> Result<LevyModel> {
    let c = f.f64_req("model.c")?;
    let sigma2 = f.f64_req("model.sigma2")?;
    if !c.is_finite() {
        return Err(CliError::validation("model.c", "must be finite"));
    }
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(CliError::validation("model.sigma2", "must be nonnegative and finite"));
    }
    if sigma2 == 0.0 && c >= 0.0 {
        return Err(CliError::validation(
            "model.c",
            "with sigma2 = 0 the drift must be negative, otherwise the input never decreases",
        ));
    }
    Ok(LevyModel::brownian(c, sigma2))
}

fn compound(f: &Fields) -> Result<LevyModel> {
    let d = f.f64_req("model.d")?;
    if !(d > 0.0 && d.is_finite()) {
        return Err(CliError::validation(
            "model.d",
            format!("drift rate must be positive (got {d}); otherwise the input is a subordinator"),
        ));
    }
    let gamma = f.f64_req("model.gamma")?;
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(CliError::validation("model.gamma", "must be nonnegative and finite"));
    }
    Ok(LevyModel::cpp(d, gamma, jumps(f)?))
}

fn model(f: &Fields) -> Result<LevyModel> {
    let kind = f
        .raw("model.kind")
        .ok_or_else(|| CliError::validation("model.kind", "missing required key"))?;
    let m = match kind {
        "bm" => {
            f.forbid(CPP_KEYS, "with model.kind = bm")?;
            f.forbid(JUMP_KEYS, "with model.kind = bm")?;
            brownian(f)?
        }
        "cpp" => {
            f.forbid(BM_KEYS, "with model.kind = cpp")?;
            compound(f)?
        }
        "sum" => {
            // Drift-free compound part is allowed here: the Brownian part
            // already keeps the sum from being nondecreasing.
            let c = f.f64_req("model.c")?;
            let sigma2 = f.f64_req("model.sigma2")?;
            if !(sigma2 > 0.0 && sigma2.is_finite() && c.is_finite()) {
                return Err(CliError::validation("model.sigma2", "sum models need a positive sigma2"));
            }
            let d = f.f64_req("model.d")?;
            let gamma = f.f64_req("model.gamma")?;
            if !(d >= 0.0 && gamma >= 0.0 && d.is_finite() && gamma.is_finite()) {
                return Err(CliError::validation("model.d", "drift and rate must be nonnegative"));
            }
            LevyModel::Sum {
                parts: vec![LevyModel::brownian(c, sigma2), LevyModel::cpp(d, gamma, jumps(f)?)],
            }
        }
        other => {
            return Err(CliError::validation(
                "model.kind",
                format!("expected bm, cpp or sum, got '{other}'"),
            ))
        }
    };
    m.validate().map_err(|e| CliError::validation("model.kind", e))?;
    Ok(m)
}

fn collapse(f: &Fields) -> Result<CollapseLaw> {
    let law = match f.raw("collapse").unwrap_or("uniform") {
        "uniform" => {
            f.forbid(&["collapse.theta"], "with collapse = uniform")?;
            CollapseLaw::Uniform01
        }
        "beta" => CollapseLaw::Beta1 {
            theta: f.positive("collapse.theta")?,
        },
        other => {
            return Err(CliError::validation(
                "collapse",
                format!("expected uniform or beta, got '{other}'"),
            ))
        }
    };
    law.validate().map_err(|e| CliError::validation("collapse.theta", e))?;
    Ok(law)
}

/// Explicit `engine` key, or the exact embedded route when the model has one
/// and the path engine otherwise.
fn engine(f: &Fields, model: &LevyModel, lambda: f64) -> Result<Engine> {
    let exact = collapse_core::sim::WlSampler::for_model(model, lambda);
    let e = match f.raw("engine") {
        None if exact.is_ok() => return Ok(Engine::Embedded),
        None => return Ok(Engine::Path),
        Some("embedded") => Engine::Embedded,
        Some("loynes") => Engine::Loynes,
        Some("path") => Engine::Path,
        Some(other) => {
            return Err(CliError::validation(
                "engine",
                format!("expected embedded, loynes or path, got '{other}'"),
            ))
        }
    };
    if e != Engine::Path {
        exact.map_err(|err| CliError::validation("engine", err))?;
    }
    Ok(e)
}

impl RunConfig {
    /// Parses `text`; `seed_override` replaces any `seed` key and satisfies
    /// the requirement that a seed be present.
    pub fn parse(text: &str, seed_override: Option<u64>) -> Result<RunConfig> {
        let f = tokenize(text)?;
        let model = model(&f)?;
        let collapse = collapse(&f)?;
        let lambda = f.positive("lambda")?;
        let engine = engine(&f, &model, lambda)?;

        let step_h = f.f64_opt("step_h")?;
        if let Some(h) = step_h {
            if !(h > 0.0 && h.is_finite()) {
                return Err(CliError::validation("step_h", "must be positive"));
            }
        }
        if f.raw("engine") == Some("path") && model.sigma2() > 0.0 && step_h.is_none() {
            return Err(CliError::validation(
                "step_h",
                "the path engine needs a time step when the input has a Brownian part",
            ));
        }
        let eps_trunc = f.f64_opt("eps_trunc")?.unwrap_or(collapse_core::sim::DEFAULT_EPS_TRUNC);
        if !(eps_trunc > 0.0 && eps_trunc < 1.0) {
            return Err(CliError::validation("eps_trunc", "must lie in (0, 1)"));
        }

        let replications = f.u64_or("replications", 1)?;
        if replications == 0 {
            return Err(CliError::validation("replications", "must be at least 1"));
        }
        let threads = f.u64_or("threads", 1)?;
        if threads == 0 {
            return Err(CliError::validation("threads", "must be at least 1"));
        }
        let n_samples = f.u64_or("n_samples", 100_000)?;
        if n_samples == 0 {
            return Err(CliError::validation("n_samples", "must be at least 1"));
        }

        let seed = match (seed_override, f.raw("seed")) {
            (Some(s), _) => s,
            (None, Some(v)) => parse_count("seed", v)?,
            (None, None) => return Err(CliError::validation("seed", "missing required key")),
        };

        let suite = match f.raw("suite") {
            None => None,
            Some(s) => Some(Suite::parse(s).ok_or_else(|| CliError::validation("suite", format!("unknown suite '{s}'")))?),
        };
        let tolerance = f.f64_opt("tolerance")?;
        if let Some(t) = tolerance {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::validation("tolerance", "must be positive"));
            }
        }

        Ok(RunConfig {
            model,
            collapse,
            lambda,
            alphas: f.list("alphas")?.unwrap_or_default(),
            moments: f.u64_or("moments", 4)? as usize,
            engine,
            n_samples,
            burn_in: f.u64_or("burn_in", 1_000)?,
            step_h,
            eps_trunc,
            thresholds: f.list("thresholds")?.unwrap_or_default(),
            replications,
            threads: threads as usize,
            reservoir: f.u64_or("reservoir", 10_000)? as usize,
            seed,
            output: f.raw("output").map(PathBuf::from),
            suite,
            tolerance,
        })
    }
}

/// Parses a configuration that must carry its own seed.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    RunConfig::parse(text, None)
}
