//! JSON run configuration.
//!
//! Values are resolved in this order, later sources winning: built-in
//! defaults, the config file, the `HEAT_SEED` environment variable, then
//! `--set key=value` flags. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::async_sim::{DelayLaw, DelayModel};
use crate::exec::ExecMode;
use crate::field::{cosine_init, BoundaryCondition, TemperatureField};
use crate::params::SolverParams;
use crate::partition::PartitionSpec;
use crate::sync::Stride;

#[derive(Debug, Error)]
pub enum ConfigError {
    /// Malformed JSON, with the location reported by the parser.
    #[error("{origin}: {message}")]
    Syntax { origin: String, message: String },
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl ConfigError {
    fn invalid(key: &str, message: impl std::fmt::Display) -> Self {
        ConfigError::Invalid { key: key.to_string(), message: message.to_string() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Sync,
    AsyncSim,
    ExecBarriered,
    ExecFree,
}

impl Mode {
    pub fn exec_mode(&self) -> Option<ExecMode> {
        match self {
            Mode::ExecBarriered => Some(ExecMode::Barriered),
            Mode::ExecFree => Some(ExecMode::BarrierFree),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Sync => "sync",
            Mode::AsyncSim => "async-sim",
            Mode::ExecBarriered => "exec-barriered",
            Mode::ExecFree => "exec-free",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Double,
    Single,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum BcKind {
    Dirichlet,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum IcKind {
    Cosine,
    Constant,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Distribution {
    Uniform,
    Fixed,
    Geometric,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    Cosine,
    Constant(f64),
    File(PathBuf),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(rename = "N")]
    n_points: Option<usize>,
    #[serde(rename = "n")]
    per_pe: Option<usize>,
    alpha: Option<f64>,
    dt: Option<f64>,
    dx: Option<f64>,
    r: Option<f64>,
    bc: Option<BcKind>,
    c1: Option<f64>,
    c2: Option<f64>,
    ic: Option<IcKind>,
    ic_value: Option<f64>,
    ic_file: Option<PathBuf>,
    q: Option<usize>,
    distribution: Option<Distribution>,
    delay: Option<usize>,
    p: Option<f64>,
    seed: Option<u64>,
    k_end: Option<usize>,
    stride: Option<usize>,
    mode: Option<Mode>,
    workers: Option<usize>,
    runs: Option<usize>,
    allow_unstable: Option<bool>,
    precision: Option<Precision>,
    bench_sizes: Option<Vec<usize>>,
    bench_reps: Option<usize>,
    bench_steps: Option<usize>,
    out: Option<PathBuf>,
}

/// A fully validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n_points: usize,
    pub per_pe: usize,
    pub params: SolverParams,
    pub bc: BoundaryCondition,
    pub ic: InitialCondition,
    pub model: DelayModel,
    pub k_end: usize,
    pub stride: Stride,
    pub mode: Mode,
    pub workers: usize,
    pub runs: usize,
    pub allow_unstable: bool,
    pub precision: Precision,
    pub bench_sizes: Vec<usize>,
    pub bench_reps: usize,
    pub bench_steps: usize,
    pub out: PathBuf,
}

pub const DEFAULT_K_END: usize = 1000;
pub const DEFAULT_Q: usize = 5;
pub const DEFAULT_RUNS: usize = 50;

impl RunConfig {
    pub fn partition(&self) -> PartitionSpec {
        PartitionSpec::new(self.n_points, self.per_pe).expect("validated partition")
    }

    /// The initial field with boundary values imposed.
    pub fn initial_field(&self) -> Result<TemperatureField, ConfigError> {
        let raw = match &self.ic {
            InitialCondition::Cosine => cosine_init(self.n_points),
            InitialCondition::Constant(c) => TemperatureField::constant(self.n_points, *c),
            InitialCondition::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|source| ConfigError::Io { path: path.clone(), source })?;
                let values = text
                    .split(|c: char| c.is_whitespace() || c == ',')
                    .filter(|t| !t.is_empty())
                    .map(|t| t.parse::<f64>())
                    .collect::<Result<Vec<f64>, _>>()
                    .map_err(|e| ConfigError::invalid("ic_file", e))?;
                if values.len() != self.n_points {
                    return Err(ConfigError::invalid(
                        "ic_file",
                        format!("holds {} values, N = {}", values.len(), self.n_points),
                    ));
                }
                TemperatureField::new(values)
            }
        }
        .map_err(|e| ConfigError::invalid("ic", e))?;
        self.bc.impose(&raw).map_err(|e| ConfigError::invalid("ic", e))
    }
}

/// Parses a set of overrides into a JSON value: valid JSON is taken as is,
/// anything else as a string.
fn parse_value(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|_| Value::String(text.to_string()))
}

/// Builds a [`RunConfig`] from optional config file contents (`origin` names
/// the file in diagnostics), an optional `HEAT_SEED` value and `--set` flags.
pub fn parse_config(
    file: Option<(&str, &str)>,
    env_seed: Option<&str>,
    sets: &[String],
) -> Result<RunConfig, ConfigError> {
    let mut merged = Map::new();
    if let Some((origin, text)) = file {
        // Typed parse first so unknown keys come back with line and column.
        serde_json::from_str::<RawConfig>(text).map_err(|e| ConfigError::Syntax {
            origin: origin.to_string(),
            message: e.to_string(),
        })?;
        if let Value::Object(map) = serde_json::from_str::<Value>(text).expect("parsed above") {
            merged = map;
        }
    }
    if let Some(seed) = env_seed {
        let seed: u64 = seed
            .trim()
            .parse()
            .map_err(|e| ConfigError::invalid("seed", format!("HEAT_SEED={seed}: {e}")))?;
        merged.insert("seed".into(), Value::from(seed));
    }
    for set in sets {
        let (key, value) = set
            .split_once('=')
            .ok_or_else(|| ConfigError::invalid(set, "expected --set key=value"))?;
        let value = parse_value(value);
        let mut single = Map::new();
        single.insert(key.to_string(), value.clone());
        serde_json::from_value::<RawConfig>(Value::Object(single))
            .map_err(|e| ConfigError::invalid(key, e))?;
        merged.insert(key.to_string(), value);
    }
    let raw: RawConfig = serde_json::from_value(Value::Object(merged))
        .map_err(|e| ConfigError::invalid("config", e))?;
    validate(raw)
}

/// Reads `path` (if any) and delegates to [`parse_config`].
pub fn load_config(
    path: Option<&Path>,
    env_seed: Option<&str>,
    sets: &[String],
) -> Result<RunConfig, ConfigError> {
    let text = path
        .map(|p| {
            std::fs::read_to_string(p)
                .map_err(|source| ConfigError::Io { path: p.to_path_buf(), source })
        })
        .transpose()?;
    let origin = path.map(|p| p.display().to_string());
    parse_config(
        origin.as_deref().zip(text.as_deref()),
        env_seed,
        sets,
    )
}

fn validate(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let n_points = raw.n_points.unwrap_or(100);
    if n_points < 3 {
        return Err(ConfigError::invalid("N", format!("need at least 3 points, got {n_points}")));
    }
    let per_pe = raw.per_pe.unwrap_or(1);
    let part = PartitionSpec::new(n_points, per_pe).map_err(|e| ConfigError::invalid("n", e))?;

    let allow_unstable = raw.allow_unstable.unwrap_or(false);
    let params = match raw.r {
        Some(r) => {
            if let Some(key) = [("alpha", raw.alpha), ("dt", raw.dt), ("dx", raw.dx)]
                .iter()
                .find_map(|(k, v)| v.map(|_| *k))
            {
                return Err(ConfigError::invalid(key, "cannot be combined with a direct `r`"));
            }
            if allow_unstable {
                SolverParams::from_r_unchecked(r)
            } else {
                SolverParams::from_r(r)
            }
        }
        None => {
            let (alpha, dt, dx) = (raw.alpha.unwrap_or(0.5), raw.dt.unwrap_or(0.01), raw.dx.unwrap_or(0.1));
            if allow_unstable {
                SolverParams::unchecked(alpha, dt, dx)
            } else {
                SolverParams::new(alpha, dt, dx)
            }
        }
    }
    .map_err(|e| ConfigError::invalid("r", e))?;

    let bc = match raw.bc.unwrap_or(BcKind::Dirichlet) {
        BcKind::Dirichlet => BoundaryCondition::Dirichlet {
            c1: raw.c1.unwrap_or(1.0),
            c2: raw.c2.unwrap_or(0.0),
        },
        BcKind::Periodic => {
            if raw.c1.is_some() || raw.c2.is_some() {
                let key = if raw.c1.is_some() { "c1" } else { "c2" };
                return Err(ConfigError::invalid(key, "only applies to the dirichlet boundary"));
            }
            BoundaryCondition::Periodic
        }
    };

    let ic = match raw.ic.unwrap_or(IcKind::Cosine) {
        IcKind::Cosine => InitialCondition::Cosine,
        IcKind::Constant => InitialCondition::Constant(
            raw.ic_value.ok_or_else(|| ConfigError::invalid("ic_value", "required when ic = constant"))?,
        ),
        IcKind::File => InitialCondition::File(
            raw.ic_file.ok_or_else(|| ConfigError::invalid("ic_file", "required when ic = file"))?,
        ),
    };

    let q = raw.q.unwrap_or(DEFAULT_Q);
    let law = match raw.distribution.unwrap_or(Distribution::Uniform) {
        Distribution::Uniform => DelayLaw::Uniform,
        Distribution::Fixed => DelayLaw::Fixed(
            raw.delay.ok_or_else(|| ConfigError::invalid("delay", "required when distribution = fixed"))?,
        ),
        Distribution::Geometric => DelayLaw::TruncatedGeometric {
            p: raw.p.ok_or_else(|| ConfigError::invalid("p", "required when distribution = geometric"))?,
        },
    };
    let model = DelayModel::new(q, law, raw.seed.unwrap_or(0)).map_err(|e| ConfigError::invalid("q", e))?;

    let stride = match raw.stride {
        Some(s) => Stride::every(s).map_err(|e| ConfigError::invalid("stride", e))?,
        None => Stride::auto(n_points),
    };

    let workers = raw.workers.unwrap_or(part.pe_count());
    if workers != part.pe_count() {
        return Err(ConfigError::invalid(
            "workers",
            format!("must equal N / n = {}, got {workers}", part.pe_count()),
        ));
    }

    let runs = raw.runs.unwrap_or(DEFAULT_RUNS);
    if runs == 0 {
        return Err(ConfigError::invalid("runs", "must be at least 1"));
    }
    let bench_reps = raw.bench_reps.unwrap_or(5);
    if bench_reps < 3 {
        return Err(ConfigError::invalid("bench_reps", "must be at least 3"));
    }
    let bench_sizes = raw.bench_sizes.unwrap_or_else(|| vec![100, 1000, 10_000]);
    if bench_sizes.iter().any(|&n| n < 3) || bench_sizes.is_empty() {
        return Err(ConfigError::invalid("bench_sizes", "sizes must be at least 3"));
    }
    let bench_steps = raw.bench_steps.unwrap_or(1000);
    if bench_steps == 0 {
        return Err(ConfigError::invalid("bench_steps", "must be at least 1"));
    }

    Ok(RunConfig {
        n_points,
        per_pe,
        params,
        bc,
        ic,
        model,
        k_end: raw.k_end.unwrap_or(DEFAULT_K_END),
        stride,
        mode: raw.mode.unwrap_or(Mode::Sync),
        workers,
        runs,
        allow_unstable,
        precision: raw.precision.unwrap_or(Precision::Double),
        bench_sizes,
        bench_reps,
        bench_steps,
        out: raw.out.unwrap_or_else(|| PathBuf::from("heat-out")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sets(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    fn key_of(err: ConfigError) -> String {
        match err {
            ConfigError::Invalid { key, .. } => key,
            other => panic!("expected an invalid-key error, got {other}"),
        }
    }

    #[test]
    fn empty_config_gives_defaults() {
        let cfg = parse_config(Some(("cfg.json", "{}")), None, &[]).unwrap();
        assert_eq!(cfg, parse_config(None, None, &[]).unwrap());
        assert_eq!(cfg.n_points, 100);
        assert_eq!(cfg.per_pe, 1);
        assert_eq!(cfg.params, SolverParams::new(0.5, 0.01, 0.1).unwrap());
        assert_eq!(cfg.bc, BoundaryCondition::Dirichlet { c1: 1.0, c2: 0.0 });
        assert_eq!(cfg.ic, InitialCondition::Cosine);
        assert_eq!(cfg.mode, Mode::Sync);
        assert_eq!(cfg.workers, 100);
        let u0 = cfg.initial_field().unwrap();
        assert_eq!(u0.values()[0], 1.0);
        assert_eq!(u0.values()[99], 0.0);
    }

    #[test]
    fn unstable_r_needs_opt_in() {
        let err = parse_config(Some(("cfg.json", r#"{"r": 0.6}"#)), None, &[]).unwrap_err();
        assert_eq!(key_of(err), "r");
        let cfg = parse_config(Some(("cfg.json", r#"{"r": 0.6, "allow_unstable": true}"#)), None, &[])
            .unwrap();
        assert_eq!(cfg.params.r(), 0.6);
    }

    #[test]
    fn partition_must_divide() {
        let err = parse_config(Some(("cfg.json", r#"{"N": 100, "n": 7}"#)), None, &[]).unwrap_err();
        assert_eq!(key_of(err), "n");
    }

    #[test]
    fn unknown_keys_report_location() {
        let text = "{\n  \"N\": 10,\n  \"bogus\": 1\n}";
        match parse_config(Some(("cfg.json", text)), None, &[]).unwrap_err() {
            ConfigError::Syntax { origin, message } => {
                assert_eq!(origin, "cfg.json");
                assert!(message.contains("bogus"), "{message}");
                assert!(message.contains("line 3"), "{message}");
            }
            other => panic!("unexpected {other}"),
        }
        let err = parse_config(None, None, &sets(&["bogus=1"])).unwrap_err();
        assert_eq!(key_of(err), "bogus");
    }

    #[test]
    fn precedence_file_env_flags() {
        let file = Some(("cfg.json", r#"{"seed": 1, "k_end": 10}"#));
        assert_eq!(parse_config(file, None, &[]).unwrap().model.seed(), 1);
        assert_eq!(parse_config(file, Some("7"), &[]).unwrap().model.seed(), 7);
        let cfg = parse_config(file, Some("7"), &sets(&["seed=9", "k_end=20", "bc=periodic"])).unwrap();
        assert_eq!(cfg.model.seed(), 9);
        assert_eq!(cfg.k_end, 20);
        assert_eq!(cfg.bc, BoundaryCondition::Periodic);
        assert_eq!(key_of(parse_config(None, Some("x"), &[]).unwrap_err()), "seed");
    }

    #[test]
    fn semantic_errors_name_their_key() {
        let cases: &[(&[&str], &str)] = &[
            (&["r=0.25", "dt=0.1"], "dt"),
            (&["bc=periodic", "c1=2"], "c1"),
            (&["ic=constant"], "ic_value"),
            (&["distribution=fixed"], "delay"),
            (&["distribution=fixed", "delay=5", "q=5"], "q"),
            (&["N=100", "n=25", "workers=3"], "workers"),
            (&["stride=0"], "stride"),
            (&["runs=0"], "runs"),
            (&["bench_reps=2"], "bench_reps"),
            (&["N=2"], "N"),
            (&["mode=warp"], "mode"),
        ];
        for (flags, key) in cases {
            let err = parse_config(None, None, &sets(flags)).unwrap_err();
            assert_eq!(key_of(err), *key, "{flags:?}");
        }
    }

    #[test]
    fn modes_and_direct_r() {
        let cfg = parse_config(None, None, &sets(&["mode=exec-free", "r=0.25", "N=100", "n=25"])).unwrap();
        assert_eq!(cfg.mode.exec_mode(), Some(ExecMode::BarrierFree));
        assert_eq!(cfg.params.r(), 0.25);
        assert_eq!(cfg.workers, 4);
        assert_eq!(cfg.partition().pe_count(), 4);
    }

    #[test]
    fn file_initial_condition() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ic.txt");
        std::fs::write(&path, "0.5\n0.25\n0.125\n0.0\n").unwrap();
        let file_set = format!("ic_file={}", path.display());
        let cfg = parse_config(None, None, &sets(&["N=4", "ic=file", &file_set, "bc=periodic"])).unwrap();
        assert_eq!(cfg.initial_field().unwrap().values(), &[0.5, 0.25, 0.125, 0.0]);
        let cfg = parse_config(None, None, &sets(&["N=5", "ic=file", &file_set])).unwrap();
        assert_eq!(key_of(cfg.initial_field().unwrap_err()), "ic_file");
    }
}
