//! JSON model configuration.
//!
//! ```json
//! {
//!   "gbar": 1.0, "a": 3.0, "beta": 1.0, "gamma": 1.0,
//!   "l": 0.7, "c": 0.8, "phi": 0.0, "g": 0.9,
//!   "sweep": { "g": {"lo": 0.7, "hi": 1.0, "steps": 50},
//!              "phi": {"lo": 0.0, "hi": 1.0, "steps": 50} },
//!   "sim": { "n": 100000, "seed": 42, "profile": "aa" }
//! }
//! ```
//!
//! `z_table` (a CSV path, relative to the config file) may replace `gbar` and
//! `beta`; `w_table` may replace `a` and `gamma`.

use std::fmt;
use std::fs::File;
use std::path::{Path, PathBuf};

use externalization_core::error::Error as CoreError;
use externalization_core::sweep::{Axis, SweepSpec};
use externalization_core::{ActionProfile, Curve, ModelParams, PowerFamilyW, PowerFamilyZ, Tabulated};
use serde_json::{Map, Value};

const TOP_KEYS: [&str; 12] = [
    "gbar", "a", "beta", "gamma", "l", "c", "phi", "g", "sweep", "sim", "z_table", "w_table",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SimSection {
    pub n: Option<u64>,
    pub seed: Option<u64>,
    pub profile: Option<ActionProfile>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub params: ModelParams,
    pub sweep: Option<SweepSpec>,
    pub sim: Option<SimSection>,
}

#[derive(Debug)]
pub enum ConfigError {
    /// Unreadable config or table file.
    Io { path: PathBuf, source: std::io::Error },
    /// Malformed JSON.
    Syntax(String),
    /// Problem attributable to one key.
    Key { key: String, message: String },
}

impl ConfigError {
    fn key(key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Key {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn is_io(&self) -> bool {
        matches!(self, ConfigError::Io { .. })
    }

    /// The offending key, if there is one.
    pub fn key_name(&self) -> Option<&str> {
        match self {
            ConfigError::Key { key, .. } => Some(key),
            _ => None,
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io { path, source } => write!(f, "cannot read {}: {source}", path.display()),
            ConfigError::Syntax(msg) => write!(f, "malformed config: {msg}"),
            ConfigError::Key { key, message } => write!(f, "config key \"{key}\": {message}"),
        }
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

pub fn load(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse(&text, base)
}

/// Parses config text; table paths are resolved against `base_dir`.
pub fn parse(text: &str, base_dir: &Path) -> Result<Config> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    let Value::Object(obj) = value else {
        return Err(ConfigError::Syntax("top level must be an object".into()));
    };
    reject_unknown(&obj, &TOP_KEYS, "")?;

    let z = match obj.get("z_table") {
        Some(v) => {
            forbid_with(&obj, "z_table", &["gbar", "beta"])?;
            Curve::Tabulated(load_table(v, "z_table", base_dir)?)
        }
        None => {
            let gbar = number(&obj, "gbar")?;
            let beta = number(&obj, "beta")?;
            Curve::PowerZ(PowerFamilyZ::new(gbar, beta).map_err(domain_error)?)
        }
    };
    let w = match obj.get("w_table") {
        Some(v) => {
            forbid_with(&obj, "w_table", &["a", "gamma"])?;
            Curve::Tabulated(load_table(v, "w_table", base_dir)?)
        }
        None => {
            let a = number(&obj, "a")?;
            let gamma = number(&obj, "gamma")?;
            Curve::PowerW(PowerFamilyW::new(a, gamma).map_err(domain_error)?)
        }
    };
    let params = ModelParams {
        z,
        w,
        l: number(&obj, "l")?,
        c: number(&obj, "c")?,
        phi: number(&obj, "phi")?,
        g: number(&obj, "g")?,
    };
    if let Err(e) = params.validate() {
        return Err(domain_error(e));
    }

    let sweep = obj.get("sweep").map(parse_sweep).transpose()?;
    let sim = obj.get("sim").map(parse_sim).transpose()?;
    Ok(Config { params, sweep, sim })
}

fn domain_error(e: CoreError) -> ConfigError {
    match &e {
        CoreError::Validation(vs) => {
            let key = vs.first().map_or("params", |v| config_key(v.key()));
            ConfigError::key(key, e.to_string())
        }
        CoreError::ParameterDomain { name, .. } => ConfigError::key(*name, e.to_string()),
        _ => ConfigError::key("params", e.to_string()),
    }
}

/// Role violations are reported against the function, not a config key.
fn config_key(key: &'static str) -> &'static str {
    match key {
        "z" => "z_table",
        "w" => "w_table",
        other => other,
    }
}

fn reject_unknown(obj: &Map<String, Value>, allowed: &[&str], prefix: &str) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(ConfigError::key(
            format!("{prefix}{k}"),
            format!("unknown key, expected one of: {}", allowed.join(", ")),
        )),
        None => Ok(()),
    }
}

fn forbid_with(obj: &Map<String, Value>, table: &str, keys: &[&str]) -> Result<()> {
    match keys.iter().find(|k| obj.contains_key(**k)) {
        Some(k) => Err(ConfigError::key(*k, format!("cannot be combined with {table}"))),
        None => Ok(()),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| ConfigError::key(path, "missing required field"))
}

fn number(obj: &Map<String, Value>, key: &str) -> Result<f64> {
    number_at(obj, key, key)
}

fn number_at(obj: &Map<String, Value>, key: &str, path: &str) -> Result<f64> {
    field(obj, key, path)?
        .as_f64()
        .ok_or_else(|| ConfigError::key(path, "expected a number"))
}

fn count_at(v: &Value, path: &str) -> Result<u64> {
    v.as_u64()
        .ok_or_else(|| ConfigError::key(path, "expected a non-negative integer"))
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| ConfigError::key(path, "expected an object"))
}

fn load_table(v: &Value, key: &str, base_dir: &Path) -> Result<Tabulated> {
    let rel = v
        .as_str()
        .ok_or_else(|| ConfigError::key(key, "expected a file path"))?;
    let path = base_dir.join(rel);
    let file = File::open(&path).map_err(|source| ConfigError::Io { path, source })?;
    Tabulated::from_csv(file).map_err(|e| ConfigError::key(key, e.to_string()))
}

fn parse_axis(v: &Value, path: &str) -> Result<Axis> {
    let obj = object(v, path)?;
    reject_unknown(obj, &["lo", "hi", "steps"], &format!("{path}."))?;
    let steps_path = format!("{path}.steps");
    let steps = count_at(field(obj, "steps", &steps_path)?, &steps_path)?;
    Ok(Axis::new(
        number_at(obj, "lo", &format!("{path}.lo"))?,
        number_at(obj, "hi", &format!("{path}.hi"))?,
        usize::try_from(steps).map_err(|_| ConfigError::key(steps_path, "too large"))?,
    ))
}

fn parse_sweep(v: &Value) -> Result<SweepSpec> {
    let obj = object(v, "sweep")?;
    reject_unknown(obj, &["g", "phi"], "sweep.")?;
    let g = parse_axis(field(obj, "g", "sweep.g")?, "sweep.g")?;
    let phi = parse_axis(field(obj, "phi", "sweep.phi")?, "sweep.phi")?;
    Ok(SweepSpec::new(g, phi))
}

fn parse_sim(v: &Value) -> Result<SimSection> {
    let obj = object(v, "sim")?;
    reject_unknown(obj, &["n", "seed", "profile"], "sim.")?;
    let n = obj.get("n").map(|v| count_at(v, "sim.n")).transpose()?;
    if n == Some(0) {
        return Err(ConfigError::key("sim.n", "must be at least 1"));
    }
    let seed = obj.get("seed").map(|v| count_at(v, "sim.seed")).transpose()?;
    let profile = obj
        .get("profile")
        .map(|v| {
            v.as_str()
                .ok_or_else(|| ConfigError::key("sim.profile", "expected a string"))?
                .parse::<ActionProfile>()
                .map_err(|e| ConfigError::key("sim.profile", e))
        })
        .transpose()?;
    Ok(SimSection { n, seed, profile })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    const P0: &str = r#"{"gbar": 1.0, "a": 3.0, "beta": 1.0, "gamma": 1.0,
        "l": 0.7, "c": 0.8, "phi": 0.0, "g": 0.9}"#;

    fn with(edit: impl FnOnce(&mut Map<String, Value>)) -> String {
        let mut v: Value = serde_json::from_str(P0).unwrap();
        edit(v.as_object_mut().unwrap());
        v.to_string()
    }

    fn err_key(text: &str) -> String {
        parse(text, Path::new(".")).unwrap_err().key_name().unwrap().to_string()
    }

    #[test]
    fn p0_round_trips_through_validation() {
        let cfg = parse(P0, Path::new(".")).unwrap();
        let m = cfg.params.validate().unwrap();
        assert_eq!((m.gbar(), m.a(), m.l(), m.c(), m.phi(), m.g()), (1.0, 3.0, 0.7, 0.8, 0.0, 0.9));
        assert!(cfg.sweep.is_none());
        assert!(cfg.sim.is_none());
    }

    #[test]
    fn errors_name_the_key() {
        assert_eq!(err_key(&with(|o| { o.insert("phi".into(), 1.5.into()); })), "phi");
        assert_eq!(err_key(&with(|o| { o.remove("c"); })), "c");
        assert_eq!(err_key(&with(|o| { o.insert("g".into(), "big".into()); })), "g");
        assert_eq!(err_key(&with(|o| { o.insert("C".into(), 0.8.into()); })), "C");
        assert_eq!(err_key(&with(|o| { o.insert("beta".into(), 1.5.into()); })), "beta");
        assert_eq!(err_key(&with(|o| { o.insert("a".into(), 0.9.into()); })), "a");
        assert_eq!(err_key(&with(|o| { o.insert("l".into(), 1.2.into()); })), "l");
    }

    #[test]
    fn syntax_errors_are_not_key_errors() {
        let e = parse("{\"gbar\": ", Path::new(".")).unwrap_err();
        assert!(matches!(e, ConfigError::Syntax(_)));
        assert!(matches!(parse("[1]", Path::new(".")), Err(ConfigError::Syntax(_))));
    }

    #[test]
    fn sweep_and_sim_sections() {
        let text = with(|o| {
            o.insert(
                "sweep".into(),
                serde_json::json!({"g": {"lo": 0.7, "hi": 1.0, "steps": 50},
                                   "phi": {"lo": 0.0, "hi": 1.0, "steps": 40}}),
            );
            o.insert("sim".into(), serde_json::json!({"n": 1000, "seed": 7, "profile": "ap"}));
        });
        let cfg = parse(&text, Path::new(".")).unwrap();
        let s = cfg.sweep.unwrap();
        assert_eq!((s.g.steps, s.phi.steps), (50, 40));
        let sim = cfg.sim.unwrap();
        assert_eq!((sim.n, sim.seed, sim.profile), (Some(1000), Some(7), Some(ActionProfile::AP)));

        let bad = with(|o| {
            o.insert("sweep".into(), serde_json::json!({"g": {"lo": 0.7, "hi": 1.0}}));
        });
        assert_eq!(err_key(&bad), "sweep.g.steps");
        let bad = with(|o| {
            o.insert("sim".into(), serde_json::json!({"profile": "xy"}));
        });
        assert_eq!(err_key(&bad), "sim.profile");
    }

    #[test]
    fn tables_resolve_relative_to_config() {
        let dir = tempfile::tempdir().unwrap();
        let mut f = File::create(dir.path().join("z.csv")).unwrap();
        writeln!(f, "x,z\n0,0\n0.5,0.6\n1,1").unwrap();
        let mut f = File::create(dir.path().join("w.csv")).unwrap();
        writeln!(f, "0,1\n3,0").unwrap();
        let text = r#"{"z_table": "z.csv", "w_table": "w.csv",
            "l": 0.7, "c": 0.8, "phi": 0.0, "g": 0.9}"#;
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, text).unwrap();
        let cfg = load(&path).unwrap();
        let m = cfg.params.validate().unwrap();
        assert_eq!((m.gbar(), m.a()), (1.0, 3.0));

        let mixed = r#"{"z_table": "z.csv", "gbar": 1.0, "a": 3.0, "gamma": 1.0,
            "l": 0.7, "c": 0.8, "phi": 0.0, "g": 0.9}"#;
        assert_eq!(parse(mixed, dir.path()).unwrap_err().key_name(), Some("gbar"));
        let missing = r#"{"z_table": "nope.csv", "a": 3.0, "gamma": 1.0,
            "l": 0.7, "c": 0.8, "phi": 0.0, "g": 0.9}"#;
        assert!(parse(missing, dir.path()).unwrap_err().is_io());
    }
}
