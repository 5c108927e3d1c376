//! Scenario files: TOML whose non-reserved keys are flattened into dotted
//! parameter names (`behavior.C = 1.0`). Every mode declares its full key
//! set with defaults; a key outside that set is an error.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use stigmergy::{Error, Result};
use toml::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    ConstantGradient,
    SingleTrap,
    MultiTrapPhase,
    Construction,
    Deconstruction,
    Robustness2x2,
    Continuum,
}

impl Mode {
    pub const ALL: [Mode; 7] = [
        Mode::ConstantGradient,
        Mode::SingleTrap,
        Mode::MultiTrapPhase,
        Mode::Construction,
        Mode::Deconstruction,
        Mode::Robustness2x2,
        Mode::Continuum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::ConstantGradient => "constant_gradient",
            Mode::SingleTrap => "single_trap",
            Mode::MultiTrapPhase => "multi_trap_phase",
            Mode::Construction => "construction",
            Mode::Deconstruction => "deconstruction",
            Mode::Robustness2x2 => "robustness_2x2",
            Mode::Continuum => "continuum",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::config("mode", format!("unknown mode `{s}`")))
    }
}

/// A flat, ordered map of dotted parameter names to values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Params(BTreeMap<String, Value>);

impl Params {
    pub fn new() -> Self {
        Params::default()
    }

    /// Declare a key with its default.
    pub fn insert(&mut self, key: &str, value: impl Into<Value>) {
        self.0.insert(key.to_string(), value.into());
    }

    pub fn contains(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.get(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &String> {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Value)> {
        self.0.iter()
    }

    /// Override a declared key. The new value is coerced to the type of
    /// the default.
    pub fn set(&mut self, key: &str, value: Value) -> Result<()> {
        let old = self
            .0
            .get(key)
            .ok_or_else(|| Error::config(key, "unknown parameter"))?;
        let v = coerce(key, old, value)?;
        self.0.insert(key.to_string(), v);
        Ok(())
    }

    fn value(&self, key: &str) -> Result<&Value> {
        self.0.get(key).ok_or_else(|| Error::config(key, "missing parameter"))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        match self.value(key)? {
            Value::Float(x) => Ok(*x),
            Value::Integer(i) => Ok(*i as f64),
            _ => Err(Error::config(key, "expected a number")),
        }
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        match self.value(key)? {
            Value::Integer(i) if *i >= 0 => Ok(*i as u64),
            _ => Err(Error::config(key, "expected a nonnegative integer")),
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        Ok(self.u64(key)? as usize)
    }

    pub fn bool(&self, key: &str) -> Result<bool> {
        match self.value(key)? {
            Value::Boolean(b) => Ok(*b),
            _ => Err(Error::config(key, "expected true or false")),
        }
    }

    pub fn str(&self, key: &str) -> Result<&str> {
        match self.value(key)? {
            Value::String(s) => Ok(s),
            _ => Err(Error::config(key, "expected a string")),
        }
    }

    pub fn parse<T: FromStr>(&self, key: &str) -> Result<T> {
        let s = self.str(key)?;
        s.parse().map_err(|_| Error::config(key, format!("unrecognised value `{s}`")))
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        match self.value(key)? {
            Value::Array(a) => a
                .iter()
                .map(|v| match v {
                    Value::Float(x) => Ok(*x),
                    Value::Integer(i) => Ok(*i as f64),
                    _ => Err(Error::config(key, "expected a list of numbers")),
                })
                .collect(),
            _ => Err(Error::config(key, "expected a list of numbers")),
        }
    }

    pub fn usize_list(&self, key: &str) -> Result<Vec<usize>> {
        match self.value(key)? {
            Value::Array(a) => a
                .iter()
                .map(|v| match v {
                    Value::Integer(i) if *i >= 0 => Ok(*i as usize),
                    _ => Err(Error::config(key, "expected a list of nonnegative integers")),
                })
                .collect(),
            _ => Err(Error::config(key, "expected a list of nonnegative integers")),
        }
    }

    /// Dotted-key TOML, one parameter per line, keys sorted.
    pub fn to_toml(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.0 {
            out.push_str(&format!("{} = {}\n", quote_key(k), render(v)));
        }
        out
    }
}

fn coerce(key: &str, old: &Value, new: Value) -> Result<Value> {
    let bad = || Error::config(key, format!("expected {}", old.type_str()));
    match (old, new) {
        (Value::Float(_), Value::Float(x)) => Ok(Value::Float(x)),
        (Value::Float(_), Value::Integer(i)) => Ok(Value::Float(i as f64)),
        (Value::Integer(_), Value::Integer(i)) => Ok(Value::Integer(i)),
        (Value::Integer(_), Value::Float(x)) if x.fract() == 0.0 && x.is_finite() => Ok(Value::Integer(x as i64)),
        (Value::Boolean(_), Value::Boolean(b)) => Ok(Value::Boolean(b)),
        (Value::String(_), Value::String(s)) => Ok(Value::String(s)),
        (Value::Array(proto), Value::Array(items)) => {
            let elem = proto.first().cloned().unwrap_or(Value::Float(0.0));
            items
                .into_iter()
                .map(|v| coerce(key, &elem, v))
                .collect::<Result<Vec<_>>>()
                .map(Value::Array)
        }
        // a scalar where a list is expected becomes a one-element list
        (Value::Array(proto), v) if !matches!(v, Value::Table(_)) => {
            let elem = proto.first().cloned().unwrap_or(Value::Float(0.0));
            Ok(Value::Array(vec![coerce(key, &elem, v)?]))
        }
        _ => Err(bad()),
    }
}

fn quote_key(key: &str) -> String {
    key.split('.')
        .map(|part| {
            if !part.is_empty() && part.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                part.to_string()
            } else {
                format!("{part:?}")
            }
        })
        .collect::<Vec<_>>()
        .join(".")
}

fn render(v: &Value) -> String {
    match v {
        // keep floats recognisable as floats on re-read
        Value::Float(x) if x.fract() == 0.0 && x.is_finite() && x.abs() < 1e15 => format!("{x:.1}"),
        Value::Float(x) => format!("{x:?}"),
        Value::Array(items) => format!("[{}]", items.iter().map(render).collect::<Vec<_>>().join(", ")),
        other => other.to_string(),
    }
}

/// Parse the right-hand side of `--set key=value`. Anything that is not a
/// TOML literal is taken as a bare string.
pub fn parse_value(text: &str) -> Value {
    let text = text.trim();
    match toml::from_str::<toml::Table>(&format!("v = {text}")) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(text.to_string())),
        Err(_) => Value::String(text.to_string()),
    }
}

/// Split `key=value`.
pub fn parse_assignment(text: &str) -> Result<(String, Value)> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| Error::config(text, "expected key=value"))?;
    Ok((k.trim().to_string(), parse_value(v)))
}

/// A fully resolved scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub mode: Mode,
    pub seeds: Vec<u64>,
    pub params: Params,
    /// Sweep axes in file order; each value list replaces the parameter.
    pub sweep: Vec<(String, Vec<Value>)>,
}

const RESERVED: [&str; 5] = ["name", "mode", "seeds", "replicas", "sweep"];

impl Scenario {
    /// A scenario with every parameter at its default.
    pub fn defaults(mode: Mode) -> Scenario {
        Scenario {
            name: mode.name().to_string(),
            mode,
            seeds: vec![0],
            params: crate::scenarios::defaults(mode),
            sweep: Vec::new(),
        }
    }

    pub fn from_file(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("scenario", format!("cannot read {}: {e}", path.display())))?;
        Scenario::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Scenario> {
        let table: toml::Table = toml::from_str(text).map_err(|e| Error::config("scenario", e.message().to_string()))?;
        let mode: Mode = match table.get("mode") {
            Some(Value::String(s)) => s.parse()?,
            Some(_) => return Err(Error::config("mode", "expected a string")),
            None => return Err(Error::config("mode", "missing")),
        };
        let mut sc = Scenario::defaults(mode);
        if let Some(v) = table.get("name") {
            sc.name = v.as_str().ok_or_else(|| Error::config("name", "expected a string"))?.to_string();
        }
        if let Some(v) = table.get("seeds") {
            sc.seeds = seed_list(v)?;
        }
        if let Some(v) = table.get("replicas") {
            let n = v.as_integer().filter(|&n| n > 0).ok_or_else(|| Error::config("replicas", "expected a positive integer"))?;
            sc.set_replicas(n as usize);
        }
        let mut flat = Vec::new();
        for (k, v) in &table {
            if !RESERVED.contains(&k.as_str()) {
                flatten(k, v, &mut flat);
            }
        }
        for (k, v) in flat {
            sc.params.set(&k, v)?;
        }
        if let Some(sweep) = table.get("sweep") {
            let t = sweep.as_table().ok_or_else(|| Error::config("sweep", "expected a table"))?;
            let mut axes = Vec::new();
            for (k, v) in t {
                flatten(k, v, &mut axes);
            }
            for (k, v) in axes {
                sc.add_axis(&k, v)?;
            }
        }
        Ok(sc)
    }

    /// Apply a `--set` override.
    pub fn set(&mut self, key: &str, value: Value) -> Result<()> {
        match key {
            "name" => {
                self.name = value.as_str().ok_or_else(|| Error::config("name", "expected a string"))?.to_string();
                Ok(())
            }
            "seeds" => {
                self.seeds = seed_list(&value)?;
                Ok(())
            }
            "mode" => Err(Error::config("mode", "cannot be overridden")),
            k if k.starts_with("sweep.") => self.add_axis(&k["sweep.".len()..], value),
            k => self.params.set(k, value),
        }
    }

    /// Replace the seed list by `n` consecutive seeds from the first one.
    pub fn set_replicas(&mut self, n: usize) {
        let base = self.seeds.first().copied().unwrap_or(0);
        self.seeds = (0..n as u64).map(|i| base + i).collect();
    }

    fn add_axis(&mut self, key: &str, values: Value) -> Result<()> {
        let list = match values {
            Value::Array(a) => a,
            _ => return Err(Error::config(&format!("sweep.{key}"), "expected a list of values")),
        };
        let mut probe = self.params.clone();
        for v in &list {
            probe.set(key, v.clone())?;
        }
        self.sweep.retain(|(k, _)| k != key);
        self.sweep.push((key.to_string(), list));
        Ok(())
    }

    /// The scenario pinned to one seed with no sweep, as written to a run
    /// directory.
    pub fn echo(&self, seed: u64) -> String {
        format!(
            "name = {:?}\nmode = {:?}\nseeds = [{seed}]\n{}",
            self.name,
            self.mode.name(),
            self.params.to_toml()
        )
    }

    /// Cartesian product of the sweep axes, first axis slowest.
    pub fn grid(&self) -> Result<Vec<Vec<(String, Value)>>> {
        if self.sweep.is_empty() || self.sweep.iter().any(|(_, v)| v.is_empty()) {
            return Err(Error::config("sweep", "empty grid"));
        }
        let mut cells: Vec<Vec<(String, Value)>> = vec![Vec::new()];
        for (k, values) in &self.sweep {
            let mut next = Vec::with_capacity(cells.len() * values.len());
            for cell in &cells {
                for v in values {
                    let mut c = cell.clone();
                    c.push((k.clone(), v.clone()));
                    next.push(c);
                }
            }
            cells = next;
        }
        Ok(cells)
    }
}

fn seed_list(v: &Value) -> Result<Vec<u64>> {
    let bad = || Error::config("seeds", "expected a list of nonnegative integers");
    match v {
        Value::Integer(i) if *i >= 0 => Ok(vec![*i as u64]),
        Value::Array(a) if !a.is_empty() => a
            .iter()
            .map(|x| x.as_integer().filter(|&i| i >= 0).map(|i| i as u64).ok_or_else(bad))
            .collect(),
        _ => Err(bad()),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, Value)>) {
    match v {
        Value::Table(t) => {
            for (k, v) in t {
                flatten(&format!("{prefix}.{k}"), v, out);
            }
        }
        other => out.push((prefix.to_string(), other.clone())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dotted_and_nested_keys_agree() {
        let a = Scenario::from_toml("mode = \"construction\"\nbehavior.C = 0.5\n").unwrap();
        let b = Scenario::from_toml("mode = \"construction\"\n[behavior]\nC = 0.5\n").unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.params.f64("behavior.C").unwrap(), 0.5);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = Scenario::from_toml("mode = \"construction\"\nbehavior.CC = 0.5\n").unwrap_err();
        assert!(err.to_string().contains("behavior.CC"), "{err}");
    }

    #[test]
    fn wrong_type_is_named() {
        let err = Scenario::from_toml("mode = \"construction\"\nbehavior.C = \"high\"\n").unwrap_err();
        assert!(err.to_string().contains("behavior.C"), "{err}");
    }

    #[test]
    fn integers_coerce_to_floats() {
        let mut sc = Scenario::defaults(Mode::Construction);
        sc.set("behavior.K", parse_value("-1")).unwrap();
        assert_eq!(sc.params.f64("behavior.K").unwrap(), -1.0);
    }

    #[test]
    fn echo_round_trips() {
        for mode in Mode::ALL {
            let mut sc = Scenario::defaults(mode);
            sc.seeds = vec![7];
            let back = Scenario::from_toml(&sc.echo(7)).unwrap();
            assert_eq!(back, sc, "{mode}");
        }
    }

    #[test]
    fn grid_is_cartesian() {
        let sc = Scenario::from_toml(
            "mode = \"construction\"\n[sweep]\nbehavior.C = [0.0, 1.0]\nrun.n_agents = [5, 10, 15]\n",
        )
        .unwrap();
        let g = sc.grid().unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g[1][1].1, Value::Integer(10));
    }

    #[test]
    fn empty_grid_is_an_error() {
        assert!(Scenario::defaults(Mode::Construction).grid().is_err());
        let sc = Scenario::from_toml("mode = \"construction\"\nsweep.behavior.C = []\n").unwrap();
        assert!(sc.grid().is_err());
    }

    #[test]
    fn replicas_extend_from_first_seed() {
        let sc = Scenario::from_toml("mode = \"construction\"\nseeds = [4]\nreplicas = 3\n").unwrap();
        assert_eq!(sc.seeds, vec![4, 5, 6]);
    }

    #[test]
    fn set_values_parse() {
        assert_eq!(parse_value("3"), Value::Integer(3));
        assert_eq!(parse_value("0.25"), Value::Float(0.25));
        assert_eq!(parse_value("gaussian"), Value::String("gaussian".into()));
        assert_eq!(parse_value("[1, 2]"), Value::Array(vec![Value::Integer(1), Value::Integer(2)]));
        assert!(parse_assignment("no-equals").is_err());
    }
}
