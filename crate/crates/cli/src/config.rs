//! Experiment configuration: one flat TOML table per experiment.
//!
//! Every key is read through [`Reader`], which records the resolved value
//! (defaults included) for the output header and rejects keys the chosen
//! command does not use.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use qca_core::{Chirality, Model};
use serde::Serialize;
use serde_json::Value as Json;
use toml::{Table, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Dispersion,
    Evolve,
    Dispersive,
    Zitter,
    Scatter,
    KleinScan,
    Maxwell,
    Boost,
    Pheno,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Dispersion,
        Command::Evolve,
        Command::Dispersive,
        Command::Zitter,
        Command::Scatter,
        Command::KleinScan,
        Command::Maxwell,
        Command::Boost,
        Command::Pheno,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Dispersion => "dispersion",
            Command::Evolve => "evolve",
            Command::Dispersive => "dispersive",
            Command::Zitter => "zitter",
            Command::Scatter => "scatter",
            Command::KleinScan => "klein-scan",
            Command::Maxwell => "maxwell",
            Command::Boost => "boost",
            Command::Pheno => "pheno",
        }
    }

    /// Extension of the main artifact.
    pub fn extension(self) -> &'static str {
        match self {
            Command::Pheno => "json",
            _ => "csv",
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command `{s}`"))
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A rejected configuration, naming the offending key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(key: &str, message: impl Into<String>) -> Self {
        Self {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.key.is_empty() {
            write!(f, "config: {}", self.message)
        } else {
            write!(f, "config key `{}`: {}", self.key, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

type Res<T> = Result<T, ConfigError>;

/// Packet parameters shared by the evolution experiments.
#[derive(Clone, Debug, PartialEq)]
pub struct PacketParams {
    pub k0: Vec<f64>,
    pub sigma: f64,
    pub c_plus: C64,
    pub c_minus: C64,
    pub x0: Vec<f64>,
    pub hermite: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AutomatonParams {
    pub model: Model,
    pub mass: f64,
    pub chirality: Chirality,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Params {
    Dispersion {
        automaton: AutomatonParams,
        samples: usize,
        direction: Vec<f64>,
    },
    Evolve {
        automaton: AutomatonParams,
        packet: PacketParams,
        grid: usize,
        t_max: i64,
        t_step: i64,
    },
    Dispersive {
        automaton: AutomatonParams,
        packet: PacketParams,
        grid: usize,
        t_max: i64,
        t_step: i64,
    },
    Zitter {
        mass: f64,
        packet: PacketParams,
        grid: usize,
        t_max: i64,
    },
    Scatter {
        mass: f64,
        k0: f64,
        sigma: f64,
        phi: f64,
    },
    KleinScan {
        mass: f64,
        k0: f64,
        sigma: f64,
        phi_min: f64,
        phi_max: f64,
        phi_points: usize,
        level: f64,
        refine: usize,
    },
    Maxwell {
        chirality: Chirality,
        samples: usize,
        k_max: f64,
    },
    Boost {
        mass: f64,
        /// Starting wave-vectors; each is boosted by every `beta`.
        ks: Vec<f64>,
        betas: Vec<f64>,
    },
    Pheno {
        mass: f64,
        width_m: f64,
        grb: Option<GrbParams>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrbParams {
    pub distance_m: f64,
    pub k1: [f64; 3],
    pub k2: [f64; 3],
}

/// A validated experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub params: Params,
    pub seed: u64,
    pub output: Option<PathBuf>,
    /// Every resolved key, defaults included, in key order.
    pub resolved: BTreeMap<String, Json>,
}

/// Parse and validate a TOML experiment description.
pub fn parse_config(text: &str) -> Res<ExperimentConfig> {
    parse_config_with(text, None, &[])
}

/// As [`parse_config`], with the command fixed by the caller (it must agree
/// with any `command` key) and `key=value` overrides applied on top of the
/// file. Override values use TOML syntax; anything that does not parse as a
/// TOML value is taken as a bare string.
pub fn parse_config_with(text: &str, command: Option<Command>, overrides: &[String]) -> Res<ExperimentConfig> {
    let mut table: Table = text.parse().map_err(|e: toml::de::Error| ConfigError::new("", e.message().to_string()))?;
    for o in overrides {
        let (key, raw) = o
            .split_once('=')
            .ok_or_else(|| ConfigError::new(o, "override must have the form key=value"))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::new(o, "empty key in override"));
        }
        table.insert(key.to_string(), parse_value(raw.trim()));
    }
    if let Some(c) = command {
        match table.get("command") {
            Some(Value::String(s)) if s != c.name() => {
                return Err(ConfigError::new("command", format!("file is for `{s}`, invoked as `{c}`")));
            }
            _ => {
                table.insert("command".into(), Value::String(c.name().into()));
            }
        }
    }
    resolve(&table)
}

fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

struct Reader<'a> {
    table: &'a Table,
    used: BTreeSet<&'static str>,
    resolved: BTreeMap<String, Json>,
}

fn type_name(v: &Value) -> &'static str {
    v.type_str()
}

impl<'a> Reader<'a> {
    fn new(table: &'a Table) -> Self {
        Self {
            table,
            used: BTreeSet::new(),
            resolved: BTreeMap::new(),
        }
    }

    fn raw(&mut self, key: &'static str) -> Option<&'a Value> {
        self.used.insert(key);
        self.table.get(key)
    }

    fn record(&mut self, key: &str, v: impl Serialize) {
        self.resolved
            .insert(key.to_string(), serde_json::to_value(v).unwrap_or(Json::Null));
    }

    fn opt_f64(&mut self, key: &'static str) -> Res<Option<f64>> {
        let v = match self.raw(key) {
            None => return Ok(None),
            Some(Value::Float(x)) => *x,
            Some(Value::Integer(i)) => *i as f64,
            Some(other) => return Err(ConfigError::new(key, format!("expected a number, got {}", type_name(other)))),
        };
        if !v.is_finite() {
            return Err(ConfigError::new(key, "must be finite"));
        }
        self.record(key, v);
        Ok(Some(v))
    }

    fn f64(&mut self, key: &'static str, default: Option<f64>) -> Res<f64> {
        match self.opt_f64(key)? {
            Some(v) => Ok(v),
            None => {
                let v = default.ok_or_else(|| ConfigError::new(key, "required key is missing"))?;
                self.record(key, v);
                Ok(v)
            }
        }
    }

    fn int(&mut self, key: &'static str, default: Option<i64>) -> Res<i64> {
        let v = match self.raw(key) {
            Some(Value::Integer(i)) => *i,
            Some(other) => return Err(ConfigError::new(key, format!("expected an integer, got {}", type_name(other)))),
            None => default.ok_or_else(|| ConfigError::new(key, "required key is missing"))?,
        };
        self.record(key, v);
        Ok(v)
    }

    fn usize(&mut self, key: &'static str, default: Option<usize>) -> Res<usize> {
        let v = self.int(key, default.map(|d| d as i64))?;
        usize::try_from(v).map_err(|_| ConfigError::new(key, format!("must be non-negative, got {v}")))
    }

    fn string(&mut self, key: &'static str, default: Option<&str>) -> Res<String> {
        let v = match self.raw(key) {
            Some(Value::String(s)) => s.clone(),
            Some(other) => return Err(ConfigError::new(key, format!("expected a string, got {}", type_name(other)))),
            None => default
                .ok_or_else(|| ConfigError::new(key, "required key is missing"))?
                .to_string(),
        };
        self.record(key, &v);
        Ok(v)
    }

    fn opt_vec(&mut self, key: &'static str) -> Res<Option<Vec<f64>>> {
        let out = match self.raw(key) {
            None => return Ok(None),
            Some(Value::Float(x)) => vec![*x],
            Some(Value::Integer(i)) => vec![*i as f64],
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    Value::Float(x) => Ok(*x),
                    Value::Integer(i) => Ok(*i as f64),
                    other => Err(ConfigError::new(key, format!("expected numbers, found {}", type_name(other)))),
                })
                .collect::<Res<Vec<f64>>>()?,
            Some(other) => return Err(ConfigError::new(key, format!("expected a number or array, got {}", type_name(other)))),
        };
        if out.iter().any(|x| !x.is_finite()) {
            return Err(ConfigError::new(key, "entries must be finite"));
        }
        self.record(key, &out);
        Ok(Some(out))
    }

    fn vec(&mut self, key: &'static str, default: Option<Vec<f64>>) -> Res<Vec<f64>> {
        match self.opt_vec(key)? {
            Some(v) => Ok(v),
            None => {
                let v = default.ok_or_else(|| ConfigError::new(key, "required key is missing"))?;
                self.record(key, &v);
                Ok(v)
            }
        }
    }

    fn complex(&mut self, key: &'static str, default: C64) -> Res<C64> {
        let v = self.vec(key, Some(vec![default.re, default.im]))?;
        match v.as_slice() {
            [re] => Ok(C64::new(*re, 0.0)),
            [re, im] => Ok(C64::new(*re, *im)),
            _ => Err(ConfigError::new(key, "expected [re, im]")),
        }
    }

    /// Every key present must have been read by the command.
    fn finish(self, command: Command) -> Res<BTreeMap<String, Json>> {
        for key in self.table.keys() {
            if !self.used.contains(key.as_str()) {
                let msg = if ALL_KEYS.contains(&key.as_str()) {
                    format!("not used by command `{command}`")
                } else {
                    "unknown key".to_string()
                };
                return Err(ConfigError::new(key, msg));
            }
        }
        Ok(self.resolved)
    }
}

const ALL_KEYS: &[&str] = &[
    "command", "seed", "output", "model", "mass", "chirality", "samples", "direction", "k0", "sigma", "c_plus",
    "c_minus", "x0", "hermite", "grid", "t_max", "t_step", "phi", "phi_min", "phi_max", "phi_points", "level",
    "refine", "k_max", "k", "betas", "width_m", "distance_m", "k1", "k2",
];

fn in_unit_interval(key: &str, v: f64, closed_top: bool) -> Res<()> {
    let ok = if closed_top { (0.0..=1.0).contains(&v) } else { (0.0..1.0).contains(&v) };
    if ok {
        Ok(())
    } else {
        let top = if closed_top { "]" } else { ")" };
        Err(ConfigError::new(key, format!("must lie in [0, 1{top}, got {v}")))
    }
}

fn positive(key: &str, v: f64) -> Res<()> {
    if v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::new(key, format!("must be positive, got {v}")))
    }
}

fn chirality(r: &mut Reader) -> Res<Chirality> {
    match r.string("chirality", Some("-"))?.as_str() {
        "-" | "minus" => Ok(Chirality::Minus),
        "+" | "plus" => Ok(Chirality::Plus),
        other => Err(ConfigError::new("chirality", format!("expected \"+\" or \"-\", got `{other}`"))),
    }
}

fn automaton(r: &mut Reader) -> Res<AutomatonParams> {
    let name = r.string("model", None)?;
    let model = Model::from_str(&name).map_err(|e| ConfigError::new("model", e.to_string()))?;
    let mass = r.f64("mass", Some(0.0))?;
    in_unit_interval("mass", mass, true)?;
    if !model.is_dirac() && mass != 0.0 {
        return Err(ConfigError::new("mass", format!("Weyl automata are massless, got {mass}")));
    }
    let chirality = chirality(r)?;
    Ok(AutomatonParams { model, mass, chirality })
}

fn packet(r: &mut Reader, dim: usize, default_k0: Option<Vec<f64>>) -> Res<PacketParams> {
    let k0 = r.vec("k0", default_k0)?;
    if k0.len() != dim {
        return Err(ConfigError::new("k0", format!("expected {dim} components, got {}", k0.len())));
    }
    let sigma = r.f64("sigma", None)?;
    positive("sigma", sigma)?;
    let c_plus = r.complex("c_plus", C64::new(1.0, 0.0))?;
    let c_minus = r.complex("c_minus", C64::new(0.0, 0.0))?;
    let w = c_plus.norm_sqr() + c_minus.norm_sqr();
    if (w - 1.0).abs() > 1e-9 {
        return Err(ConfigError::new("c_plus", format!("|c_plus|² + |c_minus|² must be 1, got {w}")));
    }
    let x0 = r.vec("x0", Some(vec![0.0; dim]))?;
    if x0.len() != dim {
        return Err(ConfigError::new("x0", format!("expected {dim} components, got {}", x0.len())));
    }
    let hermite = r.opt_vec("hermite")?;
    if let Some(h) = &hermite {
        if h.iter().all(|c| *c == 0.0) {
            return Err(ConfigError::new("hermite", "needs a non-zero coefficient"));
        }
    }
    Ok(PacketParams {
        k0,
        sigma,
        c_plus,
        c_minus,
        x0,
        hermite,
    })
}

fn grid(r: &mut Reader, dim: usize) -> Res<usize> {
    let default = match dim {
        1 => 1 << 14,
        2 => 1 << 9,
        _ => 1 << 6,
    };
    let n = r.usize("grid", Some(default))?;
    if n < 4 || n % 2 != 0 {
        return Err(ConfigError::new("grid", format!("must be even and at least 4, got {n}")));
    }
    if n.checked_pow(dim as u32).is_none_or_big() {
        return Err(ConfigError::new("grid", format!("{n}^{dim} modes is too many")));
    }
    Ok(n)
}

trait TooBig {
    fn is_none_or_big(self) -> bool;
}

impl TooBig for Option<usize> {
    fn is_none_or_big(self) -> bool {
        self.map_or(true, |v| v > 1 << 26)
    }
}

fn times(r: &mut Reader) -> Res<(i64, i64)> {
    let t_max = r.int("t_max", None)?;
    if t_max < 0 {
        return Err(ConfigError::new("t_max", format!("must be non-negative, got {t_max}")));
    }
    let t_step = r.int("t_step", Some(1))?;
    if t_step < 1 {
        return Err(ConfigError::new("t_step", format!("must be at least 1, got {t_step}")));
    }
    Ok((t_max, t_step))
}

fn dirac_mass(r: &mut Reader, open: bool) -> Res<f64> {
    let m = r.f64("mass", None)?;
    in_unit_interval("mass", m, !open)?;
    if open && m == 0.0 {
        return Err(ConfigError::new("mass", "must lie in (0, 1), got 0"));
    }
    Ok(m)
}

fn model_is_dirac1d(r: &mut Reader) -> Res<()> {
    let m = r.string("model", Some("dirac1d"))?;
    if m != "dirac1d" {
        return Err(ConfigError::new("model", format!("this command needs dirac1d, got `{m}`")));
    }
    Ok(())
}

fn incident_k0(r: &mut Reader) -> Res<f64> {
    let k0 = r.f64("k0", None)?;
    if !(k0 > 0.0 && k0 < std::f64::consts::PI) {
        return Err(ConfigError::new("k0", format!("must lie in (0, π) for a right-moving packet, got {k0}")));
    }
    Ok(k0)
}

fn scattering_sigma(r: &mut Reader) -> Res<f64> {
    let s = r.f64("sigma", None)?;
    if !(s > 0.0 && s < 1.0) {
        return Err(ConfigError::new("sigma", format!("must lie in (0, 1), got {s}")));
    }
    Ok(s)
}

fn vec3(r: &mut Reader, key: &'static str) -> Res<[f64; 3]> {
    let v = r.vec(key, None)?;
    <[f64; 3]>::try_from(v.as_slice()).map_err(|_| ConfigError::new(key, "expected 3 components"))
}

fn resolve(table: &Table) -> Res<ExperimentConfig> {
    let mut r = Reader::new(table);
    let command: Command = r.string("command", None)?.parse().map_err(|e| ConfigError::new("command", e))?;
    let seed = r.int("seed", Some(0))?;
    let seed = u64::try_from(seed).map_err(|_| ConfigError::new("seed", "must be non-negative"))?;
    let output = match r.raw("output") {
        None => None,
        Some(Value::String(s)) if !s.is_empty() => {
            r.record("output", s);
            Some(PathBuf::from(s))
        }
        Some(_) => return Err(ConfigError::new("output", "expected a non-empty path string")),
    };

    let params = match command {
        Command::Dispersion => {
            let automaton = automaton(&mut r)?;
            let dim = automaton.model.dim();
            let samples = r.usize("samples", Some(1024))?;
            if samples < 2 {
                return Err(ConfigError::new("samples", "need at least 2"));
            }
            let mut axis = vec![0.0; dim];
            axis[0] = 1.0;
            let direction = r.vec("direction", Some(axis))?;
            let len = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
            if direction.len() != dim || len == 0.0 {
                return Err(ConfigError::new("direction", format!("need a non-zero vector with {dim} components")));
            }
            Params::Dispersion {
                automaton,
                samples,
                direction: direction.iter().map(|x| x / len).collect(),
            }
        }
        Command::Evolve | Command::Dispersive => {
            let automaton = automaton(&mut r)?;
            let dim = automaton.model.dim();
            let packet = packet(&mut r, dim, None)?;
            let grid = grid(&mut r, dim)?;
            let (t_max, t_step) = times(&mut r)?;
            if command == Command::Evolve {
                Params::Evolve {
                    automaton,
                    packet,
                    grid,
                    t_max,
                    t_step,
                }
            } else {
                Params::Dispersive {
                    automaton,
                    packet,
                    grid,
                    t_max,
                    t_step,
                }
            }
        }
        Command::Zitter => {
            model_is_dirac1d(&mut r)?;
            let mass = dirac_mass(&mut r, false)?;
            let packet = packet(&mut r, 1, Some(vec![0.0]))?;
            let grid = grid(&mut r, 1)?;
            let t_max = r.int("t_max", None)?;
            if t_max < 1 {
                return Err(ConfigError::new("t_max", format!("must be at least 1, got {t_max}")));
            }
            Params::Zitter {
                mass,
                packet,
                grid,
                t_max,
            }
        }
        Command::Scatter => {
            let mass = dirac_mass(&mut r, true)?;
            let k0 = incident_k0(&mut r)?;
            let sigma = scattering_sigma(&mut r)?;
            let phi = r.f64("phi", None)?;
            Params::Scatter { mass, k0, sigma, phi }
        }
        Command::KleinScan => {
            let mass = dirac_mass(&mut r, true)?;
            let k0 = incident_k0(&mut r)?;
            let sigma = scattering_sigma(&mut r)?;
            let phi_min = r.f64("phi_min", None)?;
            let phi_max = r.f64("phi_max", None)?;
            if !(phi_max > phi_min) {
                return Err(ConfigError::new("phi_max", format!("must exceed phi_min = {phi_min}")));
            }
            let phi_points = r.usize("phi_points", Some(40))?;
            if phi_points < 3 {
                return Err(ConfigError::new("phi_points", "need at least 3"));
            }
            let level = r.f64("level", Some(0.99))?;
            if !(level > 0.0 && level < 1.0) {
                return Err(ConfigError::new("level", format!("must lie in (0, 1), got {level}")));
            }
            let refine = r.usize("refine", Some(10))?;
            Params::KleinScan {
                mass,
                k0,
                sigma,
                phi_min,
                phi_max,
                phi_points,
                level,
                refine,
            }
        }
        Command::Maxwell => {
            let chirality = chirality(&mut r)?;
            let samples = r.usize("samples", Some(1000))?;
            if samples == 0 {
                return Err(ConfigError::new("samples", "need at least 1"));
            }
            let k_max = r.f64("k_max", Some(1.0))?;
            positive("k_max", k_max)?;
            Params::Maxwell {
                chirality,
                samples,
                k_max,
            }
        }
        Command::Boost => {
            let mass = dirac_mass(&mut r, true)?;
            let ks = r.vec("k", None)?;
            if ks.is_empty() {
                return Err(ConfigError::new("k", "need at least one wave-vector"));
            }
            if let Some(k) = ks.iter().find(|k| k.abs() > std::f64::consts::FRAC_PI_2) {
                return Err(ConfigError::new("k", format!("must satisfy |k| ≤ π/2, got {k}")));
            }
            let betas = r.vec("betas", None)?;
            if let Some(b) = betas.iter().find(|b| !(b.abs() < 1.0)) {
                return Err(ConfigError::new("betas", format!("every beta must lie in (-1, 1), got {b}")));
            }
            Params::Boost { mass, ks, betas }
        }
        Command::Pheno => {
            let mass = r.f64("mass", None)?;
            positive("mass", mass)?;
            let width_m = r.f64("width_m", None)?;
            positive("width_m", width_m)?;
            let grb = match r.opt_f64("distance_m")? {
                None => None,
                Some(d) => {
                    positive("distance_m", d)?;
                    let k1 = vec3(&mut r, "k1")?;
                    let k2 = vec3(&mut r, "k2")?;
                    for (key, k) in [("k1", k1), ("k2", k2)] {
                        if k == [0.0; 3] {
                            return Err(ConfigError::new(key, "must be non-zero"));
                        }
                    }
                    Some(GrbParams {
                        distance_m: d,
                        k1,
                        k2,
                    })
                }
            };
            Params::Pheno { mass, width_m, grb }
        }
    };
    let resolved = r.finish(command)?;
    Ok(ExperimentConfig {
        command,
        params,
        seed,
        output,
        resolved,
    })
}
