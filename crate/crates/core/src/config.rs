//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; blank lines and everything after `#` are ignored.
//! Command-line flags are merged on top of the file before validation, and
//! every problem found is reported in one error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiments::{
    Scenario, DEFAULT_DT, DEFAULT_LOSS_COOPERATIVITY, DEFAULT_STRIDE, DEFAULT_T_MAX,
    MAP_COOPERATIVITIES, MAP_COOPERATIVITY_RANGE, MAP_TIMES,
};
use crate::model::{SystemParams, REFERENCE_CAVITY_LENGTH};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Evolve,
    SweepModes,
    FidelityMap,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::SweepModes => "sweep-modes",
            Command::FidelityMap => "fidelity-map",
        }
    }
}

pub struct KeySpec {
    pub key: &'static str,
    pub units: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

/// Every accepted key. Keys with default `required` must be supplied.
pub const KEYS: &[KeySpec] = &[
    KeySpec { key: "n_modes", units: "count", default: "1", help: "cavity modes kept around resonance (evolve)" },
    KeySpec { key: "cavity_length_lambda", units: "λ_eg", default: "994.28", help: "round-trip length L" },
    KeySpec { key: "positions", units: "fractions of L", default: "0,0,0", help: "three qubit positions, e.g. 0,1/3,2/3" },
    KeySpec { key: "coupling_g", units: "c/L", default: "required", help: "coupling magnitude |G|; 1.9729201 reproduces the reference runs" },
    KeySpec { key: "kappa", units: "c/L", default: "0", help: "cavity leakage rate per mode" },
    KeySpec { key: "gamma", units: "c/L", default: "0", help: "spontaneous emission rate per qubit" },
    KeySpec { key: "cooperativity", units: "1", default: "unset", help: "sets kappa = gamma = |G|/sqrt(C) (evolve)" },
    KeySpec { key: "resonant_mode", units: "mode number", default: "round(L)", help: "centre of the mode window" },
    KeySpec { key: "lock_resonance", units: "bool", default: "true", help: "measure detunings from the resonant mode rather than from L" },
    KeySpec { key: "t_max", units: "L/c", default: "5", help: "final time" },
    KeySpec { key: "dt", units: "L/c", default: "1e-4", help: "RK4 step (upper bound for fidelity-map)" },
    KeySpec { key: "stride", units: "steps", default: "100", help: "steps between output samples" },
    KeySpec { key: "renormalize", units: "bool", default: "false", help: "scale the qubit state to unit trace before observables" },
    KeySpec { key: "modes", units: "list", default: "1-31", help: "mode counts for sweep-modes, e.g. 1-9 or 1,3,7" },
    KeySpec { key: "scenarios", units: "list", default: "all", help: "sweep scenarios: no-loss/same-location, no-loss/separated, loss/same-location, loss/separated" },
    KeySpec { key: "loss_cooperativity", units: "1", default: "100", help: "cooperativity of the lossy sweep scenarios" },
    KeySpec { key: "coop_min", units: "1", default: "0.005", help: "smallest cooperativity of the fidelity map" },
    KeySpec { key: "coop_max", units: "1", default: "120", help: "largest cooperativity of the fidelity map" },
    KeySpec { key: "coop_points", units: "count", default: "60", help: "log-spaced cooperativities in the fidelity map" },
    KeySpec { key: "time_points", units: "count", default: "400", help: "evenly spaced times in the fidelity map, 0 to t_max" },
    KeySpec { key: "output_path", units: "path", default: "<command>.csv", help: "CSV destination; relative paths honour the output directory" },
];

pub fn keys_help() -> String {
    let mut s = String::from("Config keys (key = value; flags override the file):\n");
    for k in KEYS {
        let _ = writeln!(
            s,
            "  {:<22} [{}] default {}: {}",
            k.key, k.units, k.default, k.help
        );
    }
    s
}

/// Raw key/value pairs in the order they take effect.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
    problems: Vec<String>,
}

impl RawConfig {
    pub fn parse(text: &str, origin: &str) -> Self {
        let mut raw = RawConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line.split_once('=') {
                Some((k, v)) => {
                    let k = k.trim().to_string();
                    if raw.values.contains_key(&k) {
                        raw.problems
                            .push(format!("{origin}:{}: key '{k}' given twice", n + 1));
                    }
                    raw.values.insert(k, v.trim().to_string());
                }
                None => raw
                    .problems
                    .push(format!("{origin}:{}: expected key = value, got '{line}'", n + 1)),
            }
        }
        raw
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self::parse(&text, &path.display().to_string()))
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Evolve,
    Sweep {
        modes: Vec<u32>,
        scenarios: Vec<Scenario>,
        loss_cooperativity: f64,
    },
    FidelityMap {
        coop_min: f64,
        coop_max: f64,
        coop_points: usize,
        time_points: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub params: SystemParams,
    pub t_max: f64,
    pub dt: f64,
    pub stride: usize,
    pub renormalize: bool,
    pub grid: Grid,
    pub output_path: PathBuf,
}

fn parse_fraction(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
            a / b
        }
        None => s.parse().map_err(|_| format!("'{s}' is not a number"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

fn parse_bool(s: &str) -> std::result::Result<bool, String> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(format!("'{s}' is not a boolean")),
    }
}

/// `1-9`, `1,3,7` or a mix such as `1-5,7`.
pub fn parse_count_list(s: &str) -> std::result::Result<Vec<u32>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || format!("'{part}' is not a count or range");
        match part.split_once('-') {
            Some((a, b)) => {
                let a: u32 = a.trim().parse().map_err(|_| bad())?;
                let b: u32 = b.trim().parse().map_err(|_| bad())?;
                if a > b {
                    return Err(format!("range '{part}' is empty"));
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if out.is_empty() {
        return Err("list is empty".into());
    }
    Ok(out)
}

struct Reader<'a> {
    raw: &'a RawConfig,
    problems: Vec<String>,
}

impl Reader<'_> {
    fn value<T>(&mut self, key: &str, default: Option<T>, parse: impl Fn(&str) -> std::result::Result<T, String>) -> Option<T> {
        match self.raw.get(key) {
            Some(v) => match parse(v) {
                Ok(x) => Some(x),
                Err(e) => {
                    self.problems.push(format!("{key}: {e}"));
                    None
                }
            },
            None => {
                if default.is_none() {
                    self.problems.push(format!("{key}: required key is missing"));
                }
                default
            }
        }
    }

    fn optional<T>(&mut self, key: &str, parse: impl Fn(&str) -> std::result::Result<T, String>) -> Option<T> {
        let v = self.raw.get(key)?;
        match parse(v) {
            Ok(x) => Some(x),
            Err(e) => {
                self.problems.push(format!("{key}: {e}"));
                None
            }
        }
    }

    fn require(&mut self, ok: bool, msg: impl Into<String>) {
        if !ok {
            self.problems.push(msg.into());
        }
    }
}

fn number(s: &str) -> std::result::Result<f64, String> {
    parse_fraction(s)
}

fn count<T: std::str::FromStr>(s: &str) -> std::result::Result<T, String> {
    s.trim().parse().map_err(|_| format!("'{s}' is not a non-negative integer"))
}

impl RunConfig {
    /// Validate a merged configuration. `output_dir`, when given, prefixes
    /// relative output paths.
    pub fn from_raw(command: Command, raw: &RawConfig, output_dir: Option<&Path>) -> Result<Self> {
        let mut r = Reader {
            raw,
            problems: raw.problems.clone(),
        };
        for k in raw.values.keys() {
            if !KEYS.iter().any(|s| s.key == k) {
                r.problems.push(format!("{k}: unknown key"));
            }
        }

        let n_modes: u32 = r.value("n_modes", Some(1), count).unwrap_or(1);
        let cavity_length = r
            .value("cavity_length_lambda", Some(REFERENCE_CAVITY_LENGTH), number)
            .unwrap_or(REFERENCE_CAVITY_LENGTH);
        let positions = r
            .value("positions", Some([0.0; 3]), |s| {
                let v: Vec<f64> = s.split(',').map(parse_fraction).collect::<std::result::Result<_, _>>()?;
                <[f64; 3]>::try_from(v).map_err(|v| format!("expected 3 positions, got {}", v.len()))
            })
            .unwrap_or([0.0; 3]);
        let coupling = r.value("coupling_g", None, number);
        let kappa = r.optional("kappa", number);
        let gamma = r.optional("gamma", number);
        let cooperativity = r.optional("cooperativity", number);
        let resonant_mode = r.optional("resonant_mode", count::<i64>);
        let lock_resonance = r.value("lock_resonance", Some(true), parse_bool).unwrap_or(true);
        let t_max = r.value("t_max", Some(DEFAULT_T_MAX), number).unwrap_or(DEFAULT_T_MAX);
        let dt = r.value("dt", Some(DEFAULT_DT), number).unwrap_or(DEFAULT_DT);
        let stride: usize = r.value("stride", Some(DEFAULT_STRIDE), count).unwrap_or(DEFAULT_STRIDE);
        let renormalize = r.value("renormalize", Some(false), parse_bool).unwrap_or(false);

        r.require(dt > 0.0, format!("dt: must be positive, got {dt}"));
        r.require(t_max >= dt, format!("t_max: must be at least dt, got {t_max}"));
        r.require(stride >= 1, "stride: must be at least 1");

        let mut params = SystemParams {
            n_modes,
            cavity_length,
            positions,
            coupling: coupling.unwrap_or(1.0),
            gamma: gamma.unwrap_or(0.0),
            kappa: kappa.unwrap_or(0.0),
            resonant_mode,
            lock_resonance,
        };

        let grid_keys = ["modes", "scenarios", "loss_cooperativity", "coop_min", "coop_max", "coop_points", "time_points"];
        let allowed: &[&str] = match command {
            Command::Evolve => &[],
            Command::SweepModes => &["modes", "scenarios", "loss_cooperativity"],
            Command::FidelityMap => &["coop_min", "coop_max", "coop_points", "time_points"],
        };
        for k in grid_keys {
            if raw.get(k).is_some() && !allowed.contains(&k) {
                r.problems.push(format!("{k}: not used by {}", command.name()));
            }
        }

        let grid = match command {
            Command::Evolve => {
                if let Some(c) = cooperativity {
                    r.require(kappa.is_none() && gamma.is_none(), "cooperativity: cannot be combined with kappa or gamma");
                    r.require(c > 0.0, format!("cooperativity: must be positive, got {c}"));
                    if c > 0.0 {
                        params = params.with_cooperativity(c);
                    }
                }
                Grid::Evolve
            }
            Command::SweepModes => {
                r.require(raw.get("n_modes").is_none(), "n_modes: sweep-modes takes its mode counts from 'modes'");
                for k in ["kappa", "gamma", "cooperativity"] {
                    r.require(raw.get(k).is_none(), format!("{k}: sweep losses are set by 'loss_cooperativity'"));
                }
                let modes = r.value("modes", Some((1..=31).collect()), parse_count_list).unwrap_or_default();
                r.require(modes.iter().all(|&m| m >= 1), "modes: every mode count must be at least 1");
                let scenarios = r
                    .value("scenarios", Some(Scenario::ALL.to_vec()), |s| {
                        if s.trim() == "all" {
                            return Ok(Scenario::ALL.to_vec());
                        }
                        s.split(',')
                            .map(|x| x.trim().parse::<Scenario>().map_err(|e| e.to_string()))
                            .collect()
                    })
                    .unwrap_or_default();
                let loss_cooperativity = r
                    .value("loss_cooperativity", Some(DEFAULT_LOSS_COOPERATIVITY), number)
                    .unwrap_or(DEFAULT_LOSS_COOPERATIVITY);
                r.require(loss_cooperativity > 0.0, "loss_cooperativity: must be positive");
                if let Some(&m) = modes.iter().max() {
                    params.n_modes = m;
                }
                Grid::Sweep {
                    modes,
                    scenarios,
                    loss_cooperativity,
                }
            }
            Command::FidelityMap => {
                for k in ["kappa", "gamma", "cooperativity"] {
                    r.require(
                        raw.get(k).is_none(),
                        format!("{k}: losses of the fidelity map come from the cooperativity grid"),
                    );
                }
                let coop_min = r.value("coop_min", Some(MAP_COOPERATIVITY_RANGE.0), number).unwrap_or(1.0);
                let coop_max = r.value("coop_max", Some(MAP_COOPERATIVITY_RANGE.1), number).unwrap_or(1.0);
                let coop_points: usize = r.value("coop_points", Some(MAP_COOPERATIVITIES), count).unwrap_or(1);
                let time_points: usize = r.value("time_points", Some(MAP_TIMES), count).unwrap_or(2);
                r.require(coop_min > 0.0 && coop_max >= coop_min, "coop_min/coop_max: need 0 < coop_min <= coop_max");
                r.require(coop_points >= 1, "coop_points: must be at least 1");
                r.require(time_points >= 2, "time_points: must be at least 2");
                Grid::FidelityMap {
                    coop_min,
                    coop_max,
                    coop_points,
                    time_points,
                }
            }
        };

        if let Err(Error::InvalidParams(msg)) = params.validate() {
            r.problems.extend(msg.split("; ").map(String::from));
        }

        let output = raw
            .get("output_path")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(format!("{}.csv", command.name())));
        let output_path = match output_dir {
            Some(dir) if output.is_relative() => dir.join(output),
            _ => output,
        };

        if r.problems.is_empty() {
            Ok(RunConfig {
                command,
                params,
                t_max,
                dt,
                stride,
                renormalize,
                grid,
                output_path,
            })
        } else {
            Err(Error::Config(r.problems))
        }
    }
}
