//! Flat `key = value` run configuration with unit suffixes.
//!
//! ```text
//! # comment
//! p = 0.02 W
//! gamma_th = 20 dB
//! lambda_d = 100 /km2
//! t_r = 6 ms
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use nbiot_rach::analytics::{ChannelConfig, InterferenceMode};
use nbiot_rach::energy::{availability_bounds, BoundMode, EnergyConfig};
use nbiot_rach::quadrature::QuadratureSettings;
use nbiot_rach::units::{db_to_linear, dbm_to_watts, thermal_noise_dbm};

use crate::error::CliError;

pub const DEFAULT_TX_POWER_W: f64 = 0.02;
pub const DEFAULT_HARVEST_RATE: f64 = 0.05;
pub const DEFAULT_ENB_DENSITY: f64 = 0.1;
pub const DEFAULT_DEVICE_DENSITY: f64 = 100.0;
pub const DEFAULT_SINR_THRESHOLD_DB: f64 = 20.0;
pub const DEFAULT_PATH_LOSS_EXP: f64 = 4.0;
pub const DEFAULT_NONEMPTY_PROB: f64 = 0.001;
pub const DEFAULT_PREAMBLES: u32 = 48;
pub const DEFAULT_BANDWIDTH_HZ: f64 = 3750.0;
pub const DEFAULT_PREAMBLE_TIME_S: f64 = 6e-3;
pub const DEFAULT_GUARD_TIME_S: f64 = 31e-3;
pub const DEFAULT_DATA_TIME_S: f64 = 12.4e-3;
pub const DEFAULT_REPETITIONS: u32 = 1;
/// Spare battery levels above the cutoff; availability has plateaued here.
pub const DEFAULT_CAPACITY_MARGIN: u32 = 160;
pub const DEFAULT_TRIALS: u64 = 100_000;

/// Fully validated settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub energy: EnergyConfig,
    pub channel: ChannelConfig,
    pub mode: InterferenceMode,
    pub trials: u64,
    pub quadrature: QuadratureSettings,
    /// Guard time, seconds. Part of the frame layout only.
    pub guard_time: f64,
    /// `true` when `eta0` was given rather than derived from the energy model.
    pub eta0_fixed: bool,
    /// Bound whose availability supplies the default `eta0`.
    pub eta0_bound: BoundMode,
    /// Sweep definition for the `custom` preset.
    pub custom: CustomSweep,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CustomSweep {
    pub target: Option<String>,
    pub parameter: Option<String>,
    pub values: Vec<f64>,
    pub series_n_t: Vec<u32>,
}

impl RunConfig {
    pub fn defaults() -> Self {
        Self::from_pairs(&BTreeMap::new()).expect("defaults are valid")
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut pairs = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::config(format!("line {}", lineno + 1), "expected `key = value`")
            })?;
            let key = key.trim().to_ascii_lowercase();
            if !KEYS.contains(&key.as_str()) {
                return Err(CliError::config(key, "unknown key"));
            }
            if pairs.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(CliError::config(key, "given more than once"));
            }
        }
        Self::from_pairs(&pairs)
    }

    fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self, CliError> {
        let get = |k: &str| pairs.get(k).map(String::as_str);

        let tx_power = opt(get("p"), "p", parse_power)?.unwrap_or(DEFAULT_TX_POWER_W);
        let harvest_rate = opt(get("mu0"), "mu0", parse_plain)?.unwrap_or(DEFAULT_HARVEST_RATE);
        let enb_density =
            opt(get("lambda_b"), "lambda_b", parse_density)?.unwrap_or(DEFAULT_ENB_DENSITY);
        let device_density =
            opt(get("lambda_d"), "lambda_d", parse_density)?.unwrap_or(DEFAULT_DEVICE_DENSITY);
        let sinr_threshold = opt(get("gamma_th"), "gamma_th", parse_ratio)?
            .unwrap_or(db_to_linear(DEFAULT_SINR_THRESHOLD_DB));
        let path_loss_exp =
            opt(get("alpha"), "alpha", parse_plain)?.unwrap_or(DEFAULT_PATH_LOSS_EXP);
        let nonempty_prob =
            opt(get("a_a"), "a_a", parse_plain)?.unwrap_or(DEFAULT_NONEMPTY_PROB);
        let preambles = opt(get("l"), "l", parse_u32)?.unwrap_or(DEFAULT_PREAMBLES);
        let bandwidth = opt(get("bw"), "bw", parse_frequency)?.unwrap_or(DEFAULT_BANDWIDTH_HZ);
        if !(bandwidth > 0.0) {
            return Err(CliError::config("bw", "bandwidth must be positive"));
        }
        let noise_power = opt(get("sigma2"), "sigma2", parse_power)?
            .unwrap_or_else(|| dbm_to_watts(thermal_noise_dbm(bandwidth)));
        let preamble_time =
            opt(get("t_r"), "t_r", parse_duration)?.unwrap_or(DEFAULT_PREAMBLE_TIME_S);
        let guard_time = opt(get("t_g"), "t_g", parse_duration)?.unwrap_or(DEFAULT_GUARD_TIME_S);
        let data_time =
            opt(get("t_data"), "t_data", parse_duration)?.unwrap_or(DEFAULT_DATA_TIME_S);
        let repetitions = opt(get("n_t"), "n_t", parse_u32)?.unwrap_or(DEFAULT_REPETITIONS);
        let capacity = opt(get("m0"), "m0", parse_u32)?
            .unwrap_or(repetitions.saturating_add(DEFAULT_CAPACITY_MARGIN));
        let eta0_bound = match get("bound") {
            None | Some("failure") => BoundMode::FailureBound,
            Some("success") => BoundMode::SuccessBound,
            Some(other) => {
                return Err(CliError::config("bound", format!("`{other}` is not failure|success")))
            }
        };
        let mode = match get("mode") {
            None | Some("full") => InterferenceMode::Full,
            Some("intra_cell") => InterferenceMode::IntraCellOnly,
            Some(other) => {
                return Err(CliError::config("mode", format!("`{other}` is not full|intra_cell")))
            }
        };
        let standard_compliance = match get("standard_compliance") {
            None | Some("false") => false,
            Some("true") => true,
            Some(other) => {
                return Err(CliError::config(
                    "standard_compliance",
                    format!("`{other}` is not true|false"),
                ))
            }
        };

        let mut energy = EnergyConfig::from_durations(
            harvest_rate,
            nonempty_prob,
            tx_power,
            preamble_time,
            data_time,
            capacity,
            repetitions,
            eta0_bound,
        );
        if let Some(e) = opt(get("e0_ra"), "e0_ra", parse_energy)? {
            energy.e0_ra = e;
        }
        if let Some(e) = opt(get("e0_da"), "e0_da", parse_energy)? {
            energy.e0_da = e;
        }
        energy.standard_compliance = standard_compliance;
        energy.validate()?;

        let mut quadrature = QuadratureSettings::default();
        if let Some(v) = opt(get("rel_tol"), "rel_tol", parse_plain)? {
            quadrature.rel_tol = v;
        }
        if let Some(v) = opt(get("abs_tol"), "abs_tol", parse_plain)? {
            quadrature.abs_tol = v;
        }
        if let Some(v) = opt(get("pmf_tail_mass"), "pmf_tail_mass", parse_plain)? {
            quadrature.pmf_tail_mass = v;
        }
        if let Some(v) = opt(get("max_subdivisions"), "max_subdivisions", parse_u32)? {
            quadrature.max_subdivisions = v as usize;
        }
        quadrature.validate()?;

        let eta0 = opt(get("eta0"), "eta0", parse_plain)?;
        let eta0_fixed = eta0.is_some();
        let availability = match eta0 {
            Some(v) => v,
            None => derived_availability(&energy, eta0_bound)?,
        };

        let channel = ChannelConfig {
            path_loss_exp,
            sinr_threshold,
            noise_power,
            tx_power,
            preambles,
            enb_density,
            device_density,
            nonempty_prob,
            availability,
            epsilon_override: opt(get("epsilon"), "epsilon", parse_plain)?,
        };
        channel.validate()?;

        let trials = opt(get("trials"), "trials", parse_u64)?.unwrap_or(DEFAULT_TRIALS);
        if trials < 1 {
            return Err(CliError::config("trials", "at least one trial is required"));
        }

        let custom = CustomSweep {
            target: get("target").map(str::to_string),
            parameter: get("sweep").map(str::to_string),
            values: match get("values") {
                Some(v) => parse_list(v, "values", parse_plain)?,
                None => Vec::new(),
            },
            series_n_t: match get("series_n_t") {
                Some(v) => parse_list(v, "series_n_t", parse_u32)?,
                None => Vec::new(),
            },
        };

        Ok(Self {
            energy,
            channel,
            mode,
            trials,
            quadrature,
            guard_time,
            eta0_fixed,
            eta0_bound,
            custom,
        })
    }

    /// Re-derives `eta0` from the energy model unless it was fixed.
    pub fn refresh_availability(&mut self) -> Result<(), CliError> {
        if !self.eta0_fixed {
            self.channel.availability = derived_availability(&self.energy, self.eta0_bound)?;
        }
        Ok(())
    }
}

fn derived_availability(energy: &EnergyConfig, bound: BoundMode) -> Result<f64, CliError> {
    let (lower, upper) = availability_bounds(energy)?;
    Ok(match bound {
        BoundMode::FailureBound => lower,
        BoundMode::SuccessBound => upper,
    })
}

const KEYS: &[&str] = &[
    "p",
    "mu0",
    "lambda_b",
    "lambda_d",
    "gamma_th",
    "alpha",
    "a_a",
    "l",
    "bw",
    "sigma2",
    "t_r",
    "t_g",
    "t_data",
    "e0_ra",
    "e0_da",
    "n_t",
    "m0",
    "eta0",
    "bound",
    "epsilon",
    "mode",
    "standard_compliance",
    "trials",
    "rel_tol",
    "abs_tol",
    "pmf_tail_mass",
    "max_subdivisions",
    "target",
    "sweep",
    "values",
    "series_n_t",
];

fn opt<T>(
    raw: Option<&str>,
    field: &'static str,
    parse: impl Fn(&str) -> Result<T, String>,
) -> Result<Option<T>, CliError> {
    raw.map(|s| parse(s).map_err(|reason| CliError::config(field, reason)))
        .transpose()
}

fn parse_list<T>(
    raw: &str,
    field: &'static str,
    parse: impl Fn(&str) -> Result<T, String>,
) -> Result<Vec<T>, CliError> {
    raw.split(',')
        .map(|s| parse(s.trim()).map_err(|reason| CliError::config(field, reason)))
        .collect()
}

/// Splits `"20 dB"` into `(20.0, "db")`; the unit is lower-cased.
fn split_unit(raw: &str) -> Result<(f64, String), String> {
    let raw = raw.trim();
    let end = raw
        .find(|c: char| c.is_whitespace() || c == '/' || (c.is_alphabetic() && c != 'e' && c != 'E'))
        .unwrap_or(raw.len());
    let (num, unit) = raw.split_at(end);
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| format!("`{raw}` is not a number"))?;
    if !value.is_finite() {
        return Err(format!("`{raw}` is not finite"));
    }
    Ok((value, unit.trim().to_ascii_lowercase()))
}

fn with_units(raw: &str, units: &[(&str, fn(f64) -> f64)]) -> Result<f64, String> {
    let (v, unit) = split_unit(raw)?;
    units
        .iter()
        .find(|(u, _)| *u == unit)
        .map(|(_, f)| f(v))
        .ok_or_else(|| {
            let names: Vec<_> = units
                .iter()
                .map(|(u, _)| if u.is_empty() { "none" } else { u })
                .collect();
            format!("unit `{unit}` not accepted here (expected {})", names.join(", "))
        })
}

fn parse_plain(raw: &str) -> Result<f64, String> {
    with_units(raw, &[("", |v| v)])
}

fn parse_ratio(raw: &str) -> Result<f64, String> {
    with_units(raw, &[("", |v| v), ("db", db_to_linear)])
}

fn parse_power(raw: &str) -> Result<f64, String> {
    with_units(raw, &[("", |v| v), ("w", |v| v), ("dbm", dbm_to_watts)])
}

fn parse_density(raw: &str) -> Result<f64, String> {
    with_units(raw, &[("", |v| v), ("/km2", |v| v)])
}

fn parse_duration(raw: &str) -> Result<f64, String> {
    with_units(raw, &[("", |v| v), ("s", |v| v), ("ms", |v| v * 1e-3)])
}

fn parse_frequency(raw: &str) -> Result<f64, String> {
    with_units(raw, &[("", |v| v), ("hz", |v| v), ("khz", |v| v * 1e3)])
}

fn parse_energy(raw: &str) -> Result<f64, String> {
    with_units(raw, &[("", |v| v), ("j", |v| v)])
}

fn parse_u32(raw: &str) -> Result<u32, String> {
    raw.trim()
        .parse()
        .map_err(|_| format!("`{raw}` is not a non-negative integer"))
}

fn parse_u64(raw: &str) -> Result<u64, String> {
    let raw = raw.trim();
    if let Ok(v) = raw.parse() {
        return Ok(v);
    }
    // Accept `1e5` style counts.
    match raw.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 => Ok(v as u64),
        _ => Err(format!("`{raw}` is not a non-negative integer")),
    }
}
