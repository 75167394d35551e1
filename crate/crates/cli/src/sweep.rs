use std::time::Instant;

use rayon::prelude::*;

use nbiot_rach::analytics::{preamble_success_prob, rach_success_prob, repetition_efficiency};
use nbiot_rach::energy::{energy_availability, simulate_energy_chain};
use nbiot_rach::sim::{count_outcomes, desk_scale};
use nbiot_rach::units::db_to_linear;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::preset::{Engine, Parameter, Series, SweepSpec, Target};

/// Energy-chain transitions simulated per requested trial.
pub const TRANSITIONS_PER_TRIAL: u64 = 10;

/// Result of one series at one swept value.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Cell {
    pub analytic: Option<f64>,
    pub sim: Option<f64>,
    pub ci_halfwidth: Option<f64>,
    /// Seconds spent on this cell; not part of the CSV table.
    pub runtime: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub value: f64,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub parameter: String,
    pub series: Vec<String>,
    pub engine: Engine,
    pub rows: Vec<Row>,
    /// Set when evaluation stopped early: the failing swept value and error.
    pub failure: Option<(f64, CliError)>,
}

impl SweepTable {
    pub fn new(parameter: &str, series: Vec<String>, engine: Engine) -> Self {
        Self {
            parameter: parameter.to_string(),
            series,
            engine,
            rows: Vec::new(),
            failure: None,
        }
    }
}

/// Worker count for sweeps: this variable if set, else the available cores.
pub const WORKERS_ENV: &str = "NBIOT_RACH_WORKERS";

pub fn worker_count() -> Result<usize, CliError> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(CliError::config(WORKERS_ENV, format!("`{v}` is not a positive integer"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Evaluates every (value, series) cell on a pool of `workers` threads.
/// Rows come back in sweep order; evaluation stops at the first failing row.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepTable, CliError> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    let ns = spec.series.len();
    let results: Vec<Result<Cell, CliError>> = pool.install(|| {
        (0..spec.values.len() * ns)
            .into_par_iter()
            .map(|i| evaluate(spec, spec.values[i / ns], &spec.series[i % ns]))
            .collect()
    });

    let mut table = SweepTable::new(
        spec.parameter.name(),
        spec.series.iter().map(|s| s.label.clone()).collect(),
        spec.engine,
    );
    for (value, chunk) in spec.values.iter().zip(results.chunks(ns)) {
        match chunk.iter().cloned().collect::<Result<Vec<_>, _>>() {
            Ok(cells) => table.rows.push(Row { value: *value, cells }),
            Err(e) => {
                table.failure = Some((*value, e));
                break;
            }
        }
    }
    Ok(table)
}

/// Base configuration with `series` and the swept `value` applied.
pub fn point_config(spec: &SweepSpec, value: f64, series: &Series) -> Result<RunConfig, CliError> {
    let mut cfg = spec.base.clone();
    let base_margin = cfg.energy.capacity.saturating_sub(cfg.energy.repetitions);
    let mut repetitions = series.repetitions.unwrap_or(cfg.energy.repetitions);
    let mut margin = series.capacity_margin.unwrap_or(base_margin);
    let mut energy_changed = false;

    if let Some(b) = series.bound {
        cfg.energy.bound_mode = b;
    }
    if let Some(m) = series.mode {
        cfg.mode = m;
    }
    if let Some(a) = series.nonempty_prob {
        cfg.channel.nonempty_prob = a;
        cfg.energy.nonempty_prob = a;
    }
    if let Some(e) = series.epsilon {
        cfg.channel.epsilon_override = Some(e);
    }
    if let Some(g) = series.sinr_threshold_db {
        cfg.channel.sinr_threshold = db_to_linear(g);
    }

    match spec.parameter {
        Parameter::Repetitions => repetitions = value as u32,
        Parameter::CapacityMargin => {
            margin = value as u32;
            energy_changed = true;
        }
        Parameter::HarvestRate => {
            cfg.energy.harvest_rate = value;
            energy_changed = true;
        }
        Parameter::Availability => {
            cfg.channel.availability = value;
            cfg.eta0_fixed = true;
        }
        Parameter::TxPower => {
            cfg.channel.tx_power = value;
            // Per-repetition energies scale with the transmit power.
            let k = value / cfg.energy.tx_power;
            cfg.energy.tx_power = value;
            cfg.energy.e0_ra *= k;
            cfg.energy.e0_da *= k;
        }
        Parameter::SinrThresholdDb => cfg.channel.sinr_threshold = db_to_linear(value),
        Parameter::DensityRatio => cfg.channel.device_density = value * cfg.channel.enb_density,
        Parameter::NonemptyProb => {
            cfg.channel.nonempty_prob = value;
            cfg.energy.nonempty_prob = value;
            energy_changed = true;
        }
    }
    cfg.energy.repetitions = repetitions;
    cfg.energy.capacity = repetitions
        .checked_add(margin)
        .ok_or_else(|| CliError::config("m0", "capacity overflows"))?;
    cfg.energy.validate()?;
    // RACH curves hold eta0 at its base value across repetition values; it
    // is re-derived only when a harvesting or buffer parameter is swept.
    if energy_changed {
        cfg.refresh_availability()?;
    }
    cfg.channel.validate()?;
    Ok(cfg)
}

fn evaluate(spec: &SweepSpec, value: f64, series: &Series) -> Result<Cell, CliError> {
    let start = Instant::now();
    let cfg = point_config(spec, value, series)?;
    let n_t = cfg.energy.repetitions;
    let mut cell = Cell::default();

    if spec.engine.analytic() {
        let q = &cfg.quadrature;
        cell.analytic = Some(match spec.target {
            Target::Availability => energy_availability(&cfg.energy)?.eta0,
            Target::PreambleSuccess => preamble_success_prob(n_t, &cfg.channel, cfg.mode, q)?,
            Target::RachSuccess => rach_success_prob(n_t, &cfg.channel, cfg.mode, q)?.value,
            Target::RepetitionEfficiency => repetition_efficiency(n_t, &cfg.channel, cfg.mode, q)?,
        });
    }

    if spec.engine.simulation() {
        let (p, ci) = match spec.target {
            Target::Availability => {
                let transitions = cfg.trials.saturating_mul(TRANSITIONS_PER_TRIAL);
                let est = simulate_energy_chain(&cfg.energy, transitions, spec.seed)?;
                (est.eta0, est.std_error.map_or(f64::NAN, |se| 1.96 * se))
            }
            target => {
                let sim = desk_scale(&cfg.channel, n_t, cfg.mode, cfg.trials, spec.seed)?;
                let hits = match target {
                    Target::PreambleSuccess => count_outcomes(&sim, |o| o.transmission_success)?,
                    _ => count_outcomes(&sim, |o| o.rach_success)?,
                };
                let n = cfg.trials as f64;
                let p = hits as f64 / n;
                let ci = 1.96 * (p * (1.0 - p) / n).sqrt();
                if target == Target::RepetitionEfficiency {
                    (p / n_t as f64, ci / n_t as f64)
                } else {
                    (p, ci)
                }
            }
        };
        cell.sim = Some(p);
        cell.ci_halfwidth = Some(ci);
    }
    cell.runtime = start.elapsed().as_secs_f64();
    Ok(cell)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preset::build;

    #[test]
    fn tx_power_sweep_scales_energies() {
        let spec = build("fig8", Engine::Analytic, 0, RunConfig::defaults()).unwrap();
        let cfg = point_config(&spec, 0.2, &spec.series[0]).unwrap();
        assert_eq!(cfg.channel.tx_power, 0.2);
        assert!((cfg.energy.e0_ra - 0.2 * 6e-3).abs() < 1e-15);
        // nu0 = A_a P / E0 does not depend on P, so eta0 is unchanged.
        assert_eq!(cfg.channel.availability, spec.base.channel.availability);
    }

    #[test]
    fn repetition_series_keep_eta0() {
        let spec = build("fig10", Engine::Analytic, 0, RunConfig::defaults()).unwrap();
        for s in &spec.series {
            let cfg = point_config(&spec, 1e4, s).unwrap();
            assert_eq!(cfg.channel.availability, spec.base.channel.availability);
            assert!((cfg.channel.device_density - 1e3).abs() < 1e-9);
        }
    }

    #[test]
    fn harvest_sweep_rederives_eta0() {
        let spec = build("fig6", Engine::Analytic, 0, RunConfig::defaults()).unwrap();
        let a = point_config(&spec, 0.005, &spec.series[0]).unwrap();
        let b = point_config(&spec, 0.5, &spec.series[0]).unwrap();
        assert!(a.channel.availability < b.channel.availability);
    }

    #[test]
    fn analytic_fig13_rows_in_order() {
        let spec = build("fig13", Engine::Analytic, 0, RunConfig::defaults()).unwrap();
        let table = run_sweep(&spec, 2).unwrap();
        assert!(table.failure.is_none());
        let values: Vec<_> = table.rows.iter().map(|r| r.value).collect();
        assert_eq!(values, spec.values);
    }
}
