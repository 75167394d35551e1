//! Sweep definitions, one per reproduced figure plus a config-driven custom one.

use nbiot_rach::analytics::InterferenceMode;
use nbiot_rach::energy::BoundMode;

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Availability,
    PreambleSuccess,
    RachSuccess,
    RepetitionEfficiency,
}

impl Target {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "availability" => Ok(Target::Availability),
            "preamble" => Ok(Target::PreambleSuccess),
            "rach" => Ok(Target::RachSuccess),
            "efficiency" => Ok(Target::RepetitionEfficiency),
            other => Err(CliError::config(
                "target",
                format!("`{other}` is not availability|preamble|rach|efficiency"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Analytic,
    Simulation,
    Both,
}

impl Engine {
    pub fn analytic(self) -> bool {
        matches!(self, Engine::Analytic | Engine::Both)
    }

    pub fn simulation(self) -> bool {
        matches!(self, Engine::Simulation | Engine::Both)
    }
}

/// Swept configuration field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parameter {
    Repetitions,
    HarvestRate,
    Availability,
    TxPower,
    /// SINR threshold in dB.
    SinrThresholdDb,
    /// `lambda_D / lambda_B`, moving `lambda_D`.
    DensityRatio,
    NonemptyProb,
    /// `M0 - N_T`.
    CapacityMargin,
}

impl Parameter {
    pub const ALL: [Parameter; 8] = [
        Parameter::Repetitions,
        Parameter::HarvestRate,
        Parameter::Availability,
        Parameter::TxPower,
        Parameter::SinrThresholdDb,
        Parameter::DensityRatio,
        Parameter::NonemptyProb,
        Parameter::CapacityMargin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Parameter::Repetitions => "n_t",
            Parameter::HarvestRate => "mu0",
            Parameter::Availability => "eta0",
            Parameter::TxPower => "p",
            Parameter::SinrThresholdDb => "gamma_th_db",
            Parameter::DensityRatio => "lambda_ratio",
            Parameter::NonemptyProb => "a_a",
            Parameter::CapacityMargin => "m0_minus_n_t",
        }
    }

    pub fn parse(s: &str) -> Result<Self, CliError> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| CliError::config("sweep", format!("`{s}` is not a sweepable field")))
    }

    fn is_integer(self) -> bool {
        matches!(self, Parameter::Repetitions | Parameter::CapacityMargin)
    }
}

/// One curve of a figure: the settings it fixes on top of the base config.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Series {
    pub label: String,
    pub repetitions: Option<u32>,
    pub capacity_margin: Option<u32>,
    pub bound: Option<BoundMode>,
    pub mode: Option<InterferenceMode>,
    pub nonempty_prob: Option<f64>,
    pub epsilon: Option<f64>,
    pub sinr_threshold_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub name: String,
    pub target: Target,
    pub engine: Engine,
    pub parameter: Parameter,
    pub values: Vec<f64>,
    pub series: Vec<Series>,
    pub base: RunConfig,
    pub seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.values.is_empty() {
            return Err(CliError::config("values", "sweep needs at least one value"));
        }
        let increasing = self.values.windows(2).all(|w| w[0] < w[1]);
        let decreasing = self.values.windows(2).all(|w| w[0] > w[1]);
        if !(increasing || decreasing) {
            return Err(CliError::config("values", "sweep values must be strictly monotone"));
        }
        if self.parameter.is_integer() && self.values.iter().any(|v| v.fract() != 0.0 || *v < 0.0) {
            return Err(CliError::config("values", "this field takes non-negative integers"));
        }
        if self.series.is_empty() {
            return Err(CliError::config("series_n_t", "sweep needs at least one series"));
        }
        Ok(())
    }
}

pub const PRESET_NAMES: [&str; 10] = [
    "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11", "fig12", "fig13", "custom",
];

const REPETITION_SERIES: [u32; 4] = [1, 2, 4, 8];

fn n_t_series(prefix: &str) -> Vec<Series> {
    REPETITION_SERIES
        .iter()
        .map(|&n| Series {
            label: format!("{prefix}nt{n}"),
            repetitions: Some(n),
            ..Series::default()
        })
        .collect()
}

fn crossed(outer: Vec<Series>, inner: &[Series]) -> Vec<Series> {
    outer
        .into_iter()
        .flat_map(|o| {
            inner.iter().map(move |i| Series {
                label: format!("{}_{}", i.label, o.label),
                repetitions: i.repetitions.or(o.repetitions),
                capacity_margin: i.capacity_margin.or(o.capacity_margin),
                bound: i.bound.or(o.bound),
                mode: i.mode.or(o.mode),
                nonempty_prob: i.nonempty_prob.or(o.nonempty_prob),
                epsilon: i.epsilon.or(o.epsilon),
                sinr_threshold_db: i.sinr_threshold_db.or(o.sinr_threshold_db),
            })
        })
        .collect()
}

fn bound_series() -> Vec<Series> {
    vec![
        Series {
            label: "lower".into(),
            bound: Some(BoundMode::FailureBound),
            ..Series::default()
        },
        Series {
            label: "upper".into(),
            bound: Some(BoundMode::SuccessBound),
            ..Series::default()
        },
    ]
}

fn density_ratios() -> Vec<f64> {
    vec![1e3, 2e3, 5e3, 1e4, 2e4, 5e4, 1e5]
}

fn gamma_series() -> Vec<Series> {
    [10.0, 20.0]
        .iter()
        .map(|&g| Series {
            label: format!("g{g}db"),
            sinr_threshold_db: Some(g),
            ..Series::default()
        })
        .collect()
}

/// Builds the named preset on top of `base`.
///
/// | preset | target | axis | series |
/// |---|---|---|---|
/// | fig5 | availability | N_T in 1..128 | M0 - N_T in {0, 10, 40, 160} x bound |
/// | fig6 | availability | mu0 | (N_T, M0 - N_T) in {1, 8} x {0, 10} x bound |
/// | fig7 | RACH success | eta0 | N_T |
/// | fig8 | RACH success | P | N_T |
/// | fig9 | RACH success | gamma_th (dB) | N_T |
/// | fig10 | RACH success | lambda_D/lambda_B | N_T x {full, intra-cell} interference |
/// | fig11 | RACH success | lambda_D/lambda_B | N_T x {light, heavy} traffic |
/// | fig12 | RACH success | lambda_D/lambda_B | N_T x gamma_th in {10, 20} dB |
/// | fig13 | repetition efficiency | lambda_D/lambda_B | N_T x gamma_th in {10, 20} dB |
/// | custom | `target` key | `sweep` / `values` keys | `series_n_t` key |
pub fn build(name: &str, engine: Engine, seed: u64, base: RunConfig) -> Result<SweepSpec, CliError> {
    let (target, parameter, values, series) = match name {
        "fig5" => {
            let margins = [0u32, 10, 40, 160]
                .iter()
                .map(|&m| Series {
                    label: format!("margin{m}"),
                    capacity_margin: Some(m),
                    ..Series::default()
                })
                .collect();
            (
                Target::Availability,
                Parameter::Repetitions,
                vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0],
                crossed(margins, &bound_series()),
            )
        }
        "fig6" => {
            let combos = [(1u32, 0u32), (1, 10), (8, 0), (8, 10)]
                .iter()
                .map(|&(n, m)| Series {
                    label: format!("nt{n}_margin{m}"),
                    repetitions: Some(n),
                    capacity_margin: Some(m),
                    ..Series::default()
                })
                .collect();
            (
                Target::Availability,
                Parameter::HarvestRate,
                vec![0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5],
                crossed(combos, &bound_series()),
            )
        }
        "fig7" => (
            Target::RachSuccess,
            Parameter::Availability,
            (1..=10).map(|i| i as f64 / 10.0).collect(),
            n_t_series(""),
        ),
        "fig8" => (
            Target::RachSuccess,
            Parameter::TxPower,
            vec![0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0],
            n_t_series(""),
        ),
        "fig9" => (
            Target::RachSuccess,
            Parameter::SinrThresholdDb,
            (-2..=6).map(|i| i as f64 * 5.0).collect(),
            n_t_series(""),
        ),
        "fig10" => {
            let modes = vec![
                Series {
                    label: "full".into(),
                    mode: Some(InterferenceMode::Full),
                    ..Series::default()
                },
                Series {
                    label: "intra".into(),
                    mode: Some(InterferenceMode::IntraCellOnly),
                    ..Series::default()
                },
            ];
            (
                Target::RachSuccess,
                Parameter::DensityRatio,
                density_ratios(),
                crossed(modes, &n_t_series("")),
            )
        }
        "fig11" => {
            let traffic = vec![
                Series {
                    label: "light".into(),
                    nonempty_prob: Some(0.001),
                    epsilon: Some(1.0),
                    ..Series::default()
                },
                Series {
                    label: "heavy".into(),
                    nonempty_prob: Some(0.015),
                    epsilon: Some(1.25),
                    ..Series::default()
                },
            ];
            (
                Target::RachSuccess,
                Parameter::DensityRatio,
                density_ratios(),
                crossed(traffic, &n_t_series("")),
            )
        }
        "fig12" | "fig13" => (
            if name == "fig12" {
                Target::RachSuccess
            } else {
                Target::RepetitionEfficiency
            },
            Parameter::DensityRatio,
            density_ratios(),
            crossed(gamma_series(), &n_t_series("")),
        ),
        "custom" => {
            let c = &base.custom;
            let target = Target::parse(
                c.target
                    .as_deref()
                    .ok_or_else(|| CliError::config("target", "custom preset needs `target`"))?,
            )?;
            let parameter = Parameter::parse(
                c.parameter
                    .as_deref()
                    .ok_or_else(|| CliError::config("sweep", "custom preset needs `sweep`"))?,
            )?;
            let series = if c.series_n_t.is_empty() {
                vec![Series {
                    label: format!("nt{}", base.energy.repetitions),
                    ..Series::default()
                }]
            } else {
                c.series_n_t
                    .iter()
                    .map(|&n| Series {
                        label: format!("nt{n}"),
                        repetitions: Some(n),
                        ..Series::default()
                    })
                    .collect()
            };
            (target, parameter, c.values.clone(), series)
        }
        other => {
            return Err(CliError::config(
                "preset",
                format!("unknown preset `{other}` (expected one of {})", PRESET_NAMES.join(", ")),
            ))
        }
    };
    let spec = SweepSpec {
        name: name.to_string(),
        target,
        engine,
        parameter,
        values,
        series,
        base,
        seed,
    };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_builds() {
        for name in &PRESET_NAMES[..9] {
            let spec = build(name, Engine::Analytic, 1, RunConfig::defaults()).unwrap();
            assert!(!spec.series.is_empty(), "{name}");
        }
    }

    #[test]
    fn custom_requires_keys() {
        assert!(build("custom", Engine::Analytic, 1, RunConfig::defaults()).is_err());
        let base = RunConfig::parse("target = rach\nsweep = p\nvalues = 0.01, 0.1").unwrap();
        let spec = build("custom", Engine::Analytic, 1, base).unwrap();
        assert_eq!(spec.parameter, Parameter::TxPower);
        assert_eq!(spec.series.len(), 1);
    }

    #[test]
    fn values_must_be_monotone() {
        let base = RunConfig::parse("target = rach\nsweep = p\nvalues = 0.1, 0.01, 0.2").unwrap();
        assert!(build("custom", Engine::Analytic, 1, base).is_err());
        let base = RunConfig::parse("target = rach\nsweep = n_t\nvalues = 1, 2.5").unwrap();
        assert!(build("custom", Engine::Analytic, 1, base).is_err());
    }

    #[test]
    fn crossed_labels() {
        let spec = build("fig10", Engine::Analytic, 1, RunConfig::defaults()).unwrap();
        let labels: Vec<_> = spec.series.iter().map(|s| s.label.as_str()).collect();
        assert_eq!(labels[0], "nt1_full");
        assert_eq!(labels[7], "nt8_intra");
    }
}
