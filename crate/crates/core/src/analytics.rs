//! Analytic preamble-transmission and RACH success probabilities.
//!
//! A typical active device sits at distance `r0` from its nearest eNB, with
//! the nearest-neighbour density `2 eps pi lambda_B r0 exp(-eps pi lambda_B r0^2)`.
//! Same-preamble active devices form a PPP of density `lambda_Da`; fading on
//! every link and symbol group is unit-mean exponential. The probability that
//! all `l` symbol groups clear the SINR threshold follows from the PGFL of
//! that PPP, inclusion–exclusion over repetitions gives the preamble success
//! probability, and averaging the no-collision factor over the Voronoi cell
//! load gives the RACH success probability.

use std::cell::RefCell;
use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quadrature::{improper_integral, QuadratureSettings, UpperLimit};

/// Shape constant of the Voronoi cell-area approximation.
pub const CELL_LOAD_SHAPE: f64 = 3.575;

/// Hard cap on the truncation index of the cell-load sum.
pub const MAX_CELL_LOAD_TERMS: usize = 10_000;

/// Symbol groups per preamble repetition.
pub const SYMBOL_GROUPS_PER_REPETITION: u32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    /// Path-loss exponent, > 2.
    pub path_loss_exp: f64,
    /// SINR threshold, linear.
    pub sinr_threshold: f64,
    /// Noise power, watts.
    pub noise_power: f64,
    /// Transmit power, watts.
    pub tx_power: f64,
    /// Contention preambles.
    pub preambles: u32,
    /// eNB intensity per km².
    pub enb_density: f64,
    /// Device intensity per km².
    pub device_density: f64,
    pub nonempty_prob: f64,
    /// Energy availability of every device.
    pub availability: f64,
    pub epsilon_override: Option<f64>,
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.path_loss_exp > 2.0 && self.path_loss_exp.is_finite()) {
            return Err(Error::config("alpha", "path-loss exponent must exceed 2"));
        }
        if !(self.sinr_threshold > 0.0 && self.sinr_threshold.is_finite()) {
            return Err(Error::config("gamma_th", "SINR threshold must be positive"));
        }
        if !(self.noise_power >= 0.0 && self.noise_power.is_finite()) {
            return Err(Error::config("sigma2", "noise power must be non-negative"));
        }
        if !(self.tx_power > 0.0 && self.tx_power.is_finite()) {
            return Err(Error::config("p", "transmit power must be positive"));
        }
        if self.preambles < 1 {
            return Err(Error::config("l", "at least one preamble is required"));
        }
        if !(self.enb_density > 0.0 && self.enb_density.is_finite()) {
            return Err(Error::config("lambda_b", "eNB density must be positive"));
        }
        if !(self.device_density > 0.0 && self.device_density.is_finite()) {
            return Err(Error::config("lambda_d", "device density must be positive"));
        }
        if !(0.0..=1.0).contains(&self.nonempty_prob) {
            return Err(Error::config("a_a", "must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.availability) {
            return Err(Error::config("eta0", "must lie in [0, 1]"));
        }
        if let Some(eps) = self.epsilon_override {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::config("epsilon", "must be positive"));
            }
        }
        Ok(())
    }

    /// Probability that a device is contending in a given slot.
    pub fn active_prob(&self) -> f64 {
        self.nonempty_prob * self.availability
    }

    pub fn epsilon(&self) -> f64 {
        select_epsilon(active_density(self), self.enb_density, self.epsilon_override)
    }
}

/// Number of symbol groups whose SINRs must jointly clear the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolGroupCount(u32);

impl SymbolGroupCount {
    pub fn new(l: u32) -> Result<Self> {
        if l == 0 || l % SYMBOL_GROUPS_PER_REPETITION != 0 {
            return Err(Error::domain(format!(
                "symbol group count {l} must be a positive multiple of 4"
            )));
        }
        Ok(Self(l))
    }

    pub fn for_repetitions(repetitions: u32) -> Result<Self> {
        Self::new(SYMBOL_GROUPS_PER_REPETITION * repetitions)
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InterferenceMode {
    /// Interferers anywhere in the plane.
    Full,
    /// Only interferers within the mean cell radius `1/sqrt(pi lambda_B)`.
    IntraCellOnly,
}

/// Density of active devices on one preamble, `A_a * eta0 * lambda_D / L`.
pub fn active_density(cfg: &ChannelConfig) -> f64 {
    cfg.nonempty_prob * cfg.availability * cfg.device_density / cfg.preambles as f64
}

/// Correction factor of the serving-distance density: 1 when same-preamble
/// contenders are sparse relative to eNBs, 1.25 when they are dense.
pub fn select_epsilon(lambda_da: f64, lambda_b: f64, override_value: Option<f64>) -> f64 {
    if let Some(eps) = override_value {
        return eps;
    }
    if lambda_da / lambda_b <= 1.0 {
        1.0
    } else {
        1.25
    }
}

pub fn distance_pdf(r0: f64, lambda_b: f64, epsilon: f64) -> f64 {
    let k = epsilon * PI * lambda_b;
    2.0 * k * r0 * (-k * r0 * r0).exp()
}

/// `[1 - (1 + u^-alpha)^-l] * u`, the scaled PGFL integrand.
fn pgfl_kernel(u: f64, alpha: f64, l: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    let x = u.powf(-alpha);
    -(-l * x.ln_1p()).exp_m1() * u
}

/// `∫_0^upper [1 - (1 + u^-alpha)^-l] u du`.
fn scaled_pgfl_integral(alpha: f64, l: f64, upper: UpperLimit, q: &QuadratureSettings) -> Result<f64> {
    Ok(improper_integral(|u| pgfl_kernel(u, alpha, l), 0.0, upper, q)?.value)
}

/// Exponent of the interference Laplace functional seen by a device at
/// distance `r0` whose `l` symbol groups must all succeed.
pub fn pgfl_exponent(
    r0: f64,
    l: SymbolGroupCount,
    cfg: &ChannelConfig,
    mode: InterferenceMode,
    q: &QuadratureSettings,
) -> Result<f64> {
    let lambda_da = active_density(cfg);
    if lambda_da == 0.0 || r0 == 0.0 {
        return Ok(0.0);
    }
    let alpha = cfg.path_loss_exp;
    let scale = r0 * cfg.sinr_threshold.powf(1.0 / alpha);
    let upper = match mode {
        InterferenceMode::Full => UpperLimit::Infinite,
        InterferenceMode::IntraCellOnly => {
            UpperLimit::Finite(mean_cell_radius(cfg.enb_density) / scale)
        }
    };
    let integral = scaled_pgfl_integral(alpha, l.get() as f64, upper, q)?;
    Ok(2.0 * PI * lambda_da * scale * scale * integral)
}

/// Radius of the disc whose area equals the mean Voronoi cell area.
pub fn mean_cell_radius(enb_density: f64) -> f64 {
    1.0 / (PI * enb_density).sqrt()
}

/// Probability that all `l` symbol-group SINRs of a typical device clear
/// the threshold, averaged over its serving distance.
pub fn joint_symbol_success(
    l: SymbolGroupCount,
    cfg: &ChannelConfig,
    mode: InterferenceMode,
    q: &QuadratureSettings,
) -> Result<f64> {
    Ok(joint_symbol_success_with_error(l, cfg, mode, q)?.0)
}

fn joint_symbol_success_with_error(
    l: SymbolGroupCount,
    cfg: &ChannelConfig,
    mode: InterferenceMode,
    q: &QuadratureSettings,
) -> Result<(f64, f64)> {
    cfg.validate()?;
    let alpha = cfg.path_loss_exp;
    let gamma = cfg.sinr_threshold;
    let lf = l.get() as f64;
    let k = cfg.epsilon() * PI * cfg.enb_density;
    let lambda_da = active_density(cfg);

    // Integrate over t = eps pi lambda_B r0^2, for which the distance
    // density becomes exp(-t).
    let noise_coeff = lf * gamma * cfg.noise_power / cfg.tx_power * k.powf(-alpha / 2.0);
    let result = match mode {
        InterferenceMode::Full => {
            let kernel = if lambda_da > 0.0 {
                scaled_pgfl_integral(alpha, lf, UpperLimit::Infinite, q)?
            } else {
                0.0
            };
            let interference_coeff = 2.0 * PI * lambda_da * gamma.powf(2.0 / alpha) * kernel / k;
            improper_integral(
                |t| {
                    let noise = if noise_coeff > 0.0 {
                        noise_coeff * t.powf(alpha / 2.0)
                    } else {
                        0.0
                    };
                    (-t - interference_coeff * t - noise).exp()
                },
                0.0,
                UpperLimit::Infinite,
                q,
            )?
        }
        InterferenceMode::IntraCellOnly => {
            let inner_err = RefCell::new(None);
            let r = improper_integral(
                |t| {
                    let r0 = (t / k).sqrt();
                    let pgfl = match pgfl_exponent(r0, l, cfg, mode, q) {
                        Ok(v) => v,
                        Err(e) => {
                            inner_err.borrow_mut().get_or_insert(e);
                            0.0
                        }
                    };
                    let noise = if noise_coeff > 0.0 {
                        noise_coeff * t.powf(alpha / 2.0)
                    } else {
                        0.0
                    };
                    (-t - pgfl - noise).exp()
                },
                0.0,
                UpperLimit::Infinite,
                q,
            );
            if let Some(e) = inner_err.into_inner() {
                return Err(e);
            }
            r?
        }
    };
    Ok((result.value, result.error_estimate))
}

/// Probability that at least one of `repetitions` repetitions gets all four
/// symbol groups through, by inclusion–exclusion over the joint events.
pub fn preamble_success_prob(
    repetitions: u32,
    cfg: &ChannelConfig,
    mode: InterferenceMode,
    q: &QuadratureSettings,
) -> Result<f64> {
    if repetitions < 1 {
        return Err(Error::domain("repetition value must be at least 1"));
    }
    // Alternating binomial sums amplify quadrature error by up to
    // C(N, N/2); tighten the per-term tolerance to match.
    let peak = binomial(repetitions, repetitions / 2);
    let term_q = QuadratureSettings {
        rel_tol: (q.rel_tol / peak).max(1e-14),
        abs_tol: (q.abs_tol / peak).max(1e-300),
        ..*q
    };

    let mut total = 0.0;
    let mut error_bound = 0.0;
    for n in 1..=repetitions {
        let l = SymbolGroupCount::for_repetitions(n)?;
        let (p, err) = joint_symbol_success_with_error(l, cfg, mode, &term_q)?;
        let c = binomial(repetitions, n);
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        total += sign * c * p;
        error_bound += c * (err + f64::EPSILON * p);
    }

    let slack = q.abs_tol.max(q.rel_tol * total.abs());
    if error_bound > slack.max(1e-6) {
        return Err(Error::Numeric {
            message: format!(
                "inclusion-exclusion over {repetitions} repetitions lost precision"
            ),
            estimate: total,
            error_estimate: error_bound,
        });
    }
    clamp_probability(total, q.abs_tol.max(error_bound))
}

fn clamp_probability(p: f64, slack: f64) -> Result<f64> {
    if p < -slack || p > 1.0 + slack || !p.is_finite() {
        return Err(Error::Numeric {
            message: "probability outside [0, 1] beyond tolerance".into(),
            estimate: p,
            error_estimate: slack,
        });
    }
    Ok(p.clamp(0.0, 1.0))
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Probability that the Voronoi cell of a typical device holds `n` other
/// same-preamble active devices.
pub fn cell_load_pmf(n: u64, lambda_da: f64, lambda_b: f64) -> f64 {
    let rho = lambda_da / lambda_b;
    let c = CELL_LOAD_SHAPE;
    if rho == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let nf = n as f64;
    let ln_p = (c + 1.0) * c.ln() + ln_gamma(nf + c + 1.0) + nf * rho.ln()
        - ln_gamma(c + 1.0)
        - ln_gamma(nf + 1.0)
        - (nf + c + 1.0) * (rho + c).ln();
    ln_p.exp()
}

/// Truncation of the cell-load sum: the smallest `n*` whose cumulative mass
/// reaches `1 - tail_mass`, capped at [`MAX_CELL_LOAD_TERMS`].
#[derive(Debug, Clone, PartialEq)]
pub struct CellLoadTruncation {
    pub last_index: usize,
    /// Probabilities for `n = 0..=last_index`.
    pub pmf: Vec<f64>,
    pub cumulative_mass: f64,
}

pub fn truncate_cell_load(lambda_da: f64, lambda_b: f64, tail_mass: f64) -> CellLoadTruncation {
    let mut pmf = Vec::new();
    let mut total = 0.0;
    for n in 0..=MAX_CELL_LOAD_TERMS {
        let p = cell_load_pmf(n as u64, lambda_da, lambda_b);
        pmf.push(p);
        total += p;
        if total >= 1.0 - tail_mass {
            break;
        }
    }
    CellLoadTruncation {
        last_index: pmf.len() - 1,
        pmf,
        cumulative_mass: total,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RachProbability {
    pub value: f64,
    /// Cell-load mass dropped by the truncation; the omitted part of the
    /// sum is at most this times `preamble_success`.
    pub tail_bound: f64,
    pub preamble_success: f64,
    pub truncation_index: usize,
}

/// Probability that a typical active device delivers its preamble and no
/// same-cell contender on the same preamble does.
pub fn rach_success_prob(
    repetitions: u32,
    cfg: &ChannelConfig,
    mode: InterferenceMode,
    q: &QuadratureSettings,
) -> Result<RachProbability> {
    q.validate()?;
    let ps = preamble_success_prob(repetitions, cfg, mode, q)?;
    let trunc = truncate_cell_load(active_density(cfg), cfg.enb_density, q.pmf_tail_mass);
    let miss = 1.0 - ps;
    let mut value = 0.0;
    let mut survive = 1.0;
    for p in &trunc.pmf {
        value += p * ps * survive;
        survive *= miss;
    }
    Ok(RachProbability {
        value,
        tail_bound: (1.0 - trunc.cumulative_mass).max(0.0),
        preamble_success: ps,
        truncation_index: trunc.last_index,
    })
}

/// RACH success probability per repetition spent.
pub fn repetition_efficiency(
    repetitions: u32,
    cfg: &ChannelConfig,
    mode: InterferenceMode,
    q: &QuadratureSettings,
) -> Result<f64> {
    Ok(rach_success_prob(repetitions, cfg, mode, q)?.value / repetitions as f64)
}
