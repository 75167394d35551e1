//! Battery model of a harvesting device as a finite birth–death chain.
//!
//! Energy is counted in units of the per-repetition energy. Units arrive at
//! the harvest rate `mu` and, while the device is ON, leave at the depletion
//! rate `nu`. Under the canonical strategy `S{N_T}` the device turns OFF when
//! the battery empties and back ON once `N_T` units have been collected.

use std::ops::{Add, Div, Mul};

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{Error, Result};

/// Repetition values an NB-IoT carrier may configure for the random-access preamble.
pub const STANDARD_REPETITIONS: [u32; 8] = [1, 2, 4, 8, 16, 32, 64, 128];

/// Below this distance of `mu/nu` from one, the closed-form ON time is
/// replaced by a direct solve.
pub const RATIO_SINGULARITY_BAND: f64 = 1e-6;

/// Which per-repetition energy the depletion rate is charged against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundMode {
    /// Every attempt fails: only the preamble energy is spent. Gives the
    /// larger depletion rate and hence the lower availability.
    FailureBound,
    /// Every attempt succeeds and the data transmission is paid for too.
    SuccessBound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyConfig {
    /// Harvest rate in energy units per second.
    pub harvest_rate: f64,
    /// Probability that the data buffer is non-empty.
    pub nonempty_prob: f64,
    /// Transmit power in watts.
    pub tx_power: f64,
    /// Energy of one preamble repetition, joules.
    pub e0_ra: f64,
    /// Energy of one data repetition, joules.
    pub e0_da: f64,
    /// Battery capacity in energy units.
    pub capacity: u32,
    /// Repetition value, which is also the ON-toggle cutoff.
    pub repetitions: u32,
    pub bound_mode: BoundMode,
    /// Restrict `repetitions` to [`STANDARD_REPETITIONS`].
    pub standard_compliance: bool,
}

impl EnergyConfig {
    /// Builds a configuration whose per-repetition energies are the transmit
    /// power times the preamble and data durations (seconds).
    #[allow(clippy::too_many_arguments)]
    pub fn from_durations(
        harvest_rate: f64,
        nonempty_prob: f64,
        tx_power: f64,
        preamble_time: f64,
        data_time: f64,
        capacity: u32,
        repetitions: u32,
        bound_mode: BoundMode,
    ) -> Self {
        Self {
            harvest_rate,
            nonempty_prob,
            tx_power,
            e0_ra: tx_power * preamble_time,
            e0_da: tx_power * data_time,
            capacity,
            repetitions,
            bound_mode,
            standard_compliance: false,
        }
    }

    pub fn with_bound_mode(&self, bound_mode: BoundMode) -> Self {
        Self {
            bound_mode,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.harvest_rate > 0.0 && self.harvest_rate.is_finite()) {
            return Err(Error::config("mu0", "harvest rate must be positive"));
        }
        if !(self.tx_power > 0.0 && self.tx_power.is_finite()) {
            return Err(Error::config("p", "transmit power must be positive"));
        }
        if !(self.e0_ra > 0.0 && self.e0_ra.is_finite()) {
            return Err(Error::config("e0_ra", "preamble energy must be positive"));
        }
        if !(self.e0_da >= 0.0 && self.e0_da.is_finite()) {
            return Err(Error::config("e0_da", "data energy must be non-negative"));
        }
        if !(self.nonempty_prob > 0.0 && self.nonempty_prob <= 1.0) {
            return Err(Error::config("a_a", "must lie in (0, 1]"));
        }
        if self.repetitions < 1 || self.repetitions > self.capacity {
            return Err(Error::config(
                "n_t",
                format!(
                    "repetition value {} must lie in 1..={} (capacity)",
                    self.repetitions, self.capacity
                ),
            ));
        }
        if self.standard_compliance && !STANDARD_REPETITIONS.contains(&self.repetitions) {
            return Err(Error::config(
                "n_t",
                format!("{} is not a standard repetition value", self.repetitions),
            ));
        }
        Ok(())
    }

    /// Per-repetition energy charged under the configured bound.
    pub fn unit_energy(&self) -> f64 {
        match self.bound_mode {
            BoundMode::FailureBound => self.e0_ra,
            BoundMode::SuccessBound => self.e0_ra + self.e0_da,
        }
    }
}

/// Depletion rate `nu = A_a * P / E0` in energy units per second.
pub fn depletion_rate(cfg: &EnergyConfig) -> Result<f64> {
    let e0 = cfg.unit_energy();
    if !(e0 > 0.0) {
        return Err(Error::config("e0_ra", "per-repetition energy must be positive"));
    }
    Ok(cfg.nonempty_prob * cfg.tx_power / e0)
}

/// General toggle strategy: OFF below `off_level`, ON again at `on_cutoff`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrategySpec {
    pub off_level: u32,
    pub on_cutoff: u32,
    pub capacity: u32,
}

/// Strategy `S{cutoff}` that turns OFF at empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CanonicalStrategy {
    pub cutoff: u32,
    pub capacity: u32,
}

impl From<CanonicalStrategy> for StrategySpec {
    fn from(c: CanonicalStrategy) -> Self {
        StrategySpec {
            off_level: 0,
            on_cutoff: c.cutoff,
            capacity: c.capacity,
        }
    }
}

/// Shifts a strategy so that it turns OFF at empty; the energy below the
/// OFF level is never usable and drops out of the capacity.
pub fn normalize_strategy(s: StrategySpec) -> Result<CanonicalStrategy> {
    if !(s.off_level <= s.on_cutoff && s.on_cutoff <= s.capacity) {
        return Err(Error::domain(format!(
            "strategy requires 0 <= off level ({}) <= cutoff ({}) <= capacity ({})",
            s.off_level, s.on_cutoff, s.capacity
        )));
    }
    Ok(CanonicalStrategy {
        cutoff: s.on_cutoff - s.off_level,
        capacity: s.capacity - s.off_level,
    })
}

/// Tridiagonal generator of the energy chain over levels `0..=capacity`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    harvest_rate: f64,
    depletion_rate: f64,
    capacity: u32,
}

impl GeneratorMatrix {
    pub fn dimension(&self) -> usize {
        self.capacity as usize + 1
    }

    /// Rate from level `i` to level `j` (diagonal entries are negative).
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let top = self.capacity as usize;
        let (mu, nu) = (self.harvest_rate, self.depletion_rate);
        if i > top || j > top {
            return 0.0;
        }
        if j == i + 1 {
            mu
        } else if i == j + 1 {
            nu
        } else if i == j {
            let up = if i < top { mu } else { 0.0 };
            let down = if i > 0 { nu } else { 0.0 };
            -(up + down)
        } else {
            0.0
        }
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        let lo = i.saturating_sub(1);
        let hi = (i + 1).min(self.capacity as usize);
        (lo..=hi).map(|j| self.entry(i, j)).sum()
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dimension();
        (0..n)
            .map(|i| (0..n).map(|j| self.entry(i, j)).collect())
            .collect()
    }
}

pub fn generator_matrix(mu0: f64, nu0: f64, capacity: u32) -> Result<GeneratorMatrix> {
    check_rates(mu0, nu0)?;
    if capacity == 0 {
        return Err(Error::domain("capacity must be at least one unit"));
    }
    Ok(GeneratorMatrix {
        harvest_rate: mu0,
        depletion_rate: nu0,
        capacity,
    })
}

fn check_rates(mu0: f64, nu0: f64) -> Result<()> {
    if !(mu0 > 0.0 && mu0.is_finite()) {
        return Err(Error::domain("harvest rate must be positive and finite"));
    }
    if !(nu0 > 0.0 && nu0.is_finite()) {
        return Err(Error::domain("depletion rate must be positive and finite"));
    }
    Ok(())
}

/// Closed-form inverse of `-B`, where `B` is the generator restricted to the
/// non-empty levels `1..=capacity`. Row and column indices are zero-based.
pub fn neg_b_inverse(mu0: f64, nu0: f64, capacity: u32) -> Result<Vec<Vec<f64>>> {
    check_rates(mu0, nu0)?;
    Ok(neg_b_inverse_in(mu0, nu0, capacity as usize))
}

/// [`neg_b_inverse`] evaluated in any field-like number type, so the same
/// expression can be checked in exact rational arithmetic.
///
/// Entry `(m, n)` (one-based) is `(1/nu) * sum_{k=1}^{min(m,n)} rho^(n-k)`
/// with `rho = mu/nu`.
pub fn neg_b_inverse_in<T>(mu0: T, nu0: T, capacity: usize) -> Vec<Vec<T>>
where
    T: Clone + Zero + One + Add<Output = T> + Mul<Output = T> + Div<Output = T>,
{
    let rho = mu0 / nu0.clone();
    let mut powers = Vec::with_capacity(capacity);
    let mut p = T::one();
    for _ in 0..capacity {
        powers.push(p.clone());
        p = p * rho.clone();
    }

    let mut inv = vec![vec![T::zero(); capacity]; capacity];
    for n in 1..=capacity {
        let mut acc = T::zero();
        for m in 1..=capacity {
            if m <= n {
                acc = acc + powers[n - m].clone();
            }
            inv[m - 1][n - 1] = acc.clone() / nu0.clone();
        }
    }
    inv
}

/// Mean OFF time `N_T / mu`: the time to harvest `N_T` units from empty.
pub fn mean_off_time(mu0: f64, cutoff: u32) -> f64 {
    cutoff as f64 / mu0
}

/// Natural log of `nu * E[T_on]` from the closed form, with
/// `rho = mu/nu`. Written in terms of `expm1` so the large-capacity case
/// can be evaluated without overflowing `rho^capacity`.
fn ln_scaled_on_time(rho: f64, capacity: u32, cutoff: u32) -> f64 {
    let n = cutoff as f64;
    let a = (capacity + 1 - cutoff) as f64;
    let x = rho.ln();
    if rho < 1.0 {
        // (N - rho^a * S) / (1 - rho), S = (1 - rho^N) / (1 - rho)
        let s = (n * x).exp_m1() / x.exp_m1();
        let num = n - (a * x).exp() * s;
        (num / -x.exp_m1()).ln()
    } else {
        // (rho^a * S - N) / (rho - 1), with ln(rho^a * S) kept in log form
        let ln_expm1_nx = n * x + (-(-n * x).exp_m1()).ln();
        let ln_s = ln_expm1_nx - x.exp_m1().ln();
        let ln_lead = a * x + ln_s;
        ln_lead + (-n * (-ln_lead).exp()).ln_1p() - x.exp_m1().ln()
    }
}

/// Closed-form mean ON time. Undefined at `mu == nu`; the caller is
/// expected to stay outside [`RATIO_SINGULARITY_BAND`].
pub fn mean_on_time_closed_form(mu0: f64, nu0: f64, capacity: u32, cutoff: u32) -> f64 {
    (ln_scaled_on_time(mu0 / nu0, capacity, cutoff)).exp() / nu0
}

/// Mean ON time as the row sum of [`neg_b_inverse`] at row `cutoff`.
pub fn mean_on_time_row_sum(mu0: f64, nu0: f64, capacity: u32, cutoff: u32) -> f64 {
    let rho = mu0 / nu0;
    let m = cutoff as usize;
    let mut total = 0.0;
    for n in 1..=capacity as usize {
        // sum_{k=1}^{min(m,n)} rho^(n-k)
        let top = (n - 1) as i32;
        let bottom = (n - m.min(n)) as i32;
        let mut col = 0.0;
        for e in bottom..=top {
            col += rho.powi(e);
        }
        total += col;
    }
    total / nu0
}

/// Solves `(-B) t = rhs` for the hitting-time system directly.
///
/// Substituting level differences `d_m = t_m - t_{m-1}` turns `-B` into an
/// upper bidiagonal system `nu*d_m - mu*d_{m+1} = rhs_m`, solved from the
/// top level down. For non-negative right-hand sides every step adds
/// non-negative terms, so the solve stays accurate even when `mu/nu` is
/// far above one and Gaussian elimination on `-B` breaks down.
pub fn solve_neg_b(mu0: f64, nu0: f64, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let mut diff = vec![0.0; n];
    let mut carry = 0.0;
    for m in (0..n).rev() {
        carry = (rhs[m] + mu0 * carry) / nu0;
        diff[m] = carry;
    }
    let mut t = Vec::with_capacity(n);
    let mut acc = 0.0;
    for d in diff {
        acc += d;
        t.push(acc);
    }
    t
}

/// Mean ON time from the direct solve of `(-B) t = 1`.
pub fn mean_on_time_linear_solve(mu0: f64, nu0: f64, capacity: u32, cutoff: u32) -> f64 {
    let ones = vec![1.0; capacity as usize];
    solve_neg_b(mu0, nu0, &ones)[cutoff as usize - 1]
}

/// Mean ON time of `S{cutoff}`: the expected time for the chain started at
/// `cutoff` to first hit empty. Uses the closed form away from `mu == nu`.
pub fn mean_on_time(mu0: f64, nu0: f64, capacity: u32, cutoff: u32) -> Result<f64> {
    check_rates(mu0, nu0)?;
    if cutoff < 1 || cutoff > capacity {
        return Err(Error::domain(format!(
            "cutoff {cutoff} must lie in 1..={capacity}"
        )));
    }
    if ((mu0 / nu0) - 1.0).abs() < RATIO_SINGULARITY_BAND {
        Ok(mean_on_time_linear_solve(mu0, nu0, capacity, cutoff))
    } else {
        Ok(mean_on_time_closed_form(mu0, nu0, capacity, cutoff))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AvailabilityResult {
    /// Long-run fraction of time ON.
    pub eta0: f64,
    /// Mean ON period, seconds. Infinite when the closed form overflows.
    pub mean_on: f64,
    /// Mean OFF period, seconds.
    pub mean_off: f64,
    /// Depletion rate used, units per second.
    pub nu0: f64,
}

/// Long-run ON fraction `E[T_on] / (E[T_on] + E[T_off])` of `S{N_T}`.
pub fn energy_availability(cfg: &EnergyConfig) -> Result<AvailabilityResult> {
    cfg.validate()?;
    let nu0 = depletion_rate(cfg)?;
    let mu0 = cfg.harvest_rate;
    let n = cfg.repetitions;
    let mean_off = mean_off_time(mu0, n);
    let rho = mu0 / nu0;

    let (eta0, mean_on) = if (rho - 1.0).abs() < RATIO_SINGULARITY_BAND {
        let on = mean_on_time_linear_solve(mu0, nu0, cfg.capacity, n);
        (1.0 / (1.0 + mean_off / on), on)
    } else {
        // eta0 = 1 / (1 + N / (rho * g)) with g = nu * E[T_on]
        let ln_g = ln_scaled_on_time(rho, cfg.capacity, n);
        let ratio = n as f64 / rho * (-ln_g).exp();
        (1.0 / (1.0 + ratio), ln_g.exp() / nu0)
    };

    Ok(AvailabilityResult {
        eta0,
        mean_on,
        mean_off,
        nu0,
    })
}

/// Availability under the failure and success depletion rates, in that order.
pub fn availability_bounds(cfg: &EnergyConfig) -> Result<(f64, f64)> {
    let lower = energy_availability(&cfg.with_bound_mode(BoundMode::FailureBound))?;
    let upper = energy_availability(&cfg.with_bound_mode(BoundMode::SuccessBound))?;
    Ok((lower.eta0, upper.eta0))
}

/// How the depletion rate is chosen for each ON period of the simulated chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DepletionModel {
    Fixed(f64),
    /// Each ON period independently runs at `success_rate` with probability
    /// `success_prob`, otherwise at `failure_rate`.
    PerCycle {
        failure_rate: f64,
        success_rate: f64,
        success_prob: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainEstimate {
    /// Time-weighted ON fraction over the whole run.
    pub eta0: f64,
    /// Regenerative-cycle standard error; `None` with fewer than two
    /// completed OFF/ON cycles.
    pub std_error: Option<f64>,
    pub cycles: u64,
    pub transitions: u64,
    pub elapsed: f64,
}

/// Event-driven simulation of the energy chain under `S{cutoff}`.
///
/// Starts empty and OFF. Harvest arrivals are always active and are lost
/// while the battery is full; depletions occur only while ON.
pub fn simulate_chain(
    harvest_rate: f64,
    depletion: DepletionModel,
    capacity: u32,
    cutoff: u32,
    num_transitions: u64,
    seed: u64,
) -> Result<ChainEstimate> {
    if num_transitions < 1 {
        return Err(Error::domain("at least one transition is required"));
    }
    if cutoff < 1 || cutoff > capacity {
        return Err(Error::domain("cutoff must lie in 1..=capacity"));
    }
    let rates_ok = match depletion {
        DepletionModel::Fixed(nu) => nu > 0.0,
        DepletionModel::PerCycle {
            failure_rate,
            success_rate,
            success_prob,
        } => failure_rate > 0.0 && success_rate > 0.0 && (0.0..=1.0).contains(&success_prob),
    };
    if !(harvest_rate > 0.0) || !rates_ok {
        return Err(Error::domain("rates must be positive"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let harvest = Exp::new(harvest_rate).expect("positive rate");
    let pick_rate = |rng: &mut ChaCha8Rng| match depletion {
        DepletionModel::Fixed(nu) => nu,
        DepletionModel::PerCycle {
            failure_rate,
            success_rate,
            success_prob,
        } => {
            if rng.random::<f64>() < success_prob {
                success_rate
            } else {
                failure_rate
            }
        }
    };

    let mut level = 0u32;
    let mut on = false;
    let mut nu = 0.0;
    let mut transitions = 0u64;
    let (mut on_total, mut elapsed) = (0.0, 0.0);
    let (mut cycle_on, mut cycle_len) = (0.0, 0.0);
    let mut cycles: Vec<(f64, f64)> = Vec::new();

    while transitions < num_transitions {
        if on {
            let total = harvest_rate + nu;
            let dt = Exp::new(total).expect("positive rate").sample(&mut rng);
            elapsed += dt;
            on_total += dt;
            cycle_on += dt;
            cycle_len += dt;
            if rng.random::<f64>() * total < harvest_rate {
                level = (level + 1).min(capacity);
            } else {
                level -= 1;
                if level == 0 {
                    on = false;
                    cycles.push((cycle_on, cycle_len));
                    cycle_on = 0.0;
                    cycle_len = 0.0;
                }
            }
        } else {
            let dt = harvest.sample(&mut rng);
            elapsed += dt;
            cycle_len += dt;
            level += 1;
            if level >= cutoff {
                on = true;
                nu = pick_rate(&mut rng);
            }
        }
        transitions += 1;
    }

    let eta0 = on_total / elapsed;
    let std_error = (cycles.len() >= 2).then(|| regenerative_std_error(&cycles));
    Ok(ChainEstimate {
        eta0,
        std_error,
        cycles: cycles.len() as u64,
        transitions,
        elapsed,
    })
}

/// Ratio-estimator standard error over i.i.d. regeneration cycles.
fn regenerative_std_error(cycles: &[(f64, f64)]) -> f64 {
    let k = cycles.len() as f64;
    let on: f64 = cycles.iter().map(|c| c.0).sum();
    let len: f64 = cycles.iter().map(|c| c.1).sum();
    let ratio = on / len;
    let mean_len = len / k;
    let resid: f64 = cycles
        .iter()
        .map(|&(o, l)| {
            let r = o - ratio * l;
            r * r
        })
        .sum::<f64>()
        / (k - 1.0);
    (resid / k).sqrt() / mean_len
}

/// Simulates the chain described by `cfg`, using its depletion rate.
pub fn simulate_energy_chain(
    cfg: &EnergyConfig,
    num_transitions: u64,
    seed: u64,
) -> Result<ChainEstimate> {
    cfg.validate()?;
    let nu0 = depletion_rate(cfg)?;
    simulate_chain(
        cfg.harvest_rate,
        DepletionModel::Fixed(nu0),
        cfg.capacity,
        cfg.repetitions,
        num_transitions,
        seed,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_cfg(capacity: u32, repetitions: u32, mode: BoundMode) -> EnergyConfig {
        EnergyConfig::from_durations(0.05, 0.001, 0.02, 6e-3, 12.4e-3, capacity, repetitions, mode)
    }

    /// Availability written out exactly as the closed-form ratio, for
    /// moderate arguments only.
    fn availability_reference(mu: f64, nu: f64, capacity: u32, n: u32) -> f64 {
        let r = mu / nu;
        let n = n as f64;
        let num = n * (1.0 - r).powi(2);
        let den = r.powi(capacity as i32 + 2) * (1.0 - r.powf(-n)) + r * (1.0 - r) * n;
        1.0 / (1.0 + num / den)
    }

    #[test]
    fn depletion_rate_examples() {
        let mut cfg = paper_cfg(20, 4, BoundMode::FailureBound);
        cfg.e0_ra = 2e-5;
        assert!((depletion_rate(&cfg).unwrap() - 1.0).abs() < 1e-12);

        let unit = EnergyConfig {
            harvest_rate: 1.0,
            nonempty_prob: 1.0,
            tx_power: 1.0,
            e0_ra: 1.0,
            e0_da: 0.0,
            capacity: 4,
            repetitions: 1,
            bound_mode: BoundMode::SuccessBound,
            standard_compliance: false,
        };
        assert_eq!(depletion_rate(&unit).unwrap(), 1.0);

        let f = depletion_rate(&paper_cfg(20, 4, BoundMode::FailureBound)).unwrap();
        let s = depletion_rate(&paper_cfg(20, 4, BoundMode::SuccessBound)).unwrap();
        assert!(s < f);
    }

    #[test]
    fn validation_rejects_bad_fields() {
        let mut cfg = paper_cfg(20, 4, BoundMode::FailureBound);
        cfg.repetitions = 21;
        assert!(matches!(cfg.validate(), Err(Error::Config { field: "n_t", .. })));
        let mut cfg = paper_cfg(20, 3, BoundMode::FailureBound);
        cfg.standard_compliance = true;
        assert!(cfg.validate().is_err());
        cfg.standard_compliance = false;
        assert!(cfg.validate().is_ok());
        let mut cfg = paper_cfg(20, 4, BoundMode::FailureBound);
        cfg.nonempty_prob = 0.0;
        assert!(cfg.validate().is_err());
        cfg.nonempty_prob = 0.5;
        cfg.e0_ra = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn strategy_normalisation() {
        let s = StrategySpec { off_level: 2, on_cutoff: 5, capacity: 10 };
        assert_eq!(normalize_strategy(s).unwrap(), CanonicalStrategy { cutoff: 3, capacity: 8 });

        // S{M_c - N_T, M_c} keeps the repetition value as cutoff.
        let (mc, nt, cap) = (30, 8, 200);
        let s = StrategySpec { off_level: mc - nt, on_cutoff: mc, capacity: cap };
        assert_eq!(normalize_strategy(s).unwrap().cutoff, nt);

        let s = StrategySpec { off_level: 0, on_cutoff: 7, capacity: 9 };
        assert_eq!(normalize_strategy(s).unwrap(), CanonicalStrategy { cutoff: 7, capacity: 9 });

        let bad = StrategySpec { off_level: 3, on_cutoff: 2, capacity: 9 };
        assert!(matches!(normalize_strategy(bad), Err(Error::Domain(_))));
    }

    #[test]
    fn generator_shapes() {
        let g = generator_matrix(0.3, 0.7, 1).unwrap();
        assert_eq!(g.to_dense(), vec![vec![-0.3, 0.3], vec![0.7, -0.7]]);

        let g = generator_matrix(0.3, 0.7, 2).unwrap();
        assert_eq!(g.to_dense()[1], vec![0.7, -1.0, 0.3]);

        let g = generator_matrix(0.05, 0.1667, 40).unwrap();
        for i in 0..g.dimension() {
            assert!(g.row_sum(i).abs() < 1e-15);
        }
        assert!(matches!(generator_matrix(1.0, 1.0, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn inverse_small_cases() {
        let (mu, nu) = (0.3, 0.7);
        let inv = neg_b_inverse(mu, nu, 6).unwrap();
        for row in &inv {
            assert!((row[0] - 1.0 / nu).abs() < 1e-15);
        }
        let inv = neg_b_inverse(mu, nu, 2).unwrap();
        let expected = [[nu, mu], [nu, mu + nu]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((inv[i][j] - expected[i][j] / (nu * nu)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn off_time() {
        assert!((mean_off_time(0.05, 1) - 20.0).abs() < 1e-12);
        assert_eq!(mean_off_time(0.05, 6), 2.0 * mean_off_time(0.05, 3));
        assert!(mean_off_time(1e300, 4) < 1e-299);
    }

    #[test]
    fn on_time_drain_limit() {
        // Harvest negligible: N_T independent exponential(nu) depletions.
        let nu = 0.4;
        let on = mean_on_time(1e-9 * nu, nu, 30, 5).unwrap();
        assert!((on - 5.0 / nu).abs() / (5.0 / nu) < 1e-6);
    }

    #[test]
    fn on_time_fallback_at_equal_rates() {
        let (mu, cap, n) = (0.25, 12, 3);
        let on = mean_on_time(mu, mu, cap, n).unwrap();
        // At mu == nu the hitting time is N(2M + 1 - N) / (2 nu).
        let exact = (n * (2 * cap + 1 - n)) as f64 / (2.0 * mu);
        assert!((on - exact).abs() / exact < 1e-12, "{on} vs {exact}");
    }

    #[test]
    fn availability_matches_reference_expression() {
        for (mu, nu, cap, n) in [(0.05, 0.1667, 20, 4), (0.3, 0.1, 12, 2), (0.9, 1.0, 30, 8)] {
            let cfg = EnergyConfig {
                harvest_rate: mu,
                nonempty_prob: 1.0,
                tx_power: nu,
                e0_ra: 1.0,
                e0_da: 0.0,
                capacity: cap,
                repetitions: n,
                bound_mode: BoundMode::FailureBound,
                standard_compliance: false,
            };
            let got = energy_availability(&cfg).unwrap();
            let want = availability_reference(mu, nu, cap, n);
            assert!((got.eta0 - want).abs() < 1e-12, "{got:?} vs {want}");
            let renewal = 1.0 / (1.0 + n as f64 / (mu * got.mean_on));
            assert!((got.eta0 - renewal).abs() <= 1e-12 * got.eta0);
            let ratio = got.mean_on / (got.mean_on + got.mean_off);
            assert!((got.eta0 - ratio).abs() < 1e-12);
        }
    }

    #[test]
    fn availability_survives_huge_capacity() {
        // rho = 1.85 and capacity 2000 overflows rho^capacity.
        let mut cfg = paper_cfg(2000, 8, BoundMode::SuccessBound);
        cfg.e0_da = cfg.tx_power * 31e-3;
        let r = energy_availability(&cfg).unwrap();
        assert!(r.eta0 > 0.999_999 && r.eta0 <= 1.0);
        assert!(r.mean_on.is_infinite() || r.mean_on > 1e300);
    }

    #[test]
    fn harvest_dominated_availability_tends_to_one() {
        let mut cfg = paper_cfg(400, 4, BoundMode::FailureBound);
        cfg.harvest_rate = 50.0;
        assert!(energy_availability(&cfg).unwrap().eta0 > 0.999_999);
    }

    #[test]
    fn bounds_order_and_degenerate_case() {
        let cfg = paper_cfg(100, 4, BoundMode::FailureBound);
        let (lo, hi) = availability_bounds(&cfg).unwrap();
        assert!(lo < hi);
        let mut cfg = cfg;
        cfg.e0_da = 0.0;
        let (lo, hi) = availability_bounds(&cfg).unwrap();
        assert_eq!(lo, hi);
    }

    #[test]
    fn simulation_is_deterministic() {
        let cfg = paper_cfg(20, 4, BoundMode::FailureBound);
        let a = simulate_energy_chain(&cfg, 50_000, 9).unwrap();
        let b = simulate_energy_chain(&cfg, 50_000, 9).unwrap();
        assert_eq!(a, b);
        let c = simulate_energy_chain(&cfg, 50_000, 10).unwrap();
        assert_ne!(a.eta0, c.eta0);
    }

    #[test]
    fn simulation_without_depletion_stays_on() {
        let mut cfg = paper_cfg(20, 4, BoundMode::FailureBound);
        cfg.nonempty_prob = 1e-12;
        let est = simulate_energy_chain(&cfg, 100_000, 1).unwrap();
        assert!(est.eta0 > 0.99, "{est:?}");
    }

    #[test]
    fn simulation_converges_to_closed_form() {
        let (mu, nu, cap, n) = (0.05, 0.1, 20, 4);
        let est = simulate_chain(mu, DepletionModel::Fixed(nu), cap, n, 1_000_000, 2024).unwrap();
        let exact = availability_reference(mu, nu, cap, n);
        assert!((est.eta0 - exact).abs() / exact < 0.01, "{est:?} vs {exact}");
    }

    #[test]
    fn mixed_depletion_is_bracketed_by_bounds() {
        let cfg = paper_cfg(30, 4, BoundMode::FailureBound);
        let (lo, hi) = availability_bounds(&cfg).unwrap();
        let fail = depletion_rate(&cfg).unwrap();
        let succ = depletion_rate(&cfg.with_bound_mode(BoundMode::SuccessBound)).unwrap();
        let est = simulate_chain(
            cfg.harvest_rate,
            DepletionModel::PerCycle { failure_rate: fail, success_rate: succ, success_prob: 0.5 },
            cfg.capacity,
            cfg.repetitions,
            1_000_000,
            77,
        )
        .unwrap();
        assert!(lo < est.eta0 && est.eta0 < hi, "{lo} < {} < {hi}", est.eta0);
    }
}
