use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::deployment::{thin_and_assign, Deployment};
use super::geometry::{sample_ppp, EnbIndex, Point, Region};
use super::trial::{simulate_trial, TrialOutcome};
use crate::analytics::{active_density, mean_cell_radius, ChannelConfig, InterferenceMode};
use crate::error::{Error, Result};

/// Smallest deployment area of a desk-scale run.
pub const DESK_AREA_KM2: f64 = 400.0;

/// Largest deployment area of a desk-scale run.
pub const DESK_MAX_AREA_KM2: f64 = 4000.0;

/// Desk-scale regions grow until they hold this many same-preamble
/// interferers on average, up to [`DESK_MAX_AREA_KM2`].
pub const DESK_FIELD_INTERFERERS: f64 = 25.0;

/// eNB density of desk-scale runs.
pub const DESK_ENB_DENSITY: f64 = 1.0;

/// Radius, in mean cell radii, of the window in which eNBs are sampled
/// under [`TaggingPolicy::Central`].
pub const ASSOCIATION_WINDOW_CELLS: f64 = 8.0;

/// Attempts allowed per replication to find a usable tagged device.
pub const REDRAW_BUDGET: u32 = 1000;

/// Which devices may be tagged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaggingPolicy {
    /// Only devices whose eNB lies at least `2 / sqrt(pi lambda_B)` inside
    /// the region boundary.
    InteriorGuard,
    /// Any device in the region.
    Unguarded,
    /// Only devices within one mean cell radius of the region centre.
    Central,
}

/// How each replication's device population is generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    /// Sample only the same-preamble active field, `PPP(A_a eta0 lambda_D / L)`,
    /// plus the tagged device at a uniform location. Other preambles are
    /// orthogonal and never interact with the tagged one.
    SamePreamble,
    /// Sample every device, thin, assign preambles, then tag an active one.
    FullPopulation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub region: Region,
    pub channel: ChannelConfig,
    pub repetitions: u32,
    pub mode: InterferenceMode,
    pub replications: u64,
    pub seed: u64,
    pub tagging: TaggingPolicy,
    pub sampling: SamplingMode,
}

impl SimConfig {
    /// Same-preamble sampling with the interior guard.
    pub fn new(
        region: Region,
        channel: ChannelConfig,
        repetitions: u32,
        mode: InterferenceMode,
        replications: u64,
        seed: u64,
    ) -> Self {
        Self {
            region,
            channel,
            repetitions,
            mode,
            replications,
            seed,
            tagging: TaggingPolicy::InteriorGuard,
            sampling: SamplingMode::SamePreamble,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        if self.repetitions < 1 {
            return Err(Error::config("n_t", "repetition count must be at least 1"));
        }
        if self.replications < 1 {
            return Err(Error::config("replications", "at least one replication is required"));
        }
        let needed = match self.tagging {
            TaggingPolicy::InteriorGuard => self.guard_distance(),
            TaggingPolicy::Central => mean_cell_radius(self.channel.enb_density),
            TaggingPolicy::Unguarded => 0.0,
        };
        if self.region.radius <= needed {
            return Err(Error::config(
                "region",
                "region too small to leave an interior guard zone",
            ));
        }
        Ok(())
    }

    fn guard_distance(&self) -> f64 {
        2.0 * mean_cell_radius(self.channel.enb_density)
    }
}

/// Rescales a channel to eNB density `enb_density` without changing any SINR
/// distribution: device density keeps its ratio to the eNB density and the
/// noise power scales with `(lambda_B' / lambda_B)^(alpha / 2)`.
pub fn rescale_density(channel: &ChannelConfig, enb_density: f64) -> ChannelConfig {
    let k = enb_density / channel.enb_density;
    ChannelConfig {
        enb_density,
        device_density: channel.device_density * k,
        noise_power: channel.noise_power * k.powf(channel.path_loss_exp / 2.0),
        ..channel.clone()
    }
}

/// Paper-scale channel mapped to the desk eNB density, with the tagged
/// device at the centre of a region sized by [`DESK_FIELD_INTERFERERS`].
pub fn desk_scale(
    channel: &ChannelConfig,
    repetitions: u32,
    mode: InterferenceMode,
    replications: u64,
    seed: u64,
) -> Result<SimConfig> {
    channel.validate()?;
    let channel = rescale_density(channel, DESK_ENB_DENSITY);
    let lambda_da = active_density(&channel);
    let area = if lambda_da > 0.0 {
        (DESK_FIELD_INTERFERERS / lambda_da).clamp(DESK_AREA_KM2, DESK_MAX_AREA_KM2)
    } else {
        DESK_AREA_KM2
    };
    let mut cfg = SimConfig::new(
        Region::with_area(area)?,
        channel,
        repetitions,
        mode,
        replications,
        seed,
    );
    cfg.tagging = TaggingPolicy::Central;
    Ok(cfg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RachEstimate {
    pub p_hat: f64,
    pub ci_halfwidth: f64,
    pub trials: u64,
    pub seed: u64,
}

impl RachEstimate {
    pub fn from_counts(successes: u64, trials: u64, seed: u64) -> Self {
        let p_hat = successes as f64 / trials as f64;
        Self {
            p_hat,
            ci_halfwidth: 1.96 * (p_hat * (1.0 - p_hat) / trials as f64).sqrt(),
            trials,
            seed,
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        (value - self.p_hat).abs() <= self.ci_halfwidth
    }
}

/// Monte-Carlo estimate of the RACH success probability.
pub fn estimate_success_prob(cfg: &SimConfig) -> Result<RachEstimate> {
    let successes = count_outcomes(cfg, |o| o.rach_success)?;
    Ok(RachEstimate::from_counts(successes, cfg.replications, cfg.seed))
}

/// Monte-Carlo estimate of the probability that the tagged device's first
/// repetition clears the threshold on every symbol group.
pub fn estimate_joint_symbol_success(cfg: &SimConfig) -> Result<RachEstimate> {
    let single = SimConfig {
        repetitions: 1,
        ..cfg.clone()
    };
    let successes = count_outcomes(&single, |o| o.transmission_success)?;
    Ok(RachEstimate::from_counts(successes, cfg.replications, cfg.seed))
}

/// Number of replications for which `event` held. Replication `i` draws from
/// stream `i` of a generator seeded with `cfg.seed`, so the total does not
/// depend on scheduling.
pub fn count_outcomes<F>(cfg: &SimConfig, event: F) -> Result<u64>
where
    F: Fn(&TrialOutcome) -> bool + Sync,
{
    cfg.validate()?;
    (0..cfg.replications)
        .into_par_iter()
        .map(|i| run_replication(cfg, i).map(|o| event(&o) as u64))
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

/// Runs replication `index` of `cfg` on its own random stream.
pub fn run_replication(cfg: &SimConfig, index: u64) -> Result<TrialOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);
    for _ in 0..REDRAW_BUDGET {
        let drawn = match cfg.sampling {
            SamplingMode::SamePreamble => draw_same_preamble(cfg, &mut rng)?,
            SamplingMode::FullPopulation => draw_full_population(cfg, &mut rng)?,
        };
        if let Some((deployment, tagged)) = drawn {
            return simulate_trial(
                &deployment,
                &cfg.channel,
                cfg.repetitions,
                cfg.mode,
                tagged,
                &mut rng,
            );
        }
    }
    Err(Error::config(
        "a_a",
        "no taggable active device within the redraw budget; activity too low for the region",
    ))
}

fn eligible(cfg: &SimConfig, enb: Point, device: Point) -> bool {
    match cfg.tagging {
        TaggingPolicy::InteriorGuard => cfg.region.clearance(enb) >= cfg.guard_distance(),
        TaggingPolicy::Unguarded => true,
        TaggingPolicy::Central => device.norm() <= mean_cell_radius(cfg.channel.enb_density),
    }
}

fn draw_same_preamble<R: Rng + ?Sized>(
    cfg: &SimConfig,
    rng: &mut R,
) -> Result<Option<(Deployment, usize)>> {
    let cell_radius = mean_cell_radius(cfg.channel.enb_density);
    let enb_region = if cfg.tagging == TaggingPolicy::Central {
        // Only membership of the central cell depends on association, and a
        // device this far out shares it with probability below e^-25.
        Region::new(cfg.region.radius.min(ASSOCIATION_WINDOW_CELLS * cell_radius))?
    } else {
        cfg.region
    };
    let enbs = sample_ppp(cfg.channel.enb_density, &enb_region, rng);
    if enbs.is_empty() {
        return Ok(None);
    }
    let index = EnbIndex::new(&enbs)?;
    let tagged = if cfg.tagging == TaggingPolicy::Central {
        Region::new(cell_radius)?.sample_uniform(rng)
    } else {
        if !enbs.iter().any(|&e| eligible(cfg, e, e)) {
            return Ok(None);
        }
        // Uniform over the union of eligible cells, by rejection.
        loop {
            let p = cfg.region.sample_uniform(rng);
            if eligible(cfg, enbs[index.nearest(p)], p) {
                break p;
            }
        }
    };
    let mut devices = vec![tagged];
    devices.extend(sample_ppp(active_density(&cfg.channel), &cfg.region, rng));
    let mut deployment = Deployment::with_index(&index, devices);
    deployment.active_mask.iter_mut().for_each(|a| *a = true);
    deployment.preamble_choice.iter_mut().for_each(|c| *c = Some(0));
    Ok(Some((deployment, 0)))
}

fn draw_full_population<R: Rng + ?Sized>(
    cfg: &SimConfig,
    rng: &mut R,
) -> Result<Option<(Deployment, usize)>> {
    let enbs = sample_ppp(cfg.channel.enb_density, &cfg.region, rng);
    if enbs.is_empty() {
        return Ok(None);
    }
    let index = EnbIndex::new(&enbs)?;
    let devices = sample_ppp(cfg.channel.device_density, &cfg.region, rng);
    let deployment = Deployment::with_index(&index, devices);
    let deployment = thin_and_assign(
        deployment,
        cfg.channel.active_prob(),
        cfg.channel.preambles,
        rng,
    )?;
    let candidates: Vec<usize> = (0..deployment.device_positions.len())
        .filter(|&d| {
            deployment.active_mask[d]
                && eligible(cfg, enbs[deployment.association[d]], deployment.device_positions[d])
        })
        .collect();
    if candidates.is_empty() {
        return Ok(None);
    }
    let tagged = candidates[rng.random_range(0..candidates.len())];
    Ok(Some((deployment, tagged)))
}
