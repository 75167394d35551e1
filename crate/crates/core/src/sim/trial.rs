use rand::Rng;
use rand_distr::{Distribution, Exp1};

use super::deployment::Deployment;
use crate::analytics::{ChannelConfig, InterferenceMode, SYMBOL_GROUPS_PER_REPETITION};
use crate::error::{Error, Result};

/// Result of one contention attempt by the tagged device.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    /// Some repetition had all of its symbol-group SINRs above threshold.
    pub transmission_success: bool,
    /// A same-cell contender on the same preamble also got through.
    pub collision: bool,
    pub rach_success: bool,
    /// Repetitions in which the tagged device cleared the threshold.
    pub repetitions_succeeded: u32,
}

impl TrialOutcome {
    fn new(transmission_success: bool, collision: bool, repetitions_succeeded: u32) -> Self {
        Self {
            transmission_success,
            collision,
            rach_success: transmission_success && !collision,
            repetitions_succeeded,
        }
    }
}

/// Plays out one NPRACH attempt of `tagged` over `repetitions` repetitions.
///
/// Received powers are evaluated at the tagged device's serving eNB. Every
/// link gets one unit-mean exponential fade per symbol group, shared by the
/// tagged and contender SINR evaluations.
pub fn simulate_trial<R: Rng + ?Sized>(
    deployment: &Deployment,
    channel: &ChannelConfig,
    repetitions: u32,
    mode: InterferenceMode,
    tagged: usize,
    rng: &mut R,
) -> Result<TrialOutcome> {
    if repetitions < 1 {
        return Err(Error::domain("repetition count must be at least 1"));
    }
    if tagged >= deployment.device_positions.len() || !deployment.active_mask[tagged] {
        return Err(Error::domain("tagged device must be active"));
    }
    let cell = deployment.association[tagged];
    let enb = deployment.enb_positions[cell];
    let alpha = channel.path_loss_exp;

    // Participants: tagged first, then same-cell contenders, then the rest.
    let peers: Vec<usize> = deployment.same_preamble_peers(tagged).collect();
    let mut links = vec![tagged];
    links.extend(peers.iter().copied().filter(|&j| deployment.association[j] == cell));
    let contenders = links.len() - 1;
    if mode == InterferenceMode::Full {
        links.extend(peers.iter().copied().filter(|&j| deployment.association[j] != cell));
    }
    let mean_power: Vec<f64> = links
        .iter()
        .map(|&j| {
            let r = deployment.device_positions[j].dist(enb);
            channel.tx_power * r.powf(-alpha)
        })
        .collect();

    let groups = SYMBOL_GROUPS_PER_REPETITION as usize;
    let mut received = vec![0.0; links.len()];
    let mut tagged_ok = vec![true; repetitions as usize];
    let mut contender_ok = vec![false; contenders];
    let mut contender_rep_ok = vec![true; contenders];
    for rep in 0..repetitions as usize {
        contender_rep_ok.iter_mut().for_each(|ok| *ok = true);
        for _ in 0..groups {
            let mut total = 0.0;
            for (s, &m) in received.iter_mut().zip(&mean_power) {
                let fade: f64 = Exp1.sample(rng);
                *s = m * fade;
                total += *s;
            }
            let clears = |k: usize| -> bool {
                let interference = (total - received[k]).max(0.0);
                received[k] >= channel.sinr_threshold * (interference + channel.noise_power)
            };
            if tagged_ok[rep] && !clears(0) {
                tagged_ok[rep] = false;
            }
            for (k, ok) in contender_rep_ok.iter_mut().enumerate() {
                if *ok && !clears(k + 1) {
                    *ok = false;
                }
            }
        }
        for (done, ok) in contender_ok.iter_mut().zip(&contender_rep_ok) {
            *done |= *ok;
        }
    }
    let succeeded = tagged_ok.iter().filter(|&&ok| ok).count() as u32;
    let collision = contender_ok.iter().any(|&ok| ok);
    Ok(TrialOutcome::new(succeeded > 0, collision, succeeded))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::geometry::Point;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn channel(noise: f64) -> ChannelConfig {
        ChannelConfig {
            path_loss_exp: 4.0,
            sinr_threshold: 100.0,
            noise_power: noise,
            tx_power: 0.02,
            preambles: 48,
            enb_density: 0.1,
            device_density: 100.0,
            nonempty_prob: 0.001,
            availability: 0.3,
            epsilon_override: None,
        }
    }

    fn all_active(enbs: Vec<Point>, devs: Vec<Point>, preamble: &[u32]) -> Deployment {
        let mut d = Deployment::new(enbs, devs).unwrap();
        for (i, &p) in preamble.iter().enumerate() {
            d.active_mask[i] = true;
            d.preamble_choice[i] = Some(p);
        }
        d
    }

    #[test]
    fn lone_device_without_noise_succeeds() {
        let d = all_active(
            vec![Point::ORIGIN],
            vec![Point::new(3.0, 4.0), Point::new(0.1, 0.0)],
            &[0, 1],
        );
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let out = simulate_trial(&d, &channel(0.0), 1, InterferenceMode::Full, 0, &mut rng)
                .unwrap();
            assert!(out.transmission_success && !out.collision && out.rach_success);
        }
    }

    #[test]
    fn co_located_contenders_are_symmetric() {
        // Identical mean powers; each fade is exchangeable, and with gamma > 1
        // at most one of the two can clear the threshold.
        let p = Point::new(0.5, 0.0);
        let d = all_active(vec![Point::ORIGIN], vec![p, p], &[0, 0]);
        let mut cfg = channel(0.0);
        cfg.sinr_threshold = 1.0;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (mut tx, mut col) = (0, 0);
        for _ in 0..4000 {
            let out = simulate_trial(&d, &cfg, 1, InterferenceMode::Full, 0, &mut rng).unwrap();
            assert_eq!(out.rach_success, out.transmission_success && !out.collision);
            tx += out.transmission_success as u32;
            col += out.collision as u32;
        }
        // Each wins a group with probability 1/2, so all 4 with 1/16.
        for count in [tx, col] {
            let p = count as f64 / 4000.0;
            assert!((p - 1.0 / 16.0).abs() < 4.0 * (1.0f64 / 16.0 * 15.0 / 16.0 / 4000.0).sqrt());
        }
    }

    #[test]
    fn threshold_below_one_lets_both_collide() {
        let p = Point::new(0.5, 0.0);
        let d = all_active(vec![Point::ORIGIN], vec![p, p], &[0, 0]);
        let mut cfg = channel(0.0);
        cfg.sinr_threshold = 1e-9;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let out = simulate_trial(&d, &cfg, 1, InterferenceMode::Full, 0, &mut rng).unwrap();
        assert!(out.transmission_success && out.collision && !out.rach_success);
    }

    #[test]
    fn intra_cell_mode_ignores_other_cells() {
        // A strong interferer sits right next to the other eNB.
        let d = all_active(
            vec![Point::ORIGIN, Point::new(1.0, 0.0)],
            vec![Point::new(0.2, 0.0), Point::new(0.55, 0.0)],
            &[0, 0],
        );
        let cfg = channel(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (mut full, mut intra) = (0, 0);
        for _ in 0..2000 {
            full += simulate_trial(&d, &cfg, 1, InterferenceMode::Full, 0, &mut rng)
                .unwrap()
                .transmission_success as u32;
            let out =
                simulate_trial(&d, &cfg, 1, InterferenceMode::IntraCellOnly, 0, &mut rng).unwrap();
            assert!(out.transmission_success && !out.collision);
            intra += 1;
        }
        assert!(full < intra);
    }

    #[test]
    fn rejects_inactive_tag() {
        let d = Deployment::new(vec![Point::ORIGIN], vec![Point::new(1.0, 1.0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(simulate_trial(&d, &channel(0.0), 1, InterferenceMode::Full, 0, &mut rng).is_err());
    }
}
