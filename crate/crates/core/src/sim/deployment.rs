use rand::Rng;

use super::geometry::{EnbIndex, Point};
use crate::error::{Error, Result};

/// One realisation of the eNB and device point sets.
#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    pub enb_positions: Vec<Point>,
    pub device_positions: Vec<Point>,
    /// Index of the serving (nearest) eNB of each device.
    pub association: Vec<usize>,
    pub active_mask: Vec<bool>,
    /// Chosen preamble of each active device.
    pub preamble_choice: Vec<Option<u32>>,
}

impl Deployment {
    /// Associates every device with its nearest eNB. Devices start inactive.
    pub fn new(enb_positions: Vec<Point>, device_positions: Vec<Point>) -> Result<Self> {
        let index = EnbIndex::new(&enb_positions)?;
        Ok(Self::with_index(&index, device_positions))
    }

    pub(crate) fn with_index(index: &EnbIndex, device_positions: Vec<Point>) -> Self {
        let association = index.associate(&device_positions);
        let n = device_positions.len();
        Self {
            enb_positions: index.points().to_vec(),
            device_positions,
            association,
            active_mask: vec![false; n],
            preamble_choice: vec![None; n],
        }
    }

    pub fn active_count(&self) -> usize {
        self.active_mask.iter().filter(|&&a| a).count()
    }

    /// Active devices other than `device` transmitting the same preamble.
    pub fn same_preamble_peers(&self, device: usize) -> impl Iterator<Item = usize> + '_ {
        let preamble = self.preamble_choice[device];
        (0..self.device_positions.len()).filter(move |&j| {
            j != device && self.active_mask[j] && self.preamble_choice[j] == preamble
        })
    }
}

/// Marks each device active with probability `p_active` and gives every
/// active device a preamble drawn uniformly from `0..preambles`.
pub fn thin_and_assign<R: Rng + ?Sized>(
    mut deployment: Deployment,
    p_active: f64,
    preambles: u32,
    rng: &mut R,
) -> Result<Deployment> {
    if !(0.0..=1.0).contains(&p_active) {
        return Err(Error::domain("activity probability must lie in [0, 1]"));
    }
    if preambles < 1 {
        return Err(Error::domain("at least one preamble is required"));
    }
    for (active, choice) in deployment
        .active_mask
        .iter_mut()
        .zip(deployment.preamble_choice.iter_mut())
    {
        *active = rng.random::<f64>() < p_active;
        *choice = if *active {
            Some(rng.random_range(0..preambles))
        } else {
            None
        };
    }
    Ok(deployment)
}
