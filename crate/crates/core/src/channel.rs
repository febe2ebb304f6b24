//! Seeded Rayleigh-fading channel sampler.
//!
//! Every trial owns a ChaCha8 stream selected by `(seed, trial_index)`, so a
//! realization depends only on those two numbers and never on which thread
//! or in which order it was drawn.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{is_sorted, ChannelRealization, SystemConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChannelSamplerSpec {
    pub seed: u64,
    pub trial_index: u64,
}

impl ChannelSamplerSpec {
    pub fn new(seed: u64, trial_index: u64) -> Self {
        Self { seed, trial_index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.trial_index);
        rng
    }
}

/// Uniform on the open interval (0, 1): 52 random bits, offset by half a
/// step. With 53 bits the top value would round up to exactly 1.0.
pub fn open_unit<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 52) as f64;
    ((rng.next_u64() >> 12) as f64 + 0.5) * SCALE
}

/// Unit-rate exponential by inversion. `|g|²` for `g ~ CN(0, 1)` has this law.
pub fn unit_exponential<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    -open_unit(rng).ln()
}

/// Draws `|h_m|² = d_m^{-α}·|g_m|²` for every user and `|h_e|²` for the
/// eavesdropper, then sorts the users into SIC order.
///
/// Draw order on the stream is users `0..M` then the eavesdropper.
pub fn sample_channel(spec: ChannelSamplerSpec, cfg: &SystemConfig) -> ChannelRealization {
    let mut rng = spec.rng();
    let alpha = cfg.path_loss_exponent;
    let mut user_gains: Vec<f64> = cfg
        .user_distances
        .iter()
        .map(|d| d.powf(-alpha) * unit_exponential(&mut rng))
        .collect();
    let eve_gain = cfg.eve_distance.powf(-alpha) * unit_exponential(&mut rng);
    user_gains.sort_by(f64::total_cmp);
    ChannelRealization::new(user_gains, eve_gain)
        .expect("exponential draws on a valid config give positive finite gains")
}

/// Number of sorted user gains that are `≤ eve_gain`.
pub fn locate_eve(user_gains: &[f64], eve_gain: f64) -> Result<usize> {
    if !is_sorted(user_gains) {
        return Err(Error::InvalidChannel(
            "user gains must be sorted ascending".into(),
        ));
    }
    Ok(user_gains.partition_point(|g| *g <= eve_gain))
}
