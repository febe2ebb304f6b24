//! Core value types: system configuration, channel realization, power
//! allocation and rate report.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on `Σγ ≤ 1` when accepting an allocation.
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;

/// Static parameters of one downlink: power budget, noise, QoS targets and
/// the large-scale path-loss geometry used by the channel sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub num_users: usize,
    /// Total transmit power `P` in watts.
    pub total_power: f64,
    /// Noise power `σ_n²` in watts.
    pub noise_power: f64,
    /// Minimum rate per user in bits/s/Hz, indexed by SIC order (weakest first).
    pub qos: Vec<f64>,
    pub path_loss_exponent: f64,
    /// Transmitter-to-user distances in meters.
    pub user_distances: Vec<f64>,
    pub eve_distance: f64,
}

impl SystemConfig {
    /// Same QoS target and distance for every user, eavesdropper at the same
    /// distance as the users.
    pub fn uniform(
        num_users: usize,
        total_power: f64,
        noise_power: f64,
        qos: f64,
        path_loss_exponent: f64,
        distance: f64,
    ) -> Result<Self> {
        let cfg = Self {
            num_users,
            total_power,
            noise_power,
            qos: vec![qos; num_users],
            path_loss_exponent,
            user_distances: vec![distance; num_users],
            eve_distance: distance,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.num_users == 0 {
            return bad("num_users must be at least 1".into());
        }
        if !(self.total_power > 0.0 && self.total_power.is_finite()) {
            return bad(format!(
                "total_power must be positive, got {}",
                self.total_power
            ));
        }
        if !(self.noise_power > 0.0 && self.noise_power.is_finite()) {
            return bad(format!(
                "noise_power must be positive, got {}",
                self.noise_power
            ));
        }
        if self.qos.len() != self.num_users {
            return bad(format!(
                "qos has {} entries for {} users",
                self.qos.len(),
                self.num_users
            ));
        }
        if let Some(q) = self.qos.iter().find(|q| !(**q >= 0.0 && q.is_finite())) {
            return bad(format!(
                "qos targets must be finite and non-negative, got {q}"
            ));
        }
        if !(self.path_loss_exponent > 0.0 && self.path_loss_exponent.is_finite()) {
            return bad(format!(
                "path_loss_exponent must be positive, got {}",
                self.path_loss_exponent
            ));
        }
        if self.user_distances.len() != self.num_users {
            return bad(format!(
                "user_distances has {} entries for {} users",
                self.user_distances.len(),
                self.num_users
            ));
        }
        let positive = |d: f64| d > 0.0 && d.is_finite();
        if !self.user_distances.iter().copied().all(positive) || !positive(self.eve_distance) {
            return bad("all distances must be positive".into());
        }
        Ok(())
    }

    pub fn with_total_power(&self, total_power: f64) -> Self {
        Self {
            total_power,
            ..self.clone()
        }
    }

    pub fn with_uniform_qos(&self, qos: f64) -> Self {
        Self {
            qos: vec![qos; self.num_users],
            ..self.clone()
        }
    }
}

/// One fading realization: user power gains `|h_m|²` sorted ascending, the
/// eavesdropper gain `|h_e|²`, and `m_e`, the number of users whose gain
/// does not exceed the eavesdropper's.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelRealization {
    user_gains: Vec<f64>,
    eve_gain: f64,
    m_e: usize,
}

impl ChannelRealization {
    /// Builds a realization from gains already in SIC order (non-decreasing).
    pub fn new(user_gains: Vec<f64>, eve_gain: f64) -> Result<Self> {
        validate_gains(&user_gains)?;
        if !is_sorted(&user_gains) {
            return Err(Error::InvalidChannel(
                "user gains must be sorted ascending".into(),
            ));
        }
        if !(eve_gain > 0.0 && eve_gain.is_finite()) {
            return Err(Error::InvalidChannel(format!(
                "eavesdropper gain must be positive, got {eve_gain}"
            )));
        }
        let m_e = crate::channel::locate_eve(&user_gains, eve_gain)?;
        Ok(Self {
            user_gains,
            eve_gain,
            m_e,
        })
    }

    /// Sorts the user gains into SIC order first.
    pub fn from_unsorted(mut user_gains: Vec<f64>, eve_gain: f64) -> Result<Self> {
        validate_gains(&user_gains)?;
        user_gains.sort_by(f64::total_cmp);
        Self::new(user_gains, eve_gain)
    }

    pub fn user_gains(&self) -> &[f64] {
        &self.user_gains
    }

    pub fn eve_gain(&self) -> f64 {
        self.eve_gain
    }

    pub fn m_e(&self) -> usize {
        self.m_e
    }

    pub fn num_users(&self) -> usize {
        self.user_gains.len()
    }

    /// True when two adjacent users share a gain, leaving the SIC order
    /// ambiguous. Ties are broken by input order.
    pub fn is_degenerate(&self) -> bool {
        self.user_gains.windows(2).any(|w| w[0] == w[1])
    }
}

pub(crate) fn validate_gains(gains: &[f64]) -> Result<()> {
    if gains.is_empty() {
        return Err(Error::InvalidChannel("no user gains".into()));
    }
    if let Some(g) = gains.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
        return Err(Error::InvalidChannel(format!(
            "user gains must be positive, got {g}"
        )));
    }
    Ok(())
}

pub(crate) fn is_sorted(gains: &[f64]) -> bool {
    gains.windows(2).all(|w| w[0] <= w[1])
}

/// Power allocation coefficients `γ_m`: the fraction of `P` spent on each
/// user's signal. Non-negative and summing to at most one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerAllocation {
    gamma: Vec<f64>,
}

impl PowerAllocation {
    pub fn new(gamma: Vec<f64>) -> Result<Self> {
        if gamma.is_empty() {
            return Err(Error::InvalidAllocation("empty allocation".into()));
        }
        if let Some(g) = gamma.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
            return Err(Error::InvalidAllocation(format!(
                "coefficients must be finite and non-negative, got {g}"
            )));
        }
        let total: f64 = gamma.iter().sum();
        if total > 1.0 + SIMPLEX_TOLERANCE {
            return Err(Error::InvalidAllocation(format!(
                "coefficients sum to {total} > 1"
            )));
        }
        Ok(Self { gamma })
    }

    /// `γ_m = 1/M` for every user.
    pub fn uniform(num_users: usize) -> Result<Self> {
        Self::new(vec![1.0 / num_users as f64; num_users])
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.gamma.iter().sum()
    }

    /// `tails[k] = Σ_{i ≥ k} γ_i` (zero-based) for `k` in `0..=M`; `tails[M]`
    /// is exactly zero.
    pub fn tail_sums(&self) -> Vec<f64> {
        let mut tails = vec![0.0; self.gamma.len() + 1];
        for k in (0..self.gamma.len()).rev() {
            tails[k] = tails[k + 1] + self.gamma[k];
        }
        tails
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.gamma
    }
}

/// Per-user legitimate, eavesdropper and secrecy rates (bits/s/Hz).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub user_rates: Vec<f64>,
    pub eve_rates: Vec<f64>,
    /// `max(0, user − eve)` per user.
    pub secrecy_rates: Vec<f64>,
    pub ssr: f64,
    /// Set when adjacent users have identical gains.
    pub degenerate: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let cfg = SystemConfig::uniform(3, 0.1, 1e-10, 1.0, 3.0, 80.0).unwrap();
        assert!(cfg.validate().is_ok());

        let mut bad = cfg.clone();
        bad.qos.pop();
        assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));

        let mut bad = cfg.clone();
        bad.qos[1] = -0.5;
        assert!(bad.validate().is_err());

        assert!(SystemConfig::uniform(0, 0.1, 1e-10, 1.0, 3.0, 80.0).is_err());
        assert!(SystemConfig::uniform(2, 0.0, 1e-10, 1.0, 3.0, 80.0).is_err());
        assert!(SystemConfig::uniform(2, 1.0, 0.0, 1.0, 3.0, 80.0).is_err());
        assert!(SystemConfig::uniform(2, 1.0, 1.0, 1.0, 0.0, 80.0).is_err());
        assert!(SystemConfig::uniform(2, 1.0, 1.0, 1.0, 3.0, -1.0).is_err());
    }

    #[test]
    fn channel_requires_sorted_positive_gains() {
        assert!(ChannelRealization::new(vec![4.0, 1.0], 2.0).is_err());
        assert!(ChannelRealization::new(vec![0.0, 1.0], 2.0).is_err());
        assert!(ChannelRealization::new(vec![1.0, 4.0], 0.0).is_err());
        assert!(ChannelRealization::new(vec![], 1.0).is_err());

        let ch = ChannelRealization::from_unsorted(vec![4.0, 1.0], 2.0).unwrap();
        assert_eq!(ch.user_gains(), &[1.0, 4.0]);
        assert_eq!(ch.m_e(), 1);
        assert!(!ch.is_degenerate());
        assert!(ChannelRealization::new(vec![1.0, 1.0], 2.0)
            .unwrap()
            .is_degenerate());
    }

    #[test]
    fn tie_with_eavesdropper_counts_into_m_e() {
        let ch = ChannelRealization::new(vec![1.0, 2.0, 4.0], 2.0).unwrap();
        assert_eq!(ch.m_e(), 2);
    }

    #[test]
    fn allocation_bounds() {
        assert!(PowerAllocation::new(vec![0.5, 0.5]).is_ok());
        assert!(PowerAllocation::new(vec![0.5, 0.5 + 1e-13]).is_ok());
        assert!(PowerAllocation::new(vec![0.6, 0.5]).is_err());
        assert!(PowerAllocation::new(vec![-0.1, 0.5]).is_err());
        assert!(PowerAllocation::new(vec![f64::NAN]).is_err());
        assert!(PowerAllocation::new(vec![]).is_err());
    }

    #[test]
    fn tail_sums_end_in_exact_zero() {
        let a = PowerAllocation::new(vec![0.25, 0.25, 0.5]).unwrap();
        assert_eq!(a.tail_sums(), vec![1.0, 0.75, 0.5, 0.0]);
    }
}
