//! Equal-slot TDMA benchmark: each user transmits alone at full power for a
//! `1/M` share of the time.

use crate::model::{ChannelRealization, SystemConfig};
use crate::rates::sinr_rate;

/// Secrecy sum rate of equal-slot TDMA. With `enforce_qos`, any user whose
/// slot rate falls short of its target zeroes the result, as infeasible NOMA
/// trials do.
pub fn oma_ssr(ch: &ChannelRealization, cfg: &SystemConfig, enforce_qos: bool) -> f64 {
    let share = 1.0 / ch.num_users() as f64;
    let p = cfg.total_power;
    let eve = share * sinr_rate(p * ch.eve_gain(), 0.0, cfg.noise_power);
    let mut ssr = 0.0;
    for (gain, qos) in ch.user_gains().iter().zip(&cfg.qos) {
        let legit = share * sinr_rate(p * gain, 0.0, cfg.noise_power);
        if enforce_qos && legit < *qos {
            return 0.0;
        }
        ssr += (legit - eve).max(0.0);
    }
    ssr
}

/// True when every user's TDMA slot rate reaches its QoS target.
pub fn oma_meets_qos(ch: &ChannelRealization, cfg: &SystemConfig) -> bool {
    let share = 1.0 / ch.num_users() as f64;
    ch.user_gains()
        .iter()
        .zip(&cfg.qos)
        .all(|(gain, qos)| share * sinr_rate(cfg.total_power * gain, 0.0, cfg.noise_power) >= *qos)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocator::optimal_allocation;
    use crate::rates::secrecy_sum_rate;

    fn cfg(m: usize, qos: f64) -> SystemConfig {
        SystemConfig::uniform(m, 3.0, 1.0, qos, 3.0, 80.0).unwrap()
    }

    #[test]
    fn running_instance() {
        let ch = ChannelRealization::new(vec![1.0, 4.0], 2.0).unwrap();
        // (1/2)·log2(13/7), evaluated at 40 digits; user 1 clamps to zero.
        let v = oma_ssr(&ch, &cfg(2, 1.0), false);
        assert!((v - 0.446_542_398_041_744).abs() < 1e-14, "{v}");
    }

    #[test]
    fn single_user_matches_noma() {
        let c = cfg(1, 0.5);
        let ch = ChannelRealization::new(vec![2.5], 0.7).unwrap();
        let a = optimal_allocation(&c, ch.user_gains()).unwrap();
        let noma = secrecy_sum_rate(&a, &ch, &c).unwrap().ssr;
        assert!((oma_ssr(&ch, &c, false) - noma).abs() < 1e-14);
        assert!((oma_ssr(&ch, &c, true) - noma).abs() < 1e-14);
    }

    #[test]
    fn strong_eavesdropper_gives_zero() {
        let ch = ChannelRealization::new(vec![1.0, 4.0], 4.0).unwrap();
        assert_eq!(oma_ssr(&ch, &cfg(2, 0.0), false), 0.0);
    }

    #[test]
    fn qos_enforcement() {
        let ch = ChannelRealization::new(vec![1.0, 4.0], 0.5).unwrap();
        // Slot rates: user 1 gets log2(4)/2 = 1.0, user 2 log2(13)/2 ≈ 1.85.
        assert!(oma_ssr(&ch, &cfg(2, 1.0), true) > 0.0);
        assert_eq!(oma_ssr(&ch, &cfg(2, 1.5), true), 0.0);
        assert!(oma_meets_qos(&ch, &cfg(2, 1.0)));
        assert!(!oma_meets_qos(&ch, &cfg(2, 1.5)));
        assert!(oma_ssr(&ch, &cfg(2, 1.5), false) > 0.0);
    }
}
