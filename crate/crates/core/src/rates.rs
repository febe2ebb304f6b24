//! Achievable rates under successive interference cancellation.
//!
//! Users are indexed zero-based in SIC order (weakest channel first). User
//! `m` decodes and removes the messages of users `0..m`, and sees users
//! `m+1..M` as interference. The eavesdropper is granted the same ordering:
//! when it attacks user `m`, the messages of weaker users are assumed already
//! removed, which makes the resulting SSR a lower bound.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::model::{ChannelRealization, PowerAllocation, RateReport, SystemConfig};

/// `log2(1 + signal / (interference + noise))`, all quantities as received powers.
pub(crate) fn sinr_rate(signal: f64, interference: f64, noise: f64) -> f64 {
    (signal / (interference + noise)).ln_1p() / LN_2
}

fn check_dims(alloc: &PowerAllocation, ch: &ChannelRealization, cfg: &SystemConfig) -> Result<()> {
    let m = cfg.num_users;
    if alloc.len() != m || ch.num_users() != m {
        return Err(Error::InvalidAllocation(format!(
            "dimension mismatch: config has {m} users, allocation {}, channel {}",
            alloc.len(),
            ch.num_users()
        )));
    }
    Ok(())
}

fn check_user(user: usize, num_users: usize) -> Result<()> {
    if user >= num_users {
        return Err(Error::IndexOutOfRange {
            index: user,
            lo: 0,
            hi: num_users - 1,
        });
    }
    Ok(())
}

/// Rate at which a receiver with power gain `gain` decodes user `user`'s
/// message after cancelling all weaker users.
fn rate_at_gain(user: usize, gain: f64, alloc: &PowerAllocation, cfg: &SystemConfig) -> f64 {
    let gamma = alloc.gamma();
    let interference: f64 = gamma[user + 1..].iter().sum();
    let p_gain = cfg.total_power * gain;
    sinr_rate(p_gain * gamma[user], p_gain * interference, cfg.noise_power)
}

/// Legitimate rate `R_b` of user `user` (zero-based).
pub fn user_rate(
    user: usize,
    alloc: &PowerAllocation,
    ch: &ChannelRealization,
    cfg: &SystemConfig,
) -> Result<f64> {
    check_dims(alloc, ch, cfg)?;
    check_user(user, cfg.num_users)?;
    Ok(rate_at_gain(user, ch.user_gains()[user], alloc, cfg))
}

/// Eavesdropper rate `R_e` on user `user`'s message.
pub fn eve_rate(
    user: usize,
    alloc: &PowerAllocation,
    ch: &ChannelRealization,
    cfg: &SystemConfig,
) -> Result<f64> {
    check_dims(alloc, ch, cfg)?;
    check_user(user, cfg.num_users)?;
    Ok(rate_at_gain(user, ch.eve_gain(), alloc, cfg))
}

/// Full per-user rate breakdown and the secrecy sum rate, each user's
/// secrecy rate clamped at zero.
pub fn secrecy_sum_rate(
    alloc: &PowerAllocation,
    ch: &ChannelRealization,
    cfg: &SystemConfig,
) -> Result<RateReport> {
    check_dims(alloc, ch, cfg)?;
    let m = cfg.num_users;
    let user_rates: Vec<f64> = (0..m)
        .map(|u| rate_at_gain(u, ch.user_gains()[u], alloc, cfg))
        .collect();
    let eve_rates: Vec<f64> = (0..m)
        .map(|u| rate_at_gain(u, ch.eve_gain(), alloc, cfg))
        .collect();
    let secrecy_rates: Vec<f64> = user_rates
        .iter()
        .zip(&eve_rates)
        .map(|(b, e)| (b - e).max(0.0))
        .collect();
    let ssr = secrecy_rates.iter().sum();
    Ok(RateReport {
        user_rates,
        eve_rates,
        secrecy_rates,
        ssr,
        degenerate: ch.is_degenerate(),
    })
}

/// SSR through the telescoped form: a sum of `J_k(t_k)` over the boundaries
/// `k = m_e ..= M-1`, where `t_k` is the power fraction of users `k..M`
/// (zero-based). Only users stronger than the eavesdropper contribute, so
/// no clamp is needed.
pub fn secrecy_sum_rate_reduced(
    alloc: &PowerAllocation,
    ch: &ChannelRealization,
    cfg: &SystemConfig,
) -> Result<f64> {
    check_dims(alloc, ch, cfg)?;
    let tails = alloc.tail_sums();
    Ok((ch.m_e()..cfg.num_users)
        .map(|k| j_unchecked(k, tails[k], ch, cfg))
        .sum())
}

/// `J_k(t) = log2(C_{k+1}·t + σ²) − log2(C_k·t + σ²)`.
///
/// `k` counts the users below the boundary and must lie in `[m_e, M-1]`.
/// `C_{k+1} = P·|h|²` of the zero-based user `k`; `C_k` is the eavesdropper's
/// `P·|h_e|²` when `k = m_e`, otherwise `P·|h|²` of user `k-1`.
/// Non-decreasing in `t`.
pub fn j_function(k: usize, t: f64, ch: &ChannelRealization, cfg: &SystemConfig) -> Result<f64> {
    let m = cfg.num_users;
    if ch.num_users() != m {
        return Err(Error::InvalidChannel(format!(
            "channel has {} users, config {m}",
            ch.num_users()
        )));
    }
    if ch.m_e() >= m || k < ch.m_e() || k > m - 1 {
        return Err(Error::IndexOutOfRange {
            index: k,
            lo: ch.m_e(),
            hi: m.saturating_sub(1),
        });
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidAllocation(format!(
            "tail fraction {t} outside [0, 1]"
        )));
    }
    Ok(j_unchecked(k, t, ch, cfg))
}

fn j_unchecked(k: usize, t: f64, ch: &ChannelRealization, cfg: &SystemConfig) -> f64 {
    let gains = ch.user_gains();
    let upper = cfg.total_power * gains[k];
    let lower = cfg.total_power
        * if k == ch.m_e() {
            ch.eve_gain()
        } else {
            gains[k - 1]
        };
    // log2(1 + (C_{k+1} − C_k)·t / (C_k·t + σ²)) avoids cancellation at small t.
    sinr_rate((upper - lower) * t, lower * t, cfg.noise_power)
}
