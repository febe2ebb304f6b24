//! Minimum feasible transmit power and the closed-form SSR-optimal power
//! allocation.
//!
//! Both results come from making QoS constraints tight, but they walk the
//! users in opposite directions:
//!
//! - [`min_power`] goes from the strongest user down (`M, M-1, …, 1`): the
//!   strongest user sees only noise, and every weaker user's requirement
//!   depends on the powers already fixed above it.
//! - [`optimal_allocation`] goes from the weakest user up: with the budget
//!   `Σγ = 1` tight, the interference seen by user `m` is `1 − Σ_{j≤m} γ_j`,
//!   so each coefficient depends only on the ones already fixed below it.
//!   Every user but the strongest gets exactly its QoS target and the
//!   remainder goes to the strongest user. The eavesdropper's channel plays
//!   no part in the result.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{is_sorted, validate_gains, PowerAllocation, SystemConfig, SIMPLEX_TOLERANCE};
use crate::rates::sinr_rate;

/// Relative tolerance on rate comparisons.
pub const RATE_REL_TOLERANCE: f64 = 1e-9;

/// `2^Q − 1`, the SINR needed for rate `Q`.
fn sinr_target(qos: f64) -> f64 {
    (qos * std::f64::consts::LN_2).exp_m1()
}

/// `|a − b| ≤ rel·max(|a|, |b|)`. Two exact zeros compare equal.
pub(crate) fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityResult {
    /// Smallest total power meeting every QoS target, in watts.
    pub p_min: f64,
    /// Per-user signal power at the minimum, in watts, SIC order.
    pub per_user_powers: Vec<f64>,
}

impl FeasibilityResult {
    pub fn feasible_at(&self, total_power: f64) -> bool {
        total_power >= self.p_min
    }
}

fn check_gains_qos(gains: &[f64], qos: &[f64]) -> Result<()> {
    validate_gains(gains)?;
    if !is_sorted(gains) {
        return Err(Error::InvalidChannel(
            "user gains must be sorted ascending".into(),
        ));
    }
    if qos.len() != gains.len() {
        return Err(Error::InvalidConfig(format!(
            "{} qos targets for {} users",
            qos.len(),
            gains.len()
        )));
    }
    if let Some(q) = qos.iter().find(|q| !(**q >= 0.0 && q.is_finite())) {
        return Err(Error::InvalidConfig(format!(
            "qos targets must be non-negative, got {q}"
        )));
    }
    Ok(())
}

/// Smallest total power satisfying every user's QoS target, with all
/// constraints tight: `P_m = B_m·(|h_m|²·Σ_{i>m} P_i + σ²)` and
/// `B_m = (2^{Q_m} − 1)/|h_m|²`, solved from the strongest user down.
pub fn min_power(gains: &[f64], qos: &[f64], noise: f64) -> Result<FeasibilityResult> {
    check_gains_qos(gains, qos)?;
    if !(noise > 0.0 && noise.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "noise power must be positive, got {noise}"
        )));
    }
    let mut powers = vec![0.0; gains.len()];
    let mut above = 0.0;
    for m in (0..gains.len()).rev() {
        let b = sinr_target(qos[m]) / gains[m];
        powers[m] = b * (gains[m] * above + noise);
        above += powers[m];
    }
    Ok(FeasibilityResult {
        p_min: above,
        per_user_powers: powers,
    })
}

/// Closed-form SSR-maximizing allocation for the sorted user gains.
///
/// For `m < M`: `γ_m = A_m·[P|h_m|²·(1 − Σ_{j<m} γ_j) + σ²] / 2^{Q_m}` with
/// `A_m = (2^{Q_m} − 1)/(P|h_m|²)`, computed weakest first;
/// `γ_M = 1 − Σ_{j<M} γ_j`.
///
/// Fails with [`Error::InfeasiblePower`] when `P` is below the minimum power.
pub fn optimal_allocation(cfg: &SystemConfig, gains: &[f64]) -> Result<PowerAllocation> {
    cfg.validate()?;
    if gains.len() != cfg.num_users {
        return Err(Error::InvalidChannel(format!(
            "{} gains for {} users",
            gains.len(),
            cfg.num_users
        )));
    }
    let feas = min_power(gains, &cfg.qos, cfg.noise_power)?;
    if !feas.feasible_at(cfg.total_power) {
        return Err(Error::InfeasiblePower {
            power: cfg.total_power,
            p_min: feas.p_min,
        });
    }

    let p = cfg.total_power;
    let last = cfg.num_users - 1;
    let mut gamma = Vec::with_capacity(cfg.num_users);
    let mut used = 0.0;
    for (&h, &q) in gains[..last].iter().zip(&cfg.qos) {
        let p_gain = p * h;
        let a = sinr_target(q) / p_gain;
        let g = a * (p_gain * (1.0 - used) + cfg.noise_power) / q.exp2();
        gamma.push(g);
        used += g;
    }
    let remainder = 1.0 - used;
    // At P = p_min the remainder can round a few ulps below zero.
    gamma.push(if remainder < 0.0 && remainder > -SIMPLEX_TOLERANCE {
        0.0
    } else {
        remainder
    });
    PowerAllocation::new(gamma)
}

/// How far each constraint of the allocation problem is from being tight.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActiveSetReport {
    /// `R_b^m − Q_m` per user.
    pub qos_slacks: Vec<f64>,
    /// `1 − Σγ`.
    pub budget_slack: f64,
    /// Users whose rate matches the target within the relative tolerance.
    pub tight_qos_count: usize,
    pub pass: bool,
}

/// Per-user legitimate rates, computed from the user gains alone.
pub(crate) fn legit_rates(gamma: &[f64], gains: &[f64], cfg: &SystemConfig) -> Vec<f64> {
    let mut interference = 0.0;
    let mut rates = vec![0.0; gamma.len()];
    for m in (0..gamma.len()).rev() {
        let p_gain = cfg.total_power * gains[m];
        rates[m] = sinr_rate(p_gain * gamma[m], p_gain * interference, cfg.noise_power);
        interference += gamma[m];
    }
    rates
}

/// True when every user meets its QoS target, allowing `rel_tol` relative slack.
pub fn meets_qos(alloc: &PowerAllocation, gains: &[f64], cfg: &SystemConfig, rel_tol: f64) -> bool {
    legit_rates(alloc.gamma(), gains, cfg)
        .iter()
        .zip(&cfg.qos)
        .all(|(r, q)| *r >= q - rel_tol * q)
}

/// Certifies the optimality structure of an allocation: the QoS constraints
/// of users `1..M−1` and the budget are tight, user `M` meets its target.
pub fn verify_active_set(
    alloc: &PowerAllocation,
    gains: &[f64],
    cfg: &SystemConfig,
) -> Result<ActiveSetReport> {
    check_gains_qos(gains, &cfg.qos)?;
    if alloc.len() != gains.len() {
        return Err(Error::InvalidAllocation(format!(
            "allocation has {} entries for {} users",
            alloc.len(),
            gains.len()
        )));
    }
    let rates = legit_rates(alloc.gamma(), gains, cfg);
    let tight: Vec<bool> = rates
        .iter()
        .zip(&cfg.qos)
        .map(|(r, q)| rel_close(*r, *q, RATE_REL_TOLERANCE))
        .collect();
    let qos_slacks: Vec<f64> = rates.iter().zip(&cfg.qos).map(|(r, q)| r - q).collect();
    let budget_slack = 1.0 - alloc.total();
    let last = gains.len() - 1;
    let strongest_ok = rates[last] >= cfg.qos[last] - RATE_REL_TOLERANCE * cfg.qos[last];
    let pass =
        tight[..last].iter().all(|t| *t) && strongest_ok && budget_slack.abs() <= SIMPLEX_TOLERANCE;
    Ok(ActiveSetReport {
        qos_slacks,
        budget_slack,
        tight_qos_count: tight.iter().filter(|t| **t).count(),
        pass,
    })
}
