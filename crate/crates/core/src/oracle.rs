//! Brute-force references for the allocation problem: exhaustive search over
//! a regular grid on the power simplex, and random feasible allocations.
//! Neither uses the closed form; they exist to check it.

use rand::Rng;
use serde::Serialize;

use crate::allocator::{meets_qos, min_power};
use crate::channel::ChannelSamplerSpec;
use crate::error::{Error, Result};
use crate::model::{ChannelRealization, PowerAllocation, SystemConfig};
use crate::par::{map_indexed, Execution};
use crate::rates::secrecy_sum_rate;

/// Largest user count the grid search accepts.
pub const MAX_GRID_USERS: usize = 4;

/// Points exactly on a QoS boundary count as feasible up to this relative slack.
const GRID_QOS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridBest {
    pub alloc: PowerAllocation,
    pub ssr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSearchResult {
    /// `None` when no grid point satisfies every QoS constraint.
    pub best: Option<GridBest>,
    pub feasible_points: usize,
    pub total_points: usize,
}

/// Exhaustive SSR maximization over `{γ ≥ 0, Σγ = 1}` at step `resolution`.
pub fn grid_search_ssr(
    ch: &ChannelRealization,
    cfg: &SystemConfig,
    resolution: f64,
) -> Result<GridSearchResult> {
    grid_search_on_budget(ch, cfg, resolution, 1.0, Execution::default())
}

/// Grid search on the face `Σγ = budget`, for `budget ∈ (0, 1]`.
pub fn grid_search_on_budget(
    ch: &ChannelRealization,
    cfg: &SystemConfig,
    resolution: f64,
    budget: f64,
    exec: Execution,
) -> Result<GridSearchResult> {
    cfg.validate()?;
    let m = cfg.num_users;
    if m > MAX_GRID_USERS {
        return Err(Error::TooManyUsers {
            got: m,
            max: MAX_GRID_USERS,
        });
    }
    if ch.num_users() != m {
        return Err(Error::InvalidChannel(format!(
            "channel has {} users, config {m}",
            ch.num_users()
        )));
    }
    let steps = grid_steps(resolution)?;
    if !(budget > 0.0 && budget <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "budget {budget} outside (0, 1]"
        )));
    }

    let scale = budget / steps as f64;
    let evaluate = |counts: &[u32]| -> Option<f64> {
        let gamma = counts.iter().map(|c| *c as f64 * scale).collect();
        let alloc = PowerAllocation::new(gamma).ok()?;
        if !meets_qos(&alloc, ch.user_gains(), cfg, GRID_QOS_TOLERANCE) {
            return None;
        }
        Some(secrecy_sum_rate(&alloc, ch, cfg).ok()?.ssr)
    };

    // One work item per value of the first coordinate; within an item the
    // remaining coordinates are enumerated as compositions of what is left.
    let chunks = map_indexed(exec, steps as usize + 1, |first| {
        let mut counts = vec![0u32; m];
        counts[0] = first as u32;
        let mut best: Option<(Vec<u32>, f64)> = None;
        let mut feasible = 0usize;
        let mut total = 0usize;
        for_each_composition(&mut counts, 1, steps - first as u32, &mut |c| {
            total += 1;
            if let Some(ssr) = evaluate(c) {
                feasible += 1;
                if best.as_ref().is_none_or(|(_, b)| ssr > *b) {
                    best = Some((c.to_vec(), ssr));
                }
            }
        });
        (best, feasible, total)
    });

    let mut best: Option<(Vec<u32>, f64)> = None;
    let mut feasible_points = 0;
    let mut total_points = 0;
    for (chunk_best, feasible, total) in chunks {
        feasible_points += feasible;
        total_points += total;
        if let Some((c, ssr)) = chunk_best {
            if best.as_ref().is_none_or(|(_, b)| ssr > *b) {
                best = Some((c, ssr));
            }
        }
    }
    let best = best.map(|(c, ssr)| GridBest {
        alloc: PowerAllocation::new(c.iter().map(|x| *x as f64 * scale).collect())
            .expect("grid point lies on the simplex"),
        ssr,
    });
    Ok(GridSearchResult {
        best,
        feasible_points,
        total_points,
    })
}

fn grid_steps(resolution: f64) -> Result<u32> {
    let steps = (1.0 / resolution).round();
    if !(resolution > 0.0)
        || !(1.0..=100_000.0).contains(&steps)
        || (steps * resolution - 1.0).abs() > 1e-9
    {
        return Err(Error::InvalidConfig(format!(
            "grid resolution {resolution} must be 1/n for an integer n ≤ 100000"
        )));
    }
    Ok(steps as u32)
}

/// Visits every way of writing `remaining` as an ordered sum over
/// `counts[pos..]` (stars and bars), in lexicographic order.
fn for_each_composition(
    counts: &mut [u32],
    pos: usize,
    remaining: u32,
    visit: &mut impl FnMut(&[u32]),
) {
    if pos == counts.len() {
        if remaining == 0 {
            visit(counts);
        }
        return;
    }
    if pos == counts.len() - 1 {
        counts[pos] = remaining;
        visit(counts);
        return;
    }
    for c in 0..=remaining {
        counts[pos] = c;
        for_each_composition(counts, pos + 1, remaining - c, visit);
    }
}

/// Random allocations satisfying every QoS constraint and `Σγ ≤ 1`.
///
/// Each sample draws a non-negative rate surplus per user, shrinks the
/// surpluses until the tight powers for the raised targets fit into `P`,
/// and normalizes those powers by `P`. Half the samples additionally pour a
/// random share of the unused budget onto the weakest user, whose signal
/// interferes with nobody.
pub fn sample_feasible(
    ch: &ChannelRealization,
    cfg: &SystemConfig,
    n: usize,
    seed: u64,
) -> Result<Vec<PowerAllocation>> {
    cfg.validate()?;
    let gains = ch.user_gains();
    let base = min_power(gains, &cfg.qos, cfg.noise_power)?;
    if !base.feasible_at(cfg.total_power) {
        return Err(Error::InfeasiblePower {
            power: cfg.total_power,
            p_min: base.p_min,
        });
    }

    let mut rng = ChannelSamplerSpec::new(seed, 0).rng();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let surplus: Vec<f64> = (0..cfg.num_users)
            .map(|_| 4.0 * rng.random::<f64>())
            .collect();
        let mut shrink = 1.0;
        let powers = loop {
            let targets: Vec<f64> = cfg
                .qos
                .iter()
                .zip(&surplus)
                .map(|(q, s)| q + shrink * s)
                .collect();
            let f = min_power(gains, &targets, cfg.noise_power)?;
            if f.p_min <= cfg.total_power || shrink == 0.0 {
                break f.per_user_powers;
            }
            shrink = if shrink < 1e-15 { 0.0 } else { shrink * 0.5 };
        };
        let mut gamma: Vec<f64> = powers.iter().map(|p| p / cfg.total_power).collect();
        if rng.random::<bool>() {
            let spare = (1.0 - gamma.iter().sum::<f64>()).max(0.0);
            gamma[0] += spare * rng.random::<f64>();
        }
        let Ok(alloc) = PowerAllocation::new(gamma) else {
            continue;
        };
        if meets_qos(&alloc, gains, cfg, 1e-9) {
            out.push(alloc);
        }
    }
    Ok(out)
}
