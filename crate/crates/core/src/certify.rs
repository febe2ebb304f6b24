//! Randomized self-check of the closed-form results against the brute-force
//! oracle. Backs the `verify` CLI command and the acceptance tests.

use rand::Rng;
use serde::Serialize;

use crate::allocator::{
    legit_rates, meets_qos, min_power, optimal_allocation, rel_close, verify_active_set,
    RATE_REL_TOLERANCE,
};
use crate::channel::{sample_channel, ChannelSamplerSpec};
use crate::error::{Error, Result};
use crate::model::{ChannelRealization, PowerAllocation, SystemConfig};
use crate::oracle::{grid_search_on_budget, MAX_GRID_USERS};
use crate::par::{map_indexed, Execution};
use crate::rates::secrecy_sum_rate;

/// Noise power of -70 dBm, in watts.
pub const PAPER_NOISE_WATTS: f64 = 1e-10;
pub const PAPER_PATH_LOSS_EXPONENT: f64 = 3.0;
pub const PAPER_DISTANCE_M: f64 = 80.0;

/// Decorrelates the parameter stream from the channel stream of the same seed.
const PARAM_STREAM_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// A random feasible problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub cfg: SystemConfig,
    pub ch: ChannelRealization,
    pub p_min: f64,
}

/// Channel from the Rayleigh model at 80 m with α = 3 and -70 dBm noise;
/// QoS targets uniform in `qos_range`; total power uniform in
/// `[p_min, power_span·p_min]`.
pub fn random_instance(
    seed: u64,
    index: u64,
    num_users: usize,
    qos_range: (f64, f64),
    power_span: f64,
) -> Result<Instance> {
    let mut cfg = SystemConfig::uniform(
        num_users,
        1.0,
        PAPER_NOISE_WATTS,
        0.0,
        PAPER_PATH_LOSS_EXPONENT,
        PAPER_DISTANCE_M,
    )?;
    let ch = sample_channel(ChannelSamplerSpec::new(seed, index), &cfg);
    let mut rng = ChannelSamplerSpec::new(seed ^ PARAM_STREAM_SALT, index).rng();
    let (lo, hi) = qos_range;
    cfg.qos = (0..num_users)
        .map(|_| lo + (hi - lo) * rng.random::<f64>())
        .collect();
    let p_min = min_power(ch.user_gains(), &cfg.qos, cfg.noise_power)?.p_min;
    cfg.total_power = p_min * (1.0 + (power_span - 1.0) * rng.random::<f64>());
    cfg.validate()?;
    Ok(Instance { cfg, ch, p_min })
}

/// Grid step used for `num_users`: 1e-3 for two users, 1e-2 above.
pub fn grid_resolution(num_users: usize) -> f64 {
    if num_users <= 2 {
        1e-3
    } else {
        1e-2
    }
}

/// Moves a fraction `eps` of every non-strongest coefficient onto the
/// strongest user. Used to confirm the checks can fail.
pub fn perturb(alloc: &PowerAllocation, eps: f64) -> PowerAllocation {
    let mut gamma = alloc.gamma().to_vec();
    let last = gamma.len() - 1;
    let moved: f64 = gamma[..last].iter().map(|g| g * eps).sum();
    for g in &mut gamma[..last] {
        *g *= 1.0 - eps;
    }
    gamma[last] += moved;
    PowerAllocation::new(gamma).expect("perturbation keeps the simplex")
}

#[derive(Debug, Clone)]
pub struct CertifyOptions {
    pub instances: usize,
    /// User counts, cycled over the instances.
    pub users: Vec<usize>,
    pub seed: u64,
    pub perturb_gamma: f64,
    pub exec: Execution,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            instances: 200,
            users: vec![2, 3],
            seed: 0,
            perturb_gamma: 0.0,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CheckSummary {
    pub name: &'static str,
    pub passed: usize,
    pub failed: usize,
    /// Instances where the check did not apply.
    pub skipped: usize,
    /// Largest violation seen, in the check's own units.
    pub worst: f64,
}

impl CheckSummary {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            ..Default::default()
        }
    }

    fn record(&mut self, outcome: Option<(bool, f64)>) {
        match outcome {
            None => self.skipped += 1,
            Some((ok, violation)) => {
                if ok {
                    self.passed += 1;
                } else {
                    self.failed += 1;
                }
                self.worst = self.worst.max(violation);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifyReport {
    pub checks: Vec<CheckSummary>,
}

impl CertifyReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.failed == 0)
    }
}

struct InstanceOutcome {
    dominance: Option<(bool, f64)>,
    eve_invariance: Option<(bool, f64)>,
    p_min_tightness: Option<(bool, f64)>,
    active_set: Option<(bool, f64)>,
}

/// Closed form vs. grid: the closed-form allocation must be feasible and
/// its SSR at least the grid optimum minus `10·resolution`. Returns
/// `(ok, shortfall)`; `None` when the grid has no feasible point.
pub fn check_dominance(
    inst: &Instance,
    candidate: &PowerAllocation,
    exec: Execution,
) -> Result<Option<(bool, f64)>> {
    let res = grid_resolution(inst.cfg.num_users);
    let grid = grid_search_on_budget(&inst.ch, &inst.cfg, res, 1.0, exec)?;
    let Some(best) = grid.best else {
        return Ok(None);
    };
    let feasible = meets_qos(
        candidate,
        inst.ch.user_gains(),
        &inst.cfg,
        RATE_REL_TOLERANCE,
    );
    let ssr = secrecy_sum_rate(candidate, &inst.ch, &inst.cfg)?.ssr;
    let shortfall = (best.ssr - ssr).max(0.0);
    Ok(Some((feasible && ssr >= best.ssr - 10.0 * res, shortfall)))
}

/// Grid argmax for eavesdropper gains scaled by 0.5, 1 and 2 (keeping
/// `m_e` fixed) must stay within one grid step of the unscaled argmax.
/// Returns `(ok, max-norm distance in grid steps)`.
pub fn check_eve_invariance(inst: &Instance, exec: Execution) -> Result<Option<(bool, f64)>> {
    let m = inst.cfg.num_users;
    if inst.ch.m_e() >= m {
        return Ok(None);
    }
    let res = grid_resolution(m);
    let argmax = |eve: f64| -> Result<Option<PowerAllocation>> {
        let ch = ChannelRealization::new(inst.ch.user_gains().to_vec(), eve)?;
        if ch.m_e() != inst.ch.m_e() {
            return Ok(None);
        }
        Ok(grid_search_on_budget(&ch, &inst.cfg, res, 1.0, exec)?
            .best
            .map(|b| b.alloc))
    };
    let Some(reference) = argmax(inst.ch.eve_gain())? else {
        return Ok(None);
    };
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for scale in [0.5, 2.0] {
        if let Some(other) = argmax(inst.ch.eve_gain() * scale)? {
            compared += 1;
            let dist = reference
                .gamma()
                .iter()
                .zip(other.gamma())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            worst = worst.max(dist / res);
        }
    }
    if compared == 0 {
        return Ok(None);
    }
    Ok(Some((worst <= 1.0 + 1e-9, worst)))
}

/// Rates at the per-user minimum powers equal the targets, and shaving any
/// single power by a factor `1 − 1e-6` breaks some target. Returns
/// `(ok, worst relative rate error)`; `None` if every target is zero.
pub fn check_p_min_tightness(
    gains: &[f64],
    qos: &[f64],
    noise: f64,
) -> Result<Option<(bool, f64)>> {
    let f = min_power(gains, qos, noise)?;
    if f.p_min == 0.0 {
        return Ok(None);
    }
    let cfg = SystemConfig {
        num_users: gains.len(),
        total_power: f.p_min,
        noise_power: noise,
        qos: qos.to_vec(),
        path_loss_exponent: PAPER_PATH_LOSS_EXPONENT,
        user_distances: vec![PAPER_DISTANCE_M; gains.len()],
        eve_distance: PAPER_DISTANCE_M,
    };
    let gamma: Vec<f64> = f.per_user_powers.iter().map(|p| p / f.p_min).collect();
    let rates = legit_rates(&gamma, gains, &cfg);
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for (r, q) in rates.iter().zip(qos) {
        ok &= rel_close(*r, *q, RATE_REL_TOLERANCE);
        if *q > 0.0 {
            worst = worst.max((r - q).abs() / q);
        }
    }
    for k in 0..gains.len() {
        let mut shaved = gamma.clone();
        shaved[k] *= 1.0 - 1e-6;
        let rates = legit_rates(&shaved, gains, &cfg);
        ok &= rates
            .iter()
            .zip(qos)
            .any(|(r, q)| *r < q - RATE_REL_TOLERANCE * q);
    }
    Ok(Some((ok, worst)))
}

/// Active-set certificate of the candidate allocation. Returns
/// `(pass, worst QoS slack among users 1..M−1 relative to target)`.
pub fn check_active_set(
    inst: &Instance,
    candidate: &PowerAllocation,
) -> Result<Option<(bool, f64)>> {
    let rep = verify_active_set(candidate, inst.ch.user_gains(), &inst.cfg)?;
    let last = inst.cfg.num_users - 1;
    let worst = rep.qos_slacks[..last]
        .iter()
        .zip(&inst.cfg.qos)
        .map(|(s, q)| if *q > 0.0 { s.abs() / q } else { s.abs() })
        .fold(rep.budget_slack.abs(), f64::max);
    Ok(Some((rep.pass, worst)))
}

/// Runs all four checks over `opts.instances` random instances with QoS
/// targets in `[0.5, 2]` and power in `[p_min, 10·p_min]`.
pub fn run_certification(opts: &CertifyOptions) -> Result<CertifyReport> {
    if opts.users.is_empty() {
        return Err(Error::InvalidConfig("no user counts given".into()));
    }
    if let Some(m) = opts.users.iter().find(|m| **m > MAX_GRID_USERS || **m == 0) {
        return Err(if *m == 0 {
            Error::InvalidConfig("user count must be at least 1".into())
        } else {
            Error::TooManyUsers {
                got: *m,
                max: MAX_GRID_USERS,
            }
        });
    }
    if !(0.0..1.0).contains(&opts.perturb_gamma) {
        return Err(Error::InvalidConfig(format!(
            "perturbation {} outside [0, 1)",
            opts.perturb_gamma
        )));
    }

    // Instances run in parallel; the grid inside each runs serially.
    let outcomes: Vec<Result<InstanceOutcome>> = map_indexed(opts.exec, opts.instances, |i| {
        let m = opts.users[i % opts.users.len()];
        let inst = random_instance(opts.seed, i as u64, m, (0.5, 2.0), 10.0)?;
        let closed = optimal_allocation(&inst.cfg, inst.ch.user_gains())?;
        let candidate = if opts.perturb_gamma > 0.0 {
            perturb(&closed, opts.perturb_gamma)
        } else {
            closed
        };
        Ok(InstanceOutcome {
            dominance: check_dominance(&inst, &candidate, Execution::Serial)?,
            eve_invariance: check_eve_invariance(&inst, Execution::Serial)?,
            p_min_tightness: check_p_min_tightness(
                inst.ch.user_gains(),
                &inst.cfg.qos,
                inst.cfg.noise_power,
            )?,
            active_set: check_active_set(&inst, &candidate)?,
        })
    });

    let mut dominance = CheckSummary::new("grid_dominance");
    let mut eve = CheckSummary::new("eve_invariance");
    let mut tight = CheckSummary::new("p_min_tightness");
    let mut active = CheckSummary::new("active_set");
    for o in outcomes {
        let o = o?;
        dominance.record(o.dominance);
        eve.record(o.eve_invariance);
        tight.record(o.p_min_tightness);
        active.record(o.active_set);
    }
    Ok(CertifyReport {
        checks: vec![dominance, eve, tight, active],
    })
}
