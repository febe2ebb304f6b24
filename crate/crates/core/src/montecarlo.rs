//! Monte Carlo sweeps of average SSR against transmit power or QoS target.
//!
//! Trial `t` always uses the channel drawn from stream `(seed, t)`, and that
//! same realization is evaluated at every sweep value (paired sampling), so
//! per-channel monotonicity carries over to the averaged curves. Per-trial
//! results are reduced in trial order with compensated summation, which
//! makes the output independent of the thread count.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::allocator::optimal_allocation;
use crate::baseline::{oma_meets_qos, oma_ssr};
use crate::channel::{sample_channel, ChannelSamplerSpec};
use crate::error::{Error, Result};
use crate::model::SystemConfig;
use crate::par::{compensated_sum, map_indexed, Execution};
use crate::rates::secrecy_sum_rate;
use crate::units::dbm_to_watts;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Total transmit power in dBm.
    PowerDbm,
    /// Common QoS target `Q_m` for every user, bits/s/Hz.
    Qos,
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepVariable::PowerDbm => "power_dbm",
            SweepVariable::Qos => "qos",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub sweep_variable: SweepVariable,
    pub sweep_values: Vec<f64>,
    /// Fixed parameters; the swept field is overwritten per sweep value.
    pub template: SystemConfig,
    pub n_trials: u64,
    pub seed: u64,
    /// Whether the TDMA baseline zeroes trials that miss a QoS target.
    #[serde(default)]
    pub oma_enforce_qos: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.template.validate()?;
        if self.n_trials == 0 {
            return Err(Error::InvalidSweep("n_trials must be at least 1".into()));
        }
        if self.sweep_values.is_empty() {
            return Err(Error::InvalidSweep("no sweep values".into()));
        }
        if self.sweep_values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSweep("sweep values must be finite".into()));
        }
        if !self.sweep_values.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidSweep(
                "sweep values must be strictly increasing".into(),
            ));
        }
        if self.sweep_variable == SweepVariable::Qos && self.sweep_values[0] < 0.0 {
            return Err(Error::InvalidSweep(
                "qos sweep values must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// The system configuration at one sweep value.
    pub fn config_at(&self, value: f64) -> SystemConfig {
        match self.sweep_variable {
            SweepVariable::PowerDbm => self.template.with_total_power(dbm_to_watts(value)),
            SweepVariable::Qos => self.template.with_uniform_qos(value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub sweep_value: f64,
    pub mean_ssr_noma: f64,
    pub mean_ssr_oma: f64,
    /// Trials where `P < P_min`; each contributes zero to the NOMA mean.
    pub infeasible_count: u64,
    /// Trials the TDMA baseline zeroed for missing a QoS target. Always zero
    /// unless `oma_enforce_qos` is set.
    pub oma_infeasible_count: u64,
    pub n_trials: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub sweep_variable: SweepVariable,
    pub num_users: usize,
    pub seed: u64,
    pub n_trials: u64,
    pub template: SystemConfig,
    pub points: Vec<SweepPoint>,
}

#[derive(Clone, Copy)]
struct Outcome {
    noma: f64,
    oma: f64,
    infeasible: bool,
    oma_infeasible: bool,
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    run_sweep_with(spec, Execution::default())
}

pub fn run_sweep_with(spec: &SweepSpec, exec: Execution) -> Result<SweepResult> {
    spec.validate()?;
    let configs: Vec<SystemConfig> = spec
        .sweep_values
        .iter()
        .map(|v| spec.config_at(*v))
        .collect();
    for cfg in &configs {
        cfg.validate()?;
    }

    let n_trials = usize::try_from(spec.n_trials)
        .map_err(|_| Error::InvalidSweep("n_trials does not fit in memory".into()))?;
    let trials: Vec<Result<Vec<Outcome>>> = map_indexed(exec, n_trials, |t| {
        let ch = sample_channel(ChannelSamplerSpec::new(spec.seed, t as u64), &spec.template);
        configs
            .iter()
            .map(|cfg| {
                let oma = oma_ssr(&ch, cfg, spec.oma_enforce_qos);
                let oma_infeasible = spec.oma_enforce_qos && !oma_meets_qos(&ch, cfg);
                let (noma, infeasible) = match optimal_allocation(cfg, ch.user_gains()) {
                    Ok(alloc) => (secrecy_sum_rate(&alloc, &ch, cfg)?.ssr, false),
                    Err(Error::InfeasiblePower { .. }) => (0.0, true),
                    Err(e) => return Err(e),
                };
                Ok(Outcome {
                    noma,
                    oma,
                    infeasible,
                    oma_infeasible,
                })
            })
            .collect()
    });
    let trials: Vec<Vec<Outcome>> = trials.into_iter().collect::<Result<_>>()?;

    let n = spec.n_trials as f64;
    let points = spec
        .sweep_values
        .iter()
        .enumerate()
        .map(|(i, value)| SweepPoint {
            sweep_value: *value,
            mean_ssr_noma: compensated_sum(trials.iter().map(|t| t[i].noma)) / n,
            mean_ssr_oma: compensated_sum(trials.iter().map(|t| t[i].oma)) / n,
            infeasible_count: trials.iter().filter(|t| t[i].infeasible).count() as u64,
            oma_infeasible_count: trials.iter().filter(|t| t[i].oma_infeasible).count() as u64,
            n_trials: spec.n_trials,
        })
        .collect();

    Ok(SweepResult {
        sweep_variable: spec.sweep_variable,
        num_users: spec.template.num_users,
        seed: spec.seed,
        n_trials: spec.n_trials,
        template: spec.template.clone(),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(var: SweepVariable, values: Vec<f64>, m: usize, n: u64) -> SweepSpec {
        SweepSpec {
            sweep_variable: var,
            sweep_values: values,
            template: SystemConfig::uniform(m, 0.1, 1e-10, 1.0, 3.0, 80.0).unwrap(),
            n_trials: n,
            seed: 42,
            oma_enforce_qos: false,
        }
    }

    #[test]
    fn single_trial_matches_direct_computation() {
        let s = spec(SweepVariable::PowerDbm, vec![20.0], 3, 1);
        let res = run_sweep(&s).unwrap();
        let cfg = s.config_at(20.0);
        let ch = sample_channel(ChannelSamplerSpec::new(42, 0), &s.template);
        let expected = match optimal_allocation(&cfg, ch.user_gains()) {
            Ok(a) => secrecy_sum_rate(&a, &ch, &cfg).unwrap().ssr,
            Err(_) => 0.0,
        };
        assert_eq!(res.points[0].mean_ssr_noma, expected);
        assert_eq!(res.points[0].mean_ssr_oma, oma_ssr(&ch, &cfg, false));
        assert_eq!(res.points[0].n_trials, 1);
    }

    #[test]
    fn unreachable_qos_zeroes_everything() {
        let s = spec(SweepVariable::Qos, vec![40.0], 2, 200);
        let p = &run_sweep(&s).unwrap().points[0];
        assert_eq!(p.mean_ssr_noma, 0.0);
        assert_eq!(p.infeasible_count, 200);
    }

    #[test]
    fn serial_equals_parallel() {
        let s = spec(SweepVariable::PowerDbm, vec![0.0, 10.0, 20.0], 3, 500);
        assert_eq!(
            run_sweep_with(&s, Execution::Serial).unwrap(),
            run_sweep_with(&s, Execution::Parallel).unwrap()
        );
    }

    #[test]
    fn invalid_specs() {
        assert!(run_sweep(&spec(SweepVariable::Qos, vec![], 2, 10)).is_err());
        assert!(run_sweep(&spec(SweepVariable::Qos, vec![1.0, 1.0], 2, 10)).is_err());
        assert!(run_sweep(&spec(SweepVariable::Qos, vec![2.0, 1.0], 2, 10)).is_err());
        assert!(run_sweep(&spec(SweepVariable::Qos, vec![-1.0], 2, 10)).is_err());
        assert!(run_sweep(&spec(SweepVariable::PowerDbm, vec![10.0], 2, 0)).is_err());
    }

    #[test]
    fn paired_curves_are_monotone() {
        let s = spec(SweepVariable::PowerDbm, vec![0.0, 10.0, 20.0, 30.0], 3, 400);
        let r = run_sweep(&s).unwrap();
        for w in r.points.windows(2) {
            assert!(w[1].mean_ssr_noma >= w[0].mean_ssr_noma - 1e-9);
            assert!(w[1].infeasible_count <= w[0].infeasible_count);
        }
        let s = spec(SweepVariable::Qos, vec![0.5, 1.0, 2.0, 4.0], 3, 400);
        let r = run_sweep(&s).unwrap();
        for w in r.points.windows(2) {
            assert!(w[1].mean_ssr_noma <= w[0].mean_ssr_noma + 1e-9);
        }
    }

    #[test]
    fn variable_names() {
        assert_eq!(SweepVariable::PowerDbm.to_string(), "power_dbm");
        assert_eq!(
            serde_json::to_string(&SweepVariable::Qos).unwrap(),
            "\"qos\""
        );
    }
}
