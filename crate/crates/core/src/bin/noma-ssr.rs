//! `noma-ssr`: minimum power, optimal allocation, Monte Carlo sweeps and
//! self-verification for secrecy-sum-rate maximization in NOMA downlinks.
//!
//! Exit codes: 0 ok, 1 I/O or internal error, 2 usage or malformed input,
//! 3 transmit power below the QoS minimum, 4 verification failure.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use noma_secrecy::certify::{
    run_certification, CertifyOptions, PAPER_DISTANCE_M, PAPER_PATH_LOSS_EXPONENT,
};
use noma_secrecy::montecarlo::run_sweep_with;
use noma_secrecy::units::{dbm_to_watts, watts_to_dbm};
use noma_secrecy::{
    min_power, optimal_allocation, secrecy_sum_rate, verify_active_set, ChannelRealization, Error,
    Execution, SweepResult, SweepSpec, SweepVariable, SystemConfig,
};

/// Seed used whenever `--seed` is omitted.
const DEFAULT_SEED: u64 = 0;

const EXIT_IO: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_VERIFY: u8 = 4;

const CSV_HEADER: &str = "sweep_var,sweep_value,m,scheme,mean_ssr,infeasible_count,n_trials,seed";

#[derive(Parser)]
#[command(
    name = "noma-ssr",
    version,
    about = "Secrecy sum rate maximization for NOMA downlinks"
)]
struct Cli {
    /// JSON config file; command-line flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// RNG seed (default 0)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for parallel commands (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimum total power meeting every QoS target
    Pmin(PminArgs),
    /// Closed-form SSR-optimal power allocation
    Allocate(AllocateArgs),
    /// Monte Carlo sweep of average SSR, written as CSV
    Sweep(SweepArgs),
    /// Check the closed form against the brute-force oracle
    Verify(VerifyArgs),
}

#[derive(Args)]
struct LinkArgs {
    /// User channel power gains, ascending (comma separated)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    gains: Option<Vec<f64>>,

    /// QoS targets in bits/s/Hz, one per user or a single shared value
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    qos: Option<Vec<f64>>,

    /// Noise power in watts
    #[arg(long, conflicts_with = "noise_dbm")]
    noise: Option<f64>,

    /// Noise power in dBm
    #[arg(long, allow_hyphen_values = true)]
    noise_dbm: Option<f64>,

    /// Print a JSON record instead of text
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct PminArgs {
    #[command(flatten)]
    link: LinkArgs,
}

#[derive(Args)]
struct AllocateArgs {
    #[command(flatten)]
    link: LinkArgs,

    /// Total transmit power in watts
    #[arg(long, conflicts_with = "power_dbm")]
    power: Option<f64>,

    /// Total transmit power in dBm
    #[arg(long, allow_hyphen_values = true)]
    power_dbm: Option<f64>,

    /// Eavesdropper channel power gain; enables secrecy rates
    #[arg(long)]
    eve_gain: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VarArg {
    #[value(alias = "power_dbm")]
    Power,
    Qos,
}

#[derive(Args)]
struct SweepArgs {
    /// Swept quantity
    #[arg(long = "var", value_enum)]
    var: Option<VarArg>,

    /// Explicit sweep values (comma separated)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with_all = ["start", "stop", "step"])]
    values: Option<Vec<f64>>,

    /// First sweep value
    #[arg(long, allow_hyphen_values = true, requires_all = ["stop", "step"])]
    start: Option<f64>,

    /// Last sweep value (inclusive)
    #[arg(long, allow_hyphen_values = true)]
    stop: Option<f64>,

    /// Sweep step
    #[arg(long)]
    step: Option<f64>,

    /// Numbers of users, one curve set each
    #[arg(long, value_delimiter = ',')]
    users: Option<Vec<usize>>,

    /// Channel realizations per sweep point
    #[arg(long)]
    trials: Option<u64>,

    /// Fixed transmit power in dBm for QoS sweeps [default: 20]
    #[arg(long, allow_hyphen_values = true)]
    power_dbm: Option<f64>,

    /// Fixed QoS target for power sweeps [default: 1]
    #[arg(long)]
    qos: Option<f64>,

    /// Noise power in dBm [default: -70]
    #[arg(long, allow_hyphen_values = true)]
    noise_dbm: Option<f64>,

    /// Path-loss exponent [default: 3]
    #[arg(long)]
    alpha: Option<f64>,

    /// Distance of every user in meters [default: 80]
    #[arg(long)]
    distance: Option<f64>,

    /// Eavesdropper distance in meters [default: 80]
    #[arg(long)]
    eve_distance: Option<f64>,

    /// Zero the TDMA baseline when a slot misses its QoS target
    #[arg(long)]
    oma_enforce_qos: bool,

    /// Output CSV path (stdout if omitted)
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Random instances to check
    #[arg(long, default_value_t = 200)]
    instances: usize,

    /// User counts cycled over the instances (at most 4)
    #[arg(long, value_delimiter = ',', default_value = "2,3")]
    users: Vec<usize>,

    /// Move this fraction of each weaker user's power to the strongest user
    /// before checking; any value > 0 should make the checks fail
    #[arg(long, default_value_t = 0.0)]
    perturb_gamma: f64,

    /// Print a JSON record instead of text
    #[arg(long)]
    json: bool,
}

/// Config file contents. Field names follow `SystemConfig` and `SweepSpec`;
/// `user_gains`, `eve_gain` and `users` feed `pmin`/`allocate`/`sweep`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    num_users: Option<usize>,
    total_power: Option<f64>,
    noise_power: Option<f64>,
    qos: Option<Vec<f64>>,
    path_loss_exponent: Option<f64>,
    user_distances: Option<Vec<f64>>,
    eve_distance: Option<f64>,
    sweep_variable: Option<SweepVariable>,
    sweep_values: Option<Vec<f64>>,
    n_trials: Option<u64>,
    seed: Option<u64>,
    oma_enforce_qos: Option<bool>,
    user_gains: Option<Vec<f64>>,
    eve_gain: Option<f64>,
    users: Option<Vec<usize>>,
}

/// Error carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InfeasiblePower { power, p_min } => Failure {
                code: EXIT_INFEASIBLE,
                message: format!(
                    "infeasible: transmit power {power} W ({:.4} dBm) is below the required minimum \
                     p_min = {p_min} W ({:.4} dBm)",
                    watts_to_dbm(power),
                    watts_to_dbm(p_min)
                ),
            },
            other => Failure::usage(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: EXIT_IO,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let file = match &cli.config {
        Some(path) => load_config(path)?,
        None => ConfigFile::default(),
    };
    let seed = cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let threads = cli.threads;
    if threads == Some(0) {
        return Err(Failure::usage("--threads must be at least 1"));
    }
    match cli.command {
        Command::Pmin(args) => cmd_pmin(&args, &file),
        Command::Allocate(args) => cmd_allocate(&args, &file),
        Command::Sweep(args) => with_threads(threads, |exec| cmd_sweep(&args, &file, seed, exec)),
        Command::Verify(args) => with_threads(threads, |exec| cmd_verify(&args, seed, exec)),
    }
}

fn load_config(path: &Path) -> Result<ConfigFile, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("bad config {}: {e}", path.display())))
}

/// Runs `f` on a pool of `threads` workers; one thread means serial execution.
fn with_threads<T>(threads: Option<usize>, f: impl FnOnce(Execution) -> T + Send) -> T
where
    T: Send,
{
    match threads {
        Some(1) => f(Execution::Serial),
        #[cfg(feature = "parallel")]
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| f(Execution::Parallel)),
            Err(_) => f(Execution::Parallel),
        },
        _ => f(Execution::Parallel),
    }
}

fn missing(flag: &str, sub: &str) -> Failure {
    let err = Cli::command().error(
        ErrorKind::MissingRequiredArgument,
        format!("`{sub}` needs {flag} (on the command line or in --config)"),
    );
    Failure::usage(
        err.render()
            .to_string()
            .trim_start_matches("error: ")
            .trim_end(),
    )
}

struct Link {
    gains: Vec<f64>,
    qos: Vec<f64>,
    noise: f64,
}

fn resolve_link(args: &LinkArgs, file: &ConfigFile, sub: &str) -> Result<Link, Failure> {
    let gains = args
        .gains
        .clone()
        .or_else(|| file.user_gains.clone())
        .ok_or_else(|| missing("--gains", sub))?;
    let mut qos = args
        .qos
        .clone()
        .or_else(|| file.qos.clone())
        .ok_or_else(|| missing("--qos", sub))?;
    if qos.len() == 1 && gains.len() > 1 {
        qos = vec![qos[0]; gains.len()];
    }
    let noise = match (args.noise, args.noise_dbm) {
        (Some(w), _) => w,
        (None, Some(dbm)) => dbm_to_watts(dbm),
        (None, None) => file
            .noise_power
            .ok_or_else(|| missing("--noise or --noise-dbm", sub))?,
    };
    if let Some(m) = file.num_users {
        if m != gains.len() {
            return Err(Failure::usage(format!(
                "num_users = {m} but {} gains given",
                gains.len()
            )));
        }
    }
    Ok(Link { gains, qos, noise })
}

fn fmt_list(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:.6}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn print_json(value: &serde_json::Value) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Failure {
        code: EXIT_IO,
        message: e.to_string(),
    })?;
    writeln!(out)?;
    Ok(())
}

fn cmd_pmin(args: &PminArgs, file: &ConfigFile) -> Result<u8, Failure> {
    let link = resolve_link(&args.link, file, "pmin")?;
    let f = min_power(&link.gains, &link.qos, link.noise)?;
    if args.link.json {
        print_json(&json!({
            "p_min_w": f.p_min,
            "p_min_dbm": watts_to_dbm(f.p_min),
            "per_user_powers_w": f.per_user_powers,
        }))?;
        return Ok(0);
    }
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "p_min: {} W ({:.4} dBm)",
        f.p_min,
        watts_to_dbm(f.p_min)
    )?;
    writeln!(
        out,
        "{:>4}  {:>14}  {:>8}  {:>14}",
        "user", "gain", "qos", "power_w"
    )?;
    for (m, ((g, q), p)) in link
        .gains
        .iter()
        .zip(&link.qos)
        .zip(&f.per_user_powers)
        .enumerate()
    {
        writeln!(out, "{:>4}  {:>14.6e}  {:>8.4}  {:>14.6e}", m + 1, g, q, p)?;
    }
    Ok(0)
}

fn cmd_allocate(args: &AllocateArgs, file: &ConfigFile) -> Result<u8, Failure> {
    let link = resolve_link(&args.link, file, "allocate")?;
    let power = match (args.power, args.power_dbm) {
        (Some(w), _) => w,
        (None, Some(dbm)) => dbm_to_watts(dbm),
        (None, None) => file
            .total_power
            .ok_or_else(|| missing("--power or --power-dbm", "allocate"))?,
    };
    let m = link.gains.len();
    let cfg = SystemConfig {
        num_users: m,
        total_power: power,
        noise_power: link.noise,
        qos: link.qos,
        path_loss_exponent: file.path_loss_exponent.unwrap_or(PAPER_PATH_LOSS_EXPONENT),
        user_distances: file
            .user_distances
            .clone()
            .unwrap_or_else(|| vec![PAPER_DISTANCE_M; m]),
        eve_distance: file.eve_distance.unwrap_or(PAPER_DISTANCE_M),
    };
    cfg.validate()?;
    let alloc = optimal_allocation(&cfg, &link.gains)?;
    let report = verify_active_set(&alloc, &link.gains, &cfg)?;
    let rates = match args.eve_gain.or(file.eve_gain) {
        Some(eve) => {
            let ch = ChannelRealization::new(link.gains.clone(), eve)?;
            Some((secrecy_sum_rate(&alloc, &ch, &cfg)?, ch.m_e()))
        }
        None => None,
    };
    let user_rates: Vec<f64> = report
        .qos_slacks
        .iter()
        .zip(&cfg.qos)
        .map(|(s, q)| s + q)
        .collect();

    if args.link.json {
        let (rates_json, ssr) = match &rates {
            Some((r, m_e)) => (
                json!({
                    "user": r.user_rates,
                    "eve": r.eve_rates,
                    "secrecy": r.secrecy_rates,
                    "m_e": m_e,
                    "degenerate": r.degenerate,
                }),
                json!(r.ssr),
            ),
            None => (json!({ "user": user_rates }), serde_json::Value::Null),
        };
        print_json(&json!({
            "gamma": alloc.gamma(),
            "rates": rates_json,
            "ssr": ssr,
            "report": report,
        }))?;
        return Ok(0);
    }

    let mut out = io::stdout().lock();
    writeln!(out, "gamma: {}", fmt_list(alloc.gamma()))?;
    match &rates {
        Some((r, m_e)) => {
            writeln!(out, "user rates: {}", fmt_list(&r.user_rates))?;
            writeln!(out, "eve rates: {}", fmt_list(&r.eve_rates))?;
            writeln!(out, "secrecy rates: {}", fmt_list(&r.secrecy_rates))?;
            writeln!(out, "ssr: {:.6} bits/s/Hz (m_e = {m_e})", r.ssr)?;
            if r.degenerate {
                writeln!(
                    out,
                    "warning: equal adjacent user gains, SIC order taken from input"
                )?;
            }
        }
        None => writeln!(out, "user rates: {}", fmt_list(&user_rates))?,
    }
    writeln!(
        out,
        "qos slacks: {}",
        report
            .qos_slacks
            .iter()
            .map(|s| format!("{s:.3e}"))
            .collect::<Vec<_>>()
            .join(", ")
    )?;
    writeln!(out, "budget slack: {:.3e}", report.budget_slack)?;
    writeln!(
        out,
        "tight qos constraints: {}/{}",
        report.tight_qos_count, m
    )?;
    writeln!(
        out,
        "active set: {}",
        if report.pass { "pass" } else { "FAIL" }
    )?;
    Ok(0)
}

fn sweep_values(
    args: &SweepArgs,
    file: &ConfigFile,
    var: SweepVariable,
) -> Result<Vec<f64>, Failure> {
    if let Some(v) = args.values.clone() {
        return Ok(v);
    }
    if let (Some(start), Some(stop), Some(step)) = (args.start, args.stop, args.step) {
        if !(step > 0.0) || stop < start {
            return Err(Failure::usage("need --step > 0 and --stop >= --start"));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        // Rounded to 1e-9 so decimal steps print cleanly in the CSV.
        return Ok((0..=n)
            .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
            .collect());
    }
    if let Some(v) = file.sweep_values.clone() {
        return Ok(v);
    }
    Ok(match var {
        SweepVariable::PowerDbm => (0..=8).map(|i| 5.0 * i as f64).collect(),
        SweepVariable::Qos => (1..=12).map(|i| 0.5 * i as f64).collect(),
    })
}

fn cmd_sweep(
    args: &SweepArgs,
    file: &ConfigFile,
    seed: u64,
    exec: Execution,
) -> Result<u8, Failure> {
    let var = match args.var {
        Some(VarArg::Power) => SweepVariable::PowerDbm,
        Some(VarArg::Qos) => SweepVariable::Qos,
        None => file
            .sweep_variable
            .ok_or_else(|| missing("--var", "sweep"))?,
    };
    let values = sweep_values(args, file, var)?;
    let users = args
        .users
        .clone()
        .or_else(|| file.users.clone())
        .or_else(|| file.num_users.map(|m| vec![m]))
        .unwrap_or_else(|| vec![2, 3, 4]);
    let n_trials = args.trials.or(file.n_trials).unwrap_or(10_000);
    let power = match args.power_dbm {
        Some(dbm) => dbm_to_watts(dbm),
        None => file.total_power.unwrap_or_else(|| dbm_to_watts(20.0)),
    };
    let noise = match args.noise_dbm {
        Some(dbm) => dbm_to_watts(dbm),
        None => file.noise_power.unwrap_or_else(|| dbm_to_watts(-70.0)),
    };
    let alpha = args
        .alpha
        .or(file.path_loss_exponent)
        .unwrap_or(PAPER_PATH_LOSS_EXPONENT);
    let eve_distance = args
        .eve_distance
        .or(file.eve_distance)
        .unwrap_or(PAPER_DISTANCE_M);
    let oma_enforce_qos = args.oma_enforce_qos || file.oma_enforce_qos.unwrap_or(false);

    let mut results: Vec<SweepResult> = Vec::with_capacity(users.len());
    for &m in &users {
        let qos = match (args.qos, &file.qos) {
            (Some(q), _) => vec![q; m],
            (None, Some(q)) if q.len() == m => q.clone(),
            (None, Some(q)) if q.len() == 1 => vec![q[0]; m],
            (None, Some(q)) => {
                return Err(Failure::usage(format!(
                    "config qos has {} entries, sweep uses {m} users",
                    q.len()
                )))
            }
            (None, None) => vec![1.0; m],
        };
        let user_distances = match (args.distance, &file.user_distances) {
            (Some(d), _) => vec![d; m],
            (None, Some(d)) if d.len() == m => d.clone(),
            (None, Some(d)) if d.len() == 1 => vec![d[0]; m],
            (None, Some(_)) => {
                return Err(Failure::usage(format!(
                    "config user_distances does not match {m} users"
                )))
            }
            (None, None) => vec![PAPER_DISTANCE_M; m],
        };
        let template = SystemConfig {
            num_users: m,
            total_power: power,
            noise_power: noise,
            qos,
            path_loss_exponent: alpha,
            user_distances,
            eve_distance,
        };
        let spec = SweepSpec {
            sweep_variable: var,
            sweep_values: values.clone(),
            template,
            n_trials,
            seed,
            oma_enforce_qos,
        };
        results.push(run_sweep_with(&spec, exec)?);
    }

    let csv = render_csv(&results);
    match &args.out {
        Some(path) => fs::write(path, csv)?,
        None => io::stdout().lock().write_all(csv.as_bytes())?,
    }
    Ok(0)
}

/// One row per (M, sweep value, scheme). Rust's float formatting is
/// locale-independent and round-trips exactly.
fn render_csv(results: &[SweepResult]) -> String {
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for r in results {
        for p in &r.points {
            for (scheme, mean, infeasible) in [
                ("noma", p.mean_ssr_noma, p.infeasible_count),
                ("oma", p.mean_ssr_oma, p.oma_infeasible_count),
            ] {
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    r.sweep_variable,
                    p.sweep_value,
                    r.num_users,
                    scheme,
                    mean,
                    infeasible,
                    p.n_trials,
                    r.seed
                ));
            }
        }
    }
    csv
}

fn cmd_verify(args: &VerifyArgs, seed: u64, exec: Execution) -> Result<u8, Failure> {
    let opts = CertifyOptions {
        instances: args.instances,
        users: args.users.clone(),
        seed,
        perturb_gamma: args.perturb_gamma,
        exec,
    };
    let report = run_certification(&opts)?;
    let ok = report.all_pass();
    if args.json {
        print_json(
            &json!({ "pass": ok, "seed": seed, "instances": args.instances, "checks": report.checks }),
        )?;
    } else {
        let mut out = io::stdout().lock();
        for c in &report.checks {
            writeln!(
                out,
                "{:<16} {}  passed {:>4}  failed {:>4}  skipped {:>4}  worst {:.3e}",
                c.name,
                if c.failed == 0 { "PASS" } else { "FAIL" },
                c.passed,
                c.failed,
                c.skipped,
                c.worst
            )?;
        }
        writeln!(
            out,
            "{}",
            if ok {
                "all checks passed"
            } else {
                "verification FAILED"
            }
        )?;
    }
    Ok(if ok { 0 } else { EXIT_VERIFY })
}
