//! Command-line front end.
//!
//! Exit codes: 0 success, 1 configuration error (bad flags, unreadable or
//! malformed config), 2 runtime refusal or failure (exhaustive-search
//! budget, invalid layout, failed validation).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::baselines::{
    ccg_partition, exhaustive_optimal, fcc_partition, fmc_partition, rc_partition, DEFAULT_BUDGET,
};
use crate::error::Error;
use crate::game::{
    apply_switch, form_coalitions, is_nash_stable, random_partition, switch_gain, FormationConfig,
    StrategySpace, SwitchTrace,
};
use crate::harness::{run_sweep_with_threads, Scheme, SweepSpec};
use crate::params::{FadingMode, SystemParams};
use crate::rate::{Partition, RateModel, RateReport};
use crate::scenario::{generate_scenario, Scenario};
use crate::seed;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "d2d-hcn", version, about = "D2D resource allocation in a cellular + mmWave cell")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FadingArg {
    Average,
    Rayleigh,
}

#[derive(Debug, clap::Args)]
struct ScenarioArgs {
    /// JSON file with system parameters; missing fields take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    cellular: Option<usize>,
    #[arg(long)]
    d2d: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    fading: Option<FadingArg>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Allocate one scenario with one scheme and print the rates.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value = "cg")]
        scheme: String,
        /// Write the full JSON result here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a parameter sweep described by a JSON config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        /// Also write every CG switch trace.
        #[arg(long)]
        traces: bool,
        /// Label stored in the metadata document.
        #[arg(long)]
        timestamp: Option<String>,
    },
    /// Exhaustive search on a small instance.
    Oracle {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check model and algorithm invariants on random instances.
    Validate {
        #[arg(long, default_value_t = 50)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        max_cellular: usize,
        #[arg(long, default_value_t = 30)]
        max_d2d: usize,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExceeded { .. }
            | Error::CapExhausted(_)
            | Error::TooClose { .. }
            | Error::DegenerateLink => Failure::Runtime(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

fn runtime_io(e: std::io::Error) -> Failure {
    Failure::Runtime(e.to_string())
}

fn load_params(args: &ScenarioArgs) -> Result<SystemParams, Failure> {
    let mut params = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?
        }
        None => SystemParams::default(),
    };
    if let Some(c) = args.cellular {
        params.num_cellular = c;
    }
    if let Some(d) = args.d2d {
        params.num_d2d = d;
    }
    if let Some(s) = args.seed {
        params.rng_seed = s;
    }
    if let Some(f) = args.fading {
        params.fading_mode = match f {
            FadingArg::Average => FadingMode::AverageChannel,
            FadingArg::Rayleigh => FadingMode::SampledRayleigh,
        };
    }
    params.validate()?;
    Ok(params)
}

#[derive(Serialize)]
struct RunOutput<'a> {
    params: &'a SystemParams,
    scheme: Scheme,
    scenario: &'a Scenario,
    partition: &'a Partition,
    report: &'a RateReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<&'a SwitchTrace>,
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(runtime_io)?;
    }
    fs::write(path, contents).map_err(runtime_io)
}

fn cmd_run(
    args: &ScenarioArgs,
    scheme: &str,
    out_path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let scheme: Scheme = scheme.parse()?;
    let params = load_params(args)?;
    let scenario = generate_scenario(&params)?;
    let model = RateModel::new(&scenario, &params)?;
    let (c, d) = (params.num_cellular, params.num_d2d);
    let key = |stream: u64| seed::derive(params.rng_seed, &[stream]);
    let config = FormationConfig::with_seed(key(2));
    let (partition, trace) = match scheme {
        Scheme::Cg => {
            let initial = random_partition(c, d, StrategySpace::Full, key(1))?;
            let t = form_coalitions(&model, &initial, &config)?;
            (t.final_partition.clone(), Some(t))
        }
        Scheme::Ccg => {
            let t = ccg_partition(&model, &config)?;
            (t.final_partition.clone(), Some(t))
        }
        Scheme::Fmc => (fmc_partition(c, d), None),
        Scheme::Rc => (rc_partition(c, d, key(3)), None),
        Scheme::Fcc => (fcc_partition(c, d, key(4))?, None),
        Scheme::Os => (exhaustive_optimal(&model, DEFAULT_BUDGET)?.partition, None),
    };
    let report = model.system_sum_rate(&partition)?;

    let io = |e: std::io::Error| Failure::Runtime(e.to_string());
    writeln!(out, "scheme: {scheme}").map_err(io)?;
    writeln!(out, "cellular users: {c}, d2d pairs: {d}, seed: {}", params.rng_seed).map_err(io)?;
    writeln!(out, "assignment: {:?}", partition.ids()).map_err(io)?;
    for (slot, v) in report.per_coalition_value.iter().enumerate() {
        let label = if slot < c {
            format!("cellular#{}", slot + 1)
        } else {
            "mmwave".to_string()
        };
        writeln!(out, "  {label}: {v} bit/s").map_err(io)?;
    }
    writeln!(out, "system sum rate: {} bit/s", report.system_sum_rate).map_err(io)?;
    if let Some(t) = &trace {
        writeln!(out, "switches: {} in {} iterations", t.total_switch_count, t.iterations)
            .map_err(io)?;
        for s in &t.switches {
            writeln!(
                out,
                "  iter {}: pair {} {} -> {} (+{} bit/s)",
                s.iteration,
                s.pair + 1,
                s.from,
                s.to,
                s.gain
            )
            .map_err(io)?;
        }
    }

    if let Some(path) = out_path {
        let doc = RunOutput {
            params: &params,
            scheme,
            scenario: &scenario,
            partition: &partition,
            report: &report,
            trace: trace.as_ref(),
        };
        let text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Runtime(e.to_string()))?;
        write_file(path, text.as_bytes())?;
    }
    Ok(())
}

struct SweepArgs<'a> {
    config: &'a Path,
    out_dir: &'a Path,
    threads: Option<usize>,
    seed: Option<u64>,
    trials: Option<usize>,
    traces: bool,
    timestamp: Option<String>,
}

fn cmd_sweep(a: SweepArgs<'_>, out: &mut dyn Write) -> Result<(), Failure> {
    let text = fs::read_to_string(a.config)
        .map_err(|e| Failure::Config(format!("{}: {e}", a.config.display())))?;
    let mut spec = SweepSpec::from_json(&text)
        .map_err(|e| Failure::Config(format!("{}: {e}", a.config.display())))?;
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    if let Some(t) = a.trials {
        spec.trials_per_point = t;
    }
    spec.record_traces |= a.traces;
    spec.validate()?;

    let threads = a
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let mut result = run_sweep_with_threads(&spec, threads)?;
    result.timestamp = a.timestamp;

    let dir = a.out_dir.join(&spec.name);
    fs::create_dir_all(&dir).map_err(runtime_io)?;
    let mut csv = Vec::new();
    result.write_csv(&mut csv)?;
    write_file(&dir.join("results.csv"), &csv)?;
    if spec.record_traces {
        let traces = dir.join("traces");
        fs::create_dir_all(&traces).map_err(runtime_io)?;
        for t in &result.trials {
            if let Some(trace) = &t.cg_trace {
                let body = serde_json::to_string_pretty(trace).map_err(|e| Failure::Runtime(e.to_string()))?;
                write_file(
                    &traces.join(format!("point{:03}-trial{:03}.json", t.point, t.trial)),
                    body.as_bytes(),
                )?;
            }
        }
        for t in &mut result.trials {
            t.cg_trace = None;
        }
    }
    write_file(&dir.join("meta.json"), result.to_json()?.as_bytes())?;

    let io = |e: std::io::Error| Failure::Runtime(e.to_string());
    writeln!(
        out,
        "sweep `{}`: {} points x {} trials, wrote {}",
        spec.name,
        spec.values.len(),
        spec.trials_per_point,
        dir.display()
    )
    .map_err(io)?;
    for p in &result.points {
        let cells: Vec<String> = p
            .summaries
            .iter()
            .map(|s| format!("{}={:.6e}", s.scheme, s.mean_rate_bps))
            .collect();
        writeln!(out, "  {}: {}", p.param_value, cells.join(" ")).map_err(io)?;
    }
    Ok(())
}

fn cmd_oracle(
    args: &ScenarioArgs,
    budget: u64,
    out_path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let params = load_params(args)?;
    crate::baselines::check_budget(
        params.num_cellular,
        params.num_d2d,
        StrategySpace::Full,
        budget,
    )?;
    let scenario = generate_scenario(&params)?;
    let model = RateModel::new(&scenario, &params)?;
    let os = exhaustive_optimal(&model, budget)?;
    let io = |e: std::io::Error| Failure::Runtime(e.to_string());
    writeln!(out, "evaluated {} partitions", os.evaluated).map_err(io)?;
    writeln!(out, "optimal assignment: {:?}", os.partition.ids()).map_err(io)?;
    writeln!(out, "optimal sum rate: {} bit/s", os.sum_rate).map_err(io)?;
    if let Some(path) = out_path {
        let report = model.system_sum_rate(&os.partition)?;
        let doc = RunOutput {
            params: &params,
            scheme: Scheme::Os,
            scenario: &scenario,
            partition: &os.partition,
            report: &report,
            trace: None,
        };
        let text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Runtime(e.to_string()))?;
        write_file(path, text.as_bytes())?;
    }
    Ok(())
}

/// Pass counts of the invariant checks run by `validate`.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct ValidationReport {
    pub instances: usize,
    pub regrouping: usize,
    pub converged: usize,
    pub monotone: usize,
    pub nash_stable: usize,
    pub incremental_gain: usize,
    pub oracle_checked: usize,
    pub oracle_dominates: usize,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        let n = self.instances;
        self.regrouping == n
            && self.converged == n
            && self.monotone == n
            && self.nash_stable == n
            && self.incremental_gain == n
            && self.oracle_dominates == self.oracle_checked
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Runs the core invariants on `instances` random layouts.
pub fn validate_instances(
    instances: usize,
    root_seed: u64,
    max_cellular: usize,
    max_d2d: usize,
) -> Result<ValidationReport, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(root_seed);
    let mut rep = ValidationReport {
        instances,
        ..Default::default()
    };
    for i in 0..instances {
        let c = rng.random_range(1..=max_cellular.max(1));
        let d = rng.random_range(1..=max_d2d.max(1));
        let key = |s: u64| seed::derive(root_seed, &[i as u64, s]);
        let params = SystemParams::with_counts(c, d).with_seed(key(0));
        let scenario = generate_scenario(&params)?;
        let model = RateModel::new(&scenario, &params)?;

        let initial = random_partition(c, d, StrategySpace::Full, key(1))?;
        let report = model.system_sum_rate(&initial)?;
        if rel_close(report.system_sum_rate, model.sum_rate_direct(&initial)?, 1e-9) {
            rep.regrouping += 1;
        }

        let trace = match form_coalitions(&model, &initial, &FormationConfig::with_seed(key(2))) {
            Ok(t) => {
                rep.converged += 1;
                t
            }
            Err(Error::CapExhausted(t)) => *t,
            Err(e) => return Err(e),
        };
        let mut part = initial.clone();
        let mut value = report.system_sum_rate;
        let mut monotone = true;
        for s in &trace.switches {
            let target = crate::rate::Coalition::from_id(s.to, c)?;
            part = apply_switch(&part, s.pair, target)?;
            let next = model.system_sum_rate(&part)?.system_sum_rate;
            monotone &= next > value;
            value = next;
        }
        if monotone && part == trace.final_partition {
            rep.monotone += 1;
        }
        if is_nash_stable(&model, &trace.final_partition)?.0 {
            rep.nash_stable += 1;
        }

        let pair = rng.random_range(0..d);
        let current = initial.assignment()[pair];
        let target = initial
            .all_coalitions()
            .filter(|&t| t != current)
            .nth(rng.random_range(0..c))
            .expect("C alternatives");
        let gain = switch_gain(&model, &initial, pair, target)?;
        let moved = apply_switch(&initial, pair, target)?;
        let full = model.system_sum_rate(&moved)?.system_sum_rate - report.system_sum_rate;
        if (gain - full).abs() <= 1e-9 * report.system_sum_rate {
            rep.incremental_gain += 1;
        }

        if crate::baselines::search_space_size(c, d, StrategySpace::Full) <= 100_000 {
            rep.oracle_checked += 1;
            let os = exhaustive_optimal(&model, 100_000)?;
            let final_rate = model.system_sum_rate(&trace.final_partition)?.system_sum_rate;
            if os.sum_rate >= final_rate && os.sum_rate >= report.system_sum_rate {
                rep.oracle_dominates += 1;
            }
        }
    }
    Ok(rep)
}

fn cmd_validate(
    instances: usize,
    seed: u64,
    max_cellular: usize,
    max_d2d: usize,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let rep = validate_instances(instances, seed, max_cellular, max_d2d)?;
    let io = |e: std::io::Error| Failure::Runtime(e.to_string());
    let n = rep.instances;
    let rows = [
        ("regrouping identity", rep.regrouping, n),
        ("convergence before cap", rep.converged, n),
        ("strictly increasing switches", rep.monotone, n),
        ("nash-stable final partition", rep.nash_stable, n),
        ("incremental gain = full difference", rep.incremental_gain, n),
        ("oracle dominance", rep.oracle_dominates, rep.oracle_checked),
    ];
    for (name, ok, total) in rows {
        let tag = if ok == total { "PASS" } else { "FAIL" };
        writeln!(out, "{tag} {name}: {ok}/{total}").map_err(io)?;
    }
    if rep.all_passed() {
        Ok(())
    } else {
        Err(Failure::Runtime("invariant violations found".into()))
    }
}

/// Parses `argv` (program name first) and runs the command.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_CONFIG,
            };
            let sink: &mut dyn Write = if code == EXIT_OK { &mut *out } else { &mut *err };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let result = match cli.command {
        Command::Run {
            scenario,
            scheme,
            out: path,
        } => cmd_run(&scenario, &scheme, path.as_deref(), out),
        Command::Sweep {
            config,
            out: dir,
            threads,
            seed,
            trials,
            traces,
            timestamp,
        } => cmd_sweep(
            SweepArgs {
                config: &config,
                out_dir: &dir,
                threads,
                seed,
                trials,
                traces,
                timestamp,
            },
            out,
        ),
        Command::Oracle {
            scenario,
            budget,
            out: path,
        } => cmd_oracle(&scenario, budget, path.as_deref(), out),
        Command::Validate {
            instances,
            seed,
            max_cellular,
            max_d2d,
        } => cmd_validate(instances, seed, max_cellular, max_d2d, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Config(msg)) => {
            let _ = writeln!(err, "config error: {msg}");
            EXIT_CONFIG
        }
        Err(Failure::Runtime(msg)) => {
            let _ = writeln!(err, "refused: {msg}");
            EXIT_RUNTIME
        }
    }
}
