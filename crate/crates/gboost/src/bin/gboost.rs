use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use gboost::backends::synthetic::{
    recommended_search_config, synthetic_triple, synthetic_vocabulary, SyntheticProfile,
};
use gboost::backends::{RemoteModelClient, RemotePRMClient};
use gboost::core::{ExpandStrategy, SearchConfig, TraceEvent};
use gboost::engine::run_search;
use gboost::harness::benchmark::ALL_METHODS;
use gboost::harness::{
    export_trace, generate_tasks, oracle_prm_for, read_tasks, run_benchmark, sweep, write_tasks,
    RunConfig, SweepParam, SweepValue, ToyTask,
};
use gboost::policy::BackendTriple;
use gboost::reward::RewardModel;

#[derive(Parser)]
#[command(name = "gboost", about = "PRM-guided MCTS over a collaborative decoding space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the five-method benchmark on a task set.
    Run(RunArgs),
    /// Run an ablation sweep over one search parameter.
    Sweep(SweepArgs),
    /// Generate a deterministic toy task set as JSONL.
    GenTasks(GenTasksArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON config file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Task set JSONL; generated from the config when omitted.
    #[arg(long)]
    task: Option<PathBuf>,
    /// Output directory for reports.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override: search iterations T.
    #[arg(long)]
    iterations: Option<usize>,
    /// Override: exploration constant C.
    #[arg(long = "c-explore")]
    c_explore: Option<f64>,
    /// Override: step length L.
    #[arg(long = "step-length")]
    step_length: Option<usize>,
    /// Override: collaboration probability.
    #[arg(long = "p-collab")]
    p_collab: Option<f64>,
    /// Override: expansion strategy (single|full).
    #[arg(long)]
    expand: Option<String>,
    /// Override: RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the concatenated search traces here (NDJSON).
    #[arg(long = "trace-out")]
    trace_out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Parameter to sweep: c_explore, step_length, max_iterations,
    /// p_collab, or expand_strategy.
    #[arg(long)]
    param: SweepParam,
    /// Comma-separated values.
    #[arg(long)]
    values: String,
}

#[derive(Args)]
struct GenTasksArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, default_value = "complementary")]
    profile: SyntheticProfile,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn apply_overrides(config: &mut SearchConfig, args: &CommonArgs) -> Result<(), String> {
    if let Some(t) = args.iterations {
        config.max_iterations = t;
    }
    if let Some(c) = args.c_explore {
        config.c_explore = c;
    }
    if let Some(l) = args.step_length {
        config.step_length = l;
    }
    if let Some(p) = args.p_collab {
        config.p_collab = p;
    }
    if let Some(s) = &args.expand {
        config.expand_strategy = match s.to_ascii_lowercase().as_str() {
            "single" => ExpandStrategy::Single,
            "full" => ExpandStrategy::Full,
            other => return Err(format!("unknown expand strategy '{other}'")),
        };
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config.validate().map_err(|e| e.to_string())
}

struct Setup {
    config: RunConfig,
    tasks: Vec<ToyTask>,
    backends: BackendTriple,
    prm: Box<dyn RewardModel + Sync>,
}

fn setup(common: &CommonArgs) -> Result<Setup, String> {
    let mut config = match &common.config {
        Some(path) => RunConfig::load(path).map_err(|e| e.to_string())?,
        // without a config file the backends are the synthetic ones, so
        // start from the search settings matched to them
        None => RunConfig { search: recommended_search_config(), ..RunConfig::default() },
    };
    apply_overrides(&mut config.search, common)?;
    let profile: SyntheticProfile = config.profile.parse()?;
    let tasks = match &common.task {
        Some(path) => read_tasks(path).map_err(|e| e.to_string())?,
        None => generate_tasks(config.task_seed, config.n_tasks, profile),
    };

    let triple = synthetic_triple(config.task_seed, profile);
    let auth = std::env::var("GBOOST_AUTH_TOKEN").ok();
    let backends = match std::env::var("GBOOST_GENERAL_URL") {
        Ok(url) => {
            let remote = RemoteModelClient::new(
                url,
                "general",
                synthetic_vocabulary(),
                Duration::from_secs(30),
                3,
                auth.clone(),
            );
            BackendTriple::new(Arc::new(remote), triple.tuned.clone(), triple.base.clone())
                .map_err(|e| e.to_string())?
        }
        Err(_) => triple,
    };
    let prm: Box<dyn RewardModel + Sync> = match std::env::var("GBOOST_PRM_URL") {
        Ok(url) => Box::new(RemotePRMClient::new(url, Duration::from_secs(30), 3, auth)),
        Err(_) => Box::new(oracle_prm_for(&tasks)),
    };
    Ok(Setup { config, tasks, backends, prm })
}

fn write_traces(setup: &Setup, path: &Path) -> Result<(), String> {
    let mut events: Vec<TraceEvent> = Vec::new();
    for task in &setup.tasks {
        let cfg = SearchConfig {
            seed: setup.config.search.seed ^ task.seed.wrapping_mul(0x9e3779b97f4a7c15),
            ..setup.config.search.clone()
        };
        let result = run_search(task.query.clone(), &setup.backends, setup.prm.as_ref(), &cfg)
            .map_err(|e| e.to_string())?;
        events.extend(result.trace);
    }
    export_trace(&events, path).map_err(|e| e.to_string())
}

fn cmd_run(args: &RunArgs) -> Result<(), String> {
    let s = setup(&args.common)?;
    let report =
        run_benchmark(&s.tasks, &s.backends, s.prm.as_ref(), &s.config.search).map_err(|e| e.to_string())?;
    for m in ALL_METHODS {
        println!("{:<12} {:.4}", m.name(), report.accuracy[m.name()]);
    }
    if let Some(out) = &args.common.out {
        std::fs::create_dir_all(out).map_err(|e| e.to_string())?;
        let json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
        std::fs::write(out.join("report.json"), json).map_err(|e| e.to_string())?;
        let mut csv = String::from("method,accuracy\n");
        for m in ALL_METHODS {
            csv.push_str(&format!("{},{}\n", m.name(), report.accuracy[m.name()]));
        }
        std::fs::write(out.join("report.csv"), csv).map_err(|e| e.to_string())?;
        eprintln!("report written to {}", out.display());
    }
    if let Some(trace_path) = &args.common.trace_out {
        write_traces(&s, trace_path)?;
        eprintln!("traces written to {}", trace_path.display());
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), String> {
    let s = setup(&args.common)?;
    let values: Vec<SweepValue> = args
        .values
        .split(',')
        .map(|v| SweepValue::parse(args.param, v).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    let results = sweep(args.param, &values, &s.tasks, &s.backends, s.prm.as_ref(), &s.config.search)
        .map_err(|e| e.to_string())?;
    let csv = gboost::harness::sweep_csv(args.param, &results);
    print!("{csv}");
    if let Some(out) = &args.common.out {
        std::fs::create_dir_all(out).map_err(|e| e.to_string())?;
        std::fs::write(out.join("sweep.csv"), &csv).map_err(|e| e.to_string())?;
        for (value, report) in &results {
            let json = serde_json::to_string_pretty(report).map_err(|e| e.to_string())?;
            std::fs::write(out.join(format!("report_{}.json", value.label())), json)
                .map_err(|e| e.to_string())?;
        }
        eprintln!("sweep written to {}", out.display());
    }
    Ok(())
}

fn cmd_gen_tasks(args: &GenTasksArgs) -> Result<(), String> {
    let tasks = generate_tasks(args.seed, args.n, args.profile);
    match &args.out {
        Some(path) => write_tasks(&tasks, path).map_err(|e| e.to_string())?,
        None => {
            let jsonl =
                gboost::harness::tasks::tasks_to_jsonl(&tasks).map_err(|e| e.to_string())?;
            print!("{jsonl}");
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::GenTasks(args) => cmd_gen_tasks(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
