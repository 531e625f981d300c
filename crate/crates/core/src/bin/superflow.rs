use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::{error, info};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use superflow::graph::{Dir, GridGraph};
use superflow::harness::{
    count_mismatches, default_executor, export_report, generate, read_problem_set, resummarize, run_benchmark,
    run_set, sequential_reference, write_problem_set, BenchConfig, SyntheticSet, SUMMARY_NAME, WORKERS_ENV,
};
use superflow::maxflow::{maxflow_pushrelabel, maxflow_reference};
use superflow::netproto::{pushrelabel_solver, ServerConfig, WorkerServer};
use superflow::scheduler::{Policy, WorkerHandle};

#[derive(Parser)]
#[command(name = "superflow", version, about = "Batched parametric max-flow over grid supergraphs")]
struct Cli {
    /// error, warn, info, debug or trace
    #[arg(long, global = true, default_value = "info")]
    log_level: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Static,
    Dynamic,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic problem set (problems.bin + problems.json)
    Gen {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the benchmark and export records, summary and report
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        policy: Option<PolicyArg>,
        /// Also compare every cut with the sequential reference
        #[arg(long)]
        verify: bool,
    },
    /// Serve solve requests
    Worker {
        #[arg(long, default_value = "127.0.0.1:7878")]
        listen: String,
        #[arg(long, default_value_t = 2)]
        solver_threads: usize,
        #[arg(long, default_value_t = 2)]
        max_concurrent: usize,
    },
    /// Differential checks: push-relabel against the reference solver on
    /// random grids, then supergraph runs against sequential solves
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Problem set directory written by `gen`; generated from the config otherwise
        #[arg(long)]
        problems: Option<PathBuf>,
        #[arg(long, default_value_t = 500)]
        grids: usize,
        #[arg(long, default_value_t = 1)]
        rng_seed: u64,
    },
    /// Rebuild summary.csv from records.jsonl
    Report {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the default configuration as TOML
    Config,
}

fn load_config(path: Option<&PathBuf>) -> anyhow::Result<BenchConfig> {
    Ok(match path {
        Some(p) => BenchConfig::load(p)?,
        None => BenchConfig::default(),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().parse_filters(&cli.log_level).init();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            error!("{e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<bool> {
    match command {
        Command::Gen { config, out } => {
            let cfg = load_config(config.as_ref())?;
            let set = generate(&cfg, &mut ChaCha8Rng::seed_from_u64(cfg.rng_seed))?;
            let dir = out.unwrap_or_else(|| cfg.output.clone());
            write_problem_set(&dir, &cfg, &set.problems)?;
            info!("wrote {} problems to {}", set.problems.len(), dir.display());
            Ok(true)
        }
        Command::Run {
            config,
            out,
            policy,
            verify,
        } => {
            let mut cfg = load_config(config.as_ref())?;
            if let Some(p) = policy {
                cfg.policy = match p {
                    PolicyArg::Static => Policy::Static,
                    PolicyArg::Dynamic => Policy::Dynamic,
                };
            }
            let report = run_benchmark(&cfg)?;
            let dir = out.unwrap_or_else(|| cfg.output.clone());
            export_report(&report, &dir)?;
            for row in &report.summary {
                println!(
                    "image {}: {} tasks, min {} ms, avg {} ms, max {} ms",
                    row.image, row.tasks, row.min_ms, row.avg_ms, row.max_ms
                );
            }
            for m in &report.makespans.makespans {
                println!("{:<18} {:.3} ms", m.policy, m.makespan as f64 / 1e6);
            }
            if let Some(o) = report.mean_overlap {
                println!("mean best overlap  {o:.4}");
            }
            if verify {
                let set = generate(&cfg, &mut ChaCha8Rng::seed_from_u64(cfg.rng_seed))?;
                let reference = sequential_reference(&set.seed_problems(), &cfg.lambdas)?;
                let bad = count_mismatches(&report.solutions, &reference);
                println!("sequential reference: {bad} mismatches");
                return Ok(bad == 0);
            }
            Ok(true)
        }
        Command::Worker {
            listen,
            solver_threads,
            max_concurrent,
        } => {
            anyhow::ensure!(solver_threads >= 1 && max_concurrent >= 1, "thread counts must be at least 1");
            let config = ServerConfig {
                max_concurrent,
                solver_threads,
            };
            let server = WorkerServer::bind(listen.as_str(), config, pushrelabel_solver())?;
            println!("listening on {}", server.local_addr()?);
            server.run()?;
            Ok(true)
        }
        Command::Verify {
            config,
            problems,
            grids,
            rng_seed,
        } => {
            let oracle_ok = verify_oracle(grids, rng_seed)?;
            let cfg = load_config(config.as_ref())?;
            let set = match problems {
                Some(dir) => {
                    let problems = read_problem_set(&dir)?;
                    SyntheticSet {
                        images: Vec::new(),
                        problems,
                    }
                }
                None => generate(&cfg, &mut ChaCha8Rng::seed_from_u64(cfg.rng_seed))?,
            };
            Ok(oracle_ok && verify_supergraphs(&cfg, &set)?)
        }
        Command::Report { records, out } => {
            let out = out.unwrap_or_else(|| records.with_file_name(SUMMARY_NAME));
            let rows = resummarize(&records, &out)?;
            println!("{} summary rows written to {}", rows.len(), out.display());
            Ok(true)
        }
        Command::Config => {
            print!("{}", BenchConfig::default().to_toml());
            Ok(true)
        }
    }
}

fn random_grid(rng: &mut ChaCha8Rng) -> GridGraph {
    let (w, h) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
    let mut g = GridGraph::zeros(w, h);
    for v in 0..g.len() {
        g.src_cap[v] = rng.gen_range(0..=10);
        g.snk_cap[v] = rng.gen_range(0..=10);
        for dir in Dir::ALL {
            if g.neighbor(v, dir).is_some() {
                g.set_edge(v, dir, rng.gen_range(0..=10));
            }
        }
    }
    g
}

fn verify_oracle(grids: usize, seed: u64) -> anyhow::Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for i in 0..grids {
        let g = random_grid(&mut rng);
        let (a, b) = (maxflow_pushrelabel(&g)?, maxflow_reference(&g)?);
        if a != b {
            bad += 1;
            error!("grid {i} ({}x{}): push-relabel flow {} vs reference {}", g.width, g.height, a.flow, b.flow);
        }
    }
    println!("oracle: {grids} grids, {bad} mismatches");
    Ok(bad == 0)
}

fn verify_supergraphs(cfg: &BenchConfig, set: &SyntheticSet) -> anyhow::Result<bool> {
    let reference = sequential_reference(&set.seed_problems(), &cfg.lambdas)?;
    let workers = match std::env::var(WORKERS_ENV) {
        Ok(list) => cfg.resolve_workers(Some(&list)),
        Err(_) => vec![WorkerHandle::local(0)],
    };
    let report = run_set(cfg, set, &workers, &default_executor(cfg))?;
    let bad = count_mismatches(&report.solutions, &reference);
    println!("supergraph: {} pairs, {bad} mismatches", reference.len() * cfg.lambdas.len());
    Ok(bad == 0)
}
