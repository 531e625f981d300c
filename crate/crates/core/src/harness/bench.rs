use std::sync::Arc;
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::config::{BatchMode, BenchConfig, ConfigError, WORKERS_ENV};
use super::generate::{generate, GenError, SyntheticSet};
use super::overlap::overlap;
use super::report::{summarize, OverlapScore, RunReport, TaskRecord, REPORT_SCHEMA};
use crate::graph::CutResult;
use crate::netproto::pushrelabel_solver;
use crate::parametric::{solve_schedule_sequential, LambdaSchedule, ParametricError, ParametricResult, SeedProblem};
use crate::scheduler::{
    lpt_offline, makespan_report, run_dynamic, run_static, simulate_dynamic, simulate_static, Executor, Policy,
    SchedError, SolverExecutor, Task, TaskPayload, WorkerHandle,
};
use crate::supergraph::{
    apply_swap, build_seed_supergraph, knit, lambda_swap_decision, split, Part, SupergraphError, SwapMode,
};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Generate(#[from] GenError),
    #[error("building supergraphs: {0}")]
    Supergraph(#[from] SupergraphError),
    #[error("scheduling: {0}")]
    Sched(#[from] SchedError),
    #[error("sequential reference: {0}")]
    Reference(#[from] ParametricError),
    #[error("{0} of {1} (problem, lambda) pairs disagree with the sequential reference")]
    Mismatch(usize, usize),
}

/// A batch of tasks plus what each composite segment stands for.
pub struct TaskBatch {
    pub tasks: Vec<Task>,
    pub images: Vec<usize>,
    /// `(problem, lambda index)` per segment, per task.
    pub constituents: Vec<Vec<(usize, usize)>>,
}

/// Groups problems into tasks. Supergraph tasks never mix images.
pub fn build_tasks(set: &SyntheticSet, cfg: &BenchConfig) -> Result<TaskBatch, SupergraphError> {
    let schedule = &cfg.lambdas;
    let n = schedule.len();
    let mut batch = TaskBatch {
        tasks: Vec::new(),
        images: Vec::new(),
        constituents: Vec::new(),
    };
    let push = |batch: &mut TaskBatch, image: usize, built: (crate::graph::GridGraph, _), ids: Vec<(usize, usize)>| {
        let (graph, layout) = built;
        batch.tasks.push(Task {
            id: batch.tasks.len() as u64,
            payload: Arc::new(TaskPayload { graph, layout }),
            duration: None,
        });
        batch.images.push(image);
        batch.constituents.push(ids);
    };

    let mut start = 0;
    while start < set.problems.len() {
        let image = set.problems[start].image;
        let end = (start..set.problems.len())
            .find(|&i| set.problems[i].image != image)
            .unwrap_or(set.problems.len());
        match cfg.batch {
            BatchMode::Supergraph => {
                for chunk_start in (start..end).step_by(cfg.seeds_per_supergraph) {
                    let chunk_end = (chunk_start + cfg.seeds_per_supergraph).min(end);
                    let problems: Vec<SeedProblem> =
                        set.problems[chunk_start..chunk_end].iter().map(|p| p.problem.clone()).collect();
                    let built = build_seed_supergraph(&problems, schedule, cfg.swap)?;
                    let ids = (chunk_start..chunk_end).flat_map(|p| (0..n).map(move |j| (p, j))).collect();
                    push(&mut batch, image, built, ids);
                }
            }
            BatchMode::Single => {
                for p in start..end {
                    let problem = &set.problems[p].problem;
                    let swap = cfg.swap == SwapMode::Heuristic && lambda_swap_decision(problem, schedule)?;
                    for (j, &lambda) in schedule.values().iter().enumerate() {
                        let g = problem.instantiate(lambda)?;
                        let g = if swap { apply_swap(&g) } else { g };
                        let built = knit(
                            &[Part {
                                id: 0,
                                graph: &g,
                                swapped: swap,
                            }],
                            false,
                        )?;
                        push(&mut batch, image, built, vec![(p, j)]);
                    }
                }
            }
        }
        start = end;
    }
    Ok(batch)
}

pub fn default_executor(cfg: &BenchConfig) -> SolverExecutor {
    SolverExecutor {
        solver: pushrelabel_solver(),
        timeout: Duration::from_secs(cfg.timeout_secs),
    }
}

/// Generates the configured problems, runs them on the configured workers
/// ([`WORKERS_ENV`] overriding) and collects the report.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<RunReport, BenchError> {
    cfg.validate()?;
    let env = std::env::var(WORKERS_ENV).ok();
    let workers = cfg.resolve_workers(env.as_deref());
    let set = generate(cfg, &mut ChaCha8Rng::seed_from_u64(cfg.rng_seed))?;
    run_set(cfg, &set, &workers, &default_executor(cfg))
}

/// Runs an already generated set.
pub fn run_set<E: Executor>(
    cfg: &BenchConfig,
    set: &SyntheticSet,
    workers: &[WorkerHandle],
    exec: &E,
) -> Result<RunReport, BenchError> {
    let batch = build_tasks(set, cfg)?;
    let (cuts, schedule) = match cfg.policy {
        Policy::Static => run_static(&batch.tasks, workers, exec)?,
        Policy::Dynamic => run_dynamic(&batch.tasks, workers, exec)?,
    };

    let lambdas = cfg.lambdas.len();
    let mut solved: Vec<Vec<Option<CutResult>>> = vec![vec![None; lambdas]; set.problems.len()];
    let mut records = Vec::with_capacity(batch.tasks.len());
    for (t, cut) in cuts.iter().enumerate() {
        let payload = &batch.tasks[t].payload;
        let parts = split(&payload.layout, &payload.graph, cut)?;
        let ids = &batch.constituents[t];
        let entry = schedule.entries[t];
        records.push(TaskRecord {
            schema: REPORT_SCHEMA,
            task: batch.tasks[t].id,
            image: batch.images[t],
            worker: entry.worker,
            width: payload.graph.width,
            height: payload.graph.height,
            start_ns: entry.start,
            finish_ns: entry.finish,
            wall_ns: entry.finish - entry.start,
            flow: cut.flow,
            constituents: ids.clone(),
            constituent_flows: parts.iter().map(|p| p.flow).collect(),
        });
        for (&(p, j), part) in ids.iter().zip(parts) {
            solved[p][j] = Some(part);
        }
    }
    let solutions: Vec<ParametricResult> = solved
        .into_iter()
        .map(|cuts| ParametricResult {
            lambdas: cfg.lambdas.values().to_vec(),
            cuts: cuts.into_iter().map(|c| c.expect("every constituent decoded")).collect(),
        })
        .collect();

    let durations: Vec<u64> = records.iter().map(|r| r.wall_ns).collect();
    let slots: Vec<usize> = workers.iter().map(|w| w.slots).collect();
    let sim_static = simulate_static(&durations, workers.len());
    let sim_dynamic = simulate_dynamic(&durations, &slots);
    let lpt = lpt_offline(&durations, slots.iter().sum());
    let measured = match cfg.policy {
        Policy::Static => "measured_static",
        Policy::Dynamic => "measured_dynamic",
    };
    let makespans = makespan_report(&[
        (measured, &schedule),
        ("sim_static", &sim_static),
        ("sim_dynamic", &sim_dynamic),
        ("lpt", &lpt),
    ]);

    // sets loaded from problem files carry no images, hence no truth masks
    let overlaps: Vec<OverlapScore> = if set.images.is_empty() {
        Vec::new()
    } else {
        solutions
            .iter()
            .enumerate()
            .map(|(p, sol)| best_overlap(p, sol, &set.truth(p)))
            .collect()
    };
    let mean_overlap =
        (!overlaps.is_empty()).then(|| overlaps.iter().map(|o| o.value).sum::<f64>() / overlaps.len() as f64);

    Ok(RunReport {
        schema: REPORT_SCHEMA,
        config: cfg.clone(),
        policy: cfg.policy,
        batch: cfg.batch,
        workers: workers.to_vec(),
        summary: summarize(&records),
        records,
        flows: solutions.iter().map(ParametricResult::flows).collect(),
        makespans,
        overlaps,
        mean_overlap,
        solutions,
    })
}

fn best_overlap(problem: usize, sol: &ParametricResult, truth: &[bool]) -> OverlapScore {
    let mut best: Option<(usize, num_rational::Ratio<u64>)> = None;
    for (j, cut) in sol.cuts.iter().enumerate() {
        let r = overlap(&cut.labels, truth).expect("truth mask is non-empty and sized to the grid");
        if best.as_ref().is_none_or(|(_, b)| r > *b) {
            best = Some((j, r));
        }
    }
    let (lambda_index, r) = best.expect("schedule is non-empty");
    let labels = &sol.cuts[lambda_index].labels;
    let count = |f: fn(bool, bool) -> bool| labels.iter().zip(truth).filter(|(&s, &g)| f(s, g)).count() as u64;
    OverlapScore {
        problem,
        lambda_index,
        intersection: count(|s, g| s && g),
        union: count(|s, g| s || g),
        value: *r.numer() as f64 / *r.denom() as f64,
    }
}

/// Per-problem sequential solves, the reference for every distributed run.
pub fn sequential_reference(problems: &[SeedProblem], schedule: &LambdaSchedule) -> Result<Vec<ParametricResult>, ParametricError> {
    problems.iter().map(|p| solve_schedule_sequential(p, schedule)).collect()
}

/// Number of `(problem, lambda)` pairs whose cut differs from `reference`.
pub fn count_mismatches(solutions: &[ParametricResult], reference: &[ParametricResult]) -> usize {
    let mut bad = solutions.len().abs_diff(reference.len());
    for (a, b) in solutions.iter().zip(reference) {
        bad += a.cuts.len().abs_diff(b.cuts.len());
        bad += a.cuts.iter().zip(&b.cuts).filter(|(x, y)| x != y).count();
    }
    bad
}

/// Checks a report against the sequential reference.
pub fn verify_report(report: &RunReport, set: &SyntheticSet) -> Result<(), BenchError> {
    let reference = sequential_reference(&set.seed_problems(), &report.config.lambdas)?;
    let bad = count_mismatches(&report.solutions, &reference);
    if bad > 0 {
        return Err(BenchError::Mismatch(bad, reference.len() * report.config.lambdas.len()));
    }
    Ok(())
}
