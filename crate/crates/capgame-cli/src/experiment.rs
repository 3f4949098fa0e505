//! Experiment execution and CSV emission.
//!
//! Every experiment is a pure function of its config: instances, game
//! seeds, and job ordering are all derived from the config seed with
//! stable indices, results are collected in job order regardless of which
//! thread finished first, and output files carry no timestamps — rerunning
//! the same config produces byte-identical files.

use crate::config::{Algorithm, ConfigError, ExperimentConfig, ExperimentKind, SchemeToken};
use capgame::exec::{derive_seed, map_indexed};
use capgame::game::{
    run_game, summarize, GameConfig, GameError, GameStats, History, LearnerKind,
};
use capgame::instances::{gen_blocker_cluster, gen_random, load_instance, GenConfig, InstanceError};
use capgame::metric::Instance;
use capgame::schedule::{
    admission_threshold, brute_force_opt, hw_binary_search, hw_greedy, ScheduleError,
    ScheduleResult,
};
use capgame::sinr::{assign_power, AffectanceTable, SinrError, SinrParams};
use capgame::verify::{
    check_failure_fraction, check_half_set, check_sandwich, check_separation, opt_ratio_report,
    Report,
};
use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Io(std::io::Error),
    Csv(csv::Error),
    Instance(InstanceError),
    Game(GameError),
    Schedule(ScheduleError),
    Sinr(SinrError),
    /// emit_summary was handed zero completed runs.
    EmptySummary,
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
            RunError::Csv(e) => write!(f, "csv error: {e}"),
            RunError::Instance(e) => write!(f, "{e}"),
            RunError::Game(e) => write!(f, "game error: {e}"),
            RunError::Schedule(e) => write!(f, "schedule error: {e}"),
            RunError::Sinr(e) => write!(f, "{e}"),
            RunError::EmptySummary => write!(f, "no completed runs to summarize"),
        }
    }
}

impl std::error::Error for RunError {}

macro_rules! from_err {
    ($v:ident, $t:ty) => {
        impl From<$t> for RunError {
            fn from(e: $t) -> Self {
                RunError::$v(e)
            }
        }
    };
}
from_err!(Config, ConfigError);
from_err!(Io, std::io::Error);
from_err!(Csv, csv::Error);
from_err!(Instance, InstanceError);
from_err!(Game, GameError);
from_err!(Schedule, ScheduleError);
from_err!(Sinr, SinrError);

/// What an experiment leaves behind.
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: Vec<SummaryRow>,
    /// Failed checks when the experiment was a verify suite.
    pub verify_failures: usize,
}

/// One headline number from one completed run.
#[derive(Debug, Clone)]
pub struct SummaryInput {
    pub algorithm: &'static str,
    pub scheme: &'static str,
    pub metric: &'static str,
    pub value: f64,
}

/// Aggregated line of the summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub algorithm: String,
    pub scheme: String,
    pub metric: String,
    pub runs: usize,
    pub mean: f64,
    pub std: f64,
}

/// Groups per-run values by (algorithm, scheme, metric) into means and
/// sample standard deviations (0 for a single run). Refuses an empty set.
pub fn emit_summary(rows: &[SummaryInput]) -> Result<Vec<SummaryRow>, RunError> {
    if rows.is_empty() {
        return Err(RunError::EmptySummary);
    }
    let mut groups: BTreeMap<(&str, &str, &str), Vec<f64>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.algorithm, r.scheme, r.metric)).or_default().push(r.value);
    }
    Ok(groups
        .into_iter()
        .map(|((algorithm, scheme, metric), values)| {
            let n = values.len();
            let mean = values.iter().sum::<f64>() / n as f64;
            let std = if n > 1 {
                (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            SummaryRow {
                algorithm: algorithm.into(),
                scheme: scheme.into(),
                metric: metric.into(),
                runs: n,
                mean,
                std,
            }
        })
        .collect())
}

/// Writes one CSV with the standard provenance header. Extra header
/// comment lines may note per-file particulars.
fn write_csv(
    path: &Path,
    config: &ExperimentConfig,
    extra_comments: &[String],
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<(), RunError> {
    let mut text = String::from("# capgame experiment output\n");
    text.push_str(&format!("# config: {}\n", config.provenance()));
    text.push_str(&format!("# seed: {}\n", config.seed));
    for line in extra_comments {
        text.push_str(&format!("# {line}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let body = w.into_inner().map_err(|e| RunError::Io(e.into_error()))?;
    text.push_str(&String::from_utf8(body).expect("csv output is utf8"));
    fs::write(path, text)?;
    Ok(())
}

fn write_summary(
    config: &ExperimentConfig,
    inputs: &[SummaryInput],
    files: &mut Vec<PathBuf>,
) -> Result<Vec<SummaryRow>, RunError> {
    let summary = emit_summary(inputs)?;
    let rows: Vec<Vec<String>> = summary
        .iter()
        .map(|s| {
            vec![
                s.algorithm.clone(),
                s.scheme.clone(),
                s.metric.clone(),
                s.runs.to_string(),
                s.mean.to_string(),
                s.std.to_string(),
            ]
        })
        .collect();
    let path = config.out.join("summary.csv");
    write_csv(
        &path,
        config,
        &[],
        &["algorithm", "scheme", "metric", "runs", "mean", "std"],
        &rows,
    )?;
    files.push(path);
    Ok(summary)
}

fn learner_of(algo: Algorithm) -> LearnerKind {
    match algo {
        Algorithm::GameRwm => LearnerKind::Rwm,
        Algorithm::GameExp3 => LearnerKind::Exp3,
        _ => unreachable!("not a game algorithm"),
    }
}

/// Runs one schedule baseline under one scheme.
fn run_schedule(
    algo: Algorithm,
    inst: &Instance,
    params: &SinrParams,
    scheme: SchemeToken,
) -> Result<ScheduleResult, RunError> {
    let s = scheme.to_scheme();
    Ok(match algo {
        Algorithm::Hw => {
            let c = admission_threshold(params.alpha, params.beta)?;
            hw_greedy(inst, params, &s, c)?
        }
        Algorithm::HwBsearch => hw_binary_search(inst, params, &s)?,
        Algorithm::Brute => brute_force_opt(inst, params, &s)?,
        _ => unreachable!("not a schedule algorithm"),
    })
}

struct GameRun {
    series: Vec<(usize, usize)>,
    stats: GameStats,
}

fn play(
    inst: &Arc<Instance>,
    params: &SinrParams,
    scheme: SchemeToken,
    algo: Algorithm,
    rounds: usize,
    seed: u64,
    initial_weights: Option<Vec<(f64, f64)>>,
) -> Result<GameRun, RunError> {
    let cfg = GameConfig {
        scheme: scheme.to_scheme(),
        learner: learner_of(algo),
        rounds,
        seed,
        horizon_hint: Some(rounds),
        initial_weights,
    };
    let history = run_game(Arc::clone(inst), params, &cfg)?;
    let series = attempts_successes(&history);
    let stats = summarize(&history)?;
    Ok(GameRun { series, stats })
}

fn attempts_successes(history: &History) -> Vec<(usize, usize)> {
    history
        .rounds
        .iter()
        .map(|r| {
            (
                r.actions.iter().filter(|&&a| a).count(),
                r.successes.iter().filter(|&&s| s).count(),
            )
        })
        .collect()
}

/// Mean successful transmissions per round over the final window (up to
/// 100 rounds), the figure-of-merit the sweeps report.
fn tail_mean_successes(series: &[(usize, usize)]) -> f64 {
    let w = series.len().min(100);
    series[series.len() - w..].iter().map(|&(_, s)| s as f64).sum::<f64>() / w as f64
}

fn links_rows(stats: &GameStats) -> Vec<Vec<String>> {
    stats
        .per_link
        .iter()
        .map(|s| {
            vec![
                s.link.to_string(),
                s.q.to_string(),
                s.x.to_string(),
                s.f.to_string(),
                s.regret.to_string(),
            ]
        })
        .collect()
}

const LINKS_HEADER: [&str; 5] = ["link_id", "q", "x", "f", "regret"];
const SCHEDULE_HEADER: [&str; 4] = ["algorithm", "c", "active_count", "feasible"];

fn schedule_row(algo: Algorithm, scheme: SchemeToken, r: &ScheduleResult) -> Vec<String> {
    vec![
        algo.name().to_string(),
        r.threshold.map(|c| c.to_string()).unwrap_or_default(),
        r.active.len().to_string(),
        r.feasible.to_string(),
        scheme.name().to_string(),
    ]
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Outcome, RunError> {
    config.validate()?;
    fs::create_dir_all(&config.out)?;
    match config.kind {
        ExperimentKind::Convergence => run_convergence(config),
        ExperimentKind::SweepN => run_sweep(config, SweepAxis::N),
        ExperimentKind::SweepDmax => run_sweep(config, SweepAxis::Dmax),
        ExperimentKind::Tight => run_tight(config),
        ExperimentKind::VerifySuite => run_verify(config),
    }
}

fn run_convergence(config: &ExperimentConfig) -> Result<Outcome, RunError> {
    let runs_dir = config.out.join("runs");
    fs::create_dir_all(&runs_dir)?;
    let inst = Arc::new(match &config.instance {
        Some(path) => load_instance(path)?,
        None => gen_random(&GenConfig {
            n: config.n,
            d_max: config.d_max,
            world: config.world,
            seed: derive_seed(config.seed, 0),
        })?,
    });
    let game_algos: Vec<Algorithm> =
        config.algorithms.iter().copied().filter(Algorithm::is_game).collect();
    let mut jobs = Vec::new();
    for &algo in &game_algos {
        for &scheme in &config.schemes {
            for rep in 0..config.replicates {
                jobs.push((algo, scheme, rep));
            }
        }
    }
    let results: Vec<Result<GameRun, RunError>> = map_indexed(jobs.len(), |i| {
        let (algo, scheme, _rep) = jobs[i];
        play(
            &inst,
            &config.params,
            scheme,
            algo,
            config.rounds,
            derive_seed(config.seed, 1 + i as u64),
            None,
        )
    });

    // Per-round (attempts, successes) series of every replicate, keyed by
    // (algorithm, scheme).
    type SeriesByPair = BTreeMap<(&'static str, &'static str), Vec<Vec<(usize, usize)>>>;
    let mut files = Vec::new();
    let mut summary_inputs = Vec::new();
    let mut per_pair: SeriesByPair = BTreeMap::new();
    for (job, result) in jobs.iter().zip(results) {
        let (algo, scheme, rep) = *job;
        let run = result?;
        let rows: Vec<Vec<String>> = run
            .series
            .iter()
            .enumerate()
            .map(|(r, &(a, s))| vec![r.to_string(), a.to_string(), s.to_string()])
            .collect();
        let path =
            runs_dir.join(format!("convergence_{}_{}_rep{rep}.csv", algo.name(), scheme.name()));
        write_csv(&path, config, &[], &["round", "attempts", "successes"], &rows)?;
        files.push(path);
        let path = runs_dir
            .join(format!("convergence_{}_{}_rep{rep}_links.csv", algo.name(), scheme.name()));
        write_csv(&path, config, &[], &LINKS_HEADER, &links_rows(&run.stats))?;
        files.push(path);
        summary_inputs.push(SummaryInput {
            algorithm: algo.name(),
            scheme: scheme.name(),
            metric: "tail_mean_successes",
            value: tail_mean_successes(&run.series),
        });
        // Stash the series for averaging below; job order is stable.
        per_pair.entry((algo.name(), scheme.name())).or_default().push(run.series);
    }

    // Averaged per-iteration series per (algorithm, scheme).
    for &algo in &game_algos {
        for &scheme in &config.schemes {
            let series = per_pair.remove(&(algo.name(), scheme.name())).expect("series recorded");
            let reps = series.len() as f64;
            let rows: Vec<Vec<String>> = (0..config.rounds)
                .map(|r| {
                    let attempts: f64 =
                        series.iter().map(|s| s[r].0 as f64).sum::<f64>() / reps;
                    let successes: f64 =
                        series.iter().map(|s| s[r].1 as f64).sum::<f64>() / reps;
                    vec![r.to_string(), attempts.to_string(), successes.to_string()]
                })
                .collect();
            let path = config
                .out
                .join(format!("convergence_{}_{}.csv", algo.name(), scheme.name()));
            write_csv(&path, config, &[], &["round", "attempts", "successes"], &rows)?;
            files.push(path);
        }
    }

    // Schedule baselines, once per scheme, for context lines in plots.
    let schedule_algos: Vec<Algorithm> =
        config.algorithms.iter().copied().filter(|a| !a.is_game()).collect();
    if !schedule_algos.is_empty() {
        let mut rows = Vec::new();
        for &algo in &schedule_algos {
            for &scheme in &config.schemes {
                let r = run_schedule(algo, &inst, &config.params, scheme)?;
                rows.push(schedule_row(algo, scheme, &r));
                summary_inputs.push(SummaryInput {
                    algorithm: algo.name(),
                    scheme: scheme.name(),
                    metric: "active_count",
                    value: r.active.len() as f64,
                });
            }
        }
        let path = config.out.join("convergence_schedules.csv");
        write_csv(&path, config, &[], &with_scheme(&SCHEDULE_HEADER), &rows)?;
        files.push(path);
    }

    let summary = write_summary(config, &summary_inputs, &mut files)?;
    Ok(Outcome { files, summary, verify_failures: 0 })
}

fn with_scheme(base: &[&'static str]) -> Vec<&'static str> {
    let mut v = base.to_vec();
    v.push("scheme");
    v
}

enum SweepAxis {
    N,
    Dmax,
}

fn run_sweep(config: &ExperimentConfig, axis: SweepAxis) -> Result<Outcome, RunError> {
    let (axis_name, points): (&str, Vec<(usize, f64)>) = match axis {
        SweepAxis::N => ("n", config.n_values.iter().map(|&n| (n, config.d_max)).collect()),
        SweepAxis::Dmax => {
            ("d_max", config.dmax_values.iter().map(|&d| (config.n, d)).collect())
        }
    };
    let point_label = |p: &(usize, f64)| match axis {
        SweepAxis::N => p.0.to_string(),
        SweepAxis::Dmax => p.1.to_string(),
    };

    struct JobOut {
        values: Vec<(Algorithm, SchemeToken, f64)>,
        schedules: Vec<(Algorithm, SchemeToken, String, usize, bool)>,
    }

    let mut jobs = Vec::new();
    for (pi, &point) in points.iter().enumerate() {
        for rep in 0..config.replicates {
            jobs.push((pi, point, rep));
        }
    }
    let algorithms = config.algorithms.clone();
    let schemes = config.schemes.clone();
    let results: Vec<Result<JobOut, RunError>> = map_indexed(jobs.len(), |i| {
        let (_pi, (n, d_max), _rep) = jobs[i];
        let base = derive_seed(config.seed, i as u64);
        let inst = Arc::new(gen_random(&GenConfig {
            n,
            d_max,
            world: config.world,
            seed: derive_seed(base, 0),
        })?);
        let mut values = Vec::new();
        let mut schedules = Vec::new();
        let mut game_idx = 0u64;
        for &algo in &algorithms {
            for &scheme in &schemes {
                if algo.is_game() {
                    game_idx += 1;
                    let run = play(
                        &inst,
                        &config.params,
                        scheme,
                        algo,
                        config.rounds,
                        derive_seed(base, game_idx),
                        None,
                    )?;
                    values.push((algo, scheme, tail_mean_successes(&run.series)));
                } else {
                    let r = run_schedule(algo, &inst, &config.params, scheme)?;
                    values.push((algo, scheme, r.active.len() as f64));
                    schedules.push((
                        algo,
                        scheme,
                        r.threshold.map(|c| c.to_string()).unwrap_or_default(),
                        r.active.len(),
                        r.feasible,
                    ));
                }
            }
        }
        Ok(JobOut { values, schedules })
    });

    let mut files = Vec::new();
    let mut summary_inputs = Vec::new();
    let mut value_rows = Vec::new();
    let mut schedule_rows = Vec::new();
    for (job, result) in jobs.iter().zip(results) {
        let (_pi, point, rep) = *job;
        let out = result?;
        for (algo, scheme, value) in out.values {
            value_rows.push(vec![
                point_label(&point),
                algo.name().to_string(),
                scheme.name().to_string(),
                rep.to_string(),
                value.to_string(),
            ]);
            summary_inputs.push(SummaryInput {
                algorithm: algo.name(),
                scheme: scheme.name(),
                metric: if algo.is_game() { "tail_mean_successes" } else { "active_count" },
                value,
            });
        }
        for (algo, scheme, c, count, feasible) in out.schedules {
            schedule_rows.push(vec![
                point_label(&point),
                rep.to_string(),
                scheme.name().to_string(),
                algo.name().to_string(),
                c,
                count.to_string(),
                feasible.to_string(),
            ]);
        }
    }

    let kind = config.kind.name();
    let path = config.out.join(format!("{kind}.csv"));
    write_csv(
        &path,
        config,
        &[],
        &[axis_name, "algorithm", "scheme", "replicate", "value"],
        &value_rows,
    )?;
    files.push(path);
    if !schedule_rows.is_empty() {
        let path = config.out.join(format!("{kind}_schedules.csv"));
        write_csv(
            &path,
            config,
            &[],
            &[axis_name, "replicate", "scheme", "algorithm", "c", "active_count", "feasible"],
            &schedule_rows,
        )?;
        files.push(path);
    }
    let summary = write_summary(config, &summary_inputs, &mut files)?;
    Ok(Outcome { files, summary, verify_failures: 0 })
}

fn run_tight(config: &ExperimentConfig) -> Result<Outcome, RunError> {
    let runs_dir = config.out.join("runs");
    fs::create_dir_all(&runs_dir)?;
    let inst = Arc::new(gen_blocker_cluster(config.tight_d, config.params.alpha)?);
    // Start from the adversarial profile: the long blocker always
    // transmits, every short link stays silent.
    let mut pinned = vec![(0.0, 1.0); inst.len()];
    pinned[0] = (1.0, 0.0);

    let game_algos: Vec<Algorithm> =
        config.algorithms.iter().copied().filter(Algorithm::is_game).collect();
    let mut files = Vec::new();
    let mut summary_inputs = Vec::new();
    let mut rows = Vec::new();
    for (i, &algo) in game_algos.iter().enumerate() {
        for (j, &scheme) in config.schemes.iter().enumerate() {
            let seed = derive_seed(config.seed, (i * config.schemes.len() + j) as u64);
            let run = play(
                &inst,
                &config.params,
                scheme,
                algo,
                config.rounds,
                seed,
                Some(pinned.clone()),
            )?;
            let opt = brute_force_opt(&inst, &config.params, &scheme.to_scheme())?;
            let max_regret =
                run.stats.per_link.iter().map(|s| s.regret).fold(f64::MIN, f64::max);
            rows.push(vec![
                scheme.name().to_string(),
                algo.name().to_string(),
                run.stats.q_total.to_string(),
                run.stats.x_total.to_string(),
                opt.active.len().to_string(),
                opt.feasible.to_string(),
                max_regret.to_string(),
            ]);
            let path = runs_dir
                .join(format!("tight_{}_{}_links.csv", algo.name(), scheme.name()));
            write_csv(&path, config, &[], &LINKS_HEADER, &links_rows(&run.stats))?;
            files.push(path);
            summary_inputs.push(SummaryInput {
                algorithm: algo.name(),
                scheme: scheme.name(),
                metric: "q_total",
                value: run.stats.q_total,
            });
            summary_inputs.push(SummaryInput {
                algorithm: "brute",
                scheme: scheme.name(),
                metric: "active_count",
                value: opt.active.len() as f64,
            });
        }
    }
    let path = config.out.join("tight.csv");
    write_csv(
        &path,
        config,
        &[format!(
            "blocker instance: d = {}, {} short links",
            config.tight_d,
            inst.len() - 1
        )],
        &["scheme", "algorithm", "q_total", "x_total", "opt_active", "opt_feasible", "max_regret"],
        &rows,
    )?;
    files.push(path);
    let summary = write_summary(config, &summary_inputs, &mut files)?;
    Ok(Outcome { files, summary, verify_failures: 0 })
}

fn run_verify(config: &ExperimentConfig) -> Result<Outcome, RunError> {
    let scheme = config.schemes[0];
    // The separation bound's premise needs beta >= 1; weaker configs are
    // checked at the substitute value and the file header says so.
    let separation_beta = config.params.beta.max(1.0);
    let q: f64 = 3.0;

    let reports: Vec<Result<Vec<Report>, RunError>> =
        map_indexed(config.verify_instances, |i| {
            let base = derive_seed(config.seed, i as u64);
            let inst = Arc::new(gen_random(&GenConfig {
                n: config.n,
                d_max: config.d_max,
                world: config.world,
                seed: derive_seed(base, 0),
            })?);
            let params = config.params;
            let power = assign_power(&scheme.to_scheme(), &inst, &params)?;
            let table = AffectanceTable::new(&inst, &power, &params)?;

            let mut out = Vec::new();
            let opt = brute_force_opt(&inst, &params, &scheme.to_scheme())?;
            out.push(check_half_set(&opt.active, &table));
            let searched = hw_binary_search(&inst, &params, &scheme.to_scheme())?;
            out.push(check_half_set(&searched.active, &table));

            // Separation inspects groups strengthened by q^alpha, under a
            // beta that satisfies the bound's premise.
            let sep_params = SinrParams { beta: separation_beta, ..params };
            let sep_power = assign_power(&scheme.to_scheme(), &inst, &sep_params)?;
            let sep_table = AffectanceTable::new(&inst, &sep_power, &sep_params)?;
            let sep_opt = brute_force_opt(&inst, &sep_params, &scheme.to_scheme())?;
            let part =
                capgame::sinr::strengthen(&sep_opt.active, q.powf(params.alpha), &sep_table)?;
            out.push(check_separation(&inst, separation_beta, &part.groups, q));

            let run = play(
                &inst,
                &params,
                scheme,
                Algorithm::GameRwm,
                config.rounds,
                derive_seed(base, 1),
                None,
            )?;
            out.push(check_sandwich(&run.stats));
            out.push(check_failure_fraction(&run.stats, config.rounds));
            out.push(opt_ratio_report(&inst, run.stats.x_total, opt.active.len()));
            Ok(out)
        });

    let mut rows = Vec::new();
    let mut failures = 0usize;
    for (i, result) in reports.into_iter().enumerate() {
        for report in result? {
            if !report.pass {
                failures += 1;
            }
            rows.push(vec![
                report.name.to_string(),
                i.to_string(),
                report.pass.to_string(),
                report.key_metric().to_string(),
            ]);
        }
    }
    let mut comments = vec![format!(
        "checks run under scheme '{}' on {} generated instances",
        scheme.name(),
        config.verify_instances
    )];
    if separation_beta != config.params.beta {
        comments.push(format!(
            "separation checked at beta = {separation_beta} (config beta = {} is below \
             the bound's premise)",
            config.params.beta
        ));
    }
    let mut files = Vec::new();
    let path = config.out.join("verify.csv");
    write_csv(
        &path,
        config,
        &comments,
        &["check", "instance_id", "pass", "key_metric"],
        &rows,
    )?;
    files.push(path);
    Ok(Outcome { files, summary: Vec::new(), verify_failures: failures })
}
