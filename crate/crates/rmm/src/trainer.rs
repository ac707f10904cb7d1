//! Outer training loops: each epoch creates K fresh pseudo tasks, runs each
//! Z times against a parameter snapshot, reduces the Z*K episode gradients in
//! fixed (k, z) order, and applies one ascent update. Episode execution fans
//! out over a worker pool; the reduction order is fixed, so results are
//! bit-identical for any worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::ClassifierConfig;
use crate::env::{run_episode, CilTaskSpec, EpisodePolicy, PhaseExportRecord, Trajectory};
use crate::error::{Error, Result};
use crate::memory::Frac;
use crate::policy::{
    update_params, AdamState, BaselineState, GradientAccumulator, HeadKind, PolicyParams,
    UpdateConfig, LEVEL1_DELTA_BINS, LEVEL1_INITIAL_BINS, LEVEL2_BINS,
};
use crate::scalar::Real;
use crate::seeding::{self, tags};
use crate::taskgen::{make_pseudo_task, DatasetSource};

/// Policy network shape and optimizer constants.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PolicyConfig {
    pub hidden: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self { hidden: 16, adam_beta1: 0.9, adam_beta2: 0.999, adam_epsilon: 1e-8 }
    }
}

/// Full training configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub seed: u64,
    /// Epochs (parameter updates).
    pub epochs: usize,
    /// Pseudo tasks created per epoch (K).
    pub tasks_per_epoch: usize,
    /// Runs per pseudo task (Z).
    pub runs_per_task: usize,
    /// Incremental phases per task (N).
    pub num_phases: usize,
    pub total_budget: usize,
    pub lr_level1: f64,
    pub lr_level2: f64,
    pub baseline_decay: f64,
    /// Episode worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    pub classifier: ClassifierConfig,
    pub policy: PolicyConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            epochs: 30,
            tasks_per_epoch: 2,
            runs_per_task: 2,
            num_phases: 5,
            total_budget: 500,
            lr_level1: 1e-3,
            lr_level2: 1e-3,
            baseline_decay: 0.9,
            workers: None,
            classifier: ClassifierConfig::default(),
            policy: PolicyConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0
            || self.tasks_per_epoch == 0
            || self.runs_per_task == 0
            || self.num_phases == 0
            || self.total_budget == 0
            || self.policy.hidden == 0
        {
            return Err(Error::validation("all training counts must be positive"));
        }
        if self.lr_level1 <= 0.0 || self.lr_level2 <= 0.0 {
            return Err(Error::validation("learning rates must be positive"));
        }
        if !(0.0..1.0).contains(&self.baseline_decay) {
            return Err(Error::validation("baseline decay must lie in [0, 1)"));
        }
        self.classifier.validate()
    }

    fn update_config<F: Real>(&self) -> UpdateConfig<F> {
        UpdateConfig {
            lr_level1: F::of(self.lr_level1),
            lr_level2: F::of(self.lr_level2),
            beta1: F::of(self.policy.adam_beta1),
            beta2: F::of(self.policy.adam_beta2),
            epsilon: F::of(self.policy.adam_epsilon),
        }
    }
}

/// Mutable training state: everything a checkpoint needs to resume.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainState<F> {
    pub params: PolicyParams<F>,
    pub adam: AdamState<F>,
    pub baseline: BaselineState<F>,
    pub epochs_done: usize,
}

impl<F: Real> TrainState<F> {
    pub fn init(config: &TrainConfig) -> Self {
        let params = PolicyParams::init(config.policy.hidden, config.seed);
        let adam = AdamState::new(&params);
        Self {
            params,
            adam,
            baseline: BaselineState::new(F::of(config.baseline_decay)),
            epochs_done: 0,
        }
    }
}

/// Whether both policy levels train or level 2 stays pinned at an even split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainMode {
    OneLevel,
    TwoLevel,
}

const PINNED_EVEN_SPLIT: (i64, i64) = (1, 2);

fn pinned_level2() -> Frac {
    Frac::new(PINNED_EVEN_SPLIT.0, PINNED_EVEN_SPLIT.1)
}

/// One epoch's log line: mean return, baseline after the epoch, and action
/// frequency histograms per policy head.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub episodes: usize,
    pub mean_return: f64,
    pub baseline: f64,
    pub level1_initial_counts: Vec<u64>,
    pub level1_delta_counts: Vec<u64>,
    pub level2_counts: Vec<u64>,
}

/// Drives the epoch loop over one dataset source.
pub struct Trainer<'a, F: Real> {
    config: &'a TrainConfig,
    source: &'a DatasetSource<F>,
    mode: TrainMode,
    pool: Option<rayon::ThreadPool>,
    pub state: TrainState<F>,
}

impl<'a, F: Real> Trainer<'a, F> {
    pub fn new(
        config: &'a TrainConfig,
        source: &'a DatasetSource<F>,
        mode: TrainMode,
    ) -> Result<Self> {
        config.validate()?;
        Self::resume(config, source, mode, TrainState::init(config))
    }

    /// Continues from a previous state; epoch numbering picks up where the
    /// state left off.
    pub fn resume(
        config: &'a TrainConfig,
        source: &'a DatasetSource<F>,
        mode: TrainMode,
        state: TrainState<F>,
    ) -> Result<Self> {
        config.validate()?;
        let pool = match config.workers {
            Some(workers) => Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(workers.max(1))
                    .build()
                    .map_err(|e| Error::internal(format!("worker pool: {e}")))?,
            ),
            None => None,
        };
        Ok(Self { config, source, mode, pool, state })
    }

    pub fn epochs_done(&self) -> usize {
        self.state.epochs_done
    }

    pub fn is_finished(&self) -> bool {
        self.state.epochs_done >= self.config.epochs
    }

    /// Runs one epoch: K fresh pseudo tasks, Z runs each, one update.
    pub fn run_epoch(&mut self) -> Result<EpochLog> {
        let config = self.config;
        let epoch = self.state.epochs_done as u64;
        let mut tasks = Vec::with_capacity(config.tasks_per_epoch);
        for k in 0..config.tasks_per_epoch {
            let task_seed = seeding::derive_seed(config.seed, &[tags::TASK, epoch, k as u64]);
            tasks.push(make_pseudo_task(
                self.source,
                config.num_phases,
                config.total_budget,
                task_seed,
            )?);
        }

        let jobs: Vec<(usize, usize)> = (0..config.tasks_per_epoch)
            .flat_map(|k| (0..config.runs_per_task).map(move |z| (k, z)))
            .collect();
        let params = self.state.params.clone();
        let mode = self.mode;
        let run_job = |&(k, z): &(usize, usize)| -> Result<Trajectory<F>> {
            let policy = match mode {
                TrainMode::TwoLevel => EpisodePolicy::stochastic(&params),
                TrainMode::OneLevel => {
                    EpisodePolicy::one_level_stochastic(&params, pinned_level2())
                }
            };
            let episode_seed =
                seeding::derive_seed(config.seed, &[tags::EPISODE, epoch, k as u64, z as u64]);
            run_episode(&tasks[k], &policy, &config.classifier, episode_seed)
        };
        let episodes: Vec<Result<Trajectory<F>>> = match &self.pool {
            Some(pool) => pool.install(|| jobs.par_iter().map(run_job).collect()),
            None => jobs.par_iter().map(run_job).collect(),
        };

        // Reduce in fixed (k, z) order.
        let mut acc = GradientAccumulator::new(&self.state.params);
        let mut log = EpochLog {
            epoch: self.state.epochs_done + 1,
            episodes: jobs.len(),
            mean_return: 0.0,
            baseline: 0.0,
            level1_initial_counts: vec![0; LEVEL1_INITIAL_BINS],
            level1_delta_counts: vec![0; LEVEL1_DELTA_BINS],
            level2_counts: vec![0; LEVEL2_BINS],
        };
        for ((k, z), episode) in jobs.iter().zip(episodes) {
            let trajectory = episode.map_err(|e| {
                Error::internal(format!("episode (task {k}, run {z}) failed: {e}"))
            })?;
            let ret = trajectory.total_return;
            let reference = self.state.baseline.reference(ret);
            acc.accumulate_episode(
                &self.state.params,
                &trajectory.scored_steps(),
                ret,
                reference,
            )?;
            self.state.baseline.update(ret);
            log.mean_return += ret.as_f64();
            for record in &trajectory.records {
                if let Some(level1) = &record.level1 {
                    match level1.head {
                        HeadKind::Level1Initial => {
                            log.level1_initial_counts[level1.sample.bin_index] += 1
                        }
                        HeadKind::Level1Delta => {
                            log.level1_delta_counts[level1.sample.bin_index] += 1
                        }
                        HeadKind::Level2 => unreachable!("level-1 record"),
                    }
                }
                if let Some(level2) = &record.level2 {
                    log.level2_counts[level2.sample.bin_index] += 1;
                }
            }
        }
        debug_assert_eq!(acc.episode_count(), config.tasks_per_epoch * config.runs_per_task);
        log.mean_return /= jobs.len() as f64;
        update_params(
            &mut self.state.params,
            acc,
            &mut self.state.adam,
            &config.update_config::<F>(),
        )?;
        self.state.epochs_done += 1;
        log.baseline = self.state.baseline.value.as_f64();
        Ok(log)
    }

    /// Runs until the configured epoch count is reached.
    pub fn run_to_completion(&mut self) -> Result<Vec<EpochLog>> {
        let mut logs = Vec::new();
        while !self.is_finished() {
            logs.push(self.run_epoch()?);
        }
        Ok(logs)
    }
}

/// Trains a policy from scratch on pseudo tasks drawn from `source`.
pub fn train_rmm<F: Real>(
    config: &TrainConfig,
    source: &DatasetSource<F>,
    mode: TrainMode,
) -> Result<(TrainState<F>, Vec<EpochLog>)> {
    let mut trainer = Trainer::new(config, source, mode)?;
    let logs = trainer.run_to_completion()?;
    Ok((trainer.state, logs))
}

/// One evaluation episode's accuracies and allocation trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedEvaluation {
    pub seed_index: u64,
    /// Validation accuracy per phase, phase 0 first.
    pub per_phase: Vec<f64>,
    pub average: f64,
    pub last: f64,
    #[serde(skip_deserializing)]
    pub allocation: Vec<PhaseExportRecord>,
}

/// Aggregated evaluation over several seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub seeds: Vec<SeedEvaluation>,
    pub mean_average: f64,
    pub mean_last: f64,
}

impl EvaluationReport {
    fn from_seeds(seeds: Vec<SeedEvaluation>) -> Self {
        let n = seeds.len().max(1) as f64;
        let mean_average = seeds.iter().map(|s| s.average).sum::<f64>() / n;
        let mean_last = seeds.iter().map(|s| s.last).sum::<f64>() / n;
        Self { seeds, mean_average, mean_last }
    }
}

fn evaluate_episodes<F: Real>(
    policy: &EpisodePolicy<'_, F>,
    target: &CilTaskSpec<F>,
    classifier: &ClassifierConfig,
    num_seeds: usize,
    seed: u64,
) -> Result<EvaluationReport> {
    let mut seeds = Vec::with_capacity(num_seeds);
    for s in 0..num_seeds {
        let episode_seed = seeding::derive_seed(seed, &[tags::EVAL, s as u64]);
        let trajectory = run_episode(target, policy, classifier, episode_seed)?;
        let mut per_phase = vec![trajectory.initial_reward.as_f64()];
        per_phase.extend(trajectory.records.iter().map(|r| r.reward.as_f64()));
        let average = per_phase.iter().sum::<f64>() / per_phase.len() as f64;
        let last = *per_phase.last().expect("at least phase 0");
        seeds.push(SeedEvaluation {
            seed_index: s as u64,
            per_phase,
            average,
            last,
            allocation: trajectory.export_records(),
        });
    }
    Ok(EvaluationReport::from_seeds(seeds))
}

/// Zero-shot evaluation of a trained policy on a target task: greedy actions
/// under the feasibility constraint, `num_seeds` independent episodes.
pub fn evaluate_policy<F: Real>(
    params: &PolicyParams<F>,
    target: &CilTaskSpec<F>,
    classifier: &ClassifierConfig,
    num_seeds: usize,
    seed: u64,
) -> Result<EvaluationReport> {
    evaluate_episodes(&EpisodePolicy::greedy(params), target, classifier, num_seeds, seed)
}

/// Greedy evaluation with the level-2 ratio pinned to the even split.
pub fn evaluate_policy_one_level<F: Real>(
    params: &PolicyParams<F>,
    target: &CilTaskSpec<F>,
    classifier: &ClassifierConfig,
    num_seeds: usize,
    seed: u64,
) -> Result<EvaluationReport> {
    evaluate_episodes(
        &EpisodePolicy::one_level_greedy(params, pinned_level2()),
        target,
        classifier,
        num_seeds,
        seed,
    )
}

/// Fixed-allocation baseline: the initial split is `fixed_old_fraction`,
/// later phases apply zero deltas, and the level-2 ratio is pinned to 0.5.
pub fn run_fixed_baseline<F: Real>(
    target: &CilTaskSpec<F>,
    fixed_old_fraction: Frac,
    classifier: &ClassifierConfig,
    num_seeds: usize,
    seed: u64,
) -> Result<EvaluationReport> {
    if fixed_old_fraction <= Frac::from_integer(0) || fixed_old_fraction >= Frac::from_integer(1)
    {
        return Err(Error::validation("fixed old fraction must lie in (0, 1)"));
    }
    evaluate_episodes(
        &EpisodePolicy::fixed(fixed_old_fraction, pinned_level2()),
        target,
        classifier,
        num_seeds,
        seed,
    )
}

/// Sweeps the fixed baseline over the nine-tenths grid and returns the
/// per-fraction reports with the best mean average first.
pub fn sweep_fixed_baseline<F: Real>(
    target: &CilTaskSpec<F>,
    classifier: &ClassifierConfig,
    num_seeds: usize,
    seed: u64,
) -> Result<Vec<(Frac, EvaluationReport)>> {
    let mut results = Vec::with_capacity(9);
    for tenth in 1..=9 {
        let fraction = Frac::new(tenth, 10);
        let report = run_fixed_baseline(target, fraction, classifier, num_seeds, seed)?;
        results.push((fraction, report));
    }
    results.sort_by(|a, b| {
        b.1.mean_average
            .partial_cmp(&a.1.mean_average)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(results)
}

/// Ablation settings, mirroring the comparison rows the artifact reproduces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationMode {
    Fixed,
    OneLevel,
    TwoLevel,
    Transferred,
}

impl AblationMode {
    pub fn all() -> [AblationMode; 4] {
        [Self::Fixed, Self::OneLevel, Self::TwoLevel, Self::Transferred]
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Fixed => "fixed",
            Self::OneLevel => "one_level",
            Self::TwoLevel => "two_level",
            Self::Transferred => "transferred",
        }
    }
}

impl std::str::FromStr for AblationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(Self::Fixed),
            "one_level" => Ok(Self::OneLevel),
            "two_level" => Ok(Self::TwoLevel),
            "transferred" => Ok(Self::Transferred),
            other => Err(Error::validation(format!(
                "unknown ablation mode {other:?}; valid modes: fixed, one_level, two_level, transferred"
            ))),
        }
    }
}

/// One comparison row: the mode, its aggregate accuracies, and (for the
/// fixed sweep) the winning fraction.
#[derive(Debug, Clone, Serialize)]
pub struct AblationRow {
    pub mode: AblationMode,
    pub average: f64,
    pub last: f64,
    pub best_fraction: Option<f64>,
    pub report: EvaluationReport,
}

/// Runs the requested ablation modes against one target task.
///
/// `one_level` and `two_level` train on pseudo tasks from `source`;
/// `transferred` trains on `transfer_source` and is applied zero-shot;
/// `fixed` sweeps the fraction grid and reports the best setting.
pub fn run_ablation<F: Real>(
    config: &TrainConfig,
    source: &DatasetSource<F>,
    target: &CilTaskSpec<F>,
    modes: &[AblationMode],
    transfer_source: Option<&DatasetSource<F>>,
    eval_seeds: usize,
    eval_seed: u64,
) -> Result<Vec<AblationRow>> {
    let mut rows = Vec::with_capacity(modes.len());
    for &mode in modes {
        let row = match mode {
            AblationMode::Fixed => {
                let sweep = sweep_fixed_baseline(target, &config.classifier, eval_seeds, eval_seed)?;
                let (fraction, report) = sweep.into_iter().next().expect("nine fractions");
                AblationRow {
                    mode,
                    average: report.mean_average,
                    last: report.mean_last,
                    best_fraction: Some(*fraction.numer() as f64 / *fraction.denom() as f64),
                    report,
                }
            }
            AblationMode::OneLevel => {
                let (state, _) = train_rmm(config, source, TrainMode::OneLevel)?;
                let report = evaluate_policy_one_level(
                    &state.params,
                    target,
                    &config.classifier,
                    eval_seeds,
                    eval_seed,
                )?;
                AblationRow {
                    mode,
                    average: report.mean_average,
                    last: report.mean_last,
                    best_fraction: None,
                    report,
                }
            }
            AblationMode::TwoLevel => {
                let (state, _) = train_rmm(config, source, TrainMode::TwoLevel)?;
                let report = evaluate_policy(
                    &state.params,
                    target,
                    &config.classifier,
                    eval_seeds,
                    eval_seed,
                )?;
                AblationRow {
                    mode,
                    average: report.mean_average,
                    last: report.mean_last,
                    best_fraction: None,
                    report,
                }
            }
            AblationMode::Transferred => {
                let foreign = transfer_source.ok_or_else(|| {
                    Error::validation("transferred mode needs a transfer dataset")
                })?;
                let (state, _) = train_rmm(config, foreign, TrainMode::TwoLevel)?;
                let report = evaluate_policy(
                    &state.params,
                    target,
                    &config.classifier,
                    eval_seeds,
                    eval_seed,
                )?;
                AblationRow {
                    mode,
                    average: report.mean_average,
                    last: report.mean_last,
                    best_fraction: None,
                    report,
                }
            }
        };
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::memory::tenths;
    use crate::taskgen::{make_synthetic_dataset, make_target_task};
    use approx::assert_relative_eq;

    fn quick_config(epochs: usize, k: usize, z: usize) -> TrainConfig {
        TrainConfig {
            seed: 5,
            epochs,
            tasks_per_epoch: k,
            runs_per_task: z,
            num_phases: 2,
            total_budget: 120,
            classifier: ClassifierConfig {
                epochs: 4,
                finetune_epochs: 2,
                ..ClassifierConfig::default()
            },
            ..TrainConfig::default()
        }
    }

    fn quick_source() -> DatasetSource<f64> {
        make_synthetic_dataset(8, 3, 16, 4.0, 2).unwrap()
    }

    #[test]
    fn single_episode_epoch_structure() {
        let config = quick_config(1, 1, 1);
        let source = quick_source();
        let (state, logs) = train_rmm(&config, &source, TrainMode::TwoLevel).unwrap();
        assert_eq!(logs.len(), 1);
        assert_eq!(logs[0].episodes, 1);
        assert_eq!(state.epochs_done, 1);
        assert_eq!(state.adam.step, 1);
        assert!(state.baseline.initialized);
    }

    #[test]
    fn episode_count_is_z_times_k() {
        let config = quick_config(1, 2, 3);
        let source = quick_source();
        let (_, logs) = train_rmm(&config, &source, TrainMode::TwoLevel).unwrap();
        assert_eq!(logs[0].episodes, 6);
        let level1_draws: u64 = logs[0].level1_initial_counts.iter().sum::<u64>()
            + logs[0].level1_delta_counts.iter().sum::<u64>();
        // 6 episodes x 2 incremental phases.
        assert_eq!(level1_draws, 12);
        assert_eq!(logs[0].level2_counts.iter().sum::<u64>(), 12);
    }

    #[test]
    fn one_level_mode_pins_level2_and_skips_its_gradient() {
        let config = quick_config(1, 1, 2);
        let source = quick_source();
        let (state, logs) = train_rmm(&config, &source, TrainMode::OneLevel).unwrap();
        assert_eq!(logs[0].level2_counts.iter().sum::<u64>(), 0);
        // Level-2 network never received a gradient: adam moments stay zero
        // and the parameters equal their initialization.
        let init = PolicyParams::<f64>::init(config.policy.hidden, config.seed);
        assert_eq!(state.params.level2_head, init.level2_head);
        assert_eq!(state.params.level2_trunk, init.level2_trunk);
        assert_ne!(state.params.level1_trunk, init.level1_trunk);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let source = quick_source();
        let mut config = quick_config(2, 2, 2);
        config.workers = Some(1);
        let (serial, _) = train_rmm(&config, &source, TrainMode::TwoLevel).unwrap();
        config.workers = Some(4);
        let (parallel, _) = train_rmm(&config, &source, TrainMode::TwoLevel).unwrap();
        assert_eq!(serial.params, parallel.params);
        assert_eq!(serial.baseline, parallel.baseline);
    }

    #[test]
    fn resume_continues_epoch_numbering() {
        let source = quick_source();
        let config = quick_config(3, 1, 1);
        let mut trainer = Trainer::new(&config, &source, TrainMode::TwoLevel).unwrap();
        let first = trainer.run_epoch().unwrap();
        assert_eq!(first.epoch, 1);
        let state = trainer.state.clone();
        let mut resumed = Trainer::resume(&config, &source, TrainMode::TwoLevel, state).unwrap();
        let second = resumed.run_epoch().unwrap();
        assert_eq!(second.epoch, 2);
        // Matches an uninterrupted run bit for bit.
        let mut straight = Trainer::new(&config, &source, TrainMode::TwoLevel).unwrap();
        straight.run_epoch().unwrap();
        let straight_second = straight.run_epoch().unwrap();
        assert_eq!(straight.state.params, resumed.state.params);
        assert_eq!(straight_second.mean_return, second.mean_return);
    }

    #[test]
    fn evaluation_report_is_definitional_and_deterministic() {
        let source = quick_source();
        let target = make_target_task(&source, 2, 120, 1).unwrap();
        let params = PolicyParams::<f64>::init(16, 3);
        let cfg = ClassifierConfig { epochs: 4, finetune_epochs: 2, ..Default::default() };
        let a = evaluate_policy(&params, &target, &cfg, 2, 9).unwrap();
        let b = evaluate_policy(&params, &target, &cfg, 2, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.seeds.len(), 2);
        for seed in &a.seeds {
            assert_eq!(seed.per_phase.len(), target.num_phases() + 1);
            let mean = seed.per_phase.iter().sum::<f64>() / seed.per_phase.len() as f64;
            assert_relative_eq!(seed.average, mean);
            assert_relative_eq!(seed.last, *seed.per_phase.last().unwrap());
        }
    }

    #[test]
    fn fixed_baseline_reproduces_reference_split() {
        // fraction 2000/7000 on a 7000 budget puts exactly 2000 into
        // exemplar memory at phase 1.
        let source = make_synthetic_dataset::<f64>(8, 2, 30, 4.0, 7).unwrap();
        let target = make_target_task(&source, 2, 7000, 2).unwrap();
        let cfg = ClassifierConfig { epochs: 2, finetune_epochs: 1, ..Default::default() };
        let report =
            run_fixed_baseline(&target, Frac::new(2000, 7000), &cfg, 1, 0).unwrap();
        let phase1 = &report.seeds[0].allocation[1];
        assert_eq!(phase1.old_budget, Some(2000));
        assert_eq!(phase1.new_budget, Some(5000));
        assert!(run_fixed_baseline(&target, Frac::new(0, 1), &cfg, 1, 0).is_err());
    }

    #[test]
    fn fixed_half_splits_groups_evenly() {
        let source = quick_source();
        let target = make_target_task(&source, 2, 120, 3).unwrap();
        let cfg = ClassifierConfig { epochs: 3, finetune_epochs: 2, ..Default::default() };
        let policy = EpisodePolicy::<f64>::fixed(Frac::new(1, 2), Frac::new(1, 2));
        let trajectory = run_episode(&target, &policy, &cfg, 1).unwrap();
        // With a 0.5 level-2 ratio, the two group budgets differ by at most one.
        let mut phases_seen = 0;
        for record in &trajectory.records {
            for alloc in &record.allocation.phase_allocations {
                let a = alloc.group_a_budget as i64;
                let b = alloc.group_b_budget as i64;
                assert!((a - b).abs() <= 1, "groups {a} vs {b}");
                phases_seen += 1;
            }
        }
        assert!(phases_seen > 0);
    }

    #[test]
    fn frozen_level2_head_makes_modes_identical() {
        let source = quick_source();
        let target = make_target_task(&source, 2, 120, 4).unwrap();
        let cfg = ClassifierConfig { epochs: 3, finetune_epochs: 2, ..Default::default() };
        let mut params = PolicyParams::<f64>::init(8, 6);
        params.level2_trunk = crate::policy::Dense::zeros(3, 8);
        params.level2_head = crate::policy::Dense::zeros(8, 9);
        params.level2_head.b = vec![-60.0; 9];
        params.level2_head.b[4] = 60.0; // saturated at the 0.5 bin
        let two = evaluate_policy(&params, &target, &cfg, 3, 2).unwrap();
        let one = evaluate_policy_one_level(&params, &target, &cfg, 3, 2).unwrap();
        assert_eq!(two.mean_average, one.mean_average);
        assert_eq!(
            two.seeds.iter().map(|s| &s.per_phase).collect::<Vec<_>>(),
            one.seeds.iter().map(|s| &s.per_phase).collect::<Vec<_>>()
        );
    }

    #[test]
    fn sweep_reports_all_fractions_best_first() {
        let source = quick_source();
        let target = make_target_task(&source, 2, 120, 5).unwrap();
        let cfg = ClassifierConfig { epochs: 2, finetune_epochs: 0, ..Default::default() };
        let sweep = sweep_fixed_baseline(&target, &cfg, 1, 3).unwrap();
        assert_eq!(sweep.len(), 9);
        let mut fractions: Vec<Frac> = sweep.iter().map(|(f, _)| *f).collect();
        fractions.sort();
        assert_eq!(fractions, (1..=9).map(tenths).collect::<Vec<_>>());
        for pair in sweep.windows(2) {
            assert!(pair[0].1.mean_average >= pair[1].1.mean_average);
        }
    }

    #[test]
    fn ablation_rows_match_requested_modes() {
        let source = quick_source();
        let target = make_target_task(&source, 2, 120, 6).unwrap();
        let config = quick_config(1, 1, 1);
        let rows = run_ablation(
            &config,
            &source,
            &target,
            &[AblationMode::Fixed, AblationMode::OneLevel, AblationMode::TwoLevel],
            None,
            1,
            4,
        )
        .unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].mode, AblationMode::Fixed);
        assert!(rows[0].best_fraction.is_some());
        assert!(rows[1].best_fraction.is_none());
        let err = run_ablation(
            &config,
            &source,
            &target,
            &[AblationMode::Transferred],
            None,
            1,
            4,
        );
        assert!(err.is_err(), "transferred mode without a source is an error");
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("two_level".parse::<AblationMode>().unwrap(), AblationMode::TwoLevel);
        assert!("bogus".parse::<AblationMode>().is_err());
    }
}
