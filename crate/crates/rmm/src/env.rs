//! The class-incremental environment: the phase loop one episode walks
//! through. Phase 0 trains on the full initial pool; every later phase takes
//! a level-1 action (exemplar/new-data split), a level-2 action (per-group
//! exemplar ratio), re-herds the exemplar store down to the allocated counts,
//! loads new data under the remaining budget, trains, fine-tunes on a
//! balanced exemplar set, and scores validation accuracy as the reward.
//!
//! Memory is irreversible: whatever a phase does not retain is gone, so a
//! class's retained set only ever shrinks after its first retention.

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::classifier::{
    herding_select, ClassId, ClassifierConfig, ClassifierState, LabeledSample, SampleId,
};
use crate::error::{Error, Result};
use crate::memory::{apply_level2, apportion, Frac, MemoryLedger, PhaseGroups};
use crate::policy::{
    greedy_level1, greedy_level2, sample_level1, sample_level2, ActionSample, HeadKind,
    PolicyParams, ScoredStep, State,
};
use crate::scalar::Real;
use crate::seeding::{self, tags};

/// An (N+1)-phase class-incremental task: the class order, per-phase class
/// counts, per-class training pools, held-out validation pools, and the fixed
/// memory budget.
#[derive(Debug, Clone, PartialEq)]
pub struct CilTaskSpec<F> {
    phase_class_counts: Vec<usize>,
    class_order: Vec<ClassId>,
    train_pools: BTreeMap<ClassId, Vec<LabeledSample<F>>>,
    val_pools: BTreeMap<ClassId, Vec<LabeledSample<F>>>,
    total_budget: usize,
    dim: usize,
}

impl<F: Real> CilTaskSpec<F> {
    pub fn new(
        phase_class_counts: Vec<usize>,
        class_order: Vec<ClassId>,
        train_pools: BTreeMap<ClassId, Vec<LabeledSample<F>>>,
        val_pools: BTreeMap<ClassId, Vec<LabeledSample<F>>>,
        total_budget: usize,
    ) -> Result<Self> {
        if phase_class_counts.len() < 2 {
            return Err(Error::validation("a task needs phase 0 plus at least one incremental phase"));
        }
        if phase_class_counts.iter().sum::<usize>() != class_order.len() {
            return Err(Error::validation("phase class counts must partition the class order"));
        }
        if total_budget == 0 {
            return Err(Error::validation("total budget must be positive"));
        }
        let mut dim = None;
        let mut val_ids = std::collections::BTreeSet::new();
        for &class in &class_order {
            let train = train_pools
                .get(&class)
                .ok_or_else(|| Error::validation(format!("class {class} has no training pool")))?;
            let val = val_pools
                .get(&class)
                .ok_or_else(|| Error::validation(format!("class {class} has no validation pool")))?;
            if train.is_empty() || val.is_empty() {
                return Err(Error::validation(format!("class {class} has an empty pool")));
            }
            for sample in train.iter().chain(val) {
                match dim {
                    None => dim = Some(sample.features.len()),
                    Some(d) if d != sample.features.len() => {
                        return Err(Error::validation("inconsistent feature dimensions"));
                    }
                    _ => {}
                }
            }
            val_ids.extend(val.iter().map(|s| s.sample_id));
        }
        for &class in &class_order {
            for sample in &train_pools[&class] {
                if val_ids.contains(&sample.sample_id) {
                    return Err(Error::validation(format!(
                        "sample {} appears in both training and validation pools",
                        sample.sample_id
                    )));
                }
            }
        }
        Ok(Self {
            dim: dim.expect("pools are non-empty"),
            phase_class_counts,
            class_order,
            train_pools,
            val_pools,
            total_budget,
        })
    }

    /// Number of incremental phases N (the task has N+1 phases in total).
    pub fn num_phases(&self) -> usize {
        self.phase_class_counts.len() - 1
    }

    pub fn phase_class_counts(&self) -> &[usize] {
        &self.phase_class_counts
    }

    pub fn class_order(&self) -> &[ClassId] {
        &self.class_order
    }

    pub fn total_budget(&self) -> usize {
        self.total_budget
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Classes introduced in phase `i`.
    pub fn phase_classes(&self, phase: usize) -> &[ClassId] {
        let start: usize = self.phase_class_counts[..phase].iter().sum();
        &self.class_order[start..start + self.phase_class_counts[phase]]
    }

    /// Classes seen in phases `0..=phase`.
    pub fn seen_through(&self, phase: usize) -> &[ClassId] {
        let end: usize = self.phase_class_counts[..=phase].iter().sum();
        &self.class_order[..end]
    }

    pub fn train_pool(&self, class: ClassId) -> &[LabeledSample<F>] {
        &self.train_pools[&class]
    }

    pub fn val_pool(&self, class: ClassId) -> &[LabeledSample<F>] {
        &self.val_pools[&class]
    }

    fn val_set_through(&self, phase: usize) -> Vec<LabeledSample<F>> {
        self.seen_through(phase)
            .iter()
            .flat_map(|&c| self.val_pools[&c].iter().cloned())
            .collect()
    }
}

/// Per-class retained exemplars, in herding preference order. Reduction is
/// truncation, so retained sets are always prefixes of the first retention.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExemplarStore {
    per_class: BTreeMap<ClassId, Vec<SampleId>>,
}

impl ExemplarStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// First retention of a class: the herded id list, best first.
    pub fn retain_initial(&mut self, class: ClassId, ids: Vec<SampleId>) -> Result<()> {
        if self.per_class.contains_key(&class) {
            return Err(Error::contract(format!(
                "class {class} already has a retained set"
            )));
        }
        self.per_class.insert(class, ids);
        Ok(())
    }

    /// Shrinks a class's retained set to `count`; growing is impossible since
    /// discarded data cannot come back.
    pub fn reduce(&mut self, class: ClassId, count: usize) -> Result<()> {
        let ids = self
            .per_class
            .get_mut(&class)
            .ok_or_else(|| Error::contract(format!("class {class} was never retained")))?;
        if count > ids.len() {
            return Err(Error::contract(format!(
                "cannot grow class {class} from {} to {count} exemplars",
                ids.len()
            )));
        }
        ids.truncate(count);
        Ok(())
    }

    pub fn retained(&self, class: ClassId) -> Option<&[SampleId]> {
        self.per_class.get(&class).map(|v| v.as_slice())
    }

    pub fn counts(&self) -> BTreeMap<ClassId, usize> {
        self.per_class.iter().map(|(&c, v)| (c, v.len())).collect()
    }

    pub fn classes(&self) -> impl Iterator<Item = ClassId> + '_ {
        self.per_class.keys().copied()
    }
}

/// What one phase did to memory: budgets, retained exemplars, and loaded new
/// data, with sample ids kept for auditing.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationSnapshot {
    pub old_budget: usize,
    pub new_budget: usize,
    pub exemplars_per_class: BTreeMap<ClassId, usize>,
    pub loaded_per_class: BTreeMap<ClassId, usize>,
    pub exemplar_ids: BTreeMap<ClassId, Vec<SampleId>>,
    pub loaded_ids: BTreeMap<ClassId, Vec<SampleId>>,
    /// Per-old-phase group allocations behind the counts above.
    pub phase_allocations: Vec<crate::memory::PhaseAllocation>,
}

/// A policy head draw recorded for gradient recomputation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordedAction<F> {
    pub head: HeadKind,
    pub sample: ActionSample<F>,
}

/// One incremental phase of an episode.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRecord<F> {
    pub phase: usize,
    pub state: State<F>,
    /// Policy draw behind the level-1 action; absent for fixed schedules.
    pub level1: Option<RecordedAction<F>>,
    /// Policy draw behind the level-2 action; absent when pinned.
    pub level2: Option<RecordedAction<F>>,
    pub level1_fraction: Frac,
    pub level2_fraction: Frac,
    pub allocation: AllocationSnapshot,
    pub reward: F,
}

/// A full episode: the initial phase's reward plus every incremental phase.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<F> {
    pub initial_reward: F,
    pub records: Vec<PhaseRecord<F>>,
    pub total_return: F,
}

impl<F: Real> Trajectory<F> {
    /// Gradient-bearing steps in phase order, level 1 before level 2.
    pub fn scored_steps(&self) -> Vec<ScoredStep<F>> {
        let mut steps = Vec::new();
        for record in &self.records {
            if let Some(level1) = &record.level1 {
                steps.push(ScoredStep {
                    state: record.state,
                    head: level1.head,
                    bin_index: level1.sample.bin_index,
                    level1_value: None,
                });
                if let Some(level2) = &record.level2 {
                    steps.push(ScoredStep {
                        state: record.state,
                        head: HeadKind::Level2,
                        bin_index: level2.sample.bin_index,
                        level1_value: Some(level1.sample.value),
                    });
                }
            }
        }
        steps
    }

    /// Line-delimited export records, one per phase including phase 0.
    pub fn export_records(&self) -> Vec<PhaseExportRecord> {
        let mut out = vec![PhaseExportRecord {
            phase: 0,
            new_class_ratio: None,
            old_memory_ratio: None,
            level1: None,
            level2: None,
            old_budget: None,
            new_budget: None,
            exemplars_per_class: BTreeMap::new(),
            loaded_per_class: BTreeMap::new(),
            reward: self.initial_reward.as_f64(),
        }];
        for r in &self.records {
            out.push(PhaseExportRecord {
                phase: r.phase,
                new_class_ratio: Some(r.state.new_class_ratio.as_f64()),
                old_memory_ratio: Some(r.state.old_memory_ratio.as_f64()),
                level1: Some(frac_f64(r.level1_fraction)),
                level2: Some(frac_f64(r.level2_fraction)),
                old_budget: Some(r.allocation.old_budget),
                new_budget: Some(r.allocation.new_budget),
                exemplars_per_class: r
                    .allocation
                    .exemplars_per_class
                    .iter()
                    .map(|(c, &n)| (c.0, n))
                    .collect(),
                loaded_per_class: r
                    .allocation
                    .loaded_per_class
                    .iter()
                    .map(|(c, &n)| (c.0, n))
                    .collect(),
                reward: r.reward.as_f64(),
            });
        }
        out
    }
}

fn frac_f64(f: Frac) -> f64 {
    *f.numer() as f64 / *f.denom() as f64
}

/// JSON-facing record behind the per-phase trajectory export.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseExportRecord {
    pub phase: usize,
    pub new_class_ratio: Option<f64>,
    pub old_memory_ratio: Option<f64>,
    pub level1: Option<f64>,
    pub level2: Option<f64>,
    pub old_budget: Option<usize>,
    pub new_budget: Option<usize>,
    pub exemplars_per_class: BTreeMap<u32, usize>,
    pub loaded_per_class: BTreeMap<u32, usize>,
    pub reward: f64,
}

/// Where level-1 actions come from during an episode.
#[derive(Debug, Clone, Copy)]
pub enum Level1Source<'a, F> {
    Stochastic(&'a PolicyParams<F>),
    Greedy(&'a PolicyParams<F>),
    /// A fixed initial split; every later phase applies a zero delta.
    Fixed(Frac),
    /// A pinned per-phase schedule: the initial split followed by deltas.
    Schedule(&'a [Frac]),
}

/// Where level-2 actions come from during an episode.
#[derive(Debug, Clone, Copy)]
pub enum Level2Source<'a, F> {
    Stochastic(&'a PolicyParams<F>),
    Greedy(&'a PolicyParams<F>),
    /// Pinned ratio; contributes nothing to gradients.
    Pinned(Frac),
}

/// Action sources for one episode.
#[derive(Debug, Clone, Copy)]
pub struct EpisodePolicy<'a, F> {
    pub level1: Level1Source<'a, F>,
    pub level2: Level2Source<'a, F>,
}

impl<'a, F: Real> EpisodePolicy<'a, F> {
    pub fn stochastic(params: &'a PolicyParams<F>) -> Self {
        Self {
            level1: Level1Source::Stochastic(params),
            level2: Level2Source::Stochastic(params),
        }
    }

    pub fn greedy(params: &'a PolicyParams<F>) -> Self {
        Self {
            level1: Level1Source::Greedy(params),
            level2: Level2Source::Greedy(params),
        }
    }

    /// Stochastic level 1 with the level-2 ratio pinned (one-level ablation).
    pub fn one_level_stochastic(params: &'a PolicyParams<F>, pinned: Frac) -> Self {
        Self {
            level1: Level1Source::Stochastic(params),
            level2: Level2Source::Pinned(pinned),
        }
    }

    pub fn one_level_greedy(params: &'a PolicyParams<F>, pinned: Frac) -> Self {
        Self {
            level1: Level1Source::Greedy(params),
            level2: Level2Source::Pinned(pinned),
        }
    }

    /// Fully fixed allocation schedule: constant split, even groups.
    pub fn fixed(initial_split: Frac, level2: Frac) -> Self {
        Self {
            level1: Level1Source::Fixed(initial_split),
            level2: Level2Source::Pinned(level2),
        }
    }
}

/// The state the policy observes at phase `i >= 1`: the ratio of incoming
/// classes to classes seen so far, and the cumulative exemplar fraction
/// (zero at phase 1).
pub fn compute_state<F: Real>(
    task: &CilTaskSpec<F>,
    phase: usize,
    cumulative_level1: Frac,
) -> Result<State<F>> {
    if phase == 0 {
        return Err(Error::contract("phase 0 takes no action and has no state"));
    }
    if phase > task.num_phases() {
        return Err(Error::contract(format!(
            "phase {phase} out of range 1..={}",
            task.num_phases()
        )));
    }
    let seen: usize = task.phase_class_counts()[..phase].iter().sum();
    let incoming = task.phase_class_counts()[phase];
    State::new(
        F::of(incoming as f64) / F::of(seen as f64),
        F::of(frac_f64(cumulative_level1)),
    )
}

/// Splits a phase's classes into the high-entropy group A (top half, rounded
/// up) and low-entropy group B, by mean predictive entropy under `model` on
/// that phase's resident data. Entropy ties break by ascending class id.
pub fn split_entropy_groups<F: Real>(
    model: &ClassifierState<F>,
    phase_classes: &[ClassId],
    phase_data: &BTreeMap<ClassId, Vec<LabeledSample<F>>>,
) -> Result<(Vec<ClassId>, Vec<ClassId>)> {
    let mut scored = Vec::with_capacity(phase_classes.len());
    for &class in phase_classes {
        let samples = phase_data
            .get(&class)
            .ok_or_else(|| Error::validation(format!("no resident data for class {class}")))?;
        // A class that loaded nothing ranks as trivially easy (entropy 0).
        scored.push((class, model.class_entropy(samples)));
    }
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });
    let take = scored.len().div_ceil(2);
    let group_a: Vec<ClassId> = scored[..take].iter().map(|&(c, _)| c).collect();
    let group_b: Vec<ClassId> = scored[take..].iter().map(|&(c, _)| c).collect();
    Ok((group_a, group_b))
}

/// Loads new data for a phase: even per-class quotas over the new classes,
/// sampled uniformly without replacement from each class's pool; anything not
/// loaded is gone for good.
pub fn load_new_data<F: Real>(
    task: &CilTaskSpec<F>,
    classes: &[ClassId],
    new_budget: usize,
    rng: &mut ChaCha8Rng,
) -> Result<BTreeMap<ClassId, Vec<LabeledSample<F>>>> {
    let quotas = apportion(new_budget, &vec![Frac::from_integer(1); classes.len()])?;
    let mut loaded = BTreeMap::new();
    for (&class, &quota) in classes.iter().zip(&quotas) {
        let pool = task.train_pool(class);
        let take = quota.min(pool.len());
        let mut idx: Vec<usize> = rand::seq::index::sample(rng, pool.len(), take).into_vec();
        idx.sort_unstable();
        let samples: Vec<LabeledSample<F>> = idx.into_iter().map(|i| pool[i].clone()).collect();
        loaded.insert(class, samples);
    }
    Ok(loaded)
}

fn lookup_exemplars<F: Real>(
    task: &CilTaskSpec<F>,
    store: &ExemplarStore,
) -> Vec<LabeledSample<F>> {
    let mut out = Vec::new();
    for class in store.classes() {
        let pool = task.train_pool(class);
        for &id in store.retained(class).expect("class listed by store") {
            let sample = pool
                .iter()
                .find(|s| s.sample_id == id)
                .expect("retained ids come from the pool");
            out.push(sample.clone());
        }
    }
    out
}

/// Runs one full episode and returns its trajectory. Episodes are atomic:
/// any constituent failure aborts the whole run.
pub fn run_episode<F: Real>(
    task: &CilTaskSpec<F>,
    policy: &EpisodePolicy<'_, F>,
    classifier: &ClassifierConfig,
    seed: u64,
) -> Result<Trajectory<F>> {
    classifier.validate()?;
    let mut rng_level1 = seeding::stream(seed, &[tags::LEVEL1]);
    let mut rng_level2 = seeding::stream(seed, &[tags::LEVEL2]);
    let mut rng_data = seeding::stream(seed, &[tags::DATA]);

    // Phase 0: train on the full initial pool; the budget binds from phase 1.
    let phase0_classes = task.phase_classes(0).to_vec();
    let mut resident_new: BTreeMap<ClassId, Vec<LabeledSample<F>>> = phase0_classes
        .iter()
        .map(|&c| (c, task.train_pool(c).to_vec()))
        .collect();
    let phase0_data: Vec<LabeledSample<F>> =
        resident_new.values().flatten().cloned().collect();
    let mut model = ClassifierState::<F>::new(task.dim()).train_phase(
        &phase0_data,
        &phase0_classes,
        classifier,
        seeding::derive_seed(seed, &[tags::CLASSIFIER, 0, 0]),
    )?;
    let initial_reward = model.evaluate(&task.val_set_through(0));

    let (group_a, group_b) = split_entropy_groups(&model, &phase0_classes, &resident_new)?;
    let mut old_groups = vec![PhaseGroups {
        phase_index: 0,
        group_a,
        group_b,
        recorded_level2: None,
    }];

    let mut ledger = MemoryLedger::new(task.total_budget());
    let mut store = ExemplarStore::new();
    let mut records = Vec::with_capacity(task.num_phases());
    let mut total_return = initial_reward;

    for phase in 1..=task.num_phases() {
        let state = compute_state(task, phase, ledger.cumulative_level1())?;

        let (level1_fraction, level1_record) = match policy.level1 {
            Level1Source::Stochastic(params) => {
                let (head, sample) = sample_level1(
                    params,
                    &state,
                    phase,
                    ledger.cumulative_level1(),
                    &mut rng_level1,
                )?;
                (head.bin_fraction(sample.bin_index), Some(RecordedAction { head, sample }))
            }
            Level1Source::Greedy(params) => {
                let (head, sample) =
                    greedy_level1(params, &state, phase, ledger.cumulative_level1())?;
                (head.bin_fraction(sample.bin_index), Some(RecordedAction { head, sample }))
            }
            Level1Source::Fixed(split) => {
                let frac = if phase == 1 { split } else { Frac::from_integer(0) };
                (frac, None)
            }
            Level1Source::Schedule(values) => {
                let frac = *values.get(phase - 1).ok_or_else(|| {
                    Error::contract(format!("schedule too short for phase {phase}"))
                })?;
                (frac, None)
            }
        };
        ledger.apply_level1(level1_fraction, phase)?;

        let level1_value = level1_record
            .as_ref()
            .map(|r| r.sample.value)
            .unwrap_or_else(|| F::of(frac_f64(level1_fraction)));
        let (level2_fraction, level2_record) = match policy.level2 {
            Level2Source::Stochastic(params) => {
                let sample = sample_level2(params, &state, level1_value, &mut rng_level2);
                (
                    crate::policy::level2_bin_fraction(sample.bin_index),
                    Some(RecordedAction { head: HeadKind::Level2, sample }),
                )
            }
            Level2Source::Greedy(params) => {
                let sample = greedy_level2(params, &state, level1_value);
                (
                    crate::policy::level2_bin_fraction(sample.bin_index),
                    Some(RecordedAction { head: HeadKind::Level2, sample }),
                )
            }
            Level2Source::Pinned(frac) => (frac, None),
        };

        // Caps: previously retained counts for settled classes, the resident
        // pool for classes retained for the first time this phase.
        let mut caps = store.counts();
        for (&class, samples) in &resident_new {
            caps.insert(class, samples.len());
        }
        let allocations =
            apply_level2(ledger.old_budget(), &old_groups, level2_fraction, &caps)?;
        if let Some(newest) = old_groups.last_mut() {
            if newest.recorded_level2.is_none() {
                newest.recorded_level2 = Some(level2_fraction);
            }
        }

        for allocation in &allocations {
            for (&class, &target) in &allocation.per_class_counts {
                if store.retained(class).is_some() {
                    store.reduce(class, target)?;
                } else {
                    let pool = resident_new
                        .get(&class)
                        .ok_or_else(|| Error::internal(format!("class {class} has no resident pool")))?;
                    let ids = if target == 0 {
                        Vec::new()
                    } else {
                        let features: Vec<Vec<F>> =
                            pool.iter().map(|s| s.features.clone()).collect();
                        herding_select(&features, target)?
                            .into_iter()
                            .map(|i| pool[i].sample_id)
                            .collect()
                    };
                    store.retain_initial(class, ids)?;
                }
            }
        }
        ledger.set_phase_allocations(allocations);

        // Free the previous phase's residual data and load the new phase.
        resident_new.clear();
        let new_classes = task.phase_classes(phase).to_vec();
        let loaded = load_new_data(task, &new_classes, ledger.new_budget(), &mut rng_data)?;

        let exemplars = lookup_exemplars(task, &store);
        let mut train_set = exemplars.clone();
        train_set.extend(loaded.values().flatten().cloned());
        model = model.train_phase(
            &train_set,
            &new_classes,
            classifier,
            seeding::derive_seed(seed, &[tags::CLASSIFIER, phase as u64, 0]),
        )?;

        // Balanced fine-tune set: the retained exemplars plus, per new class,
        // a herded subset matching the average old-class exemplar count.
        let old_class_count: usize = old_groups.iter().map(|g| g.class_count()).sum();
        let per_new = if old_class_count > 0 {
            crate::memory::round_half_up(Frac::new(
                ledger.old_budget() as i64,
                old_class_count as i64,
            ))
            .max(0) as usize
        } else {
            0
        };
        let mut balanced = exemplars;
        for (_, pool) in loaded.iter() {
            let take = per_new.min(pool.len());
            if take > 0 {
                let features: Vec<Vec<F>> = pool.iter().map(|s| s.features.clone()).collect();
                for idx in herding_select(&features, take)? {
                    balanced.push(pool[idx].clone());
                }
            }
        }
        let seen = task.seen_through(phase);
        let covers_all_seen = seen
            .iter()
            .all(|&c| balanced.iter().any(|s| s.class_id == c));
        if covers_all_seen && classifier.finetune_epochs > 0 {
            model = model.finetune_exemplars(
                &balanced,
                classifier.finetune_epochs,
                classifier,
                seeding::derive_seed(seed, &[tags::CLASSIFIER, phase as u64, 1]),
            )?;
        }

        let reward = model.evaluate(&task.val_set_through(phase));
        total_return += reward;

        let (group_a, group_b) = split_entropy_groups(&model, &new_classes, &loaded)?;
        old_groups.push(PhaseGroups {
            phase_index: phase,
            group_a,
            group_b,
            recorded_level2: None,
        });

        let allocation = AllocationSnapshot {
            old_budget: ledger.old_budget(),
            new_budget: ledger.new_budget(),
            exemplars_per_class: store.counts(),
            loaded_per_class: loaded.iter().map(|(&c, v)| (c, v.len())).collect(),
            exemplar_ids: store
                .classes()
                .map(|c| (c, store.retained(c).unwrap().to_vec()))
                .collect(),
            loaded_ids: loaded
                .iter()
                .map(|(&c, v)| (c, v.iter().map(|s| s.sample_id).collect()))
                .collect(),
            phase_allocations: ledger.phase_allocations().to_vec(),
        };
        records.push(PhaseRecord {
            phase,
            state,
            level1: level1_record,
            level2: level2_record,
            level1_fraction,
            level2_fraction,
            allocation,
            reward,
        });

        resident_new = loaded;
    }

    Ok(Trajectory { initial_reward, records, total_return })
}
