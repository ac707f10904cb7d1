//! Exact integer accounting of the fixed memory budget.
//!
//! All fraction-to-count conversions go through exact rational arithmetic
//! ([`Frac`]) with a single terminal rounding, so budgets are conserved
//! bit-for-bit: the level-1 split always satisfies
//! `old_budget + new_budget == total_budget`, and level-2 per-class counts
//! partition the exemplar budget via largest-remainder apportionment.

use std::collections::BTreeMap;

use num_rational::Ratio;
use num_traits::{Signed, Zero};

use crate::classifier::ClassId;
use crate::error::{Error, Result};

/// Exact rational used for every budget fraction.
pub type Frac = Ratio<i64>;

/// Convenience constructor for tenths, the policy's action grid.
pub fn tenths(n: i64) -> Frac {
    Frac::new(n, 10)
}

/// Round half up to the nearest integer. `round_half_up(5/2) == 3`,
/// `round_half_up(-1/2) == 0`.
pub fn round_half_up(x: Frac) -> i64 {
    (x + Frac::new(1, 2)).floor().to_integer()
}

/// Largest-remainder apportionment of `total` units over `weights`.
///
/// Outputs sum exactly to `total`; each entry is within one unit of its exact
/// proportional share; remainder units go to the largest fractional parts,
/// ties to the lowest index.
pub fn apportion(total: usize, weights: &[Frac]) -> Result<Vec<usize>> {
    if weights.is_empty() || weights.iter().all(|w| w.is_zero()) {
        return Err(Error::validation("apportion requires a positive weight"));
    }
    if weights.iter().any(|w| w.is_negative()) {
        return Err(Error::validation("apportion weights must be non-negative"));
    }
    let weight_sum: Frac = weights.iter().sum();
    let total_frac = Frac::from_integer(total as i64);
    let mut floors = Vec::with_capacity(weights.len());
    let mut remainders = Vec::with_capacity(weights.len());
    let mut assigned: i64 = 0;
    for w in weights {
        let share = total_frac * w / weight_sum;
        let floor = share.floor().to_integer();
        assigned += floor;
        floors.push(floor);
        remainders.push(share - share.floor());
    }
    let mut leftover = total as i64 - assigned;
    debug_assert!(leftover >= 0 && (leftover as usize) <= weights.len());
    // Largest fractional part first, lowest index on ties.
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| remainders[b].cmp(&remainders[a]).then(a.cmp(&b)));
    for idx in order {
        if leftover == 0 {
            break;
        }
        floors[idx] += 1;
        leftover -= 1;
    }
    Ok(floors.into_iter().map(|c| c as usize).collect())
}

/// History of level-1 and level-2 actions taken over an episode, with the
/// discretization constraints enforced at construction.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActionHistory {
    level1_values: Vec<Frac>,
    level2_values: Vec<Frac>,
}

impl ActionHistory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a level-1 action. The first action must lie on the
    /// `{0.1, ..., 0.9}` grid; later actions on `{-0.1, 0, +0.1}`.
    pub fn push_level1(&mut self, value: Frac) -> Result<()> {
        if self.level1_values.is_empty() {
            if !(1..=9).contains(&grid_position(value).unwrap_or(-1)) {
                return Err(Error::validation(format!(
                    "initial level-1 action {value} not in {{0.1,...,0.9}}"
                )));
            }
        } else if !matches!(grid_position(value), Some(-1) | Some(0) | Some(1)) {
            return Err(Error::validation(format!(
                "level-1 delta {value} not in {{-0.1, 0, +0.1}}"
            )));
        }
        self.level1_values.push(value);
        Ok(())
    }

    /// Records a level-2 action on the `{0.1, ..., 0.9}` grid.
    pub fn push_level2(&mut self, value: Frac) -> Result<()> {
        if !(1..=9).contains(&grid_position(value).unwrap_or(-1)) {
            return Err(Error::validation(format!(
                "level-2 action {value} not in {{0.1,...,0.9}}"
            )));
        }
        self.level2_values.push(value);
        Ok(())
    }

    pub fn level1_values(&self) -> &[Frac] {
        &self.level1_values
    }

    pub fn level2_values(&self) -> &[Frac] {
        &self.level2_values
    }

    /// Exact cumulative level-1 sum.
    pub fn cumulative_level1(&self) -> Frac {
        self.level1_values.iter().sum()
    }
}

/// Position on the 0.1 grid if the value is an exact multiple of 1/10.
fn grid_position(value: Frac) -> Option<i64> {
    let scaled = value * Frac::from_integer(10);
    scaled.is_integer().then(|| scaled.to_integer())
}

/// True iff appending `candidate` to a history with cumulative sum
/// `cumulative` keeps the exemplar fraction inside `(0, 1]`. This is the
/// predicate the policy's rejection-sampling loop consults.
pub fn is_feasible_level1(cumulative: Frac, candidate: Frac) -> bool {
    let next = cumulative + candidate;
    next > Frac::zero() && next <= Frac::from_integer(1)
}

/// Per-phase exemplar allocation: the two entropy groups, the level-2 ratio
/// used for this phase, group budgets, and per-class counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseAllocation {
    pub phase_index: usize,
    pub class_count: usize,
    pub group_a_classes: Vec<ClassId>,
    pub group_b_classes: Vec<ClassId>,
    pub recorded_level2: Frac,
    pub group_a_budget: usize,
    pub group_b_budget: usize,
    pub per_class_counts: BTreeMap<ClassId, usize>,
}

impl PhaseAllocation {
    /// This phase's exemplar share before per-class caps.
    pub fn phase_share(&self) -> usize {
        self.group_a_budget + self.group_b_budget
    }

    /// Sum of per-class counts actually allocated (after caps).
    pub fn allocated(&self) -> usize {
        self.per_class_counts.values().sum()
    }
}

/// Entropy grouping of one past phase's classes, plus the level-2 ratio
/// frozen the first time that phase's data became old. `recorded_level2`
/// is `None` only for the most recent phase on its first allocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseGroups {
    pub phase_index: usize,
    pub group_a: Vec<ClassId>,
    pub group_b: Vec<ClassId>,
    pub recorded_level2: Option<Frac>,
}

impl PhaseGroups {
    pub fn class_count(&self) -> usize {
        self.group_a.len() + self.group_b.len()
    }
}

/// Ledger of the fixed total budget and its current split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryLedger {
    total_budget: usize,
    old_budget: usize,
    new_budget: usize,
    cumulative_level1: Frac,
    phase_allocations: Vec<PhaseAllocation>,
}

impl MemoryLedger {
    /// Fresh ledger before any level-1 action: the whole budget is available
    /// for new data and the cumulative exemplar fraction is zero.
    pub fn new(total_budget: usize) -> Self {
        Self {
            total_budget,
            old_budget: 0,
            new_budget: total_budget,
            cumulative_level1: Frac::zero(),
            phase_allocations: Vec::new(),
        }
    }

    pub fn total_budget(&self) -> usize {
        self.total_budget
    }

    pub fn old_budget(&self) -> usize {
        self.old_budget
    }

    pub fn new_budget(&self) -> usize {
        self.new_budget
    }

    pub fn cumulative_level1(&self) -> Frac {
        self.cumulative_level1
    }

    pub fn phase_allocations(&self) -> &[PhaseAllocation] {
        &self.phase_allocations
    }

    /// Applies a level-1 action for `phase_index >= 1`: adds it to the
    /// cumulative fraction and recomputes both budgets from the cumulative
    /// value with one terminal half-up rounding.
    ///
    /// Phase 1 accepts any exact fraction in `(0, 1)` (fixed baselines pass
    /// arbitrary splits); later phases require a delta in `{-0.1, 0, +0.1}`.
    pub fn apply_level1(&mut self, action: Frac, phase_index: usize) -> Result<()> {
        if phase_index == 0 {
            return Err(Error::contract("level-1 actions start at phase 1"));
        }
        if phase_index == 1 {
            if action <= Frac::zero() || action >= Frac::from_integer(1) {
                return Err(Error::validation(format!(
                    "initial level-1 action {action} not in (0, 1)"
                )));
            }
        } else if !matches!(grid_position(action), Some(-1) | Some(0) | Some(1)) {
            return Err(Error::validation(format!(
                "level-1 delta {action} not in {{-0.1, 0, +0.1}}"
            )));
        }
        let next = self.cumulative_level1 + action;
        if !(next > Frac::zero() && next <= Frac::from_integer(1)) {
            return Err(Error::contract(format!(
                "cumulative level-1 value {next} outside (0, 1]"
            )));
        }
        self.cumulative_level1 = next;
        let old = round_half_up(next * Frac::from_integer(self.total_budget as i64));
        debug_assert!(old >= 0 && old as usize <= self.total_budget);
        self.old_budget = old as usize;
        self.new_budget = self.total_budget - self.old_budget;
        Ok(())
    }

    pub fn set_phase_allocations(&mut self, allocations: Vec<PhaseAllocation>) {
        self.phase_allocations = allocations;
    }
}

/// Allocates the exemplar budget over all past phases, groups, and classes.
///
/// Each phase's share is proportional to its class count; within a phase the
/// share splits into the high-entropy group A (fraction = that phase's frozen
/// level-2 ratio, half-up rounded) and group B (remainder); within a group the
/// budget spreads evenly over classes. Every class is finally capped at
/// `retained_caps` — data once abandoned is gone — and capped surplus stays
/// idle rather than flowing to other classes.
pub fn apply_level2(
    old_budget: usize,
    history: &[PhaseGroups],
    new_action: Frac,
    retained_caps: &BTreeMap<ClassId, usize>,
) -> Result<Vec<PhaseAllocation>> {
    if history.is_empty() {
        return Err(Error::contract("apply_level2 requires at least one past phase"));
    }
    if !(1..=9).contains(&grid_position(new_action).unwrap_or(-1)) {
        return Err(Error::validation(format!(
            "level-2 action {new_action} not in {{0.1,...,0.9}}"
        )));
    }
    for (idx, phase) in history.iter().enumerate() {
        if phase.class_count() == 0 {
            return Err(Error::validation(format!(
                "phase {} has no classes",
                phase.phase_index
            )));
        }
        let is_newest = idx + 1 == history.len();
        if !is_newest && phase.recorded_level2.is_none() {
            return Err(Error::contract(format!(
                "phase {} is missing its frozen level-2 ratio",
                phase.phase_index
            )));
        }
    }

    let weights: Vec<Frac> = history
        .iter()
        .map(|p| Frac::from_integer(p.class_count() as i64))
        .collect();
    let shares = apportion(old_budget, &weights)?;

    let mut allocations = Vec::with_capacity(history.len());
    for (idx, phase) in history.iter().enumerate() {
        let is_newest = idx + 1 == history.len();
        let ratio = if is_newest {
            phase.recorded_level2.unwrap_or(new_action)
        } else {
            phase.recorded_level2.expect("checked above")
        };
        let share = shares[idx];
        // A degenerate single-group phase keeps the whole share.
        let group_a_budget = if phase.group_b.is_empty() {
            share
        } else if phase.group_a.is_empty() {
            0
        } else {
            (round_half_up(Frac::from_integer(share as i64) * ratio).max(0) as usize).min(share)
        };
        let group_b_budget = share - group_a_budget;

        let mut per_class_counts = BTreeMap::new();
        for (classes, budget) in [
            (&phase.group_a, group_a_budget),
            (&phase.group_b, group_b_budget),
        ] {
            if classes.is_empty() {
                continue;
            }
            let even = vec![Frac::from_integer(1); classes.len()];
            let counts = apportion(budget, &even)?;
            for (class, count) in classes.iter().zip(counts) {
                let capped = match retained_caps.get(class) {
                    Some(&cap) => count.min(cap),
                    None => count,
                };
                per_class_counts.insert(*class, capped);
            }
        }

        allocations.push(PhaseAllocation {
            phase_index: phase.phase_index,
            class_count: phase.class_count(),
            group_a_classes: phase.group_a.clone(),
            group_b_classes: phase.group_b.clone(),
            recorded_level2: ratio,
            group_a_budget,
            group_b_budget,
            per_class_counts,
        });
    }
    Ok(allocations)
}
