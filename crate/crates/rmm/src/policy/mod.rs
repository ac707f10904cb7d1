//! The two-level stochastic allocation policy.
//!
//! Level 1 is a two-layer perceptron over the 2-dimensional phase state with
//! two categorical heads: an absolute split for the first incremental phase
//! (nine bins, `0.1..=0.9`) and a bounded delta for later phases (three bins,
//! `{-0.1, 0, +0.1}`). Level 2 is a second two-layer perceptron that takes
//! the state plus the level-1 action value and emits the nine-bin ratio
//! assigned to the high-entropy class group. Level-1 sampling rejects any bin
//! that would push the cumulative exemplar fraction outside `(0, 1]`, keeping
//! the unrenormalized log-probability of the accepted bin for the gradient.

mod mlp;
mod reinforce;

pub use mlp::{log_softmax, Dense};
pub use reinforce::{
    update_params, AdamState, BaselineState, GradientAccumulator, ScoredStep, UpdateConfig,
};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::memory::{is_feasible_level1, Frac};
use crate::scalar::Real;
use crate::seeding;

pub const LEVEL1_INITIAL_BINS: usize = 9;
pub const LEVEL1_DELTA_BINS: usize = 3;
pub const LEVEL2_BINS: usize = 9;

/// Exact fraction of an initial level-1 bin: `0.1 * (bin + 1)`.
pub fn initial_bin_fraction(bin: usize) -> Frac {
    Frac::new(bin as i64 + 1, 10)
}

/// Exact fraction of a delta bin: `{-0.1, 0, +0.1}`.
pub fn delta_bin_fraction(bin: usize) -> Frac {
    Frac::new(bin as i64 - 1, 10)
}

/// Exact fraction of a level-2 bin: `0.1 * (bin + 1)`.
pub fn level2_bin_fraction(bin: usize) -> Frac {
    Frac::new(bin as i64 + 1, 10)
}

fn frac_to_real<F: Real>(f: Frac) -> F {
    F::of(*f.numer() as f64 / *f.denom() as f64)
}

/// Which categorical head produced an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HeadKind {
    Level1Initial,
    Level1Delta,
    Level2,
}

impl HeadKind {
    pub fn bins(self) -> usize {
        match self {
            HeadKind::Level1Initial => LEVEL1_INITIAL_BINS,
            HeadKind::Level1Delta => LEVEL1_DELTA_BINS,
            HeadKind::Level2 => LEVEL2_BINS,
        }
    }

    pub fn bin_fraction(self, bin: usize) -> Frac {
        match self {
            HeadKind::Level1Initial => initial_bin_fraction(bin),
            HeadKind::Level1Delta => delta_bin_fraction(bin),
            HeadKind::Level2 => level2_bin_fraction(bin),
        }
    }
}

/// The phase state the policy observes: the ratio of new classes to classes
/// seen so far, and the fraction of the budget currently held by exemplars.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State<F> {
    pub new_class_ratio: F,
    pub old_memory_ratio: F,
}

impl<F: Real> State<F> {
    pub fn new(new_class_ratio: F, old_memory_ratio: F) -> Result<Self> {
        if !new_class_ratio.is_finite() || new_class_ratio < F::zero() {
            return Err(Error::validation("new_class_ratio must be finite and >= 0"));
        }
        if !old_memory_ratio.is_finite()
            || old_memory_ratio < F::zero()
            || old_memory_ratio > F::one()
        {
            return Err(Error::validation("old_memory_ratio must lie in [0, 1]"));
        }
        Ok(Self { new_class_ratio, old_memory_ratio })
    }
}

/// One categorical draw: the bin, its canonical value, and its log-probability
/// under the unmodified head distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionSample<F> {
    pub bin_index: usize,
    pub value: F,
    pub log_prob: F,
}

/// Parameters of both policy networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams<F> {
    pub hidden: usize,
    pub level1_trunk: Dense<F>,
    pub level1_head_initial: Dense<F>,
    pub level1_head_delta: Dense<F>,
    pub level2_trunk: Dense<F>,
    pub level2_head: Dense<F>,
}

impl<F: Real> PolicyParams<F> {
    /// Seeded initialization: near-uniform action distributions.
    pub fn init(hidden: usize, seed: u64) -> Self {
        let mut rng = seeding::stream(seed, &[seeding::tags::POLICY_INIT]);
        Self {
            hidden,
            level1_trunk: Dense::init(2, hidden, &mut rng),
            level1_head_initial: Dense::init(hidden, LEVEL1_INITIAL_BINS, &mut rng),
            level1_head_delta: Dense::init(hidden, LEVEL1_DELTA_BINS, &mut rng),
            level2_trunk: Dense::init(3, hidden, &mut rng),
            level2_head: Dense::init(hidden, LEVEL2_BINS, &mut rng),
        }
    }

    /// All-zero parameters with the same shapes (uniform action heads).
    pub fn zeros(hidden: usize) -> Self {
        Self {
            hidden,
            level1_trunk: Dense::zeros(2, hidden),
            level1_head_initial: Dense::zeros(hidden, LEVEL1_INITIAL_BINS),
            level1_head_delta: Dense::zeros(hidden, LEVEL1_DELTA_BINS),
            level2_trunk: Dense::zeros(3, hidden),
            level2_head: Dense::zeros(hidden, LEVEL2_BINS),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.hidden)
    }

    /// Canonical tensor order; the first six tensors belong to the level-1
    /// network, the last four to the level-2 network.
    pub fn tensors(&self) -> [&Vec<F>; 10] {
        [
            &self.level1_trunk.w,
            &self.level1_trunk.b,
            &self.level1_head_initial.w,
            &self.level1_head_initial.b,
            &self.level1_head_delta.w,
            &self.level1_head_delta.b,
            &self.level2_trunk.w,
            &self.level2_trunk.b,
            &self.level2_head.w,
            &self.level2_head.b,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Vec<F>; 10] {
        [
            &mut self.level1_trunk.w,
            &mut self.level1_trunk.b,
            &mut self.level1_head_initial.w,
            &mut self.level1_head_initial.b,
            &mut self.level1_head_delta.w,
            &mut self.level1_head_delta.b,
            &mut self.level2_trunk.w,
            &mut self.level2_trunk.b,
            &mut self.level2_head.w,
            &mut self.level2_head.b,
        ]
    }

    /// `self += a * other`, tensor by tensor.
    pub fn axpy(&mut self, a: F, other: &Self) {
        let mine = self.tensors_mut();
        let theirs = other.tensors();
        for (dst, src) in mine.into_iter().zip(theirs) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += a * *s;
            }
        }
    }

    pub fn scale(&mut self, a: F) {
        for tensor in self.tensors_mut() {
            tensor.iter_mut().for_each(|x| *x = *x * a);
        }
    }

    fn level1_input(state: &State<F>) -> [F; 2] {
        [state.new_class_ratio, state.old_memory_ratio]
    }

    fn level2_input(state: &State<F>, level1_value: F) -> [F; 3] {
        [state.new_class_ratio, state.old_memory_ratio, level1_value]
    }

    /// Log-probabilities of the requested head on the given inputs.
    pub fn head_log_probs(
        &self,
        head: HeadKind,
        state: &State<F>,
        level1_value: Option<F>,
    ) -> Vec<F> {
        let (trace, _) = self.forward(head, state, level1_value);
        trace
    }

    /// Forward pass returning `(log_probs, hidden activations and input)`.
    fn forward(
        &self,
        head: HeadKind,
        state: &State<F>,
        level1_value: Option<F>,
    ) -> (Vec<F>, ForwardTrace<F>) {
        let (trunk, head_layer, input): (&Dense<F>, &Dense<F>, Vec<F>) = match head {
            HeadKind::Level1Initial => (
                &self.level1_trunk,
                &self.level1_head_initial,
                Self::level1_input(state).to_vec(),
            ),
            HeadKind::Level1Delta => (
                &self.level1_trunk,
                &self.level1_head_delta,
                Self::level1_input(state).to_vec(),
            ),
            HeadKind::Level2 => (
                &self.level2_trunk,
                &self.level2_head,
                Self::level2_input(
                    state,
                    level1_value.expect("level-2 forward needs the level-1 value"),
                )
                .to_vec(),
            ),
        };
        let mut hidden = trunk.forward(&input);
        mlp::tanh_inplace(&mut hidden);
        let logits = head_layer.forward(&hidden);
        let log_probs = log_softmax(&logits);
        (log_probs, ForwardTrace { input, hidden })
    }
}

struct ForwardTrace<F> {
    input: Vec<F>,
    hidden: Vec<F>,
}

/// Exact analytic gradient of `log pi(action)` with respect to every
/// parameter; tensors not on the action's path stay zero.
pub fn log_prob_gradient<F: Real>(
    params: &PolicyParams<F>,
    state: &State<F>,
    head: HeadKind,
    bin_index: usize,
    level1_value: Option<F>,
) -> PolicyParams<F> {
    let (log_probs, trace) = params.forward(head, state, level1_value);
    let mut grad = params.zeros_like();
    // d log p(a) / d logit_k = 1{k=a} - p_k
    let mut d_logits: Vec<F> = log_probs.iter().map(|&lp| -lp.exp()).collect();
    d_logits[bin_index] += F::one();

    let (trunk, head_layer, g_trunk, g_head) = match head {
        HeadKind::Level1Initial => (
            &params.level1_trunk,
            &params.level1_head_initial,
            &mut grad.level1_trunk,
            &mut grad.level1_head_initial,
        ),
        HeadKind::Level1Delta => (
            &params.level1_trunk,
            &params.level1_head_delta,
            &mut grad.level1_trunk,
            &mut grad.level1_head_delta,
        ),
        HeadKind::Level2 => (
            &params.level2_trunk,
            &params.level2_head,
            &mut grad.level2_trunk,
            &mut grad.level2_head,
        ),
    };
    let d_hidden = head_layer.backward(&trace.hidden, &d_logits, g_head);
    // tanh' = 1 - h^2
    let d_pre: Vec<F> = d_hidden
        .iter()
        .zip(&trace.hidden)
        .map(|(&d, &h)| d * (F::one() - h * h))
        .collect();
    trunk.backward(&trace.input, &d_pre, g_trunk);
    grad
}

fn categorical_draw<F: Real>(log_probs: &[F], rng: &mut ChaCha8Rng) -> usize {
    let u = F::of(rng.gen::<f64>());
    let mut acc = F::zero();
    for (i, &lp) in log_probs.iter().enumerate() {
        acc = acc + lp.exp();
        if u < acc {
            return i;
        }
    }
    log_probs.len() - 1
}

/// Draws from the categorical distribution conditioned on `allowed` bins:
/// exactly the law of resampling the unconditioned distribution until an
/// allowed bin comes up, but it terminates even when the policy is saturated
/// on a forbidden bin. Consumes one draw either way.
fn conditional_draw<F: Real>(
    log_probs: &[F],
    allowed: &[bool],
    rng: &mut ChaCha8Rng,
) -> Option<usize> {
    let mass: F = log_probs
        .iter()
        .zip(allowed)
        .filter(|(_, &ok)| ok)
        .map(|(&lp, _)| lp.exp())
        .sum();
    if !(mass > F::zero()) {
        // Degenerate underflow: fall back to uniform over the allowed bins.
        let feasible: Vec<usize> = (0..log_probs.len()).filter(|&i| allowed[i]).collect();
        if feasible.is_empty() {
            return None;
        }
        let u: f64 = rng.gen();
        let pick = ((u * feasible.len() as f64) as usize).min(feasible.len() - 1);
        return Some(feasible[pick]);
    }
    let u = F::of(rng.gen::<f64>()) * mass;
    let mut acc = F::zero();
    let mut last_allowed = None;
    for (i, &lp) in log_probs.iter().enumerate() {
        if !allowed[i] {
            continue;
        }
        acc = acc + lp.exp();
        last_allowed = Some(i);
        if u < acc {
            return Some(i);
        }
    }
    last_allowed
}

fn argmax<F: Real>(values: &[F], allowed: impl Fn(usize) -> bool) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if !allowed(i) {
            continue;
        }
        if best.map_or(true, |b| v > values[b]) {
            best = Some(i);
        }
    }
    best
}

fn level1_head_for_phase(phase_index: usize) -> HeadKind {
    if phase_index == 1 {
        HeadKind::Level1Initial
    } else {
        HeadKind::Level1Delta
    }
}

/// Samples a level-1 action for the given phase, rejecting any bin that
/// would push the cumulative exemplar fraction outside `(0, 1]`. The draw is
/// the exact conditional law of the rejection loop, so it terminates even
/// against saturated logits. The returned log-probability is taken under the
/// unmodified categorical distribution.
pub fn sample_level1<F: Real>(
    params: &PolicyParams<F>,
    state: &State<F>,
    phase_index: usize,
    cumulative: Frac,
    rng: &mut ChaCha8Rng,
) -> Result<(HeadKind, ActionSample<F>)> {
    if phase_index == 0 {
        return Err(Error::contract("level-1 sampling starts at phase 1"));
    }
    let head = level1_head_for_phase(phase_index);
    let log_probs = params.head_log_probs(head, state, None);
    let allowed: Vec<bool> = (0..head.bins())
        .map(|bin| is_feasible_level1(cumulative, head.bin_fraction(bin)))
        .collect();
    let bin = if allowed.iter().all(|&ok| ok) {
        categorical_draw(&log_probs, rng)
    } else {
        conditional_draw(&log_probs, &allowed, rng).ok_or_else(|| {
            Error::internal("no feasible level-1 bin; cumulative fraction corrupted")
        })?
    };
    Ok((
        head,
        ActionSample {
            bin_index: bin,
            value: frac_to_real(head.bin_fraction(bin)),
            log_prob: log_probs[bin],
        },
    ))
}

/// Greedy level-1 action: the most probable feasible bin.
pub fn greedy_level1<F: Real>(
    params: &PolicyParams<F>,
    state: &State<F>,
    phase_index: usize,
    cumulative: Frac,
) -> Result<(HeadKind, ActionSample<F>)> {
    if phase_index == 0 {
        return Err(Error::contract("level-1 actions start at phase 1"));
    }
    let head = level1_head_for_phase(phase_index);
    let log_probs = params.head_log_probs(head, state, None);
    let bin = argmax(&log_probs, |b| {
        is_feasible_level1(cumulative, head.bin_fraction(b))
    })
    .ok_or_else(|| Error::internal("no feasible level-1 bin"))?;
    Ok((
        head,
        ActionSample {
            bin_index: bin,
            value: frac_to_real(head.bin_fraction(bin)),
            log_prob: log_probs[bin],
        },
    ))
}

/// Samples the level-2 ratio from the head conditioned on the state and the
/// just-sampled level-1 value.
pub fn sample_level2<F: Real>(
    params: &PolicyParams<F>,
    state: &State<F>,
    level1_value: F,
    rng: &mut ChaCha8Rng,
) -> ActionSample<F> {
    let log_probs = params.head_log_probs(HeadKind::Level2, state, Some(level1_value));
    let bin = categorical_draw(&log_probs, rng);
    ActionSample {
        bin_index: bin,
        value: frac_to_real(level2_bin_fraction(bin)),
        log_prob: log_probs[bin],
    }
}

/// Greedy level-2 action.
pub fn greedy_level2<F: Real>(
    params: &PolicyParams<F>,
    state: &State<F>,
    level1_value: F,
) -> ActionSample<F> {
    let log_probs = params.head_log_probs(HeadKind::Level2, state, Some(level1_value));
    let bin = argmax(&log_probs, |_| true).expect("head has bins");
    ActionSample {
        bin_index: bin,
        value: frac_to_real(level2_bin_fraction(bin)),
        log_prob: log_probs[bin],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::memory::tenths;
    use approx::assert_relative_eq;
    use num_traits::Zero;
    use rand_chacha::rand_core::SeedableRng;

    fn state(ncr: f64, omr: f64) -> State<f64> {
        State::new(ncr, omr).unwrap()
    }

    #[test]
    fn uniform_initial_head_samples_evenly() {
        let params = PolicyParams::<f64>::zeros(16);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut counts = [0usize; LEVEL1_INITIAL_BINS];
        let s = state(0.5, 0.0);
        for _ in 0..100_000 {
            let (head, a) = sample_level1(&params, &s, 1, Frac::zero(), &mut rng).unwrap();
            assert_eq!(head, HeadKind::Level1Initial);
            counts[a.bin_index] += 1;
        }
        for &c in &counts {
            let freq = c as f64 / 100_000.0;
            assert!((freq - 1.0 / 9.0).abs() < 0.02, "freq {freq}");
        }
    }

    #[test]
    fn rejection_returns_only_feasible_bins() {
        // Saturate the delta head toward +0.1.
        let mut params = PolicyParams::<f64>::zeros(8);
        params.level1_head_delta.b = vec![-40.0, -40.0, 40.0];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = state(0.2, 0.95);
        for _ in 0..2_000 {
            let (_, a) = sample_level1(&params, &s, 3, Frac::new(95, 100), &mut rng).unwrap();
            assert!(a.bin_index == 0 || a.bin_index == 1, "bin {}", a.bin_index);
        }
    }

    #[test]
    fn delta_head_softmax_frequencies() {
        // Independent softmax oracle for logits (0, 0, ln 9).
        let expect = {
            let exps = [1.0f64, 1.0, 9.0];
            let sum: f64 = exps.iter().sum();
            exps.map(|e| e / sum)
        };
        assert_relative_eq!(expect[2], 9.0 / 11.0, epsilon = 1e-12);
        let mut params = PolicyParams::<f64>::zeros(8);
        params.level1_head_delta.b = vec![0.0, 0.0, 9f64.ln()];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = state(0.3, 0.4);
        let mut counts = [0usize; 3];
        for _ in 0..100_000 {
            let (_, a) = sample_level1(&params, &s, 2, tenths(4), &mut rng).unwrap();
            counts[a.bin_index] += 1;
        }
        for (c, e) in counts.iter().zip(expect) {
            assert!((*c as f64 / 100_000.0 - e).abs() < 0.01);
        }
    }

    #[test]
    fn level2_uniform_and_saturated() {
        let params = PolicyParams::<f64>::zeros(8);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = state(0.1, 0.3);
        let mut counts = [0usize; LEVEL2_BINS];
        for _ in 0..100_000 {
            counts[sample_level2(&params, &s, 0.3, &mut rng).bin_index] += 1;
        }
        for &c in &counts {
            assert!((c as f64 / 100_000.0 - 1.0 / 9.0).abs() < 0.02);
        }

        let mut hot = PolicyParams::<f64>::zeros(8);
        hot.level2_head.b = vec![0.0; 9];
        hot.level2_head.b[6] = 20.0; // bin value 0.7
        let mut hits = 0usize;
        for _ in 0..10_000 {
            let a = sample_level2(&hot, &s, 0.3, &mut rng);
            if a.bin_index == 6 {
                assert_relative_eq!(a.value, 0.7);
                hits += 1;
            }
        }
        assert!(hits as f64 / 10_000.0 > 0.999);
    }

    #[test]
    fn level2_ramp_logits_match_softmax_oracle() {
        let logits: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
        let mut params = PolicyParams::<f64>::zeros(8);
        params.level2_head.b = logits.clone();
        let exps: Vec<f64> = logits.iter().map(|l| l.exp()).collect();
        let z: f64 = exps.iter().sum();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = state(0.2, 0.2);
        let mut counts = [0usize; 9];
        for _ in 0..100_000 {
            counts[sample_level2(&params, &s, 0.5, &mut rng).bin_index] += 1;
        }
        for (c, e) in counts.iter().zip(exps) {
            assert!((*c as f64 / 100_000.0 - e / z).abs() < 0.01);
        }
    }

    #[test]
    fn head_bias_gradient_is_onehot_minus_softmax() {
        let mut params = PolicyParams::<f64>::zeros(8);
        params.level1_head_initial.b = (0..9).map(|k| k as f64 * 0.2).collect();
        let s = state(0.4, 0.1);
        let chosen = 3;
        let grad = log_prob_gradient(&params, &s, HeadKind::Level1Initial, chosen, None);
        let log_probs = params.head_log_probs(HeadKind::Level1Initial, &s, None);
        for k in 0..9 {
            let expect = if k == chosen { 1.0 } else { 0.0 } - log_probs[k].exp();
            assert_relative_eq!(grad.level1_head_initial.b[k], expect, epsilon = 1e-12);
        }
        // Uniform head: gradient of every logit bias is 1{chosen} - 1/B.
        let uniform = PolicyParams::<f64>::zeros(8);
        let g = log_prob_gradient(&uniform, &s, HeadKind::Level2, 2, Some(0.5));
        for k in 0..9 {
            let expect = if k == 2 { 1.0 } else { 0.0 } - 1.0 / 9.0;
            assert_relative_eq!(g.level2_head.b[k], expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..20 {
            let params = PolicyParams::<f64>::init(6, 1000 + trial);
            let s = state(
                rand::Rng::gen_range(&mut rng, 0.05..2.0),
                rand::Rng::gen_range(&mut rng, 0.0..0.9),
            );
            let (head, level1_value) = match trial % 3 {
                0 => (HeadKind::Level1Initial, None),
                1 => (HeadKind::Level1Delta, None),
                _ => (HeadKind::Level2, Some(0.3)),
            };
            let bin = rand::Rng::gen_range(&mut rng, 0..head.bins());
            let analytic = log_prob_gradient(&params, &s, head, bin, level1_value);
            let eps = 1e-5;
            for t in 0..10 {
                let len = params.tensors()[t].len();
                for idx in (0..len).step_by(3) {
                    let mut plus = params.clone();
                    plus.tensors_mut()[t][idx] += eps;
                    let mut minus = params.clone();
                    minus.tensors_mut()[t][idx] -= eps;
                    let lp_plus = plus.head_log_probs(head, &s, level1_value)[bin];
                    let lp_minus = minus.head_log_probs(head, &s, level1_value)[bin];
                    let fd = (lp_plus - lp_minus) / (2.0 * eps);
                    let a = analytic.tensors()[t][idx];
                    let denom = a.abs().max(fd.abs()).max(1e-6);
                    assert!(
                        (a - fd).abs() / denom < 1e-4,
                        "tensor {t} idx {idx}: analytic {a} vs fd {fd}"
                    );
                }
            }
        }
    }

    #[test]
    fn greedy_respects_feasibility() {
        let mut params = PolicyParams::<f64>::zeros(8);
        params.level1_head_delta.b = vec![0.0, 1.0, 50.0];
        let s = state(0.2, 1.0);
        let (_, a) = greedy_level1(&params, &s, 2, Frac::from_integer(1)).unwrap();
        // +0.1 infeasible at cumulative 1.0; 0 is the best feasible bin.
        assert_eq!(a.bin_index, 1);
    }

    #[test]
    fn log_probs_normalize() {
        let params = PolicyParams::<f64>::init(16, 99);
        let s = state(1.3, 0.6);
        for head in [HeadKind::Level1Initial, HeadKind::Level1Delta, HeadKind::Level2] {
            let lp = params.head_log_probs(head, &s, Some(0.1));
            let total: f64 = lp.iter().map(|l| l.exp()).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn state_validation() {
        assert!(State::new(f64::NAN, 0.0).is_err());
        assert!(State::new(0.5, 1.5).is_err());
        assert!(State::new(-0.1, 0.0).is_err());
        assert!(State::new(0.0, 1.0).is_ok());
    }
}
