//! Score-function gradient estimation and the ascent update.
//!
//! An episode contributes `sum_i grad log pi(a_i | s_i) * (R - b)` to the
//! accumulator, where `b` is a moving average of previous returns. The epoch
//! update divides the accumulated sum by the episode count once and applies
//! one adaptive-moment ascent step, with separate learning rates for the two
//! networks.

use serde::{Deserialize, Serialize};

use super::{log_prob_gradient, HeadKind, PolicyParams, State};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// One gradient-bearing action inside an episode: enough context to
/// recompute `grad log pi` for that action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredStep<F> {
    pub state: State<F>,
    pub head: HeadKind,
    pub bin_index: usize,
    /// Level-1 action value, present for level-2 steps.
    pub level1_value: Option<F>,
}

/// Moving-average baseline over episode returns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineState<F> {
    pub value: F,
    pub decay: F,
    pub initialized: bool,
}

impl<F: Real> BaselineState<F> {
    pub fn new(decay: F) -> Self {
        Self { value: F::zero(), decay, initialized: false }
    }

    /// Baseline to subtract from a freshly observed return: the current
    /// moving average, or the return itself before any update has happened
    /// (the first episode then has zero advantage).
    pub fn reference(&self, episode_return: F) -> F {
        if self.initialized {
            self.value
        } else {
            episode_return
        }
    }

    /// Folds one return into the moving average. The first call sets the
    /// value directly.
    pub fn update(&mut self, episode_return: F) {
        if self.initialized {
            self.value =
                self.decay * self.value + (F::one() - self.decay) * episode_return;
        } else {
            self.value = episode_return;
            self.initialized = true;
        }
    }
}

/// Running sum of advantage-weighted score-function gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientAccumulator<F> {
    sum: PolicyParams<F>,
    episode_count: usize,
}

impl<F: Real> GradientAccumulator<F> {
    pub fn new(template: &PolicyParams<F>) -> Self {
        Self { sum: template.zeros_like(), episode_count: 0 }
    }

    pub fn episode_count(&self) -> usize {
        self.episode_count
    }

    pub fn sum(&self) -> &PolicyParams<F> {
        &self.sum
    }

    /// Adds `weight * grad` without counting an episode; used by callers that
    /// manage episode bookkeeping themselves.
    pub fn add_weighted(&mut self, grad: &PolicyParams<F>, weight: F) {
        self.sum.axpy(weight, grad);
    }

    pub fn count_episode(&mut self) {
        self.episode_count += 1;
    }

    /// Adds one complete episode: every scored step's log-probability
    /// gradient, weighted by the advantage `episode_return - baseline`.
    pub fn accumulate_episode(
        &mut self,
        params: &PolicyParams<F>,
        steps: &[ScoredStep<F>],
        episode_return: F,
        baseline: F,
    ) -> Result<()> {
        if steps.is_empty() {
            return Err(Error::validation(
                "cannot accumulate an episode with no scored steps",
            ));
        }
        let advantage = episode_return - baseline;
        for step in steps {
            let grad = log_prob_gradient(
                params,
                &step.state,
                step.head,
                step.bin_index,
                step.level1_value,
            );
            self.add_weighted(&grad, advantage);
        }
        self.episode_count += 1;
        Ok(())
    }

    /// Mean gradient: the sum divided by the episode count, exactly once.
    pub fn finalize(mut self) -> Result<PolicyParams<F>> {
        if self.episode_count == 0 {
            return Err(Error::contract("finalize requires at least one episode"));
        }
        let scale = F::one() / F::of(self.episode_count as f64);
        self.sum.scale(scale);
        Ok(self.sum)
    }
}

/// Adaptive-moment optimizer state, one slot per parameter tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState<F> {
    pub m: PolicyParams<F>,
    pub v: PolicyParams<F>,
    pub step: u64,
}

impl<F: Real> AdamState<F> {
    pub fn new(template: &PolicyParams<F>) -> Self {
        Self { m: template.zeros_like(), v: template.zeros_like(), step: 0 }
    }
}

/// Update hyperparameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct UpdateConfig<F> {
    /// Learning rate for the level-1 network.
    pub lr_level1: F,
    /// Learning rate for the level-2 network.
    pub lr_level2: F,
    pub beta1: F,
    pub beta2: F,
    pub epsilon: F,
}

impl<F: Real> UpdateConfig<F> {
    pub fn with_rates(lr_level1: F, lr_level2: F) -> Self {
        Self {
            lr_level1,
            lr_level2,
            beta1: F::of(0.9),
            beta2: F::of(0.999),
            epsilon: F::of(1e-8),
        }
    }
}

impl<F: Real> Default for UpdateConfig<F> {
    fn default() -> Self {
        Self::with_rates(F::of(1e-3), F::of(1e-3))
    }
}

/// Applies one ascent step of the finalized mean gradient to the parameters.
///
/// Tensors 0..6 (level-1 network) use `lr_level1`; tensors 6..10 (level-2
/// network) use `lr_level2`.
pub fn update_params<F: Real>(
    params: &mut PolicyParams<F>,
    acc: GradientAccumulator<F>,
    adam: &mut AdamState<F>,
    config: &UpdateConfig<F>,
) -> Result<()> {
    let mean = acc.finalize()?;
    adam.step += 1;
    let t = F::of(adam.step as f64);
    let bias1 = F::one() - config.beta1.powf(t);
    let bias2 = F::one() - config.beta2.powf(t);
    let params_tensors = params.tensors_mut();
    let grad_tensors = mean.tensors();
    let m_tensors = adam.m.tensors_mut();
    let v_tensors = adam.v.tensors_mut();
    for (slot, (((p, g), m), v)) in params_tensors
        .into_iter()
        .zip(grad_tensors)
        .zip(m_tensors)
        .zip(v_tensors)
        .enumerate()
    {
        let lr = if slot < 6 { config.lr_level1 } else { config.lr_level2 };
        for i in 0..p.len() {
            m[i] = config.beta1 * m[i] + (F::one() - config.beta1) * g[i];
            v[i] = config.beta2 * v[i] + (F::one() - config.beta2) * g[i] * g[i];
            let m_hat = m[i] / bias1;
            let v_hat = v[i] / bias2;
            p[i] += lr * m_hat / (v_hat.sqrt() + config.epsilon);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn step(ncr: f64, omr: f64, head: HeadKind, bin: usize) -> ScoredStep<f64> {
        ScoredStep {
            state: State::new(ncr, omr).unwrap(),
            head,
            bin_index: bin,
            level1_value: matches!(head, HeadKind::Level2).then_some(0.3),
        }
    }

    #[test]
    fn baseline_initialization_and_update() {
        let mut b = BaselineState::<f64>::new(0.9);
        assert_relative_eq!(b.reference(3.0), 3.0);
        b.update(3.0);
        assert_relative_eq!(b.value, 3.0);
        b.value = 2.0;
        b.update(4.0);
        assert_relative_eq!(b.value, 2.2, epsilon = 1e-12);
    }

    #[test]
    fn baseline_converges_to_constant_stream() {
        let mut b = BaselineState::<f64>::new(0.9);
        for _ in 0..400 {
            b.update(1.25);
        }
        assert_relative_eq!(b.value, 1.25, epsilon = 1e-9);
    }

    #[test]
    fn zero_advantage_contributes_nothing() {
        let params = PolicyParams::<f64>::init(8, 0);
        let mut acc = GradientAccumulator::new(&params);
        let steps = vec![
            step(0.5, 0.0, HeadKind::Level1Initial, 2),
            step(0.5, 0.0, HeadKind::Level2, 4),
        ];
        acc.accumulate_episode(&params, &steps, 2.0, 2.0).unwrap();
        for tensor in acc.sum().tensors() {
            assert!(tensor.iter().all(|&g| g == 0.0));
        }
        assert_eq!(acc.episode_count(), 1);
    }

    #[test]
    fn single_phase_episode_equals_summed_gradients() {
        let params = PolicyParams::<f64>::init(8, 1);
        let steps = vec![
            step(0.4, 0.0, HeadKind::Level1Initial, 1),
            step(0.4, 0.0, HeadKind::Level2, 7),
        ];
        let mut acc = GradientAccumulator::new(&params);
        acc.accumulate_episode(&params, &steps, 1.5, 0.5).unwrap();
        let g1 = log_prob_gradient(&params, &steps[0].state, steps[0].head, 1, None);
        let g2 = log_prob_gradient(&params, &steps[1].state, steps[1].head, 7, Some(0.3));
        let mut expect = params.zeros_like();
        expect.axpy(1.0, &g1);
        expect.axpy(1.0, &g2);
        for (got, want) in acc.sum().tensors().into_iter().zip(expect.tensors()) {
            for (a, b) in got.iter().zip(want) {
                assert_relative_eq!(*a, *b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn accumulation_is_linear_and_bit_identical() {
        let params = PolicyParams::<f64>::init(8, 2);
        let steps = vec![step(0.3, 0.2, HeadKind::Level1Delta, 2)];
        let mut twice = GradientAccumulator::new(&params);
        twice.accumulate_episode(&params, &steps, 2.0, 0.0).unwrap();
        twice.accumulate_episode(&params, &steps, 2.0, 0.0).unwrap();
        let mut once = GradientAccumulator::new(&params);
        once.accumulate_episode(&params, &steps, 2.0, 0.0).unwrap();
        assert_eq!(twice.episode_count(), 2);
        let half: Vec<Vec<f64>> = once
            .sum()
            .tensors()
            .into_iter()
            .map(|t| t.iter().map(|&x| x * 2.0).collect())
            .collect();
        for (got, want) in twice.sum().tensors().into_iter().zip(half) {
            assert_eq!(got, &want);
        }
    }

    #[test]
    fn empty_episode_is_rejected() {
        let params = PolicyParams::<f64>::init(8, 3);
        let mut acc = GradientAccumulator::new(&params);
        assert!(acc.accumulate_episode(&params, &[], 1.0, 0.0).is_err());
    }

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut params = PolicyParams::<f64>::init(8, 4);
        let before = params.clone();
        let mut adam = AdamState::new(&params);
        let mut acc = GradientAccumulator::new(&params);
        acc.count_episode();
        update_params(&mut params, acc, &mut adam, &UpdateConfig::default()).unwrap();
        assert_eq!(params, before);
        assert_eq!(adam.step, 1);
    }

    #[test]
    fn constant_gradient_moves_monotonically() {
        let mut params = PolicyParams::<f64>::zeros(4);
        let mut adam = AdamState::new(&params);
        let config = UpdateConfig::default();
        let mut grad = params.zeros_like();
        grad.level1_head_initial.b[0] = 1.0;
        let mut last = 0.0;
        for _ in 0..50 {
            let mut acc = GradientAccumulator::new(&params);
            acc.add_weighted(&grad, 1.0);
            acc.count_episode();
            update_params(&mut params, acc, &mut adam, &config).unwrap();
            let now = params.level1_head_initial.b[0];
            assert!(now > last);
            // Adaptive-moment step size is bounded by roughly the learning rate.
            assert!(now - last < 2.0 * config.lr_level1);
            last = now;
        }
    }

    #[test]
    fn update_requires_episodes() {
        let mut params = PolicyParams::<f64>::zeros(4);
        let mut adam = AdamState::new(&params);
        let acc = GradientAccumulator::new(&params);
        assert!(matches!(
            update_params(&mut params, acc, &mut adam, &UpdateConfig::default()),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn score_function_gradient_has_zero_mean() {
        use rand_chacha::rand_core::SeedableRng;
        let params = PolicyParams::<f64>::init(6, 88);
        let s = State::new(0.4, 0.3).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let n = 100_000usize;
        // Welford accumulation of per-component mean and M2 over the level-2
        // head bias gradient (advantage forced to 1).
        let mut mean = vec![0.0f64; 9];
        let mut m2 = vec![0.0f64; 9];
        for i in 1..=n {
            let a = super::super::sample_level2(&params, &s, 0.25, &mut rng);
            let g = log_prob_gradient(&params, &s, HeadKind::Level2, a.bin_index, Some(0.25));
            for (k, &gk) in g.level2_head.b.iter().enumerate() {
                let delta = gk - mean[k];
                mean[k] += delta / i as f64;
                m2[k] += delta * (gk - mean[k]);
            }
        }
        for k in 0..9 {
            let stderr = (m2[k] / (n as f64 - 1.0)).sqrt() / (n as f64).sqrt();
            assert!(
                mean[k].abs() <= 5.0 * stderr.max(1e-12),
                "component {k}: mean {} stderr {stderr}",
                mean[k]
            );
        }
    }
}
