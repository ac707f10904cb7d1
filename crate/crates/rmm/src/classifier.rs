//! The desk-scale incremental classification model that serves as the
//! environment's dynamics: a linear softmax classifier over fixed
//! d-dimensional features, trained per phase on exemplars plus loaded new
//! data. No feature learning happens here; class imbalance in the replay set
//! is what drives forgetting, which is exactly the signal the memory policy
//! manages.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::seeding;

/// Class identity, stable across phases.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct ClassId(pub u32);

impl std::fmt::Display for ClassId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Sample identity, stable for exemplar tracking across phases.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct SampleId(pub u64);

impl std::fmt::Display for SampleId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// A feature vector with its label and identity.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample<F> {
    pub features: Vec<F>,
    pub class_id: ClassId,
    pub sample_id: SampleId,
}

/// Hyperparameters of the per-phase classifier training loop.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierConfig {
    /// Epochs per incremental phase.
    pub epochs: usize,
    /// Epochs of exemplar-only fine-tuning after each phase.
    pub finetune_epochs: usize,
    pub learning_rate: f64,
    pub finetune_learning_rate: f64,
    pub batch_size: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            epochs: 30,
            finetune_epochs: 20,
            learning_rate: 0.1,
            finetune_learning_rate: 0.02,
            batch_size: 32,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::validation("classifier epochs and batch size must be positive"));
        }
        if self.learning_rate <= 0.0 || self.finetune_learning_rate <= 0.0 {
            return Err(Error::validation("classifier learning rates must be positive"));
        }
        Ok(())
    }

    /// Step-decay schedule: the rate drops by 10x at the halfway and
    /// three-quarter marks.
    fn rate_at(&self, base: f64, epoch: usize, total: usize) -> f64 {
        let mut rate = base;
        if epoch >= total / 2 {
            rate /= 10.0;
        }
        if epoch >= total * 3 / 4 {
            rate /= 10.0;
        }
        rate
    }
}

/// Linear softmax classifier; rows exist exactly for the classes seen so far.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierState<F> {
    dim: usize,
    /// Row-major `(seen_classes.len(), dim)`.
    weights: Vec<F>,
    bias: Vec<F>,
    seen_classes: Vec<ClassId>,
}

impl<F: Real> ClassifierState<F> {
    /// Empty model over `dim`-dimensional features; no classes yet.
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            weights: Vec::new(),
            bias: Vec::new(),
            seen_classes: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seen_classes(&self) -> &[ClassId] {
        &self.seen_classes
    }

    pub fn num_classes(&self) -> usize {
        self.seen_classes.len()
    }

    fn row_of(&self, class: ClassId) -> Option<usize> {
        self.seen_classes.iter().position(|&c| c == class)
    }

    /// Raw class scores for one feature vector.
    pub fn logits(&self, features: &[F]) -> Vec<F> {
        debug_assert_eq!(features.len(), self.dim);
        let mut out = self.bias.clone();
        for (row, logit) in out.iter_mut().enumerate() {
            let w = &self.weights[row * self.dim..(row + 1) * self.dim];
            let mut acc = F::zero();
            for (wi, xi) in w.iter().zip(features) {
                acc = acc + *wi * *xi;
            }
            *logit = *logit + acc;
        }
        out
    }

    /// Stable softmax over the seen classes.
    pub fn predict_probs(&self, features: &[F]) -> Vec<F> {
        softmax(&self.logits(features))
    }

    fn predict_row(&self, features: &[F]) -> usize {
        let logits = self.logits(features);
        let mut best = 0;
        for (i, &l) in logits.iter().enumerate() {
            if l > logits[best] {
                best = i;
            }
        }
        best
    }

    /// Trains one incremental phase: extends the head with zero-initialized
    /// rows for `new_classes`, then runs mini-batch SGD on softmax
    /// cross-entropy over `data` with the step-decay schedule.
    pub fn train_phase(
        &self,
        data: &[LabeledSample<F>],
        new_classes: &[ClassId],
        config: &ClassifierConfig,
        seed: u64,
    ) -> Result<ClassifierState<F>> {
        if data.is_empty() {
            return Err(Error::contract("train_phase requires non-empty data"));
        }
        let mut next = self.clone();
        for &class in new_classes {
            if next.row_of(class).is_some() {
                return Err(Error::validation(format!("class {class} already seen")));
            }
            next.seen_classes.push(class);
            next.weights.extend(std::iter::repeat(F::zero()).take(next.dim));
            next.bias.push(F::zero());
        }
        for sample in data {
            if next.row_of(sample.class_id).is_none() {
                return Err(Error::validation(format!(
                    "sample {} has unknown class {}",
                    sample.sample_id, sample.class_id
                )));
            }
        }
        next.sgd(data, config.epochs, config.learning_rate, config, seed);
        Ok(next)
    }

    /// Exemplar-only fine-tuning: same optimization as `train_phase` at the
    /// reduced rate, head shape unchanged. Every seen class must appear in
    /// the balanced set.
    pub fn finetune_exemplars(
        &self,
        balanced_set: &[LabeledSample<F>],
        epochs: usize,
        config: &ClassifierConfig,
        seed: u64,
    ) -> Result<ClassifierState<F>> {
        for &class in &self.seen_classes {
            if !balanced_set.iter().any(|s| s.class_id == class) {
                return Err(Error::validation(format!(
                    "fine-tune set is missing seen class {class}"
                )));
            }
        }
        let mut next = self.clone();
        next.sgd(balanced_set, epochs, config.finetune_learning_rate, config, seed);
        Ok(next)
    }

    fn sgd(
        &mut self,
        data: &[LabeledSample<F>],
        epochs: usize,
        base_rate: f64,
        config: &ClassifierConfig,
        seed: u64,
    ) {
        let rows = self.seen_classes.len();
        if rows == 0 || data.is_empty() {
            return;
        }
        let mut rng: ChaCha8Rng = seeding::stream(seed, &[seeding::tags::CLASSIFIER]);
        let mut order: Vec<usize> = (0..data.len()).collect();
        let mut grad_w = vec![F::zero(); rows * self.dim];
        let mut grad_b = vec![F::zero(); rows];
        for epoch in 0..epochs {
            let rate = F::of(config.rate_at(base_rate, epoch, epochs));
            order.shuffle(&mut rng);
            for batch in order.chunks(config.batch_size) {
                grad_w.iter_mut().for_each(|g| *g = F::zero());
                grad_b.iter_mut().for_each(|g| *g = F::zero());
                for &idx in batch {
                    let sample = &data[idx];
                    let target = self
                        .row_of(sample.class_id)
                        .expect("classes validated before sgd");
                    let probs = self.predict_probs(&sample.features);
                    for (row, &p) in probs.iter().enumerate() {
                        let coeff = if row == target { p - F::one() } else { p };
                        grad_b[row] += coeff;
                        let grad_row = &mut grad_w[row * self.dim..(row + 1) * self.dim];
                        for (g, &x) in grad_row.iter_mut().zip(&sample.features) {
                            *g += coeff * x;
                        }
                    }
                }
                let scale = rate / F::of(batch.len() as f64);
                for (w, g) in self.weights.iter_mut().zip(&grad_w) {
                    *w = *w - scale * *g;
                }
                for (b, g) in self.bias.iter_mut().zip(&grad_b) {
                    *b = *b - scale * *g;
                }
            }
        }
    }

    /// Top-1 accuracy on a validation set, as an exact fraction.
    pub fn evaluate(&self, val: &[LabeledSample<F>]) -> F {
        if val.is_empty() {
            return F::zero();
        }
        let correct = val
            .iter()
            .filter(|s| {
                self.row_of(s.class_id)
                    .is_some_and(|row| self.predict_row(&s.features) == row)
            })
            .count();
        F::of(correct as f64) / F::of(val.len() as f64)
    }

    /// Mean Shannon entropy (natural log) of the predictive distribution over
    /// one class's training samples. Higher means harder.
    pub fn class_entropy(&self, class_samples: &[LabeledSample<F>]) -> F {
        if class_samples.is_empty() {
            return F::zero();
        }
        let total: F = class_samples
            .iter()
            .map(|s| {
                let probs = self.predict_probs(&s.features);
                let mut h = F::zero();
                for &p in &probs {
                    if p > F::zero() {
                        h = h - p * p.ln();
                    }
                }
                h
            })
            .sum();
        total / F::of(class_samples.len() as f64)
    }
}

/// Numerically stable softmax.
pub fn softmax<F: Real>(logits: &[F]) -> Vec<F> {
    let max = logits
        .iter()
        .copied()
        .fold(F::neg_infinity(), |a, b| if b > a { b } else { a });
    let exps: Vec<F> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum: F = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Greedy herding selection: repeatedly picks the sample whose addition
/// brings the running mean of the chosen set closest to the class mean.
/// Returns the first `k` picks in selection order, so any shorter selection
/// is a prefix of a longer one. Ties break to the lowest index.
pub fn herding_select<F: Real>(class_features: &[Vec<F>], k: usize) -> Result<Vec<usize>> {
    let n = class_features.len();
    if k == 0 || k > n {
        return Err(Error::validation(format!(
            "herding k={k} out of range 1..={n}"
        )));
    }
    let dim = class_features[0].len();
    let mut mean = vec![F::zero(); dim];
    for features in class_features {
        for (m, &x) in mean.iter_mut().zip(features) {
            *m += x;
        }
    }
    let inv_n = F::one() / F::of(n as f64);
    mean.iter_mut().for_each(|m| *m = *m * inv_n);

    let mut chosen_sum = vec![F::zero(); dim];
    let mut chosen = Vec::with_capacity(k);
    let mut used = vec![false; n];
    for step in 0..k {
        let inv = F::one() / F::of((step + 1) as f64);
        let mut best: Option<(usize, F)> = None;
        for (idx, features) in class_features.iter().enumerate() {
            if used[idx] {
                continue;
            }
            let mut dist = F::zero();
            for ((&m, &s), &x) in mean.iter().zip(&chosen_sum).zip(features) {
                let diff = m - (s + x) * inv;
                dist = dist + diff * diff;
            }
            if best.map_or(true, |(_, d)| dist < d) {
                best = Some((idx, dist));
            }
        }
        let (idx, _) = best.expect("k <= n leaves a candidate");
        used[idx] = true;
        for (s, &x) in chosen_sum.iter_mut().zip(&class_features[idx]) {
            *s += x;
        }
        chosen.push(idx);
    }
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;

    fn sample(features: Vec<f64>, class: u32, id: u64) -> LabeledSample<f64> {
        LabeledSample {
            features,
            class_id: ClassId(class),
            sample_id: SampleId(id),
        }
    }

    fn gaussian_blob(
        rng: &mut ChaCha8Rng,
        center: &[f64],
        count: usize,
        class: u32,
        first_id: u64,
    ) -> Vec<LabeledSample<f64>> {
        use rand_distr::{Distribution, StandardNormal};
        (0..count)
            .map(|i| {
                let features = center
                    .iter()
                    .map(|&c| c + <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
                    .collect();
                sample(features, class, first_id + i as u64)
            })
            .collect()
    }

    /// Perceptron convergence check: returns true iff the data are linearly
    /// separable (with bias) within the iteration budget.
    fn perceptron_separable(data: &[LabeledSample<f64>]) -> bool {
        let dim = data[0].features.len();
        let mut w = vec![0.0; dim + 1];
        for _ in 0..2_000 {
            let mut errors = 0;
            for s in data {
                let y = if s.class_id == ClassId(0) { -1.0 } else { 1.0 };
                let act: f64 =
                    w[dim] + w[..dim].iter().zip(&s.features).map(|(wi, xi)| wi * xi).sum::<f64>();
                if y * act <= 0.0 {
                    errors += 1;
                    for (wi, xi) in w[..dim].iter_mut().zip(&s.features) {
                        *wi += y * xi;
                    }
                    w[dim] += y;
                }
            }
            if errors == 0 {
                return true;
            }
        }
        false
    }

    #[test]
    fn trains_separable_gaussians() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut data = gaussian_blob(&mut rng, &[6.0, 0.0, 0.0, 0.0], 80, 0, 0);
        data.extend(gaussian_blob(&mut rng, &[-6.0, 0.0, 0.0, 0.0], 80, 1, 100));
        assert!(perceptron_separable(&data), "oracle: blobs must be separable");
        let model = ClassifierState::<f64>::new(4)
            .train_phase(&data, &[ClassId(0), ClassId(1)], &ClassifierConfig::default(), 3)
            .unwrap();
        assert!(model.evaluate(&data) >= 0.99);
    }

    #[test]
    fn empty_new_classes_keeps_head_shape() {
        let data = vec![sample(vec![1.0, 0.0], 0, 0), sample(vec![0.0, 1.0], 1, 1)];
        let base = ClassifierState::<f64>::new(2)
            .train_phase(&data, &[ClassId(0), ClassId(1)], &ClassifierConfig::default(), 0)
            .unwrap();
        let retrained = base
            .train_phase(&data, &[], &ClassifierConfig::default(), 1)
            .unwrap();
        assert_eq!(retrained.num_classes(), 2);
    }

    #[test]
    fn training_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut data = gaussian_blob(&mut rng, &[2.0, 1.0], 40, 0, 0);
        data.extend(gaussian_blob(&mut rng, &[-2.0, -1.0], 40, 1, 100));
        let cfg = ClassifierConfig::default();
        let a = ClassifierState::<f64>::new(2)
            .train_phase(&data, &[ClassId(0), ClassId(1)], &cfg, 42)
            .unwrap();
        let b = ClassifierState::<f64>::new(2)
            .train_phase(&data, &[ClassId(0), ClassId(1)], &cfg, 42)
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_unknown_class() {
        let data = vec![sample(vec![1.0], 7, 0)];
        let err = ClassifierState::<f64>::new(1)
            .train_phase(&data, &[ClassId(0)], &ClassifierConfig::default(), 0)
            .unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn finetune_zero_epochs_is_identity() {
        let data = vec![sample(vec![1.0, 0.0], 0, 0), sample(vec![0.0, 1.0], 1, 1)];
        let model = ClassifierState::<f64>::new(2)
            .train_phase(&data, &[ClassId(0), ClassId(1)], &ClassifierConfig::default(), 0)
            .unwrap();
        let tuned = model
            .finetune_exemplars(&data, 0, &ClassifierConfig::default(), 9)
            .unwrap();
        assert_eq!(model, tuned);
    }

    #[test]
    fn finetune_requires_all_seen_classes() {
        let data = vec![sample(vec![1.0, 0.0], 0, 0), sample(vec![0.0, 1.0], 1, 1)];
        let model = ClassifierState::<f64>::new(2)
            .train_phase(&data, &[ClassId(0), ClassId(1)], &ClassifierConfig::default(), 0)
            .unwrap();
        let err = model
            .finetune_exemplars(&data[..1], 5, &ClassifierConfig::default(), 0)
            .unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn finetune_shrinks_recall_gap_on_balanced_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let old_pool = gaussian_blob(&mut rng, &[3.0, 0.0], 120, 0, 0);
        let new_pool = gaussian_blob(&mut rng, &[-3.0, 0.5], 120, 1, 1000);
        // Heavily new-biased training set: 6 old vs 100 new samples.
        let mut biased: Vec<_> = old_pool[..6].to_vec();
        biased.extend_from_slice(&new_pool[..100]);
        let cfg = ClassifierConfig { epochs: 15, ..ClassifierConfig::default() };
        let model = ClassifierState::<f64>::new(2)
            .train_phase(&biased, &[ClassId(0), ClassId(1)], &cfg, 2)
            .unwrap();
        let recall_old_before = model.evaluate(&old_pool[60..].to_vec());
        // Balanced fine-tune set: 6 of each.
        let mut balanced: Vec<_> = old_pool[..6].to_vec();
        balanced.extend_from_slice(&new_pool[..6]);
        let tuned = model.finetune_exemplars(&balanced, 20, &cfg, 3).unwrap();
        let recall_old_after = tuned.evaluate(&old_pool[60..].to_vec());
        assert!(
            recall_old_after >= recall_old_before,
            "old-class recall should not drop: {recall_old_before} -> {recall_old_after}"
        );
    }

    #[test]
    fn evaluate_exact_fractions() {
        // Bias-only model that always predicts class 0.
        let mut model = ClassifierState::<f64>::new(1);
        model = model
            .train_phase(
                &[sample(vec![0.0], 0, 0), sample(vec![0.0], 1, 1)],
                &[ClassId(0), ClassId(1)],
                &ClassifierConfig { epochs: 1, learning_rate: 1e-9, ..Default::default() },
                0,
            )
            .unwrap();
        model.bias = vec![10.0, 0.0];
        model.weights = vec![0.0, 0.0];
        let val: Vec<_> = (0..4)
            .map(|i| sample(vec![0.0], (i % 2) as u32, 100 + i as u64))
            .collect();
        assert_relative_eq!(model.evaluate(&val), 0.5);
        let three_of_five = vec![
            sample(vec![0.0], 0, 0),
            sample(vec![0.0], 0, 1),
            sample(vec![0.0], 0, 2),
            sample(vec![0.0], 1, 3),
            sample(vec![0.0], 1, 4),
        ];
        assert_relative_eq!(model.evaluate(&three_of_five), 0.6);
    }

    #[test]
    fn entropy_closed_forms() {
        let make = |bias: Vec<f64>| {
            let mut m = ClassifierState::<f64>::new(1);
            m.seen_classes = (0..bias.len() as u32).map(ClassId).collect();
            m.weights = vec![0.0; bias.len()];
            m.bias = bias;
            m
        };
        let samples = vec![sample(vec![0.0], 0, 0)];
        let uniform2 = make(vec![0.0, 0.0]);
        assert_relative_eq!(uniform2.class_entropy(&samples), 2f64.ln(), epsilon = 1e-12);
        let peaked = make(vec![200.0, 0.0]);
        assert_relative_eq!(peaked.class_entropy(&samples), 0.0, epsilon = 1e-10);
        // p = (0.5, 0.25, 0.25): entropy = 1.5 ln 2.
        let skewed = make(vec![0.5f64.ln(), 0.25f64.ln(), 0.25f64.ln()]);
        assert_relative_eq!(
            skewed.class_entropy(&samples),
            1.5 * 2f64.ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn softmax_is_distribution() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let logits: Vec<f64> = (0..9).map(|_| rng.gen_range(-50.0..50.0)).collect();
            let p = softmax(&logits);
            assert!(p.iter().all(|&x| x >= 0.0));
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cross_entropy_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let dim = 3;
            let classes = 4;
            let mut model = ClassifierState::<f64>::new(dim);
            model.seen_classes = (0..classes as u32).map(ClassId).collect();
            model.weights = (0..classes * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            model.bias = (0..classes).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let features: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let target = rng.gen_range(0..classes);

            let loss = |m: &ClassifierState<f64>| -> f64 {
                -softmax(&m.logits(&features))[target].ln()
            };
            // Analytic gradient of CE wrt weights: (p - onehot) x^T.
            let probs = model.predict_probs(&features);
            for row in 0..classes {
                let coeff = probs[row] - if row == target { 1.0 } else { 0.0 };
                for d in 0..dim {
                    let analytic = coeff * features[d];
                    let eps = 1e-5;
                    let mut plus = model.clone();
                    plus.weights[row * dim + d] += eps;
                    let mut minus = model.clone();
                    minus.weights[row * dim + d] -= eps;
                    let fd = (loss(&plus) - loss(&minus)) / (2.0 * eps);
                    let denom = analytic.abs().max(fd.abs()).max(1e-8);
                    assert!(
                        (analytic - fd).abs() / denom < 1e-4,
                        "row {row} dim {d}: analytic {analytic} vs fd {fd}"
                    );
                }
            }
        }
    }

    #[test]
    fn herding_picks_closest_to_mean_first() {
        let feats = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        assert_eq!(herding_select(&feats, 1).unwrap(), vec![2]);
    }

    #[test]
    fn herding_ties_break_low_index() {
        let feats = vec![vec![2.0, 2.0]; 4];
        assert_eq!(herding_select(&feats, 2).unwrap(), vec![0, 1]);
    }

    #[test]
    fn herding_full_is_permutation() {
        let feats = vec![vec![1.0], vec![3.0], vec![-2.0], vec![0.5]];
        let mut order = herding_select(&feats, 4).unwrap();
        order.sort_unstable();
        assert_eq!(order, vec![0, 1, 2, 3]);
    }

    #[test]
    fn herding_rejects_bad_k() {
        let feats = vec![vec![1.0]];
        assert!(herding_select(&feats, 0).is_err());
        assert!(herding_select(&feats, 2).is_err());
    }

    #[test]
    fn generic_over_f32() {
        let data: Vec<LabeledSample<f32>> = vec![
            LabeledSample { features: vec![1.0, 0.0], class_id: ClassId(0), sample_id: SampleId(0) },
            LabeledSample { features: vec![0.0, 1.0], class_id: ClassId(1), sample_id: SampleId(1) },
        ];
        let model = ClassifierState::<f32>::new(2)
            .train_phase(&data, &[ClassId(0), ClassId(1)], &ClassifierConfig::default(), 0)
            .unwrap();
        assert!(model.evaluate(&data) > 0.99);
    }
}
