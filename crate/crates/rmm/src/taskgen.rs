//! Dataset provisioning and pseudo-task generation.
//!
//! Pseudo tasks are downsized replicas of a target task built from data that
//! is legally accessible (the initial phase's pool, or a foreign dataset):
//! the class order is reshuffled, per-phase class counts are halved, and 10%
//! of each class is withheld as a pseudo-validation set so cumulative rewards
//! can be computed without touching the target's evaluation data.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};

use crate::classifier::{ClassId, LabeledSample, SampleId};
use crate::env::CilTaskSpec;
use crate::error::{Error, Result};
use crate::memory::{round_half_up, Frac};
use crate::scalar::Real;
use crate::seeding::{self, tags};

/// Minimum samples per class, so the 10% validation split is never empty.
pub const MIN_CLASS_SAMPLES: usize = 10;

/// A labeled pool of per-class samples with a fixed feature dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSource<F> {
    dim: usize,
    per_class: BTreeMap<ClassId, Vec<LabeledSample<F>>>,
}

impl<F: Real> DatasetSource<F> {
    pub fn new(dim: usize, samples: Vec<LabeledSample<F>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::validation("feature dimension must be positive"));
        }
        let mut per_class: BTreeMap<ClassId, Vec<LabeledSample<F>>> = BTreeMap::new();
        let mut seen_ids = std::collections::BTreeSet::new();
        for sample in samples {
            if sample.features.len() != dim {
                return Err(Error::validation(format!(
                    "sample {} has dimension {}, expected {dim}",
                    sample.sample_id,
                    sample.features.len()
                )));
            }
            if sample.features.iter().any(|x| !x.is_finite()) {
                return Err(Error::validation(format!(
                    "sample {} has non-finite features",
                    sample.sample_id
                )));
            }
            if !seen_ids.insert(sample.sample_id) {
                return Err(Error::validation(format!(
                    "duplicate sample id {}",
                    sample.sample_id
                )));
            }
            per_class.entry(sample.class_id).or_default().push(sample);
        }
        if per_class.is_empty() {
            return Err(Error::validation("no classes"));
        }
        for (class, pool) in &per_class {
            if pool.len() < MIN_CLASS_SAMPLES {
                return Err(Error::validation(format!(
                    "class {class} has {} samples, need at least {MIN_CLASS_SAMPLES}",
                    pool.len()
                )));
            }
        }
        Ok(Self { dim, per_class })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn classes(&self) -> Vec<ClassId> {
        self.per_class.keys().copied().collect()
    }

    pub fn num_classes(&self) -> usize {
        self.per_class.len()
    }

    pub fn samples_of(&self, class: ClassId) -> Option<&[LabeledSample<F>]> {
        self.per_class.get(&class).map(|v| v.as_slice())
    }

    pub fn iter_classes(
        &self,
    ) -> impl Iterator<Item = (ClassId, &[LabeledSample<F>])> {
        self.per_class.iter().map(|(&c, v)| (c, v.as_slice()))
    }
}

/// Per-class isotropic Gaussian clouds whose means sit uniformly on a sphere
/// of radius `separation`.
pub fn make_synthetic_dataset<F: Real>(
    num_classes: usize,
    dim: usize,
    samples_per_class: usize,
    separation: f64,
    seed: u64,
) -> Result<DatasetSource<F>> {
    if num_classes == 0 || dim == 0 || samples_per_class == 0 {
        return Err(Error::validation("counts must be positive"));
    }
    if samples_per_class < MIN_CLASS_SAMPLES {
        return Err(Error::validation(format!(
            "samples_per_class must be at least {MIN_CLASS_SAMPLES}"
        )));
    }
    if !(separation > 0.0) {
        return Err(Error::validation("separation must be positive"));
    }
    let mut rng = seeding::stream(seed, &[tags::DATASET]);
    let mut samples = Vec::with_capacity(num_classes * samples_per_class);
    let mut next_id = 0u64;
    let mut means: Vec<Vec<f64>> = Vec::with_capacity(num_classes);
    for _ in 0..num_classes {
        loop {
            let raw: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-9 {
                continue;
            }
            let mean: Vec<f64> = raw.iter().map(|x| x / norm * separation).collect();
            if means.iter().all(|m| m != &mean) {
                means.push(mean);
                break;
            }
        }
    }
    for (class_idx, mean) in means.iter().enumerate() {
        for _ in 0..samples_per_class {
            let features: Vec<F> = mean
                .iter()
                .map(|&m| F::of(m + <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)))
                .collect();
            samples.push(LabeledSample {
                features,
                class_id: ClassId(class_idx as u32),
                sample_id: SampleId(next_id),
            });
            next_id += 1;
        }
    }
    DatasetSource::new(dim, samples)
}

/// Splits one class pool into a held-out validation part (10% of samples,
/// rounded up) and a training part, sampled without replacement.
fn split_class_pool<F: Real>(
    pool: &[LabeledSample<F>],
    rng: &mut rand_chacha::ChaCha8Rng,
) -> (Vec<LabeledSample<F>>, Vec<LabeledSample<F>>) {
    let n = pool.len();
    let val_count = n.div_ceil(10).max(1);
    let mut val_idx: Vec<usize> = rand::seq::index::sample(rng, n, val_count).into_vec();
    val_idx.sort_unstable();
    let mut is_val = vec![false; n];
    for &i in &val_idx {
        is_val[i] = true;
    }
    let mut train = Vec::with_capacity(n - val_count);
    let mut val = Vec::with_capacity(val_count);
    for (i, sample) in pool.iter().enumerate() {
        if is_val[i] {
            val.push(sample.clone());
        } else {
            train.push(sample.clone());
        }
    }
    (train, val)
}

fn build_task<F: Real>(
    source: &DatasetSource<F>,
    class_order: Vec<ClassId>,
    phase_class_counts: Vec<usize>,
    total_budget: usize,
    seed: u64,
) -> Result<CilTaskSpec<F>> {
    let mut rng = seeding::stream(seed, &[tags::TASK, 1]);
    let mut train_pools = BTreeMap::new();
    let mut val_pools = BTreeMap::new();
    for &class in &class_order {
        let pool = source
            .samples_of(class)
            .ok_or_else(|| Error::validation(format!("class {class} missing from source")))?;
        let (train, val) = split_class_pool(pool, &mut rng);
        train_pools.insert(class, train);
        val_pools.insert(class, val);
    }
    CilTaskSpec::new(
        phase_class_counts,
        class_order,
        train_pools,
        val_pools,
        total_budget,
    )
}

/// Generates a pseudo task shaped like the target: the target is assumed to
/// hold the source's classes in its initial phase and as many again spread
/// over `target_num_phases`; the pseudo task halves every per-phase count
/// (rounded down, floor one), reshuffles the class order, withholds 10% of
/// each class for pseudo-validation, and scales the budget by the ratio of
/// pseudo to target per-phase data volume.
pub fn make_pseudo_task<F: Real>(
    source: &DatasetSource<F>,
    target_num_phases: usize,
    total_budget: usize,
    seed: u64,
) -> Result<CilTaskSpec<F>> {
    let num_classes = source.num_classes();
    if target_num_phases == 0 {
        return Err(Error::validation("a task needs at least one incremental phase"));
    }
    let initial = (num_classes / 2).max(1);
    let per_phase = (num_classes / (2 * target_num_phases)).max(1);
    let used = initial + per_phase * target_num_phases;
    if used > num_classes {
        return Err(Error::validation(format!(
            "{num_classes} classes cannot fill a {target_num_phases}-phase pseudo task \
             ({initial} initial + {target_num_phases} x {per_phase} classes)"
        )));
    }

    let mut rng = seeding::stream(seed, &[tags::TASK, 0]);
    let mut order = source.classes();
    order.shuffle(&mut rng);
    order.truncate(used);

    // Budget scales with per-phase data volume: halved class counts and the
    // 90% training split both shrink the pseudo task's phases.
    let target_per_phase = Frac::new(num_classes as i64, target_num_phases as i64);
    let scale = Frac::new(per_phase as i64 * 9, 10) / target_per_phase;
    let budget = round_half_up(Frac::from_integer(total_budget as i64) * scale);
    if budget < 1 {
        return Err(Error::validation(format!(
            "scaled pseudo budget {budget} is too small; increase total_budget"
        )));
    }

    let mut counts = vec![initial];
    counts.extend(std::iter::repeat(per_phase).take(target_num_phases));
    build_task(source, order, counts, budget as usize, seed)
}

/// Builds a benchmark task directly over the full source: half the classes in
/// the initial phase, the rest spread evenly over `num_phases`, with the same
/// 10% held-out validation split per class.
pub fn make_target_task<F: Real>(
    source: &DatasetSource<F>,
    num_phases: usize,
    total_budget: usize,
    seed: u64,
) -> Result<CilTaskSpec<F>> {
    let num_classes = source.num_classes();
    if num_phases == 0 {
        return Err(Error::validation("a task needs at least one incremental phase"));
    }
    let initial = num_classes / 2;
    let remaining = num_classes - initial;
    if initial == 0 || remaining == 0 || remaining % num_phases != 0 {
        return Err(Error::validation(format!(
            "{num_classes} classes do not split into an initial half plus {num_phases} even phases"
        )));
    }
    let mut rng = seeding::stream(seed, &[tags::TASK, 2]);
    let mut order = source.classes();
    order.shuffle(&mut rng);
    let mut counts = vec![initial];
    counts.extend(std::iter::repeat(remaining / num_phases).take(num_phases));
    build_task(source, order, counts, total_budget, seed)
}

/// The data legally visible in the initial phase of a task: the full training
/// pools of its initial classes, repackaged as a source for pseudo tasks.
pub fn phase_zero_source<F: Real>(task: &CilTaskSpec<F>) -> Result<DatasetSource<F>> {
    let mut samples = Vec::new();
    for &class in task.phase_classes(0) {
        samples.extend(task.train_pool(class).iter().cloned());
    }
    DatasetSource::new(task.dim(), samples)
}

/// Reads the documented dataset format: comma-delimited UTF-8, `#` comment
/// lines ignored, a `dim,num_classes` header, then one
/// `class_id,sample_id,f_1,...,f_dim` row per sample.
pub fn load_dataset<F: Real>(path: impl AsRef<Path>) -> Result<DatasetSource<F>> {
    let file = std::fs::File::open(path.as_ref())?;
    let reader = BufReader::new(file);
    let mut header: Option<(usize, usize)> = None;
    let mut samples = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        match header {
            None => {
                if fields.len() != 2 {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "header must be `dim,num_classes`".into(),
                    });
                }
                let dim = parse_field::<usize>(fields[0], line_no, "dim")?;
                let classes = parse_field::<usize>(fields[1], line_no, "num_classes")?;
                header = Some((dim, classes));
            }
            Some((dim, _)) => {
                if fields.len() != dim + 2 {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!(
                            "expected {} fields (class_id, sample_id, {dim} features), got {}",
                            dim + 2,
                            fields.len()
                        ),
                    });
                }
                let class_id = ClassId(parse_field::<u32>(fields[0], line_no, "class_id")?);
                let sample_id = SampleId(parse_field::<u64>(fields[1], line_no, "sample_id")?);
                let mut features = Vec::with_capacity(dim);
                for raw in &fields[2..] {
                    features.push(F::of(parse_field::<f64>(raw, line_no, "feature")?));
                }
                samples.push(LabeledSample { features, class_id, sample_id });
            }
        }
    }
    let (dim, declared_classes) = header.ok_or(Error::Parse {
        line: 0,
        message: "no classes".into(),
    })?;
    let source = DatasetSource::new(dim, samples)?;
    if source.num_classes() != declared_classes {
        return Err(Error::validation(format!(
            "header declares {declared_classes} classes, file contains {}",
            source.num_classes()
        )));
    }
    Ok(source)
}

fn parse_field<T: std::str::FromStr>(raw: &str, line: usize, what: &str) -> Result<T> {
    raw.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {what}: {raw:?}"),
    })
}

/// Writes the documented dataset format. Extra `#` comment lines may be
/// prepended by the caller via `comments`.
pub fn write_dataset<F: Real>(
    source: &DatasetSource<F>,
    path: impl AsRef<Path>,
    comments: &[String],
) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path.as_ref())?);
    for comment in comments {
        writeln!(file, "# {comment}")?;
    }
    writeln!(file, "{},{}", source.dim(), source.num_classes())?;
    for (class, pool) in source.iter_classes() {
        for sample in pool {
            write!(file, "{},{}", class.0, sample.sample_id.0)?;
            for x in &sample.features {
                write!(file, ",{}", x.as_f64())?;
            }
            writeln!(file)?;
        }
    }
    file.flush()?;
    Ok(())
}
