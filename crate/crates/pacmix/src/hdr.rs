//! Meta-learning a prior from historical tasks.
//!
//! Each historical task gets its own bound-minimizing posterior `ξ_i`
//! under the uniform prior. Cross-validated likelihood weighting then
//! scores how well each `ξ_j` transfers to every other task: the task is
//! split, a posterior is fitted on the training half with prior `ξ_j`,
//! and its validation half is scored by the density product
//! `Π q((y − f̂)/σ̂) / Π σ̂`. The learned prior for a new task is the
//! weighted combination `ξ* = Σ_j w_j ξ_j`.
//!
//! Mixtures move between tasks structurally: class `k` means "the
//! `k`-variable model of that task", so pools built with the same
//! candidate configuration align index-by-index even though the fitted
//! coefficients differ per task.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::bound::{minimize_bound, BoundConfig, BoundReport};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::mixture::{self, LossSpec, MixtureDistribution};
use crate::models::{estimate_sigma, generate_candidates, CandidateConfig, ErrorDensity};
use crate::pool::CandidatePool;
use crate::seeds;

/// One historical task: its data, split, pool, and learned prior.
#[derive(Debug, Clone)]
pub struct TaskBundle {
    pub dataset: LabeledDataset,
    /// Fraction of each split used for training, in `(0, 1)`.
    pub split_fraction: f64,
    pub pool: CandidatePool,
    pub prior: MixtureDistribution,
}

impl TaskBundle {
    /// Training-half size under the bundle's split fraction: at least 2
    /// (the bound needs it) and at most `n − 1` (validation nonempty).
    fn train_size(&self) -> usize {
        let n = self.dataset.len();
        let raw = (self.split_fraction * n as f64).floor() as usize;
        raw.clamp(2, n - 1)
    }
}

/// Controls for [`hdr_learn_prior`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HdrConfig {
    /// Number of random data segmentations averaged per task pair.
    pub repeats: usize,
    pub split_fraction: f64,
    /// Known standardized error density `q`.
    pub density: ErrorDensity,
}

impl Default for HdrConfig {
    fn default() -> Self {
        Self {
            repeats: 20,
            split_fraction: 0.5,
            density: ErrorDensity::StandardNormal,
        }
    }
}

/// Likelihood score of a posterior predictor on a validation set,
/// carried in both log and linear form so downstream normalization can
/// use log-sum-exp even when the linear value underflows to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodWeight {
    pub log_value: f64,
    pub value: f64,
}

/// Cross-task likelihood scores. Row `i` holds scores of every prior
/// `ξ_j` evaluated on task `i` (`j ≠ i`; diagonals stay 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightMatrix {
    /// Mean linear likelihood scores `E_j^i` over repeats.
    pub raw: Vec<Vec<f64>>,
    /// Row-normalized scores averaged over repeats, `w_j^{(i)}`.
    pub per_task: Vec<Vec<f64>>,
    /// Final simplex weights `w_j` of the combined prior.
    pub final_weights: Vec<f64>,
}

/// Fits each task's pool and bound-minimizing posterior under the
/// uniform prior. All tasks must share feature dimension and response
/// arity so their pools align structurally.
pub fn fit_task_priors(
    tasks: &[LabeledDataset],
    candidate_cfg: &CandidateConfig,
    bound_cfg: &BoundConfig,
    split_fraction: f64,
) -> Result<Vec<TaskBundle>> {
    if tasks.len() < 2 {
        return Err(Error::InvalidArgument(
            "the meta-learner needs at least 2 historical tasks".into(),
        ));
    }
    if !(split_fraction > 0.0 && split_fraction < 1.0) {
        return Err(Error::InvalidArgument(
            "split_fraction must lie in (0, 1)".into(),
        ));
    }
    let d = tasks[0].dim();
    let arity = tasks[0].arity();
    for (i, task) in tasks.iter().enumerate() {
        if task.dim() != d || task.arity() != arity {
            return Err(Error::ShapeMismatch(format!(
                "task {i} has shape ({}, {}), expected ({d}, {arity})",
                task.dim(),
                task.arity()
            )));
        }
        if task.len() < 3 {
            return Err(Error::InvalidArgument(format!(
                "task {i} has {} samples; splitting needs at least 3",
                task.len()
            )));
        }
    }

    tasks
        .iter()
        .map(|dataset| {
            let pool = generate_candidates(dataset, candidate_cfg)?.pool;
            let cfg = BoundConfig {
                loss: LossSpec::for_dataset(dataset),
                ..*bound_cfg
            };
            let prior_0 = MixtureDistribution::uniform(&pool);
            let (prior, _) = minimize_bound(&prior_0, &pool, dataset, &cfg)?;
            Ok(TaskBundle {
                dataset: dataset.clone(),
                split_fraction,
                pool,
                prior,
            })
        })
        .collect()
}

/// Validation-set likelihood of a mixture predictor with noise scale
/// `sigma`: `exp( Σ_α [ln q((y_α − f̂(x_α))/σ̂) − ln σ̂] )`.
pub fn likelihood_weight(
    posterior: &MixtureDistribution,
    pool: &CandidatePool,
    sigma: f64,
    validation: &LabeledDataset,
    density: &ErrorDensity,
) -> Result<LikelihoodWeight> {
    if validation.is_empty() {
        return Err(Error::InvalidArgument(
            "validation set must be nonempty".into(),
        ));
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument("sigma must be positive".into()));
    }
    let ys = validation.scalar_responses()?;
    let mut log_value = 0.0;
    for (i, &y) in ys.iter().enumerate() {
        let pred = mixture::predict(posterior, pool, validation.feature_row(i))?.scalar();
        log_value += density.log_density_at((y - pred) / sigma) - sigma.ln();
    }
    Ok(LikelihoodWeight {
        log_value,
        value: log_value.exp(),
    })
}

// Processing order sorted by dataset content hash: reductions then sum
// in the same order no matter how the caller arranged the tasks, which
// makes the learner permutation-equivariant bit-for-bit.
fn canonical_order(bundles: &[TaskBundle]) -> Vec<usize> {
    let mut order: Vec<(u64, usize)> = bundles
        .iter()
        .enumerate()
        .map(|(i, b)| (b.dataset.content_hash(), i))
        .collect();
    order.sort();
    order.into_iter().map(|(_, i)| i).collect()
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Learns the combined prior `ξ* = Σ_j w_j ξ_j` plus the weight matrix
/// behind it.
///
/// For each repeat and task `i`, the task is split by a stream keyed to
/// its *content* (not its position); every other prior is refitted on
/// the training half and scored on the validation half. Scores
/// normalize per `(i, repeat)` row via log-sum-exp, average over
/// repeats, then over rows, and finally renormalize onto the simplex.
/// Rows whose scores all underflow fall back to uniform.
pub fn hdr_learn_prior(
    bundles: &[TaskBundle],
    candidate_cfg: &CandidateConfig,
    bound_cfg: &BoundConfig,
    hdr_cfg: &HdrConfig,
    seed: u64,
) -> Result<(MixtureDistribution, WeightMatrix)> {
    let m = bundles.len();
    if m < 2 {
        return Err(Error::InvalidArgument(
            "the meta-learner needs at least 2 historical tasks".into(),
        ));
    }
    if hdr_cfg.repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be at least 1".into()));
    }
    if bundles.iter().any(|b| b.dataset.is_classification()) {
        return Err(Error::InvalidArgument(
            "likelihood weighting requires scalar responses".into(),
        ));
    }
    let shape = bundles[0].pool.class_sizes();
    for (i, b) in bundles.iter().enumerate() {
        if b.pool.class_sizes() != shape {
            return Err(Error::ShapeMismatch(format!(
                "task {i} pool layout differs; tasks must share the candidate configuration"
            )));
        }
        b.prior.check_matches(&b.pool)?;
    }
    let density = ErrorDensity::new(hdr_cfg.density)?;

    let order = canonical_order(bundles);
    // (repeat, evaluation task) cells are independent; compute them in
    // parallel and reduce in canonical order afterwards.
    use rayon::prelude::*;
    let cells: Vec<(usize, usize, Vec<f64>)> = (0..hdr_cfg.repeats)
        .into_par_iter()
        .flat_map(|rep| {
            order
                .par_iter()
                .map(move |&i| (rep, i))
                .map(|(rep, i)| -> Result<(usize, usize, Vec<f64>)> {
                    let bundle = &bundles[i];
                    let n = bundle.dataset.len();
                    let task_seed = seeds::mix(seed, bundle.dataset.content_hash());
                    let mut rng = seeds::stream_rng(task_seed, seeds::SPLIT, rep as u64);
                    let mut indices: Vec<usize> = (0..n).collect();
                    indices.shuffle(&mut rng);
                    let n_train = bundle.train_size();
                    let train = bundle.dataset.subset(&indices[..n_train])?;
                    let validation = bundle.dataset.subset(&indices[n_train..])?;

                    let pool = generate_candidates(&train, candidate_cfg)?.pool;
                    if pool.class_sizes() != bundles[i].pool.class_sizes() {
                        return Err(Error::ShapeMismatch(
                            "training-half pool layout differs from the task pool".into(),
                        ));
                    }
                    let cfg = BoundConfig {
                        loss: LossSpec::for_dataset(&train),
                        ..*bound_cfg
                    };
                    let mut logs = vec![f64::NEG_INFINITY; m];
                    for &j in &order {
                        if j == i {
                            continue;
                        }
                        let (posterior, _) =
                            minimize_bound(&bundles[j].prior, &pool, &train, &cfg)?;
                        let sigma = estimate_sigma(&posterior, &pool, &train)?;
                        let lw =
                            likelihood_weight(&posterior, &pool, sigma, &validation, &density)?;
                        logs[j] = lw.log_value;
                    }
                    Ok((rep, i, logs))
                })
                .collect::<Vec<_>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut raw = vec![vec![0.0; m]; m];
    let mut per_task = vec![vec![0.0; m]; m];
    for (_, i, logs) in &cells {
        let i = *i;
        let off_diagonal: Vec<f64> = order
            .iter()
            .filter(|&&j| j != i)
            .map(|&j| logs[j])
            .collect();
        let lse = log_sum_exp(&off_diagonal);
        for &j in &order {
            if j == i {
                continue;
            }
            raw[i][j] += logs[j].exp() / hdr_cfg.repeats as f64;
            let w = if lse == f64::NEG_INFINITY {
                1.0 / (m - 1) as f64
            } else {
                (logs[j] - lse).exp()
            };
            per_task[i][j] += w / hdr_cfg.repeats as f64;
        }
    }

    // Average each column over the rows where it appears, then
    // renormalize onto the simplex.
    let mut sums = vec![0.0; m];
    for &j in &order {
        for &i in &order {
            if i != j {
                sums[j] += per_task[i][j];
            }
        }
    }
    let total: f64 = order.iter().map(|&j| sums[j]).sum();
    if !(total > 0.0) {
        return Err(Error::Numerical(
            "all likelihood weights vanished; cannot combine priors".into(),
        ));
    }
    let final_weights: Vec<f64> = sums.iter().map(|s| s / total).collect();

    let ordered_weights: Vec<f64> = order.iter().map(|&j| final_weights[j]).collect();
    let ordered_priors: Vec<&MixtureDistribution> =
        order.iter().map(|&j| &bundles[j].prior).collect();
    let combined = MixtureDistribution::convex_combination(&ordered_weights, &ordered_priors)?;

    Ok((
        combined,
        WeightMatrix {
            raw,
            per_task,
            final_weights,
        },
    ))
}

/// Result of consuming a learned prior on a new task.
#[derive(Debug, Clone)]
pub struct HdrPosterior {
    pub posterior: MixtureDistribution,
    pub pool: CandidatePool,
    pub report: BoundReport,
}

/// Runs the base learner on a new task with the combined prior: the new
/// task's pool is generated with the same candidate configuration, and
/// the prior transports onto it structurally.
pub fn hdr_posterior(
    prior: &MixtureDistribution,
    new_task: &LabeledDataset,
    candidate_cfg: &CandidateConfig,
    bound_cfg: &BoundConfig,
) -> Result<HdrPosterior> {
    let pool = generate_candidates(new_task, candidate_cfg)?.pool;
    prior.check_matches(&pool).map_err(|_| {
        Error::ShapeMismatch(
            "new task pool does not align with the learned prior; \
             use the same candidate configuration and dimension"
                .into(),
        )
    })?;
    let cfg = BoundConfig {
        loss: LossSpec::for_dataset(new_task),
        ..*bound_cfg
    };
    let (posterior, report) = minimize_bound(prior, &pool, new_task, &cfg)?;
    Ok(HdrPosterior {
        posterior,
        pool,
        report,
    })
}
