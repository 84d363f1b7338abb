//! Sequential batch sampling.
//!
//! Instead of fitting one posterior to all the data, the learner
//! processes `b` batches: a space-filling initial design, then batches
//! screened for high predictive volatility under the current posterior.
//! Each step minimizes the risk bound with the previous posterior as
//! prior, so information accumulates through the prior rather than
//! through a growing sample.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::bound::{minimize_bound, BoundConfig, BoundReport};
use crate::dataset::LabeledDataset;
use crate::datagen::SyntheticTask;
use crate::error::{Error, Result};
use crate::mixture::{self, ClipRule, LossSpec, MixtureDistribution};
use crate::models::{generate_candidates, CandidateConfig};
use crate::pool::CandidatePool;
use crate::seeds;

/// Volatility thresholds for the acquisition steps `2…b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GammaSchedule {
    /// Per-step threshold = median volatility of the screened batches.
    Auto,
    /// Explicit thresholds `γ_2…γ_b` (length `b − 1`).
    Explicit(Vec<f64>),
}

/// Controls for [`sbs_run`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbsConfig {
    /// Number of steps `b ≥ 1`.
    pub steps: usize,
    /// Samples per batch (and in the initial design), `≥ 2`.
    pub batch_size: usize,
    pub gamma: GammaSchedule,
    /// Candidate batches screened per acquisition step.
    pub candidate_budget: usize,
    /// Bound and optimizer settings. When `clip` is set, the loss clip
    /// is derived from the initial design's responses by that rule and
    /// kept fixed for the whole run; otherwise `bound.loss` applies
    /// unchanged.
    pub bound: BoundConfig,
    pub clip: Option<ClipRule>,
}

impl SbsConfig {
    pub fn new(steps: usize, batch_size: usize) -> Self {
        Self {
            steps,
            batch_size,
            gamma: GammaSchedule::Auto,
            candidate_budget: 200,
            bound: BoundConfig::new(LossSpec { clip_scale: 1.0 }),
            clip: Some(ClipRule::ResponseRange),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidArgument("steps must be at least 1".into()));
        }
        if self.batch_size < 2 {
            return Err(Error::InvalidArgument(
                "batch_size must be at least 2".into(),
            ));
        }
        if self.candidate_budget == 0 {
            return Err(Error::InvalidArgument(
                "candidate_budget must be at least 1".into(),
            ));
        }
        if let GammaSchedule::Explicit(g) = &self.gamma {
            if g.len() != self.steps - 1 {
                return Err(Error::InvalidArgument(format!(
                    "gamma has length {}, expected steps − 1 = {}",
                    g.len(),
                    self.steps - 1
                )));
            }
            if g.iter().any(|&v| v < 0.0) {
                return Err(Error::InvalidArgument(
                    "gamma thresholds must be nonnegative".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Where labeled samples come from: a synthetic task that labels any
/// requested point, or a finite pre-labeled pool consumed without
/// replacement.
#[derive(Debug, Clone)]
pub enum LabelSource {
    Generator(SyntheticTask),
    Pool(LabeledDataset),
}

/// One step of a run: the batch it consumed and the bound it reached.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SbsStep {
    pub step: usize,
    pub dataset: LabeledDataset,
    pub report: BoundReport,
    /// Threshold applied during acquisition; `None` for the initial design.
    pub gamma: Option<f64>,
    /// Volatility of the chosen batch under the previous posterior.
    pub batch_volatility: Option<f64>,
}

/// Result of [`sbs_run`].
#[derive(Debug, Clone)]
pub struct SbsRun {
    pub posterior: MixtureDistribution,
    pub pool: CandidatePool,
    pub trace: Vec<SbsStep>,
}

// Pool-mode bookkeeping: which rows are still unconsumed.
struct PoolState<'a> {
    data: &'a LabeledDataset,
    available: Vec<usize>,
}

impl<'a> PoolState<'a> {
    fn new(data: &'a LabeledDataset) -> Self {
        Self {
            data,
            available: (0..data.len()).collect(),
        }
    }

    fn take(&mut self, chosen: &[usize]) -> Result<LabeledDataset> {
        let rows: Vec<usize> = chosen.iter().map(|&c| self.available[c]).collect();
        let batch = self.data.subset(&rows)?;
        let mut remove: Vec<usize> = chosen.to_vec();
        remove.sort_unstable_by(|a, b| b.cmp(a));
        for c in remove {
            self.available.swap_remove(c);
        }
        Ok(batch)
    }
}

fn maximin_indices(data: &LabeledDataset, n: usize) -> Vec<usize> {
    let rows = data.features();
    let d = data.dim();
    let mut centroid = vec![0.0; d];
    for row in rows {
        for (c, v) in centroid.iter_mut().zip(row) {
            *c += v;
        }
    }
    for c in &mut centroid {
        *c /= rows.len() as f64;
    }
    let sq_dist = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
    };

    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    let mut best = 0;
    for (i, row) in rows.iter().enumerate() {
        if sq_dist(row, &centroid) < sq_dist(&rows[best], &centroid) {
            best = i;
        }
    }
    chosen.push(best);
    let mut min_dist: Vec<f64> = rows.iter().map(|r| sq_dist(r, &rows[best])).collect();
    while chosen.len() < n {
        let mut next = usize::MAX;
        let mut next_dist = f64::NEG_INFINITY;
        for (i, &dist) in min_dist.iter().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            if dist > next_dist {
                next_dist = dist;
                next = i;
            }
        }
        chosen.push(next);
        for (i, dist) in min_dist.iter_mut().enumerate() {
            *dist = dist.min(sq_dist(&rows[i], &rows[next]));
        }
    }

    // The greedy pass alone can miss the pairwise-maximin optimum (its
    // centroid start may sit inside the hull); deterministic
    // first-improvement swaps fix that.
    if n >= 2 && n < rows.len() {
        let objective = |set: &[usize]| -> f64 {
            let mut worst = f64::INFINITY;
            for (a, &i) in set.iter().enumerate() {
                for &j in &set[a + 1..] {
                    worst = worst.min(sq_dist(&rows[i], &rows[j]));
                }
            }
            worst
        };
        let mut current = objective(&chosen);
        for _pass in 0..64 {
            let mut improved = false;
            'swap: for pos in 0..chosen.len() {
                for candidate in 0..rows.len() {
                    if chosen.contains(&candidate) {
                        continue;
                    }
                    let was = chosen[pos];
                    chosen[pos] = candidate;
                    let trial = objective(&chosen);
                    if trial > current {
                        current = trial;
                        improved = true;
                        continue 'swap;
                    }
                    chosen[pos] = was;
                }
            }
            if !improved {
                break;
            }
        }
    }
    chosen
}

fn latin_hypercube(task: &SyntheticTask, n: usize, rng: &mut ChaCha12Rng) -> Vec<Vec<f64>> {
    let d = task.dim();
    let mut points = vec![vec![0.0; d]; n];
    for j in 0..d {
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(rng);
        for (i, point) in points.iter_mut().enumerate() {
            let u = (strata[i] as f64 + rng.random::<f64>()) / n as f64;
            point[j] = task.marginal_quantile(j, u);
        }
    }
    points
}

/// Initial space-filling design of size `n`.
///
/// Generator mode stratifies each coordinate with a Latin hypercube and
/// maps the levels through the marginal quantiles before labeling; pool
/// mode takes a greedy maximin subset (seeded only in generator mode).
pub fn space_filling_design(
    source: &LabelSource,
    n: usize,
    seed: u64,
) -> Result<LabeledDataset> {
    if n < 2 {
        return Err(Error::InvalidArgument(
            "the initial design needs at least 2 points".into(),
        ));
    }
    match source {
        LabelSource::Generator(task) => {
            let mut design_rng = seeds::stream_rng(seed, seeds::DESIGN, 0);
            let points = latin_hypercube(task, n, &mut design_rng);
            let mut label_rng = seeds::stream_rng(seed, seeds::DESIGN, 1);
            task.label(points, &mut label_rng)
        }
        LabelSource::Pool(data) => {
            if data.len() < n {
                return Err(Error::InvalidArgument(format!(
                    "pool has {} points, design needs {n}",
                    data.len()
                )));
            }
            data.subset(&maximin_indices(data, n))
        }
    }
}

// Candidate batches for one acquisition step, their volatilities, and
// (pool mode) their index sets relative to `available`.
struct Screened {
    volatilities: Vec<f64>,
    features: Vec<Vec<Vec<f64>>>,
    picks: Vec<Vec<usize>>,
}

fn screen_batches(
    mixture: &MixtureDistribution,
    pool: &CandidatePool,
    source: &LabelSource,
    available: Option<&PoolState>,
    batch_size: usize,
    budget: usize,
    rng: &mut ChaCha12Rng,
) -> Result<Screened> {
    let mut volatilities = Vec::with_capacity(budget);
    let mut features = Vec::with_capacity(budget);
    let mut picks = Vec::with_capacity(budget);
    for _ in 0..budget {
        let batch: Vec<Vec<f64>> = match source {
            LabelSource::Generator(task) => task.sample_features(batch_size, rng),
            LabelSource::Pool(data) => {
                let avail_len = available.map_or(data.len(), |p| p.available.len());
                if avail_len < batch_size {
                    return Err(Error::InvalidArgument(
                        "pool is exhausted: not enough points left for a batch".into(),
                    ));
                }
                let pick = rand::seq::index::sample(rng, avail_len, batch_size).into_vec();
                let rows: Vec<Vec<f64>> = pick
                    .iter()
                    .map(|&c| {
                        let row = available.map_or(c, |p| p.available[c]);
                        data.feature_row(row).to_vec()
                    })
                    .collect();
                picks.push(pick);
                rows
            }
        };
        volatilities.push(mixture::volatility(mixture, pool, &batch)?);
        features.push(batch);
    }
    Ok(Screened {
        volatilities,
        features,
        picks,
    })
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

// First batch exceeding the threshold, else the most volatile one.
fn pick_winner(volatilities: &[f64], gamma: f64) -> (usize, f64) {
    for (i, &v) in volatilities.iter().enumerate() {
        if v > gamma {
            return (i, v);
        }
    }
    let mut best = 0;
    for (i, &v) in volatilities.iter().enumerate() {
        if v > volatilities[best] {
            best = i;
        }
    }
    (best, volatilities[best])
}

/// Screens up to `budget` random batches of size `batch_size` and
/// returns the first whose volatility under `mixture` exceeds `gamma`
/// (`None` = median of the screened batches), falling back to the most
/// volatile candidate when none passes.
pub fn select_batch(
    mixture: &MixtureDistribution,
    pool: &CandidatePool,
    source: &LabelSource,
    batch_size: usize,
    gamma: Option<f64>,
    budget: usize,
    seed: u64,
) -> Result<LabeledDataset> {
    if batch_size < 2 {
        return Err(Error::InvalidArgument(
            "batch_size must be at least 2".into(),
        ));
    }
    let mut rng = seeds::stream_rng(seed, seeds::BATCH, 0);
    let screened = screen_batches(mixture, pool, source, None, batch_size, budget, &mut rng)?;
    let threshold = gamma.unwrap_or_else(|| median(&screened.volatilities));
    let (winner, _) = pick_winner(&screened.volatilities, threshold);
    match source {
        LabelSource::Generator(task) => {
            let mut label_rng = seeds::stream_rng(seed, seeds::BATCH, 1);
            task.label(screened.features[winner].clone(), &mut label_rng)
        }
        LabelSource::Pool(data) => {
            let rows = &screened.picks[winner];
            data.subset(rows)
        }
    }
}

/// Runs the full sequential procedure:
///
/// 1. initial design `B₁`, candidate pool fitted on it, `ξ₁` = bound
///    minimizer on `B₁` with the uniform prior;
/// 2. for `i = 2…b`: refit the pool on `B₁ ∪ … ∪ B_{i−1}` (so both the
///    prior `ξ_{i−1}` and the candidate functions predate `B_i`), screen
///    batches under `ξ_{i−1}`, take `B_i`, and set `ξ_i` = bound
///    minimizer on `B_i` with prior `ξ_{i−1}`.
///
/// The pool keeps the same class layout across refits, so each step's
/// posterior transports structurally onto the next step's pool (class
/// `k` stays "the `k`-variable model", refitted on everything observed
/// so far). Returns the final posterior, the final pool, and one trace
/// entry per step.
pub fn sbs_run(
    source: &LabelSource,
    candidate_cfg: &CandidateConfig,
    cfg: &SbsConfig,
    seed: u64,
) -> Result<SbsRun> {
    cfg.validate()?;
    if let LabelSource::Pool(data) = source {
        if data.len() < cfg.steps * cfg.batch_size {
            return Err(Error::InvalidArgument(format!(
                "pool has {} points, the run needs {}",
                data.len(),
                cfg.steps * cfg.batch_size
            )));
        }
    }

    let (init, mut pool_state) = match source {
        LabelSource::Generator(_) => (
            space_filling_design(source, cfg.batch_size, seeds::mix(seed, 0))?,
            None,
        ),
        LabelSource::Pool(data) => {
            let mut state = PoolState::new(data);
            let chosen = maximin_indices(data, cfg.batch_size);
            let init = state.take(&chosen)?;
            (init, Some(state))
        }
    };

    let mut bound_cfg = cfg.bound;
    if let Some(rule) = cfg.clip {
        bound_cfg.loss = rule.loss_for(&init);
    }

    let mut pool = generate_candidates(&init, candidate_cfg)?.pool;
    let prior = MixtureDistribution::uniform(&pool);
    let (mut posterior, report) = minimize_bound(&prior, &pool, &init, &bound_cfg)?;

    let mut trace = vec![SbsStep {
        step: 1,
        dataset: init,
        report,
        gamma: None,
        batch_volatility: None,
    }];

    for i in 2..=cfg.steps {
        // Everything observed before this step's batch.
        let seen: Vec<&LabeledDataset> = trace.iter().map(|t| &t.dataset).collect();
        let observed = LabeledDataset::concat(&seen)?;
        let refit = generate_candidates(&observed, candidate_cfg)?.pool;
        if !refit.same_shape(&pool) {
            return Err(Error::ShapeMismatch(
                "refitted pool changed layout across steps".into(),
            ));
        }
        pool = refit;

        let step_seed = seeds::mix(seed, i as u64);
        let mut rng = seeds::stream_rng(step_seed, seeds::BATCH, 0);
        let screened = screen_batches(
            &posterior,
            &pool,
            source,
            pool_state.as_ref(),
            cfg.batch_size,
            cfg.candidate_budget,
            &mut rng,
        )?;
        let threshold = match &cfg.gamma {
            GammaSchedule::Auto => median(&screened.volatilities),
            GammaSchedule::Explicit(g) => g[i - 2],
        };
        let (winner, winner_vol) = pick_winner(&screened.volatilities, threshold);
        let batch = match (&mut pool_state, source) {
            (Some(state), _) => state.take(&screened.picks[winner])?,
            (None, LabelSource::Generator(task)) => {
                let mut label_rng = seeds::stream_rng(step_seed, seeds::BATCH, 1);
                task.label(screened.features[winner].clone(), &mut label_rng)?
            }
            (None, LabelSource::Pool(_)) => unreachable!("pool sources carry state"),
        };

        let (next, report) = minimize_bound(&posterior, &pool, &batch, &bound_cfg)?;
        posterior = next;
        trace.push(SbsStep {
            step: i,
            dataset: batch,
            report,
            gamma: Some(threshold),
            batch_volatility: Some(winner_vol),
        });
    }

    Ok(SbsRun {
        posterior,
        pool,
        trace,
    })
}
