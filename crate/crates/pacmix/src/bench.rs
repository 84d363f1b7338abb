//! Evaluation harness: prediction error against the true signal,
//! volatility, Monte-Carlo repetition with seed streams, the
//! single-model-selection baseline, and the stock experiment grids.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bound::{minimize_bound, pac_bound, BoundConfig, BoundReport};
use crate::dataset::LabeledDataset;
use crate::datagen::{self, SyntheticKind, SyntheticSpec, SyntheticTask};
use crate::error::{Error, Result};
use crate::hdr::{fit_task_priors, hdr_learn_prior, hdr_posterior, HdrConfig};
use crate::mixture::{self, ClipRule, LossSpec, MixtureDistribution};
use crate::models::{fit_ridge, generate_candidates, CandidateConfig};
use crate::pool::CandidatePool;
use crate::predictor::Predictor;
use crate::sbs::{sbs_run, LabelSource, SbsConfig};
use crate::seeds;

/// The learners the harness can compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Bound minimization with the uniform prior.
    Rbm,
    /// Sequential batch sampling.
    Sbs,
    /// Historical-data prior, then bound minimization.
    Hdr,
    /// Cross-validated single-model selection (point mass, volatility 0).
    Baseline,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Rbm, Method::Sbs, Method::Hdr, Method::Baseline];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Rbm => "rbm",
            Method::Sbs => "sbs",
            Method::Hdr => "hdr",
            Method::Baseline => "baseline",
        };
        f.write_str(s)
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rbm" => Ok(Method::Rbm),
            "sbs" => Ok(Method::Sbs),
            "hdr" => Ok(Method::Hdr),
            "baseline" => Ok(Method::Baseline),
            other => Err(Error::InvalidArgument(format!(
                "unknown method '{other}' (expected rbm|sbs|hdr|baseline)"
            ))),
        }
    }
}

/// Mean squared deviation between the mixture prediction and the true
/// signal values over a test set.
pub fn mspe(
    mixture: &MixtureDistribution,
    pool: &CandidatePool,
    test_features: &[Vec<f64>],
    true_f: &[f64],
) -> Result<f64> {
    if test_features.is_empty() {
        return Err(Error::InvalidArgument("test set must be nonempty".into()));
    }
    if test_features.len() != true_f.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} test points but {} signal values",
            test_features.len(),
            true_f.len()
        )));
    }
    let mut total = 0.0;
    for (x, &f) in test_features.iter().zip(true_f) {
        let pred = mixture::predict(mixture, pool, x)?.scalar();
        total += (f - pred) * (f - pred);
    }
    Ok(total / test_features.len() as f64)
}

/// Picks the single candidate with the lowest k-fold cross-validation
/// MSE and returns the point mass on it (ties toward the smaller pool
/// index). Ridge candidates are refitted per fold on their own subset
/// and penalty; other predictors are scored as fixed functions. The
/// result has volatility exactly 0 on any point set.
pub fn baseline_select_single(
    pool: &CandidatePool,
    s: &LabeledDataset,
    folds: usize,
    seed: u64,
) -> Result<MixtureDistribution> {
    if folds < 2 {
        return Err(Error::InvalidArgument("folds must be at least 2".into()));
    }
    if s.len() < folds {
        return Err(Error::InvalidArgument(format!(
            "{} samples cannot form {folds} folds",
            s.len()
        )));
    }
    let ys = s.scalar_responses()?;
    let mut order: Vec<usize> = (0..s.len()).collect();
    let mut rng = seeds::stream_rng(seed, seeds::FOLDS, 0);
    order.shuffle(&mut rng);

    let mut best: Option<(usize, usize, f64)> = None;
    for (k, j, model) in pool.iter_models() {
        let mut sq_sum = 0.0;
        for fold in 0..folds {
            let held: Vec<usize> = order
                .iter()
                .copied()
                .skip(fold)
                .step_by(folds)
                .collect();
            let train: Vec<usize> = order
                .iter()
                .copied()
                .filter(|i| !held.contains(i))
                .collect();
            let fold_model: Predictor = match &model.predictor {
                Predictor::Linear(fp) => {
                    let train_set = s.subset(&train)?;
                    Predictor::Linear(fit_ridge(&train_set, &fp.subset, fp.ridge_lambda)?)
                }
                other => other.clone(),
            };
            for &i in &held {
                let pred = fold_model.predict_scalar(s.feature_row(i));
                sq_sum += (ys[i] - pred) * (ys[i] - pred);
            }
        }
        let cv_mse = sq_sum / s.len() as f64;
        if best.map_or(true, |(_, _, b)| cv_mse < b) {
            best = Some((k, j, cv_mse));
        }
    }
    let (k, j, _) = best.expect("pool is nonempty");
    MixtureDistribution::point_mass(pool, k, j)
}

/// Historical tasks generated fresh each repetition for the
/// historical-data learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistorySpec {
    pub specs: Vec<SyntheticSpec>,
}

/// Everything one comparison run needs.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    /// Training-data distribution (the "new task" when history is set).
    pub data: SyntheticSpec,
    /// Held-out points per repetition.
    pub test_size: usize,
    pub candidate: CandidateConfig,
    /// Bound/optimizer settings; the loss clip is re-derived from each
    /// repetition's training responses by `clip`.
    pub bound: BoundConfig,
    pub clip: ClipRule,
    pub sbs: Option<SbsConfig>,
    pub history: Option<HistorySpec>,
    pub hdr: HdrConfig,
    /// Folds of the single-model baseline.
    pub folds: usize,
    /// Separate seed for test sets; fitted posteriors never depend on it.
    pub test_seed: Option<u64>,
}

impl ExperimentSpec {
    pub fn new(data: SyntheticSpec) -> Self {
        Self {
            data,
            test_size: 1000,
            candidate: CandidateConfig::default(),
            bound: BoundConfig::new(LossSpec { clip_scale: 1.0 }),
            clip: ClipRule::ResponseRange,
            sbs: None,
            history: None,
            hdr: HdrConfig::default(),
            folds: 5,
            test_seed: None,
        }
    }
}

/// Metrics of one repetition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepRecord {
    pub rep: usize,
    pub mspe: f64,
    pub volatility: f64,
    pub bound: BoundReport,
}

/// Aggregated metrics of one method across repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: Method,
    pub reps: usize,
    pub per_rep: Vec<RepRecord>,
    pub mean_mspe: f64,
    pub se_mspe: f64,
    pub mean_volatility: f64,
    pub se_volatility: f64,
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

impl EvalReport {
    fn from_records(method: Method, per_rep: Vec<RepRecord>) -> Self {
        let mspes: Vec<f64> = per_rep.iter().map(|r| r.mspe).collect();
        let vols: Vec<f64> = per_rep.iter().map(|r| r.volatility).collect();
        let (mean_mspe, se_mspe) = mean_and_se(&mspes);
        let (mean_volatility, se_volatility) = mean_and_se(&vols);
        Self {
            method,
            reps: per_rep.len(),
            per_rep,
            mean_mspe,
            se_mspe,
            mean_volatility,
            se_volatility,
        }
    }
}

fn fit_one_method(
    method: Method,
    spec: &ExperimentSpec,
    train: &LabeledDataset,
    rep_seed: u64,
) -> Result<(MixtureDistribution, CandidatePool, BoundReport)> {
    let bound_cfg = BoundConfig {
        loss: spec.clip.loss_for(train),
        ..spec.bound
    };
    match method {
        Method::Rbm => {
            let pool = generate_candidates(train, &spec.candidate)?.pool;
            let prior = MixtureDistribution::uniform(&pool);
            let (posterior, report) = minimize_bound(&prior, &pool, train, &bound_cfg)?;
            Ok((posterior, pool, report))
        }
        Method::Baseline => {
            let pool = generate_candidates(train, &spec.candidate)?.pool;
            let point =
                baseline_select_single(&pool, train, spec.folds, seeds::mix(rep_seed, 4))?;
            let report = pac_bound(
                &point,
                &MixtureDistribution::uniform(&pool),
                &pool,
                train,
                &bound_cfg,
            )?;
            Ok((point, pool, report))
        }
        Method::Sbs => {
            let cfg = spec.sbs.as_ref().ok_or_else(|| {
                Error::InvalidArgument("method sbs needs an sbs configuration".into())
            })?;
            let mut cfg = cfg.clone();
            cfg.bound = spec.bound;
            cfg.clip = Some(spec.clip);
            let mut data_spec = spec.data.clone();
            data_spec.seed = seeds::mix(rep_seed, 2);
            let task = SyntheticTask::new(data_spec)?;
            let run = sbs_run(
                &LabelSource::Generator(task),
                &spec.candidate,
                &cfg,
                seeds::mix(rep_seed, 2),
            )?;
            let report = run.trace.last().expect("trace nonempty").report;
            Ok((run.posterior, run.pool, report))
        }
        Method::Hdr => {
            let history = spec.history.as_ref().ok_or_else(|| {
                Error::InvalidArgument("method hdr needs historical task specs".into())
            })?;
            let mut tasks = Vec::with_capacity(history.specs.len());
            for (t, base) in history.specs.iter().enumerate() {
                let mut hspec = base.clone();
                hspec.seed = seeds::mix(seeds::mix(rep_seed, 3), t as u64);
                tasks.push(datagen::generate(&hspec)?.dataset);
            }
            let bundles = fit_task_priors(
                &tasks,
                &spec.candidate,
                &spec.bound,
                spec.hdr.split_fraction,
            )?;
            let (combined, _) = hdr_learn_prior(
                &bundles,
                &spec.candidate,
                &spec.bound,
                &spec.hdr,
                seeds::mix(rep_seed, 5),
            )?;
            let fitted = hdr_posterior(&combined, train, &spec.candidate, &spec.bound)?;
            Ok((fitted.posterior, fitted.pool, fitted.report))
        }
    }
}

/// Runs each method `reps` times on fresh training data (and fresh
/// history for the historical-data learner), evaluating prediction
/// error and volatility on a fresh test set per repetition.
///
/// Fully seeded: posteriors depend only on `seed`, the test sets only on
/// `test_seed` (default derived from `seed`), and repetitions run in
/// parallel with independent streams.
pub fn run_comparison(
    spec: &ExperimentSpec,
    methods: &[Method],
    reps: usize,
    seed: u64,
) -> Result<BTreeMap<Method, EvalReport>> {
    if reps == 0 {
        return Err(Error::InvalidArgument("reps must be at least 1".into()));
    }
    if spec.data.kind == SyntheticKind::ClassificationToy {
        return Err(Error::InvalidArgument(
            "the comparison harness evaluates regression signals".into(),
        ));
    }
    if methods.is_empty() {
        return Err(Error::InvalidArgument("no methods requested".into()));
    }
    if methods.contains(&Method::Sbs) && spec.sbs.is_none() {
        return Err(Error::InvalidArgument(
            "method sbs needs an sbs configuration".into(),
        ));
    }
    if methods.contains(&Method::Hdr)
        && spec.history.as_ref().map_or(true, |h| h.specs.len() < 2)
    {
        return Err(Error::InvalidArgument(
            "method hdr needs at least 2 historical task specs".into(),
        ));
    }

    let test_base = spec.test_seed.unwrap_or(seeds::mix(seed, 0x7E57));
    let noiseless_task = SyntheticTask::new(spec.data.clone())?;

    let rep_results: Vec<BTreeMap<Method, RepRecord>> = (0..reps)
        .into_par_iter()
        .map(|rep| -> Result<BTreeMap<Method, RepRecord>> {
            let rep_seed = seeds::mix(seed, rep as u64);
            let mut train_spec = spec.data.clone();
            train_spec.seed = seeds::mix(rep_seed, 1);
            let train = datagen::generate(&train_spec)?.dataset;

            let mut test_rng =
                seeds::stream_rng(seeds::mix(test_base, rep as u64), seeds::TEST, 0);
            let test_features = noiseless_task.sample_features(spec.test_size, &mut test_rng);
            let true_f: Vec<f64> = test_features
                .iter()
                .map(|x| noiseless_task.noiseless(x))
                .collect();

            let mut records = BTreeMap::new();
            for &method in methods {
                let (posterior, pool, bound) =
                    fit_one_method(method, spec, &train, rep_seed)?;
                let record = RepRecord {
                    rep,
                    mspe: mspe(&posterior, &pool, &test_features, &true_f)?,
                    volatility: mixture::volatility(&posterior, &pool, &test_features)?,
                    bound,
                };
                records.insert(method, record);
            }
            Ok(records)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = BTreeMap::new();
    for &method in methods {
        let per_rep: Vec<RepRecord> = rep_results.iter().map(|r| r[&method]).collect();
        out.insert(method, EvalReport::from_records(method, per_rep));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Stock experiment grids
// ---------------------------------------------------------------------------

/// Linear benchmark models: coefficient pattern, sample size, dimension,
/// and batch count used by the sequential learner (`n/b` per batch).
pub fn linear_model_spec(model: usize, rho: f64, sigma: f64) -> Result<ExperimentSpec> {
    let (n, d, beta, steps): (usize, usize, Vec<f64>, usize) = match model {
        1 => (50, 8, vec![3.0, 1.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0], 5),
        2 => {
            let mut beta = vec![0.0; 50];
            beta[..5].copy_from_slice(&[1.0, 2.0, 3.0, 2.0, 0.75]);
            (150, 50, beta, 5)
        }
        3 => {
            let mut beta = vec![0.0; 50];
            for (j, b) in beta.iter_mut().take(6).enumerate() {
                *b = 1.0 / (j as f64 + 1.0);
            }
            (50, 50, beta, 5)
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown linear model {other} (expected 1, 2, or 3)"
            )))
        }
    };
    let data = SyntheticSpec::linear(n, d, beta, rho, sigma, 0);
    let mut spec = ExperimentSpec::new(data);
    spec.sbs = Some(SbsConfig::new(steps, n / steps));
    // A tighter clip than the response range sharpens the per-candidate
    // risk differences, so at low noise the minimizer concentrates
    // instead of hedging across subset sizes.
    spec.clip = ClipRule::StdTimes(1.5);
    Ok(spec)
}

/// Nonlinear benchmark models (`which` is 1 or 2): 50 samples of an
/// 8-dimensional standard normal, batches of 10.
pub fn nonlinear_model_spec(which: usize) -> Result<ExperimentSpec> {
    let kind = match which {
        1 => SyntheticKind::Nonlinear1,
        2 => SyntheticKind::Nonlinear2,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown nonlinear model {other} (expected 1 or 2)"
            )))
        }
    };
    let data = SyntheticSpec {
        kind,
        n: 50,
        d: 8,
        beta: vec![],
        sigma: 1.0,
        rho: 0.0,
        intercept: 1.0,
        seed: 0,
    };
    let mut spec = ExperimentSpec::new(data);
    spec.sbs = Some(SbsConfig::new(5, 10));
    Ok(spec)
}

/// Transfer benchmark: a 20-sample, 10-dimensional new task with
/// `β = (1, −1, 0, 0, 0.5, 0, …, 0)` and noise level `sigma`, with
/// history drawn from the three linear-model coefficient patterns
/// embedded in the shared dimension (all at `(ρ, σ) = (0, 1)`).
pub fn transfer_spec(sigma: f64) -> ExperimentSpec {
    let d = 10;
    let mut beta = vec![0.0; d];
    beta[0] = 1.0;
    beta[1] = -1.0;
    beta[4] = 0.5;
    let data = SyntheticSpec::linear(20, d, beta, 0.0, sigma, 0);

    // History patterns keep every nonzero coefficient of the three
    // linear models, padded or truncated to the shared dimension.
    let mut h1 = vec![0.0; d];
    h1[..8].copy_from_slice(&[3.0, 1.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0]);
    let mut h2 = vec![0.0; d];
    h2[..5].copy_from_slice(&[1.0, 2.0, 3.0, 2.0, 0.75]);
    let mut h3 = vec![0.0; d];
    for (j, b) in h3.iter_mut().take(6).enumerate() {
        *b = 1.0 / (j as f64 + 1.0);
    }
    let history = HistorySpec {
        specs: vec![
            SyntheticSpec::linear(50, d, h1, 0.0, 1.0, 0),
            SyntheticSpec::linear(150, d, h2, 0.0, 1.0, 0),
            SyntheticSpec::linear(50, d, h3, 0.0, 1.0, 0),
        ],
    };

    let mut spec = ExperimentSpec::new(data);
    spec.history = Some(history);
    spec
}

// ---------------------------------------------------------------------------
// CSV output
// ---------------------------------------------------------------------------

/// One row per repetition: `rep,method,mspe,volatility,bound_total,kl_total`.
pub fn per_rep_csv(reports: &BTreeMap<Method, EvalReport>) -> String {
    let mut out = String::from("rep,method,mspe,volatility,bound_total,kl_total\n");
    let reps = reports.values().map(|r| r.reps).max().unwrap_or(0);
    for rep in 0..reps {
        for report in reports.values() {
            if let Some(record) = report.per_rep.get(rep) {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    record.rep,
                    report.method,
                    record.mspe,
                    record.volatility,
                    record.bound.total,
                    record.bound.kl_total
                );
            }
        }
    }
    out
}

/// Aggregate rows: `method,mean_mspe,se_mspe,mean_vol,se_vol`.
pub fn summary_csv(reports: &BTreeMap<Method, EvalReport>) -> String {
    let mut out = String::from("method,mean_mspe,se_mspe,mean_vol,se_vol\n");
    for report in reports.values() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            report.method,
            report.mean_mspe,
            report.se_mspe,
            report.mean_volatility,
            report.se_volatility
        );
    }
    out
}

/// Two-column plot data (`x,y` per row) for one method across a sweep.
pub fn plot_csv(x_name: &str, points: &[(f64, f64)]) -> String {
    let mut out = format!("{x_name},mean_mspe\n");
    for (x, y) in points {
        let _ = writeln!(out, "{x},{y}");
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::generate;

    fn tiny_spec(seed_sigma: f64) -> ExperimentSpec {
        let data = SyntheticSpec::linear(
            24,
            3,
            vec![2.0, -1.0, 0.0],
            0.0,
            seed_sigma,
            0,
        );
        let mut spec = ExperimentSpec::new(data);
        spec.test_size = 200;
        spec.candidate.max_subset_size = Some(2);
        spec
    }

    #[test]
    fn mspe_examples() {
        let pool = CandidatePool::from_singletons(vec![(
            Predictor::Constant(2.0),
            String::new(),
        )])
        .unwrap();
        let m = MixtureDistribution::uniform(&pool);
        // Constant shifted by 2 from a flat signal → 4.
        let feats = vec![vec![0.0], vec![1.0]];
        let f = vec![0.0, 0.0];
        assert!((mspe(&m, &pool, &feats, &f).unwrap() - 4.0).abs() < 1e-12);

        // Perfect predictor → 0.
        let f2 = vec![2.0, 2.0];
        assert_eq!(mspe(&m, &pool, &feats, &f2).unwrap(), 0.0);

        // Deviations {1, −3} → (1 + 9)/2 = 5.
        let f3 = vec![1.0, 5.0];
        assert!((mspe(&m, &pool, &feats, &f3).unwrap() - 5.0).abs() < 1e-12);

        assert!(mspe(&m, &pool, &[], &[]).is_err());
    }

    #[test]
    fn baseline_is_point_mass_with_zero_volatility() {
        let data = generate(&SyntheticSpec::linear(
            30,
            3,
            vec![2.0, 0.0, 0.0],
            0.0,
            0.5,
            7,
        ))
        .unwrap()
        .dataset;
        let pool = generate_candidates(&data, &CandidateConfig::default())
            .unwrap()
            .pool;
        let point = baseline_select_single(&pool, &data, 5, 3).unwrap();
        let ones: Vec<f64> = point
            .class_weights()
            .iter()
            .filter(|&&w| w == 1.0)
            .copied()
            .collect();
        assert_eq!(ones.len(), 1);
        let v = mixture::volatility(&point, &pool, data.features()).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn baseline_finds_true_model_without_noise() {
        // y depends only on x₀, zero noise: the 1-variable class wins CV.
        let features: Vec<Vec<f64>> = (0..10)
            .map(|i| vec![i as f64 - 4.5, ((i * 7) % 5) as f64 - 2.0])
            .collect();
        let ys: Vec<f64> = features.iter().map(|r| 1.0 + 2.0 * r[0]).collect();
        let s = LabeledDataset::regression(features, ys).unwrap();
        let cfg = CandidateConfig {
            max_subset_size: Some(2),
            ridge_lambda: Some(1e-8),
            ..Default::default()
        };
        let pool = generate_candidates(&s, &cfg).unwrap().pool;
        let point = baseline_select_single(&pool, &s, 5, 1).unwrap();
        // Class 1 is the single-variable model on the ranked best variable.
        assert_eq!(point.class_weights()[1], 1.0);
    }

    #[test]
    fn single_candidate_pool_baseline() {
        let s = LabeledDataset::regression(
            vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0], vec![4.0]],
            vec![1.0, 1.0, 1.0, 1.0, 1.0],
        )
        .unwrap();
        let pool = generate_candidates(&s, &CandidateConfig::default())
            .unwrap()
            .pool;
        assert_eq!(pool.num_classes(), 1);
        let point = baseline_select_single(&pool, &s, 5, 0).unwrap();
        assert_eq!(point.class_weights(), &[1.0]);
    }

    #[test]
    fn comparison_is_deterministic() {
        let spec = tiny_spec(1.0);
        let methods = [Method::Rbm, Method::Baseline];
        let a = run_comparison(&spec, &methods, 1, 11).unwrap();
        let b = run_comparison(&spec, &methods, 1, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[&Method::Rbm].reps, 1);
        assert_eq!(a[&Method::Rbm].se_mspe, 0.0);
    }

    #[test]
    fn test_seed_isolated_from_fits() {
        let mut spec = tiny_spec(1.0);
        spec.test_seed = Some(1);
        let a = run_comparison(&spec, &[Method::Rbm], 2, 5).unwrap();
        spec.test_seed = Some(2);
        let b = run_comparison(&spec, &[Method::Rbm], 2, 5).unwrap();
        // Different test sets change the metrics...
        assert_ne!(a[&Method::Rbm].mean_mspe, b[&Method::Rbm].mean_mspe);
        // ...but the fitted bound reports are bitwise unchanged.
        for (ra, rb) in a[&Method::Rbm].per_rep.iter().zip(&b[&Method::Rbm].per_rep) {
            assert_eq!(ra.bound.total.to_bits(), rb.bound.total.to_bits());
        }
    }

    #[test]
    fn missing_configs_are_rejected() {
        let spec = tiny_spec(1.0);
        assert!(run_comparison(&spec, &[Method::Sbs], 1, 0).is_err());
        assert!(run_comparison(&spec, &[Method::Hdr], 1, 0).is_err());
    }

    #[test]
    fn standard_errors_recompute_from_per_rep() {
        let mut spec = tiny_spec(2.0);
        spec.sbs = Some(SbsConfig::new(2, 8));
        let reports = run_comparison(&spec, &[Method::Rbm, Method::Sbs], 4, 3).unwrap();
        for report in reports.values() {
            let vals: Vec<f64> = report.per_rep.iter().map(|r| r.mspe).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let sd = (vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                / (vals.len() - 1) as f64)
                .sqrt();
            let se = sd / (vals.len() as f64).sqrt();
            assert!((report.se_mspe - se).abs() < 1e-12);
            assert!((report.mean_mspe - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn stock_specs_have_expected_shapes() {
        let m2 = linear_model_spec(2, 0.0, 1.0).unwrap();
        assert_eq!(m2.data.n, 150);
        assert_eq!(m2.data.d, 50);
        assert_eq!(m2.sbs.as_ref().unwrap().batch_size, 30);
        assert!(linear_model_spec(4, 0.0, 1.0).is_err());

        let t = transfer_spec(5.0);
        assert_eq!(t.data.d, 10);
        assert_eq!(t.history.as_ref().unwrap().specs.len(), 3);
        for h in &t.history.as_ref().unwrap().specs {
            assert_eq!(h.d, 10);
            assert_eq!(h.sigma, 1.0);
        }
    }

    #[test]
    fn csv_outputs_have_fixed_headers() {
        let spec = tiny_spec(1.0);
        let reports = run_comparison(&spec, &[Method::Rbm], 2, 1).unwrap();
        let per_rep = per_rep_csv(&reports);
        assert!(per_rep.starts_with("rep,method,mspe,volatility,bound_total,kl_total\n"));
        assert_eq!(per_rep.lines().count(), 3);
        let summary = summary_csv(&reports);
        assert!(summary.starts_with("method,mean_mspe,se_mspe,mean_vol,se_vol\n"));
        let plot = plot_csv("sigma", &[(1.0, 2.0), (5.0, 3.0)]);
        assert_eq!(plot, "sigma,mean_mspe\n1,2\n5,3\n");
    }
}
