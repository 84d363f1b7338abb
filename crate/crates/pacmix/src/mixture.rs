//! Two-level mixtures over a candidate pool and their elementary
//! functionals: KL divergence, mixture prediction, empirical risk, and
//! volatility.
//!
//! A mixture carries simplex weights `w` over the `K` classes of a pool
//! and, for each class `k`, a discrete distribution `Q_k` over that
//! class's members. Sampling a model means drawing a class from `w` and
//! then a member from `Q_k`, so every expectation below is a finite
//! weighted sum and is computed exactly.

use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::pool::CandidatePool;

/// Tolerance for "sums to one" checks on stored weights.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// Discrete KL divergence `Σ_j p_j ln(p_j / q_j)` with `0·ln(0/·) = 0`.
///
/// Returns [`Error::InfiniteDivergence`] when `p` has mass at a point
/// where `q` has none, and clamps tiny negative rounding residue to 0.
pub fn kl_discrete(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::ShapeMismatch(format!(
            "kl_discrete: lengths {} vs {}",
            p.len(),
            q.len()
        )));
    }
    let mut total = 0.0;
    for (&pj, &qj) in p.iter().zip(q) {
        if pj == 0.0 {
            continue;
        }
        if qj == 0.0 {
            return Err(Error::InfiniteDivergence);
        }
        total += pj * (pj / qj).ln();
    }
    Ok(total.max(0.0))
}

/// A prediction: scalar for regression pools, probability vector for
/// classification pools.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl Output {
    /// The scalar value; panics on vector outputs.
    pub fn scalar(&self) -> f64 {
        match self {
            Output::Scalar(v) => *v,
            Output::Vector(_) => panic!("prediction is vector-valued"),
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        match self {
            Output::Scalar(v) => std::slice::from_ref(v),
            Output::Vector(v) => v,
        }
    }
}

/// Bounded squared-error loss: `min(1, ‖y − h(x)‖² / clip_scale²)`.
///
/// The clip keeps every per-sample loss in `[0, 1]`, which the risk
/// bound requires; evaluation metrics elsewhere use raw squared error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub clip_scale: f64,
}

impl LossSpec {
    pub fn new(clip_scale: f64) -> Result<Self> {
        if !(clip_scale > 0.0) {
            return Err(Error::InvalidArgument(
                "clip_scale must be positive".into(),
            ));
        }
        Ok(Self { clip_scale })
    }

    /// Default clip from the response range of a training set
    /// (`max y − min y` over every response entry), falling back to 1
    /// for constant responses. One-hot responses always yield 1.
    pub fn for_dataset(s: &LabeledDataset) -> Self {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..s.len() {
            for &v in s.response_row(i) {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        let range = hi - lo;
        let clip_scale = if range > 0.0 { range } else { 1.0 };
        Self { clip_scale }
    }

    /// Clipped loss of one prediction against one response row.
    pub fn loss(&self, predicted: &[f64], response: &[f64]) -> f64 {
        let sq: f64 = predicted
            .iter()
            .zip(response)
            .map(|(p, y)| (y - p) * (y - p))
            .sum();
        (sq / (self.clip_scale * self.clip_scale)).min(1.0)
    }
}

/// How to derive the loss clip from a training set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ClipRule {
    /// `clip = max y − min y` over every response entry (the default).
    ResponseRange,
    /// `clip = multiplier × std` of the response entries. Tighter clips
    /// sharpen the risk differences between candidates, making the
    /// bound minimizer concentrate harder.
    StdTimes(f64),
}

impl ClipRule {
    pub fn loss_for(&self, s: &LabeledDataset) -> LossSpec {
        match self {
            ClipRule::ResponseRange => LossSpec::for_dataset(s),
            ClipRule::StdTimes(mult) => {
                let mut values = Vec::with_capacity(s.len() * s.arity());
                for i in 0..s.len() {
                    values.extend_from_slice(s.response_row(i));
                }
                let n = values.len() as f64;
                let mean = values.iter().sum::<f64>() / n;
                let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                let clip = mult * var.sqrt();
                LossSpec {
                    clip_scale: if clip > 0.0 { clip } else { 1.0 },
                }
            }
        }
    }
}

/// Simplex weights over the classes of a pool plus, per class, a
/// discrete distribution over its members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureDistribution {
    class_weights: Vec<f64>,
    member_weights: Vec<Vec<f64>>,
}

fn check_simplex(v: &[f64], what: &str) -> Result<()> {
    if v.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "{what}: weights must be finite and nonnegative"
        )));
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::InvalidArgument(format!(
            "{what}: weights sum to {sum}, not 1"
        )));
    }
    Ok(())
}

impl MixtureDistribution {
    pub fn new(class_weights: Vec<f64>, member_weights: Vec<Vec<f64>>) -> Result<Self> {
        if class_weights.len() != member_weights.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} class weights but {} member distributions",
                class_weights.len(),
                member_weights.len()
            )));
        }
        check_simplex(&class_weights, "class weights")?;
        for (k, q) in member_weights.iter().enumerate() {
            check_simplex(q, &format!("member weights of class {k}"))?;
        }
        Ok(Self {
            class_weights,
            member_weights,
        })
    }

    /// The non-informative mixture: uniform over classes and, within each
    /// class, uniform over members.
    pub fn uniform(pool: &CandidatePool) -> Self {
        let k = pool.num_classes();
        let class_weights = vec![1.0 / k as f64; k];
        let member_weights = pool
            .class_sizes()
            .into_iter()
            .map(|m| vec![1.0 / m as f64; m])
            .collect();
        Self {
            class_weights,
            member_weights,
        }
    }

    /// Point mass on one `(class_id, member_id)`.
    pub fn point_mass(pool: &CandidatePool, class_id: usize, member_id: usize) -> Result<Self> {
        let sizes = pool.class_sizes();
        if class_id >= sizes.len() || member_id >= sizes[class_id] {
            return Err(Error::InvalidArgument(format!(
                "({class_id},{member_id}) is outside the pool"
            )));
        }
        let mut class_weights = vec![0.0; sizes.len()];
        class_weights[class_id] = 1.0;
        let member_weights = sizes
            .iter()
            .enumerate()
            .map(|(k, &m)| {
                let mut q = vec![0.0; m];
                if k == class_id {
                    q[member_id] = 1.0;
                } else {
                    // unused class: keep a valid distribution
                    q = vec![1.0 / m as f64; m];
                }
                q
            })
            .collect();
        Ok(Self {
            class_weights,
            member_weights,
        })
    }

    pub fn class_weights(&self) -> &[f64] {
        &self.class_weights
    }

    pub fn member_weights(&self) -> &[Vec<f64>] {
        &self.member_weights
    }

    /// Probability of model `(k, j)` under the mixture.
    pub fn model_probability(&self, class_id: usize, member_id: usize) -> f64 {
        self.class_weights[class_id] * self.member_weights[class_id][member_id]
    }

    /// Checks that this mixture matches `pool`'s layout.
    pub fn check_matches(&self, pool: &CandidatePool) -> Result<()> {
        let sizes = pool.class_sizes();
        if self.class_weights.len() != sizes.len()
            || self
                .member_weights
                .iter()
                .zip(&sizes)
                .any(|(q, &m)| q.len() != m)
        {
            return Err(Error::ShapeMismatch(
                "mixture does not match the pool layout".into(),
            ));
        }
        Ok(())
    }

    /// Convex combination `Σ_j weights_j · mixtures_j` of mixtures over
    /// same-shaped pools, combined at the level of distributions over
    /// models and refactored back into `(w, Q_1…Q_K)` form.
    pub fn convex_combination(
        weights: &[f64],
        mixtures: &[&MixtureDistribution],
    ) -> Result<MixtureDistribution> {
        if weights.len() != mixtures.len() || mixtures.is_empty() {
            return Err(Error::InvalidArgument(
                "need one weight per mixture and at least one mixture".into(),
            ));
        }
        check_simplex(weights, "combination weights")?;
        let shape: Vec<usize> = mixtures[0].member_weights.iter().map(Vec::len).collect();
        for m in mixtures {
            let s: Vec<usize> = m.member_weights.iter().map(Vec::len).collect();
            if s != shape {
                return Err(Error::ShapeMismatch(
                    "mixtures have different pool layouts".into(),
                ));
            }
        }
        let k_total = shape.len();
        let mut class_weights = vec![0.0; k_total];
        let mut joint: Vec<Vec<f64>> = shape.iter().map(|&m| vec![0.0; m]).collect();
        for (&a, mix) in weights.iter().zip(mixtures) {
            for k in 0..k_total {
                class_weights[k] += a * mix.class_weights[k];
                for j in 0..shape[k] {
                    joint[k][j] += a * mix.model_probability(k, j);
                }
            }
        }
        // No renormalization: accumulation drift stays within the simplex
        // tolerance, and for exact inputs (halves, singleton classes) the
        // combination is bit-exact.
        let member_weights = joint
            .iter()
            .zip(&class_weights)
            .zip(&shape)
            .map(|((row, &wk), &m)| {
                if wk > 0.0 {
                    row.iter().map(|&p| p / wk).collect()
                } else {
                    vec![1.0 / m as f64; m]
                }
            })
            .collect::<Vec<_>>();
        MixtureDistribution::new(class_weights, member_weights)
    }
}

/// Mixture KL divergence `KL(w‖w⁰) + Σ_k w_k · KL(Q_k‖Q_k⁰)`.
///
/// Classes with zero posterior class weight contribute nothing even if
/// their member distributions disagree in support.
pub fn mixture_kl(posterior: &MixtureDistribution, prior: &MixtureDistribution) -> Result<f64> {
    if posterior.class_weights.len() != prior.class_weights.len()
        || posterior
            .member_weights
            .iter()
            .zip(&prior.member_weights)
            .any(|(a, b)| a.len() != b.len())
    {
        return Err(Error::ShapeMismatch(
            "posterior and prior cover different pools".into(),
        ));
    }
    let mut total = kl_discrete(&posterior.class_weights, &prior.class_weights)?;
    for (k, wk) in posterior.class_weights.iter().enumerate() {
        if *wk == 0.0 {
            continue;
        }
        total += wk * kl_discrete(&posterior.member_weights[k], &prior.member_weights[k])?;
    }
    Ok(total)
}

fn check_input(pool: &CandidatePool, x: &[f64], what: &str) -> Result<()> {
    // Linear predictors index into x; constant and prototype predictors
    // fix their own dimension. Require consistency with any linear model.
    for (_, _, model) in pool.iter_models() {
        if let crate::predictor::Predictor::Linear(m) = &model.predictor {
            if m.coefficients.len() != x.len() {
                return Err(Error::ShapeMismatch(format!(
                    "{what}: feature vector has dimension {}, pool expects {}",
                    x.len(),
                    m.coefficients.len()
                )));
            }
        }
    }
    Ok(())
}

/// Mixture prediction `Σ_k w_k Σ_j Q_k[j] · h_{k,j}(x)`.
pub fn predict(
    mixture: &MixtureDistribution,
    pool: &CandidatePool,
    x: &[f64],
) -> Result<Output> {
    mixture.check_matches(pool)?;
    check_input(pool, x, "predict")?;
    let arity = pool.output_arity();
    let mut acc = vec![0.0; arity];
    let mut buf = vec![0.0; arity];
    for (k, j, model) in pool.iter_models() {
        let p = mixture.model_probability(k, j);
        if p == 0.0 {
            continue;
        }
        model.predictor.predict_into(x, &mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += p * b;
        }
    }
    Ok(if arity == 1 {
        Output::Scalar(acc[0])
    } else {
        Output::Vector(acc)
    })
}

/// Index of the largest coordinate of the mixture prediction, as a
/// 1-based class label. Ties break toward the smallest index.
pub fn predict_class(
    mixture: &MixtureDistribution,
    pool: &CandidatePool,
    x: &[f64],
) -> Result<usize> {
    let out = predict(mixture, pool, x)?;
    let probs = out.as_slice();
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > probs[best] {
            best = i;
        }
    }
    Ok(best + 1)
}

/// Mean clipped loss of every pool member on `s`, in pool index order.
/// This is the per-model risk table the bound optimizer reuses.
pub fn per_model_risks(
    pool: &CandidatePool,
    s: &LabeledDataset,
    loss: &LossSpec,
) -> Result<Vec<Vec<f64>>> {
    if s.is_empty() {
        return Err(Error::InvalidArgument("dataset must be nonempty".into()));
    }
    if pool.output_arity() != s.arity() {
        return Err(Error::ShapeMismatch(format!(
            "pool outputs {} values, responses have {}",
            pool.output_arity(),
            s.arity()
        )));
    }
    check_input(pool, s.feature_row(0), "per_model_risks")?;
    let arity = pool.output_arity();
    let mut buf = vec![0.0; arity];
    let mut risks: Vec<Vec<f64>> = pool
        .class_sizes()
        .into_iter()
        .map(|m| vec![0.0; m])
        .collect();
    for (k, j, model) in pool.iter_models() {
        let mut sum = 0.0;
        for i in 0..s.len() {
            model.predictor.predict_into(s.feature_row(i), &mut buf);
            sum += loss.loss(&buf, s.response_row(i));
        }
        risks[k][j] = sum / s.len() as f64;
    }
    Ok(risks)
}

/// Empirical risk: the exact mixture expectation of the mean clipped
/// loss over `s`. Always in `[0, 1]`.
pub fn empirical_risk(
    mixture: &MixtureDistribution,
    pool: &CandidatePool,
    s: &LabeledDataset,
    loss: &LossSpec,
) -> Result<f64> {
    mixture.check_matches(pool)?;
    let risks = per_model_risks(pool, s, loss)?;
    // Stored weights may sum to 1 ± SIMPLEX_TOL; clamp the rounding
    // residue so the [0, 1] contract holds exactly.
    Ok(weighted_risk(mixture, &risks).clamp(0.0, 1.0))
}

/// Mixture expectation of a per-model risk table.
pub fn weighted_risk(mixture: &MixtureDistribution, risks: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for (k, row) in risks.iter().enumerate() {
        let wk = mixture.class_weights[k];
        if wk == 0.0 {
            continue;
        }
        let class_risk: f64 = row
            .iter()
            .zip(&mixture.member_weights[k])
            .map(|(r, q)| q * r)
            .sum();
        total += wk * class_risk;
    }
    total
}

/// Predictive volatility: the mean over `points` of the exact mixture
/// variance of `h(x)`, summed over output coordinates for vector-valued
/// pools.
pub fn volatility(
    mixture: &MixtureDistribution,
    pool: &CandidatePool,
    points: &[Vec<f64>],
) -> Result<f64> {
    mixture.check_matches(pool)?;
    if points.is_empty() {
        return Err(Error::InvalidArgument(
            "volatility needs at least one point".into(),
        ));
    }
    check_input(pool, &points[0], "volatility")?;
    let arity = pool.output_arity();
    let mut buf = vec![0.0; arity];
    let mut total = 0.0;
    for x in points {
        let mut mean = vec![0.0; arity];
        let mut second = vec![0.0; arity];
        for (k, j, model) in pool.iter_models() {
            let p = mixture.model_probability(k, j);
            if p == 0.0 {
                continue;
            }
            model.predictor.predict_into(x, &mut buf);
            for c in 0..arity {
                mean[c] += p * buf[c];
                second[c] += p * buf[c] * buf[c];
            }
        }
        let var: f64 = (0..arity).map(|c| second[c] - mean[c] * mean[c]).sum();
        total += var.max(0.0);
    }
    Ok(total / points.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pool::CandidateModel;
    use crate::predictor::Predictor;

    fn constant_pool(values: &[f64]) -> CandidatePool {
        CandidatePool::from_singletons(
            values
                .iter()
                .map(|&v| (Predictor::Constant(v), format!("const {v}")))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn kl_identical_is_zero() {
        assert_eq!(kl_discrete(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
    }

    #[test]
    fn kl_point_mass_vs_uniform() {
        let v = kl_discrete(&[1.0, 0.0], &[0.5, 0.5]).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn kl_direct_summation_example() {
        // 0.5 ln 2 − 0.5 ln 1.5
        let expected = 0.5 * (0.5f64 / 0.25).ln() + 0.5 * (0.5f64 / 0.75).ln();
        let v = kl_discrete(&[0.5, 0.5], &[0.25, 0.75]).unwrap();
        assert!((v - expected).abs() < 1e-15);
        assert!((v - 0.1438).abs() < 1e-4);
    }

    #[test]
    fn kl_support_violation_is_distinct_error() {
        match kl_discrete(&[0.5, 0.5], &[1.0, 0.0]) {
            Err(Error::InfiniteDivergence) => {}
            other => panic!("expected InfiniteDivergence, got {other:?}"),
        }
        assert!(matches!(
            kl_discrete(&[1.0], &[0.5, 0.5]),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn mixture_kl_point_mass_example() {
        // K = 2 classes × 2 members, posterior point mass on (0,0):
        // KL(w‖w⁰) = ln 2 and the class-0 member term adds another ln 2.
        let pool = CandidatePool::new(vec![
            vec![
                CandidateModel {
                    class_id: 0,
                    member_id: 0,
                    predictor: Predictor::Constant(0.0),
                    metadata: String::new(),
                },
                CandidateModel {
                    class_id: 0,
                    member_id: 1,
                    predictor: Predictor::Constant(1.0),
                    metadata: String::new(),
                },
            ],
            vec![
                CandidateModel {
                    class_id: 1,
                    member_id: 0,
                    predictor: Predictor::Constant(2.0),
                    metadata: String::new(),
                },
                CandidateModel {
                    class_id: 1,
                    member_id: 1,
                    predictor: Predictor::Constant(3.0),
                    metadata: String::new(),
                },
            ],
        ])
        .unwrap();
        let posterior = MixtureDistribution::new(
            vec![1.0, 0.0],
            vec![vec![1.0, 0.0], vec![0.5, 0.5]],
        )
        .unwrap();
        let prior = MixtureDistribution::uniform(&pool);
        let v = mixture_kl(&posterior, &prior).unwrap();
        assert!((v - 2.0 * std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn mixture_kl_singleton_classes_reduce_to_class_kl() {
        let post = MixtureDistribution::new(vec![0.9, 0.1], vec![vec![1.0], vec![1.0]]).unwrap();
        let prior = MixtureDistribution::new(vec![0.3, 0.7], vec![vec![1.0], vec![1.0]]).unwrap();
        let full = mixture_kl(&post, &prior).unwrap();
        let classes_only = kl_discrete(&[0.9, 0.1], &[0.3, 0.7]).unwrap();
        assert_eq!(full, classes_only);
    }

    #[test]
    fn mixture_kl_self_is_zero() {
        let m =
            MixtureDistribution::new(vec![0.25, 0.75], vec![vec![0.4, 0.6], vec![1.0]]).unwrap();
        assert_eq!(mixture_kl(&m, &m).unwrap(), 0.0);
    }

    #[test]
    fn predict_weighted_sum() {
        let pool = constant_pool(&[1.0, 2.0, 4.0]);
        let m = MixtureDistribution::new(
            vec![0.2, 0.3, 0.5],
            vec![vec![1.0], vec![1.0], vec![1.0]],
        )
        .unwrap();
        let y = predict(&m, &pool, &[0.0]).unwrap().scalar();
        assert!((y - 2.8).abs() < 1e-12);
    }

    #[test]
    fn predict_degenerate_and_symmetric() {
        let pool = constant_pool(&[3.7, 0.0]);
        let point = MixtureDistribution::point_mass(&pool, 0, 0).unwrap();
        assert_eq!(predict(&point, &pool, &[0.0]).unwrap().scalar(), 3.7);

        let pool2 = constant_pool(&[0.0, 2.0]);
        let uniform = MixtureDistribution::uniform(&pool2);
        assert_eq!(predict(&uniform, &pool2, &[0.0]).unwrap().scalar(), 1.0);
    }

    #[test]
    fn predict_class_rules() {
        let pool = CandidatePool::from_singletons(vec![(
            Predictor::ConstantVector(vec![0.1, 0.7, 0.2]),
            String::new(),
        )])
        .unwrap();
        let m = MixtureDistribution::uniform(&pool);
        assert_eq!(predict_class(&m, &pool, &[0.0]).unwrap(), 2);

        let tie = CandidatePool::from_singletons(vec![(
            Predictor::ConstantVector(vec![0.5, 0.5]),
            String::new(),
        )])
        .unwrap();
        let mt = MixtureDistribution::uniform(&tie);
        assert_eq!(predict_class(&mt, &tie, &[0.0]).unwrap(), 1);
    }

    #[test]
    fn empirical_risk_examples() {
        // Point mass with per-sample clipped losses {0.2, 0.4} → 0.3.
        let pool = constant_pool(&[0.0]);
        let point = MixtureDistribution::uniform(&pool);
        let loss = LossSpec::new(1.0).unwrap();
        let ds = LabeledDataset::regression(
            vec![vec![0.0], vec![0.0]],
            vec![0.2f64.sqrt(), 0.4f64.sqrt()],
        )
        .unwrap();
        let r = empirical_risk(&point, &pool, &ds, &loss).unwrap();
        assert!((r - 0.3).abs() < 1e-12);

        // Two-model uniform mixture: y = {0.2, 0.4} gives the constants
        // 0 and 1 mean losses 0.1 and 0.5, so the mixture risk is 0.3.
        let pool2 = constant_pool(&[0.0, 1.0]);
        let ds2 =
            LabeledDataset::regression(vec![vec![0.0], vec![0.0]], vec![0.2, 0.4]).unwrap();
        let risks = per_model_risks(&pool2, &ds2, &loss).unwrap();
        assert!((risks[0][0] - 0.1).abs() < 1e-12);
        assert!((risks[1][0] - 0.5).abs() < 1e-12);
        let uniform = MixtureDistribution::uniform(&pool2);
        let r2 = empirical_risk(&uniform, &pool2, &ds2, &loss).unwrap();
        assert!((r2 - 0.3).abs() < 1e-12);
    }

    #[test]
    fn empirical_risk_zero_for_perfect_model() {
        let pool = constant_pool(&[1.5]);
        let m = MixtureDistribution::uniform(&pool);
        let ds = LabeledDataset::regression(vec![vec![0.0], vec![1.0]], vec![1.5, 1.5]).unwrap();
        let loss = LossSpec::for_dataset(&ds);
        assert_eq!(empirical_risk(&m, &pool, &ds, &loss).unwrap(), 0.0);
    }

    #[test]
    fn volatility_examples() {
        let pool = constant_pool(&[0.0, 2.0]);
        let uniform = MixtureDistribution::uniform(&pool);
        let v = volatility(&uniform, &pool, &[vec![0.0]]).unwrap();
        assert!((v - 1.0).abs() < 1e-12);

        let pool2 = constant_pool(&[0.0, 4.0]);
        let m = MixtureDistribution::new(vec![0.25, 0.75], vec![vec![1.0], vec![1.0]]).unwrap();
        let v2 = volatility(&m, &pool2, &[vec![0.0]]).unwrap();
        assert!((v2 - 3.0).abs() < 1e-12);

        let point = MixtureDistribution::point_mass(&pool2, 1, 0).unwrap();
        assert_eq!(volatility(&point, &pool2, &[vec![0.0]]).unwrap(), 0.0);
    }

    #[test]
    fn empty_inputs_are_argument_errors() {
        let pool = constant_pool(&[0.0]);
        let m = MixtureDistribution::uniform(&pool);
        assert!(matches!(
            volatility(&m, &pool, &[]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn losses_clip_into_unit_interval() {
        let loss = LossSpec::new(2.0).unwrap();
        assert_eq!(loss.loss(&[10.0], &[0.0]), 1.0);
        assert!((loss.loss(&[1.0], &[0.0]) - 0.25).abs() < 1e-15);
    }
}
