//! Candidate pool construction and the pieces the historical-data
//! learner needs: noise-scale estimation and standardized error
//! densities.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, Laplace, Normal, StudentsT};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::mixture::{self, MixtureDistribution};
use crate::pool::{CandidateModel, CandidatePool};
use crate::predictor::{FittedPredictor, Predictor};

/// How to turn ranked variable subsets into pool classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CandidateStrategy {
    /// One singleton class per subset size (plus intercept-only); the
    /// bound then exercises only the class-weight KL term.
    RankedSubsets,
    /// One class per subset size whose members are ridge fits over the
    /// penalty grid `{1e-4, 1e-2, 1}·n`; exercises the full two-level
    /// formula.
    LambdaGrid,
}

/// Controls for [`generate_candidates`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateConfig {
    /// Largest variable subset; `None` means `min(d, 10)`.
    pub max_subset_size: Option<usize>,
    /// Ridge penalty; `None` means `1e-3 · n`.
    pub ridge_lambda: Option<f64>,
    pub strategy: CandidateStrategy,
}

impl Default for CandidateConfig {
    fn default() -> Self {
        Self {
            max_subset_size: None,
            ridge_lambda: None,
            strategy: CandidateStrategy::RankedSubsets,
        }
    }
}

/// Pool plus construction diagnostics.
#[derive(Debug, Clone)]
pub struct PoolBuild {
    pub pool: CandidatePool,
    /// Set when the response had zero variance and only the
    /// intercept-only model could be built.
    pub constant_response: bool,
}

/// Ridge regression of `y` on the columns `subset` of `s`, intercept
/// unpenalized. Returns coefficients embedded in full dimension `d`.
pub fn fit_ridge(s: &LabeledDataset, subset: &[usize], lambda: f64) -> Result<FittedPredictor> {
    let ys = s.scalar_responses()?;
    let n = s.len();
    let p = subset.len();
    let mut design = DMatrix::zeros(n, p + 1);
    for i in 0..n {
        design[(i, 0)] = 1.0;
        for (c, &j) in subset.iter().enumerate() {
            design[(i, c + 1)] = s.feature_row(i)[j];
        }
    }
    let y = DVector::from_column_slice(ys);
    let mut normal = design.transpose() * &design;
    for c in 1..=p {
        normal[(c, c)] += lambda;
    }
    let rhs = design.transpose() * y;
    let solution = normal
        .clone()
        .cholesky()
        .map(|ch| ch.solve(&rhs))
        .or_else(|| normal.lu().solve(&rhs))
        .ok_or_else(|| Error::Numerical("ridge normal equations are singular".into()))?;

    let mut coefficients = vec![0.0; s.dim()];
    for (c, &j) in subset.iter().enumerate() {
        coefficients[j] = solution[c + 1];
    }
    FittedPredictor::new(solution[0], coefficients, subset.to_vec(), lambda)
}

/// Variables ranked by absolute Pearson correlation with the response,
/// descending; ties and zero-variance columns order by index.
fn rank_by_marginal_correlation(s: &LabeledDataset) -> Result<Vec<usize>> {
    let ys = s.scalar_responses()?;
    let n = s.len() as f64;
    let y_mean = ys.iter().sum::<f64>() / n;
    let y_var = ys.iter().map(|y| (y - y_mean) * (y - y_mean)).sum::<f64>();
    let mut scored: Vec<(usize, f64)> = (0..s.dim())
        .map(|j| {
            let x_mean = s.features().iter().map(|r| r[j]).sum::<f64>() / n;
            let mut cov = 0.0;
            let mut x_var = 0.0;
            for (row, y) in s.features().iter().zip(ys) {
                let dx = row[j] - x_mean;
                cov += dx * (y - y_mean);
                x_var += dx * dx;
            }
            let denom = (x_var * y_var).sqrt();
            let corr = if denom > 0.0 { (cov / denom).abs() } else { 0.0 };
            (j, corr)
        })
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    Ok(scored.into_iter().map(|(j, _)| j).collect())
}

/// Builds the candidate pool for a regression task: nested subsets of
/// the correlation-ranked variables of sizes `1…max_subset_size`, each
/// fitted by ridge, preceded by the intercept-only model.
///
/// A constant response collapses the pool to the intercept-only model
/// and flags the result.
pub fn generate_candidates(s: &LabeledDataset, cfg: &CandidateConfig) -> Result<PoolBuild> {
    if s.len() < 2 {
        return Err(Error::InvalidArgument(
            "candidate generation needs at least 2 samples".into(),
        ));
    }
    let ys = s.scalar_responses()?;
    let d = s.dim();
    let max_size = cfg.max_subset_size.unwrap_or_else(|| d.min(10));
    if max_size == 0 || max_size > d {
        return Err(Error::InvalidArgument(format!(
            "max_subset_size must lie in [1, {d}]"
        )));
    }
    let lambda = cfg.ridge_lambda.unwrap_or(1e-3 * s.len() as f64);

    let y_mean = ys.iter().sum::<f64>() / s.len() as f64;
    let constant_response = ys.iter().all(|&y| y == ys[0]);
    let intercept_only =
        FittedPredictor::new(y_mean, vec![0.0; d], vec![], lambda)?;

    if constant_response {
        let pool = CandidatePool::from_singletons(vec![(
            Predictor::Linear(intercept_only),
            "intercept-only".to_string(),
        )])?;
        return Ok(PoolBuild {
            pool,
            constant_response: true,
        });
    }

    let ranking = rank_by_marginal_correlation(s)?;
    let lambdas: Vec<f64> = match cfg.strategy {
        CandidateStrategy::RankedSubsets => vec![lambda],
        CandidateStrategy::LambdaGrid => {
            let n = s.len() as f64;
            vec![1e-4 * n, 1e-2 * n, n]
        }
    };

    let mut classes = Vec::with_capacity(max_size + 1);
    classes.push(vec![CandidateModel {
        class_id: 0,
        member_id: 0,
        predictor: Predictor::Linear(intercept_only),
        metadata: "intercept-only".to_string(),
    }]);
    for size in 1..=max_size {
        let subset: Vec<usize> = {
            let mut sub = ranking[..size].to_vec();
            sub.sort_unstable();
            sub
        };
        let class_id = size;
        let members = lambdas
            .iter()
            .enumerate()
            .map(|(member_id, &lam)| {
                Ok(CandidateModel {
                    class_id,
                    member_id,
                    predictor: Predictor::Linear(fit_ridge(s, &subset, lam)?),
                    metadata: format!("subset {subset:?}, lambda {lam}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        classes.push(members);
    }
    Ok(PoolBuild {
        pool: CandidatePool::new(classes)?,
        constant_response: false,
    })
}

/// Homoscedastic noise-scale estimate: the root mean squared residual
/// of the mixture prediction, floored at `1e-6`.
pub fn estimate_sigma(
    mixture: &MixtureDistribution,
    pool: &CandidatePool,
    s: &LabeledDataset,
) -> Result<f64> {
    if s.len() < 2 {
        return Err(Error::InvalidArgument(
            "sigma estimation needs at least 2 samples".into(),
        ));
    }
    let ys = s.scalar_responses()?;
    let mut sum_sq = 0.0;
    for (i, &y) in ys.iter().enumerate() {
        let pred = mixture::predict(mixture, pool, s.feature_row(i))?.scalar();
        sum_sq += (y - pred) * (y - pred);
    }
    Ok((sum_sq / s.len() as f64).sqrt().max(1e-6))
}

/// Standardized error densities (mean 0, variance 1) admissible for the
/// likelihood weighting of the historical-data learner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ErrorDensity {
    StandardNormal,
    /// Student-t with `nu > 2` degrees of freedom, rescaled to unit
    /// variance.
    StudentT { nu: f64 },
    /// Double-exponential (Laplace) with scale `1/√2`.
    DoubleExponential,
}

impl ErrorDensity {
    /// Constructs and numerically verifies that the density integrates
    /// to 1 within `1e-6`.
    pub fn new(kind: ErrorDensity) -> Result<ErrorDensity> {
        if let ErrorDensity::StudentT { nu } = kind {
            if !(nu > 2.0) {
                return Err(Error::InvalidArgument(
                    "Student-t degrees of freedom must exceed 2".into(),
                ));
            }
        }
        let mass = kind.integrate();
        if (mass - 1.0).abs() > 1e-6 {
            return Err(Error::Numerical(format!(
                "density integrates to {mass}, not 1"
            )));
        }
        Ok(kind)
    }

    /// Density value at `t`.
    pub fn density_at(&self, t: f64) -> f64 {
        match self {
            ErrorDensity::StandardNormal => {
                Normal::new(0.0, 1.0).expect("valid normal").pdf(t)
            }
            ErrorDensity::StudentT { nu } => {
                let scale = ((nu - 2.0) / nu).sqrt();
                StudentsT::new(0.0, scale, *nu)
                    .expect("valid student-t")
                    .pdf(t)
            }
            ErrorDensity::DoubleExponential => Laplace::new(0.0, std::f64::consts::FRAC_1_SQRT_2)
                .expect("valid laplace")
                .pdf(t),
        }
    }

    /// Log density at `t`; kept explicit so likelihood products stay in
    /// log space.
    pub fn log_density_at(&self, t: f64) -> f64 {
        match self {
            ErrorDensity::StandardNormal => {
                Normal::new(0.0, 1.0).expect("valid normal").ln_pdf(t)
            }
            ErrorDensity::StudentT { nu } => {
                let scale = ((nu - 2.0) / nu).sqrt();
                StudentsT::new(0.0, scale, *nu)
                    .expect("valid student-t")
                    .ln_pdf(t)
            }
            ErrorDensity::DoubleExponential => Laplace::new(0.0, std::f64::consts::FRAC_1_SQRT_2)
                .expect("valid laplace")
                .ln_pdf(t),
        }
    }

    // Composite Simpson over [-200, 200], split at 0 where the Laplace
    // density has a kink. Tail mass beyond the range is below 1e-7 for
    // every admissible kind.
    fn integrate(&self) -> f64 {
        let half = |a: f64, b: f64| {
            let steps = 20_000;
            let h = (b - a) / steps as f64;
            let mut total = self.density_at(a) + self.density_at(b);
            for i in 1..steps {
                let x = a + i as f64 * h;
                total += self.density_at(x) * if i % 2 == 0 { 2.0 } else { 4.0 };
            }
            total * h / 3.0
        };
        half(-200.0, 0.0) + half(0.0, 200.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn random_dataset(n: usize, d: usize, seed: u64) -> LabeledDataset {
        let mut rng = seeds::stream_rng(seed, seeds::FEATURES, 0);
        let features: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let ys: Vec<f64> = features
            .iter()
            .map(|r| 1.0 + 2.0 * r[0] - r[1] + 0.1 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        LabeledDataset::regression(features, ys).unwrap()
    }

    #[test]
    fn pool_layout_matches_config() {
        let s = random_dataset(30, 2, 1);
        let cfg = CandidateConfig {
            max_subset_size: Some(2),
            ..Default::default()
        };
        let build = generate_candidates(&s, &cfg).unwrap();
        assert_eq!(build.pool.num_classes(), 3);
        assert_eq!(build.pool.class_sizes(), vec![1, 1, 1]);
        assert!(!build.constant_response);
    }

    #[test]
    fn exact_linear_signal_recovered_with_small_lambda() {
        let features: Vec<Vec<f64>> = (0..5)
            .map(|i| vec![i as f64, (i * i) as f64 * 0.1])
            .collect();
        let ys: Vec<f64> = features.iter().map(|r| 1.0 + 2.0 * r[0]).collect();
        let s = LabeledDataset::regression(features, ys.clone()).unwrap();
        let cfg = CandidateConfig {
            max_subset_size: Some(2),
            ridge_lambda: Some(1e-8),
            ..Default::default()
        };
        let build = generate_candidates(&s, &cfg).unwrap();
        // The size-1 class picks variable 0 and should fit nearly exactly.
        let model = &build.pool.model(1, 0).predictor;
        let mse: f64 = s
            .features()
            .iter()
            .zip(&ys)
            .map(|(x, y)| {
                let p = model.predict_scalar(x);
                (p - y) * (p - y)
            })
            .sum::<f64>()
            / 5.0;
        assert!(mse < 1e-6, "training mse {mse}");
        if let Predictor::Linear(fp) = model {
            assert_eq!(fp.subset, vec![0]);
        } else {
            panic!("expected linear predictor");
        }
    }

    #[test]
    fn constant_response_collapses_to_intercept() {
        let s = LabeledDataset::regression(
            vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]],
            vec![7.0, 7.0, 7.0],
        )
        .unwrap();
        let build = generate_candidates(&s, &CandidateConfig::default()).unwrap();
        assert!(build.constant_response);
        assert_eq!(build.pool.num_classes(), 1);
        let pred = build.pool.model(0, 0).predictor.predict_scalar(&[0.0, 0.0]);
        assert_eq!(pred, 7.0);
    }

    #[test]
    fn ridge_matches_normal_equation_oracle() {
        // Direct dense solve of (ZᵀZ + λD)b = Zᵀy as the oracle.
        let s = random_dataset(20, 5, 3);
        let subset = vec![0, 2, 4];
        let lambda = 0.7;
        let fitted = fit_ridge(&s, &subset, lambda).unwrap();

        let n = s.len();
        let p = subset.len();
        let mut z = DMatrix::zeros(n, p + 1);
        for i in 0..n {
            z[(i, 0)] = 1.0;
            for (c, &j) in subset.iter().enumerate() {
                z[(i, c + 1)] = s.feature_row(i)[j];
            }
        }
        let y = DVector::from_column_slice(s.scalar_responses().unwrap());
        let mut lhs = z.transpose() * &z;
        for c in 1..=p {
            lhs[(c, c)] += lambda;
        }
        let oracle = lhs.lu().solve(&(z.transpose() * y)).unwrap();
        assert!((fitted.intercept - oracle[0]).abs() < 1e-8);
        for (c, &j) in subset.iter().enumerate() {
            assert!((fitted.coefficients[j] - oracle[c + 1]).abs() < 1e-8);
        }
    }

    #[test]
    fn pools_are_deterministic() {
        let s = random_dataset(25, 4, 9);
        let cfg = CandidateConfig::default();
        let a = generate_candidates(&s, &cfg).unwrap().pool;
        let b = generate_candidates(&s, &cfg).unwrap().pool;
        assert_eq!(a, b);
    }

    #[test]
    fn lambda_grid_strategy_builds_multi_member_classes() {
        let s = random_dataset(30, 3, 11);
        let cfg = CandidateConfig {
            max_subset_size: Some(2),
            strategy: CandidateStrategy::LambdaGrid,
            ..Default::default()
        };
        let build = generate_candidates(&s, &cfg).unwrap();
        assert_eq!(build.pool.class_sizes(), vec![1, 3, 3]);
    }

    #[test]
    fn sigma_examples() {
        let pool = CandidatePool::from_singletons(vec![(
            Predictor::Constant(0.0),
            String::new(),
        )])
        .unwrap();
        let m = MixtureDistribution::uniform(&pool);

        let s = LabeledDataset::regression(vec![vec![0.0], vec![0.0]], vec![3.0, -3.0]).unwrap();
        assert!((estimate_sigma(&m, &pool, &s).unwrap() - 3.0).abs() < 1e-12);

        let zero = LabeledDataset::regression(vec![vec![0.0], vec![0.0]], vec![0.0, 0.0]).unwrap();
        assert_eq!(estimate_sigma(&m, &pool, &zero).unwrap(), 1e-6);

        let rms = LabeledDataset::regression(
            vec![vec![0.0]; 4],
            vec![1.0, 2.0, 2.0, 1.0],
        )
        .unwrap();
        assert!((estimate_sigma(&m, &pool, &rms).unwrap() - (10.0f64 / 4.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sigma_is_scale_equivariant() {
        let pool = CandidatePool::from_singletons(vec![(
            Predictor::Constant(0.0),
            String::new(),
        )])
        .unwrap();
        let m = MixtureDistribution::uniform(&pool);
        let base = vec![0.5, -1.5, 2.0];
        let s1 = LabeledDataset::regression(vec![vec![0.0]; 3], base.clone()).unwrap();
        let s2 =
            LabeledDataset::regression(vec![vec![0.0]; 3], base.iter().map(|v| 3.0 * v).collect())
                .unwrap();
        let a = estimate_sigma(&m, &pool, &s1).unwrap();
        let b = estimate_sigma(&m, &pool, &s2).unwrap();
        assert!((b - 3.0 * a).abs() < 1e-12);
    }

    #[test]
    fn density_closed_forms() {
        let normal = ErrorDensity::new(ErrorDensity::StandardNormal).unwrap();
        assert!((normal.density_at(0.0) - 0.3989422804014327).abs() < 1e-12);
        assert!((normal.density_at(1.0) - 0.24197072451914337).abs() < 1e-12);

        let laplace = ErrorDensity::new(ErrorDensity::DoubleExponential).unwrap();
        assert!((laplace.density_at(0.0) - std::f64::consts::SQRT_2 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn densities_integrate_to_one() {
        // Independent oracle: trapezoid rule on a finer asymmetric grid.
        for kind in [
            ErrorDensity::StandardNormal,
            ErrorDensity::StudentT { nu: 3.0 },
            ErrorDensity::StudentT { nu: 5.0 },
            ErrorDensity::DoubleExponential,
        ] {
            let q = ErrorDensity::new(kind).unwrap();
            let (a, b, steps) = (-300.0f64, 300.0f64, 600_001);
            let h = (b - a) / (steps - 1) as f64;
            let mut mass = 0.0;
            let mut prev = q.density_at(a);
            for i in 1..steps {
                let x = a + i as f64 * h;
                let cur = q.density_at(x);
                mass += 0.5 * (prev + cur) * h;
                prev = cur;
            }
            assert!((mass - 1.0).abs() < 1e-6, "{kind:?} integrates to {mass}");
        }
    }

    #[test]
    fn student_t_needs_nu_above_two() {
        assert!(ErrorDensity::new(ErrorDensity::StudentT { nu: 2.0 }).is_err());
        assert!(ErrorDensity::new(ErrorDensity::StudentT { nu: 2.5 }).is_ok());
    }

    #[test]
    fn student_t_has_unit_variance() {
        let q = ErrorDensity::new(ErrorDensity::StudentT { nu: 4.0 }).unwrap();
        // ∫ t² q(t) dt by Simpson on [-400, 400].
        let steps = 400_000;
        let (a, b) = (-400.0, 400.0);
        let h = (b - a) / steps as f64;
        let f = |x: f64| x * x * q.density_at(x);
        let mut total = f(a) + f(b);
        for i in 1..steps {
            total += f(a + i as f64 * h) * if i % 2 == 0 { 2.0 } else { 4.0 };
        }
        let var = total * h / 3.0;
        assert!((var - 1.0).abs() < 1e-3, "variance {var}");
    }
}
