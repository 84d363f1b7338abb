//! Seeded synthetic task generators.
//!
//! Feature vectors come from a `d`-variate normal with AR(ρ) covariance
//! `Σ_ij = ρ^{|i−j|}`, responses from the configured signal plus
//! `σ·ε` noise with standard-normal `ε`. All draws go through
//! counter-based streams (see [`crate::seeds`]) so a task family is
//! reproducible and order-independent.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::{LabeledDataset, Responses};
use crate::error::{Error, Result};
use crate::seeds;

/// Signal family of a synthetic task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyntheticKind {
    /// `y = intercept + xᵀβ + σ·ε`
    Linear,
    /// `y = 1 + sin(x₁) + cos(x₂) + σ·ε` (σ defaults to 1)
    Nonlinear1,
    /// `y = 1 + sin(x₁ + x₂) + σ·ε` (σ defaults to 1)
    Nonlinear2,
    /// Three unit-variance Gaussian blobs on an equilateral triangle of
    /// side 4 in the plane, one-hot responses.
    ClassificationToy,
}

/// Full description of a synthetic dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub n: usize,
    pub d: usize,
    /// Coefficients for the linear kind; ignored otherwise.
    #[serde(default)]
    pub beta: Vec<f64>,
    pub sigma: f64,
    /// AR correlation of the features, in `[0, 1)`.
    pub rho: f64,
    pub intercept: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn linear(n: usize, d: usize, beta: Vec<f64>, rho: f64, sigma: f64, seed: u64) -> Self {
        Self {
            kind: SyntheticKind::Linear,
            n,
            d,
            beta,
            sigma,
            rho,
            intercept: 1.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        if !(self.rho >= 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidArgument("rho must lie in [0, 1)".into()));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidArgument("sigma must be positive".into()));
        }
        match self.kind {
            SyntheticKind::Linear => {
                if self.beta.len() != self.d {
                    return Err(Error::InvalidArgument(format!(
                        "beta has length {}, expected d = {}",
                        self.beta.len(),
                        self.d
                    )));
                }
            }
            SyntheticKind::Nonlinear1 | SyntheticKind::Nonlinear2 => {
                if self.d < 2 {
                    return Err(Error::InvalidArgument(
                        "nonlinear kinds need d >= 2".into(),
                    ));
                }
            }
            SyntheticKind::ClassificationToy => {
                if self.d != 2 {
                    return Err(Error::InvalidArgument(
                        "the classification toy is 2-dimensional".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Lower Cholesky factor of the AR(ρ) covariance, in closed form:
/// `L[i][0] = ρ^i`, `L[i][j] = ρ^{i−j}·sqrt(1−ρ²)` for `1 ≤ j ≤ i`.
pub fn ar_cholesky(d: usize, rho: f64) -> Vec<Vec<f64>> {
    let tail = (1.0 - rho * rho).sqrt();
    (0..d)
        .map(|i| {
            (0..=i)
                .map(|j| {
                    let scale = if j == 0 { 1.0 } else { tail };
                    rho.powi((i - j) as i32) * scale
                })
                .collect()
        })
        .collect()
}

/// Blob centers of the classification toy: an equilateral triangle of
/// side 4 centered at the origin.
pub fn toy_class_centers() -> [[f64; 2]; 3] {
    let r = 4.0 / 3.0f64.sqrt();
    [
        [0.0, r],
        [-2.0, -r / 2.0],
        [2.0, -r / 2.0],
    ]
}

/// A synthetic task as a label source: exposes the noiseless signal,
/// feature sampling, and labeling of arbitrary points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTask {
    spec: SyntheticSpec,
}

impl SyntheticTask {
    pub fn new(spec: SyntheticSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self { spec })
    }

    pub fn spec(&self) -> &SyntheticSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.d
    }

    pub fn is_classification(&self) -> bool {
        self.spec.kind == SyntheticKind::ClassificationToy
    }

    /// The noiseless regression function `f(x)`. Panics on the
    /// classification kind, which has no scalar signal.
    pub fn noiseless(&self, x: &[f64]) -> f64 {
        match self.spec.kind {
            SyntheticKind::Linear => {
                self.spec.intercept
                    + self
                        .spec
                        .beta
                        .iter()
                        .zip(x)
                        .map(|(b, v)| b * v)
                        .sum::<f64>()
            }
            SyntheticKind::Nonlinear1 => 1.0 + x[0].sin() + x[1].cos(),
            SyntheticKind::Nonlinear2 => 1.0 + (x[0] + x[1]).sin(),
            SyntheticKind::ClassificationToy => {
                panic!("classification toy has no scalar signal")
            }
        }
    }

    /// Draws feature rows from the task's marginal distribution.
    pub fn sample_features(&self, n: usize, rng: &mut ChaCha12Rng) -> Vec<Vec<f64>> {
        match self.spec.kind {
            SyntheticKind::ClassificationToy => {
                // Feature draws of the toy are tied to labels; sample
                // blobs but discard the labels.
                (0..n).map(|_| self.sample_blob(rng).0).collect()
            }
            _ => {
                let l = ar_cholesky(self.spec.d, self.spec.rho);
                (0..n)
                    .map(|_| {
                        let z: Vec<f64> = (0..self.spec.d)
                            .map(|_| rng.sample::<f64, _>(StandardNormal))
                            .collect();
                        (0..self.spec.d)
                            .map(|i| (0..=i).map(|j| l[i][j] * z[j]).sum())
                            .collect()
                    })
                    .collect()
            }
        }
    }

    fn sample_blob(&self, rng: &mut ChaCha12Rng) -> (Vec<f64>, usize) {
        let centers = toy_class_centers();
        let class = rng.random_range(0..3);
        let x = vec![
            centers[class][0] + rng.sample::<f64, _>(StandardNormal),
            centers[class][1] + rng.sample::<f64, _>(StandardNormal),
        ];
        (x, class)
    }

    /// Marginal quantile of coordinate `j` at level `u ∈ (0,1)`. Every
    /// regression kind has standard-normal marginals.
    pub fn marginal_quantile(&self, _j: usize, u: f64) -> f64 {
        use statrs::distribution::ContinuousCDF;
        statrs::distribution::Normal::new(0.0, 1.0)
            .expect("valid normal")
            .inverse_cdf(u)
    }

    /// Labels the given feature rows with fresh noise from `rng`.
    pub fn label(&self, features: Vec<Vec<f64>>, rng: &mut ChaCha12Rng) -> Result<LabeledDataset> {
        match self.spec.kind {
            SyntheticKind::ClassificationToy => Err(Error::InvalidArgument(
                "the classification toy labels only its own blob draws".into(),
            )),
            _ => {
                let ys: Vec<f64> = features
                    .iter()
                    .map(|x| {
                        self.noiseless(x)
                            + self.spec.sigma * rng.sample::<f64, _>(StandardNormal)
                    })
                    .collect();
                LabeledDataset::regression(features, ys)
            }
        }
    }
}

/// A generated dataset along with the signal values and realized noise
/// needed for evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticData {
    pub dataset: LabeledDataset,
    /// `f(x_i)` per row, in response shape (the true class one-hot for
    /// the classification toy).
    pub noiseless: Responses,
    /// Realized noise `y_i − f(x_i)` per row; empty for classification.
    pub noise: Vec<f64>,
    pub spec: SyntheticSpec,
}

/// Generates a dataset from `spec`, deterministically in `spec.seed`.
pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticData> {
    generate_with_streams(spec, spec.seed, 0)
}

fn generate_with_streams(spec: &SyntheticSpec, seed: u64, index: u64) -> Result<SyntheticData> {
    spec.validate()?;
    let task = SyntheticTask::new(spec.clone())?;
    match spec.kind {
        SyntheticKind::ClassificationToy => {
            let mut rng = seeds::stream_rng(seed, seeds::LABELS, index);
            let mut features = Vec::with_capacity(spec.n);
            let mut rows = Vec::with_capacity(spec.n);
            for _ in 0..spec.n {
                let (x, class) = task.sample_blob(&mut rng);
                features.push(x);
                let mut row = vec![0.0; 3];
                row[class] = 1.0;
                rows.push(row);
            }
            let responses = Responses::OneHot { classes: 3, rows };
            let dataset = LabeledDataset::new(features, responses.clone())?;
            Ok(SyntheticData {
                dataset,
                noiseless: responses,
                noise: Vec::new(),
                spec: spec.clone(),
            })
        }
        _ => {
            let mut feature_rng = seeds::stream_rng(seed, seeds::FEATURES, index);
            let mut noise_rng = seeds::stream_rng(seed, seeds::NOISE, index);
            let features = task.sample_features(spec.n, &mut feature_rng);
            let signal: Vec<f64> = features.iter().map(|x| task.noiseless(x)).collect();
            let ys: Vec<f64> = signal
                .iter()
                .map(|f| f + spec.sigma * noise_rng.sample::<f64, _>(StandardNormal))
                .collect();
            // Realized noise is defined as y − f after rounding, so the
            // reconstruction identity holds exactly.
            let noise: Vec<f64> = ys.iter().zip(&signal).map(|(y, f)| y - f).collect();
            let dataset = LabeledDataset::regression(features, ys)?;
            Ok(SyntheticData {
                dataset,
                noiseless: Responses::Scalar(signal),
                noise,
                spec: spec.clone(),
            })
        }
    }
}

/// `m` independently seeded datasets from `base`, one stream per task
/// index: task `i` sees the same bytes no matter how large `m` is.
pub fn task_family(base: &SyntheticSpec, m: usize, seed: u64) -> Result<Vec<SyntheticData>> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    (0..m)
        .map(|i| {
            let mut spec = base.clone();
            spec.seed = seeds::mix(seed, i as u64);
            generate_with_streams(&spec, spec.seed, 0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, d: usize, rho: f64, sigma: f64, seed: u64) -> SyntheticSpec {
        let mut beta = vec![0.0; d];
        beta[0] = 3.0;
        if d > 1 {
            beta[1] = 1.5;
        }
        SyntheticSpec::linear(n, d, beta, rho, sigma, seed)
    }

    #[test]
    fn ar_cholesky_reproduces_covariance() {
        for (d, rho) in [(5, 0.0), (10, 0.5), (50, 0.9)] {
            let l = ar_cholesky(d, rho);
            for i in 0..d {
                for k in 0..d {
                    let mut dot = 0.0;
                    for j in 0..=i.min(k) {
                        dot += l[i][j] * l[k][j];
                    }
                    let expected = rho.powi((i as i32 - k as i32).abs());
                    assert!(
                        (dot - expected).abs() < 1e-10,
                        "Σ[{i}][{k}] = {dot}, expected {expected}"
                    );
                }
            }
        }
    }

    #[test]
    fn identity_covariance_when_rho_zero() {
        let n = 100_000;
        let data = generate(&spec(n, 3, 0.0, 1.0, 5)).unwrap();
        let xs = data.dataset.features();
        for a in 0..3 {
            for b in 0..3 {
                let mean_a: f64 = xs.iter().map(|r| r[a]).sum::<f64>() / n as f64;
                let mean_b: f64 = xs.iter().map(|r| r[b]).sum::<f64>() / n as f64;
                let cov: f64 = xs
                    .iter()
                    .map(|r| (r[a] - mean_a) * (r[b] - mean_b))
                    .sum::<f64>()
                    / n as f64;
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!(
                    (cov - expected).abs() < 0.02,
                    "cov[{a}][{b}] = {cov}"
                );
            }
        }
    }

    #[test]
    fn ar_correlation_when_rho_large() {
        let n = 100_000;
        let data = generate(&spec(n, 3, 0.9, 1.0, 6)).unwrap();
        let xs = data.dataset.features();
        let corr = |a: usize, b: usize| {
            let mean_a: f64 = xs.iter().map(|r| r[a]).sum::<f64>() / n as f64;
            let mean_b: f64 = xs.iter().map(|r| r[b]).sum::<f64>() / n as f64;
            let mut cov = 0.0;
            let mut va = 0.0;
            let mut vb = 0.0;
            for r in xs {
                cov += (r[a] - mean_a) * (r[b] - mean_b);
                va += (r[a] - mean_a) * (r[a] - mean_a);
                vb += (r[b] - mean_b) * (r[b] - mean_b);
            }
            cov / (va * vb).sqrt()
        };
        assert!((corr(0, 1) - 0.9).abs() < 0.02);
        assert!((corr(0, 2) - 0.81).abs() < 0.02);
    }

    #[test]
    fn table_spec_shapes_and_signal() {
        let beta = vec![3.0, 1.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0];
        let s = SyntheticSpec::linear(50, 8, beta, 0.0, 1.0, 1);
        let data = generate(&s).unwrap();
        assert_eq!(data.dataset.len(), 50);
        assert_eq!(data.dataset.dim(), 8);
        let task = SyntheticTask::new(s).unwrap();
        let e1 = {
            let mut v = vec![0.0; 8];
            v[0] = 1.0;
            v
        };
        assert_eq!(task.noiseless(&e1), 4.0);
    }

    #[test]
    fn reconstruction_identity_is_exact() {
        let data = generate(&spec(200, 4, 0.3, 2.5, 8)).unwrap();
        let ys = data.dataset.scalar_responses().unwrap();
        let signal = match &data.noiseless {
            Responses::Scalar(v) => v,
            _ => unreachable!(),
        };
        for i in 0..data.dataset.len() {
            assert_eq!(ys[i] - signal[i], data.noise[i]);
        }
    }

    #[test]
    fn noise_is_uncorrelated_with_features() {
        let n = 100_000;
        let data = generate(&spec(n, 2, 0.5, 1.0, 9)).unwrap();
        let xs = data.dataset.features();
        for j in 0..2 {
            let mean_x: f64 = xs.iter().map(|r| r[j]).sum::<f64>() / n as f64;
            let mean_e: f64 = data.noise.iter().sum::<f64>() / n as f64;
            let mut cov = 0.0;
            let mut vx = 0.0;
            let mut ve = 0.0;
            for (r, e) in xs.iter().zip(&data.noise) {
                cov += (r[j] - mean_x) * (e - mean_e);
                vx += (r[j] - mean_x) * (r[j] - mean_x);
                ve += (e - mean_e) * (e - mean_e);
            }
            let corr = cov / (vx * ve).sqrt();
            assert!(corr.abs() < 0.02, "corr(x{j}, eps) = {corr}");
        }
    }

    #[test]
    fn families_are_deterministic_and_order_independent() {
        let base = spec(20, 3, 0.0, 1.0, 0);
        let fam3 = task_family(&base, 3, 77).unwrap();
        let fam5 = task_family(&base, 5, 77).unwrap();
        for i in 0..3 {
            assert_eq!(fam3[i].dataset, fam5[i].dataset);
        }
        let again = task_family(&base, 3, 77).unwrap();
        assert_eq!(fam3[0].dataset, again[0].dataset);
        assert_ne!(fam3[0].dataset, fam3[1].dataset);
    }

    #[test]
    fn example3_new_task_signal() {
        let mut beta = vec![0.0; 10];
        beta[0] = 1.0;
        beta[1] = -1.0;
        beta[4] = 0.5;
        let s = SyntheticSpec::linear(20, 10, beta, 0.0, 1.0, 3);
        let data = generate(&s).unwrap();
        assert_eq!(data.dataset.dim(), 10);
        assert_eq!(data.dataset.len(), 20);
        let task = SyntheticTask::new(s).unwrap();
        let mut e1 = vec![0.0; 10];
        e1[0] = 1.0;
        assert_eq!(task.noiseless(&e1), 2.0);
    }

    #[test]
    fn classification_toy_is_one_hot() {
        let s = SyntheticSpec {
            kind: SyntheticKind::ClassificationToy,
            n: 120,
            d: 2,
            beta: vec![],
            sigma: 1.0,
            rho: 0.0,
            intercept: 1.0,
            seed: 4,
        };
        let data = generate(&s).unwrap();
        assert!(data.dataset.is_classification());
        assert_eq!(data.dataset.arity(), 3);
        assert_eq!(data.noise.len(), 0);
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut bad = spec(10, 2, 0.0, 1.0, 0);
        bad.rho = 1.0;
        assert!(generate(&bad).is_err());
        let mut bad2 = spec(10, 2, 0.0, 1.0, 0);
        bad2.beta = vec![1.0];
        assert!(generate(&bad2).is_err());
        let mut bad3 = spec(10, 2, 0.0, 1.0, 0);
        bad3.n = 0;
        assert!(generate(&bad3).is_err());
    }
}
