//! Concrete candidate predictors.
//!
//! Every candidate is a pure function of the feature vector, represented
//! as plain data so pools serialize losslessly into run artifacts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An affine predictor fitted by ridge regression on a variable subset.
///
/// `coefficients` has full length `d` with entries outside `subset`
/// exactly zero; the prediction is `intercept + ⟨coefficients, x⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPredictor {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub subset: Vec<usize>,
    pub ridge_lambda: f64,
}

impl FittedPredictor {
    pub fn new(
        intercept: f64,
        coefficients: Vec<f64>,
        subset: Vec<usize>,
        ridge_lambda: f64,
    ) -> Result<Self> {
        for (j, &c) in coefficients.iter().enumerate() {
            if !subset.contains(&j) && c != 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "coefficient {j} is outside the subset but nonzero"
                )));
            }
        }
        if subset.iter().any(|&j| j >= coefficients.len()) {
            return Err(Error::InvalidArgument(
                "subset index out of range".into(),
            ));
        }
        Ok(Self {
            intercept,
            coefficients,
            subset,
            ridge_lambda,
        })
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        // Only subset entries can be nonzero, so sum over the subset.
        self.intercept
            + self
                .subset
                .iter()
                .map(|&j| self.coefficients[j] * x[j])
                .sum::<f64>()
    }
}

/// A nearest-prototype classifier: softmax of negative squared distances
/// to per-class centers, scaled by `temperature`. Emits a probability
/// vector over `centers.len()` classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrototypeClassifier {
    pub centers: Vec<Vec<f64>>,
    pub temperature: f64,
}

impl PrototypeClassifier {
    pub fn new(centers: Vec<Vec<f64>>, temperature: f64) -> Result<Self> {
        if centers.len() < 2 {
            return Err(Error::InvalidArgument(
                "prototype classifier needs at least 2 centers".into(),
            ));
        }
        if temperature <= 0.0 {
            return Err(Error::InvalidArgument(
                "temperature must be positive".into(),
            ));
        }
        let d = centers[0].len();
        if centers.iter().any(|c| c.len() != d) {
            return Err(Error::ShapeMismatch(
                "prototype centers have inconsistent dimensions".into(),
            ));
        }
        Ok(Self {
            centers,
            temperature,
        })
    }

    pub fn predict_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.centers.len());
        let mut max_score = f64::NEG_INFINITY;
        for (k, center) in self.centers.iter().enumerate() {
            let sq: f64 = center
                .iter()
                .zip(x)
                .map(|(c, v)| (c - v) * (c - v))
                .sum();
            out[k] = -sq / self.temperature;
            max_score = max_score.max(out[k]);
        }
        let mut total = 0.0;
        for v in out.iter_mut() {
            *v = (*v - max_score).exp();
            total += *v;
        }
        for v in out.iter_mut() {
            *v /= total;
        }
    }
}

/// A deterministic map from features to a response.
///
/// Scalar variants predict a single value; vector variants predict one
/// value per output coordinate (classification probability vectors).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Predictor {
    /// Always predicts the same scalar.
    Constant(f64),
    /// Always predicts the same vector.
    ConstantVector(Vec<f64>),
    /// Affine map fitted on a variable subset.
    Linear(FittedPredictor),
    /// Nearest-prototype soft classifier.
    Prototype(PrototypeClassifier),
}

impl Predictor {
    /// Number of output coordinates: 1 for scalar predictors.
    pub fn output_arity(&self) -> usize {
        match self {
            Predictor::Constant(_) | Predictor::Linear(_) => 1,
            Predictor::ConstantVector(v) => v.len(),
            Predictor::Prototype(p) => p.centers.len(),
        }
    }

    /// Evaluates into a caller-provided buffer of length `output_arity()`.
    pub fn predict_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Predictor::Constant(c) => out[0] = *c,
            Predictor::ConstantVector(v) => out.copy_from_slice(v),
            Predictor::Linear(m) => out[0] = m.predict(x),
            Predictor::Prototype(p) => p.predict_into(x, out),
        }
    }

    /// Scalar prediction; panics if the predictor is vector-valued.
    pub fn predict_scalar(&self, x: &[f64]) -> f64 {
        assert_eq!(self.output_arity(), 1, "predictor is vector-valued");
        let mut out = [0.0];
        self.predict_into(x, &mut out);
        out[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_prediction_uses_subset_only() {
        let m = FittedPredictor::new(1.0, vec![2.0, 0.0, -1.0], vec![0, 2], 0.1).unwrap();
        assert_eq!(m.predict(&[1.0, 100.0, 2.0]), 1.0 + 2.0 - 2.0);
    }

    #[test]
    fn nonzero_outside_subset_rejected() {
        assert!(FittedPredictor::new(0.0, vec![1.0, 1.0], vec![0], 0.0).is_err());
    }

    #[test]
    fn prototype_output_is_simplex_and_peaks_at_nearest() {
        let p = PrototypeClassifier::new(vec![vec![0.0, 0.0], vec![4.0, 0.0]], 1.0).unwrap();
        let mut out = [0.0; 2];
        p.predict_into(&[0.1, 0.0], &mut out);
        assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(out[0] > out[1]);
    }
}
