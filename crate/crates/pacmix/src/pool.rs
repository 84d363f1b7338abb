//! The candidate model set: predictors grouped into classes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::predictor::Predictor;

/// One member of the candidate set, addressed by `(class_id, member_id)`
/// (both 0-based, dense within the pool).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateModel {
    pub class_id: usize,
    pub member_id: usize,
    pub predictor: Predictor,
    /// Free-form description (variable subset, regularization level, ...).
    pub metadata: String,
}

/// The full hypothesis set: an ordered list of nonempty model classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidatePool {
    classes: Vec<Vec<CandidateModel>>,
    output_arity: usize,
}

impl CandidatePool {
    /// Builds a pool from classes of models, checking that ids are dense,
    /// classes nonempty, and output arities consistent.
    pub fn new(classes: Vec<Vec<CandidateModel>>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::InvalidArgument(
                "pool must have at least one class".into(),
            ));
        }
        let mut output_arity = None;
        for (k, class) in classes.iter().enumerate() {
            if class.is_empty() {
                return Err(Error::InvalidArgument(format!("class {k} is empty")));
            }
            for (j, model) in class.iter().enumerate() {
                if model.class_id != k || model.member_id != j {
                    return Err(Error::InvalidArgument(format!(
                        "model at position ({k},{j}) carries ids ({},{})",
                        model.class_id, model.member_id
                    )));
                }
                let arity = model.predictor.output_arity();
                match output_arity {
                    None => output_arity = Some(arity),
                    Some(a) if a != arity => {
                        return Err(Error::ShapeMismatch(format!(
                            "model ({k},{j}) has output arity {arity}, expected {a}"
                        )));
                    }
                    _ => {}
                }
            }
        }
        Ok(Self {
            classes,
            output_arity: output_arity.unwrap(),
        })
    }

    /// Convenience: one singleton class per predictor, in order.
    pub fn from_singletons(predictors: Vec<(Predictor, String)>) -> Result<Self> {
        let classes = predictors
            .into_iter()
            .enumerate()
            .map(|(k, (predictor, metadata))| {
                vec![CandidateModel {
                    class_id: k,
                    member_id: 0,
                    predictor,
                    metadata,
                }]
            })
            .collect();
        Self::new(classes)
    }

    /// Number of classes `K`.
    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    /// Member count per class.
    pub fn class_sizes(&self) -> Vec<usize> {
        self.classes.iter().map(Vec::len).collect()
    }

    /// Total number of candidate models.
    pub fn num_models(&self) -> usize {
        self.classes.iter().map(Vec::len).sum()
    }

    /// Output coordinates of every member (1 for regression pools).
    pub fn output_arity(&self) -> usize {
        self.output_arity
    }

    pub fn classes(&self) -> &[Vec<CandidateModel>] {
        &self.classes
    }

    pub fn model(&self, class_id: usize, member_id: usize) -> &CandidateModel {
        &self.classes[class_id][member_id]
    }

    /// Iterates `(class_id, member_id, model)` in index order.
    pub fn iter_models(&self) -> impl Iterator<Item = (usize, usize, &CandidateModel)> {
        self.classes
            .iter()
            .enumerate()
            .flat_map(|(k, class)| class.iter().enumerate().map(move |(j, m)| (k, j, m)))
    }

    /// True when both pools have the same class/member layout.
    pub fn same_shape(&self, other: &CandidatePool) -> bool {
        self.output_arity == other.output_arity && self.class_sizes() == other.class_sizes()
    }
}
