//! Model averaging over finite candidate pools with PAC-Bayes risk
//! bounds.
//!
//! Instead of selecting one model, this crate learns a two-level mixture
//! `ξ = (w, Q_1…Q_K)` over classes of candidate predictors by minimizing
//! a high-probability upper bound on the expected loss. Three learners
//! are provided:
//!
//! - **RBM** (risk bound method): minimize the bound once with the
//!   non-informative prior ([`bound::minimize_bound`]).
//! - **SBS** (sequential batch sampling): process data in batches chosen
//!   for high predictive volatility, each step's posterior becoming the
//!   next step's prior ([`sbs::sbs_run`]).
//! - **HDR** (historical data related): meta-learn a prior for a new
//!   task as a likelihood-weighted combination of priors fitted to
//!   historical tasks ([`hdr::hdr_learn_prior`]).
//!
//! Supporting machinery covers candidate construction from data
//! ([`models::generate_candidates`]), seeded synthetic tasks
//! ([`datagen`]), and a benchmark harness ([`bench`]).

pub mod bench;
pub mod bound;
pub mod dataset;
pub mod datagen;
pub mod error;
pub mod hdr;
pub mod mixture;
pub mod models;
pub mod pool;
pub mod predictor;
pub mod sbs;
pub mod seeds;

pub use bound::{minimize_bound, pac_bound, BoundConfig, BoundReport};
pub use dataset::{LabeledDataset, Responses};
pub use error::{Error, Result};
pub use mixture::{
    empirical_risk, kl_discrete, mixture_kl, predict, predict_class, volatility, LossSpec,
    MixtureDistribution, Output,
};
pub use pool::{CandidateModel, CandidatePool};
pub use predictor::{FittedPredictor, Predictor, PrototypeClassifier};

// Book chapters double as doc-tests so the guide's snippets stay
// compilable against the current API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/mixtures.md")]
    mod mixtures {}
    #[doc = include_str!("../../../book/src/risk-bound.md")]
    mod risk_bound {}
    #[doc = include_str!("../../../book/src/sequential-sampling.md")]
    mod sequential_sampling {}
    #[doc = include_str!("../../../book/src/historical-priors.md")]
    mod historical_priors {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
