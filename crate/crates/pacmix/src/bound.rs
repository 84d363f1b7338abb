//! The PAC-Bayes risk bound and its minimization.
//!
//! With probability at least `1 − δ` over an i.i.d. sample `S` of size
//! `n`, every posterior mixture `ξ` satisfies
//!
//! ```text
//! R(ξ,D) ≤ R̂(ξ,S) + sqrt( (KL(w‖w⁰) + Σ_k w_k KL(Q_k‖Q_k⁰) + ln(n/δ)) / (2(n−1)) )
//! ```
//!
//! for a prior `ξ⁰` fixed before seeing `S` and a loss in `[0,1]`.
//! [`pac_bound`] evaluates the right-hand side exactly; [`minimize_bound`]
//! descends it over posteriors.

use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::mixture::{self, LossSpec, MixtureDistribution};
use crate::pool::CandidatePool;

/// Confidence level, optimizer controls, and the clipped loss used by
/// the bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConfig {
    /// Confidence level δ ∈ (0,1).
    pub delta: f64,
    /// Initial gradient step on the logits.
    pub step_size: f64,
    /// Iteration cap for the descent.
    pub max_iters: usize,
    /// Stop once the relative objective decrease falls below this.
    pub tolerance: f64,
    pub loss: LossSpec,
}

impl BoundConfig {
    pub fn new(loss: LossSpec) -> Self {
        Self {
            delta: 0.01,
            step_size: 0.1,
            max_iters: 10_000,
            tolerance: 1e-8,
            loss,
        }
    }

    /// Defaults with the clip scale taken from the training responses.
    pub fn for_dataset(s: &LabeledDataset) -> Self {
        Self::new(LossSpec::for_dataset(s))
    }

    fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidArgument("delta must lie in (0,1)".into()));
        }
        if !(self.step_size > 0.0) {
            return Err(Error::InvalidArgument("step size must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument(
                "max_iters must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// The bound value split into its parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub empirical_risk: f64,
    pub kl_total: f64,
    pub penalty: f64,
    pub total: f64,
}

/// The complexity term `sqrt((kl + ln(n/δ)) / (2(n−1)))`.
pub fn penalty_term(kl_total: f64, n: usize, delta: f64) -> f64 {
    ((kl_total + (n as f64 / delta).ln()) / (2.0 * (n as f64 - 1.0))).sqrt()
}

/// Evaluates the risk bound for posterior `mixture` against `prior` on `s`.
///
/// Requires `n ≥ 2`; a prior without full support over the posterior's
/// mass yields [`Error::InfiniteDivergence`].
pub fn pac_bound(
    mixture: &MixtureDistribution,
    prior: &MixtureDistribution,
    pool: &CandidatePool,
    s: &LabeledDataset,
    cfg: &BoundConfig,
) -> Result<BoundReport> {
    cfg.validate()?;
    if s.len() < 2 {
        return Err(Error::InvalidArgument(
            "the bound needs at least 2 samples".into(),
        ));
    }
    let empirical_risk = mixture::empirical_risk(mixture, pool, s, &cfg.loss)?;
    let kl_total = mixture::mixture_kl(mixture, prior)?;
    let penalty = penalty_term(kl_total, s.len(), cfg.delta);
    Ok(BoundReport {
        empirical_risk,
        kl_total,
        penalty,
        total: empirical_risk + penalty,
    })
}

/// Mixture weights as unconstrained logits; normalized exponentials
/// recover the simplex, so every iterate keeps full support and a
/// finite KL against a full-support prior.
struct Logits {
    class: Vec<f64>,
    member: Vec<Vec<f64>>,
}

impl Logits {
    fn from_mixture(m: &MixtureDistribution) -> Result<Self> {
        let to_logits = |p: &[f64]| -> Result<Vec<f64>> {
            if p.iter().any(|&v| v <= 0.0) {
                return Err(Error::InvalidArgument(
                    "prior must have full support".into(),
                ));
            }
            Ok(p.iter().map(|v| v.ln()).collect())
        };
        Ok(Self {
            class: to_logits(m.class_weights())?,
            member: m
                .member_weights()
                .iter()
                .map(|q| to_logits(q))
                .collect::<Result<_>>()?,
        })
    }

    fn to_mixture(&self) -> MixtureDistribution {
        let class = softmax(&self.class);
        let member = self.member.iter().map(|b| softmax(b)).collect();
        // Softmax output sums to 1 up to rounding; the constructor's
        // tolerance admits it.
        MixtureDistribution::new(class, member).expect("softmax yields a valid mixture")
    }

    fn step(&self, grad: &Logits, step: f64) -> Logits {
        Logits {
            class: self
                .class
                .iter()
                .zip(&grad.class)
                .map(|(v, g)| v - step * g)
                .collect(),
            member: self
                .member
                .iter()
                .zip(&grad.member)
                .map(|(b, gb)| b.iter().zip(gb).map(|(v, g)| v - step * g).collect())
                .collect(),
        }
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|v| v / total).collect()
}

/// Objective pieces at one iterate, kept for the gradient.
struct Eval {
    class: Vec<f64>,
    member: Vec<Vec<f64>>,
    class_risks: Vec<f64>,
    risk: f64,
    kl_class: f64,
    member_kls: Vec<f64>,
    total: f64,
    penalty: f64,
}

struct Objective<'a> {
    risks: Vec<Vec<f64>>,
    prior_class: &'a [f64],
    prior_member: &'a [Vec<f64>],
    log_n_over_delta: f64,
    denom: f64,
}

impl Objective<'_> {
    fn eval(&self, logits: &Logits) -> Eval {
        let class = softmax(&logits.class);
        let member: Vec<Vec<f64>> = logits.member.iter().map(|b| softmax(b)).collect();

        let class_risks: Vec<f64> = member
            .iter()
            .zip(&self.risks)
            .map(|(q, r)| q.iter().zip(r).map(|(qi, ri)| qi * ri).sum())
            .collect();
        let risk: f64 = class.iter().zip(&class_risks).map(|(w, r)| w * r).sum();

        let kl_of = |p: &[f64], p0: &[f64]| -> f64 {
            p.iter()
                .zip(p0)
                .filter(|(&pi, _)| pi > 0.0)
                .map(|(&pi, &qi)| pi * (pi / qi).ln())
                .sum::<f64>()
                .max(0.0)
        };
        let kl_class = kl_of(&class, self.prior_class);
        let member_kls: Vec<f64> = member
            .iter()
            .zip(self.prior_member)
            .map(|(q, q0)| kl_of(q, q0))
            .collect();
        let kl_total = kl_class
            + class
                .iter()
                .zip(&member_kls)
                .map(|(w, kl)| w * kl)
                .sum::<f64>();

        let penalty = ((kl_total + self.log_n_over_delta) / self.denom).sqrt();
        Eval {
            class,
            member,
            class_risks,
            risk,
            kl_class,
            member_kls,
            total: risk + penalty,
            penalty,
        }
    }

    /// Analytic gradient with respect to the logits. For weights
    /// `w = softmax(a)` and any coefficients `g` fixed in `a`,
    /// `∂(Σ_k w_k g_k)/∂a_i = w_i (g_i − Σ_k w_k g_k)`; the KL terms add
    /// their own `ln(w/w⁰)` coefficients with the same structure.
    fn grad(&self, e: &Eval) -> Logits {
        // penalty = sqrt((KL + C)/denom): d penalty/d KL
        let dpen_dkl = 0.5 / (e.penalty * self.denom);

        let weighted_member_kl: f64 = e
            .class
            .iter()
            .zip(&e.member_kls)
            .map(|(w, kl)| w * kl)
            .sum();

        let class = e
            .class
            .iter()
            .enumerate()
            .map(|(i, &wi)| {
                let log_ratio = if wi > 0.0 {
                    (wi / self.prior_class[i]).ln()
                } else {
                    0.0
                };
                let risk_part = e.class_risks[i] - e.risk;
                let kl_part =
                    (log_ratio - e.kl_class) + (e.member_kls[i] - weighted_member_kl);
                wi * (risk_part + dpen_dkl * kl_part)
            })
            .collect();

        let member = e
            .member
            .iter()
            .enumerate()
            .map(|(k, q)| {
                let wk = e.class[k];
                q.iter()
                    .enumerate()
                    .map(|(j, &qj)| {
                        if qj == 0.0 || wk == 0.0 {
                            return 0.0;
                        }
                        let log_ratio = (qj / self.prior_member[k][j]).ln();
                        let risk_part = self.risks[k][j] - e.class_risks[k];
                        let kl_part = log_ratio - e.member_kls[k];
                        wk * qj * (risk_part + dpen_dkl * kl_part)
                    })
                    .collect()
            })
            .collect();

        Logits { class, member }
    }
}

/// Minimizes the bound over posteriors by gradient descent on weight
/// logits, starting at the prior.
///
/// The step halves whenever a move would increase the objective, so the
/// result never exceeds the prior's own bound value; two runs on
/// identical inputs produce bitwise-identical weights.
pub fn minimize_bound(
    prior: &MixtureDistribution,
    pool: &CandidatePool,
    s: &LabeledDataset,
    cfg: &BoundConfig,
) -> Result<(MixtureDistribution, BoundReport)> {
    cfg.validate()?;
    if s.len() < 2 {
        return Err(Error::InvalidArgument(
            "the bound needs at least 2 samples".into(),
        ));
    }
    prior.check_matches(pool)?;

    let objective = Objective {
        risks: mixture::per_model_risks(pool, s, &cfg.loss)?,
        prior_class: prior.class_weights(),
        prior_member: prior.member_weights(),
        log_n_over_delta: (s.len() as f64 / cfg.delta).ln(),
        denom: 2.0 * (s.len() as f64 - 1.0),
    };

    let mut logits = Logits::from_mixture(prior)?;
    let mut eval = objective.eval(&logits);

    'outer: for _ in 0..cfg.max_iters {
        let grad = objective.grad(&eval);
        // Backtracking from the nominal step each iteration: halve until
        // the move does not increase the objective.
        let mut step = cfg.step_size;
        let (next_logits, next_eval) = loop {
            let candidate = logits.step(&grad, step);
            let candidate_eval = objective.eval(&candidate);
            if candidate_eval.total.is_finite() && candidate_eval.total <= eval.total {
                break (candidate, candidate_eval);
            }
            step *= 0.5;
            if step < 1e-16 {
                break 'outer;
            }
        };
        let decrease = eval.total - next_eval.total;
        logits = next_logits;
        eval = next_eval;
        if decrease < cfg.tolerance * eval.total.abs().max(1e-12) {
            break;
        }
    }

    let result = logits.to_mixture();
    let report = pac_bound(&result, prior, pool, s, cfg)?;
    Ok((result, report))
}
