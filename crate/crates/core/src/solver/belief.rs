//! Beliefs over the opponent's hidden type and Bayesian updating.

use super::SolverError;
use crate::game::{GameSpec, Utterance};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

const MASS_TOL: f64 = 1e-12;

/// A distribution over Y's types, in a fixed type order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Belief {
    types: Vec<String>,
    probs: Vec<f64>,
}

impl Belief {
    pub fn new(types: Vec<String>, probs: Vec<f64>) -> Result<Belief, SolverError> {
        if types.len() != probs.len() || types.is_empty() {
            return Err(SolverError::DegenerateBelief(
                "type and probability lists must be non-empty and aligned".into(),
            ));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(SolverError::DegenerateBelief(
                "probabilities must be non-negative".into(),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(SolverError::DegenerateBelief(format!(
                "mass sums to {total}, not 1"
            )));
        }
        Ok(Belief { types, probs })
    }

    /// The game prior over Y's types.
    pub fn from_prior(spec: &GameSpec) -> Result<Belief, SolverError> {
        Belief::new(spec.y_types.clone(), spec.prior_y.clone())
    }

    pub fn uniform(types: Vec<String>) -> Result<Belief, SolverError> {
        let n = types.len();
        Belief::new(types, vec![1.0 / n as f64; n])
    }

    pub fn point_mass(types: Vec<String>, on: &str) -> Result<Belief, SolverError> {
        let probs = types
            .iter()
            .map(|t| if t == on { 1.0 } else { 0.0 })
            .collect::<Vec<_>>();
        if !probs.contains(&1.0) {
            return Err(SolverError::DegenerateBelief(format!(
                "type {on:?} not in the support"
            )));
        }
        Belief::new(types, probs)
    }

    pub fn types(&self) -> &[String] {
        &self.types
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, t: &str) -> f64 {
        self.types
            .iter()
            .position(|x| x == t)
            .map_or(0.0, |i| self.probs[i])
    }

    pub fn is_point_mass(&self) -> bool {
        self.probs.iter().any(|&p| (p - 1.0).abs() <= MASS_TOL)
    }

    /// Draw a type by cumulative scan over the fixed type order. Consumes
    /// exactly one f64 from the rng.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> &str {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (t, p) in self.types.iter().zip(&self.probs) {
            acc += p;
            if u < acc {
                return t;
            }
        }
        // rounding slack: fall back to the last positive-mass type
        self.types
            .iter()
            .zip(&self.probs)
            .rev()
            .find(|(_, &p)| p > 0.0)
            .map(|(t, _)| t.as_str())
            .unwrap_or(&self.types[self.types.len() - 1])
    }
}

/// An assumed per-type distribution over Y's moves, used as the likelihood
/// model in belief updates.
#[derive(Debug, Clone, Default)]
pub struct TypedMovePolicy {
    pub per_type: BTreeMap<String, Vec<(Utterance, f64)>>,
}

impl TypedMovePolicy {
    pub fn likelihood(&self, t: &str, observed: &Utterance) -> f64 {
        self.per_type
            .get(t)
            .map_or(0.0, |moves| {
                moves
                    .iter()
                    .filter(|(m, _)| m == observed)
                    .map(|(_, p)| p)
                    .sum()
            })
    }
}

/// Bayes update: posterior(t) ∝ belief(t) · policy(t)(observed). If the
/// observed move has zero likelihood under every type (off-path), the game
/// prior is returned unchanged; this is the declared off-path rule.
pub fn update_belief(
    belief: &Belief,
    spec: &GameSpec,
    observed_y_move: &Utterance,
    assumed_y_policy: &TypedMovePolicy,
) -> Result<Belief, SolverError> {
    for moves in assumed_y_policy.per_type.values() {
        if moves.iter().any(|(_, p)| !p.is_finite() || *p < 0.0) {
            return Err(SolverError::InvalidArgument(
                "assumed policy has negative or non-finite probabilities".into(),
            ));
        }
    }
    let weighted: Vec<f64> = belief
        .types
        .iter()
        .zip(&belief.probs)
        .map(|(t, p)| p * assumed_y_policy.likelihood(t, observed_y_move))
        .collect();
    let total: f64 = weighted.iter().sum();
    if total <= 0.0 {
        return Belief::from_prior(spec);
    }
    Belief::new(
        belief.types.clone(),
        weighted.iter().map(|w| w / total).collect(),
    )
}
