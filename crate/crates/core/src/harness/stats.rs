//! Two-sample significance tests over arm summaries.

use super::{ArmSummary, HarnessError};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignificanceTest {
    FisherExact,
    TwoProportionZ,
}

/// Two-sided Fisher exact test on the 2x2 table
/// [[wins_a, n_a - wins_a], [wins_b, n_b - wins_b]]: sum of hypergeometric
/// point probabilities no larger than the observed one.
pub fn fisher_exact_two_sided(
    wins_a: u64,
    n_a: u64,
    wins_b: u64,
    n_b: u64,
) -> Result<f64, HarnessError> {
    if n_a == 0 || n_b == 0 {
        return Err(HarnessError::InvalidExperiment(
            "fisher test needs n >= 1 in both arms".into(),
        ));
    }
    if wins_a > n_a || wins_b > n_b {
        return Err(HarnessError::InvalidExperiment(
            "wins cannot exceed n".into(),
        ));
    }
    let total = n_a + n_b;
    let wins = wins_a + wins_b;
    let ln_fact = ln_factorials(total as usize);
    // ln of C(n, k)
    let ln_choose =
        |n: u64, k: u64| ln_fact[n as usize] - ln_fact[k as usize] - ln_fact[(n - k) as usize];
    let ln_denominator = ln_choose(total, wins);
    let ln_pmf = |k: u64| ln_choose(n_a, k) + ln_choose(n_b, wins - k) - ln_denominator;

    let lo = wins.saturating_sub(n_b);
    let hi = wins.min(n_a);
    let p_observed = ln_pmf(wins_a).exp();
    // float-tolerant inclusion rule for ties at the observed probability
    let threshold = p_observed * (1.0 + 1e-7);
    let p: f64 = (lo..=hi)
        .map(|k| ln_pmf(k).exp())
        .filter(|&p_k| p_k <= threshold)
        .sum();
    Ok(p.min(1.0))
}

fn ln_factorials(up_to: usize) -> Vec<f64> {
    let mut table = vec![0.0; up_to + 1];
    for i in 1..=up_to {
        table[i] = table[i - 1] + (i as f64).ln();
    }
    table
}

/// Two-sided two-proportion z test with a pooled standard error.
pub fn two_proportion_z(
    wins_a: u64,
    n_a: u64,
    wins_b: u64,
    n_b: u64,
) -> Result<f64, HarnessError> {
    if n_a == 0 || n_b == 0 {
        return Err(HarnessError::InvalidExperiment(
            "z test needs n >= 1 in both arms".into(),
        ));
    }
    let p_a = wins_a as f64 / n_a as f64;
    let p_b = wins_b as f64 / n_b as f64;
    let pooled = (wins_a + wins_b) as f64 / (n_a + n_b) as f64;
    let se = (pooled * (1.0 - pooled) * (1.0 / n_a as f64 + 1.0 / n_b as f64)).sqrt();
    if se == 0.0 {
        return Ok(1.0);
    }
    let z = (p_a - p_b) / se;
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    Ok((2.0 * (1.0 - normal.cdf(z.abs()))).min(1.0))
}

pub fn compare_arms(
    a: &ArmSummary,
    b: &ArmSummary,
    test: SignificanceTest,
) -> Result<f64, HarnessError> {
    match test {
        SignificanceTest::FisherExact => fisher_exact_two_sided(a.wins, a.n, b.wins, b.n),
        SignificanceTest::TwoProportionZ => two_proportion_z(a.wins, a.n, b.wins, b.n),
    }
}
