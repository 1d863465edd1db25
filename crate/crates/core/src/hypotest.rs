//! The decision rule: rejection region, z-score, two-sided p-value.
//!
//! Under the null (Gaussian domain of attraction) the statistic
//! concentrates at `2/π` with asymptotic variance `σ_π²/n`, where
//! `σ_π² = 1 + 4/π − 20/π²`. The test rejects when
//! `|S − 2/π| > z_{1−q/2} · σ_π / √n`; rejection means the sampled
//! variable cannot have a finite second moment.

use serde::{Deserialize, Serialize};

use crate::dist::{normal_quantile, normal_sf};
use crate::error::{Error, Result};
use crate::sample::Sample;
use crate::statistic::{compute_statistic, summarize_blocks, StatisticValue};
use std::f64::consts::PI;

/// Probability limit of the statistic under the null: `2/π`.
pub const KAPPA: f64 = 2.0 / PI;

/// Asymptotic variance constant `σ_π² = 1 + 4/π − 20/π²`.
pub const SIGMA_PI_SQ: f64 = 1.0 + 4.0 / PI - 20.0 / (PI * PI);

/// `σ_π`, the standard deviation used by the standardization.
pub fn sigma_pi() -> f64 {
    SIGMA_PI_SQ.sqrt()
}

/// Asymptotic covariance of the (bivariation, quadratic variation) pair
/// over Brownian increments. Recorded for documentation and checked
/// against `σ_π²` through the delta-method identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceConstants {
    pub sigma11: f64,
    pub sigma12: f64,
    pub sigma22: f64,
}

impl CovarianceConstants {
    pub fn paper_values() -> Self {
        Self {
            sigma11: 1.0 + 4.0 / PI - 12.0 / (PI * PI),
            sigma12: 4.0 / PI,
            sigma22: 2.0,
        }
    }

    /// `Σ11 − (4/π)·Σ12 + (4/π²)·Σ22`, which must equal `σ_π²`.
    pub fn combined_variance(&self) -> f64 {
        self.sigma11 - (4.0 / PI) * self.sigma12 + (4.0 / (PI * PI)) * self.sigma22
    }
}

/// Number of blocks and significance level for one test run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub n: usize,
    pub q: f64,
}

impl TestConfig {
    pub fn new(n: usize, q: f64) -> Result<Self> {
        validate_n_q(n, q)?;
        Ok(Self { n, q })
    }
}

fn validate_n_q(n: usize, q: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::BadConfig(format!(
            "need at least 2 blocks, got n={n}"
        )));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!(
            "significance level must satisfy 0 < q < 1, got {q}"
        )));
    }
    Ok(())
}

/// Outcome of one test run. `reject == true` means the data is judged
/// outside the Gaussian domain of attraction (so its second moment is
/// infinite); the three views `reject`, `p_value < q` and
/// `|z_score| > z_{1−q/2}` always agree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub z_score: f64,
    pub p_value: f64,
    pub reject: bool,
    /// The null center `2/π`, echoed for reporting.
    pub kappa_target: f64,
    /// The variance constant `σ_π²`, echoed for reporting.
    pub sigma_pi_sq: f64,
    pub n: usize,
    pub m: usize,
    pub q: f64,
}

impl TestResult {
    /// Single-line JSON record with stable key names for scripting.
    pub fn to_json_line(&self) -> String {
        format!(
            "{{\"statistic\":{},\"z\":{},\"p\":{},\"reject\":{},\"n\":{},\"m\":{},\"q\":{}}}",
            self.statistic, self.z_score, self.p_value, self.reject, self.n, self.m, self.q
        )
    }
}

/// Map a statistic value onto the asymptotic N(0,1) scale:
/// `√n (S − 2/π) / σ_π`.
pub fn standardize(statistic: f64, n: usize) -> f64 {
    (n as f64).sqrt() * (statistic - KAPPA) / sigma_pi()
}

/// The acceptance band `2/π ± z_{1−q/2}·σ_π/√n`.
pub fn critical_band(n: usize, q: f64) -> Result<(f64, f64)> {
    validate_n_q(n, q)?;
    let half = normal_quantile(1.0 - q / 2.0)? * sigma_pi() / (n as f64).sqrt();
    Ok((KAPPA - half, KAPPA + half))
}

/// Practical guidance from the experiments: the asymptotics kick in only
/// when the number of blocks is much smaller than the sample, so warn
/// (never fail) when `n > √m`.
pub fn n_exceeds_sqrt_m(n: usize, m: usize) -> bool {
    (n as f64) > (m as f64).sqrt()
}

/// Assemble the decision for an already computed statistic.
pub fn decide(stat: StatisticValue, q: f64) -> Result<TestResult> {
    validate_n_q(stat.n, q)?;
    let z = standardize(stat.value, stat.n);
    let p_value = 2.0 * normal_sf(z.abs());
    let reject = z.abs() > normal_quantile(1.0 - q / 2.0)?;
    Ok(TestResult {
        statistic: stat.value,
        z_score: z,
        p_value,
        reject,
        kappa_target: KAPPA,
        sigma_pi_sq: SIGMA_PI_SQ,
        n: stat.n,
        m: stat.m,
        q,
    })
}

/// Run the full test on a sample: blocks, statistic, decision.
pub fn run_test(sample: &Sample, config: &TestConfig) -> Result<TestResult> {
    let summary = summarize_blocks(sample, config.n)?;
    let stat = compute_statistic(&summary)?;
    decide(stat, config.q)
}
