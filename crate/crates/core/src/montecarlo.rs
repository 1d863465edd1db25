//! Experiment harness: grids over (distribution, m, n, q), empirical
//! rejection rates, standardized-statistic histograms, Type-II decay
//! fits, and the heuristic power bound.
//!
//! Scenarios are embarrassingly parallel. Each scenario owns the stream
//! `(master_seed, m_index·scenarios + scenario)`, one sample per
//! scenario is reused across every (n, q) of that m, and all floating
//! reductions are ordered folds over the scenario index, so results are
//! bit-identical whatever the worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::dist::{normal_cdf, normal_quantile, DistributionSpec, RngStream};
use crate::error::{Error, Result};
use crate::hypotest::standardize;
use crate::statistic::{compute_statistic, summarize_blocks};

/// What the experimenter believes about the generator, echoed in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Hypothesis {
    H0,
    H1,
    #[default]
    Unknown,
}

fn default_scenarios() -> usize {
    2000
}

/// A grid of (m, n, q) cells over one distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub distribution: DistributionSpec,
    pub m_values: Vec<usize>,
    pub n_values: Vec<usize>,
    pub q_values: Vec<f64>,
    #[serde(default = "default_scenarios")]
    pub scenarios: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub hypothesis_label: Hypothesis,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.distribution.validate()?;
        if self.m_values.is_empty() || self.n_values.is_empty() || self.q_values.is_empty() {
            return Err(Error::BadConfig(
                "m_values, n_values and q_values must all be non-empty".into(),
            ));
        }
        if self.scenarios < 1 {
            return Err(Error::BadConfig("scenarios must be at least 1".into()));
        }
        for &q in &self.q_values {
            if !(q > 0.0 && q < 1.0) {
                return Err(Error::Domain(format!(
                    "significance level must satisfy 0 < q < 1, got {q}"
                )));
            }
        }
        // The 1-dependent chain yields m−1 observations from m draws.
        let shrink = matches!(
            self.distribution,
            DistributionSpec::WeakDependentGaussianPower { .. }
        ) as usize;
        for &m in &self.m_values {
            for &n in &self.n_values {
                if n < 2 {
                    return Err(Error::BadConfig(format!(
                        "need at least 2 blocks, got n={n}"
                    )));
                }
                if m < n + shrink {
                    return Err(Error::InsufficientSample {
                        m,
                        need: n + shrink,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text)
            .map_err(|e| Error::BadConfig(format!("bad experiment spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Aggregated outcome of one (m, n, q) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub m: usize,
    pub n: usize,
    pub q: f64,
    pub rejections: usize,
    /// Scenarios that produced a statistic (errors are counted apart).
    pub scenarios: usize,
    pub failed_scenarios: usize,
    pub err: f64,
    /// `1 − err`; the Type II error when the generator is under H1.
    pub type2: f64,
    pub mean_statistic: f64,
    pub std_statistic: f64,
}

/// Per-scenario statistic values for each n of one fixed m, computed in
/// parallel but collected in scenario order.
fn scenario_statistics(
    distribution: &DistributionSpec,
    m: usize,
    n_values: &[usize],
    scenarios: usize,
    master_seed: u64,
    m_index: usize,
) -> Vec<Vec<Option<f64>>> {
    (0..scenarios)
        .into_par_iter()
        .map(|s| {
            let stream = RngStream::new(master_seed, (m_index * scenarios + s) as u64);
            match distribution.sample(stream, m) {
                Ok(sample) => n_values
                    .iter()
                    .map(|&n| {
                        summarize_blocks(&sample, n)
                            .and_then(|sm| compute_statistic(&sm))
                            .map(|v| v.value)
                            .ok()
                    })
                    .collect(),
                Err(_) => vec![None; n_values.len()],
            }
        })
        .collect()
}

/// Run the full grid. Scenario errors never abort a cell; they are
/// counted in `failed_scenarios`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<CellResult>> {
    spec.validate()?;
    let mut z_crit = Vec::with_capacity(spec.q_values.len());
    for &q in &spec.q_values {
        z_crit.push(normal_quantile(1.0 - q / 2.0)?);
    }
    let mut cells = Vec::new();
    for (mi, &m) in spec.m_values.iter().enumerate() {
        let stats = scenario_statistics(
            &spec.distribution,
            m,
            &spec.n_values,
            spec.scenarios,
            spec.master_seed,
            mi,
        );
        for (ni, &n) in spec.n_values.iter().enumerate() {
            // Ordered Welford pass keeps the summaries bit-stable.
            let mut count = 0usize;
            let mut mean = 0.0f64;
            let mut m2 = 0.0f64;
            let mut rejections = vec![0usize; spec.q_values.len()];
            for row in &stats {
                if let Some(v) = row[ni] {
                    count += 1;
                    let d1 = v - mean;
                    mean += d1 / count as f64;
                    m2 += d1 * (v - mean);
                    let z = standardize(v, n).abs();
                    for (qi, &crit) in z_crit.iter().enumerate() {
                        if z > crit {
                            rejections[qi] += 1;
                        }
                    }
                }
            }
            let std = if count > 1 {
                (m2 / (count - 1) as f64).sqrt()
            } else {
                f64::NAN
            };
            let mean = if count > 0 { mean } else { f64::NAN };
            for (qi, &q) in spec.q_values.iter().enumerate() {
                let err = if count > 0 {
                    rejections[qi] as f64 / count as f64
                } else {
                    f64::NAN
                };
                cells.push(CellResult {
                    m,
                    n,
                    q,
                    rejections: rejections[qi],
                    scenarios: count,
                    failed_scenarios: spec.scenarios - count,
                    err,
                    type2: 1.0 - err,
                    mean_statistic: mean,
                    std_statistic: std,
                });
            }
        }
    }
    Ok(cells)
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: usize, trials: usize, level: f64) -> Result<(f64, f64)> {
    if trials == 0 || successes > trials {
        return Err(Error::BadConfig(format!(
            "wilson interval needs 0 <= successes <= trials, got {successes}/{trials}"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!(
            "confidence level must be in (0,1), got {level}"
        )));
    }
    let z = normal_quantile(0.5 + level / 2.0)?;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Ok(((center - half).max(0.0), (center + half).min(1.0)))
}

/// Wilson interval on a cell's empirical rejection rate.
pub fn err_confidence_interval(cell: &CellResult, level: f64) -> Result<(f64, f64)> {
    wilson_interval(cell.rejections, cell.scenarios, level)
}

/// Least-squares fit of `log(type2)` against n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub amplitude: f64,
    pub rate: f64,
    pub r_squared: f64,
    /// Cells dropped because their Type II error was not inside (0,1).
    pub excluded: usize,
}

/// Fit `type2 ≈ amplitude · exp(−rate · n)` over cells with varying n.
/// Cells with type2 outside (0,1) are excluded (log undefined / no power).
pub fn type2_decay_fit(cells: &[CellResult]) -> Result<DecayFit> {
    let usable: Vec<(f64, f64)> = cells
        .iter()
        .filter(|c| c.type2 > 0.0 && c.type2 < 1.0)
        .map(|c| (c.n as f64, c.type2.ln()))
        .collect();
    let excluded = cells.len() - usable.len();
    if usable.len() < 3 {
        return Err(Error::Fit(usable.len()));
    }
    let k = usable.len() as f64;
    let mean_x = usable.iter().map(|p| p.0).sum::<f64>() / k;
    let mean_y = usable.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return Err(Error::BadConfig(
            "decay fit needs at least two distinct n values".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_tot: f64 = usable.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = usable
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let r_squared = if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(DecayFit {
        amplitude: intercept.exp(),
        rate: -slope,
        r_squared,
        excluded,
    })
}

/// The heuristic lower bound `max(0, 1 − C/n^{2/α−1})` on the rejection
/// probability under a stable alternative with index α ∈ (1,2). The
/// constant subsumes the q-dependence and is supplied by the caller; the
/// bound is a heuristic, not a theorem.
pub fn heuristic_power_bound(alpha: f64, q: f64, n: u64, c_constant: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::Domain(format!(
            "the heuristic bound needs 1 < alpha < 2, got {alpha}"
        )));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!(
            "significance level must satisfy 0 < q < 1, got {q}"
        )));
    }
    if n == 0 {
        return Err(Error::BadConfig("n must be a positive integer".into()));
    }
    if !(c_constant > 0.0 && c_constant.is_finite()) {
        return Err(Error::Domain(format!(
            "c_constant must be positive, got {c_constant}"
        )));
    }
    let exponent = 2.0 / alpha - 1.0;
    Ok((1.0 - c_constant / (n as f64).powf(exponent)).max(0.0))
}

/// Two-sided Kolmogorov–Smirnov distance between a sorted sample and a
/// reference CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let c = cdf(x);
        d = d.max(c - i as f64 / n).max((i + 1) as f64 / n - c);
    }
    d
}

/// Equal-width histogram over the value range. A degenerate range (all
/// values equal) yields a single unit-width bin holding everything.
pub fn histogram_from_values(values: &[f64], bins: usize) -> Result<(Vec<f64>, Vec<u64>)> {
    if values.is_empty() {
        return Err(Error::BadConfig("cannot bin an empty value set".into()));
    }
    if bins == 0 {
        return Err(Error::BadConfig("need at least one bin".into()));
    }
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Ok((vec![min - 0.5, min + 0.5], vec![values.len() as u64]));
    }
    let width = (max - min) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| min + i as f64 * width).collect();
    let mut counts = vec![0u64; bins];
    for &v in values {
        let idx = (((v - min) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    Ok((edges, counts))
}

/// One (distribution, m, n) cell evaluated over seeded scenarios: the
/// unit the histogram export works on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub distribution: DistributionSpec,
    pub m: usize,
    pub n: usize,
    pub scenarios: usize,
    #[serde(default)]
    pub master_seed: u64,
}

/// Histogram of the standardized statistic across scenarios, with its
/// Kolmogorov–Smirnov distance to the standard normal reference.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramExport {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// The reference the KS distance is taken against.
    pub reference_standard_normal: bool,
    pub ks_distance: f64,
}

/// Standardize `√n(S − 2/π)/σ_π` across the cell's scenarios and bin it.
pub fn standardized_histogram(cell: &CellSpec, bins: usize) -> Result<HistogramExport> {
    if cell.scenarios < 100 {
        return Err(Error::BadConfig(format!(
            "histogram export needs at least 100 scenarios, got {}",
            cell.scenarios
        )));
    }
    cell.distribution.validate()?;
    let stats = scenario_statistics(
        &cell.distribution,
        cell.m,
        &[cell.n],
        cell.scenarios,
        cell.master_seed,
        0,
    );
    let mut zs: Vec<f64> = stats
        .iter()
        .filter_map(|row| row[0].map(|v| standardize(v, cell.n)))
        .collect();
    if zs.is_empty() {
        return Err(Error::DegenerateSample);
    }
    zs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let ks = ks_distance(&zs, normal_cdf);
    let (bin_edges, counts) = histogram_from_values(&zs, bins)?;
    Ok(HistogramExport {
        bin_edges,
        counts,
        reference_standard_normal: true,
        ks_distance: ks,
    })
}

/// Report CSV: one row per cell, reals with 17 significant digits.
/// Header: `dist,param,m,n,q,scenarios,rejections,err,err_low,err_high,mean_stat,std_stat`.
pub fn write_report_csv<W: Write>(
    distribution: &DistributionSpec,
    cells: &[CellResult],
    mut w: W,
) -> Result<()> {
    writeln!(
        w,
        "dist,param,m,n,q,scenarios,rejections,err,err_low,err_high,mean_stat,std_stat"
    )?;
    let dist = distribution.kind_name();
    let param = distribution.param_string();
    for c in cells {
        let (lo, hi) = if c.scenarios > 0 {
            wilson_interval(c.rejections, c.scenarios, 0.95)?
        } else {
            (f64::NAN, f64::NAN)
        };
        writeln!(
            w,
            "{dist},{param},{},{},{:.16e},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            c.m,
            c.n,
            c.q,
            c.scenarios,
            c.rejections,
            c.err,
            lo,
            hi,
            c.mean_statistic,
            c.std_statistic
        )?;
    }
    Ok(())
}

/// Histogram CSV: `bin_left,bin_right,count`.
pub fn write_histogram_csv<W: Write>(hist: &HistogramExport, mut w: W) -> Result<()> {
    writeln!(w, "bin_left,bin_right,count")?;
    for (i, &c) in hist.counts.iter().enumerate() {
        writeln!(
            w,
            "{:.16e},{:.16e},{c}",
            hist.bin_edges[i],
            hist.bin_edges[i + 1]
        )?;
    }
    Ok(())
}
