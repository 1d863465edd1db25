//! The normalized bivariation statistic and its bridge-path cross-check.
//!
//! The statistic of a sample `X_1..X_m` split into `n` blocks is
//!
//! ```text
//!   S = Σ_{i=1}^{n-1} |D_i||D_{i+1}|  /  Σ_{i=1}^{n} D_i²
//! ```
//!
//! where `D_i` is the mean-centered i-th block sum. Block `i` covers the
//! indices `(⌊m(i−1)/n⌋, ⌊mi/n⌋]`, so nothing is truncated when `n ∤ m`.
//! The same number is obtained by evaluating the bivariation/quadratic
//! variation ratio on the increments of the pinned partial-sum path
//! ([`build_bridge_path`]); the two routes must agree to 1e-12 relative
//! for any normalizer, which is the built-in algebra oracle.
//!
//! Summation is compensated (Neumaier) inside blocks and across block
//! sums so the oracle equivalence survives samples of length 1e8.

use std::io::Write;

use crate::error::{Error, Result};
use crate::sample::Sample;

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// The sufficient statistic for the bivariation ratio: per-block sums and
/// counts plus the grand total.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSummary {
    m: usize,
    n: usize,
    block_sums: Vec<f64>,
    block_counts: Vec<usize>,
    total_sum: f64,
}

impl BlockSummary {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block_sums(&self) -> &[f64] {
        &self.block_sums
    }

    pub fn block_counts(&self) -> &[usize] {
        &self.block_counts
    }

    pub fn total_sum(&self) -> f64 {
        self.total_sum
    }

    pub fn mean(&self) -> f64 {
        self.total_sum / self.m as f64
    }
}

#[inline]
fn block_boundary(m: usize, n: usize, i: usize) -> usize {
    ((m as u128 * i as u128) / n as u128) as usize
}

/// Streaming builder of a [`BlockSummary`]: O(n) state, one pass, and the
/// result is independent of how the input is chunked.
#[derive(Debug, Clone)]
pub struct BlockAccumulator {
    m: usize,
    n: usize,
    position: usize,
    block: usize,
    boundary: usize,
    sums: Vec<f64>,
    counts: Vec<usize>,
    current: NeumaierSum,
}

impl BlockAccumulator {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::BadConfig(format!(
                "need at least 2 blocks, got n={n}"
            )));
        }
        if m < n {
            return Err(Error::InsufficientSample { m, need: n });
        }
        Ok(Self {
            m,
            n,
            position: 0,
            block: 0,
            boundary: block_boundary(m, n, 1),
            sums: Vec::with_capacity(n),
            counts: Vec::with_capacity(n),
            current: NeumaierSum::default(),
        })
    }

    /// Number of per-block accumulator cells held; stays at O(n) no matter
    /// how long the input is.
    pub fn state_cells(&self) -> usize {
        self.sums.capacity() + self.counts.capacity()
    }

    fn seal_block(&mut self) {
        let start = block_boundary(self.m, self.n, self.block);
        self.sums.push(self.current.value());
        self.counts.push(self.boundary - start);
        self.block += 1;
        self.boundary = block_boundary(self.m, self.n, self.block + 1);
        self.current = NeumaierSum::default();
    }

    pub fn push(&mut self, x: f64) -> Result<()> {
        if self.position == self.m {
            return Err(Error::BadConfig(format!(
                "accumulator already holds all {} values",
                self.m
            )));
        }
        self.current.add(x);
        self.position += 1;
        if self.position == self.boundary {
            self.seal_block();
        }
        Ok(())
    }

    pub fn feed(&mut self, chunk: &[f64]) -> Result<()> {
        for &x in chunk {
            self.push(x)?;
        }
        Ok(())
    }

    pub fn finish(self) -> Result<BlockSummary> {
        if self.position != self.m {
            return Err(Error::BadConfig(format!(
                "accumulator was fed {} of {} values",
                self.position, self.m
            )));
        }
        debug_assert_eq!(self.sums.len(), self.n);
        // The grand total is the same compensated walk over the block sums
        // that build_bridge_path replays, so the path endpoint is exactly 0.
        let mut total = NeumaierSum::default();
        for &b in &self.sums {
            total.add(b);
        }
        Ok(BlockSummary {
            m: self.m,
            n: self.n,
            block_sums: self.sums,
            block_counts: self.counts,
            total_sum: total.value(),
        })
    }
}

/// Split a sample into `n` blocks in one pass.
pub fn summarize_blocks(sample: &Sample, n: usize) -> Result<BlockSummary> {
    let mut acc = BlockAccumulator::new(sample.len(), n)?;
    acc.feed(sample.values())?;
    acc.finish()
}

/// The statistic value together with the (n, m) it was computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatisticValue {
    pub value: f64,
    pub n: usize,
    pub m: usize,
}

/// Bivariation / quadratic-variation ratio of a deviation sequence.
fn deviation_ratio(d: &[f64]) -> Result<f64> {
    let mut num = NeumaierSum::default();
    let mut den = NeumaierSum::default();
    den.add(d[0] * d[0]);
    for i in 1..d.len() {
        num.add(d[i - 1].abs() * d[i].abs());
        den.add(d[i] * d[i]);
    }
    let den = den.value();
    if den == 0.0 {
        return Err(Error::DegenerateSample);
    }
    Ok(num.value() / den)
}

/// The mean-centered bivariation statistic from a block summary.
pub fn compute_statistic(summary: &BlockSummary) -> Result<StatisticValue> {
    let mean = summary.mean();
    let d: Vec<f64> = summary
        .block_sums
        .iter()
        .zip(&summary.block_counts)
        .map(|(&b, &c)| b - c as f64 * mean)
        .collect();
    Ok(StatisticValue {
        value: deviation_ratio(&d)?,
        n: summary.n,
        m: summary.m,
    })
}

/// Same ratio without mean-centering (the `S̃` variant used to discuss
/// the large-m behaviour under heavy tails).
pub fn compute_uncentered_statistic(summary: &BlockSummary) -> Result<StatisticValue> {
    Ok(StatisticValue {
        value: deviation_ratio(&summary.block_sums)?,
        n: summary.n,
        m: summary.m,
    })
}

/// Convenience wrapper: summarize then evaluate without centering.
pub fn uncentered_statistic(sample: &Sample, n: usize) -> Result<StatisticValue> {
    compute_uncentered_statistic(&summarize_blocks(sample, n)?)
}

/// The pinned partial-sum path on the grid `0, 1/n, …, 1`.
///
/// `values[i] = (S_{b_i} − (b_i/m)·S_m) / normalizer` with
/// `b_i = ⌊m·i/n⌋`, so both endpoints are exactly 0 and the increments
/// are exactly the centered block sums divided by the normalizer. When
/// `n | m` this is the textbook bridge `(S_{⌊mt⌋} − t·S_m)/c` at `t = i/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgePath {
    grid: Vec<f64>,
    values: Vec<f64>,
    normalizer: f64,
    m: usize,
}

impl BridgePath {
    /// Build a path directly from values on a uniform grid (endpoints
    /// included); mostly useful for tests and synthetic paths.
    pub fn from_values(values: Vec<f64>, normalizer: f64) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::BadConfig(format!(
                "a bridge path needs at least 3 grid points, got {}",
                values.len()
            )));
        }
        let n = values.len() - 1;
        let grid = (0..=n).map(|i| i as f64 / n as f64).collect();
        Ok(Self {
            grid,
            values,
            normalizer,
            m: n,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `t,z` CSV with 17-significant-digit reals.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,z")?;
        for (t, z) in self.grid.iter().zip(&self.values) {
            writeln!(w, "{t:.16e},{z:.16e}")?;
        }
        Ok(())
    }
}

/// Construct the pinned path of a sample. The normalizer only rescales
/// the exported values; it cancels in the statistic.
pub fn build_bridge_path(sample: &Sample, n: usize, normalizer: f64) -> Result<BridgePath> {
    if !(normalizer > 0.0 && normalizer.is_finite()) {
        return Err(Error::Domain(format!(
            "normalizer must be positive and finite, got {normalizer}"
        )));
    }
    let summary = summarize_blocks(sample, n)?;
    let m = summary.m as f64;
    let total = summary.total_sum;
    let mut grid = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    grid.push(0.0);
    values.push(0.0);
    let mut prefix = NeumaierSum::default();
    for i in 1..=n {
        prefix.add(summary.block_sums[i - 1]);
        let b = block_boundary(summary.m, n, i) as f64;
        grid.push(i as f64 / n as f64);
        values.push((prefix.value() - (b / m) * total) / normalizer);
    }
    Ok(BridgePath {
        grid,
        values,
        normalizer,
        m: summary.m,
    })
}

/// Evaluate the bivariation ratio on the increments of a path. For a path
/// built by [`build_bridge_path`] this MUST agree with
/// [`compute_statistic`] on the same sample to 1e-12 relative, whatever
/// the normalizer; that is the algebra oracle for the block formula.
pub fn statistic_from_path(path: &BridgePath) -> Result<StatisticValue> {
    let v = &path.values;
    if v.len() < 3 {
        return Err(Error::BadConfig(
            "a path needs at least 3 grid points".into(),
        ));
    }
    let d: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(StatisticValue {
        value: deviation_ratio(&d)?,
        n: v.len() - 1,
        m: path.m,
    })
}
