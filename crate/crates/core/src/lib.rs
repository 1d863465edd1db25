//! Decide whether a sampled random variable lies in the Gaussian domain
//! of attraction or in that of a stable law with index below 2.
//!
//! Given an i.i.d. (or 1-dependent) sample, the library aggregates it
//! into `n` blocks, forms the ratio of the realized bivariation to the
//! realized quadratic variation of the centered block sums, and compares
//! the result against its null distribution: under the Gaussian
//! hypothesis the ratio concentrates at `2/π` with asymptotic variance
//! `σ_π²/n`, while under a heavy-tailed alternative it collapses to 0.
//! Rejection certifies that the sampled variable cannot have a finite
//! second moment.
//!
//! Modules:
//! - [`dist`]: seeded reproducible generators (normal, `|G|^{-r}`,
//!   stable via Chambers–Mallows–Stuck, a 1-dependent chain), sample
//!   file I/O, and standard-normal CDF/quantile utilities.
//! - [`statistic`]: one-pass block summaries, the bivariation statistic,
//!   and the pinned partial-sum path that doubles as an exactness oracle.
//! - [`hypotest`]: the rejection region, z-scores and p-values.
//! - [`montecarlo`]: seeded parallel experiment grids, rejection-rate
//!   reports, histograms and decay fits.

pub mod dist;
pub mod error;
pub mod hypotest;
pub mod montecarlo;
pub mod sample;
pub mod statistic;

pub use error::{Error, Result};
pub use sample::{Provenance, Sample};
