//! Seeded stationary chain sampling and batch-means estimates of the
//! asymptotic variance.
//!
//! Paths come from ChaCha8 streams: the seed picks the key and the replicate
//! index picks the stream, so replicate `r` of seed `s` is the same sequence on
//! every platform and independent of every other replicate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{
    check_irreducible, compute_period, Observable, StationaryDistribution, TransitionKernel,
};
use crate::spectral::asymptotic_variance_spectral;

/// Minimum number of batches for a batch-means standard error.
pub const MIN_BATCHES: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainPath {
    pub states: Vec<usize>,
    pub seed: u64,
    pub stream: u64,
    pub kernel_id: String,
}

impl ChainPath {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Newline-delimited state indices.
    pub fn to_lines(&self) -> String {
        let mut out = String::with_capacity(self.states.len() * 3);
        for s in &self.states {
            out.push_str(&s.to_string());
            out.push('\n');
        }
        out
    }

    /// Fraction of time spent in each of `n` states.
    pub fn occupancy(&self, n: usize) -> Vec<f64> {
        let mut counts = vec![0usize; n];
        for &s in &self.states {
            counts[s] += 1;
        }
        counts
            .iter()
            .map(|&c| c as f64 / self.states.len() as f64)
            .collect()
    }
}

/// Inverse-CDF sampler for a finite distribution.
struct Categorical {
    cdf: Vec<f64>,
    last_positive: usize,
}

impl Categorical {
    fn new(weights: &[f64]) -> Self {
        let mut acc = 0.0;
        let cdf = weights
            .iter()
            .map(|w| {
                acc += w.max(0.0);
                acc
            })
            .collect();
        let last_positive = weights.iter().rposition(|&w| w > 0.0).unwrap_or(0);
        Self { cdf, last_positive }
    }

    fn draw(&self, u: f64) -> usize {
        // first index with cdf > u; zero-probability states never qualify
        let i = self.cdf.partition_point(|&c| c <= u);
        i.min(self.last_positive)
    }
}

/// Stationary path of length `n_steps`: `X_1 ~ π`, then transitions from `k`.
pub fn sample_chain(
    k: &TransitionKernel,
    pi: &StationaryDistribution,
    n_steps: usize,
    seed: u64,
) -> Result<ChainPath> {
    sample_chain_stream(k, pi, n_steps, seed, 0)
}

/// As [`sample_chain`], drawing from stream `stream` of the seeded generator.
pub fn sample_chain_stream(
    k: &TransitionKernel,
    pi: &StationaryDistribution,
    n_steps: usize,
    seed: u64,
    stream: u64,
) -> Result<ChainPath> {
    if k.n() != pi.n() {
        return Err(Error::DimensionMismatch {
            expected: pi.n(),
            found: k.n(),
        });
    }
    if n_steps == 0 {
        return Err(Error::InvalidArgument(
            "a path needs at least one step".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let start = Categorical::new(pi.as_slice());
    let rows: Vec<Categorical> = k.matrix().rows().map(Categorical::new).collect();
    let mut states = Vec::with_capacity(n_steps);
    let mut x = start.draw(rng.gen::<f64>());
    states.push(x);
    for _ in 1..n_steps {
        x = rows[x].draw(rng.gen::<f64>());
        states.push(x);
    }
    Ok(ChainPath {
        states,
        seed,
        stream,
        kernel_id: String::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BatchMethod {
    BatchMeans,
    OverlappingBatch,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalVariance {
    pub estimate: f64,
    pub stderr: f64,
    pub method: BatchMethod,
    pub batch_count: usize,
    pub batch_len: usize,
}

/// `⌊√N⌋`, at least 1.
pub fn default_batch_len(n_steps: usize) -> usize {
    ((n_steps as f64).sqrt().floor() as usize).max(1)
}

/// Batch-means estimate of the asymptotic variance of `f` along `path`.
///
/// Non-overlapping: `b · s²` of the `a = ⌊N/b⌋` batch means, with the χ²
/// standard error `estimate · √(2/(a−1))`. Overlapping: all `N − b + 1`
/// windows, scaled by `N b / ((N − b)(N − b + 1))`, with standard error
/// `estimate · √(4b / 3N)`.
pub fn empirical_asymptotic_variance(
    path: &ChainPath,
    f: &Observable,
    pi: &StationaryDistribution,
    method: BatchMethod,
    batch_len: usize,
) -> Result<EmpiricalVariance> {
    if f.n() != pi.n() {
        return Err(Error::DimensionMismatch {
            expected: pi.n(),
            found: f.n(),
        });
    }
    if batch_len == 0 {
        return Err(Error::InvalidArgument(
            "batch length must be positive".into(),
        ));
    }
    let batch_count = path.len() / batch_len;
    if batch_count < MIN_BATCHES {
        return Err(Error::TooFewBatches {
            available: batch_count,
            required: MIN_BATCHES,
        });
    }
    let values: Vec<f64> = path.states.iter().map(|&s| f.values()[s]).collect();
    let b = batch_len as f64;
    match method {
        BatchMethod::BatchMeans => {
            let used = &values[..batch_count * batch_len];
            let means: Vec<f64> = used
                .chunks_exact(batch_len)
                .map(|c| c.iter().sum::<f64>() / b)
                .collect();
            let grand = means.iter().sum::<f64>() / batch_count as f64;
            let ss: f64 = means.iter().map(|m| (m - grand).powi(2)).sum();
            let estimate = b * ss / (batch_count - 1) as f64;
            let stderr = estimate * (2.0 / (batch_count - 1) as f64).sqrt();
            Ok(EmpiricalVariance {
                estimate,
                stderr,
                method,
                batch_count,
                batch_len,
            })
        }
        BatchMethod::OverlappingBatch => {
            let n = values.len();
            let grand = values.iter().sum::<f64>() / n as f64;
            let mut window: f64 = values[..batch_len].iter().sum();
            let mut ss = (window / b - grand).powi(2);
            for j in batch_len..n {
                window += values[j] - values[j - batch_len];
                ss += (window / b - grand).powi(2);
            }
            let nf = n as f64;
            let estimate = nf * b * ss / ((nf - b) * (nf - b + 1.0));
            let stderr = estimate * (4.0 * b / (3.0 * nf)).sqrt();
            Ok(EmpiricalVariance {
                estimate,
                stderr,
                method,
                batch_count,
                batch_len,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationComparison {
    pub spectral: f64,
    pub estimates: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation across replicates.
    pub spread: f64,
    /// Standard error of `mean`.
    pub mean_stderr: f64,
    /// `(mean − spectral) / mean_stderr`
    pub z: f64,
    pub n_steps: usize,
    pub replicates: usize,
    pub seed: u64,
    pub batch_len: usize,
    /// Set when the batch length was rounded up to a multiple of the period.
    pub batch_len_adjusted: bool,
    pub period: usize,
    pub method: BatchMethod,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationOptions {
    pub n_steps: usize,
    pub replicates: usize,
    pub seed: u64,
    /// Defaults to `⌊√N⌋`.
    pub batch_len: Option<usize>,
    pub method: BatchMethod,
}

/// Replicated batch-means estimates against the spectral value.
pub fn empirical_vs_spectral(
    f: &Observable,
    k: &TransitionKernel,
    pi: &StationaryDistribution,
    opts: &SimulationOptions,
) -> Result<SimulationComparison> {
    if opts.replicates == 0 {
        return Err(Error::InvalidArgument("need at least one replicate".into()));
    }
    let spectral = asymptotic_variance_spectral(f, k, pi)?
        .value
        .finite()
        .expect("irreducible kernels on finite spaces have finite variance");
    debug_assert!(check_irreducible(k));
    let period = compute_period(k)?.period;
    let requested = opts
        .batch_len
        .unwrap_or_else(|| default_batch_len(opts.n_steps));
    let batch_len = requested.div_ceil(period) * period;

    let runs: Vec<EmpiricalVariance> = (0..opts.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let path = sample_chain_stream(k, pi, opts.n_steps, opts.seed, r)?;
            empirical_asymptotic_variance(&path, f, pi, opts.method, batch_len)
        })
        .collect::<Result<_>>()?;

    let reps = runs.len() as f64;
    let estimates: Vec<f64> = runs.iter().map(|r| r.estimate).collect();
    let stderrs: Vec<f64> = runs.iter().map(|r| r.stderr).collect();
    let mean = estimates.iter().sum::<f64>() / reps;
    let spread = if runs.len() > 1 {
        (estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (reps - 1.0)).sqrt()
    } else {
        0.0
    };
    let mean_stderr = if runs.len() > 1 {
        spread / reps.sqrt()
    } else {
        stderrs[0]
    };
    let diff = mean - spectral;
    let z = if mean_stderr > 0.0 {
        diff / mean_stderr
    } else if diff.abs() <= 1e-12 {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    };
    Ok(SimulationComparison {
        spectral,
        estimates,
        stderrs,
        mean,
        spread,
        mean_stderr,
        z,
        n_steps: opts.n_steps,
        replicates: opts.replicates,
        seed: opts.seed,
        batch_len,
        batch_len_adjusted: batch_len != requested,
        period,
        method: opts.method,
    })
}
