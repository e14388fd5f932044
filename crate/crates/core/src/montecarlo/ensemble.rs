use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sample_s_with, RadialSampler, SamplingGeometry, SeedContext, RNG_IDENTITY};
use crate::pws::{CumulantSet, PairCoefficient};
use crate::{Error, Result};

/// Number of batches used for batch-means and jackknife errors.
const BATCHES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub geometry: SamplingGeometry,
    pub coeff: PairCoefficient<f64>,
    pub realizations: usize,
    pub seed: u64,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    /// In realization order.
    pub samples_s: Vec<f64>,
    pub mean_s: f64,
    pub std_s: f64,
    /// Batch-means standard error of `mean_s`.
    pub stderr_mean: f64,
    /// `std_s / mean_s` and its jackknife standard error.
    pub relative_fluctuation: f64,
    pub stderr_relative_fluctuation: f64,
    /// Unbiased k-statistics of orders 1..4.
    pub cumulants_s: CumulantSet<f64>,
    /// Jackknife standard errors of `cumulants_s`.
    pub cumulant_stderr: Vec<f64>,
    pub seed: u64,
    pub realization_count: usize,
    pub rng: String,
}

/// Unbiased estimates `k₁..k₄` of the first four cumulants. Orders that need
/// more samples than available are NaN.
pub fn k_statistics(samples: &[f64]) -> [f64; 4] {
    let n = samples.len();
    if n == 0 {
        return [f64::NAN; 4];
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in samples {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    let k2 = if n > 1 {
        nf / (nf - 1.0) * m2
    } else {
        f64::NAN
    };
    let k3 = if n > 2 {
        nf * nf / ((nf - 1.0) * (nf - 2.0)) * m3
    } else {
        f64::NAN
    };
    let k4 = if n > 3 {
        nf * nf * ((nf + 1.0) * m4 - 3.0 * (nf - 1.0) * m2 * m2)
            / ((nf - 1.0) * (nf - 2.0) * (nf - 3.0))
    } else {
        f64::NAN
    };
    [mean, k2, k3, k4]
}

/// Delete-one-batch jackknife of a vector-valued statistic over `batches`
/// contiguous batches. Returns the full-sample estimate and the standard
/// errors.
pub fn jackknife<const K: usize>(
    samples: &[f64],
    batches: usize,
    statistic: impl Fn(&[f64]) -> [f64; K],
) -> ([f64; K], [f64; K]) {
    let full = statistic(samples);
    let b = batches.min(samples.len());
    if b < 2 {
        return (full, [f64::NAN; K]);
    }
    let bounds: Vec<usize> = (0..=b).map(|i| i * samples.len() / b).collect();
    let mut scratch = Vec::with_capacity(samples.len());
    let leave_out: Vec<[f64; K]> = (0..b)
        .map(|i| {
            scratch.clear();
            scratch.extend_from_slice(&samples[..bounds[i]]);
            scratch.extend_from_slice(&samples[bounds[i + 1]..]);
            statistic(&scratch)
        })
        .collect();
    let bf = b as f64;
    let mut se = [0.0; K];
    for (k, se_k) in se.iter_mut().enumerate() {
        let mean = leave_out.iter().map(|v| v[k]).sum::<f64>() / bf;
        let ss = leave_out.iter().map(|v| (v[k] - mean).powi(2)).sum::<f64>();
        *se_k = ((bf - 1.0) / bf * ss).sqrt();
    }
    (full, se)
}

fn batch_means_stderr(samples: &[f64], batches: usize) -> f64 {
    let b = batches.min(samples.len());
    if b < 2 {
        return f64::NAN;
    }
    let means: Vec<f64> = (0..b)
        .map(|i| {
            let chunk = &samples[i * samples.len() / b..(i + 1) * samples.len() / b];
            chunk.iter().sum::<f64>() / chunk.len() as f64
        })
        .collect();
    let grand = means.iter().sum::<f64>() / b as f64;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (b as f64 - 1.0);
    (var / b as f64).sqrt()
}

/// Samples `realizations` independent configurations. The output depends
/// only on `(geometry, coeff, realizations, seed)`, never on `workers`.
pub fn run_ensemble(config: &EnsembleConfig) -> Result<EnsembleResult> {
    config.geometry.validate()?;
    if config.realizations == 0 {
        return Err(Error::EmptySample(
            "at least one realization is required".into(),
        ));
    }
    let sampler = RadialSampler::for_geometry(&config.geometry);
    let draw = || -> Result<Vec<f64>> {
        (0..config.realizations as u64)
            .into_par_iter()
            .map(|index| {
                sample_s_with(
                    SeedContext {
                        seed: config.seed,
                        index,
                    },
                    &config.geometry,
                    &config.coeff,
                    &sampler,
                )
            })
            .collect()
    };
    let samples_s = if config.workers == 0 {
        draw()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::InvalidGeometry(format!("thread pool: {e}")))?
            .install(draw)?
    };
    Ok(summarize(samples_s, config.seed))
}

fn summarize(samples_s: Vec<f64>, seed: u64) -> EnsembleResult {
    let k = k_statistics(&samples_s);
    let (_, k_se) = jackknife(&samples_s, BATCHES, k_statistics);
    let gamma = |xs: &[f64]| {
        let k = k_statistics(xs);
        [k[1].sqrt() / k[0]]
    };
    let ([rel], [rel_se]) = jackknife(&samples_s, BATCHES, gamma);
    let n = samples_s.len();
    EnsembleResult {
        mean_s: k[0],
        std_s: if n > 1 { k[1].sqrt() } else { 0.0 },
        stderr_mean: batch_means_stderr(&samples_s, BATCHES),
        relative_fluctuation: rel,
        stderr_relative_fluctuation: rel_se,
        cumulants_s: CumulantSet {
            order_max: 4,
            values: k.to_vec(),
        },
        cumulant_stderr: k_se.to_vec(),
        seed,
        realization_count: n,
        rng: RNG_IDENTITY.to_string(),
        samples_s,
    }
}
