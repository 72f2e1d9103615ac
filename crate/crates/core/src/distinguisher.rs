//! Monte Carlo harness for telling a signal source apart from uniform noise.
//!
//! Every trial draws its own generator from `subseed(seed, hypothesis, trial)`,
//! so reports are bitwise identical for any thread count.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, Continuous, ContinuousCDF};

use crate::spectral::{fwt_in_place, Distribution};
use crate::{Error, Result};

/// Batches smaller than `SPARSE_FACTOR * 2^n` trip the low-sample warning of
/// [`spectral_decide`].
pub const SPARSE_FACTOR: u64 = 10;

#[derive(Debug, Clone, PartialEq)]
pub enum SourceKind {
    Signal(Distribution),
    Noise,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalSource {
    kind: SourceKind,
    n: u32,
    seed: u64,
}

impl SignalSource {
    pub fn signal(f: Distribution, seed: u64) -> Self {
        let n = f.n();
        Self {
            kind: SourceKind::Signal(f),
            n,
            seed,
        }
    }

    pub fn noise(n: u32, seed: u64) -> Self {
        Self {
            kind: SourceKind::Noise,
            n,
            seed,
        }
    }

    pub fn kind(&self) -> &SourceKind {
        &self.kind
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn sampler(&self) -> CategoricalSampler {
        match &self.kind {
            SourceKind::Signal(f) => CategoricalSampler::new(f),
            SourceKind::Noise => CategoricalSampler::new(&Distribution::uniform(self.n)),
        }
    }
}

/// Histogram of `total` draws over `2^n` cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampleBatch {
    counts: Vec<u64>,
    total: u64,
}

impl SampleBatch {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() || !counts.len().is_power_of_two() {
            return Err(Error::Dimension { len: counts.len() });
        }
        let total = counts.iter().sum();
        Ok(Self { counts, total })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn n(&self) -> u32 {
        self.counts.len().trailing_zeros()
    }
}

/// Inverse-CDF sampler. A uniform `u` in `(0, 1]` selects the first cell with
/// `cdf >= u`, so boundary ties go to the lower index and zero-probability
/// cells are never selected.
#[derive(Debug, Clone)]
struct CategoricalSampler {
    cdf: Vec<f64>,
}

impl CategoricalSampler {
    fn new(f: &Distribution) -> Self {
        let probs = f.probabilities();
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        cdf[last..].iter_mut().for_each(|c| *c = 1.0);
        Self { cdf }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let u = 1.0 - rng.gen::<f64>();
        self.cdf.partition_point(|&c| c < u)
    }

    fn batch<R: Rng>(&self, samples: u64, rng: &mut R) -> SampleBatch {
        let mut counts = vec![0u64; self.cdf.len()];
        for _ in 0..samples {
            counts[self.sample(rng)] += 1;
        }
        SampleBatch {
            counts,
            total: samples,
        }
    }
}

/// `N` i.i.d. draws from the source, aggregated to counts. Deterministic in
/// the source seed.
pub fn draw(source: &SignalSource, samples: u64) -> SampleBatch {
    let mut rng = ChaCha8Rng::seed_from_u64(source.seed);
    source.sampler().batch(samples, &mut rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Hypothesis {
    Signal,
    Noise,
}

/// `sum_i counts_i * ln(f(i) 2^n)`; `-inf` if a count lands where `f` is zero.
pub fn log_likelihood_ratio(batch: &SampleBatch, f: &Distribution) -> Result<f64> {
    if batch.counts.len() != f.len() {
        return Err(Error::LengthMismatch {
            expected: f.len(),
            got: batch.counts.len(),
        });
    }
    let scale = f.len() as f64;
    let mut llr = 0.0;
    for (&c, &p) in batch.counts.iter().zip(f.probabilities()) {
        if c == 0 {
            continue;
        }
        if p <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        llr += c as f64 * (p * scale).ln();
    }
    Ok(llr)
}

/// Neyman-Pearson test for known `f`: signal iff the log-likelihood ratio
/// is strictly positive.
pub fn llr_decide(batch: &SampleBatch, f: &Distribution) -> Result<Hypothesis> {
    Ok(if log_likelihood_ratio(batch, f)? > 0.0 {
        Hypothesis::Signal
    } else {
        Hypothesis::Noise
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralDecision {
    pub hypothesis: Hypothesis,
    /// `N * sum_{i != 0} ghat(i)^2` of the empirical distribution `g`.
    pub statistic: f64,
    pub threshold: f64,
    pub degrees_of_freedom: u64,
    /// Set when `N < 10 * 2^n` and the chi-square asymptotics are unreliable.
    pub low_sample: bool,
}

/// Upper `alpha` quantile of the chi-square distribution with `df` degrees
/// of freedom.
pub fn chi_square_upper_quantile(df: u64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Argument(format!("alpha = {alpha} outside (0, 1)")));
    }
    if df == 0 {
        return Ok(0.0);
    }
    let dist = ChiSquared::new(df as f64).map_err(|e| Error::Argument(e.to_string()))?;
    // statrs bisects only to ~1e-5; polish on the upper tail with Newton
    let mut x = dist.inverse_cdf(1.0 - alpha);
    for _ in 0..8 {
        let density = dist.pdf(x);
        if !(density > 0.0) {
            break;
        }
        let next = x + (dist.sf(x) - alpha) / density;
        if !(next > 0.0) || (next - x).abs() <= 1e-14 * x {
            x = next.max(x * 0.5);
            break;
        }
        x = next;
    }
    Ok(x)
}

/// Transform-domain chi-square test for unknown `f`: signal iff
/// `N * sum_{i != 0} ghat(i)^2` exceeds the `chi2(2^n - 1)` upper `alpha`
/// quantile.
pub fn spectral_decide(batch: &SampleBatch, alpha: f64) -> Result<SpectralDecision> {
    let df = batch.counts.len() as u64 - 1;
    let threshold = chi_square_upper_quantile(df, alpha)?;
    let statistic = if batch.total == 0 {
        0.0
    } else {
        let mut y: Vec<f64> = batch.counts.iter().map(|&c| c as f64).collect();
        fwt_in_place(&mut y)?;
        y[1..].iter().map(|v| v * v).sum::<f64>() / batch.total as f64
    };
    let hypothesis = if df > 0 && statistic > threshold {
        Hypothesis::Signal
    } else {
        Hypothesis::Noise
    };
    Ok(SpectralDecision {
        hypothesis,
        statistic,
        threshold,
        degrees_of_freedom: df,
        low_sample: batch.total < SPARSE_FACTOR * batch.counts.len() as u64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Decider {
    Llr,
    Spectral { alpha: f64 },
}

impl Decider {
    pub const DEFAULT_ALPHA: f64 = 0.05;

    pub fn name(&self) -> &'static str {
        match self {
            Decider::Llr => "llr",
            Decider::Spectral { .. } => "spectral",
        }
    }

    /// Resolves a decider identifier; `alpha` only applies to `spectral`.
    pub fn from_name(name: &str, alpha: f64) -> Result<Self> {
        match name {
            "llr" => Ok(Decider::Llr),
            "spectral" => {
                chi_square_upper_quantile(1, alpha)?;
                Ok(Decider::Spectral { alpha })
            }
            other => Err(Error::Argument(format!(
                "unknown decider `{other}` (expected `llr` or `spectral`)"
            ))),
        }
    }

    fn decide(&self, batch: &SampleBatch, f: &Distribution) -> Result<Hypothesis> {
        match *self {
            Decider::Llr => llr_decide(batch, f),
            Decider::Spectral { alpha } => Ok(spectral_decide(batch, alpha)?.hypothesis),
        }
    }
}

impl FromStr for Decider {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Decider::from_name(s, Decider::DEFAULT_ALPHA)
    }
}

impl fmt::Display for Decider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub n: u32,
    pub samples: u64,
    pub trials: u64,
    pub seed: u64,
    /// Fraction of signal trials decided as noise.
    pub error_signal: f64,
    /// Fraction of noise trials decided as signal.
    pub error_noise: f64,
    pub mean_error: f64,
    pub decider: Decider,
    pub low_sample: bool,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial seed for `hypothesis` (0 = signal, 1 = noise) and `trial`.
pub fn subseed(seed: u64, hypothesis: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ hypothesis) ^ trial)
}

/// Runs `trials` experiments under each hypothesis with `samples` draws per
/// experiment and reports the decider's error rates (equal priors).
pub fn monte_carlo(
    f: &Distribution,
    samples: u64,
    trials: u64,
    decider: Decider,
    seed: u64,
) -> Result<SimulationReport> {
    if trials == 0 {
        return Err(Error::Argument("trials must be at least 1".into()));
    }
    if samples == 0 {
        return Err(Error::Argument("samples must be at least 1".into()));
    }
    let samplers = [
        (Hypothesis::Signal, CategoricalSampler::new(f)),
        (
            Hypothesis::Noise,
            CategoricalSampler::new(&Distribution::uniform(f.n())),
        ),
    ];
    let mut errors = [0u64; 2];
    for (h, (truth, sampler)) in samplers.iter().enumerate() {
        errors[h] = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(subseed(seed, h as u64, t));
                let batch = sampler.batch(samples, &mut rng);
                decider.decide(&batch, f).map(|d| u64::from(d != *truth))
            })
            .try_reduce(|| 0, |a, b| Ok(a + b))?;
    }
    let error_signal = errors[0] as f64 / trials as f64;
    let error_noise = errors[1] as f64 / trials as f64;
    Ok(SimulationReport {
        n: f.n(),
        samples,
        trials,
        seed,
        error_signal,
        error_noise,
        mean_error: (error_signal + error_noise) / 2.0,
        decider,
        low_sample: matches!(decider, Decider::Spectral { .. })
            && samples < SPARSE_FACTOR * f.len() as u64,
    })
}
