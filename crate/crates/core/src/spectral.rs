//! Walsh-Hadamard analysis over `GF(2)^n`-indexed real arrays.
//!
//! The forward transform is unnormalised,
//! `y[i] = sum_j (-1)^<i,j> x[j]`, so integer histograms keep integer
//! spectra. The inverse divides by `2^n`.
//!
//! Index/tuple convention: a pattern `(X_0, ..., X_{n-1})` maps to the
//! integer whose most significant bit is `X_0`, e.g. `(0,1,1)` is index 3
//! for `n = 3`.

use serde::Serialize;

use crate::{Error, Result};

/// Tolerance on `sum(f) == 1` for a [`Distribution`].
pub const SUM_TOLERANCE: f64 = 1e-9;

fn exponent_of(len: usize) -> Result<u32> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::Dimension { len });
    }
    Ok(len.trailing_zeros())
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// A time-domain array of `2^n` finite reals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealSignal {
    values: Vec<f64>,
    n: u32,
}

impl RealSignal {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let n = exponent_of(values.len())?;
        check_finite(&values)?;
        Ok(Self { values, n })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Dimension exponent: the signal has `2^n` entries.
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Transform-domain coefficients; index 0 is the trivial coefficient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalshSpectrum {
    coefficients: Vec<f64>,
    n: u32,
}

impl WalshSpectrum {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        let n = exponent_of(coefficients.len())?;
        check_finite(&coefficients)?;
        Ok(Self { coefficients, n })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<f64> {
        self.coefficients
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Sum of squares of the nontrivial coefficients.
    pub fn nontrivial_energy(&self) -> f64 {
        self.coefficients[1..].iter().map(|c| c * c).sum()
    }
}

/// A probability distribution over `GF(2)^n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Distribution {
    probabilities: RealSignal,
}

impl Distribution {
    /// Validates nonnegativity and `|sum - 1| <= 1e-9`.
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        let signal = RealSignal::new(probabilities)?;
        if let Some(i) = signal.values.iter().position(|&p| p < 0.0) {
            return Err(Error::NotADistribution(format!(
                "negative probability {} at index {i}",
                signal.values[i]
            )));
        }
        let sum: f64 = signal.values.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::NotADistribution(format!(
                "probabilities sum to {sum}"
            )));
        }
        Ok(Self {
            probabilities: signal,
        })
    }

    /// Normalises a histogram of counts.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::NotADistribution("all counts are zero".into()));
        }
        let total = total as f64;
        Self::new(counts.iter().map(|&c| c as f64 / total).collect())
    }

    pub fn uniform(n: u32) -> Self {
        let len = 1usize << n;
        Self {
            probabilities: RealSignal {
                values: vec![1.0 / len as f64; len],
                n,
            },
        }
    }

    pub fn point_mass(n: u32, index: usize) -> Result<Self> {
        let len = 1usize << n;
        if index >= len {
            return Err(Error::Argument(format!(
                "index {index} out of range for 2^{n} cells"
            )));
        }
        let mut values = vec![0.0; len];
        values[index] = 1.0;
        Ok(Self {
            probabilities: RealSignal { values, n },
        })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities.values
    }

    pub fn as_signal(&self) -> &RealSignal {
        &self.probabilities
    }

    pub fn n(&self) -> u32 {
        self.probabilities.n
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// Deviations from uniform, `u_i = f(i) - 2^-n`.
    pub fn deviations(&self) -> Vec<f64> {
        let base = 1.0 / self.len() as f64;
        self.probabilities().iter().map(|p| p - base).collect()
    }

    pub fn is_uniform(&self) -> bool {
        let base = 1.0 / self.len() as f64;
        self.probabilities().iter().all(|&p| p == base)
    }
}

/// An output pattern selecting the parity `<m, X>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Mask(usize);

impl Mask {
    pub fn new(index: usize) -> Self {
        Self(index)
    }

    /// Builds a mask from an MSB-first bit tuple.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        if bits.len() >= usize::BITS as usize {
            return Err(Error::Argument(format!("{} bits do not fit", bits.len())));
        }
        bits.iter()
            .try_fold(0usize, |acc, &b| match b {
                0 | 1 => Ok((acc << 1) | b as usize),
                _ => Err(Error::Argument(format!("bit value {b} is not 0 or 1"))),
            })
            .map(Self)
    }

    pub fn index(self) -> usize {
        self.0
    }

    /// MSB-first tuple `(X_0, ..., X_{n-1})`.
    pub fn bits(self, n: u32) -> Vec<u8> {
        (0..n).rev().map(|k| ((self.0 >> k) & 1) as u8).collect()
    }
}

impl From<usize> for Mask {
    fn from(index: usize) -> Self {
        Self(index)
    }
}

/// In-place radix-2 butterfly. Length must be a power of two.
pub fn fwt_in_place(data: &mut [f64]) -> Result<()> {
    exponent_of(data.len())?;
    let len = data.len();
    let mut half = 1;
    while half < len {
        for block in data.chunks_exact_mut(half << 1) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        half <<= 1;
    }
    Ok(())
}

/// Forward Walsh transform in `O(n 2^n)`.
pub fn fwt(x: &RealSignal) -> WalshSpectrum {
    let mut coefficients = x.values.clone();
    fwt_in_place(&mut coefficients).expect("RealSignal length is a power of two");
    WalshSpectrum {
        coefficients,
        n: x.n,
    }
}

/// Inverse transform: the forward butterfly followed by division by `2^n`.
pub fn ifwt(y: &WalshSpectrum) -> RealSignal {
    let mut values = y.coefficients.clone();
    fwt_in_place(&mut values).expect("WalshSpectrum length is a power of two");
    let scale = 1.0 / values.len() as f64;
    values.iter_mut().for_each(|v| *v *= scale);
    RealSignal { values, n: y.n }
}

/// Walsh spectrum of a distribution; coefficient `m` is the bias of `<m, X>`.
pub fn spectrum(f: &Distribution) -> WalshSpectrum {
    fwt(&f.probabilities)
}

/// `Pr(<m,X> = 0) - Pr(<m,X> = 1)`.
pub fn bias_of_mask(f: &Distribution, m: Mask) -> Result<f64> {
    if m.0 >= f.len() {
        return Err(Error::Argument(format!(
            "mask {} out of range for 2^{} cells",
            m.0,
            f.n()
        )));
    }
    let (even, odd) =
        f.probabilities()
            .iter()
            .enumerate()
            .fold((0.0, 0.0), |(even, odd), (j, &p)| {
                if (m.0 & j).count_ones() % 2 == 0 {
                    (even + p, odd)
                } else {
                    (even, odd + p)
                }
            });
    Ok(even - odd)
}

/// Nontrivial spectral mass `sum_{i != 0} fhat(i)^2`, computed in the
/// transform domain.
pub fn spectral_mass(f: &Distribution) -> f64 {
    spectrum(f).nontrivial_energy()
}

/// The same quantity via Parseval: `2^n sum_i (f(i) - 2^-n)^2`.
pub fn spectral_mass_time_domain(f: &Distribution) -> f64 {
    let scale = f.len() as f64;
    scale * f.deviations().iter().map(|u| u * u).sum::<f64>()
}

/// The `k` nontrivial coefficients of largest magnitude, sorted by
/// descending `|value|` with ties broken by ascending index.
pub fn top_coefficients(f: &Distribution, k: usize) -> Result<Vec<(Mask, f64)>> {
    top_of_spectrum(&spectrum(f), k)
}

/// [`top_coefficients`] over an arbitrary spectrum.
pub fn top_of_spectrum(spectrum: &WalshSpectrum, k: usize) -> Result<Vec<(Mask, f64)>> {
    let len = spectrum.len();
    if k == 0 || k >= len {
        return Err(Error::Argument(format!(
            "k = {k} outside 1..{len} for 2^{} coefficients",
            spectrum.n()
        )));
    }
    let mut ranked: Vec<(Mask, f64)> = spectrum.coefficients[1..]
        .iter()
        .enumerate()
        .map(|(i, &c)| (Mask(i + 1), c))
        .collect();
    ranked.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
    ranked.truncate(k);
    Ok(ranked)
}
