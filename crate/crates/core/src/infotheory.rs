//! Entropy, channel capacity and Rényi divergence.
//!
//! Entropies and capacities are in bits. Rényi divergence is in nats, and
//! [`conjecture_check`] converts capacities to nats before comparing.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::spectral::{spectral_mass, Distribution};
use crate::{Error, Result};

/// Probabilities below this are treated as zero in `p log p` sums.
pub const ZERO_CUTOFF: f64 = 1e-300;

/// Default stopping gap (bits) for [`blahut_arimoto`].
pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 10_000;

fn plog2p(p: f64) -> f64 {
    if p < ZERO_CUTOFF {
        0.0
    } else {
        p * p.log2()
    }
}

fn entropy_bits(probabilities: &[f64]) -> f64 {
    -probabilities.iter().map(|&p| plog2p(p)).sum::<f64>()
}

/// Shannon entropy `-sum p log2 p` with `0 log 0 = 0`.
pub fn shannon_entropy(f: &Distribution) -> f64 {
    // exact for the uniform case: every term is identical
    if f.is_uniform() {
        return f.n() as f64;
    }
    entropy_bits(f.probabilities()).max(0.0)
}

pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Argument(format!("probability {p} outside [0, 1]")));
    }
    Ok(entropy_bits(&[p, 1.0 - p]))
}

/// Capacity `1 - H(p)` of the binary symmetric channel with crossover `p`.
pub fn bsc_capacity(p: f64) -> Result<f64> {
    Ok(1.0 - binary_entropy(p)?)
}

/// Small-bias capacity of a BSC with crossover `(1 + d) / 2`:
/// `d^2 / (2 ln 2)`.
pub fn extremal_bsc_capacity_approx(d: f64) -> f64 {
    d * d / (2.0 * LN_2)
}

/// `n - mass / (2 ln 2)`. Accurate only for small `2^n` with every
/// `f(i)` in `(0, 3 / 2^n)`; the caller judges the regime.
pub fn entropy_quadratic_approx(f: &Distribution) -> f64 {
    f.n() as f64 - spectral_mass(f) / (2.0 * LN_2)
}

/// Approximate capacity `mass / (8 ln 2)` of [`detection_channel`]`(f)`,
/// attained at `p0 = 1/2`. For `n = 1` and bias `d` this is
/// `d^2 / (8 ln 2)`.
pub fn detection_capacity_approx(f: &Distribution) -> f64 {
    spectral_mass(f) / (8.0 * LN_2)
}

/// Row-stochastic transition matrix `p(y | x)` of a discrete memoryless
/// channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelMatrix {
    rows: Vec<Vec<f64>>,
    output_size: usize,
}

impl ChannelMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let output_size = match rows.first() {
            Some(r) if !r.is_empty() => r.len(),
            _ => return Err(Error::InvalidChannel("channel has no entries".into())),
        };
        for (x, row) in rows.iter().enumerate() {
            if row.len() != output_size {
                return Err(Error::InvalidChannel(format!(
                    "row {x} has {} entries, expected {output_size}",
                    row.len()
                )));
            }
            if row.iter().any(|&p| !p.is_finite() || p < 0.0) {
                return Err(Error::InvalidChannel(format!(
                    "row {x} has a negative or non-finite entry"
                )));
            }
            let sum: f64 = row.iter().sum();
            if sum == 0.0 {
                return Err(Error::InvalidChannel(format!("row {x} is all zero")));
            }
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidChannel(format!("row {x} sums to {sum}")));
            }
        }
        Ok(Self { rows, output_size })
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Argument(format!("crossover {p} outside [0, 1]")));
        }
        Self::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn input_size(&self) -> usize {
        self.rows.len()
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    fn output_distribution(&self, input: &[f64]) -> Vec<f64> {
        let mut q = vec![0.0; self.output_size];
        for (row, &px) in self.rows.iter().zip(input) {
            for (qy, &w) in q.iter_mut().zip(row) {
                *qy += px * w;
            }
        }
        q
    }

    /// `D(W(.|x) || q)` in nats for every input `x`.
    fn divergences(&self, q: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .zip(q)
                    .filter(|(&w, _)| w >= ZERO_CUTOFF)
                    .map(|(&w, &qy)| w * (w / qy).ln())
                    .sum()
            })
            .collect()
    }
}

/// Two-input channel whose first row is `f` and second row is uniform.
pub fn detection_channel(f: &Distribution) -> ChannelMatrix {
    let uniform = vec![1.0 / f.len() as f64; f.len()];
    ChannelMatrix {
        rows: vec![f.probabilities().to_vec(), uniform],
        output_size: f.len(),
    }
}

/// `I(X; Y) = H(Y) - H(Y | X)` in bits for input distribution `input`.
pub fn mutual_information(ch: &ChannelMatrix, input: &[f64]) -> Result<f64> {
    if input.len() != ch.input_size() {
        return Err(Error::LengthMismatch {
            expected: ch.input_size(),
            got: input.len(),
        });
    }
    let q = ch.output_distribution(input);
    let conditional: f64 = ch
        .rows
        .iter()
        .zip(input)
        .map(|(row, &px)| px * entropy_bits(row))
        .sum();
    Ok(entropy_bits(&q) - conditional)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityBounds {
    pub lower_bits: f64,
    pub upper_bits: f64,
}

impl CapacityBounds {
    pub fn gap(&self) -> f64 {
        self.upper_bits - self.lower_bits
    }
}

/// Iteration state of the Blahut-Arimoto alternating maximisation.
///
/// Each [`step`](BlahutArimoto::step) evaluates the bounds
/// `ln sum_x p(x) e^{D_x} <= C <= max_x D_x` at the current input and then
/// applies the multiplicative update `p(x) <- p(x) e^{D_x} / Z`.
#[derive(Debug, Clone)]
pub struct BlahutArimoto<'a> {
    channel: &'a ChannelMatrix,
    input: Vec<f64>,
}

impl<'a> BlahutArimoto<'a> {
    /// Starts from the uniform input distribution.
    pub fn new(channel: &'a ChannelMatrix) -> Self {
        let m = channel.input_size();
        Self {
            channel,
            input: vec![1.0 / m as f64; m],
        }
    }

    pub fn input(&self) -> &[f64] {
        &self.input
    }

    /// Bounds at the current input, without updating it.
    pub fn bounds(&self) -> CapacityBounds {
        let (bounds, _) = self.evaluate();
        bounds
    }

    fn evaluate(&self) -> (CapacityBounds, Vec<f64>) {
        let q = self.channel.output_distribution(&self.input);
        let d = self.channel.divergences(&q);
        let d_max = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = self
            .input
            .iter()
            .zip(&d)
            .map(|(&p, &dx)| p * (dx - d_max).exp())
            .sum();
        let lower = (d_max + z.ln()).min(d_max);
        let bounds = CapacityBounds {
            lower_bits: lower.max(0.0) / LN_2,
            upper_bits: d_max.max(0.0) / LN_2,
        };
        let weights = self
            .input
            .iter()
            .zip(&d)
            .map(|(&p, &dx)| p * (dx - d_max).exp() / z)
            .collect();
        (bounds, weights)
    }

    /// Returns the bounds at the current input, then updates the input.
    pub fn step(&mut self) -> CapacityBounds {
        let (bounds, next) = self.evaluate();
        self.input = next;
        bounds
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityResult {
    pub capacity_bits: f64,
    pub upper_bound_bits: f64,
    /// Capacity-achieving input distribution over the channel inputs.
    pub optimal_input: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Computes channel capacity by Blahut-Arimoto, stopping once the
/// upper/lower bound gap falls below `tol` bits. If `max_iter` is reached
/// the best iterate is returned with `converged = false`.
pub fn blahut_arimoto(ch: &ChannelMatrix, tol: f64, max_iter: usize) -> Result<CapacityResult> {
    if !(tol > 0.0) {
        return Err(Error::Argument(format!("tolerance {tol} must be positive")));
    }
    let mut solver = BlahutArimoto::new(ch);
    let mut best = (f64::NEG_INFINITY, f64::INFINITY, solver.input.clone());
    for iterations in 0..=max_iter {
        let input = solver.input.clone();
        let bounds = solver.step();
        if bounds.lower_bits > best.0 {
            best.0 = bounds.lower_bits;
            best.2 = input;
        }
        best.1 = best.1.min(bounds.upper_bits);
        if bounds.gap() < tol {
            return Ok(CapacityResult {
                capacity_bits: best.0,
                upper_bound_bits: best.1,
                optimal_input: best.2,
                iterations,
                converged: true,
            });
        }
    }
    Ok(CapacityResult {
        capacity_bits: best.0,
        upper_bound_bits: best.1,
        optimal_input: best.2,
        iterations: max_iter,
        converged: false,
    })
}

/// [`blahut_arimoto`] with the default tolerance and iteration cap.
pub fn capacity(ch: &ChannelMatrix) -> Result<CapacityResult> {
    blahut_arimoto(ch, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER)
}

/// Grid resolution of the first stage of [`general_capacity`].
pub const GENERAL_GRID_POINTS: usize = 1024;
pub const GENERAL_P0_MIN: f64 = 1e-6;
const GOLDEN_WIDTH: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeneralCapacity {
    pub capacity_bits: f64,
    pub p0_star: f64,
}

/// The general capacity objective at input weight `p0`, in bits:
/// `(1/ln 2) sum_i [p0 u_i / (1 + 2^{n-1} p0 u_i) - p0 u_i / (1 + 2^{n-1} u_i)]`
/// with `u_i = f(i) - 2^-n`.
pub fn general_objective(f: &Distribution, p0: f64) -> f64 {
    let a = f.len() as f64 / 2.0;
    f.deviations()
        .iter()
        .map(|&u| p0 * u / (1.0 + a * p0 * u) - p0 * u / (1.0 + a * u))
        .sum::<f64>()
        / LN_2
}

/// One addend of [`general_objective`] scaled by `2^{n-1}`, written in terms
/// of `k = 2^{n-1} u_i`: `p0 k / (1 + p0 k) - p0 k / (1 + k)`.
pub fn general_addend(k: f64, p0: f64) -> f64 {
    p0 * k / (1.0 + p0 * k) - p0 * k / (1.0 + k)
}

/// [`general_addend`] with the first term expanded as `v - v^2`; valid for
/// `|p0 k| < 1`.
pub fn general_addend_series(k: f64, p0: f64) -> f64 {
    let v = p0 * k;
    v - v * v - p0 * k / (1.0 + k)
}

/// Maximises [`general_objective`] over `p0` in `(0, 1]`: a 1024-point grid
/// on `[1e-6, 1]` (ties to the smaller `p0`), then golden-section refinement
/// around the best grid point down to a `1e-9` bracket.
pub fn general_capacity(f: &Distribution) -> Result<GeneralCapacity> {
    if let Some(i) = f.probabilities().iter().position(|&p| p <= 0.0) {
        return Err(Error::Argument(format!(
            "general capacity needs every cell positive; f({i}) = 0"
        )));
    }
    let objective = |p0: f64| general_objective(f, p0);
    let step = (1.0 - GENERAL_P0_MIN) / (GENERAL_GRID_POINTS - 1) as f64;
    let grid = |i: usize| {
        if i + 1 == GENERAL_GRID_POINTS {
            1.0
        } else {
            GENERAL_P0_MIN + step * i as f64
        }
    };
    let (best_i, best_value) = (0..GENERAL_GRID_POINTS)
        .map(|i| (i, objective(grid(i))))
        .fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, v)| if v > acc.1 { (i, v) } else { acc },
        );

    let lo = grid(best_i.saturating_sub(1));
    let hi = grid((best_i + 1).min(GENERAL_GRID_POINTS - 1));
    let (p_refined, v_refined) = golden_section_max(objective, lo, hi, GOLDEN_WIDTH);
    let (p0_star, capacity_bits) = if v_refined > best_value {
        (p_refined, v_refined)
    } else {
        (grid(best_i), best_value)
    };
    Ok(GeneralCapacity {
        capacity_bits,
        p0_star,
    })
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, width: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > width {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let p = 0.5 * (a + b);
    (p, f(p))
}

/// Rényi divergence `D_alpha(P || Q) = ln(sum P^alpha Q^(1-alpha)) / (alpha - 1)`
/// in nats. Returns `+inf` when the supports make the sum degenerate.
pub fn renyi_divergence(p: &Distribution, q: &Distribution, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Argument(format!("alpha = {alpha} must be positive")));
    }
    if alpha == 1.0 {
        return Err(Error::Argument(
            "alpha = 1 is the KL limit, not supported".into(),
        ));
    }
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    let mut sum = 0.0;
    for (&px, &qx) in p.probabilities().iter().zip(q.probabilities()) {
        if px < ZERO_CUTOFF {
            continue;
        }
        if qx < ZERO_CUTOFF {
            if alpha > 1.0 {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        sum += if alpha == 0.5 {
            (px * qx).sqrt()
        } else {
            px.powf(alpha) * qx.powf(1.0 - alpha)
        };
    }
    Ok((sum.ln() / (alpha - 1.0)).max(0.0))
}

/// Numerical evidence for `D_{1/2}(Q || U) = 2 C`, where `C` is the
/// Shannon capacity of the two-row channel `(Q, U)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjectureCheck {
    pub d_half_nats: f64,
    pub two_capacity_nats: f64,
    /// `None` when `Q` is uniform and both sides vanish.
    pub ratio: Option<f64>,
    pub degenerate: bool,
    pub capacity: CapacityResult,
    pub interpretation: &'static str,
}

pub const CONJECTURE_INTERPRETATION: &str =
    "C_1/2(T) taken as the Shannon capacity of the channel with rows (Q, U), in nats";

pub fn conjecture_check(q: &Distribution) -> Result<ConjectureCheck> {
    let uniform = Distribution::uniform(q.n());
    let d_half_nats = renyi_divergence(q, &uniform, 0.5)?;
    let capacity = capacity(&detection_channel(q))?;
    let two_capacity_nats = 2.0 * capacity.capacity_bits * LN_2;
    let degenerate = q.is_uniform();
    let ratio = if degenerate || two_capacity_nats == 0.0 {
        None
    } else {
        Some(d_half_nats / two_capacity_nats)
    };
    Ok(ConjectureCheck {
        d_half_nats,
        two_capacity_nats,
        ratio,
        degenerate,
        capacity,
        interpretation: CONJECTURE_INTERPRETATION,
    })
}
