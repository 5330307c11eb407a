//! Monte-Carlo oracle for the closed forms.
//!
//! Each draw couples `K` uniforms through the copula sampler, maps them to
//! product-channel gains by inverse transform and keeps the best port.
//! Samples are produced in fixed-size blocks, each with its own
//! counter-based stream addressed by `(seed, block)`, so estimates are
//! bit-identical for a given seed no matter how many threads run.

use std::f64::consts::LN_2;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{
    product_quantile, PortCorrelationProfile, SystemConfig, DEFAULT_QUANTILE_TOL,
};
use crate::copula::{
    block_rng, fill_independent, ClaytonSampler, CopulaKind, CopulaSpec, BLOCK_ROWS,
};
use crate::error::{Error, Result};
use crate::metrics::DorThresholdMode;

pub const MIN_SAMPLES: usize = 10_000;
pub const DEFAULT_SAMPLES: usize = 1_000_000;

/// Below this estimate the 95% interval switches from normal to Wilson.
pub const WILSON_BELOW: f64 = 1e-3;

const Z_95: f64 = 1.959_963_984_540_054;

/// Largest double below 1; the quantile is undefined at exactly 1.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalMethod {
    Normal,
    Wilson,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    /// `sqrt(p̂(1 − p̂)/n)`.
    pub std_error: f64,
    pub n_samples: usize,
    pub hits: u64,
    pub confidence_95: (f64, f64),
    pub interval: IntervalMethod,
    pub seed: u64,
    /// Wall-clock seconds; excluded from serialized output so reports stay
    /// reproducible.
    #[serde(skip)]
    pub elapsed: f64,
}

impl McEstimate {
    pub fn from_hits(hits: u64, n_samples: usize, seed: u64, elapsed: f64) -> Self {
        let n = n_samples as f64;
        let p = hits as f64 / n;
        let std_error = (p * (1.0 - p) / n).sqrt();
        let (confidence_95, interval) = if p < WILSON_BELOW {
            let z2 = Z_95 * Z_95;
            let denom = 1.0 + z2 / n;
            let center = (p + z2 / (2.0 * n)) / denom;
            let half = Z_95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
            // with no hits the lower end is 0 analytically; avoid rounding residue
            let lo = if hits == 0 {
                0.0
            } else {
                (center - half).max(0.0)
            };
            ((lo, (center + half).min(1.0)), IntervalMethod::Wilson)
        } else {
            let half = Z_95 * std_error;
            (
                ((p - half).max(0.0), (p + half).min(1.0)),
                IntervalMethod::Normal,
            )
        };
        Self {
            estimate: p,
            std_error,
            n_samples,
            hits,
            confidence_95,
            interval,
            seed,
            elapsed,
        }
    }

    /// Binomial standard error at the hypothesised probability `p`.
    pub fn null_std_error(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.n_samples as f64).sqrt()
    }

    /// `|p̂ − p| / σ` with `σ = max(se(p̂), se(p))`.
    ///
    /// Using the larger of the two keeps the score meaningful when no hit
    /// was observed (se(p̂) = 0) or when `p` is far below `1/n`.
    pub fn z_score(&self, p: f64) -> f64 {
        let sigma = self.std_error.max(self.null_std_error(p));
        let diff = (self.estimate - p).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / sigma
        }
    }

    pub fn contains(&self, p: f64) -> bool {
        self.confidence_95.0 <= p && p <= self.confidence_95.1
    }
}

enum PortSampler {
    Independent,
    Clayton(ClaytonSampler),
}

impl PortSampler {
    fn for_spec(spec: &CopulaSpec) -> Result<Self> {
        match spec.kind() {
            CopulaKind::Independence => Ok(PortSampler::Independent),
            CopulaKind::ClaytonHomogeneous { theta } => {
                Ok(PortSampler::Clayton(ClaytonSampler::new(*theta)?))
            }
            CopulaKind::ClaytonPaperLiteral { .. } => Err(Error::invalid(
                "copula",
                "the paper-literal form is not a distribution and cannot be sampled",
            )),
        }
    }
}

/// Runs `visit` over every block of best-port gains and sums the results.
fn fold_gain_blocks<T, F>(
    ports: usize,
    spec: &CopulaSpec,
    count: usize,
    seed: u64,
    visit: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&[f64]) -> T + Sync,
{
    if spec.dimension() != ports {
        return Err(Error::invalid(
            "copula dimension",
            format!(
                "profile has {ports} ports but the copula has dimension {}",
                spec.dimension()
            ),
        ));
    }
    let sampler = PortSampler::for_spec(spec)?;
    let blocks = count.div_ceil(BLOCK_ROWS);
    Ok((0..blocks)
        .into_par_iter()
        .map(|block| {
            let rows = BLOCK_ROWS.min(count - block * BLOCK_ROWS);
            let mut rng = block_rng(seed, block);
            let mut u = vec![0.0; ports];
            let mut gains = Vec::with_capacity(rows);
            for _ in 0..rows {
                match &sampler {
                    PortSampler::Independent => fill_independent(&mut rng, &mut u),
                    PortSampler::Clayton(s) => s.fill(&mut rng, &mut u),
                }
                // The quantile is nondecreasing, so the best port's gain is the
                // quantile of the largest uniform; one inversion per draw.
                let best = u.iter().copied().fold(0.0, f64::max).min(BELOW_ONE);
                gains.push(product_quantile(best, DEFAULT_QUANTILE_TOL));
            }
            visit(&gains)
        })
        .collect())
}

/// Draws `count` realisations of the best-port gain `max_k g_f·g_{b,k}`.
pub fn sample_equivalent_gain(
    profile: &PortCorrelationProfile,
    spec: &CopulaSpec,
    count: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::invalid("sample count", "must be >= 1"));
    }
    let blocks = fold_gain_blocks(profile.num_ports(), spec, count, seed, |g| g.to_vec())?;
    Ok(blocks.concat())
}

fn count_hits<P>(
    config: &SystemConfig,
    spec: &CopulaSpec,
    n: usize,
    seed: u64,
    hit: P,
) -> Result<McEstimate>
where
    P: Fn(f64) -> bool + Sync,
{
    if n < MIN_SAMPLES {
        return Err(Error::invalid(
            "samples",
            format!("{n} is below the minimum of {MIN_SAMPLES}"),
        ));
    }
    config.validate()?;
    let start = Instant::now();
    let counts = fold_gain_blocks(config.num_ports, spec, n, seed, |gains| {
        gains.iter().filter(|&&g| hit(g)).count() as u64
    })?;
    let hits = counts.iter().sum();
    Ok(McEstimate::from_hits(
        hits,
        n,
        seed,
        start.elapsed().as_secs_f64(),
    ))
}

/// Fraction of draws with `γ̄·g ≤ γ_th`.
pub fn estimate_outage(
    config: &SystemConfig,
    spec: &CopulaSpec,
    n: usize,
    seed: u64,
) -> Result<McEstimate> {
    let threshold = config.outage_point();
    count_hits(config, spec, n, seed, |g| g <= threshold)
}

/// Fraction of draws whose delivery time `R / (B·log₂(1 + γ̄·g))` exceeds
/// `T_th`, evaluated from the definition rather than an inverted threshold.
///
/// `Paper` mode uses `log₂(γ̄·g)` for the rate, the high-SNR form whose
/// inversion gives the published threshold; `Corrected` uses `log₂(1 + γ̄·g)`.
pub fn estimate_dor(
    config: &SystemConfig,
    spec: &CopulaSpec,
    mode: DorThresholdMode,
    n: usize,
    seed: u64,
) -> Result<McEstimate> {
    let snr = config.avg_snr_linear();
    let load = config.payload_bits / config.bandwidth_hz;
    let t_th = config.delay_threshold_s;
    match mode {
        DorThresholdMode::Corrected => count_hits(config, spec, n, seed, |g| {
            let rate = (snr * g).ln_1p() / LN_2;
            load / rate > t_th
        }),
        DorThresholdMode::Paper => count_hits(config, spec, n, seed, |g| {
            let rate = (snr * g).ln() / LN_2;
            rate <= 0.0 || load / rate > t_th
        }),
    }
}
