//! Clayton copula: evaluation, sampling and Spearman's ρ.
//!
//! Three couplings are supported. The exchangeable Clayton copula
//! `[Σ(u_k^{−θ} − 1) + 1]^{−1/θ}` is the default. The independence limit
//! (θ → 0) is the plain product. The "paper-literal" form keeps a separate
//! θ_k inside the sum and a single θ in the outer exponent; it is not a
//! copula unless all θ_k coincide and exists only as a diagnostic.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Homogeneous θ at or below this is routed to the independence copula.
pub const INDEPENDENCE_THETA: f64 = 1e-9;

/// Rows generated per random stream. Fixed so results do not depend on the
/// number of worker threads.
pub(crate) const BLOCK_ROWS: usize = 1 << 14;

/// Which θ_k sets the outer exponent of the paper-literal form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OuterIndexRule {
    #[default]
    LastPort,
    MeanTheta,
    MaxTheta,
}

impl OuterIndexRule {
    fn pick(self, thetas: &[f64]) -> f64 {
        match self {
            OuterIndexRule::LastPort => *thetas.last().expect("non-empty"),
            OuterIndexRule::MeanTheta => thetas.iter().sum::<f64>() / thetas.len() as f64,
            OuterIndexRule::MaxTheta => thetas.iter().copied().fold(0.0, f64::max),
        }
    }
}

/// User-facing choice of coupling between ports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CopulaMode {
    #[default]
    Homogeneous,
    PaperLiteral,
    Independence,
}

impl std::str::FromStr for CopulaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "homogeneous" => Ok(Self::Homogeneous),
            "paper-literal" => Ok(Self::PaperLiteral),
            "independence" => Ok(Self::Independence),
            other => Err(Error::invalid(
                "copula",
                format!("unknown mode '{other}' (homogeneous|paper-literal|independence)"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CopulaKind {
    ClaytonHomogeneous {
        theta: f64,
    },
    ClaytonPaperLiteral {
        thetas: Vec<f64>,
        outer: OuterIndexRule,
    },
    Independence,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CopulaSpec {
    kind: CopulaKind,
    dimension: usize,
}

fn check_dimension(dimension: usize) -> Result<()> {
    if dimension == 0 {
        return Err(Error::invalid("copula dimension", "must be >= 1"));
    }
    Ok(())
}

fn check_theta(theta: f64) -> Result<()> {
    if !theta.is_finite() || theta < 0.0 {
        return Err(Error::domain(
            "clayton",
            theta,
            "dependence parameter must be finite and >= 0",
        ));
    }
    Ok(())
}

impl CopulaSpec {
    /// Exchangeable Clayton copula; θ ≤ [`INDEPENDENCE_THETA`] gives independence.
    pub fn clayton(dimension: usize, theta: f64) -> Result<Self> {
        check_dimension(dimension)?;
        check_theta(theta)?;
        if theta <= INDEPENDENCE_THETA {
            return Ok(Self::independence(dimension));
        }
        Ok(Self {
            kind: CopulaKind::ClaytonHomogeneous { theta },
            dimension,
        })
    }

    pub fn independence(dimension: usize) -> Self {
        Self {
            kind: CopulaKind::Independence,
            dimension: dimension.max(1),
        }
    }

    pub fn paper_literal(thetas: Vec<f64>, outer: OuterIndexRule) -> Result<Self> {
        check_dimension(thetas.len())?;
        for &t in &thetas {
            check_theta(t)?;
        }
        Ok(Self {
            dimension: thetas.len(),
            kind: CopulaKind::ClaytonPaperLiteral { thetas, outer },
        })
    }

    pub fn kind(&self) -> &CopulaKind {
        &self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            CopulaKind::ClaytonHomogeneous { .. } => "homogeneous",
            CopulaKind::ClaytonPaperLiteral { .. } => "paper-literal",
            CopulaKind::Independence => "independence",
        }
    }

    pub fn is_paper_literal(&self) -> bool {
        matches!(self.kind, CopulaKind::ClaytonPaperLiteral { .. })
    }

    /// Outer-exponent θ for the paper-literal form, `None` otherwise.
    pub fn outer_theta(&self) -> Option<f64> {
        match &self.kind {
            CopulaKind::ClaytonPaperLiteral { thetas, outer } => Some(outer.pick(thetas)),
            _ => None,
        }
    }
}

/// `[Σ_k (u_k^{−θ_k} − 1) + 1]^{−1/θ_out}` for positive `u`.
///
/// Computed as `exp(−ln(1 + S)/θ_out)`. With every exponent `a_k = −θ_k ln u_k`
/// below 700 the sum uses `expm1`/`ln_1p`, which keeps small θ accurate;
/// otherwise `ln(1 + S)` is accumulated in the log domain.
pub(crate) fn clayton_shell(u: &[f64], theta_at: impl Fn(usize) -> f64, theta_out: f64) -> f64 {
    let mut max_a = 0.0f64;
    for (k, &uk) in u.iter().enumerate() {
        max_a = max_a.max(-theta_at(k) * uk.ln());
    }
    let ln_total = if max_a < 700.0 {
        let s: f64 = u
            .iter()
            .enumerate()
            .map(|(k, &uk)| (-theta_at(k) * uk.ln()).exp_m1())
            .sum();
        s.ln_1p()
    } else {
        let scaled: f64 = u
            .iter()
            .enumerate()
            .map(|(k, &uk)| (-theta_at(k) * uk.ln() - max_a).exp())
            .sum();
        let extra = (u.len() - 1) as f64 * (-max_a).exp();
        max_a + (scaled - extra).ln()
    };
    (-ln_total / theta_out).exp()
}

/// Evaluates `C(u_1, …, u_K)` for the given coupling.
pub fn copula_cdf(u: &[f64], spec: &CopulaSpec) -> Result<f64> {
    if u.len() != spec.dimension {
        return Err(Error::invalid(
            "copula argument",
            format!("expected {} coordinates, got {}", spec.dimension, u.len()),
        ));
    }
    for &uk in u {
        if !(0.0..=1.0).contains(&uk) {
            return Err(Error::domain(
                "copula_cdf",
                uk,
                "coordinates must lie in [0, 1]",
            ));
        }
    }
    if u.contains(&0.0) {
        return Ok(0.0);
    }
    Ok(eval_unchecked(u, spec))
}

/// Copula evaluation without domain checks; `u` must be strictly positive.
pub(crate) fn eval_unchecked(u: &[f64], spec: &CopulaSpec) -> f64 {
    match &spec.kind {
        CopulaKind::Independence => u.iter().product(),
        CopulaKind::ClaytonHomogeneous { theta } => clayton_shell(u, |_| *theta, *theta),
        CopulaKind::ClaytonPaperLiteral { thetas, outer } => {
            let theta_out = outer.pick(thetas);
            if theta_out <= INDEPENDENCE_THETA {
                // The outer exponent −1/θ degenerates; fall back to the product.
                u.iter().product()
            } else {
                clayton_shell(u, |k| thetas[k], theta_out)
            }
        }
    }
}

/// Fréchet–Hoeffding sanity check:
/// `max(0, Σu − (K−1)) − 1e-12 <= C(u) <= min(u) + 1e-12`.
pub fn copula_upper_bound_check(u: &[f64], spec: &CopulaSpec) -> Result<bool> {
    let c = copula_cdf(u, spec)?;
    let upper = u.iter().copied().fold(1.0, f64::min);
    let lower = (u.iter().sum::<f64>() - (u.len() as f64 - 1.0)).max(0.0);
    Ok(c <= upper + 1e-12 && c >= lower - 1e-12)
}

/// Row-major `count × dimension` matrix of copula draws.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformSample {
    dimension: usize,
    data: Vec<f64>,
}

impl UniformSample {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dimension)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|row| row[j]).collect()
    }
}

/// Random stream for one block of rows. ChaCha is counter based, so each
/// `(seed, block)` pair addresses an independent, reproducible stream.
pub(crate) fn block_rng(seed: u64, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    rng
}

fn softplus(d: f64) -> f64 {
    if d > 0.0 {
        d + (-d).exp().ln_1p()
    } else {
        d.exp().ln_1p()
    }
}

/// Marshall–Olkin frailty sampler for the Clayton copula.
///
/// With `V ~ Gamma(1/θ, 1)` and i.i.d. unit exponentials `E_k`, the vector
/// `U_k = (1 + E_k/V)^{−1/θ}` has the Clayton law. `ln V` is drawn directly
/// (boosting the shape by one when it is below 1) so that large θ, where V
/// routinely underflows, still produces valid draws.
#[derive(Debug, Clone)]
pub(crate) struct ClaytonSampler {
    inv_theta: f64,
    theta: f64,
    gamma: Gamma<f64>,
    boosted: bool,
}

impl ClaytonSampler {
    pub(crate) fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::domain(
                "sample_clayton",
                theta,
                "theta must be > 0; draw independent uniforms for the independence case",
            ));
        }
        let shape = 1.0 / theta;
        let boosted = shape < 1.0;
        let gamma = Gamma::new(if boosted { shape + 1.0 } else { shape }, 1.0)
            .map_err(|e| Error::invalid("gamma shape", e.to_string()))?;
        Ok(Self {
            inv_theta: shape,
            theta,
            gamma,
            boosted,
        })
    }

    pub(crate) fn fill<R: Rng>(&self, rng: &mut R, out: &mut [f64]) {
        let mut ln_v = self.gamma.sample(rng).ln();
        if self.boosted {
            // Gamma(a) = Gamma(a + 1) · U^{1/a}
            let w: f64 = 1.0 - rng.random::<f64>();
            ln_v += self.theta * w.ln();
        }
        for slot in out {
            let e: f64 = Exp1.sample(rng);
            *slot = (-softplus(e.ln() - ln_v) * self.inv_theta).exp();
        }
    }
}

pub(crate) fn fill_independent<R: Rng>(rng: &mut R, out: &mut [f64]) {
    for slot in out {
        *slot = rng.random::<f64>();
    }
}

/// Draws `count` i.i.d. rows from the `dimension`-variate Clayton copula.
pub fn sample_clayton(
    dimension: usize,
    theta: f64,
    count: usize,
    seed: u64,
) -> Result<UniformSample> {
    check_dimension(dimension)?;
    if count == 0 {
        return Err(Error::invalid("sample count", "must be >= 1"));
    }
    let sampler = ClaytonSampler::new(theta)?;
    let mut data = vec![0.0; count * dimension];
    data.par_chunks_mut(BLOCK_ROWS * dimension)
        .enumerate()
        .for_each(|(block, chunk)| {
            let mut rng = block_rng(seed, block);
            for row in chunk.chunks_exact_mut(dimension) {
                sampler.fill(&mut rng, row);
            }
        });
    Ok(UniformSample { dimension, data })
}

pub const DEFAULT_SPEARMAN_GRID: usize = 2000;

/// Spearman's ρ of the bivariate Clayton copula by quadrature,
/// `ρ = 12 ∬ C(u, v) du dv − 3`, on a `grid_n × grid_n` midpoint mesh.
pub fn spearman_rho_numeric(theta: f64, grid_n: usize) -> Result<f64> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(Error::domain(
            "spearman_rho_numeric",
            theta,
            "theta must be > 0",
        ));
    }
    if grid_n < 2 {
        return Err(Error::invalid("grid_n", "need at least 2 nodes per axis"));
    }
    let h = 1.0 / grid_n as f64;
    // p_i = u_i^{−θ} − 1
    let p: Vec<f64> = (0..grid_n)
        .map(|i| (-theta * ((i as f64 + 0.5) * h).ln()).exp_m1())
        .collect();
    let cell = |a: f64, b: f64| (-(a + b).ln_1p() / theta).exp();
    let total: f64 = (0..grid_n)
        .into_par_iter()
        .map(|i| {
            let off_diagonal: f64 = p[i + 1..].iter().map(|&pj| cell(p[i], pj)).sum();
            cell(p[i], p[i]) + 2.0 * off_diagonal
        })
        .sum();
    Ok(12.0 * total * h * h - 3.0)
}

fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut out = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = 0.5 * (i + j) as f64 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Sample Spearman rank correlation (Pearson correlation of mid-ranks).
pub fn rank_correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::invalid(
            "rank correlation input",
            "need two equal-length samples with at least 2 points",
        ));
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        let (dx, dy) = (x - mean, y - mean);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    Ok(sab / (saa * sbb).sqrt())
}
