//! Link configuration, port correlation and the product-channel law.
//!
//! Both hops fade as unit-mean exponentials (squared Rayleigh), so the gain
//! `g_f · g_b` seen at any port has CDF `1 − 2√r·K₁(2√r)`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::copula::{CopulaMode, CopulaSpec, OuterIndexRule};
use crate::error::{Error, Result};
use crate::roots::brent;
use crate::specfun::{bessel_j0, bessel_k1, euler_mascheroni, K1_UNDERFLOW_ARG};

/// Correlations below this are treated as independence by [`theta_from_mu`].
pub const DEFAULT_CLAMP_FLOOR: f64 = 1e-6;

/// Dependence parameter for a fully correlated pair, `4·1/(3 − 2)`.
pub const THETA_MAX: f64 = 4.0;

/// Physical and system parameters of the link.
///
/// Defaults are the operating point used throughout the numerical study:
/// γ_th = 0 dB, γ̄ = 20 dB, R = 5 kbit, B = 2 GHz, T_th = 3 ms, with a
/// four-port antenna spanning one wavelength and unit large-scale factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    /// Number of ports `K`.
    pub num_ports: usize,
    /// Aperture length in wavelengths `W`.
    pub fa_size: f64,
    /// Large-scale factor `ω` scaling every port correlation.
    pub large_scale: f64,
    pub avg_snr_db: f64,
    pub snr_threshold_db: f64,
    pub payload_bits: f64,
    pub bandwidth_hz: f64,
    pub delay_threshold_s: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            num_ports: 4,
            fa_size: 1.0,
            large_scale: 1.0,
            avg_snr_db: 20.0,
            snr_threshold_db: 0.0,
            payload_bits: 5000.0,
            bandwidth_hz: 2e9,
            delay_threshold_s: 3e-3,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_ports < 1 {
            return Err(Error::invalid("num_ports", "at least one port is required"));
        }
        if !(self.fa_size > 0.0 && self.fa_size.is_finite()) {
            return Err(Error::invalid(
                "fa_size",
                format!("{} is not > 0", self.fa_size),
            ));
        }
        if !(self.large_scale > 0.0 && self.large_scale <= 1.0) {
            return Err(Error::invalid(
                "large_scale",
                format!("{} is outside (0, 1]", self.large_scale),
            ));
        }
        if !self.avg_snr_db.is_finite() {
            return Err(Error::invalid("avg_snr_db", "must be finite"));
        }
        // -inf dB is a legitimate "never in outage" threshold.
        if self.snr_threshold_db.is_nan() || self.snr_threshold_db == f64::INFINITY {
            return Err(Error::invalid("snr_threshold_db", "must be finite or -inf"));
        }
        for (field, v) in [
            ("payload_bits", self.payload_bits),
            ("bandwidth_hz", self.bandwidth_hz),
            ("delay_threshold_s", self.delay_threshold_s),
        ] {
            if !(v > 0.0) {
                return Err(Error::invalid(field, format!("{v} is not > 0")));
            }
        }
        Ok(())
    }

    pub fn avg_snr_linear(&self) -> f64 {
        db_to_linear(self.avg_snr_db)
    }

    pub fn snr_threshold_linear(&self) -> f64 {
        db_to_linear(self.snr_threshold_db)
    }

    /// Normalised gain threshold `γ_th / γ̄` at which outage is evaluated.
    pub fn outage_point(&self) -> f64 {
        self.snr_threshold_linear() / self.avg_snr_linear()
    }
}

pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

/// Jakes correlation `μ_k = ω·J₀(2π(k−1)W/(K−1))` of port `k` (1-based)
/// against the first port.
pub fn jake_correlation(k: usize, config: &SystemConfig) -> Result<f64> {
    let ports = config.num_ports;
    if k < 1 || k > ports {
        return Err(Error::invalid(
            "port index",
            format!("{k} is outside 1..={ports}"),
        ));
    }
    if ports == 1 {
        return Ok(config.large_scale);
    }
    let arg = 2.0 * PI * (k - 1) as f64 * config.fa_size / (ports - 1) as f64;
    Ok(config.large_scale * bessel_j0(arg)?)
}

/// How an out-of-domain correlation was mapped onto a Clayton parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClampKind {
    /// μ at or below the floor (including negative μ): θ forced to 0.
    Independence,
    /// μ above 1: θ capped at [`THETA_MAX`].
    Capped,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaMapping {
    pub theta: f64,
    pub clamp: Option<ClampKind>,
}

/// Maps a Jakes correlation onto the Clayton parameter `θ = 4μ/(3 − 2μ)`.
///
/// Correlations below `clamp_floor` (in particular every μ ≤ 0) become the
/// independence limit θ = 0; μ ∈ (1, 1.5] is capped at θ = 4. μ > 1.5 lies
/// past the pole of the mapping and is rejected.
pub fn theta_from_mu(mu: f64, clamp_floor: f64) -> Result<ThetaMapping> {
    if !mu.is_finite() {
        return Err(Error::domain(
            "theta_from_mu",
            mu,
            "correlation must be finite",
        ));
    }
    if mu > 1.5 {
        return Err(Error::domain(
            "theta_from_mu",
            mu,
            "mapping has a pole at mu = 1.5",
        ));
    }
    if mu <= 0.0 || mu < clamp_floor {
        return Ok(ThetaMapping {
            theta: 0.0,
            clamp: Some(ClampKind::Independence),
        });
    }
    if mu > 1.0 {
        return Ok(ThetaMapping {
            theta: THETA_MAX,
            clamp: Some(ClampKind::Capped),
        });
    }
    Ok(ThetaMapping {
        theta: 4.0 * mu / (3.0 - 2.0 * mu),
        clamp: None,
    })
}

/// Approximate Spearman's ρ of a Clayton pair, `3θ / (2(θ + 2))`.
///
/// Exact inverse of [`theta_from_mu`] on μ ∈ (0, 1]. Note the value exceeds
/// 1 for θ > 4, so it is only meaningful on the range that mapping produces.
pub fn spearman_rho_approx(theta: f64) -> Result<f64> {
    if theta.is_nan() || theta < 0.0 {
        return Err(Error::domain(
            "spearman_rho_approx",
            theta,
            "theta must be >= 0",
        ));
    }
    Ok(3.0 * theta / (2.0 * (theta + 2.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClampRecord {
    /// 1-based port index.
    pub port: usize,
    pub mu: f64,
    pub kind: ClampKind,
}

/// Per-port Jakes correlations and the Clayton parameters derived from them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortCorrelationProfile {
    mu: Vec<f64>,
    theta: Vec<f64>,
    theta_scalar: f64,
    clamp_floor: f64,
    clamps: Vec<ClampRecord>,
}

impl PortCorrelationProfile {
    pub fn from_config(config: &SystemConfig) -> Result<Self> {
        Self::with_clamp_floor(config, DEFAULT_CLAMP_FLOOR)
    }

    pub fn with_clamp_floor(config: &SystemConfig, clamp_floor: f64) -> Result<Self> {
        config.validate()?;
        let mu = (1..=config.num_ports)
            .map(|k| jake_correlation(k, config))
            .collect::<Result<Vec<_>>>()?;
        Self::from_correlations(mu, clamp_floor)
    }

    pub fn from_correlations(mu: Vec<f64>, clamp_floor: f64) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::invalid("correlation profile", "no ports"));
        }
        let mut theta = Vec::with_capacity(mu.len());
        let mut clamps = Vec::new();
        for (i, &m) in mu.iter().enumerate() {
            let mapped = theta_from_mu(m, clamp_floor)?;
            if let Some(kind) = mapped.clamp {
                clamps.push(ClampRecord {
                    port: i + 1,
                    mu: m,
                    kind,
                });
            }
            theta.push(mapped.theta);
        }
        let theta_scalar = *theta.last().expect("non-empty");
        Ok(Self {
            mu,
            theta,
            theta_scalar,
            clamp_floor,
            clamps,
        })
    }

    pub fn num_ports(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// The θ of the last port, which spans the whole aperture.
    pub fn theta_scalar(&self) -> f64 {
        self.theta_scalar
    }

    pub fn clamp_floor(&self) -> f64 {
        self.clamp_floor
    }

    pub fn clamps(&self) -> &[ClampRecord] {
        &self.clamps
    }

    /// Exchangeable Clayton copula with θ = [`Self::theta_scalar`].
    pub fn homogeneous_spec(&self) -> CopulaSpec {
        CopulaSpec::clayton(self.num_ports(), self.theta_scalar)
            .expect("profile thetas are finite and non-negative")
    }

    pub fn paper_literal_spec(&self, outer: OuterIndexRule) -> CopulaSpec {
        CopulaSpec::paper_literal(self.theta.clone(), outer)
            .expect("profile thetas are finite and non-negative")
    }

    /// Coupling for `mode`. `theta_override` replaces the homogeneous θ.
    pub fn spec_for(
        &self,
        mode: CopulaMode,
        outer: OuterIndexRule,
        theta_override: Option<f64>,
    ) -> Result<CopulaSpec> {
        match mode {
            CopulaMode::Homogeneous => match theta_override {
                Some(theta) => CopulaSpec::clayton(self.num_ports(), theta),
                None => Ok(self.homogeneous_spec()),
            },
            CopulaMode::PaperLiteral => Ok(self.paper_literal_spec(outer)),
            CopulaMode::Independence => Ok(CopulaSpec::independence(self.num_ports())),
        }
    }

    pub fn warnings(&self) -> Vec<String> {
        self.clamps
            .iter()
            .map(|c| match c.kind {
                ClampKind::Independence => format!(
                    "port {}: correlation {:.6} is below the clamp floor; theta set to 0 (independence)",
                    c.port, c.mu
                ),
                ClampKind::Capped => format!(
                    "port {}: correlation {:.6} exceeds 1; theta capped at {THETA_MAX}",
                    c.port, c.mu
                ),
            })
            .collect()
    }
}

/// Above this the ascending series loses its edge over `1 − x·K₁(x)`.
const SERIES_LIMIT: f64 = 1.0;

/// CDF of the product of two independent unit-mean exponentials.
pub fn product_channel_cdf(r: f64) -> Result<f64> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::domain("product_channel_cdf", r, "gain must be >= 0"));
    }
    Ok(product_cdf(r))
}

pub(crate) fn product_cdf(r: f64) -> f64 {
    if r == 0.0 {
        0.0
    } else if r <= SERIES_LIMIT {
        product_cdf_series(r)
    } else {
        1.0 - product_survival_large(r)
    }
}

/// `1 − F(r) = 2√r·K₁(2√r)`.
pub fn product_channel_survival(r: f64) -> Result<f64> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::domain(
            "product_channel_survival",
            r,
            "gain must be >= 0",
        ));
    }
    Ok(if r <= SERIES_LIMIT {
        1.0 - product_cdf_series(r)
    } else {
        product_survival_large(r)
    })
}

fn product_survival_large(r: f64) -> f64 {
    let x = 2.0 * r.sqrt();
    if x > K1_UNDERFLOW_ARG {
        return 0.0;
    }
    x * bessel_k1(x).expect("x > 0")
}

/// `F(r) = Σ_k r^{k+1}/(k!(k+1)!)·[ψ(k+1) + ψ(k+2) − ln r]`, the expansion
/// of `1 − 2√r·K₁(2√r)` with the leading 1 cancelled analytically. Every
/// term is positive for r < e^{1−2γ}, so no precision is lost as r → 0.
fn product_cdf_series(r: f64) -> f64 {
    let ln_r = r.ln();
    let mut term = r; // r^{k+1} / (k! (k+1)!)
    let mut psi_a = -euler_mascheroni();
    let mut psi_b = 1.0 - euler_mascheroni();
    let mut sum = 0.0;
    for k in 0..40 {
        let contrib = term * (psi_a + psi_b - ln_r);
        sum += contrib;
        if contrib.abs() < 1e-18 * sum.abs() {
            break;
        }
        let kf = k as f64;
        term *= r / ((kf + 1.0) * (kf + 2.0));
        psi_a += 1.0 / (kf + 1.0);
        psi_b += 1.0 / (kf + 2.0);
    }
    sum
}

pub const DEFAULT_QUANTILE_TOL: f64 = 1e-12;

/// Inverse of [`product_channel_cdf`]: the gain `r` with `|F(r) − u| <= tol`.
///
/// The bracket comes from a lazily built table of quantiles on a uniform
/// 4096-cell grid in `u` (the upper tail doubles from the last node), then
/// Brent's method refines against the exact CDF. For small `u` the stopping test is tightened
/// to `tol·u` so the result keeps its relative accuracy in the lower tail.
pub fn product_channel_quantile(u: f64, tol: f64) -> Result<f64> {
    if u.is_nan() || !(0.0..1.0).contains(&u) {
        return Err(Error::domain(
            "product_channel_quantile",
            u,
            "probability must lie in [0, 1)",
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(
            "quantile tolerance",
            format!("{tol} is not > 0"),
        ));
    }
    Ok(product_quantile(u, tol))
}

const BRACKET_CELLS: usize = 4096;

/// `(r_i, F(r_i))` at `u_i = i / BRACKET_CELLS`, used only to seed brackets;
/// every quantile is still solved to tolerance against the exact CDF.
fn bracket_table() -> &'static [(f64, f64)] {
    static TABLE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (0..BRACKET_CELLS)
            .map(|i| {
                let r = quantile_from_unit_bracket(
                    i as f64 / BRACKET_CELLS as f64,
                    DEFAULT_QUANTILE_TOL,
                );
                (r, product_cdf(r))
            })
            .collect()
    })
}

fn quantile_from_unit_bracket(u: f64, tol: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut flo = -u;
    let mut hi = 1.0;
    let mut fhi = product_cdf(hi) - u;
    while fhi < 0.0 {
        lo = hi;
        flo = fhi;
        hi *= 2.0;
        fhi = product_cdf(hi) - u;
    }
    brent(|r| product_cdf(r) - u, lo, hi, flo, fhi, tol * u.min(1.0))
}

pub(crate) fn product_quantile(u: f64, tol: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    let table = bracket_table();
    let mut i = ((u * BRACKET_CELLS as f64) as usize).min(BRACKET_CELLS - 1);
    while i > 0 && table[i].1 > u {
        i -= 1;
    }
    while i + 1 < BRACKET_CELLS && table[i + 1].1 < u {
        i += 1;
    }
    let (lo, f_lo) = table[i];
    if i + 1 == BRACKET_CELLS {
        // upper tail: grow the bracket geometrically from the last node
        let mut lo = lo;
        let mut flo = f_lo - u;
        let mut hi = (2.0 * lo).max(1.0);
        let mut fhi = product_cdf(hi) - u;
        while fhi < 0.0 {
            lo = hi;
            flo = fhi;
            hi *= 2.0;
            fhi = product_cdf(hi) - u;
        }
        return brent(|r| product_cdf(r) - u, lo, hi, flo, fhi, tol * u.min(1.0));
    }
    let (hi, f_hi) = table[i + 1];
    brent(
        |r| product_cdf(r) - u,
        lo,
        hi,
        f_lo - u,
        f_hi - u,
        tol * u.min(1.0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(k: usize, w: f64) -> SystemConfig {
        SystemConfig {
            num_ports: k,
            fa_size: w,
            ..SystemConfig::default()
        }
    }

    #[test]
    fn jakes_values() {
        for k in [2, 4, 10] {
            assert_eq!(jake_correlation(1, &cfg(k, 3.0)).unwrap(), 1.0);
        }
        let mu = jake_correlation(2, &cfg(2, 0.5)).unwrap();
        assert!((mu + 0.304_242_177_644_093_9).abs() < 1e-14);
        let mu = jake_correlation(4, &cfg(4, 2.0)).unwrap();
        assert!((mu - 0.157_507_392_482_138_4).abs() < 1e-14);
        assert!(jake_correlation(0, &cfg(4, 1.0)).is_err());
        assert!(jake_correlation(5, &cfg(4, 1.0)).is_err());
        let single = SystemConfig {
            num_ports: 1,
            large_scale: 0.7,
            ..SystemConfig::default()
        };
        assert_eq!(jake_correlation(1, &single).unwrap(), 0.7);
    }

    #[test]
    fn theta_mapping() {
        assert_eq!(theta_from_mu(0.5, DEFAULT_CLAMP_FLOOR).unwrap().theta, 1.0);
        let zero = theta_from_mu(0.0, DEFAULT_CLAMP_FLOOR).unwrap();
        assert_eq!(zero.theta, 0.0);
        let neg = theta_from_mu(-0.3, DEFAULT_CLAMP_FLOOR).unwrap();
        assert_eq!(neg.theta, 0.0);
        assert_eq!(neg.clamp, Some(ClampKind::Independence));
        let one = theta_from_mu(1.0, DEFAULT_CLAMP_FLOOR).unwrap();
        assert_eq!((one.theta, one.clamp), (4.0, None));
        let capped = theta_from_mu(1.2, DEFAULT_CLAMP_FLOOR).unwrap();
        assert_eq!((capped.theta, capped.clamp), (4.0, Some(ClampKind::Capped)));
        assert!(theta_from_mu(1.6, DEFAULT_CLAMP_FLOOR).is_err());
        assert!(theta_from_mu(f64::NAN, DEFAULT_CLAMP_FLOOR).is_err());
    }

    #[test]
    fn spearman_approx_values() {
        assert_eq!(spearman_rho_approx(0.0).unwrap(), 0.0);
        assert_eq!(spearman_rho_approx(2.0).unwrap(), 0.75);
        assert_eq!(spearman_rho_approx(1.0).unwrap(), 0.5);
        assert!(spearman_rho_approx(-1.0).is_err());
    }

    #[test]
    fn db_conversion() {
        assert_eq!(db_to_linear(0.0), 1.0);
        assert!((db_to_linear(20.0) - 100.0).abs() < 1e-12);
        assert!((db_to_linear(-10.0) - 0.1).abs() < 1e-15);
        assert_eq!(db_to_linear(f64::NEG_INFINITY), 0.0);
    }

    #[test]
    fn product_cdf_values() {
        assert_eq!(product_channel_cdf(0.0).unwrap(), 0.0);
        assert!((product_channel_cdf(1.0).unwrap() - 0.720_268_236_366_955_1).abs() < 1e-14);
        assert!((product_channel_cdf(0.01).unwrap() - 0.044_805_491_355_905_55).abs() < 1e-16);
        assert!(1.0 - product_channel_cdf(100.0).unwrap() < 1e-6);
        assert_eq!(product_channel_cdf(1e6).unwrap(), 1.0);
        assert!(product_channel_cdf(-1e-3).is_err());
    }

    #[test]
    fn series_and_bessel_forms_meet() {
        let x = 2.0;
        let direct = 1.0 - x * bessel_k1(x).unwrap();
        assert!((product_cdf_series(1.0) - direct).abs() < 1e-15);
        let r: f64 = 0.3;
        let x = 2.0 * r.sqrt();
        assert!((product_cdf_series(r) - (1.0 - x * bessel_k1(x).unwrap())).abs() < 1e-15);
    }

    #[test]
    fn quantile_round_trip() {
        assert_eq!(product_channel_quantile(0.0, 1e-12).unwrap(), 0.0);
        let r = product_channel_quantile(0.720_268_236_366_955_1, 1e-12).unwrap();
        assert!((r - 1.0).abs() < 1e-6);
        for u in [1e-9, 0.01, 0.5, 0.99, 1.0 - 1e-12] {
            let r = product_channel_quantile(u, 1e-12).unwrap();
            assert!(
                (product_channel_cdf(r).unwrap() - u).abs() <= 1e-12,
                "u={u}"
            );
        }
        assert!(product_channel_quantile(1.0, 1e-12).is_err());
        assert!(product_channel_quantile(-0.1, 1e-12).is_err());
        assert!(product_channel_quantile(0.5, 0.0).is_err());
    }

    #[test]
    fn profile_from_config() {
        let p = PortCorrelationProfile::from_config(&cfg(4, 0.5)).unwrap();
        assert_eq!(p.num_ports(), 4);
        assert_eq!(p.mu()[0], 1.0);
        assert_eq!(p.theta()[0], 4.0);
        // J0(pi) < 0 at the last port
        assert_eq!(p.theta_scalar(), 0.0);
        assert_eq!(p.clamps().len(), 1);
        assert_eq!(p.clamps()[0].port, 4);
        assert_eq!(p.warnings().len(), 1);
        assert!(PortCorrelationProfile::from_config(&cfg(0, 1.0)).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SystemConfig::default().validate().is_ok());
        let bad = SystemConfig {
            large_scale: 1.5,
            ..SystemConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SystemConfig {
            bandwidth_hz: 0.0,
            ..SystemConfig::default()
        };
        assert!(bad.validate().is_err());
        let ok = SystemConfig {
            snr_threshold_db: f64::NEG_INFINITY,
            ..SystemConfig::default()
        };
        assert!(ok.validate().is_ok());
        assert_eq!(ok.outage_point(), 0.0);
    }
}
