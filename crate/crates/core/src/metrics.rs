//! Equivalent-channel CDF, outage probability and delay outage rate.
//!
//! The reader always uses its strongest port, so the equivalent gain is the
//! maximum of `K` product-channel gains and its CDF is the copula evaluated
//! on the diagonal: `F_FA(r) = C(F_p(r), …, F_p(r))`. Outage and delay outage
//! are both that CDF at a normalised threshold.

use std::f64::consts::LN_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::{product_cdf, PortCorrelationProfile, SystemConfig};
use crate::copula::{eval_unchecked, CopulaKind, CopulaSpec, INDEPENDENCE_THETA};
use crate::error::{Error, Result};
use crate::specfun::euler_mascheroni;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricMode {
    Exact,
    Asymptotic,
    PaperLiteral,
}

/// How the delay threshold `T̂` is derived from `R`, `B` and `T_th`.
///
/// The delivery time exceeds `T_th` exactly when
/// `γ̄·g < 2^{R/(B·T_th)} − 1`. `Paper` drops the `− 1`, which is the
/// threshold the closed form was published with; `Corrected` keeps it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DorThresholdMode {
    #[default]
    Paper,
    Corrected,
}

impl DorThresholdMode {
    pub fn threshold(self, config: &SystemConfig) -> f64 {
        let exponent =
            config.payload_bits * LN_2 / (config.bandwidth_hz * config.delay_threshold_s);
        match self {
            DorThresholdMode::Paper => exponent.exp(),
            DorThresholdMode::Corrected => exponent.exp_m1(),
        }
    }
}

impl std::str::FromStr for DorThresholdMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Self::Paper),
            "corrected" => Ok(Self::Corrected),
            other => Err(Error::invalid(
                "dor-mode",
                format!("unknown mode '{other}' (paper|corrected)"),
            )),
        }
    }
}

impl fmt::Display for DorThresholdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DorThresholdMode::Paper => "paper",
            DorThresholdMode::Corrected => "corrected",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricResult {
    pub value: f64,
    pub mode: MetricMode,
    pub config: SystemConfig,
    pub copula_mode: &'static str,
    pub warnings: Vec<String>,
}

fn check_dimensions(profile: &PortCorrelationProfile, spec: &CopulaSpec) -> Result<()> {
    if profile.num_ports() != spec.dimension() {
        return Err(Error::invalid(
            "copula dimension",
            format!(
                "profile has {} ports but the copula has dimension {}",
                profile.num_ports(),
                spec.dimension()
            ),
        ));
    }
    Ok(())
}

/// Couples `K` identical marginal probabilities `u` through `spec`.
fn diagonal(u: f64, ports: usize, spec: &CopulaSpec) -> f64 {
    if ports == 1 || u <= 0.0 {
        return u.max(0.0);
    }
    match spec.kind() {
        CopulaKind::Independence => u.powi(ports as i32),
        _ => eval_unchecked(&vec![u; ports], spec),
    }
}

/// CDF of the best-port gain `max_k g_f·g_{b,k}` at `r`.
pub fn equivalent_channel_cdf(
    r: f64,
    profile: &PortCorrelationProfile,
    spec: &CopulaSpec,
) -> Result<f64> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::domain(
            "equivalent_channel_cdf",
            r,
            "gain must be >= 0",
        ));
    }
    check_dimensions(profile, spec)?;
    Ok(diagonal(product_cdf(r), profile.num_ports(), spec))
}

fn base_warnings(profile: &PortCorrelationProfile, spec: &CopulaSpec) -> Vec<String> {
    let mut warnings = profile.warnings();
    if spec.is_paper_literal() {
        warnings.push(
            "paper-literal copula form is diagnostic: it is not a valid copula unless all port thetas coincide"
                .to_string(),
        );
        if spec.outer_theta().is_some_and(|t| t <= INDEPENDENCE_THETA) {
            warnings.push(
                "paper-literal outer theta is 0; evaluated as the independence product".to_string(),
            );
        }
    }
    warnings
}

fn exact_at(r: f64, config: &SystemConfig, spec: &CopulaSpec) -> Result<MetricResult> {
    let profile = PortCorrelationProfile::from_config(config)?;
    let value = equivalent_channel_cdf(r, &profile, spec)?;
    Ok(MetricResult {
        value,
        mode: if spec.is_paper_literal() {
            MetricMode::PaperLiteral
        } else {
            MetricMode::Exact
        },
        config: *config,
        copula_mode: spec.label(),
        warnings: base_warnings(&profile, spec),
    })
}

/// `P_o = F_FA(γ_th / γ̄)`.
pub fn outage_probability(config: &SystemConfig, spec: &CopulaSpec) -> Result<MetricResult> {
    config.validate()?;
    exact_at(config.outage_point(), config, spec)
}

/// `P_dor = F_FA(T̂ / γ̄)` with `T̂` from `mode`.
pub fn delay_outage_rate(
    config: &SystemConfig,
    spec: &CopulaSpec,
    mode: DorThresholdMode,
) -> Result<MetricResult> {
    config.validate()?;
    exact_at(
        mode.threshold(config) / config.avg_snr_linear(),
        config,
        spec,
    )
}

/// High-SNR marginal `F_p(r) ≈ r[1 − 2ζ − 2 ln √r]`, from the three-term
/// small-argument expansion of K₁.
pub fn asymptotic_marginal(r: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    r * (1.0 - 2.0 * euler_mascheroni() - r.ln())
}

fn asymptotic_at(
    r: f64,
    regime_ok: bool,
    config: &SystemConfig,
    profile: &PortCorrelationProfile,
    spec: &CopulaSpec,
) -> Result<MetricResult> {
    check_dimensions(profile, spec)?;
    let mut warnings = base_warnings(profile, spec);
    if !regime_ok {
        warnings.push(format!(
            "average SNR {} dB is not above the threshold; outside the high-SNR regime",
            config.avg_snr_db
        ));
    }
    let marginal = asymptotic_marginal(r);
    let value = if marginal < 0.0 {
        warnings.push(format!(
            "asymptotic marginal {marginal:.6e} at r = {r:.6e} is negative; the expression is undefined here"
        ));
        f64::NAN
    } else {
        if marginal > 1.0 {
            warnings.push(format!("asymptotic marginal {marginal:.6e} exceeds 1"));
        }
        diagonal(marginal, profile.num_ports(), spec)
    };
    Ok(MetricResult {
        value,
        mode: MetricMode::Asymptotic,
        config: *config,
        copula_mode: spec.label(),
        warnings,
    })
}

/// High-SNR outage approximation: the asymptotic marginal pushed through the
/// same copula shell as the exact form.
pub fn outage_probability_asymptotic(
    config: &SystemConfig,
    profile: &PortCorrelationProfile,
    spec: &CopulaSpec,
) -> Result<MetricResult> {
    config.validate()?;
    let regime_ok = config.avg_snr_linear() > config.snr_threshold_linear();
    asymptotic_at(config.outage_point(), regime_ok, config, profile, spec)
}

pub fn delay_outage_rate_asymptotic(
    config: &SystemConfig,
    profile: &PortCorrelationProfile,
    spec: &CopulaSpec,
    mode: DorThresholdMode,
) -> Result<MetricResult> {
    config.validate()?;
    let threshold = mode.threshold(config);
    let regime_ok = config.avg_snr_linear() > threshold;
    asymptotic_at(
        threshold / config.avg_snr_linear(),
        regime_ok,
        config,
        profile,
        spec,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::product_channel_cdf;

    fn cfg(k: usize, w: f64, snr: f64) -> SystemConfig {
        SystemConfig {
            num_ports: k,
            fa_size: w,
            avg_snr_db: snr,
            ..SystemConfig::default()
        }
    }

    #[test]
    fn equivalent_cdf_edge_cases() {
        let c = cfg(3, 1.0, 20.0);
        let p = PortCorrelationProfile::from_config(&c).unwrap();
        let spec = p.homogeneous_spec();
        assert_eq!(equivalent_channel_cdf(0.0, &p, &spec).unwrap(), 0.0);
        let ind = CopulaSpec::independence(3);
        let v = equivalent_channel_cdf(1.0, &p, &ind).unwrap();
        let f = product_channel_cdf(1.0).unwrap();
        assert!((v - f.powi(3)).abs() < 1e-15);
        assert!((v - 0.373_671).abs() < 1e-5);
        assert!(equivalent_channel_cdf(-1.0, &p, &spec).is_err());
        assert!(equivalent_channel_cdf(1.0, &p, &CopulaSpec::independence(2)).is_err());

        let single = cfg(1, 1.0, 20.0);
        let p1 = PortCorrelationProfile::from_config(&single).unwrap();
        let v = equivalent_channel_cdf(1.0, &p1, &p1.homogeneous_spec()).unwrap();
        assert!((v - 0.720_268_236_366_955_1).abs() < 1e-15);
    }

    #[test]
    fn single_port_outage() {
        let c = cfg(1, 1.0, 20.0);
        let p = PortCorrelationProfile::from_config(&c).unwrap();
        let op = outage_probability(&c, &p.homogeneous_spec()).unwrap();
        assert!((op.value - 0.044_805_491_355_905_55).abs() < 1e-15);
        assert_eq!(op.mode, MetricMode::Exact);
    }

    #[test]
    fn outage_vanishes_at_high_snr() {
        let mut last = 1.0;
        for snr in [40.0, 80.0, 120.0, 160.0] {
            let c = cfg(4, 1.0, snr);
            let p = PortCorrelationProfile::from_config(&c).unwrap();
            let v = outage_probability(&c, &p.homogeneous_spec()).unwrap().value;
            assert!(v < last);
            last = v;
        }
        assert!(last < 1e-12);
    }

    #[test]
    fn dor_thresholds() {
        let c = SystemConfig::default();
        let paper = DorThresholdMode::Paper.threshold(&c);
        assert!((paper - 1.000_577_7).abs() < 1e-6);
        let corrected = DorThresholdMode::Corrected.threshold(&c);
        assert!((paper - 1.0 - corrected).abs() < 1e-15);
        let tiny = SystemConfig {
            payload_bits: 1e-9,
            ..c
        };
        let p = PortCorrelationProfile::from_config(&tiny).unwrap();
        let dor =
            delay_outage_rate(&tiny, &p.homogeneous_spec(), DorThresholdMode::Corrected).unwrap();
        assert!(dor.value < 1e-12);
    }

    #[test]
    fn asymptote_warns_outside_regime() {
        let c = cfg(4, 1.0, 0.0);
        let p = PortCorrelationProfile::from_config(&c).unwrap();
        let spec = p.homogeneous_spec();
        let r = delay_outage_rate_asymptotic(&c, &p, &spec, DorThresholdMode::Paper).unwrap();
        assert!(!r.warnings.is_empty());
        assert!(r.value.is_nan());
        let ok = cfg(4, 1.0, 50.0);
        let r = outage_probability_asymptotic(&ok, &p, &spec).unwrap();
        assert!(!r
            .warnings
            .iter()
            .any(|w| w.contains("regime") || w.contains("undefined")));
        assert!(r.value > 0.0 && r.value < 1.0);
    }

    #[test]
    fn paper_literal_is_flagged() {
        let c = cfg(4, 1.0, 20.0);
        let p = PortCorrelationProfile::from_config(&c).unwrap();
        let spec = p.paper_literal_spec(Default::default());
        let r = outage_probability(&c, &spec).unwrap();
        assert_eq!(r.mode, MetricMode::PaperLiteral);
        assert!(r.warnings.iter().any(|w| w.contains("diagnostic")));
    }
}
