//! Parameter sweeps over the closed forms and the simulator, with CSV and
//! JSON output.
//!
//! Rows come out in curve declaration order, then ascending `x`. Points are
//! evaluated in parallel but every engine is deterministic (the simulator
//! reuses the same seed at each point), so output bytes depend only on the
//! spec.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{db_to_linear, PortCorrelationProfile, SystemConfig};
use crate::config::{Engine, Metric, RunConfig, Vary, XAxis};
use crate::copula::{CopulaMode, OuterIndexRule};
use crate::error::{Error, Result};
use crate::metrics::{
    delay_outage_rate, delay_outage_rate_asymptotic, outage_probability,
    outage_probability_asymptotic, DorThresholdMode, MetricResult,
};
use crate::montecarlo::{estimate_dor, estimate_outage, MIN_SAMPLES};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub metric: Metric,
    pub x_axis: XAxis,
    pub x_values: Vec<f64>,
    /// Everything not set by the x axis or the per-curve parameter.
    pub fixed: SystemConfig,
    pub vary: Vary,
    pub vary_values: Vec<f64>,
    /// Appends a `K=1` curve (single-antenna reader).
    pub single_antenna_baseline: bool,
    pub engines: Vec<Engine>,
    pub mc_samples: usize,
    pub seed: u64,
    pub copula_mode: CopulaMode,
    pub outer_index_rule: OuterIndexRule,
    pub theta_override: Option<f64>,
    pub clamp_floor: f64,
    pub dor_mode: DorThresholdMode,
}

impl SweepSpec {
    pub fn from_config(config: &RunConfig) -> Self {
        let s = &config.sweep;
        Self {
            metric: s.metric,
            x_axis: s.x_axis,
            x_values: s.x_values.clone(),
            fixed: config.system,
            vary: s.vary,
            vary_values: s.vary_values.clone(),
            single_antenna_baseline: s.single_antenna_baseline,
            engines: s.engines.clone(),
            mc_samples: config.monte_carlo.samples,
            seed: config.monte_carlo.seed,
            copula_mode: config.model.copula,
            outer_index_rule: config.model.outer_index_rule,
            theta_override: config.model.theta,
            clamp_floor: config.model.clamp_floor,
            dor_mode: config.model.dor_mode,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.x_values.is_empty() {
            return Err(Error::invalid("x_values", "must not be empty"));
        }
        if self.x_values.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("x_values", "must be finite"));
        }
        if self.x_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("x_values", "must be strictly increasing"));
        }
        if self.x_axis == XAxis::PayloadBits && self.x_values[0] <= 0.0 {
            return Err(Error::invalid("x_values", "payload sizes must be > 0"));
        }
        if self.vary != Vary::None && self.vary_values.is_empty() {
            return Err(Error::invalid("vary_values", "must not be empty"));
        }
        if self.vary == Vary::NumPorts
            && self
                .vary_values
                .iter()
                .any(|&k| !(k >= 1.0 && k.fract() == 0.0 && k <= 1e6))
        {
            return Err(Error::invalid(
                "vary_values",
                "port counts must be positive integers",
            ));
        }
        if self.engines.is_empty() {
            return Err(Error::invalid("engines", "at least one engine is required"));
        }
        if self.engines.contains(&Engine::Montecarlo) && self.mc_samples < MIN_SAMPLES {
            return Err(Error::invalid(
                "samples",
                format!("{} is below the minimum of {MIN_SAMPLES}", self.mc_samples),
            ));
        }
        if let Some(theta) = self.theta_override {
            if !(theta >= 0.0 && theta.is_finite()) {
                return Err(Error::invalid("theta", format!("{theta} is not >= 0")));
            }
        }
        for curve in self.curves() {
            curve.config.validate()?;
        }
        Ok(())
    }

    /// Curves in declaration order; the baseline, if any, comes last.
    pub fn curves(&self) -> Vec<Curve> {
        let mut curves: Vec<Curve> = match self.vary {
            Vary::None => vec![Curve {
                id: format!("K={},W={}", self.fixed.num_ports, self.fixed.fa_size),
                config: self.fixed,
            }],
            Vary::FaSize => self
                .vary_values
                .iter()
                .map(|&w| Curve {
                    id: format!("W={w}"),
                    config: SystemConfig {
                        fa_size: w,
                        ..self.fixed
                    },
                })
                .collect(),
            Vary::NumPorts => self
                .vary_values
                .iter()
                .map(|&k| Curve {
                    id: format!("K={k}"),
                    config: SystemConfig {
                        num_ports: k as usize,
                        ..self.fixed
                    },
                })
                .collect(),
        };
        if self.single_antenna_baseline && !curves.iter().any(|c| c.config.num_ports == 1) {
            curves.push(Curve {
                id: "K=1".to_string(),
                config: SystemConfig {
                    num_ports: 1,
                    ..self.fixed
                },
            });
        }
        curves
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub id: String,
    pub config: SystemConfig,
}

/// One `(curve, x)` point. Engines that did not run leave `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub curve_id: String,
    pub x: f64,
    pub exact: Option<f64>,
    pub asymptotic: Option<f64>,
    pub mc: Option<f64>,
    pub mc_lo: Option<f64>,
    pub mc_hi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conversion {
    pub quantity: &'static str,
    pub db: f64,
    pub linear: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveInfo {
    pub curve_id: String,
    pub num_ports: usize,
    pub fa_size: f64,
    pub mu: Vec<f64>,
    pub theta: Vec<f64>,
    pub copula: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepMetadata {
    pub version: &'static str,
    pub seed: u64,
    pub spec: SweepSpec,
    pub curves: Vec<CurveInfo>,
    pub conversions: Vec<Conversion>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub metadata: SweepMetadata,
    pub rows: Vec<SweepRow>,
}

fn point_error(curve: &Curve, x: f64, config: &SystemConfig, source: Error) -> Error {
    Error::SweepPoint {
        curve_id: curve.id.clone(),
        x,
        config: serde_json::to_string(config).unwrap_or_else(|_| format!("{config:?}")),
        source: Box::new(source),
    }
}

fn eval_point(spec: &SweepSpec, curve: &Curve, x: f64) -> Result<(SweepRow, Vec<String>)> {
    let mut config = curve.config;
    spec.x_axis.apply(&mut config, x);
    let run = || -> Result<(SweepRow, Vec<String>)> {
        let profile = PortCorrelationProfile::with_clamp_floor(&config, spec.clamp_floor)?;
        let copula =
            profile.spec_for(spec.copula_mode, spec.outer_index_rule, spec.theta_override)?;
        let mut warnings = Vec::new();
        let mut row = SweepRow {
            curve_id: curve.id.clone(),
            x,
            exact: None,
            asymptotic: None,
            mc: None,
            mc_lo: None,
            mc_hi: None,
        };
        let keep = |r: MetricResult, warnings: &mut Vec<String>| {
            warnings.extend(r.warnings.into_iter().map(|w| format!("{}: {w}", curve.id)));
            Some(r.value).filter(|v| v.is_finite())
        };
        for engine in &spec.engines {
            match engine {
                Engine::Exact => {
                    let r = match spec.metric {
                        Metric::Op => outage_probability(&config, &copula)?,
                        Metric::Dor => delay_outage_rate(&config, &copula, spec.dor_mode)?,
                    };
                    row.exact = keep(r, &mut warnings);
                }
                Engine::Asymptotic => {
                    let r = match spec.metric {
                        Metric::Op => outage_probability_asymptotic(&config, &profile, &copula)?,
                        Metric::Dor => {
                            delay_outage_rate_asymptotic(&config, &profile, &copula, spec.dor_mode)?
                        }
                    };
                    row.asymptotic = keep(r, &mut warnings);
                }
                Engine::Montecarlo => {
                    if copula.is_paper_literal() {
                        warnings.push(
                            "mc engine skipped: the paper-literal copula is a diagnostic, not a distribution"
                                .to_string(),
                        );
                        continue;
                    }
                    let e = match spec.metric {
                        Metric::Op => {
                            estimate_outage(&config, &copula, spec.mc_samples, spec.seed)?
                        }
                        Metric::Dor => estimate_dor(
                            &config,
                            &copula,
                            spec.dor_mode,
                            spec.mc_samples,
                            spec.seed,
                        )?,
                    };
                    row.mc = Some(e.estimate);
                    row.mc_lo = Some(e.confidence_95.0);
                    row.mc_hi = Some(e.confidence_95.1);
                }
            }
        }
        Ok((row, warnings))
    };
    run().map_err(|e| point_error(curve, x, &config, e))
}

fn conversions(spec: &SweepSpec) -> Vec<Conversion> {
    let mut out = Vec::new();
    let mut push = |quantity, db: f64| {
        if !out
            .iter()
            .any(|c: &Conversion| c.quantity == quantity && c.db.to_bits() == db.to_bits())
        {
            out.push(Conversion {
                quantity,
                db,
                linear: db_to_linear(db),
            });
        }
    };
    push("snr_threshold", spec.fixed.snr_threshold_db);
    match spec.x_axis {
        XAxis::AvgSnrDb => spec.x_values.iter().for_each(|&x| push("avg_snr", x)),
        XAxis::PayloadBits => push("avg_snr", spec.fixed.avg_snr_db),
    }
    out
}

/// Evaluates every requested engine at every `(curve, x)`. The first failing
/// point aborts the sweep.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let curves = spec.curves();
    let mut infos = Vec::with_capacity(curves.len());
    for curve in &curves {
        let profile = PortCorrelationProfile::with_clamp_floor(&curve.config, spec.clamp_floor)
            .map_err(|e| point_error(curve, spec.x_values[0], &curve.config, e))?;
        let copula = profile
            .spec_for(spec.copula_mode, spec.outer_index_rule, spec.theta_override)
            .map_err(|e| point_error(curve, spec.x_values[0], &curve.config, e))?;
        infos.push(CurveInfo {
            curve_id: curve.id.clone(),
            num_ports: curve.config.num_ports,
            fa_size: curve.config.fa_size,
            mu: profile.mu().to_vec(),
            theta: profile.theta().to_vec(),
            copula: copula.label(),
        });
    }

    let points: Vec<(&Curve, f64)> = curves
        .iter()
        .flat_map(|c| spec.x_values.iter().map(move |&x| (c, x)))
        .collect();
    let evaluated = points
        .par_iter()
        .map(|&(curve, x)| eval_point(spec, curve, x))
        .collect::<Result<Vec<_>>>()?;

    let mut seen = HashSet::new();
    let mut warnings = Vec::new();
    let mut rows = Vec::with_capacity(evaluated.len());
    for (row, ws) in evaluated {
        for w in ws {
            if seen.insert(w.clone()) {
                warnings.push(w);
            }
        }
        rows.push(row);
    }
    Ok(SweepResult {
        metadata: SweepMetadata {
            version: env!("CARGO_PKG_VERSION"),
            seed: spec.seed,
            spec: spec.clone(),
            curves: infos,
            conversions: conversions(spec),
            warnings,
        },
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::invalid(
                "format",
                format!("unknown format '{other}' (csv|json)"),
            )),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

pub const CSV_HEADER: [&str; 7] = [
    "curve_id",
    "x",
    "exact",
    "asymptotic",
    "mc",
    "mc_lo",
    "mc_hi",
];

fn cell(v: Option<f64>) -> String {
    v.map(|p| format!("{p:e}")).unwrap_or_default()
}

/// Serializes `result` to a string in `format`.
pub fn render(result: &SweepResult, format: Format) -> Result<String> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            let csv_err = |e: csv::Error| Error::invalid("csv", e.to_string());
            w.write_record(CSV_HEADER).map_err(csv_err)?;
            for r in &result.rows {
                w.write_record([
                    r.curve_id.clone(),
                    r.x.to_string(),
                    cell(r.exact),
                    cell(r.asymptotic),
                    cell(r.mc),
                    cell(r.mc_lo),
                    cell(r.mc_hi),
                ])
                .map_err(csv_err)?;
            }
            let bytes = w
                .into_inner()
                .map_err(|e| Error::invalid("csv", e.to_string()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
        Format::Json => {
            let mut s = serde_json::to_string_pretty(result)
                .map_err(|e| Error::invalid("json", e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
    }
}

pub fn emit(result: &SweepResult, format: Format, path: &Path) -> Result<()> {
    let text = render(result, format)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
