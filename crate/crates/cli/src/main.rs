//! `fabc`: sweeps, validation and debugging helpers for fluid-antenna
//! backscatter outage analysis.
//!
//! Exit status: 0 success, 1 validation failure, 2 usage error, 3 I/O error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fabc::channel::{
    product_channel_quantile, spearman_rho_approx, PortCorrelationProfile, DEFAULT_QUANTILE_TOL,
};
use fabc::config::{parse_engines, RunConfig};
use fabc::copula::CopulaMode;
use fabc::metrics::DorThresholdMode;
use fabc::specfun::euler_mascheroni;
use fabc::sweep::{emit, render, run_sweep, Format, SweepSpec};
use fabc::validate::run_validation;
use fabc::Error;

#[derive(Parser)]
#[command(
    name = "fabc",
    version,
    about = "Outage and delay-outage analysis for fluid-antenna backscatter links"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a parameter sweep and write CSV or JSON.
    Sweep(SweepArgs),
    /// Run the closed-form versus Monte-Carlo agreement suite.
    Validate(ValidateArgs),
    /// Invert the product-channel CDF.
    Quantile {
        /// Probabilities in [0, 1).
        #[arg(required = true)]
        u: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_QUANTILE_TOL)]
        tol: f64,
    },
    /// Print ζ and the port correlation / θ mapping for a config.
    Constants(ModelArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// TOML run configuration; every key is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    /// homogeneous | paper-literal | independence
    #[arg(long)]
    copula: Option<String>,
    /// paper | corrected
    #[arg(long)]
    dor_mode: Option<String>,
}

#[derive(Args)]
struct McArgs {
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    mc: McArgs,
    /// op | dor
    #[arg(long)]
    metric: Option<String>,
    /// Comma-separated subset of exact,asymptotic,mc
    #[arg(long)]
    engines: Option<String>,
    /// csv | json
    #[arg(long, default_value = "csv")]
    format: String,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    mc: McArgs,
    /// Also write the report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(model: &ModelArgs, mc: Option<&McArgs>) -> Result<RunConfig, Error> {
    let mut config = match &model.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(c) = &model.copula {
        config.model.copula = c.parse::<CopulaMode>()?;
    }
    if let Some(m) = &model.dor_mode {
        config.model.dor_mode = m.parse::<DorThresholdMode>()?;
    }
    if let Some(mc) = mc {
        if let Some(n) = mc.samples {
            config.monte_carlo.samples = n;
        }
        if let Some(s) = mc.seed {
            config.monte_carlo.seed = s;
        }
    }
    config.validate()?;
    Ok(config)
}

fn write_file(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn sweep(args: SweepArgs) -> Result<ExitCode, Error> {
    let mut config = load(&args.model, Some(&args.mc))?;
    if let Some(m) = &args.metric {
        config.sweep.metric = m.parse()?;
    }
    if let Some(e) = &args.engines {
        config.sweep.engines = parse_engines(e)?;
    }
    let format: Format = args.format.parse()?;
    let result = run_sweep(&SweepSpec::from_config(&config))?;
    for w in &result.metadata.warnings {
        eprintln!("warning: {w}");
    }
    match &args.out {
        Some(path) => emit(&result, format, path)?,
        None => print!("{}", render(&result, format)?),
    }
    Ok(ExitCode::SUCCESS)
}

fn validate(args: ValidateArgs) -> Result<ExitCode, Error> {
    let config = load(&args.model, Some(&args.mc))?;
    let report = run_validation(&config)?;
    let text = report.to_string();
    print!("{text}");
    if let Some(path) = &args.out {
        write_file(path, &text)?;
    }
    Ok(if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn quantile(u: &[f64], tol: f64) -> Result<ExitCode, Error> {
    let mut out = String::new();
    for &p in u {
        out.push_str(&format!(
            "{p}\t{:.17e}\n",
            product_channel_quantile(p, tol)?
        ));
    }
    print!("{out}");
    Ok(ExitCode::SUCCESS)
}

fn constants(args: ModelArgs) -> Result<ExitCode, Error> {
    let config = load(&args, None)?;
    let sys = &config.system;
    let profile = PortCorrelationProfile::with_clamp_floor(sys, config.model.clamp_floor)?;
    let spec = profile.spec_for(
        config.model.copula,
        config.model.outer_index_rule,
        config.model.theta,
    )?;
    let mut out = String::new();
    out.push_str(&format!("zeta\t{:.16}\n", euler_mascheroni()));
    out.push_str(&format!(
        "K\t{}\nW\t{}\nomega\t{}\nclamp_floor\t{:e}\n",
        sys.num_ports, sys.fa_size, sys.large_scale, config.model.clamp_floor
    ));
    out.push_str("port\tmu\ttheta\trho_s\tclamp\n");
    for (i, (&mu, &theta)) in profile.mu().iter().zip(profile.theta()).enumerate() {
        let clamp = profile
            .clamps()
            .iter()
            .find(|c| c.port == i + 1)
            .map(|c| format!("{:?}", c.kind).to_lowercase())
            .unwrap_or_else(|| "-".into());
        out.push_str(&format!(
            "{}\t{mu:.10}\t{theta:.10}\t{:.10}\t{clamp}\n",
            i + 1,
            spearman_rho_approx(theta)?
        ));
    }
    out.push_str(&format!("copula\t{}\n", spec.label()));
    if let Some(theta) = spec.outer_theta() {
        out.push_str(&format!("theta_used\t{theta:.10}\n"));
    }
    out.push_str(&format!(
        "avg_snr_linear\t{:e}\nsnr_threshold_linear\t{:e}\n",
        sys.avg_snr_linear(),
        sys.snr_threshold_linear()
    ));
    for mode in [DorThresholdMode::Paper, DorThresholdMode::Corrected] {
        out.push_str(&format!(
            "dor_threshold_{mode}\t{:e}\n",
            mode.threshold(sys)
        ));
    }
    for w in profile.warnings() {
        eprintln!("warning: {w}");
    }
    print!("{out}");
    Ok(ExitCode::SUCCESS)
}

fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::Io { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Sweep(a) => sweep(a),
        Command::Validate(a) => validate(a),
        Command::Quantile { u, tol } => quantile(&u, tol),
        Command::Constants(a) => constants(a),
    };
    let _ = std::io::stdout().flush();
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("fabc: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
