//! canyoncov: 28 GHz street-canyon propagation toolkit CLI.
//!
//! Subcommands: `eval` (preset arithmetic), `fit` / `corner-fit`
//! (least-squares model fitting from link CSVs), `angular` (scan
//! processing and full-scattering simulation), `raytrace` (canyon ray
//! sweep), `netsim` (Manhattan-grid coverage maps).
//!
//! Every run is reproducible: `--seed` wins, then the `CANYONCOV_SEED`
//! environment variable, then a random seed that is logged to stderr so
//! the run can be replayed.

// Validation guards use negated comparisons so NaN inputs fail them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::RngCore;

use canyoncov::angular::{
    azimuth_gain, empirical_cdf, omni_path_gain, simulate_full_scattering, ComplexPattern,
};
use canyoncov::config::ToolConfig;
use canyoncov::error::Error;
use canyoncov::fit::{fit_corner_model, fit_fixed_intercept, fit_slope_intercept, InterceptMode};
use canyoncov::io::{
    fmt6, load_links, write_cdf, write_fit_report, write_map, write_percentiles, write_raytrace,
    write_residuals,
};
use canyoncov::netsim::{build_grid, compute_map_on, percentile_report, sample_ue_points};
use canyoncov::propagation::{CornerVariant, FRIIS_28GHZ_1M_DB};
use canyoncov::raytrace::{enumerate_rays, incoherent_path_gain};

#[derive(Parser)]
#[command(
    name = "canyoncov",
    version,
    about = "Street-canyon mmWave propagation toolkit"
)]
struct Cli {
    /// RNG seed; falls back to $CANYONCOV_SEED, then a logged random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Shared key=value config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a named model preset at one distance.
    Eval(EvalArgs),
    /// Slope-intercept fit of a link CSV.
    Fit(FitArgs),
    /// Around-corner model fit of a link CSV.
    CornerFit(CornerFitArgs),
    /// Angular-scan processing and full-scattering simulation.
    Angular(AngularArgs),
    /// Canyon ray-trace sweep over a range grid.
    Raytrace(RaytraceArgs),
    /// Manhattan-grid SNR/SINR/rate map.
    Netsim(NetsimArgs),
}

#[derive(Args)]
struct EvalArgs {
    /// Preset key, e.g. roof-edge or corner-diffraction-friis.
    #[arg(long)]
    preset: String,
    /// Distance in meters (unwrapped route distance for corner presets).
    #[arg(long)]
    distance: f64,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    /// Pin the 1 m intercept: 'friis' or a value in dB.
    #[arg(long)]
    fixed_intercept: Option<String>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct CornerFitArgs {
    #[arg(long)]
    input: PathBuf,
    /// diffraction | scattering | dualslope
    #[arg(long)]
    variant: String,
    /// Fit the intercept instead of pinning it at Friis.
    #[arg(long)]
    float_intercept: bool,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct AngularArgs {
    /// Scan CSV (angle_deg,power_mw) with optional <input>.meta sidecar.
    #[arg(long)]
    input: PathBuf,
    /// Also simulate N full-scattering trials with the nominal horn and
    /// write the degradation CDF.
    #[arg(long)]
    full_scattering: Option<usize>,
    /// DKW band level for the CDF output.
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct RaytraceArgs {
    #[arg(long)]
    dmin: f64,
    #[arg(long)]
    dmax: f64,
    #[arg(long)]
    step: f64,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct NetsimArgs {
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Percentiles for the report.
    #[arg(long, value_delimiter = ',', default_values_t = vec![5.0, 10.0, 25.0, 50.0, 75.0, 90.0, 95.0])]
    percentiles: Vec<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (class, code) = classify(&err);
            eprintln!("error[{class}]: {err}");
            ExitCode::from(code)
        }
    }
}

/// Map error classes to stable exit codes.
fn classify(err: &anyhow::Error) -> (&'static str, u8) {
    if let Some(e) = err.downcast_ref::<Error>() {
        match e {
            Error::Config(_) => ("config", 2),
            Error::Io(_) => ("input", 3),
            Error::Domain(_) => ("domain", 4),
            Error::Data(_) => ("data", 5),
        }
    } else {
        ("other", 1)
    }
}

fn resolve_seed(cli_seed: Option<u64>, config: &ToolConfig) -> u64 {
    if let Some(s) = cli_seed {
        return s;
    }
    if let Ok(env) = std::env::var("CANYONCOV_SEED") {
        if let Ok(s) = env.parse() {
            return s;
        }
        eprintln!("warning: ignoring non-numeric CANYONCOV_SEED '{env}'");
    }
    if let Some(s) = config.seed() {
        return s;
    }
    let s = rand::thread_rng().next_u64();
    eprintln!("seed = {s} (random; pass --seed {s} to replay)");
    s
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = match &cli.config {
        Some(path) => ToolConfig::from_file(path)?,
        None => ToolConfig::default(),
    };
    // Resolved lazily so seedless deterministic commands stay quiet.
    let seed = |cfg: &ToolConfig| resolve_seed(cli.seed, cfg);

    match cli.command {
        Command::Eval(args) => {
            let preset = config.preset(&args.preset)?;
            let gain = preset.eval(args.distance)?;
            println!("{}", fmt6(gain));
        }
        Command::Fit(args) => {
            let (records, manifest) = load_links(&args.input)?;
            report_manifest(&manifest);
            let fit = match args.fixed_intercept.as_deref() {
                None => fit_slope_intercept(&records)?,
                Some("friis") => fit_fixed_intercept(&records, FRIIS_28GHZ_1M_DB)?,
                Some(v) => {
                    let pin: f64 = v.parse().map_err(|_| {
                        Error::config(format!(
                            "--fixed-intercept wants 'friis' or a dB value, got '{v}'"
                        ))
                    })?;
                    fit_fixed_intercept(&records, pin)?
                }
            };
            emit_fit(&args.out, &fit)?;
        }
        Command::CornerFit(args) => {
            let (records, manifest) = load_links(&args.input)?;
            report_manifest(&manifest);
            let variant = CornerVariant::parse(&args.variant)?;
            let mode = if args.float_intercept {
                InterceptMode::Floating
            } else {
                InterceptMode::PinnedFriis
            };
            let fit = fit_corner_model(&records, variant, mode)?;
            emit_fit(&args.out, &fit)?;
        }
        Command::Angular(args) => {
            let scan = canyoncov::io::load_scan(&args.input)?;
            let gain = azimuth_gain(scan.power_mw())?;
            let omni = omni_path_gain(&scan);
            println!("gain_db = {}", fmt6(gain));
            println!("omni_path_gain_db = {}", fmt6(omni));
            if let Some(trials) = args.full_scattering {
                let bins = config.angular_bins();
                let antenna = ComplexPattern::gaussian_beam(bins, 10.0, -25.0)?;
                let nominal = antenna.azimuth_gain()?;
                let gains = simulate_full_scattering(&antenna, trials, seed(&config))?;
                // Degradation from nominal, for direct comparison with the
                // measured-gain distributions.
                let degradation: Vec<f64> = gains.iter().map(|g| nominal - g).collect();
                let cdf = empirical_cdf(&degradation, args.alpha)?;
                std::fs::create_dir_all(&args.out)?;
                let path = args.out.join("full_scattering_cdf.csv");
                write_cdf(&path, &cdf)?;
                println!("nominal_gain_db = {}", fmt6(nominal));
                println!("wrote {}", path.display());
            }
        }
        Command::Raytrace(args) => {
            if !(args.dmin >= 1.0) || !(args.dmax >= args.dmin) || !(args.step > 0.0) {
                return Err(Error::config(format!(
                    "bad sweep: dmin {} dmax {} step {}",
                    args.dmin, args.dmax, args.step
                ))
                .into());
            }
            let geometry = config.canyon_geometry()?;
            let mut rows = Vec::new();
            let mut d = args.dmin;
            while d <= args.dmax + 1e-9 {
                let gain = incoherent_path_gain(&geometry, d)?;
                let n = enumerate_rays(&geometry, d)?.len();
                rows.push((d, gain, n));
                d += args.step;
            }
            match args.out {
                Some(path) => write_raytrace(path, &rows)?,
                None => {
                    println!("range_m,path_gain_db,n_rays");
                    for (range, gain, n) in rows {
                        println!("{},{},{n}", fmt6(range), fmt6(gain));
                    }
                }
            }
        }
        Command::Netsim(args) => {
            let scenario = config.grid_scenario()?;
            let grid = build_grid(&scenario.spec, &scenario.budget)?;
            let ues = sample_ue_points(&grid, &scenario.budget);
            let results = compute_map_on(&grid, &ues, &scenario, seed(&config))?;
            let report = percentile_report(&results, &args.percentiles)?;
            std::fs::create_dir_all(&args.out)?;
            write_map(args.out.join("map.csv"), &grid, &results)?;
            write_percentiles(args.out.join("percentiles.csv"), &report)?;
            eprintln!(
                "{} cells, {} UE points, site density {} per km^2",
                grid.cells.len(),
                results.len(),
                fmt6(grid.site_density_per_km2)
            );
            for row in &report {
                println!(
                    "p{}: snr {} dB, sinr {} dB, rate {} Mbps, gap {} dB",
                    row.percentile,
                    fmt6(row.snr_db),
                    fmt6(row.sinr_db),
                    fmt6(row.rate_bps / 1e6),
                    fmt6(row.snr_sinr_gap_db)
                );
            }
        }
    }
    Ok(())
}

fn report_manifest(manifest: &canyoncov::io::DatasetManifest) {
    if !manifest.rejected.is_empty() {
        for (line, reason) in &manifest.rejected {
            eprintln!("rejected row {line}: {reason}");
        }
    }
    eprintln!(
        "loaded {} of {} rows from {}",
        manifest.accepted, manifest.total_rows, manifest.path
    );
}

fn emit_fit(out: &Path, fit: &canyoncov::fit::FitResult) -> anyhow::Result<()> {
    std::fs::create_dir_all(out)?;
    write_fit_report(out.join("fit_params.csv"), fit)?;
    write_residuals(out.join("residuals.csv"), &fit.residuals_db)?;
    for p in &fit.params {
        println!(
            "{} = {} (90% CI +/- {})",
            p.name,
            fmt6(p.value),
            fmt6(p.ci90_half)
        );
    }
    println!("rmse_db = {}", fmt6(fit.rmse_db));
    Ok(())
}
