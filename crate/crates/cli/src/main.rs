//! `rotorcage` command-line interface.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rotorcage::pipeline::commands::{self, output_dir};
use rotorcage::pipeline::{run_pipeline, OutputFormat, PipelineConfig, PipelineError};
use rotorcage::specfit::GaussianPeak;

#[derive(Debug, Parser)]
#[command(name = "rotorcage", version, about = "Translational-rotational states of H₂ in a molecular crystal site")]
struct Cli {
    /// Pipeline configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config and ROTORCAGE_OUT.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format for `pipeline`.
    #[arg(long, global = true, value_parser = parse_format)]
    format: Option<OutputFormat>,
    /// Seed of the eigensolver start block.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit the radial parabola and angular Fourier series.
    FitPotential,
    /// Spherical-tensor decomposition and conversion channels.
    Decompose,
    /// Lowest eigenpairs of the assembled Hamiltonian.
    Solve,
    /// Quantum-number labels and reduced densities.
    Assign,
    /// Q₁ peaks and conversion pathways.
    Transitions,
    /// Multi-Gaussian fit of one spectrum.
    FitSpectrum {
        /// Spectrum CSV (`wavenumber_cm1,absorbance`).
        #[arg(long)]
        spectrum: PathBuf,
        #[command(flatten)]
        peaks: PeakArgs,
    },
    /// Peak areas of a time series and their first-order kinetics.
    Kinetics {
        /// Directory of `t_<minutes>min.csv` files or a manifest JSON.
        #[arg(long)]
        series: PathBuf,
        #[command(flatten)]
        peaks: PeakArgs,
    },
    /// Every stage from potential samples to the report.
    Pipeline,
}

#[derive(Debug, Args)]
struct PeakArgs {
    /// Initial peak as `center,sigma,area`; repeat for more peaks.
    #[arg(long = "peak", value_parser = parse_peak)]
    guesses: Vec<GaussianPeak>,
    /// Number of peaks to pick automatically when no guesses are given.
    #[arg(long, default_value_t = 0)]
    n_peaks: usize,
    /// Fit window as `lo,hi` in cm⁻¹; the full range when absent.
    #[arg(long, value_parser = parse_window)]
    window: Option<(f64, f64)>,
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse()
}

fn floats(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"))).collect::<Result<_, _>>()?;
    if v.len() != n {
        return Err(format!("expected {n} comma-separated numbers, got {}", v.len()));
    }
    Ok(v)
}

fn parse_peak(s: &str) -> Result<GaussianPeak, String> {
    let v = floats(s, 3)?;
    Ok(GaussianPeak::new(v[0], v[1], v[2]))
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let v = floats(s, 2)?;
    Ok((v[0], v[1]))
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, PipelineError> {
    let path = cli.config.as_ref().ok_or_else(|| PipelineError::Config("--config is required for this subcommand".into()))?;
    let mut cfg = PipelineConfig::load(path)?;
    if let Some(out) = &cli.out {
        cfg.output.directory = out.clone();
    }
    if let Some(format) = cli.format {
        cfg.output.formats = vec![format];
    }
    if let Some(seed) = cli.seed {
        cfg.solver.seed = seed;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), PipelineError> {
    match &cli.command {
        Command::FitSpectrum { spectrum, peaks } => {
            let out = output_dir(cli.out.clone(), None);
            let fit = commands::fit_spectrum(spectrum, &peaks.guesses, peaks.n_peaks, peaks.window, &out)?;
            for (i, p) in fit.peaks.iter().enumerate() {
                println!("peak {}: center {:.4} ± {:.4}, FWHM {:.4}, area {:.5} ± {:.5}", i + 1, p.center, p.center_err, p.fwhm, p.area, p.area_err);
            }
            println!("rms {:.3e}, converged {}", fit.rms, fit.converged);
            Ok(())
        }
        Command::Kinetics { series, peaks } => {
            let out = output_dir(cli.out.clone(), None);
            let k = commands::kinetics(series, &peaks.guesses, peaks.n_peaks, peaks.window, &out)?;
            for (i, fit) in k.kinetics.iter().enumerate() {
                println!(
                    "peak {}: k = {:.5} min⁻¹, a0 = {:.5}, a_inf = {:.5}{}",
                    i + 1,
                    fit.rate_k,
                    fit.a0,
                    fit.a_inf,
                    if fit.degenerate { " (no decay detected)" } else { "" }
                );
            }
            Ok(())
        }
        command => {
            let cfg = load_config(cli)?;
            cfg.validate()?;
            let out = cfg.output.directory.clone();
            match command {
                Command::FitPotential => {
                    let p = commands::fit_potential(&cfg, &out)?;
                    println!("radial k = {:.4} cm⁻¹/Å² (rms {:.3e}); angular order {} (rms {:.3e})", p.radial.k, p.radial.rms, p.angular.order, p.angular.rms);
                }
                Command::Decompose => {
                    let d = commands::decompose(&cfg, &out)?;
                    println!("rank powers {:?}; Δm=0 open: {}; |Δm|=1 open: {}", d.decomposition.rank_powers(), d.channels.delta_m0, d.channels.delta_m1);
                }
                Command::Solve => {
                    let s = commands::solve(&cfg, &out)?;
                    for (e, r) in s.pairs.values.iter().zip(&s.pairs.residuals) {
                        println!("{e:12.4}  {r:.2e}");
                    }
                }
                Command::Assign => {
                    let a = commands::assign(&out)?;
                    for s in &a.states {
                        println!("{:12.4}  n={} l={} λ={} m={:<5} {}  purity {:.3}", s.energy, s.n, s.l, s.lambda, s.m.to_string(), s.spin, s.purity);
                    }
                    for w in &a.warnings {
                        log::warn!("{w}");
                    }
                }
                Command::Transitions => {
                    let t = commands::transitions(&cfg, &out)?;
                    for p in &t.spectrum.peaks {
                        println!("{:8} {:10.3} {:11} Δm={:+} ×{}", p.label, p.position, p.class.to_string(), p.delta_m, p.degeneracy);
                    }
                }
                Command::Pipeline => {
                    let report = run_pipeline(&cfg)?;
                    let n = report.states.data().map_or(0, Vec::len);
                    let peaks = report.spectrum.data().map_or(0, |s| s.peaks.len());
                    println!("{n} states, {peaks} peaks; report written to {}", out.display());
                    for w in &report.diagnostics.warnings {
                        log::warn!("{w}");
                    }
                }
                Command::FitSpectrum { .. } | Command::Kinetics { .. } => unreachable!(),
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).format_timestamp(None).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
