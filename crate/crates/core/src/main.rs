use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use wirtflow::harness::pnm;
use wirtflow::harness::{
    fft_unit_calibration, generate_signal, ingest_image, regularity_sweep, run_image_recovery, run_success_sweep,
    ExperimentSpec, ExportFormat, MeasurementModel, RecoveryConfig, SignalModel,
};
use wirtflow::init::{spectral_init, SpectralConfig, DEFAULT_POWER_ITERATIONS};
use wirtflow::io;
use wirtflow::measurements::{pattern_moments, CdpEnsemble, GaussianEnsemble, PatternDistribution, PatternKind};
use wirtflow::prelude::*;
use wirtflow::solver::{IterateTrace, DEFAULT_SUCCESS_THRESHOLD};

const EXIT_USAGE: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_DIVERGED: u8 = 3;
const EXIT_NOT_ADMISSIBLE: u8 = 4;

#[derive(Parser)]
#[command(name = "wirtflow", version, about = "Phase retrieval by Wirtinger Flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Gaussian,
    Cdp,
}

#[derive(Clone, Copy, ValueEnum)]
enum Pattern {
    Octanary,
    Ternary,
}

impl From<Pattern> for PatternKind {
    fn from(p: Pattern) -> Self {
        match p {
            Pattern::Octanary => PatternKind::Octanary,
            Pattern::Ternary => PatternKind::Ternary,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Signal {
    Gaussian,
    Lowpass,
}

impl Signal {
    fn model(self, n: usize) -> SignalModel {
        match self {
            Signal::Gaussian => SignalModel::RandomGaussianComplex,
            Signal::Lowpass => SignalModel::lowpass_for(n),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Success rate against oversampling (Gaussian) or pattern count (CDP)
    Sweep {
        #[arg(long, value_enum, default_value = "gaussian")]
        model: Model,
        #[arg(long, value_enum, default_value = "octanary")]
        pattern: Pattern,
        #[arg(long, value_enum, default_value = "gaussian")]
        signal: Signal,
        #[arg(long, default_value_t = 128)]
        n: usize,
        /// Comma-separated m/n values (Gaussian model)
        #[arg(long, value_delimiter = ',', conflicts_with = "patterns")]
        ratios: Option<Vec<f64>>,
        /// Comma-separated pattern counts L (CDP model)
        #[arg(long, value_delimiter = ',')]
        patterns: Option<Vec<usize>>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2500)]
        iters: usize,
        #[arg(long, default_value_t = DEFAULT_POWER_ITERATIONS)]
        power_iters: usize,
        #[arg(long, default_value_t = 330.0)]
        tau0: f64,
        /// Defaults to 0.2 for Gaussian and 0.4 for CDP sweeps
        #[arg(long)]
        mu_max: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_SUCCESS_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Recover a PGM/PPM image from simulated coded diffraction patterns
    Recover {
        #[arg(long)]
        image: PathBuf,
        #[arg(long, default_value_t = 20)]
        patterns: usize,
        #[arg(long, value_enum, default_value = "octanary")]
        pattern_dist: Pattern,
        #[arg(long, default_value_t = 300)]
        iters: usize,
        #[arg(long, default_value_t = DEFAULT_POWER_ITERATIONS)]
        power_iters: usize,
        #[arg(long, default_value_t = 330.0)]
        tau0: f64,
        #[arg(long, default_value_t = 0.4)]
        mu_max: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_image: PathBuf,
        /// Iterate trace CSV; with several channels one file per channel
        /// is written, suffixed `.ch<k>`
        #[arg(long)]
        out_trace: Option<PathBuf>,
    },
    /// Write a random signal, its observations and (CDP) the codes
    MakeData {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "cdp")]
        model: Model,
        /// Number of Gaussian measurements (defaults to 6n)
        #[arg(long)]
        m: Option<usize>,
        /// Number of CDP patterns
        #[arg(long, default_value_t = 8)]
        patterns: usize,
        #[arg(long, value_enum, default_value = "octanary")]
        pattern: Pattern,
        #[arg(long, value_enum, default_value = "gaussian")]
        signal: Signal,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_signal: PathBuf,
        #[arg(long)]
        out_obs: PathBuf,
        #[arg(long)]
        out_codes: Option<PathBuf>,
    },
    /// Recover a signal from stored CDP codes and observations
    Solve {
        #[arg(long)]
        codes: PathBuf,
        #[arg(long)]
        obs: PathBuf,
        #[arg(long, default_value_t = 300)]
        iters: usize,
        #[arg(long, default_value_t = DEFAULT_POWER_ITERATIONS)]
        power_iters: usize,
        #[arg(long, default_value_t = 330.0)]
        tau0: f64,
        #[arg(long, default_value_t = 0.4)]
        mu_max: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Ground truth, used for the trace's relative error column
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        out_trace: Option<PathBuf>,
    },
    /// Moments of a modulation distribution; exits 0 iff admissible
    CheckMoments {
        #[arg(long, value_enum, conflicts_with = "atoms", required_unless_present = "atoms")]
        pattern: Option<Pattern>,
        /// Atom table "re,im,prob;re,im,prob;..."
        #[arg(long)]
        atoms: Option<String>,
    },
    /// Empirical pass rate of the regularity condition near the solution
    Diagnose {
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// Defaults to 20n
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 30.0)]
        alpha: f64,
        /// Defaults to 3n + 550
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seconds per length-n FFT (median)
    Calibrate {
        #[arg(long, default_value_t = 4096)]
        n: usize,
        #[arg(long, default_value_t = 1001)]
        reps: usize,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Format(_) | Error::Image(_) | Error::Serialization(_) => EXIT_IO,
        Error::Divergence { .. } => EXIT_DIVERGED,
        _ => EXIT_USAGE,
    }
}

fn schedule(tau0: f64, mu_max: f64) -> Schedule {
    Schedule::heuristic(tau0, mu_max)
}

fn channel_path(base: &Path, channel: usize, channels: usize) -> PathBuf {
    if channels == 1 {
        return base.to_path_buf();
    }
    let mut name = base.file_stem().unwrap_or_default().to_os_string();
    name.push(format!(".ch{channel}"));
    if let Some(ext) = base.extension() {
        name.push(".");
        name.push(ext);
    }
    base.with_file_name(name)
}

fn write_trace(path: &Path, trace: &IterateTrace) -> Result<()> {
    trace.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
}

fn json<T: serde::Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Serialization(e.to_string()))
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Sweep {
            model,
            pattern,
            signal,
            n,
            ratios,
            patterns,
            trials,
            seed,
            iters,
            power_iters,
            tau0,
            mu_max,
            threshold,
            out,
            format,
        } => {
            let (model, sweep, default_mu) = match model {
                Model::Gaussian => (MeasurementModel::Gaussian, ratios.unwrap_or_else(|| vec![3.0, 4.0, 5.0, 6.0]), 0.2),
                Model::Cdp => {
                    let ls = patterns.unwrap_or_else(|| vec![4, 6, 8]);
                    (MeasurementModel::Cdp { pattern: pattern.into() }, ls.into_iter().map(|l| l as f64).collect(), 0.4)
                }
            };
            let mut spec = ExperimentSpec::new(model, n, sweep, trials, seed);
            spec.signal = signal.model(n);
            spec.solver = SolverConfig::new(iters, schedule(tau0, mu_max.unwrap_or(default_mu)));
            spec.init = SpectralConfig::with_power_iterations(power_iters);
            spec.success_threshold = threshold;
            let curve = run_success_sweep(&spec)?;
            for p in &curve.points {
                println!(
                    "{:>8} {:>4}/{:<4} success {:.3}  diverged {}",
                    p.sweep_value, p.successes, p.trials, p.success_rate, p.diverged
                );
            }
            let format = match format {
                Format::Csv => ExportFormat::Csv,
                Format::Json => ExportFormat::Json,
            };
            curve.export(&out, format)?;
        }
        Command::Recover {
            image,
            patterns,
            pattern_dist,
            iters,
            power_iters,
            tau0,
            mu_max,
            seed,
            out_image,
            out_trace,
        } => {
            let problem = ingest_image(&image)?;
            let config = RecoveryConfig {
                patterns,
                pattern: pattern_dist.into(),
                power_iterations: power_iters,
                solver: SolverConfig::new(iters, schedule(tau0, mu_max)),
                ..Default::default()
            };
            let out = run_image_recovery(&problem, &config, &mut RandomSource::new(seed, 0))?;
            pnm::write_file(&out_image, &out.recovered.to_raster())?;
            let k = out.channels.len();
            for (c, ch) in out.channels.iter().enumerate() {
                println!("channel {c}: relative error {:.3e}, {} FFTs (predicted {})", ch.rel_error, ch.ffts, out.predicted_ffts);
                if let Some(base) = &out_trace {
                    write_trace(&channel_path(base, c, k), &ch.result.trace)?;
                }
            }
            if let Some(t) = out.timing {
                println!("wall clock {:.3} s, FFT unit {:.3e} s, cost {:.0} FFT units", t.seconds, t.fft_unit_seconds, t.fft_units);
            }
        }
        Command::MakeData { n, model, m, patterns, pattern, signal, seed, out_signal, out_obs, out_codes } => {
            let mut rng = RandomSource::new(seed, 0);
            let x = generate_signal(&signal.model(n), n, &mut rng)?;
            let y = match model {
                Model::Gaussian => {
                    if out_codes.is_some() {
                        return Err(Error::Precondition("--out-codes applies to the cdp model only".into()));
                    }
                    GaussianEnsemble::sample(n, m.unwrap_or(6 * n), &mut rng)?.observe(&x)?
                }
                Model::Cdp => {
                    let dist = PatternKind::from(pattern).distribution()?;
                    let ens = CdpEnsemble::sample(n, patterns, &dist, &mut rng)?;
                    if let Some(path) = &out_codes {
                        io::save_cdpe(path, &ens)?;
                    }
                    ens.observe(&x)?
                }
            };
            io::save_cvec(&out_signal, &x)?;
            io::save_yobs(&out_obs, &y)?;
            println!("n = {n}, m = {}", y.len());
        }
        Command::Solve { codes, obs, iters, power_iters, tau0, mu_max, seed, truth, out, out_trace } => {
            let ens = io::load_cdpe(&codes)?;
            let y = io::load_yobs(&obs)?;
            let truth = truth.map(io::load_cvec).transpose()?;
            let mut rng = RandomSource::new(seed, 0);
            let init = spectral_init(&ens, &y, &SpectralConfig::with_power_iterations(power_iters), &mut rng)?;
            if init.degenerate {
                io::save_cvec(&out, &init.z)?;
                println!("all observations are zero; wrote the zero signal");
                return Ok(0);
            }
            let result = solve(&ens, &y, &init.z, &SolverConfig::new(iters, schedule(tau0, mu_max)), truth.as_ref())?;
            io::save_cvec(&out, &result.z_final)?;
            if let Some(path) = &out_trace {
                write_trace(path, &result.trace)?;
            }
            if let Some(x) = &truth {
                println!("relative error {:.3e}", relative_error(&result.z_final, x)?);
            }
        }
        Command::CheckMoments { pattern, atoms } => {
            let dist = match (pattern, atoms) {
                (Some(p), _) => PatternKind::from(p).distribution()?,
                (None, Some(table)) => PatternDistribution::parse_atoms(&table)?,
                (None, None) => unreachable!("clap requires one of --pattern/--atoms"),
            };
            let report = pattern_moments(&dist);
            println!("{}", json(&report)?);
            if !report.admissible {
                return Ok(EXIT_NOT_ADMISSIBLE);
            }
        }
        Command::Diagnose { n, m, alpha, beta, samples, seed, out } => {
            let m = m.unwrap_or(20 * n);
            let beta = beta.unwrap_or(3.0 * n as f64 + 550.0);
            let summary = regularity_sweep(n, m, alpha, beta, samples, seed)?;
            let text = json(&summary)?;
            println!("{text}");
            if let Some(path) = out {
                std::fs::write(path, text + "\n")?;
            }
        }
        Command::Calibrate { n, reps } => {
            println!("{:e}", fft_unit_calibration(n, reps)?);
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
