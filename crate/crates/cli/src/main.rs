//! Command-line front end: run analytic oscillation scans, simulate the
//! ion register, compare results against theory, and inspect spectra.
//!
//! Exit codes: 0 success, 1 tolerance failure in `compare`, 2 usage or
//! configuration error, 3 numerical invariant violation during a run.

mod config;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use config::{parse_flavor, ConfigFile, MatrixFile};
use ionosc::scenario::{
    self, compare_to_theory, flavor_name, ComparisonMetrics, OscillationRecord,
};
use ionosc::theory::{probability_exact, probability_ultra, MassSpectrum, MixingMatrix};
use report::{fmt_float, parse_csv, record_to_csv, MetricsOut, Sidecar};

#[derive(Parser)]
#[command(
    name = "ionosc",
    about = "Flavor oscillations of Dirac particles on trapped-ion qubit registers",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic flavor-transition probabilities on a time grid (CSV).
    Theory(TheoryArgs),
    /// Run a register simulation described by a JSON experiment file.
    Simulate(SimulateArgs),
    /// Compare a simulation CSV against the analytic model.
    Compare(CompareArgs),
    /// Print the per-block eigenvalues of a configured Hamiltonian.
    Spectrum(SpectrumArgs),
}

#[derive(Args)]
struct TheoryArgs {
    /// Mixing: `tribimaximal`, `rotation2:<theta>` or `file:<path>`.
    #[arg(long, default_value = "tribimaximal")]
    mixing: String,
    /// Rest masses in kHz, comma separated (2 or 3 values).
    #[arg(long, value_delimiter = ',', required = true)]
    masses: Vec<f64>,
    /// Kinetic scale c|p| in kHz.
    #[arg(long)]
    cp: f64,
    /// Starting flavor: e, mu or tau.
    #[arg(long, default_value = "e")]
    alpha: String,
    /// Last time in ms.
    #[arg(long, default_value_t = 10.0)]
    tmax: f64,
    /// Time step in ms.
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    /// "exact" relativistic energies or the "ultra" Δm²/2E approximation.
    #[arg(long, default_value = "exact")]
    mode: String,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON experiment file.
    config: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Results CSV produced by `simulate`.
    record: PathBuf,
    /// The experiment file the record was produced from.
    #[arg(long)]
    config: PathBuf,
    /// Acceptance threshold on the max absolute deviation.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Compare the record against itself instead of the analytic model
    /// (pipeline check; all metrics must be zero).
    #[arg(long)]
    self_check: bool,
}

#[derive(Args)]
struct SpectrumArgs {
    /// JSON experiment file.
    config: PathBuf,
    /// Momentum override (defaults to the configured packet center).
    #[arg(long)]
    p: Option<f64>,
}

enum Failure {
    /// Usage, schema or dimension problems: exit 2.
    Usage(anyhow::Error),
    /// `compare` exceeded its tolerance: exit 1.
    Tolerance,
    /// A numerical invariant broke during a run: exit 3.
    Numerical(String),
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Theory(args) => cmd_theory(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Compare(args) => cmd_compare(&args),
        Command::Spectrum(args) => cmd_spectrum(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Tolerance) => ExitCode::from(1),
        Err(Failure::Usage(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical invariant violated: {msg}");
            ExitCode::from(3)
        }
    }
}

/// IONOSC_THREADS caps sector-level parallelism; 0 or unset lets rayon
/// pick. Results are bitwise identical either way.
fn configure_threads() {
    if let Ok(value) = std::env::var("IONOSC_THREADS") {
        if let Ok(n) = value.trim().parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

fn usage(err: anyhow::Error) -> Failure {
    Failure::Usage(err)
}

fn parse_mixing(spec: &str, generations: usize) -> Result<MixingMatrix> {
    if spec == "tribimaximal" {
        if generations != 3 {
            bail!("tribimaximal mixing needs 3 masses");
        }
        return Ok(MixingMatrix::tribimaximal());
    }
    if let Some(theta) = spec.strip_prefix("rotation2:") {
        if generations != 2 {
            bail!("rotation2 mixing needs 2 masses");
        }
        let theta: f64 = theta.parse().context("bad rotation angle")?;
        return Ok(MixingMatrix::rotation2(theta));
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        let matrix: MatrixFile = serde_json::from_str(&text).context("parsing mixing file")?;
        let mixing = matrix.build()?;
        if mixing.dim() != generations {
            bail!(
                "mixing file is {}x{0} but {generations} masses were given",
                mixing.dim()
            );
        }
        return Ok(mixing);
    }
    bail!("unknown mixing {spec:?}; use tribimaximal, rotation2:<theta> or file:<path>")
}

fn cmd_theory(args: &TheoryArgs) -> std::result::Result<(), Failure> {
    let generations = args.masses.len();
    if !(generations == 2 || generations == 3) {
        return Err(usage(anyhow!("give 2 or 3 masses, got {generations}")));
    }
    let mixing = parse_mixing(&args.mixing, generations).map_err(usage)?;
    let alpha = parse_flavor(&args.alpha, generations).map_err(usage)?;
    if args.dt <= 0.0 || args.tmax < 0.0 {
        return Err(usage(anyhow!("need dt > 0 and tmax >= 0")));
    }
    let masses = MassSpectrum::new(args.masses.clone());
    let dm2 = masses.delta_m2_from_first();

    let steps = (args.tmax / args.dt).round() as usize;
    let mut out = String::new();
    let mut header = vec!["t_ms".to_string()];
    for beta in 0..generations {
        header.push(format!("P_{}", flavor_name(generations, beta)));
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for i in 0..=steps {
        let t = i as f64 * args.dt;
        let mut cols = vec![fmt_float(t)];
        for beta in 0..generations {
            let p = match args.mode.as_str() {
                "exact" => probability_exact(&mixing, &masses, args.cp, alpha, beta, t),
                "ultra" => probability_ultra(&mixing, &dm2, args.cp, alpha, beta, t),
                other => return Err(usage(anyhow!("unknown mode {other:?}"))),
            }
            .map_err(|e| usage(e.into()))?;
            cols.push(fmt_float(p));
        }
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    write_text(args.out.as_deref(), &out).map_err(usage)
}

fn load_config(path: &Path) -> Result<(ConfigFile, ionosc::scenario::ExperimentConfig)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: ConfigFile =
        serde_json::from_str(&text).context("experiment file rejected by the schema")?;
    let experiment = file.to_experiment()?;
    Ok((file, experiment))
}

const NORM_DRIFT_LIMIT: f64 = 1e-8;

fn cmd_simulate(args: &SimulateArgs) -> std::result::Result<(), Failure> {
    let (file, experiment) = load_config(&args.config).map_err(usage)?;
    let record = scenario::run(&experiment).map_err(|e| usage(e.into()))?;

    let drift = record.max_norm_drift();
    if drift > NORM_DRIFT_LIMIT {
        return Err(Failure::Numerical(format!("norm drift {drift:.3e}")));
    }
    let budget = record.max_budget_violation();
    if budget > NORM_DRIFT_LIMIT {
        return Err(Failure::Numerical(format!(
            "probability budget violation {budget:.3e}"
        )));
    }

    let csv = record_to_csv(&record);
    let sidecar = Sidecar {
        config: &file,
        diagnostics: report::SidecarDiagnostics {
            generations: record.generations(),
            masses: record.diagnostics.masses.clone(),
            drives: record.diagnostics.drives.into(),
            constant_shift: record.diagnostics.constant_shift,
            n_cut_used: record.diagnostics.n_cut_used,
            grid_points: record.diagnostics.grid_points,
            rows: record.times.len(),
        },
    };
    let sidecar_text =
        serde_json::to_string_pretty(&sidecar).expect("sidecar serialization cannot fail");

    let output = file.output.clone().unwrap_or(config::OutputFile {
        csv: None,
        sidecar: None,
    });
    match &output.csv {
        Some(path) => {
            fs::write(path, &csv)
                .with_context(|| format!("writing {path}"))
                .map_err(usage)?;
            let sidecar_path = output
                .sidecar
                .clone()
                .unwrap_or_else(|| format!("{path}.meta.json"));
            fs::write(&sidecar_path, sidecar_text)
                .with_context(|| format!("writing {sidecar_path}"))
                .map_err(usage)?;
        }
        None => {
            print!("{csv}");
            if let Some(path) = &output.sidecar {
                fs::write(path, sidecar_text)
                    .with_context(|| format!("writing {path}"))
                    .map_err(usage)?;
            }
        }
    }
    Ok(())
}

fn cmd_compare(args: &CompareArgs) -> std::result::Result<(), Failure> {
    let (_, experiment) = load_config(&args.config).map_err(usage)?;
    let text = fs::read_to_string(&args.record)
        .with_context(|| format!("reading {}", args.record.display()))
        .map_err(usage)?;
    let parsed = parse_csv(&text).map_err(usage)?;

    let resolved = scenario::resolve(&experiment).map_err(|e| usage(e.into()))?;
    if parsed.generations != resolved.encoding.generations() {
        return Err(usage(anyhow!(
            "record has {} flavors but the experiment file has {}",
            parsed.generations,
            resolved.encoding.generations()
        )));
    }

    let metrics = if args.self_check {
        let zeros = vec![0.0; parsed.generations];
        ComparisonMetrics {
            per_flavor_max: zeros.clone(),
            per_flavor_rms: zeros,
            max_abs_dev: 0.0,
            rms_dev: 0.0,
        }
    } else {
        let mut experiment = experiment.clone();
        experiment.times = parsed.times.clone();
        let record = OscillationRecord {
            times: parsed.times.clone(),
            probabilities: parsed.probabilities.clone(),
            leakage: parsed.leakage.clone(),
            norm: parsed.norm.clone(),
            negative: None,
            diagnostics: ionosc::scenario::RunDiagnostics {
                masses: resolved.masses.as_slice().to_vec(),
                drives: resolved.drives,
                constant_shift: resolved.pair.constant_shift,
                n_cut_used: None,
                grid_points: None,
            },
            config: experiment.clone(),
        };
        compare_to_theory(&record, &experiment).map_err(|e| usage(e.into()))?
    };

    let out = MetricsOut::new(&metrics, parsed.generations, args.tol);
    println!(
        "{}",
        serde_json::to_string_pretty(&out).expect("metrics serialization cannot fail")
    );
    if out.pass {
        Ok(())
    } else {
        Err(Failure::Tolerance)
    }
}

fn cmd_spectrum(args: &SpectrumArgs) -> std::result::Result<(), Failure> {
    let (_, experiment) = load_config(&args.config).map_err(usage)?;
    let resolved = scenario::resolve(&experiment).map_err(|e| usage(e.into()))?;
    let p = args.p.unwrap_or_else(|| experiment.momentum.center());

    println!(
        "c = {}, p = {p}, c*p = {} kHz, constant shift = {}",
        experiment.c,
        experiment.c * p,
        resolved.pair.constant_shift
    );
    for k in 0..resolved.encoding.generations() {
        let m = resolved.masses.get(k);
        let (lo, hi) =
            ionosc::encoding::block_eigenvalues(&resolved.pair, &resolved.encoding, k, p);
        let d = ionosc::theory::dispersion(experiment.c * p, m);
        println!(
            "block {}: m = {m} kHz, eigenvalues = ({lo}, {hi}), shift -/+ dispersion = ({}, {})",
            k + 1,
            resolved.pair.constant_shift - d,
            resolved.pair.constant_shift + d
        );
    }
    let leftover = resolved.encoding.leftover();
    if leftover.len() == 2 {
        let h = resolved.pair.h_at(p);
        let block = ionosc::linalg::CMatrix::from_fn(2, 2, |i, j| h[(leftover[i], leftover[j])]);
        let eig = block.symmetric_eigen();
        let mut vals: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        println!("leftover block: eigenvalues = ({}, {})", vals[0], vals[1]);
    }
    Ok(())
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
