mod config;

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use mpemba_core::export;
use mpemba_core::markovian::{continuously_thermo_majorizes, max_product_temperature_markovian_register, MarkovConfig};
use mpemba_core::mpemba::{
    free_energy, max_product_temperature_register, product_populations, scan, validate_register_result, ScanConfig,
};
use mpemba_core::{
    build_curve, mode_report, relax_trajectory, Layout, Leg, Method, MpembaResult, PopulationVector, Register,
    RegisterKind, ThermoCurve,
};

use config::{Format, RunArgs, RunConfig};

/// Reset-channel legs with λ = 1 are run for this many relaxation times.
const FULL_RESET_TAUS: f64 = 30.0;
const DEFAULT_SCAN_PAIRS: usize = 4;

#[derive(Parser)]
#[command(name = "mpemba", version, about = "Thermo-majorization analysis of the Mpemba effect in correlated qubit registers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Normalized thermo-majorization curve of the state and its reference product states
    Curve,
    /// Hottest product temperature the state can be turned into
    MpembaMax,
    /// Maximum temperature for every correlation kind and n = 1..pairs
    Scan {
        /// scaling or dimensionality
        mode: String,
    },
    /// Coherence order of every matrix element
    Modes,
    /// Markovian relaxation towards a hotter product state
    Trajectory,
    /// Nonequilibrium free energy of the state, its local product state and the bath Gibbs state
    FreeEnergy,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = cli.run.resolve()?;
    match cli.command {
        Command::Curve => cmd_curve(&cfg),
        Command::MpembaMax => cmd_mpemba_max(&cfg),
        Command::Scan { mode } => cmd_scan(&cfg, mode.parse()?),
        Command::Modes => cmd_modes(&cfg),
        Command::Trajectory => cmd_trajectory(&cfg),
        Command::FreeEnergy => cmd_free_energy(&cfg),
    }
}

fn register(cfg: &RunConfig) -> Result<Register> {
    Ok(Register::build(cfg.qubit, cfg.local_beta()?, cfg.kind, cfg.strength, cfg.pairs, cfg.layout)?)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Writes to `--out` when given, otherwise to stdout.
fn emit(cfg: &RunConfig, text: &str) -> Result<()> {
    match &cfg.out {
        Some(p) => write_text(p, text),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn sibling(path: &Path, suffix: &str) -> std::path::PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("curve");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}.{suffix}.{ext}"))
}

fn product_curve(cfg: &RunConfig, n_qubits: usize, celsius: f64) -> Result<ThermoCurve> {
    let bath_beta = cfg.bath_beta()?;
    let beta = mpemba_core::Temperature::celsius(celsius).to_beta()?.min(bath_beta);
    Ok(build_curve(&product_populations(cfg.qubit, n_qubits, beta, bath_beta)?, true))
}

fn cmd_curve(cfg: &RunConfig) -> Result<()> {
    if cfg.bath_c > cfg.local_c {
        bail!("bath temperature ({} °C) must not exceed the local temperature ({} °C)", cfg.bath_c, cfg.local_c);
    }
    let reg = register(cfg)?;
    let bath_beta = cfg.bath_beta()?;
    let state = build_curve(&reg.zero_mode_populations(bath_beta)?, true);
    let n = reg.n_qubits();
    let mut refs = vec![("product_local", cfg.local_c, product_curve(cfg, n, cfg.local_c)?)];
    if cfg.bath_c < cfg.local_c {
        let max = max_product_temperature_register(&reg, cfg.bath())?;
        if max.is_mpemba() {
            let c = max.max_celsius();
            refs.push(("product_max", c, product_curve(cfg, n, c)?));
        }
    }
    match cfg.format_or(Format::Csv) {
        Format::Csv => {
            emit(cfg, &export::curve_csv(&state))?;
            if let Some(out) = &cfg.out {
                for (name, _, curve) in &refs {
                    write_text(&sibling(out, name), &export::curve_csv(curve))?;
                }
            }
        }
        Format::Json => {
            let mut doc = json!({ "state": state.simplified() });
            for (name, c, curve) in refs {
                doc[name] = json!({ "temperature_C": c, "curve": curve.simplified() });
            }
            emit(cfg, &format!("{}\n", export::to_json(&doc)?))?;
        }
    }
    Ok(())
}

fn max_temperature(cfg: &RunConfig, reg: &Register) -> Result<MpembaResult> {
    Ok(match cfg.method {
        Method::NonMarkovian => max_product_temperature_register(reg, cfg.bath())?,
        Method::Markovian => max_product_temperature_markovian_register(reg, cfg.bath(), &MarkovConfig::default())?,
    })
}

fn cmd_mpemba_max(cfg: &RunConfig) -> Result<()> {
    cfg.require_hot()?;
    let reg = register(cfg)?;
    let result = max_temperature(cfg, &reg)?;
    if !validate_register_result(&reg, &result)? {
        bail!("result at {:.4} °C failed re-validation", result.max_celsius());
    }
    if let Some(d) = &result.diagnostic {
        eprintln!("note: {d}");
    }
    if let Some(out) = &cfg.out {
        let text = match cfg.format_or(Format::Json) {
            Format::Json => format!("{}\n", export::to_json(&result)?),
            Format::Csv => export::scan_csv(&[mpemba_core::ScanRow {
                kind: cfg.kind,
                n_pairs: cfg.pairs,
                layout: cfg.layout,
                result: result.clone(),
            }]),
        };
        write_text(out, &text)?;
    }
    println!("max_T_C={}", result.max_label());
    Ok(())
}

fn cmd_scan(cfg: &RunConfig, layout: Layout) -> Result<()> {
    cfg.require_hot()?;
    let kinds = if cfg.kind_given { vec![cfg.kind] } else { RegisterKind::ALL.to_vec() };
    let scan_cfg = ScanConfig {
        qubit: cfg.qubit,
        local: cfg.local(),
        bath: cfg.bath(),
        strength: cfg.strength,
        kinds,
        max_pairs: if cfg.pairs_given { cfg.pairs } else { DEFAULT_SCAN_PAIRS },
        method: cfg.method,
    };
    let rows = scan(layout, &scan_cfg)?;
    for row in &rows {
        let reg = Register::build(cfg.qubit, cfg.local_beta()?, row.kind, cfg.strength, row.n_pairs, layout)?;
        if !validate_register_result(&reg, &row.result)? {
            bail!("{} n={} failed re-validation", row.kind, row.n_pairs);
        }
    }
    let text = match cfg.format_or(Format::Csv) {
        Format::Csv => export::scan_csv(&rows),
        Format::Json => format!("{}\n", export::scan_json(&rows)?),
    };
    emit(cfg, &text)
}

fn cmd_modes(cfg: &RunConfig) -> Result<()> {
    let state = register(cfg)?.to_density_matrix()?;
    let report = mode_report(&state);
    let text = match cfg.format_or(Format::Json) {
        Format::Json => format!("{}\n", export::to_json(&report)?),
        Format::Csv => {
            let mut s = String::from("row,col,omega_eV,order\n");
            for e in &report {
                s.push_str(&format!("{},{},{:.12},{}\n", e.row, e.col, e.omega_ev, e.order));
            }
            s
        }
    };
    emit(cfg, &text)
}

fn cmd_trajectory(cfg: &RunConfig) -> Result<()> {
    cfg.require_hot()?;
    let reg = register(cfg)?;
    let bath_beta = cfg.bath_beta()?;
    let p = reg.diagonal_populations(bath_beta)?;
    let target_c = match cfg.target_c {
        Some(c) => c,
        None => {
            let r = max_product_temperature_markovian_register(&reg, cfg.bath(), &MarkovConfig::default())?;
            r.max_celsius()
        }
    };
    let beta = mpemba_core::Temperature::celsius(target_c).to_beta()?.min(bath_beta);
    let q = product_populations(cfg.qubit, reg.n_qubits(), beta, bath_beta)?;
    let decision = continuously_thermo_majorizes(&p, &q)?;
    let Some(cert) = decision.certificate else {
        bail!("product state at {target_c:.2} °C is not reachable by Markovian relaxation");
    };

    let mut legs = Vec::new();
    for s in &cert.steps {
        let duration = if s.lambda >= 1.0 { FULL_RESET_TAUS * cfg.tau } else { -cfg.tau * (-s.lambda).ln_1p() };
        let piece = duration / cfg.samples as f64;
        legs.extend((0..cfg.samples).map(|_| Leg { i: s.i, j: s.j, duration: piece, tau: cfg.tau }));
    }
    let states: Vec<PopulationVector> = relax_trajectory(&p, &legs)?;
    let mut times = vec![0.0];
    for leg in &legs {
        times.push(times.last().unwrap() + leg.duration);
    }
    let text = match cfg.format_or(Format::Csv) {
        Format::Csv => export::trajectory_csv(&times, &states),
        Format::Json => {
            let points: Vec<_> =
                times.iter().zip(&states).map(|(t, s)| json!({ "t": t, "populations": s.populations() })).collect();
            let doc = json!({ "target_C": target_c, "certificate": cert.steps, "trajectory": points });
            format!("{}\n", export::to_json(&doc)?)
        }
    };
    emit(cfg, &text)
}

fn cmd_free_energy(cfg: &RunConfig) -> Result<()> {
    let reg = register(cfg)?;
    let bath_beta = cfg.bath_beta()?;
    let state = reg.to_density_matrix()?;
    let product = Register::build(cfg.qubit, cfg.local_beta()?, RegisterKind::Product, cfg.strength, cfg.pairs, cfg.layout)?
        .to_density_matrix()?;
    let gibbs = Register::build(cfg.qubit, bath_beta, RegisterKind::Product, cfg.strength, cfg.pairs, cfg.layout)?
        .to_density_matrix()?;
    let values = [
        ("state_F_eV", free_energy(&state, bath_beta)?),
        ("product_F_eV", free_energy(&product, bath_beta)?),
        ("gibbs_F_eV", free_energy(&gibbs, bath_beta)?),
    ];
    let text = match cfg.format_or(Format::Csv) {
        Format::Csv => values.iter().map(|(k, v)| format!("{k}={v:.12}\n")).collect(),
        Format::Json => {
            let doc: serde_json::Map<_, _> = values.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
            format!("{}\n", export::to_json(&doc)?)
        }
    };
    emit(cfg, &text)
}
