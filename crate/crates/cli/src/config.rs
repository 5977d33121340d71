//! Run configuration: defaults, an optional `key=value` file, then flags.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;

use mpemba_core::{Layout, Method, QubitLevels, RegisterKind, Strength, Temperature};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => bail!("unknown format '{s}' (expected csv or json)"),
        }
    }
}

/// Flags shared by every subcommand. All optional so that a config file can
/// fill them in.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Config file with key=value lines (flags take precedence)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Ground-state energy of each qubit, eV
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub eg: Option<f64>,
    /// Excited-state energy of each qubit, eV
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub ee: Option<f64>,
    /// Local temperature of the register, °C
    #[arg(long = "local-c", global = true, allow_hyphen_values = true)]
    pub local_c: Option<f64>,
    /// Bath temperature, °C
    #[arg(long = "bath-c", global = true, allow_hyphen_values = true)]
    pub bath_c: Option<f64>,
    /// Correlation kind: p, cc, qce, qcd, multi-cc, mixed
    #[arg(long, global = true)]
    pub corr: Option<String>,
    /// Coherence strength: a number or `max`
    #[arg(long, global = true)]
    pub strength: Option<String>,
    /// Number of qubit pairs
    #[arg(long, global = true)]
    pub pairs: Option<usize>,
    /// Register layout for n > 1: scaling or dimensionality
    #[arg(long, global = true)]
    pub layout: Option<String>,
    /// Dynamics: to (thermal operations) or markov
    #[arg(long, global = true)]
    pub method: Option<String>,
    /// Output file (stdout when absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format: csv or json
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Target product temperature for `trajectory`, °C
    #[arg(long = "target-c", global = true, allow_hyphen_values = true)]
    pub target_c: Option<f64>,
    /// Relaxation time of each reset channel for `trajectory`
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    /// Samples per trajectory leg
    #[arg(long, global = true)]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub qubit: QubitLevels,
    pub local_c: f64,
    pub bath_c: f64,
    pub kind: RegisterKind,
    pub strength: Strength,
    pub pairs: usize,
    pub pairs_given: bool,
    pub kind_given: bool,
    pub layout: Layout,
    pub method: Method,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub target_c: Option<f64>,
    pub tau: f64,
    pub samples: usize,
}

impl RunConfig {
    pub fn local(&self) -> Temperature {
        Temperature::celsius(self.local_c)
    }

    pub fn bath(&self) -> Temperature {
        Temperature::celsius(self.bath_c)
    }

    pub fn local_beta(&self) -> Result<f64> {
        Ok(self.local().to_beta()?)
    }

    pub fn bath_beta(&self) -> Result<f64> {
        Ok(self.bath().to_beta()?)
    }

    pub fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    /// Fails unless the bath is strictly colder than the register.
    pub fn require_hot(&self) -> Result<()> {
        if !(self.bath_c < self.local_c) {
            bail!(
                "bath temperature ({} °C) must be below the local temperature ({} °C)",
                self.bath_c,
                self.local_c
            );
        }
        Ok(())
    }
}

fn read_file(path: &Path) -> Result<HashMap<String, String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut out = HashMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("{}:{}: expected key=value", path.display(), n + 1);
        };
        out.insert(k.trim().replace('_', "-").to_ascii_lowercase(), v.trim().to_string());
    }
    Ok(out)
}

const KEYS: &[&str] = &[
    "eg", "ee", "local-c", "bath-c", "corr", "strength", "pairs", "layout", "method", "out", "format", "target-c",
    "tau", "samples",
];

impl RunArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(p) => read_file(p)?,
            None => HashMap::new(),
        };
        if let Some(k) = file.keys().find(|k| !KEYS.contains(&k.as_str())) {
            bail!("unknown config key '{k}'");
        }
        let text = |flag: &Option<String>, key: &str| flag.clone().or_else(|| file.get(key).cloned());
        fn parse<T: std::str::FromStr>(flag: Option<T>, file: Option<&String>, key: &str) -> Result<Option<T>>
        where
            T::Err: std::fmt::Display,
        {
            match (flag, file) {
                (Some(v), _) => Ok(Some(v)),
                (None, Some(s)) => s
                    .parse()
                    .map(Some)
                    .map_err(|e| anyhow::anyhow!("config key {key}: cannot parse '{s}': {e}")),
                (None, None) => Ok(None),
            }
        }
        let eg = parse(self.eg, file.get("eg"), "eg")?.unwrap_or(0.0);
        let ee = parse(self.ee, file.get("ee"), "ee")?.unwrap_or(0.05);
        let qubit = QubitLevels::new(eg, ee)?;
        let corr = text(&self.corr, "corr");
        let pairs = parse(self.pairs, file.get("pairs"), "pairs")?;
        let kind = match &corr {
            Some(s) => s.parse::<RegisterKind>()?,
            None => RegisterKind::Classical,
        };
        let strength = match text(&self.strength, "strength") {
            Some(s) => s.parse::<Strength>()?,
            None => Strength::Max,
        };
        let layout = match text(&self.layout, "layout") {
            Some(s) => s.parse::<Layout>()?,
            None => Layout::Scaling,
        };
        let method = match text(&self.method, "method") {
            Some(s) => s.parse::<Method>()?,
            None => Method::NonMarkovian,
        };
        let format = text(&self.format, "format").map(|s| s.parse::<Format>()).transpose()?;
        let tau = parse(self.tau, file.get("tau"), "tau")?.unwrap_or(1.0);
        if !(tau > 0.0 && tau.is_finite()) {
            bail!("tau must be positive, got {tau}");
        }
        let samples = parse(self.samples, file.get("samples"), "samples")?.unwrap_or(10);
        if samples == 0 {
            bail!("samples must be at least 1");
        }
        Ok(RunConfig {
            qubit,
            local_c: parse(self.local_c, file.get("local-c"), "local-c")?.unwrap_or(60.0),
            bath_c: parse(self.bath_c, file.get("bath-c"), "bath-c")?.unwrap_or(0.0),
            kind,
            strength,
            pairs: pairs.unwrap_or(1),
            pairs_given: pairs.is_some(),
            kind_given: corr.is_some(),
            layout,
            method,
            out: self.out.clone().or_else(|| file.get("out").map(PathBuf::from)),
            format,
            target_c: parse(self.target_c, file.get("target-c"), "target-c")?,
            tau,
            samples,
        })
    }
}
