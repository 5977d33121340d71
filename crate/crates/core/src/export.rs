//! CSV and JSON writers shared by the command-line tool.

use std::fmt::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::majorization::{PopulationVector, ThermoCurve};
use crate::markovian::MarkovCertificate;
use crate::mpemba::ScanRow;

fn json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Domain(format!("serialization failed: {e}")))
}

/// `x,y` rows of the normalized, simplified curve.
pub fn curve_csv(curve: &ThermoCurve) -> String {
    let c = curve.normalize().simplified();
    let mut out = String::from("x,y\n");
    for (x, y) in &c.vertices {
        writeln!(out, "{x:.12},{y:.12}").unwrap();
    }
    out
}

pub fn curve_json(curve: &ThermoCurve) -> Result<String> {
    json(&curve.normalize().simplified())
}

pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from("kind,n_pairs,local_T_C,bath_T_C,max_T_C,method\n");
    for row in rows {
        let r = &row.result;
        let bath = r.bath_temperature.to_celsius().unwrap_or(f64::NAN);
        writeln!(
            out,
            "{},{},{:.2},{:.2},{},{}",
            row.kind.short_name(),
            row.n_pairs,
            r.local_celsius(),
            bath,
            r.max_label(),
            r.method
        )
        .unwrap();
    }
    out
}

pub fn scan_json(rows: &[ScanRow]) -> Result<String> {
    json(rows)
}

pub fn certificate_json(cert: &MarkovCertificate) -> Result<String> {
    json(&cert.steps)
}

/// `t,level_0,...` rows, one per trajectory point.
pub fn trajectory_csv(times: &[f64], states: &[PopulationVector]) -> String {
    let d = states.first().map_or(0, PopulationVector::len);
    let mut out = String::from("t");
    for k in 0..d {
        write!(out, ",level_{k}").unwrap();
    }
    out.push('\n');
    for (t, p) in times.iter().zip(states) {
        write!(out, "{t:.6}").unwrap();
        for x in p.populations() {
            write!(out, ",{x:.12}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    json(value)
}
