//! CSV output for SEP curves and a companion matplotlib script.
//!
//! Layout: a block of `# key=value` metadata lines, then the fixed header
//! [`CSV_HEADER`], then one row per SNR point. Probabilities are written with
//! Rust's shortest round-trip float formatting, and an undefined conditional
//! probability is an empty field.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{DecoderKind, ExperimentError, PointCounts, SepCurve, SepPoint, SweepSpec};
use crate::numerics::Complex;

pub const CSV_HEADER: &str = "snr_db,sep_joint,sep_a,sep_b,p_relay_err,p_err_rc,p_err_rw,trials";

pub fn version_string() -> String {
    format!("pnc-marc v{}", env!("CARGO_PKG_VERSION"))
}

fn fmt_complex(z: Complex) -> String {
    format!("{},{}", z.re, z.im)
}

/// Ordered `(key, value)` pairs describing a run; no timestamps or host
/// details, so identical specs give identical metadata.
pub fn metadata(spec: &SweepSpec) -> Vec<(String, String)> {
    let k = &spec.constants;
    let db = spec.profile.to_db();
    let mut out = vec![
        ("version".to_string(), version_string()),
        ("decoder".to_string(), spec.decoder.name().to_string()),
        ("m".to_string(), spec.m.to_string()),
        ("map".to_string(), spec.map.name().to_string()),
        ("a".to_string(), fmt_complex(k.a())),
        ("b".to_string(), fmt_complex(k.b())),
        ("c".to_string(), fmt_complex(k.c())),
        ("d".to_string(), fmt_complex(k.d())),
        (
            "variances_db".to_string(),
            format!("ar={},br={},ad={},bd={},rd={}", db[0], db[1], db[2], db[3], db[4]),
        ),
        ("seed".to_string(), spec.seed.to_string()),
        ("trials_per_point".to_string(), spec.trials_per_point.to_string()),
        (
            "max_errors".to_string(),
            spec.max_errors.map_or("none".to_string(), |v| v.to_string()),
        ),
        ("log_weight".to_string(), spec.log_weight.to_string()),
        ("sep".to_string(), "joint pair error".to_string()),
    ];
    if spec.decoder == DecoderKind::Cfnc {
        out.push(("theta".to_string(), fmt_complex(spec.theta)));
        out.push((
            "cfnc_relay".to_string(),
            "unit-mean-energy x_A + theta x_B, no fade-dependent scaling".to_string(),
        ));
        out.push((
            "cfnc_sources".to_string(),
            "transmit in both phases with the PNC weights".to_string(),
        ));
        out.push((
            "cfnc_destination".to_string(),
            "joint minimum distance, relay assumed correct, relay gain known".to_string(),
        ));
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

pub fn curve_to_csv(curve: &SepCurve, meta: &[(String, String)]) -> String {
    let mut s = String::new();
    for (k, v) in meta {
        let _ = writeln!(s, "# {k}={v}");
    }
    let _ = writeln!(s, "{CSV_HEADER}");
    for p in &curve.points {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            p.snr_db,
            p.sep_joint(),
            p.sep_a(),
            p.sep_b(),
            p.p_relay_nc_error(),
            opt(p.p_err_given_relay_correct()),
            opt(p.p_err_given_relay_wrong()),
            p.counts.trials
        );
    }
    s
}

pub fn emit_csv(curve: &SepCurve, meta: &[(String, String)], path: &Path) -> Result<(), ExperimentError> {
    fs::write(path, curve_to_csv(curve, meta)).map_err(|source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn count_from(p: f64, den: u64) -> u64 {
    (p * den as f64).round() as u64
}

/// Parses CSV text produced by [`curve_to_csv`]; event counts are recovered
/// from the probabilities and trial counts.
pub fn parse_csv(text: &str) -> Result<SepCurve, ExperimentError> {
    let err = |msg: String| ExperimentError::Csv(msg);
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        Some(h) => return Err(err(format!("unexpected header '{h}'"))),
        None => return Err(err("missing header".into())),
    }
    let mut points = Vec::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(err(format!("row {}: expected 8 fields, got {}", i + 1, fields.len())));
        }
        let num = |j: usize| -> Result<f64, ExperimentError> {
            fields[j]
                .parse::<f64>()
                .map_err(|e| err(format!("row {} field {}: {e}", i + 1, j + 1)))
        };
        let maybe = |j: usize| -> Result<Option<f64>, ExperimentError> {
            if fields[j].is_empty() {
                Ok(None)
            } else {
                num(j).map(Some)
            }
        };
        let trials: u64 = fields[7]
            .parse()
            .map_err(|e| err(format!("row {} trials: {e}", i + 1)))?;
        let relay_nc_errors = count_from(num(4)?, trials);
        let errors_relay_correct = maybe(5)?.map_or(0, |p| count_from(p, trials - relay_nc_errors));
        let errors_relay_wrong = maybe(6)?.map_or(0, |p| count_from(p, relay_nc_errors));
        points.push(SepPoint {
            snr_db: num(0)?,
            counts: PointCounts {
                trials,
                joint_errors: count_from(num(1)?, trials),
                errors_a: count_from(num(2)?, trials),
                errors_b: count_from(num(3)?, trials),
                relay_nc_errors,
                errors_relay_correct,
                errors_relay_wrong,
                error_branch_decisions: 0,
            },
        });
    }
    Ok(SepCurve { points })
}

/// Python/matplotlib script that plots `sep_joint` from each `(label, csv)`.
pub fn plot_script(curves: &[(String, String)], title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "#!/usr/bin/env python3");
    let _ = writeln!(s, "# Generated by {}.", version_string());
    let _ = writeln!(s, "import csv");
    let _ = writeln!(s, "import os");
    let _ = writeln!(s, "import matplotlib");
    let _ = writeln!(s, "matplotlib.use(\"Agg\")");
    let _ = writeln!(s, "import matplotlib.pyplot as plt\n");
    let _ = writeln!(s, "HERE = os.path.dirname(os.path.abspath(__file__))");
    let _ = writeln!(s, "CURVES = [");
    for (label, path) in curves {
        let _ = writeln!(s, "    ({label:?}, {path:?}),");
    }
    let _ = writeln!(s, "]\n");
    let _ = writeln!(s, "def load(path):");
    let _ = writeln!(s, "    with open(os.path.join(HERE, path)) as fh:");
    let _ = writeln!(s, "        rows = [l for l in fh if not l.startswith(\"#\")]");
    let _ = writeln!(s, "    snr, sep = [], []");
    let _ = writeln!(s, "    for row in csv.DictReader(rows):");
    let _ = writeln!(s, "        p = float(row[\"sep_joint\"])");
    let _ = writeln!(s, "        if p > 0:");
    let _ = writeln!(s, "            snr.append(float(row[\"snr_db\"]))");
    let _ = writeln!(s, "            sep.append(p)");
    let _ = writeln!(s, "    return snr, sep\n");
    let _ = writeln!(s, "fig, ax = plt.subplots()");
    let _ = writeln!(s, "for label, path in CURVES:");
    let _ = writeln!(s, "    snr, sep = load(path)");
    let _ = writeln!(s, "    ax.semilogy(snr, sep, marker=\"o\", label=label)");
    let _ = writeln!(s, "ax.set_xlabel(\"SNR (dB)\")");
    let _ = writeln!(s, "ax.set_ylabel(\"Symbol error probability\")");
    let _ = writeln!(s, "ax.set_title({title:?})");
    let _ = writeln!(s, "ax.grid(True, which=\"both\", alpha=0.3)");
    let _ = writeln!(s, "ax.legend()");
    let _ = writeln!(s, "fig.savefig(os.path.join(HERE, \"sep.png\"), dpi=150)");
    s
}

pub fn emit_plot_script(curves: &[(String, String)], title: &str, path: &Path) -> Result<(), ExperimentError> {
    fs::write(path, plot_script(curves, title)).map_err(|source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    })
}
