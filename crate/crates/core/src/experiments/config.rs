//! Plain-text `key = value` sweep configuration.
//!
//! ```text
//! # equal-variance run
//! snr_db = 0,5,10,15,20
//! trials = 200000
//! decoder = fast
//! profile = equal
//! var_rd_db = 10
//! a = 1,0
//! ```
//!
//! Keys not given keep the values of [`SweepSpec::example_default`]. A
//! `profile` preset is applied before any `var_*_db` override regardless of
//! line order.

use crate::channel::FadingProfile;
use crate::numerics::Complex;
use crate::scheme::SchemeConstants;

use super::scenario::Scenario;
use super::{ExperimentError, SweepSpec};

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64, ExperimentError> {
    v.trim().parse::<f64>().map_err(|e| ExperimentError::Config {
        line,
        msg: format!("{key}: {e}"),
    })
}

/// `re,im` or a bare real number.
pub fn parse_complex(v: &str) -> Result<Complex, String> {
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    let num = |s: &str| s.parse::<f64>().map_err(|e| format!("'{s}': {e}"));
    match parts.as_slice() {
        [re] => Ok(Complex::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex::new(num(re)?, num(im)?)),
        _ => Err(format!("expected 're,im', got '{v}'")),
    }
}

/// Comma list of dB values, or `start:step:stop` inclusive.
pub fn parse_snr_list(v: &str) -> Result<Vec<f64>, String> {
    let v = v.trim();
    if let [start, step, stop] = v.split(':').map(str::trim).collect::<Vec<_>>().as_slice() {
        let num = |s: &str| s.parse::<f64>().map_err(|e| format!("'{s}': {e}"));
        let (start, step, stop) = (num(start)?, num(step)?, num(stop)?);
        if !(step > 0.0) {
            return Err("range step must be positive".into());
        }
        let n = ((stop - start) / step + 1e-9).floor() as i64;
        return Ok((0..=n.max(-1)).map(|i| start + step * i as f64).collect());
    }
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| format!("'{s}': {e}")))
        .collect()
}

/// Applies every `key = value` line of `text` on top of `base`.
pub fn parse_config(text: &str, base: SweepSpec) -> Result<SweepSpec, ExperimentError> {
    let mut spec = base;
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ExperimentError::Config {
            line,
            msg: format!("expected key = value, got '{content}'"),
        })?;
        entries.push((line, key.trim().to_ascii_lowercase(), value.trim().to_string()));
    }

    if let Some((line, _, v)) = entries.iter().rev().find(|(_, k, _)| k == "profile") {
        let scenario: Scenario = v.parse().map_err(|msg| ExperimentError::Config { line: *line, msg })?;
        spec.profile = scenario.profile();
    }

    let mut db = spec.profile.to_db();
    let (mut a, mut b, mut c, mut d) = (
        spec.constants.a(),
        spec.constants.b(),
        spec.constants.c(),
        spec.constants.d(),
    );
    for (line, key, value) in &entries {
        let line = *line;
        let cfg_err = |msg: String| ExperimentError::Config { line, msg };
        match key.as_str() {
            "profile" => {}
            "snr_db" => spec.snr_points_db = parse_snr_list(value).map_err(cfg_err)?,
            "trials" | "trials_per_point" => {
                spec.trials_per_point = value.parse().map_err(|e| cfg_err(format!("{key}: {e}")))?
            }
            "max_errors" => {
                let n: u64 = value.parse().map_err(|e| cfg_err(format!("{key}: {e}")))?;
                spec.max_errors = (n > 0).then_some(n);
            }
            "seed" => spec.seed = value.parse().map_err(|e| cfg_err(format!("{key}: {e}")))?,
            "m" => spec.m = value.parse().map_err(|e| cfg_err(format!("{key}: {e}")))?,
            "map" => spec.map = value.parse().map_err(cfg_err)?,
            "decoder" => spec.decoder = value.parse().map_err(cfg_err)?,
            "log_weight" => spec.log_weight = parse_f64(line, key, value)?,
            "theta" => spec.theta = parse_complex(value).map_err(cfg_err)?,
            "a" => a = parse_complex(value).map_err(cfg_err)?,
            "b" => b = parse_complex(value).map_err(cfg_err)?,
            "c" => c = parse_complex(value).map_err(cfg_err)?,
            "d" => d = parse_complex(value).map_err(cfg_err)?,
            "var_ar_db" => db[0] = parse_f64(line, key, value)?,
            "var_br_db" => db[1] = parse_f64(line, key, value)?,
            "var_ad_db" => db[2] = parse_f64(line, key, value)?,
            "var_bd_db" => db[3] = parse_f64(line, key, value)?,
            "var_rd_db" => db[4] = parse_f64(line, key, value)?,
            other => return Err(cfg_err(format!("unknown key '{other}'"))),
        }
    }
    spec.profile = FadingProfile::from_db(db[0], db[1], db[2], db[3], db[4])?;
    spec.constants = SchemeConstants::new(a, b, c, d, 1.0)?;
    Ok(spec)
}
